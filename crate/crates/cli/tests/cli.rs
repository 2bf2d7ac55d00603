//! End-to-end tests of the `maskc` binary: file formats, stdout/stderr
//! contracts, exit codes, and the no-partial-output guarantee.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use maskc_cli::{exit_code, ProgramFile};
use maskc_core::fixed::dft_matrix;
use maskc_core::io::{format_matrix, parse_matrix, parse_vector};
use maskc_core::{haar_random_unitary, is_unitary, CMat, Tolerance};
use num_complex::Complex64;

fn maskc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_maskc"))
        .args(args)
        .output()
        .expect("binary launches")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn s(p: &Path) -> &str {
    p.to_str().expect("utf-8 path")
}

/// Parse the `residual <r>` line a verifying command prints.
fn printed_residual(out: &Output) -> f64 {
    let text = stdout(out);
    let line = text
        .lines()
        .find(|l| l.starts_with("residual "))
        .unwrap_or_else(|| panic!("no residual line in {text:?}"));
    line["residual ".len()..].parse().expect("residual parses")
}

fn write_matrix(path: &Path, m: &CMat) {
    fs::write(path, format_matrix(m)).expect("fixture written");
}

fn load_program_file(path: &Path) -> ProgramFile {
    ProgramFile::from_json(&fs::read_to_string(path).expect("program file readable"))
        .expect("program file parses")
}

#[test]
fn compile_identity_writes_a_verified_program() {
    let dir = tempfile::tempdir().expect("tempdir");
    let input = dir.path().join("id4.mat");
    let output = dir.path().join("id4.json");
    write_matrix(&input, &CMat::identity(4));

    let out = maskc(&["compile", s(&input), "-o", s(&output)]);
    assert_eq!(code(&out), exit_code::OK, "stderr: {}", stderr(&out));
    assert!(printed_residual(&out) < 1e-11);

    let file = load_program_file(&output);
    assert_eq!(file.schema_version, 1);
    assert_eq!(file.n, 4);
    assert_eq!(file.transform, "dft");
    assert_eq!(file.masks.len(), 25);
    assert!(file.masks.iter().all(|m| m.len() == 4));
    for key in ["tool", "source", "source_fnv1a64", "residual"] {
        assert!(file.metadata.contains_key(key), "metadata missing {key}");
    }
}

#[test]
fn compile_rejects_non_unitary_and_writes_nothing() {
    let dir = tempfile::tempdir().expect("tempdir");
    let input = dir.path().join("stretch.mat");
    let output = dir.path().join("never.json");
    let mut m = CMat::identity(4);
    m[(0, 0)] = Complex64::new(2.0, 0.0);
    write_matrix(&input, &m);

    let out = maskc(&["compile", s(&input), "-o", s(&output)]);
    assert_eq!(code(&out), exit_code::NOT_UNITARY);
    let err = stderr(&out);
    assert!(err.contains("not unitary"), "diagnostic: {err}");
    assert!(err.contains("max|U^H U - I|"), "names the norm: {err}");
    assert!(!output.exists(), "failed compile must not write output");
}

#[test]
fn compile_projects_near_unitary_when_asked() {
    let dir = tempfile::tempdir().expect("tempdir");
    let input = dir.path().join("near.mat");
    let output = dir.path().join("near.json");
    let u = haar_random_unitary(4, 9).expect("haar");
    write_matrix(&input, &u.scaled(Complex64::new(1.000001, 0.0)));

    // Without the flag: refused.
    let out = maskc(&["compile", s(&input), "-o", s(&output)]);
    assert_eq!(code(&out), exit_code::NOT_UNITARY);

    // With it: compiles the nearest unitary and says so.
    let out = maskc(&["compile", s(&input), "-o", s(&output), "--project-unitary"]);
    assert_eq!(code(&out), exit_code::OK, "stderr: {}", stderr(&out));
    assert!(stderr(&out).contains("projecting"), "warning expected");
    assert!(output.exists());

    // The program implements the projection, not the stretched input.
    let out = maskc(&["verify", s(&output), s(&input)]);
    assert_eq!(code(&out), exit_code::RESIDUAL_EXCEEDED);
}

#[test]
fn compile_rejects_odd_dimension() {
    let dir = tempfile::tempdir().expect("tempdir");
    let input = dir.path().join("id3.mat");
    let output = dir.path().join("never.json");
    write_matrix(&input, &CMat::identity(3));

    let out = maskc(&["compile", s(&input), "-o", s(&output)]);
    assert_eq!(code(&out), exit_code::INVALID_INPUT);
    assert!(stderr(&out).contains("odd"));
    assert!(!output.exists());
}

#[test]
fn compile_with_impossible_tolerance_fails_verification_and_writes_nothing() {
    let dir = tempfile::tempdir().expect("tempdir");
    let input = dir.path().join("id4.mat");
    let output = dir.path().join("never.json");
    write_matrix(&input, &CMat::identity(4));

    let out = maskc(&["compile", s(&input), "-o", s(&output), "--tol", "1e-30"]);
    assert_eq!(code(&out), exit_code::VERIFICATION_FAILED);
    assert!(!output.exists(), "failed verification must not write output");
}

#[test]
fn zeta0_requires_the_mmi_target() {
    let dir = tempfile::tempdir().expect("tempdir");
    let input = dir.path().join("id4.mat");
    write_matrix(&input, &CMat::identity(4));

    let out = maskc(&[
        "compile",
        s(&input),
        "-o",
        s(&dir.path().join("never.json")),
        "--zeta0",
        "0.5",
    ]);
    assert_eq!(code(&out), exit_code::INVALID_INPUT);
}

#[test]
fn verify_accepts_fresh_programs_and_flags_tampering() {
    let dir = tempfile::tempdir().expect("tempdir");
    let input = dir.path().join("u4.mat");
    let program = dir.path().join("u4.json");
    write_matrix(&input, &haar_random_unitary(4, 3).expect("haar"));

    let out = maskc(&["compile", s(&input), "-o", s(&program)]);
    assert_eq!(code(&out), exit_code::OK, "stderr: {}", stderr(&out));

    let out = maskc(&["verify", s(&program), s(&input)]);
    assert_eq!(code(&out), exit_code::OK, "stderr: {}", stderr(&out));
    assert!(printed_residual(&out) <= 4e-9);

    // Nudge one phase: the residual line still prints, the exit code flips.
    let mut file = load_program_file(&program);
    file.masks[3][1] += 0.3;
    fs::write(&program, file.to_json()).expect("tampered file written");
    let out = maskc(&["verify", s(&program), s(&input)]);
    assert_eq!(code(&out), exit_code::RESIDUAL_EXCEEDED);
    assert!(printed_residual(&out) > 1e-6);
}

#[test]
fn verify_reports_dimension_mismatch() {
    let dir = tempfile::tempdir().expect("tempdir");
    let input = dir.path().join("u4.mat");
    let program = dir.path().join("u4.json");
    let other = dir.path().join("u6.mat");
    write_matrix(&input, &CMat::identity(4));
    write_matrix(&other, &haar_random_unitary(6, 1).expect("haar"));

    let out = maskc(&["compile", s(&input), "-o", s(&program)]);
    assert_eq!(code(&out), exit_code::OK);
    let out = maskc(&["verify", s(&program), s(&other)]);
    assert_eq!(code(&out), exit_code::DIMENSION_MISMATCH);
}

#[test]
fn verify_rejects_malformed_program_documents() {
    let dir = tempfile::tempdir().expect("tempdir");
    let program = dir.path().join("garbage.json");
    let matrix = dir.path().join("id4.mat");
    fs::write(&program, "not a program\n").expect("written");
    write_matrix(&matrix, &CMat::identity(4));

    let out = maskc(&["verify", s(&program), s(&matrix)]);
    assert_eq!(code(&out), exit_code::INVALID_INPUT);
}

#[test]
fn apply_reproduces_the_dense_oracle_column() {
    let dir = tempfile::tempdir().expect("tempdir");
    let input = dir.path().join("f4.mat");
    let program = dir.path().join("f4.json");
    let vector = dir.path().join("e0.vec");
    let result = dir.path().join("out.vec");
    let f4 = dft_matrix(4).expect("dft");
    write_matrix(&input, &f4);
    fs::write(&vector, "4 1\n1,0\n0,0\n0,0\n0,0\n").expect("vector written");

    let out = maskc(&["compile", s(&input), "-o", s(&program)]);
    assert_eq!(code(&out), exit_code::OK, "stderr: {}", stderr(&out));
    let out = maskc(&["apply", s(&program), s(&vector), "-o", s(&result)]);
    assert_eq!(code(&out), exit_code::OK, "stderr: {}", stderr(&out));

    let y = parse_vector(&fs::read_to_string(&result).expect("result readable")).expect("parses");
    for (j, got) in y.iter().enumerate() {
        assert!(
            (got - f4[(j, 0)]).norm() < 1e-10,
            "entry {j}: {got} vs {}",
            f4[(j, 0)]
        );
    }
}

#[test]
fn apply_fast_and_dense_paths_agree() {
    let dir = tempfile::tempdir().expect("tempdir");
    let input = dir.path().join("u6.mat");
    let program = dir.path().join("u6.json");
    let vector = dir.path().join("x.vec");
    write_matrix(&input, &haar_random_unitary(6, 11).expect("haar"));
    fs::write(
        &vector,
        "6 1\n0.21,-0.4\n-1.3,0.05\n0.7,0.7\n-0.02,1.1\n0.5,-0.9\n0.33,0.08\n",
    )
    .expect("vector written");

    let out = maskc(&["compile", s(&input), "-o", s(&program)]);
    assert_eq!(code(&out), exit_code::OK, "stderr: {}", stderr(&out));

    let fast = maskc(&["apply", s(&program), s(&vector)]);
    assert_eq!(code(&fast), exit_code::OK);
    let dense = maskc(&["apply", s(&program), s(&vector), "--dense"]);
    assert_eq!(code(&dense), exit_code::OK);

    let yf = parse_vector(&stdout(&fast)).expect("fast output parses");
    let yd = parse_vector(&stdout(&dense)).expect("dense output parses");
    let norm: f64 = yd.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let diff: f64 = yf
        .iter()
        .zip(&yd)
        .map(|(a, b)| (a - b).norm_sqr())
        .sum::<f64>()
        .sqrt();
    assert!(diff / norm < 1e-9, "relative gap {}", diff / norm);
}

#[test]
fn apply_reports_length_mismatch() {
    let dir = tempfile::tempdir().expect("tempdir");
    let input = dir.path().join("id4.mat");
    let program = dir.path().join("id4.json");
    let vector = dir.path().join("x6.vec");
    write_matrix(&input, &CMat::identity(4));
    fs::write(&vector, "6 1\n1,0\n0,0\n0,0\n0,0\n0,0\n0,0\n").expect("vector written");

    let out = maskc(&["compile", s(&input), "-o", s(&program)]);
    assert_eq!(code(&out), exit_code::OK);
    let out = maskc(&["apply", s(&program), s(&vector)]);
    assert_eq!(code(&out), exit_code::DIMENSION_MISMATCH);
}

#[test]
fn random_is_deterministic_unitary_and_seed_sensitive() {
    let dir = tempfile::tempdir().expect("tempdir");
    let a = dir.path().join("a.mat");
    let b = dir.path().join("b.mat");
    let c = dir.path().join("c.mat");

    assert_eq!(code(&maskc(&["random", "6", "--seed", "42", "-o", s(&a)])), 0);
    assert_eq!(code(&maskc(&["random", "6", "--seed", "42", "-o", s(&b)])), 0);
    assert_eq!(code(&maskc(&["random", "6", "--seed", "43", "-o", s(&c)])), 0);

    let bytes_a = fs::read(&a).expect("a readable");
    assert_eq!(bytes_a, fs::read(&b).expect("b readable"), "same seed, same bytes");
    assert_ne!(bytes_a, fs::read(&c).expect("c readable"), "different seed");

    let u = parse_matrix(&fs::read_to_string(&a).expect("text")).expect("parses");
    assert!(is_unitary(&u, &Tolerance::absolute(1e-12)).expect("square"));
}

#[test]
fn random_warns_on_odd_dimension_but_still_writes() {
    let dir = tempfile::tempdir().expect("tempdir");
    let path = dir.path().join("odd.mat");
    let out = maskc(&["random", "5", "--seed", "1", "-o", s(&path)]);
    assert_eq!(code(&out), exit_code::OK);
    assert!(stderr(&out).contains("odd"), "warning expected");
    let u = parse_matrix(&fs::read_to_string(&path).expect("text")).expect("parses");
    assert_eq!(u.rows(), 5);
}

#[test]
fn bench_emits_the_exact_csv_contract() {
    let out = maskc(&["bench", "--sizes", "4,8", "--repeats", "1"]);
    assert_eq!(code(&out), exit_code::OK, "stderr: {}", stderr(&out));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("n,compile_s,dense_apply_s,fast_apply_s,residual"),
        "header is a format contract"
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 2);
    for (row, n) in rows.iter().zip(["4", "8"]) {
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!(fields.len(), 5);
        assert_eq!(fields[0], n);
        for f in &fields[1..4] {
            let v: f64 = f.parse().expect("timing parses");
            assert!(v > 0.0 && v.is_finite());
        }
        let residual: f64 = fields[4].parse().expect("residual parses");
        assert!(residual < 1e-8);
    }
}

#[test]
fn bench_records_failed_sizes_as_nan_rows() {
    // Dimension 3 cannot compile; the sweep must continue to 4 regardless.
    let out = maskc(&["bench", "--sizes", "3,4", "--repeats", "1"]);
    assert_eq!(code(&out), exit_code::OK);
    assert!(stderr(&out).contains("skipping n = 3"));
    let text = stdout(&out);
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[0].starts_with("3,NaN,"), "row: {}", rows[0]);
    let last = rows[1].rsplit(',').next().expect("residual field");
    assert!(last.parse::<f64>().expect("parses") < 1e-8);
}

#[test]
fn retarget_rewrites_for_the_coupler_and_verifies() {
    let dir = tempfile::tempdir().expect("tempdir");
    let input = dir.path().join("u4.mat");
    let dft_prog = dir.path().join("u4.json");
    let mmi_prog = dir.path().join("u4.mmi.json");
    write_matrix(&input, &haar_random_unitary(4, 7).expect("haar"));

    let out = maskc(&["compile", s(&input), "-o", s(&dft_prog)]);
    assert_eq!(code(&out), exit_code::OK, "stderr: {}", stderr(&out));
    let out = maskc(&["retarget", s(&dft_prog), "--zeta0", "0.8", "-o", s(&mmi_prog)]);
    assert_eq!(code(&out), exit_code::OK, "stderr: {}", stderr(&out));

    let file = load_program_file(&mmi_prog);
    assert_eq!(file.transform, "mmi");
    assert_eq!(file.zeta0, Some(0.8));
    assert_eq!(file.masks.len(), 25, "mask count preserved");
    assert!(file.metadata.contains_key("retargeted_from"));

    // The rewritten program still implements the original matrix.
    let out = maskc(&["verify", s(&mmi_prog), s(&input)]);
    assert_eq!(code(&out), exit_code::OK, "stderr: {}", stderr(&out));

    // Retargeting an mmi program is a caller error.
    let out = maskc(&["retarget", s(&mmi_prog), "--zeta0", "0.1", "-o", s(&dir.path().join("x.json"))]);
    assert_eq!(code(&out), exit_code::INVALID_INPUT);
}

#[test]
fn negative_coupler_phases_parse_as_values() {
    // Physical global phases are typically negative; `--zeta0 -1.9` must be
    // read as a value, not as a flag.
    let dir = tempfile::tempdir().expect("tempdir");
    let input = dir.path().join("u4.mat");
    let dft_prog = dir.path().join("u4.json");
    let mmi_prog = dir.path().join("u4.mmi.json");
    write_matrix(&input, &haar_random_unitary(4, 13).expect("haar"));

    let out = maskc(&["compile", s(&input), "-o", s(&dft_prog)]);
    assert_eq!(code(&out), exit_code::OK, "stderr: {}", stderr(&out));
    let out = maskc(&["retarget", s(&dft_prog), "--zeta0", "-1.9", "-o", s(&mmi_prog)]);
    assert_eq!(code(&out), exit_code::OK, "stderr: {}", stderr(&out));
    assert_eq!(load_program_file(&mmi_prog).zeta0, Some(-1.9));

    let out = maskc(&["verify", s(&mmi_prog), s(&input)]);
    assert_eq!(code(&out), exit_code::OK, "stderr: {}", stderr(&out));
}

#[test]
fn compile_straight_to_the_coupler_target() {
    let dir = tempfile::tempdir().expect("tempdir");
    let input = dir.path().join("u6.mat");
    let program = dir.path().join("u6.mmi.json");
    write_matrix(&input, &haar_random_unitary(6, 21).expect("haar"));

    let out = maskc(&[
        "compile",
        s(&input),
        "-o",
        s(&program),
        "--target",
        "mmi",
        "--zeta0",
        "1.3",
    ]);
    assert_eq!(code(&out), exit_code::OK, "stderr: {}", stderr(&out));
    assert!(printed_residual(&out) <= 6e-9);

    let file = load_program_file(&program);
    assert_eq!(file.transform, "mmi");
    assert_eq!(file.zeta0, Some(1.3));
    assert!(file.metadata.contains_key("dft_residual"));

    let out = maskc(&["verify", s(&program), s(&input)]);
    assert_eq!(code(&out), exit_code::OK, "stderr: {}", stderr(&out));
}
