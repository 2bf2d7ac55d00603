//! Everything observable about the `maskc` command line lives here: the
//! on-disk program format, the exit-code contract, and the work behind each
//! verb. `main.rs` is only an argument parser over these functions, so
//! integration tests can drive the same code paths directly.
//!
//! File formats: matrices and vectors use the plain-text format from
//! `maskc_core::io` (human-diffable); programs are a single JSON document
//! ([`ProgramFile`]) carrying the mask phases plus free-form provenance
//! metadata. No command writes a partial file: all output goes through a
//! temp-file-plus-rename so failures leave the destination untouched.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use maskc_core::bench::{run_bench, to_csv, BenchRecord};
use maskc_core::io::{format_matrix, format_vector, parse_matrix, parse_vector};
use maskc_core::{
    compile, haar_random_unitary, polar_unitary_factor, retarget_to_mmi, verify_program, CMat,
    Error as CoreError, PhaseMask, PhaseMaskProgram, Tolerance, TransformKind,
};

/// Process exit codes. Scripts depend on these staying put.
pub mod exit_code {
    /// Success; for `verify`, the residual was within tolerance.
    pub const OK: i32 = 0;
    /// `verify` parsed everything but the residual exceeded its bound.
    pub const RESIDUAL_EXCEEDED: i32 = 1;
    /// Unreadable, unparseable, or structurally invalid input (including
    /// odd-dimension matrices, which no program can represent).
    pub const INVALID_INPUT: i32 = 2;
    /// Input matrix is not unitary and projection was not requested.
    pub const NOT_UNITARY: i32 = 3;
    /// A freshly produced program failed its own re-verification.
    pub const VERIFICATION_FAILED: i32 = 4;
    /// Inputs parsed individually but their dimensions disagree.
    pub const DIMENSION_MISMATCH: i32 = 5;
}

/// Default residual tolerance per unit of dimension: bounds are 1e-9·n
/// absolute, 1e-9 relative for the sampled verification of large programs.
pub const DEFAULT_TOL_PER_N: f64 = 1e-9;

/// Version tag of the on-disk program schema this build reads and writes.
pub const SCHEMA_VERSION: u32 = 1;

/// What a failed command reports: a stderr message and the process exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (exit {})", self.message, self.code)
    }
}

pub type CmdResult = Result<(), Failure>;

/// Core errors raised while reading or shaping inputs. Unitarity and
/// verification failures keep their dedicated codes so callers can rely on
/// them regardless of which layer noticed.
fn input_failure(e: CoreError) -> Failure {
    let code = match &e {
        CoreError::NotUnitary { .. } => exit_code::NOT_UNITARY,
        CoreError::VerificationFailed { .. } => exit_code::VERIFICATION_FAILED,
        CoreError::ShapeMismatch { .. } | CoreError::LengthMismatch { .. } => {
            exit_code::DIMENSION_MISMATCH
        }
        _ => exit_code::INVALID_INPUT,
    };
    Failure::new(code, e.to_string())
}

// ---------------------------------------------------------------------------
// On-disk program format
// ---------------------------------------------------------------------------

/// Serialized program: a single JSON document.
///
/// `zeta0` is present exactly when `transform` is `"mmi"`. Phases are raw
/// radians, canonicalized into [0, 2π) at write time; JSON numbers are
/// printed as the shortest decimal that round-trips the f64 bit pattern, so
/// parse(serialize(p)) reproduces every phase bit-identically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProgramFile {
    pub schema_version: u32,
    pub n: usize,
    /// `"dft"` or `"mmi"`.
    pub transform: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zeta0: Option<f64>,
    /// 6n+1 masks of n phases each.
    pub masks: Vec<Vec<f64>>,
    /// Free-form provenance: tool version, source file, residual, …
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub metadata: BTreeMap<String, String>,
}

impl ProgramFile {
    /// Snapshot a program for writing. Phases are canonicalized here; the
    /// in-memory program is left untouched.
    pub fn from_program(p: &PhaseMaskProgram, metadata: BTreeMap<String, String>) -> ProgramFile {
        let zeta0 = match p.transform() {
            TransformKind::Mmi { zeta0 } => Some(zeta0),
            TransformKind::IdealDft => None,
        };
        ProgramFile {
            schema_version: SCHEMA_VERSION,
            n: p.n(),
            transform: p.transform().name().to_string(),
            zeta0,
            masks: p
                .masks()
                .iter()
                .map(|m| m.canonicalized().phases().to_vec())
                .collect(),
            metadata,
        }
    }

    /// Validate the document and build the executable program. All structural
    /// problems are invalid-input failures (exit 2).
    pub fn to_program(&self) -> Result<PhaseMaskProgram, Failure> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Failure::new(
                exit_code::INVALID_INPUT,
                format!(
                    "unsupported schema_version {} (this tool reads {})",
                    self.schema_version, SCHEMA_VERSION
                ),
            ));
        }
        let transform = match (self.transform.as_str(), self.zeta0) {
            ("dft", None) => TransformKind::IdealDft,
            ("dft", Some(_)) => {
                return Err(Failure::new(
                    exit_code::INVALID_INPUT,
                    "zeta0 is only valid in mmi programs",
                ))
            }
            ("mmi", Some(z)) if z.is_finite() => TransformKind::Mmi { zeta0: z },
            ("mmi", Some(z)) => {
                return Err(Failure::new(
                    exit_code::INVALID_INPUT,
                    format!("zeta0 must be finite, got {z}"),
                ))
            }
            ("mmi", None) => {
                return Err(Failure::new(
                    exit_code::INVALID_INPUT,
                    "mmi programs require zeta0",
                ))
            }
            (other, _) => {
                return Err(Failure::new(
                    exit_code::INVALID_INPUT,
                    format!("unknown transform {other:?} (expected \"dft\" or \"mmi\")"),
                ))
            }
        };
        // Inside a document every defect is bad input, including shape
        // problems that would be dimension mismatches between two files.
        let invalid = |e: CoreError| Failure::new(exit_code::INVALID_INPUT, e.to_string());
        let masks = self
            .masks
            .iter()
            .map(|m| PhaseMask::new(m.clone()))
            .collect::<maskc_core::Result<Vec<_>>>()
            .map_err(invalid)?;
        PhaseMaskProgram::new(self.n, transform, masks).map_err(invalid)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("program files serialize cleanly");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<ProgramFile, Failure> {
        serde_json::from_str(text).map_err(|e| Failure::new(exit_code::INVALID_INPUT, e.to_string()))
    }
}

// ---------------------------------------------------------------------------
// Shared plumbing
// ---------------------------------------------------------------------------

/// Write through a temp file in the destination directory plus an atomic
/// rename, so a failure partway never leaves a partial file at `path`.
pub fn write_atomic(path: &Path, content: &str) -> CmdResult {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let attempt = || -> std::io::Result<()> {
        let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
        tmp.write_all(content.as_bytes())?;
        tmp.persist(path).map_err(|e| e.error)?;
        Ok(())
    };
    attempt().map_err(|e| {
        Failure::new(
            exit_code::INVALID_INPUT,
            format!("cannot write {}: {e}", path.display()),
        )
    })
}

fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| {
        Failure::new(
            exit_code::INVALID_INPUT,
            format!("cannot read {}: {e}", path.display()),
        )
    })
}

fn read_matrix(path: &Path) -> Result<CMat, Failure> {
    let text = read_text(path)?;
    parse_matrix(&text)
        .map_err(|e| Failure::new(exit_code::INVALID_INPUT, format!("{}: {e}", path.display())))
}

fn read_vector(path: &Path) -> Result<Vec<num_complex::Complex64>, Failure> {
    let text = read_text(path)?;
    parse_vector(&text)
        .map_err(|e| Failure::new(exit_code::INVALID_INPUT, format!("{}: {e}", path.display())))
}

/// Read and validate a program file, returning both the document (for
/// metadata) and the executable program.
pub fn read_program(path: &Path) -> Result<(ProgramFile, PhaseMaskProgram), Failure> {
    let text = read_text(path)?;
    let prefix = |f: Failure| Failure::new(f.code, format!("{}: {}", path.display(), f.message));
    let file = ProgramFile::from_json(&text).map_err(prefix)?;
    let program = file.to_program().map_err(prefix)?;
    Ok((file, program))
}

/// Residual tolerance for dimension `n`: `--tol` overrides the absolute
/// bound (default 1e-9·n); the relative bound used by sampled verification
/// of large programs is the absolute bound divided by n.
fn resolve_tol(flag: Option<f64>, n: usize) -> Result<Tolerance, Failure> {
    let absolute = match flag {
        Some(t) if t.is_finite() && t > 0.0 => t,
        Some(t) => {
            return Err(Failure::new(
                exit_code::INVALID_INPUT,
                format!("--tol must be finite and positive, got {t}"),
            ))
        }
        None => DEFAULT_TOL_PER_N * n as f64,
    };
    Ok(Tolerance {
        absolute,
        relative: absolute / n as f64,
    })
}

fn tool_version() -> String {
    format!("maskc {}", env!("CARGO_PKG_VERSION"))
}

/// FNV-1a (64-bit): a stable content fingerprint for provenance metadata.
fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x100_0000_01b3);
    }
    h
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

/// Which mixing transform the emitted program targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Target {
    Dft,
    Mmi,
}

pub struct CompileArgs<'a> {
    pub input: &'a Path,
    pub output: &'a Path,
    pub target: Target,
    /// Coupler global phase; only meaningful with `Target::Mmi` (default 0).
    pub zeta0: Option<f64>,
    /// Absolute residual bound; default 1e-9·n.
    pub tol: Option<f64>,
    /// Project near-unitary input to the nearest unitary instead of failing.
    pub project_unitary: bool,
}

/// Compile a matrix file into a program file. Prints `residual <r>` and
/// exits 0 only after the program, as re-read from its serialized form, has
/// been verified against the input matrix.
pub fn cmd_compile(args: &CompileArgs) -> CmdResult {
    let text = read_text(args.input)?;
    let mut u = parse_matrix(&text)
        .map_err(|e| Failure::new(exit_code::INVALID_INPUT, format!("{}: {e}", args.input.display())))?;
    if !u.is_square() {
        return Err(Failure::new(
            exit_code::INVALID_INPUT,
            format!(
                "{}: matrix is {}x{}, expected square",
                args.input.display(),
                u.rows(),
                u.cols()
            ),
        ));
    }
    let n = u.rows();
    if n % 2 != 0 {
        return Err(Failure::new(
            exit_code::INVALID_INPUT,
            format!(
                "{}: dimension {n} is odd; programs exist only for even dimensions",
                args.input.display()
            ),
        ));
    }
    if args.target == Target::Dft && args.zeta0.is_some() {
        return Err(Failure::new(
            exit_code::INVALID_INPUT,
            "--zeta0 only applies to --target mmi",
        ));
    }
    let tol = resolve_tol(args.tol, n)?;

    let defect = u.unitarity_defect().map_err(input_failure)?;
    if defect > tol.absolute {
        if args.project_unitary {
            eprintln!(
                "warning: input deviates from unitarity by max|U^H U - I| = {defect:.3e}; \
                 projecting to the nearest unitary"
            );
            u = polar_unitary_factor(&u).map_err(|e| {
                Failure::new(
                    exit_code::NOT_UNITARY,
                    format!("cannot project {}: {e}", args.input.display()),
                )
            })?;
        } else {
            return Err(Failure::new(
                exit_code::NOT_UNITARY,
                format!(
                    "{}: not unitary: max|U^H U - I| = {defect:.3e} exceeds {:.3e} \
                     (use --project-unitary to compile the nearest unitary)",
                    args.input.display(),
                    tol.absolute
                ),
            ));
        }
    }

    let compiled = compile(&u, &tol).map_err(pipeline_failure)?;
    let mut metadata = BTreeMap::new();
    metadata.insert("tool".to_string(), tool_version());
    metadata.insert("source".to_string(), args.input.display().to_string());
    metadata.insert(
        "source_fnv1a64".to_string(),
        format!("{:016x}", fnv1a64(text.as_bytes())),
    );
    let program = match args.target {
        Target::Dft => compiled.program,
        Target::Mmi => {
            let zeta0 = args.zeta0.unwrap_or(0.0);
            metadata.insert(
                "dft_residual".to_string(),
                format!("{:e}", compiled.residual),
            );
            retarget_to_mmi(&compiled.program, zeta0, &tol)
                .map_err(pipeline_failure)?
                .program
        }
    };

    // Verify exactly what will land on disk: the file stores canonicalized
    // phases, so round-trip through the document before the final check.
    let mut file = ProgramFile::from_program(&program, metadata);
    let reread = file.to_program()?;
    let residual = verify_program(&reread, &u, &tol).map_err(pipeline_failure)?;
    file.metadata
        .insert("residual".to_string(), format!("{residual:e}"));
    write_atomic(args.output, &file.to_json())?;
    println!("residual {residual:e}");
    Ok(())
}

/// Errors out of compile/retarget/re-verify: a verification miss is exit 4,
/// a unitarity miss exit 3, anything else bad input.
fn pipeline_failure(e: CoreError) -> Failure {
    let code = match &e {
        CoreError::VerificationFailed { .. } => exit_code::VERIFICATION_FAILED,
        CoreError::NotUnitary { .. } => exit_code::NOT_UNITARY,
        _ => exit_code::INVALID_INPUT,
    };
    Failure::new(code, e.to_string())
}

/// Check a program file against a target matrix. Prints `residual <r>`
/// whenever the comparison ran; exit 0 iff it is within tolerance.
pub fn cmd_verify(program_path: &Path, matrix_path: &Path, tol: Option<f64>) -> CmdResult {
    let (_, program) = read_program(program_path)?;
    let u = read_matrix(matrix_path)?;
    if !u.is_square() {
        return Err(Failure::new(
            exit_code::INVALID_INPUT,
            format!(
                "{}: matrix is {}x{}, expected square",
                matrix_path.display(),
                u.rows(),
                u.cols()
            ),
        ));
    }
    if u.rows() != program.n() {
        return Err(Failure::new(
            exit_code::DIMENSION_MISMATCH,
            format!(
                "program is for dimension {}, matrix is {}x{}",
                program.n(),
                u.rows(),
                u.cols()
            ),
        ));
    }
    let tol = resolve_tol(tol, program.n())?;
    match verify_program(&program, &u, &tol) {
        Ok(residual) => {
            println!("residual {residual:e}");
            Ok(())
        }
        Err(CoreError::VerificationFailed { residual, tol }) => {
            println!("residual {residual:e}");
            Err(Failure::new(
                exit_code::RESIDUAL_EXCEEDED,
                format!("residual {residual:e} exceeds tolerance {tol:e}"),
            ))
        }
        Err(e) => Err(input_failure(e)),
    }
}

/// Apply a program to a vector. FFT-based by default; `dense` forces the
/// O(n²) per-layer path for cross-checking. Output goes to `output` or, if
/// absent, to standard output in the same vector text format.
pub fn cmd_apply(
    program_path: &Path,
    vector_path: &Path,
    output: Option<&Path>,
    dense: bool,
) -> CmdResult {
    let (_, program) = read_program(program_path)?;
    let v = read_vector(vector_path)?;
    if v.len() != program.n() {
        return Err(Failure::new(
            exit_code::DIMENSION_MISMATCH,
            format!(
                "program is for dimension {}, vector has length {}",
                program.n(),
                v.len()
            ),
        ));
    }
    let result = if dense {
        program.dense_apply(&v)
    } else {
        program.fast_apply(&v)
    }
    .map_err(input_failure)?;
    let text = format_vector(&result);
    match output {
        Some(path) => write_atomic(path, &text)?,
        None => print!("{text}"),
    }
    Ok(())
}

/// Write a Haar-random unitary in matrix text format. Deterministic in the
/// seed; odd dimensions are allowed but warned about, since no program can
/// be compiled from them.
pub fn cmd_random(n: usize, seed: u64, output: &Path) -> CmdResult {
    if n % 2 != 0 {
        eprintln!("warning: dimension {n} is odd; the matrix will not be compilable");
    }
    let u = haar_random_unitary(n, seed).map_err(input_failure)?;
    write_atomic(output, &format_matrix(&u))
}

/// Time compile and per-layer application across sizes; emit CSV to `output`
/// or standard output. A failing size becomes a NaN row plus a warning, and
/// never aborts the sweep.
pub fn cmd_bench(sizes: &[usize], repeats: usize, seed: u64, output: Option<&Path>) -> CmdResult {
    let mut records = Vec::with_capacity(sizes.len());
    for &n in sizes {
        match run_bench(&[n], seed, repeats, DEFAULT_TOL_PER_N) {
            Ok(mut rs) => records.append(&mut rs),
            Err(e) => {
                eprintln!("warning: skipping n = {n}: {e}");
                records.push(BenchRecord {
                    n,
                    compile_s: f64::NAN,
                    dense_apply_s: f64::NAN,
                    fast_apply_s: f64::NAN,
                    residual: f64::NAN,
                });
            }
        }
    }
    let csv = to_csv(&records);
    match output {
        Some(path) => write_atomic(path, &csv)?,
        None => print!("{csv}"),
    }
    Ok(())
}

/// Rewrite a dft program for the physical coupler transform with global
/// phase `zeta0`. The rewritten program is re-verified against the dense
/// matrix of the input program before anything is written.
pub fn cmd_retarget(
    program_path: &Path,
    zeta0: f64,
    output: &Path,
    tol: Option<f64>,
) -> CmdResult {
    if !zeta0.is_finite() {
        return Err(Failure::new(
            exit_code::INVALID_INPUT,
            format!("--zeta0 must be finite, got {zeta0}"),
        ));
    }
    let (file_in, program) = read_program(program_path)?;
    let tol = resolve_tol(tol, program.n())?;
    let u = program.dense_matrix().map_err(input_failure)?;
    let retargeted = retarget_to_mmi(&program, zeta0, &tol).map_err(|e| match &e {
        // A non-dft input program is the caller's mistake, not a pipeline bug.
        CoreError::WrongTransform { .. } => Failure::new(exit_code::INVALID_INPUT, e.to_string()),
        _ => pipeline_failure(e),
    })?;

    let mut metadata = file_in.metadata.clone();
    metadata.insert("tool".to_string(), tool_version());
    metadata.insert(
        "retargeted_from".to_string(),
        program_path.display().to_string(),
    );
    let mut file = ProgramFile::from_program(&retargeted.program, metadata);
    let reread = file.to_program()?;
    let residual = verify_program(&reread, &u, &tol).map_err(pipeline_failure)?;
    file.metadata
        .insert("residual".to_string(), format!("{residual:e}"));
    write_atomic(output, &file.to_json())?;
    println!("residual {residual:e}");
    Ok(())
}
