//! Wall-clock measurement helpers behind the `bench` CLI verb and the
//! scaling acceptance checks: compile timing across sizes, per-layer apply
//! timing (dense matrix–vector vs FFT), CSV rendering, and a log–log
//! least-squares fit of the compile-time growth exponent.

use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::compile::compile;
use crate::error::Result;
use crate::haar::haar_random_unitary;
use crate::mat::{CMat, Tolerance};
use crate::program::{random_vector, PhaseMaskProgram};

/// Exact header of the benchmark CSV (a format contract with downstream
/// tooling — do not reword).
pub const CSV_HEADER: &str = "n,compile_s,dense_apply_s,fast_apply_s,residual";

/// One benchmark row. Timings are seconds; apply timings are per single
/// layer (one mixing transform + one mask), not per whole program, so the
/// dense/fast comparison is O(n²) vs O(n log n) at equal work.
#[derive(Debug, Clone, Copy)]
pub struct BenchRecord {
    pub n: usize,
    pub compile_s: f64,
    pub dense_apply_s: f64,
    pub fast_apply_s: f64,
    pub residual: f64,
}

impl BenchRecord {
    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{}",
            self.n, self.compile_s, self.dense_apply_s, self.fast_apply_s, self.residual
        )
    }
}

/// Render records as CSV with the contractual header.
pub fn to_csv(records: &[BenchRecord]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&r.csv_line());
        out.push('\n');
    }
    out
}

/// Seconds per call of `f`, best of `blocks` timing blocks. The iteration
/// count per block grows until a block lasts at least `min_block`, so very
/// fast bodies are still resolved by the monotonic clock.
pub fn time_per_iter<F: FnMut()>(mut f: F, blocks: usize, min_block: Duration) -> f64 {
    f(); // warm-up (page-in, lazy allocs)
    let mut iters: u64 = 1;
    let mut best = f64::INFINITY;
    for _ in 0..blocks.max(1) {
        loop {
            let t0 = Instant::now();
            for _ in 0..iters {
                f();
            }
            let dt = t0.elapsed();
            if dt >= min_block || iters >= 1 << 30 {
                best = best.min(dt.as_secs_f64() / iters as f64);
                break;
            }
            iters = iters.saturating_mul(2);
        }
    }
    best
}

/// Matrix–vector product into a preallocated buffer (no per-call allocation,
/// so the benchmark measures arithmetic, not the allocator).
fn matvec_into(m: &CMat, v: &[Complex64], out: &mut [Complex64]) {
    let n = m.cols();
    for (r, o) in out.iter_mut().enumerate() {
        let mut acc = Complex64::new(0.0, 0.0);
        let row = m.row(r);
        for k in 0..n {
            acc += row[k] * v[k];
        }
        *o = acc;
    }
}

/// Per-layer apply timings for `program`: (dense_s, fast_s).
///
/// Both sides perform exactly one layer of work per iteration: the dense
/// side multiplies by the precomputed n×n matrix of (transform · mask), the
/// fast side applies the mask pointwise and then the FFT-based transform.
pub fn time_layer_apply(
    program: &PhaseMaskProgram,
    blocks: usize,
    min_block: Duration,
) -> Result<(f64, f64)> {
    let n = program.n();
    // One physical layer, densely: F·D with D the first interior mask.
    let mut layer = program.transform_matrix()?;
    crate::program::scale_columns(&mut layer, &program.masks()[1]);

    let mut rng = ChaCha8Rng::seed_from_u64(0xbe9c);
    let v0 = random_vector(n, &mut rng);

    let mut x = v0.clone();
    let mut y = vec![Complex64::new(0.0, 0.0); n];
    let dense_s = time_per_iter(
        || {
            matvec_into(&layer, &x, &mut y);
            std::mem::swap(&mut x, &mut y);
        },
        blocks,
        min_block,
    );

    let applier = program.applier()?;
    let mut scratch = applier.make_scratch();
    let mask = program.masks()[1].clone();
    let mut z = v0;
    let fast_s = time_per_iter(
        || {
            mask.apply(&mut z);
            applier.apply(&mut z, &mut scratch);
        },
        blocks,
        min_block,
    );
    Ok((dense_s, fast_s))
}

/// Compile a Haar matrix per size and measure compile time plus per-layer
/// apply times. `repeats` controls the best-of block count for the apply
/// timers (and extra compile runs when a single compile is too fast to
/// time reliably).
pub fn run_bench(sizes: &[usize], seed: u64, repeats: usize, tol_per_n: f64) -> Result<Vec<BenchRecord>> {
    let mut records = Vec::with_capacity(sizes.len());
    for &n in sizes {
        let u = haar_random_unitary(n, seed)?;
        let tol = Tolerance {
            absolute: tol_per_n * n as f64,
            relative: tol_per_n,
        };
        let t0 = Instant::now();
        let compiled = compile(&u, &tol)?;
        let mut compile_s = t0.elapsed().as_secs_f64();
        if compile_s < 0.05 {
            // Too fast for a single-shot wall reading; take the best of a
            // few more full compiles.
            compile_s = time_per_iter(
                || {
                    compile(&u, &tol).expect("recompilation of verified input");
                },
                repeats.max(1),
                Duration::from_millis(50),
            );
        }
        let (dense_apply_s, fast_apply_s) =
            time_layer_apply(&compiled.program, repeats.max(1), Duration::from_millis(10))?;
        records.push(BenchRecord {
            n,
            compile_s,
            dense_apply_s,
            fast_apply_s,
            residual: compiled.residual,
        });
    }
    Ok(records)
}

/// Least-squares slope of ln(compile_s) against ln(n): the measured growth
/// exponent. Returns None with fewer than two distinct sizes.
pub fn scaling_exponent(records: &[BenchRecord]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = records
        .iter()
        .filter(|r| r.n > 0 && r.compile_s > 0.0)
        .map(|r| ((r.n as f64).ln(), r.compile_s.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    if denom.abs() < 1e-12 {
        return None; // all sizes identical
    }
    Some((n * sxy - sx * sy) / denom)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_header_is_the_contractual_string() {
        assert_eq!(CSV_HEADER, "n,compile_s,dense_apply_s,fast_apply_s,residual");
    }

    #[test]
    fn csv_lines_roundtrip_through_f64_parse() {
        let r = BenchRecord {
            n: 12,
            compile_s: 0.012345678901234567,
            dense_apply_s: 3.3e-7,
            fast_apply_s: 1.7e-8,
            residual: 9.876543210987654e-13,
        };
        let line = r.csv_line();
        let parts: Vec<&str> = line.split(',').collect();
        assert_eq!(parts.len(), 5);
        assert_eq!(parts[0].parse::<usize>().unwrap(), 12);
        assert_eq!(
            parts[1].parse::<f64>().unwrap().to_bits(),
            r.compile_s.to_bits()
        );
        assert_eq!(
            parts[4].parse::<f64>().unwrap().to_bits(),
            r.residual.to_bits()
        );
        let csv = to_csv(&[r]);
        assert!(csv.starts_with(CSV_HEADER));
        assert!(csv.ends_with('\n'));
    }

    #[test]
    fn run_bench_produces_sane_rows() {
        let records = run_bench(&[4, 8], 7, 1, 1e-9).unwrap();
        assert_eq!(records.len(), 2);
        for (r, &n) in records.iter().zip(&[4usize, 8]) {
            assert_eq!(r.n, n);
            assert!(r.compile_s > 0.0);
            assert!(r.dense_apply_s > 0.0);
            assert!(r.fast_apply_s > 0.0);
            assert!(r.residual < 1e-9 * n as f64);
        }
    }

    #[test]
    fn scaling_exponent_recovers_exact_power_law() {
        let make = |n: usize, t: f64| BenchRecord {
            n,
            compile_s: t,
            dense_apply_s: 1.0,
            fast_apply_s: 1.0,
            residual: 0.0,
        };
        let cubic: Vec<BenchRecord> = [16usize, 32, 64, 128]
            .iter()
            .map(|&n| make(n, 2.5e-9 * (n as f64).powi(3)))
            .collect();
        let p = scaling_exponent(&cubic).unwrap();
        assert!((p - 3.0).abs() < 1e-9, "p={p}");
        assert!(scaling_exponent(&cubic[..1]).is_none());
        assert!(scaling_exponent(&[make(8, 1.0), make(8, 1.0)]).is_none());
    }

    #[test]
    fn timer_resolves_fast_bodies() {
        let mut acc = 0u64;
        let t = time_per_iter(
            || {
                acc = acc.wrapping_add(1);
                std::hint::black_box(acc);
            },
            1,
            Duration::from_millis(5),
        );
        assert!(t > 0.0 && t < 1e-3);
    }
}
