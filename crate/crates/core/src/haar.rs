//! Seedable Haar-random unitary matrices — the adversarial test input for
//! every roundtrip in the suite.
//!
//! Recipe: fill a matrix with standard complex Gaussians (real and imaginary
//! parts N(0, 1/2) so entries are standard complex normal), then QR-factor by
//! modified Gram-Schmidt with one reorthogonalization pass. MGS normalizes
//! with real positive pivots, i.e. it produces the unique Q whose R factor
//! has a positive real diagonal — exactly the normalization that makes Q
//! Haar-distributed, so no separate diagonal phase correction is needed.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::mat::CMat;

/// Deterministic-in-seed Haar-random n×n unitary.
pub fn haar_random_unitary(n: usize, seed: u64) -> Result<CMat> {
    if n == 0 {
        return Err(Error::ZeroDimension);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let root_half = std::f64::consts::FRAC_1_SQRT_2;
    // Column-major staging: Gram-Schmidt walks columns.
    let mut cols: Vec<Vec<Complex64>> = (0..n)
        .map(|_| {
            (0..n)
                .map(|_| {
                    let re: f64 = StandardNormal.sample(&mut rng);
                    let im: f64 = StandardNormal.sample(&mut rng);
                    Complex64::new(re * root_half, im * root_half)
                })
                .collect()
        })
        .collect();

    for j in 0..n {
        // Two projection passes: plain MGS loses orthogonality at working
        // precision for moderate n; one reorthogonalization restores it to
        // machine level ("twice is enough").
        for _pass in 0..2 {
            for i in 0..j {
                let proj: Complex64 = cols[i]
                    .iter()
                    .zip(&cols[j])
                    .map(|(q, v)| q.conj() * v)
                    .sum();
                for k in 0..n {
                    let qk = cols[i][k];
                    cols[j][k] -= proj * qk;
                }
            }
        }
        let norm = cols[j].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        debug_assert!(norm > 1e-12, "degenerate Gaussian draw");
        for z in cols[j].iter_mut() {
            *z /= norm;
        }
    }

    Ok(CMat::from_fn(n, n, |r, c| cols[c][r]))
}
