//! Phase masks: the only programmable element of the architecture.
//!
//! A mask is a length-N vector of real phases α_j representing the diagonal
//! unitary D_jj = e^{iα_j}. Phases are kept as raw radians internally (they
//! may be negative or exceed 2π); canonicalization to [0, 2π) happens only at
//! serialization boundaries, which keeps intermediate arithmetic free of
//! spurious wrap-around discontinuities.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::mat::CMat;

pub const TAU: f64 = std::f64::consts::TAU;

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseMask {
    phases: Vec<f64>,
}

impl PhaseMask {
    pub fn new(phases: Vec<f64>) -> Result<Self> {
        if let Some(bad) = phases.iter().find(|p| !p.is_finite()) {
            return Err(Error::NonFinite(format!("phase value {bad}")));
        }
        Ok(PhaseMask { phases })
    }

    /// The identity mask (all phases zero).
    pub fn zeros(n: usize) -> Self {
        PhaseMask {
            phases: vec![0.0; n],
        }
    }

    /// Recover phases from explicit unit-modulus diagonal entries.
    /// Entries are renormalized, so magnitudes up to `tol` away from 1 are
    /// accepted; anything further off is a caller bug.
    pub fn from_unit_entries(entries: &[Complex64], tol: f64) -> Result<Self> {
        let mut phases = Vec::with_capacity(entries.len());
        for z in entries {
            let r = z.norm();
            if !r.is_finite() || (r - 1.0).abs() > tol {
                return Err(Error::InvalidArgument(format!(
                    "diagonal entry {z} has modulus {r}; expected 1"
                )));
            }
            phases.push(z.arg());
        }
        Ok(PhaseMask { phases })
    }

    pub fn len(&self) -> usize {
        self.phases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phases.is_empty()
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    pub fn phase(&self, j: usize) -> f64 {
        self.phases[j]
    }

    /// e^{iα_j} for every j.
    pub fn diag_entries(&self) -> Vec<Complex64> {
        self.phases.iter().map(|&p| Complex64::cis(p)).collect()
    }

    pub fn entry(&self, j: usize) -> Complex64 {
        Complex64::cis(self.phases[j])
    }

    pub fn to_matrix(&self) -> CMat {
        CMat::from_diag(&self.diag_entries())
    }

    /// Pointwise product of the two diagonals (phases add).
    pub fn composed(&self, other: &PhaseMask) -> Result<PhaseMask> {
        if self.len() != other.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                got: other.len(),
            });
        }
        Ok(PhaseMask {
            phases: self
                .phases
                .iter()
                .zip(&other.phases)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    /// Complex conjugate mask (phases negate).
    pub fn conjugated(&self) -> PhaseMask {
        PhaseMask {
            phases: self.phases.iter().map(|p| -p).collect(),
        }
    }

    /// The reversal-after-first-entry map p: (d_0, d_1, …, d_{N−1}) ↦
    /// (d_0, d_{N−1}, …, d_1). Conjugating a diagonal by the DFT reversal
    /// permutation produces exactly this reordering, so it shows up
    /// throughout the mask algebra.
    pub fn reversed_after_first(&self) -> PhaseMask {
        let n = self.phases.len();
        let mut out = Vec::with_capacity(n);
        if n == 0 {
            return PhaseMask { phases: out };
        }
        out.push(self.phases[0]);
        for j in 1..n {
            out.push(self.phases[n - j]);
        }
        PhaseMask { phases: out }
    }

    /// Gather by an index map: `out[j] = self[map[j]]`. With `map` the inverse
    /// of a permutation σ this realizes the diagonal conjugation Q·D·Q\u{2020}
    /// of the permutation matrix Q[σ(i), i] = 1.
    pub fn permuted(&self, map: &[usize]) -> Result<PhaseMask> {
        if map.len() != self.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                got: map.len(),
            });
        }
        Ok(PhaseMask {
            phases: map.iter().map(|&j| self.phases[j]).collect(),
        })
    }

    /// Multiply the mask into a vector in place.
    pub fn apply(&self, v: &mut [Complex64]) {
        debug_assert_eq!(v.len(), self.len());
        for (z, &p) in v.iter_mut().zip(&self.phases) {
            *z *= Complex64::cis(p);
        }
    }

    /// Copy with every phase reduced to [0, 2π).
    pub fn canonicalized(&self) -> PhaseMask {
        PhaseMask {
            phases: self
                .phases
                .iter()
                .map(|p| {
                    let r = p.rem_euclid(TAU);
                    // rem_euclid can return exactly TAU for tiny negatives.
                    if r >= TAU {
                        0.0
                    } else {
                        r
                    }
                })
                .collect(),
        }
    }

    /// Largest circle distance between corresponding phases.
    pub fn max_phase_distance(&self, other: &PhaseMask) -> f64 {
        self.phases
            .iter()
            .zip(&other.phases)
            .map(|(a, b)| {
                let d = (a - b).rem_euclid(TAU);
                d.min(TAU - d)
            })
            .fold(0.0, f64::max)
    }
}
