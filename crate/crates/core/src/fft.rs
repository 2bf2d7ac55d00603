//! FFT realization of the DFT matrix used between phase masks.
//!
//! The matrix convention in this crate is F_jk = e^{+i2πjk/n}/√n, while
//! rustfft's *forward* transform uses the e^{−i…} kernel. Multiplying by F is
//! therefore the library's unnormalized **inverse** transform scaled by 1/√n.
//! Getting this wrong silently swaps F and F\u{2020} = Fᵀ conjugate — the matrix
//! test below pins the convention against [`crate::fixed::dft_matrix`].

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// A reusable plan for multiplying vectors by the DFT matrix F.
#[derive(Clone)]
pub struct DftPlan {
    n: usize,
    fft: Arc<dyn Fft<f64>>,
    scale: f64,
}

impl DftPlan {
    pub fn new(n: usize) -> DftPlan {
        let mut planner = FftPlanner::new();
        DftPlan {
            n,
            fft: planner.plan_fft_inverse(n),
            scale: 1.0 / (n as f64).sqrt(),
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Scratch buffer sized for [`DftPlan::apply`]; allocate once per thread
    /// and reuse across layers.
    pub fn make_scratch(&self) -> Vec<Complex64> {
        vec![Complex64::new(0.0, 0.0); self.fft.get_inplace_scratch_len()]
    }

    /// In-place v ← F·v in O(n log n).
    pub fn apply(&self, v: &mut [Complex64], scratch: &mut [Complex64]) {
        debug_assert_eq!(v.len(), self.n);
        self.fft.process_with_scratch(v, scratch);
        for z in v.iter_mut() {
            *z *= self.scale;
        }
    }
}

impl std::fmt::Debug for DftPlan {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DftPlan").field("n", &self.n).finish()
    }
}
