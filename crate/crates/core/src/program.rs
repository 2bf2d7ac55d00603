//! Phase-mask programs: one leading mask followed by 6n repetitions of
//! (mixing transform · mask), where the mixing transform is either the ideal
//! DFT or a multimode-interference coupler matrix.
//!
//! The program value is U = D⁰ · (F·D¹) · (F·D²) ⋯ (F·D^L) with L = 6n; the
//! rightmost factor acts on input vectors first. Dense evaluation multiplies
//! the factors out; fast evaluation applies each mixing step by FFT (plus a
//! fixed relabeling and phase trim for the coupler transform).

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::fft::DftPlan;
use crate::fixed::dft_matrix;
use crate::mat::{matvec, vec_norm, CMat, Tolerance};
use crate::mmi::{mmi_r_map, mmi_smatrix, mmi_theta_mask};
use crate::phase::PhaseMask;

/// Number of mixing layers in a canonical program for dimension n.
pub fn layer_count(n: usize) -> usize {
    6 * n
}

/// The mixing transform interleaved between masks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TransformKind {
    /// F_jk = e^{+i 2π jk / n} / √n.
    IdealDft,
    /// The n-port coupler transfer matrix with global phase e^{iζ₀}.
    Mmi { zeta0: f64 },
}

impl TransformKind {
    pub fn name(&self) -> &'static str {
        match self {
            TransformKind::IdealDft => "dft",
            TransformKind::Mmi { .. } => "mmi",
        }
    }
}

/// A compiled program: `masks[0]` is the leading mask D⁰, `masks[i]` for
/// i ≥ 1 sits to the right of the i-th mixing transform.
#[derive(Debug, Clone)]
pub struct PhaseMaskProgram {
    n: usize,
    transform: TransformKind,
    masks: Vec<PhaseMask>,
}

impl PhaseMaskProgram {
    /// Build a program, enforcing the canonical shape: even n ≥ 2 and
    /// exactly 6n + 1 masks of length n.
    pub fn new(n: usize, transform: TransformKind, masks: Vec<PhaseMask>) -> Result<Self> {
        if n == 0 {
            return Err(Error::ZeroDimension);
        }
        if n % 2 != 0 {
            return Err(Error::OddDimension(n));
        }
        let expected = layer_count(n) + 1;
        if masks.len() != expected {
            return Err(Error::LengthMismatch {
                expected,
                got: masks.len(),
            });
        }
        for m in &masks {
            if m.len() != n {
                return Err(Error::LengthMismatch {
                    expected: n,
                    got: m.len(),
                });
            }
        }
        Ok(Self {
            n,
            transform,
            masks,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn transform(&self) -> TransformKind {
        self.transform
    }

    pub fn masks(&self) -> &[PhaseMask] {
        &self.masks
    }

    pub fn mask_count(&self) -> usize {
        self.masks.len()
    }

    /// Replace the transform tag without touching the masks (used by the
    /// coupler retargeting, which adjusts masks separately).
    pub fn with_transform(mut self, transform: TransformKind) -> Self {
        self.transform = transform;
        self
    }

    /// Map every mask through `f` (index, mask) → mask.
    pub fn map_masks<F>(mut self, mut f: F) -> Result<Self>
    where
        F: FnMut(usize, &PhaseMask) -> Result<PhaseMask>,
    {
        let mut out = Vec::with_capacity(self.masks.len());
        for (i, m) in self.masks.iter().enumerate() {
            let new = f(i, m)?;
            if new.len() != self.n {
                return Err(Error::LengthMismatch {
                    expected: self.n,
                    got: new.len(),
                });
            }
            out.push(new);
        }
        self.masks = out;
        Ok(self)
    }

    /// Dense matrix of the mixing transform alone.
    pub fn transform_matrix(&self) -> Result<CMat> {
        match self.transform {
            TransformKind::IdealDft => dft_matrix(self.n),
            TransformKind::Mmi { zeta0 } => mmi_smatrix(self.n, zeta0),
        }
    }

    /// Dense evaluation of the whole program (O(L·n³); the verification
    /// oracle, kept deliberately independent of the FFT path).
    pub fn dense_matrix(&self) -> Result<CMat> {
        let f = self.transform_matrix()?;
        let mut acc = self.masks[0].to_matrix();
        for mask in &self.masks[1..] {
            acc = acc.matmul(&f)?;
            scale_columns(&mut acc, mask);
        }
        Ok(acc)
    }

    /// Apply the program to one vector via FFT-based mixing steps.
    pub fn fast_apply(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        let applier = TransformApplier::new(self.n, self.transform)?;
        let mut scratch = applier.make_scratch();
        let mut x = v.to_vec();
        self.fast_apply_inplace(&applier, &mut x, &mut scratch)?;
        Ok(x)
    }

    /// Apply the program to many vectors; with the `parallel` feature the
    /// vectors are distributed across threads, otherwise processed in order.
    pub fn fast_apply_batch(&self, vs: &[Vec<Complex64>]) -> Result<Vec<Vec<Complex64>>> {
        let applier = TransformApplier::new(self.n, self.transform)?;
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            vs.par_iter()
                .map_init(
                    || applier.make_scratch(),
                    |scratch, v| {
                        let mut x = v.clone();
                        self.fast_apply_inplace(&applier, &mut x, scratch)?;
                        Ok(x)
                    },
                )
                .collect()
        }
        #[cfg(not(feature = "parallel"))]
        {
            let mut scratch = applier.make_scratch();
            vs.iter()
                .map(|v| {
                    let mut x = v.clone();
                    self.fast_apply_inplace(&applier, &mut x, &mut scratch)?;
                    Ok(x)
                })
                .collect()
        }
    }

    /// Apply with caller-managed plan and scratch (for benchmarking loops).
    pub fn fast_apply_inplace(
        &self,
        applier: &TransformApplier,
        x: &mut [Complex64],
        scratch: &mut ApplyScratch,
    ) -> Result<()> {
        if x.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                got: x.len(),
            });
        }
        if applier.n() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                got: applier.n(),
            });
        }
        // U v = D⁰·F·D¹ ⋯ F·D^L v: the last mask touches the input first.
        for mask in self.masks[1..].iter().rev() {
            mask.apply(x);
            applier.apply(x, scratch);
        }
        self.masks[0].apply(x);
        Ok(())
    }

    /// Build the reusable transform applier for this program.
    pub fn applier(&self) -> Result<TransformApplier> {
        TransformApplier::new(self.n, self.transform)
    }

    /// Dense matrix–vector application (the slow baseline).
    pub fn dense_apply(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        matvec(&self.dense_matrix()?, v)
    }
}

/// acc ← acc · diag(mask): scale column c by the mask entry c.
pub(crate) fn scale_columns(acc: &mut CMat, mask: &PhaseMask) {
    let (rows, cols) = (acc.rows(), acc.cols());
    debug_assert_eq!(cols, mask.len());
    for r in 0..rows {
        let row = acc.row_mut(r);
        for c in 0..cols {
            row[c] *= mask.entry(c);
        }
    }
}

/// One mixing step, applied in place by FFT. For the coupler transform the
/// step is: gather through the port relabeling, trim by the fixed quadratic
/// phase, FFT, trim again, scatter back.
#[derive(Debug, Clone)]
pub struct TransformApplier {
    plan: DftPlan,
    /// Present only for the coupler transform: (relabeling map ρ, phase trim).
    mmi: Option<(Vec<usize>, PhaseMask)>,
}

/// Work buffers for `TransformApplier::apply`.
#[derive(Debug, Clone)]
pub struct ApplyScratch {
    fft: Vec<Complex64>,
    gather: Vec<Complex64>,
}

impl TransformApplier {
    pub fn new(n: usize, transform: TransformKind) -> Result<Self> {
        let plan = DftPlan::new(n);
        let mmi = match transform {
            TransformKind::IdealDft => None,
            TransformKind::Mmi { zeta0 } => {
                Some((mmi_r_map(n)?, mmi_theta_mask(n, zeta0)?))
            }
        };
        Ok(Self { plan, mmi })
    }

    pub fn n(&self) -> usize {
        self.plan.len()
    }

    pub fn make_scratch(&self) -> ApplyScratch {
        ApplyScratch {
            fft: self.plan.make_scratch(),
            gather: vec![Complex64::new(0.0, 0.0); self.n()],
        }
    }

    /// x ← T x for the program's mixing transform T.
    pub fn apply(&self, x: &mut [Complex64], scratch: &mut ApplyScratch) {
        match &self.mmi {
            None => self.plan.apply(x, &mut scratch.fft),
            Some((rho, theta)) => {
                let n = x.len();
                let buf = &mut scratch.gather;
                for j in 0..n {
                    buf[j] = x[rho[j]];
                }
                theta.apply(buf);
                self.plan.apply(buf, &mut scratch.fft);
                theta.apply(buf);
                for j in 0..n {
                    x[rho[j]] = buf[j];
                }
            }
        }
    }
}

/// Deterministic complex Gaussian test vector (for sampled verification).
pub fn random_vector(n: usize, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
    (0..n)
        .map(|_| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            Complex64::new(re, im)
        })
        .collect()
}

/// Number of probe vectors used by sampled verification.
const SAMPLED_PROBES: usize = 8;
/// Dimension threshold above which verification switches from dense
/// reconstruction to randomized probing.
pub const DENSE_VERIFY_LIMIT: usize = 64;

/// Verify that the program reproduces `target`.
///
/// For n ≤ 64 this reconstructs the program densely and checks the Frobenius
/// distance against `tol.absolute`. For larger n it applies both sides to 8
/// deterministic Gaussian probes and checks the worst relative error against
/// `tol.relative`. Returns the measured residual; errors with
/// `VerificationFailed` when it exceeds the bound.
pub fn verify_program(program: &PhaseMaskProgram, target: &CMat, tol: &Tolerance) -> Result<f64> {
    if !target.is_square() || target.rows() != program.n() {
        return Err(Error::ShapeMismatch {
            left_rows: program.n(),
            left_cols: program.n(),
            right_rows: target.rows(),
            right_cols: target.cols(),
        });
    }
    let n = program.n();
    if n <= DENSE_VERIFY_LIMIT {
        let dense = program.dense_matrix()?;
        let residual = crate::mat::frobenius_distance(&dense, target)?;
        if residual > tol.absolute {
            return Err(Error::VerificationFailed {
                residual,
                tol: tol.absolute,
            });
        }
        Ok(residual)
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_u64);
        let mut worst = 0.0f64;
        for _ in 0..SAMPLED_PROBES {
            let v = random_vector(n, &mut rng);
            let via_program = program.fast_apply(&v)?;
            let via_target = matvec(target, &v)?;
            let diff: Vec<Complex64> = via_program
                .iter()
                .zip(&via_target)
                .map(|(a, b)| a - b)
                .collect();
            let rel = vec_norm(&diff) / vec_norm(&v);
            worst = worst.max(rel);
        }
        if worst > tol.relative {
            return Err(Error::VerificationFailed {
                residual: worst,
                tol: tol.relative,
            });
        }
        Ok(worst)
    }
}
