//! Multimode-interference (MMI) coupler support: the n-port transfer matrix
//! S, its structural factorization S = Rᵀ·Θ·F·Θ·R through the DFT, the
//! self-imaging length of the underlying waveguide, and retargeting of
//! ideal-DFT programs onto MMI hardware.
//!
//! Index conventions are 0-based throughout and were resolved against the
//! factorization residual itself (strictly < 1e−12 at every tested size):
//!   - R gathers: (Rv)_j = v_{ρ(j)} with ρ(j) = 2j for j < n/2 and
//!     ρ(j) = 2n − 2j − 1 otherwise.
//!   - Θ_jj = exp(i(−π j²/n + π j + ζ₀/2)).

use std::f64::consts::{FRAC_PI_4, PI};

use num_complex::Complex64;

use crate::compile::compile;
use crate::error::{Error, Result};
use crate::fixed::{dft_matrix, require_even};
use crate::mat::{frobenius_distance, invert_permutation, CMat, Tolerance};
use crate::phase::PhaseMask;
use crate::program::{verify_program, PhaseMaskProgram, TransformKind};

/// Physical parameters of a planar MMI waveguide section.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MmiParams {
    /// n_r, dimensionless.
    pub refractive_index: f64,
    /// k₀ in rad/meter.
    pub vacuum_wavenumber: f64,
    /// Guide width w in meters.
    pub width: f64,
    /// Port count n (even, ≥ 2).
    pub modes: usize,
}

impl MmiParams {
    pub fn new(
        refractive_index: f64,
        vacuum_wavenumber: f64,
        width: f64,
        modes: usize,
    ) -> Result<Self> {
        if !(refractive_index > 0.0) || !(vacuum_wavenumber > 0.0) || !(width > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "physical parameters must be positive: n_r={refractive_index}, \
                 k0={vacuum_wavenumber}, w={width}"
            )));
        }
        require_even(modes)?;
        Ok(Self {
            refractive_index,
            vacuum_wavenumber,
            width,
            modes,
        })
    }

    /// Propagation length at which the guide images an input into n weighted
    /// copies: z_n = 2·n_r·k₀·w² / (π·n).
    pub fn self_imaging_length(&self) -> f64 {
        2.0 * self.refractive_index * self.vacuum_wavenumber * self.width * self.width
            / (PI * self.modes as f64)
    }

    /// The global phase a physical device imprints: ζ₀ = −k₀·z_n − π/4.
    pub fn physical_zeta0(&self) -> f64 {
        -self.vacuum_wavenumber * self.self_imaging_length() - FRAC_PI_4
    }
}

/// The coupler transfer matrix: |S_jk| = 1/√n with quadratic phases split by
/// index parity, plus the global phase ζ₀.
pub fn mmi_smatrix(n: usize, zeta0: f64) -> Result<CMat> {
    require_even(n)?;
    let scale = 1.0 / (n as f64).sqrt();
    let quarter = PI / (4.0 * n as f64);
    Ok(CMat::from_fn(n, n, |j, k| {
        let (jf, kf, nf) = (j as f64, k as f64, n as f64);
        let ph = if (j + k) % 2 == 0 {
            quarter * (kf - jf) * (2.0 * nf - kf + jf)
        } else {
            quarter * (kf + jf + 1.0) * (2.0 * nf - kf - jf - 1.0)
        };
        Complex64::from_polar(scale, ph + zeta0)
    }))
}

/// The port relabeling in gather form: (Rv)_j = v_{ρ(j)}.
pub fn mmi_r_map(n: usize) -> Result<Vec<usize>> {
    require_even(n)?;
    Ok((0..n)
        .map(|j| if j < n / 2 { 2 * j } else { 2 * n - 2 * j - 1 })
        .collect())
}

/// The port relabeling as a matrix: R[j, ρ(j)] = 1.
pub fn mmi_r_matrix(n: usize) -> Result<CMat> {
    let rho = mmi_r_map(n)?;
    let mut r = CMat::zeros(n, n);
    for (j, &p) in rho.iter().enumerate() {
        r[(j, p)] = Complex64::new(1.0, 0.0);
    }
    Ok(r)
}

/// The diagonal phase trim of the factorization: Θ_j = e^{i(−πj²/n + πj + ζ₀/2)}.
pub fn mmi_theta_mask(n: usize, zeta0: f64) -> Result<PhaseMask> {
    require_even(n)?;
    let nf = n as f64;
    PhaseMask::new(
        (0..n)
            .map(|j| {
                let jf = j as f64;
                -PI * jf * jf / nf + PI * jf + 0.5 * zeta0
            })
            .collect(),
    )
}

/// Frobenius residual of the structural identity S = Rᵀ·Θ·F·Θ·R.
pub fn verify_dft_opt_identity(n: usize, zeta0: f64) -> Result<f64> {
    let s = mmi_smatrix(n, zeta0)?;
    let r = mmi_r_matrix(n)?;
    let theta = mmi_theta_mask(n, zeta0)?.to_matrix();
    let f = dft_matrix(n)?;
    let rhs = r
        .transpose()
        .matmul(&theta)?
        .matmul(&f)?
        .matmul(&theta)?
        .matmul(&r)?;
    frobenius_distance(&s, &rhs)
}

/// Retarget an ideal-DFT program onto MMI hardware with global phase ζ₀.
///
/// The coupler is the DFT only up to the fixed port relabeling R and phase
/// trim Θ, so the masks cannot simply be copied. Instead the program's value
/// U is re-expressed through U_R = R·U·Rᵀ: compile U_R for the ideal
/// transform, then absorb R and Θ into the masks —
///
///   D̃⁰ = Rᵀ·(D⁰Θ*)·R,  D̃ⁱ = Rᵀ·(DⁱΘ*²)·R (1 ≤ i ≤ L−1),  D̃ᴸ = Rᵀ·(DᴸΘ*)·R,
///
/// all diagonal since R is a permutation. The result is verified against U
/// under S-evaluation before being returned; the mask count is unchanged.
pub fn retarget_to_mmi(
    program: &PhaseMaskProgram,
    zeta0: f64,
    tol: &Tolerance,
) -> Result<crate::compile::Compiled> {
    match program.transform() {
        TransformKind::IdealDft => {}
        other => {
            return Err(Error::WrongTransform {
                expected: "dft",
                found: other.name(),
            })
        }
    }
    let n = program.n();
    let u = program.dense_matrix()?;
    let rho = mmi_r_map(n)?;
    let ur = u.permute_rows_cols(&rho, &rho)?;
    let ideal = compile(&ur, tol)?;

    let theta = mmi_theta_mask(n, zeta0)?;
    let inv = invert_permutation(&rho);
    let last = ideal.program.mask_count() - 1;
    let retargeted = ideal.program.clone().map_masks(|i, mask| {
        // Subtract the trim phases (Θ* = negated Θ), once at the ends and
        // twice in the interior, then permute by Rᵀ·D·R.
        let trimmed = if i == 0 || i == last {
            mask.composed(&theta.conjugated())?
        } else {
            mask.composed(&theta.conjugated())?
                .composed(&theta.conjugated())?
        };
        trimmed.permuted(&inv)
    })?;
    let retargeted = retargeted.with_transform(TransformKind::Mmi { zeta0 });
    let residual = verify_program(&retargeted, &u, tol)?;
    Ok(crate::compile::Compiled {
        program: retargeted,
        residual,
    })
}
