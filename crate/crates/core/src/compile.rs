//! Compilation of a unitary into the canonical phase-mask program
//! U = D⁰ · ∏_{i=1}^{6n} F · Dⁱ.
//!
//! Pipeline: relabel channels so each mesh layer becomes block-structured
//! under the DFT, decompose the relabeled matrix into the rectangular mesh,
//! then replace every (even-type, odd-type) layer pair with twelve masks via
//! fixed algebraic identities. Verification against the input is mandatory
//! and part of `compile` itself.
//!
//! Conventions pinned by the tests (see CONVENTIONS.md):
//!   - Channel relabeling σ(2m) = m, σ(2m+1) = n/2 + m; Q[σ(i), i] = 1;
//!     the mesh runs on W with W_ab = U[σ(a), σ(b)] (= QᵀUQ).
//!   - Each layer-pair bracket {D₁,…,D₁₂}_F := F·D₁·F·D₂ ⋯ F·D₁₂ equals
//!     Q·(even layer · odd layer)·Qᵀ.
//!   - The two 6-mask halves interlock through a fixed seam permutation
//!     K = Pᵀ·Π: even half = (Q·even·Qᵀ)·K, odd half = Kᵀ·(Q·odd·Qᵀ).
//!     K cancels inside every pair and is the identity at n = 2.

use num_complex::Complex64;

use crate::clements::{decompose_clements, LayerKind, MeshLayer};
use crate::error::{Error, Result};
use crate::fixed::{dft_matrix, fixed_masks, gamma_mask, require_even, seam_permutation};
use crate::mat::{frobenius_distance, invert_permutation, CMat, Tolerance};
use crate::phase::PhaseMask;
use crate::program::{verify_program, PhaseMaskProgram, TransformKind};

/// Tolerance below which the wrap slot of the even-type angle vectors is
/// considered zero (the rectangular mesh has no splitter on that pair).
const WRAP_SLOT_TOL: f64 = 1e-12;

/// The channel relabeling σ: σ(2m) = m, σ(2m+1) = n/2 + m.
pub fn relabel_map(n: usize) -> Result<Vec<usize>> {
    require_even(n)?;
    let m = n / 2;
    let mut sigma = vec![0usize; n];
    for s in 0..m {
        sigma[2 * s] = s;
        sigma[2 * s + 1] = m + s;
    }
    Ok(sigma)
}

/// The relabeling as a matrix: Q[σ(i), i] = 1, so (Qv)_{σ(i)} = v_i.
pub fn relabel_permutation(n: usize) -> Result<CMat> {
    let sigma = relabel_map(n)?;
    let mut q = CMat::zeros(n, n);
    for (i, &s) in sigma.iter().enumerate() {
        q[(s, i)] = Complex64::new(1.0, 0.0);
    }
    Ok(q)
}

/// Dense evaluation of a mask chain: {D₁,…,D_k}_F = F·D₁·F·D₂ ⋯ F·D_k.
pub fn mask_chain_matrix(n: usize, masks: &[PhaseMask]) -> Result<CMat> {
    let f = dft_matrix(n)?;
    let mut acc = CMat::identity(n);
    for mask in masks {
        if mask.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                got: mask.len(),
            });
        }
        acc = acc.matmul(&f)?;
        crate::program::scale_columns(&mut acc, mask);
    }
    Ok(acc)
}

/// The six masks replacing one odd-type layer (splitters on pairs (2s, 2s+1)
/// with angles θ_s, φ_s; both vectors length n/2).
///
/// The chain {masks}_F equals Kᵀ·Q·L·Qᵀ where L is the physical layer, Q the
/// channel relabeling and K the seam permutation (see module docs).
pub fn layer_factor_a(n: usize, theta: &[f64], phi: &[f64]) -> Result<Vec<PhaseMask>> {
    require_even(n)?;
    let m = n / 2;
    if theta.len() != m || phi.len() != m {
        return Err(Error::LengthMismatch {
            expected: m,
            got: theta.len().max(phi.len()),
        });
    }
    let fixed = fixed_masks(n)?;
    let two_theta: Vec<f64> = theta.iter().map(|t| 2.0 * t).collect();
    let m10 = gamma_mask(&two_theta, n)?.reversed_after_first();
    let mut m12 = Vec::with_capacity(n);
    for j in 0..m {
        m12.push(phi[j] - theta[j]);
    }
    for j in 0..m {
        m12.push(std::f64::consts::PI - theta[j]);
    }
    Ok(vec![
        fixed.e.clone(),
        fixed.g.clone(),
        fixed.h.clone(),
        m10,
        fixed.e,
        PhaseMask::new(m12)?,
    ])
}

/// The six masks replacing one even-type layer (splitters on pairs
/// (2s+1, 2s+2) with angles χ_s, η_s).
///
/// Both vectors have length n/2; the last slot corresponds to the wrap pair
/// (n−1, 0), which the rectangular mesh never uses, so it must be zero.
/// The chain {masks}_F equals Q·L·Qᵀ·K.
pub fn layer_factor_b(n: usize, chi: &[f64], eta: &[f64]) -> Result<Vec<PhaseMask>> {
    require_even(n)?;
    let m = n / 2;
    if chi.len() != m || eta.len() != m {
        return Err(Error::LengthMismatch {
            expected: m,
            got: chi.len().max(eta.len()),
        });
    }
    if chi[m - 1].abs() > WRAP_SLOT_TOL || eta[m - 1].abs() > WRAP_SLOT_TOL {
        return Err(Error::InvalidArgument(format!(
            "even-type layers have no wrap splitter: last chi/eta slot must be zero, got ({}, {})",
            chi[m - 1],
            eta[m - 1]
        )));
    }
    let fixed = fixed_masks(n)?;
    let minus_two_chi: Vec<f64> = chi.iter().map(|c| -2.0 * c).collect();
    let m4 = gamma_mask(&minus_two_chi, n)?;
    let mut m6_raw = Vec::with_capacity(n);
    for j in 0..m {
        m6_raw.push(chi[j]);
    }
    for j in 0..m {
        m6_raw.push(std::f64::consts::PI + eta[j] + chi[j]);
    }
    let m6 = PhaseMask::new(m6_raw)?.reversed_after_first();
    Ok(vec![
        fixed.e.clone(),
        fixed.pg,
        fixed.h,
        m4,
        fixed.e,
        m6,
    ])
}

/// Check a 6-mask half against the dense matrix of the physical layer it
/// replaces (given in original channel labels).
///
/// Each half carries the fixed seam K = Pᵀ·Π that cancels between the two
/// halves of a pair, so the comparison is seam-corrected per layer kind:
/// even-type: {masks}_F·Kᵀ vs Q·L·Qᵀ; odd-type: K·{masks}_F vs Q·L·Qᵀ.
/// Returns the Frobenius residual; errors if it exceeds `tol.absolute`.
pub fn verify_layer(
    masks: &[PhaseMask],
    target: &CMat,
    kind: LayerKind,
    tol: &Tolerance,
) -> Result<f64> {
    if !target.is_square() {
        return Err(Error::NonSquare {
            rows: target.rows(),
            cols: target.cols(),
        });
    }
    let n = target.rows();
    require_even(n)?;
    if masks.len() != 6 {
        return Err(Error::LengthMismatch {
            expected: 6,
            got: masks.len(),
        });
    }
    let chain = mask_chain_matrix(n, masks)?;
    let q = relabel_permutation(n)?;
    let relabeled = q.matmul(target)?.matmul(&q.transpose())?;
    let k = seam_permutation(n)?;
    let lhs = match kind {
        LayerKind::EvenType => chain.matmul(&k.transpose())?,
        LayerKind::OddType => k.matmul(&chain)?,
    };
    let residual = frobenius_distance(&lhs, &relabeled)?;
    if residual > tol.absolute {
        return Err(Error::VerificationFailed {
            residual,
            tol: tol.absolute,
        });
    }
    Ok(residual)
}

/// Angles of an even-type mesh layer as zero-padded length-n/2 vectors.
fn gather_even_angles(layer: &MeshLayer, n: usize) -> (Vec<f64>, Vec<f64>) {
    let m = n / 2;
    let mut chi = vec![0.0; m];
    let mut eta = vec![0.0; m];
    for sp in &layer.splitters {
        let s = (sp.top_channel - 1) / 2;
        chi[s] = sp.theta;
        eta[s] = sp.phi;
    }
    (chi, eta)
}

/// Angles of an odd-type mesh layer as length-n/2 vectors.
fn gather_odd_angles(layer: &MeshLayer, n: usize) -> (Vec<f64>, Vec<f64>) {
    let m = n / 2;
    let mut theta = vec![0.0; m];
    let mut phi = vec![0.0; m];
    for sp in &layer.splitters {
        let s = sp.top_channel / 2;
        theta[s] = sp.theta;
        phi[s] = sp.phi;
    }
    (theta, phi)
}

/// A compiled program together with its measured verification residual.
#[derive(Debug, Clone)]
pub struct Compiled {
    pub program: PhaseMaskProgram,
    /// Frobenius distance to the input for n ≤ 64; worst relative error over
    /// random probes above.
    pub residual: f64,
}

/// Factor `u` into the canonical program and verify the result.
///
/// `tol.absolute` gates the input unitarity check and bounds the dense
/// verification residual; `tol.relative` bounds the sampled verification
/// used for n > 64. Verification is not optional: a program that fails to
/// reproduce its input is an error, never a return value.
pub fn compile(u: &CMat, tol: &Tolerance) -> Result<Compiled> {
    if !u.is_square() {
        return Err(Error::NonSquare {
            rows: u.rows(),
            cols: u.cols(),
        });
    }
    let n = u.rows();
    require_even(n)?;

    let sigma = relabel_map(n)?;
    let w = u.permute_rows_cols(&sigma, &sigma)?;
    let mesh = decompose_clements(&w, tol)?;

    let inv = invert_permutation(&sigma);
    let mut masks = Vec::with_capacity(6 * n + 1);
    masks.push(mesh.leading_diagonal.permuted(&inv)?);
    for i in 0..n / 2 {
        let even = &mesh.layers[2 * i];
        let odd = &mesh.layers[2 * i + 1];
        debug_assert_eq!(even.kind, LayerKind::EvenType);
        debug_assert_eq!(odd.kind, LayerKind::OddType);
        let (chi, eta) = gather_even_angles(even, n);
        let (theta, phi) = gather_odd_angles(odd, n);
        masks.extend(layer_factor_b(n, &chi, &eta)?);
        masks.extend(layer_factor_a(n, &theta, &phi)?);
    }

    let program = PhaseMaskProgram::new(n, TransformKind::IdealDft, masks)?;
    let residual = verify_program(&program, u, tol)?;
    Ok(Compiled { program, residual })
}
