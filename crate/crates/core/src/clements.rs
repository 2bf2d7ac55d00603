//! Rectangular mesh decomposition: factor a unitary into N alternating layers
//! of two-channel beam-splitter blocks plus one leading diagonal, by nulling
//! matrix entries along anti-diagonals with Givens-style rotations.
//!
//! Conventions (pinned by the roundtrip tests, which are the single source of
//! truth for product order):
//!   - The mesh value is U = D · L₁ · L₂ ⋯ L_N with L₁ leftmost; L_q for odd
//!     position q is an even-type layer (n/2 − 1 splitters on channel pairs
//!     (2s+1, 2s+2)), for even q an odd-type layer (n/2 splitters on pairs
//!     (2s, 2s+1)). Rightmost factors act on input vectors first.
//!   - A splitter is T(θ, φ) = [[e^{iφ}cosθ, −sinθ], [e^{iφ}sinθ, cosθ]] on
//!     its channel pair, identity elsewhere.
//!   - Degenerate pivots (|entry| < 1e−14) take θ ∈ {0, π/2} and φ = 0.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::mat::{CMat, Tolerance};
use crate::phase::{PhaseMask, TAU};

/// Magnitudes below this are treated as exact zeros during nulling.
const DEGENERATE: f64 = 1e-14;

/// One two-channel mixer: mixes `top_channel` with `top_channel + 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamSplitterParams {
    pub theta: f64,
    pub phi: f64,
    pub top_channel: usize,
}

/// Which channel pairs a mesh layer occupies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LayerKind {
    /// n/2 splitters on pairs (2s, 2s+1), s = 0..n/2−1.
    OddType,
    /// n/2 − 1 splitters on pairs (2s+1, 2s+2), s = 0..n/2−2.
    EvenType,
}

/// One mesh layer; `splitters` is sorted by `top_channel` and always full
/// (every slot of the layer kind is present — zero-angle splitters included).
#[derive(Debug, Clone)]
pub struct MeshLayer {
    pub kind: LayerKind,
    pub splitters: Vec<BeamSplitterParams>,
}

/// Output of the nulling decomposition: U = D · layers[0] · layers[1] ⋯.
#[derive(Debug, Clone)]
pub struct ClementsMesh {
    pub n: usize,
    /// Exactly n layers, alternating EvenType (first) / OddType.
    pub layers: Vec<MeshLayer>,
    /// The leading diagonal D.
    pub leading_diagonal: PhaseMask,
}

impl ClementsMesh {
    /// Total number of splitters (n(n−1)/2 for a mesh from `decompose_clements`).
    pub fn splitter_count(&self) -> usize {
        self.layers.iter().map(|l| l.splitters.len()).sum()
    }

    /// Free real parameters: two angles per splitter plus the diagonal.
    pub fn parameter_count(&self) -> usize {
        2 * self.splitter_count() + self.n
    }
}

/// T(θ, φ) as a 2×2 block.
fn t2(theta: f64, phi: f64) -> [[Complex64; 2]; 2] {
    let (s, c) = theta.sin_cos();
    let e = Complex64::cis(phi);
    [
        [e * c, Complex64::new(-s, 0.0)],
        [e * s, Complex64::new(c, 0.0)],
    ]
}

/// The beam splitter embedded in n channels: identity except the 2×2 block
/// T(θ, φ) on (top_channel, top_channel + 1).
pub fn beamsplitter_matrix(n: usize, p: &BeamSplitterParams) -> Result<CMat> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 channels, got {n}"
        )));
    }
    if p.top_channel + 1 >= n {
        return Err(Error::InvalidArgument(format!(
            "top_channel {} out of range for {n} channels",
            p.top_channel
        )));
    }
    let t = t2(p.theta, p.phi);
    let mut m = CMat::identity(n);
    let (i, j) = (p.top_channel, p.top_channel + 1);
    m[(i, i)] = t[0][0];
    m[(i, j)] = t[0][1];
    m[(j, i)] = t[1][0];
    m[(j, j)] = t[1][1];
    Ok(m)
}

/// Inner masks of the two-mask splitter factorization.
///
/// Returns (diag(e^{iθ}, e^{−iθ}), diag(e^{iφ}, 1)) satisfying
///
///   G · T(θ, φ) · G\u{2020} = X · diag(e^{iθ}, e^{−iθ}) · X · diag(e^{iφ}, 1)
///
/// with X the 50:50 splitter and G = diag(1, i). No pair of diagonal masks
/// satisfies the sandwich-free variant X·D₁·X·D₂ = T(θ, φ) for generic
/// angles — the conjugation by G is load-bearing (see CONVENTIONS.md). The
/// flat compiled form later absorbs this bookkeeping into its fixed masks.
pub fn bs_factorization(theta: f64, phi: f64) -> (PhaseMask, PhaseMask) {
    (
        PhaseMask::new(vec![theta, -theta]).expect("finite angles"),
        PhaseMask::new(vec![phi, 0.0]).expect("finite angles"),
    )
}

/// u ← u · E where E embeds `t` on columns (m, m+1).
fn right_mul_2x2(u: &mut CMat, m: usize, t: &[[Complex64; 2]; 2]) {
    let n = u.rows();
    for r in 0..n {
        let a = u[(r, m)];
        let b = u[(r, m + 1)];
        u[(r, m)] = a * t[0][0] + b * t[1][0];
        u[(r, m + 1)] = a * t[0][1] + b * t[1][1];
    }
}

/// u ← E · u where E embeds `t` on rows (r, r+1).
fn left_mul_2x2(u: &mut CMat, r: usize, t: &[[Complex64; 2]; 2]) {
    let n = u.cols();
    for c in 0..n {
        let a = u[(r, c)];
        let b = u[(r + 1, c)];
        u[(r, c)] = t[0][0] * a + t[0][1] * b;
        u[(r + 1, c)] = t[1][0] * a + t[1][1] * b;
    }
}

#[derive(Debug, Clone, Copy)]
struct Factor {
    top: usize,
    theta: f64,
    phi: f64,
}

/// Null the off-diagonal entries anti-diagonal by anti-diagonal.
///
/// Odd anti-diagonals are cleared by right-multiplying T\u{207b}\u{00b9} (column
/// rotations), even ones by left-multiplying T (row rotations). Returns the
/// residual diagonal and both factor lists in application order.
fn null_offdiagonals(u: &CMat) -> (Vec<Complex64>, Vec<Factor>, Vec<Factor>, f64) {
    let n = u.rows();
    let mut w = u.clone();
    let mut rights: Vec<Factor> = Vec::with_capacity(n * (n - 1) / 4 + n);
    let mut lefts: Vec<Factor> = Vec::with_capacity(n * (n - 1) / 4 + n);

    for i in 1..n {
        if i % 2 == 1 {
            for j in 0..i {
                // Null w[n−1−j, i−1−j] with a column rotation on (m, m+1).
                let r = n - 1 - j;
                let m = i - 1 - j;
                let a = w[(r, m)];
                let b = w[(r, m + 1)];
                let (theta, phi) = if a.norm() < DEGENERATE {
                    (0.0, 0.0)
                } else if b.norm() < DEGENERATE {
                    (std::f64::consts::FRAC_PI_2, 0.0)
                } else {
                    (a.norm().atan2(b.norm()), a.arg() - b.arg())
                };
                // T(θ, φ)⁻¹ block.
                let (s, c) = theta.sin_cos();
                let em = Complex64::cis(-phi);
                let tinv = [
                    [em * c, em * s],
                    [Complex64::new(-s, 0.0), Complex64::new(c, 0.0)],
                ];
                right_mul_2x2(&mut w, m, &tinv);
                rights.push(Factor { top: m, theta, phi });
            }
        } else {
            for j in 1..=i {
                // Null w[n+j−i−1, j−1] with a row rotation on (r−1, r).
                let r = n + j - i - 1;
                let cidx = j - 1;
                let a = w[(r - 1, cidx)];
                let b = w[(r, cidx)];
                let (theta, phi) = if b.norm() < DEGENERATE {
                    (0.0, 0.0)
                } else if a.norm() < DEGENERATE {
                    (std::f64::consts::FRAC_PI_2, 0.0)
                } else {
                    (b.norm().atan2(a.norm()), (-b).arg() - a.arg())
                };
                left_mul_2x2(&mut w, r - 1, &t2(theta, phi));
                lefts.push(Factor {
                    top: r - 1,
                    theta,
                    phi,
                });
            }
        }
    }

    let mut offdiag: f64 = 0.0;
    for r in 0..n {
        for c in 0..n {
            if r != c {
                offdiag = offdiag.max(w[(r, c)].norm());
            }
        }
    }
    (w.diagonal(), rights, lefts, offdiag)
}

/// Move T\u{207b}\u{00b9}(θ, φ) from the left of a diagonal to its right:
/// T\u{207b}\u{00b9}_{m,m+1}(θ, φ) · D = D' · T_{m,m+1}(θ', φ').
fn commute_through(
    d: &mut [Complex64],
    m: usize,
    theta: f64,
    phi: f64,
) -> (f64, f64) {
    let dm = d[m];
    let dn = d[m + 1];
    let theta_p = (-theta).rem_euclid(TAU);
    let phi_p = (dm / dn).arg().rem_euclid(TAU);
    d[m] = dn * Complex64::cis(-phi);
    d[m + 1] = dn;
    (theta_p, phi_p)
}

/// Pack product-ordered factors (leftmost first) into n alternating layers,
/// as-soon-as-possible from the right.
///
/// Positions q = 1..n count left to right; even q holds an odd-type layer.
/// A factor on channels (m, m+1) belongs to an odd-type layer iff m is even.
/// Every factor lands in the rightmost position not blocked by factors
/// already placed on its channels; counting shows the packing fills every
/// slot of every layer exactly.
fn schedule(n: usize, factors: &[Factor]) -> Vec<Vec<Option<(f64, f64)>>> {
    let m_half = n / 2;
    let mut cap = vec![n; n];
    let mut layers: Vec<Vec<Option<(f64, f64)>>> = (1..=n)
        .map(|q| {
            let slots = if q % 2 == 0 { m_half } else { m_half - 1 };
            vec![None; slots]
        })
        .collect();

    // Walk in application order (rightmost factor of the product first).
    for f in factors.iter().rev() {
        let pmax = cap[f.top].min(cap[f.top + 1]);
        let odd_type = f.top % 2 == 0;
        // Even positions host odd-type layers.
        let q = if (pmax % 2 == 0) == odd_type {
            pmax
        } else {
            pmax - 1
        };
        assert!(q >= 1, "layer scheduling underflow");
        let slot = f.top / 2;
        let cell = &mut layers[q - 1][slot];
        assert!(cell.is_none(), "layer slot collision");
        *cell = Some((f.theta, f.phi));
        cap[f.top] = q - 1;
        cap[f.top + 1] = q - 1;
    }
    layers
}

/// Decompose a unitary into the alternating rectangular mesh.
pub fn decompose_clements(u: &CMat, tol: &Tolerance) -> Result<ClementsMesh> {
    if !u.is_square() {
        return Err(Error::NonSquare {
            rows: u.rows(),
            cols: u.cols(),
        });
    }
    let n = u.rows();
    if n == 0 {
        return Err(Error::ZeroDimension);
    }
    if n % 2 != 0 {
        return Err(Error::OddDimension(n));
    }
    let defect = u.unitarity_defect()?;
    if defect > tol.absolute {
        return Err(Error::NotUnitary {
            defect,
            tol: tol.absolute,
        });
    }

    let (mut d, rights, lefts, offdiag) = null_offdiagonals(u);
    if offdiag > 1e-6 {
        // Unreachable for input that passed the unitarity gate; a residual
        // here would mean the rotations failed to null, i.e. a convention bug.
        return Err(Error::VerificationFailed {
            residual: offdiag,
            tol: 1e-6,
        });
    }

    // The nulling leaves U = T_l\u{207b}\u{00b9} ⋯ · D · ⋯ T_r; push every left factor
    // through D so a single diagonal survives on the far left.
    let mut primed: Vec<Factor> = Vec::with_capacity(lefts.len());
    for f in lefts.iter().rev() {
        let (tp, pp) = commute_through(&mut d, f.top, f.theta, f.phi);
        primed.push(Factor {
            top: f.top,
            theta: tp,
            phi: pp,
        });
    }
    primed.reverse();

    // Product order: the primed (former left) factors, then the right
    // factors reversed.
    let mut factors = primed;
    factors.extend(rights.iter().rev().copied());

    let layers_raw = schedule(n, &factors);
    let mut layers = Vec::with_capacity(n);
    for (idx, slots) in layers_raw.into_iter().enumerate() {
        let q = idx + 1;
        let kind = if q % 2 == 0 {
            LayerKind::OddType
        } else {
            LayerKind::EvenType
        };
        let mut splitters = Vec::with_capacity(slots.len());
        for (s, cell) in slots.into_iter().enumerate() {
            let (theta, phi) =
                cell.expect("ASAP packing fills every slot (capacity equals factor count)");
            let top = match kind {
                LayerKind::OddType => 2 * s,
                LayerKind::EvenType => 2 * s + 1,
            };
            splitters.push(BeamSplitterParams {
                theta: theta.rem_euclid(TAU),
                phi: phi.rem_euclid(TAU),
                top_channel: top,
            });
        }
        layers.push(MeshLayer { kind, splitters });
    }

    let leading_diagonal = PhaseMask::from_unit_entries(&d, 1e-6)?;
    Ok(ClementsMesh {
        n,
        layers,
        leading_diagonal,
    })
}

/// Dense evaluation of the mesh product D · L₁ ⋯ L_N (the reconstruction
/// oracle; rightmost factor applied first to input vectors).
pub fn reconstruct_mesh(mesh: &ClementsMesh) -> CMat {
    let mut u = mesh.leading_diagonal.to_matrix();
    for layer in &mesh.layers {
        for sp in &layer.splitters {
            let t = t2(sp.theta, sp.phi);
            right_mul_2x2(&mut u, sp.top_channel, &t);
        }
    }
    u
}

/// Dense evaluation of one physical layer of splitters (used as the oracle
/// target for the compiled layer factors).
pub fn layer_matrix(n: usize, kind: LayerKind, splitters: &[BeamSplitterParams]) -> Result<CMat> {
    let mut u = CMat::identity(n);
    for sp in splitters {
        match kind {
            LayerKind::OddType => {
                if sp.top_channel % 2 != 0 {
                    return Err(Error::InvalidArgument(format!(
                        "odd-type layer cannot hold top_channel {}",
                        sp.top_channel
                    )));
                }
            }
            LayerKind::EvenType => {
                if sp.top_channel % 2 != 1 {
                    return Err(Error::InvalidArgument(format!(
                        "even-type layer cannot hold top_channel {}",
                        sp.top_channel
                    )));
                }
            }
        }
        let t = t2(sp.theta, sp.phi);
        if sp.top_channel + 1 >= n {
            return Err(Error::InvalidArgument(format!(
                "top_channel {} out of range for {n} channels",
                sp.top_channel
            )));
        }
        right_mul_2x2(&mut u, sp.top_channel, &t);
    }
    Ok(u)
}
