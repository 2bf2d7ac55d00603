//! Property tests: invariants that must hold across the whole input domain,
//! exercised with randomized cases. Deterministic fixed-tolerance versions of
//! the same claims live in the unit tests and the CLI acceptance suite.

use maskc_core::clements::{
    beamsplitter_matrix, bs_factorization, decompose_clements, layer_matrix, reconstruct_mesh,
    BeamSplitterParams, LayerKind,
};
use maskc_core::compile::{compile, layer_factor_a, layer_factor_b, verify_layer};
use maskc_core::fixed::block_x_matrix;
use maskc_core::haar::haar_random_unitary;
use maskc_core::io::{format_matrix, parse_matrix};
use maskc_core::mat::{frobenius_distance, CMat, Tolerance};
use maskc_core::phase::{PhaseMask, TAU};
use num_complex::Complex64;
use proptest::prelude::*;

fn angle() -> impl Strategy<Value = f64> {
    -31.5..31.5f64
}

/// Residual of G·T(θ,φ)·G† = X·diag(e^{iθ}, e^{−iθ})·X·diag(e^{iφ}, 1).
fn splitter_sandwich_residual(theta: f64, phi: f64) -> f64 {
    let g = CMat::from_diag(&[Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)]);
    let t = beamsplitter_matrix(
        2,
        &BeamSplitterParams {
            theta,
            phi,
            top_channel: 0,
        },
    )
    .unwrap();
    let lhs = g.matmul(&t).unwrap().matmul(&g.dagger()).unwrap();
    let x = block_x_matrix(2).unwrap();
    let (d1, d2) = bs_factorization(theta, phi);
    let rhs = x
        .matmul(&d1.to_matrix())
        .unwrap()
        .matmul(&x)
        .unwrap()
        .matmul(&d2.to_matrix())
        .unwrap();
    lhs.max_abs_diff(&rhs)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn splitter_factorization_identity(theta in angle(), phi in angle()) {
        prop_assert!(splitter_sandwich_residual(theta, phi) < 1e-12);
    }

    #[test]
    fn canonicalization_preserves_the_diagonal(
        phases in prop::collection::vec(-200.0..200.0f64, 1..12)
    ) {
        let mask = PhaseMask::new(phases).unwrap();
        let canon = mask.canonicalized();
        for &p in canon.phases() {
            prop_assert!((0.0..TAU).contains(&p), "phase {p} not in [0, 2pi)");
        }
        // Same unitary value entrywise.
        prop_assert!(mask.to_matrix().max_abs_diff(&canon.to_matrix()) < 1e-12);
        prop_assert!(mask.max_phase_distance(&canon) < 1e-12);
    }

    #[test]
    fn reversal_after_first_is_an_involution(
        phases in prop::collection::vec(-10.0..10.0f64, 1..12)
    ) {
        let mask = PhaseMask::new(phases).unwrap();
        let twice = mask.reversed_after_first().reversed_after_first();
        prop_assert_eq!(mask.phases(), twice.phases());
    }

    #[test]
    fn matrix_text_roundtrip_is_bit_exact(
        rows in 1..5usize,
        cols in 1..5usize,
        fill in prop::collection::vec((-1e12..1e12f64, -1e12..1e12f64), 25)
    ) {
        let m = CMat::from_fn(rows, cols, |r, c| {
            let (re, im) = fill[(r * cols + c) % fill.len()];
            Complex64::new(re, im)
        });
        let back = parse_matrix(&format_matrix(&m)).unwrap();
        for r in 0..rows {
            for c in 0..cols {
                prop_assert_eq!(m[(r, c)].re.to_bits(), back[(r, c)].re.to_bits());
                prop_assert_eq!(m[(r, c)].im.to_bits(), back[(r, c)].im.to_bits());
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn mesh_decomposition_roundtrips_on_haar(seed in any::<u64>(), pick in 0..4usize) {
        let n = [2usize, 4, 6, 8][pick];
        let u = haar_random_unitary(n, seed).unwrap();
        let mesh = decompose_clements(&u, &Tolerance::absolute(1e-10)).unwrap();
        prop_assert_eq!(mesh.parameter_count(), n * n);
        let err = frobenius_distance(&reconstruct_mesh(&mesh), &u).unwrap();
        prop_assert!(err < 1e-10 * n as f64, "n={} err={:.2e}", n, err);
    }

    #[test]
    fn layer_halves_replace_their_layers(
        pick in 0..3usize,
        raw in prop::collection::vec(angle(), 16)
    ) {
        let n = [4usize, 6, 8][pick];
        let m = n / 2;
        let tol = Tolerance::absolute(1e-11);

        let theta = &raw[..m];
        let phi = &raw[4..4 + m];
        let a = layer_factor_a(n, theta, phi).unwrap();
        let odd_sps: Vec<BeamSplitterParams> = (0..m)
            .map(|s| BeamSplitterParams { theta: theta[s], phi: phi[s], top_channel: 2 * s })
            .collect();
        let odd = layer_matrix(n, LayerKind::OddType, &odd_sps).unwrap();
        prop_assert!(verify_layer(&a, &odd, LayerKind::OddType, &tol).unwrap() < 1e-11);

        let mut chi: Vec<f64> = raw[8..8 + m - 1].to_vec();
        let mut eta: Vec<f64> = raw[12..12 + m - 1].to_vec();
        chi.push(0.0);
        eta.push(0.0);
        let b = layer_factor_b(n, &chi, &eta).unwrap();
        let even_sps: Vec<BeamSplitterParams> = (0..m - 1)
            .map(|s| BeamSplitterParams { theta: chi[s], phi: eta[s], top_channel: 2 * s + 1 })
            .collect();
        let even = layer_matrix(n, LayerKind::EvenType, &even_sps).unwrap();
        prop_assert!(verify_layer(&b, &even, LayerKind::EvenType, &tol).unwrap() < 1e-11);
    }

    #[test]
    fn compile_reproduces_haar_at_n6(seed in any::<u64>()) {
        let n = 6;
        let u = haar_random_unitary(n, seed).unwrap();
        let tol = Tolerance { absolute: 1e-9 * n as f64, relative: 1e-9 };
        let c = compile(&u, &tol).unwrap();
        prop_assert_eq!(c.program.mask_count(), 6 * n + 1);
        prop_assert!(c.residual < 1e-10, "residual={:.2e}", c.residual);
        // The fast path agrees with the dense value of the input on a probe.
        let probe: Vec<Complex64> = (0..n)
            .map(|j| Complex64::new((j as f64 * 0.37).cos(), (j as f64 * 0.61).sin()))
            .collect();
        let fast = c.program.fast_apply(&probe).unwrap();
        let direct = u.matvec(&probe).unwrap();
        let diff: f64 = fast
            .iter()
            .zip(&direct)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        prop_assert!(diff < 1e-9, "apply diff={:.2e}", diff);
    }
}
