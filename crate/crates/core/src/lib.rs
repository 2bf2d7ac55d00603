//! maskc-core: factor any even-dimension unitary into one phase mask followed
//! by 6n repetitions of (discrete Fourier transform × phase mask), verify the
//! factorization by reconstruction, retarget it onto multimode-interference
//! coupler hardware, and apply compiled programs to vectors at FFT speed.
//!
//! The pipeline, end to end:
//!
//! 1. [`clements::decompose_clements`] — factor the (relabeled) unitary into
//!    a rectangular mesh of two-channel mixers: n alternating layers plus one
//!    leading diagonal.
//! 2. [`compile::compile`] — replace every pair of mesh layers with twelve
//!    phase masks via fixed algebraic identities between the mixing layers
//!    and the DFT ([`fixed`]), producing the canonical 6n+1-mask program.
//!    Verification against the input is built in, never optional.
//! 3. [`mmi::retarget_to_mmi`] — re-express a compiled program for hardware
//!    whose native transform is the MMI coupler matrix S rather than the
//!    ideal DFT, using S = Rᵀ·Θ·F·Θ·R.
//! 4. [`program::PhaseMaskProgram::fast_apply`] — apply a program to vectors
//!    in O(L·n log n) via the FFT instead of O(L·n²).
//!
//! The optional `parallel` feature (on by default) distributes large matrix
//! products and batch vector application across threads via rayon; disabling
//! it leaves a fully sequential crate with identical results and interfaces.

pub mod bench;
pub mod clements;
pub mod compile;
pub mod error;
pub mod fft;
pub mod fixed;
pub mod haar;
pub mod io;
pub mod mat;
pub mod mmi;
pub mod phase;
pub mod program;

pub use clements::{
    beamsplitter_matrix, bs_factorization, decompose_clements, reconstruct_mesh,
    BeamSplitterParams, ClementsMesh, LayerKind, MeshLayer,
};
pub use compile::{compile, layer_factor_a, layer_factor_b, verify_layer, Compiled};
pub use error::{Error, Result};
pub use haar::haar_random_unitary;
pub use mat::{frobenius_distance, is_unitary, polar_unitary_factor, CMat, Tolerance};
pub use mmi::{mmi_smatrix, retarget_to_mmi, verify_dft_opt_identity, MmiParams};
pub use phase::PhaseMask;
pub use program::{verify_program, PhaseMaskProgram, TransformKind};
