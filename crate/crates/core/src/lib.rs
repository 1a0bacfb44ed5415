//! Numerical scattering toolkit built on integral-equation (Lippmann–Schwinger
//! type) formulations.
//!
//! The crate solves stationary scattering problems for two operators on R³:
//!
//! * the Schrödinger operator `-Δ + V` with a real decaying potential, and
//! * the free-space Dirac operator `mβ + α·p + V` with a Hermitian 4×4
//!   matrix potential built from scalar and vector parts.
//!
//! Both problems are reduced to a compact integral equation supported on the
//! effective support of the potential (the "modified" equation with unknown
//! `|V|^{1/2}φ`), discretised by a Nyström rule on a uniform lattice, and
//! solved densely or matrix-free (FFT convolution + GMRES). From the solutions
//! the crate assembles on-shell scattering amplitudes, T- and S-matrices on an
//! angular quadrature mesh, their eigen-decompositions, total cross sections
//! (computed two ways: directly from the amplitude and through the S-matrix
//! eigenvalues), spectral scans for exceptional energies, and bound-state
//! searches in the spectral gap.
//!
//! Every nontrivial formula is cross-checked by an independent oracle living
//! in [`verify`] or in the test suites: momentum-space quadrature for the
//! translation-invariant kernels, adaptive quadrature for singular-cell
//! constants and convolutions, a radial partial-wave solver for spherically
//! symmetric potentials, and Born-series expansions at weak coupling.

pub mod algebra;
pub mod dirac;
pub mod error;
pub mod grid;
pub mod kernels;
pub mod linalg;
pub mod partial_wave;
pub mod potential;
pub mod quadrature;
pub mod schrodinger;
pub mod shell;
pub mod special;
pub mod spectral;
pub mod verify;

pub use error::{Error, Result};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;

/// 4×4 complex matrix (spinor-space operators).
pub type Mat4 = nalgebra::Matrix4<C64>;

/// 4-component complex spinor.
pub type Vec4 = nalgebra::Vector4<C64>;

/// Kernel normalisation `(2π)^{-3/2}` relating the momentum-space resolvent
/// to its position-space convolution kernel under the unitary Fourier
/// transform convention used here.
pub const RESOLVENT_SCALE: f64 = 0.06349363593424097;
