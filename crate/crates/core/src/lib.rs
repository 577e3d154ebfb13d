//! Spectral homogenization of quasiperiodic second-order elliptic media.
//!
//! A quasiperiodic coefficient `A(x) = B(Λx)` is lifted to a periodic field on
//! the torus `[0, 2π)^M`. The degenerate lifted operator `-D·B D` with
//! `D = Λᵀ∇_y` is regularized by `-δΔ`, and the effective tensor is computed
//! two ways at the same Galerkin truncation:
//!
//! * the cell route: corrector solves and the mean flux ([`cell`]);
//! * the Bloch route: half the Hessian of the first regularized Bloch
//!   eigenvalue at zero quasimomentum ([`spectral`], [`tensor`]).
//!
//! The tensor is then continued to `δ → 0`. [`blochtransform`] evaluates the
//! restricted Bloch waves and the first Bloch coefficient of compactly
//! supported functions, and [`directsolver`] runs ε-scale 1D Dirichlet
//! problems to check the homogenization limit.
//!
//! Everything numerical is generic over [`Real`] (`f32` or `f64`); the `*64`
//! aliases below fix `f64`.

pub mod blochtransform;
pub mod cell;
pub mod directsolver;
mod error;
pub mod linalg;
pub mod presets;
pub mod qpcore;
mod scalar;
pub mod spectral;
pub mod tensor;

pub use error::{Error, Result};
pub use scalar::Real;

pub use num_complex::Complex;

pub use qpcore::{FourierField, LiftedMedium, QPMatrix, TrigSum, WindingMap};
pub use spectral::{BlochProblem, EigenPair, ModeLattice};
pub use tensor::{EffectiveTensor, Route};

pub type Complex64 = Complex<f64>;
pub type TrigSum64 = TrigSum<f64>;
pub type QPMatrix64 = QPMatrix<f64>;
pub type WindingMap64 = WindingMap<f64>;
pub type FourierField64 = FourierField<f64>;
pub type LiftedMedium64 = LiftedMedium<f64>;
pub type EigenPair64 = EigenPair<f64>;
pub type EffectiveTensor64 = EffectiveTensor<f64>;
pub type BlochProblem64<'a> = BlochProblem<'a, f64>;
