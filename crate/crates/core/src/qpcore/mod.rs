//! Quasiperiodic coefficients: trigonometric sums, frequency modules, and
//! the lift `a(x) = b(Λx)` to a periodic field on the torus.

mod field;
pub mod input;
mod matrix;
mod trigsum;
mod winding;

pub use field::{
    coercivity_estimate, lift, torus_coercivity, torus_grid_points, FourierField, LiftedMedium, LIFT_SEARCH_BOUND,
};
pub use matrix::QPMatrix;
pub(crate) use matrix::min_sym_eigenvalue;
pub use trigsum::{Term, TrigSum, FREQ_TOL};
pub use winding::{
    detect_module, detect_module_bounded, kozlov_constant, kozlov_diagnostic, WindingMap, DEFAULT_P_CHECK,
    DEFAULT_RELATION_BOUND, INJECTIVITY_BUDGET,
};
