//! Numerical kernels shared across the crate: special functions,
//! quadrature, and scalar searches.

pub mod gamma_fn;
pub mod gauss;
pub mod quad;
pub mod search;

pub use gamma_fn::{ln_gamma, reg_lower_gamma, reg_upper_gamma};
pub use gauss::{erfc, norm_pdf, q_func, q_inv};
pub use quad::{integrate, integrate_with_budget, Quadrature};
pub use search::{bisect_root, golden_max, GoldenMax};
