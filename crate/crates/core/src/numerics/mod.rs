//! Shared numerical kernels.

mod dd;
mod gauss;
mod laplace;
mod minimize;
mod quad;
mod sums;
mod zeta;

pub use dd::{DoubleDouble, Neumaier};
pub use gauss::gauss_legendre;
pub use laplace::{laplace_invert_gs, stehfest_weights, Inversion, InversionConfig, MAX_WORKING_DIGITS};
pub use minimize::{minimize_scalar, Minimum};
pub use quad::{integrate, integrate_improper, Domain, Quadrature, QuadratureSpec, Transform};
pub use sums::{em_tail, sum_ci_exp, CiExpSum};
pub use zeta::{zeta_em, Refinement, ZetaConfig, ZetaValue};
