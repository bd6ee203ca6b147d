//! Large-deviation quantities of the thinned Lévy process: `Λ`, the optimal
//! tilts, the trajectory and variance functions, and the law of `S_u`.

mod charfn;
mod lambda;
mod trajectory;

pub use charfn::{su_charfn, su_density, CharFn, DensityInverter};
pub use lambda::{f_tail, f_tail_y, lambda, lambda_prime, rate_spec, RateFunctionTable};
pub use trajectory::{i_e, i_e_at, i_v_small_p_constant, variance_fns, variance_fns_at, DensityModel, VarianceFns};

/// `θ*` and `I` for `params`, with `ζ(α)` and `ζ(2α)` cached.
pub fn solve_theta_star(params: &crate::process::ModelParams) -> crate::Result<RateFunctionTable> {
    RateFunctionTable::solve(params)
}
