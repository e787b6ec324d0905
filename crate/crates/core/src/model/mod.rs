//! Structural model: calibration, equations, steady states and policy regimes.

pub mod equations;
mod params;
mod regime;
pub mod steady;

pub use equations::{
    clearing_output, fiscal_tax, hours_for_output, marginal_utilities, money_demand, output,
    steady_money_demand, taylor_components, taylor_inverse, taylor_rate, utility, wage,
};
pub use params::ModelParams;
pub use regime::{classify_policy, Branch, PolicyConfig, Regime, RegimeLabel, Stance};
pub use steady::{
    calibrate_gamma0, compute_steady_state, solve_steady_inflation, steady_output, SteadyState,
};
