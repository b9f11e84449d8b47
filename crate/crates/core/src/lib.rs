//! Numerics for sublinear expectations built from finitely many extreme
//! measures: exact sup-expectations over finite horizons by adversarial
//! dynamic programming, upper/lower variances under mean-uncertainty, the
//! G-normal limit computed by two independent solvers (explicit finite
//! differences and a volatility-switching tree), capacity brackets via ramp
//! squeezes, control Monte Carlo lower bounds, and the convergence
//! experiments tying the finite-horizon side to the limit side.

pub mod acceptance;
pub mod error;
pub mod gheat;
pub mod grid;
pub mod harness;
pub mod kernel;
pub mod mc;
pub mod measure;
pub mod path;
pub mod payoff;
pub mod quadrature;

pub use error::{Error, Result};
pub use gheat::{
    capacity_interval, capacity_interval_with, cfl_steps, g_expect, g_function, inner_ramp, outer_ramp,
    solve_g_heat, tree_g_expect, CapacityBracket, GExpectValue, GHeatParams, GMethod, GSolution, ThetaInterval,
    TreeParams,
};
pub use grid::ValueGrid;
pub use harness::{
    clt_converge, d_theta, fair_coin_singleton, heavy_tail_experiment, heavy_tail_family, lln_converge, lln_limit,
    two_point_hull, ConvergenceRow, HeavyTailReport,
};
pub use kernel::{
    brute_force_sup, centered_strategy_value, centered_sum_sup, conditional_range_check, conditional_variance_check,
    joint_expect, locate_extremal_variance_measures, sup_expect_history, sup_expect_sum, volatility_matching_strategy,
    CenteredGrid, ConstantStrategy, HorizonModel, KernelStrategy, MixtureGrid, SandwichReport, SandwichViolation,
    VolatilityMatchingStrategy,
};
pub use mc::{control_mc_lower_bound, McEstimate, VolControl};
pub use measure::{DiscreteMeasure, MeanInterval, MeasureSet, VarianceBounds};
pub use path::{EmbeddedPath, PathFunctional};

/// Caps the worker pool used by the parallel loops. Call once at startup;
/// later calls are ignored. Results never depend on the pool size.
#[cfg(feature = "parallel")]
pub fn configure_threads(n: usize) {
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
}

#[cfg(not(feature = "parallel"))]
pub fn configure_threads(_n: usize) {}
