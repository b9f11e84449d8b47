//! The limit object: the G-heat generator, its explicit finite-difference
//! solver, an independent volatility-switching tree oracle, and capacity
//! brackets computed through ramp squeezes of interval indicators.
//!
//! The generator is `G(a) = (sigma2_high * a^+ - sigma2_low * a^-) / 2`, the
//! standard form for the normal limit law with variance uncertainty in
//! `[sigma2_low, sigma2_high]`. The two solvers share nothing beyond the
//! generator definition, so their agreement is a real cross-check.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{lerp_clamped, map_indices, ValueGrid};

/// Variance interval `[sigma2_low, sigma2_high]` of the limit law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThetaInterval {
    sigma2_low: f64,
    sigma2_high: f64,
}

impl ThetaInterval {
    pub fn new(sigma2_low: f64, sigma2_high: f64) -> Result<Self> {
        if !(sigma2_low.is_finite() && sigma2_high.is_finite()) || sigma2_low < 0.0 || sigma2_low > sigma2_high {
            return Err(Error::InvalidParameter(format!(
                "[{sigma2_low}, {sigma2_high}] is not a valid variance interval"
            )));
        }
        Ok(ThetaInterval {
            sigma2_low,
            sigma2_high,
        })
    }

    pub fn degenerate(sigma2: f64) -> Result<Self> {
        ThetaInterval::new(sigma2, sigma2)
    }

    /// Parses `"lo,hi"`.
    pub fn parse(text: &str) -> Result<Self> {
        let parts: Vec<&str> = text.split(',').collect();
        if parts.len() != 2 {
            return Err(Error::InvalidParameter(format!("theta must be `lo,hi`, got `{text}`")));
        }
        let lo = parts[0]
            .trim()
            .parse::<f64>()
            .map_err(|e| Error::InvalidParameter(format!("theta low `{}`: {e}", parts[0])))?;
        let hi = parts[1]
            .trim()
            .parse::<f64>()
            .map_err(|e| Error::InvalidParameter(format!("theta high `{}`: {e}", parts[1])))?;
        ThetaInterval::new(lo, hi)
    }

    pub fn sigma2_low(&self) -> f64 {
        self.sigma2_low
    }

    pub fn sigma2_high(&self) -> f64 {
        self.sigma2_high
    }

    pub fn sigma_high(&self) -> f64 {
        self.sigma2_high.sqrt()
    }

    pub fn is_degenerate(&self) -> bool {
        self.sigma2_low == self.sigma2_high
    }
}

/// `G(a) = (sigma2_high * a^+ - sigma2_low * a^-) / 2`. Positively
/// homogeneous and sublinear in `a`.
pub fn g_function(a: f64, theta: ThetaInterval) -> f64 {
    0.5 * (theta.sigma2_high * a.max(0.0) - theta.sigma2_low * (-a).max(0.0))
}

/// Discretization of the G-heat equation on `[-x_radius, x_radius] x [0,1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GHeatParams {
    pub theta: ThetaInterval,
    pub x_radius: f64,
    pub h: f64,
    pub time_steps: usize,
}

impl GHeatParams {
    /// Radius 20% beyond the required `4 sigma_high`, about 480 spatial
    /// cells, and the smallest step count satisfying the CFL bound.
    pub fn with_defaults(theta: ThetaInterval) -> Self {
        let radius = (4.8 * theta.sigma_high()).max(1.2);
        let h = radius / 240.0;
        GHeatParams {
            theta,
            x_radius: radius,
            h,
            time_steps: cfl_steps(theta.sigma2_high(), h),
        }
    }

    fn validate(&self) -> Result<()> {
        if !self.h.is_finite() || self.h <= 0.0 || !self.x_radius.is_finite() || self.x_radius <= 0.0 || self.time_steps == 0 {
            return Err(Error::InvalidParameter(format!(
                "bad solver parameters: radius={}, h={}, steps={}",
                self.x_radius, self.h, self.time_steps
            )));
        }
        let required = 4.0 * self.theta.sigma_high();
        if self.x_radius < required - 1e-12 {
            return Err(Error::GridCoverage(format!(
                "radius {} below required {required}",
                self.x_radius
            )));
        }
        let dt = 1.0 / self.time_steps as f64;
        let limit = self.h * self.h / self.theta.sigma2_high();
        if dt * self.theta.sigma2_high() > self.h * self.h * (1.0 + 1e-12) {
            return Err(Error::Cfl {
                dt,
                limit,
                h: self.h,
                sigma2_high: self.theta.sigma2_high(),
            });
        }
        Ok(())
    }
}

/// Smallest explicit-scheme step count stable for the given volatility and
/// spatial step.
pub fn cfl_steps(sigma2_high: f64, h: f64) -> usize {
    let min_steps = (sigma2_high / (h * h)).ceil() as usize + 1;
    min_steps.max(100)
}

/// Solution of the G-heat equation at `t = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GSolution {
    pub value_at_origin: f64,
    pub grid: ValueGrid,
}

/// Explicit time-stepping `u <- u + dt * G(second central difference)` from
/// terminal data at `t = 1` back to `t = 0`. Boundary nodes stay at their
/// terminal values (the argument is clamped to the grid). Under the CFL
/// bound every update is a convex combination of stencil values, so the
/// scheme is monotone and the discrete comparison principle holds.
pub fn solve_g_heat<F>(params: &GHeatParams, terminal: F) -> Result<GSolution>
where
    F: Fn(f64) -> f64 + Sync,
{
    params.validate()?;
    let mut grid = ValueGrid::symmetric(params.x_radius, params.h, &terminal)?;
    let cells = grid.len();
    let origin = grid.origin_index().expect("symmetric grids contain the origin");
    let dt = 1.0 / params.time_steps as f64;
    let inv_h2 = 1.0 / (params.h * params.h);
    let theta = params.theta;
    let mut values = grid.values().to_vec();
    for _ in 0..params.time_steps {
        let prev = &values;
        let next = map_indices(cells, |j| {
            if j == 0 || j == cells - 1 {
                prev[j]
            } else {
                let a = (prev[j + 1] - 2.0 * prev[j] + prev[j - 1]) * inv_h2;
                prev[j] + dt * g_function(a, theta)
            }
        });
        values = next;
    }
    let value_at_origin = values[origin];
    grid.replace_values(values);
    grid.set_time_index(0);
    Ok(GSolution {
        value_at_origin,
        grid,
    })
}

/// Discretization of the volatility-switching tree oracle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    pub theta: ThetaInterval,
    pub steps: usize,
    pub x_radius: f64,
    pub h: f64,
    /// Number of variance levels searched per step; the interval endpoints
    /// are always among them.
    pub vol_points: usize,
}

impl TreeParams {
    pub fn with_defaults(theta: ThetaInterval) -> Self {
        let steps = 512usize;
        let sigma = theta.sigma_high();
        let radius = (4.8 * sigma).max(1.2);
        let dt = 1.0 / steps as f64;
        let h = if sigma > 0.0 {
            sigma * dt.sqrt() / 16.0
        } else {
            radius / 240.0
        };
        TreeParams {
            theta,
            steps,
            x_radius: radius,
            h,
            vol_points: 2,
        }
    }
}

/// Independent approximation of the limit value: per step, the best of
/// `(v(x + sigma sqrt(dt)) + v(x - sigma sqrt(dt))) / 2` over a variance
/// grid containing both interval endpoints, with linear interpolation on a
/// clamped spatial grid.
///
/// The one-step gain is linear in the variance to leading order, so the
/// endpoints dominate asymptotically; interior points are kept as a
/// safeguard against non-bang-bang effects at finite step counts.
pub fn tree_g_expect<F>(params: &TreeParams, phi: F) -> Result<f64>
where
    F: Fn(f64) -> f64 + Sync,
{
    if params.steps == 0 || !params.h.is_finite() || params.h <= 0.0 || params.vol_points == 0 {
        return Err(Error::InvalidParameter(format!(
            "bad tree parameters: steps={}, h={}, vol_points={}",
            params.steps, params.h, params.vol_points
        )));
    }
    let required = 4.0 * params.theta.sigma_high();
    if params.x_radius < required - 1e-12 {
        return Err(Error::GridCoverage(format!(
            "radius {} below required {required}",
            params.x_radius
        )));
    }
    let grid = ValueGrid::symmetric(params.x_radius, params.h, &phi)?;
    let cells = grid.len();
    let origin = grid.origin_index().expect("symmetric grids contain the origin");
    let dt = 1.0 / params.steps as f64;
    let (lo, hi) = (params.theta.sigma2_low(), params.theta.sigma2_high());
    let levels = if params.theta.is_degenerate() { 1 } else { params.vol_points.max(2) };
    let rel_offsets: Vec<f64> = (0..levels)
        .map(|i| {
            let s2 = if levels == 1 {
                hi
            } else {
                lo + (hi - lo) * i as f64 / (levels - 1) as f64
            };
            (s2 * dt).sqrt() / params.h
        })
        .collect();
    let mut values = grid.values().to_vec();
    for _ in 0..params.steps {
        let prev = &values;
        let next = map_indices(cells, |j| {
            let mut best = f64::NEG_INFINITY;
            for &rel in &rel_offsets {
                let v = 0.5 * (lerp_clamped(prev, j as f64 + rel) + lerp_clamped(prev, j as f64 - rel));
                if v > best {
                    best = v;
                }
            }
            best
        });
        values = next;
    }
    Ok(values[origin])
}

/// Which solver route evaluates the limit expectation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GMethod {
    Pde,
    Tree,
    /// Run both; fail if they disagree beyond the tolerance.
    Both { tolerance: f64 },
}

impl GMethod {
    pub fn both() -> Self {
        GMethod::Both { tolerance: 0.01 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GExpectValue {
    pub value: f64,
    /// `|pde - tree|` when both routes ran.
    pub discrepancy: Option<f64>,
}

/// Limit expectation of `phi` under the normal law with variance uncertainty
/// `theta`, with default discretizations.
pub fn g_expect<F>(phi: F, theta: ThetaInterval, method: GMethod) -> Result<GExpectValue>
where
    F: Fn(f64) -> f64 + Sync,
{
    match method {
        GMethod::Pde => {
            let sol = solve_g_heat(&GHeatParams::with_defaults(theta), &phi)?;
            Ok(GExpectValue {
                value: sol.value_at_origin,
                discrepancy: None,
            })
        }
        GMethod::Tree => {
            let value = tree_g_expect(&TreeParams::with_defaults(theta), &phi)?;
            Ok(GExpectValue {
                value,
                discrepancy: None,
            })
        }
        GMethod::Both { tolerance } => {
            let pde = solve_g_heat(&GHeatParams::with_defaults(theta), &phi)?.value_at_origin;
            let tree = tree_g_expect(&TreeParams::with_defaults(theta), &phi)?;
            let discrepancy = (pde - tree).abs();
            if discrepancy > tolerance {
                return Err(Error::CrossOracle { pde, tree, tolerance });
            }
            Ok(GExpectValue {
                value: pde,
                discrepancy: Some(discrepancy),
            })
        }
    }
}

/// Inner squeeze ramp: 1 on `[a+eps, b-eps]`, 0 outside `(a, b)`, linear in
/// between. Pointwise below the indicator of `[a, b]`. Infinite endpoints
/// drop the corresponding ramp.
pub fn inner_ramp(a: f64, b: f64, eps: f64) -> impl Fn(f64) -> f64 + Copy + Send + Sync {
    move |x: f64| {
        let up = (x - a) / eps;
        let down = (b - x) / eps;
        up.min(down).clamp(0.0, 1.0)
    }
}

/// Outer squeeze ramp: 1 on `[a, b]`, 0 outside `(a-eps, b+eps)`. Pointwise
/// above the indicator of `[a, b]`.
pub fn outer_ramp(a: f64, b: f64, eps: f64) -> impl Fn(f64) -> f64 + Copy + Send + Sync {
    inner_ramp(a - eps, b + eps, eps)
}

/// Upper-probability bracket for the interval `[a, b]` under the limit law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapacityBracket {
    pub lower: f64,
    pub upper: f64,
    pub epsilon: f64,
}

impl CapacityBracket {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, p: f64) -> bool {
        self.lower <= p && p <= self.upper
    }
}

/// Capacity bracket with explicit solver parameters: the lower edge is the
/// limit expectation of the inner ramp, the upper edge that of the outer
/// ramp. Both edges are probabilities of smoothed indicators, so they are
/// clamped into [0, 1].
pub fn capacity_interval_with(params: &GHeatParams, a: f64, b: f64, epsilon: f64) -> Result<CapacityBracket> {
    validate_capacity_args(a, b, epsilon)?;
    let lower_raw = solve_g_heat(params, inner_ramp(a, b, epsilon))?.value_at_origin;
    let upper_raw = solve_g_heat(params, outer_ramp(a, b, epsilon))?.value_at_origin;
    let upper = upper_raw.clamp(0.0, 1.0);
    let lower = lower_raw.clamp(0.0, 1.0).min(upper);
    Ok(CapacityBracket {
        lower,
        upper,
        epsilon,
    })
}

fn validate_capacity_args(a: f64, b: f64, epsilon: f64) -> Result<()> {
    if a.is_nan() || b.is_nan() || a >= b {
        return Err(Error::InvalidParameter(format!("need a < b, got a={a}, b={b}")));
    }
    if !epsilon.is_finite() || epsilon <= 0.0 || epsilon >= (b - a) / 2.0 {
        return Err(Error::InvalidParameter(format!(
            "epsilon {epsilon} outside (0, (b-a)/2) for [{a}, {b}]"
        )));
    }
    Ok(())
}

/// Capacity bracket with solver parameters derived from `theta` and the ramp
/// width (the spatial step resolves the ramp).
pub fn capacity_interval(a: f64, b: f64, theta: ThetaInterval, epsilon: f64) -> Result<CapacityBracket> {
    validate_capacity_args(a, b, epsilon)?;
    let base = GHeatParams::with_defaults(theta);
    let h = base.h.min(epsilon / 6.0);
    let params = GHeatParams {
        theta,
        x_radius: base.x_radius,
        h,
        time_steps: cfl_steps(theta.sigma2_high(), h),
    };
    capacity_interval_with(&params, a, b, epsilon)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{normal_expect, normal_interval_probability};
    use approx::assert_abs_diff_eq;

    #[test]
    fn g_function_examples() {
        let theta = ThetaInterval::new(1.0, 4.0).unwrap();
        assert_eq!(g_function(1.0, theta), 2.0);
        assert_eq!(g_function(-1.0, theta), -0.5);
        assert_eq!(g_function(0.0, theta), 0.0);
    }

    #[test]
    fn g_function_is_sublinear_and_homogeneous() {
        let theta = ThetaInterval::new(0.3, 2.5).unwrap();
        for a in [-2.0, -0.5, 0.0, 0.7, 3.0] {
            for b in [-1.5, 0.0, 2.0] {
                assert!(g_function(a + b, theta) <= g_function(a, theta) + g_function(b, theta) + 1e-15);
            }
            for lam in [0.0, 0.5, 2.0] {
                assert_abs_diff_eq!(g_function(lam * a, theta), lam * g_function(a, theta), epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn theta_validation_and_parse() {
        assert!(ThetaInterval::new(-0.1, 1.0).is_err());
        assert!(ThetaInterval::new(2.0, 1.0).is_err());
        assert!(ThetaInterval::parse("0.25,0.1").is_err());
        assert_eq!(
            ThetaInterval::parse("0, 0.25").unwrap(),
            ThetaInterval::new(0.0, 0.25).unwrap()
        );
    }

    #[test]
    fn degenerate_heat_equation_recovers_classical_variance() {
        for s2 in [0.25, 1.0] {
            let theta = ThetaInterval::degenerate(s2).unwrap();
            let sol = solve_g_heat(&GHeatParams::with_defaults(theta), |x| x * x).unwrap();
            assert_abs_diff_eq!(sol.value_at_origin, s2, epsilon = 1e-3);
        }
    }

    #[test]
    fn convex_payoff_selects_top_volatility() {
        let theta = ThetaInterval::new(0.0, 0.25).unwrap();
        let sol = solve_g_heat(&GHeatParams::with_defaults(theta), |x| x * x).unwrap();
        assert_abs_diff_eq!(sol.value_at_origin, 0.25, epsilon = 1e-2);
        // Independent route agrees.
        let tree = tree_g_expect(&TreeParams::with_defaults(theta), |x| x * x).unwrap();
        assert_abs_diff_eq!(sol.value_at_origin, tree, epsilon = 1e-2);
    }

    #[test]
    fn classical_absolute_payoff_matches_closed_form() {
        let theta = ThetaInterval::degenerate(0.25).unwrap();
        let sol = solve_g_heat(&GHeatParams::with_defaults(theta), |x| 1.0 - x.abs()).unwrap();
        let expected = 1.0 - 0.5 * (2.0 / std::f64::consts::PI).sqrt();
        assert_abs_diff_eq!(sol.value_at_origin, expected, epsilon = 2e-3);
    }

    #[test]
    fn cfl_violation_is_rejected() {
        let theta = ThetaInterval::degenerate(1.0).unwrap();
        let params = GHeatParams {
            theta,
            x_radius: 4.8,
            h: 0.02,
            time_steps: 100,
        };
        assert!(matches!(solve_g_heat(&params, |x| x), Err(Error::Cfl { .. })));
    }

    #[test]
    fn radius_below_coverage_is_rejected() {
        let theta = ThetaInterval::degenerate(1.0).unwrap();
        let params = GHeatParams {
            theta,
            x_radius: 2.0,
            h: 0.01,
            time_steps: 20000,
        };
        assert!(matches!(solve_g_heat(&params, |x| x), Err(Error::GridCoverage(_))));
        let tree = TreeParams {
            theta,
            steps: 16,
            x_radius: 2.0,
            h: 0.05,
            vol_points: 2,
        };
        assert!(matches!(tree_g_expect(&tree, |x| x), Err(Error::GridCoverage(_))));
    }

    #[test]
    fn comparison_principle_and_constants() {
        let theta = ThetaInterval::new(0.25, 1.0).unwrap();
        let params = GHeatParams::with_defaults(theta);
        let lo = solve_g_heat(&params, |x| 1.0 - x.abs().min(1.0)).unwrap().value_at_origin;
        let hi = solve_g_heat(&params, |x| 1.3 - x.abs().min(1.0)).unwrap().value_at_origin;
        assert!(lo <= hi + 1e-12);
        // Constants pass through every solver exactly.
        let c = solve_g_heat(&params, |_| 0.7).unwrap().value_at_origin;
        assert_eq!(c, 0.7);
        let ct = tree_g_expect(&TreeParams::with_defaults(theta), |_| 0.7).unwrap();
        assert_eq!(ct, 0.7);
        // Bounded data stays inside its range.
        let v = solve_g_heat(&params, |x| x.clamp(-1.0, 1.0)).unwrap().value_at_origin;
        assert!((-1.0..=1.0).contains(&v));
    }

    #[test]
    fn solver_level_sublinearity() {
        let theta = ThetaInterval::new(0.0, 0.25).unwrap();
        let params = GHeatParams::with_defaults(theta);
        let phi = |x: f64| 1.0 - x.abs().min(1.0);
        let base = solve_g_heat(&params, phi).unwrap().value_at_origin;
        let shifted = solve_g_heat(&params, |x| phi(x) + 0.25).unwrap().value_at_origin;
        assert_abs_diff_eq!(shifted, base + 0.25, epsilon = 1e-9);
        let scaled = solve_g_heat(&params, |x| 2.0 * phi(x)).unwrap().value_at_origin;
        assert_abs_diff_eq!(scaled, 2.0 * base, epsilon = 1e-9);
    }

    #[test]
    fn tree_matches_classical_variance_at_512_steps() {
        let theta = ThetaInterval::degenerate(0.25).unwrap();
        let v = tree_g_expect(&TreeParams::with_defaults(theta), |x| x * x).unwrap();
        assert_abs_diff_eq!(v, 0.25, epsilon = 5e-3);
        // Martingale mean.
        let m = tree_g_expect(&TreeParams::with_defaults(theta), |x| x).unwrap();
        assert_abs_diff_eq!(m, 0.0, epsilon = 1e-9);
    }

    #[test]
    fn tree_odd_payoff_symmetry() {
        let theta = ThetaInterval::new(0.25, 1.0).unwrap();
        let params = TreeParams::with_defaults(theta);
        let phi = |x: f64| x.clamp(-1.0, 1.0);
        let v = tree_g_expect(&params, phi).unwrap();
        let reflected = tree_g_expect(&params, |x| phi(-x)).unwrap();
        assert_abs_diff_eq!(v, reflected, epsilon = 1e-12);
        assert!(v >= -1e-12);
    }

    #[test]
    fn cross_oracle_dispatch() {
        let theta = ThetaInterval::new(0.0, 0.25).unwrap();
        let phi = |x: f64| 1.0 - x.abs().min(1.0);
        let both = g_expect(phi, theta, GMethod::both()).unwrap();
        assert!(both.discrepancy.unwrap() <= 0.01);
        let pde = g_expect(phi, theta, GMethod::Pde).unwrap();
        assert_eq!(both.value, pde.value);
        // An absurd tolerance trips the cross-oracle error.
        assert!(matches!(
            g_expect(|x: f64| x * x, ThetaInterval::new(1.0, 4.0).unwrap(), GMethod::Both { tolerance: 1e-9 }),
            Err(Error::CrossOracle { .. })
        ));
    }

    #[test]
    fn capacity_unbounded_interval_is_certain() {
        let theta = ThetaInterval::new(0.25, 1.0).unwrap();
        let br = capacity_interval(f64::NEG_INFINITY, f64::INFINITY, theta, 0.05).unwrap();
        assert_eq!(br.lower, 1.0);
        assert_eq!(br.upper, 1.0);
    }

    #[test]
    fn capacity_half_line_brackets_one_half() {
        let theta = ThetaInterval::degenerate(0.25).unwrap();
        let br = capacity_interval(0.0, f64::INFINITY, theta, 0.05).unwrap();
        assert!(br.lower <= 0.5 && 0.5 <= br.upper, "bracket [{}, {}]", br.lower, br.upper);
        assert!(br.width() < 0.1);
    }

    #[test]
    fn capacity_two_sigma_interval_brackets_quadrature() {
        let theta = ThetaInterval::degenerate(0.25).unwrap();
        let truth = normal_interval_probability(0.0, 0.25, -1.0, 1.0).unwrap();
        let br = capacity_interval(-1.0, 1.0, theta, 0.01).unwrap();
        assert!(br.contains(truth), "bracket [{}, {}] misses {truth}", br.lower, br.upper);
        assert!(br.width() <= 0.02, "width {}", br.width());
    }

    #[test]
    fn capacity_epsilon_validation() {
        let theta = ThetaInterval::degenerate(0.25).unwrap();
        assert!(capacity_interval(-1.0, 1.0, theta, 0.0).is_err());
        assert!(capacity_interval(-1.0, 1.0, theta, 1.0).is_err());
        assert!(capacity_interval(1.0, -1.0, theta, 0.01).is_err());
    }

    #[test]
    fn ramp_squeeze_ordering() {
        let inner = inner_ramp(-1.0, 1.0, 0.1);
        let outer = outer_ramp(-1.0, 1.0, 0.1);
        for j in -30..=30 {
            let x = j as f64 * 0.05;
            let indicator = if (-1.0..=1.0).contains(&x) { 1.0 } else { 0.0 };
            let tight = if (-0.9..=0.9).contains(&x) { 1.0 } else { 0.0 };
            assert!(tight <= inner(x) + 1e-15);
            assert!(inner(x) <= indicator + 1e-15);
            assert!(indicator <= outer(x) + 1e-15);
            assert!(outer(x) <= 1.0 + 1e-15);
        }
    }

    #[test]
    fn degenerate_theta_matches_quadrature_for_lipschitz_payoffs() {
        let theta = ThetaInterval::degenerate(0.25).unwrap();
        let phi = |x: f64| 1.0 - x.abs().min(1.0);
        let quad = normal_expect(phi, 0.0, 0.25, &[-1.0, 0.0, 1.0]).unwrap();
        let sol = solve_g_heat(&GHeatParams::with_defaults(theta), phi).unwrap();
        assert_abs_diff_eq!(sol.value_at_origin, quad, epsilon = 1e-3);
    }
}
