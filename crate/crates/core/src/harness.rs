//! Convergence experiments tying the finite-horizon DP side to the limit
//! side: the law of large numbers under mean uncertainty, the central limit
//! behavior of centered sums, and the desk-scale model families used across
//! the experiment suite.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gheat::{g_expect, GMethod, ThetaInterval};
use crate::kernel::{centered_sum_sup, sup_expect_sum, CenteredGrid, HorizonModel, MixtureGrid};
use crate::measure::{DiscreteMeasure, MeanInterval, MeasureSet};
use crate::quadrature::normal_expect;

const MAX_LIMIT_GRID: f64 = 5e7;

/// One experiment record pairing a finite-horizon DP value with its limit
/// value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub experiment: String,
    pub n: usize,
    /// Family truncation, when the experiment has one.
    pub k: Option<u64>,
    /// Mixture-grid resolution, when the experiment has one.
    pub m: Option<u64>,
    /// Spatial grid step, when the experiment has one.
    pub h: Option<f64>,
    pub dp_value: f64,
    pub limit_value: f64,
    pub abs_error: f64,
    pub runtime_ms: u64,
}

impl ConvergenceRow {
    pub fn new(experiment: &str, n: usize, dp_value: f64, limit_value: f64, runtime_ms: u64) -> Self {
        ConvergenceRow {
            experiment: experiment.to_string(),
            n,
            k: None,
            m: None,
            h: None,
            dp_value,
            limit_value,
            abs_error: (dp_value - limit_value).abs(),
            runtime_ms,
        }
    }

    pub fn with_k(mut self, k: usize) -> Self {
        self.k = Some(k as u64);
        self
    }

    pub fn with_m(mut self, m: usize) -> Self {
        self.m = Some(m as u64);
        self
    }

    pub fn with_h(mut self, h: f64) -> Self {
        self.h = Some(h);
        self
    }
}

/// Distance from `x` to the interval `[lo, hi]`: zero inside, distance to
/// the nearest endpoint outside.
pub fn d_theta(x: f64, lo: f64, hi: f64) -> f64 {
    debug_assert!(lo <= hi);
    if x < lo {
        lo - x
    } else if x > hi {
        x - hi
    } else {
        0.0
    }
}

/// Max of a Lipschitz function over a mean interval, to within `eps`: a grid
/// of spacing `eps / lipschitz` (which already pins the max to `eps/2`)
/// followed by two local refinement rounds around the best grid point.
pub fn lln_limit<F>(phi: F, interval: MeanInterval, lipschitz: f64, eps: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if !(lipschitz > 0.0 && lipschitz.is_finite()) {
        return Err(Error::InvalidParameter(format!("Lipschitz bound {lipschitz} must be a positive real")));
    }
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidParameter(format!("tolerance {eps} must be a positive real")));
    }
    let width = interval.width();
    if width == 0.0 {
        return Ok(phi(interval.lower));
    }
    let spacing = eps / lipschitz;
    let count = (width / spacing).ceil();
    if count > MAX_LIMIT_GRID {
        return Err(Error::GuardViolation(format!(
            "limit search grid would hold {count} points (limit {MAX_LIMIT_GRID})"
        )));
    }
    let count = count as usize;
    let mut best_x = interval.lower;
    let mut best = f64::NEG_INFINITY;
    for j in 0..=count {
        let x = interval.lower + width * j as f64 / count as f64;
        let v = phi(x);
        if v > best {
            best = v;
            best_x = x;
        }
    }
    // Local refinement around the best coarse point.
    let mut radius = width / count as f64;
    for _ in 0..2 {
        let lo = (best_x - radius).max(interval.lower);
        let hi = (best_x + radius).min(interval.upper);
        for j in 0..=64 {
            let x = lo + (hi - lo) * j as f64 / 64.0;
            let v = phi(x);
            if v > best {
                best = v;
                best_x = x;
            }
        }
        radius /= 32.0;
    }
    Ok(best)
}

/// Rows pairing the uncentered-sum DP at `S_n / n` with the Lipschitz-max
/// limit, ordered by `n` ascending.
pub fn lln_converge<F>(base: &MeasureSet, phi: F, lipschitz: f64, n_list: &[usize]) -> Result<Vec<ConvergenceRow>>
where
    F: Fn(f64) -> f64 + Copy,
{
    let limit = lln_limit(phi, base.mean_interval(), lipschitz, 1e-6)?;
    let mut rows = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let model = HorizonModel::new(base.clone(), n)?;
        let start = Instant::now();
        let dp = sup_expect_sum(&model, phi, 1.0 / n as f64)?;
        rows.push(ConvergenceRow::new("lln", n, dp, limit, start.elapsed().as_millis() as u64));
    }
    rows.sort_by_key(|r| r.n);
    Ok(rows)
}

/// Rows pairing the centered-sum DP with the limit expectation computed by
/// both limit solvers, ordered by `n` ascending.
pub fn clt_converge<F>(
    base: &MeasureSet,
    phi: F,
    n_list: &[usize],
    mixture_resolution: usize,
    grid_step: f64,
) -> Result<Vec<ConvergenceRow>>
where
    F: Fn(f64) -> f64 + Copy + Sync,
{
    let vb = base.variance_bounds();
    let theta = ThetaInterval::new(vb.lower, vb.upper)?;
    let limit = g_expect(phi, theta, GMethod::both())?.value;
    let mixtures = MixtureGrid::new(mixture_resolution)?;
    let grid = CenteredGrid {
        step: grid_step,
        ..CenteredGrid::with_defaults(vb.upper)
    };
    let mut rows = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let model = HorizonModel::new(base.clone(), n)?;
        let start = Instant::now();
        let dp = centered_sum_sup(&model, phi, &mixtures, &grid)?;
        rows.push(
            ConvergenceRow::new("clt", n, dp, limit, start.elapsed().as_millis() as u64)
                .with_m(mixture_resolution)
                .with_h(grid_step),
        );
    }
    rows.sort_by_key(|r| r.n);
    Ok(rows)
}

/// The singleton fair-coin set: one measure, no uncertainty.
pub fn fair_coin_singleton() -> MeasureSet {
    MeasureSet::singleton(DiscreteMeasure::bernoulli(0.5).expect("valid parameter"))
}

/// The hull of the two point masses at 0 and 1: full mean uncertainty on
/// [0, 1] with variance bounds [0, 1/4].
pub fn two_point_hull() -> MeasureSet {
    MeasureSet::new(vec![DiscreteMeasure::dirac(0.0), DiscreteMeasure::dirac(1.0)]).expect("nonempty")
}

/// The truncated heavy-tail family: for `k = 1..=k_max` the measure with
/// mass `1 - 1/k^2` at 0 and `1/(2 k^2)` at each of `-k` and `k`. Every
/// member has mean 0 and second moment 1, but the family's quadratic tails
/// do not vanish uniformly, which is what breaks the central limit behavior.
pub fn heavy_tail_family(k_max: usize) -> Result<MeasureSet> {
    if k_max < 1 {
        return Err(Error::InvalidParameter("truncation must be at least 1".into()));
    }
    let mut extremes = Vec::with_capacity(k_max);
    for k in 1..=k_max {
        let kf = k as f64;
        let tail = 1.0 / (2.0 * kf * kf);
        extremes.push(DiscreteMeasure::new([(-kf, tail), (0.0, 1.0 - 2.0 * tail), (kf, tail)])?);
    }
    MeasureSet::new(extremes)
}

/// Outcome of the heavy-tail experiment at one truncation level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeavyTailReport {
    pub k_trunc: usize,
    /// One row per horizon; `limit_value` carries the classical comparison.
    pub rows: Vec<ConvergenceRow>,
    /// `E[1 - |Z|]` for a standard normal `Z`, the value the classical
    /// central limit theorem would predict.
    pub classical_value: f64,
}

/// Runs the heavy-tail experiment: sup of `E[1 - |S_n / sqrt(n)|]` over the
/// truncated family (uncentered; the family is mean-certain at 0), per
/// horizon, against the classical normal comparison value.
pub fn heavy_tail_experiment(k_trunc: usize, n_list: &[usize]) -> Result<HeavyTailReport> {
    let set = heavy_tail_family(k_trunc)?;
    let phi = |x: f64| 1.0 - x.abs();
    let classical_value = normal_expect(phi, 0.0, 1.0, &[0.0])?;
    let mut rows = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let model = HorizonModel::new(set.clone(), n)?;
        let start = Instant::now();
        let scaling = 1.0 / (n as f64).sqrt();
        let dp = sup_expect_sum(&model, phi, scaling)?;
        rows.push(
            ConvergenceRow::new("example53", n, dp, classical_value, start.elapsed().as_millis() as u64)
                .with_k(k_trunc),
        );
    }
    rows.sort_by_key(|r| r.n);
    Ok(HeavyTailReport {
        k_trunc,
        rows,
        classical_value,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn d_theta_examples() {
        assert_eq!(d_theta(0.5, 1.0, 2.0), 0.5);
        assert_eq!(d_theta(1.5, 1.0, 2.0), 0.0);
        assert_eq!(d_theta(3.0, 1.0, 2.0), 1.0);
    }

    #[test]
    fn lln_limit_examples() {
        let unit = MeanInterval::new(0.0, 1.0).unwrap();
        assert_abs_diff_eq!(lln_limit(|x| x, unit, 1.0, 1e-6).unwrap(), 1.0, epsilon = 1e-9);
        assert_eq!(lln_limit(|x| d_theta(x, 0.0, 1.0), unit, 1.0, 1e-6).unwrap(), 0.0);
        assert_abs_diff_eq!(
            lln_limit(|x| 1.0 - (x - 0.5).abs(), unit, 1.0, 1e-6).unwrap(),
            1.0,
            epsilon = 1e-6
        );
    }

    #[test]
    fn lln_limit_degenerate_interval() {
        let point = MeanInterval::new(0.5, 0.5).unwrap();
        assert_eq!(lln_limit(|x| 3.0 * x, point, 3.0, 1e-6).unwrap(), 1.5);
    }

    #[test]
    fn lln_limit_validation() {
        let unit = MeanInterval::new(0.0, 1.0).unwrap();
        assert!(lln_limit(|x| x, unit, 0.0, 1e-6).is_err());
        assert!(lln_limit(|x| x, unit, 1.0, 0.0).is_err());
    }

    #[test]
    fn lln_converge_identity_rows_are_constant() {
        // Mean uncertainty: the sup always plays the top mean.
        let rows = lln_converge(&two_point_hull(), |x| x, 1.0, &[4, 8, 16]).unwrap();
        for row in &rows {
            assert_abs_diff_eq!(row.dp_value, 1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(row.limit_value, 1.0, epsilon = 1e-9);
        }
        // No uncertainty: every row equals the classical mean exactly.
        let rows = lln_converge(&fair_coin_singleton(), |x| x, 1.0, &[3, 9]).unwrap();
        for row in &rows {
            assert_abs_diff_eq!(row.dp_value, 0.5, epsilon = 1e-13);
        }
    }

    #[test]
    fn lln_converge_distance_to_mean_interval_decreases_without_uncertainty() {
        // With a singleton set the mean interval is the point 1/2 and the
        // distance payoff has genuinely positive finite-n values that fall.
        let base = fair_coin_singleton();
        let rows = lln_converge(&base, |x| d_theta(x, 0.5, 0.5), 1.0, &[4, 16, 64]).unwrap();
        assert_eq!(rows.last().unwrap().limit_value, 0.0);
        assert!(rows[0].dp_value > rows[1].dp_value);
        assert!(rows[1].dp_value > rows[2].dp_value);
        // Classical scaling check: E|S_n/n - 1/2| ~ sqrt(1/(4 n)) E|Z|.
        let expected = (0.25f64 / 64.0).sqrt() * (2.0 / std::f64::consts::PI).sqrt();
        assert_abs_diff_eq!(rows[2].dp_value, expected, epsilon = 0.01);
    }

    #[test]
    fn heavy_tail_family_members_are_standardized() {
        let set = heavy_tail_family(5).unwrap();
        assert_eq!(set.len(), 5);
        for m in set.extremes() {
            assert_abs_diff_eq!(m.mean(), 0.0, epsilon = 1e-15);
            assert_abs_diff_eq!(m.second_moment(), 1.0, epsilon = 1e-12);
        }
        // k = 1 degenerates to the symmetric two-point measure.
        assert_eq!(set.extremes()[0].atoms(), &[(-1.0, 0.5), (1.0, 0.5)]);
        assert!(heavy_tail_family(0).is_err());
    }

    #[test]
    fn heavy_tail_classical_comparison_value() {
        let report = heavy_tail_experiment(1, &[4]).unwrap();
        let closed_form = 1.0 - (2.0 / std::f64::consts::PI).sqrt();
        assert_abs_diff_eq!(report.classical_value, closed_form, epsilon = 1e-12);
    }

    #[test]
    fn heavy_tail_values_increase_with_truncation() {
        let n = [8usize];
        let v10 = heavy_tail_experiment(10, &n).unwrap().rows[0].dp_value;
        let v50 = heavy_tail_experiment(50, &n).unwrap().rows[0].dp_value;
        let v200 = heavy_tail_experiment(200, &n).unwrap().rows[0].dp_value;
        assert!(v10 <= v50 && v50 <= v200, "{v10} {v50} {v200}");
        assert!(v200 > heavy_tail_experiment(200, &n).unwrap().classical_value);
    }

    #[test]
    fn heavy_tail_single_member_matches_convolution_oracle() {
        // k_max = 1 is one classical symmetric two-point measure; the DP
        // must equal the exact n-fold convolution value.
        let phi = |x: f64| 1.0 - x.abs();
        for n in [2usize, 6, 11] {
            let report = heavy_tail_experiment(1, &[n]).unwrap();
            // Convolution oracle: S_n is a sum of n independent signs.
            let mut dist = vec![(0i64, 1.0f64)];
            for _ in 0..n {
                let mut next = std::collections::BTreeMap::new();
                for &(s, p) in &dist {
                    *next.entry(s + 1).or_insert(0.0) += 0.5 * p;
                    *next.entry(s - 1).or_insert(0.0) += 0.5 * p;
                }
                dist = next.into_iter().collect();
            }
            let oracle: f64 = dist
                .iter()
                .map(|&(s, p)| p * phi(s as f64 / (n as f64).sqrt()))
                .sum();
            assert_abs_diff_eq!(report.rows[0].dp_value, oracle, epsilon = 1e-12);
        }
    }

    #[test]
    fn clt_converge_singleton_approaches_classical_value() {
        let base = fair_coin_singleton();
        let phi = |x: f64| 1.0 - x.abs().min(1.0);
        let rows = clt_converge(&base, phi, &[16, 128], 1, 0.01).unwrap();
        let quad = normal_expect(phi, 0.0, 0.25, &[-1.0, 0.0, 1.0]).unwrap();
        assert_abs_diff_eq!(rows[0].limit_value, quad, epsilon = 5e-3);
        assert!(rows[1].abs_error <= rows[0].abs_error + 5e-3);
        assert!(rows[1].abs_error < 0.03);
    }

    #[test]
    fn rows_are_sorted_by_horizon() {
        let rows = lln_converge(&fair_coin_singleton(), |x| x, 1.0, &[16, 4, 8]).unwrap();
        let ns: Vec<usize> = rows.iter().map(|r| r.n).collect();
        assert_eq!(ns, vec![4, 8, 16]);
    }
}
