//! The executable acceptance suite: every release gate as a callable,
//! deterministic criterion with a pinned tolerance and runtime budget.
//! Shared between the `acceptance` integration-test target and the CLI's
//! `selftest` command. Randomized suites use fixed seeds, so reruns are
//! bit-reproducible.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::gheat::{
    capacity_interval_with, cfl_steps, g_expect, outer_ramp, solve_g_heat, tree_g_expect, GHeatParams, GMethod,
    ThetaInterval, TreeParams,
};
use crate::harness::{d_theta, fair_coin_singleton, heavy_tail_experiment, two_point_hull};
use crate::kernel::{
    brute_force_sup, centered_sum_sup, conditional_range_check, conditional_variance_check, sup_expect_history,
    sup_expect_sum, CenteredGrid, HorizonModel, MixtureGrid, MAX_BRUTE_STRATEGIES,
};
use crate::measure::{DiscreteMeasure, MeasureSet};
use crate::quadrature::{normal_expect, normal_interval_probability};

/// Result of one acceptance criterion.
#[derive(Debug, Clone)]
pub struct CriterionOutcome {
    pub index: usize,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub runtime_ms: u64,
}

impl CriterionOutcome {
    /// The one-line pass/fail report.
    pub fn line(&self) -> String {
        format!(
            "criterion {:2} ({}): {} [{} ms] {}",
            self.index,
            self.name,
            if self.passed { "PASS" } else { "FAIL" },
            self.runtime_ms,
            self.detail
        )
    }
}

pub const CRITERION_COUNT: usize = 10;

const NAMES_AND_BUDGETS: [(&str, u64); CRITERION_COUNT] = [
    ("variance duality", 60),
    ("dp vs brute-force oracle", 30),
    ("conditional sandwich invariants", 60),
    ("lln convergence", 60),
    ("clt classical reduction", 120),
    ("clt under mean uncertainty", 600),
    ("limit solver cross-oracle", 120),
    ("capacity bracket", 60),
    ("heavy-tail clt failure", 120),
    ("monte carlo lower bound", 120),
];

/// Runs one criterion (1-based index) and reports pass/fail with detail.
/// Exceeding the runtime budget fails the criterion.
pub fn run_criterion(index: usize) -> CriterionOutcome {
    let (name, budget_secs) = NAMES_AND_BUDGETS[index - 1];
    let body: fn() -> Result<(bool, String)> = match index {
        1 => variance_duality,
        2 => dp_oracle_equivalence,
        3 => sandwich_invariants,
        4 => lln_convergence,
        5 => clt_classical,
        6 => clt_mean_uncertainty,
        7 => limit_solver_cross_oracle,
        8 => capacity_bracket,
        9 => heavy_tail_clt_failure,
        10 => mc_lower_bound,
        _ => panic!("criterion index {index} out of range"),
    };
    let start = Instant::now();
    let outcome = body();
    let runtime = start.elapsed();
    let (mut passed, mut detail) = match outcome {
        Ok(pair) => pair,
        Err(e) => (false, format!("error: {e}")),
    };
    if runtime.as_secs_f64() > budget_secs as f64 {
        passed = false;
        detail = format!("{detail}; runtime {:.1}s over {budget_secs}s budget", runtime.as_secs_f64());
    }
    CriterionOutcome {
        index,
        name,
        passed,
        detail,
        runtime_ms: runtime.as_millis() as u64,
    }
}

/// Runs the whole suite in order.
pub fn run_all() -> Vec<CriterionOutcome> {
    (1..=CRITERION_COUNT).map(run_criterion).collect()
}

// ---------------------------------------------------------------------------
// Randomized-input helpers (deterministic via fixed seeds)
// ---------------------------------------------------------------------------

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn unit_from_hash(h: u64) -> f64 {
    (h >> 11) as f64 / (1u64 << 53) as f64
}

/// Random measure with up to `max_support` atoms on the grid of multiples of
/// `1/denominator` in [-2, 2]. Grid-valued points keep the exact-sum DP states
/// small.
pub fn random_measure(rng: &mut ChaCha8Rng, max_support: usize, denominator: i64) -> DiscreteMeasure {
    let support = rng.gen_range(1..=max_support);
    let limit = 2 * denominator;
    let mut points = std::collections::BTreeSet::new();
    while points.len() < support {
        points.insert(rng.gen_range(-limit..=limit));
    }
    let weights: Vec<f64> = (0..support).map(|_| rng.gen_range(0.05..1.0)).collect();
    let total: f64 = weights.iter().sum();
    DiscreteMeasure::new(
        points
            .iter()
            .zip(&weights)
            .map(|(&p, &w)| (p as f64 / denominator as f64, w / total)),
    )
    .expect("generated atoms are valid")
}

pub fn random_set(rng: &mut ChaCha8Rng, max_extremes: usize, max_support: usize, denominator: i64) -> MeasureSet {
    let k = rng.gen_range(1..=max_extremes);
    MeasureSet::new((0..k).map(|_| random_measure(rng, max_support, denominator)).collect()).expect("nonempty")
}

/// Pure history-dependent mixture strategy derived from a hash of
/// (seed, step, history bits).
fn hashed_strategy(seed: u64, extremes: usize) -> impl Fn(usize, &[f64]) -> Vec<f64> {
    move |step, history| {
        let mut h = splitmix64(seed ^ (step as u64).wrapping_mul(0x9E37_79B9));
        for &x in history {
            h = splitmix64(h ^ x.to_bits());
        }
        let mut weights = Vec::with_capacity(extremes);
        let mut total = 0.0;
        for _ in 0..extremes {
            h = splitmix64(h);
            let u = unit_from_hash(h) + 1e-3;
            weights.push(u);
            total += u;
        }
        for w in &mut weights {
            *w /= total;
        }
        weights
    }
}

// ---------------------------------------------------------------------------
// Criteria
// ---------------------------------------------------------------------------

/// 200 randomized sets: the dual upper variance dominates the grid oracle
/// within 1e-9, the gap closes to 5e-3 at grid 0.01, and the lower variance
/// matches vertex enumeration to 1e-12.
fn variance_duality() -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst_gap: f64 = 0.0;
    let mut worst_lower: f64 = 0.0;
    for case in 0..200 {
        let set = random_set(&mut rng, 4, 5, 16);
        let vb = set.variance_bounds();
        let (est_max, est_min) = set.variance_oracle(0.01)?;
        if vb.upper < est_max - 1e-9 {
            return Ok((false, format!("case {case}: dual upper {} below grid {est_max}", vb.upper)));
        }
        let gap = vb.upper - est_max;
        worst_gap = worst_gap.max(gap);
        if gap > 5e-3 {
            return Ok((false, format!("case {case}: duality gap {gap} above 5e-3")));
        }
        let vertex_min = set
            .extremes()
            .iter()
            .map(|m| m.variance())
            .fold(f64::INFINITY, f64::min);
        let lower_err = (vb.lower - vertex_min).abs().max((vb.lower - est_min).abs());
        worst_lower = worst_lower.max(lower_err);
        if lower_err > 1e-12 {
            return Ok((false, format!("case {case}: lower variance off by {lower_err}")));
        }
    }
    Ok((true, format!("200 sets: max duality gap {worst_gap:.2e}, max lower-variance error {worst_lower:.2e}")))
}

/// 100 randomized small models: backward induction equals the enumerated
/// strategy maximum to 1e-12.
fn dp_oracle_equivalence() -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let mut worst: f64 = 0.0;
    let mut cases = 0usize;
    while cases < 100 {
        let set = random_set(&mut rng, 3, 3, 4);
        let n = rng.gen_range(1..=3usize);
        let b = set.union_support().len() as u128;
        let nodes: u128 = (0..n).map(|i| b.pow(i as u32)).sum();
        let strategies = (set.len() as u128).checked_pow(nodes as u32).unwrap_or(u128::MAX);
        let cost = strategies.saturating_mul(b.pow(n as u32));
        if strategies > MAX_BRUTE_STRATEGIES || cost > 300_000 {
            continue;
        }
        cases += 1;
        let model = HorizonModel::new(set, n)?;
        let a = rng.gen_range(-1.0..1.0);
        let b2 = rng.gen_range(-1.0..1.0);
        let c = rng.gen_range(-0.5..0.5);
        let phi = move |x: &[f64]| {
            let s: f64 = x.iter().sum();
            let q: f64 = x.iter().map(|v| v * v).sum();
            (s - a).abs() + b2 * q + c * x.iter().product::<f64>()
        };
        let dp = sup_expect_history(&model, phi)?;
        let brute = brute_force_sup(&model, phi)?;
        worst = worst.max((dp - brute).abs());
        if worst > 1e-12 {
            return Ok((false, format!("case {cases}: |dp - brute| = {worst}")));
        }
    }
    Ok((true, format!("100 models: max |dp - brute| = {worst:.2e}")))
}

/// 1000 randomized strategies over randomized models: the conditional mean
/// stays in the lower/upper expectation interval and the conditional variance
/// in the variance interval, with empty violation lists.
fn sandwich_invariants() -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let mut nodes = 0usize;
    for case in 0..200 {
        let set = random_set(&mut rng, 3, 3, 8);
        let n = rng.gen_range(2..=4usize);
        let model = HorizonModel::new(set, n)?;
        let kink = rng.gen_range(-1.0..1.0);
        let quad = rng.gen_range(-1.0..1.0);
        let phi = move |x: f64| (x - kink).abs() + quad * x * x;
        for rep in 0..5 {
            let strategy = hashed_strategy(splitmix64(case as u64 * 31 + rep as u64), model.base().len());
            let range = conditional_range_check(&model, &strategy, phi)?;
            if !range.is_clean() {
                let v = &range.violations[0];
                return Ok((false, format!("range violation at step {} history {:?}: {} outside [{}, {}]", v.step, v.history, v.value, v.lower, v.upper)));
            }
            let var = conditional_variance_check(&model, &strategy)?;
            if !var.is_clean() {
                let v = &var.violations[0];
                return Ok((false, format!("variance violation at step {} history {:?}: {} outside [{}, {}]", v.step, v.history, v.value, v.lower, v.upper)));
            }
            nodes += range.nodes_checked + var.nodes_checked;
        }
    }
    Ok((true, format!("1000 strategies, {nodes} nodes checked, no violations")))
}

/// Two-point hull with the distance-to-mean-interval payoff at the law of
/// large numbers scale: value at n = 200 at most 0.05 and strictly below the
/// value at n = 10.
///
/// Note that every realized coordinate lies in [0, 1], so the scaled sum
/// never leaves the mean interval and both values are exactly zero; the
/// strict-decrease clause is checked as stated and reported honestly.
fn lln_convergence() -> Result<(bool, String)> {
    let base = two_point_hull();
    let value_at = |n: usize| -> Result<f64> {
        let model = HorizonModel::new(base.clone(), n)?;
        sup_expect_sum(&model, |s| d_theta(s, 0.0, 1.0), 1.0 / n as f64)
    };
    let v10 = value_at(10)?;
    let v200 = value_at(200)?;
    let passed = v200 <= 0.05 && v200 < v10;
    Ok((
        passed,
        format!("dp(10) = {v10}, dp(200) = {v200}; need dp(200) <= 0.05 and dp(200) < dp(10)"),
    ))
}

/// Classical reduction: singleton fair coin at n = 512 against Gauss
/// quadrature of the normal limit with variance 1/4, within 0.01.
fn clt_classical() -> Result<(bool, String)> {
    let phi = |x: f64| 1.0 - x.abs().min(1.0);
    let model = HorizonModel::new(fair_coin_singleton(), 512)?;
    let dp = centered_sum_sup(
        &model,
        phi,
        &MixtureGrid::new(1)?,
        &CenteredGrid {
            radius: 2.4,
            step: 0.01,
        },
    )?;
    let quad = normal_expect(phi, 0.0, 0.25, &[-1.0, 0.0, 1.0])?;
    let err = (dp - quad).abs();
    Ok((err <= 0.01, format!("dp = {dp:.6}, quadrature = {quad:.6}, |err| = {err:.2e} (tol 0.01)")))
}

/// Mean-uncertain central limit behavior: two-point hull at n = 512 against
/// the limit solver, within 0.02, with the DP nondecreasing in the mixture
/// resolution.
fn clt_mean_uncertainty() -> Result<(bool, String)> {
    let phi = |x: f64| 1.0 - x.abs().min(1.0);
    let base = two_point_hull();
    let model = HorizonModel::new(base.clone(), 512)?;
    let grid = CenteredGrid {
        radius: 2.4,
        step: 0.01,
    };
    let dp10 = centered_sum_sup(&model, phi, &MixtureGrid::new(10)?, &grid)?;
    let dp50 = centered_sum_sup(&model, phi, &MixtureGrid::new(50)?, &grid)?;
    let dp100 = centered_sum_sup(&model, phi, &MixtureGrid::new(100)?, &grid)?;
    let vb = base.variance_bounds();
    let pde = g_expect(phi, ThetaInterval::new(vb.lower, vb.upper)?, GMethod::Pde)?.value;
    let err = (dp100 - pde).abs();
    let monotone = dp10 <= dp50 && dp50 <= dp100;
    Ok((
        err <= 0.02 && monotone,
        format!("dp(M=10,50,100) = ({dp10:.6}, {dp50:.6}, {dp100:.6}), pde = {pde:.6}, |err| = {err:.2e} (tol 0.02), monotone in M: {monotone}"),
    ))
}

/// The two limit solvers agree within 0.01 across a payoff battery and three
/// variance intervals.
fn limit_solver_cross_oracle() -> Result<(bool, String)> {
    let thetas = [
        ThetaInterval::degenerate(0.25)?,
        ThetaInterval::new(0.0, 0.25)?,
        ThetaInterval::new(1.0, 4.0)?,
    ];
    let ramp = outer_ramp(-1.0, 1.0, 0.1);
    let payoffs: [(&str, &(dyn Fn(f64) -> f64 + Sync)); 3] = [
        ("x^2", &|x: f64| x * x),
        ("cap", &|x: f64| 1.0 - x.abs().min(1.0)),
        ("ramp", &ramp),
    ];
    let mut worst: f64 = 0.0;
    let mut report = String::new();
    for theta in thetas {
        for (name, phi) in payoffs {
            let pde = solve_g_heat(&GHeatParams::with_defaults(theta), phi)?.value_at_origin;
            let tree = tree_g_expect(&TreeParams::with_defaults(theta), phi)?;
            let diff = (pde - tree).abs();
            worst = worst.max(diff);
            if diff > 0.01 {
                return Ok((
                    false,
                    format!(
                        "theta = [{}, {}], payoff {name}: pde {pde:.6} vs tree {tree:.6}, diff {diff:.2e}",
                        theta.sigma2_low(),
                        theta.sigma2_high()
                    ),
                ));
            }
        }
    }
    report.push_str(&format!("9 combinations, max |pde - tree| = {worst:.2e} (tol 0.01)"));
    Ok((true, report))
}

/// Capacity squeeze around the two-sigma interval of the classical limit:
/// the epsilon = 0.01 bracket contains the quadrature value with width at
/// most 0.02, and the edges move monotonically in epsilon on a shared
/// discretization.
fn capacity_bracket() -> Result<(bool, String)> {
    let theta = ThetaInterval::degenerate(0.25)?;
    let truth = normal_interval_probability(0.0, 0.25, -1.0, 1.0)?;
    // One discretization for all epsilons, fine enough for the sharpest
    // ramp, so the monotone scheme makes the edges comparable across runs.
    let base = GHeatParams::with_defaults(theta);
    let h = base.h.min(0.01 / 6.0);
    let params = GHeatParams {
        theta,
        x_radius: base.x_radius,
        h,
        time_steps: cfl_steps(theta.sigma2_high(), h),
    };
    let br10 = capacity_interval_with(&params, -1.0, 1.0, 0.1)?;
    let br05 = capacity_interval_with(&params, -1.0, 1.0, 0.05)?;
    let br01 = capacity_interval_with(&params, -1.0, 1.0, 0.01)?;
    let contains = br01.contains(truth);
    let width_ok = br01.width() <= 0.02;
    let lower_monotone = br01.lower >= br05.lower && br05.lower >= br10.lower;
    let upper_monotone = br01.upper <= br05.upper && br05.upper <= br10.upper;
    Ok((
        contains && width_ok && lower_monotone && upper_monotone,
        format!(
            "bracket(0.01) = [{:.6}, {:.6}] vs truth {truth:.6}, width {:.4}; lower/upper monotone in eps: {lower_monotone}/{upper_monotone}",
            br01.lower,
            br01.upper,
            br01.width()
        ),
    ))
}

/// Heavy-tail family at n = 16: values increase with the truncation level,
/// exceed 0.9 at K = 1000, and sit far above the classical normal value.
fn heavy_tail_clt_failure() -> Result<(bool, String)> {
    let n = [16usize];
    let v10 = heavy_tail_experiment(10, &n)?.rows[0].dp_value;
    let v100 = heavy_tail_experiment(100, &n)?.rows[0].dp_value;
    let report = heavy_tail_experiment(1000, &n)?;
    let v1000 = report.rows[0].dp_value;
    let classical = report.classical_value;
    let passed = v1000 >= v100 && v100 >= v10 && v1000 >= 0.9 && v1000 > classical;
    Ok((
        passed,
        format!("values (K=10,100,1000) = ({v10:.4}, {v100:.4}, {v1000:.4}), classical = {classical:.4}"),
    ))
}

/// Five randomized admissible controls: each Monte Carlo estimate minus
/// three standard errors stays below the solver value for the terminal
/// square payoff.
fn mc_lower_bound() -> Result<(bool, String)> {
    let theta = ThetaInterval::new(0.25, 1.0)?;
    let pde = solve_g_heat(&GHeatParams::with_defaults(theta), |x| x * x)?.value_at_origin;
    let (sig_lo, sig_hi) = (theta.sigma2_low().sqrt(), theta.sigma2_high().sqrt());
    let mut rng = ChaCha8Rng::seed_from_u64(1010);
    let mut detail = format!("pde = {pde:.6};");
    for case in 0..5u64 {
        let salt: u64 = rng.gen();
        let control = move |step: usize, path: &[f64]| {
            let mut h = splitmix64(salt ^ (step as u64));
            if let Some(&last) = path.last() {
                h = splitmix64(h ^ last.to_bits());
            }
            sig_lo + (sig_hi - sig_lo) * unit_from_hash(h)
        };
        let est = crate::mc::control_mc_lower_bound(
            |p: &crate::path::EmbeddedPath| {
                let t = p.terminal();
                t * t
            },
            theta,
            &control,
            64,
            100_000,
            900 + case,
        )?;
        detail.push_str(&format!(" control {case}: {:.4} +- {:.4};", est.estimate, est.std_error));
        if est.estimate - 3.0 * est.std_error > pde {
            return Ok((false, format!("{detail} lower bound exceeded the solver value")));
        }
    }
    Ok((true, detail))
}
