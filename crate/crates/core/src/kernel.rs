//! Finite-horizon adversarial dynamic programming over kernel-constructed
//! joint laws.
//!
//! A [`HorizonModel`] fixes one uncertainty set for every coordinate; a
//! [`KernelStrategy`] picks a mixture of the extremes at each (step, history)
//! node, which determines one joint law at the horizon. Sup-expectations over
//! all strategies are computed by backward induction. For payoffs of the
//! history the one-step value is linear in the kernel's mixture weights, so
//! extremes suffice and the induction is exact. For centered sums the
//! centering makes the one-step value nonlinear in the kernel, so the sup is
//! approximated from below over a mixture grid that always contains the
//! vertices.

use crate::error::{Error, Result};
use crate::grid::{lerp_clamped, map_indices};
use crate::measure::{composition_count, for_each_composition, DiscreteMeasure, MeasureSet, VarianceBounds};

/// Largest history tree that the exact tree walks will expand.
pub const MAX_TREE_LEAVES: u128 = 10_000_000;

/// Largest number of reachable partial-sum states for the sum DP.
pub const MAX_SUM_STATES: u128 = 10_000_000;

/// Largest strategy enumeration for the brute-force oracle.
pub const MAX_BRUTE_STRATEGIES: u128 = 2_000_000;

const MAX_MIXTURE_GRID: u128 = 1_000_000;

/// Tolerance for the conditional sandwich checks.
pub const SANDWICH_TOL: f64 = 1e-12;

/// An i.i.d.-with-uncertainty model at a finite horizon: the same base set
/// constrains every coordinate, and histories are sequences of realized
/// support points.
#[derive(Debug, Clone)]
pub struct HorizonModel {
    base: MeasureSet,
    horizon: usize,
}

impl HorizonModel {
    pub fn new(base: MeasureSet, horizon: usize) -> Result<Self> {
        if horizon == 0 {
            return Err(Error::InvalidParameter("horizon must be at least 1".into()));
        }
        Ok(HorizonModel { base, horizon })
    }

    pub fn base(&self) -> &MeasureSet {
        &self.base
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }
}

/// History-dependent choice of a kernel inside the hull: mixture weights
/// over the base extremes for every (1-based step, realized history).
pub trait KernelStrategy {
    fn choose(&self, step: usize, history: &[f64]) -> Result<Vec<f64>>;
}

impl<F> KernelStrategy for F
where
    F: Fn(usize, &[f64]) -> Vec<f64>,
{
    fn choose(&self, step: usize, history: &[f64]) -> Result<Vec<f64>> {
        Ok(self(step, history))
    }
}

/// Plays the same mixture at every node.
#[derive(Debug, Clone)]
pub struct ConstantStrategy(pub Vec<f64>);

impl KernelStrategy for ConstantStrategy {
    fn choose(&self, _step: usize, _history: &[f64]) -> Result<Vec<f64>> {
        Ok(self.0.clone())
    }
}

/// The finite mixture-weight search set inside the hull: all weightings over
/// the extremes with coordinates in `{0, 1/M, ..., 1}`. Contains every vertex.
#[derive(Debug, Clone, Copy)]
pub struct MixtureGrid {
    resolution: usize,
}

impl MixtureGrid {
    pub fn new(resolution: usize) -> Result<Self> {
        if resolution == 0 {
            return Err(Error::InvalidParameter("mixture grid resolution must be at least 1".into()));
        }
        Ok(MixtureGrid { resolution })
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    /// All grid weight vectors over `extremes` coordinates.
    pub fn weights(&self, extremes: usize) -> Result<Vec<Vec<f64>>> {
        let count = composition_count(self.resolution, extremes);
        if count > MAX_MIXTURE_GRID {
            return Err(Error::GuardViolation(format!(
                "mixture grid would hold {count} points (limit {MAX_MIXTURE_GRID})"
            )));
        }
        let scale = self.resolution as f64;
        let mut out = Vec::with_capacity(count as usize);
        for_each_composition(self.resolution, extremes, |c| {
            out.push(c.iter().map(|&v| v as f64 / scale).collect());
        });
        Ok(out)
    }
}

/// Per-extreme atoms resolved against the sorted union support:
/// `(union index, weight)` pairs.
fn extreme_atom_indices(set: &MeasureSet, support: &[f64]) -> Vec<Vec<(usize, f64)>> {
    set.extremes()
        .iter()
        .map(|m| {
            m.atoms()
                .iter()
                .map(|&(p, w)| {
                    let idx = support
                        .binary_search_by(|probe| probe.total_cmp(&p))
                        .expect("extreme support is a subset of the union support");
                    (idx, w)
                })
                .collect()
        })
        .collect()
}

fn tree_leaves_guard(branching: usize, horizon: usize) -> Result<()> {
    let leaves = (branching as u128)
        .checked_pow(horizon as u32)
        .unwrap_or(u128::MAX);
    if leaves > MAX_TREE_LEAVES {
        return Err(Error::GuardViolation(format!(
            "history tree with {branching}^{horizon} leaves exceeds {MAX_TREE_LEAVES}"
        )));
    }
    Ok(())
}

/// Iterated-kernel integral of `phi(x_1, .., x_n)` under the law induced by
/// `strategy`: the exact sum over the finite history tree, weights multiplied
/// along branches. The unconditional first-step measure is the strategy's
/// step-1 choice.
pub fn joint_expect<F, S>(model: &HorizonModel, strategy: &S, phi: F) -> Result<f64>
where
    F: Fn(&[f64]) -> f64,
    S: KernelStrategy + ?Sized,
{
    let support = model.base().union_support();
    tree_leaves_guard(support.len(), model.horizon())?;
    let atoms = extreme_atom_indices(model.base(), &support);
    let mut history = Vec::with_capacity(model.horizon());
    joint_expect_rec(model, strategy, &phi, &support, &atoms, &mut history)
}

fn joint_expect_rec<F, S>(
    model: &HorizonModel,
    strategy: &S,
    phi: &F,
    support: &[f64],
    atoms: &[Vec<(usize, f64)>],
    history: &mut Vec<f64>,
) -> Result<f64>
where
    F: Fn(&[f64]) -> f64,
    S: KernelStrategy + ?Sized,
{
    if history.len() == model.horizon() {
        let v = phi(history);
        if !v.is_finite() {
            return Err(Error::NonFinite(format!("payoff {v} at reachable history {history:?}")));
        }
        return Ok(v);
    }
    let step = history.len() + 1;
    let weights = strategy.choose(step, history)?;
    model.base().check_weights(&weights)?;
    // Kernel mass at each union-support point under the chosen mixture.
    let mut kernel = vec![0.0; support.len()];
    for (lambda, list) in weights.iter().zip(atoms) {
        for &(idx, w) in list {
            kernel[idx] += lambda * w;
        }
    }
    let mut acc = 0.0;
    for (idx, &x) in support.iter().enumerate() {
        if kernel[idx] == 0.0 {
            continue;
        }
        history.push(x);
        let child = joint_expect_rec(model, strategy, phi, support, atoms, history)?;
        history.pop();
        acc += kernel[idx] * child;
    }
    Ok(acc)
}

/// Exact sup over all strategies of `E[phi(X_1, .., X_n)]`, by backward
/// induction on the full history tree. At each node the one-step value is
/// linear in the kernel's mixture weights, so the max over extremes equals
/// the max over the hull.
pub fn sup_expect_history<F>(model: &HorizonModel, phi: F) -> Result<f64>
where
    F: Fn(&[f64]) -> f64,
{
    let support = model.base().union_support();
    tree_leaves_guard(support.len(), model.horizon())?;
    let atoms = extreme_atom_indices(model.base(), &support);
    let mut history = Vec::with_capacity(model.horizon());
    sup_history_rec(model.horizon(), &phi, &support, &atoms, &mut history)
}

fn sup_history_rec<F>(
    horizon: usize,
    phi: &F,
    support: &[f64],
    atoms: &[Vec<(usize, f64)>],
    history: &mut Vec<f64>,
) -> Result<f64>
where
    F: Fn(&[f64]) -> f64,
{
    if history.len() == horizon {
        let v = phi(history);
        if !v.is_finite() {
            return Err(Error::NonFinite(format!("payoff {v} at reachable history {history:?}")));
        }
        return Ok(v);
    }
    let mut child = Vec::with_capacity(support.len());
    for &x in support {
        history.push(x);
        child.push(sup_history_rec(horizon, phi, support, atoms, history)?);
        history.pop();
    }
    let mut best = f64::NEG_INFINITY;
    for list in atoms {
        let value: f64 = list.iter().map(|&(idx, w)| w * child[idx]).sum();
        if value > best {
            best = value;
        }
    }
    Ok(best)
}

/// Independent oracle for [`sup_expect_history`]: enumerates every
/// history-dependent assignment of extreme measures to tree nodes and takes
/// the max of [`joint_expect`] over them. No backward induction is involved.
pub fn brute_force_sup<F>(model: &HorizonModel, phi: F) -> Result<f64>
where
    F: Fn(&[f64]) -> f64,
{
    let n = model.horizon();
    if n > 3 {
        return Err(Error::GuardViolation(format!("brute force limited to horizon 3, got {n}")));
    }
    let support = model.base().union_support();
    let b = support.len();
    let k = model.base().len();
    // Decision nodes: all histories of length < n.
    let mut level_offset = vec![0usize; n + 1];
    for i in 0..n {
        level_offset[i + 1] = level_offset[i] + b.pow(i as u32);
    }
    let node_count = level_offset[n];
    let strategies = (k as u128).checked_pow(node_count as u32).unwrap_or(u128::MAX);
    if strategies > MAX_BRUTE_STRATEGIES {
        return Err(Error::GuardViolation(format!(
            "{k}^{node_count} = {strategies} strategies exceed {MAX_BRUTE_STRATEGIES}"
        )));
    }
    let node_index = |step: usize, history: &[f64]| -> usize {
        let mut pos = 0usize;
        for &x in history {
            let digit = support
                .binary_search_by(|probe| probe.total_cmp(&x))
                .expect("history points come from the union support");
            pos = pos * b + digit;
        }
        level_offset[step - 1] + pos
    };
    let mut assignment = vec![0usize; node_count];
    let mut best = f64::NEG_INFINITY;
    loop {
        let strategy = |step: usize, history: &[f64]| -> Vec<f64> {
            let mut w = vec![0.0; k];
            w[assignment[node_index(step, history)]] = 1.0;
            w
        };
        let value = joint_expect(model, &strategy, &phi)?;
        if value > best {
            best = value;
        }
        // Odometer over assignments, base k.
        let mut carry = 0;
        while carry < node_count {
            assignment[carry] += 1;
            if assignment[carry] < k {
                break;
            }
            assignment[carry] = 0;
            carry += 1;
        }
        if carry == node_count {
            break;
        }
    }
    Ok(best)
}

// ---------------------------------------------------------------------------
// Exact partial-sum DP
// ---------------------------------------------------------------------------

/// Support points as exact integers over a common power-of-two denominator.
struct ExactScale {
    numerators: Vec<i128>,
    /// Sum value = numerator * 2^-shift.
    shift: i32,
}

fn decompose_pow2(x: f64) -> Option<(i128, i32)> {
    if x == 0.0 {
        return Some((0, 0));
    }
    if !x.is_finite() {
        return None;
    }
    let bits = x.to_bits();
    let sign: i128 = if bits >> 63 == 1 { -1 } else { 1 };
    let biased = ((bits >> 52) & 0x7ff) as i32;
    let frac = (bits & ((1u64 << 52) - 1)) as i128;
    let (mut mantissa, mut exp) = if biased == 0 {
        (frac, -1074)
    } else {
        (frac | (1i128 << 52), biased - 1075)
    };
    let tz = mantissa.trailing_zeros() as i32;
    mantissa >>= tz;
    exp += tz;
    Some((sign * mantissa, exp))
}

fn exact_scale(points: &[f64]) -> Result<ExactScale> {
    let mut decomposed = Vec::with_capacity(points.len());
    let mut shift = 0i32;
    for &p in points {
        let (m, e) = decompose_pow2(p).ok_or_else(|| {
            Error::GuardViolation(format!("support point {p} is not exactly representable"))
        })?;
        decomposed.push((m, e));
        if e < 0 {
            shift = shift.max(-e);
        }
    }
    let mut numerators = Vec::with_capacity(points.len());
    for (m, e) in decomposed {
        let up = e + shift;
        if up > 70 {
            return Err(Error::GuardViolation(
                "support points span too many binary orders of magnitude for exact sums".into(),
            ));
        }
        numerators.push(m << up);
    }
    Ok(ExactScale { numerators, shift })
}

const DENSE_SPAN_LIMIT: i128 = 2_000_000;

/// Exact sup over all strategies of `E[phi(scaling * S_n)]` where `S_n` is
/// the uncentered coordinate sum.
///
/// The DP state is the exact partial sum: support points are rewritten as
/// integers over a common power-of-two denominator, so state keys never
/// drift. Dense tables are used when the integer span is small, otherwise
/// per-step sorted state sets with a total-count guard.
pub fn sup_expect_sum<F>(model: &HorizonModel, phi: F, scaling: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if !scaling.is_finite() {
        return Err(Error::InvalidParameter(format!("scaling {scaling} must be finite")));
    }
    let n = model.horizon();
    let support = model.base().union_support();
    let scale = exact_scale(&support)?;
    let atoms = extreme_atom_indices(model.base(), &support);
    let unit = 2f64.powi(-scale.shift);
    let eval = |state: i128| -> f64 { phi(scaling * (state as f64 * unit)) };

    let min_num = *scale.numerators.iter().min().expect("nonempty support");
    let max_num = *scale.numerators.iter().max().expect("nonempty support");
    let dense_extent = (n as i128)
        .checked_mul(min_num.min(0))
        .zip((n as i128).checked_mul(max_num.max(0)))
        .and_then(|(lo, hi)| hi.checked_sub(lo).map(|span| (lo, span)))
        .filter(|&(_, span)| span <= DENSE_SPAN_LIMIT && (n as u128 + 1) * (span as u128 + 1) <= 100_000_000);
    let value = match dense_extent {
        Some((lo_total, span)) => sum_dp_dense(n, &scale.numerators, &atoms, lo_total, span as usize, &eval),
        None => sum_dp_sparse(n, &scale.numerators, &atoms, &eval)?,
    };
    if !value.is_finite() {
        return Err(Error::NonFinite(format!("sum DP produced {value}")));
    }
    Ok(value)
}

fn sum_dp_dense(
    n: usize,
    numerators: &[i128],
    atoms: &[Vec<(usize, f64)>],
    lo_total: i128,
    span: usize,
    eval: &dyn Fn(i128) -> f64,
) -> f64 {
    let offset = -lo_total;
    let cells = span + 1;
    // Forward reachability, so unreachable cells are never evaluated.
    let mut reach_per_step: Vec<Vec<bool>> = Vec::with_capacity(n + 1);
    let mut seed = vec![false; cells];
    seed[offset as usize] = true;
    reach_per_step.push(seed);
    for _ in 0..n {
        let prev = reach_per_step.last().expect("seeded above");
        let mut next = vec![false; cells];
        for (cell, flag) in prev.iter().enumerate() {
            if *flag {
                for &num in numerators {
                    next[(cell as i128 + num) as usize] = true;
                }
            }
        }
        reach_per_step.push(next);
    }
    let mut values = vec![0.0f64; cells];
    for (cell, flag) in reach_per_step[n].iter().enumerate() {
        if *flag {
            values[cell] = eval(cell as i128 - offset);
        }
    }
    for step in (0..n).rev() {
        let mut next = vec![0.0f64; cells];
        for (cell, flag) in reach_per_step[step].iter().enumerate() {
            if !*flag {
                continue;
            }
            let mut best = f64::NEG_INFINITY;
            for list in atoms {
                let mut acc = 0.0;
                for &(idx, w) in list {
                    acc += w * values[(cell as i128 + numerators[idx]) as usize];
                }
                if acc > best {
                    best = acc;
                }
            }
            next[cell] = best;
        }
        values = next;
    }
    values[offset as usize]
}

fn sum_dp_sparse(
    n: usize,
    numerators: &[i128],
    atoms: &[Vec<(usize, f64)>],
    eval: &dyn Fn(i128) -> f64,
) -> Result<f64> {
    let mut layers: Vec<Vec<i128>> = Vec::with_capacity(n + 1);
    layers.push(vec![0]);
    let mut total: u128 = 1;
    for _ in 0..n {
        let prev = layers.last().expect("seeded with the origin layer");
        let mut next: Vec<i128> = Vec::with_capacity(prev.len() * numerators.len());
        for &s in prev {
            for &num in numerators {
                next.push(
                    s.checked_add(num)
                        .ok_or_else(|| Error::GuardViolation("partial sum overflowed the exact state".into()))?,
                );
            }
        }
        next.sort_unstable();
        next.dedup();
        total += next.len() as u128;
        if total > MAX_SUM_STATES {
            return Err(Error::GuardViolation(format!(
                "reachable partial-sum states exceed {MAX_SUM_STATES}"
            )));
        }
        layers.push(next);
    }
    let mut values: Vec<f64> = layers[n].iter().map(|&s| eval(s)).collect();
    for step in (0..n).rev() {
        let next_layer = &layers[step + 1];
        values = layers[step]
            .iter()
            .map(|&s| {
                let mut best = f64::NEG_INFINITY;
                for list in atoms {
                    let mut acc = 0.0;
                    for &(idx, w) in list {
                        let key = s + numerators[idx];
                        let pos = next_layer.binary_search(&key).expect("forward-closed layers");
                        acc += w * values[pos];
                    }
                    if acc > best {
                        best = acc;
                    }
                }
                best
            })
            .collect();
    }
    Ok(values[0])
}

// ---------------------------------------------------------------------------
// Conditional sandwich checks
// ---------------------------------------------------------------------------

/// One node where a conditional quantity left its admissible interval.
#[derive(Debug, Clone)]
pub struct SandwichViolation {
    pub step: usize,
    pub history: Vec<f64>,
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
}

/// Outcome of a sandwich walk; `violations` must be empty for any valid
/// strategy.
#[derive(Debug, Clone)]
pub struct SandwichReport {
    pub nodes_checked: usize,
    pub violations: Vec<SandwichViolation>,
}

impl SandwichReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

fn sandwich_walk<S, V>(model: &HorizonModel, strategy: &S, mut node_value: V, lower: f64, upper: f64) -> Result<SandwichReport>
where
    S: KernelStrategy + ?Sized,
    V: FnMut(&DiscreteMeasure) -> f64,
{
    let support = model.base().union_support();
    tree_leaves_guard(support.len(), model.horizon())?;
    let mut report = SandwichReport {
        nodes_checked: 0,
        violations: Vec::new(),
    };
    let mut history: Vec<f64> = Vec::with_capacity(model.horizon());
    sandwich_rec(
        model,
        strategy,
        &mut node_value,
        lower,
        upper,
        &support,
        &mut history,
        &mut report,
    )?;
    Ok(report)
}

#[allow(clippy::too_many_arguments)]
fn sandwich_rec<S, V>(
    model: &HorizonModel,
    strategy: &S,
    node_value: &mut V,
    lower: f64,
    upper: f64,
    support: &[f64],
    history: &mut Vec<f64>,
    report: &mut SandwichReport,
) -> Result<()>
where
    S: KernelStrategy + ?Sized,
    V: FnMut(&DiscreteMeasure) -> f64,
{
    let step = history.len() + 1;
    let weights = strategy.choose(step, history)?;
    let kernel = model.base().mixture(&weights)?;
    let value = node_value(&kernel);
    report.nodes_checked += 1;
    if value < lower - SANDWICH_TOL || value > upper + SANDWICH_TOL {
        report.violations.push(SandwichViolation {
            step,
            history: history.clone(),
            value,
            lower,
            upper,
        });
    }
    if step < model.horizon() {
        for &x in support {
            history.push(x);
            sandwich_rec(model, strategy, node_value, lower, upper, support, history, report)?;
            history.pop();
        }
    }
    Ok(())
}

/// Checks that at every reachable node the one-step conditional expectation
/// of `phi` under the chosen kernel lies between the lower and upper
/// expectations of `phi` over the base set.
pub fn conditional_range_check<F, S>(model: &HorizonModel, strategy: &S, phi: F) -> Result<SandwichReport>
where
    F: Fn(f64) -> f64,
    S: KernelStrategy + ?Sized,
{
    let upper = model.base().upper_expect(&phi);
    let lower = -model.base().upper_expect(|x| -phi(x));
    sandwich_walk(model, strategy, |kernel| kernel.expect(&phi), lower, upper)
}

/// Checks that at every reachable node the classical variance of the chosen
/// kernel lies between the lower and upper variance of the base set.
pub fn conditional_variance_check<S>(model: &HorizonModel, strategy: &S) -> Result<SandwichReport>
where
    S: KernelStrategy + ?Sized,
{
    let vb = model.base().variance_bounds();
    sandwich_walk(model, strategy, |kernel| kernel.variance(), vb.lower, vb.upper)
}

// ---------------------------------------------------------------------------
// Volatility matching
// ---------------------------------------------------------------------------

/// Mixture weights over the extremes attaining the maximal (`up`) and
/// minimal (`down`) classical variance over the hull.
///
/// The variance is concave over the simplex of mixture weights, so its
/// minimum sits at a vertex (exact enumeration) and any local maximum is
/// global: a coarse simplex grid seed polished by exact pairwise-exchange
/// line maximization converges to the maximizer.
pub fn locate_extremal_variance_measures(set: &MeasureSet) -> (Vec<f64>, Vec<f64>) {
    let k = set.len();
    let moments = set.extreme_moments();
    let variance_of = |w: &[f64]| -> f64 {
        let mut mean = 0.0;
        let mut second = 0.0;
        for (x, &(m, s)) in w.iter().zip(&moments) {
            mean += x * m;
            second += x * s;
        }
        second - mean * mean
    };

    let mut down = vec![0.0; k];
    let (best_vertex, _) = set
        .extremes()
        .iter()
        .enumerate()
        .map(|(i, m)| (i, m.variance()))
        .fold((0usize, f64::INFINITY), |acc, (i, v)| if v < acc.1 { (i, v) } else { acc });
    down[best_vertex] = 1.0;

    // Seed the maximizer from a coarse simplex grid.
    let seed_resolution = 16.min(64 / k.max(1)).max(2);
    let mut up = vec![0.0; k];
    up[0] = 1.0;
    let mut best = variance_of(&up);
    for_each_composition(seed_resolution, k, |c| {
        let w: Vec<f64> = c.iter().map(|&v| v as f64 / seed_resolution as f64).collect();
        let v = variance_of(&w);
        if v > best {
            best = v;
            up = w;
        }
    });
    // Pairwise-exchange polish: along w + t (e_j - e_i) the variance is a
    // concave quadratic with a closed-form argmax.
    for _ in 0..200 {
        let mut improved = false;
        for i in 0..k {
            for j in 0..k {
                if i == j {
                    continue;
                }
                let (mi, si) = moments[i];
                let (mj, sj) = moments[j];
                let mean0: f64 = up.iter().zip(&moments).map(|(x, &(m, _))| x * m).sum();
                let dm = mj - mi;
                let ds = sj - si;
                let t_lo = -up[j];
                let t_hi = up[i];
                let t_star = if dm == 0.0 {
                    if ds > 0.0 {
                        t_hi
                    } else {
                        t_lo
                    }
                } else {
                    ((ds - 2.0 * mean0 * dm) / (2.0 * dm * dm)).clamp(t_lo, t_hi)
                };
                if t_star == 0.0 {
                    continue;
                }
                let mut cand = up.clone();
                cand[i] -= t_star;
                cand[j] += t_star;
                cand[i] = cand[i].max(0.0);
                cand[j] = cand[j].max(0.0);
                let v = variance_of(&cand);
                if v > best + 1e-15 {
                    best = v;
                    up = cand;
                    improved = true;
                }
            }
        }
        if !improved {
            break;
        }
    }
    // Renormalize away accumulated rounding.
    let total: f64 = up.iter().sum();
    for w in &mut up {
        *w /= total;
    }
    (up, down)
}

/// The two-point mixture strategy from the variance-matching construction:
/// at each node the kernel is `w * P_down + (1 - w) * P_up` with
/// `w = (V_up - target) / (V_up - V_down)`; when the variance interval is
/// degenerate it constantly plays `P_up`.
pub struct VolatilityMatchingStrategy<T> {
    p_up: Vec<f64>,
    p_down: Vec<f64>,
    bounds: VarianceBounds,
    target: T,
}

impl<T> VolatilityMatchingStrategy<T>
where
    T: Fn(usize, &[f64]) -> f64,
{
    /// The variance the chosen kernel actually realizes at a node. Mixing is
    /// affine in the measure but not in the variance, so this generally
    /// differs from the target; it always stays inside the variance interval.
    pub fn realized_variance(&self, model: &HorizonModel, step: usize, history: &[f64]) -> Result<f64> {
        let weights = self.choose(step, history)?;
        Ok(model.base().mixture(&weights)?.variance())
    }
}

impl<T> KernelStrategy for VolatilityMatchingStrategy<T>
where
    T: Fn(usize, &[f64]) -> f64,
{
    fn choose(&self, step: usize, history: &[f64]) -> Result<Vec<f64>> {
        let spread = self.bounds.upper - self.bounds.lower;
        if spread <= 1e-15 {
            return Ok(self.p_up.clone());
        }
        let t = (self.target)(step, history);
        if t < self.bounds.lower - 1e-9 || t > self.bounds.upper + 1e-9 {
            return Err(Error::InvalidStrategy(format!(
                "target variance {t} outside [{}, {}]",
                self.bounds.lower, self.bounds.upper
            )));
        }
        let w = ((self.bounds.upper - t) / spread).clamp(0.0, 1.0);
        Ok(self
            .p_down
            .iter()
            .zip(&self.p_up)
            .map(|(d, u)| w * d + (1.0 - w) * u)
            .collect())
    }
}

/// Builds the volatility-matching strategy, validating that `p_up` and
/// `p_down` (mixture weights over the base extremes) realize the upper and
/// lower variance within 1e-9.
pub fn volatility_matching_strategy<T>(
    model: &HorizonModel,
    target: T,
    p_up: Vec<f64>,
    p_down: Vec<f64>,
) -> Result<VolatilityMatchingStrategy<T>>
where
    T: Fn(usize, &[f64]) -> f64,
{
    let bounds = model.base().variance_bounds();
    let v_up = model.base().mixture(&p_up)?.variance();
    let v_down = model.base().mixture(&p_down)?.variance();
    if (v_up - bounds.upper).abs() > 1e-9 {
        return Err(Error::InvalidParameter(format!(
            "P_up has variance {v_up}, upper variance is {}",
            bounds.upper
        )));
    }
    if (v_down - bounds.lower).abs() > 1e-9 {
        return Err(Error::InvalidParameter(format!(
            "P_down has variance {v_down}, lower variance is {}",
            bounds.lower
        )));
    }
    Ok(VolatilityMatchingStrategy {
        p_up,
        p_down,
        bounds,
        target,
    })
}

// ---------------------------------------------------------------------------
// Centered-sum DP
// ---------------------------------------------------------------------------

/// Spatial grid specification for the centered-sum DP: symmetric about the
/// origin with the given radius and step.
#[derive(Debug, Clone, Copy)]
pub struct CenteredGrid {
    pub radius: f64,
    pub step: f64,
}

impl CenteredGrid {
    /// Radius `4.8 sqrt(V_up)` (20% beyond the required coverage) and a step
    /// resolving it into roughly 480 cells.
    pub fn with_defaults(upper_variance: f64) -> Self {
        let radius = (4.8 * upper_variance.sqrt()).max(0.5);
        CenteredGrid {
            radius,
            step: radius / 240.0,
        }
    }
}

/// Sup over mixture-grid strategies of `E[phi(S_n)]` for the centered,
/// `1/sqrt(n)`-scaled sum `S_n = sum (X_j - E[X_j | F_{j-1}]) / sqrt(n)`.
///
/// Backward induction on the spatial grid with linear interpolation and
/// boundary clamping. Centering makes the one-step value nonlinear in the
/// kernel, so extremes do not suffice: the mixture grid (which always
/// contains the vertices) yields a lower-bound approximation that converges
/// as the mixture and spatial grids refine. Ties in the kernel argmax go to
/// the lowest grid index.
pub fn centered_sum_sup<F>(model: &HorizonModel, phi: F, mixtures: &MixtureGrid, grid: &CenteredGrid) -> Result<f64>
where
    F: Fn(f64) -> f64 + Sync,
{
    let vb = model.base().variance_bounds();
    if vb.upper <= 0.0 {
        // Every kernel is a point mass; centered increments vanish.
        let v = phi(0.0);
        if !v.is_finite() {
            return Err(Error::NonFinite(format!("payoff {v} at 0")));
        }
        return Ok(v);
    }
    let required = 4.0 * vb.upper.sqrt();
    if grid.radius < required - 1e-12 {
        return Err(Error::GridCoverage(format!(
            "radius {} below required {required}",
            grid.radius
        )));
    }
    if !(grid.step > 0.0 && grid.step <= grid.radius) {
        return Err(Error::InvalidParameter(format!("bad grid step {}", grid.step)));
    }
    let n = model.horizon();
    let sqrt_n = (n as f64).sqrt();
    let half = (grid.radius / grid.step).ceil() as usize;
    let cells = 2 * half + 1;

    // Per mixture: merged kernel atoms as (relative index offset, weight).
    let weights = mixtures.weights(model.base().len())?;
    let mut mix_atoms: Vec<Vec<(f64, f64)>> = Vec::with_capacity(weights.len());
    for w in &weights {
        let kernel = model.base().mixture(w)?;
        let mean = kernel.mean();
        mix_atoms.push(
            kernel
                .atoms()
                .iter()
                .map(|&(p, a)| ((p - mean) / (sqrt_n * grid.step), a))
                .collect(),
        );
    }

    let mut values: Vec<f64> = (0..cells)
        .map(|j| phi((j as f64 - half as f64) * grid.step))
        .collect();
    if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
        return Err(Error::NonFinite(format!("terminal value {bad}")));
    }
    for _ in 0..n {
        let prev = &values;
        let next = map_indices(cells, |j| {
            let mut best = f64::NEG_INFINITY;
            for atoms in &mix_atoms {
                let mut acc = 0.0;
                for &(rel, w) in atoms {
                    acc += w * lerp_clamped(prev, j as f64 + rel);
                }
                if acc > best {
                    best = acc;
                }
            }
            best
        });
        values = next;
    }
    Ok(values[half])
}

/// Exact value `E[phi(S_n)]` of the centered, scaled sum under one specific
/// strategy, by a full tree walk. Any strategy's value is a lower bound for
/// the sup the centered DP approximates.
pub fn centered_strategy_value<F, S>(model: &HorizonModel, strategy: &S, phi: F) -> Result<f64>
where
    F: Fn(f64) -> f64,
    S: KernelStrategy + ?Sized,
{
    let support = model.base().union_support();
    tree_leaves_guard(support.len(), model.horizon())?;
    let sqrt_n = (model.horizon() as f64).sqrt();
    let mut history = Vec::with_capacity(model.horizon());
    centered_value_rec(model, strategy, &phi, &support, sqrt_n, &mut history, 0.0)
}

fn centered_value_rec<F, S>(
    model: &HorizonModel,
    strategy: &S,
    phi: &F,
    support: &[f64],
    sqrt_n: f64,
    history: &mut Vec<f64>,
    centered_sum: f64,
) -> Result<f64>
where
    F: Fn(f64) -> f64,
    S: KernelStrategy + ?Sized,
{
    if history.len() == model.horizon() {
        let v = phi(centered_sum / sqrt_n);
        if !v.is_finite() {
            return Err(Error::NonFinite(format!("payoff {v} at centered sum {centered_sum}")));
        }
        return Ok(v);
    }
    let step = history.len() + 1;
    let weights = strategy.choose(step, history)?;
    let kernel = model.base().mixture(&weights)?;
    let mean = kernel.mean();
    let mut acc = 0.0;
    for &(p, w) in kernel.atoms() {
        debug_assert!(support.binary_search_by(|probe| probe.total_cmp(&p)).is_ok());
        history.push(p);
        let child = centered_value_rec(model, strategy, phi, support, sqrt_n, history, centered_sum + (p - mean))?;
        history.pop();
        acc += w * child;
    }
    Ok(acc)
}
