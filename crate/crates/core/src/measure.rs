//! Finitely supported measures, their convex hulls, and the sublinear
//! expectation machinery: upper expectations, mean intervals, upper/lower
//! variances with their duality to classical variances over the hull.
//!
//! An uncertainty set is stored by its extreme measures; the set itself is
//! the convex hull of those extremes. Because expectations are linear in the
//! mixture weights, every `sup` of an expectation over the hull is attained
//! at an extreme, which keeps all suprema exactly computable. Variances are
//! not linear in the measure, so the upper variance goes through the
//! mean-interval minimization and the lower variance through vertex
//! enumeration (concave functions on a polytope attain their minimum at a
//! vertex).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Weight sums are accepted within this tolerance of 1.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;

/// Tolerance on the mean location in the upper-variance minimization.
pub const UPPER_VARIANCE_MEAN_TOL: f64 = 1e-10;

const MAX_ORACLE_GRID: u128 = 20_000_000;

/// A finitely supported probability measure on the reals.
///
/// Canonical form: points strictly increasing, zero-weight atoms dropped,
/// duplicate points merged, weights nonnegative and summing to 1 within
/// [`WEIGHT_SUM_TOL`]. Equality on the canonical form is plain structural
/// equality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMeasure", into = "RawMeasure")]
pub struct DiscreteMeasure {
    atoms: Vec<(f64, f64)>,
}

#[derive(Serialize, Deserialize)]
struct RawMeasure {
    atoms: Vec<(f64, f64)>,
}

impl TryFrom<RawMeasure> for DiscreteMeasure {
    type Error = Error;
    fn try_from(raw: RawMeasure) -> Result<Self> {
        DiscreteMeasure::new(raw.atoms)
    }
}

impl From<DiscreteMeasure> for RawMeasure {
    fn from(m: DiscreteMeasure) -> Self {
        RawMeasure { atoms: m.atoms }
    }
}

impl DiscreteMeasure {
    /// Builds a measure from `(point, weight)` pairs and canonicalizes it.
    pub fn new(atoms: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        let mut atoms: Vec<(f64, f64)> = atoms.into_iter().collect();
        for &(p, w) in &atoms {
            if !p.is_finite() {
                return Err(Error::InvalidMeasure(format!("non-finite support point {p}")));
            }
            if !w.is_finite() || w < 0.0 {
                return Err(Error::InvalidMeasure(format!("weight {w} at point {p} is not a nonnegative real")));
            }
        }
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(atoms.len());
        for (p, w) in atoms {
            match merged.last_mut() {
                Some(last) if last.0 == p => last.1 += w,
                _ => merged.push((p, w)),
            }
        }
        merged.retain(|&(_, w)| w > 0.0);
        if merged.is_empty() {
            return Err(Error::InvalidMeasure("empty support".into()));
        }
        let total: f64 = merged.iter().map(|&(_, w)| w).sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::InvalidMeasure(format!("weights sum to {total}, not 1")));
        }
        Ok(DiscreteMeasure { atoms: merged })
    }

    /// Point mass at `point`.
    pub fn dirac(point: f64) -> Self {
        DiscreteMeasure::new([(point, 1.0)]).expect("a point mass is always valid")
    }

    /// Measure on {0, 1} with mass `p` at 1.
    pub fn bernoulli(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidMeasure(format!("Bernoulli parameter {p} outside [0,1]")));
        }
        DiscreteMeasure::new([(0.0, 1.0 - p), (1.0, p)])
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn support(&self) -> impl Iterator<Item = f64> + '_ {
        self.atoms.iter().map(|&(p, _)| p)
    }

    pub fn support_len(&self) -> usize {
        self.atoms.len()
    }

    /// Classical expectation `E[f(X)]`, exact up to floating arithmetic.
    pub fn expect<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.atoms.iter().map(|&(p, w)| w * f(p)).sum()
    }

    pub fn mean(&self) -> f64 {
        self.expect(|x| x)
    }

    pub fn second_moment(&self) -> f64 {
        self.expect(|x| x * x)
    }

    /// Classical variance, computed in two passes around the mean.
    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.expect(|x| (x - m) * (x - m))
    }

    pub fn max_abs_support(&self) -> f64 {
        self.atoms.iter().fold(0.0, |acc, &(p, _)| acc.max(p.abs()))
    }

    /// Finite mixture `sum w_i * m_i` of measures, canonicalized.
    pub fn mix(components: &[(f64, &DiscreteMeasure)]) -> Result<Self> {
        let mut atoms = Vec::new();
        for &(w, m) in components {
            if !w.is_finite() || w < 0.0 {
                return Err(Error::InvalidMeasure(format!("mixture weight {w} is not a nonnegative real")));
            }
            for &(p, a) in m.atoms() {
                atoms.push((p, w * a));
            }
        }
        DiscreteMeasure::new(atoms)
    }
}

/// Closed interval `[lower, upper]` of means attainable over an uncertainty
/// set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanInterval {
    pub lower: f64,
    pub upper: f64,
}

impl MeanInterval {
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        if !(lower.is_finite() && upper.is_finite()) || lower > upper {
            return Err(Error::InvalidParameter(format!("[{lower}, {upper}] is not a valid mean interval")));
        }
        Ok(MeanInterval { lower, upper })
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }
}

/// Upper and lower variance of the canonical coordinate over a set, together
/// with the mean location attaining the upper variance's outer minimum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarianceBounds {
    pub lower: f64,
    pub upper: f64,
    pub argmin_mean_upper: f64,
}

/// A weakly compact, convex uncertainty set, represented by finitely many
/// finitely-supported extreme measures. The set is the convex hull of
/// `extremes`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSet", into = "RawSet")]
pub struct MeasureSet {
    extremes: Vec<DiscreteMeasure>,
}

#[derive(Serialize, Deserialize)]
struct RawSet {
    extremes: Vec<DiscreteMeasure>,
}

impl TryFrom<RawSet> for MeasureSet {
    type Error = Error;
    fn try_from(raw: RawSet) -> Result<Self> {
        MeasureSet::new(raw.extremes)
    }
}

impl From<MeasureSet> for RawSet {
    fn from(s: MeasureSet) -> Self {
        RawSet { extremes: s.extremes }
    }
}

impl MeasureSet {
    pub fn new(extremes: Vec<DiscreteMeasure>) -> Result<Self> {
        if extremes.is_empty() {
            return Err(Error::InvalidSet("a measure set needs at least one extreme".into()));
        }
        Ok(MeasureSet { extremes })
    }

    pub fn singleton(m: DiscreteMeasure) -> Self {
        MeasureSet { extremes: vec![m] }
    }

    /// Parses the JSON wire format `{"extremes":[{"atoms":[[p,w],...]},...]}`.
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidSet(format!("JSON parse: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("measure sets serialize infallibly")
    }

    pub fn extremes(&self) -> &[DiscreteMeasure] {
        &self.extremes
    }

    pub fn len(&self) -> usize {
        self.extremes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Sorted union of the extremes' supports.
    pub fn union_support(&self) -> Vec<f64> {
        let mut s: Vec<f64> = self.extremes.iter().flat_map(|m| m.support()).collect();
        s.sort_by(f64::total_cmp);
        s.dedup();
        s
    }

    pub fn max_abs_support(&self) -> f64 {
        self.extremes.iter().fold(0.0, |acc, m| acc.max(m.max_abs_support()))
    }

    /// Mixture of the extremes under `weights` (same order as `extremes()`).
    pub fn mixture(&self, weights: &[f64]) -> Result<DiscreteMeasure> {
        self.check_weights(weights)?;
        let parts: Vec<(f64, &DiscreteMeasure)> =
            weights.iter().copied().zip(self.extremes.iter()).collect();
        DiscreteMeasure::mix(&parts)
    }

    /// Validates a mixture-weight vector over the extremes.
    pub fn check_weights(&self, weights: &[f64]) -> Result<()> {
        if weights.len() != self.extremes.len() {
            return Err(Error::InvalidStrategy(format!(
                "{} mixture weights for {} extremes",
                weights.len(),
                self.extremes.len()
            )));
        }
        let mut total = 0.0;
        for &w in weights {
            if !w.is_finite() || w < -1e-15 {
                return Err(Error::InvalidStrategy(format!("mixture weight {w} is not a nonnegative real")));
            }
            total += w;
        }
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidStrategy(format!("mixture weights sum to {total}, not 1")));
        }
        Ok(())
    }

    /// Upper expectation `sup_P E_P[f]` over the hull.
    ///
    /// Expectations are linear in the mixture weights, so the supremum over
    /// the hull is attained at an extreme; the max over extremes is exact.
    pub fn upper_expect<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.extremes
            .iter()
            .map(|m| m.expect(&f))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Lower expectation `-sup_P E_P[-f] = inf_P E_P[f]`.
    pub fn lower_expect<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        -self.upper_expect(|x| -f(x))
    }

    /// Upper and lower mean of the canonical coordinate.
    pub fn mean_interval(&self) -> MeanInterval {
        let upper = self.upper_expect(|x| x);
        let lower = self.lower_expect(|x| x);
        MeanInterval { lower, upper }
    }

    /// Per-extreme `(mean, second moment)`, the sufficient statistics for
    /// mixture variances.
    pub fn extreme_moments(&self) -> Vec<(f64, f64)> {
        self.extremes.iter().map(|m| (m.mean(), m.second_moment())).collect()
    }

    /// Upper variance (min over means in the mean interval of the upper
    /// expected squared deviation) and lower variance (min of the classical
    /// variance over the hull).
    ///
    /// The inner max of convex quadratics is convex in the mean, so the outer
    /// minimum is found by ternary search to [`UPPER_VARIANCE_MEAN_TOL`]. The
    /// classical variance is concave in the measure, so its minimum over the
    /// hull sits at a vertex and vertex enumeration is exact.
    pub fn variance_bounds(&self) -> VarianceBounds {
        let interval = self.mean_interval();
        let moments = self.extreme_moments();
        let objective = |mu: f64| -> f64 {
            moments
                .iter()
                .map(|&(m, s)| s - 2.0 * mu * m + mu * mu)
                .fold(f64::NEG_INFINITY, f64::max)
        };
        let (mut lo, mut hi) = (interval.lower, interval.upper);
        while hi - lo > UPPER_VARIANCE_MEAN_TOL {
            let third = (hi - lo) / 3.0;
            let m1 = lo + third;
            let m2 = hi - third;
            if objective(m1) <= objective(m2) {
                hi = m2;
            } else {
                lo = m1;
            }
        }
        let argmin = (0.5 * (lo + hi)).clamp(interval.lower, interval.upper);
        let upper = objective(argmin).max(0.0);
        let lower = self
            .extremes
            .iter()
            .map(|m| m.variance())
            .fold(f64::INFINITY, f64::min);
        VarianceBounds {
            lower,
            upper,
            argmin_mean_upper: argmin,
        }
    }

    /// Brute-force check of the variance duality: enumerates mixture weights
    /// on a simplex grid of the given spacing (vertices always included) and
    /// returns `(max, min)` of the classical variance over the grid.
    pub fn variance_oracle(&self, grid_step: f64) -> Result<(f64, f64)> {
        if !grid_step.is_finite() || grid_step <= 0.0 || grid_step > 0.5 {
            return Err(Error::InvalidParameter(format!("grid step {grid_step} outside (0, 0.5]")));
        }
        let k = self.extremes.len();
        let resolution = (1.0 / grid_step).ceil() as usize;
        let count = composition_count(resolution, k);
        if count > MAX_ORACLE_GRID {
            return Err(Error::GuardViolation(format!(
                "simplex grid would hold {count} points (limit {MAX_ORACLE_GRID})"
            )));
        }
        let moments = self.extreme_moments();
        let scale = resolution as f64;
        let mut max_var = f64::NEG_INFINITY;
        let mut min_var = f64::INFINITY;
        for_each_composition(resolution, k, |counts| {
            let mut mean = 0.0;
            let mut second = 0.0;
            for (c, &(m, s)) in counts.iter().zip(&moments) {
                if *c > 0 {
                    let w = *c as f64 / scale;
                    mean += w * m;
                    second += w * s;
                }
            }
            let var = second - mean * mean;
            max_var = max_var.max(var);
            min_var = min_var.min(var);
        });
        Ok((max_var, min_var.max(0.0)))
    }

    /// Upper expectation of the quadratic tail excess `(|X|^2 - lambda)^+`.
    ///
    /// Zero as soon as `lambda` reaches the squared largest support point, so
    /// bounded-support sets satisfy the tail condition identically.
    pub fn tail_deficiency(&self, lambda: f64) -> Result<f64> {
        if lambda.is_nan() || lambda < 0.0 {
            return Err(Error::InvalidParameter(format!("lambda {lambda} must be nonnegative")));
        }
        Ok(self.upper_expect(|x| (x * x - lambda).max(0.0)))
    }
}

/// Number of compositions of `total` into `parts` nonnegative ordered parts.
pub(crate) fn composition_count(total: usize, parts: usize) -> u128 {
    // C(total + parts - 1, parts - 1)
    let n = (total + parts - 1) as u128;
    let k = (parts - 1) as u128;
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul(n - i) / (i + 1);
    }
    acc
}

/// Visits every composition of `total` into `parts` nonnegative ordered
/// parts, in lexicographic order from `(total, 0, ..)` down.
pub(crate) fn for_each_composition(total: usize, parts: usize, mut visit: impl FnMut(&[usize])) {
    assert!(parts >= 1);
    let mut c = vec![0usize; parts];
    c[0] = total;
    loop {
        visit(&c);
        if c[parts - 1] == total {
            break;
        }
        // Move one unit right from the rightmost positive entry before the
        // tail, gathering the tail back behind it.
        let mut i = parts - 2;
        while c[i] == 0 {
            i -= 1;
        }
        c[i] -= 1;
        let tail: usize = c[i + 1..].iter().sum::<usize>() + 1;
        for slot in &mut c[i + 1..] {
            *slot = 0;
        }
        c[i + 1] = tail;
    }
}
