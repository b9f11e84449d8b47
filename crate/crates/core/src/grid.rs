//! Uniform spatial grids carrying time-indexed value functions, plus the
//! index-space linear interpolation shared by the grid-based solvers.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A value function sampled on a uniform grid `x_min + j*step`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValueGrid {
    x_min: f64,
    step: f64,
    values: Vec<f64>,
    time_index: usize,
}

impl ValueGrid {
    /// Samples `f` on the grid spanning `[x_min, x_max]`. The span must be an
    /// integer number of steps (within 1e-9 relative) and all sampled values
    /// must be finite.
    pub fn from_fn<F: Fn(f64) -> f64>(x_min: f64, x_max: f64, step: f64, f: F) -> Result<Self> {
        if !step.is_finite() || step <= 0.0 || !x_min.is_finite() || !x_max.is_finite() || x_max <= x_min {
            return Err(Error::InvalidParameter(format!(
                "bad grid spec: x_min={x_min}, x_max={x_max}, step={step}"
            )));
        }
        let span = (x_max - x_min) / step;
        let n = span.round();
        if (span - n).abs() > 1e-9 * span.max(1.0) {
            return Err(Error::InvalidParameter(format!(
                "(x_max - x_min)/step = {span} is not an integer"
            )));
        }
        let n = n as usize;
        let mut values = Vec::with_capacity(n + 1);
        for j in 0..=n {
            let x = x_min + j as f64 * step;
            let v = f(x);
            if !v.is_finite() {
                return Err(Error::NonFinite(format!("grid value {v} at x={x}")));
            }
            values.push(v);
        }
        Ok(ValueGrid {
            x_min,
            step,
            values,
            time_index: 0,
        })
    }

    /// Grid symmetric about the origin with `2*half_nodes` cells.
    pub fn symmetric<F: Fn(f64) -> f64>(radius: f64, step: f64, f: F) -> Result<Self> {
        if !radius.is_finite() || radius <= 0.0 || !step.is_finite() || step <= 0.0 {
            return Err(Error::InvalidParameter(format!("radius {radius} and step {step} must be positive")));
        }
        let half = (radius / step).ceil() as usize;
        let reach = half as f64 * step;
        ValueGrid::from_fn(-reach, reach, step, f)
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_min + (self.values.len() - 1) as f64 * self.step
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn x(&self, j: usize) -> f64 {
        self.x_min + j as f64 * self.step
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn replace_values(&mut self, values: Vec<f64>) {
        debug_assert_eq!(values.len(), self.values.len());
        self.values = values;
    }

    pub fn time_index(&self) -> usize {
        self.time_index
    }

    pub fn set_time_index(&mut self, k: usize) {
        self.time_index = k;
    }

    /// Index of the node at the origin, when the grid contains it exactly.
    pub fn origin_index(&self) -> Option<usize> {
        let pos = -self.x_min / self.step;
        let j = pos.round();
        if (pos - j).abs() < 1e-9 && j >= 0.0 && (j as usize) < self.values.len() {
            Some(j as usize)
        } else {
            None
        }
    }

    /// Linear interpolation with clamping to the boundary values.
    pub fn eval_clamped(&self, x: f64) -> f64 {
        lerp_clamped(&self.values, (x - self.x_min) / self.step)
    }
}

/// Linear interpolation of `values` at fractional index `pos`, clamping
/// out-of-range queries to the boundary values.
pub fn lerp_clamped(values: &[f64], pos: f64) -> f64 {
    let last = values.len() - 1;
    if pos <= 0.0 {
        return values[0];
    }
    if pos >= last as f64 {
        return values[last];
    }
    let i = pos.floor() as usize;
    let t = pos - i as f64;
    values[i] + t * (values[i + 1] - values[i])
}

/// Fills a vector by evaluating `f` at each index, in parallel when the
/// `parallel` feature is on and the slice is large enough to pay for it.
/// The output is index-ordered, so results do not depend on the schedule.
pub(crate) fn map_indices<F>(len: usize, f: F) -> Vec<f64>
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        if len >= 4096 {
            return (0..len).into_par_iter().map(f).collect();
        }
    }
    (0..len).map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_construction_and_lookup() {
        let g = ValueGrid::from_fn(-1.0, 1.0, 0.5, |x| x * x).unwrap();
        assert_eq!(g.len(), 5);
        assert_eq!(g.values(), &[1.0, 0.25, 0.0, 0.25, 1.0]);
        assert_eq!(g.origin_index(), Some(2));
        assert_eq!(g.x(4), 1.0);
    }

    #[test]
    fn rejects_non_integer_span() {
        assert!(ValueGrid::from_fn(0.0, 1.0, 0.3, |_| 0.0).is_err());
        assert!(ValueGrid::from_fn(0.0, 1.0, -0.1, |_| 0.0).is_err());
        assert!(ValueGrid::from_fn(0.0, 1.0, 0.5, |_| f64::NAN).is_err());
    }

    #[test]
    fn interpolation_is_exact_at_nodes_and_clamps_outside() {
        let g = ValueGrid::from_fn(0.0, 2.0, 1.0, |x| 3.0 * x).unwrap();
        assert_eq!(g.eval_clamped(1.0), 3.0);
        assert_eq!(g.eval_clamped(0.5), 1.5);
        assert_eq!(g.eval_clamped(-5.0), 0.0);
        assert_eq!(g.eval_clamped(9.0), 6.0);
    }

    #[test]
    fn symmetric_grid_covers_requested_radius() {
        let g = ValueGrid::symmetric(1.05, 0.5, |_| 0.0).unwrap();
        assert!(g.x_min() <= -1.05 && g.x_max() >= 1.05);
        assert_eq!(g.origin_index(), Some((g.len() - 1) / 2));
    }
}
