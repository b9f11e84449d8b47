//! Piecewise-linear embedding of discrete paths into continuous paths on
//! [0,1], and a small catalogue of path functionals with at-most-linear
//! growth in the sup norm.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The continuous path through `(i/n, x_i)` with `x_0 = 0`.
///
/// The embedding is 1-Lipschitz from the max norm on knot values to the sup
/// norm on paths: perturbing every knot by at most `d` moves the whole path
/// by at most `d`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddedPath {
    knots: Vec<f64>,
}

impl EmbeddedPath {
    /// Embeds the discrete path `x = (x_1, ..., x_n)`, n >= 1.
    pub fn new(x: &[f64]) -> Result<Self> {
        if x.is_empty() {
            return Err(Error::InvalidParameter("cannot embed an empty path".into()));
        }
        if let Some(bad) = x.iter().find(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("path value {bad}")));
        }
        let mut knots = Vec::with_capacity(x.len() + 1);
        knots.push(0.0);
        knots.extend_from_slice(x);
        Ok(EmbeddedPath { knots })
    }

    /// Number of discrete steps `n`.
    pub fn steps(&self) -> usize {
        self.knots.len() - 1
    }

    /// Knot values `x_0 = 0, x_1, ..., x_n`.
    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    /// Value at time `t`, clamped to [0, 1]:
    /// `([nt]+1-nt) x_[nt] + (nt-[nt]) x_[nt]+1`.
    pub fn eval(&self, t: f64) -> f64 {
        let n = self.steps();
        let u = (n as f64) * t.clamp(0.0, 1.0);
        let i = u.floor() as usize;
        if i >= n {
            return self.knots[n];
        }
        let frac = u - i as f64;
        (1.0 - frac) * self.knots[i] + frac * self.knots[i + 1]
    }

    /// `count + 1` uniform samples over [0, 1] (endpoints included).
    pub fn samples(&self, count: usize) -> Vec<f64> {
        (0..=count).map(|j| self.eval(j as f64 / count.max(1) as f64)).collect()
    }

    pub fn terminal(&self) -> f64 {
        *self.knots.last().expect("at least the origin knot")
    }

    /// Running maximum; attained at a knot since the path is piecewise linear.
    pub fn running_max(&self) -> f64 {
        self.knots.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Exact time average of the piecewise-linear path (trapezoid rule is
    /// exact on each linear piece).
    pub fn time_average(&self) -> f64 {
        let n = self.steps() as f64;
        let mut acc = 0.0;
        for w in self.knots.windows(2) {
            acc += 0.5 * (w[0] + w[1]);
        }
        acc / n
    }

    pub fn sup_norm(&self) -> f64 {
        self.knots.iter().fold(0.0, |acc: f64, v| acc.max(v.abs()))
    }
}

/// Concrete members of the payoff class `|phi(path)| <= C (1 + sup |path|)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PathFunctional {
    /// Terminal value `x_n`.
    Terminal,
    /// Running maximum over the path (0 included via the origin knot).
    RunningMax,
    /// Exact time average of the embedded path.
    TimeAverage,
    /// Linear combination of the three above; Lipschitz in the sup norm
    /// with constant `|terminal| + |running_max| + |time_average|`.
    Composite {
        terminal: f64,
        running_max: f64,
        time_average: f64,
    },
}

impl PathFunctional {
    pub fn eval(&self, path: &EmbeddedPath) -> f64 {
        match *self {
            PathFunctional::Terminal => path.terminal(),
            PathFunctional::RunningMax => path.running_max(),
            PathFunctional::TimeAverage => path.time_average(),
            PathFunctional::Composite {
                terminal,
                running_max,
                time_average,
            } => terminal * path.terminal() + running_max * path.running_max() + time_average * path.time_average(),
        }
    }

    /// Parses `terminal`, `running_max`, `time_average`, or
    /// `composite:a,b,c`.
    pub fn parse(text: &str) -> Result<Self> {
        match text {
            "terminal" => Ok(PathFunctional::Terminal),
            "running_max" => Ok(PathFunctional::RunningMax),
            "time_average" => Ok(PathFunctional::TimeAverage),
            other => {
                if let Some(rest) = other.strip_prefix("composite:") {
                    let parts: Vec<&str> = rest.split(',').collect();
                    if parts.len() == 3 {
                        let mut c = [0.0; 3];
                        for (slot, p) in c.iter_mut().zip(&parts) {
                            *slot = p
                                .trim()
                                .parse::<f64>()
                                .map_err(|e| Error::InvalidParameter(format!("composite weight {p}: {e}")))?;
                            if !slot.is_finite() {
                                return Err(Error::InvalidParameter("composite weights must be finite".into()));
                            }
                        }
                        return Ok(PathFunctional::Composite {
                            terminal: c[0],
                            running_max: c[1],
                            time_average: c[2],
                        });
                    }
                }
                Err(Error::InvalidParameter(format!("unknown path functional: {other}")))
            }
        }
    }
}
