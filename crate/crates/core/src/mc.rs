//! Control Monte Carlo: simulating stochastic integrals with adapted
//! piecewise-constant volatility controls valued in `sqrt(Theta)`. Every
//! admissible control yields a statistical lower bound for the limit upper
//! expectation, which is how these estimates are used.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::gheat::ThetaInterval;
use crate::path::EmbeddedPath;

/// Adapted piecewise-constant volatility: the value on `[k/steps, (k+1)/steps)`
/// may depend only on the step index and the path realized so far.
pub trait VolControl {
    fn sigma(&self, step: usize, path_so_far: &[f64]) -> f64;
}

impl<F> VolControl for F
where
    F: Fn(usize, &[f64]) -> f64,
{
    fn sigma(&self, step: usize, path_so_far: &[f64]) -> f64 {
        self(step, path_so_far)
    }
}

/// Sample mean and standard error of a path functional under a control law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub paths: usize,
}

/// Simulates `paths` Euler paths `Y_{k+1} = Y_k + sigma(k, path) sqrt(dt) Z`
/// with standard normal shocks from a per-path seeded deterministic
/// generator, and returns the sample mean of `phi` on the embedded path with
/// its standard error.
///
/// Same seed means bit-identical output regardless of run or worker count:
/// path `i` always draws from stream `i + 1` of the seeded generator, and the
/// final reduction runs in path order.
pub fn control_mc_lower_bound<C, P>(
    phi: P,
    theta: ThetaInterval,
    control: &C,
    steps: usize,
    paths: usize,
    seed: u64,
) -> Result<McEstimate>
where
    C: VolControl + Sync,
    P: Fn(&EmbeddedPath) -> f64 + Sync,
{
    if paths < 100 {
        return Err(Error::InvalidParameter(format!("need at least 100 paths, got {paths}")));
    }
    if steps == 0 {
        return Err(Error::InvalidParameter("need at least one time step".into()));
    }
    let sigma_lo = theta.sigma2_low().sqrt();
    let sigma_hi = theta.sigma2_high().sqrt();
    let dt = 1.0 / steps as f64;
    let sqrt_dt = dt.sqrt();
    let simulate = |i: usize| -> Result<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64 + 1);
        let mut knots: Vec<f64> = Vec::with_capacity(steps);
        let mut y = 0.0;
        for k in 0..steps {
            let s = control.sigma(k, &knots);
            if !(s >= sigma_lo - 1e-12 && s <= sigma_hi + 1e-12) {
                return Err(Error::InvalidStrategy(format!(
                    "control value {s} at step {k} outside [{sigma_lo}, {sigma_hi}]"
                )));
            }
            let z: f64 = StandardNormal.sample(&mut rng);
            y += s * sqrt_dt * z;
            knots.push(y);
        }
        let value = phi(&EmbeddedPath::new(&knots)?);
        if !value.is_finite() {
            return Err(Error::NonFinite(format!("path payoff {value}")));
        }
        Ok(value)
    };

    #[cfg(feature = "parallel")]
    let values: Result<Vec<f64>> = {
        use rayon::prelude::*;
        (0..paths).into_par_iter().map(simulate).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let values: Result<Vec<f64>> = (0..paths).map(simulate).collect();
    let values = values?;

    let n = values.len() as f64;
    let mean: f64 = values.iter().sum::<f64>() / n;
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    let std_error = (ss / (n - 1.0) / n).sqrt();
    Ok(McEstimate {
        estimate: mean,
        std_error,
        paths,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gheat::{solve_g_heat, GHeatParams};
    use crate::path::PathFunctional;

    fn theta() -> ThetaInterval {
        ThetaInterval::new(0.25, 1.0).unwrap()
    }

    #[test]
    fn martingale_terminal_mean_is_near_zero() {
        let control = |_: usize, _: &[f64]| 1.0;
        let est = control_mc_lower_bound(
            |p: &EmbeddedPath| PathFunctional::Terminal.eval(p),
            theta(),
            &control,
            32,
            20_000,
            7,
        )
        .unwrap();
        assert!(est.estimate.abs() <= 3.0 * est.std_error, "{est:?}");
    }

    #[test]
    fn constant_top_volatility_recovers_its_variance() {
        let control = |_: usize, _: &[f64]| 1.0;
        let est = control_mc_lower_bound(|p: &EmbeddedPath| p.terminal() * p.terminal(), theta(), &control, 32, 20_000, 11).unwrap();
        assert!(
            (est.estimate - 1.0).abs() <= 3.0 * est.std_error,
            "estimate {} +- {}",
            est.estimate,
            est.std_error
        );
    }

    #[test]
    fn any_admissible_control_stays_below_the_pde_value() {
        let pde = solve_g_heat(&GHeatParams::with_defaults(theta()), |x| x * x)
            .unwrap()
            .value_at_origin;
        // Path-dependent control: volatility rises with the running value.
        let control = |_: usize, path: &[f64]| {
            let level = path.last().copied().unwrap_or(0.0);
            0.5 + 0.5 / (1.0 + (-level).exp())
        };
        let est = control_mc_lower_bound(|p: &EmbeddedPath| p.terminal() * p.terminal(), theta(), &control, 64, 20_000, 3).unwrap();
        assert!(est.estimate - 3.0 * est.std_error <= pde, "estimate {est:?} vs pde {pde}");
    }

    #[test]
    fn out_of_range_control_is_rejected() {
        let control = |_: usize, _: &[f64]| 1.5;
        let err = control_mc_lower_bound(
            |p: &EmbeddedPath| p.terminal(),
            theta(),
            &control,
            8,
            200,
            0,
        )
        .unwrap_err();
        assert!(matches!(err, Error::InvalidStrategy(_)));
    }

    #[test]
    fn too_few_paths_is_rejected() {
        let control = |_: usize, _: &[f64]| 1.0;
        assert!(control_mc_lower_bound(|p: &EmbeddedPath| p.terminal(), theta(), &control, 8, 99, 0).is_err());
    }

    #[test]
    fn same_seed_is_bit_identical() {
        let control = |_: usize, path: &[f64]| if path.len().is_multiple_of(2) { 0.5 } else { 1.0 };
        let a = control_mc_lower_bound(|p: &EmbeddedPath| p.running_max(), theta(), &control, 16, 500, 42).unwrap();
        let b = control_mc_lower_bound(|p: &EmbeddedPath| p.running_max(), theta(), &control, 16, 500, 42).unwrap();
        assert_eq!(a.estimate.to_bits(), b.estimate.to_bits());
        assert_eq!(a.std_error.to_bits(), b.std_error.to_bits());
        let c = control_mc_lower_bound(|p: &EmbeddedPath| p.running_max(), theta(), &control, 16, 500, 43).unwrap();
        assert_ne!(a.estimate.to_bits(), c.estimate.to_bits());
    }
}
