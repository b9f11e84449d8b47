//! Name-to-function parsing for the payoff, model, and control catalogues.

use gcltlab_core::harness::{fair_coin_singleton, heavy_tail_family, two_point_hull};
use gcltlab_core::payoff::ScalarPayoff;
use gcltlab_core::{EmbeddedPath, MeasureSet, PathFunctional};

use crate::CliError;

pub type PathPayoff = Box<dyn Fn(&EmbeddedPath) -> f64 + Send + Sync>;
pub type ControlFn = Box<dyn Fn(usize, &[f64]) -> f64 + Send + Sync>;

/// Scalar payoff catalogue; see `gcltlab_core::payoff` for the names.
pub fn parse_scalar_payoff(name: &str) -> Result<ScalarPayoff, CliError> {
    Ok(gcltlab_core::payoff::parse_scalar(name)?)
}

/// Path payoff catalogue: the path functionals plus `terminal_sq`.
/// Returns the closure and, when the payoff is a function of the terminal
/// value alone, the scalar payoff usable by the limit solvers.
pub fn parse_path_payoff(name: &str) -> Result<(PathPayoff, Option<ScalarPayoff>), CliError> {
    if name == "terminal_sq" {
        return Ok((
            Box::new(|p: &EmbeddedPath| {
                let t = p.terminal();
                t * t
            }),
            Some(Box::new(|x| x * x)),
        ));
    }
    let functional =
        PathFunctional::parse(name).map_err(|e| CliError::Validation(format!("path payoff `{name}`: {e}")))?;
    let scalar: Option<ScalarPayoff> = match functional {
        PathFunctional::Terminal => Some(Box::new(|x| x)),
        _ => None,
    };
    Ok((Box::new(move |p: &EmbeddedPath| functional.eval(p)), scalar))
}

/// Model catalogue: `two_point_hull`, `fair_coin`, `heavy_tail:K`, a JSON
/// document (`{"extremes":[...]}`), or `@path` to a JSON file.
pub fn parse_model(spec: &str) -> Result<MeasureSet, CliError> {
    match spec {
        "two_point_hull" => Ok(two_point_hull()),
        "fair_coin" => Ok(fair_coin_singleton()),
        other => {
            if let Some(k) = other.strip_prefix("heavy_tail:") {
                let k = k
                    .parse::<usize>()
                    .map_err(|e| CliError::Validation(format!("heavy_tail truncation `{k}`: {e}")))?;
                return Ok(heavy_tail_family(k)?);
            }
            if let Some(path) = other.strip_prefix('@') {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::Validation(format!("cannot read model file {path}: {e}")))?;
                return Ok(MeasureSet::from_json(&text)?);
            }
            if other.trim_start().starts_with('{') {
                return Ok(MeasureSet::from_json(other)?);
            }
            Err(CliError::Validation(format!("unknown model `{other}`")))
        }
    }
}

/// Control catalogue for the Monte Carlo command: `const:sigma`,
/// `bangbang:threshold` (top volatility below the threshold, bottom above),
/// `hash:salt` (hash-driven admissible control).
pub fn parse_control(spec: &str, sigma_lo: f64, sigma_hi: f64) -> Result<ControlFn, CliError> {
    if let Some(v) = spec.strip_prefix("const:") {
        let sigma = v
            .parse::<f64>()
            .map_err(|e| CliError::Validation(format!("control `{spec}`: {e}")))?;
        return Ok(Box::new(move |_, _| sigma));
    }
    if let Some(v) = spec.strip_prefix("bangbang:") {
        let threshold = v
            .parse::<f64>()
            .map_err(|e| CliError::Validation(format!("control `{spec}`: {e}")))?;
        return Ok(Box::new(move |_, path: &[f64]| {
            let level = path.last().copied().unwrap_or(0.0);
            if level < threshold {
                sigma_hi
            } else {
                sigma_lo
            }
        }));
    }
    if let Some(v) = spec.strip_prefix("hash:") {
        let salt = v
            .parse::<u64>()
            .map_err(|e| CliError::Validation(format!("control `{spec}`: {e}")))?;
        return Ok(Box::new(move |step, path: &[f64]| {
            let mut z = salt ^ (step as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
            if let Some(&last) = path.last() {
                z ^= last.to_bits();
            }
            z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
            let u = ((z ^ (z >> 31)) >> 11) as f64 / (1u64 << 53) as f64;
            sigma_lo + (sigma_hi - sigma_lo) * u
        }));
    }
    Err(CliError::Validation(format!("unknown control `{spec}`")))
}
