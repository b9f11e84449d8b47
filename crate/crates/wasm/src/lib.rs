//! Browser bindings for the interactive demo page: solve the G-heat
//! equation and return the value profile, squeeze capacity brackets, and
//! run small centered-sum convergence tables. Results cross the boundary as
//! JSON strings; errors become JS exceptions carrying the library message.
//!
//! The `*_impl` functions are plain Rust so the logic is testable on the
//! host; the exported wrappers only wrap errors into `JsValue`, which exists
//! on wasm targets alone.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use gcltlab_core::harness::{clt_converge, fair_coin_singleton, heavy_tail_family, two_point_hull};
use gcltlab_core::{capacity_interval, cfl_steps, payoff, solve_g_heat, GHeatParams, MeasureSet, ThetaInterval};

#[derive(Serialize)]
struct Profile {
    xs: Vec<f64>,
    values: Vec<f64>,
    terminal: Vec<f64>,
    value_at_origin: f64,
    time_steps: usize,
}

fn gheat_profile_impl(sigma2_low: f64, sigma2_high: f64, payoff_name: &str, h: f64) -> Result<String, String> {
    let theta = ThetaInterval::new(sigma2_low, sigma2_high).map_err(|e| e.to_string())?;
    let phi = payoff::parse_scalar(payoff_name).map_err(|e| e.to_string())?;
    let defaults = GHeatParams::with_defaults(theta);
    let h = if h > 0.0 { h } else { defaults.h };
    let params = GHeatParams {
        theta,
        x_radius: defaults.x_radius,
        h,
        time_steps: cfl_steps(theta.sigma2_high(), h),
    };
    let sol = solve_g_heat(&params, &phi).map_err(|e| e.to_string())?;
    let xs: Vec<f64> = (0..sol.grid.len()).map(|j| sol.grid.x(j)).collect();
    let terminal = xs.iter().map(|&x| phi(x)).collect();
    let out = Profile {
        xs,
        values: sol.grid.values().to_vec(),
        terminal,
        value_at_origin: sol.value_at_origin,
        time_steps: params.time_steps,
    };
    Ok(serde_json::to_string(&out).expect("profile serializes"))
}

/// Solves the G-heat equation for `theta = [sigma2_low, sigma2_high]` and a
/// named payoff; returns the t = 0 value profile as JSON
/// (`{xs, values, terminal, value_at_origin, time_steps}`). Pass `h <= 0`
/// for the default spatial step.
#[wasm_bindgen]
pub fn gheat_profile(sigma2_low: f64, sigma2_high: f64, payoff_name: &str, h: f64) -> Result<String, JsValue> {
    gheat_profile_impl(sigma2_low, sigma2_high, payoff_name, h).map_err(|e| JsValue::from_str(&e))
}

#[derive(Serialize)]
struct Bracket {
    lower: f64,
    upper: f64,
    width: f64,
    epsilon: f64,
}

fn capacity_bracket_impl(sigma2_low: f64, sigma2_high: f64, a: f64, b: f64, epsilon: f64) -> Result<String, String> {
    let theta = ThetaInterval::new(sigma2_low, sigma2_high).map_err(|e| e.to_string())?;
    let bracket = capacity_interval(a, b, theta, epsilon).map_err(|e| e.to_string())?;
    let out = Bracket {
        lower: bracket.lower,
        upper: bracket.upper,
        width: bracket.width(),
        epsilon: bracket.epsilon,
    };
    Ok(serde_json::to_string(&out).expect("bracket serializes"))
}

/// Capacity bracket of `[a, b]` under the limit law for `theta`; infinite
/// endpoints are allowed. Returns JSON `{lower, upper, width, epsilon}`.
#[wasm_bindgen]
pub fn capacity_bracket(sigma2_low: f64, sigma2_high: f64, a: f64, b: f64, epsilon: f64) -> Result<String, JsValue> {
    capacity_bracket_impl(sigma2_low, sigma2_high, a, b, epsilon).map_err(|e| JsValue::from_str(&e))
}

#[derive(Serialize)]
struct CltRow {
    n: usize,
    dp_value: f64,
    limit_value: f64,
    abs_error: f64,
}

fn named_model(name: &str) -> Result<MeasureSet, String> {
    match name {
        "two_point_hull" => Ok(two_point_hull()),
        "fair_coin" => Ok(fair_coin_singleton()),
        other => {
            if let Some(k) = other.strip_prefix("heavy_tail:") {
                let k: usize = k.parse().map_err(|e| format!("truncation `{k}`: {e}"))?;
                return heavy_tail_family(k).map_err(|e| e.to_string());
            }
            Err(format!("unknown model `{other}`"))
        }
    }
}

fn clt_table_impl(model: &str, payoff_name: &str, n_list: &str, resolution: usize, h: f64) -> Result<String, String> {
    let set = named_model(model)?;
    let phi = payoff::parse_scalar(payoff_name).map_err(|e| e.to_string())?;
    let ns: Vec<usize> = n_list
        .split(',')
        .map(|p| p.trim().parse::<usize>().map_err(|e| format!("horizon `{p}`: {e}")))
        .collect::<Result<_, _>>()?;
    let rows = clt_converge(&set, &phi, &ns, resolution.max(1), if h > 0.0 { h } else { 0.02 })
        .map_err(|e| e.to_string())?;
    let out: Vec<CltRow> = rows
        .into_iter()
        .map(|r| CltRow {
            n: r.n,
            dp_value: r.dp_value,
            limit_value: r.limit_value,
            abs_error: r.abs_error,
        })
        .collect();
    Ok(serde_json::to_string(&out).expect("rows serialize"))
}

/// Centered-sum convergence table for a named model
/// (`two_point_hull`, `fair_coin`, `heavy_tail:K`), payoff, comma-separated
/// horizon list, mixture resolution, and spatial step (`<= 0` for default).
/// Returns a JSON array of `{n, dp_value, limit_value, abs_error}` rows.
#[wasm_bindgen]
pub fn clt_table(model: &str, payoff_name: &str, n_list: &str, resolution: usize, h: f64) -> Result<String, JsValue> {
    clt_table_impl(model, payoff_name, n_list, resolution, h).map_err(|e| JsValue::from_str(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profile_runs_on_the_host() {
        let text = gheat_profile_impl(0.0, 0.25, "cap", 0.02).unwrap();
        let parsed: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert!((parsed["value_at_origin"].as_f64().unwrap() - 1.0).abs() < 1e-9);
        assert_eq!(
            parsed["xs"].as_array().unwrap().len(),
            parsed["values"].as_array().unwrap().len()
        );
    }

    #[test]
    fn bracket_runs_on_the_host() {
        let text = capacity_bracket_impl(0.25, 0.25, -1.0, 1.0, 0.05).unwrap();
        let parsed: serde_json::Value = serde_json::from_str(&text).unwrap();
        let lower = parsed["lower"].as_f64().unwrap();
        let upper = parsed["upper"].as_f64().unwrap();
        assert!(lower <= 0.9545 && 0.9545 <= upper);
    }

    #[test]
    fn clt_table_runs_on_the_host() {
        let text = clt_table_impl("fair_coin", "cap", "8, 32", 1, 0.02).unwrap();
        let rows: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(rows.as_array().unwrap().len(), 2);
        assert!(rows[1]["abs_error"].as_f64().unwrap() < 0.05);
    }

    #[test]
    fn errors_cross_as_messages() {
        assert!(gheat_profile_impl(0.5, 0.25, "cap", 0.02).is_err());
        assert!(clt_table_impl("nope", "cap", "8", 1, 0.02).is_err());
        assert!(capacity_bracket_impl(0.25, 0.25, 1.0, -1.0, 0.01).is_err());
    }
}
