//! The scalar payoff catalogue, shared by the command-line and browser
//! frontends. Names:
//! `x2`, `identity`, `abs`, `cap` (1 - min(|x|,1)), `one_minus_abs`,
//! `d_theta:lo,hi`, `ramp_inner:a,b,eps`, `ramp_outer:a,b,eps`.

use crate::error::{Error, Result};
use crate::gheat::{inner_ramp, outer_ramp};
use crate::harness::d_theta;

pub type ScalarPayoff = Box<dyn Fn(f64) -> f64 + Send + Sync>;

fn split_args(spec: &str, expected: usize) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(',').collect();
    if parts.len() != expected {
        return Err(Error::InvalidParameter(format!(
            "expected {expected} comma-separated numbers, got `{spec}`"
        )));
    }
    parts
        .iter()
        .map(|p| {
            let t = p.trim();
            match t {
                "inf" | "+inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                _ => t.parse::<f64>().map_err(|e| Error::InvalidParameter(format!("number `{t}`: {e}"))),
            }
        })
        .collect()
}

pub fn parse_scalar(name: &str) -> Result<ScalarPayoff> {
    match name {
        "x2" | "square" => Ok(Box::new(|x| x * x)),
        "identity" | "id" => Ok(Box::new(|x| x)),
        "abs" => Ok(Box::new(|x: f64| x.abs())),
        "cap" => Ok(Box::new(|x: f64| 1.0 - x.abs().min(1.0))),
        "one_minus_abs" => Ok(Box::new(|x: f64| 1.0 - x.abs())),
        other => {
            if let Some(spec) = other.strip_prefix("d_theta:") {
                let args = split_args(spec, 2)?;
                if args[0] > args[1] {
                    return Err(Error::InvalidParameter(format!("d_theta needs lo <= hi, got `{spec}`")));
                }
                return Ok(Box::new(move |x| d_theta(x, args[0], args[1])));
            }
            if let Some(spec) = other.strip_prefix("ramp_inner:") {
                let args = split_args(spec, 3)?;
                return Ok(Box::new(inner_ramp(args[0], args[1], args[2])));
            }
            if let Some(spec) = other.strip_prefix("ramp_outer:") {
                let args = split_args(spec, 3)?;
                return Ok(Box::new(outer_ramp(args[0], args[1], args[2])));
            }
            Err(Error::InvalidParameter(format!("unknown payoff `{other}`")))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalogue_names_resolve() {
        assert_eq!(parse_scalar("x2").unwrap()(3.0), 9.0);
        assert_eq!(parse_scalar("cap").unwrap()(-0.25), 0.75);
        assert_eq!(parse_scalar("d_theta:0,1").unwrap()(1.5), 0.5);
        assert_eq!(parse_scalar("ramp_outer:-1,1,0.5").unwrap()(1.25), 0.5);
        assert_eq!(parse_scalar("ramp_inner:-inf,1,0.5").unwrap()(-100.0), 1.0);
        assert!(parse_scalar("nope").is_err());
        assert!(parse_scalar("d_theta:2,1").is_err());
    }
}
