use std::path::Path;

use weakpde::experiments::ExperimentConfig;

use crate::error::{io_at, CliError, CliResult};
use crate::output::RunManifest;
use crate::Common;

/// Reads a TOML config, or the config snapshot of a `.json` run manifest.
/// Without a path the reference configuration is used.
pub fn load(path: Option<&Path>) -> CliResult<ExperimentConfig> {
    let Some(path) = path else {
        return Ok(ExperimentConfig::default());
    };
    let text = std::fs::read_to_string(path).map_err(io_at(path))?;
    if path.extension().is_some_and(|e| e == "json") {
        let m: RunManifest = serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        return Ok(m.config);
    }
    toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

/// Config file with command-line overrides applied, validated.
pub fn resolve(common: &Common) -> CliResult<ExperimentConfig> {
    let mut c = load(common.config.as_deref())?;
    if let Some(f) = &common.field {
        c.data.file = Some(f.clone());
        c.data.simulation = None;
    }
    set(&mut c.stride_x, common.stride_x);
    set(&mut c.stride_t, common.stride_t);
    set(&mut c.sigma, common.sigma);
    set(&mut c.gamma, common.gamma);
    set(&mut c.master_seed, common.seed);
    set(&mut c.domain_count, common.domains);
    set(&mut c.domain_width_x, common.width_x);
    set(&mut c.domain_width_t, common.width_t);
    if let Some(ab) = common.alpha_beta {
        c.weights.alpha = ab;
        c.weights.beta = ab;
    }
    set(&mut c.weights.l, common.l);
    set(&mut c.weights.m, common.m);
    c.validate()?;
    Ok(c)
}

fn set<T>(target: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *target = v;
    }
}

/// `a,b,c` or `start:stop:count` (inclusive, evenly spaced).
pub fn parse_values(spec: &str) -> CliResult<Vec<f64>> {
    let bad = |what: &str| CliError::Config(format!("--values '{spec}': {what}"));
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad(&format!("'{}' is not a number", s.trim())));
    if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        if parts.len() != 3 {
            return Err(bad("ranges are written start:stop:count"));
        }
        let (a, b) = (num(parts[0])?, num(parts[1])?);
        let n: usize = parts[2].trim().parse().map_err(|_| bad("count must be a whole number"))?;
        if n < 2 {
            return Err(bad("a range needs a count of at least 2"));
        }
        return Ok((0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect());
    }
    let v: Vec<f64> = spec.split(',').map(num).collect::<CliResult<_>>()?;
    if v.iter().any(|x| !x.is_finite()) {
        return Err(bad("values must be finite"));
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn value_lists() {
        assert_eq!(parse_values("1.1, 1.2,2").unwrap(), vec![1.1, 1.2, 2.0]);
        assert_eq!(parse_values("1:2:3").unwrap(), vec![1.0, 1.5, 2.0]);
        assert!(parse_values("1:2").is_err());
        assert!(parse_values("1:2:1").is_err());
        assert!(parse_values("a,b").is_err());
        assert!(parse_values("").is_err());
    }

    #[test]
    fn overrides_apply() {
        let common = Common {
            sigma: Some(1.0),
            alpha_beta: Some(6),
            m: Some(0),
            ..Common::default()
        };
        let c = resolve(&common).unwrap();
        assert_eq!(c.sigma, 1.0);
        assert_eq!((c.weights.alpha, c.weights.beta, c.weights.m), (6, 6, 0));
        assert_eq!(c.gamma, ExperimentConfig::default().gamma);
    }

    #[test]
    fn invalid_override_is_a_config_error() {
        let common = Common { gamma: Some(0.5), ..Common::default() };
        assert!(matches!(resolve(&common), Err(CliError::Config(_))));
    }

    #[test]
    fn toml_round_trip() {
        let c = ExperimentConfig::default();
        let text = toml::to_string(&c).unwrap();
        assert_eq!(toml::from_str::<ExperimentConfig>(&text).unwrap(), c);
    }
}
