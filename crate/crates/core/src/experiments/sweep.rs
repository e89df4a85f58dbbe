use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::Field2D;

use super::config::{load_base_field, ExperimentConfig};
use super::ensemble::{run_ensemble_on, EnsembleResult};

/// A parameter that a sweep varies while everything else stays fixed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepAxis {
    #[serde(rename = "sigma")]
    Sigma,
    #[serde(rename = "gamma")]
    Gamma,
    /// Common stride applied to both axes of the base field.
    #[serde(rename = "resolution")]
    Resolution,
    /// Library rows; the domain count becomes `round(K / weights)`.
    #[serde(rename = "K")]
    Rows,
    #[serde(rename = "F_x")]
    DomainWidthX,
    #[serde(rename = "F_t")]
    DomainWidthT,
    #[serde(rename = "L_x")]
    ExtentX,
    #[serde(rename = "L_t")]
    ExtentT,
    #[serde(rename = "l")]
    L,
    #[serde(rename = "m")]
    M,
    /// Sets `α = β`.
    #[serde(rename = "alpha_beta")]
    AlphaBeta,
}

impl SweepAxis {
    pub const ALL: [SweepAxis; 11] = [
        SweepAxis::Sigma,
        SweepAxis::Gamma,
        SweepAxis::Resolution,
        SweepAxis::Rows,
        SweepAxis::DomainWidthX,
        SweepAxis::DomainWidthT,
        SweepAxis::ExtentX,
        SweepAxis::ExtentT,
        SweepAxis::L,
        SweepAxis::M,
        SweepAxis::AlphaBeta,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            SweepAxis::Sigma => "sigma",
            SweepAxis::Gamma => "gamma",
            SweepAxis::Resolution => "resolution",
            SweepAxis::Rows => "K",
            SweepAxis::DomainWidthX => "F_x",
            SweepAxis::DomainWidthT => "F_t",
            SweepAxis::ExtentX => "L_x",
            SweepAxis::ExtentT => "L_t",
            SweepAxis::L => "l",
            SweepAxis::M => "m",
            SweepAxis::AlphaBeta => "alpha_beta",
        }
    }

    /// `config` with this parameter set to `value`. Changing `l` or `m`
    /// rescales the domain count so that the number of rows stays the same.
    pub fn apply(&self, config: &ExperimentConfig, value: f64) -> Result<ExperimentConfig> {
        let mut c = config.clone();
        let name = self.name();
        let whole = |v: f64, min: f64| -> Result<u32> {
            if v.fract() != 0.0 || v < min || v > u32::MAX as f64 {
                return Err(Error::invalid(format!(
                    "sweep over {name} needs whole numbers >= {min}, got {v}"
                )));
            }
            Ok(v as u32)
        };
        match self {
            SweepAxis::Sigma => c.sigma = value,
            SweepAxis::Gamma => c.gamma = value,
            SweepAxis::Resolution => {
                let s = whole(value, 1.0)? as usize;
                c.stride_x = s;
                c.stride_t = s;
            }
            SweepAxis::Rows => {
                if !(value >= 1.0) {
                    return Err(Error::invalid(format!("K must be at least 1, got {value}")));
                }
                c.domain_count = ((value / c.weights.count() as f64).round() as usize).max(1);
            }
            SweepAxis::DomainWidthX => c.domain_width_x = value,
            SweepAxis::DomainWidthT => c.domain_width_t = value,
            SweepAxis::ExtentX => c.crop_x = Some(value),
            SweepAxis::ExtentT => c.crop_t = Some(value),
            SweepAxis::L | SweepAxis::M => {
                let rows = config.rows();
                let v = whole(value, 0.0)?;
                if *self == SweepAxis::L {
                    c.weights.l = v;
                } else {
                    c.weights.m = v;
                }
                c.domain_count = (rows / c.weights.count()).max(1);
            }
            SweepAxis::AlphaBeta => {
                let v = whole(value, 1.0)?;
                c.weights.alpha = v;
                c.weights.beta = v;
            }
        }
        c.validate()?;
        Ok(c)
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SweepAxis::ALL
            .iter()
            .find(|a| a.name().eq_ignore_ascii_case(s))
            .copied()
            .ok_or_else(|| {
                let valid: Vec<&str> = SweepAxis::ALL.iter().map(|a| a.name()).collect();
                Error::invalid(format!(
                    "unknown sweep axis '{s}'; valid axes: {}",
                    valid.join(", ")
                ))
            })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: f64,
    pub result: EnsembleResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub axis: SweepAxis,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    /// Mean `Δc` of `label` at each value; `None` where no trial had the
    /// exact support.
    pub fn means(&self, label: &str) -> Vec<(f64, Option<f64>)> {
        self.rows
            .iter()
            .map(|r| (r.value, r.result.term(label).and_then(|s| s.mean)))
            .collect()
    }

    /// One row per (value, true term): value, term, mean Δc, CI half-width,
    /// p_spurious, p_missing, M. Missing numbers are written as `NaN`.
    pub fn write_csv(&self, out: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
        w.write_record([
            self.axis.name(),
            "term",
            "mean_delta_c",
            "ci_half_width",
            "p_spurious",
            "p_missing",
            "M",
        ])
        .map_err(io)?;
        let sci = |v: Option<f64>| match v {
            Some(v) => format!("{v:e}"),
            None => "NaN".to_string(),
        };
        for row in &self.rows {
            for s in &row.result.summary {
                w.write_record([
                    format!("{:e}", row.value),
                    s.label.clone(),
                    sci(s.mean),
                    sci(s.ci_half_width),
                    format!("{:e}", row.result.p_spurious),
                    format!("{:e}", row.result.p_missing),
                    row.result.size().to_string(),
                ])
                .map_err(io)?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Loads the data once and runs one ensemble per value.
pub fn sweep(config: &ExperimentConfig, axis: SweepAxis, values: &[f64]) -> Result<SweepTable> {
    config.validate()?;
    let base = load_base_field(&config.data)?;
    sweep_on(config, &base, axis, values)
}

pub fn sweep_on(
    config: &ExperimentConfig,
    base: &Field2D,
    axis: SweepAxis,
    values: &[f64],
) -> Result<SweepTable> {
    if values.is_empty() {
        return Err(Error::invalid("sweep needs at least one value"));
    }
    // validate every point before spending time on any of them
    let configs: Vec<ExperimentConfig> = values
        .iter()
        .map(|&v| axis.apply(config, v))
        .collect::<Result<_>>()?;
    let rows = configs
        .iter()
        .zip(values)
        .map(|(c, &value)| {
            Ok(SweepRow {
                value,
                result: run_ensemble_on(c, base)?,
            })
        })
        .collect::<Result<_>>()?;
    Ok(SweepTable { axis, rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_every_axis() {
        for a in SweepAxis::ALL {
            assert_eq!(a.name().parse::<SweepAxis>().unwrap(), a);
        }
        assert_eq!("k".parse::<SweepAxis>().unwrap(), SweepAxis::Rows);
    }

    #[test]
    fn unknown_axis_lists_valid_ones() {
        let e = "delta".parse::<SweepAxis>().unwrap_err().to_string();
        assert!(e.contains("delta"));
        for a in SweepAxis::ALL {
            assert!(e.contains(a.name()), "{e}");
        }
    }

    #[test]
    fn zero_frequency_keeps_rows() {
        let c = ExperimentConfig::default();
        assert_eq!(c.rows(), 200);
        let l0 = SweepAxis::L.apply(&c, 0.0).unwrap();
        assert_eq!((l0.domain_count, l0.rows()), (100, 200));
        let both = SweepAxis::M.apply(&l0, 0.0).unwrap();
        assert_eq!((both.domain_count, both.rows()), (200, 200));
        let back = SweepAxis::L.apply(&both, 3.0).unwrap();
        assert_eq!(back.rows(), 200);
    }

    #[test]
    fn rows_axis() {
        let c = SweepAxis::Rows.apply(&ExperimentConfig::default(), 800.0).unwrap();
        assert_eq!(c.domain_count, 200);
    }

    #[test]
    fn invalid_values_rejected() {
        let c = ExperimentConfig::default();
        assert!(SweepAxis::Resolution.apply(&c, 1.5).is_err());
        assert!(SweepAxis::L.apply(&c, -1.0).is_err());
        assert!(SweepAxis::Gamma.apply(&c, 0.9).is_err());
        assert!(SweepAxis::AlphaBeta.apply(&c, 3.0).is_err());
        assert!(SweepAxis::Sigma.apply(&c, -0.1).is_err());
    }
}
