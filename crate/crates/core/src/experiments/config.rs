use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::assembly::{sample_domains, IntegrationDomain};
use crate::error::{Error, Result};
use crate::field::Field2D;
use crate::ks::{simulate_ks, SimulationConfig};
use crate::regression::{ColumnScaling, DEFAULT_GAMMA};
use crate::terms::{CoefficientBasis, MonomialTerm};
use crate::weights::{enumerate_weight_set, WeightSpec};

use super::ensemble::Truth;

/// Where the unprocessed field comes from. With neither set, the default
/// simulation is used.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataSource {
    pub simulation: Option<SimulationConfig>,
    pub file: Option<PathBuf>,
}

/// Loads or simulates the field before striding and cropping.
pub fn load_base_field(source: &DataSource) -> Result<Field2D> {
    match (&source.simulation, &source.file) {
        (Some(_), Some(_)) => Err(Error::invalid(
            "data: give either a simulation or a file, not both",
        )),
        (None, Some(path)) => Field2D::load(path),
        (Some(sim), None) => simulate_ks(sim),
        (None, None) => simulate_ks(&SimulationConfig::default()),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BasisSpec {
    SinX { freq: f64 },
    CosX { freq: f64 },
    /// Ascending powers of `x`.
    PolyX { coeffs: Vec<f64> },
    /// Ascending powers of `t`.
    PolyT { coeffs: Vec<f64> },
}

impl BasisSpec {
    fn to_basis(&self) -> CoefficientBasis {
        match self {
            BasisSpec::SinX { freq } => CoefficientBasis::sin_x(&format!("sin({freq}x)"), *freq),
            BasisSpec::CosX { freq } => CoefficientBasis::cos_x(&format!("cos({freq}x)"), *freq),
            BasisSpec::PolyX { coeffs } => CoefficientBasis::poly_x(&format!("px{coeffs:?}"), coeffs.clone()),
            BasisSpec::PolyT { coeffs } => CoefficientBasis::poly_t(&format!("pt{coeffs:?}"), coeffs.clone()),
        }
    }
}

fn one() -> f64 {
    1.0
}

/// `prefactor · g · ∂_t^nu_t ∂_x^nu_x (u^power)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    pub label: String,
    #[serde(default = "one")]
    pub prefactor: f64,
    pub power: u32,
    #[serde(default)]
    pub nu_x: u32,
    #[serde(default)]
    pub nu_t: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis: Option<BasisSpec>,
}

impl TermSpec {
    pub fn to_term(&self) -> Result<MonomialTerm> {
        let t = MonomialTerm::new(self.prefactor, self.power, self.nu_x, self.nu_t, &self.label)?;
        Ok(match &self.basis {
            Some(b) => t.with_basis(b.to_basis()),
            None => t,
        })
    }

    pub fn ks_library() -> Vec<TermSpec> {
        crate::terms::default_ks_library()
            .into_iter()
            .map(|t| TermSpec {
                label: t.label,
                prefactor: t.prefactor,
                power: t.power,
                nu_x: t.nu_x,
                nu_t: t.nu_t,
                basis: None,
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WeightConfig {
    pub alpha: u32,
    pub beta: u32,
    pub l: u32,
    pub m: u32,
}

impl Default for WeightConfig {
    fn default() -> Self {
        WeightConfig { alpha: 8, beta: 8, l: 1, m: 2 }
    }
}

impl WeightConfig {
    pub fn weight_set(&self) -> Vec<WeightSpec> {
        enumerate_weight_set(self.alpha, self.beta, self.l, self.m)
    }

    pub fn count(&self) -> usize {
        (if self.l > 0 { 2 } else { 1 }) * (if self.m > 0 { 2 } else { 1 })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruthTerm {
    pub term: String,
    pub value: f64,
}

/// Everything needed to replay an ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub data: DataSource,
    /// Strides applied to the base field (4 and 4 turn the default
    /// simulation output into `δ_x ≈ 0.196`, `δ_t = 1`).
    pub stride_x: usize,
    pub stride_t: usize,
    /// Physical extents `L_x`, `L_t` to crop the strided field to.
    pub crop_x: Option<f64>,
    pub crop_t: Option<f64>,
    /// Noise standard deviation in units of the field's sample deviation.
    pub sigma: f64,
    pub library: Vec<TermSpec>,
    pub weights: WeightConfig,
    /// Integration-domain sizes `F_x`, `F_t`; rounded to whole grid cells.
    pub domain_width_x: f64,
    pub domain_width_t: f64,
    pub domain_count: usize,
    pub gamma: f64,
    pub column_scaling: ColumnScaling,
    pub ensemble_size: usize,
    pub master_seed: u64,
    pub truth: Vec<TruthTerm>,
    pub reference_term: String,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            data: DataSource::default(),
            stride_x: 4,
            stride_t: 4,
            crop_x: None,
            crop_t: None,
            sigma: 0.03,
            library: TermSpec::ks_library(),
            weights: WeightConfig::default(),
            domain_width_x: 14.73,
            domain_width_t: 75.0,
            domain_count: 50,
            gamma: DEFAULT_GAMMA,
            column_scaling: ColumnScaling::Raw,
            ensemble_size: 100,
            master_seed: 0,
            truth: ["u_t", "u*u_x", "u_xx", "u_xxxx"]
                .iter()
                .map(|t| TruthTerm { term: t.to_string(), value: 1.0 })
                .collect(),
            reference_term: "u_t".into(),
        }
    }
}

impl ExperimentConfig {
    /// Checks everything that does not need the data.
    pub fn validate(&self) -> Result<()> {
        if self.ensemble_size == 0 {
            return Err(Error::invalid("ensemble_size must be at least 1"));
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(Error::invalid(format!("sigma must be non-negative, got {}", self.sigma)));
        }
        if !(self.gamma > 1.0 && self.gamma.is_finite()) {
            return Err(Error::invalid(format!("gamma must be > 1, got {}", self.gamma)));
        }
        if self.stride_x == 0 || self.stride_t == 0 {
            return Err(Error::invalid("stride_x and stride_t must be at least 1"));
        }
        if self.domain_count == 0 {
            return Err(Error::invalid("domain_count must be at least 1"));
        }
        for (name, v) in [("domain_width_x", self.domain_width_x), ("domain_width_t", self.domain_width_t)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("{name} must be positive, got {v}")));
            }
        }
        for (name, v) in [("crop_x", self.crop_x), ("crop_t", self.crop_t)] {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(Error::invalid(format!("{name} must be positive, got {v}")));
                }
            }
        }
        if let Some(sim) = &self.data.simulation {
            sim.validate()?;
        }
        let terms = self.terms()?;
        for w in self.weights.weight_set() {
            for t in &terms {
                w.check_orders(t.nu_x, t.nu_t).map_err(|e| {
                    Error::precondition(format!("term '{}' with weight {}: {e}", t.label, w.label()))
                })?;
            }
        }
        self.truth()?;
        Ok(())
    }

    pub fn terms(&self) -> Result<Vec<MonomialTerm>> {
        if self.library.is_empty() {
            return Err(Error::invalid("library is empty"));
        }
        let mut seen = std::collections::HashSet::new();
        for t in &self.library {
            if !seen.insert(t.label.as_str()) {
                return Err(Error::invalid(format!("duplicate library label '{}'", t.label)));
            }
        }
        self.library.iter().map(TermSpec::to_term).collect()
    }

    pub fn labels(&self) -> Vec<String> {
        self.library.iter().map(|t| t.label.clone()).collect()
    }

    fn term_index(&self, label: &str) -> Result<usize> {
        self.library
            .iter()
            .position(|t| t.label == label)
            .ok_or_else(|| Error::invalid(format!("term '{label}' is not in the library")))
    }

    pub fn truth(&self) -> Result<Truth> {
        let mut coefficients = Vec::new();
        for t in &self.truth {
            if !(t.value.is_finite() && t.value != 0.0) {
                return Err(Error::invalid(format!(
                    "true coefficient of '{}' must be finite and nonzero",
                    t.term
                )));
            }
            coefficients.push((self.term_index(&t.term)?, t.value));
        }
        Truth::new(coefficients, self.term_index(&self.reference_term)?)
    }

    /// Strides then crops the base field.
    pub fn prepare_field(&self, base: &Field2D) -> Result<Field2D> {
        let f = base.downsample(self.stride_x, self.stride_t)?;
        if self.crop_x.is_none() && self.crop_t.is_none() {
            return Ok(f);
        }
        let ex = self.crop_x.unwrap_or(f.extent_x());
        let et = self.crop_t.unwrap_or(f.extent_t());
        f.crop_extent(ex, et)
    }

    /// Half-widths in grid cells closest to the configured physical widths.
    pub fn half_cells(&self, field: &Field2D) -> Result<(usize, usize)> {
        let hx = (self.domain_width_x / (2.0 * field.delta_x())).round() as usize;
        let ht = (self.domain_width_t / (2.0 * field.delta_t())).round() as usize;
        if hx < 2 || ht < 2 {
            return Err(Error::invalid(format!(
                "integration domain {}x{} spans fewer than 2 half-cells on this grid",
                self.domain_width_x, self.domain_width_t
            )));
        }
        if 2 * hx + 1 > field.n_x() || 2 * ht + 1 > field.n_t() {
            return Err(Error::invalid(format!(
                "integration domain {}x{} does not fit the {}x{} data",
                self.domain_width_x,
                self.domain_width_t,
                field.extent_x(),
                field.extent_t()
            )));
        }
        Ok((hx, ht))
    }

    pub fn domains(&self, field: &Field2D, seed: u64) -> Result<Vec<IntegrationDomain>> {
        let (hx, ht) = self.half_cells(field)?;
        sample_domains(self.domain_count, hx, ht, field.n_x(), field.n_t(), seed)
    }

    /// Number of library rows `K`.
    pub fn rows(&self) -> usize {
        self.domain_count * self.weights.count()
    }
}
