//! Homogeneous constrained least squares `min ‖Qc‖, ‖c‖ = 1` and greedy
//! elimination of weak terms.

use nalgebra::{DMatrix, DVector, SVD};
use serde::{Deserialize, Serialize};

use crate::assembly::LibraryMatrix;
use crate::error::{Error, Result};

/// Default sparsification parameter.
pub const DEFAULT_GAMMA: f64 = 1.4;

/// Relative gap between the two smallest singular values below which the
/// minimiser is reported as non-unique.
const DEGENERACY_GAP: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct NullVector {
    /// Unit right singular vector for the smallest singular value; its
    /// largest-magnitude entry is positive.
    pub coefficients: DVector<f64>,
    /// `‖Qc‖`
    pub eta: f64,
    pub smallest_singular_value: f64,
    pub degenerate: bool,
}

pub fn min_singular_vector(q: &DMatrix<f64>) -> Result<NullVector> {
    let (k, n) = q.shape();
    if n == 0 {
        return Err(Error::invalid("library has no columns"));
    }
    if k < n {
        return Err(Error::invalid(format!(
            "need at least as many rows as columns, got {k}x{n}"
        )));
    }
    if q.iter().any(|v| !v.is_finite()) {
        return Err(Error::numerical("library matrix has non-finite entries"));
    }
    let svd = SVD::new(q.clone(), false, true);
    let v_t = svd
        .v_t
        .ok_or_else(|| Error::numerical("SVD did not return right singular vectors"))?;
    let s = &svd.singular_values;
    let mut imin = 0;
    for i in 1..s.len() {
        if s[i] < s[imin] {
            imin = i;
        }
    }
    let smax = s.iter().cloned().fold(0.0, f64::max);
    let second = (0..s.len())
        .filter(|&i| i != imin)
        .map(|i| s[i])
        .fold(f64::INFINITY, f64::min);
    let degenerate = second.is_finite() && second - s[imin] <= DEGENERACY_GAP * smax;

    let mut c: DVector<f64> = v_t.row(imin).transpose();
    c /= c.norm();
    let lead = c.iter().cloned().fold(0.0f64, |a, v| if v.abs() > a.abs() { v } else { a });
    if lead < 0.0 {
        c.neg_mut();
    }
    let eta = (q * &c).norm();
    Ok(NullVector {
        coefficients: c,
        eta,
        smallest_singular_value: s[imin],
        degenerate,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EliminationStep {
    /// Library column index of the candidate.
    pub term: usize,
    pub eta_before: f64,
    pub eta_after: f64,
    pub committed: bool,
}

/// Result of sparsification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseModel {
    /// Surviving library column indices, ascending.
    pub active_terms: Vec<usize>,
    /// Coefficients in the library's own scaling, aligned with
    /// `active_terms`, unit Euclidean norm.
    pub coefficients: Vec<f64>,
    /// Residual `‖Qc‖` of the final model, on the scaled columns.
    pub residual: f64,
    pub trace: Vec<EliminationStep>,
    pub warnings: Vec<String>,
}

impl SparseModel {
    pub fn coefficient_of(&self, term: usize) -> Option<f64> {
        self.active_terms
            .iter()
            .position(|&t| t == term)
            .map(|i| self.coefficients[i])
    }

    pub fn contains(&self, term: usize) -> bool {
        self.active_terms.contains(&term)
    }
}

fn select_columns(q: &DMatrix<f64>, cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(q.nrows(), cols.len(), |i, j| q[(i, cols[j])])
}

/// How library columns are scaled before each SVD.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnScaling {
    /// Columns as assembled; the importance of term `n` is `|c_n|`.
    #[default]
    Raw,
    /// Columns scaled to unit norm; the importance is `|ĉ_n| = ‖c_n q_n‖`,
    /// which does not change when a single column is rescaled.
    UnitNorm,
}

/// Greedy elimination: repeatedly drop the term of smallest importance
/// `‖c_n q_n‖/‖q_n‖` while the residual grows by at most a factor `gamma`.
pub fn iterative_elimination(
    library: &LibraryMatrix,
    gamma: f64,
    scaling: ColumnScaling,
) -> Result<SparseModel> {
    if !(gamma > 1.0) || !gamma.is_finite() {
        return Err(Error::invalid(format!("gamma must be > 1, got {gamma}")));
    }
    let q = &library.entries;
    if q.ncols() == 0 {
        return Err(Error::invalid("empty library"));
    }
    let norms: Vec<f64> = match scaling {
        ColumnScaling::Raw => vec![1.0; q.ncols()],
        ColumnScaling::UnitNorm => q.column_iter().map(|c| c.norm()).collect(),
    };
    let mut unit = q.clone();
    for (j, &nrm) in norms.iter().enumerate() {
        if nrm > 0.0 {
            unit.column_mut(j).unscale_mut(nrm);
        }
    }

    let mut warnings = Vec::new();
    let mut solve = |cols: &[usize]| -> Result<NullVector> {
        let sol = min_singular_vector(&select_columns(&unit, cols))?;
        if sol.degenerate {
            warnings.push(format!(
                "smallest singular value is degenerate on columns {cols:?}"
            ));
        }
        Ok(sol)
    };

    let mut active: Vec<usize> = (0..q.ncols()).collect();
    let mut current = solve(&active)?;
    let mut trace = Vec::new();
    while active.len() > 1 {
        let mut weakest = 0;
        for i in 1..active.len() {
            if current.coefficients[i].abs() < current.coefficients[weakest].abs() {
                weakest = i;
            }
        }
        let mut reduced = active.clone();
        let term = reduced.remove(weakest);
        let candidate = solve(&reduced)?;
        let committed = candidate.eta <= gamma * current.eta;
        trace.push(EliminationStep {
            term,
            eta_before: current.eta,
            eta_after: candidate.eta,
            committed,
        });
        if !committed {
            break;
        }
        active = reduced;
        current = candidate;
    }

    let mut coefficients: Vec<f64> = active
        .iter()
        .zip(current.coefficients.iter())
        .map(|(&col, &c)| if norms[col] > 0.0 { c / norms[col] } else { c })
        .collect();
    let nrm = coefficients.iter().map(|c| c * c).sum::<f64>().sqrt();
    let lead = coefficients
        .iter()
        .cloned()
        .fold(0.0f64, |a, v| if v.abs() > a.abs() { v } else { a });
    let sign = if lead < 0.0 { -1.0 } else { 1.0 };
    coefficients.iter_mut().for_each(|c| *c *= sign / nrm);

    Ok(SparseModel {
        active_terms: active,
        coefficients,
        residual: current.eta,
        trace,
        warnings,
    })
}

/// Coefficients divided by the coefficient of `reference`, aligned with
/// `model.active_terms`.
pub fn normalize_to_term(model: &SparseModel, reference: usize) -> Result<Vec<f64>> {
    let c_ref = model.coefficient_of(reference).ok_or_else(|| {
        Error::numerical(format!(
            "reference term {reference} was eliminated; the model cannot be written as an evolution equation in it"
        ))
    })?;
    if c_ref.abs() <= 1e-12 {
        return Err(Error::numerical(format!(
            "reference term {reference} has a vanishing coefficient ({c_ref:e})"
        )));
    }
    Ok(model.coefficients.iter().map(|c| c / c_ref).collect())
}

/// `u_t + 1.000 u*u_x - 0.500 u_xx = 0` style rendering.
pub fn equation_string(model: &SparseModel, labels: &[String], reference: usize) -> Result<String> {
    let scaled = normalize_to_term(model, reference)?;
    let mut out = String::new();
    for (i, (&term, c)) in model.active_terms.iter().zip(&scaled).enumerate() {
        let label = &labels[term];
        if term == reference {
            if i > 0 {
                out.push_str(" + ");
            }
            out.push_str(label);
            continue;
        }
        if i == 0 {
            out.push_str(&format!("{c:.6} {label}"));
        } else if *c < 0.0 {
            out.push_str(&format!(" - {:.6} {label}", -c));
        } else {
            out.push_str(&format!(" + {c:.6} {label}"));
        }
    }
    out.push_str(" = 0");
    Ok(out)
}
