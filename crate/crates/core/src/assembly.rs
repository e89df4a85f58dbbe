//! Integration domains, composite trapezoidal quadrature and assembly of the
//! library matrix `Q`.
//!
//! Row `(k, j)` of `Q` integrates every candidate term against weight `j` on
//! domain `Ω_k`; after integration by parts the integrand of column `n` is
//! `a_n · u^p · ∂_x^νx ∂_t^νt (g·w_j)`, so only powers of the data are needed.

use std::fmt::Write as _;
use std::io::Write;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::Field2D;
use crate::terms::{canonical_weak_form, MonomialTerm, WeakTerm};
use crate::weights::{factor_values, TrigPoly, WeightSpec};

/// Grid-aligned rectangle spanning `2·half_cells + 1` points per axis around
/// a center grid point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IntegrationDomain {
    pub center_ix: usize,
    pub center_it: usize,
    pub half_cells_x: usize,
    pub half_cells_t: usize,
}

impl IntegrationDomain {
    pub fn new(center_ix: usize, center_it: usize, half_cells_x: usize, half_cells_t: usize) -> Self {
        IntegrationDomain {
            center_ix,
            center_it,
            half_cells_x,
            half_cells_t,
        }
    }

    pub fn fits(&self, n_x: usize, n_t: usize) -> bool {
        self.center_ix >= self.half_cells_x
            && self.center_it >= self.half_cells_t
            && self.center_ix + self.half_cells_x < n_x
            && self.center_it + self.half_cells_t < n_t
    }

    pub fn start_x(&self) -> usize {
        self.center_ix - self.half_cells_x
    }

    pub fn start_t(&self) -> usize {
        self.center_it - self.half_cells_t
    }

    pub fn len_x(&self) -> usize {
        2 * self.half_cells_x + 1
    }

    pub fn len_t(&self) -> usize {
        2 * self.half_cells_t + 1
    }

    /// `H_x`
    pub fn half_width_x(&self, delta_x: f64) -> f64 {
        self.half_cells_x as f64 * delta_x
    }

    /// `H_t`
    pub fn half_width_t(&self, delta_t: f64) -> f64 {
        self.half_cells_t as f64 * delta_t
    }

    /// `F_x = 2H_x`
    pub fn width_x(&self, delta_x: f64) -> f64 {
        2.0 * self.half_width_x(delta_x)
    }

    /// `F_t = 2H_t`
    pub fn width_t(&self, delta_t: f64) -> f64 {
        2.0 * self.half_width_t(delta_t)
    }
}

/// Draws `count` domain centers uniformly over all placements that keep the
/// domain inside an `n_x × n_t` grid. Domains may overlap.
pub fn sample_domains(
    count: usize,
    half_cells_x: usize,
    half_cells_t: usize,
    n_x: usize,
    n_t: usize,
    seed: u64,
) -> Result<Vec<IntegrationDomain>> {
    if half_cells_x < 2 || half_cells_t < 2 {
        return Err(Error::invalid(format!(
            "domains need at least 2 half-cells per axis, got ({half_cells_x}, {half_cells_t})"
        )));
    }
    if 2 * half_cells_x + 1 > n_x || 2 * half_cells_t + 1 > n_t {
        return Err(Error::invalid(format!(
            "domain of {}x{} points does not fit in the {n_x}x{n_t} grid",
            2 * half_cells_x + 1,
            2 * half_cells_t + 1
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..count)
        .map(|_| {
            let cx = rng.random_range(half_cells_x..=n_x - 1 - half_cells_x);
            let ct = rng.random_range(half_cells_t..=n_t - 1 - half_cells_t);
            IntegrationDomain::new(cx, ct, half_cells_x, half_cells_t)
        })
        .collect())
}

/// Tensor-product composite trapezoidal rule on a uniform grid.
pub fn trapezoid_2d(values: &DMatrix<f64>, delta_x: f64, delta_t: f64) -> Result<f64> {
    let (nx, nt) = values.shape();
    if nx < 2 || nt < 2 {
        return Err(Error::invalid(format!(
            "trapezoidal rule needs at least 2x2 samples, got {nx}x{nt}"
        )));
    }
    let wx = trapezoid_weights(nx, delta_x);
    let wt = trapezoid_weights(nt, delta_t);
    let mut sum = 0.0;
    for j in 0..nt {
        let mut col = 0.0;
        for i in 0..nx {
            col += wx[i] * values[(i, j)];
        }
        sum += wt[j] * col;
    }
    Ok(sum)
}

fn trapezoid_weights(n: usize, delta: f64) -> Vec<f64> {
    let mut w = vec![delta; n];
    w[0] *= 0.5;
    w[n - 1] *= 0.5;
    w
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowMeta {
    pub domain: usize,
    pub weight: usize,
}

/// The `K × N` library matrix with row and column provenance.
#[derive(Debug, Clone)]
pub struct LibraryMatrix {
    pub entries: DMatrix<f64>,
    pub row_meta: Vec<RowMeta>,
    pub col_meta: Vec<MonomialTerm>,
}

impl LibraryMatrix {
    pub fn from_entries(entries: DMatrix<f64>) -> Self {
        let col_meta = (0..entries.ncols())
            .map(|n| MonomialTerm {
                prefactor: 1.0,
                power: 1,
                nu_x: 0,
                nu_t: 0,
                basis: None,
                label: format!("q{n}"),
            })
            .collect();
        let row_meta = (0..entries.nrows())
            .map(|k| RowMeta { domain: k, weight: 0 })
            .collect();
        LibraryMatrix {
            entries,
            row_meta,
            col_meta,
        }
    }

    pub fn n_rows(&self) -> usize {
        self.entries.nrows()
    }

    pub fn n_cols(&self) -> usize {
        self.entries.ncols()
    }

    pub fn labels(&self) -> Vec<String> {
        self.col_meta.iter().map(|t| t.label.clone()).collect()
    }

    /// Tab-separated dump: header of term labels, then one line per row.
    pub fn write_delimited(&self, mut out: impl Write) -> Result<()> {
        let mut line = String::from("domain\tweight");
        for t in &self.col_meta {
            write!(line, "\t{}", t.label).unwrap();
        }
        writeln!(out, "{line}")?;
        for (k, meta) in self.row_meta.iter().enumerate() {
            line.clear();
            write!(line, "{}\t{}", meta.domain, meta.weight).unwrap();
            for n in 0..self.n_cols() {
                write!(line, "\t{:.17e}", self.entries[(k, n)]).unwrap();
            }
            writeln!(out, "{line}")?;
        }
        Ok(())
    }
}

/// Quadrature-weighted 1D factors of `∂^ν(g·w)` along one axis of a domain.
fn axis_vector(
    weight_factor: &TrigPoly,
    basis_factor: Option<&TrigPoly>,
    nu: u32,
    half_cells: usize,
    delta: f64,
    first_coord: f64,
) -> Vec<f64> {
    let half_width = half_cells as f64 * delta;
    let n = 2 * half_cells + 1;
    let mut v = match basis_factor {
        None => factor_values(weight_factor, nu, half_cells, half_width),
        Some(g) => {
            // Leibniz: ∂^ν(g w) = Σ C(ν,i) g^(i) w^(ν−i)
            let mut acc = vec![0.0; n];
            let mut binom = 1.0;
            for i in 0..=nu {
                let gi = g.nth_derivative(i as usize);
                let wv = factor_values(weight_factor, nu - i, half_cells, half_width);
                for (a, (s, w)) in acc.iter_mut().zip(wv.iter().enumerate()) {
                    *a += binom * gi.eval(first_coord + s as f64 * delta) * w;
                }
                binom = binom * (nu - i) as f64 / (i + 1) as f64;
            }
            acc
        }
    };
    for (w, q) in v.iter_mut().zip(trapezoid_weights(n, delta)) {
        *w *= q;
    }
    v
}

/// Builds `Q`. Row `k·J + j` pairs domain `k` with weight `j`.
pub fn assemble_library(
    field: &Field2D,
    terms: &[MonomialTerm],
    weights: &[WeightSpec],
    domains: &[IntegrationDomain],
) -> Result<LibraryMatrix> {
    if terms.is_empty() || weights.is_empty() || domains.is_empty() {
        return Err(Error::invalid("library assembly needs terms, weights and domains"));
    }
    if !field.is_finite() {
        return Err(Error::numerical("field contains non-finite values"));
    }
    let weak: Vec<WeakTerm> = terms.iter().map(canonical_weak_form).collect();
    for w in weights {
        for (t, wt) in terms.iter().zip(&weak) {
            w.check_orders(wt.nu_x, wt.nu_t).map_err(|e| {
                Error::precondition(format!("term '{}' with weight {}: {e}", t.label, w.label()))
            })?;
        }
    }
    let (hx, ht) = (domains[0].half_cells_x, domains[0].half_cells_t);
    for d in domains {
        if !d.fits(field.n_x(), field.n_t()) {
            return Err(Error::invalid(format!("domain {d:?} lies outside the grid")));
        }
        if (d.half_cells_x, d.half_cells_t) != (hx, ht) {
            return Err(Error::invalid("all domains must share one size"));
        }
    }
    let (dx, dt) = (field.delta_x(), field.delta_t());

    // Domain-independent vectors for terms without a coefficient function.
    let fixed: Vec<Vec<Option<(DVector<f64>, DVector<f64>)>>> = weights
        .iter()
        .map(|w| {
            weak.iter()
                .map(|t| {
                    t.basis.is_none().then(|| {
                        (
                            DVector::from_vec(axis_vector(&w.x_factor(), None, t.nu_x, hx, dx, 0.0)),
                            DVector::from_vec(axis_vector(&w.t_factor(), None, t.nu_t, ht, dt, 0.0)),
                        )
                    })
                })
                .collect()
        })
        .collect();

    let mut powers: Vec<u32> = weak.iter().map(|t| t.power).collect();
    powers.sort_unstable();
    powers.dedup();

    let n_w = weights.len();
    let n_terms = weak.len();
    let blocks: Vec<Vec<f64>> = domains
        .par_iter()
        .map(|d| {
            let window = field
                .values()
                .view((d.start_x(), d.start_t()), (d.len_x(), d.len_t()));
            let windows: Vec<(u32, DMatrix<f64>)> = powers
                .iter()
                .map(|&p| (p, window.map(|v| v.powi(p as i32))))
                .collect();
            let mut block = vec![0.0; n_w * n_terms];
            for (j, w) in weights.iter().enumerate() {
                for (n, t) in weak.iter().enumerate() {
                    let up = &windows.iter().find(|(p, _)| *p == t.power).unwrap().1;
                    let owned;
                    let (vx, vt) = match &fixed[j][n] {
                        Some((vx, vt)) => (vx, vt),
                        None => {
                            let g = t.basis.as_ref().unwrap();
                            owned = (
                                DVector::from_vec(axis_vector(
                                    &w.x_factor(),
                                    Some(&g.x),
                                    t.nu_x,
                                    hx,
                                    dx,
                                    field.x_at(d.start_x()),
                                )),
                                DVector::from_vec(axis_vector(
                                    &w.t_factor(),
                                    Some(&g.t),
                                    t.nu_t,
                                    ht,
                                    dt,
                                    field.t_at(d.start_t()),
                                )),
                            );
                            (&owned.0, &owned.1)
                        }
                    };
                    block[j * n_terms + n] = t.prefactor * vx.dot(&(up * vt));
                }
            }
            block
        })
        .collect();

    let mut entries = DMatrix::zeros(domains.len() * n_w, n_terms);
    let mut row_meta = Vec::with_capacity(domains.len() * n_w);
    for (k, block) in blocks.iter().enumerate() {
        for j in 0..n_w {
            let row = k * n_w + j;
            for n in 0..n_terms {
                entries[(row, n)] = block[j * n_terms + n];
            }
            row_meta.push(RowMeta { domain: k, weight: j });
        }
    }
    if entries.iter().any(|v| !v.is_finite()) {
        return Err(Error::numerical("library matrix contains non-finite entries"));
    }
    Ok(LibraryMatrix {
        entries,
        row_meta,
        col_meta: terms.to_vec(),
    })
}
