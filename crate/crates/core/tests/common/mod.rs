#![allow(dead_code)]

use std::sync::OnceLock;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use weakpde::assembly::{assemble_library, trapezoid_2d};
use weakpde::ks::{simulate_ks, SimulationConfig};
use weakpde::terms::default_ks_library;
use weakpde::weights::enumerate_weight_set;
use weakpde::{CoefficientBasis, Field2D, IntegrationDomain, MonomialTerm};

/// Simulator output for the default configuration, computed once per test binary.
pub fn reference_base() -> &'static Field2D {
    static BASE: OnceLock<Field2D> = OnceLock::new();
    BASE.get_or_init(|| simulate_ks(&SimulationConfig::default()).expect("reference simulation"))
}

/// The reference data at δx ≈ 0.196, δt = 1.
pub fn reference_data() -> &'static Field2D {
    static DATA: OnceLock<Field2D> = OnceLock::new();
    DATA.get_or_init(|| reference_base().downsample(4, 4).expect("downsample"))
}

/// `u = sin x cos t` on `[0, 20]²` with spacing `h`.
pub fn manufactured(h: f64) -> Field2D {
    let n = (20.0 / h).round() as usize + 1;
    Field2D::from_fn(n, n, h, h, |x, t| x.sin() * t.cos()).unwrap()
}

/// Modulation of the variable-coefficient test term.
pub fn modulation() -> CoefficientBasis {
    CoefficientBasis::sin_x("sin(x/3)", 1.0 / 3.0)
}

/// Ten KS-library terms plus `sin(x/3) ∂_x⁴u` and `cos(x/4) ∂_x²u`.
pub fn manufactured_terms() -> Vec<MonomialTerm> {
    let mut terms = default_ks_library();
    terms.push(MonomialTerm::new(1.0, 1, 4, 0, "sin*u_xxxx").unwrap().with_basis(modulation()));
    let cos = CoefficientBasis::cos_x("cos(x/4)", 0.25);
    terms.push(MonomialTerm::new(1.0, 1, 2, 0, "cos*u_xx").unwrap().with_basis(cos));
    terms
}

/// Analytic `a · g · ∂_x^νx ∂_t^νt (u^p)` of each manufactured term.
fn analytic(index: usize, x: f64, t: f64) -> f64 {
    let (s, c, st, ct) = (x.sin(), x.cos(), t.sin(), t.cos());
    match index {
        0 => -s * st,
        1 => s * c * ct * ct,
        2 => -s * ct,
        3 => s * ct,
        4 => c * ct,
        5 => -c * ct,
        6 => s * ct,
        7 => (s * ct).powi(2),
        8 => (s * ct).powi(3),
        9 => 1.0,
        10 => (x / 3.0).sin() * s * ct,
        11 => -(x / 4.0).cos() * s * ct,
        _ => unreachable!(),
    }
}

#[derive(Debug, Clone)]
pub struct ColumnCheck {
    pub label: String,
    pub weak: f64,
    pub direct: f64,
    /// `|I_h − I_2h|` of both quadratures, whichever is larger.
    pub estimate: f64,
    /// Trapezoid of the absolute integrand, for a roundoff floor.
    pub scale: f64,
}

impl ColumnCheck {
    /// `|weak − direct|` over the allowance `10·estimate + 1e-13·scale`.
    pub fn ratio(&self) -> f64 {
        (self.weak - self.direct).abs() / (10.0 * self.estimate + 1e-13 * self.scale)
    }
}

fn direct_integral(field: &Field2D, d: &IntegrationDomain, w: &weakpde::WeightSpec, term: usize) -> (f64, f64) {
    let (dx, dt) = (field.delta_x(), field.delta_t());
    let wv = w.eval_derivative(0, 0, d, dx, dt).unwrap();
    let f = DMatrix::from_fn(d.len_x(), d.len_t(), |i, j| {
        wv[(i, j)] * analytic(term, field.x_at(d.start_x() + i), field.t_at(d.start_t() + j))
    });
    (
        trapezoid_2d(&f, dx, dt).unwrap(),
        trapezoid_2d(&f.abs(), dx, dt).unwrap(),
    )
}

/// Weak columns of the manufactured field against direct quadrature of the
/// analytic integrand, for every (domain, weight, term).
pub fn manufactured_column_checks() -> Vec<ColumnCheck> {
    let h = 0.05;
    let fine = manufactured(h);
    let coarse = fine.downsample(2, 2).unwrap();
    let terms = manufactured_terms();
    let weights = enumerate_weight_set(8, 8, 1, 2);
    // (center x, center t) in fine-grid indices; even so the coarse grid aligns
    let centers = [(100, 100), (160, 240), (300, 120), (200, 300)];
    let (hx, ht) = (60, 80);
    let fine_domains: Vec<_> = centers.iter().map(|&(x, t)| IntegrationDomain::new(x, t, hx, ht)).collect();
    let coarse_domains: Vec<_> = centers
        .iter()
        .map(|&(x, t)| IntegrationDomain::new(x / 2, t / 2, hx / 2, ht / 2))
        .collect();
    let q = assemble_library(&fine, &terms, &weights, &fine_domains).unwrap();
    let q2 = assemble_library(&coarse, &terms, &weights, &coarse_domains).unwrap();
    let mut out = Vec::new();
    for (k, (df, dc)) in fine_domains.iter().zip(&coarse_domains).enumerate() {
        for (j, w) in weights.iter().enumerate() {
            let row = k * weights.len() + j;
            for (n, term) in terms.iter().enumerate() {
                let (direct, scale) = direct_integral(&fine, df, w, n);
                let (direct2, _) = direct_integral(&coarse, dc, w, n);
                let weak = q.entries[(row, n)];
                let weak2 = q2.entries[(row, n)];
                out.push(ColumnCheck {
                    label: term.label.clone(),
                    weak,
                    direct,
                    estimate: (direct - direct2).abs().max((weak - weak2).abs()),
                    scale,
                });
            }
        }
    }
    out
}

/// 200×10 matrix with an exact null vector on columns 0..4, plus uniform
/// perturbations of size `noise`.
pub fn planted(seed: u64, noise: f64) -> (DMatrix<f64>, [f64; 4]) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c = [1.0, 0.7, -1.3, 0.9];
    let mut q = DMatrix::from_fn(200, 10, |_, _| rng.random_range(-1.0..1.0));
    for i in 0..200 {
        let s: f64 = (0..3).map(|j| c[j] * q[(i, j)]).sum();
        q[(i, 3)] = -s / c[3];
    }
    q.iter_mut().for_each(|v| *v += noise * rng.random_range(-1.0..1.0));
    (q, c)
}
