//! Windowed trigonometric weight functions
//! `w(x̄, t̄) = (x̄²−1)^α (t̄²−1)^β · {cos,sin}(lπx̄) · {cos,sin}(mπt̄)`
//! and their exact partial derivatives on grid points.
//!
//! Each 1D factor is a [`TrigPoly`]: `(y²−1)^z [P(y)cos(ωy) + Q(y)sin(ωy)]`.
//! Keeping the boundary factor `(y²−1)^z` separate means derivatives of order
//! below `α` vanish exactly at `y = ±1`, with no cancellation in the
//! polynomial evaluation.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::assembly::IntegrationDomain;
use crate::error::{Error, Result};

/// Dense univariate polynomial, coefficients in ascending powers.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Poly1D {
    coeffs: Vec<f64>,
}

impl Poly1D {
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        Poly1D { coeffs }
    }

    pub fn zero() -> Self {
        Poly1D { coeffs: Vec::new() }
    }

    pub fn constant(c: f64) -> Self {
        Poly1D::new(vec![c])
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, with the zero polynomial reported as 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn eval(&self, y: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * y + c)
    }

    pub fn derivative(&self) -> Poly1D {
        Poly1D::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| k as f64 * c)
                .collect(),
        )
    }

    pub fn scale(&self, a: f64) -> Poly1D {
        Poly1D::new(self.coeffs.iter().map(|c| a * c).collect())
    }

    pub fn add(&self, other: &Poly1D) -> Poly1D {
        let n = self.coeffs.len().max(other.coeffs.len());
        Poly1D::new(
            (0..n)
                .map(|k| {
                    self.coeffs.get(k).copied().unwrap_or(0.0)
                        + other.coeffs.get(k).copied().unwrap_or(0.0)
                })
                .collect(),
        )
    }

    /// Multiplies by `y`.
    pub fn shift(&self) -> Poly1D {
        if self.is_zero() {
            return Poly1D::zero();
        }
        let mut c = Vec::with_capacity(self.coeffs.len() + 1);
        c.push(0.0);
        c.extend_from_slice(&self.coeffs);
        Poly1D::new(c)
    }

    /// Multiplies by `y² − 1`.
    pub fn times_y2_minus_1(&self) -> Poly1D {
        self.shift().shift().add(&self.scale(-1.0))
    }
}

/// `(y²−1)^z · [P(y)·cos(ωy) + Q(y)·sin(ωy)]`, closed under differentiation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrigPoly {
    pub zero_order: u32,
    pub cos_part: Poly1D,
    pub sin_part: Poly1D,
    pub freq: f64,
}

impl TrigPoly {
    pub fn constant(c: f64) -> Self {
        TrigPoly {
            zero_order: 0,
            cos_part: Poly1D::constant(c),
            sin_part: Poly1D::zero(),
            freq: 0.0,
        }
    }

    pub fn polynomial(p: Poly1D) -> Self {
        TrigPoly {
            zero_order: 0,
            cos_part: p,
            sin_part: Poly1D::zero(),
            freq: 0.0,
        }
    }

    pub fn cos(freq: f64) -> Self {
        TrigPoly {
            zero_order: 0,
            cos_part: Poly1D::constant(1.0),
            sin_part: Poly1D::zero(),
            freq,
        }
    }

    pub fn sin(freq: f64) -> Self {
        TrigPoly {
            zero_order: 0,
            cos_part: Poly1D::zero(),
            sin_part: Poly1D::constant(1.0),
            freq,
        }
    }

    pub fn is_constant_one(&self) -> bool {
        self.zero_order == 0
            && self.freq == 0.0
            && self.sin_part.is_zero()
            && self.cos_part.coeffs() == [1.0]
    }

    pub fn eval(&self, y: f64) -> f64 {
        let envelope = if self.zero_order == 0 {
            1.0
        } else {
            (y * y - 1.0).powi(self.zero_order as i32)
        };
        if envelope == 0.0 {
            return 0.0;
        }
        let (s, c) = (self.freq * y).sin_cos();
        envelope * (self.cos_part.eval(y) * c + self.sin_part.eval(y) * s)
    }

    pub fn derivative(&self) -> TrigPoly {
        let w = self.freq;
        let (p, q) = (&self.cos_part, &self.sin_part);
        // trigonometric part: (P' + ωQ) cos + (Q' − ωP) sin
        let dp = p.derivative().add(&q.scale(w));
        let dq = q.derivative().add(&p.scale(-w));
        if self.zero_order == 0 {
            return TrigPoly {
                zero_order: 0,
                cos_part: dp,
                sin_part: dq,
                freq: w,
            };
        }
        // (y²−1)^z f  ->  (y²−1)^(z−1) [2zy f + (y²−1) f']
        let z2 = 2.0 * self.zero_order as f64;
        TrigPoly {
            zero_order: self.zero_order - 1,
            cos_part: p.shift().scale(z2).add(&dp.times_y2_minus_1()),
            sin_part: q.shift().scale(z2).add(&dq.times_y2_minus_1()),
            freq: w,
        }
    }

    pub fn nth_derivative(&self, n: usize) -> TrigPoly {
        (0..n).fold(self.clone(), |f, _| f.derivative())
    }
}

/// `(y²−1)^α` sampled at `y = i/h`, `i = −h..=h`.
pub fn envelope(alpha: u32, half_cells: usize) -> Vec<f64> {
    let e = TrigPoly {
        zero_order: alpha,
        cos_part: Poly1D::constant(1.0),
        sin_part: Poly1D::zero(),
        freq: 0.0,
    };
    grid_points(half_cells).map(|y| e.eval(y)).collect()
}

fn grid_points(half_cells: usize) -> impl Iterator<Item = f64> {
    let h = half_cells as i64;
    (-h..=h).map(move |i| i as f64 / h as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Cos,
    Sin,
}

/// One weight function of the family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WeightSpec {
    pub alpha: u32,
    pub beta: u32,
    pub l: u32,
    pub m: u32,
    pub parity_x: Parity,
    pub parity_t: Parity,
}

impl WeightSpec {
    pub fn new(alpha: u32, beta: u32, l: u32, m: u32, parity_x: Parity, parity_t: Parity) -> Result<Self> {
        if l == 0 && parity_x == Parity::Sin {
            return Err(Error::invalid("sin parity in x requires l > 0"));
        }
        if m == 0 && parity_t == Parity::Sin {
            return Err(Error::invalid("sin parity in t requires m > 0"));
        }
        Ok(WeightSpec {
            alpha,
            beta,
            l,
            m,
            parity_x,
            parity_t,
        })
    }

    pub fn x_factor(&self) -> TrigPoly {
        factor(self.alpha, self.l, self.parity_x)
    }

    pub fn t_factor(&self) -> TrigPoly {
        factor(self.beta, self.m, self.parity_t)
    }

    pub fn label(&self) -> String {
        let p = |q: Parity| match q {
            Parity::Cos => "cos",
            Parity::Sin => "sin",
        };
        format!(
            "a{}b{}:{}({}x)*{}({}t)",
            self.alpha,
            self.beta,
            p(self.parity_x),
            self.l,
            p(self.parity_t),
            self.m
        )
    }

    /// `∂_x^νx ∂_t^νt w` on the domain's grid points, in physical units.
    /// Rows index space, columns time.
    pub fn eval_derivative(
        &self,
        nu_x: u32,
        nu_t: u32,
        domain: &IntegrationDomain,
        delta_x: f64,
        delta_t: f64,
    ) -> Result<DMatrix<f64>> {
        self.check_orders(nu_x, nu_t)?;
        let xs = factor_values(&self.x_factor(), nu_x, domain.half_cells_x, domain.half_width_x(delta_x));
        let ts = factor_values(&self.t_factor(), nu_t, domain.half_cells_t, domain.half_width_t(delta_t));
        Ok(DMatrix::from_fn(xs.len(), ts.len(), |i, j| xs[i] * ts[j]))
    }

    pub fn check_orders(&self, nu_x: u32, nu_t: u32) -> Result<()> {
        if nu_x > self.alpha || nu_t > self.beta {
            return Err(Error::precondition(format!(
                "derivative orders (nu_x={nu_x}, nu_t={nu_t}) exceed envelope powers (alpha={}, beta={}); \
                 boundary terms of integration by parts would not vanish",
                self.alpha, self.beta
            )));
        }
        Ok(())
    }
}

fn factor(power: u32, freq_index: u32, parity: Parity) -> TrigPoly {
    let one = Poly1D::constant(1.0);
    let (cos_part, sin_part) = match parity {
        Parity::Cos => (one, Poly1D::zero()),
        Parity::Sin => (Poly1D::zero(), one),
    };
    TrigPoly {
        zero_order: power,
        cos_part,
        sin_part,
        freq: freq_index as f64 * PI,
    }
}

/// `d^ν/dy^ν f` at `y = i/h`, scaled by `H^−ν` for the map `y = (x − x_k)/H`.
pub fn factor_values(f: &TrigPoly, nu: u32, half_cells: usize, half_width: f64) -> Vec<f64> {
    let d = f.nth_derivative(nu as usize);
    let scale = half_width.powi(-(nu as i32));
    grid_points(half_cells).map(|y| scale * d.eval(y)).collect()
}

/// The real spanning set of the sign combinations `e^{±ilπx̄} e^{±imπt̄}`:
/// four weights for `l, m > 0`, two when exactly one is zero, one when both are.
pub fn enumerate_weight_set(alpha: u32, beta: u32, l: u32, m: u32) -> Vec<WeightSpec> {
    let px: &[Parity] = if l == 0 { &[Parity::Cos] } else { &[Parity::Cos, Parity::Sin] };
    let pt: &[Parity] = if m == 0 { &[Parity::Cos] } else { &[Parity::Cos, Parity::Sin] };
    px.iter()
        .flat_map(|&a| {
            pt.iter().map(move |&b| WeightSpec {
                alpha,
                beta,
                l,
                m,
                parity_x: a,
                parity_t: b,
            })
        })
        .collect()
}
