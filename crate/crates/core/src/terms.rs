//! Candidate library terms in the canonical form `a · g(x,t) · ∂_t^νt ∂_x^νx (u^p)`.
//!
//! In this form integration by parts is bookkeeping: every derivative moves
//! onto `g·w` and the prefactor picks up `(−1)^(νx+νt)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::weights::{Poly1D, TrigPoly};

/// A separable, smooth, known coefficient function `g(x,t) = g_x(x)·g_t(t)`
/// in physical coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientBasis {
    pub label: String,
    pub x: TrigPoly,
    pub t: TrigPoly,
}

impl CoefficientBasis {
    pub fn one() -> Self {
        CoefficientBasis {
            label: "1".into(),
            x: TrigPoly::constant(1.0),
            t: TrigPoly::constant(1.0),
        }
    }

    /// Polynomial in `x`, coefficients in ascending powers.
    pub fn poly_x(label: &str, coeffs: Vec<f64>) -> Self {
        CoefficientBasis {
            label: label.into(),
            x: TrigPoly::polynomial(Poly1D::new(coeffs)),
            t: TrigPoly::constant(1.0),
        }
    }

    pub fn sin_x(label: &str, freq: f64) -> Self {
        CoefficientBasis {
            label: label.into(),
            x: TrigPoly::sin(freq),
            t: TrigPoly::constant(1.0),
        }
    }

    pub fn cos_x(label: &str, freq: f64) -> Self {
        CoefficientBasis {
            label: label.into(),
            x: TrigPoly::cos(freq),
            t: TrigPoly::constant(1.0),
        }
    }

    pub fn poly_t(label: &str, coeffs: Vec<f64>) -> Self {
        CoefficientBasis {
            label: label.into(),
            x: TrigPoly::constant(1.0),
            t: TrigPoly::polynomial(Poly1D::new(coeffs)),
        }
    }

    pub fn is_constant_one(&self) -> bool {
        self.x.is_constant_one() && self.t.is_constant_one()
    }

    pub fn eval(&self, x: f64, t: f64) -> f64 {
        self.x.eval(x) * self.t.eval(t)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonomialTerm {
    pub prefactor: f64,
    pub power: u32,
    pub nu_x: u32,
    pub nu_t: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis: Option<CoefficientBasis>,
    pub label: String,
}

impl MonomialTerm {
    pub fn new(prefactor: f64, power: u32, nu_x: u32, nu_t: u32, label: &str) -> Result<Self> {
        if power == 0 && (nu_x > 0 || nu_t > 0) {
            return Err(Error::invalid(format!(
                "term '{label}': derivatives of u^0 are identically zero"
            )));
        }
        if !prefactor.is_finite() || prefactor == 0.0 {
            return Err(Error::invalid(format!(
                "term '{label}': prefactor must be finite and nonzero"
            )));
        }
        Ok(MonomialTerm {
            prefactor,
            power,
            nu_x,
            nu_t,
            basis: None,
            label: label.into(),
        })
    }

    pub fn with_basis(mut self, basis: CoefficientBasis) -> Self {
        self.basis = if basis.is_constant_one() { None } else { Some(basis) };
        self
    }

    pub fn scaled(&self, a: f64) -> Self {
        MonomialTerm {
            prefactor: self.prefactor * a,
            ..self.clone()
        }
    }
}

/// The integrated-by-parts form: integrand `u^p · ∂_x^νx ∂_t^νt (g·w)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeakTerm {
    pub prefactor: f64,
    pub power: u32,
    pub nu_x: u32,
    pub nu_t: u32,
    pub basis: Option<CoefficientBasis>,
}

pub fn canonical_weak_form(term: &MonomialTerm) -> WeakTerm {
    let sign = if (term.nu_x + term.nu_t) % 2 == 0 { 1.0 } else { -1.0 };
    WeakTerm {
        prefactor: sign * term.prefactor,
        power: term.power,
        nu_x: term.nu_x,
        nu_t: term.nu_t,
        basis: term.basis.clone(),
    }
}

/// The Kuramoto-Sivashinsky terms followed by six distractors:
/// `∂_t u, u∂_x u, ∂_x²u, ∂_x⁴u, ∂_x u, ∂_x³u, u, u², u³, 1`.
/// `u∂_x u` is stored in flux form `½∂_x(u²)`.
pub fn default_ks_library() -> Vec<MonomialTerm> {
    [
        (1.0, 1, 0, 1, "u_t"),
        (0.5, 2, 1, 0, "u*u_x"),
        (1.0, 1, 2, 0, "u_xx"),
        (1.0, 1, 4, 0, "u_xxxx"),
        (1.0, 1, 1, 0, "u_x"),
        (1.0, 1, 3, 0, "u_xxx"),
        (1.0, 1, 0, 0, "u"),
        (1.0, 2, 0, 0, "u^2"),
        (1.0, 3, 0, 0, "u^3"),
        (1.0, 0, 0, 0, "1"),
    ]
    .into_iter()
    .map(|(a, p, nx, nt, label)| MonomialTerm::new(a, p, nx, nt, label).expect("valid term"))
    .collect()
}

/// One term per basis function `g_p`, each carrying `g_p` as its coefficient.
pub fn expand_variable_coefficient(
    term: &MonomialTerm,
    basis: &[CoefficientBasis],
) -> Result<Vec<MonomialTerm>> {
    if basis.is_empty() {
        return Err(Error::invalid(format!(
            "empty coefficient basis for term '{}'",
            term.label
        )));
    }
    Ok(basis
        .iter()
        .map(|g| {
            let mut t = term.clone().with_basis(g.clone());
            if t.basis.is_some() {
                t.label = format!("{}*{}", term.label, g.label);
            }
            t
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn time_derivative_flips_sign() {
        let t = MonomialTerm::new(1.0, 1, 0, 1, "u_t").unwrap();
        let w = canonical_weak_form(&t);
        assert_eq!((w.prefactor, w.power, w.nu_x, w.nu_t), (-1.0, 1, 0, 1));
    }

    #[test]
    fn advection_flux_form() {
        let lib = default_ks_library();
        let w = canonical_weak_form(&lib[1]);
        assert_eq!((w.prefactor, w.power, w.nu_x, w.nu_t), (-0.5, 2, 1, 0));
    }

    #[test]
    fn fourth_derivative_keeps_sign() {
        let lib = default_ks_library();
        let w = canonical_weak_form(&lib[3]);
        assert_eq!((w.prefactor, w.power, w.nu_x), (1.0, 1, 4));
    }

    #[test]
    fn ks_library_layout() {
        let lib = default_ks_library();
        assert_eq!(lib.len(), 10);
        assert_eq!((lib[0].prefactor, lib[0].power, lib[0].nu_x, lib[0].nu_t), (1.0, 1, 0, 1));
        assert_eq!((lib[9].prefactor, lib[9].power, lib[9].nu_x, lib[9].nu_t), (1.0, 0, 0, 0));
        assert_eq!((lib[1].prefactor, lib[1].power, lib[1].nu_x), (0.5, 2, 1));
    }

    #[test]
    fn derivative_of_constant_rejected() {
        assert!(MonomialTerm::new(1.0, 0, 1, 0, "bad").is_err());
    }

    #[test]
    fn constant_basis_recovers_term() {
        let t = default_ks_library()[3].clone();
        let out = expand_variable_coefficient(&t, &[CoefficientBasis::one()]).unwrap();
        assert_eq!(out, vec![t]);
    }

    #[test]
    fn expansion_one_term_per_basis() {
        let t = default_ks_library()[3].clone();
        let out = expand_variable_coefficient(
            &t,
            &[CoefficientBasis::one(), CoefficientBasis::poly_x("x", vec![0.0, 1.0])],
        )
        .unwrap();
        assert_eq!(out.len(), 2);
        assert!(out[0].basis.is_none());
        assert_eq!(out[1].basis.as_ref().unwrap().eval(3.0, 1.0), 3.0);
        assert_eq!(out[1].label, "u_xxxx*x");
        assert!(expand_variable_coefficient(&t, &[]).is_err());
    }

    #[test]
    fn weak_form_is_linear_in_prefactor() {
        for t in default_ks_library() {
            let a = canonical_weak_form(&t.scaled(-2.5));
            let b = canonical_weak_form(&t);
            assert_eq!(a.prefactor, -2.5 * b.prefactor);
        }
    }
}
