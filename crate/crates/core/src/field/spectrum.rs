//! Fourier and correlation diagnostics used to pick domain sizes and weight
//! frequencies.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::Field2D;
use crate::assembly::IntegrationDomain;
use crate::error::{Error, Result};
use crate::weights::envelope;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Space,
    Time,
}

/// Magnitudes of Fourier coefficients against angular frequency, scaled so
/// that the largest entry is 1.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumProfile {
    pub frequencies: Vec<f64>,
    pub power: Vec<f64>,
}

impl SpectrumProfile {
    fn normalized(frequencies: Vec<f64>, mut power: Vec<f64>) -> Self {
        let max = power.iter().cloned().fold(0.0, f64::max);
        if max > 0.0 {
            power.iter_mut().for_each(|p| *p /= max);
        }
        SpectrumProfile { frequencies, power }
    }

    /// Frequency of the largest entry (the first one on ties).
    pub fn peak_frequency(&self) -> f64 {
        let mut best = 0;
        for (i, p) in self.power.iter().enumerate() {
            if *p > self.power[best] {
                best = i;
            }
        }
        self.frequencies[best]
    }

    pub fn len(&self) -> usize {
        self.power.len()
    }

    pub fn is_empty(&self) -> bool {
        self.power.is_empty()
    }
}

/// Mean over lines of `|DFT|` along `axis`, one-sided (`k = 0..=n/2`).
fn line_magnitudes(values: &DMatrix<f64>, axis: Axis) -> Vec<f64> {
    let (n, lines) = match axis {
        Axis::Space => (values.nrows(), values.ncols()),
        Axis::Time => (values.ncols(), values.nrows()),
    };
    let fft = FftPlanner::<f64>::new().plan_fft_forward(n);
    let mut acc = vec![0.0; n / 2 + 1];
    let mut buf = vec![Complex::new(0.0, 0.0); n];
    for line in 0..lines {
        for (i, b) in buf.iter_mut().enumerate() {
            let v = match axis {
                Axis::Space => values[(i, line)],
                Axis::Time => values[(line, i)],
            };
            *b = Complex::new(v, 0.0);
        }
        fft.process(&mut buf);
        for (a, c) in acc.iter_mut().zip(&buf) {
            *a += c.norm();
        }
    }
    acc.iter_mut().for_each(|a| *a /= lines as f64);
    acc
}

fn frequencies(count: usize, period: f64) -> Vec<f64> {
    (0..count).map(|k| 2.0 * PI * k as f64 / period).collect()
}

/// Spectrum of the whole field along `axis`, averaged over the other axis.
///
/// The samples along the axis are treated as one period of length `n·δ`, so
/// frequencies are `2πk/(n·δ)`.
pub fn power_spectrum(field: &Field2D, axis: Axis) -> Result<SpectrumProfile> {
    let (n, delta) = match axis {
        Axis::Space => (field.n_x(), field.delta_x()),
        Axis::Time => (field.n_t(), field.delta_t()),
    };
    if n < 4 {
        return Err(Error::invalid(format!(
            "power spectrum needs at least 4 points along the axis, got {n}"
        )));
    }
    let mags = line_magnitudes(field.values(), axis);
    Ok(SpectrumProfile::normalized(
        frequencies(mags.len(), n as f64 * delta),
        mags,
    ))
}

/// Window × envelope product on a domain, trimmed to one period (the last
/// sample along each axis is dropped; it coincides with the first under the
/// periodic extension of a boundary-vanishing window).
fn enveloped_window(
    field: &Field2D,
    domain: &IntegrationDomain,
    alpha: u32,
    beta: u32,
) -> Result<DMatrix<f64>> {
    if !domain.fits(field.n_x(), field.n_t()) {
        return Err(Error::invalid(format!(
            "domain {domain:?} lies outside the {}x{} grid",
            field.n_x(),
            field.n_t()
        )));
    }
    let ex = envelope(alpha, domain.half_cells_x);
    let et = envelope(beta, domain.half_cells_t);
    let (x0, t0) = (domain.start_x(), domain.start_t());
    let (nx, nt) = (2 * domain.half_cells_x, 2 * domain.half_cells_t);
    Ok(DMatrix::from_fn(nx, nt, |i, j| {
        field.get(x0 + i, t0 + j) * ex[i] * et[j]
    }))
}

fn window_period(field: &Field2D, domain: &IntegrationDomain, axis: Axis) -> f64 {
    match axis {
        Axis::Space => domain.width_x(field.delta_x()),
        Axis::Time => domain.width_t(field.delta_t()),
    }
}

/// Spectrum of `u·(x̄²−1)^α(t̄²−1)^β` on one domain. Frequencies are
/// `κ_l = 2πl/F_x` (space) or `ω_m = 2πm/F_t` (time).
pub fn windowed_spectrum(
    field: &Field2D,
    domain: &IntegrationDomain,
    alpha: u32,
    beta: u32,
    axis: Axis,
) -> Result<SpectrumProfile> {
    let window = enveloped_window(field, domain, alpha, beta)?;
    let mags = line_magnitudes(&window, axis);
    Ok(SpectrumProfile::normalized(
        frequencies(mags.len(), window_period(field, domain, axis)),
        mags,
    ))
}

/// Windowed spectrum averaged (before normalisation) over several domains of
/// equal size.
pub fn mean_windowed_spectrum(
    field: &Field2D,
    domains: &[IntegrationDomain],
    alpha: u32,
    beta: u32,
    axis: Axis,
) -> Result<SpectrumProfile> {
    let first = domains
        .first()
        .ok_or_else(|| Error::invalid("no domains given"))?;
    let mut acc: Vec<f64> = Vec::new();
    for d in domains {
        if (d.half_cells_x, d.half_cells_t) != (first.half_cells_x, first.half_cells_t) {
            return Err(Error::invalid("domains must share one size"));
        }
        let mags = line_magnitudes(&enveloped_window(field, d, alpha, beta)?, axis);
        if acc.is_empty() {
            acc = mags;
        } else {
            acc.iter_mut().zip(&mags).for_each(|(a, m)| *a += m);
        }
    }
    acc.iter_mut().for_each(|a| *a /= domains.len() as f64);
    Ok(SpectrumProfile::normalized(
        frequencies(acc.len(), window_period(field, first, axis)),
        acc,
    ))
}

/// Normalised autocorrelation along `axis` for lags `0..=max_lag`, pooled over
/// the other axis. The global mean is removed first.
fn autocorrelation(field: &Field2D, axis: Axis, max_lag: usize) -> Vec<f64> {
    let v = field.values();
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    let (n, lines) = match axis {
        Axis::Space => (v.nrows(), v.ncols()),
        Axis::Time => (v.ncols(), v.nrows()),
    };
    let at = |line: usize, i: usize| match axis {
        Axis::Space => v[(i, line)] - mean,
        Axis::Time => v[(line, i)] - mean,
    };
    let mut acf = Vec::with_capacity(max_lag + 1);
    for lag in 0..=max_lag {
        let mut s = 0.0;
        for line in 0..lines {
            for i in 0..n - lag {
                s += at(line, i) * at(line, i + lag);
            }
        }
        acf.push(s / ((n - lag) * lines) as f64);
    }
    let c0 = acf[0];
    if c0 > 0.0 {
        acf.iter_mut().for_each(|c| *c /= c0);
    }
    acf
}

fn one_over_e_crossing(field: &Field2D, axis: Axis) -> Result<f64> {
    let (n, delta) = match axis {
        Axis::Space => (field.n_x(), field.delta_x()),
        Axis::Time => (field.n_t(), field.delta_t()),
    };
    let threshold = (-1.0f64).exp();
    let acf = autocorrelation(field, axis, n / 2);
    if acf[0] != 1.0 {
        return Err(Error::numerical("constant field has no correlation scale"));
    }
    for lag in 1..acf.len() {
        if acf[lag] < threshold {
            let (a, b) = (acf[lag - 1], acf[lag]);
            let frac = (a - threshold) / (a - b);
            return Ok((lag as f64 - 1.0 + frac) * delta);
        }
    }
    Err(Error::numerical(format!(
        "{axis:?} autocorrelation never drops below 1/e within {} lags; field too small",
        n / 2
    )))
}

/// Correlation length and time: first lag at which the autocorrelation drops
/// below `1/e`, linearly interpolated between grid lags.
pub fn correlation_scales(field: &Field2D) -> Result<(f64, f64)> {
    Ok((
        one_over_e_crossing(field, Axis::Space)?,
        one_over_e_crossing(field, Axis::Time)?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_mode_spectrum() {
        let n = 64;
        let dx = 0.3;
        let k0 = 5;
        let kappa0 = 2.0 * PI * k0 as f64 / (n as f64 * dx);
        let f = Field2D::from_fn(n, 8, dx, 1.0, |x, _| (kappa0 * x).cos()).unwrap();
        let s = power_spectrum(&f, Axis::Space).unwrap();
        assert_eq!(s.len(), n / 2 + 1);
        assert!((s.frequencies[k0] - kappa0).abs() < 1e-12);
        assert!((s.power[k0] - 1.0).abs() < 1e-12);
        for (k, p) in s.power.iter().enumerate() {
            if k != k0 {
                assert!(*p < 1e-12, "k={k} p={p}");
            }
        }
        assert!((s.peak_frequency() - kappa0).abs() < 1e-12);
    }

    #[test]
    fn spectrum_needs_four_points() {
        let f = Field2D::from_fn(3, 8, 1.0, 1.0, |x, t| x + t).unwrap();
        assert!(power_spectrum(&f, Axis::Space).is_err());
        assert!(power_spectrum(&f, Axis::Time).is_ok());
    }

    #[test]
    fn constant_offset_only_changes_zero_frequency() {
        let f = Field2D::from_fn(32, 20, 0.2, 0.5, |x, t| (x * 1.7).sin() * (t * 0.4).cos() + 0.1 * x).unwrap();
        let g = f.affine(1.0, 3.0);
        for axis in [Axis::Space, Axis::Time] {
            let a = line_magnitudes(f.values(), axis);
            let b = line_magnitudes(g.values(), axis);
            for k in 1..a.len() {
                assert!((a[k] - b[k]).abs() < 1e-10 * a[0].max(1.0));
            }
            assert!((a[0] - b[0]).abs() > 1.0);
        }
    }

    #[test]
    fn unit_envelope_on_whole_grid_matches_raw_spectrum() {
        let f = Field2D::from_fn(21, 31, 0.3, 0.7, |x, t| (x * 0.9).sin() + (t * 0.2).cos() * x).unwrap();
        let whole = IntegrationDomain::new(10, 15, 10, 15);
        let trimmed = f.crop(0, 0, 20, 30).unwrap();
        for axis in [Axis::Space, Axis::Time] {
            let w = windowed_spectrum(&f, &whole, 0, 0, axis).unwrap();
            let r = power_spectrum(&trimmed, axis).unwrap();
            for (a, b) in w.power.iter().zip(&r.power) {
                assert!((a - b).abs() < 1e-12);
            }
            for (a, b) in w.frequencies.iter().zip(&r.frequencies) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn constant_field_gives_envelope_spectrum() {
        let f = Field2D::from_fn(41, 41, 0.2, 1.0, |_, _| 1.0).unwrap();
        let d = IntegrationDomain::new(20, 20, 12, 9);
        let alpha = 6;
        let e = envelope(alpha, 12);
        let env_field = Field2D::new(
            DMatrix::from_fn(25, 19, |i, _| e[i]),
            0.2,
            1.0,
            0.0,
            0.0,
        )
        .unwrap();
        let whole = IntegrationDomain::new(12, 9, 12, 9);
        let a = windowed_spectrum(&f, &d, alpha, 0, Axis::Space).unwrap();
        let b = windowed_spectrum(&env_field, &whole, 0, 0, Axis::Space).unwrap();
        for (p, q) in a.power.iter().zip(&b.power) {
            assert!((p - q).abs() < 1e-12);
        }
    }

    #[test]
    fn windowed_domain_outside_grid_errors() {
        let f = Field2D::from_fn(10, 10, 1.0, 1.0, |x, _| x).unwrap();
        let d = IntegrationDomain::new(8, 5, 3, 3);
        assert!(windowed_spectrum(&f, &d, 2, 2, Axis::Space).is_err());
    }

    #[test]
    fn cosine_correlation_length() {
        let kappa0 = 0.625;
        let dx = 0.02;
        let n = 20_000;
        let f = Field2D::from_fn(n, 3, dx, 1.0, |x, t| (kappa0 * x).cos() * (1.0 + 0.3 * t))
            .unwrap();
        let ell = one_over_e_crossing(&f, Axis::Space).unwrap();
        let expected = (-1.0f64).exp().acos() / kappa0;
        assert!((ell / expected - 1.0).abs() < 5e-3, "ell={ell} expected={expected}");
    }

    #[test]
    fn white_noise_correlation_is_short() {
        let base = Field2D::from_fn(200, 200, 0.1, 1.0, |x, t| x + t).unwrap();
        let noise = base.add_gaussian_noise(1000.0, 9).unwrap();
        let (lx, lt) = correlation_scales(&noise).unwrap();
        assert!(lx <= 2.0 * 0.1, "lx={lx}");
        assert!(lt <= 2.0 * 1.0, "lt={lt}");
    }

    #[test]
    fn constant_field_has_no_scale() {
        let f = Field2D::from_fn(20, 20, 1.0, 1.0, |_, _| 2.0).unwrap();
        assert!(correlation_scales(&f).is_err());
    }

    #[test]
    fn field_constant_along_space_never_crosses() {
        let f = Field2D::from_fn(20, 20, 1.0, 1.0, |_, t| (0.7 * t).sin()).unwrap();
        assert!(correlation_scales(&f).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(24))]
            #[test]
            fn correlation_scales_affine_invariant(a in prop_oneof![-5.0f64..-0.1, 0.1f64..5.0], b in -10.0f64..10.0) {
                let f = Field2D::from_fn(120, 90, 0.15, 0.5, |x, t| (0.9 * x + 0.2 * t).sin() + 0.5 * (2.1 * x).cos() * (0.3 * t).sin()).unwrap();
                let (lx, lt) = correlation_scales(&f).unwrap();
                let (gx, gt) = correlation_scales(&f.affine(a, b)).unwrap();
                prop_assert!((lx - gx).abs() < 1e-9 * lx);
                prop_assert!((lt - gt).abs() < 1e-9 * lt);
            }
        }
    }
}
