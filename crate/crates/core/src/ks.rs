//! Kuramoto-Sivashinsky reference data,
//! `∂_t u + u∂_x u + ∂_x²u + c₄(x)∂_x⁴u = 0` on a periodic domain,
//! with `c₄(x) = 1 + a·sin(2πx/L)` (`a = 0` by default).
//!
//! Pseudo-spectral in space with 2/3-rule dealiasing; fourth-order
//! exponential time differencing Runge-Kutta (ETDRK4) in time, with the
//! φ-function coefficients evaluated by contour integrals.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::Field2D;

type C64 = Complex<f64>;

/// Contour points for the ETDRK4 coefficients.
const CONTOUR_POINTS: usize = 64;
/// Number of low Fourier modes in the random initial condition.
const INITIAL_MODES: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationConfig {
    /// Periodic domain length `L_x`.
    pub length: f64,
    /// Spatial grid points.
    pub n_x: usize,
    /// Integrator time step.
    pub dt: f64,
    /// Recorded time span `L_t`.
    pub duration: f64,
    /// Time integrated and discarded before recording starts.
    pub transient: f64,
    /// Integrator steps between saved snapshots.
    pub save_stride: usize,
    /// Seed of the random initial condition.
    pub seed: u64,
    /// Amplitude `a` of the spatial modulation of the ∂_x⁴ coefficient.
    pub c4_modulation: f64,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        SimulationConfig {
            length: 32.0 * PI,
            n_x: 2048,
            dt: 0.005,
            duration: 500.0,
            transient: 50.0,
            save_stride: 50,
            seed: 0,
            c4_modulation: 0.0,
        }
    }
}

fn whole_steps(span: f64, dt: f64, what: &str) -> Result<usize> {
    let steps = (span / dt).round();
    if (steps * dt - span).abs() > 1e-9 * span.max(dt) {
        return Err(Error::invalid(format!(
            "{what} = {span} is not a whole number of time steps dt = {dt}"
        )));
    }
    Ok(steps as usize)
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.length > 0.0 && self.length.is_finite()) {
            return Err(Error::invalid(format!("length must be positive, got {}", self.length)));
        }
        if self.n_x < 16 {
            return Err(Error::invalid(format!("n_x must be at least 16, got {}", self.n_x)));
        }
        if self.n_x % 2 != 0 {
            return Err(Error::invalid(format!("n_x must be even, got {}", self.n_x)));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::invalid(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return Err(Error::invalid(format!("duration must be positive, got {}", self.duration)));
        }
        if !(self.transient >= 0.0 && self.transient.is_finite()) {
            return Err(Error::invalid(format!("transient must be non-negative, got {}", self.transient)));
        }
        if self.save_stride == 0 {
            return Err(Error::invalid("save_stride must be at least 1"));
        }
        if !self.c4_modulation.is_finite() || self.c4_modulation.abs() >= 1.0 {
            return Err(Error::invalid(format!(
                "c4_modulation must lie in (-1, 1), got {}",
                self.c4_modulation
            )));
        }
        let steps = whole_steps(self.duration, self.dt, "duration")?;
        if steps % self.save_stride != 0 {
            return Err(Error::invalid(format!(
                "duration spans {steps} steps, not a multiple of save_stride = {}",
                self.save_stride
            )));
        }
        if self.transient > 0.0 {
            whole_steps(self.transient, self.dt, "transient")?;
        }
        Ok(())
    }

    pub fn delta_x(&self) -> f64 {
        self.length / self.n_x as f64
    }

    pub fn delta_t(&self) -> f64 {
        self.dt * self.save_stride as f64
    }
}

/// Growth rate `κ² − κ⁴` of a small-amplitude Fourier mode.
pub fn linear_growth_rate(kappa: f64) -> f64 {
    kappa * kappa - kappa.powi(4)
}

/// Smooth random initial condition: a few low modes with seeded amplitudes
/// and phases, scaled to unit maximum magnitude.
pub fn random_initial_condition(config: &SimulationConfig) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let modes: Vec<(f64, f64)> = (1..=INITIAL_MODES)
        .map(|_| (rng.random_range(-1.0..1.0), rng.random_range(0.0..2.0 * PI)))
        .collect();
    let dx = config.delta_x();
    let mut u: Vec<f64> = (0..config.n_x)
        .map(|i| {
            let x = i as f64 * dx;
            modes
                .iter()
                .enumerate()
                .map(|(k, (a, phi))| a * (2.0 * PI * (k + 1) as f64 * x / config.length + phi).cos())
                .sum()
        })
        .collect();
    let max = u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if max > 0.0 {
        u.iter_mut().for_each(|v| *v /= max);
    }
    u
}

struct Etdrk4 {
    n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    e: Vec<f64>,
    e2: Vec<f64>,
    q: Vec<f64>,
    f1: Vec<f64>,
    f2: Vec<f64>,
    f3: Vec<f64>,
    /// `−½ik` on retained modes, 0 on the dealiased ones.
    advect: Vec<C64>,
    /// `k⁴` on retained modes.
    k4: Vec<f64>,
    dealias: Vec<bool>,
    /// `−a·sin(2πx/L)` on the grid, when the ∂_x⁴ coefficient varies.
    modulation: Option<Vec<f64>>,
    scratch: Vec<C64>,
    phys: Vec<C64>,
}

impl Etdrk4 {
    fn new(config: &SimulationConfig) -> Self {
        let n = config.n_x;
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        let dk = 2.0 * PI / config.length;
        let wavenumber = |j: usize| -> f64 {
            if j < n / 2 {
                j as f64 * dk
            } else if j == n / 2 {
                0.0
            } else {
                (j as f64 - n as f64) * dk
            }
        };
        let cutoff = n / 3;
        let dealias: Vec<bool> = (0..n)
            .map(|j| {
                let m = if j <= n / 2 { j } else { n - j };
                m <= cutoff && j != n / 2
            })
            .collect();
        let h = config.dt;
        let roots: Vec<C64> = (0..CONTOUR_POINTS)
            .map(|j| C64::from_polar(1.0, PI * (j as f64 + 0.5) / CONTOUR_POINTS as f64))
            .collect();
        let mut e = vec![0.0; n];
        let mut e2 = vec![0.0; n];
        let mut q = vec![0.0; n];
        let mut f1 = vec![0.0; n];
        let mut f2 = vec![0.0; n];
        let mut f3 = vec![0.0; n];
        let mut advect = vec![C64::new(0.0, 0.0); n];
        let mut k4 = vec![0.0; n];
        for j in 0..n {
            let k = wavenumber(j);
            let lin = linear_growth_rate(k);
            e[j] = (h * lin).exp();
            e2[j] = (h * lin / 2.0).exp();
            let mut acc = [C64::new(0.0, 0.0); 4];
            for r in &roots {
                let z = C64::new(h * lin, 0.0) + r;
                let ez = z.exp();
                let z3 = z * z * z;
                acc[0] += ((z / 2.0).exp() - 1.0) / z;
                acc[1] += (-4.0 - z + ez * (4.0 - 3.0 * z + z * z)) / z3;
                acc[2] += (2.0 + z + ez * (z - 2.0)) / z3;
                acc[3] += (-4.0 - 3.0 * z - z * z + ez * (4.0 - z)) / z3;
            }
            let m = CONTOUR_POINTS as f64;
            q[j] = h * acc[0].re / m;
            f1[j] = h * acc[1].re / m;
            f2[j] = h * acc[2].re / m;
            f3[j] = h * acc[3].re / m;
            if dealias[j] {
                advect[j] = C64::new(0.0, -0.5 * k);
                k4[j] = k.powi(4);
            }
        }
        let modulation = (config.c4_modulation != 0.0).then(|| {
            (0..n)
                .map(|i| {
                    let x = i as f64 * config.delta_x();
                    -config.c4_modulation * (2.0 * PI * x / config.length).sin()
                })
                .collect()
        });
        Etdrk4 {
            n,
            fwd,
            inv,
            e,
            e2,
            q,
            f1,
            f2,
            f3,
            advect,
            k4,
            dealias,
            modulation,
            scratch: vec![C64::new(0.0, 0.0); n],
            phys: vec![C64::new(0.0, 0.0); n],
        }
    }

    /// Nonlinear (explicitly treated) part of the right-hand side, in Fourier space.
    fn nonlinear(&mut self, v: &[C64], out: &mut [C64]) {
        let n = self.n as f64;
        self.phys.copy_from_slice(v);
        self.inv.process_with_scratch(&mut self.phys, &mut self.scratch);
        for p in self.phys.iter_mut() {
            let u = p.re / n;
            *p = C64::new(u * u, 0.0);
        }
        self.fwd.process_with_scratch(&mut self.phys, &mut self.scratch);
        for j in 0..self.n {
            out[j] = self.advect[j] * self.phys[j];
        }
        if let Some(modulation) = &self.modulation {
            for j in 0..self.n {
                self.phys[j] = v[j] * self.k4[j];
            }
            self.inv.process_with_scratch(&mut self.phys, &mut self.scratch);
            for (p, g) in self.phys.iter_mut().zip(modulation) {
                *p = C64::new(g * p.re / n, 0.0);
            }
            self.fwd.process_with_scratch(&mut self.phys, &mut self.scratch);
            for j in 0..self.n {
                if self.dealias[j] {
                    out[j] += self.phys[j];
                }
            }
        }
    }

    fn step(&mut self, v: &mut [C64], work: &mut StepBuffers) {
        let StepBuffers { nv, a, na, b, nb, c, nc } = work;
        self.nonlinear(v, nv);
        for j in 0..self.n {
            a[j] = v[j] * self.e2[j] + nv[j] * self.q[j];
        }
        self.nonlinear(a, na);
        for j in 0..self.n {
            b[j] = v[j] * self.e2[j] + na[j] * self.q[j];
        }
        self.nonlinear(b, nb);
        for j in 0..self.n {
            c[j] = a[j] * self.e2[j] + (nb[j] * 2.0 - nv[j]) * self.q[j];
        }
        self.nonlinear(c, nc);
        for j in 0..self.n {
            v[j] = v[j] * self.e[j]
                + nv[j] * self.f1[j]
                + (na[j] + nb[j]) * (2.0 * self.f2[j])
                + nc[j] * self.f3[j];
        }
        // u is real: keep the spectrum Hermitian so roundoff in the
        // imaginary part cannot grow through the unstable linear modes
        v[0].im = 0.0;
        v[self.n / 2].im = 0.0;
        for j in 1..self.n / 2 {
            let avg = (v[j] + v[self.n - j].conj()) * 0.5;
            v[j] = avg;
            v[self.n - j] = avg.conj();
        }
    }

    fn to_physical(&mut self, v: &[C64], out: &mut [f64]) {
        self.phys.copy_from_slice(v);
        self.inv.process_with_scratch(&mut self.phys, &mut self.scratch);
        let n = self.n as f64;
        for (o, p) in out.iter_mut().zip(&self.phys) {
            *o = p.re / n;
        }
    }
}

struct StepBuffers {
    nv: Vec<C64>,
    a: Vec<C64>,
    na: Vec<C64>,
    b: Vec<C64>,
    nb: Vec<C64>,
    c: Vec<C64>,
    nc: Vec<C64>,
}

impl StepBuffers {
    fn new(n: usize) -> Self {
        let z = || vec![C64::new(0.0, 0.0); n];
        StepBuffers {
            nv: z(),
            a: z(),
            na: z(),
            b: z(),
            nb: z(),
            c: z(),
            nc: z(),
        }
    }
}

/// Integrates from a seeded random initial condition.
pub fn simulate_ks(config: &SimulationConfig) -> Result<Field2D> {
    config.validate()?;
    simulate_ks_from(config, &random_initial_condition(config))
}

/// Integrates from the given initial condition on the `n_x`-point grid.
/// The transient is integrated first and discarded; snapshot 0 is the state
/// at the end of the transient.
pub fn simulate_ks_from(config: &SimulationConfig, initial: &[f64]) -> Result<Field2D> {
    config.validate()?;
    let n = config.n_x;
    if initial.len() != n {
        return Err(Error::invalid(format!(
            "initial condition has {} points, grid has {n}",
            initial.len()
        )));
    }
    let mut solver = Etdrk4::new(config);
    let mut v: Vec<C64> = initial.iter().map(|&u| C64::new(u, 0.0)).collect();
    solver.fwd.process(&mut v);
    let mut work = StepBuffers::new(n);

    let transient_steps = if config.transient > 0.0 {
        whole_steps(config.transient, config.dt, "transient")?
    } else {
        0
    };
    let record_steps = whole_steps(config.duration, config.dt, "duration")?;
    let n_t = record_steps / config.save_stride + 1;
    let mut values = DMatrix::zeros(n, n_t);
    let mut snapshot = vec![0.0; n];

    let check = |v: &[C64], step: usize| -> Result<()> {
        if v.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::numerical(format!(
                "solution blew up at step {step} (t = {})",
                step as f64 * config.dt
            )));
        }
        Ok(())
    };
    check(&v, 0)?;
    for step in 1..=transient_steps {
        solver.step(&mut v, &mut work);
        check(&v, step)?;
    }
    solver.to_physical(&v, &mut snapshot);
    values.column_mut(0).copy_from_slice(&snapshot);
    for step in 1..=record_steps {
        solver.step(&mut v, &mut work);
        if step % config.save_stride == 0 || step == record_steps {
            check(&v, transient_steps + step)?;
        }
        if step % config.save_stride == 0 {
            solver.to_physical(&v, &mut snapshot);
            values.column_mut(step / config.save_stride).copy_from_slice(&snapshot);
        }
    }
    Field2D::new(values, config.delta_x(), config.delta_t(), 0.0, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(n_x: usize, dt: f64, duration: f64, save_stride: usize) -> SimulationConfig {
        SimulationConfig {
            length: 32.0 * PI,
            n_x,
            dt,
            duration,
            transient: 0.0,
            save_stride,
            seed: 5,
            c4_modulation: 0.0,
        }
    }

    #[test]
    fn growth_rate_values() {
        assert_eq!(linear_growth_rate(0.0), 0.0);
        assert_eq!(linear_growth_rate(1.0), 0.0);
        assert!((linear_growth_rate(0.5f64.sqrt()) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn config_validation() {
        assert!(SimulationConfig::default().validate().is_ok());
        let mut c = SimulationConfig::default();
        c.n_x = 8;
        assert!(c.validate().is_err());
        let mut c = SimulationConfig::default();
        c.save_stride = 3;
        assert!(c.validate().is_err());
        let mut c = SimulationConfig::default();
        c.duration = 1.0023;
        assert!(c.validate().is_err());
        let mut c = SimulationConfig::default();
        c.dt = -1.0;
        assert!(c.validate().is_err());
        let mut c = SimulationConfig::default();
        c.n_x = 2050 - 1;
        assert!(c.validate().is_err());
    }

    #[test]
    fn long_run_stays_bounded() {
        // roundoff in the imaginary part would otherwise grow at rate 1/4
        let c = small(128, 0.05, 800.0, 200);
        let f = simulate_ks(&c).unwrap();
        assert!(f.values().amax() < 5.0, "max {}", f.values().amax());
    }

    #[test]
    fn zero_is_a_fixed_point() {
        let c = small(64, 0.01, 2.0, 10);
        let f = simulate_ks_from(&c, &vec![0.0; 64]).unwrap();
        assert!(f.values().iter().all(|v| *v == 0.0));
        assert_eq!(f.n_t(), 21);
    }

    #[test]
    fn small_mode_grows_at_linear_rate() {
        let c = small(64, 0.01, 5.0, 100);
        let k = 10;
        let kappa = 2.0 * PI * k as f64 / c.length;
        let eps = 1e-6;
        let u0: Vec<f64> = (0..64).map(|i| eps * (kappa * i as f64 * c.delta_x()).cos()).collect();
        let f = simulate_ks_from(&c, &u0).unwrap();
        for j in 1..f.n_t() {
            let t = j as f64 * f.delta_t();
            let amp = f.get(0, j);
            let expected = eps * (linear_growth_rate(kappa) * t).exp();
            assert!((amp / expected - 1.0).abs() < 0.01, "t={t} ratio={}", amp / expected);
        }
    }

    #[test]
    fn nan_initial_condition_reports_step() {
        let c = small(32, 0.01, 1.0, 10);
        let mut u0 = vec![0.0; 32];
        u0[3] = f64::NAN;
        match simulate_ks_from(&c, &u0) {
            Err(Error::Numerical(msg)) => assert!(msg.contains("step 0"), "{msg}"),
            other => panic!("expected blow-up error, got {other:?}"),
        }
    }

    #[test]
    fn mean_is_conserved() {
        let mut c = small(128, 0.02, 20.0, 50);
        c.seed = 3;
        let mut u0 = random_initial_condition(&c);
        u0.iter_mut().for_each(|u| *u += 0.3);
        let f = simulate_ks_from(&c, &u0).unwrap();
        let mean = |j: usize| f.values().column(j).sum() / 128.0;
        let drift = (mean(f.n_t() - 1) - mean(0)).abs();
        assert!(drift < 1e-8 * 20.0, "drift {drift}");
    }

    #[test]
    fn deterministic() {
        let mut c = small(64, 0.02, 4.0, 20);
        c.transient = 2.0;
        assert_eq!(simulate_ks(&c).unwrap(), simulate_ks(&c).unwrap());
    }

    #[test]
    fn at_least_third_order_in_time() {
        let base = small(128, 0.0025, 5.0, 2000);
        let u0 = random_initial_condition(&base);
        let reference = simulate_ks_from(&base, &u0).unwrap();
        let end = |dt: f64| {
            let c = SimulationConfig {
                dt,
                save_stride: (5.0 / dt).round() as usize,
                ..base.clone()
            };
            let f = simulate_ks_from(&c, &u0).unwrap();
            (0..128)
                .map(|i| (f.get(i, 1) - reference.get(i, 1)).abs())
                .fold(0.0, f64::max)
        };
        let e1 = end(0.04);
        let e2 = end(0.02);
        let order = (e1 / e2).log2();
        assert!(order >= 3.0, "observed order {order} (errors {e1:e}, {e2:e})");
    }
}
