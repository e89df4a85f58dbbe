//! Gridded scalar fields `u(x, t)` and the operations applied to them before
//! regression: noise injection, downsampling, cropping and diagnostics.

mod io;
mod spectrum;

pub use io::{read_field, write_field, FIELD_MAGIC, FIELD_VERSION};
pub use spectrum::{
    correlation_scales, mean_windowed_spectrum, power_spectrum, windowed_spectrum, Axis,
    SpectrumProfile,
};

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// A uniformly gridded scalar field. Row index is space, column index is time.
#[derive(Debug, Clone, PartialEq)]
pub struct Field2D {
    values: DMatrix<f64>,
    delta_x: f64,
    delta_t: f64,
    origin_x: f64,
    origin_t: f64,
}

impl Field2D {
    pub fn new(
        values: DMatrix<f64>,
        delta_x: f64,
        delta_t: f64,
        origin_x: f64,
        origin_t: f64,
    ) -> Result<Self> {
        if values.nrows() == 0 || values.ncols() == 0 {
            return Err(Error::invalid("field must be non-empty"));
        }
        if !(delta_x > 0.0 && delta_x.is_finite()) || !(delta_t > 0.0 && delta_t.is_finite()) {
            return Err(Error::invalid(format!(
                "grid spacings must be positive and finite (delta_x={delta_x}, delta_t={delta_t})"
            )));
        }
        if !origin_x.is_finite() || !origin_t.is_finite() {
            return Err(Error::invalid("grid origin must be finite"));
        }
        Ok(Field2D {
            values,
            delta_x,
            delta_t,
            origin_x,
            origin_t,
        })
    }

    /// Samples `f(x, t)` on the grid `x_i = origin_x + i·δx`, `t_j = origin_t + j·δt`.
    pub fn from_fn(
        n_x: usize,
        n_t: usize,
        delta_x: f64,
        delta_t: f64,
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<Self> {
        let values = DMatrix::from_fn(n_x, n_t, |i, j| f(i as f64 * delta_x, j as f64 * delta_t));
        Field2D::new(values, delta_x, delta_t, 0.0, 0.0)
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn n_x(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_t(&self) -> usize {
        self.values.ncols()
    }

    pub fn delta_x(&self) -> f64 {
        self.delta_x
    }

    pub fn delta_t(&self) -> f64 {
        self.delta_t
    }

    pub fn origin_x(&self) -> f64 {
        self.origin_x
    }

    pub fn origin_t(&self) -> f64 {
        self.origin_t
    }

    /// Spatial extent `(n_x − 1)·δx`.
    pub fn extent_x(&self) -> f64 {
        (self.n_x() - 1) as f64 * self.delta_x
    }

    /// Temporal extent `(n_t − 1)·δt`.
    pub fn extent_t(&self) -> f64 {
        (self.n_t() - 1) as f64 * self.delta_t
    }

    pub fn x_at(&self, ix: usize) -> f64 {
        self.origin_x + ix as f64 * self.delta_x
    }

    pub fn t_at(&self, it: usize) -> f64 {
        self.origin_t + it as f64 * self.delta_t
    }

    pub fn get(&self, ix: usize, it: usize) -> f64 {
        self.values[(ix, it)]
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Applies an affine map `a·u + b` pointwise.
    pub fn affine(&self, a: f64, b: f64) -> Field2D {
        Field2D {
            values: self.values.map(|v| a * v + b),
            ..self.clone()
        }
    }

    /// Sample standard deviation over every grid value (denominator `n − 1`).
    pub fn sample_stddev(&self) -> Result<f64> {
        let n = self.values.len();
        if n < 2 {
            return Err(Error::invalid(
                "sample standard deviation needs at least two values",
            ));
        }
        let mean = self.values.iter().sum::<f64>() / n as f64;
        let ss: f64 = self.values.iter().map(|v| (v - mean) * (v - mean)).sum();
        Ok((ss / (n - 1) as f64).sqrt())
    }

    /// Adds i.i.d. Gaussian noise with standard deviation `sigma · s_u`, where
    /// `s_u` is the sample standard deviation of this field.
    pub fn add_gaussian_noise(&self, sigma: f64, seed: u64) -> Result<Field2D> {
        if !(sigma >= 0.0) || !sigma.is_finite() {
            return Err(Error::invalid(format!(
                "noise level must be non-negative, got {sigma}"
            )));
        }
        if sigma == 0.0 {
            return Ok(self.clone());
        }
        let scale = sigma * self.sample_stddev()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = self.clone();
        for v in out.values.iter_mut() {
            let z: f64 = StandardNormal.sample(&mut rng);
            *v += scale * z;
        }
        Ok(out)
    }

    /// Keeps every `stride`-th sample along each axis, starting at index 0.
    pub fn downsample(&self, stride_x: usize, stride_t: usize) -> Result<Field2D> {
        if stride_x == 0 || stride_t == 0 {
            return Err(Error::invalid("strides must be at least 1"));
        }
        let n_x = (self.n_x() - 1) / stride_x + 1;
        let n_t = (self.n_t() - 1) / stride_t + 1;
        if n_x < 2 || n_t < 2 {
            return Err(Error::invalid(format!(
                "strides ({stride_x}, {stride_t}) leave fewer than two points on a {}x{} grid",
                self.n_x(),
                self.n_t()
            )));
        }
        let values = DMatrix::from_fn(n_x, n_t, |i, j| self.values[(i * stride_x, j * stride_t)]);
        Field2D::new(
            values,
            self.delta_x * stride_x as f64,
            self.delta_t * stride_t as f64,
            self.origin_x,
            self.origin_t,
        )
    }

    /// Sub-grid of `n_x × n_t` points starting at `(ix0, it0)`.
    pub fn crop(&self, ix0: usize, it0: usize, n_x: usize, n_t: usize) -> Result<Field2D> {
        if n_x == 0 || n_t == 0 || ix0 + n_x > self.n_x() || it0 + n_t > self.n_t() {
            return Err(Error::invalid(format!(
                "crop [{ix0}, {}) x [{it0}, {}) exceeds the {}x{} grid",
                ix0 + n_x,
                it0 + n_t,
                self.n_x(),
                self.n_t()
            )));
        }
        let values = self.values.view((ix0, it0), (n_x, n_t)).into_owned();
        Field2D::new(
            values,
            self.delta_x,
            self.delta_t,
            self.x_at(ix0),
            self.t_at(it0),
        )
    }

    /// Crops from the origin to the given physical extents, rounded to the grid.
    pub fn crop_extent(&self, extent_x: f64, extent_t: f64) -> Result<Field2D> {
        let n_x = (extent_x / self.delta_x).round() as usize + 1;
        let n_t = (extent_t / self.delta_t).round() as usize + 1;
        self.crop(0, 0, n_x, n_t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp(n_x: usize, n_t: usize) -> Field2D {
        Field2D::from_fn(n_x, n_t, 1.0, 1.0, |x, t| x * 10.0 + t).unwrap()
    }

    #[test]
    fn rejects_bad_spacing() {
        let v = DMatrix::zeros(2, 2);
        assert!(Field2D::new(v.clone(), 0.0, 1.0, 0.0, 0.0).is_err());
        assert!(Field2D::new(v, 1.0, -1.0, 0.0, 0.0).is_err());
        assert!(Field2D::new(DMatrix::zeros(0, 3), 1.0, 1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn stddev_of_constant_is_zero() {
        let f = Field2D::from_fn(4, 3, 1.0, 1.0, |_, _| 5.0).unwrap();
        assert_eq!(f.sample_stddev().unwrap(), 0.0);
    }

    #[test]
    fn stddev_of_two_samples() {
        let f = Field2D::new(DMatrix::from_row_slice(2, 1, &[0.0, 2.0]), 1.0, 1.0, 0.0, 0.0)
            .unwrap();
        assert!((f.sample_stddev().unwrap() - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn stddev_single_value_errors() {
        let f = Field2D::new(DMatrix::from_element(1, 1, 3.0), 1.0, 1.0, 0.0, 0.0).unwrap();
        assert!(f.sample_stddev().is_err());
    }

    #[test]
    fn zero_noise_is_identity() {
        let f = ramp(5, 4);
        assert_eq!(f.add_gaussian_noise(0.0, 7).unwrap(), f);
    }

    #[test]
    fn negative_noise_rejected() {
        assert!(ramp(3, 3).add_gaussian_noise(-0.1, 1).is_err());
    }

    #[test]
    fn noise_is_deterministic_per_seed() {
        let f = ramp(20, 10);
        let a = f.add_gaussian_noise(0.3, 42).unwrap();
        let b = f.add_gaussian_noise(0.3, 42).unwrap();
        let c = f.add_gaussian_noise(0.3, 43).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn noise_has_requested_scale() {
        let f = Field2D::from_fn(400, 300, 0.1, 0.1, |x, t| (x).sin() * (0.3 * t).cos()).unwrap();
        let s_u = f.sample_stddev().unwrap();
        let noisy = f.add_gaussian_noise(0.03, 11).unwrap();
        let diff = Field2D::new(
            noisy.values() - f.values(),
            f.delta_x(),
            f.delta_t(),
            0.0,
            0.0,
        )
        .unwrap();
        let n = diff.values().len() as f64;
        let mean = diff.values().iter().sum::<f64>() / n;
        let sd = diff.sample_stddev().unwrap();
        assert!((sd / (0.03 * s_u) - 1.0).abs() < 0.02, "ratio {}", sd / (0.03 * s_u));
        assert!(mean.abs() < 3.0 * 0.03 * s_u / n.sqrt());
    }

    #[test]
    fn downsample_identity() {
        let f = ramp(5, 5);
        assert_eq!(f.downsample(1, 1).unwrap(), f);
    }

    #[test]
    fn downsample_even_indices() {
        let f = ramp(5, 5);
        let d = f.downsample(2, 2).unwrap();
        assert_eq!((d.n_x(), d.n_t()), (3, 3));
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(d.get(i, j), f.get(2 * i, 2 * j));
            }
        }
        assert_eq!(d.delta_x(), 2.0);
    }

    #[test]
    fn downsample_spacing_matches_simulator_output() {
        let f = Field2D::from_fn(9, 401, 0.0491, 0.005, |x, t| x + t).unwrap();
        let d = f.downsample(4, 200).unwrap();
        assert!((d.delta_x() - 0.1964).abs() < 1e-12);
        assert!((d.delta_t() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn downsample_too_coarse_errors() {
        assert!(ramp(5, 5).downsample(5, 1).is_err());
        assert!(ramp(5, 5).downsample(0, 1).is_err());
    }

    #[test]
    fn crop_extent_rounds_to_grid() {
        let f = ramp(50, 40);
        let c = f.crop_extent(10.0, 5.0).unwrap();
        assert_eq!((c.n_x(), c.n_t()), (11, 6));
        assert!(f.crop(45, 0, 10, 2).is_err());
        let c = f.crop(3, 2, 4, 4).unwrap();
        assert_eq!(c.origin_x(), 3.0);
        assert_eq!(c.get(0, 0), f.get(3, 2));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn downsample_composes(a in 1usize..4, b in 1usize..4, c in 1usize..4, d in 1usize..4) {
                let f = Field2D::from_fn(60, 50, 0.5, 0.25, |x, t| (x * 1.3).sin() + t * t).unwrap();
                let two = f.downsample(a, b).and_then(|g| g.downsample(c, d));
                let one = f.downsample(a * c, b * d);
                match (two, one) {
                    (Ok(g), Ok(h)) => {
                        prop_assert_eq!(g.values(), h.values());
                        prop_assert!((g.delta_x() - h.delta_x()).abs() < 1e-12);
                        prop_assert!((g.delta_t() - h.delta_t()).abs() < 1e-12);
                    }
                    (Err(_), Err(_)) => {}
                    _ => prop_assert!(false, "one path failed and the other did not"),
                }
            }
        }
    }
}
