//! Periodic square grid, Fourier transform, quadrature norms and convolution.
//!
//! Position cells are stored row-major, `index = i·N + j`, with cell `(i, j)`
//! at `x = ((i − N/2)·h, (j − N/2)·h)`, so the origin is the grid point
//! `(N/2, N/2)`. Frequency fields use the natural FFT order: storage index
//! `m ∈ [0, N)` carries wavenumber `k = m` for `m < N/2` and `k = m − N`
//! otherwise; the Nyquist row/column `m = N/2` is stored as `k = −N/2`.
//!
//! The transform follows the symmetric two-dimensional convention
//! `û(ξ) = (2π)^{-1} ∫ e^{-iξ·x} u(x) dx`, discretised as
//! `û(ξ_k) = (h²/2π) Σ_x e^{-iξ_k·x} u(x)` with `ξ_k = (2π/L)·k`.

pub(crate) mod fft;
pub mod snapshot;

use std::f64::consts::PI;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GridError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("fields live on different grids")]
    SpecMismatch,
    #[error("expected a {expected:?}-space field, found {found:?}")]
    WrongSpace { expected: Space, found: Space },
    #[error("invalid L^p exponent {0}")]
    InvalidExponent(f64),
    #[error("expected {expected} values, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("malformed snapshot: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, GridError>;

/// Square periodic box `[-L/2, L/2)²` with `N` cells per side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    length: f64,
    cells: usize,
}

impl GridSpec {
    pub const MIN_CELLS: usize = 16;

    pub fn new(length: f64, cells: usize) -> Result<Self> {
        if cells < Self::MIN_CELLS {
            return Err(GridError::InvalidGrid(format!(
                "N must be at least {} (got {cells})",
                Self::MIN_CELLS
            )));
        }
        Self::coarse(length, cells)
    }

    /// Like [`GridSpec::new`] but accepts any even `N ≥ 4`. Meant for the tiny
    /// grids used by dense-matrix and brute-force checks.
    pub fn coarse(length: f64, cells: usize) -> Result<Self> {
        if !(length > 0.0) || !length.is_finite() {
            return Err(GridError::InvalidGrid(format!("L must be positive (got {length})")));
        }
        if cells < 4 || cells % 2 != 0 {
            return Err(GridError::InvalidGrid(format!("N must be even (got {cells})")));
        }
        Ok(Self { length, cells })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    /// Number of grid points, `N²`.
    pub fn len(&self) -> usize {
        self.cells * self.cells
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Spacing `h = L/N`.
    pub fn spacing(&self) -> f64 {
        self.length / self.cells as f64
    }

    /// Frequency spacing `2π/L`.
    pub fn dxi(&self) -> f64 {
        2.0 * PI / self.length
    }

    /// Quadrature weight `h²`.
    pub fn cell_area(&self) -> f64 {
        let h = self.spacing();
        h * h
    }

    pub fn origin_index(&self) -> usize {
        let c = self.cells / 2;
        c * self.cells + c
    }

    pub fn coordinate(&self, i: usize) -> f64 {
        (i as f64 - (self.cells / 2) as f64) * self.spacing()
    }

    pub fn position(&self, index: usize) -> (f64, f64) {
        let n = self.cells;
        (self.coordinate(index / n), self.coordinate(index % n))
    }

    /// Signed wavenumber carried by storage index `m`.
    pub fn wavenumber(&self, m: usize) -> i64 {
        let n = self.cells as i64;
        let m = m as i64;
        if m < n / 2 {
            m
        } else {
            m - n
        }
    }

    pub fn frequency(&self, index: usize) -> (f64, f64) {
        let n = self.cells;
        let d = self.dxi();
        (
            d * self.wavenumber(index / n) as f64,
            d * self.wavenumber(index % n) as f64,
        )
    }

    pub fn xi_squared(&self, index: usize) -> f64 {
        let (a, b) = self.frequency(index);
        a * a + b * b
    }

    /// `|ξ_k|²` for every storage index.
    pub fn xi_squared_table(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.xi_squared(i)).collect()
    }

    /// Periodic (torus) offset of row/column `i` from the origin cell.
    pub fn torus_offset(&self, i: usize) -> usize {
        let c = self.cells / 2;
        let d = i.abs_diff(c);
        d.min(self.cells - d)
    }

    /// Squared torus distance from the origin in units of `h²`.
    pub fn torus_radius_sq_cells(&self, index: usize) -> usize {
        let n = self.cells;
        let a = self.torus_offset(index / n);
        let b = self.torus_offset(index % n);
        a * a + b * b
    }

    pub fn torus_radius(&self, index: usize) -> f64 {
        (self.torus_radius_sq_cells(index) as f64).sqrt() * self.spacing()
    }

    // (−1)^{m₁+m₂}: phase from placing the origin at cell (N/2, N/2).
    fn parity(&self, index: usize) -> f64 {
        let n = self.cells;
        if ((index / n) + (index % n)) % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Space {
    Position,
    Frequency,
}

/// Complex grid function tagged with the space it lives in.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    spec: GridSpec,
    space: Space,
    values: Vec<Complex64>,
}

impl Field {
    pub fn zeros(spec: GridSpec, space: Space) -> Self {
        Self {
            spec,
            space,
            values: vec![Complex64::default(); spec.len()],
        }
    }

    pub fn from_values(spec: GridSpec, space: Space, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != spec.len() {
            return Err(GridError::LengthMismatch {
                expected: spec.len(),
                found: values.len(),
            });
        }
        Ok(Self { spec, space, values })
    }

    /// Samples `u(x, y)` at every position cell.
    pub fn from_fn(spec: GridSpec, f: impl Fn(f64, f64) -> Complex64) -> Self {
        let values = (0..spec.len())
            .map(|i| {
                let (x, y) = spec.position(i);
                f(x, y)
            })
            .collect();
        Self {
            spec,
            space: Space::Position,
            values,
        }
    }

    pub fn from_real_fn(spec: GridSpec, f: impl Fn(f64, f64) -> f64) -> Self {
        Self::from_fn(spec, |x, y| Complex64::new(f(x, y), 0.0))
    }

    /// Samples `û(ξ₁, ξ₂)` on the frequency lattice.
    pub fn from_frequency_fn(spec: GridSpec, f: impl Fn(f64, f64) -> Complex64) -> Self {
        let values = (0..spec.len())
            .map(|i| {
                let (a, b) = spec.frequency(i);
                f(a, b)
            })
            .collect();
        Self {
            spec,
            space: Space::Frequency,
            values,
        }
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn require(&self, space: Space) -> Result<()> {
        if self.space != space {
            return Err(GridError::WrongSpace {
                expected: space,
                found: self.space,
            });
        }
        Ok(())
    }

    pub fn check_same_grid(&self, other: &Field) -> Result<()> {
        if self.spec != other.spec {
            return Err(GridError::SpecMismatch);
        }
        Ok(())
    }

    pub fn to_frequency(&self) -> Result<Field> {
        self.require(Space::Position)?;
        let mut values = self.values.clone();
        fft::plan(self.spec.cells).forward(&mut values);
        let scale = self.spec.cell_area() / (2.0 * PI);
        for (i, v) in values.iter_mut().enumerate() {
            *v *= scale * self.spec.parity(i);
        }
        Ok(Field {
            spec: self.spec,
            space: Space::Frequency,
            values,
        })
    }

    pub fn to_position(&self) -> Result<Field> {
        self.require(Space::Frequency)?;
        let dxi = self.spec.dxi();
        let scale = dxi * dxi / (2.0 * PI);
        let mut values: Vec<Complex64> = self
            .values
            .iter()
            .enumerate()
            .map(|(i, v)| v * (scale * self.spec.parity(i)))
            .collect();
        fft::plan(self.spec.cells).inverse(&mut values);
        Ok(Field {
            spec: self.spec,
            space: Space::Position,
            values,
        })
    }

    /// Converts to the requested space if needed.
    pub fn into_space(self, space: Space) -> Result<Field> {
        match (self.space, space) {
            (a, b) if a == b => Ok(self),
            (Space::Position, Space::Frequency) => self.to_frequency(),
            _ => self.to_position(),
        }
    }

    fn weight(&self) -> f64 {
        match self.space {
            Space::Position => self.spec.cell_area(),
            Space::Frequency => {
                let d = self.spec.dxi();
                d * d
            }
        }
    }

    /// `⟨u, v⟩ = h² Σ u·v̄` (or `dξ² Σ û·v̂̄` in frequency space).
    pub fn inner(&self, other: &Field) -> Result<Complex64> {
        self.check_same_grid(other)?;
        other.require(self.space)?;
        let s: Complex64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b.conj())
            .sum();
        Ok(s * self.weight())
    }

    /// Bilinear pairing `h² Σ u·v` (position space only).
    pub fn bilinear(&self, other: &Field) -> Result<Complex64> {
        self.check_same_grid(other)?;
        self.require(Space::Position)?;
        other.require(Space::Position)?;
        let s: Complex64 = self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum();
        Ok(s * self.weight())
    }

    pub fn l2_norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.weight()
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_norm_sq().sqrt()
    }

    /// `(h² Σ |u|^p)^{1/p}` for a position-space field.
    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        if !(p >= 1.0) || !p.is_finite() {
            return Err(GridError::InvalidExponent(p));
        }
        self.require(Space::Position)?;
        let s: f64 = self.values.iter().map(|v| v.norm().powf(p)).sum();
        Ok((s * self.weight()).powf(1.0 / p))
    }

    /// `‖∇u‖² = dξ² Σ |ξ_k|² |û_k|²`.
    pub fn h1_seminorm_sq(&self) -> Result<f64> {
        let hat = match self.space {
            Space::Frequency => std::borrow::Cow::Borrowed(self),
            Space::Position => std::borrow::Cow::Owned(self.to_frequency()?),
        };
        let d = self.spec.dxi();
        let s: f64 = hat
            .values
            .iter()
            .enumerate()
            .map(|(i, v)| self.spec.xi_squared(i) * v.norm_sqr())
            .sum();
        Ok(s * d * d)
    }

    pub fn h1_seminorm(&self) -> Result<f64> {
        Ok(self.h1_seminorm_sq()?.sqrt())
    }

    /// Value at the origin cell (position space).
    pub fn origin_value(&self) -> Result<Complex64> {
        self.require(Space::Position)?;
        Ok(self.values[self.spec.origin_index()])
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn scale(&self, a: Complex64) -> Field {
        self.map(|v| v * a)
    }

    pub fn scale_real(&self, a: f64) -> Field {
        self.map(|v| v * a)
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Field {
        Field {
            spec: self.spec,
            space: self.space,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn conj(&self) -> Field {
        self.map(|v| v.conj())
    }

    /// Pointwise modulus as a real field.
    pub fn modulus(&self) -> Field {
        self.map(|v| Complex64::new(v.norm(), 0.0))
    }

    /// `self += a·x`.
    pub fn axpy(&mut self, a: Complex64, x: &Field) -> Result<()> {
        self.check_same_grid(x)?;
        x.require(self.space)?;
        for (s, v) in self.values.iter_mut().zip(&x.values) {
            *s += a * v;
        }
        Ok(())
    }

    /// Pointwise product with a real multiplier table.
    pub fn multiply_real(&self, m: &[f64]) -> Field {
        debug_assert_eq!(m.len(), self.values.len());
        Field {
            spec: self.spec,
            space: self.space,
            values: self.values.iter().zip(m).map(|(v, &a)| v * a).collect(),
        }
    }

    /// Pointwise product of two fields in the same space.
    pub fn hadamard(&self, other: &Field) -> Result<Field> {
        self.check_same_grid(other)?;
        other.require(self.space)?;
        Ok(Field {
            spec: self.spec,
            space: self.space,
            values: self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect(),
        })
    }

    /// Largest `|Im u|` relative to `max |u|`.
    pub fn imaginary_fraction(&self) -> f64 {
        let m = self.max_abs();
        if m == 0.0 {
            return 0.0;
        }
        self.values.iter().map(|v| v.im.abs()).fold(0.0, f64::max) / m
    }

    /// Drops imaginary parts.
    pub fn real_part(&self) -> Field {
        self.map(|v| Complex64::new(v.re, 0.0))
    }
}

impl<'a> Add<&'a Field> for &'a Field {
    type Output = Field;
    fn add(self, rhs: &'a Field) -> Field {
        assert_eq!(self.spec, rhs.spec, "grid mismatch");
        assert_eq!(self.space, rhs.space, "space mismatch");
        Field {
            spec: self.spec,
            space: self.space,
            values: self.values.iter().zip(&rhs.values).map(|(a, b)| a + b).collect(),
        }
    }
}

impl<'a> Sub<&'a Field> for &'a Field {
    type Output = Field;
    fn sub(self, rhs: &'a Field) -> Field {
        assert_eq!(self.spec, rhs.spec, "grid mismatch");
        assert_eq!(self.space, rhs.space, "space mismatch");
        Field {
            spec: self.spec,
            space: self.space,
            values: self.values.iter().zip(&rhs.values).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul<Complex64> for &Field {
    type Output = Field;
    fn mul(self, rhs: Complex64) -> Field {
        self.scale(rhs)
    }
}

impl Mul<f64> for &Field {
    type Output = Field;
    fn mul(self, rhs: f64) -> Field {
        self.scale_real(rhs)
    }
}

/// Periodic convolution `w ∗ u` realised as the inverse transform of `2π·ŵ·û`.
pub fn convolve(w_hat: &Field, u: &Field) -> Result<Field> {
    w_hat.check_same_grid(u)?;
    w_hat.require(Space::Frequency)?;
    let u_hat = u.to_frequency()?;
    let values = u_hat
        .values
        .iter()
        .zip(&w_hat.values)
        .map(|(a, b)| a * b * (2.0 * PI))
        .collect();
    Field {
        spec: u.spec,
        space: Space::Frequency,
        values,
    }
    .to_position()
}

/// Random smooth field with uniform complex coefficients on the disc
/// `|k| ≤ max_wavenumber` (integer wavenumbers), normalised to unit L² norm.
pub fn random_band_limited<R: Rng + ?Sized>(spec: GridSpec, max_wavenumber: f64, rng: &mut R) -> Field {
    let n = spec.cells();
    let k2max = max_wavenumber * max_wavenumber;
    let values = (0..spec.len())
        .map(|i| {
            let (a, b) = (spec.wavenumber(i / n) as f64, spec.wavenumber(i % n) as f64);
            if a * a + b * b <= k2max {
                Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
            } else {
                Complex64::default()
            }
        })
        .collect();
    let u = Field {
        spec,
        space: Space::Frequency,
        values,
    }
    .to_position()
    .expect("frequency field");
    let norm = u.l2_norm();
    if norm > 0.0 {
        u.scale_real(1.0 / norm)
    } else {
        u
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn random_field(spec: GridSpec, rng: &mut ChaCha8Rng) -> Field {
        let values = (0..spec.len())
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        Field::from_values(spec, Space::Position, values).unwrap()
    }

    #[test]
    fn grid_validation() {
        assert!(GridSpec::new(40.0, 15).is_err());
        assert!(GridSpec::new(40.0, 8).is_err());
        assert!(GridSpec::new(-1.0, 16).is_err());
        assert!(GridSpec::coarse(1.0, 8).is_ok());
        assert!(GridSpec::coarse(1.0, 7).is_err());
        let g = GridSpec::new(40.0, 64).unwrap();
        assert_eq!(g.spacing() * 64.0, 40.0);
        assert!((g.dxi() * 64.0 - 2.0 * PI * 64.0 / 40.0).abs() < 1e-12);
        assert_eq!(g.position(g.origin_index()), (0.0, 0.0));
        assert_eq!(g.wavenumber(32), -32);
        assert_eq!(g.wavenumber(31), 31);
    }

    #[test]
    fn constant_transforms_to_zero_mode() {
        let spec = GridSpec::new(12.0, 16).unwrap();
        let u = Field::from_real_fn(spec, |_, _| 1.0);
        let hat = u.to_frequency().unwrap();
        let l = spec.length();
        assert!((hat.values()[0] - c(l * l / (2.0 * PI))).norm() < 1e-12);
        for v in &hat.values()[1..] {
            assert!(v.norm() < 1e-12);
        }
        assert!((u.l2_norm() - l).abs() < 1e-12);
    }

    #[test]
    fn gaussian_is_self_dual() {
        let spec = GridSpec::new(20.0, 128).unwrap();
        let u = Field::from_real_fn(spec, |x, y| (-(x * x + y * y) / 2.0).exp());
        let hat = u.to_frequency().unwrap();
        for (i, v) in hat.values().iter().enumerate() {
            let k2 = spec.xi_squared(i);
            assert!((v - c((-k2 / 2.0).exp())).norm() < 1e-10);
        }
    }

    #[test]
    fn parseval_and_round_trip() {
        let spec = GridSpec::new(7.0, 32).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let u = random_field(spec, &mut rng);
            let hat = u.to_frequency().unwrap();
            let (a, b) = (u.l2_norm_sq(), hat.l2_norm_sq());
            assert!((a - b).abs() / a < 1e-13);
            let back = hat.to_position().unwrap();
            let err = (&back - &u).l2_norm() / u.l2_norm();
            assert!(err < 1e-13);
        }
    }

    #[test]
    fn transform_is_linear_and_conjugate_symmetric() {
        let spec = GridSpec::new(9.0, 16).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let u = random_field(spec, &mut rng);
        let v = random_field(spec, &mut rng);
        let a = Complex64::new(0.3, -1.2);
        let lhs = (&u.scale(a) + &v).to_frequency().unwrap();
        let rhs = &u.to_frequency().unwrap().scale(a) + &v.to_frequency().unwrap();
        assert!((&lhs - &rhs).l2_norm() < 1e-12 * lhs.l2_norm());
        // real input: û(−k) = conj û(k)
        let r = u.real_part().to_frequency().unwrap();
        let n = spec.cells();
        for m1 in 0..n {
            for m2 in 0..n {
                let a = r.values()[m1 * n + m2];
                let b = r.values()[((n - m1) % n) * n + (n - m2) % n];
                assert!((a - b.conj()).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn wrong_space_is_rejected() {
        let spec = GridSpec::new(9.0, 16).unwrap();
        let u = Field::zeros(spec, Space::Frequency);
        assert!(matches!(u.to_frequency(), Err(GridError::WrongSpace { .. })));
        assert!(u.lp_norm(2.0).is_err());
        let p = Field::zeros(spec, Space::Position);
        assert!(matches!(p.lp_norm(0.5), Err(GridError::InvalidExponent(_))));
        let other = Field::zeros(GridSpec::new(10.0, 16).unwrap(), Space::Position);
        assert!(matches!(p.inner(&other), Err(GridError::SpecMismatch)));
    }

    #[test]
    fn norms_of_simple_fields() {
        let spec = GridSpec::new(10.0, 32).unwrap();
        let u = Field::from_real_fn(spec, |_, _| -3.0);
        assert!((u.l2_norm() - 30.0).abs() < 1e-12);
        assert!((u.lp_norm(3.0).unwrap() - 3.0 * 100f64.powf(1.0 / 3.0)).abs() < 1e-12);
        let k = (3i64, -2i64);
        let (a, b) = (k.0 as f64 * spec.dxi(), k.1 as f64 * spec.dxi());
        let mode = Field::from_fn(spec, |x, y| Complex64::from_polar(1.0, a * x + b * y));
        let s = mode.h1_seminorm().unwrap();
        assert!((s - (a * a + b * b).sqrt() * 10.0).abs() < 1e-10);
    }

    #[test]
    fn delta_kernel_is_identity() {
        let spec = GridSpec::new(6.0, 16).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let u = random_field(spec, &mut rng);
        let w_hat = Field::from_frequency_fn(spec, |_, _| c(1.0 / (2.0 * PI)));
        let out = convolve(&w_hat, &u).unwrap();
        assert!((&out - &u).l2_norm() < 1e-13 * u.l2_norm());
    }

    #[test]
    fn gaussian_convolution_matches_closed_form() {
        let spec = GridSpec::new(40.0, 256).unwrap();
        let (s1, s2) = (1.0_f64, 1.7_f64);
        let g = |s: f64| move |x: f64, y: f64| (-(x * x + y * y) / (2.0 * s * s)).exp();
        let w_hat = Field::from_real_fn(spec, g(s1)).to_frequency().unwrap();
        let u = Field::from_real_fn(spec, g(s2));
        let out = convolve(&w_hat, &u).unwrap();
        let s = s1 * s1 + s2 * s2;
        let amp = 2.0 * PI * s1 * s1 * s2 * s2 / s;
        let exact = Field::from_real_fn(spec, |x, y| amp * (-(x * x + y * y) / (2.0 * s)).exp());
        let err = out.values().iter().zip(exact.values()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-8, "{err}");
        assert!(out.imaginary_fraction() < 1e-12);
    }

    #[test]
    fn convolution_matches_direct_periodic_sum() {
        let spec = GridSpec::coarse(3.0, 8).unwrap();
        let n = spec.cells();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let w = random_field(spec, &mut rng);
        let u = random_field(spec, &mut rng);
        let out = convolve(&w.to_frequency().unwrap(), &u).unwrap();
        let h2 = spec.cell_area();
        let c0 = n / 2;
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in 0..n {
                let mut s = Complex64::default();
                for a in 0..n {
                    for b in 0..n {
                        // offset x_i − y_a mapped back into the stored cell range
                        let di = (i + n - a + c0) % n;
                        let dj = (j + n - b + c0) % n;
                        s += w.values()[di * n + dj] * u.values()[a * n + b] * h2;
                    }
                }
                worst = worst.max((s - out.values()[i * n + j]).norm());
            }
        }
        assert!(worst < 1e-12, "{worst}");
    }

    #[test]
    fn convolution_pairing_is_symmetric_for_even_kernels() {
        let spec = GridSpec::new(12.0, 32).unwrap();
        let w = Field::from_real_fn(spec, |x, y| 1.0 / (1.0 + x * x + y * y));
        let w_hat = w.to_frequency().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let f = random_field(spec, &mut rng).real_part();
            let g = random_field(spec, &mut rng).real_part();
            let lhs = convolve(&w_hat, &f).unwrap().inner(&g).unwrap();
            let rhs = f.inner(&convolve(&w_hat, &g).unwrap()).unwrap();
            assert!((lhs - rhs).norm() < 1e-12 * lhs.norm().max(1.0));
        }
    }
}
