//! Radial convolution kernels `w` and the Hartree nonlinearity `(w ∗ |ψ|²)ψ`.
//!
//! Kernels are sampled in position space at the torus distance from the
//! origin (one periodic image), so that non-negativity and radial
//! monotonicity hold exactly on the grid.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::{convolve, Field, GridError, GridSpec, Space};
use crate::rearrange::CellRanking;

#[derive(Debug, Error)]
pub enum PotentialError {
    #[error("invalid potential parameter: {0}")]
    InvalidParameter(String),
    #[error("kernel violates the admissibility assumption: {0}")]
    Inadmissible(String),
    #[error(transparent)]
    Grid(#[from] GridError),
}

pub type Result<T> = std::result::Result<T, PotentialError>;

/// Kernel description, matching the JSON configuration block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum PotentialSpec {
    Riesz {
        eta: f64,
        #[serde(default)]
        p1: Option<f64>,
        #[serde(default)]
        p2: Option<f64>,
    },
    Gaussian {
        sigma: f64,
        #[serde(default)]
        p1: Option<f64>,
        #[serde(default)]
        p2: Option<f64>,
    },
    Bump {
        radius: f64,
        #[serde(default)]
        p1: Option<f64>,
        #[serde(default)]
        p2: Option<f64>,
    },
    /// Radial samples `w(j·dr)`, `j = 0, 1, …`; zero beyond the last sample.
    Table {
        samples: Vec<f64>,
        dr: f64,
        #[serde(default)]
        p1: Option<f64>,
        #[serde(default)]
        p2: Option<f64>,
    },
}

impl PotentialSpec {
    pub fn build(&self, spec: GridSpec) -> Result<Potential> {
        let (pot, p1, p2) = match self {
            Self::Riesz { eta, p1, p2 } => (Potential::riesz(*eta, spec)?, p1, p2),
            Self::Gaussian { sigma, p1, p2 } => (Potential::gaussian(*sigma, spec)?, p1, p2),
            Self::Bump { radius, p1, p2 } => (Potential::bump(*radius, spec)?, p1, p2),
            Self::Table { samples, dr, p1, p2 } => (Potential::table(samples, *dr, spec)?, p1, p2),
        };
        match (p1, p2) {
            (None, None) => Ok(pot),
            (a, b) => {
                let (d1, d2) = pot.exponents();
                pot.with_exponents(a.unwrap_or(d1), b.unwrap_or(d2))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Kind {
    Riesz { eta: f64 },
    Gaussian { sigma: f64 },
    Bump { radius: f64 },
    Table,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    MassSubcritical,
    MassCritical,
}

#[derive(Debug, Clone)]
pub struct Potential {
    kind: Kind,
    w: Field,
    w_hat: Field,
    p1: f64,
    p2: f64,
}

impl Potential {
    /// `w(x) = |x|^{-η}` at the torus distance, with the origin cell set to
    /// `(h/2)^{-η}`. Declared exponents default to `p₁ = p₂ = (1 + 2/η)/2`,
    /// inside the admissible range `[1, 2/η)`.
    pub fn riesz(eta: f64, spec: GridSpec) -> Result<Self> {
        if !(eta > 0.0 && eta < 2.0) {
            return Err(PotentialError::InvalidParameter(format!("eta = {eta} must lie in (0, 2)")));
        }
        let h = spec.spacing();
        let origin = (h / 2.0).powf(-eta);
        let w = radial_field(spec, |r| if r == 0.0 { origin } else { r.powf(-eta) });
        let p = 0.5 * (1.0 + 2.0 / eta);
        Self::from_samples(Kind::Riesz { eta }, w, p, p)
    }

    /// `w(x) = exp(−|x|²/2σ²)`, declared `p = 2` (mass sub-critical).
    pub fn gaussian(sigma: f64, spec: GridSpec) -> Result<Self> {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(PotentialError::InvalidParameter(format!("sigma = {sigma} must be positive")));
        }
        let w = radial_field(spec, |r| (-r * r / (2.0 * sigma * sigma)).exp());
        Self::from_samples(Kind::Gaussian { sigma }, w, 2.0, 2.0)
    }

    /// Indicator of the closed disc of the given radius, declared `p = 2`.
    pub fn bump(radius: f64, spec: GridSpec) -> Result<Self> {
        if !(radius >= 0.0) || !radius.is_finite() {
            return Err(PotentialError::InvalidParameter(format!("radius = {radius} must be non-negative")));
        }
        let cut = radius * (1.0 + 1e-12);
        let w = radial_field(spec, |r| if r <= cut { 1.0 } else { 0.0 });
        Self::from_samples(Kind::Bump { radius }, w, 2.0, 2.0)
    }

    /// Radial table `w(j·dr) = samples[j]`, interpolated by monotone cubic
    /// Hermite splines and set to zero past the last sample.
    pub fn table(samples: &[f64], dr: f64, spec: GridSpec) -> Result<Self> {
        if !(dr > 0.0) || !dr.is_finite() {
            return Err(PotentialError::InvalidParameter(format!("dr = {dr} must be positive")));
        }
        if samples.len() < 2 {
            return Err(PotentialError::InvalidParameter("table needs at least two samples".into()));
        }
        if let Some(v) = samples.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
            return Err(PotentialError::Inadmissible(format!("negative or non-finite sample {v}")));
        }
        if let Some(j) = samples.windows(2).position(|s| s[1] > s[0]) {
            return Err(PotentialError::Inadmissible(format!(
                "samples increase between r = {} and r = {}",
                j as f64 * dr,
                (j + 1) as f64 * dr
            )));
        }
        let spline = Pchip::new(samples, dr);
        let w = radial_field(spec, |r| spline.eval(r));
        Self::from_samples(Kind::Table, w, 2.0, 2.0)
    }

    fn from_samples(kind: Kind, w: Field, p1: f64, p2: f64) -> Result<Self> {
        check_admissible(&w)?;
        let w_hat = w.to_frequency()?.real_part();
        Ok(Self { kind, w, w_hat, p1, p2 })
    }

    /// Overrides the declared integrability exponents.
    pub fn with_exponents(mut self, p1: f64, p2: f64) -> Result<Self> {
        for p in [p1, p2] {
            if !(p >= 1.0) || !p.is_finite() {
                return Err(PotentialError::InvalidParameter(format!("exponent {p} must lie in [1, inf)")));
            }
        }
        self.p1 = p1;
        self.p2 = p2;
        Ok(self)
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    pub fn spec(&self) -> &GridSpec {
        self.w.spec()
    }

    /// Position-space samples.
    pub fn samples(&self) -> &Field {
        &self.w
    }

    pub fn w_hat(&self) -> &Field {
        &self.w_hat
    }

    pub fn exponents(&self) -> (f64, f64) {
        (self.p1, self.p2)
    }

    /// `p = min(p₁, p₂)`.
    pub fn p(&self) -> f64 {
        self.p1.min(self.p2)
    }

    pub fn regime(&self) -> Regime {
        if self.p() == 1.0 {
            Regime::MassCritical
        } else {
            Regime::MassSubcritical
        }
    }

    /// `w ∗ |ψ|²` as a real field.
    pub fn mean_field(&self, psi: &Field) -> Result<Field> {
        Ok(convolve(&self.w_hat, &psi.map(|z| Complex64::new(z.norm_sqr(), 0.0)))?.real_part())
    }

    /// `(w ∗ |ψ|²)·ψ`.
    pub fn hartree_term(&self, psi: &Field) -> Result<Field> {
        Ok(self.mean_field(psi)?.hadamard(psi)?)
    }

    /// `∫ (w ∗ |ψ|²)|ψ|²`.
    pub fn hartree_energy(&self, psi: &Field) -> Result<f64> {
        let m = self.mean_field(psi)?;
        let s: f64 = m.values().iter().zip(psi.values()).map(|(a, b)| a.re * b.norm_sqr()).sum();
        Ok(s * psi.spec().cell_area())
    }

    /// `∫ (w ∗ (ψ₁ψ₂)) ψ₃ψ₄`.
    pub fn quartic_pairing(&self, psi: [&Field; 4]) -> Result<Complex64> {
        let prod12 = psi[0].hadamard(psi[1])?;
        let prod34 = psi[2].hadamard(psi[3])?;
        Ok(convolve(&self.w_hat, &prod12)?.bilinear(&prod34)?)
    }

    /// Whether the samples are radially non-increasing along the cell ranking.
    pub fn is_monotone(&self) -> bool {
        check_admissible(&self.w).is_ok()
    }
}

fn radial_field(spec: GridSpec, w: impl Fn(f64) -> f64) -> Field {
    let values = (0..spec.len())
        .map(|i| Complex64::new(w(spec.torus_radius(i)), 0.0))
        .collect();
    Field::from_values(spec, Space::Position, values).expect("grid-sized buffer")
}

fn check_admissible(w: &Field) -> Result<()> {
    let vals = w.values();
    if let Some(v) = vals.iter().find(|v| !(v.re >= 0.0) || !v.re.is_finite()) {
        return Err(PotentialError::Inadmissible(format!("negative or non-finite sample {}", v.re)));
    }
    if vals.iter().all(|v| v.re == 0.0) {
        return Err(PotentialError::Inadmissible("kernel vanishes identically".into()));
    }
    let ranking = CellRanking::shared(*w.spec());
    let mut prev = f64::INFINITY;
    for &i in ranking.order() {
        let v = vals[i].re;
        if v > prev {
            return Err(PotentialError::Inadmissible(format!(
                "kernel increases at torus radius {}",
                w.spec().torus_radius(i)
            )));
        }
        prev = v;
    }
    Ok(())
}

/// Monotone piecewise-cubic Hermite interpolant on a uniform grid
/// (Fritsch–Butland harmonic-mean slopes).
#[derive(Debug, Clone)]
struct Pchip {
    y: Vec<f64>,
    d: Vec<f64>,
    dr: f64,
}

impl Pchip {
    fn new(y: &[f64], dr: f64) -> Self {
        let n = y.len();
        let delta: Vec<f64> = y.windows(2).map(|s| (s[1] - s[0]) / dr).collect();
        let mut d = vec![0.0; n];
        for k in 1..n - 1 {
            let (a, b) = (delta[k - 1], delta[k]);
            if a * b > 0.0 {
                d[k] = 2.0 * a * b / (a + b);
            }
        }
        d[0] = end_slope(delta[0], delta.get(1).copied().unwrap_or(delta[0]));
        d[n - 1] = end_slope(delta[n - 2], if n > 2 { delta[n - 3] } else { delta[n - 2] });
        Self { y: y.to_vec(), d, dr }
    }

    fn eval(&self, r: f64) -> f64 {
        let n = self.y.len();
        let s = r / self.dr;
        if s >= (n - 1) as f64 {
            return if s <= (n - 1) as f64 * (1.0 + 1e-12) { self.y[n - 1] } else { 0.0 };
        }
        let k = s.floor() as usize;
        let t = s - k as f64;
        let (h00, h10, h01, h11) = (
            (1.0 + 2.0 * t) * (1.0 - t) * (1.0 - t),
            t * (1.0 - t) * (1.0 - t),
            t * t * (3.0 - 2.0 * t),
            t * t * (t - 1.0),
        );
        h00 * self.y[k] + h10 * self.dr * self.d[k] + h01 * self.y[k + 1] + h11 * self.dr * self.d[k + 1]
    }
}

// Three-point end slope, clipped to keep the interpolant monotone.
fn end_slope(d0: f64, d1: f64) -> f64 {
    let s = 0.5 * (3.0 * d0 - d1);
    if s * d0 <= 0.0 {
        0.0
    } else if d0 * d1 <= 0.0 && s.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        s
    }
}
