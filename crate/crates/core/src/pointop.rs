//! The discrete point-interaction operator `−Δ_α` on a periodic grid.
//!
//! The operator is defined through its resolvent. At the reference frequency
//! `ω_ref` the resolvent is the free multiplier `(ω_ref + |ξ|²)^{-1}` plus the
//! rank-one term `⟨g, G⟩ G / β_α(ω_ref)`. Inverting that by Sherman–Morrison
//! gives
//!
//! ```text
//! A g = F⁻¹[|ξ|² ĝ] − g(0)/(h² D) · e₀,     D = β_α(ω_ref) + G_ref(0),
//! ```
//!
//! where `e₀` is the unit vector at the origin cell. Every other resolvent of
//! this `A` is again free-plus-rank-one, with the grid coefficient
//!
//! ```text
//! β_h(ω) = D − G_ω(0) = β_α(ω_ref) + (ω − ω_ref)·dξ² Σ Ĝ_ω Ĝ_ref,
//! ```
//!
//! which tends to `β_α(ω)` as the grid is refined. Using `β_h` instead of the
//! continuum `β_α` keeps all resolvents, forms and spectra of the grid
//! operator exactly consistent with one another.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, OnceLock, RwLock};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::{Field, GridError, GridSpec, Space};
use crate::specfun::{self, SpecialFunctionError};

const BOUND_STATE_MAX_ITER: usize = 10_000;
const BOUND_STATE_TOL: f64 = 1e-12;
// Also wait for the eigenvector, which converges only linearly.
const BOUND_STATE_VECTOR_TOL: f64 = 1e-11;
const GREEN_CACHE_LIMIT: usize = 64;

#[derive(Debug, Error)]
pub enum PointOpError {
    #[error("invalid point-interaction parameters: {0}")]
    InvalidParams(String),
    #[error("resolvent frequency {0} outside the domain")]
    Domain(Complex64),
    #[error("resolvent pole: beta vanishes at omega = {0}")]
    Pole(Complex64),
    #[error("singular Sherman-Morrison denominator {0}")]
    SingularCorrection(f64),
    #[error("bound-state iteration did not converge in {iterations} steps (last increment {increment:e})")]
    NoConvergence { iterations: usize, increment: f64 },
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Special(#[from] SpecialFunctionError),
}

pub type Result<T> = std::result::Result<T, PointOpError>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointOpParams {
    alpha: f64,
    e_alpha: f64,
    omega_ref: f64,
}

impl PointOpParams {
    /// Parameters with the default reference frequency `|e_α| + 1`.
    pub fn new(alpha: f64) -> Result<Self> {
        let e = specfun::e_alpha(alpha)?;
        Self::with_omega_ref(alpha, e.abs() + 1.0)
    }

    pub fn with_omega_ref(alpha: f64, omega_ref: f64) -> Result<Self> {
        let e_alpha = specfun::e_alpha(alpha)?;
        if !(omega_ref > e_alpha.abs()) || !omega_ref.is_finite() {
            return Err(PointOpError::InvalidParams(format!(
                "omega_ref = {omega_ref} must exceed |e_alpha| = {}",
                e_alpha.abs()
            )));
        }
        Ok(Self {
            alpha,
            e_alpha,
            omega_ref,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn e_alpha(&self) -> f64 {
        self.e_alpha
    }

    pub fn omega_ref(&self) -> f64 {
        self.omega_ref
    }

    /// Continuum `β_α(ω)` on the real axis.
    pub fn beta(&self, omega: f64) -> Result<f64> {
        Ok(specfun::beta_real(self.alpha, omega)?)
    }
}

/// Element `v = f + c·G_λ` of the energy space.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyElement {
    pub f: Field,
    pub c: Complex64,
    pub lambda: f64,
}

impl EnergyElement {
    pub fn new(f: Field, c: Complex64, lambda: f64) -> Self {
        Self { f, c, lambda }
    }

    pub fn scale(&self, mu: f64) -> Self {
        Self {
            f: self.f.scale_real(mu),
            c: self.c * mu,
            lambda: self.lambda,
        }
    }
}

/// Free Green function at one frequency, in both representations.
#[derive(Debug)]
pub struct Green {
    omega: Complex64,
    hat: Vec<Complex64>,
    origin: Complex64,
    field: OnceLock<Field>,
}

impl Green {
    pub fn omega(&self) -> Complex64 {
        self.omega
    }

    /// `Ĝ_ω(ξ_k) = (2π)^{-1}(ω + |ξ_k|²)^{-1}` in storage order.
    pub fn hat(&self) -> &[Complex64] {
        &self.hat
    }

    /// `G_ω(0) = dξ² Σ Ĝ_ω / 2π`.
    pub fn origin(&self) -> Complex64 {
        self.origin
    }
}

/// The grid operator `A ≈ −Δ_α` together with its resolvent family.
#[derive(Debug)]
pub struct PointOperator {
    params: PointOpParams,
    spec: GridSpec,
    xi2: Vec<f64>,
    beta_ref: f64,
    denom: f64,
    green_ref: Arc<Green>,
    greens: RwLock<HashMap<(u64, u64), Arc<Green>>>,
    bound: OnceLock<(f64, Field)>,
}

impl PointOperator {
    pub fn new(params: PointOpParams, spec: GridSpec) -> Result<Self> {
        let xi2 = spec.xi_squared_table();
        let beta_ref = params.beta(params.omega_ref)?;
        let green_ref = Arc::new(build_green(&spec, &xi2, Complex64::new(params.omega_ref, 0.0))?);
        let denom = beta_ref + green_ref.origin.re;
        if !(denom.abs() > 1e-14 * (1.0 + beta_ref.abs())) {
            return Err(PointOpError::SingularCorrection(denom));
        }
        Ok(Self {
            params,
            spec,
            xi2,
            beta_ref,
            denom,
            green_ref,
            greens: RwLock::new(HashMap::new()),
            bound: OnceLock::new(),
        })
    }

    pub fn params(&self) -> &PointOpParams {
        &self.params
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    /// `|ξ_k|²` in storage order.
    pub fn xi_squared(&self) -> &[f64] {
        &self.xi2
    }

    /// Sherman–Morrison denominator `D = β_α(ω_ref) + G_ref(0)`.
    pub fn denominator(&self) -> f64 {
        self.denom
    }

    pub fn green(&self, omega: Complex64) -> Result<Arc<Green>> {
        if omega == Complex64::new(self.params.omega_ref, 0.0) {
            return Ok(self.green_ref.clone());
        }
        let key = (omega.re.to_bits(), omega.im.to_bits());
        if let Some(g) = self.greens.read().expect("green cache poisoned").get(&key) {
            return Ok(g.clone());
        }
        let g = Arc::new(build_green(&self.spec, &self.xi2, omega)?);
        let mut cache = self.greens.write().expect("green cache poisoned");
        if cache.len() >= GREEN_CACHE_LIMIT {
            cache.clear();
        }
        Ok(cache.entry(key).or_insert(g).clone())
    }

    /// Periodised discrete Green function `F⁻¹[(2π)^{-1}(ω + |ξ|²)^{-1}]`.
    pub fn green_field(&self, omega: Complex64) -> Result<Field> {
        let g = self.green(omega)?;
        self.green_position(&g)
    }

    pub fn green_field_real(&self, omega: f64) -> Result<Field> {
        self.green_field(Complex64::new(omega, 0.0))
    }

    fn green_position(&self, g: &Green) -> Result<Field> {
        if let Some(f) = g.field.get() {
            return Ok(f.clone());
        }
        let hat = Field::from_values(self.spec, Space::Frequency, g.hat.clone())?;
        let mut field = hat.to_position()?;
        if g.omega.im == 0.0 {
            field = field.real_part();
        }
        Ok(g.field.get_or_init(|| field).clone())
    }

    /// Grid coefficient `β_h(ω)` of the rank-one resolvent term.
    pub fn beta_h(&self, omega: Complex64) -> Result<Complex64> {
        let g = self.green(omega)?;
        let d = self.spec.dxi();
        let s: Complex64 = g
            .hat
            .iter()
            .zip(&self.green_ref.hat)
            .map(|(a, b)| a * b)
            .sum();
        Ok(self.beta_ref + (omega - self.params.omega_ref) * s * (d * d))
    }

    pub fn beta_h_real(&self, omega: f64) -> Result<f64> {
        Ok(self.beta_h(Complex64::new(omega, 0.0))?.re)
    }

    /// Applies `(A + ω)^{-1}` to a frequency-space coefficient vector.
    pub fn resolvent_apply_hat(&self, g_hat: &[Complex64], omega: Complex64) -> Result<Vec<Complex64>> {
        let green = self.green(omega)?;
        let beta = self.beta_h(omega)?;
        if !(beta.norm() > 1e-14 * (1.0 + self.beta_ref.abs())) {
            return Err(PointOpError::Pole(omega));
        }
        let d = self.spec.dxi();
        // pairing h² Σ g·G_ω, evaluated in frequency space
        let pairing: Complex64 = g_hat.iter().zip(&green.hat).map(|(a, b)| a * b).sum::<Complex64>() * (d * d);
        let coef = pairing / beta;
        Ok(g_hat
            .iter()
            .zip(&green.hat)
            .map(|(a, gk)| a * gk * (2.0 * PI) + coef * gk)
            .collect())
    }

    /// `(−Δ_α + ω)^{-1} g`. The rank-one coefficient uses the bilinear
    /// pairing `h² Σ g·G_ω`, which coincides with the Hermitian one at real
    /// `ω` (where `G_ω` is real) and continues analytically off the axis.
    pub fn resolvent_apply(&self, g: &Field, omega: Complex64) -> Result<Field> {
        self.check(g)?;
        let g_hat = g.to_frequency()?;
        let out = self.resolvent_apply_hat(g_hat.values(), omega)?;
        Ok(Field::from_values(self.spec, Space::Frequency, out)?.to_position()?)
    }

    pub fn resolvent_apply_real(&self, g: &Field, omega: f64) -> Result<Field> {
        self.resolvent_apply(g, Complex64::new(omega, 0.0))
    }

    /// `A g`.
    pub fn operator_apply(&self, g: &Field) -> Result<Field> {
        self.check(g)?;
        let g0 = g.origin_value()?;
        let hat = g.to_frequency()?.multiply_real(&self.xi2);
        let mut out = hat.to_position()?;
        let o = self.spec.origin_index();
        out.values_mut()[o] -= g0 / (self.spec.cell_area() * self.denom);
        Ok(out)
    }

    /// `Re⟨A g, g⟩`.
    pub fn quadratic_form(&self, g: &Field) -> Result<f64> {
        Ok(self.operator_apply(g)?.inner(g)?.re)
    }

    /// `‖∇f‖² + λ‖f‖² + |c|²·β_h(λ)`.
    ///
    /// On the grid this equals `(A + λ)[v]` for `v = f + c·G_λ` exactly when
    /// the pair is in canonical form, `c·β_h(λ) = f(0)`; in general the two
    /// differ by `|c·β_h(λ) − f(0)|² / D`.
    pub fn birman_form(&self, elem: &EnergyElement) -> Result<f64> {
        self.check_lambda(elem.lambda)?;
        self.check(&elem.f)?;
        let beta = self.beta_h_real(elem.lambda)?;
        Ok(elem.f.h1_seminorm_sq()? + elem.lambda * elem.f.l2_norm_sq() + elem.c.norm_sqr() * beta)
    }

    /// `f + c·G_λ`.
    pub fn assemble(&self, elem: &EnergyElement) -> Result<Field> {
        self.check(&elem.f)?;
        let mut v = elem.f.clone();
        v.axpy(elem.c, &self.green_field_real(elem.lambda)?)?;
        Ok(v)
    }

    /// Canonical split `v = f + c·G_λ` with `c = v(0)/D`, i.e. `c·β_h(λ) = f(0)`.
    pub fn decompose(&self, v: &Field, lambda: f64) -> Result<EnergyElement> {
        self.check_lambda(lambda)?;
        self.check(v)?;
        let c = v.origin_value()? / self.denom;
        let mut f = v.clone();
        f.axpy(-c, &self.green_field_real(lambda)?)?;
        Ok(EnergyElement { f, c, lambda })
    }

    /// `√(Re⟨Ag, g⟩ + (1 − e_h)‖g‖²)`.
    pub fn h1alpha_norm(&self, g: &Field) -> Result<f64> {
        Ok(self.h1alpha_norm_sq(g)?.sqrt())
    }

    pub fn h1alpha_norm_sq(&self, g: &Field) -> Result<f64> {
        let e_h = self.discrete_eigenvalue()?;
        Ok((self.quadratic_form(g)? + (1.0 - e_h) * g.l2_norm_sq()).max(0.0))
    }

    /// The discrete eigenvalue `e_h` (cached after the first call).
    pub fn discrete_eigenvalue(&self) -> Result<f64> {
        Ok(self.bound_state()?.0)
    }

    /// Power iteration on `(A + ω_ref)^{-1}` started from `G_ref`. Returns the
    /// eigenvalue `e_h = 1/μ − ω_ref` and the unit-norm, positive eigenvector.
    pub fn bound_state(&self) -> Result<(f64, Field)> {
        if let Some((e, phi)) = self.bound.get() {
            return Ok((*e, phi.clone()));
        }
        let omega = Complex64::new(self.params.omega_ref, 0.0);
        let d2 = self.spec.dxi() * self.spec.dxi();
        let norm = |v: &[Complex64]| (v.iter().map(|z| z.norm_sqr()).sum::<f64>() * d2).sqrt();
        let mut x = self.green_ref.hat.clone();
        let n0 = norm(&x);
        x.iter_mut().for_each(|z| *z /= n0);
        let mut e_prev = f64::INFINITY;
        let mut increment = f64::INFINITY;
        for _ in 0..BOUND_STATE_MAX_ITER {
            let y = self.resolvent_apply_hat(&x, omega)?;
            let mu: f64 = y.iter().zip(&x).map(|(a, b)| (a * b.conj()).re).sum::<f64>() * d2;
            let e = 1.0 / mu - self.params.omega_ref;
            increment = (e - e_prev).abs();
            let residual = norm(&y.iter().zip(&x).map(|(a, b)| a - b * mu).collect::<Vec<_>>()) / mu;
            let ny = norm(&y);
            x = y.into_iter().map(|z| z / ny).collect();
            e_prev = e;
            if increment < BOUND_STATE_TOL && residual < BOUND_STATE_VECTOR_TOL {
                let mut phi = Field::from_values(self.spec, Space::Frequency, x)?
                    .to_position()?
                    .real_part();
                if phi.origin_value()?.re < 0.0 {
                    phi = phi.scale_real(-1.0);
                }
                let phi = phi.scale_real(1.0 / phi.l2_norm());
                let stored = self.bound.get_or_init(|| (e, phi));
                return Ok((stored.0, stored.1.clone()));
            }
        }
        Err(PointOpError::NoConvergence {
            iterations: BOUND_STATE_MAX_ITER,
            increment,
        })
    }

    fn check(&self, g: &Field) -> Result<()> {
        if *g.spec() != self.spec {
            return Err(GridError::SpecMismatch.into());
        }
        g.require(Space::Position)?;
        Ok(())
    }

    fn check_lambda(&self, lambda: f64) -> Result<()> {
        if !(lambda > self.params.e_alpha.abs()) || !lambda.is_finite() {
            return Err(PointOpError::InvalidParams(format!(
                "lambda = {lambda} must exceed |e_alpha| = {}",
                self.params.e_alpha.abs()
            )));
        }
        Ok(())
    }
}

fn build_green(spec: &GridSpec, xi2: &[f64], omega: Complex64) -> Result<Green> {
    if !omega.re.is_finite() || !omega.im.is_finite() || (omega.im == 0.0 && !(omega.re > 0.0)) {
        return Err(PointOpError::Domain(omega));
    }
    let hat: Vec<Complex64> = xi2.iter().map(|&k2| 1.0 / ((omega + k2) * (2.0 * PI))).collect();
    let d = spec.dxi();
    let origin = hat.iter().sum::<Complex64>() * (d * d / (2.0 * PI));
    Ok(Green {
        omega,
        hat,
        origin,
        field: OnceLock::new(),
    })
}
