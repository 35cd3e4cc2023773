//! Time integration of `iψ_t = −Δ_α ψ + θ(w ∗ |ψ|²)ψ` by Strang splitting.
//!
//! The nonlinear sub-step is the exact flow at frozen modulus, the linear one
//! the Cayley transform `(I + iτA/2)⁻¹(I − iτA/2)`, evaluated through the
//! resolvent at `ω = −2i/τ`. Both are unitary, so mass is conserved to
//! roundoff and energy to `O(τ²)`.

use std::f64::consts::PI;
use std::fmt;

use log::{info, warn};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::fft::{self, Plan2d};
use crate::grid::{Field, GridError, Space};
use crate::groundstate::GNReport;
use crate::pointop::{PointOpError, PointOperator};
use crate::potential::{Potential, PotentialError, Regime};

/// Blow-up flag threshold, relative to the initial `H¹_α` norm.
pub const BLOW_UP_FACTOR: f64 = 1e6;

#[derive(Debug, Error)]
pub enum EvolveError {
    #[error("invalid evolution setting: {0}")]
    InvalidConfig(String),
    #[error("numerical failure at t = {time}: non-finite state")]
    NonFinite { time: f64 },
    #[error("potential is declared {found:?}, expected {expected:?}")]
    WrongRegime { expected: Regime, found: Regime },
    #[error(transparent)]
    PointOp(#[from] PointOpError),
    #[error(transparent)]
    Potential(#[from] PotentialError),
    #[error(transparent)]
    Grid(#[from] GridError),
}

pub type Result<T> = std::result::Result<T, EvolveError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    #[default]
    Strang,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolutionConfig {
    /// `+1` defocusing, `−1` focusing.
    pub theta: f64,
    pub dt: f64,
    #[serde(rename = "T")]
    pub t_final: f64,
    #[serde(default)]
    pub scheme: Scheme,
    pub record_every: usize,
    /// Keep the state at every `k`-th record point.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snapshot_every: Option<usize>,
}

impl EvolutionConfig {
    pub fn new(theta: f64, dt: f64, t_final: f64, record_every: usize) -> Self {
        Self {
            theta,
            dt,
            t_final,
            scheme: Scheme::Strang,
            record_every,
            snapshot_every: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(EvolveError::InvalidConfig(m.into()));
        if self.theta != 1.0 && self.theta != -1.0 {
            return bad("theta must be +1 or -1");
        }
        if !(self.dt > 0.0 && self.t_final.is_finite()) {
            return bad("dt must be positive");
        }
        if !(self.dt <= self.t_final) {
            return bad("dt must not exceed T");
        }
        if self.record_every == 0 || self.snapshot_every == Some(0) {
            return bad("record_every and snapshot_every must be >= 1");
        }
        Ok(())
    }

    /// Number of steps, `T/dt` rounded to the nearest integer.
    pub fn steps(&self) -> usize {
        (self.t_final / self.dt).round().max(1.0) as usize
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EvolutionTrace {
    pub times: Vec<f64>,
    pub mass: Vec<f64>,
    pub energy: Vec<f64>,
    pub h1alpha: Vec<f64>,
    pub blow_up: bool,
    #[serde(skip)]
    pub snapshots: Vec<(f64, Field)>,
    #[serde(skip)]
    pub final_state: Option<Field>,
}

impl EvolutionTrace {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// `max_t |M(t) − M(0)| / M(0)`.
    pub fn mass_drift(&self) -> f64 {
        drift(&self.mass) / self.mass[0].abs()
    }

    /// `max_t |E(t) − E(0)|`.
    pub fn energy_drift(&self) -> f64 {
        drift(&self.energy)
    }

    pub fn sup_h1alpha(&self) -> f64 {
        self.h1alpha.iter().copied().fold(0.0, f64::max)
    }
}

fn drift(v: &[f64]) -> f64 {
    v.iter().map(|x| (x - v[0]).abs()).fold(0.0, f64::max)
}

/// `½(−Δ_α)[ψ] + (θ/4)∫(w ∗ |ψ|²)|ψ|²`.
pub fn energy(op: &PointOperator, pot: &Potential, psi: &Field, theta: f64) -> Result<f64> {
    Ok(0.5 * op.quadratic_form(psi)? + 0.25 * theta * pot.hartree_energy(psi)?)
}

/// Cayley step `ψ⁺ = (4/(iτ))·R_{−2i/τ}ψ − ψ`. Negative `τ` runs backwards.
pub fn linear_step(op: &PointOperator, psi: &Field, tau: f64) -> Result<Field> {
    if !(tau != 0.0 && tau.is_finite()) {
        return Err(EvolveError::InvalidConfig(format!("step {tau} must be finite and nonzero")));
    }
    let omega = Complex64::new(0.0, -2.0 / tau);
    let r = op.resolvent_apply(psi, omega)?;
    let a = Complex64::new(0.0, -4.0 / tau);
    Ok(&r.scale(a) - psi)
}

/// `ψ ↦ e^{−iθτ(w ∗ |ψ|²)}ψ`.
pub fn nonlinear_step(pot: &Potential, psi: &Field, tau: f64, theta: f64) -> Result<Field> {
    let m = pot.mean_field(psi)?;
    let vals = m
        .values()
        .iter()
        .zip(psi.values())
        .map(|(v, z)| z * Complex64::from_polar(1.0, -theta * tau * v.re))
        .collect();
    Ok(Field::from_values(*psi.spec(), Space::Position, vals)?)
}

/// Preassembled Strang stepper working on raw FFT buffers.
///
/// Frequency data are kept in the transposed FFT layout; every multiplier
/// involved (`|ξ|²`, `Ĝ_ω`, `ŵ`) is symmetric in the two wavenumbers.
struct Stepper {
    plan: Plan2d,
    theta: f64,
    tau: f64,
    // Cayley: ψ⁺ = F⁻¹[m·Fψ + k·(Σ Fψ·g)·g]
    cayley: Vec<Complex64>,
    g: Vec<Complex64>,
    k: Complex64,
    // w ∗ ρ = F⁻¹[kernel·Fρ]
    kernel: Vec<f64>,
    buf: Vec<Complex64>,
}

impl Stepper {
    fn new(op: &PointOperator, pot: &Potential, theta: f64, tau: f64) -> Result<Self> {
        let spec = *op.spec();
        let n = spec.cells();
        let n2 = (n * n) as f64;
        let omega = Complex64::new(0.0, -2.0 / tau);
        let green = op.green(omega)?;
        let beta = op.beta_h(omega)?;
        let a = Complex64::new(0.0, -4.0 / tau);
        let parity = |i: usize| if (i / n + i % n) % 2 == 0 { 1.0 } else { -1.0 };
        let cayley = green.hat().iter().map(|gk| (a * gk * (2.0 * PI) - 1.0) / n2).collect();
        let g = green.hat().iter().enumerate().map(|(i, gk)| gk * parity(i)).collect();
        let d2 = spec.dxi().powi(2);
        let k = a * d2 / (n2 * beta);
        let kernel = pot.w_hat().values().iter().map(|w| 2.0 * PI * w.re / n2).collect();
        Ok(Self {
            plan: fft::plan(n),
            theta,
            tau,
            cayley,
            g,
            k,
            kernel,
            buf: vec![Complex64::default(); n * n],
        })
    }

    fn linear(&mut self, psi: &mut [Complex64]) {
        self.plan.forward_transposed(psi);
        let s: Complex64 = psi.iter().zip(&self.g).map(|(a, b)| a * b).sum();
        let c = self.k * s;
        for ((z, m), g) in psi.iter_mut().zip(&self.cayley).zip(&self.g) {
            *z = *z * m + c * g;
        }
        self.plan.inverse_transposed(psi);
    }

    fn nonlinear(&mut self, psi: &mut [Complex64], fraction: f64) {
        for (b, z) in self.buf.iter_mut().zip(psi.iter()) {
            *b = Complex64::new(z.norm_sqr(), 0.0);
        }
        self.plan.forward_transposed(&mut self.buf);
        for (b, w) in self.buf.iter_mut().zip(&self.kernel) {
            *b *= w;
        }
        self.plan.inverse_transposed(&mut self.buf);
        let phase = -self.theta * self.tau * fraction;
        for (z, v) in psi.iter_mut().zip(&self.buf) {
            *z *= Complex64::from_polar(1.0, phase * v.re);
        }
    }

    /// `steps` Strang steps, merging adjacent nonlinear half steps.
    fn advance(&mut self, psi: &mut [Complex64], steps: usize) {
        if steps == 0 {
            return;
        }
        self.nonlinear(psi, 0.5);
        for s in 0..steps {
            self.linear(psi);
            self.nonlinear(psi, if s + 1 == steps { 0.5 } else { 1.0 });
        }
    }
}

/// `steps` Strang steps of size `tau` (negative runs backwards).
pub fn propagate(op: &PointOperator, pot: &Potential, psi: &Field, theta: f64, tau: f64, steps: usize) -> Result<Field> {
    if !(tau != 0.0 && tau.is_finite()) {
        return Err(EvolveError::InvalidConfig(format!("step {tau} must be finite and nonzero")));
    }
    check_grid(op, pot, psi)?;
    let mut st = Stepper::new(op, pot, theta, tau)?;
    let mut vals = psi.clone().into_space(Space::Position)?.into_values();
    st.advance(&mut vals, steps);
    Ok(Field::from_values(*op.spec(), Space::Position, vals)?)
}

fn check_grid(op: &PointOperator, pot: &Potential, psi: &Field) -> Result<()> {
    psi.check_same_grid(&Field::zeros(*op.spec(), Space::Position))?;
    psi.check_same_grid(pot.samples())?;
    Ok(())
}

/// Runs the flow from `psi0`, recording mass, energy and `‖ψ‖_{H¹_α}` every
/// `record_every` steps; `observe` sees the state at each record point.
pub fn run_with(
    op: &PointOperator,
    pot: &Potential,
    psi0: &Field,
    cfg: &EvolutionConfig,
    observe: &mut dyn FnMut(f64, &Field),
) -> Result<EvolutionTrace> {
    cfg.validate()?;
    check_grid(op, pot, psi0)?;
    let spec = *op.spec();
    let steps = cfg.steps();
    let mut st = Stepper::new(op, pot, cfg.theta, cfg.dt)?;
    let mut trace = EvolutionTrace::default();
    let mut vals = psi0.clone().into_space(Space::Position)?.into_values();
    let mut done = 0;
    let mut records = 0;
    let mut h0 = 0.0;
    loop {
        let t = done as f64 * cfg.dt;
        let psi = Field::from_values(spec, Space::Position, vals)?;
        let mass = psi.l2_norm_sq();
        if !mass.is_finite() {
            return Err(EvolveError::NonFinite { time: t });
        }
        let h1 = op.h1alpha_norm(&psi)?;
        trace.times.push(t);
        trace.mass.push(mass);
        trace.energy.push(energy(op, pot, &psi, cfg.theta)?);
        trace.h1alpha.push(h1);
        observe(t, &psi);
        if cfg.snapshot_every.is_some_and(|k| records % k == 0) {
            trace.snapshots.push((t, psi.clone()));
        }
        records += 1;
        if done == 0 {
            h0 = h1;
        } else if h1 > BLOW_UP_FACTOR * h0 {
            warn!("blow-up flag at t = {t}: H1_alpha norm {h1:e} exceeds {BLOW_UP_FACTOR:e} x initial");
            trace.blow_up = true;
        }
        if done == steps || trace.blow_up {
            trace.final_state = Some(psi);
            break;
        }
        vals = psi.into_values();
        let chunk = cfg.record_every.min(steps - done);
        st.advance(&mut vals, chunk);
        done += chunk;
    }
    info!(
        "evolution: {} records, mass drift {:e}, energy drift {:e}, blow_up={}",
        trace.len(),
        trace.mass_drift(),
        trace.energy_drift(),
        trace.blow_up
    );
    Ok(trace)
}

pub fn run(op: &PointOperator, pot: &Potential, psi0: &Field, cfg: &EvolutionConfig) -> Result<EvolutionTrace> {
    run_with(op, pot, psi0, cfg, &mut |_, _| {})
}

/// A-priori bound on `sup_t ‖ψ‖_{H¹_α}` in the defocusing case:
/// `√(2E(0) + (1 − e)M(0))`.
pub fn defocusing_bound(energy0: f64, mass0: f64, e_h: f64) -> f64 {
    (2.0 * energy0 + (1.0 - e_h) * mass0).max(0.0).sqrt()
}

/// Focusing mass-critical bound `√((2E(0) + (1 − e)M(0)) / (1 − ½C·M(0)))`,
/// available below the mass threshold `M(0) < 2/C`.
pub fn critical_bound(energy0: f64, mass0: f64, e_h: f64, c_gn: f64) -> Option<f64> {
    let gap = 1.0 - 0.5 * c_gn * mass0;
    (gap > 0.0).then(|| ((2.0 * energy0 + (1.0 - e_h) * mass0).max(0.0) / gap).sqrt())
}

/// Focusing mass-subcritical bound: the largest root of
/// `x² = B₀ + B₁·x^{2/p}` with `B₀ = 2E(0) + (1 − e)M(0)` and
/// `B₁ = ½C·M(0)^{2−1/p}`.
pub fn subcritical_bound(energy0: f64, mass0: f64, e_h: f64, c_gn: f64, p: f64) -> f64 {
    let b0 = 2.0 * energy0 + (1.0 - e_h) * mass0;
    let b1 = 0.5 * c_gn * mass0.powf(2.0 - 1.0 / p);
    let q = 2.0 / p;
    let f = |x: f64| x * x - b1 * x.powf(q) - b0;
    // beyond x* = B₁^{1/(2−q)} the left side increases
    let x_star = b1.powf(1.0 / (2.0 - q));
    if b0 < 0.0 {
        return x_star;
    }
    let (mut lo, mut hi) = (x_star, x_star.max(1.0));
    while f(hi) <= 0.0 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) <= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdEntry {
    pub amplitude: f64,
    pub l2_norm: f64,
    pub below_threshold: bool,
    pub sup_h1alpha: f64,
    /// Mass-critical a-priori bound; present below threshold only.
    pub bound: Option<f64>,
    pub within_bound: Option<bool>,
    pub blow_up: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdReport {
    pub kappa: f64,
    pub c_gn: f64,
    pub entries: Vec<ThresholdEntry>,
}

impl fmt::Display for ThresholdReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "kappa = {:.6}", self.kappa)?;
        for e in &self.entries {
            writeln!(
                f,
                "amplitude {:.4}: |psi0| = {:.4} ({}), sup H1a = {:.4}{}",
                e.amplitude,
                e.l2_norm,
                if e.below_threshold { "below" } else { "above" },
                e.sup_h1alpha,
                if e.blow_up { ", blow-up flag" } else { "" }
            )?;
        }
        Ok(())
    }
}

/// Focusing runs from `amplitude·profile`, partitioned by `‖ψ₀‖ < κ`.
/// Amplitudes run concurrently.
pub fn threshold_probe(
    op: &PointOperator,
    pot: &Potential,
    profile: &Field,
    amplitudes: &[f64],
    gn: &GNReport,
    cfg: &EvolutionConfig,
) -> Result<ThresholdReport> {
    if pot.regime() != Regime::MassCritical {
        return Err(EvolveError::WrongRegime {
            expected: Regime::MassCritical,
            found: pot.regime(),
        });
    }
    let cfg = EvolutionConfig { theta: -1.0, ..*cfg };
    let e_h = op.discrete_eigenvalue()?;
    let entries = amplitudes
        .par_iter()
        .map(|&amp| {
            let psi0 = profile.scale_real(amp);
            let trace = run(op, pot, &psi0, &cfg)?;
            let mass0 = trace.mass[0];
            let l2 = mass0.sqrt();
            let below = l2 < gn.kappa;
            let bound = if below {
                critical_bound(trace.energy[0], mass0, e_h, gn.c_gn)
            } else {
                None
            };
            let sup = trace.sup_h1alpha();
            Ok(ThresholdEntry {
                amplitude: amp,
                l2_norm: l2,
                below_threshold: below,
                sup_h1alpha: sup,
                bound,
                within_bound: bound.map(|b| sup <= b),
                blow_up: trace.blow_up,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ThresholdReport {
        kappa: gn.kappa,
        c_gn: gn.c_gn,
        entries,
    })
}

/// `sup_t ‖ψ(t) − ψ̃(t)‖_{H¹_α} / ‖ψ₀ − ψ̃₀‖_{H¹_α}` for
/// `ψ̃₀ = ψ₀ + eps·d/‖d‖_{H¹_α}`, sampled every step up to `t_small`.
/// Identical data give 1 by convention.
pub fn continuous_dependence_probe(
    op: &PointOperator,
    pot: &Potential,
    psi0: &Field,
    direction: &Field,
    eps: f64,
    t_small: f64,
    dt: f64,
    theta: f64,
) -> Result<f64> {
    if pot.regime() != Regime::MassSubcritical {
        return Err(EvolveError::WrongRegime {
            expected: Regime::MassSubcritical,
            found: pot.regime(),
        });
    }
    if eps == 0.0 {
        return Ok(1.0);
    }
    let dir = direction.scale_real(eps / op.h1alpha_norm(direction)?);
    let other = psi0 + &dir;
    let cfg = EvolutionConfig::new(theta, dt, t_small, 1);
    cfg.validate()?;
    let steps = cfg.steps();
    let mut a = Stepper::new(op, pot, theta, dt)?;
    let mut b = Stepper::new(op, pot, theta, dt)?;
    let mut u = psi0.clone().into_space(Space::Position)?.into_values();
    let mut v = other.into_space(Space::Position)?.into_values();
    let d0 = op.h1alpha_norm(&dir)?;
    let mut worst: f64 = 1.0;
    for _ in 0..steps {
        a.advance(&mut u, 1);
        b.advance(&mut v, 1);
        let diff: Vec<Complex64> = u.iter().zip(&v).map(|(x, y)| x - y).collect();
        let diff = Field::from_values(*op.spec(), Space::Position, diff)?;
        worst = worst.max(op.h1alpha_norm(&diff)? / d0);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{random_band_limited, GridSpec};
    use crate::groundstate::{self, SolverConfig};
    use crate::pointop::PointOpParams;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn setup(l: f64, n: usize) -> (PointOperator, Potential) {
        let spec = GridSpec::new(l, n).unwrap();
        let op = PointOperator::new(PointOpParams::new(0.0).unwrap(), spec).unwrap();
        (op, Potential::gaussian(1.0, spec).unwrap())
    }

    fn gaussian(op: &PointOperator, amp: f64, x0: f64) -> Field {
        Field::from_real_fn(*op.spec(), |x, y| amp * (-((x - x0).powi(2) + y * y) / 2.0).exp())
    }

    // a datum with a genuine singular part
    fn datum(op: &PointOperator, amp: f64) -> Field {
        let g = op.green_field_real(2.0).unwrap();
        let g = g.scale_real(1.0 / g.l2_norm());
        (&gaussian(op, 1.0, 0.7) + &g).scale_real(amp)
    }

    #[test]
    fn config_validation() {
        assert!(EvolutionConfig::new(1.0, 1e-3, 1.0, 10).validate().is_ok());
        assert!(EvolutionConfig::new(0.5, 1e-3, 1.0, 10).validate().is_err());
        assert!(EvolutionConfig::new(1.0, 0.0, 1.0, 10).validate().is_err());
        assert!(EvolutionConfig::new(1.0, 2.0, 1.0, 10).validate().is_err());
        assert!(EvolutionConfig::new(1.0, 1e-3, 1.0, 0).validate().is_err());
        assert_eq!(EvolutionConfig::new(1.0, 1e-3, 1.0, 10).steps(), 1000);
        let json = r#"{"theta": -1, "dt": 0.01, "T": 1, "record_every": 5}"#;
        let cfg: EvolutionConfig = serde_json::from_str(json).unwrap();
        assert_eq!(cfg.scheme, Scheme::Strang);
        assert!(serde_json::from_str::<EvolutionConfig>(r#"{"theta": 1, "dt": 1, "T": 1, "record_every": 1, "x": 0}"#).is_err());
    }

    #[test]
    fn cayley_step_is_an_isometry() {
        let (op, _) = setup(20.0, 64);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for tau in [1e-3, 0.1, 2.0] {
            let psi = &random_band_limited(*op.spec(), 8.0, &mut rng) + &datum(&op, 1.0);
            let out = linear_step(&op, &psi, tau).unwrap();
            assert!((out.l2_norm() / psi.l2_norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn cayley_step_on_the_bound_state() {
        let (op, _) = setup(20.0, 64);
        let (e, phi) = op.bound_state().unwrap();
        let mut errs = vec![];
        for tau in [0.1, 0.05] {
            let out = linear_step(&op, &phi, tau).unwrap();
            let half = Complex64::new(0.0, tau * e / 2.0);
            let cayley = (1.0 - half) / (1.0 + half);
            assert!((&out - &phi.scale(cayley)).l2_norm() < 1e-9);
            let exact = Complex64::from_polar(1.0, -tau * e);
            errs.push((cayley - exact).norm());
        }
        let order = (errs[0] / errs[1]).log2();
        assert!((order - 3.0).abs() < 0.05, "{order}");
    }

    #[test]
    fn half_steps_compose_to_third_order() {
        let (op, _) = setup(20.0, 64);
        let psi = gaussian(&op, 1.0, 0.7);
        let err = |tau: f64| {
            let two = linear_step(&op, &linear_step(&op, &psi, tau / 2.0).unwrap(), tau / 2.0).unwrap();
            (&two - &linear_step(&op, &psi, tau).unwrap()).l2_norm()
        };
        let order = (err(2e-3) / err(1e-3)).log2();
        assert!((order - 3.0).abs() < 0.2, "{order}");
    }

    #[test]
    fn nonlinear_step_properties() {
        let (op, pot) = setup(20.0, 64);
        let psi = datum(&op, 1.3);
        let a = nonlinear_step(&pot, &psi, 0.3, 1.0).unwrap();
        let b = nonlinear_step(&pot, &psi, 0.3, -1.0).unwrap();
        for ((x, y), z) in a.values().iter().zip(b.values()).zip(psi.values()) {
            assert!((x.norm() - z.norm()).abs() <= 1e-15 * z.norm().max(1.0));
            assert!((x - y.conj()).norm() < 1e-15);
        }
        let (h, ha) = (pot.hartree_energy(&psi).unwrap(), pot.hartree_energy(&a).unwrap());
        assert!((h - ha).abs() < 1e-12 * h);
    }

    #[test]
    fn stepper_matches_the_field_level_composition() {
        let (op, pot) = setup(20.0, 64);
        let psi = datum(&op, 1.0);
        let tau = 0.01;
        let fast = propagate(&op, &pot, &psi, -1.0, tau, 3).unwrap();
        let mut slow = psi.clone();
        for _ in 0..3 {
            slow = nonlinear_step(&pot, &slow, tau / 2.0, -1.0).unwrap();
            slow = linear_step(&op, &slow, tau).unwrap();
            slow = nonlinear_step(&pot, &slow, tau / 2.0, -1.0).unwrap();
        }
        assert!((&fast - &slow).l2_norm() < 1e-12 * psi.l2_norm());
    }

    #[test]
    fn mass_is_conserved_and_energy_is_second_order() {
        let (op, pot) = setup(20.0, 64);
        let psi = datum(&op, 1.0);
        for theta in [1.0, -1.0] {
            let coarse = run(&op, &pot, &psi, &EvolutionConfig::new(theta, 1e-2, 1.0, 5)).unwrap();
            let fine = run(&op, &pot, &psi, &EvolutionConfig::new(theta, 5e-3, 1.0, 10)).unwrap();
            assert!(coarse.mass_drift() < 1e-12);
            assert_eq!(coarse.times, fine.times);
            let ratio = coarse.energy_drift() / fine.energy_drift();
            assert!((3.5..=4.5).contains(&ratio), "theta {theta}: {ratio}");
        }
        let long = run(&op, &pot, &psi, &EvolutionConfig::new(1.0, 1e-3, 1.0, 100)).unwrap();
        assert!(long.mass_drift() <= 1e-11);
        assert_eq!(long.len(), 11);
        assert!(!long.blow_up);
    }

    #[test]
    fn time_reversal_returns_the_datum() {
        let (op, pot) = setup(20.0, 64);
        let psi = datum(&op, 1.0);
        let fwd = propagate(&op, &pot, &psi, -1.0, 1e-2, 50).unwrap();
        let back = propagate(&op, &pot, &fwd, -1.0, -1e-2, 50).unwrap();
        let drift = run(&op, &pot, &psi, &EvolutionConfig::new(-1.0, 1e-2, 0.5, 1))
            .unwrap()
            .energy_drift();
        assert!((&back - &psi).l2_norm() <= 10.0 * drift.max(1e-12), "{}", (&back - &psi).l2_norm());
    }

    #[test]
    fn standing_wave_keeps_its_modulus_and_rotates_forward() {
        let (op, pot) = setup(20.0, 128);
        let lambda = 2.0;
        let (e, _) = groundstate::minimize(&op, &pot, &SolverConfig::new(lambda), None).unwrap();
        let q = op.assemble(&groundstate::rescale_to_standing_wave(&op, &e, &pot).unwrap()).unwrap();
        let o = op.spec().origin_index();
        let mut worst: f64 = 0.0;
        let mut phase_err: f64 = 0.0;
        let cfg = EvolutionConfig::new(-1.0, 1e-3, 0.5, 50);
        run_with(&op, &pot, &q, &cfg, &mut |t, psi| {
            let d = &psi.modulus() - &q.modulus();
            worst = worst.max(d.l2_norm() / q.l2_norm());
            let rot = psi.values()[o] / q.values()[o];
            phase_err = phase_err.max((rot - Complex64::from_polar(1.0, lambda * t)).norm());
        })
        .unwrap();
        assert!(worst < 1e-3, "{worst}");
        assert!(phase_err < 1e-3, "{phase_err}");
    }

    #[test]
    fn a_priori_bounds() {
        // B₀ = B₁ = 1 at p = 2: x² = 1 + x, root (1 + √5)/2
        let x = subcritical_bound(0.0, 1.0, 0.0, 2.0, 2.0);
        assert!((x - (1.0 + 5f64.sqrt()) / 2.0).abs() < 1e-12, "{x}");
        assert!(critical_bound(1.0, 1.0, -1.0, 2.5).is_none());
        let b = critical_bound(1.0, 1.0, -1.0, 1.0).unwrap();
        assert!((b * b - 4.0 / 0.5).abs() < 1e-12);
        assert!((defocusing_bound(1.0, 1.0, -1.0) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn defocusing_run_respects_its_bound() {
        let (op, pot) = setup(20.0, 64);
        let psi = datum(&op, 2.0);
        let tr = run(&op, &pot, &psi, &EvolutionConfig::new(1.0, 1e-2, 2.0, 5)).unwrap();
        let e_h = op.discrete_eigenvalue().unwrap();
        let b = defocusing_bound(tr.energy[0], tr.mass[0], e_h);
        assert!(tr.sup_h1alpha() <= b * 1.0001, "{} vs {b}", tr.sup_h1alpha());
    }

    #[test]
    fn small_amplitudes_follow_the_linear_flow() {
        let (op, _) = setup(20.0, 64);
        let spec = *op.spec();
        let pot = Potential::bump(0.5, spec).unwrap().with_exponents(1.0, 1.0).unwrap();
        let gn = groundstate::gn_constant_estimate(&op, &pot, &Default::default()).unwrap();
        let profile = datum(&op, 1.0);
        let cfg = EvolutionConfig::new(-1.0, 1e-2, 0.5, 10);
        let rep = threshold_probe(&op, &pot, &profile, &[1e-3, 0.5 * gn.kappa / profile.l2_norm()], &gn, &cfg).unwrap();
        assert!(rep.entries.iter().all(|e| e.below_threshold && e.within_bound == Some(true)));
        let tiny = propagate(&op, &pot, &profile.scale_real(1e-3), -1.0, 1e-2, 50).unwrap();
        let mut lin = profile.scale_real(1e-3);
        for _ in 0..50 {
            lin = linear_step(&op, &lin, 1e-2).unwrap();
        }
        assert!((&tiny - &lin).l2_norm() <= 1e-3 * lin.l2_norm());
        assert!(threshold_probe(&op, &Potential::gaussian(1.0, spec).unwrap(), &profile, &[1.0], &gn, &cfg).is_err());
    }

    #[test]
    fn continuous_dependence() {
        let (op, pot) = setup(20.0, 64);
        let psi = datum(&op, 1.0);
        let dir = gaussian(&op, 1.0, -1.0);
        assert_eq!(continuous_dependence_probe(&op, &pot, &psi, &dir, 0.0, 0.05, 1e-3, -1.0).unwrap(), 1.0);
        let r = continuous_dependence_probe(&op, &pot, &psi, &dir, 1e-4, 0.05, 1e-3, -1.0).unwrap();
        assert!(r <= 2.0, "{r}");
        let half = continuous_dependence_probe(&op, &pot, &psi, &dir, 1e-4, 0.025, 1e-3, -1.0).unwrap();
        assert!(half <= r);
    }
}
