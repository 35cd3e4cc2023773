//! Ground states via the Weinstein functional, and Gagliardo–Nirenberg
//! constants.
//!
//! Elements are handled in split form `v = f + c·G_λ`. The numerator of the
//! Weinstein quotient is the Birman expression
//! `N(f, c) = ‖∇f‖² + λ‖f‖² + c²·β_h(λ)`; minimising over the split as well as
//! over `v` drives the pair to canonical form, where `N` equals
//! `(−Δ_α)[v] + λ‖v‖²`.

use log::{debug, info, warn};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::{Field, GridError, Space};
use crate::pointop::{EnergyElement, PointOpError, PointOperator};
use crate::potential::{Potential, PotentialError};
use crate::rearrange::{self, CellRanking, RearrangeError};

const ARMIJO_SHRINK: f64 = 0.5;
const ARMIJO_SLOPE: f64 = 1e-4;
const INITIAL_STEP: f64 = 0.5;
const MIN_STEP: f64 = 1e-14;
/// Relative increase of `W` tolerated from a symmetrisation step.
pub const SYMMETRIZATION_TOLERANCE: f64 = 1e-3;
/// Relative tolerance of the radial-monotonicity flag.
pub const MONOTONE_TOLERANCE: f64 = 1e-6;
const HARTREE_FLOOR: f64 = 1e-28;

#[derive(Debug, Error)]
pub enum GroundStateError {
    #[error("quartic Hartree energy {0:e} is too small to divide by")]
    ZeroDenominator(f64),
    #[error("invalid solver setting: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    PointOp(#[from] PointOpError),
    #[error(transparent)]
    Potential(#[from] PotentialError),
    #[error(transparent)]
    Rearrange(#[from] RearrangeError),
    #[error(transparent)]
    Grid(#[from] GridError),
}

pub type Result<T> = std::result::Result<T, GroundStateError>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub lambda: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub symmetrize_every: usize,
}

impl SolverConfig {
    pub fn new(lambda: f64) -> Self {
        Self {
            lambda,
            tol: 1e-6,
            max_iter: 5000,
            symmetrize_every: 25,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub converged: bool,
    #[serde(rename = "W_value")]
    pub w_value: f64,
    #[serde(rename = "Lambda")]
    pub lambda_ratio: f64,
    pub lambda: f64,
    pub iterations: usize,
    pub el_residual: f64,
    pub c: f64,
    pub f_origin: f64,
    /// `|c·β_h(λ) − f(0)|` for the element normalised to unit quartic energy.
    pub canonical_gap: f64,
    /// The same gap relative to `|c·β_h(λ)| + |f(0)|`.
    pub canonical_gap_relative: f64,
    pub monotone_radial: bool,
    pub symmetrization_events: Vec<SymmetrizationEvent>,
    /// `W` after every accepted step.
    pub w_history: Vec<f64>,
}

/// A symmetrisation that would have raised `W`; the run kept the old iterate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymmetrizationEvent {
    pub iteration: usize,
    pub relative_increase: f64,
}

/// Weinstein quotient `N(f, c) / √H(v)`.
pub fn weinstein(op: &PointOperator, elem: &EnergyElement, pot: &Potential) -> Result<f64> {
    let (n, h) = numerator_and_quartic(op, elem, pot)?;
    Ok(n / h.sqrt())
}

/// `Λ = N(f, c) / H(v)`.
pub fn lambda_ratio(op: &PointOperator, elem: &EnergyElement, pot: &Potential) -> Result<f64> {
    let (n, h) = numerator_and_quartic(op, elem, pot)?;
    Ok(n / h)
}

fn numerator_and_quartic(op: &PointOperator, elem: &EnergyElement, pot: &Potential) -> Result<(f64, f64)> {
    let n = op.birman_form(elem)?;
    let v = op.assemble(elem)?;
    let h = pot.hartree_energy(&v)?;
    if !(h >= HARTREE_FLOOR) {
        return Err(GroundStateError::ZeroDenominator(h));
    }
    Ok((n, h))
}

/// Gradient of the numerator alone: `(2(λ − Δ)f, 2c·β_h(λ))`.
pub fn numerator_gradient(op: &PointOperator, elem: &EnergyElement) -> Result<(Field, Complex64)> {
    let shift: Vec<f64> = op.xi_squared().iter().map(|k| 2.0 * (k + elem.lambda)).collect();
    let df = elem.f.to_frequency()?.multiply_real(&shift).to_position()?;
    Ok((df, elem.c * (2.0 * op.beta_h_real(elem.lambda)?)))
}

/// Fréchet gradient of `W` with respect to the real inner products
/// `Re h²Σ f·ḡ` on the regular part and `Re(c·d̄)` on the coefficient:
/// `(∇N − 2Λ·∂H/4) / √H` with `∂H/4 = ((w∗|v|²)v, h²Σ (w∗|v|²)v·G_λ)`.
pub fn gradient(op: &PointOperator, elem: &EnergyElement, pot: &Potential) -> Result<(Field, Complex64)> {
    let v = op.assemble(elem)?;
    let p = pot.hartree_term(&v)?;
    let h = p.inner(&v)?.re;
    if !(h >= HARTREE_FLOOR) {
        return Err(GroundStateError::ZeroDenominator(h));
    }
    let n = op.birman_form(elem)?;
    let lam = n / h;
    let (df, dc) = numerator_gradient(op, elem)?;
    let g = op.green_field_real(elem.lambda)?;
    let pc = p.bilinear(&g)?;
    let s = 1.0 / h.sqrt();
    let mut gf = df;
    gf.axpy(Complex64::new(-2.0 * lam, 0.0), &p)?;
    Ok((gf.scale_real(s), (dc - pc * (2.0 * lam)) * s))
}

/// `‖v − Λ·R_λ[(w∗|v|²)v]‖_{H¹_α} / ‖v‖_{H¹_α}`.
pub fn el_residual(op: &PointOperator, elem: &EnergyElement, pot: &Potential) -> Result<f64> {
    let v = op.assemble(elem)?;
    let lam = lambda_ratio(op, elem, pot)?;
    el_residual_of(op, &v, lam, elem.lambda, pot)
}

fn el_residual_of(op: &PointOperator, v: &Field, lam: f64, lambda: f64, pot: &Potential) -> Result<f64> {
    let p = pot.hartree_term(v)?;
    let rp = op.resolvent_apply_real(&p, lambda)?;
    let mut r = v.clone();
    r.axpy(Complex64::new(-lam, 0.0), &rp)?;
    Ok(op.h1alpha_norm(&r)? / op.h1alpha_norm(v)?)
}

/// `Q = √Λ(v)·v`, for which `Λ(Q) = 1`.
pub fn rescale_to_standing_wave(op: &PointOperator, elem: &EnergyElement, pot: &Potential) -> Result<EnergyElement> {
    let lam = lambda_ratio(op, elem, pot)?;
    Ok(elem.scale(lam.sqrt()))
}

/// `|c·β_h(λ) − f(0)| / (|c·β_h(λ)| + |f(0)|)`.
pub fn canonical_check(op: &PointOperator, elem: &EnergyElement) -> Result<f64> {
    let (gap, scale) = canonical_gap(op, elem)?;
    Ok(if scale == 0.0 { 0.0 } else { gap / scale })
}

fn canonical_gap(op: &PointOperator, elem: &EnergyElement) -> Result<(f64, f64)> {
    let cb = elem.c * op.beta_h_real(elem.lambda)?;
    let f0 = elem.f.origin_value()?;
    Ok(((cb - f0).norm(), cb.norm() + f0.norm()))
}

/// Default starting point: a Gaussian of width `L/8` and `c = 0.1`.
pub fn initial_guess(op: &PointOperator, lambda: f64) -> EnergyElement {
    let s = op.spec().length() / 8.0;
    let f = Field::from_real_fn(*op.spec(), |x, y| (-(x * x + y * y) / (2.0 * s * s)).exp());
    EnergyElement::new(f, Complex64::new(0.1, 0.0), lambda)
}

struct Iterate {
    f: Field,
    c: f64,
    w: f64,
    // preconditioned descent direction and the slope ⟨∇W, d⟩ < 0
    df: Field,
    dc: f64,
    slope: f64,
    h: f64,
    lam: f64,
}

struct Context<'a> {
    op: &'a PointOperator,
    pot: &'a Potential,
    beta: f64,
    green: Field,
    // 1/(λ + |ξ|²)
    precond: Vec<f64>,
}

impl Context<'_> {
    fn value(&self, f: &Field, c: f64) -> Result<(f64, f64, Field, Field)> {
        let mut v = f.clone();
        v.axpy(Complex64::new(c, 0.0), &self.green)?;
        let p = self.pot.hartree_term(&v)?;
        let h = p.inner(&v)?.re;
        if !(h >= HARTREE_FLOOR) {
            return Err(GroundStateError::ZeroDenominator(h));
        }
        let f_hat = f.to_frequency()?;
        let d2 = self.op.spec().dxi().powi(2);
        let n = f_hat
            .values()
            .iter()
            .zip(&self.precond)
            .map(|(z, m)| z.norm_sqr() / m)
            .sum::<f64>()
            * d2
            + c * c * self.beta;
        Ok((n, h, p, f_hat))
    }

    fn iterate(&self, f: Field, c: f64) -> Result<Iterate> {
        let (n, h, p, f_hat) = self.value(&f, c)?;
        let lam = n / h;
        let s = 1.0 / h.sqrt();
        // d_f = −M⁻¹∇_f W = −(2f − 2Λ·M⁻¹P)/√H, M = λ − Δ
        let p_hat = p.to_frequency()?;
        let d2 = self.op.spec().dxi().powi(2);
        let mut slope = 0.0;
        let dir: Vec<Complex64> = f_hat
            .values()
            .iter()
            .zip(p_hat.values())
            .zip(&self.precond)
            .map(|((fk, pk), m)| {
                let g = (fk / m - pk * lam) * (2.0 * s);
                slope -= g.norm_sqr() * m;
                -g * m
            })
            .collect();
        slope *= d2;
        let df = Field::from_values(*self.op.spec(), Space::Frequency, dir)?.to_position()?;
        let gc = (2.0 * c * self.beta - 2.0 * lam * p.bilinear(&self.green)?.re) * s;
        let dc = -gc / self.beta;
        slope += gc * dc;
        Ok(Iterate {
            f,
            c,
            w: n * s,
            df,
            dc,
            slope,
            h,
            lam,
        })
    }

    /// Rescales so that the quartic energy is one.
    fn normalized(&self, it: Iterate) -> Result<Iterate> {
        let mu = it.h.powf(-0.25);
        if (mu - 1.0).abs() < 1e-15 {
            return Ok(it);
        }
        self.iterate(it.f.scale_real(mu), it.c * mu)
    }
}

/// Preconditioned descent on `W` with periodic symmetrisation.
///
/// Non-convergence is reported through [`SolveReport::converged`]; the best
/// iterate is returned either way.
pub fn minimize(
    op: &PointOperator,
    pot: &Potential,
    cfg: &SolverConfig,
    start: Option<EnergyElement>,
) -> Result<(EnergyElement, SolveReport)> {
    let lambda = cfg.lambda;
    let e_alpha = op.params().e_alpha();
    if !(lambda > e_alpha.abs()) {
        return Err(GroundStateError::InvalidConfig(format!(
            "lambda = {lambda} must exceed |e_alpha| = {}",
            e_alpha.abs()
        )));
    }
    if cfg.symmetrize_every == 0 || !(cfg.tol > 0.0) {
        return Err(GroundStateError::InvalidConfig(
            "symmetrize_every must be >= 1 and tol > 0".into(),
        ));
    }
    let spec = *op.spec();
    let ranking = CellRanking::shared(spec);
    let ctx = Context {
        op,
        pot,
        beta: op.beta_h_real(lambda)?,
        green: op.green_field_real(lambda)?,
        precond: op.xi_squared().iter().map(|k| 1.0 / (k + lambda)).collect(),
    };
    let start = start.unwrap_or_else(|| initial_guess(op, lambda));
    let mut it = ctx.normalized(ctx.iterate(start.f, start.c.norm())?)?;
    let mut history = vec![it.w];
    let mut events = Vec::new();
    let mut residual = f64::INFINITY;
    let mut converged = false;
    let mut iterations = 0;

    while iterations < cfg.max_iter {
        // the schedule includes the starting point
        if iterations % cfg.symmetrize_every == 0 {
            let fs = rearrange::symmetrize_modulus(&it.f, &ranking)?;
            let sym = ctx.normalized(ctx.iterate(fs, it.c.abs())?)?;
            if sym.w <= it.w {
                it = sym;
            } else {
                let increase = sym.w / it.w - 1.0;
                if increase > SYMMETRIZATION_TOLERANCE {
                    warn!("iteration {iterations}: symmetrisation would raise W by {increase:e}; kept previous iterate");
                    events.push(SymmetrizationEvent {
                        iteration: iterations,
                        relative_increase: increase,
                    });
                } else {
                    debug!("iteration {iterations}: symmetrisation raises W by {increase:e}; skipped");
                }
            }
        }
        residual = el_residual_of(op, &assemble(&ctx, &it)?, it.lam, lambda, pot)?;
        if residual < cfg.tol {
            converged = true;
            break;
        }
        iterations += 1;

        let mut t = INITIAL_STEP;
        let next = loop {
            let f = {
                let mut f = it.f.clone();
                f.axpy(Complex64::new(t, 0.0), &it.df)?;
                f
            };
            let c = (it.c + t * it.dc).max(0.0);
            let (n, h, _, _) = ctx.value(&f, c)?;
            let w = n / h.sqrt();
            if w <= it.w + ARMIJO_SLOPE * t * it.slope {
                break Some(ctx.normalized(ctx.iterate(f, c)?)?);
            }
            t *= ARMIJO_SHRINK;
            if t < MIN_STEP {
                break None;
            }
        };
        match next {
            Some(n) => it = n,
            None => {
                warn!("line search stalled at iteration {iterations} (W = {}, residual {residual:e})", it.w);
                break;
            }
        }
        history.push(it.w);
    }
    if !converged && iterations >= cfg.max_iter {
        residual = el_residual_of(op, &assemble(&ctx, &it)?, it.lam, lambda, pot)?;
        converged = residual < cfg.tol;
    }

    let elem = EnergyElement::new(it.f.clone(), Complex64::new(it.c, 0.0), lambda);
    let (gap, scale) = canonical_gap(op, &elem)?;
    let f_origin = elem.f.origin_value()?.re;
    let floor = -MONOTONE_TOLERANCE * elem.f.max_abs();
    let monotone = rearrange::is_radially_nonincreasing(&elem.f.real_part(), &ranking, MONOTONE_TOLERANCE)?
        && elem.f.imaginary_fraction() < MONOTONE_TOLERANCE
        && elem.f.values().iter().all(|z| z.re >= floor);
    let report = SolveReport {
        converged,
        w_value: it.w,
        lambda_ratio: it.lam,
        lambda,
        iterations,
        el_residual: residual,
        c: it.c,
        f_origin,
        canonical_gap: gap,
        canonical_gap_relative: if scale == 0.0 { 0.0 } else { gap / scale },
        monotone_radial: monotone,
        symmetrization_events: events,
        w_history: history,
    };
    info!(
        "minimize: converged={} W={} iterations={} residual={:e}",
        report.converged, report.w_value, report.iterations, report.el_residual
    );
    Ok((elem, report))
}

fn assemble(ctx: &Context, it: &Iterate) -> Result<Field> {
    let mut v = it.f.clone();
    v.axpy(Complex64::new(it.c, 0.0), &ctx.green)?;
    Ok(v)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GnConfig {
    pub max_iter: usize,
    /// Stop once the preconditioned gradient norm of `log J` drops below this.
    pub tol: f64,
    pub symmetrize_every: usize,
}

impl Default for GnConfig {
    fn default() -> Self {
        Self {
            max_iter: 3000,
            tol: 1e-6,
            symmetrize_every: 25,
        }
    }
}

/// Estimated optimal constant of
/// `∫(w∗|ψ|²)|ψ|² ≤ C·‖ψ‖_{H¹_α}^{2/p}·‖ψ‖^{4−2/p}`.
///
/// `kappa = √(2/C_gn)` is the mass threshold of the global existence
/// argument (`‖ψ₀‖² < 2/C_gn`). The headline statement of that result
/// phrases the optimal constant as `√2/κ`, which is not the same relation;
/// the threshold used here follows the argument itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GNReport {
    #[serde(rename = "C_gn")]
    pub c_gn: f64,
    pub kappa: f64,
    pub p: f64,
    pub converged: bool,
    pub iterations: usize,
    pub gradient_norm: f64,
    /// Canonical split of the maximiser at `λ = ω_ref`, normalised to unit
    /// `H¹_α` norm.
    #[serde(skip)]
    pub maximizer: Option<EnergyElement>,
    pub maximizer_c: f64,
}

/// Maximisation outcome of a scale-invariant ratio.
#[derive(Debug, Clone)]
pub struct RatioMax {
    pub value: f64,
    pub psi: Field,
    pub iterations: usize,
    pub gradient_norm: f64,
}

/// Maximises `log Num(ψ) − a·log‖ψ‖²_{H¹_α} − b·log‖ψ‖²`, where `num`
/// returns the numerator and its real-inner-product gradient.
pub fn maximize_ratio(
    op: &PointOperator,
    num: &dyn Fn(&Field) -> Result<(f64, Field)>,
    a: f64,
    b: f64,
    start: Field,
    cfg: &GnConfig,
) -> Result<RatioMax> {
    let e_h = op.discrete_eigenvalue()?;
    let omega = 1.0 - e_h;
    let ranking = CellRanking::shared(*op.spec());

    struct Point {
        psi: Field,
        log_j: f64,
        dir: Field,
        slope: f64,
    }
    let eval = |psi: Field| -> Result<Point> {
        let n1 = op.h1alpha_norm(&psi)?;
        let psi = psi.scale_real(1.0 / n1);
        let (num_v, grad) = num(&psi)?;
        if !(num_v > 0.0) {
            return Err(GroundStateError::ZeroDenominator(num_v));
        }
        let m = psi.l2_norm_sq();
        let log_j = num_v.ln() - b * m.ln();
        // ∇ log J = grad/Num − 2a(A+ω)ψ − 2bψ/m  (with ‖ψ‖_{H¹_α} = 1)
        // preconditioned by R = (A+ω)⁻¹
        let mut g = grad.scale_real(1.0 / num_v);
        g.axpy(Complex64::new(-2.0 * b / m, 0.0), &psi)?;
        let rg = op.resolvent_apply_real(&g, omega)?;
        let mut dir = rg;
        dir.axpy(Complex64::new(-2.0 * a, 0.0), &psi)?;
        // ⟨∇log J, R∇log J⟩ = ‖dir‖²_{H¹_α}, free of the cancellation in
        // ⟨Rg, g⟩ − 4a·Re⟨ψ, g⟩ + 4a²
        let slope = op.h1alpha_norm_sq(&dir)?;
        Ok(Point { psi, log_j, dir, slope })
    };

    let mut pt = eval(start)?;
    let mut iterations = 0;
    let mut t = INITIAL_STEP;
    while iterations < cfg.max_iter {
        if pt.slope.max(0.0).sqrt() < cfg.tol {
            break;
        }
        iterations += 1;
        if iterations % cfg.symmetrize_every == 0 {
            let s = eval(rearrange::symmetrize_modulus(&pt.psi, &ranking)?)?;
            if s.log_j >= pt.log_j {
                pt = s;
            }
        }
        t = (2.0 * t).min(4.0);
        let next = loop {
            let mut psi = pt.psi.clone();
            psi.axpy(Complex64::new(t, 0.0), &pt.dir)?;
            let cand = eval(psi)?;
            if cand.log_j >= pt.log_j + ARMIJO_SLOPE * t * pt.slope {
                break Some(cand);
            }
            t *= ARMIJO_SHRINK;
            if t < MIN_STEP {
                break None;
            }
        };
        match next {
            Some(n) => pt = n,
            None => break,
        }
    }
    let value = (pt.log_j - a * op.h1alpha_norm_sq(&pt.psi)?.ln()).exp();
    Ok(RatioMax {
        value,
        gradient_norm: pt.slope.max(0.0).sqrt(),
        psi: pt.psi,
        iterations,
    })
}

/// `H(ψ) / (‖ψ‖_{H¹_α}^{2/p}·‖ψ‖^{4−2/p})`.
pub fn gn_ratio(op: &PointOperator, pot: &Potential, psi: &Field) -> Result<f64> {
    let p = pot.p();
    let h = pot.hartree_energy(psi)?;
    Ok(h / (op.h1alpha_norm(psi)?.powf(2.0 / p) * psi.l2_norm().powf(4.0 - 2.0 / p)))
}

/// Maximises [`gn_ratio`] and reports `C_gn` and `κ = √(2/C_gn)`.
pub fn gn_constant_estimate(op: &PointOperator, pot: &Potential, cfg: &GnConfig) -> Result<GNReport> {
    let p = pot.p();
    let num = |psi: &Field| -> Result<(f64, Field)> {
        let t = pot.hartree_term(psi)?;
        Ok((t.inner(psi)?.re, t.scale_real(4.0)))
    };
    let best = maximize_ratio(op, &num, 1.0 / p, 2.0 - 1.0 / p, gn_start(op)?, cfg)?;
    let c_gn = gn_ratio(op, pot, &best.psi)?.max(best.value);
    let elem = op.decompose(&best.psi, op.params().omega_ref())?;
    info!("gn: C_gn = {c_gn} after {} iterations", best.iterations);
    Ok(GNReport {
        c_gn,
        kappa: (2.0 / c_gn).sqrt(),
        p,
        converged: best.gradient_norm <= cfg.tol,
        iterations: best.iterations,
        gradient_norm: best.gradient_norm,
        maximizer_c: elem.c.re,
        maximizer: Some(elem),
    })
}

/// Estimated constant of `‖ψ‖_q ≤ C·‖ψ‖_{H¹_α}^{1−2/q}·‖ψ‖^{2/q}`, `q ≥ 2`.
pub fn lp_constant_estimate(op: &PointOperator, q: f64, cfg: &GnConfig) -> Result<f64> {
    if !(q >= 2.0) {
        return Err(GroundStateError::InvalidConfig(format!("exponent {q} must be >= 2")));
    }
    let h2 = op.spec().cell_area();
    let num = |psi: &Field| -> Result<(f64, Field)> {
        let v = psi.values().iter().map(|z| z.norm().powf(q)).sum::<f64>() * h2;
        let g = psi.map(|z| z * (q * z.norm().powf(q - 2.0)));
        Ok((v, g))
    };
    let best = maximize_ratio(op, &num, (q - 2.0) / 2.0, 1.0, gn_start(op)?, cfg)?;
    Ok(best.value.powf(1.0 / q).max(lp_ratio(op, q, &best.psi)?))
}

/// `‖ψ‖_q / (‖ψ‖_{H¹_α}^{1−2/q}·‖ψ‖^{2/q})`.
pub fn lp_ratio(op: &PointOperator, q: f64, psi: &Field) -> Result<f64> {
    Ok(psi.lp_norm(q)? / (op.h1alpha_norm(psi)?.powf(1.0 - 2.0 / q) * psi.l2_norm().powf(2.0 / q)))
}

// Bound state plus a Gaussian: overlaps both the singular and the regular
// scale of the maximiser.
fn gn_start(op: &PointOperator) -> Result<Field> {
    let (_, phi) = op.bound_state()?;
    let s = op.spec().length() / 16.0;
    let g = Field::from_real_fn(*op.spec(), |x, y| (-(x * x + y * y) / (2.0 * s * s)).exp());
    let g = g.scale_real(1.0 / g.l2_norm());
    Ok(&phi + &g)
}

/// Dual-norm proxy `‖R_{ω_ref}^{1/2} g‖ = √Re⟨R_{ω_ref} g, g⟩`.
pub fn dual_norm(op: &PointOperator, g: &Field) -> Result<f64> {
    let r = op.resolvent_apply_real(g, op.params().omega_ref())?;
    Ok(r.inner(g)?.re.max(0.0).sqrt())
}

/// Leading-order standing-wave check: `(A + λ)Q − (w∗|Q|²)Q` relative to
/// `(A + λ)Q`, in the dual norm.
pub fn standing_wave_defect(op: &PointOperator, q: &Field, lambda: f64, pot: &Potential) -> Result<f64> {
    let mut lhs = op.operator_apply(q)?;
    lhs.axpy(Complex64::new(lambda, 0.0), q)?;
    let scale = dual_norm(op, &lhs)?;
    lhs.axpy(Complex64::new(-1.0, 0.0), &pot.hartree_term(q)?)?;
    Ok(dual_norm(op, &lhs)? / scale)
}
