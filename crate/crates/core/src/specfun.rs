//! Scalar special functions behind the two-dimensional Green function and the
//! point-interaction spectral data.
//!
//! `K₀` is evaluated with the usual split: the ascending series (with its
//! logarithmic term) for `x ≤ 2`, and Steed's continued fraction (Temme's CF2)
//! above. Both branches are accurate to a few ulps in relative terms.

use std::f64::consts::PI;

use num_complex::Complex64;
use thiserror::Error;

/// Euler–Mascheroni constant γ.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

const SERIES_SWITCH: f64 = 2.0;
const MAX_TERMS: usize = 500;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpecialFunctionError {
    #[error("{function}: argument {value} outside the domain")]
    Domain { function: &'static str, value: f64 },
    #[error("{function}: series did not converge for argument {value}")]
    NoConvergence { function: &'static str, value: f64 },
}

type Result<T> = std::result::Result<T, SpecialFunctionError>;

/// Modified Bessel function of the second kind, order zero.
pub fn bessel_k0(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(SpecialFunctionError::Domain {
            function: "bessel_k0",
            value: x,
        });
    }
    if x <= SERIES_SWITCH {
        k0_series(x)
    } else {
        k0_continued_fraction(x)
    }
}

fn k0_series(x: f64) -> Result<f64> {
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut harmonic = 0.0;
    let mut i0 = 1.0;
    let mut tail = 0.0;
    for k in 1..MAX_TERMS {
        let kf = k as f64;
        term *= q / (kf * kf);
        harmonic += 1.0 / kf;
        i0 += term;
        tail += term * harmonic;
        if term * harmonic < 1e-18 * tail.abs().max(1e-300) {
            return Ok(-((0.5 * x).ln() + EULER_GAMMA) * i0 + tail);
        }
    }
    Err(SpecialFunctionError::NoConvergence {
        function: "bessel_k0",
        value: x,
    })
}

// Steed's algorithm for the CF2 continued fraction at order zero.
fn k0_continued_fraction(x: f64) -> Result<f64> {
    let mut b = 2.0 * (1.0 + x);
    let mut d = 1.0 / b;
    let mut delh = d;
    let mut q1 = 0.0;
    let mut q2 = 1.0;
    let a1 = 0.25;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    for i in 2..MAX_TERMS {
        let fi = i as f64;
        a -= 2.0 * (fi - 1.0);
        c = -a * c / fi;
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh *= b * d - 1.0;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < 1e-17 {
            return Ok((PI / (2.0 * x)).sqrt() * (-x).exp() / s);
        }
    }
    Err(SpecialFunctionError::NoConvergence {
        function: "bessel_k0",
        value: x,
    })
}

/// Continuum Green function of `−Δ + ω` in the plane, `K₀(r√ω) / 2π`.
pub fn green_value(omega: f64, r: f64) -> Result<f64> {
    if !(omega > 0.0) || !omega.is_finite() {
        return Err(SpecialFunctionError::Domain {
            function: "green_value",
            value: omega,
        });
    }
    if !(r > 0.0) || !r.is_finite() {
        return Err(SpecialFunctionError::Domain {
            function: "green_value",
            value: r,
        });
    }
    Ok(bessel_k0(r * omega.sqrt())? / (2.0 * PI))
}

/// `β_α(ω) = α + γ/2π + ln(√ω / 2)/2π` with principal branches, so that
/// `Re √ω > 0` everywhere off the negative real axis.
pub fn beta(alpha: f64, omega: Complex64) -> Result<Complex64> {
    if omega.norm() == 0.0 || !omega.re.is_finite() || !omega.im.is_finite() {
        return Err(SpecialFunctionError::Domain {
            function: "beta",
            value: omega.norm(),
        });
    }
    let log_term = (omega.sqrt() * 0.5).ln();
    Ok(Complex64::new(alpha + EULER_GAMMA / (2.0 * PI), 0.0) + log_term / (2.0 * PI))
}

/// Real-axis specialisation of [`beta`].
pub fn beta_real(alpha: f64, omega: f64) -> Result<f64> {
    if !(omega > 0.0) || !omega.is_finite() {
        return Err(SpecialFunctionError::Domain {
            function: "beta",
            value: omega,
        });
    }
    Ok(alpha + EULER_GAMMA / (2.0 * PI) + (0.5 * omega.sqrt()).ln() / (2.0 * PI))
}

/// The negative eigenvalue `e_α = −4 exp(−2(2πα + γ))`.
pub fn e_alpha(alpha: f64) -> Result<f64> {
    if !alpha.is_finite() {
        return Err(SpecialFunctionError::Domain {
            function: "e_alpha",
            value: alpha,
        });
    }
    Ok(-4.0 * (-2.0 * (2.0 * PI * alpha + EULER_GAMMA)).exp())
}
