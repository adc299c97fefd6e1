//! Reference evaluations of the special functions straight from their
//! integral representations, by adaptive quadrature. Slow, but they share no
//! code with the series and continued fractions in [`crate::specfun`], which
//! makes them usable as an independent check.
//!
//! Each representation factors out the dominant exponential analytically so
//! the remaining integral is O(1) and a purely relative tolerance is
//! meaningful even where the function itself is tiny.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quadrature::{integrate_with, Tolerance};

/// Relative tolerance requested from the integrator.
pub const ORACLE_REL_TOL: f64 = 1e-13;

fn tol() -> Tolerance {
    Tolerance::relative(ORACLE_REL_TOL)
}

/// `Q(x) = int_x^inf exp(-t^2/2) / sqrt(2 pi) dt`.
pub fn q_function(x: f64) -> Result<f64> {
    let norm = 1.0 / (2.0 * PI).sqrt();
    if x >= 0.0 {
        // t = x + u: exp(-t^2/2) = exp(-x^2/2) exp(-x u - u^2/2)
        let r = integrate_with(|u| (-x * u - 0.5 * u * u).exp(), 0.0, f64::INFINITY, tol())?;
        Ok(norm * (-0.5 * x * x).exp() * r.value)
    } else {
        let r = integrate_with(|t| (-0.5 * t * t).exp(), x, 0.0, tol())?;
        Ok(0.5 + norm * r.value)
    }
}

/// `K_n(x) = int_0^inf exp(-x cosh t) cosh(n t) dt`, rewritten as
/// `exp(-x) int_0^inf exp(-2 x sinh^2(t/2)) cosh(n t) dt`.
pub fn bessel_k(order: u32, x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::Domain {
            function: "oracle::bessel_k",
            value: x,
        });
    }
    let n = order as f64;
    let r = integrate_with(
        |t: f64| {
            let s = (0.5 * t).sinh();
            let damp = -2.0 * x * s * s;
            0.5 * ((damp + n * t).exp() + (damp - n * t).exp())
        },
        0.0,
        f64::INFINITY,
        tol(),
    )?;
    Ok((-x).exp() * r.value)
}

/// `E1(x) = int_x^inf e^-t / t dt = exp(-x) int_0^inf e^-u / (x + u) du`.
pub fn exp_integral_e1(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::Domain {
            function: "oracle::exp_integral_e1",
            value: x,
        });
    }
    let r = integrate_with(|u: f64| (-u).exp() / (x + u), 0.0, f64::INFINITY, tol())?;
    Ok((-x).exp() * r.value)
}

/// `Gamma(s, x) = int_x^inf t^(s-1) e^-t dt`, factored as
/// `exp(-x) int_0^inf (x + u)^(s-1) e^-u du`.
pub fn upper_incomplete_gamma(s: f64, x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::Domain {
            function: "oracle::upper_incomplete_gamma",
            value: x,
        });
    }
    let r = integrate_with(|u: f64| (x + u).powf(s - 1.0) * (-u).exp(), 0.0, f64::INFINITY, tol())?;
    Ok((-x).exp() * r.value)
}

/// `count` logarithmically spaced points from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi >= lo && count >= 2);
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| {
            if i == count - 1 {
                hi
            } else {
                (a + (b - a) * i as f64 / (count - 1) as f64).exp()
            }
        })
        .collect()
}
