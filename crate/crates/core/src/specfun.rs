//! Special functions used by the rate bound and the harvested-energy closed
//! forms: the Gaussian tail probability `Q`, modified Bessel functions of the
//! second kind `K0`, `K1`, `K2`, and the upper incomplete gamma function for
//! `s = 0` (the exponential integral `E1`) and `s = 2`.
//!
//! Each function switches between a convergent power series near the origin
//! and a continued fraction in the tail. Both branches are accurate to a few
//! ulps at the switchover point, so the seam is invisible at the `1e-11`
//! level.
//!
//! Results smaller than the smallest positive normal `f64` are flushed to
//! exactly `0.0`. No in-domain argument produces a NaN.

use std::f64::consts::{FRAC_1_SQRT_2, LN_2, PI};

use crate::error::{Error, Result};

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;
const SQRT_2PI: f64 = 2.506_628_274_631_000_7;

const SERIES_EPS: f64 = 1e-17;
const CF_EPS: f64 = 1e-16;
const MAX_ITER: usize = 10_000;

/// Below this the Gaussian tail uses the odd power series of `Phi(x) - 1/2`.
const Q_SERIES_LIMIT: f64 = 3.0;
/// Below this `K0`/`K1` use their ascending series, above it Steed's
/// continued fraction.
const BESSEL_SERIES_LIMIT: f64 = 2.0;
/// Below this `E1` uses its ascending series, above it a continued fraction.
const E1_SERIES_LIMIT: f64 = 1.0;

#[inline]
fn flush(v: f64) -> f64 {
    if v.abs() < f64::MIN_POSITIVE {
        0.0
    } else {
        v
    }
}

/// `exp(-x^2 / 2)` with the square split so that the rounding of `x^2` does
/// not leak into the tail.
fn gauss_kernel(x: f64) -> f64 {
    let hi = (x * 16.0).trunc() / 16.0;
    let lo = x - hi;
    // x^2 = hi^2 + lo (x + hi), and hi^2 is exact.
    (-0.5 * hi * hi).exp() * (-0.5 * lo * (x + hi)).exp()
}

/// Standard normal density.
pub fn gaussian_pdf(x: f64) -> f64 {
    flush(FRAC_1_SQRT_2PI * gauss_kernel(x))
}

/// `sum_{n>=0} x^{2n+1} / (2n+1)!!`, so that `Phi(x) - 1/2 = pdf(x) * series`.
fn odd_double_factorial_series(x: f64) -> f64 {
    let x2 = x * x;
    let mut term = x;
    let mut sum = x;
    for n in 1..MAX_ITER {
        term *= x2 / (2 * n + 1) as f64;
        sum += term;
        if term.abs() <= SERIES_EPS * sum.abs() {
            break;
        }
    }
    sum
}

/// Mills ratio `Q(x) / pdf(x)` for `x >= Q_SERIES_LIMIT`, evaluated by the
/// Laplace continued fraction `1 / (x + 1 / (x + 2 / (x + 3 / (x + ...))))`
/// with the modified Lentz method.
fn mills_ratio_cf(x: f64) -> f64 {
    let tiny = 1e-300;
    let mut f = x;
    let mut c = x;
    let mut d = 0.0;
    for n in 1..MAX_ITER {
        let a = n as f64;
        d = x + a * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = x + a / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < CF_EPS {
            break;
        }
    }
    1.0 / f
}

/// Gaussian tail probability `Q(x) = P[Z > x]` for a standard normal `Z`.
///
/// Total on finite input; `Q(x) + Q(-x) == 1` up to one rounding.
pub fn q_function(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x < 0.0 {
        return 1.0 - q_function(-x);
    }
    if x == f64::INFINITY {
        return 0.0;
    }
    if x < Q_SERIES_LIMIT {
        0.5 - gaussian_pdf(x) * odd_double_factorial_series(x)
    } else {
        flush(gaussian_pdf(x) * mills_ratio_cf(x))
    }
}

/// `exp(x^2 / 2) * Q(x)`, finite for every `x >= 0` even where `Q` itself
/// underflows.
pub fn q_function_scaled(x: f64) -> f64 {
    if x >= Q_SERIES_LIMIT {
        mills_ratio_cf(x) / SQRT_2PI
    } else if x >= 0.0 {
        0.5 / gauss_kernel(x) - FRAC_1_SQRT_2PI * odd_double_factorial_series(x)
    } else {
        q_function(x) / gauss_kernel(x)
    }
}

/// Complementary error function, via `erfc(z) = 2 Q(z sqrt 2)`.
pub fn erfc(z: f64) -> f64 {
    2.0 * q_function(z / FRAC_1_SQRT_2)
}

/// `(K0(x), K1(x))` by the ascending series, valid for `0 < x <= 2`.
fn bessel_k01_series(x: f64) -> (f64, f64) {
    let y = 0.25 * x * x;
    let log_half = (0.5 * x).ln();

    // k = 0 terms.
    let mut t0 = 1.0; // y^k / (k!)^2
    let mut t1 = 1.0; // y^k / (k! (k+1)!)
    let mut harmonic = 0.0; // H_k
    let mut i0 = 1.0;
    let mut i1_sum = 1.0;
    let mut k0_sum = 0.0;
    // psi(k+1) + psi(k+2) = -2 gamma + H_k + H_{k+1}
    let mut k1_sum = -2.0 * EULER_GAMMA + 1.0;

    for k in 1..MAX_ITER {
        let kf = k as f64;
        t0 *= y / (kf * kf);
        t1 *= y / (kf * (kf + 1.0));
        harmonic += 1.0 / kf;
        i0 += t0;
        i1_sum += t1;
        k0_sum += harmonic * t0;
        k1_sum += (-2.0 * EULER_GAMMA + 2.0 * harmonic + 1.0 / (kf + 1.0)) * t1;
        if t0 <= SERIES_EPS * i0 && t1 * (1.0 + harmonic) <= SERIES_EPS * i1_sum {
            break;
        }
    }

    let k0 = -(log_half + EULER_GAMMA) * i0 + k0_sum;
    let i1 = 0.5 * x * i1_sum;
    let k1 = 1.0 / x + log_half * i1 - 0.25 * x * k1_sum;
    (k0, k1)
}

/// `(K0(x), K1(x))` by Steed's evaluation of Temme's continued fraction,
/// valid for `x >= 2`.
fn bessel_k01_steed(x: f64) -> (f64, f64) {
    let a1 = 0.25; // 1/4 - mu^2 with mu = 0
    let mut b = 2.0 * (1.0 + x);
    let mut d = 1.0 / b;
    let mut h = d;
    let mut delh = d;
    let mut q1 = 0.0;
    let mut q2 = 1.0;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    for i in 2..MAX_ITER {
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
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < CF_EPS {
            break;
        }
    }
    h *= a1;
    let k0 = (PI / (2.0 * x)).sqrt() * (-x).exp() / s;
    let k1 = k0 * (x + 0.5 - h) / x;
    (k0, k1)
}

fn bessel_k01(x: f64) -> (f64, f64) {
    if x <= BESSEL_SERIES_LIMIT {
        bessel_k01_series(x)
    } else {
        bessel_k01_steed(x)
    }
}

/// Modified Bessel function of the second kind `K_order(x)` for
/// `order` in `{0, 1, 2}` and `x > 0`.
///
/// `K2` is obtained from the upward recurrence `K2 = K0 + (2/x) K1`, which is
/// stable for the second kind.
pub fn bessel_k(order: u32, x: f64) -> Result<f64> {
    if !(x > 0.0) || x.is_nan() {
        return Err(Error::Domain {
            function: "bessel_k",
            value: x,
        });
    }
    if order > 2 {
        return Err(Error::UnsupportedBesselOrder(order));
    }
    if x == f64::INFINITY {
        return Ok(0.0);
    }
    let (k0, k1) = bessel_k01(x);
    let v = match order {
        0 => k0,
        1 => k1,
        _ => k0 + 2.0 / x * k1,
    };
    Ok(flush(v))
}

/// Exponential integral `E1(x) = Gamma(0, x)` for `x > 0`.
fn exp_integral_e1(x: f64) -> f64 {
    if x <= E1_SERIES_LIMIT {
        // E1(x) = -gamma - ln x - sum_{k>=1} (-x)^k / (k k!)
        let mut term = 1.0;
        let mut sum = 0.0;
        for k in 1..MAX_ITER {
            let kf = k as f64;
            term *= -x / kf;
            let add = term / kf;
            sum += add;
            if add.abs() <= SERIES_EPS * sum.abs() {
                break;
            }
        }
        -EULER_GAMMA - x.ln() - sum
    } else {
        // Modified Lentz on the even form of the continued fraction for
        // exp(x) E1(x).
        let tiny = 1e-300;
        let mut b = x + 1.0;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..MAX_ITER {
            let an = -((i * i) as f64);
            b += 2.0;
            d = 1.0 / (an * d + b);
            c = b + an / c;
            let del = c * d;
            h *= del;
            if (del - 1.0).abs() < CF_EPS {
                break;
            }
        }
        flush(h * (-x).exp())
    }
}

/// Upper incomplete gamma `Gamma(s, x) = int_x^inf t^(s-1) e^-t dt` for
/// `s` in `{0, 2}` and `x > 0`.
pub fn upper_incomplete_gamma(s: f64, x: f64) -> Result<f64> {
    if !(x > 0.0) || x.is_nan() {
        return Err(Error::Domain {
            function: "upper_incomplete_gamma",
            value: x,
        });
    }
    if s == 0.0 {
        Ok(exp_integral_e1(x))
    } else if s == 2.0 {
        Ok(flush((1.0 + x) * (-x).exp()))
    } else {
        Err(Error::UnsupportedGammaOrder(s))
    }
}

/// `log2(1 + x)` accurate for small `x`.
#[inline]
pub(crate) fn log2_1p(x: f64) -> f64 {
    x.ln_1p() / LN_2
}
