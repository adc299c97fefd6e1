//! Adaptive Gauss–Kronrod integration on finite and semi-infinite intervals,
//! and a bounded two-dimensional minimizer.
//!
//! The integrator bisects the subinterval with the largest error estimate
//! until the summed estimate meets the requested tolerance. Each subinterval
//! is evaluated with the 21-point Kronrod rule and its embedded 10-point
//! Gauss rule; the error estimate is the difference between the two, rescaled
//! the way QUADPACK does. Neither rule touches the interval endpoints, so
//! integrable endpoint singularities (the logarithmic one of `K0` at the
//! origin, the `1/(1-u)^2` Jacobian of the infinite map) are never sampled.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::Serialize;

use crate::error::{Error, Result};

/// Evaluation budget shared by every call.
pub const MAX_EVALUATIONS: usize = 1_000_000;

/// Absolute error floor applied by [`integrate`].
pub const DEFAULT_ABS_TOL: f64 = 1e-15;

/// Kronrod abscissae on `[-1, 1]`, positive half, descending; the last entry
/// is the centre. Odd indices are the 10-point Gauss nodes.
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_208_067_386_310,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// Gauss weights for `XGK[1], XGK[3], ..., XGK[9]`.
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

const POINTS_PER_RULE: usize = 21;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntegrationResult {
    pub value: f64,
    pub abs_error_estimate: f64,
    pub evaluations: usize,
}

/// Stopping rule: converged once the error estimate is at most
/// `max(rel * |value|, abs)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
}

impl Tolerance {
    pub fn relative(rel: f64) -> Self {
        Self { rel, abs: 0.0 }
    }
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut err = err.abs();
    if res_asc != 0.0 && err != 0.0 {
        let scale = (200.0 * err / res_asc).powf(1.5);
        err = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    err
}

fn gauss_kronrod_21<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Result<Segment> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);

    let mut eval = |x: f64| -> Result<f64> {
        let y = f(x);
        if y.is_finite() {
            Ok(y)
        } else {
            Err(Error::NonFiniteIntegrand(x))
        }
    };

    let fc = eval(center)?;
    let mut res_k = fc * WGK[10];
    let mut res_g = 0.0;
    let mut res_abs = fc.abs() * WGK[10];
    let mut f1 = [0.0; 10];
    let mut f2 = [0.0; 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let lo = eval(center - dx)?;
        let hi = eval(center + dx)?;
        f1[j] = lo;
        f2[j] = hi;
        res_k += WGK[j] * (lo + hi);
        res_abs += WGK[j] * (lo.abs() + hi.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (lo + hi);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((f1[j] - mean).abs() + (f2[j] - mean).abs());
    }

    let scale = half.abs();
    Ok(Segment {
        a,
        b,
        value: res_k * half,
        error: rescale_error((res_k - res_g) * half, res_abs * scale, res_asc * scale),
    })
}

/// Core adaptive loop on a finite interval.
fn adaptive<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: Tolerance) -> Result<IntegrationResult> {
    let mut evaluations = POINTS_PER_RULE;
    let first = gauss_kronrod_21(&mut f, a, b)?;
    let mut heap = BinaryHeap::new();
    // Segments that can no longer be split in floating point.
    let mut frozen: Vec<Segment> = Vec::new();
    let mut total_value = first.value;
    let mut total_error = first.error;
    heap.push(first);

    loop {
        let target = (tol.rel * total_value.abs()).max(tol.abs);
        if total_error <= target {
            break;
        }
        if evaluations + 2 * POINTS_PER_RULE > MAX_EVALUATIONS {
            let best = summarize(&heap, &frozen, evaluations);
            return Err(Error::NonConvergence { best });
        }
        let Some(worst) = heap.pop() else {
            break;
        };
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            frozen.push(worst);
            continue;
        }
        let left = gauss_kronrod_21(&mut f, worst.a, mid)?;
        let right = gauss_kronrod_21(&mut f, mid, worst.b)?;
        evaluations += 2 * POINTS_PER_RULE;
        total_value += left.value + right.value - worst.value;
        total_error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }

    let result = summarize(&heap, &frozen, evaluations);
    let target = (tol.rel * result.value.abs()).max(tol.abs);
    if result.abs_error_estimate > target {
        return Err(Error::NonConvergence { best: result });
    }
    Ok(result)
}

/// Re-sums the segment list in a fixed (left-to-right) order so the value
/// does not depend on the heap's internal layout or on incremental drift.
fn summarize(heap: &BinaryHeap<Segment>, frozen: &[Segment], evaluations: usize) -> IntegrationResult {
    let mut all: Vec<Segment> = heap.iter().chain(frozen.iter()).copied().collect();
    all.sort_by(|x, y| x.a.total_cmp(&y.a));
    let value = all.iter().map(|s| s.value).sum();
    let abs_error_estimate = all.iter().map(|s| s.error).sum();
    IntegrationResult {
        value,
        abs_error_estimate,
        evaluations,
    }
}

/// Integrates `f` over `[lo, hi]` where `hi` may be `+inf`, to relative
/// tolerance `rel_tol` with the default absolute floor of `1e-15`.
///
/// A semi-infinite range is mapped onto `[0, 1)` with `t = lo + u / (1 - u)`.
pub fn integrate<F: FnMut(f64) -> f64>(f: F, lo: f64, hi: f64, rel_tol: f64) -> Result<IntegrationResult> {
    integrate_with(
        f,
        lo,
        hi,
        Tolerance {
            rel: rel_tol,
            abs: DEFAULT_ABS_TOL,
        },
    )
}

/// [`integrate`] with an explicit absolute floor (use `abs = 0` for purely
/// relative accuracy on tiny integrals).
pub fn integrate_with<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, tol: Tolerance) -> Result<IntegrationResult> {
    if !(tol.rel > 1e-14 && tol.rel < 1e-2) {
        return Err(Error::InvalidTolerance(tol.rel));
    }
    if !lo.is_finite() || hi.is_nan() || hi < lo {
        return Err(Error::InvalidInterval { lo, hi });
    }
    if hi == lo {
        return Ok(IntegrationResult {
            value: 0.0,
            abs_error_estimate: 0.0,
            evaluations: 1,
        });
    }
    if hi.is_finite() {
        adaptive(f, lo, hi, tol)
    } else {
        adaptive(
            |u: f64| {
                let w = 1.0 - u;
                let t = lo + u / w;
                let y = f(t);
                // The integrand must vanish at infinity; an exact zero also
                // absorbs an overflowing Jacobian.
                if y == 0.0 {
                    0.0
                } else {
                    y / (w * w)
                }
            },
            0.0,
            1.0,
            tol,
        )
    }
}

/// Axis-aligned rectangle `[x_lo, x_hi] x [y_lo, y_hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchBox {
    pub x: (f64, f64),
    pub y: (f64, f64),
}

impl SearchBox {
    pub fn new(x: (f64, f64), y: (f64, f64)) -> Result<Self> {
        for &(lo, hi) in &[x, y] {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(Error::InvalidInterval { lo, hi });
            }
        }
        Ok(Self { x, y })
    }

    pub fn center(&self) -> (f64, f64) {
        (0.5 * (self.x.0 + self.x.1), 0.5 * (self.y.0 + self.y.1))
    }

    pub fn contains(&self, p: (f64, f64)) -> bool {
        p.0 >= self.x.0 && p.0 <= self.x.1 && p.1 >= self.y.0 && p.1 <= self.y.1
    }

    fn clamp(&self, p: (f64, f64)) -> (f64, f64) {
        (p.0.clamp(self.x.0, self.x.1), p.1.clamp(self.y.0, self.y.1))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Minimum {
    pub point: (f64, f64),
    pub value: f64,
    pub evaluations: usize,
}

/// Nodes per axis of the initial grid.
pub const GRID_NODES: usize = 64;
const MAX_REFINE_EVALUATIONS: usize = 20_000;

/// NaN never wins a comparison.
#[inline]
fn better(candidate: f64, incumbent: f64) -> bool {
    !candidate.is_nan() && (incumbent.is_nan() || candidate < incumbent)
}

/// Minimizes `f` over `region`: an inclusive 64 x 64 grid, the box centre and
/// the optional `hint` are evaluated first, then a compass search refines the
/// best of them until the step falls below `tol` times the box width.
///
/// The result is never worse than any grid node, the centre, or an in-box
/// hint.
pub fn minimize_2d<F: FnMut(f64, f64) -> f64>(
    mut f: F,
    region: &SearchBox,
    tol: f64,
    hint: Option<(f64, f64)>,
) -> Minimum {
    let (x0, x1) = region.x;
    let (y0, y1) = region.y;
    let dx = (x1 - x0) / (GRID_NODES - 1) as f64;
    let dy = (y1 - y0) / (GRID_NODES - 1) as f64;

    let mut best_point = region.center();
    let mut best_value = f(best_point.0, best_point.1);
    let mut evaluations = 1;

    let consider = |p: (f64, f64), value: f64, best_point: &mut (f64, f64), best_value: &mut f64| {
        if better(value, *best_value) {
            *best_point = p;
            *best_value = value;
        }
    };

    if let Some(h) = hint.filter(|h| region.contains(*h)) {
        let v = f(h.0, h.1);
        evaluations += 1;
        consider(h, v, &mut best_point, &mut best_value);
    }
    for i in 0..GRID_NODES {
        let x = if i == GRID_NODES - 1 { x1 } else { x0 + i as f64 * dx };
        for j in 0..GRID_NODES {
            let y = if j == GRID_NODES - 1 { y1 } else { y0 + j as f64 * dy };
            let v = f(x, y);
            evaluations += 1;
            consider((x, y), v, &mut best_point, &mut best_value);
        }
    }

    let tol = tol.max(f64::EPSILON);
    let (mut sx, mut sy) = (dx, dy);
    let min_sx = tol * (x1 - x0);
    let min_sy = tol * (y1 - y0);
    let mut refine_budget = MAX_REFINE_EVALUATIONS;
    while (sx > min_sx || sy > min_sy) && refine_budget >= 4 {
        let mut moved = false;
        let candidates = [
            (best_point.0 + sx, best_point.1),
            (best_point.0 - sx, best_point.1),
            (best_point.0, best_point.1 + sy),
            (best_point.0, best_point.1 - sy),
        ];
        let mut step_best = (best_point, best_value);
        for c in candidates {
            let c = region.clamp(c);
            if c == best_point {
                continue;
            }
            let v = f(c.0, c.1);
            evaluations += 1;
            refine_budget -= 1;
            if better(v, step_best.1) {
                step_best = (c, v);
            }
        }
        if step_best.0 != best_point {
            best_point = step_best.0;
            best_value = step_best.1;
            moved = true;
        }
        if !moved {
            sx *= 0.5;
            sy *= 0.5;
        }
    }

    Minimum {
        point: best_point,
        value: best_value,
        evaluations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_weights_integrate_constants() {
        let k: f64 = WGK[10] + 2.0 * WGK[..10].iter().sum::<f64>();
        let g: f64 = 2.0 * WG.iter().sum::<f64>();
        assert!((k - 2.0).abs() < 1e-15);
        assert!((g - 2.0).abs() < 1e-15);
    }

    #[test]
    fn kronrod_rule_is_exact_for_high_degree_polynomials() {
        // A single 21-point panel integrates x^30 exactly on [-1, 1].
        let seg = gauss_kronrod_21(&mut |x: f64| x.powi(30), -1.0, 1.0).unwrap();
        assert!((seg.value - 2.0 / 31.0).abs() < 1e-15);
    }

    #[test]
    fn polynomial() {
        let r = integrate(|x| x * x, 0.0, 1.0, 1e-12).unwrap();
        assert!((r.value - 1.0 / 3.0).abs() < 1e-15);
        assert!(r.abs_error_estimate >= 0.0);
        assert!(r.evaluations >= 1);
    }

    #[test]
    fn exponential_tail() {
        let r = integrate(|x: f64| (-x).exp(), 0.0, f64::INFINITY, 1e-12).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn logarithmic_endpoint_singularity() {
        // int_0^1 ln x dx = -1
        let r = integrate(|x: f64| x.ln(), 0.0, 1.0, 1e-12).unwrap();
        assert!((r.value + 1.0).abs() < 1e-12, "{}", r.value);
    }

    #[test]
    fn inverse_square_root_singularity() {
        let r = integrate(|x: f64| 1.0 / x.sqrt(), 0.0, 1.0, 1e-10).unwrap();
        assert!((r.value - 2.0).abs() < 1e-9, "{}", r.value);
    }

    #[test]
    fn purely_relative_tolerance_on_tiny_integral() {
        // int_0^inf 1e-200 e^-x dx
        let r = integrate_with(|x: f64| 1e-200 * (-x).exp(), 0.0, f64::INFINITY, Tolerance::relative(1e-12)).unwrap();
        assert!(((r.value - 1e-200) / 1e-200).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_tolerance_and_interval() {
        assert!(matches!(integrate(|x| x, 0.0, 1.0, 1e-15), Err(Error::InvalidTolerance(_))));
        assert!(matches!(integrate(|x| x, 0.0, 1.0, 0.1), Err(Error::InvalidTolerance(_))));
        assert!(matches!(integrate(|x| x, 1.0, 0.0, 1e-8), Err(Error::InvalidInterval { .. })));
        assert!(matches!(
            integrate(|x| x, f64::NEG_INFINITY, 0.0, 1e-8),
            Err(Error::InvalidInterval { .. })
        ));
    }

    #[test]
    fn non_finite_integrand_is_reported() {
        assert!(matches!(
            integrate(|_| f64::NAN, 0.0, 1.0, 1e-8),
            Err(Error::NonFiniteIntegrand(_))
        ));
    }

    #[test]
    fn non_convergence_carries_best_estimate() {
        // ~3e7 oscillations cannot be resolved within the budget.
        let err = integrate(|x: f64| (x * x).sin(), 0.0, 1e4, 1e-13).unwrap_err();
        match err {
            Error::NonConvergence { best } => {
                assert!(best.evaluations > MAX_EVALUATIONS / 2);
                assert!(best.value.is_finite());
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn paraboloid_minimum() {
        let region = SearchBox::new((0.1, 5.0), (0.0, 5.0)).unwrap();
        let m = minimize_2d(|g, d| (g - 1.0).powi(2) + (d - 2.0).powi(2), &region, 1e-10, None);
        assert!((m.point.0 - 1.0).abs() < 1e-6);
        assert!((m.point.1 - 2.0).abs() < 1e-6);
        assert!(m.value < 1e-12);
    }

    #[test]
    fn constant_objective() {
        let region = SearchBox::new((0.0, 1.0), (0.0, 1.0)).unwrap();
        let m = minimize_2d(|_, _| 3.5, &region, 1e-6, None);
        assert_eq!(m.value, 3.5);
        assert!(region.contains(m.point));
    }

    #[test]
    fn minimum_on_the_boundary() {
        let region = SearchBox::new((1.0, 2.0), (-1.0, 1.0)).unwrap();
        let m = minimize_2d(|x, y| x + y * y, &region, 1e-10, None);
        assert_eq!(m.point.0, 1.0);
        assert!(m.point.1.abs() < 1e-6);
    }

    #[test]
    fn nan_regions_are_avoided() {
        let region = SearchBox::new((-1.0, 1.0), (-1.0, 1.0)).unwrap();
        let m = minimize_2d(
            |x, y| if x < 0.0 { f64::NAN } else { (x - 0.5).powi(2) + y * y },
            &region,
            1e-9,
            None,
        );
        assert!((m.point.0 - 0.5).abs() < 1e-6);
    }

    #[test]
    fn hint_is_respected() {
        // A needle minimum narrower than the grid spacing, found only via the hint.
        let region = SearchBox::new((0.0, 1.0), (0.0, 1.0)).unwrap();
        let needle = (0.123_456, 0.654_321);
        let f = |x: f64, y: f64| {
            if (x - needle.0).abs() < 1e-4 && (y - needle.1).abs() < 1e-4 {
                -1.0
            } else {
                0.0
            }
        };
        let m = minimize_2d(f, &region, 1e-9, Some(needle));
        assert_eq!(m.value, -1.0);
    }
}
