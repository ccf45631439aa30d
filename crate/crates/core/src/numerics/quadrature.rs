//! Globally adaptive Gauss–Kronrod (7/15) quadrature on the real line.
//!
//! Infinite endpoints are mapped onto finite ones:
//! `[a, ∞)` via x = a + t/(1−t), `(−∞, b]` via x = b − t/(1−t) (t ∈ [0,1)),
//! and `(−∞, ∞)` via x = t/(1−t²) (t ∈ (−1, 1)). Kronrod nodes are interior,
//! so the maps are never evaluated at their singular endpoints.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{domain, Error, Result};

/// Hard cap on live segments, independent of the depth limit.
const MAX_SEGMENTS: usize = 1 << 15;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Maximum number of bisections applied to any one segment.
    pub max_depth: u32,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            rel_tol: 1e-10,
            max_depth: 60,
        }
    }
}

impl QuadratureSpec {
    pub fn new(abs_tol: f64, rel_tol: f64, max_depth: u32) -> Result<Self> {
        if !(abs_tol > 0.0) || !(rel_tol > 0.0) {
            return domain("quadrature tolerances must be positive");
        }
        if max_depth < 1 {
            return domain("quadrature depth must be at least 1");
        }
        Ok(Self {
            abs_tol,
            rel_tol,
            max_depth,
        })
    }
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
/// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    depth: u32,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
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

/// One 15-point Kronrod rule with the QUADPACK error heuristic.
fn kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Result<(f64, f64)> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    if fc.is_nan() {
        return Err(Error::Evaluation { at: center });
    }
    let mut resk = fc * WGK[7];
    let mut resg = fc * WG[3];
    let mut resabs = resk.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let (x1, x2) = (center - dx, center + dx);
        let (f1, f2) = (f(x1), f(x2));
        if f1.is_nan() {
            return Err(Error::Evaluation { at: x1 });
        }
        if f2.is_nan() {
            return Err(Error::Evaluation { at: x2 });
        }
        fv1[j] = f1;
        fv2[j] = f2;
        resk += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            resg += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = resk * 0.5;
    let mut resasc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        resasc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = resk * half;
    let resabs = resabs * half.abs();
    let resasc = resasc * half.abs();
    let mut err = ((resk - resg) * half).abs();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * resabs);
    }
    Ok((value, err))
}

fn adapt<F: Fn(f64) -> f64>(f: &F, breaks: &[f64], spec: &QuadratureSpec) -> Result<f64> {
    let mut heap = BinaryHeap::new();
    let mut total = 0.0;
    let mut total_err = 0.0;
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        let (value, error) = kronrod(f, a, b)?;
        total += value;
        total_err += error;
        heap.push(Segment {
            a,
            b,
            value,
            error,
            depth: 0,
        });
    }
    loop {
        let target = spec.abs_tol.max(spec.rel_tol * total.abs());
        if total_err <= target {
            return Ok(total);
        }
        let worst = match heap.pop() {
            Some(s) => s,
            None => return Ok(total),
        };
        if worst.depth >= spec.max_depth || heap.len() + 2 > MAX_SEGMENTS {
            return Err(Error::Quadrature {
                partial: total,
                error: total_err,
                intervals: heap.len() + 1,
            });
        }
        let mid = 0.5 * (worst.a + worst.b);
        let (lv, le) = kronrod(f, worst.a, mid)?;
        let (rv, re) = kronrod(f, mid, worst.b)?;
        total += lv + rv - worst.value;
        total_err += le + re - worst.error;
        for (a, b, value, error) in [(worst.a, mid, lv, le), (mid, worst.b, rv, re)] {
            heap.push(Segment {
                a,
                b,
                value,
                error,
                depth: worst.depth + 1,
            });
        }
        // Re-sum periodically so cancellation in the running totals cannot drift.
        if heap.len() % 64 == 0 {
            total = heap.iter().map(|s| s.value).sum();
            total_err = heap.iter().map(|s| s.error).sum();
        }
    }
}

/// ∫ₐᵇ f(x) dx. Either endpoint may be infinite; `a < b` is required.
///
/// Fails with [`Error::Quadrature`] (carrying the partial estimate) when a
/// segment would need more than `spec.max_depth` bisections.
pub fn integrate_1d<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<f64> {
    integrate_with_breaks(f, &[a, b], spec)
}

/// Like [`integrate_1d`], with interior breakpoints where the integrand has
/// features (peaks, kinks, sharp transitions). `points` must be strictly
/// increasing; only the first and last may be infinite.
pub fn integrate_with_breaks<F: Fn(f64) -> f64>(
    f: F,
    points: &[f64],
    spec: &QuadratureSpec,
) -> Result<f64> {
    if points.len() < 2 {
        return domain("need at least two integration limits");
    }
    if points.iter().any(|p| p.is_nan()) || points.windows(2).any(|w| !(w[0] < w[1])) {
        return domain("integration limits must be strictly increasing");
    }
    let n = points.len();
    if points[1..n - 1].iter().any(|p| p.is_infinite()) {
        return domain("interior breakpoints must be finite");
    }
    let lo = points[0];
    let hi = points[n - 1];
    match (lo.is_infinite(), hi.is_infinite()) {
        (false, false) => adapt(&f, points, spec),
        (true, true) => {
            // x = t/(1−t²) is monotone on (−1, 1); map interior breaks back.
            let g = |t: f64| {
                let d = 1.0 - t * t;
                let x = t / d;
                if !x.is_finite() {
                    return 0.0;
                }
                let v = f(x) * (1.0 + t * t) / (d * d);
                if v.is_finite() || v.is_nan() {
                    v
                } else {
                    0.0
                }
            };
            let mut ts = vec![-1.0];
            ts.extend(points[1..n - 1].iter().map(|&x| {
                if x == 0.0 {
                    0.0
                } else {
                    (-1.0 + (1.0 + 4.0 * x * x).sqrt()) / (2.0 * x)
                }
            }));
            ts.push(1.0);
            adapt(&g, &ts, spec)
        }
        (false, true) => {
            let g = |t: f64| {
                let s = 1.0 - t;
                let x = lo + t / s;
                if !x.is_finite() {
                    return 0.0;
                }
                f(x) / (s * s)
            };
            let mut ts = vec![0.0];
            ts.extend(points[1..n - 1].iter().map(|&x| (x - lo) / (1.0 + x - lo)));
            ts.push(1.0);
            adapt(&g, &ts, spec)
        }
        (true, false) => {
            let g = |t: f64| {
                let s = 1.0 - t;
                let x = hi - t / s;
                if !x.is_finite() {
                    return 0.0;
                }
                f(x) / (s * s)
            };
            // t decreases as x increases, so the breaks come out reversed.
            let mut ts = vec![0.0];
            ts.extend(
                points[1..n - 1]
                    .iter()
                    .rev()
                    .map(|&x| (hi - x) / (1.0 + hi - x)),
            );
            ts.push(1.0);
            adapt(&g, &ts, spec)
        }
    }
}
