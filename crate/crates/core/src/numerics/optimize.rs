//! Golden-section search for unimodal functions of one variable.

use crate::error::{domain, Error, Result};

const INV_PHI: f64 = 0.618_033_988_749_894_8;

fn eval<G: Fn(f64) -> f64>(g: &G, x: f64) -> Result<f64> {
    let v = g(x);
    if v.is_nan() {
        Err(Error::Evaluation { at: x })
    } else {
        Ok(v)
    }
}

/// Maximizes `g` over `[lo, hi]`, returning `(argmax, max)`.
///
/// `g` must be unimodal on the bracket; that is not checked. The endpoints are
/// compared against the interior optimum so monotone objectives return the
/// boundary exactly.
pub fn maximize_concave_1d<G: Fn(f64) -> f64>(
    g: G,
    lo: f64,
    hi: f64,
    tol: f64,
) -> Result<(f64, f64)> {
    if !(lo < hi) {
        return domain("optimization bracket must satisfy lo < hi");
    }
    if !(tol > 0.0) {
        return domain("optimization tolerance must be positive");
    }
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = eval(&g, c)?;
    let mut fd = eval(&g, d)?;
    while (b - a).abs() > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = eval(&g, c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = eval(&g, d)?;
        }
    }
    let mid = 0.5 * (a + b);
    let mut best = (mid, eval(&g, mid)?);
    for x in [lo, hi] {
        let v = eval(&g, x)?;
        if v > best.1 {
            best = (x, v);
        }
    }
    Ok(best)
}

/// Minimizes a convex `g` on `[lo, hi]`; returns `(argmin, min)`.
pub fn minimize_convex_1d<G: Fn(f64) -> f64>(
    g: G,
    lo: f64,
    hi: f64,
    tol: f64,
) -> Result<(f64, f64)> {
    let (x, v) = maximize_concave_1d(|x| -g(x), lo, hi, tol)?;
    Ok((x, -v))
}
