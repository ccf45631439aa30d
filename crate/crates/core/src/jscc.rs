//! Excess-distortion exponents of joint and separate source-channel coding,
//! built from a tabulated source exponent F(R) and channel exponent E(R).
//!
//! Curves are piecewise linear between knots. An infinite knot value makes
//! the adjacent open segments infinite, which is how a step such as
//! "0 up to R*, ∞ beyond" is represented.

use std::fmt;
use std::str::FromStr;

use crate::error::{domain, Error, Result};
use crate::exponents::{reliability, ChannelSpec};

/// Default number of points in a rate grid.
pub const DEFAULT_GRID_POINTS: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct ExponentCurve {
    rates: Vec<f64>,
    values: Vec<f64>,
}

impl ExponentCurve {
    /// Knots must have finite, strictly increasing rates and values that are
    /// non-negative (possibly `f64::INFINITY`).
    pub fn new(knots: Vec<(f64, f64)>) -> Result<Self> {
        if knots.is_empty() {
            return domain("a curve needs at least one knot");
        }
        for w in knots.windows(2) {
            if !(w[1].0 > w[0].0) {
                return domain("curve rates must be strictly increasing");
            }
        }
        for &(r, v) in &knots {
            if !r.is_finite() {
                return domain("curve rates must be finite");
            }
            if !(v >= 0.0) {
                return domain("curve values must be non-negative");
            }
        }
        let (rates, values) = knots.into_iter().unzip();
        Ok(Self { rates, values })
    }

    /// Tabulates `f` at the given rates.
    pub fn tabulate(rates: &[f64], f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(rates.iter().map(|&r| (r, f(r))).collect())
    }

    /// The AWGN reliability function tabulated at `rates`.
    pub fn awgn(channel: &ChannelSpec, rates: &[f64]) -> Result<Self> {
        let c = channel.capacity();
        Self::tabulate(rates, |r| reliability(c, r.max(0.0)))
    }

    pub fn knots(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.rates.iter().copied().zip(self.values.iter().copied())
    }

    pub fn min_rate(&self) -> f64 {
        self.rates[0]
    }

    pub fn max_rate(&self) -> f64 {
        self.rates[self.rates.len() - 1]
    }

    fn covers(&self, r: f64) -> bool {
        r >= self.min_rate() && r <= self.max_rate()
    }

    /// Index k with rates[k] ≤ r < rates[k+1], clamped to the last segment.
    fn segment(&self, r: f64) -> usize {
        let k = self.rates.partition_point(|&x| x <= r);
        k.saturating_sub(1).min(self.rates.len().saturating_sub(2))
    }

    fn interpolate(&self, k: usize, r: f64) -> f64 {
        let (a, b) = (self.rates[k], self.rates[k + 1]);
        let (va, vb) = (self.values[k], self.values[k + 1]);
        if va.is_infinite() || vb.is_infinite() {
            return f64::INFINITY;
        }
        va + (vb - va) * (r - a) / (b - a)
    }

    /// Value at `r`: exact at knots, linear in between.
    pub fn value(&self, r: f64) -> Result<f64> {
        if !self.covers(r) {
            return domain(format!("curve is not defined at rate {r}"));
        }
        if self.rates.len() == 1 {
            return Ok(self.values[0]);
        }
        let k = self.segment(r);
        if r == self.rates[k] {
            return Ok(self.values[k]);
        }
        if r == self.rates[k + 1] {
            return Ok(self.values[k + 1]);
        }
        Ok(self.interpolate(k, r))
    }

    /// The linear piece active on the open interval (a, b), as (value at a,
    /// value at b), or infinite. (a, b) must not contain a knot.
    fn piece(&self, a: f64, b: f64) -> (f64, f64) {
        let k = self.segment(0.5 * (a + b));
        (self.interpolate(k, a), self.interpolate(k, b))
    }
}

impl FromStr for ExponentCurve {
    type Err = Error;

    /// Two columns per line (rate, value), separated by whitespace or a comma.
    /// `inf` marks an infinite value; blank lines and `#` comments are skipped.
    fn from_str(text: &str) -> Result<Self> {
        let mut knots = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|f| !f.is_empty())
                .collect();
            if fields.len() != 2 {
                return domain(format!("line {}: expected two columns", n + 1));
            }
            let parse = |s: &str| -> Result<f64> {
                s.parse::<f64>()
                    .map_err(|_| Error::Domain(format!("line {}: bad number '{s}'", n + 1)))
            };
            let (r, v) = (parse(fields[0])?, parse(fields[1])?);
            if v.is_infinite() && v < 0.0 {
                return domain(format!("line {}: negative infinity", n + 1));
            }
            knots.push((r, v));
        }
        Self::new(knots)
    }
}

impl fmt::Display for ExponentCurve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (r, v) in self.knots() {
            if v.is_infinite() {
                writeln!(f, "{r} inf")?;
            } else {
                writeln!(f, "{r} {v}")?;
            }
        }
        Ok(())
    }
}

/// A source exponent that is 0 up to the knee rate R* and infinite beyond.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepSource {
    knee: f64,
}

impl StepSource {
    pub fn new(knee: f64) -> Result<Self> {
        if !(knee > 0.0 && knee.is_finite()) {
            return domain("knee rate must be positive and finite");
        }
        Ok(Self { knee })
    }

    pub fn knee(&self) -> f64 {
        self.knee
    }

    /// The step as a curve over [lo, hi], which must contain the knee.
    pub fn curve(&self, lo: f64, hi: f64) -> Result<ExponentCurve> {
        if !(lo <= self.knee && self.knee <= hi) {
            return domain("curve range must contain the knee");
        }
        let mut knots = Vec::with_capacity(3);
        if lo < self.knee {
            knots.push((lo, 0.0));
        }
        knots.push((self.knee, 0.0));
        if hi > self.knee {
            knots.push((hi, f64::INFINITY));
        }
        ExponentCurve::new(knots)
    }
}

/// `points` equally spaced rates on [lo, hi] with `extra` rates inserted as
/// exact knots.
pub fn rate_grid(lo: f64, hi: f64, points: usize, extra: &[f64]) -> Result<Vec<f64>> {
    if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
        return domain("grid needs finite bounds with lo <= hi");
    }
    if points == 0 {
        return domain("grid needs at least one point");
    }
    let mut grid: Vec<f64> = if points == 1 {
        vec![lo]
    } else {
        let h = (hi - lo) / (points - 1) as f64;
        (0..points)
            .map(|i| {
                if i == points - 1 {
                    hi
                } else {
                    lo + h * i as f64
                }
            })
            .collect()
    };
    grid.extend(extra.iter().copied().filter(|x| *x >= lo && *x <= hi));
    grid.sort_by(|a, b| a.total_cmp(b));
    grid.dedup();
    Ok(grid)
}

/// Sorted evaluation points: the grid plus every knot of either curve inside
/// the grid's range.
fn evaluation_points(f: &ExponentCurve, e: &ExponentCurve, grid: &[f64]) -> Result<Vec<f64>> {
    if grid.is_empty() {
        return domain("empty rate grid");
    }
    if grid.iter().any(|r| !r.is_finite()) {
        return domain("grid rates must be finite");
    }
    let lo = grid.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = grid.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    for c in [f, e] {
        if !(c.covers(lo) && c.covers(hi)) {
            return domain("curve does not cover the rate grid");
        }
    }
    let mut pts: Vec<f64> = grid.to_vec();
    pts.extend(
        f.knots()
            .chain(e.knots())
            .map(|(r, _)| r)
            .filter(|r| *r >= lo && *r <= hi),
    );
    pts.sort_by(|a, b| a.total_cmp(b));
    pts.dedup();
    Ok(pts)
}

/// min over the grid's range of F(R) + E(R).
///
/// Both curves are linear between evaluation points, so the minimum is
/// attained at one of them.
pub fn joint_exponent(f: &ExponentCurve, e: &ExponentCurve, grid: &[f64]) -> Result<f64> {
    let pts = evaluation_points(f, e, grid)?;
    let mut best = f64::INFINITY;
    for &r in &pts {
        best = best.min(f.value(r)? + e.value(r)?);
    }
    Ok(best)
}

/// sup over the grid's range of min{F(R), E(R)}.
///
/// The supremum is taken over the interpolated curves, so one-sided limits at
/// a jump count: a step source gives exactly E(R*) rather than E at the next
/// grid point.
pub fn separation_exponent(f: &ExponentCurve, e: &ExponentCurve, grid: &[f64]) -> Result<f64> {
    let pts = evaluation_points(f, e, grid)?;
    let mut best = f64::NEG_INFINITY;
    for &r in &pts {
        best = best.max(f.value(r)?.min(e.value(r)?));
    }
    for w in pts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (fa, fb) = f.piece(a, b);
        let (ea, eb) = e.piece(a, b);
        best = best.max(fa.min(ea)).max(fb.min(eb));
        // Interior crossing of two finite lines.
        let (da, db) = (fa - ea, fb - eb);
        if da.is_finite() && db.is_finite() && da * db < 0.0 {
            let t = da / (da - db);
            best = best.max(fa + t * (fb - fa));
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EqualityReport {
    pub knee: f64,
    pub joint: f64,
    pub separation: f64,
    /// E(R*) from the closed form.
    pub expected: f64,
    /// Largest change of the tabulated E between adjacent grid points.
    pub resolution: f64,
}

/// For a step source with knee R*, joint and separate coding share the
/// exponent E(R*). The AWGN exponent is tabulated on a `points`-point grid
/// over [0, C] with the knee inserted as a knot; an error is returned if
/// either exponent misses E(R*) by more than the grid resolution.
pub fn uniform_source_equality(
    knee: f64,
    channel: &ChannelSpec,
    points: usize,
) -> Result<EqualityReport> {
    let c = channel.capacity();
    if !(knee > 0.0 && knee < c) {
        return domain("knee rate must lie in (0, C)");
    }
    let grid = rate_grid(0.0, c, points.max(2), &[knee])?;
    let e = ExponentCurve::awgn(channel, &grid)?;
    let f = StepSource::new(knee)?.curve(0.0, c)?;
    let joint = joint_exponent(&f, &e, &grid)?;
    let separation = separation_exponent(&f, &e, &grid)?;
    let expected = reliability(c, knee);
    let resolution = e
        .values
        .windows(2)
        .map(|w| (w[1] - w[0]).abs())
        .fold(0.0, f64::max);
    let tol = resolution + 1e-12;
    if (joint - expected).abs() > tol || (separation - expected).abs() > tol {
        return domain(format!(
            "step-source equality failed: joint {joint}, separation {separation}, E(R*) {expected}"
        ));
    }
    Ok(EqualityReport {
        knee,
        joint,
        separation,
        expected,
        resolution,
    })
}
