use crate::error::{domain, Error, Result};

/// Default bound on the number of grid cells (and hence orthogonal signals).
pub const DEFAULT_CELL_CAP: u64 = 1 << 62;

/// Uniform quantizer of [−1/2, +1/2) into M cells of width Δ = 1/M.
///
/// Cells are indexed from 0; cell i has center −1/2 + (2i + 1)/(2M).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridCode {
    count: u64,
    duration: f64,
}

impl GridCode {
    /// A grid with exactly `count` cells used over `duration` seconds.
    pub fn with_count(count: u64, duration: f64) -> Result<Self> {
        if count < 2 {
            return domain("a grid needs at least two cells");
        }
        if !(duration > 0.0 && duration.is_finite()) {
            return domain("duration must be positive and finite");
        }
        Ok(Self { count, duration })
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    /// Δ = 1/M.
    pub fn width(&self) -> f64 {
        1.0 / self.count as f64
    }

    /// Δ/2, the largest quantization error.
    pub fn threshold(&self) -> f64 {
        0.5 / self.count as f64
    }

    /// ln(2M)/T, the rate the grid actually realizes.
    pub fn effective_rate(&self) -> f64 {
        (2.0 * self.count as f64).ln() / self.duration
    }

    /// Center of cell `index`.
    pub fn point(&self, index: u64) -> f64 {
        -0.5 + (2 * index + 1) as f64 / (2 * self.count) as f64
    }

    /// All cell centers; meant for small grids.
    pub fn points(&self) -> Vec<f64> {
        (0..self.count).map(|i| self.point(i)).collect()
    }

    /// Index of the cell containing `u`; a point on a boundary belongs to the
    /// upper cell.
    pub fn quantize(&self, u: f64) -> Result<u64> {
        if !(-0.5..0.5).contains(&u) {
            return domain("parameter must lie in [-1/2, 1/2)");
        }
        Ok(self.cell_of(u))
    }

    pub(crate) fn cell_of(&self, u: f64) -> u64 {
        (((u + 0.5) * self.count as f64).floor() as u64).min(self.count - 1)
    }
}

/// Grid with M = max(2, round(e^{RT}/2)) cells, bounded by [`DEFAULT_CELL_CAP`].
pub fn build_grid(rate: f64, duration: f64) -> Result<GridCode> {
    build_grid_capped(rate, duration, DEFAULT_CELL_CAP)
}

pub fn build_grid_capped(rate: f64, duration: f64, cap: u64) -> Result<GridCode> {
    let cells = cell_count(rate, duration)?;
    if cells > cap as f64 {
        return Err(Error::GridTooLarge { cells, cap });
    }
    GridCode::with_count(cells as u64, duration)
}

/// max(2, round(e^{RT}/2)) as a float, before any cap is applied.
pub(crate) fn cell_count(rate: f64, duration: f64) -> Result<f64> {
    if !(rate > 0.0 && rate.is_finite()) {
        return domain("rate must be positive and finite");
    }
    if !(duration > 0.0 && duration.is_finite()) {
        return domain("duration must be positive and finite");
    }
    Ok(((rate * duration).exp() / 2.0).round().max(2.0))
}

/// Index of the point nearest to `u` in `grid`.
pub fn quantize(u: f64, grid: &GridCode) -> Result<u64> {
    grid.quantize(u)
}
