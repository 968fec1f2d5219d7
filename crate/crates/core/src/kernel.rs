//! Serial escape-time mathematics.
//!
//! Every pixel `(i, j)` of a `height × width` image maps to the point
//! `c = (Cx[j], Cy[i])` and records the iteration at which the orbit of
//! `z ← z² + c` (starting from `z = 0`) first satisfies `|z|² > escape_radius`.
//! Orbits that stay bounded report `max_iterations`.
//!
//! Rows run along the imaginary axis and columns along the real axis, so
//! `grid.row(i)` is the image row sampled at `Cy[i]`.

use std::time::{Duration, Instant};

use thiserror::Error;

/// Iteration count stored per pixel.
pub type Iterations = u32;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("invalid range: lower bound {lo} must be below upper bound {hi}")]
    InvalidRange { lo: f64, hi: f64 },
    #[error("invalid count: {what} must be at least 1")]
    InvalidCount { what: &'static str },
    #[error("escape radius must be positive and finite, got {0}")]
    InvalidEscapeRadius(f64),
    #[error("non-finite coordinate: {0}")]
    NonFinite(f64),
    #[error("row {row} out of range for an image of height {height}")]
    RowOutOfRange { row: usize, height: usize },
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("grid of {height}×{width} cells cannot be allocated")]
    Allocation { height: usize, width: usize },
}

/// A point of the complex plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexPoint {
    pub re: f64,
    pub im: f64,
}

impl ComplexPoint {
    pub fn new(re: f64, im: f64) -> Result<Self, ConfigError> {
        for v in [re, im] {
            if !v.is_finite() {
                return Err(ConfigError::NonFinite(v));
            }
        }
        Ok(ComplexPoint { re, im })
    }
}

/// Image geometry, complex-plane window and escape parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RenderConfig {
    pub width: usize,
    pub height: usize,
    pub max_iterations: Iterations,
    /// Compared against the squared orbit magnitude, so 400 means `|z| > 20`.
    pub escape_radius: f64,
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl RenderConfig {
    pub const DEFAULT_RE: (f64, f64) = (-2.5, 1.5);
    pub const DEFAULT_IM: (f64, f64) = (-2.0, 2.0);
    pub const DEFAULT_MAX_ITERATIONS: Iterations = 2000;
    pub const DEFAULT_ESCAPE_RADIUS: f64 = 400.0;

    /// Default window and escape parameters at the given size.
    pub fn new(width: usize, height: usize) -> Result<Self, ConfigError> {
        RenderConfig {
            width,
            height,
            max_iterations: Self::DEFAULT_MAX_ITERATIONS,
            escape_radius: Self::DEFAULT_ESCAPE_RADIUS,
            re_min: Self::DEFAULT_RE.0,
            re_max: Self::DEFAULT_RE.1,
            im_min: Self::DEFAULT_IM.0,
            im_max: Self::DEFAULT_IM.1,
        }
        .validated()
    }

    pub fn with_max_iterations(mut self, max_iterations: Iterations) -> Result<Self, ConfigError> {
        self.max_iterations = max_iterations;
        self.validated()
    }

    pub fn with_escape_radius(mut self, escape_radius: f64) -> Result<Self, ConfigError> {
        self.escape_radius = escape_radius;
        self.validated()
    }

    pub fn with_window(mut self, re: (f64, f64), im: (f64, f64)) -> Result<Self, ConfigError> {
        (self.re_min, self.re_max) = re;
        (self.im_min, self.im_max) = im;
        self.validated()
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.width == 0 {
            return Err(ConfigError::InvalidCount { what: "width" });
        }
        if self.height == 0 {
            return Err(ConfigError::InvalidCount { what: "height" });
        }
        if self.max_iterations == 0 {
            return Err(ConfigError::InvalidCount { what: "max_iterations" });
        }
        if !(self.escape_radius.is_finite() && self.escape_radius > 0.0) {
            return Err(ConfigError::InvalidEscapeRadius(self.escape_radius));
        }
        for v in [self.re_min, self.re_max, self.im_min, self.im_max] {
            if !v.is_finite() {
                return Err(ConfigError::NonFinite(v));
            }
        }
        check_range(self.re_min, self.re_max)?;
        check_range(self.im_min, self.im_max)
    }

    fn validated(self) -> Result<Self, ConfigError> {
        self.validate()?;
        Ok(self)
    }

    pub fn pixel_count(&self) -> usize {
        self.width * self.height
    }
}

fn check_range(lo: f64, hi: f64) -> Result<(), ConfigError> {
    if lo < hi {
        Ok(())
    } else {
        Err(ConfigError::InvalidRange { lo, hi })
    }
}

/// Samples `count` left-edge pixel coordinates: `lo + k·(hi − lo)/count`.
pub fn build_axis(lo: f64, hi: f64, count: usize) -> Result<Vec<f64>, ConfigError> {
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(ConfigError::NonFinite(if lo.is_finite() { hi } else { lo }));
    }
    check_range(lo, hi)?;
    if count == 0 {
        return Err(ConfigError::InvalidCount { what: "axis sample count" });
    }
    let step = (hi - lo) / count as f64;
    Ok((0..count).map(|k| lo + k as f64 * step).collect())
}

/// Escape-time iteration for a single point.
///
/// Returns the 1-based iteration at which `|z|² > escape_radius` first holds,
/// or `max_iterations` if the orbit never exceeds the bound.
#[inline]
pub fn escape_iterations(c: ComplexPoint, max_iterations: Iterations, escape_radius: f64) -> Iterations {
    let (mut x, mut y) = (0.0f64, 0.0f64);
    for i in 1..=max_iterations {
        let next_x = x * x - y * y + c.re;
        let next_y = 2.0 * x * y + c.im;
        x = next_x;
        y = next_y;
        if x * x + y * y > escape_radius {
            return i;
        }
    }
    max_iterations
}

/// Precomputed `Cx`/`Cy` axes for a configuration.
///
/// All tasks of a run share one plane; it is immutable and `Sync`.
#[derive(Debug, Clone)]
pub struct Plane {
    config: RenderConfig,
    cx: Vec<f64>,
    cy: Vec<f64>,
}

impl Plane {
    pub fn new(config: &RenderConfig) -> Result<Self, ConfigError> {
        config.validate()?;
        Ok(Plane {
            config: *config,
            cx: build_axis(config.re_min, config.re_max, config.width)?,
            cy: build_axis(config.im_min, config.im_max, config.height)?,
        })
    }

    pub fn config(&self) -> &RenderConfig {
        &self.config
    }

    pub fn cx(&self) -> &[f64] {
        &self.cx
    }

    pub fn cy(&self) -> &[f64] {
        &self.cy
    }

    pub fn compute_row(&self, row: usize) -> Result<Vec<Iterations>, ConfigError> {
        let mut out = vec![0; self.config.width];
        self.compute_row_into(row, &mut out)?;
        Ok(out)
    }

    /// Writes row `row` into `out`, which must be exactly `width` long.
    pub fn compute_row_into(&self, row: usize, out: &mut [Iterations]) -> Result<(), ConfigError> {
        let im = *self.cy.get(row).ok_or(ConfigError::RowOutOfRange { row, height: self.config.height })?;
        assert_eq!(out.len(), self.config.width, "row buffer length must equal width");
        let (max, er) = (self.config.max_iterations, self.config.escape_radius);
        for (cell, &re) in out.iter_mut().zip(&self.cx) {
            *cell = escape_iterations(ComplexPoint { re, im }, max, er);
        }
        Ok(())
    }
}

/// Computes one image row. Builds the axes on every call; use [`Plane`] when
/// computing many rows of the same configuration.
pub fn compute_row(row_index: usize, config: &RenderConfig) -> Result<Vec<Iterations>, ConfigError> {
    Plane::new(config)?.compute_row(row_index)
}

/// Row-major grid of per-pixel iteration counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IterationGrid {
    width: usize,
    height: usize,
    max_iterations: Iterations,
    cells: Vec<Iterations>,
}

impl IterationGrid {
    /// Grid with every cell zeroed, to be filled row by row.
    pub(crate) fn blank(config: &RenderConfig) -> Result<Self, ConfigError> {
        let len = config
            .width
            .checked_mul(config.height)
            .ok_or(ConfigError::Allocation { height: config.height, width: config.width })?;
        let mut cells = Vec::new();
        cells
            .try_reserve_exact(len)
            .map_err(|_| ConfigError::Allocation { height: config.height, width: config.width })?;
        cells.resize(len, 0);
        Ok(IterationGrid { width: config.width, height: config.height, max_iterations: config.max_iterations, cells })
    }

    /// Builds a grid from raw cells, checking length and cell range.
    pub fn from_cells(
        width: usize,
        height: usize,
        max_iterations: Iterations,
        cells: Vec<Iterations>,
    ) -> Result<Self, ConfigError> {
        if width == 0 || height == 0 {
            return Err(ConfigError::InvalidCount { what: "grid dimension" });
        }
        if cells.len() != width * height {
            return Err(ConfigError::InvalidGrid(format!("{} cells for a {height}×{width} grid", cells.len())));
        }
        if let Some(&bad) = cells.iter().find(|&&c| c == 0 || c > max_iterations) {
            return Err(ConfigError::InvalidGrid(format!("cell value {bad} outside [1, {max_iterations}]")));
        }
        Ok(IterationGrid { width, height, max_iterations, cells })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn max_iterations(&self) -> Iterations {
        self.max_iterations
    }

    pub fn cells(&self) -> &[Iterations] {
        &self.cells
    }

    pub fn get(&self, row: usize, col: usize) -> Option<Iterations> {
        (row < self.height && col < self.width).then(|| self.cells[row * self.width + col])
    }

    pub fn row(&self, row: usize) -> &[Iterations] {
        &self.cells[row * self.width..(row + 1) * self.width]
    }

    pub(crate) fn row_mut(&mut self, row: usize) -> &mut [Iterations] {
        &mut self.cells[row * self.width..(row + 1) * self.width]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[Iterations]> + DoubleEndedIterator {
        self.cells.chunks_exact(self.width)
    }
}

/// Computes every row in order on the calling thread.
///
/// The returned duration covers the row loop only; axis setup and any I/O
/// are excluded.
pub fn compute_grid_serial(config: &RenderConfig) -> Result<(IterationGrid, Duration), ConfigError> {
    let plane = Plane::new(config)?;
    let mut grid = IterationGrid::blank(config)?;
    let start = Instant::now();
    for row in 0..config.height {
        plane.compute_row_into(row, grid.row_mut(row))?;
    }
    Ok((grid, start.elapsed()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn point(re: f64, im: f64) -> ComplexPoint {
        ComplexPoint::new(re, im).unwrap()
    }

    #[test]
    fn axis_single_sample_is_lo() {
        assert_eq!(build_axis(0.0, 1.0, 1).unwrap(), vec![0.0]);
    }

    #[test]
    fn axis_direct_substitution() {
        assert_eq!(build_axis(-2.0, 2.0, 4).unwrap(), vec![-2.0, -1.0, 0.0, 1.0]);
    }

    #[test]
    fn axis_endpoints_at_8000() {
        let axis = build_axis(-2.5, 1.5, 8000).unwrap();
        assert_eq!(axis.len(), 8000);
        assert_eq!(axis[0], -2.5);
        // -2.5 + 7999 * 4/8000 = 1.4995
        assert!((axis[7999] - 1.4995).abs() < 1e-12);
        assert!(axis.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn axis_errors() {
        assert!(matches!(build_axis(1.0, 1.0, 4), Err(ConfigError::InvalidRange { .. })));
        assert!(matches!(build_axis(2.0, 1.0, 4), Err(ConfigError::InvalidRange { .. })));
        assert!(matches!(build_axis(0.0, 1.0, 0), Err(ConfigError::InvalidCount { .. })));
        assert!(matches!(build_axis(f64::NAN, 1.0, 3), Err(ConfigError::NonFinite(_))));
    }

    #[test]
    fn escape_origin_never_escapes() {
        assert_eq!(escape_iterations(point(0.0, 0.0), 2000, 400.0), 2000);
    }

    #[test]
    fn escape_two_by_hand() {
        // z: 2 (|z|²=4), 6 (36), 38 (1444 > 400)
        assert_eq!(escape_iterations(point(2.0, 0.0), 2000, 400.0), 3);
    }

    #[test]
    fn escape_period_two_cycle() {
        assert_eq!(escape_iterations(point(-1.0, 0.0), 2000, 400.0), 2000);
    }

    #[test]
    fn escape_uses_squared_magnitude() {
        // c = 20.5: first iterate |z|² = 420.25 > 400, though |z| = 20.5 < 400.
        assert_eq!(escape_iterations(point(20.5, 0.0), 50, 400.0), 1);
        // c = 19.5: |z|² = 380.25 on the first step, escapes on the second.
        assert_eq!(escape_iterations(point(19.5, 0.0), 50, 400.0), 2);
    }

    #[test]
    fn complex_point_rejects_non_finite() {
        assert!(ComplexPoint::new(f64::INFINITY, 0.0).is_err());
        assert!(ComplexPoint::new(0.0, f64::NAN).is_err());
    }

    #[test]
    fn config_validation() {
        let base = RenderConfig::new(4, 4).unwrap();
        assert!(RenderConfig::new(0, 4).is_err());
        assert!(RenderConfig::new(4, 0).is_err());
        assert!(base.with_max_iterations(0).is_err());
        assert!(base.with_escape_radius(0.0).is_err());
        assert!(base.with_escape_radius(-1.0).is_err());
        assert!(base.with_window((1.0, 1.0), (-1.0, 1.0)).is_err());
        assert!(base.with_window((-1.0, 1.0), (2.0, 1.0)).is_err());
    }

    #[test]
    fn one_by_one_at_origin() {
        // Single sample at re_min/im_min, so place the window's lower corner at 0.
        let cfg = RenderConfig::new(1, 1).unwrap().with_window((0.0, 0.1), (0.0, 0.1)).unwrap();
        assert_eq!(compute_row(0, &cfg).unwrap(), vec![cfg.max_iterations]);
        let (grid, _) = compute_grid_serial(&cfg).unwrap();
        assert_eq!(grid.cells(), &[cfg.max_iterations]);
    }

    #[test]
    fn row_matches_per_pixel_calls() {
        let cfg = RenderConfig::new(8, 8).unwrap().with_max_iterations(200).unwrap();
        let cx = build_axis(cfg.re_min, cfg.re_max, cfg.width).unwrap();
        let cy = build_axis(cfg.im_min, cfg.im_max, cfg.height).unwrap();
        let expected: Vec<_> =
            cx.iter().map(|&re| escape_iterations(point(re, cy[0]), cfg.max_iterations, cfg.escape_radius)).collect();
        assert_eq!(compute_row(0, &cfg).unwrap(), expected);
        assert_eq!(compute_row(0, &cfg).unwrap(), compute_row(0, &cfg).unwrap());
    }

    #[test]
    fn row_out_of_range() {
        let cfg = RenderConfig::new(4, 4).unwrap();
        assert_eq!(compute_row(4, &cfg), Err(ConfigError::RowOutOfRange { row: 4, height: 4 }));
    }

    #[test]
    fn grid_is_concatenation_of_rows() {
        let cfg = RenderConfig::new(16, 16).unwrap().with_max_iterations(100).unwrap();
        let (grid, _) = compute_grid_serial(&cfg).unwrap();
        let concatenated: Vec<_> = (0..16).flat_map(|r| compute_row(r, &cfg).unwrap()).collect();
        assert_eq!(grid.cells(), concatenated.as_slice());
        assert_eq!(compute_grid_serial(&cfg).unwrap().0, grid);
    }

    #[test]
    fn mirrored_rows_match_in_symmetric_window() {
        // Power-of-two height keeps Cy exact, so Cy[k] == -Cy[h-k].
        let cfg = RenderConfig::new(32, 16).unwrap().with_max_iterations(300).unwrap();
        let plane = Plane::new(&cfg).unwrap();
        let (grid, _) = compute_grid_serial(&cfg).unwrap();
        let cy = plane.cy();
        let mut pairs = 0;
        for i in 0..cfg.height {
            for j in 0..cfg.height {
                if cy[i] == -cy[j] {
                    assert_eq!(grid.row(i), grid.row(j), "rows {i} and {j}");
                    pairs += 1;
                }
            }
        }
        assert!(pairs >= cfg.height - 1);
    }

    #[test]
    fn from_cells_checks_range() {
        assert!(IterationGrid::from_cells(2, 1, 5, vec![1, 5]).is_ok());
        assert!(IterationGrid::from_cells(2, 1, 5, vec![0, 5]).is_err());
        assert!(IterationGrid::from_cells(2, 1, 5, vec![1, 6]).is_err());
        assert!(IterationGrid::from_cells(2, 1, 5, vec![1]).is_err());
    }

    proptest! {
        #[test]
        fn escape_count_in_range(re in -3.0f64..3.0, im in -3.0f64..3.0, max in 1u32..500) {
            let n = escape_iterations(point(re, im), max, 400.0);
            prop_assert!((1..=max).contains(&n));
        }

        #[test]
        fn escape_monotone_in_cap(re in -2.5f64..1.5, im in -2.0f64..2.0, a in 1u32..400, b in 1u32..400) {
            let (lo, hi) = (a.min(b), a.max(b));
            let n_lo = escape_iterations(point(re, im), lo, 400.0);
            let n_hi = escape_iterations(point(re, im), hi, 400.0);
            prop_assert!(n_lo <= n_hi);
            if n_lo < lo {
                // already escaped below the smaller cap: the index is fixed
                prop_assert_eq!(n_lo, n_hi);
            }
        }

        #[test]
        fn escape_conjugate_symmetric(re in -2.5f64..1.5, im in -2.0f64..2.0) {
            prop_assert_eq!(
                escape_iterations(point(re, im), 256, 400.0),
                escape_iterations(point(re, -im), 256, 400.0)
            );
        }

        #[test]
        fn axis_strictly_increasing(lo in -10.0f64..10.0, span in 0.001f64..10.0, count in 1usize..2000) {
            let axis = build_axis(lo, lo + span, count).unwrap();
            prop_assert_eq!(axis.len(), count);
            prop_assert_eq!(axis[0], lo);
            prop_assert!(axis.windows(2).all(|w| w[0] < w[1]));
        }
    }
}
