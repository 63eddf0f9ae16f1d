use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dynamics::QuadraticMap;
use crate::error::{Error, Result};
use crate::exec::Exec;

/// Axis-aligned rectangle in the complex plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl Window {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Result<Self> {
        let w = Window {
            re_min,
            re_max,
            im_min,
            im_max,
        };
        w.validate()?;
        Ok(w)
    }

    /// Square window of half-width `half` around `center`.
    pub fn centered(center: Complex64, half: f64) -> Result<Self> {
        Self::new(
            center.re - half,
            center.re + half,
            center.im - half,
            center.im + half,
        )
    }

    pub fn validate(&self) -> Result<()> {
        let ok = [self.re_min, self.re_max, self.im_min, self.im_max]
            .iter()
            .all(|v| v.is_finite())
            && self.re_max > self.re_min
            && self.im_max > self.im_min;
        if ok {
            Ok(())
        } else {
            Err(Error::domain(format!("degenerate window {self:?}")))
        }
    }

    pub fn width(&self) -> f64 {
        self.re_max - self.re_min
    }

    pub fn height(&self) -> f64 {
        self.im_max - self.im_min
    }

    pub fn contains_disk(&self, x: Complex64, r: f64) -> bool {
        x.re - r >= self.re_min
            && x.re + r <= self.re_max
            && x.im - r >= self.im_min
            && x.im + r <= self.im_max
    }
}

/// Cell geometry shared by rasters and distance fields.
///
/// Row 0 is the top of the window (largest imaginary part), matching image
/// conventions; cell `(i, j)` is column `i`, row `j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub window: Window,
    pub width: usize,
    pub height: usize,
}

impl Grid {
    pub fn new(window: Window, width: usize, height: usize) -> Result<Self> {
        window.validate()?;
        if width == 0 || height == 0 {
            return Err(Error::domain("grid needs positive resolution"));
        }
        Ok(Grid {
            window,
            width,
            height,
        })
    }

    pub fn dx(&self) -> f64 {
        self.window.width() / self.width as f64
    }

    pub fn dy(&self) -> f64 {
        self.window.height() / self.height as f64
    }

    /// Larger side of a cell.
    pub fn cell_size(&self) -> f64 {
        self.dx().max(self.dy())
    }

    pub fn len(&self) -> usize {
        self.width * self.height
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.width + i
    }

    #[inline]
    pub fn center(&self, i: usize, j: usize) -> Complex64 {
        Complex64::new(
            self.window.re_min + (i as f64 + 0.5) * self.dx(),
            self.window.im_max - (j as f64 + 0.5) * self.dy(),
        )
    }

    /// Center of a possibly out-of-window cell.
    #[inline]
    pub fn center_signed(&self, i: i64, j: i64) -> Complex64 {
        Complex64::new(
            self.window.re_min + (i as f64 + 0.5) * self.dx(),
            self.window.im_max - (j as f64 + 0.5) * self.dy(),
        )
    }

    /// Cell containing `z`, or `None` outside the window.
    pub fn cell_of(&self, z: Complex64) -> Option<(usize, usize)> {
        let (i, j) = self.cell_of_signed(z);
        if i < 0 || j < 0 || i >= self.width as i64 || j >= self.height as i64 {
            None
        } else {
            Some((i as usize, j as usize))
        }
    }

    pub fn cell_of_signed(&self, z: Complex64) -> (i64, i64) {
        let i = ((z.re - self.window.re_min) / self.dx()).floor() as i64;
        let j = ((self.window.im_max - z.im) / self.dy()).floor() as i64;
        (i, j)
    }

    /// Signed cell index range `[lo, hi]` per axis whose cells meet the
    /// closed bounding box of `D(x, r)`.
    pub fn disk_bbox(&self, x: Complex64, r: f64) -> (i64, i64, i64, i64) {
        let i0 = ((x.re - r - self.window.re_min) / self.dx()).floor() as i64;
        let i1 = ((x.re + r - self.window.re_min) / self.dx()).floor() as i64;
        let j0 = ((self.window.im_max - (x.im + r)) / self.dy()).floor() as i64;
        let j1 = ((self.window.im_max - (x.im - r)) / self.dy()).floor() as i64;
        (i0, i1, j0, j1)
    }
}

/// Grid approximation of a filled Julia set: a cell is inside when the
/// orbit of its center stays within `escape_radius` for `max_iter` steps.
///
/// This over-approximates `K_f`, and the over-approximation shrinks as
/// `max_iter` grows.
#[derive(Debug, Clone, PartialEq)]
pub struct KRaster {
    grid: Grid,
    inside: Vec<bool>,
    max_iter: u32,
    escape_radius: f64,
}

impl KRaster {
    /// Build from an explicit row-major mask (test fixtures, cache loads).
    pub fn from_mask(
        grid: Grid,
        inside: Vec<bool>,
        max_iter: u32,
        escape_radius: f64,
    ) -> Result<Self> {
        if inside.len() != grid.len() {
            return Err(Error::domain(format!(
                "mask length {} does not match {}x{}",
                inside.len(),
                grid.width,
                grid.height
            )));
        }
        Ok(KRaster {
            grid,
            inside,
            max_iter,
            escape_radius,
        })
    }

    /// Raster whose inside cells are those with `pred(center)`.
    pub fn from_predicate(grid: Grid, pred: impl Fn(Complex64) -> bool) -> Self {
        let mut inside = vec![false; grid.len()];
        for j in 0..grid.height {
            for i in 0..grid.width {
                inside[grid.index(i, j)] = pred(grid.center(i, j));
            }
        }
        KRaster {
            grid,
            inside,
            max_iter: 0,
            escape_radius: 0.0,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn window(&self) -> Window {
        self.grid.window
    }

    pub fn width(&self) -> usize {
        self.grid.width
    }

    pub fn height(&self) -> usize {
        self.grid.height
    }

    pub fn max_iter(&self) -> u32 {
        self.max_iter
    }

    pub fn escape_radius(&self) -> f64 {
        self.escape_radius
    }

    pub fn mask(&self) -> &[bool] {
        &self.inside
    }

    #[inline]
    pub fn is_inside(&self, i: usize, j: usize) -> bool {
        self.inside[self.grid.index(i, j)]
    }

    /// Inside test for signed indices; out-of-window cells are outside.
    #[inline]
    pub fn is_inside_signed(&self, i: i64, j: i64) -> bool {
        i >= 0
            && j >= 0
            && (i as usize) < self.grid.width
            && (j as usize) < self.grid.height
            && self.inside[self.grid.index(i as usize, j as usize)]
    }

    pub fn inside_count(&self) -> usize {
        self.inside.iter().filter(|&&b| b).count()
    }

    pub fn inside_fraction(&self) -> f64 {
        self.inside_count() as f64 / self.grid.len() as f64
    }
}

/// Rule deciding which cells belong to the rasterized `K`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case")]
pub enum Membership {
    /// The cell center does not escape within `max_iter`.
    #[default]
    CenterBounded,
    /// Also accept escaping centers whose distance estimate
    /// `|z| ln|z| / (2 |dz|)` is below `cells` cell sizes. Thin sets such as
    /// the Feigenbaum Julia set are otherwise missed by most cells.
    DistanceEstimate { cells: f64 },
}

/// Bailout used by the distance estimator; the estimate is only accurate
/// for large `|z|`.
const DE_BAILOUT: f64 = 1e6;

fn distance_estimate(f: &QuadraticMap, z: Complex64, max_iter: u32) -> Option<f64> {
    let (mut z, mut dz) = (z, Complex64::new(1.0, 0.0));
    for _ in 0..max_iter {
        dz *= f.derivative(z);
        z = f.apply(z);
        let r = z.norm();
        if r > DE_BAILOUT {
            return Some(0.5 * r * r.ln() / dz.norm());
        }
    }
    None
}

/// Rasterize the filled Julia set of `f` over `window`.
pub fn fill_raster(
    f: &QuadraticMap,
    window: Window,
    width: usize,
    height: usize,
    max_iter: u32,
    escape_radius: f64,
    exec: Exec,
) -> Result<KRaster> {
    fill_raster_with(
        f,
        window,
        width,
        height,
        max_iter,
        escape_radius,
        Membership::CenterBounded,
        exec,
    )
}

#[allow(clippy::too_many_arguments)]
pub fn fill_raster_with(
    f: &QuadraticMap,
    window: Window,
    width: usize,
    height: usize,
    max_iter: u32,
    escape_radius: f64,
    membership: Membership,
    exec: Exec,
) -> Result<KRaster> {
    window.validate()?;
    if width < 2 || height < 2 {
        return Err(Error::domain(format!(
            "resolution {width}x{height} below 2x2"
        )));
    }
    if !(escape_radius >= 3.0) {
        return Err(Error::domain(format!(
            "escape radius {escape_radius} below 3"
        )));
    }
    if let Membership::DistanceEstimate { cells } = membership {
        if !(cells > 0.0) {
            return Err(Error::domain(format!(
                "distance-estimate threshold {cells} must be positive"
            )));
        }
    }
    let grid = Grid::new(window, width, height)?;
    let cell = grid.cell_size();
    let mut inside = vec![false; grid.len()];
    exec.for_each_chunk(&mut inside, width, |j, row| {
        for (i, slot) in row.iter_mut().enumerate() {
            let z = grid.center(i, j);
            *slot = match membership {
                Membership::CenterBounded => f.escape_time(z, max_iter, escape_radius).is_none(),
                Membership::DistanceEstimate { cells } => {
                    distance_estimate(f, z, max_iter).is_none_or(|d| d < cells * cell)
                }
            };
        }
    });
    Ok(KRaster {
        grid,
        inside,
        max_iter,
        escape_radius,
    })
}
