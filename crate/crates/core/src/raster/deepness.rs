use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::distance::DistanceField;
use super::kraster::KRaster;
use crate::error::{Error, Result};

/// Points with `1 - dens` below this are left out of power-law fits.
pub const FIT_FLOOR: f64 = 1e-6;

/// Subsamples per axis for cells straddling the disk boundary.
const SUBSAMPLES: usize = 4;

/// A functional value together with a flag telling whether the disk
/// reached outside the raster window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Clipped {
    pub value: f64,
    pub clipped: bool,
}

/// Radius of the largest open disk inside `D(x, r) - K`, maximized over
/// cell-center candidates `y`: `max_y min(d(y, K), r - |y - x|)`.
///
/// Only cells inside the window are candidates; [`Clipped::clipped`] is set
/// when the disk leaves the window.
pub fn delta(x: Complex64, r: f64, field: &DistanceField) -> Result<Clipped> {
    if !(r > 0.0) {
        return Err(Error::domain(format!("delta radius {r} must be positive")));
    }
    let grid = field.grid();
    let clipped = !grid.window.contains_disk(x, r);
    let (i0, i1, j0, j1) = grid.disk_bbox(x, r);
    let i0 = i0.max(0);
    let j0 = j0.max(0);
    let i1 = i1.min(grid.width as i64 - 1);
    let j1 = j1.min(grid.height as i64 - 1);
    let mut best = 0.0f64;
    let dx = grid.dx();
    for j in j0..=j1 {
        for i in i0..=i1 {
            let y = grid.center(i as usize, j as usize);
            let slack = r - (y - x).norm();
            if slack <= best {
                continue;
            }
            let sq = field.sq_cells(i as usize, j as usize);
            let d = if sq.is_infinite() {
                f64::INFINITY
            } else {
                sq.sqrt() * dx
            };
            best = best.max(d.min(slack));
        }
    }
    Ok(Clipped {
        value: best,
        clipped,
    })
}

/// Area fraction of `D(x, r)` covered by inside cells.
///
/// Cells wholly inside the disk count fully, cells straddling its boundary
/// are weighted by a 4x4 subsample of the disk indicator. Cells beyond the
/// window count as outside `K` but still contribute disk area.
pub fn density(x: Complex64, r: f64, raster: &KRaster) -> Result<Clipped> {
    let grid = raster.grid();
    if !(r > 0.0) {
        return Err(Error::domain(format!(
            "density radius {r} must be positive"
        )));
    }
    if r < grid.cell_size() {
        return Err(Error::Resolution(format!(
            "radius {r:e} smaller than one cell ({:e})",
            grid.cell_size()
        )));
    }
    let clipped = !grid.window.contains_disk(x, r);
    let (dx, dy) = (grid.dx(), grid.dy());
    let (hx, hy) = (dx / 2.0, dy / 2.0);
    let r2 = r * r;
    let (i0, i1, j0, j1) = grid.disk_bbox(x, r);
    let mut area = 0.0;
    let mut covered = 0.0;
    for j in j0..=j1 {
        for i in i0..=i1 {
            let c = grid.center_signed(i, j);
            let (ax, ay) = ((c.re - x.re).abs(), (c.im - x.im).abs());
            let far = (ax + hx).powi(2) + (ay + hy).powi(2);
            let near = (ax - hx).max(0.0).powi(2) + (ay - hy).max(0.0).powi(2);
            let weight = if far <= r2 {
                1.0
            } else if near >= r2 {
                continue;
            } else {
                let mut hits = 0usize;
                for sj in 0..SUBSAMPLES {
                    let py = c.im - hy + (sj as f64 + 0.5) * dy / SUBSAMPLES as f64;
                    for si in 0..SUBSAMPLES {
                        let px = c.re - hx + (si as f64 + 0.5) * dx / SUBSAMPLES as f64;
                        if (px - x.re).powi(2) + (py - x.im).powi(2) < r2 {
                            hits += 1;
                        }
                    }
                }
                hits as f64 / (SUBSAMPLES * SUBSAMPLES) as f64
            };
            area += weight;
            if raster.is_inside_signed(i, j) {
                covered += weight;
            }
        }
    }
    let value = if area > 0.0 {
        (covered / area).clamp(0.0, 1.0)
    } else {
        0.0
    };
    Ok(Clipped { value, clipped })
}

/// `δ_x(r)/r` and `dens(K/D(x,r))` over a decreasing radius schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeepnessProfile {
    pub center: Complex64,
    pub radii: Vec<f64>,
    pub delta_over_r: Vec<f64>,
    pub density: Vec<f64>,
    pub clipped: bool,
}

impl DeepnessProfile {
    /// True when density never drops as the radius decreases.
    pub fn density_nondecreasing(&self) -> bool {
        self.density.windows(2).all(|w| w[1] >= w[0])
    }

    /// True when `δ/r` never grows as the radius decreases.
    pub fn delta_ratio_nonincreasing(&self) -> bool {
        self.delta_over_r.windows(2).all(|w| w[1] <= w[0])
    }
}

pub fn deepness_profile(
    x: Complex64,
    radii: &[f64],
    raster: &KRaster,
    field: &DistanceField,
) -> Result<DeepnessProfile> {
    if radii.is_empty() {
        return Err(Error::domain("empty radius schedule"));
    }
    if radii.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::domain("radii must be strictly decreasing"));
    }
    let cell = raster.grid().cell_size();
    if let Some(&r) = radii.iter().find(|&&r| r < 2.0 * cell) {
        return Err(Error::Resolution(format!(
            "radius {r:e} below two cells ({:e})",
            2.0 * cell
        )));
    }
    let mut delta_over_r = Vec::with_capacity(radii.len());
    let mut dens = Vec::with_capacity(radii.len());
    let mut clipped = false;
    for &r in radii {
        let d = delta(x, r, field)?;
        let m = density(x, r, raster)?;
        clipped |= d.clipped || m.clipped;
        delta_over_r.push((d.value / r).clamp(0.0, 1.0));
        dens.push(m.value);
    }
    Ok(DeepnessProfile {
        center: x,
        radii: radii.to_vec(),
        delta_over_r,
        density: dens,
        clipped,
    })
}

/// Least-squares fit of `1 - dens ≈ C r^α` in log–log space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    #[serde(rename = "C")]
    pub c: f64,
    pub alpha: f64,
    /// RMS residual of `log(1 - dens)`.
    pub residual: f64,
    pub points_used: usize,
}

pub fn fit_power_law<'a>(
    profiles: impl IntoIterator<Item = &'a DeepnessProfile>,
) -> Result<PowerLawFit> {
    let pts: Vec<(f64, f64)> = profiles
        .into_iter()
        .flat_map(|p| p.radii.iter().zip(&p.density))
        .filter(|(_, &d)| 1.0 - d >= FIT_FLOOR)
        .map(|(&r, &d)| (r.ln(), (1.0 - d).ln()))
        .collect();
    fit_log_linear(&pts)
}

fn fit_log_linear(pts: &[(f64, f64)]) -> Result<PowerLawFit> {
    let n = pts.len();
    if n < 2 {
        return Err(Error::Fit(format!("{n} usable points, need at least 2")));
    }
    let nf = n as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if !(sxx > 0.0) {
        return Err(Error::Fit("all usable points share one radius".into()));
    }
    let alpha = sxy / sxx;
    let intercept = my - alpha * mx;
    let residual = (pts
        .iter()
        .map(|p| (p.1 - intercept - alpha * p.0).powi(2))
        .sum::<f64>()
        / nf)
        .sqrt();
    Ok(PowerLawFit {
        c: intercept.exp(),
        alpha,
        residual,
        points_used: n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::Exec;
    use crate::raster::distance::distance_transform;
    use crate::raster::kraster::{Grid, Window};

    fn square(n: usize, half: f64) -> Grid {
        Grid::new(Window::new(-half, half, -half, half).unwrap(), n, n).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn delta_empty_set_is_r() {
        let g = square(200, 2.0);
        let k = KRaster::from_predicate(g, |_| false);
        let f = distance_transform(&k, Exec::default());
        let d = delta(c(0.0, 0.0), 0.5, &f).unwrap();
        assert!((d.value - 0.5).abs() <= g.cell_size());
        assert!(!d.clipped);
    }

    #[test]
    fn delta_inside_disk_is_zero() {
        let g = square(200, 2.0);
        let k = KRaster::from_predicate(g, |z| z.norm() <= 1.5);
        let f = distance_transform(&k, Exec::default());
        assert_eq!(delta(c(0.1, 0.2), 0.5, &f).unwrap().value, 0.0);
    }

    #[test]
    fn delta_half_plane_is_half_r() {
        let g = square(400, 2.0);
        let k = KRaster::from_predicate(g, |z| z.re < 0.0);
        let f = distance_transform(&k, Exec::default());
        let r = 1.0;
        let d = delta(c(0.0, 0.0), r, &f).unwrap();
        assert!((d.value - r / 2.0).abs() <= g.cell_size(), "{}", d.value);
    }

    #[test]
    fn delta_rejects_nonpositive_radius() {
        let g = square(10, 1.0);
        let f = distance_transform(&KRaster::from_predicate(g, |_| true), Exec::default());
        assert!(delta(c(0.0, 0.0), 0.0, &f).is_err());
    }

    #[test]
    fn delta_flags_window_clipping() {
        let g = square(50, 1.0);
        let f = distance_transform(&KRaster::from_predicate(g, |_| false), Exec::default());
        assert!(delta(c(0.9, 0.0), 0.5, &f).unwrap().clipped);
    }

    #[test]
    fn density_examples() {
        let g = square(512, 2.0);
        let disk = KRaster::from_predicate(g, |z| z.norm() <= 1.0);
        let d = density(c(0.0, 0.0), 2.0, &disk).unwrap();
        assert!((d.value - 0.25).abs() < 0.01, "{}", d.value);
        assert_eq!(density(c(0.0, 0.0), 0.3, &disk).unwrap().value, 1.0);

        let half = KRaster::from_predicate(g, |z| z.re < 0.0);
        let d = density(c(0.0, 0.0), 1.0, &half).unwrap();
        assert!((d.value - 0.5).abs() < 0.01, "{}", d.value);
    }

    #[test]
    fn density_needs_a_cell() {
        let g = square(10, 1.0);
        let k = KRaster::from_predicate(g, |_| true);
        assert!(matches!(
            density(c(0.0, 0.0), 0.1, &k),
            Err(Error::Resolution(_))
        ));
    }

    #[test]
    fn profile_empty_and_interior() {
        let g = square(256, 2.0);
        let radii = [0.5, 0.25, 0.125];
        let empty = KRaster::from_predicate(g, |_| false);
        let f = distance_transform(&empty, Exec::default());
        let p = deepness_profile(c(0.0, 0.0), &radii, &empty, &f).unwrap();
        for (r, q) in radii.iter().zip(&p.delta_over_r) {
            assert!((q - 1.0).abs() <= g.cell_size() / r);
        }
        assert!(p.density.iter().all(|&d| d == 0.0));

        let full = KRaster::from_predicate(g, |z| z.norm() < 1.9);
        let f = distance_transform(&full, Exec::default());
        let p = deepness_profile(c(0.0, 0.0), &radii, &full, &f).unwrap();
        assert!(p.delta_over_r.iter().all(|&d| d == 0.0));
        assert!(p.density.iter().all(|&d| d == 1.0));
        assert!(p.density_nondecreasing() && p.delta_ratio_nonincreasing());
    }

    #[test]
    fn profile_rejects_bad_schedule() {
        let g = square(64, 1.0);
        let k = KRaster::from_predicate(g, |_| true);
        let f = distance_transform(&k, Exec::default());
        assert!(deepness_profile(c(0.0, 0.0), &[0.1, 0.2], &k, &f).is_err());
        assert!(matches!(
            deepness_profile(c(0.0, 0.0), &[0.5, 0.02], &k, &f),
            Err(Error::Resolution(_))
        ));
    }

    fn synthetic(radii: &[f64], dens: impl Fn(f64) -> f64) -> DeepnessProfile {
        DeepnessProfile {
            center: c(0.0, 0.0),
            radii: radii.to_vec(),
            delta_over_r: vec![0.0; radii.len()],
            density: radii.iter().map(|&r| dens(r)).collect(),
            clipped: false,
        }
    }

    #[test]
    fn fit_recovers_generator() {
        let radii: Vec<f64> = (0..8).map(|j| 0.2 * 0.5f64.powi(j)).collect();
        let p = synthetic(&radii, |r| 1.0 - 0.5 * r.powf(0.7));
        let fit = fit_power_law([&p]).unwrap();
        assert!((fit.c - 0.5).abs() < 1e-9);
        assert!((fit.alpha - 0.7).abs() < 1e-9);
        assert!(fit.residual < 1e-9);
        assert_eq!(fit.points_used, 8);
    }

    #[test]
    fn fit_two_points_interpolates() {
        let p = synthetic(&[0.2, 0.05], |r| if r > 0.1 { 0.6 } else { 0.9 });
        let fit = fit_power_law([&p]).unwrap();
        assert!(fit.residual < 1e-12);
        let pred = |r: f64| 1.0 - fit.c * r.powf(fit.alpha);
        assert!((pred(0.2) - 0.6).abs() < 1e-12 && (pred(0.05) - 0.9).abs() < 1e-12);
    }

    #[test]
    fn fit_without_usable_points_fails() {
        let p = synthetic(&[0.2, 0.1, 0.05], |_| 1.0);
        assert!(matches!(fit_power_law([&p]), Err(Error::Fit(_))));
    }
}
