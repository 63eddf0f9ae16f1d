use num_complex::Complex64;

/// A finite point set with a uniform-grid index for nearest-neighbour
/// queries.
#[derive(Debug, Clone)]
pub struct PointCloud {
    points: Vec<Complex64>,
    grid: Option<Grid>,
}

#[derive(Debug, Clone)]
struct Grid {
    origin: Complex64,
    cell: f64,
    nx: usize,
    ny: usize,
    /// start offsets into `order` per cell, length nx*ny + 1
    starts: Vec<usize>,
    order: Vec<u32>,
}

/// Result of a nearest-neighbour query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Nearest {
    pub index: usize,
    pub point: Complex64,
    pub distance: f64,
}

impl PointCloud {
    pub fn new(points: Vec<Complex64>) -> Self {
        let grid = Grid::build(&points);
        PointCloud { points, grid }
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Nearest cloud point to `z`, `None` for an empty cloud.
    pub fn nearest(&self, z: Complex64) -> Option<Nearest> {
        let grid = self.grid.as_ref()?;
        Some(grid.nearest(&self.points, z))
    }

    /// Distance from `z` to the cloud (`+inf` when empty).
    pub fn distance(&self, z: Complex64) -> f64 {
        self.nearest(z).map_or(f64::INFINITY, |n| n.distance)
    }

    /// Linear scan, kept for cross-checking the grid.
    pub fn nearest_brute_force(&self, z: Complex64) -> Option<Nearest> {
        self.points
            .iter()
            .enumerate()
            .map(|(index, &point)| Nearest {
                index,
                point,
                distance: (point - z).norm(),
            })
            .min_by(|a, b| a.distance.total_cmp(&b.distance))
    }
}

impl Grid {
    fn build(points: &[Complex64]) -> Option<Grid> {
        if points.is_empty() {
            return None;
        }
        let (mut lo_re, mut lo_im) = (f64::INFINITY, f64::INFINITY);
        let (mut hi_re, mut hi_im) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in points {
            lo_re = lo_re.min(p.re);
            lo_im = lo_im.min(p.im);
            hi_re = hi_re.max(p.re);
            hi_im = hi_im.max(p.im);
        }
        let w = (hi_re - lo_re).max(1e-300);
        let h = (hi_im - lo_im).max(1e-300);
        // about two points per cell; the second term keeps collinear clouds sane
        let target_cells = (points.len() as f64 / 2.0).max(1.0);
        let cell = (w * h / target_cells).sqrt().max(w.max(h) / target_cells);
        let nx = ((w / cell).floor() as usize + 1).clamp(1, 1 << 14);
        let ny = ((h / cell).floor() as usize + 1).clamp(1, 1 << 14);
        let cell = (w / nx as f64).max(h / ny as f64).max(cell);
        let origin = Complex64::new(lo_re, lo_im);

        let mut counts = vec![0usize; nx * ny + 1];
        let cell_of = |p: &Complex64| -> usize {
            let i = (((p.re - origin.re) / cell) as usize).min(nx - 1);
            let j = (((p.im - origin.im) / cell) as usize).min(ny - 1);
            j * nx + i
        };
        for p in points {
            counts[cell_of(p) + 1] += 1;
        }
        for k in 1..counts.len() {
            counts[k] += counts[k - 1];
        }
        let starts = counts.clone();
        let mut fill = counts;
        let mut order = vec![0u32; points.len()];
        for (idx, p) in points.iter().enumerate() {
            let c = cell_of(p);
            order[fill[c]] = idx as u32;
            fill[c] += 1;
        }
        Some(Grid {
            origin,
            cell,
            nx,
            ny,
            starts,
            order,
        })
    }

    fn nearest(&self, points: &[Complex64], z: Complex64) -> Nearest {
        let fi = ((z.re - self.origin.re) / self.cell).floor();
        let fj = ((z.im - self.origin.im) / self.cell).floor();
        let ci = fi.clamp(0.0, (self.nx - 1) as f64) as i64;
        let cj = fj.clamp(0.0, (self.ny - 1) as f64) as i64;
        let mut best = Nearest {
            index: usize::MAX,
            point: z,
            distance: f64::INFINITY,
        };
        let max_ring = self.nx.max(self.ny) as i64;
        for ring in 0..=max_ring {
            // any point in ring r is at least (r-1) cells away from z
            if best.distance.is_finite() && best.distance <= (ring - 1).max(0) as f64 * self.cell {
                break;
            }
            self.visit_ring(ci, cj, ring, |k| {
                let idx = self.order[k] as usize;
                let d = (points[idx] - z).norm();
                if d < best.distance || (d == best.distance && idx < best.index) {
                    best = Nearest {
                        index: idx,
                        point: points[idx],
                        distance: d,
                    };
                }
            });
        }
        best
    }

    fn visit_ring(&self, ci: i64, cj: i64, ring: i64, mut visit: impl FnMut(usize)) {
        let (nx, ny) = (self.nx as i64, self.ny as i64);
        let mut cell = |i: i64, j: i64| {
            if i < 0 || j < 0 || i >= nx || j >= ny {
                return;
            }
            let c = (j * nx + i) as usize;
            for k in self.starts[c]..self.starts[c + 1] {
                visit(k);
            }
        };
        if ring == 0 {
            cell(ci, cj);
            return;
        }
        for i in (ci - ring)..=(ci + ring) {
            cell(i, cj - ring);
            cell(i, cj + ring);
        }
        for j in (cj - ring + 1)..=(cj + ring - 1) {
            cell(ci - ring, j);
            cell(ci + ring, j);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn empty_cloud_has_no_nearest() {
        let c = PointCloud::new(vec![]);
        assert!(c.nearest(Complex64::new(0.0, 0.0)).is_none());
        assert_eq!(c.distance(Complex64::new(0.0, 0.0)), f64::INFINITY);
    }

    #[test]
    fn single_point() {
        let c = PointCloud::new(vec![Complex64::new(1.0, 1.0)]);
        let n = c.nearest(Complex64::new(4.0, 5.0)).unwrap();
        assert_eq!(n.index, 0);
        assert!((n.distance - 5.0).abs() < 1e-15);
    }

    #[test]
    fn matches_brute_force_on_curve_cloud() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let pts: Vec<_> = (0..1000)
            .map(|k| {
                let t = k as f64 * 0.618_033_988_75 * std::f64::consts::TAU;
                Complex64::from_polar(0.5 + 0.1 * (3.0 * t).cos(), t)
            })
            .collect();
        let cloud = PointCloud::new(pts);
        for _ in 0..2000 {
            let z = Complex64::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
            let a = cloud.nearest(z).unwrap();
            let b = cloud.nearest_brute_force(z).unwrap();
            assert_eq!(a.distance, b.distance);
        }
    }

    proptest! {
        #[test]
        fn grid_equals_brute_force(
            pts in prop::collection::vec((-2.0f64..2.0, -1.0f64..1.0), 1..400),
            q in (-6.0f64..6.0, -6.0f64..6.0),
        ) {
            let cloud = PointCloud::new(pts.iter().map(|&(a, b)| Complex64::new(a, b)).collect());
            let z = Complex64::new(q.0, q.1);
            let a = cloud.nearest(z).unwrap();
            let b = cloud.nearest_brute_force(z).unwrap();
            prop_assert_eq!(a.distance, b.distance);
        }
    }
}
