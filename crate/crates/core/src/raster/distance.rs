//! Exact Euclidean distance transform (Felzenszwalb–Huttenlocher lower
//! envelope of parabolas, one pass per axis).

use super::kraster::{Grid, KRaster};
use crate::exec::Exec;

/// Per-cell distance from the cell center to the nearest inside cell
/// center.
///
/// Squared distances are stored in units of `dx²`, so on square cells they
/// are exact integers. A raster with no inside cell yields `+inf`
/// everywhere.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceField {
    grid: Grid,
    sq: Vec<f64>,
}

impl DistanceField {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Squared distance in squared x-cell units.
    #[inline]
    pub fn sq_cells(&self, i: usize, j: usize) -> f64 {
        self.sq[self.grid.index(i, j)]
    }

    pub fn sq_cells_all(&self) -> &[f64] {
        &self.sq
    }

    /// Distance in complex-plane units.
    #[inline]
    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.sq_cells(i, j).sqrt() * self.grid.dx()
    }

    pub fn is_empty_set(&self) -> bool {
        self.sq.first().is_some_and(|v| v.is_infinite())
    }
}

/// One-dimensional squared distance transform of `f` with weight `w`:
/// `out[p] = min_q w (p - q)² + f[q]`.
fn envelope_1d(f: &[f64], w: f64, out: &mut [f64], v: &mut Vec<usize>, z: &mut Vec<f64>) {
    let n = f.len();
    v.clear();
    z.clear();
    for q in 0..n {
        if !f[q].is_finite() {
            continue;
        }
        let fq = f[q] + w * (q * q) as f64;
        loop {
            match v.last() {
                None => {
                    v.push(q);
                    z.push(f64::NEG_INFINITY);
                    break;
                }
                Some(&r) => {
                    let fr = f[r] + w * (r * r) as f64;
                    let s = (fq - fr) / (2.0 * w * (q - r) as f64);
                    if s <= *z.last().unwrap() {
                        v.pop();
                        z.pop();
                    } else {
                        v.push(q);
                        z.push(s);
                        break;
                    }
                }
            }
        }
    }
    if v.is_empty() {
        out.iter_mut().for_each(|o| *o = f64::INFINITY);
        return;
    }
    let mut k = 0;
    for (p, o) in out.iter_mut().enumerate() {
        while k + 1 < v.len() && z[k + 1] < p as f64 {
            k += 1;
        }
        let d = p as f64 - v[k] as f64;
        *o = w * d * d + f[v[k]];
    }
}

/// Exact Euclidean distance transform of the inside mask.
pub fn distance_transform(raster: &KRaster, exec: Exec) -> DistanceField {
    let grid = *raster.grid();
    let (w, h) = (grid.width, grid.height);
    let wy = {
        let r = grid.dy() / grid.dx();
        // keep integer arithmetic exact on square cells
        if (r - 1.0).abs() < 1e-12 {
            1.0
        } else {
            r * r
        }
    };

    let mut rows = vec![0.0f64; grid.len()];
    let mask = raster.mask();
    exec.for_each_chunk(&mut rows, w, |j, row| {
        let src: Vec<f64> = mask[j * w..(j + 1) * w]
            .iter()
            .map(|&b| if b { 0.0 } else { f64::INFINITY })
            .collect();
        let (mut v, mut z) = (Vec::with_capacity(w), Vec::with_capacity(w + 1));
        envelope_1d(&src, 1.0, row, &mut v, &mut z);
    });

    let columns: Vec<Vec<f64>> = exec.map_range(w, |i| {
        let col: Vec<f64> = (0..h).map(|j| rows[j * w + i]).collect();
        let mut out = vec![0.0; h];
        let (mut v, mut z) = (Vec::with_capacity(h), Vec::with_capacity(h + 1));
        envelope_1d(&col, wy, &mut out, &mut v, &mut z);
        out
    });
    drop(rows);

    let mut sq = vec![0.0f64; grid.len()];
    exec.for_each_chunk(&mut sq, w, |j, row| {
        for (i, cell) in row.iter_mut().enumerate() {
            *cell = columns[i][j];
        }
    });
    DistanceField { grid, sq }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::kraster::Window;
    use proptest::prelude::*;

    fn grid(w: usize, h: usize) -> Grid {
        Grid::new(Window::new(0.0, w as f64, 0.0, h as f64).unwrap(), w, h).unwrap()
    }

    fn brute(mask: &[bool], w: usize, h: usize) -> Vec<f64> {
        let inside: Vec<(i64, i64)> = (0..h)
            .flat_map(|j| (0..w).map(move |i| (i, j)))
            .filter(|&(i, j)| mask[j * w + i])
            .map(|(i, j)| (i as i64, j as i64))
            .collect();
        (0..h)
            .flat_map(|j| (0..w).map(move |i| (i as i64, j as i64)))
            .map(|(i, j)| {
                inside
                    .iter()
                    .map(|&(a, b)| ((a - i) * (a - i) + (b - j) * (b - j)) as f64)
                    .fold(f64::INFINITY, f64::min)
            })
            .collect()
    }

    #[test]
    fn three_four_five() {
        let g = Grid::new(Window::new(0.0, 2.0, 0.0, 2.0).unwrap(), 20, 20).unwrap();
        let mut mask = vec![false; 400];
        mask[g.index(2, 3)] = true;
        let k = KRaster::from_mask(g, mask, 0, 0.0).unwrap();
        let d = distance_transform(&k, Exec::default());
        assert_eq!(d.sq_cells(5, 7), 25.0);
        assert!((d.distance(5, 7) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn full_and_empty_masks() {
        let g = grid(9, 5);
        let full = KRaster::from_mask(g, vec![true; 45], 0, 0.0).unwrap();
        assert!(distance_transform(&full, Exec::default())
            .sq_cells_all()
            .iter()
            .all(|&v| v == 0.0));
        let empty = KRaster::from_mask(g, vec![false; 45], 0, 0.0).unwrap();
        let d = distance_transform(&empty, Exec::default());
        assert!(d.sq_cells_all().iter().all(|v| v.is_infinite()));
        assert!(d.is_empty_set());
    }

    #[test]
    fn anisotropic_cells() {
        let g = Grid::new(Window::new(0.0, 4.0, 0.0, 6.0).unwrap(), 4, 3).unwrap(); // dx=1, dy=2
        let mut mask = vec![false; 12];
        mask[g.index(0, 0)] = true;
        let k = KRaster::from_mask(g, mask, 0, 0.0).unwrap();
        let d = distance_transform(&k, Exec::Sequential);
        assert!((d.distance(3, 2) - (9.0f64 + 16.0).sqrt()).abs() < 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn equals_brute_force(w in 1usize..24, h in 1usize..24, seed in any::<u64>(), density in 0.0f64..0.3) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mask: Vec<bool> = (0..w * h).map(|_| rng.gen_bool(density)).collect();
            let k = KRaster::from_mask(grid(w, h), mask.clone(), 0, 0.0).unwrap();
            let d = distance_transform(&k, Exec::default());
            prop_assert_eq!(d.sq_cells_all(), &brute(&mask, w, h)[..]);
        }

        #[test]
        fn lipschitz_in_cell_metric(seed in any::<u64>()) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let (w, h) = (20, 17);
            let mask: Vec<bool> = (0..w * h).map(|_| rng.gen_bool(0.05)).collect();
            let k = KRaster::from_mask(grid(w, h), mask.clone(), 0, 0.0).unwrap();
            let d = distance_transform(&k, Exec::default());
            for j in 0..h {
                for i in 0..w {
                    prop_assert_eq!(d.sq_cells(i, j) == 0.0, mask[j * w + i]);
                    if i + 1 < w && d.sq_cells(i, j).is_finite() {
                        prop_assert!((d.distance(i, j) - d.distance(i + 1, j)).abs() <= 1.0 + 1e-12);
                    }
                }
            }
        }
    }
}
