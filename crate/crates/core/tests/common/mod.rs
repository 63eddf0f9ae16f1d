//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use num_complex::Complex64;

/// `fⁿ(z) - z₀` for `f(z) = z² + c` and its derivative, by composition.
fn eval(c: Complex64, n: usize, z0: Complex64, z: Complex64) -> (Complex64, Complex64) {
    let (mut w, mut dw) = (z, Complex64::new(1.0, 0.0));
    for _ in 0..n {
        dw = 2.0 * w * dw;
        w = w * w + c;
    }
    (w - z0, dw)
}

/// All `2ⁿ` roots of `fⁿ(z) = z₀` for `f(z) = z² + c`, by Aberth-Ehrlich
/// iteration followed by Newton polishing.
pub fn iterate_roots(c: Complex64, n: usize, z0: Complex64) -> Vec<Complex64> {
    let d = 1usize << n;
    let radius = 1.0 + (2.0 + c.norm() + z0.norm()).sqrt();
    let mut z: Vec<Complex64> = (0..d)
        .map(|k| {
            Complex64::from_polar(
                radius,
                std::f64::consts::TAU * (k as f64 + 0.25) / d as f64 + 0.4,
            )
        })
        .collect();
    for _ in 0..500 {
        let mut worst: f64 = 0.0;
        for i in 0..d {
            let (p, dp) = eval(c, n, z0, z[i]);
            let ratio = p / dp;
            let s: Complex64 = (0..d)
                .filter(|&j| j != i)
                .map(|j| 1.0 / (z[i] - z[j]))
                .sum();
            let step = ratio / (1.0 - ratio * s);
            z[i] -= step;
            worst = worst.max(step.norm() / (1.0 + z[i].norm()));
        }
        if worst < 1e-15 {
            break;
        }
    }
    for zi in z.iter_mut() {
        for _ in 0..3 {
            let (p, dp) = eval(c, n, z0, *zi);
            *zi -= p / dp;
        }
    }
    z
}

/// Largest distance from a point of `a` to its nearest point of `b`, in
/// both directions.
pub fn hausdorff(a: &[Complex64], b: &[Complex64]) -> f64 {
    let one = |x: &[Complex64], y: &[Complex64]| {
        x.iter()
            .map(|p| {
                y.iter()
                    .map(|q| (p - q).norm())
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max)
    };
    one(a, b).max(one(b, a))
}

/// Brute-force squared distance (in cell units) from each cell center to the
/// nearest inside cell.
pub fn brute_force_edt(mask: &[bool], w: usize, h: usize) -> Vec<f64> {
    let inside: Vec<(i64, i64)> = (0..w * h)
        .filter(|&k| mask[k])
        .map(|k| ((k % w) as i64, (k / w) as i64))
        .collect();
    (0..w * h)
        .map(|k| {
            let (x, y) = ((k % w) as i64, (k / w) as i64);
            inside
                .iter()
                .map(|&(a, b)| ((a - x).pow(2) + (b - y).pow(2)) as f64)
                .fold(f64::INFINITY, f64::min)
        })
        .collect()
}
