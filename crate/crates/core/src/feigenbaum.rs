//! Superstable parameters of the real period-doubling cascade of
//! `z² + c` and the extrapolated Feigenbaum parameter.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Superstability residual tolerance `|f_c^{2^k}(0)|`. Deep in the cascade
/// rounding in the iteration itself exceeds this, so the check uses the
/// larger of this and the running forward error bound of the evaluation.
pub const SUPERSTABLE_TOL: f64 = 1e-12;

/// Approximate Feigenbaum ratio, used only to place bisection brackets.
const DELTA_GUESS: f64 = 4.669;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeigenbaumParameter {
    /// `c_k` for `k = 1..=m`: the parameter whose critical point has
    /// period `2^k`.
    pub superstable: Vec<f64>,
    /// `|f_{c_k}^{2^k}(0)|` at each returned `c_k`.
    pub residuals: Vec<f64>,
    /// Aitken extrapolation from the last three superstable parameters.
    pub limit: f64,
    /// `(c_k - c_{k+1}) / (c_{k+1} - c_{k+2})`.
    pub gap_ratios: Vec<f64>,
}

impl FeigenbaumParameter {
    /// Relative change between the last two gap ratios.
    pub fn last_ratio_change(&self) -> Option<f64> {
        let n = self.gap_ratios.len();
        (n >= 2).then(|| {
            let (a, b) = (self.gap_ratios[n - 2], self.gap_ratios[n - 1]);
            ((b - a) / a).abs()
        })
    }
}

/// `f_c^{n}(0)` on the real line.
pub fn critical_return(c: f64, n: usize) -> f64 {
    (0..n).fold(0.0, |x, _| x * x + c)
}

/// First-order forward error bound for evaluating `f_c^{n}(0)` in double
/// precision: `e' = 2|x| e + ε (|x²| + |x² + c|)`.
pub fn critical_return_error_bound(c: f64, n: usize) -> f64 {
    let (mut x, mut e) = (0.0f64, 0.0f64);
    for _ in 0..n {
        let sq = x * x;
        let next = sq + c;
        e = 2.0 * x.abs() * e + f64::EPSILON * (sq + next.abs());
        x = next;
    }
    e
}

/// Residual tolerance at `c` for period `n`.
pub fn residual_tolerance(c: f64, n: usize) -> f64 {
    SUPERSTABLE_TOL.max(critical_return_error_bound(c, n))
}

/// Bisection for a sign change of `g` on `[lo, hi]`, run until the
/// interval cannot shrink further in double precision.
fn bisect(g: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> Result<f64> {
    let (mut glo, ghi) = (g(lo), g(hi));
    if glo == 0.0 {
        return Ok(lo);
    }
    if ghi == 0.0 {
        return Ok(hi);
    }
    if glo.signum() == ghi.signum() {
        return Err(Error::Derivation(format!("no sign change on [{lo}, {hi}]")));
    }
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo.min(hi) || mid >= lo.max(hi) {
            break;
        }
        let gm = g(mid);
        if gm == 0.0 {
            return Ok(mid);
        }
        if gm.signum() == glo.signum() {
            lo = mid;
            glo = gm;
        } else {
            hi = mid;
        }
    }
    Ok(if g(lo).abs() <= g(hi).abs() { lo } else { hi })
}

/// Derive `c_1, ..., c_m` by bisection on `c ↦ f_c^{2^k}(0)` and
/// extrapolate the accumulation point `c_F`.
pub fn derive_feigenbaum_parameter(m: usize) -> Result<FeigenbaumParameter> {
    if !(2..=14).contains(&m) {
        return Err(Error::domain(format!("cascade depth m={m} outside 2..=14")));
    }
    let mut cs: Vec<f64> = Vec::with_capacity(m);
    let mut residuals = Vec::with_capacity(m);
    for k in 1..=m {
        let period = 1usize << k;
        let g = |c: f64| critical_return(c, period);
        let (lo, hi) = match k {
            1 => (-1.25, -0.75),
            2 => (-1.5, -1.25),
            _ => {
                let (a, b) = (cs[k - 3], cs[k - 2]);
                let gap = (a - b) / DELTA_GUESS;
                (b - 1.6 * gap, b - 0.4 * gap)
            }
        };
        let c = bisect(g, lo, hi)?;
        let res = g(c).abs();
        if !(res <= residual_tolerance(c, period)) {
            return Err(Error::Derivation(format!(
                "c_{k} = {c} leaves superstability residual {res:e}"
            )));
        }
        if let Some(&prev) = cs.last() {
            if !(c < prev) {
                return Err(Error::Derivation(format!(
                    "c_{k} = {c} not below c_{} = {prev}",
                    k - 1
                )));
            }
        }
        cs.push(c);
        residuals.push(res);
    }
    let gap_ratios: Vec<f64> = cs
        .windows(3)
        .map(|w| (w[0] - w[1]) / (w[1] - w[2]))
        .collect();
    let limit = if m >= 3 {
        let (a, b, c) = (cs[m - 3], cs[m - 2], cs[m - 1]);
        let denom = c - 2.0 * b + a;
        if denom != 0.0 {
            c - (c - b).powi(2) / denom
        } else {
            c
        }
    } else {
        cs[m - 1]
    };
    Ok(FeigenbaumParameter {
        superstable: cs,
        residuals,
        limit,
        gap_ratios,
    })
}
