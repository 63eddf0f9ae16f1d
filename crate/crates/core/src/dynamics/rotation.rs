use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Remainders below this are treated as zero (rational input).
const TERMINATION_EPS: f64 = 1e-12;

/// Partial quotients of a continued fraction, with a flag telling whether
/// the expansion terminated (the input was rational to double precision)
/// before the requested depth was reached.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CfExpansion {
    pub quotients: Vec<u64>,
    pub terminated: bool,
}

/// Expand `x` in (0,1) as `[0; a1, a2, ...]`, returning up to `depth`
/// partial quotients.
pub fn cf_expand(x: f64, depth: usize) -> Result<CfExpansion> {
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::domain(format!(
            "continued fraction input {x} not in (0,1)"
        )));
    }
    if depth == 0 {
        return Err(Error::domain("continued fraction depth must be positive"));
    }
    let mut quotients = Vec::with_capacity(depth);
    let mut rem = x;
    let mut terminated = false;
    while quotients.len() < depth {
        let inv = 1.0 / rem;
        let mut a = inv.floor();
        let mut frac = inv - a;
        // 1/x landing a hair below an integer
        if 1.0 - frac < TERMINATION_EPS * inv.max(1.0) {
            a += 1.0;
            frac = 0.0;
        }
        quotients.push(a as u64);
        if frac < TERMINATION_EPS * inv.max(1.0) {
            terminated = true;
            break;
        }
        rem = frac;
    }
    Ok(CfExpansion {
        quotients,
        terminated,
    })
}

/// True iff every partial quotient is at most `bound`.
///
/// Only the truncated expansion is inspected, so this is an approximation
/// of the bounded-type property of the underlying irrational.
pub fn is_bounded_type(quotients: &[u64], bound: u64) -> bool {
    quotients.iter().all(|&a| a <= bound)
}

/// Convergents `p_k / q_k` of `[0; a1, ..., an]`, one per quotient.
pub fn convergents(quotients: &[u64]) -> Vec<(f64, f64)> {
    // p_{-1}=1, p_0=0 ; q_{-1}=0, q_0=1
    let (mut p_prev, mut p) = (1.0_f64, 0.0_f64);
    let (mut q_prev, mut q) = (0.0_f64, 1.0_f64);
    quotients
        .iter()
        .map(|&a| {
            let a = a as f64;
            let p_next = a * p + p_prev;
            let q_next = a * q + q_prev;
            p_prev = p;
            p = p_next;
            q_prev = q;
            q = q_next;
            (p, q)
        })
        .collect()
}

/// Evaluate the finite continued fraction `[0; a1, ..., an]`.
pub fn cf_value(quotients: &[u64]) -> f64 {
    quotients
        .iter()
        .rev()
        .fold(0.0, |acc, &a| 1.0 / (a as f64 + acc))
}

/// A rotation number in (0,1) together with its truncated expansion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RotationNumber {
    value: f64,
    expansion: CfExpansion,
    depth: usize,
}

impl RotationNumber {
    pub const DEFAULT_DEPTH: usize = 30;

    pub fn new(value: f64) -> Result<Self> {
        Self::with_depth(value, Self::DEFAULT_DEPTH)
    }

    pub fn with_depth(value: f64, depth: usize) -> Result<Self> {
        let expansion = cf_expand(value, depth)?;
        Ok(RotationNumber {
            value,
            expansion,
            depth,
        })
    }

    /// The golden mean `(sqrt 5 - 1)/2`, all partial quotients 1.
    pub fn golden() -> Self {
        Self::new((5.0_f64.sqrt() - 1.0) / 2.0).expect("golden mean is in (0,1)")
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn quotients(&self) -> &[u64] {
        &self.expansion.quotients
    }

    pub fn terminated(&self) -> bool {
        self.expansion.terminated
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn is_bounded_type(&self, bound: u64) -> bool {
        is_bounded_type(self.quotients(), bound)
    }
}
