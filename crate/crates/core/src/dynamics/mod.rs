//! Quadratic maps, rotation numbers, orbits, derivatives and inverse
//! branches.
//!
//! Everything here is double precision. Values are immutable once built and
//! can be shared freely between worker threads.

mod branch;
mod cloud;
mod map;
mod rotation;

pub use branch::{Branch, BranchWord};
pub use cloud::{Nearest, PointCloud};
pub use map::{
    derivative_chain, step_residual, ForwardOrbit, InversePair, MapForm, QuadraticMap,
    CONSISTENCY_TOL, DEFAULT_ESCAPE_RADIUS,
};
pub use rotation::{
    cf_expand, cf_value, convergents, is_bounded_type, CfExpansion, RotationNumber,
};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// The forward critical orbit `{fᵏ(c₀) : 1 <= k <= n}` as a point cloud.
///
/// Exact repeats are dropped, so a periodic critical orbit yields its cycle.
/// For the Siegel form the critical orbit lies in the closed Siegel disk, so
/// escape before `n` steps is reported as an internal error; for the
/// centered form the cloud is simply truncated at escape.
pub fn postcritical_cloud(f: &QuadraticMap, n: usize) -> Result<PointCloud> {
    if n == 0 {
        return Err(Error::domain("postcritical cloud needs n >= 1"));
    }
    let orbit = f.forward_orbit(f.critical_point(), n, DEFAULT_ESCAPE_RADIUS);
    if orbit.escaped && f.is_siegel() {
        return Err(Error::Internal(format!(
            "Siegel critical orbit escaped after {} steps",
            orbit.points.len() - 1
        )));
    }
    let mut seen = std::collections::HashSet::new();
    let pts: Vec<Complex64> = orbit.points[1..]
        .iter()
        .take_while(|z| z.norm() <= DEFAULT_ESCAPE_RADIUS)
        .copied()
        .filter(|z| seen.insert((z.re.to_bits(), z.im.to_bits())))
        .collect();
    Ok(PointCloud::new(pts))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basilica_cloud_collapses_to_cycle() {
        let cloud = postcritical_cloud(&QuadraticMap::centered_real(-1.0), 6).unwrap();
        assert_eq!(
            cloud.points(),
            &[Complex64::new(-1.0, 0.0), Complex64::new(0.0, 0.0)]
        );
    }

    #[test]
    fn superattracting_cloud_is_origin() {
        let cloud = postcritical_cloud(&QuadraticMap::centered_real(0.0), 10).unwrap();
        assert_eq!(cloud.points(), &[Complex64::new(0.0, 0.0)]);
    }

    #[test]
    fn golden_siegel_cloud_is_bounded() {
        let cloud = postcritical_cloud(&QuadraticMap::siegel_golden(), 10_000).unwrap();
        assert_eq!(cloud.len(), 10_000);
        assert!(cloud.points().iter().all(|z| z.norm() <= 2.0));
    }

    #[test]
    fn zero_length_cloud_is_rejected() {
        assert!(postcritical_cloud(&QuadraticMap::centered_real(0.0), 0).is_err());
    }
}
