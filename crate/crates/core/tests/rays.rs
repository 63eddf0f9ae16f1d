mod common;

use nexlab::dynamics::{BranchWord, QuadraticMap};
use nexlab::rays::*;
use nexlab::Exec;
use num_complex::Complex64;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[test]
fn start_vertices_match_root_oracle() {
    for (cc, z0, theta) in [(0.0, 4.0, 0.0), (-1.0, 1.0, 0.0), (-1.0, 1.0, 0.9)] {
        let f = QuadraticMap::centered_real(cc);
        let ray = Ray::new(c(z0, 0.0), theta).unwrap();
        for n in 1..=6 {
            let set = enumerate_lifts(&f, &ray, n, 1e-9, Exec::default()).unwrap();
            let starts: Vec<_> = set.lifts.iter().map(LiftedRay::start).collect();
            let roots = common::iterate_roots(c(cc, 0.0), n, c(z0, 0.0));
            assert!(common::hausdorff(&starts, &roots) < 1e-8, "c={cc} n={n}");
        }
    }
}

#[test]
fn marker_selection_separates_basilica_rays() {
    let f = QuadraticMap::centered_real(-1.0);
    let a = Ray::new(c(1.0, 0.0), 0.3).unwrap();
    let b = Ray::new(c(1.0, 0.0), -0.3).unwrap();
    let sel = BranchSelector::NearestToMarker {
        marker: c(0.6, 0.5),
    };
    let out = branch_separation_experiment(&f, &a, &b, 10, 1e-9, &sel, Exec::default()).unwrap();
    let Separation::Separated {
        depth,
        first,
        second,
    } = out
    else {
        panic!("{out:?}")
    };
    assert!(depth <= 10);
    // oracle: both designated vertices are depth-n preimages of z0
    let roots = common::iterate_roots(c(-1.0, 0.0), depth, c(1.0, 0.0));
    for v in [first, second] {
        assert!(roots.iter().any(|r| (r - v).norm() < 1e-8));
    }
}

#[test]
fn lift_json_roundtrip() {
    let f = QuadraticMap::centered_real(-1.0);
    let ray = Ray::new(c(1.0, 0.0), 0.0).unwrap();
    let set = enumerate_lifts(&f, &ray, 4, 1e-9, Exec::default()).unwrap();
    let text = serde_json::to_string(&set).unwrap();
    let back: LiftSet = serde_json::from_str(&text).unwrap();
    assert_eq!(back, set);
    assert_eq!(back.lifts[3].word, BranchWord::from_index(3, 4));
}
