//! Lifting half-lines through the inverse branches of `fⁿ`.

mod enumerate;
mod lift;

pub use enumerate::{
    branch_separation_experiment, enumerate_lifts, min_pair_distance, write_svg, BranchSelector,
    LiftSet, Separation, DISTINCT_TOL, LIFT_SCHEMA, MAX_LIFT_DEPTH,
};
pub use lift::{
    lift_ray, theta_admissible, LiftedRay, ObstructionHit, ObstructionSet, Ray, Termination,
    DEFAULT_R_MAX,
};
