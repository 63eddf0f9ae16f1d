//! Backward orbits, pullback tubes and leaf-type diagnostics.

mod leaf;
mod orbit;
mod tube;
mod winding;

pub use leaf::{
    hyperbolic_norm_bounds, leaf_type_report, HyperbolicBound, LeafMetadata, LeafParams,
    LeafRecord, LeafSummary, LeafTypeReport, Witness, LEAF_SCHEMA, PRODUCT_NOTE,
};
pub use orbit::{extend_backward, BackwardOrbit, EscapeTest, Strategy, StrategyTag};
pub use tube::{
    pullback_tube, regularity_probe, PullbackTube, RadiusProbe, RegularityReport, TubeStop,
    TubeSummary, AMBIGUITY_TOL, EVIDENCE_LABEL, MIN_SAMPLES,
};
pub use winding::winding_number;
