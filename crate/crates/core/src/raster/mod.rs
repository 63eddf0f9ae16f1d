//! Grid approximations of filled Julia sets, exact distance transforms, and
//! the empty-disk and density functionals built on them.

mod deepness;
mod distance;
mod io;
mod kraster;

pub use deepness::{
    deepness_profile, delta, density, fit_power_law, Clipped, DeepnessProfile, PowerLawFit,
    FIT_FLOOR,
};
pub use distance::{distance_transform, DistanceField};
pub use io::{read_nexr, read_nexr_file, write_nexr, write_nexr_file, write_pgm, NEXR_MAGIC};
pub use kraster::{fill_raster, fill_raster_with, Grid, KRaster, Membership, Window};
