//! Symbol detectors: the Parzen-window classifier and the minimum
//! Euclidean distance baseline, plus decision-region rasterization.
//!
//! Both detectors work on one polarization at a time; a dual-polarization
//! receiver runs two independent instances.

mod med;
mod parzen;
mod regions;

pub use med::{med_classify, MedDetector};
pub use parzen::{
    geometric_grid, interleaved_split, optimize_radius, radius_search, rms_radius, train, validation_errors,
    window_value, ClassScores, PwDetector, RadiusSearch, CLAMP_RATIO, RADIUS_GRID_HI, RADIUS_GRID_LO,
    RADIUS_GRID_STEPS,
};
pub use regions::{rasterize, rasterize_regions, GridSpec, RegionMap};
