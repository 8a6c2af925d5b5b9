//! Model-agnostic pieces: hypotheses, pre-data weightings, densities,
//! weighted samples and the post-data probability arithmetic.

mod density;
mod hypothesis;
mod mc;
mod post;
mod sample;

pub use density::{
    ContinuousDensity, DensityHandle, Mixture, TiltedDensity, TruncatedDensity, UnivariateDensity,
};
pub use hypothesis::{BumpDensity, GpdSpec, IntervalHypothesis, Tau};
pub use mc::McConfig;
pub use post::{
    apply_gpd_weight, apply_gpd_weight_density, mixture_post_density, post_data_probability,
    post_data_probability_ln, Evidence, PostDataResult,
};
pub use sample::WeightedSample;
