//! Fading statistics: spatial correlation, frequency correlation and the
//! frequency-dependent Rician K-factor.

pub mod frequency;
pub mod kfactor;
pub mod spatial;

pub use frequency::{
    generate_scattered_field, jakes_entry, jakes_matrix, BlockFactors, FreqCorrGenerator,
    ScatteredFieldStream,
};
pub use kfactor::{draw_k, k_mean_db, k_var_db, KFactorModel};
pub use spatial::{asd_schedule, spatial_correlation_entry, SpatialCorrModel};
