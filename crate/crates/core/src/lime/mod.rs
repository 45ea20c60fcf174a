//! Local surrogate explanations for tabular models: quantile discretization,
//! neighbourhood sampling, exponential kernel weighting and a weighted ridge
//! surrogate whose coefficients are the feature contributions.

pub mod discretize;
pub mod explain;
pub mod kernel;
pub mod linalg;
pub mod sample;
pub mod surrogate;

pub use discretize::Discretizer;
pub use explain::{explain_instance, fit_surrogate, LimeConfig, LocalExplanation};
pub use kernel::{default_sigma, kernel_weight};
pub use sample::{sample_neighborhood, Neighborhood, NeighborhoodSample};
pub use surrogate::{fit_weighted_ridge, RidgeFit};
