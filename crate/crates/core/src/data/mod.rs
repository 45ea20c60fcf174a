//! Tabular data: CSV ingestion, label encoding, splitting, statistics,
//! oversampling and feature association.

pub mod correlation;
pub mod dataset;
pub mod schema;
pub mod smote;
pub mod stats;

pub use correlation::{correlated_features, DEFAULT_CORRELATION_THRESHOLD};
pub use dataset::{load_csv, load_csv_from_reader, train_test_split, Dataset};
pub use schema::{ColumnRole, Feature, FeatureKind, FeatureSchema, SchemaHint};
pub use smote::{smote_oversample, DEFAULT_K_NEIGHBORS};
pub use stats::{compute_stats, FeatureStat, FeatureStats, DEFAULT_QUANTILES};
