//! Global explanations: submodular instance pick, aggregation of local
//! surrogate coefficients into a per-feature ranking, and the top-k fairness
//! verdict.

pub mod aggregate;
pub mod fairness;
pub mod pick;

pub use aggregate::{
    aggregate, lime_global, Aggregation, GlobalConfig, GlobalExplanation, PickStrategy, DEFAULT_BUDGET,
    DEFAULT_CANDIDATE_COUNT,
};
pub use fairness::{assess_fairness, FairnessVerdict, Verdict, DEFAULT_TOP_K};
pub use pick::submodular_pick;
