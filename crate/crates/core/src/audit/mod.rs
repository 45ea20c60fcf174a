//! The LimeOut procedure: assess a model's global explanation, and when
//! sensitive features dominate, retrain without them, average the pool and
//! re-assess.

pub mod pool;
pub mod report;
pub mod run;
pub mod significance;

pub use pool::{build_dropout_pool, companions, drop_sets, PoolMember};
pub use report::{render_global, render_text};
pub use run::{
    audit, prepare_training, resplit_accuracies, run_limeout, Audit, AuditReport, DatasetSummary, LimeOutConfig,
    PoolEntry, Significance, TuningSplit, REPORT_SCHEMA_VERSION,
};
pub use significance::{paired_t_test, TTest};
