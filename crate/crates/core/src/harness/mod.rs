//! Configuration, experiment orchestration, reports and the invariant
//! registry behind the `stein-lab` binary.

mod config;
mod experiment;
mod report;
mod suite;

pub use config::{ExperimentConfig, MatrixSource, DIM_BUDGET_ENV};
pub use experiment::run_stein_experiment;
pub use report::{
    check_table, convergence_table, cumulant_table, is_registered, num, stein_run_table, summarize, summary_table,
    write_csv, CheckRow, Checks, InvariantSummary, RateGap, RunReport, Table, Timing, Timings, CSV_SCHEMA_HEADER,
    INVARIANTS,
};
pub use suite::{operator_audit, run_audit_suite, run_audit_suite_sized, SuiteSize};

/// Exit status for usage and configuration errors.
pub const EXIT_USAGE: i32 = 2;
/// Exit status when an asserted inequality fails.
pub const EXIT_INVARIANT: i32 = 1;
