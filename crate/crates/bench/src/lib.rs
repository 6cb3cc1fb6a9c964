//! Seeded benchmark suites for the orchestrator: dataset generators with a
//! ROUGE-L diversity filter, suite runners and mean/std reports.

pub mod banks;
pub mod datasets;
pub mod report;
pub mod rouge;
pub mod stats;
pub mod suites;

pub use report::{emit, Condition, Report, REPORT_SCHEMA};
pub use rouge::{rouge_l, rouge_l_text, DiversityPool, DIVERSITY_THRESHOLD};
pub use suites::{run_suite, run_suite_detailed, BenchConfig, Sizes, Suite, SuiteOutput};
