//! Desk-scale experiments over `varspace-core`: JSON configs in, JSON
//! reports and per-trial CSV rows out.

pub mod config;
pub mod error;
pub mod experiments;
pub mod random;
pub mod report;

pub use config::ExperimentConfig;
pub use error::LabError;
pub use experiments::run_named;
pub use report::Report;

/// Subcommands accepted by [`run_named`].
pub const EXPERIMENTS: [&str; 7] =
    ["norm", "audit-weights", "audit-domain", "verify-qe", "verify-synthesis", "verify-conv", "synthesize"];
