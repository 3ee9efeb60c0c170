//! Experiment configuration, figure sweeps and result emission.

mod config;
mod figures;
mod table;

pub use config::{
    validate_config, ChannelSection, Diagnostic, DiagnosticKind, EnergySection, ExperimentConfig, LinkSection,
    NetworkSection, OutputSection, Severity, SweepSection, TrafficSection, DEFAULT_N_LINK, DEFAULT_X_OFF,
};
pub use figures::{default_replications, run_figure, worker_pool, FIGURES, THREADS_ENV};
pub use table::{Axis, ResultTable, Row};
