//! Experiment plumbing: event logs, convergence and performance-plot data,
//! an exhaustive oracle, a seeded runner and a synthetic instance generator.

mod events;
pub mod generator;
mod oracle;
mod ratios;
pub mod runner;
mod series;

pub use events::{read_events_csv, write_events_csv, ImprovementEvent};
pub use oracle::{brute_force_optimum, MAX_ENUMERATION};
pub use ratios::{
    performance_ratios, read_results_csv, write_ratios_csv, AlgorithmResult, RatioRow,
    INFEASIBLE_SENTINEL,
};
pub use runner::{run, Mode, RunConfig, RunOutcome};
pub use series::{
    cross_instance_series, denormalize_series, merge_events, normalize_series,
    write_convergence_csv, ConvergenceSeries, SeriesKind,
};
