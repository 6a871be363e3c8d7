//! Benchmark sweep machinery shared by the `adialin` binary and the
//! acceptance tests: sweep configuration, deterministic trial seeding,
//! CSV persistence, and plot emission.

pub mod plot;
pub mod sweep;

pub use sweep::{
    instance_seed, run_sweep, run_sweep_with_threads, trial_seed, write_csv, BenchmarkRecord,
    SweepConfig,
};
