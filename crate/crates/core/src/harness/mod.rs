//! Monte Carlo experiments: configs, runs, steady-state estimates, eta
//! sweeps and result files.
//!
//! Runs are independent and may execute on a thread pool; every run draws
//! from its own `(seed, run, agent)` streams and results are summed in run
//! order, so serial and parallel execution give identical numbers.

mod config;
mod output;
mod run;

pub use config::{
    ExperimentConfig, GraphSpec, ModelFamily, ModelSpec, NoiseSpec, OutputSpec, TruthSpec, SCHEMA_VERSION,
};
pub use output::{
    results_csv, sidecar_json, sweep_csv, write_results, write_sweep, RESULTS_HEADER, SIDECAR_TOLERANCE, SWEEP_HEADER,
};
pub use run::{
    compare_theory, compare_value, eta_sweep, run_experiment, steady_state, theory_inputs, Comparison, Experiment,
    ExperimentResult, RunTrace, SteadyState, SweepResult, SweepRow, TheoryComparison, DIVERGENCE_FACTOR,
};
