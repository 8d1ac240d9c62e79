use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde_json::json;

use crate::error::{Error, Result};

use super::run::{compare_theory, ExperimentResult, SweepResult};

pub const RESULTS_HEADER: &str = "iter,msd_wo,msd_wstar,stderr";
pub const SWEEP_HEADER: &str = "eta,msd_sim,var_sim,var_theory,bias_theory";

/// Tolerance used for the comparisons recorded in the sidecar.
pub const SIDECAR_TOLERANCE: f64 = 0.15;

/// Trajectory CSV; `msd_wstar` is empty when no limit point is known.
/// Values use the shortest round-trip formatting, so equal results give
/// byte-identical files.
pub fn results_csv(result: &ExperimentResult) -> String {
    let mut out = String::with_capacity(32 * result.iters.len());
    out.push_str(RESULTS_HEADER);
    out.push('\n');
    for (i, &iter) in result.iters.iter().enumerate() {
        let ws = result.msd_wstar.as_ref().map(|w| w[i].to_string()).unwrap_or_default();
        let _ = writeln!(out, "{iter},{},{ws},{}", result.msd_wo[i], result.stderr[i]);
    }
    out
}

pub fn sidecar_json(result: &ExperimentResult) -> serde_json::Value {
    json!({
        "seed": result.seed,
        "config_hash": result.config_hash,
        "effective_config": result.config,
        "iters": result.config.iters,
        "runs": result.config.runs,
        "steady_state": {
            "msd_wo": result.steady_wo,
            "msd_wstar": result.steady_wstar,
            "per_agent": result.per_agent,
            "bias_wstar": result.bias_wstar,
        },
        "theory": result.theory,
        "comparisons": compare_theory(result, SIDECAR_TOLERANCE),
        "wall_time_s": result.wall_time_s,
    })
}

pub fn sweep_csv(sweep: &SweepResult) -> String {
    let mut out = String::new();
    out.push_str(SWEEP_HEADER);
    out.push('\n');
    for r in &sweep.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.eta, r.msd_sim, r.var_sim, r.var_theory, r.bias_theory
        );
    }
    out
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Writes `<prefix>.csv` and `<prefix>.json` into `dir`.
pub fn write_results(result: &ExperimentResult, dir: &Path, prefix: &str) -> Result<(PathBuf, PathBuf)> {
    ensure_dir(dir)?;
    let csv = dir.join(format!("{prefix}.csv"));
    let side = dir.join(format!("{prefix}.json"));
    write(&csv, &results_csv(result))?;
    let text = serde_json::to_string_pretty(&sidecar_json(result))?;
    write(&side, &text)?;
    Ok((csv, side))
}

/// Writes `<prefix>_sweep.csv` and `<prefix>_sweep.json` into `dir`.
pub fn write_sweep(sweep: &SweepResult, dir: &Path, prefix: &str) -> Result<(PathBuf, PathBuf)> {
    ensure_dir(dir)?;
    let csv = dir.join(format!("{prefix}_sweep.csv"));
    let side = dir.join(format!("{prefix}_sweep.json"));
    write(&csv, &sweep_csv(sweep))?;
    write(&side, &serde_json::to_string_pretty(sweep)?)?;
    Ok((csv, side))
}
