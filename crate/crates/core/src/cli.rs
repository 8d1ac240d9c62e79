//! Command-line front end: `run`, `theory`, `sweep`, `gen-graph`,
//! `gen-tasks` and `check`.
//!
//! Exit codes: 0 ok, 2 invalid config or usage, 3 divergence, 4 I/O,
//! 5 failed check. Failures print one JSON line
//! `{"error": kind, "code": n, "message": text}` on stderr.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::Serialize;
use serde_json::json;

use crate::data::{agent_rng, TaskField};
use crate::error::Error;
use crate::graph::{build_laplacian, check_feasibility, cluster_subspace, polynomial_of_laplacian, projector};
use crate::harness::{
    compare_theory, eta_sweep, write_results, write_sweep, Experiment, ExperimentConfig, SIDECAR_TOLERANCE,
};
use crate::strategies::{prox_l1_scalar, prox_objective, social_spectral, StrategyConfig, StrategyKind};

pub const PARALLEL_ENV: &str = "NETMTL_PARALLEL";
pub const DEFAULT_ETA_GRID: [f64; 7] = [0.0, 0.01, 0.1, 1.0, 10.0, 100.0, 1000.0];

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DIVERGENCE: i32 = 3;
pub const EXIT_IO: i32 = 4;
pub const EXIT_CHECK: i32 = 5;

#[derive(Debug, Parser)]
#[command(name = "netmtl", version, about = "Multitask adaptation over networks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a Monte Carlo experiment and write CSV + JSON results.
    Run(CommonArgs),
    /// Print closed-form predictions as JSON.
    Theory(CommonArgs),
    /// Run an eta sweep (grid from the config, or a default log grid).
    Sweep(CommonArgs),
    /// Print or write the configured graph as JSON.
    GenGraph(CommonArgs),
    /// Print or write the configured true task field as JSON.
    GenTasks(CommonArgs),
    /// Structural self-checks at tiny scale.
    Check(CommonArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory (`run`, `sweep`) or file (`gen-graph`, `gen-tasks`).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub mu: Option<f64>,
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long)]
    pub iters: Option<usize>,
    #[arg(long)]
    pub runs: Option<usize>,
    #[arg(long, env = PARALLEL_ENV)]
    pub parallel: Option<usize>,
    /// Machine-readable output on stdout.
    #[arg(long)]
    pub json: bool,
}

impl CommonArgs {
    /// Loads the config and applies flag overrides.
    pub fn effective_config(&self) -> Result<ExperimentConfig, Error> {
        let mut c = ExperimentConfig::from_file(&self.config).map_err(|e| match e {
            Error::Io { path, source } => Error::Config(format!("cannot read config {path}: {source}")),
            other => other,
        })?;
        if let Some(s) = self.seed {
            c.seed = s;
        }
        if let Some(mu) = self.mu {
            c.strategy.mu = mu;
        }
        if let Some(eta) = self.eta {
            c.strategy.eta = eta;
        }
        if let Some(t) = self.iters {
            c.iters = t;
        }
        if let Some(r) = self.runs {
            c.runs = r;
        }
        if let Some(p) = self.parallel {
            c.parallel = Some(p);
        }
        c.validate()?;
        Ok(c)
    }
}

fn error_kind(e: &Error) -> (&'static str, i32) {
    match e {
        Error::Io { .. } => ("io", EXIT_IO),
        Error::Divergence { .. } => ("divergence", EXIT_DIVERGENCE),
        Error::Unstable(_) => ("unstable", EXIT_CONFIG),
        Error::Infeasible(_) => ("infeasible", EXIT_CONFIG),
        _ => ("config", EXIT_CONFIG),
    }
}

fn report_error(stderr: &mut dyn Write, kind: &str, code: i32, message: &str) -> i32 {
    let line = json!({"error": kind, "code": code, "message": message});
    let _ = writeln!(stderr, "{line}");
    code
}

fn fail(stderr: &mut dyn Write, e: &Error) -> i32 {
    let (kind, code) = error_kind(e);
    report_error(stderr, kind, code, &e.to_string())
}

/// Parses `args` (including the program name) and executes the command.
pub fn run_cli<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(stdout, "{e}");
                return EXIT_OK;
            }
            let msg = e.to_string();
            let first = msg
                .lines()
                .next()
                .unwrap_or("usage error")
                .trim_start_matches("error: ");
            return report_error(stderr, "usage", EXIT_CONFIG, first);
        }
    };
    let result = match &cli.command {
        Command::Run(a) => cmd_run(a, stdout, stderr),
        Command::Theory(a) => cmd_theory(a, stdout),
        Command::Sweep(a) => cmd_sweep(a, stdout, stderr),
        Command::GenGraph(a) => cmd_gen_graph(a, stdout),
        Command::GenTasks(a) => cmd_gen_tasks(a, stdout),
        Command::Check(a) => return cmd_check(a, stdout, stderr),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => fail(stderr, &e),
    }
}

fn out_location(args: &CommonArgs, config: &ExperimentConfig) -> (PathBuf, String) {
    let dir = args
        .out
        .clone()
        .or_else(|| config.output.dir.clone())
        .unwrap_or_else(|| PathBuf::from("."));
    let prefix = config.output.prefix.clone().unwrap_or_else(|| "run".into());
    (dir, prefix)
}

fn cmd_run(args: &CommonArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), Error> {
    let config = args.effective_config()?;
    let exp = Experiment::build(&config)?;
    let result = exp.run()?;
    let (dir, prefix) = out_location(args, &config);
    let (csv, side) = write_results(&result, &dir, &prefix)?;
    let cmp = compare_theory(&result, SIDECAR_TOLERANCE);
    if args.json {
        let summary = json!({
            "csv": csv,
            "sidecar": side,
            "steady_state": result.steady_wo,
            "steady_state_wstar": result.steady_wstar,
            "comparisons": cmp,
        });
        let _ = writeln!(stdout, "{summary}");
    } else {
        let s = &result.steady_wo;
        let _ = writeln!(
            stderr,
            "steady-state MSD {:.6e} +/- {:.2e} over the last {} points{}",
            s.mean,
            s.stderr,
            s.window,
            if s.stationary { "" } else { " (still drifting)" }
        );
        for c in &cmp.checks {
            let _ = writeln!(
                stderr,
                "{}: simulated {:.6e}, theory {:.6e}, rel. error {:.3}",
                c.metric, c.simulated, c.theory, c.rel_error
            );
        }
        let _ = writeln!(stderr, "wrote {} and {}", csv.display(), side.display());
    }
    Ok(())
}

fn cmd_theory(args: &CommonArgs, stdout: &mut dyn Write) -> Result<(), Error> {
    let config = args.effective_config()?;
    let exp = Experiment::build(&config)?;
    let report = exp.theory.ok_or_else(|| {
        Error::Config("theory needs an mse model with one regressor covariance and equal task lengths".into())
    })?;
    let _ = writeln!(stdout, "{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}

fn cmd_sweep(args: &CommonArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), Error> {
    let config = args.effective_config()?;
    let grid = config.eta_grid.clone().unwrap_or_else(|| DEFAULT_ETA_GRID.to_vec());
    let sweep = eta_sweep(&config, &grid)?;
    let (dir, prefix) = out_location(args, &config);
    let (csv, side) = write_sweep(&sweep, &dir, &prefix)?;
    if args.json {
        let _ = writeln!(stdout, "{}", serde_json::to_string(&sweep)?);
    } else {
        let _ = writeln!(
            stderr,
            "best eta {} ; wrote {} and {}",
            sweep.best_eta,
            csv.display(),
            side.display()
        );
    }
    Ok(())
}

fn emit(args: &CommonArgs, text: &str, stdout: &mut dyn Write) -> Result<(), Error> {
    match &args.out {
        Some(path) => std::fs::write(path, text).map_err(|e| Error::io(path, e)),
        None => {
            let _ = writeln!(stdout, "{text}");
            Ok(())
        }
    }
}

fn cmd_gen_graph(args: &CommonArgs, stdout: &mut dyn Write) -> Result<(), Error> {
    let config = args.effective_config()?;
    let graph = config.graph.build(config.seed)?;
    emit(args, &graph.to_json(), stdout)
}

fn cmd_gen_tasks(args: &CommonArgs, stdout: &mut dyn Write) -> Result<(), Error> {
    let config = args.effective_config()?;
    let graph = config.graph.build(config.seed)?;
    let spectrum = build_laplacian(&graph)?;
    let truth = config.truth.build(&graph, &spectrum, &config.strategy, config.seed)?;
    emit(args, &truth.to_json(), stdout)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckOutcome {
    fn new(name: &str, passed: bool, detail: impl Into<String>) -> Self {
        CheckOutcome {
            name: name.to_string(),
            passed,
            detail: detail.into(),
        }
    }
}

fn cmd_check(args: &CommonArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let config = match args.effective_config() {
        Ok(c) => c,
        Err(e) => return fail(stderr, &e),
    };
    let outcomes = match run_checks(&config) {
        Ok(o) => o,
        Err(e) => return fail(stderr, &e),
    };
    let passed = outcomes.iter().all(|o| o.passed);
    for o in &outcomes {
        let _ = writeln!(
            stderr,
            "check {:<28} {} {}",
            o.name,
            if o.passed { "ok" } else { "FAIL" },
            o.detail
        );
    }
    if args.json {
        let _ = writeln!(stdout, "{}", json!({"passed": passed, "checks": outcomes}));
    }
    if passed {
        EXIT_OK
    } else {
        let failed: Vec<&str> = outcomes.iter().filter(|o| !o.passed).map(|o| o.name.as_str()).collect();
        let detail: Vec<&str> = outcomes
            .iter()
            .filter(|o| !o.passed)
            .map(|o| o.detail.as_str())
            .collect();
        report_error(
            stderr,
            "check",
            EXIT_CHECK,
            &format!("failed checks {}: {}", failed.join(","), detail.join("; ")),
        )
    }
}

fn tiny(config: &ExperimentConfig) -> ExperimentConfig {
    let mut c = config.clone();
    c.iters = c.iters.min(50);
    c.runs = 2;
    c.decimate = 1;
    c.parallel = Some(1);
    c
}

fn with_strategy(config: &ExperimentConfig, strategy: StrategyConfig) -> ExperimentConfig {
    let mut c = config.clone();
    c.strategy = strategy;
    c
}

fn same_run(a: &Experiment, b: &ExperimentConfig) -> Result<bool, Error> {
    let other = a.with_config(b)?;
    Ok(a.run_once(0)?.msd_wo == other.run_once(0)?.msd_wo)
}

/// Structural invariants for a config, run at tiny scale. A strategy that
/// cannot be built because its combination matrix is infeasible yields a
/// failed `feasibility` outcome naming the violated constraints.
pub fn run_checks(config: &ExperimentConfig) -> Result<Vec<CheckOutcome>, Error> {
    let config = tiny(config);
    let mut out = Vec::new();
    let exp = match Experiment::build(&config) {
        Ok(e) => e,
        Err(Error::Infeasible(msg)) => {
            out.push(CheckOutcome::new("feasibility", false, msg));
            return Ok(out);
        }
        Err(e) => return Err(e),
    };
    out.push(CheckOutcome::new("config", true, format!("hash {}", config.hash())));

    let strategy = &exp.strategy;
    if let (Some(a), Some(u)) = (strategy.combination(), strategy.subspace()) {
        let report = check_feasibility(a, u, &exp.graph)?;
        out.push(CheckOutcome::new(
            "feasibility",
            report.passed(),
            if report.passed() {
                format!("rho(A-P_U) = {:.6}", report.spectral_radius)
            } else {
                report.failures().join(", ")
            },
        ));
    }

    let a = exp.run_once(0)?;
    let b = exp.run_once(0)?;
    out.push(CheckOutcome::new("determinism", a == b, "run 0 repeated"));
    let mut serial = config.clone();
    serial.parallel = Some(1);
    let mut parallel = config.clone();
    parallel.parallel = Some(2);
    let rs = exp.with_config(&serial)?.run()?;
    let rp = exp.with_config(&parallel)?.run()?;
    out.push(CheckOutcome::new(
        "serial_parallel",
        rs.msd_wo == rp.msd_wo && rs.stderr == rp.stderr,
        "2 runs, 1 vs 2 threads",
    ));

    let sc = &config.strategy;
    let mut rng = agent_rng(config.seed, 0xffff_fffe, 0);
    let sizes = exp.model.sizes();
    let mut psi = TaskField::zeros(&sizes);
    psi.as_mut_slice()
        .iter_mut()
        .for_each(|x| *x = rng.random_range(-1.0..1.0));

    match sc.kind {
        StrategyKind::LaplacianReg => {
            let mut nc = sc.clone();
            nc.kind = StrategyKind::Noncooperative;
            let mut zero = sc.clone();
            zero.eta = 0.0;
            let e0 = exp.with_config(&with_strategy(&config, zero))?;
            out.push(CheckOutcome::new(
                "reduction_eta0_noncooperative",
                same_run(&e0, &with_strategy(&config, nc))?,
                "bit-identical",
            ));
            let mut spec = sc.clone();
            spec.kind = StrategyKind::SpectralReg;
            spec.payload = Some(json!({"coefficients": [0.0, 1.0]}));
            out.push(CheckOutcome::new(
                "reduction_spectral_linear",
                same_run(&exp, &with_strategy(&config, spec))?,
                "bit-identical",
            ));
        }
        StrategyKind::SpectralReg => {
            let kernel = strategy.kernel().expect("spectral strategy has a kernel");
            let coeffs = kernel.coefficients().to_vec();
            let mu_eta = sc.mu * sc.eta;
            let mut w = psi.clone();
            social_spectral(&psi, &exp.graph, &coeffs, mu_eta, &mut w)?;
            let m = psi.require_uniform()?;
            let r =
                polynomial_of_laplacian(&coeffs, exp.spectrum.laplacian()).kronecker(&DMatrix::<f64>::identity(m, m));
            let x = psi.to_dvector();
            let oracle: DVector<f64> = &x - (&r * &x) * mu_eta;
            let rel = (w.to_dvector() - &oracle).norm() / oracle.norm().max(1e-300);
            out.push(CheckOutcome::new(
                "spectral_dense_oracle",
                rel <= 1e-10,
                format!("rel. error {rel:.2e}"),
            ));
            if coeffs == [0.0, 1.0] {
                let mut lap = sc.clone();
                lap.kind = StrategyKind::LaplacianReg;
                lap.payload = None;
                out.push(CheckOutcome::new(
                    "reduction_laplacian",
                    same_run(&exp, &with_strategy(&config, lap))?,
                    "r(lambda) = lambda, bit-identical",
                ));
            }
        }
        StrategyKind::ProxL1 => {
            let mut worst: f64 = 0.0;
            for _ in 0..100 {
                let z: f64 = rng.random_range(-3.0..3.0);
                let count = rng.random_range(1..=5);
                let anchors: Vec<(f64, f64)> = (0..count)
                    .map(|_| (rng.random_range(-3.0..3.0), rng.random_range(0.0..2.0)))
                    .collect();
                let gamma = rng.random_range(0.01..2.0);
                let x = prox_l1_scalar(z, &mut anchors.clone(), gamma);
                let f = |t: f64| prox_objective(t, z, &anchors, gamma);
                let step = 1e-6;
                let gap = f(x) - f(x - step).min(f(x + step));
                worst = worst.max(gap);
            }
            out.push(CheckOutcome::new(
                "prox_local_optimality",
                worst <= 1e-12,
                format!("max gap {worst:.2e}"),
            ));
        }
        StrategyKind::Diffusion => {
            let mut w = psi.clone();
            strategy.social_step(&psi, &mut w)?;
            let n = sizes.len() as f64;
            let m = sizes[0];
            let drift = (0..m)
                .map(|j| {
                    let a: f64 = (0..sizes.len()).map(|k| psi.block(k)[j]).sum();
                    let b: f64 = (0..sizes.len()).map(|k| w.block(k)[j]).sum();
                    ((a - b) / n).abs()
                })
                .fold(0.0, f64::max);
            out.push(CheckOutcome::new(
                "mean_preservation",
                drift <= 1e-12,
                format!("max drift {drift:.2e}"),
            ));
        }
        StrategyKind::SubspaceProjection => {
            let u = strategy.subspace().expect("subspace strategy");
            let payload = sc.payload.as_ref();
            let consensus = payload
                .and_then(|p| p.get("subspace"))
                .is_some_and(|s| s == "consensus");
            let weights = payload.and_then(|p| p.get("weights")).cloned();
            let scalar_rule = weights
                .as_ref()
                .is_some_and(|w| w == "metropolis" || w == "laplacian_rule" || w.get("matrix").is_some());
            if consensus && scalar_rule {
                let mut d = sc.clone();
                d.kind = StrategyKind::Diffusion;
                d.payload = Some(json!({ "weights": weights }));
                if let Ok(same) = same_run(&exp, &with_strategy(&config, d)) {
                    out.push(CheckOutcome::new(
                        "reduction_diffusion",
                        same,
                        "consensus subspace vs diffusion, bit-identical",
                    ));
                }
            }
            let p = projector(u)?;
            let mut x = psi.clone();
            let mut y = psi.clone();
            for _ in 0..2000 {
                strategy.social_step(&x, &mut y)?;
                std::mem::swap(&mut x, &mut y);
            }
            let target = &p * psi.to_dvector();
            let err = (x.to_dvector() - &target).norm();
            out.push(CheckOutcome::new(
                "semi_convergence",
                err <= 1e-6,
                format!("|A^2000 psi - P_U psi| = {err:.2e}"),
            ));
        }
        StrategyKind::Clustered => {
            let part = strategy.partition().expect("clustered strategy");
            let m = sizes[0];
            let u = cluster_subspace(part, m)?;
            let report = check_feasibility(strategy.combination().unwrap(), &u, &exp.graph)?;
            out.push(CheckOutcome::new(
                "intra_cluster_feasibility",
                report.passed(),
                report.failures().join(", "),
            ));
            let mut zero = sc.clone();
            zero.eta = 0.0;
            let z = with_strategy(&config, zero);
            let ez = exp.with_config(&z)?;
            let mut w = psi.clone();
            ez.strategy.social_step(&psi, &mut w)?;
            let drift = (0..part.n_clusters())
                .flat_map(|q| (0..m).map(move |j| (q, j)))
                .map(|(q, j)| {
                    let a: f64 = part.members(q).map(|k| psi.block(k)[j]).sum();
                    let b: f64 = part.members(q).map(|k| w.block(k)[j]).sum();
                    (a - b).abs()
                })
                .fold(0.0, f64::max);
            out.push(CheckOutcome::new(
                "cluster_means_at_eta0",
                drift <= 1e-12,
                format!("max drift {drift:.2e}"),
            ));
        }
        StrategyKind::Overlapping | StrategyKind::Noncooperative => {}
    }

    if matches!(
        sc.kind,
        StrategyKind::LaplacianReg | StrategyKind::SpectralReg | StrategyKind::ProxL1
    ) {
        let mut zero = sc.clone();
        zero.eta = 0.0;
        let e0 = exp.with_config(&with_strategy(&config, zero))?;
        let mut w = psi.clone();
        e0.strategy.social_step(&psi, &mut w)?;
        out.push(CheckOutcome::new(
            "identity_at_eta0",
            w == psi,
            "social step with eta = 0",
        ));
    }
    Ok(out)
}

/// Entry point used by the binary.
pub fn main_from_env() -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_cli(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}
