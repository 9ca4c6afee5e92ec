//! Command-line front end. Exit codes: 0 pass, 1 verification failure,
//! 2 usage or configuration error, 3 numerical divergence.

use crate::analysis::{
    analyze_run, check_domination, j_diagnostic, localization_radius, AnalysisReport,
    DominationSense, FitWindow, Region,
};
use crate::closedform::{certify_sign, Barrier};
use crate::config::{read_json, Check, ConfigError, ExperimentConfig, ResidualConfig};
use crate::exponents::{derive_constants, validate_params, ParamError, ProblemParams};
use crate::io::{load_run_dir, write_run_dir};
use crate::solver::{run, SimulationResult, SolverError};
use crate::verify::{Battery, Suite};
use clap::{Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;
use std::ffi::OsString;
use std::path::{Path, PathBuf};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DIVERGED: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "vhj-lab", version, about = "Extinction experiments for u_t - Δ_p u + |∇u|^q = 0")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the regime and closed-form constants of (N, p, q) as JSON.
    Derive {
        #[arg(short = 'N', long = "dim")]
        n: f64,
        #[arg(short, long, allow_negative_numbers = true)]
        p: f64,
        #[arg(short, long, allow_negative_numbers = true)]
        q: f64,
    },
    /// Certify the sign of the operator on a comparison function.
    Residual {
        config: PathBuf,
        /// Write the report here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run one or more experiment configurations.
    Simulate {
        #[arg(required = true)]
        configs: Vec<PathBuf>,
        /// Run directory (single config) or parent directory (several).
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Worker threads for several configurations.
        #[arg(long, default_value_t = 0)]
        jobs: usize,
    },
    /// Re-run the analysis on an existing run directory.
    Analyze {
        run_dir: PathBuf,
        #[arg(long, num_args = 2, value_names = ["T_LO", "T_HI"])]
        window: Option<Vec<f64>>,
    },
    /// Run verification suites (algebra, closedform, scheme, phenomena, all).
    Verify {
        #[arg(default_value = "all")]
        suites: Vec<String>,
        #[arg(long, default_value_t = 20240601)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Serialize)]
struct DeriveOutput {
    params: ProblemParams,
    regime: String,
    constants: Option<crate::exponents::DerivedConstants>,
    note: Option<String>,
}

fn print_json<T: Serialize>(v: &T) {
    use std::io::Write;
    let text = serde_json::to_string_pretty(v).expect("serializable");
    let _ = writeln!(std::io::stdout(), "{text}");
}

fn emit<T: Serialize>(v: &T, out: Option<&Path>) -> Result<(), String> {
    let text = serde_json::to_string_pretty(v).map_err(|e| e.to_string())?;
    match out {
        Some(p) => std::fs::write(p, text + "\n").map_err(|e| format!("{}: {e}", p.display())),
        None => {
            use std::io::Write;
            let _ = writeln!(std::io::stdout(), "{text}");
            Ok(())
        }
    }
}

fn cmd_derive(n: f64, p: f64, q: f64) -> i32 {
    let params = match validate_params(n, p, q) {
        Ok(pp) => pp,
        Err(ParamError::ExponentOutOfRange { name: "p", .. }) if n.fract() == 0.0 && n >= 1.0 => {
            match ProblemParams::relaxed(n as u32, p, q) {
                Ok(pp) => pp,
                Err(e) => {
                    eprintln!("error: {e}");
                    return EXIT_USAGE;
                }
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    let regime = params.regime();
    let (constants, note) = match derive_constants(&params) {
        Ok(c) => (Some(c), None),
        Err(e) => (None, Some(e.to_string())),
    };
    print_json(&DeriveOutput {
        params,
        regime: regime.to_string(),
        constants,
        note,
    });
    EXIT_PASS
}

fn cmd_residual(config: &Path, out: Option<&Path>) -> i32 {
    let built = read_json::<ResidualConfig>(config).and_then(|c| {
        let bx = c.cert_box;
        c.build().map(|b| (b, bx))
    });
    let ((profile, sense, sampler), bx) = match built {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    let report = match certify_sign(&profile, bx, sense, sampler) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_FAIL;
        }
    };
    if let Err(e) = emit(&report, out) {
        eprintln!("error: {e}");
        return EXIT_USAGE;
    }
    if report.pass {
        EXIT_PASS
    } else {
        EXIT_FAIL
    }
}

/// Fits plus the checks requested in the configuration.
pub fn full_analysis(run_id: &str, config: &ExperimentConfig, result: &SimulationResult, window: Option<FitWindow>) -> AnalysisReport {
    let window = window.or(config.analysis.fit_window);
    let mut report = analyze_run(run_id, result, window);
    let checks = &config.analysis.checks;
    let r0 = config.analysis.r0;
    if checks.contains(&Check::JDiagnostic) {
        if let Some(r0) = r0 {
            let t_cut = result.t_e_est.map_or(f64::INFINITY, |te| 0.9 * te);
            let snaps: Vec<_> = result.snapshots.iter().filter(|s| s.t < t_cut).cloned().collect();
            if let Ok(d) = j_diagnostic(&snaps, &result.grid, &result.params, result.tol_pos, r0, None) {
                report.j_floor = Some(d.inf_delta);
            }
        }
    }
    if checks.contains(&Check::Localization) {
        if let Some(r0) = r0 {
            report.localization_radius = localization_radius(r0, result.sup_norm0, &result.params).ok();
            // Barrier anchored on the boundary of the initial support, checked inside it.
            if let Ok(barrier) = Barrier::new(result.params, r0) {
                let region = Region {
                    r: [0.0, r0],
                    t: [0.0, f64::INFINITY],
                };
                if let Ok(d) = check_domination(result, &barrier.into(), DominationSense::Below, region, 10.0 * result.tol_pos) {
                    report.domination.push(d);
                }
            }
        }
    }
    if !checks.is_empty() {
        let keep = |q: &str| match q {
            "max_u" => checks.contains(&Check::Rate),
            "support_radius" => checks.contains(&Check::Support),
            _ => true,
        };
        report.fits.retain(|f| keep(&f.quantity));
        if !checks.contains(&Check::Gradient) {
            report.gradient_envelope = None;
        }
    }
    report
}

fn simulate_one(path: &Path, out_dir: Option<PathBuf>) -> Result<(PathBuf, crate::io::RunSummary), (i32, String)> {
    let config: ExperimentConfig = read_json(path).map_err(|e| match e {
        ConfigError::Io { .. } => (EXIT_USAGE, e.to_string()),
        _ => (EXIT_USAGE, format!("{}: {e}", path.display())),
    })?;
    let resolved = config.resolve().map_err(|e| (EXIT_USAGE, format!("{}: {e}", path.display())))?;
    let dir = out_dir
        .or_else(|| resolved.config.output.directory.clone())
        .unwrap_or_else(|| PathBuf::from(path.file_stem().unwrap_or_default()).with_extension("run"));
    let result = run(&resolved.params, &resolved.grid, &resolved.ic, &resolved.cfg).map_err(|e| match e {
        SolverError::Diverged { .. } => (EXIT_DIVERGED, e.to_string()),
        _ => (EXIT_USAGE, e.to_string()),
    })?;
    let run_id = dir.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let analysis = full_analysis(&run_id, &resolved.config, &result, None);
    let summary = write_run_dir(&dir, &resolved.config, &resolved.cfg, &result, Some(&analysis))
        .map_err(|e| (EXIT_USAGE, e.to_string()))?;
    Ok((dir, summary))
}

fn cmd_simulate(configs: &[PathBuf], out_dir: Option<PathBuf>, jobs: usize) -> i32 {
    let dir_for = |p: &PathBuf| -> Option<PathBuf> {
        match (&out_dir, configs.len()) {
            (Some(d), 1) => Some(d.clone()),
            (Some(d), _) => Some(d.join(p.file_stem().unwrap_or_default())),
            (None, _) => None,
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    let results: Vec<_> = pool.install(|| {
        configs
            .par_iter()
            .map(|p| simulate_one(p, dir_for(p)))
            .collect()
    });
    let mut code = EXIT_PASS;
    for (path, r) in configs.iter().zip(results) {
        match r {
            Ok((dir, summary)) => println!(
                "{}: {:?}, T_e_est = {}, {} steps -> {}",
                path.display(),
                summary.termination,
                summary.t_e_est.map_or("none".into(), |t| format!("{t:.10e}")),
                summary.steps,
                dir.display()
            ),
            Err((c, msg)) => {
                eprintln!("error: {msg}");
                code = code.max(c);
            }
        }
    }
    code
}

fn cmd_analyze(dir: &Path, window: Option<Vec<f64>>) -> i32 {
    let (config, _, result) = match load_run_dir(dir) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    let window = window.map(|w| FitWindow { t_lo: w[0], t_hi: w[1] });
    let run_id = dir.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let report = full_analysis(&run_id, &config, &result, window);
    if let Err(e) = emit(&report, Some(&dir.join("analysis.json"))) {
        eprintln!("error: {e}");
        return EXIT_USAGE;
    }
    print_json(&report);
    EXIT_PASS
}

fn cmd_verify(names: &[String], seed: u64, trials: usize, out: Option<&Path>) -> i32 {
    let mut suites = Vec::new();
    for n in names {
        if n == "all" {
            suites.extend(Suite::ALL);
        } else if let Some(s) = Suite::parse(n) {
            suites.push(s);
        } else {
            eprintln!("error: unknown suite `{n}` (algebra, closedform, scheme, phenomena, all)");
            return EXIT_USAGE;
        }
    }
    let mut battery = Battery::new(seed);
    battery.trials = trials;
    let report = battery.run_suites(&suites);
    for o in &report.outcomes {
        eprintln!("{}", o.summary_line());
    }
    if let Err(e) = emit(&report, out) {
        eprintln!("error: {e}");
        return EXIT_USAGE;
    }
    if report.pass {
        EXIT_PASS
    } else {
        EXIT_FAIL
    }
}

/// Parses `args` and runs the command, returning the exit code.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
        }
    };
    match cli.command {
        Command::Derive { n, p, q } => cmd_derive(n, p, q),
        Command::Residual { config, out } => cmd_residual(&config, out.as_deref()),
        Command::Simulate { configs, out_dir, jobs } => cmd_simulate(&configs, out_dir, jobs),
        Command::Analyze { run_dir, window } => cmd_analyze(&run_dir, window),
        Command::Verify { suites, seed, trials, out } => cmd_verify(&suites, seed, trials, out.as_deref()),
    }
}
