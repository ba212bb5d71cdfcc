//! Experiment harness: kernel validation, convergence sweeps, proof-ledger
//! decompositions, and Lebesgue-point scans.
//!
//! Exit codes: 0 when every check passes, 1 when a check fails, 2 on
//! configuration or runtime errors. `NONLINOP_BUDGET` overrides the
//! per-integral quadrature evaluation budget.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use nonlinop::lebesgue::default_h_grid;
use nonlinop::report::{render_report_with_validations, validate_config_families};
use nonlinop::sweep::{csv_string, SweepConfig};
use nonlinop::{
    classify_point, function_by_name, proof_decomposition, quad, run_sweep, Error, OperatorSpec,
    PointClass,
};

#[derive(Parser)]
#[command(
    name = "nonlinop",
    about = "Nonlinear integral operator experiments",
    version
)]
struct Cli {
    /// Override the quadrature tolerance from the config file.
    #[arg(long, global = true)]
    quad_tol: Option<f64>,

    /// Override the output directory from the config file.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Certify the admissibility conditions for every family in a config.
    ValidateKernel { config: PathBuf },
    /// Run the lambda-sweep experiment; writes CSV, report, and plot script.
    Sweep { config: PathBuf },
    /// Compute one proof-ledger decomposition per (family, function, N).
    Decompose {
        config: PathBuf,
        #[arg(long)]
        lambda: f64,
        #[arg(long)]
        x0: f64,
        #[arg(long)]
        delta: f64,
    },
    /// Classify a corpus point from its one-sided averages.
    LebesgueScan {
        function: String,
        #[arg(long)]
        x0: f64,
        #[arg(long, default_value_t = 1e-3)]
        scan_tol: f64,
    },
}

fn load_config(path: &Path, cli: &Cli) -> Result<SweepConfig, Error> {
    let mut config = SweepConfig::from_json_file(path)?;
    if let Some(tol) = cli.quad_tol {
        if tol <= 0.0 || tol.is_nan() {
            return Err(Error::Config(format!(
                "--quad-tol must be positive, got {tol}"
            )));
        }
        config.quad_tol = tol;
    }
    if let Some(out) = &cli.out {
        config.output_dir = out.clone();
    }
    Ok(config)
}

fn write_text(path: &Path, text: &str) -> Result<(), Error> {
    fs::write(path, text).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })
}

fn ensure_dir(path: &Path) -> Result<(), Error> {
    fs::create_dir_all(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })
}

fn cmd_validate(config: &SweepConfig) -> Result<bool, Error> {
    let validations = validate_config_families(config)?;
    ensure_dir(&config.output_dir)?;
    let json = serde_json::to_string_pretty(&validations)
        .map_err(|e| Error::Config(format!("serialization failed: {e}")))?;
    write_text(&config.output_dir.join("validation.json"), &json)?;
    let mut all_pass = true;
    for report in &validations {
        if report.class_a_pass() {
            println!("PASS {}: all admissibility conditions hold", report.family);
        } else {
            all_pass = false;
            println!(
                "FAIL {}: violates condition(s): {}",
                report.family,
                report.failing_conditions().join(", ")
            );
            for w in &report.condition_b.violations {
                println!(
                    "  witness (b): m={} lambda={} x={} K({},{})={:e} > K({},{})={:e}",
                    w.m, w.lambda, w.x, w.x, w.t1, w.value1, w.x, w.t2, w.value2
                );
            }
            for t in report.condition_d.tracks.iter().filter(|t| !t.pass).take(1) {
                println!(
                    "  witness (d): m={} x={} y={} values={:?}",
                    t.m, t.x, t.y, t.values
                );
            }
        }
        if let Some(tails) = &report.tails {
            if !tails.pass {
                all_pass = false;
                println!("FAIL {}: tail conditions do not vanish", report.family);
            }
        }
    }
    println!(
        "validation report written to {}",
        config.output_dir.join("validation.json").display()
    );
    Ok(all_pass)
}

fn cmd_sweep(config: &SweepConfig) -> Result<bool, Error> {
    let validations = validate_config_families(config)?;
    let rows = run_sweep(config)?;
    let bundle = render_report_with_validations(&rows, config, &validations);

    ensure_dir(&config.output_dir)?;
    let csv_path = config.output_dir.join("sweep.csv");
    let csv = csv_string(&rows);
    write_text(&csv_path, &csv)?;
    write_text(&config.output_dir.join("report.txt"), &bundle.text)?;
    write_text(&config.output_dir.join("plot.py"), &bundle.plot_script)?;

    print!("{}", bundle.text);
    println!(
        "wrote {} ({} bytes), report.txt, plot.py",
        csv_path.display(),
        csv.len()
    );
    Ok(bundle.pass)
}

fn cmd_decompose(config: &SweepConfig, lambda: f64, x0: f64, delta: f64) -> Result<bool, Error> {
    let mut all_ok = true;
    let mut reports = Vec::new();
    for fam_spec in &config.families {
        let family = fam_spec.build()?;
        for fn_name in &config.functions {
            let f = function_by_name(fn_name)?;
            if !f.is_l1_on(&config.domain) {
                println!(
                    "SKIP family={} function={fn_name}: not integrable over {}",
                    fam_spec.name, config.domain
                );
                continue;
            }
            for &n in &config.n_values {
                let spec = OperatorSpec::new(family.clone(), n, config.domain, config.quad_tol)?;
                let d = proof_decomposition(&spec, &f, lambda, x0, delta)?;
                let residual = (d.i11 + d.i12 + d.i13 + d.i14 - d.i1_direct).abs();
                let slack = 10.0 * d.quad_error_sum;
                let ok = residual <= 4.0 * d.quad_error_sum
                    && d.i11 <= d.bound_3 + slack
                    && d.i14 <= d.bound_4 + slack
                    && d.i12 + d.i13 <= d.bound_9 + slack;
                all_ok &= ok;
                println!(
                    "{} family={} function={} N={}: i2={:.3e} panels=({:.3e}, {:.3e}, {:.3e}, {:.3e}) bounds=({:.3e}, {:.3e}, {:.3e}) residual={:.3e}",
                    if ok { "PASS" } else { "FAIL" },
                    fam_spec.name,
                    fn_name,
                    n,
                    d.i2,
                    d.i11,
                    d.i12,
                    d.i13,
                    d.i14,
                    d.bound_3,
                    d.bound_4,
                    d.bound_9,
                    residual
                );
                reports.push(d);
            }
        }
    }
    ensure_dir(&config.output_dir)?;
    let json = serde_json::to_string_pretty(&reports)
        .map_err(|e| Error::Config(format!("serialization failed: {e}")))?;
    write_text(&config.output_dir.join("decompose.json"), &json)?;
    Ok(all_ok)
}

fn cmd_lebesgue_scan(function: &str, x0: f64, scan_tol: f64) -> Result<bool, Error> {
    let f = function_by_name(function)?;
    let scan = classify_point(&f, x0, &default_h_grid(), scan_tol)?;
    println!("function={function} x0={x0}");
    for (i, &h) in scan.h_grid.iter().enumerate() {
        println!(
            "  h={h:<8e} left={:.6e} right={:.6e}",
            scan.left_ratios[i], scan.right_ratios[i]
        );
    }
    println!("verdict: {}", scan.verdict);
    let json = serde_json::to_string_pretty(&scan)
        .map_err(|e| Error::Config(format!("serialization failed: {e}")))?;
    println!("{json}");
    Ok(scan.verdict != PointClass::Inconclusive)
}

fn run(cli: &Cli) -> Result<bool, Error> {
    if let Ok(raw) = std::env::var("NONLINOP_BUDGET") {
        let budget: usize = raw.parse().map_err(|_| {
            Error::Config(format!(
                "NONLINOP_BUDGET must be a positive integer, got {raw}"
            ))
        })?;
        quad::set_default_eval_budget(budget);
    }
    match &cli.command {
        Command::ValidateKernel { config } => cmd_validate(&load_config(config, cli)?),
        Command::Sweep { config } => cmd_sweep(&load_config(config, cli)?),
        Command::Decompose {
            config,
            lambda,
            x0,
            delta,
        } => cmd_decompose(&load_config(config, cli)?, *lambda, *x0, *delta),
        Command::LebesgueScan {
            function,
            x0,
            scan_tol,
        } => cmd_lebesgue_scan(function, *x0, *scan_tol),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::from(0),
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::from(2)
        }
    }
}
