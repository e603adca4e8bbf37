//! Command-line verification reports for structures on local charts.
//!
//! Exit codes: 0 all checks pass, 1 any check fails, 2 inconclusive only,
//! 3 on parse or validation errors.

mod commands;
mod input;

use clap::{Args, Parser, Subcommand};
use commands::{CommandError, CommandOutcome};
use courant::expr::SampleConfig;
use courant::report::CheckStatus;
use courant::scalar::Scalar;
use serde::Serialize;
use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "courant",
    about = "Symbolic verification of Dirac structures, coupling foliations, and submanifold calculus on charts",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Isotropy, rank, bracket closure, and the algebroid axiom residuals.
    Verify(RunArgs),
    /// Normal distribution, coupling verdict, extracted data, integrability.
    Coupling(RunArgs),
    /// Leaf coefficients, the linear model, and its verification.
    Linearize(RunArgs),
    /// Kernel, properness, induced structure, second fundamental form.
    Submanifold(RunArgs),
    /// The algebroid axiom suite on seeded random polynomial sections.
    Axioms(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Input file in the block format (see the repository README).
    input: PathBuf,
    /// Override the number of sample points.
    #[arg(long)]
    samples: Option<usize>,
    /// Override the sampling seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the sampling tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Override the sampling box half-width (integer or `a/b`).
    #[arg(long = "box", value_name = "RATIONAL")]
    box_radius: Option<String>,
    /// Output format.
    #[arg(long, value_parser = ["json", "text"], default_value = "text")]
    format: String,
    /// Reject inputs with transcendental coefficients.
    #[arg(long)]
    exact_only: bool,
}

#[derive(Serialize)]
struct SamplesOut {
    count: usize,
    seed: u64,
    #[serde(rename = "box")]
    box_radius: String,
    denom: u32,
    tol: f64,
}

#[derive(Serialize)]
struct CliReport {
    format: u32,
    command: String,
    samples: SamplesOut,
    status: CheckStatus,
    checks: Vec<courant::report::CheckRecord>,
    outputs: BTreeMap<String, String>,
}

fn fail(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(3)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, args) = match &cli.command {
        Command::Verify(a) => ("verify", a),
        Command::Coupling(a) => ("coupling", a),
        Command::Linearize(a) => ("linearize", a),
        Command::Submanifold(a) => ("submanifold", a),
        Command::Axioms(a) => ("axioms", a),
    };
    let src = match std::fs::read_to_string(&args.input) {
        Ok(src) => src,
        Err(e) => return fail(format!("cannot read {}: {e}", args.input.display())),
    };
    let doc = match input::parse_document(&src) {
        Ok(doc) => doc,
        Err(e) => return fail(e),
    };
    if args.exact_only && doc.has_transcendental() {
        return fail("the input has transcendental coefficients (rejected by --exact-only)");
    }
    let mut cfg: SampleConfig = doc.samples.clone();
    if let Some(count) = args.samples {
        if count == 0 {
            return fail("--samples must be positive");
        }
        cfg.count = count;
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(tol) = args.tol {
        if tol <= 0.0 {
            return fail("--tol must be positive");
        }
        cfg.tol = tol;
    }
    if let Some(text) = &args.box_radius {
        match parse_rational(text) {
            Some(r) => cfg.box_radius = r,
            None => return fail(format!("cannot parse --box `{text}`")),
        }
    }
    let outcome = match name {
        "verify" => commands::run_verify(&doc, &cfg),
        "coupling" => commands::run_coupling(&doc, &cfg),
        "linearize" => commands::run_linearize(&doc, &cfg),
        "submanifold" => commands::run_submanifold(&doc, &cfg),
        _ => commands::run_axioms(&doc, &cfg),
    };
    let CommandOutcome { report, outputs } = match outcome {
        Ok(outcome) => outcome,
        Err(CommandError::Invalid(msg)) => return fail(msg),
    };
    let status = report.status();
    let cli_report = CliReport {
        format: 1,
        command: name.to_string(),
        samples: SamplesOut {
            count: cfg.count,
            seed: cfg.seed,
            box_radius: cfg.box_radius.to_string(),
            denom: cfg.denom_bound,
            tol: cfg.tol,
        },
        status,
        checks: report.checks,
        outputs,
    };
    match args.format.as_str() {
        "json" => match serde_json::to_string_pretty(&cli_report) {
            Ok(json) => println!("{json}"),
            Err(e) => return fail(format!("serialization failed: {e}")),
        },
        _ => render_text(&cli_report),
    }
    match status {
        CheckStatus::Pass => ExitCode::SUCCESS,
        CheckStatus::Fail => ExitCode::from(1),
        CheckStatus::Unknown => ExitCode::from(2),
        CheckStatus::Invalid => ExitCode::from(3),
    }
}

fn parse_rational(text: &str) -> Option<Scalar> {
    let parts: Vec<&str> = text.split('/').collect();
    match parts.as_slice() {
        [n] => n.trim().parse::<i64>().ok().map(Scalar::from_int),
        [n, d] => {
            let n = n.trim().parse::<i64>().ok()?;
            let d = d.trim().parse::<i64>().ok()?;
            if d == 0 {
                None
            } else {
                Some(Scalar::ratio(n, d))
            }
        }
        _ => None,
    }
}

fn render_text(report: &CliReport) {
    println!("command: {}", report.command);
    println!(
        "samples: count={} seed={} box={} denom={} tol={:e}",
        report.samples.count,
        report.samples.seed,
        report.samples.box_radius,
        report.samples.denom,
        report.samples.tol
    );
    for check in &report.checks {
        println!("[{}] {} — {}", check.status, check.id, check.label);
        for witness in &check.witnesses {
            let point: Vec<String> = witness
                .point
                .iter()
                .map(|(n, v)| format!("{n}={v}"))
                .collect();
            println!("    at ({}): {}", point.join(", "), witness.values.join("; "));
        }
    }
    if !report.outputs.is_empty() {
        println!("outputs:");
        for (key, value) in &report.outputs {
            if value.contains('\n') {
                println!("  {key} =");
                for line in value.lines() {
                    println!("    {line}");
                }
            } else {
                println!("  {key} = {value}");
            }
        }
    }
    println!("status: {}", report.status);
}
