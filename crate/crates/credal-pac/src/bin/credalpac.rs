//! Command-line harness over the `credal_pac` library.
//!
//! Subcommands:
//!
//! - `run CONFIG` — execute the configured Monte Carlo campaign and
//!   emit a violation report.
//! - `bounds` — print closed-form PAC epsilons and tail bounds for
//!   given parameters.
//! - `rademacher CONFIG` — exact and/or Monte Carlo Rademacher
//!   complexity of the config's loss class on a sampled dataset.
//! - `check-realisability CONFIG` — existential and uniform credal
//!   realisability diagnostics.
//!
//! Exit codes: 0 on success, 1 on any validation or I/O error, 2 when a
//! `run` report contains a `violated_beyond_slack` verdict.

use std::error::Error;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use credal_pac::bounds::{
    eps_rademacher, gn_tail, hoeffding_tail_uniform, pac_finite_agnostic_report,
    pac_finite_realisable_report, pac_rademacher_report, realisable_union_tail, BoundReport,
};
use credal_pac::complexity::{
    empirical_rademacher_exact, empirical_rademacher_mc, rademacher_complexity, LossClass,
    RademacherEstimate, EXACT_ENUMERATION_LIMIT,
};
use credal_pac::harness::{
    emit_report, estimate_violation_probability, parse_config, select_training_distribution,
    ExperimentConfig, ReportFormat,
};
use credal_pac::{CredalSet, RealisabilityReport, SeedSpec, REALISABILITY_TOLERANCE};

#[derive(Parser)]
#[command(
    name = "credalpac",
    version,
    about = "Monte Carlo harness for PAC bounds over finite and credal hypothesis settings"
)]
struct Cli {
    /// Override the config's master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads for campaign trials (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Write output to this path instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured violation campaign and emit its report.
    Run {
        /// Path to a TOML experiment config.
        config: PathBuf,
    },
    /// Print closed-form PAC epsilons and tail bounds.
    Bounds {
        /// Hypothesis class size |H|.
        #[arg(long)]
        class_size: usize,
        /// Confidence parameter delta.
        #[arg(long)]
        delta: f64,
        /// Sample size n.
        #[arg(long)]
        n: usize,
        /// Threshold(s) to evaluate tail bounds at; repeatable.
        #[arg(long = "eps")]
        eps: Vec<f64>,
        /// Rademacher complexity for the corresponding PAC epsilon.
        #[arg(long)]
        rademacher: Option<f64>,
    },
    /// Estimate the Rademacher complexity of a config's loss class.
    Rademacher {
        /// Path to a TOML experiment config.
        config: PathBuf,
        #[arg(long, value_enum, default_value_t = Method::Both)]
        method: Method,
        /// Sign-vector draws for the Monte Carlo estimates.
        #[arg(long, default_value_t = 10_000)]
        draws: u64,
        /// Also average the complexity over this many freshly sampled
        /// datasets (the quantity the PAC epsilon uses).
        #[arg(long)]
        dataset_draws: Option<u64>,
    },
    /// Report credal realisability diagnostics for a config.
    CheckRealisability {
        /// Path to a TOML experiment config.
        config: PathBuf,
        /// Zero-risk tolerance.
        #[arg(long, default_value_t = REALISABILITY_TOLERANCE)]
        tol: f64,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Exact,
    Mc,
    Both,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(1)
        }
    }
}

fn execute(cli: Cli) -> Result<ExitCode, Box<dyn Error>> {
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()?;
    }

    match &cli.command {
        Command::Run { config } => {
            let config = load_config(config, cli.seed)?;
            let report = estimate_violation_probability(&config)?;
            if let Some(ms) = report.wall_time_ms {
                eprintln!("campaign: {} trials in {ms} ms", report.trials);
            }
            let text = emit_report(
                &report,
                match cli.format {
                    Format::Json => ReportFormat::Json,
                    Format::Csv => ReportFormat::Csv,
                },
            );
            write_output(&cli, &text)?;
            Ok(if report.has_violation() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            })
        }
        Command::Bounds {
            class_size,
            delta,
            n,
            eps,
            rademacher,
        } => {
            let mut reports: Vec<BoundReport> = vec![
                pac_finite_realisable_report(*class_size, *delta, *n)?,
                pac_finite_agnostic_report(*class_size, *delta, *n)?,
            ];
            if let Some(r) = rademacher {
                reports.push(pac_rademacher_report(*r, *delta, *n)?);
            }
            for &e in eps {
                reports.push(realisable_union_tail(*class_size, e, *n)?);
                reports.push(gn_tail(*n, e)?);
                reports.push(hoeffding_tail_uniform(*n, e, 1.0)?);
            }
            let text = match cli.format {
                Format::Json => to_json(&reports)?,
                Format::Csv => bounds_csv(&reports),
            };
            write_output(&cli, &text)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Rademacher {
            config,
            method,
            draws,
            dataset_draws,
        } => {
            let config = load_config(config, cli.seed)?;
            let output = rademacher_output(&config, *method, *draws, *dataset_draws)?;
            let text = match cli.format {
                Format::Json => to_json(&output)?,
                Format::Csv => rademacher_csv(&output),
            };
            write_output(&cli, &text)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::CheckRealisability { config, tol } => {
            let config = load_config(config, cli.seed)?;
            let class = config.build_class()?;
            let set = match config.build_credal_set()? {
                Some(set) => set,
                None => CredalSet::singleton(
                    config
                        .build_classical_distribution()?
                        .expect("config is classical or credal"),
                ),
            };
            let report = RealisabilityReport::evaluate(&class, &set, *tol)?;
            let output = RealisabilityOutput {
                config_digest: config.digest(),
                report,
            };
            let text = match cli.format {
                Format::Json => to_json(&output)?,
                Format::Csv => realisability_csv(&output),
            };
            write_output(&cli, &text)?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn load_config(path: &PathBuf, seed: Option<u64>) -> Result<ExperimentConfig, Box<dyn Error>> {
    let text =
        fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let mut config = parse_config(&text)?;
    if let Some(seed) = seed {
        config.seed = seed;
    }
    Ok(config)
}

fn write_output(cli: &Cli, text: &str) -> Result<(), Box<dyn Error>> {
    match &cli.out {
        Some(path) => {
            fs::write(path, text).map_err(|e| format!("cannot write {}: {e}", path.display()))?;
            Ok(())
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> Result<String, Box<dyn Error>> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    Ok(text)
}

fn enum_name<T: Serialize>(value: &T) -> String {
    serde_json::to_value(value)
        .ok()
        .and_then(|v| v.as_str().map(str::to_owned))
        .unwrap_or_default()
}

fn bounds_csv(reports: &[BoundReport]) -> String {
    let mut text = String::from("kind,raw_value,clipped_value,inputs\n");
    for report in reports {
        let clipped = report
            .clipped_value
            .map(|v| v.to_string())
            .unwrap_or_default();
        let inputs: Vec<String> = report
            .inputs
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect();
        text.push_str(&format!(
            "{},{},{clipped},{}\n",
            enum_name(&report.kind),
            report.raw_value,
            inputs.join(";")
        ));
    }
    text
}

#[derive(Serialize)]
struct RademacherOutput {
    config_digest: String,
    master_seed: u64,
    n: usize,
    delta: f64,
    estimates: Vec<EstimateRow>,
}

#[derive(Serialize)]
struct EstimateRow {
    /// `empirical` conditions on one sampled dataset; `averaged` is the
    /// mean over freshly sampled datasets.
    quantity: &'static str,
    #[serde(flatten)]
    estimate: RademacherEstimate,
    /// `4 R + sqrt(2 ln(2/delta) / n)` at the config's delta, when that
    /// delta lies in (0, 1).
    #[serde(skip_serializing_if = "Option::is_none")]
    eps_rademacher: Option<f64>,
}

/// The dataset is drawn from the config's training distribution:
/// substream 1 of the master seed selects the distribution where the
/// training mode is random, substream 2 drives the dataset outcomes,
/// substream 3 seeds the Monte Carlo sign vectors, and substream 4
/// drives the dataset-averaged estimate.
fn rademacher_output(
    config: &ExperimentConfig,
    method: Method,
    draws: u64,
    dataset_draws: Option<u64>,
) -> Result<RademacherOutput, Box<dyn Error>> {
    let class = config.build_class()?;
    let loss = config.build_loss();
    let seed = SeedSpec::new(config.seed);

    let p = match config.build_credal_set()? {
        Some(set) => {
            let mode = config.training.expect("credal config has a training mode");
            let selection_seed = SeedSpec::new(seed.stream(1).next_u64());
            select_training_distribution(&set, mode, Some(&class), &loss, selection_seed)?
        }
        None => config
            .build_classical_distribution()?
            .expect("config is classical or credal"),
    };
    let data = p.sample_dataset_with(config.n, &mut seed.stream(2));
    let a = LossClass::new(&class, &loss);

    let mut estimates = Vec::new();
    if matches!(method, Method::Exact | Method::Both) {
        if config.n > EXACT_ENUMERATION_LIMIT && method == Method::Exact {
            return Err(format!(
                "exact enumeration requires n <= {EXACT_ENUMERATION_LIMIT}, config has n = {}",
                config.n
            )
            .into());
        }
        if config.n <= EXACT_ENUMERATION_LIMIT {
            estimates.push(empirical_rademacher_exact(&a, &data)?);
        } else {
            eprintln!(
                "note: n = {} exceeds the exact enumeration limit {EXACT_ENUMERATION_LIMIT}; \
                 reporting Monte Carlo only",
                config.n
            );
        }
    }
    if matches!(method, Method::Mc | Method::Both) {
        let mc_seed = SeedSpec::new(seed.stream(3).next_u64());
        estimates.push(empirical_rademacher_mc(&a, &data, draws, mc_seed)?);
    }

    let mut rows: Vec<EstimateRow> = estimates
        .into_iter()
        .map(|estimate| EstimateRow {
            quantity: "empirical",
            eps_rademacher: eps_rademacher(estimate.value, config.delta, config.n).ok(),
            estimate,
        })
        .collect();
    if let Some(dataset_draws) = dataset_draws {
        let averaged_seed = SeedSpec::new(seed.stream(4).next_u64());
        let estimate =
            rademacher_complexity(&a, &p, config.n, dataset_draws, draws, averaged_seed)?;
        rows.push(EstimateRow {
            quantity: "averaged",
            eps_rademacher: eps_rademacher(estimate.value, config.delta, config.n).ok(),
            estimate,
        });
    }
    Ok(RademacherOutput {
        config_digest: config.digest(),
        master_seed: config.seed,
        n: config.n,
        delta: config.delta,
        estimates: rows,
    })
}

fn rademacher_csv(output: &RademacherOutput) -> String {
    let mut text =
        String::from("quantity,method,n,sample_count,value,std_error,eps_rademacher\n");
    for row in &output.estimates {
        let eps = row
            .eps_rademacher
            .map(|v| v.to_string())
            .unwrap_or_default();
        text.push_str(&format!(
            "{},{},{},{},{},{},{eps}\n",
            row.quantity,
            enum_name(&row.estimate.method),
            row.estimate.n,
            row.estimate.sample_count,
            row.estimate.value,
            row.estimate.std_error
        ));
    }
    text
}

#[derive(Serialize)]
struct RealisabilityOutput {
    config_digest: String,
    #[serde(flatten)]
    report: RealisabilityReport,
}

fn realisability_csv(output: &RealisabilityOutput) -> String {
    let mut text = String::from(
        "vertex,hypothesis,risk,realisable,credal_realisable,uniform_credal_realisable\n",
    );
    for row in &output.report.per_vertex {
        text.push_str(&format!(
            "{},{},{},{},{},{}\n",
            row.vertex,
            row.hypothesis,
            row.risk,
            row.realisable,
            output.report.credal_realisable,
            output.report.uniform_credal_realisable
        ));
    }
    text
}
