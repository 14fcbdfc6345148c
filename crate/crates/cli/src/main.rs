//! `kipg`: run the comparison, ablation and event studies, inspect trained
//! models and dump relational features.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use kipg_core::engine::{read_model, write_model};
use kipg_core::harness::report::to_csv;
use kipg_core::harness::{
    ablation_text, find_action, interpretability_report, run_ablation, run_comparison_with_models, run_event_study, top_k_agreement,
    HarnessError, ReportTable, Scenario,
};
use kipg_core::logic::{enumerate_clauses, write_clause_file, ModeDeclaration, Schema};
use kipg_core::Model;

#[derive(Parser)]
#[command(name = "kipg", version, about = "Knowledge-infused policy gradients for lockdown policies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Output {
    /// Emit CSV instead of an aligned table.
    #[arg(long)]
    csv: bool,
    /// Write the report to a file instead of stdout.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Compare every configured method at every budget and seed.
    Run {
        config: PathBuf,
        #[command(flatten)]
        output: Output,
        /// Per-seed rows instead of the mean/sd summary.
        #[arg(long)]
        rows: bool,
        /// Exit with status 3 if any run never reaches the pass threshold.
        #[arg(long)]
        strict: bool,
        /// Directory for the trained models, one file per method and seed.
        #[arg(long)]
        save_models: Option<PathBuf>,
    },
    /// Paired runs with history aggregation on and off.
    Ablation {
        config: PathBuf,
        #[command(flatten)]
        output: Output,
    },
    /// Batches to reach the pass threshold under the configured events.
    Events {
        config: PathBuf,
        #[command(flatten)]
        output: Output,
        #[arg(long)]
        strict: bool,
    },
    /// Rank a saved model's input clauses by weight.
    Explain {
        model: PathBuf,
        #[arg(long, default_value = "lockshop")]
        action: String,
        #[arg(long, default_value_t = 2)]
        top: usize,
        /// Scenario whose evaluation states and reference clauses are used
        /// to report how often the top clauses match the reference.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        csv: bool,
    },
    /// Print the clauses a scenario uses as features.
    Features {
        config: PathBuf,
        /// Every clause the mode declarations allow, before selection.
        #[arg(long)]
        all: bool,
    },
}

/// Failures split by exit status.
enum Failure {
    Config(anyhow::Error),
    Runtime(anyhow::Error),
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        // The message already carries the source; keep anyhow from repeating it.
        let flat = anyhow::anyhow!(e.to_string());
        match e {
            HarnessError::Sim(_) => Failure::Runtime(flat),
            _ => Failure::Config(flat),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(e.into())
    }
}

fn emit(output: &Output, text: &str) -> Result<(), Failure> {
    match &output.out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())).map_err(Failure::Runtime),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn table_text(table: &ReportTable, csv: bool, rows: bool) -> String {
    match (csv, rows) {
        (true, true) => table.to_csv(),
        (true, false) => table.summary_csv(),
        (false, true) => table.rows_text(),
        (false, false) => table.summary_text(),
    }
}

fn save_models(dir: &Path, models: &[kipg_core::harness::TrainedModel]) -> Result<(), Failure> {
    fs::create_dir_all(dir)?;
    for m in models {
        let path = dir.join(format!("{}-seed{}.model", m.method.name().to_lowercase(), m.seed));
        fs::write(&path, write_model(&m.model))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<u8, Failure> {
    match cli.command {
        Command::Run {
            config,
            output,
            rows,
            strict,
            save_models: dir,
        } => {
            let scn = Scenario::load(&config)?;
            let (table, models) = run_comparison_with_models(&scn)?;
            if let Some(dir) = dir {
                save_models(&dir, &models)?;
            }
            emit(&output, &table_text(&table, output.csv, rows))?;
            Ok(if strict && table.any_unreached() { 3 } else { 0 })
        }
        Command::Ablation { config, output } => {
            let scn = Scenario::load(&config)?;
            let (table, rows) = run_ablation(&scn)?;
            let text = if output.csv {
                to_csv(&rows)
            } else {
                format!("{}\n{}", table.title, ablation_text(&rows))
            };
            emit(&output, &text)?;
            Ok(0)
        }
        Command::Events { config, output, strict } => {
            let scn = Scenario::load(&config)?;
            let table = run_event_study(&scn)?;
            emit(&output, &table_text(&table, output.csv, true))?;
            Ok(if strict && table.any_unreached() { 3 } else { 0 })
        }
        Command::Explain {
            model,
            action,
            top,
            config,
            csv,
        } => {
            let text = fs::read_to_string(&model)
                .with_context(|| format!("reading {}", model.display()))
                .map_err(Failure::Config)?;
            let m: Model = read_model(&text)
                .with_context(|| format!("parsing {}", model.display()))
                .map_err(Failure::Config)?;
            let a = find_action(&m, &action)
                .ok_or_else(|| Failure::Config(anyhow::anyhow!("model has no head for action `{action}`")))?;
            let ranked: Vec<_> = interpretability_report(&m, a).into_iter().take(top).collect();
            if csv {
                print!("{}", to_csv(&ranked));
            } else {
                let body: Vec<Vec<String>> = ranked
                    .iter()
                    .map(|w| vec![w.clause_id.to_string(), format!("{:.4}", w.weight), w.clause.clone()])
                    .collect();
                print!("{}", kipg_core::harness::report::aligned(&["id", "weight", "clause"], &body));
            }
            if let Some(cfg) = config {
                let scn = Scenario::load(&cfg)?;
                let states = scn.eval_features(&scn.aggregator(scn.config.aggregation));
                let share = top_k_agreement(&m, a, &states, &scn.config.reference_features, top);
                println!(
                    "top-{top} equals clauses {:?} in {:.1}% of {} evaluation states",
                    scn.config.reference_features,
                    100.0 * share,
                    states.len()
                );
            }
            Ok(0)
        }
        Command::Features { config, all } => {
            let scn = Scenario::load(&config)?;
            let clauses = if all {
                enumerate_clauses(&Schema::full(), &ModeDeclaration::default(), scn.config.selection.max_len)
            } else {
                scn.clauses.clone()
            };
            print!("{}", write_clause_file(&clauses));
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Config(e)) => {
            eprintln!("kipg: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("kipg: {e:#}");
            ExitCode::from(1)
        }
    }
}
