//! Command-line front end. Every flag can also be set through a `RISKFOLD_*` variable.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::microdata::Schema;
use crate::oracle::{count_chordal, synth_table};
use crate::pipeline::{
    load_model, risk_stage, run_pipeline, search_stage, swap_stage, with_cleanup, write_model_report,
    write_risk_report, write_swap_outputs, DataSource, PipelineConfig, SearchSettings, Stage, StageError,
};
use crate::search::DEFAULT_COIN_PROB;
use crate::varset::VarSet;

#[derive(Debug, Parser)]
#[command(name = "riskfold", version, about = "Identification risk and marginal-preserving swapping for categorical microdata")]
pub struct Cli {
    /// Worker threads for parallel stages (default: all cores).
    #[arg(long, global = true, env = "RISKFOLD_THREADS")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Model search, risk evaluation and swapping in one pass.
    Run(RunArgs),
    /// Model search only; writes the model report and model file.
    Fit(FitArgs),
    /// Risk evaluation under a saved model.
    Risk(RiskArgs),
    /// Swap risky records under a saved model.
    Swap(SwapArgs),
    /// Reference computations.
    #[command(subcommand)]
    Oracle(OracleCommand),
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// Schema file (TOML).
    #[arg(long, env = "RISKFOLD_SCHEMA")]
    pub schema: PathBuf,
    /// Records, one comma-separated line each.
    #[arg(long, env = "RISKFOLD_DATA")]
    pub data: PathBuf,
    /// The data file starts with a header line.
    #[arg(long, env = "RISKFOLD_HEADER")]
    pub header: bool,
    /// Population size N, overriding the schema.
    #[arg(long, env = "RISKFOLD_POPULATION")]
    pub population: Option<u64>,
    #[arg(long, env = "RISKFOLD_OUT_DIR", default_value = "riskfold-out")]
    pub out_dir: PathBuf,
}

impl DataArgs {
    fn source(&self) -> DataSource {
        DataSource {
            schema: self.schema.clone(),
            data: self.data.clone(),
            has_header: self.header,
            population_size: self.population,
        }
    }
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    #[arg(long, env = "RISKFOLD_RESTARTS", default_value_t = 100)]
    pub restarts: usize,
    #[arg(long, env = "RISKFOLD_SEED", default_value_t = 1)]
    pub seed: u64,
    /// Probability that a random starting graph opens a new clique for each vertex.
    #[arg(long, env = "RISKFOLD_COIN_PROB", default_value_t = DEFAULT_COIN_PROB)]
    pub coin_prob: f64,
    /// Number of models listed in the report.
    #[arg(long, env = "RISKFOLD_TOP", default_value_t = 2)]
    pub top: usize,
}

impl SearchArgs {
    fn settings(&self) -> SearchSettings {
        SearchSettings { restarts: self.restarts, seed: self.seed, coin_prob: self.coin_prob, top: self.top }
    }
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub search: SearchArgs,
    #[arg(long, env = "RISKFOLD_RISK_THRESHOLD", default_value_t = 1e-7)]
    pub risk_threshold: f64,
    #[arg(long, env = "RISKFOLD_MAX_RECORDS", default_value_t = 50)]
    pub max_records: usize,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub search: SearchArgs,
}

#[derive(Debug, Args)]
pub struct RiskArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Model file written by `fit` or `run`.
    #[arg(long, env = "RISKFOLD_MODEL")]
    pub model: PathBuf,
    #[arg(long, env = "RISKFOLD_RISK_THRESHOLD", default_value_t = 1e-7)]
    pub risk_threshold: f64,
}

#[derive(Debug, Args)]
pub struct SwapArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, env = "RISKFOLD_MODEL")]
    pub model: PathBuf,
    #[arg(long, env = "RISKFOLD_RISK_THRESHOLD", default_value_t = 1e-7)]
    pub risk_threshold: f64,
    #[arg(long, env = "RISKFOLD_MAX_RECORDS", default_value_t = 50)]
    pub max_records: usize,
}

#[derive(Debug, Subcommand)]
pub enum OracleCommand {
    /// Count labelled chordal graphs on m vertices by exhaustive enumeration.
    CountChordal {
        #[arg(long)]
        m: usize,
    },
    /// Sample a synthetic dataset from a random model over the given cliques.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// 1-based cliques, e.g. "1,2;2,3;4".
    #[arg(long)]
    pub cliques: String,
    /// Cardinalities, e.g. "3,2,4,5".
    #[arg(long)]
    pub cardinalities: String,
    /// Number of records.
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Population size written to the schema (default: 100·n).
    #[arg(long)]
    pub population: Option<u64>,
    /// Output prefix; writes PREFIX.csv and PREFIX.toml.
    #[arg(long)]
    pub out: PathBuf,
}

fn parse_list<T: std::str::FromStr>(text: &str, what: &str) -> Result<Vec<T>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| Error::Usage(format!("bad {what} {s:?}"))))
        .collect()
}

fn parse_cliques(text: &str, m: usize) -> Result<Vec<VarSet>> {
    text.split(';')
        .filter(|c| !c.trim().is_empty())
        .map(|c| {
            let labels: Vec<usize> = parse_list(c, "vertex")?;
            labels
                .into_iter()
                .map(|v| {
                    if v == 0 || v > m {
                        Err(Error::Usage(format!("clique vertex {v} outside 1..={m}")))
                    } else {
                        Ok(v - 1)
                    }
                })
                .collect()
        })
        .collect()
}

fn ensure_exists(path: &Path, what: &str) -> Result<()> {
    if path.exists() {
        Ok(())
    } else {
        Err(Error::Usage(format!("{what} {} not found", path.display())))
    }
}

fn stage<T>(stage: Stage, r: Result<T>) -> std::result::Result<T, StageError> {
    r.map_err(|source| StageError { stage, source })
}

fn report_files(files: &[PathBuf]) {
    for f in files {
        println!("wrote {}", f.display());
    }
}

fn execute(command: Command) -> std::result::Result<(), StageError> {
    match command {
        Command::Run(a) => {
            let cfg = PipelineConfig {
                source: a.data.source(),
                search: a.search.settings(),
                risk_threshold: a.risk_threshold,
                max_records: a.max_records,
                out_dir: a.data.out_dir.clone(),
            };
            let summary = run_pipeline(&cfg)?;
            println!(
                "{} records, {} sample uniques, estimated population uniques {:.3}, {} risky, {} swapped",
                summary.records, summary.sample_uniques, summary.estimate_total, summary.risky, summary.swapped
            );
            report_files(&summary.files);
        }
        Command::Fit(a) => {
            let settings = a.search.settings();
            if settings.restarts == 0 || settings.top == 0 {
                return Err(StageError { stage: Stage::Search, source: Error::Usage("restarts and top must be positive".into()) });
            }
            let table = stage(Stage::Ingest, a.data.source().load())?;
            let (_, files) = with_cleanup(|out| {
                let (report, _) = search_stage(&table, &settings)?;
                stage(Stage::Emit, write_model_report(out, &a.data.out_dir, &report))
            })?;
            report_files(&files);
        }
        Command::Risk(a) => {
            stage(Stage::Risk, ensure_exists(&a.model, "model file"))?;
            let table = stage(Stage::Ingest, a.data.source().load())?;
            let model = stage(Stage::Fit, load_model(&a.model, &table))?;
            let (_, files) = with_cleanup(|out| {
                let doc = stage(Stage::Risk, risk_stage(&table, &model, a.risk_threshold))?;
                stage(Stage::Emit, write_risk_report(out, &a.data.out_dir, &doc, &table))
            })?;
            report_files(&files);
        }
        Command::Swap(a) => {
            stage(Stage::Swap, ensure_exists(&a.model, "model file"))?;
            if a.max_records == 0 {
                return Err(StageError { stage: Stage::Swap, source: Error::Usage("max-records must be positive".into()) });
            }
            let table = stage(Stage::Ingest, a.data.source().load())?;
            let model = stage(Stage::Fit, load_model(&a.model, &table))?;
            let (_, files) = with_cleanup(|out| {
                let risk = stage(Stage::Risk, risk_stage(&table, &model, a.risk_threshold))?;
                let (swapped, doc) = stage(Stage::Swap, swap_stage(&table, &model, &risk, a.risk_threshold, a.max_records))?;
                stage(Stage::Emit, write_swap_outputs(out, &a.data.out_dir, &doc, &swapped, a.data.header))
            })?;
            report_files(&files);
        }
        Command::Oracle(OracleCommand::CountChordal { m }) => {
            let count = stage(Stage::Fit, count_chordal(m))?;
            println!("{count}");
        }
        Command::Oracle(OracleCommand::Synth(a)) => synth(&a).map_err(|source| StageError { stage: Stage::Emit, source })?,
    }
    Ok(())
}

fn synth(a: &SynthArgs) -> Result<()> {
    let cards: Vec<u32> = parse_list(&a.cardinalities, "cardinality")?;
    let cliques = parse_cliques(&a.cliques, cards.len())?;
    let table = synth_table(&cliques, &cards, a.n, a.seed)?;
    let population = a.population.unwrap_or(100 * a.n.max(1) as u64);
    let schema = Schema::with_cardinalities(&cards, population)?;
    let csv = a.out.with_extension("csv");
    let toml = a.out.with_extension("toml");
    std::fs::write(&csv, table.to_csv()).map_err(|e| Error::io(&csv, e))?;
    std::fs::write(&toml, schema.to_toml_string()).map_err(|e| Error::io(&toml, e))?;
    println!("wrote {}\nwrote {}", csv.display(), toml.display());
    Ok(())
}

/// Parses arguments, runs the command and maps failures to exit codes
/// (1 for data and domain errors, 2 for usage errors).
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.threads {
        Some(0) => Err(StageError { stage: Stage::Ingest, source: Error::Usage("threads must be positive".into()) }),
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| execute(cli.command)),
            Err(e) => Err(StageError { stage: Stage::Ingest, source: Error::Usage(format!("thread pool: {e}")) }),
        },
        None => execute(cli.command),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("riskfold: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
