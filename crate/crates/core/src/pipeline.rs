//! Stage drivers: ingest → search → fit → risk → swap → emit.

use std::fmt;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::fit::{fit, FittedModel};
use crate::microdata::{read_csv, Schema, SparseTable};
use crate::report::{to_json, ModelDocument, RiskDocument, SearchReport, SwapDocument};
use crate::risk::{estimate_population_uniques, risky_records};
use crate::search::multi_start;
use crate::swap::protect;

pub const MODELS_TXT: &str = "models.txt";
pub const MODELS_JSON: &str = "models.json";
pub const MODEL_FILE: &str = "model.json";
pub const RISK_TXT: &str = "risk.txt";
pub const RISK_JSON: &str = "risk.json";
pub const SWAP_LOG_TXT: &str = "swap_log.txt";
pub const SWAP_LOG_JSON: &str = "swap_log.json";
pub const SWAPPED_CSV: &str = "swapped.csv";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Ingest,
    Search,
    Fit,
    Risk,
    Swap,
    Emit,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Ingest => "ingest",
            Stage::Search => "search",
            Stage::Fit => "fit",
            Stage::Risk => "risk",
            Stage::Swap => "swap",
            Stage::Emit => "emit",
        })
    }
}

#[derive(Debug, thiserror::Error)]
#[error("stage {stage}: {source}")]
pub struct StageError {
    pub stage: Stage,
    #[source]
    pub source: Error,
}

impl StageError {
    pub fn exit_code(&self) -> i32 {
        self.source.exit_code()
    }
}

trait InStage<T> {
    fn stage(self, stage: Stage) -> std::result::Result<T, StageError>;
}

impl<T> InStage<T> for Result<T> {
    fn stage(self, stage: Stage) -> std::result::Result<T, StageError> {
        self.map_err(|source| StageError { stage, source })
    }
}

/// Inputs shared by every stage.
#[derive(Debug, Clone)]
pub struct DataSource {
    pub schema: PathBuf,
    pub data: PathBuf,
    pub has_header: bool,
    /// Overrides the schema's population size when set.
    pub population_size: Option<u64>,
}

impl DataSource {
    pub fn load(&self) -> Result<SparseTable> {
        let mut schema = Schema::load(&self.schema)?;
        if let Some(n) = self.population_size {
            schema = schema.with_population_size(n)?;
        }
        read_csv(&self.data, schema, self.has_header)
    }
}

#[derive(Debug, Clone)]
pub struct SearchSettings {
    pub restarts: usize,
    pub seed: u64,
    pub coin_prob: f64,
    pub top: usize,
}

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub source: DataSource,
    pub search: SearchSettings,
    pub risk_threshold: f64,
    pub max_records: usize,
    pub out_dir: PathBuf,
}

impl PipelineConfig {
    fn validate(&self) -> Result<()> {
        if self.search.restarts == 0 || self.search.top == 0 || self.max_records == 0 {
            return Err(Error::Usage("restarts, top and max-records must be positive".into()));
        }
        if !(self.risk_threshold > 0.0 && self.risk_threshold <= 1.0) {
            return Err(Error::Usage(format!("risk threshold {} outside (0, 1]", self.risk_threshold)));
        }
        if !(self.search.coin_prob > 0.0 && self.search.coin_prob <= 1.0) {
            return Err(Error::Usage(format!("coin probability {} outside (0, 1]", self.search.coin_prob)));
        }
        Ok(())
    }
}

/// Files written so far; removed again if a later stage fails.
#[derive(Debug, Default)]
pub struct Outputs {
    written: Vec<PathBuf>,
}

impl Outputs {
    pub fn write(&mut self, path: PathBuf, contents: &str) -> Result<()> {
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
        std::fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
        self.written.push(path);
        Ok(())
    }

    pub fn paths(&self) -> &[PathBuf] {
        &self.written
    }

    fn discard(&mut self) {
        for p in self.written.drain(..) {
            let _ = std::fs::remove_file(p);
        }
    }
}

/// Runs `body`, deleting whatever it wrote if it fails.
pub fn with_cleanup<T>(
    body: impl FnOnce(&mut Outputs) -> std::result::Result<T, StageError>,
) -> std::result::Result<(T, Vec<PathBuf>), StageError> {
    let mut outputs = Outputs::default();
    match body(&mut outputs) {
        Ok(v) => Ok((v, outputs.written)),
        Err(e) => {
            outputs.discard();
            Err(e)
        }
    }
}

/// Multi-start search; returns the report and the best model.
pub fn search_stage(table: &SparseTable, s: &SearchSettings) -> std::result::Result<(SearchReport, FittedModel), StageError> {
    let results = multi_start(table, s.restarts, s.seed, s.coin_prob).stage(Stage::Search)?;
    let report = SearchReport::new(&results, table.schema(), s.restarts, s.seed, s.coin_prob, s.top);
    let best = results.into_iter().next().expect("at least one restart").model;
    Ok((report, best))
}

pub fn write_model_report(out: &mut Outputs, dir: &Path, report: &SearchReport) -> Result<()> {
    out.write(dir.join(MODELS_TXT), &report.render_text())?;
    out.write(dir.join(MODELS_JSON), &to_json(report))?;
    out.write(dir.join(MODEL_FILE), &to_json(&report.models[0]))
}

/// Refits a persisted model on `table`.
pub fn load_model(path: &Path, table: &SparseTable) -> Result<FittedModel> {
    if !path.exists() {
        return Err(Error::Usage(format!("model file {} not found; run `fit` first", path.display())));
    }
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let doc = ModelDocument::from_json(&text)?;
    doc.check_schema(table.schema())?;
    fit(table, &doc.graph()?)
}

pub fn risk_stage(table: &SparseTable, model: &FittedModel, threshold: f64) -> Result<RiskDocument> {
    let report = estimate_population_uniques(table, model)?;
    let risky = risky_records(&report, threshold)?;
    Ok(RiskDocument::new(model, report, risky, threshold))
}

pub fn write_risk_report(out: &mut Outputs, dir: &Path, doc: &RiskDocument, table: &SparseTable) -> Result<()> {
    out.write(dir.join(RISK_TXT), &doc.render_text(table))?;
    out.write(dir.join(RISK_JSON), &to_json(doc))
}

pub fn swap_stage(
    table: &SparseTable,
    model: &FittedModel,
    risk: &RiskDocument,
    threshold: f64,
    max_records: usize,
) -> Result<(SparseTable, SwapDocument)> {
    let (swapped, log) = protect(table, model, &risk.report, threshold, max_records)?;
    let after = estimate_population_uniques(&swapped, model)?;
    let risky_after = risky_records(&after, threshold)?.len();
    let doc = SwapDocument {
        threshold,
        max_records,
        attempted: log.entries.len(),
        swapped: log.swapped(),
        estimate_total_before: risk.report.estimate_total,
        estimate_total_after: after.estimate_total,
        risky_after,
        log,
    };
    Ok((swapped, doc))
}

/// Writes the swap log and the swapped data, with a header line if the input had one.
pub fn write_swap_outputs(
    out: &mut Outputs,
    dir: &Path,
    doc: &SwapDocument,
    swapped: &SparseTable,
    header: bool,
) -> Result<()> {
    out.write(dir.join(SWAP_LOG_TXT), &doc.render_text(swapped))?;
    out.write(dir.join(SWAP_LOG_JSON), &to_json(doc))?;
    let mut csv = String::new();
    if header {
        let names: Vec<&str> = swapped.schema().variables().iter().map(|v| v.name.as_str()).collect();
        csv.push_str(&names.join(","));
        csv.push('\n');
    }
    csv.push_str(&swapped.to_csv());
    out.write(dir.join(SWAPPED_CSV), &csv)
}

#[derive(Debug)]
pub struct PipelineSummary {
    pub records: usize,
    pub sample_uniques: usize,
    pub estimate_total: f64,
    pub risky: usize,
    pub swapped: usize,
    pub files: Vec<PathBuf>,
}

/// All three stages: model selection, risk evaluation, swapping.
pub fn run_pipeline(cfg: &PipelineConfig) -> std::result::Result<PipelineSummary, StageError> {
    cfg.validate().stage(Stage::Ingest)?;
    let table = cfg.source.load().stage(Stage::Ingest)?;
    let dir = cfg.out_dir.as_path();
    let (summary, files) = with_cleanup(|out| {
        let (search, _) = search_stage(&table, &cfg.search)?;
        // the chosen model goes through the same persisted form later stages read
        let best = fit(&table, &search.models[0].graph().stage(Stage::Fit)?).stage(Stage::Fit)?;
        write_model_report(out, dir, &search).stage(Stage::Emit)?;

        let risk = risk_stage(&table, &best, cfg.risk_threshold).stage(Stage::Risk)?;
        write_risk_report(out, dir, &risk, &table).stage(Stage::Emit)?;

        let (swapped, swap_doc) =
            swap_stage(&table, &best, &risk, cfg.risk_threshold, cfg.max_records).stage(Stage::Swap)?;
        write_swap_outputs(out, dir, &swap_doc, &swapped, cfg.source.has_header).stage(Stage::Emit)?;
        Ok(PipelineSummary {
            records: table.len(),
            sample_uniques: risk.sample_uniques,
            estimate_total: risk.estimate_total,
            risky: risk.risky.len(),
            swapped: swap_doc.swapped,
            files: Vec::new(),
        })
    })?;
    Ok(PipelineSummary { files, ..summary })
}
