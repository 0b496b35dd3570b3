//! Report documents: structured JSON for tooling and fixed-layout text for people.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::FittedModel;
use crate::graph::Graph;
use crate::microdata::{Schema, SparseTable};
use crate::risk::{RiskEntry, RiskReport, BAND_EXPONENTS};
use crate::search::{SearchResult, TraceStep};
use crate::swap::{SwapLog, SwapOutcome};
use crate::varset::VarSet;

pub const MODEL_FORMAT: &str = "riskfold-model/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparatorEntry {
    pub set: VarSet,
    pub multiplicity: usize,
}

/// Where a model came from, so later stages can be traced back to the search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub seed: u64,
    pub restarts: usize,
    pub coin_prob: f64,
    /// 1-based rank by AIC among the distinct search results.
    pub rank: usize,
}

/// A fitted model as persisted between stages. Vertices are 1-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDocument {
    pub format: String,
    pub variables: Vec<String>,
    pub edges: Vec<[usize; 2]>,
    pub cliques: Vec<VarSet>,
    pub separators: Vec<SeparatorEntry>,
    pub loglik: f64,
    pub df_raw: i64,
    pub df: i64,
    pub aic: f64,
    pub half_aic: f64,
    pub times_chosen: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Provenance>,
}

impl ModelDocument {
    pub fn new(model: &FittedModel, schema: &Schema, times_chosen: usize, provenance: Option<Provenance>) -> Self {
        let d = model.decomposition();
        ModelDocument {
            format: MODEL_FORMAT.to_string(),
            variables: schema.variables().iter().map(|v| v.name.clone()).collect(),
            edges: model.graph().edges().into_iter().map(|(u, v)| [u + 1, v + 1]).collect(),
            cliques: d.cliques().to_vec(),
            separators: d.separators().iter().map(|&(set, multiplicity)| SeparatorEntry { set, multiplicity }).collect(),
            loglik: model.loglik(),
            df_raw: model.df_raw(),
            df: model.df_reported(),
            aic: model.aic(),
            half_aic: model.half_aic(),
            times_chosen,
            provenance,
        }
    }

    pub fn graph(&self) -> Result<Graph> {
        let edges: Vec<(usize, usize)> = self
            .edges
            .iter()
            .map(|&[u, v]| {
                if u == 0 || v == 0 {
                    Err(Error::Domain("model file vertices are 1-based".into()))
                } else {
                    Ok((u - 1, v - 1))
                }
            })
            .collect::<Result<_>>()?;
        Graph::from_edges(self.variables.len(), &edges)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ModelDocument = serde_json::from_str(text).map_err(|e| Error::Parse { line: e.line(), message: e.to_string() })?;
        if doc.format != MODEL_FORMAT {
            return Err(Error::Domain(format!("unsupported model format {:?}", doc.format)));
        }
        Ok(doc)
    }

    /// Checks the document against the schema it is about to be used with.
    pub fn check_schema(&self, schema: &Schema) -> Result<()> {
        let names: Vec<&str> = schema.variables().iter().map(|v| v.name.as_str()).collect();
        if names != self.variables.iter().map(String::as_str).collect::<Vec<_>>() {
            return Err(Error::Usage(format!(
                "model variables {:?} do not match schema variables {:?}",
                self.variables, names
            )));
        }
        Ok(())
    }

    /// Separators repeated by multiplicity, the way the model table lists them.
    fn separator_list(&self) -> String {
        let mut parts = Vec::new();
        for s in &self.separators {
            for _ in 0..s.multiplicity {
                parts.push(s.set.to_string());
            }
        }
        if parts.is_empty() {
            "(none)".into()
        } else {
            parts.join(",")
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceDocument {
    pub restart: usize,
    /// Rank of the model this restart ended at.
    pub final_rank: usize,
    pub steps: Vec<TraceStepDocument>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceStepDocument {
    pub aic: f64,
    /// 1-based vertex pair toggled to reach this state; absent for the start.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edge: Option<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub action: Option<String>,
}

impl From<&TraceStep> for TraceStepDocument {
    fn from(step: &TraceStep) -> Self {
        TraceStepDocument {
            aic: step.aic,
            edge: step.edge.map(|(u, v)| [u + 1, v + 1]),
            action: step.edge.map(|_| if step.added { "add".to_string() } else { "remove".to_string() }),
        }
    }
}

/// Outcome of a multi-start search: the top models and every restart's trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchReport {
    pub restarts: usize,
    pub seed: u64,
    pub coin_prob: f64,
    pub distinct_models: usize,
    pub models: Vec<ModelDocument>,
    pub traces: Vec<TraceDocument>,
}

impl SearchReport {
    pub fn new(results: &[SearchResult], schema: &Schema, restarts: usize, seed: u64, coin_prob: f64, top: usize) -> Self {
        let models = results
            .iter()
            .take(top)
            .enumerate()
            .map(|(k, r)| {
                let prov = Provenance { seed, restarts, coin_prob, rank: k + 1 };
                ModelDocument::new(&r.model, schema, r.times_chosen, Some(prov))
            })
            .collect();
        let mut traces: Vec<TraceDocument> = results
            .iter()
            .enumerate()
            .flat_map(|(rank, r)| {
                r.restarts.iter().zip(&r.traces).map(move |(&restart, steps)| TraceDocument {
                    restart,
                    final_rank: rank + 1,
                    steps: steps.iter().map(TraceStepDocument::from).collect(),
                })
            })
            .collect();
        traces.sort_by_key(|t| t.restart);
        SearchReport { restarts, seed, coin_prob, distinct_models: results.len(), models, traces }
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "Model search: {} restarts, seed {}, coin probability {}, {} distinct local optima",
            self.restarts, self.seed, self.coin_prob, self.distinct_models
        );
        for (k, doc) in self.models.iter().enumerate() {
            out.push('\n');
            out.push_str(&render_model(doc, &format!("Model {}", k + 1)));
        }
        out.push_str("\nConvergence traces (AIC after each accepted toggle)\n");
        for t in &self.traces {
            let _ = write!(out, "  restart {:>3} -> model {:>3}: ", t.restart + 1, t.final_rank);
            let steps: Vec<String> = t
                .steps
                .iter()
                .map(|s| match (&s.edge, s.action.as_deref()) {
                    (Some([u, v]), Some("add")) => format!("+{u}-{v} {:.2}", s.aic),
                    (Some([u, v]), _) => format!("-{u}-{v} {:.2}", s.aic),
                    (None, _) => format!("start {:.2}", s.aic),
                })
                .collect();
            let _ = writeln!(out, "{}", steps.join(" -> "));
        }
        out
    }
}

const LABEL_WIDTH: usize = 40;

fn row(out: &mut String, label: &str, value: impl std::fmt::Display) {
    let _ = writeln!(out, "  {label:<LABEL_WIDTH$}{value}");
}

/// One model in the layout of a chosen-models table.
pub fn render_model(doc: &ModelDocument, title: &str) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{title}");
    row(&mut out, "number of times chosen", doc.times_chosen);
    row(&mut out, "AIC/2", format!("{:.2}", doc.half_aic));
    row(&mut out, "AIC", format!("{:.2}", doc.aic));
    row(&mut out, "log likelihood", format!("{:.2}", doc.loglik));
    row(&mut out, "degrees of freedom", doc.df);
    let cliques: Vec<String> = doc.cliques.iter().map(VarSet::to_string).collect();
    row(&mut out, "cliques", cliques.join(","));
    row(&mut out, "separators", doc.separator_list());
    let edges: Vec<String> = doc.edges.iter().map(|[u, v]| format!("{u}-{v}")).collect();
    row(&mut out, "edges", if edges.is_empty() { "(none)".to_string() } else { edges.join(" ") });
    out
}

/// Risk results as persisted: the full report plus the records selected by the threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskDocument {
    pub model_edges: Vec<[usize; 2]>,
    pub threshold: f64,
    pub sample_uniques: usize,
    pub estimate_total: f64,
    pub report: RiskReport,
    pub risky: Vec<RiskEntry>,
}

impl RiskDocument {
    pub fn new(model: &FittedModel, report: RiskReport, risky: Vec<RiskEntry>, threshold: f64) -> Self {
        RiskDocument {
            model_edges: model.graph().edges().into_iter().map(|(u, v)| [u + 1, v + 1]).collect(),
            threshold,
            sample_uniques: report.entries.len(),
            estimate_total: report.estimate_total,
            report,
            risky,
        }
    }

    pub fn render_text(&self, table: &SparseTable) -> String {
        let r = &self.report;
        let mut out = String::new();
        out.push_str("Identification risk of sample uniques\n");
        row(&mut out, "sample size n", r.sample_size);
        row(&mut out, "population size N", r.population_size);
        row(&mut out, "sample uniques", self.sample_uniques);
        row(&mut out, "estimated # of population uniques", format!("{:.3}", r.estimate_total));
        out.push('\n');
        row(&mut out, "cell probability estimates", "frequencies");
        row(&mut out, "above 10^-2", r.bands.above);
        for (k, &e) in BAND_EXPONENTS.iter().enumerate() {
            row(&mut out, &format!("10^-{} to 10^-{}", e, e + 1), r.bands.bands[k]);
        }
        row(&mut out, "10^-10 and below", r.bands.below);
        out.push('\n');
        let _ = writeln!(out, "Records with estimated cell probability <= {:e}: {}", self.threshold, self.risky.len());
        if !self.risky.is_empty() {
            let _ = writeln!(out, "  {:>8}  {:>12}  {:>15}  cell", "record", "p_hat", "pop_unique_prob");
            for e in &self.risky {
                let _ = writeln!(
                    out,
                    "  {:>8}  {:>12.4e}  {:>15.6}  {}",
                    e.record,
                    e.p_hat,
                    e.pop_unique_prob,
                    table.format_cell(&e.cell)
                );
            }
        }
        out
    }
}

/// Swap results with the risk summary of the swapped table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwapDocument {
    pub threshold: f64,
    pub max_records: usize,
    pub attempted: usize,
    pub swapped: usize,
    pub log: SwapLog,
    pub estimate_total_before: f64,
    pub estimate_total_after: f64,
    pub risky_after: usize,
}

impl SwapDocument {
    pub fn render_text(&self, table: &SparseTable) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "Swapping: {} of {} risky records swapped (threshold {:e}, at most {})",
            self.swapped, self.attempted, self.threshold, self.max_records
        );
        row(&mut out, "estimated # of population uniques", format!("{:.3} -> {:.3}", self.estimate_total_before, self.estimate_total_after));
        row(&mut out, "records at or below threshold after", self.risky_after);
        out.push('\n');
        for e in &self.log.entries {
            match &e.outcome {
                SwapOutcome::Swapped { partner, triple, exchanged, after, partner_after, p_hat_after, .. } => {
                    let _ = writeln!(
                        out,
                        "  record {} (p_hat {:.4e}) <-> record {} via C={} C'={} S={}, exchanged {}; now {} (p_hat {:.4e}) / {}",
                        e.record,
                        e.p_hat,
                        partner,
                        triple.clique,
                        triple.other,
                        triple.separator,
                        exchanged,
                        table.format_cell(after),
                        p_hat_after,
                        table.format_cell(partner_after),
                    );
                }
                SwapOutcome::Unswappable => {
                    let _ = writeln!(
                        out,
                        "  record {} (p_hat {:.4e}) unswappable: no record agrees on a separator while differing on both cliques",
                        e.record, e.p_hat
                    );
                }
            }
        }
        out
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}
