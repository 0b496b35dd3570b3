//! Data swapping that keeps every clique marginal of a decomposable model fixed.
//!
//! For a triple `(C, C', S)` with `S = C ∩ C'` separating `C ∖ S` from `C' ∖ S`,
//! two records that agree on `S` can exchange the coordinates of every
//! component of `G ∖ S` touching `C ∖ S`. Each maximal clique lies on one side
//! of `S` (plus `S`), so the multiset of clique-marginal cells is unchanged.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::FittedModel;
use crate::graph::{CliqueDecomposition, Graph};
use crate::microdata::SparseTable;
use crate::risk::{risky_records, RiskReport};
use crate::varset::VarSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SwapTriple {
    pub clique: VarSet,
    pub other: VarSet,
    pub separator: VarSet,
}

/// Pairs of distinct cliques whose intersection is a separator of the model,
/// one triple per unordered pair, in clique-sequence order.
pub fn enumerate_triples(decomposition: &CliqueDecomposition) -> Vec<SwapTriple> {
    let cliques = decomposition.cliques();
    let mut out = Vec::new();
    for (a, &c) in cliques.iter().enumerate() {
        for &d in &cliques[a + 1..] {
            let s = c.intersection(d);
            if decomposition.multiplicity(s) > 0 {
                out.push(SwapTriple { clique: c, other: d, separator: s });
            }
        }
    }
    out
}

/// Whether removing `S` disconnects `C ∖ S` from `C' ∖ S`.
///
/// Only then does exchanging the side of `C` between two records that agree on
/// `S` leave every clique marginal unchanged while altering both records. A
/// separator can equal `C ∩ C'` without separating the pair: in the model with
/// cliques {1,2,6},{1,6,7},{2,6,8},{3,6,7},{4,6},{5,6}, removing 6 leaves
/// 2-1-7-3 connected.
pub fn separates(g: &Graph, t: &SwapTriple) -> bool {
    let side = side_of(g, t.separator, t.clique);
    t.other.difference(t.separator).is_disjoint(side)
}

/// Union of the components of `G ∖ S` that meet `C ∖ S`.
fn side_of(g: &Graph, s: VarSet, c: VarSet) -> VarSet {
    let core = c.difference(s);
    g.components_without(s)
        .into_iter()
        .filter(|comp| !comp.is_disjoint(core))
        .fold(VarSet::EMPTY, VarSet::union)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SwapPlan {
    pub record_i: usize,
    pub record_j: usize,
    pub triple: SwapTriple,
    /// Variables exchanged between the two records.
    pub side: VarSet,
    pub before_i: Vec<u32>,
    pub before_j: Vec<u32>,
    pub after_i: Vec<u32>,
    pub after_j: Vec<u32>,
}

fn agree_on(a: &[u32], b: &[u32], vars: VarSet) -> bool {
    vars.iter().all(|v| a[v] == b[v])
}

/// `i_S = j_S`, `i_C ≠ j_C`, `i_C' ≠ j_C'`.
pub fn satisfies_swap_condition(i: &[u32], j: &[u32], t: &SwapTriple) -> bool {
    agree_on(i, j, t.separator) && !agree_on(i, j, t.clique) && !agree_on(i, j, t.other)
}

/// Usable triples of a model with their exchange sides, computed once.
pub struct SwapContext {
    triples: Vec<(SwapTriple, VarSet)>,
}

impl SwapContext {
    /// Keeps the triples that [`separates`] accepts.
    pub fn new(model: &FittedModel) -> Self {
        let g = model.graph();
        let triples = enumerate_triples(model.decomposition())
            .into_iter()
            .filter(|t| separates(g, t))
            .map(|t| (t, side_of(g, t.separator, t.clique)))
            .collect();
        SwapContext { triples }
    }

    pub fn triples(&self) -> impl Iterator<Item = &SwapTriple> {
        self.triples.iter().map(|(t, _)| t)
    }

    /// First `(j, triple)` in record order × triple order satisfying the swap condition.
    /// `None` when no record qualifies.
    pub fn find_partner(&self, table: &SparseTable, i: usize) -> Result<Option<SwapPlan>> {
        if i >= table.len() {
            return Err(Error::Usage(format!("record index {i} out of range ({} records)", table.len())));
        }
        if self.triples.is_empty() {
            return Ok(None);
        }
        let ri = table.record(i);
        for (j, rj) in table.records().enumerate() {
            if j == i {
                continue;
            }
            for &(triple, side) in &self.triples {
                if satisfies_swap_condition(ri, rj, &triple) {
                    let (after_i, after_j) = exchange(ri, rj, side);
                    return Ok(Some(SwapPlan {
                        record_i: i,
                        record_j: j,
                        triple,
                        side,
                        before_i: ri.to_vec(),
                        before_j: rj.to_vec(),
                        after_i,
                        after_j,
                    }));
                }
            }
        }
        Ok(None)
    }
}

fn exchange(a: &[u32], b: &[u32], side: VarSet) -> (Vec<u32>, Vec<u32>) {
    let mut a2 = a.to_vec();
    let mut b2 = b.to_vec();
    for v in side {
        a2[v] = b[v];
        b2[v] = a[v];
    }
    (a2, b2)
}

pub fn find_partner(table: &SparseTable, model: &FittedModel, i: usize) -> Result<Option<SwapPlan>> {
    SwapContext::new(model).find_partner(table, i)
}

/// Exchanges the plan's side between its two records.
///
/// The records must be in the plan's `before` state, or in its `after` state, in
/// which case the swap is undone; anything else is a stale plan.
pub fn apply_swap(table: &SparseTable, plan: &SwapPlan) -> Result<SparseTable> {
    let (i, j) = (plan.record_i, plan.record_j);
    if i >= table.len() || j >= table.len() || i == j {
        return Err(Error::Conflict(format!("plan names records {i} and {j}, table has {}", table.len())));
    }
    let (ri, rj) = (table.record(i), table.record(j));
    let forward = ri == plan.before_i.as_slice() && rj == plan.before_j.as_slice();
    let backward = ri == plan.after_i.as_slice() && rj == plan.after_j.as_slice();
    if !forward && !backward {
        return Err(Error::Conflict(format!("records {i} and {j} no longer match the swap plan")));
    }
    let (new_i, new_j) = exchange(ri, rj, plan.side);
    let m = table.schema().len();
    let mut rows = table.raw_records().to_vec();
    rows[i * m..(i + 1) * m].copy_from_slice(&new_i);
    rows[j * m..(j + 1) * m].copy_from_slice(&new_j);
    table.with_rows(rows)
}

/// Whether every clique marginal of `model` is identical on both tables.
pub fn marginals_preserved(model: &FittedModel, before: &SparseTable, after: &SparseTable) -> bool {
    model
        .decomposition()
        .cliques()
        .iter()
        .all(|&c| before.marginal(c) == after.marginal(c))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum SwapOutcome {
    Swapped {
        partner: usize,
        triple: SwapTriple,
        exchanged: VarSet,
        before: Vec<u32>,
        after: Vec<u32>,
        partner_before: Vec<u32>,
        partner_after: Vec<u32>,
        /// `p̂` of the record's new cell under the (unchanged) model.
        p_hat_after: f64,
        partner_p_hat_after: f64,
    },
    /// No partner satisfies the sufficient condition; a finer criterion might still find one.
    Unswappable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwapLogEntry {
    pub record: usize,
    pub p_hat: f64,
    #[serde(flatten)]
    pub outcome: SwapOutcome,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SwapLog {
    pub entries: Vec<SwapLogEntry>,
}

impl SwapLog {
    pub fn swapped(&self) -> usize {
        self.entries.iter().filter(|e| matches!(e.outcome, SwapOutcome::Swapped { .. })).count()
    }
}

/// Swaps up to `max_records` of the riskiest sample uniques, one after another,
/// each against the already-updated table.
pub fn protect(
    table: &SparseTable,
    model: &FittedModel,
    report: &RiskReport,
    threshold: f64,
    max_records: usize,
) -> Result<(SparseTable, SwapLog)> {
    let ctx = SwapContext::new(model);
    let mut current = table.clone();
    let mut log = SwapLog::default();
    for entry in risky_records(report, threshold)?.into_iter().take(max_records) {
        let outcome = match ctx.find_partner(&current, entry.record)? {
            Some(plan) => {
                current = apply_swap(&current, &plan)?;
                SwapOutcome::Swapped {
                    partner: plan.record_j,
                    triple: plan.triple,
                    exchanged: plan.side,
                    p_hat_after: model.mle_cell(&plan.after_i),
                    partner_p_hat_after: model.mle_cell(&plan.after_j),
                    before: plan.before_i,
                    after: plan.after_i,
                    partner_before: plan.before_j,
                    partner_after: plan.after_j,
                }
            }
            None => SwapOutcome::Unswappable,
        };
        log.entries.push(SwapLogEntry { record: entry.record, p_hat: entry.p_hat, outcome });
    }
    if !marginals_preserved(model, table, &current) {
        return Err(Error::Contract("swapping changed a clique marginal".into()));
    }
    Ok((current, log))
}
