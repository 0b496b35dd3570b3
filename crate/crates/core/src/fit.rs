//! Closed-form maximum likelihood fit of decomposable log-linear models.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use crate::error::{Error, Result};
use crate::graph::{decompose, CliqueDecomposition, Graph};
use crate::microdata::{Marginal, Schema, SparseTable};
use crate::varset::VarSet;

/// Memoized marginals of one table, shareable across threads.
///
/// Model search refits many graphs that share most of their cliques, so each
/// marginal is computed once per table.
pub struct MarginalCache<'a> {
    table: &'a SparseTable,
    map: RwLock<HashMap<VarSet, Arc<Marginal>>>,
    terms: RwLock<HashMap<VarSet, f64>>,
}

impl<'a> MarginalCache<'a> {
    pub fn new(table: &'a SparseTable) -> Self {
        MarginalCache { table, map: RwLock::new(HashMap::new()), terms: RwLock::new(HashMap::new()) }
    }

    pub fn table(&self) -> &'a SparseTable {
        self.table
    }

    pub fn get(&self, a: VarSet) -> Arc<Marginal> {
        if let Some(m) = self.map.read().expect("cache lock").get(&a) {
            return m.clone();
        }
        let computed = Arc::new(self.table.marginal(a));
        self.map.write().expect("cache lock").entry(a).or_insert(computed).clone()
    }

    /// `Σ n(i_A) log(n(i_A)/n)` over the marginal on `a`; zero for the empty set.
    pub fn entropy_term(&self, a: VarSet) -> f64 {
        if let Some(&t) = self.terms.read().expect("cache lock").get(&a) {
            return t;
        }
        let t = marginal_term(&self.get(a), self.table.total());
        *self.terms.write().expect("cache lock").entry(a).or_insert(t)
    }

    /// AIC of the model with this decomposition, from cached marginal terms only.
    pub fn aic_of(&self, decomposition: &CliqueDecomposition) -> Result<f64> {
        let (_, df_reported) = df(decomposition, self.table.schema())?;
        let cliques: f64 = decomposition.cliques().iter().map(|&c| self.entropy_term(c)).sum();
        let seps: f64 = decomposition.separators().iter().map(|&(s, nu)| nu as f64 * self.entropy_term(s)).sum();
        Ok(aic(cliques - seps, df_reported))
    }
}

fn marginal_term(m: &Marginal, n: u64) -> f64 {
    if m.vars().is_empty() {
        return 0.0;
    }
    let ln_n = (n as f64).ln();
    m.counts_in_key_order().into_iter().map(|c| c as f64 * ((c as f64).ln() - ln_n)).sum()
}

/// A decomposable model fitted to a table.
#[derive(Debug, Clone)]
pub struct FittedModel {
    graph: Graph,
    decomposition: CliqueDecomposition,
    clique_marginals: Vec<Arc<Marginal>>,
    separator_marginals: Vec<Arc<Marginal>>,
    n: u64,
    loglik: f64,
    df_raw: i64,
    df_reported: i64,
    aic: f64,
}

/// Degrees of freedom `Σ_C Π_{δ∈C} I_δ − Σ_S ν(S) Π_{δ∈S} I_δ`, and that value
/// minus one for the sum-to-one constraint (the figure used in AIC).
pub fn df(decomposition: &CliqueDecomposition, schema: &Schema) -> Result<(i64, i64)> {
    if decomposition.vertex_count() != schema.len() {
        return Err(Error::Contract(format!(
            "decomposition has {} vertices, schema has {} variables",
            decomposition.vertex_count(),
            schema.len()
        )));
    }
    let overflow = || Error::Domain("degrees of freedom overflow i64".into());
    let mut raw: i128 = 0;
    for &c in decomposition.cliques() {
        raw = raw.checked_add(i128::try_from(schema.marginal_size(c)).map_err(|_| overflow())?).ok_or_else(overflow)?;
    }
    for &(s, nu) in decomposition.separators() {
        let term = i128::try_from(schema.marginal_size(s)).map_err(|_| overflow())?;
        raw = raw.checked_sub(term.checked_mul(nu as i128).ok_or_else(overflow)?).ok_or_else(overflow)?;
    }
    let raw = i64::try_from(raw).map_err(|_| overflow())?;
    Ok((raw, raw - 1))
}

/// `−2·loglik + 2·df`.
pub fn aic(loglik: f64, df_reported: i64) -> f64 {
    -2.0 * loglik + 2.0 * df_reported as f64
}

/// Fits the decomposable model of the chordal graph `g`.
pub fn fit(table: &SparseTable, g: &Graph) -> Result<FittedModel> {
    fit_cached(&MarginalCache::new(table), g)
}

pub fn fit_cached(cache: &MarginalCache<'_>, g: &Graph) -> Result<FittedModel> {
    let decomposition = decompose(g)?;
    fit_decomposition(cache, decomposition)
}

pub(crate) fn fit_decomposition(cache: &MarginalCache<'_>, decomposition: CliqueDecomposition) -> Result<FittedModel> {
    let table = cache.table();
    let schema = table.schema();
    if decomposition.vertex_count() != schema.len() {
        return Err(Error::Contract(format!(
            "graph has {} vertices, schema has {} variables",
            decomposition.vertex_count(),
            schema.len()
        )));
    }
    if table.is_empty() {
        return Err(Error::Domain("cannot fit a model to an empty table".into()));
    }
    let (df_raw, df_reported) = df(&decomposition, schema)?;
    let clique_marginals = decomposition.cliques().iter().map(|&c| cache.get(c)).collect();
    let separator_marginals = decomposition.separators().iter().map(|&(s, _)| cache.get(s)).collect();
    let mut model = FittedModel {
        graph: decomposition.graph(),
        decomposition,
        clique_marginals,
        separator_marginals,
        n: table.total(),
        loglik: 0.0,
        df_raw,
        df_reported,
        aic: 0.0,
    };
    let cliques: f64 = model.decomposition.cliques().iter().map(|&c| cache.entropy_term(c)).sum();
    let seps: f64 = model.decomposition.separators().iter().map(|&(s, nu)| nu as f64 * cache.entropy_term(s)).sum();
    let loglik = cliques - seps;
    model.loglik = loglik;
    model.aic = aic(loglik, df_reported);
    Ok(model)
}

impl FittedModel {
    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn decomposition(&self) -> &CliqueDecomposition {
        &self.decomposition
    }

    pub fn clique_marginals(&self) -> &[Arc<Marginal>] {
        &self.clique_marginals
    }

    /// Parallel to `decomposition().separators()`.
    pub fn separator_marginals(&self) -> &[Arc<Marginal>] {
        &self.separator_marginals
    }

    pub fn sample_size(&self) -> u64 {
        self.n
    }

    /// Maximized log likelihood `Σ n(i) log p̂(i)`.
    ///
    /// Evaluated as [`FittedModel::loglik_from_marginals`] (cells summed in index
    /// order), so any table with the same clique marginals gives the identical value.
    pub fn loglik(&self) -> f64 {
        self.loglik
    }

    pub fn df_raw(&self) -> i64 {
        self.df_raw
    }

    pub fn df_reported(&self) -> i64 {
        self.df_reported
    }

    pub fn aic(&self) -> f64 {
        self.aic
    }

    pub fn half_aic(&self) -> f64 {
        self.aic / 2.0
    }

    /// `log p̂(i)`, or `None` when some clique marginal of `i` is unobserved.
    pub fn log_mle_cell(&self, cell: &[u32]) -> Option<f64> {
        let ln_n = (self.n as f64).ln();
        let mut lp = 0.0;
        for m in &self.clique_marginals {
            let c = m.count_of(cell);
            if c == 0 {
                return None;
            }
            lp += (c as f64).ln() - ln_n;
        }
        for (m, &(_, nu)) in self.separator_marginals.iter().zip(self.decomposition.separators()) {
            // positive whenever the clique marginals are
            let c = m.count_of(cell);
            lp -= nu as f64 * ((c as f64).ln() - ln_n);
        }
        Some(lp.min(0.0))
    }

    /// `p̂(i) = Π_C r(i_C) / Π_S r(i_S)^ν(S)`, or 0 when a clique marginal of `i` is zero.
    pub fn mle_cell(&self, cell: &[u32]) -> f64 {
        self.log_mle_cell(cell).map_or(0.0, f64::exp)
    }

    /// `Σ_C Σ n(i_C) log r(i_C) − Σ_S ν(S) Σ n(i_S) log r(i_S)`, evaluated from the
    /// marginal tables alone.
    pub fn loglik_from_marginals(&self) -> f64 {
        let term = |m: &Marginal| marginal_term(m, self.n);
        let cliques: f64 = self.clique_marginals.iter().map(|m| term(m)).sum();
        let seps: f64 = self
            .separator_marginals
            .iter()
            .zip(self.decomposition.separators())
            .map(|(m, &(_, nu))| nu as f64 * term(m))
            .sum();
        cliques - seps
    }

    /// `Σ n(i) log p̂(i)` summed directly over the occupied cells of `table`.
    pub fn loglik_from_records(&self, table: &SparseTable) -> f64 {
        table
            .cells()
            .map(|(cell, count)| {
                let lp = self.log_mle_cell(cell).expect("an occupied cell has positive clique marginals");
                count as f64 * lp
            })
            .sum()
    }
}
