//! AIC hill climbing over chordal graphs, seeded by random chordal graphs.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::{fit_cached, fit_decomposition, FittedModel, MarginalCache};
use crate::graph::{decompose, is_chordal, CliqueDecomposition, Graph};
use crate::microdata::SparseTable;
use crate::varset::VarSet;

pub const DEFAULT_COIN_PROB: f64 = 0.5;

/// Random chordal graph on `m` vertices with a fair coin.
pub fn random_chordal(m: usize, seed: u64) -> CliqueDecomposition {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_chordal_with(m, DEFAULT_COIN_PROB, &mut rng)
}

/// Grows a chordal graph one vertex at a time. With probability `coin_prob` the
/// new vertex `j` becomes a singleton clique; otherwise a clique `C` and a
/// nonempty subset `C'` of it are drawn uniformly, and `j` either joins `C`
/// (when `C' = C`) or forms the new clique `C' ∪ {j}`.
pub fn random_chordal_with<R: Rng + ?Sized>(m: usize, coin_prob: f64, rng: &mut R) -> CliqueDecomposition {
    let cliques = random_clique_set(m, coin_prob, rng);
    let g = Graph::from_cliques(m, &cliques);
    let d = decompose(&g).expect("union of a growing clique sequence is chordal");
    debug_assert_eq!(
        {
            let mut a = d.cliques().to_vec();
            a.sort();
            a
        },
        {
            let mut b = cliques.clone();
            b.sort();
            b
        }
    );
    d
}

pub(crate) fn random_clique_set<R: Rng + ?Sized>(m: usize, coin_prob: f64, rng: &mut R) -> Vec<VarSet> {
    let mut cliques: Vec<VarSet> = Vec::new();
    for j in 0..m {
        let heads = rng.gen_bool(coin_prob.clamp(0.0, 1.0));
        if heads || cliques.is_empty() {
            cliques.push(VarSet::singleton(j));
            continue;
        }
        let k = rng.gen_range(0..cliques.len());
        let c = cliques[k];
        let sub = random_nonempty_subset(c, rng);
        if sub == c {
            cliques[k] = c.with(j);
        } else {
            cliques.push(sub.with(j));
        }
    }
    cliques
}

fn random_nonempty_subset<R: Rng + ?Sized>(c: VarSet, rng: &mut R) -> VarSet {
    let members = c.to_vec();
    let count = 1u64 << members.len();
    // uniform over the 2^|C| - 1 nonempty subsets
    let pick = rng.gen_range(1..count);
    members.iter().enumerate().filter(|(b, _)| pick >> b & 1 == 1).map(|(_, &v)| v).collect()
}

/// One accepted state of a hill climb.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    pub aic: f64,
    /// Edge toggled to reach this state (0-based); `None` for the starting graph.
    pub edge: Option<(usize, usize)>,
    /// Whether the toggle added (`true`) or removed the edge.
    pub added: bool,
}

#[derive(Debug, Clone)]
pub struct SearchResult {
    pub model: FittedModel,
    pub restarts_used: usize,
    /// One trace per restart that ended at this model, in restart order.
    pub traces: Vec<Vec<TraceStep>>,
    /// Restart indices (0-based) that ended at this model.
    pub restarts: Vec<usize>,
    pub times_chosen: usize,
}

/// Best-improvement local search over single-edge toggles.
///
/// Each sweep toggles every vertex pair in lexicographic order; chordal results
/// are scored by AIC and the one with the smallest AIC strictly below the current best
/// is taken (earliest in scan order on ties). Stops when a sweep finds no
/// improvement.
pub fn hill_climb(table: &SparseTable, start: &Graph) -> Result<SearchResult> {
    hill_climb_cached(&MarginalCache::new(table), start)
}

pub fn hill_climb_cached(cache: &MarginalCache<'_>, start: &Graph) -> Result<SearchResult> {
    let m = cache.table().schema().len();
    if start.vertex_count() != m {
        return Err(Error::Contract(format!("start graph has {} vertices, schema has {m}", start.vertex_count())));
    }
    if !is_chordal(start) {
        return Err(Error::Contract(format!("start graph is not chordal: {start:?}")));
    }
    let mut current = fit_cached(cache, start)?;
    let mut current_score = cache.aic_of(current.decomposition())?;
    let mut trace = vec![TraceStep { aic: current.aic(), edge: None, added: false }];
    let slots: Vec<(usize, usize)> = Graph::edge_slots(m).collect();
    loop {
        let graph = current.graph().clone();
        // Candidates are scored concurrently; the move is chosen sequentially in scan order.
        let candidates: Vec<Option<(CliqueDecomposition, f64)>> = slots
            .par_iter()
            .map(|&(u, v)| {
                let mut g = graph.clone();
                g.toggle_in_place(u, v);
                match decompose(&g) {
                    Ok(d) => cache.aic_of(&d).map(|score| Some((d, score))),
                    Err(_) => Ok(None),
                }
            })
            .collect::<Result<_>>()?;
        let mut best: Option<(usize, CliqueDecomposition)> = None;
        let mut best_score = current_score;
        for (k, cand) in candidates.into_iter().enumerate() {
            if let Some((d, score)) = cand {
                if score < best_score {
                    best_score = score;
                    best = Some((k, d));
                }
            }
        }
        match best {
            Some((k, d)) => {
                let (u, v) = slots[k];
                current = fit_decomposition(cache, d)?;
                current_score = best_score;
                trace.push(TraceStep { aic: current.aic(), edge: Some((u, v)), added: !graph.has_edge(u, v) });
            }
            None => break,
        }
    }
    Ok(SearchResult { model: current, restarts_used: 1, traces: vec![trace], restarts: vec![0], times_chosen: 1 })
}

/// Start graph for one restart: a random chordal graph with randomly permuted labels.
pub fn restart_start_graph(m: usize, coin_prob: f64, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = random_chordal_with(m, coin_prob, &mut rng);
    let mut perm: Vec<usize> = (0..m).collect();
    perm.shuffle(&mut rng);
    d.graph().relabel(&perm)
}

/// Per-restart seeds derived from the master seed.
pub fn restart_seeds(seed: u64, restarts: usize) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..restarts).map(|_| rng.gen()).collect()
}

/// Runs `restarts` hill climbs from random chordal starts and returns each distinct
/// final model once, with how often it was reached, sorted by AIC ascending.
pub fn multi_start(table: &SparseTable, restarts: usize, seed: u64, coin_prob: f64) -> Result<Vec<SearchResult>> {
    if restarts == 0 {
        return Err(Error::Usage("restarts must be at least 1".into()));
    }
    if !(0.0..=1.0).contains(&coin_prob) {
        return Err(Error::Usage(format!("coin probability {coin_prob} outside [0, 1]")));
    }
    let m = table.schema().len();
    let cache = MarginalCache::new(table);
    let seeds = restart_seeds(seed, restarts);
    let runs: Vec<SearchResult> = seeds
        .par_iter()
        .map(|&s| hill_climb_cached(&cache, &restart_start_graph(m, coin_prob, s)))
        .collect::<Result<_>>()?;

    let mut distinct: Vec<SearchResult> = Vec::new();
    for (k, run) in runs.into_iter().enumerate() {
        let trace = run.traces.into_iter().next().expect("one trace per run");
        match distinct.iter_mut().find(|d| d.model.graph() == run.model.graph()) {
            Some(d) => {
                d.times_chosen += 1;
                d.traces.push(trace);
                d.restarts.push(k);
            }
            None => distinct.push(SearchResult {
                model: run.model,
                restarts_used: restarts,
                traces: vec![trace],
                restarts: vec![k],
                times_chosen: 1,
            }),
        }
    }
    distinct.sort_by(|a, b| a.model.aic().total_cmp(&b.model.aic()));
    Ok(distinct)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::mcs;
    use crate::microdata::{ingest_csv, Schema};

    #[test]
    fn single_vertex() {
        let d = random_chordal(1, 7);
        assert_eq!(d.cliques(), &[VarSet::singleton(0)]);
    }

    #[test]
    fn all_heads_gives_edgeless_graph() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let d = random_chordal_with(6, 1.0, &mut rng);
        assert_eq!(d.cliques().len(), 6);
        assert_eq!(d.graph().edge_count(), 0);
    }

    #[test]
    fn all_tails_gives_a_connected_graph() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let d = random_chordal_with(7, 0.0, &mut rng);
        assert_eq!(d.graph().component_count(), 1);
    }

    #[test]
    fn random_graphs_are_chordal_and_cliques_match() {
        for seed in 0..10_000u64 {
            let m = 1 + (seed % 8) as usize;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut cliques = random_clique_set(m, 0.5, &mut rng);
            for (a, &x) in cliques.iter().enumerate() {
                for (b, &y) in cliques.iter().enumerate() {
                    assert!(a == b || !x.is_subset(y), "nested cliques {x} ⊆ {y}");
                }
            }
            let g = Graph::from_cliques(m, &cliques);
            assert!(mcs(&g).is_chordal);
            let mut found = decompose(&g).unwrap().cliques().to_vec();
            found.sort();
            cliques.sort();
            assert_eq!(found, cliques);
        }
    }

    fn small_table() -> SparseTable {
        let schema = Schema::with_cardinalities(&[2, 2, 2], 1000).unwrap();
        let rows = "0,0,0\n0,0,0\n0,0,1\n1,1,1\n1,1,1\n1,1,0\n0,1,1\n1,0,0\n0,0,0\n1,1,1\n";
        ingest_csv(rows, schema, false).unwrap()
    }

    #[test]
    fn local_optimum_is_a_fixed_point() {
        let t = small_table();
        let first = hill_climb(&t, &Graph::empty(3)).unwrap();
        let again = hill_climb(&t, first.model.graph()).unwrap();
        assert_eq!(again.model.graph(), first.model.graph());
        assert_eq!(again.traces[0].len(), 1);
    }

    #[test]
    fn trace_strictly_decreases() {
        let t = small_table();
        for start in [Graph::empty(3), Graph::complete(3)] {
            let r = hill_climb(&t, &start).unwrap();
            for w in r.traces[0].windows(2) {
                assert!(w[1].aic < w[0].aic);
            }
        }
    }

    #[test]
    fn non_chordal_start_rejected() {
        let schema = Schema::with_cardinalities(&[2, 2, 2, 2], 100).unwrap();
        let t = ingest_csv("0,0,0,0\n1,1,1,1\n", schema, false).unwrap();
        let c4 = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        assert!(matches!(hill_climb(&t, &c4), Err(Error::Contract(_))));
    }

    #[test]
    fn multi_start_deduplicates() {
        let t = small_table();
        let one = multi_start(&t, 1, 5, 0.5).unwrap();
        assert_eq!(one.len(), 1);
        assert_eq!(one[0].times_chosen, 1);
        let many = multi_start(&t, 12, 5, 0.5).unwrap();
        assert_eq!(many.iter().map(|r| r.times_chosen).sum::<usize>(), 12);
        for w in many.windows(2) {
            assert!(w[0].model.aic() <= w[1].model.aic());
        }
        assert!(matches!(multi_start(&t, 0, 5, 0.5), Err(Error::Usage(_))));
    }
}
