#![allow(dead_code)]

use riskfold::{Graph, Schema, SparseTable, VarSet};

/// Table over `cards` whose rows are `raw` reduced modulo each cardinality.
pub fn table_from_raw(cards: &[u32], raw: &[Vec<u32>], population: u64) -> SparseTable {
    let rows = raw.iter().map(|r| r.iter().zip(cards).map(|(&x, &c)| x % c).collect()).collect();
    let schema = Schema::with_cardinalities(cards, population.max(raw.len() as u64)).unwrap();
    SparseTable::from_records(schema, rows).unwrap()
}

/// Chordality by definition: no induced cycle on four or more vertices.
pub fn has_no_long_induced_cycle(g: &Graph) -> bool {
    let m = g.vertex_count();
    for bits in 0u64..(1 << m) {
        let s = VarSet::from_bits(bits);
        if s.len() < 4 {
            continue;
        }
        let all_degree_two = s.iter().all(|v| g.neighbors(v).intersection(s).len() == 2);
        if all_degree_two && connected_within(g, s) {
            return false;
        }
    }
    true
}

fn connected_within(g: &Graph, s: VarSet) -> bool {
    let Some(start) = s.first() else { return true };
    let mut seen = VarSet::singleton(start);
    let mut frontier = seen;
    while !frontier.is_empty() {
        let mut next = VarSet::EMPTY;
        for v in frontier {
            next = next.union(g.neighbors(v).intersection(s));
        }
        frontier = next.difference(seen);
        seen = seen.union(next);
    }
    seen == s
}

/// Maximal cliques by Bron–Kerbosch with pivoting, sorted.
pub fn bron_kerbosch(g: &Graph) -> Vec<VarSet> {
    fn rec(g: &Graph, r: VarSet, mut p: VarSet, mut x: VarSet, out: &mut Vec<VarSet>) {
        if p.is_empty() && x.is_empty() {
            out.push(r);
            return;
        }
        let pivot = p.union(x).iter().max_by_key(|&u| g.neighbors(u).intersection(p).len()).unwrap();
        for v in p.difference(g.neighbors(pivot)) {
            let nv = g.neighbors(v);
            rec(g, r.with(v), p.intersection(nv), x.intersection(nv), out);
            p.remove(v);
            x.insert(v);
        }
    }
    let mut out = Vec::new();
    rec(g, VarSet::EMPTY, g.vertices(), VarSet::EMPTY, &mut out);
    out.sort();
    out
}

/// Every labelled chordal graph on `m` vertices.
pub fn all_chordal(m: usize) -> Vec<Graph> {
    let slots = m * m.saturating_sub(1) / 2;
    (0u64..1 << slots)
        .map(|mask| Graph::from_edge_mask(m, mask))
        .filter(riskfold::graph::is_chordal)
        .collect()
}

/// Every cell of the index space, variable 0 varying fastest.
pub fn all_cells(cards: &[u32]) -> Vec<Vec<u32>> {
    let total: usize = cards.iter().map(|&c| c as usize).product();
    (0..total)
        .map(|mut k| {
            cards
                .iter()
                .map(|&c| {
                    let i = (k % c as usize) as u32;
                    k /= c as usize;
                    i
                })
                .collect()
        })
        .collect()
}

pub fn project(cell: &[u32], a: VarSet) -> Vec<u32> {
    a.iter().map(|v| cell[v]).collect()
}
