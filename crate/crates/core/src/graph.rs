//! Undirected graphs on the variable set and their clique structure.
//!
//! Vertices are 0-based and adjacency is a bitmask per vertex, which bounds
//! graphs to [`MAX_VARIABLES`] vertices.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::varset::{VarSet, MAX_VARIABLES};

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Graph {
    adj: Vec<VarSet>,
}

impl Graph {
    /// Edgeless graph on `m` vertices.
    pub fn empty(m: usize) -> Self {
        assert!(m <= MAX_VARIABLES, "graph on {m} vertices exceeds {MAX_VARIABLES}");
        Graph { adj: vec![VarSet::EMPTY; m] }
    }

    pub fn complete(m: usize) -> Self {
        let mut g = Graph::empty(m);
        for v in 0..m {
            g.adj[v] = VarSet::full(m).difference(VarSet::singleton(v));
        }
        g
    }

    pub fn from_edges(m: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if m > MAX_VARIABLES {
            return Err(Error::Usage(format!("graph on {m} vertices exceeds {MAX_VARIABLES}")));
        }
        let mut g = Graph::empty(m);
        for &(u, v) in edges {
            g.check_pair(u, v)?;
            g.adj[u].insert(v);
            g.adj[v].insert(u);
        }
        Ok(g)
    }

    /// Union of complete subgraphs on the given vertex sets.
    pub fn from_cliques(m: usize, cliques: &[VarSet]) -> Self {
        let mut g = Graph::empty(m);
        for &c in cliques {
            for v in c {
                g.adj[v] = g.adj[v].union(c.difference(VarSet::singleton(v)));
            }
        }
        g
    }

    /// Graph whose edges are the set bits of `mask`, indexed in [`Graph::edge_slots`] order.
    pub fn from_edge_mask(m: usize, mask: u64) -> Self {
        let mut g = Graph::empty(m);
        for (k, (u, v)) in Graph::edge_slots(m).enumerate() {
            if mask >> k & 1 == 1 {
                g.adj[u].insert(v);
                g.adj[v].insert(u);
            }
        }
        g
    }

    /// All vertex pairs `(u, v)`, `u < v`, in lexicographic order: the edges of the complete graph.
    pub fn edge_slots(m: usize) -> impl Iterator<Item = (usize, usize)> {
        (0..m).flat_map(move |u| (u + 1..m).map(move |v| (u, v)))
    }

    fn check_pair(&self, u: usize, v: usize) -> Result<()> {
        let m = self.adj.len();
        if u >= m || v >= m {
            return Err(Error::Usage(format!("edge ({}, {}) outside {m} vertices", u + 1, v + 1)));
        }
        if u == v {
            return Err(Error::Usage(format!("self-loop on vertex {}", u + 1)));
        }
        Ok(())
    }

    pub fn vertex_count(&self) -> usize {
        self.adj.len()
    }

    pub fn vertices(&self) -> VarSet {
        VarSet::full(self.adj.len())
    }

    pub fn neighbors(&self, v: usize) -> VarSet {
        self.adj[v]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.adj.len() && self.adj[u].contains(v)
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(|a| a.len()).sum::<usize>() / 2
    }

    /// Edges `(u, v)` with `u < v`, lexicographic.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        Graph::edge_slots(self.adj.len()).filter(|&(u, v)| self.adj[u].contains(v)).collect()
    }

    /// Copy with edge `{u, v}` added if absent, removed if present.
    pub fn toggle_edge(&self, u: usize, v: usize) -> Result<Graph> {
        self.check_pair(u, v)?;
        let mut g = self.clone();
        g.toggle_in_place(u, v);
        Ok(g)
    }

    pub(crate) fn toggle_in_place(&mut self, u: usize, v: usize) {
        if self.adj[u].contains(v) {
            self.adj[u].remove(v);
            self.adj[v].remove(u);
        } else {
            self.adj[u].insert(v);
            self.adj[v].insert(u);
        }
    }

    /// Vertices renamed by `perm`: vertex `v` becomes `perm[v]`.
    pub fn relabel(&self, perm: &[usize]) -> Graph {
        let mut g = Graph::empty(self.adj.len());
        for (u, v) in self.edges() {
            g.adj[perm[u]].insert(perm[v]);
            g.adj[perm[v]].insert(perm[u]);
        }
        g
    }

    pub fn is_complete(&self, s: VarSet) -> bool {
        s.iter().all(|v| s.difference(VarSet::singleton(v)).is_subset(self.adj[v]))
    }

    /// Connected components of the subgraph induced on `vertices ∖ s`, ordered by smallest vertex.
    pub fn components_without(&self, s: VarSet) -> Vec<VarSet> {
        let mut remaining = self.vertices().difference(s);
        let mut out = Vec::new();
        while let Some(start) = remaining.first() {
            let mut comp = VarSet::singleton(start);
            let mut frontier = comp;
            while !frontier.is_empty() {
                let mut next = VarSet::EMPTY;
                for v in frontier {
                    next = next.union(self.adj[v]);
                }
                frontier = next.intersection(remaining).difference(comp);
                comp = comp.union(frontier);
            }
            remaining = remaining.difference(comp);
            out.push(comp);
        }
        out
    }

    pub fn component_count(&self) -> usize {
        self.components_without(VarSet::EMPTY).len()
    }

    /// Edge-list text: the vertex count on the first line, then one `u v` pair
    /// per line with 1-based vertices.
    pub fn to_edge_list(&self) -> String {
        let mut s = format!("{}\n", self.adj.len());
        for (u, v) in self.edges() {
            let _ = writeln!(s, "{} {}", u + 1, v + 1);
        }
        s
    }

    /// Parses [`Graph::to_edge_list`] output. Blank lines and `#` comments are ignored.
    pub fn from_edge_list(text: &str) -> Result<Graph> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(k, l)| (k + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());
        let (first, header) =
            lines.next().ok_or(Error::Parse { line: 1, message: "missing vertex-count header".into() })?;
        let m: usize = header.parse().map_err(|_| Error::Parse {
            line: first,
            message: format!("vertex count {header:?} is not an integer"),
        })?;
        let mut edges = Vec::new();
        for (line, l) in lines {
            let parts: Vec<&str> = l.split_whitespace().collect();
            let parsed: Option<Vec<usize>> = parts.iter().map(|p| p.parse().ok()).collect();
            match parsed.as_deref() {
                Some(&[u, v]) if u >= 1 && v >= 1 => edges.push((u - 1, v - 1)),
                _ => {
                    return Err(Error::Parse { line, message: format!("expected `u v` with 1-based vertices, got {l:?}") })
                }
            }
        }
        Graph::from_edges(m, &edges)
    }
}

impl std::fmt::Debug for Graph {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let edges: Vec<String> = self.edges().iter().map(|(u, v)| format!("{}-{}", u + 1, v + 1)).collect();
        write!(f, "Graph({}; {})", self.adj.len(), edges.join(" "))
    }
}

/// Output of maximum cardinality search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct McsResult {
    /// Vertices in visiting order; the reverse is an elimination ordering.
    pub order: Vec<usize>,
    /// Whether the reverse of `order` is a perfect elimination ordering.
    pub is_chordal: bool,
}

/// Maximum cardinality search with lowest-index tie-breaking.
pub fn mcs(g: &Graph) -> McsResult {
    let identity: Vec<usize> = (0..g.vertex_count()).collect();
    mcs_with_priority(g, &identity)
}

/// Maximum cardinality search; among vertices of equal label the one with the
/// smallest `priority` is visited first.
pub fn mcs_with_priority(g: &Graph, priority: &[usize]) -> McsResult {
    let m = g.vertex_count();
    let mut label = vec![0usize; m];
    let mut visited = VarSet::EMPTY;
    let mut order = Vec::with_capacity(m);
    let mut is_chordal = true;
    for _ in 0..m {
        let v = visited_complement(m, visited)
            .max_by(|&a, &b| label[a].cmp(&label[b]).then(priority[b].cmp(&priority[a])))
            .expect("unvisited vertex remains");
        // Parent check: the earlier neighbours of v, minus the latest-visited one,
        // must all be adjacent to that latest one.
        let earlier = g.adj[v].intersection(visited);
        if let Some(parent) = order.iter().rev().copied().find(|&u| earlier.contains(u)) {
            let rest = earlier.difference(VarSet::singleton(parent));
            if !rest.is_subset(g.adj[parent]) {
                is_chordal = false;
            }
        }
        visited.insert(v);
        order.push(v);
        for w in g.adj[v].difference(visited) {
            label[w] += 1;
        }
    }
    McsResult { order, is_chordal }
}

fn visited_complement(m: usize, visited: VarSet) -> impl Iterator<Item = usize> {
    VarSet::full(m).difference(visited).iter()
}

pub fn is_chordal(g: &Graph) -> bool {
    mcs(g).is_chordal
}

/// Maximal cliques in perfect-sequence order with their separators.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliqueDecomposition {
    vertex_count: usize,
    cliques: Vec<VarSet>,
    /// `S_j = C_j ∩ (C_1 ∪ … ∪ C_{j-1})` for `j ≥ 2`, in sequence order.
    sequence_separators: Vec<VarSet>,
    /// Distinct separators with multiplicities, in order of first occurrence.
    separators: Vec<(VarSet, usize)>,
}

impl CliqueDecomposition {
    /// Builds the decomposition from cliques already in a perfect sequence.
    pub fn from_perfect_sequence(vertex_count: usize, cliques: Vec<VarSet>) -> Result<Self> {
        let mut seen = VarSet::EMPTY;
        let mut sequence_separators = Vec::with_capacity(cliques.len().saturating_sub(1));
        for (j, &c) in cliques.iter().enumerate() {
            if j > 0 {
                let s = c.intersection(seen);
                if !cliques[..j].iter().any(|&k| s.is_subset(k)) {
                    return Err(Error::Contract(format!("clique sequence violates the running intersection property at {c}")));
                }
                sequence_separators.push(s);
            }
            seen = seen.union(c);
        }
        let mut separators: Vec<(VarSet, usize)> = Vec::new();
        for &s in &sequence_separators {
            match separators.iter_mut().find(|(t, _)| *t == s) {
                Some((_, nu)) => *nu += 1,
                None => separators.push((s, 1)),
            }
        }
        Ok(CliqueDecomposition { vertex_count, cliques, sequence_separators, separators })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn cliques(&self) -> &[VarSet] {
        &self.cliques
    }

    pub fn sequence_separators(&self) -> &[VarSet] {
        &self.sequence_separators
    }

    /// Distinct separators `S` with multiplicity `ν(S)`; the empty separator
    /// appears when the graph is disconnected.
    pub fn separators(&self) -> &[(VarSet, usize)] {
        &self.separators
    }

    pub fn multiplicity(&self, s: VarSet) -> usize {
        self.separators.iter().find(|(t, _)| *t == s).map_or(0, |&(_, nu)| nu)
    }

    pub fn graph(&self) -> Graph {
        Graph::from_cliques(self.vertex_count, &self.cliques)
    }
}

/// Cliques and separators of a chordal graph via maximum cardinality search.
pub fn decompose(g: &Graph) -> Result<CliqueDecomposition> {
    let identity: Vec<usize> = (0..g.vertex_count()).collect();
    decompose_with_priority(g, &identity)
}

pub fn decompose_with_priority(g: &Graph, priority: &[usize]) -> Result<CliqueDecomposition> {
    let McsResult { order, is_chordal } = mcs_with_priority(g, priority);
    if !is_chordal {
        return Err(Error::Contract(format!("graph is not chordal: {g:?}")));
    }
    // Each vertex with its earlier-visited neighbours spans a clique; the maximal
    // ones, in visiting order, form a perfect sequence.
    let mut visited = VarSet::EMPTY;
    let mut candidates = Vec::with_capacity(order.len());
    for &v in &order {
        candidates.push(g.adj[v].intersection(visited).with(v));
        visited.insert(v);
    }
    let cliques: Vec<VarSet> = candidates
        .iter()
        .enumerate()
        .filter(|&(k, &c)| !candidates.iter().enumerate().any(|(j, &d)| j != k && c.is_subset(d)))
        .map(|(_, &c)| c)
        .collect();
    CliqueDecomposition::from_perfect_sequence(g.vertex_count(), cliques)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(vs: &[usize]) -> VarSet {
        vs.iter().map(|v| v - 1).collect()
    }

    /// Model 1 of the worked census example, 1-based edges.
    pub(crate) fn model1() -> Graph {
        let cliques = [set(&[1, 2, 6]), set(&[1, 6, 7]), set(&[2, 6, 8]), set(&[3, 6, 7]), set(&[4, 6]), set(&[5, 6])];
        Graph::from_cliques(8, &cliques)
    }

    fn cycle4() -> Graph {
        Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap()
    }

    #[test]
    fn chordless_four_cycle() {
        assert!(!mcs(&cycle4()).is_chordal);
        assert!(matches!(decompose(&cycle4()), Err(Error::Contract(_))));
    }

    #[test]
    fn four_cycle_with_chord() {
        let g = cycle4().toggle_edge(0, 2).unwrap();
        assert!(mcs(&g).is_chordal);
        let d = decompose(&g).unwrap();
        let mut cliques = d.cliques().to_vec();
        cliques.sort();
        assert_eq!(cliques, vec![set(&[1, 2, 3]), set(&[1, 3, 4])]);
        assert_eq!(d.separators(), &[(set(&[1, 3]), 1)]);
    }

    #[test]
    fn complete_graphs_are_chordal() {
        for m in 0..10 {
            let g = Graph::complete(m);
            assert!(is_chordal(&g));
            if m > 0 {
                assert_eq!(decompose(&g).unwrap().cliques(), &[VarSet::full(m)]);
            }
        }
    }

    #[test]
    fn model1_decomposition() {
        let d = decompose(&model1()).unwrap();
        let mut cliques = d.cliques().to_vec();
        cliques.sort();
        let mut expected =
            vec![set(&[1, 2, 6]), set(&[1, 6, 7]), set(&[2, 6, 8]), set(&[3, 6, 7]), set(&[4, 6]), set(&[5, 6])];
        expected.sort();
        assert_eq!(cliques, expected);
        let mut seps = d.separators().to_vec();
        seps.sort();
        let mut want = vec![(set(&[1, 6]), 1), (set(&[2, 6]), 1), (set(&[6, 7]), 1), (set(&[6]), 2)];
        want.sort();
        assert_eq!(seps, want);
    }

    #[test]
    fn edgeless_graph_has_empty_separator() {
        let d = decompose(&Graph::empty(3)).unwrap();
        assert_eq!(d.cliques(), &[set(&[1]), set(&[2]), set(&[3])]);
        assert_eq!(d.separators(), &[(VarSet::EMPTY, 2)]);
    }

    #[test]
    fn toggle_is_an_involution() {
        let g = model1();
        assert_eq!(g.toggle_edge(0, 1).unwrap().toggle_edge(0, 1).unwrap(), g);
        let single = Graph::empty(3).toggle_edge(0, 1).unwrap();
        assert_eq!(single.edges(), vec![(0, 1)]);
        assert!(matches!(g.toggle_edge(2, 2), Err(Error::Usage(_))));
    }

    #[test]
    fn complete_minus_an_edge_is_chordal() {
        let k4 = Graph::complete(4);
        for (u, v) in Graph::edge_slots(4) {
            assert!(is_chordal(&k4.toggle_edge(u, v).unwrap()));
        }
    }

    #[test]
    fn components_after_removing_separator() {
        // Model 1 minus vertex 6: edges 1-2, 1-7, 2-8, 3-7 remain, so {1,2,3,7,8} is one
        // component and 4, 5 are isolated.
        let comps = model1().components_without(set(&[6]));
        assert_eq!(comps, vec![set(&[1, 2, 3, 7, 8]), set(&[4]), set(&[5])]);
        assert!(model1().components_without(VarSet::full(8)).is_empty());
        let path = Graph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        assert_eq!(path.components_without(set(&[2])), vec![set(&[1]), set(&[3])]);
    }

    #[test]
    fn edge_list_round_trip() {
        let g = model1();
        let text = g.to_edge_list();
        assert!(text.starts_with("8\n1 2\n"));
        assert_eq!(Graph::from_edge_list(&text).unwrap(), g);
        assert!(matches!(Graph::from_edge_list("3\n1 1\n"), Err(Error::Usage(_))));
        assert!(matches!(Graph::from_edge_list("3\n1\n"), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn non_rip_sequence_rejected() {
        // {1,2},{3,4},{2,3}: S_3 = {2,3} lies in no earlier clique.
        let r = CliqueDecomposition::from_perfect_sequence(4, vec![set(&[1, 2]), set(&[3, 4]), set(&[2, 3])]);
        assert!(matches!(r, Err(Error::Contract(_))));
    }
}
