//! Brute-force references for small instances: dense tables, iterative
//! proportional fitting, exhaustive chordal-graph counting and synthetic data.

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{mcs, Graph};
use crate::microdata::{Schema, SparseTable};
use crate::varset::VarSet;

/// Largest index space a [`DenseTable`] may cover.
pub const DENSE_LIMIT: usize = 1_000_000;

/// Largest vertex count accepted by [`count_chordal`].
pub const COUNT_CHORDAL_MAX: usize = 7;

/// Every cell of a small contingency table, variable 0 varying fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseTable {
    cardinalities: Vec<u32>,
    values: Vec<f64>,
}

impl DenseTable {
    pub fn zeros(cardinalities: &[u32]) -> Result<Self> {
        let size = cardinalities
            .iter()
            .try_fold(1usize, |acc, &c| acc.checked_mul(c as usize))
            .filter(|&s| s <= DENSE_LIMIT)
            .ok_or_else(|| Error::Usage(format!("dense table over {cardinalities:?} exceeds {DENSE_LIMIT} cells")))?;
        Ok(DenseTable { cardinalities: cardinalities.to_vec(), values: vec![0.0; size] })
    }

    pub fn from_sparse(table: &SparseTable) -> Result<Self> {
        let mut dense = DenseTable::zeros(&table.schema().cardinalities())?;
        for (cell, count) in table.cells() {
            let k = dense.index(cell);
            dense.values[k] = count as f64;
        }
        Ok(dense)
    }

    pub fn cardinalities(&self) -> &[u32] {
        &self.cardinalities
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn index(&self, cell: &[u32]) -> usize {
        let mut k = 0;
        for (&i, &c) in cell.iter().zip(&self.cardinalities).rev() {
            k = k * c as usize + i as usize;
        }
        k
    }

    pub fn cell(&self, mut k: usize) -> Vec<u32> {
        self.cardinalities
            .iter()
            .map(|&c| {
                let i = (k % c as usize) as u32;
                k /= c as usize;
                i
            })
            .collect()
    }

    pub fn get(&self, cell: &[u32]) -> f64 {
        self.values[self.index(cell)]
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Dense marginal over `a`, indexed like a table with `a`'s cardinalities.
    fn marginal(&self, a: VarSet) -> Vec<f64> {
        let size: usize = a.iter().map(|v| self.cardinalities[v] as usize).product();
        let mut out = vec![0.0; size];
        for (k, &x) in self.values.iter().enumerate() {
            out[self.marginal_index(a, k)] += x;
        }
        out
    }

    fn marginal_index(&self, a: VarSet, mut k: usize) -> usize {
        let mut idx = 0;
        let mut stride = 1;
        for (v, &c) in self.cardinalities.iter().enumerate() {
            let i = k % c as usize;
            k /= c as usize;
            if a.contains(v) {
                idx += i * stride;
                stride *= c as usize;
            }
        }
        idx
    }
}

/// Iterative proportional scaling of a uniform start to the observed clique
/// marginals, until the largest absolute marginal discrepancy (in probability
/// units) falls below `1e-10`. Returns the fitted cell probabilities.
pub fn ipf_fit(dense: &DenseTable, cliques: &[VarSet]) -> Result<DenseTable> {
    ipf_fit_with(dense, cliques, 1e-10, 10_000)
}

pub fn ipf_fit_with(dense: &DenseTable, cliques: &[VarSet], tolerance: f64, max_iterations: usize) -> Result<DenseTable> {
    let total = dense.total();
    if total <= 0.0 {
        return Err(Error::Domain("cannot scale to the marginals of an empty table".into()));
    }
    let targets: Vec<Vec<f64>> = cliques.iter().map(|&c| dense.marginal(c).iter().map(|x| x / total).collect()).collect();
    let mut fitted = DenseTable { cardinalities: dense.cardinalities.clone(), values: vec![1.0 / dense.len() as f64; dense.len()] };
    let mut discrepancy = f64::INFINITY;
    for _ in 0..max_iterations {
        for (&c, target) in cliques.iter().zip(&targets) {
            let current = fitted.marginal(c);
            for k in 0..fitted.values.len() {
                let idx = fitted.marginal_index(c, k);
                fitted.values[k] = if current[idx] > 0.0 { fitted.values[k] * target[idx] / current[idx] } else { 0.0 };
            }
        }
        discrepancy = cliques
            .iter()
            .zip(&targets)
            .flat_map(|(&c, target)| {
                let got = fitted.marginal(c);
                got.into_iter().zip(target.iter()).map(|(x, y)| (x - y).abs()).collect::<Vec<_>>()
            })
            .fold(0.0, f64::max);
        if discrepancy < tolerance {
            return Ok(fitted);
        }
    }
    Err(Error::Convergence { iterations: max_iterations, discrepancy })
}

/// Number of labelled chordal graphs on `m` vertices, by testing all `2^(m(m-1)/2)` graphs.
pub fn count_chordal(m: usize) -> Result<u64> {
    if m > COUNT_CHORDAL_MAX {
        return Err(Error::Usage(format!("count_chordal enumerates at most {COUNT_CHORDAL_MAX} vertices, got {m}")));
    }
    let slots = m * m.saturating_sub(1) / 2;
    let graphs: u64 = 1 << slots;
    Ok((0..graphs).into_par_iter().filter(|&mask| mcs(&Graph::from_edge_mask(m, mask)).is_chordal).count() as u64)
}

/// Draws `n` i.i.d. records from a randomly parameterized distribution that
/// factorizes over `cliques`: `log p(i) = Σ_C μ_C(i_C) + const` with independent
/// standard normal interaction terms.
pub fn synth_table(cliques: &[VarSet], cardinalities: &[u32], n: usize, seed: u64) -> Result<SparseTable> {
    let dist = synth_distribution(cliques, cardinalities, seed, 1.0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x005e_ed0f_da7a);
    sample_table(&dist, n, &mut rng)
}

/// The probability array of [`synth_table`]'s model, with interaction terms scaled by `spread`.
pub fn synth_distribution(cliques: &[VarSet], cardinalities: &[u32], seed: u64, spread: f64) -> Result<DenseTable> {
    let m = cardinalities.len();
    if let Some(c) = cliques.iter().find(|c| !c.is_subset(VarSet::full(m))) {
        return Err(Error::Usage(format!("clique {c} outside {m} variables")));
    }
    let mut dist = DenseTable::zeros(cardinalities)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let terms: Vec<Vec<f64>> = cliques
        .iter()
        .map(|&c| {
            let size: usize = c.iter().map(|v| cardinalities[v] as usize).product();
            (0..size).map(|_| spread * rng.sample::<f64, _>(StandardNormal)).collect()
        })
        .collect();
    for k in 0..dist.values.len() {
        let log_p: f64 = cliques.iter().zip(&terms).map(|(&c, t)| t[dist.marginal_index(c, k)]).sum();
        dist.values[k] = log_p.exp();
    }
    let z = dist.total();
    dist.values.iter_mut().for_each(|x| *x /= z);
    Ok(dist)
}

/// `n` i.i.d. draws from a dense probability table.
pub fn sample_table<R: Rng + ?Sized>(dist: &DenseTable, n: usize, rng: &mut R) -> Result<SparseTable> {
    let schema = Schema::with_cardinalities(&dist.cardinalities, n.max(1) as u64)?;
    if n == 0 {
        return SparseTable::from_records(schema, Vec::new());
    }
    let sampler = WeightedIndex::new(&dist.values).map_err(|e| Error::Domain(format!("bad distribution: {e}")))?;
    let rows = (0..n).map(|_| dist.cell(sampler.sample(rng))).collect();
    SparseTable::from_records(schema, rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::microdata::ingest_csv;

    #[test]
    fn chordal_counts_small() {
        assert_eq!(count_chordal(1).unwrap(), 1);
        assert_eq!(count_chordal(2).unwrap(), 2);
        assert_eq!(count_chordal(3).unwrap(), 8);
        assert_eq!(count_chordal(4).unwrap(), 61);
        assert_eq!(count_chordal(5).unwrap(), 822);
        assert!(matches!(count_chordal(8), Err(Error::Usage(_))));
    }

    fn four_records() -> SparseTable {
        let schema = Schema::with_cardinalities(&[2, 2, 2], 100).unwrap();
        ingest_csv("0,0,0\n0,0,1\n1,1,1\n0,1,1\n", schema, false).unwrap()
    }

    #[test]
    fn saturated_ipf_is_empirical() {
        let dense = DenseTable::from_sparse(&four_records()).unwrap();
        let fitted = ipf_fit(&dense, &[VarSet::full(3)]).unwrap();
        for k in 0..dense.len() {
            assert!((fitted.values()[k] - dense.values()[k] / 4.0).abs() < 1e-15);
        }
    }

    #[test]
    fn chain_ipf_matches_hand_value() {
        let dense = DenseTable::from_sparse(&four_records()).unwrap();
        let cliques = [[0, 1].into_iter().collect(), [1, 2].into_iter().collect()];
        let fitted = ipf_fit(&dense, &cliques).unwrap();
        assert!((fitted.get(&[0, 0, 0]) - 0.25).abs() < 1e-10);
        assert!((fitted.total() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn independence_ipf_is_product() {
        let dense = DenseTable::from_sparse(&four_records()).unwrap();
        let cliques: Vec<VarSet> = (0..3).map(VarSet::singleton).collect();
        let fitted = ipf_fit(&dense, &cliques).unwrap();
        assert!((fitted.get(&[0, 0, 1]) - 0.75 * 0.5 * 0.75).abs() < 1e-12);
    }

    #[test]
    fn dense_limit_enforced() {
        assert!(matches!(DenseTable::zeros(&[1000, 1001]), Err(Error::Usage(_))));
        assert!(DenseTable::zeros(&[1000, 1000]).is_ok());
    }

    #[test]
    fn synth_is_deterministic_and_sized() {
        let cliques = [[0, 1].into_iter().collect::<VarSet>(), VarSet::singleton(2)];
        let a = synth_table(&cliques, &[3, 2, 4], 500, 11).unwrap();
        let b = synth_table(&cliques, &[3, 2, 4], 500, 11).unwrap();
        assert_eq!(a.to_csv(), b.to_csv());
        assert_eq!(a.total(), 500);
        assert!(synth_table(&cliques, &[3, 2, 4], 0, 11).unwrap().is_empty());
    }

    #[test]
    fn independence_synth_has_small_mutual_information() {
        let cliques: Vec<VarSet> = (0..2).map(VarSet::singleton).collect();
        let t = synth_table(&cliques, &[3, 3], 200_000, 5).unwrap();
        let n = t.total() as f64;
        let joint = t.marginalize(VarSet::full(2)).unwrap();
        let a = t.marginalize(VarSet::singleton(0)).unwrap();
        let b = t.marginalize(VarSet::singleton(1)).unwrap();
        let mi: f64 = joint
            .iter()
            .map(|(cell, c)| {
                let pxy = c as f64 / n;
                let px = a.get(&cell[..1]) as f64 / n;
                let py = b.get(&cell[1..]) as f64 / n;
                pxy * (pxy / (px * py)).ln()
            })
            .sum();
        // E[2n·MI] is the (I-1)(J-1) = 4 degrees of freedom of the G-test
        assert!(mi < 1e-4, "mutual information {mi}");
    }
}
