//! Per-record identification risk of sample uniques under a fitted model.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::FittedModel;
use crate::microdata::SparseTable;

/// Upper edges of the decade bands `(10^-(k+1), 10^-k]`, `k = 2..=9`.
pub const BAND_EXPONENTS: [i32; 8] = [2, 3, 4, 5, 6, 7, 8, 9];

/// Estimated probability that a sample unique is also unique in the population:
/// `(1 − p̂)^(N−n)`, computed as `exp((N−n)·ln(1−p̂))`.
pub fn pop_unique_prob(p_hat: f64, population: u64, sample: u64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p_hat) {
        return Err(Error::Domain(format!("cell probability {p_hat} outside [0, 1]")));
    }
    if sample > population {
        return Err(Error::Domain(format!("sample size {sample} exceeds population size {population}")));
    }
    let rest = (population - sample) as f64;
    if rest == 0.0 || p_hat == 0.0 {
        return Ok(1.0);
    }
    if p_hat == 1.0 {
        return Ok(0.0);
    }
    Ok((rest * (-p_hat).ln_1p()).exp())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskEntry {
    /// 0-based record index.
    pub record: usize,
    pub cell: Vec<u32>,
    pub p_hat: f64,
    pub pop_unique_prob: f64,
}

/// Sample uniques per decade band of `p̂`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BandHistogram {
    /// `p̂ > 10^-2`.
    pub above: usize,
    /// `bands[k]` counts `p̂ ∈ (10^-(e+1), 10^-e]` with `e = BAND_EXPONENTS[k]`.
    pub bands: [usize; 8],
    /// `p̂ ≤ 10^-10`.
    pub below: usize,
}

const DECADES: [f64; 9] = [1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8, 1e-9, 1e-10];

impl BandHistogram {
    pub fn add(&mut self, p: f64) {
        if p > DECADES[0] {
            self.above += 1;
            return;
        }
        for k in 0..8 {
            if p > DECADES[k + 1] {
                self.bands[k] += 1;
                return;
            }
        }
        self.below += 1;
    }

    /// Count inside `(10^-10, 10^-2]`.
    pub fn banded_total(&self) -> usize {
        self.bands.iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskReport {
    pub population_size: u64,
    pub sample_size: u64,
    pub entries: Vec<RiskEntry>,
    pub estimate_total: f64,
    pub bands: BandHistogram,
}

/// Scores every sample unique of `table` under `model` and sums the estimates.
pub fn estimate_population_uniques(table: &SparseTable, model: &FittedModel) -> Result<RiskReport> {
    let population = table.schema().population_size();
    let n = table.total();
    let mut entries = Vec::new();
    let mut bands = BandHistogram::default();
    for r in table.sample_unique_records() {
        let cell = table.record(r);
        let p_hat = model.mle_cell(cell);
        assert!(p_hat > 0.0, "observed cell {cell:?} has p̂ = 0; model not fitted on this table?");
        bands.add(p_hat);
        entries.push(RiskEntry { record: r, cell: cell.to_vec(), p_hat, pop_unique_prob: pop_unique_prob(p_hat, population, n)? });
    }
    let estimate_total = entries.iter().map(|e| e.pop_unique_prob).sum();
    Ok(RiskReport { population_size: population, sample_size: n, entries, estimate_total, bands })
}

/// Entries with `p̂ ≤ threshold`, ascending by `p̂`, ties by record index.
pub fn risky_records(report: &RiskReport, threshold: f64) -> Result<Vec<RiskEntry>> {
    if threshold.is_nan() || threshold <= 0.0 {
        return Err(Error::Usage(format!("risk threshold must be positive, got {threshold}")));
    }
    let mut out: Vec<RiskEntry> = report.entries.iter().filter(|e| e.p_hat <= threshold).cloned().collect();
    out.sort_by(|a, b| a.p_hat.total_cmp(&b.p_hat).then(a.record.cmp(&b.record)));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fit::fit;
    use crate::graph::Graph;
    use crate::microdata::{ingest_csv, Schema};

    #[test]
    fn boundary_probabilities() {
        assert_eq!(pop_unique_prob(0.0, 100, 10).unwrap(), 1.0);
        assert_eq!(pop_unique_prob(1.0, 100, 10).unwrap(), 0.0);
        assert_eq!(pop_unique_prob(0.3, 10, 10).unwrap(), 1.0);
        assert!(matches!(pop_unique_prob(1.5, 100, 10), Err(Error::Domain(_))));
        assert!(matches!(pop_unique_prob(-0.1, 100, 10), Err(Error::Domain(_))));
        assert!(matches!(pop_unique_prob(f64::NAN, 100, 10), Err(Error::Domain(_))));
    }

    #[test]
    fn census_scale_value() {
        // exp(4_857_191 · ln(1 − 1e-8)) = 0.95259... (see the acceptance suite for the series oracle)
        let q = pop_unique_prob(1e-8, 4_867_000, 9_809).unwrap();
        assert!((q - 0.952590).abs() < 1e-5, "{q}");
    }

    #[test]
    fn bands_follow_decades() {
        let mut h = BandHistogram::default();
        for p in [0.5, 1e-2, 5e-3, 1e-3, 2e-8, 1e-10, 1e-12] {
            h.add(p);
        }
        assert_eq!(h.above, 1);
        assert_eq!(h.bands[0], 2); // 1e-2 and 5e-3
        assert_eq!(h.bands[1], 1); // 1e-3
        assert_eq!(h.bands[5], 1); // 2e-8 lies in (1e-8, 1e-7]
        assert_eq!(h.below, 2);
        assert_eq!(h.banded_total(), 4);
    }

    #[test]
    fn no_sample_uniques() {
        let schema = Schema::with_cardinalities(&[2, 2], 100).unwrap();
        let t = ingest_csv("0,0\n0,0\n1,1\n1,1\n", schema, false).unwrap();
        let model = fit(&t, &Graph::complete(2)).unwrap();
        let report = estimate_population_uniques(&t, &model).unwrap();
        assert!(report.entries.is_empty());
        assert_eq!(report.estimate_total, 0.0);
    }

    #[test]
    fn single_record_saturated() {
        let schema = Schema::with_cardinalities(&[2, 2], 100).unwrap();
        let t = ingest_csv("1,0\n", schema, false).unwrap();
        let model = fit(&t, &Graph::complete(2)).unwrap();
        let report = estimate_population_uniques(&t, &model).unwrap();
        assert_eq!(report.entries.len(), 1);
        assert_eq!(report.entries[0].p_hat, 1.0);
        assert_eq!(report.estimate_total, 0.0);
    }

    #[test]
    fn risky_records_selection() {
        let schema = Schema::with_cardinalities(&[3, 3], 1000).unwrap();
        let t = ingest_csv("0,0\n0,1\n1,1\n2,2\n0,0\n", schema, false).unwrap();
        let model = fit(&t, &Graph::empty(2)).unwrap();
        let report = estimate_population_uniques(&t, &model).unwrap();
        assert_eq!(report.entries.len(), 3);
        let min = report.entries.iter().map(|e| e.p_hat).fold(f64::INFINITY, f64::min);
        assert!(risky_records(&report, min / 2.0).unwrap().is_empty());
        let all = risky_records(&report, 1.0).unwrap();
        assert_eq!(all.len(), 3);
        for w in all.windows(2) {
            assert!(w[0].p_hat < w[1].p_hat || (w[0].p_hat == w[1].p_hat && w[0].record < w[1].record));
        }
        assert!(matches!(risky_records(&report, 0.0), Err(Error::Usage(_))));
    }
}
