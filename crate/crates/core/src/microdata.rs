//! Categorical microdata as a sparse multiway contingency table.
//!
//! Only occupied cells are ever stored. A cell is addressed internally by a
//! mixed-radix `u128` key over the full index space, and an `a`-marginal cell
//! by the same weighted sum restricted to the variables of `a`, so marginal keys
//! never collide and no array over the (possibly huge) index space is allocated.

use std::collections::hash_map::{DefaultHasher, Entry};
use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt::Write as _;
use std::hash::BuildHasherDefault;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::varset::{VarSet, MAX_VARIABLES};

/// Hash map with a fixed hasher, so iteration order depends only on insertion order.
pub type DetMap<K, V> = HashMap<K, V, BuildHasherDefault<DefaultHasher>>;

/// One key variable of the schema.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub cardinality: u32,
    /// Raw code for each category index; `codes[k]` is the code of category `k`.
    /// When absent, raw codes are the category indices themselves.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub codes: Option<Vec<i64>>,
}

/// On-disk schema configuration (TOML).
#[derive(Debug, Clone, Serialize, Deserialize)]
struct SchemaConfig {
    population_size: u64,
    #[serde(default)]
    infer_codes: bool,
    variables: Vec<Variable>,
}

/// Ordered key variables with their category counts, plus the population size `N`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schema {
    variables: Vec<Variable>,
    population_size: u64,
    infer_codes: bool,
    strides: Vec<u128>,
}

impl Schema {
    pub fn new(variables: Vec<Variable>, population_size: u64) -> Result<Self> {
        if variables.is_empty() {
            return Err(Error::Domain("schema has no variables".into()));
        }
        if variables.len() > MAX_VARIABLES {
            return Err(Error::Domain(format!(
                "schema has {} variables; at most {MAX_VARIABLES} are supported",
                variables.len()
            )));
        }
        if population_size == 0 {
            return Err(Error::Domain("population size must be positive".into()));
        }
        let mut names = HashSet::new();
        let mut strides = Vec::with_capacity(variables.len());
        let mut stride: u128 = 1;
        for var in &variables {
            if !names.insert(var.name.as_str()) {
                return Err(Error::Domain(format!("duplicate variable name {:?}", var.name)));
            }
            if var.cardinality == 0 {
                return Err(Error::Domain(format!("variable {:?} has cardinality 0", var.name)));
            }
            if let Some(codes) = &var.codes {
                if codes.len() > var.cardinality as usize {
                    return Err(Error::Domain(format!(
                        "variable {:?}: {} codes for cardinality {}",
                        var.name,
                        codes.len(),
                        var.cardinality
                    )));
                }
                let distinct: HashSet<_> = codes.iter().collect();
                if distinct.len() != codes.len() {
                    return Err(Error::Domain(format!("variable {:?}: duplicate codes", var.name)));
                }
            }
            strides.push(stride);
            stride = stride.checked_mul(var.cardinality as u128).ok_or_else(|| {
                Error::Domain("cell index space exceeds 2^128 cells".into())
            })?;
        }
        Ok(Schema { variables, population_size, infer_codes: false, strides })
    }

    /// Schema with variables `v1..vm`, identity codes.
    pub fn with_cardinalities(cardinalities: &[u32], population_size: u64) -> Result<Self> {
        let vars = cardinalities
            .iter()
            .enumerate()
            .map(|(k, &c)| Variable { name: format!("v{}", k + 1), cardinality: c, codes: None })
            .collect();
        Schema::new(vars, population_size)
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: SchemaConfig = toml::from_str(text).map_err(|e| Error::Parse {
            line: e.span().map_or(0, |s| text[..s.start].lines().count().max(1)),
            message: e.message().to_string(),
        })?;
        let mut schema = Schema::new(cfg.variables, cfg.population_size)?;
        schema.infer_codes = cfg.infer_codes;
        Ok(schema)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Schema::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        let cfg = SchemaConfig {
            population_size: self.population_size,
            infer_codes: self.infer_codes,
            variables: self.variables.clone(),
        };
        toml::to_string(&cfg).expect("schema serializes")
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    /// Number of key variables `m`.
    pub fn len(&self) -> usize {
        self.variables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variables.is_empty()
    }

    pub fn cardinality(&self, v: usize) -> u32 {
        self.variables[v].cardinality
    }

    pub fn cardinalities(&self) -> Vec<u32> {
        self.variables.iter().map(|v| v.cardinality).collect()
    }

    pub fn population_size(&self) -> u64 {
        self.population_size
    }

    pub fn with_population_size(mut self, n: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("population size must be positive".into()));
        }
        self.population_size = n;
        Ok(self)
    }

    pub fn infer_codes(&self) -> bool {
        self.infer_codes
    }

    pub fn all_variables(&self) -> VarSet {
        VarSet::full(self.len())
    }

    /// Number of marginal cells `Π_{δ∈a} I_δ`; the empty product is 1.
    pub fn marginal_size(&self, a: VarSet) -> u128 {
        a.iter().map(|v| self.variables[v].cardinality as u128).product()
    }

    /// Index of variable by name.
    pub fn position(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v.name == name)
    }

    pub(crate) fn key_on(&self, a: VarSet, cell: &[u32]) -> u128 {
        a.iter().map(|v| cell[v] as u128 * self.strides[v]).sum()
    }

    pub(crate) fn decode_on(&self, a: VarSet, key: u128) -> Vec<u32> {
        a.iter()
            .map(|v| ((key / self.strides[v]) % self.variables[v].cardinality as u128) as u32)
            .collect()
    }

    fn check_cell(&self, cell: &[u32]) -> Result<()> {
        if cell.len() != self.len() {
            return Err(Error::Domain(format!(
                "cell has {} indices, schema has {} variables",
                cell.len(),
                self.len()
            )));
        }
        for (v, (&i, var)) in cell.iter().zip(&self.variables).enumerate() {
            if i >= var.cardinality {
                return Err(Error::Domain(format!(
                    "index {i} out of range for variable {} ({:?}, cardinality {})",
                    v + 1,
                    var.name,
                    var.cardinality
                )));
            }
        }
        Ok(())
    }
}

/// Counts of one marginal: occupied `a`-marginal cells only.
#[derive(Debug, Clone)]
pub struct Marginal {
    vars: VarSet,
    counts: DetMap<u128, u64>,
    total: u64,
    schema: Arc<Schema>,
}

impl Marginal {
    pub fn vars(&self) -> VarSet {
        self.vars
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    /// Number of occupied marginal cells.
    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// `n(i_a)` for a full cell `i`.
    pub fn count_of(&self, cell: &[u32]) -> u64 {
        if self.vars.is_empty() {
            return self.total;
        }
        self.counts.get(&self.schema.key_on(self.vars, cell)).copied().unwrap_or(0)
    }

    /// `n(i_a)` for a marginal cell given by indices of the variables of `a` in increasing order.
    pub fn get(&self, marginal_cell: &[u32]) -> u64 {
        if marginal_cell.len() != self.vars.len() {
            return 0;
        }
        if self.vars.is_empty() {
            return self.total;
        }
        let key = self
            .vars
            .iter()
            .zip(marginal_cell)
            .map(|(v, &i)| i as u128 * self.schema.strides[v])
            .sum();
        self.counts.get(&key).copied().unwrap_or(0)
    }

    /// Occupied marginal cells with counts. Order is deterministic but unspecified.
    pub fn iter(&self) -> impl Iterator<Item = (Vec<u32>, u64)> + '_ {
        self.counts.iter().map(|(&k, &c)| (self.schema.decode_on(self.vars, k), c))
    }

    /// Counts only, in the same order as [`Marginal::iter`].
    pub fn counts(&self) -> impl Iterator<Item = u64> + '_ {
        self.counts.values().copied()
    }

    /// Counts ordered by cell index, so sums over them do not depend on record order.
    pub fn counts_in_key_order(&self) -> Vec<u64> {
        let mut pairs: Vec<(u128, u64)> = self.counts.iter().map(|(&k, &c)| (k, c)).collect();
        pairs.sort_unstable_by_key(|&(k, _)| k);
        pairs.into_iter().map(|(_, c)| c).collect()
    }

    /// Contents as an ordered map, for exact comparisons.
    pub fn to_sorted(&self) -> BTreeMap<Vec<u32>, u64> {
        self.iter().collect()
    }
}

impl PartialEq for Marginal {
    fn eq(&self, other: &Self) -> bool {
        self.vars == other.vars && self.total == other.total && self.counts == other.counts
    }
}

/// Frequency of frequencies: number of occupied cells of each size `k ≥ 1`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SizeIndexTable(pub BTreeMap<u64, u64>);

impl SizeIndexTable {
    pub fn freq(&self, k: u64) -> u64 {
        self.0.get(&k).copied().unwrap_or(0)
    }

    /// `Σ_k k · freq(k)`, which equals the number of records.
    pub fn weighted_total(&self) -> u64 {
        self.0.iter().map(|(k, f)| k * f).sum()
    }
}

/// A sparse contingency table with its record list.
#[derive(Debug, Clone)]
pub struct SparseTable {
    schema: Arc<Schema>,
    records: Vec<u32>,
    keys: Vec<u128>,
    counts: DetMap<u128, u64>,
    /// Record index of the first occurrence of each occupied cell, in record order.
    first_seen: Vec<usize>,
    /// Raw text of each category as it appeared in the input, for faithful rewriting.
    labels: Arc<Vec<Vec<Option<String>>>>,
}

impl SparseTable {
    /// Builds a table from category-index rows.
    pub fn from_records(schema: Schema, rows: Vec<Vec<u32>>) -> Result<Self> {
        let schema = Arc::new(schema);
        let labels = Arc::new(schema.variables.iter().map(|v| vec![None; v.cardinality as usize]).collect());
        let mut flat = Vec::with_capacity(rows.len() * schema.len());
        for row in &rows {
            schema.check_cell(row)?;
            flat.extend_from_slice(row);
        }
        SparseTable::build(schema, flat, labels)
    }

    fn build(schema: Arc<Schema>, records: Vec<u32>, labels: Arc<Vec<Vec<Option<String>>>>) -> Result<Self> {
        let m = schema.len();
        let n = records.len() / m;
        if n as u64 > schema.population_size {
            return Err(Error::Domain(format!(
                "sample size {n} exceeds population size {}",
                schema.population_size
            )));
        }
        let full = schema.all_variables();
        let mut keys = Vec::with_capacity(n);
        let mut counts = DetMap::default();
        let mut first_seen = Vec::new();
        for (r, cell) in records.chunks_exact(m).enumerate() {
            let key = schema.key_on(full, cell);
            keys.push(key);
            match counts.entry(key) {
                Entry::Occupied(mut e) => *e.get_mut() += 1,
                Entry::Vacant(e) => {
                    e.insert(1);
                    first_seen.push(r);
                }
            }
        }
        Ok(SparseTable { schema, records, keys, counts, first_seen, labels })
    }

    /// Same schema and labels, new rows.
    pub(crate) fn with_rows(&self, records: Vec<u32>) -> Result<Self> {
        SparseTable::build(self.schema.clone(), records, self.labels.clone())
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    /// Number of records `n`.
    pub fn total(&self) -> u64 {
        self.keys.len() as u64
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn record(&self, r: usize) -> &[u32] {
        let m = self.schema.len();
        &self.records[r * m..(r + 1) * m]
    }

    pub fn records(&self) -> impl ExactSizeIterator<Item = &[u32]> + '_ {
        self.records.chunks_exact(self.schema.len())
    }

    pub(crate) fn raw_records(&self) -> &[u32] {
        &self.records
    }

    /// Count `n(i)` of a cell; 0 when unoccupied or invalid.
    pub fn count(&self, cell: &[u32]) -> u64 {
        if self.schema.check_cell(cell).is_err() {
            return 0;
        }
        let key = self.schema.key_on(self.schema.all_variables(), cell);
        self.counts.get(&key).copied().unwrap_or(0)
    }

    /// Number of occupied cells.
    pub fn occupied(&self) -> usize {
        self.first_seen.len()
    }

    /// Occupied cells with counts, in order of first occurrence among the records.
    pub fn cells(&self) -> impl Iterator<Item = (&[u32], u64)> + '_ {
        self.first_seen.iter().map(|&r| (self.record(r), self.counts[&self.keys[r]]))
    }

    /// Counts of the `a`-marginal. Single pass over occupied cells.
    pub fn marginalize(&self, a: VarSet) -> Result<Marginal> {
        if a.is_empty() {
            return Err(Error::Usage("marginal over an empty variable subset".into()));
        }
        if !a.is_subset(self.schema.all_variables()) {
            return Err(Error::Usage(format!("subset {a} is not within the schema's variables")));
        }
        Ok(self.marginal(a))
    }

    /// As [`SparseTable::marginalize`], but the empty subset yields the grand total.
    pub(crate) fn marginal(&self, a: VarSet) -> Marginal {
        let mut counts: DetMap<u128, u64> = DetMap::default();
        if !a.is_empty() {
            for &r in &self.first_seen {
                let key = self.schema.key_on(a, self.record(r));
                *counts.entry(key).or_insert(0) += self.counts[&self.keys[r]];
            }
        }
        Marginal { vars: a, counts, total: self.total(), schema: self.schema.clone() }
    }

    pub fn size_indices(&self) -> SizeIndexTable {
        let mut table = BTreeMap::new();
        for c in self.counts.values() {
            *table.entry(*c).or_insert(0) += 1;
        }
        SizeIndexTable(table)
    }

    /// Cells with `n(i) = 1`, in first-occurrence order.
    pub fn sample_uniques(&self) -> Vec<Vec<u32>> {
        self.sample_unique_records().into_iter().map(|r| self.record(r).to_vec()).collect()
    }

    /// Record indices of the sample uniques, in record order.
    pub fn sample_unique_records(&self) -> Vec<usize> {
        self.first_seen.iter().copied().filter(|&r| self.counts[&self.keys[r]] == 1).collect()
    }

    fn label(&self, v: usize, i: u32) -> String {
        if let Some(text) = &self.labels[v][i as usize] {
            return text.clone();
        }
        match &self.schema.variables[v].codes {
            Some(codes) if (i as usize) < codes.len() => codes[i as usize].to_string(),
            _ => i.to_string(),
        }
    }

    /// Records as CSV text using the original raw codes, one line per record.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.records.len() * 4);
        for cell in self.records() {
            for (v, &i) in cell.iter().enumerate() {
                if v > 0 {
                    out.push(',');
                }
                out.push_str(&self.label(v, i));
            }
            out.push('\n');
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }

    /// Cell rendered with raw codes, e.g. `00,0,17,4,10,6,0,0`.
    pub fn format_cell(&self, cell: &[u32]) -> String {
        let mut s = String::new();
        for (v, &i) in cell.iter().enumerate() {
            if v > 0 {
                s.push(',');
            }
            let _ = write!(s, "{}", self.label(v, i));
        }
        s
    }
}

/// Parses comma-separated integer-coded microdata.
///
/// Raw codes map to category indices through each variable's code list; without
/// one they must already be indices in `[0, I_δ)`, unless the schema asks for
/// codes to be inferred, in which case the sorted distinct codes seen in the data
/// become categories `0, 1, ...`.
pub fn ingest_csv(text: &str, schema: Schema, has_header: bool) -> Result<SparseTable> {
    let m = schema.len();
    let mut raw: Vec<(usize, Vec<(i64, &str)>)> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if lineno == 0 && has_header {
            continue;
        }
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != m {
            return Err(Error::Parse {
                line: lineno + 1,
                message: format!("expected {m} fields, found {}", fields.len()),
            });
        }
        let mut row = Vec::with_capacity(m);
        for f in fields {
            let code: i64 = f.parse().map_err(|_| Error::Parse {
                line: lineno + 1,
                message: format!("field {f:?} is not an integer code"),
            })?;
            row.push((code, f));
        }
        raw.push((lineno + 1, row));
    }

    let mut schema = schema;
    if schema.infer_codes {
        for v in 0..m {
            if schema.variables[v].codes.is_some() {
                continue;
            }
            let seen: BTreeSet<i64> = raw.iter().map(|(_, row)| row[v].0).collect();
            let var = &mut schema.variables[v];
            if seen.len() > var.cardinality as usize {
                return Err(Error::Domain(format!(
                    "variable {:?}: {} distinct codes exceed cardinality {}",
                    var.name,
                    seen.len(),
                    var.cardinality
                )));
            }
            var.codes = Some(seen.into_iter().collect());
        }
    }

    let dictionaries: Vec<Option<HashMap<i64, u32>>> = schema
        .variables
        .iter()
        .map(|var| {
            var.codes.as_ref().map(|codes| codes.iter().enumerate().map(|(k, &c)| (c, k as u32)).collect())
        })
        .collect();
    let mut labels: Vec<Vec<Option<String>>> =
        schema.variables.iter().map(|v| vec![None; v.cardinality as usize]).collect();
    let mut records = Vec::with_capacity(raw.len() * m);
    for (lineno, row) in &raw {
        for (v, &(code, text)) in row.iter().enumerate() {
            let var = &schema.variables[v];
            let index = match &dictionaries[v] {
                Some(dict) => dict.get(&code).copied(),
                None => u32::try_from(code).ok().filter(|&i| i < var.cardinality),
            };
            let index = index.ok_or_else(|| {
                Error::Domain(format!(
                    "line {lineno}: code {code} is not a category of variable {:?} (cardinality {})",
                    var.name, var.cardinality
                ))
            })?;
            let slot = &mut labels[v][index as usize];
            if slot.is_none() {
                *slot = Some(text.to_string());
            }
            records.push(index);
        }
    }
    SparseTable::build(Arc::new(schema), records, Arc::new(labels))
}

pub fn read_csv(path: &Path, schema: Schema, has_header: bool) -> Result<SparseTable> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    ingest_csv(&text, schema, has_header)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binary3() -> Schema {
        Schema::with_cardinalities(&[2, 2, 2], 100).unwrap()
    }

    fn four_records() -> SparseTable {
        ingest_csv("0,0,0\n0,0,1\n1,1,1\n0,1,1\n", binary3(), false).unwrap()
    }

    fn census_schema() -> Schema {
        let text = r#"
            population_size = 4867000
            infer_codes = true
            [[variables]]
            name = "relationship"
            cardinality = 14
            [[variables]]
            name = "sex"
            cardinality = 2
            [[variables]]
            name = "age"
            cardinality = 91
            [[variables]]
            name = "marital"
            cardinality = 5
            [[variables]]
            name = "birthplace"
            cardinality = 14
            [[variables]]
            name = "spouse"
            cardinality = 7
            [[variables]]
            name = "own_child"
            cardinality = 2
            [[variables]]
            name = "child_age"
            cardinality = 5
        "#;
        Schema::from_toml_str(text).unwrap()
    }

    #[test]
    fn distinct_rows_give_unit_counts() {
        let t = four_records();
        assert_eq!(t.total(), 4);
        assert_eq!(t.occupied(), 4);
        assert!(t.cells().all(|(_, c)| c == 1));
    }

    #[test]
    fn identical_rows_aggregate() {
        let schema = Schema::with_cardinalities(&[14, 2, 91, 5, 14, 7, 2, 5], 10).unwrap();
        let t = ingest_csv("0,0,17,4,10,6,0,0\n0,0,17,4,10,6,0,0\n", schema, false).unwrap();
        assert_eq!(t.occupied(), 1);
        assert_eq!(t.count(&[0, 0, 17, 4, 10, 6, 0, 0]), 2);
    }

    #[test]
    fn census_listing_ingests_with_inferred_codes() {
        let lines = "00,0,17,4,10,6,0,0\n00,0,17,4,52,6,0,0\n00,0,18,0,23,1,0,0\n00,0,18,0,24,1,0,0\n00,0,18,0,51,1,0,0\n";
        let t = ingest_csv(lines, census_schema(), false).unwrap();
        assert_eq!(t.total(), 5);
        assert_eq!(t.occupied(), 5);
        // raw text survives the round trip, including the zero-padded code
        assert_eq!(t.to_csv(), lines);
        assert_eq!(t.schema().variables()[4].codes.as_deref(), Some(&[10, 23, 24, 51, 52][..]));
    }

    #[test]
    fn wrong_arity_names_the_line() {
        let err = ingest_csv("0,0,0\n0,1\n", binary3(), false).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
    }

    #[test]
    fn out_of_range_code_is_domain_error() {
        let err = ingest_csv("0,0,2\n", binary3(), false).unwrap_err();
        assert!(matches!(err, Error::Domain(_)), "{err}");
        let err = ingest_csv("0,-1,0\n", binary3(), false).unwrap_err();
        assert!(matches!(err, Error::Domain(_)), "{err}");
    }

    #[test]
    fn code_dictionary_maps_codes() {
        let schema = Schema::new(
            vec![
                Variable { name: "a".into(), cardinality: 2, codes: Some(vec![10, 20]) },
                Variable { name: "b".into(), cardinality: 2, codes: None },
            ],
            10,
        )
        .unwrap();
        let t = ingest_csv("20,1\n10,0\n", schema.clone(), false).unwrap();
        assert_eq!(t.record(0), &[1, 1]);
        assert!(matches!(ingest_csv("30,1\n", schema, false), Err(Error::Domain(_))));
    }

    #[test]
    fn header_is_skipped_when_flagged() {
        let t = ingest_csv("a,b,c\n0,1,0\n", binary3(), true).unwrap();
        assert_eq!(t.total(), 1);
    }

    #[test]
    fn sample_larger_than_population_is_rejected() {
        let schema = Schema::with_cardinalities(&[2], 1).unwrap();
        assert!(matches!(ingest_csv("0\n1\n", schema, false), Err(Error::Domain(_))));
    }

    #[test]
    fn schema_validation() {
        assert!(Schema::with_cardinalities(&[2, 0], 10).is_err());
        assert!(Schema::with_cardinalities(&[], 10).is_err());
        let dup = vec![
            Variable { name: "a".into(), cardinality: 2, codes: None },
            Variable { name: "a".into(), cardinality: 2, codes: None },
        ];
        assert!(Schema::new(dup, 10).is_err());
        let s = census_schema();
        assert_eq!(s.marginal_size(s.all_variables()), 12_485_200);
        let back = Schema::from_toml_str(&s.to_toml_string()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn marginal_of_middle_variable() {
        let t = four_records();
        let m = t.marginalize(VarSet::singleton(1)).unwrap();
        assert_eq!(m.get(&[0]), 2);
        assert_eq!(m.get(&[1]), 2);
        assert_eq!(m.len(), 2);
    }

    #[test]
    fn full_marginal_equals_counts() {
        let t = four_records();
        let m = t.marginalize(t.schema().all_variables()).unwrap();
        let direct: BTreeMap<Vec<u32>, u64> = t.cells().map(|(c, n)| (c.to_vec(), n)).collect();
        assert_eq!(m.to_sorted(), direct);
    }

    #[test]
    fn single_record_marginal() {
        let t = ingest_csv("1,0,1\n", binary3(), false).unwrap();
        let m = t.marginalize([0, 2].into_iter().collect()).unwrap();
        assert_eq!(m.to_sorted().into_iter().collect::<Vec<_>>(), vec![(vec![1, 1], 1)]);
    }

    #[test]
    fn empty_subset_is_usage_error() {
        assert!(matches!(four_records().marginalize(VarSet::EMPTY), Err(Error::Usage(_))));
    }

    #[test]
    fn size_indices_examples() {
        assert_eq!(four_records().size_indices().0, BTreeMap::from([(1, 4)]));
        let t = ingest_csv("0,0,0\n0,0,0\n1,1,1\n", binary3(), false).unwrap();
        assert_eq!(t.size_indices().0, BTreeMap::from([(1, 1), (2, 1)]));
    }

    #[test]
    fn sample_uniques_in_first_occurrence_order() {
        let t = ingest_csv("1,1,1\n0,0,0\n1,1,1\n", binary3(), false).unwrap();
        assert_eq!(t.sample_uniques(), vec![vec![0, 0, 0]]);
        let t = ingest_csv("1,1,1\n1,1,1\n", binary3(), false).unwrap();
        assert!(t.sample_uniques().is_empty());
        assert_eq!(four_records().sample_uniques().len(), 4);
    }
}
