//! The catalog of completely replicable functions the pipeline reasons
//! about: labels, coefficient prefixes, prime replicate maps and the group
//! metadata consumed by the classification rules.
//!
//! Metadata that the mathematics of this crate cannot derive (Fricke
//! eigenvalues of eigengroups, cusp orbit counts) is ingested data; each
//! record carries a provenance note naming its source.

use crate::eta::{eta_quotient, EtaError, EtaQuotientSpec};
use crate::replication::{extend_coefficients, ReplicatePack, ReplicationError};
use crate::series::QSeries;
use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

#[derive(Debug, thiserror::Error)]
pub enum CatalogError {
    #[error("cannot read catalog: {0}")]
    Io(#[from] std::io::Error),
    #[error("cannot parse catalog: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("unsupported catalog version {0} (expected 1)")]
    Version(u32),
    #[error("record '{label}' violates '{invariant}'")]
    Validation { label: String, invariant: String },
    #[error("no record labelled '{0}'")]
    UnknownLabel(String),
    #[error("cannot resolve the {prime}-th replicate of '{label}'")]
    UnresolvableReplicate { label: String, prime: u32 },
    #[error("record '{label}' has neither an eta seed nor a usable coefficient prefix")]
    NoSeed { label: String },
    #[error("materializing '{label}': {source}")]
    Eta { label: String, source: EtaError },
    #[error("materializing '{label}': {source}")]
    Replication {
        label: String,
        source: ReplicationError,
    },
    #[error("replicate cycle through '{0}' cannot be materialized")]
    ReplicateCycle(String),
}

/// The Fricke eigenvalue of a function under the relevant involution,
/// where known. Read from published group tables, never computed here.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum FrickeEigenvalue {
    #[serde(rename = "+1")]
    Plus,
    #[serde(rename = "-1")]
    Minus,
    #[serde(rename = "unknown")]
    #[default]
    Unknown,
}

/// A `BigInt` that serializes as a decimal string.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StringInt(pub BigInt);

impl Serialize for StringInt {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        ser.serialize_str(&self.0.to_string())
    }
}

impl<'de> Deserialize<'de> for StringInt {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let s = String::deserialize(de)?;
        s.parse().map(StringInt).map_err(D::Error::custom)
    }
}

/// One completely replicable function.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FunctionRecord {
    /// Level of a Gamma_0(N) the fixing group contains, when known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level: Option<u32>,
    /// Known coefficients keyed by exponent; always contains -1 -> 1 and
    /// 0 -> 0.
    pub coefficient_prefix: BTreeMap<i64, StringInt>,
    /// Prime p -> label of the p-th replicate. Absent primes replicate to
    /// the function itself.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub replicates: BTreeMap<u32, String>,
    pub monstrous: bool,
    /// Whether the class is Fricke; meaningful only when `monstrous`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fricke_monstrous: Option<bool>,
    #[serde(default)]
    pub fricke_eigenvalue: FrickeEigenvalue,
    /// Number of cusp orbits of the fixing group, when known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cusp_orbit_count: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta_seed: Option<EtaQuotientSpec>,
    /// Published table names for the fixing group, when quoted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group_names: Option<(String, String)>,
    /// Where the data in this record comes from.
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub provenance: String,
}

impl FunctionRecord {
    /// The prefix as a series; `None` when the prefix carries no window.
    pub fn prefix_series(&self) -> Option<QSeries> {
        let hi = *self.coefficient_prefix.keys().max()?;
        let lo = *self.coefficient_prefix.keys().min()?;
        let mut coeffs = Vec::with_capacity((hi - lo + 1) as usize);
        for k in lo..=hi {
            coeffs.push(
                self.coefficient_prefix
                    .get(&k)
                    .map(|v| v.0.clone())
                    .unwrap_or_else(BigInt::zero),
            );
        }
        QSeries::from_integer_coeffs(lo, coeffs).ok()
    }

    /// Largest exponent the prefix covers contiguously from -1.
    pub fn prefix_order(&self) -> i64 {
        let mut k = -1;
        while self.coefficient_prefix.contains_key(&(k + 1)) {
            k += 1;
        }
        k
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Catalog {
    pub version: u32,
    pub functions: BTreeMap<String, FunctionRecord>,
}

impl Catalog {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, CatalogError> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self, CatalogError> {
        let cat: Catalog = serde_json::from_str(text)?;
        cat.validate()?;
        Ok(cat)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("catalog serializes")
    }

    pub fn get(&self, label: &str) -> Result<&FunctionRecord, CatalogError> {
        self.functions
            .get(label)
            .ok_or_else(|| CatalogError::UnknownLabel(label.to_string()))
    }

    /// Checks the type invariants: version, referential closure of the
    /// replicate maps, normalized prefixes, and commuting prime steps.
    pub fn validate(&self) -> Result<(), CatalogError> {
        if self.version != 1 {
            return Err(CatalogError::Version(self.version));
        }
        let fail = |label: &str, invariant: &str| CatalogError::Validation {
            label: label.to_string(),
            invariant: invariant.to_string(),
        };
        for (label, rec) in &self.functions {
            match rec.coefficient_prefix.get(&-1) {
                Some(v) if v.0.is_one() => {}
                _ => return Err(fail(label, "coefficient_prefix must map -1 to 1")),
            }
            match rec.coefficient_prefix.get(&0) {
                Some(v) if v.0.is_zero() => {}
                _ => return Err(fail(label, "coefficient_prefix must map 0 to 0")),
            }
            for (p, target) in &rec.replicates {
                if !is_prime(*p) {
                    return Err(fail(label, "replicate keys must be prime"));
                }
                if !self.functions.contains_key(target) {
                    return Err(fail(
                        label,
                        &format!("replicate target '{target}' must resolve in the catalog"),
                    ));
                }
            }
            if rec.fricke_monstrous.is_some() && !rec.monstrous {
                return Err(fail(
                    label,
                    "fricke_monstrous is meaningful only when monstrous",
                ));
            }
        }
        // Prime replicate steps must commute: p then q equals q then p.
        for label in self.functions.keys() {
            let rec = &self.functions[label];
            let primes: Vec<u32> = rec.replicates.keys().copied().collect();
            for &p in &primes {
                for &q in &primes {
                    let pq = self.step(label, p).and_then(|l| self.step(&l, q));
                    let qp = self.step(label, q).and_then(|l| self.step(&l, p));
                    if pq != qp {
                        return Err(fail(
                            label,
                            &format!("replicate steps at {p} and {q} must commute"),
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    /// One prime replicate step; absent map entries mean "self".
    fn step(&self, label: &str, p: u32) -> Option<String> {
        let rec = self.functions.get(label)?;
        Some(
            rec.replicates
                .get(&p)
                .cloned()
                .unwrap_or_else(|| label.to_string()),
        )
    }

    /// Label of the k-th replicate, resolved multiplicatively through the
    /// prime maps: `f^(ab) = (f^(a))^(b)`.
    pub fn resolve_replicate(&self, label: &str, k: u32) -> Result<String, CatalogError> {
        assert!(k >= 1);
        self.get(label)?;
        let mut current = label.to_string();
        let mut rest = k;
        let mut p = 2;
        while rest > 1 {
            while rest % p != 0 {
                p += 1;
            }
            current =
                self.step(&current, p)
                    .ok_or_else(|| CatalogError::UnresolvableReplicate {
                        label: label.to_string(),
                        prime: p,
                    })?;
            rest /= p;
        }
        Ok(current)
    }

    /// All labels reachable by nontrivial replicate steps, paired with a
    /// step product `k > 1` that reaches them.
    pub fn replicate_closure(&self, label: &str) -> Result<Vec<(u32, String)>, CatalogError> {
        self.get(label)?;
        let mut seen: BTreeSet<String> = BTreeSet::new();
        let mut out = Vec::new();
        let mut frontier: Vec<(u32, String)> = vec![(1, label.to_string())];
        seen.insert(label.to_string());
        // Orders strictly decrease along non-self steps, so this terminates.
        while let Some((k, l)) = frontier.pop() {
            let primes: Vec<u32> = self
                .functions
                .get(&l)
                .map(|r| r.replicates.keys().copied().collect())
                .unwrap_or_default();
            for p in primes {
                let next = self.step(&l, p).unwrap();
                if next != l && seen.insert(next.clone()) {
                    out.push((k * p, next.clone()));
                    frontier.push((k * p, next));
                }
            }
        }
        out.sort();
        Ok(out)
    }

    /// True when every nontrivial replicate of the record is monstrous:
    /// the "primitive" notion for non-monstrous records.
    pub fn is_primitive(&self, label: &str) -> Result<bool, CatalogError> {
        let rec = self.get(label)?;
        if rec.monstrous {
            return Ok(false);
        }
        for (_, target) in self.replicate_closure(label)? {
            if target != label && !self.get(&target)?.monstrous {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Produces the q-expansion of a record through exponent `order`: from
    /// its eta seed if it has one, otherwise from its coefficient prefix,
    /// extended through the replication identities when the prefix is
    /// shorter than the request.
    pub fn materialize_series(&self, label: &str, order: i64) -> Result<QSeries, CatalogError> {
        let mut memo = BTreeMap::new();
        self.materialize_inner(label, order, &mut memo, &mut BTreeSet::new())
    }

    fn materialize_inner(
        &self,
        label: &str,
        order: i64,
        memo: &mut BTreeMap<(String, i64), QSeries>,
        visiting: &mut BTreeSet<String>,
    ) -> Result<QSeries, CatalogError> {
        if let Some(s) = memo.get(&(label.to_string(), order)) {
            return Ok(s.clone());
        }
        let rec = self.get(label)?;
        if let Some(seed) = &rec.eta_seed {
            let s = eta_quotient(seed, order).map_err(|source| CatalogError::Eta {
                label: label.to_string(),
                source,
            })?;
            memo.insert((label.to_string(), order), s.clone());
            return Ok(s);
        }
        let prefix = rec.prefix_series().ok_or_else(|| CatalogError::NoSeed {
            label: label.to_string(),
        })?;
        if rec.prefix_order() >= order {
            let s = prefix.truncate_order(order);
            memo.insert((label.to_string(), order), s.clone());
            return Ok(s);
        }
        if !visiting.insert(label.to_string()) {
            return Err(CatalogError::ReplicateCycle(label.to_string()));
        }
        // Replicates are materialized first (with margin: the degree-n
        // identity reads them near exponent n * order / a^2).
        let n_max = 6u32.max(rec.replicates.keys().copied().max().unwrap_or(2));
        let mut labels = vec![label.to_string()];
        let mut series = vec![prefix];
        let mut index: BTreeMap<String, usize> = BTreeMap::new();
        index.insert(label.to_string(), 0);
        let mut assignment = Vec::with_capacity(n_max as usize);
        for a in 1..=n_max {
            let target = self.resolve_replicate(label, a)?;
            let idx = match index.get(&target) {
                Some(&i) => i,
                None => {
                    let dep =
                        self.materialize_inner(&target, order * n_max as i64, memo, visiting)?;
                    labels.push(target.clone());
                    series.push(dep);
                    index.insert(target, labels.len() - 1);
                    labels.len() - 1
                }
            };
            assignment.push(idx);
        }
        visiting.remove(label);
        let pack = ReplicatePack::new(series, labels, assignment).map_err(|source| {
            CatalogError::Replication {
                label: label.to_string(),
                source,
            }
        })?;
        let out =
            extend_coefficients(&pack, order).map_err(|source| CatalogError::Replication {
                label: label.to_string(),
                source,
            })?;
        let s = out.pack.base().truncate_order(order);
        memo.insert((label.to_string(), order), s.clone());
        Ok(s)
    }

    /// Builds a replicate pack of materialized series for `label`, suitable
    /// for [`crate::replication::verify_replicable`].
    pub fn replicate_pack(
        &self,
        label: &str,
        n_max: u32,
        order: i64,
    ) -> Result<ReplicatePack, CatalogError> {
        let mut labels = Vec::new();
        let mut series = Vec::new();
        let mut index: BTreeMap<String, usize> = BTreeMap::new();
        let mut assignment = Vec::with_capacity(n_max as usize);
        for a in 1..=n_max {
            let target = self.resolve_replicate(label, a)?;
            let idx = match index.get(&target) {
                Some(&i) => i,
                None => {
                    let dep = self.materialize_series(&target, order)?;
                    labels.push(target.clone());
                    series.push(dep);
                    index.insert(target.clone(), labels.len() - 1);
                    labels.len() - 1
                }
            };
            assignment.push(idx);
        }
        ReplicatePack::new(series, labels, assignment).map_err(|source| {
            CatalogError::Replication {
                label: label.to_string(),
                source,
            }
        })
    }
}

fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Order (label number prefix) of an ACMS-style label such as "9a" or
/// "3A"; `None` when the label has no leading number.
pub fn label_order(label: &str) -> Option<u32> {
    let digits: String = label.chars().take_while(|c| c.is_ascii_digit()).collect();
    digits.parse().ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eta::j_normalized;

    fn jish_record() -> FunctionRecord {
        let j = j_normalized(8);
        let mut prefix = BTreeMap::new();
        for k in -1..=7 {
            prefix.insert(k, StringInt(j.coeff_int(k).unwrap()));
        }
        FunctionRecord {
            level: Some(1),
            coefficient_prefix: prefix,
            replicates: BTreeMap::new(),
            monstrous: true,
            fricke_monstrous: Some(true),
            fricke_eigenvalue: FrickeEigenvalue::Plus,
            cusp_orbit_count: Some(1),
            eta_seed: None,
            group_names: None,
            provenance: "test".into(),
        }
    }

    fn one_record_catalog() -> Catalog {
        let mut functions = BTreeMap::new();
        functions.insert("1A".to_string(), jish_record());
        Catalog {
            version: 1,
            functions,
        }
    }

    #[test]
    fn round_trip_is_canonical() {
        let cat = one_record_catalog();
        let json = cat.to_json();
        let back = Catalog::from_json(&json).unwrap();
        assert_eq!(back.to_json(), json);
    }

    #[test]
    fn dangling_replicate_rejected() {
        let mut cat = one_record_catalog();
        cat.functions
            .get_mut("1A")
            .unwrap()
            .replicates
            .insert(2, "2X".into());
        let err = cat.validate().unwrap_err();
        assert!(matches!(err, CatalogError::Validation { .. }));
    }

    #[test]
    fn prefix_invariants_enforced() {
        let mut cat = one_record_catalog();
        cat.functions
            .get_mut("1A")
            .unwrap()
            .coefficient_prefix
            .remove(&-1);
        assert!(cat.validate().is_err());
    }

    #[test]
    fn self_resolution() {
        let cat = one_record_catalog();
        for k in [1, 2, 6, 12] {
            assert_eq!(cat.resolve_replicate("1A", k).unwrap(), "1A");
        }
    }

    #[test]
    fn materialize_from_prefix_extends() {
        let cat = one_record_catalog();
        let s = cat.materialize_series("1A", 12).unwrap();
        let j = j_normalized(12);
        assert!(s.agrees_with(&j));
        assert!(s.order() >= 12);
        let again = cat.materialize_series("1A", 12).unwrap();
        assert_eq!(s, again);
    }

    #[test]
    fn materialize_from_eta_seed() {
        let mut cat = one_record_catalog();
        cat.functions.get_mut("1A").unwrap().eta_seed =
            Some(EtaQuotientSpec::new(vec![(1, 24), (2, -24)], 24));
        let s = cat.materialize_series("1A", 6).unwrap();
        assert_eq!(s.coeff_int(1).unwrap(), BigInt::from(276));
    }

    #[test]
    fn label_order_parses() {
        assert_eq!(label_order("9a"), Some(9));
        assert_eq!(label_order("117a"), Some(117));
        assert_eq!(label_order("J"), None);
    }
}
