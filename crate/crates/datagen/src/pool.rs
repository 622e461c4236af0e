//! A growing pool of verified completely replicable functions.
//!
//! Registration is fully mechanical: a candidate series has its prime
//! replicates extracted from the replication identities, matched against
//! the pool (recursively registering new functions discovered that way),
//! its order computed from the replicate chains, and the identities
//! verified on a finite window before anything is admitted.

use crate::kit::{extract_prime_replicate, matches_through, normalize_candidate};
use num_traits::One;
use replicable_core::replication::{extend_coefficients, verify_replicable, ReplicatePack};
use replicable_core::series::QSeries;
use std::collections::BTreeMap;

pub const SMALL_PRIMES: [u32; 6] = [2, 3, 5, 7, 11, 13];

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FlagSource {
    /// Fricke status computed exactly from an eta expression.
    EtaComputed(bool),
    /// Invariant under the Fricke involution by construction.
    FrickeByConstruction,
    /// h-th root of a base: shares the base's Fricke status (for odd h or
    /// monstrous functions; the analysis lives in the generator notes).
    InheritsBase(String),
    /// Discovered as an unmatched replicate: every non-Fricke monstrous
    /// function has an eta product, and all of those are searched, so an
    /// unmatched monstrous function is Fricke.
    ByElimination,
    /// Non-monstrous: the eigenvalue is ingested data, not computed.
    NotApplicable,
}

/// How an entry's series is produced, so it can be re-expanded to any
/// order later.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Construction {
    /// J = j - 744.
    JNormalized,
    /// Normalized eta quotient (constant term dropped).
    Eta(crate::kit::EtaVec),
    /// u + C/u + shift for an eta vector u inverted by the Fricke
    /// involution of its level.
    FrickeSum(crate::kit::EtaVec, i64),
    /// h-th root of base(h tau) + c.
    Root {
        base: String,
        h: u32,
        c: num_bigint::BigInt,
    },
    /// Solution t of a monic polynomial equation P(t) = base(m tau).
    PolynomialCover {
        base: String,
        rescale: u32,
        lower: Vec<num_bigint::BigInt>,
    },
    /// Weight-2 Eisenstein combination divided by an eta quotient.
    EisensteinRatio {
        d: i64,
        denominator: crate::kit::EtaVec,
    },
    /// Extracted as the p-th replicate of another entry; re-expansion goes
    /// through the replication identities.
    Extracted { parent: String, p: u32 },
}

#[derive(Debug, Clone)]
pub struct PoolEntry {
    pub name: String,
    pub series: QSeries,
    pub level: Option<i64>,
    pub order: u32,
    pub replicates: BTreeMap<u32, String>,
    pub flag: FlagSource,
    pub construction: Construction,
    pub provenance: String,
    /// Largest order through which verify_replicable certified this entry.
    pub verified_order: i64,
}

#[derive(Debug, Default)]
pub struct Pool {
    pub entries: Vec<PoolEntry>,
}

#[derive(Debug)]
pub enum RegisterOutcome {
    New(String),
    Existing(String),
}

#[derive(Debug, thiserror::Error)]
pub enum PoolError {
    #[error("candidate is not a normalized q^-1 + O(q) series")]
    NotNormalized,
    #[error("candidate window too small for replicate extraction at prime {0}")]
    WindowTooSmall(u32),
    #[error("extracted replicate at prime {prime} matches several pool entries: {matches:?}")]
    Ambiguous { prime: u32, matches: Vec<String> },
    #[error("replication identities fail for '{name}': {detail}")]
    NotReplicable { name: String, detail: String },
    #[error("no pool entry named '{0}'")]
    Unknown(String),
}

impl Pool {
    pub fn get(&self, name: &str) -> Option<&PoolEntry> {
        self.entries.iter().find(|e| e.name == name)
    }

    fn get_mut(&mut self, name: &str) -> Option<&mut PoolEntry> {
        self.entries.iter_mut().find(|e| e.name == name)
    }

    /// Finds the unique pool entry equal to `g` on a shared window of at
    /// least `min_order`.
    pub fn find_match(&self, g: &QSeries, min_order: i64) -> Result<Option<String>, PoolError> {
        let mut hits = Vec::new();
        for e in &self.entries {
            if matches_through(&e.series, g, min_order) {
                hits.push(e.name.clone());
            }
        }
        match hits.len() {
            0 => Ok(None),
            1 => Ok(Some(hits.pop().unwrap())),
            _ => Err(PoolError::Ambiguous {
                prime: 0,
                matches: hits,
            }),
        }
    }

    /// Resolves the k-th replicate name through the pool's prime maps.
    pub fn resolve(&self, name: &str, k: u32) -> Result<String, PoolError> {
        let mut current = name.to_string();
        let mut rest = k;
        let mut p = 2;
        while rest > 1 {
            while rest % p != 0 {
                p += 1;
            }
            let e = self.get(&current).ok_or(PoolError::Unknown(current.clone()))?;
            current = e
                .replicates
                .get(&p)
                .cloned()
                .unwrap_or_else(|| current.clone());
            rest /= p;
        }
        Ok(current)
    }

    /// Registers a candidate under `name`, extracting and matching its
    /// prime replicates (registering unmatched ones recursively under
    /// derived names) and verifying the replication identities.
    pub fn register(
        &mut self,
        name: &str,
        candidate: &QSeries,
        level: Option<i64>,
        flag: FlagSource,
        construction: Construction,
        provenance: &str,
    ) -> Result<RegisterOutcome, PoolError> {
        let f = normalize_candidate(candidate).ok_or(PoolError::NotNormalized)?;
        // Deduplicate: same function already present (maybe with a shorter
        // window -- keep the longer one).
        if let Some(existing) = self.find_match(&f, 6)? {
            if self.get(&existing).unwrap().series.order() < f.order() {
                self.get_mut(&existing).unwrap().series = f;
            }
            return Ok(RegisterOutcome::Existing(existing));
        }

        // Extract prime replicates where the window allows.
        let mut replicates: BTreeMap<u32, String> = BTreeMap::new();
        for &p in &SMALL_PRIMES {
            let reach = f.order() / (p as i64 * p as i64);
            if reach < 4 {
                continue;
            }
            let rep = extract_prime_replicate(&f, p).ok_or(PoolError::WindowTooSmall(p))?;
            let window = rep.order().min(8);
            if matches_through(&rep, &f, window) {
                continue; // self-replicating at p
            }
            let target = match self.find_match(&rep, window)? {
                Some(t) => t,
                None => {
                    let child = format!("{name}^({p})");
                    match self.register(
                        &child,
                        &rep,
                        None,
                        FlagSource::ByElimination,
                        Construction::Extracted {
                            parent: name.to_string(),
                            p,
                        },
                        &format!("extracted as the {p}-th replicate of {name}"),
                    )? {
                        RegisterOutcome::New(n) | RegisterOutcome::Existing(n) => n,
                    }
                }
            };
            replicates.insert(p, target);
        }

        let order = self.compute_order(name, &replicates);

        // Short windows (typical for extracted replicates) are widened
        // through the identities before verification.
        let f = if f.order() < 52 {
            match self.build_pack(name, &f, &replicates, 6, 52) {
                Ok(pack) => match extend_coefficients(&pack, 52) {
                    Ok(out) => out.pack.base().clone(),
                    Err(_) => f,
                },
                Err(_) => f,
            }
        } else {
            f
        };

        // Verify the identities on a window the data can certify.
        let n_max = 4u32;
        let verify_order = (f.order() / n_max as i64).min(12);
        if verify_order < 6 {
            return Err(PoolError::NotReplicable {
                name: name.into(),
                detail: format!(
                    "window order {} cannot certify the identities through order 6",
                    f.order()
                ),
            });
        }
        let pack = self.build_pack(name, &f, &replicates, n_max, verify_order)?;
        let report = verify_replicable(&pack, n_max, verify_order);
        if !report.pass {
            let detail = report
                .checks
                .iter()
                .filter(|c| c.first_mismatch.is_some() || c.error.is_some())
                .map(|c| {
                    format!(
                        "n={}: {}{}",
                        c.n,
                        c.first_mismatch
                            .as_ref()
                            .map(|m| format!("mismatch at {} ({} vs {})", m.exponent, m.lhs, m.rhs))
                            .unwrap_or_default(),
                        c.error.clone().unwrap_or_default()
                    )
                })
                .collect::<Vec<_>>()
                .join("; ");
            return Err(PoolError::NotReplicable {
                name: name.into(),
                detail,
            });
        }

        self.entries.push(PoolEntry {
            name: name.to_string(),
            series: f,
            level,
            order,
            replicates,
            flag,
            construction,
            provenance: provenance.to_string(),
            verified_order: verify_order,
        });
        Ok(RegisterOutcome::New(name.to_string()))
    }

    /// Order of the function: 1 if every prime replicate is itself,
    /// otherwise p * order(f^(p)) for any mapped prime p (the maps are
    /// consistent, so any choice agrees; we assert that).
    fn compute_order(&self, name: &str, replicates: &BTreeMap<u32, String>) -> u32 {
        let mut candidates = Vec::new();
        for (&p, target) in replicates {
            if target != name {
                if let Some(e) = self.get(target) {
                    candidates.push(p * e.order);
                }
            }
        }
        candidates.sort();
        candidates.dedup();
        match candidates.len() {
            0 => 1,
            1 => candidates[0],
            _ => {
                // Replicate orders can disagree only if some map entry is
                // wrong; surface it loudly.
                panic!(
                    "inconsistent order for {name}: candidates {candidates:?} from {replicates:?}"
                );
            }
        }
    }

    fn build_pack(
        &self,
        name: &str,
        f: &QSeries,
        replicates: &BTreeMap<u32, String>,
        n_max: u32,
        verify_order: i64,
    ) -> Result<ReplicatePack, PoolError> {
        let window = n_max as i64 * verify_order + n_max as i64 + 2;
        let mut labels = vec![name.to_string()];
        let mut series = vec![f.truncate_scaled(window.min(f.prec_scaled()))];
        let mut index: BTreeMap<String, usize> = BTreeMap::new();
        index.insert(name.to_string(), 0);
        let mut assignment = Vec::new();
        for a in 1..=n_max {
            let target = self.resolve_with(name, replicates, a)?;
            let idx = match index.get(&target) {
                Some(&i) => i,
                None => {
                    let e = self.get(&target).ok_or(PoolError::Unknown(target.clone()))?;
                    let w = window.min(e.series.prec_scaled());
                    labels.push(target.clone());
                    series.push(e.series.truncate_scaled(w));
                    index.insert(target.clone(), labels.len() - 1);
                    labels.len() - 1
                }
            };
            assignment.push(idx);
        }
        ReplicatePack::new(series, labels, assignment).map_err(|e| PoolError::NotReplicable {
            name: name.into(),
            detail: e.to_string(),
        })
    }

    /// Resolve replicates for a function not yet in the pool, whose own
    /// prime map is `replicates`.
    fn resolve_with(
        &self,
        name: &str,
        replicates: &BTreeMap<u32, String>,
        k: u32,
    ) -> Result<String, PoolError> {
        if k == 1 {
            return Ok(name.to_string());
        }
        let mut rest = k;
        let mut p = 2;
        while rest % p != 0 {
            p += 1;
        }
        rest /= p;
        let first = replicates
            .get(&p)
            .cloned()
            .unwrap_or_else(|| name.to_string());
        if first == name {
            self.resolve_with(name, replicates, rest)
        } else {
            self.resolve(&first, rest)
        }
    }

    /// Widens an entry's series to at least `target_order` through the
    /// replication identities (its replicate map must already be known).
    pub fn widen(&mut self, name: &str, target_order: i64) -> Result<(), PoolError> {
        let e = self.get(name).ok_or(PoolError::Unknown(name.into()))?;
        if e.series.order() >= target_order {
            return Ok(());
        }
        let f = e.series.clone();
        let replicates = e.replicates.clone();
        let pack = self.build_pack(name, &f, &replicates, 6, target_order)?;
        let out = extend_coefficients(&pack, target_order).map_err(|err| {
            PoolError::NotReplicable {
                name: name.into(),
                detail: err.to_string(),
            }
        })?;
        self.get_mut(name).unwrap().series = out.pack.base().clone();
        Ok(())
    }

    pub fn set_replicate(&mut self, name: &str, p: u32, target: &str) {
        if let Some(e) = self.get_mut(name) {
            e.replicates.insert(p, target.to_string());
            // order may sharpen once a new chain is known
        }
        let e = self.get(name).unwrap().clone();
        let order = self.compute_order(name, &e.replicates);
        self.get_mut(name).unwrap().order = order.max(e.order);
    }

    /// Renames an entry, rewriting every replicate reference.
    pub fn rename(&mut self, from: &str, to: &str) {
        assert!(self.get(to).is_none(), "rename target '{to}' taken");
        for e in &mut self.entries {
            if e.name == from {
                e.name = to.to_string();
            }
            for target in e.replicates.values_mut() {
                if target == from {
                    *target = to.to_string();
                }
            }
            if let FlagSource::InheritsBase(b) = &mut e.flag {
                if b == from {
                    *b = to.to_string();
                }
            }
        }
    }

    /// Resolved Fricke flag for a monstrous entry.
    pub fn fricke_flag(&self, name: &str) -> Option<bool> {
        let e = self.get(name)?;
        match &e.flag {
            FlagSource::EtaComputed(v) => Some(*v),
            FlagSource::FrickeByConstruction => Some(true),
            FlagSource::ByElimination => Some(true),
            FlagSource::InheritsBase(b) => self.fricke_flag(b),
            FlagSource::NotApplicable => None,
        }
    }
}

/// Sanity helper for tests and assembly: a normalized candidate must have
/// leading coefficient one.
pub fn is_normalized(f: &QSeries) -> bool {
    matches!(f.leading(), Some((-1, c)) if c.is_one())
        && f.coeff_int(0).map(|c| c == num_bigint::BigInt::ZERO).unwrap_or(false)
}
