//! The decision procedure: positivity of the twisted character
//! (Fricke-eigenvalue and one-cusp sign tests), the non-Fricke-replicate
//! rule, and propagation through replicates, producing the classification
//! report.

use crate::catalog::{Catalog, CatalogError, FrickeEigenvalue, FunctionRecord};
use crate::series::QSeries;
use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt;

#[derive(Debug, thiserror::Error)]
pub enum EliminationError {
    #[error("window [{lo}, {hi}] exposes only {nonzero} nonzero coefficients, need at least {min}")]
    WindowTooSmall {
        lo: i64,
        hi: i64,
        nonzero: usize,
        min: usize,
    },
    #[error(transparent)]
    Catalog(#[from] CatalogError),
}

/// Outcome of the sign scan over a window.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "pattern")]
pub enum SignPattern {
    /// No negative coefficient in the window.
    AllNonNegative,
    /// There is `eps` with `sign(a_m) = eps * (-1)^m` for every nonzero
    /// `a_m` in the window, so a half-period translate has constant signs.
    UniformlyAlternating { eps: i8 },
    /// Both patterns fail; the witnesses demonstrate it.
    Mixed {
        /// Exponent of a negative coefficient.
        negative_exponent: i64,
        /// Two exponents of equal parity with opposite signs.
        parity_witness: (i64, i64),
    },
}

/// Scans the signs of the coefficients of `f` at integer exponents in
/// `[window.0, window.1]` (inclusive). At least `min_nonzero` nonzero
/// coefficients must be visible for the verdict to mean anything.
pub fn sign_pattern(
    f: &QSeries,
    window: (i64, i64),
    min_nonzero: usize,
) -> Result<SignPattern, EliminationError> {
    let (lo, hi) = window;
    let mut nonzero: Vec<(i64, BigInt)> = Vec::new();
    for e in lo..=hi {
        if let Ok(c) = f.coeff_int(e) {
            if !c.is_zero() {
                nonzero.push((e, c));
            }
        }
    }
    if nonzero.len() < min_nonzero {
        return Err(EliminationError::WindowTooSmall {
            lo,
            hi,
            nonzero: nonzero.len(),
            min: min_nonzero,
        });
    }
    let negative = nonzero.iter().find(|(_, c)| c.is_negative());
    let Some(&&(neg_e, _)) = negative.as_ref() else {
        return Ok(SignPattern::AllNonNegative);
    };
    // Alternating: sign(a_m) = eps * (-1)^m. The first nonzero term fixes
    // eps; any same-parity pair with opposite signs kills both choices.
    let sign_of = |c: &BigInt| if c.is_negative() { -1i8 } else { 1i8 };
    let (e0, c0) = &nonzero[0];
    let eps = sign_of(c0) * if e0.rem_euclid(2) == 0 { 1 } else { -1 };
    let mut alternating = true;
    let mut parity_witness = None;
    for (e, c) in &nonzero[1..] {
        let expect = eps * if e.rem_euclid(2) == 0 { 1 } else { -1 };
        if sign_of(c) != expect {
            alternating = false;
            // find an equal-parity conflict for the witness
            for (e2, c2) in &nonzero {
                if (e2 - e).rem_euclid(2) == 0 && sign_of(c2) != sign_of(c) {
                    parity_witness = Some((*e2, *e));
                    break;
                }
            }
            break;
        }
    }
    if alternating {
        return Ok(SignPattern::UniformlyAlternating { eps });
    }
    Ok(SignPattern::Mixed {
        negative_exponent: neg_e,
        parity_witness: parity_witness.unwrap_or((*e0, neg_e)),
    })
}

/// Which rule eliminated a function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Rule {
    /// The Fricke involution acts by -1.
    FrickeMinus,
    /// The Fricke involution acts trivially and a negative coefficient is
    /// visible.
    FrickePlusNegative,
    /// Some replicate is a non-Fricke monstrous function.
    NonFrickeReplicate,
    /// One cusp orbit and mixed coefficient signs.
    OneCuspSignPattern,
    /// Some replicate is itself eliminated.
    Propagated,
    None,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Rule::FrickeMinus => "fricke-minus",
            Rule::FrickePlusNegative => "fricke-plus-negative",
            Rule::NonFrickeReplicate => "non-fricke-replicate",
            Rule::OneCuspSignPattern => "one-cusp-sign-pattern",
            Rule::Propagated => "propagated",
            Rule::None => "none",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Status {
    NonMoonshineLike,
    Undetermined,
}

/// Everything needed to re-check a verdict independently.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind")]
pub enum Evidence {
    FrickeMinus {
        eigenvalue: String,
    },
    FrickePlusNegative {
        eigenvalue: String,
        exponent: i64,
        #[serde(with = "crate::series::bigint_string")]
        value: BigInt,
    },
    OneCusp {
        cusp_orbit_count: u32,
        negative_exponent: i64,
        parity_witness: (i64, i64),
    },
    NonFrickeReplicate {
        k: u32,
        chain: Vec<String>,
        replicate: String,
    },
    Propagated {
        k: u32,
        source: String,
    },
    None,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub label: String,
    pub status: Status,
    pub rule: Rule,
    pub evidence: Evidence,
}

/// Fricke eigenvalue test: eigenvalue -1 always eliminates; eigenvalue +1
/// eliminates when a negative coefficient is visible in the window.
pub fn check_fricke(rec: &FunctionRecord, label: &str, f: &QSeries) -> Option<Verdict> {
    match rec.fricke_eigenvalue {
        FrickeEigenvalue::Minus => Some(Verdict {
            label: label.to_string(),
            status: Status::NonMoonshineLike,
            rule: Rule::FrickeMinus,
            evidence: Evidence::FrickeMinus {
                eigenvalue: "-1".into(),
            },
        }),
        FrickeEigenvalue::Plus => {
            let lo = f.lo_exponent().ceil().to_integer();
            let hi = f.order();
            (lo..=hi)
                .filter_map(|e| f.coeff_int(e).ok().map(|c| (e, c)))
                .find(|(_, c)| c.is_negative())
                .map(|(exponent, value)| Verdict {
                    label: label.to_string(),
                    status: Status::NonMoonshineLike,
                    rule: Rule::FrickePlusNegative,
                    evidence: Evidence::FrickePlusNegative {
                        eigenvalue: "+1".into(),
                        exponent,
                        value,
                    },
                })
        }
        FrickeEigenvalue::Unknown => None,
    }
}

/// One-cusp test: a single cusp orbit together with mixed coefficient
/// signs eliminates the function.
pub fn check_one_cusp(
    rec: &FunctionRecord,
    label: &str,
    f: &QSeries,
    window: (i64, i64),
    min_nonzero: usize,
) -> Result<Option<Verdict>, EliminationError> {
    let Some(1) = rec.cusp_orbit_count else {
        return Ok(None);
    };
    match sign_pattern(f, window, min_nonzero)? {
        SignPattern::Mixed {
            negative_exponent,
            parity_witness,
        } => Ok(Some(Verdict {
            label: label.to_string(),
            status: Status::NonMoonshineLike,
            rule: Rule::OneCuspSignPattern,
            evidence: Evidence::OneCusp {
                cusp_orbit_count: 1,
                negative_exponent,
                parity_witness,
            },
        })),
        _ => Ok(None),
    }
}

/// Non-Fricke-replicate rule: if any replicate `f^(k)`, `k > 1`, is a
/// monstrous non-Fricke function, `f` is eliminated.
pub fn check_non_fricke_replicate(
    cat: &Catalog,
    label: &str,
) -> Result<Option<Verdict>, EliminationError> {
    for (k, target) in cat.replicate_closure(label)? {
        let rec = cat.get(&target)?;
        if rec.monstrous && rec.fricke_monstrous == Some(false) {
            let chain = chain_labels(cat, label, k)?;
            return Ok(Some(Verdict {
                label: label.to_string(),
                status: Status::NonMoonshineLike,
                rule: Rule::NonFrickeReplicate,
                evidence: Evidence::NonFrickeReplicate {
                    k,
                    chain,
                    replicate: target,
                },
            }));
        }
    }
    Ok(None)
}

fn chain_labels(cat: &Catalog, label: &str, k: u32) -> Result<Vec<String>, EliminationError> {
    let mut chain = vec![label.to_string()];
    let mut rest = k;
    let mut current = label.to_string();
    let mut p = 2;
    while rest > 1 {
        while rest % p != 0 {
            p += 1;
        }
        current = cat.resolve_replicate(&current, p)?;
        chain.push(current.clone());
        rest /= p;
    }
    Ok(chain)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ClassifyConfig {
    /// Sign-pattern window in integer exponents, inclusive.
    pub sign_window: (i64, i64),
    /// Minimum visible nonzero coefficients for a sign verdict.
    pub min_nonzero: usize,
    /// Materialization order; must certify the sign window.
    pub order: i64,
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        ClassifyConfig {
            sign_window: (-1, 50),
            min_nonzero: 10,
            order: 50,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ReportEntry {
    pub label: String,
    pub status: Status,
    pub rule: Rule,
    pub evidence: Evidence,
    /// Every rule that fired, not just the recorded one.
    pub fired: Vec<Rule>,
    pub primitive: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub group_names: Option<(String, String)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cusp_orbit_count: Option<u32>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassificationReport {
    pub config: ClassifyConfig,
    /// Non-monstrous records in label order.
    pub entries: Vec<ReportEntry>,
    pub undetermined: Vec<String>,
    pub eliminated: Vec<String>,
}

impl ClassificationReport {
    pub fn entry(&self, label: &str) -> Option<&ReportEntry> {
        self.entries.iter().find(|e| e.label == label)
    }

    /// Plain-text table mirroring the published layout: label, group
    /// names, cusps, rule, witness.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "{:<8} {:<10} {:<10} {:<6} {:<24} witness\n",
            "label", "table3", "table2", "cusps", "rule"
        ));
        for e in &self.entries {
            let (t3, t2) = e
                .group_names
                .clone()
                .unwrap_or_else(|| ("-".into(), "-".into()));
            let cusps = e
                .cusp_orbit_count
                .map(|c| c.to_string())
                .unwrap_or_else(|| "-".into());
            let witness = match &e.evidence {
                Evidence::FrickeMinus { .. } => "W = -1".to_string(),
                Evidence::FrickePlusNegative {
                    exponent, value, ..
                } => format!("a_{exponent} = {value}"),
                Evidence::OneCusp {
                    negative_exponent,
                    parity_witness,
                    ..
                } => format!(
                    "a_{negative_exponent} < 0, parity clash at ({}, {})",
                    parity_witness.0, parity_witness.1
                ),
                Evidence::NonFrickeReplicate { k, replicate, .. } => {
                    format!("f^({k}) = {replicate}")
                }
                Evidence::Propagated { k, source } => format!("f^({k}) = {source}"),
                Evidence::None => "-".to_string(),
            };
            out.push_str(&format!(
                "{:<8} {:<10} {:<10} {:<6} {:<24} {}\n",
                e.label, t3, t2, cusps, e.rule, witness
            ));
        }
        out.push_str(&format!(
            "\nundetermined: {}\n",
            if self.undetermined.is_empty() {
                "(none)".to_string()
            } else {
                self.undetermined.join(", ")
            }
        ));
        out
    }
}

/// Runs every per-record check on every non-monstrous record, then
/// propagates eliminations through replicates to a fixpoint.
///
/// Rule precedence for the recorded verdict when several fire:
/// FrickeMinus > FrickePlusNegative > NonFrickeReplicate >
/// OneCuspSignPattern > Propagated. Monstrous records are the reference
/// set and are never classified.
pub fn classify(cat: &Catalog, config: &ClassifyConfig) -> Result<ClassificationReport, EliminationError> {
    let mut entries: Vec<ReportEntry> = Vec::new();
    let mut status: BTreeMap<String, (Status, Rule, Evidence)> = BTreeMap::new();

    for (label, rec) in cat.functions.iter().filter(|(_, r)| !r.monstrous) {
        let mut warnings = Vec::new();
        let mut verdicts: Vec<Verdict> = Vec::new();

        let series = match cat.materialize_series(label, config.order) {
            Ok(s) => Some(s),
            Err(e) => {
                warnings.push(format!("cannot materialize: {e}"));
                None
            }
        };

        if let Some(f) = &series {
            if let Some(v) = check_fricke(rec, label, f) {
                verdicts.push(v);
            }
            match check_one_cusp(rec, label, f, config.sign_window, config.min_nonzero) {
                Ok(Some(v)) => verdicts.push(v),
                Ok(None) => {}
                Err(EliminationError::WindowTooSmall { nonzero, min, .. }) => {
                    if rec.cusp_orbit_count == Some(1) {
                        warnings.push(format!(
                            "sign window too small: {nonzero} nonzero coefficients, need {min}"
                        ));
                    }
                }
                Err(e) => return Err(e),
            }
        }
        match check_non_fricke_replicate(cat, label) {
            Ok(Some(v)) => verdicts.push(v),
            Ok(None) => {}
            Err(EliminationError::Catalog(CatalogError::UnresolvableReplicate {
                label: l,
                prime,
            })) => {
                warnings.push(format!("unresolvable replicate {prime} of {l}"));
            }
            Err(e) => return Err(e),
        }

        verdicts.sort_by_key(|v| v.rule);
        let fired: Vec<Rule> = verdicts.iter().map(|v| v.rule).collect();
        let (st, rule, evidence) = match verdicts.into_iter().next() {
            Some(v) => (v.status, v.rule, v.evidence),
            None => (Status::Undetermined, Rule::None, Evidence::None),
        };
        status.insert(label.clone(), (st, rule, evidence.clone()));
        entries.push(ReportEntry {
            label: label.clone(),
            status: st,
            rule,
            evidence,
            fired,
            primitive: cat.is_primitive(label)?,
            group_names: rec.group_names.clone(),
            cusp_orbit_count: rec.cusp_orbit_count,
            warnings,
        });
    }

    // Propagation to a fixpoint: a record whose any replicate is
    // eliminated becomes eliminated with rule Propagated.
    loop {
        let mut changed = false;
        for entry in &mut entries {
            if status[&entry.label].0 == Status::NonMoonshineLike {
                continue;
            }
            for (k, target) in cat.replicate_closure(&entry.label)? {
                let hit = matches!(
                    status.get(&target),
                    Some((Status::NonMoonshineLike, _, _))
                );
                if hit {
                    entry.status = Status::NonMoonshineLike;
                    entry.rule = Rule::Propagated;
                    entry.evidence = Evidence::Propagated {
                        k,
                        source: target.clone(),
                    };
                    entry.fired.push(Rule::Propagated);
                    status.insert(
                        entry.label.clone(),
                        (entry.status, entry.rule, entry.evidence.clone()),
                    );
                    changed = true;
                    break;
                }
            }
        }
        if !changed {
            break;
        }
    }

    let undetermined = entries
        .iter()
        .filter(|e| e.status == Status::Undetermined)
        .map(|e| e.label.clone())
        .collect();
    let eliminated = entries
        .iter()
        .filter(|e| e.status == Status::NonMoonshineLike)
        .map(|e| e.label.clone())
        .collect();
    Ok(ClassificationReport {
        config: *config,
        entries,
        undetermined,
        eliminated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eta::j_normalized;

    fn series(lo: i64, coeffs: &[i64]) -> QSeries {
        QSeries::from_integer_coeffs(lo, coeffs.iter().map(|&c| BigInt::from(c)).collect())
            .unwrap()
    }

    #[test]
    fn j_window_is_all_non_negative() {
        let j = j_normalized(20);
        let p = sign_pattern(&j, (-1, 20), 10).unwrap();
        assert_eq!(p, SignPattern::AllNonNegative);
    }

    #[test]
    fn single_negative_odd_term_alternates() {
        // q^-1 - q examined on [1, 50]: one nonzero, it fits the
        // alternating pattern with eps = +1.
        let mut coeffs = vec![0; 52];
        coeffs[0] = 1;
        coeffs[2] = -1;
        let f = series(-1, &coeffs);
        let p = sign_pattern(&f, (1, 50), 1).unwrap();
        assert_eq!(p, SignPattern::UniformlyAlternating { eps: 1 });
    }

    #[test]
    fn parity_clash_is_mixed() {
        // +1 at q^1 and -1 at q^3: same parity, opposite signs.
        let f = series(-1, &[1, 0, 1, 0, -1, 2, 2, 5, 1, 1, 3, 4, 1]);
        match sign_pattern(&f, (-1, 11), 5).unwrap() {
            SignPattern::Mixed {
                negative_exponent,
                parity_witness,
            } => {
                assert_eq!(negative_exponent, 3);
                assert_eq!((parity_witness.0 - parity_witness.1).rem_euclid(2), 0);
            }
            other => panic!("expected Mixed, got {other:?}"),
        }
    }

    #[test]
    fn window_too_small_reported() {
        let f = series(-1, &[1, 0, 1]);
        assert!(matches!(
            sign_pattern(&f, (-1, 1), 10),
            Err(EliminationError::WindowTooSmall { .. })
        ));
    }
}
