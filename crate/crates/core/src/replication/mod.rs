//! The replication identity on q-expansions.
//!
//! For a normalized series `f = q^-1 + a_1 q + ...` with companion series
//! `f^(a)`, the degree-`n` identity equates the Faber image `Phi_{f,n}(f)`
//! with the twisted Hecke sum over `(a, b, d)` with `ad = n`, `0 <= b < d`:
//!
//! ```text
//!   Phi_{f,n}(f(tau)) = sum_{ad=n} sum_{0<=b<d} f^(a)((a tau + b)/d).
//! ```
//!
//! This module evaluates the right side in a closed form that never leaves
//! the integers, verifies the identity on finite windows, and extends
//! coefficient prefixes by solving the identities for unknowns.

mod extend;

pub use extend::{extend_coefficients, ExtensionLog, ExtensionOutcome, ExtensionStep};

use crate::faber::{faber_poly, FaberError};
use crate::series::{Mismatch, QSeries};
use num_bigint::BigInt;
use num_traits::One;
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ReplicationError {
    #[error("no replicate series assigned for divisor {divisor} of {n}")]
    MissingReplicate { n: u32, divisor: u32 },
    #[error("replicate '{label}' is not a normalized candidate (q^-1 + O(q), scale 1)")]
    NotNormalized { label: String },
    #[error("insufficient precision: {context}")]
    InsufficientPrecision { context: String },
    #[error("identity at n = {n}, exponent {exponent} has no integral solution: {numerator}/{denominator} for {label}[{target}]")]
    NonIntegralSolution {
        n: u32,
        exponent: i64,
        label: String,
        target: i64,
        numerator: BigInt,
        denominator: BigInt,
    },
    #[error("identity at n = {n}, exponent {exponent} is inconsistent (residual {residual}); the prefixes admit no completely replicable extension")]
    Inconsistent {
        n: u32,
        exponent: i64,
        residual: BigInt,
    },
    #[error("extension stuck before target order {target}: frontier {frontier:?}")]
    Stuck {
        target: i64,
        frontier: Vec<(String, i64)>,
    },
    #[error(transparent)]
    Faber(#[from] FaberError),
}

/// A bundle of replicate series: one distinct [`QSeries`] per underlying
/// function, plus an assignment telling which function plays `f^(a)` for
/// each `a` up to `n_max`. Entries sharing a function share its label, so
/// anything learned about `f` is simultaneously learned about every slot
/// it occupies.
#[derive(Debug, Clone)]
pub struct ReplicatePack {
    series: Vec<QSeries>,
    labels: Vec<String>,
    /// `assignment[a-1]` is the index into `series` for `f^(a)`.
    assignment: Vec<usize>,
}

impl ReplicatePack {
    pub fn new(
        series: Vec<QSeries>,
        labels: Vec<String>,
        assignment: Vec<usize>,
    ) -> Result<Self, ReplicationError> {
        assert_eq!(series.len(), labels.len());
        assert!(!assignment.is_empty());
        assert!(assignment.iter().all(|&i| i < series.len()));
        for (s, label) in series.iter().zip(&labels) {
            let normalized = s.scale() == 1
                && matches!(s.leading(), Some((-1, c)) if c.is_one())
                && s.coeff_int(0).map(|c| c == BigInt::ZERO).unwrap_or(false);
            if !normalized {
                return Err(ReplicationError::NotNormalized {
                    label: label.clone(),
                });
            }
        }
        Ok(ReplicatePack {
            series,
            labels,
            assignment,
        })
    }

    /// Pack in which every replicate is `f` itself.
    pub fn self_replicating(
        label: impl Into<String>,
        f: QSeries,
        n_max: u32,
    ) -> Result<Self, ReplicationError> {
        Self::new(vec![f], vec![label.into()], vec![0; n_max as usize])
    }

    pub fn n_max(&self) -> u32 {
        self.assignment.len() as u32
    }

    pub fn replicate(&self, a: u32) -> Option<&QSeries> {
        self.assignment
            .get(a as usize - 1)
            .map(|&i| &self.series[i])
    }

    pub fn replicate_label(&self, a: u32) -> Option<&str> {
        self.assignment
            .get(a as usize - 1)
            .map(|&i| self.labels[i].as_str())
    }

    pub fn base(&self) -> &QSeries {
        &self.series[self.assignment[0]]
    }

    pub fn functions(&self) -> impl Iterator<Item = (&str, &QSeries)> {
        self.labels
            .iter()
            .map(|l| l.as_str())
            .zip(self.series.iter())
    }

    pub(crate) fn series_slice(&self) -> &[QSeries] {
        &self.series
    }

    pub(crate) fn labels_slice(&self) -> &[String] {
        &self.labels
    }

    pub(crate) fn assignment_slice(&self) -> &[usize] {
        &self.assignment
    }
}

/// The twisted Hecke sum `sum_{ad=n, 0<=b<d} f^(a)((a tau + b)/d)`.
///
/// Lemma (root-of-unity-free form). Writing `f^(a) = sum_m c_m q^m`, the
/// inner sum over `b` is a geometric sum of `e^(2 pi i b m / d)` over
/// `b = 0..d`, which is `d` when `d | m` and `0` otherwise. Hence
///
/// ```text
///   sum_{ad=n} sum_b f^(a)((a tau + b)/d)
///     = sum_{ad=n} d * sum_{d | m} c^(a)_m q^(a m / d),
/// ```
///
/// so the operator is evaluated by sieving each replicate's coefficients on
/// the progression `d | m` and relabeling exponents `m -> a m / d`. No
/// cyclotomic coefficient is ever materialized. The equivalence against the
/// literal `b`-sum is checked in the test suite with exact arithmetic in
/// `Z[x]/(Phi_n)`.
pub fn twisted_hecke(pack: &ReplicatePack, n: u32) -> Result<QSeries, ReplicationError> {
    assert!(n >= 1);
    if n > pack.n_max() {
        return Err(ReplicationError::MissingReplicate { n, divisor: n });
    }
    let mut total: Option<QSeries> = None;
    for a in (1..=n).filter(|a| n % a == 0) {
        let d = (n / a) as i64;
        let f = pack
            .replicate(a)
            .ok_or(ReplicationError::MissingReplicate { n, divisor: a })?;
        let lo = f.lo_scaled();
        let prec = f.prec_scaled();
        let t_min = lo.div_euclid(d) + i64::from(lo.rem_euclid(d) != 0); // ceil(lo/d)
        let t_max = prec.div_euclid(d) + i64::from(prec.rem_euclid(d) != 0); // ceil(prec/d)
        if t_min >= t_max {
            return Err(ReplicationError::InsufficientPrecision {
                context: format!(
                    "divisor a = {a} of n = {n}: window [{lo}, {prec}) contains no multiple of d = {d}"
                ),
            });
        }
        // term = d * sum_t c_{d t} q^(a t), certified below a * t_max since
        // non-multiples of a in between are exact zeros of the term.
        let a64 = a as i64;
        let term_lo = a64 * t_min;
        let term_prec = a64 * t_max;
        let mut coeffs = vec![BigInt::ZERO; (term_prec - term_lo) as usize];
        for t in t_min..t_max {
            let c = f.coeff_int(d * t).expect("t sieved to lie in the window");
            if c != BigInt::ZERO {
                coeffs[(a64 * t - term_lo) as usize] = c * d;
            }
        }
        let term = QSeries::from_integer_coeffs(term_lo, coeffs).expect("non-empty window");
        total = Some(match total {
            None => term,
            Some(acc) => acc.add(&term),
        });
    }
    Ok(total.expect("n >= 1 always contributes the a = n term"))
}

/// Per-degree outcome of an identity check.
#[derive(Debug, Clone, Serialize)]
pub struct IdentityCheck {
    pub n: u32,
    /// Smallest exponent compared.
    pub verified_lo: i64,
    /// Largest exponent compared (inclusive).
    pub verified_hi: i64,
    pub first_mismatch: Option<Mismatch>,
    /// Present when this degree could not be verified through the
    /// requested order; other degrees are unaffected.
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct IdentityReport {
    pub requested_order: i64,
    pub checks: Vec<IdentityCheck>,
    pub pass: bool,
}

/// Verifies the replication identities for every `n <= n_max`, comparing
/// both sides through exponent `order` (inclusive) where precision allows.
///
/// The verdict is `pass` iff every degree was verified through `order`
/// with no mismatching coefficient.
pub fn verify_replicable(pack: &ReplicatePack, n_max: u32, order: i64) -> IdentityReport {
    let mut checks = Vec::with_capacity(n_max as usize);
    for n in 1..=n_max.min(pack.n_max()) {
        checks.push(check_identity(pack, n, order));
    }
    for n in pack.n_max() + 1..=n_max {
        checks.push(IdentityCheck {
            n,
            verified_lo: 0,
            verified_hi: 0,
            first_mismatch: None,
            error: Some(format!("pack assigns no replicates for n = {n}")),
        });
    }
    let pass = checks
        .iter()
        .all(|c| c.first_mismatch.is_none() && c.error.is_none());
    IdentityReport {
        requested_order: order,
        checks,
        pass,
    }
}

fn check_identity(pack: &ReplicatePack, n: u32, order: i64) -> IdentityCheck {
    let f = pack.base();
    let lhs = match faber_poly(f, n) {
        Ok(out) => out.image,
        Err(e) => {
            return IdentityCheck {
                n,
                verified_lo: 0,
                verified_hi: 0,
                first_mismatch: None,
                error: Some(e.to_string()),
            }
        }
    };
    let rhs = match twisted_hecke(pack, n) {
        Ok(s) => s,
        Err(e) => {
            return IdentityCheck {
                n,
                verified_lo: 0,
                verified_hi: 0,
                first_mismatch: None,
                error: Some(e.to_string()),
            }
        }
    };
    let agreement = lhs.agreement(&rhs);
    // The shared window in integer exponents.
    let lo = agreement.window_lo.ceil().to_integer();
    let hi = {
        let hi_excl = agreement.window_hi;
        let mut hi = hi_excl.floor().to_integer();
        if hi_excl.is_integer() {
            hi -= 1;
        }
        hi
    };
    let verified_hi = hi.min(order);
    let error = if hi < order {
        Some(format!(
            "insufficient precision: identity n = {n} certified only through exponent {hi}, requested {order}"
        ))
    } else {
        None
    };
    let first_mismatch = agreement
        .first_mismatch
        .filter(|m| m.exponent <= num_rational::Ratio::from_integer(order));
    IdentityCheck {
        n,
        verified_lo: lo,
        verified_hi,
        first_mismatch,
        error,
    }
}

/// Greatest common divisor helper exposed for the elimination module's
/// divisor-chain walks.

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eta::j_normalized;

    fn big(v: i64) -> BigInt {
        BigInt::from(v)
    }

    fn series(lo: i64, coeffs: &[i64]) -> QSeries {
        QSeries::from_integer_coeffs(lo, coeffs.iter().map(|&c| big(c)).collect()).unwrap()
    }

    fn fiction(coeff_at_one: i64, order: i64) -> QSeries {
        let mut coeffs = vec![0i64; (order + 2) as usize];
        coeffs[0] = 1;
        coeffs[2] = coeff_at_one;
        series(-1, &coeffs)
    }

    #[test]
    fn hecke_n1_is_f() {
        let f = fiction(1, 10);
        let pack = ReplicatePack::self_replicating("t", f.clone(), 4).unwrap();
        let h = twisted_hecke(&pack, 1).unwrap();
        assert!(h.agrees_with(&f));
    }

    #[test]
    fn hecke_monomial_bookkeeping() {
        // every replicate q^-1: only the a=2, d=1 term survives at n=2
        let f = QSeries::monomial(-1, 8);
        let pack = ReplicatePack::new(
            vec![f],
            vec!["q^-1".into()],
            vec![0, 0],
        )
        .unwrap();
        let h = twisted_hecke(&pack, 2).unwrap();
        assert_eq!(h.coeff_int(-2).unwrap(), big(1));
        assert!(h.leading().map(|(k, _)| k == -2).unwrap_or(false));
        let only = h.terms().count();
        assert_eq!(only, 1);
    }

    #[test]
    fn modular_fictions_pass() {
        // verifying order 10 at n = 6 needs the series through 6 * 10
        for c in [0i64, 1] {
            let f = fiction(c, 61);
            let pack = ReplicatePack::self_replicating(format!("fiction{c}"), f, 6).unwrap();
            let report = verify_replicable(&pack, 6, 10);
            assert!(report.pass, "fiction with a_1 = {c} failed: {report:?}");
        }
        // q^-1 - q is not self-replicating: its even replicates are q^-1 + q.
        let minus = fiction(-1, 61);
        let plus = fiction(1, 61);
        let pack = ReplicatePack::new(
            vec![minus, plus],
            vec!["q^-1 - q".into(), "q^-1 + q".into()],
            vec![0, 1, 0, 1, 0, 1],
        )
        .unwrap();
        let report = verify_replicable(&pack, 6, 10);
        assert!(report.pass, "{report:?}");
    }

    #[test]
    fn j_is_replicable_with_self_replicates() {
        let j = j_normalized(121);
        let pack = ReplicatePack::self_replicating("J", j, 6).unwrap();
        let report = verify_replicable(&pack, 6, 20);
        assert!(report.pass, "{report:?}");
    }

    #[test]
    fn hecke_matches_faber_for_j_n2() {
        let j = j_normalized(16);
        let pack = ReplicatePack::self_replicating("J", j.clone(), 2).unwrap();
        let lhs = faber_poly(&j, 2).unwrap().image;
        let rhs = twisted_hecke(&pack, 2).unwrap();
        let agreement = lhs.agreement(&rhs);
        assert!(agreement.first_mismatch.is_none());
        // spot value: [q] Phi_2(J) = 2 * a_2(J)
        assert_eq!(lhs.coeff_int(1).unwrap(), big(2 * 21493760));
    }

    #[test]
    fn corrupted_j_fails_at_n2() {
        let j = j_normalized(16);
        let bad = j.add(&QSeries::monomial(2, 17)); // a_2 off by one
        let pack = ReplicatePack::self_replicating("J?", bad, 4).unwrap();
        let report = verify_replicable(&pack, 2, 12);
        assert!(!report.pass);
        let n2 = report.checks.iter().find(|c| c.n == 2).unwrap();
        let m = n2.first_mismatch.as_ref().expect("mismatch at n = 2");
        assert!(m.exponent >= num_rational::Ratio::from_integer(1));
    }

    #[test]
    fn missing_replicate_is_reported() {
        let f = fiction(0, 10);
        let pack = ReplicatePack::self_replicating("t", f, 3).unwrap();
        assert!(matches!(
            twisted_hecke(&pack, 4),
            Err(ReplicationError::MissingReplicate { .. })
        ));
    }
}
