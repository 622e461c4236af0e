//! Coefficient extension by unknown elimination.
//!
//! Coefficients beyond the supplied prefixes are treated as formal unknowns.
//! Both sides of each replication identity are evaluated over linear
//! expressions in those unknowns (products of two unknowns saturate to a
//! "nonlinear" marker and the equation is skipped for now). Whenever a
//! comparison contains exactly one unknown, appearing linearly, it is solved
//! exactly. Scanning `n` upward and exponents upward and repeating to a
//! fixpoint reproduces the classical recursions without transcribing them.

use super::{ReplicatePack, ReplicationError};
use crate::series::QSeries;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::Serialize;
use std::collections::BTreeMap;

/// An unknown coefficient: (function index, exponent).
type Var = (usize, i64);

/// `constant + sum coeff * var`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
struct LinExpr {
    constant: BigInt,
    terms: BTreeMap<Var, BigInt>,
}

impl LinExpr {
    fn constant(c: BigInt) -> Self {
        LinExpr {
            constant: c,
            terms: BTreeMap::new(),
        }
    }

    fn var(v: Var) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(v, BigInt::one());
        LinExpr {
            constant: BigInt::zero(),
            terms,
        }
    }

    fn is_constant(&self) -> bool {
        self.terms.is_empty()
    }

    fn add(&self, other: &LinExpr) -> LinExpr {
        let mut out = self.clone();
        out.constant += &other.constant;
        for (v, c) in &other.terms {
            let e = out.terms.entry(*v).or_insert_with(BigInt::zero);
            *e += c;
            if e.is_zero() {
                out.terms.remove(v);
            }
        }
        out
    }

    fn neg(&self) -> LinExpr {
        LinExpr {
            constant: -self.constant.clone(),
            terms: self.terms.iter().map(|(v, c)| (*v, -c.clone())).collect(),
        }
    }

    fn scale(&self, k: &BigInt) -> LinExpr {
        if k.is_zero() {
            return LinExpr::default();
        }
        LinExpr {
            constant: &self.constant * k,
            terms: self.terms.iter().map(|(v, c)| (*v, c * k)).collect(),
        }
    }

    /// Replaces every variable with a known value where one exists.
    fn substitute(&self, known: &[BTreeMap<i64, BigInt>]) -> LinExpr {
        if self.is_constant() {
            return self.clone();
        }
        let mut out = LinExpr::constant(self.constant.clone());
        for (v, c) in &self.terms {
            match known[v.0].get(&v.1) {
                Some(val) => out.constant += c * val,
                None => {
                    out.terms.insert(*v, c.clone());
                }
            }
        }
        out
    }
}

/// Linear-or-saturated coefficient value.
#[derive(Debug, Clone, PartialEq, Eq)]
enum Sym {
    Lin(LinExpr),
    Nonlinear,
}

impl Sym {
    fn zero() -> Self {
        Sym::Lin(LinExpr::default())
    }

    fn constant(c: BigInt) -> Self {
        Sym::Lin(LinExpr::constant(c))
    }

    fn is_zero(&self) -> bool {
        matches!(self, Sym::Lin(l) if l.is_constant() && l.constant.is_zero())
    }

    fn add(&self, other: &Sym) -> Sym {
        match (self, other) {
            (Sym::Lin(a), Sym::Lin(b)) => Sym::Lin(a.add(b)),
            _ => Sym::Nonlinear,
        }
    }

    fn neg(&self) -> Sym {
        match self {
            Sym::Lin(a) => Sym::Lin(a.neg()),
            Sym::Nonlinear => Sym::Nonlinear,
        }
    }

    fn mul(&self, other: &Sym) -> Sym {
        match (self, other) {
            (Sym::Lin(a), Sym::Lin(b)) => {
                if a.is_constant() {
                    Sym::Lin(b.scale(&a.constant))
                } else if b.is_constant() {
                    Sym::Lin(a.scale(&b.constant))
                } else {
                    Sym::Nonlinear
                }
            }
            _ => {
                // 0 * nonlinear is still 0.
                if self.is_zero() || other.is_zero() {
                    Sym::zero()
                } else {
                    Sym::Nonlinear
                }
            }
        }
    }
}

/// Dense scale-1 series over [`Sym`] coefficients, window `[lo, prec)`,
/// implicit zeros below `lo`.
#[derive(Debug, Clone)]
struct SymSeries {
    lo: i64,
    coeffs: Vec<Sym>,
}

impl SymSeries {
    fn prec(&self) -> i64 {
        self.lo + self.coeffs.len() as i64
    }

    fn at(&self, k: i64) -> Sym {
        if k < self.lo {
            Sym::zero()
        } else {
            self.coeffs[(k - self.lo) as usize].clone()
        }
    }

    fn one(prec: i64) -> SymSeries {
        let mut coeffs = vec![Sym::zero(); prec.max(1) as usize];
        coeffs[0] = Sym::constant(BigInt::one());
        SymSeries { lo: 0, coeffs }
    }

    fn mul(&self, other: &SymSeries) -> SymSeries {
        let lo = self.lo + other.lo;
        let prec = (self.prec() + other.lo).min(other.prec() + self.lo);
        let mut coeffs = vec![Sym::zero(); (prec - lo) as usize];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            let ka = self.lo + i as i64;
            for (j, b) in other.coeffs.iter().enumerate() {
                let k = ka + other.lo + j as i64;
                if k >= prec {
                    break;
                }
                if b.is_zero() {
                    continue;
                }
                let p = a.mul(b);
                coeffs[(k - lo) as usize] = coeffs[(k - lo) as usize].add(&p);
            }
        }
        SymSeries { lo, coeffs }
    }

    fn sub_scaled(&self, other: &SymSeries, factor: &Sym) -> SymSeries {
        // self - factor * other, window = intersection rule as in add
        let lo = self.lo.min(other.lo);
        let prec = self.prec().min(other.prec());
        let mut coeffs = Vec::with_capacity((prec - lo) as usize);
        for k in lo..prec {
            coeffs.push(self.at(k).add(&factor.mul(&other.at(k)).neg()));
        }
        SymSeries { lo, coeffs }
    }
}

/// One solved coefficient and the identity that produced it.
#[derive(Debug, Clone, Serialize)]
pub struct ExtensionStep {
    pub series_label: String,
    pub exponent: i64,
    #[serde(with = "crate::series::bigint_string")]
    pub value: BigInt,
    pub determined_by: DeterminedBy,
}

/// The identity `(n, exponent)` whose coefficient comparison pinned a value.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DeterminedBy {
    pub n: u32,
    pub exponent: i64,
}

/// Log of every coefficient the extension determined, in solve order.
pub type ExtensionLog = Vec<ExtensionStep>;

#[derive(Debug, Clone)]
pub struct ExtensionOutcome {
    pub pack: ReplicatePack,
    pub log: ExtensionLog,
}

/// Extends every series in the pack through exponent `target_order`
/// by iterating the replication identities for `n = 2, 3, ...` and solving
/// single-unknown comparisons exactly, to a fixpoint.
pub fn extend_coefficients(
    pack: &ReplicatePack,
    target_order: i64,
) -> Result<ExtensionOutcome, ReplicationError> {
    let labels: Vec<String> = pack.labels_slice().to_vec();
    let assignment: Vec<usize> = pack.assignment_slice().to_vec();
    let n_funcs = labels.len();

    // Known coefficients per function, seeded from the prefixes.
    let mut known: Vec<BTreeMap<i64, BigInt>> = Vec::with_capacity(n_funcs);
    for s in pack.series_slice() {
        let mut map = BTreeMap::new();
        for k in s.lo_scaled()..s.prec_scaled() {
            map.insert(k, s.coeff_int(k).unwrap());
        }
        map.insert(-1, BigInt::one());
        // everything below the stored window is an exact zero
        map.insert(s.lo_scaled() - 1, BigInt::zero());
        for k in -1..s.lo_scaled() {
            map.entry(k).or_insert_with(BigInt::zero);
        }
        known.push(map);
    }

    let mut log = ExtensionLog::new();
    if complete(&known, &assignment, target_order) {
        return Ok(ExtensionOutcome {
            pack: pack.clone(),
            log,
        });
    }
    let mut sweeps = 0usize;
    loop {
        sweeps += 1;
        if sweeps > 1 + 4 * (target_order.unsigned_abs() as usize + 4) {
            break; // fall through to the completeness check below
        }
        let mut progress = false;
        for n in 2..=pack.n_max() {
            if (1..=n).filter(|a| n % a == 0).any(|a| a > pack.n_max()) {
                continue;
            }
            progress |= sweep_identity(
                n,
                target_order,
                &assignment,
                &labels,
                &mut known,
                &mut log,
            )?;
        }
        if !progress {
            break;
        }
        if complete(&known, &assignment, target_order) {
            break;
        }
    }

    if !complete(&known, &assignment, target_order) {
        let frontier = frontier_of(&known, &labels, target_order);
        return Err(ReplicationError::Stuck {
            target: target_order,
            frontier,
        });
    }

    // Rebuild the pack with the extended windows.
    let mut series = Vec::with_capacity(n_funcs);
    for (i, map) in known.iter().enumerate() {
        let mut coeffs = Vec::with_capacity((target_order + 2) as usize);
        for k in -1..=target_order {
            coeffs.push(map.get(&k).cloned().unwrap_or_else(BigInt::zero));
        }
        series.push(
            QSeries::from_integer_coeffs(-1, coeffs)
                .expect("window non-empty by construction"),
        );
        let _ = i;
    }
    let pack = ReplicatePack::new(series, labels, assignment)?;
    Ok(ExtensionOutcome { pack, log })
}

fn complete(known: &[BTreeMap<i64, BigInt>], assignment: &[usize], target: i64) -> bool {
    let mut used: Vec<bool> = vec![false; known.len()];
    for &i in assignment {
        used[i] = true;
    }
    known.iter().enumerate().all(|(i, map)| {
        !used[i] || (-1..=target).all(|k| map.contains_key(&k))
    })
}

fn frontier_of(
    known: &[BTreeMap<i64, BigInt>],
    labels: &[String],
    target: i64,
) -> Vec<(String, i64)> {
    known
        .iter()
        .zip(labels)
        .filter_map(|(map, label)| {
            (-1..=target)
                .find(|k| !map.contains_key(k))
                .map(|k| (label.clone(), k))
        })
        .collect()
}

/// Runs one pass of the degree-`n` identity over exponents `1..=target`,
/// solving every single-unknown comparison. Returns whether anything new
/// was learned.
fn sweep_identity(
    n: u32,
    target: i64,
    assignment: &[usize],
    labels: &[String],
    known: &mut Vec<BTreeMap<i64, BigInt>>,
    log: &mut ExtensionLog,
) -> Result<bool, ReplicationError> {
    let base_id = assignment[0];
    let window_hi = target + n as i64; // f needed through target + n - 1
    let f = sym_series(base_id, window_hi, known);

    // Powers f^0..f^n.
    let mut powers = Vec::with_capacity(n as usize + 1);
    powers.push(SymSeries::one(window_hi + n as i64));
    for _ in 1..=n {
        powers.push(powers.last().unwrap().mul(&f));
    }

    // Greedy Faber cancellation; leading coefficients of f^k are the
    // constant 1, so each subtraction is exact.
    let mut image = powers[n as usize].clone();
    for e in (-(n as i64) + 1)..=0 {
        let c = image.at(e);
        if !c.is_zero() {
            image = image.sub_scaled(&powers[(-e) as usize], &c);
        }
    }

    let mut progress = false;
    let e_hi = target.min(image.prec() - 1);
    for e in 1..=e_hi {
        let lhs = image.at(e);
        let rhs = hecke_coefficient(n, e, assignment, known);
        let residual = lhs.add(&rhs.neg());
        let residual = match residual {
            Sym::Lin(l) => l.substitute(known),
            Sym::Nonlinear => continue,
        };
        match residual.terms.len() {
            0 => {
                if !residual.constant.is_zero() {
                    return Err(ReplicationError::Inconsistent {
                        n,
                        exponent: e,
                        residual: residual.constant,
                    });
                }
            }
            1 => {
                let (&(id, exp), coeff) = residual.terms.iter().next().unwrap();
                // coeff * x + constant = 0
                let (q, r) = (-residual.constant.clone()).div_rem(coeff);
                if !r.is_zero() {
                    return Err(ReplicationError::NonIntegralSolution {
                        n,
                        exponent: e,
                        label: labels[id].clone(),
                        target: exp,
                        numerator: -residual.constant.clone(),
                        denominator: coeff.clone(),
                    });
                }
                known[id].insert(exp, q.clone());
                log.push(ExtensionStep {
                    series_label: labels[id].clone(),
                    exponent: exp,
                    value: q,
                    determined_by: DeterminedBy { n, exponent: e },
                });
                progress = true;
            }
            _ => {}
        }
    }
    Ok(progress)
}

fn sym_series(id: usize, prec: i64, known: &[BTreeMap<i64, BigInt>]) -> SymSeries {
    let mut coeffs = Vec::with_capacity((prec + 1) as usize);
    for k in -1..prec {
        coeffs.push(match known[id].get(&k) {
            Some(v) => Sym::constant(v.clone()),
            None => Sym::Lin(LinExpr::var((id, k))),
        });
    }
    SymSeries { lo: -1, coeffs }
}

/// `[q^e]` of the twisted Hecke sum as a symbolic expression:
/// `sum_{a | gcd(n, e)} (n/a) * c^(a)_{n e / a^2}`.
fn hecke_coefficient(
    n: u32,
    e: i64,
    assignment: &[usize],
    known: &[BTreeMap<i64, BigInt>],
) -> Sym {
    let mut acc = Sym::zero();
    for a in (1..=n).filter(|a| n % a == 0) {
        let a64 = a as i64;
        if e.rem_euclid(a64) != 0 {
            continue;
        }
        let d = (n / a) as i64;
        let idx = d * (e / a64);
        let id = assignment[a as usize - 1];
        let c = if idx < -1 {
            Sym::zero()
        } else {
            match known[id].get(&idx) {
                Some(v) => Sym::constant(v.clone()),
                None => Sym::Lin(LinExpr::var((id, idx))),
            }
        };
        acc = acc.add(&c.mul(&Sym::constant(BigInt::from(d))));
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eta::j_normalized;
    use crate::replication::verify_replicable;

    fn prefix_pack(label: &str, full: &QSeries, through: i64, n_max: u32) -> ReplicatePack {
        let prefix = full.truncate_order(through);
        ReplicatePack::self_replicating(label, prefix, n_max).unwrap()
    }

    #[test]
    fn j_prefix_extends_to_15() {
        let j = j_normalized(16);
        let pack = prefix_pack("J", &j, 7, 6);
        let out = extend_coefficients(&pack, 15).unwrap();
        let extended = out.pack.base();
        for k in -1..=15 {
            assert_eq!(
                extended.coeff_int(k).unwrap(),
                j.coeff_int(k).unwrap(),
                "mismatch at exponent {k}"
            );
        }
        assert!(!out.log.is_empty());
        // every solved coefficient names the identity that produced it
        assert!(out.log.iter().all(|s| s.determined_by.n >= 2));
    }

    #[test]
    fn fiction_prefix_forces_zero_tail() {
        // q^-1 + q given through exponent 7, self-replicating: every later
        // coefficient is forced to 0.
        let mut coeffs = vec![BigInt::zero(); 9];
        coeffs[0] = BigInt::one();
        coeffs[2] = BigInt::one();
        let f = QSeries::from_integer_coeffs(-1, coeffs).unwrap();
        let pack = ReplicatePack::self_replicating("fiction", f, 6).unwrap();
        let out = extend_coefficients(&pack, 40).unwrap();
        let g = out.pack.base();
        for k in 2..=40 {
            assert_eq!(g.coeff_int(k).unwrap(), BigInt::zero(), "exponent {k}");
        }
        let report = verify_replicable(&out.pack, 4, 10);
        assert!(report.pass, "{report:?}");
    }

    #[test]
    fn extension_is_idempotent() {
        let j = j_normalized(14);
        let pack = ReplicatePack::self_replicating("J", j.clone(), 4).unwrap();
        let out = extend_coefficients(&pack, 12).unwrap();
        assert!(out.log.is_empty(), "complete pack must not change");
        assert!(out.pack.base().agrees_with(&j));
    }

    #[test]
    fn extension_soundness_via_verify() {
        // verify through order 12 at n <= 3 needs the series through 36
        let j = j_normalized(16);
        let pack = prefix_pack("J", &j, 7, 6);
        let out = extend_coefficients(&pack, 36).unwrap();
        let report = verify_replicable(&out.pack, 3, 12);
        assert!(report.pass, "{report:?}");
    }

    #[test]
    fn stuck_is_reported_with_frontier() {
        // With only the n = 2 identity available, odd coefficients beyond
        // the prefix cannot all be reached from a 3-term seed.
        let j = j_normalized(10);
        let pack = prefix_pack("J", &j, 2, 2);
        let err = extend_coefficients(&pack, 9).unwrap_err();
        match err {
            ReplicationError::Stuck { frontier, .. } => {
                assert!(!frontier.is_empty());
            }
            other => panic!("expected Stuck, got {other:?}"),
        }
    }

    #[test]
    fn inconsistent_prefix_is_an_error() {
        // J with a_2 corrupted: the n = 2 identity first determines a_4 from
        // the corrupted value, and a later comparison contradicts it.
        let j = j_normalized(16);
        let bad = j
            .truncate_order(7)
            .add(&QSeries::monomial(2, 9));
        let pack = ReplicatePack::self_replicating("J?", bad, 6).unwrap();
        let err = extend_coefficients(&pack, 15).unwrap_err();
        assert!(
            matches!(
                err,
                ReplicationError::Inconsistent { .. } | ReplicationError::NonIntegralSolution { .. }
            ),
            "got {err:?}"
        );
    }
}
