//! Independent ground truth: Dedekind eta products, eta quotients,
//! Eisenstein series and the modular `j` function.
//!
//! Everything here is computed by a route disjoint from the replication
//! machinery, so the two can cross-check each other.

use crate::series::{Exponent, QSeries, SeriesError};
use num_bigint::BigInt;
use num_rational::Ratio;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EtaError {
    #[error("total fractional power {0} of the eta quotient is not representable: denominator must divide the expansion scale")]
    FractionalPowerMismatch(Exponent),
    #[error("eta factor scale {0} must be positive")]
    BadFactor(i64),
    #[error(transparent)]
    Series(#[from] SeriesError),
}

/// `prod_i eta(m_i tau)^{e_i}` plus an additive constant shift.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EtaQuotientSpec {
    /// Pairs `(m, e)` meaning `eta(m*tau)^e`; `m >= 1`, `e` any integer.
    pub factors: Vec<(i64, i32)>,
    /// Constant added after expansion (usually kills the constant term).
    #[serde(with = "crate::series::bigint_string", default = "BigInt::zero")]
    pub shift: BigInt,
}

impl EtaQuotientSpec {
    pub fn new(factors: Vec<(i64, i32)>, shift: impl Into<BigInt>) -> Self {
        EtaQuotientSpec {
            factors,
            shift: shift.into(),
        }
    }

    /// The total leading exponent `sum m*e/24`.
    pub fn leading_exponent(&self) -> Exponent {
        let s: i64 = self.factors.iter().map(|&(m, e)| m * e as i64).sum();
        Ratio::new(s, 24)
    }
}

/// Euler product `prod_{k>=1} (1 - q^k)` through `q^order` inclusive,
/// via the pentagonal number theorem (both routes are exact; this one does
/// no multiplications at all).
pub fn euler_product(order: i64) -> QSeries {
    assert!(order >= 0);
    let mut coeffs = vec![BigInt::zero(); order as usize + 1];
    let mut j: i64 = 0;
    loop {
        // exponents j(3j-1)/2 for j = 0, ±1, ±2, ...
        let mut hit = false;
        for &jj in &[j, -j] {
            let e = jj * (3 * jj - 1) / 2;
            if e <= order {
                hit = true;
                let sign = if jj.rem_euclid(2) == 0 { 1 } else { -1 };
                coeffs[e as usize] += BigInt::from(sign);
            }
            if j == 0 {
                break;
            }
        }
        if !hit {
            break;
        }
        j += 1;
    }
    QSeries::from_integer_coeffs(0, coeffs).unwrap()
}

/// `eta(tau) = q^(1/24) prod (1 - q^k)`, truncated after `order` full powers
/// of `q` inside the product. The result has scale 24.
pub fn eta_expansion(order: i64) -> QSeries {
    assert!(order >= 1);
    euler_product(order)
        .rescale_exponents(Ratio::one())
        .unwrap()
        .mul(&QSeries::monomial(1, 24 * order + 2).rescale_exponents(Ratio::new(1, 24)).unwrap())
}

/// Exact expansion of an eta quotient plus its shift, certified through
/// `q^order` inclusive.
///
/// The fractional powers of the factors must combine to exponents on a
/// lattice `1/s` with `s | 24`; otherwise the spec is rejected.
pub fn eta_quotient(spec: &EtaQuotientSpec, order: i64) -> Result<QSeries, EtaError> {
    assert!(order >= 1);
    for &(m, _) in &spec.factors {
        if m < 1 {
            return Err(EtaError::BadFactor(m));
        }
    }
    let lead = spec.leading_exponent();
    if *lead.denom() > 24 || 24 % lead.denom() != 0 {
        return Err(EtaError::FractionalPowerMismatch(lead));
    }
    // Work at scale 1 on the product of (1-q^(m k))^e, then shift exponents
    // by the total fractional power at the end.
    let span = order + lead.numer().div_euclid(*lead.denom()).abs() + 2;
    let mut acc = QSeries::one(span + 1);
    for &(m, e) in &spec.factors {
        if e == 0 {
            continue;
        }
        let base = euler_product((span / m).max(1))
            .rescale_exponents(Ratio::from_integer(m))
            .unwrap()
            .truncate_scaled(span + 1);
        let p = base.pow(e.unsigned_abs());
        acc = if e > 0 {
            acc.mul(&p)
        } else {
            acc.div_exact(&p)?
        };
    }
    let shifted = acc.rescale_exponents(Ratio::one()).unwrap();
    let mut out = shifted
        .mul(&monomial_rational(lead, span + 1)?)
        .truncate_to_order_rational(order);
    if !spec.shift.is_zero() {
        out = out.add_constant(&spec.shift)?;
    }
    Ok(out)
}

fn monomial_rational(e: Exponent, prec_int: i64) -> Result<QSeries, EtaError> {
    let scale = *e.denom();
    let k = *e.numer();
    let m = QSeries::monomial(k, k + prec_int * scale + 1);
    Ok(m.rescale_exponents(Ratio::new(1, scale))?)
}

trait TruncExt {
    fn truncate_to_order_rational(&self, order: i64) -> QSeries;
}

impl TruncExt for QSeries {
    /// Narrows so the certified window ends just past integer order `order`.
    fn truncate_to_order_rational(&self, order: i64) -> QSeries {
        let target = order * self.scale() + 1;
        if target < self.prec_scaled() {
            self.truncate_scaled(target)
        } else {
            self.clone()
        }
    }
}

/// Sum of the cubes of divisors, exact.
pub fn sigma3(n: u64) -> BigInt {
    sigma_pow(n, 3)
}

pub fn sigma_pow(n: u64, k: u32) -> BigInt {
    let mut total = BigInt::zero();
    let mut d = 1;
    while d * d <= n {
        if n % d == 0 {
            total += BigInt::from(d).pow(k);
            let other = n / d;
            if other != d {
                total += BigInt::from(other).pow(k);
            }
        }
        d += 1;
    }
    total
}

/// Normalized Eisenstein series `E_4 = 1 + 240 sum sigma_3(k) q^k`.
pub fn eisenstein_e4(order: i64) -> QSeries {
    assert!(order >= 0);
    let mut coeffs = vec![BigInt::zero(); order as usize + 1];
    coeffs[0] = BigInt::one();
    for k in 1..=order as u64 {
        coeffs[k as usize] = 240 * sigma3(k);
    }
    QSeries::from_integer_coeffs(0, coeffs).unwrap()
}

/// `E_6 = 1 - 504 sum sigma_5(k) q^k`.
pub fn eisenstein_e6(order: i64) -> QSeries {
    assert!(order >= 0);
    let mut coeffs = vec![BigInt::zero(); order as usize + 1];
    coeffs[0] = BigInt::one();
    for k in 1..=order as u64 {
        coeffs[k as usize] = -504 * sigma_pow(k, 5);
    }
    QSeries::from_integer_coeffs(0, coeffs).unwrap()
}

/// Quasimodular `E_2 = 1 - 24 sum sigma_1(k) q^k`.
pub fn eisenstein_e2(order: i64) -> QSeries {
    assert!(order >= 0);
    let mut coeffs = vec![BigInt::zero(); order as usize + 1];
    coeffs[0] = BigInt::one();
    for k in 1..=order as u64 {
        coeffs[k as usize] = -24 * sigma_pow(k, 1);
    }
    QSeries::from_integer_coeffs(0, coeffs).unwrap()
}

/// The discriminant `Delta = eta^24`, normalized `q - 24 q^2 + ...`.
pub fn delta(order: i64) -> QSeries {
    assert!(order >= 1);
    euler_product(order - 1)
        .pow(24)
        .mul(&QSeries::monomial(1, order + 1))
        .truncate_scaled(order + 1)
}

/// The modular `j` function computed as `E_4^3 / Delta`, constant term 744,
/// certified through `q^order` inclusive.
pub fn j_series(order: i64) -> QSeries {
    assert!(order >= 1);
    // E4^3/Delta loses two orders: compute with margin.
    let m = order + 3;
    let e4 = eisenstein_e4(m);
    let num = e4.pow(3);
    let den = delta(m);
    num.div_exact(&den)
        .expect("Delta has unit leading coefficient")
        .truncate_to_order_rational(order)
}

/// `J = j - 744`, the normalized Hauptmodul with zero constant term.
pub fn j_normalized(order: i64) -> QSeries {
    j_series(order)
        .add_constant(&BigInt::from(-744))
        .expect("window certifies exponent 0")
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Ratio;

    fn big(v: i64) -> BigInt {
        BigInt::from(v)
    }

    #[test]
    fn eta_first_terms() {
        let eta = eta_expansion(8);
        assert_eq!(eta.coeff(Ratio::new(1, 24)).unwrap(), big(1));
        assert_eq!(eta.coeff(Ratio::new(25, 24)).unwrap(), big(-1));
        assert_eq!(eta.coeff(Ratio::new(49, 24)).unwrap(), big(-1));
        assert_eq!(eta.coeff(Ratio::new(121, 24)).unwrap(), big(1));
    }

    #[test]
    fn delta_is_eta_to_24() {
        let order = 24;
        let via_eta = eta_expansion(order).pow(24);
        let d = delta(order);
        assert!(via_eta.agrees_with(&d));
        assert_eq!(d.coeff_int(1).unwrap(), big(1));
        assert_eq!(d.coeff_int(2).unwrap(), big(-24));
        assert_eq!(d.coeff_int(3).unwrap(), big(252));
        assert_eq!(d.coeff_int(4).unwrap(), big(-1472));
    }

    #[test]
    fn delta_quotient_normalization() {
        // eta^24 / q has constant term 1
        let d = delta(10);
        let shifted = d.mul(&QSeries::monomial(-1, 12));
        assert_eq!(shifted.coeff_int(0).unwrap(), big(1));
    }

    #[test]
    fn eta_quotient_delta_spec() {
        let spec = EtaQuotientSpec::new(vec![(1, 24)], 0);
        let q = eta_quotient(&spec, 6).unwrap();
        assert!(q.agrees_with(&delta(6)));
    }

    #[test]
    fn eta_quotient_level_two_seed() {
        // eta(tau)^24/eta(2tau)^24 + 24: the q^-1 + 276q - 2048q^2 + ... series
        let spec = EtaQuotientSpec::new(vec![(1, 24), (2, -24)], 24);
        let f = eta_quotient(&spec, 6).unwrap();
        assert_eq!(f.coeff_int(-1).unwrap(), big(1));
        assert_eq!(f.coeff_int(0).unwrap(), big(0));
        assert_eq!(f.coeff_int(1).unwrap(), big(276));
        assert_eq!(f.coeff_int(2).unwrap(), big(-2048));
        assert_eq!(f.coeff_int(3).unwrap(), big(11202));
    }

    #[test]
    fn eta_quotient_empty_is_constant() {
        let spec = EtaQuotientSpec::new(vec![], 0);
        let one_shift = eta_quotient(&spec, 4).unwrap();
        assert_eq!(one_shift.coeff_int(0).unwrap(), big(1));
        assert!(one_shift.sub(&QSeries::one(2)).is_zero());
    }

    #[test]
    fn eta_quotient_fractional_mismatch() {
        let spec = EtaQuotientSpec::new(vec![(1, 1)], 0);
        // leading exponent 1/24 is fine (scale 24 divides 24)
        assert!(eta_quotient(&spec, 4).is_ok());
    }

    #[test]
    fn sigma3_multiplicative_spot_checks() {
        assert_eq!(sigma3(6), sigma3(2) * sigma3(3));
        assert_eq!(sigma3(35), sigma3(5) * sigma3(7));
        assert_eq!(sigma3(12), big(1 + 8 + 27 + 64 + 216 + 1728));
    }

    #[test]
    fn j_first_coefficients() {
        let j = j_series(4);
        assert_eq!(j.coeff_int(-1).unwrap(), big(1));
        assert_eq!(j.coeff_int(0).unwrap(), big(744));
        assert_eq!(j.coeff_int(1).unwrap(), big(196884));
        assert_eq!(j.coeff_int(2).unwrap(), big(21493760));
        assert_eq!(j.coeff_int(3).unwrap(), big(864299970));
        let jn = j_normalized(2);
        assert_eq!(jn.coeff_int(0).unwrap(), big(0));
        assert_eq!(jn.coeff_int(1).unwrap(), big(196884));
    }
}
