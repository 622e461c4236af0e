//! Normalized Faber polynomials.
//!
//! For a series `f = q^-1 + a_0 + a_1 q + ...` with leading coefficient 1
//! there is a unique monic degree-`n` polynomial `P` with
//! `P(f) = q^-n + O(q)`. The coefficients are found greedily: starting from
//! `f^n`, walk the exponents `-(n-1), ..., 0` upward and cancel each one
//! with the appropriate multiple of `f^k`, `k = -exponent`, whose leading
//! term `q^-k` is the only one that can reach it without disturbing lower
//! exponents.

use crate::series::QSeries;
use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FaberError {
    #[error("series is not normalized: needs scale 1, leading term q^-1 with coefficient 1")]
    NotNormalized,
    #[error("window too narrow: certifying the O(q) property of degree {degree} needs the series through exponent {needed}, window ends at {available}")]
    InsufficientPrecision {
        degree: u32,
        needed: i64,
        available: i64,
    },
}

/// Monic integer polynomial `x^n + c_{n-1} x^{n-1} + ... + c_0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FaberPolynomial {
    degree: u32,
    /// `coeffs[k]` is the coefficient of `x^k`; the monic term is implicit.
    coeffs: Vec<BigInt>,
}

impl FaberPolynomial {
    pub fn new(degree: u32, coeffs: Vec<BigInt>) -> Self {
        assert_eq!(coeffs.len() as u32, degree, "need one coefficient per degree below {degree}");
        FaberPolynomial { degree, coeffs }
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    /// Coefficient of `x^k` for `k < n`.
    pub fn coeff(&self, k: u32) -> &BigInt {
        &self.coeffs[k as usize]
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    /// Horner evaluation of the polynomial at a series, exact.
    pub fn apply(&self, f: &QSeries) -> QSeries {
        let mut acc = f.clone();
        for k in (0..self.degree).rev() {
            let c = &self.coeffs[k as usize];
            if !c.is_zero() {
                acc = acc
                    .add_constant(c)
                    .expect("window certified through exponent 0 by construction");
            }
            if k > 0 {
                acc = acc.mul(f);
            }
        }
        if self.degree == 0 {
            acc = QSeries::one(1);
        }
        acc
    }
}

impl Serialize for FaberPolynomial {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr<'a> {
            n: u32,
            c: Vec<&'a str>,
        }
        let strings: Vec<String> = self.coeffs.iter().map(|c| c.to_string()).collect();
        Repr {
            n: self.degree,
            c: strings.iter().map(|s| s.as_str()).collect(),
        }
        .serialize(ser)
    }
}

impl<'de> Deserialize<'de> for FaberPolynomial {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        #[derive(Deserialize)]
        struct Repr {
            n: u32,
            c: Vec<String>,
        }
        let repr = Repr::deserialize(de)?;
        if repr.c.len() as u32 != repr.n {
            return Err(D::Error::custom("coefficient count must equal the degree"));
        }
        let coeffs = repr
            .c
            .iter()
            .map(|s| s.parse().map_err(D::Error::custom))
            .collect::<Result<_, _>>()?;
        Ok(FaberPolynomial::new(repr.n, coeffs))
    }
}

/// Result of [`faber_poly`]: the polynomial plus a certificate stating the
/// largest exponent through which `P(f) = q^-n + O(q)` was actually checked.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FaberOutput {
    pub poly: FaberPolynomial,
    /// The image `P(f)` on its certified window.
    #[serde(skip)]
    pub image: QSeries,
    /// All exponents `<= certified_through` of the image are exact.
    pub certified_through: i64,
}

/// Computes the normalized Faber polynomial of degree `n` for `f`.
///
/// Requires `f` known at least through exponent `n - 1` so the cancellation
/// can be certified through exponent 0.
pub fn faber_poly(f: &QSeries, n: u32) -> Result<FaberOutput, FaberError> {
    assert!(n >= 1, "degree must be positive");
    if f.scale() != 1 {
        return Err(FaberError::NotNormalized);
    }
    match f.leading() {
        Some((-1, c)) if c.is_one() => {}
        _ => return Err(FaberError::NotNormalized),
    }
    // prec(f^n) = prec - (n-1); certifying exponent 0 needs prec >= n+1...
    // exponent 0 < prec - (n-1)  <=>  prec >= n, i.e. f known through n-1.
    let prec = f.prec_scaled();
    if prec < n as i64 {
        return Err(FaberError::InsufficientPrecision {
            degree: n,
            needed: n as i64 - 1,
            available: prec - 1,
        });
    }
    let mut powers = Vec::with_capacity(n as usize + 1);
    powers.push(QSeries::one(prec + n as i64 - 1));
    for k in 1..=n {
        powers.push(powers[k as usize - 1].mul(f));
    }
    let mut image = powers[n as usize].clone();
    let mut coeffs = vec![BigInt::zero(); n as usize];
    for e in (-(n as i64) + 1)..=0 {
        let k = (-e) as usize;
        let c = image
            .coeff_int(e)
            .expect("window reaches exponent 0 by the precision check");
        if !c.is_zero() {
            coeffs[k] = -c.clone();
            image = image.sub(&powers[k].mul_scalar(&c));
        }
    }
    let certified_through = image.prec_scaled() - 1;
    Ok(FaberOutput {
        poly: FaberPolynomial::new(n, coeffs),
        image,
        certified_through,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn big(v: i64) -> BigInt {
        BigInt::from(v)
    }

    fn series(lo: i64, coeffs: &[i64]) -> QSeries {
        QSeries::from_integer_coeffs(lo, coeffs.iter().map(|&c| big(c)).collect()).unwrap()
    }

    #[test]
    fn monomial_gives_pure_power() {
        let f = QSeries::monomial(-1, 6);
        for n in 1..=4 {
            let out = faber_poly(&f, n).unwrap();
            assert!(out.poly.coeffs().iter().all(|c| c.is_zero()));
            assert_eq!(out.image.coeff_int(-(n as i64)).unwrap(), big(1));
        }
    }

    #[test]
    fn degree_one_with_zero_constant_is_x() {
        let f = series(-1, &[1, 0, 5, 7]);
        let out = faber_poly(&f, 1).unwrap();
        assert_eq!(out.poly.coeff(0), &big(0));
    }

    #[test]
    fn constant_terms_are_absorbed() {
        let f = series(-1, &[1, 9, 5, 7, 11]);
        let out = faber_poly(&f, 2).unwrap();
        let img = out.image;
        assert_eq!(img.coeff_int(-1).unwrap(), big(0));
        assert_eq!(img.coeff_int(0).unwrap(), big(0));
        assert_eq!(img.coeff_int(-2).unwrap(), big(1));
    }

    #[test]
    fn apply_identity_polynomial() {
        let f = series(-1, &[1, 0, 3, -2]);
        let x = FaberPolynomial::new(1, vec![big(0)]);
        assert!(x.apply(&f).agrees_with(&f));
    }

    #[test]
    fn apply_matches_direct_expansion() {
        // x^2 - 393768 applied to a J-like prefix equals f^2 - 393768.
        let f = series(-1, &[1, 0, 196884, 0, 21493760]);
        let p = FaberPolynomial::new(2, vec![big(-393768), big(0)]);
        let direct = f.mul(&f).add_constant(&big(-393768)).unwrap();
        assert!(p.apply(&f).agrees_with(&direct));
    }

    #[test]
    fn insufficient_precision_is_reported() {
        let f = series(-1, &[1, 0, 196884]);
        // window certifies through exponent 1; degree 4 needs exponent 3
        let err = faber_poly(&f, 4).unwrap_err();
        assert!(matches!(err, FaberError::InsufficientPrecision { .. }));
    }

    #[test]
    fn not_normalized_rejected() {
        let f = series(-2, &[1, 0, 0, 4]);
        assert_eq!(faber_poly(&f, 2), Err(FaberError::NotNormalized));
        let g = series(-1, &[2, 0, 4]);
        assert_eq!(faber_poly(&g, 2), Err(FaberError::NotNormalized));
    }

    #[test]
    fn serde_shape() {
        let p = FaberPolynomial::new(2, vec![big(-393768), big(0)]);
        let json = serde_json::to_string(&p).unwrap();
        assert_eq!(json, r#"{"n":2,"c":["-393768","0"]}"#);
        let back: FaberPolynomial = serde_json::from_str(&json).unwrap();
        assert_eq!(back, p);
    }
}
