//! Truncated Puiseux series in `q` with exact integer coefficients.
//!
//! A [`QSeries`] stores the coefficients of `q^(k/s)` for scaled exponents
//! `k` in the half-open window `[lo, prec)`. Everything below `lo` is an
//! implicit exact zero, everything at or beyond `prec` is unknown. A series
//! with scale `s` is supported on exponents in `(1/s)·Z`; exponents outside
//! that lattice are exact zeros as well.
//!
//! Precision is tracked pessimistically: no operation ever reports a
//! coefficient outside the window it can certify.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, Signed, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;

/// Exponents are rationals `k/s` with modest numerators; i64 is ample.
pub type Exponent = Ratio<i64>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SeriesError {
    #[error("exponent {exponent} outside guaranteed window [{window_lo}, {window_hi})")]
    OutOfWindow {
        exponent: Exponent,
        window_lo: Exponent,
        window_hi: Exponent,
    },
    #[error("exponent {exponent} not representable at scale {scale}")]
    IncompatibleScale { exponent: Exponent, scale: i64 },
    #[error("divisor has no leading coefficient of absolute value 1 in its window")]
    NonUnitLeading,
    #[error("rescale factor must be positive, got {0}")]
    InvalidRescale(Exponent),
    #[error("window is empty or malformed (lo {lo}, prec {prec})")]
    BadWindow { lo: i64, prec: i64 },
    #[error("scale must be a positive integer, got {0}")]
    BadScale(i64),
}

/// Truncated Puiseux series with exact integer coefficients.
///
/// The canonical form keeps `lo` at the first nonzero coefficient (implicit
/// zeros are dropped from storage) and the scale minimal, so structural
/// equality coincides with "same certified claims".
#[derive(Clone, PartialEq, Eq)]
pub struct QSeries {
    scale: i64,
    lo: i64,
    prec: i64,
    coeffs: Vec<BigInt>,
}

impl QSeries {
    /// Builds a series from scaled coefficients: `coeffs[i]` is the
    /// coefficient of `q^((lo+i)/scale)`; `prec = lo + coeffs.len()`.
    pub fn from_coeffs(scale: i64, lo: i64, coeffs: Vec<BigInt>) -> Result<Self, SeriesError> {
        if scale < 1 {
            return Err(SeriesError::BadScale(scale));
        }
        if coeffs.is_empty() {
            return Err(SeriesError::BadWindow { lo, prec: lo });
        }
        let prec = lo + coeffs.len() as i64;
        let mut s = QSeries {
            scale,
            lo,
            prec,
            coeffs,
        };
        s.canonicalize();
        Ok(s)
    }

    /// Scale-1 series from integer-exponent coefficients.
    pub fn from_integer_coeffs(lo: i64, coeffs: Vec<BigInt>) -> Result<Self, SeriesError> {
        Self::from_coeffs(1, lo, coeffs)
    }

    /// The zero series certified below `prec` (scale 1).
    pub fn zero(prec: i64) -> Self {
        QSeries {
            scale: 1,
            lo: prec - 1,
            prec,
            coeffs: vec![BigInt::zero()],
        }
    }

    /// Constant series at scale 1, certified below `prec`.
    pub fn constant(c: impl Into<BigInt>, prec: i64) -> Self {
        let c = c.into();
        assert!(prec > 0, "constant needs prec > 0 to certify exponent 0");
        let mut s = QSeries {
            scale: 1,
            lo: 0,
            prec,
            coeffs: std::iter::once(c)
                .chain(std::iter::repeat_with(BigInt::zero).take((prec - 1) as usize))
                .collect(),
        };
        s.canonicalize();
        s
    }

    pub fn one(prec: i64) -> Self {
        Self::constant(1, prec)
    }

    /// The monomial `q^k` at scale 1, certified below `prec`.
    pub fn monomial(k: i64, prec: i64) -> Self {
        assert!(prec > k, "monomial exponent must sit inside the window");
        let len = (prec - k) as usize;
        let mut coeffs = vec![BigInt::zero(); len];
        coeffs[0] = BigInt::one();
        QSeries {
            scale: 1,
            lo: k,
            prec,
            coeffs,
        }
    }

    pub fn scale(&self) -> i64 {
        self.scale
    }

    /// Smallest stored scaled exponent.
    pub fn lo_scaled(&self) -> i64 {
        self.lo
    }

    /// Exclusive scaled precision bound.
    pub fn prec_scaled(&self) -> i64 {
        self.prec
    }

    /// Smallest stored exponent as a rational.
    pub fn lo_exponent(&self) -> Exponent {
        Ratio::new(self.lo, self.scale)
    }

    /// Exclusive upper bound of the certified window as a rational.
    pub fn prec_exponent(&self) -> Exponent {
        Ratio::new(self.prec, self.scale)
    }

    /// Largest integer exponent `e` with every exponent `<= e` certified.
    pub fn order(&self) -> i64 {
        // ceil(prec/scale) - 1
        (self.prec + self.scale - 1).div_euclid(self.scale) - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// First nonzero term `(scaled exponent, coefficient)`, if any.
    pub fn leading(&self) -> Option<(i64, &BigInt)> {
        self.coeffs
            .iter()
            .enumerate()
            .find(|(_, c)| !c.is_zero())
            .map(|(i, c)| (self.lo + i as i64, c))
    }

    /// Exact coefficient of `q^e`.
    pub fn coeff(&self, e: Exponent) -> Result<BigInt, SeriesError> {
        let scaled = e * Ratio::from_integer(self.scale);
        if !scaled.is_integer() {
            return Err(SeriesError::IncompatibleScale {
                exponent: e,
                scale: self.scale,
            });
        }
        let k = scaled.to_integer();
        if k >= self.prec {
            return Err(SeriesError::OutOfWindow {
                exponent: e,
                window_lo: self.lo_exponent(),
                window_hi: self.prec_exponent(),
            });
        }
        if k < self.lo {
            return Ok(BigInt::zero());
        }
        Ok(self.coeffs[(k - self.lo) as usize].clone())
    }

    /// Coefficient of the integer exponent `e` (scale-1 convenience).
    pub fn coeff_int(&self, e: i64) -> Result<BigInt, SeriesError> {
        self.coeff(Ratio::from_integer(e))
    }

    /// Scaled coefficient lookup without window checking; exponents below
    /// `lo` read as zero. Callers must stay below `prec`.
    fn at(&self, k: i64) -> BigInt {
        if k < self.lo {
            BigInt::zero()
        } else {
            debug_assert!(k < self.prec);
            self.coeffs[(k - self.lo) as usize].clone()
        }
    }

    /// Iterates `(exponent, coefficient)` over nonzero stored terms.
    pub fn terms(&self) -> impl Iterator<Item = (Exponent, &BigInt)> {
        let scale = self.scale;
        let lo = self.lo;
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(move |(i, c)| (Ratio::new(lo + i as i64, scale), c))
    }

    fn canonicalize(&mut self) {
        // Drop leading zeros into the implicit-zero region, keep >= 1 entry.
        let lead = self
            .coeffs
            .iter()
            .position(|c| !c.is_zero())
            .unwrap_or(self.coeffs.len() - 1);
        if lead > 0 {
            self.coeffs.drain(..lead);
            self.lo += lead as i64;
        }
        if self.scale > 1 {
            self.reduce_scale();
        }
    }

    /// Reduces the scale by the gcd of all nonzero positions, weakening the
    /// window bound as little as soundness allows.
    fn reduce_scale(&mut self) {
        let mut g = self.scale;
        for (i, c) in self.coeffs.iter().enumerate() {
            if !c.is_zero() {
                g = g.gcd(&(self.lo + i as i64));
                if g == 1 {
                    return;
                }
            }
        }
        // All-zero series reduce against lo alone so the window stays sane.
        if self.is_zero() {
            g = self.scale;
        }
        let new_scale = self.scale / g;
        let new_lo = self.lo.div_euclid(g);
        // Claims at reduced positions k' require k'*g < prec.
        let new_prec = (self.prec - 1).div_euclid(g) + 1;
        let mut coeffs = vec![BigInt::zero(); (new_prec - new_lo).max(1) as usize];
        for (i, c) in self.coeffs.iter().enumerate() {
            if !c.is_zero() {
                let k = self.lo + i as i64;
                coeffs[(k / g - new_lo) as usize] = c.clone();
            }
        }
        self.scale = new_scale;
        self.lo = new_lo;
        self.prec = new_prec;
        self.coeffs = coeffs;
    }

    /// Rewrites the series at scale `new_scale` (a multiple of the current
    /// one) without changing its meaning.
    fn upscale(&self, new_scale: i64) -> QSeries {
        debug_assert!(new_scale % self.scale == 0);
        let m = new_scale / self.scale;
        if m == 1 {
            return self.clone();
        }
        let lo = self.lo * m;
        // Window scales exactly: claims below prec/s == m*prec / new_scale.
        let prec = self.prec * m;
        let mut coeffs = vec![BigInt::zero(); (prec - lo) as usize];
        for (i, c) in self.coeffs.iter().enumerate() {
            coeffs[i * m as usize] = c.clone();
        }
        QSeries {
            scale: new_scale,
            lo,
            prec,
            coeffs,
        }
    }

    fn common_scale(&self, other: &QSeries) -> (QSeries, QSeries) {
        let s = self.scale.lcm(&other.scale);
        (self.upscale(s), other.upscale(s))
    }

    /// Exact sum. Result window: `lo = min(lo)`, `prec = min(prec)` after
    /// rescaling to the common scale.
    pub fn add(&self, other: &QSeries) -> QSeries {
        let (a, b) = self.common_scale(other);
        let lo = a.lo.min(b.lo);
        let prec = a.prec.min(b.prec);
        let mut coeffs = Vec::with_capacity((prec - lo) as usize);
        for k in lo..prec {
            coeffs.push(a.at(k) + b.at(k));
        }
        let mut s = QSeries {
            scale: a.scale,
            lo,
            prec,
            coeffs,
        };
        s.canonicalize();
        s
    }

    pub fn neg(&self) -> QSeries {
        let mut out = self.clone();
        for c in &mut out.coeffs {
            *c = -std::mem::take(c);
        }
        out
    }

    pub fn sub(&self, other: &QSeries) -> QSeries {
        self.add(&other.neg())
    }

    pub fn mul_scalar(&self, k: &BigInt) -> QSeries {
        let mut out = self.clone();
        for c in &mut out.coeffs {
            *c = std::mem::take(c) * k;
        }
        out.canonicalize();
        out
    }

    /// Adds `c` at exponent 0. The window must certify exponent 0.
    pub fn add_constant(&self, c: &BigInt) -> Result<QSeries, SeriesError> {
        if self.prec <= 0 {
            return Err(SeriesError::OutOfWindow {
                exponent: Ratio::zero(),
                window_lo: self.lo_exponent(),
                window_hi: self.prec_exponent(),
            });
        }
        Ok(self.add(&QSeries::constant(
            c.clone(),
            (self.prec + self.scale - 1) / self.scale,
        )))
    }

    /// Exact convolution product. Result precision is
    /// `min(prec_a + lo_b, prec_b + lo_a)` in common scaled units: the
    /// largest exponent whose convolution sum uses only in-window terms.
    pub fn mul(&self, other: &QSeries) -> QSeries {
        let (a, b) = self.common_scale(other);
        let lo = a.lo + b.lo;
        let prec = (a.prec + b.lo).min(b.prec + a.lo);
        debug_assert!(lo < prec);
        let mut coeffs = vec![BigInt::zero(); (prec - lo) as usize];
        for (i, ca) in a.coeffs.iter().enumerate() {
            if ca.is_zero() {
                continue;
            }
            let ka = a.lo + i as i64;
            for (j, cb) in b.coeffs.iter().enumerate() {
                let k = ka + b.lo + j as i64;
                if k >= prec {
                    break;
                }
                if cb.is_zero() {
                    continue;
                }
                coeffs[(k - lo) as usize] += ca * cb;
            }
        }
        let mut s = QSeries {
            scale: a.scale,
            lo,
            prec,
            coeffs,
        };
        s.canonicalize();
        s
    }

    /// Exact power by repeated squaring with the same precision propagation
    /// as iterated multiplication: `prec(f^k) = prec + (k-1)*lo` scaled.
    pub fn pow(&self, k: u32) -> QSeries {
        if k == 0 {
            // Limit of the product window rule: one() below prec - lo.
            let prec = self.prec - self.lo;
            return QSeries::one((prec + self.scale - 1) / self.scale).upscale_if(self.scale);
        }
        let mut base = self.clone();
        let mut acc: Option<QSeries> = None;
        let mut e = k;
        loop {
            if e & 1 == 1 {
                acc = Some(match acc {
                    None => base.clone(),
                    Some(a) => a.mul(&base),
                });
            }
            e >>= 1;
            if e == 0 {
                break;
            }
            base = base.mul(&base);
        }
        acc.unwrap()
    }

    fn upscale_if(self, _scale: i64) -> QSeries {
        // Canonical form keeps minimal scale; the product rules re-derive
        // common scales on demand, so nothing to do.
        self
    }

    /// Exact quotient `self / divisor` for a divisor whose leading
    /// coefficient is +1 or -1; the unit leading term keeps every quotient
    /// coefficient integral.
    pub fn div_exact(&self, divisor: &QSeries) -> Result<QSeries, SeriesError> {
        let (f, g) = self.common_scale(divisor);
        let (v, lead) = g.leading().ok_or(SeriesError::NonUnitLeading)?;
        if !lead.abs().is_one() {
            return Err(SeriesError::NonUnitLeading);
        }
        let lead = lead.clone();
        // h = f/g: determined below min(prec_f, prec_g - v + lo_f) - v.
        let lo_h = f.lo - v;
        let prec_h = f.prec.min(g.prec - v + f.lo) - v;
        debug_assert!(lo_h < prec_h);
        // Long division against the shifted divisor u = g / q^(v/s).
        let mut rem: Vec<BigInt> = (0..(prec_h - lo_h))
            .map(|i| f.at(f.lo + i))
            .collect();
        let mut out = Vec::with_capacity(rem.len());
        let glen = g.prec - v; // usable divisor terms relative to v
        for i in 0..rem.len() {
            let c = std::mem::take(&mut rem[i]);
            let c = if lead.is_one() { c } else { -c };
            if !c.is_zero() {
                for j in 1..glen.min((rem.len() - i) as i64) {
                    let gc = g.at(v + j);
                    if !gc.is_zero() {
                        rem[i + j as usize] -= &c * &gc;
                    }
                }
            }
            out.push(c);
        }
        let mut h = QSeries {
            scale: f.scale,
            lo: lo_h,
            prec: prec_h,
            coeffs: out,
        };
        h.canonicalize();
        Ok(h)
    }

    /// Substitutes `q -> q^r`, i.e. multiplies every exponent by `r > 0`.
    pub fn rescale_exponents(&self, r: Exponent) -> Result<QSeries, SeriesError> {
        if r <= Ratio::zero() {
            return Err(SeriesError::InvalidRescale(r));
        }
        let (p, q) = (*r.numer(), *r.denom());
        let g = p.gcd(&(self.scale * q));
        let new_scale = self.scale * q / g;
        let m = p / g; // scaled exponents map k -> k*m
        let lo = self.lo * m;
        let prec = self.prec * m;
        let mut coeffs = vec![BigInt::zero(); (prec - lo) as usize];
        for (i, c) in self.coeffs.iter().enumerate() {
            if !c.is_zero() {
                coeffs[(i as i64 * m) as usize] = c.clone();
            }
        }
        let mut s = QSeries {
            scale: new_scale,
            lo,
            prec,
            coeffs,
        };
        s.canonicalize();
        Ok(s)
    }

    /// Narrows the certified window to exponents `< new_prec` (in scaled
    /// units of the current scale).
    pub fn truncate_scaled(&self, new_prec: i64) -> QSeries {
        assert!(new_prec <= self.prec, "truncate cannot extend the window");
        assert!(new_prec > self.lo || self.is_zero() || self.leading().map(|(k, _)| k >= new_prec - 1).unwrap_or(true));
        let keep = (new_prec - self.lo).max(1) as usize;
        let mut s = QSeries {
            scale: self.scale,
            lo: self.lo.min(new_prec - 1),
            prec: new_prec,
            coeffs: if new_prec <= self.lo {
                vec![BigInt::zero()]
            } else {
                self.coeffs[..keep.min(self.coeffs.len())].to_vec()
            },
        };
        s.canonicalize();
        s
    }

    /// Narrows to integer order `k`: certifies exponents `<= k`.
    pub fn truncate_order(&self, k: i64) -> QSeries {
        self.truncate_scaled((k * self.scale + 1).min(self.prec))
    }

    /// Compares the two series on the intersection of their certified
    /// windows, reporting the window and the first mismatch if any.
    pub fn agreement(&self, other: &QSeries) -> Agreement {
        let (a, b) = self.common_scale(other);
        let prec = a.prec.min(b.prec);
        let lo = a.lo.min(b.lo).min(prec - 1);
        let mut first_mismatch = None;
        for k in lo..prec {
            let (ca, cb) = (a.at(k), b.at(k));
            if ca != cb {
                first_mismatch = Some(Mismatch {
                    exponent: Ratio::new(k, a.scale),
                    lhs: ca,
                    rhs: cb,
                });
                break;
            }
        }
        Agreement {
            window_lo: Ratio::new(lo, a.scale),
            window_hi: Ratio::new(prec, a.scale),
            first_mismatch,
        }
    }

    /// True when the two series agree everywhere both windows certify.
    pub fn agrees_with(&self, other: &QSeries) -> bool {
        self.agreement(&other.clone()).first_mismatch.is_none()
    }
}

/// Outcome of a windowed comparison: the certified window and the first
/// mismatching exponent, if any.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Agreement {
    pub window_lo: Exponent,
    pub window_hi: Exponent,
    pub first_mismatch: Option<Mismatch>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Mismatch {
    pub exponent: Exponent,
    #[serde(with = "bigint_string")]
    pub lhs: BigInt,
    #[serde(with = "bigint_string")]
    pub rhs: BigInt,
}

impl fmt::Debug for QSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "QSeries(scale {}, window [{}, {}): {})",
            self.scale, self.lo, self.prec, self
        )
    }
}

impl fmt::Display for QSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut wrote = false;
        for (e, c) in self.terms().take(8) {
            if wrote {
                write!(f, " {} ", if c.is_negative() { "-" } else { "+" })?;
            } else if c.is_negative() {
                write!(f, "-")?;
            }
            let a = c.abs();
            if e.is_zero() {
                write!(f, "{a}")?;
            } else {
                if !a.is_one() {
                    write!(f, "{a}*")?;
                }
                if e.is_integer() {
                    write!(f, "q^{}", e.to_integer())?;
                } else {
                    write!(f, "q^({e})")?;
                }
            }
            wrote = true;
        }
        if !wrote {
            write!(f, "0")?;
        }
        write!(f, " + O(q^{})", self.prec_exponent())
    }
}

/// Serialized shape: `{"scale": s, "lo": lo, "prec": p, "coeffs": [..]}` with
/// decimal-string coefficients (they outgrow native numbers quickly).
#[derive(Serialize, Deserialize)]
struct QSeriesRepr {
    scale: i64,
    lo: i64,
    prec: i64,
    coeffs: Vec<String>,
}

impl Serialize for QSeries {
    fn serialize<S: Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        QSeriesRepr {
            scale: self.scale,
            lo: self.lo,
            prec: self.prec,
            coeffs: self.coeffs.iter().map(|c| c.to_string()).collect(),
        }
        .serialize(ser)
    }
}

impl<'de> Deserialize<'de> for QSeries {
    fn deserialize<D: Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        let repr = QSeriesRepr::deserialize(de)?;
        let coeffs = repr
            .coeffs
            .iter()
            .map(|s| s.parse::<BigInt>().map_err(D::Error::custom))
            .collect::<Result<Vec<_>, _>>()?;
        if repr.prec != repr.lo + coeffs.len() as i64 {
            return Err(D::Error::custom(format!(
                "coeffs length {} does not match window [{}, {})",
                coeffs.len(),
                repr.lo,
                repr.prec
            )));
        }
        QSeries::from_coeffs(repr.scale, repr.lo, coeffs).map_err(D::Error::custom)
    }
}

/// serde helper: BigInt as decimal string.
pub mod bigint_string {
    use super::*;

    pub fn serialize<S: Serializer>(v: &BigInt, ser: S) -> Result<S::Ok, S::Error> {
        ser.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<BigInt, D::Error> {
        let s = String::deserialize(de)?;
        s.parse().map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(v: i64) -> BigInt {
        BigInt::from(v)
    }

    fn series(lo: i64, coeffs: &[i64]) -> QSeries {
        QSeries::from_integer_coeffs(lo, coeffs.iter().map(|&c| big(c)).collect()).unwrap()
    }

    #[test]
    fn coeff_monomial() {
        let f = QSeries::monomial(-1, 5);
        assert_eq!(f.coeff_int(-1).unwrap(), big(1));
        assert_eq!(f.coeff_int(3).unwrap(), big(0));
        assert!(f.coeff_int(5).is_err());
        assert_eq!(f.coeff_int(-7).unwrap(), big(0));
    }

    #[test]
    fn coeff_scale_mismatch() {
        let f = series(-1, &[1, 0, 5]);
        assert!(matches!(
            f.coeff(Ratio::new(1, 2)),
            Err(SeriesError::IncompatibleScale { .. })
        ));
    }

    #[test]
    fn add_monomials() {
        let f = QSeries::monomial(-1, 4);
        let two = f.add(&f);
        assert_eq!(two.coeff_int(-1).unwrap(), big(2));
        assert!(two.sub(&f).sub(&f).is_zero());
    }

    #[test]
    fn mul_two_term_square() {
        // (q^-1 + 196884 q)^2 = q^-2 + 2*196884 + 196884^2 q^2
        let f = series(-1, &[1, 0, 196884]);
        let sq = f.mul(&f);
        assert_eq!(sq.coeff_int(-2).unwrap(), big(1));
        assert_eq!(sq.coeff_int(0).unwrap(), big(2 * 196884));
        // window: prec = min(2 + (-1), 2 + (-1)) = 1 scaled, so q^0 is the
        // last certified exponent; q^2 lies outside.
        assert!(sq.coeff_int(2).is_err());
        assert_eq!(sq.prec_scaled(), 1);
    }

    #[test]
    fn mul_identity() {
        let f = series(-1, &[1, 7, -3, 4]);
        let one = QSeries::one(10);
        assert!(f.mul(&one).agrees_with(&f));
    }

    #[test]
    fn div_inverts_mul() {
        let f = series(-1, &[1, 0, 196884]);
        let sq = f.mul(&f);
        let back = sq.div_exact(&f).unwrap();
        let agree = back.agreement(&f);
        assert!(agree.first_mismatch.is_none());
        assert_eq!(back.coeff_int(-1).unwrap(), big(1));
    }

    #[test]
    fn div_requires_unit_leading() {
        let f = series(-1, &[1, 0, 3]);
        let g = series(0, &[2, 1]);
        assert_eq!(f.div_exact(&g), Err(SeriesError::NonUnitLeading));
    }

    #[test]
    fn div_self_is_one() {
        let f = series(-2, &[1, -24, 252, -1472, 0, 5, 6]);
        let q = f.div_exact(&f).unwrap();
        assert_eq!(q.coeff_int(0).unwrap(), big(1));
        assert!(q.sub(&QSeries::one(2)).is_zero());
    }

    #[test]
    fn pow_basics() {
        let f = series(-1, &[1, 2, 3, 4, 5, 6]);
        assert_eq!(f.pow(0).coeff_int(0).unwrap(), big(1));
        assert!(f.pow(1).agrees_with(&f));
        let via_mul = f.mul(&f).mul(&f);
        let cubed = f.pow(3);
        assert_eq!(cubed, via_mul);
    }

    #[test]
    fn rescale_examples() {
        let f = series(-1, &[1, 0, 196884]);
        let same = f.rescale_exponents(Ratio::one()).unwrap();
        assert_eq!(same, f);
        let tripled = f.rescale_exponents(Ratio::from_integer(3)).unwrap();
        assert_eq!(tripled.coeff_int(-3).unwrap(), big(1));
        assert_eq!(tripled.coeff_int(3).unwrap(), big(196884));
        let halved = f.rescale_exponents(Ratio::new(1, 2)).unwrap();
        assert_eq!(halved.scale(), 2);
        assert_eq!(halved.coeff(Ratio::new(-1, 2)).unwrap(), big(1));
        let back = halved.rescale_exponents(Ratio::from_integer(2)).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn add_constant_extends_window() {
        let f = series(-3, &[1, 0, 783]);
        // windows only reach q^-1, exponent 0 is outside
        assert!(f.add_constant(&big(42)).is_err());
        let f = series(-3, &[1, 0, 0, 42, 0, 0, 783]);
        let g = f.add_constant(&big(-42)).unwrap();
        assert_eq!(g.coeff_int(0).unwrap(), big(0));
    }

    #[test]
    fn equality_is_canonical() {
        let a = QSeries::from_coeffs(2, -2, vec![big(1), big(0), big(5)]).unwrap();
        let b = series(-1, &[1, 5]);
        // a reduces to scale 1 with prec floor((0)/2)+1 ... check agreement
        assert_eq!(a.scale(), 1);
        assert!(a.agrees_with(&b));
    }

    #[test]
    fn zero_series_window() {
        let z = QSeries::zero(5);
        assert!(z.is_zero());
        assert_eq!(z.coeff_int(4).unwrap(), big(0));
        assert!(z.coeff_int(5).is_err());
    }

    #[test]
    fn serde_round_trip() {
        let f = series(-1, &[1, 0, 196884, 21493760]);
        let json = serde_json::to_string(&f).unwrap();
        assert!(json.contains("\"196884\""));
        let back: QSeries = serde_json::from_str(&json).unwrap();
        assert_eq!(back, f);
    }
}
