//! Construction mechanisms for completely replicable functions.
//!
//! Everything here produces exact integer q-series. Constructions are
//! validated downstream by the replication identities, so a wrong guess
//! dies loudly rather than shipping.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, Signed, Zero};
use replicable_core::eta::{eisenstein_e2, euler_product};
use replicable_core::faber::faber_poly;
use replicable_core::series::QSeries;

pub type EtaVec = Vec<(i64, i32)>;

/// Expands `prod eta(m tau)^(r_m) / q^(sum m r_m / 24)`-normalized, i.e.
/// the quotient divided by nothing: the true eta quotient including its
/// fractional leading power, which must come out integral.
/// Returns the series through `q^order` (integer exponents only).
pub fn eta_quotient_series(vec: &EtaVec, order: i64) -> Option<QSeries> {
    let lead: i64 = vec.iter().map(|&(m, r)| m * r as i64).sum();
    if lead % 24 != 0 {
        return None;
    }
    let lead = lead / 24;
    let span = order - lead + 2;
    let mut acc = QSeries::one(span + 1);
    for &(m, r) in vec {
        if r == 0 {
            continue;
        }
        let base = euler_product((span / m).max(1))
            .rescale_exponents(Ratio::from_integer(m))
            .ok()?
            .truncate_scaled(span + 1);
        let p = base.pow(r.unsigned_abs());
        acc = if r > 0 {
            acc.mul(&p)
        } else {
            acc.div_exact(&p).ok()?
        };
    }
    let shifted = acc.mul(&QSeries::monomial(lead, lead + span + 1));
    Some(shifted.truncate_order(order))
}

/// Image of an eta vector under the Fricke involution `W_M`: factors map
/// `m -> M/m` (every `m` must divide `M`), and the weight-0 quotient picks
/// up the constant `prod (M/m)^(r_m/2)`, which must be rational here.
pub fn fricke_image(vec: &EtaVec, level: i64) -> Option<(EtaVec, BigInt)> {
    let weight: i64 = vec.iter().map(|&(_, r)| r as i64).sum();
    if weight != 0 {
        return None;
    }
    let mut image: EtaVec = Vec::new();
    let mut c_num = BigInt::one();
    let mut c_den = BigInt::one();
    for &(m, r) in vec {
        if level % m != 0 {
            return None;
        }
        image.push((level / m, r));
        // (M/m)^(r/2)
        let base = BigInt::from(level / m);
        if r % 2 != 0 {
            // pair odd exponents with a partner of the same (M/m) later;
            // handle via square root at the end instead
        }
        if r >= 0 {
            c_num *= base.pow(r as u32);
        } else {
            c_den *= base.pow(r.unsigned_abs());
        }
    }
    // constant^2 = c_num / c_den; demand an exact rational square root
    let c2 = Ratio::new(c_num, c_den);
    let num = sqrt_exact(c2.numer())?;
    let den = sqrt_exact(c2.denom())?;
    image.sort();
    let c = Ratio::new(num, den);
    if !c.is_integer() {
        return None;
    }
    Some((image, c.to_integer()))
}

fn sqrt_exact(v: &BigInt) -> Option<BigInt> {
    if v.is_negative() {
        return None;
    }
    let r = v.sqrt();
    (&r * &r == *v).then_some(r)
}

/// Whether the eta vector equals its own `W_M` image (so the function is
/// `W_M`-invariant up to the constant, which must then be 1).
pub fn is_fricke_invariant_eta(vec: &EtaVec, level: i64) -> bool {
    match fricke_image(vec, level) {
        Some((image, c)) => {
            let mut sorted = vec.clone();
            sorted.sort();
            sorted.retain(|&(_, r)| r != 0);
            let mut image = image;
            image.retain(|&(_, r)| r != 0);
            image == sorted && c.is_one()
        }
        None => false,
    }
}

/// Whether the `W_M` image vector is the negation (`u |W = C/u`), returning
/// the constant `C` in `u * (u|W) = C`.
pub fn fricke_inverts_eta(vec: &EtaVec, level: i64) -> Option<BigInt> {
    let (image, c) = fricke_image(vec, level)?;
    let mut neg: EtaVec = vec.iter().map(|&(m, r)| (m, -r)).collect();
    neg.sort();
    neg.retain(|&(_, r)| r != 0);
    let mut image = image;
    image.retain(|&(_, r)| r != 0);
    (image == neg).then_some(c)
}

/// Exact h-th root of a series `B = q^(-h) * (1 + ...)` supported on
/// multiples of `h` beyond the pole: returns `f = q^-1 * (1 + ...)` with
/// `f^h = B`, or `None` when some coefficient fails to be an integer.
pub fn integral_root(b: &QSeries, h: u32) -> Option<QSeries> {
    assert!(h >= 1);
    if b.scale() != 1 {
        return None;
    }
    let (lo, lead) = b.leading()?;
    if lo != -(h as i64) || !lead.is_one() {
        return None;
    }
    // x = q^h * B - 1 as a plain power series in q
    let len = (b.prec_scaled() + h as i64) as usize;
    if len < 2 {
        return None;
    }
    let mut x = vec![BigInt::zero(); len];
    for k in 0..len as i64 {
        let c = b.coeff_int(k - h as i64).ok()?;
        x[k as usize] = c;
    }
    x[0] = BigInt::zero(); // drop the leading 1
    // g = (1 + x)^(1/h) via n h g_n = sum_{k<n} g_k x_{n-k} (n - k - h k)
    let hh = BigInt::from(h);
    let mut g = vec![BigInt::zero(); len];
    g[0] = BigInt::one();
    for n in 1..len {
        let mut acc = BigInt::zero();
        for k in 0..n {
            if g[k].is_zero() || x[n - k].is_zero() {
                continue;
            }
            let w = BigInt::from(n as i64 - k as i64) - &hh * BigInt::from(k as i64);
            acc += &g[k] * &x[n - k] * w;
        }
        let denom = &hh * BigInt::from(n as i64);
        let (q, r) = acc.div_rem(&denom);
        if !r.is_zero() {
            return None;
        }
        g[n] = q;
    }
    let mut coeffs = g;
    coeffs.truncate(len.saturating_sub(h as usize - 1).max(1));
    QSeries::from_integer_coeffs(-1, coeffs).ok()
}

/// `B(h tau) + c`, windows permitting.
pub fn rescale_and_shift(b: &QSeries, h: u32, c: &BigInt) -> Option<QSeries> {
    let scaled = b
        .rescale_exponents(Ratio::from_integer(h as i64))
        .ok()?;
    scaled.add_constant(c).ok()
}

/// The h-th replicate extracted from the replication identity itself:
/// `c^(p)_t = [q^(p t)] Phi_p(f) - p * a_(p^2 t)` for prime `p`, valid
/// while `p^2 t` stays inside `f`'s window. Returns the replicate series
/// through the largest reachable order.
pub fn extract_prime_replicate(f: &QSeries, p: u32) -> Option<QSeries> {
    let order_f = f.order();
    let t_max = order_f / (p as i64 * p as i64);
    if t_max < 1 {
        return None;
    }
    let image = faber_poly(f, p).ok()?.image;
    let mut coeffs = Vec::with_capacity((t_max + 2) as usize);
    for t in -1..=t_max {
        let lhs = image.coeff_int(p as i64 * t).ok()?;
        let high = f.coeff_int(p as i64 * p as i64 * t).ok()?;
        coeffs.push(lhs - BigInt::from(p) * high);
    }
    QSeries::from_integer_coeffs(-1, coeffs).ok()
}

/// True when the two series agree on their shared window and that window
/// reaches at least `min_order`.
pub fn matches_through(a: &QSeries, b: &QSeries, min_order: i64) -> bool {
    let agreement = a.agreement(b);
    agreement.first_mismatch.is_none()
        && agreement.window_hi > Ratio::from_integer(min_order)
}

/// Normalizes a candidate to `q^-1 + 0 + ...` (unit leading coefficient at
/// `q^-1`, constant term dropped); `None` when the leading term is not
/// `q^-1` with coefficient +-1.
pub fn normalize_candidate(f: &QSeries) -> Option<QSeries> {
    let (lo, lead) = f.leading()?;
    if f.scale() != 1 || lo != -1 {
        return None;
    }
    let g = if lead.is_one() {
        f.clone()
    } else if (-lead.clone()).is_one() {
        f.mul_scalar(&BigInt::from(-1))
    } else {
        return None;
    };
    let c0 = g.coeff_int(0).ok()?;
    g.add_constant(&(-c0)).ok()
}

/// `E_2(tau) - d * E_2(d tau)`, a weight-2 holomorphic form on Gamma_0(d).
pub fn e2_combo(d: i64, order: i64) -> QSeries {
    let e2 = eisenstein_e2(order);
    let scaled = e2
        .rescale_exponents(Ratio::from_integer(d))
        .unwrap()
        .truncate_order(order);
    e2.sub(&scaled.mul_scalar(&BigInt::from(d)))
        .truncate_order(order)
}

/// Solves `P(t) = base` for a monic degree-`deg` polynomial `P` with the
/// given lower coefficients and a series `t = q^-1 + O(q)`; the solve is
/// triangular, failing on any non-integral step.
pub fn solve_polynomial_cover(
    base: &QSeries,
    poly_lower: &[BigInt], // coefficients of x^0 .. x^(deg-1)
) -> Option<QSeries> {
    let deg = poly_lower.len() as i64 + 1;
    let (lo, lead) = base.leading()?;
    if lo != -deg || !lead.is_one() || base.scale() != 1 {
        return None;
    }
    let order = base.order() + deg - 1; // heuristic reach; checked below
    let mut t = QSeries::monomial(-1, order + 1);
    // Determine t's coefficients one at a time: coefficient a_k of q^k in t
    // first appears in P(t) at exponent k - (deg - 1) with multiplier deg.
    for k in 0..=order {
        let image = apply_monic(poly_lower, &t);
        let e = k - (deg - 1);
        let have = image.coeff_int(e).ok()?;
        let want = base.coeff_int(e).ok()?;
        let diff = want - have;
        let (q, r) = diff.div_rem(&BigInt::from(deg));
        if !r.is_zero() {
            return None;
        }
        if !q.is_zero() {
            t = t.add(&QSeries::monomial(k, order + 1).mul_scalar(&q));
        }
    }
    // final sanity: P(t) matches base on the window we used
    let image = apply_monic(poly_lower, &t);
    let ag = image.agreement(base);
    ag.first_mismatch.is_none().then_some(t)
}

fn apply_monic(lower: &[BigInt], t: &QSeries) -> QSeries {
    // x^deg + lower[deg-1] x^(deg-1) + ... + lower[0], evaluated at t
    let mut acc = t.clone();
    for k in (0..lower.len()).rev() {
        if !lower[k].is_zero() {
            acc = acc.add_constant(&lower[k]).expect("window reaches 0");
        }
        if k > 0 {
            acc = acc.mul(t);
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use replicable_core::eta::j_series;

    #[test]
    fn eta_quotient_2b() {
        let f = eta_quotient_series(&vec![(1, 24), (2, -24)], 6).unwrap();
        assert_eq!(f.coeff_int(0).unwrap(), BigInt::from(-24));
        assert_eq!(f.coeff_int(1).unwrap(), BigInt::from(276));
    }

    #[test]
    fn fricke_constants() {
        // (eta_1/eta_2)^24 |W_2 = 2^12 * inverse
        let c = fricke_inverts_eta(&vec![(1, 24), (2, -24)], 2).unwrap();
        assert_eq!(c, BigInt::from(4096));
    }

    #[test]
    fn cube_root_of_shifted_j() {
        // (j(3 tau))^(1/3) = q^-1 + 248 q^2 + 4124 q^5 + ...
        let j = j_series(40);
        let b = rescale_and_shift(&j, 3, &BigInt::zero()).unwrap();
        let f = integral_root(&b, 3).unwrap();
        assert_eq!(f.coeff_int(2).unwrap(), BigInt::from(248));
        assert_eq!(f.coeff_int(5).unwrap(), BigInt::from(4124));
        assert_eq!(f.coeff_int(8).unwrap(), BigInt::from(34752));
    }

    #[test]
    fn root_rejects_non_integral() {
        let j = j_series(20);
        // q^-2 * (...) with a shift that breaks divisibility by 2
        let b = rescale_and_shift(&j, 2, &BigInt::from(3)).unwrap();
        assert!(integral_root(&b, 2).is_none());
    }

    #[test]
    fn replicate_extraction_self_for_j() {
        let j = j_series(64).add_constant(&BigInt::from(-744)).unwrap();
        let rep = extract_prime_replicate(&j, 2).unwrap();
        assert!(matches_through(&rep, &j, 10));
    }
}
