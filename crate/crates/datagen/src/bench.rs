//! Builds the pool of completely replicable functions bottom-up: eta
//! quotients and Fricke symmetrizations first, then root constructions,
//! then the special covers. Every candidate passes the replication
//! identities before it is admitted, so the stages are free to guess.

use crate::kit::{
    e2_combo, eta_quotient_series, fricke_inverts_eta, integral_root, is_fricke_invariant_eta,
    normalize_candidate, rescale_and_shift, solve_polynomial_cover, EtaVec,
};
use crate::pool::{Construction, FlagSource, Pool, RegisterOutcome};
use num_bigint::BigInt;
use num_traits::One;
use replicable_core::eta::j_normalized;
use replicable_core::faber::faber_poly;
use replicable_core::series::QSeries;

/// Exponent window used for lattice screening and quick checks.
const SCREEN_ORDER: i64 = 96;

/// Divisors of n.
pub fn divisors(n: i64) -> Vec<i64> {
    let mut d: Vec<i64> = (1..=n).filter(|k| n % k == 0).collect();
    d.sort();
    d
}

/// Necessary conditions for replicability that involve only `f` itself:
/// at exponents `e` coprime to `n`, the degree-`n` identity reduces to
/// `[q^e] Phi_n(f) = n * a_(n e)`, because only the `a = 1` term of the
/// Hecke side survives. Checks n = 2, 3, 4 as far as the window allows.
pub fn quick_screen(f: &QSeries) -> bool {
    let w = f.order();
    for n in [2u32, 3, 4] {
        let e_max = w / n as i64;
        if e_max < 2 {
            continue;
        }
        let image = match faber_poly(f, n) {
            Ok(out) => out.image,
            Err(_) => return false,
        };
        for e in 1..=e_max {
            if num_integer::gcd(e, n as i64) != 1 {
                continue;
            }
            let lhs = match image.coeff_int(e) {
                Ok(v) => v,
                Err(_) => break,
            };
            let rhs = match f.coeff_int(n as i64 * e) {
                Ok(v) => v,
                Err(_) => break,
            };
            if lhs != BigInt::from(n) * rhs {
                return false;
            }
        }
    }
    true
}

/// Enumerates eta exponent vectors over the divisors of `level` with
/// weight 0, order -1 at infinity, and an integral order at the zero cusp.
pub fn lattice_vectors(level: i64, cap: i32) -> Vec<EtaVec> {
    let divs = divisors(level);
    let k = divs.len();
    let mut out = Vec::new();
    let mut r = vec![0i32; k];
    // Depth-first over all but the final two exponents; those two are
    // solved from the weight and order constraints.
    fn rec(
        divs: &[i64],
        cap: i32,
        level: i64,
        idx: usize,
        r: &mut Vec<i32>,
        out: &mut Vec<EtaVec>,
    ) {
        let k = divs.len();
        if idx + 2 == k {
            // solve r[k-2], r[k-1]:
            //   sum r = 0, sum m r = -24
            let s: i64 = r[..idx].iter().map(|&x| x as i64).sum();
            let t: i64 = r[..idx]
                .iter()
                .zip(divs)
                .map(|(&x, &m)| x as i64 * m)
                .sum();
            let (ma, mb) = (divs[k - 2], divs[k - 1]);
            // ra + rb = -s; ma ra + mb rb = -24 - t
            let det = mb - ma;
            let num_ra = -s * mb + 24 + t;
            if det == 0 || num_ra % det != 0 {
                return;
            }
            let ra = num_ra / det;
            let rb = -s - ra;
            if ra.abs() > cap as i64 * 2 || rb.abs() > cap as i64 * 2 {
                return;
            }
            r[k - 2] = ra as i32;
            r[k - 1] = rb as i32;
            // order at the zero cusp must also be integral: sum (N/m) r = 0 mod 24
            let zero: i64 = r
                .iter()
                .zip(divs)
                .map(|(&x, &m)| x as i64 * (level / m))
                .sum();
            if zero % 24 != 0 {
                return;
            }
            if r.iter().all(|&x| x == 0) {
                return;
            }
            out.push(divs.iter().copied().zip(r.iter().copied()).collect());
            return;
        }
        for v in -cap..=cap {
            r[idx] = v;
            rec(divs, cap, level, idx + 1, r, out);
        }
        r[idx] = 0;
    }
    if k >= 2 {
        rec(&divs, cap, level, 0, &mut r, &mut out);
    }
    out
}

fn fricke_flag_for_eta(vec: &EtaVec) -> bool {
    let lcm = vec
        .iter()
        .filter(|&&(_, r)| r != 0)
        .fold(1i64, |acc, &(m, _)| num_integer::lcm(acc, m));
    [1i64, 2, 3, 4, 6, 8, 9, 12]
        .iter()
        .any(|&k| is_fricke_invariant_eta(vec, lcm * k))
}

pub fn register_eta_candidate(pool: &mut Pool, level: i64, vec: &EtaVec, order: i64) {
    let Some(series) = eta_quotient_series(vec, order) else {
        return;
    };
    let Some(f) = normalize_candidate(&series) else {
        return;
    };
    if !quick_screen(&f.truncate_order(SCREEN_ORDER.min(f.order()))) {
        return;
    }
    let fricke = fricke_flag_for_eta(vec);
    let name = format!("eta{level}.{}", pool.entries.len());
    match pool.register(
        &name,
        &f,
        Some(level),
        FlagSource::EtaComputed(fricke),
        Construction::Eta(vec.clone()),
        &format!("eta quotient {vec:?} at level {level}"),
    ) {
        Ok(RegisterOutcome::New(n)) => {
            let e = pool.get(&n).unwrap();
            println!(
                "  [eta {level}] {n}: order {}, fricke {fricke}, a1..a4 = {:?}, map {:?}",
                e.order,
                prefix_of(&e.series),
                e.replicates
            );
        }
        Ok(RegisterOutcome::Existing(_)) => {}
        Err(_) => {}
    }
}

pub fn register_fricke_sum(pool: &mut Pool, level: i64, vec: &EtaVec, order: i64) {
    let Some(c) = fricke_inverts_eta(vec, level) else {
        return;
    };
    let Some(u) = eta_quotient_series(vec, order) else {
        return;
    };
    if !matches!(u.leading(), Some((-1, l)) if l.is_one() || (-l).is_one()) {
        return;
    }
    let inv = match QSeries::one(order + 3).div_exact(&u) {
        Ok(v) => v,
        Err(_) => return,
    };
    let t = u.add(&inv.mul_scalar(&c));
    let Some(f) = normalize_candidate(&t) else {
        return;
    };
    if !quick_screen(&f.truncate_order(SCREEN_ORDER.min(f.order()))) {
        return;
    }
    let name = format!("sum{level}.{}", pool.entries.len());
    match pool.register(
        &name,
        &f,
        Some(level),
        FlagSource::FrickeByConstruction,
        Construction::FrickeSum(vec.clone(), level),
        &format!("u + {c}/u for eta quotient u = {vec:?}, Fricke-symmetrized at level {level}"),
    ) {
        Ok(RegisterOutcome::New(n)) => {
            let e = pool.get(&n).unwrap();
            println!(
                "  [sum {level}] {n}: order {}, a1..a4 = {:?}, map {:?}",
                e.order,
                prefix_of(&e.series),
                e.replicates
            );
        }
        _ => {}
    }
}

fn prefix_of(f: &QSeries) -> Vec<BigInt> {
    (1..=4).map(|k| f.coeff_int(k).unwrap()).collect()
}

/// Stage 1: J, the Eisenstein ratio at level 11, eta lattices and Fricke
/// sums at every level the chains can reach.
pub fn stage_eta(pool: &mut Pool) {
    println!("== stage: eta and Fricke sums ==");
    pool.register(
        "1A",
        &j_normalized(700),
        Some(1),
        FlagSource::FrickeByConstruction,
        Construction::JNormalized,
        "E4^3/Delta - 744",
    )
    .expect("J must register");
    println!("  [J] 1A registered");

    // 11A: (E2 - 11 E2(11.)) / (eta_1 eta_11)^2; both numerator and
    // denominator flip sign under W_11, so the ratio is invariant.
    let e11 = 700;
    let num = e2_combo(11, e11 + 4);
    let den = eta_quotient_series(&vec![(1, 2), (11, 2)], e11 + 4).unwrap();
    let t11 = num.div_exact(&den).expect("eta square is unit-leading");
    if let Some(f) = normalize_candidate(&t11) {
        let out = pool.register(
            "lvl11",
            &f,
            Some(11),
            FlagSource::FrickeByConstruction,
            Construction::EisensteinRatio {
                d: 11,
                denominator: vec![(1, 2), (11, 2)],
            },
            "(E2 - 11 E2(11t)) / (eta_1 eta_11)^2",
        );
        println!("  [eis 11] {out:?}");
    }

    let plan: &[(i64, i32, i64)] = &[
        (2, 24, 400),
        (3, 13, 400),
        (4, 9, 400),
        (5, 7, 400),
        (6, 6, 300),
        (7, 5, 300),
        (8, 9, 300),
        (9, 4, 300),
        (10, 4, 300),
        (12, 5, 200),
        (13, 3, 900),
        (14, 4, 300),
        (15, 4, 400),
        (16, 5, 300),
        (18, 4, 200),
        (20, 3, 200),
        (21, 3, 300),
        (22, 3, 700),
        (24, 3, 150),
        (25, 3, 300),
        (27, 4, 200),
        (36, 2, 150),
        (39, 2, 900),
        (42, 2, 400),
        (49, 4, 300),
    ];
    for &(level, cap, order) in plan {
        let vecs = lattice_vectors(level, cap);
        println!("level {level}: {} lattice vectors", vecs.len());
        for vec in &vecs {
            register_eta_candidate(pool, level, vec, order);
            register_fricke_sum(pool, level, vec, order);
        }
    }
}

/// Root search: h-th roots of `base(h tau) + c` over a signed range of
/// shifts, with fast-abort integrality and the quick screen before a full
/// registration attempt.
pub fn root_search(
    pool: &mut Pool,
    target_order: u32,
    h: u32,
    c_lo: i64,
    c_hi: i64,
    full_order: i64,
) {
    let bases: Vec<(String, QSeries)> = pool
        .entries
        .iter()
        .filter(|e| e.order * h == target_order)
        .map(|e| (e.name.clone(), e.series.clone()))
        .collect();
    for (base_name, base) in bases {
        let screen_base = base.truncate_order((SCREEN_ORDER / h as i64 + 2).min(base.order()));
        let mut survivors = Vec::new();
        for c in c_lo..=c_hi {
            let c = BigInt::from(c);
            let Some(b) = rescale_and_shift(&screen_base, h, &c) else {
                continue;
            };
            let Some(f) = integral_root(&b, h) else {
                continue;
            };
            if !quick_screen(&f) {
                continue;
            }
            survivors.push(c);
        }
        for c in survivors {
            let b = rescale_and_shift(&base, h, &c).expect("window");
            let Some(f) = integral_root(&b, h) else {
                continue;
            };
            let f = f.truncate_order(full_order.min(f.order()));
            let name = format!("r{target_order}.{h}.{}", pool.entries.len());
            match pool.register(
                &name,
                &f,
                None,
                FlagSource::InheritsBase(base_name.clone()),
                Construction::Root {
                    base: base_name.clone(),
                    h,
                    c: c.clone(),
                },
                &format!("{h}-th root of {base_name}({h}t) + {c}"),
            ) {
                Ok(RegisterOutcome::New(n)) => {
                    let e = pool.get(&n).unwrap();
                    println!(
                        "  [root {target_order}|{h}] {n} = ({base_name}({h}t)+{c})^(1/{h}): order {}, a1..a4 = {:?}, map {:?}",
                        e.order,
                        prefix_of(&e.series),
                        e.replicates
                    );
                }
                Ok(RegisterOutcome::Existing(_)) => {}
                Err(crate::pool::PoolError::NotReplicable { .. }) => {}
                Err(e) => println!("  [root {target_order}|{h}] {base_name}+{c}: {e}"),
            }
        }
    }
}

/// Stage 2: roots for every order the catalog chains through.
pub fn stage_roots(pool: &mut Pool) {
    println!("== stage: root constructions ==");
    // (target order, h, full window)
    let plan: &[(u32, u32, i64)] = &[
        (2, 2, 400),
        (3, 3, 400),
        (4, 2, 400),
        (4, 4, 400),
        (6, 2, 300),
        (6, 3, 300),
        (6, 6, 300),
        (8, 2, 300),
        (8, 4, 300),
        (8, 8, 300),
        (9, 3, 300),
        (9, 9, 300),
        (10, 2, 300),
        (12, 2, 200),
        (12, 3, 200),
        (12, 4, 200),
        (12, 6, 200),
        (14, 2, 300),
        (15, 3, 400),
        (16, 2, 200),
        (16, 4, 200),
        (16, 8, 200),
        (18, 2, 200),
        (18, 3, 200),
        (20, 2, 200),
        (20, 4, 200),
        (21, 3, 300),
        (24, 2, 150),
        (24, 3, 150),
        (24, 4, 150),
        (25, 5, 300),
        (27, 3, 200),
        (32, 2, 150),
        (36, 2, 150),
        (36, 3, 150),
        (36, 4, 150),
        (40, 2, 150),
        (42, 2, 300),
        (44, 2, 700),
        (45, 3, 300),
        (49, 7, 400),
        (63, 3, 420),
        (72, 2, 150),
        (72, 4, 150),
        (117, 3, 1400),
        (126, 2, 420),
    ];
    for &(target, h, full) in plan {
        root_search(pool, target, h, -3000, 3000, full);
    }
}

/// Stage 3: the two covers that are not eta or root shaped.
pub fn stage_specials(pool: &mut Pool) {
    println!("== stage: covers ==");
    // Degree-5 cover of J: j(5t) = P(s) with P = x^3 (x^2 + 5x + 40) after
    // centering the triple ramification point at the origin; the series
    // solution of the cover is the order-5 function with J as its 5th
    // replicate.
    let j5 = j_normalized(520)
        .add_constant(&BigInt::from(744))
        .unwrap()
        .rescale_exponents(num_rational::Ratio::from_integer(5))
        .unwrap();
    // P(x) = x^5 + 5 x^4 + 40 x^3: lower coefficients for x^0 .. x^4
    let lower: Vec<BigInt> = [0, 0, 0, 40, 5].iter().map(|&v| BigInt::from(v)).collect();
    match solve_polynomial_cover(&j5, &lower) {
        Some(t) => {
            if let Some(f) = normalize_candidate(&t) {
                let out = pool.register(
                    "quintic5",
                    &f,
                    Some(25),
                    FlagSource::NotApplicable,
                    Construction::PolynomialCover {
                        base: "1A".into(),
                        rescale: 5,
                        lower: lower.clone(),
                    },
                    "series solution of j(5t) = s^3 (s^2 + 5s + 40)",
                );
                println!("  [quintic] {out:?}");
                if let Ok(RegisterOutcome::New(n)) = out {
                    let e = pool.get(&n).unwrap();
                    println!(
                        "  [quintic] order {}, first coeffs {:?}, map {:?}",
                        e.order,
                        prefix_of(&e.series),
                        e.replicates
                    );
                }
            } else {
                println!("  [quintic] solution not normalizable");
            }
        }
        None => println!("  [quintic] no integral series solution"),
    }
}

/// Completion pass: an entry whose order is divisible by a prime missing
/// from its replicate map gets its series extended through the identities
/// and the replicate extracted late.
pub fn complete_maps(pool: &mut Pool) {
    println!("== stage: map completion ==");
    loop {
        let mut todo = None;
        for e in &pool.entries {
            for &p in crate::pool::SMALL_PRIMES.iter() {
                if e.order % p == 0 && !e.replicates.contains_key(&p) {
                    todo = Some((e.name.clone(), p));
                    break;
                }
            }
            if todo.is_some() {
                break;
            }
        }
        let Some((name, p)) = todo else { break };
        println!("  completing {name} at prime {p}");
        let needed = (p as i64 * p as i64) * 5;
        let widened = pool.widen(&name, needed);
        match widened {
            Ok(()) => {
                let series = pool.get(&name).unwrap().series.clone();
                match crate::kit::extract_prime_replicate(&series, p) {
                    Some(rep) => {
                        let target = match pool.find_match(&rep, rep.order().min(6)) {
                            Ok(Some(t)) => t,
                            Ok(None) => {
                                let child = format!("{name}^({p})");
                                match pool.register(
                                    &child,
                                    &rep,
                                    None,
                                    FlagSource::ByElimination,
                                    Construction::Extracted {
                                        parent: name.clone(),
                                        p,
                                    },
                                    &format!("extracted as the {p}-th replicate of {name}"),
                                ) {
                                    Ok(RegisterOutcome::New(n))
                                    | Ok(RegisterOutcome::Existing(n)) => n,
                                    Err(e) => {
                                        println!("    cannot register {child}: {e}");
                                        break;
                                    }
                                }
                            }
                            Err(e) => {
                                println!("    ambiguous: {e}");
                                break;
                            }
                        };
                        pool.set_replicate(&name, p, &target);
                        println!("    {name}^({p}) = {target}");
                    }
                    None => {
                        println!("    window still too small for {name} at {p}");
                        break;
                    }
                }
            }
            Err(e) => {
                println!("    cannot widen {name}: {e}");
                break;
            }
        }
    }
}

pub fn report(pool: &Pool) {
    println!("== pool report: {} entries ==", pool.entries.len());
    let mut entries: Vec<_> = pool.entries.iter().collect();
    entries.sort_by_key(|e| (e.order, e.name.clone()));
    for e in entries {
        println!(
            "{:>10}  order {:>3}  fricke {:?}  window {}  map {:?}  [{}]",
            e.name,
            e.order,
            pool.fricke_flag(&e.name),
            e.series.order(),
            e.replicates,
            e.provenance
        );
    }
}
