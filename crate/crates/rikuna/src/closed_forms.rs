//! Closed forms for the cubic family: the polynomial discriminant, the index
//! valuations at 3 and at primes dividing t² + t + 1, the constants V and E,
//! and the field discriminant — every formula cross-checked elsewhere
//! against the Newton-polygon machinery and the exact resultant oracle.
//!
//! The field-discriminant report carries two values per prime: the canonical
//! one derived from ν_p(disc r_n) − 2·ind_p, and the printed headline
//! expression, with a discrepancy flag whenever they differ. The printed
//! 3-exponent is known to disagree (it omits the contribution of the
//! (ζ − ζ⁻¹) factor of the discriminant), so the canonical pipeline is the
//! load-bearing one; the printed value is reported, not silently corrected.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::arith::{self, binomial, e_table, val_p_unchecked, FactoredInt, Valuation};
use crate::error::{Error, Result};
use crate::iterates::rikuna_z3;
use crate::zpoly::{discriminant_monic, ZPoly};

/// A Taylor coefficient a_{n,m} of r_n(x, t) at x = 1, with its 3-adic
/// valuation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Coeff3 {
    pub n: u32,
    pub m: u64,
    pub t: BigInt,
    pub value: BigInt,
    pub val3: Valuation,
}

/// Which congruence class of t the 3-adic index formula used.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ind3Branch {
    /// t ≡ 1 (mod 3)
    OneMod3,
    Other,
}

/// ind_3 r_n(x, t) together with the constants V and E = 4·ind_3.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Index3Result {
    pub n: u32,
    pub t: BigInt,
    pub branch: Ind3Branch,
    pub v_const: u64,
    pub e_const: BigInt,
    pub ind3: BigInt,
}

/// Per-prime comparison of the canonical field-discriminant valuation with
/// the printed headline expression.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiscRow {
    pub p: BigInt,
    pub nu_disc_rn: BigInt,
    pub ind_p: BigInt,
    /// ν_p(disc K_n) = ν_p(disc r_n) − 2·ind_p
    pub nu_disc_kn: BigInt,
    /// the printed expression's exponent (can be negative, hence signed)
    pub printed: BigInt,
    pub discrepancy: bool,
}

/// Field-discriminant report for one (n, t).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiscReport {
    pub n: u32,
    pub t: BigInt,
    pub sign: i8,
    pub disc_rn: FactoredInt,
    pub rows: Vec<DiscRow>,
    pub warnings: Vec<String>,
}

fn pow3(n: u32) -> BigInt {
    BigInt::from(3).pow(n)
}

/// Exact a_{n,m}: the m-th Taylor coefficient of r_n at x = 1, with the
/// product form ±C(3^n, m)·3^{⌊(3^n−m)/2⌋}·e_m(t) asserted against it in
/// magnitude (its global sign is not pinned down and is not used).
pub fn coeff_a(n: u32, m: u64, t: &BigInt) -> Result<Coeff3> {
    if n == 0 {
        return Err(Error::parameter("coeff_a: n must be ≥ 1"));
    }
    let deg = pow3(n)
        .to_u64()
        .ok_or_else(|| Error::parameter("coeff_a: 3^n too large"))?;
    if m > deg {
        return Err(Error::parameter(format!("coeff_a: m = {m} out of range [0, {deg}]")));
    }
    let taylor = rikuna_z3(n, t).taylor_at(&BigInt::one());
    let value = taylor[m as usize].clone();
    let product_form = binomial(deg, m)
        * pow3(u32::try_from((deg - m) / 2).expect("exponent fits"))
        * e_table(m, t);
    if value.abs() != product_form.abs() {
        return Err(Error::InternalCheck(format!(
            "coeff_a: Taylor value {value} does not match product form ±{product_form} at n={n}, m={m}, t={t}"
        )));
    }
    Ok(Coeff3 {
        n,
        m,
        t: t.clone(),
        val3: val_p_unchecked(&value, &BigInt::from(3)),
        value,
    })
}

/// ind_3 r_n(x, t) by the two-branch closed form. On the t ≡ 1 (mod 3)
/// branch, V = min{ν_3(a_{n,0}) − (3^n+1)/2, n} and
/// ind_3 = ((3^n−1)² + 2V + 2·Σ_{k<V} 3^{n−k})/4; otherwise
/// ind_3 = (3^n−1)(3^n−3)/4. E = 4·ind_3 is always divisible by 4.
pub fn ind3_closed(n: u32, t: &BigInt) -> Result<Index3Result> {
    if n == 0 {
        return Err(Error::parameter("ind3_closed: n must be ≥ 1"));
    }
    let three = BigInt::from(3);
    let p3 = pow3(n);
    let (branch, v_const, e_const) = if t.mod_floor(&three).is_one() {
        // ν_3(a_{n,0}) is finite: a_{n,0} = ±3^{(3^n−1)/2}(2t+1) and 2t+1 ≠ 0
        let a0 = rikuna_z3(n, t).eval(&BigInt::one());
        let nu = BigInt::from(val_p_unchecked(&a0, &three).expect_finite());
        let base = (&p3 + 1) / 2;
        let v: BigInt = (&nu - base).min(BigInt::from(n));
        debug_assert!(!v.is_negative());
        let v = v.to_u64().expect("V ≤ n");
        let mut e = (&p3 - 1) * (&p3 - 1) + BigInt::from(2 * v);
        for k in 0..v {
            e += 2 * pow3(n - u32::try_from(k).expect("k < n"));
        }
        (Ind3Branch::OneMod3, v, e)
    } else {
        (Ind3Branch::Other, 0, (&p3 - 1) * (&p3 - 3))
    };
    debug_assert!((&e_const % 4).is_zero(), "E ≡ 0 (mod 4)");
    debug_assert!(v_const as u64 <= n as u64, "V ≤ n");
    let ind3 = &e_const / 4;
    Ok(Index3Result {
        n,
        t: t.clone(),
        branch,
        v_const,
        e_const,
        ind3,
    })
}

/// ind_p r_n(x, t) for p | t² + t + 1, p ≠ 3:
/// ((3^n−1)(v−1) + gcd(3^n, v) − 1)/2 with v = ν_p(t² + t + 1).
pub fn indp_closed(n: u32, t: &BigInt, p: &BigInt) -> Result<BigInt> {
    if n == 0 {
        return Err(Error::parameter("indp_closed: n must be ≥ 1"));
    }
    if !arith::is_prime(p) {
        return Err(Error::parameter(format!("indp_closed: {p} is not prime")));
    }
    if *p == BigInt::from(3) {
        return Err(Error::precondition("indp_closed: use ind3_closed for p = 3"));
    }
    let tt1 = t * t + t + 1;
    let v = match val_p_unchecked(&tt1, p) {
        Valuation::Finite(0) => {
            return Err(Error::precondition(format!(
                "indp_closed: {p} does not divide t² + t + 1 = {tt1}"
            )))
        }
        Valuation::Finite(v) => v,
        Valuation::Infinite => unreachable!("t² + t + 1 > 0 for integer t"),
    };
    let p3 = pow3(n);
    // gcd(3^n, v) = 3^{min(ν_3(v), n)}
    let nu3v = val_p_unchecked(&BigInt::from(v), &BigInt::from(3)).expect_finite();
    let g = pow3((nu3v as u32).min(n));
    Ok(((&p3 - 1) * BigInt::from(v - 1) + g - 1) / 2)
}

/// Exact discriminant of a monic integer polynomial via the resultant; the
/// independent oracle for the closed form.
pub fn disc_resultant_oracle(f: &ZPoly) -> Result<BigInt> {
    discriminant_monic(f)
}

/// |disc r_n(x, t)| = 3^{n·3^n + (3^n−2)(3^n−1)/2} · (t² + t + 1)^{3^n − 1}
/// in factored form, with the sign taken from the resultant oracle (the
/// closed form only determines the magnitude). An unsplittable part of
/// t² + t + 1 is carried as a flagged cofactor.
pub fn disc_rn_closed(n: u32, t: &BigInt) -> Result<(i8, FactoredInt)> {
    if n == 0 {
        return Err(Error::parameter("disc_rn_closed: n must be ≥ 1"));
    }
    let deg = pow3(n)
        .to_u64()
        .ok_or_else(|| Error::parameter("disc_rn_closed: 3^n too large"))?;
    let three_exp = (n as u64) * deg + (deg - 2) * (deg - 1) / 2;
    let mut out = FactoredInt::one();
    out.push_prime(BigInt::from(3), three_exp);
    let tt1 = t * t + t + 1;
    let fac = arith::factor(&tt1).pow(deg - 1);
    let mut out = out.mul(&fac);
    let oracle = disc_resultant_oracle(&rikuna_z3(n, t))?;
    let sign = if oracle.is_negative() { -1 } else { 1 };
    out.sign = sign;
    Ok((sign, out))
}

/// The printed 3-adic field-discriminant exponent n·3^n − E/2 (signed: the
/// expression goes negative once the index term dominates).
fn printed_three_exponent(n: u32, e_const: &BigInt) -> BigInt {
    BigInt::from(n as u64) * pow3(n) - e_const / 2
}

/// Canonical and printed field-discriminant valuations for p = 3 and every
/// prime dividing t² + t + 1, with discrepancy flags. The canonical value is
/// ν_p(disc r_n) − 2·ind_p throughout; the printed expression is evaluated
/// alongside for comparison only.
pub fn field_disc(n: u32, t: &BigInt) -> Result<DiscReport> {
    if n == 0 {
        return Err(Error::parameter("field_disc: n must be ≥ 1"));
    }
    let three = BigInt::from(3);
    let p3 = pow3(n);
    let (sign, disc_rn) = disc_rn_closed(n, t)?;
    let mut warnings = Vec::new();
    if !disc_rn.is_fully_factored() {
        warnings.push(format!(
            "t² + t + 1 has an unfactored cofactor; the report covers known primes only: {disc_rn}"
        ));
    }

    let ind3 = ind3_closed(n, t)?;
    let mut rows = Vec::new();
    let nu3_rn = BigInt::from(disc_rn.exponent_of(&three));
    let canonical3 = &nu3_rn - 2 * &ind3.ind3;
    let printed3 = printed_three_exponent(n, &ind3.e_const);
    let disc3 = canonical3 != printed3;
    if disc3 {
        warnings.push(format!(
            "printed field-disc exponent at 3 is {printed3}, canonical pipeline gives {canonical3}"
        ));
    }
    rows.push(DiscRow {
        p: three.clone(),
        nu_disc_rn: nu3_rn,
        ind_p: ind3.ind3.clone(),
        nu_disc_kn: canonical3,
        printed: printed3,
        discrepancy: disc3,
    });

    for (p, _) in disc_rn.factors.iter().filter(|(p, _)| **p != three) {
        let ind_p = indp_closed(n, t, p)?;
        let nu_rn = BigInt::from(disc_rn.exponent_of(p));
        let canonical = &nu_rn - 2 * &ind_p;
        // printed: 3^n − gcd(3^n, v_p)
        let tt1 = t * t + t + 1;
        let v = val_p_unchecked(&tt1, p).expect_finite();
        let nu3v = val_p_unchecked(&BigInt::from(v), &three).expect_finite();
        let printed = &p3 - pow3((nu3v as u32).min(n));
        let discrepancy = canonical != printed;
        if discrepancy {
            warnings.push(format!(
                "printed field-disc exponent at {p} is {printed}, canonical pipeline gives {canonical}"
            ));
        }
        rows.push(DiscRow {
            p: p.clone(),
            nu_disc_rn: nu_rn,
            ind_p,
            nu_disc_kn: canonical,
            printed,
            discrepancy,
        });
    }

    Ok(DiscReport {
        n,
        t: t.clone(),
        sign,
        disc_rn,
        rows,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::montes::index_p;

    fn big(x: i64) -> BigInt {
        BigInt::from(x)
    }

    #[test]
    fn coeff_examples() {
        let c = coeff_a(1, 0, &big(1)).unwrap();
        assert_eq!(c.value, big(-9));
        assert_eq!(c.val3, Valuation::Finite(2));

        let c = coeff_a(2, 9, &big(5)).unwrap();
        assert_eq!(c.value, big(1)); // monic top coefficient
        assert_eq!(c.val3, Valuation::Finite(0));

        let c = coeff_a(1, 0, &big(0)).unwrap();
        assert_eq!(c.value, big(-3));
        assert_eq!(c.val3, Valuation::Finite(1));

        assert!(coeff_a(1, 4, &big(0)).is_err());
    }

    #[test]
    fn coeff_product_form_holds_across_grid() {
        for n in 1..=3u32 {
            let deg = 3u64.pow(n);
            for t in -6..=6i64 {
                for m in 0..=deg {
                    coeff_a(n, m, &big(t)).unwrap();
                }
            }
        }
    }

    #[test]
    fn valuation_laws_for_t_one_mod_3() {
        // odd m: ν_3(a_{n,m}) = n − ν_3(m) + (3^n − m)/2 exactly;
        // even m > 0: a vanishes or ν_3 ≥ ⌊…⌋ + 1
        for n in 1..=3u32 {
            let deg = 3u64.pow(n);
            for t in [-8i64, -5, -2, 1, 4, 7, 10] {
                for m in 1..deg {
                    let c = coeff_a(n, m, &big(t)).unwrap();
                    let nu3m = val_p_unchecked(&big(m as i64), &big(3)).expect_finite();
                    let base = n as i64 - nu3m as i64 + ((deg - m) / 2) as i64;
                    if m % 2 == 1 {
                        assert_eq!(c.val3, Valuation::Finite(base as u64), "n={n} m={m} t={t}");
                    } else {
                        match c.val3 {
                            Valuation::Infinite => {} // e_m(t) = 0
                            Valuation::Finite(v) => {
                                assert!(v as i64 >= base + 1, "n={n} m={m} t={t} v={v}")
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn ind3_examples() {
        let r = ind3_closed(1, &big(0)).unwrap();
        assert_eq!(r.ind3, big(0));
        assert_eq!(r.branch, Ind3Branch::Other);

        let r = ind3_closed(1, &big(1)).unwrap();
        assert_eq!(r.v_const, 0);
        assert_eq!(r.e_const, big(4));
        assert_eq!(r.ind3, big(1));

        let r = ind3_closed(2, &big(0)).unwrap();
        assert_eq!(r.ind3, big(12));

        let r = ind3_closed(2, &big(1)).unwrap();
        assert_eq!(r.ind3, big(16));
    }

    #[test]
    fn ind3_matches_polygon_on_small_grid() {
        for n in 1..=2u32 {
            for t in -12..=12i64 {
                let closed = ind3_closed(n, &big(t)).unwrap();
                let report = index_p(&rikuna_z3(n, &big(t)), 3).unwrap();
                assert!(report.exact, "n={n} t={t}");
                assert_eq!(closed.ind3, BigInt::from(report.total), "n={n} t={t}");
            }
        }
    }

    #[test]
    fn indp_examples_and_polygon_agreement() {
        assert_eq!(indp_closed(1, &big(2), &big(7)).unwrap(), big(0));
        // t = 18: t² + t + 1 = 343 = 7³
        assert_eq!(indp_closed(2, &big(18), &big(7)).unwrap(), big(9));
        assert_eq!(indp_closed(1, &big(18), &big(7)).unwrap(), big(3));
        assert!(indp_closed(1, &big(0), &big(7)).is_err()); // 7 ∤ 1
        assert!(indp_closed(1, &big(1), &big(3)).is_err()); // p = 3 excluded

        for (n, t, p) in [(1u32, 2i64, 7u64), (2, 18, 7), (1, 18, 7), (2, 2, 7), (1, 3, 13)] {
            let closed = indp_closed(n, &big(t), &big(p as i64)).unwrap();
            let report = index_p(&rikuna_z3(n, &big(t)), p).unwrap();
            assert!(report.exact, "n={n} t={t} p={p}");
            assert_eq!(closed, BigInt::from(report.total), "n={n} t={t} p={p}");
        }
    }

    #[test]
    fn hensel_style_high_valuation_parameter() {
        // v = ν_7(t²+t+1) = 3 already at t = 18; one Hensel step mod 7⁴
        // lands on t = 18 + 3·343 = 1047 with 1047² + 1047 + 1 = 7⁴·457
        let t = big(1047);
        let tt1 = &t * &t + &t + 1;
        let v = val_p_unchecked(&tt1, &big(7)).expect_finite();
        assert_eq!(v, 4);
        let closed = indp_closed(1, &t, &big(7)).unwrap();
        // ((3−1)(4−1) + gcd(3,4) − 1)/2 = (6 + 1 − 1)/2 = 3
        assert_eq!(closed, big(3));
        let report = index_p(&rikuna_z3(1, &t), 7).unwrap();
        assert!(report.exact);
        assert_eq!(closed, BigInt::from(report.total));
    }

    #[test]
    fn disc_closed_form_examples() {
        let (sign, f) = disc_rn_closed(1, &big(0)).unwrap();
        assert_eq!(sign, 1);
        assert_eq!(f.value(), big(81));

        let (_, f) = disc_rn_closed(1, &big(1)).unwrap();
        assert_eq!(f.value(), big(729));

        let (_, f) = disc_rn_closed(1, &big(2)).unwrap();
        assert_eq!(f.value(), big(81 * 49));
        assert_eq!(f.exponent_of(&big(7)), 2);

        // r_2(x, 0): 3^{2·9 + 7·8/2} = 3^46
        let (_, f) = disc_rn_closed(2, &big(0)).unwrap();
        assert_eq!(f.exponent_of(&big(3)), 46);
        assert_eq!(f.value(), BigInt::from(3).pow(46));
    }

    #[test]
    fn disc_oracle_equality_small_grid() {
        for n in 1..=2u32 {
            for t in -6..=6i64 {
                let (_, f) = disc_rn_closed(n, &big(t)).unwrap();
                let oracle = disc_resultant_oracle(&rikuna_z3(n, &big(t))).unwrap();
                assert_eq!(f.value(), oracle, "n={n} t={t}");
            }
        }
    }

    #[test]
    fn field_disc_flags_printed_discrepancy() {
        // (1, 0): canonical ν_3(disc K_1) = 4, printed exponent 3
        let rep = field_disc(1, &big(0)).unwrap();
        let row3 = &rep.rows[0];
        assert_eq!(row3.nu_disc_kn, big(4));
        assert_eq!(row3.printed, big(3));
        assert!(row3.discrepancy);
        assert!(!rep.warnings.is_empty());

        // (1, 1): canonical ν_3 = 6 − 2 = 4
        let rep = field_disc(1, &big(1)).unwrap();
        assert_eq!(rep.rows[0].nu_disc_kn, big(4));

        // (1, 2): the 7-row matches the printed form
        let rep = field_disc(1, &big(2)).unwrap();
        let row7 = rep.rows.iter().find(|r| r.p == big(7)).unwrap();
        assert_eq!(row7.nu_disc_kn, big(2));
        assert_eq!(row7.printed, big(2));
        assert!(!row7.discrepancy);

        // (2, 1): the cyclotomic tower level; canonical ν_3 = 22 while the
        // printed exponent has gone negative (18 − 32)
        let rep = field_disc(2, &big(1)).unwrap();
        assert_eq!(rep.rows[0].nu_disc_kn, big(22));
        assert_eq!(rep.rows[0].printed, big(-14));
    }

    #[test]
    fn polygon_shape_for_t_one_mod_3() {
        // the (x−1)-polygon is the hull of (0, ν_3(a_{n,0})) and the points
        // (3^k, n − k + (3^n − 3^k)/2)
        use crate::montes::{newton_polygon, phi_development};
        for n in 1..=3u32 {
            for t in [1i64, 4, 10, -2, -8, 13, 22] {
                let f = rikuna_z3(n, &big(t));
                let dev = phi_development(&f, &ZPoly::from_i64s(&[-1, 1]), 3).unwrap();
                let poly = newton_polygon(&dev).unwrap();

                let deg = 3i64.pow(n);
                let a0 = coeff_a(n, 0, &big(t)).unwrap();
                let mut pts = vec![(0i64, a0.val3.expect_finite() as i64)];
                for k in 0..=n {
                    let pk = 3i64.pow(k);
                    pts.push((pk, (n - k) as i64 + (deg - pk) / 2));
                }
                // lower hull of the predicted points, negative part
                let mut hull: Vec<(i64, i64)> = Vec::new();
                for &pt in &pts {
                    while hull.len() >= 2 {
                        let a = hull[hull.len() - 2];
                        let b = hull[hull.len() - 1];
                        let cross = (b.0 - a.0) * (pt.1 - a.1) - (b.1 - a.1) * (pt.0 - a.0);
                        if cross <= 0 {
                            hull.pop();
                        } else {
                            break;
                        }
                    }
                    hull.push(pt);
                }
                let mut expect = vec![hull[0]];
                for w in hull.windows(2) {
                    if w[1].1 < w[0].1 {
                        expect.push(w[1]);
                    } else {
                        break;
                    }
                }
                assert_eq!(poly.vertices, expect, "n={n} t={t}");
            }
        }
    }
}
