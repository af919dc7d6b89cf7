//! Construction of the iterated polynomial pair (P_n, Q_n) and of
//! r_n(x, t) = P_n − t·Q_n, over the integers for ℓ = 3 and over any finite
//! field containing the trace ζ + ζ⁻¹ for odd ℓ, plus evaluation of the
//! rational map φ = P/Q on PF_q.
//!
//! The ℓ = 3 integer construction sums the explicit coefficient formula
//! C(3^n, k)·(t·u_{k+2} − u_k), with the homogeneous composition
//! P_n = P_h(P_{n−1}, Q_{n−1}), Q_n = Q_h(P_{n−1}, Q_{n−1}) kept as the
//! independent oracle. Field constructions run two routes and assert they
//! agree before returning.

use num_bigint::BigInt;

use crate::arith::{binomial, u_seq};
use crate::error::{Error, Result};
use crate::finite_field::{element_order, FieldCtx, FqElem, FqPoly, PFElem};
use crate::zpoly::ZPoly;

/// r_n(x, t; 3) over Z. Level 0 is the seed x − t.
pub fn rikuna_z3(n: u32, t: &BigInt) -> ZPoly {
    if n == 0 {
        return ZPoly::x_minus(t);
    }
    let deg = 3u64.pow(n);
    let mut coeffs = Vec::with_capacity(deg as usize + 1);
    for k in 0..=deg {
        let weight = t * u_seq(k + 2) - u_seq(k);
        coeffs.push(binomial(deg, k) * weight);
    }
    ZPoly::from_coeffs(coeffs)
}

/// The level-1 integer pair for ℓ = 3 (trace ζ + ζ⁻¹ = −1):
/// P = x³ − 3x − 1, Q = 3x² + 3x.
pub fn pq_z3_level1() -> (ZPoly, ZPoly) {
    (ZPoly::from_i64s(&[-1, -3, 0, 1]), ZPoly::from_i64s(&[0, 3, 3]))
}

/// (P_n, Q_n) over Z for ℓ = 3 by iterated homogeneous composition.
pub fn pq_z3_level(n: u32) -> (ZPoly, ZPoly) {
    let mut cur = (ZPoly::x(), ZPoly::one());
    let (p1, q1) = pq_z3_level1();
    for _ in 0..n {
        cur = compose_homogeneous_z(&p1, &q1, &cur.0, &cur.1);
    }
    cur
}

/// Composition oracle for [`rikuna_z3`]: P_n − t·Q_n built without the
/// coefficient formula.
pub fn rikuna_z3_via_composition(n: u32, t: &BigInt) -> ZPoly {
    let (p, q) = pq_z3_level(n);
    &p - &q.scale(t)
}

/// P_h(A, B), Q_h(A, B) where P_h, Q_h are the degree-ℓ homogenizations of
/// the level-1 pair.
fn compose_homogeneous_z(p1: &ZPoly, q1: &ZPoly, a: &ZPoly, b: &ZPoly) -> (ZPoly, ZPoly) {
    let ell = p1.degree().expect("level-1 numerator is nonzero");
    let mut a_pow = vec![ZPoly::one()];
    let mut b_pow = vec![ZPoly::one()];
    for i in 1..=ell {
        a_pow.push(&a_pow[i - 1] * a);
        b_pow.push(&b_pow[i - 1] * b);
    }
    let mut pn = ZPoly::zero();
    let mut qn = ZPoly::zero();
    for i in 0..=ell {
        let cross = &a_pow[i] * &b_pow[ell - i];
        pn = &pn + &cross.scale(&p1.coeff(i));
        qn = &qn + &cross.scale(&q1.coeff(i));
    }
    (pn, qn)
}

/// The iterate pair over a finite field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PQPair {
    pub p: FqPoly,
    pub q: FqPoly,
    pub level: u32,
    pub ell: u64,
}

impl PQPair {
    /// r_n(x, t) = P_n − t·Q_n for a residue parameter.
    pub fn rikuna(&self, ctx: &FieldCtx, t_res: FqElem) -> FqPoly {
        self.p.sub(ctx, &self.q.scale(ctx, t_res))
    }
}

/// (P_n, Q_n) over a field with a designated ζ of order exactly ℓ, computed
/// from the closed-form quotient and re-derived by homogeneous composition;
/// the two must agree coefficientwise.
pub fn pq_pair(ctx: &FieldCtx, ell: u64, n: u32, zeta: FqElem) -> Result<PQPair> {
    if ell < 3 || ell % 2 == 0 {
        return Err(Error::parameter(format!("pq_pair: ℓ = {ell} must be an odd prime")));
    }
    if zeta.0 == 0 || element_order(ctx, zeta)? != ell {
        return Err(Error::precondition(format!(
            "pq_pair: ζ = {} does not have order {ell}",
            ctx.fmt_elem(zeta)
        )));
    }
    let zinv = ctx.inv(zeta)?;
    let closed = pq_closed_form(ctx, ell, n, zeta, zinv)?;
    let zplus = ctx.add(zeta, zinv);
    let composed = pq_from_zplus_unchecked(ctx, ell, n, zplus)?;
    if closed != composed {
        return Err(Error::InternalCheck(format!(
            "pq_pair: closed form and composition disagree at ℓ = {ell}, n = {n}"
        )));
    }
    Ok(closed)
}

fn pq_closed_form(ctx: &FieldCtx, ell: u64, n: u32, zeta: FqElem, zinv: FqElem) -> Result<PQPair> {
    let deg = (ell as usize).checked_pow(n).and_then(|d| {
        if d <= 1 << 20 {
            Some(d)
        } else {
            None
        }
    });
    let deg = deg.ok_or_else(|| Error::parameter("pq_pair: degree ℓ^n too large"))?;
    let lin_z = FqPoly::from_elems(vec![ctx.neg(zeta), ctx.one()]);
    let lin_zi = FqPoly::from_elems(vec![ctx.neg(zinv), ctx.one()]);
    let az = poly_pow(ctx, &lin_z, deg as u64);
    let azi = poly_pow(ctx, &lin_zi, deg as u64);
    let denom_inv = ctx.inv(ctx.sub(zinv, zeta))?;
    let p = az
        .scale(ctx, zinv)
        .sub(ctx, &azi.scale(ctx, zeta))
        .scale(ctx, denom_inv);
    let q = az.sub(ctx, &azi).scale(ctx, denom_inv);
    Ok(PQPair {
        p,
        q,
        level: n,
        ell,
    })
}

fn poly_pow(ctx: &FieldCtx, base: &FqPoly, mut e: u64) -> FqPoly {
    let mut acc = FqPoly::one();
    let mut b = base.clone();
    while e > 0 {
        if e & 1 == 1 {
            acc = acc.mul(ctx, &b);
        }
        e >>= 1;
        if e > 0 {
            b = b.mul(ctx, &b);
        }
    }
    acc
}

/// (P_n, Q_n) over a field from the trace datum ζ⁺ alone, usable when ζ
/// itself is not rational. Builds the level-1 pair from the Chebyshev-value
/// coefficients and iterates the homogeneous composition, then re-derives
/// level n from the direct binomial sum; the two must agree.
///
/// Precondition (not checked here): the roots of x² − ζ⁺x + 1 have
/// multiplicative order exactly ℓ in the splitting field.
pub fn pq_pair_from_zplus(ctx: &FieldCtx, ell: u64, n: u32, zplus: FqElem) -> Result<PQPair> {
    let composed = pq_from_zplus_unchecked(ctx, ell, n, zplus)?;
    let direct = pq_chebyshev_direct(ctx, ell, n, zplus)?;
    if composed != direct {
        return Err(Error::InternalCheck(format!(
            "pq_pair_from_zplus: composition and direct sum disagree at ℓ = {ell}, n = {n}"
        )));
    }
    Ok(composed)
}

fn pq_from_zplus_unchecked(ctx: &FieldCtx, ell: u64, n: u32, zplus: FqElem) -> Result<PQPair> {
    let (p1, q1) = pq_level1_chebyshev(ctx, ell, zplus)?;
    let mut p = FqPoly::x();
    let mut q = FqPoly::one();
    for _ in 0..n {
        let (np, nq) = compose_homogeneous_fq(ctx, &p1, &q1, &p, &q);
        p = np;
        q = nq;
    }
    Ok(PQPair {
        p,
        q,
        level: n,
        ell,
    })
}

/// Direct level-n expansion: coefficients (−1)^{k+1} C(ℓ^n, k) U_{k−2}(ζ⁺)
/// for P and (−1)^{k+1} C(ℓ^n, k) U_{k−1}(ζ⁺) for Q, where U follows the
/// normalization U_0 = 1, U_1 = x, U_{j+1} = x·U_j − U_{j−1}.
fn pq_chebyshev_direct(ctx: &FieldCtx, ell: u64, n: u32, zplus: FqElem) -> Result<PQPair> {
    let deg = (ell as u64)
        .checked_pow(n)
        .ok_or_else(|| Error::parameter("degree ℓ^n overflows"))?;
    let d = deg as usize;
    // U_j(ζ⁺) for j ≤ ℓ^n − 1
    let mut u = Vec::with_capacity(d + 1);
    u.push(ctx.one());
    if d >= 1 {
        u.push(zplus);
    }
    for j in 2..=d {
        let v = ctx.sub(ctx.mul(zplus, u[j - 1]), u[j - 2]);
        u.push(v);
    }
    let mut pc = vec![ctx.zero(); d + 1];
    let mut qc = vec![ctx.zero(); d + 1];
    pc[d] = ctx.one();
    qc[d - 1] = ctx.from_int(&BigInt::from(deg));
    for k in 2..=deg {
        let c = ctx.from_int(&binomial(deg, k));
        let c = if k % 2 == 0 { ctx.neg(c) } else { c };
        let idx = (deg - k) as usize;
        pc[idx] = ctx.mul(c, u[(k - 2) as usize]);
        qc[idx] = ctx.mul(c, u[(k - 1) as usize]);
    }
    Ok(PQPair {
        p: FqPoly::from_elems(pc),
        q: FqPoly::from_elems(qc),
        level: n,
        ell,
    })
}

fn pq_level1_chebyshev(ctx: &FieldCtx, ell: u64, zplus: FqElem) -> Result<(FqPoly, FqPoly)> {
    let pair = pq_chebyshev_direct(ctx, ell, 1, zplus)?;
    Ok((pair.p, pair.q))
}

fn compose_homogeneous_fq(
    ctx: &FieldCtx,
    p1: &FqPoly,
    q1: &FqPoly,
    a: &FqPoly,
    b: &FqPoly,
) -> (FqPoly, FqPoly) {
    let ell = p1.degree().expect("level-1 numerator is nonzero");
    let mut a_pow = vec![FqPoly::one()];
    let mut b_pow = vec![FqPoly::one()];
    for i in 1..=ell {
        a_pow.push(a_pow[i - 1].mul(ctx, a));
        b_pow.push(b_pow[i - 1].mul(ctx, b));
    }
    let mut pn = FqPoly::zero();
    let mut qn = FqPoly::zero();
    for i in 0..=ell {
        let cross = a_pow[i].mul(ctx, &b_pow[ell - i]);
        pn = pn.add(ctx, &cross.scale(ctx, p1.coeff(i)));
        qn = qn.add(ctx, &cross.scale(ctx, q1.coeff(i)));
    }
    (pn, qn)
}

/// φ(a) = P(a)/Q(a) as a total map on PF_q: poles go to ∞ and ∞ maps to ∞
/// (deg P = deg Q + 1).
pub fn phi_eval(ctx: &FieldCtx, level1: &PQPair, a: PFElem) -> PFElem {
    match a {
        PFElem::Infinity => PFElem::Infinity,
        PFElem::Finite(x) => {
            let num = level1.p.eval(ctx, x);
            let den = level1.q.eval(ctx, x);
            if den.0 == 0 {
                debug_assert_ne!(num.0, 0, "P and Q share no roots");
                PFElem::Infinity
            } else {
                PFElem::Finite(ctx.div(num, den).expect("den is nonzero"))
            }
        }
    }
}

/// Outcome of checking one of the two factorization lemmas for r_n against
/// an exact expansion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReductionReport {
    pub applicable: bool,
    /// None when inapplicable
    pub holds: Option<bool>,
    pub detail: String,
}

/// Which congruence to verify.
pub enum ReductionCase<'a> {
    /// r_n(x, t; 3) ≡ (x − 1)^{3^n} (mod 3)
    ModThree { n: u32, t: &'a BigInt },
    /// r_n(x, t; ℓ) ≡ (x − t)^{ℓ^n} over F_q when t ≡ ζ^{±1}
    ModZeta {
        ctx: &'a FieldCtx,
        ell: u64,
        n: u32,
        t: &'a BigInt,
    },
}

/// Verifies the applicable reduction lemma by exact expansion; hypotheses
/// that fail yield an inapplicable report, not an error.
pub fn reduction_check(case: ReductionCase<'_>) -> Result<ReductionReport> {
    match case {
        ReductionCase::ModThree { n, t } => {
            let f3 = FieldCtx::new(3, 1)?;
            let lhs = FqPoly::from_zpoly(&f3, &rikuna_z3(n, t));
            let lin = FqPoly::from_elems(vec![f3.neg(f3.one()), f3.one()]);
            let rhs = poly_pow(&f3, &lin, 3u64.pow(n));
            let holds = lhs == rhs;
            Ok(ReductionReport {
                applicable: true,
                holds: Some(holds),
                detail: format!("r_{n}(x, {t}) vs (x-1)^{} mod 3", 3u64.pow(n)),
            })
        }
        ReductionCase::ModZeta { ctx, ell, n, t } => {
            if (ctx.q() - 1) % ell != 0 {
                return Ok(ReductionReport {
                    applicable: false,
                    holds: None,
                    detail: format!("q = {} is not 1 mod {ell}: ζ is not rational", ctx.q()),
                });
            }
            let (zeta, zinv) = crate::finite_field::find_zeta(ctx, ell)?;
            let t_res = ctx.from_int(t);
            if t_res != zeta && t_res != zinv {
                return Ok(ReductionReport {
                    applicable: false,
                    holds: None,
                    detail: format!(
                        "t ≡ {} is not ζ^(±1) = {}, {}",
                        ctx.fmt_elem(t_res),
                        ctx.fmt_elem(zeta),
                        ctx.fmt_elem(zinv)
                    ),
                });
            }
            let lhs = if ell == 3 {
                FqPoly::from_zpoly(ctx, &rikuna_z3(n, t))
            } else {
                pq_pair(ctx, ell, n, zeta)?.rikuna(ctx, t_res)
            };
            let lin = FqPoly::from_elems(vec![ctx.neg(t_res), ctx.one()]);
            let rhs = poly_pow(ctx, &lin, ell.pow(n));
            Ok(ReductionReport {
                applicable: true,
                holds: Some(lhs == rhs),
                detail: format!(
                    "r_{n}(x, t) vs (x - {})^{} over {}",
                    ctx.fmt_elem(t_res),
                    ell.pow(n),
                    ctx
                ),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finite_field::{find_zeta, make_field};

    fn big(x: i64) -> BigInt {
        BigInt::from(x)
    }

    #[test]
    fn level_one_matches_shanks_form() {
        // r_1 = x³ − 3t·x² − 3(t+1)·x − 1
        for t in -4..=4i64 {
            let got = rikuna_z3(1, &big(t));
            let want = ZPoly::from_i64s(&[-1, -3 * (t + 1), -3 * t, 1]);
            assert_eq!(got, want, "t={t}");
        }
        assert_eq!(rikuna_z3(1, &big(0)), ZPoly::from_i64s(&[-1, -3, 0, 1]));
        assert_eq!(rikuna_z3(0, &big(5)), ZPoly::from_i64s(&[-5, 1]));
    }

    #[test]
    fn constant_term_is_minus_one() {
        for t in [-7i64, 0, 3, 11] {
            let f = rikuna_z3(2, &big(t));
            assert_eq!(f.coeff(0), big(-1), "t·u_2 − u_0 = −1");
        }
    }

    #[test]
    fn monic_degree_and_subleading_coefficient() {
        for n in 1..=3u32 {
            for t in [-5i64, -1, 0, 2, 9] {
                let f = rikuna_z3(n, &big(t));
                let d = 3usize.pow(n);
                assert_eq!(f.degree(), Some(d));
                assert!(f.is_monic());
                assert_eq!(f.coeff(d - 1), big(-(3i64.pow(n)) * t));
            }
        }
    }

    #[test]
    fn sum_formula_matches_composition_oracle() {
        for n in 0..=3u32 {
            for t in -5..=5i64 {
                assert_eq!(
                    rikuna_z3(n, &big(t)),
                    rikuna_z3_via_composition(n, &big(t)),
                    "n={n} t={t}"
                );
            }
        }
    }

    #[test]
    fn integer_pair_reduces_to_field_pair() {
        for p in [7u64, 13, 31] {
            let ctx = make_field(p, 1).unwrap();
            let (zeta, _) = find_zeta(&ctx, 3).unwrap();
            for n in 0..=3u32 {
                let pair = pq_pair(&ctx, 3, n, zeta).unwrap();
                let (pz, qz) = pq_z3_level(n);
                assert_eq!(pair.p, FqPoly::from_zpoly(&ctx, &pz), "p={p} n={n}");
                assert_eq!(pair.q, FqPoly::from_zpoly(&ctx, &qz), "p={p} n={n}");
                for t in -6..=6i64 {
                    let viaz = FqPoly::from_zpoly(&ctx, &rikuna_z3(n, &big(t)));
                    let viaf = pair.rikuna(&ctx, ctx.from_int(&big(t)));
                    assert_eq!(viaz, viaf, "p={p} n={n} t={t}");
                }
            }
        }
    }

    #[test]
    fn pair_degrees_and_leading_coefficients() {
        let f7 = make_field(7, 1).unwrap();
        let (zeta, _) = find_zeta(&f7, 3).unwrap();
        let p1 = pq_pair(&f7, 3, 1, zeta).unwrap();
        assert_eq!(p1.q.degree(), Some(2));
        assert_eq!(p1.q.leading().unwrap(), f7.from_u64(3));
        let p2 = pq_pair(&f7, 3, 2, zeta).unwrap();
        assert_eq!(p2.p.degree(), Some(9));
        assert_eq!(p2.q.degree(), Some(8));
        assert!(p2.p.is_monic());
        assert_eq!(p2.q.leading().unwrap(), f7.from_u64(9 % 7));
    }

    #[test]
    fn zeta_is_fixed_point() {
        let f31 = make_field(31, 1).unwrap();
        let (zeta, zinv) = find_zeta(&f31, 5).unwrap();
        let pair = pq_pair(&f31, 5, 1, zeta).unwrap();
        for z in [zeta, zinv] {
            assert_eq!(
                phi_eval(&f31, &pair, PFElem::Finite(z)),
                PFElem::Finite(z)
            );
        }
        assert_eq!(phi_eval(&f31, &pair, PFElem::Infinity), PFElem::Infinity);
    }

    #[test]
    fn phi_example_over_f7() {
        let f7 = make_field(7, 1).unwrap();
        let (zeta, _) = find_zeta(&f7, 3).unwrap();
        let pair = pq_pair(&f7, 3, 1, zeta).unwrap();
        assert_eq!(
            phi_eval(&f7, &pair, PFElem::Finite(FqElem(1))),
            PFElem::Finite(FqElem(3))
        );
    }

    #[test]
    fn beta_functoriality_sampled() {
        // (φ(a)−ζ)/(φ(a)−ζ⁻¹) = ((a−ζ)/(a−ζ⁻¹))^ℓ away from the fixed points
        for (p, ell) in [(7u64, 3u64), (31, 5), (13, 3)] {
            let ctx = make_field(p, 1).unwrap();
            let (zeta, zinv) = find_zeta(&ctx, ell).unwrap();
            let pair = pq_pair(&ctx, ell, 1, zeta).unwrap();
            let beta = |a: PFElem| -> FqElem {
                match a {
                    PFElem::Infinity => ctx.one(),
                    PFElem::Finite(x) => ctx
                        .div(ctx.sub(x, zeta), ctx.sub(x, zinv))
                        .expect("a is not ζ⁻¹"),
                }
            };
            for a in ctx.elements().map(PFElem::Finite).chain([PFElem::Infinity]) {
                if a == PFElem::Finite(zeta) || a == PFElem::Finite(zinv) {
                    continue;
                }
                let img = phi_eval(&ctx, &pair, a);
                assert_eq!(beta(img), ctx.pow(beta(a), ell), "p={p} ℓ={ell}");
            }
        }
    }

    #[test]
    fn reduction_lemma_mod_three() {
        for n in 1..=3u32 {
            for t in -3..=3i64 {
                let rep = reduction_check(ReductionCase::ModThree { n, t: &big(t) }).unwrap();
                assert_eq!(rep.holds, Some(true), "n={n} t={t}");
            }
        }
    }

    #[test]
    fn reduction_lemma_mod_zeta_examples() {
        let f7 = make_field(7, 1).unwrap();
        // 2 has order 3 mod 7 and divides t² + t + 1 at t = 2
        let rep = reduction_check(ReductionCase::ModZeta {
            ctx: &f7,
            ell: 3,
            n: 2,
            t: &big(2),
        })
        .unwrap();
        assert!(rep.applicable);
        assert_eq!(rep.holds, Some(true));

        let f5 = make_field(5, 1).unwrap();
        let rep = reduction_check(ReductionCase::ModZeta {
            ctx: &f5,
            ell: 3,
            n: 1,
            t: &big(0),
        })
        .unwrap();
        assert!(!rep.applicable);

        // t ≡ ζ⁻¹ works as well
        let rep = reduction_check(ReductionCase::ModZeta {
            ctx: &f7,
            ell: 3,
            n: 1,
            t: &big(4),
        })
        .unwrap();
        assert_eq!(rep.holds, Some(true));
    }
}
