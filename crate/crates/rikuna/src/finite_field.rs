//! Arithmetic in F_p and F_{p^k}, element orders, roots of unity, and
//! complete polynomial factorization over F_q (squarefree decomposition,
//! then distinct-degree, then randomized equal-degree splitting).
//!
//! Elements are stored as canonical codes Σ c_i·p^i of their reduced
//! representatives, so an element is a plain `u64` and all arithmetic goes
//! through the owning [`FieldCtx`]. The code order doubles as the canonical
//! total order on the field (prime subfield by least nonnegative residue).

use std::fmt;
use std::sync::Arc;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::arith;
use crate::error::{Error, Result};
use crate::zpoly::ZPoly;

/// Log/antilog tables over the multiplicative group, built for small
/// extension fields so multiplication is O(1).
#[derive(Debug, Clone)]
struct LogTables {
    /// exp[i] = code of g^i, length q−1
    exp: Vec<u64>,
    /// log[code] = i with g^i = code; log[0] is unused
    log: Vec<u32>,
}

const TABLE_LIMIT: u64 = 1 << 16;

/// A finite field F_{p^k} with a designated modulus (absent when k = 1).
///
/// The modulus is either the deterministic canonical choice (the monic
/// irreducible of degree k whose non-leading coefficient code Σ c_i·p^i is
/// smallest) or one supplied by the caller, verified irreducible.
#[derive(Debug, Clone)]
pub struct FieldCtx {
    p: u64,
    k: u32,
    q: u64,
    /// ascending coefficients, length k+1, monic; None when k = 1
    modulus: Option<Vec<u64>>,
    tables: Option<LogTables>,
    /// factorization of q − 1, for order computations
    q1_factors: Vec<(u64, u32)>,
    /// base seed for the equal-degree splitting stream
    seed: u64,
}

/// An element of F_q, stored as the code of its reduced representative.
/// Codes are only meaningful relative to the [`FieldCtx`] that produced them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FqElem(pub u64);

/// A point of PF_q = F_q ∪ {∞}. `Infinity` sorts after every finite element.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PFElem {
    Finite(FqElem),
    Infinity,
}

impl PFElem {
    pub fn finite(self) -> Option<FqElem> {
        match self {
            PFElem::Finite(a) => Some(a),
            PFElem::Infinity => None,
        }
    }

    pub fn is_infinity(self) -> bool {
        matches!(self, PFElem::Infinity)
    }
}

/// Deterministically chosen field context: the canonical modulus makes every
/// run reproduce the same element codes.
pub fn make_field(p: u64, k: u32) -> Result<FieldCtx> {
    FieldCtx::new(p, k)
}

impl FieldCtx {
    pub fn new(p: u64, k: u32) -> Result<FieldCtx> {
        if !arith::is_prime_u64(p) {
            return Err(Error::parameter(format!("make_field: {p} is not prime")));
        }
        if k == 0 {
            return Err(Error::parameter("make_field: extension degree must be >= 1"));
        }
        let q = checked_pow(p, k)?;
        if k == 1 {
            return Ok(FieldCtx {
                p,
                k,
                q,
                modulus: None,
                tables: None,
                q1_factors: arith::factor_u64(q - 1),
                seed: 0,
            });
        }
        let modulus = canonical_irreducible(p, k)?;
        FieldCtx::from_parts(p, k, q, modulus)
    }

    /// Builds F_p[x]/(modulus) for a caller-supplied monic irreducible,
    /// given by ascending coefficient codes of length k+1.
    pub fn with_modulus(p: u64, modulus: Vec<u64>) -> Result<FieldCtx> {
        if !arith::is_prime_u64(p) {
            return Err(Error::parameter(format!("with_modulus: {p} is not prime")));
        }
        if modulus.len() < 2 {
            return Err(Error::parameter("with_modulus: modulus must have degree >= 1"));
        }
        let k = (modulus.len() - 1) as u32;
        if modulus[k as usize] != 1 {
            return Err(Error::parameter("with_modulus: modulus must be monic"));
        }
        if modulus.iter().any(|&c| c >= p) {
            return Err(Error::parameter("with_modulus: coefficients must be reduced mod p"));
        }
        if k == 1 {
            // F_p itself; the linear modulus carries no information
            return FieldCtx::new(p, 1);
        }
        let q = checked_pow(p, k)?;
        let base = FieldCtx::new(p, 1)?;
        if !base.is_irreducible(&FqPoly::from_codes(&modulus)) {
            return Err(Error::parameter("with_modulus: modulus is reducible"));
        }
        FieldCtx::from_parts(p, k, q, modulus)
    }

    fn from_parts(p: u64, k: u32, q: u64, modulus: Vec<u64>) -> Result<FieldCtx> {
        let mut ctx = FieldCtx {
            p,
            k,
            q,
            modulus: Some(modulus),
            tables: None,
            q1_factors: arith::factor_u64(q - 1),
            seed: 0,
        };
        if q <= TABLE_LIMIT {
            ctx.tables = Some(ctx.build_tables());
        }
        Ok(ctx)
    }

    /// Overrides the seed mixed into the equal-degree splitting stream.
    pub fn with_seed(mut self, seed: u64) -> FieldCtx {
        self.seed = seed;
        self
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn modulus(&self) -> Option<&[u64]> {
        self.modulus.as_deref()
    }

    // ---- element construction ----

    pub fn zero(&self) -> FqElem {
        FqElem(0)
    }

    pub fn one(&self) -> FqElem {
        FqElem(1)
    }

    /// The constant-subfield element u mod p.
    pub fn from_u64(&self, u: u64) -> FqElem {
        FqElem(u % self.p)
    }

    pub fn from_int(&self, x: &BigInt) -> FqElem {
        let p = BigInt::from(self.p);
        let r = x.mod_floor(&p);
        FqElem(r.to_u64().expect("residue fits u64"))
    }

    /// Checked construction from a canonical code.
    pub fn elem(&self, code: u64) -> Result<FqElem> {
        if code < self.q {
            Ok(FqElem(code))
        } else {
            Err(Error::parameter(format!("element code {code} >= q = {}", self.q)))
        }
    }

    /// All field elements in canonical order.
    pub fn elements(&self) -> impl Iterator<Item = FqElem> {
        (0..self.q).map(FqElem)
    }

    /// Ascending coefficient digits of the reduced representative (length k).
    pub fn decode(&self, a: FqElem) -> Vec<u64> {
        let mut digits = Vec::with_capacity(self.k as usize);
        let mut c = a.0;
        for _ in 0..self.k {
            digits.push(c % self.p);
            c /= self.p;
        }
        digits
    }

    pub fn encode(&self, digits: &[u64]) -> FqElem {
        let mut code = 0u64;
        for &d in digits.iter().rev() {
            code = code * self.p + d % self.p;
        }
        FqElem(code)
    }

    // ---- arithmetic ----

    pub fn add(&self, a: FqElem, b: FqElem) -> FqElem {
        if self.k == 1 {
            let s = a.0 + b.0;
            return FqElem(if s >= self.p { s - self.p } else { s });
        }
        let mut c = 0u64;
        let mut pow = 1u64;
        let (mut x, mut y) = (a.0, b.0);
        for _ in 0..self.k {
            let s = x % self.p + y % self.p;
            c += (if s >= self.p { s - self.p } else { s }) * pow;
            x /= self.p;
            y /= self.p;
            pow *= self.p;
        }
        FqElem(c)
    }

    pub fn neg(&self, a: FqElem) -> FqElem {
        if self.k == 1 {
            return FqElem(if a.0 == 0 { 0 } else { self.p - a.0 });
        }
        let mut c = 0u64;
        let mut pow = 1u64;
        let mut x = a.0;
        for _ in 0..self.k {
            let d = x % self.p;
            c += (if d == 0 { 0 } else { self.p - d }) * pow;
            x /= self.p;
            pow *= self.p;
        }
        FqElem(c)
    }

    pub fn sub(&self, a: FqElem, b: FqElem) -> FqElem {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: FqElem, b: FqElem) -> FqElem {
        if self.k == 1 {
            return FqElem((a.0 as u128 * b.0 as u128 % self.p as u128) as u64);
        }
        if a.0 == 0 || b.0 == 0 {
            return FqElem(0);
        }
        if let Some(t) = &self.tables {
            let i = t.log[a.0 as usize] as u64 + t.log[b.0 as usize] as u64;
            let m = self.q - 1;
            return FqElem(t.exp[(if i >= m { i - m } else { i }) as usize]);
        }
        self.raw_mul(a, b)
    }

    fn raw_mul(&self, a: FqElem, b: FqElem) -> FqElem {
        let k = self.k as usize;
        let da = self.decode(a);
        let db = self.decode(b);
        let mut prod = vec![0u64; 2 * k - 1];
        for (i, &x) in da.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in db.iter().enumerate() {
                prod[i + j] = (prod[i + j] as u128 + x as u128 * y as u128)
                    .rem_euclid(self.p as u128) as u64;
            }
        }
        let m = self.modulus.as_ref().expect("k > 1 has a modulus");
        for i in (k..prod.len()).rev() {
            let c = prod[i];
            if c == 0 {
                continue;
            }
            prod[i] = 0;
            for j in 0..k {
                // x^k ≡ −(lower part of modulus)
                let sub = c as u128 * m[j] as u128 % self.p as u128;
                let cur = prod[i - k + j] as u128;
                prod[i - k + j] = ((cur + self.p as u128 - sub) % self.p as u128) as u64;
            }
        }
        prod.truncate(k);
        self.encode(&prod)
    }

    pub fn inv(&self, a: FqElem) -> Result<FqElem> {
        if a.0 == 0 {
            return Err(Error::domain("inverse of zero"));
        }
        if let Some(t) = &self.tables {
            let m = self.q - 1;
            let i = (m - t.log[a.0 as usize] as u64) % m;
            return Ok(FqElem(t.exp[i as usize]));
        }
        Ok(self.pow(a, self.q - 2))
    }

    pub fn div(&self, a: FqElem, b: FqElem) -> Result<FqElem> {
        Ok(self.mul(a, self.inv(b)?))
    }

    pub fn pow(&self, a: FqElem, e: u64) -> FqElem {
        if let Some(t) = &self.tables {
            if a.0 == 0 {
                return FqElem(if e == 0 { 1 } else { 0 });
            }
            let m = (self.q - 1) as u128;
            let i = (t.log[a.0 as usize] as u128 * (e as u128 % m)) % m;
            return FqElem(t.exp[i as usize]);
        }
        let mut base = a;
        let mut acc = self.one();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    pub fn pow_big(&self, a: FqElem, e: &BigUint) -> FqElem {
        if a.0 == 0 {
            return FqElem(if e.is_zero() { 1 } else { 0 });
        }
        // the multiplicative group has order q − 1
        let e = e % BigUint::from(self.q - 1);
        self.pow(a, e.to_u64().expect("reduced exponent fits"))
    }

    /// Frobenius x ↦ x^p.
    pub fn frob(&self, a: FqElem) -> FqElem {
        self.pow(a, self.p)
    }

    /// Renders an element; extension elements print as polynomials in `g`.
    pub fn fmt_elem(&self, a: FqElem) -> String {
        if self.k == 1 {
            return a.0.to_string();
        }
        let digits = self.decode(a);
        let mut parts = Vec::new();
        for (i, &d) in digits.iter().enumerate().rev() {
            if d == 0 {
                continue;
            }
            let s = match (i, d) {
                (0, _) => format!("{d}"),
                (1, 1) => "g".to_string(),
                (1, _) => format!("{d}g"),
                (_, 1) => format!("g^{i}"),
                (_, _) => format!("{d}g^{i}"),
            };
            parts.push(s);
        }
        if parts.is_empty() {
            "0".to_string()
        } else {
            parts.join("+")
        }
    }

    fn build_tables(&self) -> LogTables {
        let q = self.q;
        let gen = self.find_generator_raw();
        let mut exp = vec![0u64; (q - 1) as usize];
        let mut log = vec![0u32; q as usize];
        let mut cur = self.one();
        for i in 0..(q - 1) as usize {
            exp[i] = cur.0;
            log[cur.0 as usize] = i as u32;
            cur = self.raw_mul(cur, gen);
        }
        debug_assert_eq!(cur.0, 1, "generator order must be q-1");
        LogTables { exp, log }
    }

    fn find_generator_raw(&self) -> FqElem {
        'cand: for code in 2..self.q {
            let a = FqElem(code);
            for (r, _) in &self.q1_factors {
                if self.raw_pow(a, (self.q - 1) / r).0 == 1 {
                    continue 'cand;
                }
            }
            return a;
        }
        unreachable!("multiplicative group of a finite field is cyclic")
    }

    fn raw_pow(&self, a: FqElem, mut e: u64) -> FqElem {
        let mut base = a;
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.raw_mul(acc, base);
            }
            base = self.raw_mul(base, base);
            e >>= 1;
        }
        acc
    }
}

fn checked_pow(p: u64, k: u32) -> Result<u64> {
    let mut q: u64 = 1;
    for _ in 0..k {
        q = q
            .checked_mul(p)
            .ok_or_else(|| Error::parameter(format!("field size {p}^{k} too large")))?;
    }
    if q >= (1 << 62) {
        return Err(Error::parameter(format!("field size {p}^{k} too large")));
    }
    Ok(q)
}

/// The canonical monic irreducible of degree k over F_p: scan non-leading
/// coefficient codes ascending (degree-major lexicographic order) and take
/// the first irreducible.
fn canonical_irreducible(p: u64, k: u32) -> Result<Vec<u64>> {
    let base = FieldCtx::new(p, 1)?;
    let q = checked_pow(p, k)?;
    for code in 0..q {
        let mut coeffs = Vec::with_capacity(k as usize + 1);
        let mut c = code;
        for _ in 0..k {
            coeffs.push(c % p);
            c /= p;
        }
        coeffs.push(1);
        let f = FqPoly::from_codes(&coeffs);
        if base.is_irreducible(&f) {
            return Ok(coeffs);
        }
    }
    unreachable!("irreducibles of every degree exist over F_p")
}

/// Least e ≥ 1 with a^e = 1; divides q − 1.
pub fn element_order(ctx: &FieldCtx, a: FqElem) -> Result<u64> {
    if a.0 == 0 {
        return Err(Error::domain("element_order: zero has no multiplicative order"));
    }
    let mut ord = ctx.q() - 1;
    for (r, e) in &ctx.q1_factors {
        for _ in 0..*e {
            if ord % r == 0 && ctx.pow(a, ord / r).0 == 1 {
                ord /= r;
            } else {
                break;
            }
        }
    }
    Ok(ord)
}

/// The canonical primitive ℓ-th root of unity: the smallest element (code
/// order) of order exactly ℓ, paired with its inverse. Requires q ≡ 1 (mod ℓ).
pub fn find_zeta(ctx: &FieldCtx, ell: u64) -> Result<(FqElem, FqElem)> {
    if ell < 3 || !arith::is_prime_u64(ell) {
        return Err(Error::parameter(format!("find_zeta: ℓ = {ell} is not an odd prime")));
    }
    if (ctx.q() - 1) % ell != 0 {
        return Err(Error::precondition(format!(
            "find_zeta: q = {} is not 1 mod {ell}",
            ctx.q()
        )));
    }
    // the order-ℓ subgroup is {1, ζ^j}; the smallest non-identity member
    // works since ℓ is prime
    let zeta = if ctx.k() == 1 && ctx.q() > (1 << 14) {
        // large prime field: go through a generator instead of scanning
        let g = ctx.find_generator_raw();
        let step = (ctx.q() - 1) / ell;
        (1..ell)
            .map(|j| ctx.pow(g, step * j))
            .min()
            .expect("ell >= 3")
    } else {
        ctx.elements()
            .skip(2) // 0 and 1
            .find(|&a| ctx.pow(a, ell).0 == 1)
            .expect("q ≡ 1 mod ℓ guarantees an order-ℓ element")
    };
    let inv = ctx.inv(zeta)?;
    Ok((zeta, inv))
}

/// Recovers (ζ, ζ⁻¹) from the trace datum ζ⁺: the two roots of
/// x² − ζ⁺x + 1, canonically ordered, each verified to have order ℓ.
pub fn zeta_from_zeta_plus(ctx: &FieldCtx, zplus: FqElem, ell: u64) -> Result<(FqElem, FqElem)> {
    let quad = FqPoly::from_elems(vec![ctx.one(), ctx.neg(zplus), ctx.one()]);
    let fac = factor_fq(ctx, &quad)?;
    let mut roots: Vec<FqElem> = Vec::new();
    for (g, e) in &fac.factors {
        if g.degree() == Some(1) {
            // root of x + c is −c
            let c = g.coeffs()[0];
            for _ in 0..*e {
                roots.push(ctx.neg(c));
            }
        }
    }
    if roots.len() < 2 {
        return Err(Error::precondition(
            "ζ not rational over this residue field (x² − ζ⁺x + 1 is irreducible)".to_string(),
        ));
    }
    roots.sort();
    let (a, b) = (roots[0], roots[1]);
    if a == b || element_order(ctx, a)? != ell || element_order(ctx, b)? != ell {
        return Err(Error::precondition(format!(
            "zplus = {} is not an ℓ-th trace (roots do not have order {ell})",
            ctx.fmt_elem(zplus)
        )));
    }
    debug_assert_eq!(ctx.mul(a, b).0, 1);
    Ok((a, b))
}

/// Dense polynomial over F_q; coefficients ascending, top coefficient
/// nonzero unless the polynomial is zero.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FqPoly {
    coeffs: Vec<FqElem>,
}

impl FqPoly {
    pub fn zero() -> Self {
        FqPoly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        FqPoly {
            coeffs: vec![FqElem(1)],
        }
    }

    pub fn x() -> Self {
        FqPoly {
            coeffs: vec![FqElem(0), FqElem(1)],
        }
    }

    pub fn constant(c: FqElem) -> Self {
        FqPoly::from_elems(vec![c])
    }

    pub fn from_elems(mut coeffs: Vec<FqElem>) -> Self {
        while coeffs.last().map_or(false, |c| c.0 == 0) {
            coeffs.pop();
        }
        FqPoly { coeffs }
    }

    pub fn from_codes(codes: &[u64]) -> Self {
        FqPoly::from_elems(codes.iter().map(|&c| FqElem(c)).collect())
    }

    /// Reduces an integer polynomial into F_q (coefficients land in the
    /// prime subfield).
    pub fn from_zpoly(ctx: &FieldCtx, f: &ZPoly) -> Self {
        FqPoly::from_elems(f.coeffs().iter().map(|c| ctx.from_int(c)).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeffs(&self) -> &[FqElem] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> FqElem {
        self.coeffs.get(i).copied().unwrap_or(FqElem(0))
    }

    pub fn leading(&self) -> Option<FqElem> {
        self.coeffs.last().copied()
    }

    pub fn is_monic(&self) -> bool {
        self.leading().map_or(false, |c| c.0 == 1)
    }

    pub fn add(&self, ctx: &FieldCtx, rhs: &FqPoly) -> FqPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            out.push(ctx.add(self.coeff(i), rhs.coeff(i)));
        }
        FqPoly::from_elems(out)
    }

    pub fn sub(&self, ctx: &FieldCtx, rhs: &FqPoly) -> FqPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            out.push(ctx.sub(self.coeff(i), rhs.coeff(i)));
        }
        FqPoly::from_elems(out)
    }

    pub fn neg(&self, ctx: &FieldCtx) -> FqPoly {
        FqPoly::from_elems(self.coeffs.iter().map(|&c| ctx.neg(c)).collect())
    }

    pub fn scale(&self, ctx: &FieldCtx, c: FqElem) -> FqPoly {
        if c.0 == 0 {
            return FqPoly::zero();
        }
        FqPoly::from_elems(self.coeffs.iter().map(|&a| ctx.mul(a, c)).collect())
    }

    pub fn mul(&self, ctx: &FieldCtx, rhs: &FqPoly) -> FqPoly {
        if self.is_zero() || rhs.is_zero() {
            return FqPoly::zero();
        }
        let mut out = vec![FqElem(0); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a.0 == 0 {
                continue;
            }
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                out[i + j] = ctx.add(out[i + j], ctx.mul(a, b));
            }
        }
        FqPoly::from_elems(out)
    }

    /// Division with remainder by a nonzero divisor.
    pub fn divrem(&self, ctx: &FieldCtx, div: &FqPoly) -> Result<(FqPoly, FqPoly)> {
        let d = div
            .degree()
            .ok_or_else(|| Error::domain("polynomial division by zero"))?;
        let lc_inv = ctx.inv(div.leading().expect("nonzero"))?;
        let mut rem: Vec<FqElem> = self.coeffs.clone();
        if rem.len() <= d {
            return Ok((FqPoly::zero(), self.clone()));
        }
        let mut quot = vec![FqElem(0); rem.len() - d];
        for i in (d..rem.len()).rev() {
            let c = ctx.mul(rem[i], lc_inv);
            rem[i] = FqElem(0);
            if c.0 == 0 {
                continue;
            }
            for j in 0..d {
                let t = ctx.mul(div.coeffs[j], c);
                rem[i - d + j] = ctx.sub(rem[i - d + j], t);
            }
            quot[i - d] = c;
        }
        rem.truncate(d);
        Ok((FqPoly::from_elems(quot), FqPoly::from_elems(rem)))
    }

    pub fn rem(&self, ctx: &FieldCtx, div: &FqPoly) -> Result<FqPoly> {
        Ok(self.divrem(ctx, div)?.1)
    }

    pub fn monic(&self, ctx: &FieldCtx) -> Result<FqPoly> {
        match self.leading() {
            None => Ok(FqPoly::zero()),
            Some(lc) if lc.0 == 1 => Ok(self.clone()),
            Some(lc) => Ok(self.scale(ctx, ctx.inv(lc)?)),
        }
    }

    /// Monic gcd.
    pub fn gcd(&self, ctx: &FieldCtx, rhs: &FqPoly) -> Result<FqPoly> {
        let mut a = self.clone();
        let mut b = rhs.clone();
        while !b.is_zero() {
            let r = a.rem(ctx, &b)?;
            a = b;
            b = r;
        }
        a.monic(ctx)
    }

    pub fn derivative(&self, ctx: &FieldCtx) -> FqPoly {
        if self.coeffs.len() <= 1 {
            return FqPoly::zero();
        }
        let p = ctx.p();
        FqPoly::from_elems(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, &c)| ctx.mul(ctx.from_u64(i as u64 % p), c))
                .collect(),
        )
    }

    pub fn eval(&self, ctx: &FieldCtx, x: FqElem) -> FqElem {
        let mut acc = FqElem(0);
        for &c in self.coeffs.iter().rev() {
            acc = ctx.add(ctx.mul(acc, x), c);
        }
        acc
    }

    pub fn pow_mod(&self, ctx: &FieldCtx, e: u64, modulus: &FqPoly) -> Result<FqPoly> {
        self.pow_mod_big(ctx, &BigUint::from(e), modulus)
    }

    pub fn pow_mod_big(&self, ctx: &FieldCtx, e: &BigUint, modulus: &FqPoly) -> Result<FqPoly> {
        let mut base = self.rem(ctx, modulus)?;
        let mut acc = FqPoly::one().rem(ctx, modulus)?;
        let mut e = e.clone();
        while !e.is_zero() {
            if e.is_odd() {
                acc = acc.mul(ctx, &base).rem(ctx, modulus)?;
            }
            base = base.mul(ctx, &base).rem(ctx, modulus)?;
            e >>= 1;
        }
        Ok(acc)
    }

    pub fn fmt_with(&self, ctx: &FieldCtx, var: &str) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut parts = Vec::new();
        for (i, &c) in self.coeffs.iter().enumerate().rev() {
            if c.0 == 0 {
                continue;
            }
            let cs = ctx.fmt_elem(c);
            let coeff_part = if i == 0 {
                cs
            } else if c.0 == 1 {
                String::new()
            } else if cs.contains('+') {
                format!("({cs})*")
            } else {
                format!("{cs}*")
            };
            let var_part = match i {
                0 => String::new(),
                1 => var.to_string(),
                _ => format!("{var}^{i}"),
            };
            parts.push(format!("{coeff_part}{var_part}"));
        }
        parts.join(" + ")
    }
}

/// A complete factorization over F_q: `unit · ∏ factors^mult` reproduces the
/// input exactly. Factors are monic irreducible, sorted canonically.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FqFactorization {
    pub unit: FqElem,
    pub factors: Vec<(FqPoly, u64)>,
}

impl FqFactorization {
    pub fn expand(&self, ctx: &FieldCtx) -> FqPoly {
        let mut acc = FqPoly::constant(self.unit);
        for (g, e) in &self.factors {
            for _ in 0..*e {
                acc = acc.mul(ctx, g);
            }
        }
        acc
    }

    /// Degrees with multiplicity, ascending.
    pub fn degree_profile(&self) -> Vec<(usize, u64)> {
        let mut map: std::collections::BTreeMap<usize, u64> = Default::default();
        for (g, e) in &self.factors {
            *map.entry(g.degree().expect("factors are nonzero")).or_insert(0) += e;
        }
        map.into_iter().collect()
    }

    pub fn is_squarefree(&self) -> bool {
        self.factors.iter().all(|(_, e)| *e == 1)
    }
}

/// Complete factorization into monic irreducibles: squarefree decomposition,
/// distinct-degree splitting, then randomized equal-degree splitting with a
/// stream seeded from the context and input, so results are reproducible.
pub fn factor_fq(ctx: &FieldCtx, f: &FqPoly) -> Result<FqFactorization> {
    if f.is_zero() {
        return Err(Error::domain("factor_fq: zero polynomial"));
    }
    let unit = f.leading().expect("nonzero");
    let monic = f.monic(ctx)?;
    let mut factors: Vec<(FqPoly, u64)> = Vec::new();
    if monic.degree() == Some(0) {
        return Ok(FqFactorization { unit, factors });
    }

    let mut rng = ChaCha20Rng::seed_from_u64(stream_seed(ctx, f));
    for (part, mult) in squarefree_decomposition(ctx, &monic)? {
        for (prod, d) in distinct_degree(ctx, &part)? {
            for irr in equal_degree(ctx, &prod, d, &mut rng)? {
                factors.push((irr, mult));
            }
        }
    }
    factors.sort_by(|a, b| {
        let da = a.0.degree();
        let db = b.0.degree();
        da.cmp(&db).then_with(|| {
            let ca: Vec<u64> = a.0.coeffs().iter().map(|c| c.0).collect();
            let cb: Vec<u64> = b.0.coeffs().iter().map(|c| c.0).collect();
            ca.cmp(&cb)
        })
    });
    // merge equal factors produced from different multiplicity classes
    let mut merged: Vec<(FqPoly, u64)> = Vec::new();
    for (g, e) in factors {
        match merged.last_mut() {
            Some((prev, pe)) if *prev == g => *pe += e,
            _ => merged.push((g, e)),
        }
    }
    Ok(FqFactorization {
        unit,
        factors: merged,
    })
}

fn stream_seed(ctx: &FieldCtx, f: &FqPoly) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    let mut mix = |v: u64| {
        h ^= v;
        h = h.wrapping_mul(0x100000001b3);
    };
    mix(ctx.p());
    mix(ctx.k() as u64);
    mix(ctx.seed);
    for c in f.coeffs() {
        mix(c.0);
    }
    h
}

/// Squarefree decomposition: pairwise coprime squarefree monic parts with
/// multiplicities, ∏ gᵢ^{mᵢ} = f.
pub fn squarefree_decomposition(ctx: &FieldCtx, f: &FqPoly) -> Result<Vec<(FqPoly, u64)>> {
    let mut out = Vec::new();
    sqf_rec(ctx, f.clone(), 1, &mut out)?;
    out.sort_by_key(|(g, m)| (*m, g.degree()));
    Ok(out)
}

fn sqf_rec(ctx: &FieldCtx, f: FqPoly, mult: u64, out: &mut Vec<(FqPoly, u64)>) -> Result<()> {
    if f.degree().map_or(true, |d| d == 0) {
        return Ok(());
    }
    let df = f.derivative(ctx);
    if df.is_zero() {
        // f is a p-th power
        return sqf_rec(ctx, pth_root(ctx, &f), mult * ctx.p(), out);
    }
    let mut c = f.gcd(ctx, &df)?;
    let mut w = f.divrem(ctx, &c)?.0;
    let mut i = 1u64;
    while w.degree().map_or(false, |d| d > 0) {
        let y = w.gcd(ctx, &c)?;
        let fac = w.divrem(ctx, &y)?.0;
        if fac.degree().map_or(false, |d| d > 0) {
            out.push((fac, mult * i));
        }
        c = c.divrem(ctx, &y)?.0;
        w = y;
        i += 1;
    }
    if c.degree().map_or(false, |d| d > 0) {
        sqf_rec(ctx, pth_root(ctx, &c), mult * ctx.p(), out)?;
    }
    Ok(())
}

/// p-th root of a polynomial whose derivative vanishes (all exponents are
/// multiples of p); coefficientwise inverse Frobenius.
fn pth_root(ctx: &FieldCtx, f: &FqPoly) -> FqPoly {
    let p = ctx.p() as usize;
    let mut out = Vec::new();
    let mut i = 0;
    while i < f.coeffs().len() {
        let c = f.coeff(i);
        // a^(q/p) inverts x ↦ x^p
        let root = ctx.pow(c, ctx.q() / ctx.p());
        out.push(root);
        i += p;
    }
    FqPoly::from_elems(out)
}

/// Distinct-degree splitting of a monic squarefree polynomial: returns
/// (product of all irreducible factors of degree d, d) pairs, d ascending.
pub fn distinct_degree(ctx: &FieldCtx, f: &FqPoly) -> Result<Vec<(FqPoly, usize)>> {
    let mut out = Vec::new();
    let mut fstar = f.clone();
    let x = FqPoly::x();
    let mut h = x.rem(ctx, &fstar)?;
    let mut d = 0usize;
    while fstar.degree().map_or(false, |deg| deg >= 2 * (d + 1)) {
        d += 1;
        h = h.pow_mod(ctx, ctx.q(), &fstar)?;
        let g = h.sub(ctx, &x).gcd(ctx, &fstar)?;
        if g.degree().map_or(false, |dg| dg > 0) {
            out.push((g.clone(), d));
            fstar = fstar.divrem(ctx, &g)?.0;
            h = h.rem(ctx, &fstar)?;
        }
    }
    if fstar.degree().map_or(false, |deg| deg > 0) {
        let deg = fstar.degree().unwrap();
        out.push((fstar, deg));
    }
    Ok(out)
}

/// Cantor–Zassenhaus equal-degree splitting (trace variant in
/// characteristic 2) of a monic squarefree product of degree-d irreducibles.
pub fn equal_degree(
    ctx: &FieldCtx,
    f: &FqPoly,
    d: usize,
    rng: &mut ChaCha20Rng,
) -> Result<Vec<FqPoly>> {
    let deg = f.degree().expect("nonzero input");
    if deg == d {
        return Ok(vec![f.clone()]);
    }
    debug_assert_eq!(deg % d, 0);
    loop {
        let r = random_poly(ctx, rng, deg);
        let g1 = r.gcd(ctx, f)?;
        if g1.degree().map_or(false, |dg| dg > 0 && dg < deg) {
            return split_both(ctx, f, &g1, d, rng);
        }
        let g = if ctx.p() == 2 {
            // trace map over F_2 of r in F_{q^d}
            let rounds = ctx.k() as usize * d;
            let mut acc = r.clone();
            let mut cur = r.clone();
            for _ in 1..rounds {
                cur = cur.mul(ctx, &cur).rem(ctx, f)?;
                acc = acc.add(ctx, &cur);
            }
            acc.gcd(ctx, f)?
        } else {
            let e = (BigUint::from(ctx.q()).pow(d as u32) - BigUint::one()) / BigUint::from(2u32);
            let h = r.pow_mod_big(ctx, &e, f)?;
            h.sub(ctx, &FqPoly::one()).gcd(ctx, f)?
        };
        if g.degree().map_or(false, |dg| dg > 0 && dg < deg) {
            return split_both(ctx, f, &g, d, rng);
        }
    }
}

fn split_both(
    ctx: &FieldCtx,
    f: &FqPoly,
    g: &FqPoly,
    d: usize,
    rng: &mut ChaCha20Rng,
) -> Result<Vec<FqPoly>> {
    let rest = f.divrem(ctx, g)?.0;
    let mut out = equal_degree(ctx, g, d, rng)?;
    out.extend(equal_degree(ctx, &rest, d, rng)?);
    Ok(out)
}

fn random_poly(ctx: &FieldCtx, rng: &mut ChaCha20Rng, below_deg: usize) -> FqPoly {
    loop {
        let deg = if below_deg <= 1 { 1 } else { rng.gen_range(1..below_deg) };
        let mut coeffs = Vec::with_capacity(deg + 1);
        for _ in 0..=deg {
            coeffs.push(FqElem(rng.gen_range(0..ctx.q())));
        }
        let f = FqPoly::from_elems(coeffs);
        if f.degree().map_or(false, |d| d >= 1) {
            return f;
        }
    }
}

impl FieldCtx {
    /// Rabin irreducibility test for a monic polynomial over this field.
    pub fn is_irreducible(&self, f: &FqPoly) -> bool {
        let Some(n) = f.degree() else { return false };
        if n == 0 {
            return false;
        }
        if n == 1 {
            return true;
        }
        if f.coeff(0).0 == 0 {
            return false; // divisible by x
        }
        let x = FqPoly::x();
        // x^{q^n} ≡ x (mod f)
        let mut h = x.clone();
        let mut powers = Vec::with_capacity(n);
        for _ in 0..n {
            h = match h.pow_mod(self, self.q(), f) {
                Ok(v) => v,
                Err(_) => return false,
            };
            powers.push(h.clone());
        }
        if powers[n - 1] != x.rem(self, f).unwrap_or_else(|_| x.clone()) {
            return false;
        }
        for (r, _) in arith::factor_u64(n as u64) {
            let idx = n / r as usize;
            let g = powers[idx - 1]
                .sub(self, &x)
                .gcd(self, f)
                .unwrap_or_else(|_| FqPoly::one());
            if g.degree().map_or(false, |d| d > 0) {
                return false;
            }
        }
        true
    }

    /// All roots of f in this field, with multiplicity, canonical order.
    pub fn roots(&self, f: &FqPoly) -> Result<Vec<FqElem>> {
        if f.is_zero() {
            return Err(Error::domain("roots of the zero polynomial"));
        }
        if self.q() <= 4096 {
            let mut out = Vec::new();
            let mut g = f.clone();
            for a in self.elements() {
                while g.degree().map_or(false, |d| d > 0) && g.eval(self, a).0 == 0 {
                    let lin = FqPoly::from_elems(vec![self.neg(a), self.one()]);
                    g = g.divrem(self, &lin)?.0;
                    out.push(a);
                }
            }
            out.sort();
            return Ok(out);
        }
        let fac = factor_fq(self, f)?;
        let mut out = Vec::new();
        for (g, e) in &fac.factors {
            if g.degree() == Some(1) {
                let r = self.neg(g.coeffs()[0]);
                for _ in 0..*e {
                    out.push(r);
                }
            }
        }
        out.sort();
        Ok(out)
    }
}

/// An embedding F_q ↪ F_{q^m} determined by the canonical (smallest) root of
/// the base modulus in the big field. Constants embed as constants.
#[derive(Debug, Clone)]
pub struct Embedding {
    pub base: Arc<FieldCtx>,
    pub ext: Arc<FieldCtx>,
    /// powers 1, r, r², …, r^{k−1} of the chosen root
    root_powers: Vec<FqElem>,
}

impl Embedding {
    pub fn new(base: Arc<FieldCtx>, ext: Arc<FieldCtx>) -> Result<Embedding> {
        if ext.p() != base.p() || ext.k() % base.k() != 0 {
            return Err(Error::parameter("Embedding: incompatible fields"));
        }
        let k = base.k() as usize;
        let root = if k == 1 {
            ext.one()
        } else {
            let modulus = FqPoly::from_codes(base.modulus().expect("k > 1"));
            // coefficients of the base modulus are prime-subfield constants,
            // so the polynomial makes sense over the extension
            let lifted = FqPoly::from_elems(
                modulus.coeffs().iter().map(|c| ext.from_u64(c.0)).collect(),
            );
            let roots = ext.roots(&lifted)?;
            *roots
                .first()
                .ok_or_else(|| Error::precondition("base modulus has no root in extension"))?
        };
        let mut root_powers = Vec::with_capacity(k);
        let mut cur = ext.one();
        for _ in 0..k {
            root_powers.push(cur);
            cur = ext.mul(cur, root);
        }
        Ok(Embedding {
            base,
            ext,
            root_powers,
        })
    }

    pub fn embed(&self, a: FqElem) -> FqElem {
        if self.base.k() == 1 {
            return self.ext.from_u64(a.0);
        }
        let digits = self.base.decode(a);
        let mut acc = self.ext.zero();
        for (d, pw) in digits.iter().zip(&self.root_powers) {
            acc = self.ext.add(acc, self.ext.mul(self.ext.from_u64(*d), *pw));
        }
        acc
    }
}

impl fmt::Display for FieldCtx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.k == 1 {
            write!(f, "F_{}", self.p)
        } else {
            write!(f, "F_{}^{} (q = {})", self.p, self.k, self.q)
        }
    }
}
