//! Exact big-integer utilities: p-adic valuations, binomial coefficients,
//! integer factorization with an explicit "unfactored cofactor" escape hatch,
//! and the two periodic coefficient tables used by the cubic closed forms.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// A p-adic valuation. `Infinite` is reserved for the zero element; polygon
/// code treats such coefficients as absent points, never as a sentinel value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Valuation {
    Finite(u64),
    Infinite,
}

impl Valuation {
    pub fn is_infinite(self) -> bool {
        matches!(self, Valuation::Infinite)
    }

    /// The finite value, if any.
    pub fn finite(self) -> Option<u64> {
        match self {
            Valuation::Finite(v) => Some(v),
            Valuation::Infinite => None,
        }
    }

    /// Unwraps a finite valuation; panics on `Infinite`.
    pub fn expect_finite(self) -> u64 {
        self.finite().expect("valuation is infinite")
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{v}"),
            Valuation::Infinite => write!(f, "inf"),
        }
    }
}

/// Exact p-adic valuation of an integer. Returns `Infinite` exactly for 0.
///
/// `p` must be prime; this is checked on every call so that a bad parameter
/// can never silently produce a wrong valuation.
pub fn val_p(x: &BigInt, p: &BigInt) -> Result<Valuation> {
    if !is_prime(p) {
        return Err(Error::parameter(format!("val_p: {p} is not prime")));
    }
    Ok(val_p_unchecked(x, p))
}

pub(crate) fn val_p_unchecked(x: &BigInt, p: &BigInt) -> Valuation {
    if x.is_zero() {
        return Valuation::Infinite;
    }
    let mut v = 0u64;
    let mut rest = x.abs();
    loop {
        let (q, r) = rest.div_rem(p);
        if !r.is_zero() {
            return Valuation::Finite(v);
        }
        v += 1;
        rest = q;
    }
}

/// ν_3(C(3^n, m)) via the closed rule n − ν_3(m), valid for 0 < m < 3^n.
pub fn binom_val3(n: u32, m: u64) -> Result<u64> {
    let pow = 3u64
        .checked_pow(n)
        .ok_or_else(|| Error::parameter(format!("binom_val3: 3^{n} overflows")))?;
    if m == 0 || m >= pow {
        return Err(Error::parameter(format!(
            "binom_val3: m = {m} outside (0, 3^{n})"
        )));
    }
    let mut nu = 0u64;
    let mut m = m;
    while m % 3 == 0 {
        nu += 1;
        m /= 3;
    }
    Ok(n as u64 - nu)
}

/// Exact binomial coefficient C(n, k).
pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

/// The period-6 sequence u_m = U_m(1), where U is the second-kind Chebyshev
/// polynomial normalized by U_m(2 cos θ) = sin((m+1)θ)/sin θ. Satisfies
/// u_0 = u_1 = 1 and u_{m+1} = u_m − u_{m−1}.
pub fn u_seq(m: u64) -> i64 {
    const TABLE: [i64; 6] = [1, 1, 0, -1, -1, 0];
    TABLE[(m % 6) as usize]
}

/// The six-case coefficient e_m(t) attached to the Taylor coefficients of
/// the cubic iterates at x = 1, selected by m mod 6.
pub fn e_table(m: u64, t: &BigInt) -> BigInt {
    match m % 6 {
        0 => 2 * t + 1,
        1 => t.clone(),
        2 => t - 1,
        3 => BigInt::one(),
        4 => t + 2,
        5 => t + 1,
        _ => unreachable!(),
    }
}

/// A signed integer in (partially) factored form: sign · ∏ p^e · cofactor.
///
/// The prime map is ordered, every exponent is ≥ 1, and `cofactor`, when
/// present, is a composite (or unproven) part that resisted factorization.
/// It is carried explicitly rather than being mislabeled as prime.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactoredInt {
    pub sign: i8,
    pub factors: BTreeMap<BigInt, u64>,
    pub cofactor: Option<BigInt>,
}

impl FactoredInt {
    pub fn one() -> Self {
        FactoredInt {
            sign: 1,
            factors: BTreeMap::new(),
            cofactor: None,
        }
    }

    pub fn zero() -> Self {
        FactoredInt {
            sign: 0,
            factors: BTreeMap::new(),
            cofactor: None,
        }
    }

    pub fn is_fully_factored(&self) -> bool {
        self.cofactor.is_none()
    }

    /// Reassembles sign · ∏ p^e · cofactor.
    pub fn value(&self) -> BigInt {
        if self.sign == 0 {
            return BigInt::zero();
        }
        let mut acc = BigInt::from(self.sign);
        for (p, e) in &self.factors {
            acc *= p.pow(u32::try_from(*e).expect("exponent fits u32"));
        }
        if let Some(c) = &self.cofactor {
            acc *= c;
        }
        acc
    }

    /// The exponent of `p` among the known prime factors.
    pub fn exponent_of(&self, p: &BigInt) -> u64 {
        self.factors.get(p).copied().unwrap_or(0)
    }

    /// Multiplies a prime power into the factorization. `p` is trusted prime.
    pub fn push_prime(&mut self, p: BigInt, e: u64) {
        if e > 0 {
            *self.factors.entry(p).or_insert(0) += e;
        }
    }

    /// Pointwise product of two factored integers.
    pub fn mul(&self, other: &FactoredInt) -> FactoredInt {
        if self.sign == 0 || other.sign == 0 {
            return FactoredInt::zero();
        }
        let mut out = self.clone();
        out.sign *= other.sign;
        for (p, e) in &other.factors {
            out.push_prime(p.clone(), *e);
        }
        out.cofactor = match (&self.cofactor, &other.cofactor) {
            (None, None) => None,
            (Some(a), None) => Some(a.clone()),
            (None, Some(b)) => Some(b.clone()),
            (Some(a), Some(b)) => Some(a * b),
        };
        out
    }

    /// Raises the factorization to a power.
    pub fn pow(&self, e: u64) -> FactoredInt {
        if e == 0 {
            return FactoredInt::one();
        }
        let mut out = self.clone();
        out.sign = if self.sign < 0 && e % 2 == 1 { -1 } else { self.sign.abs() };
        for v in out.factors.values_mut() {
            *v *= e;
        }
        out.cofactor = self
            .cofactor
            .as_ref()
            .map(|c| c.pow(u32::try_from(e).expect("exponent fits u32")));
        out
    }
}

impl fmt::Display for FactoredInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.sign == 0 {
            return write!(f, "0");
        }
        if self.sign < 0 {
            write!(f, "-")?;
        }
        let mut first = true;
        for (p, e) in &self.factors {
            if !first {
                write!(f, " * ")?;
            }
            first = false;
            if *e == 1 {
                write!(f, "{p}")?;
            } else {
                write!(f, "{p}^{e}")?;
            }
        }
        if let Some(c) = &self.cofactor {
            if !first {
                write!(f, " * ")?;
            }
            first = false;
            write!(f, "[{c}]")?;
        }
        if first {
            write!(f, "1")?;
        }
        Ok(())
    }
}

const TRIAL_BOUND: u64 = 100_000;
const RHO_ROUNDS: usize = 24;

/// Factors an integer by trial division up to a fixed bound followed by
/// Brent's variant of Pollard rho. A residual the method cannot split and
/// that fails a primality test is reported through the cofactor field.
pub fn factor(n: &BigInt) -> FactoredInt {
    if n.is_zero() {
        return FactoredInt::zero();
    }
    let mut out = FactoredInt::one();
    out.sign = if n.is_negative() { -1 } else { 1 };
    let mut rest = n.magnitude().clone();

    let mut d = 2u64;
    while d <= TRIAL_BOUND {
        if (&rest % d).is_zero() {
            let mut e = 0u64;
            while (&rest % d).is_zero() {
                rest /= d;
                e += 1;
            }
            out.push_prime(BigInt::from(d), e);
        }
        if rest.is_one() {
            return out;
        }
        d = if d == 2 { 3 } else { d + 2 };
        // everything below TRIAL_BOUND^2 with no small divisor is prime
        if d * d > TRIAL_BOUND * TRIAL_BOUND {
            break;
        }
    }
    if rest.is_one() {
        return out;
    }

    let mut stack = vec![rest];
    while let Some(m) = stack.pop() {
        if m.is_one() {
            continue;
        }
        let m_int = BigInt::from(m.clone());
        if is_prime(&m_int) {
            out.push_prime(m_int, 1);
            continue;
        }
        match rho_split(&m) {
            Some(d) => {
                let q = &m / &d;
                stack.push(d);
                stack.push(q);
            }
            None => {
                // composite we could not split: flag, never mislabel
                out.cofactor = Some(match out.cofactor.take() {
                    Some(c) => c * m_int,
                    None => m_int,
                });
            }
        }
    }
    out
}

/// Brent-cycle Pollard rho; returns a nontrivial divisor or None.
fn rho_split(n: &BigUint) -> Option<BigUint> {
    use num_integer::Integer as _;
    if n.is_even() {
        return Some(BigUint::from(2u32));
    }
    // deterministic constants so factorizations are reproducible
    for round in 0..RHO_ROUNDS {
        let c = BigUint::from(1u64 + round as u64);
        let mut x = BigUint::from(2u64 + round as u64) % n;
        let mut y = x.clone();
        let mut d = BigUint::one();
        let mut iters = 0u64;
        let max_iters = 1u64 << 22;
        while d.is_one() && iters < max_iters {
            x = (&x * &x + &c) % n;
            y = (&y * &y + &c) % n;
            y = (&y * &y + &c) % n;
            let diff = if x >= y { &x - &y } else { &y - &x };
            if diff.is_zero() {
                break;
            }
            d = diff.gcd(n);
            iters += 1;
        }
        if !d.is_one() && &d != n {
            return Some(d);
        }
    }
    None
}

/// Miller–Rabin primality. Deterministic for inputs below 3.3·10^24 via a
/// fixed base set; larger inputs use the same bases as a strong
/// probable-prime test (callers treat a pass as prime).
pub fn is_prime(n: &BigInt) -> bool {
    if n.is_negative() {
        return false;
    }
    let n = n.magnitude();
    if n < &BigUint::from(2u32) {
        return false;
    }
    const SMALL: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for p in SMALL {
        let p = BigUint::from(p);
        if n == &p {
            return true;
        }
        if (n % &p).is_zero() {
            return false;
        }
    }
    let one = BigUint::one();
    let n_minus_1 = n - &one;
    let s = n_minus_1.trailing_zeros().unwrap_or(0);
    let d = &n_minus_1 >> s;
    'witness: for a in SMALL {
        let a = BigUint::from(a);
        let mut x = a.modpow(&d, n);
        if x.is_one() || x == n_minus_1 {
            continue;
        }
        for _ in 1..s {
            x = (&x * &x) % n;
            if x == n_minus_1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// u64 convenience wrapper around [`is_prime`].
pub fn is_prime_u64(n: u64) -> bool {
    is_prime(&BigInt::from(n))
}

/// Factors a u64 completely (trial division + rho always succeeds here).
pub fn factor_u64(n: u64) -> Vec<(u64, u32)> {
    let f = factor(&BigInt::from(n));
    debug_assert!(f.is_fully_factored());
    f.factors
        .into_iter()
        .map(|(p, e)| (p.to_u64().expect("u64 prime"), e as u32))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(x: i64) -> BigInt {
        BigInt::from(x)
    }

    #[test]
    fn val_p_example_values() {
        // -135 = -27·5 appears as the constant development coefficient in the
        // worked quartic example
        assert_eq!(val_p(&big(-135), &big(3)).unwrap(), Valuation::Finite(3));
        assert_eq!(val_p(&big(1), &big(7)).unwrap(), Valuation::Finite(0));
        // t² + t + 1 at t = 2 is 7
        assert_eq!(val_p(&big(2 * 2 + 2 + 1), &big(7)).unwrap(), Valuation::Finite(1));
        assert_eq!(val_p(&big(0), &big(5)).unwrap(), Valuation::Infinite);
    }

    #[test]
    fn val_p_rejects_composite_modulus() {
        assert!(val_p(&big(10), &big(6)).is_err());
    }

    #[test]
    fn binom_val3_matches_direct_valuation() {
        assert_eq!(binom_val3(2, 3).unwrap(), 1); // C(9,3) = 84 = 2²·3·7
        assert_eq!(binom_val3(1, 1).unwrap(), 1); // C(3,1) = 3
        assert_eq!(binom_val3(3, 9).unwrap(), 1);
        for n in 1..=4u32 {
            let pow = 3u64.pow(n);
            for m in 1..pow {
                let direct = val_p(&binomial(pow, m), &big(3)).unwrap().expect_finite();
                assert_eq!(binom_val3(n, m).unwrap(), direct, "n={n} m={m}");
            }
        }
        assert!(binom_val3(2, 0).is_err());
        assert!(binom_val3(2, 9).is_err());
    }

    #[test]
    fn u_seq_matches_recurrence_and_period() {
        assert_eq!(u_seq(0), 1);
        assert_eq!(u_seq(2), 0);
        assert_eq!(u_seq(8), 0);
        let (mut prev, mut cur) = (1i64, 1i64); // U_0(1), U_1(1)
        for m in 0..=1000u64 {
            assert_eq!(u_seq(m), prev, "m={m}");
            let next = cur - prev;
            prev = cur;
            cur = next;
        }
        for m in 0..600u64 {
            assert_eq!(u_seq(m), u_seq(m + 6));
        }
    }

    #[test]
    fn e_table_cases() {
        assert_eq!(e_table(0, &big(1)), big(3));
        assert_eq!(e_table(3, &big(123456)), big(1));
        assert_eq!(e_table(7, &big(4)), big(4)); // m ≡ 1 case is t
        assert_eq!(e_table(2, &big(5)), big(4));
        assert_eq!(e_table(4, &big(-2)), big(0));
        assert_eq!(e_table(5, &big(10)), big(11));
    }

    #[test]
    fn factor_round_trips() {
        for x in [-360i64, -1, 1, 2, 97, 343, 2551, 1_000_003, 7 * 7 * 11 * 999983] {
            let f = factor(&big(x));
            assert!(f.is_fully_factored(), "x={x}");
            assert_eq!(f.value(), big(x), "x={x}");
        }
        let f = factor(&big(0));
        assert_eq!(f.sign, 0);
        assert_eq!(f.value(), big(0));
    }

    #[test]
    fn factor_finds_large_prime_pair() {
        // both factors are beyond the trial bound, so rho must split this
        let n = BigInt::from(1_000_003u64) * BigInt::from(1_000_033u64);
        let f = factor(&n);
        assert!(f.is_fully_factored());
        assert_eq!(f.factors.len(), 2);
        assert_eq!(f.value(), n);
    }

    #[test]
    fn primality_spot_checks() {
        assert!(is_prime(&big(2)));
        assert!(is_prime(&big(999983)));
        assert!(!is_prime(&big(1)));
        assert!(!is_prime(&big(999983i64 * 3)));
        assert!(is_prime(&BigInt::from(2305843009213693951u64))); // 2^61 - 1
        assert!(!is_prime(&big(-7)));
    }
}
