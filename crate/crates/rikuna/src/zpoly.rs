//! Dense univariate polynomials with arbitrary-precision integer
//! coefficients, plus the exact resultant/discriminant kernel (fraction-free
//! Bareiss elimination on the Sylvester matrix — no floating point, no
//! modular shortcuts).

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::arith::{val_p_unchecked, Valuation};
use crate::error::{Error, Result};

/// Dense integer polynomial; `coeffs[i]` is the coefficient of x^i and the
/// top entry is nonzero (the zero polynomial stores no coefficients).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ZPoly {
    coeffs: Vec<BigInt>,
}

impl ZPoly {
    pub fn zero() -> Self {
        ZPoly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        ZPoly::constant(BigInt::one())
    }

    pub fn constant(c: BigInt) -> Self {
        ZPoly::from_coeffs(vec![c])
    }

    /// Builds from ascending coefficients, trimming leading zeros.
    pub fn from_coeffs(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().map_or(false, Zero::is_zero) {
            coeffs.pop();
        }
        ZPoly { coeffs }
    }

    pub fn from_i64s(coeffs: &[i64]) -> Self {
        ZPoly::from_coeffs(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    /// The monomial c·x^deg.
    pub fn monomial(c: BigInt, deg: usize) -> Self {
        if c.is_zero() {
            return ZPoly::zero();
        }
        let mut coeffs = vec![BigInt::zero(); deg + 1];
        coeffs[deg] = c;
        ZPoly { coeffs }
    }

    pub fn x() -> Self {
        ZPoly::monomial(BigInt::one(), 1)
    }

    /// x − c.
    pub fn x_minus(c: &BigInt) -> Self {
        ZPoly::from_coeffs(vec![-c, BigInt::one()])
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, or None for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    /// Coefficient of x^i (zero beyond the degree).
    pub fn coeff(&self, i: usize) -> BigInt {
        self.coeffs.get(i).cloned().unwrap_or_else(BigInt::zero)
    }

    pub fn leading(&self) -> Option<&BigInt> {
        self.coeffs.last()
    }

    pub fn is_monic(&self) -> bool {
        self.leading().map_or(false, One::is_one)
    }

    pub fn eval(&self, x: &BigInt) -> BigInt {
        let mut acc = BigInt::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn derivative(&self) -> ZPoly {
        if self.coeffs.len() <= 1 {
            return ZPoly::zero();
        }
        ZPoly::from_coeffs(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * BigInt::from(i))
                .collect(),
        )
    }

    pub fn scale(&self, c: &BigInt) -> ZPoly {
        if c.is_zero() {
            return ZPoly::zero();
        }
        ZPoly::from_coeffs(self.coeffs.iter().map(|a| a * c).collect())
    }

    /// Division with remainder by a monic divisor; exact over Z.
    pub fn divrem_monic(&self, div: &ZPoly) -> Result<(ZPoly, ZPoly)> {
        if !div.is_monic() {
            return Err(Error::parameter("divrem_monic: divisor is not monic"));
        }
        let d = div.degree().expect("monic divisor is nonzero");
        let mut rem = self.coeffs.clone();
        if rem.len() <= d {
            return Ok((ZPoly::zero(), self.clone()));
        }
        let mut quot = vec![BigInt::zero(); rem.len() - d];
        for i in (d..rem.len()).rev() {
            let c = std::mem::replace(&mut rem[i], BigInt::zero());
            if c.is_zero() {
                continue;
            }
            for (j, b) in div.coeffs.iter().take(d).enumerate() {
                let t = b * &c;
                rem[i - d + j] -= t;
            }
            quot[i - d] = c;
        }
        rem.truncate(d);
        Ok((ZPoly::from_coeffs(quot), ZPoly::from_coeffs(rem)))
    }

    /// Coefficients of the expansion of `self` in powers of (x − c), i.e. the
    /// Taylor coefficients f^{(m)}(c)/m!, computed by repeated synthetic
    /// division (always exact over Z).
    pub fn taylor_at(&self, c: &BigInt) -> Vec<BigInt> {
        let n = self.coeffs.len();
        if n == 0 {
            return Vec::new();
        }
        let mut work = self.coeffs.clone();
        let mut out = Vec::with_capacity(n);
        for m in 0..n {
            // synthetic division of work[m..] by (x − c); remainder lands at work[m]
            for i in (m..n - 1).rev() {
                let t = &work[i + 1] * c;
                work[i] += t;
            }
            out.push(work[m].clone());
        }
        out
    }

    /// Minimum coefficient valuation; `Infinite` only for the zero polynomial.
    pub fn val_p(&self, p: &BigInt) -> Result<Valuation> {
        if !crate::arith::is_prime(p) {
            return Err(Error::parameter(format!("val_p: {p} is not prime")));
        }
        Ok(self.val_p_unchecked(p))
    }

    pub(crate) fn val_p_unchecked(&self, p: &BigInt) -> Valuation {
        let mut best = Valuation::Infinite;
        for c in &self.coeffs {
            let v = val_p_unchecked(c, p);
            if v < best {
                best = v;
            }
            if best == Valuation::Finite(0) {
                break;
            }
        }
        best
    }

    pub fn pow(&self, e: u32) -> ZPoly {
        let mut acc = ZPoly::one();
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }
}

impl<'a> Add for &'a ZPoly {
    type Output = ZPoly;
    fn add(self, rhs: &'a ZPoly) -> ZPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            out.push(self.coeff(i) + rhs.coeff(i));
        }
        ZPoly::from_coeffs(out)
    }
}

impl<'a> Sub for &'a ZPoly {
    type Output = ZPoly;
    fn sub(self, rhs: &'a ZPoly) -> ZPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            out.push(self.coeff(i) - rhs.coeff(i));
        }
        ZPoly::from_coeffs(out)
    }
}

impl<'a> Mul for &'a ZPoly {
    type Output = ZPoly;
    fn mul(self, rhs: &'a ZPoly) -> ZPoly {
        if self.is_zero() || rhs.is_zero() {
            return ZPoly::zero();
        }
        let mut out = vec![BigInt::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        ZPoly::from_coeffs(out)
    }
}

impl Neg for &ZPoly {
    type Output = ZPoly;
    fn neg(self) -> ZPoly {
        ZPoly::from_coeffs(self.coeffs.iter().map(|c| -c).collect())
    }
}

impl fmt::Display for ZPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let mag = c.abs();
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
                first = false;
            } else if c.is_negative() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            match i {
                0 => write!(f, "{mag}")?,
                _ => {
                    if !mag.is_one() {
                        write!(f, "{mag}*")?;
                    }
                    if i == 1 {
                        write!(f, "x")?;
                    } else {
                        write!(f, "x^{i}")?;
                    }
                }
            }
        }
        Ok(())
    }
}

/// Exact resultant Res(f, g) via Bareiss fraction-free elimination on the
/// Sylvester matrix. Pivoting is by row swap with sign tracking; a zero
/// column yields a zero resultant.
pub fn resultant(f: &ZPoly, g: &ZPoly) -> BigInt {
    let (Some(m), Some(n)) = (f.degree(), g.degree()) else {
        return BigInt::zero(); // resultant with the zero polynomial
    };
    if m == 0 && n == 0 {
        return BigInt::one();
    }
    if m == 0 {
        return f.coeff(0).pow(n as u32);
    }
    if n == 0 {
        return g.coeff(0).pow(m as u32);
    }
    let size = m + n;
    let mut mat = vec![vec![BigInt::zero(); size]; size];
    for row in 0..n {
        for (k, c) in f.coeffs.iter().rev().enumerate() {
            mat[row][row + k] = c.clone();
        }
    }
    for row in 0..m {
        for (k, c) in g.coeffs.iter().rev().enumerate() {
            mat[n + row][row + k] = c.clone();
        }
    }

    let mut sign = 1i8;
    let mut prev = BigInt::one();
    for k in 0..size {
        if mat[k][k].is_zero() {
            let pivot = (k + 1..size).find(|&i| !mat[i][k].is_zero());
            match pivot {
                Some(i) => {
                    mat.swap(k, i);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        if k == size - 1 {
            break;
        }
        for i in k + 1..size {
            for j in k + 1..size {
                let num = &mat[i][j] * &mat[k][k] - &mat[i][k] * &mat[k][j];
                let (q, r) = num_integer::Integer::div_rem(&num, &prev);
                debug_assert!(r.is_zero(), "Bareiss division must be exact");
                mat[i][j] = q;
            }
            mat[i][k] = BigInt::zero();
        }
        prev = mat[k][k].clone();
    }
    let det = mat[size - 1][size - 1].clone();
    if sign < 0 {
        -det
    } else {
        det
    }
}

/// Exact discriminant of a monic polynomial:
/// (−1)^{d(d−1)/2} · Res(f, f′).
pub fn discriminant_monic(f: &ZPoly) -> Result<BigInt> {
    if !f.is_monic() {
        return Err(Error::parameter("discriminant_monic: f is not monic"));
    }
    let d = f.degree().expect("monic polynomial is nonzero");
    if d == 0 {
        return Err(Error::parameter("discriminant of a constant"));
    }
    if d == 1 {
        return Ok(BigInt::one());
    }
    let res = resultant(f, &f.derivative());
    let flip = (d * (d - 1) / 2) % 2 == 1;
    Ok(if flip { -res } else { res })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zp(cs: &[i64]) -> ZPoly {
        ZPoly::from_i64s(cs)
    }

    #[test]
    fn divrem_and_reassembly() {
        let f = zp(&[7, 11, 12, 23, 1]);
        let phi = zp(&[2, 1]); // x + 2
        let (q, r) = f.divrem_monic(&phi).unwrap();
        assert_eq!(&(&q * &phi) + &r, f);
        assert!(r.degree().map_or(true, |d| d < 1));
    }

    #[test]
    fn taylor_shift_matches_worked_quartic() {
        // f(x) = x⁴ + 23x³ + 12x² + 11x + 7 around x = −2
        let f = zp(&[7, 11, 12, 23, 1]);
        let c = BigInt::from(-2);
        let got = f.taylor_at(&c);
        let want: Vec<BigInt> = [-135i64, 207, -102, 15, 1]
            .iter()
            .map(|&x| BigInt::from(x))
            .collect();
        assert_eq!(got, want);
        // reassemble Σ a_m (x − c)^m
        let mut acc = ZPoly::zero();
        let shift = ZPoly::x_minus(&c);
        for (m, a) in got.iter().enumerate() {
            acc = &acc + &ZPoly::monomial(a.clone(), 0).mul(&shift.pow(m as u32));
        }
        assert_eq!(acc, f);
    }

    #[test]
    fn discriminant_small_cases() {
        // x³ − 3x − 1 has discriminant 81
        assert_eq!(discriminant_monic(&zp(&[-1, -3, 0, 1])).unwrap(), BigInt::from(81));
        // x² − 1: roots ±1, disc = 4
        assert_eq!(discriminant_monic(&zp(&[-1, 0, 1])).unwrap(), BigInt::from(4));
        // x² + 1: disc = −4
        assert_eq!(discriminant_monic(&zp(&[1, 0, 1])).unwrap(), BigInt::from(-4));
        // cubic x³ + ax² + bx + c sanity: x³ − 3x² − 6x − 1 → 729
        assert_eq!(
            discriminant_monic(&zp(&[-1, -6, -3, 1])).unwrap(),
            BigInt::from(729)
        );
        // repeated root: (x−1)² has disc 0
        assert_eq!(discriminant_monic(&zp(&[1, -2, 1])).unwrap(), BigInt::from(0));
    }

    #[test]
    fn resultant_multiplicative_in_roots() {
        // Res(x−a, x−b) = b − a ... with our row convention Res(f,g) = ∏ g(roots of f)
        let f = zp(&[-2, 1]); // x − 2
        let g = zp(&[-5, 1]); // x − 5
        let r = resultant(&f, &g);
        assert_eq!(r.magnitude().to_string(), "3");
        // Res(f, g·h) = Res(f,g)·Res(f,h)
        let h = zp(&[1, 3, 1]);
        let gh = &g * &h;
        assert_eq!(resultant(&f, &gh), resultant(&f, &g) * resultant(&f, &h));
    }

    #[test]
    fn val_p_of_polynomial_is_min_over_coefficients() {
        let f = zp(&[27, 18, 9]);
        assert_eq!(f.val_p(&BigInt::from(3)).unwrap(), Valuation::Finite(2));
        assert_eq!(ZPoly::zero().val_p(&BigInt::from(3)).unwrap(), Valuation::Infinite);
    }

    #[test]
    fn display_readable() {
        assert_eq!(zp(&[-1, -3, 0, 1]).to_string(), "x^3 - 3*x - 1");
        assert_eq!(ZPoly::zero().to_string(), "0");
        assert_eq!(zp(&[2]).to_string(), "2");
    }
}
