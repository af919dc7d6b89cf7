//! Order-one Montes machinery: φ-adic developments, principal Newton
//! polygons with exact rational slopes, residual polynomials over
//! F_p[x]/(φ), p-regularity, and the resulting index valuation.
//!
//! The polygon lattice count is always obtained by direct enumeration;
//! Pick's identity on the region under the polygon runs as a cross-check.

use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::Ratio;
use num_traits::{ToPrimitive, Zero};

use crate::arith::{self, Valuation};
use crate::error::{Error, Result};
use crate::finite_field::{factor_fq, FieldCtx, FqElem, FqPoly};
use crate::zpoly::{discriminant_monic, ZPoly};

pub type Point = (i64, i64);

/// The φ-adic expansion f = Σ aᵢ·φ^i with deg aᵢ < deg φ, over Z.
#[derive(Debug, Clone)]
pub struct Development {
    pub f: ZPoly,
    pub lift: ZPoly,
    pub coeffs: Vec<ZPoly>,
    pub p: u64,
}

/// One negative-slope side of a principal polygon, with its residual data.
#[derive(Debug, Clone)]
pub struct Side {
    pub start: Point,
    pub end: Point,
    pub slope: Ratio<i64>,
    /// gcd of the coordinate differences; equals deg(residual)
    pub degree: i64,
    /// residual polynomial over F_p[x]/(φ), as a polynomial in y
    pub residual: FqPoly,
    pub separable: bool,
}

/// The principal (negative-slope) part of a φ-Newton polygon.
#[derive(Debug, Clone)]
pub struct NewtonPolygon {
    /// finite-valuation development points (i, ν_p(aᵢ))
    pub points: Vec<Point>,
    /// vertices of the principal part; empty when there is no negative side
    pub vertices: Vec<Point>,
    pub sides: Vec<Side>,
    /// the field F_p[x]/(φ) the residual coefficients live in
    pub residual_ctx: Arc<FieldCtx>,
}

/// Per-factor index data inside an [`IndexReport`].
#[derive(Debug, Clone)]
pub struct FactorIndex {
    pub lift: ZPoly,
    pub multiplicity: u64,
    pub polygon: NewtonPolygon,
    /// L_φ: lattice points with x > 0, y > 0 on or under the principal part
    pub lattice_points: u64,
    /// L_φ · deg φ
    pub ind: u64,
    /// every residual on every side is separable
    pub regular: bool,
}

/// ν_p(ind f) as computed from order-one polygons. When `exact` is true the
/// total equals the index valuation; otherwise it is a lower bound.
#[derive(Debug, Clone)]
pub struct IndexReport {
    pub p: u64,
    pub factors: Vec<FactorIndex>,
    pub total: u64,
    pub exact: bool,
}

/// φ-adic development of f by repeated exact division with remainder.
pub fn phi_development(f: &ZPoly, phi: &ZPoly, p: u64) -> Result<Development> {
    if !phi.is_monic() || phi.degree() == Some(0) {
        return Err(Error::parameter("phi_development: φ must be monic of degree ≥ 1"));
    }
    if !arith::is_prime_u64(p) {
        return Err(Error::parameter(format!("phi_development: {p} is not prime")));
    }
    let mut coeffs = Vec::new();
    let mut rest = f.clone();
    while !rest.is_zero() {
        let (q, r) = rest.divrem_monic(phi)?;
        coeffs.push(r);
        rest = q;
    }
    if coeffs.is_empty() {
        coeffs.push(ZPoly::zero());
    }
    let dev = Development {
        f: f.clone(),
        lift: phi.clone(),
        coeffs,
        p,
    };
    debug_assert_eq!(dev.reassemble(), *f);
    Ok(dev)
}

impl Development {
    /// Σ aᵢ·φ^i; must equal f exactly.
    pub fn reassemble(&self) -> ZPoly {
        let mut acc = ZPoly::zero();
        for a in self.coeffs.iter().rev() {
            acc = &(&acc * &self.lift) + a;
        }
        acc
    }

    /// Finite development points (i, ν_p(aᵢ)); zero coefficients are omitted.
    pub fn points(&self) -> Vec<Point> {
        let p = BigInt::from(self.p);
        self.coeffs
            .iter()
            .enumerate()
            .filter_map(|(i, a)| match a.val_p_unchecked(&p) {
                Valuation::Finite(v) => Some((i as i64, v as i64)),
                Valuation::Infinite => None,
            })
            .collect()
    }
}

/// Principal Newton polygon of a development: lower convex hull of the
/// finite points, restricted to its negative-slope sides, with residual
/// polynomials and separability flags attached.
pub fn newton_polygon(dev: &Development) -> Result<NewtonPolygon> {
    let points = dev.points();
    if points.is_empty() {
        return Err(Error::Degenerate(
            "newton_polygon: zero polynomial has no polygon".to_string(),
        ));
    }
    if points[0].0 > 1 {
        // φ² divides f over Z; the region under the polygon is unbounded on
        // the left and order-one counting does not apply (f is then not
        // squarefree anyway)
        return Err(Error::Degenerate(
            "newton_polygon: development coefficients a₀ and a₁ both vanish".to_string(),
        ));
    }
    let hull = lower_hull(&points);
    // keep the strictly negative-slope chain
    let mut vertices = vec![hull[0]];
    for w in hull.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b.1 < a.1 {
            vertices.push(b);
        } else {
            break;
        }
    }
    if vertices.len() == 1 {
        vertices.clear();
    }

    let residual_ctx = Arc::new(residual_field(dev)?);
    let mut sides = Vec::with_capacity(vertices.len().saturating_sub(1));
    for w in vertices.windows(2) {
        let (start, end) = (w[0], w[1]);
        let slope = Ratio::new(end.1 - start.1, end.0 - start.0);
        let degree = num_integer::gcd(start.1 - end.1, end.0 - start.0);
        let residual = residual_poly(dev, &residual_ctx, start, end);
        debug_assert_eq!(residual.degree(), Some(degree as usize));
        let separable = residual_is_separable(&residual_ctx, &residual)?;
        sides.push(Side {
            start,
            end,
            slope,
            degree,
            residual,
            separable,
        });
    }
    Ok(NewtonPolygon {
        points,
        vertices,
        sides,
        residual_ctx,
    })
}

/// Lower convex hull (strict vertices, collinear points dropped) of points
/// already sorted by abscissa.
fn lower_hull(points: &[Point]) -> Vec<Point> {
    let mut hull: Vec<Point> = Vec::with_capacity(points.len());
    for &pt in points {
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            // cross ≤ 0 means b is on or above segment a–pt
            let cross = (b.0 - a.0) as i128 * (pt.1 - a.1) as i128
                - (b.1 - a.1) as i128 * (pt.0 - a.0) as i128;
            if cross <= 0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(pt);
    }
    hull
}

/// F_p[x]/(φ mod p); degree-one lifts give F_p itself.
fn residual_field(dev: &Development) -> Result<FieldCtx> {
    let p = dev.p;
    let codes: Vec<u64> = dev
        .lift
        .coeffs()
        .iter()
        .map(|c| {
            let r = num_integer::Integer::mod_floor(c, &BigInt::from(p));
            r.to_u64().expect("reduced residue fits")
        })
        .collect();
    FieldCtx::with_modulus(p, codes)
}

/// Residual polynomial of a side: R_S(y) = Σ res(x₀ + i·step)·y^i where
/// res picks the reduction red_φ(a_k / p^{ν}) for points on the polygon and
/// 0 for points above it.
pub fn residual_poly(
    dev: &Development,
    res_ctx: &FieldCtx,
    start: Point,
    end: Point,
) -> FqPoly {
    let degree = num_integer::gcd(start.1 - end.1, end.0 - start.0);
    let step = (end.0 - start.0) / degree;
    let mut coeffs = Vec::with_capacity(degree as usize + 1);
    for i in 0..=degree {
        let x = start.0 + i * step;
        coeffs.push(residual_coefficient(dev, res_ctx, start, end, x));
    }
    debug_assert!(coeffs.first().map_or(false, |c| c.0 != 0), "left endpoint");
    debug_assert!(coeffs.last().map_or(false, |c| c.0 != 0), "right endpoint");
    FqPoly::from_elems(coeffs)
}

/// res(k): red_φ(a_k) when (k, ν_p(a_k)) lies on the segment, else 0.
fn residual_coefficient(
    dev: &Development,
    res_ctx: &FieldCtx,
    start: Point,
    end: Point,
    k: i64,
) -> FqElem {
    let a = &dev.coeffs[k as usize];
    let p = BigInt::from(dev.p);
    let v = match a.val_p_unchecked(&p) {
        Valuation::Finite(v) => v as i64,
        Valuation::Infinite => return res_ctx.zero(),
    };
    // on the line through start–end?
    if (v - start.1) * (end.0 - start.0) != (k - start.0) * (end.1 - start.1) {
        return res_ctx.zero();
    }
    red_phi(res_ctx, a, &p, v as u64)
}

/// red_φ(a) = (a / p^{ν_p(a)}) mod (p, φ), encoded as an element of
/// F_p[x]/(φ). Requires deg a < deg φ, which developments guarantee.
fn red_phi(res_ctx: &FieldCtx, a: &ZPoly, p: &BigInt, v: u64) -> FqElem {
    let scale = p.pow(u32::try_from(v).expect("valuation fits u32"));
    let mut digits = vec![0u64; res_ctx.k() as usize];
    for (i, c) in a.coeffs().iter().enumerate() {
        let exact = c / &scale;
        debug_assert_eq!(&exact * &scale, *c, "division by p^ν must be exact");
        let r = num_integer::Integer::mod_floor(&exact, p);
        digits[i] = r.to_u64().expect("residue fits");
    }
    res_ctx.encode(&digits)
}

fn residual_is_separable(ctx: &FieldCtx, r: &FqPoly) -> Result<bool> {
    let dr = r.derivative(ctx);
    if dr.is_zero() {
        return Ok(r.degree() == Some(0));
    }
    let g = r.gcd(ctx, &dr)?;
    Ok(g.degree() == Some(0))
}

/// Lattice points with x > 0, y > 0 on or under the principal polygon, by
/// direct enumeration over integer abscissae. Pick's identity on the region
/// is asserted in debug builds.
pub fn lattice_count(polygon: &NewtonPolygon) -> u64 {
    let count = lattice_count_from_vertices(&polygon.vertices);
    debug_assert_eq!(Some(count), pick_count(&polygon.vertices));
    count
}

/// Enumeration count for an arbitrary negative-slope vertex chain.
pub fn lattice_count_from_vertices(vertices: &[Point]) -> u64 {
    if vertices.len() < 2 {
        return 0;
    }
    let mut count: i64 = 0;
    for w in vertices.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (dx, dy) = (b.0 - a.0, b.1 - a.1);
        // abscissae covered by this side, excluding the left endpoint of all
        // but the first side so columns are not double counted
        let x_from = if a == vertices[0] { a.0.max(1) } else { a.0 + 1 };
        for x in x_from..=b.0 {
            if x < 1 {
                continue;
            }
            let num = a.1 * dx + (x - a.0) * dy;
            let y_max = num.div_euclid(dx);
            if y_max > 0 {
                count += y_max;
            }
        }
    }
    count as u64
}

/// Pick-identity route to the same count: I = A + 1 − B/2 interior points of
/// the closed region under the polygon, plus every boundary lattice point
/// with x > 0 and y > 0 (all of which lie on or under the polygon).
/// Returns None for regions the identity does not cover.
pub fn pick_count(vertices: &[Point]) -> Option<u64> {
    if vertices.len() < 2 {
        return Some(0);
    }
    let first = vertices[0];
    let last = *vertices.last().expect("nonempty");
    if first.0 > 1 || first.1 < 1 || last.0 < 1 {
        return None;
    }
    // closed lattice polygon: (x₀, 0) → chain → (x_end, y_end) → (x_end, 0)
    let mut ring: Vec<Point> = vec![(first.0, 0)];
    ring.extend_from_slice(vertices);
    if last.1 > 0 {
        ring.push((last.0, 0));
    }
    ring.dedup();
    if ring.len() < 3 {
        return None;
    }
    let n = ring.len();
    let mut twice_area: i128 = 0;
    let mut boundary: i128 = 0;
    let mut positive_boundary: u64 = 0;
    for i in 0..n {
        let (x0, y0) = ring[i];
        let (x1, y1) = ring[(i + 1) % n];
        twice_area += x0 as i128 * y1 as i128 - x1 as i128 * y0 as i128;
        let g = num_integer::gcd((x1 - x0).abs(), (y1 - y0).abs());
        boundary += g as i128;
        // lattice points of this edge, start included, end excluded
        for j in 0..g {
            let x = x0 + j * (x1 - x0) / g;
            let y = y0 + j * (y1 - y0) / g;
            if x > 0 && y > 0 {
                positive_boundary += 1;
            }
        }
    }
    let interior = (twice_area.abs() + 2 - boundary) / 2;
    u64::try_from(interior).ok().map(|i| i + positive_boundary)
}

/// ν_p(ind f) from order-one Newton polygons: factor f mod p, lift each
/// irreducible factor by least nonnegative residues, and sum the per-factor
/// lattice counts weighted by the factor degree. `exact` is set when every
/// residual polynomial is separable (f is p-regular); otherwise the total is
/// a lower bound.
pub fn index_p(f: &ZPoly, p: u64) -> Result<IndexReport> {
    if !arith::is_prime_u64(p) {
        return Err(Error::parameter(format!("index_p: {p} is not prime")));
    }
    if !f.is_monic() || f.degree().map_or(true, |d| d == 0) {
        return Err(Error::parameter("index_p: f must be monic of degree ≥ 1"));
    }
    if !is_squarefree_q(f)? {
        return Err(Error::domain("index_p: f is not squarefree over Q"));
    }

    let fp = FieldCtx::new(p, 1)?;
    let fbar = FqPoly::from_zpoly(&fp, f);
    let factorization = factor_fq(&fp, &fbar)?;

    let mut factors = Vec::new();
    let mut total = 0u64;
    let mut exact = true;
    for (phibar, mult) in &factorization.factors {
        let lift = ZPoly::from_coeffs(
            phibar
                .coeffs()
                .iter()
                .map(|c| BigInt::from(c.0))
                .collect(),
        );
        let dev = phi_development(f, &lift, p)?;
        let polygon = newton_polygon(&dev)?;
        let lattice_points = lattice_count(&polygon);
        let deg_phi = lift.degree().expect("factor is nonzero") as u64;
        let ind = lattice_points * deg_phi;
        let regular = polygon.sides.iter().all(|s| s.separable);
        exact &= regular;
        total += ind;
        factors.push(FactorIndex {
            lift,
            multiplicity: *mult,
            polygon,
            lattice_points,
            ind,
            regular,
        });
    }
    Ok(IndexReport {
        p,
        factors,
        total,
        exact,
    })
}

/// Squarefreeness over Q: a degree-zero gcd(f, f′) modulo one large prime
/// certifies it outright; otherwise fall back to the exact discriminant.
fn is_squarefree_q(f: &ZPoly) -> Result<bool> {
    const CERT_PRIME: u64 = 2_305_843_009_213_693_951; // 2^61 − 1
    let ctx = FieldCtx::new(CERT_PRIME, 1)?;
    let fbar = FqPoly::from_zpoly(&ctx, f);
    if fbar.degree() == f.degree() {
        let g = fbar.gcd(&ctx, &fbar.derivative(&ctx))?;
        if g.degree() == Some(0) {
            return Ok(true);
        }
    }
    Ok(!discriminant_monic(f)?.is_zero())
}
