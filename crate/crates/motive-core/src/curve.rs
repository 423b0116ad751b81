use crate::error::{Error, Result};
use crate::field::PrimeField;
use crate::finite::lcm_u64;
use crate::limits::check_enumeration;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Short Weierstrass curve y^2 = x^3 + a x + b over a small prime field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Curve {
    field: PrimeField,
    a: i64,
    b: i64,
}

/// A point remembers its curve so that mixing curves is a checked error
/// rather than silent nonsense.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CurvePoint {
    curve: Curve,
    /// None encodes the point at infinity
    coords: Option<(i64, i64)>,
}

impl Curve {
    pub fn new(field: PrimeField, a: i64, b: i64) -> Result<Self> {
        let a = field.reduce(a);
        let b = field.reduce(b);
        let disc = field.add(
            field.mul(4, field.mul(a, field.mul(a, a))),
            field.mul(27, field.mul(b, b)),
        );
        if disc == 0 {
            return Err(Error::SingularCurve { a, b, p: field.p() });
        }
        Ok(Curve { field, a, b })
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn a(&self) -> i64 {
        self.a
    }

    pub fn b(&self) -> i64 {
        self.b
    }

    pub fn infinity(&self) -> CurvePoint {
        CurvePoint { curve: *self, coords: None }
    }

    pub fn point(&self, x: i64, y: i64) -> Result<CurvePoint> {
        let x = self.field.reduce(x);
        let y = self.field.reduce(y);
        let rhs = self.field.add(
            self.field.mul(x, self.field.mul(x, x)),
            self.field.add(self.field.mul(self.a, x), self.b),
        );
        if self.field.mul(y, y) != rhs {
            return Err(Error::InvalidGroup(format!(
                "({x}, {y}) does not lie on y^2 = x^3 + {}x + {} over F_{}",
                self.a,
                self.b,
                self.field.p()
            )));
        }
        Ok(CurvePoint { curve: *self, coords: Some((x, y)) })
    }

    fn points_for_x(&self, x: i64, roots: &[Vec<i64>]) -> Vec<CurvePoint> {
        let f = self.field;
        let rhs = f.add(f.mul(x, f.mul(x, x)), f.add(f.mul(self.a, x), self.b));
        roots[rhs as usize]
            .iter()
            .map(|&y| CurvePoint { curve: *self, coords: Some((x, y)) })
            .collect()
    }

    fn square_root_table(&self) -> Vec<Vec<i64>> {
        let p = self.field.p();
        let mut table = vec![Vec::new(); p as usize];
        for y in 0..p {
            table[self.field.mul(y, y) as usize].push(y);
        }
        table
    }

    /// Every rational point, found by exhausting x. The identity comes first;
    /// affine points follow in lexicographic order.
    pub fn points(&self) -> Result<Vec<CurvePoint>> {
        let p = self.field.p();
        check_enumeration(p as u128 + 1).map_err(|_| Error::FieldTooLarge(p))?;
        let roots = self.square_root_table();
        let mut out = vec![self.infinity()];
        #[cfg(feature = "parallel")]
        {
            let mut affine: Vec<CurvePoint> = (0..p)
                .into_par_iter()
                .flat_map_iter(|x| self.points_for_x(x, &roots))
                .collect();
            affine.sort_unstable();
            out.extend(affine);
        }
        #[cfg(not(feature = "parallel"))]
        {
            for x in 0..p {
                out.extend(self.points_for_x(x, &roots));
            }
        }
        Ok(out)
    }

    /// Single-threaded variant of [`Curve::points`].
    pub fn points_seq(&self) -> Result<Vec<CurvePoint>> {
        let p = self.field.p();
        check_enumeration(p as u128 + 1).map_err(|_| Error::FieldTooLarge(p))?;
        let roots = self.square_root_table();
        let mut out = vec![self.infinity()];
        for x in 0..p {
            out.extend(self.points_for_x(x, &roots));
        }
        Ok(out)
    }
}

impl CurvePoint {
    pub fn curve(&self) -> Curve {
        self.curve
    }

    pub fn is_infinity(&self) -> bool {
        self.coords.is_none()
    }

    pub fn xy(&self) -> Option<(i64, i64)> {
        self.coords
    }
}

pub fn curve_neg(p: &CurvePoint) -> CurvePoint {
    match p.coords {
        None => *p,
        Some((x, y)) => {
            CurvePoint { curve: p.curve, coords: Some((x, p.curve.field.neg(y))) }
        }
    }
}

pub fn curve_add(p: &CurvePoint, q: &CurvePoint) -> Result<CurvePoint> {
    if p.curve != q.curve {
        return Err(Error::MismatchedCurves);
    }
    let f = p.curve.field;
    let (x1, y1) = match p.coords {
        None => return Ok(*q),
        Some(c) => c,
    };
    let (x2, y2) = match q.coords {
        None => return Ok(*p),
        Some(c) => c,
    };
    let lambda = if x1 == x2 {
        if f.add(y1, y2) == 0 {
            return Ok(p.curve.infinity());
        }
        // tangent slope (3 x^2 + a) / (2 y)
        f.div(f.add(f.mul(3, f.mul(x1, x1)), p.curve.a), f.mul(2, y1))?
    } else {
        f.div(f.sub(y2, y1), f.sub(x2, x1))?
    };
    let x3 = f.sub(f.sub(f.mul(lambda, lambda), x1), x2);
    let y3 = f.sub(f.mul(lambda, f.sub(x1, x3)), y1);
    Ok(CurvePoint { curve: p.curve, coords: Some((x3, y3)) })
}

pub fn curve_sub(p: &CurvePoint, q: &CurvePoint) -> Result<CurvePoint> {
    curve_add(p, &curve_neg(q))
}

pub fn curve_scalar_mul(k: i64, p: &CurvePoint) -> Result<CurvePoint> {
    let (mut k, mut base) = if k < 0 { (-(k as i128), curve_neg(p)) } else { (k as i128, *p) };
    let mut acc = p.curve.infinity();
    while k > 0 {
        if k & 1 == 1 {
            acc = curve_add(&acc, &base)?;
        }
        base = curve_add(&base, &base)?;
        k >>= 1;
    }
    Ok(acc)
}

/// Order of a point, given the group order to factor against.
fn point_order(p: &CurvePoint, group_order: u64) -> Result<u64> {
    let mut ord = group_order;
    for q in crate::field::prime_factors(group_order) {
        while ord % q == 0 && curve_scalar_mul((ord / q) as i64, p)?.is_infinity() {
            ord /= q;
        }
    }
    Ok(ord)
}

/// Group structure of E(F_p): Z/d1 x Z/d2 with d1 | d2 (d1 omitted when 1).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CurveGroupStructure {
    pub order: u64,
    /// [d2] for cyclic groups, [d1, d2] otherwise, with d1 | d2 and d1 > 1
    pub invariant_factors: Vec<u64>,
    /// independent generators matching `invariant_factors`
    pub generators: Vec<CurvePoint>,
}

pub fn curve_group_structure(curve: &Curve) -> Result<CurveGroupStructure> {
    let points = curve.points()?;
    let n = points.len() as u64;
    // exponent of the group = lcm of point orders
    let mut d2 = 1u64;
    let mut p2 = curve.infinity();
    for pt in &points {
        let o = point_order(pt, n)?;
        if lcm_u64(d2, o) > d2 {
            d2 = lcm_u64(d2, o);
        }
    }
    for pt in &points {
        if point_order(pt, n)? == d2 {
            p2 = *pt;
            break;
        }
    }
    if n % d2 != 0 {
        return Err(Error::InvalidGroup("group exponent does not divide the order".into()));
    }
    let d1 = n / d2;
    if d1 == 1 {
        return Ok(CurveGroupStructure { order: n, invariant_factors: vec![d2], generators: vec![p2] });
    }
    if d2 % d1 != 0 {
        return Err(Error::InvalidGroup("invariant factors fail divisibility".into()));
    }

    // the cyclic part generated by p2, kept as a set for membership tests
    let mut h = std::collections::BTreeSet::new();
    let mut acc = curve.infinity();
    for _ in 0..d2 {
        h.insert(acc);
        acc = curve_add(&acc, &p2)?;
    }

    // a point whose image generates E(F_p) / <p2>, of quotient order d1
    let divisors: Vec<u64> = (1..=d1).filter(|k| d1 % k == 0).collect();
    let mut p1 = None;
    'outer: for pt in &points {
        for &k in &divisors {
            if h.contains(&curve_scalar_mul(k as i64, pt)?) {
                if k == d1 {
                    p1 = Some(*pt);
                    break 'outer;
                }
                continue 'outer;
            }
        }
    }
    let p1 = p1.ok_or_else(|| Error::InvalidGroup("no generator for the quotient part".into()))?;

    // correct p1 so that d1 * p1 = 0 rather than a multiple of p2
    let target = curve_scalar_mul(d1 as i64, &p1)?;
    let mut s = 0u64;
    let mut acc = curve.infinity();
    while acc != target {
        acc = curve_add(&acc, &p2)?;
        s += 1;
        if s > d2 {
            return Err(Error::InvalidGroup("discrete log failure in the cyclic part".into()));
        }
    }
    if s % d1 != 0 {
        return Err(Error::InvalidGroup("quotient generator cannot be corrected".into()));
    }
    let p1 = curve_sub(&p1, &curve_scalar_mul((s / d1) as i64, &p2)?)?;
    if point_order(&p1, n)? != d1 {
        return Err(Error::InvalidGroup("corrected generator has the wrong order".into()));
    }
    Ok(CurveGroupStructure {
        order: n,
        invariant_factors: vec![d1, d2],
        generators: vec![p1, p2],
    })
}

/// A basis of E[n](F_p) when the full n-torsion is rational.
pub fn torsion_basis(curve: &Curve, n: u64) -> Result<(CurvePoint, CurvePoint)> {
    if n < 2 {
        return Err(Error::TorsionUnavailable(format!("torsion level n={n} must be >= 2")));
    }
    let s = curve_group_structure(curve)?;
    let (d1, d2) = match s.invariant_factors.as_slice() {
        [d2] => (1u64, *d2),
        [d1, d2] => (*d1, *d2),
        _ => return Err(Error::InvalidGroup("unexpected invariant factors".into())),
    };
    if d1 % n != 0 {
        return Err(Error::TorsionUnavailable(format!(
            "E[{n}] is not fully rational over F_{} (group is Z/{d1} x Z/{d2})",
            curve.field.p()
        )));
    }
    let g1 = &s.generators[s.generators.len() - 2];
    let g2 = &s.generators[s.generators.len() - 1];
    Ok((curve_scalar_mul((d1 / n) as i64, g1)?, curve_scalar_mul((d2 / n) as i64, g2)?))
}

/// All points killed by n, in deterministic order.
pub fn torsion_points(curve: &Curve, n: u64) -> Result<Vec<CurvePoint>> {
    let points = curve.points()?;
    let mut out = Vec::new();
    for pt in points {
        if curve_scalar_mul(n as i64, &pt)?.is_infinity() {
            out.push(pt);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e5() -> Curve {
        Curve::new(PrimeField::new(5).unwrap(), 1, 0).unwrap()
    }

    #[test]
    fn rejects_singular_curves() {
        let f = PrimeField::new(5).unwrap();
        assert!(matches!(Curve::new(f, 0, 0), Err(Error::SingularCurve { .. })));
    }

    #[test]
    fn group_law_is_exhaustively_abelian_and_associative() {
        // y^2 = x^3 + x over F_5 has 4 points; check the whole Cayley table
        let points = e5().points().unwrap();
        assert_eq!(points.len(), 4);
        for p in &points {
            assert!(curve_add(p, &e5().infinity()).unwrap() == *p);
            assert!(curve_add(p, &curve_neg(p)).unwrap().is_infinity());
            for q in &points {
                let pq = curve_add(p, q).unwrap();
                assert_eq!(pq, curve_add(q, p).unwrap());
                for r in &points {
                    let left = curve_add(&pq, r).unwrap();
                    let right = curve_add(p, &curve_add(q, r).unwrap()).unwrap();
                    assert_eq!(left, right);
                }
            }
        }
    }

    #[test]
    fn full_two_torsion_over_f5() {
        let (t1, t2) = torsion_basis(&e5(), 2).unwrap();
        assert!(curve_scalar_mul(2, &t1).unwrap().is_infinity());
        assert!(curve_scalar_mul(2, &t2).unwrap().is_infinity());
        assert_ne!(t1, t2);
        assert!(!t1.is_infinity());
        assert!(!t2.is_infinity());
        let s = curve_group_structure(&e5()).unwrap();
        assert_eq!(s.order, 4);
        assert_eq!(s.invariant_factors, vec![2, 2]);
    }

    #[test]
    fn torsion_unavailable_cases() {
        assert!(matches!(torsion_basis(&e5(), 1), Err(Error::TorsionUnavailable(_))));
        assert!(matches!(torsion_basis(&e5(), 3), Err(Error::TorsionUnavailable(_))));
        // y^2 = x^3 + 1 over F_5 is cyclic of order 6, so E[2] is not full
        let c = Curve::new(PrimeField::new(5).unwrap(), 0, 1).unwrap();
        assert!(matches!(torsion_basis(&c, 2), Err(Error::TorsionUnavailable(_))));
    }

    #[test]
    fn mismatched_curves_error() {
        let f = PrimeField::new(5).unwrap();
        let c1 = Curve::new(f, 1, 0).unwrap();
        let c2 = Curve::new(f, 0, 1).unwrap();
        let p = c1.point(0, 0).unwrap();
        let q = c2.point(0, 1).unwrap();
        assert!(matches!(curve_add(&p, &q), Err(Error::MismatchedCurves)));
    }

    #[test]
    fn structure_matches_enumeration_for_several_curves() {
        for (p, a, b) in [(5, 1, 0), (5, 0, 1), (7, 6, 0), (7, 0, 2), (11, 3, 5), (13, 1, 1)] {
            let f = PrimeField::new(p).unwrap();
            let c = Curve::new(f, a, b).unwrap();
            let s = curve_group_structure(&c).unwrap();
            assert_eq!(s.order as usize, c.points().unwrap().len());
            let product: u64 = s.invariant_factors.iter().product();
            assert_eq!(product, s.order);
            for (g, &d) in s.generators.iter().zip(&s.invariant_factors) {
                assert!(curve_scalar_mul(d as i64, g).unwrap().is_infinity());
                assert_eq!(point_order(g, s.order).unwrap(), d);
            }
        }
    }
}
