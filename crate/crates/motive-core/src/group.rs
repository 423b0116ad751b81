use crate::curve::{
    curve_add, curve_group_structure, curve_neg, curve_scalar_mul, torsion_points, Curve,
    CurvePoint,
};
use crate::error::{Error, Result};
use crate::field::PrimeField;
use crate::finite::FiniteAbelianGroup;
use crate::semiabelian::SemiAbelianModel;
use crate::torus::{unit_contains, unit_discrete_log, unit_generator, unit_group_order};

/// The commutative groups a desk computation can take values in.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DeskGroup {
    /// Z^rank written additively
    Lattice { rank: usize },
    Finite(FiniteAbelianGroup),
    /// (F_p^*)^rank, or (mu_level)^rank when level > 0
    Torus { field: PrimeField, rank: usize, level: u64 },
    /// all rational points of the curve
    Curve(Curve),
    /// the n-torsion subgroup of the curve
    CurveTorsion { curve: Curve, n: u64 },
    SemiAbelian(SemiAbelianModel),
    Product(Vec<DeskGroup>),
}

/// Elements matching the branches of [`DeskGroup`]. Values stay in their
/// native form (units stay units, points stay points); the additive
/// coordinate bridge is a separate, explicit step.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum DeskElem {
    Ints(Vec<i64>),
    Units(Vec<i64>),
    Point(CurvePoint),
    Mixed(CurvePoint, Vec<i64>),
    Tuple(Vec<DeskElem>),
}

impl std::fmt::Display for DeskElem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        fn join(xs: &[i64]) -> String {
            xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
        }
        match self {
            DeskElem::Ints(v) => write!(f, "[{}]", join(v)),
            DeskElem::Units(v) => write!(f, "u[{}]", join(v)),
            DeskElem::Point(p) => match p.xy() {
                None => write!(f, "O"),
                Some((x, y)) => write!(f, "({x},{y})"),
            },
            DeskElem::Mixed(p, v) => {
                match p.xy() {
                    None => write!(f, "(O;{})", join(v)),
                    Some((x, y)) => write!(f, "(({x},{y});{})", join(v)),
                }
            }
            DeskElem::Tuple(parts) => {
                let inner: Vec<String> = parts.iter().map(|e| e.to_string()).collect();
                write!(f, "<{}>", inner.join("|"))
            }
        }
    }
}

impl DeskGroup {
    pub fn zero(&self) -> DeskElem {
        match self {
            DeskGroup::Lattice { rank } => DeskElem::Ints(vec![0; *rank]),
            DeskGroup::Finite(g) => DeskElem::Ints(g.zero()),
            DeskGroup::Torus { rank, .. } => DeskElem::Units(vec![1; *rank]),
            DeskGroup::Curve(c) => DeskElem::Point(c.infinity()),
            DeskGroup::CurveTorsion { curve, .. } => DeskElem::Point(curve.infinity()),
            DeskGroup::SemiAbelian(m) => {
                let (a, t) = m.zero();
                DeskElem::Mixed(a, t)
            }
            DeskGroup::Product(parts) => DeskElem::Tuple(parts.iter().map(|g| g.zero()).collect()),
        }
    }

    pub fn add(&self, x: &DeskElem, y: &DeskElem) -> Result<DeskElem> {
        match (self, x, y) {
            (DeskGroup::Lattice { rank }, DeskElem::Ints(a), DeskElem::Ints(b)) => {
                if a.len() != *rank || b.len() != *rank {
                    return Err(Error::DimensionMismatch("lattice element width".into()));
                }
                let mut out = Vec::with_capacity(*rank);
                for (u, v) in a.iter().zip(b) {
                    out.push(u.checked_add(*v).ok_or(Error::Overflow("lattice addition"))?);
                }
                Ok(DeskElem::Ints(out))
            }
            (DeskGroup::Finite(g), DeskElem::Ints(a), DeskElem::Ints(b)) => {
                Ok(DeskElem::Ints(g.add(a, b)?))
            }
            (DeskGroup::Torus { field, rank, .. }, DeskElem::Units(a), DeskElem::Units(b)) => {
                if a.len() != *rank || b.len() != *rank {
                    return Err(Error::DimensionMismatch("torus element width".into()));
                }
                Ok(DeskElem::Units(a.iter().zip(b).map(|(&u, &v)| field.mul(u, v)).collect()))
            }
            (DeskGroup::Curve(_) | DeskGroup::CurveTorsion { .. }, DeskElem::Point(p), DeskElem::Point(q)) => {
                Ok(DeskElem::Point(curve_add(p, q)?))
            }
            (DeskGroup::SemiAbelian(m), DeskElem::Mixed(a, t), DeskElem::Mixed(b, s)) => {
                let (c, u) = m.add(&(*a, t.clone()), &(*b, s.clone()))?;
                Ok(DeskElem::Mixed(c, u))
            }
            (DeskGroup::Product(parts), DeskElem::Tuple(a), DeskElem::Tuple(b)) => {
                if a.len() != parts.len() || b.len() != parts.len() {
                    return Err(Error::DimensionMismatch("product element width".into()));
                }
                let mut out = Vec::with_capacity(parts.len());
                for ((g, u), v) in parts.iter().zip(a).zip(b) {
                    out.push(g.add(u, v)?);
                }
                Ok(DeskElem::Tuple(out))
            }
            _ => Err(Error::DimensionMismatch("element shape does not match group".into())),
        }
    }

    pub fn neg(&self, x: &DeskElem) -> Result<DeskElem> {
        match (self, x) {
            (DeskGroup::Lattice { rank }, DeskElem::Ints(a)) => {
                if a.len() != *rank {
                    return Err(Error::DimensionMismatch("lattice element width".into()));
                }
                Ok(DeskElem::Ints(a.iter().map(|&u| -u).collect()))
            }
            (DeskGroup::Finite(g), DeskElem::Ints(a)) => Ok(DeskElem::Ints(g.neg(a)?)),
            (DeskGroup::Torus { field, .. }, DeskElem::Units(a)) => {
                let mut out = Vec::with_capacity(a.len());
                for &u in a {
                    out.push(field.inv(u)?);
                }
                Ok(DeskElem::Units(out))
            }
            (DeskGroup::Curve(_) | DeskGroup::CurveTorsion { .. }, DeskElem::Point(p)) => {
                Ok(DeskElem::Point(curve_neg(p)))
            }
            (DeskGroup::SemiAbelian(m), DeskElem::Mixed(a, t)) => {
                let (b, s) = m.neg(&(*a, t.clone()))?;
                Ok(DeskElem::Mixed(b, s))
            }
            (DeskGroup::Product(parts), DeskElem::Tuple(a)) => {
                let mut out = Vec::with_capacity(parts.len());
                for (g, u) in parts.iter().zip(a) {
                    out.push(g.neg(u)?);
                }
                Ok(DeskElem::Tuple(out))
            }
            _ => Err(Error::DimensionMismatch("element shape does not match group".into())),
        }
    }

    pub fn sub(&self, x: &DeskElem, y: &DeskElem) -> Result<DeskElem> {
        self.add(x, &self.neg(y)?)
    }

    pub fn scalar_mul(&self, k: i64, x: &DeskElem) -> Result<DeskElem> {
        let (mut k, mut base) = if k < 0 { (-(k as i128), self.neg(x)?) } else { (k as i128, x.clone()) };
        let mut acc = self.zero();
        while k > 0 {
            if k & 1 == 1 {
                acc = self.add(&acc, &base)?;
            }
            k >>= 1;
            if k > 0 {
                base = self.add(&base, &base)?;
            }
        }
        Ok(acc)
    }

    pub fn is_member(&self, x: &DeskElem) -> Result<bool> {
        match (self, x) {
            (DeskGroup::Lattice { rank }, DeskElem::Ints(a)) => Ok(a.len() == *rank),
            (DeskGroup::Finite(g), DeskElem::Ints(a)) => Ok(a.len() == g.len()),
            (DeskGroup::Torus { field, rank, level }, DeskElem::Units(a)) => {
                if a.len() != *rank {
                    return Ok(false);
                }
                for &u in a {
                    if !unit_contains(*field, *level, u)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            (DeskGroup::Curve(c), DeskElem::Point(p)) => Ok(p.curve() == *c),
            (DeskGroup::CurveTorsion { curve, n }, DeskElem::Point(p)) => {
                Ok(p.curve() == *curve && curve_scalar_mul(*n as i64, p)?.is_infinity())
            }
            (DeskGroup::SemiAbelian(m), DeskElem::Mixed(a, t)) => {
                m.is_member(&(*a, t.clone()))
            }
            (DeskGroup::Product(parts), DeskElem::Tuple(a)) => {
                if a.len() != parts.len() {
                    return Ok(false);
                }
                for (g, u) in parts.iter().zip(a) {
                    if !g.is_member(u)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            _ => Ok(false),
        }
    }

    /// None for groups with a free part.
    pub fn order(&self) -> Result<Option<u128>> {
        match self {
            DeskGroup::Lattice { rank } => Ok(if *rank == 0 { Some(1) } else { None }),
            DeskGroup::Finite(g) => Ok(Some(g.order())),
            DeskGroup::Torus { field, rank, level } => {
                let m = unit_group_order(*field, *level)? as u128;
                Ok(Some(m.pow(*rank as u32)))
            }
            DeskGroup::Curve(c) => Ok(Some(c.points()?.len() as u128)),
            DeskGroup::CurveTorsion { curve, n } => {
                Ok(Some(torsion_points(curve, *n)?.len() as u128))
            }
            DeskGroup::SemiAbelian(m) => Ok(Some(m.order()?)),
            DeskGroup::Product(parts) => {
                let mut acc: u128 = 1;
                for g in parts {
                    match g.order()? {
                        Some(o) => acc = acc.checked_mul(o).ok_or(Error::Overflow("group order"))?,
                        None => return Ok(None),
                    }
                }
                Ok(Some(acc))
            }
        }
    }

    pub fn enumerate(&self, limit: u128) -> Result<Vec<DeskElem>> {
        let order = self
            .order()?
            .ok_or_else(|| Error::UnsupportedShape("cannot enumerate an infinite group".into()))?;
        if order > limit {
            return Err(Error::EnumerationTooLarge { size: order, limit });
        }
        match self {
            DeskGroup::Lattice { .. } => Ok(vec![self.zero()]),
            DeskGroup::Finite(g) => {
                Ok(g.enumerate(limit)?.into_iter().map(DeskElem::Ints).collect())
            }
            DeskGroup::Torus { field, rank, level } => {
                let units = crate::torus::enumerate_units(*field, *level)?;
                let mut acc: Vec<Vec<i64>> = vec![Vec::new()];
                for _ in 0..*rank {
                    let mut next = Vec::new();
                    for prefix in &acc {
                        for &u in &units {
                            let mut v = prefix.clone();
                            v.push(u);
                            next.push(v);
                        }
                    }
                    acc = next;
                }
                Ok(acc.into_iter().map(DeskElem::Units).collect())
            }
            DeskGroup::Curve(c) => Ok(c.points()?.into_iter().map(DeskElem::Point).collect()),
            DeskGroup::CurveTorsion { curve, n } => {
                Ok(torsion_points(curve, *n)?.into_iter().map(DeskElem::Point).collect())
            }
            DeskGroup::SemiAbelian(m) => Ok(m
                .enumerate(limit)?
                .into_iter()
                .map(|(a, t)| DeskElem::Mixed(a, t))
                .collect()),
            DeskGroup::Product(parts) => {
                let mut acc: Vec<Vec<DeskElem>> = vec![Vec::new()];
                for g in parts {
                    let elems = g.enumerate(limit)?;
                    let mut next = Vec::new();
                    for prefix in &acc {
                        for e in &elems {
                            let mut v = prefix.clone();
                            v.push(e.clone());
                            next.push(v);
                        }
                    }
                    acc = next;
                    if acc.len() as u128 > limit {
                        return Err(Error::EnumerationTooLarge { size: order, limit });
                    }
                }
                Ok(acc.into_iter().map(DeskElem::Tuple).collect())
            }
        }
    }

    pub fn is_zero(&self, x: &DeskElem) -> Result<bool> {
        Ok(*x == self.zero())
    }

    pub fn element_order(&self, x: &DeskElem) -> Result<u64> {
        if self.is_zero(x)? {
            return Ok(1);
        }
        let bound = match self.order()? {
            Some(o) => u64::try_from(o).map_err(|_| Error::Overflow("element order"))?,
            None => {
                return Err(Error::UnsupportedShape(
                    "element order in an infinite group".into(),
                ))
            }
        };
        let mut acc = x.clone();
        for k in 2..=bound {
            acc = self.add(&acc, x)?;
            if self.is_zero(&acc)? {
                return Ok(k);
            }
        }
        Err(Error::InvalidGroup("element order exceeds the group order".into()))
    }

    /// Cyclic moduli for the additive coordinate bridge: 0 marks a free
    /// coordinate. Twisted semi-abelian models are not coordinatized.
    pub fn coord_moduli(&self) -> Result<Vec<i64>> {
        match self {
            DeskGroup::Lattice { rank } => Ok(vec![0; *rank]),
            DeskGroup::Finite(g) => Ok(g.moduli().to_vec()),
            DeskGroup::Torus { field, rank, level } => {
                let m = unit_group_order(*field, *level)? as i64;
                Ok(vec![m; *rank])
            }
            DeskGroup::Curve(c) => {
                let s = curve_group_structure(c)?;
                Ok(s.invariant_factors.iter().map(|&d| d as i64).collect())
            }
            DeskGroup::CurveTorsion { curve, n } => {
                Ok(torsion_structure(curve, *n)?.0)
            }
            DeskGroup::SemiAbelian(m) => {
                if m.factor_set.is_some() {
                    return Err(Error::UnsupportedShape(
                        "coordinates on a twisted semi-abelian model".into(),
                    ));
                }
                let mut out = if m.abelian_level == 0 {
                    DeskGroup::Curve(m.curve).coord_moduli()?
                } else {
                    DeskGroup::CurveTorsion { curve: m.curve, n: m.abelian_level }.coord_moduli()?
                };
                let t = unit_group_order(m.curve.field(), m.torus_level)? as i64;
                out.extend(std::iter::repeat(t).take(m.torus_rank));
                Ok(out)
            }
            DeskGroup::Product(parts) => {
                let mut out = Vec::new();
                for g in parts {
                    out.extend(g.coord_moduli()?);
                }
                Ok(out)
            }
        }
    }

    /// Additive coordinates of an element with respect to the canonical
    /// generators behind `coord_moduli`.
    pub fn additive_coords(&self, x: &DeskElem) -> Result<Vec<i64>> {
        match (self, x) {
            (DeskGroup::Lattice { rank }, DeskElem::Ints(a)) => {
                if a.len() != *rank {
                    return Err(Error::DimensionMismatch("lattice element width".into()));
                }
                Ok(a.clone())
            }
            (DeskGroup::Finite(g), DeskElem::Ints(a)) => g.reduce(a),
            (DeskGroup::Torus { field, level, .. }, DeskElem::Units(a)) => {
                a.iter().map(|&u| unit_discrete_log(*field, *level, u).map(|k| k as i64)).collect()
            }
            (DeskGroup::Curve(c), DeskElem::Point(p)) => {
                let s = curve_group_structure(c)?;
                point_coords(p, &s.generators, &s.invariant_factors)
            }
            (DeskGroup::CurveTorsion { curve, n }, DeskElem::Point(p)) => {
                let (moduli, gens) = torsion_structure(curve, *n)?;
                let factors: Vec<u64> = moduli.iter().map(|&d| d as u64).collect();
                point_coords(p, &gens, &factors)
            }
            (DeskGroup::SemiAbelian(m), DeskElem::Mixed(a, t)) => {
                if m.factor_set.is_some() {
                    return Err(Error::UnsupportedShape(
                        "coordinates on a twisted semi-abelian model".into(),
                    ));
                }
                let mut out = if m.abelian_level == 0 {
                    DeskGroup::Curve(m.curve).additive_coords(&DeskElem::Point(*a))?
                } else {
                    DeskGroup::CurveTorsion { curve: m.curve, n: m.abelian_level }
                        .additive_coords(&DeskElem::Point(*a))?
                };
                for &u in t {
                    out.push(unit_discrete_log(m.curve.field(), m.torus_level, u)? as i64);
                }
                Ok(out)
            }
            (DeskGroup::Product(parts), DeskElem::Tuple(a)) => {
                let mut out = Vec::new();
                for (g, u) in parts.iter().zip(a) {
                    out.extend(g.additive_coords(u)?);
                }
                Ok(out)
            }
            _ => Err(Error::DimensionMismatch("element shape does not match group".into())),
        }
    }

    pub fn from_additive_coords(&self, coords: &[i64]) -> Result<DeskElem> {
        match self {
            DeskGroup::Lattice { rank } => {
                if coords.len() != *rank {
                    return Err(Error::DimensionMismatch("lattice coordinate width".into()));
                }
                Ok(DeskElem::Ints(coords.to_vec()))
            }
            DeskGroup::Finite(g) => Ok(DeskElem::Ints(g.reduce(coords)?)),
            DeskGroup::Torus { field, rank, level } => {
                if coords.len() != *rank {
                    return Err(Error::DimensionMismatch("torus coordinate width".into()));
                }
                let g = unit_generator(*field, *level)?;
                let m = unit_group_order(*field, *level)? as i64;
                Ok(DeskElem::Units(
                    coords.iter().map(|&k| field.pow(g, k.rem_euclid(m) as u64)).collect(),
                ))
            }
            DeskGroup::Curve(c) => {
                let s = curve_group_structure(c)?;
                Ok(DeskElem::Point(point_from_coords(
                    c,
                    coords,
                    &s.generators,
                    &s.invariant_factors,
                )?))
            }
            DeskGroup::CurveTorsion { curve, n } => {
                let (moduli, gens) = torsion_structure(curve, *n)?;
                let factors: Vec<u64> = moduli.iter().map(|&d| d as u64).collect();
                Ok(DeskElem::Point(point_from_coords(curve, coords, &gens, &factors)?))
            }
            DeskGroup::SemiAbelian(m) => {
                if m.factor_set.is_some() {
                    return Err(Error::UnsupportedShape(
                        "coordinates on a twisted semi-abelian model".into(),
                    ));
                }
                let (a_moduli, gens) = if m.abelian_level == 0 {
                    let s = curve_group_structure(&m.curve)?;
                    (s.invariant_factors.iter().map(|&d| d as i64).collect::<Vec<_>>(), s.generators)
                } else {
                    torsion_structure(&m.curve, m.abelian_level)?
                };
                let split = a_moduli.len();
                if coords.len() != split + m.torus_rank {
                    return Err(Error::DimensionMismatch("semi-abelian coordinate width".into()));
                }
                let factors: Vec<u64> = a_moduli.iter().map(|&d| d as u64).collect();
                let a = point_from_coords(&m.curve, &coords[..split], &gens, &factors)?;
                let g = unit_generator(m.curve.field(), m.torus_level)?;
                let ord = unit_group_order(m.curve.field(), m.torus_level)? as i64;
                let f = m.curve.field();
                let t = coords[split..]
                    .iter()
                    .map(|&k| f.pow(g, k.rem_euclid(ord) as u64))
                    .collect();
                Ok(DeskElem::Mixed(a, t))
            }
            DeskGroup::Product(parts) => {
                let mut out = Vec::new();
                let mut at = 0;
                for g in parts {
                    let w = g.coord_moduli()?.len();
                    out.push(g.from_additive_coords(&coords[at..at + w])?);
                    at += w;
                }
                if at != coords.len() {
                    return Err(Error::DimensionMismatch("product coordinate width".into()));
                }
                Ok(DeskElem::Tuple(out))
            }
        }
    }
}

/// Structure (moduli, generators) of E[n], diagnosed from the curve group.
fn torsion_structure(curve: &Curve, n: u64) -> Result<(Vec<i64>, Vec<CurvePoint>)> {
    if n == 0 {
        let s = curve_group_structure(curve)?;
        return Ok((s.invariant_factors.iter().map(|&d| d as i64).collect(), s.generators));
    }
    let s = curve_group_structure(curve)?;
    let mut moduli = Vec::new();
    let mut gens = Vec::new();
    for (g, &d) in s.generators.iter().zip(&s.invariant_factors) {
        let m = gcd_u64(d, n);
        if m > 1 {
            moduli.push(m as i64);
            gens.push(curve_scalar_mul((d / m) as i64, g)?);
        }
    }
    if moduli.is_empty() {
        // trivial torsion still needs a presentation
        return Ok((vec![], vec![]));
    }
    Ok((moduli, gens))
}

fn gcd_u64(a: u64, b: u64) -> u64 {
    let (mut a, mut b) = (a, b);
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a.max(1)
}

fn point_coords(p: &CurvePoint, gens: &[CurvePoint], factors: &[u64]) -> Result<Vec<i64>> {
    // brute-force digit search; group orders stay desk-sized
    let mut digits = vec![0i64; gens.len()];
    loop {
        let mut acc = p.curve().infinity();
        for (g, &k) in gens.iter().zip(&digits) {
            acc = curve_add(&acc, &curve_scalar_mul(k, g)?)?;
        }
        if acc == *p {
            return Ok(digits);
        }
        let mut i = gens.len();
        loop {
            if i == 0 {
                return Err(Error::NoSolution("point is outside the generated subgroup".into()));
            }
            i -= 1;
            digits[i] += 1;
            if (digits[i] as u64) < factors[i] {
                break;
            }
            digits[i] = 0;
        }
    }
}

fn point_from_coords(
    curve: &Curve,
    coords: &[i64],
    gens: &[CurvePoint],
    factors: &[u64],
) -> Result<CurvePoint> {
    if coords.len() != gens.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} coordinates for {} generators",
            coords.len(),
            gens.len()
        )));
    }
    let mut acc = curve.infinity();
    for ((g, &k), &d) in gens.iter().zip(coords).zip(factors) {
        acc = curve_add(&acc, &curve_scalar_mul(k.rem_euclid(d as i64), g)?)?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mu2() -> DeskGroup {
        DeskGroup::Torus { field: PrimeField::new(5).unwrap(), rank: 1, level: 2 }
    }

    #[test]
    fn torus_round_trip_through_coordinates() {
        let g = mu2();
        for e in g.enumerate(10).unwrap() {
            let c = g.additive_coords(&e).unwrap();
            assert_eq!(g.from_additive_coords(&c).unwrap(), e);
        }
        assert_eq!(g.coord_moduli().unwrap(), vec![2]);
    }

    #[test]
    fn curve_torsion_round_trip() {
        let f = PrimeField::new(5).unwrap();
        let c = Curve::new(f, 1, 0).unwrap();
        let g = DeskGroup::CurveTorsion { curve: c, n: 2 };
        let elems = g.enumerate(10).unwrap();
        assert_eq!(elems.len(), 4);
        assert_eq!(g.coord_moduli().unwrap(), vec![2, 2]);
        for e in elems {
            let coords = g.additive_coords(&e).unwrap();
            assert_eq!(g.from_additive_coords(&coords).unwrap(), e);
        }
    }

    #[test]
    fn finite_group_arithmetic_axioms() {
        let g = DeskGroup::Finite(FiniteAbelianGroup::new(vec![2, 3]).unwrap());
        let all = g.enumerate(100).unwrap();
        assert_eq!(all.len(), 6);
        for x in &all {
            assert_eq!(g.add(x, &g.zero()).unwrap(), *x);
            assert!(g.is_zero(&g.add(x, &g.neg(x).unwrap()).unwrap()).unwrap());
            for y in &all {
                assert_eq!(g.add(x, y).unwrap(), g.add(y, x).unwrap());
            }
        }
    }

    #[test]
    fn product_groups_compose() {
        let g = DeskGroup::Product(vec![
            DeskGroup::Finite(FiniteAbelianGroup::cyclic(2).unwrap()),
            mu2(),
        ]);
        assert_eq!(g.order().unwrap(), Some(4));
        assert_eq!(g.coord_moduli().unwrap(), vec![2, 2]);
        for e in g.enumerate(10).unwrap() {
            let c = g.additive_coords(&e).unwrap();
            assert_eq!(g.from_additive_coords(&c).unwrap(), e);
        }
    }

    #[test]
    fn element_orders() {
        let g = mu2();
        assert_eq!(g.element_order(&DeskElem::Units(vec![4])).unwrap(), 2);
        assert_eq!(g.element_order(&DeskElem::Units(vec![1])).unwrap(), 1);
    }

    #[test]
    fn mismatched_shapes_are_rejected() {
        let g = mu2();
        assert!(g.add(&DeskElem::Units(vec![4]), &DeskElem::Ints(vec![1])).is_err());
        assert!(!g.is_member(&DeskElem::Units(vec![2])).unwrap());
        assert!(g.is_member(&DeskElem::Units(vec![4])).unwrap());
    }
}
