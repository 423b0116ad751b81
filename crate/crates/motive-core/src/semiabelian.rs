use std::collections::BTreeMap;

use crate::curve::{curve_add, curve_neg, curve_scalar_mul, torsion_points, Curve, CurvePoint};
use crate::error::{Error, Result};
use crate::torus::{enumerate_units, unit_contains, unit_group_order};

/// Points of a semi-abelian group presented as pairs (curve point, units)
/// with a twisted addition
///
///   (a1, t1) + (a2, t2) = (a1 + a2, t1 * t2 * c(a1, a2))
///
/// where c is a symmetric normalized factor set on the abelian part. The
/// factor set measures how far the extension is from a direct product.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SemiAbelianModel {
    pub curve: Curve,
    /// 0 keeps all rational points, n restricts the abelian part to E[n]
    pub abelian_level: u64,
    pub torus_rank: usize,
    /// 0 is the full unit group, m restricts each coordinate to mu_m
    pub torus_level: u64,
    /// symmetric factor set, one unit vector per ordered pair; None means a
    /// direct product
    pub factor_set: Option<FactorSetTable>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactorSetTable {
    entries: BTreeMap<(CurvePoint, CurvePoint), Vec<i64>>,
}

impl FactorSetTable {
    pub fn new(entries: BTreeMap<(CurvePoint, CurvePoint), Vec<i64>>) -> Self {
        FactorSetTable { entries }
    }

    pub fn entries(&self) -> &BTreeMap<(CurvePoint, CurvePoint), Vec<i64>> {
        &self.entries
    }

    fn value(&self, a: &CurvePoint, b: &CurvePoint, rank: usize) -> Vec<i64> {
        self.entries.get(&(*a, *b)).cloned().unwrap_or_else(|| vec![1; rank])
    }
}

impl SemiAbelianModel {
    pub fn direct_product(curve: Curve, abelian_level: u64, torus_rank: usize, torus_level: u64) -> Self {
        SemiAbelianModel { curve, abelian_level, torus_rank, torus_level, factor_set: None }
    }

    pub fn abelian_points(&self) -> Result<Vec<CurvePoint>> {
        if self.abelian_level == 0 {
            self.curve.points()
        } else {
            torsion_points(&self.curve, self.abelian_level)
        }
    }

    pub fn factor(&self, a: &CurvePoint, b: &CurvePoint) -> Vec<i64> {
        match &self.factor_set {
            None => vec![1; self.torus_rank],
            Some(t) => t.value(a, b, self.torus_rank),
        }
    }

    pub fn zero(&self) -> (CurvePoint, Vec<i64>) {
        (self.curve.infinity(), vec![1; self.torus_rank])
    }

    pub fn add(&self, x: &(CurvePoint, Vec<i64>), y: &(CurvePoint, Vec<i64>)) -> Result<(CurvePoint, Vec<i64>)> {
        if x.1.len() != self.torus_rank || y.1.len() != self.torus_rank {
            return Err(Error::DimensionMismatch("torus coordinate count".into()));
        }
        let f = self.curve.field();
        let a = curve_add(&x.0, &y.0)?;
        let c = self.factor(&x.0, &y.0);
        let t = x
            .1
            .iter()
            .zip(&y.1)
            .zip(&c)
            .map(|((&u, &v), &w)| f.mul(f.mul(u, v), w))
            .collect();
        Ok((a, t))
    }

    pub fn neg(&self, x: &(CurvePoint, Vec<i64>)) -> Result<(CurvePoint, Vec<i64>)> {
        let f = self.curve.field();
        let a = curve_neg(&x.0);
        // (a, t) + (-a, s) = (O, t s c(a, -a)) forces s = (t c(a, -a))^-1
        let c = self.factor(&x.0, &a);
        let t: Result<Vec<i64>> = x
            .1
            .iter()
            .zip(&c)
            .map(|(&u, &w)| f.inv(f.mul(u, w)))
            .collect();
        Ok((a, t?))
    }

    pub fn is_member(&self, x: &(CurvePoint, Vec<i64>)) -> Result<bool> {
        if x.1.len() != self.torus_rank {
            return Ok(false);
        }
        if x.0.curve() != self.curve {
            return Ok(false);
        }
        if self.abelian_level > 0
            && !curve_scalar_mul(self.abelian_level as i64, &x.0)?.is_infinity()
        {
            return Ok(false);
        }
        for &u in &x.1 {
            if !unit_contains(self.curve.field(), self.torus_level, u)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn order(&self) -> Result<u128> {
        let a = self.abelian_points()?.len() as u128;
        let t = unit_group_order(self.curve.field(), self.torus_level)? as u128;
        Ok(a * t.pow(self.torus_rank as u32))
    }

    pub fn enumerate(&self, limit: u128) -> Result<Vec<(CurvePoint, Vec<i64>)>> {
        let order = self.order()?;
        if order > limit {
            return Err(Error::EnumerationTooLarge { size: order, limit });
        }
        let abelian = self.abelian_points()?;
        let units = enumerate_units(self.curve.field(), self.torus_level)?;
        let mut out = Vec::with_capacity(order as usize);
        let mut stack = vec![Vec::new()];
        for _ in 0..self.torus_rank {
            let mut next = Vec::new();
            for prefix in stack {
                for &u in &units {
                    let mut v: Vec<i64> = prefix.clone();
                    v.push(u);
                    next.push(v);
                }
            }
            stack = next;
        }
        for a in &abelian {
            for t in &stack {
                out.push((*a, t.clone()));
            }
        }
        Ok(out)
    }

    /// Checks that the factor set is normalized, symmetric, associative and
    /// valued in the designated unit subgroup.
    pub fn validate(&self) -> Result<()> {
        let f = self.curve.field();
        let Some(table) = &self.factor_set else { return Ok(()) };
        for ((a, b), v) in table.entries() {
            if v.len() != self.torus_rank {
                return Err(Error::InvalidGroup("factor set value has wrong width".into()));
            }
            if a.curve() != self.curve || b.curve() != self.curve {
                return Err(Error::InvalidGroup("factor set indexed by foreign points".into()));
            }
            for &u in v {
                if !unit_contains(f, self.torus_level, u)? {
                    return Err(Error::InvalidGroup(format!(
                        "factor set value {u} lies outside the unit subgroup"
                    )));
                }
            }
        }
        let abelian = self.abelian_points()?;
        for a in &abelian {
            let c = self.factor(a, &self.curve.infinity());
            if c.iter().any(|&u| u != 1) {
                return Err(Error::InvalidGroup("factor set is not normalized".into()));
            }
            for b in &abelian {
                if self.factor(a, b) != self.factor(b, a) {
                    return Err(Error::InvalidGroup("factor set is not symmetric".into()));
                }
                for d in &abelian {
                    // c(a,b) c(a+b,d) = c(b,d) c(a,b+d)
                    let ab = curve_add(a, b)?;
                    let bd = curve_add(b, d)?;
                    let lhs: Vec<i64> = self
                        .factor(a, b)
                        .iter()
                        .zip(&self.factor(&ab, d))
                        .map(|(&x, &y)| f.mul(x, y))
                        .collect();
                    let rhs: Vec<i64> = self
                        .factor(b, d)
                        .iter()
                        .zip(&self.factor(a, &bd))
                        .map(|(&x, &y)| f.mul(x, y))
                        .collect();
                    if lhs != rhs {
                        return Err(Error::InvalidGroup(
                            "factor set fails the associativity identity".into(),
                        ));
                    }
                }
            }
        }
        Ok(())
    }
}
