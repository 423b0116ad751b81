use crate::error::{Error, Result};
use crate::mat::IntMat;
use crate::snf::smith_normal_form;

/// Finite abelian group presented as a direct sum of cyclic groups
/// `Z/m_1 + ... + Z/m_k` with every `m_i >= 1`.
///
/// Elements are coefficient vectors reduced componentwise.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteAbelianGroup {
    moduli: Vec<i64>,
}

impl FiniteAbelianGroup {
    pub fn new(moduli: Vec<i64>) -> Result<Self> {
        if let Some(&m) = moduli.iter().find(|&&m| m < 1) {
            return Err(Error::InvalidGroup(format!("cyclic modulus {m} must be >= 1")));
        }
        Ok(FiniteAbelianGroup { moduli })
    }

    pub fn trivial() -> Self {
        FiniteAbelianGroup { moduli: Vec::new() }
    }

    pub fn cyclic(m: i64) -> Result<Self> {
        Self::new(vec![m])
    }

    pub fn moduli(&self) -> &[i64] {
        &self.moduli
    }

    pub fn len(&self) -> usize {
        self.moduli.len()
    }

    pub fn is_empty(&self) -> bool {
        self.moduli.is_empty()
    }

    pub fn order(&self) -> u128 {
        self.moduli.iter().map(|&m| m as u128).product()
    }

    pub fn zero(&self) -> Vec<i64> {
        vec![0; self.moduli.len()]
    }

    pub fn reduce(&self, v: &[i64]) -> Result<Vec<i64>> {
        if v.len() != self.moduli.len() {
            return Err(Error::DimensionMismatch(format!(
                "element of length {} in group with {} cyclic factors",
                v.len(),
                self.moduli.len()
            )));
        }
        Ok(v.iter().zip(&self.moduli).map(|(&x, &m)| x.rem_euclid(m)).collect())
    }

    pub fn add(&self, a: &[i64], b: &[i64]) -> Result<Vec<i64>> {
        let a = self.reduce(a)?;
        let b = self.reduce(b)?;
        self.reduce(&a.iter().zip(&b).map(|(&x, &y)| x + y).collect::<Vec<_>>())
    }

    pub fn neg(&self, a: &[i64]) -> Result<Vec<i64>> {
        let a = self.reduce(a)?;
        self.reduce(&a.iter().map(|&x| -x).collect::<Vec<_>>())
    }

    pub fn scalar_mul(&self, k: i64, a: &[i64]) -> Result<Vec<i64>> {
        let a = self.reduce(a)?;
        let scaled: Vec<i64> = a
            .iter()
            .map(|&x| k.checked_mul(x).ok_or(Error::Overflow("group scalar multiple")))
            .collect::<Result<_>>()?;
        self.reduce(&scaled)
    }

    pub fn is_zero(&self, a: &[i64]) -> Result<bool> {
        Ok(self.reduce(a)?.iter().all(|&x| x == 0))
    }

    pub fn element_order(&self, a: &[i64]) -> Result<u64> {
        let a = self.reduce(a)?;
        let mut ord: u64 = 1;
        for (&x, &m) in a.iter().zip(&self.moduli) {
            let g = gcd(x, m);
            let k = (m / if g == 0 { m } else { g }) as u64;
            ord = lcm_u64(ord, k.max(1));
        }
        Ok(ord)
    }

    /// All elements in lexicographic order. Errors when the order exceeds `limit`.
    pub fn enumerate(&self, limit: u128) -> Result<Vec<Vec<i64>>> {
        let order = self.order();
        if order > limit {
            return Err(Error::EnumerationTooLarge { size: order, limit });
        }
        let mut out = Vec::with_capacity(order as usize);
        let mut cur = self.zero();
        loop {
            out.push(cur.clone());
            let mut i = self.moduli.len();
            loop {
                if i == 0 {
                    return Ok(out);
                }
                i -= 1;
                cur[i] += 1;
                if cur[i] < self.moduli[i] {
                    break;
                }
                cur[i] = 0;
            }
        }
    }

    /// Invariant factors d_1 | d_2 | ... with every d_i > 1, dropping trivial
    /// factors. Two presentations describe the same group exactly when these
    /// agree.
    pub fn canonical_invariant_factors(&self) -> Result<Vec<i64>> {
        let relations = IntMat::diagonal(&self.moduli);
        let (_, d, _) = smith_normal_form(&relations)?;
        let mut out: Vec<i64> = (0..self.moduli.len()).map(|i| d.get(i, i)).filter(|&e| e > 1).collect();
        out.sort_unstable();
        Ok(out)
    }
}

pub(crate) fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

pub(crate) fn lcm_u64(a: u64, b: u64) -> u64 {
    if a == 0 || b == 0 {
        return 0;
    }
    let g = {
        let (mut x, mut y) = (a, b);
        while y != 0 {
            (x, y) = (y, x % y);
        }
        x
    };
    a / g * b
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumeration_and_orders() {
        let g = FiniteAbelianGroup::new(vec![2, 3]).unwrap();
        let all = g.enumerate(100).unwrap();
        assert_eq!(all.len(), 6);
        assert_eq!(g.element_order(&[1, 0]).unwrap(), 2);
        assert_eq!(g.element_order(&[0, 1]).unwrap(), 3);
        assert_eq!(g.element_order(&[1, 1]).unwrap(), 6);
        assert_eq!(g.element_order(&[0, 0]).unwrap(), 1);
    }

    #[test]
    fn canonical_factors_merge_coprime_parts() {
        let g = FiniteAbelianGroup::new(vec![2, 3]).unwrap();
        assert_eq!(g.canonical_invariant_factors().unwrap(), vec![6]);
        let h = FiniteAbelianGroup::new(vec![6]).unwrap();
        assert_eq!(h.canonical_invariant_factors().unwrap(), vec![6]);
        let k = FiniteAbelianGroup::new(vec![2, 4]).unwrap();
        assert_eq!(k.canonical_invariant_factors().unwrap(), vec![2, 4]);
    }

    #[test]
    fn enumeration_respects_limit() {
        let g = FiniteAbelianGroup::new(vec![100, 100, 100]).unwrap();
        assert!(matches!(g.enumerate(1000), Err(Error::EnumerationTooLarge { .. })));
    }
}
