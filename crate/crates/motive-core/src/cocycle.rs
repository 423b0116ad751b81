use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::group::{DeskElem, DeskGroup};
use crate::limits::check_enumeration;

/// A symmetric biextension cocycle on P x Q with values in G, given by its
/// two partial-addition tables
///
///   phi: P x P x Q -> G   (measures addition in the P direction)
///   psi: P x Q x Q -> G   (measures addition in the Q direction)
///
/// Keys absent from a table read as zero, so sparse data stays sparse.
/// G is written additively throughout; for a torus target the group
/// operation is unit multiplication.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BiextCocycle {
    pub p: DeskGroup,
    pub q: DeskGroup,
    pub g: DeskGroup,
    phi: BTreeMap<(DeskElem, DeskElem, DeskElem), DeskElem>,
    psi: BTreeMap<(DeskElem, DeskElem, DeskElem), DeskElem>,
}

/// One failed identity instance: which check broke and at which arguments.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckFailure {
    pub check: String,
    pub witness: String,
}

/// Outcome of a verification pass. `instances` counts the identity
/// instances actually evaluated, so a vacuous pass is visible as zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifyReport {
    pub failures: Vec<CheckFailure>,
    pub instances: u64,
}

impl VerifyReport {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn merge(&mut self, other: VerifyReport) {
        self.failures.extend(other.failures);
        self.instances += other.instances;
    }

    pub fn empty() -> Self {
        VerifyReport { failures: Vec::new(), instances: 0 }
    }

    pub fn first_witness(&self) -> Option<&CheckFailure> {
        self.failures.first()
    }
}

impl BiextCocycle {
    pub fn zero(p: DeskGroup, q: DeskGroup, g: DeskGroup) -> Self {
        BiextCocycle { p, q, g, phi: BTreeMap::new(), psi: BTreeMap::new() }
    }

    pub fn from_tables(
        p: DeskGroup,
        q: DeskGroup,
        g: DeskGroup,
        phi: BTreeMap<(DeskElem, DeskElem, DeskElem), DeskElem>,
        psi: BTreeMap<(DeskElem, DeskElem, DeskElem), DeskElem>,
    ) -> Self {
        BiextCocycle { p, q, g, phi, psi }
    }

    /// Build total tables by evaluating closures over explicit element lists.
    pub fn from_fn<FPhi, FPsi>(
        p: DeskGroup,
        q: DeskGroup,
        g: DeskGroup,
        p_elems: &[DeskElem],
        q_elems: &[DeskElem],
        mut phi_fn: FPhi,
        mut psi_fn: FPsi,
    ) -> Result<Self>
    where
        FPhi: FnMut(&DeskElem, &DeskElem, &DeskElem) -> Result<DeskElem>,
        FPsi: FnMut(&DeskElem, &DeskElem, &DeskElem) -> Result<DeskElem>,
    {
        let size = (p_elems.len() as u128)
            .pow(2)
            .saturating_mul(q_elems.len() as u128)
            .saturating_add((q_elems.len() as u128).pow(2).saturating_mul(p_elems.len() as u128));
        check_enumeration(size)?;
        let mut phi = BTreeMap::new();
        let mut psi = BTreeMap::new();
        let gz = g.zero();
        for p1 in p_elems {
            for p2 in p_elems {
                for qq in q_elems {
                    let v = phi_fn(p1, p2, qq)?;
                    if v != gz {
                        phi.insert((p1.clone(), p2.clone(), qq.clone()), v);
                    }
                }
            }
        }
        for pp in p_elems {
            for q1 in q_elems {
                for q2 in q_elems {
                    let v = psi_fn(pp, q1, q2)?;
                    if v != gz {
                        psi.insert((pp.clone(), q1.clone(), q2.clone()), v);
                    }
                }
            }
        }
        Ok(BiextCocycle { p, q, g, phi, psi })
    }

    pub fn phi_at(&self, p1: &DeskElem, p2: &DeskElem, q: &DeskElem) -> DeskElem {
        self.phi
            .get(&(p1.clone(), p2.clone(), q.clone()))
            .cloned()
            .unwrap_or_else(|| self.g.zero())
    }

    pub fn psi_at(&self, p: &DeskElem, q1: &DeskElem, q2: &DeskElem) -> DeskElem {
        self.psi
            .get(&(p.clone(), q1.clone(), q2.clone()))
            .cloned()
            .unwrap_or_else(|| self.g.zero())
    }

    pub fn set_phi(&mut self, p1: DeskElem, p2: DeskElem, q: DeskElem, v: DeskElem) {
        self.phi.insert((p1, p2, q), v);
    }

    pub fn set_psi(&mut self, p: DeskElem, q1: DeskElem, q2: DeskElem, v: DeskElem) {
        self.psi.insert((p, q1, q2), v);
    }

    pub fn phi_table(&self) -> &BTreeMap<(DeskElem, DeskElem, DeskElem), DeskElem> {
        &self.phi
    }

    pub fn psi_table(&self) -> &BTreeMap<(DeskElem, DeskElem, DeskElem), DeskElem> {
        &self.psi
    }

    pub fn is_zero(&self) -> Result<bool> {
        let gz = self.g.zero();
        Ok(self.phi.values().all(|v| *v == gz) && self.psi.values().all(|v| *v == gz))
    }

    /// Pointwise sum of two cocycles over the same groups; the group law on
    /// biextension classes.
    pub fn baer_sum(&self, other: &BiextCocycle) -> Result<BiextCocycle> {
        if self.p != other.p || self.q != other.q || self.g != other.g {
            return Err(Error::InvalidBiextension("baer sum across different groups".into()));
        }
        let mut phi = self.phi.clone();
        for (k, v) in &other.phi {
            let cur = phi.get(k).cloned().unwrap_or_else(|| self.g.zero());
            phi.insert(k.clone(), self.g.add(&cur, v)?);
        }
        let mut psi = self.psi.clone();
        for (k, v) in &other.psi {
            let cur = psi.get(k).cloned().unwrap_or_else(|| self.g.zero());
            psi.insert(k.clone(), self.g.add(&cur, v)?);
        }
        Ok(BiextCocycle { p: self.p.clone(), q: self.q.clone(), g: self.g.clone(), phi, psi })
    }

    pub fn baer_neg(&self) -> Result<BiextCocycle> {
        let mut phi = BTreeMap::new();
        for (k, v) in &self.phi {
            phi.insert(k.clone(), self.g.neg(v)?);
        }
        let mut psi = BTreeMap::new();
        for (k, v) in &self.psi {
            psi.insert(k.clone(), self.g.neg(v)?);
        }
        Ok(BiextCocycle { p: self.p.clone(), q: self.q.clone(), g: self.g.clone(), phi, psi })
    }

    /// The torsion pairing induced on n-torsion arguments:
    /// sum_{k=1}^{n-1} phi(kx, x; y) - sum_{k=1}^{n-1} psi(x; ky, y).
    pub fn torsion_pairing(&self, x: &DeskElem, y: &DeskElem, n: u64) -> Result<DeskElem> {
        let mut g1 = self.g.zero();
        let mut kx = x.clone();
        for _ in 1..n {
            g1 = self.g.add(&g1, &self.phi_at(&kx, x, y))?;
            kx = self.p.add(&kx, x)?;
        }
        let mut g2 = self.g.zero();
        let mut ky = y.clone();
        for _ in 1..n {
            g2 = self.g.add(&g2, &self.psi_at(x, &ky, y))?;
            ky = self.q.add(&ky, y)?;
        }
        self.g.sub(&g1, &g2)
    }
}

/// The coboundary of a normalized function h: P x Q -> G (missing keys are
/// zero). Always a valid cocycle; two cocycles differing by a coboundary
/// describe the same biextension.
pub fn coboundary_cocycle(
    p: DeskGroup,
    q: DeskGroup,
    g: DeskGroup,
    h: &BTreeMap<(DeskElem, DeskElem), DeskElem>,
) -> Result<BiextCocycle> {
    for ((pe, qe), _) in h.iter() {
        if *pe == p.zero() || *qe == q.zero() {
            let v = h.get(&(pe.clone(), qe.clone()));
            if v.is_some() && *v.unwrap() != g.zero() {
                return Err(Error::InvalidBiextension(
                    "coboundary data must vanish on zero arguments".into(),
                ));
            }
        }
    }
    let limit = crate::limits::max_enumeration();
    let p_elems = p.enumerate(limit)?;
    let q_elems = q.enumerate(limit)?;
    let h_at = |pe: &DeskElem, qe: &DeskElem| -> DeskElem {
        h.get(&(pe.clone(), qe.clone())).cloned().unwrap_or_else(|| g.zero())
    };
    let g2 = g.clone();
    let g3 = g.clone();
    let p2 = p.clone();
    let q2 = q.clone();
    BiextCocycle::from_fn(
        p.clone(),
        q.clone(),
        g.clone(),
        &p_elems,
        &q_elems,
        |p1, p2e, qe| {
            let sum = p2.add(p1, p2e)?;
            let a = h_at(&sum, qe);
            let b = h_at(p1, qe);
            let c = h_at(p2e, qe);
            g2.sub(&g2.sub(&a, &b)?, &c)
        },
        |pe, q1, q2e| {
            let sum = q2.add(q1, q2e)?;
            let a = h_at(pe, &sum);
            let b = h_at(pe, q1);
            let c = h_at(pe, q2e);
            g3.sub(&g3.sub(&a, &b)?, &c)
        },
    )
}

/// Verify every cocycle identity with both arguments ranging over the full
/// groups. P and Q must be finite and within the enumeration budget.
pub fn verify_biext_cocycle(c: &BiextCocycle) -> Result<VerifyReport> {
    let limit = crate::limits::max_enumeration();
    let p_elems = c.p.enumerate(limit)?;
    let q_elems = c.q.enumerate(limit)?;
    verify_biext_cocycle_on(c, &p_elems, &q_elems)
}

/// Verify the cocycle identities over explicit argument windows. Identity
/// instances whose intermediate sums leave the windows are skipped, which is
/// what makes lattice windows usable; the report counts what actually ran.
pub fn verify_biext_cocycle_on(
    c: &BiextCocycle,
    p_elems: &[DeskElem],
    q_elems: &[DeskElem],
) -> Result<VerifyReport> {
    let mut report = VerifyReport::empty();
    let p_set: BTreeSet<&DeskElem> = p_elems.iter().collect();
    let q_set: BTreeSet<&DeskElem> = q_elems.iter().collect();
    let pz = c.p.zero();
    let qz = c.q.zero();
    let gz = c.g.zero();

    let size = (p_elems.len() as u128)
        .saturating_pow(3)
        .saturating_mul(q_elems.len() as u128)
        .saturating_add((q_elems.len() as u128).saturating_pow(3).saturating_mul(p_elems.len() as u128))
        .saturating_add(
            (p_elems.len() as u128)
                .saturating_pow(2)
                .saturating_mul((q_elems.len() as u128).saturating_pow(2)),
        );
    check_enumeration(size)?;

    for (k, v) in c.phi_table() {
        if !c.g.is_member(v)? {
            report.failures.push(CheckFailure {
                check: "value-membership".into(),
                witness: format!("phi({}, {}; {}) = {} is outside the value group", k.0, k.1, k.2, v),
            });
        }
    }
    for (k, v) in c.psi_table() {
        if !c.g.is_member(v)? {
            report.failures.push(CheckFailure {
                check: "value-membership".into(),
                witness: format!("psi({}; {}, {}) = {} is outside the value group", k.0, k.1, k.2, v),
            });
        }
    }

    // normalization
    for pe in p_elems {
        for qe in q_elems {
            report.instances += 1;
            if c.phi_at(&pz, pe, qe) != gz {
                report.failures.push(CheckFailure {
                    check: "normalization".into(),
                    witness: format!("phi(0, {pe}; {qe}) != 0"),
                });
            }
            if c.psi_at(pe, &qz, qe) != gz {
                report.failures.push(CheckFailure {
                    check: "normalization".into(),
                    witness: format!("psi({pe}; 0, {qe}) != 0"),
                });
            }
        }
    }

    // symmetry
    for p1 in p_elems {
        for p2 in p_elems {
            for qe in q_elems {
                report.instances += 1;
                if c.phi_at(p1, p2, qe) != c.phi_at(p2, p1, qe) {
                    report.failures.push(CheckFailure {
                        check: "symmetry".into(),
                        witness: format!("phi({p1}, {p2}; {qe}) != phi({p2}, {p1}; {qe})"),
                    });
                }
            }
        }
    }
    for pe in p_elems {
        for q1 in q_elems {
            for q2 in q_elems {
                report.instances += 1;
                if c.psi_at(pe, q1, q2) != c.psi_at(pe, q2, q1) {
                    report.failures.push(CheckFailure {
                        check: "symmetry".into(),
                        witness: format!("psi({pe}; {q1}, {q2}) != psi({pe}; {q2}, {q1})"),
                    });
                }
            }
        }
    }

    // cocycle identity in the P direction
    for p1 in p_elems {
        for p2 in p_elems {
            let p12 = c.p.add(p1, p2)?;
            if !p_set.contains(&p12) {
                continue;
            }
            for p3 in p_elems {
                let p23 = c.p.add(p2, p3)?;
                if !p_set.contains(&p23) {
                    continue;
                }
                for qe in q_elems {
                    report.instances += 1;
                    let lhs = c.g.add(&c.phi_at(p1, p2, qe), &c.phi_at(&p12, p3, qe))?;
                    let rhs = c.g.add(&c.phi_at(p2, p3, qe), &c.phi_at(p1, &p23, qe))?;
                    if lhs != rhs {
                        report.failures.push(CheckFailure {
                            check: "p-cocycle".into(),
                            witness: format!("p1={p1}, p2={p2}, p3={p3}, q={qe}"),
                        });
                    }
                }
            }
        }
    }

    // cocycle identity in the Q direction
    for q1 in q_elems {
        for q2 in q_elems {
            let q12 = c.q.add(q1, q2)?;
            if !q_set.contains(&q12) {
                continue;
            }
            for q3 in q_elems {
                let q23 = c.q.add(q2, q3)?;
                if !q_set.contains(&q23) {
                    continue;
                }
                for pe in p_elems {
                    report.instances += 1;
                    let lhs = c.g.add(&c.psi_at(pe, q1, q2), &c.psi_at(pe, &q12, q3))?;
                    let rhs = c.g.add(&c.psi_at(pe, q2, q3), &c.psi_at(pe, q1, &q23))?;
                    if lhs != rhs {
                        report.failures.push(CheckFailure {
                            check: "q-cocycle".into(),
                            witness: format!("p={pe}, q1={q1}, q2={q2}, q3={q3}"),
                        });
                    }
                }
            }
        }
    }

    // interchange between the two directions
    for p1 in p_elems {
        for p2 in p_elems {
            let p12 = c.p.add(p1, p2)?;
            if !p_set.contains(&p12) {
                continue;
            }
            for q1 in q_elems {
                for q2 in q_elems {
                    let q12 = c.q.add(q1, q2)?;
                    if !q_set.contains(&q12) {
                        continue;
                    }
                    report.instances += 1;
                    let lhs = c.g.add(
                        &c.g.add(&c.phi_at(p1, p2, q1), &c.phi_at(p1, p2, q2))?,
                        &c.psi_at(&p12, q1, q2),
                    )?;
                    let rhs = c.g.add(
                        &c.g.add(&c.psi_at(p1, q1, q2), &c.psi_at(p2, q1, q2))?,
                        &c.phi_at(p1, p2, &q12),
                    )?;
                    if lhs != rhs {
                        report.failures.push(CheckFailure {
                            check: "interchange".into(),
                            witness: format!("p1={p1}, p2={p2}, q1={q1}, q2={q2}"),
                        });
                    }
                }
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finite::FiniteAbelianGroup;

    fn z2() -> DeskGroup {
        DeskGroup::Finite(FiniteAbelianGroup::cyclic(2).unwrap())
    }

    fn z4() -> DeskGroup {
        DeskGroup::Finite(FiniteAbelianGroup::cyclic(4).unwrap())
    }

    #[test]
    fn zero_cocycle_verifies() {
        let c = BiextCocycle::zero(z2(), z2(), z4());
        let r = verify_biext_cocycle(&c).unwrap();
        assert!(r.ok());
        assert!(r.instances > 0);
    }

    #[test]
    fn carry_cocycle_on_z2_is_valid_and_detects_perturbation() {
        // psi(p; q1, q2) = 2 * p * carry(q1, q2) in Z/4 is the classic
        // extension cocycle: it builds Z/4 from Z/2 x Z/2 in the q direction.
        let (p, q, g) = (z2(), z2(), z4());
        let one = |e: &DeskElem| matches!(e, DeskElem::Ints(v) if v[0] == 1);
        let pe = p.enumerate(10).unwrap();
        let qe = q.enumerate(10).unwrap();
        let mut c = BiextCocycle::from_fn(
            p,
            q,
            g,
            &pe,
            &qe,
            |_, _, _| Ok(DeskElem::Ints(vec![0])),
            |pp, q1, q2| {
                let carry = one(q1) && one(q2);
                Ok(DeskElem::Ints(vec![if carry && one(pp) { 2 } else { 0 }]))
            },
        )
        .unwrap();
        let r = verify_biext_cocycle(&c).unwrap();
        assert!(r.ok(), "unexpected failures: {:?}", r.failures);

        // breaking one entry must produce a named witness
        c.set_psi(
            DeskElem::Ints(vec![1]),
            DeskElem::Ints(vec![0]),
            DeskElem::Ints(vec![1]),
            DeskElem::Ints(vec![2]),
        );
        let r = verify_biext_cocycle(&c).unwrap();
        assert!(!r.ok());
        assert!(r.failures.iter().any(|f| f.check == "normalization"));
    }

    #[test]
    fn coboundaries_are_cocycles_with_trivial_torsion_pairing() {
        let (p, q, g) = (z2(), z2(), z4());
        let mut h = BTreeMap::new();
        h.insert((DeskElem::Ints(vec![1]), DeskElem::Ints(vec![1])), DeskElem::Ints(vec![3]));
        let c = coboundary_cocycle(p, q, g, &h).unwrap();
        let r = verify_biext_cocycle(&c).unwrap();
        assert!(r.ok(), "unexpected failures: {:?}", r.failures);
        // the induced pairing of a coboundary is identically zero
        let x = DeskElem::Ints(vec![1]);
        let y = DeskElem::Ints(vec![1]);
        let e = c.torsion_pairing(&x, &y, 2).unwrap();
        assert_eq!(e, DeskElem::Ints(vec![0]));
    }

    #[test]
    fn baer_sum_adds_tables() {
        let (p, q, g) = (z2(), z2(), z4());
        let mut c1 = BiextCocycle::zero(p.clone(), q.clone(), g.clone());
        c1.set_psi(
            DeskElem::Ints(vec![1]),
            DeskElem::Ints(vec![1]),
            DeskElem::Ints(vec![1]),
            DeskElem::Ints(vec![2]),
        );
        let c2 = c1.clone();
        let s = c1.baer_sum(&c2).unwrap();
        assert_eq!(
            s.psi_at(&DeskElem::Ints(vec![1]), &DeskElem::Ints(vec![1]), &DeskElem::Ints(vec![1])),
            DeskElem::Ints(vec![0])
        );
        let n = c1.baer_neg().unwrap();
        let z = c1.baer_sum(&n).unwrap();
        assert!(z.is_zero().unwrap());
    }
}
