//! The tensor complex of two torus-only motives: three graded terms in
//! degrees 0, -1, -2 and two differentials assembled from the structure
//! maps by Kronecker products, composing to zero exactly.

use crate::error::{Error, Result};
use crate::mat::IntMat;
use crate::motive::OneMotive;
use crate::torus::unit_discrete_log;

/// One labeled summand of a graded term, with its lattice rank.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GradedTerm {
    pub label: String,
    pub weight: i64,
    pub rank: usize,
}

/// The complex of the tensor product of two torus-only motives. The
/// degree 0 term is the product of the two lattices, the degree -1 term
/// has two summands mixing a lattice with the other torus, and the
/// degree -2 term is the product of the tori. Differentials act on
/// flattened lattice coordinates (row-major over summands in order).
#[derive(Debug, Clone)]
pub struct ThreeTermComplex {
    pub c0: Vec<GradedTerm>,
    pub cm1: Vec<GradedTerm>,
    pub cm2: Vec<GradedTerm>,
    pub d0: IntMat,
    pub dm1: IntMat,
}

impl ThreeTermComplex {
    /// Total ranks of the three terms.
    pub fn ranks(&self) -> (usize, usize, usize) {
        let total = |ts: &[GradedTerm]| ts.iter().map(|t| t.rank).sum();
        (total(&self.c0), total(&self.cm1), total(&self.cm2))
    }
}

/// The exponent matrix of the structure map of a torus-only motive:
/// entry (j, i) is the discrete log of the (i, j) structure unit, so the
/// image of the i-th lattice generator is the cocharacter with the
/// exponents of column i.
fn structure_exponents(m: &OneMotive) -> Result<IntMat> {
    let mut a = IntMat::zero(m.ydual_rank(), m.x_rank());
    for i in 0..m.x_rank() {
        let mut x = vec![0i64; m.x_rank()];
        x[i] = 1;
        for j in 0..m.ydual_rank() {
            let mut y = vec![0i64; m.ydual_rank()];
            y[j] = 1;
            let u = m.psi_at(&x, &y)?;
            a.set(j, i, unit_discrete_log(m.field(), 0, u)? as i64);
        }
    }
    Ok(a)
}

/// Build the three-term complex of `m` tensor `n`, both without abelian
/// part. The first differential is (-id (x) u_n, u_m (x) id) into the
/// two middle summands; the second is u_m (x) id + id (x) u_n out of
/// them. Their composite is checked to vanish before returning.
pub fn tensor_complex(m: &OneMotive, n: &OneMotive) -> Result<ThreeTermComplex> {
    if m.abelian().dim() != 0 || n.abelian().dim() != 0 {
        return Err(Error::UnsupportedShape(
            "tensor complex needs motives without abelian parts".into(),
        ));
    }
    if m.field() != n.field() {
        return Err(Error::DimensionMismatch(
            "tensor complex factors live over different prime fields".into(),
        ));
    }
    let (xm, tm) = (m.x_rank(), m.ydual_rank());
    let (xn, tn) = (n.x_rank(), n.ydual_rank());
    let am = structure_exponents(m)?;
    let an = structure_exponents(n)?;

    let d0 = IntMat::identity(xm)
        .kronecker(&an)?
        .neg()?
        .vstack(&am.kronecker(&IntMat::identity(xn))?)?;
    let dm1 = am
        .kronecker(&IntMat::identity(tn))?
        .hstack(&IntMat::identity(tm).kronecker(&an)?)?;
    if !dm1.mul(&d0)?.is_zero() {
        return Err(Error::InvalidMotive(
            "tensor complex differentials do not compose to zero".into(),
        ));
    }

    let term = |label: &str, weight: i64, rank: usize| GradedTerm {
        label: label.into(),
        weight,
        rank,
    };
    Ok(ThreeTermComplex {
        c0: vec![term("X (x) X'", 0, xm * xn)],
        cm1: vec![
            term("X (x) Y'(1)", -2, xm * tn),
            term("Y(1) (x) X'", -2, tm * xn),
        ],
        cm2: vec![term("Y(1) (x) Y'(1)", -4, tm * tn)],
        d0,
        dm1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::PrimeField;
    use crate::motive::cartier_dual;

    fn f5() -> PrimeField {
        PrimeField::new(5).unwrap()
    }

    #[test]
    fn dual_pair_of_rank_one_lattices_has_ranks_one_two_one() {
        let m = OneMotive::torus_only(f5(), vec![vec![2]]).unwrap();
        let n = cartier_dual(&m);
        let c = tensor_complex(&m, &n).unwrap();
        assert_eq!(c.ranks(), (1, 2, 1));
        assert_eq!(c.d0.rows(), 2);
        assert_eq!(c.d0.cols(), 1);
        assert_eq!(c.dm1.rows(), 1);
        assert_eq!(c.dm1.cols(), 2);
        assert_eq!(c.d0.get(0, 0), -c.d0.get(1, 0));
        assert!(c.dm1.mul(&c.d0).unwrap().is_zero());
    }

    #[test]
    fn zero_structure_maps_give_zero_differentials() {
        let m = OneMotive::torus_only(f5(), vec![vec![1]]).unwrap();
        let n = OneMotive::torus_only(f5(), vec![vec![1]]).unwrap();
        let c = tensor_complex(&m, &n).unwrap();
        assert!(c.d0.is_zero());
        assert!(c.dm1.is_zero());
    }

    #[test]
    fn rank_two_lattices_give_ranks_four_eight_four() {
        let m = OneMotive::torus_only(f5(), vec![vec![2, 3], vec![1, 4]]).unwrap();
        let n = OneMotive::torus_only(f5(), vec![vec![4, 1], vec![2, 2]]).unwrap();
        let c = tensor_complex(&m, &n).unwrap();
        assert_eq!(c.ranks(), (4, 8, 4));
        let composite = c.dm1.mul(&c.d0).unwrap();
        for i in 0..composite.rows() {
            for j in 0..composite.cols() {
                assert_eq!(composite.get(i, j), 0, "composite nonzero at ({i}, {j})");
            }
        }
    }

    #[test]
    fn abelian_parts_are_rejected() {
        let m = OneMotive::torus_only(f5(), vec![vec![2]]).unwrap();
        let curve = crate::curve::Curve::new(f5(), 1, 0).unwrap();
        let a = OneMotive::abelian_only(curve, 2);
        assert!(matches!(
            tensor_complex(&m, &a),
            Err(Error::UnsupportedShape(_))
        ));
        assert!(matches!(
            tensor_complex(&a, &m),
            Err(Error::UnsupportedShape(_))
        ));
    }
}
