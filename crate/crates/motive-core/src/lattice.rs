use crate::error::{Error, Result};
use crate::finite::FiniteAbelianGroup;
use crate::mat::IntMat;
use crate::snf::{smith_extended, smith_normal_form};

/// Cokernel of a map Z^cols -> Z^rows, read off the Smith normal form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CokernelDescription {
    /// finite cyclic orders > 1, in divisibility order
    pub invariant_factors: Vec<i64>,
    pub free_rank: usize,
}

impl CokernelDescription {
    pub fn order(&self) -> Option<u128> {
        if self.free_rank > 0 {
            return None;
        }
        Some(self.invariant_factors.iter().map(|&d| d as u128).product())
    }

    pub fn torsion_group(&self) -> FiniteAbelianGroup {
        FiniteAbelianGroup::new(self.invariant_factors.clone())
            .expect("invariant factors are positive")
    }
}

pub fn cokernel(m: &IntMat) -> Result<CokernelDescription> {
    let (_, d, _) = smith_normal_form(m)?;
    let bound = m.rows().min(m.cols());
    let mut invariant_factors = Vec::new();
    let mut rank = 0;
    for i in 0..bound {
        let e = d.get(i, i);
        if e != 0 {
            rank += 1;
            if e > 1 {
                invariant_factors.push(e);
            }
        }
    }
    Ok(CokernelDescription { invariant_factors, free_rank: m.rows() - rank })
}

/// A map of lattices is the finite-index part of an isogeny exactly when it
/// is square of full rank.
pub fn is_lattice_isogeny_part(m: &IntMat) -> Result<bool> {
    if !m.is_square() {
        return Ok(false);
    }
    Ok(m.det()? != 0)
}

/// Hom(Z^src, Z^dst) as a free module of rank src * dst; basis index pairs
/// are flattened row-major.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HomLattice {
    pub src_rank: usize,
    pub dst_rank: usize,
}

pub fn hom_lattice(src_rank: usize, dst_rank: usize) -> HomLattice {
    HomLattice { src_rank, dst_rank }
}

impl HomLattice {
    pub fn rank(&self) -> usize {
        self.src_rank * self.dst_rank
    }

    pub fn basis_index(&self, i: usize, j: usize) -> usize {
        assert!(i < self.src_rank && j < self.dst_rank);
        i * self.dst_rank + j
    }
}

/// Rank of Z^a (x) Z^b with basis e_i (x) f_j at flattened index i * b + j.
pub fn tensor_rank(a: usize, b: usize) -> usize {
    a * b
}

pub fn tensor_index(i: usize, j: usize, b_rank: usize) -> usize {
    i * b_rank + j
}

/// The induced map on tensor products; same flattening as `tensor_index`.
pub fn tensor_map(f: &IntMat, g: &IntMat) -> Result<IntMat> {
    f.kronecker(g)
}

/// A column basis for the span of the columns of `gens`.
pub fn column_span_basis(gens: &IntMat) -> Result<IntMat> {
    let s = smith_extended(gens)?;
    // span(gens) = span(u_inv * d), and d has `rank` nonzero columns
    let mut basis = IntMat::zero(gens.rows(), s.rank);
    for k in 0..s.rank {
        let e = s.d.get(k, k);
        for i in 0..gens.rows() {
            let v = s
                .u_inv
                .get(i, k)
                .checked_mul(e)
                .ok_or(Error::Overflow("column span basis"))?;
            basis.set(i, k, v);
        }
    }
    Ok(basis)
}

/// Quotient L1 / L2 of two column-generated lattices with L2 contained in L1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuotientDescription {
    /// finite cyclic orders > 1, in divisibility order
    pub invariant_factors: Vec<i64>,
    pub free_rank: usize,
    /// one ambient column per invariant factor, generating the torsion classes
    pub torsion_generators: IntMat,
    /// ambient columns generating the free part
    pub free_generators: IntMat,
}

pub fn lattice_quotient(big: &IntMat, small: &IntMat) -> Result<QuotientDescription> {
    if big.rows() != small.rows() {
        return Err(Error::DimensionMismatch(format!(
            "lattices in Z^{} and Z^{}",
            big.rows(),
            small.rows()
        )));
    }
    let n = big.rows();
    let b1 = column_span_basis(big)?;
    let b2 = column_span_basis(small)?;
    let r1 = b1.cols();
    let r2 = b2.cols();

    // coordinates of L2 generators with respect to the basis of L1:
    // from u1 * b1 = d1 (top rows), the coordinate matrix is d1^-1 * u1 * b2
    let s1 = smith_extended(&b1)?;
    let lifted = s1.u.mul(&b2)?;
    let mut x = IntMat::zero(r1, r2);
    for i in 0..r1 {
        let d = s1.d.get(i, i);
        for j in 0..r2 {
            let e = lifted.get(i, j);
            if e % d != 0 {
                return Err(Error::InvalidGroup(
                    "second lattice is not contained in the first".into(),
                ));
            }
            x.set(i, j, e / d);
        }
    }
    for i in r1..n {
        for j in 0..r2 {
            if lifted.get(i, j) != 0 {
                return Err(Error::InvalidGroup(
                    "second lattice is not contained in the first".into(),
                ));
            }
        }
    }

    // L1/L2 = Z^r1 / x Z^r2; generators come back through the basis of L1
    let sx = smith_extended(&x)?;
    let mut invariant_factors = Vec::new();
    let mut torsion_cols: Vec<usize> = Vec::new();
    for i in 0..r1.min(r2) {
        let e = sx.d.get(i, i);
        if e > 1 {
            invariant_factors.push(e);
            torsion_cols.push(i);
        }
    }
    let free_rank = r1 - sx.rank;
    let class_basis = b1.mul(&sx.u_inv)?;
    let mut torsion_generators = IntMat::zero(n, torsion_cols.len());
    for (k, &c) in torsion_cols.iter().enumerate() {
        for i in 0..n {
            torsion_generators.set(i, k, class_basis.get(i, c));
        }
    }
    let mut free_generators = IntMat::zero(n, free_rank);
    for (k, c) in (sx.rank..r1).enumerate() {
        for i in 0..n {
            free_generators.set(i, k, class_basis.get(i, c));
        }
    }
    Ok(QuotientDescription { invariant_factors, free_rank, torsion_generators, free_generators })
}
