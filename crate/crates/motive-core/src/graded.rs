//! Weight-graded bookkeeping for tensor products of motives: the summand
//! decomposition of a truncated tensor power with multiplicities, the
//! rank identities relating its designated-factor and direct-quotient
//! sides, the weight obstruction matrix for components of a morphism out
//! of a twofold product, and the pairwise reduction of morphisms out of
//! longer products.

use crate::biext_group::BiextGroupDescription;
use crate::error::{Error, Result};
use crate::motive::{OneMotive, WeightGraded};
use crate::motive_biext::biext_one_of_motives;

/// One summand of the decomposition of a truncated tensor power: a block
/// of lattice factors indexed by `nu_indices`, tensored with the
/// truncated product of the motives indexed by `iota_indices`. Index 0
/// names the unit motive in either list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GradedSummand {
    pub nu_indices: Vec<usize>,
    pub iota_indices: Vec<usize>,
    pub multiplicity: usize,
    pub factor_description: String,
}

fn sorted_subsets(pool: &[usize], size: usize) -> Vec<Vec<usize>> {
    if size == 0 {
        return vec![Vec::new()];
    }
    if pool.len() < size {
        return Vec::new();
    }
    let mut out = Vec::new();
    for (idx, &first) in pool.iter().enumerate() {
        if pool.len() - idx < size {
            break;
        }
        for mut rest in sorted_subsets(&pool[idx + 1..], size - 1) {
            let mut s = Vec::with_capacity(size);
            s.push(first);
            s.append(&mut rest);
            out.push(s);
        }
    }
    out
}

fn check_truncation_bounds(l: usize, i: usize) -> Result<()> {
    if i < 1 {
        return Err(Error::IndexOutOfRange(
            "truncation index must be at least 1".into(),
        ));
    }
    if l + 1 < i {
        return Err(Error::IndexOutOfRange(format!(
            "truncation index {i} exceeds {} for {l} tensor factors",
            l + 1
        )));
    }
    Ok(())
}

/// A motive concentrated in weight 0: no abelian part and no torus.
fn is_pure_weight_zero(motives: &[OneMotive], j: usize) -> bool {
    if j == 0 {
        return true;
    }
    let g = motives[j - 1].weight_graded();
    g.grm1_dim == 0 && g.grm2_rank == 0
}

fn summand_description(nu: &[usize], iota: &[usize], i: usize) -> String {
    let mut parts: Vec<String> = nu.iter().map(|k| format!("X{k}")).collect();
    if iota.is_empty() {
        if parts.is_empty() {
            return "Z(0)".into();
        }
    } else {
        let inner = iota
            .iter()
            .map(|j| format!("M{j}"))
            .collect::<Vec<_>>()
            .join(" (x) ");
        parts.push(format!("({inner} / W(-{i}))"));
    }
    parts.join(" (x) ")
}

/// Decompose the quotient of an l-fold tensor product by its weight
/// filtration step `-i` into lattice-times-truncated-block summands.
/// `nu_indices` ranges over the (l-i+1)-subsets of {1,...,l} and
/// `iota_indices` over the disjoint (i-1)-subsets of {0,...,l}; the unit
/// slot 0 may appear only in the iota block. Each summand carries the
/// multiplicity |nu| + (number of pure weight 0 motives in the iota
/// block), floored at 1.
pub fn graded_decomposition(motives: &[OneMotive], i: usize) -> Result<Vec<GradedSummand>> {
    let l = motives.len();
    check_truncation_bounds(l, i)?;
    let nu_size = l + 1 - i;
    let iota_size = i - 1;
    let nu_pool: Vec<usize> = (1..=l).collect();
    let mut out = Vec::new();
    for nu in sorted_subsets(&nu_pool, nu_size) {
        let iota_pool: Vec<usize> = (0..=l).filter(|j| !nu.contains(j)).collect();
        for iota in sorted_subsets(&iota_pool, iota_size) {
            let m = iota
                .iter()
                .filter(|&&j| is_pure_weight_zero(motives, j))
                .count();
            out.push(GradedSummand {
                multiplicity: (nu.len() + m).max(1),
                factor_description: summand_description(&nu, &iota, i),
                nu_indices: nu.clone(),
                iota_indices: iota,
            });
        }
    }
    Ok(out)
}

/// Both sides of the graded rank identity for the quotient of an l-fold
/// tensor product by filtration step `-i`: `formula[w]` and
/// `quotient[w]` hold the rank of the weight `-w` piece of the
/// designated-factor sum and of the direct quotient respectively.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GradedRankCheck {
    pub formula: Vec<u64>,
    pub quotient: Vec<u64>,
    pub gr0_multiplier: u64,
    pub grm1_multiplier: u64,
}

impl GradedRankCheck {
    fn at(v: &[u64], w: usize) -> u64 {
        v.get(w).copied().unwrap_or(0)
    }

    pub fn gr0_matches(&self) -> bool {
        Self::at(&self.formula, 0) == self.gr0_multiplier * Self::at(&self.quotient, 0)
    }

    pub fn grm1_matches(&self) -> bool {
        Self::at(&self.formula, 1) == self.grm1_multiplier * Self::at(&self.quotient, 1)
    }

    pub fn holds(&self) -> bool {
        self.gr0_matches() && self.grm1_matches()
    }
}

fn graded_profile(m: &OneMotive) -> [u64; 3] {
    let g = m.weight_graded();
    [g.gr0_rank as u64, g.grm1_dim as u64, g.grm2_rank as u64]
}

/// Accumulate the graded ranks of the truncated tensor product of
/// `profile` by enumerating all weight words, scaled by `scale`.
fn add_weight_words(profile: &[[u64; 3]], i: usize, acc: &mut [u64], scale: u64) {
    let n = profile.len();
    let mut digits = vec![0usize; n];
    loop {
        let w: usize = digits.iter().sum();
        if w < i {
            let prod: u64 = digits
                .iter()
                .enumerate()
                .map(|(k, &d)| profile[k][d])
                .product();
            acc[w] += scale * prod;
        }
        let mut pos = 0;
        loop {
            if pos == n {
                return;
            }
            digits[pos] += 1;
            if digits[pos] < 3 {
                break;
            }
            digits[pos] = 0;
            pos += 1;
        }
    }
}

/// Compare the designated-factor sum against the direct quotient: the
/// formula side sums, over each choice of a designated lattice factor
/// X_k, the graded ranks of X_k tensored with the truncated product of
/// the remaining motives; the quotient side expands the full product
/// into weight words. The weight 0 ranks must agree up to the factor l
/// and the weight -1 ranks up to l-1.
pub fn graded_rank_check(motives: &[OneMotive], i: usize) -> Result<GradedRankCheck> {
    let l = motives.len();
    check_truncation_bounds(l, i)?;
    let profile: Vec<[u64; 3]> = motives.iter().map(graded_profile).collect();
    let width = 2 * l + 1;

    let mut quotient = vec![0u64; width];
    add_weight_words(&profile, i, &mut quotient, 1);

    let mut formula = vec![0u64; width];
    for k in 0..l {
        let others: Vec<[u64; 3]> = profile
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != k)
            .map(|(_, p)| *p)
            .collect();
        add_weight_words(&others, i, &mut formula, profile[k][0]);
    }

    Ok(GradedRankCheck {
        formula,
        quotient,
        gr0_multiplier: l as u64,
        grm1_multiplier: l.saturating_sub(1) as u64,
    })
}

/// Status of one cell in the weight obstruction matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellStatus {
    /// row and column weights differ, so the component vanishes
    ForbiddenByWeight,
    /// weights agree but one side has rank zero
    ZeroRank,
    /// a nonzero component can live here
    PossiblyNonzero,
}

/// A labeled graded piece: a single weight word with its rank.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GradedPiece {
    pub label: String,
    pub weight: i64,
    pub rank: usize,
}

/// The weight obstruction matrix for components of a morphism from a
/// twofold tensor product to a third motive: rows are the nine weight
/// words of the product, columns the three graded pieces of the target.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentMatrix {
    pub rows: Vec<GradedPiece>,
    pub cols: Vec<GradedPiece>,
    pub cells: Vec<Vec<CellStatus>>,
}

impl ComponentMatrix {
    pub fn status(&self, row: usize, col: usize) -> CellStatus {
        self.cells[row][col]
    }

    /// Labels of all cells where a nonzero component can live, row by row.
    pub fn component_cells(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        for (r, row) in self.rows.iter().enumerate() {
            for (c, col) in self.cols.iter().enumerate() {
                if self.cells[r][c] == CellStatus::PossiblyNonzero {
                    out.push((row.label.clone(), col.label.clone()));
                }
            }
        }
        out
    }

    /// Weight -1 components land in maps between abelian parts, which
    /// this library names but does not compute.
    pub fn is_symbolic(&self, row: usize, col: usize) -> bool {
        self.cells[row][col] == CellStatus::PossiblyNonzero && self.rows[row].weight == -1
    }
}

fn graded_pieces(g: WeightGraded, tag: &str) -> Vec<GradedPiece> {
    vec![
        GradedPiece { label: format!("X{tag}"), weight: 0, rank: g.gr0_rank },
        GradedPiece { label: format!("A{tag}"), weight: -1, rank: g.grm1_dim },
        GradedPiece { label: format!("Y{tag}(1)"), weight: -2, rank: g.grm2_rank },
    ]
}

/// Mark every weight-mismatched component of a morphism from the product
/// of the first two motives into the third as forbidden, and every
/// weight-matched component with a rank-zero side as empty. Only the
/// graded ranks of the inputs enter; the mixed structure data never does.
pub fn weight_component_solver(
    m1: &OneMotive,
    m2: &OneMotive,
    m3: &OneMotive,
) -> ComponentMatrix {
    let p1 = graded_pieces(m1.weight_graded(), "1");
    let p2 = graded_pieces(m2.weight_graded(), "2");
    let cols = graded_pieces(m3.weight_graded(), "3");

    let mut rows = Vec::with_capacity(9);
    for total in 0..=4i64 {
        for a in &p1 {
            for b in &p2 {
                if a.weight + b.weight == -total {
                    rows.push(GradedPiece {
                        label: format!("{} (x) {}", a.label, b.label),
                        weight: -total,
                        rank: a.rank * b.rank,
                    });
                }
            }
        }
    }

    let cells = rows
        .iter()
        .map(|row| {
            cols.iter()
                .map(|col| {
                    if row.weight != col.weight {
                        CellStatus::ForbiddenByWeight
                    } else if row.rank == 0 || col.rank == 0 {
                        CellStatus::ZeroRank
                    } else {
                        CellStatus::PossiblyNonzero
                    }
                })
                .collect()
        })
        .collect();

    ComponentMatrix { rows, cols, cells }
}

/// One pairwise term of the reduction of morphisms out of an l-fold
/// tensor product: the biextension group of the (first, second) source
/// pair by the target, or its name alone when the shapes are outside
/// what the library computes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HomTensorTerm {
    pub first: usize,
    pub second: usize,
    pub multiplicity: usize,
    pub group: Option<BiextGroupDescription>,
    pub label: String,
}

/// The pairwise reduction of the morphism group out of an l-fold tensor
/// product, tallied both over ordered and over unordered index pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HomTensorGroup {
    pub terms: Vec<HomTensorTerm>,
    pub ordered_rank: usize,
    pub unordered_rank: usize,
    pub symbolic_terms: usize,
}

/// Reduce the morphism group out of the tensor product of `motives`
/// into `target` to its pairwise biextension terms. Every ordered pair
/// (i, j) with i distinct from j contributes one term, weighted by the
/// multiplicity of the corresponding pair summand of the decomposition
/// truncated at filtration step -3. Pairs outside computable shapes are
/// kept as named symbolic terms and excluded from the rank tallies.
pub fn hom_tensor_group(motives: &[OneMotive], target: &OneMotive) -> Result<HomTensorGroup> {
    let l = motives.len();
    if l < 2 {
        return Err(Error::DimensionMismatch(
            "pairwise reduction needs at least two tensor factors".into(),
        ));
    }
    let summands = graded_decomposition(motives, 3)?;
    let pair_multiplicity = |a: usize, b: usize| -> usize {
        let key = if a < b { [a, b] } else { [b, a] };
        summands
            .iter()
            .find(|s| s.iota_indices == key)
            .map_or(1, |s| s.multiplicity)
    };

    let mut terms = Vec::new();
    let mut ordered_rank = 0usize;
    let mut unordered_rank = 0usize;
    let mut symbolic_terms = 0usize;
    for i in 1..=l {
        for j in 1..=l {
            if i == j {
                continue;
            }
            let multiplicity = pair_multiplicity(i, j);
            let group = match biext_one_of_motives(&motives[i - 1], &motives[j - 1], target) {
                Ok(g) => Some(g),
                Err(Error::UnsupportedShape(_)) => None,
                Err(e) => return Err(e),
            };
            match &group {
                Some(g) => {
                    ordered_rank += multiplicity * g.free_rank;
                    if i < j {
                        unordered_rank += multiplicity * g.free_rank;
                    }
                }
                None => symbolic_terms += 1,
            }
            terms.push(HomTensorTerm {
                first: i,
                second: j,
                multiplicity,
                group,
                label: format!("Biext1(M{i}, M{j}; M)"),
            });
        }
    }
    Ok(HomTensorGroup { terms, ordered_rank, unordered_rank, symbolic_terms })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::Curve;
    use crate::field::PrimeField;
    use crate::motive::{cartier_dual, motive_from_seven_tuple, AbelianModel};

    fn f5() -> PrimeField {
        PrimeField::new(5).unwrap()
    }

    fn toric(psi: Vec<Vec<i64>>) -> OneMotive {
        OneMotive::torus_only(f5(), psi).unwrap()
    }

    fn full_motive(psi_value: i64) -> OneMotive {
        let curve = Curve::new(f5(), 1, 0).unwrap();
        let origin = vec![curve.point(0, 0).unwrap()];
        motive_from_seven_tuple(
            f5(),
            1,
            1,
            AbelianModel::new(vec![curve]),
            vec![origin.clone()],
            vec![origin],
            vec![vec![psi_value]],
            2,
        )
        .unwrap()
    }

    fn lattice_abelian() -> OneMotive {
        let curve = Curve::new(f5(), 1, 0).unwrap();
        motive_from_seven_tuple(
            f5(),
            1,
            0,
            AbelianModel::new(vec![curve.clone()]),
            vec![vec![curve.point(0, 0).unwrap()]],
            Vec::new(),
            vec![Vec::new()],
            2,
        )
        .unwrap()
    }

    #[test]
    fn single_factor_truncation_is_its_lattice() {
        let summands = graded_decomposition(&[toric(vec![vec![2]])], 1).unwrap();
        assert_eq!(summands.len(), 1);
        assert_eq!(summands[0].nu_indices, vec![1]);
        assert!(summands[0].iota_indices.is_empty());
        assert_eq!(summands[0].multiplicity, 1);
        assert_eq!(summands[0].factor_description, "X1");
    }

    #[test]
    fn deep_truncation_of_two_factors_lists_pairs_with_the_unit_slot() {
        let motives = [OneMotive::lattice_only(f5(), 1), toric(vec![vec![2]])];
        let summands = graded_decomposition(&motives, 3).unwrap();
        let iotas: Vec<&[usize]> =
            summands.iter().map(|s| s.iota_indices.as_slice()).collect();
        assert_eq!(iotas, vec![&[0, 1][..], &[0, 2][..], &[1, 2][..]]);
        assert!(summands.iter().all(|s| s.nu_indices.is_empty()));
        // slot 0 and the pure weight 0 first motive both count
        assert_eq!(summands[0].multiplicity, 2);
        assert_eq!(summands[1].multiplicity, 1);
        assert_eq!(summands[2].multiplicity, 1);
        assert_eq!(summands[0].factor_description, "(M0 (x) M1 / W(-3))");
    }

    #[test]
    fn truncation_index_bounds_are_enforced() {
        let motives = [toric(vec![vec![2]]), toric(vec![vec![3]])];
        assert!(matches!(
            graded_decomposition(&motives, 0),
            Err(Error::IndexOutOfRange(_))
        ));
        assert!(matches!(
            graded_decomposition(&motives, 4),
            Err(Error::IndexOutOfRange(_))
        ));
        assert!(graded_decomposition(&motives, 3).is_ok());
    }

    #[test]
    fn rank_check_matches_hand_expansion_for_two_toric_factors() {
        let motives = [toric(vec![vec![2]]), toric(vec![vec![3]])];
        let check = graded_rank_check(&motives, 3).unwrap();
        assert_eq!(check.formula, vec![2, 0, 2, 0, 0]);
        assert_eq!(check.quotient, vec![1, 0, 2, 0, 0]);
        assert_eq!(check.gr0_multiplier, 2);
        assert_eq!(check.grm1_multiplier, 1);
        assert!(check.holds());
    }

    #[test]
    fn rank_check_ratios_hold_on_a_mixed_profile() {
        let motives = [full_motive(4), toric(vec![vec![2], vec![3]]), lattice_abelian()];
        let check = graded_rank_check(&motives, 2).unwrap();
        assert_eq!(check.formula[0], 6);
        assert_eq!(check.formula[1], 8);
        assert_eq!(check.quotient[0], 2);
        assert_eq!(check.quotient[1], 4);
        assert!(check.holds());
    }

    #[test]
    fn component_matrix_for_toric_sources_and_split_target() {
        let m1 = toric(vec![vec![2]]);
        let m2 = cartier_dual(&m1);
        let m3 = toric(vec![vec![2]]);
        let cells = weight_component_solver(&m1, &m2, &m3).component_cells();
        assert_eq!(cells.len(), 3);
        assert!(cells.contains(&("X1 (x) X2".into(), "X3".into())));
        assert!(cells.contains(&("X1 (x) Y2(1)".into(), "Y3(1)".into())));
        assert!(cells.contains(&("Y1(1) (x) X2".into(), "Y3(1)".into())));
    }

    #[test]
    fn component_matrix_for_torus_free_target_keeps_only_weight_zero() {
        let m1 = toric(vec![vec![2]]);
        let m2 = cartier_dual(&m1);
        let cells = weight_component_solver(&m1, &m2, &lattice_abelian()).component_cells();
        assert_eq!(cells, vec![("X1 (x) X2".into(), "X3".into())]);
    }

    #[test]
    fn weight_minus_one_components_are_symbolic() {
        let m1 = full_motive(4);
        let m2 = cartier_dual(&m1);
        let matrix = weight_component_solver(&m1, &m2, &lattice_abelian());
        let cells = matrix.component_cells();
        assert_eq!(cells.len(), 3);
        assert!(cells.contains(&("X1 (x) A2".into(), "A3".into())));
        assert!(cells.contains(&("A1 (x) X2".into(), "A3".into())));
        let mut symbolic = Vec::new();
        for r in 0..matrix.rows.len() {
            for c in 0..matrix.cols.len() {
                if matrix.is_symbolic(r, c) {
                    symbolic.push(matrix.rows[r].weight);
                }
            }
        }
        assert_eq!(symbolic, vec![-1, -1]);
    }

    #[test]
    fn weight_rule_forbids_lattice_to_semiabelian_and_back() {
        let m1 = full_motive(4);
        let m2 = cartier_dual(&m1);
        let matrix = weight_component_solver(&m1, &m2, &full_motive(4));
        let row_index = |label: &str| {
            matrix.rows.iter().position(|r| r.label == label).unwrap()
        };
        // the pure weight 0 row cannot reach the lower weight columns
        let top = row_index("X1 (x) X2");
        assert_eq!(matrix.status(top, 1), CellStatus::ForbiddenByWeight);
        assert_eq!(matrix.status(top, 2), CellStatus::ForbiddenByWeight);
        // rows with both factors below weight 0 cannot reach the lattice
        // column, and among them only the abelian pair reaches the torus
        for label in [
            "A1 (x) A2",
            "A1 (x) Y2(1)",
            "Y1(1) (x) A2",
            "X1 (x) Y2(1)",
            "Y1(1) (x) X2",
            "Y1(1) (x) Y2(1)",
        ] {
            let r = row_index(label);
            assert_eq!(matrix.status(r, 0), CellStatus::ForbiddenByWeight);
            assert_eq!(matrix.status(r, 1), CellStatus::ForbiddenByWeight);
            let expected = if matrix.rows[r].weight == -2 {
                CellStatus::PossiblyNonzero
            } else {
                CellStatus::ForbiddenByWeight
            };
            assert_eq!(matrix.status(r, 2), expected, "row {label}");
        }
    }

    #[test]
    fn solver_depends_only_on_graded_ranks() {
        let a = weight_component_solver(
            &toric(vec![vec![2]]),
            &toric(vec![vec![3]]),
            &full_motive(4),
        );
        let b = weight_component_solver(
            &toric(vec![vec![4]]),
            &toric(vec![vec![2]]),
            &full_motive(2),
        );
        assert_eq!(a, b);
    }

    #[test]
    fn two_factor_hom_group_is_the_single_biext_group() {
        let motives = [toric(vec![vec![2]]), toric(vec![vec![3]])];
        let target = OneMotive::lattice_only(f5(), 2);
        let hom = hom_tensor_group(&motives, &target).unwrap();
        assert_eq!(hom.terms.len(), 2);
        assert_eq!(hom.symbolic_terms, 0);
        assert!(hom.terms.iter().all(|t| t.multiplicity == 1));
        assert_eq!(
            hom.terms[0].group.as_ref().unwrap().free_rank,
            2
        );
        assert_eq!(hom.ordered_rank, 4);
        assert_eq!(hom.unordered_rank, 2);
    }

    #[test]
    fn unsupported_pairwise_terms_are_reported_symbolically() {
        let motives = [toric(vec![vec![2]]), toric(vec![vec![3]])];
        let target = toric(vec![vec![2]]);
        let hom = hom_tensor_group(&motives, &target).unwrap();
        assert_eq!(hom.symbolic_terms, 2);
        assert_eq!(hom.ordered_rank, 0);
        assert!(hom.terms.iter().all(|t| t.group.is_none()));
        assert_eq!(hom.terms[0].label, "Biext1(M1, M2; M)");
    }

    #[test]
    fn unit_factors_contribute_reindexing_multiplicities() {
        let motives = [
            OneMotive::unit(f5()),
            toric(vec![vec![2]]),
            toric(vec![vec![3]]),
        ];
        let target = OneMotive::lattice_only(f5(), 1);
        let hom = hom_tensor_group(&motives, &target).unwrap();
        assert_eq!(hom.terms.len(), 6);
        let mult_of = |i: usize, j: usize| {
            hom.terms
                .iter()
                .find(|t| t.first == i && t.second == j)
                .unwrap()
                .multiplicity
        };
        assert_eq!(mult_of(1, 2), 2);
        assert_eq!(mult_of(2, 1), 2);
        assert_eq!(mult_of(1, 3), 2);
        assert_eq!(mult_of(2, 3), 1);
        assert_eq!(hom.ordered_rank, 10);
        assert_eq!(hom.unordered_rank, 5);
    }

    #[test]
    fn pairwise_reduction_needs_two_factors() {
        let motives = [toric(vec![vec![2]])];
        assert!(matches!(
            hom_tensor_group(&motives, &OneMotive::unit(f5())),
            Err(Error::DimensionMismatch(_))
        ));
    }
}
