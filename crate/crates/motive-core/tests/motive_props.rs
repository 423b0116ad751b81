//! Property tests for the 1-motive layer: Cartier duality as an involution
//! that swaps the outer weights, transposition of the pairing table, the
//! derived torus component of the structure map, and isogeny bookkeeping.

use motive_core::curve::Curve;
use motive_core::field::PrimeField;
use motive_core::motive::{
    cartier_dual, is_isogeny, motive_from_seven_tuple, verify_motive_morphism, AbelianModel,
    AbelianPoint, MotiveMorphism, OneMotive,
};
use proptest::prelude::*;

fn f5() -> PrimeField {
    PrimeField::new(5).unwrap()
}

fn e5() -> Curve {
    Curve::new(f5(), 1, 0).unwrap()
}

fn build_motive(
    x: usize,
    t: usize,
    with_abelian: bool,
    v_idx: Vec<usize>,
    vstar_idx: Vec<usize>,
    psi: Vec<Vec<i64>>,
) -> OneMotive {
    let (model, pts): (AbelianModel, Vec<AbelianPoint>) = if with_abelian {
        let curve = e5();
        let torsion: Vec<AbelianPoint> = motive_core::curve::torsion_points(&curve, 2)
            .unwrap()
            .into_iter()
            .map(|p| vec![p])
            .collect();
        (AbelianModel::new(vec![curve]), torsion)
    } else {
        let model = AbelianModel::zero_variety();
        let zero = model.zero_point();
        (model, vec![zero; 4])
    };
    let v = v_idx.into_iter().map(|i| pts[i].clone()).collect();
    let vstar = vstar_idx.into_iter().map(|i| pts[i].clone()).collect();
    motive_from_seven_tuple(f5(), x, t, model, v, vstar, psi, 2).unwrap()
}

fn motive_strategy() -> impl Strategy<Value = OneMotive> {
    (0usize..=2, 0usize..=2, any::<bool>()).prop_flat_map(|(x, t, with_abelian)| {
        (
            proptest::collection::vec(0usize..4, x),
            proptest::collection::vec(0usize..4, t),
            proptest::collection::vec(proptest::collection::vec(1i64..=4, t), x),
        )
            .prop_map(move |(v_idx, vstar_idx, psi)| {
                build_motive(x, t, with_abelian, v_idx, vstar_idx, psi)
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn cartier_duality_is_an_involution(m in motive_strategy()) {
        let dd = cartier_dual(&cartier_dual(&m));
        prop_assert_eq!(dd, m);
    }

    #[test]
    fn duality_swaps_the_outer_weights(m in motive_strategy()) {
        let g = m.weight_graded();
        let dg = cartier_dual(&m).weight_graded();
        prop_assert_eq!(dg.gr0_rank, g.grm2_rank);
        prop_assert_eq!(dg.grm1_dim, g.grm1_dim);
        prop_assert_eq!(dg.grm2_rank, g.gr0_rank);
    }

    #[test]
    fn duality_transposes_the_pairing_and_swaps_the_point_maps(m in motive_strategy()) {
        let d = cartier_dual(&m);
        prop_assert_eq!(d.v(), m.vstar());
        prop_assert_eq!(d.vstar(), m.v());
        for i in 0..m.x_rank() {
            for j in 0..m.ydual_rank() {
                prop_assert_eq!(d.psi()[j][i], m.psi()[i][j]);
            }
        }
    }

    #[test]
    fn torus_component_of_the_structure_map_is_the_pairing(m in motive_strategy()) {
        let field = m.field();
        let x = m.x_rank();
        let t = m.ydual_rank();
        for i in 0..x {
            let mut e = vec![0i64; x];
            e[i] = 1;
            let u = m.u_torus_component(&e).unwrap();
            prop_assert_eq!(u.len(), t);
            for k in 0..t {
                prop_assert_eq!(u[k], field.reduce(m.psi()[i][k]));
            }
        }
        // biadditive extension: doubling a basis vector squares each unit
        if x > 0 && t > 0 {
            let mut e = vec![0i64; x];
            e[0] = 2;
            let u = m.u_torus_component(&e).unwrap();
            for k in 0..t {
                let p = m.psi()[0][k];
                prop_assert_eq!(u[k], field.mul(p, p));
            }
        }
    }

    #[test]
    fn identity_and_scalings_are_morphisms(m in motive_strategy(), k in 1i64..=3) {
        let id = MotiveMorphism::identity(&m);
        prop_assert!(verify_motive_morphism(&m, &m, &id).is_ok());
        let s = MotiveMorphism::scaling(&m, k).unwrap();
        prop_assert!(verify_motive_morphism(&m, &m, &s).is_ok());
    }

    #[test]
    fn isogenies_are_closed_under_composition(m in motive_strategy(), k1 in 1i64..=3, k2 in 1i64..=3) {
        let s1 = MotiveMorphism::scaling(&m, k1).unwrap();
        let s2 = MotiveMorphism::scaling(&m, k2).unwrap();
        let composite = MotiveMorphism::scaling(&m, k1 * k2).unwrap();
        if is_isogeny(&m, &m, &s1).unwrap() && is_isogeny(&m, &m, &s2).unwrap() {
            prop_assert!(is_isogeny(&m, &m, &composite).unwrap());
        }
    }
}

#[test]
fn dual_of_the_unit_is_the_twist() {
    let f = f5();
    assert_eq!(cartier_dual(&OneMotive::unit(f)), OneMotive::twist(f));
    assert_eq!(cartier_dual(&OneMotive::twist(f)), OneMotive::unit(f));
}

#[test]
fn dual_of_an_abelian_variety_keeps_the_model() {
    let m = OneMotive::abelian_only(e5(), 2);
    let d = cartier_dual(&m);
    assert_eq!(d.x_rank(), 0);
    assert_eq!(d.ydual_rank(), 0);
    assert_eq!(d.abelian().curves(), m.abelian().curves());
}

#[test]
fn zero_scaling_is_not_an_isogeny_on_the_unit() {
    let m = OneMotive::unit(f5());
    let z = MotiveMorphism::scaling(&m, 0).unwrap();
    assert!(!is_isogeny(&m, &m, &z).unwrap());
}
