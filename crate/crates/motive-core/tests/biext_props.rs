use std::collections::BTreeMap;

use proptest::prelude::*;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use motive_core::biext_group::{
    biext_one, biext_one_brute_force, biext_one_brute_force_seq, biext_zero,
    biext_zero_brute_force_count, check_lattice_trivialization, lattice_trivialization_witness,
};
use motive_core::cocycle::{coboundary_cocycle, verify_biext_cocycle, BiextCocycle};
use motive_core::curve::Curve;
use motive_core::field::PrimeField;
use motive_core::finite::FiniteAbelianGroup;
use motive_core::group::{DeskElem, DeskGroup};
use motive_core::motive::OneMotive;
use motive_core::motive_biext::{
    abelian_torsion_group, poincare_of_motive, verify_motive_biextension,
};
use motive_core::pairing::weil_pairing;

fn cyclic(m: i64) -> DeskGroup {
    DeskGroup::Finite(FiniteAbelianGroup::cyclic(m).unwrap())
}

fn finite(moduli: &[i64]) -> DeskGroup {
    DeskGroup::Finite(FiniteAbelianGroup::new(moduli.to_vec()).unwrap())
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: i64, b: i64) -> i64 {
    a / gcd(a, b) * b
}

/// Pointwise table equality through the read API, so representation
/// differences (explicit zeros vs missing keys) do not matter.
fn same_cocycle(a: &BiextCocycle, b: &BiextCocycle) -> bool {
    let p_elems = a.p.enumerate(1000).unwrap();
    let q_elems = a.q.enumerate(1000).unwrap();
    for p1 in &p_elems {
        for p2 in &p_elems {
            for qq in &q_elems {
                if a.phi_at(p1, p2, qq) != b.phi_at(p1, p2, qq) {
                    return false;
                }
            }
        }
    }
    for pp in &p_elems {
        for q1 in &q_elems {
            for q2 in &q_elems {
                if a.psi_at(pp, q1, q2) != b.psi_at(pp, q1, q2) {
                    return false;
                }
            }
        }
    }
    true
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Coboundaries of arbitrary normalized tables satisfy every cocycle
    /// identity, and their induced torsion pairing telescopes to zero.
    #[test]
    fn coboundaries_always_verify_as_cocycles(
        (mp, mq, mg, values) in (2i64..=5, 2i64..=5, 2i64..=5).prop_flat_map(|(mp, mq, mg)| {
            let cells = ((mp - 1) * (mq - 1)) as usize;
            (Just(mp), Just(mq), Just(mg), prop::collection::vec(0..mg, cells))
        })
    ) {
        let p = cyclic(mp);
        let q = cyclic(mq);
        let g = cyclic(mg);
        let p_elems = p.enumerate(100).unwrap();
        let q_elems = q.enumerate(100).unwrap();
        let mut h = BTreeMap::new();
        let mut at = 0;
        for pe in p_elems.iter().skip(1) {
            for qe in q_elems.iter().skip(1) {
                let v = g.from_additive_coords(&[values[at]]).unwrap();
                h.insert((pe.clone(), qe.clone()), v);
                at += 1;
            }
        }
        let c = coboundary_cocycle(p.clone(), q.clone(), g.clone(), &h).unwrap();
        let report = verify_biext_cocycle(&c).unwrap();
        prop_assert!(report.ok(), "coboundary failed: {:?}", report.first_witness());
        prop_assert!(report.instances > 0);

        let n = lcm(mp, mq) as u64;
        let zero = g.zero();
        for x in &p_elems {
            for y in &q_elems {
                prop_assert_eq!(&c.torsion_pairing(x, y, n).unwrap(), &zero);
            }
        }
    }
}

#[test]
fn solver_generators_satisfy_the_verifier_on_random_instances() {
    let f5 = PrimeField::new(5).unwrap();
    let e5 = Curve::new(f5, 1, 0).unwrap();
    let sides: Vec<DeskGroup> = vec![
        cyclic(2),
        cyclic(3),
        cyclic(4),
        cyclic(5),
        cyclic(6),
        cyclic(7),
        cyclic(8),
        finite(&[2, 2]),
        finite(&[2, 4]),
        finite(&[2, 3]),
        finite(&[2, 2, 2]),
        DeskGroup::CurveTorsion { curve: e5, n: 2 },
    ];
    let values: Vec<DeskGroup> = vec![
        cyclic(2),
        cyclic(3),
        cyclic(4),
        cyclic(5),
        cyclic(6),
        cyclic(7),
        cyclic(8),
        finite(&[2, 2]),
        finite(&[2, 4]),
        DeskGroup::Torus { field: f5, rank: 1, level: 4 },
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for round in 0..100 {
        let p = &sides[rng.gen_range(0..sides.len())];
        let q = &sides[rng.gen_range(0..sides.len())];
        let g = &values[rng.gen_range(0..values.len())];
        let (desc, gens) = biext_one(p, q, g).unwrap();
        assert_eq!(desc.free_rank, 0, "round {round}: finite data cannot leave a free part");
        assert_eq!(
            gens.len(),
            desc.invariant_factors.len(),
            "round {round}: one representative per invariant factor"
        );
        assert_eq!(
            desc.order(),
            Some(desc.invariant_factors.iter().map(|&d| d as u128).product()),
            "round {round}"
        );
        for (k, gen) in gens.iter().enumerate() {
            let report = verify_biext_cocycle(gen).unwrap();
            assert!(
                report.ok(),
                "round {round} generator {k} failed: {:?}",
                report.first_witness()
            );
            assert!(report.instances > 0, "round {round} generator {k} checked nothing");
            assert!(
                !gen.is_zero().unwrap(),
                "round {round} generator {k} is the zero table"
            );
        }
    }
}

#[test]
fn split_biextension_count_matches_the_exhaustive_table_count() {
    for mp in 1..=4i64 {
        for mq in 1..=4i64 {
            for mg in 1..=4i64 {
                let p = cyclic(mp);
                let q = cyclic(mq);
                let g = cyclic(mg);
                let desc = biext_zero(&p, &q, &g).unwrap();
                let count = biext_zero_brute_force_count(&p, &q, &g).unwrap();
                assert_eq!(
                    desc.order(),
                    Some(count),
                    "bihomomorphism count mismatch at moduli ({mp}, {mq}, {mg})"
                );
            }
        }
    }
    let cases = [
        (finite(&[2, 2]), cyclic(2), cyclic(4)),
        (finite(&[2, 2]), finite(&[2, 2]), cyclic(2)),
        (finite(&[2, 2]), cyclic(3), cyclic(6)),
    ];
    for (p, q, g) in &cases {
        let desc = biext_zero(p, q, g).unwrap();
        let count = biext_zero_brute_force_count(p, q, g).unwrap();
        assert_eq!(desc.order(), Some(count));
    }
}

#[test]
fn congruence_count_matches_brute_force_on_tiny_groups() {
    for mp in [2i64, 3] {
        for mq in [2i64, 3] {
            for mg in [2i64, 3] {
                let p = cyclic(mp);
                let q = cyclic(mq);
                let g = cyclic(mg);
                let (desc, _) = biext_one(&p, &q, &g).unwrap();
                let brute = biext_one_brute_force(&p, &q, &g).unwrap();
                let brute_seq = biext_one_brute_force_seq(&p, &q, &g).unwrap();
                assert_eq!(brute, brute_seq, "thread count changed a count at ({mp}, {mq}, {mg})");
                assert_eq!(
                    desc.order(),
                    Some(brute),
                    "class count mismatch at moduli ({mp}, {mq}, {mg})"
                );
            }
        }
    }
}

#[test]
fn lattice_cocycles_trivialize_with_a_checked_witness() {
    let p = DeskGroup::Lattice { rank: 1 };
    let q = DeskGroup::Lattice { rank: 1 };
    let g = cyclic(5);
    let window: Vec<DeskElem> = (-3i64..=3).map(|v| DeskElem::Ints(vec![v])).collect();
    let coord = |e: &DeskElem| -> i64 {
        match e {
            DeskElem::Ints(v) => v[0],
            _ => unreachable!(),
        }
    };
    let gv = |v: i64| g.from_additive_coords(&[v]);
    let c = BiextCocycle::from_fn(
        p,
        q,
        g.clone(),
        &window,
        &window,
        |p1, p2, qq| gv(2 * coord(p1) * coord(p2) * coord(qq)),
        |_, _, _| Ok(g.zero()),
    )
    .unwrap();
    assert!(!c.is_zero().unwrap());
    let report = motive_core::cocycle::verify_biext_cocycle_on(&c, &window, &window).unwrap();
    assert!(report.ok(), "source table is not a cocycle: {:?}", report.first_witness());
    assert!(report.instances > 0);

    let witness = lattice_trivialization_witness(&c, 2).unwrap();
    let check = check_lattice_trivialization(&c, &witness).unwrap();
    assert!(check.ok(), "witness does not reproduce the cocycle: {:?}", check.first_witness());
    assert!(check.instances > 0);
}

#[test]
fn higher_rank_lattice_cocycles_trivialize_as_well() {
    let p = DeskGroup::Lattice { rank: 2 };
    let q = DeskGroup::Lattice { rank: 1 };
    let g = cyclic(3);
    let mut p_window = Vec::new();
    for a in -2i64..=2 {
        for b in -2i64..=2 {
            p_window.push(DeskElem::Ints(vec![a, b]));
        }
    }
    let q_window: Vec<DeskElem> = (-2i64..=2).map(|v| DeskElem::Ints(vec![v])).collect();
    let lam = |e: &DeskElem| -> i64 {
        match e {
            DeskElem::Ints(v) => v.iter().enumerate().map(|(i, &x)| (i as i64 + 1) * x).sum(),
            _ => unreachable!(),
        }
    };
    let gc = g.clone();
    let c = BiextCocycle::from_fn(
        p,
        q,
        g.clone(),
        &p_window,
        &q_window,
        move |p1, p2, qq| gc.from_additive_coords(&[lam(p1) * lam(p2) * lam(qq)]),
        |_, _, _| Ok(g.zero()),
    )
    .unwrap();
    assert!(!c.is_zero().unwrap());
    let witness = lattice_trivialization_witness(&c, 1).unwrap();
    let check = check_lattice_trivialization(&c, &witness).unwrap();
    assert!(check.ok(), "witness does not reproduce the cocycle: {:?}", check.first_witness());
    assert!(check.instances > 0);
}

#[test]
fn baer_sum_is_the_group_law_on_classes() {
    let p = cyclic(3);
    let q = cyclic(3);
    let g = cyclic(3);
    let (desc, gens) = biext_one(&p, &q, &g).unwrap();
    assert_eq!(desc.invariant_factors, vec![3, 3]);
    let g1 = &gens[0];
    let g2 = &gens[1];

    let zero = BiextCocycle::zero(p.clone(), q.clone(), g.clone());
    assert!(same_cocycle(&g1.baer_sum(&zero).unwrap(), g1), "zero is not neutral");
    assert!(
        same_cocycle(&g1.baer_sum(g2).unwrap(), &g2.baer_sum(g1).unwrap()),
        "baer sum is not commutative"
    );

    let sum = g1.baer_sum(g2).unwrap();
    let report = verify_biext_cocycle(&sum).unwrap();
    assert!(report.ok(), "sum of cocycles broke an identity: {:?}", report.first_witness());

    // g1 + (-g1) must be a coboundary; enumerate every normalized table
    let cancel = g1.baer_sum(&g1.baer_neg().unwrap()).unwrap();
    let p_elems = p.enumerate(100).unwrap();
    let q_elems = q.enumerate(100).unwrap();
    let mut found = false;
    'outer: for assignment in 0..81u32 {
        let mut a = assignment;
        let mut h = BTreeMap::new();
        for pe in p_elems.iter().skip(1) {
            for qe in q_elems.iter().skip(1) {
                let v = g.from_additive_coords(&[(a % 3) as i64]).unwrap();
                a /= 3;
                h.insert((pe.clone(), qe.clone()), v);
            }
        }
        let delta = coboundary_cocycle(p.clone(), q.clone(), g.clone(), &h).unwrap();
        if same_cocycle(&cancel, &delta) {
            found = true;
            break 'outer;
        }
    }
    assert!(found, "g1 - g1 is not a coboundary");
}

#[test]
fn poincare_biextension_induces_the_weil_pairing() {
    let cases = [
        (Curve::new(PrimeField::new(5).unwrap(), 1, 0).unwrap(), 2u64),
        (Curve::new(PrimeField::new(7).unwrap(), 0, 2).unwrap(), 3u64),
    ];
    for (curve, n) in cases {
        let m = OneMotive::abelian_only(curve, n);
        let mb = poincare_of_motive(&m, n).unwrap();
        let report = verify_motive_biextension(&mb).unwrap();
        assert!(report.ok(), "n = {n}: {:?}", report.first_witness());
        assert!(report.instances > 0);

        let torsion = abelian_torsion_group(m.abelian(), n);
        let elems = torsion.enumerate(100).unwrap();
        assert_eq!(elems.len() as u64, n * n, "torsion group is not full at n = {n}");
        for x in &elems {
            for y in &elems {
                let induced = match mb.carrier.torsion_pairing(x, y, n).unwrap() {
                    DeskElem::Units(u) if u.len() == 1 => u[0],
                    other => panic!("pairing value {other:?} is not a single unit"),
                };
                let (px, py) = match (x, y) {
                    (DeskElem::Point(a), DeskElem::Point(b)) => (a.clone(), b.clone()),
                    _ => unreachable!(),
                };
                let direct = weil_pairing(&px, &py, n).unwrap();
                assert_eq!(induced, direct, "pairing mismatch at n = {n}, arguments {x}, {y}");
            }
        }
    }
}
