//! Morphisms between motive biextensions: one motive morphism per level,
//! plus transporter tables recording how the trivializations move. The
//! verifier walks four families of compatibilities and also validates
//! each induced level map as a morphism of motives.

use crate::cocycle::{CheckFailure, VerifyReport};
use crate::error::{Error, Result};
use crate::group::{DeskElem, DeskGroup};
use crate::limits::max_enumeration;
use crate::motive::{verify_motive_morphism, MotiveMorphism};
use crate::motive_biext::{
    abelian_elem, abelian_point_of, abelian_torsion_group, sample_coords, unit_vec,
    value_torus, MotiveBiextension, Trivialization, LATTICE_WINDOW,
};

/// Morphism data between two motive biextensions: a motive morphism on
/// each of the three levels, and transporter tables measuring how far
/// each trivialization is moved (zero tables mean strict transport).
#[derive(Debug, Clone)]
pub struct BiextMorphismData {
    pub on_first: MotiveMorphism,
    pub on_second: MotiveMorphism,
    pub on_target: MotiveMorphism,
    pub rho1: Trivialization,
    pub rho2: Trivialization,
    pub rho: Trivialization,
}

impl BiextMorphismData {
    /// The identity morphism on a biextension, with zero transporters.
    pub fn identity(b: &MotiveBiextension) -> Self {
        BiextMorphismData {
            on_first: MotiveMorphism::identity(&b.m1),
            on_second: MotiveMorphism::identity(&b.m2),
            on_target: MotiveMorphism::identity(&b.m3),
            rho1: Trivialization::zero(),
            rho2: Trivialization::zero(),
            rho: Trivialization::zero(),
        }
    }
}

fn push_failure(report: &mut VerifyReport, check: &str, witness: String) {
    report.failures.push(CheckFailure { check: check.into(), witness });
}

/// Torsion elements probed by the generator-level checks: the coordinate
/// basis plus their total sum as the one fixed non-generator sample.
fn torsion_probes(g: &DeskGroup) -> Result<Vec<DeskElem>> {
    let moduli = g.coord_moduli()?;
    let mut out = Vec::new();
    for i in 0..moduli.len() {
        out.push(g.from_additive_coords(&unit_vec(moduli.len(), i))?);
    }
    if moduli.len() > 1 {
        out.push(g.from_additive_coords(&vec![1; moduli.len()])?);
    }
    Ok(out)
}

/// Lattice coordinates probed by the generator-level checks.
fn lattice_probes(rank: usize) -> Vec<Vec<i64>> {
    let mut out: Vec<Vec<i64>> = (0..rank).map(|i| unit_vec(rank, i)).collect();
    if rank > 0 {
        out.push(sample_coords(rank));
    }
    out
}

fn in_window(c: &[i64], w: i64) -> bool {
    c.iter().all(|&x| x.abs() <= w)
}

/// Check that morphism data carries one biextension to another: the
/// carrier transport on torsion points, the three trivialization
/// transports on generator probes (skipping probes whose image leaves
/// the destination window), biadditivity of the transporter tables, the
/// lattice square, the structure square on the target level, and the
/// validity of each induced motive morphism.
pub fn verify_biext_morphism(
    src: &MotiveBiextension,
    dst: &MotiveBiextension,
    d: &BiextMorphismData,
) -> Result<VerifyReport> {
    if src.m1.field() != dst.m1.field() {
        return Err(Error::InvalidMorphism(
            "source and destination live over different prime fields".into(),
        ));
    }
    let field = src.m1.field();
    let mut report = VerifyReport::empty();

    // each level map is a morphism of motives
    for (name, s, t, phi) in [
        ("induced-morphism-1", &src.m1, &dst.m1, &d.on_first),
        ("induced-morphism-2", &src.m2, &dst.m2, &d.on_second),
        ("induced-morphism-3", &src.m3, &dst.m3, &d.on_target),
    ] {
        report.instances += 1;
        if let Err(e) = verify_motive_morphism(s, t, phi) {
            push_failure(&mut report, name, e.to_string());
        }
    }

    let a1 = abelian_torsion_group(src.m1.abelian(), src.torsion_n);
    let a2 = abelian_torsion_group(src.m2.abelian(), src.torsion_n);
    let g_src = value_torus(&src.m3);
    let g_dst = value_torus(&dst.m3);
    let limit = max_enumeration();
    let a1_elems = a1.enumerate(limit)?;
    let a2_elems = a2.enumerate(limit)?;

    let map1 = |e: &DeskElem| -> Result<DeskElem> {
        let p = abelian_point_of(src.m1.abelian(), e)?;
        abelian_elem(
            dst.m1.abelian(),
            &d.on_first.abelian_map.apply(src.m1.abelian(), dst.m1.abelian(), &p)?,
        )
    };
    let map2 = |e: &DeskElem| -> Result<DeskElem> {
        let p = abelian_point_of(src.m2.abelian(), e)?;
        abelian_elem(
            dst.m2.abelian(),
            &d.on_second.abelian_map.apply(src.m2.abelian(), dst.m2.abelian(), &p)?,
        )
    };
    let map3 = |e: &DeskElem| -> Result<DeskElem> {
        match e {
            DeskElem::Units(u) => Ok(DeskElem::Units(d.on_target.apply_torus(field, u)?)),
            _ => Err(Error::UnsupportedShape("carrier values must be torus tuples".into())),
        }
    };
    let norm_dst = |e: &DeskElem| -> Result<DeskElem> { g_dst.add(e, &g_dst.zero()) };
    let zero_src = g_src.zero();

    // carrier transport: values move by f3 while the sides move by f1, f2
    for x in &a1_elems {
        for x2 in &a1_elems {
            for y in &a2_elems {
                let lhs = map3(&g_src.add(&src.carrier.phi_at(x, x2, y), &zero_src)?)?;
                let rhs =
                    norm_dst(&dst.carrier.phi_at(&map1(x)?, &map1(x2)?, &map2(y)?))?;
                report.instances += 1;
                if lhs != rhs {
                    push_failure(
                        &mut report,
                        "carrier-transport",
                        format!("phi at x={x} x'={x2} y={y}"),
                    );
                }
            }
        }
    }
    for x in &a1_elems {
        for y in &a2_elems {
            for y2 in &a2_elems {
                let lhs = map3(&g_src.add(&src.carrier.psi_at(x, y, y2), &zero_src)?)?;
                let rhs =
                    norm_dst(&dst.carrier.psi_at(&map1(x)?, &map2(y)?, &map2(y2)?))?;
                report.instances += 1;
                if lhs != rhs {
                    push_failure(
                        &mut report,
                        "carrier-transport",
                        format!("psi at x={x} y={y} y'={y2}"),
                    );
                }
            }
        }
    }

    // trivialization transports on generator probes
    let x1_probes = lattice_probes(src.m1.x_rank());
    let x2_probes = lattice_probes(src.m2.x_rank());
    let t1_probes = torsion_probes(&a1)?;
    let t2_probes = torsion_probes(&a2)?;
    let ints = |v: &[i64]| DeskElem::Ints(v.to_vec());

    for xc in &x1_probes {
        let gx = d.on_first.x_map.apply(xc)?;
        if !in_window(&gx, LATTICE_WINDOW) {
            continue;
        }
        for a in &t2_probes {
            let moved = map3(&g_src.add(&src.psi1.at(&ints(xc), a, &g_src), &zero_src)?)?;
            let lhs = g_dst.add(&moved, &d.rho1.at(&ints(xc), a, &g_dst))?;
            let rhs = norm_dst(&dst.psi1.at(&ints(&gx), &map2(a)?, &g_dst))?;
            report.instances += 1;
            if lhs != rhs {
                push_failure(
                    &mut report,
                    "psi1-transport",
                    format!("x={} a={}", ints(xc), a),
                );
            }
        }
    }
    for a in &t1_probes {
        for yc in &x2_probes {
            let gy = d.on_second.x_map.apply(yc)?;
            if !in_window(&gy, LATTICE_WINDOW) {
                continue;
            }
            let moved = map3(&g_src.add(&src.psi2.at(a, &ints(yc), &g_src), &zero_src)?)?;
            let lhs = g_dst.add(&moved, &d.rho2.at(a, &ints(yc), &g_dst))?;
            let rhs = norm_dst(&dst.psi2.at(&map1(a)?, &ints(&gy), &g_dst))?;
            report.instances += 1;
            if lhs != rhs {
                push_failure(
                    &mut report,
                    "psi2-transport",
                    format!("a={} y={}", a, ints(yc)),
                );
            }
        }
    }
    for xc in &x1_probes {
        let gx = d.on_first.x_map.apply(xc)?;
        if !in_window(&gx, LATTICE_WINDOW) {
            continue;
        }
        for yc in &x2_probes {
            let gy = d.on_second.x_map.apply(yc)?;
            if !in_window(&gy, LATTICE_WINDOW) {
                continue;
            }
            let moved = map3(&g_src.add(&src.psi.at(&ints(xc), &ints(yc), &g_src), &zero_src)?)?;
            let lhs = g_dst.add(&moved, &d.rho.at(&ints(xc), &ints(yc), &g_dst))?;
            let rhs = norm_dst(&dst.psi.at(&ints(&gx), &ints(&gy), &g_dst))?;
            report.instances += 1;
            if lhs != rhs {
                push_failure(
                    &mut report,
                    "psi-transport",
                    format!("x={} y={}", ints(xc), ints(yc)),
                );
            }
        }
    }

    // transporters are biadditive: sums of generators inside the window
    for (name, rho, left_lattice, second_lattice) in [
        ("rho1-biadditive", &d.rho1, true, false),
        ("rho2-biadditive", &d.rho2, false, true),
        ("rho-biadditive", &d.rho, true, true),
    ] {
        if rho.is_empty() {
            continue;
        }
        // first slot
        if left_lattice {
            let rank = src.m1.x_rank();
            for i in 0..rank {
                for i2 in i..rank {
                    let sum: Vec<i64> = unit_vec(rank, i)
                        .iter()
                        .zip(&unit_vec(rank, i2))
                        .map(|(a, b)| a + b)
                        .collect();
                    if !in_window(&sum, LATTICE_WINDOW) {
                        continue;
                    }
                    let seconds: Vec<DeskElem> = if second_lattice {
                        x2_probes.iter().map(|c| ints(c)).collect()
                    } else {
                        t2_probes.clone()
                    };
                    for b in &seconds {
                        let lhs = g_dst.add(
                            &rho.at(&ints(&unit_vec(rank, i)), b, &g_dst),
                            &rho.at(&ints(&unit_vec(rank, i2)), b, &g_dst),
                        )?;
                        let rhs = norm_dst(&rho.at(&ints(&sum), b, &g_dst))?;
                        report.instances += 1;
                        if lhs != rhs {
                            push_failure(
                                &mut report,
                                name,
                                format!("first slot at {} + {}", ints(&unit_vec(rank, i)), ints(&unit_vec(rank, i2))),
                            );
                        }
                    }
                }
            }
        } else {
            for a in &t1_probes {
                for a2 in &t1_probes {
                    let sum = a1.add(a, a2)?;
                    for yc in &x2_probes {
                        let lhs = g_dst.add(
                            &rho.at(a, &ints(yc), &g_dst),
                            &rho.at(a2, &ints(yc), &g_dst),
                        )?;
                        let rhs = norm_dst(&rho.at(&sum, &ints(yc), &g_dst))?;
                        report.instances += 1;
                        if lhs != rhs {
                            push_failure(
                                &mut report,
                                name,
                                format!("first slot at {a} + {a2}"),
                            );
                        }
                    }
                }
            }
        }
    }

    // lattice square: the two routes X1 (x) X2 -> X3' agree
    let kron = d.on_first.x_map.kronecker(&d.on_second.x_map)?;
    let via_dst = dst.lambda.mul(&kron)?;
    let via_src = d.on_target.x_map.mul(&src.lambda)?;
    for j in 0..via_dst.cols() {
        report.instances += 1;
        if (0..via_dst.rows()).any(|i| via_dst.get(i, j) != via_src.get(i, j)) {
            push_failure(
                &mut report,
                "lambda-square",
                format!("tensor basis column {j}"),
            );
        }
    }

    // structure square on the target level: u'3 after g3 is f3 after u3
    for k in 0..src.m3.x_rank() {
        let e = unit_vec(src.m3.x_rank(), k);
        let ge = d.on_target.x_map.apply(&e)?;
        let ab_lhs = d.on_target.abelian_map.apply(
            src.m3.abelian(),
            dst.m3.abelian(),
            &src.m3.v_at(&e)?,
        )?;
        let ab_rhs = dst.m3.v_at(&ge)?;
        let t_lhs = d.on_target.apply_torus(field, &src.m3.u_torus_component(&e)?)?;
        let t_rhs = dst.m3.u_torus_component(&ge)?;
        report.instances += 1;
        if ab_lhs != ab_rhs || t_lhs != t_rhs {
            push_failure(
                &mut report,
                "structure-square",
                format!("target basis vector {k}"),
            );
        }
    }

    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::Curve;
    use crate::field::PrimeField;
    use crate::mat::IntMat;
    use crate::motive::{motive_from_seven_tuple, AbelianModel, OneMotive};
    use crate::motive_biext::{
        lattice_valued_biextension, poincare_of_motive, verify_motive_biextension,
    };

    fn f5() -> PrimeField {
        PrimeField::new(5).unwrap()
    }

    #[test]
    fn identity_is_a_morphism_of_the_poincare_data() {
        let curve = Curve::new(f5(), 1, 0).unwrap();
        let origin = vec![curve.point(0, 0).unwrap()];
        let m = motive_from_seven_tuple(
            f5(),
            1,
            1,
            AbelianModel::new(vec![curve]),
            vec![origin.clone()],
            vec![origin],
            vec![vec![4]],
            2,
        )
        .unwrap();
        let b = poincare_of_motive(&m, 2).unwrap();
        assert!(verify_motive_biextension(&b).unwrap().ok());
        let id = BiextMorphismData::identity(&b);
        let report = verify_biext_morphism(&b, &b, &id).unwrap();
        assert!(report.ok(), "failures: {:?}", report.failures);
        assert!(report.instances > 0);
    }

    #[test]
    fn doubling_every_level_of_the_toric_poincare_data_is_valid() {
        let m = OneMotive::torus_only(f5(), vec![vec![2]]).unwrap();
        let b = poincare_of_motive(&m, 0).unwrap();
        let d = BiextMorphismData {
            on_first: MotiveMorphism::scaling(&b.m1, 2).unwrap(),
            on_second: MotiveMorphism::scaling(&b.m2, 2).unwrap(),
            on_target: MotiveMorphism::scaling(&b.m3, 2).unwrap(),
            rho1: Trivialization::zero(),
            rho2: Trivialization::zero(),
            // the doubled pullback differs from the pushed value by the
            // square of the original table
            rho: {
                let field = f5();
                let mut rho = Trivialization::zero();
                for ((x, y), v) in b.psi.entries() {
                    if let DeskElem::Units(u) = v {
                        rho.set(
                            x.clone(),
                            y.clone(),
                            DeskElem::Units(vec![field.mul(u[0], u[0])]),
                        );
                    }
                }
                rho
            },
        };
        let report = verify_biext_morphism(&b, &b, &d).unwrap();
        assert!(report.ok(), "failures: {:?}", report.failures);
    }

    #[test]
    fn scaling_the_target_without_lambda_breaks_the_lattice_square() {
        let m = OneMotive::torus_only(f5(), vec![vec![2]]).unwrap();
        let target = OneMotive::lattice_only(f5(), 1);
        let lambda = IntMat::from_rows(vec![vec![1]]).unwrap();
        let b = lattice_valued_biextension(&m, &target, lambda).unwrap();
        let mut d = BiextMorphismData::identity(&b);
        d.on_target = MotiveMorphism::scaling(&b.m3, 2).unwrap();
        let report = verify_biext_morphism(&b, &b, &d).unwrap();
        assert!(!report.ok());
        assert!(report
            .failures
            .iter()
            .all(|f| f.check == "lambda-square"));
        assert_eq!(report.failures.len(), 1);
    }
}
