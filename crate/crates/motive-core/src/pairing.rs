use crate::curve::{curve_add, curve_scalar_mul, torsion_basis, Curve, CurvePoint};
use crate::error::{Error, Result};

/// Value of the line through r and s (tangent when r = s), evaluated at q.
///
/// Lines are monic in y (or in x for verticals), and a line through the
/// identity degenerates to the vertical through the other point.
fn line_value(r: &CurvePoint, s: &CurvePoint, q: &CurvePoint) -> Result<i64> {
    let f = r.curve().field();
    let (xq, yq) = q.xy().ok_or(Error::DivisionByZero("line evaluated at infinity"))?;
    let (r_xy, s_xy) = (r.xy(), s.xy());
    match (r_xy, s_xy) {
        (None, None) => Ok(1),
        (None, Some((xs, _))) => Ok(f.sub(xq, xs)),
        (Some((xr, _)), None) => Ok(f.sub(xq, xr)),
        (Some((xr, yr)), Some((xs, ys))) => {
            if xr == xs && f.add(yr, ys) == 0 {
                // vertical line, covers r = -s and the order-2 tangent
                return Ok(f.sub(xq, xr));
            }
            let lambda = if xr == xs {
                f.div(f.add(f.mul(3, f.mul(xr, xr)), r.curve().a()), f.mul(2, yr))?
            } else {
                f.div(f.sub(ys, yr), f.sub(xs, xr))?
            };
            Ok(f.sub(f.sub(yq, yr), f.mul(lambda, f.sub(xq, xr))))
        }
    }
}

/// Vertical line through s, evaluated at q.
fn vertical_value(s: &CurvePoint, q: &CurvePoint) -> Result<i64> {
    let f = s.curve().field();
    let (xq, _) = q.xy().ok_or(Error::DivisionByZero("vertical evaluated at infinity"))?;
    match s.xy() {
        None => Ok(1),
        Some((xs, _)) => Ok(f.sub(xq, xs)),
    }
}

/// Miller's algorithm: the function f_{n,P} with divisor
/// n(P) - (nP) - (n-1)(O), evaluated at q.
fn miller(p: &CurvePoint, q: &CurvePoint, n: u64) -> Result<i64> {
    let f = p.curve().field();
    let mut acc = 1i64;
    let mut r = *p;
    let bits = 64 - n.leading_zeros();
    for i in (0..bits.saturating_sub(1)).rev() {
        let double = curve_add(&r, &r)?;
        let num = line_value(&r, &r, q)?;
        let den = vertical_value(&double, q)?;
        acc = f.mul(f.mul(acc, acc), f.div(num, den)?);
        r = double;
        if (n >> i) & 1 == 1 {
            let sum = curve_add(&r, p)?;
            let num = line_value(&r, p, q)?;
            let den = vertical_value(&sum, q)?;
            acc = f.mul(acc, f.div(num, den)?);
            r = sum;
        }
    }
    Ok(acc)
}

/// Same function built by the defining chain f_1 = 1,
/// f_{k+1} = f_k * line(kP, P) / vertical((k+1)P), evaluated at q.
/// Slower but independent of the binary ladder; used as a cross-check.
fn miller_chain(p: &CurvePoint, q: &CurvePoint, n: u64) -> Result<i64> {
    let f = p.curve().field();
    let mut acc = 1i64;
    let mut kp = *p;
    for _ in 1..n {
        let next = curve_add(&kp, p)?;
        let num = line_value(&kp, p, q)?;
        let den = vertical_value(&next, q)?;
        acc = f.mul(acc, f.div(num, den)?);
        kp = next;
    }
    Ok(acc)
}

fn pairing_preconditions(p: &CurvePoint, q: &CurvePoint, n: u64) -> Result<()> {
    if p.curve() != q.curve() {
        return Err(Error::MismatchedCurves);
    }
    if n == 0 {
        return Err(Error::NotTorsion { n });
    }
    if !curve_scalar_mul(n as i64, p)?.is_infinity() || !curve_scalar_mul(n as i64, q)?.is_infinity()
    {
        return Err(Error::NotTorsion { n });
    }
    let field = p.curve().field();
    if (field.p() - 1) as u64 % n != 0 {
        return Err(Error::RootsOfUnityMissing { n, p: field.p() });
    }
    Ok(())
}

/// True when q is a multiple of p (both already checked to be n-torsion).
fn dependent(p: &CurvePoint, q: &CurvePoint, n: u64) -> Result<bool> {
    let mut acc = p.curve().infinity();
    for _ in 0..n {
        if acc == *q {
            return Ok(true);
        }
        acc = curve_add(&acc, p)?;
    }
    Ok(false)
}

fn weil_from_miller<F>(p: &CurvePoint, q: &CurvePoint, n: u64, eval: F) -> Result<i64>
where
    F: Fn(&CurvePoint, &CurvePoint, u64) -> Result<i64>,
{
    pairing_preconditions(p, q, n)?;
    if p.is_infinity() || q.is_infinity() || dependent(p, q, n)? || dependent(q, p, n)? {
        return Ok(1);
    }
    let f = p.curve().field();
    let sign = if n % 2 == 0 { 1 } else { f.neg(1) };
    let fpq = eval(p, q, n)?;
    let fqp = eval(q, p, n)?;
    Ok(f.mul(sign, f.div(fpq, fqp)?))
}

/// Weil pairing e_n(p, q), a primitive-or-trivial n-th root of unity in F_p.
///
/// Sign convention: e_n(p, q) = (-1)^n f_{n,p}(q) / f_{n,q}(p), which makes
/// e_2((0,0), (2,0)) = 4 on y^2 = x^3 + x over F_5. Independent inputs never
/// hit a pole because all zeros and poles of f_{n,p} lie in the cyclic group
/// generated by p.
pub fn weil_pairing(p: &CurvePoint, q: &CurvePoint, n: u64) -> Result<i64> {
    weil_from_miller(p, q, n, miller)
}

/// Weil pairing evaluated through the sequential function chain instead of
/// the binary ladder; agrees with [`weil_pairing`] and exists as an
/// independent route for tests.
pub fn weil_pairing_chain(p: &CurvePoint, q: &CurvePoint, n: u64) -> Result<i64> {
    weil_from_miller(p, q, n, miller_chain)
}

/// The pairing matrix e_n(t_i, t_j) on a torsion basis, with the basis.
pub fn weil_pairing_on_basis(curve: &Curve, n: u64) -> Result<((CurvePoint, CurvePoint), [[i64; 2]; 2])> {
    let (t1, t2) = torsion_basis(curve, n)?;
    let m = [
        [weil_pairing(&t1, &t1, n)?, weil_pairing(&t1, &t2, n)?],
        [weil_pairing(&t2, &t1, n)?, weil_pairing(&t2, &t2, n)?],
    ];
    Ok(((t1, t2), m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::PrimeField;

    fn e5() -> Curve {
        Curve::new(PrimeField::new(5).unwrap(), 1, 0).unwrap()
    }

    #[test]
    fn hand_computed_value_on_f5() {
        // f_{2,P} is the vertical through P; e_2((0,0),(2,0)) = x_Q / -x_P = 2/3 = 4
        let p = e5().point(0, 0).unwrap();
        let q = e5().point(2, 0).unwrap();
        assert_eq!(weil_pairing(&p, &q, 2).unwrap(), 4);
        assert_eq!(weil_pairing_chain(&p, &q, 2).unwrap(), 4);
    }

    #[test]
    fn degenerate_inputs_give_one() {
        let p = e5().point(0, 0).unwrap();
        assert_eq!(weil_pairing(&p, &p, 2).unwrap(), 1);
        assert_eq!(weil_pairing(&p, &e5().infinity(), 2).unwrap(), 1);
        assert_eq!(weil_pairing(&e5().infinity(), &p, 2).unwrap(), 1);
    }

    #[test]
    fn antisymmetry_on_the_basis() {
        let ((t1, t2), m) = weil_pairing_on_basis(&e5(), 2).unwrap();
        assert_eq!(m[0][0], 1);
        assert_eq!(m[1][1], 1);
        let f = e5().field();
        assert_eq!(f.mul(m[0][1], m[1][0]), 1);
        assert_ne!(m[0][1], 1, "basis pairing must be primitive");
        assert_ne!(t1, t2);
    }

    #[test]
    fn error_taxonomy_is_distinguished() {
        // (2,0) has order 2, so it is not 3-torsion
        let p = e5().point(2, 0).unwrap();
        assert!(matches!(weil_pairing(&p, &p, 3), Err(Error::NotTorsion { n: 3 })));
        // y^2 = x^3 + 6x over F_7 is Z/2 x Z/4, but mu_4 is not rational (4 does not divide 6)
        let f7 = PrimeField::new(7).unwrap();
        let c = Curve::new(f7, 6, 0).unwrap();
        let s = crate::curve::curve_group_structure(&c).unwrap();
        assert_eq!(s.order, 8);
        let t4 = crate::curve::torsion_points(&c, 4)
            .unwrap()
            .into_iter()
            .find(|t| !curve_scalar_mul(2, t).unwrap().is_infinity())
            .expect("a point of order 4");
        assert!(matches!(
            weil_pairing(&t4, &t4, 4),
            Err(Error::RootsOfUnityMissing { n: 4, .. })
        ));
    }

    #[test]
    fn chain_and_ladder_agree_on_a_bigger_group() {
        // y^2 = x^3 + 3x + 5 over F_11; exercise every pair at the full exponent
        let f = PrimeField::new(11).unwrap();
        let c = Curve::new(f, 3, 5).unwrap();
        let s = crate::curve::curve_group_structure(&c).unwrap();
        let n_opt = s.invariant_factors.first().copied();
        if s.invariant_factors.len() == 2 {
            let n = n_opt.unwrap();
            if (f.p() - 1) as u64 % n == 0 {
                for p in crate::curve::torsion_points(&c, n).unwrap() {
                    for q in crate::curve::torsion_points(&c, n).unwrap() {
                        assert_eq!(
                            weil_pairing(&p, &q, n).unwrap(),
                            weil_pairing_chain(&p, &q, n).unwrap()
                        );
                    }
                }
            }
        }
    }
}
