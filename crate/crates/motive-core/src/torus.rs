use crate::error::{Error, Result};
use crate::field::PrimeField;

/// Order of the unit subgroup selected by `level`: the full group F_p^* for
/// level 0, otherwise mu_level.
pub fn unit_group_order(field: PrimeField, level: u64) -> Result<u64> {
    let full = (field.p() - 1) as u64;
    if level == 0 {
        return Ok(full);
    }
    if full % level != 0 {
        return Err(Error::RootsOfUnityMissing { n: level, p: field.p() });
    }
    Ok(level)
}

/// A generator of the selected unit subgroup.
pub fn unit_generator(field: PrimeField, level: u64) -> Result<i64> {
    let order = unit_group_order(field, level)?;
    field.nth_root_of_unity(order)
}

/// All members of the selected unit subgroup, as powers of the generator.
pub fn enumerate_units(field: PrimeField, level: u64) -> Result<Vec<i64>> {
    let order = unit_group_order(field, level)?;
    let g = unit_generator(field, level)?;
    let mut out = Vec::with_capacity(order as usize);
    let mut acc = 1i64;
    for _ in 0..order {
        out.push(acc);
        acc = field.mul(acc, g);
    }
    Ok(out)
}

/// Membership test for the selected unit subgroup.
pub fn unit_contains(field: PrimeField, level: u64, u: i64) -> Result<bool> {
    let u = field.reduce(u);
    if u == 0 {
        return Ok(false);
    }
    let order = unit_group_order(field, level)?;
    Ok(field.pow(u, order) == 1)
}

/// Exponent of `u` with respect to the subgroup generator.
pub fn unit_discrete_log(field: PrimeField, level: u64, u: i64) -> Result<u64> {
    let g = unit_generator(field, level)?;
    let order = unit_group_order(field, level)?;
    let mut acc = 1i64;
    let target = field.reduce(u);
    for k in 0..order {
        if acc == target {
            return Ok(k);
        }
        acc = field.mul(acc, g);
    }
    Err(Error::NoSolution(format!(
        "{target} is not in the unit subgroup of order {order} over F_{}",
        field.p()
    )))
}
