use crate::error::{Error, Result};

/// The prime field F_p for an odd prime 3 <= p <= 10000.
///
/// Elements are canonical representatives in 0..p. The size bound keeps
/// exhaustive enumeration of curves and unit groups cheap.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PrimeField {
    p: i64,
}

pub const MAX_PRIME: i64 = 10_000;

fn is_prime(n: i64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

impl PrimeField {
    pub fn new(p: i64) -> Result<Self> {
        if !(3..=MAX_PRIME).contains(&p) {
            return Err(Error::PrimeOutOfRange(p));
        }
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        Ok(PrimeField { p })
    }

    pub fn p(&self) -> i64 {
        self.p
    }

    pub fn reduce(&self, x: i64) -> i64 {
        x.rem_euclid(self.p)
    }

    pub fn add(&self, a: i64, b: i64) -> i64 {
        (self.reduce(a) + self.reduce(b)) % self.p
    }

    pub fn sub(&self, a: i64, b: i64) -> i64 {
        self.reduce(self.reduce(a) - self.reduce(b))
    }

    pub fn neg(&self, a: i64) -> i64 {
        self.reduce(-self.reduce(a))
    }

    pub fn mul(&self, a: i64, b: i64) -> i64 {
        ((self.reduce(a) as i128 * self.reduce(b) as i128) % self.p as i128) as i64
    }

    pub fn pow(&self, a: i64, e: u64) -> i64 {
        let mut base = self.reduce(a);
        let mut e = e;
        let mut acc = 1i64;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    pub fn inv(&self, a: i64) -> Result<i64> {
        let a = self.reduce(a);
        if a == 0 {
            return Err(Error::DivisionByZero("field inversion"));
        }
        Ok(self.pow(a, (self.p - 2) as u64))
    }

    pub fn div(&self, a: i64, b: i64) -> Result<i64> {
        Ok(self.mul(a, self.inv(b)?))
    }

    pub fn is_square(&self, a: i64) -> bool {
        let a = self.reduce(a);
        a == 0 || self.pow(a, ((self.p - 1) / 2) as u64) == 1
    }

    /// Multiplicative order of a nonzero element.
    pub fn element_order(&self, a: i64) -> Result<u64> {
        let a = self.reduce(a);
        if a == 0 {
            return Err(Error::DivisionByZero("order of zero"));
        }
        let group = (self.p - 1) as u64;
        let mut ord = group;
        for q in prime_factors(group) {
            while ord % q == 0 && self.pow(a, ord / q) == 1 {
                ord /= q;
            }
        }
        Ok(ord)
    }

    /// Smallest generator of the full unit group.
    pub fn primitive_root(&self) -> i64 {
        let group = (self.p - 1) as u64;
        (2..self.p)
            .find(|&g| self.element_order(g).map_or(false, |o| o == group))
            .expect("every prime field has a primitive root")
    }

    /// A generator of mu_n, requiring n | p - 1.
    pub fn nth_root_of_unity(&self, n: u64) -> Result<i64> {
        if n == 0 || (self.p - 1) as u64 % n != 0 {
            return Err(Error::RootsOfUnityMissing { n, p: self.p });
        }
        let g = self.primitive_root();
        Ok(self.pow(g, (self.p - 1) as u64 / n))
    }

    /// Brute-force discrete logarithm of `target` in the cyclic group
    /// generated by `base`.
    pub fn discrete_log(&self, base: i64, target: i64) -> Option<u64> {
        let base = self.reduce(base);
        let target = self.reduce(target);
        if base == 0 || target == 0 {
            return None;
        }
        let mut acc = 1i64;
        for k in 0..(self.p as u64) {
            if acc == target {
                return Some(k);
            }
            acc = self.mul(acc, base);
        }
        None
    }
}

pub(crate) fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}
