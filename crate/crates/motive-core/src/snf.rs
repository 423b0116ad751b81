use crate::error::{Error, Result};
use crate::mat::IntMat;

/// Smith normal form data: `u * m * v = d` with `u`, `v` unimodular and `d`
/// diagonal with nonnegative entries, each dividing the next.
#[derive(Debug, Clone)]
pub struct Smith {
    pub u: IntMat,
    pub d: IntMat,
    pub v: IntMat,
    pub u_inv: IntMat,
    pub v_inv: IntMat,
    pub rank: usize,
}

struct Workspace {
    d: IntMat,
    u: IntMat,
    v: IntMat,
    u_inv: IntMat,
    v_inv: IntMat,
}

impl Workspace {
    fn new(m: &IntMat) -> Self {
        Workspace {
            d: m.clone(),
            u: IntMat::identity(m.rows()),
            v: IntMat::identity(m.cols()),
            u_inv: IntMat::identity(m.rows()),
            v_inv: IntMat::identity(m.cols()),
        }
    }

    /// row_i += k * row_j on d and u; the inverse transform lands on u_inv.
    fn row_addmul(&mut self, i: usize, j: usize, k: i64) -> Result<()> {
        for c in 0..self.d.cols() {
            let v = addmul(self.d.get(i, c), k, self.d.get(j, c))?;
            self.d.set(i, c, v);
        }
        for c in 0..self.u.cols() {
            let v = addmul(self.u.get(i, c), k, self.u.get(j, c))?;
            self.u.set(i, c, v);
        }
        for r in 0..self.u_inv.rows() {
            let v = addmul(self.u_inv.get(r, j), -k, self.u_inv.get(r, i))?;
            self.u_inv.set(r, j, v);
        }
        Ok(())
    }

    /// col_j += k * col_i on d and v; the inverse transform lands on v_inv.
    fn col_addmul(&mut self, j: usize, i: usize, k: i64) -> Result<()> {
        for r in 0..self.d.rows() {
            let v = addmul(self.d.get(r, j), k, self.d.get(r, i))?;
            self.d.set(r, j, v);
        }
        for r in 0..self.v.rows() {
            let v = addmul(self.v.get(r, j), k, self.v.get(r, i))?;
            self.v.set(r, j, v);
        }
        for c in 0..self.v_inv.cols() {
            let v = addmul(self.v_inv.get(i, c), -k, self.v_inv.get(j, c))?;
            self.v_inv.set(i, c, v);
        }
        Ok(())
    }

    fn row_swap(&mut self, i: usize, j: usize) {
        for c in 0..self.d.cols() {
            let (a, b) = (self.d.get(i, c), self.d.get(j, c));
            self.d.set(i, c, b);
            self.d.set(j, c, a);
        }
        for c in 0..self.u.cols() {
            let (a, b) = (self.u.get(i, c), self.u.get(j, c));
            self.u.set(i, c, b);
            self.u.set(j, c, a);
        }
        for r in 0..self.u_inv.rows() {
            let (a, b) = (self.u_inv.get(r, i), self.u_inv.get(r, j));
            self.u_inv.set(r, i, b);
            self.u_inv.set(r, j, a);
        }
    }

    fn col_swap(&mut self, i: usize, j: usize) {
        for r in 0..self.d.rows() {
            let (a, b) = (self.d.get(r, i), self.d.get(r, j));
            self.d.set(r, i, b);
            self.d.set(r, j, a);
        }
        for r in 0..self.v.rows() {
            let (a, b) = (self.v.get(r, i), self.v.get(r, j));
            self.v.set(r, i, b);
            self.v.set(r, j, a);
        }
        for c in 0..self.v_inv.cols() {
            let (a, b) = (self.v_inv.get(i, c), self.v_inv.get(j, c));
            self.v_inv.set(i, c, b);
            self.v_inv.set(j, c, a);
        }
    }

    fn row_negate(&mut self, i: usize) -> Result<()> {
        for c in 0..self.d.cols() {
            let v = self.d.get(i, c).checked_neg().ok_or(Error::Overflow("row negation"))?;
            self.d.set(i, c, v);
        }
        for c in 0..self.u.cols() {
            let v = self.u.get(i, c).checked_neg().ok_or(Error::Overflow("row negation"))?;
            self.u.set(i, c, v);
        }
        for r in 0..self.u_inv.rows() {
            let v = self.u_inv.get(r, i).checked_neg().ok_or(Error::Overflow("row negation"))?;
            self.u_inv.set(r, i, v);
        }
        Ok(())
    }
}

fn addmul(a: i64, k: i64, b: i64) -> Result<i64> {
    k.checked_mul(b)
        .and_then(|kb| a.checked_add(kb))
        .ok_or(Error::Overflow("elementary operation"))
}

/// Smith normal form with the transforms and their inverses.
pub fn smith_extended(m: &IntMat) -> Result<Smith> {
    let mut w = Workspace::new(m);
    let (rows, cols) = (m.rows(), m.cols());
    let bound = rows.min(cols);
    let mut t = 0;
    while t < bound {
        // smallest nonzero entry of the trailing block becomes the pivot
        let mut pivot: Option<(usize, usize)> = None;
        for i in t..rows {
            for j in t..cols {
                let e = w.d.get(i, j);
                if e != 0
                    && pivot.map_or(true, |(pi, pj)| e.abs() < w.d.get(pi, pj).abs())
                {
                    pivot = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = pivot else { break };
        if pi != t {
            w.row_swap(t, pi);
        }
        if pj != t {
            w.col_swap(t, pj);
        }

        loop {
            let p = w.d.get(t, t);
            let mut clean = true;
            for i in t + 1..rows {
                let e = w.d.get(i, t);
                if e != 0 {
                    let q = e / p;
                    w.row_addmul(i, t, -q)?;
                    if w.d.get(i, t) != 0 {
                        // remainder is smaller than the pivot; promote it
                        w.row_swap(t, i);
                        clean = false;
                        break;
                    }
                }
            }
            if !clean {
                continue;
            }
            for j in t + 1..cols {
                let e = w.d.get(t, j);
                if e != 0 {
                    let q = e / p;
                    w.col_addmul(j, t, -q)?;
                    if w.d.get(t, j) != 0 {
                        w.col_swap(t, j);
                        clean = false;
                        break;
                    }
                }
            }
            if !clean {
                continue;
            }
            // force the pivot to divide the whole trailing block
            let p = w.d.get(t, t);
            let mut absorbed = false;
            'scan: for i in t + 1..rows {
                for j in t + 1..cols {
                    if w.d.get(i, j) % p != 0 {
                        w.row_addmul(t, i, 1)?;
                        absorbed = true;
                        break 'scan;
                    }
                }
            }
            if !absorbed {
                break;
            }
        }
        t += 1;
    }
    let mut rank = 0;
    for i in 0..bound {
        if w.d.get(i, i) != 0 {
            if w.d.get(i, i) < 0 {
                w.row_negate(i)?;
            }
            rank += 1;
        }
    }
    Ok(Smith { u: w.u, d: w.d, v: w.v, u_inv: w.u_inv, v_inv: w.v_inv, rank })
}

/// Smith normal form: returns (u, d, v) with u * m * v = d.
pub fn smith_normal_form(m: &IntMat) -> Result<(IntMat, IntMat, IntMat)> {
    let s = smith_extended(m)?;
    Ok((s.u, s.d, s.v))
}

/// Solution set of a system of congruences `sum_j a[i][j] x_j = b_i (mod moduli[i])`.
///
/// A modulus of 0 marks an exact equation over the integers. The solution set,
/// when nonempty, is `particular + integer spans of the kernel columns`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearSolution {
    pub particular: Vec<i64>,
    /// columns generate the lattice of homogeneous solutions
    pub kernel: IntMat,
}

pub fn solve_linear_system_mod(
    a: &IntMat,
    b: &[i64],
    moduli: &[i64],
) -> Result<Option<LinearSolution>> {
    let (rows, n) = (a.rows(), a.cols());
    if b.len() != rows || moduli.len() != rows {
        return Err(Error::DimensionMismatch(format!(
            "system {}x{} with rhs of length {} and {} moduli",
            rows,
            n,
            b.len(),
            moduli.len()
        )));
    }
    if let Some(&m) = moduli.iter().find(|&&m| m < 0) {
        return Err(Error::BadModulus(m));
    }
    // one slack unknown per congruence row
    let slack_rows: Vec<usize> = (0..rows).filter(|&i| moduli[i] > 0).collect();
    let mut aug = a.clone();
    for &i in &slack_rows {
        let mut col = IntMat::zero(rows, 1);
        col.set(i, 0, moduli[i]);
        aug = aug.hstack(&col)?;
    }
    let total = aug.cols();
    let s = smith_extended(&aug)?;
    let rhs = s.u.apply(b)?;
    let mut z = vec![0i64; total];
    for i in 0..rows {
        let d = if i < total.min(rows) { s.d.get(i, i) } else { 0 };
        if d != 0 {
            if rhs[i] % d != 0 {
                return Ok(None);
            }
            z[i] = rhs[i] / d;
        } else if rhs[i] != 0 {
            return Ok(None);
        }
    }
    let y = s.v.apply(&z)?;
    let particular = y[..n].to_vec();
    let free: Vec<usize> = (0..total)
        .filter(|&j| j >= total.min(rows) || s.d.get(j, j) == 0)
        .collect();
    let mut kernel = IntMat::zero(n, free.len());
    for (k, &j) in free.iter().enumerate() {
        for i in 0..n {
            kernel.set(i, k, s.v.get(i, j));
        }
    }
    Ok(Some(LinearSolution { particular, kernel }))
}

fn egcd(a: i64, b: i64) -> (i64, i64, i64) {
    if b == 0 {
        return (a.abs(), a.signum(), 0);
    }
    let (g, s, u) = egcd(b, a % b);
    (g, u, s - (a / b) * u)
}

/// Diagonalization of `a` over Z/m: invertible row operations and invertible
/// column operations (the latter accumulated into the returned transform `v`)
/// bring `a` to a diagonal matrix mod m. Every intermediate entry stays in
/// `[0, m)`, so this never overflows no matter how large the system is;
/// it is the right tool for homogeneous congruence systems with one modulus.
///
/// Returns `(diag, v)` with `diag.len() == a.cols()` (zero-padded past the
/// last pivot) such that `u * a * v = diag(diag)` mod m for some invertible
/// `u`. The solutions of `a x = 0 (mod m)` are exactly
/// `x = v y (mod m)` with `diag[t] * y[t] = 0 (mod m)` for every `t`.
pub fn diagonalize_mod(a: &IntMat, m: i64) -> Result<(Vec<i64>, IntMat)> {
    let full = diagonalize_mod_full(a, m)?;
    Ok((full.diag, full.v))
}

/// Mod-m diagonalization with every transform tracked: `u * a * v = diag`
/// over Z/m with `u`, `v` invertible mod m and `u * u_inv = 1` mod m.
#[derive(Debug, Clone)]
pub struct ModDiagonal {
    pub diag: Vec<i64>,
    pub u: IntMat,
    pub u_inv: IntMat,
    pub v: IntMat,
}

struct ModWorkspace {
    m: i64,
    b: Vec<Vec<i64>>,
    u: Vec<Vec<i64>>,
    u_inv: Vec<Vec<i64>>,
    v: Vec<Vec<i64>>,
}

impl ModWorkspace {
    fn swap_rows(&mut self, i: usize, j: usize) {
        self.b.swap(i, j);
        self.u.swap(i, j);
        for r in self.u_inv.iter_mut() {
            r.swap(i, j);
        }
    }

    fn swap_cols(&mut self, i: usize, j: usize) {
        for r in self.b.iter_mut() {
            r.swap(i, j);
        }
        for r in self.v.iter_mut() {
            r.swap(i, j);
        }
    }

    /// row_i -= k * row_t, with the inverse accumulated on u_inv columns
    fn row_single(&mut self, t: usize, i: usize, k: i64) {
        let m = self.m;
        let (lo, hi) = if t < i {
            let (a, b) = self.b.split_at_mut(i);
            (&a[t], &mut b[0])
        } else {
            let (a, b) = self.b.split_at_mut(t);
            (&b[0], &mut a[i])
        };
        for (x, &p) in hi.iter_mut().zip(lo.iter()) {
            if p != 0 {
                *x = (*x - k * p).rem_euclid(m);
            }
        }
        let (lo, hi) = if t < i {
            let (a, b) = self.u.split_at_mut(i);
            (&a[t], &mut b[0])
        } else {
            let (a, b) = self.u.split_at_mut(t);
            (&b[0], &mut a[i])
        };
        for (x, &p) in hi.iter_mut().zip(lo.iter()) {
            if p != 0 {
                *x = (*x - k * p).rem_euclid(m);
            }
        }
        for r in self.u_inv.iter_mut() {
            if r[i] != 0 {
                r[t] = (r[t] + k * r[i]).rem_euclid(m);
            }
        }
    }

    /// rows (t, i) <- [[s, w], [-c2, c1]] * rows (t, i), determinant one
    fn row_pair(&mut self, t: usize, i: usize, s: i64, w: i64, c1: i64, c2: i64) {
        let m = self.m;
        let apply = |rt: &mut Vec<i64>, ri: &mut Vec<i64>| {
            for (xt, xi) in rt.iter_mut().zip(ri.iter_mut()) {
                let (a1, a2) = (*xt, *xi);
                if a1 == 0 && a2 == 0 {
                    continue;
                }
                *xt = (s * a1 + w * a2).rem_euclid(m);
                *xi = (c1 * a2 - c2 * a1).rem_euclid(m);
            }
        };
        {
            let (lo, hi) = self.b.split_at_mut(i);
            apply(&mut lo[t], &mut hi[0]);
        }
        {
            let (lo, hi) = self.u.split_at_mut(i);
            apply(&mut lo[t], &mut hi[0]);
        }
        // inverse of [[s, w], [-c2, c1]] is [[c1, -w], [c2, s]]
        for r in self.u_inv.iter_mut() {
            let (a1, a2) = (r[t], r[i]);
            if a1 == 0 && a2 == 0 {
                continue;
            }
            r[t] = (c1 * a1 + c2 * a2).rem_euclid(m);
            r[i] = (-w * a1 + s * a2).rem_euclid(m);
        }
    }

    /// col_j -= k * col_t
    fn col_single(&mut self, t: usize, j: usize, k: i64) {
        let m = self.m;
        for r in self.b.iter_mut() {
            if r[t] != 0 {
                r[j] = (r[j] - k * r[t]).rem_euclid(m);
            }
        }
        for r in self.v.iter_mut() {
            if r[t] != 0 {
                r[j] = (r[j] - k * r[t]).rem_euclid(m);
            }
        }
    }

    /// cols (t, j) <- cols (t, j) * [[s, -c2], [w, c1]]^T-style pair transform
    fn col_pair(&mut self, t: usize, j: usize, s: i64, w: i64, c1: i64, c2: i64) {
        let m = self.m;
        for r in self.b.iter_mut() {
            let (a1, a2) = (r[t], r[j]);
            if a1 == 0 && a2 == 0 {
                continue;
            }
            r[t] = (s * a1 + w * a2).rem_euclid(m);
            r[j] = (c1 * a2 - c2 * a1).rem_euclid(m);
        }
        for r in self.v.iter_mut() {
            let (a1, a2) = (r[t], r[j]);
            if a1 == 0 && a2 == 0 {
                continue;
            }
            r[t] = (s * a1 + w * a2).rem_euclid(m);
            r[j] = (c1 * a2 - c2 * a1).rem_euclid(m);
        }
    }
}

pub fn diagonalize_mod_full(a: &IntMat, m: i64) -> Result<ModDiagonal> {
    if m <= 0 {
        return Err(Error::BadModulus(m));
    }
    let rows = a.rows();
    let n = a.cols();
    let mut w = ModWorkspace {
        m,
        b: (0..rows)
            .map(|i| (0..n).map(|j| a.get(i, j).rem_euclid(m)).collect())
            .collect(),
        u: (0..rows)
            .map(|i| (0..rows).map(|j| i64::from(i == j)).collect())
            .collect(),
        u_inv: (0..rows)
            .map(|i| (0..rows).map(|j| i64::from(i == j)).collect())
            .collect(),
        v: (0..n).map(|i| (0..n).map(|j| i64::from(i == j)).collect()).collect(),
    };

    let bound = rows.min(n);
    for t in 0..bound {
        // pivot search: column t, then row t, then the whole submatrix
        let mut pivot = (t..rows).find(|&i| w.b[i][t] != 0).map(|i| (i, t));
        if pivot.is_none() {
            pivot = (t..n).find(|&j| w.b[t][j] != 0).map(|j| (t, j));
        }
        if pivot.is_none() {
            'scan: for i in t..rows {
                for j in t..n {
                    if w.b[i][j] != 0 {
                        pivot = Some((i, j));
                        break 'scan;
                    }
                }
            }
        }
        let Some((pi, pj)) = pivot else { break };
        if pi != t {
            w.swap_rows(t, pi);
        }
        if pj != t {
            w.swap_cols(t, pj);
        }
        loop {
            let mut dirty = false;
            for i in t + 1..rows {
                let y = w.b[i][t];
                if y == 0 {
                    continue;
                }
                dirty = true;
                let x = w.b[t][t];
                if x != 0 && y % x == 0 {
                    // pivot row untouched: this branch is what terminates the loop
                    w.row_single(t, i, y / x);
                } else {
                    let (g, s, uu) = egcd(x, y);
                    w.row_pair(t, i, s, uu, x / g, y / g);
                }
            }
            for j in t + 1..n {
                let y = w.b[t][j];
                if y == 0 {
                    continue;
                }
                dirty = true;
                let x = w.b[t][t];
                if x != 0 && y % x == 0 {
                    w.col_single(t, j, y / x);
                } else {
                    let (g, s, uu) = egcd(x, y);
                    w.col_pair(t, j, s, uu, x / g, y / g);
                }
            }
            if !dirty {
                break;
            }
        }
    }

    let diag: Vec<i64> = (0..n).map(|t| if t < bound { w.b[t][t] } else { 0 }).collect();
    let pack = |rows: &[Vec<i64>]| {
        let mut out = IntMat::zero(rows.len(), rows.first().map_or(0, |r| r.len()));
        for (i, r) in rows.iter().enumerate() {
            for (j, &x) in r.iter().enumerate() {
                out.set(i, j, x);
            }
        }
        out
    };
    Ok(ModDiagonal { diag, u: pack(&w.u), u_inv: pack(&w.u_inv), v: pack(&w.v) })
}


#[cfg(test)]
mod tests {
    use super::*;

    fn check_decomposition(m: &IntMat) {
        let s = smith_extended(m).unwrap();
        assert_eq!(s.u.mul(m).unwrap().mul(&s.v).unwrap(), s.d);
        assert_eq!(s.u.mul(&s.u_inv).unwrap(), IntMat::identity(m.rows()));
        assert_eq!(s.v.mul(&s.v_inv).unwrap(), IntMat::identity(m.cols()));
        let mut prev = 0i64;
        for i in 0..m.rows().min(m.cols()) {
            let e = s.d.get(i, i);
            assert!(e >= 0);
            if prev > 0 && e != 0 {
                assert_eq!(e % prev, 0, "divisibility chain broken");
            }
            if e != 0 {
                prev = e;
            }
        }
    }

    #[test]
    fn frozen_small_example() {
        let m = IntMat::from_rows(vec![vec![2, 4], vec![6, 8]]).unwrap();
        let (_, d, _) = smith_normal_form(&m).unwrap();
        assert_eq!(d.get(0, 0), 2);
        assert_eq!(d.get(1, 1), 4);
        check_decomposition(&m);
    }

    #[test]
    fn rectangular_and_rank_deficient() {
        let m = IntMat::from_rows(vec![vec![1, 2, 3], vec![2, 4, 6]]).unwrap();
        let s = smith_extended(&m).unwrap();
        assert_eq!(s.rank, 1);
        check_decomposition(&m);
    }

    #[test]
    fn solve_congruence_with_kernel() {
        // 2x = 0 (mod 4) has solutions x in {0, 2} mod 4
        let a = IntMat::from_rows(vec![vec![2]]).unwrap();
        let sol = solve_linear_system_mod(&a, &[0], &[4]).unwrap().unwrap();
        let reduce = |x: i64| x.rem_euclid(4);
        let mut reachable = std::collections::BTreeSet::new();
        for c in -4i64..=4 {
            let mut x = sol.particular[0];
            for k in 0..sol.kernel.cols() {
                x += c * sol.kernel.get(0, k);
            }
            if sol.kernel.cols() == 1 {
                reachable.insert(reduce(x));
            }
        }
        assert!(reachable.contains(&0));
        assert!(reachable.contains(&2));
        assert!(!reachable.contains(&1));
        assert!(!reachable.contains(&3));
    }

    #[test]
    fn solve_detects_unsolvable() {
        // 2x = 1 (mod 4) has no solution
        let a = IntMat::from_rows(vec![vec![2]]).unwrap();
        assert_eq!(solve_linear_system_mod(&a, &[1], &[4]).unwrap(), None);
    }

    #[test]
    fn exact_rows_use_modulus_zero() {
        // x + y = 3 exactly, x - y = 1 exactly
        let a = IntMat::from_rows(vec![vec![1, 1], vec![1, -1]]).unwrap();
        let sol = solve_linear_system_mod(&a, &[3, 1], &[0, 0]).unwrap().unwrap();
        assert_eq!(sol.particular, vec![2, 1]);
        assert!(sol.kernel.is_zero() || sol.kernel.cols() == 0);
    }

    fn mat_mod(x: &IntMat, m: i64) -> IntMat {
        let mut out = IntMat::zero(x.rows(), x.cols());
        for i in 0..x.rows() {
            for j in 0..x.cols() {
                out.set(i, j, x.get(i, j).rem_euclid(m));
            }
        }
        out
    }

    fn check_mod_diagonal(a: &IntMat, m: i64) {
        let full = diagonalize_mod_full(a, m).unwrap();
        let uav = full.u.mul(a).unwrap().mul(&full.v).unwrap();
        let mut d = IntMat::zero(a.rows(), a.cols());
        for (t, &e) in full.diag.iter().enumerate() {
            if t < a.rows() {
                d.set(t, t, e);
            }
        }
        assert_eq!(mat_mod(&uav, m), mat_mod(&d, m), "u a v is not diagonal mod {m}");
        let uu = full.u.mul(&full.u_inv).unwrap();
        assert_eq!(
            mat_mod(&uu, m),
            mat_mod(&IntMat::identity(a.rows()), m),
            "u_inv fails mod {m}"
        );
        for &e in &full.diag {
            assert!((0..m).contains(&e));
        }
    }

    #[test]
    fn mod_diagonalization_identities_over_many_moduli() {
        let samples = vec![
            IntMat::from_rows(vec![vec![2, -2]]).unwrap(),
            IntMat::from_rows(vec![vec![2, 4], vec![6, 8]]).unwrap(),
            IntMat::from_rows(vec![vec![0, 0], vec![0, 0]]).unwrap(),
            IntMat::from_rows(vec![vec![3, 1, 4], vec![1, 5, 9], vec![2, 6, 5], vec![3, 5, 8]])
                .unwrap(),
            IntMat::from_rows(vec![vec![6, 10, 15], vec![10, 15, 6]]).unwrap(),
            IntMat::from_rows(vec![vec![-7, 3], vec![12, -5], vec![0, 4]]).unwrap(),
        ];
        for a in &samples {
            for m in [1i64, 2, 3, 4, 6, 8, 9, 12, 30] {
                check_mod_diagonal(a, m);
            }
        }
    }

    #[test]
    fn mod_kernel_matches_exhaustive_solutions() {
        // kernel of a x = 0 (mod m) recovered from v and the diagonal
        let a = IntMat::from_rows(vec![vec![2, 4], vec![4, 2]]).unwrap();
        let m = 6i64;
        let (diag, v) = diagonalize_mod(&a, m).unwrap();
        let mut reachable = std::collections::BTreeSet::new();
        for y0 in 0..m {
            for y1 in 0..m {
                let ok = (diag[0] * y0).rem_euclid(m) == 0 && (diag[1] * y1).rem_euclid(m) == 0;
                if ok {
                    let x0 = (v.get(0, 0) * y0 + v.get(0, 1) * y1).rem_euclid(m);
                    let x1 = (v.get(1, 0) * y0 + v.get(1, 1) * y1).rem_euclid(m);
                    reachable.insert((x0, x1));
                }
            }
        }
        let mut expected = std::collections::BTreeSet::new();
        for x0 in 0..m {
            for x1 in 0..m {
                if (2 * x0 + 4 * x1).rem_euclid(m) == 0 && (4 * x0 + 2 * x1).rem_euclid(m) == 0 {
                    expected.insert((x0, x1));
                }
            }
        }
        assert_eq!(reachable, expected);
    }
}
