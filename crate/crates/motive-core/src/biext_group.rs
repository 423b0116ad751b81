use std::collections::BTreeMap;

use crate::cocycle::BiextCocycle;
use crate::error::{Error, Result};
use crate::finite::{gcd, FiniteAbelianGroup};
use crate::group::{DeskElem, DeskGroup};
use crate::lattice::lattice_quotient;
use crate::limits::{check_enumeration, max_enumeration};
use crate::mat::IntMat;
use crate::snf::{diagonalize_mod, diagonalize_mod_full, solve_linear_system_mod};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Isomorphism type of a biextension group.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BiextGroupDescription {
    pub free_rank: usize,
    /// canonical invariant factors, each > 1 and dividing the next
    pub invariant_factors: Vec<i64>,
}

impl BiextGroupDescription {
    pub fn trivial() -> Self {
        BiextGroupDescription { free_rank: 0, invariant_factors: Vec::new() }
    }

    pub fn order(&self) -> Option<u128> {
        if self.free_rank > 0 {
            return None;
        }
        Some(self.invariant_factors.iter().map(|&d| d as u128).product())
    }

    pub fn is_trivial(&self) -> bool {
        self.free_rank == 0 && self.invariant_factors.is_empty()
    }

    fn canonicalize(mut self) -> Result<Self> {
        let g = FiniteAbelianGroup::new(
            self.invariant_factors.iter().copied().filter(|&d| d > 1).collect(),
        )?;
        self.invariant_factors = g.canonical_invariant_factors()?;
        Ok(self)
    }
}

/// Biext^0(P, Q; G): the group of bihomomorphisms P x Q -> G. With cyclic
/// decompositions P = + Z/m_i and Q = + Z/n_j, a bihomomorphism is exactly a
/// choice of h(e_i, f_j) killed by gcd(m_i, n_j), so the group splits as a
/// direct sum of torsion subgroups of G.
pub fn biext_zero(p: &DeskGroup, q: &DeskGroup, g: &DeskGroup) -> Result<BiextGroupDescription> {
    let pm = p.coord_moduli()?;
    let qm = q.coord_moduli()?;
    let gm = g.coord_moduli()?;
    let mut free_rank = 0usize;
    let mut factors: Vec<i64> = Vec::new();
    for &mi in &pm {
        for &nj in &qm {
            let c = gcd(mi, nj);
            // c = 0 happens only when both generators are free
            for &gk in &gm {
                if c == 0 {
                    if gk == 0 {
                        free_rank += 1;
                    } else if gk > 1 {
                        factors.push(gk);
                    }
                } else if gk == 0 {
                    if c > 1 {
                        factors.push(c);
                    }
                } else {
                    let d = gcd(gk, c);
                    if d > 1 {
                        factors.push(d);
                    }
                }
            }
        }
    }
    BiextGroupDescription { free_rank, invariant_factors: factors }.canonicalize()
}

/// Count of biadditive maps P x Q -> G found by filtering every function
/// table. Exponential; exists to cross-check [`biext_zero`].
pub fn biext_zero_brute_force_count(
    p: &DeskGroup,
    q: &DeskGroup,
    g: &DeskGroup,
) -> Result<u128> {
    let limit = max_enumeration();
    let p_elems = p.enumerate(limit)?;
    let q_elems = q.enumerate(limit)?;
    let g_elems = g.enumerate(limit)?;
    let (np, nq, ng) = (p_elems.len(), q_elems.len(), g_elems.len());
    let p_add = add_table(p, &p_elems)?;
    let q_add = add_table(q, &q_elems)?;
    let g_add = add_table(g, &g_elems)?;
    // h(0, q) = h(p, 0) = 0 is forced by biadditivity, so only the cells
    // with both indices nonzero are free
    let cells = np.saturating_sub(1) * nq.saturating_sub(1);
    let size = (ng as u128)
        .checked_pow(cells as u32)
        .ok_or(Error::EnumerationTooLarge { size: u128::MAX, limit })?;
    check_enumeration(size)?;
    let mut assignment = vec![0usize; cells];
    let mut count = 0u128;
    loop {
        let h = |pi: usize, qi: usize| {
            if pi == 0 || qi == 0 {
                0
            } else {
                assignment[(pi - 1) * (nq - 1) + (qi - 1)]
            }
        };
        let mut ok = true;
        'check: for pi in 0..np {
            for pj in 0..np {
                let si = p_add[pi][pj];
                for qi in 0..nq {
                    if h(si, qi) != g_add[h(pi, qi)][h(pj, qi)] {
                        ok = false;
                        break 'check;
                    }
                }
            }
        }
        if ok {
            'check2: for qi in 0..nq {
                for qj in 0..nq {
                    let si = q_add[qi][qj];
                    for pi in 0..np {
                        if h(pi, si) != g_add[h(pi, qi)][h(pi, qj)] {
                            ok = false;
                            break 'check2;
                        }
                    }
                }
            }
        }
        if ok {
            count += 1;
        }
        let mut at = 0;
        loop {
            if at == cells {
                return Ok(count);
            }
            assignment[at] += 1;
            if assignment[at] < ng {
                break;
            }
            assignment[at] = 0;
            at += 1;
        }
    }
}

/// Unknown layout for the congruence-system route: one slot per independent
/// table entry after the structural reductions (symmetry, normalization, and
/// the forced zeros phi(., .; 0) and psi(0; ., .)).
struct SlotLayout {
    p_elems: Vec<DeskElem>,
    q_elems: Vec<DeskElem>,
    /// (a, b, q) with 1 <= a <= b, q >= 1, all element indices
    phi_slots: Vec<(usize, usize, usize)>,
    /// (p, c, d) with p >= 1, 1 <= c <= d
    psi_slots: Vec<(usize, usize, usize)>,
    phi_index: BTreeMap<(usize, usize, usize), usize>,
    psi_index: BTreeMap<(usize, usize, usize), usize>,
    p_add: Vec<Vec<usize>>,
    q_add: Vec<Vec<usize>>,
}

impl SlotLayout {
    fn new(p: &DeskGroup, q: &DeskGroup) -> Result<Self> {
        let limit = max_enumeration();
        let p_elems = p.enumerate(limit)?;
        let q_elems = q.enumerate(limit)?;
        if p_elems.first() != Some(&p.zero()) || q_elems.first() != Some(&q.zero()) {
            return Err(Error::InvalidGroup("enumeration must start at zero".into()));
        }
        let p_add = add_table(p, &p_elems)?;
        let q_add = add_table(q, &q_elems)?;
        let mut phi_slots = Vec::new();
        let mut phi_index = BTreeMap::new();
        for a in 1..p_elems.len() {
            for b in a..p_elems.len() {
                for qq in 1..q_elems.len() {
                    phi_index.insert((a, b, qq), phi_slots.len());
                    phi_slots.push((a, b, qq));
                }
            }
        }
        let mut psi_slots = Vec::new();
        let mut psi_index = BTreeMap::new();
        for pp in 1..p_elems.len() {
            for c in 1..q_elems.len() {
                for d in c..q_elems.len() {
                    psi_index.insert((pp, c, d), psi_slots.len());
                    psi_slots.push((pp, c, d));
                }
            }
        }
        Ok(SlotLayout { p_elems, q_elems, phi_slots, psi_slots, phi_index, psi_index, p_add, q_add })
    }

    fn slots(&self) -> usize {
        self.phi_slots.len() + self.psi_slots.len()
    }

    /// Slot of phi(a, b; q), or None when the entry is structurally zero.
    fn phi_slot(&self, a: usize, b: usize, q: usize) -> Option<usize> {
        if a == 0 || b == 0 || q == 0 {
            return None;
        }
        let key = if a <= b { (a, b, q) } else { (b, a, q) };
        self.phi_index.get(&key).copied()
    }

    fn psi_slot(&self, p: usize, c: usize, d: usize) -> Option<usize> {
        if p == 0 || c == 0 || d == 0 {
            return None;
        }
        let key = if c <= d { (p, c, d) } else { (p, d, c) };
        self.psi_index.get(&key).map(|&i| self.phi_slots.len() + i)
    }

    /// Rows of the identity system; every coefficient is +-1.
    fn identity_rows(&self) -> Vec<Vec<(usize, i64)>> {
        let np = self.p_elems.len();
        let nq = self.q_elems.len();
        let mut rows = Vec::new();
        let mut push = |terms: Vec<(Option<usize>, i64)>| {
            let mut acc: BTreeMap<usize, i64> = BTreeMap::new();
            for (slot, coeff) in terms.into_iter().flat_map(|(s, c)| s.map(|s| (s, c))) {
                *acc.entry(slot).or_insert(0) += coeff;
            }
            let mut row: Vec<(usize, i64)> = acc.into_iter().filter(|&(_, c)| c != 0).collect();
            if let Some(&(_, lead)) = row.first() {
                // canonical sign so mirrored identities dedupe away
                if lead < 0 {
                    for (_, c) in row.iter_mut() {
                        *c = -*c;
                    }
                }
                rows.push(row);
            }
        };
        // swapping the outer arguments negates the cocycle identity, so
        // p3 >= p1 (and q3 >= q1 below) already covers everything
        for p1 in 1..np {
            for p2 in 1..np {
                let p12 = self.p_add[p1][p2];
                for p3 in p1..np {
                    let p23 = self.p_add[p2][p3];
                    for qq in 1..nq {
                        push(vec![
                            (self.phi_slot(p1, p2, qq), 1),
                            (self.phi_slot(p12, p3, qq), 1),
                            (self.phi_slot(p2, p3, qq), -1),
                            (self.phi_slot(p1, p23, qq), -1),
                        ]);
                    }
                }
            }
        }
        for q1 in 1..nq {
            for q2 in 1..nq {
                let q12 = self.q_add[q1][q2];
                for q3 in q1..nq {
                    let q23 = self.q_add[q2][q3];
                    for pp in 1..np {
                        push(vec![
                            (self.psi_slot(pp, q1, q2), 1),
                            (self.psi_slot(pp, q12, q3), 1),
                            (self.psi_slot(pp, q2, q3), -1),
                            (self.psi_slot(pp, q1, q23), -1),
                        ]);
                    }
                }
            }
        }
        // the interchange identity is symmetric in (p1, p2) and in (q1, q2)
        for p1 in 1..np {
            for p2 in p1..np {
                let p12 = self.p_add[p1][p2];
                for q1 in 1..nq {
                    for q2 in q1..nq {
                        let q12 = self.q_add[q1][q2];
                        push(vec![
                            (self.phi_slot(p1, p2, q1), 1),
                            (self.phi_slot(p1, p2, q2), 1),
                            (self.psi_slot(p12, q1, q2), 1),
                            (self.psi_slot(p1, q1, q2), -1),
                            (self.psi_slot(p2, q1, q2), -1),
                            (self.phi_slot(p1, p2, q12), -1),
                        ]);
                    }
                }
            }
        }
        rows
    }

    /// Coboundary generator columns: the cocycle of the indicator function
    /// h = 1 at a single nonzero cell (a, b).
    fn coboundary_columns(&self) -> Vec<Vec<i64>> {
        let np = self.p_elems.len();
        let nq = self.q_elems.len();
        let mut cols = Vec::new();
        for ha in 1..np {
            for hb in 1..nq {
                let mut col = vec![0i64; self.slots()];
                let h = |pi: usize, qi: usize| -> i64 { i64::from(pi == ha && qi == hb) };
                for (k, &(a, b, qq)) in self.phi_slots.iter().enumerate() {
                    let sum = self.p_add[a][b];
                    col[k] = h(sum, qq) - h(a, qq) - h(b, qq);
                }
                for (k, &(pp, c, d)) in self.psi_slots.iter().enumerate() {
                    let sum = self.q_add[c][d];
                    col[self.phi_slots.len() + k] = h(pp, sum) - h(pp, c) - h(pp, d);
                }
                cols.push(col);
            }
        }
        cols
    }
}

fn add_table(g: &DeskGroup, elems: &[DeskElem]) -> Result<Vec<Vec<usize>>> {
    let index: BTreeMap<&DeskElem, usize> = elems.iter().enumerate().map(|(i, e)| (e, i)).collect();
    let mut table = vec![vec![0usize; elems.len()]; elems.len()];
    for (i, a) in elems.iter().enumerate() {
        for (j, b) in elems.iter().enumerate() {
            let s = g.add(a, b)?;
            table[i][j] = *index
                .get(&s)
                .ok_or_else(|| Error::InvalidGroup("group is not closed under addition".into()))?;
        }
    }
    Ok(table)
}

/// Biext^1 of finite groups with values in one cyclic factor Z/m (m = 0 for
/// a free factor): the quotient of the cocycle solution lattice by the
/// coboundary lattice.
fn biext_one_cyclic(
    layout: &SlotLayout,
    m: i64,
) -> Result<(BiextGroupDescription, Vec<Vec<i64>>)> {
    let n = layout.slots();
    if n == 0 {
        return Ok((BiextGroupDescription::trivial(), Vec::new()));
    }
    let rows = layout.identity_rows();
    let rows: Vec<Vec<(usize, i64)>> = {
        let dedup: std::collections::BTreeSet<Vec<(usize, i64)>> = rows.into_iter().collect();
        dedup.into_iter().collect()
    };
    let mut a = IntMat::zero(rows.len(), n);
    for (i, row) in rows.iter().enumerate() {
        for &(j, c) in row {
            a.set(i, j, a.get(i, j) + c);
        }
    }
    if m != 0 {
        return biext_one_cyclic_mod(layout, &a, m);
    }

    // free target factor: exact integer route
    let moduli = vec![0i64; rows.len()];
    let b = vec![0i64; rows.len()];
    let sol = solve_linear_system_mod(&a, &b, &moduli)?
        .ok_or_else(|| Error::NoSolution("homogeneous system lost its zero solution".into()))?;
    let mut z_cols: Vec<Vec<i64>> = Vec::new();
    for k in 0..sol.kernel.cols() {
        z_cols.push(sol.kernel.col_vec(k));
    }
    let b_cols = layout.coboundary_columns();
    let l_z = cols_to_mat(n, &z_cols);
    let l_b = cols_to_mat(n, &b_cols);
    let quo = lattice_quotient(&l_z, &l_b)?;
    let desc = BiextGroupDescription {
        free_rank: quo.free_rank,
        invariant_factors: quo.invariant_factors.clone(),
    }
    .canonicalize()?;
    let mut gens = Vec::new();
    for k in 0..quo.torsion_generators.cols() {
        gens.push(quo.torsion_generators.col_vec(k));
    }
    for k in 0..quo.free_generators.cols() {
        gens.push(quo.free_generators.col_vec(k));
    }
    Ok((desc, gens))
}

fn egcd(a: i64, b: i64) -> (i64, i64, i64) {
    if b == 0 {
        return (a.abs(), a.signum(), 0);
    }
    let (g, s, u) = egcd(b, a % b);
    (g, u, s - (a / b) * u)
}

fn inv_mod(a: i64, n: i64) -> Result<i64> {
    if n == 1 {
        return Ok(0);
    }
    let (g, s, _) = egcd(a.rem_euclid(n), n);
    if g != 1 {
        return Err(Error::DivisionByZero("no inverse for a zero divisor"));
    }
    Ok(s.rem_euclid(n))
}

/// The quotient (cocycle solutions)/(coboundaries) for one cyclic target
/// factor Z/m, computed entirely mod m: kernel, span basis, and invariant
/// factors, so no intermediate value ever leaves [0, m).
fn biext_one_cyclic_mod(
    layout: &SlotLayout,
    a: &IntMat,
    m: i64,
) -> Result<(BiextGroupDescription, Vec<Vec<i64>>)> {
    let n = a.cols();

    // solutions of the identity system mod m
    let (diag_a, va) = diagonalize_mod(a, m)?;
    let mut z_cols: Vec<Vec<i64>> = Vec::new();
    for t in 0..n {
        let step = m / gcd(diag_a[t], m);
        if step < m {
            z_cols.push((0..n).map(|i| (va.get(i, t) * step).rem_euclid(m)).collect());
        }
    }
    if z_cols.is_empty() {
        return Ok((BiextGroupDescription::trivial(), Vec::new()));
    }

    // split the solution span into independent cyclic pieces: s_t has order
    // o_t, with coordinates read off through the row transform
    let z = cols_to_mat(n, &z_cols);
    let zd = diagonalize_mod_full(&z, m)?;
    let mut kept: Vec<(usize, i64, i64)> = Vec::new();
    for t in 0..n.min(z.cols()) {
        let d = zd.diag[t];
        let o = m / gcd(d, m);
        if o > 1 {
            kept.push((t, d, o));
        }
    }
    if kept.is_empty() {
        return Ok((BiextGroupDescription::trivial(), Vec::new()));
    }
    let r = kept.len();
    let kept_coords: std::collections::BTreeSet<usize> = kept.iter().map(|&(t, _, _)| t).collect();

    // express each coboundary in the cyclic coordinates of the span
    let b_cols = layout.coboundary_columns();
    let mut rel = IntMat::zero(r, b_cols.len() + r);
    for (jcol, w) in b_cols.iter().enumerate() {
        let y: Vec<i64> = (0..n)
            .map(|i| {
                let mut acc = 0i64;
                for k in 0..n {
                    acc = (acc + zd.u.get(i, k) * w[k]).rem_euclid(m);
                }
                acc
            })
            .collect();
        for t in 0..n {
            if !kept_coords.contains(&t) && y[t] != 0 {
                return Err(Error::InvalidGroup(
                    "coboundary lattice escapes the cocycle span".into(),
                ));
            }
        }
        for (row, &(t, d, o)) in kept.iter().enumerate() {
            let g = gcd(d, m);
            if y[t] % g != 0 {
                return Err(Error::InvalidGroup(
                    "coboundary lattice escapes the cocycle span".into(),
                ));
            }
            let c = ((y[t] / g) % o) * inv_mod(d / g, o)? % o;
            rel.set(row, jcol, c.rem_euclid(o));
        }
    }
    for (row, &(_, _, o)) in kept.iter().enumerate() {
        rel.set(row, b_cols.len() + row, o);
    }

    // invariant factors of span/coboundaries and lifted class generators
    let rd = diagonalize_mod_full(&rel, m)?;
    let mut invariant_factors = Vec::new();
    let mut gens: Vec<Vec<i64>> = Vec::new();
    for j in 0..r {
        let f = gcd(rd.diag[j], m);
        if f > 1 {
            invariant_factors.push(f);
            let mut gvec = vec![0i64; n];
            for (row, &(t, d, _)) in kept.iter().enumerate() {
                let coeff = rd.u_inv.get(row, j);
                if coeff == 0 {
                    continue;
                }
                for (i, gv) in gvec.iter_mut().enumerate() {
                    let s_ti = (d * zd.u_inv.get(i, t)).rem_euclid(m);
                    *gv = (*gv + coeff * s_ti).rem_euclid(m);
                }
            }
            gens.push(gvec);
        }
    }
    let desc =
        BiextGroupDescription { free_rank: 0, invariant_factors }.canonicalize()?;
    Ok((desc, gens))
}

fn cols_to_mat(rows: usize, cols: &[Vec<i64>]) -> IntMat {
    let mut m = IntMat::zero(rows, cols.len());
    for (j, col) in cols.iter().enumerate() {
        for (i, &v) in col.iter().enumerate() {
            m.set(i, j, v);
        }
    }
    m
}

/// Biext^1(P, Q; G) for finite P and Q through the congruence-system route,
/// with representative cocycles for the class generators.
pub fn biext_one(
    p: &DeskGroup,
    q: &DeskGroup,
    g: &DeskGroup,
) -> Result<(BiextGroupDescription, Vec<BiextCocycle>)> {
    let layout = SlotLayout::new(p, q)?;
    let gm = g.coord_moduli()?;
    let mut free_rank = 0usize;
    let mut factors = Vec::new();
    let mut generators: Vec<BiextCocycle> = Vec::new();
    for (coord, &m) in gm.iter().enumerate() {
        let (desc, gens) = biext_one_cyclic(&layout, m)?;
        free_rank += desc.free_rank;
        factors.extend(desc.invariant_factors.iter().copied());
        for gen in gens {
            generators.push(cocycle_from_slots(&layout, p, q, g, coord, gm.len(), &gen)?);
        }
    }
    let desc = BiextGroupDescription { free_rank, invariant_factors: factors }.canonicalize()?;
    Ok((desc, generators))
}

fn cocycle_from_slots(
    layout: &SlotLayout,
    p: &DeskGroup,
    q: &DeskGroup,
    g: &DeskGroup,
    coord: usize,
    width: usize,
    slot_values: &[i64],
) -> Result<BiextCocycle> {
    let mut c = BiextCocycle::zero(p.clone(), q.clone(), g.clone());
    let lift = |v: i64| -> Result<DeskElem> {
        let mut coords = vec![0i64; width];
        coords[coord] = v;
        g.from_additive_coords(&coords)
    };
    let gz = g.zero();
    for (k, &(a, b, qq)) in layout.phi_slots.iter().enumerate() {
        let v = lift(slot_values[k])?;
        if v != gz {
            c.set_phi(
                layout.p_elems[a].clone(),
                layout.p_elems[b].clone(),
                layout.q_elems[qq].clone(),
                v.clone(),
            );
            if a != b {
                c.set_phi(
                    layout.p_elems[b].clone(),
                    layout.p_elems[a].clone(),
                    layout.q_elems[qq].clone(),
                    v,
                );
            }
        }
    }
    for (k, &(pp, cc, dd)) in layout.psi_slots.iter().enumerate() {
        let v = lift(slot_values[layout.phi_slots.len() + k])?;
        if v != gz {
            c.set_psi(
                layout.p_elems[pp].clone(),
                layout.q_elems[cc].clone(),
                layout.q_elems[dd].clone(),
                v.clone(),
            );
            if cc != dd {
                c.set_psi(
                    layout.p_elems[pp].clone(),
                    layout.q_elems[dd].clone(),
                    layout.q_elems[cc].clone(),
                    v,
                );
            }
        }
    }
    Ok(c)
}

/// Exhaustive Biext^1 for finite groups: enumerate every reduced table,
/// keep the valid cocycles, and count coboundary cosets. The independent
/// oracle for the congruence-system route.
pub fn biext_one_brute_force(p: &DeskGroup, q: &DeskGroup, g: &DeskGroup) -> Result<u128> {
    brute_force_impl(p, q, g, cfg!(feature = "parallel"))
}

/// Single-threaded variant of [`biext_one_brute_force`].
pub fn biext_one_brute_force_seq(p: &DeskGroup, q: &DeskGroup, g: &DeskGroup) -> Result<u128> {
    brute_force_impl(p, q, g, false)
}

struct BruteTables {
    np: usize,
    nq: usize,
    ng: usize,
    p_add: Vec<usize>,
    q_add: Vec<usize>,
    g_add: Vec<usize>,
    phi_slots: Vec<(usize, usize, usize)>,
    psi_slots: Vec<(usize, usize, usize)>,
}

impl BruteTables {
    fn check(&self, slot_values: &[usize]) -> bool {
        let (np, nq) = (self.np, self.nq);
        // materialize full tables including mirrored and forced-zero entries
        let mut phi = vec![0usize; np * np * nq];
        let mut psi = vec![0usize; np * nq * nq];
        for (k, &(a, b, qq)) in self.phi_slots.iter().enumerate() {
            phi[(a * np + b) * nq + qq] = slot_values[k];
            phi[(b * np + a) * nq + qq] = slot_values[k];
        }
        let off = self.phi_slots.len();
        for (k, &(pp, c, d)) in self.psi_slots.iter().enumerate() {
            psi[(pp * nq + c) * nq + d] = slot_values[off + k];
            psi[(pp * nq + d) * nq + c] = slot_values[off + k];
        }
        let ga = |x: usize, y: usize| self.g_add[x * self.ng + y];
        for p1 in 1..np {
            for p2 in 1..np {
                let p12 = self.p_add[p1 * np + p2];
                for p3 in 1..np {
                    let p23 = self.p_add[p2 * np + p3];
                    for qq in 1..nq {
                        let lhs = ga(phi[(p1 * np + p2) * nq + qq], phi[(p12 * np + p3) * nq + qq]);
                        let rhs = ga(phi[(p2 * np + p3) * nq + qq], phi[(p1 * np + p23) * nq + qq]);
                        if lhs != rhs {
                            return false;
                        }
                    }
                }
            }
        }
        for q1 in 1..nq {
            for q2 in 1..nq {
                let q12 = self.q_add[q1 * nq + q2];
                for q3 in 1..nq {
                    let q23 = self.q_add[q2 * nq + q3];
                    for pp in 1..np {
                        let lhs = ga(psi[(pp * nq + q1) * nq + q2], psi[(pp * nq + q12) * nq + q3]);
                        let rhs = ga(psi[(pp * nq + q2) * nq + q3], psi[(pp * nq + q1) * nq + q23]);
                        if lhs != rhs {
                            return false;
                        }
                    }
                }
            }
        }
        for p1 in 1..np {
            for p2 in 1..np {
                let p12 = self.p_add[p1 * np + p2];
                for q1 in 1..nq {
                    for q2 in 1..nq {
                        let q12 = self.q_add[q1 * nq + q2];
                        let lhs = ga(
                            ga(phi[(p1 * np + p2) * nq + q1], phi[(p1 * np + p2) * nq + q2]),
                            psi[(p12 * nq + q1) * nq + q2],
                        );
                        let rhs = ga(
                            ga(psi[(p1 * nq + q1) * nq + q2], psi[(p2 * nq + q1) * nq + q2]),
                            phi[(p1 * np + p2) * nq + q12],
                        );
                        if lhs != rhs {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }

    /// slot vector of the coboundary of h given by cell values
    fn coboundary(&self, h: &[usize]) -> Vec<usize> {
        let (np, nq, ng) = (self.np, self.nq, self.ng);
        let hv = |pi: usize, qi: usize| -> usize {
            if pi == 0 || qi == 0 {
                0
            } else {
                h[(pi - 1) * (nq - 1) + (qi - 1)]
            }
        };
        let gneg: Vec<usize> = (0..ng)
            .map(|x| (0..ng).find(|&y| self.g_add[x * ng + y] == 0).unwrap())
            .collect();
        let mut out = Vec::with_capacity(self.phi_slots.len() + self.psi_slots.len());
        for &(a, b, qq) in &self.phi_slots {
            let sum = self.p_add[a * np + b];
            let v = self.g_add
                [self.g_add[hv(sum, qq) * ng + gneg[hv(a, qq)]] * ng + gneg[hv(b, qq)]];
            out.push(v);
        }
        for &(pp, c, d) in &self.psi_slots {
            let sum = self.q_add[c * nq + d];
            let v = self.g_add
                [self.g_add[hv(pp, sum) * ng + gneg[hv(pp, c)]] * ng + gneg[hv(pp, d)]];
            out.push(v);
        }
        out
    }
}

fn brute_tables(p: &DeskGroup, q: &DeskGroup, g: &DeskGroup) -> Result<BruteTables> {
    let limit = max_enumeration();
    let p_elems = p.enumerate(limit)?;
    let q_elems = q.enumerate(limit)?;
    let g_elems = g.enumerate(limit)?;
    let flat = |t: Vec<Vec<usize>>| -> Vec<usize> { t.into_iter().flatten().collect() };
    let layout = SlotLayout::new(p, q)?;
    Ok(BruteTables {
        np: p_elems.len(),
        nq: q_elems.len(),
        ng: g_elems.len(),
        p_add: flat(add_table(p, &p_elems)?),
        q_add: flat(add_table(q, &q_elems)?),
        g_add: flat(add_table(g, &g_elems)?),
        phi_slots: layout.phi_slots,
        psi_slots: layout.psi_slots,
    })
}

fn brute_force_impl(p: &DeskGroup, q: &DeskGroup, g: &DeskGroup, parallel: bool) -> Result<u128> {
    let t = brute_tables(p, q, g)?;
    let slots = t.phi_slots.len() + t.psi_slots.len();
    let candidates = (t.ng as u128)
        .checked_pow(slots as u32)
        .ok_or(Error::EnumerationTooLarge { size: u128::MAX, limit: max_enumeration() })?;
    check_enumeration(candidates)?;
    let total = candidates as u64;

    let decode = |mut idx: u64| -> Vec<usize> {
        let mut v = vec![0usize; slots];
        for s in v.iter_mut() {
            *s = (idx % t.ng as u64) as usize;
            idx /= t.ng as u64;
        }
        v
    };

    let valid: Vec<Vec<usize>>;
    #[cfg(feature = "parallel")]
    {
        if parallel {
            valid = (0..total)
                .into_par_iter()
                .filter_map(|i| {
                    let v = decode(i);
                    if t.check(&v) {
                        Some(v)
                    } else {
                        None
                    }
                })
                .collect();
        } else {
            valid = (0..total).filter_map(|i| {
                let v = decode(i);
                t.check(&v).then_some(v)
            }).collect();
        }
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = parallel;
        valid = (0..total).filter_map(|i| {
            let v = decode(i);
            t.check(&v).then_some(v)
        }).collect();
    }

    // coboundary subgroup as explicit slot vectors
    let h_cells = (t.np - 1) * (t.nq - 1);
    let h_count = (t.ng as u128)
        .checked_pow(h_cells as u32)
        .ok_or(Error::EnumerationTooLarge { size: u128::MAX, limit: max_enumeration() })?;
    check_enumeration(h_count)?;
    let mut boundaries = std::collections::BTreeSet::new();
    let mut h = vec![0usize; h_cells];
    loop {
        boundaries.insert(t.coboundary(&h));
        let mut at = 0;
        loop {
            if at == h_cells {
                let n_valid = valid.len() as u128;
                let n_b = boundaries.len() as u128;
                if n_b == 0 || n_valid % n_b != 0 {
                    return Err(Error::InvalidGroup(
                        "valid cocycles do not split into coboundary cosets".into(),
                    ));
                }
                return Ok(n_valid / n_b);
            }
            h[at] += 1;
            if h[at] < t.ng {
                break;
            }
            h[at] = 0;
            at += 1;
        }
    }
}

/// A trivializing function for a lattice-based cocycle, produced by path
/// integration and checked entrywise over the window.
#[derive(Debug, Clone)]
pub struct LatticeTrivialization {
    pub h: BTreeMap<(DeskElem, DeskElem), DeskElem>,
    pub window: i64,
}

pub(crate) fn window_coords(rank: usize, w: i64) -> Vec<Vec<i64>> {
    let mut acc = vec![Vec::new()];
    for _ in 0..rank {
        let mut next = Vec::new();
        for prefix in &acc {
            for v in -w..=w {
                let mut x = prefix.clone();
                x.push(v);
                next.push(x);
            }
        }
        acc = next;
    }
    acc
}

/// Over lattices P = Z^a, Q = Z^b every biextension by a desk group is
/// trivial; this finds a witness h with coboundary equal to the given
/// cocycle on the window {-w..w}^a x {-w..w}^b, by integrating phi along
/// lattice paths in P and the leftover psi in Q.
pub fn lattice_trivialization_witness(
    c: &BiextCocycle,
    w: i64,
) -> Result<LatticeTrivialization> {
    let (rank_p, rank_q) = match (&c.p, &c.q) {
        (DeskGroup::Lattice { rank: a }, DeskGroup::Lattice { rank: b }) => (*a, *b),
        _ => {
            return Err(Error::UnsupportedShape(
                "trivialization witness expects lattice sides".into(),
            ))
        }
    };
    let p_window = window_coords(rank_p, w);
    let q_window = window_coords(rank_q, w);
    check_enumeration((p_window.len() as u128) * (q_window.len() as u128))?;

    // stage 1: h0 integrates phi in the P direction along lexicographic
    // coordinate paths, so that (delta_p h0) reproduces phi on the window
    let mut h0: BTreeMap<(Vec<i64>, Vec<i64>), DeskElem> = BTreeMap::new();
    for qc in &q_window {
        let qe = DeskElem::Ints(qc.clone());
        // grow from the origin one unit step at a time
        for pc in order_by_path(&p_window) {
            let pe_key = (pc.clone(), qc.clone());
            if pc.iter().all(|&x| x == 0) {
                h0.insert(pe_key, c.g.zero());
                continue;
            }
            let (prev, step) = last_step(&pc);
            let prev_val = h0
                .get(&(prev.clone(), qc.clone()))
                .cloned()
                .expect("path predecessor already computed");
            // h(prev + step) = h(prev) + h(step) + phi(prev, step), with
            // h vanishing on unit steps by choice
            let delta = if step.1 > 0 {
                c.phi_at(&DeskElem::Ints(prev.clone()), &unit_elem(rank_p, step.0, 1), &qe)
            } else {
                // h(prev - e) = h(prev) - phi(prev - e, e)
                c.g.neg(&c.phi_at(&DeskElem::Ints(pc.clone()), &unit_elem(rank_p, step.0, 1), &qe))?
            };
            let val = c.g.add(&prev_val, &delta)?;
            h0.insert(pe_key, val);
        }
    }

    // stage 2: the residual psi' = psi - delta_q h0 is additive in p once
    // phi is integrated away; integrate it in the Q direction on the basis
    // p = e_i and extend additively
    let psi_res = |pc: &Vec<i64>, q1: &Vec<i64>, q2: &Vec<i64>| -> Result<DeskElem> {
        let raw = c.psi_at(
            &DeskElem::Ints(pc.clone()),
            &DeskElem::Ints(q1.clone()),
            &DeskElem::Ints(q2.clone()),
        );
        let sum: Vec<i64> = q1.iter().zip(q2).map(|(&x, &y)| x + y).collect();
        let a = h0.get(&(pc.clone(), sum)).cloned();
        let b = h0.get(&(pc.clone(), q1.clone())).cloned();
        let d = h0.get(&(pc.clone(), q2.clone())).cloned();
        match (a, b, d) {
            (Some(a), Some(b), Some(d)) => {
                let delta_q = c.g.sub(&c.g.sub(&a, &b)?, &d)?;
                c.g.sub(&raw, &delta_q)
            }
            _ => Ok(raw),
        }
    };

    let mut k: Vec<BTreeMap<Vec<i64>, DeskElem>> = vec![BTreeMap::new(); rank_p];
    for i in 0..rank_p {
        let ei: Vec<i64> = (0..rank_p).map(|j| i64::from(j == i)).collect();
        for qc in order_by_path(&q_window) {
            if qc.iter().all(|&x| x == 0) {
                k[i].insert(qc, c.g.zero());
                continue;
            }
            let (prev, step) = last_step(&qc);
            let prev_val = k[i].get(&prev).cloned().expect("path predecessor already computed");
            let delta = if step.1 > 0 {
                psi_res(&ei, &prev, &unit_coords(rank_q, step.0, 1))?
            } else {
                c.g.neg(&psi_res(&ei, &qc, &unit_coords(rank_q, step.0, 1))?)?
            };
            k[i].insert(qc, c.g.add(&prev_val, &delta)?);
        }
    }

    let mut h = BTreeMap::new();
    for pc in &p_window {
        for qc in &q_window {
            let mut val = h0.get(&(pc.clone(), qc.clone())).cloned().unwrap_or(c.g.zero());
            for (i, &pi) in pc.iter().enumerate() {
                if let Some(kv) = k[i].get(qc) {
                    val = c.g.add(&val, &c.g.scalar_mul(pi, kv)?)?;
                }
            }
            h.insert((DeskElem::Ints(pc.clone()), DeskElem::Ints(qc.clone())), val);
        }
    }
    Ok(LatticeTrivialization { h, window: w })
}

fn unit_elem(rank: usize, i: usize, sign: i64) -> DeskElem {
    DeskElem::Ints(unit_coords(rank, i, sign))
}

fn unit_coords(rank: usize, i: usize, sign: i64) -> Vec<i64> {
    (0..rank).map(|j| if j == i { sign } else { 0 }).collect()
}

/// Coordinates ordered so each one is reachable from a predecessor by a
/// single unit step (the origin first).
pub(crate) fn order_by_path(window: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let mut v = window.to_vec();
    v.sort_by_key(|c| {
        (c.iter().map(|&x| x.abs()).sum::<i64>(), c.clone())
    });
    v
}

pub(crate) fn last_step(c: &[i64]) -> (Vec<i64>, (usize, i64)) {
    // retract the last nonzero coordinate one step toward zero
    let i = c
        .iter()
        .rposition(|&x| x != 0)
        .expect("last_step called on the origin");
    let mut prev = c.to_vec();
    let sign = if c[i] > 0 { 1 } else { -1 };
    prev[i] -= sign;
    (prev, (i, sign))
}

/// Entrywise check that (delta h) equals the cocycle on the window: the
/// verification half of the lattice witness.
pub fn check_lattice_trivialization(
    c: &BiextCocycle,
    witness: &LatticeTrivialization,
) -> Result<crate::cocycle::VerifyReport> {
    use crate::cocycle::{CheckFailure, VerifyReport};
    let mut report = VerifyReport::empty();
    let h_at = |pe: &DeskElem, qe: &DeskElem| -> Option<DeskElem> {
        witness.h.get(&(pe.clone(), qe.clone())).cloned()
    };
    let keys: Vec<(DeskElem, DeskElem)> = witness.h.keys().cloned().collect();
    let p_set: std::collections::BTreeSet<DeskElem> = keys.iter().map(|(a, _)| a.clone()).collect();
    let q_set: std::collections::BTreeSet<DeskElem> = keys.iter().map(|(_, b)| b.clone()).collect();
    for p1 in &p_set {
        for p2 in &p_set {
            let sum = c.p.add(p1, p2)?;
            if !p_set.contains(&sum) {
                continue;
            }
            for qe in &q_set {
                report.instances += 1;
                let (a, b, d) = match (h_at(&sum, qe), h_at(p1, qe), h_at(p2, qe)) {
                    (Some(a), Some(b), Some(d)) => (a, b, d),
                    _ => continue,
                };
                let delta = c.g.sub(&c.g.sub(&a, &b)?, &d)?;
                if delta != c.phi_at(p1, p2, qe) {
                    report.failures.push(CheckFailure {
                        check: "trivialization-phi".into(),
                        witness: format!("p1={p1}, p2={p2}, q={qe}"),
                    });
                }
            }
        }
    }
    for q1 in &q_set {
        for q2 in &q_set {
            let sum = c.q.add(q1, q2)?;
            if !q_set.contains(&sum) {
                continue;
            }
            for pe in &p_set {
                report.instances += 1;
                let (a, b, d) = match (h_at(pe, &sum), h_at(pe, q1), h_at(pe, q2)) {
                    (Some(a), Some(b), Some(d)) => (a, b, d),
                    _ => continue,
                };
                let delta = c.g.sub(&c.g.sub(&a, &b)?, &d)?;
                if delta != c.psi_at(pe, q1, q2) {
                    report.failures.push(CheckFailure {
                        check: "trivialization-psi".into(),
                        witness: format!("p={pe}, q1={q1}, q2={q2}"),
                    });
                }
            }
        }
    }
    Ok(report)
}
