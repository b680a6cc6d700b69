//! Dense linear algebra over Z/p^e.
//!
//! Everything downstream (exact division in quotient rings, ideal
//! membership, Nygaard filtrations, torsion module checks, Ext groups)
//! reduces to solving, kernels and span membership over Z/p^e. The
//! elimination strategy is Smith-style: pivots are p-powers times units,
//! extracted in order of increasing valuation, so solutions are
//! deterministic and the p-precision spent on divisions is visible.

/// The coefficient ring Z/p^e, with e small enough that p^e fits in u64.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModRing {
    pub p: u64,
    pub e: u32,
    pub modulus: u64,
}

impl ModRing {
    pub fn new(p: u64, e: u32) -> Option<ModRing> {
        let modulus = p.checked_pow(e)?;
        Some(ModRing { p, e, modulus })
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = (a as u128 + b as u128) % self.modulus as u128;
        s as u64
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        let s = (a as u128 + self.modulus as u128 - b as u128 % self.modulus as u128)
            % self.modulus as u128;
        s as u64
    }

    #[inline]
    pub fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.modulus - a
        }
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.modulus as u128) as u64
    }

    /// p-adic valuation of a residue; returns e for 0.
    pub fn vp(&self, a: u64) -> u32 {
        if a == 0 {
            return self.e;
        }
        let mut v = 0;
        let mut x = a;
        while x % self.p == 0 {
            x /= self.p;
            v += 1;
        }
        v
    }

    pub fn is_unit(&self, a: u64) -> bool {
        a % self.p != 0
    }

    /// Inverse of a unit residue, by extended Euclid against p^e.
    pub fn inv(&self, a: u64) -> u64 {
        assert!(self.is_unit(a), "inverse of non-unit");
        let (mut r0, mut r1) = (self.modulus as i128, (a % self.modulus) as i128);
        let (mut t0, mut t1) = (0i128, 1i128);
        while r1 != 0 {
            let q = r0 / r1;
            let r = r0 - q * r1;
            r0 = r1;
            r1 = r;
            let t = t0 - q * t1;
            t0 = t1;
            t1 = t;
        }
        debug_assert_eq!(r0, 1);
        let m = self.modulus as i128;
        (((t0 % m) + m) % m) as u64
    }

    /// Exact division by p^v; the caller must know the residue is divisible.
    pub fn div_pow_p(&self, a: u64, v: u32) -> u64 {
        let d = self.p.pow(v);
        debug_assert_eq!(a % d, 0);
        a / d
    }

    /// Reinterpret at a smaller exponent (used after extracting p^v from a system).
    pub fn shrink(&self, v: u32) -> ModRing {
        ModRing::new(self.p, self.e - v).expect("shrunk modulus fits")
    }
}

/// Dense matrix over a `ModRing`, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mat {
    pub ring: ModRing,
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<u64>,
}

impl Mat {
    pub fn zero(ring: ModRing, rows: usize, cols: usize) -> Mat {
        Mat { ring, rows, cols, data: vec![0; rows * cols] }
    }

    pub fn identity(ring: ModRing, n: usize) -> Mat {
        let mut m = Mat::zero(ring, n, n);
        for i in 0..n {
            m.data[i * n + i] = 1 % ring.modulus;
        }
        m
    }

    pub fn from_rows(ring: ModRing, rows: Vec<Vec<u64>>) -> Mat {
        let r = rows.len();
        let c = rows.first().map(|v| v.len()).unwrap_or(0);
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c);
            data.extend(row.into_iter().map(|x| x % ring.modulus));
        }
        Mat { ring, rows: r, cols: c, data }
    }

    pub fn from_cols(ring: ModRing, cols: Vec<Vec<u64>>) -> Mat {
        let c = cols.len();
        let r = cols.first().map(|v| v.len()).unwrap_or(0);
        let mut m = Mat::zero(ring, r, c);
        for (j, col) in cols.iter().enumerate() {
            assert_eq!(col.len(), r);
            for i in 0..r {
                m.data[i * c + j] = col[i] % ring.modulus;
            }
        }
        m
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> u64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: u64) {
        self.data[i * self.cols + j] = v % self.ring.modulus;
    }

    pub fn col(&self, j: usize) -> Vec<u64> {
        (0..self.rows).map(|i| self.at(i, j)).collect()
    }

    pub fn mul_vec(&self, v: &[u64]) -> Vec<u64> {
        assert_eq!(v.len(), self.cols);
        let mut out = vec![0u64; self.rows];
        for i in 0..self.rows {
            let mut acc = 0u64;
            for j in 0..self.cols {
                acc = self.ring.add(acc, self.ring.mul(self.at(i, j), v[j]));
            }
            out[i] = acc;
        }
        out
    }

    pub fn matmul(&self, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.rows);
        let mut out = Mat::zero(self.ring, self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.at(i, k);
                if a == 0 {
                    continue;
                }
                for j in 0..other.cols {
                    let v = self.ring.add(out.at(i, j), self.ring.mul(a, other.at(k, j)));
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    /// Rank of the reduction mod p, over F_p.
    pub fn rank_mod_p(&self) -> usize {
        let p = self.ring.p;
        let mut a: Vec<Vec<u64>> = (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.at(i, j) % p).collect())
            .collect();
        let mut rank = 0;
        for col in 0..self.cols {
            let piv = (rank..self.rows).find(|&i| a[i][col] != 0);
            let Some(piv) = piv else { continue };
            a.swap(rank, piv);
            let inv = mod_inv_prime(a[rank][col], p);
            for j in col..self.cols {
                a[rank][j] = a[rank][j] * inv % p;
            }
            for i in 0..self.rows {
                if i != rank && a[i][col] != 0 {
                    let f = a[i][col];
                    for j in col..self.cols {
                        let sub = f * a[rank][j] % p;
                        a[i][j] = (a[i][j] + p - sub) % p;
                    }
                }
            }
            rank += 1;
            if rank == self.rows {
                break;
            }
        }
        rank
    }
}

fn mod_inv_prime(a: u64, p: u64) -> u64 {
    // Fermat; p is prime and small.
    let mut base = a % p;
    let mut exp = p - 2;
    let mut acc = 1u64;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % p;
        }
        base = base * base % p;
        exp >>= 1;
    }
    acc
}

/// Smith decomposition over Z/p^e: u * a * v = diag(p^d1, ..) with u, v
/// invertible. Diagonal entries are recorded by their valuations; a zero
/// diagonal entry is recorded as e.
pub struct Smith {
    pub u: Mat,
    pub v: Mat,
    pub diag: Vec<u32>,
}

pub fn smith(a: &Mat) -> Smith {
    let ring = a.ring;
    let mut m = a.clone();
    let mut u = Mat::identity(ring, a.rows);
    let mut v = Mat::identity(ring, a.cols);
    let k = a.rows.min(a.cols);
    let mut diag = vec![ring.e; k];

    for step in 0..k {
        // locate the remaining entry of minimal valuation
        let mut best: Option<(u32, usize, usize)> = None;
        for i in step..m.rows {
            for j in step..m.cols {
                let x = m.at(i, j);
                if x == 0 {
                    continue;
                }
                let val = ring.vp(x);
                if best.map_or(true, |(bv, _, _)| val < bv) {
                    best = Some((val, i, j));
                    if val == 0 {
                        break;
                    }
                }
            }
            if matches!(best, Some((0, _, _))) {
                break;
            }
        }
        let Some((val, pi, pj)) = best else { break };
        swap_rows(&mut m, step, pi);
        swap_rows(&mut u, step, pi);
        swap_cols(&mut m, step, pj);
        swap_cols(&mut v, step, pj);

        // normalize pivot to exactly p^val
        let pivot = m.at(step, step);
        let unit = ring.div_pow_p(pivot, val);
        let unit_inv = ring.inv(unit);
        scale_row(&mut m, step, unit_inv);
        scale_row(&mut u, step, unit_inv);
        let pv = ring.p.pow(val);

        // clear the pivot column and row; entries have valuation >= val
        for i in 0..m.rows {
            if i == step {
                continue;
            }
            let x = m.at(i, step);
            if x == 0 {
                continue;
            }
            let f = x / pv;
            row_axpy(&mut m, i, step, ring.neg(f));
            row_axpy(&mut u, i, step, ring.neg(f));
        }
        for j in 0..m.cols {
            if j == step {
                continue;
            }
            let x = m.at(step, j);
            if x == 0 {
                continue;
            }
            let f = x / pv;
            col_axpy(&mut m, j, step, ring.neg(f));
            col_axpy(&mut v, j, step, ring.neg(f));
        }
        diag[step] = val;
    }
    Smith { u, v, diag }
}

fn swap_rows(m: &mut Mat, a: usize, b: usize) {
    if a == b {
        return;
    }
    for j in 0..m.cols {
        let x = m.at(a, j);
        let y = m.at(b, j);
        m.set(a, j, y);
        m.set(b, j, x);
    }
}

fn swap_cols(m: &mut Mat, a: usize, b: usize) {
    if a == b {
        return;
    }
    for i in 0..m.rows {
        let x = m.at(i, a);
        let y = m.at(i, b);
        m.set(i, a, y);
        m.set(i, b, x);
    }
}

fn scale_row(m: &mut Mat, i: usize, c: u64) {
    for j in 0..m.cols {
        let v = m.ring.mul(m.at(i, j), c);
        m.set(i, j, v);
    }
}

/// row_i += c * row_src
fn row_axpy(m: &mut Mat, i: usize, src: usize, c: u64) {
    for j in 0..m.cols {
        let v = m.ring.add(m.at(i, j), m.ring.mul(c, m.at(src, j)));
        m.set(i, j, v);
    }
}

/// col_j += c * col_src
fn col_axpy(m: &mut Mat, j: usize, src: usize, c: u64) {
    for i in 0..m.rows {
        let v = m.ring.add(m.at(i, j), m.ring.mul(c, m.at(i, src)));
        m.set(i, j, v);
    }
}

/// Deterministic solution of a*x = b over Z/p^e, together with the largest
/// p-power divided through while back-substituting. Free coordinates are 0.
pub fn solve(a: &Mat, b: &[u64]) -> Option<(Vec<u64>, u32)> {
    let ring = a.ring;
    let s = smith(a);
    let c = s.u.mul_vec(b);
    let mut y = vec![0u64; a.cols];
    let mut drop = 0u32;
    for i in 0..a.rows {
        let rhs = c[i];
        if i >= s.diag.len() || s.diag[i] >= ring.e {
            // zero diagonal entry: equation must be trivial
            if rhs != 0 {
                return None;
            }
            continue;
        }
        let d = s.diag[i];
        if ring.vp(rhs) < d {
            return None;
        }
        if rhs != 0 && d > 0 {
            drop = drop.max(d);
        }
        y[i] = ring.div_pow_p(rhs, d);
    }
    Some((s.v.mul_vec(&y), drop))
}

/// Generators of the kernel of a over Z/p^e.
pub fn kernel(a: &Mat) -> Vec<Vec<u64>> {
    let ring = a.ring;
    let s = smith(a);
    let mut gens = Vec::new();
    for j in 0..a.cols {
        let d = if j < s.diag.len() { s.diag[j] } else { ring.e };
        if d == 0 {
            continue;
        }
        // diag entry p^d kills p^(e-d) * e_j
        let scale = ring.p.pow(ring.e - d) % ring.modulus;
        let mut col = s.v.col(j);
        for x in col.iter_mut() {
            *x = ring.mul(*x, scale);
        }
        if col.iter().any(|&x| x != 0) {
            gens.push(col);
        }
    }
    gens
}

/// Echelon (Howell-style) basis for the row span of `rows` over Z/p^e:
/// at most one pivot per column, pivot entries normalized to p^v, and the
/// annihilator shadows p^(e-v)*row inserted so that greedy left-to-right
/// reduction decides membership.
pub struct Span {
    pub ring: ModRing,
    pub width: usize,
    /// pivot column -> (pivot valuation, row).
    pub pivots: std::collections::BTreeMap<usize, (u32, Vec<u64>)>,
}

impl Span {
    pub fn new(ring: ModRing, width: usize, gens: Vec<Vec<u64>>) -> Span {
        let mut span = Span { ring, width, pivots: std::collections::BTreeMap::new() };
        let mut queue: Vec<Vec<u64>> = gens;
        while let Some(g) = queue.pop() {
            span.insert(g, &mut queue);
        }
        span
    }

    /// Worklist insertion: reduce left to right; on a column where the
    /// vector has strictly smaller valuation than the incumbent pivot, swap
    /// and requeue the incumbent.
    fn insert(&mut self, mut g: Vec<u64>, queue: &mut Vec<Vec<u64>>) {
        let ring = self.ring;
        let mut col = 0;
        while col < self.width {
            if g[col] % ring.modulus == 0 {
                g[col] = 0;
                col += 1;
                continue;
            }
            let gval = ring.vp(g[col]);
            let reducible = matches!(self.pivots.get(&col), Some((pval, _)) if *pval <= gval);
            if reducible {
                let (pval, prow) = self.pivots.get(&col).expect("pivot present");
                let f = ring.neg(g[col] / ring.p.pow(*pval));
                for (a, b) in g.iter_mut().zip(prow.iter()) {
                    *a = ring.add(*a, ring.mul(f, *b));
                }
                debug_assert_eq!(g[col], 0);
                col += 1;
                continue;
            }
            // normalize g to pivot exactly p^gval at this column
            let unit = ring.div_pow_p(g[col], gval);
            let unit_inv = ring.inv(unit);
            for x in g.iter_mut() {
                *x = ring.mul(*x, unit_inv);
            }
            if gval > 0 {
                let scale = ring.p.pow(ring.e - gval) % ring.modulus;
                let shadow: Vec<u64> = g.iter().map(|&x| ring.mul(x, scale)).collect();
                if shadow.iter().any(|&x| x != 0) {
                    queue.push(shadow);
                }
            }
            if let Some((_, old)) = self.pivots.insert(col, (gval, g)) {
                queue.push(old);
            }
            return;
        }
    }

    fn reduce_in_place(&self, g: &mut [u64]) {
        let ring = self.ring;
        for (col, (v, row)) in &self.pivots {
            let x = g[*col];
            if x == 0 || ring.vp(x) < *v {
                continue;
            }
            let f = ring.neg(x / ring.p.pow(*v));
            for (a, b) in g.iter_mut().zip(row.iter()) {
                *a = ring.add(*a, ring.mul(f, *b));
            }
        }
    }

    pub fn contains(&self, v: &[u64]) -> bool {
        assert_eq!(v.len(), self.width);
        let mut g = v.to_vec();
        self.reduce_in_place(&mut g);
        g.iter().all(|&x| x == 0)
    }

    pub fn contains_all(&self, vs: &[Vec<u64>]) -> bool {
        vs.iter().all(|v| self.contains(v))
    }

    /// Span equality via mutual containment.
    pub fn equals(&self, other: &Span) -> bool {
        self.pivots.values().all(|(_, r)| other.contains(r))
            && other.pivots.values().all(|(_, r)| self.contains(r))
    }
}

/// Generators of {x : a*x lies in the span of the columns of s}.
pub fn kernel_mod_span(a: &Mat, s: &Mat) -> Vec<Vec<u64>> {
    assert_eq!(a.rows, s.rows);
    let ring = a.ring;
    let mut block = Mat::zero(ring, a.rows, a.cols + s.cols);
    for i in 0..a.rows {
        for j in 0..a.cols {
            block.set(i, j, a.at(i, j));
        }
        for j in 0..s.cols {
            block.set(i, a.cols + j, s.at(i, j));
        }
    }
    kernel(&block)
        .into_iter()
        .map(|v| v[..a.cols].to_vec())
        .filter(|v| v.iter().any(|&x| x != 0))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring() -> ModRing {
        ModRing::new(2, 4).unwrap() // Z/16
    }

    #[test]
    fn solve_scalar_division() {
        let r = ring();
        let a = Mat::from_rows(r, vec![vec![2]]);
        let (x, drop) = solve(&a, &[12]).unwrap();
        assert_eq!(x, vec![6]);
        assert_eq!(drop, 1);
    }

    #[test]
    fn solve_inconsistent() {
        let r = ring();
        let a = Mat::from_rows(r, vec![vec![2]]);
        assert!(solve(&a, &[7]).is_none());
    }

    #[test]
    fn kernel_of_multiplication_by_p() {
        let r = ring();
        let a = Mat::from_rows(r, vec![vec![2]]);
        let k = kernel(&a);
        assert_eq!(k, vec![vec![8]]);
    }

    #[test]
    fn span_membership_with_shadows() {
        let r = ring();
        // span of (2, 1) in (Z/16)^2 contains 8*(2,1) = (0,8)
        let s = Span::new(r, 2, vec![vec![2, 1]]);
        assert!(s.contains(&[2, 1]));
        assert!(s.contains(&[0, 0]));
        assert!(s.contains(&[4, 2]));
        assert!(!s.contains(&[1, 0]));
    }

    #[test]
    fn span_shadow_rows_capture_annihilators() {
        let r = ring();
        // span of (2, 0) and (0, 4): contains (8,0)? yes: 4*(2,0)
        let s = Span::new(r, 2, vec![vec![2, 0], vec![0, 4]]);
        assert!(s.contains(&[8, 0]));
        assert!(s.contains(&[2, 4]));
        assert!(!s.contains(&[2, 2]));
    }

    #[test]
    fn smith_diag_sorted() {
        let r = ring();
        let a = Mat::from_rows(r, vec![vec![4, 2], vec![2, 3]]);
        let s = smith(&a);
        // first pivot is a unit (entry 3)
        assert_eq!(s.diag[0], 0);
        let d = Mat::zero(r, 2, 2);
        let mut expect = d.clone();
        expect.set(0, 0, r.p.pow(s.diag[0]));
        expect.set(1, 1, if s.diag[1] >= r.e { 0 } else { r.p.pow(s.diag[1]) });
        let prod = s.u.matmul(&a).matmul(&s.v);
        assert_eq!(prod, expect);
    }
}
