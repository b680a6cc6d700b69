//! Low-degree complex over a finite abelian group G with explicit
//! differentials d1[x,y] = -[x]+[x+y]-[y] and d2 given by the symmetrizer
//! [x,y]-[y,x] together with [x,y,z] -> -[y,z]+[x+y,z]-[x,y+z]+[x,y],
//! brute-force Ext computation in degrees 0 and 1, and the primitive
//! element check in exterior algebras.

use crate::error::{Error, Result};
use crate::linalg::{self, Mat, ModRing};
use serde::Serialize;

/// Finite abelian group as a product of cyclic groups.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteAbelianGroup {
    pub orders: Vec<u64>,
}

impl FiniteAbelianGroup {
    pub fn new(orders: Vec<u64>) -> Result<FiniteAbelianGroup> {
        if orders.iter().any(|&d| d < 2) {
            return Err(Error::BadInput("cyclic orders must be >= 2".into()));
        }
        Ok(FiniteAbelianGroup { orders })
    }

    pub fn size(&self) -> u64 {
        self.orders.iter().product()
    }

    /// Elements in mixed-radix order.
    pub fn index_of(&self, el: &[u64]) -> usize {
        let mut idx = 0usize;
        for (k, &d) in self.orders.iter().enumerate() {
            idx = idx * d as usize + (el[k] % d) as usize;
        }
        idx
    }

    pub fn element(&self, mut idx: usize) -> Vec<u64> {
        let mut el = vec![0u64; self.orders.len()];
        for k in (0..self.orders.len()).rev() {
            let d = self.orders[k] as usize;
            el[k] = (idx % d) as u64;
            idx /= d;
        }
        el
    }

    pub fn add(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        a.iter()
            .zip(b)
            .zip(&self.orders)
            .map(|((x, y), d)| (x + y) % d)
            .collect()
    }
}

/// Total function table G^k -> Z/m.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cochain {
    pub group: FiniteAbelianGroup,
    pub arity: u32,
    pub modulus: u64,
    pub table: Vec<u64>,
}

impl Cochain {
    pub fn zero(group: FiniteAbelianGroup, arity: u32, modulus: u64) -> Cochain {
        let size = (group.size() as usize).pow(arity);
        Cochain { group, arity, modulus, table: vec![0; size] }
    }

    pub fn get(&self, args: &[&[u64]]) -> u64 {
        assert_eq!(args.len(), self.arity as usize);
        let g = self.group.size() as usize;
        let mut idx = 0usize;
        for a in args {
            idx = idx * g + self.group.index_of(a);
        }
        self.table[idx]
    }

    pub fn set(&mut self, args: &[&[u64]], v: u64) {
        let g = self.group.size() as usize;
        let mut idx = 0usize;
        for a in args {
            idx = idx * g + self.group.index_of(a);
        }
        self.table[idx] = v % self.modulus;
    }

    pub fn is_zero(&self) -> bool {
        self.table.iter().all(|&x| x == 0)
    }
}

/// (d1 f)(x, y) = -f(x) + f(x+y) - f(y).
pub fn bd_d1(f: &Cochain) -> Cochain {
    assert_eq!(f.arity, 1);
    let g = &f.group;
    let m = f.modulus;
    let size = g.size() as usize;
    let mut out = Cochain::zero(g.clone(), 2, m);
    for xi in 0..size {
        let x = g.element(xi);
        for yi in 0..size {
            let y = g.element(yi);
            let s = g.add(&x, &y);
            let v = (f.get(&[&s]) + 2 * m - f.get(&[&x]) - f.get(&[&y])) % m;
            out.set(&[&x, &y], v);
        }
    }
    out
}

/// d2 of a 2-cochain: the pair (symmetrizer, 3-term coboundary).
pub fn bd_d2(g2: &Cochain) -> (Cochain, Cochain) {
    assert_eq!(g2.arity, 2);
    let g = &g2.group;
    let m = g2.modulus;
    let size = g.size() as usize;

    let mut sym = Cochain::zero(g.clone(), 2, m);
    for xi in 0..size {
        let x = g.element(xi);
        for yi in 0..size {
            let y = g.element(yi);
            let v = (g2.get(&[&x, &y]) + m - g2.get(&[&y, &x])) % m;
            sym.set(&[&x, &y], v);
        }
    }

    let mut cob = Cochain::zero(g.clone(), 3, m);
    for xi in 0..size {
        let x = g.element(xi);
        for yi in 0..size {
            let y = g.element(yi);
            let xy = g.add(&x, &y);
            for zi in 0..size {
                let z = g.element(zi);
                let yz = g.add(&y, &z);
                let v = (g2.get(&[&xy, &z]) + g2.get(&[&x, &y]) + 2 * m
                    - g2.get(&[&y, &z])
                    - g2.get(&[&x, &yz]))
                    % m;
                cob.set(&[&x, &y, &z], v);
            }
        }
    }
    (sym, cob)
}

/// Integer matrix of d1: C^0 = Maps(G, Z) -> C^1 = Maps(G^2, Z).
fn d1_matrix(g: &FiniteAbelianGroup, ring: ModRing) -> Mat {
    let size = g.size() as usize;
    let mut m = Mat::zero(ring, size * size, size);
    for xi in 0..size {
        let x = g.element(xi);
        for yi in 0..size {
            let y = g.element(yi);
            let row = xi * size + yi;
            let si = g.index_of(&g.add(&x, &y));
            let bump = |mat: &mut Mat, col: usize, delta_neg: bool| {
                let cur = mat.at(row, col);
                let v = if delta_neg { ring.sub(cur, 1) } else { ring.add(cur, 1) };
                mat.set(row, col, v);
            };
            bump(&mut m, si, false);
            bump(&mut m, xi, true);
            bump(&mut m, yi, true);
        }
    }
    m
}

/// Integer matrix of d2: C^1 -> Maps(G^2, Z) + Maps(G^3, Z).
fn d2_matrix(g: &FiniteAbelianGroup, ring: ModRing) -> Mat {
    let size = g.size() as usize;
    let s2 = size * size;
    let s3 = s2 * size;
    let mut m = Mat::zero(ring, s2 + s3, s2);
    for xi in 0..size {
        for yi in 0..size {
            let row = xi * size + yi;
            let xy = xi * size + yi;
            let yx = yi * size + xi;
            let v = ring.add(m.at(row, xy), 1);
            m.set(row, xy, v);
            let v = ring.sub(m.at(row, yx), 1);
            m.set(row, yx, v);
        }
    }
    for xi in 0..size {
        let x = g.element(xi);
        for yi in 0..size {
            let y = g.element(yi);
            let xyi = g.index_of(&g.add(&x, &y));
            for zi in 0..size {
                let z = g.element(zi);
                let yzi = g.index_of(&g.add(&y, &z));
                let row = s2 + (xi * size + yi) * size + zi;
                let mut bump = |col: usize, neg: bool| {
                    let cur = m.at(row, col);
                    let v = if neg { ring.sub(cur, 1) } else { ring.add(cur, 1) };
                    m.set(row, col, v);
                };
                bump(yi * size + zi, true);
                bump(xyi * size + zi, false);
                bump(xi * size + yzi, true);
                bump(xi * size + yi, false);
            }
        }
    }
    m
}

/// Invariant factors of ker(a mod p^e) as an abelian group.
fn kernel_factors(a: &Mat) -> Vec<u64> {
    let ring = a.ring;
    let s = linalg::smith(a);
    let mut out = Vec::new();
    for j in 0..a.cols {
        let d = if j < s.diag.len() { s.diag[j] } else { ring.e };
        // w_j ranges over p^(e-d) R = Z/p^d
        if d >= 1 {
            out.push(ring.p.pow(d.min(ring.e)));
        }
    }
    out.sort_unstable();
    out.reverse();
    out
}

/// Invariant factors of ker(d2)/im(d1) over Z/p^e.
fn homology_factors(d1: &Mat, d2: &Mat) -> Vec<u64> {
    let ring = d1.ring;
    let s = linalg::smith(d2);
    // kernel coords: w = V^(-1) v with w_j in p^(e - a_j) R
    let b: Vec<u32> = (0..d2.cols)
        .map(|j| {
            let a = if j < s.diag.len() { s.diag[j] } else { ring.e };
            ring.e - a
        })
        .collect();
    // express im(d1) in kernel coordinates: z = diag(p^-b) V^(-1) d1
    let vinv = invert_unimodular(&s.v);
    let w = vinv.matmul(d1);
    let mut z = Mat::zero(ring, d2.cols, d1.cols);
    for i in 0..d2.cols {
        for j in 0..d1.cols {
            let x = w.at(i, j);
            if b[i] == 0 {
                z.set(i, j, x);
            } else {
                debug_assert!(ring.vp(x) >= b[i], "image not inside kernel");
                z.set(i, j, ring.div_pow_p(x, b[i]));
            }
        }
    }
    // quotient of (+) Z/p^(a_i) by the columns of z
    let mut stacked = Mat::zero(ring, d2.cols, d1.cols + d2.cols);
    for i in 0..d2.cols {
        for j in 0..d1.cols {
            stacked.set(i, j, z.at(i, j));
        }
        let a = ring.e - b[i];
        let diag = if a >= ring.e { 0 } else { ring.p.pow(a) % ring.modulus };
        stacked.set(i, d1.cols + i, diag);
    }
    let sq = linalg::smith(&stacked);
    let mut out = Vec::new();
    for (i, &c) in sq.diag.iter().enumerate() {
        let _ = i;
        if c >= 1 {
            out.push(ring.p.pow(c.min(ring.e)));
        }
    }
    // columns beyond the diagonal contribute full Z/p^e summands
    for _ in sq.diag.len()..d2.cols {
        out.push(ring.modulus);
    }
    out.retain(|&x| x > 1);
    out.sort_unstable();
    out.reverse();
    out
}

fn invert_unimodular(v: &Mat) -> Mat {
    // v is a product of elementary operations over Z/p^e, hence invertible
    // with unit pivots available
    let ring = v.ring;
    let n = v.rows;
    let mut a = v.clone();
    let mut inv = Mat::identity(ring, n);
    for col in 0..n {
        let piv = (col..n)
            .find(|&i| ring.is_unit(a.at(i, col)))
            .expect("unimodular matrix");
        if piv != col {
            for j in 0..n {
                let x = a.at(piv, j);
                let y = a.at(col, j);
                a.set(piv, j, y);
                a.set(col, j, x);
                let x = inv.at(piv, j);
                let y = inv.at(col, j);
                inv.set(piv, j, y);
                inv.set(col, j, x);
            }
        }
        let pinv = ring.inv(a.at(col, col));
        for j in 0..n {
            a.set(col, j, ring.mul(a.at(col, j), pinv));
            inv.set(col, j, ring.mul(inv.at(col, j), pinv));
        }
        for i in 0..n {
            if i == col || a.at(i, col) == 0 {
                continue;
            }
            let f = a.at(i, col);
            for j in 0..n {
                let t = ring.mul(f, a.at(col, j));
                a.set(i, j, ring.sub(a.at(i, j), t));
                let t = ring.mul(f, inv.at(col, j));
                inv.set(i, j, ring.sub(inv.at(i, j), t));
            }
        }
    }
    inv
}

fn factorize(mut m: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= m {
        if m % p == 0 {
            let mut e = 0;
            while m % p == 0 {
                m /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += 1;
    }
    if m > 1 {
        out.push((m, 1));
    }
    out
}

/// H^0 and H^1 of the dualized complex with coefficients Z/m, as invariant
/// factor lists (largest first).
#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct ExtGroups {
    pub h0: Vec<u64>,
    pub h1: Vec<u64>,
}

pub fn ext_groups(g: &FiniteAbelianGroup, m: u64) -> Result<ExtGroups> {
    if m < 1 {
        return Err(Error::BadInput("coefficient modulus must be >= 1".into()));
    }
    let size = g.size();
    if size * size * m > 1_000_000 || size * size * size > 1_000_000 {
        return Err(Error::TooLarge);
    }
    // CRT over the prime powers of m; aligned factors multiply back
    let mut h0_parts: Vec<Vec<u64>> = Vec::new();
    let mut h1_parts: Vec<Vec<u64>> = Vec::new();
    for (p, e) in factorize(m) {
        let ring = ModRing::new(p, e).ok_or(Error::TooLarge)?;
        let d1 = d1_matrix(g, ring);
        let d2 = d2_matrix(g, ring);
        h0_parts.push(kernel_factors(&d1));
        h1_parts.push(homology_factors(&d1, &d2));
    }
    Ok(ExtGroups { h0: crt_merge(h0_parts), h1: crt_merge(h1_parts) })
}

fn crt_merge(parts: Vec<Vec<u64>>) -> Vec<u64> {
    let len = parts.iter().map(|v| v.len()).max().unwrap_or(0);
    let mut out = Vec::new();
    for i in 0..len {
        let mut f = 1u64;
        for part in &parts {
            if i < part.len() {
                f *= part[i];
            }
        }
        if f > 1 {
            out.push(f);
        }
    }
    out
}

/// Exterior algebra over F_p of rank r: basis indexed by subsets of
/// {0..r-1} as bitmasks.
struct ExteriorAlgebra {
    r: u32,
    p: u64,
}

impl ExteriorAlgebra {
    fn dim(&self) -> usize {
        1usize << self.r
    }

    /// Wedge of basis elements with the shuffle sign; None if they collide.
    fn wedge(&self, a: u32, b: u32) -> Option<(i32, u32)> {
        if a & b != 0 {
            return None;
        }
        // count transpositions: for each bit of b, the bits of a above it
        let mut sign = 0u32;
        for i in 0..self.r {
            if b & (1 << i) != 0 {
                sign += (a >> (i + 1)).count_ones();
            }
        }
        Some((if sign % 2 == 0 { 1 } else { -1 }, a | b))
    }

    /// Comultiplication of a basis subset into the tensor square:
    /// product over i in S of (e_i (x) 1 + 1 (x) e_i).
    fn comultiply(&self, s: u32) -> Vec<((u32, u32), u64)> {
        let mut acc: Vec<((u32, u32), i64)> = vec![((0, 0), 1)];
        for i in 0..self.r {
            if s & (1 << i) == 0 {
                continue;
            }
            let mut next = Vec::new();
            for &((l, r0), c) in &acc {
                if let Some((sg, l2)) = self.wedge(l, 1 << i) {
                    next.push(((l2, r0), c * sg as i64));
                }
                // 1 (x) e_i must move past the left factor l: sign (-1)^|l|
                let pass = if l.count_ones() % 2 == 0 { 1 } else { -1 };
                if let Some((sg, r2)) = self.wedge(r0, 1 << i) {
                    next.push(((l, r2), c * (sg * pass) as i64));
                }
            }
            // merge duplicates
            next.sort_by_key(|(k, _)| *k);
            let mut merged: Vec<((u32, u32), i64)> = Vec::new();
            for (k, c) in next {
                match merged.last_mut() {
                    Some((k2, c2)) if *k2 == k => *c2 += c,
                    _ => merged.push((k, c)),
                }
            }
            acc = merged;
        }
        let p = self.p as i64;
        acc.into_iter()
            .filter_map(|(k, c)| {
                let c = ((c % p) + p) % p;
                if c == 0 {
                    None
                } else {
                    Some((k, c as u64))
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PrimitiveReport {
    pub rank: u32,
    pub p: u64,
    pub dimension: u32,
    /// basis of the primitive subspace, as coefficient vectors over the
    /// subset basis
    pub basis: Vec<Vec<u64>>,
    /// primitives coincide with the degree-1 part
    pub equals_degree_one: bool,
}

/// Enumerate {x : mu*(x) = 1 (x) x + x (x) 1} in the exterior algebra of
/// F_p^r and compare with the degree-1 part.
pub fn primitive_elements(r: u32, p: u64) -> Result<PrimitiveReport> {
    if r > 3 || p > 3 {
        return Err(Error::TooLarge);
    }
    let alg = ExteriorAlgebra { r, p };
    let dim = alg.dim();
    let total = (p as u128).pow(dim as u32);
    if total > 1 << 20 {
        return Err(Error::TooLarge);
    }
    // precompute comultiplication of each basis subset
    let comults: Vec<Vec<((u32, u32), u64)>> =
        (0..dim as u32).map(|s| alg.comultiply(s)).collect();

    let mut primitives = Vec::new();
    for code in 0..total {
        // x = sum over subsets of c_s e_S
        let mut c = vec![0u64; dim];
        let mut k = code;
        for slot in c.iter_mut() {
            *slot = (k % p as u128) as u64;
            k /= p as u128;
        }
        if c.iter().all(|&x| x == 0) {
            continue;
        }
        // mu*(x) - 1 (x) x - x (x) 1 over the tensor basis
        let mut delta: std::collections::BTreeMap<(u32, u32), i64> =
            std::collections::BTreeMap::new();
        for (s, &coeff) in c.iter().enumerate() {
            if coeff == 0 {
                continue;
            }
            for &((l, r0), v) in &comults[s] {
                *delta.entry((l, r0)).or_insert(0) += (coeff * v) as i64;
            }
            *delta.entry((0, s as u32)).or_insert(0) -= coeff as i64;
            *delta.entry((s as u32, 0)).or_insert(0) -= coeff as i64;
        }
        let is_primitive = delta.values().all(|&v| v.rem_euclid(p as i64) == 0);
        if is_primitive {
            primitives.push(c);
        }
    }

    // expected: exactly the nonzero degree-1 combinations
    let count = primitives.len() as u64 + 1; // plus zero
    let dimension = {
        let mut d = 0u32;
        let mut n = count;
        while n > 1 {
            n /= p;
            d += 1;
        }
        d
    };
    let equals_degree_one = primitives.iter().all(|c| {
        c.iter()
            .enumerate()
            .all(|(s, &v)| v == 0 || (s as u32).count_ones() == 1)
    }) && count == p.pow(r);

    // basis: the singleton generators
    let basis: Vec<Vec<u64>> = (0..r)
        .map(|i| {
            let mut v = vec![0u64; dim];
            v[1 << i] = 1;
            v
        })
        .collect();

    Ok(PrimitiveReport { rank: r, p, dimension, basis, equals_degree_one })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z(n: u64) -> FiniteAbelianGroup {
        FiniteAbelianGroup::new(vec![n]).unwrap()
    }

    #[test]
    fn d1_of_homomorphism_vanishes() {
        let g = z(4);
        let m = 4;
        // f(x) = 3x is a homomorphism Z/4 -> Z/4
        let mut f = Cochain::zero(g.clone(), 1, m);
        for x in 0..4u64 {
            f.set(&[&[x]], 3 * x % m);
        }
        assert!(bd_d1(&f).is_zero());
    }

    #[test]
    fn d1_table_example() {
        // G = Z/2, A = Z/2, f = (0 -> 0, 1 -> 1): d1 f = 0
        let g = z(2);
        let mut f = Cochain::zero(g.clone(), 1, 2);
        f.set(&[&[1]], 1);
        let df = bd_d1(&f);
        assert_eq!(df.get(&[&[1], &[1]]), 0);
        assert_eq!(df.get(&[&[0], &[1]]), 0);
    }

    #[test]
    fn d2_after_d1_is_zero() {
        for (orders, m) in [(vec![2], 2u64), (vec![3], 3), (vec![2, 2], 4), (vec![4], 2)] {
            let g = FiniteAbelianGroup::new(orders).unwrap();
            let size = g.size() as usize;
            // a few deterministic 1-cochains
            for seed in 0..5u64 {
                let mut f = Cochain::zero(g.clone(), 1, m);
                for xi in 0..size {
                    let x = g.element(xi);
                    f.set(&[&x], (seed.wrapping_mul(xi as u64 + 3) * 7 + xi as u64) % m);
                }
                let (sym, cob) = bd_d2(&bd_d1(&f));
                assert!(sym.is_zero());
                assert!(cob.is_zero());
            }
        }
    }

    #[test]
    fn d2_of_product_cocycle() {
        // G = Z/2, A = Z/2, g(x,y) = xy: both components vanish
        let g = z(2);
        let mut c = Cochain::zero(g.clone(), 2, 2);
        c.set(&[&[1], &[1]], 1);
        let (sym, cob) = bd_d2(&c);
        assert!(sym.is_zero());
        assert_eq!(cob.get(&[&[1], &[1], &[1]]), 0);
        assert!(cob.is_zero());
    }

    #[test]
    fn ext_of_cyclic_groups() {
        // gcd oracle: Ext^1(Z/a, Z/b) = Z/gcd(a,b), Hom likewise
        let cases = [
            (2u64, 2u64, vec![2u64]),
            (2, 3, vec![]),
            (4, 2, vec![2]),
            (2, 4, vec![2]),
            (3, 9, vec![3]),
            (9, 3, vec![3]),
            (4, 4, vec![4]),
            (4, 6, vec![2]),
        ];
        for (a, b, expect) in cases {
            let e = ext_groups(&z(a), b).unwrap();
            assert_eq!(e.h0, expect, "H0 for ({}, {})", a, b);
            assert_eq!(e.h1, expect, "H1 for ({}, {})", a, b);
        }
    }

    #[test]
    fn ext_of_product_group() {
        // Hom(Z/2 x Z/2, Z/2) = (Z/2)^2 and Ext^1 likewise
        let g = FiniteAbelianGroup::new(vec![2, 2]).unwrap();
        let e = ext_groups(&g, 2).unwrap();
        assert_eq!(e.h0, vec![2, 2]);
        assert_eq!(e.h1, vec![2, 2]);
    }

    #[test]
    fn too_large_guard() {
        let g = z(1009);
        assert_eq!(ext_groups(&g, 1000).unwrap_err(), Error::TooLarge);
    }

    #[test]
    fn primitives_are_degree_one() {
        for p in [2u64, 3] {
            for r in 1..=3u32 {
                let rep = primitive_elements(r, p).unwrap();
                assert_eq!(rep.dimension, r, "p={} r={}", p, r);
                assert!(rep.equals_degree_one, "p={} r={}", p, r);
            }
        }
    }

    #[test]
    fn wedge_square_is_not_primitive() {
        // e1 ^ e2 has the cross terms e1 (x) e2 - e2 (x) e1
        let alg = ExteriorAlgebra { r: 2, p: 2 };
        let co = alg.comultiply(0b11);
        let cross: Vec<_> = co
            .iter()
            .filter(|((l, r), _)| *l != 0 && *r != 0)
            .collect();
        assert_eq!(cross.len(), 2);
    }
}
