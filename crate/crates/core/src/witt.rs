//! Witt vectors with structure polynomials derived from ghost components,
//! delta-ring predicates, and the oriented prism catalog.

use crate::error::{Error, Result};
use crate::ring::{val, Element, Ring, Val};
use once_cell::sync::Lazy;
use serde::Serialize;
use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex};

/// Sparse integer polynomial in `nvars` variables. Coefficients are exact
/// integers; exponent vectors are dense.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntPoly {
    pub nvars: usize,
    pub terms: BTreeMap<Vec<u32>, i128>,
}

impl IntPoly {
    pub fn zero(nvars: usize) -> IntPoly {
        IntPoly { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: i128) -> IntPoly {
        let mut p = IntPoly::zero(nvars);
        if c != 0 {
            p.terms.insert(vec![0; nvars], c);
        }
        p
    }

    pub fn var(nvars: usize, i: usize) -> IntPoly {
        let mut e = vec![0u32; nvars];
        e[i] = 1;
        let mut p = IntPoly::zero(nvars);
        p.terms.insert(e, 1);
        p
    }

    pub fn add(&self, other: &IntPoly) -> IntPoly {
        assert_eq!(self.nvars, other.nvars);
        let mut terms = self.terms.clone();
        for (e, c) in &other.terms {
            let slot = terms.entry(e.clone()).or_insert(0);
            *slot += c;
        }
        terms.retain(|_, c| *c != 0);
        IntPoly { nvars: self.nvars, terms }
    }

    pub fn sub(&self, other: &IntPoly) -> IntPoly {
        self.add(&other.scale(-1))
    }

    pub fn scale(&self, k: i128) -> IntPoly {
        let terms = self.terms.iter().map(|(e, c)| (e.clone(), c * k)).collect();
        let mut p = IntPoly { nvars: self.nvars, terms };
        p.terms.retain(|_, c| *c != 0);
        p
    }

    pub fn mul(&self, other: &IntPoly) -> IntPoly {
        assert_eq!(self.nvars, other.nvars);
        let mut terms: BTreeMap<Vec<u32>, i128> = BTreeMap::new();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e: Vec<u32> = ea.iter().zip(eb.iter()).map(|(a, b)| a + b).collect();
                let slot = terms.entry(e).or_insert(0);
                *slot += ca * cb;
            }
        }
        terms.retain(|_, c| *c != 0);
        IntPoly { nvars: self.nvars, terms }
    }

    pub fn pow(&self, mut e: u64) -> IntPoly {
        let mut acc = IntPoly::constant(self.nvars, 1);
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Exact division by an integer; construction of structure polynomials
    /// guarantees divisibility, anything else is a bug.
    pub fn div_int(&self, k: i128) -> IntPoly {
        let terms = self
            .terms
            .iter()
            .map(|(e, c)| {
                assert_eq!(c % k, 0, "ghost recursion produced a non-integral coefficient");
                (e.clone(), c / k)
            })
            .collect();
        IntPoly { nvars: self.nvars, terms }
    }

    pub fn eval_ring(&self, args: &[Element], ring: &Ring) -> Element {
        assert_eq!(args.len(), self.nvars);
        // power tables per variable
        let mut max_exp = vec![0u32; self.nvars];
        for e in self.terms.keys() {
            for (i, &x) in e.iter().enumerate() {
                max_exp[i] = max_exp[i].max(x);
            }
        }
        let pows: Vec<Vec<Element>> = args
            .iter()
            .enumerate()
            .map(|(i, a)| {
                let mut v = vec![ring.one()];
                for _ in 0..max_exp[i] {
                    v.push(v.last().unwrap().mul(a).expect("same ring"));
                }
                v
            })
            .collect();
        let mut acc = ring.zero();
        let m = ring.modulus() as i128;
        for (e, c) in &self.terms {
            let r = (((*c % m) + m) % m) as u64;
            if r == 0 {
                continue;
            }
            let mut term = ring.from_int(r as i64);
            for (i, &x) in e.iter().enumerate() {
                if x > 0 {
                    term = term.mul(&pows[i][x as usize]).expect("same ring");
                }
            }
            acc = acc.add(&term).unwrap();
        }
        acc
    }

    pub fn eval_i128(&self, args: &[i128]) -> i128 {
        assert_eq!(args.len(), self.nvars);
        let mut acc = 0i128;
        for (e, c) in &self.terms {
            let mut t = *c;
            for (i, &x) in e.iter().enumerate() {
                for _ in 0..x {
                    t *= args[i];
                }
            }
            acc += t;
        }
        acc
    }

    /// Human-readable rendering with x0..,y0.. variable names.
    pub fn render(&self, names: &[String]) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut parts = Vec::new();
        for (e, c) in &self.terms {
            let mut factors = Vec::new();
            if *c != 1 || e.iter().all(|&x| x == 0) {
                factors.push(format!("{}", c));
            }
            for (i, &x) in e.iter().enumerate() {
                match x {
                    0 => {}
                    1 => factors.push(names[i].clone()),
                    _ => factors.push(format!("{}^{}", names[i], x)),
                }
            }
            parts.push(factors.join("*"));
        }
        parts.join(" + ")
    }
}

/// Ghost polynomial w_k(z_0..z_k) = sum p^i z_i^(p^(k-i)) in the given slots.
fn ghost_poly(nvars: usize, slots: &[usize], p: u64, k: usize) -> IntPoly {
    let mut acc = IntPoly::zero(nvars);
    for i in 0..=k {
        let pi = (p as i128).pow(i as u32);
        let term = IntPoly::var(nvars, slots[i]).pow(p.pow((k - i) as u32)).scale(pi);
        acc = acc.add(&term);
    }
    acc
}

/// Sum, product and Frobenius structure polynomials for length-n Witt
/// vectors at the prime p.
#[derive(Debug, Clone)]
pub struct WittPolys {
    pub p: u64,
    pub n: u32,
    /// S_0..S_(n-1) in variables x_0..x_(n-1), y_0..y_(n-1).
    pub sum: Vec<IntPoly>,
    /// P_0..P_(n-1), same variables.
    pub prod: Vec<IntPoly>,
    /// F_0..F_(n-2) in variables x_0..x_(n-1); w_k(F) = w_(k+1)(x).
    pub frob: Vec<IntPoly>,
}

pub const MAX_WITT_LEN: u32 = 5;

static POLY_CACHE: Lazy<Mutex<HashMap<(u64, u32), Arc<WittPolys>>>> =
    Lazy::new(|| Mutex::new(HashMap::new()));

/// Structure polynomials, computed once per (p, n) by solving the ghost
/// equations with exact integer division.
pub fn witt_structure_polys(p: u64, n: u32) -> Result<Arc<WittPolys>> {
    if n == 0 || n > MAX_WITT_LEN {
        return Err(Error::BadInput(format!("witt length must be in 1..={}", MAX_WITT_LEN)));
    }
    if let Some(hit) = POLY_CACHE.lock().unwrap().get(&(p, n)) {
        return Ok(hit.clone());
    }
    let nv = 2 * n as usize;
    let xs: Vec<usize> = (0..n as usize).collect();
    let ys: Vec<usize> = (n as usize..2 * n as usize).collect();

    let mut sum: Vec<IntPoly> = Vec::new();
    let mut prod: Vec<IntPoly> = Vec::new();
    for k in 0..n as usize {
        let wx = ghost_poly(nv, &xs, p, k);
        let wy = ghost_poly(nv, &ys, p, k);
        let pk = (p as i128).pow(k as u32);

        let mut target_s = wx.add(&wy);
        let mut target_p = wx.mul(&wy);
        for i in 0..k {
            let pi = (p as i128).pow(i as u32);
            let e = p.pow((k - i) as u32);
            target_s = target_s.sub(&sum[i].pow(e).scale(pi));
            target_p = target_p.sub(&prod[i].pow(e).scale(pi));
        }
        sum.push(target_s.div_int(pk));
        prod.push(target_p.div_int(pk));
    }

    // Frobenius: w_k(F_0..F_k) = w_(k+1)(x), in the x variables only.
    let nf = n as usize;
    let xslots: Vec<usize> = (0..nf).collect();
    let mut frob: Vec<IntPoly> = Vec::new();
    for k in 0..nf.saturating_sub(1) {
        let mut target = ghost_poly(nf, &xslots, p, k + 1);
        for i in 0..k {
            let pi = (p as i128).pow(i as u32);
            let e = p.pow((k - i) as u32);
            target = target.sub(&frob[i].pow(e).scale(pi));
        }
        let pk = (p as i128).pow(k as u32);
        frob.push(target.div_int(pk));
    }

    let polys = Arc::new(WittPolys { p, n, sum, prod, frob });
    POLY_CACHE.lock().unwrap().insert((p, n), polys.clone());
    Ok(polys)
}

#[derive(Debug, Clone, Serialize)]
pub struct WittPolysJson {
    pub p: u64,
    pub len: u32,
    pub sum: Vec<String>,
    pub prod: Vec<String>,
    pub frobenius: Vec<String>,
}

pub fn witt_polys_json(p: u64, n: u32) -> Result<WittPolysJson> {
    let polys = witt_structure_polys(p, n)?;
    let names2: Vec<String> = (0..n).map(|i| format!("x{}", i)).chain((0..n).map(|i| format!("y{}", i))).collect();
    let names1: Vec<String> = (0..n).map(|i| format!("x{}", i)).collect();
    Ok(WittPolysJson {
        p,
        len: n,
        sum: polys.sum.iter().map(|q| q.render(&names2)).collect(),
        prod: polys.prod.iter().map(|q| q.render(&names2)).collect(),
        frobenius: polys.frob.iter().map(|q| q.render(&names1)).collect(),
    })
}

/// Witt vector with components in a working ring.
#[derive(Debug, Clone, PartialEq)]
pub struct WittVector {
    pub ring: Ring,
    pub comps: Vec<Element>,
}

impl WittVector {
    pub fn new(ring: Ring, comps: Vec<Element>) -> Result<WittVector> {
        if comps.is_empty() || comps.len() > MAX_WITT_LEN as usize {
            return Err(Error::BadInput("witt vector length out of range".into()));
        }
        for c in &comps {
            if c.ring() != &ring {
                return Err(Error::RingMismatch);
            }
        }
        Ok(WittVector { ring, comps })
    }

    pub fn len(&self) -> usize {
        self.comps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.comps.is_empty()
    }

    pub fn ghost(&self) -> Vec<Element> {
        let p = self.ring.p();
        (0..self.len())
            .map(|k| {
                let mut acc = self.ring.zero();
                for i in 0..=k {
                    let term = self.comps[i].pow(p.pow((k - i) as u32) as u64);
                    acc = acc.add(&term.scale(p.pow(i as u32) as i64)).expect("same ring");
                }
                acc
            })
            .collect()
    }

    fn binary_op(&self, other: &WittVector, which: WittOp) -> Result<WittVector> {
        if self.ring != other.ring {
            return Err(Error::RingMismatch);
        }
        if self.len() != other.len() {
            return Err(Error::BadInput("witt length mismatch".into()));
        }
        let n = self.len() as u32;
        let polys = witt_structure_polys(self.ring.p(), n)?;
        let table = match which {
            WittOp::Add => &polys.sum,
            WittOp::Mul => &polys.prod,
        };
        let args: Vec<Element> =
            self.comps.iter().chain(other.comps.iter()).cloned().collect();
        let comps = table.iter().map(|q| q.eval_ring(&args, &self.ring)).collect();
        Ok(WittVector { ring: self.ring.clone(), comps })
    }

    pub fn add(&self, other: &WittVector) -> Result<WittVector> {
        self.binary_op(other, WittOp::Add)
    }

    pub fn mul(&self, other: &WittVector) -> Result<WittVector> {
        self.binary_op(other, WittOp::Mul)
    }

    /// Frobenius shortens by one level: ghost(F(x))_i = ghost(x)_(i+1).
    pub fn frobenius(&self) -> Result<WittVector> {
        if self.len() < 2 {
            return Err(Error::BadInput("frobenius needs length >= 2".into()));
        }
        let polys = witt_structure_polys(self.ring.p(), self.len() as u32)?;
        let comps = polys.frob.iter().map(|q| q.eval_ring(&self.comps, &self.ring)).collect();
        Ok(WittVector { ring: self.ring.clone(), comps })
    }

    /// Verschiebung (0, x_0, .., x_(n-2)) at fixed length.
    pub fn verschiebung(&self) -> WittVector {
        let mut comps = vec![self.ring.zero()];
        comps.extend(self.comps[..self.len() - 1].iter().cloned());
        WittVector { ring: self.ring.clone(), comps }
    }

    /// Multiplication by the integer p, i.e. p-fold sum.
    pub fn mul_int(&self, k: u64) -> Result<WittVector> {
        let zero = WittVector {
            ring: self.ring.clone(),
            comps: vec![self.ring.zero(); self.len()],
        };
        let mut acc = zero;
        for _ in 0..k {
            acc = acc.add(self)?;
        }
        Ok(acc)
    }

    pub fn truncate(&self, n: usize) -> WittVector {
        WittVector { ring: self.ring.clone(), comps: self.comps[..n].to_vec() }
    }
}

enum WittOp {
    Add,
    Mul,
}

/// A working ring together with its canonical Frobenius lift and the
/// derived delta operation.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaRing {
    pub ring: Ring,
}

impl DeltaRing {
    pub fn new(ring: Ring) -> DeltaRing {
        DeltaRing { ring }
    }

    pub fn phi(&self, x: &Element) -> Element {
        x.frobenius()
    }

    /// delta(x) = (phi(x) - x^p)/p; costs one p-level.
    pub fn delta(&self, x: &Element) -> Result<Element> {
        if x.precision() < 2 {
            return Err(Error::PrecisionExhausted);
        }
        let p = self.ring.p();
        let num = self.phi(x).sub(&x.pow(p))?;
        num.div_exact(&self.ring.from_int(p as i64))
    }

    /// Rank 1 means delta(x) = 0, equivalently phi(x) = x^p on the nose.
    pub fn is_rank_one(&self, x: &Element) -> Result<bool> {
        if x.precision() < 2 {
            return Err(Error::PrecisionExhausted);
        }
        Ok(self.phi(x) == x.pow(self.ring.p()))
    }

    pub fn is_distinguished(&self, x: &Element) -> Result<bool> {
        Ok(self.delta(x)?.is_unit())
    }

    /// delta(x^(p^n)) always lies in (p^n); the check is vacuous at n = 0.
    pub fn check_pth_root_lemma(&self, x: &Element, n: u32) -> Result<bool> {
        if n == 0 {
            return Ok(true);
        }
        let p = self.ring.p();
        let e = x.pow(p.pow(n) as u64);
        let d = self.delta(&e)?;
        let v = val(&d, &[self.ring.from_int(p as i64)], self.ring.val_cap());
        Ok(v.meets(n))
    }

    /// Both defining identities of the delta operation, checked exactly at
    /// the shared output precision.
    pub fn delta_laws_hold(&self, x: &Element, y: &Element) -> Result<bool> {
        let p = self.ring.p();
        let dx = self.delta(x)?;
        let dy = self.delta(y)?;

        // product law
        let lhs = self.delta(&x.mul(y)?)?;
        let rhs = x
            .pow(p)
            .mul(&dy)?
            .add(&y.pow(p).mul(&dx)?)?
            .add(&dx.mul(&dy)?.scale(p as i64))?;
        if !lhs.eq_at_shared_precision(&rhs) {
            return Ok(false);
        }

        // sum law: delta(x+y) = delta(x) + delta(y) - sum_{0<i<p} (1/p)C(p,i) x^i y^(p-i)
        let lhs = self.delta(&x.add(y)?)?;
        let mut corr = self.ring.zero();
        let mut binom = 1i128;
        for i in 1..p {
            binom = binom * (p - i + 1) as i128 / i as i128;
            let c = (binom / p as i128) as i64;
            // C(p,i)/p is integral for 0 < i < p
            debug_assert_eq!(binom % p as i128, 0);
            corr = corr.add(&x.pow(i).mul(&y.pow(p - i))?.scale(c))?;
        }
        let rhs = dx.add(&dy)?.sub(&corr)?;
        Ok(lhs.eq_at_shared_precision(&rhs))
    }
}

/// The oriented distinguished element catalog.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PrismKind {
    /// d = p over Z_p.
    Crystalline,
    /// d = E(u), Eisenstein over the u-ring.
    BreuilKisin,
    /// d = [p]_q over the q-ring.
    Q,
}

/// An oriented prism from the catalog: delta-ring plus distinguished d.
#[derive(Debug, Clone, PartialEq)]
pub struct Prism {
    pub dring: DeltaRing,
    pub d: Element,
    pub kind: PrismKind,
}

impl Prism {
    /// Validate d against the catalog and the distinguished-element test.
    pub fn make(dring: DeltaRing, d: Element, kind: PrismKind) -> Result<Prism> {
        if d.ring() != &dring.ring {
            return Err(Error::RingMismatch);
        }
        match kind {
            PrismKind::Crystalline => {
                if d != dring.ring.from_int(dring.ring.p() as i64) {
                    return Err(Error::NotDistinguished);
                }
            }
            PrismKind::BreuilKisin => {
                if !eisenstein_shape(&dring.ring, &d) {
                    return Err(Error::NotDistinguished);
                }
            }
            PrismKind::Q => {
                let expected = crate::qprism::q_analog_of_p(&dring.ring)?;
                if d != expected {
                    return Err(Error::NotDistinguished);
                }
            }
        }
        if !dring.is_distinguished(&d)? {
            return Err(Error::NotDistinguished);
        }
        Ok(Prism { dring, d, kind })
    }

    pub fn crystalline(ring: Ring) -> Result<Prism> {
        let p = ring.p() as i64;
        let d = ring.from_int(p);
        Prism::make(DeltaRing::new(ring), d, PrismKind::Crystalline)
    }

    pub fn breuil_kisin(ring: Ring, e: Element) -> Result<Prism> {
        Prism::make(DeltaRing::new(ring), e, PrismKind::BreuilKisin)
    }

    pub fn q_prism(ring: Ring) -> Result<Prism> {
        let d = crate::qprism::q_analog_of_p(&ring)?;
        Prism::make(DeltaRing::new(ring), d, PrismKind::Q)
    }

    pub fn ring(&self) -> &Ring {
        &self.dring.ring
    }

    pub fn phi(&self, x: &Element) -> Element {
        self.dring.phi(x)
    }

    /// phi^k(d).
    pub fn phi_iter_d(&self, k: u32) -> Element {
        let mut x = self.d.clone();
        for _ in 0..k {
            x = self.phi(&x);
        }
        x
    }

    /// Nygaard membership: val(phi(x), (d)) >= i.
    pub fn nygaard_member(&self, x: &Element, i: u32) -> Result<bool> {
        if i == 0 {
            return Ok(true);
        }
        let cap = self.ring().val_cap();
        if i > cap {
            return Err(Error::PrecisionExhausted);
        }
        let v = val(&self.phi(x), &[self.d.clone()], cap);
        Ok(v.meets(i))
    }
}

/// Eisenstein shape: lowest unit coefficient at some u^e with e >= 1, all
/// lower coefficients divisible by p, constant term of p-valuation exactly 1.
fn eisenstein_shape(ring: &Ring, e: &Element) -> bool {
    if ring.spec().u_trunc.is_none() {
        return false;
    }
    let cr = ring.coeff_ring();
    let mut coeff_by_u = vec![0u64; ring.u_dim() as usize];
    for (m, c) in e.coeffs() {
        if m.t_exp != 0 {
            return false;
        }
        coeff_by_u[m.u_exp as usize] = *c;
    }
    let lead = (0..coeff_by_u.len()).find(|&i| cr.is_unit(coeff_by_u[i]));
    let Some(lead) = lead else { return false };
    if lead == 0 {
        return false;
    }
    if cr.vp(coeff_by_u[0]) != 1 {
        return false;
    }
    coeff_by_u[..lead].iter().all(|&c| c == 0 || cr.vp(c) >= 1)
}

/// Convenience: val against the principal ideal (p).
pub fn val_p(x: &Element) -> Val {
    let ring = x.ring();
    val(x, &[ring.from_int(ring.p() as i64)], ring.val_cap())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::RingSpec;

    #[test]
    fn structure_polys_low_degree() {
        // S0 = x0 + y0, P0 = x0*y0 for any p
        for p in [2u64, 3, 5] {
            let polys = witt_structure_polys(p, 2).unwrap();
            let n = 2usize;
            let x0 = IntPoly::var(2 * n, 0);
            let y0 = IntPoly::var(2 * n, n);
            assert_eq!(polys.sum[0], x0.add(&y0));
            assert_eq!(polys.prod[0], x0.mul(&y0));
        }
    }

    #[test]
    fn s1_for_p2_and_p3() {
        let polys = witt_structure_polys(2, 2).unwrap();
        let n = 2usize;
        let (x0, x1) = (IntPoly::var(2 * n, 0), IntPoly::var(2 * n, 1));
        let (y0, y1) = (IntPoly::var(2 * n, n), IntPoly::var(2 * n, n + 1));
        let expect = x1.add(&y1).sub(&x0.mul(&y0));
        assert_eq!(polys.sum[1], expect);

        let polys = witt_structure_polys(3, 2).unwrap();
        let expect = x1
            .add(&y1)
            .sub(&x0.pow(2).mul(&y0))
            .sub(&x0.mul(&y0.pow(2)));
        assert_eq!(polys.sum[1], expect);
    }

    #[test]
    fn ghost_equations_hold_over_the_integers() {
        for p in [2u64, 3] {
            for n in 2..=4u32 {
                let polys = witt_structure_polys(p, n).unwrap();
                let nv = 2 * n as usize;
                let args: Vec<i128> = (0..nv).map(|i| ((i * 7 + 3) % 3) as i128).collect();
                for k in 0..n as usize {
                    let xs: Vec<usize> = (0..n as usize).collect();
                    let ys: Vec<usize> = (n as usize..nv).collect();
                    let wx = ghost_poly(nv, &xs, p, k).eval_i128(&args);
                    let wy = ghost_poly(nv, &ys, p, k).eval_i128(&args);
                    let svals: Vec<i128> =
                        polys.sum.iter().map(|q| q.eval_i128(&args)).collect();
                    let pvals: Vec<i128> =
                        polys.prod.iter().map(|q| q.eval_i128(&args)).collect();
                    let slots: Vec<usize> = (0..n as usize).collect();
                    let ws = ghost_poly(n as usize, &slots, p, k).eval_i128(&svals);
                    let wp = ghost_poly(n as usize, &slots, p, k).eval_i128(&pvals);
                    assert_eq!(ws, wx + wy, "sum ghost p={} n={} k={}", p, n, k);
                    assert_eq!(wp, wx * wy, "prod ghost p={} n={} k={}", p, n, k);
                }
            }
        }
    }

    #[test]
    fn one_plus_one_in_w2_f2() {
        let ring = Ring::new(RingSpec::zp(2, 1)).unwrap();
        let one = WittVector::new(ring.clone(), vec![ring.one(), ring.zero()]).unwrap();
        let sum = one.add(&one).unwrap();
        assert!(sum.comps[0].is_zero());
        assert_eq!(sum.comps[1], ring.one());
    }

    #[test]
    fn ghost_of_length_two() {
        let ring = Ring::new(RingSpec::zp(2, 6)).unwrap();
        let x = WittVector::new(ring.clone(), vec![ring.from_int(3), ring.from_int(5)]).unwrap();
        let g = x.ghost();
        assert_eq!(g[0], ring.from_int(3));
        assert_eq!(g[1], ring.from_int(9 + 2 * 5));
    }

    #[test]
    fn frobenius_then_verschiebung_is_p() {
        let ring = Ring::new(RingSpec::zp(3, 6)).unwrap();
        let x = WittVector::new(
            ring.clone(),
            vec![ring.from_int(4), ring.from_int(7), ring.from_int(2)],
        )
        .unwrap();
        let fv = x.verschiebung().frobenius().unwrap();
        let px = x.mul_int(3).unwrap().truncate(2);
        assert_eq!(fv.ghost(), px.ghost());
        assert_eq!(fv, px);
    }

    #[test]
    fn delta_examples() {
        // delta(2) = -1 in Z/16, determined modulo 8 after the division
        let ring = Ring::new(RingSpec::zp(2, 4)).unwrap();
        let d = DeltaRing::new(ring.clone());
        let d2 = d.delta(&ring.from_int(2)).unwrap();
        assert!(d2.eq_at_shared_precision(&ring.from_int(15)));
        assert_eq!(d2.precision(), 3);
        assert_eq!(d.delta(&ring.one()).unwrap(), ring.zero());

        // delta(u) = 0 with phi(u) = u^p
        let ring = Ring::new(RingSpec::with_u(2, 4, 8)).unwrap();
        let d = DeltaRing::new(ring.clone());
        let u = ring.var_u().unwrap();
        assert!(d.delta(&u).unwrap().is_zero());
        assert!(d.is_rank_one(&u).unwrap());
    }

    #[test]
    fn distinguished_examples() {
        let ring = Ring::new(RingSpec::zp(2, 4)).unwrap();
        let d = DeltaRing::new(ring.clone());
        assert!(d.is_distinguished(&ring.from_int(2)).unwrap());

        let ring = Ring::new(RingSpec::with_u(2, 4, 8)).unwrap();
        let d = DeltaRing::new(ring.clone());
        let e = ring.var_u().unwrap().sub(&ring.from_int(2)).unwrap();
        assert!(d.is_distinguished(&e).unwrap());
        // delta(E) = 2u - 3 for p = 2, E = u - 2
        let de = d.delta(&e).unwrap();
        let expect = ring.var_u().unwrap().scale(2).sub(&ring.from_int(3)).unwrap();
        assert!(de.eq_at_shared_precision(&expect));
    }

    #[test]
    fn prism_catalog() {
        let zp = Ring::new(RingSpec::zp(2, 6)).unwrap();
        assert!(Prism::crystalline(zp).is_ok());

        let bk = Ring::new(RingSpec::with_u(2, 6, 8)).unwrap();
        let e = bk.var_u().unwrap().sub(&bk.from_int(2)).unwrap();
        assert!(Prism::breuil_kisin(bk.clone(), e).is_ok());

        // u^2 is rank 1, not distinguished
        let u2 = bk.var_u().unwrap().pow(2);
        assert_eq!(
            Prism::breuil_kisin(bk, u2).unwrap_err(),
            Error::NotDistinguished
        );

        let qr = Ring::new(RingSpec::with_q(2, 6, 0, 16)).unwrap();
        assert!(Prism::q_prism(qr).is_ok());
    }

    #[test]
    fn pth_root_lemma_spot_checks() {
        let ring = Ring::new(RingSpec::zp(2, 6)).unwrap();
        let d = DeltaRing::new(ring.clone());
        // x = 1 + p, n = 1: delta(x^2) divisible by 2
        let x = ring.from_int(3);
        assert!(d.check_pth_root_lemma(&x, 1).unwrap());
        assert!(d.check_pth_root_lemma(&x, 0).unwrap());
    }
}
