//! Working quotient rings Z[u, q_s]/(p^N, u^M, (q_s-1)^Q) with per-element
//! guaranteed p-precision.
//!
//! Elements are coefficient tables over the monomial basis u^i * t^j where
//! t = q_s - 1, with residues stored canonically in [0, p^N). Equality means
//! equality in the quotient. Division is a partial operation backed by the
//! Smith-style solver in [`crate::linalg`]; the p-power extracted while
//! solving is charged against the guaranteed precision.

use crate::error::{Error, Result};
use crate::linalg::{self, Mat, ModRing};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

/// Truncation orders for the q-variable at a given root depth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QSpec {
    /// Root depth s: the ring contains q_s with q = q_s^(p^s).
    pub depth: u32,
    /// Truncation order Q in (q_s - 1).
    pub trunc: u32,
}

/// Shape of a working ring.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RingSpec {
    pub p: u64,
    /// p-precision exponent N (work modulo p^N).
    pub n: u32,
    /// Truncation order M for the series variable u, if present.
    pub u_trunc: Option<u32>,
    /// q-variable data, if present.
    pub q: Option<QSpec>,
}

impl RingSpec {
    pub fn zp(p: u64, n: u32) -> RingSpec {
        RingSpec { p, n, u_trunc: None, q: None }
    }

    pub fn with_u(p: u64, n: u32, m: u32) -> RingSpec {
        RingSpec { p, n, u_trunc: Some(m), q: None }
    }

    pub fn with_q(p: u64, n: u32, depth: u32, q_trunc: u32) -> RingSpec {
        RingSpec { p, n, u_trunc: None, q: Some(QSpec { depth, trunc: q_trunc }) }
    }
}

fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Monomial u^u_exp * t^t_exp in graded-lex order (total degree first,
/// then u-degree).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Mono {
    pub u_exp: u32,
    pub t_exp: u32,
}

impl Mono {
    pub const ONE: Mono = Mono { u_exp: 0, t_exp: 0 };

    fn degree(&self) -> u32 {
        self.u_exp + self.t_exp
    }
}

impl Ord for Mono {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.degree(), self.u_exp).cmp(&(other.degree(), other.u_exp))
    }
}

impl PartialOrd for Mono {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug)]
struct RingInner {
    spec: RingSpec,
    coeff: ModRing,
    /// u-dimension (1 when the variable is absent).
    mdim: u32,
    /// t-dimension (1 when the variable is absent).
    qdim: u32,
    /// Cached phi-images of t^j, keyed by j.
    phi_t_pows: std::sync::Mutex<Vec<BTreeMap<Mono, u64>>>,
}

/// Handle to a working ring; cheap to clone and safe to share.
#[derive(Clone)]
pub struct Ring(Arc<RingInner>);

impl fmt::Debug for Ring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Ring({:?})", self.0.spec)
    }
}

impl PartialEq for Ring {
    fn eq(&self, other: &Self) -> bool {
        self.0.spec == other.0.spec
    }
}

impl Ring {
    pub fn new(spec: RingSpec) -> Result<Ring> {
        if !is_prime(spec.p) {
            return Err(Error::InvalidSpec(format!("p = {} is not prime", spec.p)));
        }
        if spec.n < 1 {
            return Err(Error::InvalidSpec("p-precision N must be >= 1".into()));
        }
        if spec.u_trunc == Some(0) {
            return Err(Error::InvalidSpec("u truncation order must be >= 1".into()));
        }
        if let Some(q) = spec.q {
            if q.trunc == 0 {
                return Err(Error::InvalidSpec("q truncation order must be >= 1".into()));
            }
        }
        let coeff = ModRing::new(spec.p, spec.n)
            .ok_or_else(|| Error::InvalidSpec("p^N does not fit in 64 bits".into()))?;
        Ok(Ring(Arc::new(RingInner {
            spec,
            coeff,
            mdim: spec.u_trunc.unwrap_or(1).max(1),
            qdim: spec.q.map(|q| q.trunc).unwrap_or(1).max(1),
            phi_t_pows: std::sync::Mutex::new(Vec::new()),
        })))
    }

    pub fn spec(&self) -> &RingSpec {
        &self.0.spec
    }

    pub fn p(&self) -> u64 {
        self.0.spec.p
    }

    pub fn precision(&self) -> u32 {
        self.0.spec.n
    }

    pub fn modulus(&self) -> u64 {
        self.0.coeff.modulus
    }

    pub fn coeff_ring(&self) -> ModRing {
        self.0.coeff
    }

    /// Number of basis monomials.
    pub fn dim(&self) -> usize {
        (self.0.mdim * self.0.qdim) as usize
    }

    pub fn u_dim(&self) -> u32 {
        self.0.mdim
    }

    pub fn t_dim(&self) -> u32 {
        self.0.qdim
    }

    /// Default valuation cap: beyond it the working ideal cannot separate
    /// elements from zero.
    pub fn val_cap(&self) -> u32 {
        let m = if self.0.spec.u_trunc.is_some() { self.0.mdim } else { 0 };
        let q = if self.0.spec.q.is_some() { self.0.qdim } else { 0 };
        self.0.spec.n + m + q
    }

    pub fn zero(&self) -> Element {
        Element { ring: self.clone(), coeffs: BTreeMap::new(), g: self.0.spec.n }
    }

    pub fn one(&self) -> Element {
        self.from_int(1)
    }

    pub fn from_int(&self, k: i64) -> Element {
        let m = self.modulus() as i128;
        let r = ((k as i128 % m) + m) % m;
        let mut coeffs = BTreeMap::new();
        if r != 0 {
            coeffs.insert(Mono::ONE, r as u64);
        }
        Element { ring: self.clone(), coeffs, g: self.0.spec.n }
    }

    /// The series variable u, when present.
    pub fn var_u(&self) -> Result<Element> {
        if self.0.spec.u_trunc.is_none() {
            return Err(Error::NoSuchVariable('u'));
        }
        self.monomial(1, 0, 1)
    }

    /// q_s itself, i.e. 1 + t.
    pub fn var_q(&self) -> Result<Element> {
        if self.0.spec.q.is_none() {
            return Err(Error::NoSuchVariable('q'));
        }
        let mut e = self.monomial(0, 1, 1)?;
        e = e.add(&self.one())?;
        Ok(e)
    }

    /// t = q_s - 1, when present.
    pub fn var_t(&self) -> Result<Element> {
        if self.0.spec.q.is_none() {
            return Err(Error::NoSuchVariable('q'));
        }
        self.monomial(0, 1, 1)
    }

    pub fn monomial(&self, u_exp: u32, t_exp: u32, coeff: u64) -> Result<Element> {
        if u_exp > 0 && self.0.spec.u_trunc.is_none() {
            return Err(Error::NoSuchVariable('u'));
        }
        if t_exp > 0 && self.0.spec.q.is_none() {
            return Err(Error::NoSuchVariable('q'));
        }
        let mut coeffs = BTreeMap::new();
        let c = coeff % self.modulus();
        if c != 0 && u_exp < self.0.mdim && t_exp < self.0.qdim {
            coeffs.insert(Mono { u_exp, t_exp }, c);
        }
        Ok(Element { ring: self.clone(), coeffs, g: self.0.spec.n })
    }

    /// Flatten basis index: u^i t^j -> i * qdim + j.
    fn flat_index(&self, m: Mono) -> usize {
        (m.u_exp * self.0.qdim + m.t_exp) as usize
    }

    fn unflatten_index(&self, idx: usize) -> Mono {
        Mono { u_exp: idx as u32 / self.0.qdim, t_exp: idx as u32 % self.0.qdim }
    }

    pub fn element_from_vec(&self, v: &[u64], g: u32) -> Element {
        assert_eq!(v.len(), self.dim());
        let mut coeffs = BTreeMap::new();
        for (idx, &c) in v.iter().enumerate() {
            let c = c % self.modulus();
            if c != 0 {
                coeffs.insert(self.unflatten_index(idx), c);
            }
        }
        Element { ring: self.clone(), coeffs, g }
    }

    /// phi(t^j) where phi(q_s) = q_s^p, i.e. phi(t) = (1+t)^p - 1.
    fn phi_t_pow(&self, j: u32) -> BTreeMap<Mono, u64> {
        let mut cache = self.0.phi_t_pows.lock().unwrap();
        while cache.len() <= j as usize {
            let next = if cache.is_empty() {
                let mut one = BTreeMap::new();
                one.insert(Mono::ONE, 1 % self.modulus());
                one
            } else {
                // multiply previous by (1+t)^p - 1
                let tau = {
                    // (1+t)^p - 1 as a coefficient table
                    let cr = self.0.coeff;
                    let mut table = BTreeMap::new();
                    let p = self.0.spec.p;
                    let mut binom = 1u128;
                    for k in 1..=p {
                        binom = binom * (p - k + 1) as u128 / k as u128;
                        let c = (binom % cr.modulus as u128) as u64;
                        if c != 0 && (k as u32) < self.0.qdim {
                            table.insert(Mono { u_exp: 0, t_exp: k as u32 }, c);
                        }
                    }
                    table
                };
                let prev = cache.last().unwrap();
                mul_tables(self, prev, &tau)
            };
            cache.push(next);
        }
        cache[j as usize].clone()
    }
}

fn mul_tables(
    ring: &Ring,
    a: &BTreeMap<Mono, u64>,
    b: &BTreeMap<Mono, u64>,
) -> BTreeMap<Mono, u64> {
    let cr = ring.0.coeff;
    let mut out: BTreeMap<Mono, u64> = BTreeMap::new();
    for (ma, ca) in a {
        for (mb, cb) in b {
            let u_exp = ma.u_exp + mb.u_exp;
            let t_exp = ma.t_exp + mb.t_exp;
            if u_exp >= ring.0.mdim || t_exp >= ring.0.qdim {
                continue;
            }
            let c = cr.mul(*ca, *cb);
            if c == 0 {
                continue;
            }
            let slot = out.entry(Mono { u_exp, t_exp }).or_insert(0);
            *slot = cr.add(*slot, c);
        }
    }
    out.retain(|_, c| *c != 0);
    out
}

/// Element of a working ring with guaranteed p-precision g.
#[derive(Clone)]
pub struct Element {
    ring: Ring,
    coeffs: BTreeMap<Mono, u64>,
    g: u32,
}

impl fmt::Debug for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (g={})", self, self.g)
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in &self.coeffs {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match (m.u_exp, m.t_exp) {
                (0, 0) => write!(f, "{}", c)?,
                (u, 0) => write!(f, "{}*u^{}", c, u)?,
                (0, t) => write!(f, "{}*t^{}", c, t)?,
                (u, t) => write!(f, "{}*u^{}*t^{}", c, u, t)?,
            }
        }
        Ok(())
    }
}

impl PartialEq for Element {
    /// Equality in the quotient ring (full stored precision).
    fn eq(&self, other: &Self) -> bool {
        self.ring == other.ring && self.coeffs == other.coeffs
    }
}

impl Element {
    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    pub fn precision(&self) -> u32 {
        self.g
    }

    /// Explicitly lower the guaranteed precision.
    pub fn with_precision(mut self, g: u32) -> Element {
        self.g = g.min(self.g);
        self
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeffs(&self) -> &BTreeMap<Mono, u64> {
        &self.coeffs
    }

    /// Constant coefficient.
    pub fn constant_term(&self) -> u64 {
        self.coeffs.get(&Mono::ONE).copied().unwrap_or(0)
    }

    /// Substitute t = 0, u = 0.
    pub fn augmentation(&self) -> u64 {
        self.constant_term()
    }

    fn check_ring(&self, other: &Element) -> Result<()> {
        if self.ring == other.ring {
            Ok(())
        } else {
            Err(Error::RingMismatch)
        }
    }

    pub fn add(&self, other: &Element) -> Result<Element> {
        self.check_ring(other)?;
        let cr = self.ring.0.coeff;
        let mut coeffs = self.coeffs.clone();
        for (m, c) in &other.coeffs {
            let slot = coeffs.entry(*m).or_insert(0);
            *slot = cr.add(*slot, *c);
        }
        coeffs.retain(|_, c| *c != 0);
        Ok(Element { ring: self.ring.clone(), coeffs, g: self.g.min(other.g) })
    }

    pub fn sub(&self, other: &Element) -> Result<Element> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Element {
        let cr = self.ring.0.coeff;
        let coeffs = self.coeffs.iter().map(|(m, c)| (*m, cr.neg(*c))).collect();
        Element { ring: self.ring.clone(), coeffs, g: self.g }
    }

    pub fn mul(&self, other: &Element) -> Result<Element> {
        self.check_ring(other)?;
        let coeffs = mul_tables(&self.ring, &self.coeffs, &other.coeffs);
        Ok(Element { ring: self.ring.clone(), coeffs, g: self.g.min(other.g) })
    }

    pub fn scale(&self, k: i64) -> Element {
        let c = self.ring.from_int(k);
        self.mul(&c).expect("same ring")
    }

    pub fn pow(&self, mut e: u64) -> Element {
        let mut base = self.clone();
        let mut acc = self.ring.one().with_precision(self.g);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base).expect("same ring");
            }
            base = base.mul(&base).expect("same ring");
            e >>= 1;
        }
        acc
    }

    /// Coefficients as a flat vector over Z/p^N.
    pub fn to_vec(&self) -> Vec<u64> {
        let mut v = vec![0u64; self.ring.dim()];
        for (m, c) in &self.coeffs {
            v[self.ring.flat_index(*m)] = *c;
        }
        v
    }

    /// Equality modulo p^k.
    pub fn eq_mod_pk(&self, other: &Element, k: u32) -> bool {
        if self.ring != other.ring {
            return false;
        }
        let pk = self.ring.p().pow(k.min(self.ring.precision()));
        let mut keys: Vec<Mono> = self.coeffs.keys().chain(other.coeffs.keys()).copied().collect();
        keys.sort();
        keys.dedup();
        keys.iter().all(|m| {
            let a = self.coeffs.get(m).copied().unwrap_or(0);
            let b = other.coeffs.get(m).copied().unwrap_or(0);
            a % pk == b % pk
        })
    }

    /// Equality at the shared guaranteed precision.
    pub fn eq_at_shared_precision(&self, other: &Element) -> bool {
        self.eq_mod_pk(other, self.g.min(other.g))
    }

    /// Minimal p-valuation over all coefficients; None for the zero element.
    pub fn content_vp(&self) -> Option<u32> {
        let cr = self.ring.0.coeff;
        self.coeffs.values().map(|&c| cr.vp(c)).min()
    }

    /// Units of the local working ring are exactly the elements whose
    /// constant coefficient is prime to p.
    pub fn is_unit(&self) -> bool {
        self.ring.0.coeff.is_unit(self.constant_term())
    }

    /// Newton inversion of a unit; exact in the finite ring.
    pub fn inv_unit(&self) -> Result<Element> {
        if !self.is_unit() {
            return Err(Error::NotUnit);
        }
        let cr = self.ring.0.coeff;
        let mut x = self.ring.from_int(cr.inv(self.constant_term()) as i64);
        let two = self.ring.from_int(2);
        loop {
            let err = self.ring.one().sub(&self.mul(&x)?)?;
            if err.is_zero() {
                break;
            }
            x = x.mul(&two.sub(&self.mul(&x)?)?)?;
        }
        Ok(x.with_precision(self.g))
    }

    /// The Frobenius lift: identity on coefficients, u -> u^p, q_s -> q_s^p.
    pub fn frobenius(&self) -> Element {
        let ring = &self.ring;
        let cr = ring.0.coeff;
        let p = ring.p() as u32;
        let mut out: BTreeMap<Mono, u64> = BTreeMap::new();
        for (m, c) in &self.coeffs {
            let u_exp = m.u_exp.checked_mul(p).unwrap_or(u32::MAX);
            if u_exp >= ring.0.mdim && m.u_exp > 0 {
                continue;
            }
            let t_img = ring.phi_t_pow(m.t_exp);
            for (tm, tc) in &t_img {
                let u_total = u_exp + tm.u_exp;
                if u_total >= ring.0.mdim {
                    continue;
                }
                let mono = Mono { u_exp: u_total, t_exp: tm.t_exp };
                let v = cr.mul(*c, *tc);
                if v == 0 {
                    continue;
                }
                let slot = out.entry(mono).or_insert(0);
                *slot = cr.add(*slot, v);
            }
        }
        out.retain(|_, c| *c != 0);
        Element { ring: ring.clone(), coeffs: out, g: self.g }
    }

    /// Exact division: find c with b*c = a in the quotient ring. The
    /// guaranteed precision drops by the p-power genuinely divided out
    /// (exactly 1 when b = p).
    pub fn div_exact(&self, b: &Element) -> Result<Element> {
        self.check_ring(b)?;
        if b.is_zero() {
            return Err(Error::NotDivisible);
        }
        let ring = &self.ring;
        let g_in = self.g.min(b.g);

        // pull out the p-content of the divisor first
        let nu = b.content_vp().unwrap_or(0);
        let (a_red, b_red, work_e) = if nu > 0 {
            match self.content_vp() {
                None => {
                    // 0 / (p^nu * b'): the zero quotient is exact
                    (self.clone(), b.clone(), ring.precision())
                }
                Some(av) if av >= nu => {
                    let div = ring.p().pow(nu);
                    let a2 = Element {
                        ring: ring.clone(),
                        coeffs: self.coeffs.iter().map(|(m, c)| (*m, c / div)).collect(),
                        g: self.g,
                    };
                    let b2 = Element {
                        ring: ring.clone(),
                        coeffs: b.coeffs.iter().map(|(m, c)| (*m, c / div)).collect(),
                        g: b.g,
                    };
                    (a2, b2, ring.precision() - nu)
                }
                Some(_) => return Err(Error::NotDivisible),
            }
        } else {
            (self.clone(), b.clone(), ring.precision())
        };

        let drop_total;
        let quotient = if a_red.is_zero() {
            drop_total = nu;
            ring.zero()
        } else {
            // solve the multiplication-by-b_red system at the shrunk modulus
            let work = ModRing::new(ring.p(), work_e)
                .ok_or_else(|| Error::InvalidSpec("modulus".into()))?;
            let n = ring.dim();
            let mut cols = Vec::with_capacity(n);
            for idx in 0..n {
                let mono = ring.unflatten_index(idx);
                let basis = Element {
                    ring: ring.clone(),
                    coeffs: BTreeMap::from([(mono, 1u64)]),
                    g: ring.precision(),
                };
                let prod = b_red.mul(&basis)?;
                cols.push(prod.to_vec().into_iter().map(|x| x % work.modulus).collect());
            }
            let t = Mat::from_cols(work, cols);
            let rhs: Vec<u64> = a_red.to_vec().into_iter().map(|x| x % work.modulus).collect();
            let (x, drop) = linalg::solve(&t, &rhs).ok_or(Error::NotDivisible)?;
            drop_total = nu + drop;
            ring.element_from_vec(&x, ring.precision())
        };

        if g_in <= drop_total {
            return Err(Error::PrecisionExhausted);
        }
        // the canonical solution must reproduce a exactly at full modulus
        let check = b.mul(&quotient)?;
        if check != *self {
            return Err(Error::NotDivisible);
        }
        Ok(quotient.with_precision(g_in - drop_total))
    }
}

/// Result of a valuation query: either an exact level below the cap or
/// membership in every power up to the cap.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Val {
    Exact(u32),
    AtLeastCap(u32),
}

impl Val {
    pub fn meets(&self, bound: u32) -> bool {
        match self {
            Val::Exact(k) => *k >= bound,
            Val::AtLeastCap(cap) => bound <= *cap,
        }
    }

    pub fn level(&self) -> u32 {
        match self {
            Val::Exact(k) => *k,
            Val::AtLeastCap(cap) => *cap,
        }
    }
}

/// Largest k <= cap with a in (gens)^k, by explicit span membership in the
/// quotient ring.
pub fn val(a: &Element, gens: &[Element], cap: u32) -> Val {
    if a.is_zero() {
        return Val::AtLeastCap(cap);
    }
    let ring = a.ring().clone();
    let cr = ring.coeff_ring();
    let target = a.to_vec();

    // fast path: principal ideal (p)
    if gens.len() == 1 && gens[0] == ring.from_int(ring.p() as i64) {
        let v = a.content_vp().unwrap_or(0).min(cap);
        return if v >= cap { Val::AtLeastCap(cap) } else { Val::Exact(v) };
    }

    let mut k = 0u32;
    // power products of the generators, times all basis monomials, span (gens)^k
    let mut products: Vec<Element> = vec![ring.one()];
    while k < cap {
        let next: Vec<Element> = {
            let mut seen: Vec<Element> = Vec::new();
            for prod in &products {
                for g in gens {
                    let e = prod.mul(g).expect("same ring");
                    if !seen.iter().any(|s| *s == e) {
                        seen.push(e);
                    }
                }
            }
            seen
        };
        let mut rows = Vec::new();
        for e in &next {
            for idx in 0..ring.dim() {
                let mono = ring.unflatten_index(idx);
                let basis = Element {
                    ring: ring.clone(),
                    coeffs: BTreeMap::from([(mono, 1u64)]),
                    g: ring.precision(),
                };
                let row = e.mul(&basis).expect("same ring").to_vec();
                if row.iter().any(|&x| x != 0) {
                    rows.push(row);
                }
            }
        }
        let span = linalg::Span::new(cr, ring.dim(), rows);
        if !span.contains(&target) {
            return Val::Exact(k);
        }
        k += 1;
        products = next;
        if products.is_empty() {
            // ideal power is zero yet membership held, so a = 0; unreachable
            return Val::AtLeastCap(cap);
        }
    }
    Val::AtLeastCap(cap)
}

/// JSON shape shared by the CLI and the Python bindings:
/// ring spec fields inline with the coefficient table.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ElementJson {
    pub p: u64,
    #[serde(rename = "N")]
    pub n: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub u_trunc: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q_trunc: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q_depth: Option<u32>,
    /// [[u_exp, t_exp], residue] entries in graded-lex order.
    pub coeffs: Vec<([u32; 2], u64)>,
    pub g: u32,
}

impl Element {
    pub fn to_json(&self) -> ElementJson {
        let spec = self.ring.spec();
        ElementJson {
            p: spec.p,
            n: spec.n,
            u_trunc: spec.u_trunc,
            q_trunc: spec.q.map(|q| q.trunc),
            q_depth: spec.q.map(|q| q.depth),
            coeffs: self.coeffs.iter().map(|(m, c)| ([m.u_exp, m.t_exp], *c)).collect(),
            g: self.g,
        }
    }

    pub fn from_json(j: &ElementJson) -> Result<Element> {
        let spec = RingSpec {
            p: j.p,
            n: j.n,
            u_trunc: j.u_trunc,
            q: match (j.q_trunc, j.q_depth) {
                (Some(t), d) => Some(QSpec { depth: d.unwrap_or(0), trunc: t }),
                (None, Some(_)) => {
                    return Err(Error::BadInput("q_depth given without q_trunc".into()))
                }
                (None, None) => None,
            },
        };
        let ring = Ring::new(spec)?;
        let mut acc = ring.zero();
        for ([u_exp, t_exp], c) in &j.coeffs {
            let m = ring.monomial(*u_exp, *t_exp, *c)?;
            acc = acc.add(&m)?;
        }
        if j.g < 1 || j.g > spec.n {
            return Err(Error::BadInput("precision g out of range".into()));
        }
        Ok(acc.with_precision(j.g))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z16() -> Ring {
        Ring::new(RingSpec::zp(2, 4)).unwrap()
    }

    fn z9_u4() -> Ring {
        Ring::new(RingSpec::with_u(3, 2, 4)).unwrap()
    }

    #[test]
    fn ring_make_examples() {
        assert_eq!(z16().modulus(), 16);
        assert_eq!(z9_u4().dim(), 4);
        assert!(Ring::new(RingSpec::zp(2, 0)).is_err());
        assert!(Ring::new(RingSpec::zp(4, 3)).is_err());
    }

    #[test]
    fn arith_examples() {
        let r = z16();
        let nine = r.from_int(9);
        assert_eq!(nine.add(&nine).unwrap(), r.from_int(2));

        // (1+u)^2 = 1 + 2u + u^2 in (Z/4)[u]/u^3
        let r = Ring::new(RingSpec::with_u(2, 2, 3)).unwrap();
        let x = r.one().add(&r.var_u().unwrap()).unwrap();
        let sq = x.mul(&x).unwrap();
        let expect = r
            .one()
            .add(&r.var_u().unwrap().scale(2))
            .unwrap()
            .add(&r.monomial(2, 0, 1).unwrap())
            .unwrap();
        assert_eq!(sq, expect);

        // mixed rings error
        let other = z9_u4();
        assert_eq!(r.one().add(&other.one()).unwrap_err(), Error::RingMismatch);
    }

    #[test]
    fn div_exact_examples() {
        let r = z16();
        let q = r.from_int(12).div_exact(&r.from_int(2)).unwrap();
        assert_eq!(q, r.from_int(6));
        assert_eq!(q.precision(), 3);

        // (u^2 - 2u) / (u - 2) = u in (Z/8)[u]/u^4
        let r = Ring::new(RingSpec::with_u(2, 3, 4)).unwrap();
        let u = r.var_u().unwrap();
        let dividend = u.mul(&u).unwrap().sub(&u.scale(2)).unwrap();
        let divisor = u.sub(&r.from_int(2)).unwrap();
        let q = dividend.div_exact(&divisor).unwrap();
        assert_eq!(divisor.mul(&q).unwrap(), dividend);
        assert_eq!(q, u);

        // 1 / u is not divisible
        assert_eq!(r.one().div_exact(&u).unwrap_err(), Error::NotDivisible);
    }

    #[test]
    fn precision_exhaustion() {
        // dividing by p at g = 1 would leave nothing guaranteed
        let r = Ring::new(RingSpec::zp(2, 2)).unwrap();
        let x = r.from_int(2).with_precision(1);
        assert_eq!(x.div_exact(&r.from_int(2)).unwrap_err(), Error::PrecisionExhausted);
    }

    #[test]
    fn val_examples() {
        let r = Ring::new(RingSpec::zp(2, 5)).unwrap(); // Z/32
        let two = r.from_int(2);
        assert_eq!(val(&r.from_int(12), &[two.clone()], r.val_cap()), Val::Exact(2));
        assert_eq!(val(&r.zero(), &[two], r.val_cap()), Val::AtLeastCap(r.val_cap()));

        // val(2u, (2, u)) = 2 in (Z/8)[u]/u^4
        let r = Ring::new(RingSpec::with_u(2, 3, 4)).unwrap();
        let g = vec![r.from_int(2), r.var_u().unwrap()];
        let x = r.var_u().unwrap().scale(2);
        assert_eq!(val(&x, &g, r.val_cap()), Val::Exact(2));
    }

    #[test]
    fn frobenius_is_plain_power_map_on_vars() {
        let r = Ring::new(RingSpec::with_q(3, 2, 0, 5)).unwrap();
        let q = r.var_q().unwrap();
        assert_eq!(q.frobenius(), q.pow(3));
        let r = z9_u4();
        let u = r.var_u().unwrap();
        assert_eq!(u.frobenius(), u.pow(3));
    }

    #[test]
    fn handles_are_shareable() {
        fn assert_send_sync<T: Send + Sync>() {}
        assert_send_sync::<Ring>();
        assert_send_sync::<Element>();
    }

    #[test]
    fn json_roundtrip() {
        let r = z9_u4();
        let x = r.var_u().unwrap().scale(5).add(&r.from_int(7)).unwrap();
        let j = x.to_json();
        let back = Element::from_json(&j).unwrap();
        assert_eq!(x, back);
    }
}
