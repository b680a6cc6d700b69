//! Matrices and semilinear maps over the working rings.
//!
//! The [`PrismaticRing`] trait is the small surface the frame/window and
//! Dieudonne machinery needs: arithmetic, the Frobenius lift, exact
//! division, unit inversion, and a flattening onto Z/p^N coordinates that
//! turns ring-linear problems into [`crate::linalg`] problems. It is
//! implemented by the base quotient rings and by envelope presentations.

use crate::envelope::{EnvElement, Envelope};
use crate::error::{Error, Result};
use crate::linalg::{self, Mat, ModRing};
use crate::ring::{val, Element, Ring, Val};
use std::fmt;

pub trait PrismaticRing: Clone + PartialEq + fmt::Debug {
    type El: Clone + PartialEq + fmt::Debug;

    fn zero(&self) -> Self::El;
    fn one(&self) -> Self::El;
    fn from_int(&self, k: i64) -> Self::El;
    fn add(&self, a: &Self::El, b: &Self::El) -> Result<Self::El>;
    fn sub(&self, a: &Self::El, b: &Self::El) -> Result<Self::El>;
    fn neg(&self, a: &Self::El) -> Self::El;
    fn mul(&self, a: &Self::El, b: &Self::El) -> Result<Self::El>;
    fn phi(&self, a: &Self::El) -> Result<Self::El>;
    fn is_zero(&self, a: &Self::El) -> bool;
    fn is_unit(&self, a: &Self::El) -> bool;
    fn inv_unit(&self, a: &Self::El) -> Result<Self::El>;
    fn div_exact(&self, a: &Self::El, b: &Self::El) -> Result<Self::El>;
    /// d-adic valuation against a principal ideal.
    fn val_principal(&self, a: &Self::El, d: &Self::El) -> Val;
    fn val_cap(&self) -> u32;
    /// Image in the residue field F_p.
    fn residue(&self, a: &Self::El) -> u64;

    fn flat_dim(&self) -> usize;
    fn coeff_ring(&self) -> ModRing;
    fn flatten(&self, a: &Self::El) -> Vec<u64>;
    fn unflatten(&self, v: &[u64]) -> Self::El;
    /// Matrix of multiplication by `a` on the flat coordinates.
    fn mul_matrix(&self, a: &Self::El) -> Result<Mat>;
}

impl PrismaticRing for Ring {
    type El = Element;

    fn zero(&self) -> Element {
        Ring::zero(self)
    }
    fn one(&self) -> Element {
        Ring::one(self)
    }
    fn from_int(&self, k: i64) -> Element {
        Ring::from_int(self, k)
    }
    fn add(&self, a: &Element, b: &Element) -> Result<Element> {
        a.add(b)
    }
    fn sub(&self, a: &Element, b: &Element) -> Result<Element> {
        a.sub(b)
    }
    fn neg(&self, a: &Element) -> Element {
        a.neg()
    }
    fn mul(&self, a: &Element, b: &Element) -> Result<Element> {
        a.mul(b)
    }
    fn phi(&self, a: &Element) -> Result<Element> {
        Ok(a.frobenius())
    }
    fn is_zero(&self, a: &Element) -> bool {
        a.is_zero()
    }
    fn is_unit(&self, a: &Element) -> bool {
        a.is_unit()
    }
    fn inv_unit(&self, a: &Element) -> Result<Element> {
        a.inv_unit()
    }
    fn div_exact(&self, a: &Element, b: &Element) -> Result<Element> {
        a.div_exact(b)
    }
    fn val_principal(&self, a: &Element, d: &Element) -> Val {
        val(a, &[d.clone()], self.val_cap())
    }
    fn val_cap(&self) -> u32 {
        Ring::val_cap(self)
    }
    fn residue(&self, a: &Element) -> u64 {
        a.constant_term() % self.p()
    }

    fn flat_dim(&self) -> usize {
        self.dim()
    }
    fn coeff_ring(&self) -> ModRing {
        Ring::coeff_ring(self)
    }
    fn flatten(&self, a: &Element) -> Vec<u64> {
        a.to_vec()
    }
    fn unflatten(&self, v: &[u64]) -> Element {
        self.element_from_vec(v, self.precision())
    }
    fn mul_matrix(&self, a: &Element) -> Result<Mat> {
        let n = self.dim();
        let mut cols = Vec::with_capacity(n);
        for idx in 0..n {
            let mut basis = vec![0u64; n];
            basis[idx] = 1;
            let e = self.element_from_vec(&basis, self.precision());
            cols.push(a.mul(&e)?.to_vec());
        }
        Ok(Mat::from_cols(Ring::coeff_ring(self), cols))
    }
}

impl PrismaticRing for Envelope {
    type El = EnvElement;

    fn zero(&self) -> EnvElement {
        Envelope::zero(self)
    }
    fn one(&self) -> EnvElement {
        Envelope::one(self)
    }
    fn from_int(&self, k: i64) -> EnvElement {
        self.from_base(&self.ring().from_int(k))
    }
    fn add(&self, a: &EnvElement, b: &EnvElement) -> Result<EnvElement> {
        a.add(b)
    }
    fn sub(&self, a: &EnvElement, b: &EnvElement) -> Result<EnvElement> {
        a.sub(b)
    }
    fn neg(&self, a: &EnvElement) -> EnvElement {
        a.neg()
    }
    fn mul(&self, a: &EnvElement, b: &EnvElement) -> Result<EnvElement> {
        a.mul(b)
    }
    fn phi(&self, a: &EnvElement) -> Result<EnvElement> {
        a.phi()
    }
    fn is_zero(&self, a: &EnvElement) -> bool {
        a.is_zero()
    }
    fn is_unit(&self, a: &EnvElement) -> bool {
        a.terms()
            .get(&vec![0u8; self.depth() as usize])
            .map(|c| c.is_unit())
            .unwrap_or(false)
    }
    fn inv_unit(&self, a: &EnvElement) -> Result<EnvElement> {
        if !PrismaticRing::is_unit(self, a) {
            return Err(Error::NotUnit);
        }
        // Newton against the nilpotent part; multiplication may refuse at
        // the frontier, which the caller sees as an error.
        let c0 = a
            .terms()
            .get(&vec![0u8; self.depth() as usize])
            .expect("unit has constant part")
            .clone();
        let mut x = self.from_base(&c0.inv_unit()?);
        let two = PrismaticRing::from_int(self, 2);
        for _ in 0..64 {
            let err = Envelope::one(self).sub(&a.mul(&x)?)?;
            if err.is_zero() {
                return Ok(x);
            }
            x = x.mul(&two.sub(&a.mul(&x)?)?)?;
        }
        Err(Error::NotInvertible)
    }
    fn div_exact(&self, a: &EnvElement, b: &EnvElement) -> Result<EnvElement> {
        // divisor restricted to base-ring elements (coefficientwise
        // division) or units
        let zero_mono = vec![0u8; self.depth() as usize];
        if b.terms().len() == 1 {
            if let Some(base) = b.terms().get(&zero_mono) {
                let mut out = self.zero();
                for (m, c) in a.terms() {
                    let q = c.div_exact(base)?;
                    let mut t = std::collections::BTreeMap::new();
                    t.insert(m.clone(), self.ring().one());
                    let mono = EnvElement::from_terms(self.clone(), t);
                    out = out.add(&mono.mul_base(&q)?)?;
                }
                return Ok(out);
            }
        }
        if PrismaticRing::is_unit(self, b) {
            return a.mul(&PrismaticRing::inv_unit(self, b)?);
        }
        Err(Error::NotDivisible)
    }
    fn val_principal(&self, a: &EnvElement, d: &EnvElement) -> Val {
        // d must be a base element; valuation is the min over coefficients
        let zero_mono = vec![0u8; self.depth() as usize];
        let base = match (d.terms().len(), d.terms().get(&zero_mono)) {
            (1, Some(b)) => b.clone(),
            _ => return Val::Exact(0),
        };
        if a.is_zero() {
            return Val::AtLeastCap(self.ring().val_cap());
        }
        let mut best: Option<Val> = None;
        for c in a.terms().values() {
            let v = val(c, &[base.clone()], self.ring().val_cap());
            best = Some(match best {
                None => v,
                Some(b) => {
                    if v.level() < b.level() {
                        v
                    } else {
                        b
                    }
                }
            });
        }
        best.unwrap_or(Val::AtLeastCap(self.ring().val_cap()))
    }
    fn val_cap(&self) -> u32 {
        self.ring().val_cap()
    }
    fn residue(&self, a: &EnvElement) -> u64 {
        a.terms()
            .get(&vec![0u8; self.depth() as usize])
            .map(|c| c.constant_term() % self.ring().p())
            .unwrap_or(0)
    }

    fn flat_dim(&self) -> usize {
        self.ring().dim() * self.mono_count()
    }
    fn coeff_ring(&self) -> ModRing {
        Ring::coeff_ring(self.ring())
    }
    fn flatten(&self, a: &EnvElement) -> Vec<u64> {
        let rd = self.ring().dim();
        let mut out = vec![0u64; self.flat_dim()];
        for (m, c) in a.terms() {
            let mi = self.mono_index(m);
            let v = c.to_vec();
            out[mi * rd..(mi + 1) * rd].copy_from_slice(&v);
        }
        out
    }
    fn unflatten(&self, v: &[u64]) -> EnvElement {
        let rd = self.ring().dim();
        let mut terms = std::collections::BTreeMap::new();
        for mi in 0..self.mono_count() {
            let chunk = &v[mi * rd..(mi + 1) * rd];
            if chunk.iter().any(|&x| x != 0) {
                let c = self.ring().element_from_vec(chunk, self.ring().precision());
                terms.insert(self.mono_from_index(mi), c);
            }
        }
        EnvElement::from_terms(self.clone(), terms)
    }
    fn mul_matrix(&self, a: &EnvElement) -> Result<Mat> {
        let n = self.flat_dim();
        let rd = self.ring().dim();
        let mut cols = Vec::with_capacity(n);
        for mi in 0..self.mono_count() {
            let mono = self.mono_from_index(mi);
            let mut t = std::collections::BTreeMap::new();
            t.insert(mono, self.ring().one());
            let basis_mono = EnvElement::from_terms(self.clone(), t);
            for idx in 0..rd {
                let mut bvec = vec![0u64; rd];
                bvec[idx] = 1;
                let coeff = self.ring().element_from_vec(&bvec, self.ring().precision());
                let b = basis_mono.mul_base(&coeff)?;
                let prod = a.mul(&b)?;
                cols.push(self.flatten(&prod));
            }
        }
        Ok(Mat::from_cols(PrismaticRing::coeff_ring(self), cols))
    }
}

/// Dense matrix over a prismatic ring.
#[derive(Clone, PartialEq)]
pub struct RMat<R: PrismaticRing> {
    pub ring: R,
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<R::El>,
}

impl<R: PrismaticRing> fmt::Debug for RMat<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "RMat {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  [")?;
            for j in 0..self.cols {
                write!(f, "{:?}, ", self.at(i, j))?;
            }
            writeln!(f, "]")?;
        }
        write!(f, "]")
    }
}

impl<R: PrismaticRing> RMat<R> {
    pub fn zero(ring: R, rows: usize, cols: usize) -> Self {
        let data = vec![ring.zero(); rows * cols];
        RMat { ring, rows, cols, data }
    }

    pub fn identity(ring: R, n: usize) -> Self {
        let mut m = RMat::zero(ring.clone(), n, n);
        for i in 0..n {
            m.set(i, i, ring.one());
        }
        m
    }

    pub fn scalar(ring: R, n: usize, c: &R::El) -> Self {
        let mut m = RMat::zero(ring, n, n);
        for i in 0..n {
            m.set(i, i, c.clone());
        }
        m
    }

    pub fn from_rows(ring: R, rows: Vec<Vec<R::El>>) -> Self {
        let r = rows.len();
        let c = rows.first().map(|v| v.len()).unwrap_or(0);
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c);
            data.extend(row);
        }
        RMat { ring, rows: r, cols: c, data }
    }

    pub fn at(&self, i: usize, j: usize) -> &R::El {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: R::El) {
        self.data[i * self.cols + j] = v;
    }

    pub fn col(&self, j: usize) -> Vec<R::El> {
        (0..self.rows).map(|i| self.at(i, j).clone()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut out = RMat::zero(self.ring.clone(), self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.at(i, j).clone());
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = RMat::zero(self.ring.clone(), self.rows, self.cols);
        for i in 0..self.data.len() {
            out.data[i] = self.ring.add(&self.data[i], &other.data[i])?;
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = RMat::zero(self.ring.clone(), self.rows, self.cols);
        for i in 0..self.data.len() {
            out.data[i] = self.ring.sub(&self.data[i], &other.data[i])?;
        }
        Ok(out)
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        assert_eq!(self.cols, other.rows);
        let mut out = RMat::zero(self.ring.clone(), self.rows, other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = self.ring.zero();
                for k in 0..self.cols {
                    let t = self.ring.mul(self.at(i, k), other.at(k, j))?;
                    acc = self.ring.add(&acc, &t)?;
                }
                out.set(i, j, acc);
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: &R::El) -> Result<Self> {
        let mut out = RMat::zero(self.ring.clone(), self.rows, self.cols);
        for i in 0..self.data.len() {
            out.data[i] = self.ring.mul(&self.data[i], c)?;
        }
        Ok(out)
    }

    /// Entrywise Frobenius; the matrix of the phi-twist of a semilinear map.
    pub fn map_phi(&self) -> Result<Self> {
        let mut out = RMat::zero(self.ring.clone(), self.rows, self.cols);
        for i in 0..self.data.len() {
            out.data[i] = self.ring.phi(&self.data[i])?;
        }
        Ok(out)
    }

    /// Apply as a phi-semilinear map: (self . phi(v)).
    pub fn apply_semilinear(&self, v: &[R::El]) -> Result<Vec<R::El>> {
        assert_eq!(v.len(), self.cols);
        let mut out = Vec::with_capacity(self.rows);
        for i in 0..self.rows {
            let mut acc = self.ring.zero();
            for k in 0..self.cols {
                let t = self.ring.mul(self.at(i, k), &self.ring.phi(&v[k])?)?;
                acc = self.ring.add(&acc, &t)?;
            }
            out.push(acc);
        }
        Ok(out)
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|e| self.ring.is_zero(e))
    }

    /// Gauss-Jordan over the local ring; pivots must be units.
    pub fn inverse(&self) -> Result<Self> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let ring = self.ring.clone();
        let mut a = self.clone();
        let mut inv = RMat::identity(ring.clone(), n);
        for col in 0..n {
            let piv = (col..n).find(|&i| ring.is_unit(a.at(i, col)));
            let Some(piv) = piv else { return Err(Error::NotInvertible) };
            if piv != col {
                for j in 0..n {
                    let x = a.at(piv, j).clone();
                    let y = a.at(col, j).clone();
                    a.set(piv, j, y);
                    a.set(col, j, x);
                    let x = inv.at(piv, j).clone();
                    let y = inv.at(col, j).clone();
                    inv.set(piv, j, y);
                    inv.set(col, j, x);
                }
            }
            let pinv = ring.inv_unit(a.at(col, col))?;
            for j in 0..n {
                a.set(col, j, ring.mul(a.at(col, j), &pinv)?);
                inv.set(col, j, ring.mul(inv.at(col, j), &pinv)?);
            }
            for i in 0..n {
                if i == col || ring.is_zero(a.at(i, col)) {
                    continue;
                }
                let f = a.at(i, col).clone();
                for j in 0..n {
                    let t = ring.mul(&f, a.at(col, j))?;
                    a.set(i, j, ring.sub(a.at(i, j), &t)?);
                    let t = ring.mul(&f, inv.at(col, j))?;
                    inv.set(i, j, ring.sub(inv.at(i, j), &t)?);
                }
            }
        }
        Ok(inv)
    }

    pub fn is_invertible(&self) -> bool {
        self.inverse().is_ok()
    }

    /// Determinant by cofactor expansion; ranks here stay tiny.
    pub fn det(&self) -> Result<R::El> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        match n {
            0 => Ok(self.ring.one()),
            1 => Ok(self.at(0, 0).clone()),
            _ => {
                let mut acc = self.ring.zero();
                for j in 0..n {
                    let minor = self.minor(0, j);
                    let mut term = self.ring.mul(self.at(0, j), &minor.det()?)?;
                    if j % 2 == 1 {
                        term = self.ring.neg(&term);
                    }
                    acc = self.ring.add(&acc, &term)?;
                }
                Ok(acc)
            }
        }
    }

    fn minor(&self, row: usize, col: usize) -> Self {
        let mut out = RMat::zero(self.ring.clone(), self.rows - 1, self.cols - 1);
        let mut ii = 0;
        for i in 0..self.rows {
            if i == row {
                continue;
            }
            let mut jj = 0;
            for j in 0..self.cols {
                if j == col {
                    continue;
                }
                out.set(ii, jj, self.at(i, j).clone());
                jj += 1;
            }
            ii += 1;
        }
        out
    }

    /// Adjugate: adj * self = det * id.
    pub fn adjugate(&self) -> Result<Self> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        if n == 1 {
            return Ok(RMat::identity(self.ring.clone(), 1));
        }
        let mut out = RMat::zero(self.ring.clone(), n, n);
        for i in 0..n {
            for j in 0..n {
                let mut c = self.minor(i, j).det()?;
                if (i + j) % 2 == 1 {
                    c = self.ring.neg(&c);
                }
                out.set(j, i, c);
            }
        }
        Ok(out)
    }

    /// Rank of the residue matrix over F_p.
    pub fn residue_rank(&self) -> usize {
        let p = self.ring.coeff_ring().p;
        let fp = ModRing::new(p, 1).expect("prime fits");
        let mut m = Mat::zero(fp, self.rows, self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m.set(i, j, self.ring.residue(self.at(i, j)));
            }
        }
        m.rank_mod_p()
    }

    /// Flatten the matrix-to-vector map x -> A x into Z/p^N coordinates and
    /// solve A X = B columnwise, deterministically.
    pub fn solve_right(&self, rhs: &RMat<R>) -> Result<RMat<R>> {
        assert_eq!(self.rows, rhs.rows);
        let ring = &self.ring;
        let fd = ring.flat_dim();
        let cr = ring.coeff_ring();
        let big_rows = self.rows * fd;
        let big_cols = self.cols * fd;
        let mut big = Mat::zero(cr, big_rows, big_cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let block = ring.mul_matrix(self.at(i, k))?;
                for r in 0..fd {
                    for c in 0..fd {
                        let v = block.at(r, c);
                        if v != 0 {
                            big.set(i * fd + r, k * fd + c, v);
                        }
                    }
                }
            }
        }
        let mut out = RMat::zero(ring.clone(), self.cols, rhs.cols);
        for j in 0..rhs.cols {
            let mut b = Vec::with_capacity(big_rows);
            for i in 0..self.rows {
                b.extend(ring.flatten(rhs.at(i, j)));
            }
            let (x, _) = linalg::solve(&big, &b).ok_or(Error::NotDivisible)?;
            for k in 0..self.cols {
                out.set(k, j, ring.unflatten(&x[k * fd..(k + 1) * fd]));
            }
        }
        Ok(out)
    }

    /// Entrywise exact division.
    pub fn div_exact_entrywise(&self, d: &R::El) -> Result<Self> {
        let mut out = RMat::zero(self.ring.clone(), self.rows, self.cols);
        for i in 0..self.data.len() {
            out.data[i] = self.ring.div_exact(&self.data[i], d)?;
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::RingSpec;

    fn zp() -> Ring {
        Ring::new(RingSpec::zp(2, 6)).unwrap()
    }

    #[test]
    fn inverse_roundtrip() {
        let r = zp();
        let m = RMat::from_rows(
            r.clone(),
            vec![
                vec![r.from_int(1), r.from_int(2)],
                vec![r.from_int(4), r.from_int(3)],
            ],
        );
        let inv = m.inverse().unwrap();
        assert_eq!(m.matmul(&inv).unwrap(), RMat::identity(r, 2));
    }

    #[test]
    fn det_and_adjugate() {
        let r = zp();
        let m = RMat::from_rows(
            r.clone(),
            vec![
                vec![r.from_int(2), r.from_int(1), r.from_int(0)],
                vec![r.from_int(0), r.from_int(1), r.from_int(3)],
                vec![r.from_int(1), r.from_int(0), r.from_int(1)],
            ],
        );
        let det = m.det().unwrap();
        let adj = m.adjugate().unwrap();
        let prod = adj.matmul(&m).unwrap();
        assert_eq!(prod, RMat::scalar(r, 3, &det));
    }

    #[test]
    fn solve_right_finds_witness() {
        let r = zp();
        // phi = diag(2, 1): solve phi * x = 2 * id
        let phi = RMat::from_rows(
            r.clone(),
            vec![
                vec![r.from_int(2), r.from_int(0)],
                vec![r.from_int(0), r.from_int(1)],
            ],
        );
        let rhs = RMat::scalar(r.clone(), 2, &r.from_int(2));
        let x = phi.solve_right(&rhs).unwrap();
        assert_eq!(phi.matmul(&x).unwrap(), rhs);
    }
}
