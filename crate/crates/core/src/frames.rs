//! Frames and windows: the divided-Frobenius structures attached to an
//! oriented prism, normal decompositions, the window <-> minuscule
//! Breuil-Kisin correspondence, and fixed-point / morphism lifting along
//! ideals on which the divided Frobenius is topologically nilpotent.

use crate::error::{Error, Result};
use crate::linalg::{self, Mat};
use crate::ring::{Element, Ring};
use crate::semilinear::{PrismaticRing, RMat};
use crate::witt::Prism;
use serde::Serialize;

/// Which divided Frobenius a frame carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FrameFlavor {
    /// Fil A = (d), phi_1(d x) = phi(x), pi = phi(d).
    PrismD,
    /// Fil A = Nygaard^(>=1), phi_1 = phi/d, pi = d.
    Nygaard,
}

/// A frame (A, Fil A, phi, phi_1) with phi = pi * phi_1 on Fil A.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame<R: PrismaticRing> {
    pub ring: R,
    pub flavor: FrameFlavor,
    /// Orientation element d.
    pub d: R::El,
    /// Generators of Fil A at working precision.
    pub fil_gens: Vec<R::El>,
    /// pi with phi = pi * phi_1 on Fil A.
    pub pi: R::El,
}

impl<R: PrismaticRing> Frame<R> {
    /// The d-flavor frame of an oriented prism-like pair.
    pub fn prism_d(ring: R, d: R::El) -> Result<Frame<R>> {
        let pi = ring.phi(&d)?;
        Ok(Frame { ring, flavor: FrameFlavor::PrismD, fil_gens: vec![d.clone()], d, pi })
    }

    /// Divided Frobenius on a filtration element.
    pub fn phi1(&self, f: &R::El) -> Result<R::El> {
        match self.flavor {
            FrameFlavor::PrismD => {
                let a = self.ring.div_exact(f, &self.d)?;
                self.ring.phi(&a)
            }
            FrameFlavor::Nygaard => {
                let pf = self.ring.phi(f)?;
                self.ring.div_exact(&pf, &self.d)
            }
        }
    }

    /// phi(f) = pi * phi_1(f), tested exactly.
    pub fn frame_identity_holds(&self, f: &R::El) -> Result<bool> {
        let lhs = self.ring.phi(f)?;
        let rhs = self.ring.mul(&self.pi, &self.phi1(f)?)?;
        Ok(lhs == rhs)
    }

    /// A random-ish element of Fil A from coefficients.
    pub fn fil_element(&self, coeffs: &[R::El]) -> Result<R::El> {
        assert_eq!(coeffs.len(), self.fil_gens.len());
        let mut acc = self.ring.zero();
        for (g, c) in self.fil_gens.iter().zip(coeffs) {
            acc = self.ring.add(&acc, &self.ring.mul(g, c)?)?;
        }
        Ok(acc)
    }
}

/// d-flavor or Nygaard-flavor frame of a catalog prism. The Nygaard
/// filtration is computed at working precision as the kernel of
/// x -> phi(x) mod (d).
pub fn frame_from_prism(prism: &Prism, flavor: FrameFlavor) -> Result<Frame<Ring>> {
    let ring = prism.ring().clone();
    let d = prism.d.clone();
    match flavor {
        FrameFlavor::PrismD => Frame::prism_d(ring, d),
        FrameFlavor::Nygaard => {
            let gens = nygaard_fil_gens(prism)?;
            let pi = d.clone();
            Ok(Frame { ring, flavor: FrameFlavor::Nygaard, d, fil_gens: gens, pi })
        }
    }
}

/// Generators of Nygaard^(>=1) = phi^(-1)((d)) at working precision.
pub fn nygaard_fil_gens(prism: &Prism) -> Result<Vec<Element>> {
    let ring = prism.ring().clone();
    let n = ring.dim();
    let cr = ring.coeff_ring();
    // matrix of phi on flat coordinates
    let mut phi_cols = Vec::with_capacity(n);
    for idx in 0..n {
        let mut b = vec![0u64; n];
        b[idx] = 1;
        let e = ring.element_from_vec(&b, ring.precision());
        phi_cols.push(e.frobenius().to_vec());
    }
    let phi_mat = Mat::from_cols(cr, phi_cols);
    // columns spanning (d) as a module
    let mut d_cols = Vec::with_capacity(n);
    for idx in 0..n {
        let mut b = vec![0u64; n];
        b[idx] = 1;
        let e = ring.element_from_vec(&b, ring.precision());
        d_cols.push(prism.d.mul(&e)?.to_vec());
    }
    let d_mat = Mat::from_cols(cr, d_cols);
    let kernel = linalg::kernel_mod_span(&phi_mat, &d_mat);
    let mut gens: Vec<Element> = kernel
        .into_iter()
        .map(|v| ring.element_from_vec(&v, ring.precision()))
        .collect();
    gens.retain(|g| !g.is_zero());
    if gens.is_empty() {
        gens.push(ring.zero());
    }
    Ok(gens)
}

/// The Witt frame W_n(F_p) = Z/p^n with F_1 inverting the Verschiebung:
/// the d-flavor frame of the crystalline prism at precision n.
pub fn witt_frame(p: u64, n: u32) -> Result<Frame<Ring>> {
    let ring = Ring::new(crate::ring::RingSpec::zp(p, n))?;
    let d = ring.from_int(p as i64);
    Frame::prism_d(ring, d)
}

/// A window in normal form: M = A^h with a basis split into L and T parts
/// and an invertible structure matrix psi. The derived data is
/// phi_M = [pi * psi_L | psi_T] and phi_(M,1)|_L = psi_L.
#[derive(Debug, Clone, PartialEq)]
pub struct Window<R: PrismaticRing> {
    pub frame: Frame<R>,
    pub h: usize,
    /// true = basis vector belongs to L (filtration part).
    pub is_l: Vec<bool>,
    pub psi: RMat<R>,
}

impl<R: PrismaticRing> Window<R> {
    /// Assemble a window from a normal decomposition and an isomorphism psi.
    pub fn from_normal(frame: Frame<R>, is_l: Vec<bool>, psi: RMat<R>) -> Result<Window<R>> {
        let h = is_l.len();
        assert_eq!((psi.rows, psi.cols), (h, h));
        if !psi.is_invertible() {
            return Err(Error::NonInvertiblePsi);
        }
        Ok(Window { frame, h, is_l, psi })
    }

    pub fn l_indices(&self) -> Vec<usize> {
        (0..self.h).filter(|&i| self.is_l[i]).collect()
    }

    pub fn t_indices(&self) -> Vec<usize> {
        (0..self.h).filter(|&i| !self.is_l[i]).collect()
    }

    /// Matrix of phi_M.
    pub fn phi_m(&self) -> Result<RMat<R>> {
        let ring = &self.frame.ring;
        let mut out = RMat::zero(ring.clone(), self.h, self.h);
        for j in 0..self.h {
            for i in 0..self.h {
                let v = if self.is_l[j] {
                    ring.mul(&self.frame.pi, self.psi.at(i, j))?
                } else {
                    self.psi.at(i, j).clone()
                };
                out.set(i, j, v);
            }
        }
        Ok(out)
    }

    /// Matrix of phi_(M,1) on the L-part (columns indexed by L positions).
    pub fn phi1_l(&self) -> RMat<R> {
        let l = self.l_indices();
        let ring = &self.frame.ring;
        let mut out = RMat::zero(ring.clone(), self.h, l.len());
        for (pos, &j) in l.iter().enumerate() {
            for i in 0..self.h {
                out.set(i, pos, self.psi.at(i, j).clone());
            }
        }
        out
    }

    /// phi_(M,1) on the generator g * e_j for j in T.
    pub fn phi1_t_gen(&self, gen_idx: usize, j: usize) -> Result<Vec<R::El>> {
        let g = &self.frame.fil_gens[gen_idx];
        let c = self.frame.phi1(g)?;
        let phi_m = self.phi_m()?;
        let ring = &self.frame.ring;
        (0..self.h)
            .map(|i| ring.mul(&c, phi_m.at(i, j)))
            .collect()
    }
}

/// Per-axiom verdicts for a window candidate.
#[derive(Debug, Clone, Serialize)]
pub struct WindowReport {
    /// phi_(M,1)(a m) = phi_1(a) phi_M(m) on generators.
    pub semilinear_compat: bool,
    /// phi_M = pi phi_(M,1) on Fil M generators.
    pub pi_compat: bool,
    /// phi_(M,1)(Fil M) + phi_M(M) generates M.
    pub generation: bool,
    pub failures: Vec<String>,
}

impl WindowReport {
    pub fn pass(&self) -> bool {
        self.semilinear_compat && self.pi_compat && self.generation
    }
}

/// Raw window data for checking: phi_M plus independent phi_(M,1) tables on
/// the filtration generators (the L basis vectors, and g * e_j for j in T
/// per filtration generator g).
#[derive(Debug, Clone)]
pub struct RawWindow<R: PrismaticRing> {
    pub frame: Frame<R>,
    pub h: usize,
    pub is_l: Vec<bool>,
    pub phi: RMat<R>,
    /// columns = phi_(M,1)(e_i) for i in L order.
    pub phi1_l: RMat<R>,
    /// per filtration generator: columns = phi_(M,1)(g e_j) for j in T order.
    pub phi1_t: Vec<RMat<R>>,
}

impl<R: PrismaticRing> Window<R> {
    pub fn to_raw(&self) -> Result<RawWindow<R>> {
        let t = self.t_indices();
        let mut phi1_t = Vec::new();
        for gen_idx in 0..self.frame.fil_gens.len() {
            let ring = &self.frame.ring;
            let mut m = RMat::zero(ring.clone(), self.h, t.len());
            for (pos, &j) in t.iter().enumerate() {
                let col = self.phi1_t_gen(gen_idx, j)?;
                for i in 0..self.h {
                    m.set(i, pos, col[i].clone());
                }
            }
            phi1_t.push(m);
        }
        Ok(RawWindow {
            frame: self.frame.clone(),
            h: self.h,
            is_l: self.is_l.clone(),
            phi: self.phi_m()?,
            phi1_l: self.phi1_l(),
            phi1_t,
        })
    }
}

/// Check the window axioms on generators, with failure witnesses.
pub fn window_check<R: PrismaticRing>(w: &RawWindow<R>) -> Result<WindowReport> {
    let ring = &w.frame.ring;
    let l: Vec<usize> = (0..w.h).filter(|&i| w.is_l[i]).collect();
    let t: Vec<usize> = (0..w.h).filter(|&i| !w.is_l[i]).collect();
    let mut failures = Vec::new();

    // axiom: phi_(M,1)(a m) = phi_1(a) phi_M(m)
    let mut semilinear_compat = true;
    for (k, g) in w.frame.fil_gens.iter().enumerate() {
        let phi1_g = w.frame.phi1(g)?;
        let phi_g = ring.phi(g)?;
        for (pos, &j) in t.iter().enumerate() {
            for i in 0..w.h {
                let lhs = w.phi1_t[k].at(i, pos).clone();
                let rhs = ring.mul(&phi1_g, w.phi.at(i, j))?;
                if lhs != rhs {
                    semilinear_compat = false;
                    failures.push(format!(
                        "phi1(g{} e{}) component {} differs from phi1(g) phi(e{})",
                        k, j, i, j
                    ));
                }
            }
        }
        for (pos, &i_l) in l.iter().enumerate() {
            for i in 0..w.h {
                let lhs = ring.mul(&phi_g, w.phi1_l.at(i, pos))?;
                let rhs = ring.mul(&phi1_g, w.phi.at(i, i_l))?;
                if lhs != rhs {
                    semilinear_compat = false;
                    failures.push(format!(
                        "phi(g{}) phi1(e{}) != phi1(g{}) phi(e{}) at row {}",
                        k, i_l, k, i_l, i
                    ));
                }
            }
        }
    }

    // axiom: phi_M = pi phi_(M,1) on Fil M generators
    let mut pi_compat = true;
    for (pos, &i_l) in l.iter().enumerate() {
        for i in 0..w.h {
            let lhs = w.phi.at(i, i_l).clone();
            let rhs = ring.mul(&w.frame.pi, w.phi1_l.at(i, pos))?;
            if lhs != rhs {
                pi_compat = false;
                failures.push(format!("phi(e{}) != pi phi1(e{}) at row {}", i_l, i_l, i));
            }
        }
    }
    for (k, g) in w.frame.fil_gens.iter().enumerate() {
        let phi_g = ring.phi(g)?;
        for (pos, &j) in t.iter().enumerate() {
            for i in 0..w.h {
                let lhs = ring.mul(&phi_g, w.phi.at(i, j))?;
                let rhs = ring.mul(&w.frame.pi, w.phi1_t[k].at(i, pos))?;
                if lhs != rhs {
                    pi_compat = false;
                    failures.push(format!(
                        "phi(g{} e{}) != pi phi1(g{} e{}) at row {}",
                        k, j, k, j, i
                    ));
                }
            }
        }
    }

    // axiom: phi_(M,1)(Fil M) + phi_M(M) generates M (residue rank h)
    let cols = w.phi1_l.cols + w.phi1_t.iter().map(|m| m.cols).sum::<usize>() + w.phi.cols;
    let mut gen_mat = RMat::zero(ring.clone(), w.h, cols);
    let mut c = 0;
    for src in std::iter::once(&w.phi1_l).chain(w.phi1_t.iter()).chain(std::iter::once(&w.phi)) {
        for j in 0..src.cols {
            for i in 0..w.h {
                gen_mat.set(i, c, src.at(i, j).clone());
            }
            c += 1;
        }
    }
    let generation = gen_mat.residue_rank() == w.h;
    if !generation {
        failures.push("phi1(Fil M) + phi(M) does not generate M".into());
    }

    Ok(WindowReport { semilinear_compat, pi_compat, generation, failures })
}

/// The normal decomposition stored on the window.
pub fn normal_decomposition<R: PrismaticRing>(w: &Window<R>) -> (Vec<usize>, Vec<usize>) {
    (w.l_indices(), w.t_indices())
}

/// Rebuild a window from (L, T, psi); with the psi extracted from an
/// existing window this is the identity on the data.
pub fn window_from_normal<R: PrismaticRing>(
    frame: Frame<R>,
    is_l: Vec<bool>,
    psi: RMat<R>,
) -> Result<Window<R>> {
    Window::from_normal(frame, is_l, psi)
}

/// Minuscule Breuil-Kisin module: free module with Frobenius matrix whose
/// cokernel is killed by d.
#[derive(Debug, Clone, PartialEq)]
pub struct BkModule<R: PrismaticRing> {
    pub ring: R,
    pub d: R::El,
    pub h: usize,
    pub mat: RMat<R>,
}

/// Window -> minuscule BK module over the d-flavor frame: the module is
/// Fil M in the basis (e_L, d e_T) and the Frobenius is d * phi_(M,1),
/// which comes out as diag(d 1_L, 1_T) * psi.
pub fn window_to_bk<R: PrismaticRing>(w: &Window<R>) -> Result<BkModule<R>> {
    if w.frame.flavor != FrameFlavor::PrismD {
        return Err(Error::BadInput("window_to_bk needs a d-flavor frame".into()));
    }
    let ring = &w.frame.ring;
    let mut mat = RMat::zero(ring.clone(), w.h, w.h);
    for i in 0..w.h {
        for j in 0..w.h {
            let v = if w.is_l[i] {
                ring.mul(&w.frame.d, w.psi.at(i, j))?
            } else {
                w.psi.at(i, j).clone()
            };
            mat.set(i, j, v);
        }
    }
    Ok(BkModule { ring: ring.clone(), d: w.frame.d.clone(), h: w.h, mat })
}

/// Witness that the cokernel is killed by d: PSI with B PSI = d * Id.
pub fn bk_witness<R: PrismaticRing>(bk: &BkModule<R>) -> Result<RMat<R>> {
    let rhs = RMat::scalar(bk.ring.clone(), bk.h, &bk.d);
    let psi = bk.mat.solve_right(&rhs).map_err(|_| Error::NotMinuscule)?;
    if bk.mat.matmul(&psi)? != rhs {
        return Err(Error::NotMinuscule);
    }
    Ok(psi)
}

/// Inverse of `window_to_bk` on matrices in normal position: rows divisible
/// by d are the L-part; after dividing them by d the matrix must be
/// invertible.
pub fn bk_to_window<R: PrismaticRing>(
    frame: Frame<R>,
    bk: &BkModule<R>,
) -> Result<Window<R>> {
    if frame.flavor != FrameFlavor::PrismD {
        return Err(Error::BadInput("bk_to_window needs a d-flavor frame".into()));
    }
    let ring = &frame.ring;
    let h = bk.h;
    let mut is_l = vec![false; h];
    let mut psi = RMat::zero(ring.clone(), h, h);
    for i in 0..h {
        let mut divided: Vec<R::El> = Vec::with_capacity(h);
        let mut all_div = true;
        for j in 0..h {
            match ring.div_exact(bk.mat.at(i, j), &bk.d) {
                Ok(q) => divided.push(q),
                Err(_) => {
                    all_div = false;
                    break;
                }
            }
        }
        if all_div {
            is_l[i] = true;
            for j in 0..h {
                psi.set(i, j, divided[j].clone());
            }
        } else {
            for j in 0..h {
                psi.set(i, j, bk.mat.at(i, j).clone());
            }
        }
    }
    if !psi.is_invertible() {
        return Err(Error::NotMinuscule);
    }
    Window::from_normal(frame, is_l, psi)
}

/// A window morphism candidate: an h_N x h_M matrix commuting with the
/// Frobenii and respecting the filtrations.
pub fn is_window_morphism<R: PrismaticRing>(
    src: &Window<R>,
    dst: &Window<R>,
    alpha: &RMat<R>,
) -> Result<bool> {
    // commutes with phi_M: alpha . phi_src = phi_dst . phi(alpha)
    let lhs = alpha.matmul(&src.phi_m()?)?;
    let rhs = dst.phi_m()?.matmul(&alpha.map_phi()?)?;
    if lhs != rhs {
        return Ok(false);
    }
    // maps Fil M into Fil N: alpha(e_i), i in L_src, must have T_dst
    // entries in Fil A
    for &i in src.l_indices().iter() {
        for r in dst.t_indices() {
            let entry = alpha.at(r, i);
            // membership in (fil gens): try exact division by each
            // generator combination; for principal filtrations this is a
            // single division
            let mut ok = false;
            for g in &dst.frame.fil_gens {
                if dst.frame.ring.div_exact(entry, g).is_ok() {
                    ok = true;
                    break;
                }
            }
            if dst.frame.ring.is_zero(entry) {
                ok = true;
            }
            if !ok {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Certify that phi is pointwise topologically nilpotent on the span of
/// `j_gens`: every generator's phi-orbit reaches 0 within `max_iter`.
pub fn phi_nilpotence_witness<R: PrismaticRing>(
    ring: &R,
    j_gens: &[R::El],
    max_iter: u32,
) -> Result<Vec<u32>> {
    let mut steps = Vec::new();
    for g in j_gens {
        let mut x = g.clone();
        let mut n = 0;
        loop {
            if ring.is_zero(&x) {
                break;
            }
            if n >= max_iter {
                return Err(Error::NoConvergenceWitness);
            }
            x = ring.phi(&x).map_err(|_| Error::NoConvergenceWitness)?;
            n += 1;
        }
        steps.push(n);
    }
    Ok(steps)
}

/// Certify that phi_1 = phi/d is pointwise topologically nilpotent on the
/// span of `j_gens`.
pub fn phi1_nilpotence_witness<R: PrismaticRing>(
    frame: &Frame<R>,
    j_gens: &[R::El],
    max_iter: u32,
) -> Result<Vec<u32>> {
    let ring = &frame.ring;
    let mut steps = Vec::new();
    for g in j_gens {
        let mut x = g.clone();
        let mut n = 0;
        loop {
            if ring.is_zero(&x) {
                break;
            }
            if n >= max_iter {
                return Err(Error::NoConvergenceWitness);
            }
            let px = ring.phi(&x).map_err(|_| Error::NoConvergenceWitness)?;
            x = ring
                .div_exact(&px, &frame.d)
                .map_err(|_| Error::NoConvergenceWitness)?;
            n += 1;
        }
        steps.push(n);
    }
    Ok(steps)
}

/// Unique fixed point of a semilinear phi_M congruent to m_bar modulo J M,
/// by summing the orbit of z = phi_M(m_bar) - m_bar.
pub fn lift_phi_invariant<R: PrismaticRing>(
    ring: &R,
    phi_mat: &RMat<R>,
    j_gens: &[R::El],
    m_bar: &[R::El],
    max_iter: u32,
) -> Result<Vec<R::El>> {
    phi_nilpotence_witness(ring, j_gens, max_iter)?;
    let apply = |v: &[R::El]| -> Result<Vec<R::El>> { phi_mat.apply_semilinear(v) };
    let mut z: Vec<R::El> = {
        let fv = apply(m_bar)?;
        fv.iter()
            .zip(m_bar)
            .map(|(a, b)| ring.sub(a, b))
            .collect::<Result<Vec<_>>>()?
    };
    let mut m = m_bar.to_vec();
    let mut iter = 0;
    while z.iter().any(|e| !ring.is_zero(e)) {
        if iter >= max_iter {
            return Err(Error::NoConvergenceWitness);
        }
        for (slot, inc) in m.iter_mut().zip(z.iter()) {
            *slot = ring.add(slot, inc)?;
        }
        z = apply(&z)?;
        iter += 1;
    }
    // verify the defining equation exactly
    let fm = apply(&m)?;
    if fm != m {
        return Err(Error::LiftFailed);
    }
    Ok(m)
}

/// Lift a mod-J morphism of minuscule BK modules to an exact one, by the
/// contraction U(beta) = (1/d) B_dst phi(beta) PSI_src.
pub fn lift_bk_morphism<R: PrismaticRing>(
    src: &BkModule<R>,
    dst: &BkModule<R>,
    alpha: &RMat<R>,
    max_iter: u32,
) -> Result<RMat<R>> {
    let psi_src = bk_witness(src)?;
    let u = |gamma: &RMat<R>| -> Result<RMat<R>> {
        let num = dst.mat.matmul(&gamma.map_phi()?)?.matmul(&psi_src)?;
        num.div_exact_entrywise(&src.d)
    };
    // beta = U(alpha) - alpha
    let mut beta = u(alpha)?.sub(alpha)?;
    let mut lifted = alpha.clone();
    let mut iter = 0;
    while !beta.is_zero() {
        if iter >= max_iter {
            return Err(Error::NoConvergenceWitness);
        }
        lifted = lifted.add(&beta)?;
        beta = u(&beta)?;
        iter += 1;
    }
    // exact equivariance: lifted . B_src = B_dst . phi(lifted)
    let lhs = lifted.matmul(&src.mat)?;
    let rhs = dst.mat.matmul(&lifted.map_phi()?)?;
    if lhs != rhs {
        return Err(Error::LiftFailed);
    }
    Ok(lifted)
}

/// Lift a window morphism given modulo J (J phi_1-stable with a nilpotence
/// certificate) to an exact window morphism over the d-flavor frame,
/// through the BK side.
pub fn lift_window_hom<R: PrismaticRing>(
    src: &Window<R>,
    dst: &Window<R>,
    alpha_bk: &RMat<R>,
    j_gens: &[R::El],
    max_iter: u32,
) -> Result<RMat<R>> {
    phi1_nilpotence_witness(&src.frame, j_gens, max_iter)?;
    let src_bk = window_to_bk(src)?;
    let dst_bk = window_to_bk(dst)?;
    lift_bk_morphism(&src_bk, &dst_bk, alpha_bk, max_iter)
}

/// Morphisms of frames: a ring map kappa with kappa(Fil A) in Fil A' and
/// kappa . phi_1 = c . phi_1' . kappa on the filtration.
pub struct FrameMorphism<R: PrismaticRing, S: PrismaticRing> {
    pub source: Frame<R>,
    pub target: Frame<S>,
    pub kappa: Box<dyn Fn(&R::El) -> Result<S::El>>,
    /// unit c; 1 for strict morphisms.
    pub c: S::El,
}

impl<R: PrismaticRing, S: PrismaticRing> FrameMorphism<R, S> {
    /// Compatibility on the filtration generators.
    pub fn check_on_generators(&self) -> Result<bool> {
        let tring = &self.target.ring;
        for g in &self.source.fil_gens {
            let kg = (self.kappa)(g)?;
            // kappa(Fil A) in Fil A': witnessed by divisibility against the
            // target generators (principal case) or zero
            let mut in_fil = tring.is_zero(&kg);
            for tg in &self.target.fil_gens {
                if tring.div_exact(&kg, tg).is_ok() {
                    in_fil = true;
                    break;
                }
            }
            if !in_fil {
                return Ok(false);
            }
            // kappa(phi_1(g)) = c * phi_1'(kappa(g))
            let lhs = (self.kappa)(&self.source.phi1(g)?)?;
            let rhs = tring.mul(&self.c, &self.target.phi1(&kg)?)?;
            if lhs != rhs {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::RingSpec;

    fn crystalline() -> Prism {
        Prism::crystalline(Ring::new(RingSpec::zp(2, 6)).unwrap()).unwrap()
    }

    fn bk_prism() -> Prism {
        let ring = Ring::new(RingSpec::with_u(2, 6, 8)).unwrap();
        let e = ring.var_u().unwrap().sub(&ring.from_int(2)).unwrap();
        Prism::breuil_kisin(ring, e).unwrap()
    }

    #[test]
    fn d_frame_of_crystalline_prism() {
        let p = crystalline();
        let f = frame_from_prism(&p, FrameFlavor::PrismD).unwrap();
        // phi_1(p * a) = a
        let a = f.ring.from_int(5);
        let pa = f.ring.from_int(10);
        assert!(f.phi1(&pa).unwrap().eq_at_shared_precision(&a));
        assert!(f.frame_identity_holds(&pa).unwrap());
        assert_eq!(f.pi, f.ring.from_int(2));
    }

    #[test]
    fn nygaard_frame_of_crystalline_prism_is_p() {
        let p = crystalline();
        let f = frame_from_prism(&p, FrameFlavor::Nygaard).unwrap();
        // Nygaard^(>=1) = (p) here
        let span_p = crate::linalg::Span::new(
            f.ring.coeff_ring(),
            1,
            vec![vec![2u64]],
        );
        for g in &f.fil_gens {
            assert!(span_p.contains(&g.to_vec()), "gen {} outside (p)", g);
        }
        assert!(f.fil_gens.iter().any(|g| !g.is_zero()));
    }

    #[test]
    fn nygaard_fil_of_bk_prism() {
        // for E = u - 2, phi^(-1)((E)) = (u - 4) at working precision
        let p = bk_prism();
        let gens = nygaard_fil_gens(&p).unwrap();
        let ring = p.ring().clone();
        let u4 = ring.var_u().unwrap().sub(&ring.from_int(4)).unwrap();
        let n = ring.dim();
        let mut rows = Vec::new();
        for idx in 0..n {
            let mut b = vec![0u64; n];
            b[idx] = 1;
            let e = ring.element_from_vec(&b, ring.precision());
            rows.push(u4.mul(&e).unwrap().to_vec());
        }
        let span = crate::linalg::Span::new(ring.coeff_ring(), n, rows);
        for g in &gens {
            assert!(span.contains(&g.to_vec()), "gen {} outside (u-4)", g);
        }
        // u - 4 is itself in the computed filtration
        let gen_rows: Vec<Vec<u64>> = {
            let mut out = Vec::new();
            for g in &gens {
                for idx in 0..n {
                    let mut b = vec![0u64; n];
                    b[idx] = 1;
                    let e = ring.element_from_vec(&b, ring.precision());
                    out.push(g.mul(&e).unwrap().to_vec());
                }
            }
            out
        };
        let gspan = crate::linalg::Span::new(ring.coeff_ring(), n, gen_rows);
        assert!(gspan.contains(&u4.to_vec()));
    }

    #[test]
    fn witt_frame_examples() {
        let f = witt_frame(2, 4).unwrap();
        let a = f.ring.from_int(3);
        let pa = f.ring.from_int(6);
        assert!(f.phi1(&pa).unwrap().eq_at_shared_precision(&a));
        // degenerate n = 1 accepted
        let f1 = witt_frame(2, 1).unwrap();
        assert!(f1.d.is_zero());
    }

    #[test]
    fn unit_window_passes_all_axioms() {
        for flavor in [FrameFlavor::PrismD, FrameFlavor::Nygaard] {
            let p = crystalline();
            let f = frame_from_prism(&p, flavor).unwrap();
            let psi = RMat::identity(f.ring.clone(), 1);
            let w = Window::from_normal(f, vec![true], psi).unwrap();
            let report = window_check(&w.to_raw().unwrap()).unwrap();
            assert!(report.pass(), "{:?}", report.failures);
        }
    }

    #[test]
    fn broken_divided_frobenius_fails_generation() {
        // (M = Z_p, Fil M = p Z_p, phi = id, phi1(pa) = p a) over the
        // crystalline d-frame: generation fails
        let p = crystalline();
        let f = frame_from_prism(&p, FrameFlavor::PrismD).unwrap();
        let ring = f.ring.clone();
        let raw = RawWindow {
            frame: f.clone(),
            h: 1,
            is_l: vec![false],
            phi: RMat::identity(ring.clone(), 1),
            phi1_l: RMat::zero(ring.clone(), 1, 0),
            phi1_t: vec![RMat::from_rows(ring.clone(), vec![vec![ring.from_int(2)]])],
        };
        let report = window_check(&raw).unwrap();
        assert!(!report.pass());
        assert!(!report.generation || !report.semilinear_compat);

        // the honest phi1(pa) = a passes
        let raw = RawWindow {
            frame: f,
            h: 1,
            is_l: vec![false],
            phi: RMat::identity(ring.clone(), 1),
            phi1_l: RMat::zero(ring.clone(), 1, 0),
            phi1_t: vec![RMat::identity(ring.clone(), 1)],
        };
        let report = window_check(&raw).unwrap();
        assert!(report.pass(), "{:?}", report.failures);
    }

    #[test]
    fn window_bk_roundtrip() {
        let p = bk_prism();
        let f = frame_from_prism(&p, FrameFlavor::PrismD).unwrap();
        let ring = f.ring.clone();
        let u = ring.var_u().unwrap();
        let psi = RMat::from_rows(
            ring.clone(),
            vec![
                vec![ring.from_int(1), u.clone()],
                vec![ring.from_int(2), ring.from_int(1)],
            ],
        );
        let w = Window::from_normal(f.clone(), vec![true, false], psi).unwrap();
        let bk = window_to_bk(&w).unwrap();
        // L-row scaled by d
        assert_eq!(bk.mat.at(0, 0), &f.d);
        let back = bk_to_window(f.clone(), &bk).unwrap();
        assert_eq!(back.is_l, w.is_l);
        assert_eq!(back.psi, w.psi);
        // witness
        let wit = bk_witness(&bk).unwrap();
        let rhs = RMat::scalar(ring.clone(), 2, &f.d);
        assert_eq!(bk.mat.matmul(&wit).unwrap(), rhs);
    }

    #[test]
    fn non_minuscule_rejected() {
        let p = crystalline();
        let f = frame_from_prism(&p, FrameFlavor::PrismD).unwrap();
        let ring = f.ring.clone();
        // phi = d^2: row divisible by d, psi = (d) not invertible
        let bk = BkModule {
            ring: ring.clone(),
            d: f.d.clone(),
            h: 1,
            mat: RMat::from_rows(ring.clone(), vec![vec![ring.from_int(4)]]),
        };
        assert_eq!(bk_to_window(f, &bk).unwrap_err(), Error::NotMinuscule);
    }

    #[test]
    fn non_invertible_psi_rejected() {
        let p = crystalline();
        let f = frame_from_prism(&p, FrameFlavor::PrismD).unwrap();
        let ring = f.ring.clone();
        let psi = RMat::from_rows(ring.clone(), vec![vec![f.d.clone()]]);
        assert_eq!(
            Window::from_normal(f, vec![true], psi).unwrap_err(),
            Error::NonInvertiblePsi
        );
    }

    #[test]
    fn truncation_is_a_strict_frame_morphism() {
        // W_6 -> W_4 by reducing coefficients, with c = 1
        let src = witt_frame(2, 6).unwrap();
        let dst = witt_frame(2, 4).unwrap();
        let target = dst.ring.clone();
        let morphism = FrameMorphism {
            source: src,
            target: dst.clone(),
            kappa: Box::new(move |x: &Element| {
                Ok(target.from_int((x.constant_term() % 16) as i64))
            }),
            c: dst.ring.one(),
        };
        assert!(morphism.check_on_generators().unwrap());
    }

    #[test]
    fn lift_fixed_point_trivial_cases() {
        let p = crystalline();
        let ring = p.ring().clone();
        let phi = RMat::identity(ring.clone(), 1);
        // m already fixed: z = 0
        let m = vec![ring.from_int(3)];
        let lifted = lift_phi_invariant(&ring, &phi, &[ring.zero()], &m, 16).unwrap();
        assert_eq!(lifted, m);
    }

    fn envelope_setup(depth: u32) -> crate::envelope::Envelope {
        let p = bk_prism();
        let x = p.ring().var_u().unwrap();
        crate::envelope::envelope_build(&p, &x, depth).unwrap()
    }

    #[test]
    fn lift_fixed_point_over_envelope_kernel() {
        use crate::envelope::Envelope;
        let env = envelope_setup(3);
        let j_gens: Vec<_> = (0..2).map(|n| env.gen(n).unwrap()).collect();
        let phi = RMat::identity(env.clone(), 2);
        let m_true = vec![
            PrismaticRing::from_int(&env, 3),
            PrismaticRing::from_int(&env, 5),
        ];
        // perturb by kernel elements
        let u = env.ring().var_u().unwrap();
        let pert = vec![
            env.gen(0).unwrap().mul_base(&u).unwrap(),
            env.gen(1).unwrap().scale(3),
        ];
        let m_bar: Vec<_> = m_true
            .iter()
            .zip(&pert)
            .map(|(a, b)| a.add(b).unwrap())
            .collect();
        let lifted = lift_phi_invariant(&env, &phi, &j_gens, &m_bar, 32).unwrap();
        // the unique fixed point congruent to m_bar is the unperturbed one
        assert_eq!(lifted, m_true);

        // independent iteration schedule: resum from a re-perturbed start
        let m_bar2: Vec<_> = m_true
            .iter()
            .zip(&pert)
            .map(|(a, b)| a.add(&b.scale(-1).add(b).unwrap().add(b).unwrap()).unwrap())
            .collect();
        let lifted2 = lift_phi_invariant(&env, &phi, &j_gens, &m_bar2, 32).unwrap();
        assert_eq!(lifted2, m_true);
        let _: &Envelope = &env;
    }

    #[test]
    fn lift_window_hom_over_envelope_kernel() {
        let env = envelope_setup(4);
        let d_env = env.from_base(env.d());
        let frame = Frame::prism_d(env.clone(), d_env).unwrap();
        let j_gens: Vec<_> = (0..4).map(|n| env.gen(n).unwrap()).collect();

        // rank-2 window with base-only psi
        let ring = env.ring().clone();
        let psi = RMat::from_rows(
            env.clone(),
            vec![
                vec![
                    env.from_base(&ring.from_int(1)),
                    env.from_base(&ring.var_u().unwrap()),
                ],
                vec![
                    env.from_base(&ring.from_int(2)),
                    env.from_base(&ring.from_int(1)),
                ],
            ],
        );
        let w = Window::from_normal(frame.clone(), vec![true, false], psi).unwrap();

        // alpha = identity + (kernel perturbation); the unique morphism
        // congruent to it mod J is the identity
        let mut alpha = RMat::identity(env.clone(), 2);
        let pert = env.gen(0).unwrap().scale(3);
        alpha.set(0, 1, pert.clone());
        alpha.set(1, 0, env.gen(1).unwrap());

        let lifted = lift_window_hom(&w, &w, &alpha, &j_gens, 64).unwrap();
        assert_eq!(lifted, RMat::identity(env.clone(), 2));

        // already a morphism: fixed by the lift
        let id = RMat::identity(env.clone(), 2);
        let lifted = lift_window_hom(&w, &w, &id, &j_gens, 64).unwrap();
        assert_eq!(lifted, id);
    }
}
