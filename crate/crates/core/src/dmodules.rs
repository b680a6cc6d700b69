//! Prismatic Dieudonne modules over the catalog prisms: plain, filtered and
//! torsion variants, the standard modules, matrix duality, isogeny
//! cokernels and exactness bookkeeping.

use crate::error::{Error, Result};
use crate::linalg::Span;
use crate::ring::{val, Element, Ring, Val};
use crate::semilinear::{PrismaticRing, RMat};
use crate::witt::{Prism, PrismKind};
use serde::Serialize;

/// Free module with a Frobenius matrix whose linearized cokernel is killed
/// by d.
#[derive(Debug, Clone, PartialEq)]
pub struct DieudonneModule {
    pub prism: Prism,
    pub h: usize,
    pub phi: RMat<Ring>,
}

/// Filtration in normal form: Fil M = L + Nygaard^(>=1) T.
#[derive(Debug, Clone, PartialEq)]
pub struct FilteredDieudonneModule {
    pub dm: DieudonneModule,
    pub is_l: Vec<bool>,
}

/// Torsion module over the crystalline prism (xi = xi-tilde = p, phi = id
/// on coefficients): cokernel of an injective matrix, with phi and psi
/// matrices satisfying phi psi = psi phi = p on the presented module.
#[derive(Debug, Clone, PartialEq)]
pub struct TorsionDieudonneModule {
    pub prism: Prism,
    pub h: usize,
    /// presentation: M = A^h / (columns of pres)
    pub pres: RMat<Ring>,
    pub phi: RMat<Ring>,
    pub psi: RMat<Ring>,
    /// p^n kills the module
    pub torsion_exp: u32,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub checks: Vec<(String, bool)>,
}

impl CheckReport {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|(_, ok)| *ok)
    }

    fn push(&mut self, name: &str, ok: bool) {
        self.checks.push((name.into(), ok));
    }
}

impl DieudonneModule {
    pub fn new(prism: Prism, phi: RMat<Ring>) -> DieudonneModule {
        let h = phi.rows;
        DieudonneModule { prism, h, phi }
    }

    pub fn ring(&self) -> &Ring {
        self.prism.ring()
    }

    /// Witness for the cokernel condition: Psi with Phi Psi = d Id.
    pub fn cokernel_witness(&self) -> Result<RMat<Ring>> {
        let rhs = RMat::scalar(self.ring().clone(), self.h, &self.prism.d);
        let psi = self.phi.solve_right(&rhs)?;
        if self.phi.matmul(&psi)? != rhs {
            return Err(Error::NotDivisible);
        }
        Ok(psi)
    }
}

pub fn dm_check(dm: &DieudonneModule) -> CheckReport {
    let mut report = CheckReport { checks: Vec::new() };
    report.push("cokernel_killed_by_d", dm.cokernel_witness().is_ok());
    report
}

impl FilteredDieudonneModule {
    pub fn l_indices(&self) -> Vec<usize> {
        (0..self.dm.h).filter(|&i| self.is_l[i]).collect()
    }

    pub fn t_indices(&self) -> Vec<usize> {
        (0..self.dm.h).filter(|&i| !self.is_l[i]).collect()
    }
}

pub fn fdm_check(f: &FilteredDieudonneModule) -> Result<CheckReport> {
    let mut report = dm_check(&f.dm);
    let ring = f.dm.ring().clone();
    let d = &f.dm.prism.d;
    let nyg = crate::frames::nygaard_fil_gens(&f.dm.prism)?;

    // phi(Fil M) in d M: columns phi(e_i) for i in L, and phi(g e_j) =
    // phi(g) phi(e_j) for j in T (phi(g) is divisible by d by membership)
    let mut fil_ok = true;
    let mut gen_cols: Vec<Vec<Element>> = Vec::new();
    for &i in &f.l_indices() {
        let col = f.dm.phi.col(i);
        let mut divided = Vec::new();
        for e in &col {
            match e.div_exact(d) {
                Ok(q) => divided.push(q),
                Err(_) => {
                    fil_ok = false;
                    break;
                }
            }
        }
        if divided.len() == col.len() {
            gen_cols.push(divided);
        }
    }
    for g in &nyg {
        let pg = g.frobenius();
        let quot = pg.div_exact(d);
        let Ok(quot) = quot else {
            fil_ok = false;
            continue;
        };
        for &j in &f.t_indices() {
            let col = f.dm.phi.col(j);
            let divided: Result<Vec<Element>> = col.iter().map(|e| e.mul(&quot)).collect();
            match divided {
                Ok(v) => gen_cols.push(v),
                Err(_) => fil_ok = false,
            }
        }
    }
    report.push("phi_fil_in_dM", fil_ok);

    // phi(Fil M) generates d M: the divided columns generate M
    let generated = if fil_ok && !gen_cols.is_empty() {
        let mut m = RMat::zero(ring.clone(), f.dm.h, gen_cols.len());
        for (j, col) in gen_cols.iter().enumerate() {
            for i in 0..f.dm.h {
                m.set(i, j, col[i].clone());
            }
        }
        m.residue_rank() == f.dm.h
    } else {
        false
    };
    report.push("phi_fil_generates_dM", generated);
    Ok(report)
}

pub fn torsion_check(t: &TorsionDieudonneModule) -> Result<CheckReport> {
    let mut report = CheckReport { checks: Vec::new() };
    let ring = t.prism.ring().clone();
    let p_el = ring.from_int(ring.p() as i64);
    let cr = ring.coeff_ring();
    let n = ring.dim();

    if t.prism.kind != PrismKind::Crystalline {
        return Err(Error::BadInput(
            "torsion modules live over the crystalline catalog prism".into(),
        ));
    }

    // presentation span (columns of pres, as flat vectors)
    let mut rows = Vec::new();
    for j in 0..t.pres.cols {
        for idx in 0..n {
            let mut b = vec![0u64; n];
            b[idx] = 1;
            let e = ring.element_from_vec(&b, ring.precision());
            let mut vec_row = Vec::with_capacity(t.h * n);
            for i in 0..t.h {
                vec_row.extend(t.pres.at(i, j).mul(&e)?.to_vec());
            }
            rows.push(vec_row);
        }
    }
    let span = Span::new(cr, t.h * n, rows);

    let flatten_cols = |m: &RMat<Ring>| -> Vec<Vec<u64>> {
        (0..m.cols)
            .map(|j| {
                let mut v = Vec::with_capacity(t.h * n);
                for i in 0..m.rows {
                    v.extend(m.at(i, j).to_vec());
                }
                v
            })
            .collect()
    };

    // injectivity of the presentation: det nonzero with valuation < N
    let det = t.pres.det()?;
    let inj = !det.is_zero()
        && matches!(val(&det, &[p_el.clone()], ring.precision()), Val::Exact(_));
    report.push("presentation_injective", inj);

    // well-definedness: phi and psi stabilize the presentation
    let phi_pres = t.phi.matmul(&t.pres.map_phi()?)?;
    report.push("phi_descends", span.contains_all(&flatten_cols(&phi_pres)));
    let psi_pres = t.psi.matmul(&t.pres.map_phi()?)?;
    report.push("psi_descends", span.contains_all(&flatten_cols(&psi_pres)));

    // phi psi = p and psi phi = p on the presented module
    let pid = RMat::scalar(ring.clone(), t.h, &p_el);
    let lhs = t.phi.matmul(&t.psi.map_phi()?)?.sub(&pid)?;
    report.push("phi_psi_is_xi_tilde", span.contains_all(&flatten_cols(&lhs)));
    let lhs = t.psi.matmul(&t.phi.map_phi()?)?.sub(&pid)?;
    report.push("psi_phi_is_xi", span.contains_all(&flatten_cols(&lhs)));

    // killed by p^n
    let pn = ring.from_int(1).scale(ring.p().pow(t.torsion_exp) as i64);
    let kill = RMat::scalar(ring.clone(), t.h, &pn);
    report.push("killed_by_p_n", span.contains_all(&flatten_cols(&kill)));

    Ok(report)
}

/// The standard module catalog.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum StandardKind {
    Etale,
    Multiplicative,
    QpZpFiltered,
    MuFiltered,
}

/// Standard (filtered) modules: etale(h) has Phi = Id with Fil = Nygaard
/// everywhere; multiplicative(h) has Phi = d Id with Fil = M.
pub fn standard_module(
    kind: StandardKind,
    prism: &Prism,
    h: usize,
) -> Result<FilteredDieudonneModule> {
    let ring = prism.ring().clone();
    let (phi, is_l) = match kind {
        StandardKind::Etale => (RMat::identity(ring.clone(), h), vec![false; h]),
        StandardKind::Multiplicative => {
            (RMat::scalar(ring.clone(), h, &prism.d), vec![true; h])
        }
        StandardKind::QpZpFiltered => {
            if h != 1 {
                return Err(Error::BadInput("rank is 1 for this module".into()));
            }
            (RMat::identity(ring.clone(), 1), vec![false])
        }
        StandardKind::MuFiltered => {
            if h != 1 {
                return Err(Error::BadInput("rank is 1 for this module".into()));
            }
            (RMat::scalar(ring.clone(), 1, &prism.d), vec![true])
        }
    };
    Ok(FilteredDieudonneModule {
        dm: DieudonneModule::new(prism.clone(), phi),
        is_l,
    })
}

/// Dual module: Phi-dual = d (Phi^T)^(-1), computed integrally as
/// unit^(-1) adj(Phi^T) / d^(a-1) where det = unit * d^a.
pub fn dual(dm: &DieudonneModule) -> Result<DieudonneModule> {
    let ring = dm.ring().clone();
    let d = &dm.prism.d;
    let det = dm.phi.det()?;
    if det.is_zero() {
        return Err(Error::NonIntegralDual);
    }
    let a = match val(&det, &[d.clone()], ring.val_cap()) {
        Val::Exact(k) => k,
        Val::AtLeastCap(_) => return Err(Error::NonIntegralDual),
    };
    let unit = det.div_exact(&d.pow(a as u64))?;
    if !unit.is_unit() {
        return Err(Error::NonIntegralDual);
    }
    let unit_inv = unit.inv_unit()?;
    let adj = dm.phi.transpose().adjugate()?;
    // dual = d * adj / det = unit^(-1) * adj / d^(a-1)
    let scaled = adj.scale(&unit_inv)?;
    let dual_phi = if a == 0 {
        scaled.scale(d)?
    } else if a == 1 {
        scaled
    } else {
        scaled.div_exact_entrywise(&d.pow(a as u64 - 1)).map_err(|e| match e {
            Error::NotDivisible => Error::NonIntegralDual,
            other => other,
        })?
    };
    let out = DieudonneModule::new(dm.prism.clone(), dual_phi);
    if dm_check(&out).pass() {
        Ok(out)
    } else {
        Err(Error::NonIntegralDual)
    }
}

/// Cokernel of an injective equivariant isogeny over the crystalline
/// prism, with psi induced by the cokernel witness of the target.
pub fn isogeny_cokernel(
    src: &DieudonneModule,
    dst: &DieudonneModule,
    f: &RMat<Ring>,
) -> Result<TorsionDieudonneModule> {
    if src.prism.kind != PrismKind::Crystalline || dst.prism != src.prism {
        return Err(Error::BadInput(
            "isogeny cokernels live over the crystalline catalog prism".into(),
        ));
    }
    if src.h != dst.h {
        return Err(Error::BadInput("isogeny needs equal ranks".into()));
    }
    let ring = src.ring().clone();
    let p_el = ring.from_int(ring.p() as i64);

    // injective with p-power determinant
    let det = f.det()?;
    let dv = match val(&det, &[p_el.clone()], ring.precision()) {
        Val::Exact(k) => k,
        Val::AtLeastCap(_) => return Err(Error::NotInjective),
    };
    if det.is_zero() || !det.div_exact(&p_el.pow(dv as u64))?.is_unit() {
        return Err(Error::NotInjective);
    }

    // equivariance: f phi_src = phi_dst phi(f)
    let lhs = f.matmul(&src.phi)?;
    let rhs = dst.phi.matmul(&f.map_phi()?)?;
    if lhs != rhs {
        return Err(Error::NotEquivariant);
    }

    let psi = dst.cokernel_witness()?;

    // smallest n with p^n M contained in the image of f
    let cr = ring.coeff_ring();
    let n = ring.dim();
    let mut rows = Vec::new();
    for j in 0..f.cols {
        for idx in 0..n {
            let mut b = vec![0u64; n];
            b[idx] = 1;
            let e = ring.element_from_vec(&b, ring.precision());
            let mut v = Vec::with_capacity(src.h * n);
            for i in 0..src.h {
                v.extend(f.at(i, j).mul(&e)?.to_vec());
            }
            rows.push(v);
        }
    }
    let span = Span::new(cr, src.h * n, rows);
    let mut torsion_exp = None;
    for t in 0..=ring.precision() {
        let pt = ring.from_int(1).scale(ring.p().pow(t) as i64);
        let cols: Vec<Vec<u64>> = (0..src.h)
            .map(|k| {
                let mut v = vec![0u64; src.h * n];
                let pv = pt.to_vec();
                v[k * n..(k + 1) * n].copy_from_slice(&pv);
                v
            })
            .collect();
        if cols.iter().all(|c| span.contains(c)) {
            torsion_exp = Some(t);
            break;
        }
    }
    let torsion_exp = torsion_exp.ok_or(Error::NotInjective)?;

    Ok(TorsionDieudonneModule {
        prism: src.prism.clone(),
        h: dst.h,
        pres: f.clone(),
        phi: dst.phi.clone(),
        psi,
        torsion_exp,
    })
}

/// One end of a short exact sequence.
#[derive(Debug, Clone)]
pub enum SeqTail {
    Free(DieudonneModule),
    Torsion(TorsionDieudonneModule),
}

/// Exactness of 0 -> D' -> D -> tail -> 0 with the given matrices.
pub fn exactness_check(
    sub: &DieudonneModule,
    mid: &DieudonneModule,
    tail: &SeqTail,
    iota: &RMat<Ring>,
    pi: &RMat<Ring>,
) -> Result<CheckReport> {
    let mut report = CheckReport { checks: Vec::new() };
    let ring = mid.ring().clone();
    let cr = ring.coeff_ring();
    let n = ring.dim();

    // equivariance of both maps
    let eq_iota = iota.matmul(&sub.phi)? == mid.phi.matmul(&iota.map_phi()?)?;
    report.push("iota_equivariant", eq_iota);
    let eq_pi = match tail {
        SeqTail::Free(q) => pi.matmul(&mid.phi)? == q.phi.matmul(&pi.map_phi()?)?,
        SeqTail::Torsion(t) => {
            // equality modulo the presentation
            let lhs = pi.matmul(&mid.phi)?;
            let rhs = t.phi.matmul(&pi.map_phi()?)?;
            let diff = lhs.sub(&rhs)?;
            let mut rows = Vec::new();
            for j in 0..t.pres.cols {
                for idx in 0..n {
                    let mut b = vec![0u64; n];
                    b[idx] = 1;
                    let e = ring.element_from_vec(&b, ring.precision());
                    let mut v = Vec::with_capacity(t.h * n);
                    for i in 0..t.h {
                        v.extend(t.pres.at(i, j).mul(&e)?.to_vec());
                    }
                    rows.push(v);
                }
            }
            let span = Span::new(cr, t.h * n, rows);
            (0..diff.cols).all(|j| {
                let mut v = Vec::with_capacity(t.h * n);
                for i in 0..diff.rows {
                    v.extend(diff.at(i, j).to_vec());
                }
                span.contains(&v)
            })
        }
    };
    report.push("pi_equivariant", eq_pi);

    // composite vanishes (exactly, or modulo the presentation)
    let comp = pi.matmul(iota)?;
    let comp_zero = match tail {
        SeqTail::Free(_) => comp.is_zero(),
        SeqTail::Torsion(t) => {
            let mut rows = Vec::new();
            for j in 0..t.pres.cols {
                for idx in 0..n {
                    let mut b = vec![0u64; n];
                    b[idx] = 1;
                    let e = ring.element_from_vec(&b, ring.precision());
                    let mut v = Vec::with_capacity(t.h * n);
                    for i in 0..t.h {
                        v.extend(t.pres.at(i, j).mul(&e)?.to_vec());
                    }
                    rows.push(v);
                }
            }
            let span = Span::new(cr, t.h * n, rows);
            (0..comp.cols).all(|j| {
                let mut v = Vec::with_capacity(t.h * n);
                for i in 0..comp.rows {
                    v.extend(comp.at(i, j).to_vec());
                }
                span.contains(&v)
            })
        }
    };
    report.push("composite_zero", comp_zero);

    match tail {
        SeqTail::Free(q) => {
            report.push("rank_additivity", sub.h + q.h == mid.h);
            // pi surjective: residue rank

            report.push("pi_surjective", pi.residue_rank() == q.h);
            // im(iota) = ker(pi) as spans of flat vectors
            let mut iota_rows = Vec::new();
            for j in 0..iota.cols {
                for idx in 0..n {
                    let mut b = vec![0u64; n];
                    b[idx] = 1;
                    let e = ring.element_from_vec(&b, ring.precision());
                    let mut v = Vec::with_capacity(mid.h * n);
                    for i in 0..mid.h {
                        v.extend(iota.at(i, j).mul(&e)?.to_vec());
                    }
                    iota_rows.push(v);
                }
            }
            let im = Span::new(cr, mid.h * n, iota_rows);
            // kernel of pi on flat coordinates
            let mut big = crate::linalg::Mat::zero(cr, q.h * n, mid.h * n);
            for i in 0..q.h {
                for k in 0..mid.h {
                    let block = <Ring as PrismaticRing>::mul_matrix(&ring, pi.at(i, k))?;
                    for r in 0..n {
                        for c in 0..n {
                            let v = block.at(r, c);
                            if v != 0 {
                                big.set(i * n + r, k * n + c, v);
                            }
                        }
                    }
                }
            }
            let ker = crate::linalg::kernel(&big);
            let ker_span = Span::new(cr, mid.h * n, ker.clone());
            let im_in_ker = im.pivots.values().all(|(_, r)| ker_span.contains(r));
            let ker_in_im = ker.iter().all(|v| im.contains(v));
            report.push("image_equals_kernel", im_in_ker && ker_in_im);
        }
        SeqTail::Torsion(t) => {
            report.push("rank_additivity", sub.h == mid.h && t.h == mid.h);
            // presentation of the torsion tail matches the image of iota
            let mut iota_rows = Vec::new();
            for j in 0..iota.cols {
                for idx in 0..n {
                    let mut b = vec![0u64; n];
                    b[idx] = 1;
                    let e = ring.element_from_vec(&b, ring.precision());
                    let mut v = Vec::with_capacity(mid.h * n);
                    for i in 0..mid.h {
                        v.extend(iota.at(i, j).mul(&e)?.to_vec());
                    }
                    iota_rows.push(v);
                }
            }
            let im = Span::new(cr, mid.h * n, iota_rows);
            let mut pres_rows = Vec::new();
            for j in 0..t.pres.cols {
                for idx in 0..n {
                    let mut b = vec![0u64; n];
                    b[idx] = 1;
                    let e = ring.element_from_vec(&b, ring.precision());
                    let mut v = Vec::with_capacity(t.h * n);
                    for i in 0..t.h {
                        v.extend(t.pres.at(i, j).mul(&e)?.to_vec());
                    }
                    pres_rows.push(v);
                }
            }
            let pres_span = Span::new(cr, t.h * n, pres_rows);
            report.push("presentation_matches_image", im.equals(&pres_span));
        }
    }
    Ok(report)
}

pub fn forget_filtration(f: &FilteredDieudonneModule) -> DieudonneModule {
    f.dm.clone()
}

/// Over the crystalline prism the filtration is forced:
/// Fil = phi_M^(-1)(d M), recovered as an axis-aligned normal pair.
pub fn refill_perfect(dm: &DieudonneModule) -> Result<FilteredDieudonneModule> {
    if dm.prism.kind != PrismKind::Crystalline {
        return Err(Error::BadInput(
            "refill is defined over the crystalline catalog prism".into(),
        ));
    }
    let ring = dm.ring().clone();
    let cr = ring.coeff_ring();
    let n = ring.dim();
    let p_el = ring.from_int(ring.p() as i64);

    // S = {x : Phi x in p M}
    let mut big = crate::linalg::Mat::zero(cr, dm.h * n, dm.h * n);
    for i in 0..dm.h {
        for k in 0..dm.h {
            let block = <Ring as PrismaticRing>::mul_matrix(&ring, dm.phi.at(i, k))?;
            for r in 0..n {
                for c in 0..n {
                    let v = block.at(r, c);
                    if v != 0 {
                        big.set(i * n + r, k * n + c, v);
                    }
                }
            }
        }
    }
    let mut p_cols = Vec::new();
    for k in 0..dm.h {
        for idx in 0..n {
            let mut b = vec![0u64; n];
            b[idx] = 1;
            let e = ring.element_from_vec(&b, ring.precision());
            let pe = p_el.mul(&e)?;
            let mut v = vec![0u64; dm.h * n];
            v[k * n..(k + 1) * n].copy_from_slice(&pe.to_vec());
            p_cols.push(v);
        }
    }
    let p_mat = crate::linalg::Mat::from_cols(cr, p_cols);
    let s_gens = crate::linalg::kernel_mod_span(&big, &p_mat);
    let mut s_all = s_gens;
    for c in 0..p_mat.cols {
        s_all.push(p_mat.col(c));
    }
    let s_span = Span::new(cr, dm.h * n, s_all);

    // per-axis membership: e_i in S puts i in L
    let mut is_l = vec![false; dm.h];
    for i in 0..dm.h {
        let mut v = vec![0u64; dm.h * n];
        let one = ring.one().to_vec();
        v[i * n..(i + 1) * n].copy_from_slice(&one);
        is_l[i] = s_span.contains(&v);
    }
    // verify S is exactly the axis-aligned normal pair
    let mut normal_rows = Vec::new();
    for i in 0..dm.h {
        let gen = if is_l[i] { ring.one() } else { p_el.clone() };
        for idx in 0..n {
            let mut b = vec![0u64; n];
            b[idx] = 1;
            let e = ring.element_from_vec(&b, ring.precision());
            let ge = gen.mul(&e)?;
            let mut v = vec![0u64; dm.h * n];
            v[i * n..(i + 1) * n].copy_from_slice(&ge.to_vec());
            normal_rows.push(v);
        }
    }
    let normal_span = Span::new(cr, dm.h * n, normal_rows);
    if !normal_span.equals(&s_span) {
        return Err(Error::FilNotComputable);
    }
    Ok(FilteredDieudonneModule { dm: dm.clone(), is_l })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::RingSpec;

    fn crystalline() -> Prism {
        Prism::crystalline(Ring::new(RingSpec::zp(2, 6)).unwrap()).unwrap()
    }

    fn dm_scalar(p: &Prism, v: i64) -> DieudonneModule {
        let ring = p.ring().clone();
        DieudonneModule::new(
            p.clone(),
            RMat::from_rows(ring.clone(), vec![vec![ring.from_int(v)]]),
        )
    }

    #[test]
    fn dm_check_examples() {
        let p = crystalline();
        assert!(dm_check(&dm_scalar(&p, 2)).pass());
        assert!(dm_check(&dm_scalar(&p, 1)).pass());
        assert!(!dm_check(&dm_scalar(&p, 4)).pass());
    }

    #[test]
    fn standard_modules_pass_checks() {
        let p = crystalline();
        for kind in [
            StandardKind::Etale,
            StandardKind::Multiplicative,
            StandardKind::QpZpFiltered,
            StandardKind::MuFiltered,
        ] {
            let h = match kind {
                StandardKind::Etale | StandardKind::Multiplicative => 2,
                _ => 1,
            };
            let m = standard_module(kind, &p, h).unwrap();
            let report = fdm_check(&m).unwrap();
            assert!(report.pass(), "{:?}: {:?}", kind, report);
        }
    }

    #[test]
    fn mu_filtered_over_q_prism() {
        let qr = Ring::new(RingSpec::with_q(2, 6, 0, 16)).unwrap();
        let p = Prism::q_prism(qr).unwrap();
        let m = standard_module(StandardKind::MuFiltered, &p, 1).unwrap();
        assert_eq!(m.dm.phi.at(0, 0), &p.d);
        assert!(fdm_check(&m).unwrap().pass());
    }

    #[test]
    fn duality_exchanges_etale_and_multiplicative() {
        let p = crystalline();
        let et = standard_module(StandardKind::Etale, &p, 2).unwrap().dm;
        let mult = standard_module(StandardKind::Multiplicative, &p, 2).unwrap().dm;
        assert_eq!(dual(&et).unwrap().phi, mult.phi);
        assert_eq!(dual(&mult).unwrap().phi, et.phi);
    }

    #[test]
    fn duality_involution_rank2() {
        let p = crystalline();
        let ring = p.ring().clone();
        let phi = RMat::from_rows(
            ring.clone(),
            vec![
                vec![ring.from_int(2), ring.from_int(1)],
                vec![ring.from_int(0), ring.from_int(1)],
            ],
        );
        let dm = DieudonneModule::new(p, phi);
        assert!(dm_check(&dm).pass());
        let dd = dual(&dual(&dm).unwrap()).unwrap();
        assert_eq!(dd.phi, dm.phi);
    }

    #[test]
    fn isogeny_cokernel_classical_modules() {
        let p = crystalline();
        let ring = p.ring().clone();
        let et = dm_scalar(&p, 1);
        let mult = dm_scalar(&p, 2);
        let f = RMat::from_rows(ring.clone(), vec![vec![ring.from_int(2)]]);

        // multiplication by p on the etale module: the module of Z/p
        let t = isogeny_cokernel(&et, &et, &f).unwrap();
        assert_eq!(t.torsion_exp, 1);
        let report = torsion_check(&t).unwrap();
        assert!(report.pass(), "{:?}", report);
        // phi = 1, psi = p = 0 on the cokernel
        assert_eq!(t.phi.at(0, 0), &ring.from_int(1));
        assert_eq!(t.psi.at(0, 0), &ring.from_int(2));

        // multiplication by p on the multiplicative module: mu_p
        let t = isogeny_cokernel(&mult, &mult, &f).unwrap();
        let report = torsion_check(&t).unwrap();
        assert!(report.pass(), "{:?}", report);
        // psi = 1 here: Phi Psi = p with Phi = (p)
        assert_eq!(t.psi.at(0, 0), &ring.from_int(1));

        // non-equivariant map rejected
        let g = RMat::from_rows(ring.clone(), vec![vec![ring.from_int(2)]]);
        assert_eq!(
            isogeny_cokernel(&et, &mult, &g).unwrap_err(),
            Error::NotEquivariant
        );
    }

    #[test]
    fn exactness_split_sequence() {
        let p = crystalline();
        let ring = p.ring().clone();
        let sub = dm_scalar(&p, 2);
        let quot = dm_scalar(&p, 1);
        let mid = DieudonneModule::new(
            p.clone(),
            RMat::from_rows(
                ring.clone(),
                vec![
                    vec![ring.from_int(2), ring.from_int(0)],
                    vec![ring.from_int(0), ring.from_int(1)],
                ],
            ),
        );
        let iota = RMat::from_rows(ring.clone(), vec![vec![ring.one()], vec![ring.zero()]]);
        let pi = RMat::from_rows(ring.clone(), vec![vec![ring.zero(), ring.one()]]);
        let report =
            exactness_check(&sub, &mid, &SeqTail::Free(quot), &iota, &pi).unwrap();
        assert!(report.pass(), "{:?}", report);

        // non-surjective pi fails
        let pi_bad = RMat::from_rows(ring.clone(), vec![vec![ring.zero(), ring.from_int(2)]]);
        let quot_bad = dm_scalar(&p, 1);
        let report =
            exactness_check(&sub, &mid, &SeqTail::Free(quot_bad), &iota, &pi_bad).unwrap();
        assert!(!report.pass());
    }

    #[test]
    fn torsion_sequence_from_isogeny() {
        let p = crystalline();
        let ring = p.ring().clone();
        let et = dm_scalar(&p, 1);
        let f = RMat::from_rows(ring.clone(), vec![vec![ring.from_int(2)]]);
        let t = isogeny_cokernel(&et, &et, &f).unwrap();
        let id = RMat::identity(ring.clone(), 1);
        let report =
            exactness_check(&et, &et, &SeqTail::Torsion(t), &f, &id).unwrap();
        assert!(report.pass(), "{:?}", report);
    }

    #[test]
    fn refill_standard_modules() {
        let p = crystalline();
        // Phi = p: Fil = all of M
        let m = dm_scalar(&p, 2);
        let f = refill_perfect(&m).unwrap();
        assert_eq!(f.is_l, vec![true]);
        // Phi = 1: Fil = p M
        let m = dm_scalar(&p, 1);
        let f = refill_perfect(&m).unwrap();
        assert_eq!(f.is_l, vec![false]);
        // diag(1, p): L = e2 line
        let ring = p.ring().clone();
        let m = DieudonneModule::new(
            p.clone(),
            RMat::from_rows(
                ring.clone(),
                vec![
                    vec![ring.from_int(1), ring.from_int(0)],
                    vec![ring.from_int(0), ring.from_int(2)],
                ],
            ),
        );
        let f = refill_perfect(&m).unwrap();
        assert_eq!(f.is_l, vec![false, true]);

        // refill . forget = id on the standard filtered modules
        for kind in [
            StandardKind::Etale,
            StandardKind::Multiplicative,
            StandardKind::QpZpFiltered,
            StandardKind::MuFiltered,
        ] {
            let h = match kind {
                StandardKind::Etale | StandardKind::Multiplicative => 2,
                _ => 1,
            };
            let filt = standard_module(kind, &p, h).unwrap();
            let back = refill_perfect(&forget_filtration(&filt)).unwrap();
            assert_eq!(back.is_l, filt.is_l, "{:?}", kind);
        }
    }
}
