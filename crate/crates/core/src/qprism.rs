//! The q-deformation ring Z_p[[q_s - 1]] at root depth s: q-integers,
//! Nygaard membership, the q-logarithm with a convergence certificate, and
//! the Frobenius eigen-relation.

use crate::error::{Error, Result};
use crate::ring::{val, Element, Ring, RingSpec, Val};
use crate::witt::{DeltaRing, Prism};
use crate::linalg::{self, Mat};
use serde::Serialize;

/// q = q_s^(p^s) as an element of a q-ring.
pub fn q_of(ring: &Ring) -> Result<Element> {
    let spec = ring.spec();
    let q = spec.q.ok_or(Error::NoSuchVariable('q'))?;
    let qs = ring.var_q()?;
    let e = spec.p.checked_pow(q.depth).ok_or_else(|| {
        Error::InvalidSpec("p^depth overflows".into())
    })?;
    Ok(qs.pow(e))
}

/// [p]_q = 1 + q + ... + q^(p-1), the distinguished element of the q-prism.
pub fn q_analog_of_p(ring: &Ring) -> Result<Element> {
    q_int_in(ring, ring.p())
}

/// [n]_q = 1 + q + ... + q^(n-1) in the given q-ring.
pub fn q_int_in(ring: &Ring, n: u64) -> Result<Element> {
    let q = q_of(ring)?;
    let mut acc = ring.zero();
    let mut pw = ring.one();
    for _ in 0..n {
        acc = acc.add(&pw)?;
        pw = pw.mul(&q)?;
    }
    Ok(acc)
}

/// The q-deformation context: a q-prism together with its named elements.
#[derive(Debug, Clone)]
pub struct QContext {
    pub prism: Prism,
}

impl QContext {
    pub fn new(p: u64, n: u32, depth: u32, q_trunc: u32) -> Result<QContext> {
        let ring = Ring::new(RingSpec::with_q(p, n, depth, q_trunc))?;
        let prism = Prism::q_prism(ring)?;
        Ok(QContext { prism })
    }

    pub fn ring(&self) -> &Ring {
        self.prism.ring()
    }

    pub fn depth(&self) -> u32 {
        self.ring().spec().q.map(|q| q.depth).unwrap_or(0)
    }

    pub fn q(&self) -> Element {
        q_of(self.ring()).expect("q ring")
    }

    pub fn mu(&self) -> Element {
        self.q().sub(&self.ring().one()).expect("same ring")
    }

    /// xi-tilde = [p]_q, the orientation.
    pub fn xi_tilde(&self) -> Element {
        self.prism.d.clone()
    }

    /// xi = [p]_(q_1) with q_1 = q_s^(p^(s-1)), defined for depth >= 1;
    /// phi(xi) = xi-tilde.
    pub fn xi(&self) -> Result<Element> {
        let s = self.depth();
        if s == 0 {
            return Err(Error::BadInput("xi needs root depth >= 1".into()));
        }
        let ring = self.ring();
        let q1 = ring.var_q()?.pow(ring.p().pow(s - 1) as u64);
        let mut acc = ring.zero();
        let mut pw = ring.one();
        for _ in 0..ring.p() {
            acc = acc.add(&pw)?;
            pw = pw.mul(&q1)?;
        }
        Ok(acc)
    }

    pub fn q_int(&self, n: u64) -> Element {
        q_int_in(self.ring(), n).expect("q ring")
    }

    pub fn q_factorial(&self, n: u64) -> Element {
        let mut acc = self.ring().one();
        for k in 1..=n {
            acc = acc.mul(&self.q_int(k)).expect("same ring");
        }
        acc
    }

    pub fn delta_ring(&self) -> &DeltaRing {
        &self.prism.dring
    }

    pub fn nygaard_member(&self, x: &Element, i: u32) -> Result<bool> {
        self.prism.nygaard_member(x, i)
    }

    /// Truncated q-logarithm with a tail certificate: the numerator product
    /// of the first omitted term must vanish in the working ring, which
    /// kills every later term as well (their numerators extend it).
    ///
    /// For x = q^a the series terminates at n = a and is evaluated through
    /// its Gauss-binomial form, which needs no division at all; otherwise
    /// each term divides by [n]_q, a unit exactly when p does not divide n.
    pub fn q_log(&self, x: &Element, terms: u32) -> Result<(Element, LogCertificate)> {
        let ring = self.ring();
        if !self.delta_ring().is_rank_one(x)? {
            return Err(Error::NotRankOne);
        }
        let xm1 = x.sub(&ring.one())?;
        if !self.nygaard_member(&xm1, 1)? {
            return Err(Error::NotInUnitNygaard);
        }
        if let Some(a) = self.as_q_power(x) {
            let (sum, tail) = self.q_log_of_q_power(a, terms as u64);
            if let Some(bad_index) = tail {
                // a term beyond the requested budget survives truncation
                let _ = bad_index;
                return Err(Error::TailNotNegligible);
            }
            return Ok((
                sum,
                LogCertificate {
                    first_omitted_index: a.min(terms as u64) + 1,
                    omitted_term_valuation: Val::AtLeastCap(ring.val_cap()),
                },
            ));
        }

        let q = self.q();
        let q_inv = q.inv_unit()?;
        let p = ring.p();
        let mut sum = ring.zero();
        let mut prefix = ring.one(); // (x-1)(x-q)...(x-q^(n-1))
        let mut q_pow = ring.one(); // q^(n-1) while processing term n
        for n in 1..=terms as u64 {
            prefix = prefix.mul(&x.sub(&q_pow)?)?;
            if prefix.is_zero() {
                // every remaining term vanishes too; certified early
                return Ok((
                    sum,
                    LogCertificate {
                        first_omitted_index: n,
                        omitted_term_valuation: Val::AtLeastCap(ring.val_cap()),
                    },
                ));
            }
            let denom = self.q_int(n);
            let frac = if n % p != 0 {
                prefix.mul(&denom.inv_unit()?)?
            } else {
                prefix.div_exact(&denom)?
            };
            let tri = n * (n - 1) / 2;
            let term = frac.mul(&q_inv.pow(tri))?;
            sum = if n % 2 == 1 { sum.add(&term)? } else { sum.sub(&term)? };
            q_pow = q_pow.mul(&q)?;
        }
        // certificate: numerator of term (terms+1)
        let omitted = prefix.mul(&x.sub(&q_pow)?)?;
        if !omitted.is_zero() {
            return Err(Error::TailNotNegligible);
        }
        Ok((
            sum,
            LogCertificate {
                first_omitted_index: terms as u64 + 1,
                omitted_term_valuation: Val::AtLeastCap(ring.val_cap()),
            },
        ))
    }

    /// Recognize x = q^a for small a.
    fn as_q_power(&self, x: &Element) -> Option<u64> {
        let ring = self.ring();
        let q = self.q();
        let mut pw = ring.one();
        for a in 0..=(4 * ring.val_cap() as u64 + 8) {
            if *x == pw {
                return Some(a);
            }
            pw = pw.mul(&q).expect("same ring");
        }
        None
    }

    /// log_q(q^a) by the terminating series
    /// sum_{n=1}^{a} (-1)^(n-1) mu^n [n-1]_q! binom_q(a, n).
    ///
    /// Returns the full sum plus the index of the first term beyond the
    /// requested budget that fails to vanish in the working ring, if any.
    fn q_log_of_q_power(&self, a: u64, terms: u64) -> (Element, Option<u64>) {
        let ring = self.ring();
        let q = self.q();
        let mu = self.mu();
        // Gauss binomials by the q-Pascal recurrence; no division involved.
        let n = a as usize;
        let mut binom: Vec<Vec<Element>> = vec![vec![ring.zero(); n + 1]; n + 1];
        for j in 0..=n {
            binom[j][0] = ring.one();
            for k in 1..=j {
                let mut qn = q.pow(k as u64);
                qn = qn.mul(&binom[j - 1][k]).expect("same ring");
                binom[j][k] =
                    binom[j - 1][k - 1].add(&qn).expect("same ring");
            }
        }
        let mut sum = ring.zero();
        let mut tail = None;
        let mut mu_pow = ring.one();
        let mut fact = ring.one(); // [n-1]_q!
        for k in 1..=n {
            mu_pow = mu_pow.mul(&mu).expect("same ring");
            if k >= 2 {
                fact = fact.mul(&self.q_int(k as u64 - 1)).expect("same ring");
            }
            let term = mu_pow.mul(&fact).expect("same ring").mul(&binom[n][k]).expect("same ring");
            if k as u64 > terms && !term.is_zero() && tail.is_none() {
                tail = Some(k as u64);
            }
            sum = if k % 2 == 1 {
                sum.add(&term).expect("same ring")
            } else {
                sum.sub(&term).expect("same ring")
            };
        }
        (sum, tail)
    }

    /// Default number of series terms: the valuation cap always certifies.
    pub fn default_terms(&self) -> u32 {
        self.ring().val_cap()
    }

    /// phi(log_q x) = [p]_q * log_q(x), exactly in the working ring.
    pub fn frobenius_eigen_check(&self, x: &Element, terms: u32) -> Result<bool> {
        let (l, _) = self.q_log(x, terms)?;
        let lhs = self.prism.phi(&l);
        let rhs = self.xi_tilde().mul(&l)?;
        Ok(lhs == rhs)
    }

    /// Divided q-logarithm of a compatible root system (x_0, ..., x_s):
    /// q_log of the chosen p-th root x_1.
    pub fn divided_q_log(&self, roots: &[Element], terms: u32) -> Result<Element> {
        let s = self.depth();
        if s == 0 || roots.len() != s as usize + 1 {
            return Err(Error::BadInput(
                "root system must have depth+1 entries at depth >= 1".into(),
            ));
        }
        let ring = self.ring();
        let p = ring.p();
        for x in roots {
            if !self.delta_ring().is_rank_one(x)? {
                return Err(Error::NotRankOne);
            }
        }
        for k in 0..roots.len() - 1 {
            if roots[k + 1].pow(p) != roots[k] {
                return Err(Error::IncompatibleRoots);
            }
        }
        // x_0 = 1 mod d
        let v = val(
            &roots[0].sub(&ring.one())?,
            &[self.prism.d.clone()],
            ring.val_cap(),
        );
        if !v.meets(1) {
            return Err(Error::IncompatibleRoots);
        }
        let (l, _) = self.q_log(&roots[1], terms)?;
        Ok(l)
    }

    /// Express an element through q_(s-1) = q_s^p, shifting the root depth
    /// down by one; errors when the element does not descend.
    pub fn depth_lower(&self, x: &Element) -> Result<Element> {
        let s = self.depth();
        if s == 0 {
            return Err(Error::BadInput("already at depth 0".into()));
        }
        let ring = self.ring();
        let dim = ring.dim();
        let cr = ring.coeff_ring();
        let mut cols = Vec::with_capacity(dim);
        for j in 0..dim as u32 {
            let tj = ring.monomial(0, j, 1)?;
            cols.push(tj.frobenius().to_vec());
        }
        let m = Mat::from_cols(cr, cols);
        let (y, _) = linalg::solve(&m, &x.to_vec()).ok_or(Error::NotDivisible)?;
        let lower = Ring::new(RingSpec::with_q(
            ring.p(),
            ring.precision(),
            s - 1,
            ring.t_dim(),
        ))?;
        Ok(lower.element_from_vec(&y, x.precision()))
    }
}

/// Tail certificate for a truncated q-logarithm.
#[derive(Debug, Clone, Serialize)]
pub struct LogCertificate {
    pub first_omitted_index: u64,
    pub omitted_term_valuation: Val,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(p: u64, depth: u32) -> QContext {
        QContext::new(p, 6, depth, 16).unwrap()
    }

    #[test]
    fn q_int_specializes_to_n_at_q_equals_1() {
        let c = ctx(2, 0);
        for n in 0..6 {
            let e = c.q_int(n);
            assert_eq!(e.augmentation(), n % c.ring().modulus());
        }
    }

    #[test]
    fn q_factorial_small() {
        let c = ctx(2, 0);
        let expect = c.ring().one().add(&c.q()).unwrap();
        assert_eq!(c.q_factorial(2), expect);
    }

    #[test]
    fn gauss_congruence() {
        for p in [2u64, 3] {
            let c = ctx(p, 0);
            let diff = c.xi_tilde().sub(&c.ring().from_int(p as i64)).unwrap();
            let v = val(&diff, &[c.mu()], c.ring().val_cap());
            assert!(v.meets(1), "[p]_q = p mod (q-1) failed for p={}", p);
        }
    }

    #[test]
    fn q_power_minus_one_factors() {
        let c = ctx(3, 0);
        let q = c.q();
        let mu = c.mu();
        for n in 1..=9u64 {
            let lhs = q.pow(n).sub(&c.ring().one()).unwrap();
            let rhs = mu.mul(&c.q_int(n)).unwrap();
            assert_eq!(lhs, rhs, "q^{}-1 != (q-1)[n]_q", n);
        }
    }

    #[test]
    fn nygaard_examples() {
        let c = ctx(2, 0);
        let qm1 = c.mu();
        assert!(c.nygaard_member(&qm1, 1).unwrap());
        assert!(!c.nygaard_member(&c.ring().one(), 1).unwrap());

        let c = ctx(2, 1);
        let xi = c.xi().unwrap();
        // phi(xi) = xi-tilde
        assert_eq!(c.prism.phi(&xi), c.xi_tilde());
        assert!(c.nygaard_member(&xi, 1).unwrap());
    }

    #[test]
    fn q_log_at_one_and_q() {
        let c = ctx(2, 0);
        let terms = c.default_terms();
        let (l1, _) = c.q_log(&c.ring().one(), terms).unwrap();
        assert!(l1.is_zero());

        let (lq, cert) = c.q_log(&c.q(), terms).unwrap();
        assert_eq!(lq, c.mu());
        assert!(cert.first_omitted_index >= 2);
    }

    #[test]
    fn q_log_rejects_non_rank_one() {
        let c = ctx(2, 0);
        // 1 + (q-1) + extra p is not rank 1 generally
        let x = c.ring().one().add(&c.mu().scale(2)).unwrap().add(&c.ring().from_int(2)).unwrap();
        match c.q_log(&x, 8) {
            Err(Error::NotRankOne) | Err(Error::NotInUnitNygaard) => {}
            other => panic!("expected precondition failure, got {:?}", other.map(|_| ())),
        }
    }

    #[test]
    fn q_log_of_q_powers_is_linear() {
        // independent closed form: log_q(q^a) = a * (q - 1)
        for p in [2u64, 3] {
            let c = ctx(p, 0);
            for a in 0..10u64 {
                let (l, _) = c.q_log(&c.q().pow(a), c.default_terms()).unwrap();
                assert_eq!(l, c.mu().scale(a as i64), "p={} a={}", p, a);
                assert!(c.nygaard_member(&l, 1).unwrap());
            }
        }
    }

    #[test]
    fn general_series_path_agrees_on_unit_denominators() {
        // for p = 3, x = q^2 the general series stops before any division
        // by a non-unit [n]_q; it must agree with the closed form
        let c = ctx(3, 0);
        let x = c.q().pow(2);
        let q = c.q();
        let one = c.ring().one();
        let mut sum = x.sub(&one).unwrap();
        let t2 = x.sub(&one).unwrap().mul(&x.sub(&q).unwrap()).unwrap();
        let t2 = t2.mul(&c.q_int(2).inv_unit().unwrap()).unwrap();
        let t2 = t2.mul(&q.inv_unit().unwrap()).unwrap();
        sum = sum.sub(&t2).unwrap();
        let (l, _) = c.q_log(&x, c.default_terms()).unwrap();
        assert_eq!(l, sum);
    }

    #[test]
    fn eigen_relation_for_q_powers() {
        for p in [2u64, 3] {
            let c = ctx(p, 0);
            let terms = c.default_terms();
            for a in 0..6u64 {
                let x = c.q().pow(a);
                assert!(
                    c.frobenius_eigen_check(&x, terms).unwrap(),
                    "eigen check failed for p={} a={}",
                    p,
                    a
                );
            }
        }
    }

    #[test]
    fn divided_log_examples() {
        let c = ctx(2, 1);
        let terms = c.default_terms();
        let ones = vec![c.ring().one(), c.ring().one()];
        assert!(c.divided_q_log(&ones, terms).unwrap().is_zero());

        // the tower (q^p, q): q^p = 1 mod [p]_q, and q is its p-th root
        let roots = vec![c.q().pow(2), c.q()];
        let d = c.divided_q_log(&roots, terms).unwrap();
        let (direct, _) = c.q_log(&c.q(), terms).unwrap();
        assert_eq!(d, direct);
        assert_eq!(d, c.mu());

        // incompatible roots
        let bad = vec![c.q(), c.ring().one()];
        assert_eq!(c.divided_q_log(&bad, terms).unwrap_err(), Error::IncompatibleRoots);
    }

    #[test]
    fn depth_lowering_roundtrip() {
        let c = ctx(2, 1);
        // q = q_1^2 descends to the depth-0 variable
        let down = c.depth_lower(&c.q()).unwrap();
        let c0 = ctx(2, 0);
        assert_eq!(down, c0.ring().var_q().unwrap());
    }

    #[test]
    fn mu_factors_through_qs_minus_one() {
        let c = ctx(2, 1);
        let t = c.ring().var_t().unwrap();
        // mu = (q_s - 1) * [p^s]_(q_s)
        let qs = c.ring().var_q().unwrap();
        let mut cof = c.ring().zero();
        let mut pw = c.ring().one();
        for _ in 0..2u64 {
            cof = cof.add(&pw).unwrap();
            pw = pw.mul(&qs).unwrap();
        }
        assert_eq!(c.mu(), t.mul(&cof).unwrap());
    }
}
