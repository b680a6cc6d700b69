//! Python bindings: working rings and elements, delta/prism predicates,
//! the q-logarithm, Witt structure polynomials, Ext groups and the
//! property suite.

use prismkit::ext_complex::{ext_groups, primitive_elements, FiniteAbelianGroup};
use prismkit::qprism::QContext;
use prismkit::report::{run_all, RunConfig};
use prismkit::ring::{Element as CoreElement, Ring as CoreRing, RingSpec, QSpec};
use prismkit::witt::{witt_polys_json, DeltaRing, Prism};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// A working quotient ring Z[u, q_s]/(p^N, u^M, (q_s-1)^Q).
#[pyclass]
#[derive(Clone)]
struct Ring {
    inner: CoreRing,
}

#[pymethods]
impl Ring {
    #[new]
    #[pyo3(signature = (p, n, u_trunc=None, q_trunc=None, q_depth=0))]
    fn new(p: u64, n: u32, u_trunc: Option<u32>, q_trunc: Option<u32>, q_depth: u32) -> PyResult<Self> {
        let spec = RingSpec {
            p,
            n,
            u_trunc,
            q: q_trunc.map(|t| QSpec { depth: q_depth, trunc: t }),
        };
        Ok(Ring { inner: CoreRing::new(spec).map_err(err)? })
    }

    fn __repr__(&self) -> String {
        format!("{:?}", self.inner.spec())
    }

    fn modulus(&self) -> u64 {
        self.inner.modulus()
    }

    fn zero(&self) -> Element {
        Element { inner: self.inner.zero() }
    }

    fn one(&self) -> Element {
        Element { inner: self.inner.one() }
    }

    fn from_int(&self, k: i64) -> Element {
        Element { inner: self.inner.from_int(k) }
    }

    fn var_u(&self) -> PyResult<Element> {
        Ok(Element { inner: self.inner.var_u().map_err(err)? })
    }

    fn var_q(&self) -> PyResult<Element> {
        Ok(Element { inner: self.inner.var_q().map_err(err)? })
    }

    /// delta(x) = (phi(x) - x^p)/p; costs one level of p-precision.
    fn delta(&self, x: &Element) -> PyResult<Element> {
        let d = DeltaRing::new(self.inner.clone());
        Ok(Element { inner: d.delta(&x.inner).map_err(err)? })
    }

    fn is_rank_one(&self, x: &Element) -> PyResult<bool> {
        DeltaRing::new(self.inner.clone()).is_rank_one(&x.inner).map_err(err)
    }

    fn is_distinguished(&self, x: &Element) -> PyResult<bool> {
        DeltaRing::new(self.inner.clone()).is_distinguished(&x.inner).map_err(err)
    }
}

/// Element of a working ring, with guaranteed p-precision.
#[pyclass]
#[derive(Clone)]
struct Element {
    inner: CoreElement,
}

#[pymethods]
impl Element {
    fn __repr__(&self) -> String {
        format!("{}", self.inner)
    }

    fn __eq__(&self, other: &Element) -> bool {
        self.inner == other.inner
    }

    fn __add__(&self, other: &Element) -> PyResult<Element> {
        Ok(Element { inner: self.inner.add(&other.inner).map_err(err)? })
    }

    fn __sub__(&self, other: &Element) -> PyResult<Element> {
        Ok(Element { inner: self.inner.sub(&other.inner).map_err(err)? })
    }

    fn __mul__(&self, other: &Element) -> PyResult<Element> {
        Ok(Element { inner: self.inner.mul(&other.inner).map_err(err)? })
    }

    fn __neg__(&self) -> Element {
        Element { inner: self.inner.neg() }
    }

    fn pow(&self, e: u64) -> Element {
        Element { inner: self.inner.pow(e) }
    }

    fn div_exact(&self, other: &Element) -> PyResult<Element> {
        Ok(Element { inner: self.inner.div_exact(&other.inner).map_err(err)? })
    }

    fn frobenius(&self) -> Element {
        Element { inner: self.inner.frobenius() }
    }

    fn precision(&self) -> u32 {
        self.inner.precision()
    }

    fn is_zero(&self) -> bool {
        self.inner.is_zero()
    }

    fn is_unit(&self) -> bool {
        self.inner.is_unit()
    }

    /// Coefficient table as [((u_exp, t_exp), residue), ...].
    fn coeffs(&self) -> Vec<((u32, u32), u64)> {
        self.inner
            .coeffs()
            .iter()
            .map(|(m, c)| ((m.u_exp, m.t_exp), *c))
            .collect()
    }
}

/// q-deformation context at root depth `depth`.
#[pyclass]
struct QLog {
    ctx: QContext,
}

#[pymethods]
impl QLog {
    #[new]
    #[pyo3(signature = (p, n=6, depth=0, q_trunc=16))]
    fn new(p: u64, n: u32, depth: u32, q_trunc: u32) -> PyResult<Self> {
        Ok(QLog { ctx: QContext::new(p, n, depth, q_trunc).map_err(err)? })
    }

    fn ring(&self) -> Ring {
        Ring { inner: self.ctx.ring().clone() }
    }

    fn q(&self) -> Element {
        Element { inner: self.ctx.q() }
    }

    fn mu(&self) -> Element {
        Element { inner: self.ctx.mu() }
    }

    fn q_int(&self, n: u64) -> Element {
        Element { inner: self.ctx.q_int(n) }
    }

    /// Truncated q-logarithm; returns (value, first_omitted_index).
    #[pyo3(signature = (x, terms=None))]
    fn log(&self, x: &Element, terms: Option<u32>) -> PyResult<(Element, u64)> {
        let terms = terms.unwrap_or_else(|| self.ctx.default_terms());
        let (l, cert) = self.ctx.q_log(&x.inner, terms).map_err(err)?;
        Ok((Element { inner: l }, cert.first_omitted_index))
    }

    /// phi(log_q x) == [p]_q log_q x, exactly.
    #[pyo3(signature = (x, terms=None))]
    fn eigen_check(&self, x: &Element, terms: Option<u32>) -> PyResult<bool> {
        let terms = terms.unwrap_or_else(|| self.ctx.default_terms());
        self.ctx.frobenius_eigen_check(&x.inner, terms).map_err(err)
    }

    fn nygaard_member(&self, x: &Element, i: u32) -> PyResult<bool> {
        self.ctx.nygaard_member(&x.inner, i).map_err(err)
    }
}

/// Witt structure polynomials as readable strings.
#[pyfunction]
fn witt_polys(py: Python<'_>, p: u64, len: u32) -> PyResult<PyObject> {
    let j = witt_polys_json(p, len).map_err(err)?;
    let s = serde_json::to_string(&j).map_err(err)?;
    let json = py.import_bound("json")?;
    Ok(json.call_method1("loads", (s,))?.into())
}

/// (H0, H1) invariant factors of the low-degree complex of the group with
/// the given cyclic orders, coefficients Z/m.
#[pyfunction]
fn ext(orders: Vec<u64>, m: u64) -> PyResult<(Vec<u64>, Vec<u64>)> {
    let g = FiniteAbelianGroup::new(orders).map_err(err)?;
    let e = ext_groups(&g, m).map_err(err)?;
    Ok((e.h0, e.h1))
}

/// Dimension of the primitive part of the exterior algebra on F_p^r.
#[pyfunction]
fn primitive_dimension(r: u32, p: u64) -> PyResult<u32> {
    Ok(primitive_elements(r, p).map_err(err)?.dimension)
}

/// Crystalline prism sanity: delta(p) is a unit.
#[pyfunction]
fn crystalline_prism_ok(p: u64, n: u32) -> PyResult<bool> {
    let ring = CoreRing::new(RingSpec::zp(p, n)).map_err(err)?;
    Ok(Prism::crystalline(ring).is_ok())
}

/// Run the property suite; returns (all_passed, report_json).
#[pyfunction]
#[pyo3(signature = (seed=7, samples=None))]
fn run_suite(seed: u64, samples: Option<u32>) -> PyResult<(bool, String)> {
    let mut cfg = RunConfig::new(seed);
    if let Some(s) = samples {
        cfg = cfg.with_samples(s);
    }
    let rep = run_all(&cfg);
    Ok((rep.pass(), rep.to_json()))
}

#[pymodule]
fn prismkit_py(_py: Python<'_>, m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Ring>()?;
    m.add_class::<Element>()?;
    m.add_class::<QLog>()?;
    m.add_function(wrap_pyfunction!(witt_polys, m)?)?;
    m.add_function(wrap_pyfunction!(ext, m)?)?;
    m.add_function(wrap_pyfunction!(primitive_dimension, m)?)?;
    m.add_function(wrap_pyfunction!(crystalline_prism_ok, m)?)?;
    m.add_function(wrap_pyfunction!(run_suite, m)?)?;
    Ok(())
}
