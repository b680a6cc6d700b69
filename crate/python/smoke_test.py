#!/usr/bin/env python3
"""Smoke test for the prismkit_py extension module.

Builds nothing itself: run `cargo build --release -p prismkit-py` first.
The script locates the compiled cdylib, loads it, and exercises the main
surface: ring arithmetic, exact division with precision tracking, delta
and rank-1 predicates, the q-logarithm with its Frobenius eigen-relation,
Witt structure polynomials, Ext groups and the property suite.
"""

import importlib.util
import pathlib
import shutil
import sys
import tempfile

ROOT = pathlib.Path(__file__).resolve().parent.parent


def load_module():
    candidates = [
        ROOT / "target" / "release" / "libprismkit_py.so",
        ROOT / "target" / "debug" / "libprismkit_py.so",
        ROOT / "target" / "release" / "prismkit_py.dll",
        ROOT / "target" / "release" / "libprismkit_py.dylib",
    ]
    src = next((c for c in candidates if c.exists()), None)
    if src is None:
        sys.exit(
            "prismkit_py cdylib not found; run `cargo build --release -p prismkit-py`"
        )
    tmp = pathlib.Path(tempfile.mkdtemp(prefix="prismkit-py-"))
    suffix = ".pyd" if src.suffix == ".dll" else ".so"
    dst = tmp / f"prismkit_py{suffix}"
    shutil.copyfile(src, dst)
    spec = importlib.util.spec_from_file_location("prismkit_py", dst)
    mod = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(mod)
    return mod


def main():
    pk = load_module()

    # modular arithmetic in Z/16
    r = pk.Ring(2, 4)
    nine = r.from_int(9)
    assert (nine + nine).__eq__(r.from_int(2))

    # exact division: 12 / 2 = 6 with one level of precision spent
    q = r.from_int(12).div_exact(r.from_int(2))
    assert q.__eq__(r.from_int(6))
    assert q.precision() == 3

    # delta and rank-1 in (Z/16)[u]/u^8
    ru = pk.Ring(2, 4, u_trunc=8)
    u = ru.var_u()
    assert ru.delta(u).is_zero()
    assert ru.is_rank_one(u)
    e = u - ru.from_int(2)
    assert ru.is_distinguished(e)
    assert pk.crystalline_prism_ok(2, 6)

    # q-logarithm: log_q(q) = q - 1, eigen-relation, Nygaard membership
    ql = pk.QLog(2, n=6, depth=0, q_trunc=16)
    val, omitted = ql.log(ql.q())
    assert val.__eq__(ql.mu()), f"log_q(q) = {val!r}"
    assert omitted >= 2
    assert ql.eigen_check(ql.q().pow(3))
    assert ql.nygaard_member(val, 1)

    # Witt structure polynomials: S1 = x1 + y1 - x0*y0 at p = 2
    polys = pk.witt_polys(2, 2)
    assert "x0*y0" in polys["sum"][1], polys["sum"][1]

    # Ext groups against the gcd oracle
    h0, h1 = pk.ext([2], 2)
    assert h0 == [2] and h1 == [2]
    h0, h1 = pk.ext([4], 6)
    assert h0 == [2] and h1 == [2]
    assert pk.primitive_dimension(3, 2) == 3

    # a fast pass over the property suite
    ok, report = pk.run_suite(seed=7, samples=12)
    assert ok, report

    print("prismkit_py smoke test: OK")


if __name__ == "__main__":
    main()
