#!/usr/bin/env python3
"""Benchmark: compiled special-function core vs the pure-numpy fallback.

Times the hot paths (modified Bessel pair on large complex arrays, full
double-layer matrix assembly, one Dirichlet solve) under both backends and
prints a small table.  Needs the compiled extension; build with
`pip install -e . --no-build-isolation`.
"""

import time

import numpy as np

from brinkbie import _backend, _purespec, bie2d, geometry
from brinkbie.special import ResolventParameter

try:
    from brinkbie import _fastspec
except ImportError:
    raise SystemExit("compiled backend not built; run pip install -e . first")


def timeit(fn, repeat=3):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def with_backend(impl, name, fn):
    prev_impl, prev_name = _backend.impl, _backend.name
    _backend.impl, _backend.name = impl, name
    try:
        return fn()
    finally:
        _backend.impl, _backend.name = prev_impl, prev_name


def main():
    rng = np.random.default_rng(0)
    z = (rng.uniform(0.05, 10, 512 * 512)
         * np.exp(1j * rng.uniform(-0.5, 0.5, 512 * 512)))
    lam = ResolventParameter(1 + 2j)
    curve = geometry.star(1.0, 0.3, 3)
    rule = bie2d.QuadratureRule(512)
    g = bie2d.stream_poly_field()

    cases = [
        ("bessel K0/K1, 262k pts", lambda: _backend.get("k01")(z)),
        ("d-pair, 262k pts", lambda: _backend.get("d_pair")(z)),
        ("assembly N=512", lambda: bie2d.assemble_double_layer(curve, lam, rule)),
        ("solve N=512", lambda: bie2d.solve_interior_dirichlet(curve, lam, g, rule)),
    ]
    print(f"{'case':28s} {'pure [s]':>10s} {'compiled [s]':>13s} {'speedup':>8s}")
    for label, fn in cases:
        t_pure = with_backend(_purespec, "pure", lambda: timeit(fn))
        t_fast = with_backend(_fastspec, "compiled", lambda: timeit(fn))
        print(f"{label:28s} {t_pure:10.3f} {t_fast:13.3f} {t_pure / t_fast:7.1f}x")


if __name__ == "__main__":
    main()
