"""Compiled backend must reproduce the pure-numpy backend."""

import numpy as np
import pytest

from brinkbie import _purespec as pure

fast = pytest.importorskip("brinkbie._fastspec")


@pytest.fixture(scope="module")
def zgrid():
    rng = np.random.default_rng(7)
    return (rng.uniform(0.01, 12, 3000)
            * np.exp(1j * rng.uniform(-0.7, 0.7, 3000)))


@pytest.mark.parametrize("fname", [
    "k01", "i012", "p_aux", "d_pair", "d_pair_deriv",
    "e_pair", "e_pair_deriv", "e_pair_deriv2", "blog", "blog_deriv",
])
def test_function_parity(fname, zgrid):
    a = getattr(pure, fname)(zgrid)
    b = getattr(fast, fname)(zgrid)
    if not isinstance(a, tuple):
        a, b = (a,), (b,)
    for x, y in zip(a, b):
        scale = max(float(np.abs(y).max()), 1e-300)
        assert np.abs(x - y).max() / scale < 1e-10


@pytest.mark.parametrize("fname", ["ed_quad_3d", "ed_quad_3d_deriv", "e_quad_3d_deriv2"])
def test_function_parity_3d(fname):
    rng = np.random.default_rng(8)
    eps = rng.uniform(0.01, 8, 2000) * np.exp(1j * rng.uniform(0, 2 * np.pi, 2000))
    a = getattr(pure, fname)(eps)
    b = getattr(fast, fname)(eps)
    for x, y in zip(a, b):
        scale = max(float(np.abs(y).max()), 1e-300)
        assert np.abs(x - y).max() / scale < 1e-12


def test_scalar_shapes_match():
    z = np.complex128(1.3 + 0.2j)
    for mod in (pure, fast):
        k0, k1 = mod.k01(np.asarray(z))
        assert np.shape(k0) == ()


@pytest.mark.parametrize("mode", ["log-split", "fallback"])
def test_fused_assembly_parity(mode):
    from brinkbie import bie2d, geometry as geo
    from brinkbie.special import ResolventParameter
    lam = ResolventParameter(1 + 2j)
    s = geo.star(1.0, 0.3, 3)
    rule = bie2d.QuadratureRule(64)
    A1 = bie2d.assemble_double_layer(s, lam, rule, mode, prefer_compiled=True)
    A2 = bie2d.assemble_double_layer(s, lam, rule, mode, prefer_compiled=False)
    assert np.abs(A1 - A2).max() < 1e-13
