import json
import pathlib

import numpy as np
import pytest

from brinkbie import special
from brinkbie.special import DomainError, ResolventParameter

DATA = pathlib.Path(__file__).parent / "data" / "bessel_reference.json"


@pytest.fixture(scope="module")
def reference():
    return json.loads(DATA.read_text())


def test_bessel_against_reference(reference):
    zs = np.array([complex(*row["z"]) for row in reference["values"]])
    for order in (0, 1, 2):
        ref = np.array([complex(*row[f"k{order}"]) for row in reference["values"]])
        got = special.bessel_k(order, zs)
        rel = np.abs(got - ref) / np.abs(ref)
        assert rel.max() < 1e-10, f"K{order}: worst rel err {rel.max():.2e}"


def test_bessel_k0_at_one():
    # frozen arbitrary-precision value
    assert abs(special.bessel_k(0, 1.0) - 0.4210244382407083) < 1e-12


def test_bessel_recurrence():
    rng = np.random.default_rng(3)
    z = rng.uniform(1e-2, 50, 200) * np.exp(1j * rng.uniform(-0.6, 0.6, 200))
    k0 = special.bessel_k(0, z)
    k1 = special.bessel_k(1, z)
    k2 = special.bessel_k(2, z)
    rel = np.abs(k2 - (k0 + 2.0 * k1 / z)) / np.abs(k2)
    assert rel.max() < 1e-12


def test_bessel_large_argument_asymptotic():
    z = 30.0
    asym = np.sqrt(np.pi / (2 * z)) * np.exp(-z) * (1 + 3 / (8 * z))
    assert abs(special.bessel_k(1, z) - asym) / asym < 1e-3


def test_k0_derivative_is_minus_k1():
    # K0'(z) = -K1(z), via central differences at O(h^2)
    z0 = 1.7 + 0.4j
    errs = []
    for h in (1e-2, 5e-3, 2.5e-3):
        fd = (special.bessel_k(0, z0 + h) - special.bessel_k(0, z0 - h)) / (2 * h)
        errs.append(abs(fd + special.bessel_k(1, z0)))
    errs = np.array(errs)
    orders = np.log2(errs[:-1] / errs[1:])
    assert orders.min() > 1.9


def test_branch_agreement_on_switchover_ring():
    from brinkbie._purespec import _k01_cf2, _k01_series
    ring = (4.0 * np.exp(np.linspace(-0.05, 0.05, 9))[:, None]
            * np.exp(1j * np.linspace(0, 0.6, 7))[None, :]).ravel()
    s0, s1 = _k01_series(ring)
    c0, c1 = _k01_cf2(ring)
    assert (np.abs(s0 - c0) / np.abs(c0)).max() < 1e-10
    assert (np.abs(s1 - c1) / np.abs(c1)).max() < 1e-10


def test_aux_branch_agreement():
    # series and closed-form branches agree on an annulus around the cut
    from brinkbie import _purespec as ps
    ring = (0.25 * np.exp(np.linspace(-0.15, 0.15, 9))[:, None]
            * np.exp(1j * np.linspace(-0.5, 0.5, 5))[None, :]).ravel()
    K0, K1 = ps.k01(ring)
    K2 = K0 + 2 * K1 / ring
    d1 = 2 * K2 + 1 - 4 / ring ** 2
    d2 = 2 * K2 + ring * K1 - 4 / ring ** 2
    s = ps._d_pair_series(ring)
    assert (np.abs(s[0] - d1) / np.abs(d1)).max() < 1e-10
    assert (np.abs(s[1] - d2) / np.abs(d2)).max() < 1e-10
    sp = ps._p_aux_series(ring)
    assert (np.abs(sp - (K1 / ring - 1 / ring ** 2)) / np.abs(sp)).max() < 1e-10
    z3 = ring ** 3
    d1p = -2 * K1 - 4 * K2 / ring + 8 / z3
    d2p = -2 * K1 - 4 * K2 / ring - ring * K0 + 8 / z3
    sd = ps._d_pair_deriv_series(ring)
    assert (np.abs(sd[0] - d1p) / np.abs(d1p)).max() < 1e-9
    assert (np.abs(sd[1] - d2p) / np.abs(d2p)).max() < 1e-9


def test_e_pair_identities():
    rng = np.random.default_rng(5)
    z = rng.uniform(0.05, 20, 100) * np.exp(1j * rng.uniform(-0.5, 0.5, 100))
    e1, e2 = special.e_pair_2d(z)
    k1 = special.bessel_k(1, z)
    assert np.abs((e1 + e2) - (-k1 / z + 1 / z ** 2)).max() < 1e-12
    # direct substitution at kappa = 1
    e1_1, _ = special.e_pair_2d(1.0)
    expect = special.bessel_k(0, 1.0) + special.bessel_k(1, 1.0) - 1.0
    assert abs(e1_1 - expect) < 1e-12


def test_e1_small_argument_series():
    # cancellation-safe value matches the analytic small-z form to 1e-9
    z = 1e-4
    e1, _ = special.e_pair_2d(z)
    # e1 -> -(1/2)ln(z/2) - gamma/2 - 1/4 + O(z^2 ln z)
    lead = -0.5 * np.log(z / 2) - special.EULER_GAMMA / 2 - 0.25
    assert abs(e1 - lead) / abs(lead) < 1e-8


def test_d_pair_identities():
    rng = np.random.default_rng(6)
    z = rng.uniform(0.05, 20, 100) * np.exp(1j * rng.uniform(-0.5, 0.5, 100))
    d1, d2 = special.d_pair_2d(z)
    k1 = special.bessel_k(1, z)
    assert np.abs((d2 - d1) - (z * k1 - 1)).max() < 5e-12
    # d1(kappa) -> 0 as kappa -> 0
    assert abs(special.d_pair_2d(1e-3)[0]) < 1e-4
    # direct substitution at kappa = 2: d1 = 2 K2(2)
    d1_2, _ = special.d_pair_2d(2.0)
    assert abs(d1_2 - 2 * special.bessel_k(2, 2.0)) < 1e-13


def test_ed_quad_3d_values_at_zero():
    e1, e2, d1, d2 = special.ed_quad_3d(0.0)
    assert e1 == pytest.approx(0.5, abs=1e-15)
    assert e2 == pytest.approx(0.5, abs=1e-15)
    assert d1 == 0.0
    assert d2 == 0.0


def test_ed_quad_3d_branch_agreement():
    from brinkbie import _purespec as ps
    ring = 0.5 * np.exp(1j * np.linspace(0, 2 * np.pi, 17))
    s = ps._ed3_series(ring)
    p = ring
    E = np.exp(p)
    closed = (E * (1 - 1 / p + 1 / p ** 2) - 1 / p ** 2,
              E * (-1 + 3 / p - 3 / p ** 2) + 3 / p ** 2,
              E * (2 - 6 / p + 6 / p ** 2) - 6 / p ** 2 + 1,
              E * (p - 3 + 6 / p - 6 / p ** 2) + 6 / p ** 2)
    for a, b in zip(s, closed):
        assert np.abs(a - b).max() < 1e-13


def test_domain_errors():
    with pytest.raises(DomainError):
        special.bessel_k(0, -1.0)
    with pytest.raises(DomainError):
        special.bessel_k(0, 0.0)
    with pytest.raises(DomainError):
        special.e_pair_2d(-0.3 + 0.1j)
    with pytest.raises(ValueError):
        special.bessel_k(3, 1.0)


def test_resolvent_parameter():
    lam = ResolventParameter(1 + 2j)
    assert lam.sqrt_lam.real > 0
    assert abs(lam.sqrt_lam ** 2 - lam.lam) < 1e-15
    with pytest.raises(DomainError):
        ResolventParameter(-1.0)
    with pytest.raises(DomainError):
        ResolventParameter(0.0)
    # allowed: negative real part with nonzero imaginary part
    lam2 = ResolventParameter(-1.0 + 0.1j)
    assert lam2.sqrt_lam.real > 0


def test_purity():
    z = np.array([0.3 + 0.2j, 5.0 - 1.0j])
    a = special.bessel_k(0, z)
    b = special.bessel_k(0, z)
    assert np.array_equal(a, b)
