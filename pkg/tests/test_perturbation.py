import numpy as np
import pytest

from brinkbie import bie2d, geometry as geo, kernels as kn, perturbation as pert
from brinkbie.geometry import UnsupportedOrderError
from brinkbie.special import ResolventParameter

LAM = ResolventParameter(1.0)
STAR = geo.star(1.0, 0.3, 3)
RHO = geo.rho_cosine(1, 1.0)


def _slope(hs, es):
    return np.polyfit(np.log(hs), np.log(es), 1)[0]


# ---------------------------------------------------------------------------
# boundary-data Taylor terms
# ---------------------------------------------------------------------------

def test_boundary_taylor_constant_and_zero_rho():
    t = np.linspace(0, 2 * np.pi, 8, endpoint=False)
    gc = bie2d.constant_field([1.0, -2.0])
    assert np.abs(pert.boundary_taylor(gc, STAR, RHO, t, 1)).max() == 0.0
    assert np.abs(pert.boundary_taylor(gc, STAR, RHO, t, 2)).max() == 0.0
    g = bie2d.stream_trig_field()
    assert np.abs(pert.boundary_taylor(g, STAR, geo.rho_zero(), t, 1)).max() == 0.0
    assert np.abs(pert.boundary_taylor(g, STAR, geo.rho_zero(), t, 2)).max() == 0.0
    with pytest.raises(UnsupportedOrderError):
        pert.boundary_taylor(g, STAR, RHO, t, 3)


def test_boundary_taylor_remainder_order():
    g = bie2d.point_source_field(np.array([2.5, 1.0]), np.array([1.0, -0.5]), LAM)
    t = np.linspace(0, 2 * np.pi, 16, endpoint=False)
    G = [pert.boundary_taylor(g, STAR, RHO, t, n) for n in range(3)]
    rems = []
    deltas = (2e-2, 1e-2, 5e-3)
    for d in deltas:
        pc = geo.PerturbedCurve2D(STAR, RHO, d)
        rems.append(np.abs(g.value(pc.point(t)) - (G[0] + d * G[1] + d * d * G[2])).max())
    assert _slope(deltas, rems) > 2.9


def test_boundary_taylor_sphere_remainder():
    lam = ResolventParameter(1 + 0.5j)
    sp = geo.SphereSurface(1.0)
    g3 = bie2d.point_source_field(np.array([0.0, 0.0, 3.0]),
                                  np.array([1.0, 0.5, -0.2]), lam, dim=3)
    xs = sp.point(np.array([0.5, 1.2, 2.4]), np.array([0.3, 2.2, 5.0]))
    G = [pert.boundary_taylor_sphere(g3, sp, xs, n) for n in range(3)]
    rems = []
    deltas = (2e-2, 1e-2, 5e-3)
    for d in deltas:
        xt = sp.parallel_point(xs, d)
        rems.append(np.abs(g3.value(xt) - (G[0] + d * G[1] + d * d * G[2])).max())
    assert _slope(deltas, rems) > 2.9


# ---------------------------------------------------------------------------
# expanded kernels against exact perturbed-kernel delta-derivatives
# ---------------------------------------------------------------------------

def test_expansion_kernel_K1_zero_rho():
    K1 = pert.expansion_kernel_K1(STAR, geo.rho_zero(), LAM,
                                  np.array([0.7]), np.array([2.9]))
    assert np.abs(K1).max() == 0.0


def test_expansion_kernel_K1_delta_oracle():
    t0, s0 = 0.7, 2.9
    f0 = geo.frame(STAR, np.array([t0]))
    f1 = geo.frame(STAR, np.array([s0]))
    K1 = pert.expansion_kernel_K1(STAR, RHO, LAM, np.array([t0]), np.array([s0]))[0]
    errs = []
    deltas = (1e-2, 5e-3, 2.5e-3)
    for d in deltas:
        pc = geo.PerturbedCurve2D(STAR, RHO, d)
        xt, _, _ = geo.perturbed_frame(pc, np.array([t0]))
        yt, nuyt, _ = geo.perturbed_frame(pc, np.array([s0]))
        Dd = kn.dl_kernel(xt[0], yt[0], nuyt[0], LAM, 2)
        D0 = kn.dl_kernel(f0.x[0], f1.x[0], f1.normal[0], LAM, 2)
        errs.append(np.abs((Dd - D0) / d - K1).max())
    assert _slope(deltas, errs) > 0.9


def test_expansion_kernel_K1_weak_singularity_witness():
    t0 = 0.7
    eps = np.geomspace(1e-3, 1e-1, 50)
    K1 = pert.expansion_kernel_K1(STAR, RHO, LAM, np.full(50, t0), t0 + eps)
    f0 = geo.frame(STAR, np.array([t0]))
    fy = geo.frame(STAR, t0 + eps)
    r = np.linalg.norm(f0.x[0] - fy.x, axis=-1)
    witness = np.abs(K1).max(axis=(-2, -1)) * r / (1 + np.abs(np.log(r)))
    assert witness.max() < 2.0


def test_expansion_kernel_K1_sphere_delta_oracle():
    lam = ResolventParameter(1 + 0.5j)
    sp = geo.SphereSurface(1.0)
    x = sp.point(0.7, 1.1)
    y = sp.point(2.0, 4.2)
    K1 = pert.expansion_kernel_K1_sphere(sp, lam, x, y)
    errs = []
    deltas = (1e-2, 5e-3, 2.5e-3)
    for d in deltas:
        Dd = kn.dl_kernel(sp.parallel_point(x, d), sp.parallel_point(y, d),
                          sp.normal(y), lam, 3)
        D0 = kn.dl_kernel(x, y, sp.normal(y), lam, 3)
        errs.append(np.abs((Dd - D0) / d - K1).max())
    assert _slope(deltas, errs) > 0.9


def test_interior_kernel_D1_oracles():
    x = np.array([0.1, 0.05])
    s0 = 2.2
    fy = geo.frame(STAR, np.array([s0]))
    D1 = pert.interior_kernel_D1(STAR, RHO, LAM, x, np.array([s0]))[0]
    errs = []
    deltas = (1e-2, 5e-3, 2.5e-3)
    for d in deltas:
        pc = geo.PerturbedCurve2D(STAR, RHO, d)
        yt, nut, _ = geo.perturbed_frame(pc, np.array([s0]))
        Dd = kn.dl_kernel(x, yt[0], nut[0], LAM, 2)
        D0 = kn.dl_kernel(x, fy.x[0], fy.normal[0], LAM, 2)
        errs.append(np.abs((Dd - D0) / d - D1).max())
    assert _slope(deltas, errs) > 0.9
    # zero rho kills it
    D1z = pert.interior_kernel_D1(STAR, geo.rho_zero(), LAM, x, np.array([s0]))
    assert np.abs(D1z).max() == 0.0
    # analytic y-gradient against finite differences in y
    h = 1e-6
    rnu = RHO.rho(np.array([s0]))[0] * fy.normal[0]
    term = kn.dl_kernel_gradient(x, fy.x[0], fy.normal[0], LAM, 2, -rnu)
    fd = (kn.dl_kernel(x, fy.x[0] + h * rnu, fy.normal[0], LAM, 2)
          - kn.dl_kernel(x, fy.x[0] - h * rnu, fy.normal[0], LAM, 2)) / (2 * h)
    assert np.abs(term - fd).max() / np.abs(term).max() < 1e-6


def test_interior_kernel_D1_sphere_oracle():
    lam = ResolventParameter(1 + 0.5j)
    sp = geo.SphereSurface(1.0)
    xi = np.array([0.2, -0.1, 0.3])
    y = sp.point(2.0, 4.2)
    D1 = pert.interior_kernel_D1_sphere(sp, lam, xi, y)
    errs = []
    deltas = (1e-2, 5e-3, 2.5e-3)
    for d in deltas:
        Dd = kn.dl_kernel(xi, sp.parallel_point(y, d), sp.normal(y), lam, 3)
        D0 = kn.dl_kernel(xi, y, sp.normal(y), lam, 3)
        errs.append(np.abs((Dd - D0) / d - D1).max())
    assert _slope(deltas, errs) > 0.9


# ---------------------------------------------------------------------------
# operator, density and field levels
# ---------------------------------------------------------------------------

@pytest.fixture(scope="module")
def rule():
    return bie2d.QuadratureRule(128)


@pytest.fixture(scope="module")
def gdata():
    return bie2d.stream_poly_field()


def test_apply_K1_zero_rho(rule):
    phi = bie2d.Density(np.stack([np.cos(rule.t), np.sin(rule.t)], -1).astype(complex), STAR)
    out = pert.apply_K1(STAR, rule, geo.rho_zero(), LAM, phi)
    assert np.abs(out.values).max() < 1e-14


def test_apply_K1_self_convergence():
    def phiv(t):
        return np.stack([np.cos(t) + 0.3 * np.sin(2 * t),
                         np.sin(t) - 0.2 * np.cos(3 * t)], -1).astype(complex)

    res = {}
    for n in (64, 128, 256):
        r = bie2d.QuadratureRule(n)
        res[n] = pert.apply_K1(STAR, r, RHO, LAM, bie2d.Density(phiv(r.t), STAR)).values
    d1 = np.abs(res[64] - res[128][::2]).max()
    d2 = np.abs(res[128] - res[256][::2]).max()
    assert d2 < d1 / 4


def test_operator_expansion_oracle(rule):
    phi = np.stack([np.cos(rule.t) + 0.3 * np.sin(2 * rule.t),
                    np.sin(rule.t) - 0.2 * np.cos(3 * rule.t)], -1).astype(complex)
    deltas = (4e-2, 2e-2, 1e-2, 5e-3)
    gaps = [pert.operator_gap(STAR, rule, RHO, LAM, phi, d) for d in deltas]
    assert _slope(deltas, gaps) > 1.8


def test_phi_recursion_trivial_cases(rule):
    gc = bie2d.constant_field([1.0, 2.0])
    phi1 = pert.phi_recursion(STAR, rule, geo.rho_zero(), LAM, gc, 1)
    assert np.abs(phi1.values).max() < 1e-12
    with pytest.raises(UnsupportedOrderError):
        pert.phi_recursion(STAR, rule, RHO, LAM, gc, 2)


def test_density_level_rates(rule, gdata):
    phi0 = pert.phi_recursion(STAR, rule, RHO, LAM, gdata, 0)
    phi1 = pert.phi_recursion(STAR, rule, RHO, LAM, gdata, 1)
    deltas = (4e-2, 2e-2, 1e-2, 5e-3)
    r0, r1 = [], []
    for d in deltas:
        phid = pert.perturbed_density(STAR, rule, RHO, LAM, gdata, d)
        r0.append(np.abs(phid.values - phi0.values).max())
        r1.append(np.abs(phid.values - phi0.values - d * phi1.values).max())
    assert _slope(deltas, r0) > 0.9      # density gap is first order
    assert _slope(deltas, r1) > 1.8      # recursion remainder is second order


def test_field_level_rates(rule, gdata):
    pts = np.array([[0.0, 0.0], [0.2, -0.1], [-0.2, 0.15]])
    first = pert.eval_u1(STAR, rule, RHO, LAM, gdata, pts)
    deltas = (4e-2, 2e-2, 1e-2, 5e-3)
    g0, g1 = [], []
    for d in deltas:
        pc = geo.PerturbedCurve2D(STAR, RHO, d)
        phid = bie2d.solve_interior_dirichlet(pc, LAM, gdata, rule)
        ud = bie2d.eval_velocity(pc, rule, phid, LAM, pts)
        g0.append(np.abs(ud - first.u0).max())
        g1.append(np.abs(ud - first.u0 - d * first.u1).max())
    assert _slope(deltas, g0) > 0.9      # field gap is first order
    assert _slope(deltas, g1) > 1.8      # first-order expansion remainder


def test_continuity_gap_zero_rho_and_scaling(rule, gdata):
    pts = np.array([[0.0, 0.0], [0.2, -0.1]])
    tiny = pert.continuity_gap(STAR, rule, geo.rho_zero(), LAM, gdata, 1e-2, pts)
    assert tiny < 1e-10
    gap1 = pert.continuity_gap(STAR, rule, RHO, LAM, gdata, 2e-2, pts)
    g2 = bie2d.BoundaryData(lambda x: 2.0 * gdata.value(x),
                            lambda x: 2.0 * gdata.grad(x),
                            lambda x: 2.0 * gdata.hess(x))
    gap2 = pert.continuity_gap(STAR, rule, RHO, LAM, g2, 2e-2, pts)
    assert abs(gap2 - 2 * gap1) < 1e-8 * max(1.0, gap1)


def test_u1_zero_for_zero_rho(rule, gdata):
    pts = np.array([[0.2, -0.1]])
    res = pert.eval_u1(STAR, rule, geo.rho_zero(), LAM, gdata, pts)
    assert np.abs(res.u1).max() < 1e-10


def test_u1_linearity_in_g(rule):
    pts = np.array([[0.2, -0.1]])
    g = bie2d.stream_poly_field()
    r1 = pert.eval_u1(STAR, rule, RHO, LAM, g, pts)
    g2 = bie2d.BoundaryData(lambda x: 2.0 * g.value(x),
                            lambda x: 2.0 * g.grad(x),
                            lambda x: 2.0 * g.hess(x))
    r2 = pert.eval_u1(STAR, rule, RHO, LAM, g2, pts)
    assert np.abs(r2.u1 - 2 * r1.u1).max() < 1e-8 * max(1.0, np.abs(r1.u1).max())


def test_u1_richardson_on_circle(gdata):
    rule = bie2d.QuadratureRule(256)
    c = geo.circle(1.0)
    rhoc = geo.rho_constant(1.0)
    pt = np.array([[0.2, -0.1]])
    res = pert.eval_u1(c, rule, rhoc, LAM, gdata, pt)
    du = {}
    for d in (2e-2, 1e-2):
        pc = geo.PerturbedCurve2D(c, rhoc, d)
        phid = bie2d.solve_interior_dirichlet(pc, LAM, gdata, rule)
        ud = bie2d.eval_velocity(pc, rule, phid, LAM, pt)
        du[d] = (ud - res.u0) / d
    rich = 2 * du[1e-2] - du[2e-2]
    assert np.abs(rich - res.u1).max() / np.abs(res.u1).max() < 1e-3
