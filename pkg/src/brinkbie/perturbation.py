"""First-order boundary-perturbation machinery: boundary-data Taylor terms,
the expanded kernels K^1 (boundary) and D^1 (interior), the operator K^1
applied through the log-split quadrature, the density recursion, the
first-order interior term u_1, and the direct-solve continuity gap.

Sign conventions are fixed by the delta-derivative of the exact
perturbed-curve objects and are witnessed by the delta-halving oracles in
the tests:

  K^1(x,y) = -(rho(x)nu(x)-rho(y)nu(y)) . grad S .. nu(y) - S .. nu^1(y)
  D^1(x,y) = + rho(y) (nu(y) . grad) S .. nu(y)           - S .. nu^1(y)
  phi^1    = (1/2 I + K)^{-1} (G^1 - K^1 phi^0)
  u_1(x)   = int [ D^1 phi^0 + D (sigma^1 phi^0 + phi^1) ] dsigma

(".." denotes the double-layer contraction D_ij = -S_jik m_k; sigma^1 =
-tau rho.)  On the sphere (3D) the nu^1 terms vanish.
"""

from dataclasses import dataclass

import numpy as np

from . import bie2d, geometry, kernels
from .geometry import UnsupportedOrderError
from .kernels import as_resolvent


@dataclass(frozen=True)
class FirstOrderResult:
    """Unperturbed interior velocities and the first-order correction."""

    u0: np.ndarray
    u1: np.ndarray
    points: np.ndarray


def boundary_taylor(g, curve, rho, t, n):
    """Taylor term G^n of the boundary data pulled back to the base curve
    (2D): G^0 = g, G^1 = rho nu.grad g, G^2 = (1/2)(rho nu)^T hess(g) (rho nu)."""
    if n not in (0, 1, 2):
        raise UnsupportedOrderError(f"boundary Taylor term implemented for n <= 2, got {n}")
    fr = geometry.frame(curve, t)
    if n == 0:
        return g.value(fr.x)
    rnu = rho.rho(t)[..., None] * fr.normal
    if n == 1:
        return np.einsum("...al,...l->...a", g.grad(fr.x), rnu)
    return 0.5 * np.einsum("...alm,...l,...m->...a", g.hess(fr.x), rnu, rnu)


def boundary_taylor_sphere(g, sphere, x, n):
    """3D parallel-surface Taylor term: G^1 = nu.grad g, G^2 = (1/2) nu^T hess g nu."""
    if n not in (0, 1, 2):
        raise UnsupportedOrderError(f"boundary Taylor term implemented for n <= 2, got {n}")
    x = np.asarray(x, dtype=float)
    if n == 0:
        return g.value(x)
    nu = sphere.normal(x)
    if n == 1:
        return np.einsum("...al,...l->...a", g.grad(x), nu)
    return 0.5 * np.einsum("...alm,...l,...m->...a", g.hess(x), nu, nu)


def expansion_kernel_K1(curve, rho, lam, t, s):
    """First-order expanded boundary kernel K^1(x(t), y(s)), 2D."""
    lam = as_resolvent(lam)
    fx = geometry.frame(curve, np.asarray(t, dtype=float))
    fy = geometry.frame(curve, np.asarray(s, dtype=float))
    drnu = rho.rho(np.asarray(t, float))[..., None] * fx.normal \
        - rho.rho(np.asarray(s, float))[..., None] * fy.normal
    nu1 = geometry.nu_expansion(curve, rho, np.asarray(s, float), 1)
    out = kernels.dl_kernel_gradient(fx.x, fy.x, fy.normal, lam, 2, drnu)
    out = out + kernels.dl_kernel(fx.x, fy.x, nu1, lam, 2)
    return out


def expansion_kernel_K1_log(curve, rho, lam, t, s):
    """ln(r)-coefficient of K^1 (smooth; vanishes on the diagonal)."""
    lam = as_resolvent(lam)
    fx = geometry.frame(curve, np.asarray(t, dtype=float))
    fy = geometry.frame(curve, np.asarray(s, dtype=float))
    drnu = rho.rho(np.asarray(t, float))[..., None] * fx.normal \
        - rho.rho(np.asarray(s, float))[..., None] * fy.normal
    nu1 = geometry.nu_expansion(curve, rho, np.asarray(s, float), 1)
    dSlog = kernels.stress_log_gradient_2d(fx.x, fy.x, lam, drnu)
    out = -np.einsum("...jik,...k->...ij", dSlog, fy.normal)
    Slog = kernels.stress_log_2d(fx.x, fy.x, lam)
    out = out - np.einsum("...jik,...k->...ij", Slog, nu1)
    return out


def expansion_kernel_K1_sphere(sphere, lam, x, y):
    """3D variant on the sphere: the nu^1 term drops (parallel surfaces)."""
    lam = as_resolvent(lam)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    dnu = sphere.normal(x) - sphere.normal(y)
    return kernels.dl_kernel_gradient(x, y, sphere.normal(y), lam, 3, dnu)


def interior_kernel_D1(curve, rho, lam, x, s):
    """First-order interior kernel D^1(x, y(s)) for x away from the curve."""
    lam = as_resolvent(lam)
    fy = geometry.frame(curve, np.asarray(s, dtype=float))
    x = np.asarray(x, dtype=float)
    rnu = rho.rho(np.asarray(s, float))[..., None] * fy.normal
    nu1 = geometry.nu_expansion(curve, rho, np.asarray(s, float), 1)
    out = kernels.dl_kernel_gradient(x, fy.x, fy.normal, lam, 2, -rnu)
    out = out + kernels.dl_kernel(x, fy.x, nu1, lam, 2)
    return out


def interior_kernel_D1_sphere(sphere, lam, x, y):
    """3D variant on the sphere (rho = 1, nu^1 = 0)."""
    lam = as_resolvent(lam)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    nu = sphere.normal(y)
    return kernels.dl_kernel_gradient(x, y, nu, lam, 3, -nu)


def _even_diagonal_extrapolation(M, order=2):
    """Diagonal of a kernel matrix with a removable diagonal point, by
    fourth-order even extrapolation from the 1st and 2nd off-diagonals."""
    n = M.shape[0]
    i = np.arange(n)
    e1 = 0.5 * (M[i, (i + 1) % n] + M[i, (i - 1) % n])
    e2 = 0.5 * (M[i, (i + 2) % n] + M[i, (i - 2) % n])
    return (4.0 * e1 - e2) / 3.0


def apply_K1(curve, rule, rho, lam, phi, mode=bie2d.LOG_SPLIT):
    """Node samples of K^1_Omega phi = p.v. int [K^1 sigma^0 + K^0 sigma^1]
    phi dsigma, using the solver's log-split quadrature for both kernels."""
    lam = as_resolvent(lam)
    n = rule.n
    t = rule.t
    fr = geometry.frame(curve, t)
    s1 = geometry.sigma_expansion(curve, rho, t, 1)
    ti = t[:, None] + np.zeros_like(t)[None, :]
    sj = np.zeros_like(t)[:, None] + t[None, :]
    diag = np.arange(n)
    # keep the diagonal away from the kernel singularity; overwritten below
    sj_off = sj.copy()
    sj_off[diag, diag] = t[(diag + 1) % n]
    K1 = expansion_kernel_K1(curve, rho, lam, ti, sj_off)
    q = fr.x[:, None, :] - fr.x[None, :, :]
    q[diag, diag, :] = 1.0
    K0 = kernels.dl_kernel(q, np.zeros(2), fr.normal[None, :, :], lam, 2)
    Ktot = K1 + K0 * s1[None, :, None, None]
    M = Ktot * fr.speed[None, :, None, None]
    if mode == bie2d.LOG_SPLIT:
        L1 = expansion_kernel_K1_log(curve, rho, lam, ti, sj_off)
        Dlog = kernels.dl_kernel_log(q, np.zeros(2), fr.normal[None, :, :], lam)
        Ltot = (L1 + Dlog * s1[None, :, None, None]) * fr.speed[None, :, None, None]
        Ltot[diag, diag] = 0.0      # exact coincidence limit of the log coefficient
        dt = ti - sj
        lnfac = np.log(4.0 * np.sin(0.5 * dt) ** 2,
                       out=np.zeros_like(dt), where=~np.eye(n, dtype=bool))
        M1 = 0.5 * Ltot
        M2 = M - M1 * lnfac[..., None, None]
        M2[diag, diag] = _even_diagonal_extrapolation(M2)
        corr = rule.kress[(diag[:, None] - diag[None, :]) % n]
        blocks = corr[:, :, None, None] * M1 + rule.h * M2
    else:
        M[diag, diag] = _even_diagonal_extrapolation(M)
        blocks = rule.h * M
    out = np.einsum("ijab,jb->ia", blocks, phi.values)
    return bie2d.Density(out, curve)


def phi_recursion(curve, rule, rho, lam, g, n, mode=bie2d.LOG_SPLIT):
    """Density expansion terms: phi^0 (unperturbed solve) and
    phi^1 = (1/2 I + K)^{-1}(G^1 - K^1 phi^0)."""
    if n not in (0, 1):
        raise UnsupportedOrderError(f"density recursion implemented for n <= 1, got {n}")
    lam = as_resolvent(lam)
    phi0 = bie2d.solve_interior_dirichlet(curve, lam, g, rule, mode)
    if n == 0:
        return phi0
    G1 = boundary_taylor(g, curve, rho, rule.t, 1)
    K1phi0 = apply_K1(curve, rule, rho, lam, phi0, mode)
    rhs = (G1 - K1phi0.values).reshape(-1)
    A = bie2d.assemble_double_layer(curve, lam, rule, mode)
    sol = bie2d._lu_solve(bie2d.deflated_system(curve, rule, A), rhs)
    return bie2d.Density(sol.reshape(rule.n, 2), curve)


def eval_u1(curve, rule, rho, lam, g, points, mode=bie2d.LOG_SPLIT,
            clearance_factor=5.0):
    """First-order interior term u_1 (and u_0) at interior points."""
    lam = as_resolvent(lam)
    phi0 = bie2d.solve_interior_dirichlet(curve, lam, g, rule, mode)
    phi1 = phi_recursion(curve, rule, rho, lam, g, 1, mode)
    fr = geometry.frame(curve, rule.t)
    pts = bie2d._check_clearance(points, fr, rule, clearance_factor)
    s1 = geometry.sigma_expansion(curve, rho, rule.t, 1)
    u0 = bie2d.eval_velocity(curve, rule, phi0, lam, pts, clearance_factor)
    D = kernels.dl_kernel(pts[:, None, :], fr.x[None, :, :],
                          fr.normal[None, :, :], lam, 2)
    D1 = interior_kernel_D1(curve, rho, lam, pts[:, None, :],
                            np.broadcast_to(rule.t, (len(pts), rule.n)))
    mixed = s1[:, None] * phi0.values + phi1.values
    u1 = np.einsum("pjab,jb,j->pa", D1, phi0.values, fr.speed)
    u1 = u1 + np.einsum("pjab,jb,j->pa", D, mixed, fr.speed)
    u1 = u1 * rule.h
    return FirstOrderResult(u0, u1, pts)


def continuity_gap(curve, rule, rho, lam, g, delta, points,
                   mode=bie2d.LOG_SPLIT, clearance_factor=5.0):
    """max over points of |u_delta - u| with u_delta solved on the exact
    perturbed curve with boundary data g restricted to it."""
    lam = as_resolvent(lam)
    phi = bie2d.solve_interior_dirichlet(curve, lam, g, rule, mode)
    u = bie2d.eval_velocity(curve, rule, phi, lam, points, clearance_factor)
    pcurve = geometry.PerturbedCurve2D(curve, rho, delta)
    phid = bie2d.solve_interior_dirichlet(pcurve, lam, g, rule, mode)
    ud = bie2d.eval_velocity(pcurve, rule, phid, lam, points, clearance_factor)
    return float(np.abs(ud - u).max())


def perturbed_density(curve, rule, rho, lam, g, delta, mode=bie2d.LOG_SPLIT):
    """Direct perturbed-curve density pulled back to the parameter grid
    (phi_delta = phi~ o psi_delta; trivial on a shared grid).  Solved in the
    base curve's gauge so densities at different delta are comparable."""
    pcurve = geometry.PerturbedCurve2D(curve, rho, delta)
    gauge = bie2d.gauge_vector(curve, rule)
    return bie2d.solve_interior_dirichlet(pcurve, lam, g, rule, mode, gauge=gauge)


def operator_gap(curve, rule, rho, lam, phi_values, delta, mode=bie2d.LOG_SPLIT):
    """sup-norm of (K_{Omega_delta} phi~) o psi_delta - K phi - delta K^1 phi
    for a fixed test density given by node values."""
    lam = as_resolvent(lam)
    phi = bie2d.Density(np.asarray(phi_values, dtype=complex), curve)
    A = bie2d.assemble_double_layer(curve, lam, rule, mode)
    pcurve = geometry.PerturbedCurve2D(curve, rho, delta)
    Ad = bie2d.assemble_double_layer(pcurve, lam, rule, mode)
    v = phi.values.reshape(-1)
    k1 = apply_K1(curve, rule, rho, lam, phi, mode).values.reshape(-1)
    gap = Ad @ v - A @ v - delta * k1
    return float(np.abs(gap).max())
