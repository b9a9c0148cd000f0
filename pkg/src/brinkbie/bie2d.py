"""Nystrom discretization of the interior Dirichlet problem via the pure
double-layer representation, plus interior field evaluation.

The second-kind system (1/2 I + K) phi = g is collocated on the uniform
parameter grid.  The weakly singular (logarithmic) kernel part is handled by
the spectral product quadrature for ln(4 sin^2((t-s)/2)) (Martensen/
Kussmaul weights); a plain-trapezoid fallback with the analytic diagonal
limit is kept as a lower-order cross-check.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np

from . import _backend, geometry, kernels
from .kernels import as_resolvent


class SingularSystemError(RuntimeError):
    """Discrete system is rank deficient (lambda in the discrete spectrum or
    broken geometry)."""


class TooCloseToBoundaryError(ValueError):
    pass


class CompatibilityWarning(UserWarning):
    pass


LOG_SPLIT = "log-split"
FALLBACK = "fallback"


@dataclass(frozen=True)
class QuadratureRule:
    """Uniform periodic grid with spectral log-quadrature weights.

    kress[k] are the product-quadrature weights for ln(4 sin^2((t-s)/2));
    logcorr[k] = kress[k] - h*ln(4 sin^2(pi k / n)) corrects a plain
    trapezoid sum of (smooth)*log into the spectral rule.
    """

    n: int
    t: np.ndarray = field(init=False, repr=False)
    h: float = field(init=False)
    kress: np.ndarray = field(init=False, repr=False)
    logcorr: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        n = self.n
        if n < 16 or n % 2 != 0:
            raise ValueError(f"node count must be even and >= 16, got {n}")
        h = 2.0 * np.pi / n
        t = h * np.arange(n)
        m = np.arange(1, n // 2)
        k = np.arange(n)
        R = -(4.0 * np.pi / n) * (np.cos(2.0 * np.pi * np.outer(k, m) / n) / m).sum(axis=1) \
            - (4.0 * np.pi / n ** 2) * np.cos(np.pi * k)
        logcorr = np.zeros(n)
        logcorr[1:] = R[1:] - h * np.log(4.0 * np.sin(np.pi * k[1:] / n) ** 2)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "kress", R)
        object.__setattr__(self, "logcorr", logcorr)


@dataclass
class Density:
    """Vector density sampled at the quadrature nodes."""

    values: np.ndarray           # (n, 2) complex
    curve: geometry.Curve2D

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.complex128)
        if self.values.ndim != 2 or self.values.shape[1] != 2:
            raise ValueError("density values must have shape (n, 2)")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("density contains non-finite entries")

    @property
    def n(self):
        return self.values.shape[0]


@dataclass(frozen=True)
class BoundaryData:
    """Closed-form vector field defined near the curve, with derivatives."""

    value: callable              # x (...,d) -> (...,d)
    grad: callable               # x -> (...,d,d), grad[a,l] = d g_a / d x_l
    hess: callable               # x -> (...,d,d,d), hess[a,l,m]
    dim: int = 2
    name: str = "g"


def constant_field(c, dim=2):
    c = np.asarray(c, dtype=np.complex128)

    def value(x):
        x = np.asarray(x, dtype=float)
        return np.broadcast_to(c, x.shape[:-1] + (dim,)).copy()

    def grad(x):
        x = np.asarray(x, dtype=float)
        return np.zeros(x.shape[:-1] + (dim, dim), dtype=np.complex128)

    def hess(x):
        x = np.asarray(x, dtype=float)
        return np.zeros(x.shape[:-1] + (dim, dim, dim), dtype=np.complex128)

    return BoundaryData(value, grad, hess, dim, f"constant {c}")


def stream_poly_field():
    """Divergence-free polynomial field g = (x1^2, -2 x1 x2) (stream function
    x1^2 x2).  Compatible on every closed curve but *not* a resolvent
    solution, so perturbing the domain genuinely changes the interior field
    (unlike point-source data, whose solution is global)."""

    def value(x):
        x = np.asarray(x, dtype=float)
        return np.stack([x[..., 0] ** 2, -2.0 * x[..., 0] * x[..., 1]],
                        axis=-1).astype(np.complex128)

    def grad(x):
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape[:-1] + (2, 2), dtype=np.complex128)
        out[..., 0, 0] = 2.0 * x[..., 0]
        out[..., 1, 0] = -2.0 * x[..., 1]
        out[..., 1, 1] = -2.0 * x[..., 0]
        return out

    def hess(x):
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape[:-1] + (2, 2, 2), dtype=np.complex128)
        out[..., 0, 0, 0] = 2.0
        out[..., 1, 0, 1] = -2.0
        out[..., 1, 1, 0] = -2.0
        return out

    return BoundaryData(value, grad, hess, 2, "stream-poly")


def stream_trig_field():
    """Divergence-free field g = (sin x1 cos x2, -cos x1 sin x2) (stream
    function sin x1 sin x2); analytic, compatible, not a resolvent solution."""

    def value(x):
        x = np.asarray(x, dtype=float)
        return np.stack([np.sin(x[..., 0]) * np.cos(x[..., 1]),
                         -np.cos(x[..., 0]) * np.sin(x[..., 1])],
                        axis=-1).astype(np.complex128)

    def grad(x):
        x = np.asarray(x, dtype=float)
        s1, c1 = np.sin(x[..., 0]), np.cos(x[..., 0])
        s2, c2 = np.sin(x[..., 1]), np.cos(x[..., 1])
        out = np.empty(x.shape[:-1] + (2, 2), dtype=np.complex128)
        out[..., 0, 0] = c1 * c2
        out[..., 0, 1] = -s1 * s2
        out[..., 1, 0] = s1 * s2
        out[..., 1, 1] = -c1 * c2
        return out

    def hess(x):
        x = np.asarray(x, dtype=float)
        s1, c1 = np.sin(x[..., 0]), np.cos(x[..., 0])
        s2, c2 = np.sin(x[..., 1]), np.cos(x[..., 1])
        out = np.empty(x.shape[:-1] + (2, 2, 2), dtype=np.complex128)
        out[..., 0, 0, 0] = -s1 * c2
        out[..., 0, 0, 1] = -c1 * s2
        out[..., 0, 1, 0] = -c1 * s2
        out[..., 0, 1, 1] = -s1 * c2
        out[..., 1, 0, 0] = c1 * s2
        out[..., 1, 0, 1] = s1 * c2
        out[..., 1, 1, 0] = s1 * c2
        out[..., 1, 1, 1] = c1 * s2
        return out

    return BoundaryData(value, grad, hess, 2, "stream-trig")


def point_source_field(y0, c, lam, dim=2):
    """Trace field g(x) = Gamma(x - y0) c for a source y0 outside the domain;
    analytic wherever x != y0, divergence free, satisfies the resolvent
    system, so its boundary compatibility integral vanishes."""
    y0 = np.asarray(y0, dtype=float)
    c = np.asarray(c, dtype=np.complex128)
    lam = as_resolvent(lam)

    def value(x):
        g, _ = kernels.fundamental_tensor(np.asarray(x, dtype=float) - y0, lam, dim)
        return np.einsum("...ab,b->...a", g, c)

    def grad(x):
        dg = kernels.fundamental_tensor_grad(np.asarray(x, dtype=float) - y0, lam, dim)
        return np.einsum("...abl,b->...al", dg, c)

    def hess(x):
        d2g = kernels.fundamental_tensor_hess(np.asarray(x, dtype=float) - y0, lam, dim)
        return np.einsum("...ablm,b->...alm", d2g, c)

    return BoundaryData(value, grad, hess, dim, f"point-source {tuple(y0)}")


def _node_frames(curve, rule):
    return geometry.frame(curve, rule.t)


def assemble_double_layer(curve, lam, rule, mode=LOG_SPLIT, prefer_compiled=True):
    """Dense (2n, 2n) Nystrom matrix for the principal-value double layer.

    Uses the fused compiled assembly kernel when the extension is present
    (`prefer_compiled=False` forces the numpy reference path)."""
    if mode not in (LOG_SPLIT, FALLBACK):
        raise ValueError(f"unknown quadrature mode {mode!r}")
    lam = as_resolvent(lam)
    fr = _node_frames(curve, rule)
    n = rule.n
    fused = getattr(_backend.impl, "assemble_dl_blocks", None)
    if prefer_compiled and fused is not None:
        return fused(np.ascontiguousarray(fr.x), np.ascontiguousarray(fr.normal),
                     np.ascontiguousarray(fr.speed), np.ascontiguousarray(fr.curvature),
                     np.ascontiguousarray(fr.tangent),
                     complex(lam.lam), complex(lam.sqrt_lam),
                     rule.h, rule.kress, rule.logcorr, mode == LOG_SPLIT)
    x = fr.x
    q = x[:, None, :] - x[None, :, :]
    diag = np.arange(n)
    q[diag, diag, :] = 1.0                      # dummy, overwritten below
    origin = np.zeros(2)
    D = kernels.dl_kernel(q, origin, fr.normal[None, :, :], lam, 2)
    M = D * fr.speed[None, :, None, None]
    blocks = rule.h * M
    if mode == LOG_SPLIT:
        Dlog = kernels.dl_kernel_log(q, origin, fr.normal[None, :, :], lam)
        M1 = 0.5 * Dlog * fr.speed[None, :, None, None]
        corr = rule.logcorr[(diag[:, None] - diag[None, :]) % n]
        blocks = blocks + corr[:, :, None, None] * M1
    Ddiag = kernels.dl_kernel_diagonal_2d(fr.tangent, fr.curvature)
    blocks[diag, diag] = rule.h * Ddiag * fr.speed[:, None, None]
    return blocks.transpose(0, 2, 1, 3).reshape(2 * n, 2 * n)


def compatibility_residual(curve, rule, g):
    """|oint g . nu dsigma| by the trapezoid rule."""
    fr = _node_frames(curve, rule)
    if isinstance(g, BoundaryData):
        vals = g.value(fr.x)
    elif callable(g):
        vals = np.asarray(g(fr.x))
    else:
        vals = np.asarray(g)
    flux = np.einsum("ja,ja,j->", vals, fr.normal, fr.speed) * rule.h
    return float(abs(flux))


def gauge_vector(curve, rule):
    """Discrete flux functional phi -> oint phi . nu dsigma as a flat vector."""
    fr = _node_frames(curve, rule)
    return (fr.normal * (fr.speed * rule.h)[:, None]).reshape(-1)


def deflated_system(curve, rule, A, gauge=None):
    """(1/2 I + A) completed by the rank-one term nu <gauge, .> / |dOmega|.

    The interior double-layer operator annihilates exactly one density
    direction (its range consists of flux-free fields, so the nu-flux
    functional spans the cokernel).  For compatible data the completed
    system has the same solutions with <gauge, phi> = 0 pinned, which makes
    densities comparable across solves.  `gauge` defaults to the curve's own
    flux functional; perturbation studies pass the base curve's so that all
    densities share one gauge.
    """
    fr = _node_frames(curve, rule)
    nu_flat = fr.normal.reshape(-1)
    if gauge is None:
        gauge = gauge_vector(curve, rule)
    perimeter = float(np.sum(fr.speed) * rule.h)
    return 0.5 * np.eye(2 * rule.n) + A + np.outer(nu_flat, gauge) / perimeter


def _lu_solve(sys, rhs):
    try:
        sol = np.linalg.solve(sys, rhs)
    except np.linalg.LinAlgError as exc:
        raise SingularSystemError(str(exc)) from exc
    if not np.all(np.isfinite(sol)):
        raise SingularSystemError("solver produced non-finite density")
    return sol


def solve_interior_dirichlet(curve, lam, g, rule, mode=LOG_SPLIT,
                             compat_rtol=1e-8, gauge=None):
    """Solve (1/2 I + K) phi = g|_boundary by dense LU; returns the density
    in the zero-flux gauge (see `deflated_system`)."""
    lam = as_resolvent(lam)
    fr = _node_frames(curve, rule)
    gvals = np.asarray(g.value(fr.x), dtype=np.complex128)
    resid = compatibility_residual(curve, rule, gvals)
    perimeter = float(np.sum(fr.speed) * rule.h)
    scale = max(1.0, float(np.abs(gvals).max())) * perimeter
    if resid > compat_rtol * scale:
        warnings.warn(
            f"boundary data violates the compatibility condition: "
            f"|oint g.nu| = {resid:.3e} (scale {scale:.3e})",
            CompatibilityWarning, stacklevel=2)
    A = assemble_double_layer(curve, lam, rule, mode)
    sol = _lu_solve(deflated_system(curve, rule, A, gauge), gvals.reshape(-1))
    return Density(sol.reshape(rule.n, 2), curve)


def clearance_distance(curve, rule, factor=5.0):
    """Minimum admissible distance from the curve for interior evaluation."""
    fr = _node_frames(curve, rule)
    return factor * rule.h * float(fr.speed.max())


def _check_clearance(points, fr, rule, factor):
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    dmin = np.sqrt(((pts[:, None, :] - fr.x[None, :, :]) ** 2).sum(-1)).min(axis=1)
    clear = factor * rule.h * float(fr.speed.max())
    if np.any(dmin < clear):
        bad = pts[dmin < clear]
        raise TooCloseToBoundaryError(
            f"points {bad.tolist()} are closer than the clearance {clear:.3e}")
    return pts


def eval_velocity(curve, rule, phi, lam, points, clearance_factor=5.0):
    """Double-layer velocity W phi at interior points (smooth quadrature)."""
    lam = as_resolvent(lam)
    fr = _node_frames(curve, rule)
    pts = _check_clearance(points, fr, rule, clearance_factor)
    D = kernels.dl_kernel(pts[:, None, :], fr.x[None, :, :],
                          fr.normal[None, :, :], lam, 2)
    return np.einsum("pjab,jb,j->pa", D, phi.values, fr.speed) * rule.h


def eval_pressure(curve, rule, phi, lam, points, clearance_factor=5.0):
    """Double-layer pressure Pi phi at interior points (up to the
    representation; no constant adjustment)."""
    lam = as_resolvent(lam)
    fr = _node_frames(curve, rule)
    pts = _check_clearance(points, fr, rule, clearance_factor)
    Lam = kernels.pressure_tensor(pts[:, None, :], fr.x[None, :, :], lam, 2)
    return np.einsum("pjbk,jk,jb,j->p", Lam, fr.normal.astype(complex),
                     phi.values, fr.speed) * rule.h


def eval_single_layer(curve, rule, phi, lam, points):
    """(V phi, Q phi) at points off the curve (either side)."""
    lam = as_resolvent(lam)
    fr = _node_frames(curve, rule)
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    dmin = np.sqrt(((pts[:, None, :] - fr.x[None, :, :]) ** 2).sum(-1)).min()
    if dmin == 0.0:
        raise TooCloseToBoundaryError("single-layer evaluation point on the curve")
    q = pts[:, None, :] - fr.x[None, :, :]
    gamma, f = kernels.fundamental_tensor(q, lam, 2)
    vel = np.einsum("pjab,jb,j->pa", gamma, phi.values, fr.speed) * rule.h
    prs = np.einsum("pjb,jb,j->p", f.astype(complex), phi.values, fr.speed) * rule.h
    return vel, prs
