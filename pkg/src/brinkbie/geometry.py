"""Closed-curve geometry, exact delta-perturbed curves and the expansion
ingredients of the perturbed normal, length element and distance.

Curves are parametrized on t in [0, 2pi) and need not be arclength; all
arclength-convention quantities (curvature tau with X'' = tau*nu, tangential
derivative rho') are recovered by dividing by the speed |X'|.  Sign
conventions: nu = R_{-pi/2} T points outward for counterclockwise curves,
which makes tau = -1/R on a circle of radius R.
"""

from collections import namedtuple
from dataclasses import dataclass
from typing import Callable

import numpy as np


class GeometryError(ValueError):
    pass


class UnsupportedOrderError(ValueError):
    pass


class PerturbationTooLarge(ValueError):
    pass


def _rot(v):
    """Rotation by -pi/2: (a, b) -> (b, -a), acting on the last axis."""
    return np.stack([v[..., 1], -v[..., 0]], axis=-1)


@dataclass
class Curve2D:
    """C^2 closed curve given by analytic position and derivative callables.
    Treated as immutable after construction."""

    point: Callable
    d1: Callable
    d2: Callable
    d3: Callable
    name: str = "curve"
    params: tuple = ()

    def speed(self, t):
        return np.linalg.norm(self.d1(t), axis=-1)


def circle(radius=1.0, center=(0.0, 0.0)):
    R = float(radius)
    cx, cy = float(center[0]), float(center[1])

    def pt(t):
        t = np.asarray(t, dtype=float)
        return np.stack([cx + R * np.cos(t), cy + R * np.sin(t)], axis=-1)

    def v1(t):
        t = np.asarray(t, dtype=float)
        return np.stack([-R * np.sin(t), R * np.cos(t)], axis=-1)

    def v2(t):
        t = np.asarray(t, dtype=float)
        return np.stack([-R * np.cos(t), -R * np.sin(t)], axis=-1)

    def v3(t):
        t = np.asarray(t, dtype=float)
        return np.stack([R * np.sin(t), -R * np.cos(t)], axis=-1)

    return Curve2D(pt, v1, v2, v3, "circle", (R, cx, cy))


def ellipse(a=1.0, b=0.5):
    a = float(a)
    b = float(b)

    def pt(t):
        t = np.asarray(t, dtype=float)
        return np.stack([a * np.cos(t), b * np.sin(t)], axis=-1)

    def v1(t):
        t = np.asarray(t, dtype=float)
        return np.stack([-a * np.sin(t), b * np.cos(t)], axis=-1)

    def v2(t):
        t = np.asarray(t, dtype=float)
        return np.stack([-a * np.cos(t), -b * np.sin(t)], axis=-1)

    def v3(t):
        t = np.asarray(t, dtype=float)
        return np.stack([a * np.sin(t), -b * np.cos(t)], axis=-1)

    return Curve2D(pt, v1, v2, v3, "ellipse", (a, b))


def star(base_radius=1.0, amplitude=0.3, lobes=3):
    """Smooth star r(t) = R + a*cos(k t); regular for |a|*? < R."""
    R = float(base_radius)
    a = float(amplitude)
    k = int(lobes)
    if abs(a) >= R:
        raise GeometryError("star amplitude must be smaller than base radius")

    def _parts(t):
        t = np.asarray(t, dtype=float)
        u = np.stack([np.cos(t), np.sin(t)], axis=-1)
        v = np.stack([-np.sin(t), np.cos(t)], axis=-1)
        return t, u, v

    def pt(t):
        t, u, _ = _parts(t)
        r = R + a * np.cos(k * t)
        return r[..., None] * u

    def v1(t):
        t, u, v = _parts(t)
        r = R + a * np.cos(k * t)
        rp = -a * k * np.sin(k * t)
        return rp[..., None] * u + r[..., None] * v

    def v2(t):
        t, u, v = _parts(t)
        r = R + a * np.cos(k * t)
        rp = -a * k * np.sin(k * t)
        rpp = -a * k * k * np.cos(k * t)
        return (rpp - r)[..., None] * u + (2 * rp)[..., None] * v

    def v3(t):
        t, u, v = _parts(t)
        r = R + a * np.cos(k * t)
        rp = -a * k * np.sin(k * t)
        rpp = -a * k * k * np.cos(k * t)
        rppp = a * k ** 3 * np.sin(k * t)
        return (rppp - 3 * rp)[..., None] * u + (3 * rpp - r)[..., None] * v

    return Curve2D(pt, v1, v2, v3, "star", (R, a, k))


Frame = namedtuple("Frame", "x tangent normal curvature speed")


def frame(curve, t):
    """Position, unit tangent, outward normal, arclength curvature, speed."""
    xp = curve.d1(t)
    w = np.linalg.norm(xp, axis=-1)
    if np.any(w == 0.0):
        raise GeometryError("degenerate parametrization: |X'(t)| = 0")
    T = xp / w[..., None]
    nu = _rot(T)
    tau = np.einsum("...i,...i->...", curve.d2(t), nu) / w ** 2
    return Frame(curve.point(t), T, nu, tau, w)


def normal_derivatives(curve, t):
    """(nu, nu', nu'') with respect to the curve parameter."""
    xp = curve.d1(t)
    xpp = curve.d2(t)
    xppp = curve.d3(t)
    w = np.linalg.norm(xp, axis=-1)
    wp = np.einsum("...i,...i->...", xp, xpp) / w
    wpp = (np.einsum("...i,...i->...", xpp, xpp)
           + np.einsum("...i,...i->...", xp, xppp)) / w - wp ** 2 / w
    nu = _rot(xp) / w[..., None]
    nup = _rot(xpp) / w[..., None] - _rot(xp) * (wp / w ** 2)[..., None]
    nupp = (_rot(xppp) / w[..., None]
            - 2.0 * _rot(xpp) * (wp / w ** 2)[..., None]
            - _rot(xp) * (wpp / w ** 2 - 2.0 * wp ** 2 / w ** 3)[..., None])
    return nu, nup, nupp


@dataclass(frozen=True)
class PerturbationField:
    """Boundary field rho(t) with parameter derivatives (C^1 plus one more
    derivative so that the perturbed curve keeps an evaluable curvature)."""

    rho: Callable
    drho: Callable
    ddrho: Callable
    name: str = "rho"

    def arc_derivative(self, curve, t):
        """Tangential (arclength) derivative of rho along the curve."""
        return self.drho(t) / curve.speed(t)


def rho_zero():
    z = lambda t: np.zeros_like(np.asarray(t, dtype=float))
    return PerturbationField(z, z, z, "zero")


def rho_constant(a=1.0):
    a = float(a)

    def c(t):
        return np.full_like(np.asarray(t, dtype=float), a)

    z = lambda t: np.zeros_like(np.asarray(t, dtype=float))
    return PerturbationField(c, z, z, f"constant {a:g}")


def rho_cosine(k=1, a=1.0):
    k = int(k)
    a = float(a)
    return PerturbationField(
        lambda t: a * np.cos(k * np.asarray(t, dtype=float)),
        lambda t: -a * k * np.sin(k * np.asarray(t, dtype=float)),
        lambda t: -a * k * k * np.cos(k * np.asarray(t, dtype=float)),
        f"cosine {k} {a:g}",
    )


def delta_max(curve, rho, nsample=1024):
    """Largest admissible perturbation size 1/(||tau rho|| + ||rho'|| + 1)."""
    t = np.linspace(0.0, 2.0 * np.pi, nsample, endpoint=False)
    fr = frame(curve, t)
    taurho = np.abs(fr.curvature * rho.rho(t)).max()
    drho_arc = np.abs(rho.drho(t) / fr.speed).max()
    return 1.0 / (taurho + drho_arc + 1.0)


class PerturbedCurve2D(Curve2D):
    """Exact perturbed curve x~(t) = X(t) + delta*rho(t)*nu(t)."""

    def __init__(self, base, rho, delta):
        delta = float(delta)
        if delta <= 0.0:
            raise PerturbationTooLarge("delta must be positive")
        dmax = delta_max(base, rho)
        if delta >= dmax:
            raise PerturbationTooLarge(
                f"delta={delta:g} exceeds the regularity bound {dmax:g}")
        self.base = base
        self.rho = rho
        self.delta = delta

        def pt(t):
            nu, _, _ = normal_derivatives(base, t)
            return base.point(t) + delta * rho.rho(t)[..., None] * nu

        def v1(t):
            nu, nup, _ = normal_derivatives(base, t)
            return (base.d1(t) + delta * (rho.drho(t)[..., None] * nu
                                          + rho.rho(t)[..., None] * nup))

        def v2(t):
            nu, nup, nupp = normal_derivatives(base, t)
            return (base.d2(t) + delta * (rho.ddrho(t)[..., None] * nu
                                          + 2.0 * rho.drho(t)[..., None] * nup
                                          + rho.rho(t)[..., None] * nupp))

        def v3(t):
            raise UnsupportedOrderError("third derivative of a perturbed curve")

        super().__init__(pt, v1, v2, v3,
                         f"perturbed({base.name}, {rho.name}, {delta:g})",
                         base.params + (delta,))


def perturbed_frame(pcurve, t):
    """Exact (xtilde, nutilde, |Xtilde'|/|X'|) on the perturbed curve."""
    xt = pcurve.point(t)
    v = pcurve.d1(t)
    wt = np.linalg.norm(v, axis=-1)
    nut = _rot(v / wt[..., None])
    ratio = wt / pcurve.base.speed(t)
    return xt, nut, ratio


def nu_expansion(curve, rho, t, n):
    """Order-n coefficient of the perturbed-normal expansion (n <= 1).

    nu^0 = nu and nu^1 = -rho'(x) T(x) with rho' the tangential derivative.
    """
    if n not in (0, 1):
        raise UnsupportedOrderError(f"nu expansion implemented for n <= 1, got {n}")
    fr = frame(curve, t)
    if n == 0:
        return fr.normal
    return -(rho.drho(t) / fr.speed)[..., None] * fr.tangent


def sigma_expansion(curve, rho, t, n):
    """Order-n coefficient of the length-element ratio expansion (n <= 2)."""
    if n not in (0, 1, 2):
        raise UnsupportedOrderError(f"sigma expansion implemented for n <= 2, got {n}")
    t = np.asarray(t, dtype=float)
    if n == 0:
        return np.ones_like(t)
    fr = frame(curve, t)
    if n == 1:
        return -fr.curvature * rho.rho(t)
    drho_arc = rho.drho(t) / fr.speed
    return 0.5 * drho_arc ** 2


def distance_expansion(x, y, rho_x, rho_y, nu_x, nu_y):
    """(E, G, L1) of the perturbed-distance expansion; ~rho = 1 gives the 3D
    parallel-surface variant."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    q = x - y
    r2 = np.einsum("...i,...i->...", q, q)
    if np.any(r2 == 0.0):
        raise GeometryError("distance expansion undefined at x = y")
    dv = np.asarray(rho_x)[..., None] * nu_x - np.asarray(rho_y)[..., None] * nu_y
    E = np.einsum("...i,...i->...", q, dv) / r2
    G = np.einsum("...i,...i->...", dv, dv) / r2
    return E, G, E


@dataclass(frozen=True)
class SphereSurface:
    """Sphere of radius R; parallel surfaces are its exact offsets.

    Signs follow the outward normal: H = -1/R and K = 1/R^2 make the
    three-term surface-measure sum equal to the exact ratio (1 + delta/R)^2.
    """

    radius: float = 1.0
    center: tuple = (0.0, 0.0, 0.0)

    @property
    def mean_curvature(self):
        return -1.0 / self.radius

    @property
    def gauss_curvature(self):
        return 1.0 / self.radius ** 2

    def point(self, theta, phi):
        theta = np.asarray(theta, dtype=float)
        phi = np.asarray(phi, dtype=float)
        c = np.asarray(self.center, dtype=float)
        return c + self.radius * np.stack(
            [np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi),
             np.cos(theta)], axis=-1)

    def normal(self, x):
        d = np.asarray(x, dtype=float) - np.asarray(self.center, dtype=float)
        return d / np.linalg.norm(d, axis=-1)[..., None]

    def parallel_point(self, x, delta):
        return np.asarray(x, dtype=float) + float(delta) * self.normal(x)


def sphere_surface_expansion(sphere, n):
    """sigma^n of the parallel-surface measure: 1, -2H, K (exact for spheres)."""
    if n not in (0, 1, 2):
        raise UnsupportedOrderError(f"sphere expansion implemented for n <= 2, got {n}")
    if n == 0:
        return 1.0
    if n == 1:
        return -2.0 * sphere.mean_curvature
    return sphere.gauss_curvature


def injectivity_gap(pcurve, nsample=512):
    """Minimum pairwise distance of dense samples of the perturbed curve
    relative to the node spacing; > 0 certifies an embedded curve at the
    sampled resolution."""
    t = np.linspace(0.0, 2.0 * np.pi, nsample, endpoint=False)
    pts = pcurve.point(t)
    d2 = np.sum((pts[:, None, :] - pts[None, :, :]) ** 2, axis=-1)
    np.fill_diagonal(d2, np.inf)
    return float(np.sqrt(d2.min()))
