"""Point evaluation of the resolvent-Stokes fundamental tensors, stress and
pressure tensors, the contracted double-layer kernel, and analytic
directional derivatives of the stress tensor.

Conventions (all verified against the PDE by finite differences in tests):
the pair (Gamma_{.j}, F_j) solves  lam*u - Delta u + grad p = 0, div u = 0
away from the origin, with

  2D:  Gamma_ij = -(1/2pi)[d_ij e1(z) + q_i q_j e2(z)/r^2],  z = sqrt(lam) r
       F_i      = -q_i/(2pi r^2)
  3D:  Gamma_ij = -(1/4pi)[d_ij e1(eps)/r + q_i q_j e2(eps)/r^3],
       F_i      = -q_i/(4pi r^3),                            eps = -sqrt(lam) r

  2D:  S_ijk = (1/2pi)[d_ik q_j f1 + (d_kj q_i + d_ij q_k) f2 - q_i q_j q_k f3]
       f1 = d1/r^2, f2 = d2/r^2, f3 = (2 d1 + 2 d2 - 2)/r^4
  3D:  S_ijk = (1/4pi)[d_ik q_j g1 - (d_kj q_i + d_ij q_k) g2 + q_i q_j q_k g3]
       g1 = d1/r^3, g2 = d2/r^3, g3 = (3 - 3 d1 + 2 d2)/r^5

The double-layer kernel contracts the density through the *first* slot of S
(the divergence-free slot):  D_ij(x, y) = -S_jik(x - y) nu_k(y), so that
W^i(x) = int D_ij(x, y) phi_j(y) dsigma(y) is solenoidal, with pressure
kernel Lambda_jk nu_k:

  2D:  Lambda_jk = (1/2pi)[lam ln(r) d_jk + 2 d_jk/r^2 - 4 q_j q_k/r^4]
  3D:  Lambda_jk = (1/4pi)[-lam d_jk/r + 2 d_jk/r^3 - 6 q_j q_k/r^5]

Here q = x - y and r = |q|.
"""

import numpy as np

from . import _backend, special
from .special import ResolventParameter


class SingularityError(ValueError):
    """Kernel evaluated at coincident points."""


def as_resolvent(lam):
    if isinstance(lam, ResolventParameter):
        return lam
    return ResolventParameter(lam)


def _qr(xhat):
    q = np.asarray(xhat, dtype=float)
    r = np.linalg.norm(q, axis=-1)
    if np.any(r == 0.0):
        raise SingularityError("kernel argument x - y = 0")
    return q, r


def _eye(dim):
    return np.eye(dim)


def fundamental_tensor(xhat, lam, dim):
    """(Gamma, F) at displacement xhat; F does not depend on lam."""
    lam = as_resolvent(lam)
    q, r = _qr(xhat)
    delta = _eye(dim)
    qq = q[..., :, None] * q[..., None, :]
    if dim == 2:
        e1, e2 = special._e_pair(lam.sqrt_lam * r)
        gamma = -(0.5 / np.pi) * (delta * e1[..., None, None]
                                  + qq * (e2 / r ** 2)[..., None, None])
        f = -q / (2.0 * np.pi * r[..., None] ** 2)
    elif dim == 3:
        e1, e2, _, _ = special._ed3(-lam.sqrt_lam * r)
        gamma = -(0.25 / np.pi) * (delta * (e1 / r)[..., None, None]
                                   + qq * (e2 / r ** 3)[..., None, None])
        f = -q / (4.0 * np.pi * r[..., None] ** 3)
    else:
        raise ValueError(f"dim must be 2 or 3, got {dim}")
    return gamma, f


def _radial_AB(lam, r, dim, order):
    """Radial profiles A (delta term) and B (qq term) of Gamma and their
    first/second radial derivatives, per dimension."""
    sl = lam.sqrt_lam
    if dim == 2:
        z = sl * r
        e1, e2 = special._e_pair(z)
        e1p, e2p = special._e_pair_deriv(z)
        A = e1
        Ap = sl * e1p
        B = e2 / r ** 2
        Bp = sl * e2p / r ** 2 - 2.0 * e2 / r ** 3
        if order < 2:
            return A, Ap, None, B, Bp, None
        e1pp, e2pp = special._e_pair_deriv2(z)
        App = lam.lam * e1pp
        Bpp = lam.lam * e2pp / r ** 2 - 4.0 * sl * e2p / r ** 3 + 6.0 * e2 / r ** 4
        return A, Ap, App, B, Bp, Bpp
    eps = -sl * r
    e1, e2, _, _ = special._ed3(eps)
    e1p, e2p, _, _ = special._ed3_deriv(eps)
    A = e1 / r
    Ap = -sl * e1p / r - e1 / r ** 2
    B = e2 / r ** 3
    Bp = -sl * e2p / r ** 3 - 3.0 * e2 / r ** 4
    if order < 2:
        return A, Ap, None, B, Bp, None
    e1pp, e2pp = special._e3_deriv2(eps)
    App = lam.lam * e1pp / r + 2.0 * sl * e1p / r ** 2 + 2.0 * e1 / r ** 3
    Bpp = lam.lam * e2pp / r ** 3 + 6.0 * sl * e2p / r ** 4 + 12.0 * e2 / r ** 5
    return A, Ap, App, B, Bp, Bpp


def fundamental_tensor_grad(xhat, lam, dim):
    """dGamma[..., i, j, l] = d Gamma_ij / d xhat_l (analytic)."""
    lam = as_resolvent(lam)
    q, r = _qr(xhat)
    pref = -(0.5 / np.pi) if dim == 2 else -(0.25 / np.pi)
    A, Ap, _, B, Bp, _ = _radial_AB(lam, r, dim, order=1)
    delta = _eye(dim)
    qh = q / r[..., None]
    out = (delta[..., :, :, None] * (Ap[..., None, None, None] * qh[..., None, None, :])
           + (delta[..., :, None, :] * q[..., None, :, None]
              + delta[..., None, :, :] * q[..., :, None, None]) * B[..., None, None, None]
           + (q[..., :, None, None] * q[..., None, :, None] * qh[..., None, None, :])
           * Bp[..., None, None, None])
    return pref * out


def fundamental_tensor_hess(xhat, lam, dim):
    """d2Gamma[..., i, j, l, m] = d^2 Gamma_ij / d xhat_l d xhat_m."""
    lam = as_resolvent(lam)
    q, r = _qr(xhat)
    pref = -(0.5 / np.pi) if dim == 2 else -(0.25 / np.pi)
    A, Ap, App, B, Bp, Bpp = _radial_AB(lam, r, dim, order=2)
    d = _eye(dim)
    qh = q / r[..., None]
    qhqh = qh[..., :, None] * qh[..., None, :]
    proj = (d - qhqh) / r[..., None, None]      # (d_lm - qh_l qh_m)/r
    radial2A = App[..., None, None] * qhqh + Ap[..., None, None] * proj
    radial2B = Bpp[..., None, None] * qhqh + Bp[..., None, None] * proj
    qq = q[..., :, None] * q[..., None, :]
    gradB = Bp[..., None] * qh                   # dB/dxhat_m
    out = (d[..., :, :, None, None] * radial2A[..., None, None, :, :]
           + (d[..., :, None, :, None] * d[..., None, :, None, :]
              + d[..., None, :, :, None] * d[..., :, None, None, :]) * B[..., None, None, None, None])
    out = out + (d[..., :, None, :, None] * q[..., None, :, None, None]
                 + d[..., None, :, :, None] * q[..., :, None, None, None]) * gradB[..., None, None, None, :]
    out = out + (d[..., :, None, None, :] * q[..., None, :, None, None]
                 + d[..., None, :, None, :] * q[..., :, None, None, None]) * gradB[..., None, None, :, None]
    out = out + qq[..., :, :, None, None] * radial2B[..., None, None, :, :]
    return pref * out


def _stress_profiles(lam, r, dim):
    sl = lam.sqrt_lam
    if dim == 2:
        z = sl * r
        d1, d2 = special._d_pair(z)
        f1 = d1 / r ** 2
        f2 = d2 / r ** 2
        f3 = (2.0 * d1 + 2.0 * d2 - 2.0) / r ** 4
        return f1, f2, f3
    eps = -sl * r
    _, _, d1, d2 = special._ed3(eps)
    g1 = d1 / r ** 3
    g2 = d2 / r ** 3
    g3 = (3.0 - 3.0 * d1 + 2.0 * d2) / r ** 5
    return g1, g2, g3


def _stress_profile_derivs(lam, r, dim):
    sl = lam.sqrt_lam
    if dim == 2:
        z = sl * r
        d1, d2 = special._d_pair(z)
        d1p, d2p = special._d_pair_deriv(z)
        f1p = sl * d1p / r ** 2 - 2.0 * d1 / r ** 3
        f2p = sl * d2p / r ** 2 - 2.0 * d2 / r ** 3
        f3p = sl * (2.0 * d1p + 2.0 * d2p) / r ** 4 \
            - 4.0 * (2.0 * d1 + 2.0 * d2 - 2.0) / r ** 5
        return f1p, f2p, f3p
    eps = -sl * r
    _, _, d1, d2 = special._ed3(eps)
    _, _, d1p, d2p = special._ed3_deriv(eps)
    g1p = -sl * d1p / r ** 3 - 3.0 * d1 / r ** 4
    g2p = -sl * d2p / r ** 3 - 3.0 * d2 / r ** 4
    g3p = sl * (3.0 * d1p - 2.0 * d2p) / r ** 5 - 5.0 * (3.0 - 3.0 * d1 + 2.0 * d2) / r ** 6
    return g1p, g2p, g3p


def _stress_from_profiles(q, f1, f2, f3, dim, sign2, sign3, pref):
    d = _eye(dim)
    t1 = d[..., :, None, :] * q[..., None, :, None] * f1[..., None, None, None]
    pair = (d[..., None, :, :] * q[..., :, None, None]
            + d[..., :, :, None] * q[..., None, None, :])
    t2 = pair * f2[..., None, None, None]
    t3 = (q[..., :, None, None] * q[..., None, :, None] * q[..., None, None, :]
          * f3[..., None, None, None])
    return pref * (t1 + sign2 * t2 + sign3 * t3)


def stress_tensor(x, y, lam, dim):
    """S[..., i, j, k]; translation invariant and symmetric in (i, k)."""
    lam = as_resolvent(lam)
    q, r = _qr(np.asarray(x, dtype=float) - np.asarray(y, dtype=float))
    f1, f2, f3 = _stress_profiles(lam, r, dim)
    if dim == 2:
        return _stress_from_profiles(q, f1, f2, f3, 2, +1.0, -1.0, 0.5 / np.pi)
    return _stress_from_profiles(q, f1, f2, f3, 3, -1.0, +1.0, 0.25 / np.pi)


def stress_gradient(x, y, lam, dim, direction):
    """(direction . grad_xhat) S[..., i, j, k], analytic chain rule."""
    lam = as_resolvent(lam)
    q, r = _qr(np.asarray(x, dtype=float) - np.asarray(y, dtype=float))
    v = np.broadcast_to(np.asarray(direction, dtype=float), q.shape)
    f1, f2, f3 = _stress_profiles(lam, r, dim)
    f1p, f2p, f3p = _stress_profile_derivs(lam, r, dim)
    vdotqh = np.einsum("...i,...i->...", v, q) / r
    d = _eye(dim)
    if dim == 2:
        s2, s3, pref = +1.0, -1.0, 0.5 / np.pi
    else:
        s2, s3, pref = -1.0, +1.0, 0.25 / np.pi

    t1 = d[..., :, None, :] * (v[..., None, :, None] * f1[..., None, None, None]
                               + q[..., None, :, None] * (f1p * vdotqh)[..., None, None, None])
    pair_v = (d[..., None, :, :] * v[..., :, None, None]
              + d[..., :, :, None] * v[..., None, None, :])
    pair_q = (d[..., None, :, :] * q[..., :, None, None]
              + d[..., :, :, None] * q[..., None, None, :])
    t2 = pair_v * f2[..., None, None, None] + pair_q * (f2p * vdotqh)[..., None, None, None]
    qqq_v = (v[..., :, None, None] * q[..., None, :, None] * q[..., None, None, :]
             + q[..., :, None, None] * v[..., None, :, None] * q[..., None, None, :]
             + q[..., :, None, None] * q[..., None, :, None] * v[..., None, None, :])
    t3 = (qqq_v * f3[..., None, None, None]
          + q[..., :, None, None] * q[..., None, :, None] * q[..., None, None, :]
          * (f3p * vdotqh)[..., None, None, None])
    return pref * (t1 + s2 * t2 + s3 * t3)


def pressure_tensor(x, y, lam, dim):
    """Lambda[..., j, k]: double-layer pressure kernel (contract k with nu)."""
    lam = as_resolvent(lam)
    q, r = _qr(np.asarray(x, dtype=float) - np.asarray(y, dtype=float))
    d = _eye(dim)
    qq = q[..., :, None] * q[..., None, :]
    if dim == 2:
        return (0.5 / np.pi) * (lam.lam * np.log(r)[..., None, None] * d
                                + 2.0 * d / (r ** 2)[..., None, None]
                                - 4.0 * qq / (r ** 4)[..., None, None])
    return (0.25 / np.pi) * (-lam.lam * d / r[..., None, None]
                             + 2.0 * d / (r ** 3)[..., None, None]
                             - 6.0 * qq / (r ** 5)[..., None, None])


def _contract_first(S, m):
    """D_ij = -S_jik m_k for a stress-like tensor S[..., j, i, k]."""
    Dt = -np.einsum("...jik,...k->...ij", S, np.asarray(m, dtype=float))
    return Dt


def dl_kernel(x, y, nu_y, lam, dim):
    """Double-layer kernel D_ij(x, y) = -S_jik(x - y) nu_k(y).

    `nu_y` is the outward unit normal for the classical kernel; the
    contraction itself accepts any vector (used with nu^1 in expansions).
    """
    S = stress_tensor(x, y, lam, dim)
    return _contract_first(S, np.broadcast_to(np.asarray(nu_y, dtype=float),
                                              S.shape[:-3] + (dim,)))


def dl_kernel_gradient(x, y, nu_y, lam, dim, direction):
    """(direction . grad_xhat) of the double-layer kernel (same contraction)."""
    dS = stress_gradient(x, y, lam, dim, direction)
    return _contract_first(dS, np.broadcast_to(np.asarray(nu_y, dtype=float), dS.shape[:-3] + (dim,)))


def dl_kernel_diagonal_2d(tangent, curvature):
    """Diagonal (coincidence) limit of the regular part of the 2D kernel:
    D(t, t) = -(tau/2pi) T tensor T."""
    T = np.asarray(tangent, dtype=float)
    return (-(np.asarray(curvature) / (2.0 * np.pi)))[..., None, None] \
        * T[..., :, None] * T[..., None, :]


# ---------------------------------------------------------------------------
# log-split components (2D assembly): coefficient of ln(r) in the kernels.
# The reduced profiles are entire in z^2 and finite on the diagonal:
#   f1_log = lam*bf1(z), f2_log = lam*bf2(z), f3_log = lam^2*bf3(z), z = sqrt(lam) r
# ---------------------------------------------------------------------------

def _blog(z):
    """(bf1, bf2, bf3): reduced ln(r)-coefficient profiles (see backend)."""
    return _backend.get("blog")(np.asarray(z, dtype=np.complex128))


def _blog_deriv(z):
    """(bf1', bf2', bf3') derivatives in z of the reduced log profiles."""
    return _backend.get("blog_deriv")(np.asarray(z, dtype=np.complex128))


def dl_kernel_log(x, y, nu_y, lam):
    """ln(r)-coefficient of the 2D double-layer kernel (smooth, vanishing on
    the diagonal)."""
    lam = as_resolvent(lam)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    q = x - y
    r = np.linalg.norm(q, axis=-1)
    bf1, bf2, bf3 = _blog(lam.sqrt_lam * r)
    f1 = lam.lam * bf1
    f2 = lam.lam * bf2
    f3 = lam.lam ** 2 * bf3
    nu = np.broadcast_to(np.asarray(nu_y, dtype=float), q.shape)
    qdotnu = np.einsum("...i,...i->...", q, nu)
    out = -(0.5 / np.pi) * (
        nu[..., None, :] * q[..., :, None] * f1[..., None, None]
        + (q[..., None, :] * nu[..., :, None]
           + _eye(2) * qdotnu[..., None, None]) * f2[..., None, None]
        - q[..., :, None] * q[..., None, :] * (qdotnu * f3)[..., None, None])
    return out


def stress_log_2d(x, y, lam):
    """ln(r)-coefficient of the 2D stress tensor S[..., i, j, k]."""
    lam = as_resolvent(lam)
    q = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
    r = np.linalg.norm(q, axis=-1)
    bf1, bf2, bf3 = _blog(lam.sqrt_lam * r)
    return _stress_from_profiles(q, lam.lam * bf1, lam.lam * bf2,
                                 lam.lam ** 2 * bf3, 2, +1.0, -1.0, 0.5 / np.pi)


def stress_log_gradient_2d(x, y, lam, direction):
    """(direction . grad_xhat) of the 2D stress ln-coefficient."""
    lam = as_resolvent(lam)
    q = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
    r = np.linalg.norm(q, axis=-1)
    sl = lam.sqrt_lam
    z = sl * r
    v = np.broadcast_to(np.asarray(direction, dtype=float), q.shape)
    bf1, bf2, bf3 = _blog(z)
    bf1p, bf2p, bf3p = _blog_deriv(z)
    f1 = lam.lam * bf1
    f2 = lam.lam * bf2
    f3 = lam.lam ** 2 * bf3
    f1p = lam.lam * sl * bf1p
    f2p = lam.lam * sl * bf2p
    f3p = lam.lam ** 2 * sl * bf3p
    vdotqh = np.einsum("...i,...i->...", v, q) / r
    d = _eye(2)
    t1 = d[..., :, None, :] * (v[..., None, :, None] * f1[..., None, None, None]
                               + q[..., None, :, None] * (f1p * vdotqh)[..., None, None, None])
    pair_v = (d[..., None, :, :] * v[..., :, None, None]
              + d[..., :, :, None] * v[..., None, None, :])
    pair_q = (d[..., None, :, :] * q[..., :, None, None]
              + d[..., :, :, None] * q[..., None, None, :])
    t2 = pair_v * f2[..., None, None, None] + pair_q * (f2p * vdotqh)[..., None, None, None]
    qqq_v = (v[..., :, None, None] * q[..., None, :, None] * q[..., None, None, :]
             + q[..., :, None, None] * v[..., None, :, None] * q[..., None, None, :]
             + q[..., :, None, None] * q[..., None, :, None] * v[..., None, None, :])
    t3 = (qqq_v * f3[..., None, None, None]
          + q[..., :, None, None] * q[..., None, :, None] * q[..., None, None, :]
          * (f3p * vdotqh)[..., None, None, None])
    return (0.5 / np.pi) * (t1 + t2 - t3)
