"""Special functions for the resolvent Stokes kernels.

Modified Bessel functions K0, K1, K2 of complex argument (Re z > 0) and the
auxiliary scalar combinations entering the 2D and 3D fundamental/stress
tensors.  Small-argument branches remove the catastrophic cancellation of
the z^-2 terms; branch agreement is covered by tests.

Everything here is pure and reentrant.  Heavy array work is dispatched to
the selected backend (compiled or numpy, see `_backend`).
"""

from dataclasses import dataclass, field

import numpy as np

from . import _backend
from ._purespec import EULER_GAMMA  # noqa: F401  (re-export for tests)

backend_name = _backend.name


class DomainError(ValueError):
    """Argument outside the function's domain (e.g. Re z <= 0 for K_n)."""


@dataclass(frozen=True)
class ResolventParameter:
    """Resolvent parameter lambda off the non-positive real axis, with its
    principal square root (Re sqrt > 0)."""

    lam: complex
    sqrt_lam: complex = field(init=False)

    def __post_init__(self):
        lam = complex(self.lam)
        if lam.imag == 0.0 and lam.real <= 0.0:
            raise DomainError(f"lambda={lam} lies on the excluded ray Re<=0, Im=0")
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "sqrt_lam", complex(np.sqrt(lam + 0j)))
        if self.sqrt_lam.real <= 0.0:
            object.__setattr__(self, "sqrt_lam", -self.sqrt_lam)


def _check_right_half(z):
    z = np.asarray(z, dtype=np.complex128)
    if np.any(z.real <= 0.0) or np.any(z == 0.0):
        raise DomainError("argument must satisfy Re z > 0")
    return z


def bessel_k(order, z):
    """K_order(z) for order in {0, 1, 2}, complex z with Re z > 0.

    Vectorized; scalar input gives scalar output.
    """
    if order not in (0, 1, 2):
        raise ValueError(f"order must be 0, 1 or 2, got {order}")
    scalar = np.isscalar(z) or np.ndim(z) == 0
    z = _check_right_half(np.atleast_1d(z))
    K0, K1 = _backend.get("k01")(z)
    if order == 0:
        out = K0
    elif order == 1:
        out = K1
    else:
        out = K0 + 2.0 * K1 / z
    return complex(out[0]) if scalar else out


def e_pair_2d(kappa):
    """2D (e1, e2):  e1 = K0 + K1/k - k^-2,  e2 = -K0 - 2K1/k + 2k^-2."""
    scalar = np.isscalar(kappa) or np.ndim(kappa) == 0
    kappa = _check_right_half(np.atleast_1d(kappa))
    e1, e2 = _backend.get("e_pair")(kappa)
    if scalar:
        return complex(e1[0]), complex(e2[0])
    return e1, e2


def d_pair_2d(kappa):
    """2D (d1, d2):  d1 = 2K2 + 1 - 4k^-2,  d2 = 2K2 + k K1 - 4k^-2."""
    scalar = np.isscalar(kappa) or np.ndim(kappa) == 0
    kappa = _check_right_half(np.atleast_1d(kappa))
    d1, d2 = _backend.get("d_pair")(kappa)
    if scalar:
        return complex(d1[0]), complex(d2[0])
    return d1, d2


def ed_quad_3d(eps):
    """3D (e1, e2, d1, d2), entire in eps; series branch near 0."""
    scalar = np.isscalar(eps) or np.ndim(eps) == 0
    eps = np.atleast_1d(np.asarray(eps, dtype=np.complex128))
    e1, e2, d1, d2 = _backend.get("ed_quad_3d")(eps)
    if scalar:
        return complex(e1[0]), complex(e2[0]), complex(d1[0]), complex(d2[0])
    return e1, e2, d1, d2


# internal evaluators used by the kernel module (array-in/array-out, no
# scalar sugar, no domain checks beyond what the formulas need)

def _k01(z):
    return _backend.get("k01")(z)


def _i012(z):
    return _backend.get("i012")(z)


def _d_pair(z):
    return _backend.get("d_pair")(z)


def _d_pair_deriv(z):
    return _backend.get("d_pair_deriv")(z)


def _e_pair(z):
    return _backend.get("e_pair")(z)


def _e_pair_deriv(z):
    return _backend.get("e_pair_deriv")(z)


def _e_pair_deriv2(z):
    return _backend.get("e_pair_deriv2")(z)


def _ed3(eps):
    return _backend.get("ed_quad_3d")(eps)


def _ed3_deriv(eps):
    return _backend.get("ed_quad_3d_deriv")(eps)


def _e3_deriv2(eps):
    return _backend.get("e_quad_3d_deriv2")(eps)
