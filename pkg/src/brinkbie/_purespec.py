"""Pure-numpy backend for the special-function kernels.

All functions accept complex arrays (any shape) and are vectorized.  The
compiled backend in ``_fastspec.pyx`` implements the same interface; parity
between the two is enforced by tests.

Evaluation scheme for the modified Bessel pair (K0, K1):
  * ascending series for |z| <= 4,
  * Temme-style continued fraction (CF2, evaluated bottom-up via the
    Thompson-Barnett recurrence) for |z| > 4.
Both branches are accurate to ~1e-13 relative on the overlap ring, for
Re z > 0.  The auxiliary e/d combinations switch to explicit power series
below |z| = 0.25 where the naive forms lose digits to cancellation.
"""

import numpy as np

EULER_GAMMA = 0.5772156649015328606065121

_SERIES_CUT = 4.0     # k0/k1: series below, CF2 above
_AUX_CUT = 0.25       # e/d combinations: series below, direct above
_AUX3_CUT = 0.5       # 3D exponential combinations
_NTERMS = 26          # enough for |z| <= 4 at double precision
_CF_MAXIT = 400

import math as _math

# psi(k+1) = -gamma + H_k
_PSI = np.array([-EULER_GAMMA + sum(1.0 / m for m in range(1, k + 1))
                 for k in range(_NTERMS + 3)])
_FAC = [float(_math.factorial(k)) for k in range(48)]
_MAX_TERMS = len(_FAC) - 3


def _k01_series(z):
    """Ascending series for (K0, K1), |z| small, Re z > 0."""
    z = np.asarray(z, dtype=np.complex128)
    u = 0.25 * z * z
    L = np.log(0.5 * z)
    # K0 = -(L+g) I0 + sum_{k>=1} H_k u^k/(k!)^2
    I0 = np.ones_like(z)
    S0 = np.zeros_like(z)
    term = np.ones_like(z)
    Hk = 0.0
    for k in range(1, _NTERMS):
        term = term * u / (k * k)
        Hk += 1.0 / k
        I0 += term
        S0 += term * Hk
    K0 = -(L + EULER_GAMMA) * I0 + S0
    # K1 = 1/z + L*I1 - (z/4)*sum_k [psi(k+1)+psi(k+2)] u^k/(k!(k+1)!)
    b = np.ones_like(z)          # u^k/(k!(k+1)!)
    I1s = b.copy()
    S1 = b * (_PSI[0] + _PSI[1])
    for k in range(1, _NTERMS):
        b = b * u / (k * (k + 1))
        I1s += b
        S1 += b * (_PSI[k] + _PSI[k + 1])
    I1 = 0.5 * z * I1s
    K1 = 1.0 / z + L * I1 - 0.25 * z * S1
    return K0, K1


def _k01_cf2(z):
    """Temme CF2 for (K0, K1), Re z > 0, reliable for |z| >~ 1."""
    z = np.asarray(z, dtype=np.complex128)
    b = 2.0 * (1.0 + z)
    d = 1.0 / b
    h = d.copy()
    delh = d.copy()
    q1 = np.zeros_like(z)
    q2 = np.ones_like(z)
    a1 = 0.25
    q = np.full_like(z, a1)
    c = np.full_like(z, a1)
    a = np.full_like(z, -a1)
    s = 1.0 + q * delh
    active = np.ones(z.shape, dtype=bool)
    for i in range(2, _CF_MAXIT):
        a -= 2.0 * (i - 1)
        c = -a * c / i
        qnew = (q1 - b * q2) / a
        q1, q2 = q2, qnew
        q = q + c * qnew
        b = b + 2.0
        d = 1.0 / (b + a * d)
        delh = (b * d - 1.0) * delh
        h = h + delh
        dels = q * delh
        s = s + dels
        active = np.abs(dels) > 1e-16 * np.abs(s)
        if not active.any():
            break
    h = a1 * h
    K0 = np.sqrt(np.pi / (2.0 * z)) * np.exp(-z) / s
    K1 = K0 * (z + 0.5 - h) / z
    return K0, K1


def k01(z):
    """Modified Bessel functions (K0(z), K1(z)) for complex z, Re z > 0."""
    z = np.asarray(z, dtype=np.complex128)
    K0 = np.empty_like(z)
    K1 = np.empty_like(z)
    small = np.abs(z) <= _SERIES_CUT
    if small.any():
        K0[small], K1[small] = _k01_series(z[small])
    big = ~small
    if big.any():
        K0[big], K1[big] = _k01_cf2(z[big])
    return K0, K1


def i012(z):
    """Modified Bessel functions (I0, I1, I2) by ascending series.

    Entire functions; the series is used for all z (assembly only needs
    moderate |z|, for which this is accurate and fast).
    """
    z = np.asarray(z, dtype=np.complex128)
    u = 0.25 * z * z
    I0 = np.ones_like(z)
    t0 = np.ones_like(z)
    s1 = np.ones_like(z)          # sum u^k/(k!(k+1)!)
    t1 = np.ones_like(z)
    s2 = np.full_like(z, 0.5)     # sum u^k/(k!(k+2)!)
    t2 = np.full_like(z, 0.5)
    nterms = max(_NTERMS, int(2.2 * np.sqrt(np.abs(u).max() + 1.0)) + 16)
    for k in range(1, nterms):
        t0 = t0 * u / (k * k)
        t1 = t1 * u / (k * (k + 1))
        t2 = t2 * u / (k * (k + 2))
        I0 += t0
        s1 += t1
        s2 += t2
    return I0, 0.5 * z * s1, u * s2


def _p_aux_series(z):
    # P(z) = K1(z)/z - 1/z^2 = L*(I1/z) - (1/4) sum b_k B_k u^k
    z = np.asarray(z, dtype=np.complex128)
    u = 0.25 * z * z
    L = np.log(0.5 * z)
    b = np.ones_like(z)
    i1z = b.copy()
    S = b * (_PSI[0] + _PSI[1])
    for k in range(1, _NTERMS):
        b = b * u / (k * (k + 1))
        i1z += b
        S += b * (_PSI[k] + _PSI[k + 1])
    return 0.5 * L * i1z - 0.25 * S


def p_aux(z, k1=None):
    """K1(z)/z - 1/z^2, cancellation-safe at small |z|."""
    z = np.asarray(z, dtype=np.complex128)
    out = np.empty_like(z)
    small = np.abs(z) <= _AUX_CUT
    if small.any():
        out[small] = _p_aux_series(z[small])
    big = ~small
    if big.any():
        zb = z[big]
        K1b = k1[big] if k1 is not None else k01(zb)[1]
        out[big] = K1b / zb - 1.0 / (zb * zb)
    return out


def _d_pair_series(z):
    z = np.asarray(z, dtype=np.complex128)
    u = 0.25 * z * z
    L = np.log(0.5 * z)
    d1 = np.zeros_like(z)
    d2 = np.zeros_like(z)
    up = u.copy()
    for k in range(_NTERMS):
        ck = 1.0 / (_FAC[k] * _FAC[k + 2])
        bk = 1.0 / (_FAC[k] * _FAC[k + 1])
        Ak = _PSI[k] + _PSI[k + 2]
        Bk = _PSI[k] + _PSI[k + 1]
        d1 += ck * (Ak - 2.0 * L) * up
        d2 += (ck * Ak - bk * Bk + 2.0 * L * (bk - ck)) * up
        up = up * u
    return d1, d2


def d_pair(z):
    """(d1, d2) = (2 K2 + 1 - 4/z^2,  2 K2 + z K1 - 4/z^2)."""
    z = np.asarray(z, dtype=np.complex128)
    d1 = np.empty_like(z)
    d2 = np.empty_like(z)
    small = np.abs(z) <= _AUX_CUT
    if small.any():
        d1[small], d2[small] = _d_pair_series(z[small])
    big = ~small
    if big.any():
        zb = z[big]
        K0, K1 = k01(zb)
        K2 = K0 + 2.0 * K1 / zb
        d1[big] = 2.0 * K2 + 1.0 - 4.0 / (zb * zb)
        d2[big] = 2.0 * K2 + zb * K1 - 4.0 / (zb * zb)
    return d1, d2


def _d_pair_deriv_series(z):
    z = np.asarray(z, dtype=np.complex128)
    u = 0.25 * z * z
    L = np.log(0.5 * z)
    s1 = np.zeros_like(z)
    s2 = np.zeros_like(z)
    up = np.ones_like(z)
    for k in range(_NTERMS):
        ck = 1.0 / (_FAC[k] * _FAC[k + 2])
        bk = 1.0 / (_FAC[k] * _FAC[k + 1])
        Ak = _PSI[k] + _PSI[k + 2]
        Bk = _PSI[k] + _PSI[k + 1]
        s1 += ck * ((k + 1) * (Ak - 2.0 * L) - 1.0) * up
        s2 += ((k + 1) * (ck * Ak - bk * Bk + 2.0 * L * (bk - ck)) + (bk - ck)) * up
        up = up * u
    return 0.5 * z * s1, 0.5 * z * s2


def d_pair_deriv(z):
    """Derivatives (d1'(z), d2'(z)) of the d-pair."""
    z = np.asarray(z, dtype=np.complex128)
    d1p = np.empty_like(z)
    d2p = np.empty_like(z)
    small = np.abs(z) <= _AUX_CUT
    if small.any():
        d1p[small], d2p[small] = _d_pair_deriv_series(z[small])
    big = ~small
    if big.any():
        zb = z[big]
        K0, K1 = k01(zb)
        K2 = K0 + 2.0 * K1 / zb
        z3 = zb * zb * zb
        d1p[big] = -2.0 * K1 - 4.0 * K2 / zb + 8.0 / z3
        d2p[big] = -2.0 * K1 - 4.0 * K2 / zb - zb * K0 + 8.0 / z3
    return d1p, d2p


def e_pair(z):
    """(e1, e2) = (K0 + K1/z - 1/z^2,  -K0 - 2 K1/z + 2/z^2)."""
    z = np.asarray(z, dtype=np.complex128)
    K0, K1 = k01(z)
    P = p_aux(z, k1=K1)
    return K0 + P, -K0 - 2.0 * P


def e_pair_deriv(z):
    """(e1'(z), e2'(z))."""
    z = np.asarray(z, dtype=np.complex128)
    K0, K1 = k01(z)
    P = p_aux(z, k1=K1)
    e1p = -K1 - K0 / z - 2.0 * P / z
    e2p = K1 + 2.0 * K0 / z + 4.0 * P / z
    return e1p, e2p


def e_pair_deriv2(z):
    """(e1''(z), e2''(z)).  Not cancellation-hardened below |z| ~ 1e-3;
    used only at O(1) source distances."""
    z = np.asarray(z, dtype=np.complex128)
    K0, K1 = k01(z)
    P = p_aux(z, k1=K1)
    z2 = z * z
    e1pp = K0 + 2.0 * K1 / z + 3.0 * K0 / z2 + 6.0 * P / z2
    e2pp = -K0 - 3.0 * K1 / z - 6.0 * K0 / z2 - 12.0 * P / z2
    return e1pp, e2pp


# ---------------------------------------------------------------------------
# 3D exponential combinations (entire functions of eps)
# ---------------------------------------------------------------------------

def _ed3_series(eps, order=0):
    """Series of (e1, e2, d1, d2) or their order-th derivatives."""
    eps = np.asarray(eps, dtype=np.complex128)
    oute1 = np.zeros_like(eps)
    oute2 = np.zeros_like(eps)
    outd1 = np.zeros_like(eps)
    outd2 = np.zeros_like(eps)
    for n in range(0, _NTERMS + 2):
        f = 1.0 / _FAC[n + 2]
        ce1 = (n + 1) ** 2 * f
        ce2 = (1 - n ** 2) * f
        # the d-series start at n = 2
        cd1 = 2.0 * (n ** 2 - 1) * f if n >= 2 else 0.0
        cd2 = n * (n ** 2 - 1) * f if n >= 2 else 0.0
        m = n - order
        if m < 0:
            continue
        drop = 1.0
        for q in range(order):
            drop *= (n - q)
        ep = eps ** m
        oute1 += ce1 * drop * ep
        oute2 += ce2 * drop * ep
        outd1 += cd1 * drop * ep
        outd2 += cd2 * drop * ep
    return oute1, oute2, outd1, outd2


def ed_quad_3d(eps):
    """3D (e1, e2, d1, d2) with removable singularities at eps = 0."""
    eps = np.asarray(eps, dtype=np.complex128)
    e1 = np.empty_like(eps)
    e2 = np.empty_like(eps)
    d1 = np.empty_like(eps)
    d2 = np.empty_like(eps)
    small = np.abs(eps) <= _AUX3_CUT
    if small.any():
        e1[small], e2[small], d1[small], d2[small] = _ed3_series(eps[small])
    big = ~small
    if big.any():
        p = eps[big]
        E = np.exp(p)
        ip = 1.0 / p
        ip2 = ip * ip
        e1[big] = E * (1.0 - ip + ip2) - ip2
        e2[big] = E * (-1.0 + 3.0 * ip - 3.0 * ip2) + 3.0 * ip2
        d1[big] = E * (2.0 - 6.0 * ip + 6.0 * ip2) - 6.0 * ip2 + 1.0
        d2[big] = E * (p - 3.0 + 6.0 * ip - 6.0 * ip2) + 6.0 * ip2
    return e1, e2, d1, d2


def ed_quad_3d_deriv(eps):
    """First derivatives (e1', e2', d1', d2') of the 3D combinations."""
    eps = np.asarray(eps, dtype=np.complex128)
    e1 = np.empty_like(eps)
    e2 = np.empty_like(eps)
    d1 = np.empty_like(eps)
    d2 = np.empty_like(eps)
    small = np.abs(eps) <= _AUX3_CUT
    if small.any():
        e1[small], e2[small], d1[small], d2[small] = _ed3_series(eps[small], order=1)
    big = ~small
    if big.any():
        p = eps[big]
        E = np.exp(p)
        ip = 1.0 / p
        ip2 = ip * ip
        ip3 = ip2 * ip
        e1[big] = E * (1.0 - ip + 2.0 * ip2 - 2.0 * ip3) + 2.0 * ip3
        e2[big] = E * (-1.0 + 3.0 * ip - 6.0 * ip2 + 6.0 * ip3) - 6.0 * ip3
        d1[big] = E * (2.0 - 6.0 * ip + 12.0 * ip2 - 12.0 * ip3) + 12.0 * ip3
        d2[big] = E * (p - 2.0 + 6.0 * ip - 12.0 * ip2 + 12.0 * ip3) - 12.0 * ip3
    return e1, e2, d1, d2


def e_quad_3d_deriv2(eps):
    """Second derivatives (e1'', e2'') of the 3D e-pair."""
    eps = np.asarray(eps, dtype=np.complex128)
    e1 = np.empty_like(eps)
    e2 = np.empty_like(eps)
    small = np.abs(eps) <= _AUX3_CUT
    if small.any():
        e1[small], e2[small], _, _ = _ed3_series(eps[small], order=2)
    big = ~small
    if big.any():
        p = eps[big]
        E = np.exp(p)
        ip = 1.0 / p
        ip2 = ip * ip
        ip3 = ip2 * ip
        ip4 = ip2 * ip2
        e1[big] = E * (1.0 - ip + 3.0 * ip2 - 6.0 * ip3 + 6.0 * ip4) - 6.0 * ip4
        e2[big] = E * (-1.0 + 3.0 * ip - 9.0 * ip2 + 18.0 * ip3 - 18.0 * ip4) + 18.0 * ip4
    return e1, e2


# ---------------------------------------------------------------------------
# reduced ln(r)-coefficient profiles of the 2D kernel functions
#   blog:   (bf1, bf2, bf3) with b1/z^2, b2/z^2, (2b1+2b2)/z^4 where
#           b1 = -2 I2 and b2 = z I1 - 2 I2 are the ln-coefficients of d1, d2
#   entire in z^2, finite at z = 0
# ---------------------------------------------------------------------------

def blog(z):
    z = np.asarray(z, dtype=np.complex128)
    u = 0.25 * z * z
    nterms = min(_MAX_TERMS, max(_NTERMS, int(2.2 * np.sqrt(np.abs(u).max() + 1.0)) + 16)) \
        if z.size else _NTERMS
    bf1 = np.zeros_like(z)
    bf2 = np.zeros_like(z)
    bf3 = np.zeros_like(z)
    up = np.ones_like(z)       # u^k
    upm1 = np.ones_like(z)     # u^{k-1}, aligned with k >= 1
    for k in range(nterms):
        ck = 1.0 / (_math.factorial(k) * _math.factorial(k + 2))
        bf1 += ck * up
        bf2 += (k + 1) * ck * up
        if k >= 1:
            bf3 += k * ck * upm1
            upm1 = upm1 * u
        up = up * u
    return -0.5 * bf1, 0.5 * bf2, 0.25 * bf3


def blog_deriv(z):
    z = np.asarray(z, dtype=np.complex128)
    u = 0.25 * z * z
    nterms = min(_MAX_TERMS, max(_NTERMS, int(2.2 * np.sqrt(np.abs(u).max() + 1.0)) + 16)) \
        if z.size else _NTERMS
    s1 = np.zeros_like(z)
    s2 = np.zeros_like(z)
    s3 = np.zeros_like(z)
    up = np.ones_like(z)       # u^{k-1}, aligned with k >= 1
    upm2 = np.ones_like(z)     # u^{k-2}, aligned with k >= 2
    for k in range(1, nterms):
        ck = 1.0 / (_math.factorial(k) * _math.factorial(k + 2))
        s1 += k * ck * up
        s2 += k * (k + 1) * ck * up
        if k >= 2:
            s3 += k * (k - 1) * ck * upm2
            upm2 = upm2 * u
        up = up * u
    return -0.25 * z * s1, 0.25 * z * s2, 0.125 * z * s3
