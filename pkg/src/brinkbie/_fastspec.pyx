# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled backend for the special-function kernels.

Same interface and branch structure as `_purespec` (ascending series for
|z| <= 4, Temme CF2 above; explicit series for the cancellation-prone
auxiliary combinations below |z| = 0.25).  Scalar C loops replace the
vectorized numpy passes; parity with the pure backend is enforced in tests.
"""

import numpy as np

from libc.math cimport atan2, cos, exp, log, sin, sqrt

cdef double EULER_GAMMA = 0.5772156649015328606065121
cdef double PI = 3.141592653589793238462643
cdef double SERIES_CUT = 4.0
cdef double AUX_CUT = 0.25
cdef double AUX3_CUT = 0.5
cdef int NTERMS = 26
cdef int CF_MAXIT = 400

cdef double PSI[48]
cdef double FAC[48]

cdef _init_tables():
    cdef int k, m
    cdef double h
    for k in range(48):
        h = 0.0
        for m in range(1, k + 1):
            h += 1.0 / m
        PSI[k] = -EULER_GAMMA + h
    FAC[0] = 1.0
    for k in range(1, 48):
        FAC[k] = FAC[k - 1] * k

_init_tables()


cdef inline double cabs_(double complex z) nogil:
    return sqrt(z.real * z.real + z.imag * z.imag)


cdef inline double complex clog_(double complex z) nogil:
    cdef double complex out
    out.real = 0.5 * log(z.real * z.real + z.imag * z.imag)
    out.imag = atan2(z.imag, z.real)
    return out


cdef inline double complex cexp_(double complex z) nogil:
    cdef double m = exp(z.real)
    cdef double complex out
    out.real = m * cos(z.imag)
    out.imag = m * sin(z.imag)
    return out


cdef inline double complex csqrt_(double complex z) nogil:
    return cexp_(0.5 * clog_(z))


cdef void k01_series(double complex z, double complex* k0, double complex* k1) nogil:
    cdef double complex u = 0.25 * z * z
    cdef double complex L = clog_(0.5 * z)
    cdef double complex I0 = 1.0, S0 = 0.0, term = 1.0
    cdef double Hk = 0.0
    cdef int k
    for k in range(1, NTERMS):
        term = term * u / (k * k)
        Hk += 1.0 / k
        I0 = I0 + term
        S0 = S0 + term * Hk
    k0[0] = -(L + EULER_GAMMA) * I0 + S0
    cdef double complex b = 1.0, I1s = 1.0
    cdef double complex S1 = PSI[0] + PSI[1]
    for k in range(1, NTERMS):
        b = b * u / (k * (k + 1))
        I1s = I1s + b
        S1 = S1 + b * (PSI[k] + PSI[k + 1])
    k1[0] = 1.0 / z + L * (0.5 * z * I1s) - 0.25 * z * S1


cdef void k01_cf2(double complex z, double complex* k0, double complex* k1) nogil:
    cdef double complex b = 2.0 * (1.0 + z)
    cdef double complex d = 1.0 / b
    cdef double complex h = d, delh = d
    cdef double complex q1 = 0.0, q2 = 1.0
    cdef double a1 = 0.25
    cdef double complex q = a1, c = a1, a = -a1
    cdef double complex s = 1.0 + q * delh
    cdef double complex qnew, dels
    cdef int i
    for i in range(2, CF_MAXIT):
        a = a - 2.0 * (i - 1)
        c = -a * c / i
        qnew = (q1 - b * q2) / a
        q1 = q2
        q2 = qnew
        q = q + c * qnew
        b = b + 2.0
        d = 1.0 / (b + a * d)
        delh = (b * d - 1.0) * delh
        h = h + delh
        dels = q * delh
        s = s + dels
        if cabs_(dels) <= 1e-16 * cabs_(s):
            break
    h = a1 * h
    k0[0] = csqrt_(PI / (2.0 * z)) * cexp_(-z) / s
    k1[0] = k0[0] * (z + 0.5 - h) / z


cdef inline void k01_scalar(double complex z, double complex* k0, double complex* k1) nogil:
    if cabs_(z) <= SERIES_CUT:
        k01_series(z, k0, k1)
    else:
        k01_cf2(z, k0, k1)


cdef double complex p_aux_series(double complex z) nogil:
    cdef double complex u = 0.25 * z * z
    cdef double complex L = clog_(0.5 * z)
    cdef double complex b = 1.0, i1z = 1.0
    cdef double complex S = PSI[0] + PSI[1]
    cdef int k
    for k in range(1, NTERMS):
        b = b * u / (k * (k + 1))
        i1z = i1z + b
        S = S + b * (PSI[k] + PSI[k + 1])
    return 0.5 * L * i1z - 0.25 * S


cdef inline double complex p_aux_scalar(double complex z, double complex k1v) nogil:
    if cabs_(z) <= AUX_CUT:
        return p_aux_series(z)
    return k1v / z - 1.0 / (z * z)


cdef void d_pair_series(double complex z, double complex* d1, double complex* d2) nogil:
    cdef double complex u = 0.25 * z * z
    cdef double complex L = clog_(0.5 * z)
    cdef double complex s1 = 0.0, s2 = 0.0, up = u
    cdef double ck, bk, Ak, Bk
    cdef int k
    for k in range(NTERMS):
        ck = 1.0 / (FAC[k] * FAC[k + 2])
        bk = 1.0 / (FAC[k] * FAC[k + 1])
        Ak = PSI[k] + PSI[k + 2]
        Bk = PSI[k] + PSI[k + 1]
        s1 = s1 + ck * (Ak - 2.0 * L) * up
        s2 = s2 + (ck * Ak - bk * Bk + 2.0 * L * (bk - ck)) * up
        up = up * u
    d1[0] = s1
    d2[0] = s2


cdef void d_pair_deriv_series(double complex z, double complex* d1p, double complex* d2p) nogil:
    cdef double complex u = 0.25 * z * z
    cdef double complex L = clog_(0.5 * z)
    cdef double complex s1 = 0.0, s2 = 0.0, up = 1.0
    cdef double ck, bk, Ak, Bk
    cdef int k
    for k in range(NTERMS):
        ck = 1.0 / (FAC[k] * FAC[k + 2])
        bk = 1.0 / (FAC[k] * FAC[k + 1])
        Ak = PSI[k] + PSI[k + 2]
        Bk = PSI[k] + PSI[k + 1]
        s1 = s1 + ck * ((k + 1) * (Ak - 2.0 * L) - 1.0) * up
        s2 = s2 + ((k + 1) * (ck * Ak - bk * Bk + 2.0 * L * (bk - ck)) + (bk - ck)) * up
        up = up * u
    d1p[0] = 0.5 * z * s1
    d2p[0] = 0.5 * z * s2


def k01(zin):
    z = np.asarray(zin, dtype=np.complex128)
    shape = z.shape
    zf = np.ascontiguousarray(z.reshape(-1))
    out0 = np.empty(zf.shape, dtype=np.complex128)
    out1 = np.empty(zf.shape, dtype=np.complex128)
    cdef double complex[::1] zv = zf
    cdef double complex[::1] o0 = out0
    cdef double complex[::1] o1 = out1
    cdef Py_ssize_t i, n = zf.shape[0]
    cdef double complex k0v, k1v
    with nogil:
        for i in range(n):
            k01_scalar(zv[i], &k0v, &k1v)
            o0[i] = k0v
            o1[i] = k1v
    return out0.reshape(shape), out1.reshape(shape)


def i012(zin):
    z = np.asarray(zin, dtype=np.complex128)
    shape = z.shape
    zf = np.ascontiguousarray(z.reshape(-1))
    a0 = np.empty(zf.shape, dtype=np.complex128)
    a1 = np.empty(zf.shape, dtype=np.complex128)
    a2 = np.empty(zf.shape, dtype=np.complex128)
    cdef double complex[::1] zv = zf
    cdef double complex[::1] v0 = a0
    cdef double complex[::1] v1 = a1
    cdef double complex[::1] v2 = a2
    cdef Py_ssize_t i, n = zf.shape[0]
    cdef double complex u, I0, t0, s1, t1, s2, t2, zz
    cdef int k, nterms
    with nogil:
        for i in range(n):
            zz = zv[i]
            u = 0.25 * zz * zz
            nterms = NTERMS + <int>(2.2 * sqrt(cabs_(u) + 1.0)) + 2
            I0 = 1.0; t0 = 1.0
            s1 = 1.0; t1 = 1.0
            s2 = 0.5; t2 = 0.5
            for k in range(1, nterms):
                t0 = t0 * u / (k * k)
                t1 = t1 * u / (k * (k + 1))
                t2 = t2 * u / (k * (k + 2))
                I0 = I0 + t0
                s1 = s1 + t1
                s2 = s2 + t2
            v0[i] = I0
            v1[i] = 0.5 * zz * s1
            v2[i] = u * s2
    return a0.reshape(shape), a1.reshape(shape), a2.reshape(shape)


def p_aux(zin, k1=None):
    z = np.asarray(zin, dtype=np.complex128)
    shape = z.shape
    zf = np.ascontiguousarray(z.reshape(-1))
    out = np.empty(zf.shape, dtype=np.complex128)
    cdef double complex[::1] zv = zf
    cdef double complex[::1] ov = out
    cdef Py_ssize_t i, n = zf.shape[0]
    cdef double complex k0v, k1v
    with nogil:
        for i in range(n):
            if cabs_(zv[i]) <= AUX_CUT:
                ov[i] = p_aux_series(zv[i])
            else:
                k01_scalar(zv[i], &k0v, &k1v)
                ov[i] = k1v / zv[i] - 1.0 / (zv[i] * zv[i])
    return out.reshape(shape)


def d_pair(zin):
    z = np.asarray(zin, dtype=np.complex128)
    shape = z.shape
    zf = np.ascontiguousarray(z.reshape(-1))
    o1 = np.empty(zf.shape, dtype=np.complex128)
    o2 = np.empty(zf.shape, dtype=np.complex128)
    cdef double complex[::1] zv = zf
    cdef double complex[::1] v1 = o1
    cdef double complex[::1] v2 = o2
    cdef Py_ssize_t i, n = zf.shape[0]
    cdef double complex k0v, k1v, k2v, d1v, d2v, zz
    with nogil:
        for i in range(n):
            zz = zv[i]
            if cabs_(zz) <= AUX_CUT:
                d_pair_series(zz, &d1v, &d2v)
                v1[i] = d1v
                v2[i] = d2v
            else:
                k01_scalar(zz, &k0v, &k1v)
                k2v = k0v + 2.0 * k1v / zz
                v1[i] = 2.0 * k2v + 1.0 - 4.0 / (zz * zz)
                v2[i] = 2.0 * k2v + zz * k1v - 4.0 / (zz * zz)
    return o1.reshape(shape), o2.reshape(shape)


def d_pair_deriv(zin):
    z = np.asarray(zin, dtype=np.complex128)
    shape = z.shape
    zf = np.ascontiguousarray(z.reshape(-1))
    o1 = np.empty(zf.shape, dtype=np.complex128)
    o2 = np.empty(zf.shape, dtype=np.complex128)
    cdef double complex[::1] zv = zf
    cdef double complex[::1] v1 = o1
    cdef double complex[::1] v2 = o2
    cdef Py_ssize_t i, n = zf.shape[0]
    cdef double complex k0v, k1v, k2v, d1v, d2v, zz, z3
    with nogil:
        for i in range(n):
            zz = zv[i]
            if cabs_(zz) <= AUX_CUT:
                d_pair_deriv_series(zz, &d1v, &d2v)
                v1[i] = d1v
                v2[i] = d2v
            else:
                k01_scalar(zz, &k0v, &k1v)
                k2v = k0v + 2.0 * k1v / zz
                z3 = zz * zz * zz
                v1[i] = -2.0 * k1v - 4.0 * k2v / zz + 8.0 / z3
                v2[i] = -2.0 * k1v - 4.0 * k2v / zz - zz * k0v + 8.0 / z3
    return o1.reshape(shape), o2.reshape(shape)


def e_pair(zin):
    z = np.asarray(zin, dtype=np.complex128)
    shape = z.shape
    zf = np.ascontiguousarray(z.reshape(-1))
    o1 = np.empty(zf.shape, dtype=np.complex128)
    o2 = np.empty(zf.shape, dtype=np.complex128)
    cdef double complex[::1] zv = zf
    cdef double complex[::1] v1 = o1
    cdef double complex[::1] v2 = o2
    cdef Py_ssize_t i, n = zf.shape[0]
    cdef double complex k0v, k1v, pv
    with nogil:
        for i in range(n):
            k01_scalar(zv[i], &k0v, &k1v)
            pv = p_aux_scalar(zv[i], k1v)
            v1[i] = k0v + pv
            v2[i] = -k0v - 2.0 * pv
    return o1.reshape(shape), o2.reshape(shape)


def e_pair_deriv(zin):
    z = np.asarray(zin, dtype=np.complex128)
    shape = z.shape
    zf = np.ascontiguousarray(z.reshape(-1))
    o1 = np.empty(zf.shape, dtype=np.complex128)
    o2 = np.empty(zf.shape, dtype=np.complex128)
    cdef double complex[::1] zv = zf
    cdef double complex[::1] v1 = o1
    cdef double complex[::1] v2 = o2
    cdef Py_ssize_t i, n = zf.shape[0]
    cdef double complex k0v, k1v, pv, zz
    with nogil:
        for i in range(n):
            zz = zv[i]
            k01_scalar(zz, &k0v, &k1v)
            pv = p_aux_scalar(zz, k1v)
            v1[i] = -k1v - k0v / zz - 2.0 * pv / zz
            v2[i] = k1v + 2.0 * k0v / zz + 4.0 * pv / zz
    return o1.reshape(shape), o2.reshape(shape)


def e_pair_deriv2(zin):
    z = np.asarray(zin, dtype=np.complex128)
    shape = z.shape
    zf = np.ascontiguousarray(z.reshape(-1))
    o1 = np.empty(zf.shape, dtype=np.complex128)
    o2 = np.empty(zf.shape, dtype=np.complex128)
    cdef double complex[::1] zv = zf
    cdef double complex[::1] v1 = o1
    cdef double complex[::1] v2 = o2
    cdef Py_ssize_t i, n = zf.shape[0]
    cdef double complex k0v, k1v, pv, zz, z2
    with nogil:
        for i in range(n):
            zz = zv[i]
            z2 = zz * zz
            k01_scalar(zz, &k0v, &k1v)
            pv = p_aux_scalar(zz, k1v)
            v1[i] = k0v + 2.0 * k1v / zz + 3.0 * k0v / z2 + 6.0 * pv / z2
            v2[i] = -k0v - 3.0 * k1v / zz - 6.0 * k0v / z2 - 12.0 * pv / z2
    return o1.reshape(shape), o2.reshape(shape)


cdef void ed3_series(double complex e, int order,
                     double complex* oe1, double complex* oe2,
                     double complex* od1, double complex* od2) nogil:
    cdef double complex se1 = 0.0, se2 = 0.0, sd1 = 0.0, sd2 = 0.0, ep
    cdef double f, drop
    cdef int n, m, q
    for n in range(NTERMS + 2):
        m = n - order
        if m < 0:
            continue
        f = 1.0 / FAC[n + 2]
        drop = 1.0
        for q in range(order):
            drop *= (n - q)
        if m == 0:
            ep = 1.0
        else:
            ep = e
            for q in range(m - 1):
                ep = ep * e
        se1 = se1 + (n + 1) * (n + 1) * f * drop * ep
        se2 = se2 + (1 - n * n) * f * drop * ep
        if n >= 2:
            sd1 = sd1 + 2.0 * (n * n - 1) * f * drop * ep
            sd2 = sd2 + n * (n * n - 1) * f * drop * ep
    oe1[0] = se1
    oe2[0] = se2
    od1[0] = sd1
    od2[0] = sd2


def ed_quad_3d(ein):
    e = np.asarray(ein, dtype=np.complex128)
    shape = e.shape
    ef = np.ascontiguousarray(e.reshape(-1))
    w = np.empty(ef.shape, dtype=np.complex128)
    x = np.empty(ef.shape, dtype=np.complex128)
    y = np.empty(ef.shape, dtype=np.complex128)
    zz_ = np.empty(ef.shape, dtype=np.complex128)
    cdef double complex[::1] ev = ef
    cdef double complex[::1] v0 = w
    cdef double complex[::1] v1 = x
    cdef double complex[::1] v2 = y
    cdef double complex[::1] v3 = zz_
    cdef Py_ssize_t i, n = ef.shape[0]
    cdef double complex p, E, ip, ip2, a, b, c, d
    with nogil:
        for i in range(n):
            p = ev[i]
            if cabs_(p) <= AUX3_CUT:
                ed3_series(p, 0, &a, &b, &c, &d)
                v0[i] = a; v1[i] = b; v2[i] = c; v3[i] = d
            else:
                E = cexp_(p)
                ip = 1.0 / p
                ip2 = ip * ip
                v0[i] = E * (1.0 - ip + ip2) - ip2
                v1[i] = E * (-1.0 + 3.0 * ip - 3.0 * ip2) + 3.0 * ip2
                v2[i] = E * (2.0 - 6.0 * ip + 6.0 * ip2) - 6.0 * ip2 + 1.0
                v3[i] = E * (p - 3.0 + 6.0 * ip - 6.0 * ip2) + 6.0 * ip2
    return (w.reshape(shape), x.reshape(shape), y.reshape(shape), zz_.reshape(shape))


def ed_quad_3d_deriv(ein):
    e = np.asarray(ein, dtype=np.complex128)
    shape = e.shape
    ef = np.ascontiguousarray(e.reshape(-1))
    w = np.empty(ef.shape, dtype=np.complex128)
    x = np.empty(ef.shape, dtype=np.complex128)
    y = np.empty(ef.shape, dtype=np.complex128)
    zz_ = np.empty(ef.shape, dtype=np.complex128)
    cdef double complex[::1] ev = ef
    cdef double complex[::1] v0 = w
    cdef double complex[::1] v1 = x
    cdef double complex[::1] v2 = y
    cdef double complex[::1] v3 = zz_
    cdef Py_ssize_t i, n = ef.shape[0]
    cdef double complex p, E, ip, ip2, ip3, a, b, c, d
    with nogil:
        for i in range(n):
            p = ev[i]
            if cabs_(p) <= AUX3_CUT:
                ed3_series(p, 1, &a, &b, &c, &d)
                v0[i] = a; v1[i] = b; v2[i] = c; v3[i] = d
            else:
                E = cexp_(p)
                ip = 1.0 / p
                ip2 = ip * ip
                ip3 = ip2 * ip
                v0[i] = E * (1.0 - ip + 2.0 * ip2 - 2.0 * ip3) + 2.0 * ip3
                v1[i] = E * (-1.0 + 3.0 * ip - 6.0 * ip2 + 6.0 * ip3) - 6.0 * ip3
                v2[i] = E * (2.0 - 6.0 * ip + 12.0 * ip2 - 12.0 * ip3) + 12.0 * ip3
                v3[i] = E * (p - 2.0 + 6.0 * ip - 12.0 * ip2 + 12.0 * ip3) - 12.0 * ip3
    return (w.reshape(shape), x.reshape(shape), y.reshape(shape), zz_.reshape(shape))


def e_quad_3d_deriv2(ein):
    e = np.asarray(ein, dtype=np.complex128)
    shape = e.shape
    ef = np.ascontiguousarray(e.reshape(-1))
    o1 = np.empty(ef.shape, dtype=np.complex128)
    o2 = np.empty(ef.shape, dtype=np.complex128)
    cdef double complex[::1] ev = ef
    cdef double complex[::1] v1 = o1
    cdef double complex[::1] v2 = o2
    cdef Py_ssize_t i, n = ef.shape[0]
    cdef double complex p, E, ip, ip2, ip3, ip4, a, b, c, d
    with nogil:
        for i in range(n):
            p = ev[i]
            if cabs_(p) <= AUX3_CUT:
                ed3_series(p, 2, &a, &b, &c, &d)
                v1[i] = a
                v2[i] = b
            else:
                E = cexp_(p)
                ip = 1.0 / p
                ip2 = ip * ip
                ip3 = ip2 * ip
                ip4 = ip2 * ip2
                v1[i] = E * (1.0 - ip + 3.0 * ip2 - 6.0 * ip3 + 6.0 * ip4) - 6.0 * ip4
                v2[i] = E * (-1.0 + 3.0 * ip - 9.0 * ip2 + 18.0 * ip3 - 18.0 * ip4) + 18.0 * ip4
    return o1.reshape(shape), o2.reshape(shape)


def blog(zin):
    z = np.asarray(zin, dtype=np.complex128)
    shape = z.shape
    zf = np.ascontiguousarray(z.reshape(-1))
    o1 = np.empty(zf.shape, dtype=np.complex128)
    o2 = np.empty(zf.shape, dtype=np.complex128)
    o3 = np.empty(zf.shape, dtype=np.complex128)
    cdef double complex[::1] zv = zf
    cdef double complex[::1] v1 = o1
    cdef double complex[::1] v2 = o2
    cdef double complex[::1] v3 = o3
    cdef Py_ssize_t i, n = zf.shape[0]
    cdef double complex u, bf1, bf2, bf3, up, upm1
    cdef double ck
    cdef int k, nterms
    with nogil:
        for i in range(n):
            u = 0.25 * zv[i] * zv[i]
            nterms = NTERMS + <int>(2.2 * sqrt(cabs_(u) + 1.0)) + 2
            if nterms > 45:
                nterms = 45
            bf1 = 0.0; bf2 = 0.0; bf3 = 0.0
            up = 1.0; upm1 = 1.0
            for k in range(nterms):
                ck = 1.0 / (FAC[k] * FAC[k + 2])
                bf1 = bf1 + ck * up
                bf2 = bf2 + (k + 1) * ck * up
                if k >= 1:
                    bf3 = bf3 + k * ck * upm1
                    upm1 = upm1 * u
                up = up * u
            v1[i] = -0.5 * bf1
            v2[i] = 0.5 * bf2
            v3[i] = 0.25 * bf3
    return o1.reshape(shape), o2.reshape(shape), o3.reshape(shape)


def blog_deriv(zin):
    z = np.asarray(zin, dtype=np.complex128)
    shape = z.shape
    zf = np.ascontiguousarray(z.reshape(-1))
    o1 = np.empty(zf.shape, dtype=np.complex128)
    o2 = np.empty(zf.shape, dtype=np.complex128)
    o3 = np.empty(zf.shape, dtype=np.complex128)
    cdef double complex[::1] zv = zf
    cdef double complex[::1] v1 = o1
    cdef double complex[::1] v2 = o2
    cdef double complex[::1] v3 = o3
    cdef Py_ssize_t i, n = zf.shape[0]
    cdef double complex u, s1, s2, s3, up, upm2, zz
    cdef double ck
    cdef int k, nterms
    with nogil:
        for i in range(n):
            zz = zv[i]
            u = 0.25 * zz * zz
            nterms = NTERMS + <int>(2.2 * sqrt(cabs_(u) + 1.0)) + 2
            if nterms > 45:
                nterms = 45
            s1 = 0.0; s2 = 0.0; s3 = 0.0
            up = 1.0; upm2 = 1.0
            for k in range(1, nterms):
                ck = 1.0 / (FAC[k] * FAC[k + 2])
                s1 = s1 + k * ck * up
                s2 = s2 + k * (k + 1) * ck * up
                if k >= 2:
                    s3 = s3 + k * (k - 1) * ck * upm2
                    upm2 = upm2 * u
                up = up * u
            v1[i] = -0.25 * zz * s1
            v2[i] = 0.25 * zz * s2
            v3[i] = 0.125 * zz * s3
    return o1.reshape(shape), o2.reshape(shape), o3.reshape(shape)


def assemble_dl_blocks(double[:, ::1] x, double[:, ::1] nu, double[::1] speed,
                       double[::1] tau, double[:, ::1] tang,
                       double complex lam, double complex sqlam,
                       double h, double[::1] kress, double[::1] logcorr,
                       bint log_split):
    """Fused Nystrom assembly of the (2n, 2n) double-layer matrix.

    Produces the same matrix as the numpy path in `bie2d.assemble_double_layer`
    (parity-tested): trapezoid of the full kernel plus, in log-split mode, the
    spectral correction weights applied to the ln(r) coefficient.
    """
    cdef Py_ssize_t n = x.shape[0]
    out_np = np.empty((2 * n, 2 * n), dtype=np.complex128)
    cdef double complex[:, ::1] out = out_np
    cdef Py_ssize_t i, j, k
    cdef double q0, q1v, r2, r, qdn, w, pref
    cdef double complex z, d1v, d2v, f1, f2, f3, c, qq
    cdef double complex F1, F2, F3, u, bf1, bf2, bf3, up, upm1
    cdef double complex D00, D01, D10, D11, L00, L01, L10, L11
    cdef double ck
    cdef int kk, nterms
    cdef double TWO_PI_INV = 1.0 / (2.0 * PI)
    with nogil:
        for i in range(n):
            for j in range(n):
                if i == j:
                    pref = -tau[i] * TWO_PI_INV * h * speed[i]
                    out[2*i, 2*j] = pref * tang[i, 0] * tang[i, 0]
                    out[2*i, 2*j+1] = pref * tang[i, 0] * tang[i, 1]
                    out[2*i+1, 2*j] = pref * tang[i, 1] * tang[i, 0]
                    out[2*i+1, 2*j+1] = pref * tang[i, 1] * tang[i, 1]
                    continue
                q0 = x[i, 0] - x[j, 0]
                q1v = x[i, 1] - x[j, 1]
                r2 = q0 * q0 + q1v * q1v
                r = sqrt(r2)
                qdn = q0 * nu[j, 0] + q1v * nu[j, 1]
                w = speed[j]
                z = sqlam * r
                if cabs_(z) <= AUX_CUT:
                    d_pair_series(z, &d1v, &d2v)
                else:
                    k01_scalar(z, &f1, &f2)          # reuse f1,f2 as K0,K1
                    c = f1 + 2.0 * f2 / z            # K2
                    d1v = 2.0 * c + 1.0 - 4.0 / (z * z)
                    d2v = 2.0 * c + z * f2 - 4.0 / (z * z)
                f1 = d1v / r2
                f2 = d2v / r2
                f3 = (2.0 * d1v + 2.0 * d2v - 2.0) / (r2 * r2)
                # D_ab = -(1/2pi)[q_a nu_b f1 + (nu_a q_b + d_ab qdn) f2
                #                 - q_a q_b qdn f3]
                D00 = -TWO_PI_INV * (q0 * nu[j, 0] * f1 + (nu[j, 0] * q0 + qdn) * f2
                                     - q0 * q0 * qdn * f3)
                D01 = -TWO_PI_INV * (q0 * nu[j, 1] * f1 + nu[j, 0] * q1v * f2
                                     - q0 * q1v * qdn * f3)
                D10 = -TWO_PI_INV * (q1v * nu[j, 0] * f1 + nu[j, 1] * q0 * f2
                                     - q1v * q0 * qdn * f3)
                D11 = -TWO_PI_INV * (q1v * nu[j, 1] * f1 + (nu[j, 1] * q1v + qdn) * f2
                                     - q1v * q1v * qdn * f3)
                out[2*i, 2*j] = h * w * D00
                out[2*i, 2*j+1] = h * w * D01
                out[2*i+1, 2*j] = h * w * D10
                out[2*i+1, 2*j+1] = h * w * D11
                if log_split:
                    u = 0.25 * z * z
                    nterms = NTERMS + <int>(2.2 * sqrt(cabs_(u) + 1.0)) + 2
                    if nterms > 45:
                        nterms = 45
                    bf1 = 0.0; bf2 = 0.0; bf3 = 0.0
                    up = 1.0; upm1 = 1.0
                    for kk in range(nterms):
                        ck = 1.0 / (FAC[kk] * FAC[kk + 2])
                        bf1 = bf1 + ck * up
                        bf2 = bf2 + (kk + 1) * ck * up
                        if kk >= 1:
                            bf3 = bf3 + kk * ck * upm1
                            upm1 = upm1 * u
                        up = up * u
                    F1 = lam * (-0.5 * bf1)
                    F2 = lam * (0.5 * bf2)
                    F3 = lam * lam * (0.25 * bf3)
                    L00 = -TWO_PI_INV * (q0 * nu[j, 0] * F1 + (nu[j, 0] * q0 + qdn) * F2
                                         - q0 * q0 * qdn * F3)
                    L01 = -TWO_PI_INV * (q0 * nu[j, 1] * F1 + nu[j, 0] * q1v * F2
                                         - q0 * q1v * qdn * F3)
                    L10 = -TWO_PI_INV * (q1v * nu[j, 0] * F1 + nu[j, 1] * q0 * F2
                                         - q1v * q0 * qdn * F3)
                    L11 = -TWO_PI_INV * (q1v * nu[j, 1] * F1 + (nu[j, 1] * q1v + qdn) * F2
                                         - q1v * q1v * qdn * F3)
                    c = 0.5 * w * logcorr[(i - j + n) % n]
                    out[2*i, 2*j] = out[2*i, 2*j] + c * L00
                    out[2*i, 2*j+1] = out[2*i, 2*j+1] + c * L01
                    out[2*i+1, 2*j] = out[2*i+1, 2*j] + c * L10
                    out[2*i+1, 2*j+1] = out[2*i+1, 2*j+1] + c * L11
    return out_np
