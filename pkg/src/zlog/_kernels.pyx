# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled twin of zlog._kernels_py: same API, C loops.

See the pure module for the element encoding and the kernel contracts.  The
selector zlog.kernels prefers this module when it built; ZLOG_PURE=1 forces
the numpy fallback.  Integer results (point counts) are identical across the
two implementations; floating results agree to near machine precision (the
summation orders differ).
"""

import numpy as np

cimport numpy as cnp

from zlog._kernels_py import _idx_to_digits, _reduction_rows

IMPLEMENTATION = "cython"

DEF MAXK = 32
DEF MAXV = 64


cdef inline double complex _ipow(double complex w, long e):
    cdef double complex r = 1.0
    cdef double complex a = w
    if e <= 0:
        return r
    while True:
        if e & 1:
            r = r * a
        e >>= 1
        if not e:
            return r
        a = a * a


def cloud_eval(coeffs, mus, long r0, z):
    """-sum_m coeffs[m] * (mus[m]*z)^r0 / (1 - mus[m]*z), vectorized over z."""
    c_arr = np.ascontiguousarray(coeffs, dtype=np.complex128)
    m_arr = np.ascontiguousarray(mus, dtype=np.complex128)
    z_arr = np.ascontiguousarray(z, dtype=np.complex128)
    out = np.empty(z_arr.shape[0], dtype=np.complex128)
    cdef double complex[::1] cv = c_arr
    cdef double complex[::1] mv = m_arr
    cdef double complex[::1] zv = z_arr
    cdef double complex[::1] ov = out
    cdef Py_ssize_t M = m_arr.shape[0], N = z_arr.shape[0]
    cdef Py_ssize_t n, t
    cdef double complex w, s
    for n in range(N):
        s = 0
        for t in range(M):
            w = mv[t] * zv[n]
            s = s + cv[t] * _ipow(w, r0) / (1.0 - w)
        ov[n] = -s
    return out


cdef inline void _cmul(long* a, long* b, long* out, long p, long k,
                       long[:, ::1] red) nogil:
    cdef long conv[2 * MAXK]
    cdef long i, j, d, top
    for d in range(2 * k - 1):
        conv[d] = 0
    for i in range(k):
        if a[i]:
            for j in range(k):
                conv[i + j] += a[i] * b[j]
    for d in range(2 * k - 1):
        conv[d] %= p
    for i in range(k):
        out[i] = conv[i]
    for d in range(2 * k - 2, k - 1, -1):
        top = conv[d]
        if top:
            for i in range(k):
                out[i] = (out[i] + top * red[d - k, i]) % p


cdef inline void _cpow(long* base, long e, long* out, long p, long k,
                       long[:, ::1] red) nogil:
    cdef long acc[MAXK]
    cdef long tmp[MAXK]
    cdef long i
    for i in range(k):
        out[i] = 0
        acc[i] = base[i]
    out[0] = 1
    if e <= 0:
        return
    while True:
        if e & 1:
            _cmul(out, acc, tmp, p, k, red)
            for i in range(k):
                out[i] = tmp[i]
        e >>= 1
        if not e:
            return
        _cmul(acc, acc, tmp, p, k, red)
        for i in range(k):
            acc[i] = tmp[i]


def count_zero_locus(long p, long k, modulus, coef_idx, exps, eq_offsets,
                     fixed, long nfree):
    """Count points of the zero locus; see zlog._kernels_py for the layout."""
    cdef long nfixed = len(fixed)
    cdef long nvars = nfixed + nfree
    if k >= MAXK or nvars >= MAXV:
        from zlog import _kernels_py
        return _kernels_py.count_zero_locus(
            p, k, modulus, coef_idx, exps, eq_offsets, fixed, nfree
        )
    red_arr = np.ascontiguousarray(_reduction_rows(p, k, modulus), dtype=np.int64)
    if red_arr.shape[0] == 0:
        red_arr = np.zeros((1, k), dtype=np.int64)
    coefd_arr = np.ascontiguousarray(
        _idx_to_digits(np.asarray(coef_idx, dtype=np.int64), p, k), dtype=np.int64
    )
    exps_arr = np.ascontiguousarray(exps, dtype=np.int64)
    offs_arr = np.ascontiguousarray(eq_offsets, dtype=np.int64)
    cdef long[:, ::1] red = red_arr
    cdef long[:, ::1] coefd = coefd_arr
    cdef long[:, ::1] expv = exps_arr
    cdef long[::1] offs = offs_arr
    cdef long neq = offs_arr.shape[0] - 1
    cdef long q = p**k
    cdef long total = q**nfree
    cdef long vd[MAXV][MAXK]
    cdef long term[MAXK]
    cdef long acc[MAXK]
    cdef long pw[MAXK]
    cdef long tmp[MAXK]
    cdef long pt, v, e, t, i, rest, idxv, ev, count = 0
    cdef bint ok, zero
    for v in range(nfixed):
        rest = fixed[v]
        for i in range(k):
            vd[v][i] = rest % p
            rest //= p
    for pt in range(total):
        rest = pt
        for v in range(nfree):
            idxv = rest % q
            rest //= q
            for i in range(k):
                vd[nfixed + v][i] = idxv % p
                idxv //= p
        ok = True
        for e in range(neq):
            for i in range(k):
                acc[i] = 0
            for t in range(offs[e], offs[e + 1]):
                for i in range(k):
                    term[i] = coefd[t, i]
                for v in range(nvars):
                    ev = expv[t, v]
                    if ev:
                        _cpow(&vd[v][0], ev, &pw[0], p, k, red)
                        _cmul(&term[0], &pw[0], &tmp[0], p, k, red)
                        for i in range(k):
                            term[i] = tmp[i]
                for i in range(k):
                    acc[i] = (acc[i] + term[i]) % p
            zero = True
            for i in range(k):
                if acc[i] != 0:
                    zero = False
                    break
            if not zero:
                ok = False
                break
        if ok:
            count += 1
    return count
