# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops.

Must stay call-compatible with :mod:`athermal._pykernels`; the test-suite
runs both against each other.
"""

import numpy as np

from libc.math cimport cos, sin, fabs


cdef inline double _fd(double a, double b) noexcept nogil:
    cdef double s = a + b
    if s <= 0.0:
        return 0.0
    return (a - b) * (a - b) / s


cdef inline void _neumaier(double* acc, double* comp, double v) noexcept nogil:
    cdef double t = acc[0] + v
    if fabs(acc[0]) >= fabs(v):
        comp[0] += (acc[0] - t) + v
    else:
        comp[0] += (v - t) + acc[0]
    acc[0] = t


def fisher_sum(const double[::1] a, const double[::1] b, const double[::1] w):
    cdef Py_ssize_t n = a.shape[0], i
    cdef double acc = 0.0, comp = 0.0
    if b.shape[0] != n or w.shape[0] != n:
        raise ValueError("length mismatch")
    with nogil:
        for i in range(n):
            if w[i] != 0.0:
                _neumaier(&acc, &comp, _fd(a[i], b[i]) * w[i])
    return acc + comp


def reflected_step_integral(const double[::1] qw, const double[::1] qv,
                            const double[::1] ew, const double[::1] ev,
                            bint with_energy=True, bint half=False):
    cdef Py_ssize_t nq = qw.shape[0], ne = ew.shape[0]
    if nq == 0 or qv.shape[0] != nq:
        raise ValueError("q step function is empty or inconsistent")
    if with_energy and (ne == 0 or ev.shape[0] != ne):
        raise ValueError("energy step function is empty or inconsistent")
    if not with_energy:
        ne = 1

    # reflected breakpoints come from suffix sums so that narrow segments
    # near either end keep full relative precision
    cdef double[::1] bq = np.cumsum(qw)
    cdef double[::1] sq = np.ascontiguousarray(np.cumsum(qw[::-1])[::-1])
    cdef double[::1] be = np.cumsum(ew) if with_energy else np.ones(1)
    cdef double[::1] se = (np.ascontiguousarray(np.cumsum(ew[::-1])[::-1])
                           if with_energy else np.ones(1))
    cdef double L = bq[nq - 1]
    cdef double upper = 0.5 * L if half else L
    cdef Py_ssize_t iq = 0, jq = nq - 1, ie = 0, je = ne - 1
    cdef double x = 0.0, nxt, val, de
    cdef double acc = 0.0, comp = 0.0

    with nogil:
        while x < upper:
            nxt = upper
            if iq < nq - 1 and bq[iq] < nxt:
                nxt = bq[iq]
            if jq > 0 and sq[jq] < nxt:
                nxt = sq[jq]
            if with_energy:
                if ie < ne - 1 and be[ie] < nxt:
                    nxt = be[ie]
                if je > 0 and se[je] < nxt:
                    nxt = se[je]
            if nxt > x:
                val = _fd(qv[iq], qv[jq])
                if with_energy:
                    de = ev[ie] - ev[je]
                    val = val * de * de
                _neumaier(&acc, &comp, val * (nxt - x))
            while iq < nq - 1 and bq[iq] <= nxt:
                iq += 1
            while jq > 0 and sq[jq] <= nxt:
                jq -= 1
            if with_energy:
                while ie < ne - 1 and be[ie] <= nxt:
                    ie += 1
                while je > 0 and se[je] <= nxt:
                    je -= 1
            x = nxt
    return acc + comp


cdef double _qfi_core(double complex[:, ::1] W, double[:, ::1] F,
                      const double[::1] h, Py_ssize_t d) noexcept nogil:
    cdef Py_ssize_t i, j, k
    cdef double complex m
    cdef double total = 0.0
    for i in range(d):
        for j in range(i + 1, d):
            if F[i, j] == 0.0:
                continue
            m = 0.0
            for k in range(d):
                m = m + W[k, i].conjugate() * h[k] * W[k, j]
            total += F[i, j] * (m.real * m.real + m.imag * m.imag)
    return 4.0 * total


cdef double[:, ::1] _fisher_matrix(const double[::1] p):
    cdef Py_ssize_t d = p.shape[0], i, j
    cdef double[:, ::1] F = np.zeros((d, d))
    for i in range(d):
        for j in range(d):
            F[i, j] = _fd(p[i], p[j])
    return F


def qfi_rotated(const double complex[:, ::1] U, const double[::1] p, const double[::1] h):
    cdef Py_ssize_t d = U.shape[0]
    if U.shape[1] != d or p.shape[0] != d or h.shape[0] != d:
        raise ValueError("dimension mismatch")
    cdef double complex[:, ::1] W = np.array(U, dtype=np.complex128)
    cdef double[:, ::1] F = _fisher_matrix(p)
    return _qfi_core(W, F, h, d)


def qfi_fd_gradient(const double complex[:, ::1] U, const double[::1] p,
                    const double[::1] h, double delta):
    cdef Py_ssize_t d = U.shape[0], a, b, k, kind, g = 0
    if U.shape[1] != d or p.shape[0] != d or h.shape[0] != d:
        raise ValueError("dimension mismatch")
    cdef double complex[:, ::1] W = np.array(U, dtype=np.complex128)
    cdef double[:, ::1] F = _fisher_matrix(p)
    out = np.zeros(d * (d - 1))
    cdef double[::1] grad = out
    cdef Py_ssize_t s
    cdef double t, cs, sn, qp, qm
    cdef double complex ua, ub

    with nogil:
        for a in range(d):
            for b in range(a + 1, d):
                for kind in range(2):
                    qp = 0.0
                    qm = 0.0
                    for s in range(2):
                        t = delta if s == 0 else -delta
                        cs = cos(t)
                        sn = sin(t)
                        for k in range(d):
                            ua = U[k, a]
                            ub = U[k, b]
                            if kind == 0:
                                W[k, a] = cs * ua - sn * ub
                                W[k, b] = sn * ua + cs * ub
                            else:
                                W[k, a] = cs * ua + 1j * sn * ub
                                W[k, b] = 1j * sn * ua + cs * ub
                        if s == 0:
                            qp = _qfi_core(W, F, h, d)
                        else:
                            qm = _qfi_core(W, F, h, d)
                    for k in range(d):
                        W[k, a] = U[k, a]
                        W[k, b] = U[k, b]
                    grad[g] = (qp - qm) / (2.0 * delta)
                    g += 1
    return out
