"""Numpy implementations of the hot loops.

Same call signatures and semantics as the compiled ``_ckernels`` module.
Used automatically when the extension is not built.
"""

import math

import numpy as np


def fisher_difference_array(a, b):
    """Elementwise (a - b)^2 / (a + b) with f(0, 0) = 0."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    s = a + b
    out = np.zeros(np.broadcast(a, b).shape)
    np.divide((a - b) ** 2, s, out=out, where=s > 0)
    return out


def fisher_sum(a, b, w):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    w = np.asarray(w, dtype=float)
    if not (a.shape == b.shape == w.shape):
        raise ValueError("length mismatch")
    mask = w != 0.0
    return math.fsum(fisher_difference_array(a[mask], b[mask]) * w[mask])


def _segment_index(ends, x):
    # right-open segments [ends[k-1], ends[k])
    idx = np.searchsorted(ends, x, side="right")
    return np.minimum(idx, len(ends) - 1)


def _reflected_index(widths, x):
    # segment holding L - x, located through suffix sums of the widths
    ends = np.cumsum(widths[::-1])
    return len(widths) - 1 - _segment_index(ends, x)


def reflected_step_integral(qw, qv, ew, ev, with_energy=True, half=False):
    qw = np.asarray(qw, dtype=float)
    qv = np.asarray(qv, dtype=float)
    if len(qw) == 0 or len(qv) != len(qw):
        raise ValueError("q step function is empty or inconsistent")
    bq = np.cumsum(qw)
    L = bq[-1]
    upper = 0.5 * L if half else L
    pts = [[0.0, upper], bq[:-1], np.cumsum(qw[::-1])[:-1]]
    if with_energy:
        ew = np.asarray(ew, dtype=float)
        ev = np.asarray(ev, dtype=float)
        if len(ew) == 0 or len(ev) != len(ew):
            raise ValueError("energy step function is empty or inconsistent")
        be = np.cumsum(ew)
        pts += [be[:-1], np.cumsum(ew[::-1])[:-1]]
    grid = np.unique(np.concatenate(pts))
    grid = grid[(grid >= 0.0) & (grid <= upper)]
    left, right = grid[:-1], grid[1:]
    mid = 0.5 * (left + right)
    val = fisher_difference_array(qv[_segment_index(bq, mid)], qv[_reflected_index(qw, mid)])
    if with_energy:
        de = ev[_segment_index(be, mid)] - ev[_reflected_index(ew, mid)]
        val = val * de * de
    return math.fsum(val * (right - left))


def _fisher_matrix(p):
    p = np.asarray(p, dtype=float)
    return fisher_difference_array(p[:, None], p[None, :])


def _qfi_with(W, F, h):
    M = W.conj().T @ (h[:, None] * W)
    return 2.0 * float(np.sum(F * (M.real**2 + M.imag**2)))


def qfi_rotated(U, p, h):
    U = np.asarray(U, dtype=complex)
    h = np.asarray(h, dtype=float)
    d = U.shape[0]
    if U.shape != (d, d) or len(p) != d or len(h) != d:
        raise ValueError("dimension mismatch")
    return _qfi_with(U, _fisher_matrix(p), h)


def qfi_fd_gradient(U, p, h, delta):
    U = np.asarray(U, dtype=complex)
    h = np.asarray(h, dtype=float)
    d = U.shape[0]
    if U.shape != (d, d) or len(p) != d or len(h) != d:
        raise ValueError("dimension mismatch")
    F = _fisher_matrix(p)
    grad = np.zeros(d * (d - 1))
    g = 0
    for a in range(d):
        for b in range(a + 1, d):
            ua, ub = U[:, a], U[:, b]
            for kind in range(2):
                q = []
                for t in (delta, -delta):
                    cs, sn = math.cos(t), math.sin(t)
                    W = U.copy()
                    if kind == 0:
                        W[:, a] = cs * ua - sn * ub
                        W[:, b] = sn * ua + cs * ub
                    else:
                        W[:, a] = cs * ua + 1j * sn * ub
                        W[:, b] = 1j * sn * ua + cs * ub
                    q.append(_qfi_with(W, F, h))
                grad[g] = (q[0] - q[1]) / (2.0 * delta)
                g += 1
    return grad
