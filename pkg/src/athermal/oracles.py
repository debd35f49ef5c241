"""Brute-force verifiers that share no closed-form logic with the main modules.

* :func:`brute_force_max_qfi` climbs the unitary group from Haar-random
  starts using finite-difference gradients and BFGS steps.
* :func:`two_mode_qfi` builds the beam-splitter generator on a truncated
  two-mode Fock space and evaluates the spectral QFI sum over its entries.
* :func:`adaptive_integrate` is the quadrature used by the Poisson integral.

Randomness: numpy's PCG64 generator, seeded through ``SeedSequence.spawn`` so
each restart has its own reproducible stream.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate, sparse
from scipy.linalg import expm
from scipy.stats import unitary_group

from athermal import kernels
from athermal.errors import CertificationError, ConvergenceError, DimensionError, DomainError

MAX_SEARCH_DIM = 8
TWO_MODE_TAIL_TOL = 1e-10


@dataclass(frozen=True)
class SearchBudget:
    """Restarts, iteration cap, seed and step schedule for the unitary search.

    Each iteration first tries the full quasi-Newton step (``step_size``
    times the BFGS direction) and multiplies it by ``decay`` until the value
    improves enough, giving up below ``min_step``.
    """

    restarts: int = 32
    steps: int = 200
    seed: int = 0
    step_size: float = 1.0
    decay: float = 0.5
    min_step: float = 1e-12
    fd_step: float = 1e-5
    grad_tol: float = 1e-12

    def __post_init__(self):
        if self.restarts < 1 or self.steps < 1:
            raise DomainError("restarts and steps must be positive")
        if not (self.step_size > 0 and 0 < self.decay < 1 and self.fd_step > 0):
            raise DomainError("step schedule must be positive with decay in (0, 1)")


def _generators(d):
    """Skew-Hermitian basis matching the coordinate order of the gradient kernel."""
    gens = []
    for a in range(d):
        for b in range(a + 1, d):
            x = np.zeros((d, d), dtype=complex)
            x[a, b], x[b, a] = 1.0, -1.0
            gens.append(x)
            y = np.zeros((d, d), dtype=complex)
            y[a, b], y[b, a] = 1j, 1j
            gens.append(y)
    return np.array(gens).reshape(len(gens), d * d)


def _polar(U):
    u, _, vh = np.linalg.svd(U)
    return np.ascontiguousarray(u @ vh)


def _ascend(U, p, h, gens, budget):
    """BFGS ascent with gradients and steps expressed in the body frame U -> U exp(X)."""
    d = U.shape[0]
    m = gens.shape[0]
    eye = np.eye(m)
    value = kernels.qfi_rotated(U, p, h)
    g = kernels.qfi_fd_gradient(U, p, h, budget.fd_step)
    H = 0.5 * eye
    for it in range(budget.steps):
        if float(g @ g) < budget.grad_tol**2:
            break
        direction = H @ g
        slope = float(g @ direction)
        if slope <= 0:
            H = 0.5 * eye
            direction = H @ g
            slope = float(g @ direction)
        t = budget.step_size
        while t >= budget.min_step:
            trial = np.ascontiguousarray(U @ expm(((t * direction) @ gens).reshape(d, d)))
            tv = kernels.qfi_rotated(trial, p, h)
            if tv >= value + 1e-4 * t * slope:
                break
            t *= budget.decay
        else:
            break
        g_new = kernels.qfi_fd_gradient(trial, p, h, budget.fd_step)
        s = t * direction
        y = g - g_new  # curvature of -Q
        sy = float(s @ y)
        if sy > 1e-16:
            rho = 1.0 / sy
            H = (eye - rho * np.outer(s, y)) @ H @ (eye - rho * np.outer(y, s)) + rho * np.outer(s, s)
        U, value, g = trial, tv, g_new
        if it % 20 == 19:
            U = _polar(U)
    return value


def brute_force_max_qfi(probs, hvals, budget=SearchBudget()):
    """Largest QFI of diag(probs) rotated by any unitary, found by multi-start ascent.

    The generator is diag(hvals).  Deterministic for a fixed budget; the
    best restart wins, ties going to the earliest.
    """
    from athermal.spectral import as_state

    p = np.ascontiguousarray(as_state(probs).probs)
    h = np.ascontiguousarray(np.asarray(hvals, dtype=float).ravel())
    d = len(p)
    if len(h) != d:
        raise DimensionError("probabilities and generator eigenvalues differ in length")
    if d > MAX_SEARCH_DIM:
        raise DimensionError(f"search is only reliable up to dimension {MAX_SEARCH_DIM}")
    if d == 1:
        return 0.0
    gens = _generators(d)
    best = -math.inf
    for child in np.random.SeedSequence(budget.seed).spawn(budget.restarts):
        rng = np.random.Generator(np.random.PCG64(child))
        U0 = np.ascontiguousarray(unitary_group.rvs(d, random_state=rng))
        v = _ascend(U0, p, h, gens, budget)
        if v > best:
            best = v
    return best


def two_mode_qfi(p, r, n_max):
    """QFI/4 of (state x thermal mode) under G = a^dag b + b^dag a, by brute force.

    Both modes are cut at ``n_max`` photons; the discarded probability must
    be below 1e-10.  Dropped terms are nonnegative, so the value grows with
    ``n_max`` toward its limit.
    """
    from athermal.optical import as_photon, _ratio

    p = as_photon(p)
    r = _ratio(r, allow_one=False)
    n_max = int(n_max)
    if n_max < 1:
        raise DomainError("n_max must be at least 1")
    sys = np.zeros(n_max + 1)
    keep = min(len(p.probs), n_max + 1)
    sys[:keep] = p.probs[:keep]
    dropped = p.tail_bound + math.fsum(p.probs[keep:]) + r ** (n_max + 1)
    if dropped > TWO_MODE_TAIL_TOL:
        raise CertificationError(f"two-mode truncation drops {dropped:.3g} probability")
    bath = (1 - r) * r ** np.arange(n_max + 1)
    P = np.kron(sys, bath)

    a = sparse.diags(np.sqrt(np.arange(1, n_max + 1, dtype=float)), 1, format="csr")
    G = (sparse.kron(a.T, a) + sparse.kron(a, a.T)).tocoo()
    fd = kernels.fisher_difference_array(P[G.row], P[G.col])
    F = 2.0 * math.fsum(fd * np.abs(G.data) ** 2)
    return F / 4.0


def adaptive_integrate(f, a, b, tol, singular_left=False, max_depth=60):
    """Integral of a scalar function on [a, b] to absolute accuracy ``tol``.

    Each piece uses QUADPACK's adaptive Gauss-Kronrod rule; a piece may also
    stop at 1e-14 relative accuracy when ``tol`` is below its rounding level.  With
    ``singular_left`` the interval is split dyadically toward ``a``; the
    untouched remainder is extrapolated from the ratio of the last two piece
    integrals, and refinement stops once two successive extrapolated totals
    agree to tol/2.
    """
    if not tol > 0:
        raise DomainError("tolerance must be positive")
    if not b > a:
        return 0.0 if a == b else -adaptive_integrate(f, b, a, tol, singular_left, max_depth)
    if not singular_left:
        return _quad(f, a, b, tol)

    total = 0.0
    width = b - a
    prev = estimate = None
    for k in range(max_depth):
        lo, hi = a + width / 2.0 ** (k + 1), a + width / 2.0**k
        # sum of piece tolerances stays below tol * pi^2 / 24
        piece = _quad(f, lo, hi, tol / (4.0 * (k + 1) ** 2))
        total += piece
        if piece == 0.0 and prev == 0.0:
            return total
        if prev not in (None, 0.0) and abs(piece) < abs(prev):
            rho = piece / prev
            new = total + piece * rho / (1 - rho)
            if estimate is not None and abs(new - estimate) <= 0.5 * tol:
                return new
            estimate = new
        else:
            estimate = None
        prev = piece
    raise ConvergenceError("endpoint refinement hit the depth cap")


def _quad(f, a, b, tol, rel_floor=1e-14):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, err = integrate.quad(f, a, b, epsabs=tol, epsrel=rel_floor, limit=500, full_output=True)[:2]
    if not err <= max(tol, rel_floor * abs(val)):
        raise ConvergenceError(f"quadrature error estimate {err:.3g} exceeds {tol:.3g}")
    return val
