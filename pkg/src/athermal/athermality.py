"""Maximal phase-sensing QFI and interaction speed relative to a thermal bath.

The closed forms are integrals of piecewise-constant functions built from
the beta-ordered state.  They are evaluated exactly by walking the merged
breakpoints of all step functions involved; no quadrature is used.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from athermal import kernels
from athermal.errors import DimensionError, DomainError
from athermal.spectral import (
    NORMALIZATION_TOL,
    DiagonalState,
    SpectralPair,
    as_spectrum,
    as_state,
    fisher_difference,
    max_qfi_for_spectrum,
)

# exp() overflows just above 709; q = p e^{beta eps} must stay finite
MAX_BETA_ENERGY = 700.0
CURVE_TOL = 1e-10


@dataclass(frozen=True)
class StepFunction:
    """Piecewise-constant function on [0, sum(widths)) with right-open segments."""

    widths: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        w = np.array(self.widths, dtype=float).ravel()
        v = np.array(self.values, dtype=float).ravel()
        if len(w) != len(v) or len(w) == 0:
            raise DimensionError("step function needs matching, nonempty widths and values")
        if np.any(w <= 0) or not np.all(np.isfinite(w)):
            raise DomainError("step widths must be positive and finite")
        w.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "widths", w)
        object.__setattr__(self, "values", v)

    @property
    def length(self):
        return math.fsum(self.widths)

    @property
    def breakpoints(self):
        return np.cumsum(self.widths)

    @property
    def segments(self):
        return list(zip(self.widths.tolist(), self.values.tolist()))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        idx = np.searchsorted(self.breakpoints, x, side="right")
        return self.values[np.minimum(idx, len(self.values) - 1)]

    def reflected(self):
        """The function x -> self(L - x)."""
        return StepFunction(self.widths[::-1], self.values[::-1])


@dataclass(frozen=True)
class BetaOrdering:
    """Levels sorted by decreasing p_i e^{beta eps_i}."""

    permutation: np.ndarray
    weights: np.ndarray
    widths: np.ndarray

    @property
    def partition_function(self):
        return math.fsum(self.widths)


@dataclass(frozen=True)
class ThermoCurve:
    """Concave polyline through the cumulative (width, probability) points."""

    points: np.ndarray

    @property
    def xs(self):
        return self.points[:, 0]

    @property
    def ys(self):
        return self.points[:, 1]

    def __call__(self, x):
        return np.interp(x, self.xs, self.ys)


def _check_beta(beta):
    beta = float(beta)
    if not (math.isfinite(beta) and beta >= 0):
        raise DomainError(f"beta must be finite and nonnegative, got {beta}")
    return beta


def _prepare(state, spec, beta):
    spec = as_spectrum(spec)
    state = as_state(state, spec.dim)
    beta = _check_beta(beta)
    if beta * spec.energies[-1] > MAX_BETA_ENERGY:
        raise DomainError(
            f"beta * max energy = {beta * spec.energies[-1]:.4g} exceeds {MAX_BETA_ENERGY}; "
            "use qfi_temperature_limits for the low-temperature limit"
        )
    return state, spec, beta


def gibbs_state(spec, beta):
    spec = as_spectrum(spec)
    return spec.gibbs(_check_beta(beta))


def beta_order(state, spec, beta):
    """Beta-ordering of ``state``; ties go to lower energy, then lower index."""
    state, spec, beta = _prepare(state, spec, beta)
    e = spec.energies
    q = state.probs * np.exp(beta * e)
    # lexsort: last key is primary
    perm = np.lexsort((np.arange(len(e)), e, -q))
    return BetaOrdering(perm, q[perm], np.exp(-beta * e[perm]))


def build_energy_steps(spec, beta):
    """Energies in decreasing order with widths e^{-beta eps}, and its reflection."""
    spec = as_spectrum(spec)
    beta = _check_beta(beta)
    e_dn = spec.energies[::-1]
    down = StepFunction(np.exp(-beta * e_dn), e_dn)
    return down, down.reflected()


def build_q_steps(state, spec, beta):
    """Beta-ordered weights q with widths e^{-beta eps}, and its reflection."""
    order = beta_order(state, spec, beta)
    down = StepFunction(order.widths, order.weights)
    return down, down.reflected()


def max_qfi_thermal(state, spec, beta, full_range=False):
    """Largest QFI reachable from ``state`` by thermal operations at ``beta``.

    (1/2) int_0^Z f(q_dn, q_up) (e_dn - e_up)^2 dx, evaluated exactly.  The
    integrand is symmetric about Z/2, so only [0, Z/2] is walked: segment
    widths there come from short partial sums and stay accurate when a
    narrow step carries a very large q.  ``full_range=True`` walks all of
    [0, Z] and halves the result.
    """
    state, spec, beta = _prepare(state, spec, beta)
    q_dn, _ = build_q_steps(state, spec, beta)
    e_dn, _ = build_energy_steps(spec, beta)
    total = kernels.reflected_step_integral(
        np.ascontiguousarray(q_dn.widths), np.ascontiguousarray(q_dn.values),
        np.ascontiguousarray(e_dn.widths), np.ascontiguousarray(e_dn.values),
        True, not full_range,
    )
    return 0.5 * total if full_range else total


def max_qfi_qubit(p0, p1, eps, beta):
    """Qubit closed form f(p0 e^{-beta eps}, p1) eps^2."""
    if p0 < 0 or p1 < 0 or abs(p0 + p1 - 1.0) > NORMALIZATION_TOL:
        raise DomainError("qubit populations must be nonnegative and sum to 1")
    if not eps > 0:
        raise DomainError("qubit gap must be positive")
    beta = _check_beta(beta)
    return fisher_difference(p0 * math.exp(-beta * eps), p1) * eps * eps


def qfi_temperature_limits(state, spec):
    """Zero- and infinite-temperature limits of :func:`max_qfi_thermal`.

    Returns ``(low, high)``: the mean squared energy above the ground level,
    and the fixed-spectrum maximum of the state under H.
    """
    spec = as_spectrum(spec)
    state = as_state(state, spec.dim)
    e = spec.energies - spec.energies[0]
    low = math.fsum(state.probs * e * e)
    high = max_qfi_for_spectrum(SpectralPair(state, spec.energies))
    return low, high


def interaction_speed(state, spec, beta):
    """Largest QFI growth rate under an interaction of unit spread.

    int_0^{Z/2} f(q_dn, q_up) dx, evaluated exactly.
    """
    state, spec, beta = _prepare(state, spec, beta)
    q_dn, _ = build_q_steps(state, spec, beta)
    empty = np.zeros(0)
    return kernels.reflected_step_integral(
        np.ascontiguousarray(q_dn.widths), np.ascontiguousarray(q_dn.values),
        empty, empty, False, True,
    )


def step_segments(state, spec, beta):
    """Merged-breakpoint table behind :func:`max_qfi_thermal`.

    One row per constant piece: (x_left, x_right, q_dn, q_up, e_dn, e_up,
    contribution), where the contributions sum to the maximal QFI.
    """
    state, spec, beta = _prepare(state, spec, beta)
    q_dn, q_up = build_q_steps(state, spec, beta)
    e_dn, e_up = build_energy_steps(spec, beta)
    L = q_dn.length
    pts = np.concatenate([[0.0, L], q_dn.breakpoints[:-1], q_up.breakpoints[:-1],
                          e_dn.breakpoints[:-1], e_up.breakpoints[:-1]])
    grid = np.unique(pts[(pts >= 0) & (pts <= L)])
    rows = []
    for a, b in zip(grid[:-1], grid[1:]):
        m = 0.5 * (a + b)
        qd, qu = float(q_dn(m)), float(q_up(m))
        ed, eu = float(e_dn(m)), float(e_up(m))
        contrib = 0.5 * fisher_difference(qd, qu) * (ed - eu) ** 2 * (b - a)
        rows.append((float(a), float(b), qd, qu, ed, eu, contrib))
    return rows


def thermo_curve(state, spec, beta):
    order = beta_order(state, spec, beta)
    probs = order.weights * order.widths
    xs = np.concatenate([[0.0], np.cumsum(order.widths)])
    ys = np.concatenate([[0.0], np.cumsum(probs)])
    return ThermoCurve(np.column_stack([xs, ys]))


def thermo_majorizes(x, y, spec, beta, tol=CURVE_TOL):
    """True when ``y`` thermo-majorizes ``x``: the curve of y never dips below that of x."""
    cx = thermo_curve(x, spec, beta)
    cy = thermo_curve(y, spec, beta)
    grid = np.union1d(cx.xs, cy.xs)
    return bool(np.all(cy(grid) >= cx(grid) - tol))


def beta_swap_map(spec, beta, lo, hi, mix):
    """Gibbs-preserving stochastic matrix acting on the level pair (lo, hi).

    ``mix`` interpolates between the identity (1) and the full swap (0), which
    empties ``hi`` into ``lo`` and moves the Gibbs-ratio share of ``lo`` up.
    Column-stochastic: new_p = T @ p.
    """
    spec = as_spectrum(spec)
    beta = _check_beta(beta)
    if spec.energies[lo] > spec.energies[hi]:
        lo, hi = hi, lo
    d = spec.dim
    ratio = math.exp(-beta * (spec.energies[hi] - spec.energies[lo]))
    swap = np.eye(d)
    swap[lo, lo] = 1.0 - ratio
    swap[hi, lo] = ratio
    swap[hi, hi] = 0.0
    swap[lo, hi] = 1.0
    return mix * np.eye(d) + (1.0 - mix) * swap


def random_gibbs_stochastic_map(spec, beta, rng):
    """Random beta-swap mixture on a random level pair (``rng``: numpy Generator)."""
    d = as_spectrum(spec).dim
    if d < 2:
        raise DimensionError("need at least two levels")
    lo, hi = sorted(rng.choice(d, size=2, replace=False).tolist())
    return beta_swap_map(spec, beta, lo, hi, float(rng.uniform()))


def apply_stochastic(T, state):
    p = np.clip(T @ as_state(state).probs, 0.0, None)
    return DiagonalState(p / math.fsum(p))
