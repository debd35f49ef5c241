"""Explicit finite baths and the energy-block decomposition.

A system state in contact with a Gibbs bath splits into blocks of fixed
total energy E.  Within a block the joint eigenvalues are proportional to
p_i e^{beta eps_i}, each repeated D(E - eps_i) times, so the best unitary on
the block is given by the fixed-spectrum pairing rule.  Degeneracies can be
astronomically large (binomial baths), so blocks are kept run-length encoded
with log-multiplicities and never expanded.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, logsumexp

from athermal import kernels
from athermal.athermality import _check_beta
from athermal.errors import ConvergenceError, DimensionError, DomainError
from athermal.spectral import (
    SpectralPair,
    as_spectrum,
    as_state,
    fisher_difference,
    optimal_unitary_for_spectrum,
)

EXACT_BINOMIAL_CAP = 60
ENERGY_MATCH_RTOL = 1e-9
MAX_EXPANDED_DIM = 64


@dataclass(frozen=True)
class BathSpec:
    """Bath levels eta (ascending) with log-degeneracies, at inverse temperature beta.

    ``exact`` holds the integer degeneracies when they are known exactly.
    """

    energies: np.ndarray
    log_degeneracies: np.ndarray
    beta: float
    exact: tuple | None = None

    def __post_init__(self):
        e = np.array(self.energies, dtype=float).ravel()
        ld = np.array(self.log_degeneracies, dtype=float).ravel()
        if len(e) == 0 or len(e) != len(ld):
            raise DimensionError("bath needs matching, nonempty energies and degeneracies")
        if np.any(e < 0) or not np.all(np.isfinite(e)) or not np.all(np.isfinite(ld)):
            raise DomainError("bath energies must be finite and nonnegative")
        if np.any(ld < 0):
            raise DomainError("degeneracies must be at least 1")
        order = np.argsort(e, kind="stable")
        if np.any(np.diff(e[order]) <= 0):
            raise DomainError("bath energies must be distinct")
        e, ld = e[order], ld[order]
        exact = self.exact
        if exact is not None:
            exact = tuple(int(exact[k]) for k in order)
        e.setflags(write=False)
        ld.setflags(write=False)
        object.__setattr__(self, "energies", e)
        object.__setattr__(self, "log_degeneracies", ld)
        object.__setattr__(self, "beta", _check_beta(self.beta))
        object.__setattr__(self, "exact", exact)

    @classmethod
    def from_levels(cls, levels, beta):
        """Build from a mapping energy -> positive integer degeneracy."""
        items = sorted(levels.items())
        degs = [int(d) for _, d in items]
        if any(d < 1 or d != dd for d, (_, dd) in zip(degs, items)):
            raise DomainError("degeneracies must be positive integers")
        return cls([e for e, _ in items], [math.log(d) for d in degs], beta, tuple(degs))

    @property
    def levels(self):
        """Mapping energy -> degeneracy (int when exact, float otherwise)."""
        if self.exact is not None:
            return dict(zip(self.energies.tolist(), self.exact))
        return dict(zip(self.energies.tolist(), np.exp(self.log_degeneracies).tolist()))

    @property
    def log_partition_function(self):
        return float(logsumexp(self.log_degeneracies - self.beta * self.energies))

    @property
    def partition_function(self):
        return math.exp(self.log_partition_function)

    def level_probabilities(self):
        return np.exp(self.log_degeneracies - self.beta * self.energies - self.log_partition_function)


@dataclass(frozen=True)
class EnergyBlock:
    """Joint eigenvalues of total energy E, run-length encoded by system level.

    ``block_weight`` is the bath Boltzmann factor e^{-beta E}/Z_B; the joint
    eigenvalue for entry i is block_weight * p_i e^{beta eps_i}.
    ``probability`` is the total weight the state puts on the block.
    """

    total_energy: float
    system_indices: np.ndarray
    log_multiplicities: np.ndarray
    log_block_weight: float
    probability: float
    beta: float

    @property
    def block_weight(self):
        return math.exp(self.log_block_weight)

    @property
    def multiplicities(self):
        return np.exp(self.log_multiplicities)

    @property
    def entries(self):
        return list(zip(self.system_indices.tolist(), self.multiplicities.tolist()))

    @property
    def dimension(self):
        return float(np.exp(logsumexp(self.log_multiplicities)))


def ladder_bath(eps, K, beta):
    """K + 1 equally spaced nondegenerate levels 0, eps, ..., K eps."""
    if not eps > 0:
        raise DomainError("ladder spacing must be positive")
    if K < 0 or int(K) != K:
        raise DomainError("ladder length must be a nonnegative integer")
    K = int(K)
    return BathSpec(eps * np.arange(K + 1), np.zeros(K + 1), beta, (1,) * (K + 1))


def nqubit_bath(xi, n, beta):
    """n noninteracting qubits of gap xi: levels k xi with binomial degeneracy."""
    if not xi > 0:
        raise DomainError("qubit gap must be positive")
    if n < 1 or int(n) != n:
        raise DomainError("number of bath qubits must be a positive integer")
    n = int(n)
    k = np.arange(n + 1)
    if n <= EXACT_BINOMIAL_CAP:
        exact = tuple(math.comb(n, int(j)) for j in k)
        logd = np.array([math.log(c) for c in exact])
    else:
        exact = None
        logd = gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1)
    return BathSpec(xi * k, logd, beta, exact)


def _cluster(values, rtol):
    # sorted values -> group labels; neighbours within rtol share a label
    order = np.argsort(values, kind="stable")
    labels = np.empty(len(values), dtype=int)
    label, anchor = 0, values[order[0]]
    for pos in order:
        v = values[pos]
        if abs(v - anchor) > rtol * max(1.0, abs(anchor)):
            label += 1
            anchor = v
        labels[pos] = label
    return labels


def block_decompose(state, spec, bath):
    """Split the system-bath Gibbs product into blocks of total energy E = eps_i + eta.

    Totals that agree to a relative 1e-9 are treated as the same block.
    """
    spec = as_spectrum(spec)
    state = as_state(state, spec.dim)
    beta = bath.beta
    sys_idx = np.repeat(np.arange(spec.dim), len(bath.energies))
    bath_idx = np.tile(np.arange(len(bath.energies)), spec.dim)
    totals = spec.energies[sys_idx] + bath.energies[bath_idx]
    labels = _cluster(totals, ENERGY_MATCH_RTOL)
    log_z = bath.log_partition_function
    with np.errstate(divide="ignore"):
        log_p = np.log(state.probs)
    blocks = []
    for lab in range(labels.max() + 1):
        sel = np.flatnonzero(labels == lab)
        E = float(totals[sel].min())
        idx = sys_idx[sel]
        logm = bath.log_degeneracies[bath_idx[sel]]
        # joint eigenvalue p_i e^{-beta eta} / Z_B per entry
        log_lam = log_p[idx] - beta * bath.energies[bath_idx[sel]] - log_z
        prob = float(np.exp(logsumexp(log_lam + logm))) if np.any(np.isfinite(log_lam)) else 0.0
        blocks.append(EnergyBlock(E, idx, logm, -beta * E - log_z, prob, beta))
    return blocks


def _block_runs(block, state, spec):
    """Scaled joint eigenvalues and multiplicities of a block.

    Returns (values, counts, energies, log_scale) with values and counts
    normalized to a maximum of 1; the true block quantities are recovered by
    multiplying by exp(log_scale), which is valid because both the pairing
    sum and the speed sum are degree-1 homogeneous in each.
    """
    p = as_state(state, spec.dim).probs
    idx = block.system_indices
    eps = spec.energies[idx]
    with np.errstate(divide="ignore"):
        log_lam = np.log(p[idx]) + block.beta * eps + block.log_block_weight
    finite = np.isfinite(log_lam)
    v_shift = log_lam[finite].max() if finite.any() else 0.0
    lam = np.where(finite, np.exp(log_lam - v_shift), 0.0)
    c_shift = block.log_multiplicities.max()
    counts = np.exp(block.log_multiplicities - c_shift)
    return lam, counts, eps, v_shift + c_shift


def _run_order(values, energies):
    # decreasing value, then ascending energy: the beta-ordering tie rule
    return np.lexsort((np.arange(len(values)), energies, -values))


def _paired_sum(block, state, spec, with_energy):
    if len(block.system_indices) < 2:
        return 0.0
    lam, counts, eps, log_scale = _block_runs(block, state, spec)
    qo = _run_order(lam, eps)
    eo = np.argsort(-eps, kind="stable")
    val = kernels.reflected_step_integral(
        np.ascontiguousarray(counts[qo]), np.ascontiguousarray(lam[qo]),
        np.ascontiguousarray(counts[eo]), np.ascontiguousarray(eps[eo]),
        with_energy, True,
    )
    return math.exp(log_scale) * val


def block_max_qfi(block, state, spec):
    """Best QFI of H_S reachable by an energy-conserving unitary on one block."""
    spec = as_spectrum(spec)
    return _paired_sum(block, state, spec, True)


def block_interaction_speed(block, state, spec):
    """Block speed: top half of the sorted eigenvalues paired against the bottom half."""
    spec = as_spectrum(spec)
    return _paired_sum(block, state, spec, False)


def expand_block(block, state, spec):
    """Materialize a block as a SpectralPair of explicit eigenvalue lists."""
    spec = as_spectrum(spec)
    mult = np.rint(block.multiplicities).astype(int)
    if mult.sum() > MAX_EXPANDED_DIM:
        raise DimensionError(f"block dimension {mult.sum()} exceeds {MAX_EXPANDED_DIM}")
    p = as_state(state, spec.dim).probs
    idx = block.system_indices
    lam = p[idx] * np.exp(block.beta * spec.energies[idx] + block.log_block_weight)
    vals = np.repeat(lam, mult)
    total = math.fsum(vals)
    pair = SpectralPair(vals / total, np.repeat(spec.energies[idx], mult))
    return pair, total


def block_optimal_unitary(block, state, spec):
    """Explicit optimal block unitary (small blocks only)."""
    pair, _ = expand_block(block, state, spec)
    return optimal_unitary_for_spectrum(pair)


def finite_bath_max_qfi(state, spec, bath):
    """Sum of per-block optima: the best QFI with this particular bath."""
    spec = as_spectrum(spec)
    return math.fsum(block_max_qfi(b, state, spec) for b in block_decompose(state, spec, bath))


def finite_bath_interaction_speed(state, spec, bath):
    spec = as_spectrum(spec)
    return math.fsum(
        block_interaction_speed(b, state, spec) for b in block_decompose(state, spec, bath)
    )


def ladder_qubit_value(p0, p1, eps, beta, K):
    """Closed-form qubit value with a K-step ladder bath.

    f(p0, p1 e^{beta eps}) eps^2 times the bath weight of levels eps..K eps.
    """
    x = math.exp(-beta * eps)
    if K < 1:
        return 0.0
    z = math.fsum(x**k for k in range(K + 1))
    # f(p0, p1/x) * x = f(p0 x, p1) keeps e^{beta eps} out of the arithmetic
    head = fisher_difference(p0 * x, p1) * eps * eps
    return head * math.fsum(x ** (k - 1) for k in range(1, K + 1)) / z


def ladder_convergence(p1, beta_eps, Ks, eps=1.0):
    """Rows (K, finite_value, analytic, abs_error) for the qubit and ladder baths."""
    from athermal.athermality import max_qfi_qubit

    p0 = 1.0 - p1
    beta = beta_eps / eps
    analytic = max_qfi_qubit(p0, p1, eps, beta)
    rows = []
    for K in Ks:
        val = finite_bath_max_qfi([p0, p1], [0.0, eps], ladder_bath(eps, K, beta))
        rows.append((int(K), val, analytic, abs(val - analytic)))
    return rows


@dataclass(frozen=True)
class RatioProfile:
    """Degeneracy-ratio check over the typical energy window of a bath."""

    k_low: int
    k_high: int
    max_deviation: float
    window_probability: float


def degeneracy_ratio_profile(bath, n_sigma=3.0):
    """Largest |D(E) e^{beta xi} / D(E + xi) - 1| over the typical window.

    Needs equally spaced levels 0, xi, 2 xi, ...  The window is the mean
    level of the bath Gibbs distribution plus or minus ``n_sigma`` standard
    deviations.
    """
    e = bath.energies
    if len(e) < 2:
        raise DimensionError("need at least two bath levels")
    xi = e[1] - e[0]
    if not np.allclose(np.diff(e), xi, rtol=1e-12, atol=0):
        raise DomainError("bath levels must be equally spaced")
    logp = bath.log_degeneracies - bath.beta * e - bath.log_partition_function
    k = np.arange(len(e))
    prob = np.exp(logp)
    mean = math.fsum(prob * k)
    sigma = math.sqrt(math.fsum(prob * (k - mean) ** 2))
    lo = max(0, math.ceil(mean - n_sigma * sigma))
    hi = min(len(e) - 2, math.floor(mean + n_sigma * sigma))
    if hi < lo:
        raise DomainError("typical window is empty")
    ld = bath.log_degeneracies
    window = np.arange(lo, hi + 1)
    dev = np.abs(np.expm1(ld[window] + bath.beta * xi - ld[window + 1]))
    wprob = float(np.exp(logsumexp(logp[lo:hi + 1])))
    return RatioProfile(lo, hi, float(dev.max()), wprob)


def jaynes_cummings_qfi(p0, p1, eps, beta, omega_rabi):
    """Closed form Omega^2 f(p0 e^{-beta eps}, p1) / (1 - e^{-beta eps})."""
    _jc_check(p0, p1, eps, beta)
    x = math.exp(-beta * eps)
    return omega_rabi**2 * fisher_difference(p0 * x, p1) / -math.expm1(-beta * eps)


def jaynes_cummings_series(p0, p1, eps, beta, omega_rabi, rtol=1e-16, max_terms=10_000_000):
    """Block-by-block sum for the Jaynes-Cummings bound.

    Block n carries weight (1 - x) x^n and spread Omega sqrt(n), with
    x = e^{-beta eps}.  Returns ``(value, tail_bound)``; the neglected terms
    are summed in closed form to give the bound.
    """
    _jc_check(p0, p1, eps, beta)
    x = math.exp(-beta * eps)
    one_minus_x = -math.expm1(-beta * eps)
    head = omega_rabi**2 * fisher_difference(p0 * x, p1)
    if head == 0.0:
        return 0.0, 0.0
    # tail after N terms: sum_{n>N} n x^{n-1}(1-x) = x^N (N + 1 - N x)/(1 - x),
    # against a full sum of 1/(1 - x)
    N = 1
    while x**N * (N + 1 - N * x) > rtol:
        N *= 2
        if N > max_terms:
            raise ConvergenceError("Jaynes-Cummings series needs too many terms")
    n = np.arange(1, N + 1, dtype=float)
    terms = head * one_minus_x * n * x ** (n - 1)
    tail = head * x**N * (N + 1 - N * x) / one_minus_x
    return math.fsum(terms), tail


def _jc_check(p0, p1, eps, beta):
    if not eps > 0:
        raise DomainError("qubit gap must be positive")
    if not (math.isfinite(beta) and beta > 0):
        raise DomainError("Jaynes-Cummings bound diverges at beta = 0 (grows like kT/eps)")
    if p0 < 0 or p1 < 0 or abs(p0 + p1 - 1.0) > 1e-12:
        raise DomainError("qubit populations must be nonnegative and sum to 1")
