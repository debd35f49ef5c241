"""Single-mode photon statistics measured against a thermal background.

A state diagonal in the number basis is described by a truncated
:class:`PhotonDistribution`.  Each distribution carries rigorous bounds on
the mass and on the first few moments beyond its truncation point, and
every series below turns those into a certified error allowance.

The background enters through the Boltzmann ratio r = exp(-hbar omega / kT)
with mean occupation n_r = r / (1 - r).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import constants, optimize
from scipy.special import gammaln

from athermal import kernels
from athermal.errors import CertificationError, DimensionError, DomainError
from athermal.oracles import adaptive_integrate

NORMALIZATION_TOL = 1e-12
CONSTRUCTOR_TAIL_TOL = 1e-15
SERIES_TAIL_TOL = 1e-10
MAX_MOMENT = 4
MAX_TRUNCATION = 1_000_000


@dataclass(frozen=True)
class PhotonDistribution:
    """Number-basis probabilities p_0..p_N with certified tails.

    ``tail_bound`` bounds sum_{n>N} p_n and ``moment_tails[j-1]`` bounds
    sum_{n>N} n^j p_n for j = 1..MAX_MOMENT.  Infinite entries mean the
    corresponding tail is unknown.
    """

    probs: np.ndarray
    tail_bound: float = 0.0
    moment_tails: tuple = field(default=None)

    def __post_init__(self):
        p = np.array(self.probs, dtype=float).ravel()
        if p.size == 0:
            raise DimensionError("distribution needs at least the vacuum entry")
        if not np.all(np.isfinite(p)) or np.any(p < 0):
            raise DomainError("photon probabilities must be finite and nonnegative")
        tail = float(self.tail_bound)
        if tail < 0:
            raise DomainError("tail bound must be nonnegative")
        total = math.fsum(p)
        if total > 1 + NORMALIZATION_TOL or total + tail < 1 - NORMALIZATION_TOL:
            raise DomainError(f"probabilities sum to {total!r} with tail bound {tail!r}")
        moments = self.moment_tails
        if moments is None:
            moments = (0.0,) * MAX_MOMENT if tail == 0 else (math.inf,) * MAX_MOMENT
        moments = tuple(float(m) for m in moments)
        if len(moments) != MAX_MOMENT:
            raise DimensionError(f"need {MAX_MOMENT} moment tail bounds")
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)
        object.__setattr__(self, "tail_bound", tail)
        object.__setattr__(self, "moment_tails", moments)

    @property
    def n_max(self):
        return len(self.probs) - 1

    def moment_tail(self, j):
        return self.tail_bound if j == 0 else self.moment_tails[j - 1]

    def moment(self, j):
        n = np.arange(len(self.probs), dtype=float)
        return math.fsum(self.probs * n**j)

    @property
    def mean(self):
        return self.moment(1)

    @property
    def variance(self):
        m = self.mean
        return self.moment(2) - m * m

    def falling_moment(self, k):
        """<N (N-1) ... (N-k+1)>."""
        return math.fsum(self.probs * falling_factorial(np.arange(len(self.probs)), k))

    def rising_moment(self, k):
        """<(N+1)(N+2) ... (N+k)>."""
        return math.fsum(self.probs * falling_factorial(np.arange(len(self.probs)) + k, k))

    @classmethod
    def fock(cls, n):
        if n < 0 or int(n) != n:
            raise DomainError("Fock index must be a nonnegative integer")
        p = np.zeros(int(n) + 1)
        p[-1] = 1.0
        return cls(p)

    @classmethod
    def thermal(cls, ratio, n_max=None):
        """Geometric distribution (1 - r') r'^n."""
        ratio = float(ratio)
        if not 0 <= ratio < 1:
            raise DomainError("thermal ratio must lie in [0, 1)")
        if ratio == 0:
            return cls([1.0])
        logp = lambda n: math.log1p(-ratio) + n * math.log(ratio)  # noqa: E731
        return cls._truncated(logp, lambda n: ratio, n_max)

    @classmethod
    def poisson(cls, lam, n_max=None):
        lam = float(lam)
        if not lam > 0:
            raise DomainError("Poisson mean must be positive")
        logp = lambda n: -lam + n * math.log(lam) - gammaln(n + 1)  # noqa: E731
        # p_{n+1}/p_n = lam/(n+1) is decreasing, so its value at N+1 bounds the tail ratios
        return cls._truncated(logp, lambda n: lam / (n + 2), n_max)

    @classmethod
    def _truncated(cls, logp, ratio_after, n_max):
        """Truncate a distribution whose successive-term ratio beyond N is bounded."""

        def tails(N):
            first = math.exp(logp(N + 1))
            out = []
            for j in range(MAX_MOMENT + 1):
                rho = ((N + 2) / (N + 1)) ** j * ratio_after(N)
                out.append(math.inf if rho >= 1 else (N + 1) ** j * first / (1 - rho))
            return out

        if n_max is None:
            N = 8
            while max(tails(N)) > CONSTRUCTOR_TAIL_TOL:
                N *= 2
                if N > MAX_TRUNCATION:
                    raise CertificationError("cannot certify the truncation tail")
            lo, hi = N // 2, N
            while hi - lo > 1:
                mid = (lo + hi) // 2
                if max(tails(mid)) > CONSTRUCTOR_TAIL_TOL:
                    lo = mid
                else:
                    hi = mid
            N = hi
        else:
            N = int(n_max)
        t = tails(N)
        probs = np.exp([logp(n) for n in range(N + 1)])
        return cls(probs, t[0], tuple(t[1:]))

    @classmethod
    def mixture(cls, components, weights):
        """Convex combination; shorter components are zero-padded."""
        w = np.asarray(weights, dtype=float)
        if len(w) != len(components) or np.any(w < 0) or abs(math.fsum(w) - 1) > NORMALIZATION_TOL:
            raise DomainError("mixture weights must be nonnegative and sum to 1")
        size = max(len(c.probs) for c in components)
        probs = np.zeros(size)
        for wi, c in zip(w, components):
            probs[: len(c.probs)] += wi * c.probs
        tail = math.fsum(wi * c.tail_bound for wi, c in zip(w, components))
        moments = tuple(
            math.fsum(wi * c.moment_tails[j] for wi, c in zip(w, components))
            for j in range(MAX_MOMENT)
        )
        return cls(probs, tail, moments)


def falling_factorial(n, k):
    n = np.asarray(n, dtype=float)
    out = np.ones_like(n)
    for j in range(k):
        out = out * (n - j)
    return out


def as_photon(p):
    return p if isinstance(p, PhotonDistribution) else PhotonDistribution(p)


def _ratio(r, allow_one=True):
    r = float(r)
    upper_ok = r <= 1 if allow_one else r < 1
    if not (r >= 0 and upper_ok):
        raise DomainError(f"Boltzmann ratio must lie in [0, 1{']' if allow_one else ')'}, got {r}")
    return r


def mean_occupation(r):
    """Thermal mean photon number r / (1 - r)."""
    r = _ratio(r, allow_one=False)
    return r / (1.0 - r)


def ratio_from_temperature(wavelength, temperature):
    """exp(-h c / (lambda k T)) for a mode of vacuum wavelength ``wavelength``."""
    return np.exp(-constants.h * constants.c / (np.asarray(wavelength) * constants.k * temperature))


# -- coherence and illuminance ----------------------------------------------


def _coherence_allowance(p, r, k):
    m = p.moment_tail(k)
    return (4.0 + r**k * (1.0 + k) ** k) * m


def _certify(allowance, what, tol=SERIES_TAIL_TOL):
    if not allowance <= tol:
        raise CertificationError(f"{what}: truncation allowance {allowance:.3g} exceeds {tol:.3g}")


def generalized_coherence_k(p, r, k, certify=True):
    """sum_n f(p_n, r^k p_{n-k}) n (n-1)...(n-k+1)."""
    p = as_photon(p)
    r = _ratio(r)
    if k < 1 or int(k) != k or k > MAX_MOMENT:
        raise DomainError(f"order k must be an integer in 1..{MAX_MOMENT}")
    k = int(k)
    if certify:
        _certify(_coherence_allowance(p, r, k), "coherence series")
    q = np.concatenate([p.probs, np.zeros(k)])
    n = np.arange(k, len(q))
    rk = r**k
    return kernels.fisher_sum(
        np.ascontiguousarray(q[k:]), np.ascontiguousarray(rk * q[:-k]),
        np.ascontiguousarray(falling_factorial(n, k)),
    )


def latent_coherence(p, r, certify=True):
    """sum_{n>=1} f(p_n, r p_{n-1}) n; zero exactly for the thermal state at ratio r."""
    return generalized_coherence_k(p, r, 1, certify)


def coherence_allowance(p, r):
    """Certified bound on the truncation error of :func:`latent_coherence`."""
    return _coherence_allowance(as_photon(p), _ratio(r), 1)


def illuminance(p, r, certify=True):
    """4 sum_n r p_n p_{n-1} n / (p_n + r p_{n-1}); zero-denominator terms vanish."""
    p = as_photon(p)
    r = _ratio(r)
    if certify:
        _certify(4.0 * p.moment_tail(1), "illuminance series")
    q = np.concatenate([p.probs, [0.0]])
    a, b = q[1:], r * q[:-1]
    n = np.arange(1, len(q), dtype=float)
    s = a + b
    terms = np.zeros_like(s)
    np.divide(4.0 * a * b * n, s, out=terms, where=s > 0)
    return math.fsum(terms)


def illumination_qfi_zero_temperature(p):
    """r -> 0 limit 4(<N> + 1) of the illumination QFI, kept apart from I_0 = 0."""
    return 4.0 * (as_photon(p).mean + 1.0)


def tradeoff_allowance(p, r):
    p = as_photon(p)
    r = _ratio(r)
    return _coherence_allowance(p, r, 1) + 4.0 * p.moment_tail(1) + (1 + r) * p.moment_tail(1) + r * p.tail_bound


def tradeoff_check(p, r):
    """C_r + I_r - [(1 + r)<N> + r]: zero up to rounding and :func:`tradeoff_allowance`."""
    p = as_photon(p)
    r = _ratio(r)
    c = latent_coherence(p, r)
    i = illuminance(p, r)
    return (c + i) - ((1 + r) * p.mean + r)


def classical_witness_bound(mean_n, r):
    """Largest latent coherence of any mixture of coherent states: (1 - r)<N> + r."""
    r = _ratio(r)
    return (1 - r) * mean_n + r


def all_states_bound(mean_n, r):
    """Largest latent coherence of any state: (1 + r)<N> + r."""
    r = _ratio(r)
    return (1 + r) * mean_n + r


@dataclass(frozen=True)
class WitnessResult:
    coherence: float
    bound: float
    margin: float
    fired: bool


def witness(p, r, tol=1e-12):
    """Nonclassicality test: fires when C_r provably exceeds the classical bound.

    Truncation uncertainty is charged against firing: the coherence is
    lowered by its allowance and the mean raised by its tail.
    """
    p = as_photon(p)
    r = _ratio(r)
    c = latent_coherence(p, r)
    bound = classical_witness_bound(p.mean + p.moment_tail(1), r)
    margin = c - coherence_allowance(p, r) - bound
    return WitnessResult(c, bound, margin, bool(margin > tol))


def nonlinear_classical_bound(falling_k, rising_k, r, k):
    """Classical bound for order-k coherence from <N_(k)> and <(N+1)^(k)>."""
    r = _ratio(r)
    return falling_k + r**k * (rising_k - 2.0 * falling_k)


# -- Poisson closed form ----------------------------------------------------


def poisson_coherence(lam, r, tol=1e-10):
    """Latent coherence of a coherent state of mean ``lam`` by a one-dimensional integral.

    r(lam + 1) - 3 lam + 4 lam/r - (4 lam^2/r^2) int_0^1 u^{lam/r - 1} e^{lam(u-1)} du.
    ``tol`` is the absolute target on the result; the integral is driven to
    tol * r^2 / (4 lam^2) to absorb the prefactor.
    """
    lam = float(lam)
    if not lam > 0:
        raise DomainError("Poisson mean must be positive")
    r = _ratio(r)
    if r == 0:
        return lam
    a = lam / r
    itol = tol * r * r / (4 * lam * lam)
    if a < 1:
        # t = u^a removes the u^{a-1} endpoint singularity
        g = lambda t: math.exp(lam * (t ** (1.0 / a) - 1.0)) / a  # noqa: E731
    else:
        g = lambda u: u ** (a - 1.0) * math.exp(lam * (u - 1.0))  # noqa: E731
    integral = adaptive_integrate(g, 0.0, 1.0, itol)
    return r * (lam + 1) - 3 * lam + 4 * lam / r - 4 * a * a * integral


def poisson_coherence_asymptote(lam, r):
    """Large-lam form lam (1 - r)^2/(1 + r) + r [1 - 4/(1 + r)^3]."""
    r = _ratio(r)
    return lam * (1 - r) ** 2 / (1 + r) + r * (1 - 4 / (1 + r) ** 3)


def thermal_coherence(source_ratio, r):
    """Closed form (r' - r)^2 / ((r' + r)(1 - r')) for a thermal state of ratio r'."""
    rp = np.asarray(source_ratio, dtype=float)
    s = rp + r
    out = np.zeros(np.broadcast(rp, s).shape)
    np.divide((rp - r) ** 2, s * (1 - rp), out=out, where=s > 0)
    return out if out.ndim else float(out)


def fock_coherence(n, r):
    """(1 + r) n + r for n >= 1; r for the vacuum."""
    return (1 + r) * n + r


# -- measurement and classical coherence ------------------------------------


def sld_weights(p, r):
    """Reweighted ladder-operator elements w_n, n = 1..N+1.

    w_n = (p_n - r p_{n-1}) / (p_n + r p_{n-1}), zero where the denominator is.
    """
    p = as_photon(p)
    r = _ratio(r)
    q = np.concatenate([p.probs, [0.0]])
    a, b = q[1:], r * q[:-1]
    s = a + b
    out = np.zeros_like(s)
    np.divide(a - b, s, out=out, where=s > 0)
    return out


def two_mode_covariance(p, r):
    """Normalized number covariance of the two outputs of a balanced beam splitter.

    (<N^2> - <N> + 2 n_r^2) / (<N> + n_r)^2 - 1, fed by the state and a
    thermal mode at ratio r.
    """
    p = as_photon(p)
    nbar = mean_occupation(r)
    m = p.mean
    if m + nbar == 0:
        raise DomainError("covariance undefined when both inputs are vacuum")
    s = m + nbar
    # divide before squaring: s**2 underflows for tiny occupations
    return (p.moment(2) - m) / s / s + 2.0 * (nbar / s) ** 2 - 1.0


def covariance_at_matched_background(p):
    """Covariance with the background occupation set equal to <N>.

    Equals (Var - <N>(<N> + 1)) / (4 <N>^2): negative exactly for
    sub-thermal statistics.
    """
    p = as_photon(p)
    m = p.mean
    if m == 0:
        raise DomainError("vacuum has no matched background")
    return (p.moment(2) - m + 2 * m * m) / (4 * m * m) - 1.0


def is_subthermal(p):
    p = as_photon(p)
    return p.variance < p.mean * (p.mean + 1)


def q_parameter(p):
    """Mandel Q = (Var - <N>) / <N>."""
    p = as_photon(p)
    m = p.mean
    if m == 0:
        raise DomainError("Q parameter undefined for the vacuum")
    return (p.variance - m) / m


# -- QFI ---------------------------------------------------------------------


def optical_phase_qfi(p, r, hbar_omega=1.0):
    """Best interferometric QFI against the background: (hbar omega)^2 (n_r + 1) C_r."""
    nbar = mean_occupation(r)
    return hbar_omega**2 * ((nbar + 1) * latent_coherence(p, r))


def optical_interaction_qfi(p, r, h=None):
    """QFI of a bilinear coupling a^dag h a between the state (mode 0) and background modes.

    Only the couplings h[0, j], j >= 1 matter: the value is
    4 sum_j |h_0j|^2 (n_r + 1) C_r.  The default h is the balanced beam
    splitter with spread 1, which attains the maximum.
    """
    from athermal.spectral import as_hermitian, spread

    if h is None:
        h = np.array([[0.0, 0.5], [0.5, 0.0]])
    h = as_hermitian(h)
    if h.shape[0] < 2:
        raise DimensionError("coupling needs at least one background mode")
    if spread(h) > 1 + 1e-12:
        raise DomainError("coupling spread exceeds 1")
    v2 = math.fsum(np.abs(h[0, 1:]) ** 2)
    nbar = mean_occupation(r)
    return (4.0 * v2) * ((nbar + 1) * latent_coherence(p, r))


# -- thermal beam ------------------------------------------------------------


@dataclass(frozen=True)
class ScanResult:
    wavelengths: np.ndarray
    coherence: np.ndarray
    mean_n: np.ndarray
    best_wavelength: float
    best_coherence: float
    best_mean_n: float


def thermal_beam_scan(t_background, t_source, wavelength_grid, refine=True, rtol=1e-6):
    """Latent coherence of a hot thermal beam against a cooler background, per wavelength.

    The grid maximum (ties to the shorter wavelength) is refined by
    golden-section search on its neighbouring grid interval.
    """
    if not t_source >= t_background > 0:
        raise DomainError("need t_source >= t_background > 0")
    grid = np.asarray(wavelength_grid, dtype=float)
    if grid.size == 0:
        raise DimensionError("empty wavelength grid")
    if np.any(grid <= 0) or np.any(np.diff(grid) <= 0):
        raise DomainError("wavelengths must be positive and increasing")

    def coherence(wl):
        r = ratio_from_temperature(wl, t_background)
        rp = ratio_from_temperature(wl, t_source)
        return thermal_coherence(rp, r)

    def mean_n(wl):
        rp = ratio_from_temperature(wl, t_source)
        return rp / (1 - rp)

    values = np.atleast_1d(coherence(grid))
    i = int(np.argmax(values))  # first index wins ties: shorter wavelength
    best_wl, best_c = float(grid[i]), float(values[i])
    if refine and 0 < i < len(grid) - 1 and best_c > 0:
        a, c = grid[i - 1], grid[i + 1]
        # search in units of the grid peak so the tolerance is relative
        unit = grid[i]
        x = optimize.golden(lambda s: -float(coherence(s * unit)),
                            brack=(a / unit, 1.0, c / unit), tol=rtol)
        x_wl = float(x * unit)
        x_c = float(coherence(x_wl))
        if x_c >= best_c:
            best_wl, best_c = x_wl, x_c
    return ScanResult(grid, values, np.atleast_1d(mean_n(grid)), best_wl, best_c, float(mean_n(best_wl)))
