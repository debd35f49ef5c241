"""Fisher difference, spectral QFI, and the fixed-spectrum maximal QFI.

Everything else in the package is built on these routines.  States are
diagonal in a known basis; generators are dense Hermitian matrices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from athermal import kernels
from athermal.errors import DimensionError, DomainError

STRUCTURAL_TOL = 1e-10
NORMALIZATION_TOL = 1e-12
MAX_DIM = 4096


def _readonly(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


class EnergySpectrum:
    """Nondecreasing energy levels, shifted so the ground level sits at zero.

    The applied offset is kept in :attr:`shift` (original = energies + shift).
    Pass ``shift_to_zero=False`` to keep the levels exactly as given.
    """

    __slots__ = ("energies", "shift")

    def __init__(self, energies, shift_to_zero=True):
        e = np.array(energies, dtype=float).ravel()
        if e.size == 0:
            raise DimensionError("energy spectrum needs at least one level")
        if not np.all(np.isfinite(e)):
            raise DomainError("energies must be finite")
        if np.any(np.diff(e) < 0):
            raise DomainError("energies must be nondecreasing")
        shift = float(e[0]) if shift_to_zero else 0.0
        object.__setattr__(self, "energies", _readonly(e - shift))
        object.__setattr__(self, "shift", shift)

    def __setattr__(self, name, value):
        raise AttributeError("EnergySpectrum is immutable")

    def __len__(self):
        return len(self.energies)

    def __repr__(self):
        return f"EnergySpectrum({self.energies.tolist()}, shift={self.shift})"

    @property
    def dim(self):
        return len(self.energies)

    def boltzmann_factors(self, beta):
        return np.exp(-beta * self.energies)

    def partition_function(self, beta):
        return math.fsum(self.boltzmann_factors(beta))

    def gibbs(self, beta):
        """The thermal state at inverse temperature ``beta``."""
        w = self.boltzmann_factors(beta)
        return DiagonalState(w / math.fsum(w))


class DiagonalState:
    """Probability vector over the levels of a paired spectrum."""

    __slots__ = ("probs",)

    def __init__(self, probs):
        p = np.array(probs, dtype=float).ravel()
        if p.size == 0:
            raise DimensionError("state needs at least one level")
        if not np.all(np.isfinite(p)) or np.any(p < 0):
            raise DomainError("probabilities must be finite and nonnegative")
        if abs(math.fsum(p) - 1.0) > NORMALIZATION_TOL:
            raise DomainError(f"probabilities sum to {math.fsum(p)!r}, not 1")
        object.__setattr__(self, "probs", _readonly(p))

    def __setattr__(self, name, value):
        raise AttributeError("DiagonalState is immutable")

    def __len__(self):
        return len(self.probs)

    def __repr__(self):
        return f"DiagonalState({self.probs.tolist()})"


def as_spectrum(spec):
    return spec if isinstance(spec, EnergySpectrum) else EnergySpectrum(spec)


def as_state(state, dim=None):
    st = state if isinstance(state, DiagonalState) else DiagonalState(state)
    if dim is not None and len(st) != dim:
        raise DimensionError(f"state has {len(st)} levels, spectrum has {dim}")
    return st


def as_hermitian(H, tol=NORMALIZATION_TOL):
    """Validate ``H`` as a dense Hermitian matrix and return it as an array."""
    H = np.asarray(H)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {H.shape}")
    if H.shape[0] > MAX_DIM:
        raise DimensionError(f"dimension {H.shape[0]} exceeds cap {MAX_DIM}")
    if H.size and np.max(np.abs(H - H.conj().T)) > tol * max(1.0, np.max(np.abs(H))):
        raise DomainError("operator is not Hermitian")
    return H


@dataclass(frozen=True)
class SpectralPair:
    """Eigenvalues of a state (any order) and of a generator."""

    probs: DiagonalState
    hvals: np.ndarray

    def __post_init__(self):
        probs = as_state(self.probs)
        hvals = _readonly(np.asarray(self.hvals, dtype=float).ravel())
        if len(probs) != len(hvals):
            raise DimensionError("probability and eigenvalue lists differ in length")
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "hvals", hvals)


def fisher_difference(a, b):
    """(a - b)^2 / (a + b) for nonnegative a, b; zero at a = b = 0."""
    if not (a >= 0 and b >= 0):
        raise DomainError(f"Fisher difference needs nonnegative arguments, got {a}, {b}")
    s = a + b
    if s == 0:
        return 0.0
    return (a - b) ** 2 / s


def qfi_explicit(rho_eigs, rho_vecs, H):
    """QFI of the state sum_i p_i |psi_i><psi_i| under the generator ``H``.

    ``rho_vecs`` holds the eigenvectors |psi_i> as columns.  Pairs with
    p_i = p_j = 0 drop out.
    """
    p = as_state(rho_eigs).probs
    V = np.asarray(rho_vecs, dtype=complex)
    H = as_hermitian(H)
    d = len(p)
    if V.shape != (d, d) or H.shape != (d, d):
        raise DimensionError(f"shapes {V.shape}, {H.shape} do not match {d} eigenvalues")
    if np.max(np.abs(V.conj().T @ V - np.eye(d))) > STRUCTURAL_TOL:
        raise DomainError("eigenvector matrix is not unitary")
    M = V.conj().T @ H @ V
    F = kernels.fisher_difference_array(p[:, None], p[None, :])
    return 2.0 * math.fsum((F * np.abs(M) ** 2).ravel())


def _order_desc(p):
    # stable: ties keep ascending original index
    return np.argsort(-np.asarray(p), kind="stable")


def max_qfi_for_spectrum(sp):
    """Largest QFI over all unitary rotations of the state.

    Highest probabilities are paired with the lowest ones and with the most
    widely separated eigenvalues:
    (1/2) sum_i f(p_dn[i], p_up[i]) (h_dn[i] - h_up[i])^2.
    """
    p_dn = np.asarray(sp.probs.probs)[_order_desc(sp.probs.probs)]
    h_up = np.sort(sp.hvals, kind="stable")
    terms = kernels.fisher_difference_array(p_dn, p_dn[::-1]) * (h_up[::-1] - h_up) ** 2
    return 0.5 * math.fsum(terms)


def optimal_unitary_for_spectrum(sp):
    """A unitary attaining :func:`max_qfi_for_spectrum`.

    Column ``k`` is the image of the k-th eigenvector of the state (in the
    order of ``sp.probs``), written in the eigenbasis of the generator (in the
    order of ``sp.hvals``).  Ranked by decreasing probability, the i-th
    eigenvector goes to (|e_i> + |e_j>)/sqrt2 for i < j = d-1-i, to |e_i| at
    the midpoint, and to (|e_j> - |e_i>)/sqrt2 otherwise, with |e_i> ranked by
    increasing eigenvalue.
    """
    d = len(sp.hvals)
    by_prob = _order_desc(sp.probs.probs)
    by_h = np.argsort(sp.hvals, kind="stable")
    s = 1.0 / math.sqrt(2.0)
    W = np.zeros((d, d), dtype=complex)
    for i in range(d):
        col, j = by_prob[i], d - 1 - i
        if 2 * i < d - 1:
            W[by_h[i], col] = s
            W[by_h[j], col] = s
        elif 2 * i == d - 1:
            W[by_h[i], col] = 1.0
        else:
            W[by_h[j], col] = s
            W[by_h[i], col] = -s
    return W


def spread(H):
    """Largest minus smallest eigenvalue of a Hermitian operator."""
    ev = np.linalg.eigvalsh(as_hermitian(H))
    return float(ev[-1] - ev[0])
