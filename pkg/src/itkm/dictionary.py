"""Dictionaries: construction, metrics, distances and perturbations.

A dictionary is a d x K matrix whose columns (atoms) have unit Euclidean
norm.  This module provides the standard generators (Dirac + half-DCT,
random), coherence / frame-bound / restricted-isometry metrics, the
asymmetric and symmetric (signed-permutation) distances, atom recovery
statistics and the per-atom perturbation decomposition used to relate a
learned dictionary to a reference one.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import maximum_bipartite_matching

NORM_TOL = 1e-12

__all__ = [
    "Dictionary",
    "DictionaryMetrics",
    "PerturbationDecomposition",
    "make_dirac_dct",
    "random_dictionary",
    "perturb_init",
    "compute_metrics",
    "restricted_isometry",
    "distance_asym",
    "distance_sym",
    "recovery_stats",
    "decompose",
]


@dataclass(frozen=True)
class Dictionary:
    """A d x K matrix of unit-norm atoms (atom k = column k)."""

    atoms: np.ndarray

    def __post_init__(self):
        A = np.asarray(self.atoms, dtype=np.float64)
        if A.ndim != 2 or A.shape[0] < 1 or A.shape[1] < 1:
            raise ValueError(f"atoms must be a non-empty 2-d array, got shape {A.shape}")
        if not np.all(np.isfinite(A)):
            raise ValueError("atoms contain non-finite entries")
        norms = np.linalg.norm(A, axis=0)
        if np.max(np.abs(norms - 1.0)) > NORM_TOL:
            worst = int(np.argmax(np.abs(norms - 1.0)))
            raise ValueError(
                f"atom {worst} has norm {norms[worst]!r}, deviates from 1 by more than {NORM_TOL}"
            )
        object.__setattr__(self, "atoms", A)

    @property
    def d(self) -> int:
        return self.atoms.shape[0]

    @property
    def K(self) -> int:
        return self.atoms.shape[1]


@dataclass(frozen=True)
class DictionaryMetrics:
    """Coherence and frame bounds of a dictionary."""

    coherence: float
    frame_lower: float
    frame_upper: float


@dataclass(frozen=True)
class PerturbationDecomposition:
    """Per-atom decomposition psi_k = alpha_k * phi_k + omega_k * z_k.

    ``eps`` is the per-atom error ||psi_k - phi_k||, ``alpha = 1 - eps^2/2``,
    ``omega = sqrt(eps^2 - eps^4/4)`` and ``z`` collects unit vectors
    orthogonal to the reference atoms.  ``b = (omega/alpha) * z`` is the
    rescaled perturbation direction.
    """

    eps: np.ndarray
    alpha: np.ndarray
    omega: np.ndarray
    z: np.ndarray  # d x K, column k orthogonal to reference atom k
    b: np.ndarray = field(repr=False, default=None)

    @property
    def max_eps(self) -> float:
        return float(np.max(self.eps))


def _unit_columns(A: np.ndarray) -> np.ndarray:
    return A / np.linalg.norm(A, axis=0)


def make_dirac_dct(d: int) -> Dictionary:
    """Dirac basis plus the first d/2 unit-normalized cosine atoms.

    Returns a d x (3d/2) dictionary.  Cosine atom k has entries
    cos(pi * n * k / d), n = 0..d-1, indexed from the lowest frequency
    (k = 0 is the constant atom) and normalized to unit norm.  With this
    sampling the n = 0 entry of every nonconstant atom equals sqrt(2/d)
    exactly, so the coherence is sqrt(2/d) for every even d.
    """
    if d % 2 != 0 or d < 4:
        raise ValueError(f"d must be even and >= 4, got {d}")
    n = np.arange(d)
    dct = np.cos(np.pi * n[:, None] * np.arange(d // 2)[None, :] / d)
    dct = _unit_columns(dct)
    return Dictionary(np.hstack([np.eye(d), dct]))


def random_dictionary(d: int, K: int, rng: np.random.Generator) -> Dictionary:
    """K atoms drawn i.i.d. uniformly from the unit sphere in R^d."""
    Z = rng.standard_normal((d, K))
    return Dictionary(_unit_columns(Z))


def perturb_init(
    D: Dictionary, alpha_to_omega: tuple[float, float], rng: np.random.Generator
) -> Dictionary:
    """Perturbed copy psi_k = a*phi_k + w*Q(phi_k)z_k/||Q(phi_k)z_k||.

    ``alpha_to_omega`` is the (a, w) ratio; it is rescaled so a^2+w^2=1.
    Every atom ends up at distance sqrt(2 - 2a) from its original.
    """
    a, w = alpha_to_omega
    if a <= 0 or w < 0:
        raise ValueError(f"ratio components must be positive (omega may be 0), got {a}:{w}")
    s = math.hypot(a, w)
    a, w = a / s, w / s
    Phi = D.atoms
    if w == 0.0:
        return Dictionary(Phi.copy())
    out = np.empty_like(Phi)
    for k in range(D.K):
        while True:
            z = rng.standard_normal(D.d)
            q = z - np.dot(Phi[:, k], z) * Phi[:, k]
            nq = np.linalg.norm(q)
            if nq >= 1e-12:
                break
        out[:, k] = a * Phi[:, k] + w * q / nq
    return Dictionary(_unit_columns(out))


def compute_metrics(D: Dictionary) -> DictionaryMetrics:
    """Coherence plus frame bounds (extreme eigenvalues of Phi Phi*)."""
    G = D.atoms.T @ D.atoms
    off = np.abs(G - np.diag(np.diag(G)))
    coherence = float(np.clip(off.max(), 0.0, 1.0))
    # eigenvalues of the K x K Gram equal those of the d x d frame operator
    # padded with zeros; use the frame operator directly.
    w = np.linalg.eigvalsh(D.atoms @ D.atoms.T)
    return DictionaryMetrics(coherence, float(max(w[0], 0.0)), float(w[-1]))


def restricted_isometry(D: Dictionary, S: int, max_supports: int = 2_000_000) -> float:
    """Isometry constant delta_S by exhaustive support enumeration.

    Intended for small instances only; refuses when C(K, S) exceeds
    ``max_supports``.
    """
    if not 1 <= S <= D.K:
        raise ValueError(f"S must be in [1, K], got {S}")
    count = math.comb(D.K, S)
    if count > max_supports:
        raise ValueError(
            f"C({D.K},{S}) = {count} supports exceeds cap {max_supports}; "
            "restricted_isometry is exhaustive and only meant for small instances"
        )
    delta = 0.0
    A = D.atoms
    for I in itertools.combinations(range(D.K), S):
        w = np.linalg.eigvalsh(A[:, I].T @ A[:, I])
        delta = max(delta, abs(w[0] - 1.0), abs(w[-1] - 1.0))
    return delta


def _pairwise_distances(D: Dictionary, P: Dictionary) -> np.ndarray:
    """dist[k, l] = min over signs of ||phi_k +- psi_l||, via sqrt(2-2|ip|)."""
    ip = np.clip(np.abs(D.atoms.T @ P.atoms), 0.0, 1.0)
    return np.sqrt(2.0 - 2.0 * ip)


def _check_shapes(D: Dictionary, P: Dictionary):
    if D.atoms.shape != P.atoms.shape:
        raise ValueError(f"dictionary shapes differ: {D.atoms.shape} vs {P.atoms.shape}")


def distance_asym(D: Dictionary, P: Dictionary) -> float:
    """Asymmetric distance max_k min_l ||phi_k +- psi_l||.

    Not symmetric in its arguments: the max runs over the atoms of the
    first dictionary.
    """
    _check_shapes(D, P)
    return float(np.max(np.min(_pairwise_distances(D, P), axis=1)))


def distance_sym(D: Dictionary, P: Dictionary) -> tuple[float, np.ndarray, np.ndarray]:
    """Symmetric distance min_perm max_k ||phi_k +- psi_perm(k)||.

    Solves the bottleneck assignment exactly: binary search over the sorted
    pairwise distances with feasibility checked by maximum bipartite
    matching.  Returns (distance, permutation, signs) with
    signs[k] = sign(<phi_k, psi_perm(k)>) and sign(0) := +1.
    """
    _check_shapes(D, P)
    dist = _pairwise_distances(D, P)
    K = D.K
    levels = np.unique(dist)

    def matching_at(thr: float) -> np.ndarray | None:
        graph = sp.csr_matrix(dist <= thr)
        match = maximum_bipartite_matching(graph, perm_type="column")
        return match if np.all(match >= 0) else None

    lo, hi = 0, len(levels) - 1
    if matching_at(levels[hi]) is None:  # full matrix is always feasible
        raise RuntimeError("no perfect matching on the complete graph (unreachable)")
    while lo < hi:
        mid = (lo + hi) // 2
        if matching_at(levels[mid]) is not None:
            hi = mid
        else:
            lo = mid + 1
    perm = matching_at(levels[lo])
    value = float(np.max(dist[np.arange(K), perm]))
    ip = D.atoms[:, :].T @ P.atoms[:, perm]
    signs = np.where(np.diag(ip) < 0, -1.0, 1.0)
    return value, perm, signs


def recovery_stats(
    learned: Dictionary, generating: Dictionary, threshold: float = 0.99
) -> tuple[float, np.ndarray]:
    """Fraction of generating atoms with max_l |<psi_l, phi_k>| >= threshold.

    Several generating atoms may be claimed by the same learned atom; the
    criterion imposes no injectivity.
    """
    _check_shapes(learned, generating)
    if not 0 < threshold <= 1:
        raise ValueError(f"threshold must be in (0, 1], got {threshold}")
    best = np.max(np.abs(learned.atoms.T @ generating.atoms), axis=0)
    flags = best >= threshold
    return float(np.mean(flags)), flags


def _any_orthogonal_unit(v: np.ndarray) -> np.ndarray:
    """A fixed unit vector orthogonal to v (deterministic)."""
    e = np.zeros_like(v)
    e[int(np.argmin(np.abs(v)))] = 1.0
    q = e - np.dot(v, e) * v
    return q / np.linalg.norm(q)


def decompose(P: Dictionary, D: Dictionary) -> PerturbationDecomposition:
    """Per-atom perturbation decomposition of P relative to reference D.

    P must be pre-aligned to D (same atom order, <phi_k, psi_k> >= 0);
    use distance_sym's permutation and signs to align first.
    """
    _check_shapes(P, D)
    Phi, Psi = D.atoms, P.atoms
    eps = np.linalg.norm(Psi - Phi, axis=0)
    if np.any(eps >= math.sqrt(2.0)):
        worst = int(np.argmax(eps))
        raise ValueError(
            f"atom {worst} has eps = {eps[worst]:.6f} >= sqrt(2); decomposition out of range "
            "(alpha would be non-positive; align P to D first)"
        )
    alpha = 1.0 - eps**2 / 2.0
    omega = np.sqrt(np.maximum(eps**2 - eps**4 / 4.0, 0.0))
    Z = np.empty_like(Phi)
    proj = np.sum(Phi * Psi, axis=0)
    for k in range(D.K):
        residual = Psi[:, k] - proj[k] * Phi[:, k]
        if omega[k] > 1e-12:
            Z[:, k] = residual / np.linalg.norm(residual)
        else:
            Z[:, k] = _any_orthogonal_unit(Phi[:, k])
    b = (omega / alpha) * Z
    return PerturbationDecomposition(eps=eps, alpha=alpha, omega=omega, z=Z, b=b)
