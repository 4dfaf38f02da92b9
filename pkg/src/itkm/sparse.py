"""Thresholding, subdictionary projections and failure diagnostics."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .dictionary import Dictionary
from .model import SignalBatch

EIG_CUTOFF = 1e-10

__all__ = [
    "Support",
    "ProjectionWorkspace",
    "threshold",
    "project",
    "oracle_residual_s",
    "count_failures",
]


@dataclass(frozen=True)
class Support:
    """S atom indices selected by thresholding, with their |<psi_k, y>| scores.

    ``indices`` is sorted ascending; ``scores`` holds the selection scores
    in non-increasing selection order.
    """

    indices: np.ndarray
    scores: np.ndarray


@dataclass
class ProjectionWorkspace:
    """Reusable state for repeated projections with one dictionary.

    strategy 'gram-precompute' solves the normal equations with a cached
    Gram matrix (cheap, O(S^3) per signal); 'factor-per-signal' runs a QR
    factorization of the subdictionary itself (more stable).  Conditioning
    failures of the Gram route fall back to an eigen-decomposition with
    relative eigenvalue cutoff 1e-10 (pseudo-inverse semantics) and are
    counted in ``fallback_count``.
    """

    strategy: str = "gram-precompute"
    fallback_count: int = 0
    _gram: np.ndarray | None = field(default=None, repr=False)
    _gram_key: int | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.strategy not in ("gram-precompute", "factor-per-signal"):
            raise ValueError(f"unknown strategy {self.strategy!r}")

    def gram(self, P: Dictionary) -> np.ndarray:
        if self._gram_key != id(P):
            self._gram = P.atoms.T @ P.atoms
            self._gram_key = id(P)
        return self._gram


def threshold(P: Dictionary, y: np.ndarray, S: int) -> Support:
    """Indices of the S largest |<psi_k, y>| (ties broken by lower index).

    Equivalent to the argmax of ||Psi_I* y||_1 over supports |I| = S since
    the l1 criterion is separable.
    """
    if not 1 <= S <= P.K:
        raise ValueError(f"need 1 <= S <= K, got S={S}")
    scores = np.abs(P.atoms.T @ y)
    # stable sort on (-score, index) implements the lowest-index tie break
    order = np.argsort(-scores, kind="stable")[:S]
    return Support(indices=np.sort(order), scores=scores[order])


def _solve_gram(G_sub: np.ndarray, rhs: np.ndarray, ws: ProjectionWorkspace) -> np.ndarray:
    try:
        c, low = scipy.linalg.cho_factor(G_sub, check_finite=False)
        pivots = np.diag(c) ** 2
        if np.min(pivots) < EIG_CUTOFF * np.max(np.diag(G_sub)):
            raise np.linalg.LinAlgError("near-singular Gram submatrix")
        return scipy.linalg.cho_solve((c, low), rhs, check_finite=False)
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError):
        ws.fallback_count += 1
        w, V = np.linalg.eigh(G_sub)
        keep = w > EIG_CUTOFF * max(w[-1], 0.0)
        inv = np.zeros_like(w)
        inv[keep] = 1.0 / w[keep]
        return V @ (inv * (V.T @ rhs))


def project(
    P: Dictionary, I: Support | np.ndarray, y: np.ndarray, ws: ProjectionWorkspace | None = None
) -> tuple[np.ndarray, np.ndarray]:
    """Orthogonal projection of y onto span(Psi_I); returns (Py, y - Py)."""
    if ws is None:
        ws = ProjectionWorkspace()
    idx = I.indices if isinstance(I, Support) else np.asarray(I)
    A = P.atoms[:, idx]
    if ws.strategy == "factor-per-signal":
        Q, _ = np.linalg.qr(A)
        Py = Q @ (Q.T @ y)
    else:
        G_sub = ws.gram(P)[np.ix_(idx, idx)]
        x = _solve_gram(G_sub, A.T @ y, ws)
        Py = A @ x
    return Py, y - Py


def oracle_residual_s(
    P: Dictionary,
    y: np.ndarray,
    k: int,
    oracle_support: np.ndarray,
    oracle_sign: np.ndarray,
    ws: ProjectionWorkspace | None = None,
) -> np.ndarray:
    """Oracle residual summand [y - P(Psi_I)y + P(psi_k)y] * sigma(k) * chi(I, k).

    ``oracle_sign`` holds the +-1 signs aligned with ``oracle_support``.
    Returns the zero vector when k is not in the oracle support.
    """
    pos = np.nonzero(oracle_support == k)[0]
    if pos.size == 0:
        return np.zeros_like(y)
    Py, residual = project(P, np.asarray(oracle_support), y, ws)
    atom = P.atoms[:, k]
    return (residual + np.dot(atom, y) * atom) * float(oracle_sign[pos[0]])


def count_failures(P: Dictionary, batch: SignalBatch, S: int) -> tuple[int, int]:
    """Empirical thresholding diagnostics against the oracle data.

    Returns (support_mismatches, sign_mismatches): the number of signals
    whose threshold support differs from the generating support, and the
    number whose sign(<psi_k, y>) differs from sigma(k) for some generating
    atom k.
    """
    C = P.atoms.T @ batch.signals  # K x N
    sel = threshold_batch(C, S)  # N x S, sorted
    oracle = np.sort(batch.supports, axis=1)
    support_mismatches = int(np.sum(np.any(sel != oracle, axis=1)))
    got = np.take_along_axis(C.T, batch.supports, axis=1)
    got_signs = np.where(got < 0, -1.0, 1.0)
    sign_mismatches = int(np.sum(np.any(got_signs != batch.signs, axis=1)))
    return support_mismatches, sign_mismatches


def threshold_batch(correlations: np.ndarray, S: int) -> np.ndarray:
    """Vectorized thresholding: top-S rows of |correlations| per column.

    ``correlations`` is K x N (atom-signal inner products); returns an
    N x S index array, sorted ascending per signal, with the same
    lowest-index tie break as :func:`threshold`.
    """
    A = np.abs(correlations.T)  # N x K
    if S == A.shape[1]:
        return np.tile(np.arange(S), (A.shape[0], 1))
    part = np.argpartition(-A, S - 1, axis=1)[:, :S]
    # argpartition is not tie-aware; re-rank the selected block plus the
    # boundary competitors only when exact ties occur at the cutoff
    vals = np.take_along_axis(A, part, axis=1)
    cut = np.min(vals, axis=1)
    boundary = np.sum(A >= cut[:, None], axis=1) > S
    out = np.sort(part, axis=1)
    if np.any(boundary):
        for n in np.nonzero(boundary)[0]:
            order = np.argsort(-A[n], kind="stable")[:S]
            out[n] = np.sort(order)
    return out


def project_batch(
    P: Dictionary, supports: np.ndarray, Y: np.ndarray, gram: np.ndarray | None = None
) -> tuple[np.ndarray, np.ndarray, int]:
    """Batched projections P(Psi_I_n) y_n for an N x S support array.

    Returns (coefficients (N, S), projections (N, d), fallback_count).
    Signals whose Gram submatrix is ill-conditioned are redone with the
    eigen-decomposition route (cutoff 1e-10).
    """
    if gram is None:
        gram = P.atoms.T @ P.atoms
    G = gram[supports[:, :, None], supports[:, None, :]]  # N,S,S
    C = np.take_along_axis((P.atoms.T @ Y).T, supports, axis=1)  # N,S
    fallbacks = 0
    try:
        x = np.linalg.solve(G, C[..., None])[..., 0]
    except np.linalg.LinAlgError:
        x = np.full_like(C, np.nan)
    resid = np.abs(np.einsum("nij,nj->ni", G, x) - C)
    bad = ~np.all(np.isfinite(x), axis=1) | (
        np.max(resid, axis=1) > 1e-8 * np.maximum(np.max(np.abs(C), axis=1), 1e-300)
    )
    if np.any(bad):
        ws = ProjectionWorkspace()
        for n in np.nonzero(bad)[0]:
            G_sub = gram[np.ix_(supports[n], supports[n])]
            x[n] = _solve_gram(G_sub, C[n], ws)
        fallbacks = int(np.sum(bad))
    atoms = P.atoms.T[supports]  # N,S,d
    Py = np.einsum("nsd,ns->nd", atoms, x)
    return x, Py, fallbacks
