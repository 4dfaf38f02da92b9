"""ITKsM / ITKrM iterations and the multi-iteration learner loop.

One iteration thresholds every signal with the current dictionary and
averages, per atom, either the signed signals (ITKsM) or the signed
residuals y - P(Psi_I)y + P(psi_k)y (ITKrM), then renormalizes.  The
learner loop draws a fresh batch per iteration (theorem regime) or reuses
one batch, tracks per-iteration metrics against the generating dictionary
when it is known, and handles zero-norm accumulator columns via a
replacement policy.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .dictionary import Dictionary, distance_asym, recovery_stats
from .model import CoefficientSpec, SignalBatch, draw_batch
from .sparse import count_failures, project_batch, threshold_batch

ZERO_NORM_TOL = 1e-12

__all__ = [
    "LearnerConfig",
    "IterationMetrics",
    "SyntheticGenerator",
    "DatasetSampler",
    "itksm_iteration",
    "itkrm_iteration",
    "replace_degenerate",
    "learn",
]


@dataclass(frozen=True)
class LearnerConfig:
    algorithm: str  # 'ITKsM' | 'ITKrM'
    S: int
    iterations: int
    signals_per_iteration: int
    fresh_batch: bool = True
    replacement_policy: str = "random-redraw"  # | 'keep-previous'
    seed: int = 0
    early_stop_threshold: float | None = None  # improvement d(new, old) <= theta

    def __post_init__(self):
        if self.algorithm not in ("ITKsM", "ITKrM"):
            raise ValueError(f"algorithm must be 'ITKsM' or 'ITKrM', got {self.algorithm!r}")
        if self.replacement_policy not in ("random-redraw", "keep-previous"):
            raise ValueError(f"unknown replacement policy {self.replacement_policy!r}")
        if self.signals_per_iteration < 1:
            raise ValueError("signals_per_iteration must be >= 1")
        if self.iterations < 0:
            raise ValueError("iterations must be >= 0")
        if self.S < 1:
            raise ValueError("S must be >= 1")


@dataclass
class IterationMetrics:
    iteration: int
    d_asym: float = float("nan")  # d(learned, generating), when known
    recovery_rate: float = float("nan")
    support_mismatches: int = -1  # -1 when no oracle data available
    sign_mismatches: int = -1
    zero_norm_replacements: int = 0
    projection_fallbacks: int = 0
    wall_time_seconds: float = 0.0


class SyntheticGenerator:
    """Fresh-batch source backed by the generating dictionary (oracle known)."""

    def __init__(self, dictionary: Dictionary, spec: CoefficientSpec, noise_sigma: float):
        self.dictionary = dictionary
        self.spec = spec
        self.noise_sigma = noise_sigma

    def sample(self, N: int, rng: np.random.Generator) -> SignalBatch:
        return draw_batch(self.dictionary, self.spec, self.noise_sigma, N, rng)


class DatasetSampler:
    """Batch source backed by a fixed d x M signal matrix.

    With ``replace=True`` (default) batches are sampled with replacement,
    modelling repeated passes over a finite corpus.  With ``replace=False``
    the corpus is consumed and an explicit error is raised once exhausted.
    """

    dictionary = None  # no oracle

    def __init__(self, data: np.ndarray, replace: bool = True):
        self.data = np.asarray(data, dtype=np.float64)
        if self.data.ndim != 2:
            raise ValueError("dataset must be a d x M matrix")
        self.replace = replace
        self._consumed = 0

    def sample(self, N: int, rng: np.random.Generator) -> SignalBatch:
        M = self.data.shape[1]
        if self.replace:
            idx = rng.integers(0, M, size=N)
        else:
            if self._consumed + N > M:
                raise RuntimeError(
                    f"dataset exhausted: {M - self._consumed} signals left, {N} requested "
                    "(use replace=True to resample)"
                )
            idx = np.arange(self._consumed, self._consumed + N)
            self._consumed += N
        return SignalBatch(self.data[:, idx], None, None, None, 0.0, None)


def replace_degenerate(
    accumulator: np.ndarray,
    policy: str,
    rng: np.random.Generator,
    previous_atom: np.ndarray | None = None,
) -> np.ndarray:
    """Replacement atom for a zero-norm accumulator column."""
    if np.linalg.norm(accumulator) >= ZERO_NORM_TOL:
        return accumulator / np.linalg.norm(accumulator)
    if policy == "keep-previous":
        if previous_atom is None:
            raise ValueError("keep-previous policy needs the previous atom")
        return previous_atom.copy()
    z = rng.standard_normal(accumulator.shape[0])
    return z / np.linalg.norm(z)


def _normalize_with_replacement(
    acc: np.ndarray,
    previous: np.ndarray,
    policy: str,
    rng: np.random.Generator | None,
) -> tuple[np.ndarray, int]:
    norms = np.linalg.norm(acc, axis=0)
    degenerate = np.nonzero(norms < ZERO_NORM_TOL)[0]
    out = acc / np.where(norms < ZERO_NORM_TOL, 1.0, norms)
    for k in degenerate:
        if policy == "keep-previous":
            out[:, k] = previous[:, k]
        else:
            if rng is None:
                rng = np.random.default_rng(0)
            out[:, k] = replace_degenerate(acc[:, k], policy, rng)
    return out, int(degenerate.size)


def itksm_iteration(
    P: Dictionary,
    batch: SignalBatch,
    S: int,
    replacement_policy: str = "random-redraw",
    rng: np.random.Generator | None = None,
) -> tuple[Dictionary, IterationMetrics]:
    """One ITKsM iteration: per-atom average of signed signals, renormalized."""
    t0 = time.perf_counter()
    if batch.N == 0:
        raise ValueError("batch must be nonempty")
    Y = batch.signals
    N = batch.N
    C = P.atoms.T @ Y  # K x N
    supports = threshold_batch(C, S)  # N x S
    signs = np.where(np.take_along_axis(C.T, supports, axis=1) < 0, -1.0, 1.0)
    W = np.zeros((P.K, N))
    np.put_along_axis(W.T, supports, signs, axis=1)
    acc = (Y @ W.T) / N
    out, replaced = _normalize_with_replacement(acc, P.atoms, replacement_policy, rng)
    metrics = IterationMetrics(
        iteration=-1,
        zero_norm_replacements=replaced,
        wall_time_seconds=time.perf_counter() - t0,
    )
    return Dictionary(out), metrics


def itkrm_iteration(
    P: Dictionary,
    batch: SignalBatch,
    S: int,
    replacement_policy: str = "random-redraw",
    rng: np.random.Generator | None = None,
    gram: np.ndarray | None = None,
) -> tuple[Dictionary, IterationMetrics]:
    """One ITKrM iteration: per-atom average of signed residuals, renormalized.

    The per-signal residual y - P(Psi_I)y is computed once per signal; the
    rank-one part P(psi_k)y = <psi_k, y> psi_k is added per selected atom.
    """
    t0 = time.perf_counter()
    if batch.N == 0:
        raise ValueError("batch must be nonempty")
    Y = batch.signals
    N = batch.N
    C = P.atoms.T @ Y
    supports = threshold_batch(C, S)
    coh = np.take_along_axis(C.T, supports, axis=1)  # N x S, <psi_k, y_n>
    signs = np.where(coh < 0, -1.0, 1.0)
    _, Py, fallbacks = project_batch(P, supports, Y, gram=gram)
    R = Y.T - Py  # N x d
    atoms = P.atoms.T[supports]  # N,S,d
    contrib = (R[:, None, :] + coh[:, :, None] * atoms) * signs[:, :, None]
    acc = np.zeros((P.K, P.d))
    np.add.at(acc, supports.ravel(), contrib.reshape(-1, P.d))
    acc = acc.T / N
    out, replaced = _normalize_with_replacement(acc, P.atoms, replacement_policy, rng)
    metrics = IterationMetrics(
        iteration=-1,
        zero_norm_replacements=replaced,
        projection_fallbacks=fallbacks,
        wall_time_seconds=time.perf_counter() - t0,
    )
    return Dictionary(out), metrics


def learn(
    D_init: Dictionary,
    config: LearnerConfig,
    source,
    rng: np.random.Generator | None = None,
) -> tuple[Dictionary, list[IterationMetrics]]:
    """Run ``config.iterations`` iterations of the configured algorithm.

    ``source`` must expose ``sample(N, rng) -> SignalBatch`` and may expose
    a ``dictionary`` attribute (the generating dictionary) to enable
    distance / recovery / failure metrics.  With ``fresh_batch=False`` one
    batch is drawn up front and reused every iteration.
    """
    if rng is None:
        rng = np.random.default_rng(config.seed)
    step = itksm_iteration if config.algorithm == "ITKsM" else itkrm_iteration
    generating = getattr(source, "dictionary", None)
    P = D_init
    history: list[IterationMetrics] = []
    batch = None
    if not config.fresh_batch:
        batch = source.sample(config.signals_per_iteration, rng)
    for it in range(config.iterations):
        if config.fresh_batch:
            batch = source.sample(config.signals_per_iteration, rng)
        if batch.supports is not None:
            sm, gm = count_failures(P, batch, config.S)
        else:
            sm, gm = -1, -1
        P_new, m = step(P, batch, config.S, config.replacement_policy, rng)
        m.iteration = it
        m.support_mismatches = sm
        m.sign_mismatches = gm
        if generating is not None:
            m.d_asym = distance_asym(P_new, generating)
            m.recovery_rate = recovery_stats(P_new, generating)[0]
        history.append(m)
        improvement = distance_asym(P_new, P)
        P = P_new
        if config.early_stop_threshold is not None and improvement <= config.early_stop_threshold:
            break
    return P, history
