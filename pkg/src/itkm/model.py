"""Synthetic signal generation: sign-and-permutation invariant sparse model.

Signals are y = (Phi x + r) / sqrt(1 + ||r||^2) where x places a
non-increasing unit-norm coefficient sequence c on a uniformly random
support with i.i.d. +-1 signs, and r is Gaussian noise with i.i.d. entries
of standard deviation rho.  The flat and geometric-decay instances of c
are implemented, together with the gap / expectation statistics of the
coefficient distribution.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dictionary import Dictionary

__all__ = [
    "CoefficientSpec",
    "GapStatistics",
    "SignalBatch",
    "draw_signal",
    "draw_batch",
    "statistics",
]


@dataclass(frozen=True)
class CoefficientSpec:
    """Coefficient distribution: 'flat' (c_k = 1/sqrt(S)) or 'geometric'.

    Geometric draws a per-signal decay factor c_b uniformly in
    [decay_low, decay_high] and sets c_k = b0 * c_b^k for k <= S with b0
    normalizing ||c||_2 = 1.
    """

    kind: str
    S: int
    K: int
    decay_low: float = 0.9
    decay_high: float = 1.0

    def __post_init__(self):
        if self.kind not in ("flat", "geometric"):
            raise ValueError(f"kind must be 'flat' or 'geometric', got {self.kind!r}")
        if not 1 <= self.S <= self.K:
            raise ValueError(f"need 1 <= S <= K, got S={self.S}, K={self.K}")
        if self.kind == "geometric" and not 0 < self.decay_low <= self.decay_high <= 1:
            raise ValueError("need 0 < decay_low <= decay_high <= 1")

    def draw_sequences(self, n: int, rng: np.random.Generator) -> np.ndarray:
        """n unit-norm non-increasing coefficient sequences, shape (n, S)."""
        S = self.S
        if self.kind == "flat":
            return np.full((n, S), 1.0 / np.sqrt(S))
        cb = rng.uniform(self.decay_low, self.decay_high, size=n)
        c = cb[:, None] ** np.arange(1, S + 1)[None, :]
        return c / np.linalg.norm(c, axis=1, keepdims=True)


@dataclass(frozen=True)
class GapStatistics:
    """Gap and expectation statistics of an S-sparse coefficient model."""

    beta_S: float
    delta_S_rel: float
    gamma1_S: float
    gamma2_S: float
    C_r: float
    mc_samples: int = 0  # 0 means every value is closed-form


@dataclass(frozen=True)
class SignalBatch:
    """N generated signals with their oracle supports, signs and sequences.

    ``supports`` and ``signs`` are (N, S) arrays; supports hold the atom
    indices in coefficient-rank order (largest coefficient first), signs
    the matching +-1 draws.
    """

    signals: np.ndarray  # d x N
    supports: np.ndarray  # N x S int
    signs: np.ndarray  # N x S, +-1
    coefficients: np.ndarray  # N x S, non-increasing, unit norm
    noise_sigma: float
    spec: CoefficientSpec = field(repr=False, default=None)

    @property
    def N(self) -> int:
        return self.signals.shape[1]


def draw_batch(
    D: Dictionary,
    spec: CoefficientSpec,
    noise_sigma: float,
    N: int,
    rng: np.random.Generator,
) -> SignalBatch:
    """N independent draws from the signal model; deterministic given rng state."""
    if spec.K != D.K:
        raise ValueError(f"spec.K = {spec.K} does not match dictionary K = {D.K}")
    if noise_sigma < 0:
        raise ValueError("noise_sigma must be >= 0")
    d, S = D.d, spec.S
    c = spec.draw_sequences(N, rng)
    # uniformly random S-subset with a uniformly random rank ordering:
    # the first S positions of a uniform permutation of [0, K), realized as
    # the argsort of i.i.d. uniforms (chunked to bound memory at large N)
    supports = np.empty((N, S), dtype=np.intp)
    chunk = max(1, 10_000_000 // max(spec.K, 1))
    for lo in range(0, N, chunk):
        hi = min(lo + chunk, N)
        supports[lo:hi] = np.argsort(rng.random((hi - lo, spec.K)), axis=1)[:, :S]
    signs = np.where(rng.random((N, S)) < 0.5, -1.0, 1.0)
    weights = signs * c
    Y = np.zeros((d, N))
    for s in range(S):
        Y += D.atoms[:, supports[:, s]] * weights[:, s]
    if noise_sigma > 0:
        R = rng.normal(0.0, noise_sigma, size=(d, N))
        Y = (Y + R) / np.sqrt(1.0 + np.sum(R * R, axis=0))
    return SignalBatch(Y, supports, signs, c, noise_sigma, spec)


def draw_signal(
    D: Dictionary,
    spec: CoefficientSpec,
    noise_sigma: float,
    rng: np.random.Generator,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """One draw; returns (signal, support, signs, coefficient sequence)."""
    batch = draw_batch(D, spec, noise_sigma, 1, rng)
    return batch.signals[:, 0], batch.supports[0], batch.signs[0], batch.coefficients[0]


def statistics(
    spec: CoefficientSpec,
    noise_sigma: float,
    d: int,
    mc_samples: int = 100_000,
    rng: np.random.Generator | None = None,
) -> GapStatistics:
    """Gap and expectation statistics of the model.

    Flat noiseless values are closed-form; geometric gamma's and noisy C_r
    are Monte-Carlo estimates over ``mc_samples`` draws.  beta_S and
    delta_S are worst-case (essential-infimum) values: for the geometric
    family the extremal sequence is the one with c_b = decay_low, since
    c(S) = (sum_{j<S} c_b^(-2j))^(-1/2) is increasing in c_b.
    """
    S = spec.S
    used_mc = 0
    if spec.kind == "flat":
        beta = 1.0 / np.sqrt(S)
        delta = 1.0
        gamma1 = float(np.sqrt(S))
        gamma2 = 1.0
    else:
        cb = spec.decay_low
        c_lo = cb ** np.arange(1, S + 1)
        c_lo = c_lo / np.linalg.norm(c_lo)
        beta = float(c_lo[-1])  # exactly sparse: c(S+1) = 0
        delta = float(c_lo[-1] / c_lo[0])
        if mc_samples < 1:
            raise ValueError("geometric statistics need mc_samples >= 1")
        if rng is None:
            rng = np.random.default_rng(0)
        c = spec.draw_sequences(mc_samples, rng)
        gamma1 = float(np.mean(np.sum(c, axis=1)))
        gamma2 = float(np.mean(np.sum(c * c, axis=1)))  # = 1: exactly sparse
        used_mc = mc_samples
    if noise_sigma == 0:
        C_r = 1.0
    else:
        if mc_samples < 1:
            raise ValueError("noisy C_r needs mc_samples >= 1")
        if rng is None:
            rng = np.random.default_rng(0)
        R = rng.normal(0.0, noise_sigma, size=(mc_samples, d))
        C_r = float(np.mean(1.0 / np.sqrt(1.0 + np.sum(R * R, axis=1))))
        used_mc = mc_samples
    return GapStatistics(beta, delta, gamma1, gamma2, C_r, used_mc)
