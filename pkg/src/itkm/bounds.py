"""Closed-form theoretical quantities: limiting errors and convergence radii.

All logarithms are natural.  These values are reported for experiment
configuration and sanity checks, never enforced: the proven constants are
loose and the algorithms routinely succeed far outside the radii.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "TheoryInputs",
    "TheoryReport",
    "eps_min",
    "radius_itksm",
    "radius_itksm_exact",
    "radii_itkrm",
    "radius_itkrm_exact",
    "eps_delta",
    "c_r_lower",
    "build_report",
]


@dataclass(frozen=True)
class TheoryInputs:
    d: int
    K: int
    S: int
    mu: float
    A: float
    B: float
    beta_S: float
    delta_S: float  # relative gap
    gamma1_S: float
    gamma2_S: float
    C_r: float
    rho: float
    target_error: float = 1e-4

    def __post_init__(self):
        if not 0 < self.target_error < 1:
            raise ValueError("target_error must be in (0, 1)")
        if self.beta_S > 1.0 / math.sqrt(self.S) + 1e-12:
            raise ValueError(f"beta_S = {self.beta_S} exceeds 1/sqrt(S)")
        if self.delta_S > 1.0 + 1e-12:
            raise ValueError(f"delta_S = {self.delta_S} exceeds 1")


@dataclass(frozen=True)
class TheoryReport:
    eps_mu_rho: float
    radius_itksm: float
    radius_itksm_exact: float | None  # None when not strongly sparse
    radius_itkrm_log: float
    radius_itkrm_sqrt_s: float
    radius_itkrm_exact: float | None
    eps_delta: float
    eps_delta_admissible: bool
    c_r_lower: float
    strong_sparsity_ok: bool
    itksm_iterations_suggested: int
    itkrm_iterations_suggested: int


def eps_min(inp: TheoryInputs) -> float:
    """Limiting error (8 K^2 sqrt(B+1) / (C_r gamma_1)) exp(-beta^2 / (98 max{mu^2, rho^2}))."""
    m = max(inp.mu**2, inp.rho**2)
    if m == 0.0:
        return 0.0  # exponent -> -inf
    return (
        8.0 * inp.K**2 * math.sqrt(inp.B + 1.0) / (inp.C_r * inp.gamma1_S)
    ) * math.exp(-inp.beta_S**2 / (98.0 * m))


def _radius(numer: float, B_scale: float, log_arg: float) -> float:
    if log_arg <= 1.0:
        raise ValueError(f"log argument must exceed 1, got {log_arg}")
    return numer / (B_scale * (0.25 + math.sqrt(math.log(log_arg))))


def radius_itksm(inp: TheoryInputs) -> float:
    """ITKsM convergence radius Delta_S / (sqrt(98B)(1/4 + sqrt(log(1060 K^2 (B+1) / (Delta_S C_r gamma_1)))))."""
    log_arg = 1060.0 * inp.K**2 * (inp.B + 1.0) / (inp.delta_S * inp.C_r * inp.gamma1_S)
    return _radius(inp.delta_S, math.sqrt(98.0 * inp.B), log_arg)


def radius_itksm_exact(inp: TheoryInputs) -> float:
    """Strongly sparse noiseless ITKsM radius with Delta_S - 2 mu S in place of Delta_S."""
    gap = inp.delta_S - 2.0 * inp.mu * inp.S
    if gap <= 0:
        raise ValueError(
            f"strong sparsity violated: Delta_S = {inp.delta_S} <= 2 mu S = {2 * inp.mu * inp.S}"
        )
    log_arg = 1060.0 * inp.K**2 * inp.B / (gap * inp.gamma1_S)
    return _radius(gap, math.sqrt(98.0 * inp.B), log_arg)


def radii_itkrm(inp: TheoryInputs) -> tuple[float, float]:
    """Both ITKrM radius constraints (log-term branch, 1/(32 sqrt(S))); take the min."""
    log_arg = 2544.0 * inp.K**2 * (inp.B + 1.0) / (inp.delta_S * inp.C_r * inp.gamma1_S)
    return (
        _radius(inp.delta_S, math.sqrt(98.0 * inp.B), log_arg),
        1.0 / (32.0 * math.sqrt(inp.S)),
    )


def radius_itkrm_exact(inp: TheoryInputs) -> float:
    """Strongly sparse noiseless ITKrM log-branch radius (sqrt(12) and 23 K^2 sqrt(B) constants)."""
    gap = inp.delta_S - 2.0 * inp.mu * inp.S
    if gap <= 0:
        raise ValueError(
            f"strong sparsity violated: Delta_S = {inp.delta_S} <= 2 mu S = {2 * inp.mu * inp.S}"
        )
    log_arg = 23.0 * inp.K**2 * math.sqrt(inp.B) / (gap * inp.gamma1_S)
    return _radius(gap, math.sqrt(12.0), log_arg)


def eps_delta(K: int, mu: float, S: int) -> float:
    """K exp(-1 / (4741 mu^2 S)); small values certify well-conditioned supports."""
    if mu <= 0:
        raise ValueError("mu must be positive")
    if S < 1:
        raise ValueError("S must be >= 1")
    return K * math.exp(-1.0 / (4741.0 * mu**2 * S))


def eps_delta_admissible(value: float, B: float) -> bool:
    """Admissibility condition eps_delta <= 1 / (48 (B + 1))."""
    return value <= 1.0 / (48.0 * (B + 1.0))


def c_r_lower(d: int, rho: float) -> float:
    """Lower bound (1 - e^-d) / sqrt(1 + 5 d rho^2) for the noise constant C_r."""
    if d < 1:
        raise ValueError("d must be >= 1")
    return (1.0 - math.exp(-d)) / math.sqrt(1.0 + 5.0 * d * rho**2)


def build_report(inp: TheoryInputs) -> TheoryReport:
    strong = inp.delta_S > 2.0 * inp.mu * inp.S
    ed = eps_delta(inp.K, inp.mu, inp.S) if inp.mu > 0 else 0.0
    n_iter = math.ceil(math.log(1.0 / inp.target_error))
    log_branch, sqrt_branch = radii_itkrm(inp)
    return TheoryReport(
        eps_mu_rho=eps_min(inp),
        radius_itksm=radius_itksm(inp),
        radius_itksm_exact=radius_itksm_exact(inp) if strong else None,
        radius_itkrm_log=log_branch,
        radius_itkrm_sqrt_s=sqrt_branch,
        radius_itkrm_exact=radius_itkrm_exact(inp) if strong else None,
        eps_delta=ed,
        eps_delta_admissible=eps_delta_admissible(ed, inp.B),
        c_r_lower=c_r_lower(inp.d, inp.rho),
        strong_sparsity_ok=strong,
        itksm_iterations_suggested=6 * n_iter,
        itkrm_iterations_suggested=12 * n_iter,
    )
