"""Massive-MIMO admission planning and coherence time.

In the large-array regime each ZF stream's SNR converges to a deterministic
equivalent, noise drops out, and the number of secondary streams can be
chosen by scanning an optimality condition downward from ``N - M1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from .channel import LinkPowerProfile, ScenarioConfig
from .errors import DegenerateSpectrumError, DomainError

__all__ = [
    "PlannerResult",
    "CoherenceResult",
    "ConvexityReport",
    "asymptotic_snr_stage1",
    "asymptotic_snr_stage2",
    "optimality_condition",
    "sum_rate_objective",
    "constraint_value",
    "lagrange_multiplier",
    "optimal_m2",
    "plan_from_config",
    "convexity_certificate",
    "coherence_time",
    "coherence_time_iid",
]


@dataclass
class PlannerResult:
    m2_star: int
    lambda_diag: Optional[float]
    objective: float
    iterations: int
    constraint: Optional[float] = None


@dataclass
class CoherenceResult:
    """``t_max`` is ``math.inf`` when ``infinite`` (no aging)."""

    t_max: float
    snr_at_tmax: float
    infinite: bool = False
    infeasible: bool = False
    pre_floor: float = 0.0


@dataclass
class ConvexityReport:
    grid: List[float]
    step: float
    objective_second_diff: List[float] = field(default_factory=list)
    constraint_second_diff: List[float] = field(default_factory=list)

    @property
    def objective_concave(self) -> bool:
        return all(d < 0 for d in self.objective_second_diff)

    @property
    def constraint_convex(self) -> bool:
        return all(d > 0 for d in self.constraint_second_diff)


# ---------------------------------------------------------------------------
# Deterministic equivalents
# ---------------------------------------------------------------------------
def _asymptotic(stream, profile, streams, n_rx):
    if stream not in streams:
        raise DomainError(f"stream {stream} is not in group {tuple(streams)}")
    surplus = n_rx - len(streams)
    if surplus < 0:
        raise DomainError("fewer receive antennas than streams")
    if surplus == 0:
        return 0.0
    total = math.fsum(float(profile.residual[j]) for j in streams)
    if total == 0.0:
        return math.inf
    return surplus * float(profile.signal[stream]) / total


def asymptotic_snr_stage1(stream: int, profile: LinkPowerProfile, config: ScenarioConfig) -> float:
    """Large-array SNR of a stream detected jointly with all ``M`` streams.
    Returns ``inf`` when the CSI is perfect."""
    return _asymptotic(stream, profile, tuple(range(config.m)), config.n_rx)


def asymptotic_snr_stage2(
    stream: int,
    profile: LinkPowerProfile,
    config: ScenarioConfig,
    streams: Optional[Sequence[int]] = None,
) -> float:
    """Large-array SNR of a stream detected within its own group (default:
    its service group) after the other group was removed."""
    if streams is None:
        streams = config.service1 if stream < config.m1 else config.service2
    return _asymptotic(stream, profile, tuple(streams), config.n_rx)


# ---------------------------------------------------------------------------
# Admission problem
# ---------------------------------------------------------------------------
def _split(a, p, p_hat):
    if p_hat is None:
        p_hat = p
    if not (0 < a <= 1 and p > 0 and 0 < p_hat <= p * (1 + 1e-12)):
        raise DomainError("need 0 < a <= 1 and 0 < p_hat <= p")
    signal = a * a * p_hat
    residual = p - signal
    if residual <= 0:
        raise DegenerateSpectrumError("perfect CSI: residual variance is zero")
    return signal, residual


def sum_rate_objective(m2: float, n: int, a: float, p: float = 1.0, p_hat: Optional[float] = None) -> float:
    """Secondary sum rate ``m2 log2(1 + (n/m2 - 1) a^2 p_hat / (p - a^2 p_hat))``."""
    if not 0 < m2 <= n:
        raise DomainError("need 0 < m2 <= n")
    signal, residual = _split(a, p, p_hat)
    return m2 * math.log2(1.0 + (n / m2 - 1.0) * signal / residual)


def constraint_value(
    m2: float, n: int, m1: int, a: float, p: float = 1.0, p_hat: Optional[float] = None, gamma_th: float = 1.0
) -> float:
    """Left side of the Service-1 quality constraint (feasible when <= 0)."""
    signal, residual = _split(a, p, p_hat)
    free = n - m1 - m2
    if free <= 0:
        return math.inf
    return gamma_th * (m1 + m2) * residual / (free * signal) - 1.0


def optimality_condition(m2: int, n: int, a: float, p: float = 1.0, p_hat: Optional[float] = None) -> bool:
    """True when admitting ``m2`` secondary streams satisfies the KKT
    condition (nonnegative multiplier)."""
    if not 0 < m2 < n:
        raise DomainError("need 0 < m2 < n")
    signal, residual = _split(a, p, p_hat)
    lhs = math.log1p((n / m2 - 1.0) * signal / residual) * (signal * (n - m2) + m2 * residual)
    return lhs >= signal * n


def lagrange_multiplier(
    m2: int, n: int, m1: int, a: float, p: float = 1.0, p_hat: Optional[float] = None, gamma_th: float = 1.0
) -> float:
    """Multiplier of the quality constraint from stationarity at ``m2``."""
    signal, residual = _split(a, p, p_hat)
    mix = signal * (n - m2) + m2 * residual
    prefactor = signal * (n - m1 - m2) ** 2 / (math.log(2.0) * gamma_th * residual * mix)
    return prefactor * (math.log1p((n / m2 - 1.0) * signal / residual) * mix - signal * n)


def optimal_m2(
    n: int,
    m1: int,
    a: float,
    p: float = 1.0,
    p_hat: Optional[float] = None,
    gamma_th: float = 1.0,
    upper: Optional[int] = None,
) -> PlannerResult:
    """Descending scan from ``upper`` (default ``n - m1``) to the first
    ``m2`` satisfying the optimality condition; 0 if none does."""
    if m1 < 0 or n < 1:
        raise DomainError("need n >= 1 and m1 >= 0")
    m2 = n - m1 if upper is None else min(upper, n - m1)
    iterations = 0
    while m2 > 0:
        iterations += 1
        if m2 < n and optimality_condition(m2, n, a, p, p_hat):
            return PlannerResult(
                m2_star=m2,
                lambda_diag=lagrange_multiplier(m2, n, m1, a, p, p_hat, gamma_th),
                objective=sum_rate_objective(m2, n, a, p, p_hat),
                iterations=iterations,
                constraint=constraint_value(m2, n, m1, a, p, p_hat, gamma_th),
            )
        m2 -= 1
    return PlannerResult(0, None, 0.0, iterations, None)


def plan_from_config(config: ScenarioConfig, profile: LinkPowerProfile, strict: bool = False) -> PlannerResult:
    """Planner on a configuration, taking the i.i.d. secondary parameters from
    the first Service-2 stream (or the first stream when there is none).

    The large-array substitution ``p_hat = p`` is used unless ``strict``, in
    which case the profile's pilot-based estimate power is kept.
    """
    ref = config.m1 if config.m2 else 0
    p = float(profile.p[ref])
    p_hat = float(profile.p_hat[ref]) if strict else p
    return optimal_m2(config.n_rx, config.m1, config.alpha, p, p_hat, config.gamma_th)


def convexity_certificate(
    n: int,
    m1: int,
    a: float,
    p: float = 1.0,
    p_hat: Optional[float] = None,
    gamma_th: float = 1.0,
    grid: Optional[Sequence[float]] = None,
    step: float = 0.5,
) -> ConvexityReport:
    """Central second differences of the objective and the constraint.

    ``step`` is the half-width of the stencil; the default keeps every
    stencil point inside ``(0, n - m1)`` for the integer grid ``1 .. n-m1-1``.
    """
    if grid is None:
        grid = list(range(1, n - m1))
    grid = [float(g) for g in grid]
    if any(not (step <= g < n - m1 - step + 1e-12) for g in grid):
        raise DomainError("grid points must lie inside (0, n - m1) with room for the stencil")
    report = ConvexityReport(grid, step)
    for g in grid:
        f = [sum_rate_objective(g + d * step, n, a, p, p_hat) for d in (-1, 0, 1)]
        c = [constraint_value(g + d * step, n, m1, a, p, p_hat, gamma_th) for d in (-1, 0, 1)]
        report.objective_second_diff.append((f[0] - 2 * f[1] + f[2]) / step**2)
        report.constraint_second_diff.append((c[0] - 2 * c[1] + c[2]) / step**2)
    return report


# ---------------------------------------------------------------------------
# Coherence time
# ---------------------------------------------------------------------------
def _floor_tmax(log_arg: float, a: float):
    pre = math.log(log_arg) / (2.0 * math.log(a))
    if pre < 0:
        return 0, True, pre
    return int(math.floor(pre)), False, pre


def coherence_time_iid(m: int, n: int, a: float, gamma_th: float = 1.0) -> CoherenceResult:
    """Symbols until the aged large-array SNR of equal-distance streams
    drops to ``gamma_th``."""
    if not (1 <= m <= n):
        raise DomainError("need 1 <= m <= n")
    if not 0 < a <= 1:
        raise DomainError("aging coefficient must lie in (0, 1]")
    if a == 1.0:
        return CoherenceResult(math.inf, math.inf, infinite=True, pre_floor=math.inf)
    if n == m:
        return CoherenceResult(0, 0.0, pre_floor=0.0)
    t, infeasible, pre = _floor_tmax(m * gamma_th / (n - m + m * gamma_th), a)
    decay = a ** (2 * t)
    snr = (n - m) * decay / (m * (1.0 - decay)) if decay < 1 else math.inf
    return CoherenceResult(t, snr, infeasible=infeasible, pre_floor=pre)


def coherence_time(
    profile: LinkPowerProfile, config: ScenarioConfig, gamma_th: Optional[float] = None
) -> CoherenceResult:
    """Coherence time of the Service-1-first configuration in the large-array
    limit, using the profile's estimate powers."""
    gamma_th = config.gamma_th if gamma_th is None else gamma_th
    a, n, m = config.alpha, config.n_rx, config.m
    p_hat = np.asarray(profile.p_hat, dtype=float)
    if np.allclose(p_hat, p_hat[0], rtol=1e-12, atol=0):
        return coherence_time_iid(m, n, a, gamma_th)
    if a == 1.0:
        return CoherenceResult(math.inf, math.inf, infinite=True, pre_floor=math.inf)
    if n == m:
        return CoherenceResult(0, 0.0, pre_floor=0.0)
    total = math.fsum(p_hat)
    p_min = float(p_hat.min())
    t, infeasible, pre = _floor_tmax(gamma_th * total / (gamma_th * total + p_min * (n - m)), a)
    decay = a ** (2 * t)
    denom = math.fsum(profile.p - decay * p_hat)
    snr = (n - m) * decay * p_min / denom if denom > 0 else math.inf
    return CoherenceResult(t, snr, infeasible=infeasible, pre_floor=pre)
