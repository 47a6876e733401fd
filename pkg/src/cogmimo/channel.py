"""Link budget, estimation-error statistics and per-frame channel draws.

Service 1 streams occupy indices ``0 .. m1-1`` and Service 2 streams
``m1 .. m1+m2-1`` everywhere in the package.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np

from .errors import ConsistencyError, DomainError, ScenarioError
from .numerics import RngLike, as_generator, bessel_j0, sample_complex_gaussian

__all__ = [
    "ScenarioConfig",
    "LinkPowerProfile",
    "ChannelRealization",
    "link_power",
    "mmse_power",
    "aging_coefficient",
    "residual_variance",
    "build_profile",
    "realize_channel",
    "db_to_linear",
]


def db_to_linear(x_db: float) -> float:
    return 10.0 ** (x_db / 10.0)


@dataclass(frozen=True)
class ScenarioConfig:
    """Complete description of one experiment.

    Powers are linear and normalised to the noise power, so with the default
    ``noise_power = 1`` the ``tx_power`` field is the transmit SNR p_T/N0.
    """

    n_rx: int
    m1: int
    m2: int
    tx_power: float
    distances: Tuple[float, ...]
    pathloss_exponents: Tuple[float, ...] = ()
    alpha: float = 1.0
    noise_uncertainty_db: float = 2.0
    gamma_th: float = 1.0
    gamma_t: float = 1.0
    noise_power: float = 1.0
    trials: int = 100_000
    seed: int = 0
    massive_limit: bool = False

    def __post_init__(self):
        m = self.m1 + self.m2
        distances = tuple(float(d) for d in np.atleast_1d(self.distances))
        if len(distances) == 1 and m > 1:
            distances = distances * m
        exponents = tuple(float(w) for w in np.atleast_1d(self.pathloss_exponents or (4.0,)))
        if len(exponents) == 1 and m > 1:
            exponents = exponents * m
        object.__setattr__(self, "distances", distances)
        object.__setattr__(self, "pathloss_exponents", exponents)

        if self.m1 < 0 or self.m2 < 0 or m < 1:
            raise ScenarioError("need m1 >= 0, m2 >= 0 and m1 + m2 >= 1")
        if self.n_rx < m:
            raise ScenarioError(f"n_rx = {self.n_rx} is smaller than m1 + m2 = {m}")
        if len(distances) != m:
            raise ScenarioError(f"expected {m} distances, got {len(distances)}")
        if len(exponents) != m:
            raise ScenarioError(f"expected {m} path-loss exponents, got {len(exponents)}")
        if any(not d > 0 for d in distances):
            raise ScenarioError("distances must be positive")
        if any(not 2.0 <= w <= 6.0 for w in exponents):
            raise ScenarioError("path-loss exponents must lie in [2, 6]")
        if not 0.0 < self.alpha <= 1.0:
            raise ScenarioError(f"aging coefficient must lie in (0, 1], got {self.alpha}")
        if not self.noise_uncertainty_db >= 0:
            raise ScenarioError("noise uncertainty must be nonnegative")
        if not (self.gamma_th > 0 and self.gamma_t > 0):
            raise ScenarioError("thresholds must be positive")
        if not (self.tx_power > 0 and self.noise_power > 0):
            raise ScenarioError("tx_power and noise_power must be positive")
        if self.trials < 1:
            raise ScenarioError("trials must be at least 1")

    @property
    def m(self) -> int:
        return self.m1 + self.m2

    @property
    def service1(self) -> Tuple[int, ...]:
        return tuple(range(self.m1))

    @property
    def service2(self) -> Tuple[int, ...]:
        return tuple(range(self.m1, self.m))

    def group(self, service: int) -> Tuple[int, ...]:
        if service == 1:
            return self.service1
        if service == 2:
            return self.service2
        raise DomainError(f"service must be 1 or 2, got {service}")

    def replace(self, **changes) -> "ScenarioConfig":
        from dataclasses import replace

        return replace(self, **changes)


@dataclass(frozen=True)
class LinkPowerProfile:
    """Per-stream true power, estimate power and residual error variance."""

    p: np.ndarray
    p_hat: np.ndarray
    residual: np.ndarray
    alpha: float = 1.0

    def __post_init__(self):
        for name in ("p", "p_hat", "residual"):
            arr = np.asarray(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if not (self.p.shape == self.p_hat.shape == self.residual.shape):
            raise DomainError("profile arrays must have equal length")

    @property
    def signal(self) -> np.ndarray:
        """Estimated-channel power a^2 p_hat per stream."""
        return self.alpha**2 * self.p_hat

    def __len__(self):
        return len(self.p)

    def subset(self, indices: Sequence[int]) -> "LinkPowerProfile":
        idx = list(indices)
        return LinkPowerProfile(self.p[idx], self.p_hat[idx], self.residual[idx], self.alpha)


@dataclass(frozen=True)
class ChannelRealization:
    """One frame: the scaled channel estimate and its error matrix (N x M)."""

    estimated: np.ndarray
    error: np.ndarray = field(repr=False)


def link_power(p_t: float, d: float, omega: float) -> float:
    """Received power ``p_T d^-omega`` for a node at normalised distance ``d``."""
    if not d > 0:
        raise DomainError(f"distance must be positive, got {d}")
    if not p_t > 0:
        raise DomainError(f"transmit power must be positive, got {p_t}")
    if not 2.0 <= omega <= 6.0:
        raise DomainError(f"path-loss exponent must lie in [2, 6], got {omega}")
    return p_t * d ** (-omega)


def mmse_power(p: float, m_total: int, p_t: float) -> float:
    """Power of the MMSE channel estimate with ``m_total`` orthogonal pilots."""
    if not (p > 0 and p_t > 0) or m_total < 1:
        raise DomainError("mmse_power needs p > 0, p_t > 0 and m_total >= 1")
    return p * p / (p + 1.0 / (m_total * p_t))


def aging_coefficient(fd_ts: float) -> float:
    """Gauss-Markov correlation J0(2 pi f_D T_s) for a normalised Doppler."""
    if not fd_ts >= 0:
        raise DomainError(f"normalised Doppler must be nonnegative, got {fd_ts}")
    return bessel_j0(2.0 * math.pi * fd_ts)


def residual_variance(p: float, p_hat: float, a: float, order: int = 1) -> float:
    """Error variance ``p - a^(2 order) p_hat`` after ``order`` aging steps."""
    if order < 1:
        raise DomainError("aging order must be at least 1")
    if not 0 < p_hat <= p * (1 + 1e-12):
        raise DomainError(f"need 0 < p_hat <= p, got p={p}, p_hat={p_hat}")
    if not 0 < a <= 1:
        raise DomainError(f"aging coefficient must lie in (0, 1], got {a}")
    value = p - a ** (2 * order) * p_hat
    if value < -1e-12 * p:
        raise ConsistencyError(f"negative residual variance {value}")
    return max(value, 0.0)


def build_profile(config: ScenarioConfig) -> LinkPowerProfile:
    """Per-stream powers for ``config``.

    The estimate power follows the MMSE pilot model with ``M`` orthogonal
    pilots; in ``massive_limit`` mode it is replaced by the true power.
    """
    p_t = config.tx_power / config.noise_power
    p = np.array(
        [link_power(p_t, d, w) for d, w in zip(config.distances, config.pathloss_exponents)]
    )
    if config.massive_limit:
        p_hat = p.copy()
    else:
        p_hat = np.array([mmse_power(pi, config.m, p_t) for pi in p])
    residual = np.array(
        [residual_variance(pi, qi, config.alpha) for pi, qi in zip(p, p_hat)]
    )
    return LinkPowerProfile(p, p_hat, residual, config.alpha)


def realize_channel(
    profile: LinkPowerProfile, config: ScenarioConfig, rng: RngLike
) -> ChannelRealization:
    """Draw the scaled estimate (column variance a^2 p_hat) and the error
    matrix (column variance p - a^2 p_hat), independently."""
    if len(profile) != config.m:
        raise DomainError("profile does not match the configuration")
    gen = as_generator(rng)
    estimated = sample_complex_gaussian(config.n_rx, config.m, profile.signal, gen)
    error = sample_complex_gaussian(config.n_rx, config.m, profile.residual, gen)
    return ChannelRealization(estimated, error)


def config_from_fd_ts(fd_ts: float, **kwargs) -> ScenarioConfig:
    """Build a configuration whose aging coefficient comes from f_D T_s."""
    return ScenarioConfig(alpha=aging_coefficient(fd_ts), **kwargs)


def alpha_or_fd_ts(alpha: Optional[float], fd_ts: Optional[float]) -> float:
    if alpha is not None and fd_ts is not None:
        raise ScenarioError("give either alpha or fd_ts, not both")
    if fd_ts is not None:
        return aging_coefficient(fd_ts)
    return 1.0 if alpha is None else alpha
