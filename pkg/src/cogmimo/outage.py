"""Per-stream and total outage probabilities under the switching rule.

A Service-1 stream is detected in the first stage unless the smallest
first-stage Service-1 SNR is at or below the switching threshold, in which
case the two groups swap stages.  The closed forms weight the two stage CDFs
by the switching probability as if the stream's SNR and the group minimum
were independent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional

from .channel import LinkPowerProfile, ScenarioConfig
from .errors import DomainError
from .snr_stats import NoiseUncertainty, cdf_min_stage1, cdf_stage1, cdf_stage2

__all__ = [
    "OutageReport",
    "outage_service1",
    "outage_service2",
    "outage_total",
    "full_report",
]


@dataclass
class OutageReport:
    per_stream_service1: List[float] = field(default_factory=list)
    per_stream_service2: List[float] = field(default_factory=list)
    total_service1: float = 0.0
    total_service2: float = 0.0
    switch_probability: float = 0.0

    def as_dict(self) -> dict:
        return {
            "per_stream_service1": list(self.per_stream_service1),
            "per_stream_service2": list(self.per_stream_service2),
            "total_service1": self.total_service1,
            "total_service2": self.total_service2,
            "switch_probability": self.switch_probability,
        }


def _switch_weight(gamma_t, profile, config, f_min):
    # Without Service-2 streams there is nothing to swap with.
    if config.m2 == 0:
        return 0.0
    if f_min is not None:
        return f_min
    return cdf_min_stage1(gamma_t, profile, config)


def outage_service1(
    gamma_th: float,
    gamma_t: float,
    stream: int,
    profile: LinkPowerProfile,
    config: ScenarioConfig,
    nu: NoiseUncertainty,
    f_min: Optional[float] = None,
) -> float:
    """Outage of Service-1 ``stream``: first stage with all ``M`` streams when
    no switch occurs, second stage among the ``M1`` Service-1 streams
    otherwise.  ``f_min`` may be passed to reuse a switching probability."""
    if stream not in config.service1:
        raise DomainError(f"stream {stream} is not a Service-1 stream")
    stay = cdf_stage1(gamma_th, stream, profile, config)
    switch = _switch_weight(gamma_t, profile, config, f_min)
    if switch == 0.0:
        return stay
    moved = cdf_stage2(gamma_th, stream, profile, config, nu, config.service1)
    return stay * (1.0 - switch) + moved * switch


def outage_service2(
    gamma_th: float,
    gamma_t: float,
    stream: int,
    profile: LinkPowerProfile,
    config: ScenarioConfig,
    nu: NoiseUncertainty,
    f_min: Optional[float] = None,
) -> float:
    """Outage of Service-2 ``stream``: second stage among the ``M2`` streams
    when Service 1 stays first, first stage with all ``M`` streams otherwise."""
    if stream not in config.service2:
        raise DomainError(f"stream {stream} is not a Service-2 stream")
    switch = _switch_weight(gamma_t, profile, config, f_min)
    first = cdf_stage1(gamma_th, stream, profile, config)
    if config.m1 == 0:
        return first
    second = cdf_stage2(gamma_th, stream, profile, config, nu, config.service2)
    return second * (1.0 - switch) + first * switch


def _combine(per_stream: List[float]) -> float:
    if not per_stream:
        return 0.0
    return 1.0 - math.prod(1.0 - q for q in per_stream)


def outage_total(
    service: int,
    gamma_th: float,
    gamma_t: float,
    profile: LinkPowerProfile,
    config: ScenarioConfig,
    nu: NoiseUncertainty,
) -> float:
    """Probability that at least one stream of ``service`` is in outage,
    treating the streams as independent."""
    group = config.group(service)
    if not group:
        raise DomainError(f"service {service} has no streams")
    f_min = _switch_weight(gamma_t, profile, config, None)
    fn = outage_service1 if service == 1 else outage_service2
    return _combine([fn(gamma_th, gamma_t, i, profile, config, nu, f_min) for i in group])


def full_report(
    profile: LinkPowerProfile,
    config: ScenarioConfig,
    nu: NoiseUncertainty,
    gamma_th: Optional[float] = None,
    gamma_t: Optional[float] = None,
) -> OutageReport:
    """All outage figures at the configured (or overridden) thresholds."""
    gamma_th = config.gamma_th if gamma_th is None else gamma_th
    gamma_t = config.gamma_t if gamma_t is None else gamma_t
    f_min = _switch_weight(gamma_t, profile, config, None)
    s1 = [outage_service1(gamma_th, gamma_t, i, profile, config, nu, f_min) for i in config.service1]
    s2 = [outage_service2(gamma_th, gamma_t, i, profile, config, nu, f_min) for i in config.service2]
    return OutageReport(s1, s2, _combine(s1), _combine(s2), f_min)
