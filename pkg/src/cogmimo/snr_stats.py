"""Closed-form CDFs of the post-ZF SNR for both detection stages.

The per-stream SNR of a zero-forcing stream is ``X / (Y + noise)`` with
``X`` a scaled chi-squared variable with ``2(N - t + 1)`` degrees of freedom
(``t`` streams detected jointly) and ``Y`` a sum of independent exponentials
whose means are the residual error variances of the jointly detected
streams.  The density of ``Y`` is written as a partial-fraction expansion over
the distinct residual variances; its weights are the characteristic
coefficients computed here.

Every CDF term is evaluated in a scale-free form

    X_vj * w[k - l] * C(j+l-1, l) (1-q_v)^j q_v^l,   q_v = g / (g + 1/lambda_v),

with ``g = gamma / (a^2 p_hat_i)`` and ``w`` the noise weight (a Poisson
mass in the first stage, its average over the noise-uncertainty law in the
second).  Multiplying out recovers the textbook expression term by term, but
nothing overflows when received powers are in the 1e5..1e10 range.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .channel import LinkPowerProfile, ScenarioConfig
from .errors import (
    DegenerateSpectrumError,
    DomainError,
    IllConditionedError,
    InsufficientAntennasError,
    NumericalInstabilityError,
)
from .numerics import incomplete_gamma_difference

__all__ = [
    "COALESCE_RTOL",
    "ResidualSpectrum",
    "NoiseUncertainty",
    "residual_spectrum",
    "characteristic_coefficients",
    "sum_of_exponentials_pdf",
    "snr_cdf",
    "cdf_stage1",
    "cdf_stage2",
    "cdf_stage1_high_snr",
    "cdf_stage2_high_snr",
    "cdf_min_stage1",
    "beta_density",
    "log_bracket",
]

COALESCE_RTOL = 1e-9
POLE_RTOL = 1e-12
CLAMP_SLACK = 1e-9


@dataclass(frozen=True)
class ResidualSpectrum:
    """Distinct residual variances (descending), multiplicities and the
    partial-fraction weights ``char_coeff[v][j-1]``.

    ``n_zero`` counts variances that were dropped because they are zero or
    below ``POLE_RTOL`` times the largest one; such a term is (numerically)
    identically zero and contributes no pole.
    """

    distinct: Tuple[float, ...]
    multiplicity: Tuple[int, ...]
    char_coeff: Tuple[Tuple[float, ...], ...]
    n_zero: int = 0

    @property
    def rho(self) -> int:
        return len(self.distinct)

    @property
    def dimension(self) -> int:
        return sum(self.multiplicity) + self.n_zero

    def coefficient_sum(self) -> float:
        return math.fsum(x for row in self.char_coeff for x in row)


@dataclass(frozen=True)
class NoiseUncertainty:
    """Stage-2 noise miscalibration: ``beta`` is uniform in dB on ``[-L, L]``.

    ``n_hat0`` is the nominal stage-2 noise variance; the effective variance
    of a frame is ``n_hat0 / beta``.
    """

    L_db: float = 2.0
    n_hat0: float = 1.0

    def __post_init__(self):
        if not self.L_db >= 0:
            raise DomainError("noise uncertainty bound must be nonnegative")
        if not self.n_hat0 > 0:
            raise DomainError("nominal noise must be positive")

    @property
    def support(self) -> Tuple[float, float]:
        u = 10.0 ** (self.L_db / 10.0)
        return 1.0 / u, u

    @classmethod
    def from_config(cls, config: ScenarioConfig) -> "NoiseUncertainty":
        return cls(config.noise_uncertainty_db, config.noise_power)


# ---------------------------------------------------------------------------
# Spectrum and characteristic coefficients
# ---------------------------------------------------------------------------
def residual_spectrum(values: Sequence[float], coalesce_tol: float = COALESCE_RTOL) -> ResidualSpectrum:
    """Group residual variances into distinct values with multiplicities.

    Values within relative distance ``coalesce_tol`` of their group's largest
    member are merged (value = group mean).
    """
    vals = [float(v) for v in values]
    if not vals:
        raise DomainError("spectrum needs at least one value")
    if any(v < 0 or not math.isfinite(v) for v in vals):
        raise DomainError("residual variances must be finite and nonnegative")
    if coalesce_tol < 0:
        raise DomainError("coalesce_tol must be nonnegative")
    top = max(vals)
    if top == 0.0:
        raise DegenerateSpectrumError("all residual variances are zero")
    # variances this far below the largest contribute nothing measurable
    positive = sorted((v for v in vals if v > POLE_RTOL * top), reverse=True)
    n_zero = len(vals) - len(positive)

    groups: List[List[float]] = []
    for v in positive:
        if groups and groups[-1][0] - v <= coalesce_tol * groups[-1][0]:
            groups[-1].append(v)
        else:
            groups.append([v])
    distinct = tuple(math.fsum(g) / len(g) for g in groups)
    multiplicity = tuple(len(g) for g in groups)
    coeff = characteristic_coefficients(distinct, multiplicity)
    return ResidualSpectrum(distinct, multiplicity, coeff, n_zero)


def characteristic_coefficients(
    distinct: Sequence[float], multiplicity: Sequence[int]
) -> Tuple[Tuple[float, ...], ...]:
    """Partial-fraction weights ``X[v][j-1]`` of

        prod_w (1 - lambda_w s)^(-tau_w) = sum_v sum_j X_vj (1 - lambda_v s)^(-j).

    Around the pole ``s = 1/lambda_v`` write ``u = 1 - lambda_v s``; the other
    factors become ``(c_w + r_w u)^(-tau_w)`` with ``r_w = lambda_w/lambda_v``
    and ``c_w = 1 - r_w``.  ``X_vj`` is the Taylor coefficient of their
    product at order ``tau_v - j`` (the residue/derivative formula).
    """
    lam = [float(x) for x in distinct]
    tau = [int(t) for t in multiplicity]
    if len(lam) != len(tau) or any(t < 1 for t in tau):
        raise DomainError("multiplicities must be positive and match the values")
    for a in range(len(lam)):
        for b in range(a + 1, len(lam)):
            if abs(lam[a] - lam[b]) <= POLE_RTOL * max(lam[a], lam[b]):
                raise IllConditionedError(
                    f"poles {lam[a]!r} and {lam[b]!r} are too close; coalesce them first"
                )

    table = []
    for v, (lam_v, tau_v) in enumerate(zip(lam, tau)):
        series = [1.0] + [0.0] * (tau_v - 1)
        for w, (lam_w, tau_w) in enumerate(zip(lam, tau)):
            if w == v:
                continue
            r = lam_w / lam_v
            c = 1.0 - r
            ratio = -r / c
            factor = [c ** (-tau_w) * math.comb(tau_w + n - 1, n) * ratio**n for n in range(tau_v)]
            series = [
                math.fsum(series[i] * factor[n - i] for i in range(n + 1)) for n in range(tau_v)
            ]
        table.append(tuple(series[tau_v - j] for j in range(1, tau_v + 1)))
    return tuple(table)


def sum_of_exponentials_pdf(y: float, spectrum: ResidualSpectrum) -> float:
    """Density of the sum of independent exponentials described by ``spectrum``."""
    if y < 0:
        return 0.0
    terms = []
    for lam, tau, row in zip(spectrum.distinct, spectrum.multiplicity, spectrum.char_coeff):
        for j in range(1, tau + 1):
            terms.append(
                row[j - 1] * y ** (j - 1) * math.exp(-y / lam) / (math.factorial(j - 1) * lam**j)
            )
    return math.fsum(terms)


def beta_density(x: float, L_db: float) -> float:
    """Density of the noise-uncertainty factor (log-uniform on ``10^{+-L/10}``)."""
    if not L_db > 0:
        raise DomainError("density only exists for L > 0")
    lo, hi = 10.0 ** (-L_db / 10.0), 10.0 ** (L_db / 10.0)
    if lo < x < hi:
        return 5.0 / (math.log(10.0) * L_db * x)
    return 0.0


# ---------------------------------------------------------------------------
# Noise weights
# ---------------------------------------------------------------------------
def _poisson_weights(x0: float, kmax: int, with_exp: bool = True) -> List[float]:
    if x0 == 0.0:
        return [1.0] + [0.0] * kmax
    log_x0 = math.log(x0)
    shift = -x0 if with_exp else 0.0
    return [math.exp(n * log_x0 + shift - math.lgamma(n + 1)) for n in range(kmax + 1)]


def log_bracket(x0: float, u: float) -> float:
    """``ln(x0 * u) - ln(x0 / u)``: the bracket of the high-SNR stage-2 form.

    Evaluated literally for ``x0 > 0``; it equals ``2 ln u`` whatever ``x0``.
    """
    if x0 > 0.0:
        return math.log(x0 * u) - math.log(x0 / u)
    return 2.0 * math.log(u)


def _uncertain_weights(x0: float, kmax: int, nu: NoiseUncertainty, high_snr: bool) -> List[float]:
    """Poisson masses averaged over the noise-uncertainty factor."""
    if nu.L_db == 0.0:
        if high_snr:
            return [1.0] + [0.0] * kmax
        return _poisson_weights(x0, kmax)
    lo, u = nu.support
    norm = 5.0 / (nu.L_db * math.log(10.0))
    if high_snr:
        # Gamma(n, 0+) differences vanish for n >= 1; Gamma(0, z) ~ -ln z - C.
        return [norm * log_bracket(x0, u)] + [0.0] * kmax
    if x0 == 0.0:
        return [1.0] + [0.0] * kmax
    return [
        norm * incomplete_gamma_difference(n, x0 * lo, x0 * u) / math.factorial(n)
        for n in range(kmax + 1)
    ]


def _nb_mass(l: int, j: int, q: float) -> float:
    if q == 0.0:
        return 1.0 if l == 0 else 0.0
    log_mass = (
        math.lgamma(j + l) - math.lgamma(j) - math.lgamma(l + 1) + j * math.log1p(-q) + l * math.log(q)
    )
    return math.exp(log_mass)


def _check_probability(value: float) -> float:
    if -CLAMP_SLACK <= value <= 1.0 + CLAMP_SLACK:
        return min(max(value, 0.0), 1.0)
    raise NumericalInstabilityError(f"probability {value!r} outside [0, 1]")


# ---------------------------------------------------------------------------
# Core CDF
# ---------------------------------------------------------------------------
def snr_cdf(
    gamma: float,
    signal: float,
    residuals: Sequence[float],
    dof: int,
    noise: float = 1.0,
    nu: Optional[NoiseUncertainty] = None,
    high_snr: bool = False,
    coalesce_tol: float = COALESCE_RTOL,
) -> float:
    """CDF of ``X / (Y + noise)`` at ``gamma``.

    Parameters
    ----------
    signal : float
        Estimated-channel power ``a^2 p_hat_i`` of the stream.
    residuals : sequence of float
        Residual error variances of all jointly detected streams.
    dof : int
        ``N - t`` (receive antennas minus jointly detected streams).
    noise : float
        Noise variance for the first stage; ignored when ``nu`` is given.
    nu : NoiseUncertainty, optional
        Second-stage noise model.  ``None`` means a deterministic noise.
    high_snr : bool
        Use the high-SNR forms (exponential dropped in stage 1, log bracket in
        stage 2).
    """
    if dof < 0:
        raise InsufficientAntennasError("fewer receive antennas than jointly detected streams")
    if not gamma >= 0:
        raise DomainError(f"gamma must be nonnegative, got {gamma}")
    if not signal > 0:
        raise DomainError("signal power must be positive")
    if gamma == 0.0:
        return 0.0
    if math.isinf(gamma):
        return 1.0
    g = gamma / signal
    if nu is None:
        weights = _poisson_weights(noise * g, dof, with_exp=not high_snr)
    else:
        weights = _uncertain_weights(nu.n_hat0 * g, dof, nu, high_snr)

    try:
        spectrum = residual_spectrum(residuals, coalesce_tol)
    except DegenerateSpectrumError:
        # No interference: pure chi-squared noise-limited CDF.
        return _check_probability(1.0 - math.fsum(weights))

    terms = []
    for k in range(dof + 1):
        for lam, tau, row in zip(spectrum.distinct, spectrum.multiplicity, spectrum.char_coeff):
            q = g / (g + 1.0 / lam)
            for j in range(1, tau + 1):
                x = row[j - 1]
                if x == 0.0:
                    continue
                for l in range(k + 1):
                    w = weights[k - l]
                    if w:
                        terms.append(x * w * _nb_mass(l, j, q))
    return _check_probability(1.0 - math.fsum(terms))


def _stage_inputs(stream: int, profile: LinkPowerProfile, streams: Sequence[int]):
    if stream not in streams:
        raise DomainError(f"stream {stream} is not part of the detected group {tuple(streams)}")
    signal = float(profile.signal[stream])
    residuals = [float(profile.residual[s]) for s in streams]
    return signal, residuals


def _first_stage_streams(config: ScenarioConfig, streams):
    return tuple(range(config.m)) if streams is None else tuple(streams)


def _second_stage_streams(config: ScenarioConfig, stream: int, streams):
    if streams is not None:
        return tuple(streams)
    return config.service1 if stream < config.m1 else config.service2


def cdf_stage1(
    gamma: float,
    stream: int,
    profile: LinkPowerProfile,
    config: ScenarioConfig,
    streams: Optional[Sequence[int]] = None,
) -> float:
    """First-stage SNR CDF of ``stream`` detected jointly with ``streams``
    (default: all ``M`` streams) under noise ``N0``."""
    group = _first_stage_streams(config, streams)
    signal, residuals = _stage_inputs(stream, profile, group)
    return snr_cdf(gamma, signal, residuals, config.n_rx - len(group), config.noise_power)


def cdf_stage1_high_snr(gamma, stream, profile, config, streams=None) -> float:
    group = _first_stage_streams(config, streams)
    signal, residuals = _stage_inputs(stream, profile, group)
    return snr_cdf(
        gamma, signal, residuals, config.n_rx - len(group), config.noise_power, high_snr=True
    )


def cdf_stage2(
    gamma: float,
    stream: int,
    profile: LinkPowerProfile,
    config: ScenarioConfig,
    nu: NoiseUncertainty,
    streams: Optional[Sequence[int]] = None,
) -> float:
    """Second-stage SNR CDF after the other group has been removed.

    ``streams`` is the second-stage group; by default the service group that
    contains ``stream``.  The noise variance is ``n_hat0 / beta`` averaged over
    the noise-uncertainty law.
    """
    group = _second_stage_streams(config, stream, streams)
    signal, residuals = _stage_inputs(stream, profile, group)
    return snr_cdf(gamma, signal, residuals, config.n_rx - len(group), nu=nu)


def cdf_stage2_high_snr(gamma, stream, profile, config, nu, streams=None) -> float:
    group = _second_stage_streams(config, stream, streams)
    signal, residuals = _stage_inputs(stream, profile, group)
    return snr_cdf(gamma, signal, residuals, config.n_rx - len(group), nu=nu, high_snr=True)


def cdf_min_stage1(gamma_t: float, profile: LinkPowerProfile, config: ScenarioConfig) -> float:
    """CDF of the smallest first-stage Service-1 SNR, treating streams as
    independent.  With no Service-1 streams switching never happens."""
    if not gamma_t >= 0:
        raise DomainError("switching threshold must be nonnegative")
    survival = 1.0
    for i in config.service1:
        survival *= 1.0 - cdf_stage1(gamma_t, i, profile, config)
    return _check_probability(1.0 - survival)
