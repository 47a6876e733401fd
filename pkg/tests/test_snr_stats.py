import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cogmimo.errors import DegenerateSpectrumError, DomainError, IllConditionedError, InsufficientAntennasError
from cogmimo.snr_stats import (
    NoiseUncertainty,
    beta_density,
    cdf_min_stage1,
    cdf_stage1,
    cdf_stage1_high_snr,
    cdf_stage2,
    characteristic_coefficients,
    log_bracket,
    residual_spectrum,
    snr_cdf,
    sum_of_exponentials_pdf,
)

from oracles import sample_zf_snr, sum_density, zf_cdf, zf_cdf_uncertain


def test_coefficients_three_distinct():
    coeff = characteristic_coefficients((3.0, 2.0, 1.0), (1, 1, 1))
    assert [row[0] for row in coeff] == pytest.approx([4.5, -4.0, 0.5], abs=1e-12)


@pytest.mark.parametrize("values", [(2.0, 1.0, 1.0), (2.0, 2.0, 1.0), (5.0, 1.0, 1.0, 1.0), (4.0, 4.0, 4.0)])
def test_coefficients_sum_to_one(values):
    spec = residual_spectrum(values)
    assert spec.coefficient_sum() == pytest.approx(1.0, abs=1e-12)
    assert spec.dimension == len(values)


@pytest.mark.parametrize("values", [(3.0, 2.0, 1.0), (2.0, 1.0, 1.0)])
def test_density_matches_convolution(values):
    spec = residual_spectrum(values)
    ref = sum_density(values)
    for y in np.linspace(0.05, 15.0, 12):
        assert abs(sum_of_exponentials_pdf(y, spec) - ref(y)) < 1e-9


def test_spectrum_drops_zeros_and_coalesces():
    spec = residual_spectrum([1.0, 0.0, 1.0 + 1e-12, 2.0, 1e-15])
    assert spec.distinct == pytest.approx((2.0, 1.0))
    assert spec.multiplicity == (1, 2)
    assert spec.n_zero == 2
    with pytest.raises(DegenerateSpectrumError):
        residual_spectrum([0.0, 0.0])
    with pytest.raises(DomainError):
        residual_spectrum([-1.0])
    with pytest.raises(IllConditionedError):
        characteristic_coefficients((1.0, 1.0 + 1e-14), (1, 1))


CASES = [
    (2.0, (0.5, 0.3, 0.1), 1, 1.0),
    (1.0, (0.2, 0.2, 0.05), 2, 0.5),
    (3.0, (0.4,), 3, 1.0),
    (1.5, (0.3, 0.3, 0.3, 0.1), 1, 2.0),
]


@pytest.mark.parametrize("signal,residuals,dof,noise", CASES)
@pytest.mark.parametrize("gamma", [0.05, 0.7, 3.0, 20.0])
def test_stage1_cdf_symbolic_oracle(signal, residuals, dof, noise, gamma):
    got = snr_cdf(gamma, signal, residuals, dof, noise)
    assert got == pytest.approx(zf_cdf(gamma, signal, residuals, dof, noise), abs=1e-10)


@pytest.mark.parametrize("signal,residuals,dof,noise", CASES[:3])
@pytest.mark.parametrize("gamma", [0.1, 1.0, 8.0])
def test_stage2_cdf_quadrature_oracle(signal, residuals, dof, noise, gamma):
    nu = NoiseUncertainty(2.0, noise)
    got = snr_cdf(gamma, signal, residuals, dof, nu=nu)
    assert got == pytest.approx(zf_cdf_uncertain(gamma, signal, residuals, dof, noise, 2.0), abs=1e-9)


def test_cdf_matches_sampling():
    samples = sample_zf_snr(2.0, (0.5, 0.3), 2, 1.0, 400_000, 3)
    for g in (0.3, 1.0, 4.0):
        emp = np.mean(samples <= g)
        assert abs(snr_cdf(g, 2.0, (0.5, 0.3), 2, 1.0) - emp) < 0.005


def test_perfect_csi_is_chi_squared():
    from scipy import stats

    g = 1.7
    ref = stats.gamma(3).cdf(g * 0.5 / 2.0)
    assert snr_cdf(g, 2.0, (0.0, 0.0), 2, 0.5) == pytest.approx(ref, abs=1e-14)


def test_no_noise_uncertainty_equals_fixed_noise():
    a = snr_cdf(1.3, 2.0, (0.5, 0.1), 1, nu=NoiseUncertainty(0.0, 0.8))
    b = snr_cdf(1.3, 2.0, (0.5, 0.1), 1, noise=0.8)
    assert a == pytest.approx(b, abs=1e-15)


def test_edges_and_errors():
    assert snr_cdf(0.0, 1.0, (0.5,), 1) == 0.0
    assert snr_cdf(math.inf, 1.0, (0.5,), 1) == 1.0
    with pytest.raises(InsufficientAntennasError):
        snr_cdf(1.0, 1.0, (0.5,), -1)
    with pytest.raises(DomainError):
        snr_cdf(-1.0, 1.0, (0.5,), 1)


def test_beta_density_normalised():
    from scipy.integrate import quad

    val, _ = quad(lambda x: beta_density(x, 2.0), 0.5, 2.0, points=[10**-0.2, 10**0.2])
    assert val == pytest.approx(1.0, abs=1e-10)
    assert beta_density(3.0, 2.0) == 0.0
    assert log_bracket(0.7, 10**0.2) == pytest.approx(2 * math.log(10**0.2), abs=1e-15)


@settings(max_examples=60, deadline=None)
@given(
    signal=st.floats(0.1, 10.0),
    residuals=st.lists(st.floats(0.0, 5.0), min_size=1, max_size=4),
    extra=st.integers(0, 3),
    noise=st.floats(0.0, 3.0),
    g1=st.floats(0.001, 50.0),
    g2=st.floats(0.001, 50.0),
)
def test_cdf_is_monotone_probability(signal, residuals, extra, noise, g1, g2):
    lo, hi = sorted((g1, g2))
    f_lo = snr_cdf(lo, signal, residuals, extra, noise)
    f_hi = snr_cdf(hi, signal, residuals, extra, noise)
    assert 0.0 <= f_lo <= f_hi + 1e-12 <= 1.0 + 1e-12


@settings(max_examples=40, deadline=None)
@given(lam=st.floats(0.05, 5.0), reps=st.integers(2, 4), g=st.floats(0.01, 20.0))
def test_near_equal_values_collapse(lam, reps, g):
    exact = snr_cdf(g, 1.0, [lam] * reps, 1, 1.0)
    jitter = [lam * (1 + 1e-11 * k) for k in range(reps)]
    assert snr_cdf(g, 1.0, jitter, 1, 1.0) == pytest.approx(exact, abs=1e-10)


def test_stage_wrappers(ref):
    config, profile, nu = ref
    # stage 2 within a smaller group has more free antennas: stochastically larger SNR
    for i in range(config.m):
        assert cdf_stage2(1.0, i, profile, config, NoiseUncertainty(0.0)) <= cdf_stage1(1.0, i, profile, config)
    f = [cdf_stage1(1.0, i, profile, config) for i in config.service1]
    assert cdf_min_stage1(1.0, profile, config) == pytest.approx(1 - (1 - f[0]) * (1 - f[1]))
    # 10 dB with strong links is already deep in the high-SNR regime
    assert cdf_stage1_high_snr(1.0, 0, profile, config) == pytest.approx(cdf_stage1(1.0, 0, profile, config), abs=1e-5)
