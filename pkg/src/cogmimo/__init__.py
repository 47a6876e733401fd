"""Two-stage priority zero-forcing detection with aged channel estimates.

Closed-form SNR and outage statistics, a Monte Carlo link simulator that
checks them, and large-array planning tools (secondary admission and
coherence time).
"""

from .channel import (
    LinkPowerProfile,
    ScenarioConfig,
    aging_coefficient,
    build_profile,
    db_to_linear,
    link_power,
    mmse_power,
    realize_channel,
    residual_variance,
)
from .errors import (
    CogMimoError,
    ConsistencyError,
    DegenerateSpectrumError,
    DivergenceError,
    DomainError,
    IllConditionedError,
    InsufficientAntennasError,
    NumericalInstabilityError,
    ScenarioError,
    SingularMatrixError,
    TrialBudgetError,
)
from .kernels import BACKEND
from .montecarlo import empirical_cdf, estimate_outage, run_trial, simulate, snr_zf
from .numerics import RngStream, bessel_j0, pseudo_inverse, sample_complex_gaussian, upper_incomplete_gamma
from .outage import OutageReport, full_report, outage_service1, outage_service2, outage_total
from .planner import (
    coherence_time,
    coherence_time_iid,
    convexity_certificate,
    optimal_m2,
    optimality_condition,
    sum_rate_objective,
)
from .scenario import parse_scenario, parse_scenario_text
from .snr_stats import (
    NoiseUncertainty,
    cdf_min_stage1,
    cdf_stage1,
    cdf_stage1_high_snr,
    cdf_stage2,
    cdf_stage2_high_snr,
    characteristic_coefficients,
    residual_spectrum,
)

__version__ = "0.1.0"
