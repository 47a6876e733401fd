import pytest

from cogmimo import NoiseUncertainty, build_profile
from cogmimo.errors import DomainError
from cogmimo.outage import full_report, outage_service1, outage_service2, outage_total
from cogmimo.snr_stats import cdf_min_stage1, cdf_stage1, cdf_stage2

from conftest import reference_config


@pytest.mark.parametrize("g", [0.3, 1.0, 5.0])
def test_outage_lies_between_stage_cdfs(ref, g):
    config, profile, nu = ref
    for i in config.service1:
        a = cdf_stage1(g, i, profile, config)
        b = cdf_stage2(g, i, profile, config, nu)
        assert min(a, b) - 1e-15 <= outage_service1(g, 1.0, i, profile, config, nu) <= max(a, b) + 1e-15
    for i in config.service2:
        a = cdf_stage1(g, i, profile, config)
        b = cdf_stage2(g, i, profile, config, nu)
        assert min(a, b) - 1e-15 <= outage_service2(g, 1.0, i, profile, config, nu) <= max(a, b) + 1e-15


def test_switch_threshold_limits(ref):
    config, profile, nu = ref
    # a vanishing threshold never switches, a huge one always does
    assert outage_service1(1.0, 1e-12, 0, profile, config, nu) == pytest.approx(
        cdf_stage1(1.0, 0, profile, config), abs=1e-9
    )
    assert outage_service1(1.0, 1e12, 0, profile, config, nu) == pytest.approx(
        cdf_stage2(1.0, 0, profile, config, nu), abs=1e-9
    )
    assert outage_service2(1.0, 1e12, 2, profile, config, nu) == pytest.approx(
        cdf_stage1(1.0, 2, profile, config), abs=1e-9
    )


def test_single_service_has_no_switching():
    only1 = reference_config(m1=3, m2=0)
    p1 = build_profile(only1)
    nu = NoiseUncertainty.from_config(only1)
    assert outage_service1(1.0, 1.0, 0, p1, only1, nu) == cdf_stage1(1.0, 0, p1, only1)
    assert full_report(p1, only1, nu).switch_probability == 0.0

    only2 = reference_config(m1=0, m2=3)
    p2 = build_profile(only2)
    assert outage_service2(1.0, 1.0, 1, p2, only2, nu) == cdf_stage1(1.0, 1, p2, only2)


def test_totals_and_report(ref):
    config, profile, nu = ref
    rep = full_report(profile, config, nu)
    q = rep.per_stream_service1
    assert rep.total_service1 == pytest.approx(1 - (1 - q[0]) * (1 - q[1]), abs=1e-15)
    assert rep.total_service1 == pytest.approx(outage_total(1, 1.0, 1.0, profile, config, nu))
    assert rep.total_service2 == pytest.approx(rep.per_stream_service2[0])
    assert rep.switch_probability == pytest.approx(cdf_min_stage1(1.0, profile, config))
    assert set(rep.as_dict()) == {
        "per_stream_service1",
        "per_stream_service2",
        "total_service1",
        "total_service2",
        "switch_probability",
    }


def test_wrong_service_rejected(ref):
    config, profile, nu = ref
    with pytest.raises(DomainError):
        outage_service1(1.0, 1.0, 2, profile, config, nu)
    with pytest.raises(DomainError):
        outage_service2(1.0, 1.0, 0, profile, config, nu)
    with pytest.raises(DomainError):
        outage_total(3, 1.0, 1.0, profile, config, nu)
