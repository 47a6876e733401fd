import pytest

from cogmimo import NoiseUncertainty, ScenarioConfig, build_profile, db_to_linear


def reference_config(**changes):
    base = dict(
        n_rx=4,
        m1=2,
        m2=1,
        tx_power=db_to_linear(10.0),
        distances=(0.05, 0.08, 0.1),
        alpha=0.9,
        trials=100_000,
        seed=2024,
    )
    base.update(changes)
    return ScenarioConfig(**base)


@pytest.fixture
def ref():
    config = reference_config()
    return config, build_profile(config), NoiseUncertainty.from_config(config)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    if mod is None or not getattr(mod, "RESULTS", None):
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[k])
