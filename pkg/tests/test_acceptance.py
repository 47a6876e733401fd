"""Acceptance checks, one per criterion.

Each check prints a single ``PASS``/``FAIL`` line (also collected into the
pytest terminal summary).  Run directly with ``python tests/test_acceptance.py``
for the lines alone.
"""

import math
import sys
import time
from pathlib import Path

import numpy as np
import pytest
from scipy.optimize import brentq

sys.path.insert(0, str(Path(__file__).parent))

from cogmimo import NoiseUncertainty, ScenarioConfig, build_profile, db_to_linear  # noqa: E402
from cogmimo.cli import cmd_plan  # noqa: E402
from cogmimo.montecarlo import empirical_cdf, outage_from_batch, simulate  # noqa: E402
from cogmimo.outage import full_report  # noqa: E402
from cogmimo.planner import coherence_time_iid, convexity_certificate  # noqa: E402
from cogmimo.snr_stats import (  # noqa: E402
    cdf_stage1,
    cdf_stage1_high_snr,
    cdf_stage2,
    cdf_stage2_high_snr,
    residual_spectrum,
    snr_cdf,
    sum_of_exponentials_pdf,
)
from oracles import sum_density, zf_cdf  # noqa: E402

RESULTS = {}

TABLE = {
    0.9999: [6, 22, 54, 116, 232, 464],
    0.8: [6, 13, 27, 54, 108, 217],
    0.6: [5, 10, 20, 40, 80, 160],
}
TABLE_N = [16, 32, 64, 128, 256, 512]


def _reference(**changes):
    base = dict(
        n_rx=4,
        m1=2,
        m2=1,
        tx_power=db_to_linear(10.0),
        distances=(0.05, 0.08, 0.1),
        alpha=0.9,
        trials=100_000,
        seed=20240601,
    )
    base.update(changes)
    return ScenarioConfig(**base)


def _report(number, passed, detail):
    line = f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}"
    RESULTS[number] = line
    print(line, flush=True)
    return passed


# ---------------------------------------------------------------------------
def criterion_1():
    t0 = time.perf_counter()
    table = cmd_plan(TABLE_N, 10, list(TABLE))
    elapsed = time.perf_counter() - t0
    got = {a: [] for a in TABLE}
    for row in table.rows:
        got[row[1]].append(row[3])
    bad = [
        f"N={n},a={a}: {g} vs {want}"
        for a in TABLE
        for n, g, want in zip(TABLE_N, got[a], TABLE[a])
        if g != want
    ]
    matched = 18 - len(bad)
    detail = f"admission-table cells matched {matched}/18 in {elapsed:.3f}s"
    if bad:
        detail += "; mismatches " + "; ".join(bad)
    return matched == 18 and elapsed < 1.0, detail


def _grid_200():
    return np.logspace(-2.5, 3.0, 200)


def criterion_2():
    config = _reference()
    profile = build_profile(config)
    nu = NoiseUncertainty.from_config(config)
    grid = _grid_200()
    t0 = time.perf_counter()
    emp = empirical_cdf(profile, config, nu, config.trials, grid, seed=config.seed)["stage1"]
    closed = np.array([[cdf_stage1(g, i, profile, config) for g in grid] for i in range(config.m)])
    elapsed = time.perf_counter() - t0
    gaps = emp.sup_distance(closed)
    ok = bool(np.all(gaps <= 0.015)) and elapsed < 30
    return ok, f"stage-1 sup-norm per stream {np.round(gaps, 4).tolist()} (tol 0.015) at 1e5 trials, {elapsed:.1f}s"


def criterion_3():
    grid = _grid_200()
    t0 = time.perf_counter()
    parts = []
    ok = True
    for label, config in (
        ("t2=1", _reference()),
        ("t2=2 iid", _reference(m2=2, distances=(0.08,))),
    ):
        profile = build_profile(config)
        nu = NoiseUncertainty.from_config(config)
        emp = empirical_cdf(profile, config, nu, config.trials, grid, seed=config.seed)["stage2"]
        streams = config.service2
        closed = np.array([[cdf_stage2(g, i, profile, config, nu) for g in grid] for i in streams])
        gaps = np.max(np.abs(emp.values[list(streams)] - closed), axis=1)
        ok = ok and bool(np.all(gaps <= 0.015))
        parts.append(f"{label}: {np.round(gaps, 4).tolist()}")
    elapsed = time.perf_counter() - t0
    ok = ok and elapsed < 30
    return ok, "stage-2 sup-norm " + ", ".join(parts) + f" (tol 0.015), {elapsed:.1f}s"


def criterion_4():
    config = _reference()
    profile = build_profile(config)
    nu = NoiseUncertainty.from_config(config)
    t0 = time.perf_counter()
    closed = full_report(profile, config, nu)
    batch = simulate(profile, config, nu, seed=config.seed)
    emp = outage_from_batch(batch, config, config.gamma_th)
    elapsed = time.perf_counter() - t0
    c = closed.per_stream_service1 + closed.per_stream_service2
    e = emp.per_stream_service1 + emp.per_stream_service2
    gaps = [abs(x - y) for x, y in zip(c, e)]
    ok = max(gaps) <= 0.02 and elapsed < 60
    pairs = ", ".join(f"s{i + 1} {x:.4f}/{y:.4f}" for i, (x, y) in enumerate(zip(c, e)))
    return ok, (
        f"per-stream outage closed/empirical {pairs}; max gap {max(gaps):.4f} (tol 0.02); "
        f"switch prob {closed.switch_probability:.4f}/{emp.switch_probability:.4f}; {elapsed:.1f}s"
    )


def criterion_5():
    config = _reference(tx_power=db_to_linear(40.0))
    profile = build_profile(config)
    nu = NoiseUncertainty.from_config(config)
    worst = 0.0
    pairs = (
        (lambda g, i: cdf_stage1(g, i, profile, config), lambda g, i: cdf_stage1_high_snr(g, i, profile, config)),
        (lambda g, i: cdf_stage2(g, i, profile, config, nu), lambda g, i: cdf_stage2_high_snr(g, i, profile, config, nu)),
    )
    for exact, approx in pairs:
        for i in range(config.m):
            lo = brentq(lambda x: exact(math.exp(x), i) - 0.01, -40, 40)
            hi = brentq(lambda x: exact(math.exp(x), i) - 0.99, -40, 40)
            for g in np.exp(np.linspace(lo, hi, 200)):
                worst = max(worst, abs(exact(g, i) - approx(g, i)))
    return worst <= 0.01, f"max |high-SNR - exact| over 1st-99th percentile, both stages: {worst:.2e} (tol 0.01)"


def _random_configs(count=24, seed=7):
    gen = np.random.default_rng(seed)
    configs = []
    for k in range(count):
        regime = k % 3
        m1 = int(gen.integers(1, 3))
        m2 = int(gen.integers(1, 3))
        n = m1 + m2 + int(gen.integers(0, 3))
        m = m1 + m2
        if regime == 0:  # distinct parameters
            d = tuple(np.round(np.sort(gen.uniform(0.05, 0.5, m)), 4))
            d = tuple(x * (1 + 0.01 * j) for j, x in enumerate(d))
        elif regime == 1:  # repeated parameters
            base = gen.uniform(0.05, 0.5, 2)
            d = tuple(float(base[j % 2]) for j in range(m))
        else:  # identical
            d = (float(gen.uniform(0.05, 0.5)),)
        configs.append(
            ScenarioConfig(
                n_rx=n,
                m1=m1,
                m2=m2,
                tx_power=db_to_linear(float(gen.uniform(0, 20))),
                distances=d,
                alpha=float(gen.uniform(0.6, 0.99)),
            )
        )
    return configs


def criterion_6():
    failures = []
    configs = _random_configs()
    for idx, config in enumerate(configs):
        profile = build_profile(config)
        nu = NoiseUncertainty.from_config(config)
        funcs = [lambda g, i=i: cdf_stage1(g, i, profile, config) for i in range(config.m)]
        funcs += [lambda g, i=i: cdf_stage2(g, i, profile, config, nu) for i in range(config.m)]
        for f in funcs:
            if f(0.0) > 1e-9:
                failures.append(f"cfg{idx}: F(0)")
            hi = 1.0
            while f(hi) < 1 - 1e-4 and hi < 1e12:
                hi *= 2
            if f(hi) < 1 - 1e-4:
                failures.append(f"cfg{idx}: upper tail")
            vals = [f(g) for g in np.linspace(0, hi, 200)]
            if np.any(np.diff(vals) < -1e-12):
                failures.append(f"cfg{idx}: monotone")
    # general path on equal parameters against an independent i.i.d. evaluation
    collapse = 0.0
    for lam, t, dof, g in ((0.3, 3, 1, 0.8), (1.2, 2, 2, 2.5), (0.05, 4, 0, 10.0)):
        collapse = max(collapse, abs(snr_cdf(g, 1.0, [lam] * t, dof, 1.0) - zf_cdf(g, 1.0, [lam] * t, dof, 1.0)))
    if collapse > 1e-10:
        failures.append(f"collapse {collapse:.1e}")
    ok = not failures
    return ok, (
        f"{len(configs)} random configs (distinct/repeated/identical), stage 1 and 2: "
        f"{'no violations' if ok else '; '.join(failures[:5])}; equal-parameter collapse gap {collapse:.1e}"
    )


def criterion_7():
    worst_pdf = 0.0
    worst_sum = 0.0
    for values in ((3.0, 2.0, 1.0), (2.0, 2.0, 1.0), (5.0, 1.0, 1.0, 1.0)):
        spec = residual_spectrum(values)
        worst_sum = max(worst_sum, abs(spec.coefficient_sum() - 1.0))
        ref = sum_density(values)
        for y in np.linspace(0.1, 20.0, 50):
            worst_pdf = max(worst_pdf, abs(sum_of_exponentials_pdf(y, spec) - ref(y)))
    ok = worst_pdf <= 1e-8 and worst_sum <= 1e-10
    return ok, f"density vs convolution max error {worst_pdf:.1e} (tol 1e-8); |sum X - 1| {worst_sum:.1e} (tol 1e-10)"


def criterion_8():
    parts = []
    ok = True
    for n, m1, a in ((64, 10, 0.8), (128, 10, 0.9999)):
        rep = convexity_certificate(n, m1, a)
        good = rep.objective_concave and rep.constraint_convex
        ok = ok and good
        parts.append(
            f"(N={n},a={a}) max obj d2 {max(rep.objective_second_diff):.2e}, "
            f"min con d2 {min(rep.constraint_second_diff):.2e}"
        )
    return ok, "; ".join(parts)


def criterion_9():
    spot = coherence_time_iid(10, 128, 0.9999).t_max
    square = coherence_time_iid(10, 10, 0.9999).t_max
    ms, ns, als = (5, 10, 20), (64, 128, 256), (0.99, 0.999, 0.9999)
    t = np.array([[[coherence_time_iid(m, n, a).t_max for a in als] for n in ns] for m in ms], dtype=float)
    violations = int(np.sum(np.diff(t, axis=0) > 0) + np.sum(np.diff(t, axis=1) < 0) + np.sum(np.diff(t, axis=2) < 0))
    ok = spot == 12746 and square == 0 and violations == 0
    return ok, f"spot value {spot} (expect 12746); N=M gives {square}; monotonicity violations {violations} over 3x3x3"


def criterion_10():
    diffs = []
    for db in np.arange(0.0, 31.0, 1.0):
        config = ScenarioConfig(
            n_rx=4,
            m1=2,
            m2=2,
            tx_power=db_to_linear(float(db)),
            distances=(0.95, 0.95, 0.75, 0.75),
            alpha=1.0,
            massive_limit=True,
        )
        rep = full_report(build_profile(config), config, NoiseUncertainty.from_config(config))
        diffs.append(rep.total_service1 - rep.total_service2)
    signs = np.sign(diffs)
    changes = np.flatnonzero(np.diff(signs) != 0)
    where = ", ".join(f"{int(k)}-{int(k) + 1} dB" for k in changes)
    ok = len(changes) > 0
    return ok, f"ideal CSI, N=4, M1=M2=2: P1-P2 changes sign {len(changes)} time(s) ({where or 'none'})"


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
            criterion_6, criterion_7, criterion_8, criterion_9, criterion_10]


@pytest.mark.parametrize("number", range(1, 11))
def test_criterion(number):
    passed, detail = CRITERIA[number - 1]()
    assert _report(number, passed, detail), RESULTS[number]


if __name__ == "__main__":
    failed = 0
    for k, fn in enumerate(CRITERIA, start=1):
        passed, detail = fn()
        failed += not _report(k, passed, detail)
    sys.exit(1 if failed else 0)
