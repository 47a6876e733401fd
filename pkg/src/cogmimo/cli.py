"""Command-line front end: ``cogmimo <analyze|simulate|validate|plan|coherence>``."""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from .channel import ScenarioConfig, build_profile, db_to_linear
from .errors import (
    CogMimoError,
    ConsistencyError,
    IllConditionedError,
    NumericalInstabilityError,
    SingularMatrixError,
    TrialBudgetError,
)
from .montecarlo import simulate
from .outage import full_report
from .planner import coherence_time, coherence_time_iid, optimal_m2
from .scenario import parse_scenario
from .snr_stats import NoiseUncertainty, cdf_stage1, cdf_stage2

__all__ = [
    "CurveTable",
    "gamma_grid_db",
    "cmd_analyze",
    "cmd_simulate",
    "cmd_validate",
    "cmd_plan",
    "cmd_coherence",
    "main",
    "EXIT_OK",
    "EXIT_BREACH",
    "EXIT_INPUT",
    "EXIT_NUMERIC",
]

EXIT_OK, EXIT_BREACH, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2, 3

TABLE_N = (16, 32, 64, 128, 256, 512)
TABLE_ALPHA = (0.9999, 0.8, 0.6)
TABLE_M1 = 10

_NUMERIC_ERRORS = (
    NumericalInstabilityError,
    ConsistencyError,
    IllConditionedError,
    SingularMatrixError,
    TrialBudgetError,
)


def _cell(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, str):
        return value
    x = float(value)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    # repr is the shortest string that round-trips the double exactly
    return repr(x)


def _json_cell(value):
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, str):
        return value
    x = float(value)
    return x if math.isfinite(x) else _cell(x)


@dataclass
class CurveTable:
    columns: List[str]
    rows: List[list] = field(default_factory=list)

    def add(self, row: Sequence) -> None:
        if len(row) != len(self.columns):
            raise ValueError("row length does not match the header")
        self.rows.append(list(row))

    def column(self, name: str) -> list:
        k = self.columns.index(name)
        return [r[k] for r in self.rows]

    def to_csv(self) -> str:
        lines = [",".join(self.columns)]
        lines += [",".join(_cell(v) for v in row) for row in self.rows]
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        payload = {
            "columns": self.columns,
            "rows": [[_json_cell(v) for v in row] for row in self.rows],
        }
        return json.dumps(payload, indent=1) + "\n"

    def render(self, fmt: str) -> str:
        return self.to_json() if fmt == "json" else self.to_csv()


def gamma_grid_db(lo: float = -10.0, hi: float = 30.0, points: int = 41) -> np.ndarray:
    if points < 1:
        raise ValueError("need at least one grid point")
    if points > 1 and not hi > lo:
        raise ValueError("gamma-max-db must exceed gamma-min-db")
    return np.linspace(lo, hi, points) if points > 1 else np.array([float(lo)])


def _curve_columns(config: ScenarioConfig) -> List[str]:
    streams = [f"s{i + 1}" for i in range(config.m)]
    return (
        ["gamma_db"]
        + [f"cdf1_{s}" for s in streams]
        + [f"cdf2_{s}" for s in streams]
        + [f"out_{s}" for s in streams]
        + ["total_service1", "total_service2", "switch_probability"]
    )


def cmd_analyze(config: ScenarioConfig, grid_db: Sequence[float]) -> CurveTable:
    """Closed-form stage CDFs and outage figures along the threshold grid."""
    profile = build_profile(config)
    nu = NoiseUncertainty.from_config(config)
    table = CurveTable(_curve_columns(config))
    for g_db in grid_db:
        g = db_to_linear(float(g_db))
        c1 = [cdf_stage1(g, i, profile, config) for i in range(config.m)]
        c2 = [cdf_stage2(g, i, profile, config, nu) for i in range(config.m)]
        rep = full_report(profile, config, nu, gamma_th=g)
        outs = rep.per_stream_service1 + rep.per_stream_service2
        table.add(
            [float(g_db), *c1, *c2, *outs, rep.total_service1, rep.total_service2, rep.switch_probability]
        )
    return table


def _ecdf(samples: np.ndarray, grid: np.ndarray) -> np.ndarray:
    return np.searchsorted(np.sort(samples), grid, side="right") / len(samples)


def cmd_simulate(
    config: ScenarioConfig,
    grid_db: Sequence[float],
    gamma_t: Optional[float] = None,
    workers: int = 1,
    backend: Optional[str] = None,
) -> CurveTable:
    """Empirical counterpart of :func:`cmd_analyze` from one Monte Carlo batch."""
    profile = build_profile(config)
    nu = NoiseUncertainty.from_config(config)
    batch = simulate(profile, config, nu, gamma_t=gamma_t, workers=workers, backend=backend)
    grid = np.array([db_to_linear(float(g)) for g in grid_db])
    detected = batch.detected()
    stage2 = batch.stage2()
    m1 = config.m1
    curves = (
        [_ecdf(batch.stage1[:, i], grid) for i in range(config.m)]
        + [_ecdf(stage2[:, i], grid) for i in range(config.m)]
        + [_ecdf(detected[:, i], grid) for i in range(config.m)]
    )
    zero = np.zeros_like(grid)
    curves.append(_ecdf(detected[:, :m1].min(axis=1), grid) if m1 else zero)
    curves.append(_ecdf(detected[:, m1:].min(axis=1), grid) if config.m2 else zero)
    switch = float(batch.switched.mean())
    table = CurveTable(_curve_columns(config) + ["trial_count"])
    for k, g_db in enumerate(grid_db):
        table.add([float(g_db), *(float(c[k]) for c in curves), switch, batch.trials])
    return table


_CDF_PREFIXES = ("cdf1_", "cdf2_")


def cmd_validate(
    config: ScenarioConfig,
    grid_db: Sequence[float],
    tolerance: float,
    scope: str = "all",
    sim_gamma_t: Optional[float] = None,
    workers: int = 1,
    backend: Optional[str] = None,
):
    """Sup-norm gap between the two engines for every curve.

    ``scope="cdf"`` restricts the comparison to the forced-stage CDFs;
    ``sim_gamma_t`` overrides the simulator's switching threshold (negative
    control).  Returns ``(report_table, all_passed)``.
    """
    if scope not in ("cdf", "all"):
        raise ValueError("scope must be 'cdf' or 'all'")
    analytic = cmd_analyze(config, grid_db)
    empirical = cmd_simulate(config, grid_db, gamma_t=sim_gamma_t, workers=workers, backend=backend)
    report = CurveTable(["curve", "sup_norm", "tolerance", "passed"])
    ok = True
    for name in analytic.columns[1:]:
        if scope == "cdf" and not name.startswith(_CDF_PREFIXES):
            continue
        a = np.array(analytic.column(name), dtype=float)
        e = np.array(empirical.column(name), dtype=float)
        gap = float(np.max(np.abs(a - e)))
        passed = gap <= tolerance
        ok = ok and passed
        report.add([name, gap, float(tolerance), passed])
    return report, ok


def cmd_plan(
    n_list: Sequence[int] = TABLE_N,
    m1: int = TABLE_M1,
    alpha_list: Sequence[float] = TABLE_ALPHA,
    gamma_th: float = 1.0,
) -> CurveTable:
    """Optimal secondary stream count per ``(N, alpha)`` in the large-array
    regime (``p_hat = p``)."""
    table = CurveTable(["n", "alpha", "m1", "m2_star", "lambda", "objective", "constraint"])
    for a in alpha_list:
        for n in n_list:
            if n <= m1:
                table.add([int(n), float(a), int(m1), 0, math.nan, 0.0, math.nan])
                continue
            res = optimal_m2(int(n), int(m1), float(a), gamma_th=gamma_th)
            lam = math.nan if res.lambda_diag is None else res.lambda_diag
            con = math.nan if res.constraint is None else res.constraint
            table.add([int(n), float(a), int(m1), res.m2_star, lam, res.objective, con])
    return table


def cmd_coherence(
    m_list: Sequence[int],
    n_list: Sequence[int],
    alpha_list: Sequence[float],
    gamma_th_db_list: Sequence[float] = (0.0,),
) -> CurveTable:
    """Coherence time of equal-distance streams over a parameter grid."""
    table = CurveTable(["m", "n", "alpha", "gamma_th_db", "t_max", "pre_floor", "infeasible"])
    for g_db in gamma_th_db_list:
        for a in alpha_list:
            for m in m_list:
                for n in n_list:
                    res = coherence_time_iid(int(m), int(n), float(a), db_to_linear(float(g_db)))
                    t = res.t_max if res.infinite else int(res.t_max)
                    table.add([int(m), int(n), float(a), float(g_db), t, res.pre_floor, res.infeasible])
    return table


def _coherence_from_config(config: ScenarioConfig) -> CurveTable:
    res = coherence_time(build_profile(config), config)
    table = CurveTable(["m", "n", "alpha", "gamma_th_db", "t_max", "pre_floor", "infeasible"])
    t = res.t_max if res.infinite else int(res.t_max)
    g_db = 10.0 * math.log10(config.gamma_th)
    table.add([config.m, config.n_rx, config.alpha, g_db, t, res.pre_floor, res.infeasible])
    return table


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------
def _list_of(kind):
    def parse(text: str):
        try:
            return [kind(t) for t in text.split(",") if t.strip()]
        except ValueError:
            raise argparse.ArgumentTypeError(f"malformed list {text!r}") from None

    return parse


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="scenario file")
    common.add_argument("--gamma-min-db", type=float, default=-10.0)
    common.add_argument("--gamma-max-db", type=float, default=30.0)
    common.add_argument("--points", type=int, default=41)
    common.add_argument("--out", help="output path (default: stdout)")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--tolerance", type=float, default=0.015)
    common.add_argument("--workers", type=int, default=1)
    common.add_argument("--backend", choices=("cython", "numpy"))

    parser = _Parser(prog="cogmimo", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("analyze", parents=[common], help="closed-form curves")
    sub.add_parser("simulate", parents=[common], help="Monte Carlo curves")
    val = sub.add_parser("validate", parents=[common], help="compare both engines")
    val.add_argument("--scope", choices=("cdf", "all"), default="all")
    val.add_argument("--sim-gamma-t-db", type=float, help="simulator switching threshold override")
    plan = sub.add_parser("plan", parents=[common], help="optimal secondary stream count")
    plan.add_argument("--n-list", type=_list_of(int))
    plan.add_argument("--alpha-list", type=_list_of(float))
    plan.add_argument("--m1", type=int)
    coh = sub.add_parser("coherence", parents=[common], help="coherence time")
    coh.add_argument("--m-list", type=_list_of(int))
    coh.add_argument("--n-list", type=_list_of(int))
    coh.add_argument("--alpha-list", type=_list_of(float))
    coh.add_argument("--gamma-th-db-list", type=_list_of(float))
    return parser


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _run(args) -> int:
    config = parse_scenario(args.config) if args.config else None
    if args.command in ("analyze", "simulate", "validate") and config is None:
        raise ValueError(f"{args.command} needs --config")

    if args.command == "plan":
        have_lists = args.n_list or args.alpha_list or args.m1 is not None
        if config is not None and not have_lists:
            table = cmd_plan([config.n_rx], config.m1, [config.alpha], config.gamma_th)
        else:
            table = cmd_plan(
                args.n_list or TABLE_N,
                TABLE_M1 if args.m1 is None else args.m1,
                args.alpha_list or TABLE_ALPHA,
            )
        _emit(table.render(args.format), args.out)
        return EXIT_OK

    if args.command == "coherence":
        have_lists = args.m_list or args.n_list or args.alpha_list or args.gamma_th_db_list
        if config is not None and not have_lists:
            table = _coherence_from_config(config)
        else:
            table = cmd_coherence(
                args.m_list or [10],
                args.n_list or list(TABLE_N),
                args.alpha_list or [0.9999],
                args.gamma_th_db_list or [0.0],
            )
        _emit(table.render(args.format), args.out)
        return EXIT_OK

    grid = gamma_grid_db(args.gamma_min_db, args.gamma_max_db, args.points)
    if args.command == "analyze":
        table = cmd_analyze(config, grid)
    elif args.command == "simulate":
        table = cmd_simulate(config, grid, workers=args.workers, backend=args.backend)
    else:
        sim_gt = None if args.sim_gamma_t_db is None else db_to_linear(args.sim_gamma_t_db)
        table, ok = cmd_validate(
            config, grid, args.tolerance, args.scope, sim_gt, args.workers, args.backend
        )
        _emit(table.render(args.format), args.out)
        return EXIT_OK if ok else EXIT_BREACH
    _emit(table.render(args.format), args.out)
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _run(args)
    except _NUMERIC_ERRORS as exc:
        print(f"cogmimo: numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (CogMimoError, ValueError, OSError) as exc:
        print(f"cogmimo: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
