"""Plain-text scenario files: ``key = value`` per line, ``#`` comments."""

from __future__ import annotations

from pathlib import Path
from typing import Dict, Tuple, Union

from .channel import ScenarioConfig, aging_coefficient, db_to_linear
from .errors import CogMimoError, ScenarioError

__all__ = ["parse_scenario", "parse_scenario_text", "SCENARIO_KEYS"]

SCENARIO_KEYS = (
    "n_rx",
    "m1",
    "m2",
    "pt_over_n0_db",
    "distances_km",
    "pathloss_exponents",
    "alpha",
    "fd_ts",
    "noise_uncertainty_db",
    "gamma_th_db",
    "gamma_t_db",
    "trials",
    "seed",
    "massive_limit",
)

_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def _int(text: str) -> int:
    value = float(text)
    if not value.is_integer():
        raise ValueError(f"expected an integer, got {text!r}")
    return int(value)


def _float_list(text: str) -> Tuple[float, ...]:
    items = [t.strip() for t in text.split(",")]
    if not items or any(not t for t in items):
        raise ValueError(f"malformed list {text!r}")
    return tuple(float(t) for t in items)


def _bool(text: str) -> bool:
    low = text.lower()
    if low in _TRUE:
        return True
    if low in _FALSE:
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


_CONVERTERS = {
    "n_rx": _int,
    "m1": _int,
    "m2": _int,
    "pt_over_n0_db": float,
    "distances_km": _float_list,
    "pathloss_exponents": _float_list,
    "alpha": float,
    "fd_ts": float,
    "noise_uncertainty_db": float,
    "gamma_th_db": float,
    "gamma_t_db": float,
    "trials": _int,
    "seed": _int,
    "massive_limit": _bool,
}


def parse_scenario_text(text: str) -> ScenarioConfig:
    """Parse scenario text into a validated configuration.

    Omitted keys take the macro-cell defaults: 10 dB transmit SNR, path-loss
    exponent 4, 2 dB noise uncertainty and 0 dB thresholds.
    """
    values: Dict[str, object] = {}
    lines: Dict[str, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ScenarioError(f"expected 'key = value', got {raw.strip()!r}", lineno)
        key, _, value = (part.strip() for part in line.partition("="))
        if key not in _CONVERTERS:
            raise ScenarioError(f"unknown key {key!r}", lineno)
        if key in values:
            raise ScenarioError(f"duplicate key {key!r} (first on line {lines[key]})", lineno)
        if not value:
            raise ScenarioError(f"missing value for {key!r}", lineno)
        try:
            values[key] = _CONVERTERS[key](value)
        except ValueError as exc:
            raise ScenarioError(f"bad value for {key!r}: {exc}", lineno) from None
        lines[key] = lineno

    if "alpha" in values and "fd_ts" in values:
        raise ScenarioError(
            "alpha and fd_ts are mutually exclusive", max(lines["alpha"], lines["fd_ts"])
        )
    for key in ("n_rx", "m1", "distances_km"):
        if key not in values:
            raise ScenarioError(f"{key} required")

    if "fd_ts" in values:
        try:
            alpha = aging_coefficient(values["fd_ts"])
        except CogMimoError as exc:
            raise ScenarioError(str(exc), lines["fd_ts"]) from None
    else:
        alpha = values.get("alpha", 1.0)

    kwargs = dict(
        n_rx=values["n_rx"],
        m1=values["m1"],
        m2=values.get("m2", 0),
        tx_power=db_to_linear(values.get("pt_over_n0_db", 10.0)),
        distances=values["distances_km"],
        pathloss_exponents=values.get("pathloss_exponents", (4.0,)),
        alpha=alpha,
        noise_uncertainty_db=values.get("noise_uncertainty_db", 2.0),
        gamma_th=db_to_linear(values.get("gamma_th_db", 0.0)),
        gamma_t=db_to_linear(values.get("gamma_t_db", 0.0)),
        trials=values.get("trials", 100_000),
        seed=values.get("seed", 0),
        massive_limit=values.get("massive_limit", False),
    )
    return ScenarioConfig(**kwargs)


def parse_scenario(path: Union[str, Path]) -> ScenarioConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise ScenarioError(f"cannot read scenario file {path}: {exc}") from None
    return parse_scenario_text(text)
