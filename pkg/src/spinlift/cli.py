"""Command-line front end: scenario dispatch, config parsing and the
acceptance suite.

User-facing configuration uses plain Hz for frequencies (Omega/2pi) and
microseconds for times; everything is converted to angular rad/s and
seconds at this boundary.  Unknown keys are rejected by name.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass

import numpy as np

from .experiments import SCENARIOS, ScenarioError, run_scenario

TWO_PI = 2.0 * np.pi


class ConfigError(ValueError):
    """Raised for unknown keys, malformed values or unit violations."""


@dataclass(frozen=True)
class KeySpec:
    kind: str           # freq | time | float | nonneg | pos | int | str | intlist
    internal: str
    default: object     # in user units


_NOISE_KEYS = {
    "rabi_mismatch": KeySpec("nonneg", "rabi_mismatch", 0.0),
    "common_rabi_hz": KeySpec("freq_signed", "common_rabi_error", 0.0),
    "static_detuning_hz": KeySpec("freq", "static_detuning", 0.0),
    "zeeman_sigma_hz": KeySpec("freq", "zeeman_sigma", 0.0),
}

_ADIABATIC_KEYS = {
    "omega0_hz": KeySpec("freq_pos", "omega0", 40e3),
    "delta0_hz": KeySpec("freq_pos", "delta0", 60e3),
    "t_omega_us": KeySpec("time_pos", "t_omega", 200.0),
    "t_delta_us": KeySpec("time_pos", "t_delta", 300.0),
}

_TOL_KEY = {"tolerance": KeySpec("pos", "tolerance", 1e-9),
            "max_step_us": KeySpec("time_opt", "max_step", None)}

SCENARIO_KEYS: dict[str, dict[str, KeySpec]] = {
    "fig2e": {**_ADIABATIC_KEYS,
              "t_hold_us": KeySpec("time", "t_hold", 400.0),
              **_NOISE_KEYS, **_TOL_KEY},
    "fig3c": {"omega0_hz": _ADIABATIC_KEYS["omega0_hz"],
              "delta_omega_hz": KeySpec("freq_signed", "delta_omega", -10e3),
              **_TOL_KEY},
    "fig3d": {"omega0_hz": _ADIABATIC_KEYS["omega0_hz"], **_TOL_KEY},
    "fig4b": {**_ADIABATIC_KEYS, "shots": KeySpec("int", "shots", 200),
              **_NOISE_KEYS, **_TOL_KEY},
    "fig4c": {**_ADIABATIC_KEYS,
              "method": KeySpec("str", "method", "adiabatic"),
              "ns": KeySpec("intlist", "ns", [8, 16, 32, 64]),
              "shots": KeySpec("int", "shots", 10000),
              **_NOISE_KEYS, **_TOL_KEY},
    "ramsey": {"n_transfers": KeySpec("int", "n_transfers", 8),
               "shots": KeySpec("int0", "shots", 0),
               **_NOISE_KEYS, **_TOL_KEY},
    "verify-reversal": {"d": KeySpec("int", "d", 5),
                        "omega0_hz": _ADIABATIC_KEYS["omega0_hz"], **_TOL_KEY},
    "rotation-cycle": {},
    "static-error": {**_ADIABATIC_KEYS,
                     "rabi_mismatch": KeySpec("nonneg", "rabi_mismatch", 0.0015),
                     "static_detuning_hz": KeySpec("freq", "static_detuning", 3.0),
                     **_TOL_KEY},
}


@dataclass(frozen=True)
class RunConfig:
    """Validated scenario configuration; params are in rad/s and seconds."""

    scenario: str
    params: dict
    user_config: dict
    seed: int = 0
    out_dir: str | None = None


def _convert(key: str, spec: KeySpec, value):
    kind = spec.kind
    def fail(msg):
        raise ConfigError(f"invalid value for {key!r}: {msg} (got {value!r})")
    if kind == "time_opt":
        if value is None:
            return None
        kind = "time_pos"
    if kind in ("freq", "freq_pos", "freq_signed", "time", "time_pos",
                "float", "nonneg", "pos"):
        try:
            v = float(value)
        except (TypeError, ValueError):
            fail("expected a number")
        if not np.isfinite(v):
            fail("expected a finite number")
        if kind in ("freq", "time", "nonneg") and v < 0:
            fail("must be >= 0")
        if kind in ("freq_pos", "time_pos", "pos") and v <= 0:
            fail("must be > 0")
        if kind.startswith("freq"):
            return v * TWO_PI
        if kind.startswith("time"):
            return v * 1e-6
        return v
    if kind in ("int", "int0"):
        try:
            v = int(value)
        except (TypeError, ValueError):
            fail("expected an integer")
        if kind == "int" and v < 1:
            fail("must be >= 1")
        if kind == "int0" and v < 0:
            fail("must be >= 0")
        return v
    if kind == "str":
        return str(value)
    if kind == "intlist":
        if not isinstance(value, (list, tuple)):
            fail("expected a list of integers")
        try:
            return [int(x) for x in value]
        except (TypeError, ValueError):
            fail("expected a list of integers")
    raise AssertionError(f"unhandled key kind {kind}")


def parse_config(scenario: str, overrides: dict, seed: int = 0,
                 out_dir: str | None = None) -> RunConfig:
    """Validate user-unit overrides against the scenario's key table and
    convert to internal units; unknown keys are rejected by name."""
    if scenario not in SCENARIO_KEYS:
        raise ConfigError(f"unknown scenario {scenario!r}; "
                          f"known: {', '.join(sorted(SCENARIO_KEYS))}")
    spec_table = SCENARIO_KEYS[scenario]
    unknown = sorted(set(overrides) - set(spec_table))
    if unknown:
        raise ConfigError(f"unknown key(s) for scenario {scenario!r}: "
                          + ", ".join(repr(k) for k in unknown))
    user = {}
    params = {}
    for key, spec in spec_table.items():
        value = overrides.get(key, spec.default)
        params[spec.internal] = _convert(key, spec, value)
        user[key] = value
    return RunConfig(scenario=scenario, params=params, user_config=user,
                     seed=int(seed), out_dir=out_dir)


def run(config: RunConfig):
    """Execute the configured scenario; returns its ScenarioReport."""
    report = run_scenario(config.scenario, config.params, seed=config.seed,
                          out_dir=config.out_dir)
    if config.out_dir is not None:
        eff = {"scenario": config.scenario, "seed": config.seed,
               **config.user_config}
        path = os.path.join(config.out_dir,
                            f"{config.scenario}_{config.seed}_config.json")
        from .experiments import _write_atomic
        _write_atomic(path, json.dumps(eff, indent=2, sort_keys=True))
    return report


def list_scenarios() -> str:
    width = max(len(name) for name in SCENARIOS)
    lines = [f"{name:<{width}}  {desc}"
             for name, (desc, _) in sorted(SCENARIOS.items())]
    return "\n".join(lines)


def _parse_set_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def _cmd_run(args) -> int:
    overrides = {}
    scenario = args.scenario
    seed = args.seed
    out_dir = args.out
    if args.config:
        with open(args.config) as f:
            doc = json.load(f)
        if not isinstance(doc, dict):
            raise ConfigError("config file must hold a JSON object")
        scenario = doc.pop("scenario", scenario)
        if "seed" in doc:
            file_seed = doc.pop("seed")
            seed = file_seed if args.seed is None else args.seed
        overrides.update(doc)
    for item in args.set or []:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        key, _, value = item.partition("=")
        overrides[key.strip()] = _parse_set_value(value.strip())
    if scenario is None:
        raise ConfigError("no scenario given (use --scenario or the config file)")
    config = parse_config(scenario, overrides, seed=0 if seed is None else seed,
                          out_dir=out_dir)
    report = run(config)
    print(report.to_json())
    return 0


def _cmd_list(args) -> int:
    print(list_scenarios())
    return 0


def _cmd_acceptance(args) -> int:
    from .acceptance import run_all, format_table
    results = run_all(verbose=True)
    print(format_table(results))
    return 0 if all(r.passed for r in results) else 1


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="spinlift",
        description="Multi-level quantum control from two-level primitives "
                    "(SU(2) lift): scenario runner.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a scenario and write report/artifacts")
    p_run.add_argument("--scenario", help="scenario name (see 'list')")
    p_run.add_argument("--config", help="JSON config file")
    p_run.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="override a config key (repeatable)")
    p_run.add_argument("--seed", type=int, default=None)
    p_run.add_argument("--out", help="output directory for report and artifacts")
    p_run.set_defaults(func=_cmd_run)

    p_list = sub.add_parser("list", help="list available scenarios")
    p_list.set_defaults(func=_cmd_list)

    p_acc = sub.add_parser("acceptance", help="run the acceptance suite")
    p_acc.set_defaults(func=_cmd_acceptance)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ScenarioError) as exc:
        error_doc = {"error": type(exc).__name__, "message": str(exc)}
        print(json.dumps(error_doc), file=sys.stderr)
        if getattr(args, "out", None):
            from .experiments import _write_atomic
            _write_atomic(os.path.join(args.out, "error.json"),
                          json.dumps(error_doc, indent=2, sort_keys=True))
        return 2


if __name__ == "__main__":
    sys.exit(main())
