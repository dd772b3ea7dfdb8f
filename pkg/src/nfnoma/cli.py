"""Command-line entry points: ``run`` (Monte Carlo sweeps), ``gainmap``
(beam pattern rasterisation) and ``validate`` (config check).

Configuration is JSON with units spelled out in key names (``noise_dbm``,
``pmax_dbm``, ``radius_ranges_m``); unknown keys are rejected.  Powers are
converted to watts once at parse time.  Outputs are CSV with 9-significant-
digit, locale-independent numbers, so identical configs and seeds reproduce
byte-identical files.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .analog import AntennaSplit, focused_beamformer, gain_map, gain_map_csv, split_beamformer
from .csvio import sig9, write_csv
from .geometry import ArrayGeometry, UserLocation
from .scenarios import (
    ALL_SCHEMES,
    SCHEMES_SINGLE,
    SCHEMES_SPLIT,
    ScenarioConfig,
    aggregate_rows,
    dbm_to_watts,
    monte_carlo,
)
from .solver import SolverOptions

log = logging.getLogger("nfnoma.cli")


class ConfigError(ValueError):
    """Configuration rejected; the message names the offending field."""


@dataclass
class RunConfig:
    scenario: ScenarioConfig
    sweep_variable: str = "pmax_dbm"
    sweep_values: tuple = (24.0, 28.0, 32.0, 36.0, 40.0, 44.0)
    schemes: tuple = SCHEMES_SINGLE
    trials: int = 50
    out_dir: str = "results"
    threads: int = 1
    solver: SolverOptions = field(default_factory=SolverOptions)


_SCENARIO_KEYS = {
    "framework": str,
    "seed": int,
    "num_antennas": int,
    "num_rf_chains": int,
    "carrier_ghz": (int, float),
    "spacing_m": (int, float),
    "noise_dbm": (int, float),
    "pmax_dbm": (int, float),
    "rate_min_high": (int, float),
    "rate_min_low": (int, float),
    "aod_offset_deg": (int, float),
    "n_min_fraction": (int, float),
    "h_user": str,
    "angle_ranges_deg": list,
    "radius_ranges_m": list,
    "same_angle_pairs": list,
    "eta_scale": (int, float),
    "matching_low_power_fraction": (int, float),
}

_RUN_KEYS = {
    "sweep": dict,
    "schemes": list,
    "trials": int,
    "out_dir": str,
    "threads": int,
    "solver": dict,
}

_SOLVER_KEYS = {
    "tolerance": (int, float),
    "fp_tolerance": (int, float),
    "fp_max_iterations": int,
    "max_newton_steps": int,
}

_SWEEP_VARIABLES = ("pmax_dbm", "num_antennas")


def _expect(data: dict, key: str, types, path: str):
    value = data[key]
    if isinstance(types, type):
        types = (types,)
    if bool not in types and isinstance(value, bool):
        raise ConfigError(f"{path}{key}: expected {types}, got a boolean")
    if not isinstance(value, tuple(types)):
        raise ConfigError(f"{path}{key}: expected {types}, got {type(value).__name__}")
    return value


def _range_list(raw, key: str) -> tuple:
    out = []
    for i, pair in enumerate(raw):
        if not isinstance(pair, (list, tuple)) or len(pair) != 2:
            raise ConfigError(f"{key}[{i}]: expected a [low, high] pair")
        lo, hi = pair
        if not isinstance(lo, (int, float)) or not isinstance(hi, (int, float)):
            raise ConfigError(f"{key}[{i}]: bounds must be numbers")
        out.append((float(lo), float(hi)))
    return tuple(out)


def parse_config(data: dict) -> RunConfig:
    """Validate a configuration mapping and fill defaults.

    Every key is checked against the schema; unknown keys and out-of-range
    physics values are rejected with the offending field named.
    """
    if not isinstance(data, dict):
        raise ConfigError("top level: expected a JSON object")
    known = set(_SCENARIO_KEYS) | set(_RUN_KEYS)
    for key in data:
        if key not in known:
            raise ConfigError(f"unknown key {key!r}")

    sc: dict = {}
    if "framework" in data:
        sc["framework"] = _expect(data, "framework", str, "")
    else:
        sc["framework"] = "single"
    sc["seed"] = int(_expect(data, "seed", int, "")) if "seed" in data else 0

    if "carrier_ghz" in data:
        ghz = float(_expect(data, "carrier_ghz", (int, float), ""))
        if not 0.1 <= ghz <= 3000.0:
            raise ConfigError(f"carrier_ghz: {ghz} is outside the plausible 0.1..3000 range")
        sc["wavelength"] = 299_792_458.0 / (ghz * 1e9)
    if "spacing_m" in data:
        spacing = float(_expect(data, "spacing_m", (int, float), ""))
        if spacing <= 0:
            raise ConfigError(f"spacing_m: must be positive, got {spacing}")
        sc["spacing"] = spacing
    if "num_antennas" in data:
        n = _expect(data, "num_antennas", int, "")
        if n < 1:
            raise ConfigError(f"num_antennas: must be at least 1, got {n}")
        sc["num_antennas"] = n
    if "num_rf_chains" in data:
        m = _expect(data, "num_rf_chains", int, "")
        if m < 1:
            raise ConfigError(f"num_rf_chains: must be at least 1, got {m}")
        sc["num_rf_chains"] = m
    if "noise_dbm" in data:
        noise = float(_expect(data, "noise_dbm", (int, float), ""))
        if not -200.0 <= noise <= 0.0:
            raise ConfigError(f"noise_dbm: {noise} is outside the plausible -200..0 range")
        sc["noise_w"] = dbm_to_watts(noise)
    if "pmax_dbm" in data:
        sc["p_max_w"] = dbm_to_watts(float(_expect(data, "pmax_dbm", (int, float), "")))
    for key, dest in (("rate_min_high", "rate_min_high"), ("rate_min_low", "rate_min_low")):
        if key in data:
            rate = float(_expect(data, key, (int, float), ""))
            if rate < 0:
                raise ConfigError(f"{key}: must be nonnegative, got {rate}")
            sc[dest] = rate
    if "aod_offset_deg" in data:
        off = float(_expect(data, "aod_offset_deg", (int, float), ""))
        if not 0.0 <= off < 10.0:
            raise ConfigError(f"aod_offset_deg: {off} is outside the plausible [0, 10) range")
        sc["aod_offset_deg"] = off
    if "n_min_fraction" in data:
        frac = float(_expect(data, "n_min_fraction", (int, float), ""))
        if not 0.0 < frac < 0.5:
            raise ConfigError(f"n_min_fraction: must lie in (0, 0.5), got {frac}")
        sc["n_min_fraction"] = frac
    if "h_user" in data:
        sc["h_user"] = _expect(data, "h_user", str, "")
    if "angle_ranges_deg" in data:
        sc["angle_ranges_deg"] = _range_list(data["angle_ranges_deg"], "angle_ranges_deg")
    if "radius_ranges_m" in data:
        sc["radius_ranges_m"] = _range_list(data["radius_ranges_m"], "radius_ranges_m")
    if "same_angle_pairs" in data:
        pairs = []
        for i, pair in enumerate(data["same_angle_pairs"]):
            if not isinstance(pair, (list, tuple)) or len(pair) != 2:
                raise ConfigError(f"same_angle_pairs[{i}]: expected a [copy, source] pair")
            pairs.append((int(pair[0]), int(pair[1])))
        sc["same_angle_pairs"] = tuple(pairs)
    if "eta_scale" in data:
        sc["eta_scale"] = float(_expect(data, "eta_scale", (int, float), ""))
    if "matching_low_power_fraction" in data:
        frac = float(_expect(data, "matching_low_power_fraction", (int, float), ""))
        if not 0.0 < frac < 1.0:
            raise ConfigError(f"matching_low_power_fraction: must lie in (0, 1), got {frac}")
        sc["matching_low_power_fraction"] = frac

    try:
        scenario = ScenarioConfig(**sc)
    except ValueError as err:
        raise ConfigError(str(err)) from err

    cfg = RunConfig(scenario=scenario)
    cfg.schemes = SCHEMES_SINGLE if scenario.framework == "single" else SCHEMES_SPLIT

    if "sweep" in data:
        sweep = _expect(data, "sweep", dict, "")
        for key in sweep:
            if key not in ("variable", "values"):
                raise ConfigError(f"sweep.{key}: unknown key")
        variable = sweep.get("variable", "pmax_dbm")
        if variable not in _SWEEP_VARIABLES:
            raise ConfigError(f"sweep.variable: must be one of {_SWEEP_VARIABLES}, got {variable!r}")
        values = sweep.get("values", list(cfg.sweep_values))
        if not isinstance(values, list) or not values:
            raise ConfigError("sweep.values: expected a non-empty list")
        for i, v in enumerate(values):
            if not isinstance(v, (int, float)) or isinstance(v, bool):
                raise ConfigError(f"sweep.values[{i}]: expected a number")
            if variable == "num_antennas" and (int(v) != v or v < 1):
                raise ConfigError(f"sweep.values[{i}]: antenna counts must be positive integers")
        cfg.sweep_variable = variable
        cfg.sweep_values = tuple(values)
    if "schemes" in data:
        schemes = _expect(data, "schemes", list, "")
        for i, s in enumerate(schemes):
            if s not in ALL_SCHEMES:
                raise ConfigError(f"schemes[{i}]: unknown scheme {s!r}; choose from {ALL_SCHEMES}")
        if not schemes:
            raise ConfigError("schemes: expected at least one scheme")
        cfg.schemes = tuple(schemes)
    if "trials" in data:
        trials = _expect(data, "trials", int, "")
        if trials < 1:
            raise ConfigError(f"trials: must be positive, got {trials}")
        cfg.trials = trials
    if "out_dir" in data:
        cfg.out_dir = _expect(data, "out_dir", str, "")
    if "threads" in data:
        threads = _expect(data, "threads", int, "")
        if threads < 1:
            raise ConfigError(f"threads: must be positive, got {threads}")
        cfg.threads = threads
    if "solver" in data:
        sol = _expect(data, "solver", dict, "")
        for key in sol:
            if key not in _SOLVER_KEYS:
                raise ConfigError(f"solver.{key}: unknown key")
            _expect(sol, key, _SOLVER_KEYS[key], "solver.")
        kwargs = {k: sol[k] for k in sol}
        if "tolerance" in kwargs and kwargs["tolerance"] <= 0:
            raise ConfigError("solver.tolerance: must be positive")
        cfg.solver = SolverOptions(**kwargs)
    return cfg


def load_config(path: str) -> dict:
    """Read a JSON config from a file path or '-' for stdin."""
    if path == "-":
        text = sys.stdin.read()
    else:
        text = Path(path).read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as err:
        raise ConfigError(f"config is not valid JSON: {err}") from err


def config_to_run(args) -> RunConfig:
    data = load_config(args.config) if args.config else {}
    if args.seed is not None:
        data["seed"] = args.seed
    cfg = parse_config(data)
    if args.trials is not None:
        cfg.trials = args.trials
    if args.out is not None:
        cfg.out_dir = args.out
    if args.threads is not None:
        cfg.threads = args.threads
    return cfg


RESULT_HEADER = [
    "sweep_var", "value", "scheme", "metric", "mean", "stderr", "n_feasible", "n_total",
]


def results_rows_to_csv(rows) -> tuple[list[str], list[list[str]]]:
    out = []
    for row in rows:
        out.append(
            [
                row["sweep_var"],
                sig9(row["value"]),
                row["scheme"],
                row["metric"],
                sig9(row["mean"]),
                sig9(row["stderr"]),
                str(row["n_feasible"]),
                str(row["n_total"]),
            ]
        )
    return RESULT_HEADER, out


def cmd_run(args) -> int:
    try:
        cfg = config_to_run(args)
    except (ConfigError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    if args.dry_run:
        print(
            f"config ok: framework={cfg.scenario.framework} "
            f"sweep={cfg.sweep_variable}={list(cfg.sweep_values)} "
            f"schemes={list(cfg.schemes)} trials={cfg.trials} seed={cfg.scenario.seed}"
        )
        return 0
    points = monte_carlo(
        cfg.scenario,
        cfg.sweep_variable,
        cfg.sweep_values,
        cfg.schemes,
        cfg.trials,
        threads=cfg.threads,
    )
    rows = aggregate_rows(points, cfg.schemes)
    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    out_path = out_dir / "results.csv"
    header, body = results_rows_to_csv(rows)
    write_csv(out_path, header, body)
    print(f"wrote {out_path}")
    return 0


def _parse_beam(spec: str, num_fields: int, flag: str):
    parts = spec.split(",")
    if len(parts) != num_fields:
        raise ConfigError(f"{flag}: expected {num_fields} comma-separated values, got {spec!r}")
    try:
        return [float(p) for p in parts]
    except ValueError as err:
        raise ConfigError(f"{flag}: {err}") from err


def cmd_gainmap(args) -> int:
    try:
        geometry = ArrayGeometry.half_wavelength(
            args.num_antennas, 299_792_458.0 / (args.carrier_ghz * 1e9)
        )
        beams = []
        for spec in args.beam or []:
            r, theta = _parse_beam(spec, 2, "--beam")
            beams.append(focused_beamformer(geometry, UserLocation.from_degrees(r, theta)))
        for spec in args.split_beam or []:
            rh, th, rl, tl, nh, nl = _parse_beam(spec, 6, "--split-beam")
            beams.append(
                split_beamformer(
                    geometry,
                    AntennaSplit(int(nh), int(nl)),
                    UserLocation.from_degrees(rh, th),
                    UserLocation.from_degrees(rl, tl),
                )
            )
        if not beams:
            raise ConfigError("need at least one --beam or --split-beam")
        r_range = (args.r_min, args.r_max)
        angle_range = (math.radians(args.theta_min), math.radians(args.theta_max))
        combined = None
        for weights in beams:
            gmap = gain_map(weights, geometry, r_range, angle_range, args.resolution)
            combined = gmap if combined is None else type(gmap)(
                radii=gmap.radii, angles=gmap.angles,
                values=np.maximum(combined.values, gmap.values),
            )
        Path(args.out).write_text(gain_map_csv(combined))
    except (ConfigError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    print(f"wrote {args.out}")
    return 0


def cmd_validate(args) -> int:
    try:
        cfg = config_to_run(args)
    except (ConfigError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    sc = cfg.scenario
    print(
        "config ok\n"
        f"  framework: {sc.framework}\n"
        f"  antennas: {sc.num_antennas}, rf chains: {sc.num_rf_chains}\n"
        f"  wavelength: {sc.wavelength:.6g} m, noise: {sc.noise_w:.6g} W\n"
        f"  sweep: {cfg.sweep_variable} over {list(cfg.sweep_values)}\n"
        f"  schemes: {list(cfg.schemes)}\n"
        f"  trials: {cfg.trials}, seed: {sc.seed}"
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nfnoma",
        description="Near-field NOMA downlink simulator and optimizer",
    )
    parser.add_argument("--version", action="version", version=f"nfnoma {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="execute a Monte Carlo sweep and write results CSV")
    run.add_argument("--config", help="JSON config path, or '-' for stdin")
    run.add_argument("--seed", type=int, help="override the config seed")
    run.add_argument("--trials", type=int, help="override the trial count")
    run.add_argument("--out", help="output directory")
    run.add_argument("--threads", type=int, help="parallel trial workers")
    run.add_argument("--dry-run", action="store_true", help="validate and plan without computing")
    run.set_defaults(func=cmd_run)

    gm = sub.add_parser("gainmap", help="rasterise beam gain maps to CSV")
    gm.add_argument("--num-antennas", type=int, required=True)
    gm.add_argument("--carrier-ghz", type=float, default=30.0)
    gm.add_argument("--beam", action="append", metavar="R,THETA_DEG",
                    help="single-focus beam; repeatable")
    gm.add_argument("--split-beam", action="append", metavar="RH,TH,RL,TL,NH,NL",
                    help="two-focus beam with sub-array sizes; repeatable")
    gm.add_argument("--r-min", type=float, default=5.0)
    gm.add_argument("--r-max", type=float, default=100.0)
    gm.add_argument("--theta-min", type=float, default=-60.0)
    gm.add_argument("--theta-max", type=float, default=60.0)
    gm.add_argument("--resolution", type=int, default=400)
    gm.add_argument("--out", required=True)
    gm.set_defaults(func=cmd_gainmap)

    val = sub.add_parser("validate", help="check a config file and print the effective settings")
    val.add_argument("--config", help="JSON config path, or '-' for stdin")
    val.add_argument("--seed", type=int)
    val.add_argument("--trials", type=int)
    val.add_argument("--out")
    val.add_argument("--threads", type=int)
    val.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    level = os.environ.get("NF_NOMA_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING))
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
