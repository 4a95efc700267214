"""Command-line runner.

Every subcommand writes plot-ready CSV (9 significant digits, LF line
endings) to ``--output`` or stdout. With ``--output`` a JSON manifest with
all effective settings is written next to it as ``<output>.manifest.json``.

Exit codes: 0 success, 2 configuration error, 3 physics-domain error,
4 truncation or size cap exceeded. Failures print one JSON line to stderr.
"""
from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .dynamics import (concurrence_trace, get_evolution, trace_columns, trace_record)
from .entanglement import BELL_LABELS, bell_fit, concurrence, detect_sudden_death
from .model import ModelParams, PhysicsDomainError, degeneracy_points, energy_sweep
from .oracle import ExactEvolution, FockTruncation, OracleCapacityError
from .states import (DEFAULT_EPSILON, InitialNoonState, TruncationError,
                     hypergeometric_identity_check)

EXIT_OK, EXIT_CONFIG, EXIT_DOMAIN, EXIT_CAP = 0, 2, 3, 4

MODES = ("spectrum", "simulate", "bellfit", "oracle-compare", "degeneracy", "identity-check")

DEFAULTS = {
    "omega": 1.0,
    "delta": 0.15,
    "lambda": 0.1,
    "nu": 0.5,
    "c-re": 0.0,
    "c-im": 0.0,
    "n": 1,
    "t-max": 100.0,
    "steps": 101,
    "t": 0.0,
    "epsilon": DEFAULT_EPSILON,
    "seed": 0,
    "n0": 0,
    "n1": 0,
    "lambda-max": 0.2,
    "n-max-local": 20,
    "nmax": 60,
}
_INT_KEYS = {"n", "steps", "seed", "n0", "n1", "n-max-local", "nmax"}


class ConfigError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    if isinstance(x, str):
        return x
    return f"{float(x):.9g}"


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cavity-noon", description="Two-cavity ultrastrong-coupling simulator")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="mode", required=True, parser_class=_Parser)
    for mode in MODES:
        p = sub.add_parser(mode)
        p.add_argument("--config", help="flat JSON file; flags override its values")
        p.add_argument("--output", help="CSV/JSON output path (default: stdout)")
        for key, default in DEFAULTS.items():
            kind = int if key in _INT_KEYS else float
            p.add_argument(f"--{key}", dest=key.replace("-", "_"), type=kind,
                           default=argparse.SUPPRESS, help=f"default {default}")
    return parser


def resolve_config(args: argparse.Namespace) -> dict:
    cfg = dict(DEFAULTS)
    if getattr(args, "config", None):
        try:
            loaded = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(loaded, dict):
            raise ConfigError("config file must hold a flat JSON object")
        for key, value in loaded.items():
            if key not in DEFAULTS and key != "output":
                raise ConfigError(f"unknown config key {key!r}")
            cfg[key] = value
    for key in DEFAULTS:
        attr = key.replace("-", "_")
        if hasattr(args, attr):
            cfg[key] = getattr(args, attr)
    if getattr(args, "output", None):
        cfg["output"] = args.output
    for key in DEFAULTS:
        value = cfg[key]
        try:
            cfg[key] = int(value) if key in _INT_KEYS else float(value)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{key} must be numeric, got {value!r}") from exc
        if key not in _INT_KEYS and not np.isfinite(cfg[key]):
            raise ConfigError(f"{key} must be finite")
    if cfg["steps"] < 1:
        raise ConfigError("steps must be >= 1")
    if not 0 < cfg["epsilon"] < 1:
        raise ConfigError("epsilon must lie in (0, 1)")
    if cfg["n"] < 0:
        raise ConfigError("n must be non-negative")
    cfg["mode"] = args.mode
    return cfg


def _params(cfg) -> ModelParams:
    return ModelParams(cfg["omega"], cfg["delta"], cfg["lambda"], cfg["nu"])


def _state(cfg) -> InitialNoonState:
    try:
        return InitialNoonState(cfg["n"], complex(cfg["c-re"], cfg["c-im"]))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _time_grid(cfg) -> np.ndarray:
    if cfg["t-max"] < 0:
        raise ConfigError("t-max must be non-negative")
    return np.linspace(0.0, cfg["t-max"], cfg["steps"])


def run_spectrum(cfg, manifest):
    params_ok = _params(cfg.copy() | {"lambda": 0.0})
    lambdas = np.linspace(0.0, cfg["lambda-max"], cfg["steps"])
    rows = energy_sweep(params_ok.omega, params_ok.delta, params_ok.nu, (cfg["n0"], cfg["n1"]), lambdas)
    manifest["block"] = [cfg["n0"], cfg["n1"]]
    header = ["lambda", "E0", "E1", "Eplus", "Eminus", "P0", "P1", "Pplus", "Pminus"]
    return header, [[r.lam, r.E0, r.E1, r.Eplus, r.Eminus, *r.parities] for r in rows]


def run_degeneracy(cfg, manifest):
    if cfg["lambda-max"] <= 0:
        raise ConfigError("lambda-max must be positive")
    # validates omega and nu
    ModelParams(cfg["omega"], cfg["delta"], 0.0, cfg["nu"])
    pts = degeneracy_points(cfg["omega"], cfg["nu"], (cfg["n0"], cfg["n1"]), cfg["lambda-max"])
    manifest["block"] = [cfg["n0"], cfg["n1"]]
    return ["lambda", "mode", "laguerre_order", "zero_index"], [list(p) for p in pts]


def run_simulate(cfg, manifest):
    state, params = _state(cfg), _params(cfg)
    grid = _time_grid(cfg)
    rows = concurrence_trace(state, params, grid, cfg["epsilon"])
    evo = get_evolution(state, params, cfg["epsilon"])
    report = detect_sudden_death([(r.omega_t, r.concurrence) for r in rows])
    manifest.update(nmax=evo.nmax, captured_weight=evo.captured_weight,
                    sudden_death_intervals=[list(iv) for iv in report.intervals],
                    longest_sudden_death=report.longest_duration)
    return trace_columns(), [trace_record(r) for r in rows]


def run_bellfit(cfg, manifest):
    state, params = _state(cfg), _params(cfg)
    evo = get_evolution(state, params, cfg["epsilon"])
    rho = evo.density(cfg["t"])
    fit = bell_fit(rho)
    manifest.update(nmax=evo.nmax, captured_weight=evo.captured_weight)
    return {
        "omega_t": cfg["t"],
        "coefficients": {label: {"re": float(c.real), "im": float(c.imag)}
                         for label, c in zip(BELL_LABELS, fit.coefficients)},
        "distance": fit.distance,
        "dominant": fit.dominant_label,
        "dominant_magnitude": fit.dominant_magnitude,
        "degenerate": fit.degenerate,
        "concurrence": concurrence(rho),
    }


def run_oracle_compare(cfg, manifest):
    state, params = _state(cfg), _params(cfg)
    grid = _time_grid(cfg)
    trunc = FockTruncation(cfg["n-max-local"])
    exact = ExactEvolution(params, trunc).run(state, grid)
    evo = get_evolution(state, params, cfg["epsilon"])
    adiabatic = evo.rho_many(grid)
    rows = []
    for t, ra, re_ in zip(grid, adiabatic, exact.rhos):
        rows.append([t, float(np.max(np.abs(ra - re_))), concurrence(ra), concurrence(re_)])
    manifest.update(nmax=evo.nmax, captured_weight=evo.captured_weight,
                    fock_dimension=trunc.dimension, leakage=exact.leakage,
                    reliable=exact.reliable, energy_drift=exact.energy_drift,
                    norm_drift=exact.norm_drift, parity_drift=exact.parity_drift,
                    max_deviation=max((r[1] for r in rows), default=0.0))
    return ["omega_t", "max_deviation", "concurrence_adiabatic", "concurrence_exact"], rows


def run_identity_check(cfg, manifest):
    params = _params(cfg)
    rows = []
    for mode, omega_j in ((0, params.Omega0), (1, params.Omega1)):
        x = 2.0 * params.lam ** 2 / omega_j ** 2
        if x <= 0:
            raise ConfigError("identity check needs lambda > 0")
        for idx in itertools.product(range(4), repeat=4):
            lhs, rhs = hypergeometric_identity_check(*idx, x, cfg["nmax"])
            err = abs(lhs / rhs - 1.0) if rhs else abs(lhs)
            rows.append([mode, *idx, x, lhs, rhs, err])
    manifest["max_index"] = 3
    return ["mode", "n0", "n1", "n0p", "n1p", "x", "lhs", "rhs", "error"], rows


RUNNERS = {
    "spectrum": run_spectrum,
    "simulate": run_simulate,
    "bellfit": run_bellfit,
    "oracle-compare": run_oracle_compare,
    "degeneracy": run_degeneracy,
    "identity-check": run_identity_check,
}


def render_csv(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def execute(cfg: dict) -> dict:
    """Run one configured pipeline; returns the manifest."""
    manifest = {k: v for k, v in cfg.items()}
    manifest["version"] = __version__
    start = time.perf_counter()
    result = RUNNERS[cfg["mode"]](cfg, manifest)
    if isinstance(result, dict):
        text = json.dumps(result, indent=2, sort_keys=True) + "\n"
    else:
        text = render_csv(*result)
    manifest["wall_time_s"] = time.perf_counter() - start
    out = cfg.get("output")
    if out:
        path = Path(out)
        with open(path, "w", newline="\n") as fh:
            fh.write(text)
        with open(path.with_name(path.name + ".manifest.json"), "w", newline="\n") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True, default=str)
            fh.write("\n")
    else:
        sys.stdout.write(text)
    return manifest


def _fail(kind: str, code: int, exc: Exception) -> int:
    msg = " ".join(str(exc).split())
    sys.stderr.write(json.dumps({"error": kind, "exit_code": code, "message": msg}) + "\n")
    return code


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        cfg = resolve_config(args)
        execute(cfg)
    except ConfigError as exc:
        return _fail("config", EXIT_CONFIG, exc)
    except PhysicsDomainError as exc:
        return _fail("physics-domain", EXIT_DOMAIN, exc)
    except (TruncationError, OracleCapacityError) as exc:
        return _fail("truncation-cap", EXIT_CAP, exc)
    except OSError as exc:
        return _fail("io", 1, exc)
    except ValueError as exc:
        return _fail("config", EXIT_CONFIG, exc)
    return EXIT_OK
