"""Command-line reproduction harness.

Subcommands: ``dephasing-scan``, ``dephasing-surface``, ``cnot``, ``verify-bounds``.
Each reads an optional flat JSON config, echoes the fully resolved
configuration into ``manifest.json`` and writes its data files atomically.

Exit codes: 0 ok, 2 config error, 3 numerical error, 4 property violation.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import hashlib
import io
import json
import math
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import __version__
from .correlations import (
    CnotCase,
    cnot_numeric_rise,
    cnot_rise,
    cnot_states,
    computational_dephasing_spec,
    witness_bound,
)
from .dephasing import (
    DephasingConfig,
    ScanConfig,
    default_lambda_grid,
    default_p1_grid,
    extract_threshold,
    last_detecting_lambda,
    scan_detection,
    surface_trajectories,
    time_grid,
)
from .info import DETECTION_TOL, max_rises
from .linalg import NumericalError
from .verify import SUITES, VerifySettings, run_instance, run_verification

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_VIOLATION = 0, 2, 3, 4
THREADS_ENV = "HELSTROM_FLOW_THREADS"

PHYSICS_DEFAULTS = {"epsilon": 1.0, "omega": 1.0, "g": 0.1, "y_real": 1.0, "y_imag": 0.0}

DEFAULTS = {
    "dephasing-scan": {
        **PHYSICS_DEFAULTS,
        "seed": 0,
        "p1_count": 40,
        "lambda_count": 30,
        "p1_grid": None,
        "lambda_grid": None,
        "samples": 500,
        "dt": 0.15,
        "t_max": 2 * math.pi,
        "amplitude_mode": "haar",
        "tol": DETECTION_TOL,
    },
    "dephasing-surface": {
        **PHYSICS_DEFAULTS,
        "seed": 0,
        "p1_values": [0.5, 0.6],
        "lambda_values": [0.3, 0.4, 0.5, 0.6, 0.7],
        "alpha_count": 101,
        "dt": 0.15,
        "t_max": 2 * math.pi,
        "tol": DETECTION_TOL,
    },
    "cnot": {
        "seed": 0,
        "alpha_count": 51,
        "p1_count": 51,
        "agreement_tol": 1e-12,
        "bound_tol": 1e-10,
    },
    "verify-bounds": {
        "seed": 0,
        "instances": 1000,
        "dims": [list(d) for d in VerifySettings().dims],
        "n_times": 20,
        "t_max": 10.0,
        "tol": 1e-10,
    },
}


class ConfigError(ValueError):
    pass


class PropertyViolation(RuntimeError):
    pass


# -- configuration --------------------------------------------------------------


def resolve_config(command: str, raw: dict, seed: int | None = None) -> dict:
    """Overlay ``raw`` on the command defaults and materialize derived grids."""
    defaults = DEFAULTS[command]
    unknown = sorted(set(raw) - set(defaults))
    if unknown:
        raise ConfigError(f"unknown config keys for {command}: {', '.join(unknown)}")
    cfg = {**defaults, **raw}
    if seed is not None:
        cfg["seed"] = seed
    if not isinstance(cfg["seed"], int) or not 0 <= cfg["seed"] < 2**64:
        raise ConfigError("seed must be an unsigned 64-bit integer")
    for key, default in defaults.items():
        value = cfg[key]
        if isinstance(default, float) and not isinstance(value, (int, float)):
            raise ConfigError(f"{key} must be a number")
        if isinstance(default, int) and not isinstance(default, bool) and not isinstance(value, int):
            raise ConfigError(f"{key} must be an integer")
    if command == "dephasing-scan":
        if cfg["p1_grid"] is None:
            cfg["p1_grid"] = default_p1_grid(cfg["p1_count"])
        if cfg["lambda_grid"] is None:
            cfg["lambda_grid"] = [float(x) for x in default_lambda_grid(cfg["lambda_count"])]
        cfg["p1_count"] = len(cfg["p1_grid"])
        cfg["lambda_count"] = len(cfg["lambda_grid"])
    return cfg


def config_digest(cfg: dict) -> str:
    blob = json.dumps(cfg, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    return raw


def _physics(cfg: dict) -> DephasingConfig:
    return DephasingConfig(
        epsilon=float(cfg["epsilon"]),
        omega=float(cfg["omega"]),
        g=float(cfg["g"]),
        y=complex(cfg["y_real"], cfg["y_imag"]),
    )


# -- output -----------------------------------------------------------------------


def fmt(x) -> str:
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return format(float(x), ".17g")


def write_atomic(path: Path, text: str):
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_csv(path: Path, header: list[str], rows) -> Path:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(x) for x in row])
    write_atomic(path, buf.getvalue())
    return path


def _now() -> str:
    return _dt.datetime.now(_dt.timezone.utc).isoformat()


# -- commands -----------------------------------------------------------------------


def cmd_dephasing_scan(cfg: dict, out_dir: Path, threads: int) -> tuple[list[Path], dict]:
    try:
        scan = ScanConfig(
            p1_grid=cfg["p1_grid"],
            lambda_grid=cfg["lambda_grid"],
            samples=cfg["samples"],
            dt=cfg["dt"],
            t_max=cfg["t_max"],
            seed=cfg["seed"],
            amplitude_mode=cfg["amplitude_mode"],
            tol=cfg["tol"],
        )
        physics = _physics(cfg)
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc
    records = scan_detection(scan, physics, threads)
    path = write_csv(
        out_dir / "scan.csv",
        ["p1", "lambda", "detections", "samples", "frequency"],
        ((r.p1, r.lam, r.detections, r.samples, r.frequency) for r in records),
    )
    summary = {
        "thresholds": {
            repr(p1): extract_threshold(records, p1) for p1 in scan.p1_grid
        },
        "last_detecting_lambda": {
            repr(p1): last_detecting_lambda(records, p1) for p1 in scan.p1_grid
        },
    }
    return [path], summary


def _tag(v: float) -> str:
    return format(v, "g")


def cmd_dephasing_surface(cfg: dict, out_dir: Path, threads: int) -> tuple[list[Path], dict]:
    try:
        physics = _physics(cfg)
        if cfg["alpha_count"] < 2:
            raise ValueError("alpha_count must be >= 2")
        times = time_grid(cfg["dt"], cfg["t_max"])
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc
    alphas = np.linspace(0.0, 1.0, cfg["alpha_count"])
    paths, exceed = [], {}
    for p1 in cfg["p1_values"]:
        for lam in cfg["lambda_values"]:
            if not (0 <= p1 <= 1 and 0 <= lam <= 1):
                raise ConfigError("p1 and lambda values must lie in [0, 1]")
            surf = surface_trajectories(p1, lam, alphas, times, physics)
            name = f"surface_p1_{_tag(p1)}_lambda_{_tag(lam)}.csv"
            rows = (
                (a, t, surf[i, k])
                for i, a in enumerate(alphas)
                for k, t in enumerate(times)
            )
            paths.append(write_csv(out_dir / name, ["alpha", "t", "helstrom_norm"], rows))
            exceed[name] = float(max_rises(surf).max())
    summary = {
        "max_rise": exceed,
        "rise_detected": {k: v > cfg["tol"] for k, v in exceed.items()},
    }
    return paths, summary


def cmd_cnot(cfg: dict, out_dir: Path, threads: int) -> tuple[list[Path], dict]:
    if cfg["alpha_count"] < 2 or cfg["p1_count"] < 2:
        raise ConfigError("alpha_count and p1_count must be >= 2")
    rows, worst_gap, worst_bound = [], 0.0, -math.inf
    for a in np.linspace(0.0, 1.0, cfg["alpha_count"]):
        for p1 in np.linspace(0.0, 1.0, cfg["p1_count"]):
            case = CnotCase.real(float(a), float(p1))
            rise = cnot_numeric_rise(case)
            rho, _ = cnot_states(case)
            bound = witness_bound(rho, case.weights, computational_dephasing_spec(rho.marginal_s))
            closed = cnot_rise(case)
            worst_gap = max(worst_gap, abs(rise - closed))
            worst_bound = max(worst_bound, rise - bound)
            rows.append((a, p1, rise, bound, closed))
    path = write_csv(
        out_dir / "cnot.csv", ["alpha_abs", "p1", "rise", "bound", "closed_form_rise"], rows
    )
    summary = {"max_closed_form_gap": worst_gap, "max_rise_minus_bound": worst_bound}
    if worst_gap > cfg["agreement_tol"] or worst_bound > cfg["bound_tol"]:
        raise PropertyViolation(json.dumps(summary), [path], summary)
    return [path], summary


def verify_settings(cfg: dict) -> VerifySettings:
    try:
        dims = tuple((int(a), int(b)) for a, b in cfg["dims"])
        if not dims or any(a < 1 or b < 1 for a, b in dims):
            raise ValueError("dims must be a non-empty list of positive pairs")
        if cfg["instances"] < 1 or cfg["n_times"] < 2:
            raise ValueError("need instances >= 1 and n_times >= 2")
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc
    return VerifySettings(
        seed=cfg["seed"],
        instances=cfg["instances"],
        dims=dims,
        n_times=cfg["n_times"],
        t_max=float(cfg["t_max"]),
        tol=float(cfg["tol"]),
    )


def replay(record: dict) -> float:
    """Re-run one serialized instance and return its margin."""
    s = record["settings"]
    settings = VerifySettings(
        seed=s["seed"],
        instances=s["instances"],
        dims=tuple(tuple(d) for d in s["dims"]),
        n_times=s["n_times"],
        t_max=s["t_max"],
        tol=s["tol"],
    )
    margin, _ = run_instance(record["suite"], record["index"], settings)
    return margin


def cmd_verify_bounds(cfg: dict, out_dir: Path, threads: int) -> tuple[list[Path], dict]:
    settings = verify_settings(cfg)
    reports = run_verification(settings, threads)
    settings_dict = {
        "seed": settings.seed,
        "instances": settings.instances,
        "dims": [list(d) for d in settings.dims],
        "n_times": settings.n_times,
        "t_max": settings.t_max,
        "tol": settings.tol,
    }
    summary = {
        "settings": settings_dict,
        "suites": {name: reports[name].as_dict() for name in SUITES},
    }
    paths = [out_dir / "verify.json"]
    write_atomic(paths[0], json.dumps(summary, indent=2, sort_keys=True) + "\n")
    violations = [
        {**v, "settings": settings_dict} for name in SUITES for v in reports[name].violations
    ]
    if violations:
        vpath = out_dir / "violations.json"
        write_atomic(vpath, json.dumps(violations, indent=2) + "\n")
        paths.append(vpath)
        raise PropertyViolation(f"{len(violations)} violating instances", paths, summary)
    return paths, summary


COMMANDS = {
    "dephasing-scan": cmd_dephasing_scan,
    "dephasing-surface": cmd_dephasing_surface,
    "cnot": cmd_cnot,
    "verify-bounds": cmd_verify_bounds,
}


# -- entry point ------------------------------------------------------------------------


def _threads(arg: int | None) -> int:
    if arg is not None:
        return max(1, arg)
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"{THREADS_ENV} must be an integer, got {env!r}")
    return 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="helstrom-flow", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="flat JSON config; omitted keys take defaults")
        p.add_argument("--seed", type=int, help="overrides the config seed")
        p.add_argument("--out-dir", default=".", help="output directory (created if missing)")
        p.add_argument("--threads", type=int, help=f"worker threads (fallback: ${THREADS_ENV})")
    return parser


def write_manifest(out_dir: Path, command: str, cfg: dict, started: str, paths, summary) -> Path:
    manifest = {
        "command": command,
        "config": cfg,
        "config_digest": config_digest(cfg),
        "seed": cfg["seed"],
        "tool_version": __version__,
        "started": started,
        "finished": _now(),
        "output_paths": [str(p) for p in paths],
        "summary": summary,
    }
    path = out_dir / "manifest.json"
    write_atomic(path, json.dumps(manifest, indent=2) + "\n")
    return path


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    started = _now()
    out_dir = Path(args.out_dir)
    try:
        threads = _threads(args.threads)
        cfg = resolve_config(args.command, load_config(args.config), args.seed)
        out_dir.mkdir(parents=True, exist_ok=True)
        paths, summary = COMMANDS[args.command](cfg, out_dir, threads)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except PropertyViolation as exc:
        msg, paths, summary = exc.args
        write_manifest(out_dir, args.command, cfg, started, paths, summary)
        print(f"property violation: {msg}", file=sys.stderr)
        return EXIT_VIOLATION
    except (NumericalError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    write_manifest(out_dir, args.command, cfg, started, paths, summary)
    print(json.dumps(summary, indent=2, default=str))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
