"""Command-line front end.

Subcommands ``fit-eval``, ``sweep``, ``hmc-demo`` and ``entropy-demo``. Each
reads an optional JSON config file; command-line flags override its keys.
All numbers are written with 17 significant digits.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import experiments, hmc, oracles
from .errors import ConfigError, SpecScoreError

log = logging.getLogger("specscore")

EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_ESTIMATOR = 4

FIT_ESTIMATORS = ("ssge", "stein_plus", "stein")


def fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    value = float(value)
    if math.isnan(value):
        return "NaN"
    if math.isinf(value):
        return "Infinity" if value > 0 else "-Infinity"
    return format(value, ".17g")


def dumps(obj, indent: int = 0) -> str:
    """JSON text with floats at 17 significant digits."""
    pad = "  " * (indent + 1)
    end = "  " * indent
    if obj is None:
        return "null"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in seq):
            return "[" + ", ".join(dumps(v) for v in seq) + "]"
        return "[\n" + ",\n".join(pad + dumps(v, indent + 1) for v in seq) + "\n" + end + "]"
    return fmt(obj)


def write_csv(path: Path, header, rows) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([v if isinstance(v, str) else fmt(v) for v in row])
    path.write_text(buf.getvalue(), encoding="utf-8", newline="")


def write_json(path: Path, obj) -> None:
    path.write_text(dumps(obj) + "\n", encoding="utf-8", newline="")


def read_samples_csv(path) -> np.ndarray:
    """Read a sample file with header ``x1,...,xd``."""
    text = Path(path).read_text(encoding="utf-8")
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise ConfigError(f"{path}: empty sample file") from None
    for i, name in enumerate(header):
        if name.strip() != f"x{i + 1}":
            raise ConfigError(f"{path}: header column {i + 1} is {name!r}, expected 'x{i + 1}'")
    rows = []
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != len(header):
            raise ConfigError(f"{path}:{lineno}: expected {len(header)} values, got {len(row)}")
        try:
            rows.append([float(v) for v in row])
        except ValueError:
            raise ConfigError(f"{path}:{lineno}: non-numeric value") from None
    if not rows:
        raise ConfigError(f"{path}: no samples")
    x = np.array(rows)
    if not np.all(np.isfinite(x)):
        raise ConfigError(f"{path}: non-finite sample values")
    return x


NAMED_TARGETS = {
    "normal": {"kind": "gaussian", "mean": [0.0], "std": [1.0]},
    "banana": {"kind": "banana", "curvature": 0.5, "std": 1.0, "dim": 2},
    "gmm2": {"kind": "gmm2", "weight": 0.5, "mean1": [-2.0], "mean2": [2.0], "std": [1.0]},
}


def parse_target(spec):
    """Return ``(distribution or None, samples-file path or None)``."""
    if spec is None:
        spec = "normal"
    if isinstance(spec, str):
        if spec in NAMED_TARGETS:
            spec = NAMED_TARGETS[spec]
        elif spec.endswith(".csv"):
            return None, spec
        else:
            try:
                spec = json.loads(spec)
            except json.JSONDecodeError:
                raise ConfigError(
                    f"target {spec!r} is neither a known name ({', '.join(NAMED_TARGETS)}), "
                    "a .csv path, nor JSON"
                ) from None
    if not isinstance(spec, dict):
        raise ConfigError("target must be a JSON object")
    try:
        return oracles.from_config(spec), None
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _number_list(value, cast, name):
    if value is None:
        return None
    if isinstance(value, str):
        value = [v for v in value.split(",") if v.strip()]
    if not isinstance(value, (list, tuple)):
        value = [value]
    try:
        return [cast(v) for v in value]
    except (TypeError, ValueError):
        raise ConfigError(f"{name}: expected a list of numbers, got {value!r}") from None


def _sigma(value):
    if value is None or value == "auto":
        return None
    try:
        sigma = float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"sigma must be 'auto' or a positive number, got {value!r}") from None
    if not sigma > 0:
        raise ConfigError(f"sigma must be positive, got {sigma}")
    return sigma


def load_config(args, keys) -> dict:
    cfg = {}
    if args.config:
        try:
            cfg = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{args.config}: invalid JSON ({exc})") from None
        if not isinstance(cfg, dict):
            raise ConfigError(f"{args.config}: top level must be an object")
    for key in keys:
        value = getattr(args, key, None)
        if value is not None:
            cfg[key] = value
    return cfg


def _rank(cfg, single: bool):
    j, r = cfg.get("rank_j"), cfg.get("rank_rbar")
    if (j is None) == (r is None):
        raise ConfigError("give exactly one of rank_j (--rank-j) and rank_rbar (--rank-rbar)")
    if single:
        try:
            return (int(j), None) if j is not None else (None, float(r))
        except (TypeError, ValueError):
            raise ConfigError("rank must be a single number") from None
    if j is not None:
        return _number_list(j, int, "rank_j"), None
    return None, _number_list(r, float, "rank_rbar")


def _out_dir(cfg) -> Path:
    out = Path(cfg.get("out") or ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_fit_eval(args) -> None:
    cfg = load_config(args, ["target", "m", "seed", "estimator", "rank_j", "rank_rbar", "eta", "sigma", "grid", "out"])
    names = cfg.get("estimator", list(FIT_ESTIMATORS))
    if isinstance(names, str):
        names = [n for n in names.split(",") if n]
    bad = [n for n in names if n not in FIT_ESTIMATORS]
    if bad or not names:
        raise ConfigError(f"unknown estimator {bad}; valid names: {', '.join(FIT_ESTIMATORS)}")
    j = r_bar = None
    if "ssge" in names:
        j, r_bar = _rank(cfg, single=True)
    wants_stein = any(n != "ssge" for n in names)
    eta = cfg.get("eta")
    if wants_stein and eta is None:
        raise ConfigError("eta (--eta) is required for stein and stein_plus")
    if not wants_stein and eta is not None:
        raise ConfigError("eta is only valid with stein or stein_plus")
    if eta is not None:
        eta = float(eta)
        if not eta > 0:
            raise ConfigError("eta must be positive")
    sigma = _sigma(cfg.get("sigma"))
    seed = int(cfg.get("seed", 0))
    grid = _number_list(cfg.get("grid", [-4.0, 4.0, 201]), float, "grid")
    if len(grid) != 3 or grid[2] < 1:
        raise ConfigError("grid must be lo,hi,n")
    grid = (grid[0], grid[1], int(grid[2]))

    dist, path = parse_target(cfg.get("target"))
    if dist is None:
        samples = read_samples_csv(path)
        if samples.shape[1] == 1:
            points, weights = experiments.grid_points(*grid), None
        else:
            points, weights = samples, None
    else:
        m = int(cfg.get("m", 100))
        if m < 2:
            raise ConfigError("m must be at least 2")
        samples = dist.sample(m, seed)
        points, weights = experiments.evaluation_set(dist, grid, seed)

    t0 = time.perf_counter()
    result = experiments.fit_eval(
        dist, samples, names, j=j, r_bar=r_bar, eta=eta, sigma=sigma, points=points, weights=weights
    )
    runtime_ms = (time.perf_counter() - t0) * 1e3

    d = points.shape[1]
    coord = ["x"] if d == 1 else [f"x{i + 1}" for i in range(d)]
    header = list(coord)
    blocks = [points]
    for key, block in result["columns"].items():
        header += [key] if d == 1 else [f"{key}_{i + 1}" for i in range(d)]
        blocks.append(block)
    out = _out_dir(cfg)
    write_csv(out / "grid_eval.csv", header, np.hstack(blocks))

    summary = dict(result["summary"])
    summary["M"] = int(samples.shape[0])
    summary["d"] = int(d)
    summary["seed"] = seed
    warnings = []
    if summary.get("J_selected") == 1:
        warnings.append("selected rank J is 1")
    summary["warnings"] = warnings
    if args.timing:
        summary["runtime_ms"] = runtime_ms
    write_json(out / "summary.json", summary)

    if "stein_samples" in result:
        fit = result["stein_samples"]
        hdr = coord + (["stein"] if d == 1 else [f"stein_{i + 1}" for i in range(d)])
        blocks = [fit.samples, fit.g_hat]
        if dist is not None:
            hdr += ["true_score"] if d == 1 else [f"true_score_{i + 1}" for i in range(d)]
            blocks.append(dist.score(fit.samples))
        write_csv(out / "stein_samples.csv", hdr, np.hstack(blocks))


def cmd_sweep(args) -> None:
    cfg = load_config(args, ["target", "m", "seeds", "rank_j", "rank_rbar", "sigma", "grid", "out"])
    ms = _number_list(cfg.get("m", [100]), int, "m")
    seeds = _number_list(cfg.get("seeds"), int, "seeds")
    if not seeds:
        raise ConfigError("seeds must be a nonempty list")
    if not ms:
        raise ConfigError("m must be a nonempty list")
    if any(m < 2 for m in ms):
        raise ConfigError("every m must be at least 2")
    js, r_bars = _rank(cfg, single=False)
    if (js is not None and not js) or (r_bars is not None and not r_bars):
        raise ConfigError("rank list must be nonempty")
    grid = _number_list(cfg.get("grid", [-4.0, 4.0, 201]), float, "grid")
    grid = (grid[0], grid[1], int(grid[2]))
    dist, path = parse_target(cfg.get("target"))
    if dist is None:
        raise ConfigError("sweep needs an analytic target, not a sample file")
    sigma = _sigma(cfg.get("sigma"))
    target = cfg.get("target") or "normal"
    target_name = target if isinstance(target, str) else target.get("kind", "custom")
    try:
        rows = experiments.sweep(dist, ms, seeds, js=js, r_bars=r_bars, sigma=sigma, grid=grid)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    header = ["target", "M", "J", "seed", "weighted_mse", "mu_J", "delta_J"]
    if r_bars is not None:
        header.insert(2, "r_bar")
    table = []
    for row in rows:
        line = [target_name, row["M"], row["J"], row["seed"], row["weighted_mse"], row["mu_J"], row["delta_J"]]
        if r_bars is not None:
            line.insert(2, row["rank"])
        table.append(line)
    write_csv(_out_dir(cfg) / "sweep.csv", header, table)


def cmd_hmc_demo(args) -> None:
    cfg = load_config(
        args, ["target", "m", "seed", "estimator", "rank_rbar", "eta", "repeats", "iterations", "out", "traces"]
    )
    names = cfg.get("estimator", list(hmc.ESTIMATORS))
    if isinstance(names, str):
        names = [n for n in names.split(",") if n]
    bad = [n for n in names if n not in hmc.ESTIMATORS]
    if bad or not names:
        raise ConfigError(f"unknown estimator {bad}; valid names: {', '.join(hmc.ESTIMATORS)}")
    dist, path = parse_target(cfg.get("target", "banana"))
    if dist is None:
        raise ConfigError("hmc-demo needs an analytic target")
    try:
        config = hmc.HmcConfig(
            step_size_range=tuple(float(v) for v in cfg.get("step_size_range", (0.01, 0.1))),
            n_leapfrog_range=tuple(int(v) for v in cfg.get("n_leapfrog_range", (1, 10))),
            n_iterations=int(cfg.get("iterations", 5000)),
            seed=int(cfg.get("seed", 0)),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    repeats = int(cfg.get("repeats", 10))
    if repeats < 1:
        raise ConfigError("repeats must be at least 1")
    rows = hmc.acceptance_comparison(
        dist,
        fit_samples=int(cfg.get("m", 200)),
        r_bar=float(cfg.get("rank_rbar", 0.95)),
        eta=float(cfg.get("eta", 0.001)),
        config=config,
        n_repeats=repeats,
        estimators=names,
        keep_traces=bool(cfg.get("traces", False)),
    )
    out = _out_dir(cfg)
    write_csv(
        out / "acceptance.csv",
        ["estimator", "mean", "std", "stderr", "n_repeats"] + [f"run_{i}" for i in range(repeats)],
        [[r.estimator, r.mean, r.std, r.stderr, len(r.ratios), *r.ratios] for r in rows],
    )
    if cfg.get("traces"):
        d = dist.dim
        table = []
        for r in rows:
            for rep, trace in enumerate(r.traces):
                for t, (state, acc) in enumerate(zip(trace.states, trace.accepted)):
                    table.append([r.estimator, rep, t + 1, int(acc), *state])
        write_csv(
            out / "traces.csv",
            ["estimator", "repeat", "iteration", "accepted"] + [f"x{i + 1}" for i in range(d)],
            table,
        )


def cmd_entropy_demo(args) -> None:
    cfg = load_config(args, ["phi", "n_noise", "seeds", "seed", "rank_j", "rank_rbar", "sigma", "out"])
    phi = _number_list(cfg.get("phi", [0.0, 1.0]), float, "phi")
    n_noise = int(cfg.get("n_noise", 100))
    if n_noise < 2:
        raise ConfigError("n_noise must be at least 2")
    seeds = cfg.get("seeds", 50)
    if isinstance(seeds, int) or (isinstance(seeds, str) and "," not in seeds):
        base = int(cfg.get("seed", 0))
        seeds = list(range(base, base + int(seeds)))
    else:
        seeds = _number_list(seeds, int, "seeds")
    if not seeds:
        raise ConfigError("seeds must be nonempty")
    if cfg.get("rank_j") is None and cfg.get("rank_rbar") is None:
        cfg["rank_rbar"] = 0.95
    j, r_bar = _rank(cfg, single=True)
    try:
        report = experiments.entropy_demo(phi, n_noise, seeds, j=j, r_bar=r_bar, sigma=_sigma(cfg.get("sigma")))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    write_json(_out_dir(cfg) / "entropy.json", report)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file; flags override its keys")
    common.add_argument("--out", help="output directory (default: current directory)")
    common.add_argument("--seed", type=int)
    common.add_argument("--sigma", help="kernel bandwidth or 'auto' (median heuristic)")
    common.add_argument("--target", help="normal, banana, gmm2, a JSON object, or a .csv sample file")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="specscore", description="Score estimation from samples.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit-eval", parents=[common], help="fit estimators and evaluate on a grid")
    p.add_argument("--estimator", help="comma list of ssge, stein_plus, stein")
    p.add_argument("--m", type=int)
    p.add_argument("--rank-j", dest="rank_j", type=int)
    p.add_argument("--rank-rbar", dest="rank_rbar", type=float)
    p.add_argument("--eta", type=float)
    p.add_argument("--grid", help="lo,hi,n for 1-D targets")
    p.add_argument("--timing", action="store_true", help="record runtime_ms in the summary")
    p.set_defaults(func=cmd_fit_eval)

    p = sub.add_parser("sweep", parents=[common], help="SSGE error over M, rank and seeds")
    p.add_argument("--m", help="comma list of sample counts")
    p.add_argument("--rank-j", dest="rank_j", help="comma list of ranks")
    p.add_argument("--rank-rbar", dest="rank_rbar", help="comma list of thresholds")
    p.add_argument("--seeds", help="comma list of seeds")
    p.add_argument("--grid", help="lo,hi,n for 1-D targets")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("hmc-demo", parents=[common], help="HMC acceptance with estimated scores")
    p.add_argument("--estimator", help="comma list of true, ssge, stein_plus, zero")
    p.add_argument("--m", type=int, help="fit sample count (default 200)")
    p.add_argument("--rank-rbar", dest="rank_rbar", type=float)
    p.add_argument("--eta", type=float)
    p.add_argument("--repeats", type=int)
    p.add_argument("--iterations", type=int)
    p.add_argument("--traces", action="store_true", default=None, help="also write traces.csv")
    p.set_defaults(func=cmd_hmc_demo)

    p = sub.add_parser("entropy-demo", parents=[common], help="entropy gradient of a location-scale family")
    p.add_argument("--phi", help="comma list: locations then scales")
    p.add_argument("--n-noise", dest="n_noise", type=int)
    p.add_argument("--seeds", help="seed count or comma list of seeds")
    p.add_argument("--rank-j", dest="rank_j", type=int)
    p.add_argument("--rank-rbar", dest="rank_rbar", type=float)
    p.set_defaults(func=cmd_entropy_demo)
    return parser


def _thread_limit():
    value = os.environ.get("SS_THREADS")
    if not value:
        return None
    try:
        n = int(value)
    except ValueError:
        raise ConfigError(f"SS_THREADS must be a positive integer, got {value!r}") from None
    if n < 1:
        raise ConfigError("SS_THREADS must be a positive integer")
    return n


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        limit = _thread_limit()
        if limit is not None:
            from threadpoolctl import threadpool_limits

            with threadpool_limits(limits=limit):
                args.func(args)
        else:
            args.func(args)
    except (ConfigError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO
    except SpecScoreError as exc:
        print(f"estimator error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ESTIMATOR
    return 0


if __name__ == "__main__":
    sys.exit(main())
