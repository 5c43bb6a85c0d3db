"""Command-line orchestration: JSON config parsing, experiment dispatch,
seeded runs, and machine-readable output (json-lines / csv).

Exit codes: 0 all verdicts PASS (or no verdicts), 1 a verdict FAILED,
2 configuration error, 3 numerical fault or I/O failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from typing import Any, Optional

import numpy as np

from . import integrals, lattice, montecarlo
from .spectral import NumericalFault

SCHEMA_TAG = "randlat-result/1"
OUT_DIR_ENV = "RANDLAT_OUT_DIR"


class ConfigError(ValueError):
    """Invalid configuration; the message carries the offending field path."""


# ---------------------------------------------------------------------------
# config parsing
# ---------------------------------------------------------------------------

def _require_keys(block: dict, path: str, required: set, optional: set = frozenset()):
    if not isinstance(block, dict):
        raise ConfigError(f"{path}: expected an object")
    unknown = set(block) - required - optional
    if unknown:
        raise ConfigError(f"{path}.{sorted(unknown)[0]}: unknown key")
    missing = required - set(block)
    if missing:
        raise ConfigError(f"{path}.{sorted(missing)[0]}: missing required key")


def _parse_background(block: dict, path: str) -> lattice.BackgroundSpec:
    _require_keys(block, path, {"variant"},
                  {"period", "values", "axis_phases", "field",
                   "amplitude", "rate", "truncation_radius"})
    variant = block["variant"]
    try:
        if variant == "laplacian":
            return lattice.Laplacian()
        if variant == "periodic":
            return lattice.PeriodicPotential(period=tuple(block["period"]),
                                             values=tuple(block["values"]))
        if variant == "magnetic":
            axis_phases = [float(p) for p in block.get("axis_phases", [])]
            field = float(block.get("field", 0.0))

            def phase(x, y):
                # bond direction: +theta_k along axis k, Landau-gauge term
                # field * x_0 on axis-1 bonds (2D uniform flux)
                diff = np.asarray(y) - np.asarray(x)
                axis = int(np.flatnonzero(diff)[0])
                sign = float(diff[axis])
                base = axis_phases[axis] if axis < len(axis_phases) else 0.0
                if axis == 1:
                    base = base + field * float(min(x[0], y[0]))
                return sign * base

            return lattice.Magnetic(phase=phase)
        if variant == "decaying":
            radius = block.get("truncation_radius")
            return lattice.DecayingHopping(
                amplitude=float(block["amplitude"]), rate=float(block["rate"]),
                truncation_radius=None if radius is None else float(radius))
        if variant == "none":
            return None  # diagonal-only test hook
    except KeyError as exc:
        raise ConfigError(f"{path}.{exc.args[0]}: missing required key") from exc
    except lattice.ModelError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    raise ConfigError(f"{path}.variant: unknown variant {variant!r}")


def _parse_density(block: dict, path: str) -> lattice.DisorderDensity:
    _require_keys(block, path, {"variant"}, {"lo", "hi", "breakpoints", "weights"})
    variant = block["variant"]
    try:
        if variant == "uniform":
            return lattice.Uniform(lo=float(block["lo"]), hi=float(block["hi"]))
        if variant == "piecewise":
            return lattice.PiecewiseConstant(
                breakpoints=tuple(float(b) for b in block["breakpoints"]),
                weights=tuple(float(w) for w in block["weights"]))
    except KeyError as exc:
        raise ConfigError(f"{path}.{exc.args[0]}: missing required key") from exc
    except lattice.ModelError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    raise ConfigError(f"{path}.variant: unknown variant {variant!r}")


def _parse_model(block: dict, path: str) -> montecarlo.ModelSpec:
    _require_keys(block, path, {"sides", "background", "density"}, {"dimension"})
    try:
        box = lattice.LatticeBox(sides=tuple(block["sides"]))
    except lattice.ModelError as exc:
        raise ConfigError(f"{path}.sides: {exc}") from exc
    if "dimension" in block and int(block["dimension"]) != box.dimension:
        raise ConfigError(f"{path}.dimension: does not match len(sides)")
    return montecarlo.ModelSpec(
        box=box,
        background=_parse_background(block["background"], f"{path}.background"),
        density=_parse_density(block["density"], f"{path}.density"))


_EXPERIMENT_KEYS = {
    "minami": ({"z", "delta", "samples"}, set()),
    "wegner": ({"interval", "n", "samples"}, set()),
    "ids": ({"energy", "samples"}, set()),
    "dos": ({"energy", "samples"}, {"bandwidth"}),
    "spacing": ({"energy", "window", "samples"}, {"rate", "dos_bandwidth"}),
    "fracmoment": ({"energy", "eps", "s", "samples"}, {"max_distance"}),
    "identities": (set(), {"sweep_draws", "sweep_seed"}),
}


def parse_config(raw: dict, overrides: Optional[dict] = None) -> dict:
    """Validate one experiment config and return a resolved copy with
    flag overrides applied.  Raises ConfigError with a field path."""
    overrides = overrides or {}
    _require_keys(raw, "config", {"experiment"}, {"model", "runtime"})
    exp = dict(raw["experiment"])
    if "name" not in exp:
        raise ConfigError("config.experiment.name: missing required key")
    name = exp.pop("name")
    if name not in _EXPERIMENT_KEYS:
        raise ConfigError(f"config.experiment.name: unknown experiment {name!r}")
    if overrides.get("samples") is not None:
        exp["samples"] = overrides["samples"]
    required, optional = _EXPERIMENT_KEYS[name]
    _require_keys(exp, "config.experiment", required, optional)

    runtime = dict(raw.get("runtime", {}))
    _require_keys(runtime, "config.runtime", set(),
                  {"seed", "workers", "out", "format"})
    for key in ("seed", "workers", "out", "format"):
        if overrides.get(key) is not None:
            runtime[key] = overrides[key]
    runtime.setdefault("seed", 0)
    runtime.setdefault("workers", 1)
    runtime.setdefault("format", "json-lines")
    if runtime["format"] not in ("json-lines", "csv"):
        raise ConfigError(f"config.runtime.format: unknown format {runtime['format']!r}")

    model = None
    if name != "identities":
        if "model" not in raw:
            raise ConfigError("config.model: missing required key")
        model = _parse_model(raw["model"], "config.model")

    return {"name": name, "experiment": exp, "runtime": runtime,
            "model": model, "model_raw": raw.get("model"),
            "raw": raw}


# ---------------------------------------------------------------------------
# experiment execution
# ---------------------------------------------------------------------------

def _config_echo(cfg: dict) -> dict:
    # enough to re-run: model, experiment params, seed.  Worker count and
    # output paths do not affect metrics and are excluded so that output
    # files are identical across worker counts.
    echo: dict[str, Any] = {"experiment": {"name": cfg["name"], **cfg["experiment"]}}
    if cfg["model_raw"] is not None:
        echo["model"] = cfg["model_raw"]
    echo["seed"] = cfg["runtime"]["seed"]
    return echo


def _bound_record(cfg: dict, check: montecarlo.BoundCheck) -> dict:
    return {
        "schema": SCHEMA_TAG,
        "experiment": cfg["name"],
        "config": _config_echo(cfg),
        "mean": check.estimate.mean,
        "stderr": check.estimate.stderr,
        "samples": check.estimate.samples,
        "bound": check.bound,
        "slack": check.slack,
        "z_score": check.z_score,
        "verdict": check.verdict,
        "seed": cfg["runtime"]["seed"],
    }


def _mc_config(cfg: dict) -> montecarlo.McConfig:
    return montecarlo.McConfig(model=cfg["model"],
                               samples=int(cfg["experiment"]["samples"]),
                               master_seed=int(cfg["runtime"]["seed"]),
                               workers=int(cfg["runtime"]["workers"]))


def run_experiment(cfg: dict) -> list[dict]:
    """Execute one parsed experiment config; returns result records."""
    name = cfg["name"]
    exp = cfg["experiment"]
    if name == "identities":
        return [dict({"schema": SCHEMA_TAG, "experiment": "identities",
                      "config": _config_echo(cfg)}, **rec)
                for rec in identity_suite(
                    sweep_draws=int(exp.get("sweep_draws", 25)),
                    sweep_seed=int(exp.get("sweep_seed", 0)))]

    config = _mc_config(cfg)
    if name == "minami":
        z = complex(exp["z"][0], exp["z"][1])
        check = montecarlo.mc_minami(config, z, [int(i) for i in exp["delta"]])
        return [_bound_record(cfg, check)]
    if name == "wegner":
        a, b = exp["interval"]
        check = montecarlo.mc_wegner_nlevel(config, (float(a), float(b)),
                                            int(exp["n"]))
        return [_bound_record(cfg, check)]
    if name == "ids":
        est = montecarlo.estimate_ids(config, float(exp["energy"]))
        return [{"schema": SCHEMA_TAG, "experiment": "ids",
                 "config": _config_echo(cfg), "energy": float(exp["energy"]),
                 "mean": est.mean, "stderr": est.stderr,
                 "samples": est.samples, "seed": cfg["runtime"]["seed"]}]
    if name == "dos":
        bandwidth = float(exp.get("bandwidth", 0.05))
        est = montecarlo.estimate_dos(config, float(exp["energy"]), bandwidth)
        return [{"schema": SCHEMA_TAG, "experiment": "dos",
                 "config": _config_echo(cfg), "energy": float(exp["energy"]),
                 "bandwidth": bandwidth, "mean": est.mean, "stderr": est.stderr,
                 "samples": est.samples, "seed": cfg["runtime"]["seed"]}]
    if name == "spacing":
        stats = montecarlo.spacing_experiment(
            config, float(exp["energy"]), float(exp["window"]),
            rate=exp.get("rate"),
            dos_bandwidth=float(exp.get("dos_bandwidth", 0.05)))
        hist = np.bincount(stats.counts).tolist()
        return [{"schema": SCHEMA_TAG, "experiment": "spacing",
                 "config": _config_echo(cfg), "energy": float(exp["energy"]),
                 "window": stats.window, "rate": stats.rate,
                 "ks_distance": stats.ks_distance, "ks_pvalue": stats.ks_pvalue,
                 "count_chi2_pvalue": stats.count_chi2_pvalue,
                 "mean_count": stats.mean_count,
                 "expected_count": stats.expected_count,
                 "n_gaps": int(len(stats.gaps)),
                 "count_histogram": hist,
                 "seed": cfg["runtime"]["seed"]}]
    if name == "fracmoment":
        fit = montecarlo.frac_moment_decay(
            config, float(exp["energy"]), float(exp["eps"]), float(exp["s"]),
            max_distance=exp.get("max_distance"))
        return [{"schema": SCHEMA_TAG, "experiment": "fracmoment",
                 "config": _config_echo(cfg), "energy": float(exp["energy"]),
                 "eps": float(exp["eps"]), "s": float(exp["s"]),
                 "slope": fit.slope, "intercept": fit.intercept,
                 "r_squared": fit.r_squared,
                 "below_floor": fit.below_floor,
                 "log_means": fit.log_means.tolist(),
                 "seed": cfg["runtime"]["seed"]}]
    raise ConfigError(f"config.experiment.name: unknown experiment {name!r}")


def identity_suite(sweep_draws: int = 25, sweep_seed: int = 0) -> list[dict]:
    """The full quadrature-oracle suite: fixed closed-form cases plus a
    seeded randomized sweep.  One record per check."""
    records = []

    def add(check: str, case: str, discrepancy: float, contract: float):
        records.append({"check": check, "case": case,
                        "discrepancy": discrepancy, "contract": contract,
                        "verdict": "PASS" if discrepancy <= contract else "FAIL"})

    add("gauss_repr", "n1_pure_imag",
        integrals.gauss_repr_check(np.array([[-1j]])), 1e-6)
    add("gauss_repr", "n1_mixed",
        integrals.gauss_repr_check(np.array([[1.0 - 1j]])), 1e-6)
    add("gauss_repr", "n2_diag",
        integrals.gauss_repr_check(np.diag([1.0 - 1j, 2.0 - 1j])), 1e-6)
    add("gv_line", "cauchy", integrals.gv_line_integral_check(1.0, -1j), 1e-8)
    add("gv_line", "scaled", integrals.gv_line_integral_check(2.0, -1j), 1e-8)
    add("gv_quadratic", "unit", integrals.gv_quadratic_integral_check(1, 0, 1), 1e-8)
    add("gv_quadratic", "mixed", integrals.gv_quadratic_integral_check(1, 1, 1), 1e-8)

    value, bound = integrals.gv_lemma_check(np.array([[1j]]))
    add("gv_lemma_n1", "cauchy", abs(value - math.pi), 1e-10)
    value, bound = integrals.gv_lemma_check(np.diag([1j, 1j]))
    add("gv_lemma_n2", "decoupled", max(0.0, value - bound), 1e-6)
    value, bound = integrals.gv_lemma_check(np.array([[1j, 0.3], [0.3, 1j]]))
    add("gv_lemma_n2", "coupled", max(0.0, value - bound), 1e-6)

    rng = np.random.default_rng(sweep_seed)
    for k in range(sweep_draws):
        while True:
            b_part = rng.uniform(-2, 2, size=(2, 2))
            b_part = (b_part + b_part.T) / 2
            a_part = rng.uniform(-0.5, 0.5, size=(2, 2))
            a_part = (a_part + a_part.T) / 2 + np.eye(2) * rng.uniform(1.0, 2.0)
            m = b_part - 1j * a_part
            if np.angle(np.linalg.eigvals(m)).sum() > -math.pi + 0.05:
                break
        add("gauss_repr", f"sweep_{k}", integrals.gauss_repr_check(m), 1e-6)
        a, b = complex(*rng.uniform(-2, 2, 2)), complex(*rng.uniform(-2, 2, 2))
        if (np.conj(b) * a).imag <= 0:
            a = np.conj(a)
        if (np.conj(b) * a).imag > 1e-3:
            add("gv_line", f"sweep_{k}", integrals.gv_line_integral_check(a, b), 1e-8)
        qa = rng.uniform(0.5, 3.0)
        qb = rng.uniform(-1.0, 1.0)
        qc = (qb * qb + rng.uniform(0.5, 4.0)) / (4 * qa)
        add("gv_quadratic", f"sweep_{k}",
            integrals.gv_quadratic_integral_check(qa, qb, qc), 1e-8)
    return records


# ---------------------------------------------------------------------------
# output serialization
# ---------------------------------------------------------------------------

def format_number(v: float) -> str:
    """JSON number literal with 17 significant digits (round-trip exact
    for IEEE doubles); non-finite values become strings."""
    if isinstance(v, float):
        if math.isnan(v):
            return '"nan"'
        if math.isinf(v):
            return '"inf"' if v > 0 else '"-inf"'
        return format(v, ".17g")
    return str(v)


def dumps(obj: Any) -> str:
    """JSON serialization with deterministic key order (insertion order)
    and 17-significant-digit floats."""
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return format_number(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(dumps(x) for x in obj) + "]"
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {dumps(v)}"
                               for k, v in obj.items()) + "}"
    raise TypeError(f"cannot serialize {type(obj)!r}")


def _flatten(record: dict, prefix: str = "") -> dict:
    flat = {}
    for key, value in record.items():
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            flat.update(_flatten(value, f"{name}."))
        elif isinstance(value, (list, tuple)):
            flat[name] = dumps(value)
        else:
            flat[name] = value
    return flat


def emit(records: list[dict], destination, fmt: str = "json-lines") -> None:
    """Write records as json-lines (one per line, fixed key order) or as
    flattened csv with a documented header."""
    if fmt == "json-lines":
        for rec in records:
            destination.write(dumps(rec) + "\n")
        return
    if fmt == "csv":
        import csv as _csv
        flats = [_flatten(rec) for rec in records]
        header: list[str] = []
        for flat in flats:
            for key in flat:
                if key not in header:
                    header.append(key)
        writer = _csv.DictWriter(destination, fieldnames=header)
        writer.writeheader()
        for flat in flats:
            row = {k: (format_number(v).strip('"') if isinstance(v, float) else v)
                   for k, v in flat.items()}
            writer.writerow(row)
        return
    raise ConfigError(f"config.runtime.format: unknown format {fmt!r}")


def _resolve_out(path: Optional[str]) -> Optional[str]:
    if path is None:
        return None
    base = os.environ.get(OUT_DIR_ENV)
    if base and not os.path.isabs(path):
        return os.path.join(base, path)
    return path


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def run(config_path: Optional[str], overrides: Optional[dict] = None) -> int:
    """Load a config file (a single experiment object or a list of them),
    run each experiment, write records, and map outcomes to exit codes."""
    overrides = overrides or {}
    try:
        if config_path is not None:
            with open(config_path) as fh:
                raw = json.load(fh)
        elif overrides.get("experiment"):
            raw = {"experiment": {"name": overrides["experiment"]}}
        else:
            raise ConfigError("config: no config file or --experiment given")
        if overrides.get("experiment"):
            raw = dict(raw)
            raw["experiment"] = dict(raw.get("experiment", {}),
                                     name=overrides["experiment"])
        raw_list = raw if isinstance(raw, list) else [raw]
        configs = [parse_config(item, overrides) for item in raw_list]
    except (ConfigError, json.JSONDecodeError, OSError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2

    records = []
    any_fail = False
    try:
        for cfg in configs:
            start = time.monotonic()
            for rec in run_experiment(cfg):
                rec["duration_s"] = time.monotonic() - start
                records.append(rec)
                if rec.get("verdict") == "FAIL":
                    any_fail = True
    except NumericalFault as exc:
        print(f"numerical fault: {exc}", file=sys.stderr)
        return 3

    fmt = configs[0]["runtime"].get("format", "json-lines")
    out = _resolve_out(configs[0]["runtime"].get("out"))
    try:
        if out is None:
            emit(records, sys.stdout, fmt)
        else:
            with open(out, "w") as fh:
                emit(records, fh, fmt)
    except OSError as exc:
        print(f"output error: {exc}", file=sys.stderr)
        return 3
    return 1 if any_fail else 0


def main(argv: Optional[list[str]] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="randlat",
        description="Random lattice operator experiments: moment and "
                    "eigenvalue-count bound checks, level statistics, and "
                    "closed-form identity verification.")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run one experiment config")
    run_p.add_argument("--config", help="path to a JSON config file")
    run_p.add_argument("--seed", type=int, help="override master seed")
    run_p.add_argument("--samples", type=int, help="override sample count")
    run_p.add_argument("--workers", type=int, help="override worker count")
    run_p.add_argument("--out", help="output file (default: stdout)")
    run_p.add_argument("--format", choices=["json-lines", "csv"],
                       help="output format")
    run_p.add_argument("--experiment", help="override the experiment name")

    id_p = sub.add_parser("identities",
                          help="run the full closed-form identity suite")
    id_p.add_argument("--out", help="output file (default: stdout)")
    id_p.add_argument("--format", choices=["json-lines", "csv"])

    args = parser.parse_args(argv)
    if args.command == "identities":
        return run(None, {"experiment": "identities", "out": args.out,
                          "format": args.format})
    overrides = {key: getattr(args, key) for key in
                 ("seed", "samples", "workers", "out", "format", "experiment")}
    return run(args.config, overrides)


if __name__ == "__main__":
    sys.exit(main())
