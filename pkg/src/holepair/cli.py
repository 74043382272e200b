"""Command-line entry point: JSON configuration in, CSV and metadata out."""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import os
import platform
import sys
import time
from dataclasses import asdict, dataclass, field, fields
from typing import Any, Sequence

import numpy as np
import scipy

from . import BACKEND, __version__, dimer, lindblad, observables as obs
from .experiments import DEFAULT_SEED, REGISTRY, ScanTable, numeric_steady_state
from .models import ModelSpec, build

__all__ = ["RunConfig", "ConfigError", "parse_config", "write_table", "read_table", "run", "main"]

TOOLS = ("build", "verify", "steady-state", "spectrum")
COMMANDS = TOOLS + tuple(REGISTRY)
_TOP_KEYS = {"model", "experiment", "grid", "seed", "output", "threads"}
_RANGE_KEYS = {"start", "stop", "count", "scale"}
_MODEL_FIELDS = {f.name: f for f in fields(ModelSpec)}


class ConfigError(ValueError):
    """Invalid configuration; ``path`` locates the offending entry."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


@dataclass
class RunConfig:
    experiment: str
    model: dict = field(default_factory=dict)
    grid: dict = field(default_factory=dict)
    seed: int = DEFAULT_SEED
    output: str | None = None
    threads: int | str = "auto"

    def experiment_cfg(self) -> dict:
        return {"model": self.model, "grid": self.grid, "seed": self.seed}

    def digest(self) -> str:
        blob = json.dumps(asdict(self), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def _expand(path: str, spec: Any) -> list:
    if isinstance(spec, list):
        if not spec:
            raise ConfigError(path, "empty value list")
        return spec
    if not isinstance(spec, dict):
        raise ConfigError(path, "expected a list or a range object")
    if set(spec) == {"values"}:
        return _expand(path + ".values", spec["values"])
    extra = set(spec) - _RANGE_KEYS
    if extra:
        raise ConfigError(f"{path}.{sorted(extra)[0]}", "unknown key")
    missing = {"start", "stop", "count"} - set(spec)
    if missing:
        raise ConfigError(f"{path}.{sorted(missing)[0]}", "missing")
    count = spec["count"]
    if not isinstance(count, int) or isinstance(count, bool) or count < 1:
        raise ConfigError(f"{path}.count", "must be an integer >= 1")
    scale = spec.get("scale", "linear")
    lo, hi = float(spec["start"]), float(spec["stop"])
    if scale == "linear":
        vals = np.linspace(lo, hi, count)
    elif scale == "log":
        if lo <= 0 or hi <= 0:
            raise ConfigError(path, "log range needs positive endpoints")
        vals = np.geomspace(lo, hi, count)
    else:
        raise ConfigError(f"{path}.scale", "must be 'linear' or 'log'")
    return [float(v) for v in vals]


def _check_model(model: dict) -> None:
    for k in model:
        if k not in _MODEL_FIELDS:
            raise ConfigError(f"model.{k}", "unknown key")
    trial = dict(model)
    if "J" in trial:
        trial["J"] = tuple(trial["J"])
    elif "N" in trial:
        trial["J"] = (1.0,) * (int(trial["N"]) - 1)
    try:
        ModelSpec(**trial)
    except (TypeError, ValueError) as exc:
        raise ConfigError("model", str(exc)) from None


def parse_config(text: str) -> RunConfig:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"line {exc.lineno} column {exc.colno}", exc.msg) from None
    if not isinstance(doc, dict):
        raise ConfigError("$", "top level must be an object")
    for k in doc:
        if k not in _TOP_KEYS:
            raise ConfigError(k, "unknown key")
    exp = doc.get("experiment")
    if exp not in COMMANDS:
        raise ConfigError("experiment", f"must be one of {list(COMMANDS)}")
    model = doc.get("model", {})
    if not isinstance(model, dict):
        raise ConfigError("model", "expected an object")
    _check_model(model)
    grid_doc = doc.get("grid", {})
    if not isinstance(grid_doc, dict):
        raise ConfigError("grid", "expected an object")
    grid = {name: _expand(f"grid.{name}", v) for name, v in grid_doc.items()}
    seed = doc.get("seed", DEFAULT_SEED)
    if not isinstance(seed, int) or isinstance(seed, bool) or not 0 <= seed < 2**64:
        raise ConfigError("seed", "must be a 64-bit unsigned integer")
    threads = doc.get("threads", "auto")
    if threads != "auto" and (not isinstance(threads, int) or isinstance(threads, bool) or threads < 1):
        raise ConfigError("threads", "must be 'auto' or a positive integer")
    out = doc.get("output")
    if out is not None and not isinstance(out, str):
        raise ConfigError("output", "expected a string")
    return RunConfig(exp, model, grid, seed, out, threads)


# ---------------------------------------------------------------------------
# CSV

def _cell(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        if not math.isfinite(x):
            if math.isinf(x):
                return "inf" if x > 0 else "-inf"
            raise ValueError("NaN cells are not allowed")
        return format(float(x), ".15g")
    return str(x)


def write_table(table: ScanTable, path=None) -> str:
    """RFC-4180 CSV with a header row; returns the text and writes it when ``path`` is given."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(table.labels)
    for i, row in enumerate(table.rows):
        if len(row) != len(table.columns):
            raise ValueError(f"row {i} is not rectangular")
        try:
            w.writerow([_cell(x) for x in row])
        except ValueError as exc:
            raise ValueError(f"row {i}: {exc}") from None
    text = buf.getvalue()
    if path is not None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    return text


def read_table(text: str) -> tuple[list, list]:
    """Header and rows with numeric cells converted to float."""
    rows = list(csv.reader(io.StringIO(text)))
    out = []
    for r in rows[1:]:
        conv = []
        for c in r:
            try:
                conv.append(float(c))
            except ValueError:
                conv.append(c)
        out.append(conv)
    return rows[0], out


# ---------------------------------------------------------------------------
# tool subcommands on a single model

def _spec(cfg: RunConfig) -> ModelSpec:
    model = dict(cfg.model)
    if "J" in model:
        model["J"] = tuple(model["J"])
    elif int(model.get("N", 1)) > 1:
        # random disorder around unit hopping, reproducible from the seed
        rng = np.random.default_rng(cfg.seed)
        model["J"] = tuple(rng.uniform(0.5, 1.5, int(model["N"]) - 1))
    return ModelSpec(**model)


def _tool(cfg: RunConfig) -> ScanTable:
    spec = _spec(cfg)
    t = ScanTable(cfg.experiment, [("quantity", ""), ("value", "")])
    if cfg.experiment == "build":
        H, jumps = build(spec)
        t.add("hilbert_dim", H.dim)
        t.add("h_nnz", H.nnz)
        t.add("h_hermiticity_error", float(abs(H.csr - H.csr.conj().T).max()) if H.nnz else 0.0)
        t.add("jump_count", len(jumps))
        for k, c in enumerate(jumps):
            t.add(f"jump_{k}_nnz", c.nnz)
    elif cfg.experiment == "verify":
        if spec.variant not in ("two_chain", "qutrit_two_chain"):
            raise ValueError("verify needs a driven two-chain variant")
        H, jumps = build(spec)
        psi = dimer.pair_condensate_state(spec)
        v = psi.amplitudes
        E = complex(np.vdot(v, H.csr @ v))
        t.add("h_residual", float(np.linalg.norm(H.csr @ v - E * v)))
        t.add("energy", E.real)
        t.add("jump_residual", max(float(np.linalg.norm(c.csr @ v)) for c in jumps))
    elif cfg.experiment == "steady-state":
        states, mult, _ = numeric_steady_state(spec, seed=cfg.seed)
        t.add("multiplicity", mult)
        t.add("purity", obs.purity(states[0]))
        if spec.variant == "two_chain" and mult == 1:
            t.add("fidelity_condensate", obs.fidelity(states[0], dimer.pair_condensate_state(spec)))
    else:
        res = lindblad.spectrum_gap(lindblad.liouvillian(*build(spec)), seed=cfg.seed)
        t.add("zero_multiplicity", res.zero_multiplicity)
        t.add("gap", res.gap)
        t.add("tau_rel", res.tau_rel)
        t.add("converged", res.converged)
        t.add("covered_to", res.covered_to)
        for i, x in enumerate(res.eigenvalues[:60]):
            t.add(f"eig_{i}_re", float(x.real))
            t.add(f"eig_{i}_im", float(x.imag))
    return t


def run(cfg: RunConfig) -> ScanTable:
    t0 = time.perf_counter()
    table = _tool(cfg) if cfg.experiment in TOOLS else REGISTRY[cfg.experiment](cfg.experiment_cfg())
    table.metadata.setdefault("wall_time_s", time.perf_counter() - t0)
    return table


def _meta(cfg: RunConfig, table: ScanTable) -> dict:
    return {
        "config": asdict(cfg),
        "config_sha256": cfg.digest(),
        "seed": cfg.seed,
        "threads": cfg.threads,
        "versions": {"holepair": __version__, "backend": BACKEND, "numpy": np.__version__,
                     "scipy": scipy.__version__, "python": platform.python_version()},
        "columns": [{"label": c[0], "unit": c[1]} for c in table.columns],
        "results": table.metadata,
    }


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="holepair", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--config", help="JSON configuration file ('-' for stdin)")
        s.add_argument("--out", help="output prefix; writes <out>.csv and <out>.meta.json")
        s.add_argument("--seed", type=int, help="overrides the configured seed")
        s.add_argument("--threads", help="'auto' or a positive integer")
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.config:
            text = sys.stdin.read() if args.config == "-" else open(args.config, encoding="utf-8").read()
            doc = json.loads(text) if text.strip() else {}
        else:
            doc = {}
        if isinstance(doc, dict):
            if doc.get("experiment", args.command) != args.command:
                raise ConfigError("experiment", f"does not match subcommand {args.command!r}")
            doc["experiment"] = args.command
            if args.seed is not None:
                doc["seed"] = args.seed
            if args.threads is not None:
                doc["threads"] = "auto" if args.threads == "auto" else int(args.threads)
            if args.out is not None:
                doc["output"] = args.out
            text = json.dumps(doc)
        cfg = parse_config(text)
        table = run(cfg)
        if cfg.output:
            os.makedirs(os.path.dirname(os.path.abspath(cfg.output)), exist_ok=True)
            write_table(table, cfg.output + ".csv")
            with open(cfg.output + ".meta.json", "w", encoding="utf-8") as fh:
                json.dump(_meta(cfg, table), fh, indent=2, sort_keys=True, default=str)
                fh.write("\n")
        else:
            sys.stdout.write(write_table(table))
    except (ConfigError, json.JSONDecodeError, ValueError, RuntimeError, OSError) as exc:
        record = {"error": type(exc).__name__, "message": str(exc)}
        if isinstance(exc, ConfigError):
            record["path"] = exc.path
        sys.stderr.write(json.dumps(record) + "\n")
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
