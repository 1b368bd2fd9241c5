"""Reproducible experiment scenarios: configs, runner, CSV/JSON emission.

Each scenario mirrors one of the production experiments: entropy growth
across environment dimensions, rate versus coupling strength for both
interaction kinds, classical autocorrelation, the double-blocking
forgetfulness curves, logarithmic entropy growth in the regular regime, and
the qualitative noiseless-to-noisy capacity transition.

A run is reproducible bit for bit from its config and seed list: scenario
points are enumerated in a fixed order, computed (possibly concurrently) as
pure functions of (config, point, seed), and written sorted by parameter
tuple.  The CSV carries data only; the JSON sidecar carries the full config,
seed list, software version and wall-clock time.
"""

from __future__ import annotations

import dataclasses
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .channel import (
    ChannelConfig,
    Coupling,
    capacity_estimate,
    entropy_series,
    fit_entropy_rate,
)
from .classical import autocorrelation, uniform_phase_ensemble
from .memory import (
    BlockProtocol,
    InitialStateSpec,
    haar_initial,
    maximize_trace_distance,
    momentum_initial,
)
from .torus import DEFAULT_SHIFT, haar_random_state, make_spec

CHAOTIC_K = math.sqrt(2.0)

SCENARIOS = (
    "entropy-scan",
    "rate-vs-eta",
    "classical-autocorr",
    "forgetfulness",
    "regular-growth",
    "capacity-transition",
)


class ConfigError(ValueError):
    """Invalid experiment configuration; the message names the field."""


@dataclass(frozen=True)
class ExperimentConfig:
    """Flat, fully serializable description of one scenario run."""

    scenario: str
    seeds: tuple[int, ...]
    out_dir: str = "results"
    threads: int = 1
    # environment and train
    dims: tuple[int, ...] = (1024,)
    phi0: float = DEFAULT_SHIFT
    theta0: float = DEFAULT_SHIFT
    k_values: tuple[float, ...] = (CHAOTIC_K,)
    eta: float = 0.3
    eta_values: tuple[float, ...] = ()
    spacing: int = 1
    nq_values: tuple[int, ...] = tuple(range(1, 11))
    couplings: tuple[str, ...] = ("kicked_quadratic",)
    # classical diagnostics
    particles: int = 1_000_000
    autocorr_lags: int = 50
    # forgetfulness
    k_transmit_values: tuple[float, ...] = (1.43, -1.64)
    k_idle: float = CHAOTIC_K
    idle_uses: tuple[int, ...] = (0, 1, 2, 3, 5, 7, 10)
    omega0_kinds: tuple[str, ...] = ("haar", "momentum:0")
    opt_starts: int = 256
    opt_budget: int = 20_000


_DEFAULTS: dict[str, dict] = {
    "entropy-scan": dict(
        dims=(256, 512, 1024),
        k_values=(CHAOTIC_K,),
        eta=0.3,
        nq_values=tuple(range(1, 25)),
    ),
    "rate-vs-eta": dict(
        dims=(1024,),
        k_values=(CHAOTIC_K,),
        nq_values=(8,),
        couplings=("kicked_quadratic", "continuous_sin_p"),
        eta_values=(0.0, 0.05, 0.1, 0.2, 0.3, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0, 2.5, 3.0),
    ),
    "classical-autocorr": dict(k_values=(CHAOTIC_K, -CHAOTIC_K)),
    "forgetfulness": dict(dims=(1024,), eta=0.3),
    "regular-growth": dict(
        dims=(1024,),
        k_values=(-1.8, -2.3, -2.8),
        eta=0.3,
        nq_values=(2, 3, 4, 6, 8, 11, 16, 23, 32, 45, 64),
    ),
    "capacity-transition": dict(
        dims=(512,),
        k_values=(-5.0, -4.5, -3.5, -2.8, -2.1, -1.4, -0.7, 0.7, 1.4, 2.1, 2.8, 3.5),
        eta=0.3,
        nq_values=tuple(range(1, 33)),
    ),
}


def default_config(scenario: str, seeds: tuple[int, ...] = (0, 1, 2, 3, 4)) -> ExperimentConfig:
    """Desk-scale defaults for a scenario (larger sizes go in a config file)."""
    if scenario not in SCENARIOS:
        raise ConfigError(f"scenario: unknown scenario {scenario!r}")
    return ExperimentConfig(scenario=scenario, seeds=tuple(seeds), **_DEFAULTS[scenario])


# --------------------------------------------------------------------------
# Config file parsing: flat "key = value" lines, '#' comments, typed by the
# dataclass field; unknown keys are a hard error.
# --------------------------------------------------------------------------

def _parse_int_list(text: str) -> tuple[int, ...]:
    out: list[int] = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if ".." in part:
            lo, hi = part.split("..")
            out.extend(range(int(lo), int(hi) + 1))
        else:
            out.append(int(part))
    return tuple(out)


def _parse_float_list(text: str) -> tuple[float, ...]:
    return tuple(float(p) for p in text.split(",") if p.strip())


def _parse_str_list(text: str) -> tuple[str, ...]:
    return tuple(p.strip() for p in text.split(",") if p.strip())


_FIELD_PARSERS = {
    "scenario": str,
    "seeds": _parse_int_list,
    "out_dir": str,
    "threads": int,
    "dims": _parse_int_list,
    "phi0": float,
    "theta0": float,
    "k_values": _parse_float_list,
    "eta": float,
    "eta_values": _parse_float_list,
    "spacing": int,
    "nq_values": _parse_int_list,
    "couplings": _parse_str_list,
    "particles": int,
    "autocorr_lags": int,
    "k_transmit_values": _parse_float_list,
    "k_idle": float,
    "idle_uses": _parse_int_list,
    "omega0_kinds": _parse_str_list,
    "opt_starts": int,
    "opt_budget": int,
}


def load_config(path: str | Path, scenario: str) -> ExperimentConfig:
    """Read a key = value config file on top of the scenario defaults."""
    overrides = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        if key not in _FIELD_PARSERS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        try:
            overrides[key] = _FIELD_PARSERS[key](value.strip())
        except ValueError as exc:
            raise ConfigError(f"{path}:{lineno}: {key}: {exc}") from exc
    if "scenario" in overrides and overrides["scenario"] != scenario:
        raise ConfigError(
            f"scenario: config file says {overrides.pop('scenario')!r},"
            f" command line says {scenario!r}"
        )
    overrides.pop("scenario", None)
    base = default_config(scenario)
    return dataclasses.replace(base, **overrides)


def validate_config(config: ExperimentConfig) -> None:
    """Raise ConfigError naming the offending field."""
    if config.scenario not in SCENARIOS:
        raise ConfigError(f"scenario: unknown scenario {config.scenario!r}")
    if not config.seeds:
        raise ConfigError("seeds: seed list must not be empty")
    if config.threads < 1:
        raise ConfigError("threads: must be >= 1")
    if any(d < 2 for d in config.dims) or not config.dims:
        raise ConfigError("dims: every dimension must be >= 2")
    if config.eta < 0:
        raise ConfigError("eta: coupling strength must be nonnegative")
    if config.spacing < 1:
        raise ConfigError("spacing: n0 must be a positive integer")
    if config.scenario in ("entropy-scan", "regular-growth", "capacity-transition"):
        if not config.nq_values or min(config.nq_values) < 1:
            raise ConfigError("nq_values: need positive train lengths")
    if config.scenario == "rate-vs-eta":
        if not config.eta_values:
            raise ConfigError("eta_values: need at least one coupling strength")
        if any(e < 0 for e in config.eta_values):
            raise ConfigError("eta_values: coupling strengths must be nonnegative")
        for name in config.couplings:
            try:
                Coupling.from_name(name)
            except ValueError as exc:
                raise ConfigError(f"couplings: {exc}") from exc
    if config.scenario == "classical-autocorr":
        if config.particles < 1:
            raise ConfigError("particles: need a nonempty ensemble")
        if config.autocorr_lags < 1:
            raise ConfigError("autocorr_lags: need at least one lag")
    if config.scenario == "forgetfulness":
        if any(l < 0 for l in config.idle_uses):
            raise ConfigError("idle_uses: idle counts must be nonnegative")
        for kind in config.omega0_kinds:
            _parse_omega0(kind)


def _parse_omega0(kind: str) -> InitialStateSpec:
    if kind == "haar":
        return haar_initial(0)
    if kind.startswith("momentum:"):
        try:
            return momentum_initial(int(kind.split(":", 1)[1]))
        except ValueError as exc:
            raise ConfigError(f"omega0_kinds: bad momentum index in {kind!r}") from exc
    raise ConfigError(f"omega0_kinds: unknown initial-state kind {kind!r}")


# --------------------------------------------------------------------------
# Scenario point functions.  Each returns a list of CSV rows and is a pure
# function of (config, point parameters), so points can run concurrently and
# the output order never depends on scheduling.
# --------------------------------------------------------------------------

_COLUMNS = {
    "entropy-scan": ("N", "Nq", "seed", "S_e", "R"),
    "rate-vs-eta": ("coupling", "eta", "seed", "S_e", "R"),
    "classical-autocorr": ("K", "seed", "L", "C", "C_norm"),
    "forgetfulness": ("omega0", "K_transmit", "L", "seed", "max_trace_distance"),
    "regular-growth": ("K", "Nq", "seed", "S_e"),
    "capacity-transition": ("K", "seed", "R", "Q"),
}


def _points(config: ExperimentConfig) -> list[tuple]:
    c = config
    if c.scenario == "entropy-scan":
        return [(dim, seed) for dim in c.dims for seed in c.seeds]
    if c.scenario == "rate-vs-eta":
        return [
            (coupling, eta, seed)
            for coupling in c.couplings
            for eta in c.eta_values
            for seed in c.seeds
        ]
    if c.scenario == "classical-autocorr":
        return [(k, seed) for k in c.k_values for seed in c.seeds]
    if c.scenario == "forgetfulness":
        return [
            (kind, k_transmit, idle, seed)
            for kind in c.omega0_kinds
            for k_transmit in c.k_transmit_values
            for idle in c.idle_uses
            for seed in c.seeds
        ]
    if c.scenario == "regular-growth":
        return [(k, seed) for k in c.k_values for seed in c.seeds]
    if c.scenario == "capacity-transition":
        return [(k, seed) for k in c.k_values for seed in c.seeds]
    raise ConfigError(f"scenario: unknown scenario {c.scenario!r}")


def _run_point(config: ExperimentConfig, point: tuple) -> list[tuple]:
    c = config
    if c.scenario == "entropy-scan":
        dim, seed = point
        spec = make_spec(dim, c.phi0, c.theta0)
        cfg = ChannelConfig(spec, c.k_values[0], c.eta, max(c.nq_values), c.spacing)
        series = entropy_series(cfg, haar_random_state(spec, seed), c.nq_values)
        return [
            (dim, nq, seed, se, se / nq) for nq, se in zip(c.nq_values, series)
        ]
    if c.scenario == "rate-vs-eta":
        coupling_name, eta, seed = point
        spec = make_spec(c.dims[0], c.phi0, c.theta0)
        nq = max(c.nq_values)
        cfg = ChannelConfig(
            spec, c.k_values[0], eta, nq, c.spacing, Coupling.from_name(coupling_name)
        )
        se = entropy_series(cfg, haar_random_state(spec, seed), [nq])[0]
        return [(coupling_name, eta, seed, se, se / nq)]
    if c.scenario == "classical-autocorr":
        k, seed = point
        ens = uniform_phase_ensemble(k, c.particles, p0=0.0, seed=seed)
        corr = autocorrelation(ens, l_max=c.autocorr_lags)
        return [
            (k, seed, lag, corr[lag], corr[lag] / corr[0] if corr[0] > 0 else 0.0)
            for lag in range(c.autocorr_lags + 1)
        ]
    if c.scenario == "forgetfulness":
        kind, k_transmit, idle, seed = point
        spec = make_spec(c.dims[0], c.phi0, c.theta0)
        omega0 = _parse_omega0(kind)
        if omega0.kind == "haar":
            omega0 = haar_initial(seed)
        proto = BlockProtocol(
            spec=spec,
            k_transmit=k_transmit,
            coupling_strength=c.eta,
            idle_uses=idle,
            k_idle=c.k_idle,
            omega0=omega0,
        )
        result = maximize_trace_distance(
            proto, budget=c.opt_budget, n_starts=c.opt_starts, seed=seed
        )
        return [(kind, k_transmit, idle, seed, result.value)]
    if c.scenario == "regular-growth":
        k, seed = point
        spec = make_spec(c.dims[0], c.phi0, c.theta0)
        cfg = ChannelConfig(spec, k, c.eta, max(c.nq_values), c.spacing)
        series = entropy_series(cfg, haar_random_state(spec, seed), c.nq_values)
        return [(k, nq, seed, se) for nq, se in zip(c.nq_values, series)]
    if c.scenario == "capacity-transition":
        k, seed = point
        spec = make_spec(c.dims[0], c.phi0, c.theta0)
        cfg = ChannelConfig(spec, k, c.eta, max(c.nq_values), c.spacing)
        series = entropy_series(cfg, haar_random_state(spec, seed), c.nq_values)
        rate = fit_entropy_rate(np.asarray(c.nq_values), series, spec.dim)
        rate = min(max(rate, 0.0), 1.0)
        return [(k, seed, rate, capacity_estimate(rate))]
    raise ConfigError(f"scenario: unknown scenario {c.scenario!r}")


def _format_cell(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".12g")


def run(config: ExperimentConfig) -> dict:
    """Execute a scenario; write <scenario>.csv and <scenario>.json.

    Returns a record with the output paths and the wall-clock time.  Rows
    are written in parameter order regardless of worker scheduling, so the
    CSV is byte-identical across thread counts.
    """
    validate_config(config)
    started = time.time()
    points = _points(config)
    if config.threads > 1:
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            results = list(pool.map(lambda p: _run_point(config, p), points))
    else:
        results = [_run_point(config, p) for p in points]

    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / f"{config.scenario}.csv"
    columns = _COLUMNS[config.scenario]
    lines = [",".join(columns)]
    for rows in results:
        for row in rows:
            lines.append(",".join(_format_cell(v) for v in row))
    csv_path.write_text("\n".join(lines) + "\n")

    wall_clock = time.time() - started
    sidecar = {
        "scenario": config.scenario,
        "config": dataclasses.asdict(config),
        "seeds": list(config.seeds),
        "version": __version__,
        "wall_clock_seconds": wall_clock,
        "csv": csv_path.name,
        "rows": len(lines) - 1,
    }
    json_path = out_dir / f"{config.scenario}.json"
    json_path.write_text(json.dumps(sidecar, indent=2) + "\n")
    return {"csv": str(csv_path), "json": str(json_path), "wall_clock_seconds": wall_clock}


# --------------------------------------------------------------------------
# Summaries of emitted CSVs: group statistics and growth-law fits.
# --------------------------------------------------------------------------

def _read_csv(path: str | Path) -> tuple[list[str], list[list[str]]]:
    text = Path(path).read_text().strip()
    if not text:
        raise ValueError(f"{path}: empty CSV")
    lines = text.splitlines()
    header = lines[0].split(",")
    rows = [line.split(",") for line in lines[1:]]
    if any(len(r) != len(header) for r in rows):
        raise ValueError(f"{path}: ragged CSV rows")
    return header, rows


def _linear_fit(x: np.ndarray, y: np.ndarray) -> dict:
    """Slope, intercept, slope standard error and residual RMS of y ~ x."""
    if x.size < 2 or np.allclose(x, x[0]):
        return {"slope": 0.0, "intercept": float(y.mean()), "slope_stderr": 0.0,
                "residual_rms": float(np.sqrt(np.mean((y - y.mean()) ** 2)))}
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    dof = max(x.size - 2, 1)
    sxx = np.sum((x - x.mean()) ** 2)
    stderr = math.sqrt(np.sum(resid**2) / dof / sxx) if sxx > 0 else 0.0
    return {
        "slope": float(slope),
        "intercept": float(intercept),
        "slope_stderr": float(stderr),
        "residual_rms": float(np.sqrt(np.mean(resid**2))),
    }


def summarize(csv_path: str | Path) -> dict:
    """Per-group statistics for a scenario CSV produced by run().

    Entropy-bearing CSVs (with Nq and S_e columns) get growth-law fits per
    parameter group: mean S_e per Nq averaged over seeds, a linear fit of
    S_e vs Nq and a linear fit of S_e vs log2(Nq), each with slope standard
    error and residual RMS.  Other CSVs get per-column means and standard
    errors grouped over seeds.
    """
    header, raw_rows = _read_csv(csv_path)
    idx = {name: i for i, name in enumerate(header)}
    summary: dict = {"csv": str(csv_path), "columns": header, "groups": []}

    if "Nq" in idx and "S_e" in idx:
        group_cols = [c for c in header if c not in ("Nq", "seed", "S_e", "R")]
        groups: dict[tuple, dict[int, list[float]]] = {}
        for row in raw_rows:
            key = tuple(row[idx[c]] for c in group_cols)
            nq = int(row[idx["Nq"]])
            groups.setdefault(key, {}).setdefault(nq, []).append(float(row[idx["S_e"]]))
        for key, per_nq in sorted(groups.items()):
            nq_axis = np.array(sorted(per_nq))
            mean_se = np.array([np.mean(per_nq[n]) for n in nq_axis])
            entry = {
                "group": dict(zip(group_cols, key)),
                "n_points": int(nq_axis.size),
                "mean_S_e": {int(n): float(s) for n, s in zip(nq_axis, mean_se)},
                "fit_linear": _linear_fit(nq_axis.astype(float), mean_se),
                "fit_log2": _linear_fit(np.log2(nq_axis.astype(float)), mean_se),
            }
            summary["groups"].append(entry)
        return summary

    group_cols = [c for c in header if c not in ("seed",) and not _is_numeric_col(raw_rows, idx[c])]
    value_cols = [c for c in header if c not in group_cols + ["seed"]]
    groups2: dict[tuple, list[list[float]]] = {}
    for row in raw_rows:
        key = tuple(row[idx[c]] for c in group_cols)
        groups2.setdefault(key, []).append([float(row[idx[c]]) for c in value_cols])
    for key, vals in sorted(groups2.items()):
        arr = np.array(vals)
        stats = {}
        for i, col in enumerate(value_cols):
            col_vals = arr[:, i]
            stderr = col_vals.std(ddof=1) / math.sqrt(len(col_vals)) if len(col_vals) > 1 else 0.0
            stats[col] = {"mean": float(col_vals.mean()), "stderr": float(stderr)}
        summary["groups"].append({"group": dict(zip(group_cols, key)), "stats": stats})
    return summary


def _is_numeric_col(rows: list[list[str]], col: int) -> bool:
    try:
        for row in rows:
            float(row[col])
        return True
    except ValueError:
        return False
