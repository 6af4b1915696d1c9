"""Experiment configuration: TOML schema, validation, lossless round-trip.

Schema (keys in brackets are TOML tables)::

    seed = 0                 # integer, drives any randomized perturbation
    output = "out"           # directory for scan/report artifacts

    [model]
    N = 1                    # spatial dimension, 1..3
    L = 20.0                 # half box width
    n = 256                  # points per axis (even)
    d = 0.25                 # diffusion order
    p = 3.0                  # nonlinearity power (overridden per scan row)
    alpha = 0.0              # spatial weight exponent

    [model.forcing]
    kind = "power"           # "zero" | "power" | "two_regime"
    sigma = -0.5
    m = 0.5                  # two_regime only
    crossover = 1.0          # two_regime only

    [model.w]                # forcing profile preset
    preset = "gaussian"      # "gaussian" | "power_law" | "zero"
    amplitude = 1e-4
    width = 1.0
    center = 0.0
    # power_law: amplitude, exponent  (samples amplitude * |x|^{-exponent})

    [model.u0]               # initial data preset, same presets as w
    preset = "zero"
    perturb = 0.0            # optional seeded uniform perturbation amplitude

    [run]
    horizon = 200.0
    dt_init = 1e-3           # default 1e-3
    blow_threshold = 1e3     # default max(1e6 * sup u0, 1e3)

    [scan]
    p = [1.2, 1.4, 2.2, 3.0]                 # list, or {start, stop, count}
    sigma = [-0.5]

Serialization is lossless: parse -> serialize -> parse yields an identical
ExperimentConfig (floats are emitted via repr, which round-trips).
"""

from __future__ import annotations

from dataclasses import dataclass, field as dataclass_field

import numpy as np
import tomli

from .grid import Field, GridSpec, constant_field, from_function, make_grid
from .solver import ModelParams, PurePower, RunControl, TwoRegime, ZeroForcing


class ConfigError(ValueError):
    """Validation failure; message names the offending key path."""


@dataclass(frozen=True)
class PresetConfig:
    preset: str = "zero"
    amplitude: float = 1.0
    width: float = 1.0
    center: float = 0.0
    exponent: float = 1.0
    perturb: float = 0.0


@dataclass(frozen=True)
class ForcingConfig:
    kind: str = "zero"
    sigma: float = 0.0
    m: float = 0.0
    crossover: float = 1.0


@dataclass(frozen=True)
class ModelConfig:
    N: int = 1
    L: float = 20.0
    n: int = 256
    d: float = 0.5
    p: float = 3.0
    alpha: float = 0.0
    forcing: ForcingConfig = ForcingConfig()
    w: PresetConfig = PresetConfig()
    u0: PresetConfig = PresetConfig()


@dataclass(frozen=True)
class RunConfig:
    horizon: float = 1.0
    dt_init: float = 1e-3
    blow_threshold: float | None = None


@dataclass(frozen=True)
class ScanConfig:
    p_values: tuple = ()
    sigma_values: tuple = ()


@dataclass(frozen=True)
class ExperimentConfig:
    model: ModelConfig = ModelConfig()
    run: RunConfig = RunConfig()
    scan: ScanConfig = ScanConfig()
    seed: int = 0
    output: str = "out"


# ---------------------------------------------------------------------------
# parsing + validation
# ---------------------------------------------------------------------------

def _take(table: dict, path: str, key: str, kind, default):
    if key not in table:
        if default is None:
            raise ConfigError(f"{path}.{key}: required key missing")
        return default
    value = table.pop(key)
    if kind is float and isinstance(value, int) and not isinstance(value, bool):
        value = float(value)
    if not isinstance(value, kind) or isinstance(value, bool):
        raise ConfigError(f"{path}.{key}: expected {kind.__name__}, got {value!r}")
    return value


def _reject_unknown(table: dict, path: str):
    if table:
        raise ConfigError(f"{path}: unknown keys {sorted(table)}")


def _parse_preset(table: dict, path: str) -> PresetConfig:
    table = dict(table)
    preset = _take(table, path, "preset", str, "zero")
    if preset not in ("zero", "gaussian", "power_law"):
        raise ConfigError(f"{path}.preset: unknown preset {preset!r}")
    cfg = PresetConfig(
        preset=preset,
        amplitude=_take(table, path, "amplitude", float, 1.0),
        width=_take(table, path, "width", float, 1.0),
        center=_take(table, path, "center", float, 0.0),
        exponent=_take(table, path, "exponent", float, 1.0),
        perturb=_take(table, path, "perturb", float, 0.0),
    )
    _reject_unknown(table, path)
    if cfg.width <= 0:
        raise ConfigError(f"{path}.width: must be positive, got {cfg.width}")
    if cfg.perturb < 0:
        raise ConfigError(f"{path}.perturb: must be nonnegative, got {cfg.perturb}")
    return cfg


def _parse_forcing(table: dict, path: str) -> ForcingConfig:
    table = dict(table)
    kind = _take(table, path, "kind", str, "zero")
    if kind not in ("zero", "power", "two_regime"):
        raise ConfigError(f"{path}.kind: unknown forcing kind {kind!r}")
    cfg = ForcingConfig(
        kind=kind,
        sigma=_take(table, path, "sigma", float, 0.0),
        m=_take(table, path, "m", float, 0.0),
        crossover=_take(table, path, "crossover", float, 1.0),
    )
    _reject_unknown(table, path)
    if kind != "zero" and cfg.sigma <= -1:
        raise ConfigError(f"{path}.sigma: must exceed -1, got {cfg.sigma}")
    if kind == "two_regime" and cfg.crossover <= 0:
        raise ConfigError(f"{path}.crossover: must be positive, got {cfg.crossover}")
    return cfg


def _parse_values(spec, path: str) -> tuple:
    if isinstance(spec, list):
        out = []
        for i, v in enumerate(spec):
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise ConfigError(f"{path}[{i}]: expected number, got {v!r}")
            out.append(float(v))
        return tuple(out)
    if isinstance(spec, dict):
        spec = dict(spec)
        start = _take(spec, path, "start", float, None)
        stop = _take(spec, path, "stop", float, None)
        count = _take(spec, path, "count", int, None)
        _reject_unknown(spec, path)
        if count < 1:
            raise ConfigError(f"{path}.count: must be >= 1, got {count}")
        return tuple(float(v) for v in np.linspace(start, stop, count))
    raise ConfigError(f"{path}: expected list or {{start, stop, count}} table")


def _parse_model(table: dict, path: str) -> ModelConfig:
    cfg = ModelConfig(
        N=_take(table, path, "N", int, 1),
        L=_take(table, path, "L", float, 20.0),
        n=_take(table, path, "n", int, 256),
        d=_take(table, path, "d", float, 0.5),
        p=_take(table, path, "p", float, 3.0),
        alpha=_take(table, path, "alpha", float, 0.0),
        forcing=_parse_forcing(table.pop("forcing", {}), path + ".forcing"),
        w=_parse_preset(table.pop("w", {}), path + ".w"),
        u0=_parse_preset(table.pop("u0", {}), path + ".u0"),
    )
    _reject_unknown(table, path)
    if cfg.N not in (1, 2, 3):
        raise ConfigError(f"{path}.N: dimension must be 1, 2 or 3, got {cfg.N}")
    if cfg.L <= 0:
        raise ConfigError(f"{path}.L: must be positive, got {cfg.L}")
    if cfg.n < 8 or cfg.n % 2:
        raise ConfigError(f"{path}.n: must be even and >= 8, got {cfg.n}")
    if cfg.d <= 0:
        raise ConfigError(f"{path}.d: must be positive, got {cfg.d}")
    if cfg.p <= 1:
        raise ConfigError(f"{path}.p: must exceed 1, got {cfg.p}")
    a = cfg.alpha
    if a < 0 and -a >= min(2.0 * cfg.d, cfg.N):
        raise ConfigError(
            f"{path}.alpha: negative alpha needs -alpha < min(2d, N)="
            f"{min(2.0 * cfg.d, cfg.N)}, got {a}"
        )
    if 2.0 * cfg.d + a <= 0:
        raise ConfigError(f"{path}.alpha: requires 2d + alpha > 0, got {2 * cfg.d + a}")
    return cfg


def parse_config_dict(raw: dict) -> ExperimentConfig:
    raw = dict(raw)
    model = _parse_model(dict(raw.pop("model", {})), "model")
    run_table = dict(raw.pop("run", {}))
    run = RunConfig(
        horizon=_take(run_table, "run", "horizon", float, 1.0),
        dt_init=_take(run_table, "run", "dt_init", float, 1e-3),
        blow_threshold=(
            _take(run_table, "run", "blow_threshold", float, None)
            if "blow_threshold" in run_table else None
        ),
    )
    _reject_unknown(run_table, "run")
    if run.horizon <= 0:
        raise ConfigError(f"run.horizon: must be positive, got {run.horizon}")
    if run.dt_init <= 0:
        raise ConfigError(f"run.dt_init: must be positive, got {run.dt_init}")
    scan_table = dict(raw.pop("scan", {}))
    scan = ScanConfig(
        p_values=_parse_values(scan_table.pop("p", []), "scan.p"),
        sigma_values=_parse_values(scan_table.pop("sigma", []), "scan.sigma"),
    )
    _reject_unknown(scan_table, "scan")
    for i, p in enumerate(scan.p_values):
        if p <= 1:
            raise ConfigError(f"scan.p[{i}]: must exceed 1, got {p}")
    for i, s in enumerate(scan.sigma_values):
        if s <= -1:
            raise ConfigError(f"scan.sigma[{i}]: must exceed -1, got {s}")
    seed = _take(raw, "", "seed", int, 0)
    output = _take(raw, "", "output", str, "out")
    _reject_unknown(raw, "top level")
    return ExperimentConfig(model=model, run=run, scan=scan, seed=seed, output=output)


def parse_config(path) -> ExperimentConfig:
    try:
        with open(path, "rb") as fh:
            raw = tomli.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(f"config parse error in {path}: {exc}") from exc
    return parse_config_dict(raw)


# ---------------------------------------------------------------------------
# serialization (floats via repr -> lossless round-trip)
# ---------------------------------------------------------------------------

def _emit(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        text = repr(value)
        return text if any(c in text for c in ".e") else text + ".0"
    if isinstance(value, str):
        return '"' + value.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(value, (tuple, list)):
        return "[" + ", ".join(_emit(v) for v in value) + "]"
    raise TypeError(f"cannot serialize {value!r}")


def serialize_config(cfg: ExperimentConfig) -> str:
    lines = [f"seed = {_emit(cfg.seed)}", f"output = {_emit(cfg.output)}", ""]
    m = cfg.model
    lines += ["[model]"]
    for key in ("N", "L", "n", "d", "p", "alpha"):
        lines.append(f"{key} = {_emit(getattr(m, key))}")
    lines += ["", "[model.forcing]"]
    for key in ("kind", "sigma", "m", "crossover"):
        lines.append(f"{key} = {_emit(getattr(m.forcing, key))}")
    for name, pr in (("w", m.w), ("u0", m.u0)):
        lines += ["", f"[model.{name}]"]
        for key in ("preset", "amplitude", "width", "center", "exponent", "perturb"):
            lines.append(f"{key} = {_emit(getattr(pr, key))}")
    lines += ["", "[run]"]
    lines.append(f"horizon = {_emit(cfg.run.horizon)}")
    lines.append(f"dt_init = {_emit(cfg.run.dt_init)}")
    if cfg.run.blow_threshold is not None:
        lines.append(f"blow_threshold = {_emit(cfg.run.blow_threshold)}")
    lines += ["", "[scan]"]
    lines.append(f"p = {_emit(cfg.scan.p_values)}")
    lines.append(f"sigma = {_emit(cfg.scan.sigma_values)}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# instantiation
# ---------------------------------------------------------------------------

def _build_profile(grid: GridSpec, pr: PresetConfig, rng) -> Field:
    if pr.preset == "zero":
        f = constant_field(grid, 0.0)
    elif pr.preset == "gaussian":
        c, w2 = pr.center, pr.width**2

        def gauss(*coords):
            r2 = sum((x - c) ** 2 for x in coords)
            return pr.amplitude * np.exp(-r2 / w2)

        f = from_function(grid, gauss)
    else:  # power_law: amplitude * |x|^{-exponent}, capped at half a cell
        r = np.maximum(grid.radius(), grid.spacing / 2.0)
        f = Field(grid, pr.amplitude * r ** (-pr.exponent))
    if pr.perturb > 0:
        noise = rng.uniform(-pr.perturb, pr.perturb, size=grid.shape)
        f = f + Field(grid, noise)
    return f


def _build_forcing(fc: ForcingConfig, sigma: float | None = None):
    s = fc.sigma if sigma is None else sigma
    if fc.kind == "zero":
        return ZeroForcing()
    if fc.kind == "power":
        return PurePower(s)
    return TwoRegime(s, fc.m, fc.crossover)


def build_params(
    cfg: ExperimentConfig, p: float | None = None, sigma: float | None = None
) -> ModelParams:
    """Instantiate ModelParams, optionally overriding p and the forcing sigma."""
    m = cfg.model
    grid = make_grid(m.N, m.L, m.n)
    rng = np.random.default_rng(cfg.seed)
    return ModelParams(
        grid=grid,
        d=m.d,
        p=m.p if p is None else p,
        alpha=m.alpha,
        forcing=_build_forcing(m.forcing, sigma),
        w=_build_profile(grid, m.w, rng),
        u0=_build_profile(grid, m.u0, rng),
    )


def build_control(cfg: ExperimentConfig) -> RunControl:
    return RunControl(dt_init=cfg.run.dt_init, blow_threshold=cfg.run.blow_threshold)
