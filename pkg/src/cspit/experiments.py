"""Scenario configuration, figure presets, sweep orchestration and CSV output.

A scenario is a base parameter set (default operating point) plus an optional
one-dimensional sweep, a list of traffic kinds and a list of policies. Each
``(value, traffic, policy)`` cell is solved analytically, simulated at desk
scale, or both.

Config files are JSON objects; every key is optional::

    {
      "name": "my-run",
      "preset": "fig3",
      "alpha": 0.8,
      "catalogue_size": 1000000,
      "cache_ratio": 0.001,          # or "cache_capacity": 1000
      "download_delay": "100ms",     # number of seconds or "<x>ms|s|day"
      "request_rate": 1e5,           # requests per second
      "request_density": null,       # lambda / gamma, lifetime scenarios only
      "filter_size": null,           # defaults to the cache capacity
      "traffic": ["irm", "hyper10", {"kind": "ipp", "t_on": "1day"}],
      "policies": ["lru", "2lru"],
      "sweep": {"parameter": "download_delay", "values": ["0ms", "50ms"]},
      "mode": "analysis",            # analysis | simulation | both
      "capacity_units": "fraction",  # how cache_capacity sweep values are read
      "lifetime": {"gamma_per_day": 5e4, "size_factor": 10, "cache_fraction": 0.01},
      "simulation": {"requests": 1e7, "seed": 1, "replications": 1,
                     "desk_catalogue": 10000}
    }
"""
from __future__ import annotations

import csv
import json
import math
import os
import re
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import List, Optional

import numpy as np

from .sim import SimConfig, replicate, summarize
from .solver import SystemConfig, solve
from .traffic import TrafficKind, ZipfCatalog

__all__ = [
    "ConfigError",
    "Scenario",
    "ResultRow",
    "PRESETS",
    "preset",
    "load_config",
    "scenario_from_dict",
    "parse_duration",
    "cell_system",
    "run_scenario",
    "emit_csv",
    "read_csv",
    "emit_curves",
    "CSV_COLUMNS",
]

DAY = 86400.0
SWEEPABLE = ("download_delay", "cache_capacity", "request_rate", "catalogue_size",
             "request_density", "on_duration")
MODES = ("analysis", "simulation", "both")
CSV_COLUMNS = ("scenario", "policy", "traffic", "param_name", "param_value", "source",
               "p_hit_cs", "p_hit_pit", "p_fwd", "half_width", "t_c", "t_m", "wall_time_s")
PARALLEL_ENV = "CSPIT_PARALLEL"

DEFAULTS = {
    "alpha": 0.8,
    "catalogue_size": 10**6,
    "cache_ratio": 1e-3,
    "cache_capacity": None,
    "download_delay": 0.1,
    "request_rate": 1e5,
    "request_density": None,
    "filter_size": None,
}


class ConfigError(ValueError):
    """Invalid scenario configuration; the message names the offending field."""


_UNITS = {"ms": 1e-3, "s": 1.0, "sec": 1.0, "d": DAY, "day": DAY, "days": DAY}


def parse_duration(value, field_name: str = "duration") -> float:
    """Seconds from a number or a string with an ``ms``/``s``/``day`` suffix."""
    if isinstance(value, bool):
        raise ConfigError(f"{field_name}: expected a duration, got {value!r}")
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        m = re.fullmatch(r"\s*([-+0-9.eE]+)\s*([a-zA-Z]*)\s*", value)
        if m:
            unit = m.group(2).lower() or "s"
            if unit in _UNITS:
                try:
                    return float(m.group(1)) * _UNITS[unit]
                except ValueError:
                    pass
    raise ConfigError(f"{field_name}: cannot parse duration {value!r}")


def _number(value, name):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{name}: expected a number, got {value!r}")
    return float(value)


# --------------------------------------------------------------------------
# scenario model
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class SimSettings:
    requests: int = 10**7
    seed: int = 1
    replications: int = 1
    desk_catalogue: int = 10**4


@dataclass(frozen=True)
class Lifetime:
    """Finite-lifetime coupling: ``K = size_factor * gamma * T_on``, ``C = fraction * K``."""

    gamma_per_day: float = 5e4
    size_factor: float = 10.0
    cache_fraction: float = 0.01

    @property
    def gamma(self) -> float:
        return self.gamma_per_day / DAY


@dataclass(frozen=True)
class Scenario:
    name: str = "scenario"
    base: dict = field(default_factory=lambda: dict(DEFAULTS))
    swept_parameter: Optional[str] = None
    sweep_values: tuple = ()
    traffic: tuple = (TrafficKind("poisson"),)
    policies: tuple = ("lru",)
    mode: str = "analysis"
    capacity_units: str = "fraction"
    lifetime: Optional[Lifetime] = None
    simulation: SimSettings = field(default_factory=SimSettings)

    @property
    def simulation_allowed(self) -> bool:
        return not (self.lifetime is not None
                    or any(t.name == "ipp" for t in self.traffic)
                    or self.swept_parameter == "catalogue_size")


def _validate(s: Scenario) -> Scenario:
    if s.mode not in MODES:
        raise ConfigError(f"mode: must be one of {MODES}, got {s.mode!r}")
    if s.swept_parameter is not None and s.swept_parameter not in SWEEPABLE:
        raise ConfigError(f"sweep.parameter: must be one of {SWEEPABLE}")
    vals = list(s.sweep_values)
    if s.swept_parameter is None and vals:
        raise ConfigError("sweep.values: given without sweep.parameter")
    if s.swept_parameter is not None and not vals:
        raise ConfigError("sweep.values: empty sweep")
    floor_ok = s.swept_parameter == "download_delay"
    for v in vals:
        if not (v > 0 or (floor_ok and v == 0)):
            raise ConfigError(f"sweep.values: {v!r} is not positive")
    if any(b <= a for a, b in zip(vals, vals[1:])):
        raise ConfigError("sweep.values: must be strictly increasing")
    if s.capacity_units not in ("fraction", "absolute"):
        raise ConfigError("capacity_units: must be 'fraction' or 'absolute'")
    if not s.traffic:
        raise ConfigError("traffic: at least one traffic kind is required")
    if not s.policies:
        raise ConfigError("policies: at least one policy is required")
    b = s.base
    if b["download_delay"] < 0:
        raise ConfigError("download_delay: must be non-negative")
    if not b["request_rate"] > 0:
        raise ConfigError("request_rate: must be positive")
    if b["catalogue_size"] < 2:
        raise ConfigError("catalogue_size: must be at least 2")
    if b["alpha"] < 0:
        raise ConfigError("alpha: must be non-negative")
    if b["cache_capacity"] is None:
        if b["cache_ratio"] is None:
            if s.swept_parameter != "cache_capacity":
                raise ConfigError("cache_ratio: give cache_ratio or cache_capacity")
        elif not 0 < b["cache_ratio"] < 1:
            raise ConfigError("cache_ratio: must lie in (0, 1)")
    if b["cache_capacity"] is not None and b["cache_capacity"] < 1:
        raise ConfigError("cache_capacity: must be at least 1")
    if b["request_density"] is not None and s.lifetime is None:
        raise ConfigError("request_density: only meaningful with a lifetime block")
    if s.swept_parameter in ("request_density", "on_duration") and s.lifetime is None:
        raise ConfigError(f"sweep.parameter: {s.swept_parameter} needs a lifetime block")
    if s.lifetime is not None and any(t.name != "ipp" for t in s.traffic):
        raise ConfigError("traffic: lifetime scenarios use ipp traffic only")
    if s.mode != "analysis" and not s.simulation_allowed:
        raise ConfigError(
            "mode: simulation is refused for this scenario; lifetimes of days against "
            "sub-second download delays (or catalogues up to 1e9) are not practical to "
            "simulate, so these scenarios are analysis-only")
    for p in s.policies:
        if p not in ("lru", "2lru", "zdd-lru"):
            raise ConfigError(f"policies: unknown policy {p!r}")
    sim = s.simulation
    if sim.requests < 10 or sim.replications < 1 or sim.desk_catalogue < 2 or sim.seed < 0:
        raise ConfigError("simulation: requests >= 10, replications >= 1, seed >= 0 required")
    return s


def _parse_traffic(item) -> TrafficKind:
    if isinstance(item, str):
        name = item.lower()
        m = re.fullmatch(r"hyper(\d+(?:\.\d+)?)", name)
        if m:
            return TrafficKind("hyperz", z=float(m.group(1)))
        try:
            return TrafficKind(name)
        except ValueError as exc:
            raise ConfigError(f"traffic: {exc}") from None
    if isinstance(item, dict):
        unknown = set(item) - {"kind", "z", "t_on", "off_ratio"}
        if unknown:
            raise ConfigError(f"traffic: unknown field(s) {sorted(unknown)}")
        kw = {"name": item.get("kind", "poisson")}
        if "z" in item:
            kw["z"] = _number(item["z"], "traffic.z")
        if "t_on" in item:
            kw["t_on"] = parse_duration(item["t_on"], "traffic.t_on")
        if "off_ratio" in item:
            kw["off_ratio"] = _number(item["off_ratio"], "traffic.off_ratio")
        try:
            return TrafficKind(**kw)
        except ValueError as exc:
            raise ConfigError(f"traffic: {exc}") from None
    raise ConfigError(f"traffic: cannot interpret {item!r}")


_SWEEP_PARSERS = {
    "download_delay": lambda v: parse_duration(v, "sweep.values"),
    "on_duration": lambda v: parse_duration(v, "sweep.values"),
}

_TOP_KEYS = {"name", "preset", "traffic", "policies", "sweep", "mode", "capacity_units",
             "lifetime", "simulation"} | set(DEFAULTS)


def scenario_from_dict(data: dict) -> Scenario:
    """Build and validate a scenario from a parsed config object."""
    if not isinstance(data, dict):
        raise ConfigError("config: top level must be a JSON object")
    unknown = set(data) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"{sorted(unknown)[0]}: unknown field")
    s = preset(data["preset"]) if data.get("preset") else Scenario()
    base = dict(s.base)
    for key in DEFAULTS:
        if key not in data:
            continue
        v = data[key]
        if v is None:
            base[key] = None
        elif key == "download_delay":
            base[key] = parse_duration(v, key)
        elif key in ("catalogue_size", "cache_capacity", "filter_size"):
            num = _number(v, key)
            if num != int(num):
                raise ConfigError(f"{key}: must be an integer")
            base[key] = int(num)
        else:
            base[key] = _number(v, key)
    if "cache_capacity" in data and data["cache_capacity"] is not None:
        base["cache_ratio"] = None
    if "cache_ratio" in data and data["cache_ratio"] is not None:
        base["cache_capacity"] = None
    kw = {"base": base}
    if "name" in data:
        kw["name"] = str(data["name"])
    if "traffic" in data:
        items = data["traffic"] if isinstance(data["traffic"], list) else [data["traffic"]]
        kw["traffic"] = tuple(_parse_traffic(t) for t in items)
    if "policies" in data:
        pols = data["policies"] if isinstance(data["policies"], list) else [data["policies"]]
        aliases = {"2-lru": "2lru", "twolru": "2lru", "zdd": "zdd-lru", "zdd_lru": "zdd-lru"}
        kw["policies"] = tuple(aliases.get(str(p).lower(), str(p).lower()) for p in pols)
    if "sweep" in data:
        sw = data["sweep"]
        if sw is None:
            kw["swept_parameter"], kw["sweep_values"] = None, ()
        else:
            if not isinstance(sw, dict) or set(sw) - {"parameter", "values"}:
                raise ConfigError("sweep: expected {'parameter': ..., 'values': [...]}")
            param = sw.get("parameter")
            parse = _SWEEP_PARSERS.get(param, lambda v: _number(v, "sweep.values"))
            values = sw.get("values", [])
            if not isinstance(values, list):
                raise ConfigError("sweep.values: expected a list")
            kw["swept_parameter"] = param
            kw["sweep_values"] = tuple(parse(v) for v in values)
    if "mode" in data:
        kw["mode"] = str(data["mode"])
    if "capacity_units" in data:
        kw["capacity_units"] = str(data["capacity_units"])
    if "lifetime" in data:
        lt = data["lifetime"]
        if lt is None:
            kw["lifetime"] = None
        else:
            if not isinstance(lt, dict) or set(lt) - {f.name for f in fields(Lifetime)}:
                raise ConfigError("lifetime: unknown field")
            kw["lifetime"] = Lifetime(**{k: _number(v, f"lifetime.{k}") for k, v in lt.items()})
    if "simulation" in data:
        sm = data["simulation"]
        if not isinstance(sm, dict) or set(sm) - {f.name for f in fields(SimSettings)}:
            raise ConfigError("simulation: unknown field")
        cur = asdict(s.simulation)
        for k, v in sm.items():
            num = _number(v, f"simulation.{k}")
            if num != int(num):
                raise ConfigError(f"simulation.{k}: must be an integer")
            cur[k] = int(num)
        kw["simulation"] = SimSettings(**cur)
    return _validate(replace(s, **kw))


def load_config(path) -> Scenario:
    """Read a JSON scenario file; parse errors carry line and column."""
    text = Path(path).read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    return scenario_from_dict(data)


# --------------------------------------------------------------------------
# presets
# --------------------------------------------------------------------------

_IRM_HYPER = (TrafficKind("poisson"), TrafficKind("hyperz", z=10.0))
_DECADES = lambda lo, hi: tuple(float(f"{v:.6g}") for v in  # noqa: E731
                                np.logspace(lo, hi, 2 * (hi - lo) + 1))


def _fig3():
    return Scenario("fig3", swept_parameter="download_delay",
                    sweep_values=tuple(round(0.025 * i, 3) for i in range(13)),
                    traffic=_IRM_HYPER, policies=("lru", "2lru"))


def _fig4():
    return Scenario("fig4", swept_parameter="cache_capacity",
                    sweep_values=(1e-4, 3e-4, 1e-3, 3e-3, 1e-2, 3e-2, 0.1, 0.3, 0.5),
                    traffic=_IRM_HYPER, policies=("lru", "2lru"))


def _fig5():
    return Scenario("fig5", swept_parameter="request_rate", sweep_values=_DECADES(1, 6),
                    traffic=_IRM_HYPER, policies=("lru", "2lru"))


def _fig6():
    return Scenario("fig6", swept_parameter="catalogue_size",
                    sweep_values=tuple(float(round(v)) for v in np.logspace(5, 9, 9)),
                    traffic=_IRM_HYPER, policies=("lru", "2lru", "zdd-lru"))


def _ipp(days):
    return TrafficKind("ipp", t_on=days * DAY, off_ratio=9.0)


def _fig7():
    base = dict(DEFAULTS)
    return Scenario("fig7", base=base, swept_parameter="request_density",
                    sweep_values=_DECADES(-1, 7), traffic=(_ipp(1), _ipp(7)),
                    policies=("lru", "2lru", "zdd-lru"), lifetime=Lifetime())


def _fig8():
    base = dict(DEFAULTS, request_density=1e6)
    return Scenario("fig8", base=base, swept_parameter="cache_capacity",
                    sweep_values=(1e-4, 3e-4, 1e-3, 3e-3, 1e-2, 3e-2, 0.1),
                    traffic=(_ipp(1), _ipp(7), _ipp(30)), policies=("lru", "2lru"),
                    lifetime=Lifetime())


PRESETS = {"fig3": _fig3, "fig4": _fig4, "fig5": _fig5, "fig6": _fig6,
           "fig7": _fig7, "fig8": _fig8}

#: Absolute-capacity grid for fig8 when ``capacity_units == "absolute"``.
FIG8_ABSOLUTE = (100.0, 300.0, 1e3, 3e3, 1e4, 3e4, 1e5, 3e5)


def preset(name: str, **overrides) -> Scenario:
    """A figure preset (``fig3`` .. ``fig8``), optionally with field overrides."""
    if name not in PRESETS:
        raise ConfigError(f"preset: unknown preset {name!r}; choose from {sorted(PRESETS)}")
    s = PRESETS[name]()
    if name == "fig8" and overrides.get("capacity_units") == "absolute":
        overrides.setdefault("sweep_values", FIG8_ABSOLUTE)
    return _validate(replace(s, **overrides)) if overrides else s


# --------------------------------------------------------------------------
# cells
# --------------------------------------------------------------------------

def cell_system(s: Scenario, traffic: TrafficKind, policy: str,
                value: Optional[float]) -> SystemConfig:
    """Full-scale :class:`SystemConfig` of one sweep cell."""
    p = dict(s.base)
    if traffic.name == "ipp" and s.swept_parameter == "on_duration":
        traffic = replace(traffic, t_on=value)
    name = s.swept_parameter
    if name == "download_delay":
        p["download_delay"] = value
    elif name == "cache_capacity":
        if s.capacity_units == "fraction":
            p["cache_ratio"], p["cache_capacity"] = value, None
        else:
            p["cache_capacity"], p["cache_ratio"] = int(round(value)), None
    elif name == "request_rate":
        p["request_rate"] = value
    elif name == "catalogue_size":
        p["catalogue_size"] = int(round(value))
    elif name == "request_density":
        p["request_density"] = value

    K = int(p["catalogue_size"])
    rate = p["request_rate"]
    if s.lifetime is not None:
        lt = s.lifetime
        K = int(round(lt.size_factor * lt.gamma * traffic.t_on))
        if p["request_density"] is not None:
            rate = p["request_density"] * lt.gamma
        if name != "cache_capacity" and p["cache_capacity"] is None:
            p["cache_ratio"] = lt.cache_fraction
    if p["cache_capacity"] is not None:
        C = int(p["cache_capacity"])
    else:
        C = max(1, int(round(p["cache_ratio"] * K)))
    delay = 0.0 if policy == "zdd-lru" else p["download_delay"]
    return SystemConfig(ZipfCatalog(K, p["alpha"], rate), traffic, C,
                        p["filter_size"], delay, policy)


def desk_scale(system: SystemConfig, desk_catalogue: int) -> SystemConfig:
    """Shrink a configuration to ``desk_catalogue`` contents for simulation.

    Capacity, filter size and total rate scale with ``K`` so that ``C/K`` and
    the mean per-content rate (hence ``lambda_k * D``) are preserved.
    """
    K = system.catalog.K
    if K <= desk_catalogue:
        return system
    f = desk_catalogue / K
    cat = ZipfCatalog(desk_catalogue, system.catalog.alpha, system.catalog.lambda_total * f)
    C = max(1, int(round(system.capacity * f)))
    M = None if system.filter_size is None else max(1, int(round(system.filter_size * f)))
    return SystemConfig(cat, system.traffic, C, M, system.delay, system.policy)


# --------------------------------------------------------------------------
# results
# --------------------------------------------------------------------------

def _sig(x):
    return None if x is None else float(f"{x:.12g}")


@dataclass(frozen=True)
class ResultRow:
    scenario: str
    policy: str
    traffic: str
    param_name: str
    param_value: Optional[float]
    source: str
    p_hit_cs: Optional[float]
    p_hit_pit: Optional[float]
    p_fwd: Optional[float]
    half_width: Optional[float] = None
    t_c: Optional[float] = None
    t_m: Optional[float] = None
    wall_time_s: Optional[float] = None
    error: Optional[str] = field(default=None, compare=False)

    @property
    def failed(self) -> bool:
        return self.source.endswith("-error")


def _cell_job(args):
    s, traffic, policy, value, source = args
    label = s.swept_parameter or ""
    t0 = time.perf_counter()
    try:
        system = cell_system(s, traffic, policy, value)
        if source == "analysis":
            res = solve(system)
            cs, pit, fwd = res.aggregate
            row = dict(p_hit_cs=cs, p_hit_pit=pit, p_fwd=fwd, half_width=None,
                       t_c=res.t_c, t_m=res.t_m)
        else:
            sm = s.simulation
            desk = desk_scale(system, sm.desk_catalogue)
            reports = replicate(SimConfig(desk, total_requests=sm.requests, seed=sm.seed),
                                sm.replications)
            mean, hw = summarize(reports)
            row = dict(p_hit_cs=mean["p_hit_cs"], p_hit_pit=mean["p_hit_pit"],
                       p_fwd=mean["p_fwd"], half_width=max(hw.values()), t_c=None, t_m=None)
        wall = time.perf_counter() - t0
        return ResultRow(s.name, policy, traffic.label, label, _sig(value), source,
                         _sig(row["p_hit_cs"]), _sig(row["p_hit_pit"]), _sig(row["p_fwd"]),
                         _sig(row["half_width"]), _sig(row["t_c"]), _sig(row["t_m"]),
                         _sig(wall))
    except Exception as exc:  # recorded per cell, the sweep continues
        return ResultRow(s.name, policy, traffic.label, label, _sig(value), source + "-error",
                         None, None, None, wall_time_s=_sig(time.perf_counter() - t0),
                         error=f"{type(exc).__name__}: {exc}")


def _row_key(r: ResultRow):
    return (r.scenario, r.policy, r.traffic,
            -math.inf if r.param_value is None else r.param_value, r.source)


def default_parallelism() -> int:
    try:
        return max(1, int(os.environ.get(PARALLEL_ENV, "1")))
    except ValueError:
        return 1


def run_scenario(s: Scenario, parallelism: Optional[int] = None) -> List[ResultRow]:
    """Evaluate every cell of ``s``; failed cells become ``*-error`` rows."""
    parallelism = default_parallelism() if parallelism is None else max(1, parallelism)
    sources = {"analysis": ("analysis",), "simulation": ("simulation",),
               "both": ("analysis", "simulation")}[s.mode]
    values = list(s.sweep_values) if s.swept_parameter else [None]
    jobs = [(s, t, p, v, src) for v in values for t in s.traffic for p in s.policies
            for src in sources]
    if parallelism > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=parallelism) as ex:
            rows = list(ex.map(_cell_job, jobs))
    else:
        rows = [_cell_job(j) for j in jobs]
    return sorted(rows, key=_row_key)


# --------------------------------------------------------------------------
# output
# --------------------------------------------------------------------------

def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return f"{x:.12g}"
    return str(x)


def emit_csv(rows: List[ResultRow], path, timing: bool = True) -> None:
    """Write rows in the fixed column order (UTF-8, LF, 12 significant digits).

    With ``timing=False`` the wall-time column is left empty so that reruns
    produce byte-identical files.
    """
    if not rows:
        raise ValueError("no rows to write")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(CSV_COLUMNS)
        for r in rows:
            vals = [getattr(r, c) for c in CSV_COLUMNS]
            if not timing:
                vals[-1] = None
            wr.writerow([_fmt(v) for v in vals])


def read_csv(path) -> List[ResultRow]:
    """Parse a file written by :func:`emit_csv` back into rows."""
    numeric = {"param_value", "p_hit_cs", "p_hit_pit", "p_fwd", "half_width", "t_c", "t_m",
               "wall_time_s"}
    out = []
    with open(path, encoding="utf-8", newline="") as fh:
        rd = csv.reader(fh)
        header = next(rd)
        if tuple(header) != CSV_COLUMNS:
            raise ValueError(f"unexpected CSV header {header}")
        for rec in rd:
            kw = {c: ((float(v) if v != "" else None) if c in numeric else v)
                  for c, v in zip(CSV_COLUMNS, rec)}
            out.append(ResultRow(**kw))
    return out


def emit_curves(rows: List[ResultRow], directory) -> List[Path]:
    """Two-column ``param_value metric`` files, one per curve and metric."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    curves = {}
    for r in rows:
        if r.failed or r.param_value is None:
            continue
        curves.setdefault((r.scenario, r.policy, r.traffic, r.source), []).append(r)
    written = []
    for (sc, pol, tr, src), rs in sorted(curves.items()):
        for metric in ("p_hit_cs", "p_hit_pit", "p_fwd"):
            path = directory / f"{sc}_{pol}_{tr}_{src}_{metric}.dat"
            with open(path, "w", encoding="utf-8", newline="") as fh:
                fh.write(f"# {rs[0].param_name} {metric}\n")
                for r in rs:
                    fh.write(f"{_fmt(r.param_value)} {_fmt(getattr(r, metric))}\n")
            written.append(path)
    return written
