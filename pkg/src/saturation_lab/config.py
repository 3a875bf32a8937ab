"""Run configuration: a JSON file merged with command-line overrides."""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any

from .models import (
    BUILTIN_CHANNELS,
    DegreeDistribution,
    GldpcParams,
    gldpc,
    isi_erasure,
    ldpc_bec,
)
from .numerics import DEFAULT_TOL, Tolerances
from .system import ScalarSystem

__all__ = ["ConfigError", "SystemSpec", "RunConfig", "load_config_file", "parse_pair", "parse_eps_list"]

CONFIG_KEYS = {"system", "eps", "L", "w", "tolerances", "output", "seed"}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SystemSpec:
    """Which scalar system to analyse.

    ``kind`` is "ldpc", "gldpc" or "isi". LDPC and ISI use the degree
    distribution (``lam``, ``rho``); GLDPC uses ``n`` and ``t``; ISI also
    names a built-in channel.
    """

    kind: str = "ldpc"
    lam: tuple[float, ...] = (0.0, 0.0, 1.0)
    rho: tuple[float, ...] = (0.0, 0.0, 0.0, 0.0, 0.0, 1.0)
    n: int = 15
    t: int = 3
    channel: str = "memoryless"

    def degree_distribution(self) -> DegreeDistribution:
        try:
            return DegreeDistribution(self.lam, self.rho)
        except ValueError as e:
            raise ConfigError(f"bad degree distribution: {e}") from e

    def build(self, tol: Tolerances = DEFAULT_TOL) -> ScalarSystem:
        if self.kind == "ldpc":
            return ldpc_bec(self.degree_distribution())
        if self.kind == "gldpc":
            try:
                return gldpc(GldpcParams(self.n, self.t), tol)
            except ValueError as e:
                raise ConfigError(str(e)) from e
        if self.kind == "isi":
            if self.channel not in BUILTIN_CHANNELS:
                raise ConfigError(f"unknown ISI channel {self.channel!r}; choose from {sorted(BUILTIN_CHANNELS)}")
            return isi_erasure(self.degree_distribution(), BUILTIN_CHANNELS[self.channel](), tol)
        raise ConfigError(f"unknown system kind {self.kind!r}")


@dataclass
class RunConfig:
    system: SystemSpec = field(default_factory=SystemSpec)
    eps: list[float] = field(default_factory=list)
    L: int = 16
    w: int = 3
    tol: Tolerances = DEFAULT_TOL
    output: Path = Path("out")
    seed: int = 0

    def validate(self) -> "RunConfig":
        for e in self.eps:
            if not 0.0 <= e <= 1.0:
                raise ConfigError(f"eps={e} outside [0, 1]")
        if self.L < 1:
            raise ConfigError("L must be >= 1")
        if self.w < 1:
            raise ConfigError("w must be >= 1")
        return self


def parse_pair(text: str, what: str) -> tuple[int, int]:
    try:
        a, b = (int(p) for p in str(text).split(","))
    except ValueError:
        raise ConfigError(f"{what} expects two integers as 'a,b', got {text!r}") from None
    return a, b


def parse_eps_list(text: str) -> list[float]:
    """Comma-separated values, or a range 'start:stop:step' (stop included)."""
    text = str(text).strip()
    try:
        if ":" in text:
            start, stop, step = (float(p) for p in text.split(":"))
            if step <= 0:
                raise ConfigError("eps range step must be positive")
            k = int(round((stop - start) / step))
            return [round(start + i * step, 12) for i in range(k + 1)]
        return [float(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise ConfigError(f"cannot parse eps list {text!r}") from None


def _regular(dv: int, dc: int) -> tuple[tuple[float, ...], tuple[float, ...]]:
    if dv < 2 or dc < 2:
        raise ConfigError("LDPC degrees must be at least 2")
    dd = DegreeDistribution.regular(dv, dc)
    return dd.lam, dd.rho


def system_from_json(obj: Any) -> SystemSpec:
    if not isinstance(obj, dict) or len(obj) != 1:
        raise ConfigError('"system" must be an object with exactly one of "ldpc", "gldpc", "isi"')
    kind, val = next(iter(obj.items()))
    if kind == "ldpc":
        return SystemSpec("ldpc", *_degree_from_json(val))
    if kind == "gldpc":
        if isinstance(val, dict):
            n, t = val.get("n"), val.get("t")
        elif isinstance(val, list) and len(val) == 2:
            n, t = val
        else:
            raise ConfigError('"gldpc" expects [n, t] or {"n": .., "t": ..}')
        return SystemSpec("gldpc", n=int(n), t=int(t))
    if kind == "isi":
        if not isinstance(val, dict) or "channel" not in val:
            raise ConfigError('"isi" expects {"channel": name, "ldpc": ...}')
        lam, rho = _degree_from_json(val.get("ldpc", [3, 6]))
        return SystemSpec("isi", lam, rho, channel=str(val["channel"]))
    raise ConfigError(f"unknown system kind {kind!r}")


def _degree_from_json(val: Any) -> tuple[tuple[float, ...], tuple[float, ...]]:
    if isinstance(val, list) and len(val) == 2 and all(isinstance(v, int) for v in val):
        return _regular(*val)
    if isinstance(val, dict) and {"lambda", "rho"} <= set(val):
        return tuple(float(c) for c in val["lambda"]), tuple(float(c) for c in val["rho"])
    raise ConfigError('"ldpc" expects [dv, dc] or {"lambda": [...], "rho": [...]} (coefficients by power)')


def load_config_file(path: Path) -> RunConfig:
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"config {path} is not valid JSON: {e}") from e
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(raw) - CONFIG_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    cfg = RunConfig()
    try:
        if "system" in raw:
            cfg.system = system_from_json(raw["system"])
        if "eps" in raw:
            e = raw["eps"]
            cfg.eps = parse_eps_list(e) if isinstance(e, str) else [float(v) for v in (e if isinstance(e, list) else [e])]
        if "L" in raw:
            cfg.L = int(raw["L"])
        if "w" in raw:
            cfg.w = int(raw["w"])
        if "seed" in raw:
            cfg.seed = int(raw["seed"])
        if "output" in raw:
            cfg.output = Path(raw["output"])
        if "tolerances" in raw:
            t = raw["tolerances"]
            if not isinstance(t, dict) or set(t) - {"abs_tol", "grid_n", "max_iter"}:
                raise ConfigError('"tolerances" accepts abs_tol, grid_n, max_iter')
            cfg.tol = replace(cfg.tol, **{k: (float(v) if k == "abs_tol" else int(v)) for k, v in t.items()})
    except (TypeError, ValueError) as e:
        if isinstance(e, ConfigError):
            raise
        raise ConfigError(f"bad config value: {e}") from e
    return cfg
