"""Domain types, preset/config loading and elementary rate quantities.

Durations are milliseconds throughout, rates are per second. The only
place the two meet is :func:`arrival_rates_per_ms`, used by the simulator.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

CLASS_NAMES = ("M", "SC", "FC", "S")
PRESETS = ("A", "B", "C", "D")
DEFAULT_PRESET = "C"

DEFAULT_DELTA_TAR_MS = 150.0
DEFAULT_S_MIN_MS = 0.05

_SYSTEM_KEYS = (
    "mu", "v_max_ms", "lambda_s", "w1", "w2", "w3", "sfrt_star_ms",
    "epsilon", "alpha", "rho_max",
)
_CLASS_KEYS = (
    "priority", "c_max_ms", "deadline_ms", "sfrt_ms", "gamma", "mix",
    "is_monitoring",
)


class ConfigError(ValueError):
    """Raised for unreadable, incomplete or inconsistent configurations."""


class MissingKeyError(ConfigError):
    def __init__(self, key, table):
        super().__init__(f"missing required key {key!r} in [{table}]")
        self.key = key


class UnknownClassError(KeyError):
    pass


@dataclass(frozen=True)
class ClassSpec:
    name: str
    priority: int
    c_max: float
    deadline: float
    sfrt: float
    gamma: float = 1.0
    mix: float = 0.0
    is_monitoring: bool = False

    def __post_init__(self):
        if self.name not in CLASS_NAMES:
            raise ConfigError(f"class name {self.name!r} not in {CLASS_NAMES}")
        for attr in ("c_max", "deadline", "sfrt"):
            if not getattr(self, attr) > 0:
                raise ConfigError(f"class {self.name}: {attr} must be > 0")
        if not 0 < self.gamma <= 1:
            raise ConfigError(f"class {self.name}: gamma must be in (0, 1]")
        if not 0 <= self.mix <= 1:
            raise ConfigError(f"class {self.name}: mix must be in [0, 1]")


@dataclass(frozen=True)
class SystemConfig:
    classes: tuple[ClassSpec, ...]
    mu: float = 1000.0
    v_max: float = 1.5
    lambda_s: float = 120.0
    weights: tuple[float, float, float] = (0.34, 0.33, 0.33)
    delta_tar: float = DEFAULT_DELTA_TAR_MS
    sfrt_star: float = 6.0
    epsilon: float = 0.2
    alpha: float = 1.37
    rho_max: float = 0.28
    s_min: float = DEFAULT_S_MIN_MS
    _by_name: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "classes", tuple(self.classes))
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        if not self.classes:
            raise ConfigError("at least one traffic class is required")
        names = [c.name for c in self.classes]
        if len(set(names)) != len(names):
            raise ConfigError(f"duplicate class names: {names}")
        prios = [c.priority for c in self.classes]
        if len(set(prios)) != len(prios):
            raise ConfigError(f"priority ranks must be distinct: {prios}")
        total = math.fsum(c.mix for c in self.classes)
        if abs(total - 1.0) > 1e-9:
            raise ConfigError(f"mix sum must be 1, got {total:g}")
        for attr in ("mu", "v_max", "lambda_s", "sfrt_star", "delta_tar"):
            if not getattr(self, attr) > 0:
                raise ConfigError(f"{attr} must be > 0")
        if len(self.weights) != 3 or any(w < 0 for w in self.weights):
            raise ConfigError("weights must be three non-negative numbers")
        if not 0 < self.epsilon <= 1:
            raise ConfigError("epsilon must be in (0, 1]")
        if not self.alpha >= 1:
            raise ConfigError("alpha must be >= 1")
        if not 0 < self.rho_max <= 1:
            raise ConfigError("rho_max must be in (0, 1]")
        if not 0 <= self.s_min <= min(c.c_max for c in self.classes):
            raise ConfigError("s_min must lie in [0, min c_max]")
        object.__setattr__(self, "_by_name", {c.name: c for c in self.classes})

    def cls(self, name):
        try:
            return self._by_name[name]
        except KeyError:
            raise UnknownClassError(f"unknown traffic class {name!r}") from None

    @property
    def class_names(self):
        return tuple(c.name for c in self.classes)

    @property
    def monitoring(self):
        return tuple(c for c in self.classes if c.is_monitoring)

    def by_priority(self):
        """Classes ordered from highest to lowest priority."""
        return tuple(sorted(self.classes, key=lambda c: -c.priority))

    def with_mix(self, mix):
        """Copy with the traffic mix replaced; ``mix`` maps class name to fraction."""
        classes = tuple(replace(c, mix=float(mix.get(c.name, 0.0))) for c in self.classes)
        return replace(self, classes=classes)

    def evolve(self, **changes):
        return replace(self, **changes)


def _require(table, key, where):
    if key not in table:
        raise MissingKeyError(key, where)
    return table[key]


def config_from_dict(data):
    """Build a :class:`SystemConfig` from the parsed TOML table layout."""
    system = data.get("system")
    if system is None:
        raise MissingKeyError("system", "<root>")
    vals = {k: _require(system, k, "system") for k in _SYSTEM_KEYS}
    class_tables = data.get("class")
    if not class_tables:
        raise ConfigError("no [class.<name>] tables found")
    classes = []
    for name, tbl in class_tables.items():
        where = f"class.{name}"
        v = {k: _require(tbl, k, where) for k in _CLASS_KEYS}
        classes.append(ClassSpec(
            name=name,
            priority=int(v["priority"]),
            c_max=float(v["c_max_ms"]),
            deadline=float(v["deadline_ms"]),
            sfrt=float(v["sfrt_ms"]),
            gamma=float(v["gamma"]),
            mix=float(v["mix"]),
            is_monitoring=bool(v["is_monitoring"]),
        ))
    return SystemConfig(
        classes=tuple(classes),
        mu=float(vals["mu"]),
        v_max=float(vals["v_max_ms"]),
        lambda_s=float(vals["lambda_s"]),
        weights=(float(vals["w1"]), float(vals["w2"]), float(vals["w3"])),
        delta_tar=float(system.get("delta_tar_ms", DEFAULT_DELTA_TAR_MS)),
        sfrt_star=float(vals["sfrt_star_ms"]),
        epsilon=float(vals["epsilon"]),
        alpha=float(vals["alpha"]),
        rho_max=float(vals["rho_max"]),
        s_min=float(system.get("s_min_ms", DEFAULT_S_MIN_MS)),
    )


def loads_config(text):
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"malformed config: {exc}") from exc
    return config_from_dict(data)


def load_config(path):
    """Read and validate a config file.

    Raises :class:`ConfigError` (or its :class:`MissingKeyError` subclass)
    naming the offending key or invariant; ``OSError`` propagates for
    unreadable paths.
    """
    text = Path(path).read_text(encoding="utf-8")
    return loads_config(text)


def preset_path(name=DEFAULT_PRESET):
    name = name.upper()
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; choose from {PRESETS}")
    return resources.files("usam").joinpath("presets", f"preset_{name}.toml")


def load_preset(name=DEFAULT_PRESET):
    return loads_config(preset_path(name).read_text(encoding="utf-8"))


def arrival_rates(cfg, rho):
    """Per-class arrival rates in 1/s at activity factor ``rho``."""
    if not 0 <= rho <= 1:
        raise ValueError(f"rho must lie in [0, 1], got {rho}")
    return {c.name: rho * cfg.lambda_s * c.mix for c in cfg.classes}


def arrival_rates_per_ms(cfg, rho):
    return {k: v / 1000.0 for k, v in arrival_rates(cfg, rho).items()}


def aggregate_rate(cfg, rho):
    return math.fsum(arrival_rates(cfg, rho).values())


def utilization(cfg, rho, delta):
    """Offered load against the duty-cycled service rate, lambda / (mu * delta)."""
    if not delta > 0:
        raise ValueError(f"delta must be > 0, got {delta}")
    return aggregate_rate(cfg, rho) / (cfg.mu * delta)


def hp(cfg, k):
    """Names of the classes with strictly higher priority than ``k``."""
    p = cfg.cls(k).priority
    return frozenset(c.name for c in cfg.classes if c.priority > p)
