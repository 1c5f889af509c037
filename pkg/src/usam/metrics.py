"""Metric components, their geometric aggregation, the feasibility gate
and the freshness-only comparison baselines."""
from __future__ import annotations

import math
from dataclasses import dataclass

from .analytic import feasibility_thresholds, max_wcrt_bound, wcrt_bound

DEFAULT_TAU_V_MS = 50.0
DEFAULT_TAU_C_MS = 20.0


@dataclass(frozen=True)
class MetricReport:
    f: float
    r: float
    s: float
    psi_raw: float
    psi_gated: float
    feasible: bool
    aoi_ms: float
    paoi_ms: float
    aos_ms: float
    voi: float
    aoc: float
    source: str  # "simulated" | "asymptotic"
    # set when no monitoring class exists and F was taken as 1
    freshness_defaulted: bool = False


def freshness(cfg, aos_mean_ms):
    """Normalized freshness ``min(1, delta_tar / age)``.

    An infinite age (no active update stream) maps to 0 and an age of
    exactly 0 to 1. NaN (nothing delivered) passes through.
    """
    if math.isnan(aos_mean_ms):
        return math.nan
    if aos_mean_ms < 0:
        raise ValueError(f"mean age must be >= 0, got {aos_mean_ms}")
    if math.isinf(aos_mean_ms):
        return 0.0
    if aos_mean_ms == 0:
        return 1.0
    return min(1.0, cfg.delta_tar / aos_mean_ms)


def reliability(cfg, viol_rate):
    """Worst per-class safe delivery probability ``(1 - p_miss) * gamma``."""
    worst = math.inf
    for c in cfg.classes:
        if c.name not in viol_rate:
            raise KeyError(f"missing violation rate for class {c.name!r}")
        p = viol_rate[c.name]
        if math.isnan(p):
            continue  # class carried no traffic in the window
        if not 0 <= p <= 1:
            raise ValueError(f"violation rate of {c.name} outside [0, 1]: {p}")
        worst = min(worst, (1.0 - p) * c.gamma)
    return math.nan if math.isinf(worst) else worst


def safety(cfg, delta):
    return math.exp(-max_wcrt_bound(cfg, delta) / cfg.sfrt_star)


def usam(f, r, s, weights):
    """Weighted geometric mean ``f**w1 * r**w2 * s**w3`` (with 0**0 == 1)."""
    w1, w2, w3 = weights
    return f**w1 * r**w2 * s**w3


def gate(cfg, delta, rho, psi_raw, thresholds=None):
    """Return ``(feasible, psi_gated)``.

    Feasible requires the duty cycle to reach the safe threshold, the
    activity factor to stay under the stability line, and every class
    bound to fit inside its own SFRT.
    """
    th = thresholds or feasibility_thresholds(cfg)
    feasible = (
        delta >= th.delta_safe
        and rho <= th.rho_safe_at(delta)
        and all(wcrt_bound(cfg, c.name, delta) <= c.sfrt for c in cfg.classes)
    )
    return feasible, (psi_raw if feasible else 0.0)


def comparison_metrics(aoi_ms, paoi_ms=None, tau_v_ms=DEFAULT_TAU_V_MS, tau_c_ms=DEFAULT_TAU_C_MS):
    """Value-of-information and age-of-control proxies from mean AoI.

    Both fall monotonically from 1 as the age grows. ``paoi_ms`` is
    accepted for interface symmetry and does not enter either proxy.
    """
    if aoi_ms < 0:
        raise ValueError("ages must be >= 0")
    voi = math.exp(-aoi_ms / tau_v_ms)
    aoc = 1.0 / (1.0 + (aoi_ms / tau_c_ms) ** 2)
    return voi, aoc
