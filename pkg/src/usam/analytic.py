"""Closed-form response-time bounds, feasibility thresholds and the
small-activity limits of the metric components."""
from __future__ import annotations

import math
from dataclasses import dataclass

from .model import arrival_rates, hp


@dataclass(frozen=True)
class FeasibilityThresholds:
    delta_queue: float
    delta_wcrt: float
    delta_safe: float
    # (epsilon * mu) / (alpha * lambda_s): slope of the stability line rho(delta)
    rho_slope: float

    def rho_safe_at(self, delta):
        """Largest activity factor that stays feasible at duty cycle ``delta``."""
        if delta < self.delta_wcrt:
            return 0.0
        return min(1.0, max(0.0, self.rho_slope * delta))


@dataclass(frozen=True)
class AsymptoticComponents:
    f0: float
    gamma_min: float
    s_comp: float
    psi_limit: float


def _check_delta(delta):
    if not 0 <= delta <= 1:
        raise ValueError(f"delta must lie in [0, 1], got {delta}")


def wcrt_base(cfg, k):
    """Own worst-case service plus one worst-case service per higher class."""
    own = cfg.cls(k).c_max
    return math.fsum([own] + [cfg.cls(i).c_max for i in hp(cfg, k)])


def wcrt_bound(cfg, k, delta):
    _check_delta(delta)
    return cfg.v_max * (1.0 - delta) + wcrt_base(cfg, k)


def max_wcrt_bound(cfg, delta):
    return max(wcrt_bound(cfg, c.name, delta) for c in cfg.classes)


def slack_ok(cfg, k, delta):
    """True when the deadline strictly exceeds worst activation plus own service."""
    _check_delta(delta)
    c = cfg.cls(k)
    return c.deadline > cfg.v_max * (1.0 - delta) + c.c_max


def feasibility_thresholds(cfg):
    delta_queue = cfg.rho_max * cfg.lambda_s / (cfg.epsilon * cfg.mu)
    delta_wcrt = max(
        max(1.0 - (c.deadline - wcrt_base(cfg, c.name)) / cfg.v_max, 0.0)
        for c in cfg.classes
    )
    return FeasibilityThresholds(
        delta_queue=delta_queue,
        delta_wcrt=delta_wcrt,
        delta_safe=max(delta_wcrt, cfg.alpha * delta_queue),
        rho_slope=cfg.epsilon * cfg.mu / (cfg.alpha * cfg.lambda_s),
    )


def aos_mean_asymptotic(cfg, rho, delta, wq_mean=None):
    """Approximate mean synchronization age (ms) over the monitoring classes.

    ``wq_mean`` maps class name to mean queueing wait in ms; omitted classes
    use the light-traffic value 0. Returns ``math.inf`` when no update
    stream is active (rho = 0 or a monitoring class with zero mix).
    """
    if not delta > 0:
        raise ValueError(f"delta must be > 0, got {delta}")
    mon = cfg.monitoring
    if not mon:
        raise ValueError("no monitoring class configured")
    rates = arrival_rates(cfg, rho)
    wq_mean = wq_mean or {}
    worst = 0.0
    for c in mon:
        lam = rates[c.name]
        if lam <= 0:
            return math.inf
        age = 1000.0 / lam + wq_mean.get(c.name, 0.0) / 2.0 + 1000.0 / (cfg.mu * delta)
        worst = max(worst, age)
    return worst


def asymptotic_components(cfg, rho, delta):
    if not 0 < delta <= 1:
        raise ValueError(f"delta must lie in (0, 1], got {delta}")
    if cfg.monitoring:
        aos = aos_mean_asymptotic(cfg, rho, delta)
        f0 = 0.0 if math.isinf(aos) else min(1.0, cfg.delta_tar / aos)
    else:
        f0 = 1.0
    gamma_min = min(c.gamma for c in cfg.classes)
    s_comp = math.exp(-max_wcrt_bound(cfg, delta) / cfg.sfrt_star)
    from .metrics import usam  # metrics imports this module
    return AsymptoticComponents(f0, gamma_min, s_comp, usam(f0, gamma_min, s_comp, cfg.weights))
