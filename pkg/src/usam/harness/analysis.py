"""Single operating-point evaluation in simulated or asymptotic mode."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .. import simulator
from ..analytic import (
    aos_mean_asymptotic, asymptotic_components, feasibility_thresholds,
    max_wcrt_bound, slack_ok,
)
from ..metrics import MetricReport, comparison_metrics, freshness, gate, reliability, safety, usam
from ..model import CLASS_NAMES, aggregate_rate

MODES = ("simulated", "asymptotic")
_MODE_ALIASES = {"sim": "simulated", "asym": "asymptotic"}

CSV_COLUMNS = (
    "rho", "delta", "mode", "F", "R", "S", "psi_raw", "psi_gated", "feasible",
    "aoi_ms", "paoi_ms", "aos_ms", "voi", "aoc", "viol_M", "viol_SC", "viol_FC",
    "viol_S", "wq_mean_ms", "t_max_ms", "realized_duty", "reps", "ci_psi",
)


def normalize_mode(mode):
    mode = _MODE_ALIASES.get(mode, mode)
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    return mode


def default_horizon_ms(cfg, rho):
    """Horizon giving roughly 10^4 expected arrivals, clamped to [1e5, 1e9] ms."""
    lam = aggregate_rate(cfg, rho) / 1000.0
    if lam <= 0:
        return 1e5
    return float(min(1e9, max(1e5, 1e4 / lam)))


@dataclass
class Evaluation:
    rho: float
    delta: float
    mode: str
    report: MetricReport
    thresholds: object
    viol: dict
    wq_mean_ms: float
    t_max_ms: float
    realized_duty: float
    reps: int
    ci_psi: float
    summary: object = None  # ReplicatedSummary in simulated mode

    def row(self):
        r = self.report
        vals = {
            "rho": self.rho, "delta": self.delta, "mode": self.mode,
            "F": r.f, "R": r.r, "S": r.s, "psi_raw": r.psi_raw,
            "psi_gated": r.psi_gated, "feasible": r.feasible,
            "aoi_ms": r.aoi_ms, "paoi_ms": r.paoi_ms, "aos_ms": r.aos_ms,
            "voi": r.voi, "aoc": r.aoc,
            "wq_mean_ms": self.wq_mean_ms, "t_max_ms": self.t_max_ms,
            "realized_duty": self.realized_duty, "reps": self.reps,
            "ci_psi": self.ci_psi,
        }
        for k in CLASS_NAMES:
            vals[f"viol_{k}"] = self.viol.get(k, math.nan)
        return vals


def _report(cfg, rho, delta, f, r, s, ages, source, thresholds, defaulted):
    psi_raw = usam(f, r, s, cfg.weights)
    feasible, psi_gated = gate(cfg, delta, rho, psi_raw, thresholds)
    aoi, paoi, aos = ages
    voi, aoc = comparison_metrics(aoi, paoi)
    return MetricReport(f, r, s, psi_raw, psi_gated, feasible, aoi, paoi, aos,
                        voi, aoc, source, defaulted)


def _sim_freshness(cfg, aoi):
    # The sawtooth mean age is the quantity the closed-form synchronization
    # age tracks; the literal synchronization age is reported alongside.
    if not cfg.monitoring:
        return 1.0
    return freshness(cfg, aoi)


def analyze(cfg, rho, delta, mode="asymptotic", reps=1, horizon_ms=None,
            warmup_frac=simulator.WARMUP_FRACTION, seed=0, workers=None):
    mode = normalize_mode(mode)
    th = feasibility_thresholds(cfg)
    s = safety(cfg, delta)
    defaulted = not cfg.monitoring
    if mode == "asymptotic":
        comps = asymptotic_components(cfg, rho, delta)
        aos = aos_mean_asymptotic(cfg, rho, delta) if cfg.monitoring else math.nan
        rep = _report(cfg, rho, delta, comps.f0, comps.gamma_min, s, (aos, aos, aos),
                      mode, th, defaulted)
        viol = {c.name: 0.0 if slack_ok(cfg, c.name, delta) else math.nan for c in cfg.classes}
        return Evaluation(rho, delta, mode, rep, th, viol, 0.0, max_wcrt_bound(cfg, delta),
                          delta, 0, math.nan)

    horizon = horizon_ms if horizon_ms is not None else default_horizon_ms(cfg, rho)
    agg = simulator.replicate(cfg, rho, delta, reps, base_seed=seed, horizon_ms=horizon,
                              warmup_ms=warmup_frac * horizon, workers=workers)
    m = agg.mean
    viol = {c.name: m[f"viol_rate.{c.name}"] for c in cfg.classes}
    f = _sim_freshness(cfg, m["aoi_max"])
    r = reliability(cfg, viol)
    rep = _report(cfg, rho, delta, f, r, s, (m["aoi_max"], m["paoi_max"], m["aos_max"]),
                  mode, th, defaulted)
    psis = []
    for run in agg.runs:
        v = {c.name: run.per_class[c.name].viol_rate for c in cfg.classes}
        psis.append(usam(_sim_freshness(cfg, run.aoi_max), reliability(cfg, v), s, cfg.weights))
    ci = simulator.half_width(np.array(psis, dtype=float))
    t_max = [run.t_max for run in agg.runs if not math.isnan(run.t_max)]
    return Evaluation(rho, delta, mode, rep, th, viol, m["wq_mean"],
                      max(t_max) if t_max else math.nan,
                      m["realized_duty"], reps, ci, agg)
