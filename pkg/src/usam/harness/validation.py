"""Self-check suite: the reference operating points the engine must
reproduce, each with a fixed tolerance and runtime budget."""
from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .. import simulator
from ..analytic import feasibility_thresholds, wcrt_base, wcrt_bound
from ..metrics import usam
from ..model import load_preset
from .analysis import analyze
from .experiments import SweepSpec, grid, phase, read_csv, sweep

# Reference values for the bundled preset.
DELTA_QUEUE_REF = 0.168
DELTA_SAFE_REF = 0.23016
THRESHOLD_TOL = 1e-9


@dataclass
class CheckResult:
    key: str
    title: str
    passed: bool
    measured: str
    target: str
    tolerance: str
    seconds: float = 0.0
    budget: float = math.inf

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        return (f"{status} [{self.key}] {self.title}: measured {self.measured}; "
                f"target {self.target}; tolerance {self.tolerance}; "
                f"{self.seconds:.3f} s (budget {self.budget:g} s)")


def _timed(budget):
    def wrap(fn):
        def inner(cfg):
            t0 = time.perf_counter()
            res = fn(cfg)
            res.seconds = time.perf_counter() - t0
            res.budget = budget
            res.passed = bool(res.passed and res.seconds < budget)
            return res
        inner.__name__ = fn.__name__
        inner.__doc__ = fn.__doc__
        return inner
    return wrap


@_timed(1e-3)
def check_thresholds(cfg):
    th = feasibility_thresholds(cfg)
    ok = (abs(th.delta_queue - DELTA_QUEUE_REF) <= THRESHOLD_TOL
          and abs(th.delta_safe - DELTA_SAFE_REF) <= THRESHOLD_TOL)
    return CheckResult("1", "threshold arithmetic", ok,
                       f"delta_queue={th.delta_queue:.12g}, delta_safe={th.delta_safe:.12g}",
                       f"delta_queue={DELTA_QUEUE_REF}, delta_safe={DELTA_SAFE_REF}",
                       f"{THRESHOLD_TOL:g} abs")


@_timed(1e-3)
def check_delta_wcrt(cfg):
    th = feasibility_thresholds(cfg)
    margins = {c.name: c.deadline - wcrt_base(cfg, c.name) for c in cfg.classes}
    ok = th.delta_wcrt == 0.0 and all(m > cfg.v_max for m in margins.values())
    worst = min(margins.values())
    return CheckResult("2", "response-time margin needs no extra duty cycle", ok,
                       f"delta_wcrt={th.delta_wcrt:g}, min(D_k - B_k0)={worst:g} ms",
                       f"delta_wcrt=0, every margin > v_max={cfg.v_max:g} ms", "exact")


def pk_mean_wait_ms(lam_per_ms, mean_s_ms, second_moment_ms2):
    load = lam_per_ms * mean_s_ms
    return lam_per_ms * second_moment_ms2 / (2.0 * (1.0 - load))


@_timed(60.0)
def check_pk(cfg, load=0.5, min_packets=1_000_000, seed=11):
    """Always-on receiver with exponential demand against the M/G/1 mean wait."""
    vcfg = cfg.evolve(lambda_s=load * cfg.mu)  # rho=1, delta=1 -> utilization = load
    mean_s = 1000.0 / cfg.mu
    lam = vcfg.lambda_s / 1000.0
    horizon = 1.1 * min_packets / lam / (1.0 - simulator.WARMUP_FRACTION)
    s = simulator.run(vcfg, 1.0, 1.0, horizon, seed=seed, service="exponential")
    target = pk_mean_wait_ms(lam, mean_s, 2.0 * mean_s ** 2)
    rel = abs(s.wq_mean - target) / target
    ok = rel <= 0.05 and s.n_delivered >= min_packets
    return CheckResult("3", "queue oracle (mean wait vs Pollaczek-Khinchine)", ok,
                       f"wq_mean={s.wq_mean:.6f} ms over {s.n_delivered} packets (rel err {rel:.4f})",
                       f"{target:.6f} ms, >= {min_packets} packets", "5% relative")


def _sparse_replications(cfg, rho, delta, reps=20, seed=0):
    return simulator.replicate(cfg, rho, delta, reps, base_seed=seed, horizon_ms=1e5 / rho)


@_timed(60.0)
def check_light_traffic(cfg):
    agg = _sparse_replications(cfg, 1e-3, 0.3)
    limit = 0.01 * 1000.0 / cfg.mu
    wq = agg.mean["wq_mean"]
    return CheckResult("4", "queueing wait vanishes at light traffic", wq <= limit,
                       f"wq_mean={wq:.3e} ms over {agg.n_reps} replications",
                       f"<= {limit:g} ms (1% of 1/mu)", "one-sided")


@_timed(60.0)
def check_deadlines_vanish(cfg, seed=5):
    s = simulator.run(cfg, 0.01, 0.5, 1e8, seed=seed)
    rates = {k: st.viol_rate for k, st in s.per_class.items() if st.n_delivered}
    n = s.n_delivered
    ok = n >= 100_000 and all(v == 0 for v in rates.values())
    return CheckResult("5", "deadline violations vanish at rho=0.01, delta=0.5", ok,
                       f"viol={rates}, packets={n}", "0 for all classes, >= 100000 packets", "exact")


@_timed(300.0)
def check_convergence(cfg, rhos=(0.1, 0.01, 0.001), delta=0.3, reps=20):
    gaps, cis = [], []
    for rho in rhos:
        sim = analyze(cfg, rho, delta, "simulated", reps=reps, horizon_ms=1e5 / rho)
        asym = analyze(cfg, rho, delta, "asymptotic")
        ref = asym.report.psi_raw
        gaps.append(abs(sim.report.psi_raw - ref) / ref)
        cis.append(sim.ci_psi / ref)
    final_ok = gaps[-1] <= 0.02
    # no statistically resolvable increase between successive activity levels
    mono_ok = all(gaps[i + 1] <= gaps[i] + cis[i] + cis[i + 1] for i in range(len(rhos) - 1))
    return CheckResult("6", "simulated metric converges to the small-activity limit",
                       final_ok and mono_ok,
                       "rel gaps " + ", ".join(f"rho={r:g}: {g:.2e} (ci {c:.1e})"
                                               for r, g, c in zip(rhos, gaps, cis)),
                       f"gap <= 0.02 at rho={rhos[-1]:g}; non-increasing within CI",
                       "2% relative")


@_timed(5.0)
def check_usam_properties(cfg, n=10_000, seed=7):
    rng = np.random.default_rng(seed)
    f, r, s = rng.random((3, n))
    w = rng.random((n, 3)) * 3.0
    bump = rng.random((3, n))
    bounded = monotone = reduction = True
    for i in range(n):
        ws = tuple(w[i])
        p = usam(f[i], r[i], s[i], ws)
        bounded &= 0.0 <= p <= 1.0
        comps = [f[i], r[i], s[i]]
        for c in range(3):
            up = list(comps)
            up[c] = comps[c] + bump[c, i] * (1.0 - comps[c])
            monotone &= usam(*up, ws) >= p
        reduction &= abs(usam(f[i], r[i], s[i], (ws[0], 0.0, 0.0)) - f[i] ** ws[0]) <= 1e-12
    return CheckResult("7", "aggregation bounded, monotone, reduces to freshness",
                       bool(bounded and monotone and reduction),
                       f"bounded={bounded}, monotone={monotone}, reduction={reduction} over {n} tuples",
                       "all True", "reduction 1e-12")


@_timed(60.0)
def check_wcrt_sparse(cfg, seed=3):
    delta = 0.3
    s = simulator.run(cfg, 0.01, delta, 1e8, seed=seed)
    fracs = {k: st.n_exceed / st.n_delivered for k, st in s.per_class.items() if st.n_delivered}
    total = sum(st.n_exceed for st in s.per_class.values())
    traced = len(s.exceedances) == min(total, simulator.MAX_TRACED_EXCEEDANCES) and all(
        ex.trace and ex.packet in ex.trace and ex.packet.response > ex.bound
        for ex in s.exceedances)
    ok = all(v <= 1e-3 for v in fracs.values()) and traced
    bounds = {c.name: round(wcrt_bound(cfg, c.name, delta), 6) for c in cfg.classes}
    return CheckResult("8", "response-time bound holds in the sparse regime", ok,
                       f"exceedance fractions={fracs} ({total} logged)",
                       f"<= 1e-3 per class, bounds {bounds} ms", "one-sided")


@_timed(10.0)
def check_phase(cfg, n=30):
    th = feasibility_thresholds(cfg)
    deltas, rhos = grid(0.01, 1.0, n), grid(0.0, 1.0, n)
    text, _, _ = phase(cfg, deltas, rhos)
    rows = read_csv(text)
    mismatches = 0
    for row, (d, r) in zip(rows, ((d, r) for d in deltas for r in rhos)):
        if d < th.delta_safe:
            want = "safety-infeasible"
        elif r > th.rho_safe_at(d):
            want = "queue-limited"
        else:
            want = "feasible"
        mismatches += row["region"] != want
    ok = mismatches == 0 and len(rows) == n * n
    return CheckResult("9", "phase map matches closed-form boundaries", ok,
                       f"{mismatches} mismatches over {len(rows)} cells",
                       "0 mismatches", "exact")


@_timed(120.0)
def check_safety_blindness(cfg):
    spec = SweepSpec("delta", 0.10, 0.40, 16, fixed_value=0.1, mode="simulated",
                     reps=4, horizon_ms=2e5, seed=0)
    text, _, _ = sweep(cfg, spec, plot=False)
    rows = {round(r["delta"], 6): r for r in read_csv(text)}
    lo, hi = rows[0.22], rows[0.24]
    spread = {}
    for col in ("aoi_ms", "paoi_ms"):
        a, b = lo[col], hi[col]
        spread[col] = abs(a - b) / min(a, b) if math.isfinite(a) and math.isfinite(b) else math.inf
    ok = (all(v < 0.5 for v in spread.values())
          and lo["psi_gated"] == 0.0 and hi["psi_gated"] >= 0.5)
    return CheckResult("10", "freshness metrics miss the boundary the gated metric shows", ok,
                       f"AoI/PAoI change {spread['aoi_ms']:.3f}/{spread['paoi_ms']:.3f}; "
                       f"psi_gated {lo['psi_gated']:.3f} -> {hi['psi_gated']:.3f}",
                       "age change < 50%, psi_gated 0 -> >= 0.5", "one-sided")


CHECKS = {
    "1": check_thresholds,
    "2": check_delta_wcrt,
    "3": check_pk,
    "4": check_light_traffic,
    "5": check_deadlines_vanish,
    "6": check_convergence,
    "7": check_usam_properties,
    "8": check_wcrt_sparse,
    "9": check_phase,
    "10": check_safety_blindness,
}


def validate(cfg=None, only=None, echo=print):
    """Run the checks (all, or the keys in ``only``) and return their results."""
    cfg = cfg if cfg is not None else load_preset()
    results = []
    for key, fn in CHECKS.items():
        if only is not None and key not in only:
            continue
        res = fn(cfg)
        results.append(res)
        if echo is not None:
            echo(res.line())
    return results
