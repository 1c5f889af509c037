"""Event-driven simulation of the duty-cycled, preemptive-priority gateway.

The receiver follows a fixed cycle of length ``v_max``: an off-segment of
``(1 - delta) * v_max`` followed by an on-segment. An off-segment is
skipped whenever the gateway holds work at the cycle boundary, so a busy
period is never interrupted and an idle-arrival waits at most one
off-segment. Readiness is computed from the cycle arithmetic rather than
scheduled as events, which keeps very long sparse-traffic horizons cheap.
"""
from __future__ import annotations

import csv
import logging
import math
import zlib
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial

import numpy as np

from . import ages
from .analytic import wcrt_bound
from .model import arrival_rates_per_ms, utilization

log = logging.getLogger(__name__)

WARMUP_FRACTION = 0.05
MAX_TRACED_EXCEEDANCES = 1000
_PURPOSES = {"arrival": 0, "service": 1}


@dataclass(frozen=True)
class Packet:
    cls: str
    t_arrival: float
    service_demand: float
    t_start: float
    t_done: float
    v_activation: float

    @property
    def response(self):
        return self.t_done - self.t_arrival

    @property
    def w_queue(self):
        return self.response - self.v_activation - self.service_demand


@dataclass(frozen=True)
class Exceedance:
    packet: Packet
    bound: float
    trace: tuple  # Packets present in the gateway while ``packet`` was


@dataclass
class ClassStats:
    n_arrived: int
    n_delivered: int
    wq_mean: float
    t_mean: float
    t_max: float
    viol_rate: float
    n_exceed: int


@dataclass
class AgeStats:
    aoi_mean: float
    paoi_mean: float
    aos_mean: float


@dataclass
class SimSummary:
    rho: float
    delta: float
    horizon: float
    warmup: float
    seed: int
    per_class: dict
    ages: dict
    wq_mean: float
    t_max: float
    realized_duty: float
    unstable: bool
    exceedances: list = field(default_factory=list)
    packets: list | None = None
    trace: list | None = None

    @property
    def n_delivered(self):
        return sum(s.n_delivered for s in self.per_class.values())

    def _age_max(self, attr):
        vals = [getattr(a, attr) for a in self.ages.values()]
        vals = [v for v in vals if not math.isnan(v)]
        return max(vals) if vals else math.nan

    @property
    def aoi_max(self):
        return self._age_max("aoi_mean")

    @property
    def paoi_max(self):
        return self._age_max("paoi_mean")

    @property
    def aos_max(self):
        return self._age_max("aos_mean")

    def flat(self):
        """Scalar statistics keyed by ``name`` or ``name.class``."""
        out = {
            "wq_mean": self.wq_mean,
            "t_max": self.t_max,
            "realized_duty": self.realized_duty,
            "aoi_max": self.aoi_max,
            "paoi_max": self.paoi_max,
            "aos_max": self.aos_max,
            "n_delivered": float(self.n_delivered),
        }
        for k, s in self.per_class.items():
            for attr in ("n_delivered", "wq_mean", "t_mean", "t_max", "viol_rate", "n_exceed"):
                out[f"{attr}.{k}"] = float(getattr(s, attr))
        for k, a in self.ages.items():
            for attr in ("aoi_mean", "paoi_mean", "aos_mean"):
                out[f"{attr}.{k}"] = getattr(a, attr)
        return out


def rng_stream(seed, class_name, purpose):
    """Independent PCG64 stream per (seed, class, purpose)."""
    key = [int(seed), zlib.crc32(class_name.encode()), _PURPOSES[purpose]]
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(key)))


def sample_service(spec, rng, s_min, size=None):
    """Uniform service demand on ``[s_min, spec.c_max]`` in ms."""
    if s_min == spec.c_max:
        return spec.c_max if size is None else np.full(size, spec.c_max)
    return rng.uniform(s_min, spec.c_max, size)


def poisson_times(rng, rate, horizon):
    """Arrival instants of a rate-``rate`` Poisson process on [0, horizon)."""
    if rate <= 0:
        return np.empty(0)
    mean = rate * horizon
    chunk = int(mean + 4.0 * math.sqrt(mean)) + 16
    parts, t = [], 0.0
    while t < horizon:
        times = t + np.cumsum(rng.exponential(1.0 / rate, chunk))
        parts.append(times)
        t = times[-1]
    times = np.concatenate(parts)
    return times[times < horizon]


class ReceiverSchedule:
    """Cycle arithmetic for the duty-cycled receiver."""

    def __init__(self, delta, v_max):
        if not 0 < delta <= 1:
            raise ValueError(f"delta must lie in (0, 1], got {delta}")
        self.delta = delta
        self.period = v_max
        self.off = (1.0 - delta) * v_max

    def next_ready(self, t, prev_busy=(-math.inf, -math.inf)):
        """First instant >= t at which an idle gateway can serve.

        ``prev_busy`` is the last occupied interval ``(start, end)``; the
        off-segment of the current cycle was skipped if that interval
        straddled the cycle's start.
        """
        n = math.floor(t / self.period)
        cs = n * self.period
        if t - cs >= self.off:
            return t
        if prev_busy[0] < cs < prev_busy[1]:
            return t
        return cs + self.off

    def skipped_cycles(self, start, end):
        """Inclusive index range of cycles whose off-segment an occupied
        interval ``(start, end)`` suppresses."""
        return math.floor(start / self.period) + 1, math.ceil(end / self.period) - 1


def _draw_traffic(cfg, rho, horizon, seed, service):
    rates = arrival_rates_per_ms(cfg, rho)
    order = cfg.by_priority()
    name_rank = {n: i for i, n in enumerate(sorted(cfg.class_names))}
    t, s, lvl, nr = [], [], [], []
    for level, c in enumerate(order):
        times = poisson_times(rng_stream(seed, c.name, "arrival"), rates[c.name], horizon)
        srng = rng_stream(seed, c.name, "service")
        if service == "uniform":
            demand = sample_service(c, srng, cfg.s_min, times.size)
        elif service == "exponential":
            demand = srng.exponential(1000.0 / cfg.mu, times.size)
        else:
            raise ValueError(f"unknown service mode {service!r}")
        t.append(times)
        s.append(np.asarray(demand, dtype=float))
        lvl.append(np.full(times.size, level))
        nr.append(np.full(times.size, name_rank[c.name]))
    t, s, lvl, nr = (np.concatenate(x) for x in (t, s, lvl, nr))
    # ties: higher priority first, then class name
    idx = np.lexsort((nr, lvl, t))
    return t[idx], s[idx], lvl[idx], order


def _simulate(arr, svc, level, n_levels, sched, horizon, record):
    """Core event loop. Returns per-packet start/done/activation arrays,
    the list of occupied intervals and the optional trace."""
    n = len(arr)
    start = [math.nan] * n
    done = [math.inf] * n
    vact = [0.0] * n
    rem = list(svc)
    queues = [deque() for _ in range(n_levels)]
    trace = [] if record else None
    busy = []

    t = 0.0
    nsys = 0
    cur = -1
    cur_lvl = n_levels
    ready = 0.0
    occ_start = -math.inf
    prev_busy = (-math.inf, -math.inf)

    for i in range(n + 1):
        a = arr[i] if i < n else horizon
        while nsys:
            if cur < 0:
                s0 = t if t > ready else ready
                if s0 >= a:
                    break
                for cur_lvl in range(n_levels):
                    if queues[cur_lvl]:
                        break
                cur = queues[cur_lvl].popleft()
                t = s0
                if start[cur] != start[cur]:
                    start[cur] = t
                    if record:
                        trace.append((t, "start", cur))
                elif record:
                    trace.append((t, "resume", cur))
            fin = t + rem[cur]
            if fin > a:
                rem[cur] -= a - t
                t = a
                break
            t = fin
            rem[cur] = 0.0
            done[cur] = fin
            if record:
                trace.append((fin, "done", cur))
            cur = -1
            nsys -= 1
            if not nsys:
                prev_busy = (occ_start, fin)
                busy.append(prev_busy)
        if i == n:
            break
        if not nsys:
            t = a
            occ_start = a
            ready = sched.next_ready(a, prev_busy)
            if record:
                trace.append((ready, "ready", i))
        if ready > a:
            vact[i] = ready - a
        lv = level[i]
        queues[lv].append(i)
        nsys += 1
        if record:
            trace.append((a, "arrival", i))
        if cur >= 0 and lv < cur_lvl:
            queues[cur_lvl].appendleft(cur)
            if record:
                trace.append((a, "preempt", cur))
            cur = -1
    if nsys:
        busy.append((occ_start, horizon))
    return start, done, vact, busy, trace


def _realized_duty(sched, busy, warmup, horizon):
    """On-fraction over the whole cycles inside [warmup, horizon]."""
    p = sched.period
    na = math.ceil(warmup / p)
    nb = math.floor(horizon / p)
    ncyc = nb - na
    if ncyc <= 0:
        return sched.delta
    skipped = 0
    for s, e in busy:
        n1, n2 = sched.skipped_cycles(s, e)
        lo, hi = max(n1, na), min(n2, nb - 1)
        if hi >= lo:
            skipped += hi - lo + 1
    return 1.0 - (1.0 - sched.delta) * (1.0 - skipped / ncyc)


def _packet(names, lvl, arr, svc, start, done, vact, j):
    return Packet(names[lvl[j]], float(arr[j]), float(svc[j]), float(start[j]), float(done[j]), float(vact[j]))


def run(cfg, rho, delta, horizon_ms, warmup_ms=None, seed=0, service="uniform", record_events=False):
    """Simulate one replication and summarize it.

    Statistics cover packets arriving after ``warmup_ms`` (default 5% of
    the horizon). Packets still queued at the horizon count as deadline
    violations once their age exceeds the deadline and are otherwise
    left out. ``service="exponential"`` replaces the bounded uniform
    demand with exponential demand of mean 1/mu, for queueing-formula
    cross-checks only.
    """
    if warmup_ms is None:
        warmup_ms = WARMUP_FRACTION * horizon_ms
    if not horizon_ms > warmup_ms >= 0:
        raise ValueError("need horizon_ms > warmup_ms >= 0")
    if not 0 <= rho <= 1:
        raise ValueError(f"rho must lie in [0, 1], got {rho}")
    sched = ReceiverSchedule(delta, cfg.v_max)

    arr, svc, lvl, order = _draw_traffic(cfg, rho, horizon_ms, seed, service)
    start, done, vact, busy, trace = _simulate(
        arr.tolist(), svc.tolist(), lvl.tolist(), len(order), sched, horizon_ms, record_events)
    start = np.asarray(start)
    done = np.asarray(done)
    vact = np.asarray(vact)
    names = [c.name for c in order]

    delivered = np.isfinite(done)
    resp = done - arr
    wq = resp - vact - svc
    wq[np.abs(wq) < 1e-9] = 0.0  # subtraction round-off
    measured = arr >= warmup_ms
    per_class, age_stats = {}, {}
    exceed_idx = []
    all_wq, all_tmax = [], []
    for level, c in enumerate(order):
        m = measured & (lvl == level)
        md = m & delivered
        n_del = int(md.sum())
        late_pending = m & ~delivered & (horizon_ms - arr > c.deadline)
        n_miss = int((resp[md] > c.deadline).sum()) + int(late_pending.sum())
        denom = n_del + int(late_pending.sum())
        bound = wcrt_bound(cfg, c.name, delta)
        over = np.flatnonzero(md & (resp > bound + 1e-9))
        exceed_idx.extend(over.tolist())
        per_class[c.name] = ClassStats(
            n_arrived=int(m.sum()),
            n_delivered=n_del,
            wq_mean=float(wq[md].mean()) if n_del else math.nan,
            t_mean=float(resp[md].mean()) if n_del else math.nan,
            t_max=float(resp[md].max()) if n_del else math.nan,
            viol_rate=n_miss / denom if denom else math.nan,
            n_exceed=int(over.size),
        )
        if n_del:
            all_wq.append(wq[md])
            all_tmax.append(resp[md].max())
        if c.is_monitoring:
            cm = lvl == level
            age_stats[c.name] = AgeStats(*ages.track_ages(arr[cm], done[cm], warmup_ms, horizon_ms))

    exceedances = []
    if exceed_idx:
        exceed_idx.sort()
        horizon_resp = float(np.nanmax(np.where(delivered, resp, horizon_ms - arr)))
        for j in exceed_idx[:MAX_TRACED_EXCEEDANCES]:
            lo = np.searchsorted(arr, arr[j] - horizon_resp, side="left")
            hi = np.searchsorted(arr, done[j], side="right")
            trace_pk = tuple(
                _packet(names, lvl, arr, svc, start, done, vact, q)
                for q in range(lo, hi) if done[q] >= arr[j]
            )
            pk = _packet(names, lvl, arr, svc, start, done, vact, j)
            ex = Exceedance(pk, wcrt_bound(cfg, pk.cls, delta), trace_pk)
            exceedances.append(ex)
            log.info("bound exceedance: class=%s T=%.6f ms > B=%.6f ms; trace=%s",
                     pk.cls, pk.response, ex.bound,
                     [(q.cls, round(q.t_arrival, 6), round(q.t_done, 6)) for q in trace_pk])
        if len(exceed_idx) > MAX_TRACED_EXCEEDANCES:
            log.warning("%d bound exceedances, traced the first %d",
                        len(exceed_idx), MAX_TRACED_EXCEEDANCES)

    packets = None
    if record_events:
        packets = [_packet(names, lvl, arr, svc, start, done, vact, j) for j in range(arr.size)]

    return SimSummary(
        rho=rho,
        delta=delta,
        horizon=horizon_ms,
        warmup=warmup_ms,
        seed=seed,
        per_class=per_class,
        ages=age_stats,
        wq_mean=float(np.concatenate(all_wq).mean()) if all_wq else math.nan,
        t_max=float(max(all_tmax)) if all_tmax else math.nan,
        realized_duty=_realized_duty(sched, busy, warmup_ms, horizon_ms),
        unstable=rho > 0 and utilization(cfg, rho, delta) >= 1.0,
        exceedances=exceedances,
        packets=packets,
        trace=trace,
    )


def write_event_log(path, packets):
    """One CSV row per packet, times in ms with 6 decimals."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["class", "t_arrival", "v_activation", "w_queue", "service", "t_done"])
        for p in packets:
            w.writerow([p.cls] + [f"{x:.6f}" for x in
                                  (p.t_arrival, p.v_activation, p.w_queue, p.service_demand, p.t_done)])


@dataclass
class ReplicatedSummary:
    runs: list
    mean: dict
    ci: dict

    @property
    def n_reps(self):
        return len(self.runs)


def aggregate(runs):
    """Mean and 95% normal half-width of every scalar statistic.

    The result depends only on the multiset of runs, not their order.
    """
    runs = sorted(runs, key=lambda r: r.seed)
    flats = [r.flat() for r in runs]
    keys = flats[0].keys()
    mean, ci = {}, {}
    for k in keys:
        vals = np.array([f[k] for f in flats], dtype=float)
        vals = vals[~np.isnan(vals)]
        mean[k] = float(vals.mean()) if vals.size else math.nan
        ci[k] = half_width(vals)
    return ReplicatedSummary(runs, mean, ci)


def half_width(vals, z=1.96):
    vals = np.asarray(vals, dtype=float)
    vals = vals[~np.isnan(vals)]
    if vals.size < 2:
        return math.nan
    return float(z * vals.std(ddof=1) / math.sqrt(vals.size))


def replicate(cfg, rho, delta, n_reps, base_seed=0, horizon_ms=1e6, warmup_ms=None,
              workers=None, **kwargs):
    """Run ``n_reps`` replications with seeds ``base_seed + i``."""
    if n_reps < 1:
        raise ValueError("n_reps must be >= 1")
    job = partial(_run_seed, cfg, rho, delta, horizon_ms, warmup_ms, kwargs)
    seeds = [base_seed + i for i in range(n_reps)]
    if workers and workers > 1 and n_reps > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            runs = list(ex.map(job, seeds))
    else:
        runs = [job(s) for s in seeds]
    return aggregate(runs)


def _run_seed(cfg, rho, delta, horizon_ms, warmup_ms, kwargs, seed):
    return run(cfg, rho, delta, horizon_ms, warmup_ms, seed=seed, **kwargs)
