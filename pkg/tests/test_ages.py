import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from usam.ages import aoi_mean, aos_mean, paoi_mean, track_ages


# Brute-force oracles: evaluate the age function pointwise and integrate
# with the midpoint rule between breakpoints, where it is exactly linear.

def _aoi_at(gen, done, t):
    seen = [g for g, d in zip(gen, done) if d <= t]
    return t - max(seen) if seen else math.nan


def _aos_at(gen, done, t):
    pending = [g for g, d in zip(gen, done) if g <= t < d]
    return t - min(pending) if pending else 0.0


def _integrate(fn, gen, done, lo, hi):
    pts = sorted({lo, hi, *[x for x in (*gen, *done) if lo < x < hi and math.isfinite(x)]})
    return sum((b - a) * fn(gen, done, 0.5 * (a + b)) for a, b in zip(pts, pts[1:]))


def oracle_aoi(gen, done, t0, t1):
    firsts = [d for d in done if d <= t1]
    if not firsts:
        return math.nan
    lo = max(t0, min(firsts))
    if lo >= t1:
        return math.nan
    return _integrate(_aoi_at, gen, done, lo, t1) / (t1 - lo)


def oracle_aos(gen, done, t0, t1):
    if len(gen) == 0 or gen[0] >= t1:
        return math.nan
    return _integrate(_aos_at, gen, done, t0, t1) / (t1 - t0)


def oracle_paoi(gen, done, t0, t1):
    peaks = []
    for j, d in enumerate(done):
        if not (t0 <= d <= t1):
            continue
        before = [g for g, dd in zip(gen, done) if dd < d]
        if before:
            peaks.append(d - max(before))
    return float(np.mean(peaks)) if peaks else math.nan


def test_periodic_updates_with_constant_delay():
    period, delay = 10.0, 2.0
    gen = np.arange(0.0, 10_000.0, period)
    done = gen + delay
    t0, t1 = 2.0, 9_992.0  # whole periods after the first delivery
    assert aoi_mean(gen, done, t0, t1) == pytest.approx(period / 2 + delay, rel=1e-12)
    assert paoi_mean(gen, done, t0, t1) == pytest.approx(period + delay, rel=1e-12)
    # synchronization age: ramps to `delay` during each transit
    assert aos_mean(gen, done, t0, t1) == pytest.approx(delay ** 2 / 2 / period, rel=1e-9)


def test_instant_delivery_keeps_sync_age_at_zero():
    gen = np.array([1.0, 3.5, 7.0])
    assert aos_mean(gen, gen, 0.0, 10.0) == 0.0


def test_single_update():
    gen, done = np.array([1.0]), np.array([3.0])
    assert aoi_mean(gen, done, 0.0, 5.0) == pytest.approx(3.0)  # age 2 -> 4 over [3, 5]
    assert math.isnan(paoi_mean(gen, done, 0.0, 5.0))
    assert aos_mean(gen, done, 0.0, 5.0) == pytest.approx(0.5 * 2.0 ** 2 / 5.0)


def test_nothing_delivered():
    gen, done = np.array([1.0, 2.0]), np.array([math.inf, math.inf])
    assert math.isnan(aoi_mean(gen, done, 0.0, 5.0))
    # still pending at the end: ages 4 - 0 ... counted from first generation
    assert aos_mean(gen, done, 0.0, 5.0) == pytest.approx(0.5 * 4.0 ** 2 / 5.0)
    assert all(math.isnan(v) for v in track_ages([], [], 0.0, 5.0))


@st.composite
def fifo_streams(draw):
    n = draw(st.integers(1, 25))
    gaps = draw(st.lists(st.floats(0.01, 5.0), min_size=n, max_size=n))
    svc = draw(st.lists(st.floats(0.01, 3.0), min_size=n, max_size=n))
    gen = np.cumsum(gaps)
    done = np.empty(n)
    last = 0.0
    for i in range(n):
        last = max(last, gen[i]) + svc[i]
        done[i] = last
    t0 = draw(st.floats(0.0, float(gen[-1])))
    t1 = t0 + draw(st.floats(0.5, 40.0))
    return gen, done, t0, t1


@settings(max_examples=200, deadline=None)
@given(fifo_streams())
def test_ages_match_bruteforce_oracle(stream):
    gen, done, t0, t1 = stream
    got = track_ages(gen, done, t0, t1)
    want = (oracle_aoi(gen, done, t0, t1), oracle_paoi(gen, done, t0, t1),
            oracle_aos(gen, done, t0, t1))
    for g, w in zip(got, want):
        if math.isnan(w):
            assert math.isnan(g)
        else:
            assert g == pytest.approx(w, rel=1e-9, abs=1e-9)


@settings(max_examples=100, deadline=None)
@given(fifo_streams())
def test_sync_age_never_exceeds_information_age(stream):
    gen, done, t0, t1 = stream
    # pointwise AoS <= AoI once something has been delivered
    first = done[0]
    if first < t0:
        assert aos_mean(gen, done, t0, t1) <= aoi_mean(gen, done, t0, t1) + 1e-9
