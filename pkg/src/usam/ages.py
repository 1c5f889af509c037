"""Time-averaged age processes for one update stream.

All functions take generation times ``gen`` and delivery times ``done``
(``inf`` for never delivered) of a single class, in generation order.
Within a class the server is FIFO, so deliveries arrive in that order too.
"""
from __future__ import annotations

import math

import numpy as np


def _clip_area(lo, hi, origin):
    """Integral of (t - origin) over [lo, hi], elementwise, zero where hi <= lo."""
    hi = np.maximum(hi, lo)
    return 0.5 * ((hi - origin) ** 2 - (lo - origin) ** 2)


def aoi_mean(gen, done, t0, t1):
    """Time average of ``t - gen(freshest delivered)`` over [t0, t1].

    Averaging starts at the first delivery when that falls after ``t0``;
    before it the age is undefined. NaN when nothing was delivered by ``t1``.
    """
    gen = np.asarray(gen, dtype=float)
    done = np.asarray(done, dtype=float)
    ok = np.isfinite(done) & (done <= t1)
    d = done[ok]
    if d.size == 0:
        return math.nan
    g = np.maximum.accumulate(gen[ok])
    start = max(t0, d[0])
    if t1 <= start:
        return math.nan
    nxt = np.append(d[1:], t1)
    lo = np.clip(d, start, t1)
    hi = np.clip(nxt, start, t1)
    return float(_clip_area(lo, hi, g).sum() / (t1 - start))


def paoi_mean(gen, done, t0, t1):
    """Mean of the age seen just before each delivery landing in [t0, t1]."""
    gen = np.asarray(gen, dtype=float)
    done = np.asarray(done, dtype=float)
    ok = np.isfinite(done) & (done <= t1)
    d = done[ok]
    g = np.maximum.accumulate(gen[ok])
    if d.size < 2:
        return math.nan
    peaks = d[1:] - g[:-1]
    sel = d[1:] >= t0
    if not sel.any():
        return math.nan
    return float(peaks[sel].mean())


def aos_mean(gen, done, t0, t1):
    """Time average of the synchronization age over [t0, t1].

    The age is ``t - gen`` of the oldest update generated but not yet
    delivered, and zero while the receiver holds the newest update.
    NaN when the class generated nothing before ``t1``.
    """
    gen = np.asarray(gen, dtype=float)
    done = np.asarray(done, dtype=float)
    if gen.size == 0 or gen[0] >= t1 or t1 <= t0:
        return math.nan
    prev = np.concatenate(([-np.inf], done[:-1]))
    lo = np.clip(np.maximum(gen, prev), t0, t1)
    hi = np.clip(done, t0, t1)
    return float(_clip_area(lo, hi, gen).sum() / (t1 - t0))


def track_ages(gen, done, t0, t1):
    """Return ``(aoi_mean, paoi_mean, aos_mean)`` for one class over [t0, t1]."""
    return aoi_mean(gen, done, t0, t1), paoi_mean(gen, done, t0, t1), aos_mean(gen, done, t0, t1)
