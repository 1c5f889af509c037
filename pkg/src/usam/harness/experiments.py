"""Parameter sweeps and the (delta, rho) feasibility map, written as
CSV files with an SVG rendering of each."""
from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import partial
from pathlib import Path

import numpy as np

from ..analytic import feasibility_thresholds
from . import svg
from .analysis import CSV_COLUMNS, analyze, normalize_mode

PHASE_COLUMNS = ("delta", "rho", "region", "rho_safe")
DEFAULT_FIXED = {"delta": 0.1, "rho": 0.30}  # fixed rho for delta sweeps, fixed delta for rho sweeps


@dataclass(frozen=True)
class SweepSpec:
    variable: str  # "delta" | "rho"
    start: float
    stop: float
    steps: int
    fixed_value: float | None = None
    mode: str = "asymptotic"
    reps: int = 1
    horizon_ms: float | None = None
    seed: int = 0
    warmup_frac: float = 0.05

    def __post_init__(self):
        if self.variable not in ("delta", "rho"):
            raise ValueError(f"sweep variable must be 'delta' or 'rho', got {self.variable!r}")
        if not self.start < self.stop:
            raise ValueError("sweep needs start < stop")
        if self.steps < 2:
            raise ValueError("sweep needs at least 2 steps")
        object.__setattr__(self, "mode", normalize_mode(self.mode))

    @property
    def fixed(self):
        return DEFAULT_FIXED[self.variable] if self.fixed_value is None else self.fixed_value

    def grid(self):
        return grid(self.start, self.stop, self.steps)


def grid(start, stop, steps):
    """Inclusive evenly spaced grid whose endpoints are exactly ``start`` and ``stop``."""
    g = np.linspace(start, stop, steps)
    g[0], g[-1] = start, stop
    return g.tolist()


def parse_grid(text):
    """``"a:b:n"`` -> inclusive grid of n points."""
    try:
        a, b, n = text.split(":")
        return grid(float(a), float(b), int(n))
    except ValueError as exc:
        raise ValueError(f"grid must look like start:stop:count, got {text!r}") from exc


def fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, str):
        return v
    return f"{float(v):.6f}"


def rows_to_csv(rows, columns):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([fmt(r[c]) for c in columns])
    return buf.getvalue()


def read_csv(text):
    """Parse CSV text back into dicts with numeric fields as floats."""
    out = []
    for rec in csv.DictReader(io.StringIO(text)):
        row = {}
        for k, v in rec.items():
            try:
                row[k] = float(v)
            except ValueError:
                row[k] = v
        out.append(row)
    return out


def write_file(path, text):
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc
    return path


def _point(cfg, spec, x):
    rho, delta = (spec.fixed, x) if spec.variable == "delta" else (x, spec.fixed)
    ev = analyze(cfg, rho, delta, spec.mode, reps=spec.reps, horizon_ms=spec.horizon_ms,
                 warmup_frac=spec.warmup_frac, seed=spec.seed)
    return ev.row()


def sweep_rows(cfg, spec, workers=None):
    """Evaluate every grid point; rows come back in grid order."""
    job = partial(_point, cfg, spec)
    xs = spec.grid()
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            return list(ex.map(job, xs))
    return [job(x) for x in xs]


def sweep_svg(csv_text, variable, threshold):
    """Render a sweep CSV; ``threshold`` is delta_safe or rho_safe."""
    rows = read_csv(csv_text)
    x = [r[variable] for r in rows]
    series = [(name, [r[col] for r in rows]) for name, col in
              (("psi_gated", "psi_gated"), ("psi_raw", "psi_raw"), ("F", "F"),
               ("R", "R"), ("S", "S"), ("VoI", "voi"), ("AoC", "aoc"))]
    for name, col in (("AoI", "aoi_ms"), ("PAoI", "paoi_ms")):
        vals = [r[col] for r in rows]
        finite = [v for v in vals if math.isfinite(v)]
        peak = max(finite) if finite else 0.0
        series.append((f"{name} / max", [v / peak if peak > 0 else math.nan for v in vals]))
    label = "delta_safe" if variable == "delta" else "rho_safe"
    xlabel = "receiver duty cycle delta" if variable == "delta" else "activity factor rho"
    title = f"metrics vs {variable} ({rows[0]['mode']})"
    return svg.line_chart(x, series, title, xlabel, "value (ages normalized to max)",
                          thresholds=[(threshold, label)])


def sweep_threshold(cfg, spec):
    th = feasibility_thresholds(cfg)
    return th.delta_safe if spec.variable == "delta" else th.rho_safe_at(spec.fixed)


def sweep(cfg, spec, out_dir=None, name=None, workers=None, plot=True):
    """Run a sweep and write ``<name>.csv`` (and ``<name>.svg``) to ``out_dir``.

    Returns ``(csv_text, svg_text_or_None, paths)``.
    """
    rows = sweep_rows(cfg, spec, workers)
    text = rows_to_csv(rows, CSV_COLUMNS)
    image = sweep_svg(text, spec.variable, sweep_threshold(cfg, spec)) if plot else None
    paths = []
    if out_dir is not None:
        name = name or f"sweep_{spec.variable}_{spec.mode}"
        paths.append(write_file(Path(out_dir) / f"{name}.csv", text))
        if image is not None:
            paths.append(write_file(Path(out_dir) / f"{name}.svg", image))
    return text, image, paths


def region(th, delta, rho):
    if delta < th.delta_safe:
        return "safety-infeasible"
    if rho > th.rho_safe_at(delta):
        return "queue-limited"
    return "feasible"


def phase_rows(cfg, deltas, rhos):
    th = feasibility_thresholds(cfg)
    return [
        {"delta": d, "rho": r, "region": region(th, d, r), "rho_safe": th.rho_safe_at(d)}
        for d in deltas for r in rhos
    ]


def phase_svg(csv_text, delta_safe, rho_slope):
    rows = read_csv(csv_text)
    deltas = sorted({r["delta"] for r in rows})
    rhos = sorted({r["rho"] for r in rows})
    lookup = {(r["delta"], r["rho"]): r["region"] for r in rows}
    labels = [[lookup[(d, r)] for r in rhos] for d in deltas]
    xs = grid(deltas[0], deltas[-1], 200)
    curve = (xs, [rho_slope * x for x in xs])
    return svg.region_map(deltas, rhos, labels, "feasibility regions", curve, delta_safe)


def phase(cfg, deltas, rhos, out_dir=None, name="phase", plot=True):
    """Label every (delta, rho) cell; returns ``(csv_text, svg_text_or_None, paths)``."""
    th = feasibility_thresholds(cfg)
    text = rows_to_csv(phase_rows(cfg, deltas, rhos), PHASE_COLUMNS)
    image = phase_svg(text, th.delta_safe, th.rho_slope) if plot else None
    paths = []
    if out_dir is not None:
        paths.append(write_file(Path(out_dir) / f"{name}.csv", text))
        if image is not None:
            paths.append(write_file(Path(out_dir) / f"{name}.svg", image))
    return text, image, paths
