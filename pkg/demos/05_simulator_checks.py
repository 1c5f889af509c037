"""
Simulator against known answers
===============================

With the receiver always on and exponential demand the gateway is an
M/G/1 queue, so its mean wait has a closed form. At low activity the
wait disappears and the receiver runs at its nominal duty cycle.
"""

from pathlib import Path

from usam import load_preset
from usam.simulator import replicate, run, write_event_log

cfg = load_preset()

mm1 = cfg.evolve(lambda_s=0.5 * cfg.mu)
s = run(mm1, 1.0, 1.0, 1e6, seed=3, service="exponential")
lam, es = 0.5, 1.0
print(f"mean wait {s.wq_mean:.4f} ms vs formula {lam * 2 * es**2 / (2 * (1 - lam * es)):.4f} ms "
      f"({s.n_delivered} packets)")

agg = replicate(cfg, 1e-3, 0.3, 10, horizon_ms=1e8)
print(f"light traffic: wq={agg.mean['wq_mean']:.2e} ms, duty={agg.mean['realized_duty']:.4f}")

# Per-packet log of a short busy run.
busy = run(cfg.evolve(lambda_s=3000.0), 1.0, 0.5, 200.0, warmup_ms=0.0, record_events=True)
path = Path(__file__).parent / "out" / "events.csv"
path.parent.mkdir(exist_ok=True)
write_event_log(path, busy.packets)
print(f"{len(busy.packets)} packets logged to {path}")
print(f"bound exceedances: {len(busy.exceedances)}")
