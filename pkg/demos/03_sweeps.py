"""
Sweeps and their charts
=======================

Sweep the duty cycle at fixed activity, then the activity at fixed duty
cycle. Each sweep writes a CSV and an SVG with the threshold drawn in.
"""

from pathlib import Path

from usam import load_preset
from usam.harness.experiments import SweepSpec, read_csv, sweep

cfg = load_preset()
out = Path(__file__).parent / "out"

text, _, paths = sweep(cfg, SweepSpec("delta", 0.05, 1.0, 20), out, name="delta_asym")
print(*paths, sep="\n")

# Simulated version of the same sweep, a few short replications per point.
spec = SweepSpec("delta", 0.10, 0.40, 16, fixed_value=0.1, mode="sim", reps=4, horizon_ms=2e5)
text, _, paths = sweep(cfg, spec, out, name="delta_sim")
print(*paths, sep="\n")

# Around the threshold the ages hardly change but the gated metric switches on.
for row in read_csv(text):
    if 0.2 <= row["delta"] <= 0.26:
        print(f"delta={row['delta']:.2f} aoi={row['aoi_ms']:.2f} psi_gated={row['psi_gated']:.3f}")

_, _, paths = sweep(cfg, SweepSpec("rho", 0.0, 1.0, 21, fixed_value=0.3), out, name="rho_asym")
print(*paths, sep="\n")
