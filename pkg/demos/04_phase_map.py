"""
Feasibility regions
===================

Label the (delta, rho) plane as safety-infeasible, queue-limited or
feasible and render the map.
"""

from collections import Counter
from pathlib import Path

from usam import load_preset
from usam.harness.experiments import grid, phase, read_csv

cfg = load_preset()
text, _, paths = phase(cfg, grid(0.01, 1.0, 30), grid(0.0, 1.0, 30), Path(__file__).parent / "out")
print(*paths, sep="\n")
print(Counter(r["region"] for r in read_csv(text)))

# A higher stability margin pushes delta_safe right and lowers the line.
strict = cfg.evolve(alpha=2.0)
text, _, _ = phase(strict, grid(0.01, 1.0, 30), grid(0.0, 1.0, 30))
print("alpha=2:", Counter(r["region"] for r in read_csv(text)))
