"""
Duty-cycle and activity thresholds
==================================

Closed-form feasibility thresholds and per-class response-time bounds
for the bundled reference configuration.
"""

from usam import load_preset
from usam.analytic import feasibility_thresholds, wcrt_bound

cfg = load_preset("C")
th = feasibility_thresholds(cfg)

print(f"delta_queue = {th.delta_queue:.5f}")
print(f"delta_wcrt  = {th.delta_wcrt:.5f}")
print(f"delta_safe  = {th.delta_safe:.5f}")

# The stability line rho_safe(delta) grows linearly until it saturates at 1.
for delta in (0.2, 0.3, 0.5, 0.8, 1.0):
    print(f"rho_safe({delta:.1f}) = {th.rho_safe_at(delta):.3f}")

# Bounds shrink by v_max per unit of duty cycle; lower priority pays for
# everything above it.
for delta in (0.0, th.delta_safe, 1.0):
    bounds = {c.name: round(wcrt_bound(cfg, c.name, delta), 4) for c in cfg.by_priority()}
    print(f"delta={delta:.3f}: {bounds}")
