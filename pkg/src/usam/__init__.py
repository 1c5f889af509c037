"""Unified safety-age metric: analytic engine and gateway simulator."""
from .model import (
    ClassSpec, ConfigError, SystemConfig, load_config, load_preset,
    arrival_rates, utilization, hp,
)
from .analytic import (
    FeasibilityThresholds, AsymptoticComponents, wcrt_base, wcrt_bound,
    slack_ok, feasibility_thresholds, aos_mean_asymptotic, asymptotic_components,
)
from .metrics import MetricReport, freshness, reliability, safety, usam, gate, comparison_metrics
from .simulator import run, replicate

__version__ = "0.1.0"
