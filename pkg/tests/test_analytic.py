import math
from dataclasses import replace

import pytest
from hypothesis import given, strategies as st

from usam.analytic import (
    aos_mean_asymptotic, asymptotic_components, feasibility_thresholds,
    slack_ok, wcrt_base, wcrt_bound,
)
from usam.model import ClassSpec, hp, load_preset

CFG = load_preset()
deltas = st.floats(0, 1)


def test_wcrt_base_examples():
    assert wcrt_base(CFG, "S") == pytest.approx(0.10, abs=1e-15)
    assert wcrt_base(CFG, "M") == pytest.approx(0.57, abs=1e-15)
    assert wcrt_base(CFG, "FC") == pytest.approx(0.22, abs=1e-15)


def test_wcrt_bound_examples():
    assert wcrt_bound(CFG, "S", 1.0) == pytest.approx(0.10, abs=1e-15)
    assert wcrt_bound(CFG, "M", 0.23) == pytest.approx(1.725, abs=1e-12)
    assert wcrt_bound(CFG, "M", 0.0) == pytest.approx(2.07, abs=1e-12)
    for bad in (-0.1, 1.1):
        with pytest.raises(ValueError):
            wcrt_bound(CFG, "M", bad)


def test_slack_ok_examples():
    assert slack_ok(CFG, "S", 0.5)
    assert slack_ok(CFG, "M", 0.0)
    # deadline exactly on the activation+service sum is not slack
    edge = CFG.v_max * (1 - 0.5) + CFG.cls("S").c_max
    cls = tuple(ClassSpec("S", 4, 0.10, edge, 5.0, 1.0, 0.05) if c.name == "S" else c
                for c in CFG.classes)
    assert not slack_ok(CFG.evolve(classes=cls), "S", 0.5)


def test_thresholds_for_reference_preset():
    th = feasibility_thresholds(CFG)
    assert th.delta_queue == pytest.approx(0.168, abs=1e-12)
    assert th.delta_wcrt == 0.0
    assert th.delta_safe == pytest.approx(0.23016, abs=1e-12)
    assert round(th.delta_safe, 2) == 0.23
    assert th.rho_safe_at(0.3) == pytest.approx(0.2 * 1000 * 0.3 / (1.37 * 120), rel=1e-12)
    assert round(th.rho_safe_at(0.3), 3) == 0.365
    assert round(th.rho_safe_at(0.5), 3) == 0.608
    assert th.rho_safe_at(1.0) == 1.0


def test_delta_wcrt_binds_with_tight_deadline():
    # D_S = 1.0 ms: 1 - (1.0 - 0.10) / 1.5 = 0.4
    cls = tuple(ClassSpec("S", 4, 0.10, 1.0, 5.0, 1.0, 0.05) if c.name == "S" else c
                for c in CFG.classes)
    th = feasibility_thresholds(CFG.evolve(classes=cls))
    assert th.delta_wcrt == pytest.approx(0.4, abs=1e-12)
    assert th.delta_safe == th.delta_wcrt
    assert th.rho_safe_at(0.39) == 0.0


def test_aos_asymptotic_examples():
    assert aos_mean_asymptotic(CFG, 0.1, 0.3) == pytest.approx(1000 / 8.4 + 1000 / 300, rel=1e-12)
    assert round(aos_mean_asymptotic(CFG, 0.1, 0.3), 2) == 122.38
    assert aos_mean_asymptotic(CFG, 0.0, 0.3) == math.inf
    assert aos_mean_asymptotic(CFG, 0.1, 0.3, {"M": 2.0}) == pytest.approx(
        aos_mean_asymptotic(CFG, 0.1, 0.3) + 1.0, rel=1e-12)


def test_aos_requires_monitoring_class():
    cls = tuple(replace(c, is_monitoring=False) for c in CFG.classes)
    with pytest.raises(ValueError):
        aos_mean_asymptotic(CFG.evolve(classes=cls), 0.1, 0.3)


def test_asymptotic_components_examples():
    c = asymptotic_components(CFG, 0.1, 0.3)
    assert c.f0 == 1.0 and c.gamma_min == 1.0
    c = asymptotic_components(CFG, 0.1, 0.23)
    assert c.s_comp == pytest.approx(math.exp(-1.725 / 6), rel=1e-12)
    assert round(c.s_comp, 4) == 0.7501
    assert round(c.psi_limit, 4) == 0.9095
    assert asymptotic_components(CFG, 0.0, 0.3).f0 == 0.0


@given(d1=deltas, d2=deltas)
def test_wcrt_bound_affine_nonincreasing(d1, d2):
    for k in CFG.class_names:
        b1, b2 = wcrt_bound(CFG, k, d1), wcrt_bound(CFG, k, d2)
        if d1 <= d2:
            assert b1 >= b2
        if abs(d1 - d2) > 1e-6:
            assert (b2 - b1) / (d2 - d1) == pytest.approx(-CFG.v_max, rel=1e-6)
        assert wcrt_bound(CFG, k, 1.0) == wcrt_base(CFG, k)


def test_priority_monotonicity():
    for k in CFG.class_names:
        for i in hp(CFG, k):
            assert wcrt_base(CFG, i) < wcrt_base(CFG, k)


@given(st.floats(0.01, 10), st.floats(0.01, 10), st.floats(0.1, 5))
def test_delta_safe_is_max_of_branches(eps_scale, lam, alpha):
    cfg = CFG.evolve(lambda_s=lam * 100, alpha=1 + alpha, epsilon=min(1.0, 0.05 * eps_scale))
    th = feasibility_thresholds(cfg)
    assert th.delta_safe >= cfg.alpha * th.delta_queue
    assert th.delta_safe >= th.delta_wcrt
    assert th.delta_safe in (th.delta_wcrt, cfg.alpha * th.delta_queue)


@given(rho=st.floats(1e-6, 1), delta=st.floats(1e-3, 1),
       w=st.tuples(*[st.floats(0, 3)] * 3))
def test_psi_limit_bounded_and_freshness_reduction(rho, delta, w):
    cfg = CFG.evolve(weights=w)
    c = asymptotic_components(cfg, rho, delta)
    assert 0.0 <= c.psi_limit <= 1.0
    reduced = asymptotic_components(cfg.evolve(weights=(w[0], 0.0, 0.0)), rho, delta)
    assert reduced.psi_limit == c.f0 ** w[0]


@given(d1=st.floats(1e-3, 1), d2=st.floats(1e-3, 1))
def test_s_comp_strictly_increasing_in_delta(d1, d2):
    if d2 - d1 > 1e-9:
        assert asymptotic_components(CFG, 0.1, d1).s_comp < asymptotic_components(CFG, 0.1, d2).s_comp


def test_s_comp_strictly_decreasing_in_every_c_max():
    base = asymptotic_components(CFG, 0.1, 0.5).s_comp
    for k in CFG.class_names:
        cls = tuple(replace(c, c_max=c.c_max + 0.01) if c.name == k else c
                    for c in CFG.classes)
        assert asymptotic_components(CFG.evolve(classes=cls), 0.1, 0.5).s_comp < base
