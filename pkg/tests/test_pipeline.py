import math

import numpy as np
import pytest

from cadro.ambiguity import tv_radius
from cadro.core import AffineCostModel, Dataset, ProbVector, RngStream, expected_cost, sample_dataset
from cadro.pipeline import (
    Method,
    PipelineConfig,
    cadro_run,
    d_dro_run,
    robust_run,
    run_method,
    saa_certified_run,
    smoothed_empirical,
    tau,
    train_direction,
)
from cadro.solver import minimize_expected

CFG = PipelineConfig()


def test_tau_values():
    raw = 0.01 * 0.8 * 100 * 101 / (0.01 * 100 + 0.8)
    assert raw == pytest.approx(44.888, abs=1e-3)
    assert tau(100) == 44
    assert tau(10) == 1
    assert tau(2) == 1
    big = 10**7
    assert tau(big) / big == pytest.approx(0.8, abs=1e-3)
    with pytest.raises(ValueError):
        tau(1)


def test_tau_monotone_and_clamped():
    vals = [tau(m) for m in range(2, 3000)]
    assert all(1 <= t <= m - 1 for t, m in zip(vals, range(2, 3000)))
    assert all(b >= a for a, b in zip(vals, vals[1:]))


def data_for(inst, m, seed):
    return sample_dataset(inst.p_star, m, RngStream(seed, m).generator())


def test_cadro_below_saa_paired(small_instance, small_model):
    for seed in range(20):
        data = data_for(small_instance, 60, seed)
        tr = train_direction(data, small_model, CFG)
        c = cadro_run(data, small_model, CFG, tr)
        s = saa_certified_run(data, small_model, CFG, tr)
        assert c.v_hat <= s.v_hat + 1e-12
        assert c.alpha_bound == s.v_hat == tr.alpha
        assert c.tau == tau(60)


def test_cadro_beta_near_one(small_instance, small_model):
    cfg = PipelineConfig(beta=1 - 1e-9)
    data = data_for(small_instance, 80, 1)
    tr = train_direction(data, small_model, cfg)
    emp = np.bincount(tr.calib.outcomes, minlength=small_model.n) / tr.calib.m
    assert tr.alpha == pytest.approx(emp @ tr.v, abs=1e-6)
    assert cadro_run(data, small_model, cfg, tr).v_hat <= tr.alpha + 1e-12


def test_constant_costs():
    model = AffineCostModel(np.zeros((4, 1)), [2.5] * 4, [0.0], [1.0])
    data = Dataset([0, 1, 2, 3, 0, 1], 4)
    assert saa_certified_run(data, model, CFG).v_hat == pytest.approx(2.5)
    assert cadro_run(data, model, CFG).v_hat == pytest.approx(2.5)


def test_saa_large_sample_converges(small_instance, small_model):
    cfg = PipelineConfig(beta=0.5)
    data = data_for(small_instance, 40_000, 3)
    res = saa_certified_run(data, small_model, cfg)
    truth = expected_cost(res.x_hat, small_instance.p_star, small_model)
    assert res.v_hat == pytest.approx(truth, rel=0.02)


def test_d_dro_radius_hooks(small_instance, small_model):
    data = data_for(small_instance, 40, 2)
    rob = robust_run(small_model, CFG).v_hat
    for kind in (Method.TV, Method.KL, Method.W):
        zero = d_dro_run(data, small_model, CFG, kind, small_instance.transport_costs(), radius=0.0)
        p_hat = ProbVector(np.bincount(data.outcomes, minlength=small_model.n) / data.m)
        if kind is Method.KL:
            p_hat = smoothed_empirical(data)
        _, saa = minimize_expected(small_model, p_hat, CFG.solver)
        assert zero.v_hat == pytest.approx(saa, rel=1e-6)
    tv = d_dro_run(data, small_model, CFG, Method.TV, radius=2.0)
    assert tv.v_hat == pytest.approx(rob, rel=1e-6)
    K = small_instance.transport_costs()
    w = d_dro_run(data, small_model, CFG, Method.W, K, radius=float(K.max()))
    assert w.v_hat == pytest.approx(rob, rel=1e-6)


def test_tv_desk_run_below_robust(city_instance, city_model):
    assert tv_radius(50, 25, 0.01) == pytest.approx(1.772, abs=1e-3)
    assert tv_radius(50, 19, 0.01) == 2 and tv_radius(50, 20, 0.01) < 2
    data = data_for(city_instance, 25, 0)
    rob = robust_run(city_model, CFG).v_hat
    assert d_dro_run(data, city_model, CFG, Method.TV).v_hat < rob


def test_w_requires_cost(small_instance, small_model):
    with pytest.raises(ValueError):
        d_dro_run(data_for(small_instance, 30, 0), small_model, CFG, Method.W)


def test_run_method_dispatch(small_instance, small_model):
    data = data_for(small_instance, 30, 0)
    for meth in Method:
        cfg = PipelineConfig(method=meth)
        res = run_method(data, small_model, cfg, small_instance.transport_costs())
        assert res.method == meth.value and math.isfinite(res.v_hat)
        assert small_model.is_feasible(res.x_hat)


def test_robust_ignores_data(small_model):
    assert robust_run(small_model, CFG).v_hat == robust_run(small_model, PipelineConfig(beta=0.3)).v_hat


def test_config_validation():
    for bad in ({"beta": 0.0}, {"beta": 1.0}, {"mu": 0.0}, {"nu": 1.5}):
        with pytest.raises(ValueError):
            PipelineConfig(**bad)
    with pytest.raises(ValueError):
        PipelineConfig(method="bogus")


def test_run_result_dict(small_instance, small_model):
    res = cadro_run(data_for(small_instance, 30, 0), small_model, CFG)
    d = res.to_dict()
    for key in ("v_hat", "x_hat", "tau", "method", "alpha_bound", "v_oos", "wall_time_ms"):
        assert key in d
