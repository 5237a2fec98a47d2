import json
import math

import pytest

import perish


def test_power_law_round_trip():
    sizes = [5e3, 1e4, 2e4, 4e4, 8e4, 1.6e5]
    fit = perish.fit_power_law(sizes, [2.0 * n**-0.3 + 1.0 for n in sizes])
    assert fit["b"] == pytest.approx(0.3, rel=1e-3)
    assert perish.invert_curve(fit["a"], fit["b"], fit["c"], 2.0 * 3e4**-0.3 + 1.0) == pytest.approx(3e4, rel=1e-6)


def test_eighty_percent_example():
    a, b, c = 40.0, 0.25, 2.5
    loss = a * 40e6**-b + c
    assert perish.effectiveness(a, b, c, 50e6, loss) == pytest.approx(0.8, abs=1e-6)


def test_saturation_raises():
    with pytest.raises(perish.SaturationError):
        perish.invert_curve(1.0, 0.5, 2.0, 1.5)


def test_decay_and_half_life():
    t = [k / 12 for k in range(1, 25)]
    fit = perish.fit_decay(t, [math.exp(-0.151 * x) for x in t])
    assert fit["mu"] == pytest.approx(0.151, abs=1e-12)
    assert fit["half_life"] == "4.59"
    assert perish.half_life(0.004103) == "100> (168.9)"


def test_pairwise_and_forms():
    t = [k / 12 for k in range(25)]
    r = perish.pairwise(t, [math.exp(-0.2 * x) for x in t], t, [math.exp(-0.1 * x) for x in t])
    assert r["beta"] == pytest.approx(0.1, abs=1e-9)
    assert r["band"] == 3
    ts = [0.5 * k for k in range(11)]
    assert perish.functional_form(ts, [(1 + x) ** -1.0 for x in ts], clip=False) == "power_law"


def test_theory():
    expo = {"model": "pure_exponential", "mu": 0.5}
    assert perish.equivalent_size(expo, 1000.0, 2.0) == pytest.approx(1000 * math.exp(-1.0))
    drift = {"model": "drift_shift", "a": 2.0, "b": 0.3, "d_scale": 0.5}
    r = perish.greedy_offload(drift, 1e5, 2.0, [0.5, 0.5])
    assert len(r["steps"]) == 1
    assert r["final_equivalent_size"] > r["steps"][0]["new_equivalent_size"] - 1e-6
    assert perish.entropy_rate([[0.5, 0.5], [0.5, 0.5]]) == pytest.approx(math.log(2))


def test_backend_result_validator():
    job = {"topic": "t", "train_period": "2020-01", "subset_size": 1000, "backend_id": "x", "seed": 0}
    good = {"job": job, "dev_loss": 3.1,
            "results": [{"test_period": "2020-01", "loss_nats_per_token": 3.2, "token_count": 100}]}
    ok, reason = perish.validate_backend_result(json.dumps(job), json.dumps(good), ["2020-01"])
    assert ok, reason
    bad = dict(good, results=[{"test_period": "2020-01", "token_count": 100}])
    ok, reason = perish.validate_backend_result(json.dumps(job), json.dumps(bad), ["2020-01"])
    assert not ok and reason
    ok, _ = perish.validate_backend_result(json.dumps(job), "{not json", ["2020-01"])
    assert not ok


def test_config_hash():
    cfg = perish.default_config()
    h = perish.config_hash(cfg)
    assert len(h) == 16
    with pytest.raises(perish.DataError):
        perish.config_hash(json.dumps({"bogus": 1}))
