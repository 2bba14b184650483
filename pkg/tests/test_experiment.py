import json
import math

import numpy as np
import pytest

from mtginf.errors import ConfigError, InvalidParameter
from mtginf.experiment import (PRESETS, load_spec, preset, read_records, rmse_vs_n, run, spec_from_dict,
                               summarize, write_records)

SMALL_G = {
    "scenario": "tiny",
    "rate": {"kind": "constant", "params": {"lambda0": 5.0}},
    "service": {"kind": "exponential", "params": {"rate": 1.0}},
    "n": 20, "replications": 6, "seed": 11,
    "estimator": {"target": "G", "x0": [1.0, 2.0], "h": 0.4},
}


def small(**changes):
    d = json.loads(json.dumps(SMALL_G))
    d.update(changes)
    return spec_from_dict(d)


def test_presets_parse():
    for name in PRESETS:
        spec = preset(name)
        assert spec.scenario == name
    assert preset("case1a").horizon == pytest.approx(3.5 + 15)
    assert preset("case2b").horizon == pytest.approx(30.0)
    with pytest.raises(ConfigError):
        preset("nope")


def test_rerun_is_byte_identical(tmp_path):
    spec = small()
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    write_records(run(spec)[0], a)
    write_records(run(spec)[0], b)
    assert a.read_bytes() == b.read_bytes()


def test_thread_count_does_not_change_results(tmp_path):
    spec = small()
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    write_records(run(spec, threads=1)[0], a)
    write_records(run(spec, threads=3)[0], b)
    assert a.read_bytes() == b.read_bytes()


def test_different_seed_changes_results():
    a = [r.estimate for r in run(small())[0]]
    b = [r.estimate for r in run(small(seed=12))[0]]
    assert a != b


def test_summary_recomputed_from_csv(tmp_path):
    records, summary = run(small())
    write_records(records, tmp_path / "r.csv", timing=True)
    back = read_records(tmp_path / "r.csv")
    assert all(r.seconds >= 0 for r in back)
    again = summarize("tiny", back)
    for s, t in zip(summary.targets, again.targets):
        assert s.target == t.target
        for key in ("mean", "sd", "rmse"):
            assert getattr(t, key) == pytest.approx(getattr(s, key), abs=1e-12)


def test_summary_values_match_records():
    records, summary = run(small())
    est = np.array([r.estimate for r in records if r.target == "G(1)"])
    tgt = summary.targets[0]
    assert tgt.target == "G(1)" and tgt.n_reps == 6
    assert tgt.sd == pytest.approx(est.std(ddof=1))
    assert tgt.rmse == pytest.approx(math.sqrt(np.mean((est - (1 - math.exp(-1))) ** 2)))


def test_single_replication_single_path():
    records, summary = run(small(n=1, replications=1))
    for r, t in zip(records, summary.targets):
        assert t.sd == 0.0
        assert t.rmse == pytest.approx(abs(r.estimate - r.truth))


def test_closed_mean_run():
    spec = preset("case2b", replications=50)
    records, summary = run(spec)
    assert summary.targets[0].target == "mu"
    assert all(float(r.estimate).is_integer() for r in records)
    assert all(r.truth == 1.0 and r.tuning == 25.0 for r in records)


def test_adaptive_run_records_bandwidth():
    spec = small(estimator={"target": "G", "x0": [1.0], "adaptive": {"h_min": 0.05, "alpha": 0.5}})
    records, _ = run(spec)
    assert all(0.05 <= r.tuning <= 1.0 for r in records)


def test_rmse_curve_singleton_and_order():
    curve = rmse_vs_n(small(), [10], replications=3)
    assert len(curve) == 1 and curve[0][0] == 10 and set(curve[0][1]) == {"G(1)", "G(2)"}
    with pytest.raises(InvalidParameter):
        rmse_vs_n(small(), [20, 10])


@pytest.mark.parametrize("patch, field", [
    ({"estimator": {"target": "G", "x0": [1.0], "h": -0.1}}, "config.estimator.h"),
    ({"estimator": {"target": "G", "x0": [1.0]}}, "config.estimator"),
    ({"estimator": {"target": "G", "x0": [1.0], "h": 0.2, "bogus": 1}}, "config.estimator.bogus"),
    ({"estimator": {"target": "Q"}}, "config.estimator.target"),
    ({"estimator": {"target": "mu", "b": 5.0}}, "config.estimator.h"),
    ({"n": 2.5}, "config.n"),
    ({"replications": 0}, "config.replications"),
    ({"rate": {"kind": "constant", "params": {"lambda0": -1.0}}}, "config.rate"),
    ({"service": "exp"}, "config.service"),
])
def test_config_errors_name_the_field(patch, field):
    with pytest.raises(ConfigError, match=field.replace(".", r"\.")):
        small(**patch)


def test_missing_scenario():
    d = dict(SMALL_G)
    del d["scenario"]
    with pytest.raises(ConfigError, match="config.scenario"):
        spec_from_dict(d)


def test_closed_requires_supported_rate():
    spec = small(estimator={"target": "mu", "b": 5.0, "closed": True},
                 rate={"kind": "linear", "params": {"lambda0": 1.0}})
    with pytest.raises(ConfigError, match="closed"):
        run(spec)


def test_json_syntax_error_location(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{\n  "scenario": "x",\n  "n": ,\n}')
    with pytest.raises(ConfigError, match=r"bad\.json:3:"):
        load_spec(bad)


def test_spec_dict_roundtrip(tmp_path):
    spec = preset("case1a")
    path = tmp_path / "c.json"
    path.write_text(json.dumps(spec.to_dict()))
    assert load_spec(path) == spec
