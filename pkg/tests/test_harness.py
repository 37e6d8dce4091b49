import csv
import io
import json

import numpy as np
import pytest

from ldpc_workbench import harness
from ldpc_workbench.degree_dist import EdgePerspective, save
from ldpc_workbench.errors import ConfigurationError
from ldpc_workbench.factor_graph import sample_regular, to_parity_check, write_alist


def cfg(**kw):
    base = dict(code="regular:3,6", n=200, family="bec", parameters=[0.3, 0.5], decoder="peel",
                trials=20, seed=1)
    base.update(kw)
    return harness.SimulationConfig(**base)


def test_parse_code_variants(tmp_path):
    assert harness.parse_code("regular:3,6") == ("regular", (3, 6))
    path = tmp_path / "d.json"
    save(EdgePerspective.from_degrees({2: 0.4, 3: 0.6}, {6: 1.0}), path)
    assert harness.parse_code(f"dist:{path}")[0] == "dist"
    apath = tmp_path / "c.alist"
    write_alist(to_parity_check(sample_regular(30, 3, 6, 0)), apath)
    assert harness.build_code(f"alist:{apath}", 30, 0).n_var == 30
    for bad in ("regular:3", "foo:1", f"dist:{tmp_path}/missing.json"):
        with pytest.raises(ConfigurationError):
            harness.parse_code(bad)


@pytest.mark.parametrize("kw", [dict(trials=0), dict(decoder="magic"), dict(family="bsc"),
                                dict(parameters=[1.5]), dict(decoder="gal-b", family="bsc",
                                                             parameters=[0.01])])
def test_config_validation(kw):
    with pytest.raises(ConfigurationError):
        cfg(**kw).validate()


def test_config_rejects_unknown_keys():
    with pytest.raises(ConfigurationError):
        harness.SimulationConfig.from_json('{"code": "regular:3,6", "colour": 1}')
    with pytest.raises(ConfigurationError):
        harness.SimulationConfig.from_json("{not json")


def test_sweep_is_deterministic_and_monotone():
    a = harness.run_ber_sweep(cfg())
    b = harness.run_ber_sweep(cfg())
    assert [r.key() for r in a] == [r.key() for r in b]
    assert a[0].ber <= a[1].ber
    assert a[1].ber > 0.1


def test_sweep_independent_of_worker_count():
    one = harness.run_ber_sweep(cfg(min_errors=50))
    two = harness.run_ber_sweep(cfg(min_errors=50, workers=2))
    assert [r.key() for r in one] == [r.key() for r in two]


def test_early_stop_by_batches():
    recs = harness.run_ber_sweep(cfg(parameters=[0.6], trials=100, min_errors=10))
    assert recs[0].trials == harness.BATCH
    full = harness.run_ber_sweep(cfg(parameters=[0.6], trials=30, min_errors=None))
    assert full[0].trials == 30


def test_random_codeword_and_fresh_codes():
    recs = harness.run_ber_sweep(cfg(family="bsc", parameters=[0.02], decoder="bp", trials=10,
                                     random_codeword=True, fresh_code=True))
    assert recs[0].ber < 0.02


def test_records_csv_round_trip():
    recs = harness.run_ber_sweep(cfg(trials=10))
    back = harness.records_from_csv(harness.records_to_csv(recs))
    assert [r.key() for r in back] == [r.key() for r in recs]
    lines = harness.records_to_jsonl(recs).splitlines()
    assert json.loads(lines[0])["decoder"] == "peel"


def test_trial_seeds_distinct():
    seeds = {harness.trial_seed(0, 1, i) for i in range(1000)}
    assert len(seeds) == 1000
    assert harness.trial_seed(5, 1, 2) == harness.trial_seed(5, 1, 2)
    assert 0 <= harness.trial_seed(7) < 2**63


def test_threshold_table_rows():
    text = harness.run_threshold_table([harness.ThresholdSpec("bec", "regular:3,6", "bec"),
                                        harness.ThresholdSpec("gal-a", "regular:4,8")])
    rows = list(csv.DictReader(io.StringIO(text)))
    assert rows[0]["code"] == "regular:3,6"
    assert abs(float(rows[0]["threshold"]) - 0.4294) < 1e-3
    assert abs(float(rows[1]["threshold"]) - 1 / 21) < 1e-4


def test_predicted_bit_erasure():
    ep = EdgePerspective.regular(3, 6)
    assert harness.predicted_bit_erasure(ep, 0.4, 0) == 0.4
    # one round: alpha * (1 - (1 - alpha)^5)^3
    assert harness.predicted_bit_erasure(ep, 0.4, 1) == pytest.approx(0.4 * (1 - 0.6**5) ** 3)


def test_concentration_small():
    rows = harness.run_concentration("regular:3,6", 0.4, 4, (200, 400), iterations=3, trials=3,
                                     seed=2, measure_girth=True)
    assert [r.n for r in rows] == [200, 400]
    assert all(len(r.per_code) == 4 for r in rows)
    assert all(r.girth_min >= 2 for r in rows)
    same = harness.run_concentration("regular:3,6", 0.4, 2, (200,), iterations=3, trials=3,
                                     seed=2, code_seeds=[9, 9])
    assert same[0].per_code[0] == same[0].per_code[1]
    assert "mean_ber" in harness.concentration_to_csv(rows)
