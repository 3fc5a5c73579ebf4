import json
import math
import pathlib

import pytest

import aoi

CONFIGS = pathlib.Path(__file__).resolve().parents[2] / "configs"


def test_version():
    assert aoi.__version__ == "0.1.0"


def test_cost_functions():
    f = aoi.Cost.power(2.0, 2.0)
    assert f(3) == 18.0
    assert aoi.Cost.parse("kind=linear weight=13")(2) == 26.0
    assert aoi.Cost.table([1, 2, 7])(10) == 7.0
    assert aoi.Cost.table([1, 2, 7]).is_bounded()


def test_reliable_index_and_threshold():
    f = aoi.Cost.linear(1.0)
    # h f(h+1) - sum_{j<=h} f(j) = h (h + 1) / 2 for linear f
    assert [aoi.whittle_index(f, 1.0, h) for h in range(1, 5)] == [1.0, 3.0, 6.0, 10.0]
    assert aoi.optimal_threshold(f, 1.0, 4.0) == 3
    assert aoi.optimal_threshold(aoi.Cost.table([0, 1]), 1.0, 5.0) is None


def test_unreliable_index_and_value_iteration():
    f = aoi.Cost.power(1.0, 2.0)
    assert aoi.whittle_index(f, 0.8, 3) == pytest.approx(32.9, rel=1e-12)
    sol = aoi.solve_decoupled(f, 0.7, 40.0)
    assert sol["threshold"] == 4
    assert sol["average_cost"] == pytest.approx(aoi.threshold_average_cost(f, 0.7, 40.0, 4), rel=1e-8)


def test_simulation_and_cycles():
    three = aoi.Cost.exponential(3.0)
    system = aoi.System([(three, 1.0), (three, 1.0)])
    rr = aoi.simulate(system, "round_robin", horizon=500)
    assert rr.mean_cost == pytest.approx((6 + 12 * 499) / 500, rel=1e-12)
    cycle = aoi.detect_cycle(system, "round_robin")
    assert len(cycle["states"]) == 2 and cycle["average_cost"] == 12.0

    a = aoi.System([(aoi.Cost.linear(13.0), 1.0), (aoi.Cost.power(1.0, 2.0), 1.0)])
    assert aoi.detect_cycle(a)["average_cost"] == pytest.approx(22.0)


def test_simulation_is_reproducible_across_threads():
    system = aoi.System([(aoi.Cost.linear(13.0), 0.8), (aoi.Cost.power(1.0, 2.0), 0.6)])
    one = aoi.simulate(system, "whittle", horizon=200, runs=64, seed=7, threads=1)
    four = aoi.simulate(system, "whittle", horizon=200, runs=64, seed=7, threads=4)
    assert one.mean_cost == four.mean_cost and one.std_error == four.std_error
    assert one.std_error > 0


def test_dp_and_strong_switch():
    system = aoi.System([(aoi.Cost.linear(13.0), 1.0), (aoi.Cost.power(1.0, 2.0), 1.0)])
    sol = aoi.solve_dp(system, horizon=500)
    assert sol.optimal_average_cost == pytest.approx(21.95, rel=0.01)
    cycle = aoi.dp_cycle(sol, system)
    assert cycle["average_cost"] == pytest.approx(22.0, rel=1e-9)
    pairs = list(zip(map(tuple, cycle["states"]), cycle["actions"]))
    assert aoi.check_strong_switch(pairs) == []
    bad = aoi.check_strong_switch([((1, 4), 0), ((2, 3), 1)])
    assert len(bad) == 1 and bad[0]["implied_action"] == 0


def test_certificate():
    cert = aoi.certify_theorem3(aoi.Cost.linear(13.0), aoi.Cost.power(1.0, 2.0))
    assert cert["best_cost"] == pytest.approx(cert["whittle_cycle"]["average_cost"])


def test_errors_carry_their_kind():
    with pytest.raises(aoi.AoiError) as info:
        aoi.System([(aoi.Cost.exponential(3.0), 0.5)])
    assert info.value.kind == "admissibility"
    with pytest.raises(aoi.AoiError) as info:
        aoi.Cost.linear(-1.0)
    assert info.value.kind == "domain"


def test_run_config(tmp_path):
    path = CONFIGS / "table1_A1.yaml"
    result = aoi.run_config(str(path), out_dir=str(tmp_path))
    assert result["setting"] == "table1_A1"
    assert result["provenance"]["config_hash"] == aoi.config_hash(str(path))
    by_policy = {p["policy"]: p for p in result["policies"]}
    assert by_policy["whittle"]["cycle"]["average_cost"] == pytest.approx(22.0)
    assert math.isclose(by_policy["dp"]["mean_cost"], 21.974, rel_tol=1e-3)
    assert json.loads((tmp_path / "table1_A1.json").read_text()) == result
    assert (tmp_path / "table1_A1.csv").read_text().startswith("setting,policy,mean_cost")
