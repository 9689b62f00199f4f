"""Cost-model arithmetic pinned to hand-computed values.

The five benchmark settings and their timing constants are frozen here;
the verdict pattern (only the compressible flow setting favors AL) is the
headline the model has to reproduce.
"""

import pytest

from staplab.cost_analysis import (AlCost, CostModel, al_cost,
                                   al_reduces_cost, non_al_cost)
from staplab.errors import InvalidModel

# (efficiency gain, acquire s/pair, train s/pair, select s/round, D, B)
BENCHMARK_SETTINGS = {
    "burgers": CostModel(3.33, 0.087, 0.101, 60.0, 416, 104, 10),
    "kdv": CostModel(1.43, 0.654, 0.106, 50.0, 416, 104, 10),
    "ks": CostModel(1.11, 0.005, 0.116, 90.0, 832, 208, 10),
    "incompressible": CostModel(1.25, 0.077, 0.112, 224.0, 832, 208, 10),
    "compressible": CostModel(2.50, 1.760, 0.157, 264.0, 832, 208, 10),
}

EXPECTED_VERDICTS = {
    "burgers": False,
    "kdv": False,
    "ks": False,
    "incompressible": False,
    "compressible": True,
}


@pytest.mark.parametrize("name", sorted(BENCHMARK_SETTINGS))
def test_benchmark_verdicts(name):
    assert al_reduces_cost(BENCHMARK_SETTINGS[name]) == EXPECTED_VERDICTS[name]


def test_burgers_decomposition_by_hand():
    cm = BENCHMARK_SETTINGS["burgers"]
    plain = non_al_cost(cm)
    # 104 pairs/round * 10 rounds * 0.087 s
    assert plain.acquire == pytest.approx(90.48, abs=0.01)
    # one fit on 416 + 1040 pairs
    assert plain.train == pytest.approx(147.056, abs=0.001)
    assert plain.total == pytest.approx(plain.acquire + plain.train)

    al = al_cost(cm)
    assert cm.al_rounds == 3
    assert al.acquire == pytest.approx(1040 / 3.33 * 0.087, rel=1e-12)
    assert al.acquire == pytest.approx(27.17, abs=0.01)
    # fits at dataset sizes 416, 520, 624, 728
    assert al.train == pytest.approx((416 + 520 + 624 + 728) * 0.101,
                                     rel=1e-12)
    assert al.select == 3 * 60.0
    assert al.total == pytest.approx(al.acquire + al.train + al.select)
    assert al.total > plain.total


def test_al_round_counts():
    expected = {"burgers": 3, "kdv": 6, "ks": 9, "incompressible": 8,
                "compressible": 4}
    for name, rounds in expected.items():
        assert BENCHMARK_SETTINGS[name].al_rounds == rounds


def test_compressible_decomposition_by_hand():
    al = al_cost(BENCHMARK_SETTINGS["compressible"])
    assert al.acquire == pytest.approx(2080 / 2.5 * 1.76, rel=1e-12)
    assert al.train == pytest.approx(
        (832 + 1040 + 1248 + 1456 + 1664) * 0.157, rel=1e-12)
    assert al.select == 4 * 264.0
    assert al.total < non_al_cost(BENCHMARK_SETTINGS["compressible"]).total


def test_zero_rounds_costs_only_the_initial_fit():
    cm = CostModel(2.0, 1.0, 1.0, 5.0, 100, 10, 0)
    plain = non_al_cost(cm)
    assert plain.acquire == 0.0
    assert plain.train == 100.0
    al = al_cost(cm)
    assert al.acquire == 0.0
    assert al.train == 100.0  # the initial fit still happens
    assert al.select == 0.0


def test_unit_gain_still_pays_for_selection():
    # E = 1 means AL saves nothing on acquisition, so retraining plus
    # selection make it strictly worse whenever t_select > 0
    cm = CostModel(1.0, 0.5, 0.2, 3.0, 50, 10, 4)
    plain, al = non_al_cost(cm), al_cost(cm)
    assert al.acquire == pytest.approx(plain.acquire)
    assert al.select == 12.0
    assert al.total > plain.total
    assert not al_reduces_cost(cm)


def test_selection_time_monotonicity():
    def total_at(ts):
        return al_cost(CostModel(3.0, 0.1, 0.1, ts, 100, 20, 9)).total

    assert total_at(0.0) < total_at(10.0) < total_at(100.0)


def test_acquire_time_widens_the_gap():
    # expensive solvers are AL's best case: the saved acquisitions dominate
    def margin(ta):
        cm = CostModel(3.0, ta, 0.1, 10.0, 100, 20, 9)
        return non_al_cost(cm).total - al_cost(cm).total

    assert margin(0.01) < margin(1.0) < margin(100.0)


def test_cost_model_validation():
    with pytest.raises(InvalidModel):
        CostModel(0.0, 0.1, 0.1, 1.0, 10, 5, 3)
    with pytest.raises(InvalidModel):
        CostModel(2.0, -0.1, 0.1, 1.0, 10, 5, 3)
    with pytest.raises(InvalidModel):
        CostModel(2.0, 0.1, 0.1, 1.0, -10, 5, 3)
    with pytest.raises(InvalidModel):
        CostModel(2.0, 0.1, 0.1, 1.0, 10.5, 5, 3)


def test_cost_components_are_named_tuples():
    al = al_cost(BENCHMARK_SETTINGS["burgers"])
    assert isinstance(al, AlCost)
    assert al._fields == ("acquire", "train", "select", "total")
