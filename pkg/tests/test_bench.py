import json

import pytest

from qarith.bench import SWEEPS, estimate_shor, generic_constant, ladder2_bounds, run_sweep
from qarith.circuit_ir import CircuitError


def test_ladder2_bounds_formula():
    assert ladder2_bounds(4) == {"count_ccx": 0, "depth": 6, "ancillas": 0}
    assert ladder2_bounds(64) == {"count_ccx": 156, "depth": 22, "ancillas": 52}


def test_generic_constant_alternates():
    assert generic_constant(4) == 0b0101
    assert generic_constant(7) == 0b0101010


@pytest.mark.parametrize("name", sorted(SWEEPS))
def test_small_sweep_shape(name):
    sizes = [4, 8, 16]
    result = run_sweep(name, sizes)
    assert [n for n, _, _ in result.points] == sizes
    assert set(result.fitted) == {"total_gates", "depth"}
    judged = [v for v in result.verdicts if v["model"] != "closed form"]
    assert {(v["n"], v["metric"]) for v in judged} == {(16, "total_gates"), (16, "depth")}
    for v in result.verdicts:
        assert v["status"] == ("PASS" if v["measured"] <= v["bound"] else "FAIL")
    doc = json.loads(result.to_json())
    assert doc["construction"] == name and len(doc["points"]) == 3


def test_sweep_bound_arithmetic():
    result = run_sweep("comparator", [8, 16, 32], calibration=2)
    slope, intercept = result.fitted["total_gates"]
    assert intercept == 0
    gates = {n: r.total_gates for n, _, r in result.points}
    assert slope == max(gates[8] / 8, gates[16] / 16)
    verdict = next(v for v in result.verdicts if v["metric"] == "total_gates")
    assert verdict["bound"] == pytest.approx(slope * 32 * 1.10, abs=1e-3)


@pytest.mark.parametrize("sizes,cal", [([16], 2), ([32, 16, 64], 2), ([16, 32], 2), ([16, 32, 64], 0)])
def test_sweep_rejects_bad_sizes(sizes, cal):
    with pytest.raises(CircuitError):
        run_sweep("comparator", sizes, cal)


def test_sweep_unknown_construction():
    with pytest.raises(CircuitError):
        run_sweep("teleporter", [4, 8, 16])


@pytest.mark.parametrize("n", [2, 3, 8, 17])
def test_shor_composition(n):
    est = estimate_shor(n)
    assert est.total_qubits == 2 * n + 2
    assert est.comparator_calls == 2 * n * 2 * n and est.adder_calls == n * 2 * n
    assert est.gate_total == est.comparator_calls * est.comparator.total_gates + est.adder_calls * est.adder.total_gates
    assert est.depth_total == est.comparator_calls * est.comparator.depth + est.adder_calls * est.adder.depth
    doc = json.loads(est.to_json())
    assert doc["assumptions"] and doc["total_qubits"] == 2 * n + 2


def test_shor_rejects_one_bit():
    with pytest.raises(CircuitError):
        estimate_shor(1)
