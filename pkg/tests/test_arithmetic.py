import pytest
from helpers import add, cq_less, modular, qq_less, v2_map, verify_map
from hypothesis import assume, given, settings, strategies as st

from qarith.ancilla import AncillaLedger
from qarith.arithmetic import (AdderSpec, ComparatorSpec, IncrementerSpec, ModularAdderSpec, build_controlled_cq_adder,
                               build_controlled_cq_comparator, build_controlled_incrementer,
                               build_controlled_qq_comparator, build_cq_adder, build_cq_comparator,
                               build_ctrl_promise_v2, build_incrementer, build_modular_adder,
                               build_promise_incrementer_linear, build_promise_incrementer_sqrt, build_qq_comparator,
                               controlled_v2_gates, cq_geq_gates, v2_free_gates, v2_helper_gates, v2_helper_need,
                               weak_promise_increment_gates, _sqrt_promise)
from qarith.circuit_ir import Circuit, CircuitError, RegisterMap, x
from qarith.rev_sim import PermutationOracle, PromiseContract, check_equivalence, check_promise, simulate

slow = settings(max_examples=25, deadline=None)


def v2_circuit(gates, n: int, extra: int = 0) -> Circuit:
    return Circuit(2 * n + 1 + extra, tuple(gates))


def v2_oracle(n: int) -> PermutationOracle:
    return v2_map(n)


# --- V2 ---------------------------------------------------------------------------------


@pytest.mark.parametrize("n", range(1, 12))
def test_v2_free(n):
    q = list(range(2 * n + 1))
    c = v2_circuit(v2_free_gates(q[0::2], q[1::2]), n)
    assert check_equivalence(c, v2_oracle(n)).passed


@pytest.mark.parametrize("n,h", [(k, h) for k in range(2, 10) for h in range(5)])
def test_v2_helpers_are_restored(n, h):
    q = list(range(2 * n + 1))
    helpers = list(range(2 * n + 1, 2 * n + 1 + h))
    c = v2_circuit(v2_helper_gates(q[0::2], q[1::2], helpers), n, h)
    assert check_equivalence(c, v2_oracle(n), {q: 0 for q in helpers}).passed


def test_v2_helper_need_is_sublinear():
    assert v2_helper_need(1) == 0
    assert v2_helper_need(400) <= 2 * 20 + 4


@pytest.mark.parametrize("n,k", [(n, k) for n in range(2, 8) for k in (1, 2)])
def test_controlled_v2(n, k):
    ctr = list(range(k))
    q = list(range(k, k + 2 * n + 1))
    c = Circuit(k + 2 * n + 1, tuple(controlled_v2_gates(ctr, q[0::2], q[1::2])))
    assert check_equivalence(c, v2_map(n, k)).passed


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_ctrl_promise_v2(n):
    q = list(range(1, 2 * n + 2))
    p = list(range(2 * n + 2, 2 * n + 2 + _sqrt_promise(n)))
    c = build_ctrl_promise_v2(0, p, q)
    assert check_promise(c, PromiseContract(p, [0, *q], v2_map(n, 1), "strong")).passed


def test_ctrl_promise_v2_argument_checks():
    with pytest.raises(CircuitError):
        build_ctrl_promise_v2(0, [5, 6], [1, 2, 3, 4])
    with pytest.raises(CircuitError):
        build_ctrl_promise_v2(0, [5], [1, 2, 3])


# --- comparators ----------------------------------------------------------------------------


@pytest.mark.parametrize("n", range(1, 7))
def test_qq_comparator(n):
    c = build_qq_comparator(ComparatorSpec(n))
    assert c.num_qubits == 2 * n + 1 and c.report().qubits_dirty == 0
    assert qq_less(c).passed


def test_qq_comparator_equal_operands_leave_z():
    c = build_qq_comparator(ComparatorSpec(3))
    for a in range(8):
        v = a | a << 3
        assert simulate(c, v) == v


@slow
@given(st.integers(2, 5), st.integers(1, 3))
def test_controlled_qq_comparator(n, k):
    assert qq_less(build_controlled_qq_comparator(ComparatorSpec(n, controls=k)), k).passed


@slow
@given(st.integers(1, 9), st.data())
def test_cq_comparator(n, data):
    const = data.draw(st.integers(0, (1 << n) - 1))
    assert cq_less(build_cq_comparator(ComparatorSpec(n, "classical_quantum", const)), const).passed


@slow
@given(st.integers(1, 5), st.integers(1, 3), st.data())
def test_controlled_cq_comparator(n, k, data):
    const = data.draw(st.integers(0, (1 << n) - 1))
    c = build_controlled_cq_comparator(ComparatorSpec(n, "classical_quantum", const, k))
    assert cq_less(c, const, k).passed


def test_cq_comparator_extremes():
    n = 4
    top = build_cq_comparator(ComparatorSpec(n, "classical_quantum", 15))
    assert all(simulate(top, v) == v for v in range(1 << (n + 2)))
    zero = build_cq_comparator(ComparatorSpec(n, "classical_quantum", 0))
    for a in range(16):
        assert simulate(zero, a) >> n & 1 == (a != 0)


@pytest.mark.parametrize("n,t", [(3, 0), (3, 5), (3, 8), (1, 1)])
def test_cq_geq(n, t):
    a = list(range(n))
    c = Circuit(n + 2, tuple(cq_geq_gates(t, a, n, n + 1)), RegisterMap.build(n + 2, [("a", "data", a),
                                                                                        ("z", "target", [n])]))
    assert verify_map(c, lambda r: {"z": r["z"] ^ (r["a"] >= t)}, "a", "z").passed


@pytest.mark.parametrize("spec", [
    lambda: ComparatorSpec(0),
    lambda: ComparatorSpec(3, "classical_quantum"),
    lambda: ComparatorSpec(3, constant=2),
    lambda: ComparatorSpec(3, "classical_quantum", 8),
    lambda: ComparatorSpec(3, "sideways"),
])
def test_comparator_spec_validation(spec):
    with pytest.raises(CircuitError):
        spec()


def test_controlled_qq_comparator_needs_two_bits():
    with pytest.raises(CircuitError):
        build_controlled_qq_comparator(ComparatorSpec(1, controls=1))


# --- incrementers ----------------------------------------------------------------------------


@pytest.mark.parametrize("n", range(1, 17))
@pytest.mark.parametrize("direction", ["increment", "decrement"])
def test_incrementer(n, direction):
    step = 1 if direction == "increment" else -1
    assert add(build_incrementer(IncrementerSpec(n, direction=direction)), step).passed


def test_incrementer_examples():
    c = build_incrementer(IncrementerSpec(3))
    assert simulate(c, 7) == 0 and simulate(c, 7 | 8) == 8
    assert build_incrementer(IncrementerSpec(1)).gates == (x(0),)


@slow
@given(st.integers(1, 7), st.integers(1, 3))
def test_controlled_incrementer(n, k):
    c = build_controlled_incrementer(IncrementerSpec(n, k))
    assert add(c, 1, k).passed
    full = (1 << k) - 1
    top = ((1 << n) - 1) << k
    assert simulate(c, full | top) == full


def test_incrementer_dirty_wire_follows_lowest_index():
    ledger = AncillaLedger(9, dirty=[8])
    assert build_incrementer(IncrementerSpec(8), ledger).registers["dirty"] == (8,)
    assert ledger.high_water_dirty == 1 and ledger.high_water_borrowed == 0
    # an idle data qubit below the pool is taken first and counted as borrowed
    ledger = AncillaLedger(10, dirty=[9])
    assert build_incrementer(IncrementerSpec(8), ledger).registers["dirty"] == (8,)
    assert ledger.high_water_borrowed == 1


@pytest.mark.parametrize("n", range(2, 9))
def test_weak_promise_incrementer(n):
    p = _sqrt_promise(n) - 1
    t = list(range(1, n + 1))
    promise = list(range(n + 1, n + 1 + p))
    c = Circuit(n + 1 + p, tuple(weak_promise_increment_gates(0, t, promise)))

    def fn(v):
        return v if not v & 1 else (v & 1) | ((((v >> 1) + 1) % (1 << n)) << 1)

    assert check_promise(c, PromiseContract(promise, [0, *t], PermutationOracle(n + 1, fn), "weak")).passed


def _inc_oracle(k: int, n: int) -> PermutationOracle:
    full = (1 << k) - 1
    return PermutationOracle(k + n, lambda v: (v & full) | ((((v >> k) + ((v & full) == full)) % (1 << n)) << k))


@pytest.mark.parametrize("n,k", [(n, k) for n in range(1, 6) for k in range(4)])
def test_promise_incrementer_linear(n, k):
    ctr, t = list(range(k)), list(range(k, k + n))
    p = list(range(k + n, k + 2 * n - 1))
    width = k + 2 * n - 1 + (1 if n == 1 and k >= 3 else 0)
    c = build_promise_incrementer_linear(k, ctr, t, p, AncillaLedger(width))
    assert check_promise(c, PromiseContract(p, [*ctr, *t], _inc_oracle(k, n), "strong")).passed


@pytest.mark.parametrize("n", range(1, 9))
def test_promise_incrementer_sqrt(n):
    t = list(range(1, n + 1))
    p = list(range(n + 1, n + 1 + _sqrt_promise(n)))
    c = build_promise_incrementer_sqrt(0, t, p)
    assert check_promise(c, PromiseContract(p, [0, *t], _inc_oracle(1, n), "strong")).passed


def test_promise_incrementer_size_checks():
    with pytest.raises(CircuitError):
        build_promise_incrementer_linear(0, [], [0, 1, 2], [3])
    with pytest.raises(CircuitError):
        build_promise_incrementer_sqrt(0, [1, 2, 3, 4], [5, 6])


# --- adders ---------------------------------------------------------------------------------


@slow
@given(st.integers(1, 10), st.data())
def test_cq_adder(n, data):
    const = data.draw(st.integers(0, (1 << n) - 1))
    assert add(build_cq_adder(AdderSpec(n, const)), const).passed


@slow
@given(st.integers(1, 5), st.integers(1, 3), st.data())
def test_controlled_cq_adder(n, k, data):
    const = data.draw(st.integers(0, (1 << n) - 1))
    assert add(build_controlled_cq_adder(AdderSpec(n, const, k)), const, k).passed


def test_adder_examples():
    c = build_cq_adder(AdderSpec(4, 13))
    assert simulate(c, 7) == 4 and simulate(c, 7 | 16) == 4 | 16
    assert build_cq_adder(AdderSpec(4, 0)).gates == ()
    assert build_cq_adder(AdderSpec(1, 1)).gates == (x(0),)
    assert build_cq_adder(AdderSpec(1, 0)).gates == ()
    ctrl = build_controlled_cq_adder(AdderSpec(3, 5, 2))
    assert all(simulate(ctrl, 0b01 | v << 2) == 0b01 | v << 2 for v in range(16))


def test_adder_spec_validation():
    with pytest.raises(CircuitError):
        AdderSpec(3, 8)
    with pytest.raises(CircuitError):
        AdderSpec(0, 0)


# --- modular adder --------------------------------------------------------------------------


@slow
@given(st.integers(2, 6), st.integers(0, 2), st.data())
def test_modular_adder(n, k, data):
    modulus = data.draw(st.integers(2, (1 << n) - 1))
    a = data.draw(st.integers(0, modulus - 1))
    assume(k == 0 or n <= 4)
    assert modular(build_modular_adder(ModularAdderSpec(n, a, modulus), k), a, modulus, n, k).passed


def test_modular_adder_example():
    c = build_modular_adder(ModularAdderSpec(4, 9, 13))
    for b in range(13):
        out = simulate(c, b)
        assert out == (9 + b) % 13
    assert build_modular_adder(ModularAdderSpec(4, 0, 13)).gates == ()
    rep = c.report()
    assert (rep.qubits_clean, rep.qubits_dirty) == (1, 1)


@pytest.mark.parametrize("spec", [lambda: ModularAdderSpec(3, 0, 8), lambda: ModularAdderSpec(3, 5, 5),
                                  lambda: ModularAdderSpec(0, 0, 1)])
def test_modular_spec_validation(spec):
    with pytest.raises(CircuitError):
        spec()
