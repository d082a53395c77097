import pytest
from helpers import verify_map
from hypothesis import given, settings, strategies as st

from qarith.ancilla import AncillaLedger
from qarith.circuit_ir import Circuit, CircuitError, RegisterMap, ccx, cx, x
from qarith.promise import (GateTemplate, add_controls_parallel, build_conditionally_clean,
                            build_controlled_qq_adder, build_toggle_detect_clean, build_toggle_detect_dirty,
                            control_gates, gate_template, trade_ancillas_for_controls)
from qarith.rev_sim import simulate


def toggled(k: int, width: int = 1):
    full = (1 << k) - 1
    return lambda r: {"t": r["t"] ^ (((1 << width) - 1) * (r["c"] == full))}


def _named(c, controls, target):
    named = [("c", "control", controls), ("t", "target", target)]
    named += [(e.name, e.role, e.qubits) for e in c.registers.entries
              if e.role in ("clean_ancilla", "dirty_ancilla") and e.qubits]
    return Circuit(c.num_qubits, c.gates, RegisterMap.build(c.num_qubits, named))


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_toggle_clean(k):
    c = build_toggle_detect_clean(k, list(range(k)), gate_template([x(k)]), AncillaLedger(k + 3, clean=[k + 1]))
    assert verify_map(_named(c, list(range(k)), [k]), toggled(k), "c", "t", fixed={k + 1: 0}).passed


@pytest.mark.parametrize("k", [2, 3])
def test_toggle_dirty_involutory(k):
    c = build_toggle_detect_dirty(k, list(range(k)), gate_template([x(k)]), AncillaLedger(k + 2))
    assert c.report().qubits_dirty == 1
    assert verify_map(_named(c, list(range(k)), [k]), toggled(k), "c", "t").passed


def test_toggle_dirty_increment_via_flip_set():
    inc = [cx(3, 4), x(3)]
    template = GateTemplate((3, 4), lambda _h: list(inc), flip=(3, 4))
    c = build_toggle_detect_dirty(3, [0, 1, 2], template, AncillaLedger(6))
    assert verify_map(_named(c, [0, 1, 2], [3, 4]), lambda r: {"t": r["t"] + (r["c"] == 7)}, "c", "t").passed


def test_toggle_dirty_rejects_plain_non_involution():
    inc = GateTemplate((2, 3), lambda _h: [cx(2, 3), x(2)])
    with pytest.raises(CircuitError):
        build_toggle_detect_dirty(2, [0, 1], inc, AncillaLedger(5))


def test_conditionally_clean():
    c = build_conditionally_clean(4, [0, 1, 2, 3], gate_template([x(4)]), AncillaLedger(6, clean=[5]))
    assert verify_map(_named(c, [0, 1, 2, 3], [4]), toggled(4), "c", "t", fixed={5: 0}).passed
    d = build_conditionally_clean(4, [0, 1, 2, 3], gate_template([x(4)]), AncillaLedger(6), dirty=True)
    assert verify_map(_named(d, [0, 1, 2, 3], [4]), toggled(4), "c", "t").passed


def test_conditionally_clean_uses_controls_as_helpers():
    # U flips t only while its helper reads zero
    template = GateTemplate((2,), lambda h: [x(h[0]), cx(h[0], 2), x(h[0])], clean=1, involutory=True)
    c = build_conditionally_clean(2, [0, 1], template, AncillaLedger(4, clean=[3]))
    assert verify_map(_named(c, [0, 1], [2]), toggled(2), "c", "t", fixed={3: 0}).passed


def test_conditionally_clean_dirty_needs_strong_involution():
    weak = GateTemplate((2,), lambda _h: [x(2)], involutory=True, strong=False)
    with pytest.raises(CircuitError):
        build_conditionally_clean(2, [0, 1], weak, AncillaLedger(4), dirty=True)


@pytest.mark.parametrize("k", [0, 1, 2, 3])
def test_add_controls_parallel_triple_flip(k):
    layer = [[x(k)], [x(k + 1)], [x(k + 2)]]
    c = add_controls_parallel(k, list(range(k)), layer, num_qubits=k + 3)
    if k == 0:
        assert c.gates == (x(0), x(1), x(2))
    fn = toggled(k, 3) if k else (lambda r: {"t": r["t"] ^ 7})
    assert verify_map(_named(c, list(range(k)), [k, k + 1, k + 2]), fn, "c", "t").passed


def test_add_controls_parallel_mixed_layer():
    c = add_controls_parallel(3, [0, 1, 2], [[cx(3, 4)], [ccx(5, 6, 7)]], num_qubits=8)

    def fn(r):
        v, on = r["t"], r["c"] == 7
        return {"t": v ^ (on * (v & 1) * 2) ^ (on * ((v >> 2) & (v >> 3) & 1) * 16)}

    assert verify_map(_named(c, [0, 1, 2], [3, 4, 5, 6, 7]), fn, "c", "t").passed


def test_add_controls_parallel_rejects_overlap_and_non_involution():
    with pytest.raises(CircuitError):
        add_controls_parallel(1, [0], [[x(1)], [cx(1, 2)]], num_qubits=3)
    with pytest.raises(CircuitError):
        add_controls_parallel(1, [0], [[cx(1, 2), x(1)]], num_qubits=3)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 2), st.permutations([1, 2, 3, 4])), min_size=1, max_size=6),
       st.integers(0, 63))
def test_control_gates_adds_a_control(spec, state):
    gates = [[x, cx, ccx][a](*qs[:a + 1]) for a, qs in spec]
    controlled = control_gates(gates, 0, [5])
    a = simulate(Circuit(6, tuple(controlled)), state)
    b = simulate(Circuit(6, tuple(gates)), state) if state & 1 else state
    assert a == b


def test_trade_k0_is_plain_conjugation():
    V = GateTemplate((0,), lambda h: [cx(0, h[0])], clean=1, involutory=True)
    U = GateTemplate((1,), lambda h: [cx(h[0], 1)], clean=1, involutory=True)
    res = trade_ancillas_for_controls(0, [], V, U, 1, AncillaLedger(3, clean=[2]))
    assert res.circuit.gates == (cx(0, 2), cx(2, 1), cx(0, 2))
    assert res.clean_used == 1


def test_trade_clean_bound_example():
    m, k = 5, 3
    V = GateTemplate(tuple(range(3, 8)), lambda h: [cx(3 + i, h[i]) for i in range(m)], clean=m, involutory=True)
    U = GateTemplate((8,), lambda h: [ccx(h[0], h[4], 8)], clean=m, involutory=True)
    ledger = AncillaLedger(15, clean=range(9, 15))
    res = trade_ancillas_for_controls(k, [0, 1, 2], V, U, m, ledger)
    assert res.clean_used <= 3


def test_trade_argument_checks():
    V = gate_template([x(1)])
    with pytest.raises(CircuitError):
        trade_ancillas_for_controls(2, [0], V, V, 0, AncillaLedger(3))
    big = GateTemplate((1,), lambda h: [], clean=3)
    with pytest.raises(CircuitError):
        trade_ancillas_for_controls(1, [0], big, V, 1, AncillaLedger(4))


@pytest.mark.parametrize("n,k", [(1, 0), (2, 1), (3, 2), (4, 2), (3, 3)])
def test_controlled_qq_adder(n, k):
    ctr = list(range(k))
    a = list(range(k, k + n))
    b = list(range(k + n, k + 2 * n))
    z = k + 2 * n
    cl = list(range(z + 1, z + 1 + max(1, n - k + 1)))
    c = build_controlled_qq_adder(k, ctr, a, b, z, AncillaLedger(z + 1 + len(cl), clean=cl))
    full = (1 << k) - 1

    def fn(r):
        on = (r["controls"] == full) if k else 1
        s = r["b"] + on * r["a"]
        return {"b": s, "z": r["z"] ^ (s >> n)}

    assert verify_map(c, fn, "controls", "a", "b", "z", fixed={q: 0 for q in cl}).passed


def test_controlled_adder_examples():
    c = build_controlled_qq_adder(0, [], [0, 1, 2], [3, 4, 5], 6, AncillaLedger(8, clean=[7]))
    out = simulate(c, 3 | 5 << 3)
    assert (out >> 3) & 7 == 0 and out >> 6 & 1 == 1
    c2 = build_controlled_qq_adder(2, [0, 1], [2, 3], [4, 5], 6, AncillaLedger(8, clean=[7]))
    v = 0b01 | 3 << 2 | 1 << 4
    assert simulate(c2, v) == v
