"""Named constructions: how to build each one from plain parameters and what it should compute."""
from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass, field

import numpy as np

from .ancilla import AncillaLedger
from .arithmetic import (AdderSpec, ComparatorSpec, IncrementerSpec, ModularAdderSpec, build_cq_adder,
                         build_cq_comparator, build_controlled_cq_comparator, build_controlled_qq_comparator,
                         build_incrementer, build_modular_adder, build_qq_comparator, v2_free_gates)
from .circuit_ir import Circuit, CircuitError, RegisterMap
from .primitives import (build_fanout1, build_fanout2, build_ladder1, build_ladderk, build_mcx,
                         ladder_ancilla_count)
from .rev_sim import PermutationOracle, Verdict, check_equivalence, register_oracle


@dataclass(frozen=True)
class Params:
    n: int | None = None
    k: int = 0
    constant: int | None = None
    modulus: int | None = None
    mode: str = "qq"
    direction: str = "increment"


def _require(p: Params, *names: str) -> None:
    for name in names:
        if getattr(p, name) is None:
            raise CircuitError(f"parameter {name!r} is required")
    if p.n is not None and p.n < 1:
        raise CircuitError("n must be at least 1")
    if p.k < 0:
        raise CircuitError("k must be non-negative")


def _all_set(v, k: int):
    return v == (1 << k) - 1


# --- builders ------------------------------------------------------------------------


def _mcx(p: Params) -> Circuit:
    if p.k < 1:
        raise CircuitError("mcx needs k >= 1")
    ledger = AncillaLedger(p.k + 2, dirty=[p.k + 1])
    return build_mcx(p.k, list(range(p.k)), p.k, ledger)


def _fanout1(p: Params) -> Circuit:
    _require(p, "n")
    return build_fanout1(0, list(range(1, p.n + 1)))


def _fanout2(p: Params) -> Circuit:
    _require(p, "n")
    width = 3 * p.n + 1
    ledger = AncillaLedger(width + 1, dirty=[width]) if p.n == 1 else None
    return build_fanout2(0, [(1 + 3 * i, 2 + 3 * i, 3 + 3 * i) for i in range(p.n)], ledger, width)


def _ladder1(p: Params) -> Circuit:
    _require(p, "n")
    return build_ladder1(list(range(p.n + 1)))


def _ladderk(p: Params, order: int | None = None) -> Circuit:
    _require(p, "n")
    k = order or p.k
    if k < 1:
        raise CircuitError("ladderk needs k >= 1")
    width = k * p.n + 1
    anc = ladder_ancilla_count(p.n) if k > 1 else 0
    spare = 1 if k >= 3 and p.n <= 1 else 0
    ledger = AncillaLedger(width + anc + spare, clean=range(width, width + anc),
                           dirty=range(width + anc, width + anc + spare))
    return build_ladderk(k, list(range(width)), ledger)


def _v2(p: Params) -> Circuit:
    _require(p, "n")
    q = list(range(2 * p.n + 1))
    return Circuit(len(q), tuple(v2_free_gates(q[0::2], q[1::2])), RegisterMap.build(len(q), [("v2", "data", q)]))


def _comparator(p: Params) -> Circuit:
    _require(p, "n")
    if p.mode == "cq":
        return _cq_comparator(p)
    if p.mode != "qq":
        raise CircuitError(f"mode must be qq or cq, not {p.mode!r}")
    spec = ComparatorSpec(p.n, controls=p.k)
    return build_controlled_qq_comparator(spec) if p.k else build_qq_comparator(spec)


def _cq_comparator(p: Params) -> Circuit:
    _require(p, "n", "constant")
    spec = ComparatorSpec(p.n, "classical_quantum", p.constant, p.k)
    return build_controlled_cq_comparator(spec) if p.k else build_cq_comparator(spec)


def _incrementer(p: Params) -> Circuit:
    _require(p, "n")
    return build_incrementer(IncrementerSpec(p.n, p.k, p.direction))


def _cq_adder(p: Params) -> Circuit:
    _require(p, "n", "constant")
    return build_cq_adder(AdderSpec(p.n, p.constant, p.k))


def _modular_adder(p: Params) -> Circuit:
    _require(p, "n", "constant", "modulus")
    return build_modular_adder(ModularAdderSpec(p.n, p.constant, p.modulus), p.k)


# --- oracles -------------------------------------------------------------------------


def _regs(c: Circuit, *names: str) -> dict[str, tuple[int, ...]]:
    return {name: c.registers[name] for name in names if name in c.registers}


def _ladder_oracle(c: Circuit, order: int, gates: int) -> PermutationOracle:
    q = c.registers["ladder"]

    def fn(r):
        v = r["ladder"]
        bit = lambda i: (v >> i) & 1  # noqa: E731
        out = v
        # top-down: every gate sees the original values
        for i in range(1, gates + 1):
            ctrl = bit(order * (i - 1))
            for j in range(1, order):
                ctrl = ctrl & bit(order * (i - 1) + j)
            out = out ^ (ctrl << (order * i))
        return {"ladder": out}

    return register_oracle(c.num_qubits, {"ladder": q}, fn)


def _v2_oracle(c: Circuit, n: int) -> PermutationOracle:
    def fn(r):
        v = r["v2"]
        acc = v & 0
        for j in range(n):
            term = (v >> (2 * j)) & 1
            for i in range(j + 1, n + 1):
                term = term & (v >> (2 * i - 1))
            acc = acc ^ (term & 1)
        return {"v2": v ^ (acc << (2 * n))}

    return register_oracle(c.num_qubits, {"v2": c.registers["v2"]}, fn)


def oracle_for(name: str, p: Params, c: Circuit) -> tuple[PermutationOracle, dict[int, int], Callable | None]:
    """(oracle, fixed bits, input filter) for checking a built construction."""
    k = p.k
    if name == "mcx":
        regs = _regs(c, "controls", "target")
        return register_oracle(c.num_qubits, regs, lambda r: {"target": r["target"] ^ _all_set(r["controls"], k)}), {}, None
    if name == "fanout1":
        n = p.n
        regs = _regs(c, "control", "targets")
        return register_oracle(c.num_qubits, regs,
                               lambda r: {"targets": r["targets"] ^ (r["control"] * ((1 << n) - 1))}), {}, None
    if name == "fanout2":
        regs = _regs(c, "control", "x0", "x1", "targets")
        return register_oracle(c.num_qubits, regs,
                               lambda r: {"targets": r["targets"] ^ (r["control"] * (r["x0"] & r["x1"]))}), {}, None
    if name == "ladder1":
        return _ladder_oracle(c, 1, p.n), {}, None
    if name in ("ladder2", "ladderk"):
        order = 2 if name == "ladder2" else p.k
        clean = {q: 0 for q in c.registers.by_role("clean_ancilla")}
        return _ladder_oracle(c, order, p.n), clean, None
    if name == "v2":
        return _v2_oracle(c, p.n), {}, None
    if name in ("comparator", "cq-comparator") and (name == "cq-comparator" or p.mode == "cq"):
        const = p.constant
        regs = _regs(c, "controls", "a", "z")
        on = (lambda r: _all_set(r["controls"], k)) if k else (lambda r: 1)
        return register_oracle(c.num_qubits, regs, lambda r: {"z": r["z"] ^ ((const < r["a"]) * on(r))}), {}, None
    if name == "comparator":
        regs = _regs(c, "controls", "a", "b", "z")
        on = (lambda r: _all_set(r["controls"], k)) if k else (lambda r: 1)
        return register_oracle(c.num_qubits, regs, lambda r: {"z": r["z"] ^ ((r["a"] < r["b"]) * on(r))}), {}, None
    if name in ("incrementer", "cq-adder"):
        step = (1 if p.direction == "increment" else -1) if name == "incrementer" else p.constant
        regs = _regs(c, "controls", "x")
        on = (lambda r: _all_set(r["controls"], k)) if k else (lambda r: 1)
        return register_oracle(c.num_qubits, regs, lambda r: {"x": r["x"] + step * on(r)}), {}, None
    if name == "modular-adder":
        a, modulus, n = p.constant, p.modulus, p.n
        regs = _regs(c, "controls", "b")
        on = (lambda r: _all_set(r["controls"], k)) if k else (lambda r: 1)
        oracle = register_oracle(c.num_qubits, regs,
                                 lambda r: {"b": np.where(on(r), (r["b"] + a) % modulus, r["b"])})
        b = c.registers["b"]
        fixed = {q: 0 for q in c.registers.by_role("clean_ancilla")}
        lo = b[0]

        def valid(values):
            vals = np.asarray(values, dtype=np.uint64)
            return ((vals >> np.uint64(lo)) & np.uint64((1 << n) - 1)) < np.uint64(modulus)

        return oracle, fixed, valid
    raise CircuitError(f"no oracle for {name!r}")


@dataclass(frozen=True)
class Construction:
    name: str
    build: Callable[[Params], Circuit]
    contract: tuple[int, int] | None = None  # expected (clean, dirty) external ancillas
    params: tuple[str, ...] = field(default=("n",))


CONSTRUCTIONS: dict[str, Construction] = {c.name: c for c in [
    Construction("mcx", _mcx, None, ("k",)),
    Construction("fanout1", _fanout1, (0, 0)),
    Construction("fanout2", _fanout2),
    Construction("ladder1", _ladder1, (0, 0)),
    Construction("ladder2", lambda p: _ladderk(p, 2)),
    Construction("ladderk", _ladderk, None, ("n", "k")),
    Construction("v2", _v2, (0, 0)),
    Construction("comparator", _comparator, None, ("n", "k", "mode", "constant")),
    Construction("cq-comparator", _cq_comparator, (0, 1), ("n", "k", "constant")),
    Construction("incrementer", _incrementer, (0, 1), ("n", "k", "direction")),
    Construction("cq-adder", _cq_adder, (0, 1), ("n", "k", "constant")),
    Construction("modular-adder", _modular_adder, (1, 1), ("n", "k", "constant", "modulus")),
]}


def get(name: str) -> Construction:
    if name not in CONSTRUCTIONS:
        raise CircuitError(f"unknown construction {name!r}; choose from {', '.join(CONSTRUCTIONS)}")
    return CONSTRUCTIONS[name]


def expected_contract(name: str, p: Params) -> tuple[int, int] | None:
    if name == "comparator":
        return (0, 0) if p.mode == "qq" else (0, 1)
    return get(name).contract


def verify(name: str, p: Params, circuit: Circuit, *, seed: int = 0) -> dict:
    """Oracle equivalence (dirty wires must come back for every value) plus the ancilla contract."""
    oracle, fixed, domain = oracle_for(name, p, circuit)
    verdict: Verdict = check_equivalence(circuit, oracle, fixed, domain=domain, seed=seed)
    rep = circuit.report()
    result = {"construction": name, "equivalence": verdict.to_dict(), "mode": verdict.mode}
    status = verdict.status
    want = expected_contract(name, p)
    if want is not None:
        got = (rep.qubits_clean, rep.qubits_dirty)
        ok = got == want
        result["contract"] = {"expected": {"clean": want[0], "dirty": want[1]},
                              "reported": {"clean": got[0], "dirty": got[1]}, "status": "PASS" if ok else "FAIL"}
        if not ok:
            status = "FAIL"
    result["status"] = status
    return result
