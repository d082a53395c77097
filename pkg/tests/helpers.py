"""Brute-force reference maps shared by the test modules."""
from __future__ import annotations

import random

import numpy as np

from qarith.circuit_ir import Circuit
from qarith.rev_sim import PermutationOracle, check_equivalence, register_oracle


def all_set(v, k: int):
    return v == (1 << k) - 1


def enabled(r: dict, k: int):
    return all_set(r["controls"], k) if k else 1


def regs(c: Circuit, *names: str) -> dict:
    return {n: c.registers[n] for n in names if n in c.registers}


def verify_map(c: Circuit, fn, *names: str, fixed=None, domain=None):
    """Exhaustive check of ``c`` against ``fn`` on the named registers; everything else must be restored."""
    oracle = register_oracle(c.num_qubits, regs(c, *names), fn)
    return check_equivalence(c, oracle, fixed or {}, domain=domain)


def qq_less(c: Circuit, k: int = 0):
    return verify_map(c, lambda r: {"z": r["z"] ^ ((r["a"] < r["b"]) * enabled(r, k))}, "controls", "a", "b", "z")


def cq_less(c: Circuit, const: int, k: int = 0):
    return verify_map(c, lambda r: {"z": r["z"] ^ ((const < r["a"]) * enabled(r, k))}, "controls", "a", "z")


def add(c: Circuit, step: int, k: int = 0):
    return verify_map(c, lambda r: {"x": r["x"] + step * enabled(r, k)}, "controls", "x")


def modular(c: Circuit, a: int, modulus: int, n: int, k: int = 0):
    b = c.registers["b"]
    lo = b[0]

    def valid(values):
        vals = np.asarray(values, dtype=np.uint64)
        return ((vals >> np.uint64(lo)) & np.uint64((1 << n) - 1)) < np.uint64(modulus)

    fixed = {q: 0 for q in c.registers.by_role("clean_ancilla")}
    return verify_map(c, lambda r: {"b": np.where(enabled(r, k), (r["b"] + a) % modulus, r["b"])},
                      "controls", "b", fixed=fixed, domain=valid)


def constants(n: int, count: int = 8, seed: int = 0) -> list[int]:
    """0, 1, all-ones, then random fill; duplicates removed."""
    rng = random.Random(seed * 1000 + n)
    top = (1 << n) - 1
    out = list(dict.fromkeys([0, 1 & top, top]))
    tries = 0
    while len(out) < min(count, top + 1) and tries < 1000:
        c = rng.randint(0, top)
        tries += 1
        if c not in out:
            out.append(c)
    return out


def modular_pairs(n: int, count: int = 5, seed: int = 0) -> list[tuple[int, int]]:
    """(N, a) pairs with N in [2, 2^n); includes the widest modulus with the largest constant."""
    rng = random.Random(seed * 1000 + n)
    top = (1 << n) - 1
    out = [(top, top - 1), (top, 1)]
    while len(out) < count:
        modulus = rng.randint(2, top)
        pair = (modulus, rng.randint(0, modulus - 1))
        if pair not in out:
            out.append(pair)
    return out


def ladder_map(order: int, gates: int) -> PermutationOracle:
    """L_order over order*gates + 1 bits, every Toffoli seeing the input values."""
    width = order * gates + 1

    def fn(v):
        out = v
        for i in range(1, gates + 1):
            ctrl = 1
            for j in range(order):
                ctrl &= (v >> (order * (i - 1) + j)) & 1
            out ^= ctrl << (order * i)
        return out

    def batch(a):
        a = a.astype(np.uint64)
        out = a.copy()
        one = np.uint64(1)
        for i in range(1, gates + 1):
            ctrl = np.ones_like(a)
            for j in range(order):
                ctrl &= (a >> np.uint64(order * (i - 1) + j)) & one
            out ^= ctrl << np.uint64(order * i)
        return out

    return PermutationOracle(width, fn, batch)


def v2_value(v: int, n: int) -> int:
    """Image of V2 on wires t0, g1, t1, ..., gn, tn packed little-endian."""
    acc = 0
    for j in range(n):
        term = (v >> (2 * j)) & 1
        for i in range(j + 1, n + 1):
            term &= (v >> (2 * i - 1)) & 1
        acc ^= term
    return v ^ (acc << (2 * n))


def v2_map(n: int, controls: int = 0) -> PermutationOracle:
    """V2 on the wires above ``controls`` low control bits, applied when all of those are set."""
    full = (1 << controls) - 1

    def fn(v):
        on = (v & full) == full
        return np.where(on, (v & full) | (v2_value(v >> controls, n) << controls), v)

    return PermutationOracle(controls + 2 * n + 1, lambda v: int(fn(v)),
                             lambda a: fn(a.astype(np.int64)).astype(np.uint64))
