"""Classical simulation of {X, CX, CCX} circuits as basis-state permutations.

Inputs are processed in bit-sliced form: one packed bit-plane per qubit, so a
Toffoli on a batch of 2^20 inputs is a single AND/XOR over 16k machine words.
Checks are exhaustive up to a qubit cap (default 22, override with the
``QARITH_EXHAUSTIVE_CAP`` environment variable) and fall back to seeded
uniform sampling above it.
"""
from __future__ import annotations

import json
import os
from collections.abc import Callable, Mapping, Sequence
from dataclasses import dataclass, field

import numpy as np

from .circuit_ir import Circuit, Gate

DEFAULT_CAP = 22
DEFAULT_SAMPLES = 100_000
MAX_WITNESSES = 16
_CHUNK = 1 << 18


def exhaustive_cap() -> int:
    return int(os.environ.get("QARITH_EXHAUSTIVE_CAP", DEFAULT_CAP))


@dataclass(frozen=True)
class PermutationOracle:
    """Intended action on ``arity`` bits.

    ``apply`` maps one basis state (a Python int) to its image.  ``batch``, when
    given, does the same for a uint64 array and is used whenever arity ≤ 64.
    """

    arity: int
    apply: Callable[[int], int]
    batch: Callable[[np.ndarray], np.ndarray] | None = None

    def __call__(self, value: int) -> int:
        return self.apply(value)


@dataclass(frozen=True)
class PromiseContract:
    promise_qubits: tuple[int, ...]
    target_qubits: tuple[int, ...]
    target_oracle: PermutationOracle
    strength: str = "weak"

    def __post_init__(self):
        object.__setattr__(self, "promise_qubits", tuple(self.promise_qubits))
        object.__setattr__(self, "target_qubits", tuple(self.target_qubits))
        if set(self.promise_qubits) & set(self.target_qubits):
            raise ValueError("promise and target qubits overlap")
        if self.strength not in ("weak", "strong"):
            raise ValueError(f"strength must be weak or strong, not {self.strength!r}")
        if self.target_oracle.arity != len(self.target_qubits):
            raise ValueError("target oracle arity does not match the target register")


@dataclass
class Verdict:
    status: str = "PASS"
    checked: int = 0
    mismatches: list[dict[str, int]] = field(default_factory=list)
    mode: str = "exhaustive"

    @property
    def passed(self) -> bool:
        return self.status == "PASS"

    def __bool__(self) -> bool:
        return self.passed

    def merge(self, other: Verdict) -> Verdict:
        self.checked += other.checked
        room = MAX_WITNESSES - len(self.mismatches)
        self.mismatches.extend(other.mismatches[:room])
        if not other.passed:
            self.status = "FAIL"
        if other.mode == "sampled":
            self.mode = "sampled"
        return self

    def to_dict(self) -> dict:
        return {"status": self.status, "checked": self.checked, "mismatches": list(self.mismatches)}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


# --- bit-matrix plumbing -----------------------------------------------------
# A batch of basis states is an (S, n) uint8 matrix of 0/1 entries.

def _run(gates: Sequence[Gate], bits: np.ndarray) -> np.ndarray:
    s, n = bits.shape
    words = -(-s // 64)
    packed = np.packbits(bits.T, axis=1, bitorder="little")
    planes = np.zeros((n, words * 8), dtype=np.uint8)
    planes[:, : packed.shape[1]] = packed
    planes = planes.view(np.uint64)
    tmp = np.empty(words, dtype=np.uint64)
    for g in gates:
        c = g.controls
        row = planes[g.target]
        if not c:
            np.invert(row, out=row)
        elif len(c) == 1:
            np.bitwise_xor(row, planes[c[0]], out=row)
        else:
            np.bitwise_and(planes[c[0]], planes[c[1]], out=tmp)
            np.bitwise_xor(row, tmp, out=row)
    out = np.unpackbits(planes.view(np.uint8), axis=1, bitorder="little", count=s)
    return np.ascontiguousarray(out.T)


def _to_values(bits: np.ndarray):
    """uint64 array when the width fits a word, else a list of Python ints."""
    s, m = bits.shape
    packed = np.packbits(bits, axis=1, bitorder="little")
    if m <= 64:
        buf = np.zeros((s, 8), dtype=np.uint8)
        buf[:, : packed.shape[1]] = packed
        return buf.view(np.uint64).ravel()
    return [int.from_bytes(row.tobytes(), "little") for row in packed]


def _from_values(values, m: int) -> np.ndarray:
    if isinstance(values, np.ndarray) and m <= 64:
        raw = np.ascontiguousarray(values, dtype=np.uint64).view(np.uint8).reshape(-1, 8)
        return np.unpackbits(raw, axis=1, bitorder="little", count=m)
    nbytes = max(1, -(-m // 8))
    raw = np.frombuffer(b"".join(int(v).to_bytes(nbytes, "little") for v in values), dtype=np.uint8)
    return np.unpackbits(raw.reshape(-1, nbytes), axis=1, bitorder="little", count=m)


def _apply_oracle(oracle: PermutationOracle, bits: np.ndarray) -> np.ndarray:
    m = bits.shape[1]
    values = _to_values(bits)
    if oracle.batch is not None and m <= 64:
        out = np.asarray(oracle.batch(values), dtype=np.uint64)
        if m < 64:
            out = out & np.uint64((1 << m) - 1)
        return _from_values(out, m)
    return _from_values([oracle.apply(int(v)) & ((1 << m) - 1) for v in values], m)


def _row_value(row: np.ndarray) -> int:
    return int.from_bytes(np.packbits(row, bitorder="little").tobytes(), "little")


def _inputs(n: int, fixed: Mapping[int, int], cap: int | None, samples: int, seed: int,
            domain: Callable | None):
    """Yield (bit matrix, mode) batches of inputs honouring fixed bits and the domain filter."""
    cap = exhaustive_cap() if cap is None else cap
    free = [q for q in range(n) if q not in fixed]
    f = len(free)

    def finish(bits: np.ndarray) -> np.ndarray:
        for q, v in fixed.items():
            bits[:, q] = v & 1
        if domain is not None:
            keep = np.asarray(domain(_to_values(bits)), dtype=bool)
            bits = bits[keep]
        return bits

    if f <= cap:
        total = 1 << f
        for start in range(0, total, _CHUNK):
            idx = np.arange(start, min(total, start + _CHUNK), dtype=np.uint64)
            bits = np.zeros((len(idx), n), dtype=np.uint8)
            for j, q in enumerate(free):
                bits[:, q] = (idx >> np.uint64(j)) & np.uint64(1)
            yield finish(bits), "exhaustive"
        return
    rng = np.random.default_rng(seed)
    left = samples
    while left > 0:
        s = min(left, 1 << 16)
        bits = rng.integers(0, 2, size=(s, n), dtype=np.uint8)
        left -= s
        yield finish(bits), "sampled"


def _compare(inp: np.ndarray, exp: np.ndarray, out: np.ndarray, mode: str) -> Verdict:
    bad = np.flatnonzero(np.any(exp != out, axis=1))
    v = Verdict(status="FAIL" if len(bad) else "PASS", checked=len(inp), mode=mode)
    for i in bad[:MAX_WITNESSES]:
        v.mismatches.append({
            "input": _row_value(inp[i]),
            "expected": _row_value(exp[i]),
            "actual": _row_value(out[i]),
        })
    return v


# --- public API ----------------------------------------------------------------

def simulate(circuit: Circuit, state: int) -> int:
    if not 0 <= state < (1 << circuit.num_qubits):
        raise ValueError(f"state {state} outside {circuit.num_qubits}-qubit space")
    for g in circuit.gates:
        c = g.controls
        if all(state >> q & 1 for q in c):
            state ^= 1 << g.target
    return state


def simulate_batch(circuit: Circuit, states) -> np.ndarray | list[int]:
    """Images of many basis states; uint64 array in, uint64 array out when n ≤ 64."""
    n = circuit.num_qubits
    bits = _from_values(states if n <= 64 else list(states), n)
    return _to_values(_run(circuit.gates, bits))


def truth_table(circuit: Circuit, cap: int | None = None) -> PermutationOracle:
    n = circuit.num_qubits
    cap = exhaustive_cap() if cap is None else cap
    if n > cap:
        raise ValueError(f"{n} qubits exceeds the exhaustive cap of {cap}")
    table = np.asarray(simulate_batch(circuit, np.arange(1 << n, dtype=np.uint64)), dtype=np.uint64)
    return PermutationOracle(n, lambda v: int(table[v]), lambda a: table[a.astype(np.int64)])


def table_of(oracle: PermutationOracle) -> np.ndarray:
    domain = np.arange(1 << oracle.arity, dtype=np.uint64)
    if oracle.batch is not None:
        return np.asarray(oracle.batch(domain), dtype=np.uint64)
    return np.array([oracle.apply(int(v)) for v in domain], dtype=np.uint64)


def is_bijection(oracle: PermutationOracle) -> bool:
    t = table_of(oracle)
    return len(np.unique(t)) == len(t) and int(t.max(initial=0)) < (1 << oracle.arity)


def permutation_parity(table: np.ndarray) -> int:
    """0 for an even permutation, 1 for odd (cycle counting)."""
    t = np.asarray(table, dtype=np.int64)
    seen = np.zeros(len(t), dtype=bool)
    transpositions = 0
    for start in range(len(t)):
        if seen[start]:
            continue
        length = 0
        j = start
        while not seen[j]:
            seen[j] = True
            j = t[j]
            length += 1
        transpositions += length - 1
    return transpositions & 1


def check_equivalence(circuit: Circuit, oracle: PermutationOracle,
                      fixed_bits: Mapping[int, int] | None = None, *,
                      domain: Callable | None = None, cap: int | None = None,
                      samples: int = DEFAULT_SAMPLES, seed: int = 0) -> Verdict:
    """Compare the circuit with ``oracle`` on every (or a sample of) input.

    ``oracle`` acts either on all qubits or only on the non-fixed ones; in the
    latter case the fixed qubits must come back unchanged.
    """
    n = circuit.num_qubits
    fixed = dict(fixed_bits or {})
    free = [q for q in range(n) if q not in fixed]
    if oracle.arity not in (n, len(free)):
        raise ValueError(f"oracle arity {oracle.arity} matches neither {n} nor {len(free)}")
    verdict = Verdict()
    for inp, mode in _inputs(n, fixed, cap, samples, seed, domain):
        if not len(inp):
            continue
        out = _run(circuit.gates, inp)
        if oracle.arity == n:
            exp = _apply_oracle(oracle, inp)
        else:
            exp = inp.copy()
            exp[:, free] = _apply_oracle(oracle, inp[:, free])
        verdict.merge(_compare(inp, exp, out, mode))
    return verdict


def check_promise(circuit: Circuit, contract: PromiseContract, *, cap: int | None = None,
                  samples: int = DEFAULT_SAMPLES, seed: int = 0) -> Verdict:
    """Weak: on promise-zero inputs the target gets the oracle and nothing else moves.
    Strong: additionally the promise register is preserved on every input."""
    n = circuit.num_qubits
    promise = list(contract.promise_qubits)
    target = list(contract.target_qubits)
    verdict = Verdict()
    for inp, mode in _inputs(n, {q: 0 for q in promise}, cap, samples, seed, None):
        out = _run(circuit.gates, inp)
        exp = inp.copy()
        exp[:, target] = _apply_oracle(contract.target_oracle, inp[:, target])
        verdict.merge(_compare(inp, exp, out, mode))
    if contract.strength == "strong":
        for inp, mode in _inputs(n, {}, cap, samples, seed + 1, None):
            out = _run(circuit.gates, inp)
            exp = out.copy()
            exp[:, promise] = inp[:, promise]
            verdict.merge(_compare(inp, exp, out, mode))
    return verdict


def check_dirty_restoration(circuit: Circuit, dirty: Sequence[int], oracle: PermutationOracle, *,
                            cap: int | None = None, samples: int = DEFAULT_SAMPLES,
                            seed: int = 0) -> Verdict:
    """Dirty qubits come back unchanged and the rest follows ``oracle`` for every dirty value.

    ``oracle`` acts on the non-dirty qubits (in index order) or on the full state.
    """
    n = circuit.num_qubits
    dirty = list(dirty)
    rest = [q for q in range(n) if q not in set(dirty)]
    if oracle.arity not in (n, len(rest)):
        raise ValueError(f"oracle arity {oracle.arity} matches neither {n} nor {len(rest)}")
    verdict = Verdict()
    for inp, mode in _inputs(n, {}, cap, samples, seed, None):
        out = _run(circuit.gates, inp)
        if oracle.arity == n:
            exp = _apply_oracle(oracle, inp)
            exp[:, dirty] = inp[:, dirty]
        else:
            exp = inp.copy()
            exp[:, rest] = _apply_oracle(oracle, inp[:, rest])
        verdict.merge(_compare(inp, exp, out, mode))
    return verdict


# --- oracle construction helpers ---------------------------------------------

def get_register(state, qubits: Sequence[int]):
    """Little-endian value of ``qubits`` inside ``state`` (int or uint64 array)."""
    if isinstance(state, np.ndarray):
        acc = np.zeros(state.shape, dtype=np.uint64)
        for i, q in enumerate(qubits):
            acc |= ((state >> np.uint64(q)) & np.uint64(1)) << np.uint64(i)
        return acc
    acc = 0
    for i, q in enumerate(qubits):
        acc |= (state >> q & 1) << i
    return acc


def set_register(state, qubits: Sequence[int], value):
    if isinstance(state, np.ndarray):
        value = np.asarray(value).astype(np.uint64)
        out = state.copy()
        for i, q in enumerate(qubits):
            bit = np.uint64(1) << np.uint64(q)
            out = (out & ~bit) | (((value >> np.uint64(i)) & np.uint64(1)) << np.uint64(q))
        return out
    value = int(value)
    for i, q in enumerate(qubits):
        state = (state & ~(1 << q)) | ((value >> i & 1) << q)
    return state


def register_oracle(num_qubits: int, registers: Mapping[str, Sequence[int]],
                    fn: Callable[[dict], dict]) -> PermutationOracle:
    """Oracle over ``num_qubits`` built from a function on named register values.

    ``fn`` receives a dict of register values (ints, or int64 arrays in batch
    mode) and returns the registers it changes; results are reduced modulo the
    register width.
    """
    regs = {k: tuple(v) for k, v in registers.items()}
    batchable = num_qubits <= 64 and all(len(q) <= 62 for q in regs.values())

    def run(state):
        vals = {k: get_register(state, q) for k, q in regs.items()}
        if isinstance(state, np.ndarray):
            vals = {k: v.astype(np.int64) for k, v in vals.items()}
        for k, v in fn(vals).items():
            q = regs[k]
            if isinstance(state, np.ndarray):
                v = np.asarray(v).astype(np.int64) & ((1 << len(q)) - 1)
            else:
                v = int(v) & ((1 << len(q)) - 1)
            state = set_register(state, q, v)
        return state

    return PermutationOracle(num_qubits, run, run if batchable else None)


def identity_oracle(arity: int) -> PermutationOracle:
    return PermutationOracle(arity, lambda v: v, lambda a: a)
