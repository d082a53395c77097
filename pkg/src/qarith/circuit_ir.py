"""Gate-level IR for {X, CX, CCX} circuits.

A circuit is a flat, ordered gate list over qubits ``0..num_qubits-1`` plus a
register map describing what each qubit is for.  Register values are
little-endian: qubit ``reg[0]`` holds the least significant bit.
"""
from __future__ import annotations

import json
import re
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field

KINDS = ("X", "CX", "CCX")
ROLES = ("data", "control", "target", "promise", "clean_ancilla", "dirty_ancilla")
_MNEMONIC = {"x": 0, "cx": 1, "ccx": 2}


class CircuitError(ValueError):
    """Raised for malformed gates, circuits or register maps."""


class QasmError(CircuitError):
    """Raised by the QASM importer; carries the offending line number."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


@dataclass(frozen=True, slots=True)
class Gate:
    controls: tuple[int, ...]
    target: int

    def __post_init__(self):
        if len(self.controls) > 2:
            raise CircuitError(f"at most 2 controls, got {len(self.controls)}")
        qubits = (*self.controls, self.target)
        if any(q < 0 for q in qubits):
            raise CircuitError(f"negative qubit index in {qubits}")
        if len(set(qubits)) != len(qubits):
            raise CircuitError(f"duplicate qubit in gate {qubits}")

    @property
    def kind(self) -> str:
        return KINDS[len(self.controls)]

    @property
    def qubits(self) -> tuple[int, ...]:
        return (*self.controls, self.target)


def x(t: int) -> Gate:
    return Gate((), t)


def cx(c: int, t: int) -> Gate:
    return Gate((c,), t)


def ccx(c0: int, c1: int, t: int) -> Gate:
    return Gate((c0, c1), t)


@dataclass(frozen=True)
class RegisterEntry:
    name: str
    role: str
    qubits: tuple[int, ...]


@dataclass(frozen=True)
class RegisterMap:
    entries: tuple[RegisterEntry, ...] = ()

    def validate(self, num_qubits: int) -> None:
        seen: set[int] = set()
        for e in self.entries:
            if e.role not in ROLES:
                raise CircuitError(f"unknown role {e.role!r} for register {e.name!r}")
            overlap = seen.intersection(e.qubits)
            if overlap:
                raise CircuitError(f"register {e.name!r} overlaps on qubits {sorted(overlap)}")
            seen.update(e.qubits)
        if seen != set(range(num_qubits)):
            missing = sorted(set(range(num_qubits)) - seen)
            extra = sorted(seen - set(range(num_qubits)))
            raise CircuitError(f"registers must cover the qubit space (missing {missing}, out of range {extra})")

    def __getitem__(self, name: str) -> tuple[int, ...]:
        for e in self.entries:
            if e.name == name:
                return e.qubits
        raise KeyError(name)

    def __contains__(self, name: str) -> bool:
        return any(e.name == name for e in self.entries)

    def by_role(self, role: str) -> list[int]:
        return sorted(q for e in self.entries if e.role == role for q in e.qubits)

    @classmethod
    def build(cls, num_qubits: int, named: Iterable[tuple[str, str, Sequence[int]]]) -> RegisterMap:
        """Register map from explicit entries; uncovered qubits become an ``idle`` data register."""
        entries = [RegisterEntry(n, r, tuple(q)) for n, r, q in named if len(q)]
        used = {q for e in entries for q in e.qubits}
        rest = tuple(q for q in range(num_qubits) if q not in used)
        if rest:
            entries.append(RegisterEntry("idle", "data", rest))
        rm = cls(tuple(entries))
        rm.validate(num_qubits)
        return rm


@dataclass(frozen=True)
class ResourceReport:
    count_x: int
    count_cx: int
    count_ccx: int
    total_gates: int
    depth: int
    qubits_data: int
    qubits_clean: int
    qubits_dirty: int

    def to_dict(self) -> dict[str, int]:
        return {
            "count_x": self.count_x,
            "count_cx": self.count_cx,
            "count_ccx": self.count_ccx,
            "total_gates": self.total_gates,
            "depth": self.depth,
            "qubits_data": self.qubits_data,
            "qubits_clean": self.qubits_clean,
            "qubits_dirty": self.qubits_dirty,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


@dataclass(frozen=True)
class Circuit:
    num_qubits: int
    gates: tuple[Gate, ...] = ()
    registers: RegisterMap = field(default_factory=RegisterMap)

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        for g in self.gates:
            _check_range(g, self.num_qubits)
        if self.registers.entries:
            self.registers.validate(self.num_qubits)

    def __len__(self) -> int:
        return len(self.gates)

    @property
    def depth(self) -> int:
        return compute_depth(self)

    def report(self) -> ResourceReport:
        return resource_report(self)

    def with_gates(self, gates: Iterable[Gate]) -> Circuit:
        return Circuit(self.num_qubits, tuple(gates), self.registers)


def _check_range(g: Gate, n: int) -> None:
    for q in g.qubits:
        if q >= n:
            raise CircuitError(f"qubit {q} out of range for {n}-qubit circuit")


def append_gate(circuit: Circuit, gate: Gate) -> Circuit:
    _check_range(gate, circuit.num_qubits)
    return Circuit(circuit.num_qubits, circuit.gates + (gate,), circuit.registers)


def gate_depth(gates: Iterable[Gate]) -> int:
    """ASAP layer count of a gate sequence."""
    level: dict[int, int] = {}
    depth = 0
    for g in gates:
        qs = g.qubits
        d = 1 + max(level.get(q, 0) for q in qs)
        for q in qs:
            level[q] = d
        if d > depth:
            depth = d
    return depth


def compute_depth(circuit: Circuit) -> int:
    return gate_depth(circuit.gates)


def reverse(circuit: Circuit) -> Circuit:
    return circuit.with_gates(reversed(circuit.gates))


def resource_report(circuit: Circuit) -> ResourceReport:
    counts = [0, 0, 0]
    for g in circuit.gates:
        counts[len(g.controls)] += 1
    clean = len(circuit.registers.by_role("clean_ancilla"))
    dirty = len(circuit.registers.by_role("dirty_ancilla"))
    return ResourceReport(
        count_x=counts[0],
        count_cx=counts[1],
        count_ccx=counts[2],
        total_gates=sum(counts),
        depth=compute_depth(circuit),
        qubits_data=circuit.num_qubits - clean - dirty,
        qubits_clean=clean,
        qubits_dirty=dirty,
    )


def export_qasm(circuit: Circuit) -> str:
    lines = ["OPENQASM 2.0;", 'include "qelib1.inc";', f"qreg q[{circuit.num_qubits}];"]
    for g in circuit.gates:
        args = ",".join(f"q[{q}]" for q in g.qubits)
        lines.append(f"{g.kind.lower()} {args};")
    return "\n".join(lines) + "\n"


_QREG = re.compile(r"^qreg\s+q\[(\d+)\]\s*;$")
_GATE = re.compile(r"^([a-z]+)\s+(q\[\d+\](?:\s*,\s*q\[\d+\])*)\s*;$")
_ARG = re.compile(r"q\[(\d+)\]")


def import_qasm(text: str) -> Circuit:
    num_qubits = None
    gates: list[Gate] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("//", 1)[0].strip()
        if not line or line.startswith("OPENQASM") or line.startswith("include"):
            continue
        m = _QREG.match(line)
        if m:
            if num_qubits is not None:
                raise QasmError(lineno, "second register declaration")
            num_qubits = int(m.group(1))
            continue
        m = _GATE.match(line)
        if not m:
            raise QasmError(lineno, f"cannot parse {line!r}")
        name = m.group(1)
        if name not in _MNEMONIC:
            raise QasmError(lineno, f"unknown mnemonic {name!r}")
        if num_qubits is None:
            raise QasmError(lineno, "gate before register declaration")
        args = [int(a) for a in _ARG.findall(m.group(2))]
        if len(args) != _MNEMONIC[name] + 1:
            raise QasmError(lineno, f"{name} takes {_MNEMONIC[name] + 1} operands, got {len(args)}")
        for a in args:
            if a >= num_qubits:
                raise QasmError(lineno, f"index {a} overflows register of size {num_qubits}")
        try:
            gates.append(Gate(tuple(args[:-1]), args[-1]))
        except CircuitError as exc:
            raise QasmError(lineno, str(exc)) from None
    if num_qubits is None:
        raise QasmError(0, "missing register declaration")
    return Circuit(num_qubits, tuple(gates))
