"""Ancilla bookkeeping for recursive builds.

The ledger owns a qubit space.  Clean and dirty pools are the externally
supplied ancillas; any other qubit that is idle may be borrowed as a dirty
ancilla, which is tracked separately so that a construction's external
contract ("one dirty ancilla", "no ancilla") can be read off the high-water
marks.
"""
from __future__ import annotations

from collections.abc import Iterable


class AncillaError(RuntimeError):
    """A builder asked for more ancillas than its contract allows."""


class AncillaLedger:
    def __init__(self, num_qubits: int, clean: Iterable[int] = (), dirty: Iterable[int] = ()):
        self.num_qubits = num_qubits
        self.clean_pool: set[int] = set(clean)
        self.dirty_pool: set[int] = set(dirty)
        if self.clean_pool & self.dirty_pool:
            raise AncillaError("clean and dirty pools overlap")
        if any(not 0 <= q < num_qubits for q in self.clean_pool | self.dirty_pool):
            raise AncillaError("pool qubit outside the qubit space")
        self.busy: set[int] = set()
        self._origin: dict[int, str] = {}
        self.high_water_clean = 0
        self.high_water_dirty = 0
        self.high_water_borrowed = 0

    def _count(self, origin: str) -> int:
        return sum(1 for q in self.busy if self._origin[q] == origin)

    def _bump(self) -> None:
        self.high_water_clean = max(self.high_water_clean, self._count("clean"))
        self.high_water_dirty = max(self.high_water_dirty, self._count("dirty"))
        self.high_water_borrowed = max(self.high_water_borrowed, self._count("borrowed"))

    def borrow_dirty(self, count: int, exclude: Iterable[int] = ()) -> list[int]:
        """Lowest-indexed idle qubits outside ``exclude``; clean-pool qubits are never handed out."""
        if count == 0:
            return []
        excluded = set(exclude)
        idle = [
            q for q in range(self.num_qubits)
            if q not in self.busy and q not in excluded and q not in self.clean_pool
        ]
        if len(idle) < count:
            raise AncillaError(f"need {count} dirty qubits, only {len(idle)} idle")
        picked = idle[:count]
        for q in picked:
            self.busy.add(q)
            self._origin[q] = "dirty" if q in self.dirty_pool else "borrowed"
        self._bump()
        return picked

    def borrow_clean(self, count: int) -> list[int]:
        free = sorted(self.clean_pool - self.busy)
        if len(free) < count:
            raise AncillaError(f"need {count} clean qubits, only {len(free)} free")
        picked = free[:count]
        for q in picked:
            self.busy.add(q)
            self._origin[q] = "clean"
        self._bump()
        return picked

    def release(self, qubits: Iterable[int]) -> None:
        qubits = list(qubits)
        for q in qubits:
            if q not in self.busy:
                raise AncillaError(f"qubit {q} is not borrowed")
        for q in qubits:
            self.busy.discard(q)
            del self._origin[q]

    def summary(self) -> dict[str, int]:
        return {
            "high_water_clean": self.high_water_clean,
            "high_water_dirty": self.high_water_dirty,
            "high_water_borrowed": self.high_water_borrowed,
        }
