"""Resource sweeps with fitted scaling bounds, and the factoring resource composition."""
from __future__ import annotations

import json
import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field

import numpy as np

from .ancilla import AncillaLedger
from .arithmetic import (AdderSpec, ComparatorSpec, IncrementerSpec, ModularAdderSpec, build_controlled_cq_adder,
                         build_controlled_cq_comparator, build_cq_adder, build_cq_comparator, build_incrementer,
                         build_modular_adder, build_qq_comparator, v2_free_gates)
from .circuit_ir import Circuit, CircuitError, RegisterMap, ResourceReport
from .primitives import build_ladder2_ancilla, ladder_ancilla_count

TOLERANCE = 1.10


def generic_constant(n: int) -> int:
    """Alternating 0101... pattern, so both bit values occur at every scale."""
    return ((1 << n) - 1) // 3


def _v2(n: int) -> Circuit:
    q = list(range(2 * n + 1))
    return Circuit(2 * n + 1, tuple(v2_free_gates(q[0::2], q[1::2])), RegisterMap.build(2 * n + 1, [("v2", "data", q)]))


def _ladder2(n: int) -> Circuit:
    anc = ladder_ancilla_count(n)
    ledger = AncillaLedger(2 * n + 1 + anc, clean=range(2 * n + 1, 2 * n + 1 + anc))
    return build_ladder2_ancilla(list(range(2 * n + 1)), ledger)


def _modular(n: int) -> Circuit:
    modulus = (1 << n) - 3 if n > 2 else (1 << n) - 1
    return build_modular_adder(ModularAdderSpec(n, modulus // 2, modulus))


# construction name -> (builder of width n, gate model, depth model)
LINEAR = ("n", lambda n: n)
LOG = ("log2(n)", math.log2)
NLOGN = ("n*log2(n)", lambda n: n * math.log2(n))
LOG2 = ("log2(n)^2", lambda n: math.log2(n) ** 2)

SWEEPS: dict[str, tuple[Callable[[int], Circuit], tuple, tuple]] = {
    "comparator": (lambda n: build_qq_comparator(ComparatorSpec(n)), LINEAR, LOG),
    "cq-comparator": (lambda n: build_cq_comparator(ComparatorSpec(n, "classical_quantum", generic_constant(n))),
                      LINEAR, LOG),
    "incrementer": (lambda n: build_incrementer(IncrementerSpec(n)), LINEAR, LOG),
    "v2": (_v2, LINEAR, LOG),
    "cq-adder": (lambda n: build_cq_adder(AdderSpec(n, generic_constant(n))), NLOGN, LOG2),
    "modular-adder": (_modular, NLOGN, LOG2),
    "ladder2": (_ladder2, LINEAR, LOG),
}


def ladder2_bounds(n: int) -> dict[str, int]:
    """Closed-form CCX, depth and ancilla ceilings for the n-gate Toffoli ladder."""
    a, b = int(math.floor(math.log2(n))), int(math.floor(math.log2(2 * n / 3)))
    return {"count_ccx": 3 * n - 3 - 3 * a - 3 * b, "depth": 2 * a + 2 * b, "ancillas": n - 1 - a - b}


@dataclass
class SweepResult:
    construction: str
    points: list[tuple[int, int, ResourceReport]] = field(default_factory=list)
    fitted: dict[str, tuple[float, float]] = field(default_factory=dict)
    verdicts: list[dict] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(v["status"] == "PASS" for v in self.verdicts)

    def to_dict(self) -> dict:
        return {
            "construction": self.construction,
            "points": [{"n": n, "k": k, "report": r.to_dict()} for n, k, r in self.points],
            "fits": {m: {"slope": a, "intercept": b} for m, (a, b) in self.fitted.items()},
            "verdicts": self.verdicts,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _fit_through_origin(xs: Sequence[float], ys: Sequence[float]) -> tuple[float, float]:
    return max(y / x for x, y in zip(xs, ys)), 0.0


def _fit_affine(xs: Sequence[float], ys: Sequence[float]) -> tuple[float, float]:
    if len(xs) == 1:
        return ys[0] / xs[0], 0.0
    slope, intercept = np.polyfit(np.asarray(xs, float), np.asarray(ys, float), 1)
    return float(slope), float(intercept)


def run_sweep(construction: str, sizes: Sequence[int], calibration: int = 2) -> SweepResult:
    """Build every size, fit the scaling model on the first ``calibration`` sizes, judge the rest."""
    if construction not in SWEEPS:
        raise CircuitError(f"unknown construction {construction!r}; choose from {sorted(SWEEPS)}")
    sizes = list(sizes)
    if sorted(sizes) != sizes:
        raise CircuitError("sizes must be ascending")
    if calibration < 1 or len(sizes) < calibration + 1:
        raise CircuitError(f"need more than {calibration} sizes to have anything to verify")
    build, (gname, gmodel), (dname, dmodel) = SWEEPS[construction]
    result = SweepResult(construction)
    for n in sizes:
        try:
            circuit = build(n)
        except Exception as exc:
            raise CircuitError(f"{construction} failed at n={n}: {exc}") from exc
        result.points.append((n, 0, circuit.report()))
    cal = result.points[:calibration]
    result.fitted["total_gates"] = _fit_through_origin([gmodel(n) for n, _, _ in cal],
                                                       [r.total_gates for _, _, r in cal])
    result.fitted["depth"] = _fit_affine([dmodel(n) for n, _, _ in cal], [r.depth for _, _, r in cal])
    for n, _, rep in result.points[calibration:]:
        for metric, model in (("total_gates", gmodel), ("depth", dmodel)):
            slope, intercept = result.fitted[metric]
            bound = (slope * model(n) + intercept) * TOLERANCE
            value = getattr(rep, metric)
            result.verdicts.append({"n": n, "metric": metric, "model": gname if metric == "total_gates" else dname,
                                    "measured": value, "bound": round(bound, 3),
                                    "status": "PASS" if value <= bound else "FAIL"})
    if construction == "ladder2":
        for n, _, rep in result.points:
            ceil = ladder2_bounds(n)
            for metric, value in (("count_ccx", rep.count_ccx), ("depth", rep.depth), ("ancillas", rep.qubits_clean)):
                result.verdicts.append({"n": n, "metric": metric, "model": "closed form", "measured": value,
                                        "bound": ceil[metric], "status": "PASS" if value <= ceil[metric] else "FAIL"})
    return result


@dataclass(frozen=True)
class ShorEstimate:
    n: int
    total_qubits: int
    comparator_calls: int
    adder_calls: int
    comparator: ResourceReport
    adder: ResourceReport
    gate_total: int
    depth_total: int
    assumptions: tuple[str, ...] = (
        "2n singly-controlled modular multiplications",
        "n controlled modular additions per multiplication",
        "2 comparators and 1 adder per modular addition",
        "sub-circuits run back to back, so depths add",
    )

    def to_dict(self) -> dict:
        return {
            "n": self.n, "total_qubits": self.total_qubits,
            "comparator_calls": self.comparator_calls, "adder_calls": self.adder_calls,
            "comparator": self.comparator.to_dict(), "adder": self.adder.to_dict(),
            "gate_total": self.gate_total, "depth_total": self.depth_total,
            "assumptions": list(self.assumptions),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def estimate_shor(n: int) -> ShorEstimate:
    """Compose measured per-call costs into totals for factoring an n-bit modulus.

    Register budget: the n-bit exponent-side accumulator, an n-bit work
    register, one comparison flag and one dirty wire that every adder and
    comparator borrows.
    """
    if n < 2:
        raise CircuitError("the modulus needs at least 2 bits")
    c = generic_constant(n)
    cmp = build_controlled_cq_comparator(ComparatorSpec(n, "classical_quantum", c, controls=1)).report()
    add = build_controlled_cq_adder(AdderSpec(n, c, controls=2)).report()
    mults = 2 * n
    comparators, adders = 2 * n * mults, n * mults
    return ShorEstimate(
        n=n, total_qubits=2 * n + 2, comparator_calls=comparators, adder_calls=adders,
        comparator=cmp, adder=add,
        gate_total=comparators * cmp.total_gates + adders * add.total_gates,
        depth_total=comparators * cmp.depth + adders * add.depth,
    )
