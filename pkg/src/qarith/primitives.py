"""Structural building blocks: multi-controlled X, fan-outs and Toffoli ladders.

Internal helpers (``*_gates``) return plain gate lists over caller-chosen
qubits; the public ``build_*`` functions wrap them into circuits with a
register map and ledger bookkeeping.

Ladder orientation: ``L`` applies its gates top-down (last gate first), so every
target is XORed with the product of the *original* values below it.  The
ascending cascade, which is what the recursive log-depth construction
produces naturally, is therefore ``L``'s adjoint.
"""
from __future__ import annotations

from collections.abc import Iterable, Sequence

from .ancilla import AncillaError, AncillaLedger
from .circuit_ir import Circuit, CircuitError, Gate, RegisterMap, ccx, cx, x

# --- multi-controlled X ---------------------------------------------------------


def _vchain_dirty(controls: Sequence[int], target: int, dirty: Sequence[int]) -> list[Gate]:
    """Linear-depth C^mX with m-2 dirty helpers, all restored."""
    m = len(controls)
    if m <= 2:
        return [Gate(tuple(controls), target)]
    d = list(dirty[: m - 2])
    if len(d) < m - 2:
        raise AncillaError(f"v-chain on {m} controls needs {m - 2} dirty qubits, got {len(d)}")
    up = [ccx(controls[i + 2], d[i], d[i + 1]) for i in range(m - 3)]
    base = ccx(controls[0], controls[1], d[0])
    top = ccx(controls[m - 1], d[m - 3], target)
    return [top, *up[::-1], base, *up, top, *up[::-1], base, *up]


def _cond_clean_ladder(work: int, controls: Sequence[int]) -> tuple[list[Gate], list[int]]:
    """Log-depth ladder that recycles already-consumed controls as conditionally clean ancillas.

    The first gate writes ``c0 & c1`` into ``work``.  Whenever that product is 1,
    the remaining gates leave the returned final controls holding ANDs of
    disjoint control subsets that together cover every other control.
    """
    gates: list[Gate] = []
    anc = [work]
    final: list[int] = []
    rest = list(controls)
    while len(rest) > 1:
        size = min(len(anc) + 1, len(rest))
        batch, rest = rest[:size], rest[size:]
        fresh: list[int] = []
        while len(batch) > 1:
            half = len(batch) // 2
            st = len(batch) % 2
            xs, ys, ts = batch[st:st + half], batch[st + half:], anc[-half:]
            for a, b, t in zip(xs, ys, ts):
                if t != work:
                    gates.append(x(t))
                gates.append(ccx(a, b, t))
            fresh += batch[st:]
            batch = ts + batch[:st]
            anc = anc[:-half]
        anc = sorted(anc + fresh)
        final += batch
    final = sorted(final + rest)
    final.remove(work)
    return gates, final


def mcx_gates(controls: Sequence[int], target: int, dirty: Sequence[int] = ()) -> list[Gate]:
    """C^kX on ``target``; any ``dirty`` helpers come back unchanged.

    Uses one dirty helper for k >= 3, O(k) gates and logarithmic depth.
    """
    controls = list(controls)
    k = len(controls)
    if k <= 2:
        return [Gate(tuple(controls), target)]
    if not dirty:
        raise AncillaError(f"C^{k}X needs a dirty ancilla")
    w = dirty[0]
    if k == 3:
        a, b, c = controls
        return [ccx(a, b, w), ccx(w, c, target), ccx(a, b, w), ccx(w, c, target)]
    if k <= 5 and len(dirty) >= k - 2:
        return _vchain_dirty(controls, target, dirty)
    ladder, final = _cond_clean_ladder(w, controls)
    inner = ladder[1:]
    mid_ctrls = [w, *final]
    spare = [q for q in controls if q not in set(final)] + list(dirty[1:])
    mid = _vchain_dirty(mid_ctrls, target, spare)
    undo = inner[::-1]
    return [ladder[0], *inner, *mid, *undo, ladder[0], *inner, *mid, *undo]


def _parallel_mcx(specs: Sequence[tuple[Sequence[int], int]], pool: Iterable[int]) -> list[Gate]:
    """A layer of disjoint C^kX gates; each one borrows a distinct idle qubit from ``pool``."""
    busy = {q for ctrls, t in specs for q in (*ctrls, t)}
    idle = [q for q in dict.fromkeys(pool) if q not in busy]
    out: list[Gate] = []
    for ctrls, t in specs:
        if len(ctrls) <= 2:
            out.append(Gate(tuple(ctrls), t))
            continue
        if not idle:
            raise AncillaError("no idle qubit left to borrow for a parallel C^kX")
        out += mcx_gates(ctrls, t, [idle.pop(0)])
    return out


def _assemble(num_qubits: int, gates: Iterable[Gate], named) -> Circuit:
    return Circuit(num_qubits, tuple(gates), RegisterMap.build(num_qubits, named))


def build_mcx(k: int, control_qubits: Sequence[int], target_qubit: int,
              ledger: AncillaLedger) -> Circuit:
    controls = list(control_qubits)
    if k != len(controls):
        raise CircuitError(f"k={k} but {len(controls)} controls given")
    dirty = ledger.borrow_dirty(1, exclude=[*controls, target_qubit]) if k >= 3 else []
    gates = mcx_gates(controls, target_qubit, dirty)
    ledger.release(dirty)
    return _assemble(ledger.num_qubits, gates, [
        ("controls", "control", controls), ("target", "target", [target_qubit]),
        ("ancilla", "dirty_ancilla", dirty),
    ])


# --- fan-outs -------------------------------------------------------------------


def _broadcast_rounds(nodes: Sequence[int]) -> list[list[tuple[int, int]]]:
    """Binomial-tree rounds over ``nodes`` (root first): (parent, child) pairs per round."""
    rounds = []
    step = 1
    while step < len(nodes):
        rounds.append([(nodes[i - step], nodes[i]) for i in range(step, min(2 * step, len(nodes)))])
        step *= 2
    return rounds


def fanout1_gates(control: int, targets: Sequence[int]) -> list[Gate]:
    """Every target ^= control, in depth 2*ceil(log2(n+1)) - 1.

    A binomial broadcast tree alone would XOR each target with its whole root
    path; running the same tree without the root edges in reverse first turns
    that into a plain copy of the control.
    """
    rounds = _broadcast_rounds([control, *targets])
    pre = [cx(p, c) for rnd in reversed(rounds) for p, c in rnd if p != control]
    return pre + [cx(p, c) for rnd in rounds for p, c in rnd]


def build_fanout1(control_qubit: int, target_qubits: Sequence[int], num_qubits: int | None = None) -> Circuit:
    targets = list(target_qubits)
    if not targets:
        raise CircuitError("fan-out needs at least one target")
    n = num_qubits or max(control_qubit, *targets) + 1
    return _assemble(n, fanout1_gates(control_qubit, targets),
                     [("control", "control", [control_qubit]), ("targets", "target", targets)])


def _c3x_dirty(c: int, a: int, b: int, t: int, e: int) -> list[Gate]:
    return [ccx(a, b, e), ccx(e, c, t), ccx(a, b, e), ccx(e, c, t)]


def fanout2_gates(control: int, triples: Sequence[tuple[int, int, int]],
                  spare: Sequence[int] = ()) -> list[Gate]:
    """Every t ^= control & x0 & x1.

    Triples are split into groups; each group is handled by toggle detection on
    helpers taken from the other groups' qubits: fan the control out onto one
    helper per triple, apply a helper-controlled C^3X, and repeat both steps.
    """
    triples = [tuple(tr) for tr in triples]
    n = len(triples)
    if n == 1:
        if not spare:
            raise AncillaError("a single second-order fan-out needs one dirty ancilla")
        x0, x1, t = triples[0]
        return _c3x_dirty(control, x0, x1, t, spare[0])
    # each group needs two helpers per triple from the others' three qubits per triple
    parts = 2 if 2 * (n - n // 2) <= 3 * (n // 2) else 3
    bounds = [round(i * n / parts) for i in range(parts + 1)]
    groups = [triples[bounds[i]:bounds[i + 1]] for i in range(parts)]
    gates: list[Gate] = []
    for gi, group in enumerate(groups):
        helpers = [q for j, other in enumerate(groups) if j != gi for tr in other for q in tr]
        helpers += list(spare)
        if len(helpers) < 2 * len(group):
            raise AncillaError("not enough helper qubits for the second-order fan-out")
        ds, es = helpers[: len(group)], helpers[len(group): 2 * len(group)]
        fan = fanout1_gates(control, ds)
        body = [g for (x0, x1, t), d, e in zip(group, ds, es) for g in _c3x_dirty(d, x0, x1, t, e)]
        gates += fan + body + fan + body
    return gates


def build_fanout2(control_qubit: int, triples: Sequence[tuple[int, int, int]],
                  ledger: AncillaLedger | None = None, num_qubits: int | None = None) -> Circuit:
    triples = [tuple(tr) for tr in triples]
    if not triples:
        raise CircuitError("fan-out needs at least one triple")
    flat = [q for tr in triples for q in tr]
    if len(set(flat)) != len(flat) or control_qubit in flat:
        raise CircuitError("triples must be disjoint from each other and from the control")
    n = ledger.num_qubits if ledger else (num_qubits or max(control_qubit, *flat) + 1)
    dirty: list[int] = []
    if len(triples) == 1:
        if ledger is None:
            raise AncillaError("a single triple needs a ledger to borrow one dirty ancilla")
        dirty = ledger.borrow_dirty(1, exclude=[control_qubit, *flat])
    gates = fanout2_gates(control_qubit, triples, dirty)
    if ledger:
        ledger.release(dirty)
    return _assemble(n, gates, [
        ("control", "control", [control_qubit]),
        ("x0", "data", [tr[0] for tr in triples]), ("x1", "data", [tr[1] for tr in triples]),
        ("targets", "target", [tr[2] for tr in triples]),
        ("ancilla", "dirty_ancilla", dirty),
    ])


# --- first-order ladder -----------------------------------------------------------


def prefix_xor_gates(qubits: Sequence[int]) -> list[Gate]:
    """In-place Brent-Kung scan: q[i] becomes q[0] ^ ... ^ q[i]."""
    q = list(qubits)
    n = len(q)
    gates: list[Gate] = []
    d = 1
    while d < n:
        gates += [cx(q[i - d], q[i]) for i in range(2 * d - 1, n, 2 * d)]
        d *= 2
    d //= 2
    while d >= 1:
        gates += [cx(q[i - d], q[i]) for i in range(3 * d - 1, n, 2 * d)]
        d //= 2
    return gates


def ladder1_gates(qubits: Sequence[int]) -> list[Gate]:
    """q[i] ^= q[i-1] for all i at once (the inverse of the prefix scan)."""
    return prefix_xor_gates(qubits)[::-1]


def build_ladder1(qubits: Sequence[int], adjoint: bool = False, num_qubits: int | None = None) -> Circuit:
    qubits = list(qubits)
    if len(qubits) < 2:
        raise CircuitError("a CX ladder needs at least 2 qubits")
    gates = ladder1_gates(qubits)
    if adjoint:
        gates = gates[::-1]
    return _assemble(num_qubits or max(qubits) + 1, gates, [("ladder", "data", qubits)])


# --- higher-order ladders ---------------------------------------------------------


def ladder_ancilla_count(n: int) -> int:
    """Helper qubits consumed by the recursive ladder on ``n`` gates."""
    if n <= 3:
        return 0
    if n % 2:
        return ladder_ancilla_count(n - 1)
    m = n // 2 - 1
    return m + ladder_ancilla_count(m)


def ascending_gates(targets: Sequence[int | None], groups: Sequence[Sequence[int]],
                    anc: Sequence[int], pool: Iterable[int] = ()) -> list[Gate]:
    """Cascade t[i] ^= t[i-1] & AND(groups[i-1]) for i = 1..n, applied bottom-up.

    ``targets[0]`` may be None (gate 1 then uses only its group).  The cascade
    is built as: odd gates in parallel, helpers u_i = AND(g_{i-1} | g_i) for odd
    i >= 3, a recursive Toffoli cascade over (t_1, u_3, t_3, u_5, ...), helper
    uncompute, then even gates in parallel.  ``anc`` must hold
    ``ladder_ancilla_count(n)`` qubits at 0; helpers are XORed in and out, so
    their value is preserved on every input.
    """
    t = list(targets)
    g = [list(grp) for grp in groups]
    n = len(g)
    pool = list(dict.fromkeys([*(q for q in t if q is not None), *(q for grp in g for q in grp),
                               *anc, *pool]))

    def spec(i: int) -> tuple[list[int], int]:
        ctrls = ([t[i - 1]] if t[i - 1] is not None else []) + g[i - 1]
        return ctrls, t[i]

    if n <= 3:
        return [gate for i in range(1, n + 1) for gate in _parallel_mcx([spec(i)], pool)]
    if n % 2:
        # odd length: cascade the first n-1 gates, then the last one on its own
        return [*ascending_gates(t[:-1], g[:-1], anc, pool), *_parallel_mcx([spec(n)], pool)]
    mids = list(range(3, n + 1, 2))
    m = len(mids)
    if len(anc) < ladder_ancilla_count(n):
        raise AncillaError(f"cascade of {n} gates needs {ladder_ancilla_count(n)} helpers, got {len(anc)}")
    u, deeper = list(anc[:m]), list(anc[m:])
    helpers = _parallel_mcx([(g[i - 2] + g[i - 1], uj) for i, uj in zip(mids, u)], pool)
    middle = ascending_gates([t[1], *(t[i] for i in mids)], [[uj] for uj in u], deeper, pool)
    return [
        *_parallel_mcx([spec(i) for i in range(1, n + 1, 2)], pool),
        *helpers, *middle, *helpers[::-1],
        *_parallel_mcx([spec(i) for i in range(2, n + 1, 2)], pool),
    ]


def _split_k(k: int, qubits: Sequence[int]) -> tuple[list[int], list[list[int]]]:
    q = list(qubits)
    if k < 1 or (len(q) - 1) % k:
        raise CircuitError(f"a C^{k}X ladder acts on kn+1 qubits, got {len(q)}")
    n = (len(q) - 1) // k
    return [q[k * i] for i in range(n + 1)], [q[k * (i - 1) + 1: k * i] for i in range(1, n + 1)]


def ladderk_gates(k: int, qubits: Sequence[int], anc: Sequence[int], pool: Iterable[int] = ()) -> list[Gate]:
    """L_k on kn+1 qubits (top-down semantics)."""
    if k == 1:
        return ladder1_gates(qubits)
    t, groups = _split_k(k, qubits)
    return ascending_gates(t, groups, anc, pool)[::-1]


def naive_ladderk_gates(k: int, qubits: Sequence[int], pool: Iterable[int] = ()) -> list[Gate]:
    """Reference ladder: the n C^kX gates one after another, last gate first."""
    t, groups = _split_k(k, qubits)
    pool = list(dict.fromkeys([*qubits, *pool]))
    out: list[Gate] = []
    for i in range(len(groups), 0, -1):
        out += _parallel_mcx([([t[i - 1], *groups[i - 1]], t[i])], pool)
    return out


def build_ladder2_ancilla(qubits: Sequence[int], ledger: AncillaLedger, adjoint: bool = False) -> Circuit:
    return build_ladderk(2, qubits, ledger, adjoint)


def build_ladderk(k: int, qubits: Sequence[int], ledger: AncillaLedger, adjoint: bool = False) -> Circuit:
    qubits = list(qubits)
    if k == 1:
        gates = ladder1_gates(qubits)
        anc: list[int] = []
        spare: list[int] = []
    else:
        n = len(_split_k(k, qubits)[1])
        anc = ledger.borrow_clean(ladder_ancilla_count(n))
        # C^kX gates with k >= 3 need one idle helper when the ladder is too short to lend one
        spare = ledger.borrow_dirty(1, exclude=[*qubits, *anc]) if k >= 3 and n <= 1 else []
        gates = ladderk_gates(k, qubits, anc, spare)
        ledger.release([*anc, *spare])
    if adjoint:
        gates = gates[::-1]
    return _assemble(ledger.num_qubits, gates, [
        ("ladder", "data", qubits), ("ancilla", "clean_ancilla", anc), ("spare", "dirty_ancilla", spare),
    ])


def build_promise_ladderk(k: int, qubits: Sequence[int], promise_qubits: Sequence[int],
                          adjoint: bool = False, num_qubits: int | None = None) -> Circuit:
    """Strong promise gate whose target is L_k: the promise register stands in for
    the clean helpers and is left unchanged on every input."""
    qubits, promise = list(qubits), list(promise_qubits)
    n = len(_split_k(k, qubits)[1])
    if len(promise) != n:
        raise CircuitError(f"promise register must hold {n} qubits, got {len(promise)}")
    if set(promise) & set(qubits):
        raise CircuitError("promise register overlaps the ladder")
    gates = ladderk_gates(k, qubits, promise[: ladder_ancilla_count(n)] if k > 1 else [], promise)
    if adjoint:
        gates = gates[::-1]
    total = num_qubits or max(*qubits, *promise) + 1
    return _assemble(total, gates, [("ladder", "target", qubits), ("promise", "promise", promise)])


def v2_naive_gates(qubits: Sequence[int]) -> list[Gate]:
    """V-shaped reference for V_2: Toffolis bottom-up to the second-to-last, then all top-down."""
    t, groups = _split_k(2, qubits)
    n = len(groups)
    asc = [ccx(t[i - 1], groups[i - 1][0], t[i]) for i in range(1, n)]
    desc = [ccx(t[i - 1], groups[i - 1][0], t[i]) for i in range(n, 0, -1)]
    return asc + desc


def build_v2_naive(qubits: Sequence[int], num_qubits: int | None = None) -> Circuit:
    qubits = list(qubits)
    if len(qubits) < 3 or len(qubits) % 2 == 0:
        raise CircuitError(f"V_2 needs an odd number (>= 3) of qubits, got {len(qubits)}")
    return _assemble(num_qubits or max(qubits) + 1, v2_naive_gates(qubits), [("ladder", "data", qubits)])
