"""Promise gates and the machinery that trades ancillas for controls.

A promise gate acts as its target unitary only while a promise register holds
zeros.  A weak one may do anything otherwise; a strong one always leaves the
promise register (and its helpers) as it found it.  The builders here:

* add controls to a unitary through a toggle-detection flag qubit, clean or dirty;
* run a unitary whose helpers are the (X-conjugated) control qubits themselves;
* control a whole layer of disjoint involutions at logarithmic depth;
* control ``V^-1 U V`` by controlling only ``U``, with the control register
  standing in for clean helpers of ``V``;
* the controlled ripple-carry adder built from that last trick.

Templates hand out plain gate lists over fixed qubits; helper qubits are passed
in at build time so the same template can run on clean ancillas or on a
promise register.
"""
from __future__ import annotations

from collections.abc import Callable, Iterable, Sequence
from dataclasses import dataclass

from .ancilla import AncillaError, AncillaLedger
from .circuit_ir import Circuit, CircuitError, Gate, RegisterMap, ResourceReport, ccx, cx, x
from .primitives import ascending_gates, fanout1_gates, ladder_ancilla_count, mcx_gates
from .rev_sim import truth_table

GateBuilder = Callable[[Sequence[int]], list[Gate]]


@dataclass(frozen=True)
class GateTemplate:
    """A unitary on ``qubits`` that may use ``clean`` helper qubits.

    ``build(helpers)`` returns the forward gates, ``build_adjoint(helpers)`` the
    inverse (defaults to the reversed forward list).  ``flip`` names qubits P with
    P U^-1 P = U, which is what lets a non-involutory unitary run off a dirty flag.
    """

    qubits: tuple[int, ...]
    build: GateBuilder
    build_adjoint: GateBuilder | None = None
    clean: int = 0
    involutory: bool = False
    strong: bool = True
    flip: tuple[int, ...] | None = None
    name: str = "U"

    def forward(self, helpers: Sequence[int] = ()) -> list[Gate]:
        return list(self.build(list(helpers)))

    def adjoint(self, helpers: Sequence[int] = ()) -> list[Gate]:
        if self.build_adjoint is not None:
            return list(self.build_adjoint(list(helpers)))
        return self.forward(helpers)[::-1]


def gate_template(gates: Sequence[Gate], *, involutory: bool | None = None, flip=None, name="U") -> GateTemplate:
    """Template for a fixed helper-free gate list."""
    gates = list(gates)
    qubits = tuple(dict.fromkeys(q for g in gates for q in g.qubits))
    if involutory is None:
        involutory = _is_involution(gates)
    return GateTemplate(qubits, lambda _h: list(gates), clean=0, involutory=involutory,
                        flip=tuple(flip) if flip is not None else None, name=name)


@dataclass(frozen=True)
class TradeResult:
    circuit: Circuit
    report: ResourceReport
    k: int
    clean_used: int
    dirty_used: int


# --- gate-level helpers -----------------------------------------------------------


def _support(gates: Iterable[Gate]) -> list[int]:
    return list(dict.fromkeys(q for g in gates for q in g.qubits))


def _is_involution(gates: Sequence[Gate], limit: int = 16) -> bool:
    """Exhaustive U·U == I check on the gates' own support (skipped above ``limit`` qubits)."""
    support = _support(gates)
    if len(support) > limit:
        return True
    idx = {q: i for i, q in enumerate(support)}
    local = [Gate(tuple(idx[c] for c in g.controls), idx[g.target]) for g in gates]
    table = truth_table(Circuit(len(support), tuple(local + local)))
    return all(table(v) == v for v in range(1 << len(support)))


def _layers(gates: Sequence[Gate]) -> list[list[Gate]]:
    level: dict[int, int] = {}
    out: list[list[Gate]] = []
    for g in gates:
        d = max((level.get(q, 0) for q in g.qubits), default=0)
        for q in g.qubits:
            level[q] = d + 1
        if d == len(out):
            out.append([])
        out[d].append(g)
    return out


def control_gates(gates: Sequence[Gate], c: int, pool: Iterable[int] = ()) -> list[Gate]:
    """Add control ``c`` to every gate; a Toffoli becomes four Toffolis around a dirty helper from ``pool``."""
    pool = list(dict.fromkeys(pool))
    out: list[Gate] = []
    for g in gates:
        if c in g.qubits:
            raise CircuitError(f"control {c} is acted on by {g}")
        if len(g.controls) < 2:
            out.append(Gate((*g.controls, c), g.target))
            continue
        a, b = g.controls
        e = next((q for q in pool if q not in (a, b, g.target, c)), None)
        if e is None:
            raise AncillaError("a controlled Toffoli needs one dirty helper")
        out += mcx_gates([a, b, c], g.target, [e])
    return out


def _balanced_split(elems: Sequence[list[Gate]], parts: int) -> list[list[list[Gate]]]:
    """Greedy split balancing qubit counts; element order is kept inside each part."""
    sizes = [len(_support(e)) for e in elems]
    load = [0] * parts
    owner = [0] * len(elems)
    for i in sorted(range(len(elems)), key=lambda i: -sizes[i]):
        j = min(range(parts), key=lambda j: load[j])
        owner[i] = j
        load[j] += sizes[i]
    return [[e for e, o in zip(elems, owner) if o == j] for j in range(parts)]


def _has_toffoli(elem: Sequence[Gate]) -> bool:
    return any(len(g.controls) == 2 for g in elem)


def controlled_layer_gates(c: int, elems: Sequence[Sequence[Gate]], idle: Iterable[int] = ()) -> list[Gate]:
    """Singly-controlled product of disjoint involutions.

    Each element gets its own copy of the control through a fan-out onto a
    borrowed qubit d; running ``fanout, C_d U, fanout, C_d U`` applies U^c
    whatever d held.  Elements are grouped so that every group borrows from
    qubits that are idle while it runs.
    """
    elems = [list(e) for e in elems if e]
    if not elems:
        return []
    busy = {q for e in elems for q in _support(e)}
    idle = [q for q in dict.fromkeys(idle) if q != c and q not in busy]
    if len(elems) == 1:
        return control_gates(elems[0], c, idle)
    plan = None
    for parts in range(1, len(elems) + 1):
        groups = [g for g in _balanced_split(elems, parts) if g]
        plan = []
        for j, grp in enumerate(groups):
            others = [q for h, g in enumerate(groups) if h != j for e in g for q in _support(e)]
            supply = others + idle
            if sum(1 + _has_toffoli(e) for e in grp) > len(supply):
                plan = None
                break
            plan.append((grp, supply))
        if plan is not None:
            break
    if plan is None:
        raise AncillaError("not enough idle qubits to control this layer")
    out: list[Gate] = []
    for grp, supply in plan:
        it = iter(supply)
        copies: list[int] = []
        body: list[Gate] = []
        for e in grp:
            d = next(it)
            copies.append(d)
            body += control_gates(e, d, [next(it)] if _has_toffoli(e) else [])
        fo = fanout1_gates(c, copies)
        out += [*fo, *body, *fo, *body]
    return out


def controls_parallel_gates(controls: Sequence[int], elems: Sequence[Sequence[Gate]],
                            idle: Iterable[int] = ()) -> list[Gate]:
    """C^k of a product of disjoint involutions, without clean ancillas.

    For k >= 2 the layer is halved; each half takes a flag qubit from the other
    half, toggles it with C^kX twice and runs the singly-controlled half after
    each toggle, so the half is applied exactly when all controls are set.
    """
    controls = list(controls)
    elems = [list(e) for e in elems if e]
    if not controls:
        return [g for e in elems for g in e]
    busy = {q for e in elems for q in _support(e)}
    if busy & set(controls):
        raise CircuitError("controls overlap the layer")
    idle = [q for q in dict.fromkeys(idle) if q not in busy and q not in controls]
    if len(controls) == 1:
        return controlled_layer_gates(controls[0], elems, [*idle])
    if not elems:
        return []
    if len(elems) == 1:
        if not idle:
            raise AncillaError("a single-element layer needs one idle qubit as flag")
        flag = idle[0]
        elem = elems[0]
        toggle = mcx_gates(controls, flag, [*_support(elem), *idle[1:]])
        body = control_gates(elem, flag, [*controls, *idle[1:]])
        return [*toggle, *body, *toggle, *body]
    out: list[Gate] = []
    halves = _balanced_split(elems, 2)
    for j in (0, 1):
        mine, other = halves[j], halves[1 - j]
        other_q = [q for e in other for q in _support(e)]
        flag = other_q[0]
        mine_q = [q for e in mine for q in _support(e)]
        toggle = mcx_gates(controls, flag, [*mine_q, *other_q[1:], *idle])
        body = controlled_layer_gates(flag, mine, [*other_q[1:], *controls, *idle])
        out += [*toggle, *body, *toggle, *body]
    return out


def _check_layer(layer: Sequence[Sequence[Gate]]) -> list[list[Gate]]:
    elems = [list(e.gates) if isinstance(e, Circuit) else list(e) for e in layer]
    seen: set[int] = set()
    for e in elems:
        s = set(_support(e))
        if s & seen:
            raise CircuitError(f"layer elements overlap on qubits {sorted(s & seen)}")
        seen |= s
        if not _is_involution(e):
            raise CircuitError("layer element is not an involution")
    return elems


def _circuit(num_qubits: int, gates: Iterable[Gate], named) -> Circuit:
    return Circuit(num_qubits, tuple(gates), RegisterMap.build(num_qubits, named))


def _width(ledger: AncillaLedger | None, num_qubits: int | None, qubits: Iterable[int]) -> int:
    if ledger is not None:
        return ledger.num_qubits
    return num_qubits or max(qubits) + 1


def add_controls_parallel(k: int, controls: Sequence[int], layer: Sequence, ledger: AncillaLedger | None = None,
                          num_qubits: int | None = None) -> Circuit:
    controls = list(controls)
    if k != len(controls):
        raise CircuitError(f"k={k} but {len(controls)} controls given")
    elems = _check_layer(layer)
    touched = [*controls, *(q for e in elems for q in _support(e))]
    n = _width(ledger, num_qubits, touched)
    flag: list[int] = []
    idle: list[int] = []
    if k >= 2 and len(elems) == 1:
        if ledger is not None:
            flag = ledger.borrow_dirty(1, exclude=touched)
            idle = flag
        else:
            idle = [q for q in range(n) if q not in set(touched)]
    elif k == 1:
        idle = [q for q in range(n) if q not in set(touched)] if ledger is None else []
    gates = controls_parallel_gates(controls, elems, idle)
    if ledger is not None:
        ledger.release(flag)
    used = {q for g in gates for q in g.qubits} - set(touched)
    return _circuit(n, gates, [
        ("controls", "control", controls),
        ("layer", "target", [q for e in elems for q in _support(e)]),
        ("flag", "dirty_ancilla", sorted(used)),
    ])


# --- toggle detection -------------------------------------------------------------


def _kx(controls: Sequence[int], target: int, spare: Iterable[int]) -> list[Gate]:
    return mcx_gates(controls, target, [q for q in dict.fromkeys(spare) if q != target and q not in controls])


def build_toggle_detect_clean(k: int, controls: Sequence[int], inner: GateTemplate,
                              ledger: AncillaLedger) -> Circuit:
    """C^kU as C^kX onto a clean flag, flag-controlled U, C^kX again."""
    controls = list(controls)
    if k != len(controls):
        raise CircuitError(f"k={k} but {len(controls)} controls given")
    anc = ledger.borrow_clean(1)
    helpers = ledger.borrow_clean(inner.clean)
    f = anc[0]
    toggle = _kx(controls, f, [*inner.qubits, *helpers])
    body = control_gates(inner.forward(helpers), f, [*controls, *inner.qubits, *helpers])
    ledger.release([*anc, *helpers])
    return _circuit(ledger.num_qubits, [*toggle, *body, *toggle], [
        ("controls", "control", controls), ("target", "target", inner.qubits),
        ("ancilla", "clean_ancilla", [*anc, *helpers]),
    ])


def build_toggle_detect_dirty(k: int, controls: Sequence[int], inner: GateTemplate,
                              ledger: AncillaLedger) -> Circuit:
    """C^kU with a dirty flag psi.

    Involutory U: ``C^kX(psi), C_psi U, C^kX(psi), C_psi U``.  Otherwise U needs
    a flip set P with P U^-1 P = U and the sequence is
    ``C_psi U, C^k-fanout(P + psi), C_psi U^-1, C^k-fanout(P + psi)``.
    """
    controls = list(controls)
    if k != len(controls):
        raise CircuitError(f"k={k} but {len(controls)} controls given")
    if not inner.involutory and inner.flip is None:
        raise CircuitError("dirty toggle needs an involutory inner or a flip set pairing U with its adjoint")
    helpers = ledger.borrow_clean(inner.clean)
    psi = ledger.borrow_dirty(1, exclude=[*controls, *inner.qubits, *helpers])
    p = psi[0]
    spare = [*inner.qubits, *helpers]
    if inner.involutory:
        toggle = _kx(controls, p, spare)
        body = control_gates(inner.forward(helpers), p, [*controls, *spare])
        gates = [*toggle, *body, *toggle, *body]
    else:
        flip = list(inner.flip)
        spread = fanout1_gates(p, flip) if flip else []
        fan = [*spread, *_kx(controls, p, spare), *spread]
        fwd = control_gates(inner.forward(helpers), p, [*controls, *spare])
        back = control_gates(inner.adjoint(helpers), p, [*controls, *spare])
        gates = [*fwd, *fan, *back, *fan]
    ledger.release([*helpers, *psi])
    return _circuit(ledger.num_qubits, gates, [
        ("controls", "control", controls), ("target", "target", inner.qubits),
        ("ancilla", "clean_ancilla", helpers), ("flag", "dirty_ancilla", psi),
    ])


def build_conditionally_clean(k: int, controls: Sequence[int], inner: GateTemplate,
                              ledger: AncillaLedger, dirty: bool = False) -> Circuit:
    """C^kU where U borrows the controls themselves (X-conjugated) as its zeroed helpers.

    The helpers read zero exactly when every control is set, which is also the
    only case in which the flag lets U act.
    """
    controls = list(controls)
    if k != len(controls):
        raise CircuitError(f"k={k} but {len(controls)} controls given")
    if inner.clean > k:
        raise CircuitError(f"inner needs {inner.clean} promise qubits but only {k} controls are available")
    if dirty and not (inner.involutory and inner.strong):
        raise CircuitError("dirty flag needs an involutory inner with a strong promise")
    promise = controls[: inner.clean]
    neg = [x(c) for c in controls]
    spare = list(inner.qubits)
    if dirty:
        flag = ledger.borrow_dirty(1, exclude=[*controls, *inner.qubits])
        f = flag[0]
        toggle = _kx(controls, f, spare)
        fwd = control_gates(inner.forward(promise), f, [*controls, *spare])
        back = control_gates(inner.adjoint(promise), f, [*controls, *spare])
        gates = [*toggle, *neg, *fwd, *neg, *toggle, *neg, *back, *neg]
        role = "dirty_ancilla"
    else:
        flag = ledger.borrow_clean(1)
        f = flag[0]
        toggle = _kx(controls, f, spare)
        body = control_gates(inner.forward(promise), f, [*controls, *spare])
        gates = [*toggle, *neg, *body, *neg, *toggle]
        role = "clean_ancilla"
    ledger.release(flag)
    return _circuit(ledger.num_qubits, gates, [
        ("controls", "control", controls), ("target", "target", inner.qubits), ("flag", role, flag),
    ])


# --- ancillas for controls ------------------------------------------------------


def _controlled_by_flag(f: int, gates: Sequence[Gate], everything: Sequence[int]) -> list[Gate]:
    out: list[Gate] = []
    for layer in _layers(gates):
        busy = {q for g in layer for q in g.qubits}
        idle = [q for q in everything if q not in busy and q != f]
        out += controlled_layer_gates(f, [[g] for g in layer], idle)
    return out


def trade_ancillas_for_controls(k: int, controls: Sequence[int], V: GateTemplate, U: GateTemplate, m: int,
                                ledger: AncillaLedger, dirty: bool = False) -> TradeResult:
    """C^k(V^-1 U V) where V and V^-1 stay uncontrolled.

    The controls, X-conjugated, serve as up to k of the m zeroed helpers that V
    and U need; only U is controlled, by a flag holding the AND of the controls.
    Clean usage is one flag plus max(0, m - k) helpers, or just the helpers when
    the flag is dirty (which needs U*U = I and strong templates).
    """
    controls = list(controls)
    if k != len(controls):
        raise CircuitError(f"k={k} but {len(controls)} controls given")
    if max(V.clean, U.clean) > m:
        raise CircuitError(f"templates need {max(V.clean, U.clean)} helpers, m={m}")
    data = list(dict.fromkeys([*V.qubits, *U.qubits]))
    if k == 0:
        helpers = ledger.borrow_clean(m)
        gates = [*V.forward(helpers[:V.clean]), *U.forward(helpers[:U.clean]), *V.adjoint(helpers[:V.clean])]
        ledger.release(helpers)
        circ = _circuit(ledger.num_qubits, gates, [("data", "target", data), ("ancilla", "clean_ancilla", helpers)])
        return TradeResult(circ, circ.report(), 0, len(helpers), 0)
    if dirty and not (U.involutory and U.strong and V.strong):
        raise CircuitError("dirty trade needs an involutory U and strong-promise templates")
    extra = ledger.borrow_clean(max(0, m - k))
    helpers = [*controls[:m], *extra]
    if dirty:
        flag = ledger.borrow_dirty(1, exclude=[*controls, *data, *extra])
    else:
        flag = ledger.borrow_clean(1)
    f = flag[0]
    everything = list(dict.fromkeys([*data, *controls, *extra]))
    neg = [x(c) for c in controls]
    toggle = _kx(controls, f, [*data, *extra])
    v = V.forward(helpers[:V.clean])
    v_inv = V.adjoint(helpers[:V.clean])
    core = [*neg, *v, *_controlled_by_flag(f, U.forward(helpers[:U.clean]), everything), *v_inv, *neg]
    if dirty:
        back = [*neg, *v, *_controlled_by_flag(f, U.adjoint(helpers[:U.clean]), everything), *v_inv, *neg]
        gates = [*toggle, *core, *toggle, *back]
    else:
        gates = [*toggle, *core, *toggle]
    ledger.release([*extra, *flag])
    clean = [*extra] if dirty else [*extra, *flag]
    circ = _circuit(ledger.num_qubits, gates, [
        ("controls", "control", controls), ("data", "target", data),
        ("ancilla", "clean_ancilla", clean), ("flag", "dirty_ancilla", flag if dirty else []),
    ])
    return TradeResult(circ, circ.report(), k, len(clean), len(flag) if dirty else 0)


# --- controlled ripple-carry adder ---------------------------------------------------


def adder_slices(a: Sequence[int], b: Sequence[int], z: int) -> list[list[Gate]]:
    """The eight slices of the ancilla-free ripple-carry adder (b += a, z ^= carry).

    Slices 3 and 5 are the ascending and descending Toffoli cascades, slices 2
    and 7 the CX cascades on ``a``; the sum is the slices applied in order.
    """
    n = len(a)
    if n == 1:
        return [[], [], [], [ccx(a[0], b[0], z)], [], [], [], [cx(a[0], b[0])]]
    u1 = [cx(a[i], b[i]) for i in range(1, n)] + [cx(a[n - 1], z)]
    u2 = [cx(a[i], a[i + 1]) for i in range(n - 2, 0, -1)]
    u3 = [ccx(a[i], b[i], a[i + 1]) for i in range(n - 1)]
    u4 = [ccx(a[n - 1], b[n - 1], z)] + [cx(a[i], b[i]) for i in range(1, n)] + [x(b[i]) for i in range(1, n - 1)]
    u6 = [x(b[i]) for i in range(1, n - 1)]
    u8 = [cx(a[i], b[i]) for i in range(n)]
    return [u1, u2, u3, u4, u3[::-1], u6, u2[::-1], u8]


def _controlled_slice(controls: Sequence[int], gates: Sequence[Gate], everything: Sequence[int]) -> list[Gate]:
    out: list[Gate] = []
    for layer in _layers(gates):
        busy = {q for g in layer for q in g.qubits}
        out += controls_parallel_gates(controls, [[g] for g in layer], [q for q in everything if q not in busy])
    return out


def build_controlled_qq_adder(k: int, controls: Sequence[int], a_reg: Sequence[int], b_reg: Sequence[int],
                              z_qubit: int, ledger: AncillaLedger) -> Circuit:
    """C^k of b += a (mod 2^n) with the carry XORed into z.

    Only the short slices are controlled directly; the two Toffoli cascades
    conjugate the middle slice and stay uncontrolled, with the controls lending
    themselves as the cascade's helper qubits.
    """
    controls, a, b = list(controls), list(a_reg), list(b_reg)
    n = len(a)
    if k != len(controls):
        raise CircuitError(f"k={k} but {len(controls)} controls given")
    if n < 1 or len(b) != n:
        raise CircuitError("a and b must be non-empty registers of equal width")
    regs = [*controls, *a, *b, z_qubit]
    if len(set(regs)) != len(regs):
        raise CircuitError("adder registers overlap")
    u1, u2, u3, u4, _u5, u6, u7, u8 = adder_slices(a, b, z_qubit)
    everything = [*a, *b, z_qubit, *controls]
    m = ladder_ancilla_count(n - 1)
    V = GateTemplate(tuple(a + b[:-1]), lambda h: ascending_gates(a, [[q] for q in b[:-1]], h), clean=m,
                     strong=True, name="carry cascade")
    U = GateTemplate(tuple(_support(u4)) if u4 else (), lambda _h: list(u4), clean=0,
                     involutory=False, name="middle slice")
    trade = trade_ancillas_for_controls(k, controls, V, U, m, ledger)
    clean = trade.circuit.registers.by_role("clean_ancilla")
    gates = [
        *_controlled_slice(controls, u1, everything), *u2, *trade.circuit.gates,
        *_controlled_slice(controls, u6, everything), *u7, *_controlled_slice(controls, u8, everything),
    ]
    return _circuit(ledger.num_qubits, gates, [
        ("controls", "control", controls), ("a", "data", a), ("b", "target", b), ("z", "target", [z_qubit]),
        ("ancilla", "clean_ancilla", clean),
    ])
