"""Comparators, incrementers and constant adders over {X, CX, CCX}.

Everything here bottoms out in the carry operator V2 on wires
``t0, g1, t1, ..., gK, tK``: it XORs into ``tK`` the carry that ripples up from
``t0`` through the propagate bits ``g``,

    tK ^= XOR_{j<K} t_j * g_{j+1} * ... * g_K,

and leaves every other wire alone.  V2 is linear in the ``t`` inputs, which
is what lets a classical comparison run on borrowed (dirty) ``t`` wires.
"""
from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass

from .ancilla import AncillaError, AncillaLedger
from .circuit_ir import Circuit, CircuitError, Gate, RegisterMap, ccx, cx, x
from .primitives import (_parallel_mcx, ascending_gates, fanout1_gates, ladder1_gates, ladder_ancilla_count,
                         mcx_gates)
from .promise import controlled_layer_gates

CUTOFF = 8


def _inv(gates: Sequence[Gate]) -> list[Gate]:
    return list(gates)[::-1]


def _xs(qubits) -> list[Gate]:
    return [x(q) for q in qubits]


def _kx(controls, target, spare) -> list[Gate]:
    controls = list(controls)
    return mcx_gates(controls, target, [q for q in dict.fromkeys(spare) if q != target and q not in controls])


def _circuit(num_qubits: int, gates, named) -> Circuit:
    return Circuit(num_qubits, tuple(gates), RegisterMap.build(num_qubits, named))


def _borrow(ledger: AncillaLedger | None, data: Sequence[int], clean: int = 0, dirty: int = 1):
    """Clean and dirty ancillas for a standalone build; without a ledger they sit right after the data."""
    width = len(data)
    if ledger is None:
        ledger = AncillaLedger(width + clean + dirty, clean=range(width, width + clean),
                               dirty=range(width + clean, width + clean + dirty))
    cl = ledger.borrow_clean(clean)
    dr = ledger.borrow_dirty(dirty, exclude=[*data, *cl])
    ledger.release([*cl, *dr])
    return ledger.num_qubits, cl, dr


# --- the carry operator V2 ---------------------------------------------------------


def v2_naive_gates(t: Sequence[int], g: Sequence[int]) -> list[Gate]:
    k = len(g)
    up = [ccx(t[i], g[i], t[i + 1]) for i in range(k - 1)]
    return [*up, ccx(t[k - 1], g[k - 1], t[k]), *up[::-1]] if k else []


def v2_ladder_gates(t: Sequence[int], g: Sequence[int], helpers: Sequence[int], pool=()) -> list[Gate]:
    """V2 as cascade, last Toffoli, cascade undone; needs ladder_ancilla_count(K-1) zeroed helpers."""
    k = len(g)
    if k <= 1:
        return v2_naive_gates(t, g)
    up = ascending_gates(t[:k], [[q] for q in g[:k - 1]], helpers, pool)
    return [*up, ccx(t[k - 1], g[k - 1], t[k]), *up[::-1]]


def _block_plan(npos: int, h: int) -> list[int] | None:
    """Block sizes (ragged block first) for the blocked V2 with ``h`` helpers, or None."""
    best = None
    for s in range(2, npos + 1):
        if s - 1 + ladder_ancilla_count(max(0, s - 2)) > h:
            break
        w = -(-npos // s)
        blocks = -(-npos // w)
        if blocks < 2 or ladder_ancilla_count(max(0, w - 2)) > h:
            continue
        best = [npos - w * (blocks - 1)] + [w] * (blocks - 1)
    return best


def v2_helper_need(k: int) -> int:
    """Smallest helper count for which v2_helper_gates stays logarithmic on K = k."""
    if k <= 1:
        return 0
    direct = ladder_ancilla_count(k - 1)
    for h in range(direct + 1):
        if h == direct or _block_plan(k + 1, h) is not None:
            return h
    return direct


def v2_helper_gates(t: Sequence[int], g: Sequence[int], helpers: Sequence[int]) -> list[Gate]:
    """V2 using zeroed ``helpers`` (about 2*sqrt(K) of them), which it always restores.

    The positions are cut into blocks.  Each block's local carry is computed
    into its top ``t`` wire using the next block's ``g`` wires, X-conjugated, as
    helpers; those read zero exactly when the next block propagates, which is
    the only case in which the local carry is looked at.  Blocks run in two
    rounds so that no block lends wires it is reading.  A short block-level V2
    over the local carries and the block-propagate ANDs then finishes the job.
    """
    t, g, helpers = list(t), list(g), list(helpers)
    k = len(g)
    if k <= 1:
        return v2_naive_gates(t, g)
    if len(helpers) >= ladder_ancilla_count(k - 1):
        return v2_ladder_gates(t, g, helpers)
    sizes = _block_plan(k + 1, len(helpers))
    if sizes is None:
        return v2_naive_gates(t, g)
    bounds = []
    lo = 0
    for size in sizes:
        bounds.append((lo, lo + size - 1))
        lo += size
    s = len(bounds)

    def local(b: int, lend: Sequence[int]) -> list[Gate]:
        l, r = bounds[b]
        return v2_ladder_gates(t[l:r + 1], g[l:r], lend)

    def block_g(b: int) -> list[int]:
        l, r = bounds[b]
        return g[l - 1:r] if l else g[:r]

    rounds: list[Gate] = []
    for parity in (0, 1):
        for b in range(parity, s - 1, 2):
            lend = block_g(b + 1)
            rounds += [*_xs(lend), *local(b, lend), *_xs(lend)]
    last = local(s - 1, helpers)
    flags = helpers[:s - 1]
    ands = _parallel_mcx([(block_g(b), f) for b, f in zip(range(1, s), flags)], t)
    tops = [t[r] for _l, r in bounds]
    chain = v2_ladder_gates(tops, flags, helpers[s - 1:])
    return [*rounds, *last, *ands, *chain, *_inv(ands), *_inv(rounds)]


def _split_point(k: int) -> int:
    for p in range(2, k):
        if v2_helper_need(k - p) <= p:
            return p
    return k


def v2_free_gates(t: Sequence[int], g: Sequence[int]) -> list[Gate]:
    """V2 with no ancilla at all.

    The bottom p positions are split off.  Their ``g`` wires, X-conjugated, are
    zero exactly when the top carry matters, so they serve as the top part's
    helpers; a bottom ``t`` wire acts as a dirty flag holding the AND of those
    ``g`` wires.  The bottom part, of size about 2*sqrt(K), recurses.
    """
    t, g = list(t), list(g)
    k = len(g)
    if k <= CUTOFF:
        return v2_naive_gates(t, g)
    p = _split_point(k)
    if p >= k - 1:
        return v2_naive_gates(t, g)
    m = k - p
    gb = g[m:]
    psi = t[m + 1]
    toggle = _kx(gb, psi, [t[0], *t[1:m + 1]])
    top = v2_helper_gates(t[:m + 1], g[:m], gb)
    hit = ccx(psi, t[m], t[k])
    return [
        *toggle, *_xs(gb), *top, hit, *_xs(gb), *toggle, *_xs(gb), hit, *_inv(top), *_xs(gb),
        *v2_free_gates(t[m + 1:], g[m + 1:]),
    ]


def controlled_v2_gates(controls: Sequence[int], t: Sequence[int], g: Sequence[int], spare=()) -> list[Gate]:
    """C^k V2: only the last Toffoli of V2 carries the controls."""
    t, g, controls = list(t), list(g), list(controls)
    k = len(g)
    if k == 0:
        return []
    inner = v2_free_gates(t[:k], g[:k - 1]) if k > 1 else []
    last = _kx([*controls, t[k - 1], g[k - 1]], t[k], [*t[:k - 1], *g[:k - 1], *spare])
    return [*inner, *last, *_inv(inner)]


def _sqrt_promise(n: int) -> int:
    return 2 * math.isqrt(n - 1) + 2 if n > 1 else 2


def build_ctrl_promise_v2(control: int, promise: Sequence[int], v2_qubits: Sequence[int],
                          ledger: AncillaLedger | None = None, num_qubits: int | None = None) -> Circuit:
    """Controlled strong promise gate for V2: the promise register is the helper pool."""
    q, promise = list(v2_qubits), list(promise)
    if len(q) < 3 or len(q) % 2 == 0:
        raise CircuitError(f"V2 acts on 2n+1 qubits, got {len(q)}")
    n = (len(q) - 1) // 2
    if len(promise) != _sqrt_promise(n):
        raise CircuitError(f"promise register must hold {_sqrt_promise(n)} qubits, got {len(promise)}")
    if set(promise) & set(q) or control in promise or control in q:
        raise CircuitError("control, promise and data must be disjoint")
    t, g = q[0::2], q[1::2]
    inner = v2_helper_gates(t[:n], g[:n - 1], promise)
    last = _kx([control, t[n - 1], g[n - 1]], t[n], promise)
    total = ledger.num_qubits if ledger is not None else (num_qubits or max(*q, *promise, control) + 1)
    return _circuit(total, [*inner, *last, *_inv(inner)], [
        ("control", "control", [control]), ("v2", "target", q), ("promise", "promise", promise),
    ])


# --- quantum-quantum comparator ------------------------------------------------------


@dataclass(frozen=True)
class ComparatorSpec:
    n: int
    mode: str = "quantum_quantum"
    constant: int | None = None
    controls: int = 0

    def __post_init__(self):
        if self.mode not in ("quantum_quantum", "classical_quantum"):
            raise CircuitError(f"unknown comparator mode {self.mode!r}")
        if self.n < 1:
            raise CircuitError("comparator width must be at least 1")
        if (self.constant is not None) != (self.mode == "classical_quantum"):
            raise CircuitError("a constant is required exactly for classical-quantum comparison")
        if self.constant is not None and not 0 <= self.constant < 1 << self.n:
            raise CircuitError(f"constant {self.constant} does not fit in {self.n} bits")
        if self.controls < 0:
            raise CircuitError("control count must be non-negative")


def qq_less_gates(a: Sequence[int], b: Sequence[int], z: int, controls: Sequence[int] = ()) -> list[Gate]:
    """z ^= (a < b), optionally under controls; no ancilla.

    a < b is the carry out of ~a + b.  With p_i = x_i ^ y_i on the b wires and
    x_i ^ x_{i-1} on the a wires, the carry XOR x_{n-1} is exactly V2 over the
    interleaved wires, so one extra x_{n-1} write fixes up the result.
    """
    a, b, controls = list(a), list(b), list(controls)
    n = len(a)
    wires = [q for pair in zip(a, b) for q in pair] + [z]
    t, g = wires[0::2], wires[1::2]
    core = controlled_v2_gates(controls, t, g) if controls else v2_free_gates(t, g)
    fix = _kx([*controls, a[n - 1]], z, [*a[:n - 1], *b]) if controls else [cx(a[n - 1], z)]
    prep = [*(cx(a[i], b[i]) for i in range(n)), *ladder1_gates(a)]
    return [*_xs(a), *fix, *prep, *core, *_inv(prep), *_xs(a)]


def build_qq_comparator(spec: ComparatorSpec) -> Circuit:
    if spec.mode != "quantum_quantum" or spec.controls:
        raise CircuitError("expected an uncontrolled quantum-quantum spec")
    n = spec.n
    a, b, z = list(range(n)), list(range(n, 2 * n)), 2 * n
    return _circuit(2 * n + 1, qq_less_gates(a, b, z), [("a", "data", a), ("b", "data", b), ("z", "target", [z])])


def build_controlled_qq_comparator(spec: ComparatorSpec) -> Circuit:
    if spec.mode != "quantum_quantum" or spec.controls < 1:
        raise CircuitError("expected a controlled quantum-quantum spec")
    if spec.n < 2:
        raise CircuitError("a controlled comparator needs n > 1 to borrow its dirty wire")
    k, n = spec.controls, spec.n
    c = list(range(k))
    a, b, z = list(range(k, k + n)), list(range(k + n, k + 2 * n)), k + 2 * n
    return _circuit(k + 2 * n + 1, qq_less_gates(a, b, z, c), [
        ("controls", "control", c), ("a", "data", a), ("b", "data", b), ("z", "target", [z]),
    ])


# --- classical-quantum comparator ----------------------------------------------------


def _ghost_carry(controls, wires, gt, target, ghosts, spare) -> list[Gate]:
    """target ^= XOR_j gt_j * e_{j+1} * ... * e_last over the given bit positions.

    ``wires[j]`` holds e_j; where ``gt[j]`` is set, gt_j is the inverted wire
    and elsewhere it is zero.  The carry
    chain runs twice on borrowed ``ghosts`` standing in for the t inputs, once
    as found and once toggled by gt; V2 is linear in t, so only gt survives.
    """
    m = len(wires)
    if m == 0:
        return []
    g = list(wires[1:])
    t = [*ghosts[:m - 1], target]
    core = controlled_v2_gates(controls, t, g, spare) if controls else v2_free_gates(t, g)
    toggle = []
    for j in range(m - 1):
        if gt[j]:
            toggle.append(cx(wires[j], ghosts[j]))
            toggle.append(x(ghosts[j]))
    direct = []
    if gt[m - 1]:
        head = [x(wires[m - 1])]
        hit = _kx([*controls, wires[m - 1]], target, [*wires[:m - 1], *ghosts, *spare]) if controls \
            else [cx(wires[m - 1], target)]
        direct = [*head, *hit, *head]
    if not any(gt[:m - 1]):
        return direct
    return [*core, *toggle, *core, *_inv(toggle), *direct]


def cq_less_gates(c: int, a: Sequence[int], z: int, psi: int | None, controls: Sequence[int] = ()) -> list[Gate]:
    """z ^= (c < a) for a classical c, under optional controls, with one dirty wire ``psi``.

    With e_j = a_j XNOR c_j-bar (the propagate bit of a + ~c) and gt_j = a_j AND
    NOT c_j, the answer is the carry R_H of the high half XOR E_H * R_L, where
    E_H is the AND of the high e bits.  Each half's carry is computed with the
    other half's wires as ghost t inputs.
    """
    a, controls = list(a), list(controls)
    n = len(a)
    bits = [(c >> j) & 1 for j in range(n)]
    gt = [1 - b for b in bits]
    zeros = [a[j] for j in range(n) if not bits[j]]
    if n == 1:
        if bits[0]:
            return []
        return _kx([*controls, a[0]], z, [psi] if psi is not None else []) if controls else [cx(a[0], z)]
    if psi is None:
        raise AncillaError("a classical-quantum comparator needs one dirty wire")
    h = (n + 1) // 2
    lo, hi = a[:h], a[h:]
    low = _ghost_carry([], lo, gt[:h], psi, hi, [])
    high = _ghost_carry(controls, hi, gt[h:], z, lo, [psi])
    join = _kx([*controls, *hi, psi], z, lo)
    return [*_xs(zeros), *high, *low, *join, *low, *join, *_xs(zeros)]


def cq_geq_gates(t: int, a: Sequence[int], z: int, psi: int | None, controls: Sequence[int] = ()) -> list[Gate]:
    """z ^= (a >= t); t may equal 2^n."""
    if t == 0:
        return _kx(controls, z, [*a, *([psi] if psi is not None else [])]) if controls else [x(z)]
    if t > 1 << len(a):
        raise CircuitError("threshold exceeds register range")
    if t == 1 << len(a):
        return []
    return cq_less_gates(t - 1, a, z, psi, controls)


def build_cq_comparator(spec: ComparatorSpec, ledger: AncillaLedger | None = None) -> Circuit:
    if spec.mode != "classical_quantum" or spec.controls:
        raise CircuitError("expected an uncontrolled classical-quantum spec")
    return _build_cq_comparator(spec, ledger)


def build_controlled_cq_comparator(spec: ComparatorSpec, ledger: AncillaLedger | None = None) -> Circuit:
    if spec.mode != "classical_quantum" or spec.controls < 1:
        raise CircuitError("expected a controlled classical-quantum spec")
    return _build_cq_comparator(spec, ledger)


def _build_cq_comparator(spec: ComparatorSpec, ledger: AncillaLedger | None) -> Circuit:
    k, n = spec.controls, spec.n
    c = list(range(k))
    a, z = list(range(k, k + n)), k + n
    total, _, d = _borrow(ledger, [*c, *a, z])
    return _circuit(total, cq_less_gates(spec.constant, a, z, d[0], c), [
        ("controls", "control", c), ("a", "data", a), ("z", "target", [z]), ("dirty", "dirty_ancilla", d),
    ])


# --- incrementers ----------------------------------------------------------------------


@dataclass(frozen=True)
class IncrementerSpec:
    n: int
    controls: int = 0
    direction: str = "increment"

    def __post_init__(self):
        if self.n < 1:
            raise CircuitError("incrementer width must be at least 1")
        if self.controls < 0:
            raise CircuitError("control count must be non-negative")
        if self.direction not in ("increment", "decrement"):
            raise CircuitError(f"unknown direction {self.direction!r}")


def _need(m: int) -> int:
    """Zeroed helpers used by a seeded prefix-AND cascade over m target bits."""
    return 0 if m <= 1 else m - 1 + ladder_ancilla_count(m - 1)


def _prefix_and(seed: Sequence[int], xs: Sequence[int], pool: Sequence[int], spare=()) -> list[Gate]:
    """pool[i] ^= AND(seed) * x_0 * ... * x_i for i < len(xs) - 1 (pool must start at zero)."""
    m = len(xs)
    acc, anc = list(pool[:m - 1]), list(pool[m - 1:_need(m)])
    groups = [[*seed, xs[0]], *([q] for q in xs[1:m - 1])]
    return ascending_gates([None, *acc], groups, anc, [*xs, *pool, *seed, *spare])


def seeded_increment_gates(seed: Sequence[int], xs: Sequence[int], pool: Sequence[int], spare=()) -> list[Gate]:
    """xs += AND(seed), correct whenever the first _need(len(xs)) pool wires are zero."""
    seed, xs, pool = list(seed), list(xs), list(pool)
    m = len(xs)
    bump = _kx(seed, xs[0], [*xs[1:], *pool, *spare])
    if m == 1:
        return bump
    if len(pool) < _need(m):
        raise AncillaError(f"increment of {m} bits needs {_need(m)} helpers, got {len(pool)}")
    up = _prefix_and(seed, xs, pool, spare)
    spread = [cx(pool[i], xs[i + 1]) for i in range(m - 1)]
    flip = _xs(xs[:m - 1])
    return [*up, *spread, *bump, *flip, *_inv(up), *flip]


def tolerant_increment_gates(f: int, xs: Sequence[int], pool: Sequence[int]) -> list[Gate]:
    """xs += f; exact identity when f = 0 whatever the pool holds, correct for f = 1 on a zero pool."""
    xs, pool = list(xs), list(pool)
    m = len(xs)
    if m == 1:
        return [cx(f, xs[0])]
    if len(pool) < _need(m):
        raise AncillaError(f"increment of {m} bits needs {_need(m)} helpers, got {len(pool)}")
    up = _prefix_and([f], xs, pool)
    spread = controlled_layer_gates(f, [[cx(pool[i], xs[i + 1])] for i in range(m - 1)])
    flip = fanout1_gates(f, xs[:m - 1])
    return [*up, *spread, cx(f, xs[0]), *flip, *_inv(up), *flip]


def _block_sizes(beta: int, p: int) -> list[int] | None:
    """Block widths for the blocked promise increment of ``beta`` bits with ``p`` promise wires."""
    for w in range(beta, 0, -1):
        s = -(-beta // w)
        sizes = [w] * (s - 1) + [beta - w * (s - 1)]
        if _need(sizes[0]) > p:
            continue
        if s >= 2 and _need(sizes[1]) > sizes[0] + p - 1:
            continue
        if any(_need(sizes[b]) > sizes[b - 1] + sizes[b - 2] for b in range(2, s)):
            continue
        if s >= 3 and s - 1 + ladder_ancilla_count(s - 1) > p:
            continue
        return sizes
    return None


def weak_promise_increment_gates(c: int, target: Sequence[int], promise: Sequence[int]) -> list[Gate]:
    """target += c, correct whenever ``promise`` reads zero (about 2*sqrt(n) wires).

    The target is cut into blocks of about sqrt(n) bits.  Block b is bumped
    by the flag f_b = c AND (all lower blocks overflow); its carry cascade
    runs on the two blocks below it, which are known to be all ones (or, once
    bumped, all zeros) whenever f_b = 1.  The flags live in the promise wires.
    Blocks from the third on go in three rounds by index mod 3, so no block
    is bumped while another one borrows it; the flag chain is computed once
    before the rounds and cleared once after them.
    """
    target, promise = list(target), list(promise)
    sizes = _block_sizes(len(target), len(promise))
    if sizes is None:
        raise AncillaError(f"{len(promise)} promise wires cannot drive a {len(target)}-bit increment")
    blocks, lo = [], 0
    for size in sizes:
        blocks.append(target[lo:lo + size])
        lo += size
    s = len(blocks)
    out = seeded_increment_gates([c], blocks[0], promise, [])
    if s == 1:
        return out
    everyone = [*target, *promise, c]
    f2 = promise[0]
    z1 = _xs(blocks[0])
    test = [*z1, *_kx([c, *blocks[0]], f2, [q for q in everyone if q not in blocks[0]]), *z1]
    out += [*test, *tolerant_increment_gates(f2, blocks[1], [*blocks[0], *promise[1:]]), *test]
    if s == 2:
        return out
    flags, anc = promise[:s - 1], promise[s - 1:s - 1 + ladder_ancilla_count(s - 1)]
    chain = ascending_gates([None, *flags], [[c, *blocks[0]], *blocks[1:s - 1]], anc, everyone)
    done = {0, 1}

    def tests() -> list[Gate]:
        return _xs(q for j in sorted(done) if j < s - 1 for q in blocks[j])

    # the flags keep their values while blocks are bumped: a bumped block that
    # was all ones now reads all zeros, and one that was not has a zero flag
    out += [*tests(), *chain, *tests()]
    for r in range(3):
        todo = [b for b in range(2, s) if (b + 1) % 3 == r]
        for b in todo:
            lend = [*blocks[b - 1], *blocks[b - 2]]
            dress = _xs(q for j in (b - 1, b - 2) if j not in done for q in blocks[j])
            out += [*dress, *tolerant_increment_gates(flags[b - 1], blocks[b], lend), *dress]
        done.update(todo)
    out += [*tests(), *_inv(chain), *tests()]
    return out


def _toggle_fanout(controls: Sequence[int], psi: int, target: Sequence[int], spare=()) -> list[Gate]:
    """Flip ``target`` and ``psi`` together exactly when every control is set; psi may be dirty."""
    fo = fanout1_gates(psi, target)
    return [*fo, *_kx(controls, psi, [*target, *spare]), *fo]


def _wrap_increment(w: Sequence[Gate], controls: Sequence[int], psi: int, target: Sequence[int], spare=()) -> list[Gate]:
    """Turn ``w`` (target += psi) into target += AND(controls), restoring psi.

    Flipping the target turns y into -y-1, so W, flip, W^-1, flip nets +1
    when the controls are set and cancels to the identity otherwise.
    """
    flip = _toggle_fanout(controls, psi, target, spare)
    return [*w, *flip, *_inv(w), *flip]


def increment_naive_gates(xs: Sequence[int], dirty: Sequence[int] = (), controls: Sequence[int] = ()) -> list[Gate]:
    xs, controls = list(xs), list(controls)
    out: list[Gate] = []
    for i in range(len(xs) - 1, -1, -1):
        out += _kx([*controls, *xs[:i]], xs[i], [*xs[i + 1:], *dirty])
    return out


def _low_width(n: int) -> int:
    for alpha in range(2, n):
        if _block_sizes(n - alpha, alpha) is not None:
            return alpha
    return n


def increment_gates(xs: Sequence[int], dirty: Sequence[int] = ()) -> list[Gate]:
    """xs += 1 with one dirty wire.

    The low alpha ~ 2*sqrt(n) bits L serve, X-flipped, as the promise
    register of a g-controlled increment of the high bits H; the flip trick
    around it adds exactly AND(L) to H.  Then L is incremented with a dirty
    wire borrowed from H.
    """
    xs, dirty = list(xs), list(dirty)
    n = len(xs)
    if n <= CUTOFF:
        return increment_naive_gates(xs, dirty)
    alpha = _low_width(n)
    if alpha >= n - 1:
        return increment_naive_gates(xs, dirty)
    if not dirty:
        raise AncillaError("the incrementer needs one dirty wire")
    low, high, g = xs[:alpha], xs[alpha:], dirty[0]
    xl = _xs(low)
    w = [*xl, *weak_promise_increment_gates(g, high, low), *xl]
    return [*_wrap_increment(w, low, g, high), *increment_gates(low, high)]


def decrement_gates(xs: Sequence[int], dirty: Sequence[int] = ()) -> list[Gate]:
    return [*_xs(xs), *increment_gates(xs, dirty), *_xs(xs)]


def controlled_increment_gates(controls: Sequence[int], xs: Sequence[int], dirty: Sequence[int] = ()) -> list[Gate]:
    """xs += AND(controls): the controls become the low bits of a wider increment, then count back down."""
    controls, xs = list(controls), list(xs)
    if not controls:
        return increment_gates(xs, dirty)
    return [*increment_gates([*controls, *xs], dirty), *decrement_gates(controls, [*xs, *dirty])]


def build_incrementer(spec: IncrementerSpec, ledger: AncillaLedger | None = None) -> Circuit:
    n, k = spec.n, spec.controls
    c = list(range(k))
    xs = list(range(k, k + n))
    total, _, d = _borrow(ledger, [*c, *xs])
    inner = controlled_increment_gates(c, xs, d)
    if spec.direction == "decrement":
        inner = [*_xs(xs), *inner, *_xs(xs)]
    return _circuit(total, inner, [
        ("controls", "control", c), ("x", "data", xs), ("dirty", "dirty_ancilla", d),
    ])


def build_controlled_incrementer(spec: IncrementerSpec, ledger: AncillaLedger | None = None) -> Circuit:
    if spec.controls < 1:
        raise CircuitError("expected at least one control")
    return build_incrementer(spec, ledger)


def _total(ledger, num_qubits, qubits) -> int:
    if ledger is not None:
        return ledger.num_qubits
    return num_qubits or max(qubits) + 1


def build_promise_incrementer_linear(k: int, controls: Sequence[int], target: Sequence[int], promise: Sequence[int],
                                     ledger: AncillaLedger | None = None, num_qubits: int | None = None) -> Circuit:
    """k-controlled strong promise increment with n-1 promise wires.

    One promise wire acts as a dirty switch psi; on the rest the target is
    bumped by psi in two halves (high half by psi AND low half, then the low
    half by psi), each a prefix-AND cascade on the promise wires.
    """
    controls, target, promise = list(controls), list(target), list(promise)
    n = len(target)
    if k != len(controls):
        raise CircuitError(f"k={k} but {len(controls)} controls given")
    if len(promise) != n - 1:
        raise CircuitError(f"promise register must hold {n - 1} qubits, got {len(promise)}")
    if len({*controls, *target, *promise}) != k + n + n - 1:
        raise CircuitError("controls, target and promise must be disjoint")
    if n == 1:
        spare = ledger.borrow_dirty(1, exclude=[*controls, *target]) if ledger is not None and k >= 3 else []
        gates = _kx(controls, target[0], spare)
        if ledger is not None:
            ledger.release(spare)
    else:
        rest, psi = promise[:-1], promise[-1]
        h = n // 2
        low, high = target[:h], target[h:]
        w = [*seeded_increment_gates([psi, *low], high, rest, controls),
             *seeded_increment_gates([psi], low, rest, [*high, *controls])]
        zero = _xs(rest)
        flip = _toggle_fanout([*controls, *rest], psi, target)
        gates = [*w, *zero, *flip, *zero, *_inv(w), *zero, *flip, *zero]
    return _circuit(_total(ledger, num_qubits, [*controls, *target, *promise]), gates, [
        ("controls", "control", controls), ("target", "target", target), ("promise", "promise", promise),
    ])


def build_promise_incrementer_sqrt(control: int, target: Sequence[int], promise: Sequence[int],
                                   ledger: AncillaLedger | None = None, num_qubits: int | None = None) -> Circuit:
    """Singly-controlled strong promise increment with 2*ceil(sqrt(n)) promise wires."""
    target, promise = list(target), list(promise)
    n = len(target)
    if len(promise) != _sqrt_promise(n):
        raise CircuitError(f"promise register must hold {_sqrt_promise(n)} qubits, got {len(promise)}")
    if len({control, *target, *promise}) != 1 + n + len(promise):
        raise CircuitError("control, target and promise must be disjoint")
    rest, psi = promise[:-1], promise[-1]
    w = weak_promise_increment_gates(psi, target, rest)
    zero = _xs(rest)
    flip = _toggle_fanout([control, *rest], psi, target)
    gates = [*w, *zero, *flip, *zero, *_inv(w), *zero, *flip, *zero]
    return _circuit(_total(ledger, num_qubits, [control, *target, *promise]), gates, [
        ("control", "control", [control]), ("target", "target", target), ("promise", "promise", promise),
    ])


# --- constant adders -------------------------------------------------------------------


@dataclass(frozen=True)
class AdderSpec:
    n: int
    constant: int
    controls: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise CircuitError("adder width must be at least 1")
        if not 0 <= self.constant < 1 << self.n:
            raise CircuitError(f"constant {self.constant} does not fit in {self.n} bits")
        if self.controls < 0:
            raise CircuitError("control count must be non-negative")


def _carry_in(psi: int, low: Sequence[int], high: Sequence[int], threshold: int) -> list[Gate]:
    """high += [low >= threshold] using ``psi`` as a dirty switch.

    With F flipping ``high`` exactly when the comparison holds (and toggling
    psi), inc_psi, F, dec_psi, F nets +1 on ``high`` in that case and the
    identity otherwise, whatever psi held.
    """
    fo = fanout1_gates(psi, high)
    cmp = cq_geq_gates(threshold, low, psi, high[0])
    flip = [*fo, *cmp, *fo]
    inc = controlled_increment_gates([psi], high, low)
    return [*inc, *flip, *_inv(inc), *flip]


def add_constant_gates(c: int, xs: Sequence[int], dirty: Sequence[int]) -> list[Gate]:
    """xs += c (mod 2^n) with one dirty wire.

    Level by level, every block B = (low, high) first takes the carry that
    its low half would produce, high += [low + c_low >= 2^|low|], and then
    splits into its halves.  Sibling blocks lend each other the switch wire,
    so a level runs as two parallel rounds.
    """
    xs = list(xs)
    n = len(xs)
    if not 0 <= c < 1 << n:
        raise CircuitError(f"constant {c} does not fit in {n} bits")
    out: list[Gate] = []
    level = [(xs, c)]
    while level:
        nxt = []
        jobs = []
        for idx, (blk, cb) in enumerate(level):
            if len(blk) == 1:
                if cb & 1:
                    out.append(x(blk[0]))
                continue
            h = (len(blk) + 1) // 2
            lo, hi, cl = blk[:h], blk[h:], cb & ((1 << h) - 1)
            if cl:
                jobs.append((idx, lo, hi, (1 << h) - cl))
            nxt += [(lo, cl), (hi, cb >> h)]
        for parity in (0, 1):
            for idx, lo, hi, t in jobs:
                if idx % 2 == parity:
                    sib = level[idx ^ 1][0] if idx ^ 1 < len(level) else list(dirty)
                    if not sib:
                        raise AncillaError("a constant adder needs one dirty wire")
                    out += _carry_in(sib[0], lo, hi, t)
        level = nxt
    return out


def controlled_add_constant_gates(controls: Sequence[int], c: int, xs: Sequence[int], dirty: Sequence[int]) -> list[Gate]:
    """xs += c when every control is set; c = 2c' + r uses x + 2c' = F(F(x + c') - c') - with F = flip-all."""
    controls, xs = list(controls), list(xs)
    if not controls:
        return add_constant_gates(c, xs, dirty)
    half, r = c >> 1, c & 1
    out: list[Gate] = []
    if half:
        fo = fanout1_gates(xs[0], xs[1:])
        flip = [*fo, *_kx(controls, xs[0], [*dirty]), *fo]
        add = add_constant_gates(half, xs, dirty)
        sub = [*_xs(xs), *add, *_xs(xs)]
        out += [*add, *flip, *sub, *flip]
    if r:
        out += controlled_increment_gates(controls, xs, dirty)
    return out


def build_cq_adder(spec: AdderSpec, ledger: AncillaLedger | None = None) -> Circuit:
    k, n = spec.controls, spec.n
    c = list(range(k))
    xs = list(range(k, k + n))
    total, _, d = _borrow(ledger, [*c, *xs])
    return _circuit(total, controlled_add_constant_gates(c, spec.constant, xs, d), [
        ("controls", "control", c), ("x", "data", xs), ("dirty", "dirty_ancilla", d),
    ])


def build_controlled_cq_adder(spec: AdderSpec, ledger: AncillaLedger | None = None) -> Circuit:
    if spec.controls < 1:
        raise CircuitError("expected at least one control")
    return build_cq_adder(spec, ledger)


# --- modular adder ---------------------------------------------------------------------


@dataclass(frozen=True)
class ModularAdderSpec:
    n: int
    a: int
    N: int

    def __post_init__(self):
        if self.n < 1:
            raise CircuitError("modular adder width must be at least 1")
        if not 1 <= self.N < 1 << self.n:
            raise CircuitError(f"modulus {self.N} must lie in [1, 2^{self.n})")
        if not 0 <= self.a < self.N:
            raise CircuitError(f"constant {self.a} must lie in [0, {self.N})")


def modular_add_gates(a: int, modulus: int, b: Sequence[int], flag: int, dirty: Sequence[int],
                      controls: Sequence[int] = ()) -> list[Gate]:
    """b -> (a + b) mod N for b < N, under optional controls; ``flag`` must start and ends at 0.

    flag = [b >= N - a] marks the wrap; add a, subtract N where flagged,
    then clear the flag from the result, since the wrap happened exactly when
    the new b is below a.
    """
    b, controls = list(b), list(controls)
    n = len(b)
    if a == 0:
        return []
    spare = [*dirty, *b]
    mark = cq_geq_gates(modulus - a, b, flag, dirty[0] if dirty else None, controls)
    add = controlled_add_constant_gates(controls, a, b, dirty)
    wrap = controlled_add_constant_gates([flag], (1 << n) - modulus, b, dirty)
    # flag ^= K * [b' < a] = K XOR K * [a - 1 < b']
    clear = [*_kx(controls, flag, spare), *cq_less_gates(a - 1, b, flag, dirty[0] if dirty else None, controls)]
    return [*mark, *add, *wrap, *clear]


def build_modular_adder(spec: ModularAdderSpec, k: int = 0, ledger: AncillaLedger | None = None) -> Circuit:
    n = spec.n
    c = list(range(k))
    b = list(range(k, k + n))
    total, f, d = _borrow(ledger, [*c, *b], clean=1)
    return _circuit(total, modular_add_gates(spec.a, spec.N, b, f[0], d, c), [
        ("controls", "control", c), ("b", "data", b), ("flag", "clean_ancilla", f), ("dirty", "dirty_ancilla", d),
    ])
