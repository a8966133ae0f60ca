"""The six makespan-machine neighbourhoods.

Every move removes or reorders at least one job of the makespan machine
``k*`` (the smallest-index machine attaining the makespan); moves that
leave ``k*`` untouched can never lower the makespan. Positions are
0-based indices into the current sequences, and ``k*`` is implicit: a
move is only meaningful against the solution it was drawn from.

With ``n*`` jobs on ``k*``, ``n_k`` jobs on machine ``k`` and ``m``
machines, the neighbourhood sizes are

================  ==============================
Shift             n*(n* - 1)
Switch            n*(n* - 1) / 2
Task Move         n* * sum_{k != k*} (n_k + 1)
Swap              n* * (n - n*)
Direct Swap       n* * (n - n*)
Two-Shift         n*(n* - 1)(m - 1)^2
================  ==============================

Swap and Two-Shift reinsert jobs at the slot minimising the receiving
machine's completion time, earliest slot on ties.
"""

import enum
from dataclasses import dataclass

from .exceptions import MoveError


class Neighbourhood(enum.IntEnum):
    SHIFT = 1
    SWITCH = 2
    TASK_MOVE = 3
    SWAP = 4
    DIRECT_SWAP = 5
    TWO_SHIFT = 6

    @property
    def label(self):
        return self.name.lower()

    @classmethod
    def from_label(cls, label):
        try:
            return cls[label.upper()]
        except KeyError:
            raise ValueError(f"unknown neighbourhood {label!r}") from None


NEIGHBOURHOODS = tuple(Neighbourhood)


@dataclass(frozen=True, slots=True)
class Shift:
    """Move the job at `pos_from` of k* so that it ends up at `pos_to`."""
    pos_from: int
    pos_to: int
    neighbourhood = Neighbourhood.SHIFT


@dataclass(frozen=True, slots=True)
class Switch:
    """Exchange the jobs at `pos_a` < `pos_b` of k*."""
    pos_a: int
    pos_b: int
    neighbourhood = Neighbourhood.SWITCH


@dataclass(frozen=True, slots=True)
class TaskMove:
    """Move the job at `pos_from` of k* into slot `pos_to` of `machine_to`."""
    pos_from: int
    machine_to: int
    pos_to: int
    neighbourhood = Neighbourhood.TASK_MOVE


@dataclass(frozen=True, slots=True)
class Swap:
    """Exchange two jobs between k* and `machine_other`; both reinserted at
    their best slots."""
    pos_on_kstar: int
    machine_other: int
    pos_on_other: int
    neighbourhood = Neighbourhood.SWAP


@dataclass(frozen=True, slots=True)
class DirectSwap:
    """Exchange two jobs between k* and `machine_other`, slot for slot."""
    pos_on_kstar: int
    machine_other: int
    pos_on_other: int
    neighbourhood = Neighbourhood.DIRECT_SWAP


@dataclass(frozen=True, slots=True)
class TwoShift:
    """Take jobs at `pos_a` != `pos_b` off k* and insert each at its best
    slot of `machine_a` / `machine_b` (a first)."""
    pos_a: int
    machine_a: int
    pos_b: int
    machine_b: int
    neighbourhood = Neighbourhood.TWO_SHIFT


MOVE_TYPES = {
    Neighbourhood.SHIFT: Shift,
    Neighbourhood.SWITCH: Switch,
    Neighbourhood.TASK_MOVE: TaskMove,
    Neighbourhood.SWAP: Swap,
    Neighbourhood.DIRECT_SWAP: DirectSwap,
    Neighbourhood.TWO_SHIFT: TwoShift,
}


# -- elementary deltas ------------------------------------------------------
# `-1` stands for "no neighbour" (machine start or end).

def _insertion(pk, sk, prev, nxt, x):
    d = pk[x]
    if prev >= 0:
        d += sk[prev][x]
        if nxt >= 0:
            d += sk[x][nxt] - sk[prev][nxt]
    elif nxt >= 0:
        d += sk[x][nxt]
    return d


def _removal(pk, sk, seq, p):
    j = seq[p]
    prev = seq[p - 1] if p > 0 else -1
    nxt = seq[p + 1] if p + 1 < len(seq) else -1
    return -_insertion(pk, sk, prev, nxt, j)


def _slot_costs(pk, sk, seq, x):
    """Insertion cost of job `x` at every slot 0..len(seq) of `seq`."""
    L = len(seq)
    if L == 0:
        return [pk[x]]
    sx = sk[x]
    px = pk[x]
    costs = [px + sx[seq[0]]]
    for q in range(1, L):
        a = seq[q - 1]
        b = seq[q]
        sa = sk[a]
        costs.append(px + sa[x] + sx[b] - sa[b])
    costs.append(px + sk[seq[-1]][x])
    return costs


def _reduced_slot_costs(pk, sk, seq, removed, x):
    """Slot costs of `x` in `seq` with position `removed` taken out."""
    costs = _slot_costs(pk, sk, seq, x)
    prev = seq[removed - 1] if removed > 0 else -1
    nxt = seq[removed + 1] if removed + 1 < len(seq) else -1
    return costs[:removed] + [_insertion(pk, sk, prev, nxt, x)] + costs[removed + 2:]


def best_slot(pk, sk, seq, x):
    """Completion-minimising insertion slot of `x` (earliest on ties) and
    the resulting completion-time increase."""
    costs = _slot_costs(pk, sk, seq, x)
    best = min(costs)
    return costs.index(best), best


def _max_excluding(completion, excluded):
    best = 0
    for k, c in enumerate(completion):
        if c > best and k not in excluded:
            best = c
    return best


class _TopCompletions:
    """Answers "largest completion outside machines X" in O(|X|)."""

    def __init__(self, completion):
        self.order = sorted(range(len(completion)), key=lambda k: -completion[k])
        self.completion = completion

    def max_excluding(self, a, b=-1, c=-1):
        for k in self.order:
            if k != a and k != b and k != c:
                return self.completion[k]
        return 0


def _other_machines(solution):
    kstar = solution.makespan_machine
    return [k for k in range(len(solution.sequences)) if k != kstar]


# -- cardinality and enumeration --------------------------------------------

def cardinality(neighbourhood, solution):
    """Closed-form size of the neighbourhood of `solution`."""
    nb = Neighbourhood(neighbourhood)
    kstar = solution.makespan_machine
    seqs = solution.sequences
    ns = len(seqs[kstar])
    m = len(seqs)
    if nb is Neighbourhood.SHIFT:
        return ns * (ns - 1)
    if nb is Neighbourhood.SWITCH:
        return ns * (ns - 1) // 2
    if nb is Neighbourhood.TASK_MOVE:
        return ns * sum(len(seqs[k]) + 1 for k in range(m) if k != kstar)
    if nb in (Neighbourhood.SWAP, Neighbourhood.DIRECT_SWAP):
        return ns * (solution.instance.n_jobs - ns)
    return ns * (ns - 1) * (m - 1) ** 2


def enumerate_moves(neighbourhood, solution):
    """Yield every move of the neighbourhood once, in lexicographic order of
    the move's fields."""
    nb = Neighbourhood(neighbourhood)
    kstar = solution.makespan_machine
    seqs = solution.sequences
    ns = len(seqs[kstar])
    others = _other_machines(solution)
    if nb is Neighbourhood.SHIFT:
        for p in range(ns):
            for q in range(ns):
                if q != p:
                    yield Shift(p, q)
    elif nb is Neighbourhood.SWITCH:
        for p in range(ns):
            for q in range(p + 1, ns):
                yield Switch(p, q)
    elif nb is Neighbourhood.TASK_MOVE:
        for p in range(ns):
            for k in others:
                for q in range(len(seqs[k]) + 1):
                    yield TaskMove(p, k, q)
    elif nb in (Neighbourhood.SWAP, Neighbourhood.DIRECT_SWAP):
        cls = MOVE_TYPES[nb]
        for p in range(ns):
            for k in others:
                for q in range(len(seqs[k])):
                    yield cls(p, k, q)
    else:
        for pa in range(ns):
            for ka in others:
                for pb in range(ns):
                    if pb == pa:
                        continue
                    for kb in others:
                        yield TwoShift(pa, ka, pb, kb)


def move_at(neighbourhood, solution, index):
    """The `index`-th move of :func:`enumerate_moves` without materialising
    the ones before it."""
    nb = Neighbourhood(neighbourhood)
    size = cardinality(nb, solution)
    if not 0 <= index < size:
        raise IndexError(f"move index {index} outside [0, {size})")
    kstar = solution.makespan_machine
    seqs = solution.sequences
    ns = len(seqs[kstar])
    others = _other_machines(solution)
    if nb is Neighbourhood.SHIFT:
        p, r = divmod(index, ns - 1)
        return Shift(p, r if r < p else r + 1)
    if nb is Neighbourhood.SWITCH:
        p = 0
        while index >= ns - 1 - p:
            index -= ns - 1 - p
            p += 1
        return Switch(p, p + 1 + index)
    if nb is Neighbourhood.TASK_MOVE:
        p, r = divmod(index, size // ns)
        for k in others:
            slots = len(seqs[k]) + 1
            if r < slots:
                return TaskMove(p, k, r)
            r -= slots
    if nb in (Neighbourhood.SWAP, Neighbourhood.DIRECT_SWAP):
        p, r = divmod(index, size // ns)
        for k in others:
            if r < len(seqs[k]):
                return MOVE_TYPES[nb](p, k, r)
            r -= len(seqs[k])
    mo = len(others)
    pa, r = divmod(index, mo * (ns - 1) * mo)
    ia, r = divmod(r, (ns - 1) * mo)
    ib, kb = divmod(r, mo)
    return TwoShift(pa, others[ia], ib if ib < pa else ib + 1, others[kb])


def sample_uniform(neighbourhood, solution, rng):
    """A uniformly random move of the neighbourhood, or None if it is empty.

    `rng` is a :class:`random.Random`.
    """
    size = cardinality(neighbourhood, solution)
    if size == 0:
        return None
    return move_at(neighbourhood, solution, rng.randrange(size))


# -- application ------------------------------------------------------------

def _check_pos(seq, pos, what, insert=False):
    limit = len(seq) + (1 if insert else 0)
    if not (isinstance(pos, int) and 0 <= pos < limit):
        raise MoveError(f"{what} {pos!r} out of range [0, {limit})")


def _check_other(solution, machine):
    if not (isinstance(machine, int) and 0 <= machine < len(solution.sequences)):
        raise MoveError(f"machine {machine!r} out of range")
    if machine == solution.makespan_machine:
        raise MoveError("target machine must differ from the makespan machine")


def _validate(solution, move):
    seqs = solution.sequences
    kseq = seqs[solution.makespan_machine]
    if isinstance(move, Shift):
        _check_pos(kseq, move.pos_from, "pos_from")
        _check_pos(kseq, move.pos_to, "pos_to")
        if move.pos_from == move.pos_to:
            raise MoveError("shift to the same position")
    elif isinstance(move, Switch):
        _check_pos(kseq, move.pos_a, "pos_a")
        _check_pos(kseq, move.pos_b, "pos_b")
        if move.pos_a >= move.pos_b:
            raise MoveError("switch requires pos_a < pos_b")
    elif isinstance(move, TaskMove):
        _check_pos(kseq, move.pos_from, "pos_from")
        _check_other(solution, move.machine_to)
        _check_pos(seqs[move.machine_to], move.pos_to, "pos_to", insert=True)
    elif isinstance(move, (Swap, DirectSwap)):
        _check_pos(kseq, move.pos_on_kstar, "pos_on_kstar")
        _check_other(solution, move.machine_other)
        _check_pos(seqs[move.machine_other], move.pos_on_other, "pos_on_other")
    elif isinstance(move, TwoShift):
        _check_pos(kseq, move.pos_a, "pos_a")
        _check_pos(kseq, move.pos_b, "pos_b")
        if move.pos_a == move.pos_b:
            raise MoveError("two-shift requires distinct positions")
        _check_other(solution, move.machine_a)
        _check_other(solution, move.machine_b)
    else:
        raise MoveError(f"not a move: {move!r}")


def apply_move(solution, move, inplace=False):
    """Apply `move` and return the resulting solution.

    Only the machines the move touches are re-evaluated. With
    ``inplace=False`` (default) `solution` is left untouched.
    """
    _validate(solution, move)
    sol = solution if inplace else solution.copy()
    inst = sol.instance
    kstar = sol.makespan_machine
    seqs = sol.sequences
    kseq = seqs[kstar]
    if isinstance(move, Shift):
        kseq.insert(move.pos_to, kseq.pop(move.pos_from))
        touched = (kstar,)
    elif isinstance(move, Switch):
        a, b = move.pos_a, move.pos_b
        kseq[a], kseq[b] = kseq[b], kseq[a]
        touched = (kstar,)
    elif isinstance(move, TaskMove):
        seqs[move.machine_to].insert(move.pos_to, kseq.pop(move.pos_from))
        touched = (kstar, move.machine_to)
    elif isinstance(move, DirectSwap):
        other = seqs[move.machine_other]
        p, q = move.pos_on_kstar, move.pos_on_other
        kseq[p], other[q] = other[q], kseq[p]
        touched = (kstar, move.machine_other)
    elif isinstance(move, Swap):
        k = move.machine_other
        other = seqs[k]
        i = kseq.pop(move.pos_on_kstar)
        j = other.pop(move.pos_on_other)
        slot, _ = best_slot(inst.p[kstar], inst.s[kstar], kseq, j)
        kseq.insert(slot, j)
        slot, _ = best_slot(inst.p[k], inst.s[k], other, i)
        other.insert(slot, i)
        touched = (kstar, k)
    else:
        a, b = kseq[move.pos_a], kseq[move.pos_b]
        for pos in sorted((move.pos_a, move.pos_b), reverse=True):
            kseq.pop(pos)
        for job, k in ((a, move.machine_a), (b, move.machine_b)):
            slot, _ = best_slot(inst.p[k], inst.s[k], seqs[k], job)
            seqs[k].insert(slot, job)
        touched = (kstar, move.machine_a, move.machine_b)
    sol.refresh(set(touched))
    return sol


def relocate(solution, machine_from, pos, machine_to, slot):
    """Move one job between arbitrary machines (not restricted to k*).

    Returns a new solution; used to probe moves outside the six
    neighbourhoods.
    """
    sol = solution.copy()
    seqs = sol.sequences
    _check_pos(seqs[machine_from], pos, "pos")
    job = seqs[machine_from].pop(pos)
    _check_pos(seqs[machine_to], slot, "slot", insert=True)
    seqs[machine_to].insert(slot, job)
    sol.refresh({machine_from, machine_to})
    return sol


# -- evaluation without application -------------------------------------------

def evaluate_move(solution, move):
    """Makespan after `move`, computed from deltas without copying."""
    inst = solution.instance
    kstar = solution.makespan_machine
    seqs = solution.sequences
    kseq = seqs[kstar]
    comp = solution.completion
    pk, sk = inst.p[kstar], inst.s[kstar]
    if isinstance(move, Shift):
        new = comp[kstar] + _shift_delta(pk, sk, kseq, move.pos_from, move.pos_to)
        return max(new, _max_excluding(comp, (kstar,)))
    if isinstance(move, Switch):
        new = comp[kstar] + _switch_delta(sk, kseq, move.pos_a, move.pos_b)
        return max(new, _max_excluding(comp, (kstar,)))
    if isinstance(move, TaskMove):
        k = move.machine_to
        seq = seqs[k]
        q = move.pos_to
        new_star = comp[kstar] + _removal(pk, sk, kseq, move.pos_from)
        new_k = comp[k] + _insertion(
            inst.p[k], inst.s[k], seq[q - 1] if q > 0 else -1,
            seq[q] if q < len(seq) else -1, kseq[move.pos_from])
        return max(new_star, new_k, _max_excluding(comp, (kstar, k)))
    if isinstance(move, DirectSwap):
        k = move.machine_other
        p, q = move.pos_on_kstar, move.pos_on_other
        seq = seqs[k]
        new_star = comp[kstar] + _replace_delta(pk, sk, kseq, p, seq[q])
        new_k = comp[k] + _replace_delta(inst.p[k], inst.s[k], seq, q, kseq[p])
        return max(new_star, new_k, _max_excluding(comp, (kstar, k)))
    if isinstance(move, Swap):
        k = move.machine_other
        p, q = move.pos_on_kstar, move.pos_on_other
        seq = seqs[k]
        pko, sko = inst.p[k], inst.s[k]
        new_star = (comp[kstar] + _removal(pk, sk, kseq, p)
                    + min(_reduced_slot_costs(pk, sk, kseq, p, seq[q])))
        new_k = (comp[k] + _removal(pko, sko, seq, q)
                 + min(_reduced_slot_costs(pko, sko, seq, q, kseq[p])))
        return max(new_star, new_k, _max_excluding(comp, (kstar, k)))
    if isinstance(move, TwoShift):
        pa, pb = move.pos_a, move.pos_b
        ka, kb = move.machine_a, move.machine_b
        a, b = kseq[pa], kseq[pb]
        new_star = comp[kstar] + _double_removal(pk, sk, kseq, pa, pb)
        seq_a = seqs[ka]
        slot_a, cost_a = best_slot(inst.p[ka], inst.s[ka], seq_a, a)
        if ka == kb:
            seq2 = seq_a[:slot_a] + [a] + seq_a[slot_a:]
            _, cost_b = best_slot(inst.p[ka], inst.s[ka], seq2, b)
            new_a = comp[ka] + cost_a + cost_b
            return max(new_star, new_a, _max_excluding(comp, (kstar, ka)))
        _, cost_b = best_slot(inst.p[kb], inst.s[kb], seqs[kb], b)
        return max(new_star, comp[ka] + cost_a, comp[kb] + cost_b,
                   _max_excluding(comp, (kstar, ka, kb)))
    raise MoveError(f"not a move: {move!r}")


def _shift_delta(pk, sk, seq, p, q):
    # reduced sequence r = seq without p; job lands in slot q of r
    j = seq[p]
    d = _removal(pk, sk, seq, p)
    if q > 0:
        prev = seq[q - 1] if q - 1 < p else seq[q]
    else:
        prev = -1
    if q < len(seq) - 1:
        nxt = seq[q] if q < p else seq[q + 1]
    else:
        nxt = -1
    return d + _insertion(pk, sk, prev, nxt, j)


def _switch_delta(sk, seq, a, b):
    L = len(seq)
    edges = {e for e in ((a - 1, a), (a, a + 1), (b - 1, b), (b, b + 1))
             if e[0] >= 0 and e[1] < L}
    ja, jb = seq[a], seq[b]

    def job(pos):
        return jb if pos == a else ja if pos == b else seq[pos]

    d = 0
    for u, v in edges:
        d += sk[job(u)][job(v)] - sk[seq[u]][seq[v]]
    return d


def _replace_delta(pk, sk, seq, p, x):
    j = seq[p]
    prev = seq[p - 1] if p > 0 else -1
    nxt = seq[p + 1] if p + 1 < len(seq) else -1
    return _insertion(pk, sk, prev, nxt, x) - _insertion(pk, sk, prev, nxt, j)


def _double_removal(pk, sk, seq, pa, pb):
    lo, hi = (pa, pb) if pa < pb else (pb, pa)
    if hi == lo + 1:
        a, b = seq[lo], seq[hi]
        prev = seq[lo - 1] if lo > 0 else -1
        nxt = seq[hi + 1] if hi + 1 < len(seq) else -1
        d = -pk[a] - pk[b] - sk[a][b]
        if prev >= 0:
            d -= sk[prev][a]
        if nxt >= 0:
            d -= sk[b][nxt]
        if prev >= 0 and nxt >= 0:
            d += sk[prev][nxt]
        return d
    return _removal(pk, sk, seq, lo) + _removal(pk, sk, seq, hi)


# -- bulk evaluation for the census -----------------------------------------

def neighbour_makespans(neighbourhood, solution):
    """Makespan of every neighbour, in :func:`enumerate_moves` order."""
    nb = Neighbourhood(neighbourhood)
    return _BULK[nb](solution)


def _bulk_shift(sol):
    inst, kstar = sol.instance, sol.makespan_machine
    pk, sk = inst.p[kstar], inst.s[kstar]
    seq = sol.sequences[kstar]
    base = sol.completion[kstar]
    rest = _max_excluding(sol.completion, (kstar,))
    ns = len(seq)
    out = []
    for p in range(ns):
        for q in range(ns):
            if q != p:
                new = base + _shift_delta(pk, sk, seq, p, q)
                out.append(new if new > rest else rest)
    return out


def _bulk_switch(sol):
    inst, kstar = sol.instance, sol.makespan_machine
    sk = inst.s[kstar]
    seq = sol.sequences[kstar]
    base = sol.completion[kstar]
    rest = _max_excluding(sol.completion, (kstar,))
    out = []
    for a in range(len(seq)):
        for b in range(a + 1, len(seq)):
            new = base + _switch_delta(sk, seq, a, b)
            out.append(new if new > rest else rest)
    return out


def _bulk_task_move(sol):
    inst, kstar = sol.instance, sol.makespan_machine
    pk, sk = inst.p[kstar], inst.s[kstar]
    kseq = sol.sequences[kstar]
    comp = sol.completion
    top = _TopCompletions(comp)
    others = _other_machines(sol)
    removed = [comp[kstar] + _removal(pk, sk, kseq, p) for p in range(len(kseq))]
    costs = {(k, i): _slot_costs(inst.p[k], inst.s[k], sol.sequences[k], i)
             for k in others for i in kseq}
    rest = {k: top.max_excluding(kstar, k) for k in others}
    out = []
    for p, i in enumerate(kseq):
        r = removed[p]
        for k in others:
            floor = max(r, rest[k])
            ck = comp[k]
            for c in costs[k, i]:
                v = ck + c
                out.append(v if v > floor else floor)
    return out


def _bulk_direct_swap(sol):
    inst, kstar = sol.instance, sol.makespan_machine
    pk, sk = inst.p[kstar], inst.s[kstar]
    kseq = sol.sequences[kstar]
    comp = sol.completion
    top = _TopCompletions(comp)
    out = []
    others = _other_machines(sol)
    rest = {k: top.max_excluding(kstar, k) for k in others}
    for p, i in enumerate(kseq):
        for k in others:
            seq = sol.sequences[k]
            pko, sko = inst.p[k], inst.s[k]
            for q, j in enumerate(seq):
                new_star = comp[kstar] + _replace_delta(pk, sk, kseq, p, j)
                new_k = comp[k] + _replace_delta(pko, sko, seq, q, i)
                out.append(max(new_star, new_k, rest[k]))
    return out


def _prefix_suffix_min(costs):
    pre = []
    cur = None
    for c in costs:
        cur = c if cur is None or c < cur else cur
        pre.append(cur)
    suf = [0] * len(costs)
    cur = None
    for idx in range(len(costs) - 1, -1, -1):
        c = costs[idx]
        cur = c if cur is None or c < cur else cur
        suf[idx] = cur
    return pre, suf


def _reduced_min(costs, pre, suf, gap, removed):
    # min over costs[:removed] + [gap] + costs[removed + 2:]
    best = gap
    if removed > 0 and pre[removed - 1] < best:
        best = pre[removed - 1]
    if removed + 2 < len(costs) and suf[removed + 2] < best:
        best = suf[removed + 2]
    return best


def _bulk_swap(sol):
    inst, kstar = sol.instance, sol.makespan_machine
    pk, sk = inst.p[kstar], inst.s[kstar]
    kseq = sol.sequences[kstar]
    ns = len(kseq)
    comp = sol.completion
    top = _TopCompletions(comp)
    others = _other_machines(sol)

    # k* side: job j from another machine into k* minus position p
    star_removed = [comp[kstar] + _removal(pk, sk, kseq, p) for p in range(ns)]
    star_gap = [(kseq[p - 1] if p > 0 else -1, kseq[p + 1] if p + 1 < ns else -1)
                for p in range(ns)]
    star_tables = {}
    for k in others:
        for j in sol.sequences[k]:
            costs = _slot_costs(pk, sk, kseq, j)
            star_tables[j] = (costs,) + _prefix_suffix_min(costs)

    # machine k side: job i from k* into k minus position q
    other_tables = {}
    for k in others:
        seq = sol.sequences[k]
        pko, sko = inst.p[k], inst.s[k]
        L = len(seq)
        removed = [comp[k] + _removal(pko, sko, seq, q) for q in range(L)]
        gaps = [(seq[q - 1] if q > 0 else -1, seq[q + 1] if q + 1 < L else -1)
                for q in range(L)]
        for i in kseq:
            costs = _slot_costs(pko, sko, seq, i)
            pre, suf = _prefix_suffix_min(costs)
            other_tables[k, i] = [
                removed[q] + _reduced_min(costs, pre, suf,
                                          _insertion(pko, sko, g[0], g[1], i), q)
                for q, g in enumerate(gaps)
            ]

    out = []
    for p, i in enumerate(kseq):
        prev, nxt = star_gap[p]
        base = star_removed[p]
        for k in others:
            rest = top.max_excluding(kstar, k)
            new_ks = other_tables[k, i]
            for q, j in enumerate(sol.sequences[k]):
                costs, pre, suf = star_tables[j]
                new_star = base + _reduced_min(
                    costs, pre, suf, _insertion(pk, sk, prev, nxt, j), p)
                out.append(max(new_star, new_ks[q], rest))
    return out


def _bulk_two_shift(sol):
    inst, kstar = sol.instance, sol.makespan_machine
    pk, sk = inst.p[kstar], inst.s[kstar]
    kseq = sol.sequences[kstar]
    ns = len(kseq)
    comp = sol.completion
    top = _TopCompletions(comp)
    others = _other_machines(sol)

    tables = {}
    for k in others:
        for x in kseq:
            costs = _slot_costs(inst.p[k], inst.s[k], sol.sequences[k], x)
            best = min(costs)
            tables[k, x] = (costs, costs.index(best), best) + _prefix_suffix_min(costs)

    out = []
    for pa in range(ns):
        a = kseq[pa]
        for ka in others:
            _, slot_a, cost_a, _, _ = tables[ka, a]
            seq = sol.sequences[ka]
            pka, ska = inst.p[ka], inst.s[ka]
            prev = seq[slot_a - 1] if slot_a > 0 else -1
            nxt = seq[slot_a] if slot_a < len(seq) else -1
            new_a = comp[ka] + cost_a
            for pb in range(ns):
                if pb == pa:
                    continue
                b = kseq[pb]
                new_star = comp[kstar] + _double_removal(pk, sk, kseq, pa, pb)
                for kb in others:
                    costs_b, _, cost_b, pre, suf = tables[kb, b]
                    if kb == ka:
                        # b into ka after a took slot_a: original slot_a is split
                        best = min(_insertion(pka, ska, prev, a, b),
                                   _insertion(pka, ska, a, nxt, b))
                        if slot_a > 0 and pre[slot_a - 1] < best:
                            best = pre[slot_a - 1]
                        if slot_a + 1 < len(costs_b) and suf[slot_a + 1] < best:
                            best = suf[slot_a + 1]
                        new = max(new_star, new_a + best,
                                  top.max_excluding(kstar, ka))
                    else:
                        new = max(new_star, new_a, comp[kb] + cost_b,
                                  top.max_excluding(kstar, ka, kb))
                    out.append(new)
    return out


_BULK = {
    Neighbourhood.SHIFT: _bulk_shift,
    Neighbourhood.SWITCH: _bulk_switch,
    Neighbourhood.TASK_MOVE: _bulk_task_move,
    Neighbourhood.SWAP: _bulk_swap,
    Neighbourhood.DIRECT_SWAP: _bulk_direct_swap,
    Neighbourhood.TWO_SHIFT: _bulk_two_shift,
}
