"""Weak barbed bisimilarity of workflow systems.

Communications are silent (tau); step executions are observable and carry
their full exec predicate.  A tau move is matched by zero or more taus, a nu
move by ``=> nu =>``.  Strong barbs are the enabled nu labels; weak barbs the
ones reachable through taus.

Reduction LTSs are finite and acyclic (each transition consumes a predicate),
so bisimilarity classes are computed bottom-up in reverse topological order:
a state's class is fixed by the set of (label, class) pairs it reaches by weak
moves, or inherited from a tau successor offering the same set.  A literal
greatest-fixed-point over all state pairs is kept as :func:`naive_weak_bisim`
for cross-checking on small systems.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterator, Literal

from .ir import WorkflowSystem
from .optimize import optimize
from .semantics import Label, Lts, Nu, Tau, reachable_lts

TAU = "tau"

Reduction = Literal["none", "tau-confluence"]


# --------------------------------------------------------------------------
# saturation


@dataclass
class WeakLts:
    lts: Lts
    tau_closure: list[frozenset[int]]  # s => t, reflexive
    weak_moves: list[dict[str, frozenset[int]]]  # s => nu => t
    strong_barbs: list[frozenset[str]]
    weak_barbs: list[frozenset[str]]


def weak_saturate(lts: Lts) -> WeakLts:
    """Explicit tau-closure and weak nu successors (quadratic; small LTSs only)."""
    n = len(lts.states)
    order = _reverse_topological(lts)
    clos: list[frozenset[int]] = [frozenset()] * n
    for s in order:
        acc = {s}
        for lab, t in lts.succ[s]:
            if isinstance(lab, Tau):
                acc |= clos[t]
        clos[s] = frozenset(acc)
    strong = [frozenset(lab.text for lab, _ in lts.succ[s] if isinstance(lab, Nu)) for s in range(n)]
    weak_b = [frozenset().union(*(strong[t] for t in clos[s])) for s in range(n)]
    moves: list[dict[str, frozenset[int]]] = []
    for s in range(n):
        m: dict[str, set[int]] = {}
        for u in clos[s]:
            for lab, v in lts.succ[u]:
                if isinstance(lab, Nu):
                    m.setdefault(lab.text, set()).update(clos[v])
        moves.append({k: frozenset(v) for k, v in m.items()})
    return WeakLts(lts, clos, moves, strong, weak_b)


def _reverse_topological(lts: Lts) -> list[int]:
    """Successors before predecessors."""
    n = len(lts.states)
    indeg = [0] * n
    for out in lts.succ:
        for _, t in out:
            indeg[t] += 1
    queue = deque(i for i in range(n) if indeg[i] == 0)
    order = []
    while queue:
        s = queue.popleft()
        order.append(s)
        for _, t in lts.succ[s]:
            indeg[t] -= 1
            if indeg[t] == 0:
                queue.append(t)
    if len(order) != n:
        raise ValueError("LTS has a cycle")
    order.reverse()
    return order


# --------------------------------------------------------------------------
# class computation


def _classify(lts: Lts, table: dict[frozenset, int]) -> tuple[list[int], list[frozenset]]:
    n = len(lts.states)
    cls = [-1] * n
    weak: list[frozenset] = [frozenset()] * n
    for s in _reverse_topological(lts):
        strict: set[tuple[str, int]] = set()
        tau_succ = []
        for lab, t in lts.succ[s]:
            if isinstance(lab, Tau):
                strict |= weak[t]
                tau_succ.append(t)
            else:
                strict.update((lab.text, c) for k, c in weak[t] if k == TAU)
        key = frozenset(strict)
        inert = next((t for t in tau_succ if weak[t] == key), None)
        if inert is not None:
            cls[s] = cls[inert]
            weak[s] = weak[inert]
            continue
        c = table.setdefault(key, len(table))
        cls[s] = c
        weak[s] = key | {(TAU, c)}
    return cls, weak


@dataclass
class BisimResult:
    related: bool
    states_a: int
    states_b: int
    classes_a: list[int] = field(default_factory=list, repr=False)
    classes_b: list[int] = field(default_factory=list, repr=False)
    trail: list[str] = field(default_factory=list)
    reason: str = ""

    def relation(self) -> Iterator[tuple[int, int]]:
        """Pairs of bisimilar states (A index, B index)."""
        by_class: dict[int, list[int]] = {}
        for j, c in enumerate(self.classes_b):
            by_class.setdefault(c, []).append(j)
        for i, c in enumerate(self.classes_a):
            for j in by_class.get(c, ()):
                yield i, j

    def __str__(self) -> str:
        if self.related:
            return "RELATED"
        return "DISTINGUISHED " + " ".join(self.trail + [f"({self.reason})"])


def _as_lts(x: WorkflowSystem | Lts, max_states: int, reduction: Reduction) -> Lts:
    if isinstance(x, Lts):
        return x
    return reachable_lts(x, max_states, reduction=reduction)


def weak_barbed_bisim(
    a: WorkflowSystem | Lts,
    b: WorkflowSystem | Lts,
    max_states: int = 100_000,
    reduction: Reduction = "none",
) -> BisimResult:
    lts_a = _as_lts(a, max_states, reduction)
    lts_b = _as_lts(b, max_states, reduction)
    table: dict[frozenset, int] = {}
    cls_a, weak_a = _classify(lts_a, table)
    cls_b, weak_b = _classify(lts_b, table)
    res = BisimResult(
        cls_a[lts_a.initial] == cls_b[lts_b.initial],
        len(lts_a.states),
        len(lts_b.states),
        cls_a,
        cls_b,
    )
    if not res.related:
        res.trail, res.reason = _distinguish(_Side("A", lts_a, cls_a, weak_a), _Side("B", lts_b, cls_b, weak_b))
    return res


def _weak_barbs(weak: frozenset) -> set[str]:
    return {k for k, _ in weak if k != TAU}


@dataclass
class _Side:
    name: str
    lts: Lts
    cls: list[int]
    weak: list[frozenset]


def _distinguish(a: _Side, b: _Side) -> tuple[list[str], str]:
    """Descend through non-bisimilar state pairs until a weak barb differs or a
    move has no answer.  Returns the observable labels fired on the way."""
    i, j = a.lts.initial, b.lts.initial
    trail: list[str] = []
    while True:
        wi, wj = a.weak[i], b.weak[j]
        bi, bj = _weak_barbs(wi), _weak_barbs(wj)
        if bi != bj:
            side, other, barb = (a, b, min(bi - bj)) if bi - bj else (b, a, min(bj - bi))
            return trail, f"{side.name} has weak barb {barb}, {other.name} does not"
        extra_a = sorted((wi - wj) - {(TAU, a.cls[i])})
        extra_b = sorted((wj - wi) - {(TAU, b.cls[j])})
        if extra_a:
            mover, answer, (label, target), here, there = a, b, extra_a[0], i, j
        elif extra_b:
            mover, answer, (label, target), here, there = b, a, extra_b[0], j, i
        else:
            return trail, "states differ only in their own class"
        nxt = _weak_path(mover.lts, mover.cls, here, label, target)[1]
        if label == TAU:
            # the answering side may stay put: compare against its current state
            replies = [there]
        else:
            replies = sorted(_weak_targets(answer.lts, there, label))
            if not replies:
                return trail, f"{mover.name} move {label} not matched by {answer.name}"
            trail.append(label)
        if mover is a:
            i, j = nxt, replies[0]
        else:
            i, j = replies[0], nxt


def _weak_targets(lts: Lts, start: int, label: str) -> set[int]:
    """States reachable by taus, one ``label`` move, then taus."""
    out: set[int] = set()
    seen = {(start, False)}
    stack = [(start, False)]
    while stack:
        s, done = stack.pop()
        if done:
            out.add(s)
        for lab, t in lts.succ[s]:
            if isinstance(lab, Tau):
                nxt = (t, done)
            elif not done and lab.text == label:
                nxt = (t, True)
            else:
                continue
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    return out


def _weak_path(lts: Lts, cls: list[int], start: int, label: str, target: int) -> tuple[list[str], int]:
    """Labels of a weak ``label`` move from ``start`` into class ``target`` and the state reached."""
    origin = (start, label == TAU)
    prev: dict[tuple[int, bool], tuple[tuple[int, bool], str] | None] = {origin: None}
    queue = deque([origin])
    while queue:
        s, done = queue.popleft()
        if done and cls[s] == target:
            out = []
            node = (s, done)
            while prev[node] is not None:
                node, lab = prev[node]  # type: ignore[misc]
                out.append(lab)
            return list(reversed(out)), s
        for lab, t in lts.succ[s]:
            if isinstance(lab, Tau):
                nxt = (t, done)
            elif not done and lab.text == label:
                nxt = (t, True)
            else:
                continue
            if nxt not in prev:
                prev[nxt] = ((s, done), lab.text)
                queue.append(nxt)
    raise AssertionError("class target unreachable")


def check_theorem1(sys: WorkflowSystem, max_states: int = 100_000, reduction: Reduction = "none") -> BisimResult:
    return weak_barbed_bisim(sys, optimize(sys), max_states, reduction)


# --------------------------------------------------------------------------
# reference checker


def naive_weak_bisim(a: WorkflowSystem | Lts, b: WorkflowSystem | Lts, max_states: int = 2_000) -> tuple[bool, set[tuple[int, int]]]:
    """Greatest fixed point over all state pairs.

    A pair survives while (1) each side's strong barbs are weak barbs of the
    other and (2) each move of one side, tau or nu, is matched by a weak move
    with the same observable into a surviving pair.
    """
    wa = weak_saturate(_as_lts(a, max_states, "none"))
    wb = weak_saturate(_as_lts(b, max_states, "none"))
    rel = {(i, j) for i in range(len(wa.lts.states)) for j in range(len(wb.lts.states))}

    def sim(x: WeakLts, y: WeakLts, i: int, j: int, related) -> bool:
        if not x.strong_barbs[i] <= y.weak_barbs[j]:
            return False
        for lab, i2 in x.lts.succ[i]:
            targets = y.tau_closure[j] if isinstance(lab, Tau) else y.weak_moves[j].get(lab.text, ())
            if not any(related(i2, j2) for j2 in targets):
                return False
        return True

    changed = True
    while changed:
        changed = False
        for i, j in list(rel):
            ok = sim(wa, wb, i, j, lambda p, q: (p, q) in rel) and sim(
                wb, wa, j, i, lambda q, p: (p, q) in rel
            )
            if not ok:
                rel.discard((i, j))
                changed = True
    return (wa.lts.initial, wb.lts.initial) in rel, rel
