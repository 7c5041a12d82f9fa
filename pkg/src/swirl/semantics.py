"""Small-step reduction semantics of SWIRL workflow systems.

Enabledness is computed from *active positions*: a predicate is active when it
is reachable from the root by descending into the left operand of ``.`` and
either operand of ``|``.  Three rules fire on active predicates:

* Exec: every location of the step holds an active matching ``exec`` and the
  step's inputs; all of them advance together and gain the step's outputs.
* Comm: an active ``send(d->p, l, l')`` at ``l`` with ``d`` present meets an
  active ``recv(p, l, l')`` at ``l'``; ``d`` is copied to ``l'``.
* L-Comm: the same with ``l == l'`` inside one configuration, data unchanged.

Communications are labelled tau, step executions by their exec predicate.
"""

from __future__ import annotations

import itertools
import random
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Literal, Union

from .ir import (
    NIL,
    Act,
    Exec,
    LocationConfig,
    Par,
    Predicate,
    Recv,
    Send,
    Seq,
    Trace,
    WorkflowSystem,
    is_empty,
    normalize,
    normalize_system,
)
from .syntax import parse_swirl, parse_trace

Path = tuple[int, ...]


class StaleTransition(ValueError):
    pass


class StepLimitExceeded(RuntimeError):
    pass


class StateSpaceExceeded(RuntimeError):
    pass


class ConfluenceViolation(RuntimeError):
    """A prioritised tau transition failed its local diamond check."""


@dataclass(frozen=True)
class Tau:
    send: Send

    @property
    def text(self) -> str:
        return f"tau:{self.send.text}"

    def __str__(self) -> str:
        return self.text


@dataclass(frozen=True)
class Nu:
    exec: Exec

    @property
    def step(self) -> str:
        return self.exec.step

    @property
    def text(self) -> str:
        return f"nu:{self.exec.text}"

    def __str__(self) -> str:
        return self.text


Label = Union[Tau, Nu]


def parse_label(text: str) -> Label:
    kind, _, body = text.partition(":")
    t = parse_trace(body)
    if not isinstance(t, Act):
        raise ValueError(f"bad label {text!r}")
    if kind == "tau" and isinstance(t.pred, Send):
        return Tau(t.pred)
    if kind == "nu" and isinstance(t.pred, Exec):
        return Nu(t.pred)
    raise ValueError(f"bad label {text!r}")


Rule = Literal["Exec", "L-Comm", "Comm"]


@dataclass(frozen=True)
class Transition:
    label: Label
    target: WorkflowSystem
    rule: Rule
    positions: tuple[tuple[str, Path], ...]

    @property
    def key(self) -> tuple[str, str, str]:
        return (self.rule, self.label.text, repr(self.positions))


# --------------------------------------------------------------------------
# positions


def active_positions(t: Trace, path: Path = ()) -> list[tuple[Path, Predicate]]:
    """Predicates enabled by the context rules, with their tree paths."""
    if isinstance(t, Act):
        return [(path, t.pred)]
    if isinstance(t, Seq):
        if is_empty(t.first):
            return active_positions(t.then, path + (1,))
        return active_positions(t.first, path + (0,))
    if isinstance(t, Par):
        return active_positions(t.left, path + (0,)) + active_positions(t.right, path + (1,))
    return []


def replace_at(t: Trace, path: Path, new: Trace = NIL) -> Trace:
    if not path:
        return new
    head, rest = path[0], path[1:]
    if isinstance(t, Seq):
        return Seq(replace_at(t.first, rest, new), t.then) if head == 0 else Seq(t.first, replace_at(t.then, rest, new))
    if isinstance(t, Par):
        return Par(replace_at(t.left, rest, new), t.right) if head == 0 else Par(t.left, replace_at(t.right, rest, new))
    raise ValueError(f"invalid path {path} into {t.text}")


def _consume(c: LocationConfig, paths: Iterable[Path], data: frozenset[str]) -> LocationConfig:
    trace = c.trace
    for p in paths:
        trace = replace_at(trace, p)
    return LocationConfig(c.loc, data, normalize(trace))


# --------------------------------------------------------------------------
# transitions


def enabled_transitions(sys: WorkflowSystem) -> list[Transition]:
    index = {c.loc: i for i, c in enumerate(sys.configs)}
    execs: dict[str, dict[Exec, list[Path]]] = {}
    recvs: dict[str, dict[Recv, list[Path]]] = {}
    sends: list[tuple[str, Path, Send]] = []
    for c in sys.configs:
        ex: dict[Exec, list[Path]] = {}
        rv: dict[Recv, list[Path]] = {}
        for path, pred in active_positions(c.trace):
            if isinstance(pred, Exec):
                ex.setdefault(pred, []).append(path)
            elif isinstance(pred, Recv):
                rv.setdefault(pred, []).append(path)
            else:
                sends.append((c.loc, path, pred))
        execs[c.loc] = ex
        recvs[c.loc] = rv

    out: list[Transition] = []
    configs = sys.configs

    candidates = sorted({e for ex in execs.values() for e in ex}, key=lambda e: e.text)
    for e in candidates:
        locs = sorted(e.locs)
        if not all(
            l in index and e in execs[l] and e.flow.inputs <= configs[index[l]].data for l in locs
        ):
            continue
        for choice in itertools.product(*(execs[l][e] for l in locs)):
            new = list(configs)
            for l, p in zip(locs, choice):
                c = configs[index[l]]
                new[index[l]] = _consume(c, [p], c.data | e.flow.outputs)
            out.append(
                Transition(Nu(e), WorkflowSystem(tuple(new)), "Exec", tuple(zip(locs, choice)))
            )

    for loc, spath, send in sends:
        c = configs[index[loc]]
        if send.src != loc or send.data not in c.data:
            continue
        want = Recv(send.port, send.src, send.dst)
        if send.dst == loc:
            for rpath in recvs[loc].get(want, ()):
                new = list(configs)
                new[index[loc]] = _consume(c, [spath, rpath], c.data)
                out.append(
                    Transition(Tau(send), WorkflowSystem(tuple(new)), "L-Comm", ((loc, spath), (loc, rpath)))
                )
        elif send.dst in index:
            dst = configs[index[send.dst]]
            for rpath in recvs[send.dst].get(want, ()):
                new = list(configs)
                new[index[loc]] = _consume(c, [spath], c.data)
                new[index[send.dst]] = _consume(dst, [rpath], dst.data | {send.data})
                out.append(
                    Transition(
                        Tau(send), WorkflowSystem(tuple(new)), "Comm", ((loc, spath), (send.dst, rpath))
                    )
                )
    return out


def apply(sys: WorkflowSystem, t: Transition) -> WorkflowSystem:
    for cand in enabled_transitions(sys):
        if cand.key == t.key:
            return cand.target
    raise StaleTransition(f"{t.label.text} is not enabled")


def barbs(sys: WorkflowSystem) -> set[Nu]:
    return {t.label for t in enabled_transitions(sys) if isinstance(t.label, Nu)}  # type: ignore[misc]


def run_to_quiescence(
    sys: WorkflowSystem,
    policy: Literal["deterministic", "random"] = "deterministic",
    seed: int | None = None,
    max_steps: int = 1_000_000,
) -> tuple[WorkflowSystem, list[Label]]:
    rng = random.Random(seed)
    state = normalize_system(sys)
    history: list[Label] = []
    for _ in range(max_steps):
        ts = enabled_transitions(state)
        if not ts:
            return state, history
        if policy == "deterministic":
            t = min(ts, key=lambda t: t.key)
        else:
            t = rng.choice(ts)
        history.append(t.label)
        state = t.target
    if enabled_transitions(state):
        raise StepLimitExceeded(f"no quiescence after {max_steps} steps")
    return state, history


# --------------------------------------------------------------------------
# explicit LTS


@dataclass
class Lts:
    states: list[WorkflowSystem]
    edges: list[tuple[int, Label, int]]
    initial: int = 0
    succ: list[list[tuple[Label, int]]] = field(default_factory=list, repr=False)

    def __post_init__(self) -> None:
        if not self.succ:
            self.succ = [[] for _ in self.states]
            for a, lab, b in self.edges:
                self.succ[a].append((lab, b))

    def terminals(self) -> list[int]:
        return [i for i, s in enumerate(self.succ) if not s]


def reachable_lts(
    sys: WorkflowSystem,
    max_states: int = 100_000,
    reduction: Literal["none", "tau-confluence"] = "none",
    verify: bool = True,
) -> Lts:
    """Breadth-first exploration of canonical states.

    With ``reduction="tau-confluence"`` a state offering any tau transition is
    expanded along a single one (the smallest by key).  Because every
    transition commutes with every other (Church-Rosser), the reduced LTS is
    branching, hence weakly, bisimilar to the full one.  ``verify`` checks the
    diamond of the chosen tau against each sibling and raises
    ConfluenceViolation if it does not close.
    """
    init = normalize_system(sys)
    states = [init]
    index = {init.text: 0}
    edges: list[tuple[int, Label, int]] = []
    queue = deque([0])
    while queue:
        i = queue.popleft()
        ts = enabled_transitions(states[i])
        if reduction == "tau-confluence":
            taus = [t for t in ts if isinstance(t.label, Tau)]
            if taus:
                chosen = min(taus, key=lambda t: t.key)
                if verify:
                    _check_diamonds(chosen, ts)
                ts = [chosen]
        seen: set[tuple[str, int]] = set()
        for t in ts:
            j = index.get(t.target.text)
            if j is None:
                if len(states) >= max_states:
                    raise StateSpaceExceeded(f"more than {max_states} reachable states")
                j = len(states)
                index[t.target.text] = j
                states.append(t.target)
                queue.append(j)
            if (t.label.text, j) not in seen:
                seen.add((t.label.text, j))
                edges.append((i, t.label, j))
    return Lts(states, edges, 0)


def _check_diamonds(chosen: Transition, siblings: list[Transition]) -> None:
    after = {}
    for t in enabled_transitions(chosen.target):
        after.setdefault(t.label.text, set()).add(t.target.text)
    for t in siblings:
        if t.target.text == chosen.target.text:
            continue
        mine = after.get(t.label.text, set())
        theirs = {u.target.text for u in enabled_transitions(t.target) if u.label.text == chosen.label.text}
        if not mine & theirs:
            raise ConfluenceViolation(f"{chosen.label.text} and {t.label.text} do not commute")


@dataclass
class ChurchRosserReport:
    ok: bool
    states: int
    diamonds: int
    violation: tuple[int, Label, int, Label, int] | None = None

    def __str__(self) -> str:
        if self.ok:
            return f"CONFLUENT states={self.states} diamonds={self.diamonds}"
        s, l1, w1, l2, w2 = self.violation  # type: ignore[misc]
        return f"VIOLATION state={s} t1={l1.text}->{w1} t2={l2.text}->{w2}"


def check_church_rosser(sys: WorkflowSystem | Lts, max_states: int = 100_000) -> ChurchRosserReport:
    """Every pair of coinitial transitions closes into a common target, each
    side taking the residual of the other (same label)."""
    lts = sys if isinstance(sys, Lts) else reachable_lts(sys, max_states)
    succsets = [{(lab.text, j) for lab, j in out} for out in lts.succ]
    diamonds = 0
    for i, out in enumerate(lts.succ):
        for (l1, w1), (l2, w2) in itertools.combinations(out, 2):
            diamonds += 1
            if w1 == w2:
                continue
            a1, a2 = l1.text, l2.text
            closes = any((a1, w3) in succsets[w2] for lab, w3 in lts.succ[w1] if lab.text == a2)
            if not closes:
                return ChurchRosserReport(False, len(lts.states), diamonds, (i, l1, w1, l2, w2))
    return ChurchRosserReport(True, len(lts.states), diamonds)


# --------------------------------------------------------------------------
# LTS text format


def _one_line(sys: WorkflowSystem) -> str:
    return " | ".join(c.text for c in sys.configs)


def export_lts(lts: Lts) -> str:
    lines = [f"INITIAL {lts.initial}"]
    lines += [f"STATE {i} {_one_line(s)}" for i, s in enumerate(lts.states)]
    lines += [f"EDGE {a} {lab.text} {b}" for a, lab, b in lts.edges]
    return "\n".join(lines) + "\n"


def parse_lts(text: str) -> Lts:
    states: dict[int, WorkflowSystem] = {}
    edges = []
    initial = 0
    for n, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        kind, _, rest = line.partition(" ")
        if kind == "INITIAL":
            initial = int(rest)
        elif kind == "STATE":
            idx, _, body = rest.partition(" ")
            states[int(idx)] = parse_swirl(body)
        elif kind == "EDGE":
            src, _, tail = rest.partition(" ")
            label, _, dst = tail.rpartition(" ")
            edges.append((int(src), parse_label(label), int(dst)))
        else:
            raise ValueError(f"line {n}: unknown record {kind!r}")
    ordered = [states[i] for i in range(len(states))]
    return Lts(ordered, edges, initial)
