"""SWIRL terms: predicates, traces, location configurations and systems.

Every node renders to a canonical text (the ``.swirl`` surface syntax) which is
cached on first use.  Rendering is injective on structure, so equality and
hashing go through the text; this keeps state-space exploration cheap.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator, Union


def _braces(ids: Iterable[str]) -> str:
    return "{" + ",".join(sorted(ids)) + "}"


class _Textual:
    """Mixin: equality and hashing by canonical text."""

    @property
    def text(self) -> str:  # pragma: no cover - overridden
        raise NotImplementedError

    def __eq__(self, other: object) -> bool:
        if self is other:
            return True
        if type(self) is not type(other):
            return NotImplemented
        return self.text == other.text  # type: ignore[attr-defined]

    def __hash__(self) -> int:
        return hash(self.text)

    def __str__(self) -> str:
        return self.text


@dataclass(frozen=True, eq=False)
class Dataflow(_Textual):
    inputs: frozenset[str] = frozenset()
    outputs: frozenset[str] = frozenset()

    def __post_init__(self) -> None:
        object.__setattr__(self, "inputs", frozenset(self.inputs))
        object.__setattr__(self, "outputs", frozenset(self.outputs))
        if self.inputs & self.outputs:
            raise ValueError(f"dataflow inputs and outputs overlap: {sorted(self.inputs & self.outputs)}")

    @cached_property
    def text(self) -> str:
        return f"{_braces(self.inputs)}->{_braces(self.outputs)}"


@dataclass(frozen=True, eq=False)
class Exec(_Textual):
    step: str
    flow: Dataflow
    locs: frozenset[str]

    def __post_init__(self) -> None:
        object.__setattr__(self, "locs", frozenset(self.locs))
        if not self.step:
            raise ValueError("exec needs a step id")
        if not self.locs:
            raise ValueError(f"exec({self.step}) needs a non-empty location set")

    @cached_property
    def text(self) -> str:
        return f"exec({self.step}, {self.flow.text}, {_braces(self.locs)})"


@dataclass(frozen=True, eq=False)
class Send(_Textual):
    data: str
    port: str
    src: str
    dst: str

    def __post_init__(self) -> None:
        if not (self.data and self.port and self.src and self.dst):
            raise ValueError("send ids must be non-empty")

    @cached_property
    def text(self) -> str:
        return f"send({self.data}->{self.port}, {self.src}, {self.dst})"


@dataclass(frozen=True, eq=False)
class Recv(_Textual):
    port: str
    src: str
    dst: str

    def __post_init__(self) -> None:
        if not (self.port and self.src and self.dst):
            raise ValueError("recv ids must be non-empty")

    @cached_property
    def text(self) -> str:
        return f"recv({self.port}, {self.src}, {self.dst})"


Predicate = Union[Exec, Send, Recv]


class Trace(_Textual):
    """Base class of execution traces."""


@dataclass(frozen=True, eq=False)
class Nil(Trace):
    @property
    def text(self) -> str:
        return "0"


@dataclass(frozen=True, eq=False)
class Act(Trace):
    pred: Predicate

    @property
    def text(self) -> str:
        return self.pred.text


@dataclass(frozen=True, eq=False)
class Seq(Trace):
    first: Trace
    then: Trace

    @cached_property
    def text(self) -> str:
        # `.` is right-associative and binds tighter than `|`
        left = self.first.text
        if isinstance(self.first, (Seq, Par)):
            left = f"({left})"
        right = self.then.text
        if isinstance(self.then, Par):
            right = f"({right})"
        return f"{left}.{right}"


@dataclass(frozen=True, eq=False)
class Par(Trace):
    left: Trace
    right: Trace

    @cached_property
    def text(self) -> str:
        left = self.left.text
        if isinstance(self.left, Par):
            left = f"({left})"
        return f"{left} | {self.right.text}"


NIL = Nil()


def seq(*items: Trace) -> Trace:
    """Right-nested sequence; ``seq()`` is ``0``."""
    if not items:
        return NIL
    out = items[-1]
    for t in reversed(items[:-1]):
        out = Seq(t, out)
    return out


def par(*items: Trace) -> Trace:
    """Right-nested parallel composition; ``par()`` is ``0``."""
    if not items:
        return NIL
    out = items[-1]
    for t in reversed(items[:-1]):
        out = Par(t, out)
    return out


def act(pred: Predicate) -> Act:
    return Act(pred)


@dataclass(frozen=True, eq=False)
class LocationConfig(_Textual):
    loc: str
    data: frozenset[str]
    trace: Trace

    def __post_init__(self) -> None:
        object.__setattr__(self, "data", frozenset(self.data))
        if not self.loc:
            raise ValueError("location id must be non-empty")

    @cached_property
    def text(self) -> str:
        return f"loc {self.loc} {{ data={_braces(self.data)}; trace={self.trace.text} }}"


@dataclass(frozen=True, eq=False)
class WorkflowSystem(_Textual):
    configs: tuple[LocationConfig, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "configs", tuple(self.configs))
        seen: set[str] = set()
        for c in self.configs:
            if c.loc in seen:
                raise DuplicateLocation(c.loc)
            seen.add(c.loc)

    @cached_property
    def text(self) -> str:
        return "\n| ".join(c.text for c in self.configs)

    def config(self, loc: str) -> LocationConfig:
        for c in self.configs:
            if c.loc == loc:
                return c
        raise KeyError(loc)

    @property
    def locations(self) -> list[str]:
        return [c.loc for c in self.configs]

    def placement(self) -> dict[str, frozenset[str]]:
        return {c.loc: c.data for c in self.configs}


class DuplicateLocation(ValueError):
    """Two configurations in one system name the same location."""


# --------------------------------------------------------------------------
# traversal helpers


def predicates(t: Trace) -> Iterator[Predicate]:
    """Predicates of ``t`` in left-to-right syntactic order."""
    stack = [t]
    while stack:
        node = stack.pop()
        if isinstance(node, Act):
            yield node.pred
        elif isinstance(node, Seq):
            stack.append(node.then)
            stack.append(node.first)
        elif isinstance(node, Par):
            stack.append(node.right)
            stack.append(node.left)


def system_predicates(sys: WorkflowSystem) -> Iterator[tuple[str, Predicate]]:
    for c in sys.configs:
        for p in predicates(c.trace):
            yield c.loc, p


# --------------------------------------------------------------------------
# structural congruence


def _flatten(t: Trace, kind: type) -> list[Trace]:
    out: list[Trace] = []
    stack = [t]
    while stack:
        node = stack.pop()
        if isinstance(node, kind):
            if kind is Seq:
                stack.append(node.then)  # type: ignore[attr-defined]
                stack.append(node.first)  # type: ignore[attr-defined]
            else:
                stack.append(node.right)  # type: ignore[attr-defined]
                stack.append(node.left)  # type: ignore[attr-defined]
        elif not isinstance(node, Nil):
            out.append(node)
    return out


def normalize(t: Trace) -> Trace:
    """Canonical representative of ``t`` under 0-identity and |-commutativity.

    Sequences and parallel compositions are flattened, stripped of ``0`` and
    rebuilt right-nested; parallel branches are sorted by rendered text.
    """
    if isinstance(t, (Nil, Act)):
        return t
    if isinstance(t, Seq):
        items: list[Trace] = []
        for child in (t.first, t.then):
            n = normalize(child)
            if isinstance(n, Seq):
                items.extend(_flatten(n, Seq))
            elif not isinstance(n, Nil):
                items.append(n)
        return seq(*items)
    items = []
    for child in (t.left, t.right):  # type: ignore[attr-defined]
        n = normalize(child)
        if isinstance(n, Par):
            items.extend(_flatten(n, Par))
        elif not isinstance(n, Nil):
            items.append(n)
    items.sort(key=lambda x: x.text)
    return par(*items)


def congruent(t1: Trace, t2: Trace) -> bool:
    return normalize(t1) == normalize(t2)


def normalize_config(c: LocationConfig) -> LocationConfig:
    return LocationConfig(c.loc, c.data, normalize(c.trace))


def normalize_system(sys: WorkflowSystem) -> WorkflowSystem:
    """Normalize every trace and order configurations by location id."""
    return WorkflowSystem(tuple(sorted((normalize_config(c) for c in sys.configs), key=lambda c: c.loc)))


def is_empty(t: Trace) -> bool:
    """True iff ``t`` is congruent to ``0``."""
    return next(predicates(t), None) is None
