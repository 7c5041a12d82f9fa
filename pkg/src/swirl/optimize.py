"""Removal of redundant communications.

Each location trace is scanned left to right across both ``.`` and ``|``,
threading a set of already-kept send/recv predicates.  A communication is
dropped when it is local (source equals destination) or already in the set;
exec predicates are always kept and never enter the set.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

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
    normalize,
    system_predicates,
)


def _scan(t: Trace, seen: set[Predicate]) -> Trace:
    if isinstance(t, Act):
        p = t.pred
        if isinstance(p, Exec):
            return t
        if p.src == p.dst or p in seen:
            return NIL
        seen.add(p)
        return t
    if isinstance(t, Seq):
        first = _scan(t.first, seen)
        return Seq(first, _scan(t.then, seen))
    if isinstance(t, Par):
        left = _scan(t.left, seen)
        return Par(left, _scan(t.right, seen))
    return t


def optimize_trace(t: Trace) -> Trace:
    return normalize(_scan(t, set()))


def optimize(sys: WorkflowSystem) -> WorkflowSystem:
    return WorkflowSystem(
        tuple(LocationConfig(c.loc, c.data, optimize_trace(normalize(c.trace))) for c in sys.configs)
    )


@dataclass
class CommStats:
    sends: int = 0
    recvs: int = 0
    execs: int = 0
    per_pair: Counter = field(default_factory=Counter)  # (src, dst) -> sends

    def summary(self) -> str:
        lines = [f"sends {self.sends}", f"recvs {self.recvs}", f"execs {self.execs}"]
        lines += [f"pair {src} {dst} {n}" for (src, dst), n in sorted(self.per_pair.items())]
        return "\n".join(lines) + "\n"


def comm_stats(sys: WorkflowSystem) -> CommStats:
    st = CommStats()
    for _, p in system_predicates(sys):
        if isinstance(p, Send):
            st.sends += 1
            st.per_pair[(p.src, p.dst)] += 1
        elif isinstance(p, Recv):
            st.recvs += 1
        else:
            st.execs += 1
    return st
