"""Deliberately broken optimizer used to show the equivalence checker bites."""

from __future__ import annotations

from swirl.ir import NIL, Act, Exec, LocationConfig, Par, Recv, Seq, Trace, WorkflowSystem, normalize


def _scan_sends_only(t: Trace, seen: set) -> Trace:
    # recvs never enter the seen set, so only the sending side is deduplicated
    if isinstance(t, Act):
        p = t.pred
        if isinstance(p, Exec):
            return t
        if p.src == p.dst or p in seen:
            return NIL
        if not isinstance(p, Recv):
            seen.add(p)
        return t
    if isinstance(t, Seq):
        first = _scan_sends_only(t.first, seen)
        return Seq(first, _scan_sends_only(t.then, seen))
    if isinstance(t, Par):
        left = _scan_sends_only(t.left, seen)
        return Par(left, _scan_sends_only(t.right, seen))
    return t


def broken_optimize(sys: WorkflowSystem) -> WorkflowSystem:
    return WorkflowSystem(
        tuple(LocationConfig(c.loc, c.data, normalize(_scan_sends_only(normalize(c.trace), set()))) for c in sys.configs)
    )
