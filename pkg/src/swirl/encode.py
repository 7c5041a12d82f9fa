"""Lowering of distributed workflow instances to SWIRL workflow systems."""

from __future__ import annotations

from .ir import (
    Act,
    Dataflow,
    Exec,
    LocationConfig,
    Recv,
    Send,
    Trace,
    WorkflowSystem,
    normalize,
    par,
    seq,
)
from .model import DistributedWorkflowInstance


class PreconditionViolation(ValueError):
    pass


def exec_predicate(inst: DistributedWorkflowInstance, s: str) -> Exec:
    return Exec(s, Dataflow(inst.in_data(s), inst.out_data(s)), inst.locations_of(s))


def building_block(inst: DistributedWorkflowInstance, s: str, loc: str) -> Trace:
    """recv* . exec . send* fragment realizing step ``s`` at ``loc``.

    An empty receive or send group is ``0``.  The result is not normalized.
    """
    if loc not in inst.locations_of(s):
        raise PreconditionViolation(f"step {s!r} is not mapped to {loc!r}")
    w = inst.workflow

    recvs = []
    for d in sorted(inst.in_data(s)):
        port = inst.data_port[d]
        producer_locs = set()
        for producer in w.in_steps(port):
            producer_locs |= inst.mapping[producer]
        for src in sorted(producer_locs):
            recvs.append(Act(Recv(port, src, loc)))

    sends = []
    for d in sorted(inst.out_data(s)):
        port = inst.data_port[d]
        for consumer in sorted(w.out_steps(port)):
            # one send per (consumer, location): duplicates are intentional
            for dst in sorted(inst.mapping[consumer]):
                sends.append(Act(Send(d, port, loc, dst)))

    return seq(par(*recvs), Act(exec_predicate(inst, s)), par(*sends))


def encode(inst: DistributedWorkflowInstance) -> WorkflowSystem:
    """One configuration per location, ordered by location id.

    Each trace is the parallel composition of the building blocks of the
    location's work queue; data starts at the instance placement.
    """
    traces: dict[str, list[Trace]] = {l: [] for l in inst.locations}
    for s in sorted(inst.workflow.steps):
        for loc in sorted(inst.mapping[s]):
            traces[loc].append(building_block(inst, s, loc))
    configs = [
        LocationConfig(l, frozenset(inst.placement.get(l, ())), normalize(par(*traces[l])))
        for l in sorted(inst.locations)
    ]
    return WorkflowSystem(tuple(configs))
