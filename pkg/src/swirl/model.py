"""Distributed workflow instances: the bipartite step/port graph, locations,
step-to-location mapping, data elements and their ports.

Instances are loaded from a JSON document::

    {
      "steps": [{"id": "s1", "command": "..."}, ...],
      "ports": ["p1", ...],
      "deps": [{"from": "s1", "to": "p1"}, ...],
      "locations": ["ld", ...],
      "mapping": {"s1": ["ld"], ...},
      "data": {"d1": "p1", ...},
      "placement": {"ld": ["d0"], ...}        (optional)
    }
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping


class NotFound(KeyError):
    pass


class ParseError(ValueError):
    def __init__(self, msg: str, line: int | None = None, field: str | None = None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field!r}")
        super().__init__(f"{', '.join(where)}: {msg}" if where else msg)
        self.line = line
        self.field = field


class ValidationError(ValueError):
    pass


@dataclass(frozen=True)
class Workflow:
    steps: frozenset[str]
    ports: frozenset[str]
    deps: frozenset[tuple[str, str]]

    def in_ports(self, s: str) -> frozenset[str]:
        self._step(s)
        return frozenset(a for a, b in self.deps if b == s)

    def out_ports(self, s: str) -> frozenset[str]:
        self._step(s)
        return frozenset(b for a, b in self.deps if a == s)

    def in_steps(self, p: str) -> frozenset[str]:
        self._port(p)
        return frozenset(a for a, b in self.deps if b == p)

    def out_steps(self, p: str) -> frozenset[str]:
        self._port(p)
        return frozenset(b for a, b in self.deps if a == p)

    def _step(self, s: str) -> None:
        if s not in self.steps:
            raise NotFound(f"unknown step {s!r}")

    def _port(self, p: str) -> None:
        if p not in self.ports:
            raise NotFound(f"unknown port {p!r}")


@dataclass(frozen=True)
class DistributedWorkflowInstance:
    workflow: Workflow
    locations: frozenset[str]
    mapping: Mapping[str, frozenset[str]]
    data: frozenset[str]
    data_port: Mapping[str, str]
    placement: Mapping[str, frozenset[str]] = field(default_factory=dict)
    step_meta: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        validate(self)

    def in_data(self, s: str) -> frozenset[str]:
        ports = self.workflow.in_ports(s)
        return frozenset(d for d, p in self.data_port.items() if p in ports)

    def out_data(self, s: str) -> frozenset[str]:
        ports = self.workflow.out_ports(s)
        return frozenset(d for d, p in self.data_port.items() if p in ports)

    def work_queue(self, loc: str) -> frozenset[str]:
        if loc not in self.locations:
            raise NotFound(f"unknown location {loc!r}")
        return frozenset(s for s, ls in self.mapping.items() if loc in ls)

    def locations_of(self, s: str) -> frozenset[str]:
        if s not in self.workflow.steps:
            raise NotFound(f"unknown step {s!r}")
        return self.mapping[s]

    def topological_steps(self) -> list[str]:
        """Steps in a dependency-respecting order (ties broken by id)."""
        order = _toposort(self.workflow)
        assert order is not None
        return order


def _step_graph(w: Workflow) -> dict[str, set[str]]:
    succ: dict[str, set[str]] = {s: set() for s in w.steps}
    producers: dict[str, set[str]] = {p: set() for p in w.ports}
    consumers: dict[str, set[str]] = {p: set() for p in w.ports}
    for a, b in w.deps:
        if a in w.steps:
            producers[b].add(a)
        else:
            consumers[a].add(b)
    for p in w.ports:
        for s in producers[p]:
            succ[s] |= consumers[p]
    return succ


def _toposort(w: Workflow) -> list[str] | None:
    succ = _step_graph(w)
    indeg = {s: 0 for s in w.steps}
    for s in succ:
        for t in succ[s]:
            indeg[t] += 1
    ready = sorted(s for s, k in indeg.items() if k == 0)
    order = []
    while ready:
        s = ready.pop(0)
        order.append(s)
        for t in sorted(succ[s]):
            indeg[t] -= 1
            if indeg[t] == 0:
                ready.append(t)
        ready.sort()
    return order if len(order) == len(w.steps) else None


def validate(inst: DistributedWorkflowInstance) -> None:
    """Raise ValidationError naming the first violated invariant."""
    w = inst.workflow
    for kind, ids in (("step", w.steps), ("port", w.ports), ("location", inst.locations), ("data", inst.data)):
        if any(not isinstance(i, str) or not i for i in ids):
            raise ValidationError(f"empty {kind} id")
    clash = w.steps & w.ports
    if clash:
        raise ValidationError(f"ids used both as step and port: {sorted(clash)}")
    for a, b in w.deps:
        a_step, a_port = a in w.steps, a in w.ports
        b_step, b_port = b in w.steps, b in w.ports
        if not (a_step or a_port):
            raise ValidationError(f"dependency endpoint {a!r} does not exist")
        if not (b_step or b_port):
            raise ValidationError(f"dependency endpoint {b!r} does not exist")
        if not ((a_step and b_port) or (a_port and b_step)):
            raise ValidationError(f"dependency {a!r}->{b!r} is not bipartite")
    for s in w.steps:
        locs = inst.mapping.get(s)
        if not locs:
            raise ValidationError(f"step {s!r} is mapped to no location")
    for s, locs in inst.mapping.items():
        if s not in w.steps:
            raise ValidationError(f"mapping names unknown step {s!r}")
        unknown = set(locs) - inst.locations
        if unknown:
            raise ValidationError(f"step {s!r} mapped to unknown location(s) {sorted(unknown)}")
    if set(inst.data_port) != set(inst.data):
        raise ValidationError("every data element needs exactly one port")
    by_port: dict[str, str] = {}
    for d, p in inst.data_port.items():
        if p not in w.ports:
            raise ValidationError(f"data {d!r} mapped to unknown port {p!r}")
        if p in by_port:
            # recv predicates carry only the port: two data on one port are indistinguishable
            raise ValidationError(f"port {p!r} carries more than one data element ({by_port[p]!r}, {d!r})")
        by_port[p] = d
    for loc, ds in inst.placement.items():
        if loc not in inst.locations:
            raise ValidationError(f"placement names unknown location {loc!r}")
        unknown = set(ds) - inst.data
        if unknown:
            raise ValidationError(f"placement at {loc!r} names unknown data {sorted(unknown)}")
    for s in inst.step_meta:
        if s not in w.steps:
            raise ValidationError(f"command given for unknown step {s!r}")
    if _toposort(w) is None:
        raise ValidationError("cycle detected in step dependencies")


def make_instance(
    steps,
    ports,
    deps,
    locations,
    mapping,
    data_port,
    placement=None,
    step_meta=None,
) -> DistributedWorkflowInstance:
    """Convenience constructor from plain Python collections."""
    return DistributedWorkflowInstance(
        workflow=Workflow(frozenset(steps), frozenset(ports), frozenset((a, b) for a, b in deps)),
        locations=frozenset(locations),
        mapping={s: frozenset(ls) for s, ls in mapping.items()},
        data=frozenset(data_port),
        data_port=dict(data_port),
        placement={l: frozenset(ds) for l, ds in (placement or {}).items()},
        step_meta=dict(step_meta or {}),
    )


# --------------------------------------------------------------------------
# file format

_KEYS = {"steps", "ports", "deps", "locations", "mapping", "data", "placement"}
_REQUIRED = _KEYS - {"placement"}


def _str_list(obj: Any, name: str) -> list[str]:
    if not isinstance(obj, list) or not all(isinstance(x, str) for x in obj):
        raise ParseError("expected a list of strings", field=name)
    return obj


def instance_from_dict(doc: Any) -> DistributedWorkflowInstance:
    if not isinstance(doc, dict):
        raise ParseError("top level must be an object")
    unknown = set(doc) - _KEYS
    if unknown:
        raise ParseError(f"unknown key(s) {sorted(unknown)}", field=sorted(unknown)[0])
    missing = _REQUIRED - set(doc)
    if missing:
        raise ParseError(f"missing key(s) {sorted(missing)}", field=sorted(missing)[0])

    steps: list[str] = []
    meta: dict[str, str] = {}
    if not isinstance(doc["steps"], list):
        raise ParseError("expected a list", field="steps")
    for i, entry in enumerate(doc["steps"]):
        if not isinstance(entry, dict) or not isinstance(entry.get("id"), str) or set(entry) - {"id", "command"}:
            raise ParseError("expected {id, command?}", field=f"steps[{i}]")
        steps.append(entry["id"])
        if "command" in entry:
            if not isinstance(entry["command"], str):
                raise ParseError("command must be a string", field=f"steps[{i}].command")
            meta[entry["id"]] = entry["command"]
    ports = _str_list(doc["ports"], "ports")
    if not isinstance(doc["deps"], list):
        raise ParseError("expected a list", field="deps")
    deps = []
    for i, link in enumerate(doc["deps"]):
        if (
            not isinstance(link, dict)
            or set(link) != {"from", "to"}
            or not all(isinstance(v, str) for v in link.values())
        ):
            raise ParseError("expected {from, to}", field=f"deps[{i}]")
        deps.append((link["from"], link["to"]))
    locations = _str_list(doc["locations"], "locations")
    if not isinstance(doc["mapping"], dict):
        raise ParseError("expected an object", field="mapping")
    mapping = {s: _str_list(ls, f"mapping.{s}") for s, ls in doc["mapping"].items()}
    if not isinstance(doc["data"], dict) or not all(isinstance(p, str) for p in doc["data"].values()):
        raise ParseError("expected an object of data -> port", field="data")
    placement_doc = doc.get("placement", {})
    if not isinstance(placement_doc, dict):
        raise ParseError("expected an object", field="placement")
    placement = {l: _str_list(ds, f"placement.{l}") for l, ds in placement_doc.items()}

    for name, ids in (("steps", steps), ("ports", ports), ("locations", locations)):
        if len(set(ids)) != len(ids):
            raise ValidationError(f"duplicate id in {name}")
    return make_instance(steps, ports, deps, locations, mapping, doc["data"], placement, meta)


def load_instance(path: str | Path) -> DistributedWorkflowInstance:
    return loads_instance(Path(path).read_text())


def loads_instance(text: str) -> DistributedWorkflowInstance:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, line=exc.lineno) from None
    return instance_from_dict(doc)


def instance_to_dict(inst: DistributedWorkflowInstance) -> dict[str, Any]:
    w = inst.workflow
    steps = []
    for s in sorted(w.steps):
        entry = {"id": s}
        if s in inst.step_meta:
            entry["command"] = inst.step_meta[s]
        steps.append(entry)
    doc: dict[str, Any] = {
        "steps": steps,
        "ports": sorted(w.ports),
        "deps": [{"from": a, "to": b} for a, b in sorted(w.deps)],
        "locations": sorted(inst.locations),
        "mapping": {s: sorted(inst.mapping[s]) for s in sorted(inst.mapping)},
        "data": {d: inst.data_port[d] for d in sorted(inst.data_port)},
    }
    placement = {l: sorted(ds) for l, ds in sorted(inst.placement.items()) if ds}
    if placement:
        doc["placement"] = placement
    return doc


def dumps_instance(inst: DistributedWorkflowInstance) -> str:
    """Canonical JSON text: sorted ids, two-space indent, trailing newline."""
    return json.dumps(instance_to_dict(inst), indent=2) + "\n"
