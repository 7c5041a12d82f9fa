"""Deployment metadata and compilation of workflow systems into bundles."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Literal, Mapping, Union

from ..ir import NIL, Act, Exec, Nil, Par, Recv, Send, Seq, Trace, WorkflowSystem, normalize


class MetadataMissing(ValueError):
    pass


class MetadataError(ValueError):
    pass


@dataclass(frozen=True)
class Endpoint:
    host: str
    port: int


@dataclass(frozen=True)
class Metadata:
    mode: Literal["simulate", "shell"] = "simulate"
    commands: Mapping[str, str] = field(default_factory=dict)
    # data id -> ("inline", text) | ("path", file)
    payloads: Mapping[str, tuple[str, str]] = field(default_factory=dict)
    endpoints: Mapping[str, Endpoint] = field(default_factory=dict)
    base_dir: Path = Path(".")

    def payload_bytes(self, data: str) -> bytes | None:
        src = self.payloads.get(data)
        if src is None:
            return None
        kind, value = src
        if kind == "inline":
            return value.encode()
        return (self.base_dir / value).read_bytes()


def metadata_from_dict(doc: Any, base_dir: Path = Path(".")) -> Metadata:
    if not isinstance(doc, dict):
        raise MetadataError("metadata must be a JSON object")
    unknown = set(doc) - {"mode", "steps", "data", "locations"}
    if unknown:
        raise MetadataError(f"unknown metadata key(s) {sorted(unknown)}")
    mode = doc.get("mode", "simulate")
    if mode not in ("simulate", "shell"):
        raise MetadataError(f"mode must be simulate or shell, got {mode!r}")
    commands = {}
    for s, entry in doc.get("steps", {}).items():
        if not isinstance(entry, dict) or not isinstance(entry.get("command", ""), str):
            raise MetadataError(f"steps.{s} must be {{command: str}}")
        commands[s] = entry.get("command", "")
    payloads = {}
    for d, entry in doc.get("data", {}).items():
        if not isinstance(entry, dict) or len(entry) != 1 or next(iter(entry)) not in ("inline", "path"):
            raise MetadataError(f"data.{d} must be {{inline: str}} or {{path: str}}")
        (kind, value), = entry.items()
        payloads[d] = (kind, str(value))
    endpoints = {}
    for l, entry in doc.get("locations", {}).items():
        try:
            endpoints[l] = Endpoint(str(entry["host"]), int(entry["port"]))
        except (KeyError, TypeError, ValueError):
            raise MetadataError(f"locations.{l} must be {{host, port}}") from None
    return Metadata(mode, commands, payloads, endpoints, base_dir)


def load_metadata(path: str | Path) -> Metadata:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise MetadataError(f"line {exc.lineno}: {exc.msg}") from None
    return metadata_from_dict(doc, path.parent)


def metadata_to_dict(meta: Metadata) -> dict[str, Any]:
    doc: dict[str, Any] = {"mode": meta.mode}
    if meta.commands:
        doc["steps"] = {s: {"command": c} for s, c in sorted(meta.commands.items())}
    if meta.payloads:
        doc["data"] = {d: {k: v} for d, (k, v) in sorted(meta.payloads.items())}
    if meta.endpoints:
        doc["locations"] = {l: {"host": e.host, "port": e.port} for l, e in sorted(meta.endpoints.items())}
    return doc


# --------------------------------------------------------------------------
# instruction trees


@dataclass(frozen=True)
class NopI:
    pass


@dataclass(frozen=True)
class ExecI:
    step: str
    inputs: frozenset[str]
    outputs: frozenset[str]
    locs: frozenset[str]
    command: str = ""


@dataclass(frozen=True)
class SendI:
    data: str
    port: str
    src: str
    dst: str


@dataclass(frozen=True)
class RecvI:
    port: str
    src: str
    dst: str


@dataclass(frozen=True)
class SeqI:
    first: "Instr"
    then: "Instr"


@dataclass(frozen=True)
class ParI:
    left: "Instr"
    right: "Instr"


Instr = Union[NopI, ExecI, SendI, RecvI, SeqI, ParI]


@dataclass(frozen=True)
class Program:
    loc: str
    preload: frozenset[str]
    tree: Instr


@dataclass(frozen=True)
class Bundle:
    programs: Mapping[str, Program]
    meta: Metadata

    def send_count(self) -> int:
        return sum(1 for p in self.programs.values() for i in instructions(p.tree) if isinstance(i, SendI))


def lower(t: Trace, commands: Mapping[str, str]) -> Instr:
    if isinstance(t, Nil):
        return NopI()
    if isinstance(t, Seq):
        return SeqI(lower(t.first, commands), lower(t.then, commands))
    if isinstance(t, Par):
        return ParI(lower(t.left, commands), lower(t.right, commands))
    assert isinstance(t, Act)
    p = t.pred
    if isinstance(p, Exec):
        return ExecI(p.step, p.flow.inputs, p.flow.outputs, p.locs, commands.get(p.step, ""))
    if isinstance(p, Send):
        return SendI(p.data, p.port, p.src, p.dst)
    assert isinstance(p, Recv)
    return RecvI(p.port, p.src, p.dst)


def raise_(i: Instr) -> Trace:
    """Inverse of :func:`lower` (commands dropped)."""
    if isinstance(i, NopI):
        return NIL
    if isinstance(i, SeqI):
        return Seq(raise_(i.first), raise_(i.then))
    if isinstance(i, ParI):
        return Par(raise_(i.left), raise_(i.right))
    from ..ir import Dataflow

    if isinstance(i, ExecI):
        return Act(Exec(i.step, Dataflow(i.inputs, i.outputs), i.locs))
    if isinstance(i, SendI):
        return Act(Send(i.data, i.port, i.src, i.dst))
    return Act(Recv(i.port, i.src, i.dst))


def instructions(i: Instr):
    stack = [i]
    while stack:
        node = stack.pop()
        if isinstance(node, SeqI):
            stack += [node.then, node.first]
        elif isinstance(node, ParI):
            stack += [node.right, node.left]
        elif not isinstance(node, NopI):
            yield node


def compile_system(sys: WorkflowSystem, meta: Metadata, transport: Literal["inproc", "tcp"] = "inproc") -> Bundle:
    if transport == "tcp":
        missing = sorted(set(sys.locations) - set(meta.endpoints))
        if missing:
            raise MetadataMissing(", ".join(missing))
    programs = {c.loc: Program(c.loc, c.data, lower(normalize(c.trace), meta.commands)) for c in sys.configs}
    if meta.mode == "shell":
        gaps = sorted(
            {i.step for p in programs.values() for i in instructions(p.tree) if isinstance(i, ExecI) and not i.command}
        )
        if gaps:
            raise MetadataMissing(", ".join(gaps))
    return Bundle(programs, meta)
