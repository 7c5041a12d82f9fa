"""Location workers, the in-process message fabric and execution reports."""

from __future__ import annotations

import asyncio
import hashlib
import itertools
import os
import tempfile
from collections import Counter
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Literal, Protocol

from ..ir import WorkflowSystem
from ..semantics import Nu, Tau, enabled_transitions
from .compiler import Bundle, ExecI, Instr, Metadata, NopI, ParI, Program, RecvI, SendI, SeqI


class Deadlock(RuntimeError):
    pass


class StepFailure(RuntimeError):
    pass


class ReplayMismatch(AssertionError):
    pass


def synthesize(step: str, data: str) -> bytes:
    """Deterministic payload of ``data`` as produced by ``step``."""
    return hashlib.sha256(f"{step}\0{data}".encode()).digest()


def preload_payload(meta: Metadata, data: str) -> bytes:
    explicit = meta.payload_bytes(data)
    return explicit if explicit is not None else synthesize("", data)


# --------------------------------------------------------------------------
# reports

EventKind = Literal["EXEC", "SEND", "RECV"]


@dataclass(frozen=True)
class Event:
    seq: int
    time: datetime
    loc: str
    kind: EventKind
    ids: tuple[str, ...]  # EXEC: step; SEND: data port src dst; RECV: data port src dst

    def line(self) -> str:
        return f"EVENT {self.time.isoformat()} {self.loc} {self.kind} {' '.join(self.ids)}"


@dataclass
class ExecutionReport:
    events: list[Event] = field(default_factory=list)
    placement: dict[str, frozenset[str]] = field(default_factory=dict)
    payloads: dict[str, dict[str, bytes]] = field(default_factory=dict)
    status: str = "ok"
    messages: int = 0  # data messages delivered, local ones included
    checksums: dict[str, dict[str, str]] = field(default_factory=dict)  # filled by parse_report

    def digests(self) -> dict[str, dict[str, str]]:
        """sha256 hex digest of every stored payload, per location."""
        if not self.payloads:
            return self.checksums
        return {
            loc: {d: hashlib.sha256(b).hexdigest() for d, b in store.items()} for loc, store in self.payloads.items()
        }

    def text(self) -> str:
        lines = [f"STATUS {self.status}", f"MESSAGES {self.messages}"]
        lines += [e.line() for e in sorted(self.events, key=lambda e: (e.time, e.seq))]
        for loc in sorted(self.placement):
            lines.append(f"PLACEMENT {loc} {' '.join(sorted(self.placement[loc]))}".rstrip())
        for loc, store in sorted(self.digests().items()):
            lines += [f"PAYLOAD {loc} {d} {h}" for d, h in sorted(store.items())]
        return "\n".join(lines) + "\n"

    def merge(self, other: "ExecutionReport") -> "ExecutionReport":
        return ExecutionReport(
            self.events + other.events,
            {**self.placement, **other.placement},
            {**self.payloads, **other.payloads},
            self.status if self.status != "ok" else other.status,
            self.messages + other.messages,
            {**self.checksums, **other.checksums},
        )


def merge_reports(reports: Iterable[ExecutionReport]) -> ExecutionReport:
    """Union of per-location fragments, events ordered by wall clock."""
    out = ExecutionReport()
    for r in reports:
        out = out.merge(r)
    out.events.sort(key=lambda e: (e.time, e.seq))
    return out


def parse_report(text: str) -> ExecutionReport:
    rep = ExecutionReport()
    for n, line in enumerate(text.splitlines()):
        parts = line.split()
        if not parts:
            continue
        if parts[0] == "STATUS":
            rep.status = parts[1]
        elif parts[0] == "MESSAGES":
            rep.messages = int(parts[1])
        elif parts[0] == "EVENT":
            rep.events.append(Event(n, datetime.fromisoformat(parts[1]), parts[2], parts[3], tuple(parts[4:])))  # type: ignore[arg-type]
        elif parts[0] == "PLACEMENT":
            rep.placement[parts[1]] = frozenset(parts[2:])
        elif parts[0] == "PAYLOAD":
            rep.checksums.setdefault(parts[1], {})[parts[2]] = parts[3]
        else:
            raise ValueError(f"line {n + 1}: unknown record {parts[0]!r}")
    return rep


# --------------------------------------------------------------------------
# transports


class Transport(Protocol):
    async def send(self, instr: SendI, payload: bytes) -> None: ...

    async def recv(self, instr: RecvI) -> tuple[str, bytes]: ...

    async def barrier(self, step: str, loc: str, locs: frozenset[str]) -> None: ...


class Monitor:
    """Tracks in-flight leaves and progress for deadlock detection."""

    def __init__(self) -> None:
        self.active = 0
        self.blocked = 0
        self.progress = 0
        self._seq = itertools.count()

    def next_seq(self) -> int:
        return next(self._seq)

    async def blocking(self, awaitable):
        self.blocked += 1
        try:
            return await awaitable
        finally:
            self.blocked -= 1


class InprocFabric:
    """Mailboxes keyed by (port, src, dst) and barriers keyed by step, all in one event loop."""

    def __init__(self, monitor: Monitor) -> None:
        self.monitor = monitor
        self.boxes: dict[tuple[str, str, str], list[tuple[str, bytes]]] = {}
        self.arrived: dict[str, set[str]] = {}
        self.cond = asyncio.Condition()
        self.messages = 0
        self.waiting: Counter[tuple[str, str, str]] = Counter()

    async def send(self, instr: SendI, payload: bytes) -> None:
        async with self.cond:
            self.boxes.setdefault((instr.port, instr.src, instr.dst), []).append((instr.data, payload))
            self.messages += 1
            self.monitor.progress += 1
            self.cond.notify_all()

    async def recv(self, instr: RecvI) -> tuple[str, bytes]:
        key = (instr.port, instr.src, instr.dst)
        async with self.cond:
            self.waiting[key] += 1
            try:
                await self.monitor.blocking(self.cond.wait_for(lambda: bool(self.boxes.get(key))))
            finally:
                self.waiting[key] -= 1
            return self.boxes[key].pop(0)

    async def barrier(self, step: str, loc: str, locs: frozenset[str]) -> None:
        async with self.cond:
            self.arrived.setdefault(step, set()).add(loc)
            self.monitor.progress += 1
            self.cond.notify_all()
            await self.monitor.blocking(self.cond.wait_for(lambda: self.arrived[step] >= locs))


# --------------------------------------------------------------------------
# workers


class Worker:
    def __init__(
        self,
        program: Program,
        meta: Metadata,
        transport: Transport,
        monitor: Monitor,
        report: ExecutionReport,
        workdir: Path | None = None,
    ) -> None:
        self.program = program
        self.loc = program.loc
        self.meta = meta
        self.transport = transport
        self.monitor = monitor
        self.report = report
        self.workdir = workdir
        self.store: dict[str, bytes] = {d: preload_payload(meta, d) for d in sorted(program.preload)}
        self.cond = asyncio.Condition()
        if workdir is not None:
            workdir.mkdir(parents=True, exist_ok=True)
            for d, payload in self.store.items():
                (workdir / d).write_bytes(payload)

    def log(self, kind: EventKind, *ids: str) -> None:
        self.report.events.append(Event(self.monitor.next_seq(), datetime.now(timezone.utc), self.loc, kind, ids))
        self.monitor.progress += 1

    async def _have(self, data: Iterable[str]) -> None:
        need = set(data)
        async with self.cond:
            await self.monitor.blocking(self.cond.wait_for(lambda: need <= self.store.keys()))

    async def _store(self, items: dict[str, bytes], kind: EventKind, *ids: str) -> None:
        # logged under the lock so dependent events are always ordered after it
        async with self.cond:
            self.log(kind, *ids)
            self.store.update(items)
            if self.workdir is not None:
                for d, payload in items.items():
                    (self.workdir / d).write_bytes(payload)
            self.cond.notify_all()

    async def run(self) -> None:
        await self._run(self.program.tree)

    async def _run(self, node: Instr) -> None:
        if isinstance(node, NopI):
            return
        if isinstance(node, SeqI):
            await self._run(node.first)
            await self._run(node.then)
            return
        if isinstance(node, ParI):
            await asyncio.gather(self._run(node.left), self._run(node.right))
            return
        self.monitor.active += 1
        try:
            if isinstance(node, ExecI):
                await self._exec(node)
            elif isinstance(node, SendI):
                await self._have([node.data])
                await self.transport.send(node, self.store[node.data])
                self.log("SEND", node.data, node.port, node.src, node.dst)
            else:
                data, payload = await self.transport.recv(node)
                await self._store({data: payload}, "RECV", data, node.port, node.src, node.dst)
        finally:
            self.monitor.active -= 1

    async def _exec(self, node: ExecI) -> None:
        await self._have(node.inputs)
        if len(node.locs) > 1:
            await self.transport.barrier(node.step, self.loc, node.locs)
        if self.meta.mode == "shell":
            outputs = await self._shell(node)
        else:
            outputs = {d: synthesize(node.step, d) for d in sorted(node.outputs)}
        await self._store(outputs, "EXEC", node.step)

    async def _shell(self, node: ExecI) -> dict[str, bytes]:
        assert self.workdir is not None
        env = {
            **os.environ,
            "SWIRL_STEP": node.step,
            "SWIRL_LOCATION": self.loc,
            "SWIRL_INPUTS": " ".join(sorted(node.inputs)),
            "SWIRL_OUTPUTS": " ".join(sorted(node.outputs)),
        }
        proc = await asyncio.create_subprocess_shell(
            node.command,
            cwd=self.workdir,
            env=env,
            stdout=asyncio.subprocess.DEVNULL,
            stderr=asyncio.subprocess.PIPE,
        )
        _, err = await proc.communicate()
        if proc.returncode != 0:
            raise StepFailure(f"{node.step}@{self.loc} exited {proc.returncode}: {err.decode(errors='replace').strip()}")
        out = {}
        for d in sorted(node.outputs):
            path = self.workdir / d
            if not path.exists():
                raise StepFailure(f"{node.step}@{self.loc} did not produce {d}")
            out[d] = path.read_bytes()
        return out


async def watchdog(monitor: Monitor, interval: float, describe) -> None:
    """Raise Deadlock once every in-flight leaf is blocked across a full interval."""
    last = -1
    while True:
        await asyncio.sleep(interval)
        stuck = monitor.active > 0 and monitor.blocked == monitor.active
        if stuck and monitor.progress == last:
            raise Deadlock(describe())
        last = monitor.progress


async def _run_all(bundle: Bundle, workroot: Path | None, poll: float) -> ExecutionReport:
    monitor = Monitor()
    fabric = InprocFabric(monitor)
    report = ExecutionReport()
    workers = [
        Worker(p, bundle.meta, fabric, monitor, report, None if workroot is None else workroot / loc)
        for loc, p in sorted(bundle.programs.items())
    ]

    def describe() -> str:
        waiting = sorted(k for k, n in fabric.waiting.items() if n)
        return f"all {monitor.blocked} pending instructions blocked" + (f"; waiting on {waiting}" if waiting else "")

    main = asyncio.gather(*(w.run() for w in workers))
    dog = asyncio.ensure_future(watchdog(monitor, poll, describe))
    done, _ = await asyncio.wait({main, dog}, return_when=asyncio.FIRST_COMPLETED)
    if dog in done:
        main.cancel()
        await asyncio.gather(main, return_exceptions=True)
        dog.result()
    dog.cancel()
    await asyncio.gather(dog, return_exceptions=True)
    main.result()
    report.placement = {w.loc: frozenset(w.store) for w in workers}
    report.payloads = {w.loc: dict(w.store) for w in workers}
    report.messages = fabric.messages
    report.events.sort(key=lambda e: e.seq)
    return report


def run_inproc(bundle: Bundle, workdir: str | Path | None = None, poll: float = 0.01) -> ExecutionReport:
    """Run every location program as a concurrent worker in this process.

    Shell mode gives each location its own directory under ``workdir`` (a
    temporary directory if omitted) where data are files named by data id.
    """
    if bundle.meta.mode == "shell" and workdir is None:
        with tempfile.TemporaryDirectory(prefix="swirl-") as tmp:
            return asyncio.run(_run_all(bundle, Path(tmp), poll))
    return asyncio.run(_run_all(bundle, None if workdir is None else Path(workdir), poll))


# --------------------------------------------------------------------------
# replay


def replay(sys: WorkflowSystem, report: ExecutionReport, max_frontier: int = 10_000) -> WorkflowSystem:
    """Check the event log is a run of ``sys`` and return the final state.

    Events are taken in list order.  Each RECV becomes a communication and the first EXEC of a step becomes its
    execution; SEND events are implied by their RECV.  Several semantic states
    can match the log when predicates repeat, so the whole frontier is kept.
    """
    frontier = {sys.text: sys}
    seen_exec: set[str] = set()
    for ev in report.events:
        if ev.kind == "SEND":
            continue
        if ev.kind == "EXEC":
            if ev.ids[0] in seen_exec:
                continue
            seen_exec.add(ev.ids[0])

            def match(lab, step=ev.ids[0]):
                return isinstance(lab, Nu) and lab.step == step
        else:
            data, port, src, dst = ev.ids

            def match(lab, want=(data, port, src, dst)):
                s = getattr(lab, "send", None)
                return isinstance(lab, Tau) and (s.data, s.port, s.src, s.dst) == want

        nxt: dict[str, WorkflowSystem] = {}
        for state in frontier.values():
            for t in enabled_transitions(state):
                if match(t.label):
                    nxt.setdefault(t.target.text, t.target)
        if not nxt:
            raise ReplayMismatch(f"{ev.line()} is not enabled")
        if len(nxt) > max_frontier:
            raise ReplayMismatch("replay frontier too large")
        frontier = nxt
    # every matching state agrees on placement; pick one deterministically
    return frontier[min(frontier)]
