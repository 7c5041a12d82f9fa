"""One location program per process, communicating over TCP."""

from __future__ import annotations

import asyncio
import logging
from dataclasses import dataclass
from pathlib import Path

from .compiler import Bundle, RecvI, SendI
from .executor import Deadlock, ExecutionReport, Monitor, Worker
from .wire import BARRIER_PORT, Frame, FrameCorruption, encode_frame, read_frame

log = logging.getLogger(__name__)


class ConnectionFailure(RuntimeError):
    pass


@dataclass(frozen=True)
class TcpOptions:
    retries: int = 10
    retry_delay: float = 0.5
    idle_timeout: float = 30.0


class TcpTransport:
    def __init__(self, bundle: Bundle, loc: str, monitor: Monitor, opts: TcpOptions) -> None:
        self.bundle = bundle
        self.loc = loc
        self.monitor = monitor
        self.opts = opts
        self.boxes: dict[tuple[str, str, str], list[tuple[str, bytes]]] = {}
        self.barrier_msgs: set[tuple[str, str]] = set()  # (step, src)
        self.cond = asyncio.Condition()
        self.writers: dict[str, asyncio.StreamWriter] = {}
        self.locks: dict[str, asyncio.Lock] = {}
        self.messages = 0
        self.failure: BaseException | None = None
        self.server: asyncio.base_events.Server | None = None
        self.readers: set[asyncio.Task] = set()

    async def start(self) -> None:
        ep = self.bundle.meta.endpoints[self.loc]
        self.server = await asyncio.start_server(self._serve, ep.host, ep.port)

    async def close(self) -> None:
        for w in self.writers.values():
            w.close()
        for w in self.writers.values():
            try:
                await w.wait_closed()
            except OSError:
                pass
        if self.server is not None:
            self.server.close()
            await self.server.wait_closed()
        for t in self.readers:
            t.cancel()
        await asyncio.gather(*self.readers, return_exceptions=True)

    async def _serve(self, reader: asyncio.StreamReader, writer: asyncio.StreamWriter) -> None:
        self.readers.add(asyncio.current_task())  # type: ignore[arg-type]
        try:
            while (frame := await read_frame(reader)) is not None:
                if frame.dst != self.loc:
                    raise FrameCorruption(f"frame for {frame.dst} delivered to {self.loc}")
                async with self.cond:
                    if frame.is_barrier:
                        self.barrier_msgs.add((frame.data, frame.src))
                    else:
                        self.boxes.setdefault((frame.port, frame.src, frame.dst), []).append(
                            (frame.data, frame.payload)
                        )
                    self.monitor.progress += 1
                    self.cond.notify_all()
        except FrameCorruption as exc:
            async with self.cond:
                self.failure = exc
                self.cond.notify_all()
        except (ConnectionError, asyncio.CancelledError):
            pass
        finally:
            writer.close()

    async def _connect(self, dst: str) -> asyncio.StreamWriter:
        if dst in self.writers:
            return self.writers[dst]
        ep = self.bundle.meta.endpoints[dst]
        last: OSError | None = None
        for attempt in range(self.opts.retries):
            try:
                _, writer = await asyncio.open_connection(ep.host, ep.port)
                self.writers[dst] = writer
                return writer
            except OSError as exc:
                last = exc
                log.debug("connect %s attempt %d failed: %s", dst, attempt + 1, exc)
                await asyncio.sleep(self.opts.retry_delay)
        raise ConnectionFailure(f"{self.loc} -> {dst} at {ep.host}:{ep.port}: {last}")

    async def _write(self, frame: Frame) -> None:
        lock = self.locks.setdefault(frame.dst, asyncio.Lock())
        async with lock:
            writer = await self._connect(frame.dst)
            writer.write(encode_frame(frame))
            await writer.drain()

    async def _wait(self, pred) -> None:
        def ready() -> bool:
            return self.failure is not None or pred()

        async with self.cond:
            await self.monitor.blocking(self.cond.wait_for(ready))
            if self.failure is not None:
                raise self.failure

    async def send(self, instr: SendI, payload: bytes) -> None:
        if instr.dst == self.loc:
            # same-location communication never touches a socket
            async with self.cond:
                self.boxes.setdefault((instr.port, instr.src, instr.dst), []).append((instr.data, payload))
                self.cond.notify_all()
        else:
            await self._write(Frame(instr.port, instr.data, instr.src, instr.dst, payload))
        self.messages += 1
        self.monitor.progress += 1

    async def recv(self, instr: RecvI) -> tuple[str, bytes]:
        key = (instr.port, instr.src, instr.dst)
        await self._wait(lambda: bool(self.boxes.get(key)))
        return self.boxes[key].pop(0)

    async def barrier(self, step: str, loc: str, locs: frozenset[str]) -> None:
        """Two-phase rendezvous led by the lowest location id."""
        coord = min(locs)
        if loc == coord:
            others = locs - {loc}
            await self._wait(lambda: all((step, o) in self.barrier_msgs for o in others))
            for o in sorted(others):
                await self._write(Frame(BARRIER_PORT, step, loc, o, b"release"))
        else:
            await self._write(Frame(BARRIER_PORT, step, loc, coord, b"arrive"))
            await self._wait(lambda: (step, coord) in self.barrier_msgs)


async def _idle_watch(monitor: Monitor, timeout: float, loc: str) -> None:
    last, idle = -1, 0.0
    tick = min(0.1, timeout)
    while True:
        await asyncio.sleep(tick)
        if monitor.progress != last or monitor.blocked < monitor.active:
            last, idle = monitor.progress, 0.0
            continue
        idle += tick
        if idle >= timeout:
            raise Deadlock(f"{loc}: no progress for {timeout}s with {monitor.blocked} instructions blocked")


async def _run_location(bundle: Bundle, loc: str, opts: TcpOptions, workdir: Path | None) -> ExecutionReport:
    monitor = Monitor()
    transport = TcpTransport(bundle, loc, monitor, opts)
    report = ExecutionReport()
    worker = Worker(bundle.programs[loc], bundle.meta, transport, monitor, report, workdir)
    await transport.start()
    try:
        main = asyncio.ensure_future(worker.run())
        dog = asyncio.ensure_future(_idle_watch(monitor, opts.idle_timeout, loc))
        done, _ = await asyncio.wait({main, dog}, return_when=asyncio.FIRST_COMPLETED)
        for t in (main, dog):
            if t not in done:
                t.cancel()
        await asyncio.gather(main, dog, return_exceptions=True)
        (dog if dog in done and not dog.cancelled() else main).result()
    finally:
        await transport.close()
    report.placement = {loc: frozenset(worker.store)}
    report.payloads = {loc: dict(worker.store)}
    report.messages = transport.messages
    return report


def run_location_tcp(
    bundle: Bundle,
    loc: str,
    opts: TcpOptions = TcpOptions(),
    workdir: str | Path | None = None,
) -> ExecutionReport:
    if loc not in bundle.programs:
        raise KeyError(f"no program for location {loc}")
    if bundle.meta.mode == "shell" and workdir is None:
        workdir = Path(f"swirl-{loc}")
    return asyncio.run(_run_location(bundle, loc, opts, None if workdir is None else Path(workdir)))
