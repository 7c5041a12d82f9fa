"""Parser and printer for the ``.swirl`` text format.

Grammar::

    system    := [ locconfig ("|" locconfig)* ]
    locconfig := "loc" ID "{" "data" "=" idset ";" "trace" "=" trace "}"
    trace     := seqterm ("|" seqterm)*          right-associative
    seqterm   := term ("." term)*                right-associative
    term      := "0" | predicate | "(" trace ")"
    predicate := "exec" "(" ID "," idset "->" idset "," idset ")"
               | "send" "(" ID "->" ID "," ID "," ID ")"
               | "recv" "(" ID "," ID "," ID ")"
    idset     := "{" [ID ("," ID)*] "}"

Whitespace is insignificant and ``#`` starts a comment running to end of line.
The parser keeps the syntactic shape: nothing is normalized.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .ir import (
    NIL,
    Act,
    Dataflow,
    DuplicateLocation,
    Exec,
    LocationConfig,
    Par,
    Recv,
    Send,
    Seq,
    Trace,
    WorkflowSystem,
)

__all__ = ["SwirlSyntaxError", "parse_swirl", "parse_trace", "render_swirl", "render_trace"]

KEYWORDS = {"loc", "data", "trace", "exec", "send", "recv"}

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+|\#[^\n]*)
  | (?P<arrow>->)
  | (?P<id>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<zero>0)
  | (?P<punct>[{}();,=.|])
    """,
    re.VERBOSE,
)


class SwirlSyntaxError(ValueError):
    def __init__(self, msg: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {msg}")
        self.line = line
        self.col = col


@dataclass
class _Tok:
    kind: str
    value: str
    pos: int


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            line, col = _linecol(text, pos)
            raise SwirlSyntaxError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        if kind != "ws":
            value = m.group()
            if kind == "id" and value in KEYWORDS:
                kind = "kw"
            elif kind in ("punct", "arrow", "zero"):
                kind = value
            toks.append(_Tok(kind, value, pos))
        pos = m.end()
    toks.append(_Tok("eof", "", len(text)))
    return toks


def _linecol(text: str, pos: int) -> tuple[int, int]:
    line = text.count("\n", 0, pos) + 1
    col = pos - (text.rfind("\n", 0, pos) + 1) + 1
    return line, col


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self) -> _Tok:
        return self.toks[self.i]

    def error(self, msg: str, tok: _Tok | None = None) -> SwirlSyntaxError:
        tok = tok or self.peek()
        line, col = _linecol(self.text, tok.pos)
        return SwirlSyntaxError(msg, line, col)

    def expect(self, kind: str, value: str | None = None) -> _Tok:
        tok = self.peek()
        if tok.kind != kind or (value is not None and tok.value != value):
            want = value or kind
            got = tok.value or tok.kind
            raise self.error(f"expected {want!r}, got {got!r}")
        self.i += 1
        return tok

    def accept(self, kind: str) -> bool:
        if self.peek().kind == kind:
            self.i += 1
            return True
        return False

    def ident(self) -> str:
        return self.expect("id").value

    def idset(self) -> list[str]:
        self.expect("{")
        ids: list[str] = []
        if self.peek().kind != "}":
            ids.append(self.ident())
            while self.accept(","):
                ids.append(self.ident())
        self.expect("}")
        return ids

    # system level

    def system(self) -> WorkflowSystem:
        configs: list[LocationConfig] = []
        seen: dict[str, _Tok] = {}
        if self.peek().kind != "eof":
            configs.append(self.locconfig(seen))
            while self.accept("|"):
                configs.append(self.locconfig(seen))
        self.expect("eof")
        return WorkflowSystem(tuple(configs))

    def locconfig(self, seen: dict[str, _Tok]) -> LocationConfig:
        self.expect("kw", "loc")
        tok = self.peek()
        loc = self.ident()
        if loc in seen:
            line, col = _linecol(self.text, tok.pos)
            raise DuplicateLocation(f"{line}:{col}: duplicate location {loc!r}")
        seen[loc] = tok
        self.expect("{")
        self.expect("kw", "data")
        self.expect("=")
        data = self.idset()
        self.expect(";")
        self.expect("kw", "trace")
        self.expect("=")
        trace = self.trace()
        self.expect("}")
        return LocationConfig(loc, frozenset(data), trace)

    # traces

    def trace(self) -> Trace:
        items = [self.seqterm()]
        while self.accept("|"):
            items.append(self.seqterm())
        out = items[-1]
        for t in reversed(items[:-1]):
            out = Par(t, out)
        return out

    def seqterm(self) -> Trace:
        items = [self.term()]
        while self.accept("."):
            items.append(self.term())
        out = items[-1]
        for t in reversed(items[:-1]):
            out = Seq(t, out)
        return out

    def term(self) -> Trace:
        tok = self.peek()
        if self.accept("0"):
            return NIL
        if self.accept("("):
            t = self.trace()
            self.expect(")")
            return t
        if tok.kind == "kw" and tok.value in ("exec", "send", "recv"):
            return Act(self.predicate())
        raise self.error(f"expected a trace term, got {tok.value or tok.kind!r}")

    def predicate(self):
        tok = self.peek()
        kw = self.expect("kw").value
        self.expect("(")
        try:
            if kw == "exec":
                step = self.ident()
                self.expect(",")
                ins = self.idset()
                self.expect("->")
                outs = self.idset()
                self.expect(",")
                locs = self.idset()
                self.expect(")")
                return Exec(step, Dataflow(frozenset(ins), frozenset(outs)), frozenset(locs))
            if kw == "send":
                d = self.ident()
                self.expect("->")
                p = self.ident()
                self.expect(",")
                src = self.ident()
                self.expect(",")
                dst = self.ident()
                self.expect(")")
                return Send(d, p, src, dst)
            p = self.ident()
            self.expect(",")
            src = self.ident()
            self.expect(",")
            dst = self.ident()
            self.expect(")")
            return Recv(p, src, dst)
        except SwirlSyntaxError:
            raise
        except ValueError as exc:
            raise self.error(str(exc), tok) from None


def parse_swirl(text: str) -> WorkflowSystem:
    return _Parser(text).system()


def parse_trace(text: str) -> Trace:
    p = _Parser(text)
    t = p.trace()
    p.expect("eof")
    return t


def render_trace(t: Trace) -> str:
    return t.text


def render_swirl(sys: WorkflowSystem) -> str:
    """Deterministic text of ``sys``, one configuration per line."""
    if not sys.configs:
        return ""
    return sys.text + "\n"
