"""Concrete syntax: formula text, model files, countermodel certificates.

Formula grammar (EBNF), with <> and [] binding tightest, then &, then |,
then right-associative ->; & and | associate to the left:

    formula := imp
    imp     := or ("->" imp)?
    or      := and ("|" and)*
    and     := unary ("&" unary)*
    unary   := "<>" unary | "[]" unary | atom
    atom    := "false" | VAR | "(" formula ")"
    VAR     := "p" [1-9][0-9]*

Model files are line-oriented UTF-8; "#" starts a comment.  Directives:

    kind fs|mipc          optional, default fs
    world <id>            declares a world (order of declaration = id order)
    le <id> <id>          order pair; reflexive-transitive closure is taken
    point <world> <id>    adds a point to the world's point set
    s <world> <id> <id>   adds a pair to the world's relation
    val <world> p<k> <id> makes variable k true at the point in that world

Certificates append one trailer line: ``refutes <world> <point>``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from . import semantics
from .formula import (AND, BOT, BOX, DIA, IMP, OR, VAR, BOTTOM, Box, Diamond,
                      Formula, Implies, And, Or, Var)
from .semantics import FiniteFSModel, Violation, bits_of


@dataclass(frozen=True)
class SourceSpan:
    """Half-open offsets [begin, end) into the input text."""

    begin: int
    end: int

    def __post_init__(self) -> None:
        if not 0 <= self.begin <= self.end:
            raise ValueError(f"bad span {self.begin}..{self.end}")

    def __str__(self) -> str:
        return f"{self.begin}..{self.end}"


class FormulaSyntaxError(ValueError):
    """Formula text rejected; carries the offending span."""

    def __init__(self, message: str, span: SourceSpan):
        super().__init__(f"{message} at {span}")
        self.reason = message
        self.span = span


class ModelSyntaxError(ValueError):
    """Model file rejected before validation; carries the line number."""

    def __init__(self, message: str, line_no: int):
        super().__init__(f"line {line_no}: {message}")
        self.reason = message
        self.line_no = line_no


class ModelValidationError(ValueError):
    """Model file parsed but violates a frame or valuation condition."""

    def __init__(self, violations: list[Violation]):
        super().__init__("; ".join(str(v) for v in violations))
        self.violations = violations


_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<false>false\b)
  | (?P<var>p[1-9][0-9]*)
  | (?P<imp>->)
  | (?P<dia><>)
  | (?P<box>\[\])
  | (?P<and>&)
  | (?P<or>\|)
  | (?P<lp>\()
  | (?P<rp>\))
""", re.VERBOSE)


def _tokenize(text: str) -> list[tuple[str, str, SourceSpan]]:
    out = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise FormulaSyntaxError(
                f"unexpected character {text[pos]!r} "
                "(expected a variable like p1, 'false', a connective, or parentheses)",
                SourceSpan(pos, pos + 1))
        kind = m.lastgroup
        pos = m.end()
        if kind != "ws":
            out.append((kind, m.group(), SourceSpan(m.start(), m.end())))
    out.append(("eof", "", SourceSpan(len(text), len(text))))
    return out


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self) -> tuple[str, str, SourceSpan]:
        return self.tokens[self.pos]

    def take(self) -> tuple[str, str, SourceSpan]:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def fail(self, expected: str) -> FormulaSyntaxError:
        kind, text, span = self.peek()
        found = "end of input" if kind == "eof" else repr(text)
        return FormulaSyntaxError(f"expected {expected}, found {found}", span)

    def imp(self) -> Formula:
        left = self.disj()
        if self.peek()[0] == "imp":
            self.take()
            return Implies(left, self.imp())
        return left

    def disj(self) -> Formula:
        acc = self.conj()
        while self.peek()[0] == "or":
            self.take()
            acc = Or(acc, self.conj())
        return acc

    def conj(self) -> Formula:
        acc = self.unary()
        while self.peek()[0] == "and":
            self.take()
            acc = And(acc, self.unary())
        return acc

    def unary(self) -> Formula:
        kind = self.peek()[0]
        if kind == "dia":
            self.take()
            return Diamond(self.unary())
        if kind == "box":
            self.take()
            return Box(self.unary())
        return self.atom()

    def atom(self) -> Formula:
        kind, text, span = self.peek()
        if kind == "false":
            self.take()
            return BOTTOM
        if kind == "var":
            self.take()
            return Var(int(text[1:]))
        if kind == "lp":
            self.take()
            inner = self.imp()
            if self.peek()[0] != "rp":
                raise self.fail("')'")
            self.take()
            return inner
        raise self.fail("a formula")


def parse_formula(text: str) -> Formula:
    """Parse formula text; raises :class:`FormulaSyntaxError` with a span."""
    parser = _Parser(text)
    phi = parser.imp()
    if parser.peek()[0] != "eof":
        raise parser.fail("end of input")
    return phi


# Binding strength per node kind; children are parenthesised whenever
# their strength is below what their position requires.
_PREC = {IMP: 1, OR: 2, AND: 3, DIA: 4, BOX: 4, VAR: 5, BOT: 5}


def print_formula(phi: Formula) -> str:
    """Render with minimal parentheses; parsing the result restores ``phi``.

    Iterative over the expanded tree, so output size (not recursion
    depth) is the only limit; shared subterms are expanded repeatedly.
    """
    out: list[str] = []
    stack: list[object] = [(phi, 0)]
    while stack:
        item = stack.pop()
        if isinstance(item, str):
            out.append(item)
            continue
        node, floor = item
        prec = _PREC[node.kind]
        wrap = prec < floor
        if wrap:
            out.append("(")
            stack.append(")")
        kind = node.kind
        if kind == VAR:
            out.append(f"p{node.var}")
        elif kind == BOT:
            out.append("false")
        elif kind == DIA:
            out.append("<>")
            stack.append((node.left, 4))
        elif kind == BOX:
            out.append("[]")
            stack.append((node.left, 4))
        elif kind == IMP:
            stack.append((node.right, 1))
            stack.append(" -> ")
            stack.append((node.left, 2))
        elif kind == OR:
            stack.append((node.right, 3))
            stack.append(" | ")
            stack.append((node.left, 2))
        else:
            stack.append((node.right, 4))
            stack.append(" & ")
            stack.append((node.left, 3))
    return "".join(out)


_NAME = re.compile(r"[A-Za-z0-9_.-]+\Z")
_VAL_VAR = re.compile(r"p([1-9][0-9]*)\Z")


def _strip_comment(line: str) -> str:
    cut = line.find("#")
    return line if cut < 0 else line[:cut]


def parse_model(text: str, kind: str | None = None) -> FiniteFSModel:
    """Read a model file, validate it, and return the model.

    ``kind`` overrides any ``kind`` directive in the file; the default is
    fs.  Raises :class:`ModelSyntaxError` for malformed input and
    :class:`ModelValidationError` naming every violated frame or
    valuation condition.
    """
    world_ids: dict[str, int] = {}
    point_ids: dict[str, int] = {}
    order: list[tuple[int, int]] = []
    points: dict[int, set[int]] = {}
    srel: dict[int, set[tuple[int, int]]] = {}
    val: dict[int, dict[int, set[int]]] = {}
    file_kind: str | None = None
    refutes: tuple[str, str] | None = None

    def world(tok: str, line_no: int) -> int:
        got = world_ids.get(tok)
        if got is None:
            raise ModelSyntaxError(f"unknown world {tok!r}", line_no)
        return got

    def point(tok: str, line_no: int) -> int:
        if _NAME.match(tok) is None:
            raise ModelSyntaxError(f"bad point id {tok!r}", line_no)
        got = point_ids.get(tok)
        if got is None:
            got = len(point_ids)
            point_ids[tok] = got
        return got

    for line_no, raw in enumerate(text.splitlines(), 1):
        fields = _strip_comment(raw).split()
        if not fields:
            continue
        directive, args = fields[0], fields[1:]
        if directive == "kind":
            if len(args) != 1 or args[0] not in semantics.KINDS:
                raise ModelSyntaxError("expected 'kind fs' or 'kind mipc'", line_no)
            file_kind = args[0]
        elif directive == "world":
            if len(args) != 1 or _NAME.match(args[0]) is None:
                raise ModelSyntaxError("expected 'world <id>'", line_no)
            if args[0] in world_ids:
                raise ModelSyntaxError(f"world {args[0]!r} declared twice", line_no)
            w = len(world_ids)
            world_ids[args[0]] = w
            points[w] = set()
            srel[w] = set()
        elif directive == "le":
            if len(args) != 2:
                raise ModelSyntaxError("expected 'le <world> <world>'", line_no)
            order.append((world(args[0], line_no), world(args[1], line_no)))
        elif directive == "point":
            if len(args) != 2:
                raise ModelSyntaxError("expected 'point <world> <id>'", line_no)
            points[world(args[0], line_no)].add(point(args[1], line_no))
        elif directive == "s":
            if len(args) != 3:
                raise ModelSyntaxError("expected 's <world> <id> <id>'", line_no)
            srel[world(args[0], line_no)].add(
                (point(args[1], line_no), point(args[2], line_no)))
        elif directive == "val":
            if len(args) != 3:
                raise ModelSyntaxError("expected 'val <world> p<k> <point>'", line_no)
            mvar = _VAL_VAR.match(args[1])
            if mvar is None:
                raise ModelSyntaxError(f"bad variable token {args[1]!r}", line_no)
            p = int(mvar.group(1))
            val.setdefault(p, {}).setdefault(world(args[0], line_no), set()).add(
                point(args[2], line_no))
        elif directive == "refutes":
            if len(args) != 2:
                raise ModelSyntaxError("expected 'refutes <world> <point>'", line_no)
            refutes = (args[0], args[1])
        else:
            raise ModelSyntaxError(f"unknown directive {directive!r}", line_no)
    if refutes is not None:
        raise ModelSyntaxError(
            "'refutes' trailer is only allowed in certificates "
            "(use parse_certificate)", len(text.splitlines()))
    if not world_ids:
        raise ModelSyntaxError("model declares no worlds", max(1, len(text.splitlines())))
    model = semantics.build_model(
        kind=kind if kind is not None else (file_kind or semantics.FS),
        n_worlds=len(world_ids), order=order, points=points, srel=srel,
        val=val,
        world_names=tuple(sorted(world_ids, key=world_ids.get)),
        point_names=tuple(sorted(point_ids, key=point_ids.get)) or ("x0",))
    violations = semantics.validate_model(model)
    if violations:
        raise ModelValidationError(violations)
    return model


def _reduction_pairs(model: FiniteFSModel) -> list[tuple[int, int]]:
    # Transitive reduction of the strict order: enough for the closure to
    # restore the full relation, and the shortest faithful printout.
    out = []
    for w in model.worlds():
        for v in bits_of(model.up[w]):
            if v == w:
                continue
            direct = True
            for z in bits_of(model.up[w]):
                if z != w and z != v and model.leq(z, v):
                    direct = False
                    break
            if direct:
                out.append((w, v))
    return out


def print_model(model: FiniteFSModel) -> str:
    """Serialise a model; ``parse_model`` restores an equal model."""
    wn, pn = model.world_names, model.point_names
    lines = [f"kind {model.kind}"]
    for w in model.worlds():
        lines.append(f"world {wn[w]}")
    for w, v in _reduction_pairs(model):
        lines.append(f"le {wn[w]} {wn[v]}")
    for w in model.worlds():
        for x in model.points_of(w):
            lines.append(f"point {wn[w]} {pn[x]}")
    for w in model.worlds():
        for x in model.points_of(w):
            row = model.succ(w, x)
            for y in bits_of(row):
                lines.append(f"s {wn[w]} {pn[x]} {pn[y]}")
    for p in range(1, model.nvars + 1):
        for w in model.worlds():
            for x in bits_of(model.val[p - 1][w]):
                lines.append(f"val {wn[w]} p{p} {pn[x]}")
    return "\n".join(lines) + "\n"


def print_certificate(model: FiniteFSModel, w: int, x: int) -> str:
    """Model text plus the ``refutes`` trailer naming the failing pair."""
    return print_model(model) + \
        f"refutes {model.world_names[w]} {model.point_names[x]}\n"


def parse_certificate(text: str) -> tuple[FiniteFSModel, int, int]:
    """Read a certificate: a model file with one ``refutes`` trailer."""
    lines = text.splitlines()
    trailer = None
    body = []
    for line_no, raw in enumerate(lines, 1):
        fields = _strip_comment(raw).split()
        if fields and fields[0] == "refutes":
            if trailer is not None:
                raise ModelSyntaxError("duplicate 'refutes' trailer", line_no)
            if len(fields) != 3:
                raise ModelSyntaxError("expected 'refutes <world> <point>'", line_no)
            trailer = (fields[1], fields[2], line_no)
        else:
            body.append(raw)
    if trailer is None:
        raise ModelSyntaxError("certificate lacks a 'refutes' trailer",
                               max(1, len(lines)))
    model = parse_model("\n".join(body))
    wname, xname, line_no = trailer
    try:
        w = model.world_names.index(wname)
    except ValueError:
        raise ModelSyntaxError(f"unknown world {wname!r}", line_no) from None
    try:
        x = model.point_names.index(xname)
    except ValueError:
        raise ModelSyntaxError(f"unknown point {xname!r}", line_no) from None
    if not model.has_point(w, x):
        raise ModelSyntaxError(
            f"point {xname!r} does not live at world {wname!r}", line_no)
    return model, w, x
