"""Labeled lambda-calculus syntax: AST, parser, labeler, printer, free variables.

Every node of a program is an ``Occurrence``: an expression paired with a
program point.  Programs are written in a parenthesized prefix form where any
atom or closing parenthesis may carry a ``^n`` label, e.g.

    (let x (ref 3^1)^2 (!x)^3)^4

Unlabeled nodes are numbered in left-to-right post-order, above the largest
explicit label.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterator, Optional, Union


class SyntaxError(Exception):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at offset {position}")
        self.position = position


class DuplicatePoint(Exception):
    def __init__(self, point: int):
        super().__init__(f"program point {point} is used more than once")
        self.point = point


class DuplicateBinder(Exception):
    def __init__(self, clashes: list[tuple[str, int, int]]):
        text = ", ".join(f"{name} at {p} and {q}" for name, p, q in clashes)
        super().__init__(f"binder names are not unique: {text}")
        self.clashes = clashes


# Constants


@dataclass(frozen=True)
class Int:
    n: int

    def __str__(self):
        return str(self.n)


@dataclass(frozen=True)
class Bool:
    b: bool

    def __str__(self):
        return "true" if self.b else "false"


@dataclass(frozen=True)
class Op:
    name: str

    def __str__(self):
        return self.name


OPERATORS = ("PLUS", "MINUS", "TIMES", "EQUAL", "LESS", "GREATER")
PLUS, MINUS, TIMES, EQUAL, LESS, GREATER = (Op(n) for n in OPERATORS)

Constant = Union[Int, Bool, Op]


# Patterns


@dataclass(frozen=True)
class IntPat:
    n: int


@dataclass(frozen=True)
class BoolPat:
    b: bool


@dataclass(frozen=True)
class VarPat:
    name: str


@dataclass(frozen=True)
class Wildcard:
    pass


Pattern = Union[IntPat, BoolPat, VarPat, Wildcard]


def tau(s: Pattern) -> frozenset[str]:
    """Variables bound by a pattern."""
    if isinstance(s, VarPat):
        return frozenset([s.name])
    return frozenset()


# Expressions


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Const:
    c: Constant


@dataclass(frozen=True)
class App:
    fn: "Occurrence"
    arg: "Occurrence"


@dataclass(frozen=True)
class ConstApp:
    op: Op
    left: "Occurrence"
    right: "Occurrence"


@dataclass(frozen=True)
class Abs:
    param: str
    body: "Occurrence"


@dataclass(frozen=True)
class Let:
    name: str
    bound: "Occurrence"
    body: "Occurrence"


@dataclass(frozen=True)
class LetRec:
    name: str
    bound: "Occurrence"
    body: "Occurrence"


@dataclass(frozen=True)
class Case:
    scrutinee: "Occurrence"
    branches: tuple[tuple[Pattern, "Occurrence"], ...]

    def __post_init__(self):
        if not self.branches:
            raise ValueError("case needs at least one branch")


@dataclass(frozen=True)
class Ref:
    body: "Occurrence"


@dataclass(frozen=True)
class Deref:
    body: "Occurrence"


@dataclass(frozen=True)
class Assign:
    target: "Occurrence"
    value: "Occurrence"


Expr = Union[Var, Const, App, ConstApp, Abs, Let, LetRec, Case, Ref, Deref, Assign]


@dataclass(frozen=True)
class Occurrence:
    expr: Expr
    point: Optional[int] = field(default=None)

    def __str__(self):
        return render(self)


def children(o: Occurrence) -> list[Occurrence]:
    """Sub-occurrences in evaluation (left-to-right) order."""
    e = o.expr
    if isinstance(e, (Var, Const)):
        return []
    if isinstance(e, App):
        return [e.fn, e.arg]
    if isinstance(e, ConstApp):
        return [e.left, e.right]
    if isinstance(e, Abs):
        return [e.body]
    if isinstance(e, (Let, LetRec)):
        return [e.bound, e.body]
    if isinstance(e, Case):
        return [e.scrutinee] + [b for _, b in e.branches]
    if isinstance(e, (Ref, Deref)):
        return [e.body]
    if isinstance(e, Assign):
        return [e.target, e.value]
    raise TypeError(f"not an expression: {e!r}")


def with_children(o: Occurrence, kids: list[Occurrence]) -> Occurrence:
    """Rebuild ``o`` with new sub-occurrences (same order as ``children``)."""
    e = o.expr
    if isinstance(e, (Var, Const)):
        new = e
    elif isinstance(e, App):
        new = App(kids[0], kids[1])
    elif isinstance(e, ConstApp):
        new = ConstApp(e.op, kids[0], kids[1])
    elif isinstance(e, Abs):
        new = Abs(e.param, kids[0])
    elif isinstance(e, Let):
        new = Let(e.name, kids[0], kids[1])
    elif isinstance(e, LetRec):
        new = LetRec(e.name, kids[0], kids[1])
    elif isinstance(e, Case):
        pats = [s for s, _ in e.branches]
        new = Case(kids[0], tuple(zip(pats, kids[1:])))
    elif isinstance(e, Ref):
        new = Ref(kids[0])
    elif isinstance(e, Deref):
        new = Deref(kids[0])
    elif isinstance(e, Assign):
        new = Assign(kids[0], kids[1])
    else:
        raise TypeError(f"not an expression: {e!r}")
    return Occurrence(new, o.point)


def walk(o: Occurrence) -> Iterator[Occurrence]:
    """All occurrences of the tree in post-order."""
    for k in children(o):
        yield from walk(k)
    yield o


def points(occs) -> frozenset[int]:
    """Program points of a collection of occurrences or (name, point) pairs."""
    out = set()
    for o in occs:
        out.add(o.point if isinstance(o, Occurrence) else o[1])
    return frozenset(out)


def program_points(o: Occurrence) -> frozenset[int]:
    return frozenset(n.point for n in walk(o))


# Free variables and binders


def fv(o: Occurrence) -> frozenset[str]:
    e = o.expr
    if isinstance(e, Var):
        return frozenset([e.name])
    if isinstance(e, Const):
        return frozenset()
    if isinstance(e, Abs):
        return fv(e.body) - {e.param}
    if isinstance(e, Let):
        return fv(e.bound) | (fv(e.body) - {e.name})
    if isinstance(e, LetRec):
        return (fv(e.bound) | fv(e.body)) - {e.name}
    if isinstance(e, Case):
        out = set(fv(e.scrutinee))
        for s, body in e.branches:
            out |= fv(body) - tau(s)
        return frozenset(out)
    out = frozenset()
    for k in children(o):
        out |= fv(k)
    return out


def binders(o: Occurrence) -> list[tuple[str, int]]:
    """Every binder name with the point of the construct that introduces it."""
    out = []
    for n in walk(o):
        e = n.expr
        if isinstance(e, (Abs,)):
            out.append((e.param, n.point))
        elif isinstance(e, (Let, LetRec)):
            out.append((e.name, n.point))
        elif isinstance(e, Case):
            for s, _ in e.branches:
                if isinstance(s, VarPat):
                    out.append((s.name, n.point))
    return out


def variable_names(o: Occurrence) -> frozenset[str]:
    names = {name for name, _ in binders(o)}
    names |= {n.expr.name for n in walk(o) if isinstance(n.expr, Var)}
    return frozenset(names)


def check_binder_unique(o: Occurrence) -> list[tuple[str, int, int]]:
    """Empty list when all binders are distinct, else (name, first, second) clashes."""
    seen: dict[str, int] = {}
    clashes = []
    for name, p in binders(o):
        if name in seen:
            clashes.append((name, seen[name], p))
        else:
            seen[name] = p
    return clashes


def alpha_normalize(o: Occurrence) -> Occurrence:
    """Rename clashing binders (and their bound uses) with fresh suffixes."""
    used = set(variable_names(o))
    taken: set[str] = set()

    def fresh(name: str) -> str:
        if name not in taken:
            taken.add(name)
            return name
        k = 1
        while f"{name}_{k}" in used or f"{name}_{k}" in taken:
            k += 1
        new = f"{name}_{k}"
        taken.add(new)
        return new

    def go(o: Occurrence, ren: dict[str, str]) -> Occurrence:
        e = o.expr
        if isinstance(e, Var):
            return Occurrence(Var(ren.get(e.name, e.name)), o.point)
        if isinstance(e, Const):
            return o
        if isinstance(e, Abs):
            x = fresh(e.param)
            return Occurrence(Abs(x, go(e.body, {**ren, e.param: x})), o.point)
        if isinstance(e, Let):
            bound = go(e.bound, ren)
            x = fresh(e.name)
            return Occurrence(Let(x, bound, go(e.body, {**ren, e.name: x})), o.point)
        if isinstance(e, LetRec):
            x = fresh(e.name)
            inner = {**ren, e.name: x}
            return Occurrence(LetRec(x, go(e.bound, inner), go(e.body, inner)), o.point)
        if isinstance(e, Case):
            scrut = go(e.scrutinee, ren)
            branches = []
            for s, body in e.branches:
                if isinstance(s, VarPat):
                    x = fresh(s.name)
                    branches.append((VarPat(x), go(body, {**ren, s.name: x})))
                else:
                    branches.append((s, go(body, ren)))
            return Occurrence(Case(scrut, tuple(branches)), o.point)
        return with_children(o, [go(k, ren) for k in children(o)])

    return go(o, {})


# Labeling


def label(o: Occurrence, start: Optional[int] = None) -> Occurrence:
    """Give every unlabeled node a fresh point, post-order, above the largest label."""
    explicit = [n.point for n in walk(o) if n.point is not None]
    dup = _first_duplicate(explicit)
    if dup is not None:
        raise DuplicatePoint(dup)
    counter = [start if start is not None else max(explicit, default=0) + 1]

    def go(o: Occurrence) -> Occurrence:
        kids = [go(k) for k in children(o)]
        node = with_children(o, kids)
        if node.point is None:
            node = Occurrence(node.expr, counter[0])
            counter[0] += 1
        return node

    out = go(o)
    dup = _first_duplicate([n.point for n in walk(out)])
    if dup is not None:
        raise DuplicatePoint(dup)
    return out


def strip_labels(o: Occurrence) -> Occurrence:
    kids = [strip_labels(k) for k in children(o)]
    return Occurrence(with_children(o, kids).expr, None)


def _first_duplicate(xs) -> Optional[int]:
    seen = set()
    for x in xs:
        if x in seen:
            return x
        seen.add(x)
    return None


# Parsing

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+|;[^\n]*)
  | (?P<assign>:=)
  | (?P<punct>[()^.!_λ])
  | (?P<int>-?\d+)
  | (?P<ident>[A-Za-z][A-Za-z0-9_']*)
    """,
    re.VERBOSE,
)

KEYWORDS = {"lambda", "let", "rec", "case", "ref", "true", "false"} | set(OPERATORS)


@dataclass
class _Tok:
    kind: str
    text: str
    pos: int


def tokenize(text: str) -> list[_Tok]:
    toks = []
    i = 0
    while i < len(text):
        m = _TOKEN.match(text, i)
        if m is None:
            raise SyntaxError(f"unexpected character {text[i]!r}", i)
        kind = m.lastgroup
        if kind != "ws":
            value = m.group()
            if kind in ("punct", "assign"):
                kind = value
            toks.append(_Tok(kind, value, i))
        i = m.end()
    toks.append(_Tok("eof", "", len(text)))
    return toks


class _Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0

    def peek(self, k: int = 0) -> _Tok:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def next(self) -> _Tok:
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, kind: str) -> _Tok:
        t = self.next()
        if t.kind != kind:
            found = t.text or "end of input"
            raise SyntaxError(f"expected {kind!r} but found {found!r}", t.pos)
        return t

    def ident(self) -> str:
        t = self.next()
        if t.kind != "ident" or t.text in KEYWORDS:
            raise SyntaxError(f"expected a variable name but found {t.text!r}", t.pos)
        return t.text

    def label(self) -> Optional[int]:
        if self.peek().kind != "^":
            return None
        self.next()
        t = self.next()
        if t.kind != "int" or t.text.startswith("-"):
            raise SyntaxError("a label must be a natural number", t.pos)
        return int(t.text)

    def occ(self) -> Occurrence:
        t = self.peek()
        if t.kind == "(":
            return self.compound()
        if t.kind == "int":
            self.next()
            return Occurrence(Const(Int(int(t.text))), self.label())
        if t.kind == "ident" and t.text in ("true", "false"):
            self.next()
            return Occurrence(Const(Bool(t.text == "true")), self.label())
        if t.kind == "ident" and t.text not in KEYWORDS:
            self.next()
            return Occurrence(Var(t.text), self.label())
        raise SyntaxError(f"unexpected {t.text or 'end of input'!r}", t.pos)

    def compound(self) -> Occurrence:
        self.expect("(")
        t = self.peek()
        if (t.kind == "ident" and t.text == "lambda") or t.kind == "λ":
            self.next()
            x = self.ident()
            self.expect(".")
            expr = Abs(x, self.occ())
        elif t.kind == "ident" and t.text == "let":
            self.next()
            if self.peek().text == "rec" and self.peek().kind == "ident":
                self.next()
                x = self.ident()
                expr = LetRec(x, self.occ(), self.occ())
            else:
                x = self.ident()
                expr = Let(x, self.occ(), self.occ())
        elif t.kind == "ident" and t.text == "case":
            self.next()
            scrut = self.occ()
            branches = []
            while self.peek().kind == "(":
                branches.append(self.branch())
            if not branches:
                raise SyntaxError("case needs at least one branch", self.peek().pos)
            expr = Case(scrut, tuple(branches))
        elif t.kind == "ident" and t.text == "ref":
            self.next()
            expr = Ref(self.occ())
        elif t.kind == "!":
            self.next()
            expr = Deref(self.occ())
        elif t.kind == "ident" and t.text in OPERATORS:
            self.next()
            expr = ConstApp(Op(t.text), self.occ(), self.occ())
        else:
            first = self.occ()
            if self.peek().kind == ":=":
                self.next()
                expr = Assign(first, self.occ())
            elif self.peek().kind == ")":
                # grouping parentheses; an outer label replaces the inner one
                self.next()
                outer = self.label()
                if outer is None:
                    return first
                return Occurrence(first.expr, outer)
            else:
                expr = App(first, self.occ())
        self.expect(")")
        return Occurrence(expr, self.label())

    def branch(self) -> tuple[Pattern, Occurrence]:
        self.expect("(")
        t = self.next()
        if t.kind == "int":
            pat: Pattern = IntPat(int(t.text))
        elif t.kind == "_":
            pat = Wildcard()
        elif t.kind == "ident" and t.text in ("true", "false"):
            pat = BoolPat(t.text == "true")
        elif t.kind == "ident" and t.text not in KEYWORDS:
            pat = VarPat(t.text)
        else:
            raise SyntaxError(f"expected a pattern but found {t.text!r}", t.pos)
        body = self.occ()
        self.expect(")")
        return pat, body


def parse_unlabeled(text: str) -> Occurrence:
    """Parse without filling in missing labels."""
    p = _Parser(text)
    o = p.occ()
    t = p.peek()
    if t.kind != "eof":
        raise SyntaxError(f"trailing input {t.text!r}", t.pos)
    return o


def parse(text: str, require_unique: bool = True) -> Occurrence:
    """Parse and label a program.

    Raises ``SyntaxError``, ``DuplicatePoint`` or, when ``require_unique`` is
    set, ``DuplicateBinder``.
    """
    o = label(parse_unlabeled(text))
    if require_unique:
        clashes = check_binder_unique(o)
        if clashes:
            raise DuplicateBinder(clashes)
    return o


# Printing


def render_pattern(s: Pattern) -> str:
    if isinstance(s, IntPat):
        return str(s.n)
    if isinstance(s, BoolPat):
        return "true" if s.b else "false"
    if isinstance(s, VarPat):
        return s.name
    return "_"


def render(o: Occurrence) -> str:
    e = o.expr
    lab = "" if o.point is None else f"^{o.point}"
    if isinstance(e, Var):
        return e.name + lab
    if isinstance(e, Const):
        return str(e.c) + lab
    if isinstance(e, App):
        inner = f"{render(e.fn)} {render(e.arg)}"
    elif isinstance(e, ConstApp):
        inner = f"{e.op} {render(e.left)} {render(e.right)}"
    elif isinstance(e, Abs):
        inner = f"lambda {e.param}. {render(e.body)}"
    elif isinstance(e, Let):
        inner = f"let {e.name} {render(e.bound)} {render(e.body)}"
    elif isinstance(e, LetRec):
        inner = f"let rec {e.name} {render(e.bound)} {render(e.body)}"
    elif isinstance(e, Case):
        arms = " ".join(f"({render_pattern(s)} {render(b)})" for s, b in e.branches)
        inner = f"case {render(e.scrutinee)} {arms}"
    elif isinstance(e, Ref):
        inner = f"ref {render(e.body)}"
    elif isinstance(e, Deref):
        inner = f"! {render(e.body)}"
    elif isinstance(e, Assign):
        inner = f"{render(e.target)} := {render(e.value)}"
    else:
        raise TypeError(f"not an expression: {e!r}")
    return f"({inner}){lab}"


def is_internal(name: str) -> bool:
    return name.startswith("nu@")


def internal_var(point: int) -> str:
    """Name of the internal variable standing for locations made by the ref at ``point``."""
    return f"nu@{point}"
