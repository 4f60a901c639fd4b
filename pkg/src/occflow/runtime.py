"""Values, stores, dependency functions and the collecting big-step evaluator.

Evaluating an occurrence yields, besides its value, the dependency pair
``(L, V)`` of location and variable occurrences that were consumed to
produce it.  Every binding made along the way is recorded in a dependency
function ``w`` keyed by ``(name or location, point)``, together with an order
over the points at which bindings happened.
"""

from __future__ import annotations

import os
import sys
from dataclasses import dataclass, field
from typing import Optional, Union

from .syntax import (
    Abs, App, Assign, Bool, BoolPat, Case, Const, ConstApp, Deref, Int, IntPat,
    Let, LetRec, Occurrence, Op, Pattern, Ref, Var, VarPat, Wildcard,
    check_binder_unique,
)

INT_MIN = -(2**63)
INT_MAX = 2**63 - 1
DEFAULT_FUEL = 10**6


class EvalError(Exception):
    """Base class for runtime failures."""


class Unbound(EvalError):
    pass


class NotAFunction(EvalError):
    pass


class NotALocation(EvalError):
    pass


class NoMatchingPattern(EvalError):
    pass


class RuntimeTypeError(EvalError):
    pass


class Overflow(EvalError):
    pass


class FuelExhausted(EvalError):
    pass


class NotBinderUnique(EvalError):
    pass


@dataclass(frozen=True, order=True)
class Loc:
    id: int

    def __str__(self):
        return f"ℓ{self.id}"


@dataclass(frozen=True, eq=False)
class Closure:
    param: str
    param_point: int
    body: Occurrence
    env: dict


@dataclass(frozen=True, eq=False)
class RecClosure:
    param: str
    fname: str
    param_point: int
    body: Occurrence
    env: dict


@dataclass(frozen=True)
class UnitValue:
    def __str__(self):
        return "()"


Unit = UnitValue()

Value = Union[Int, Bool, Loc, Closure, RecClosure, UnitValue]
Environment = dict  # variable name -> Value
Key = tuple  # (variable name or Loc, point)


def show_value(v) -> str:
    if isinstance(v, (Closure, RecClosure)):
        return f"<closure {v.param}^{v.param_point}>"
    return str(v)


@dataclass
class Store:
    cells: dict = field(default_factory=dict)
    next: Loc = Loc(1)

    def copy(self) -> "Store":
        return Store(dict(self.cells), self.next)

    def __getitem__(self, loc: Loc):
        return self.cells[loc]

    def __contains__(self, loc) -> bool:
        return loc in self.cells


def new(loc: Loc) -> Loc:
    return Loc(loc.id + 1)


@dataclass(frozen=True)
class DependencyPair:
    L: frozenset = frozenset()
    V: frozenset = frozenset()

    def __or__(self, other: "DependencyPair") -> "DependencyPair":
        return DependencyPair(self.L | other.L, self.V | other.V)


EMPTY = DependencyPair()


@dataclass(frozen=True)
class JournalEntry:
    key: Key
    point: int
    seq: int


@dataclass
class DepFunc:
    bindings: dict = field(default_factory=dict)
    journal: list = field(default_factory=list)
    # value written at each location binding, kept for agreement checks
    written: dict = field(default_factory=dict)
    # lookup indexes: most recent key and all binding points per name
    latest: dict = field(default_factory=dict, repr=False, compare=False)
    points_of: dict = field(default_factory=dict, repr=False, compare=False)

    def copy(self) -> "DepFunc":
        return DepFunc(dict(self.bindings), list(self.journal), dict(self.written),
                       dict(self.latest), {u: set(ps) for u, ps in self.points_of.items()})

    def __getitem__(self, key: Key) -> DependencyPair:
        return self.bindings[key]

    def __contains__(self, key) -> bool:
        return key in self.bindings

    def keys(self):
        return self.bindings.keys()

    def binding_points(self, u) -> set[int]:
        return set(self.points_of.get(u, ()))


@dataclass
class PointOrder:
    edges: set = field(default_factory=set)

    def copy(self) -> "PointOrder":
        return PointOrder(set(self.edges))

    def closure(self) -> set:
        return transitive_closure(self.edges)

    def leq(self, a: int, b: int) -> bool:
        return a == b or (a, b) in self.closure()

    def is_antisymmetric(self) -> bool:
        c = self.closure()
        return all(a == b or (b, a) not in c for a, b in c)


def transitive_closure(edges) -> set:
    succ: dict = {}
    for a, b in edges:
        succ.setdefault(a, set()).add(b)
    out = set()
    for start in succ:
        stack = list(succ[start])
        seen = set()
        while stack:
            n = stack.pop()
            if n in seen:
                continue
            seen.add(n)
            stack.extend(succ.get(n, ()))
        out |= {(start, n) for n in seen}
    return out


def _update_in_place(w: DepFunc, key: Key, d: DependencyPair, order: PointOrder, cur) -> None:
    u, q = key
    earlier = w.points_of.setdefault(u, set())
    for r in earlier:
        if r != q:
            order.edges.add((r, q))
    if cur is not None and cur != q:
        order.edges.add((cur, q))
    earlier.add(q)
    w.bindings[key] = d
    w.latest[u] = key
    w.journal.append(JournalEntry(key, q, len(w.journal)))


def depfn_update(w: DepFunc, key: Key, d: DependencyPair, order: PointOrder,
                 cur: Optional[int]) -> tuple[DepFunc, PointOrder]:
    """Bind ``key`` to ``d``, growing the order with edges into ``key``'s point."""
    w2, o2 = w.copy(), order.copy()
    _update_in_place(w2, key, d, o2, cur)
    return w2, o2


def uf_runtime(u, w: DepFunc) -> Key:
    """The most recent binding of a variable or location."""
    if u in w.latest:
        return w.latest[u]
    raise Unbound(f"{u} has no binding in the dependency function")


def uf_order(u, w: DepFunc, order: PointOrder) -> Key:
    """The binding of ``u`` that is greatest under the recorded order."""
    pts = set(w.binding_points(u))
    if not pts:
        raise Unbound(f"{u} has no binding in the dependency function")
    c = order.closure()
    top = [p for p in pts if all(q == p or (q, p) in c for q in pts)]
    if len(top) != 1:
        raise Unbound(f"{u} has no greatest binding")
    return (u, top[0])


def env_inverse(env: Environment, v) -> frozenset[str]:
    return frozenset(x for x, val in env.items() if val == v)


def _check_int(n: int) -> Int:
    if n < INT_MIN or n > INT_MAX:
        raise Overflow(f"integer {n} does not fit in 64 bits")
    return Int(n)


def apply(c: Op, v1, v2):
    name = c.name if isinstance(c, Op) else str(c)
    if name == "EQUAL" and isinstance(v1, Bool) and isinstance(v2, Bool):
        return Bool(v1.b == v2.b)
    if not (isinstance(v1, Int) and isinstance(v2, Int)):
        raise RuntimeTypeError(f"{name} expects integers, got {show_value(v1)} and {show_value(v2)}")
    a, b = v1.n, v2.n
    if name == "PLUS":
        return _check_int(a + b)
    if name == "MINUS":
        return _check_int(a - b)
    if name == "TIMES":
        return _check_int(a * b)
    if name == "EQUAL":
        return Bool(a == b)
    if name == "LESS":
        return Bool(a < b)
    if name == "GREATER":
        return Bool(a > b)
    raise RuntimeTypeError(f"{name} is not a functional constant")


def match(v, s: Pattern) -> Optional[dict]:
    """Substitution for a successful match, ``None`` for no match."""
    if isinstance(s, Wildcard):
        return {}
    if isinstance(s, VarPat):
        return {s.name: v}
    if isinstance(s, IntPat):
        return {} if isinstance(v, Int) and v.n == s.n else None
    if isinstance(s, BoolPat):
        return {} if isinstance(v, Bool) and v.b == s.b else None
    raise TypeError(f"not a pattern: {s!r}")


def match_w(s: Pattern, p: int, d: DependencyPair) -> dict:
    if isinstance(s, VarPat):
        return {(s.name, p): d}
    return {}


@dataclass
class EvalResult:
    value: object
    store: Store
    depfn: DepFunc
    order: PointOrder
    deps: DependencyPair
    point: int


def default_fuel() -> int:
    raw = os.environ.get("OCCFLOW_FUEL")
    return int(raw) if raw else DEFAULT_FUEL


class _Evaluator:
    def __init__(self, sto: Store, w: DepFunc, order: PointOrder, fuel: int):
        self.sto = sto
        self.w = w
        self.order = order
        self.fuel = fuel

    def bind(self, key, d, cur):
        _update_in_place(self.w, key, d, self.order, cur)

    def run(self, env: Environment, o: Occurrence, cur):
        self.fuel -= 1
        if self.fuel < 0:
            raise FuelExhausted("evaluation step bound reached")
        e = o.expr
        p = o.point

        if isinstance(e, Const):
            c = e.c
            if isinstance(c, Int):
                c = _check_int(c.n)
            return c, EMPTY

        if isinstance(e, Var):
            if e.name not in env:
                raise Unbound(f"variable {e.name} at point {p}")
            key = uf_runtime(e.name, self.w)
            d = self.w[key]
            return env[e.name], DependencyPair(d.L, d.V | {(e.name, p)})

        if isinstance(e, Abs):
            return Closure(e.param, p, e.body, dict(env)), EMPTY

        if isinstance(e, App):
            f, d1 = self.run(env, e.fn, cur)
            arg, d2 = self.run(env, e.arg, e.fn.point)
            p2 = e.arg.point
            if isinstance(f, Closure):
                inner = dict(f.env)
            elif isinstance(f, RecClosure):
                inner = dict(f.env)
                inner[f.fname] = f
            else:
                raise NotAFunction(f"{show_value(f)} applied at point {p}")
            self.bind((f.param, p2), d2, p2)
            inner[f.param] = arg
            v, d3 = self.run(inner, f.body, p2)
            return v, DependencyPair(d1.L | d3.L, d1.V | d3.V)

        if isinstance(e, ConstApp):
            v1, d1 = self.run(env, e.left, cur)
            v2, d2 = self.run(env, e.right, e.left.point)
            return apply(e.op, v1, v2), d1 | d2

        if isinstance(e, Let):
            v1, d1 = self.run(env, e.bound, cur)
            p1 = e.bound.point
            self.bind((e.name, p1), d1, p1)
            return self.run({**env, e.name: v1}, e.body, p1)

        if isinstance(e, LetRec):
            lam = e.bound
            if not isinstance(lam.expr, Abs):
                raise NotAFunction(f"let rec {e.name} at point {p} is not bound to an abstraction")
            p1 = lam.point
            rec = RecClosure(lam.expr.param, e.name, p1, lam.expr.body, dict(env))
            self.bind((e.name, p1), EMPTY, p1)
            return self.run({**env, e.name: rec}, e.body, p1)

        if isinstance(e, Case):
            v, ds = self.run(env, e.scrutinee, cur)
            ps = e.scrutinee.point
            for s, body in e.branches:
                sub = match(v, s)
                if sub is None:
                    continue
                for key, d in match_w(s, ps, ds).items():
                    self.bind(key, d, ps)
                vb, db = self.run({**env, **sub}, body, ps)
                return vb, ds | db
            raise NoMatchingPattern(f"no branch matches {show_value(v)} at point {p}")

        if isinstance(e, Ref):
            v, d = self.run(env, e.body, cur)
            loc = self.sto.next
            self.sto.cells[loc] = v
            self.sto.next = new(loc)
            self.bind((loc, p), d, e.body.point)
            self.w.written[(loc, p)] = v
            return loc, EMPTY

        if isinstance(e, Deref):
            loc, _ = self.run(env, e.body, cur)
            if not isinstance(loc, Loc) or loc not in self.sto:
                raise NotALocation(f"{show_value(loc)} dereferenced at point {p}")
            d = self.w[uf_runtime(loc, self.w)]
            return self.sto[loc], DependencyPair(d.L | {(loc, p)}, d.V)

        if isinstance(e, Assign):
            loc, d1 = self.run(env, e.target, cur)
            v, d2 = self.run(env, e.value, e.target.point)
            if not isinstance(loc, Loc) or loc not in self.sto:
                raise NotALocation(f"{show_value(loc)} assigned at point {p}")
            self.sto.cells[loc] = v
            self.bind((loc, p), d2, e.value.point)
            self.w.written[(loc, p)] = v
            return Unit, d1

        raise TypeError(f"not an expression: {e!r}")


def eval_occurrence(env: Optional[Environment], o: Occurrence, sto: Optional[Store] = None,
                    w: Optional[DepFunc] = None, order: Optional[PointOrder] = None,
                    p: Optional[int] = None, fuel: Optional[int] = None) -> EvalResult:
    """Evaluate ``o`` under ``env`` starting from point ``p``.

    Inputs are copied, never mutated.  Raises an ``EvalError`` subclass on
    failure; ``FuelExhausted`` once ``fuel`` evaluation steps have been taken.
    """
    if check_binder_unique(o):
        raise NotBinderUnique("program binders are not distinct; run alpha_normalize first")
    ev = _Evaluator(
        sto.copy() if sto is not None else Store(),
        w.copy() if w is not None else DepFunc(),
        order.copy() if order is not None else PointOrder(),
        fuel if fuel is not None else default_fuel(),
    )
    limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(limit, 20000))
    try:
        v, d = ev.run(dict(env or {}), o, p)
    except RecursionError:
        raise FuelExhausted("evaluation nested too deeply") from None
    finally:
        sys.setrecursionlimit(limit)
    return EvalResult(v, ev.sto, ev.w, ev.order, d, o.point)


eval = eval_occurrence  # noqa: A001 - the operation is called eval


def run(o: Occurrence, fuel: Optional[int] = None) -> EvalResult:
    """Evaluate a closed program from the empty state."""
    return eval_occurrence({}, o, fuel=fuel)
