"""Data-flow and alias types, the approximated point order, and the checker.

A base type ``(delta, kappa)`` records the variable and internal-variable
occurrences an expression depends on (``delta``) and the alias set of the
location it denotes (``kappa``, empty for non-locations).  Internal variables
stand for locations; the one created by the ``ref`` at point ``p`` is named
``nu@p``.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field
from typing import Optional, Union

from .syntax import (
    Abs, App, Assign, Case, Const, ConstApp, Deref, Let, LetRec, Occurrence,
    Pattern, Ref, Var, VarPat, check_binder_unique, children, internal_var,
    is_internal, variable_names, walk,
)


class TypeCheckError(Exception):
    """Base class for checker rejections."""

    def __init__(self, message: str, point: Optional[int] = None):
        super().__init__(message if point is None else f"{message} (point {point})")
        self.point = point


class TypeMismatch(TypeCheckError):
    pass


class ShapeMismatch(TypeMismatch):
    pass


class NotAFunctionType(TypeCheckError):
    pass


class RefOfAbstraction(TypeCheckError):
    pass


class DerefOfNonLocationType(TypeCheckError):
    pass


class PolymorphismRestriction(TypeCheckError):
    pass


class UnboundOccurrence(TypeCheckError):
    pass


class AmbiguousBinding(UnboundOccurrence):
    pass


class KappaEmptyOnDeref(TypeCheckError):
    pass


class NotBinderUnique(TypeCheckError):
    pass


class IllTypedValue(Exception):
    pass


class EnvNotWellTyped(IllTypedValue):
    pass


# Types


@dataclass(frozen=True)
class Base:
    delta: frozenset = frozenset()
    kappa: frozenset = frozenset()

    def __str__(self):
        d = ", ".join(f"{n}^{p}" for n, p in sorted(self.delta, key=_occ_key))
        k = ", ".join(sorted(self.kappa))
        return "({" + d + "}, {" + k + "})"


@dataclass(frozen=True)
class Arrow:
    arg: "Type"
    res: "Type"

    def __str__(self):
        return f"{self.arg} -> {self.res}"


Type = Union[Base, Arrow]
EMPTY = Base()


def _occ_key(o):
    return (str(o[0]), o[1])


def type_union(t1: Type, t2: Type) -> Type:
    if isinstance(t1, Base) and isinstance(t2, Base):
        return Base(t1.delta | t2.delta, t1.kappa | t2.kappa)
    if isinstance(t1, Arrow) and isinstance(t2, Arrow):
        return Arrow(type_union(t1.arg, t2.arg), type_union(t1.res, t2.res))
    raise ShapeMismatch(f"cannot unite {t1} with {t2}")


def base_union(t: Type, d: Base) -> Type:
    if isinstance(t, Base):
        return Base(t.delta | d.delta, t.kappa | d.kappa)
    return Arrow(t.arg, base_union(t.res, d))


def type_leq(t1: Type, t2: Type) -> bool:
    """Componentwise inclusion between two types of the same shape."""
    if isinstance(t1, Base) and isinstance(t2, Base):
        return t1.delta <= t2.delta and t1.kappa <= t2.kappa
    if isinstance(t1, Arrow) and isinstance(t2, Arrow):
        return type_leq(t1.arg, t2.arg) and type_leq(t1.res, t2.res)
    return False


def internals(kappa) -> list[str]:
    return sorted(k for k in kappa if is_internal(k))


# Point order used by the checker


@dataclass(frozen=True)
class PiOrder:
    points: frozenset
    edges: frozenset

    @functools.cached_property
    def _below(self) -> dict:
        """point -> set of points below or equal to it."""
        preds: dict = {p: set() for p in self.points}
        for a, b in self.edges:
            preds.setdefault(b, set()).add(a)
            preds.setdefault(a, set())
        out: dict = {}
        for p in preds:
            seen = {p}
            stack = [p]
            while stack:
                n = stack.pop()
                for q in preds.get(n, ()):
                    if q not in seen:
                        seen.add(q)
                        stack.append(q)
            out[p] = seen
        return out

    def leq(self, a: int, b: int) -> bool:
        if a == b:
            return True
        return a in self._below.get(b, ())

    def below(self, p: int) -> set:
        return self._below.get(p, {p})

    @functools.cached_property
    def _covers(self) -> dict:
        """point -> points it immediately covers (Hasse diagram, downward)."""
        out = {}
        for p, down in self._below.items():
            strict = down - {p}
            out[p] = [q for q in strict
                      if not any(q != r and q in self._below[r] for r in strict)]
        return out

    def is_partial_order(self) -> bool:
        for p, down in self._below.items():
            for q in down:
                if q != p and p in self._below.get(q, ()):
                    return False
        return True

    def closure(self) -> set:
        return {(q, p) for p, down in self._below.items() for q in down}

    @functools.cached_property
    def _chain_memo(self) -> dict:
        return {}

    def chains(self, p: int) -> tuple:
        memo = self._chain_memo
        if p in memo:
            return memo[p]
        lower = self._covers.get(p, ())
        if not lower:
            out = ((p,),)
        else:
            out = tuple(c + (p,) for q in sorted(lower) for c in self.chains(q))
        memo[p] = out
        return out


def pi_order(points, edges) -> PiOrder:
    pts = set(points)
    for a, b in edges:
        pts.add(a)
        pts.add(b)
    return PiOrder(frozenset(pts), frozenset(edges))


def p_chains(pi: PiOrder, p: int) -> list[tuple]:
    """All maximal chains of ``pi`` whose greatest element is ``p``."""
    return list(pi.chains(p))


TypeEnv = dict  # (name, point) -> Type


def uf_pi(u: str, gamma: TypeEnv, pi: PiOrder, at: int) -> tuple:
    """The greatest binding of ``u`` in ``gamma`` at or below ``at``."""
    cands = [q for (n, q) in gamma if n == u and pi.leq(q, at)]
    if not cands:
        raise UnboundOccurrence(f"{u} has no binding at or before", at)
    top = [q for q in cands if all(pi.leq(r, q) for r in cands)]
    if not top:
        raise AmbiguousBinding(f"{u} has no greatest binding among {sorted(cands)}", at)
    return (u, top[0])


def uf_chain(u: str, gamma: TypeEnv, chain) -> Optional[tuple]:
    """Greatest binding of ``u`` on a single chain (listed in ascending order)."""
    for q in reversed(chain):
        if (u, q) in gamma:
            return (u, q)
    return None


def uf_upsilon(u: str, gamma: TypeEnv, chains) -> set:
    out = set()
    for c in chains:
        k = uf_chain(u, gamma, c)
        if k is not None:
            out.add(k)
    return out


def sigma(gamma: TypeEnv, s: Pattern, p: int, t: Type) -> TypeEnv:
    if isinstance(s, VarPat):
        return {**gamma, (s.name, p): t}
    return gamma


# Syntactic resolution of application sites


@dataclass
class Resolution:
    target: dict = field(default_factory=dict)      # app point -> Abs occurrence
    sites: dict = field(default_factory=dict)       # lambda point -> [app occurrence]
    recursive_sites: set = field(default_factory=set)  # app points inside their own lambda
    rec_lambdas: dict = field(default_factory=dict)  # lambda point -> let rec name
    chained: dict = field(default_factory=dict)     # app point -> Abs whose body runs there
    returns: dict = field(default_factory=dict)     # lambda point -> Abs its body evaluates to

    def placeholder(self, lam_point: int) -> "Arrow":
        """A first guess for a lambda's type with the right arrow nesting."""
        inner = self.returns.get(lam_point)
        return Arrow(EMPTY, self.placeholder(inner.point) if inner is not None else EMPTY)

    def external_sites(self, lam_point: int) -> list:
        return [a for a in self.sites.get(lam_point, []) if a.point not in self.recursive_sites]


def resolve_applications(o: Occurrence) -> Resolution:
    """Match each application to the abstraction it syntactically calls."""
    res = Resolution()
    returns = res.returns

    def go(o: Occurrence, scope: dict, enclosing: tuple) -> Optional[Occurrence]:
        e = o.expr
        if isinstance(e, Abs):
            returns[o.point] = go(e.body, {**scope, e.param: None}, enclosing + (o.point,))
            return o
        if isinstance(e, Var):
            return scope.get(e.name)
        if isinstance(e, App):
            lam = go(e.fn, scope, enclosing)
            go(e.arg, scope, enclosing)
            if lam is None:
                return None
            res.target[o.point] = lam
            res.sites.setdefault(lam.point, []).append(o)
            if lam.point in enclosing:
                res.recursive_sites.add(o.point)
            return returns.get(lam.point)
        if isinstance(e, Let):
            lam = go(e.bound, scope, enclosing)
            return go(e.body, {**scope, e.name: lam}, enclosing)
        if isinstance(e, LetRec):
            lam = e.bound if isinstance(e.bound.expr, Abs) else None
            inner = {**scope, e.name: lam}
            if lam is not None:
                res.rec_lambdas[lam.point] = e.name
            go(e.bound, inner, enclosing)
            return go(e.body, inner, enclosing)
        for k in children(o):
            go(k, {**scope, **_pattern_scope(o, k)}, enclosing)
        return None

    go(o, {}, ())
    for lam_point in res.sites:
        ext = res.external_sites(lam_point)
        if len(ext) == 1:
            res.chained[ext[0].point] = res.target[ext[0].point]
    return res


def _pattern_scope(o: Occurrence, kid: Occurrence) -> dict:
    if isinstance(o.expr, Case):
        for s, b in o.expr.branches:
            if b is kid and isinstance(s, VarPat):
                return {s.name: None}
    return {}


# Static order and alias base


def derive_pi(o: Occurrence, res: Optional[Resolution] = None) -> PiOrder:
    """Approximate every evaluation order of ``o`` by a partial order on its points.

    A point is placed after everything that completes before it: operands in
    evaluation order, a called abstraction's body between the argument and the
    application, case arms side by side between the scrutinee and the case.
    """
    res = res or resolve_applications(o)
    chained_lams = {lam.point for lam in res.chained.values()}
    edges: set = set()

    def link(entry, p):
        for q in entry:
            if q != p:
                edges.add((q, p))

    def flow(o: Occurrence, entry: tuple) -> int:
        e = o.expr
        p = o.point
        if isinstance(e, (Var, Const)):
            link(entry, p)
        elif isinstance(e, Abs):
            link(entry, p)
            if p not in chained_lams:
                flow(e.body, (p,))
        elif isinstance(e, App):
            x1 = flow(e.fn, entry)
            x2 = flow(e.arg, (x1,))
            lam = res.chained.get(p)
            if lam is not None:
                x2 = flow(lam.expr.body, (x2,))
            link((x2,), p)
        elif isinstance(e, Case):
            xs = flow(e.scrutinee, entry)
            for _, b in e.branches:
                link((flow(b, (xs,)),), p)
        else:
            last = entry
            for k in children(o):
                last = (flow(k, last),)
            link(last, p)
        return p

    flow(o, ())
    return pi_order((n.point for n in walk(o)), edges)


@dataclass(frozen=True)
class AliasBase:
    cells: tuple  # tuple of frozensets

    def cell_of(self, name: str) -> Optional[frozenset]:
        for c in self.cells:
            if name in c:
                return c
        return None

    def is_partition_of(self, names) -> bool:
        seen: set = set()
        for c in self.cells:
            if c & seen:
                return False
            seen |= c
        return set(names) <= seen


def program_names(o: Occurrence) -> set:
    names = set(variable_names(o))
    names |= {internal_var(n.point) for n in walk(o) if isinstance(n.expr, Ref)}
    return names


def derive_kappa0(o: Occurrence, res: Optional[Resolution] = None) -> AliasBase:
    """One cell per ref: its internal variable plus the variables that may hold it."""
    res = res or resolve_applications(o)
    var_refs: dict = {}
    content: dict = {}

    def refs(o: Occurrence) -> frozenset:
        e = o.expr
        if isinstance(e, Ref):
            return frozenset([o.point])
        if isinstance(e, Var):
            return frozenset(var_refs.get(e.name, ()))
        if isinstance(e, (Let, LetRec)):
            return refs(e.body)
        if isinstance(e, Case):
            out = frozenset()
            for _, b in e.branches:
                out |= refs(b)
            return out
        if isinstance(e, App):
            lam = res.target.get(o.point)
            return refs(lam.expr.body) if lam is not None else frozenset()
        if isinstance(e, Deref):
            out = frozenset()
            for r in refs(e.body):
                out |= content.get(r, frozenset())
            return out
        return frozenset()

    def add(table, key, more) -> bool:
        old = table.get(key, frozenset())
        if more <= old:
            return False
        table[key] = old | more
        return True

    changed = True
    while changed:
        changed = False
        for n in walk(o):
            e = n.expr
            if isinstance(e, Let):
                changed |= add(var_refs, e.name, refs(e.bound))
            elif isinstance(e, Case):
                r = refs(e.scrutinee)
                for s, _ in e.branches:
                    if isinstance(s, VarPat):
                        changed |= add(var_refs, s.name, r)
            elif isinstance(e, App):
                lam = res.target.get(n.point)
                if lam is not None:
                    changed |= add(var_refs, lam.expr.param, refs(e.arg))
            elif isinstance(e, Ref):
                changed |= add(content, n.point, refs(e.body))
            elif isinstance(e, Assign):
                more = refs(e.value)
                for r in refs(e.target):
                    changed |= add(content, r, more)

    parent: dict = {x: x for x in program_names(o)}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for x, rs in var_refs.items():
        for r in rs:
            a, b = find(x), find(internal_var(r))
            if a != b:
                parent[a] = b
    groups: dict = {}
    for x in parent:
        groups.setdefault(find(x), set()).add(x)
    cells = sorted((frozenset(g) for g in groups.values()), key=lambda c: sorted(c))
    return AliasBase(tuple(cells))


def kappa0_from_cells(cells) -> AliasBase:
    return AliasBase(tuple(frozenset(c) for c in cells))


# The checker


@dataclass
class TypeResult:
    type: Type
    gamma: TypeEnv
    table: dict  # point -> Type
    pi: PiOrder
    kappa0: Optional[AliasBase]
    passes: int


MAX_PASSES = 25
MAX_REC_ITERATIONS = 25


class _Checker:
    def __init__(self, gamma, pi, res, lam_types, rec_params, carried):
        self.gamma: TypeEnv = dict(gamma)
        self.gamma.update(carried)
        self.pi = pi
        self.res = res
        self.lam_types: dict = lam_types      # from the previous pass
        self.new_lam_types: dict = {}
        # parameter types of lambdas typed once for several sites (recursive,
        # or applied more than once): the union of the arguments seen last pass
        self.rec_params: dict = rec_params
        self.new_rec_params: dict = {}
        self.external_args: dict = {}         # lambda point -> {argument type}
        self.shared = {lp for lp, sites in res.sites.items()
                       if len(sites) > 1 and lp not in res.rec_lambdas}
        self.table: dict = {}
        self.mismatches: list = []
        self.deferred = {lam.point for lam in res.chained.values()
                         if lam.point not in res.rec_lambdas}
        self.let_binder: dict = {}            # lambda point -> let key binding it

    def record(self, o: Occurrence, t: Type) -> Type:
        self.table[o.point] = t
        return t

    def check(self, o: Occurrence) -> Type:
        e = o.expr
        p = o.point

        if isinstance(e, Const):
            return self.record(o, EMPTY)

        if isinstance(e, Var):
            key = uf_pi(e.name, self.gamma, self.pi, p)
            return self.record(o, base_union(self.gamma[key], Base(frozenset([(e.name, p)]))))

        if isinstance(e, Abs):
            return self.record(o, self.abstraction(o))

        if isinstance(e, App):
            t_fn = self.check(e.fn)
            t_arg = self.check(e.arg)
            lam = self.res.chained.get(p)
            if lam is not None and lam.point in self.deferred:
                # the body runs here, under the argument's type; the operator
                # saw last pass's type for the lambda, and passes repeat until
                # the two coincide
                self.gamma[(lam.expr.param, e.arg.point)] = t_arg
                t_lam = Arrow(t_arg, self.check(lam.expr.body))
                self.new_lam_types[lam.point] = t_lam
                self.table[lam.point] = t_lam
                key = self.let_binder.get(lam.point)
                if key is not None:
                    self.gamma[key] = t_lam
            if not isinstance(t_fn, Arrow):
                raise NotAFunctionType(f"operator has type {t_fn}", p)
            target = self.res.target.get(p)
            if target is not None and (target.point in self.res.rec_lambdas
                                       or target.point in self.shared):
                prev = self.new_rec_params.get(target.point, t_arg)
                self.new_rec_params[target.point] = _unite(prev, t_arg, p)
                if p not in self.res.recursive_sites:
                    self.external_args.setdefault(target.point, set()).add(t_arg)
                ok = type_leq(t_arg, t_fn.arg)
            else:
                ok = t_arg == t_fn.arg
            if not ok:
                self.mismatches.append(TypeMismatch(
                    f"argument type {t_arg} does not match parameter type {t_fn.arg}", p))
            return self.record(o, t_fn.res)

        if isinstance(e, ConstApp):
            t1 = self.check(e.left)
            t2 = self.check(e.right)
            if not (isinstance(t1, Base) and isinstance(t2, Base)):
                raise TypeMismatch(f"{e.op} needs base-type operands", p)
            return self.record(o, type_union(t1, t2))

        if isinstance(e, Let):
            t1 = self.check(e.bound)
            key = (e.name, e.bound.point)
            if isinstance(t1, Base) and t1.kappa:
                self.gamma[key] = Base(t1.delta, t1.kappa | {e.name})
            else:
                self.gamma[key] = t1
            if isinstance(e.bound.expr, Abs):
                self.let_binder[e.bound.point] = key
            return self.record(o, self.check(e.body))

        if isinstance(e, LetRec):
            if not isinstance(e.bound.expr, Abs):
                raise TypeMismatch(f"let rec {e.name} must bind an abstraction", p)
            self.record(e.bound, self.rec_abstraction(e.name, e.bound))
            return self.record(o, self.check(e.body))

        if isinstance(e, Case):
            ts = self.check(e.scrutinee)
            if not isinstance(ts, Base):
                raise TypeMismatch("case scrutinee must have a base type", p)
            out = None
            for s, b in e.branches:
                self.gamma = sigma(self.gamma, s, e.scrutinee.point, ts)
                tb = self.check(b)
                out = tb if out is None else _unite(out, tb, p)
            # the scrutinee's dependencies reach the result, its aliases do not
            return self.record(o, base_union(out, Base(ts.delta, frozenset())))

        if isinstance(e, Ref):
            t1 = self.check(e.body)
            if not isinstance(t1, Base):
                raise RefOfAbstraction("references cannot hold abstractions", p)
            nu = internal_var(p)
            self.gamma[(nu, p)] = t1
            return self.record(o, Base(frozenset(), frozenset([nu])))

        if isinstance(e, Deref):
            t1 = self.check(e.body)
            if not isinstance(t1, Base):
                raise DerefOfNonLocationType(f"dereferenced expression has type {t1}", p)
            nus = internals(t1.kappa)
            if not nus:
                raise KappaEmptyOnDeref("dereferenced expression has no alias information", p)
            chains = p_chains(self.pi, p)
            read = None
            for nu in nus:
                for key in sorted(uf_upsilon(nu, self.gamma, chains), key=_occ_key):
                    t = self.gamma[key]
                    read = t if read is None else _unite(read, t, p)
            if read is None:
                raise UnboundOccurrence(f"no binding of {', '.join(nus)} reaches", p)
            extra = frozenset((nu, p) for nu in nus)
            return self.record(o, base_union(read, Base(t1.delta | extra, frozenset())))

        if isinstance(e, Assign):
            t1 = self.check(e.target)
            if not isinstance(t1, Base):
                raise DerefOfNonLocationType(f"assignment target has type {t1}", p)
            nus = internals(t1.kappa)
            if not nus:
                raise KappaEmptyOnDeref("assignment target has no alias information", p)
            t2 = self.check(e.value)
            if not isinstance(t2, Base):
                raise RefOfAbstraction("references cannot hold abstractions", p)
            for nu in nus:
                self.gamma[(nu, p)] = t2
            return self.record(o, Base(t1.delta, frozenset()))

        raise TypeError(f"not an expression: {e!r}")

    def abstraction(self, o: Occurrence) -> Type:
        lam = o.expr
        p = o.point
        if p in self.res.rec_lambdas:
            # only reached when a let rec lambda is also used directly
            return self.rec_abstraction(self.res.rec_lambdas[p], o)
        if p in self.deferred:
            return self.lam_types.get(p) or self.res.placeholder(p)
        t_param = self.rec_params.get(p, EMPTY) if p in self.shared else EMPTY
        self.gamma[(lam.param, p)] = t_param
        t = Arrow(t_param, self.check(lam.body))
        self.new_lam_types[p] = t
        return t

    def check_restriction(self) -> None:
        """A lambda typed once must see the same argument type at every outside call."""
        for lp, args in sorted(self.external_args.items()):
            if len(args) > 1:
                shown = ", ".join(sorted(str(a) for a in args))
                raise PolymorphismRestriction(
                    f"abstraction called with different argument types: {shown}", lp)

    def rec_abstraction(self, fname: str, o: Occurrence) -> Type:
        lam = o.expr
        p = o.point
        t_param = self.rec_params.get(p, EMPTY)
        self.gamma[(lam.param, p)] = t_param
        t_res = (self.lam_types.get(p) or self.res.placeholder(p)).res
        for _ in range(MAX_REC_ITERATIONS):
            guess = Arrow(t_param, t_res)
            self.gamma[(fname, p)] = guess
            body = self.check(lam.body)
            if body == t_res:
                break
            t_res = body if not isinstance(body, type(t_res)) else _unite(t_res, body, p)
        else:
            raise TypeMismatch(f"recursive function {fname} has no stable type", p)
        t = Arrow(t_param, t_res)
        self.gamma[(fname, p)] = t
        self.new_lam_types[p] = t
        return t


def _unite(t1: Type, t2: Type, p: int) -> Type:
    try:
        return type_union(t1, t2)
    except ShapeMismatch as exc:
        raise ShapeMismatch(str(exc), p) from None


def typecheck(gamma: Optional[TypeEnv], pi: Optional[PiOrder], kappa0: Optional[AliasBase],
              o: Occurrence) -> TypeResult:
    """Type ``o`` under ``gamma``, ``pi`` and ``kappa0``.

    ``pi`` and ``kappa0`` default to ``derive_pi(o)`` and ``derive_kappa0(o)``.
    The result carries the type, the final type environment (input bindings
    plus everything the rules add) and a per-point type table.
    """
    clashes = check_binder_unique(o)
    if clashes:
        raise NotBinderUnique(f"binder names are not unique: {clashes}")
    res = resolve_applications(o)
    if pi is None:
        pi = derive_pi(o, res)
    if not pi.is_partial_order():
        raise TypeCheckError("the point order is not a partial order")
    if kappa0 is not None and not kappa0.is_partition_of(program_names(o)):
        raise TypeCheckError("the alias base is not a partition of the program's names")
    gamma = dict(gamma or {})

    lam_types: dict = {}
    rec_params: dict = {}
    carried: dict = {}
    prev = None
    for n in range(1, MAX_PASSES + 1):
        ch = _Checker(gamma, pi, res, lam_types, rec_params, carried)
        try:
            t = ch.check(o)
        except TypeCheckError:
            # an early pass may fail only because a lambda type was still a guess
            learned = any(lam_types.get(k) != v for k, v in ch.new_lam_types.items())
            learned |= any(rec_params.get(k) != v for k, v in ch.new_rec_params.items())
            if not learned:
                raise
            t = None
        snapshot = (t, ch.table, ch.gamma, ch.new_lam_types, ch.new_rec_params)
        if t is not None and snapshot == prev:
            ch.check_restriction()
            if ch.mismatches:
                raise ch.mismatches[0]
            return TypeResult(t, ch.gamma, ch.table, pi, kappa0, n)
        prev = snapshot
        lam_types = {**lam_types, **ch.new_lam_types}
        rec_params = {k: _unite(rec_params.get(k, v), v, k) for k, v in ch.new_rec_params.items()}
        carried = {k: v for k, v in ch.gamma.items() if is_internal(k[0])}
    raise TypeMismatch("typing did not reach a fixed point")


# Typing values


def type_value(gamma: TypeEnv, pi: PiOrder, v, t: Type) -> bool:
    """Check that value ``v`` can be given type ``t``; raise ``IllTypedValue`` if not."""
    from .runtime import Closure, Loc, RecClosure, UnitValue
    from .syntax import Bool, Int

    if isinstance(v, (Int, Bool, UnitValue)):
        if not isinstance(t, Base) or t.kappa:
            raise IllTypedValue(f"{v} cannot have type {t}")
        return True
    if isinstance(v, Loc):
        if not isinstance(t, Base) or not t.kappa:
            raise IllTypedValue(f"location {v} needs a base type with aliases, got {t}")
        return True
    if isinstance(v, (Closure, RecClosure)):
        if not isinstance(t, Arrow):
            raise IllTypedValue(f"closure cannot have type {t}")
        failures = env_welltyped(gamma, pi, v.env)
        if failures:
            raise EnvNotWellTyped("closure environment: " + "; ".join(failures))
        inner = dict(gamma)
        inner[(v.param, v.param_point)] = t.arg
        if isinstance(v, RecClosure):
            inner[(v.fname, v.param_point)] = t
        sub = resolve_applications(v.body)
        try:
            ch = _Checker(inner, pi, sub, {}, {}, {})
            body = ch.check(v.body)
        except TypeCheckError as exc:
            raise IllTypedValue(f"closure body does not type: {exc}") from None
        if not type_leq(body, t.res):
            raise IllTypedValue(f"closure body has type {body}, not within {t.res}")
        return True
    raise IllTypedValue(f"unknown value {v!r}")


def env_welltyped(gamma: TypeEnv, pi: PiOrder, env: dict) -> list[str]:
    """Empty list when every variable of ``env`` has an accepting binding in ``gamma``."""
    failures = []
    for x in sorted(env):
        keys = [k for k in gamma if k[0] == x]
        if not keys:
            failures.append(f"{x} has no binding in the type environment")
            continue
        ok = False
        for k in sorted(keys, key=_occ_key):
            try:
                type_value(gamma, pi, env[x], gamma[k])
                ok = True
                break
            except IllTypedValue:
                pass
        if not ok:
            failures.append(f"no binding of {x} accepts its value")
    return failures
