"""Reference implementations kept deliberately naive, for cross-checking."""

import itertools

from occflow.syntax import (
    Abs, App, Assign, Bool, BoolPat, Case, Const, ConstApp, Deref, Int, IntPat, Let,
    LetRec, Ref, Var, VarPat, Wildcard,
)


class Stuck(Exception):
    pass


def plain_eval(o, env=None, store=None):
    """Substitution-free environment interpreter without any instrumentation.

    Values: Python ints and bools, ("loc", n), ("clo", param, body, env),
    "unit".  Returns (value, store).
    """
    env = dict(env or {})
    store = dict(store or {})
    return _ev(o, env, store), store


def _ev(o, env, store):
    e = o.expr
    if isinstance(e, Const):
        c = e.c
        if isinstance(c, Int):
            return c.n
        if isinstance(c, Bool):
            return c.b
        raise Stuck("bare operator")
    if isinstance(e, Var):
        if e.name not in env:
            raise Stuck(f"unbound {e.name}")
        return env[e.name]
    if isinstance(e, Abs):
        return ("clo", e.param, e.body, env)
    if isinstance(e, App):
        f = _ev(e.fn, env, store)
        a = _ev(e.arg, env, store)
        if not (isinstance(f, tuple) and f[0] == "clo"):
            raise Stuck("not a function")
        _, param, body, cenv = f
        inner = dict(cenv)
        inner[param] = a
        return _ev(body, inner, store)
    if isinstance(e, ConstApp):
        a = _ev(e.left, env, store)
        b = _ev(e.right, env, store)
        op = e.op.name
        if op == "EQUAL":
            return a == b
        if not (type(a) is int and type(b) is int):
            raise Stuck("arithmetic on non-integers")
        return {"PLUS": a + b, "MINUS": a - b, "TIMES": a * b,
                "LESS": a < b, "GREATER": a > b}[op]
    if isinstance(e, Let):
        inner = dict(env)
        inner[e.name] = _ev(e.bound, env, store)
        return _ev(e.body, inner, store)
    if isinstance(e, LetRec):
        lam = e.bound.expr
        inner = dict(env)
        clo = ("clo", lam.param, lam.body, inner)
        inner[e.name] = clo  # the closure sees itself through the shared dict
        return _ev(e.body, inner, store)
    if isinstance(e, Case):
        v = _ev(e.scrutinee, env, store)
        for s, b in e.branches:
            if isinstance(s, Wildcard):
                return _ev(b, env, store)
            if isinstance(s, VarPat):
                inner = dict(env)
                inner[s.name] = v
                return _ev(b, inner, store)
            if isinstance(s, IntPat) and type(v) is int and v == s.n:
                return _ev(b, env, store)
            if isinstance(s, BoolPat) and type(v) is bool and v == s.b:
                return _ev(b, env, store)
        raise Stuck("no branch matches")
    if isinstance(e, Ref):
        v = _ev(e.body, env, store)
        loc = ("loc", len(store) + 1)
        store[loc] = v
        return loc
    if isinstance(e, Deref):
        loc = _ev(e.body, env, store)
        if loc not in store:
            raise Stuck("not a location")
        return store[loc]
    if isinstance(e, Assign):
        loc = _ev(e.target, env, store)
        v = _ev(e.value, env, store)
        if loc not in store:
            raise Stuck("not a location")
        store[loc] = v
        return "unit"
    raise Stuck(repr(e))


def leq_closure(points, edges):
    """Reflexive-transitive closure as a set of pairs, by Floyd-Warshall."""
    pts = sorted(points)
    rel = {(a, a) for a in pts} | set(edges)
    for k in pts:
        for i in pts:
            for j in pts:
                if (i, k) in rel and (k, j) in rel:
                    rel.add((i, j))
    return rel


def brute_chains(points, edges, p):
    """Maximal totally ordered subsets of the down-set of p that contain p."""
    rel = leq_closure(points, edges)
    down = [q for q in sorted(points) if (q, p) in rel]
    chains = []
    for r in range(1, len(down) + 1):
        for sub in itertools.combinations(down, r):
            if p not in sub:
                continue
            if all((a, b) in rel or (b, a) in rel for a in sub for b in sub):
                chains.append(frozenset(sub))
    maximal = [c for c in chains if not any(c < d for d in chains)]
    return maximal


def brute_uf_pi(u, gamma, points, edges, at):
    """The binding point of u below `at` that every other such point is below, if unique."""
    rel = leq_closure(points, edges)
    cands = [q for (n, q) in gamma if n == u and (q, at) in rel]
    tops = [q for q in cands if all((r, q) in rel for r in cands)]
    return tops[0] if len(tops) == 1 else None


def brute_uf_upsilon(u, gamma, points, edges, p):
    rel = leq_closure(points, edges)
    out = set()
    for chain in brute_chains(points, edges, p):
        bound = [q for q in chain if (u, q) in gamma]
        if bound:
            top = [q for q in bound if all((r, q) in rel for r in bound)]
            out.add((u, top[0]))
    return out
