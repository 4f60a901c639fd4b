"""Random programs and differential checks of the checker against the interpreter."""

from __future__ import annotations

import json
import random
import time
from dataclasses import asdict, dataclass, field
from typing import Iterator, Optional

from . import runtime, typesys
from .agreement import env_agreement, type_agreement
from .syntax import (
    Abs, App, Assign, Bool, BoolPat, Case, Const, ConstApp, Deref, Int, IntPat, Let,
    LetRec, Occurrence, Op, Ref, Var, VarPat, Wildcard, binders, fv, label, render,
    variable_names, walk,
)

KINDS = ("int", "bool", "loc", "unit")


@dataclass
class GenConfig:
    max_depth: int = 4
    max_refs: int = 2
    allow_letrec: bool = False
    seed: int = 0
    count: int = 100
    fuel: int = 100_000

    def __post_init__(self):
        if self.max_depth < 1:
            raise ValueError("max_depth must be at least 1")


class _Stuck(Exception):
    """A location was needed after the ref budget ran out; the caller retries."""


def _occ(e) -> Occurrence:
    return Occurrence(e)


class _Gen:
    def __init__(self, rng: random.Random, cfg: GenConfig):
        self.rng = rng
        self.cfg = cfg
        self.refs_left = cfg.max_refs
        self.counter = 0

    def fresh(self, stem: str) -> str:
        self.counter += 1
        return f"{stem}{self.counter}"

    def has(self, kind: str, scope: dict) -> bool:
        return any(k == kind for k in scope.values())

    def can(self, kind: str, scope: dict) -> bool:
        if kind == "loc":
            return self.refs_left > 0 or self.has("loc", scope)
        if kind == "unit":
            return self.can("loc", scope)
        return True

    def pick_var(self, kind: str, scope: dict) -> Optional[Occurrence]:
        names = sorted(x for x, k in scope.items() if k == kind)
        if not names:
            return None
        return _occ(Var(self.rng.choice(names)))

    def leaf(self, kind: str, scope: dict) -> Occurrence:
        r = self.rng
        if kind == "int" and self.has("loc", scope) and r.random() < 0.4:
            return _occ(Deref(self.pick_var("loc", scope)))
        v = self.pick_var(kind, scope)
        if v is not None and r.random() < 0.7:
            return v
        if kind == "int":
            return _occ(Const(Int(r.randint(-3, 6))))
        if kind == "bool":
            return _occ(Const(Bool(r.random() < 0.5)))
        if kind == "loc":
            if self.refs_left > 0:
                self.refs_left -= 1
                return _occ(Ref(self.leaf("int", scope)))
            if v is None:
                raise _Stuck
            return v
        loc = self.leaf("loc", scope)
        return _occ(Assign(loc, self.leaf("int", scope)))

    def gen(self, kind: str, depth: int, scope: dict) -> Occurrence:
        if depth <= 1:
            return self.leaf(kind, scope)
        r = self.rng
        d = depth - 1
        options = ["leaf", "let", "let", "let", "case", "app"]
        if self.refs_left > 0 and kind in ("int", "bool"):
            options += ["letref", "letref"]
        if kind == "int":
            options += ["arith", "arith"]
            if self.can("loc", scope):
                options += ["deref", "deref", "seq"]
            if self.cfg.allow_letrec:
                options.append("letrec")
        elif kind == "bool":
            options += ["compare", "compare"]
            if self.can("loc", scope):
                options.append("seq")
        elif kind == "loc":
            options += ["ref", "alias", "alias"] if self.refs_left > 0 else ["alias"]
        else:
            options += ["assign", "assign"]
        choice = r.choice(options)

        if choice == "leaf":
            return self.leaf(kind, scope)
        if choice == "let":
            k = r.choice([k for k in KINDS if self.can(k, scope)])
            x = self.fresh("x")
            bound = self.gen(k, d, scope)
            return _occ(Let(x, bound, self.gen(kind, d, {**scope, x: k})))
        if choice == "case":
            return self.case(kind, d, scope)
        if choice == "app":
            return self.app(kind, d, scope)
        if choice == "arith":
            op = r.choice(["PLUS", "MINUS", "PLUS", "TIMES"])
            left = self.gen("int", d, scope)
            if op == "TIMES":
                right = _occ(Const(Int(r.randint(-2, 3))))
            else:
                right = self.gen("int", d, scope)
            return _occ(ConstApp(Op(op), left, right))
        if choice == "compare":
            op = r.choice(["EQUAL", "LESS", "GREATER"])
            return _occ(ConstApp(Op(op), self.gen("int", d, scope), self.gen("int", d, scope)))
        if choice == "deref":
            return _occ(Deref(self.gen("loc", d, scope)))
        if choice == "seq":
            u = self.fresh("u")
            first = self.gen("unit", d, scope)
            return _occ(Let(u, first, self.gen(kind, d, {**scope, u: "unit"})))
        if choice == "ref":
            self.refs_left -= 1
            return _occ(Ref(self.gen("int", d, scope)))
        if choice == "alias":
            v = self.pick_var("loc", scope)
            if v is not None:
                return v
            return self.leaf("loc", scope)
        if choice == "assign":
            target = self.gen("loc", d, scope)
            return _occ(Assign(target, self.gen("int", d, scope)))
        if choice == "letref":
            # the common shape: name a fresh ref, then use it in the body
            self.refs_left -= 1
            x = self.fresh("r")
            bound = _occ(Ref(self.gen("int", max(1, d - 1), scope)))
            return _occ(Let(x, bound, self.gen(kind, d, {**scope, x: "loc"})))
        if choice == "letrec":
            return self.letrec(d, scope)
        raise AssertionError(choice)

    def case(self, kind: str, d: int, scope: dict) -> Occurrence:
        r = self.rng
        sk = r.choice(["int", "bool"] + (["loc"] if self.can("loc", scope) else []))
        scrut = self.gen(sk, d, scope)
        branches = []
        if sk == "int":
            for n in r.sample(range(-1, 4), r.randint(0, 2)):
                branches.append((IntPat(n), self.gen(kind, d, scope)))
        elif sk == "bool":
            branches.append((BoolPat(r.random() < 0.5), self.gen(kind, d, scope)))
        if r.random() < 0.5:
            y = self.fresh("m")
            branches.append((VarPat(y), self.gen(kind, d, {**scope, y: sk})))
        else:
            branches.append((Wildcard(), self.gen(kind, d, scope)))
        return _occ(Case(scrut, tuple(branches)))

    def app(self, kind: str, d: int, scope: dict) -> Occurrence:
        r = self.rng
        k = r.choice([k for k in KINDS if self.can(k, scope)])
        y = self.fresh("y")
        arg = self.gen(k, d, scope)
        lam = _occ(Abs(y, self.gen(kind, d, {**scope, y: k})))
        if r.random() < 0.5:
            return _occ(App(lam, arg))
        f = self.fresh("f")
        return _occ(Let(f, lam, _occ(App(_occ(Var(f)), arg))))

    def letrec(self, d: int, scope: dict) -> Occurrence:
        r = self.rng
        f, n, m = self.fresh("f"), self.fresh("n"), self.fresh("m")
        inner = {**scope, n: "int"}
        base = self.gen("int", max(1, d - 1), inner)
        smaller = _occ(ConstApp(Op("MINUS"), _occ(Var(m)), _occ(Const(Int(1)))))
        step = _occ(ConstApp(Op("PLUS"), _occ(Var(m)), _occ(App(_occ(Var(f)), smaller))))
        body = _occ(Case(_occ(Var(n)), ((IntPat(0), base), (VarPat(m), step))))
        start = _occ(Const(Int(r.randint(0, 4))))
        return _occ(LetRec(f, _occ(Abs(n, body)), _occ(App(_occ(Var(f)), start))))


def item_seed(seed: int, index: int) -> str:
    return f"{seed}:{index}"


def generate(cfg: GenConfig, index: int = 0) -> Occurrence:
    """A closed, binder-unique, labeled program, determined by ``cfg.seed`` and ``index``."""
    attempt = 0
    while True:
        rng = random.Random(f"{item_seed(cfg.seed, index)}:{attempt}")
        g = _Gen(rng, cfg)
        kind = rng.choice([k for k in KINDS if g.can(k, {})])
        if cfg.max_depth == 1:
            kind = rng.choice(["int", "bool"])
        depth = rng.randint(max(1, cfg.max_depth - 2), cfg.max_depth)
        try:
            return label(g.gen(kind, depth, {}))
        except _Stuck:
            attempt += 1


def corpus(cfg: GenConfig) -> Iterator[Occurrence]:
    for i in range(cfg.count):
        yield generate(cfg, i)


# Checks


PASS = "pass"
REJECT = "checker-reject"
EVAL_ERROR = "eval-error"
VIOLATION = "VIOLATION"

# a checker-accepted program must never raise these
_PROGRESS_ERRORS = (runtime.Unbound, runtime.NotAFunction, runtime.NotALocation,
                    runtime.RuntimeTypeError, runtime.NotBinderUnique)


@dataclass
class SoundnessReport:
    program: str
    verdict: str
    conclusion: Optional[str] = None   # value-typing | env-agreement | type-agreement | progress
    witnesses: list = field(default_factory=list)
    seed: Optional[str] = None
    type: Optional[str] = None
    value: Optional[str] = None

    def to_json(self) -> dict:
        return {k: v for k, v in asdict(self).items() if v not in (None, [])}


def check_soundness(o: Occurrence, cfg: Optional[GenConfig] = None,
                    seed: Optional[str] = None) -> SoundnessReport:
    """Typecheck, evaluate, and test the three soundness conclusions on ``o``."""
    cfg = cfg or GenConfig()
    text = render(o)
    rep = SoundnessReport(text, PASS, seed=seed)
    try:
        res = typesys.resolve_applications(o)
        pi = typesys.derive_pi(o, res)
        k0 = typesys.derive_kappa0(o, res)
        tr = typesys.typecheck({}, pi, k0, o)
    except typesys.TypeCheckError as exc:
        rep.verdict = REJECT
        rep.witnesses = [f"{type(exc).__name__}: {exc}"]
        return rep
    rep.type = str(tr.type)
    try:
        r = runtime.run(o, cfg.fuel)
    except _PROGRESS_ERRORS as exc:
        rep.verdict = VIOLATION
        rep.conclusion = "progress"
        rep.witnesses = [f"{type(exc).__name__}: {exc}"]
        return rep
    except runtime.EvalError as exc:
        rep.verdict = EVAL_ERROR
        rep.witnesses = [f"{type(exc).__name__}: {exc}"]
        return rep
    rep.value = runtime.show_value(r.value)

    try:
        typesys.type_value(tr.gamma, pi, r.value, tr.type)
    except typesys.IllTypedValue as exc:
        rep.verdict = VIOLATION
        rep.conclusion = "value-typing"
        rep.witnesses = [str(exc)]
        return rep
    env_rep = env_agreement({}, r.store, r.depfn, r.order, tr.gamma, pi, k0)
    if not env_rep.ok:
        rep.verdict = VIOLATION
        rep.conclusion = "env-agreement"
        rep.witnesses = [f"[{c}] {w}" for c, w in env_rep.violations]
        return rep
    t_rep = type_agreement({}, r.value, r.depfn, r.order, r.deps, tr.gamma, tr.type, k0)
    if not t_rep.ok:
        rep.verdict = VIOLATION
        rep.conclusion = "type-agreement"
        rep.witnesses = [f"[{c}] {w}" for c, w in t_rep.violations]
    return rep


def check_history(o: Occurrence, fuel: Optional[int] = None) -> Optional[bool]:
    """Every key bound during evaluation is a binder of ``o`` or a location.

    Returns None when evaluation does not finish normally.
    """
    try:
        r = runtime.run(o, fuel)
    except runtime.EvalError:
        return None
    names = {x for x, _ in binders(o)}
    free = fv(o)
    for u, _ in r.depfn.keys():
        if isinstance(u, runtime.Loc):
            continue
        if u not in names or u in free:
            return False
    return True


def random_type(rng: random.Random, points, names, depth: int = 2) -> typesys.Type:
    def base():
        delta = frozenset((rng.choice(names), rng.choice(points))
                          for _ in range(rng.randint(0, 2)))
        kappa = frozenset(rng.sample(names, rng.randint(0, min(2, len(names)))))
        return typesys.Base(delta, kappa)
    if depth > 0 and rng.random() < 0.3:
        return typesys.Arrow(random_type(rng, points, names, depth - 1),
                             random_type(rng, points, names, depth - 1))
    return base()


def fresh_name(o: Occurrence, stem: str = "z") -> str:
    taken = variable_names(o)
    i = 0
    while f"{stem}{i}" in taken:
        i += 1
    return f"{stem}{i}"


def check_strengthening(o: Occurrence, rng: Optional[random.Random] = None,
                        trials: int = 5) -> Optional[bool]:
    """Adding a binding for an unused name never changes the program's type.

    Returns None when ``o`` is not accepted to begin with.
    """
    rng = rng or random.Random(0)
    try:
        res = typesys.resolve_applications(o)
        pi = typesys.derive_pi(o, res)
        k0 = typesys.derive_kappa0(o, res)
        base = typesys.typecheck({}, pi, k0, o)
    except typesys.TypeCheckError:
        return None
    z = fresh_name(o)
    points = sorted(pi.points) or [0]
    names = sorted(variable_names(o) | {z}) + ["nu@0"]
    for _ in range(trials):
        p = rng.choice(points + [max(points) + 1])
        t = random_type(rng, points, names)
        try:
            again = typesys.typecheck({(z, p): t}, pi, k0, o)
        except typesys.TypeCheckError:
            return False
        if again.type != base.type:
            return False
    return True


# Corpus runner


def run_corpus(cfg: GenConfig, out=None) -> dict:
    """Check ``cfg.count`` generated programs; write one JSON line each, then a summary."""
    counts = {PASS: 0, REJECT: 0, EVAL_ERROR: 0, VIOLATION: 0}
    history_failures = 0
    start = time.perf_counter()
    for i in range(cfg.count):
        o = generate(cfg, i)
        rep = check_soundness(o, cfg, seed=item_seed(cfg.seed, i))
        counts[rep.verdict] += 1
        if rep.verdict in (PASS, VIOLATION) and check_history(o, cfg.fuel) is False:
            history_failures += 1
        if out is not None:
            out.write(json.dumps(rep.to_json(), ensure_ascii=False) + "\n")
    summary = {
        "summary": True,
        "count": cfg.count,
        "seed": cfg.seed,
        **counts,
        "history_failures": history_failures,
    }
    if out is not None:
        out.write(json.dumps(summary) + "\n")
    # timing stays out of the written records so reruns are byte-identical
    return {**summary, "seconds": round(time.perf_counter() - start, 3)}
