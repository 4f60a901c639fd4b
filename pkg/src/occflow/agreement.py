"""Relations between a runtime state and a typing state.

Each check returns an ``AgreementReport`` listing the clauses that fail,
with a short witness for each, instead of a bare boolean.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .runtime import (
    DepFunc, DependencyPair, Loc, PointOrder, Store, Unbound, env_inverse, uf_runtime,
)
from .syntax import is_internal
from .typesys import AliasBase, Arrow, Base, PiOrder, Type, TypeEnv, uf_upsilon


@dataclass
class AgreementReport:
    violations: list = field(default_factory=list)  # (clause id, witness)

    @property
    def ok(self) -> bool:
        return not self.violations

    def fail(self, clause: str, witness: str) -> None:
        self.violations.append((clause, witness))

    def extend(self, other: "AgreementReport", prefix: str = "") -> None:
        for clause, witness in other.violations:
            self.violations.append((clause, prefix + witness))

    def __bool__(self):
        return self.ok

    def __str__(self):
        if self.ok:
            return "ok"
        return "; ".join(f"[{c}] {w}" for c, w in self.violations)


def _show_key(key) -> str:
    u, p = key
    return f"{u}^{p}"


def _referenced_cells(delta, kappa0: Optional[AliasBase]) -> list:
    """Cells with a member that has an occurrence in ``delta``."""
    if kappa0 is None:
        return []
    names = {n for n, _ in delta}
    return [c for c in kappa0.cells if c & names]


def dep_agreement(env: dict, d: DependencyPair, delta, kappa0: Optional[AliasBase]) -> AgreementReport:
    rep = AgreementReport()
    missing = d.V - frozenset(delta)
    if missing:
        rep.fail("dep.V", "occurrences not in delta: "
                 + ", ".join(sorted(_show_key(k) for k in missing)))
    for loc, p in sorted(d.L, key=lambda k: (k[0].id, k[1])):
        names = env_inverse(env, loc)
        if names:
            cells = _referenced_cells(delta, kappa0)
            if not any(names <= c for c in cells):
                rep.fail("dep.aliased", f"{loc}^{p}: no referenced cell holds {sorted(names)}")
        elif not any(is_internal(n) for n, _ in delta):
            rep.fail("dep.unaliased", f"{loc}^{p}: delta mentions no internal variable")
    return rep


def _witnesses(w: DepFunc, loc: Loc, gamma: TypeEnv, kappa) -> set:
    """Internal variables of ``kappa`` bound in ``gamma`` at a binding point of ``loc``."""
    pts = w.binding_points(loc)
    return {nu for nu in kappa if is_internal(nu) and any((nu, p) in gamma for p in pts)}


def alias_agreement(env: dict, w: DepFunc, order: PointOrder, loc: Loc, gamma: TypeEnv,
                    kappa, kappa0: Optional[AliasBase]) -> AgreementReport:
    rep = AgreementReport()
    found = _witnesses(w, loc, gamma, kappa)
    if not found:
        rep.fail("alias.bound", f"no internal variable of {sorted(kappa)} is bound where {loc} is")
        return rep
    if kappa0 is None:
        return rep
    names = env_inverse(env, loc)
    cells = [c for c in kappa0.cells if c & found]
    if names:
        if not any(names <= c for c in cells):
            rep.fail("alias.cell", f"no cell holds both {sorted(names)} and one of {sorted(found)}")
    elif not cells:
        rep.fail("alias.cell", f"no cell holds any of {sorted(found)}")
    return rep


def type_agreement(env: dict, v, w: DepFunc, order: PointOrder, d: DependencyPair,
                   gamma: TypeEnv, t: Type, kappa0: Optional[AliasBase] = None) -> AgreementReport:
    if isinstance(v, Loc):
        if not isinstance(t, Base):
            rep = AgreementReport()
            rep.fail("type.location", f"location {v} has arrow type {t}")
            return rep
        rep = dep_agreement(env, d, t.delta, kappa0)
        rep.extend(alias_agreement(env, w, order, v, gamma, t.kappa, kappa0))
        return rep
    if isinstance(t, Arrow):
        return type_agreement(env, v, w, order, d, gamma, t.res, kappa0)
    return dep_agreement(env, d, t.delta, kappa0)


def env_agreement(env: dict, sto: Store, w: DepFunc, order: PointOrder, gamma: TypeEnv,
                  pi: PiOrder, kappa0: Optional[AliasBase] = None) -> AgreementReport:
    """Check a runtime state against a typing state, clause by clause.

    1. every variable of ``env`` is bound in ``w``, and those bindings are in ``gamma``
    2. the latest binding of each such variable agrees with its type
    3. every stored location is bound in ``w``, and one internal variable is
       bound in ``gamma`` at all of its binding points
    4. each location binding's dependencies agree with that internal variable's type
    5. the recorded order is contained in ``pi``
    6. the latest binding of each location is a greatest binding on ``pi``'s chains
    """
    rep = AgreementReport()

    for x in sorted(env):
        pts = sorted(w.binding_points(x))
        if not pts:
            rep.fail("1", f"{x} has no binding in w")
            continue
        absent = [p for p in pts if (x, p) not in gamma]
        if absent:
            rep.fail("1", f"{x}^{absent[0]} is bound in w but not in the type environment")
        key = uf_runtime(x, w)
        if key in gamma:
            sub = type_agreement(env, env[x], w, order, w[key], gamma, gamma[key], kappa0)
            rep.extend(AgreementReport([("2", f"{_show_key(key)}: {c} {m}")
                                        for c, m in sub.violations]))

    ivars = sorted({n for n, _ in gamma if is_internal(n)})
    for loc in sorted(sto.cells):
        pts = w.binding_points(loc)
        if not pts:
            rep.fail("3", f"{loc} is stored but has no binding in w")
            continue
        if not any(all((nu, p) in gamma for p in pts) for nu in ivars):
            rep.fail("3", f"no internal variable is bound at every binding point of {loc}")

    for key in sorted((k for k in w.keys() if isinstance(k[0], Loc)), key=lambda k: (k[0].id, k[1])):
        loc, p = key
        for nu in ivars:
            if (nu, p) not in gamma:
                continue
            value = w.written.get(key)
            if value is None:
                continue
            sub = type_agreement(env, value, w, order, w[key], gamma, gamma[(nu, p)], kappa0)
            rep.extend(AgreementReport([("4", f"{loc}^{p} vs {nu}^{p}: {c} {m}")
                                        for c, m in sub.violations]))

    closure = pi.closure()
    for a, b in sorted(order.edges):
        if a != b and (a, b) not in closure:
            rep.fail("5", f"recorded order {a} before {b} is not in the static order")

    for key in sorted((k for k in w.keys() if isinstance(k[0], Loc)), key=lambda k: (k[0].id, k[1])):
        loc, p = key
        nus = [nu for nu in ivars if (nu, p) in gamma]
        if not nus:
            continue
        try:
            latest = uf_runtime(loc, w)
        except Unbound:
            rep.fail("6", f"{loc} has no latest binding")
            continue
        q = latest[1]
        candidates = [q] + sorted(pi.points - {q})
        if not any((nu, q) in uf_upsilon(nu, gamma, pi.chains(p2))
                   for nu in nus for p2 in candidates):
            rep.fail("6", f"latest binding {loc}^{q} matches no greatest binding of {sorted(nus)}")
    return rep
