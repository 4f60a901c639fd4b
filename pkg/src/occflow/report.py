"""JSON-ready and DOT renderings of evaluation and typing results.

All sets are emitted sorted (by name, then point) so output is stable.
"""

from __future__ import annotations

from .runtime import DependencyPair, EvalResult, Loc, show_value
from .typesys import AliasBase, Arrow, Base, PiOrder, Type, TypeResult


def _name(u) -> str:
    return str(u)


def _sort_key(key):
    u, p = key
    if isinstance(u, Loc):
        return (1, "", u.id, p)
    return (0, u, 0, p)


def occ(key) -> str:
    u, p = key
    return f"{_name(u)}^{p}"


def occs(keys) -> list[str]:
    return [occ(k) for k in sorted(keys, key=_sort_key)]


def deps_json(d: DependencyPair) -> dict:
    return {"L": occs(d.L), "V": occs(d.V)}


def type_json(t: Type) -> dict:
    if isinstance(t, Base):
        return {"delta": occs(t.delta), "kappa": sorted(t.kappa)}
    return {"arg": type_json(t.arg), "res": type_json(t.res)}


def run_json(r: EvalResult) -> dict:
    w = r.depfn
    return {
        "value": show_value(r.value),
        "deps": deps_json(r.deps),
        "store": {str(loc): show_value(v) for loc, v in sorted(r.store.cells.items())},
        "w": [{"key": occ(k), **deps_json(w[k])} for k in sorted(w.keys(), key=_sort_key)],
        "order": sorted([a, b] for a, b in r.order.edges),
        "order_is_antisymmetric": r.order.is_antisymmetric(),
    }


def kappa0_json(k0: AliasBase) -> list:
    return [sorted(c) for c in k0.cells]


def pi_json(pi: PiOrder) -> list:
    return sorted([a, b] for a, b in pi.edges)


def typing_json(tr: TypeResult) -> dict:
    out = {
        "type": type_json(tr.type),
        "type_text": str(tr.type),
        "table": {str(p): str(t) for p, t in sorted(tr.table.items())},
        "gamma": [{"name": n, "point": p, "type": str(tr.gamma[(n, p)])}
                  for n, p in sorted(tr.gamma, key=_sort_key)],
        "pi": pi_json(tr.pi),
        "passes": tr.passes,
    }
    if tr.kappa0 is not None:
        out["kappa0"] = kappa0_json(tr.kappa0)
    return out


def _dot_id(key) -> str:
    return '"' + occ(key).replace('"', '\\"') + '"'


def run_dot(r: EvalResult) -> str:
    """Dependency function as a graph: binding -> the occurrences it depends on."""
    lines = ["digraph dependencies {", "  rankdir=LR;"]
    w = r.depfn
    for k in sorted(w.keys(), key=_sort_key):
        lines.append(f"  {_dot_id(k)};")
        d = w[k]
        for dep in sorted(d.L | d.V, key=_sort_key):
            lines.append(f'  {_dot_id(k)} -> {_dot_id(dep)} [label="depends-on"];')
    for a, b in sorted(r.order.edges):
        lines.append(f'  "p{a}" -> "p{b}" [label="order", style=dashed];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def typing_dot(tr: TypeResult) -> str:
    """Typing environment as a graph: binding -> the occurrences in its delta, plus Pi."""
    lines = ["digraph typing {", "  rankdir=LR;"]
    for key in sorted(tr.gamma, key=_sort_key):
        lines.append(f"  {_dot_id(key)};")
        t = tr.gamma[key]
        while isinstance(t, Arrow):
            t = t.res
        for dep in sorted(t.delta, key=_sort_key):
            lines.append(f'  {_dot_id(key)} -> {_dot_id(dep)} [label="depends-on"];')
    for a, b in sorted(tr.pi.edges):
        lines.append(f'  "p{a}" -> "p{b}" [label="order", style=dashed];')
    lines.append("}")
    return "\n".join(lines) + "\n"
