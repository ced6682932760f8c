"""Reference resolution and data flow edges."""

from __future__ import annotations

from typing import Optional

from ..cpg.graph import CpgGraph
from ..ir.model import ParseReport

_SPINE = ("MemberExpression", "ArraySubscriptionExpression")
_SPINE_BASE = {"MemberExpression": "base", "ArraySubscriptionExpression": "arrayExpression"}
_EXPRESSIONS = {
    "BinaryOperator", "UnaryOperator", "CastExpression", "MemberExpression",
    "ArraySubscriptionExpression", "ConditionalExpression",
}


class UnresolvedReference(LookupError):
    pass


def _global_scope(g: CpgGraph) -> dict[str, int]:
    scope: dict[str, int] = {}
    for tu in g.roots:
        for c in g.ast_children(tu):
            n = g.nodes[c]
            if n.kind in ("VariableDeclaration", "FunctionDeclaration") and n.name is not None:
                if n.kind == "FunctionDeclaration" and n.name in scope and not g.has_body(c):
                    continue
                scope[n.name] = c
    return scope


def _lvalue_spine(g: CpgGraph, lhs: int) -> list[int]:
    spine = [lhs]
    cur = lhs
    while g.nodes[cur].kind in _SPINE:
        cur = g.child(cur, _SPINE_BASE[g.nodes[cur].kind])
        if cur is None:
            break
        spine.append(cur)
    return spine


def build_dfg(graph: CpgGraph, report: Optional[ParseReport] = None) -> CpgGraph:
    """Resolve references (local scope first, then globals) and add DFG edges."""
    g = graph
    report = report if report is not None else ParseReport()
    g.clear_edges("DFG")
    g.clear_edges("REFERS_TO")
    globals_ = _global_scope(g)
    unresolved: set[tuple[int, str]] = set()

    scopes: list[tuple[Optional[int], list[int]]] = []
    for tu in g.roots:
        for c in g.ast_children(tu):
            if g.nodes[c].kind == "VariableDeclaration":
                scopes.append((None, list(g.descendants(c))))
    for fid in g.functions():
        scopes.append((fid, list(g.descendants(fid))))

    for fid, members in scopes:
        local: dict[str, int] = {}
        if fid is not None:
            for nid in members:
                n = g.nodes[nid]
                if n.kind in ("ParameterDeclaration", "VariableDeclaration") and n.name not in local:
                    local[n.name] = nid
        spine_nodes: set[int] = set()
        for nid in members:
            n = g.nodes[nid]
            if n.kind == "BinaryOperator" and n.prop("operatorCode") == "=":
                lhs, rhs = g.child(nid, "lhs"), g.child(nid, "rhs")
                if lhs is None or rhs is None:
                    continue
                spine = _lvalue_spine(g, lhs)
                spine_nodes.update(spine)
                g.add_edge(rhs, lhs, "DFG")
                for a, b in zip(spine, spine[1:]):
                    g.add_edge(a, b, "DFG")
        for nid in members:
            n = g.nodes[nid]
            k = n.kind
            if k == "DeclaredReferenceExpression":
                scope = n.prop("scope", "local")
                if scope == "label":
                    continue
                decl = local.get(n.name) if scope == "local" else None
                if decl is None:
                    decl = globals_.get(n.name)
                if decl is None:
                    key = (fid if fid is not None else -1, n.name)
                    if key not in unresolved:
                        unresolved.add(key)
                        report.add(0, 0, f"unresolved reference {n.name!r}", "warning")
                    continue
                g.add_edge(nid, decl, "REFERS_TO")
                access = n.prop("access", "read")
                if access in ("read", "readwrite"):
                    g.add_edge(decl, nid, "DFG")
                if access in ("write", "readwrite") and nid in spine_nodes:
                    g.add_edge(nid, decl, "DFG")
            elif k == "VariableDeclaration":
                init = g.child(nid, "initializer")
                if init is not None:
                    g.add_edge(init, nid, "DFG")
            elif k in _EXPRESSIONS and nid not in spine_nodes:
                if k == "BinaryOperator" and n.prop("operatorCode") == "=":
                    continue
                if k == "ConditionalExpression":
                    srcs = [g.child(nid, "thenExpression"), g.child(nid, "elseExpression")]
                else:
                    srcs = [c for _, c in n.children]
                for c in srcs:
                    if c is not None:
                        g.add_edge(c, nid, "DFG")
            elif k == "CallExpression":
                args = g.ast_children(nid, "arguments")
                for a in args:
                    g.add_edge(a, nid, "DFG")
                if n.prop("indirect"):
                    continue
                callee = globals_.get(n.name)
                if callee is not None and g.nodes[callee].kind == "FunctionDeclaration" and g.has_body(callee):
                    params = g.ast_children(callee, "parameters")
                    for a, p in zip(args, params):
                        g.add_edge(a, p, "DFG")
                    g.add_edge(callee, nid, "DFG")
            elif k == "ReturnStatement":
                v = g.child(nid, "returnValue")
                if v is not None:
                    g.add_edge(v, nid, "DFG")
                if fid is not None:
                    g.add_edge(nid, fid, "DFG")
            elif k == "ThrowStatement":
                v = g.child(nid, "exception")
                if v is not None:
                    g.add_edge(v, nid, "DFG")
    return g
