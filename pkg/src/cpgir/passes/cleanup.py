"""Catch-block cleanup and stub removal."""

from __future__ import annotations

from typing import Optional

from ..cpg.graph import CpgGraph


def _function_refs(g: CpgGraph, fid: int, skip: Optional[int] = None) -> set[str]:
    skipped = set(g.descendants(skip)) if skip is not None else set()
    return {
        g.nodes[n].name
        for n in g.descendants(fid)
        if g.nodes[n].kind == "DeclaredReferenceExpression" and n not in skipped
    }


def cleanup_catch_blocks(graph: CpgGraph) -> CpgGraph:
    """Drop the helper declarations emitted for catchswitch/catchpad and let
    the catch clause's own exception variable flow into the rethrow."""
    g = graph
    for clause in g.nodes_of_kind("CatchClause"):
        switch_name = g.nodes[clause].prop("catchswitch")
        param = g.child(clause, "parameter")
        if switch_name is None or param is None:
            continue
        exc_name = g.nodes[param].name
        for nid in g.descendants(clause):
            n = g.nodes[nid]
            if n.kind == "DeclaredReferenceExpression" and n.name == switch_name and n.prop("scope") == "local":
                n.name = exc_name
    for fid in g.functions():
        changed = True
        while changed:
            changed = False
            for nid in list(g.descendants(fid)):
                if nid not in g.nodes:
                    continue
                n = g.nodes[nid]
                if n.kind != "VariableDeclaration" or not n.prop("intermediate"):
                    continue
                if n.name not in _function_refs(g, fid, skip=nid):
                    g.remove_subtree(nid)
                    changed = True
    return g


def _flat_statements(g: CpgGraph, nid: int) -> list[int]:
    out = []
    for c in g.ast_children(nid):
        k = g.nodes[c].kind
        if k == "LabelStatement":
            sub = g.child(c, "subStatement")
            if sub is not None:
                out += _flat_statements(g, sub)
        elif k == "CompoundStatement" and not g.nodes[c].prop("atomic"):
            out += _flat_statements(g, c)
        else:
            out.append(c)
    return out


def _stub_call(g: CpgGraph, fid: int) -> Optional[int]:
    """The single forwarded call if ``fid`` is a stub, else None."""
    body = g.child(fid, "body")
    if body is None:
        return None
    stmts = _flat_statements(g, body)
    call = None
    if len(stmts) == 2 and g.nodes[stmts[1]].kind == "ReturnStatement":
        first, ret = stmts
        rv = g.child(ret, "returnValue")
        k = g.nodes[first].kind
        if k == "CallExpression" and rv is None:
            call = first
        elif k == "VariableDeclaration":
            init = g.child(first, "initializer")
            if init is not None and g.nodes[init].kind == "CallExpression" and rv is not None \
                    and g.nodes[rv].kind == "DeclaredReferenceExpression" and g.nodes[rv].name == g.nodes[first].name:
                call = init
    elif len(stmts) == 1 and g.nodes[stmts[0]].kind == "ReturnStatement":
        rv = g.child(stmts[0], "returnValue")
        if rv is not None and g.nodes[rv].kind == "CallExpression":
            call = rv
    if call is None or g.nodes[call].prop("indirect"):
        return None
    params = {g.nodes[p].name for p in g.ast_children(fid, "parameters")}
    for a in g.ast_children(call, "arguments"):
        n = g.nodes[a]
        if n.kind == "Literal":
            continue
        if n.kind == "DeclaredReferenceExpression" and n.prop("scope") == "local" and n.name in params:
            continue
        return None
    return call


def _rewire(g: CpgGraph, site: int, stub_fid: int, stub_call: int) -> None:
    params = [g.nodes[p].name for p in g.ast_children(stub_fid, "parameters")]
    site_args = g.ast_children(site, "arguments")
    used: set[int] = set()
    new_args = []
    for a in g.ast_children(stub_call, "arguments"):
        n = g.nodes[a]
        if n.kind == "DeclaredReferenceExpression" and n.name in params:
            i = params.index(n.name)
            if i >= len(site_args):
                new_args.append(g.clone_subtree(a))
            elif site_args[i] in used:
                new_args.append(g.clone_subtree(site_args[i]))
            else:
                used.add(site_args[i])
                new_args.append(site_args[i])
        else:
            new_args.append(g.clone_subtree(a))
    for a in site_args:
        g.detach(a)
    for a in site_args:
        if a not in used:
            g.remove_subtree(a)
    for a in new_args:
        g.add_child(site, a, "arguments")
    node = g.nodes[site]
    node.properties["rewiredFrom"] = node.name
    node.name = g.nodes[stub_call].name


def remove_stubs(graph: CpgGraph, enabled: bool = True) -> CpgGraph:
    """Remove functions whose body only forwards to an undefined (library)
    function and let their callers call the library function directly.

    A stub nobody calls is kept: it may be an entry point such as main.
    """
    if not enabled:
        return graph
    g = graph
    changed = True
    while changed:
        changed = False
        defined = {g.nodes[f].name: f for f in g.functions() if g.has_body(f)}
        value_refs = {
            n.name for n in g.nodes.values()
            if n.kind == "DeclaredReferenceExpression" and n.prop("scope") == "global"
        }
        for name, fid in defined.items():
            if fid not in g.nodes or name in value_refs:
                continue
            call = _stub_call(g, fid)
            if call is None:
                continue
            target = g.nodes[call].name
            if target in defined or target == name:
                continue
            sites = [
                n.id for n in g.nodes.values()
                if n.kind == "CallExpression" and n.name == name and not n.prop("indirect")
                and g.function_of(n.id) != fid
            ]
            if not sites:
                continue
            for site in sites:
                _rewire(g, site, fid, call)
            g.remove_subtree(fid)
            changed = True
            break
    return g
