"""Render graph subtrees as C-like pseudo source (debugging and golden tests)."""

from __future__ import annotations

from .graph import CpgGraph


def _lit(value) -> str:
    if isinstance(value, str):
        return '"' + value.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if value is None:
        return "undef"
    return repr(value)


def expr(g: CpgGraph, nid: int) -> str:
    n = g.node(nid)
    k = n.kind
    if k == "DeclaredReferenceExpression":
        return n.name or "?"
    if k == "Literal":
        return _lit(n.prop("value"))
    if k == "BinaryOperator":
        lhs, rhs = g.child(nid, "lhs"), g.child(nid, "rhs")
        return f"({expr(g, lhs)} {n.prop('operatorCode')} {expr(g, rhs)})"
    if k == "UnaryOperator":
        return f"{n.prop('operatorCode')}{expr(g, g.child(nid, 'input'))}"
    if k == "CastExpression":
        sign = n.prop("signedness")
        t = n.type.cpg_name() if n.type is not None else "?"
        return f"(({sign + ' ' if sign else ''}{t}){expr(g, g.child(nid, 'expression'))})"
    if k == "CallExpression":
        args = ", ".join(expr(g, a) for a in g.ast_children(nid, "arguments"))
        return f"{n.name}({args})"
    if k == "MemberExpression":
        return f"{expr(g, g.child(nid, 'base'))}.{n.name}"
    if k == "ArraySubscriptionExpression":
        return f"{expr(g, g.child(nid, 'arrayExpression'))}[{expr(g, g.child(nid, 'subscriptExpression'))}]"
    if k == "ConditionalExpression":
        c, a, b = (g.child(nid, r) for r in ("condition", "thenExpression", "elseExpression"))
        return f"({expr(g, c)} ? {expr(g, a)} : {expr(g, b)})"
    if k == "ProblemNode":
        return f"<problem: {n.prop('problem', '')}>"
    return f"<{k}>"


def stmt(g: CpgGraph, nid: int, indent: int = 0) -> list[str]:
    n = g.node(nid)
    k = n.kind
    pad = "  " * indent
    if k == "CompoundStatement":
        head = "atomic {" if n.prop("atomic") else "{"
        lines = [pad + head]
        for c in g.ast_children(nid):
            lines += stmt(g, c, indent + 1)
        return lines + [pad + "}"]
    if k == "LabelStatement":
        return [pad + f"{n.name}:"] + stmt(g, g.child(nid, "subStatement"), indent)
    if k == "VariableDeclaration":
        init = g.child(nid, "initializer")
        t = n.type.cpg_name() if n.type is not None else "?"
        tail = f" = {expr(g, init)}" if init is not None else ""
        return [pad + f"{t} {n.name}{tail};"]
    if k == "GotoStatement":
        return [pad + f"goto {n.name};"]
    if k == "ReturnStatement":
        v = g.child(nid, "returnValue")
        return [pad + (f"return {expr(g, v)};" if v is not None else "return;")]
    if k == "ThrowStatement":
        v = g.child(nid, "exception")
        return [pad + (f"throw {expr(g, v)};" if v is not None else "throw;")]
    if k == "IfStatement":
        lines = [pad + f"if {expr(g, g.child(nid, 'condition'))}"]
        lines += stmt(g, g.child(nid, "thenStatement"), indent + 1)
        other = g.child(nid, "elseStatement")
        if other is not None:
            lines += [pad + "else"] + stmt(g, other, indent + 1)
        return lines
    if k == "SwitchStatement":
        lines = [pad + f"switch {expr(g, g.child(nid, 'selector'))}"]
        for c in g.ast_children(nid, "cases"):
            lines += stmt(g, c, indent + 1)
        return lines
    if k == "CaseStatement":
        ce = g.child(nid, "caseExpression")
        head = "default:" if ce is None else f"case {expr(g, ce)}:"
        return [pad + head] + stmt(g, g.child(nid, "statement"), indent + 1)
    if k == "TryStatement":
        lines = [pad + "try"] + stmt(g, g.child(nid, "tryBlock"), indent + 1)
        for c in g.ast_children(nid, "catchClauses"):
            lines += stmt(g, c, indent)
        return lines
    if k == "CatchClause":
        p = g.child(nid, "parameter")
        head = f"catch ({g.node(p).name})" if p is not None else "catch (...)"
        return [pad + head] + stmt(g, g.child(nid, "body"), indent + 1)
    return [pad + expr(g, nid) + ";"]


def function_source(g: CpgGraph, fid: int) -> str:
    n = g.node(fid)
    params = ", ".join(
        f"{g.node(p).type.cpg_name() if g.node(p).type else '?'} {g.node(p).name}"
        for p in g.ast_children(fid, "parameters")
    )
    ret = n.type.cpg_name() if n.type is not None else "?"
    lines = [f"{ret} {n.name}({params})"]
    body = g.child(fid, "body")
    if body is not None:
        lines += stmt(g, body)
    return "\n".join(lines)
