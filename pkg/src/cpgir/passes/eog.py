"""Evaluation order graph (intra-procedural control flow)."""

from __future__ import annotations

from typing import Optional

from ..cpg.graph import CpgGraph
from ..ir.model import ParseReport

_NO_SUCCESSOR = ("ReturnStatement", "ThrowStatement")


class GotoWithoutLabel(LookupError):
    pass


class _FunctionEOG:
    def __init__(self, g: CpgGraph, fid: int):
        self.g = g
        self.fid = fid
        self.jumps: list[tuple[int, str]] = []

    def link(self, frontier: list[int], n: int) -> list[int]:
        for p in frontier:
            self.g.add_edge(p, n, "EOG")
        return [n]

    def post_order(self, n: int, frontier: list[int]) -> list[int]:
        for c in self.g.ast_children(n):
            frontier = self.visit(c, frontier)
        return self.link(frontier, n)

    def visit(self, n: int, frontier: list[int]) -> list[int]:
        g = self.g
        node = g.nodes[n]
        k = node.kind
        if k == "CompoundStatement":
            frontier = self.link(frontier, n)
            for c in g.ast_children(n):
                frontier = self.visit(c, frontier)
            return frontier
        if k == "LabelStatement":
            frontier = self.link(frontier, n)
            sub = g.child(n, "subStatement")
            return self.visit(sub, frontier) if sub is not None else frontier
        if k == "GotoStatement":
            self.link(frontier, n)
            self.jumps.append((n, node.name))
            return []
        if k in _NO_SUCCESSOR:
            self.post_order(n, frontier)
            return []
        if k == "IfStatement":
            cond = g.child(n, "condition")
            frontier = self.link(self.visit(cond, frontier) if cond is not None else frontier, n)
            out = self.visit(g.child(n, "thenStatement"), frontier)
            other = g.child(n, "elseStatement")
            out += self.visit(other, frontier) if other is not None else frontier
            return out
        if k == "SwitchStatement":
            sel = g.child(n, "selector")
            frontier = self.link(self.visit(sel, frontier) if sel is not None else frontier, n)
            out: list[int] = []
            cases = g.ast_children(n, "cases")
            for case in cases:
                out += self.visit(case, frontier)
            if not any(g.nodes[c].prop("default") for c in cases):
                out += frontier
            return out
        if k == "CaseStatement":
            frontier = self.link(frontier, n)
            ce = g.child(n, "caseExpression")
            if ce is not None:
                frontier = self.visit(ce, frontier)
            st = g.child(n, "statement")
            return self.visit(st, frontier) if st is not None else frontier
        if k == "TryStatement":
            frontier = self.link(frontier, n)
            block = g.child(n, "tryBlock")
            calls = [d for d in g.descendants(block) if g.nodes[d].kind == "CallExpression"]
            out = self.visit(block, frontier)
            for clause in g.ast_children(n, "catchClauses"):
                out += self.visit(clause, calls or frontier)
            return out
        if k == "CatchClause":
            frontier = self.link(frontier, n)
            param = g.child(n, "parameter")
            if param is not None:
                frontier = self.visit(param, frontier)
            return self.visit(g.child(n, "body"), frontier)
        if k == "CallExpression":
            frontier = self.post_order(n, frontier)
            for label in node.prop("targets", []) or []:
                self.jumps.append((n, label))
            if node.prop("terminates"):
                return []
            return frontier
        return self.post_order(n, frontier)

    def run(self, strict: bool, report: ParseReport) -> None:
        body = self.g.child(self.fid, "body")
        if body is None:
            return
        self.visit(body, [self.fid])
        labels: dict[str, int] = {}
        for nid in self.g.descendants(body):
            n = self.g.nodes[nid]
            if n.kind == "LabelStatement":
                labels.setdefault(n.name, nid)
        for src, label in self.jumps:
            dst = labels.get(label)
            if dst is None:
                if strict:
                    raise GotoWithoutLabel(f"goto {label}: no such label in @{self.g.nodes[self.fid].name}")
                report.add(0, 0, f"goto {label}: no such label in @{self.g.nodes[self.fid].name}", "error")
                continue
            self.g.add_edge(src, dst, "EOG")


def build_eog(graph: CpgGraph, strict: bool = True, report: Optional[ParseReport] = None) -> CpgGraph:
    """(Re)build all EOG edges. Edges never leave their function."""
    report = report if report is not None else ParseReport()
    graph.clear_edges("EOG")
    for fid in graph.functions():
        _FunctionEOG(graph, fid).run(strict, report)
    return graph


def label_predecessor_counts(graph: CpgGraph) -> dict[int, int]:
    return {
        nid: len(graph.eog_predecessors(nid))
        for nid, n in graph.nodes.items()
        if n.kind == "LabelStatement"
    }
