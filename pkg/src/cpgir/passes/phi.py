"""Out-of-SSA lowering of collected φ-instructions."""

from __future__ import annotations

from collections import OrderedDict
from typing import Optional

from ..cpg.graph import CpgGraph
from ..ir.model import IrModule, ParseReport
from ..mapper import OperandBuilder, PhiRecord


class UnknownPredecessor(LookupError):
    def __init__(self, label: str, target: str = ""):
        super().__init__(f"φ %{target}: predecessor %{label} not found")
        self.label = label


def _labels(g: CpgGraph, fid: int) -> dict[str, int]:
    body = g.child(fid, "body")
    out: dict[str, int] = {}
    for nid in g.descendants(body):
        n = g.nodes[nid]
        if n.kind == "LabelStatement" and n.name not in out:
            out[n.name] = nid
    return out


def _gotos_to(g: CpgGraph, label_stmt: int, target: str) -> list[int]:
    found = []
    for nid in g.descendants(label_stmt):
        n = g.nodes[nid]
        if n.kind == "GotoStatement" and n.name == target:
            found.append(nid)
    return found


def eliminate_phis(graph: CpgGraph, phi_records: list[PhiRecord], module: Optional[IrModule] = None,
                   strict: bool = True, report: Optional[ParseReport] = None) -> CpgGraph:
    """Replace φ semantics by a hoisted declaration plus one assignment per incoming edge.

    Assignments are placed on the edge itself: right before the goto that
    leads from the predecessor into the φ's block. For an unconditional
    branch that is immediately before the block's terminator; for a branch
    arm the goto is wrapped together with its assignments in a block.
    """
    if report is None:
        report = module.report if module is not None else ParseReport()
    builder = OperandBuilder(graph, module, report)
    groups: "OrderedDict[int, list[PhiRecord]]" = OrderedDict()
    for rec in phi_records:
        groups.setdefault(rec.owning_function, []).append(rec)

    for fid, recs in groups.items():
        body = graph.child(fid, "body")
        labels = _labels(graph, fid)
        builder.allocas = {
            graph.nodes[n].name: graph.nodes[n].type
            for n in graph.descendants(body)
            if graph.nodes[n].kind == "VariableDeclaration" and graph.nodes[n].prop("alloca")
        }
        for i, rec in enumerate(recs):
            builder.code, builder.location = rec.code, rec.location
            decl = builder.node("VariableDeclaration", rec.target_name, rec.target_type, phi=True)
            graph.insert_child(body, i, decl, "statements")

        edges: "OrderedDict[tuple[str, str], list[tuple[PhiRecord, object]]]" = OrderedDict()
        for rec in recs:
            for value, pred in rec.incoming:
                if pred not in labels:
                    if strict:
                        raise UnknownPredecessor(pred, rec.target_name)
                    report.add(*rec.location, f"φ %{rec.target_name}: unknown predecessor %{pred}, edge skipped", "error")
                    continue
                edges.setdefault((pred, rec.block_label), []).append((rec, value))

        for (pred, succ), items in edges.items():
            assigned: set[str] = set()
            for rec, value in items:
                if value.kind == "local-ref" and value.value in assigned:
                    report.add(
                        *rec.location,
                        f"parallel-copy hazard: φ %{rec.target_name} reads %{value.value}, "
                        f"already reassigned on edge %{pred} -> %{succ}",
                        "warning",
                    )
                assigned.add(rec.target_name)
            gotos = _gotos_to(graph, labels[pred], succ)
            if not gotos:
                if strict:
                    raise UnknownPredecessor(pred, items[0][0].target_name)
                report.add(*items[0][0].location, f"%{pred} never branches to %{succ}; φ edge skipped", "error")
                continue
            for goto in gotos:
                stmts = []
                for rec, value in items:
                    builder.code, builder.location = rec.code, rec.location
                    lhs = builder.ref(rec.target_name, rec.target_type, access="write")
                    stmts.append(builder.assign_node(lhs, builder.operand(value), rec.target_type))
                parent = graph.parent(goto)
                if graph.nodes[parent].kind == "CompoundStatement":
                    idx = graph.ast_children(parent).index(goto)
                    for j, s in enumerate(stmts):
                        graph.insert_child(parent, idx + j, s, "statements")
                else:
                    builder.code = items[0][0].code
                    block = builder.node("CompoundStatement", None, None, phiEdge=True)
                    graph.replace_child(goto, block)
                    for s in stmts:
                        graph.add_child(block, s, "statements")
                    graph.add_child(block, goto, "statements")
    return graph


def phi_artifacts(graph: CpgGraph) -> list[int]:
    """Local references with no declaration in their function.

    Before elimination these are exactly the uses of φ targets; afterwards
    the list must be empty for well-formed input.
    """
    out = []
    for fid in graph.functions():
        declared = set()
        refs = []
        for nid in graph.descendants(fid):
            n = graph.nodes[nid]
            if n.kind in ("ParameterDeclaration", "VariableDeclaration"):
                declared.add(n.name)
            elif n.kind == "DeclaredReferenceExpression" and n.prop("scope") == "local":
                refs.append(n)
        out += [n.id for n in refs if n.name not in declared]
    return out
