"""Inline basic blocks that are reached by exactly one goto."""

from __future__ import annotations

from typing import Optional

from ..cpg.graph import CpgGraph
from ..ir.model import ParseReport
from .eog import build_eog


def _candidates(g: CpgGraph) -> list[tuple[int, int]]:
    found = []
    for nid, n in g.nodes.items():
        if n.kind != "LabelStatement":
            continue
        preds = g.eog_predecessors(nid)
        if len(preds) != 1 or g.nodes[preds[0]].kind != "GotoStatement":
            continue
        goto = preds[0]
        if nid in g.ancestors(goto):
            continue
        found.append((goto, nid))
    return found


def _splice(g: CpgGraph, goto: int, label: int) -> None:
    block = g.child(label, "subStatement")
    parent = g.parent(goto)
    if block is None:
        g.remove_subtree(goto)
        g.remove_subtree(label)
        return
    if g.nodes[parent].kind == "CompoundStatement":
        _, idx, _ = g.detach(goto)
        for j, s in enumerate(g.ast_children(block)):
            g.detach(s)
            g.insert_child(parent, idx + j, s, "statements")
        g.remove_subtree(goto)
    else:
        g.detach(block)
        g.replace_child(goto, block)
        g.remove_subtree(goto)
    g.remove_subtree(label)


def inline_single_pred_blocks(graph: CpgGraph, max_rounds: Optional[int] = None,
                              report: Optional[ParseReport] = None) -> CpgGraph:
    """Replace each goto whose target label has exactly one EOG predecessor
    by the target block. Labels with several predecessors stay untouched.
    Runs to a fixpoint, bounded by the node count."""
    limit = max_rounds if max_rounds is not None else max(1, len(graph.nodes))
    for _ in range(limit):
        build_eog(graph, strict=False, report=report)
        todo = _candidates(graph)
        if not todo:
            break
        for goto, label in todo:
            if goto in graph.nodes and label in graph.nodes:
                _splice(graph, goto, label)
    build_eog(graph, strict=False, report=report)
    return graph
