"""Graph serialization: JSON (with re-import), GraphML and Neo4j bulk CSV."""

from __future__ import annotations

import csv
import json
import math
import os
import xml.etree.ElementTree as ET
from collections import Counter
from typing import Any, Optional

from .cpg.graph import CpgGraph, CpgNode
from .ir.types import TypeRef, display_type

NODE_CSV_HEADER = ["id:ID", "kind:LABEL", "name", "code", "type"]
EDGE_CSV_HEADER = [":START_ID", ":END_ID", "kind:TYPE"]


def _jsonable(v: Any) -> Any:
    if isinstance(v, float):
        if math.isnan(v):
            return "NaN"
        if math.isinf(v):
            return "Infinity" if v > 0 else "-Infinity"
        return v
    if v is None or isinstance(v, (bool, int, str)):
        return v
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple, set, frozenset)):
        items = [_jsonable(x) for x in v]
        return sorted(items, key=repr) if isinstance(v, (set, frozenset)) else items
    if isinstance(v, bytes):
        return v.decode("latin-1")
    return str(v)


def _type_name(t: Optional[TypeRef]) -> Optional[str]:
    return t.cpg_name() if t is not None else None


def _edge_sort_key(e):
    return (e.src, e.dst, e.kind, json.dumps(_jsonable(e.properties), sort_keys=True))


def graph_document(graph: CpgGraph) -> dict:
    nodes = []
    for nid in sorted(graph.nodes):
        n = graph.node(nid)
        nodes.append({
            "id": n.id, "kind": n.kind, "name": n.name, "code": n.code,
            "type": _type_name(n.type), "properties": _jsonable(n.properties),
        })
    edges = [
        {"from": e.src, "to": e.dst, "kind": e.kind, "properties": _jsonable(e.properties)}
        for e in sorted(graph.edges(), key=_edge_sort_key)
    ]
    st = graph.stats
    stats = {"node_count": st.node_count, "function_count": st.function_count,
             "problem_node_count": st.problem_node_count, "edge_count": len(edges)}
    return {"nodes": nodes, "edges": edges, "stats": stats}


def export_json(graph: CpgGraph) -> bytes:
    """Id-sorted, key-sorted JSON; identical graphs give identical bytes."""
    doc = graph_document(graph)
    return (json.dumps(doc, sort_keys=True, indent=1, ensure_ascii=False) + "\n").encode("utf-8")


def import_json(data) -> CpgGraph:
    """Rebuild a frozen graph from :func:`export_json` output (types keep only their names)."""
    doc = json.loads(data) if isinstance(data, (bytes, str)) else data
    g = CpgGraph()
    for rec in doc["nodes"]:
        t = display_type(rec["type"]) if rec.get("type") is not None else None
        n = CpgNode(rec["id"], rec["kind"], rec.get("name"), rec.get("code") or "", t, dict(rec.get("properties") or {}))
        g.nodes[n.id] = n
        g._kind_counts[n.kind] += 1
        if n.kind == "TranslationUnit":
            g.roots.append(n.id)
        if n.kind == "RecordDeclaration" and n.name is not None:
            g.records[n.name] = n.id
    ast = sorted((e for e in doc["edges"] if e["kind"] == "AST"), key=lambda e: (e["from"], e["properties"]["index"]))
    for e in ast:
        g.nodes[e["from"]].children.append((e["properties"]["role"], e["to"]))
        g.nodes[e["to"]].parent = e["from"]
    for e in doc["edges"]:
        if e["kind"] != "AST":
            g._succ[e["kind"]].setdefault(e["from"], {})[e["to"]] = dict(e.get("properties") or {})
            g._pred[e["kind"]].setdefault(e["to"], {})[e["from"]] = None
    g._next_id = max(g.nodes, default=-1) + 1
    g.frozen = True
    return g


def _flat(value) -> str:
    v = _jsonable(value)
    return v if isinstance(v, str) else json.dumps(v, sort_keys=True)


def export_graphml(graph: CpgGraph) -> bytes:
    """GraphML with the node kind as vertex label and properties flattened to data keys."""
    root = ET.Element("graphml", xmlns="http://graphml.graphdrawing.org/xmlns")
    node_props = sorted({k for n in graph.nodes.values() for k in n.properties})
    edges = sorted(graph.edges(), key=_edge_sort_key)
    edge_props = sorted({k for e in edges for k in e.properties})
    for key in ["labelV", "name", "code", "type"] + [f"p.{k}" for k in node_props]:
        ET.SubElement(root, "key", {"id": f"n.{key}", "for": "node", "attr.name": key, "attr.type": "string"})
    for key in ["labelE"] + [f"p.{k}" for k in edge_props]:
        ET.SubElement(root, "key", {"id": f"e.{key}", "for": "edge", "attr.name": key, "attr.type": "string"})
    gel = ET.SubElement(root, "graph", id="cpg", edgedefault="directed")
    for nid in sorted(graph.nodes):
        n = graph.node(nid)
        el = ET.SubElement(gel, "node", id=f"n{nid}")
        fields = [("labelV", n.kind), ("name", n.name), ("code", n.code), ("type", _type_name(n.type))]
        fields += [(f"p.{k}", n.properties[k]) for k in sorted(n.properties)]
        for key, value in fields:
            if value is None:
                continue
            d = ET.SubElement(el, "data", key=f"n.{key}")
            d.text = _flat(value)
    for i, e in enumerate(edges):
        el = ET.SubElement(gel, "edge", id=f"e{i}", source=f"n{e.src}", target=f"n{e.dst}")
        d = ET.SubElement(el, "data", key="e.labelE")
        d.text = e.kind
        for k in sorted(e.properties):
            d = ET.SubElement(el, "data", key=f"e.p.{k}")
            d.text = _flat(e.properties[k])
    ET.indent(root)
    return ET.tostring(root, encoding="utf-8", xml_declaration=True) + b"\n"


def export_neo4j_csv(graph: CpgGraph, directory) -> tuple[str, str]:
    """Write nodes.csv and edges.csv for ``neo4j-admin import``; returns both paths."""
    os.makedirs(directory, exist_ok=True)
    nodes_path = os.path.join(directory, "nodes.csv")
    edges_path = os.path.join(directory, "edges.csv")
    with open(nodes_path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(NODE_CSV_HEADER)
        for nid in sorted(graph.nodes):
            n = graph.node(nid)
            w.writerow([n.id, n.kind, n.name or "", n.code, _type_name(n.type) or ""])
    with open(edges_path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(EDGE_CSV_HEADER)
        for e in sorted(graph.edges(), key=_edge_sort_key):
            w.writerow([e.src, e.dst, e.kind])
    return nodes_path, edges_path


def kind_histogram(graph: CpgGraph) -> dict[str, int]:
    return dict(sorted(Counter(n.kind for n in graph.nodes.values()).items()))
