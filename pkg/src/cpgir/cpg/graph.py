"""Code property graph: typed nodes, ordered AST children and typed edges."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Any, Iterator, Optional

from ..ir.types import TypeRef, literal_record_name

NODE_KINDS = (
    "TranslationUnit", "FunctionDeclaration", "ParameterDeclaration", "VariableDeclaration",
    "RecordDeclaration", "FieldDeclaration", "CompoundStatement", "IfStatement",
    "SwitchStatement", "CaseStatement", "GotoStatement", "LabelStatement", "ReturnStatement",
    "TryStatement", "CatchClause", "ThrowStatement", "BinaryOperator", "UnaryOperator",
    "CastExpression", "CallExpression", "MemberExpression", "ArraySubscriptionExpression",
    "DeclaredReferenceExpression", "Literal", "ConditionalExpression", "ProblemNode",
)
EDGE_KINDS = ("AST", "EOG", "DFG", "REFERS_TO", "TYPE", "FIELD")
DECLARATION_KINDS = frozenset({
    "FunctionDeclaration", "ParameterDeclaration", "VariableDeclaration",
    "RecordDeclaration", "FieldDeclaration",
})
REQUIRED_PROPERTIES = {
    "BinaryOperator": ("operatorCode",),
    "UnaryOperator": ("operatorCode",),
    "Literal": ("value",),
}


class MissingRequiredProperty(ValueError):
    pass


class UnknownNode(KeyError):
    pass


class FrozenGraphError(RuntimeError):
    pass


@dataclass
class CpgNode:
    id: int
    kind: str
    name: Optional[str] = None
    code: str = ""
    type: Optional[TypeRef] = None
    properties: dict[str, Any] = field(default_factory=dict)
    children: list[tuple[str, int]] = field(default_factory=list, repr=False)
    parent: Optional[int] = field(default=None, repr=False)

    def prop(self, key: str, default=None):
        return self.properties.get(key, default)


@dataclass
class CpgEdge:
    src: int
    dst: int
    kind: str
    properties: dict[str, Any] = field(default_factory=dict)


@dataclass
class TranslationStats:
    node_count: int = 0
    function_count: int = 0
    problem_node_count: int = 0
    phase_times: dict[str, float] = field(default_factory=dict)

    @property
    def total_ms(self) -> float:
        return sum(self.phase_times.values())


class CpgGraph:
    """Mutable during construction; :meth:`finalize` compacts ids and freezes it."""

    def __init__(self) -> None:
        self.nodes: dict[int, CpgNode] = {}
        self.roots: list[int] = []
        self.phase_times: dict[str, float] = {}
        self._next_id = 0
        self._kind_counts: Counter = Counter()
        # kind -> src -> {dst: props}; insertion ordered
        self._succ: dict[str, dict[int, dict[int, dict]]] = {k: {} for k in EDGE_KINDS if k != "AST"}
        self._pred: dict[str, dict[int, dict[int, None]]] = {k: {} for k in EDGE_KINDS if k != "AST"}
        self._literal_records: dict[tuple, int] = {}
        self.records: dict[str, int] = {}
        self.last_remap: dict[int, int] = {}
        self.frozen = False

    # construction

    def _check_mutable(self) -> None:
        if self.frozen:
            raise FrozenGraphError("graph is finalized")

    def new_node(self, kind: str, name: Optional[str] = None, code: str = "",
                 type: Optional[TypeRef] = None, properties: Optional[dict] = None, **props) -> int:
        self._check_mutable()
        if kind not in NODE_KINDS:
            raise ValueError(f"unknown node kind {kind!r}")
        merged = dict(properties or {})
        merged.update(props)
        for key in REQUIRED_PROPERTIES.get(kind, ()):
            if key not in merged:
                raise MissingRequiredProperty(f"{kind} requires property {key!r}")
        nid = self._next_id
        self._next_id += 1
        self.nodes[nid] = CpgNode(nid, kind, name, code or "", type, merged)
        self._kind_counts[kind] += 1
        if kind == "TranslationUnit":
            self.roots.append(nid)
        return nid

    def node(self, nid: int) -> CpgNode:
        try:
            return self.nodes[nid]
        except KeyError:
            raise UnknownNode(nid) from None

    def __contains__(self, nid: int) -> bool:
        return nid in self.nodes

    def __len__(self) -> int:
        return len(self.nodes)

    # AST structure

    def add_child(self, parent: int, child: int, role: str) -> int:
        return self.insert_child(parent, len(self.node(parent).children), child, role)

    def insert_child(self, parent: int, index: int, child: int, role: str) -> int:
        self._check_mutable()
        p, c = self.node(parent), self.node(child)
        if c.parent is not None:
            raise ValueError(f"node {child} already has a parent")
        p.children.insert(index, (role, child))
        c.parent = parent
        return child

    def detach(self, child: int) -> tuple[int, int, str]:
        """Unlink ``child`` from its parent; returns (parent, index, role)."""
        self._check_mutable()
        c = self.node(child)
        if c.parent is None:
            raise ValueError(f"node {child} has no parent")
        p = self.node(c.parent)
        for i, (role, cid) in enumerate(p.children):
            if cid == child:
                del p.children[i]
                c.parent = None
                return p.id, i, role
        raise AssertionError("parent/child links out of sync")

    def replace_child(self, old: int, new: int) -> None:
        parent, index, role = self.detach(old)
        self.insert_child(parent, index, new, role)

    def remove_subtree(self, nid: int) -> int:
        """Delete ``nid`` and its descendants together with every touching edge."""
        self._check_mutable()
        n = self.node(nid)
        if n.parent is not None:
            self.detach(nid)
        doomed = list(self.descendants(nid))
        for d in doomed:
            self._drop_edges(d)
        for d in doomed:
            node = self.nodes.pop(d)
            self._kind_counts[node.kind] -= 1
            if d in self.roots:
                self.roots.remove(d)
        return len(doomed)

    def remove_node(self, nid: int) -> None:
        """Delete a single childless node."""
        if self.node(nid).children:
            raise ValueError("node still has children")
        self.remove_subtree(nid)

    def _drop_edges(self, nid: int) -> None:
        for kind in self._succ:
            for dst in list(self._succ[kind].get(nid, {})):
                self.remove_edge(nid, dst, kind)
            for src in list(self._pred[kind].get(nid, {})):
                self.remove_edge(src, nid, kind)

    def clone_subtree(self, nid: int) -> int:
        """Deep-copy the AST below ``nid`` (typed edges are not copied)."""
        src = self.node(nid)
        copy = self.new_node(src.kind, src.name, src.code, src.type, dict(src.properties))
        for role, c in src.children:
            self.add_child(copy, self.clone_subtree(c), role)
        return copy

    def ast_children(self, nid: int, role: Optional[str] = None) -> list[int]:
        n = self.node(nid)
        return [c for r, c in n.children if role is None or r == role]

    def child(self, nid: int, role: str) -> Optional[int]:
        for r, c in self.node(nid).children:
            if r == role:
                return c
        return None

    def role_of(self, nid: int) -> Optional[str]:
        n = self.node(nid)
        if n.parent is None:
            return None
        for r, c in self.node(n.parent).children:
            if c == nid:
                return r
        return None

    def parent(self, nid: int) -> Optional[int]:
        return self.node(nid).parent

    def descendants(self, nid: int) -> Iterator[int]:
        """Pre-order walk including ``nid`` itself."""
        stack = [nid]
        while stack:
            cur = stack.pop()
            yield cur
            stack.extend(c for _, c in reversed(self.nodes[cur].children))

    def ancestors(self, nid: int) -> Iterator[int]:
        cur = self.node(nid).parent
        while cur is not None:
            yield cur
            cur = self.nodes[cur].parent

    def enclosing(self, nid: int, kind: str) -> Optional[int]:
        for a in self.ancestors(nid):
            if self.nodes[a].kind == kind:
                return a
        return None

    def function_of(self, nid: int) -> Optional[int]:
        if self.node(nid).kind == "FunctionDeclaration":
            return nid
        return self.enclosing(nid, "FunctionDeclaration")

    # typed edges

    def add_edge(self, src: int, dst: int, kind: str, **props) -> None:
        self._check_mutable()
        if kind == "AST":
            raise ValueError("AST edges are derived from child lists; use add_child")
        if src not in self.nodes or dst not in self.nodes:
            raise UnknownNode(src if src not in self.nodes else dst)
        if kind == "REFERS_TO":
            if self.nodes[src].kind != "DeclaredReferenceExpression":
                raise ValueError("REFERS_TO must start at a DeclaredReferenceExpression")
            if self.nodes[dst].kind not in DECLARATION_KINDS:
                raise ValueError("REFERS_TO must end at a declaration")
        self._succ[kind].setdefault(src, {})[dst] = props
        self._pred[kind].setdefault(dst, {})[src] = None

    def remove_edge(self, src: int, dst: int, kind: str) -> None:
        self._check_mutable()
        out = self._succ[kind].get(src)
        if out is not None and dst in out:
            del out[dst]
            if not out:
                del self._succ[kind][src]
            inn = self._pred[kind][dst]
            del inn[src]
            if not inn:
                del self._pred[kind][dst]

    def has_edge(self, src: int, dst: int, kind: str) -> bool:
        return dst in self._succ[kind].get(src, {})

    def clear_edges(self, kind: str) -> None:
        self._check_mutable()
        self._succ[kind] = {}
        self._pred[kind] = {}

    def successors(self, nid: int, kind: str) -> list[int]:
        self.node(nid)
        return list(self._succ[kind].get(nid, {}))

    def predecessors(self, nid: int, kind: str) -> list[int]:
        self.node(nid)
        return list(self._pred[kind].get(nid, {}))

    def eog_successors(self, nid: int) -> list[int]:
        return self.successors(nid, "EOG")

    def eog_predecessors(self, nid: int) -> list[int]:
        return self.predecessors(nid, "EOG")

    def dfg_predecessors(self, nid: int) -> list[int]:
        return self.predecessors(nid, "DFG")

    def dfg_successors(self, nid: int) -> list[int]:
        return self.successors(nid, "DFG")

    def refers_to(self, nid: int) -> Optional[int]:
        out = self._succ["REFERS_TO"].get(nid)
        return next(iter(out)) if out else None

    def edges(self, kind: Optional[str] = None) -> list[CpgEdge]:
        out: list[CpgEdge] = []
        if kind in (None, "AST"):
            for n in self.nodes.values():
                for i, (role, c) in enumerate(n.children):
                    out.append(CpgEdge(n.id, c, "AST", {"role": role, "index": i}))
        for k in self._succ:
            if kind not in (None, k):
                continue
            for src, dsts in self._succ[k].items():
                for dst, props in dsts.items():
                    out.append(CpgEdge(src, dst, k, dict(props)))
        return out

    def edge_count(self, kind: Optional[str] = None) -> int:
        total = 0
        if kind in (None, "AST"):
            total += sum(len(n.children) for n in self.nodes.values())
        for k, table in self._succ.items():
            if kind in (None, k):
                total += sum(len(d) for d in table.values())
        return total

    # queries over nodes

    def nodes_of_kind(self, kind: str) -> list[int]:
        return [n.id for n in self.nodes.values() if n.kind == kind]

    def functions(self) -> list[int]:
        return self.nodes_of_kind("FunctionDeclaration")

    def function_by_name(self, name: str) -> Optional[int]:
        for n in self.nodes.values():
            if n.kind == "FunctionDeclaration" and n.name == name:
                return n.id
        return None

    def has_body(self, fid: int) -> bool:
        return self.child(fid, "body") is not None

    @property
    def stats(self) -> TranslationStats:
        return TranslationStats(
            node_count=len(self.nodes),
            function_count=self._kind_counts["FunctionDeclaration"],
            problem_node_count=self._kind_counts["ProblemNode"],
            phase_times=dict(self.phase_times),
        )

    # records

    def record_fields(self, record: int) -> list[int]:
        return self.ast_children(record, "fields")

    def add_record(self, name: str, field_types, tu: int, code: str = "", literal: bool = False) -> int:
        rid = self.new_node("RecordDeclaration", name, code or name, None, recordKind="struct", literal=literal)
        for i, ft in enumerate(field_types):
            fid = self.new_node("FieldDeclaration", f"field_{i}", f"field_{i}", ft, index=i)
            self.add_child(rid, fid, "fields")
        self.add_child(tu, rid, "declarations")
        self.records[name] = rid
        return rid

    def intern_literal_struct(self, field_types, tu: Optional[int] = None) -> int:
        """The one RecordDeclaration standing for a literal struct with these fields."""
        key = tuple(field_types)
        if not key:
            raise ValueError("literal struct needs at least one field")
        cached = self._literal_records.get(key)
        if cached is not None and cached in self.nodes:
            return cached
        if tu is None:
            if not self.roots:
                raise ValueError("no TranslationUnit to attach the record to")
            tu = self.roots[-1]
        rid = self.add_record(literal_record_name(key), key, tu, literal=True)
        self._literal_records[key] = rid
        return rid

    # finalization

    def finalize(self) -> "CpgGraph":
        """Compact ids to 0..n-1 in creation order and freeze the graph."""
        if self.frozen:
            return self
        order = sorted(self.nodes)
        remap = {old: new for new, old in enumerate(order)}
        nodes: dict[int, CpgNode] = {}
        for old in order:
            n = self.nodes[old]
            n.id = remap[old]
            n.parent = remap[n.parent] if n.parent is not None else None
            n.children = [(r, remap[c]) for r, c in n.children]
            nodes[n.id] = n
        self.nodes = nodes
        self.roots = [remap[r] for r in self.roots]
        for kind in list(self._succ):
            succ: dict[int, dict[int, dict]] = {}
            pred: dict[int, dict[int, None]] = {}
            for src in sorted(self._succ[kind]):
                for dst, props in self._succ[kind][src].items():
                    succ.setdefault(remap[src], {})[remap[dst]] = props
                    pred.setdefault(remap[dst], {})[remap[src]] = None
            self._succ[kind] = succ
            self._pred[kind] = pred
        self._literal_records = {k: remap[v] for k, v in self._literal_records.items() if v in remap}
        self.records = {k: remap[v] for k, v in self.records.items() if v in remap}
        self._next_id = len(nodes)
        self.last_remap = remap
        self.frozen = True
        return self

    def thaw(self) -> "CpgGraph":
        self.frozen = False
        return self
