"""Queries over a finished graph: call lookup, constant evaluation, detectors."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

from ..cpg.graph import CpgGraph
from ..ir.types import TypeRef

MAX_VALUES = 16

KNOWN_INT = "known-int"
KNOWN_FLOAT = "known-float"
KNOWN_STRING = "known-string"
SET_OF_VALUES = "set-of-values"
UNKNOWN = "unknown"


def _sort_key(v):
    return (type(v).__name__, repr(v))


@dataclass(frozen=True)
class EvalResult:
    kind: str
    values: tuple = ()

    @classmethod
    def unknown(cls) -> "EvalResult":
        return cls(UNKNOWN)

    @classmethod
    def of(cls, values) -> "EvalResult":
        if values is None:
            return cls(UNKNOWN)
        distinct = []
        for v in sorted(values, key=_sort_key):
            if not any(_same(v, d) for d in distinct):
                distinct.append(v)
        if not distinct or len(distinct) > MAX_VALUES:
            return cls(UNKNOWN)
        if len(distinct) >= 2:
            return cls(SET_OF_VALUES, tuple(distinct))
        v = distinct[0]
        if isinstance(v, str):
            return cls(KNOWN_STRING, (v,))
        if isinstance(v, float):
            return cls(KNOWN_FLOAT, (v,))
        return cls(KNOWN_INT, (v,))

    @property
    def is_known(self) -> bool:
        return self.kind != UNKNOWN

    @property
    def value(self):
        """The single value of a known-* result."""
        if self.kind in (KNOWN_INT, KNOWN_FLOAT, KNOWN_STRING):
            return self.values[0]
        raise ValueError(f"{self.kind} result has no single value")


def _same(a, b) -> bool:
    if type(a) is not type(b):
        return False
    if isinstance(a, float) and math.isnan(a) and math.isnan(b):
        return True
    return a == b


@dataclass
class Finding:
    rule_id: str
    node: int
    message: str
    evidence: list[int] = field(default_factory=list)
    severity: str = "error"

    def to_dict(self) -> dict:
        return {"rule_id": self.rule_id, "node": self.node, "message": self.message,
                "evidence": list(self.evidence), "severity": self.severity}


def find_calls(graph: CpgGraph, callee_name: str) -> list[int]:
    name = callee_name[1:] if callee_name.startswith("@") else callee_name
    return [n for n in graph.nodes_of_kind("CallExpression") if graph.node(n).name == name]


# integer helpers

def int_width(ty: Optional[TypeRef]) -> Optional[int]:
    return ty.width if ty is not None and ty.kind == "integer" else None


def to_signed(v: int, width: int) -> int:
    v &= (1 << width) - 1
    return v - (1 << width) if width and v >> (width - 1) else v


def norm(v: int, width: int) -> int:
    """Canonical folded form: signed, except i1 which stays 0/1."""
    return to_unsigned(v, 1) if width == 1 else to_signed(v, width)


def to_unsigned(v: int, width: int) -> int:
    return v & ((1 << width) - 1)


def trunc_div(a: int, b: int) -> int:
    q = abs(a) // abs(b)
    return q if (a >= 0) == (b >= 0) else -q


def trunc_rem(a: int, b: int) -> int:
    return a - b * trunc_div(a, b)


_COMPARE = {
    "==": lambda a, b: a == b, "!=": lambda a, b: a != b, "<": lambda a, b: a < b,
    ">": lambda a, b: a > b, "<=": lambda a, b: a <= b, ">=": lambda a, b: a >= b,
}


def fold_binary(op: str, a, b, width: Optional[int]):
    """Fold one operator application. Returns None when undefined."""
    if op in _COMPARE:
        return int(_COMPARE[op](a, b))
    if op == "&&":
        return int(bool(a) and bool(b))
    if op == "||":
        return int(bool(a) or bool(b))
    if isinstance(a, float) or isinstance(b, float):
        a, b = float(a), float(b)
        if op == "+":
            return a + b
        if op == "-":
            return a - b
        if op == "*":
            return a * b
        if op == "/":
            if b == 0.0:
                if a == 0.0 or math.isnan(a):
                    return math.nan
                return math.copysign(math.inf, a) * math.copysign(1.0, b)
            return a / b
        if op == "%":
            return math.fmod(a, b) if b != 0.0 else math.nan
        return None
    if not isinstance(a, int) or not isinstance(b, int):
        return None
    if op == "+":
        r = a + b
    elif op == "-":
        r = a - b
    elif op == "*":
        r = a * b
    elif op == "/":
        if b == 0:
            return None
        r = trunc_div(a, b)
    elif op == "%":
        if b == 0:
            return None
        r = trunc_rem(a, b)
    elif op == "&":
        r = a & b
    elif op == "|":
        r = a | b
    elif op == "^":
        r = a ^ b
    elif op == "<<":
        if width is not None and not 0 <= b < width:
            return None
        r = a << b
    elif op == ">>":
        if b < 0 or (width is not None and b >= width):
            return None
        r = a >> b
    else:
        return None
    return norm(r, width) if width else r


class CycleDetected(Exception):
    pass


class _Evaluator:
    """Backward DFG walk with per-query memoization (each node is computed once)."""

    def __init__(self, graph: CpgGraph):
        self.g = graph
        self.memo: dict[int, Optional[frozenset]] = {}
        self.used: dict[int, list[int]] = {}
        self.active: set[int] = set()

    def values(self, nid: int) -> Optional[frozenset]:
        if nid in self.memo:
            return self.memo[nid]
        if nid in self.active:
            return None  # cycle: the value depends on itself
        self.active.add(nid)
        self.used[nid] = []
        try:
            vals = self._compute(nid)
        finally:
            self.active.discard(nid)
        if vals is not None and (not vals or len(vals) > MAX_VALUES):
            vals = None
        self.memo[nid] = vals
        return vals

    def _use(self, nid: int, src: int) -> Optional[frozenset]:
        vals = self.values(src)
        if vals is not None:
            self.used[nid].append(src)
        return vals

    def _union(self, nid: int, sources) -> Optional[frozenset]:
        out: set = set()
        sources = list(sources)
        if not sources:
            return None
        for s in sources:
            vals = self._use(nid, s)
            if vals is None:
                return None
            out |= vals
            if len(out) > MAX_VALUES:
                return None
        return frozenset(out)

    def _compute(self, nid: int) -> Optional[frozenset]:
        g = self.g
        n = g.node(nid)
        k = n.kind
        if k == "Literal":
            if n.prop("metadata") or n.prop("asm") or n.prop("value") is None:
                return None
            v = n.prop("value")
            w = int_width(n.type)
            if isinstance(v, bool):
                v = int(v)
            if isinstance(v, int) and w:
                v = norm(v, w)
            return frozenset([v])
        if k == "DeclaredReferenceExpression":
            access = n.prop("access", "read")
            if access == "readwrite":
                return None
            preds = g.dfg_predecessors(nid)
            if access == "write":
                return self._union(nid, [p for p in preds if g.node(p).kind not in ("VariableDeclaration", "ParameterDeclaration")])
            decl = g.refers_to(nid)
            if decl is None or g.node(decl).kind not in ("VariableDeclaration", "ParameterDeclaration"):
                return None
            return self._union(nid, [decl])
        if k in ("VariableDeclaration", "ParameterDeclaration"):
            return self._union(nid, g.dfg_predecessors(nid))
        if k == "FunctionDeclaration":
            returns = [p for p in g.dfg_predecessors(nid) if g.node(p).kind == "ReturnStatement"]
            return self._union(nid, returns)
        if k == "ReturnStatement":
            rv = g.child(nid, "returnValue")
            return self._union(nid, [rv]) if rv is not None else None
        if k == "BinaryOperator":
            op = n.prop("operatorCode")
            if op == "=":
                return self._union(nid, [g.child(nid, "rhs")])
            lhs = self._use(nid, g.child(nid, "lhs"))
            rhs = self._use(nid, g.child(nid, "rhs"))
            if lhs is None or rhs is None or len(lhs) * len(rhs) > MAX_VALUES * MAX_VALUES:
                return None
            w = int_width(n.type)
            out = set()
            for a in lhs:
                for b in rhs:
                    r = fold_binary(op, a, b, w)
                    if r is None:
                        return None
                    out.add(r)
            return frozenset(out)
        if k == "UnaryOperator":
            op = n.prop("operatorCode")
            child = g.child(nid, "input")
            if op == "&":
                vals = self._use(nid, child)
                # an address only has a value when it decays to a constant string
                if vals is not None and all(isinstance(v, str) for v in vals):
                    return vals
                return None
            if op == "*":
                inner = g.node(child)
                if inner.kind == "UnaryOperator" and inner.prop("operatorCode") == "&":
                    return self._union(nid, [g.child(child, "input")])
                return None
            vals = self._use(nid, child)
            if vals is None:
                return None
            w = int_width(n.type)
            out = set()
            for v in vals:
                if op == "-":
                    r = -v if isinstance(v, float) else fold_binary("-", 0, v, w)
                elif op == "!":
                    r = int(not v)
                elif op == "~" and isinstance(v, int):
                    r = norm(~v, w) if w else ~v
                else:
                    return None
                if r is None:
                    return None
                out.add(r)
            return frozenset(out)
        if k == "ArraySubscriptionExpression":
            base = self._use(nid, g.child(nid, "arrayExpression"))
            idx = self._use(nid, g.child(nid, "subscriptExpression"))
            if base is not None and idx == frozenset([0]) and all(isinstance(v, str) for v in base):
                return base
            return None
        if k == "CastExpression":
            vals = self._use(nid, g.child(nid, "expression"))
            if vals is None:
                return None
            out = set()
            for v in vals:
                r = cast_value(n.prop("castKind"), n.prop("signedness"), v,
                               g.node(g.child(nid, "expression")).type, n.type)
                if r is None:
                    return None
                out.add(r)
            return frozenset(out)
        if k == "ConditionalExpression":
            cond = self._use(nid, g.child(nid, "condition"))
            then, other = g.child(nid, "thenExpression"), g.child(nid, "elseExpression")
            if cond is not None and len(cond) == 1:
                return self._union(nid, [then if next(iter(cond)) else other])
            return self._union(nid, [then, other])
        if k == "CallExpression":
            callees = [p for p in g.dfg_predecessors(nid)
                       if g.node(p).kind == "FunctionDeclaration" and g.has_body(p)]
            if len(callees) == 1:
                return self._union(nid, callees)
            return None
        return None

    def evidence(self, nid: int) -> list[int]:
        out, seen, stack = [], set(), [nid]
        while stack:
            cur = stack.pop()
            if cur in seen:
                continue
            seen.add(cur)
            out.append(cur)
            stack.extend(reversed(self.used.get(cur, [])))
        return out


def cast_value(kind: Optional[str], signedness: Optional[str], v, src: Optional[TypeRef], dst: Optional[TypeRef]):
    """Apply a cast to a folded value (integers are kept in signed form)."""
    sw, dw = int_width(src), int_width(dst)
    if isinstance(v, str):
        return v if kind in ("bitcast", "addrspacecast", None) else None
    if kind == "interpret":
        if not isinstance(v, int) or not sw:
            return v
        return to_unsigned(v, sw) if signedness == "unsigned" else to_signed(v, sw)
    if kind == "zext":
        return norm(to_unsigned(v, sw), dw) if sw and dw else None
    if kind == "sext":
        return norm(to_signed(v, sw), dw) if isinstance(v, int) and sw and dw else None
    if kind == "trunc":
        return norm(v, dw) if isinstance(v, int) and dw else None
    if kind in ("fptosi", "fptoui"):
        if not isinstance(v, float) or math.isnan(v) or math.isinf(v) or not dw:
            return None
        return norm(int(v), dw)
    if kind == "sitofp":
        return float(v) if isinstance(v, int) else None
    if kind == "uitofp":
        return float(to_unsigned(v, sw)) if isinstance(v, int) and sw else None
    if kind in ("fpext", "fptrunc"):
        return float(v) if isinstance(v, float) else None
    if kind == "bitcast" and src is not None and dst is not None and str(src) == str(dst):
        return v
    return None


def evaluate(graph: CpgGraph, nid: int) -> EvalResult:
    return EvalResult.of(_Evaluator(graph).values(nid))


def evaluate_with_evidence(graph: CpgGraph, nid: int) -> tuple[EvalResult, list[int]]:
    ev = _Evaluator(graph)
    vals = ev.values(nid)
    return EvalResult.of(vals), ev.evidence(nid)


# detectors

CIPHER_CALL = "SSL_CTX_set_cipher_list"
CIPHER_RULE = "cipher-misuse"


def detect_cipher_misuse(graph: CpgGraph, callee: str = CIPHER_CALL, needle: str = "md5") -> list[Finding]:
    """Flag cipher lists that mention MD5 anywhere (substring match, so "!MD5" is flagged too)."""
    findings = []
    for call in find_calls(graph, callee):
        args = graph.ast_children(call, "arguments")
        if len(args) < 2:
            findings.append(Finding(f"{CIPHER_RULE}/unresolved-argument", call,
                                    f"{callee} called with {len(args)} argument(s)", [call], "warn"))
            continue
        result, evidence = evaluate_with_evidence(graph, args[1])
        strings = [v for v in result.values if isinstance(v, str)]
        if not strings:
            findings.append(Finding(f"{CIPHER_RULE}/unresolved-argument", call,
                                    f"cipher list passed to {callee} could not be resolved ({result.kind})",
                                    evidence, "warn"))
            continue
        hits = [s for s in strings if needle in s.lower()]
        if not hits:
            continue
        message = f"{callee} enables {needle.upper()}: {hits[0]!r}"
        if any(f"!{needle}" in s.lower() for s in hits):
            message += " (matched inside an exclusion; substring matching over-approximates)"
        findings.append(Finding(f"{CIPHER_RULE}/md5", call, message, evidence, "error"))
    return findings


RULES: dict[str, Callable[[CpgGraph], list[Finding]]] = {
    CIPHER_RULE: detect_cipher_misuse,
}
