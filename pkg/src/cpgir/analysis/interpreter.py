"""Reference interpreter for translated functions (test oracle).

Integers are held as unsigned bit patterns of their type width; the
``interpret`` casts inserted by the mapper select the signed or unsigned view
where it matters. On a freshly mapped graph, φ records can be supplied and
are then resolved on block entry as parallel copies chosen by the block we
arrived from.
"""

from __future__ import annotations

import copy
import math
import struct
from typing import Optional

from ..cpg.graph import CpgGraph
from ..mapper import PhiRecord
from .queries import int_width, to_signed, to_unsigned, trunc_div, trunc_rem

DEFAULT_MAX_STEPS = 200_000
MAX_CALL_DEPTH = 200


class Trap(Exception):
    """Execution reached undefined behaviour (division by zero, unreachable, ...)."""


class UnsupportedNodeKind(Exception):
    def __init__(self, nid: int, kind: str = ""):
        super().__init__(f"cannot interpret node {nid} ({kind})")
        self.nid = nid
        self.kind = kind


class _Jump(Exception):
    def __init__(self, label: str):
        self.label = label


class _Return(Exception):
    def __init__(self, value):
        self.value = value


class _VarRef:
    def __init__(self, env: dict, name: str):
        self.env, self.name = env, name

    def load(self):
        if self.name not in self.env:
            raise Trap(f"read of undefined variable {self.name}")
        return self.env[self.name]

    def store(self, value) -> None:
        self.env[self.name] = value


class _ElemRef:
    def __init__(self, container: list, index: int):
        self.container, self.index = container, index

    def load(self):
        if not 0 <= self.index < len(self.container):
            raise Trap(f"index {self.index} out of bounds")
        return self.container[self.index]

    def store(self, value) -> None:
        if not 0 <= self.index < len(self.container):
            raise Trap(f"index {self.index} out of bounds")
        self.container[self.index] = value


class _Frame:
    def __init__(self, fid: int):
        self.fid = fid
        self.env: dict = {}
        self.block: Optional[str] = None
        self.phis: dict[str, list[PhiRecord]] = {}


def _float32(v: float) -> float:
    try:
        return struct.unpack("f", struct.pack("f", v))[0]
    except OverflowError:
        return math.copysign(math.inf, v)


class Interpreter:
    def __init__(self, graph: CpgGraph, phi_records=None, max_steps: int = DEFAULT_MAX_STEPS):
        self.g = graph
        self.phi_records = list(phi_records or [])
        self.max_steps = max_steps
        self.steps = 0
        self.globals: Optional[dict] = None
        self.frame: Optional[_Frame] = None
        self.depth = 0

    # helpers

    def _tick(self) -> None:
        self.steps += 1
        if self.steps > self.max_steps:
            raise Trap("step limit exceeded")

    def _wrap(self, v, ty):
        w = int_width(ty)
        if w and isinstance(v, int):
            return to_unsigned(v, w)
        if ty is not None and ty.kind == "float" and ty.name == "float" and isinstance(v, float):
            return _float32(v)
        return v

    def _globals(self) -> dict:
        if self.globals is None:
            self.globals = {}
            saved, self.frame = self.frame, _Frame(-1)
            try:
                for tu in self.g.roots:
                    for d in self.g.ast_children(tu, "declarations"):
                        n = self.g.node(d)
                        if n.kind != "VariableDeclaration":
                            continue
                        init = self.g.child(d, "initializer")
                        if init is None:
                            self.globals[n.name] = 0
                            continue
                        try:
                            self.globals[n.name] = self.eval(init)
                        except (UnsupportedNodeKind, Trap):
                            pass
            finally:
                self.frame = saved
        return self.globals

    def _env_for(self, nid: int) -> dict:
        if self.g.node(nid).prop("scope") == "global":
            return self._globals()
        return self.frame.env

    # functions

    def call(self, fid: int, args: list):
        g = self.g
        if self.depth >= MAX_CALL_DEPTH:
            raise Trap("call depth exceeded")
        params = g.ast_children(fid, "parameters")
        if len(args) != len(params):
            raise TypeError(f"{g.node(fid).name} expects {len(params)} argument(s), got {len(args)}")
        body = g.child(fid, "body")
        if body is None:
            raise UnsupportedNodeKind(fid, "FunctionDeclaration without body")
        frame = _Frame(fid)
        for p, a in zip(params, args):
            pty = g.node(p).type
            if pty is not None and pty.kind == "float":
                a = float(a)
            frame.env[g.node(p).name] = self._wrap(a, pty)
        for rec in self.phi_records:
            if rec.owning_function == fid:
                frame.phis.setdefault(rec.block_label, []).append(rec)
        labels = {g.node(n).name: n for n in g.descendants(body) if g.node(n).kind == "LabelStatement"}
        saved, self.frame = self.frame, frame
        self.depth += 1
        try:
            target = None
            while True:
                try:
                    if target is None:
                        self.exec(body)
                    else:
                        self._run_from(labels[target], body)
                    return None
                except _Jump as j:
                    if j.label not in labels:
                        raise Trap(f"jump to unknown label {j.label}")
                    target = j.label
        except _Return as r:
            return r.value
        finally:
            self.depth -= 1
            self.frame = saved

    def _run_from(self, node: int, body: int) -> None:
        """Execute ``node`` and then everything that follows it in program order."""
        self.exec(node)
        cur = node
        while cur != body:
            par = self.g.parent(cur)
            if par is None:
                return
            if self.g.node(par).kind == "CompoundStatement":
                sibs = [c for _, c in self.g.node(par).children]
                for s in sibs[sibs.index(cur) + 1:]:
                    self.exec(s)
            cur = par

    # statements

    def exec(self, nid: int) -> None:
        self._tick()
        g = self.g
        n = g.node(nid)
        k = n.kind
        if k == "CompoundStatement":
            for _, c in list(n.children):
                self.exec(c)
        elif k == "LabelStatement":
            self._enter_block(n.name)
            sub = g.child(nid, "subStatement")
            if sub is not None:
                self.exec(sub)
        elif k == "GotoStatement":
            raise _Jump(n.prop("labelName", n.name))
        elif k == "IfStatement":
            if self._truthy(self.eval(g.child(nid, "condition"))):
                self.exec(g.child(nid, "thenStatement"))
            else:
                other = g.child(nid, "elseStatement")
                if other is not None:
                    self.exec(other)
        elif k == "SwitchStatement":
            sel = self.eval(g.child(nid, "selector"))
            default = None
            for case in g.ast_children(nid, "cases"):
                if g.node(case).prop("default"):
                    default = case
                    continue
                if self.eval(g.child(case, "caseExpression")) == sel:
                    self.exec(g.child(case, "statement"))
                    return
            if default is not None:
                self.exec(g.child(default, "statement"))
        elif k == "CaseStatement":
            self.exec(g.child(nid, "statement"))
        elif k == "ReturnStatement":
            rv = g.child(nid, "returnValue")
            raise _Return(self.eval(rv) if rv is not None else None)
        elif k == "VariableDeclaration":
            init = g.child(nid, "initializer")
            if init is not None:
                self.frame.env[n.name] = copy.deepcopy(self.eval(init))
        elif k == "TryStatement":
            self.exec(g.child(nid, "tryBlock"))
        elif k == "CatchClause":
            self.exec(g.child(nid, "body"))
        elif k == "ThrowStatement":
            raise Trap("exception thrown")
        elif k in ("FunctionDeclaration", "RecordDeclaration", "FieldDeclaration", "ParameterDeclaration"):
            return
        else:
            self.eval(nid)

    def _enter_block(self, label: str) -> None:
        frame = self.frame
        prev, frame.block = frame.block, label
        records = frame.phis.get(label)
        if not records:
            return
        values = []
        for rec in records:
            chosen = [v for v, pred in rec.incoming if pred == prev]
            if not chosen:
                raise Trap(f"φ %{rec.target_name} has no value for predecessor {prev}")
            values.append(self._wrap(self._ir_operand(chosen[0]), rec.target_type))
        for rec, v in zip(records, values):
            frame.env[rec.target_name] = v

    def _ir_operand(self, op):
        if op.kind == "local-ref":
            return _VarRef(self.frame.env, op.value).load()
        if op.kind in ("literal-int", "literal-float"):
            return int(op.value) if isinstance(op.value, bool) else op.value
        if op.kind == "literal-null":
            return 0
        raise UnsupportedNodeKind(-1, f"φ operand {op.kind}")

    # expressions

    @staticmethod
    def _truthy(v) -> bool:
        return bool(v)

    def lvalue(self, nid: int):
        g = self.g
        n = g.node(nid)
        if n.kind == "DeclaredReferenceExpression":
            return _VarRef(self._env_for(nid), n.name)
        if n.kind == "UnaryOperator" and n.prop("operatorCode") == "*":
            ref = self.eval(g.child(nid, "input"))
            if not isinstance(ref, (_VarRef, _ElemRef)):
                raise Trap("dereference of a non-pointer value")
            return ref
        if n.kind == "MemberExpression":
            base = self.lvalue(g.child(nid, "base")).load()
            if not isinstance(base, list):
                raise UnsupportedNodeKind(nid, n.kind)
            return _ElemRef(base, n.prop("index"))
        if n.kind == "ArraySubscriptionExpression":
            base = self.lvalue(g.child(nid, "arrayExpression")).load()
            idx = self.eval(g.child(nid, "subscriptExpression"))
            if not isinstance(base, list):
                raise UnsupportedNodeKind(nid, n.kind)
            return _ElemRef(base, idx)
        raise UnsupportedNodeKind(nid, n.kind)

    def eval(self, nid: int):
        self._tick()
        g = self.g
        n = g.node(nid)
        k = n.kind
        if k == "Literal":
            v = n.prop("value")
            if n.prop("metadata") or n.prop("asm"):
                raise UnsupportedNodeKind(nid, k)
            if v is None:
                return 0
            if isinstance(v, bool):
                v = int(v)
            return self._wrap(v, n.type)
        if k == "DeclaredReferenceExpression":
            return self.lvalue(nid).load()
        if k in ("MemberExpression", "ArraySubscriptionExpression"):
            return self.lvalue(nid).load()
        if k == "BinaryOperator":
            return self._binary(nid)
        if k == "UnaryOperator":
            return self._unary(nid)
        if k == "CastExpression":
            return self._cast(nid)
        if k == "ConditionalExpression":
            cond = self.eval(g.child(nid, "condition"))
            branch = "thenExpression" if self._truthy(cond) else "elseExpression"
            return copy.deepcopy(self.eval(g.child(nid, branch)))
        if k == "CallExpression":
            return self._call(nid)
        if k == "CompoundStatement":
            self.exec(nid)
            return None
        raise UnsupportedNodeKind(nid, k)

    def _binary(self, nid: int):
        g = self.g
        n = g.node(nid)
        op = n.prop("operatorCode")
        lhs, rhs = g.child(nid, "lhs"), g.child(nid, "rhs")
        if op == "=":
            value = copy.deepcopy(self.eval(rhs))
            self.lvalue(lhs).store(value)
            return value
        if op == "&&":
            return int(self._truthy(self.eval(lhs)) and self._truthy(self.eval(rhs)))
        if op == "||":
            return int(self._truthy(self.eval(lhs)) or self._truthy(self.eval(rhs)))
        a, b = self.eval(lhs), self.eval(rhs)
        if op in ("==", "!=", "<", ">", "<=", ">="):
            return int({"==": a == b, "!=": a != b, "<": a < b, ">": a > b, "<=": a <= b, ">=": a >= b}[op])
        ty = n.type
        if isinstance(a, float) or isinstance(b, float):
            a, b = float(a), float(b)
            if op == "+":
                r = a + b
            elif op == "-":
                r = a - b
            elif op == "*":
                r = a * b
            elif op == "/":
                if b == 0.0:
                    r = math.nan if a == 0.0 or math.isnan(a) else math.copysign(math.inf, a) * math.copysign(1.0, b)
                else:
                    r = a / b
            elif op == "%":
                r = math.fmod(a, b) if b != 0.0 else math.nan
            else:
                raise UnsupportedNodeKind(nid, f"float operator {op}")
            return self._wrap(r, ty)
        if not isinstance(a, int) or not isinstance(b, int):
            raise UnsupportedNodeKind(nid, f"operator {op} on non-integers")
        w = int_width(ty)
        if op == "+":
            r = a + b
        elif op == "-":
            r = a - b
        elif op == "*":
            r = a * b
        elif op in ("/", "%"):
            if b == 0:
                raise Trap("division by zero")
            r = trunc_div(a, b) if op == "/" else trunc_rem(a, b)
        elif op == "&":
            r = a & b
        elif op == "|":
            r = a | b
        elif op == "^":
            r = a ^ b
        elif op in ("<<", ">>"):
            if b < 0 or (w is not None and b >= w):
                raise Trap(f"shift amount {b} out of range")
            r = a << b if op == "<<" else a >> b
        else:
            raise UnsupportedNodeKind(nid, f"operator {op}")
        return self._wrap(r, ty)

    def _unary(self, nid: int):
        g = self.g
        n = g.node(nid)
        op = n.prop("operatorCode")
        child = g.child(nid, "input")
        if op == "&":
            return self.lvalue(child)
        if op == "*":
            return self.lvalue(nid).load()
        v = self.eval(child)
        if op == "-":
            return -v if isinstance(v, float) else self._wrap(-v, n.type)
        if op == "!":
            return int(not self._truthy(v))
        if op == "~":
            return self._wrap(~v, n.type)
        raise UnsupportedNodeKind(nid, f"unary {op}")

    def _cast(self, nid: int):
        g = self.g
        n = g.node(nid)
        child = g.child(nid, "expression")
        v = self.eval(child)
        kind = n.prop("castKind")
        src = g.node(child).type
        sw, dw = int_width(src), int_width(n.type)
        if kind == "interpret":
            w = sw or dw
            if not isinstance(v, int) or not w:
                return v
            return to_signed(v, w) if n.prop("signedness") == "signed" else to_unsigned(v, w)
        if kind == "sext":
            return to_unsigned(to_signed(v, sw), dw)
        if kind in ("zext", "trunc"):
            return to_unsigned(v, dw)
        if kind in ("fptosi", "fptoui"):
            if math.isnan(v) or math.isinf(v):
                raise Trap("float to int conversion of a non-finite value")
            return to_unsigned(int(v), dw)
        if kind == "sitofp":
            return self._wrap(float(to_signed(v, sw)), n.type)
        if kind == "uitofp":
            return self._wrap(float(v), n.type)
        if kind in ("fpext", "fptrunc"):
            return self._wrap(float(v), n.type)
        return self._wrap(v, n.type) if isinstance(v, int) else v

    def _call(self, nid: int):
        g = self.g
        n = g.node(nid)
        name = n.name
        args = g.ast_children(nid, "arguments")
        if name == "isunordered" and n.prop("builtin"):
            a, b = (self.eval(x) for x in args)
            return int(math.isnan(a) or math.isnan(b))
        if name == "llvm.unreachable":
            raise Trap("unreachable executed")
        if n.prop("aggregate") or n.prop("constructor"):
            return [copy.deepcopy(self.eval(a)) for a in args]
        fid = g.function_by_name(name) if name else None
        if fid is not None and g.has_body(fid) and not n.prop("indirect"):
            return self.call(fid, [self.eval(a) for a in args])
        raise UnsupportedNodeKind(nid, f"call to {name}")


def interpret_function(graph: CpgGraph, fid: int, args: list, phi_records=None,
                       max_steps: int = DEFAULT_MAX_STEPS):
    """Run function ``fid`` on ``args``; integers come back signed (i1 as 0/1).

    Raises Trap for undefined behaviour and UnsupportedNodeKind for anything
    outside the integer/float, branch and assignment subset.
    """
    result = Interpreter(graph, phi_records, max_steps).call(fid, list(args))
    w = int_width(graph.node(fid).type)
    if isinstance(result, int) and w and w > 1:
        return to_signed(result, w)
    return result
