"""Translate parsed LLVM-IR into code property graph nodes.

Each instruction becomes the statement a C programmer would write for it:
result-producing instructions turn into variable declarations, branches into
gotos and ifs, aggregates into member and subscript chains. φ-instructions
produce no nodes here; they are collected as :class:`PhiRecord` entries and
lowered later by the φ-elimination pass.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional

from .cpg.graph import CpgGraph
from .ir.model import CAST_OPS, OPAQUE, IrFunction, IrInstruction, IrModule, IrOperand, ParseReport
from .ir.types import I1, TypeRef

log = logging.getLogger(__name__)

BINARY_OPERATORS = {
    "add": "+", "fadd": "+", "sub": "-", "fsub": "-", "mul": "*", "fmul": "*",
    "udiv": "/", "sdiv": "/", "fdiv": "/", "urem": "%", "srem": "%", "frem": "%",
    "shl": "<<", "lshr": ">>", "ashr": ">>", "and": "&", "or": "|", "xor": "^",
}
SIGNEDNESS = {
    "udiv": "unsigned", "urem": "unsigned", "lshr": "unsigned",
    "sdiv": "signed", "srem": "signed", "ashr": "signed",
}
ICMP_OPERATORS = {
    "eq": ("==", None), "ne": ("!=", None),
    "ugt": (">", "unsigned"), "uge": (">=", "unsigned"), "ult": ("<", "unsigned"), "ule": ("<=", "unsigned"),
    "sgt": (">", "signed"), "sge": (">=", "signed"), "slt": ("<", "signed"), "sle": ("<=", "signed"),
}
FCMP_RELATIONS = {"eq": "==", "ne": "!=", "gt": ">", "ge": ">=", "lt": "<", "le": "<="}
CAST_SIGNEDNESS = {
    "zext": "unsigned", "uitofp": "unsigned", "fptoui": "unsigned",
    "sext": "signed", "sitofp": "signed", "fptosi": "signed",
}
RMW_BINARY = {"add": "+", "sub": "-", "and": "&", "or": "|", "xor": "^", "fadd": "+", "fsub": "-"}
RMW_MINMAX = {
    "max": (">", "signed"), "min": ("<", "signed"),
    "umax": (">", "unsigned"), "umin": ("<", "unsigned"),
    "fmax": (">", None), "fmin": ("<", None),
}


@dataclass
class PhiRecord:
    target_name: str
    target_type: Optional[TypeRef]
    incoming: list[tuple[IrOperand, str]]
    owning_function: int
    block_label: str = ""
    code: str = ""
    location: tuple[int, int] = (0, 0)


@dataclass
class MappingContext:
    current_function: int
    function: IrFunction
    block_bodies: dict[str, int] = field(default_factory=dict)
    local_decls: dict[str, int] = field(default_factory=dict)
    phi_records: list[PhiRecord] = field(default_factory=list)
    allocas: dict[str, TypeRef] = field(default_factory=dict)
    catchpads: dict[str, IrInstruction] = field(default_factory=dict)
    current_block: str = ""
    cursor: Optional[int] = None


class OperandBuilder:
    """Builds expression subtrees for IR operands.

    Shared by the mapper and the φ-elimination pass, so that φ inputs are
    expressed exactly like any other operand of the same function.
    """

    def __init__(self, graph: CpgGraph, module: Optional[IrModule], report: Optional[ParseReport] = None):
        self.g = graph
        self.m = module or IrModule()
        self.report = report if report is not None else self.m.report
        self.function_names = {f.name for f in self.m.functions}
        self.global_types = {gl.name: gl.type for gl in self.m.globals}
        self.allocas: dict[str, TypeRef] = {}
        self.code = ""
        self.location = (0, 0)

    def tu(self) -> int:
        return self.g.roots[-1]

    # small node helpers

    def node(self, kind: str, name=None, type=None, code=None, **props) -> int:
        return self.g.new_node(kind, name, self.code if code is None else code, type, props)

    def ref(self, name: str, type: Optional[TypeRef], scope: str = "local", access: str = "read",
            code: Optional[str] = None) -> int:
        return self.node("DeclaredReferenceExpression", name, type, code, scope=scope, access=access)

    def literal(self, value, type: Optional[TypeRef], code: Optional[str] = None, **props) -> int:
        return self.node("Literal", None, type, code, value=value, **props)

    def unary(self, op: str, child: int, type: Optional[TypeRef], **props) -> int:
        u = self.node("UnaryOperator", None, type, operatorCode=op, **props)
        self.g.add_child(u, child, "input")
        return u

    def binary(self, op: str, lhs: int, rhs: int, type: Optional[TypeRef]) -> int:
        b = self.node("BinaryOperator", None, type, operatorCode=op)
        self.g.add_child(b, lhs, "lhs")
        self.g.add_child(b, rhs, "rhs")
        return b

    def assign_node(self, lhs: int, rhs: int, type: Optional[TypeRef]) -> int:
        return self.binary("=", lhs, rhs, type)

    def cast(self, child: int, type: Optional[TypeRef], kind: str, signedness: Optional[str] = None) -> int:
        props = {"castKind": kind}
        if signedness:
            props["signedness"] = signedness
        c = self.node("CastExpression", None, type, **props)
        self.g.add_child(c, child, "expression")
        return c

    def call(self, name: str, args: list[int], type: Optional[TypeRef], **props) -> int:
        c = self.node("CallExpression", name, type, **props)
        for a in args:
            self.g.add_child(c, a, "arguments")
        return c

    def member(self, base: int, index: int, type: Optional[TypeRef], record: Optional[int]) -> int:
        m = self.node("MemberExpression", f"field_{index}", type, index=index)
        self.g.add_child(m, base, "base")
        if record is not None:
            fields = self.g.record_fields(record)
            if index < len(fields):
                self.g.add_edge(m, fields[index], "FIELD")
        return m

    def subscript(self, base: int, index: int, type: Optional[TypeRef]) -> int:
        s = self.node("ArraySubscriptionExpression", None, type)
        self.g.add_child(s, base, "arrayExpression")
        self.g.add_child(s, index, "subscriptExpression")
        return s

    def problem(self, reason: str, type: Optional[TypeRef] = None, code: Optional[str] = None) -> int:
        line, col = self.location
        self.report.add(line, col, f"problem node: {reason}", "error")
        return self.node("ProblemNode", None, type, code, problem=reason)

    # records and types

    def struct_fields(self, ty: Optional[TypeRef]) -> Optional[tuple]:
        if ty is None or ty.kind != "struct":
            return None
        if ty.name is None:
            return ty.fields
        body = self.m.struct_body(ty)
        return body.fields if body is not None else None

    def record_for(self, ty: TypeRef) -> Optional[int]:
        if ty.kind != "struct":
            return None
        if ty.name is not None:
            return self.g.records.get(ty.name)
        if not ty.fields:
            return None
        return self.g.intern_literal_struct(ty.fields, self.tu())

    def note_type(self, ty: Optional[TypeRef]) -> None:
        """Make sure literal structs reachable from ``ty`` have a record."""
        core = ty.record_core() if ty is not None else None
        if core is not None and core.name is None and core.fields:
            self.g.intern_literal_struct(core.fields, self.tu())
            for f in core.fields:
                self.note_type(f)

    # operands

    def is_function(self, name: str) -> bool:
        return name in self.function_names

    def is_direct_var(self, op: IrOperand) -> bool:
        if op.kind == "local-ref":
            return op.value in self.allocas
        if op.kind == "global-ref":
            return op.value in self.global_types
        return False

    def var_type(self, op: IrOperand) -> Optional[TypeRef]:
        if op.kind == "local-ref":
            return self.allocas.get(op.value)
        return self.global_types.get(op.value)

    def var_ref(self, op: IrOperand, access: str = "read") -> int:
        scope = "local" if op.kind == "local-ref" else "global"
        return self.ref(op.value, self.var_type(op), scope, access, code=op.text or None)

    def deref(self, ptr: IrOperand, pointee: Optional[TypeRef], access: str = "read") -> int:
        """``*ptr``; simplified to the variable itself when ptr is its address."""
        if self.is_direct_var(ptr):
            return self.var_ref(ptr, access)
        return self.unary("*", self.operand(ptr), pointee)

    def operand(self, op: IrOperand) -> int:
        k = op.kind
        code = op.text or None
        if k == "local-ref":
            if op.value in self.allocas:
                inner = self.ref(op.value, self.allocas[op.value], code=code)
                return self.unary("&", inner, TypeRef.pointer(self.allocas[op.value]))
            return self.ref(op.value, op.type, code=code)
        if k == "global-ref":
            if op.value in self.global_types:
                gt = self.global_types[op.value]
                inner = self.ref(op.value, gt, "global", code=code)
                return self.unary("&", inner, TypeRef.pointer(gt))
            return self.ref(op.value, op.type, "global", code=code)
        if k in ("literal-int", "literal-float"):
            return self.literal(op.value, op.type, code)
        if k == "literal-string":
            value = op.value[:-1] if op.value.endswith("\x00") else op.value
            return self.literal(value, op.type, code, cstring=True)
        if k == "literal-null":
            return self.literal(None, op.type, code, keyword=op.value)
        if k == "block-label":
            return self.ref(op.value, op.type, "label", code=code)
        if k == "metadata":
            return self.literal(str(op.text), op.type, code, metadata=True)
        if k == "inline-asm":
            return self.literal(op.value, op.type, code, asm=True)
        if k == "aggregate-constant":
            self.note_type(op.type)
            name = op.type.cpg_name() if op.type is not None else "aggregate"
            args = [self.operand(e) for e in op.value]
            return self.call(name, args, op.type, aggregate=True)
        if k == "nested-constant-expression":
            return self.constant_expression(op.value, op.type, code)
        return self.problem(f"untranslatable operand: {op.text or op.value}", op.type, code)

    def constant_expression(self, inner: IrInstruction, ty: Optional[TypeRef], code: Optional[str]) -> int:
        op = inner.opcode
        if op in CAST_OPS:
            src = self.operand(inner.operands[0])
            dst = inner.attrs.get("result_type")
            return self.cast(src, dst, op, CAST_SIGNEDNESS.get(op))
        if op == "getelementptr":
            return self.gep(inner)
        if op in BINARY_OPERATORS:
            return self.binary_expression(inner, inner.attrs.get("result_type"))
        if op == "icmp":
            return self.icmp_expression(inner)
        if op == "fcmp":
            return self.fcmp_expression(inner)
        if op == "select":
            return self.select_expression(inner)
        args = [self.operand(o) for o in inner.operands]
        return self.call(f"llvm.{op}", args, ty, constantExpression=True)

    # expression builders shared with constant expressions

    def binary_expression(self, instr: IrInstruction, ty: Optional[TypeRef]) -> int:
        op = instr.opcode
        lhs, rhs = (self.operand(o) for o in instr.operands[:2])
        sign = SIGNEDNESS.get(op)
        if sign:
            lhs = self.cast(lhs, instr.operands[0].type, "interpret", sign)
            rhs = self.cast(rhs, instr.operands[1].type, "interpret", sign)
        return self.binary(BINARY_OPERATORS[op], lhs, rhs, ty)

    def icmp_expression(self, instr: IrInstruction) -> int:
        symbol, sign = ICMP_OPERATORS[instr.attrs["predicate"]]
        lhs, rhs = (self.operand(o) for o in instr.operands[:2])
        if sign:
            lhs = self.cast(lhs, instr.operands[0].type, "interpret", sign)
            rhs = self.cast(rhs, instr.operands[1].type, "interpret", sign)
        return self.binary(symbol, lhs, rhs, instr.attrs.get("result_type", I1))

    def fcmp_expression(self, instr: IrInstruction) -> int:
        pred = instr.attrs["predicate"]
        a, b = instr.operands[:2]
        ty = instr.attrs.get("result_type", I1)
        if pred in ("true", "false"):
            return self.literal(1 if pred == "true" else 0, ty)

        def unordered() -> int:
            return self.call("isunordered", [self.operand(a), self.operand(b)], I1, builtin=True)

        if pred == "uno":
            return unordered()
        if pred == "ord":
            return self.unary("!", unordered(), I1)
        relation = self.binary(FCMP_RELATIONS[pred[1:]], self.operand(a), self.operand(b), ty)
        if pred[0] == "o":
            return self.binary("&&", self.unary("!", unordered(), I1), relation, ty)
        return self.binary("||", unordered(), relation, ty)

    def select_expression(self, instr: IrInstruction) -> int:
        c, a, b = instr.operands[:3]
        node = self.node("ConditionalExpression", None, a.type)
        self.g.add_child(node, self.operand(c), "condition")
        self.g.add_child(node, self.operand(a), "thenExpression")
        self.g.add_child(node, self.operand(b), "elseExpression")
        return node

    def gep(self, instr: IrInstruction) -> int:
        """``&(base[i0].field_a[i2]...)`` with no memory access."""
        base, *indices = instr.operands
        src = instr.type_args[0] if instr.type_args else None
        vector = any(o.type is not None and o.type.kind == "vector" for o in instr.operands)
        if vector or src is None or not indices:
            args = [self.operand(o) for o in instr.operands]
            return self.call("llvm.getelementptr", args, instr.attrs.get("result_type"))
        first, rest = indices[0], indices[1:]
        steps, err = self.index_path(src, rest, constant_struct_index=True)
        if err is not None:
            return self.problem(err, None)
        if self.is_direct_var(base) and first.kind == "literal-int" and first.value == 0:
            expr = self.var_ref(base)
        else:
            expr = self.subscript(self.operand(base), self.operand(first), src)
        cur = src
        for (kind, k, owner_type, cur), idx in zip(steps, rest):
            if kind == "member":
                expr = self.member(expr, k, cur, self.record_for(owner_type))
            else:
                expr = self.subscript(expr, self.operand(idx), cur)
        return self.unary("&", expr, TypeRef.pointer(cur))


    def index_path(self, ty: TypeRef, indices, constant_struct_index: bool = False):
        """Validate an aggregate index path before any node is built.

        ``indices`` are IrOperands (GEP) or plain ints (extract/insertvalue).
        Returns ([(step kind, index, owner type, result type)], error).
        """
        steps = []
        cur = ty
        for idx in indices:
            if isinstance(idx, IrOperand):
                k = idx.value if idx.kind == "literal-int" else None
                shown = idx.text or str(idx.value)
            else:
                k, shown = idx, str(idx)
            if cur is None:
                return steps, "index into unknown type"
            if cur.kind == "struct":
                fields = self.struct_fields(cur)
                if fields is None:
                    return steps, f"body of {cur} is unknown"
                if k is None:
                    return steps, f"non-constant struct index {shown}"
                if k < 0 or k >= len(fields):
                    return steps, f"field index {k} outside {cur} ({len(fields)} fields)"
                steps.append(("member", k, cur, fields[k]))
                cur = fields[k]
            elif cur.kind in ("array", "vector"):
                steps.append(("subscript", k, cur, cur.elem))
                cur = cur.elem
            else:
                return steps, f"cannot index into non-aggregate {cur}"
        return steps, None


_EXCEPTION_OPS = {"invoke", "resume", "catchswitch", "catchpad", "catchret", "cleanuppad", "cleanupret", "landingpad"}
_SYNTHETIC_OPS = {"shufflevector", "freeze", "va_arg"}


class Mapper(OperandBuilder):
    """Walks an IrModule and emits the graph for every global and function."""

    def __init__(self, module: IrModule, graph: Optional[CpgGraph] = None, report: Optional[ParseReport] = None):
        super().__init__(graph if graph is not None else CpgGraph(), module, report)
        self.phi_records: list[PhiRecord] = []
        self.ctx: Optional[MappingContext] = None

    def translate(self) -> CpgGraph:
        m, g = self.m, self.g
        props = {"targetTriple": m.target_triple} if m.target_triple else {}
        tu = g.new_node("TranslationUnit", m.source_name, m.source_name, None, props)
        for name, ty in m.type_defs:
            if ty.kind == "struct":
                g.add_record(name, ty.fields, tu, code=f"%{name} = type {ty}")
            elif ty.kind == "opaque":
                g.add_record(name, (), tu, code=f"%{name} = type opaque")
        for name, ty in m.type_defs:
            for f in ty.fields:
                self.note_type(f)
        for gl in m.globals:
            self.map_global(gl)
        for fn in m.functions:
            self.map_function(fn)
        return g

    def map_global(self, gl) -> int:
        self.code, self.location = gl.raw_text, gl.location
        self.allocas = {}
        d = self.node("VariableDeclaration", gl.name, gl.type, scope="global", constant=gl.is_constant)
        if gl.initializer is not None:
            self.g.add_child(d, self.operand(gl.initializer), "initializer")
        self.g.add_child(self.tu(), d, "declarations")
        self.note_type(gl.type)
        return d

    def map_function(self, fn: IrFunction) -> int:
        g = self.g
        self.code, self.location = fn.header_text or f"@{fn.name}", fn.location
        fid = self.node("FunctionDeclaration", fn.name, fn.return_type,
                        isDefinition=not fn.is_declaration, vararg=fn.vararg)
        g.add_child(self.tu(), fid, "declarations")
        self.note_type(fn.return_type)
        for i, (pname, pty) in enumerate(fn.params):
            p = self.node("ParameterDeclaration", pname, pty, code=f"{pty} %{pname}", index=i)
            g.add_child(fid, p, "parameters")
        if fn.is_declaration:
            return fid
        ctx = MappingContext(fid, fn, phi_records=self.phi_records)
        ctx.allocas = {
            i.result_name: i.type_args[0]
            for i in fn.instructions()
            if i.opcode == "alloca" and i.result_name and i.type_args
        }
        ctx.catchpads = {
            b.label: b.instructions[0]
            for b in fn.blocks
            if b.instructions and b.instructions[0].opcode == "catchpad"
        }
        self.ctx, self.allocas = ctx, ctx.allocas
        body = self.node("CompoundStatement", None, None)
        g.add_child(fid, body, "body")
        for b in fn.blocks:
            self.code = f"{b.label}:"
            lab = self.node("LabelStatement", b.label, None, implicit=b.implicit_label)
            comp = self.node("CompoundStatement", None, None)
            g.add_child(lab, comp, "subStatement")
            g.add_child(body, lab, "statements")
            ctx.block_bodies[b.label] = comp
            ctx.current_block, ctx.cursor = b.label, comp
            for instr in b.instructions:
                self.map_instruction(instr)
        self.ctx = None
        return fid

    # statement helpers

    def emit(self, stmt: int) -> int:
        self.g.add_child(self.ctx.cursor, stmt, "statements")
        return stmt

    def declare(self, instr: IrInstruction, init: int, ty: Optional[TypeRef] = None, **props) -> int:
        if instr.result_name is None:
            return self.emit(init)
        ty = ty if ty is not None else instr.result_type
        self.note_type(ty)
        d = self.node("VariableDeclaration", instr.result_name, ty, **props)
        self.g.add_child(d, init, "initializer")
        self.emit(d)
        self.ctx.local_decls[instr.result_name] = d
        return d

    def goto(self, label: str) -> int:
        return self.node("GotoStatement", label, None, labelName=label)

    def compound(self, stmts: list[int], **props) -> int:
        c = self.node("CompoundStatement", None, None, **props)
        for s in stmts:
            self.g.add_child(c, s, "statements")
        return c

    def if_statement(self, cond: int, then: int, other: Optional[int] = None) -> int:
        i = self.node("IfStatement", None, None)
        self.g.add_child(i, cond, "condition")
        self.g.add_child(i, then, "thenStatement")
        if other is not None:
            self.g.add_child(i, other, "elseStatement")
        return i

    def assign(self, lhs: int, rhs: int, ty: Optional[TypeRef]) -> int:
        return self.binary("=", lhs, rhs, ty)

    # dispatcher

    def map_instruction(self, instr: IrInstruction):
        """Map one instruction; never raises. Returns the PhiRecord for φs."""
        self.code = instr.raw_text or instr.opcode
        self.location = instr.location
        cursor = self.ctx.cursor
        mark = self.g._next_id
        before = len(self.g.node(cursor).children)
        try:
            return self._dispatch(instr)
        except Exception as exc:  # any failure becomes a ProblemNode
            log.debug("mapping %r failed", instr.raw_text, exc_info=True)
            for _, cid in self.g.node(cursor).children[before:]:
                self.g.remove_subtree(cid)
            for nid in [n for n in self.g.nodes if n >= mark]:
                if nid in self.g.nodes and self.g.nodes[nid].parent is None \
                        and self.g.nodes[nid].kind != "TranslationUnit":
                    self.g.remove_subtree(nid)
            self.ctx.cursor = cursor
            p = self.problem(f"{instr.opcode}: {exc}")
            if instr.result_name is not None:
                return self.declare(instr, p, instr.result_type)
            return self.emit(p)

    def _dispatch(self, instr: IrInstruction):
        op = instr.opcode
        if op == "phi":
            return self.record_phi(instr)
        if op == OPAQUE:
            return self.map_opaque(instr)
        if op in BINARY_OPERATORS or op in ("icmp", "fcmp", "fneg"):
            return self.map_binary(instr)
        if op in ("cmpxchg", "atomicrmw"):
            return self.map_atomic(instr)
        if op in ("extractelement", "insertelement", "extractvalue", "insertvalue", "getelementptr"):
            return self.map_aggregate(instr)
        if op in CAST_OPS:
            return self.map_cast(instr)
        if op in ("alloca", "load", "store", "fence"):
            return self.map_memory(instr)
        if op in _EXCEPTION_OPS:
            return self.map_exception(instr)
        return self.map_control(instr)

    # families

    def map_binary(self, instr: IrInstruction) -> int:
        op = instr.opcode
        ty = instr.result_type
        if op == "fneg":
            expr = self.unary("-", self.operand(instr.operands[0]), ty)
        elif op == "icmp":
            expr = self.icmp_expression(instr)
        elif op == "fcmp":
            expr = self.fcmp_expression(instr)
        else:
            expr = self.binary_expression(instr, ty)
        if instr.flags:
            self.g.node(expr).properties["flags"] = sorted(instr.flags)
        return self.declare(instr, expr)

    def map_cast(self, instr: IrInstruction) -> int:
        src = self.operand(instr.operands[0])
        expr = self.cast(src, instr.result_type, instr.opcode, CAST_SIGNEDNESS.get(instr.opcode))
        return self.declare(instr, expr)

    def map_memory(self, instr: IrInstruction) -> int:
        op = instr.opcode
        props = {}
        if "volatile" in instr.flags:
            props["volatile"] = True
        if "atomic" in instr.flags:
            props["atomic"] = True
            if instr.attrs.get("ordering"):
                props["ordering"] = instr.attrs["ordering"]
        if op == "alloca":
            ty = instr.type_args[0]
            self.note_type(ty)
            if instr.operands:
                count = instr.operands[0]
                if not (count.kind == "literal-int" and count.value == 1):
                    props["count"] = count.text or str(count.value)
            d = self.node("VariableDeclaration", instr.result_name, ty, alloca=True, **props)
            self.ctx.local_decls[instr.result_name] = d
            return self.emit(d)
        if op == "load":
            ty = instr.result_type
            return self.declare(instr, self.deref(instr.operands[0], ty), **props)
        if op == "store":
            value, ptr = instr.operands
            lhs = self.deref(ptr, value.type, "write")
            stmt = self.assign(lhs, self.operand(value), value.type)
            self.g.node(stmt).properties.update(props)
            return self.emit(stmt)
        ordering = instr.attrs.get("ordering")
        return self.emit(self.call("llvm.fence", [], None, **({"ordering": ordering} if ordering else {})))

    def map_atomic(self, instr: IrInstruction) -> int:
        if instr.opcode == "cmpxchg":
            return self._cmpxchg(instr)
        return self._atomicrmw(instr)

    def _atomic_props(self, instr: IrInstruction) -> dict:
        props = {"atomic": True}
        for key in ("ordering", "success_ordering", "failure_ordering", "operation"):
            if instr.attrs.get(key):
                props[key] = instr.attrs[key]
        for flag in ("weak", "volatile"):
            if flag in instr.flags:
                props[flag] = True
        return props

    def _cmpxchg(self, instr: IrInstruction) -> int:
        ptr, cmp, new = instr.operands
        ty = cmp.type
        res = instr.result_name or f"cmpxchg#{instr.location[0]}"
        old_name = f"{res}#old"
        block = self.node("CompoundStatement", None, None, **self._atomic_props(instr))
        old = self.node("VariableDeclaration", old_name, ty)
        self.g.add_child(old, self.deref(ptr, ty), "initializer")
        self.g.add_child(block, old, "statements")
        self.ctx.local_decls[old_name] = old
        cond = self.binary("==", self.ref(old_name, ty), self.operand(cmp), I1)
        store = self.assign(self.deref(ptr, ty, "write"), self.operand(new), ty)
        self.g.add_child(block, self.if_statement(cond, self.compound([store])), "statements")
        rty = instr.result_type
        self.record_for(rty)
        success = self.binary("==", self.ref(old_name, ty), self.operand(cmp), I1)
        ctor = self.call(rty.cpg_name(), [self.ref(old_name, ty), success], rty, constructor=True)
        if instr.result_name is not None:
            d = self.node("VariableDeclaration", res, rty)
            self.g.add_child(d, ctor, "initializer")
            self.g.add_child(block, d, "statements")
            self.ctx.local_decls[res] = d
        else:
            self.g.add_child(block, ctor, "statements")
        return self.emit(block)

    def _atomicrmw(self, instr: IrInstruction) -> int:
        ptr, value = instr.operands
        ty = value.type
        opname = instr.attrs.get("operation", "")
        known = opname in RMW_BINARY or opname in RMW_MINMAX or opname in ("nand", "xchg")
        if not known:
            ordering = instr.attrs.get("ordering")
            fallback = self.call(f"llvm.atomicrmw.{opname}", [self.operand(ptr), self.operand(value)], ty,
                                 **({"ordering": ordering} if ordering else {}))
            return self.declare(instr, fallback)
        res = instr.result_name or f"atomicrmw#{instr.location[0]}"
        block = self.node("CompoundStatement", None, None, **self._atomic_props(instr))
        old = self.node("VariableDeclaration", res, ty)
        self.g.add_child(old, self.deref(ptr, ty), "initializer")
        self.g.add_child(block, old, "statements")
        self.ctx.local_decls[res] = old
        if opname == "xchg":
            stmt = self.assign(self.deref(ptr, ty, "write"), self.operand(value), ty)
        elif opname in RMW_BINARY:
            combined = self.binary(RMW_BINARY[opname], self.ref(res, ty), self.operand(value), ty)
            stmt = self.assign(self.deref(ptr, ty, "write"), combined, ty)
        elif opname == "nand":
            conj = self.binary("&", self.ref(res, ty), self.operand(value), ty)
            stmt = self.assign(self.deref(ptr, ty, "write"), self.unary("~", conj, ty), ty)
        else:
            symbol, sign = RMW_MINMAX[opname]
            lhs, rhs = self.operand(value), self.ref(res, ty)
            if sign:
                lhs = self.cast(lhs, ty, "interpret", sign)
                rhs = self.cast(rhs, ty, "interpret", sign)
            store = self.assign(self.deref(ptr, ty, "write"), self.operand(value), ty)
            stmt = self.if_statement(self.binary(symbol, lhs, rhs, I1), self.compound([store]))
        self.g.add_child(block, stmt, "statements")
        return self.emit(block)

    def map_aggregate(self, instr: IrInstruction) -> int:
        op = instr.opcode
        if op == "getelementptr":
            expr = self.gep(instr)
            return self.declare(instr, expr, self.g.node(expr).type)
        if op in ("extractvalue", "insertvalue"):
            agg = instr.operands[0]
            steps, err = self.index_path(agg.type, instr.attrs["indices"])
            if err is not None:
                return self.declare(instr, self.problem(err), instr.result_type)
            if op == "extractvalue":
                expr = self._chain(self.operand(agg), steps)
                return self.declare(instr, expr, steps[-1][3])
            decl = self.declare(instr, self.operand(agg), agg.type)
            target = self._chain(self.ref(instr.result_name, agg.type, access="readwrite"), steps)
            elt = instr.operands[1]
            self.emit(self.assign(target, self.operand(elt), elt.type))
            return decl
        vec = instr.operands[0]
        vt = vec.type
        if vt is None or vt.kind != "vector" or vt.scalable:
            args = [self.operand(o) for o in instr.operands]
            return self.declare(instr, self.call(f"llvm.{op}", args, instr.result_type))
        if op == "extractelement":
            if vec.kind in ("aggregate-constant", "literal-null"):
                temp = f"{instr.result_name or 'extract'}#vec"
                d = self.node("VariableDeclaration", temp, vt, materialized=True)
                self.g.add_child(d, self.operand(vec), "initializer")
                self.emit(d)
                self.ctx.local_decls[temp] = d
                base = self.ref(temp, vt)
            else:
                base = self.operand(vec)
            expr = self.subscript(base, self.operand(instr.operands[1]), vt.elem)
            return self.declare(instr, expr, vt.elem)
        if op == "insertelement":
            decl = self.declare(instr, self.operand(vec), vt)
            val, idx = instr.operands[1], instr.operands[2]
            target = self.subscript(self.ref(instr.result_name, vt, access="readwrite"), self.operand(idx), vt.elem)
            self.emit(self.assign(target, self.operand(val), vt.elem))
            return decl
        args = [self.operand(o) for o in instr.operands]
        return self.declare(instr, self.call(f"llvm.{op}", args, instr.result_type))

    def _chain(self, expr: int, steps) -> int:
        for kind, k, owner, ty in steps:
            if kind == "member":
                expr = self.member(expr, k, ty, self.record_for(owner))
            else:
                expr = self.subscript(expr, self.literal(k, TypeRef.int(32), str(k)), ty)
        return expr

    def build_call(self, instr: IrInstruction, **props) -> int:
        callee = instr.attrs.get("callee")
        ty = instr.attrs.get("result_type")
        target = callee
        while target is not None and target.kind == "nested-constant-expression" \
                and target.value.opcode in CAST_OPS and target.value.operands:
            target = target.value.operands[0]
        indirect = None
        if target is not None and target.kind == "global-ref":
            name = target.value
        elif target is not None and target.kind == "inline-asm":
            name = "asm"
            props["asm"] = target.value
        else:
            name = target.value if target is not None and isinstance(target.value, str) else "indirect"
            indirect = callee
        if instr.flags & {"tail", "musttail", "notail"}:
            props["tail"] = sorted(instr.flags & {"tail", "musttail", "notail"})[0]
        args = [self.operand(a) for a in instr.operands]
        c = self.call(name, args, ty, **props)
        if indirect is not None:
            self.g.add_child(c, self.operand(indirect), "callee")
            self.g.node(c).properties["indirect"] = True
        return c

    def map_control(self, instr: IrInstruction) -> int:
        op = instr.opcode
        if op == "br":
            if len(instr.operands) == 1:
                return self.emit(self.goto(instr.attrs["targets"][0]))
            t, f = instr.attrs["targets"]
            cond = self.operand(instr.operands[0])
            return self.emit(self.if_statement(cond, self.goto(t), self.goto(f)))
        if op == "switch":
            sw = self.node("SwitchStatement", None, None)
            self.g.add_child(sw, self.operand(instr.operands[0]), "selector")
            for value, label in instr.attrs["cases"]:
                case = self.node("CaseStatement", None, None)
                self.g.add_child(case, self.operand(value), "caseExpression")
                self.g.add_child(case, self.goto(label), "statement")
                self.g.add_child(sw, case, "cases")
            default = self.node("CaseStatement", None, None, default=True)
            self.g.add_child(default, self.goto(instr.attrs["default"]), "statement")
            self.g.add_child(sw, default, "cases")
            return self.emit(sw)
        if op == "ret":
            r = self.node("ReturnStatement", None, instr.type_args[0] if instr.type_args else None)
            if instr.operands:
                self.g.add_child(r, self.operand(instr.operands[0]), "returnValue")
            return self.emit(r)
        if op == "unreachable":
            return self.emit(self.call("llvm.unreachable", [], None, terminates=True))
        if op == "select":
            return self.declare(instr, self.select_expression(instr))
        if op == "call":
            return self.declare(instr, self.build_call(instr))
        if op == "indirectbr":
            c = self.call("llvm.indirectbr", [self.operand(instr.operands[0])], None,
                          terminates=True, targets=list(instr.attrs["targets"]))
            return self.emit(c)
        if op == "callbr":
            c = self.build_call(instr, indirectTargets=list(instr.attrs.get("indirect", [])))
            self.declare(instr, c)
            return self.emit(self.goto(instr.attrs["normal"]))
        if op in _SYNTHETIC_OPS:
            args = [self.operand(o) for o in instr.operands]
            return self.declare(instr, self.call(f"llvm.{op}", args, instr.result_type))
        raise ValueError(f"no mapping for opcode {op}")

    def map_exception(self, instr: IrInstruction) -> int:
        op = instr.opcode
        token = TypeRef.simple("token")
        if op == "invoke":
            try_block = self.node("CompoundStatement", None, None)
            c = self.build_call(instr)
            if instr.result_name is not None:
                d = self.node("VariableDeclaration", instr.result_name, instr.result_type)
                self.g.add_child(d, c, "initializer")
                self.g.add_child(try_block, d, "statements")
                self.ctx.local_decls[instr.result_name] = d
            else:
                self.g.add_child(try_block, c, "statements")
            self.g.add_child(try_block, self.goto(instr.attrs["normal"]), "statements")
            t = self.node("TryStatement", None, None)
            self.g.add_child(t, try_block, "tryBlock")
            clause = self.node("CatchClause", None, None, catchAll=True)
            self.g.add_child(clause, self.compound([self.goto(instr.attrs["unwind"])]), "body")
            self.g.add_child(t, clause, "catchClauses")
            return self.emit(t)
        if op == "resume":
            th = self.node("ThrowStatement", None, None)
            self.g.add_child(th, self.operand(instr.operands[0]), "exception")
            return self.emit(th)
        if op == "landingpad":
            args = [self.operand(v) for _, v in instr.attrs.get("clauses", [])]
            props = {"cleanup": True} if "cleanup" in instr.flags else {}
            return self.declare(instr, self.call("llvm.landingpad", args, instr.result_type, **props))
        if op in ("catchpad", "cleanuppad"):
            args = []
            parent = instr.attrs.get("parent")
            if parent is not None:
                args.append(self.ref(parent, token))
            args += [self.operand(a) for a in instr.operands]
            props = {"intermediate": True} if op == "catchpad" else {}
            return self.declare(instr, self.call(f"llvm.{op}", args, token), **props)
        if op == "catchret":
            return self.emit(self.goto(instr.attrs["normal"]))
        if op == "cleanupret":
            unwind = instr.attrs.get("unwind")
            c = self.call("llvm.cleanupret", [self.ref(instr.attrs["pad"], token)], None,
                          **({} if unwind else {"terminates": True}))
            self.emit(c)
            if unwind:
                self.emit(self.goto(unwind))
            return c
        return self._catchswitch(instr)

    def _catchswitch(self, instr: IrInstruction) -> int:
        token = TypeRef.simple("token")
        name = instr.result_name or f"catchswitch#{instr.location[0]}"
        self.declare(instr, self.call("llvm.catchswitch", [], token), token, intermediate=True)
        unwind = instr.attrs.get("unwind")
        if unwind:
            tail = self.goto(unwind)
        else:
            tail = self.node("ThrowStatement", None, None, rethrow=True)
            self.g.add_child(tail, self.ref(name, token), "exception")
        for handler in reversed(instr.attrs["handlers"]):
            pad = self.ctx.catchpads.get(handler)
            if pad is None:
                cond = self.problem(f"catchswitch handler %{handler} has no catchpad", I1)
            else:
                args = [self.ref(name, token)] + [self.operand(a) for a in pad.operands]
                cond = self.call("llvm.catchpad", args, I1, matches=True)
            tail = self.if_statement(cond, self.goto(handler), tail)
        clause = self.node("CatchClause", None, None, catchswitch=name)
        param = self.node("VariableDeclaration", f"{name}#exception", token, exception=True)
        self.g.add_child(clause, param, "parameter")
        self.g.add_child(clause, self.compound([tail]), "body")
        return self.emit(clause)

    def record_phi(self, instr: IrInstruction) -> PhiRecord:
        incoming = []
        seen = set()
        for value, label in instr.attrs["incoming"]:
            key = (label, value.kind, repr(value.value))
            if key in seen:
                continue
            seen.add(key)
            incoming.append((value, label))
        rec = PhiRecord(instr.result_name, instr.result_type, incoming, self.ctx.current_function,
                        self.ctx.current_block, instr.raw_text, instr.location)
        labels = [lab for _, lab in incoming]
        if len(set(labels)) != len(labels):
            self.report.add(*instr.location, f"φ %{instr.result_name} lists a predecessor twice with different values", "error")
        self.phi_records.append(rec)
        return rec

    def map_opaque(self, instr: IrInstruction) -> int:
        if instr.attrs.get("reason") == "unsupported":
            word = instr.attrs.get("word") or "opaque"
            return self.declare(instr, self.call(f"llvm.{word}", [], None, opaque=True))
        p = self.problem(instr.attrs.get("message", "malformed instruction"))
        return self.declare(instr, p, None)


def map_module(module: IrModule, graph: Optional[CpgGraph] = None) -> tuple[CpgGraph, list[PhiRecord], Mapper]:
    mapper = Mapper(module, graph)
    g = mapper.translate()
    return g, mapper.phi_records, mapper
