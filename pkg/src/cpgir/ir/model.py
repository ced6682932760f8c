"""In-memory AST for the supported subset of textual LLVM-IR."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Optional

from .types import TypeRef

BINARY_OPS = {
    "add", "fadd", "sub", "fsub", "mul", "fmul", "udiv", "sdiv", "fdiv",
    "urem", "srem", "frem", "shl", "lshr", "ashr", "and", "or", "xor",
}
COMPARE_OPS = {"icmp", "fcmp"}
CAST_OPS = {
    "trunc", "zext", "sext", "fptrunc", "fpext", "fptoui", "fptosi",
    "uitofp", "sitofp", "ptrtoint", "inttoptr", "bitcast", "addrspacecast",
}
MEMORY_OPS = {"alloca", "load", "store", "fence", "cmpxchg", "atomicrmw", "getelementptr"}
AGGREGATE_OPS = {"extractelement", "insertelement", "shufflevector", "extractvalue", "insertvalue"}
TERMINATORS = {
    "ret", "br", "switch", "indirectbr", "invoke", "callbr", "resume",
    "catchswitch", "catchret", "cleanupret", "unreachable",
}
OTHER_OPS = {
    "fneg", "phi", "select", "call", "va_arg", "landingpad", "catchpad",
    "cleanuppad", "freeze",
}
OPCODES = BINARY_OPS | COMPARE_OPS | CAST_OPS | MEMORY_OPS | AGGREGATE_OPS | TERMINATORS | OTHER_OPS
OPAQUE = "opaque"

OPERAND_KINDS = (
    "local-ref", "global-ref", "literal-int", "literal-float", "literal-string",
    "literal-null", "block-label", "nested-constant-expression",
    "aggregate-constant", "metadata", "inline-asm", "opaque",
)


@dataclass
class IrOperand:
    """One operand. ``value`` depends on ``kind``:

    local-ref/global-ref/block-label carry the bare name, literals their
    Python value, ``literal-null`` the keyword (null, undef, poison,
    zeroinitializer, none), aggregates a list of operands and nested
    constant expressions an :class:`IrInstruction`.
    """

    kind: str
    value: Any
    type: Optional[TypeRef] = None
    text: str = ""

    def __repr__(self) -> str:
        return f"IrOperand({self.kind}, {self.value!r}, {self.type})"


@dataclass
class IrInstruction:
    opcode: str
    result_name: Optional[str] = None
    operands: list[IrOperand] = field(default_factory=list)
    type_args: list[TypeRef] = field(default_factory=list)
    flags: set[str] = field(default_factory=set)
    raw_text: str = ""
    location: tuple[int, int] = (0, 0)
    # opcode-specific structured details (predicate, indices, successors, ...)
    attrs: dict[str, Any] = field(default_factory=dict)

    @property
    def is_terminator(self) -> bool:
        return self.opcode in TERMINATORS

    @property
    def result_type(self) -> Optional[TypeRef]:
        return self.attrs.get("result_type")


@dataclass
class IrBasicBlock:
    label: str
    instructions: list[IrInstruction] = field(default_factory=list)
    implicit_label: bool = False

    @property
    def terminator(self) -> Optional[IrInstruction]:
        if self.instructions and self.instructions[-1].is_terminator:
            return self.instructions[-1]
        return None


@dataclass
class IrFunction:
    name: str
    return_type: TypeRef
    params: list[tuple[str, TypeRef]] = field(default_factory=list)
    blocks: list[IrBasicBlock] = field(default_factory=list)
    is_declaration: bool = False
    vararg: bool = False
    header_text: str = ""
    location: tuple[int, int] = (0, 0)

    def block(self, label: str) -> Optional[IrBasicBlock]:
        for b in self.blocks:
            if b.label == label:
                return b
        return None

    def instructions(self):
        for b in self.blocks:
            yield from b.instructions


@dataclass
class IrGlobal:
    name: str
    type: TypeRef
    initializer: Optional[IrOperand] = None
    is_constant: bool = False
    raw_text: str = ""
    location: tuple[int, int] = (0, 0)


@dataclass
class Diagnostic:
    line: int
    column: int
    severity: str
    message: str

    def __str__(self) -> str:
        return f"{self.line}:{self.column}: {self.severity}: {self.message}"


@dataclass
class ParseReport:
    diagnostics: list[Diagnostic] = field(default_factory=list)

    def add(self, line: int, column: int, message: str, severity: str = "warning") -> None:
        self.diagnostics.append(Diagnostic(line, column, severity, message))

    @property
    def errors(self) -> list[Diagnostic]:
        return [d for d in self.diagnostics if d.severity in ("error", "fatal")]

    def format(self, source_name: str = "<input>") -> str:
        return "\n".join(f"{source_name}:{d}" for d in self.diagnostics)


class ParseError(Exception):
    """Structurally unrecoverable input (unbalanced braces)."""

    def __init__(self, message: str, report: Optional[ParseReport] = None, line: int = 0):
        super().__init__(f"line {line}: {message}" if line else message)
        self.report = report or ParseReport()
        self.line = line


class UnsupportedOpcode(Exception):
    pass


class MalformedOperand(Exception):
    def __init__(self, message: str, offset: int = 0):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


@dataclass
class IrModule:
    source_name: str = "<input>"
    target_triple: Optional[str] = None
    type_defs: list[tuple[str, TypeRef]] = field(default_factory=list)
    globals: list[IrGlobal] = field(default_factory=list)
    functions: list[IrFunction] = field(default_factory=list)
    report: ParseReport = field(default_factory=ParseReport)

    def __post_init__(self):
        self._types: dict[str, TypeRef] = dict(self.type_defs)

    def struct_body(self, t: TypeRef) -> Optional[TypeRef]:
        """Resolve a named struct reference to its body (a literal struct), if known."""
        if t.kind != "struct":
            return None
        if t.name is None:
            return t
        body = self._types.get(t.name)
        if body is None or body.kind != "struct":
            return None
        return body

    def add_type(self, name: str, t: TypeRef) -> None:
        self.type_defs.append((name, t))
        self._types[name] = t

    def function(self, name: str) -> Optional[IrFunction]:
        for f in self.functions:
            if f.name == name:
                return f
        return None

    def global_var(self, name: str) -> Optional[IrGlobal]:
        for g in self.globals:
            if g.name == name:
                return g
        return None
