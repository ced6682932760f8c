"""LLVM type references.

``TypeRef`` is an immutable value object. Literal structs compare
structurally (equal field lists are the same type); named structs compare
by name only and their bodies live in the module's type table.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

FLOAT_KINDS = ("half", "bfloat", "float", "double", "fp128", "x86_fp80", "ppc_fp128")
SIMPLE_KINDS = ("void", "label", "metadata", "token", "x86_mmx", "x86_amx", "opaque")


@dataclass(frozen=True)
class TypeRef:
    kind: str
    width: int = 0
    elem: Optional["TypeRef"] = None
    length: int = 0
    fields: tuple["TypeRef", ...] = ()
    name: Optional[str] = None
    packed: bool = False
    params: tuple["TypeRef", ...] = ()
    vararg: bool = False
    scalable: bool = False
    addrspace: int = 0

    def __repr__(self) -> str:
        return f"TypeRef({self})"

    # constructors

    @staticmethod
    def int(width: int) -> "TypeRef":
        return TypeRef("integer", width=width)

    @staticmethod
    def float_kind(name: str) -> "TypeRef":
        return TypeRef("float", name=name)

    @staticmethod
    def pointer(pointee: Optional["TypeRef"] = None, addrspace: int = 0) -> "TypeRef":
        return TypeRef("pointer", elem=pointee, addrspace=addrspace)

    @staticmethod
    def array(length: int, elem: "TypeRef") -> "TypeRef":
        return TypeRef("array", length=length, elem=elem)

    @staticmethod
    def vector(length: int, elem: "TypeRef", scalable: bool = False) -> "TypeRef":
        return TypeRef("vector", length=length, elem=elem, scalable=scalable)

    @staticmethod
    def literal_struct(fields, packed: bool = False) -> "TypeRef":
        return TypeRef("struct", fields=tuple(fields), packed=packed)

    @staticmethod
    def named_struct(name: str) -> "TypeRef":
        return TypeRef("struct", name=name)

    @staticmethod
    def function(ret: "TypeRef", params, vararg: bool = False) -> "TypeRef":
        return TypeRef("function", elem=ret, params=tuple(params), vararg=vararg)

    @staticmethod
    def simple(kind: str) -> "TypeRef":
        return TypeRef(kind)

    # predicates

    @property
    def is_integer(self) -> bool:
        return self.kind == "integer"

    @property
    def is_float(self) -> bool:
        return self.kind == "float"

    @property
    def is_pointer(self) -> bool:
        return self.kind == "pointer"

    @property
    def is_struct(self) -> bool:
        return self.kind == "struct"

    @property
    def is_literal_struct(self) -> bool:
        return self.kind == "struct" and self.name is None

    @property
    def is_aggregate(self) -> bool:
        return self.kind in ("struct", "array", "vector")

    @property
    def is_void(self) -> bool:
        return self.kind == "void"

    def __str__(self) -> str:
        k = self.kind
        if k == "integer":
            return f"i{self.width}"
        if k == "float":
            return self.name
        if k == "pointer":
            if self.elem is None:
                return "ptr" if not self.addrspace else f"ptr addrspace({self.addrspace})"
            space = f" addrspace({self.addrspace})" if self.addrspace else ""
            return f"{self.elem}{space}*"
        if k == "array":
            return f"[{self.length} x {self.elem}]"
        if k == "vector":
            scale = "vscale x " if self.scalable else ""
            return f"<{scale}{self.length} x {self.elem}>"
        if k == "struct":
            if self.name is not None:
                return f"%{self.name}"
            body = "{ " + ", ".join(str(f) for f in self.fields) + " }" if self.fields else "{}"
            return f"<{body}>" if self.packed else body
        if k == "function":
            params = [str(p) for p in self.params]
            if self.vararg:
                params.append("...")
            return f"{self.elem} ({', '.join(params)})"
        if k == "opaque" and self.name:
            return self.name
        return k

    def cpg_name(self) -> str:
        """Type name as used in the graph: structs are replaced by their record names."""
        k = self.kind
        if k == "struct":
            if self.name is not None:
                return self.name
            return literal_record_name(self.fields)
        if k == "pointer" and self.elem is not None:
            return f"{self.elem.cpg_name()}*"
        if k == "array":
            return f"[{self.length} x {self.elem.cpg_name()}]"
        if k == "vector":
            return f"<{self.length} x {self.elem.cpg_name()}>"
        return str(self)

    def record_core(self) -> Optional["TypeRef"]:
        """The struct type reached by stripping pointers, arrays and vectors."""
        t: Optional[TypeRef] = self
        while t is not None and t.kind in ("pointer", "array", "vector"):
            t = t.elem
        if t is not None and t.kind == "struct":
            return t
        return None


def literal_record_name(fields) -> str:
    return "literal_" + "_".join(f.cpg_name() for f in fields)


VOID = TypeRef.simple("void")
LABEL = TypeRef.simple("label")
I1 = TypeRef.int(1)
I8 = TypeRef.int(8)
I32 = TypeRef.int(32)
I64 = TypeRef.int(64)
OPAQUE_PTR = TypeRef.pointer()


def display_type(name: str) -> TypeRef:
    """A placeholder type carrying only its display name (used on re-import)."""
    return TypeRef("opaque", name=name)
