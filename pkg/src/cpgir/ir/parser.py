"""Parser for textual LLVM-IR (.ll).

The parser is deliberately forgiving. Instructions it cannot read become
``opaque`` records that keep their raw text, and every problem is recorded
as a line-numbered diagnostic. Only a broken function-body brace structure
is fatal.
"""

from __future__ import annotations

import logging
import re
import struct
from typing import Callable, Optional

from .lexer import Token, decode_bytes, tokenize, unquote_name
from .model import (
    CAST_OPS,
    OPAQUE,
    OPCODES,
    IrBasicBlock,
    IrFunction,
    IrGlobal,
    IrInstruction,
    IrModule,
    IrOperand,
    MalformedOperand,
    ParseError,
    ParseReport,
    UnsupportedOpcode,
)
from .types import FLOAT_KINDS, I1, LABEL, SIMPLE_KINDS, VOID, TypeRef

log = logging.getLogger(__name__)

MAX_CONST_DEPTH = 8

_INT_TYPE = re.compile(r"i(\d+)$")
_FMF = {"fast", "nnan", "ninf", "nsz", "arcp", "contract", "afn", "reassoc"}
_ICMP_PREDS = {"eq", "ne", "ugt", "uge", "ult", "ule", "sgt", "sge", "slt", "sle"}
_FCMP_PREDS = {
    "false", "oeq", "ogt", "oge", "olt", "ole", "one", "ord",
    "ueq", "ugt", "uge", "ult", "ule", "une", "uno", "true",
}
_ORDERINGS = {"unordered", "monotonic", "acquire", "release", "acq_rel", "seq_cst"}
_CONSTEXPR_OPS = (
    CAST_OPS
    | {"getelementptr", "add", "sub", "mul", "shl", "lshr", "ashr", "and", "or", "xor",
       "udiv", "sdiv", "urem", "srem", "fadd", "fsub", "fmul", "fdiv", "frem", "fneg",
       "icmp", "fcmp", "select", "extractvalue", "insertvalue", "extractelement",
       "insertelement", "shufflevector"}
)
_VALUE_WORDS = {
    "true", "false", "null", "undef", "poison", "zeroinitializer", "none",
    "blockaddress", "asm", "dso_local_equivalent", "no_cfi", "splat",
} | _CONSTEXPR_OPS
_CONTINUATION_WORDS = {"label", "to", "unwind", "catch", "cleanup", "filter", "within", "from", "x"}
_CALL_PREFIXES = {"tail", "musttail", "notail"}


class _Fail(Exception):
    """Internal backtracking signal."""

    def __init__(self, message: str = "unexpected token", offset: int = 0):
        super().__init__(message)
        self.offset = offset


def _is_type_word(word: str) -> bool:
    return bool(_INT_TYPE.match(word)) or word in FLOAT_KINDS or word in SIMPLE_KINDS or word == "ptr"


def _hexfp(text: str, ty: Optional[TypeRef]) -> Optional[float]:
    body = text[2:]
    if body[:1] in "KLMR":
        return None
    if body[:1] == "H":
        return struct.unpack(">e", bytes.fromhex(body[1:].rjust(4, "0")))[0]
    return struct.unpack(">d", bytes.fromhex(body.rjust(16, "0")[-16:]))[0]


class _Cursor:
    def __init__(self, tokens: list[Token], text: str):
        self.toks = tokens
        self.text = text
        self.i = 0
        self.notes: list[tuple[Token, str]] = []

    def peek(self, k: int = 0) -> Optional[Token]:
        j = self.i + k
        return self.toks[j] if j < len(self.toks) else None

    def next(self) -> Token:
        t = self.peek()
        if t is None:
            raise _Fail("unexpected end of instruction", self._offset())
        self.i += 1
        return t

    def at_end(self) -> bool:
        return self.i >= len(self.toks)

    def _offset(self) -> int:
        if not self.toks:
            return 0
        t = self.peek() or self.toks[-1]
        return t.start - self.toks[0].start

    def accept(self, ch: str) -> bool:
        t = self.peek()
        if t is not None and t.kind == "punct" and t.text == ch:
            self.i += 1
            return True
        return False

    def expect(self, ch: str) -> None:
        if not self.accept(ch):
            t = self.peek()
            got = t.text if t else "end of input"
            raise _Fail(f"expected '{ch}', got '{got}'", self._offset())

    def accept_word(self, *words: str) -> Optional[str]:
        t = self.peek()
        if t is not None and t.kind == "ident" and t.text in words:
            self.i += 1
            return t.text
        return None

    def expect_word(self, word: str) -> None:
        if not self.accept_word(word):
            t = self.peek()
            raise _Fail(f"expected '{word}', got '{t.text if t else 'end of input'}'", self._offset())

    def attempt(self, fn: Callable):
        saved = self.i
        try:
            return fn()
        except (_Fail, IndexError, ValueError):
            self.i = saved
            return None

    def slice_text(self, start_tok: int, end_tok: int) -> str:
        if end_tok <= start_tok:
            return ""
        return self.text[self.toks[start_tok].start : self.toks[end_tok - 1].end]

    def skip_group(self) -> None:
        """Consume a balanced bracket group starting at the current token."""
        opening = {"(": ")", "[": "]", "{": "}", "<": ">"}
        t = self.next()
        if t.kind != "punct" or t.text not in opening:
            raise _Fail("expected a bracket group", self._offset())
        stack = [opening[t.text]]
        while stack:
            t = self.next()
            if t.kind != "punct":
                continue
            if t.text in opening:
                stack.append(opening[t.text])
            elif t.text == stack[-1]:
                stack.pop()

    # types

    def parse_type(self) -> TypeRef:
        t = self.next()
        ty: TypeRef
        if t.kind == "ident":
            w = t.text
            m = _INT_TYPE.match(w)
            if m:
                ty = TypeRef.int(int(m.group(1)))
            elif w in FLOAT_KINDS:
                ty = TypeRef.float_kind(w)
            elif w == "ptr":
                space = self._addrspace()
                ty = TypeRef.pointer(None, space)
            elif w in SIMPLE_KINDS:
                ty = TypeRef.simple(w)
            else:
                raise _Fail(f"'{w}' is not a type", self._offset())
        elif t.kind == "local":
            ty = TypeRef.named_struct(unquote_name(t.text))
        elif t.is_punct("{"):
            ty = TypeRef.literal_struct(self._type_list("}"))
        elif t.is_punct("<"):
            if self.accept("{"):
                fields = self._type_list("}")
                self.expect(">")
                ty = TypeRef.literal_struct(fields, packed=True)
            else:
                scalable = False
                if self.accept_word("vscale"):
                    self.expect_word("x")
                    scalable = True
                n = self._int()
                self.expect_word("x")
                elem = self.parse_type()
                self.expect(">")
                ty = TypeRef.vector(n, elem, scalable)
        elif t.is_punct("["):
            n = self._int()
            self.expect_word("x")
            elem = self.parse_type()
            self.expect("]")
            ty = TypeRef.array(n, elem)
        else:
            raise _Fail(f"'{t.text}' is not a type", self._offset())
        while True:
            nt = self.peek()
            if nt is None:
                break
            if nt.is_ident("addrspace") and self.peek(3) is not None and self.peek(4) is not None \
                    and self.peek(4).is_punct("*"):
                space = self._addrspace()
                self.expect("*")
                ty = TypeRef.pointer(ty, space)
            elif nt.is_punct("*"):
                self.i += 1
                ty = TypeRef.pointer(ty)
            elif nt.is_punct("(") and ty.kind != "function":
                self.i += 1
                params, vararg = [], False
                if not self.accept(")"):
                    while True:
                        if self.peek() is not None and self.peek().kind == "ellipsis":
                            self.i += 1
                            vararg = True
                        else:
                            params.append(self.parse_type())
                        if self.accept(")"):
                            break
                        self.expect(",")
                ty = TypeRef.function(ty, params, vararg)
            else:
                break
        return ty

    def _addrspace(self) -> int:
        if self.accept_word("addrspace"):
            self.expect("(")
            n = self._int()
            self.expect(")")
            return n
        return 0

    def _type_list(self, close: str) -> list[TypeRef]:
        out: list[TypeRef] = []
        if self.accept(close):
            return out
        while True:
            out.append(self.parse_type())
            if self.accept(close):
                return out
            self.expect(",")

    def _int(self) -> int:
        t = self.next()
        if t.kind != "int":
            raise _Fail(f"expected integer, got '{t.text}'", self._offset())
        return int(t.text)

    # values

    def parse_typed_value(self, depth: int = 0) -> IrOperand:
        ty = self.parse_type()
        return self.parse_value(ty, depth)

    def parse_value(self, ty: Optional[TypeRef], depth: int = 0) -> IrOperand:
        start = self.i
        t = self.next()
        k = t.kind
        if k == "local":
            kind = "block-label" if ty is not None and ty.kind == "label" else "local-ref"
            return IrOperand(kind, unquote_name(t.text), ty, t.text)
        if k == "global":
            return IrOperand("global-ref", unquote_name(t.text), ty, t.text)
        if k == "int":
            if ty is not None and ty.is_float:
                return IrOperand("literal-float", float(t.text), ty, t.text)
            return IrOperand("literal-int", int(t.text), ty, t.text)
        if k == "float":
            return IrOperand("literal-float", float(t.text), ty, t.text)
        if k == "hexfp":
            if ty is not None and ty.is_integer:
                return IrOperand("literal-int", int(t.text.lstrip("su"), 16), ty, t.text)
            return IrOperand("literal-float", _hexfp(t.text, ty), ty, t.text)
        if k == "string" and t.text.startswith("c"):
            payload = decode_bytes(t.text[2:-1]).decode("latin-1")
            return IrOperand("literal-string", payload, ty, t.text)
        if k == "meta":
            if t.text == "!" and self.peek() is not None and self.peek().is_punct("{"):
                self.skip_group()
            elif self.peek() is not None and self.peek().is_punct("("):
                self.skip_group()
            return IrOperand("metadata", self.slice_text(start, self.i), ty, self.slice_text(start, self.i))
        if k == "ident":
            w = t.text
            if w in ("true", "false"):
                return IrOperand("literal-int", 1 if w == "true" else 0, ty or I1, w)
            if w in ("null", "undef", "poison", "zeroinitializer", "none"):
                return IrOperand("literal-null", w, ty, w)
            if w in ("dso_local_equivalent", "no_cfi"):
                return self.parse_value(ty, depth)
            if w == "asm":
                while self.peek() is not None and self.peek().kind == "ident":
                    self.i += 1
                code = self.next()
                self.expect(",")
                self.next()
                return IrOperand("inline-asm", code.text[1:-1], ty, self.slice_text(start, self.i))
            if w in _CONSTEXPR_OPS or w in ("blockaddress", "splat"):
                self.i -= 1
                return self._constexpr(ty, depth)
            raise _Fail(f"unexpected '{w}' in operand position", self._offset())
        if k == "punct":
            if t.text in ("{", "[") or (t.text == "<" and self.peek() is not None):
                packed = t.text == "<" and self.accept("{")
                close = {"{": "}", "[": "]", "<": ">"}[t.text]
                if packed:
                    close = "}"
                elems: list[IrOperand] = []
                if not self.accept(close):
                    while True:
                        elems.append(self.parse_typed_value(depth))
                        if self.accept(close):
                            break
                        self.expect(",")
                if packed:
                    self.expect(">")
                return IrOperand("aggregate-constant", elems, ty, self.slice_text(start, self.i))
        raise _Fail(f"unexpected '{t.text}' in operand position", self._offset())

    def _constexpr(self, ty: Optional[TypeRef], depth: int) -> IrOperand:
        start = self.i
        word = self.next().text
        if depth + 1 > MAX_CONST_DEPTH:
            while self.peek() is not None and not self.peek().is_punct("("):
                self.i += 1
            self.skip_group()
            text = self.slice_text(start, self.i)
            self.notes.append(
                (self.toks[start], f"constant expression nested deeper than {MAX_CONST_DEPTH} levels")
            )
            return IrOperand("opaque", text, ty, text)
        inner = IrInstruction(word, location=(self.toks[start].line, self.toks[start].col))
        d = depth + 1
        while self.peek() is not None and self.peek().kind == "ident":
            w = self.next().text
            if word in ("icmp", "fcmp") and (w in _ICMP_PREDS or w in _FCMP_PREDS):
                inner.attrs["predicate"] = w
            else:
                inner.flags.add(w)
            if self.peek() is not None and self.peek().is_punct("(") and w == "inrange":
                self.skip_group()
        self.expect("(")
        if word in CAST_OPS:
            v = self.parse_typed_value(d)
            self.expect_word("to")
            dst = self.parse_type()
            inner.operands = [v]
            inner.type_args = [v.type, dst]
            inner.attrs["result_type"] = dst
        elif word == "getelementptr":
            src = self.parse_type()
            self.expect(",")
            inner.operands.append(self.parse_typed_value(d))
            while self.accept(","):
                self.accept_word("inrange")
                inner.operands.append(self.parse_typed_value(d))
            inner.type_args = [src]
            inner.attrs["result_type"] = ty
        elif word == "blockaddress":
            fn = self.next()
            self.expect(",")
            bb = self.next()
            inner.operands = [
                IrOperand("global-ref", unquote_name(fn.text), None, fn.text),
                IrOperand("block-label", unquote_name(bb.text), LABEL, bb.text),
            ]
        elif word in ("extractvalue", "insertvalue"):
            inner.operands.append(self.parse_typed_value(d))
            indices = []
            while self.accept(","):
                if self.peek() is not None and self.peek().kind == "int":
                    indices.append(self._int())
                else:
                    inner.operands.append(self.parse_typed_value(d))
            inner.attrs["indices"] = indices
        else:
            if not self.accept(")"):
                while True:
                    inner.operands.append(self.parse_typed_value(d))
                    if self.accept(")"):
                        break
                    self.expect(",")
                self.i -= 1
            if inner.operands:
                inner.type_args = [inner.operands[0].type]
            if word in ("icmp", "fcmp"):
                inner.attrs["result_type"] = I1
            elif word == "select" and len(inner.operands) > 1:
                inner.attrs["result_type"] = inner.operands[1].type
            elif inner.operands:
                inner.attrs["result_type"] = inner.operands[0].type
        self.expect(")")
        text = self.slice_text(start, self.i)
        inner.raw_text = text
        return IrOperand("nested-constant-expression", inner, ty, text)


class _InstrParser(_Cursor):
    """Parses the tokens of exactly one instruction."""

    def parse(self) -> IrInstruction:
        first = self.peek()
        if first is None:
            raise MalformedOperand("empty instruction")
        result = None
        if first.kind == "local" and self.peek(1) is not None and self.peek(1).is_punct("="):
            result = unquote_name(first.text)
            self.i += 2
        flags: set[str] = set()
        while self.peek() is not None and self.peek().kind == "ident" and self.peek().text in _CALL_PREFIXES:
            flags.add(self.next().text)
        op = self.peek()
        if op is None or op.kind != "ident":
            raise UnsupportedOpcode(op.text if op else "")
        if op.text not in OPCODES:
            raise UnsupportedOpcode(op.text)
        self.i += 1
        instr = IrInstruction(
            op.text,
            result,
            flags=flags,
            raw_text=self.slice_text(0, len(self.toks)),
            location=(first.line, first.col),
        )
        handler = _HANDLERS.get(op.text)
        try:
            handler(self, instr)
        except (_Fail, IndexError, ValueError, struct.error) as exc:
            offset = exc.offset if isinstance(exc, _Fail) else self._offset()
            raise MalformedOperand(f"{op.text}: {exc}", offset) from None
        return instr

    def _flags(self, instr: IrInstruction, stop: set[str] = frozenset()) -> None:
        while True:
            t = self.peek()
            if t is None or t.kind != "ident" or _is_type_word(t.text) or t.text in stop:
                return
            if t.text in _VALUE_WORDS and t.text not in ("and", "or", "xor"):
                return
            self.i += 1
            instr.flags.add(t.text)
            if t.text in ("syncscope", "inrange") and self.peek() is not None and self.peek().is_punct("("):
                self.skip_group()

    def _orderings(self, instr: IrInstruction) -> list[str]:
        found = []
        while self.peek() is not None and self.peek().kind == "ident":
            w = self.next().text
            if w == "syncscope":
                self.skip_group()
                continue
            instr.flags.add(w)
            if w in _ORDERINGS:
                found.append(w)
        return found

    def _trailing(self) -> None:
        """Accept trailing ', align N', metadata attachments and similar."""
        while not self.at_end():
            t = self.next()
            if t.is_punct(","):
                continue
            if t.kind in ("meta", "int") or t.kind == "ident":
                if t.kind == "meta" and self.peek() is not None and self.peek().is_punct("("):
                    self.skip_group()
                continue
            if t.is_punct("(") or t.is_punct("{"):
                self.i -= 1
                self.skip_group()
                continue
            raise _Fail(f"unexpected trailing '{t.text}'", self._offset())

    def _label(self) -> str:
        self.expect_word("label")
        t = self.next()
        if t.kind != "local":
            raise _Fail("expected a block label", self._offset())
        return unquote_name(t.text)

    def _label_operand(self) -> IrOperand:
        self.expect_word("label")
        t = self.next()
        if t.kind != "local":
            raise _Fail("expected a block label", self._offset())
        return IrOperand("block-label", unquote_name(t.text), LABEL, t.text)

    def _indices(self) -> list[int]:
        out = []
        while self.peek() is not None and self.peek().is_punct(","):
            nt = self.peek(1)
            if nt is None or nt.kind != "int":
                break
            self.i += 1
            out.append(self._int())
        return out

    # handlers

    def p_binary(self, instr: IrInstruction) -> None:
        self._flags(instr)
        ty = self.parse_type()
        a = self.parse_value(ty)
        self.expect(",")
        b = self.parse_value(ty)
        instr.operands = [a, b]
        instr.type_args = [ty]
        instr.attrs["result_type"] = ty
        self._trailing()

    def p_fneg(self, instr: IrInstruction) -> None:
        self._flags(instr)
        v = self.parse_typed_value()
        instr.operands = [v]
        instr.type_args = [v.type]
        instr.attrs["result_type"] = v.type
        self._trailing()

    def p_compare(self, instr: IrInstruction) -> None:
        preds = _ICMP_PREDS if instr.opcode == "icmp" else _FCMP_PREDS
        while True:
            t = self.next()
            if t.kind != "ident":
                raise _Fail("expected a comparison predicate", self._offset())
            if t.text in preds:
                instr.attrs["predicate"] = t.text
                break
            instr.flags.add(t.text)
        ty = self.parse_type()
        a = self.parse_value(ty)
        self.expect(",")
        b = self.parse_value(ty)
        instr.operands = [a, b]
        instr.type_args = [ty]
        instr.attrs["result_type"] = TypeRef.vector(ty.length, I1) if ty.kind == "vector" else I1
        self._trailing()

    def p_cast(self, instr: IrInstruction) -> None:
        self._flags(instr)
        v = self.parse_typed_value()
        self.expect_word("to")
        dst = self.parse_type()
        instr.operands = [v]
        instr.type_args = [v.type, dst]
        instr.attrs["result_type"] = dst
        self._trailing()

    def p_select(self, instr: IrInstruction) -> None:
        self._flags(instr)
        c = self.parse_typed_value()
        self.expect(",")
        a = self.parse_typed_value()
        self.expect(",")
        b = self.parse_typed_value()
        instr.operands = [c, a, b]
        instr.type_args = [a.type]
        instr.attrs["result_type"] = a.type
        self._trailing()

    def p_phi(self, instr: IrInstruction) -> None:
        self._flags(instr)
        ty = self.parse_type()
        incoming = []
        while True:
            self.expect("[")
            v = self.parse_value(ty)
            self.expect(",")
            lt = self.next()
            if lt.kind != "local":
                raise _Fail("expected a predecessor label", self._offset())
            self.expect("]")
            incoming.append((v, unquote_name(lt.text)))
            if not (self.peek() is not None and self.peek().is_punct(",") and self.peek(1) is not None
                    and self.peek(1).is_punct("[")):
                break
            self.i += 1
        instr.operands = [v for v, _ in incoming]
        instr.attrs["incoming"] = incoming
        instr.type_args = [ty]
        instr.attrs["result_type"] = ty
        self._trailing()

    def p_alloca(self, instr: IrInstruction) -> None:
        self._flags(instr)
        ty = self.parse_type()
        instr.type_args = [ty]
        if self.peek() is not None and self.peek().is_punct(",") and self.peek(1) is not None \
                and self.peek(1).kind != "ident" or (self.peek(1) is not None and self.peek(1).kind == "ident"
                                                    and _is_type_word(self.peek(1).text)):
            if self.peek() is not None and self.peek().is_punct(","):
                self.i += 1
                instr.operands = [self.parse_typed_value()]
        instr.attrs["result_type"] = TypeRef.pointer(ty)
        self._trailing()

    def p_load(self, instr: IrInstruction) -> None:
        self._flags(instr)
        ty = self.parse_type()
        self.expect(",")
        p = self.parse_typed_value()
        instr.operands = [p]
        instr.type_args = [ty]
        instr.attrs["result_type"] = ty
        if "atomic" in instr.flags:
            orders = self._orderings(instr)
            if orders:
                instr.attrs["ordering"] = orders[0]
        self._trailing()

    def p_store(self, instr: IrInstruction) -> None:
        self._flags(instr)
        v = self.parse_typed_value()
        self.expect(",")
        p = self.parse_typed_value()
        instr.operands = [v, p]
        instr.type_args = [v.type]
        if "atomic" in instr.flags:
            orders = self._orderings(instr)
            if orders:
                instr.attrs["ordering"] = orders[0]
        self._trailing()

    def p_fence(self, instr: IrInstruction) -> None:
        orders = self._orderings(instr)
        if orders:
            instr.attrs["ordering"] = orders[0]
        self._trailing()

    def p_cmpxchg(self, instr: IrInstruction) -> None:
        while self.accept_word("weak", "volatile"):
            instr.flags.add(self.toks[self.i - 1].text)
        p = self.parse_typed_value()
        self.expect(",")
        cmp = self.parse_typed_value()
        self.expect(",")
        new = self.parse_typed_value()
        orders = self._orderings(instr)
        if len(orders) >= 1:
            instr.attrs["success_ordering"] = orders[0]
        if len(orders) >= 2:
            instr.attrs["failure_ordering"] = orders[1]
        instr.operands = [p, cmp, new]
        instr.type_args = [cmp.type]
        instr.attrs["result_type"] = TypeRef.literal_struct([cmp.type, I1])
        self._trailing()

    def p_atomicrmw(self, instr: IrInstruction) -> None:
        if self.accept_word("volatile"):
            instr.flags.add("volatile")
        op = self.next()
        if op.kind != "ident":
            raise _Fail("expected an atomicrmw operation", self._offset())
        instr.attrs["operation"] = op.text
        p = self.parse_typed_value()
        self.expect(",")
        v = self.parse_typed_value()
        orders = self._orderings(instr)
        if orders:
            instr.attrs["ordering"] = orders[0]
        instr.operands = [p, v]
        instr.type_args = [v.type]
        instr.attrs["result_type"] = v.type
        self._trailing()

    def p_getelementptr(self, instr: IrInstruction) -> None:
        self._flags(instr)
        src = self.parse_type()
        self.expect(",")
        base = self.parse_typed_value()
        operands = [base]
        while self.peek() is not None and self.peek().is_punct(","):
            nt = self.peek(1)
            if nt is None or nt.kind == "meta" or nt.is_ident("align"):
                break
            self.i += 1
            self.accept_word("inrange")
            operands.append(self.parse_typed_value())
        instr.operands = operands
        instr.type_args = [src]
        instr.attrs["result_type"] = base.type
        self._trailing()

    def p_extractvalue(self, instr: IrInstruction) -> None:
        agg = self.parse_typed_value()
        instr.attrs["indices"] = self._indices()
        if not instr.attrs["indices"]:
            raise _Fail("extractvalue needs at least one index", self._offset())
        instr.operands = [agg]
        instr.type_args = [agg.type]
        self._trailing()

    def p_insertvalue(self, instr: IrInstruction) -> None:
        agg = self.parse_typed_value()
        self.expect(",")
        elt = self.parse_typed_value()
        instr.attrs["indices"] = self._indices()
        if not instr.attrs["indices"]:
            raise _Fail("insertvalue needs at least one index", self._offset())
        instr.operands = [agg, elt]
        instr.type_args = [agg.type]
        instr.attrs["result_type"] = agg.type
        self._trailing()

    def p_vector(self, instr: IrInstruction) -> None:
        count = {"extractelement": 2, "insertelement": 3, "shufflevector": 3}[instr.opcode]
        ops = [self.parse_typed_value()]
        for _ in range(count - 1):
            self.expect(",")
            ops.append(self.parse_typed_value())
        instr.operands = ops
        instr.type_args = [ops[0].type]
        vt = ops[0].type
        if instr.opcode == "extractelement":
            instr.attrs["result_type"] = vt.elem if vt is not None else None
        elif instr.opcode == "shufflevector" and vt is not None and ops[2].type is not None:
            instr.attrs["result_type"] = TypeRef.vector(ops[2].type.length, vt.elem)
        else:
            instr.attrs["result_type"] = vt
        self._trailing()

    def p_br(self, instr: IrInstruction) -> None:
        if self.peek() is not None and self.peek().is_ident("label"):
            target = self._label_operand()
            instr.operands = [target]
            instr.attrs["targets"] = [target.value]
        else:
            cond = self.parse_typed_value()
            self.expect(",")
            t = self._label_operand()
            self.expect(",")
            f = self._label_operand()
            instr.operands = [cond, t, f]
            instr.attrs["targets"] = [t.value, f.value]
        self._trailing()

    def p_switch(self, instr: IrInstruction) -> None:
        v = self.parse_typed_value()
        self.expect(",")
        default = self._label_operand()
        self.expect("[")
        cases = []
        operands = [v, default]
        while not self.accept("]"):
            c = self.parse_typed_value()
            self.expect(",")
            lab = self._label_operand()
            cases.append((c, lab.value))
            operands += [c, lab]
        instr.operands = operands
        instr.attrs["default"] = default.value
        instr.attrs["cases"] = cases
        instr.attrs["targets"] = [default.value] + [lab for _, lab in cases]
        self._trailing()

    def p_indirectbr(self, instr: IrInstruction) -> None:
        addr = self.parse_typed_value()
        self.expect(",")
        self.expect("[")
        dests = []
        if not self.accept("]"):
            while True:
                dests.append(self._label_operand())
                if self.accept("]"):
                    break
                self.expect(",")
        instr.operands = [addr] + dests
        instr.attrs["targets"] = [d.value for d in dests]
        self._trailing()

    def p_ret(self, instr: IrInstruction) -> None:
        ty = self.parse_type()
        if ty.is_void:
            instr.attrs["result_type"] = VOID
        else:
            instr.operands = [self.parse_value(ty)]
            instr.type_args = [ty]
        self._trailing()

    def p_unreachable(self, instr: IrInstruction) -> None:
        self._trailing()

    def _call_core(self, instr: IrInstruction) -> None:
        """``<attrs> <type> <callee>(<args>)`` shared by call, invoke and callbr."""

        def head():
            ty = self.parse_type()
            callee = self.parse_value(ty)
            if callee.kind not in ("local-ref", "global-ref", "inline-asm", "nested-constant-expression"):
                raise _Fail("not a callee")
            if not (self.peek() is not None and self.peek().is_punct("(")):
                raise _Fail("expected '('")
            return ty, callee

        found = None
        start = self.i
        for j in range(start, len(self.toks)):
            self.i = j
            found = self.attempt(head)
            if found is not None:
                break
        if found is None:
            self.i = start
            raise _Fail("cannot locate the callee", self._offset())
        for t in self.toks[start:j]:
            if t.kind == "ident":
                instr.flags.add(t.text)
        ty, callee = found
        self.expect("(")
        args: list[IrOperand] = []
        if not self.accept(")"):
            while True:
                args.append(self._call_arg())
                if self.accept(")"):
                    break
                self.expect(",")
        ret = ty.elem if ty.kind == "function" else ty
        instr.attrs["callee"] = callee
        instr.attrs["fn_type"] = ty
        instr.attrs["result_type"] = ret
        instr.operands = args
        instr.type_args = [ret]

    def _call_arg(self) -> IrOperand:
        ty = self.parse_type()
        while True:
            t = self.peek()
            if t is None or t.kind != "ident" or t.text in _VALUE_WORDS:
                break
            self.i += 1
            if self.peek() is not None and self.peek().is_punct("("):
                self.skip_group()
            elif t.text == "align" and self.peek() is not None and self.peek().kind == "int":
                self.i += 1
        if ty.kind == "metadata" and self.peek() is not None and self.peek().kind != "meta":
            start = self.i
            inner = self.parse_typed_value()
            return IrOperand("metadata", inner, ty, self.slice_text(start, self.i))
        return self.parse_value(ty)

    def _skip_call_tail(self) -> None:
        """Function attributes (#0, nounwind) and operand bundles after the argument list."""
        while not self.at_end():
            t = self.peek()
            if t.kind in ("attr", "ident") and not t.is_ident("to"):
                self.i += 1
            elif t.is_punct("["):
                self.skip_group()
            elif t.is_punct(",") or t.kind in ("meta", "int"):
                self.i += 1
                if t.kind == "meta" and self.peek() is not None and self.peek().is_punct("("):
                    self.skip_group()
            else:
                return

    def p_call(self, instr: IrInstruction) -> None:
        self._call_core(instr)
        self._skip_call_tail()
        self._trailing()

    def p_invoke(self, instr: IrInstruction) -> None:
        self._call_core(instr)
        self._skip_call_tail()
        self.expect_word("to")
        normal = self._label()
        self.expect_word("unwind")
        unwind = self._label()
        instr.attrs["normal"] = normal
        instr.attrs["unwind"] = unwind
        instr.attrs["targets"] = [normal, unwind]
        self._trailing()

    def p_callbr(self, instr: IrInstruction) -> None:
        self._call_core(instr)
        self._skip_call_tail()
        self.expect_word("to")
        default = self._label()
        indirect = []
        self.expect("[")
        if not self.accept("]"):
            while True:
                indirect.append(self._label())
                if self.accept("]"):
                    break
                self.expect(",")
        instr.attrs["normal"] = default
        instr.attrs["indirect"] = indirect
        instr.attrs["targets"] = [default] + indirect
        self._trailing()

    def p_resume(self, instr: IrInstruction) -> None:
        v = self.parse_typed_value()
        instr.operands = [v]
        instr.type_args = [v.type]
        self._trailing()

    def p_landingpad(self, instr: IrInstruction) -> None:
        ty = self.parse_type()
        clauses = []
        while not self.at_end():
            w = self.accept_word("cleanup", "catch", "filter")
            if w is None:
                break
            if w == "cleanup":
                instr.flags.add("cleanup")
                continue
            clauses.append((w, self.parse_typed_value()))
        instr.attrs["clauses"] = clauses
        instr.operands = [v for _, v in clauses]
        instr.type_args = [ty]
        instr.attrs["result_type"] = ty
        self._trailing()

    def _within(self) -> Optional[str]:
        self.expect_word("within")
        t = self.next()
        if t.is_ident("none"):
            return None
        if t.kind != "local":
            raise _Fail("expected a parent pad", self._offset())
        return unquote_name(t.text)

    def p_catchswitch(self, instr: IrInstruction) -> None:
        instr.attrs["parent"] = self._within()
        self.expect("[")
        handlers = []
        while True:
            handlers.append(self._label())
            if self.accept("]"):
                break
            self.expect(",")
        self.expect_word("unwind")
        if self.accept_word("to"):
            self.expect_word("caller")
            instr.attrs["unwind"] = None
        else:
            instr.attrs["unwind"] = self._label()
        instr.attrs["handlers"] = handlers
        instr.attrs["targets"] = handlers + ([instr.attrs["unwind"]] if instr.attrs["unwind"] else [])
        instr.attrs["result_type"] = TypeRef.simple("token")
        self._trailing()

    def p_pad(self, instr: IrInstruction) -> None:
        instr.attrs["parent"] = self._within()
        self.expect("[")
        args = []
        if not self.accept("]"):
            while True:
                args.append(self._call_arg())
                if self.accept("]"):
                    break
                self.expect(",")
        instr.operands = args
        instr.attrs["result_type"] = TypeRef.simple("token")
        self._trailing()

    def p_catchret(self, instr: IrInstruction) -> None:
        self.expect_word("from")
        pad = self.next()
        self.expect_word("to")
        target = self._label()
        instr.attrs["pad"] = unquote_name(pad.text)
        instr.attrs["targets"] = [target]
        instr.attrs["normal"] = target
        self._trailing()

    def p_cleanupret(self, instr: IrInstruction) -> None:
        self.expect_word("from")
        pad = self.next()
        self.expect_word("unwind")
        if self.accept_word("to"):
            self.expect_word("caller")
            instr.attrs["unwind"] = None
            instr.attrs["targets"] = []
        else:
            instr.attrs["unwind"] = self._label()
            instr.attrs["targets"] = [instr.attrs["unwind"]]
        instr.attrs["pad"] = unquote_name(pad.text)
        self._trailing()

    def p_va_arg(self, instr: IrInstruction) -> None:
        p = self.parse_typed_value()
        self.expect(",")
        ty = self.parse_type()
        instr.operands = [p]
        instr.type_args = [ty]
        instr.attrs["result_type"] = ty
        self._trailing()

    def p_freeze(self, instr: IrInstruction) -> None:
        v = self.parse_typed_value()
        instr.operands = [v]
        instr.type_args = [v.type]
        instr.attrs["result_type"] = v.type
        self._trailing()


_HANDLERS: dict[str, Callable[[_InstrParser, IrInstruction], None]] = {}
for _op in ("add", "fadd", "sub", "fsub", "mul", "fmul", "udiv", "sdiv", "fdiv",
            "urem", "srem", "frem", "shl", "lshr", "ashr", "and", "or", "xor"):
    _HANDLERS[_op] = _InstrParser.p_binary
for _op in CAST_OPS:
    _HANDLERS[_op] = _InstrParser.p_cast
for _op in ("extractelement", "insertelement", "shufflevector"):
    _HANDLERS[_op] = _InstrParser.p_vector
_HANDLERS.update(
    icmp=_InstrParser.p_compare, fcmp=_InstrParser.p_compare, fneg=_InstrParser.p_fneg,
    select=_InstrParser.p_select, phi=_InstrParser.p_phi, alloca=_InstrParser.p_alloca,
    load=_InstrParser.p_load, store=_InstrParser.p_store, fence=_InstrParser.p_fence,
    cmpxchg=_InstrParser.p_cmpxchg, atomicrmw=_InstrParser.p_atomicrmw,
    getelementptr=_InstrParser.p_getelementptr, extractvalue=_InstrParser.p_extractvalue,
    insertvalue=_InstrParser.p_insertvalue, br=_InstrParser.p_br, switch=_InstrParser.p_switch,
    indirectbr=_InstrParser.p_indirectbr, ret=_InstrParser.p_ret,
    unreachable=_InstrParser.p_unreachable, call=_InstrParser.p_call,
    invoke=_InstrParser.p_invoke, callbr=_InstrParser.p_callbr, resume=_InstrParser.p_resume,
    landingpad=_InstrParser.p_landingpad, catchswitch=_InstrParser.p_catchswitch,
    catchpad=_InstrParser.p_pad, cleanuppad=_InstrParser.p_pad,
    catchret=_InstrParser.p_catchret, cleanupret=_InstrParser.p_cleanupret,
    va_arg=_InstrParser.p_va_arg, freeze=_InstrParser.p_freeze,
)


def parse_instruction(line: str, context: Optional[IrFunction] = None) -> IrInstruction:
    """Parse one instruction. Raises UnsupportedOpcode or MalformedOperand."""
    parser = _InstrParser(tokenize(line), line)
    return parser.parse()


def parse_type(text: str) -> TypeRef:
    cur = _Cursor(tokenize(text), text)
    try:
        ty = cur.parse_type()
    except (_Fail, IndexError, ValueError) as exc:
        raise MalformedOperand(f"bad type '{text}': {exc}") from None
    if not cur.at_end():
        raise MalformedOperand(f"trailing text after type '{text}'")
    return ty


# module level


def _is_label_def(toks: list[Token], i: int) -> bool:
    t = toks[i]
    if not t.first_on_line or i + 1 >= len(toks):
        return False
    nxt = toks[i + 1]
    return t.kind in ("ident", "int", "string") and nxt.is_punct(":") and not t.text.startswith("c\"")


def _starts_instruction(toks: list[Token], i: int) -> bool:
    t = toks[i]
    if t.kind == "local":
        return i + 1 < len(toks) and toks[i + 1].is_punct("=")
    if t.kind == "ident":
        w = t.text
        return not (w in _CONTINUATION_WORDS or _is_type_word(w))
    return False


class _ModuleParser:
    def __init__(self, source: str, source_name: str):
        self.text = source
        self.report = ParseReport()
        self.module = IrModule(source_name, report=self.report)
        self.toks = tokenize(source)

    def diag(self, tok: Optional[Token], message: str, severity: str = "warning") -> None:
        line, col = (tok.line, tok.col) if tok is not None else (0, 0)
        self.report.add(line, col, message, severity)
        log.debug("%s:%d:%d: %s", self.module.source_name, line, col, message)

    def fatal(self, tok: Optional[Token], message: str) -> ParseError:
        self.diag(tok, message, "fatal")
        return ParseError(message, self.report, tok.line if tok else 0)

    def text_of(self, toks: list[Token]) -> str:
        if not toks:
            return ""
        return self.text[toks[0].start : toks[-1].end]

    def run(self) -> IrModule:
        toks = self.toks
        n = len(toks)
        i = 0
        while i < n:
            t = toks[i]
            if t.is_ident("define"):
                i = self._define(i)
                continue
            if t.is_punct("}"):
                raise self.fatal(t, "unbalanced '}' at top level")
            j = self._statement_end(i)
            stmt = toks[i:j]
            try:
                self._top_level(stmt)
            except (_Fail, IndexError, ValueError, MalformedOperand) as exc:
                self.diag(t, f"cannot parse top-level entity: {exc}")
            i = j
        return self.module

    def _statement_end(self, i: int) -> int:
        toks = self.toks
        depth = 0
        j = i
        while j < len(toks):
            t = toks[j]
            if j > i and t.first_on_line and (depth <= 0 or self._top_starter(j)):
                if depth > 0:
                    self.diag(toks[i], "unbalanced brackets in top-level entity")
                break
            if t.kind == "punct":
                if t.text in "{[(":
                    depth += 1
                elif t.text in "}])":
                    depth -= 1
            j += 1
        return j

    def _top_starter(self, j: int) -> bool:
        t = self.toks[j]
        if t.kind in ("global", "attr", "comdat"):
            return True
        if t.kind == "meta":
            return True
        if t.kind == "local":
            return j + 2 < len(self.toks) and self.toks[j + 1].is_punct("=") and self.toks[j + 2].is_ident("type")
        return t.kind == "ident" and t.text in (
            "define", "declare", "target", "source_filename", "attributes", "module", "uselistorder",
        )

    def _top_level(self, stmt: list[Token]) -> None:
        t = stmt[0]
        if t.is_ident("declare"):
            self._declare(stmt)
        elif t.kind == "global" and len(stmt) > 1 and stmt[1].is_punct("="):
            self._global(stmt)
        elif t.kind == "local" and len(stmt) > 2 and stmt[1].is_punct("=") and stmt[2].is_ident("type"):
            cur = _Cursor(stmt, self.text)
            cur.i = 3
            if cur.accept_word("opaque") and cur.at_end():
                ty = TypeRef.simple("opaque")
            else:
                cur.i = 3
                ty = cur.parse_type()
            name = unquote_name(t.text)
            if any(n == name for n, _ in self.module.type_defs):
                self.diag(t, f"duplicate type definition %{name}")
                return
            self.module.add_type(name, ty)
        elif t.is_ident("target"):
            if len(stmt) >= 4 and stmt[1].is_ident("triple"):
                self.module.target_triple = stmt[3].text.strip('"')
        elif t.is_ident("source_filename") or t.kind in ("meta", "attr", "comdat") \
                or t.is_ident("attributes") or t.is_ident("module") or t.is_ident("uselistorder"):
            return
        else:
            self.diag(t, f"unknown top-level entity starting with '{t.text}'")

    def _global(self, stmt: list[Token]) -> None:
        name = unquote_name(stmt[0].text)
        cur = _Cursor(stmt, self.text)
        cur.i = 2
        kind = None
        while not cur.at_end():
            w = cur.next()
            if w.kind == "ident" and w.text in ("global", "constant", "alias", "ifunc"):
                kind = w.text
                break
            if cur.peek() is not None and cur.peek().is_punct("("):
                cur.skip_group()
        if kind is None:
            raise _Fail("missing 'global' or 'constant'")
        ty = cur.parse_type()
        init = None
        if kind in ("alias", "ifunc"):
            ty = TypeRef.pointer(ty)
        elif not cur.at_end() and not cur.peek().is_punct(","):
            init = cur.parse_value(ty)
        for tok, msg in cur.notes:
            self.diag(tok, msg)
        if self.module.global_var(name) is not None:
            self.diag(stmt[0], f"duplicate global @{name}")
            return
        self.module.globals.append(
            IrGlobal(name, ty, init, kind == "constant", self.text_of(stmt), (stmt[0].line, stmt[0].col))
        )

    def _header(self, toks: list[Token]) -> tuple[str, TypeRef, list[tuple[str, TypeRef]], bool, int]:
        k = None
        for j in range(1, len(toks) - 1):
            if toks[j].kind == "global" and toks[j + 1].is_punct("("):
                k = j
                break
        if k is None:
            raise _Fail("function header without a name")
        name = unquote_name(toks[k].text)
        ret = None
        for j in range(1, k):
            cur = _Cursor(toks[: k], self.text)
            cur.i = j
            ty = cur.attempt(cur.parse_type)
            if ty is not None and cur.i == k:
                ret = ty
                break
        if ret is None:
            raise _Fail(f"cannot read the return type of @{name}")
        # parameter list
        depth = 0
        groups: list[list[Token]] = [[]]
        j = k + 2
        while j < len(toks):
            t = toks[j]
            if t.kind == "punct" and t.text in "([{<":
                depth += 1
            elif t.kind == "punct" and t.text in ")]}>":
                if depth == 0 and t.text == ")":
                    break
                depth -= 1
            if depth == 0 and t.is_punct(","):
                groups.append([])
            else:
                groups[-1].append(t)
            j += 1
        params: list[tuple[str, TypeRef]] = []
        vararg = False
        for g in groups:
            if not g:
                continue
            if g[0].kind == "ellipsis":
                vararg = True
                continue
            cur = _Cursor(g, self.text)
            pty = cur.parse_type()
            pname = unquote_name(g[-1].text) if g[-1].kind == "local" and len(g) > cur.i - 0 and cur.i < len(g) else ""
            params.append((pname, pty))
        return name, ret, params, vararg, j

    def _declare(self, stmt: list[Token]) -> None:
        name, ret, params, vararg, _ = self._header(stmt)
        fn = IrFunction(name, ret, params, [], True, vararg, self.text_of(stmt), (stmt[0].line, stmt[0].col))
        self._add_function(fn, stmt[0])

    def _add_function(self, fn: IrFunction, tok: Token) -> None:
        existing = self.module.function(fn.name)
        if existing is None:
            self.module.functions.append(fn)
        elif existing.is_declaration and not fn.is_declaration:
            self.module.functions[self.module.functions.index(existing)] = fn
        elif not (fn.is_declaration and not existing.is_declaration):
            self.diag(tok, f"duplicate function @{fn.name}")

    def _define(self, i: int) -> int:
        toks = self.toks
        n = len(toks)
        open_at = None
        j = i + 1
        while j < n:
            t = toks[j]
            if t.is_punct("{") and (j + 1 >= n or toks[j + 1].first_on_line):
                open_at = j
                break
            if t.first_on_line and (t.is_ident("define") or t.is_ident("declare")):
                break
            j += 1
        if open_at is None:
            raise self.fatal(toks[i], "function definition without an opening '{'")
        close_at = None
        j = open_at + 1
        while j < n:
            t = toks[j]
            if t.is_punct("}") and t.first_on_line and (j + 1 >= n or toks[j + 1].first_on_line):
                close_at = j
                break
            if t.first_on_line and t.is_ident("define"):
                break
            j += 1
        if close_at is None:
            raise self.fatal(toks[i], "unbalanced braces: function body is never closed")
        header = toks[i:open_at]
        try:
            name, ret, params, vararg, _ = self._header(header)
        except (_Fail, IndexError, ValueError) as exc:
            self.diag(toks[i], f"cannot parse function header: {exc}", "error")
            return close_at + 1
        fn = IrFunction(name, ret, params, [], False, vararg, self.text_of(header), (toks[i].line, toks[i].col))
        self._body(fn, toks[open_at + 1 : close_at])
        self._add_function(fn, toks[i])
        return close_at + 1

    def _body(self, fn: IrFunction, toks: list[Token]) -> None:
        # split into labels and instruction token runs
        items: list[tuple[str, object]] = []
        current: Optional[list[Token]] = None
        depth = 0
        i = 0
        while i < len(toks):
            t = toks[i]
            if t.first_on_line:
                if _is_label_def(toks, i):
                    if depth > 0 and current:
                        self.diag(current[0], "unbalanced brackets in instruction")
                    label = unquote_name("%" + t.text) if t.kind != "int" else t.text
                    items.append(("label", (label, t)))
                    current, depth = None, 0
                    i += 2
                    continue
                if _starts_instruction(toks, i) or current is None:
                    if depth > 0 and current:
                        self.diag(current[0], "unbalanced brackets in instruction")
                    current, depth = [], 0
                    items.append(("instr", current))
            elif current is None:
                # an instruction on the same line as its block label
                current, depth = [], 0
                items.append(("instr", current))
            if t.kind == "punct":
                if t.text in "{[(<":
                    depth += 1
                elif t.text in "}])>":
                    depth -= 1
            current.append(t)
            i += 1

        counter = 0
        names: set[str] = set()
        for pname, _ in fn.params:
            if pname.isdigit():
                counter = int(pname) + 1
        for idx, (pname, pty) in enumerate(fn.params):
            if not pname:
                fn.params[idx] = (str(counter), pty)
                counter += 1
            names.add(fn.params[idx][0])

        labels: set[str] = set()
        block: Optional[IrBasicBlock] = None

        def new_block(label: str, implicit: bool, tok: Optional[Token]) -> IrBasicBlock:
            nonlocal counter
            if label.isdigit():
                if int(label) != counter:
                    self.diag(tok, f"block %{label} out of numbering sequence (expected %{counter})", "info")
                counter = max(counter, int(label) + 1)
            if label in labels:
                self.diag(tok, f"duplicate block label %{label}")
            labels.add(label)
            b = IrBasicBlock(label, [], implicit)
            fn.blocks.append(b)
            return b

        for kind, payload in items:
            if kind == "label":
                label, tok = payload
                if block is not None and block.instructions and not block.instructions[-1].is_terminator:
                    self.diag(tok, f"block %{block.label} has no terminator")
                block = new_block(label, False, tok)
                continue
            run: list[Token] = payload
            if block is None or (block.instructions and block.instructions[-1].is_terminator):
                block = new_block(str(counter), True, run[0])
            instr = self._instruction(run)
            if instr.result_name is not None:
                r = instr.result_name
                if r in names:
                    self.diag(run[0], f"%{r} is defined more than once (SSA violation)", "error")
                names.add(r)
                if r.isdigit():
                    if int(r) != counter:
                        self.diag(run[0], f"%{r} out of numbering sequence (expected %{counter})", "info")
                    counter = max(counter, int(r) + 1)
            block.instructions.append(instr)
        if block is not None and block.instructions and not block.instructions[-1].is_terminator:
            self.diag(toks[-1] if toks else None, f"block %{block.label} has no terminator")
        if not fn.blocks:
            self.diag(None, f"function @{fn.name} has an empty body", "error")
            fn.blocks.append(IrBasicBlock(str(counter), [], True))

    def _instruction(self, run: list[Token]) -> IrInstruction:
        parser = _InstrParser(run, self.text)
        try:
            instr = parser.parse()
        except UnsupportedOpcode as exc:
            instr = self._opaque(run, "unsupported", str(exc))
            self.diag(run[0], f"unsupported instruction '{exc}', kept as opaque")
        except MalformedOperand as exc:
            intended = self._word(run)
            instr = self._opaque(run, "malformed", str(exc))
            instr.attrs["intended"] = intended
            self.diag(run[0], f"malformed instruction: {exc}", "error")
        for tok, msg in parser.notes:
            self.diag(tok, msg, "error")
        return instr

    @staticmethod
    def _word(run: list[Token]) -> str:
        i = 2 if run[0].kind == "local" and len(run) > 1 and run[1].is_punct("=") else 0
        while i < len(run) and run[i].kind == "ident" and run[i].text in _CALL_PREFIXES:
            i += 1
        return run[i].text if i < len(run) else ""

    def _opaque(self, run: list[Token], reason: str, message: str) -> IrInstruction:
        result = None
        if run[0].kind == "local" and len(run) > 1 and run[1].is_punct("="):
            result = unquote_name(run[0].text)
        return IrInstruction(
            OPAQUE,
            result,
            raw_text=self.text_of(run),
            location=(run[0].line, run[0].col),
            attrs={"word": self._word(run), "reason": reason, "message": message},
        )


def parse_module(source: str, source_name: str = "<input>") -> IrModule:
    """Parse LLVM-IR text into an :class:`IrModule`.

    Diagnostics are collected on ``module.report``; a ParseError is raised
    only when a function body's braces cannot be matched.
    """
    return _ModuleParser(source, source_name).run()


def parse_file(path, encoding: str = "utf-8") -> IrModule:
    with open(path, encoding=encoding, errors="replace") as fh:
        return parse_module(fh.read(), str(path))
