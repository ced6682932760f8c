"""Textual LLVM-IR front end."""

from .model import (
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
from .parser import parse_file, parse_instruction, parse_module, parse_type
from .types import TypeRef

__all__ = [
    "IrBasicBlock", "IrFunction", "IrGlobal", "IrInstruction", "IrModule", "IrOperand",
    "MalformedOperand", "ParseError", "ParseReport", "UnsupportedOpcode", "TypeRef",
    "parse_file", "parse_instruction", "parse_module", "parse_type",
]
