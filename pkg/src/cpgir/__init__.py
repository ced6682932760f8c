"""LLVM-IR to code property graph translator."""

from .analysis import (
    EvalResult, Finding, Trap, UnsupportedNodeKind, detect_cipher_misuse, evaluate, find_calls, interpret_function,
)
from .cpg import CpgGraph, TranslationStats
from .export import export_graphml, export_json, export_neo4j_csv, import_json
from .ir import ParseError, parse_file, parse_instruction, parse_module
from .mapper import Mapper, PhiRecord, map_module
from .passes import (
    PassPipeline, build_dfg, build_eog, cleanup_catch_blocks, eliminate_phis, inline_single_pred_blocks, reg2mem,
    remove_stubs, run_pipeline,
)
from .pipeline import TranslationResult, translate, translate_file

__all__ = [
    "CpgGraph", "EvalResult", "Finding", "Mapper", "ParseError", "PassPipeline", "PhiRecord", "TranslationResult",
    "TranslationStats", "Trap", "UnsupportedNodeKind", "build_dfg", "build_eog", "cleanup_catch_blocks",
    "detect_cipher_misuse", "eliminate_phis", "evaluate", "export_graphml", "export_json", "export_neo4j_csv",
    "find_calls", "import_json", "inline_single_pred_blocks", "interpret_function", "map_module", "parse_file",
    "parse_instruction", "parse_module", "reg2mem", "remove_stubs", "run_pipeline", "translate", "translate_file",
]
