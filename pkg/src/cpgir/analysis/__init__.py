"""Queries, constant evaluation and the reference interpreter."""

from .interpreter import Interpreter, Trap, UnsupportedNodeKind, interpret_function
from .queries import (
    KNOWN_FLOAT, KNOWN_INT, KNOWN_STRING, RULES, SET_OF_VALUES, UNKNOWN, CycleDetected, EvalResult, Finding, detect_cipher_misuse, evaluate, evaluate_with_evidence, find_calls,
)

__all__ = [
    "KNOWN_FLOAT", "KNOWN_INT", "KNOWN_STRING", "RULES", "SET_OF_VALUES", "UNKNOWN", "CycleDetected", "EvalResult", "Finding", "Interpreter", "Trap", "UnsupportedNodeKind",
    "detect_cipher_misuse", "evaluate", "evaluate_with_evidence", "find_calls", "interpret_function",
]
