"""Tokenizer for textual LLVM-IR."""

from __future__ import annotations

import re
from dataclasses import dataclass

_NAME = r'(?:"[^"\n]*"|[-a-zA-Z$._0-9]+)'

_TOKEN_RE = re.compile(
    rf"""
    (?P<ws>[ \t\r\f]+)
  | (?P<nl>\n)
  | (?P<comment>;[^\n]*)
  | (?P<local>%{_NAME})
  | (?P<global>@{_NAME})
  | (?P<meta>!{_NAME}?)
  | (?P<attr>\#[0-9]+)
  | (?P<comdat>\${_NAME})
  | (?P<string>c?"[^"\n]*")
  | (?P<hexfp>[su]?0x[KLMHR]?[0-9A-Fa-f]+)
  | (?P<float>[-+]?[0-9]+\.[0-9]*(?:[eE][-+]?[0-9]+)?)
  | (?P<int>-?[0-9]+)
  | (?P<ellipsis>\.\.\.)
  | (?P<ident>[a-zA-Z_.$][-a-zA-Z$._0-9]*)
  | (?P<punct>[=,()\[\]{{}}<>*:|])
  | (?P<bad>.)
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    col: int
    start: int
    end: int
    first_on_line: bool

    def is_punct(self, ch: str) -> bool:
        return self.kind == "punct" and self.text == ch

    def is_ident(self, word: str) -> bool:
        return self.kind == "ident" and self.text == word


def unquote_name(text: str) -> str:
    """Strip the sigil and optional quotes of ``%name``/``@name``/``!name``."""
    body = text[1:]
    if body.startswith('"') and body.endswith('"') and len(body) >= 2:
        return decode_escapes(body[1:-1])
    return body


def decode_escapes(s: str) -> str:
    return decode_bytes(s).decode("utf-8", errors="replace")


def decode_bytes(s: str) -> bytes:
    """Decode LLVM's ``\\XX`` hex escapes into raw bytes."""
    out = bytearray()
    i = 0
    raw = s.encode("utf-8")
    while i < len(raw):
        c = raw[i]
        if c == 0x5C and _is_hex(raw[i + 1 : i + 3]):
            out.append(int(raw[i + 1 : i + 3], 16))
            i += 3
        elif c == 0x5C and raw[i + 1 : i + 2] == b"\\":
            out.append(0x5C)
            i += 2
        else:
            out.append(c)
            i += 1
    return bytes(out)


def _is_hex(b: bytes) -> bool:
    return len(b) == 2 and all(ch in b"0123456789abcdefABCDEF" for ch in b)


def tokenize(text: str) -> list[Token]:
    """Split ``text`` into tokens, dropping whitespace, newlines and comments."""
    tokens: list[Token] = []
    line, line_start = 1, 0
    first = True
    for m in _TOKEN_RE.finditer(text):
        kind = m.lastgroup
        if kind == "nl":
            line += 1
            line_start = m.end()
            first = True
            continue
        if kind in ("ws", "comment"):
            continue
        tokens.append(
            Token(kind, m.group(), line, m.start() - line_start + 1, m.start(), m.end(), first)
        )
        first = False
    return tokens
