"""Tokenizer and parser helpers shared by the term, type and λLA grammars."""

from __future__ import annotations

import re
from dataclasses import dataclass


class ParseError(ValueError):
    """Raised on malformed concrete syntax; ``position`` is a 0-based offset."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.message = message
        self.position = position


@dataclass(frozen=True)
class Token:
    kind: str  # 'ident', 'sym', or 'eof'
    text: str
    pos: int


_TOKEN_RE = re.compile(
    r"\s*(?:(?P<ident>[A-Za-z0-9_][A-Za-z0-9_']*)"
    r"|(?P<sym>-o|=>|->|\\|λ|\.|\(|\)|!|\$|§|:|,|∀|⊸|⇒))"
)


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    pos = 0
    end = len(text)
    while pos < end:
        if text[pos:].strip() == "":
            break
        m = _TOKEN_RE.match(text, pos)
        if m is None or m.end() == pos:
            start = pos
            while start < end and text[start].isspace():
                start += 1
            raise ParseError(f"unexpected character {text[start]!r}", start)
        kind = "ident" if m.group("ident") is not None else "sym"
        tok_text = m.group(kind)
        tokens.append(Token(kind, _canonical_symbol(tok_text), m.start(kind)))
        pos = m.end()
    tokens.append(Token("eof", "", len(text)))
    return tokens


def _canonical_symbol(sym: str) -> str:
    return {"λ": "\\", "§": "$", "∀": "forall", "⊸": "-o", "⇒": "=>"}.get(sym, sym)


class TokenStream:
    """Cursor over a token list with the small set of helpers the parsers need."""

    def __init__(self, text: str):
        self.text = text
        self.tokens = tokenize(text)
        self.index = 0

    def peek(self) -> Token:
        return self.tokens[self.index]

    def next(self) -> Token:
        tok = self.tokens[self.index]
        if tok.kind != "eof":
            self.index += 1
        return tok

    def at(self, text: str) -> bool:
        tok = self.peek()
        return tok.text == text and (tok.kind == "sym" or text in KEYWORDS)

    def expect(self, text: str) -> Token:
        tok = self.peek()
        if not self.at(text):
            found = "end of input" if tok.kind == "eof" else repr(tok.text)
            raise ParseError(f"expected {text!r}, found {found}", tok.pos)
        return self.next()

    def ident(self) -> str:
        tok = self.peek()
        if tok.kind != "ident" or tok.text in KEYWORDS:
            found = "end of input" if tok.kind == "eof" else repr(tok.text)
            raise ParseError(f"expected identifier, found {found}", tok.pos)
        self.next()
        return tok.text

    def finish(self) -> None:
        tok = self.peek()
        if tok.kind != "eof":
            raise ParseError(f"unexpected {tok.text!r}", tok.pos)


KEYWORDS = frozenset({"let", "be", "in", "forall"})


def fresh_name(base: str, avoid) -> str:
    """Return a variant of ``base`` that is not in ``avoid``.

    Any trailing ``_<digits>`` suffix is stripped first, so repeated renaming
    produces ``y_1``, ``y_2`` rather than ``y_1_1``.
    """
    stem = re.sub(r"_\d+$", "", base) or base
    if base not in avoid:
        return base
    i = 1
    while f"{stem}_{i}" in avoid:
        i += 1
    return f"{stem}_{i}"
