"""Token structures shared by every compiler phase."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum


class TokenKind(Enum):
    # single-character symbol tokens
    PLUS = "PLUS"
    MINUS = "MINUS"
    MULTI = "MULTI"
    OVER = "OVER"
    POWER = "POWER"
    COMMA = "COMMA"
    SEMI = "SEMI"
    LESS = "LESS"
    BIGGER = "BIGGER"
    EQUAL = "EQUAL"
    DIFF = "DIFF"
    LPAREN = "LPAREN"
    RPAREN = "RPAREN"
    LSQPAREN = "LSQPAREN"
    RSQPAREN = "RSQPAREN"
    # multiple-character symbol tokens
    ASSIGN = "ASSIGN"
    SWAP = "SWAP"
    LESSEQ = "LESSEQ"
    BIGEQ = "BIGEQ"
    ELLIPSIS = "ELLIPSIS"
    # classified tokens
    RESERVED = "reserved word"
    ID = "ID"
    NUMBER = "NUMBER"
    STRING = "STRING"
    BOOLEAN = "BOOLEAN"
    # typed identifiers, produced by the declaration pre-parser
    I_IDENT = "iIdentifier"
    B_IDENT = "bIdentifier"
    S_IDENT = "sIdentifier"
    A_IDENT = "aIdentifier"
    U_IDENT = "uIdentifier"
    # bookkeeping
    BOF = "bof"
    EOF = "eof"
    ERROR = "error"


SINGLE_CHAR_KINDS = {
    "+": TokenKind.PLUS,
    "-": TokenKind.MINUS,
    "*": TokenKind.MULTI,
    "/": TokenKind.OVER,
    "^": TokenKind.POWER,
    ",": TokenKind.COMMA,
    ";": TokenKind.SEMI,
    "<": TokenKind.LESS,
    ">": TokenKind.BIGGER,
    "=": TokenKind.EQUAL,
    "#": TokenKind.DIFF,
    "(": TokenKind.LPAREN,
    ")": TokenKind.RPAREN,
    "[": TokenKind.LSQPAREN,
    "]": TokenKind.RSQPAREN,
}

RESERVED_WORDS = frozenset(
    [
        "AND", "DO", "IF", "OR", "THEN",
        "ARRAY", "ELSE", "INTEGER", "PROCEDURE", "VALUE",
        "BEGIN", "END", "MOD", "REM", "WHILE",
        "BOOLEAN", "FOR", "NOT", "STRING",
    ]
)

TYPED_IDENT_KINDS = frozenset(
    [
        TokenKind.I_IDENT,
        TokenKind.B_IDENT,
        TokenKind.S_IDENT,
        TokenKind.A_IDENT,
        TokenKind.U_IDENT,
    ]
)

MAX_IDENT_LEN = 50
MAX_NUMBER_LEN = 10
MAX_STRING_LEN = 256


@dataclass
class Token:
    kind: TokenKind
    lexeme: str = ""
    line: int = 0
    pos: int = 0
    size: int = 0
    reserved_word: str = ""
    error_note: str = ""

    @property
    def is_bookkeeping(self) -> bool:
        return self.kind in (TokenKind.BOF, TokenKind.EOF)

    def terminal_name(self) -> str:
        """Grammar terminal this token matches, as spelled in lxg.grammar."""
        kind = self.kind
        if kind is TokenKind.RESERVED:
            return self.reserved_word
        if kind is TokenKind.NUMBER:
            return "number"
        if kind is TokenKind.STRING:
            return "string"
        if kind is TokenKind.BOOLEAN:
            return "boolean"
        if kind in TYPED_IDENT_KINDS:
            return kind.value
        if kind in (TokenKind.BOF, TokenKind.EOF):
            return kind.value
        return self.lexeme


def render_token(t: Token) -> str:
    """Render one token in the dump-file line format."""
    if t.kind in (TokenKind.BOF, TokenKind.EOF):
        return t.kind.value
    if t.kind is TokenKind.RESERVED:
        return "%d: reserved word -> %s" % (t.line, t.reserved_word)
    if t.kind is TokenKind.ERROR:
        line = "%d: error, %s -> %s" % (t.line, t.error_note, t.lexeme)
        if "size" in t.error_note:
            line += ", size = %d" % t.size
        return line
    if t.kind in (TokenKind.NUMBER, TokenKind.STRING):
        return "%d: %s, lexeme -> %s, size = %d" % (
            t.line, t.kind.value, t.lexeme, t.size)
    return "%d: %s, lexeme -> %s" % (t.line, t.kind.value, t.lexeme)


def render_stream(tokens) -> str:
    return "".join(render_token(t) + "\n" for t in tokens)


@dataclass
class SourcePos:
    """Line/position cursor helper for diagnostics."""
    line: int = 1
    pos: int = 1

    def advance(self, ch: str) -> None:
        if ch == "\n":
            self.line += 1
            self.pos = 1
        else:
            self.pos += 1
