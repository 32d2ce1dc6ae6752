"""Hand-written scanner for LXG source text.

Errors never abort the scan: they are emitted in-band as error tokens and
scanning resumes at the first character that could not be consumed.
"""

from __future__ import annotations

from typing import List

from .tokens import (
    MAX_IDENT_LEN,
    MAX_NUMBER_LEN,
    MAX_STRING_LEN,
    RESERVED_WORDS,
    SINGLE_CHAR_KINDS,
    Token,
    TokenKind,
)

_WHITESPACE = " \t\r\n"


def _is_upper(ch: str) -> bool:
    return "A" <= ch <= "Z"


def _is_lower(ch: str) -> bool:
    return "a" <= ch <= "z"


def _is_digit(ch: str) -> bool:
    return "0" <= ch <= "9"


class _Cursor:
    def __init__(self, text: str):
        self.text = text
        self.i = 0
        self.line = 1
        self.pos = 1

    def eof(self) -> bool:
        return self.i >= len(self.text)

    def peek(self, ahead: int = 0) -> str:
        j = self.i + ahead
        return self.text[j] if j < len(self.text) else ""

    def take(self) -> str:
        ch = self.text[self.i]
        self.i += 1
        if ch == "\n":
            self.line += 1
            self.pos = 1
        else:
            self.pos += 1
        return ch


def scan_source(text: str) -> List[Token]:
    """Scan LXG source text into a token stream framed by bof/eof."""
    cur = _Cursor(text)
    out = [Token(TokenKind.BOF, lexeme="bof")]
    while not cur.eof():
        ch = cur.peek()
        if ch in _WHITESPACE:
            cur.take()
            continue
        if ch == "{":
            tok = _scan_comment(cur)
            if tok is not None:
                out.append(tok)
            continue
        out.append(_scan_token(cur))
    out.append(Token(TokenKind.EOF, lexeme="eof",
                     line=cur.line, pos=cur.pos))
    return out


def _scan_comment(cur: _Cursor):
    line, pos = cur.line, cur.pos
    cur.take()  # {
    body = []
    while not cur.eof():
        if cur.peek() == "}":
            cur.take()
            return None
        body.append(cur.take())
    return Token(TokenKind.ERROR, lexeme="{" + "".join(body),
                 line=line, pos=pos, error_note="unterminated comment")


def _scan_token(cur: _Cursor) -> Token:
    line, pos = cur.line, cur.pos
    ch = cur.peek()

    if _is_upper(ch):
        return _scan_word(cur, line, pos)
    if _is_digit(ch):
        return _scan_number(cur, line, pos)
    if ch in ("'", '"'):
        return _scan_string(cur, line, pos)
    if ch == ":":
        return _scan_colon(cur, line, pos)
    if ch == ",":
        return _scan_comma(cur, line, pos)
    if ch == "<" or ch == ">":
        cur.take()
        if cur.peek() == "=":
            cur.take()
            kind = TokenKind.LESSEQ if ch == "<" else TokenKind.BIGEQ
            return Token(kind, lexeme=ch + "=", line=line, pos=pos)
        kind = TokenKind.LESS if ch == "<" else TokenKind.BIGGER
        return Token(kind, lexeme=ch, line=line, pos=pos)
    if ch in SINGLE_CHAR_KINDS:
        cur.take()
        return Token(SINGLE_CHAR_KINDS[ch], lexeme=ch, line=line, pos=pos)
    cur.take()
    if _is_lower(ch):
        return Token(TokenKind.ERROR, lexeme=ch, line=line, pos=pos,
                     error_note="incorrect token")
    return Token(TokenKind.ERROR, lexeme=ch, line=line, pos=pos,
                 error_note="illegal symbol")


def _scan_word(cur: _Cursor, line: int, pos: int) -> Token:
    chars = []
    while not cur.eof() and (_is_upper(cur.peek()) or _is_digit(cur.peek())):
        chars.append(cur.take())
    word = "".join(chars)
    if len(word) > MAX_IDENT_LEN:
        return Token(TokenKind.ERROR, lexeme=word, line=line, pos=pos,
                     size=len(word),
                     error_note="identifier size over %d symbols" % MAX_IDENT_LEN)
    if word in RESERVED_WORDS:
        return Token(TokenKind.RESERVED, lexeme=word, line=line, pos=pos,
                     reserved_word=word)
    if word in ("TRUE", "FALSE"):
        return Token(TokenKind.BOOLEAN, lexeme=word, line=line, pos=pos)
    return Token(TokenKind.ID, lexeme=word, line=line, pos=pos)


def _scan_number(cur: _Cursor, line: int, pos: int) -> Token:
    digits = []
    while not cur.eof() and _is_digit(cur.peek()):
        digits.append(cur.take())
    number = "".join(digits)
    if len(number) > MAX_NUMBER_LEN:
        return Token(TokenKind.ERROR, lexeme=number, line=line, pos=pos,
                     size=len(number),
                     error_note="number size over %d digits" % MAX_NUMBER_LEN)
    return Token(TokenKind.NUMBER, lexeme=number, line=line, pos=pos,
                 size=len(number))


def _scan_string(cur: _Cursor, line: int, pos: int) -> Token:
    # The start delimiter fixes the end delimiter; the opposite quote
    # character is legal inside the string.
    delim = cur.take()
    chars = []
    while True:
        if cur.eof():
            return Token(TokenKind.ERROR, lexeme="".join(chars),
                         line=line, pos=pos,
                         error_note="unterminated string")
        if cur.peek() == delim:
            cur.take()
            break
        chars.append(cur.take())
    content = "".join(chars)
    if len(content) > MAX_STRING_LEN:
        return Token(TokenKind.ERROR, lexeme=content, line=line, pos=pos,
                     size=len(content),
                     error_note="string size over %d symbols" % MAX_STRING_LEN)
    return Token(TokenKind.STRING, lexeme=content, line=line, pos=pos,
                 size=len(content))


def _scan_colon(cur: _Cursor, line: int, pos: int) -> Token:
    cur.take()  # :
    if cur.peek() == "=":
        cur.take()
        if cur.peek() == ":":
            cur.take()
            return Token(TokenKind.SWAP, lexeme=":=:", line=line, pos=pos)
        return Token(TokenKind.ASSIGN, lexeme=":=", line=line, pos=pos)
    return Token(TokenKind.ERROR, lexeme=":", line=line, pos=pos,
                 error_note="incorrect token")


def _scan_comma(cur: _Cursor, line: int, pos: int) -> Token:
    cur.take()  # ,
    if cur.peek() != ".":
        return Token(TokenKind.COMMA, lexeme=",", line=line, pos=pos)
    # candidate ellipsis `,...,` -- on failure the consumed prefix becomes
    # one error token and scanning resumes at the failing character
    consumed = [","]
    dots = 0
    while dots < 3 and cur.peek() == ".":
        consumed.append(cur.take())
        dots += 1
    if dots == 3 and cur.peek() == ",":
        cur.take()
        return Token(TokenKind.ELLIPSIS, lexeme=",...,", line=line, pos=pos)
    return Token(TokenKind.ERROR, lexeme="".join(consumed),
                 line=line, pos=pos, error_note="incorrect token")
