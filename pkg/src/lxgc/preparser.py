"""Declaration pre-parser: builds the symbol table, strips declarations from
the token stream and retypes identifier tokens.

Declarations are not part of the LXG grammar; this pass removes them
(including their semicolons) before the SLR parser runs.  Every surviving
ID token is replaced by one of iIdentifier / bIdentifier / sIdentifier /
aIdentifier / uIdentifier according to the symbol table, with declarations
inside a procedure superseding same-named main-program declarations.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from .tokens import Token, TokenKind

MAIN_PROGRAM = "MAIN_PROGRAM"

_TYPE_KEYWORDS = {"INTEGER": "INTEGER", "BOOLEAN": "BOOLEAN", "STRING": "STRING"}

_TYPE_TO_KIND = {
    "INTEGER": TokenKind.I_IDENT,
    "BOOLEAN": TokenKind.B_IDENT,
    "STRING": TokenKind.S_IDENT,
    "ARRAY": TokenKind.A_IDENT,
    "PROCEDURE": TokenKind.U_IDENT,
    "UNKNOWN": TokenKind.U_IDENT,
}


@dataclass
class PreparseError:
    message: str
    line: int
    pos: int

    def __str__(self) -> str:
        return "pre-parse error at %d:%d: %s" % (self.line, self.pos, self.message)


class PreparseFailure(Exception):
    """Raised after the pre-parse pass completes with recorded errors."""

    def __init__(self, errors: List[PreparseError]):
        super().__init__("; ".join(str(e) for e in errors))
        self.errors = errors


@dataclass
class SymbolEntry:
    name: str
    type: str  # INTEGER | BOOLEAN | STRING | ARRAY | PROCEDURE | UNKNOWN
    location: str = MAIN_PROGRAM
    array_size: int = 0
    is_generated: bool = False
    is_param: bool = False
    is_value: bool = False
    gen_value: str = ""
    is_library: bool = False
    lines: List[int] = field(default_factory=list)

    @property
    def scope(self) -> str:
        return "GLOBAL" if self.location == MAIN_PROGRAM else "LOCAL"


class SymbolTable:
    def __init__(self) -> None:
        self.entries: List[SymbolEntry] = []
        self._index: Dict[Tuple[str, str], SymbolEntry] = {}

    def find(self, name: str, location: str) -> Optional[SymbolEntry]:
        return self._index.get((name, location))

    def resolve(self, name: str, current_proc: Optional[str]) -> Optional[SymbolEntry]:
        """Innermost-first lookup: procedure scope shadows the main program."""
        if current_proc is not None:
            entry = self.find(name, current_proc)
            if entry is not None:
                return entry
        return self.find(name, MAIN_PROGRAM)

    def add(self, entry: SymbolEntry) -> SymbolEntry:
        key = (entry.name, entry.location)
        if key in self._index:
            raise KeyError("duplicate symbol %s in %s" % (entry.name, entry.location))
        self.entries.append(entry)
        self._index[key] = entry
        return entry

    def params_of(self, proc: str) -> List[SymbolEntry]:
        return [e for e in self.entries if e.location == proc and e.is_param]

    def declared(self) -> List[SymbolEntry]:
        return [e for e in self.entries if not e.is_generated]

    def generated(self) -> List[SymbolEntry]:
        return [e for e in self.entries if e.is_generated]


def render_symbol_table(table: SymbolTable) -> str:
    lines = []
    for e in table.declared():
        if e.is_library:
            continue
        parts = ["name: %s" % e.name, "type: %s" % e.type]
        if e.type == "ARRAY":
            parts.append("size: %d" % e.array_size)
        parts.append("is_generated: false")
        parts.append("location: %s" % e.location)
        parts.append("scope: %s" % e.scope)
        parts.append("is_param: %s" % ("true" if e.is_param else "false"))
        parts.append("is_value: %s" % ("true" if e.is_value else "false"))
        occurrences = "".join("%d, " % n for n in e.lines).rstrip(" ")
        parts.append("lines: %s" % occurrences)
        lines.append("; ".join(parts))
    for e in table.generated():
        parts = ["name: %s" % e.name, "type: %s" % e.type,
                 "is_generated: true", "value: %s" % e.gen_value,
                 "location: %s" % e.location, "scope: %s" % e.scope,
                 "lines: %s" % ", ".join(str(n) for n in e.lines)]
        lines.append("; ".join(parts))
    return "".join(line + "\n" for line in lines)


class _Preparser:
    def __init__(self, table: SymbolTable):
        self.table = table
        self.errors: List[PreparseError] = []

    def error(self, message: str, token: Token) -> None:
        self.errors.append(PreparseError(message, token.line, token.pos))

    def run(self, tokens: List[Token]) -> List[Token]:
        # first sweep: strip declarations, build table entries; each retained
        # token is remembered with the procedure scope it occurred in
        retained: List[Tuple[Token, Optional[str]]] = []
        current_proc: Optional[str] = None
        begin_depth = 0
        i = 0
        while i < len(tokens):
            tok = tokens[i]
            if tok.kind is TokenKind.RESERVED:
                word = tok.reserved_word
                if word in _TYPE_KEYWORDS:
                    i = self._var_declaration(tokens, i, current_proc)
                    continue
                if word == "ARRAY":
                    i = self._array_declaration(tokens, i, current_proc)
                    continue
                if word == "VALUE":
                    i = self._value_declaration(tokens, i, current_proc)
                    continue
                if word == "PROCEDURE" and i + 1 < len(tokens) \
                        and tokens[i + 1].kind is TokenKind.ID:
                    i, current_proc = self._proc_header(tokens, i, retained)
                    continue
                if word == "BEGIN":
                    begin_depth += 1
                elif word == "END":
                    if begin_depth > 0:
                        begin_depth -= 1
                    elif current_proc is not None:
                        self._close_procedure(current_proc, tok)
                        current_proc = None
            retained.append((tok, current_proc))
            i += 1

        # second sweep: retype identifier uses now that every parameter
        # declaration has been seen
        out: List[Token] = []
        for tok, scope in retained:
            if tok.kind is TokenKind.ID:
                out.append(self._retype(tok, scope))
            else:
                out.append(tok)
        return out

    # -- declaration handlers -------------------------------------------

    def _skip_to_semi(self, tokens: List[Token], i: int) -> int:
        while i < len(tokens) and not (
                tokens[i].kind is TokenKind.SEMI or tokens[i].kind is TokenKind.EOF):
            i += 1
        if i < len(tokens) and tokens[i].kind is TokenKind.SEMI:
            i += 1
        return i

    def _declare(self, name_tok: Token, vtype: str, current_proc: Optional[str],
                 array_size: int = 0) -> None:
        location = current_proc if current_proc is not None else MAIN_PROGRAM
        existing = self.table.find(name_tok.lexeme, location)
        if existing is not None:
            # an UNKNOWN parameter entry is patched by its declaration
            if existing.is_param and existing.type == "UNKNOWN":
                if vtype == "ARRAY" and existing.is_value:
                    self.error("VALUE declaration of an array parameter: %s"
                               % name_tok.lexeme, name_tok)
                    return
                existing.type = vtype
                existing.array_size = array_size
                return
            self.error("duplicate declaration of %s" % name_tok.lexeme, name_tok)
            return
        self.table.add(SymbolEntry(name_tok.lexeme, vtype, location,
                                   array_size=array_size))

    def _var_declaration(self, tokens: List[Token], i: int,
                         current_proc: Optional[str]) -> int:
        vtype = _TYPE_KEYWORDS[tokens[i].reserved_word]
        i += 1
        while True:
            if tokens[i].kind is not TokenKind.ID:
                self.error("incorrect declaration - unexpected token %r"
                           % tokens[i].lexeme, tokens[i])
                return self._skip_to_semi(tokens, i)
            self._declare(tokens[i], vtype, current_proc)
            i += 1
            if tokens[i].kind is TokenKind.COMMA:
                i += 1
                continue
            if tokens[i].kind is TokenKind.SEMI:
                return i + 1
            self.error("incorrect declaration - unexpected token %r"
                       % tokens[i].lexeme, tokens[i])
            return self._skip_to_semi(tokens, i)

    def _array_declaration(self, tokens: List[Token], i: int,
                           current_proc: Optional[str]) -> int:
        i += 1
        while True:
            if tokens[i].kind is not TokenKind.ID:
                self.error("incorrect array declaration - unexpected token %r"
                           % tokens[i].lexeme, tokens[i])
                return self._skip_to_semi(tokens, i)
            name_tok = tokens[i]
            if (i + 3 >= len(tokens)
                    or tokens[i + 1].kind is not TokenKind.LSQPAREN
                    or tokens[i + 2].kind is not TokenKind.NUMBER
                    or tokens[i + 3].kind is not TokenKind.RSQPAREN):
                self.error("incorrect array declaration for %s" % name_tok.lexeme,
                           name_tok)
                return self._skip_to_semi(tokens, i)
            size = int(tokens[i + 2].lexeme)
            if size < 1:
                self.error("the array size must be greater than zero",
                           tokens[i + 2])
            else:
                self._declare(name_tok, "ARRAY", current_proc, array_size=size)
            i += 4
            if tokens[i].kind is TokenKind.COMMA:
                i += 1
                continue
            if tokens[i].kind is TokenKind.SEMI:
                return i + 1
            self.error("incorrect array declaration - unexpected token %r"
                       % tokens[i].lexeme, tokens[i])
            return self._skip_to_semi(tokens, i)

    def _value_declaration(self, tokens: List[Token], i: int,
                           current_proc: Optional[str]) -> int:
        first = tokens[i]
        i += 1
        if current_proc is None:
            self.error("VALUE declaration within the main program", first)
            return self._skip_to_semi(tokens, i)
        while True:
            if tokens[i].kind is not TokenKind.ID:
                self.error("incorrect VALUE declaration - unexpected token %r"
                           % tokens[i].lexeme, tokens[i])
                return self._skip_to_semi(tokens, i)
            entry = self.table.find(tokens[i].lexeme, current_proc)
            if entry is None or not entry.is_param:
                self.error("VALUE declaration of a parameter which is not "
                           "declared: %s" % tokens[i].lexeme, tokens[i])
            elif entry.type == "ARRAY":
                self.error("VALUE declaration of an array parameter: %s"
                           % tokens[i].lexeme, tokens[i])
            else:
                entry.is_value = True
            i += 1
            if tokens[i].kind is TokenKind.COMMA:
                i += 1
                continue
            if tokens[i].kind is TokenKind.SEMI:
                return i + 1
            self.error("incorrect VALUE declaration - unexpected token %r"
                       % tokens[i].lexeme, tokens[i])
            return self._skip_to_semi(tokens, i)

    def _proc_header(self, tokens: List[Token], i: int,
                     retained: List[Tuple[Token, Optional[str]]]):
        # PROCEDURE uIdentifier ( ident-list ) is retained; parameters enter
        # the table as UNKNOWN and are patched by subsequent declarations
        retained.append((tokens[i], None))  # PROCEDURE keyword
        name_tok = tokens[i + 1]
        proc = name_tok.lexeme
        if self.table.find(proc, MAIN_PROGRAM) is not None:
            self.error("duplicate declaration of %s" % proc, name_tok)
        else:
            self.table.add(SymbolEntry(proc, "PROCEDURE", MAIN_PROGRAM))
        retained.append((name_tok, None))
        i += 2
        if tokens[i].kind is TokenKind.LPAREN:
            retained.append((tokens[i], proc))
            i += 1
            while True:
                if tokens[i].kind is not TokenKind.ID:
                    self.error("incorrect procedure head - unexpected token %r"
                               % tokens[i].lexeme, tokens[i])
                    return self._skip_to_semi(tokens, i), proc
                if self.table.find(tokens[i].lexeme, proc) is not None:
                    self.error("duplicate declaration of %s" % tokens[i].lexeme,
                               tokens[i])
                else:
                    self.table.add(SymbolEntry(tokens[i].lexeme, "UNKNOWN",
                                               proc, is_param=True))
                retained.append((tokens[i], proc))
                i += 1
                if tokens[i].kind is TokenKind.COMMA:
                    retained.append((tokens[i], proc))
                    i += 1
                    continue
                if tokens[i].kind is TokenKind.RPAREN:
                    retained.append((tokens[i], proc))
                    i += 1
                    break
                self.error("incorrect procedure head - unexpected token %r"
                           % tokens[i].lexeme, tokens[i])
                return self._skip_to_semi(tokens, i), proc
        return i, proc

    def _close_procedure(self, proc: str, end_tok: Token) -> None:
        for param in self.table.params_of(proc):
            if param.type == "UNKNOWN":
                self.error("parameter %s of %s has no type declaration"
                           % (param.name, proc), end_tok)

    # -- identifier retyping --------------------------------------------

    def _retype(self, tok: Token, scope: Optional[str]) -> Token:
        entry = self.table.resolve(tok.lexeme, scope)
        kind = _TYPE_TO_KIND[entry.type] if entry is not None else TokenKind.U_IDENT
        if entry is not None:
            entry.lines.append(tok.line)
        return Token(kind, lexeme=tok.lexeme, line=tok.line, pos=tok.pos)


def preparse(lib_tokens: List[Token], src_tokens: List[Token],
             table: Optional[SymbolTable] = None) -> Tuple[List[Token], SymbolTable]:
    """Two-pass declaration parse: library first, then the source stream.

    Returns the rewritten source stream and the symbol table.  Raises
    PreparseFailure carrying every recorded error once both passes finish.
    """
    if table is None:
        table = SymbolTable()
    pp = _Preparser(table)
    pp.run(lib_tokens)
    for entry in table.entries:
        entry.is_library = True
    out = pp.run(src_tokens)
    if pp.errors:
        raise PreparseFailure(pp.errors)
    return out, table
