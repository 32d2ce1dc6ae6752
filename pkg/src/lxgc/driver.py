"""Compilation pipeline: scan -> pre-parse -> parse -> generate code.

Each phase's intermediate result is kept on the CompileResult so callers
(the command-line front end, the test suite) can dump or inspect whatever
a phase produced even when a later phase failed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from typing import List, Optional

from .codegen import CodeGenerator, CodegenError
from .grammar import ParseTables, build_tables
from .parser import DerivationEvent, ParseError, parse
from .preparser import PreparseFailure, SymbolTable, preparse
from .scanner import scan_source
from .tokens import Token, TokenKind


class CompileError(Exception):
    """A phase failed; `phase` names it and `messages` lists diagnostics."""

    def __init__(self, phase: str, messages: List[str]):
        super().__init__("%s: %s" % (phase, "; ".join(messages)))
        self.phase = phase
        self.messages = messages


def _data_text(name: str) -> str:
    return resources.files("lxgc.data").joinpath(name).read_text()


@lru_cache(maxsize=1)
def load_tables() -> ParseTables:
    return build_tables(_data_text("lxg.grammar"))


@lru_cache(maxsize=1)
def library_source() -> str:
    return _data_text("lxg_library.lxg")


@dataclass
class CompileResult:
    source: str
    tokens: Optional[List[Token]] = None            # raw scan of the source
    stream: Optional[List[Token]] = None            # rewritten by the pre-parser
    symbols: Optional[SymbolTable] = None
    events: Optional[List[DerivationEvent]] = None
    output: Optional[str] = None                    # assembly text
    tables: Optional[ParseTables] = None


def compile_source(source: str) -> CompileResult:
    """Run the full pipeline; raises CompileError on the first failing phase,
    with the partial CompileResult attached as `result`."""
    result = CompileResult(source)
    try:
        result.tokens = scan_source(source)
        bad = [t for t in result.tokens if t.kind is TokenKind.ERROR]
        if bad:
            raise CompileError("scan", [
                "line %d, position %d: %s -> %r"
                % (t.line, t.pos, t.error_note, t.lexeme) for t in bad])

        lib_tokens = scan_source(library_source())
        try:
            result.stream, result.symbols = preparse(lib_tokens, result.tokens)
        except PreparseFailure as exc:
            raise CompileError("pre-parse", [str(e) for e in exc.errors])

        result.tables = load_tables()
        generator = CodeGenerator(result.symbols)
        try:
            result.events = parse(result.stream, result.tables,
                                  sink=generator, symbols=result.symbols)
        except ParseError as exc:
            raise CompileError("parse", [str(exc)])
        except CodegenError as exc:
            raise CompileError("code generation", [str(exc)])

        result.output = generator.output()
    except CompileError as exc:
        exc.result = result
        raise
    return result
