"""Table-driven SLR(1) parse of the rewritten token stream.

The driver emits shift/reduce events to a sink (the code generator, or any
other consumer) and records the reverse rightmost derivation.  Procedure
call arguments are type-checked against the symbol table at each
``proc-call -> proc-ident ( exp-list )`` reduction.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional

from .grammar import END_MARKER, ParseTables, Production
from .preparser import SymbolTable
from .tokens import Token, TokenKind


class ActionKind(Enum):
    SHIFT = "Shift"
    REDUCE = "Reduce"
    ACCEPT = "Accept"
    ERROR = "Error"


@dataclass
class ParseAction:
    kind: ActionKind
    next_state: int = -1
    production: int = -1
    note: str = ""


@dataclass
class DerivationEvent:
    lookahead_lexeme: str
    production: Production


class ParseError(Exception):
    def __init__(self, message: str, line: int = 0, pos: int = 0):
        super().__init__("parse error at %d:%d: %s" % (line, pos, message))
        self.message = message
        self.line = line
        self.pos = pos


class ParseSink:
    """Event consumer; the default implementation ignores everything."""

    def shift(self, token: Token) -> None:
        pass

    def reduce(self, production: Production, token: Token) -> None:
        pass


def get_parsing_operation(tables: ParseTables, state_id: int, terminal: str) -> ParseAction:
    state = tables.states[state_id]
    if terminal in state.shift:
        return ParseAction(ActionKind.SHIFT, next_state=state.shift[terminal])
    if terminal in state.reduce:
        production = state.reduce[terminal]
        prod = tables.grammar.productions[production]
        if prod.lhs == tables.grammar.start and terminal == END_MARKER:
            return ParseAction(ActionKind.ACCEPT, production=production)
        return ParseAction(ActionKind.REDUCE, production=production)
    expected = sorted(set(state.shift) | set(state.reduce))
    return ParseAction(
        ActionKind.ERROR,
        note="state %d, unexpected %r, expected one of: %s"
        % (state_id, terminal, ", ".join(expected)))


# integer-valued type of each value-producing nonterminal
_NT_TYPES = {
    "int-exp": "INTEGER", "int-term": "INTEGER", "int-fact": "INTEGER",
    "int-prim": "INTEGER", "int-dest": "INTEGER", "int-ident": "INTEGER",
    "bool-exp": "BOOLEAN", "bool-term": "BOOLEAN", "bool-fact": "BOOLEAN",
    "bool-prim": "BOOLEAN", "bool-reln": "BOOLEAN", "bool-ident": "BOOLEAN",
    "str-exp": "STRING", "str-ident": "STRING",
    "arr-ident": "ARRAY",
}


@dataclass
class _Attr:
    token: Optional[Token] = None
    type: Optional[str] = None
    name: Optional[str] = None
    arg_types: List[str] = field(default_factory=list)


def parse(tokens: List[Token], tables: ParseTables,
          sink: Optional[ParseSink] = None,
          symbols: Optional[SymbolTable] = None) -> List[DerivationEvent]:
    """Classic LR driver over the rewritten stream.

    ``tokens`` must begin with bof and end with eof; a ``$`` sentinel is
    appended internally.  Returns the derivation events in emission order
    (the reverse rightmost derivation).
    """
    if sink is None:
        sink = ParseSink()
    g = tables.grammar
    stack = [0]
    attrs: List[_Attr] = [_Attr()]
    events: List[DerivationEvent] = []
    i = 0
    last_token = Token(TokenKind.BOF, lexeme="")
    while True:
        lookahead = tokens[i] if i < len(tokens) else None
        terminal = lookahead.terminal_name() if lookahead is not None else END_MARKER
        action = get_parsing_operation(tables, stack[-1], terminal)
        if action.kind is ActionKind.SHIFT:
            if lookahead is None:
                raise ParseError("shift past end of input")
            stack.append(action.next_state)
            attrs.append(_Attr(token=lookahead))
            sink.shift(lookahead)
            if not lookahead.is_bookkeeping:
                last_token = lookahead
            i += 1
            continue
        if action.kind in (ActionKind.REDUCE, ActionKind.ACCEPT):
            prod = g.productions[action.production]
            children = attrs[len(attrs) - len(prod.rhs):]
            # run the semantic check first so a bad call never reaches the sink
            value = _synthesize(prod, children, symbols, last_token)
            events.append(DerivationEvent(last_token.lexeme, prod))
            sink.reduce(prod, last_token)
            del stack[len(stack) - len(prod.rhs):]
            del attrs[len(attrs) - len(prod.rhs):]
            if action.kind is ActionKind.ACCEPT:
                if len(stack) != 1:
                    raise ParseError("parser stack not empty at accept")
                return events
            goto_state = tables.states[stack[-1]].goto.get(prod.lhs)
            if goto_state is None:
                raise ParseError("missing goto on %s from state %d"
                                 % (prod.lhs, stack[-1]),
                                 last_token.line, last_token.pos)
            stack.append(goto_state)
            attrs.append(value)
            continue
        line = lookahead.line if lookahead is not None else last_token.line
        pos = lookahead.pos if lookahead is not None else last_token.pos
        raise ParseError(action.note, line, pos)


def _synthesize(prod: Production, children: List[_Attr],
                symbols: Optional[SymbolTable], token: Token) -> _Attr:
    """Compute the attribute for a reduced nonterminal; the only semantic
    action is the argument/parameter type check on procedure calls."""
    attr = _Attr(type=_NT_TYPES.get(prod.lhs))
    if prod.lhs == "proc-ident":
        attr.name = children[0].token.lexeme
        attr.token = children[0].token
    elif prod.lhs in ("proc-head", "proc-call"):
        attr.name = children[0].name
        attr.token = children[0].token
    if prod.lhs == "exp-item":
        attr.type = children[0].type
    elif prod.lhs == "exp-list":
        if len(children) == 1:
            attr.arg_types = [children[0].type]
        else:
            attr.arg_types = children[0].arg_types + [children[2].type]
    if prod.lhs == "proc-call" and symbols is not None:
        name_tok = children[0].token
        args = children[2].arg_types if len(children) > 1 else []
        _check_call(symbols, name_tok, args)
    return attr


def _check_call(symbols: SymbolTable, name_tok: Token, arg_types: List[str]) -> None:
    entry = symbols.find(name_tok.lexeme, "MAIN_PROGRAM")
    if entry is None or entry.type != "PROCEDURE":
        raise ParseError("call of undeclared procedure %s" % name_tok.lexeme,
                         name_tok.line, name_tok.pos)
    params = symbols.params_of(name_tok.lexeme)
    if len(params) != len(arg_types):
        raise ParseError(
            "procedure %s expects %d argument(s), got %d"
            % (name_tok.lexeme, len(params), len(arg_types)),
            name_tok.line, name_tok.pos)
    for param, arg_type in zip(params, arg_types):
        if param.type != arg_type:
            raise ParseError(
                "argument type %s does not match parameter %s: %s of "
                "procedure %s" % (arg_type, param.name, param.type,
                                  name_tok.lexeme),
                name_tok.line, name_tok.pos)


def render_derivation(events: List[DerivationEvent]) -> str:
    return "".join(
        "%s : %s -> %s\n" % (e.lookahead_lexeme, e.production.lhs,
                             " ".join(e.production.rhs))
        for e in events)
