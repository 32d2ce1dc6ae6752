"""Grammar loading, First/Follow sets and SLR(1) table construction.

The grammar file is plain text: `->` separates a rule's left side from the
right, `|` introduces alternatives, symbols are whitespace-separated and
`#` starts a comment line.  Any name that never appears on a left side is a
terminal.  The loaded grammar is augmented with S' -> <start> as production
0; the grammar has no epsilon productions, which the fixpoint computations
below rely on.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Optional, Set, Tuple

AUGMENTED_START = "S'"
END_MARKER = "$"


class GrammarError(Exception):
    pass


@dataclass(frozen=True)
class Production:
    index: int
    lhs: str
    rhs: Tuple[str, ...]

    def __str__(self) -> str:
        return "%s -> %s" % (self.lhs, " ".join(self.rhs))


# An LR(0) item is (production index, dot position).
Item = Tuple[int, int]


@dataclass
class Grammar:
    productions: List[Production]
    nonterminals: Set[str]
    terminals: Set[str]
    start: str  # user start symbol, rhs of the augmented production

    def by_lhs(self, name: str) -> List[Production]:
        return [p for p in self.productions if p.lhs == name]

    def item_str(self, item: Item) -> str:
        prod = self.productions[item[0]]
        rhs = list(prod.rhs)
        rhs.insert(item[1], ".")
        return "%s -> %s" % (prod.lhs, " ".join(rhs))


@dataclass
class DfaState:
    id: int
    items: FrozenSet[Item]
    shift: Dict[str, int] = field(default_factory=dict)
    goto: Dict[str, int] = field(default_factory=dict)
    reduce: Dict[str, int] = field(default_factory=dict)


@dataclass
class Conflict:
    state: int
    terminal: str
    shift_state: int
    production: int


@dataclass
class ParseTables:
    grammar: Grammar
    first: Dict[str, Set[str]]
    follow: Dict[str, Set[str]]
    states: List[DfaState]
    conflicts: List[Conflict]


def load_grammar(text: str) -> Grammar:
    rules: List[str] = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "->" in line:
            rules.append(line)
        else:
            if not rules:
                raise GrammarError("rule continuation before any rule: %r" % line)
            rules[-1] += " " + line

    productions: List[Production] = []
    seen: Set[Tuple[str, Tuple[str, ...]]] = set()
    lhs_order: List[str] = []
    for rule in rules:
        lhs, rhs_text = rule.split("->", 1)
        lhs = lhs.strip()
        if not lhs:
            raise GrammarError("rule with empty left side: %r" % rule)
        if lhs not in lhs_order:
            lhs_order.append(lhs)
        for alt in rhs_text.split("|"):
            rhs = tuple(alt.split())
            if not rhs:
                raise GrammarError("empty right-hand side in rule for %s" % lhs)
            if (lhs, rhs) in seen:
                raise GrammarError("duplicate production: %s -> %s" % (lhs, " ".join(rhs)))
            seen.add((lhs, rhs))
            productions.append(Production(len(productions) + 1, lhs, rhs))

    start = lhs_order[0]
    productions.insert(0, Production(0, AUGMENTED_START, (start,)))
    nonterminals = {p.lhs for p in productions}
    terminals = {s for p in productions for s in p.rhs} - nonterminals
    return Grammar(productions, nonterminals, terminals, start)


def compute_first(g: Grammar) -> Dict[str, Set[str]]:
    first: Dict[str, Set[str]] = {n: set() for n in g.nonterminals}
    changed = True
    while changed:
        changed = False
        for p in g.productions:
            head = p.rhs[0]
            add = {head} if head in g.terminals else first[head]
            if not add <= first[p.lhs]:
                first[p.lhs] |= add
                changed = True
    return first


def compute_follow(g: Grammar, first: Dict[str, Set[str]]) -> Dict[str, Set[str]]:
    follow: Dict[str, Set[str]] = {n: set() for n in g.nonterminals}
    follow[AUGMENTED_START].add(END_MARKER)
    follow[g.start].add(END_MARKER)
    changed = True
    while changed:
        changed = False
        for p in g.productions:
            for i, sym in enumerate(p.rhs):
                if sym not in g.nonterminals:
                    continue
                if i + 1 < len(p.rhs):
                    nxt = p.rhs[i + 1]
                    add = {nxt} if nxt in g.terminals else first[nxt]
                else:
                    add = follow[p.lhs]
                if not add <= follow[sym]:
                    follow[sym] |= add
                    changed = True
    return follow


def closure(g: Grammar, items: Set[Item]) -> FrozenSet[Item]:
    result = set(items)
    work = list(items)
    while work:
        pi, dot = work.pop()
        rhs = g.productions[pi].rhs
        if dot < len(rhs) and rhs[dot] in g.nonterminals:
            for p in g.by_lhs(rhs[dot]):
                item = (p.index, 0)
                if item not in result:
                    result.add(item)
                    work.append(item)
    return frozenset(result)


def _transition_symbols(g: Grammar, items: FrozenSet[Item]) -> List[str]:
    # first-appearance order over the sorted item set keeps state numbering
    # deterministic across runs
    symbols: List[str] = []
    for pi, dot in sorted(items):
        rhs = g.productions[pi].rhs
        if dot < len(rhs) and rhs[dot] not in symbols:
            symbols.append(rhs[dot])
    return symbols


def build_dfa(g: Grammar, follow: Dict[str, Set[str]]) -> Tuple[List[DfaState], List[Conflict]]:
    """Construct the LR(0) item-set automaton with SLR(1) actions.

    The transition on the augmented start symbol is not taken: the parser
    accepts on reducing the start production, so the state holding only
    S' -> <start> . would be unreachable at run time.
    Shift-reduce overlaps are recorded and resolved in favor of the shift;
    a reduce-reduce overlap fails the construction.
    """
    start_items = closure(g, {(0, 0)})
    states = [DfaState(0, start_items)]
    index: Dict[FrozenSet[Item], int] = {start_items: 0}

    i = 0
    while i < len(states):
        state = states[i]
        for sym in _transition_symbols(g, state.items):
            if sym == g.start and (0, 0) in state.items:
                continue  # dead accept state, see docstring
            kernel = {
                (pi, dot + 1)
                for pi, dot in state.items
                if dot < len(g.productions[pi].rhs) and g.productions[pi].rhs[dot] == sym
            }
            nxt = closure(g, kernel)
            if nxt not in index:
                index[nxt] = len(states)
                states.append(DfaState(len(states), nxt))
            if sym in g.terminals:
                state.shift[sym] = index[nxt]
            else:
                state.goto[sym] = index[nxt]
        i += 1

    conflicts: List[Conflict] = []
    for state in states:
        for pi, dot in sorted(state.items):
            prod = g.productions[pi]
            if dot != len(prod.rhs) or pi == 0:
                continue
            for term in sorted(follow[prod.lhs]):
                if term in state.shift:
                    conflicts.append(Conflict(state.id, term, state.shift[term], pi))
                    continue  # resolved in favor of the shift
                if term in state.reduce and state.reduce[term] != pi:
                    raise GrammarError(
                        "reduce-reduce conflict in state %d on %r: %s vs %s"
                        % (state.id, term,
                           g.productions[state.reduce[term]], prod))
                state.reduce[term] = pi
    return states, conflicts


def build_tables(text: str) -> ParseTables:
    g = load_grammar(text)
    first = compute_first(g)
    follow = compute_follow(g, first)
    states, conflicts = build_dfa(g, follow)
    return ParseTables(g, first, follow, states, conflicts)


def _render_set_listing(name: str, sets: Dict[str, Set[str]], order: List[str]) -> List[str]:
    lines = []
    for nt in order:
        members = sorted(sets[nt])
        lines.append("%s(%s) = { %s }" % (name, nt, " , ".join(members)))
    return lines


def render_grammar_dump(tables: ParseTables) -> str:
    """Full dump: First/Follow listings then every DFA state."""
    g = tables.grammar
    order = []
    for p in g.productions[1:]:
        if p.lhs not in order:
            order.append(p.lhs)
    lines: List[str] = []
    lines.extend(_render_set_listing("First", tables.first, order))
    lines.append("")
    lines.extend(_render_set_listing("Follow", tables.follow, order))
    lines.append("")
    lines.append("%d DFA states" % len(tables.states))
    lines.append("")
    for state in tables.states:
        lines.append("State %d" % state.id)
        for item in sorted(state.items):
            lines.append("    %s" % g.item_str(item))
        if state.shift:
            lines.append("  Shift transitions: " + " , ".join(
                "%s : %d" % (t, s) for t, s in sorted(state.shift.items())))
        if state.reduce:
            lines.append("  Reduce transitions: " + " , ".join(
                "%s : %s" % (t, g.productions[p])
                for t, p in sorted(state.reduce.items())))
        if state.goto:
            lines.append("  Goto transitions: " + " , ".join(
                "%s : %d" % (n, s) for n, s in sorted(state.goto.items())))
        lines.append("")
    return "\n".join(lines) + "\n"
