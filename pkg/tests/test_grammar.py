"""Grammar analysis tests: First/Follow sets, DFA size, conflict handling.

The First and Follow sets are pinned twice: once against hand-checked
reference listings, and once against a brute-force oracle that computes
the same sets by graph reachability instead of the iterative fixpoint
used by the implementation.
"""

import pytest

from lxgc.grammar import END_MARKER, build_tables, render_grammar_dump


@pytest.fixture(scope="module")
def grammar(tables):
    return tables.grammar


# Reference First sets, one space-separated string per nonterminal.
FIRST_SETS = {
    "program": "bof",
    "prgm-body": "PROCEDURE BEGIN FOR WHILE IF REM "
                 "bIdentifier sIdentifier aIdentifier iIdentifier uIdentifier",
    "stmt-list": "BEGIN FOR WHILE IF REM "
                 "bIdentifier sIdentifier aIdentifier iIdentifier uIdentifier",
    "stmt": "BEGIN FOR WHILE IF REM "
            "bIdentifier sIdentifier aIdentifier iIdentifier uIdentifier",
    "for-list": "+ - ( number aIdentifier iIdentifier",
    "for-item": "+ - ( number aIdentifier iIdentifier",
    "proc-call": "uIdentifier",
    "exp-list": "string aIdentifier sIdentifier + - NOT ( number boolean "
                "bIdentifier iIdentifier",
    "exp-item": "string aIdentifier sIdentifier + - NOT ( number boolean "
                "bIdentifier iIdentifier",
    "int-exp": "+ - ( number aIdentifier iIdentifier",
    "int-term": "+ - ( number aIdentifier iIdentifier",
    "int-fact": "+ - ( number aIdentifier iIdentifier",
    "int-prim": "( number aIdentifier iIdentifier",
    "int-dest": "aIdentifier iIdentifier",
    "int-ident": "iIdentifier",
    "bool-exp": "NOT ( boolean bIdentifier + - number aIdentifier iIdentifier",
    "bool-term": "NOT ( boolean bIdentifier + - number aIdentifier iIdentifier",
    "bool-fact": "NOT ( boolean bIdentifier + - number aIdentifier iIdentifier",
    "bool-prim": "( boolean bIdentifier + - number aIdentifier iIdentifier",
    "bool-reln": "+ - ( number aIdentifier iIdentifier",
    "bool-ident": "bIdentifier",
    "str-exp": "string sIdentifier",
    "str-ident": "sIdentifier",
    "arr-ident": "aIdentifier",
    "ident-list": "iIdentifier bIdentifier sIdentifier aIdentifier",
    "ident-item": "iIdentifier bIdentifier sIdentifier aIdentifier",
    "proc-decl": "PROCEDURE",
    "proc-head": "uIdentifier",
    "proc-ident": "uIdentifier",
}

# Reference Follow sets.  ",...," is the ellipsis terminal and "," the
# comma terminal.
_STMT_TAIL = "ELSE ; END eof"
_INT_TAIL = ("/ , ,..., + - ) ] < <= = >= > # MOD DO AND THEN OR "
             + _STMT_TAIL)
_BOOL_TAIL = "DO THEN OR ) , " + _STMT_TAIL
FOLLOW_SETS = {
    "program": "$",
    "prgm-body": "eof",
    "stmt-list": "; END eof",
    "stmt": _STMT_TAIL,
    "for-list": "DO ,",
    "for-item": "DO ,",
    "proc-call": _STMT_TAIL,
    "exp-list": ") ,",
    "exp-item": ") ,",
    "int-exp": _INT_TAIL,
    "int-term": "* " + _INT_TAIL,
    "int-fact": "* " + _INT_TAIL,
    "int-prim": "^ * " + _INT_TAIL,
    "int-dest": ":= REM :=: ^ * " + _INT_TAIL,
    "int-ident": ":= REM :=: ^ * " + _INT_TAIL,
    "bool-exp": _BOOL_TAIL,
    "bool-term": "AND " + _BOOL_TAIL,
    "bool-fact": "AND " + _BOOL_TAIL,
    "bool-prim": "AND " + _BOOL_TAIL,
    "bool-reln": "AND " + _BOOL_TAIL,
    "bool-ident": ":= :=: AND " + _BOOL_TAIL,
    "str-exp": ") , " + _STMT_TAIL,
    "str-ident": ":= :=: ) , " + _STMT_TAIL,
    "arr-ident": "[ ) ,",
    "ident-list": ")",
    "ident-item": ", )",
    "proc-decl": ";",
    "proc-head": ";",
    "proc-ident": "( " + _STMT_TAIL,
}


def test_production_count(grammar):
    # 80 written alternatives plus the augmented start production.
    assert len(grammar.productions) == 81
    assert grammar.productions[0].rhs == (grammar.start,)


def test_nonterminal_count(grammar):
    user = grammar.nonterminals - {grammar.productions[0].lhs}
    assert len(user) == 29
    assert user == set(FIRST_SETS)


def test_first_sets(tables):
    for nt, expected in FIRST_SETS.items():
        assert tables.first[nt] == set(expected.split()), nt


def test_follow_sets(tables):
    for nt, expected in FOLLOW_SETS.items():
        assert tables.follow[nt] == set(expected.split()), nt


# -- independent oracle -------------------------------------------------------


def _reachable(edges, seeds):
    """Transitive closure of ``seeds`` over an adjacency dict."""
    out = set()
    work = list(seeds)
    while work:
        node = work.pop()
        if node in out:
            continue
        out.add(node)
        work.extend(edges.get(node, ()))
    return out


def oracle_first(grammar):
    """First sets by reachability: with no empty right-hand sides,
    First(A) is exactly the set of terminals reachable from A along
    edges A -> rhs[0]."""
    starts = {}
    for prod in grammar.productions:
        starts.setdefault(prod.lhs, set()).add(prod.rhs[0])
    return {
        nt: {s for s in _reachable(starts, starts[nt]) if s in grammar.terminals}
        for nt in grammar.nonterminals
    }


def oracle_follow(grammar, first):
    """Follow sets by reachability over 'inherits follow of' edges.

    A terminal lands in Follow(A) directly when some production has a
    symbol right after A (its First is added); a production B -> ... A
    makes Follow(A) inherit Follow(B).
    """
    direct = {nt: set() for nt in grammar.nonterminals}
    inherit = {nt: set() for nt in grammar.nonterminals}  # nt -> suppliers
    augmented = grammar.productions[0].lhs
    direct[augmented].add(END_MARKER)
    for prod in grammar.productions:
        for i, sym in enumerate(prod.rhs):
            if sym not in grammar.nonterminals:
                continue
            if i + 1 < len(prod.rhs):
                nxt = prod.rhs[i + 1]
                if nxt in grammar.nonterminals:
                    direct[sym] |= first[nxt]
                else:
                    direct[sym].add(nxt)
            else:
                inherit[sym].add(prod.lhs)
    return {
        nt: set().union(*(direct[src]
                          for src in _reachable(inherit, {nt}) | {nt}))
        for nt in grammar.nonterminals
    }


def test_first_sets_against_oracle(tables):
    assert oracle_first(tables.grammar) == tables.first


def test_follow_sets_against_oracle(tables):
    assert oracle_follow(tables.grammar, tables.first) == tables.follow


# -- DFA ----------------------------------------------------------------------


def test_dfa_has_158_states(tables):
    assert len(tables.states) == 158


def test_exactly_one_conflict_resolved_as_shift(tables):
    assert len(tables.conflicts) == 1
    conflict = tables.conflicts[0]
    grammar = tables.grammar
    assert conflict.terminal == "ELSE"
    assert str(grammar.productions[conflict.production]) == \
        "stmt -> IF bool-exp THEN stmt"
    state = tables.states[conflict.state]
    items = {grammar.item_str(item) for item in state.items}
    assert items == {
        "stmt -> IF bool-exp THEN stmt .",
        "stmt -> IF bool-exp THEN stmt . ELSE stmt",
    }
    # resolved in favor of the shift
    assert "ELSE" not in state.reduce
    assert state.shift["ELSE"] == conflict.shift_state


def test_tables_are_deterministic():
    from lxgc.driver import _data_text
    text = _data_text("lxg.grammar")
    a = build_tables(text)
    b = build_tables(text)
    assert len(a.states) == len(b.states)
    for sa, sb in zip(a.states, b.states):
        assert sa.items == sb.items
        assert sa.shift == sb.shift
        assert sa.goto == sb.goto
        assert sa.reduce == sb.reduce
    assert render_grammar_dump(a) == render_grammar_dump(b)


def test_shift_reduce_tables_are_disjoint(tables):
    for state in tables.states:
        assert not (set(state.shift) & set(state.reduce))
