"""Reference tree-walking interpreter used as a semantic oracle.

The interpreter is built independently of the code generator: it
constructs an abstract syntax tree through the ``ParseSink`` interface
and evaluates it directly, mirroring the observable semantics of the
generated assembly:

* 32-bit two's-complement wrapping arithmetic,
* division truncating toward zero,
* arithmetic booleans (OR adds, AND multiplies, any non-zero is true),
* static storage per symbol (literals occupy writable words, so a
  reference parameter bound to a literal can mutate that occurrence),
* run-time traps that print one diagnostic string and stop the program.

Test code compiles a program, runs it on the virtual machine, and
compares the output with :func:`run_source` from this module.
"""

from __future__ import annotations

from typing import Dict, List, Optional, Tuple

from lxgc.parser import ParseSink, parse
from lxgc.preparser import SymbolEntry, SymbolTable, preparse
from lxgc.scanner import scan_source
from lxgc.tokens import Token

MESSAGES = {
    "div_zero": "LXG run-time error: Division by zero",
    "neg_exponent": "LXG run-time error: Negative exponent",
    "low_bound": "LXG run-time error: Array index out of range (index < 0)",
    "up_bound": "LXG run-time error: Array index out of range (index > top)",
    "zero_index":
        "LXG run-time error: Writing to the zero-index element of an array",
    "zero_denom": "LXG run-time error: A zero denominator used by FOR-DO loop",
    "recursion": "LXG run-time error: Recursive function call",
}

LIBRARY = ("READC", "READN", "WRITEC", "WRITEN", "WRITES", "SPACE", "LINE")


def wrap(v: int) -> int:
    return ((v + 0x80000000) & 0xFFFFFFFF) - 0x80000000


class Trap(Exception):
    def __init__(self, key: str):
        super().__init__(MESSAGES[key])
        self.message = MESSAGES[key]


class Cell:
    __slots__ = ("value",)

    def __init__(self, value):
        self.value = value


class AstBuilder(ParseSink):
    """Parser sink that assembles statement/expression trees.

    Nodes are plain tuples tagged by their first element.  Identifier
    nodes hold the resolved :class:`SymbolEntry`; literal nodes hold a
    :class:`Cell` so that each source occurrence has one storage word,
    matching the constant pool of the generated assembly.
    """

    def __init__(self, symbols: SymbolTable):
        self.symbols = symbols
        self.stack: List[object] = []
        self.procs: Dict[str, tuple] = {}
        self.main: Optional[tuple] = None
        self.current_proc: Optional[str] = None
        self._expect_name = False

    # -- sink interface ------------------------------------------------

    def shift(self, token: Token) -> None:
        if self._expect_name:
            self.current_proc = token.lexeme
            self._expect_name = False
        if token.reserved_word == "PROCEDURE":
            self._expect_name = True
        self.stack.append(token)

    def reduce(self, production, token: Token) -> None:
        n = len(production.rhs)
        kids = self.stack[len(self.stack) - n:]
        del self.stack[len(self.stack) - n:]
        self.stack.append(self._make(production, kids))

    # -- node construction ----------------------------------------------

    def _entry(self, tok: Token) -> SymbolEntry:
        entry = self.symbols.resolve(tok.lexeme, self.current_proc)
        assert entry is not None, tok.lexeme
        return entry

    def _make(self, prod, kids):
        lhs, rhs = prod.lhs, tuple(prod.rhs)
        if lhs == "program":
            self.main = ("block", kids[1])
            return None
        if lhs == "prgm-body":
            return kids[-1]
        if lhs == "stmt-list":
            return [kids[0]] if len(kids) == 1 else kids[0] + [kids[2]]
        if lhs == "stmt":
            return self._stmt(rhs, kids)
        if lhs == "for-list":
            return [kids[0]] if len(kids) == 1 else kids[0] + [kids[2]]
        if lhs == "for-item":
            if len(kids) == 1:
                return ("scalar", kids[0])
            return ("range", kids[0], kids[2])
        if lhs == "proc-call":
            args = kids[2] if len(kids) > 1 else []
            return ("call", kids[0], args)
        if lhs == "exp-list":
            return [kids[0]] if len(kids) == 1 else kids[0] + [kids[2]]
        if lhs == "exp-item":
            return kids[0]
        if lhs == "int-exp" or lhs == "int-term":
            if len(kids) == 1:
                return kids[0]
            return ("bin", kids[1].lexeme, kids[0], kids[2])
        if lhs == "int-fact":
            if len(kids) == 1:
                return kids[0]
            if rhs[0] == "+":
                return kids[1]
            if rhs[0] == "-":
                return ("neg", kids[1])
            return ("pow", kids[0], kids[2])
        if lhs == "int-prim":
            if rhs == ("number",):
                return ("cell", Cell(int(kids[0].lexeme)))
            if len(kids) == 3:
                return kids[1]
            return kids[0]
        if lhs == "int-dest":
            if len(kids) == 1:
                return kids[0]
            return ("elem", kids[0][1], kids[2])
        if lhs in ("int-ident", "bool-ident", "str-ident"):
            return ("var", self._entry(kids[0]))
        if lhs == "arr-ident":
            return ("arr", self._entry(kids[0]))
        if lhs == "bool-exp":
            if len(kids) == 1:
                return kids[0]
            return ("bin", "or", kids[0], kids[2])
        if lhs == "bool-term":
            if len(kids) == 1:
                return kids[0]
            return ("bin", "and", kids[0], kids[2])
        if lhs == "bool-fact":
            return kids[0] if len(kids) == 1 else ("not", kids[1])
        if lhs == "bool-prim":
            if rhs == ("boolean",):
                return ("cell", Cell(1 if kids[0].lexeme == "TRUE" else 0))
            if len(kids) == 3:
                return kids[1]
            return kids[0]
        if lhs == "bool-reln":
            if len(kids) == 3:
                return ("reln", kids[1].lexeme, kids[0], kids[2])
            # int-exp =|# int-exp MOD int-exp
            return ("modeq", kids[1].lexeme, kids[0], kids[2], kids[4])
        if lhs == "str-exp":
            if rhs == ("string",):
                return ("cell", Cell(kids[0].lexeme))
            return kids[0]
        if lhs == "proc-ident":
            return kids[0].lexeme
        if lhs == "proc-head":
            return kids[0]
        if lhs == "proc-decl":
            self.procs[kids[1]] = ("block", kids[3])
            self.current_proc = None
            return None
        if lhs in ("ident-list", "ident-item"):
            return None
        raise AssertionError("unhandled production %s" % prod)

    def _stmt(self, rhs, kids):
        if rhs[0] == "BEGIN":
            return ("block", kids[1])
        if rhs[0] == "FOR":
            return ("for", kids[1], kids[3], kids[5])
        if rhs[0] == "WHILE":
            return ("while", kids[1], kids[3])
        if rhs[0] == "IF":
            return ("if", kids[1], kids[3], kids[5] if len(kids) == 6 else None)
        if rhs[0] == "REM":
            return ("divmod", None, kids[1], kids[3], kids[5])
        if rhs == ("proc-call",):
            return kids[0]
        if len(rhs) == 7:  # int-dest REM int-dest := e / e
            return ("divmod", kids[0], kids[2], kids[4], kids[6])
        if len(rhs) == 5:  # int-dest := e / e
            return ("divmod", kids[0], None, kids[2], kids[4])
        if rhs[1] == ":=:":
            return ("swap", kids[0], kids[2])
        return ("assign", kids[0], kids[2])


class Evaluator:
    def __init__(self, symbols: SymbolTable, procs: Dict[str, tuple],
                 stdin: str = ""):
        self.symbols = symbols
        self.procs = procs
        self.stdin = stdin
        self.pos = 0
        self.out: List[str] = []
        self.active: set = set()
        self.cells: Dict[Tuple[str, str], object] = {}
        self.bindings: Dict[Tuple[str, str], object] = {}
        for e in symbols.declared():
            if e.type == "PROCEDURE" or e.is_library:
                continue
            key = (e.name, e.location)
            if e.type == "ARRAY":
                self.cells[key] = [e.array_size] + [0] * e.array_size
            elif e.type == "STRING":
                self.cells[key] = Cell("")
            else:
                self.cells[key] = Cell(0)

    # -- storage ---------------------------------------------------------

    def _storage(self, entry: SymbolEntry):
        key = (entry.name, entry.location)
        if entry.is_param and not entry.is_value:
            return self.bindings[key]
        return self.cells[key]

    def _array(self, entry: SymbolEntry) -> list:
        store = self._storage(entry)
        assert isinstance(store, list)
        return store

    def _elem_read(self, entry: SymbolEntry, idx: int) -> int:
        arr = self._array(entry)
        if idx < 0:
            raise Trap("low_bound")
        if idx > arr[0]:
            raise Trap("up_bound")
        return arr[idx]

    def _elem_write(self, entry: SymbolEntry, idx: int, value: int) -> None:
        arr = self._array(entry)
        if idx < 0:
            raise Trap("low_bound")
        if idx == 0:
            raise Trap("zero_index")
        if idx > arr[0]:
            raise Trap("up_bound")
        arr[idx] = value

    def read(self, dest) -> object:
        tag = dest[0]
        if tag == "cell":
            return dest[1].value
        if tag == "var":
            return self._storage(dest[1]).value
        if tag == "elem":
            return self._elem_read(dest[1], self.eval(dest[2]))
        raise AssertionError(dest)

    def write(self, dest, value) -> None:
        tag = dest[0]
        if tag == "var":
            self._storage(dest[1]).value = value
        elif tag == "elem":
            self._elem_write(dest[1], self.eval(dest[2]), value)
        else:
            raise AssertionError(dest)

    # -- expressions -------------------------------------------------------

    def eval(self, node) -> object:
        tag = node[0]
        if tag in ("cell", "var", "elem"):
            return self.read(node)
        if tag == "bin":
            op, a, b = node[1], self.eval(node[2]), self.eval(node[3])
            if op == "+" or op == "or":
                return wrap(a + b)
            if op == "-":
                return wrap(a - b)
            return wrap(a * b)  # * and AND
        if tag == "neg":
            return wrap(0 - self.eval(node[1]))
        if tag == "pow":
            base = self.eval(node[1])
            exp = self.eval(node[2])
            if exp < 0:
                raise Trap("neg_exponent")
            acc = 1
            for _ in range(exp):
                acc = wrap(acc * base)
            return acc
        if tag == "not":
            return 1 if self.eval(node[1]) == 0 else 0
        if tag == "reln":
            op, a, b = node[1], self.eval(node[2]), self.eval(node[3])
            return 1 if {"<": a < b, "<=": a <= b, "=": a == b,
                         ">=": a >= b, ">": a > b, "#": a != b}[op] else 0
        if tag == "modeq":
            a = self.eval(node[2])
            b = self.eval(node[3])
            c = self.eval(node[4])
            d = wrap(a - b)
            if c == 0:
                raise Trap("div_zero")
            q = wrap(int(d / c))
            r = wrap(d - wrap(c * q))
            return 1 if (r == 0) == (node[1] == "=") else 0
        raise AssertionError(node)

    # -- statements ---------------------------------------------------------

    def exec(self, stmt) -> None:
        tag = stmt[0]
        if tag == "block":
            for s in stmt[1]:
                self.exec(s)
        elif tag == "assign":
            value = self.eval(stmt[2])
            self.write(stmt[1], value)
        elif tag == "divmod":
            self._divmod(*stmt[1:])
        elif tag == "swap":
            a = self.read(stmt[1])
            b = self.read(stmt[2])
            self.write(stmt[1], b)
            self.write(stmt[2], a)
        elif tag == "if":
            if self.eval(stmt[1]) != 0:
                self.exec(stmt[2])
            elif stmt[3] is not None:
                self.exec(stmt[3])
        elif tag == "while":
            while self.eval(stmt[1]) != 0:
                self.exec(stmt[2])
        elif tag == "for":
            self._for(stmt[1], stmt[2], stmt[3])
        elif tag == "call":
            self._call(stmt[1], stmt[2])
        else:
            raise AssertionError(stmt)

    def _divmod(self, qdest, rdest, num, den) -> None:
        n = self.eval(num)
        d = self.eval(den)
        if d == 0:
            raise Trap("div_zero")
        q = wrap(int(n / d))
        if qdest is not None:
            self.write(qdest, q)
        if rdest is not None:
            self.write(rdest, wrap(n - wrap(d * q)))

    def _for(self, dest, items, body) -> None:
        # An element destination is addressed once, before the loop,
        # with the usual write checks applied at that point.
        if dest[0] == "elem":
            arr = self._array(dest[1])
            idx = self.eval(dest[2])
            if idx < 0:
                raise Trap("low_bound")
            if idx == 0:
                raise Trap("zero_index")
            if idx > arr[0]:
                raise Trap("up_bound")

            def get():
                return arr[idx]

            def put(v):
                arr[idx] = v
        else:
            cell = self._storage(dest[1])

            def get():
                return cell.value

            def put(v):
                cell.value = v

        step = 1
        for k, item in enumerate(items):
            if item[0] == "scalar":
                put(self.eval(item[1]))
                self.exec(body)
                continue
            start, end = item[1], item[2]
            value = self.eval(start)
            if k > 0:
                step = wrap(value - get())
                if step == 0:
                    raise Trap("zero_denom")
            put(value)
            # A plain word operand (variable or literal) is re-read on
            # every test; a computed bound is captured once.
            dynamic = end[0] == "cell" or (
                end[0] == "var"
                and not (end[1].is_param and not end[1].is_value))
            fixed = None if dynamic else self.eval(end)

            def bound():
                return self.eval(end) if dynamic else fixed

            if step > 0:
                while get() <= bound():
                    self.exec(body)
                    put(wrap(get() + step))
            else:
                while get() >= bound():
                    self.exec(body)
                    put(wrap(get() + step))

    # -- procedure calls -----------------------------------------------------

    def _call(self, name: str, args: List[tuple]) -> None:
        if name in LIBRARY:
            self._library(name, args)
            return
        if name in self.active:
            raise Trap("recursion")
        params = self.symbols.params_of(name)
        targets = [self._argument(a) for a in args]
        for param, target in zip(params, targets):
            key = (param.name, param.location)
            if param.is_value:
                self.cells[key].value = target.value
            else:
                self.bindings[key] = target
        self.active.add(name)
        try:
            self.exec(self.procs[name])
        finally:
            self.active.discard(name)

    def _argument(self, node):
        """Resolve one actual argument the way the caller's push does:
        plain variables and literals pass their own storage word,
        arrays pass their base, anything computed goes through a
        scratch word."""
        tag = node[0]
        if tag == "var":
            return self._storage(node[1])
        if tag == "cell":
            return node[1]
        if tag == "arr":
            return self._array(node[1])
        return Cell(self.eval(node))

    def _library(self, name: str, args: List[tuple]) -> None:
        if name == "READN":
            self._argument(args[0]).value = self._read_number()
        elif name == "READC":
            ch = self.stdin[self.pos] if self.pos < len(self.stdin) else "\0"
            self.pos += 1
            self._argument(args[0]).value = ord(ch)
        elif name == "WRITEC":
            self.out.append(chr(self.eval(args[0]) & 0xFF))
        elif name == "WRITEN":
            value = self.eval(args[0])
            width = self.eval(args[1])
            text = str(value)
            if width > len(text):
                text += " " * (width - len(text))
            self.out.append(text)
        elif name == "WRITES":
            self.out.append(self.eval(args[0]))
        elif name == "SPACE":
            self.out.append(" " * max(0, self.eval(args[0])))
        elif name == "LINE":
            self.out.append("\n" * max(0, self.eval(args[0])))
        else:  # pragma: no cover
            raise AssertionError(name)

    def _read_number(self) -> int:
        s, i = self.stdin, self.pos
        while i < len(s) and s[i] in " \t\r\n":
            i += 1
        j = i
        if j < len(s) and s[j] == "-":
            j += 1
        while j < len(s) and s[j].isdigit():
            j += 1
        assert j > i and s[i:j] != "-", "no number on standard input"
        self.pos = j
        return wrap(int(s[i:j]))

    def run(self, main: tuple) -> str:
        try:
            self.exec(main)
        except Trap as trap:
            self.out.append(trap.message)
        return "".join(self.out)


def run_source(source: str, tables, library: str, stdin: str = "") -> str:
    """Scan, pre-parse, parse and interpret ``source``; returns stdout."""
    lib_tokens = scan_source(library)
    tokens = scan_source(source)
    stream, symbols = preparse(lib_tokens, tokens)
    builder = AstBuilder(symbols)
    parse(stream, tables, sink=builder, symbols=symbols)
    assert builder.main is not None
    return Evaluator(symbols, builder.procs, stdin).run(builder.main)
