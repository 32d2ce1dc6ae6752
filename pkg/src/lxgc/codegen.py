"""Moon-assembly code generator.

The generator is a parser sink: it mirrors the parse stack with a value
stack of code fragments and weaves statement code at each reduce.  Values
are carried lazily — a fragment may name a memory word (variable slot or
literal slot) and is loaded into a register only when an operator consumes
it, which keeps the emitted code close to hand-written register use.

Registers: R0 is hard-wired zero and doubles as the base for absolute
addressing, R14 is the link register, R15 the stack pointer; R1..R13 are
allocated lowest-free.  IF and WHILE reserve their condition register when
the keyword is shifted so the dispatch block, which is emitted after the
branch bodies, can still test it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

from .grammar import Production
from .parser import ParseSink
from .preparser import MAIN_PROGRAM, SymbolEntry, SymbolTable
from .tokens import Token, TokenKind

HEADER = "%%% Compiled with the LXG compiler %%%"

# run-time error messages, in constant-pool order
RUNTIME_ERRORS = [
    ("ERR_DIV_ZERO", "LXG run-time error: Division by zero"),
    ("ERR_NEG_EXPONENT", "LXG run-time error: Negative exponent"),
    ("ERR_BOT_BOUNDERY", "LXG run-time error: Array index out of range (index < 0)"),
    ("ERR_TOP_BOUNDERY", "LXG run-time error: Array index out of range (index > top)"),
    ("ERR_ZERO_INDEX",
     "LXG run-time error: Writing to the zero-index element of an array"),
    ("ERR_ZERO_DENOM", "LXG run-time error: A zero denominator used by FOR-DO loop"),
    ("ERR_RECURS_CALL", "LXG run-time error: Recursive function call"),
]

# trap label -> error constant, in trap-block order
TRAPS = [
    ("LB_RECURSIVE_CALL", "ERR_RECURS_CALL", "Recursive function call"),
    ("LB_FOR_DO_ZERO_DEN", "ERR_ZERO_DENOM", "FOR-DO zero denominator"),
    ("LB_ARRAY_ZERO_INDEX", "ERR_ZERO_INDEX", "write to array element zero"),
    ("LB_ARRAY_LOW_BOUND", "ERR_BOT_BOUNDERY", "array index below range"),
    ("LB_ARRAY_UP_BOUND", "ERR_TOP_BOUNDERY", "array index above range"),
    ("LB_DIV_ZERO", "ERR_DIV_ZERO", "division by zero"),
    ("LB_NEG_EXPONENT", "ERR_NEG_EXPONENT", "negative exponent"),
]

RELN_OPS = {"<": "clt", "<=": "cle", "=": "ceq", ">=": "cge", ">": "cgt", "#": "cne"}


class CodegenError(Exception):
    def __init__(self, message: str, line: int = 0, pos: int = 0):
        super().__init__(message)
        self.message = message
        self.line = line
        self.pos = pos


# ---------------------------------------------------------------------------
# name pools


class NamePool:
    """Zero-padded generated names: LB_00001, I_00001, S_00001, ..."""

    def __init__(self, prefix: str):
        self.prefix = prefix
        self.count = 0

    def next(self) -> str:
        self.count += 1
        return "%s%05d" % (self.prefix, self.count)


# ---------------------------------------------------------------------------
# stack values


@dataclass
class Frag:
    """A value under construction: pending code plus where the value lives."""
    kind: str                       # INTEGER / BOOLEAN / STRING / ARRAY
    code: List[str] = field(default_factory=list)
    reg: Optional[int] = None       # register holding the value
    locus: Optional[str] = None     # memory word holding the value
    entry: Optional[SymbolEntry] = None   # variable identity (lvalues, params)
    index: Optional["Frag"] = None  # array subscript for element lvalues


@dataclass
class ProcRef:
    name: str
    token: Token


@dataclass
class StmtCode:
    lines: List[str]


@dataclass
class ForItem:
    start: Frag
    end: Optional[Frag]  # None for a scalar item


@dataclass
class _IfFrame:
    lb_then: str
    lb_dispatch: str
    cond_reg: int
    lb_else: Optional[str] = None
    cond_done: bool = False


@dataclass
class _WhileFrame:
    lb_head: str
    lb_dispatch: str
    lb_body: str
    cond_reg: int
    cond_done: bool = False


@dataclass
class _ForFrame:
    lb_calc: str
    lb_body: str


_Frame = Union[_IfFrame, _WhileFrame, _ForFrame]


class _Registers:
    """Lowest-free allocation over R1..R13."""

    def __init__(self):
        self.busy = set()

    def alloc(self, line: int = 0) -> int:
        for r in range(1, 14):
            if r not in self.busy:
                self.busy.add(r)
                return r
        raise CodegenError("expression too complex: out of registers", line)

    def free(self, reg: Optional[int]) -> None:
        if reg is not None:
            self.busy.discard(reg)


# ---------------------------------------------------------------------------
# the generator


class CodeGenerator(ParseSink):
    def __init__(self, symbols: SymbolTable):
        self.symbols = symbols
        self.stack: List[object] = []
        self.ctx: List[_Frame] = []
        self.regs = _Registers()
        self.labels = NamePool("LB_")
        self.ints = NamePool("I_")
        self.strings = NamePool("S_")
        self.regslots = NamePool("REG_")
        self.internal_slots: List[str] = []      # scratch words, emitted as res 4
        self._placeholders: List[str] = []
        self.array_addr_slots: Dict[str, str] = {}  # array slot -> dw-of-address slot
        self.procedures: List[List[str]] = []
        self.proc_names: List[str] = []
        self.main_code: Optional[List[str]] = None
        self.current_proc: Optional[str] = None
        self._expect_proc_name = False
        self._block_depth = 0
        self._line = 0

    # -- parser sink interface ---------------------------------------------

    def shift(self, token: Token) -> None:
        self._line = token.line
        word = token.reserved_word
        if self._expect_proc_name:
            self.current_proc = token.lexeme
            self._expect_proc_name = False
        if word == "PROCEDURE":
            self._expect_proc_name = True
        elif word == "BEGIN":
            self._block_depth += 1
        elif word == "END":
            if self._block_depth > 0:
                self._block_depth -= 1
            else:
                self.current_proc = None
        elif word == "IF":
            self.ctx.append(_IfFrame(self.labels.next(), self.labels.next(),
                                     self.regs.alloc(token.line)))
        elif word == "WHILE":
            self.ctx.append(_WhileFrame(self.labels.next(), self.labels.next(),
                                        self.labels.next(),
                                        self.regs.alloc(token.line)))
        elif word == "FOR":
            self.ctx.append(_ForFrame(self.labels.next(), self.labels.next()))
        elif word in ("THEN", "DO"):
            self._fix_condition()
        elif word == "ELSE":
            frame = self.ctx[-1]
            assert isinstance(frame, _IfFrame)
            frame.lb_else = self.labels.next()
        self.stack.append(token)

    def reduce(self, production: Production, token: Optional[Token]) -> None:
        if token is not None:
            self._line = token.line
        n = len(production.rhs)
        children = self.stack[len(self.stack) - n:]
        del self.stack[len(self.stack) - n:]
        self.stack.append(self._make(production, children))

    # -- helpers -------------------------------------------------------------

    def _slot(self, entry: SymbolEntry) -> str:
        if entry.location == MAIN_PROGRAM:
            return entry.name
        return "%s_%s" % (entry.location, entry.name)

    def _is_ref_param(self, entry: SymbolEntry) -> bool:
        return entry.is_param and not entry.is_value

    def _new_internal_slot(self) -> str:
        # placeholder; scratch words are numbered after every literal
        # temporary once the whole program has been seen (see output())
        name = "@TMP%d@" % len(self._placeholders)
        self._placeholders.append(name)
        self.internal_slots.append(name)
        return name

    def _array_base_slot(self, entry: SymbolEntry) -> str:
        """A word holding the array's base address, for indirect access."""
        if self._is_ref_param(entry):
            return self._slot(entry)
        slot = self._slot(entry)
        if slot not in self.array_addr_slots:
            name = "@TMP%d@" % len(self._placeholders)
            self._placeholders.append(name)
            self.array_addr_slots[slot] = name
        return self.array_addr_slots[slot]

    def force(self, code: List[str], frag: Frag) -> int:
        """Load the fragment's value into a register.

        frag.code must already have been copied into `code`; the load is
        appended at the current end so a register allocated now is not
        clobbered by instructions generated (and freed) earlier.  Loads are
        pure reads, so deferring them past sibling expression code is safe.
        """
        if frag.reg is not None:
            return frag.reg
        frag.reg = self.regs.alloc(self._line)
        if frag.locus is not None:
            code.append("   lw R%d,%s(R0)" % (frag.reg, frag.locus))
        else:
            entry = frag.entry
            assert entry is not None and self._is_ref_param(entry)
            code.append("   lw R%d,%s(R0)" % (frag.reg, self._slot(entry)))
            code.append("   lw R%d,0(R%d)" % (frag.reg, frag.reg))
        return frag.reg

    def _rvalue(self, frag: Frag) -> Frag:
        """Convert a variable-designator fragment into a value fragment."""
        entry = frag.entry
        if entry is None:
            return frag
        if frag.index is not None:
            return self._read_element(frag)
        if self._is_ref_param(entry):
            return frag  # materialized lazily, with indirection
        out = Frag(frag.kind, list(frag.code), locus=self._slot(entry))
        return out

    def _read_element(self, frag: Frag) -> Frag:
        """Array element read with bound checks; index 0 reads the size word."""
        entry, idx = frag.entry, frag.index
        code = list(idx.code)
        ri = self.force(code, idx)
        rt = self.regs.alloc(self._line)
        code.append("   clt R%d,R%d,R0" % (rt, ri))
        code.append("   bnz R%d,LB_ARRAY_LOW_BOUND" % rt)
        self._load_size(code, entry, rt)
        code.append("   cgt R%d,R%d,R%d" % (rt, ri, rt))
        code.append("   bnz R%d,LB_ARRAY_UP_BOUND" % rt)
        self.regs.free(rt)
        code.append("   add R%d,R%d,R%d" % (ri, ri, ri))
        code.append("   add R%d,R%d,R%d" % (ri, ri, ri))
        if self._is_ref_param(entry):
            rb = self.regs.alloc(self._line)
            code.append("   lw R%d,%s(R0)" % (rb, self._slot(entry)))
            code.append("   add R%d,R%d,R%d" % (ri, rb, ri))
            self.regs.free(rb)
            code.append("   lw R%d,0(R%d)" % (ri, ri))
        else:
            code.append("   lw R%d,%s(R%d)" % (ri, self._slot(entry), ri))
        return Frag("INTEGER", code, reg=ri)

    def _load_size(self, code: List[str], entry: SymbolEntry, rt: int) -> None:
        """Load the array's size word into rt."""
        code.append("   lw R%d,%s(R0)" % (rt, self._slot(entry)))
        if self._is_ref_param(entry):
            code.append("   lw R%d,0(R%d)" % (rt, rt))

    # accessor = ("direct", slot) | ("reg", addr_reg) | ("slot", addr_slot)
    def _prepare_lvalue(self, code: List[str], frag: Frag,
                        want_slot: bool = False):
        entry = frag.entry
        assert entry is not None
        if frag.index is None:
            if self._is_ref_param(entry):
                return ("indirect", self._slot(entry))
            return ("direct", self._slot(entry))
        # array element: compute the address, with write checks
        idx = frag.index
        code += idx.code
        ri = self.force(code, idx)
        rt = self.regs.alloc(self._line)
        code.append("   clt R%d,R%d,R0" % (rt, ri))
        code.append("   bnz R%d,LB_ARRAY_LOW_BOUND" % rt)
        code.append("   bz R%d,LB_ARRAY_ZERO_INDEX" % ri)
        self._load_size(code, entry, rt)
        code.append("   cgt R%d,R%d,R%d" % (rt, ri, rt))
        code.append("   bnz R%d,LB_ARRAY_UP_BOUND" % rt)
        code.append("   add R%d,R%d,R%d" % (ri, ri, ri))
        code.append("   add R%d,R%d,R%d" % (ri, ri, ri))
        code.append("   lw R%d,%s(R0)" % (rt, self._array_base_slot(entry)))
        code.append("   add R%d,R%d,R%d" % (ri, rt, ri))
        self.regs.free(rt)
        if want_slot:
            slot = self._new_internal_slot()
            code.append("   sw %s(R0),R%d" % (slot, ri))
            self.regs.free(ri)
            return ("indirect", slot)
        return ("reg", ri)

    def _load_accessor(self, code: List[str], access) -> int:
        kind, where = access[0], access[1]
        r = self.regs.alloc(self._line)
        if kind == "direct":
            code.append("   lw R%d,%s(R0)" % (r, where))
        elif kind == "indirect":
            code.append("   lw R%d,%s(R0)" % (r, where))
            code.append("   lw R%d,0(R%d)" % (r, r))
        else:  # reg
            code.append("   lw R%d,0(R%d)" % (r, where))
        return r

    def _store_accessor(self, code: List[str], access, rs: int) -> None:
        kind, where = access[0], access[1]
        if kind == "direct":
            code.append("   sw %s(R0),R%d" % (where, rs))
        elif kind == "indirect":
            rt = self.regs.alloc(self._line)
            code.append("   lw R%d,%s(R0)" % (rt, where))
            code.append("   sw 0(R%d),R%d" % (rt, rs))
            self.regs.free(rt)
        else:  # reg
            code.append("   sw 0(R%d),R%d" % (where, rs))

    def _release(self, access) -> None:
        if access[0] == "reg":
            self.regs.free(access[1])

    def _fix_condition(self) -> None:
        """At THEN/DO, park the finished condition in the reserved register."""
        if not self.ctx:
            return
        frame = self.ctx[-1]
        if isinstance(frame, _ForFrame) or frame.cond_done:
            return
        frag = self.stack[-1]
        assert isinstance(frag, Frag) and frag.kind == "BOOLEAN"
        if frag.reg is None:
            loaded = Frag(frag.kind, [], locus=frag.locus, entry=frag.entry)
            frag.reg = self._value_into(frag.code, loaded, frame.cond_reg)
            frag.locus = None
        elif frag.reg != frame.cond_reg:
            frag.code.append("   add R%d,R%d,R0" % (frame.cond_reg, frag.reg))
            self.regs.free(frag.reg)
            frag.reg = frame.cond_reg
        frame.cond_done = True

    def _bool_dest(self) -> int:
        """Destination register for a fresh boolean result."""
        for frame in reversed(self.ctx):
            if isinstance(frame, _ForFrame):
                continue
            if not frame.cond_done:
                if not any(isinstance(v, Frag) and v.kind == "BOOLEAN"
                           and v.reg is not None for v in self.stack):
                    return frame.cond_reg
            break
        return self.regs.alloc(self._line)

    # -- reduce dispatch -------------------------------------------------------

    def _make(self, p: Production, kids: Sequence[object]):
        lhs, rhs = p.lhs, p.rhs
        if lhs == "program":
            self._finish(kids[1])
            return None
        if lhs == "prgm-body":
            if rhs[0] == "proc-decl":
                return kids[2]
            return kids[0]
        if lhs == "proc-decl":
            return self._proc_decl(kids)
        if lhs in ("proc-head", "proc-ident"):
            if lhs == "proc-ident":
                tok = kids[0]
                return ProcRef(tok.lexeme, tok)
            return kids[0]  # proc-head -> proc-ident ( ident-list )
        if lhs in ("ident-list", "ident-item", "param-list"):
            return None
        if lhs == "stmt-list":
            if len(rhs) == 1:
                return kids[0]
            joined = kids[0].lines + [""] + kids[2].lines
            return StmtCode(joined)
        if lhs == "stmt":
            return self._stmt(rhs, kids)
        if lhs == "proc-call":
            return self._proc_call(kids)
        if lhs == "exp-list":
            if len(rhs) == 1:
                return [kids[0]]
            return kids[0] + [kids[2]]
        if lhs == "exp-item":
            return kids[0]
        if lhs == "for-list":
            if len(rhs) == 1:
                return [kids[0]]
            return kids[0] + [kids[2]]
        if lhs == "for-item":
            if len(rhs) == 1:
                return ForItem(kids[0], None)
            return ForItem(kids[0], kids[2])
        if lhs == "int-exp":
            if len(rhs) == 1:
                return kids[0]
            return self._int_binop(rhs[1], kids[0], kids[2])
        if lhs == "int-term":
            if len(rhs) == 1:
                return kids[0]
            return self._int_binop(rhs[1], kids[0], kids[2])
        if lhs == "int-fact":
            if len(rhs) == 1:
                return kids[0]
            if rhs[0] == "int-prim":  # power
                return self._power(kids[0], kids[2])
            if rhs[0] == "+":
                return kids[1]
            return self._negate(kids[1])
        if lhs == "int-prim":
            return self._int_prim(rhs, kids)
        if lhs == "int-dest":
            if len(rhs) == 1:
                return kids[0]  # int-ident fragment
            arr = kids[0]
            return Frag("INTEGER", [], entry=arr.entry, index=kids[2])
        if lhs == "arr-ident":
            return self._ident_frag(kids[0], "ARRAY")
        if lhs == "int-ident":
            return self._ident_frag(kids[0], "INTEGER")
        if lhs == "bool-ident":
            return self._ident_frag(kids[0], "BOOLEAN")
        if lhs == "str-ident":
            return self._ident_frag(kids[0], "STRING")
        if lhs == "bool-exp":
            if len(rhs) == 1:
                return kids[0]
            return self._bool_binop("add", kids[0], kids[2])   # OR
        if lhs == "bool-term":
            if len(rhs) == 1:
                return kids[0]
            return self._bool_binop("mul", kids[0], kids[2])   # AND
        if lhs == "bool-fact":
            if len(rhs) == 1:
                return kids[0]
            return self._bool_not(kids[1])
        if lhs == "bool-prim":
            return self._bool_prim(rhs, kids)
        if lhs == "bool-reln":
            return self._bool_reln(rhs, kids)
        if lhs == "str-exp":
            return self._str_exp(rhs, kids)
        raise CodegenError("no code rule for production %s" % p.index, self._line)

    # -- leaves ---------------------------------------------------------------

    def _ident_frag(self, token: Token, kind: str) -> Frag:
        entry = self.symbols.resolve(token.lexeme, self.current_proc)
        if entry is None:
            raise CodegenError("undeclared identifier %r" % token.lexeme,
                               token.line, token.pos)
        return Frag(kind, [], entry=entry)

    def _int_prim(self, rhs, kids) -> Frag:
        if rhs[0] == "number":
            tok = kids[0]
            name = self.ints.next()
            self.symbols.add(SymbolEntry(
                name=name, type="INTEGER", location=MAIN_PROGRAM,
                is_generated=True, gen_value=tok.lexeme, lines=[tok.line]))
            return Frag("INTEGER", [], locus=name)
        if rhs[0] == "(":
            return kids[1]
        return self._rvalue(kids[0])  # int-dest

    def _str_exp(self, rhs, kids) -> Frag:
        if rhs[0] == "string":
            tok = kids[0]
            name = self.strings.next()
            self.symbols.add(SymbolEntry(
                name=name, type="STRING", location=MAIN_PROGRAM,
                is_generated=True, gen_value=tok.lexeme, lines=[tok.line]))
            return Frag("STRING", [], locus=name)
        return self._rvalue(kids[0])  # str-ident

    def _bool_prim(self, rhs, kids) -> Frag:
        if rhs[0] == "boolean":
            locus = "INT_VAL_ONE" if kids[0].lexeme == "TRUE" else "INT_VAL_ZERO"
            return Frag("BOOLEAN", [], locus=locus)
        if rhs[0] == "(":
            return kids[1]
        if rhs[0] == "bool-ident":
            return self._rvalue(kids[0])
        return kids[0]  # bool-reln

    # -- integer operators ------------------------------------------------------

    def _int_binop(self, op_sym: str, a: Frag, b: Frag) -> Frag:
        op = {"+": "add", "-": "sub", "*": "mul"}[op_sym]
        code = list(a.code) + list(b.code)
        ra = self.force(code, a)
        rb = self.force(code, b)
        code.append("   %s R%d,R%d,R%d" % (op, rb, ra, rb))
        self.regs.free(ra)
        return Frag("INTEGER", code, reg=rb)

    def _negate(self, a: Frag) -> Frag:
        code = list(a.code)
        ra = self.force(code, a)
        rz = self.regs.alloc(self._line)
        code.append("   lw R%d,INT_VAL_ZERO(R0)" % rz)
        code.append("   sub R%d,R%d,R%d" % (ra, rz, ra))
        self.regs.free(rz)
        return Frag("INTEGER", code, reg=ra)

    def _power(self, base: Frag, expo: Frag) -> Frag:
        code = list(base.code) + list(expo.code)
        rb = self.force(code, base)
        re = self.force(code, expo)
        acc = self.regs.alloc(self._line)
        one = self.regs.alloc(self._line)
        top = self.labels.next()
        out = self.labels.next()
        code.append("   clt R%d,R%d,R0" % (acc, re))
        code.append("   bnz R%d,LB_NEG_EXPONENT" % acc)
        code.append("   lw R%d,INT_VAL_ONE(R0)" % acc)
        code.append("   lw R%d,INT_VAL_ONE(R0)" % one)
        code.append("%s" % top)
        code.append("   bz R%d,%s" % (re, out))
        code.append("   mul R%d,R%d,R%d" % (acc, acc, rb))
        code.append("   sub R%d,R%d,R%d" % (re, re, one))
        code.append("   j %s" % top)
        code.append("%s" % out)
        self.regs.free(rb)
        self.regs.free(re)
        self.regs.free(one)
        return Frag("INTEGER", code, reg=acc)

    # -- boolean operators ------------------------------------------------------

    def _bool_binop(self, op: str, a: Frag, b: Frag) -> Frag:
        code = list(a.code) + list(b.code)
        ra = self.force(code, a)
        rb = self.force(code, b)
        cond = self._cond_reg_of_innermost()
        dest = cond if cond in (ra, rb) else ra
        code.append("   %s R%d,R%d,R%d" % (op, dest, ra, rb))
        for r in (ra, rb):
            if r != dest:
                self.regs.free(r)
        return Frag("BOOLEAN", code, reg=dest)

    def _cond_reg_of_innermost(self) -> Optional[int]:
        for frame in reversed(self.ctx):
            if isinstance(frame, _ForFrame):
                continue
            return frame.cond_reg
        return None

    def _bool_not(self, a: Frag) -> Frag:
        code = list(a.code)
        ra = self.force(code, a)
        dest = self._bool_dest()
        code.append("   ceq R%d,R%d,R0" % (dest, ra))
        if dest != ra:
            self.regs.free(ra)
        return Frag("BOOLEAN", code, reg=dest)

    def _bool_reln(self, rhs, kids) -> Frag:
        if "MOD" in rhs:
            return self._mod_reln(rhs, kids)
        a, op_tok, b = kids[0], kids[1], kids[2]
        code = list(a.code) + list(b.code)
        ra = self.force(code, a)
        rb = self.force(code, b)
        dest = self._bool_dest()
        code.append("   %s R%d,R%d,R%d" % (RELN_OPS[op_tok.lexeme], dest, ra, rb))
        for r in (ra, rb):
            if r != dest:
                self.regs.free(r)
        return Frag("BOOLEAN", code, reg=dest)

    def _mod_reln(self, rhs, kids) -> Frag:
        # e1 = e2 MOD e3  holds when (e1 - e2) is divisible by e3
        a, b, c = kids[0], kids[2], kids[4]
        negated = rhs[1] == "#"
        code = list(a.code) + list(b.code) + list(c.code)
        ra = self.force(code, a)
        rb = self.force(code, b)
        rc = self.force(code, c)
        code.append("   bz R%d,LB_DIV_ZERO" % rc)
        code.append("   sub R%d,R%d,R%d" % (ra, ra, rb))
        self.regs.free(rb)
        rq = self.regs.alloc(self._line)
        code.append("   div R%d,R%d,R%d" % (rq, ra, rc))
        code.append("   mul R%d,R%d,R%d" % (rq, rc, rq))
        code.append("   sub R%d,R%d,R%d" % (ra, ra, rq))
        self.regs.free(rq)
        self.regs.free(rc)
        dest = self._bool_dest()
        code.append("   %s R%d,R%d,R0" % ("cne" if negated else "ceq", dest, ra))
        if dest != ra:
            self.regs.free(ra)
        return Frag("BOOLEAN", code, reg=dest)

    # -- statements ---------------------------------------------------------------

    def _stmt(self, rhs, kids) -> StmtCode:
        first = rhs[0]
        if first == "int-dest":
            if ":=:" in rhs:
                return self._swap(kids[0], kids[2])
            if "/" in rhs and "REM" not in rhs:
                return self._division(kids[0], None, kids[2], kids[4])
            if rhs[1] == "REM":
                return self._division(kids[0], kids[2], kids[4], kids[6])
            return self._assign(kids[0], kids[2])
        if first == "REM":
            return self._division(None, kids[1], kids[3], kids[5])
        if first in ("bool-ident", "str-ident"):
            if ":=:" in rhs:
                return self._swap(kids[0], kids[2])
            return self._assign(kids[0], kids[2])
        if first == "proc-call":
            return StmtCode(kids[0].code)
        if first == "BEGIN":
            return kids[1]
        if first == "IF":
            return self._if(rhs, kids)
        if first == "WHILE":
            return self._while(kids)
        if first == "FOR":
            return self._for(kids)
        raise CodegenError("no statement rule for %r" % (rhs,), self._line)

    def _assign(self, dest: Frag, value: Frag) -> StmtCode:
        code = list(value.code)
        rv = self.force(code, value)
        access = self._prepare_lvalue(code, dest)
        self._store_accessor(code, access, rv)
        self._release(access)
        self.regs.free(rv)
        return StmtCode(code)

    def _swap(self, a: Frag, b: Frag) -> StmtCode:
        code: List[str] = []
        acc_a = self._prepare_lvalue(code, a)
        acc_b = self._prepare_lvalue(code, b)
        ra = self._load_accessor(code, acc_a)
        rb = self._load_accessor(code, acc_b)
        self._store_accessor(code, acc_a, rb)
        self._store_accessor(code, acc_b, ra)
        self._release(acc_a)
        self._release(acc_b)
        self.regs.free(ra)
        self.regs.free(rb)
        return StmtCode(code)

    def _division(self, qdest: Optional[Frag], rdest: Optional[Frag],
                  num: Frag, den: Frag) -> StmtCode:
        code = list(num.code) + list(den.code)
        ra = self.force(code, num)
        rb = self.force(code, den)
        code.append("   bz R%d,LB_DIV_ZERO" % rb)
        rq = self.regs.alloc(self._line)
        code.append("   div R%d,R%d,R%d" % (rq, ra, rb))
        if rdest is not None:
            rt = self.regs.alloc(self._line)
            code.append("   mul R%d,R%d,R%d" % (rt, rb, rq))
            code.append("   sub R%d,R%d,R%d" % (ra, ra, rt))
            self.regs.free(rt)
        self.regs.free(rb)
        if qdest is not None:
            access = self._prepare_lvalue(code, qdest)
            self._store_accessor(code, access, rq)
            self._release(access)
        if rdest is not None:
            access = self._prepare_lvalue(code, rdest)
            self._store_accessor(code, access, ra)
            self._release(access)
        self.regs.free(rq)
        self.regs.free(ra)
        return StmtCode(code)

    # -- control flow ----------------------------------------------------------

    def _if(self, rhs, kids) -> StmtCode:
        frame = self.ctx.pop()
        assert isinstance(frame, _IfFrame)
        cond: Frag = kids[1]
        then_body: StmtCode = kids[3]
        has_else = len(kids) > 4
        code = list(cond.code)
        code.append("   j %s" % frame.lb_dispatch)
        code.append("%s" % frame.lb_then)
        code.append("%----- IF-THEN branch -----%")
        code += then_body.lines
        if has_else:
            else_body: StmtCode = kids[5]
            lb_join = self.labels.next()
            code.append("   j %s" % lb_join)
            code.append("%s" % frame.lb_else)
            code.append("%----- ELSE branch -----%")
            code += else_body.lines
            code.append("   j %s" % lb_join)
            code.append("%s" % frame.lb_dispatch)
            code.append("   bnz R%d,%s" % (frame.cond_reg, frame.lb_then))
            code.append("   j %s" % frame.lb_else)
            code.append("%s" % lb_join)
        else:
            lb_join = self.labels.next()
            code.append("   j %s" % lb_join)
            code.append("%s" % frame.lb_dispatch)
            code.append("   bnz R%d,%s" % (frame.cond_reg, frame.lb_then))
            code.append("%s" % lb_join)
        self.regs.free(frame.cond_reg)
        return StmtCode(code)

    def _while(self, kids) -> StmtCode:
        frame = self.ctx.pop()
        assert isinstance(frame, _WhileFrame)
        cond: Frag = kids[1]
        body: StmtCode = kids[3]
        code = ["%----- WHILE-DO: WHILE -----%", "%s" % frame.lb_head]
        code += cond.code
        code.append("   j %s" % frame.lb_dispatch)
        code.append("%----- WHILE-DO: DO -----%")
        code.append("%s" % frame.lb_body)
        code += body.lines
        code.append("   j %s" % frame.lb_head)
        code.append("%s" % frame.lb_dispatch)
        code.append("   bnz R%d,%s" % (frame.cond_reg, frame.lb_body))
        self.regs.free(frame.cond_reg)
        return StmtCode(code)

    def _for(self, kids) -> StmtCode:
        frame = self.ctx.pop()
        assert isinstance(frame, _ForFrame)
        loop_var: Frag = kids[1]
        items: List[ForItem] = kids[3]
        body: StmtCode = kids[5]

        reg_slot = "%s_%s" % (self.regslots.next(), frame.lb_body)
        self.internal_slots.append(reg_slot)
        step_slot = self._new_internal_slot()

        code = ["%----- BEGIN: FOR-DO -----%"]
        var_access = self._prepare_lvalue(code, loop_var, want_slot=True)
        code.append("   j %s" % frame.lb_calc)
        code.append("%----- FOR-DO: DO -----%")
        code.append("%s" % frame.lb_body)
        code.append("   sw %s(R0),R14" % reg_slot)
        code += body.lines
        code.append("   lw R14,%s(R0)" % reg_slot)
        code.append("   jr R14")
        code.append("%----- FOR-DO: calculation -----%")
        code.append("%s" % frame.lb_calc)

        a1 = self.regs.alloc(self._line)
        a2 = self.regs.alloc(self._line)
        a3 = self.regs.alloc(self._line)
        for k, item in enumerate(items):
            if item.end is None:
                rv = self._value_into(code, item.start, a1)
                self._store_accessor(code, var_access, rv)
                if rv not in (a1, a2, a3):
                    self.regs.free(rv)
                code.append("   jl R14,%s" % frame.lb_body)
                continue
            # range item
            start, end = item.start, item.end
            lb_asc = self.labels.next()
            lb_desc = self.labels.next()
            lb_exit = self.labels.next()
            if k == 0:
                code.append("   lw R%d,INT_VAL_ONE(R0)" % a1)
                code.append("   sw %s(R0),R%d" % (step_slot, a1))
                rs = self._value_into(code, start, a1)
            else:
                rs = self._value_into(code, start, a1)
                self._load_accessor_into(code, var_access, a2)
                code.append("   sub R%d,R%d,R%d" % (a3, rs, a2))
                code.append("   sw %s(R0),R%d" % (step_slot, a3))
                code.append("   bz R%d,LB_FOR_DO_ZERO_DEN" % a3)
            self._store_accessor(code, var_access, rs)
            if rs not in (a1, a2, a3):
                self.regs.free(rs)
            # where the loop re-reads the end bound each iteration
            if end.locus is not None and not end.code:
                end_loc = end.locus
            else:
                rv = self._value_into(code, end, a1)
                end_loc = self._new_internal_slot()
                code.append("   sw %s(R0),R%d" % (end_loc, rv))
                if rv not in (a1, a2, a3):
                    self.regs.free(rv)
            code.append("   lw R%d,%s(R0)" % (a1, step_slot))
            code.append("   cgti R%d,R%d,0" % (a1, a1))
            code.append("   bz R%d,%s" % (a1, lb_desc))
            for lb, cmp_op in ((lb_asc, "cle"), (lb_desc, "cge")):
                code.append("%s" % lb)
                code.append("   lw R%d,%s(R0)" % (a1, end_loc))
                self._load_accessor_into(code, var_access, a2)
                code.append("   %s R%d,R%d,R%d" % (cmp_op, a2, a2, a1))
                code.append("   bz R%d,%s" % (a2, lb_exit))
                code.append("   jl R14,%s" % frame.lb_body)
                code.append("   lw R%d,%s(R0)" % (a2, step_slot))
                self._load_accessor_into(code, var_access, a3)
                code.append("   add R%d,R%d,R%d" % (a2, a3, a2))
                self._store_accessor(code, var_access, a2)
                code.append("   j %s" % lb)
            code.append("%s" % lb_exit)
        code.append("%----- END: FOR-DO -----%")
        self.regs.free(a1)
        self.regs.free(a2)
        self.regs.free(a3)
        self._release(var_access)
        return StmtCode(code)

    def _value_into(self, code: List[str], frag: Frag, reg: int) -> int:
        """Copy the fragment's code and leave its value in a register,
        loading into `reg` when a load is needed."""
        if frag.reg is not None:
            code += frag.code
            return frag.reg
        code += frag.code
        if frag.locus is not None:
            code.append("   lw R%d,%s(R0)" % (reg, frag.locus))
        else:
            entry = frag.entry
            assert entry is not None and self._is_ref_param(entry)
            code.append("   lw R%d,%s(R0)" % (reg, self._slot(entry)))
            code.append("   lw R%d,0(R%d)" % (reg, reg))
        return reg

    def _load_accessor_into(self, code: List[str], access, reg: int) -> None:
        kind, where = access[0], access[1]
        if kind == "direct":
            code.append("   lw R%d,%s(R0)" % (reg, where))
        elif kind == "indirect":
            code.append("   lw R%d,%s(R0)" % (reg, where))
            code.append("   lw R%d,0(R%d)" % (reg, reg))
        else:  # reg
            code.append("   lw R%d,0(R%d)" % (reg, where))

    # -- procedure calls --------------------------------------------------------

    def _proc_call(self, kids) -> Frag:
        ref: ProcRef = kids[0]
        args: List[Frag] = kids[2] if len(kids) > 1 else []
        entry = self.symbols.find(ref.name, MAIN_PROGRAM)
        if entry is None or entry.type != "PROCEDURE":
            raise CodegenError("call to undeclared procedure %r" % ref.name,
                               ref.token.line, ref.token.pos)
        code: List[str] = []
        for arg in args:
            self._push_argument(code, arg)
        code.append("   jl R14,%s" % ref.name)
        return Frag("PROCEDURE", code)

    def _push_argument(self, code: List[str], arg: Frag) -> None:
        if arg.kind == "ARRAY":
            entry = arg.entry
            if self._is_ref_param(entry):
                r = self.regs.alloc(self._line)
                code.append("   lw R%d,%s(R0)" % (r, self._slot(entry)))
                self._dynamic_push(code, r)
                self.regs.free(r)
            else:
                code.append("   jl R14,Sy_Push")
                code.append("   dw %s" % self._slot(entry))
            return
        if arg.entry is not None and arg.index is None and arg.reg is None:
            entry = arg.entry
            if self._is_ref_param(entry):
                # forward the caller's original address
                r = self.regs.alloc(self._line)
                code += arg.code
                code.append("   lw R%d,%s(R0)" % (r, self._slot(entry)))
                self._dynamic_push(code, r)
                self.regs.free(r)
                return
            code += arg.code
            code.append("   jl R14,Sy_Push")
            code.append("   dw %s" % self._slot(entry))
            return
        if arg.locus is not None and arg.reg is None:
            code += arg.code
            code.append("   jl R14,Sy_Push")
            code.append("   dw %s" % arg.locus)
            return
        # computed value: park it in a scratch word and push that word's address
        if arg.entry is not None and arg.index is not None:
            arg = self._read_element(arg)
        code += arg.code
        rv = self.force(code, arg)
        slot = self._new_internal_slot()
        code.append("   sw %s(R0),R%d" % (slot, rv))
        self.regs.free(rv)
        code.append("   jl R14,Sy_Push")
        code.append("   dw %s" % slot)

    def _dynamic_push(self, code: List[str], rv: int) -> None:
        rt = self.regs.alloc(self._line)
        code.append("   lw R%d,INT_VAL_ONE(R0)" % rt)
        code.append("   add R%d,R%d,R%d" % (rt, rt, rt))
        code.append("   add R%d,R%d,R%d" % (rt, rt, rt))
        code.append("   sub R15,R15,R%d" % rt)
        code.append("   sw 0(R15),R%d" % rv)
        self.regs.free(rt)

    # -- procedure bodies ------------------------------------------------------

    def _proc_decl(self, kids) -> None:
        ref: ProcRef = kids[1]
        body: StmtCode = kids[3]
        name = ref.name
        params = self.symbols.params_of(name)
        flag = "FLAG_%s" % name
        self.internal_slots.append(flag)
        save = []
        for r in range(1, 15):
            slot = "%s_%s" % (self.regslots.next(), name)
            self.internal_slots.append(slot)
            save.append((r, slot))
        code = ["%%----- procedure %s -----%%" % name, name]
        for r, slot in save:
            code.append("   sw %s(R0),R%d" % (slot, r))
        code.append("   lw R1,%s(R0)" % flag)
        code.append("   bnz R1,LB_RECURSIVE_CALL")
        code.append("   lw R1,INT_VAL_ONE(R0)")
        code.append("   sw %s(R0),R1" % flag)
        if params:
            # R2 := 4, for walking the argument stack
            code.append("   lw R2,INT_VAL_ONE(R0)")
            code.append("   add R2,R2,R2")
            code.append("   add R2,R2,R2")
            for param in reversed(params):
                code.append("   lw R1,0(R15)")
                code.append("   add R15,R15,R2")
                slot = self._slot(param)
                if param.is_value:
                    code.append("   lw R1,0(R1)")
                code.append("   sw %s(R0),R1" % slot)
        code.append("")
        code += body.lines
        code.append("")
        code.append("   sw %s(R0),R0" % flag)
        for r, slot in save:
            code.append("   lw R%d,%s(R0)" % (r, slot))
        code.append("   jr R14")
        self.procedures.append(code)
        self.proc_names.append(name)
        return None

    # -- final assembly ----------------------------------------------------------

    def _finish(self, main: StmtCode) -> None:
        self.main_code = main.lines

    def output(self) -> str:
        assert self.main_code is not None, "code generation did not finish"
        lines: List[str] = [HEADER, ""]
        for proc in self.procedures:
            lines += proc
            lines.append("")
        lines.append("%----- program's entry point -----%")
        lines.append("   entry")
        lines.append("   jl R14,Sy_Init_SP")
        lines.append("")
        lines += self.main_code
        lines.append("")
        lines.append("   j LB_EXIT")
        lines.append("")
        lines.append("%===== RUN-TIME ERROR TRAPS =====%")
        for label, err, what in TRAPS:
            lines.append("%%----- run-time error trap: %s -----%%" % what)
            lines.append(label)
            lines.append("   jl R14,Sy_Push")
            lines.append("   dw %s" % err)
            lines.append("   jl R14,WRITES")
            lines.append("   j LB_EXIT")
        lines.append("")
        lines.append("LB_EXIT")
        lines.append("   hlt")
        lines.append("")
        lines.append("%===== var declarations =====%")
        lines.append("   align")
        for entry in self.symbols.declared():
            if entry.type == "PROCEDURE":
                continue
            slot = self._slot(entry)
            if entry.type == "ARRAY" and not entry.is_param:
                lines.append("%-12s dw %d" % (slot, entry.array_size))
                lines.append("%-12s res %d" % ("", 4 * entry.array_size))
            else:
                lines.append("%-12s res 4" % slot)
        for entry in self.symbols.generated():
            if entry.type == "STRING":
                lines.append("%-12s dw %s_A" % (entry.name, entry.name))
                lines.append('%-12s db "%s",0' % (entry.name + "_A", entry.gen_value))
                lines.append("   align")
            else:
                lines.append("%-12s dw %s" % (entry.name, entry.gen_value))
        lines.append("")
        lines.append("%===== registry save variables =====%")
        for slot in self.internal_slots:
            lines.append("%-18s res 4" % slot)
        for arr_slot, addr_slot in self.array_addr_slots.items():
            lines.append("%-18s dw %s" % (addr_slot, arr_slot))
        lines.append("")
        lines.append("%===== run-time errors definition =====%")
        lines.append("%-16s dw 0" % "INT_VAL_ZERO")
        lines.append("%-16s dw 1" % "INT_VAL_ONE")
        lines.append("%-16s dw 1" % "INT_VAL_ANY")
        for err, message in RUNTIME_ERRORS:
            lines.append("%-16s dw %s_A" % (err, err))
            lines.append('%s db "%s",0' % (err + "_A", message))
            lines.append("   align")
        lines.append("%===== end =====%")
        text = "\n".join(lines) + "\n"
        for placeholder in self._placeholders:
            text = text.replace(placeholder, self.ints.next())
        return text
