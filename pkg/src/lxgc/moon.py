"""Assembler and virtual machine for the Moon-assembly subset the code
generator emits.

The machine has sixteen 32-bit registers; R0 always reads zero, R14 is the
link register and R15 the program stack pointer.  Code and data share one
byte-addressable little-endian memory image, so a ``dw`` placed in the
instruction stream (the push-literal protocol) is readable as data.

Runtime-library procedures (WRITES, READN, ...) and the stack helpers
Sy_Init_SP / Sy_Push are intrinsics: they are recognized by label name when
a ``jl`` targets them, because the compiler never emits bodies for them.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

WORD = 4
DEFAULT_MEMORY = 64 * 1024
DEFAULT_FUEL = 10_000_000

REG_INSTRS = frozenset(["add", "sub", "mul", "div",
                        "cgt", "cge", "cle", "clt", "ceq", "cne"])
MNEMONICS = REG_INSTRS | {"lw", "sw", "cgti", "bz", "bnz", "j", "jl", "jr", "hlt"}
DIRECTIVES = frozenset(["dw", "db", "res", "align", "entry"])

INTRINSICS = (
    "Sy_Init_SP", "Sy_Push",
    "WRITES", "WRITEN", "WRITEC", "READN", "READC", "SPACE", "LINE",
)


class AsmError(Exception):
    pass


class VMError(Exception):
    def __init__(self, message: str, line: int = 0):
        super().__init__("run-time fault at line %d: %s" % (line, message))
        self.line = line


@dataclass
class Instruction:
    mnemonic: str
    operands: Tuple
    addr: int
    line: int
    text: str


@dataclass
class AsmUnit:
    memory: bytearray
    instructions: Dict[int, Instruction]
    labels: Dict[str, int]
    entry: int
    extent: int  # first address past code+data


def _mask32(v: int) -> int:
    return v & 0xFFFFFFFF


def _signed32(v: int) -> int:
    v = _mask32(v)
    return v - 0x100000000 if v & 0x80000000 else v


def _parse_reg(text: str, line: int) -> int:
    text = text.strip()
    if not text.upper().startswith("R"):
        raise AsmError("line %d: expected register, got %r" % (line, text))
    try:
        n = int(text[1:])
    except ValueError:
        raise AsmError("line %d: bad register %r" % (line, text))
    if not 0 <= n <= 15:
        raise AsmError("line %d: register out of range %r" % (line, text))
    return n


def _split_operands(text: str) -> List[str]:
    """Split on commas outside of string literals."""
    parts: List[str] = []
    cur: List[str] = []
    quote = ""
    for ch in text:
        if quote:
            cur.append(ch)
            if ch == quote:
                quote = ""
        elif ch in "\"'":
            quote = ch
            cur.append(ch)
        elif ch == ",":
            parts.append("".join(cur).strip())
            cur = []
        else:
            cur.append(ch)
    if cur:
        parts.append("".join(cur).strip())
    return [p for p in parts if p]


def _strip_comment(line: str) -> str:
    out = []
    quote = ""
    for ch in line:
        if quote:
            out.append(ch)
            if ch == quote:
                quote = ""
        elif ch in "\"'":
            quote = ch
            out.append(ch)
        elif ch == "%":
            break
        else:
            out.append(ch)
    return "".join(out).rstrip()


@dataclass
class _Stmt:
    label: Optional[str]
    op: Optional[str]
    args: str
    line: int


def _parse_lines(text: str) -> List[_Stmt]:
    stmts = []
    for n, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw)
        if not line.strip():
            continue
        fields = line.split(None, 1)
        head = fields[0]
        rest = fields[1] if len(fields) > 1 else ""
        label = None
        if head not in MNEMONICS and head not in DIRECTIVES:
            label = head
            if rest:
                fields = rest.split(None, 1)
                head = fields[0]
                rest = fields[1] if len(fields) > 1 else ""
            else:
                head = None
        if head is not None and head not in MNEMONICS and head not in DIRECTIVES:
            raise AsmError("line %d: unknown mnemonic %r" % (n, head))
        stmts.append(_Stmt(label, head, rest, n))
    return stmts


def assemble(text: str, memory_size: int = DEFAULT_MEMORY) -> AsmUnit:
    """Two-pass assembly into a memory image plus an instruction table."""
    stmts = _parse_lines(text)

    # pass 1: addresses and labels
    labels: Dict[str, int] = {}
    addr = 0
    entry = None
    sizes: List[int] = []
    for s in stmts:
        if s.label is not None:
            if s.label in labels:
                raise AsmError("line %d: duplicate label %r" % (s.line, s.label))
            labels[s.label] = addr
        size = 0
        if s.op is None:
            pass
        elif s.op == "entry":
            entry = addr
        elif s.op == "dw":
            if addr % WORD:
                raise AsmError("line %d: misaligned dw" % s.line)
            size = WORD * len(_split_operands(s.args))
        elif s.op == "db":
            for part in _split_operands(s.args):
                if part and part[0] in "\"'":
                    size += len(part) - 2
                else:
                    size += 1
        elif s.op == "res":
            size = int(s.args)
        elif s.op == "align":
            size = (-addr) % WORD
        else:
            size = WORD
        sizes.append(size)
        addr += size
    extent = addr
    if extent > memory_size:
        raise AsmError("program does not fit in %d bytes of memory" % memory_size)
    for name in INTRINSICS:
        if name in labels:
            raise AsmError("label %r shadows an intrinsic" % name)

    def resolve(sym: str, line: int) -> int:
        sym = sym.strip()
        if sym in labels:
            return labels[sym]
        if sym in INTRINSICS:
            return -(1 + INTRINSICS.index(sym))
        try:
            return int(sym)
        except ValueError:
            raise AsmError("line %d: undefined label %r" % (line, sym))

    # pass 2: emit
    memory = bytearray(memory_size)
    instructions: Dict[int, Instruction] = {}
    addr = 0
    for s, size in zip(stmts, sizes):
        if s.op is None or s.op == "entry":
            continue
        if s.op == "dw":
            for part in _split_operands(s.args):
                memory[addr:addr + WORD] = struct.pack(
                    "<i", _signed32(resolve(part, s.line)))
                addr += WORD
            continue
        if s.op == "db":
            for part in _split_operands(s.args):
                if part and part[0] in "\"'":
                    data = part[1:-1].encode("ascii")
                else:
                    data = bytes([int(part) & 0xFF])
                memory[addr:addr + len(data)] = data
                addr += len(data)
            continue
        if s.op in ("res", "align"):
            addr += size
            continue
        instructions[addr] = _decode(s, addr, resolve)
        addr += WORD

    if entry is None:
        raise AsmError("no entry directive")
    return AsmUnit(memory, instructions, labels, entry, extent)


def _decode(s: _Stmt, addr: int, resolve) -> Instruction:
    op = s.op
    args = _split_operands(s.args)

    def need(n: int) -> None:
        if len(args) != n:
            raise AsmError("line %d: %s expects %d operand(s)" % (s.line, op, n))

    def mem_operand(text: str) -> Tuple[int, int]:
        if "(" not in text or not text.endswith(")"):
            raise AsmError("line %d: bad memory operand %r" % (s.line, text))
        off, reg = text[:-1].split("(", 1)
        return resolve(off, s.line), _parse_reg(reg, s.line)

    if op == "hlt":
        need(0)
        ops: Tuple = ()
    elif op == "lw":
        need(2)
        ops = (_parse_reg(args[0], s.line),) + mem_operand(args[1])
    elif op == "sw":
        need(2)
        ops = mem_operand(args[0]) + (_parse_reg(args[1], s.line),)
    elif op in REG_INSTRS:
        need(3)
        ops = tuple(_parse_reg(a, s.line) for a in args)
    elif op == "cgti":
        need(3)
        ops = (_parse_reg(args[0], s.line), _parse_reg(args[1], s.line),
               int(args[2]))
    elif op in ("bz", "bnz"):
        need(2)
        ops = (_parse_reg(args[0], s.line), resolve(args[1], s.line))
    elif op == "j":
        need(1)
        ops = (resolve(args[0], s.line),)
    elif op == "jl":
        need(2)
        ops = (_parse_reg(args[0], s.line), resolve(args[1], s.line))
    elif op == "jr":
        need(1)
        ops = (_parse_reg(args[0], s.line),)
    else:
        raise AsmError("line %d: unknown mnemonic %r" % (s.line, op))
    return Instruction(op, ops, addr, s.line, "%s %s" % (op, s.args.strip()))


class Machine:
    """One execution of an assembled unit."""

    def __init__(self, unit: AsmUnit, stdin: str = ""):
        self.unit = unit
        self.memory = bytearray(unit.memory)
        self.regs = [0] * 16
        self.pc = unit.entry
        self.halted = False
        self.out: List[str] = []
        self.stdin = stdin
        self.stdin_pos = 0
        self.steps = 0

    # -- memory ----------------------------------------------------------

    def read_word(self, addr: int, line: int = 0) -> int:
        if addr % WORD:
            raise VMError("unaligned read at %d" % addr, line)
        if not 0 <= addr <= len(self.memory) - WORD:
            raise VMError("read outside memory at %d" % addr, line)
        return struct.unpack_from("<i", self.memory, addr)[0]

    def write_word(self, addr: int, value: int, line: int = 0) -> None:
        if addr % WORD:
            raise VMError("unaligned write at %d" % addr, line)
        if not 0 <= addr <= len(self.memory) - WORD:
            raise VMError("write outside memory at %d" % addr, line)
        struct.pack_into("<i", self.memory, addr, _signed32(value))

    def _set_reg(self, n: int, value: int) -> None:
        if n != 0:
            self.regs[n] = _signed32(value)

    def _get_reg(self, n: int) -> int:
        return 0 if n == 0 else self.regs[n]

    # -- execution -------------------------------------------------------

    def step(self) -> None:
        ins = self.unit.instructions.get(self.pc)
        if ins is None:
            raise VMError("jump outside code at address %d" % self.pc)
        self.steps += 1
        op, ops = ins.mnemonic, ins.operands
        next_pc = self.pc + WORD
        if op == "hlt":
            self.halted = True
        elif op == "lw":
            rd, off, ri = ops
            self._set_reg(rd, self.read_word(off + self._get_reg(ri), ins.line))
        elif op == "sw":
            off, ri, rs = ops
            self.write_word(off + self._get_reg(ri), self._get_reg(rs), ins.line)
        elif op in REG_INSTRS:
            rd, ra, rb = ops
            a, b = self._get_reg(ra), self._get_reg(rb)
            self._set_reg(rd, self._alu(op, a, b, ins.line))
        elif op == "cgti":
            rd, ra, imm = ops
            self._set_reg(rd, 1 if self._get_reg(ra) > imm else 0)
        elif op == "bz":
            rs, target = ops
            if self._get_reg(rs) == 0:
                next_pc = target
        elif op == "bnz":
            rs, target = ops
            if self._get_reg(rs) != 0:
                next_pc = target
        elif op == "j":
            next_pc = ops[0]
        elif op == "jl":
            rd, target = ops
            self._set_reg(rd, next_pc)
            if target < 0:
                next_pc = self._intrinsic(INTRINSICS[-target - 1], next_pc, ins.line)
            else:
                next_pc = target
        elif op == "jr":
            next_pc = self._get_reg(ops[0])
        else:  # pragma: no cover - decoder rejects unknown mnemonics
            raise VMError("unknown instruction %r" % op, ins.line)
        self.pc = next_pc

    def _alu(self, op: str, a: int, b: int, line: int) -> int:
        if op == "add":
            return a + b
        if op == "sub":
            return a - b
        if op == "mul":
            return a * b
        if op == "div":
            if b == 0:
                raise VMError("division by zero reached the div instruction", line)
            q = abs(a) // abs(b)
            return -q if (a < 0) != (b < 0) else q
        table = {"cgt": a > b, "cge": a >= b, "cle": a <= b,
                 "clt": a < b, "ceq": a == b, "cne": a != b}
        return 1 if table[op] else 0

    # -- stack and intrinsics ---------------------------------------------

    def _push(self, value: int, line: int) -> None:
        sp = self.regs[15] - WORD
        if sp < self.unit.extent:
            raise VMError("stack overflow into code/data", line)
        self.regs[15] = sp
        self.write_word(sp, value, line)

    def _pop(self, line: int) -> int:
        value = self.read_word(self.regs[15], line)
        self.regs[15] += WORD
        return value

    def _read_cstring(self, addr: int, line: int) -> str:
        chars = []
        while True:
            if not 0 <= addr < len(self.memory):
                raise VMError("string runs outside memory", line)
            b = self.memory[addr]
            if b == 0:
                return "".join(chars)
            chars.append(chr(b))
            addr += 1

    def _intrinsic(self, name: str, ret: int, line: int) -> int:
        if name == "Sy_Init_SP":
            self.regs[15] = len(self.memory)
            return ret
        if name == "Sy_Push":
            self._push(self.read_word(ret, line), line)
            return ret + WORD
        if name == "WRITES":
            addr = self._pop(line)
            self.out.append(self._read_cstring(self.read_word(addr, line), line))
        elif name == "WRITEN":
            width = self.read_word(self._pop(line), line)
            value = self.read_word(self._pop(line), line)
            text = str(value)
            if width > len(text):
                text += " " * (width - len(text))
            self.out.append(text)
        elif name == "WRITEC":
            self.out.append(chr(self.read_word(self._pop(line), line) & 0xFF))
        elif name == "READN":
            addr = self._pop(line)
            self.write_word(addr, self._read_number(line), line)
        elif name == "READC":
            addr = self._pop(line)
            ch = self.stdin[self.stdin_pos] if self.stdin_pos < len(self.stdin) else "\0"
            self.stdin_pos += 1
            self.write_word(addr, ord(ch), line)
        elif name == "SPACE":
            self.out.append(" " * max(0, self.read_word(self._pop(line), line)))
        elif name == "LINE":
            self.out.append("\n" * max(0, self.read_word(self._pop(line), line)))
        else:  # pragma: no cover
            raise VMError("unknown intrinsic %r" % name, line)
        return ret

    def _read_number(self, line: int) -> int:
        s, i = self.stdin, self.stdin_pos
        while i < len(s) and s[i] in " \t\r\n":
            i += 1
        j = i
        if j < len(s) and s[j] == "-":
            j += 1
        while j < len(s) and s[j].isdigit():
            j += 1
        if j == i or s[i:j] == "-":
            raise VMError("READN: no number on standard input", line)
        self.stdin_pos = j
        return _signed32(int(s[i:j]))

    @property
    def stdout(self) -> str:
        return "".join(self.out)


def run(unit: AsmUnit, stdin: str = "", fuel: int = DEFAULT_FUEL):
    """Execute from the entry point; returns (stdout, status, machine).

    Status is "halted" on hlt, "fuel-exceeded" when the instruction budget
    runs out.  Memory faults raise VMError with the faulting source line.
    """
    m = Machine(unit, stdin=stdin)
    while not m.halted:
        if m.steps >= fuel:
            return m.stdout, "fuel-exceeded", m
        m.step()
    return m.stdout, "halted", m


def trace(unit: AsmUnit, stdin: str = "", fuel: int = DEFAULT_FUEL):
    """Like run(), but also returns one log line per executed instruction."""
    m = Machine(unit, stdin=stdin)
    log: List[str] = []
    while not m.halted and m.steps < fuel:
        ins = m.unit.instructions.get(m.pc)
        if ins is None:
            raise VMError("jump outside code at address %d" % m.pc)
        before = list(m.regs)
        m.step()
        changed = ", ".join(
            "R%d=%d" % (i, m.regs[i]) for i in range(16) if m.regs[i] != before[i])
        log.append("%6d  %06d  %-18s %s" % (m.steps, ins.addr, ins.text, changed))
    status = "halted" if m.halted else "fuel-exceeded"
    return m.stdout, status, m, log
