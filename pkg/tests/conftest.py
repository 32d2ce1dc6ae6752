"""Shared fixtures and helpers for the test suite."""

from __future__ import annotations

import re
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from lxgc.driver import compile_source, library_source, load_tables
from lxgc.moon import assemble, run as run_machine

import interp


@pytest.fixture(scope="session")
def tables():
    return load_tables()


@pytest.fixture(scope="session")
def library():
    return library_source()


# -- running programs -------------------------------------------------------


def run_vm(source: str, stdin: str = "", fuel: int = 10_000_000):
    """Compile a program and run it on the virtual machine."""
    result = compile_source(source)
    unit = assemble(result.output)
    stdout, status, _machine = run_machine(unit, stdin=stdin, fuel=fuel)
    return stdout, status


def run_ref(source: str, stdin: str = "", tables=None, library=None) -> str:
    """Run a program on the reference interpreter."""
    if tables is None:
        tables = load_tables()
    if library is None:
        library = library_source()
    return interp.run_source(source, tables, library, stdin=stdin)


# -- structural comparison of assembly --------------------------------------

_GENERATED = re.compile(r"\b(?:LB|I|S|REG|TMP)_[0-9]\w*")


def canon(text: str) -> str:
    """Normalize assembly for structural comparison.

    Comments and blank lines are dropped, whitespace runs collapse, and
    every generated name (labels, literal pool entries, register save
    slots) is renamed to its order of first appearance, separately per
    prefix.  Two fragments compare equal exactly when they are the same
    code modulo the numbering the generator happened to hand out.
    """
    lines = []
    for raw in text.splitlines():
        line = _strip_comment(raw).rstrip()
        if line.strip():
            lines.append(re.sub(r"[ \t]+", " ", line).strip())
    body = "\n".join(lines)
    seen = {}

    def rename(match: re.Match) -> str:
        name = match.group(0)
        prefix = name.split("_", 1)[0]
        key = (prefix, name)
        if key not in seen:
            count = sum(1 for p, _ in seen if p == prefix)
            seen[key] = "%s_<%d>" % (prefix, count + 1)
        return seen[key]

    return _GENERATED.sub(rename, body)


def _strip_comment(line: str) -> str:
    in_string = False
    for i, ch in enumerate(line):
        if ch == '"':
            in_string = not in_string
        elif ch == "%" and not in_string:
            return line[:i]
    return line


def main_body(output: str) -> str:
    """The statement code of the main program: everything between the
    stack set-up call and the trap block."""
    lines = output.splitlines()
    start = next(i for i, s in enumerate(lines) if "Sy_Init_SP" in s)
    end = next(i for i, s in enumerate(lines)
               if s.startswith("LB_RECURSIVE_CALL"))
    return "\n".join(lines[start + 1:end])
