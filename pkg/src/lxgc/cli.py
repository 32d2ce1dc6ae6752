"""Command-line front end.

    lxgc ?                       show usage
    lxgc FILE [yes|no]           compile FILE to FILE-stem.m; "yes" also dumps
                                 every phase's output to lxg_*.out files
    lxgc moon run FILE.m [...]   assemble and execute a generated program
    lxgc                         prompt for the source file name

Dump files are written for every phase that completed, even when a later
phase fails, so a broken program still leaves its scan/pre-parse traces.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .driver import CompileError, CompileResult, compile_source, load_tables
from .grammar import render_grammar_dump
from .moon import AsmError, VMError, assemble, run, trace
from .parser import render_derivation
from .preparser import render_symbol_table
from .tokens import render_stream

USAGE = """usage:
  lxgc ?                              show this help
  lxgc FILE [yes|no]                  compile FILE (yes = dump phase outputs)
  lxgc moon run FILE.m [--trace] [--fuel N] [--stdin FILE]
"""


def _write(path: Path, text: str) -> None:
    path.write_text(text)
    print("wrote %s" % path)


def _dump_phases(result: CompileResult, directory: Path) -> None:
    _write(directory / "lxg_grammar.out", render_grammar_dump(load_tables()))
    if result.tokens is not None:
        _write(directory / "lxg_scan.out", render_stream(result.tokens))
    if result.stream is not None:
        _write(directory / "lxg_preparse.out", render_stream(result.stream))
    if result.symbols is not None:
        _write(directory / "lxg_symbol_table.out",
               render_symbol_table(result.symbols))
    if result.events is not None:
        _write(directory / "lxg_parse.out", render_derivation(result.events))


def _compile_command(filename: str, dump: bool) -> int:
    path = Path(filename)
    try:
        source = path.read_text()
    except OSError as exc:
        print("lxgc: cannot read %s: %s" % (path, exc), file=sys.stderr)
        return 1
    try:
        result = compile_source(source)
    except CompileError as exc:
        if dump:
            _dump_phases(exc.result, path.parent)
        for message in exc.messages:
            print("lxgc: %s error: %s" % (exc.phase, message), file=sys.stderr)
        return 1
    if dump:
        _dump_phases(result, path.parent)
    out_path = path.with_suffix(".m")
    _write(out_path, result.output)
    return 0


def _moon_command(argv) -> int:
    parser = argparse.ArgumentParser(prog="lxgc moon", add_help=True)
    sub = parser.add_subparsers(dest="action", required=True)
    runp = sub.add_parser("run", help="assemble and execute a .m file")
    runp.add_argument("file")
    runp.add_argument("--trace", action="store_true",
                      help="log every executed instruction to stderr")
    runp.add_argument("--fuel", type=int, default=10_000_000,
                      help="instruction budget (default 10^7)")
    runp.add_argument("--stdin", dest="stdin_file",
                      help="file supplying the program's input")
    args = parser.parse_args(argv)

    try:
        text = Path(args.file).read_text()
    except OSError as exc:
        print("lxgc: cannot read %s: %s" % (args.file, exc), file=sys.stderr)
        return 1
    stdin_text = ""
    if args.stdin_file:
        stdin_text = Path(args.stdin_file).read_text()
    try:
        unit = assemble(text)
        if args.trace:
            out, status, _, log = trace(unit, stdin=stdin_text, fuel=args.fuel)
            for line in log:
                print(line, file=sys.stderr)
        else:
            out, status, _ = run(unit, stdin=stdin_text, fuel=args.fuel)
    except (AsmError, VMError) as exc:
        print("lxgc: %s" % exc, file=sys.stderr)
        return 1
    sys.stdout.write(out)
    if status != "halted":
        print("lxgc: %s" % status, file=sys.stderr)
        return 3
    return 0


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if argv[:1] == ["moon"]:
        return _moon_command(argv[1:])
    if argv == ["?"]:
        print(USAGE, end="")
        return 0
    if not argv:
        try:
            filename = input("source file: ").strip()
        except EOFError:
            filename = ""
        if not filename:
            print(USAGE, end="", file=sys.stderr)
            return 2
        argv = [filename]
    if len(argv) > 2:
        print(USAGE, end="", file=sys.stderr)
        return 2
    dump = False
    if len(argv) == 2:
        if argv[1] not in ("yes", "no"):
            print("lxgc: the dump argument must be yes or no", file=sys.stderr)
            print(USAGE, end="", file=sys.stderr)
            return 2
        dump = argv[1] == "yes"
    return _compile_command(argv[0], dump)


if __name__ == "__main__":
    sys.exit(main())
