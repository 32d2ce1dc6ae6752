"""lxgc: a compiler for the LXG teaching language targeting Moon assembly,
plus an assembler and virtual machine to execute the result."""

from .driver import CompileError, CompileResult, compile_source

__all__ = ["CompileError", "CompileResult", "compile_source"]
__version__ = "1.0.0"
