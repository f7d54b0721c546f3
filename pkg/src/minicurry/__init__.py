"""MiniCurry: a small functional-logic language with a fair evaluation engine."""

__version__ = "0.1.0"

from .syntax import CompileError, parse_program
from .trees import compile_program
from .scheduler import run

__all__ = ["CompileError", "parse_program", "compile_program", "run", "__version__"]
