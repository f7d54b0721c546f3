"""Primitive operations: integer arithmetic, comparison, and eval/apply.

Primitives demand their strict positions through the same dispatch
discipline as compiled case tables: a function argument is evaluated first,
a choice is pull-tabbed, and a failure fails the primitive.  Partial
applications are data-like objects; applying anything that is not a partial
(an over-applied constructor, an integer) is failure rather than an error
stop, which folds dynamic type errors into ordinary functional-logic
failure.
"""

from __future__ import annotations

from importlib import resources

from .syntax import wrap64


class PrimOp:
    """A built-in function: strict positions plus semantics on unboxed ints."""

    __slots__ = ("name", "arity", "strict", "fn", "is_apply")

    def __init__(self, name, arity, strict, fn=None, is_apply=False):
        self.name = name
        self.arity = arity
        self.strict = strict
        self.fn = fn
        self.is_apply = is_apply


def _arith(op):
    return lambda a, b: wrap64(op(a, b))


PRIMITIVES = {
    "+": PrimOp("+", 2, (0, 1), _arith(lambda a, b: a + b)),
    "-": PrimOp("-", 2, (0, 1), _arith(lambda a, b: a - b)),
    "*": PrimOp("*", 2, (0, 1), _arith(lambda a, b: a * b)),
    "==": PrimOp("==", 2, (0, 1), lambda a, b: a == b),
    "<=": PrimOp("<=", 2, (0, 1), lambda a, b: a <= b),
    "apply": PrimOp("apply", 2, (0,), is_apply=True),
}

COMPARISONS = {"==", "<="}


def prelude_text() -> str:
    return resources.files("minicurry").joinpath("prelude.mcy").read_text(encoding="utf-8")
