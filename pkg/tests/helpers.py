"""Shared test utilities: corpus paths, run/oracle wrappers, program generator."""

from __future__ import annotations

import random
from collections import Counter
from pathlib import Path

from minicurry import compile_program, run
from minicurry.oracle import enumerate_values
from minicurry.syntax import load_program

CORPUS = Path(__file__).resolve().parent.parent / "corpus"

# terminating corpus programs compared against the oracle (loop.mcy diverges)
ORACLE_CORPUS = sorted(p.stem for p in CORPUS.glob("*.mcy") if p.stem != "loop")


def corpus_source(stem: str) -> str:
    return (CORPUS / f"{stem}.mcy").read_text(encoding="utf-8")


def run_source(source: str, **kwargs):
    return run(compile_program(source), **kwargs)


def engine_multiset(source: str, **kwargs) -> Counter:
    return Counter(run_source(source, **kwargs).values)


def oracle_multiset(source: str, fuel: int = 2_000_000) -> Counter:
    return enumerate_values(load_program(source), fuel=fuel)


def gen_shared_choice_program(seed: int) -> str:
    """Small terminating program over ints/bools with shared where-bindings.

    Ill-typed subterms are intentionally possible; they must fail identically
    in the engine and the oracle.
    """
    rng = random.Random(seed)

    def expr(scope, depth):
        if depth <= 0 or rng.random() < 0.25:
            pick = rng.random()
            if pick < 0.45 and scope:
                return rng.choice(scope)
            if pick < 0.75:
                return str(rng.randrange(0, 3))
            return rng.choice(["True", "False"])
        form = rng.randrange(8)
        a = expr(scope, depth - 1)
        b = expr(scope, depth - 1)
        if form <= 2:
            return f"({a} ? {b})"
        if form == 3:
            return f"({a} + {b})"
        if form == 4:
            return f"(xor {a} {b})"
        if form == 5:
            return f"(not {a})"
        if form == 6:
            return f"(and {a} {b})"
        return f"({a}, {b})"

    scope: list[str] = []
    binds = []
    for i in range(rng.randrange(1, 4)):
        name = f"v{i}"
        binds.append(f"{name} = {expr(scope, rng.randrange(1, 4))}")
        scope.append(name)
    body = expr(scope, rng.randrange(2, 5))
    return f"main = {body} where " + "; ".join(binds)
