"""Brute-force reference interpreter, independent of the graph engine.

Evaluation is substitution-based call-by-need rewriting over immutable
terms: rule instantiation substitutes shared term objects for variables and
builds each where-binding once, and head-normalization is memoized per term
object, so a shared subterm is evaluated (and its choices created) exactly
once per derivation.  Choices carry an identity assigned at creation; a
derivation is a decision map from identities to left/right.  Enumeration
restarts evaluation from scratch for every extension of the decision map,
which keeps the machinery trivially correct at the price of speed.

Shares nothing with the engine beyond the surface syntax module.
"""

from __future__ import annotations

import sys
from collections import Counter
from dataclasses import dataclass

from .syntax import (
    App, Choice, CompileError, Expr, Fail, Lit, PCons, PInt, PVar, PWild,
    Pattern, Rule, SurfaceProgram, Var, wrap64, BUILTIN_DATA, PRIM_ARITIES,
)

DEFAULT_FUEL = 2_000_000


class OracleFuelExhausted(Exception):
    def __init__(self, fuel: int):
        super().__init__(f"oracle fuel of {fuel} rewrite steps exhausted")


class _Undecided(Exception):
    """Raised when evaluation meets a choice the decision map leaves open."""

    def __init__(self, cid: int):
        self.cid = cid


# -- terms -------------------------------------------------------------------

class OInt:
    __slots__ = ("value",)

    def __init__(self, value):
        self.value = value


class OCon:
    __slots__ = ("name", "args")

    def __init__(self, name, args):
        self.name = name
        self.args = args


class OApp:
    __slots__ = ("name", "args")

    def __init__(self, name, args):
        self.name = name
        self.args = args


class OPart:
    __slots__ = ("name", "args", "missing")

    def __init__(self, name, args, missing):
        self.name = name
        self.args = args
        self.missing = missing


class OChoice:
    __slots__ = ("cid", "left", "right")

    def __init__(self, cid, left, right):
        self.cid = cid
        self.left = left
        self.right = right


class OFail:
    pass


_FAIL = OFail()


class _Eval:
    """One full evaluation of the goal under a fixed decision map."""

    def __init__(self, program: SurfaceProgram, decisions: dict, fuel: int):
        self.program = program
        self.decisions = decisions
        self.fuel = fuel
        self.next_cid = 0
        # memo holds (term, result) keyed by term identity; keeping the key
        # object alive prevents id() reuse
        self.memo: dict[int, tuple] = {}
        self.cons_arity = {c: a for d in list(BUILTIN_DATA) + list(program.data_decls)
                           for c, a in d.constructors}
        self.all_var_fns = {
            name for name, rules in program.functions.items()
            if all(all(isinstance(p, (PVar, PWild)) for p in r.patterns)
                   for r in rules)
        }

    # -- term construction from expressions --------------------------------

    def build(self, e: Expr, env: dict):
        if isinstance(e, Lit):
            return OInt(e.value)
        if isinstance(e, Fail):
            return _FAIL
        if isinstance(e, Choice):
            cid = self.next_cid
            self.next_cid += 1
            return OChoice(cid, self.build(e.left, env), self.build(e.right, env))
        if isinstance(e, Var):
            if e.name in env:
                return env[e.name]
            return self.symbol_ref(e.name, [])
        if isinstance(e, App):
            fun, args = _flatten(e)
            built = [self.build(a, env) for a in args]
            if isinstance(fun, Var) and fun.name not in env:
                return self.symbol_ref(fun.name, built)
            base = self.build(fun, env)
            for a in built:
                base = OApp("apply", [base, a])
            return base
        raise AssertionError(f"cannot build {e!r}")

    def symbol_ref(self, name: str, args: list):
        if name in self.cons_arity:
            n = self.cons_arity[name]
        elif name in self.program.functions:
            n = len(self.program.functions[name][0].patterns)
        elif name in PRIM_ARITIES:
            n = PRIM_ARITIES[name]
        else:
            raise CompileError(f"unknown symbol {name!r}")
        if len(args) < n:
            return OPart(name, args, n - len(args))
        head, rest = args[:n], args[n:]
        term = OCon(name, head) if name in self.cons_arity else OApp(name, head)
        for a in rest:
            term = OApp("apply", [term, a])
        return term

    # -- evaluation ----------------------------------------------------------

    def hnf(self, term):
        while True:
            if isinstance(term, (OInt, OCon, OPart)) or term is _FAIL:
                return term
            if isinstance(term, OChoice):
                side = self.decisions.get(term.cid)
                if side is None:
                    raise _Undecided(term.cid)
                term = term.left if side == 0 else term.right
                continue
            # application: memoized so shared subterms evaluate once
            key = id(term)
            hit = self.memo.get(key)
            if hit is not None:
                term = hit[1]
                continue
            result = self.reduce_app(term)
            self.memo[key] = (term, result)
            term = result

    def reduce_app(self, term: OApp):
        self.fuel -= 1
        if self.fuel <= 0:
            raise OracleFuelExhausted(0)
        name = term.name
        if name in PRIM_ARITIES or name == "apply":
            return self.reduce_prim(term)
        rules = self.program.functions[name]
        if name in self.all_var_fns:
            # overlapping all-variable rules: a fresh choice between them
            alts = [self.instantiate(r, term.args) for r in rules]
            out = alts[-1]
            for alt in reversed(alts[:-1]):
                cid = self.next_cid
                self.next_cid += 1
                out = OChoice(cid, alt, out)
            return out
        for rule in rules:
            env: dict = {}
            matched = self.match_rule(rule.patterns, term.args, env)
            if matched is _FAIL:
                return _FAIL
            if matched:
                return self.instantiate_checked(rule, env)
        return _FAIL    # exempt: no rule covers this constructor

    def match_rule(self, patterns, args, env):
        """True on match, False on mismatch, _FAIL if a demanded position failed."""
        for pat, arg in zip(patterns, args):
            r = self.match(pat, arg, env)
            if r is not True:
                return r
        return True

    def match(self, pat: Pattern, term, env):
        if isinstance(pat, PVar):
            env[pat.name] = term
            return True
        if isinstance(pat, PWild):
            return True
        if isinstance(pat, PInt):
            h = self.hnf(term)
            if h is _FAIL:
                return _FAIL
            return isinstance(h, OInt) and h.value == pat.value
        # constructor pattern
        h = self.hnf(term)
        if h is _FAIL:
            return _FAIL
        if not isinstance(h, OCon) or h.name != pat.name:
            return False
        for sub, arg in zip(pat.args, h.args):
            r = self.match(sub, arg, env)
            if r is not True:
                return r
        return True

    def instantiate(self, rule: Rule, args):
        env = {}
        for pat, arg in zip(rule.patterns, args):
            _bind(pat, arg, env)
        return self.instantiate_checked(rule, env)

    def instantiate_checked(self, rule: Rule, env):
        for name, expr in rule.wheres:
            env[name] = self.build(expr, env)   # built once: sharing
        return self.build(rule.body, env)

    def reduce_prim(self, term: OApp):
        name = term.name
        if name == "apply":
            f = self.hnf(term.args[0])
            if f is _FAIL:
                return _FAIL
            if not isinstance(f, OPart):
                return _FAIL    # over-application or applying a plain value
            args = list(f.args) + [term.args[1]]
            if f.missing > 1:
                return OPart(f.name, args, f.missing - 1)
            if f.name in self.cons_arity:
                return OCon(f.name, args)
            return OApp(f.name, args)
        a = self.hnf(term.args[0])
        if a is _FAIL:
            return _FAIL
        b = self.hnf(term.args[1])
        if b is _FAIL:
            return _FAIL
        if not isinstance(a, OInt) or not isinstance(b, OInt):
            return _FAIL
        x, y = a.value, b.value
        if name == "+":
            return OInt(wrap64(x + y))
        if name == "-":
            return OInt(wrap64(x - y))
        if name == "*":
            return OInt(wrap64(x * y))
        if name == "==":
            return OCon("True" if x == y else "False", [])
        if name == "<=":
            return OCon("True" if x <= y else "False", [])
        raise AssertionError(name)

    def normal_form(self, term):
        h = self.hnf(term)
        if h is _FAIL:
            return _FAIL
        if isinstance(h, OInt):
            return h
        out_args = []
        for a in h.args:
            n = self.normal_form(a)
            if n is _FAIL:
                return _FAIL
            out_args.append(n)
        if isinstance(h, OPart):
            return OPart(h.name, out_args, h.missing)
        return OCon(h.name, out_args)


def _bind(pat: Pattern, term, env) -> None:
    if isinstance(pat, PVar):
        env[pat.name] = term
    elif isinstance(pat, PCons):
        for sub, arg in zip(pat.args, getattr(term, "args", ())):
            _bind(sub, arg, env)


def _flatten(e: App):
    args = list(e.args)
    fun = e.fun
    while isinstance(fun, App):
        args = list(fun.args) + args
        fun = fun.fun
    return fun, args


def enumerate_values(program: SurfaceProgram, goal: str = "main",
                     fuel: int = DEFAULT_FUEL) -> Counter:
    """Multiset of printed normal forms across all consistent decision maps.

    Depth-first and restart-based: it may loop on non-terminating programs
    (exactly the incompleteness the fair engine removes) and reports fuel
    exhaustion rather than guessing.
    """
    if goal not in program.functions:
        raise CompileError(f"no function {goal!r} defined")
    values: Counter = Counter()
    worklist: list[dict] = [{}]
    old_limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old_limit, 50_000))
    try:
        while worklist:
            decisions = worklist.pop()
            ev = _Eval(program, decisions, fuel)
            try:
                nf = ev.normal_form(ev.build(Var(goal), {}))
            except _Undecided as u:
                right = dict(decisions)
                right[u.cid] = 1
                left = dict(decisions)
                left[u.cid] = 0
                worklist.append(right)
                worklist.append(left)     # popped first: left explored first
                continue
            except OracleFuelExhausted:
                raise OracleFuelExhausted(fuel) from None
            if nf is not _FAIL:
                values[render_term(nf)] += 1
    finally:
        sys.setrecursionlimit(old_limit)
    return values


# -- printing (same canonical format as the engine, independently written) ---

def render_term(term, nested: bool = False) -> str:
    if isinstance(term, OInt):
        return f"({term.value})" if (term.value < 0 and nested) else str(term.value)
    if isinstance(term, OCon) and term.name == ":":
        return _render_list(term)
    if isinstance(term, OCon) and term.name == "Pair":
        return f"({render_term(term.args[0])},{render_term(term.args[1])})"
    if not term.args:
        return term.name
    parts = [term.name] + [render_term(a, True) for a in term.args]
    text = " ".join(parts)
    return f"({text})" if nested else text


def _render_list(term: OCon) -> str:
    elems = []
    cur = term
    while isinstance(cur, OCon) and cur.name == ":":
        elems.append(cur.args[0])
        cur = cur.args[1]
    if isinstance(cur, OCon) and cur.name == "[]":
        return "[" + ",".join(render_term(e) for e in elems) + "]"
    parts = [render_term(e, True) for e in elems] + [render_term(cur, True)]
    return "(" + " : ".join(parts) + ")"
