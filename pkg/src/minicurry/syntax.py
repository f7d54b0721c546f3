"""MiniCurry surface syntax: lexing, parsing, checking, and where-desugaring.

A MiniCurry file (`.mcy`) is a sequence of declarations.  A declaration
starts in column 0; indented lines continue the declaration above.  Line
comments start with `--`.

    program  := { datadecl | rule }
    datadecl := "data" Con "=" alt { "|" alt }
    alt      := Con { typearg }                 -- argument positions counted
    rule     := ident { pat } "=" expr [ "where" binding { ";" binding } ]
    binding  := ident "=" expr
    pat      := ident | "_" | int | Con | "(" Con { pat } ")"
              | "[]" | "(" pat ":" pat ")" | "(" pat "," pat ")"

Expression atoms: ident, Con, int, "failed", "(e)", "(e1,e2)", "[e1,...,en]",
left sections "(e op)" and bare operators "(op)" for op other than `?`.
Infix operators, loosest to tightest:

    ?  (right)  <  == <= (non-assoc)  <  : (right)  <  + - (left)  <  * (left)
    <  application

List sugar `[a,b]` becomes `a : (b : [])`; tuple sugar `(a,b)` becomes the
built-in 2-ary constructor `Pair`.  Integer literals are non-negative and
wrap to signed 64 bits; negative values arise only through subtraction.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

INT_MIN = -(1 << 63)
INT_MASK = (1 << 64) - 1


def wrap64(v: int) -> int:
    """Wrap an unbounded int into signed 64-bit two's complement."""
    return ((v - INT_MIN) & INT_MASK) + INT_MIN


class CompileError(Exception):
    """Any error while turning source text into a checked program."""

    def __init__(self, message: str, line: int | None = None, col: int | None = None):
        super().__init__(message)
        self.message = message
        self.line = line
        self.col = col

    def __str__(self) -> str:
        if self.line is not None:
            return f"{self.line}:{self.col}: {self.message}"
        return self.message


# --------------------------------------------------------------------------
# Surface AST
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Lit:
    value: int


@dataclass(frozen=True)
class App:
    fun: "Expr"
    args: tuple["Expr", ...]


@dataclass(frozen=True)
class Choice:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Fail:
    pass


Expr = Var | Lit | App | Choice | Fail


@dataclass(frozen=True)
class PVar:
    name: str


@dataclass(frozen=True)
class PWild:
    pass


@dataclass(frozen=True)
class PInt:
    value: int


@dataclass(frozen=True)
class PCons:
    name: str
    args: tuple["Pattern", ...]


Pattern = PVar | PWild | PInt | PCons


@dataclass(frozen=True)
class DataDecl:
    type_name: str
    constructors: tuple[tuple[str, int], ...]   # (name, arity) in declaration order


@dataclass(frozen=True)
class Rule:
    name: str
    patterns: tuple[Pattern, ...]
    body: Expr
    wheres: tuple[tuple[str, Expr], ...]        # dependency-ordered after desugaring
    line: int = 0


@dataclass
class SurfaceProgram:
    data_decls: list[DataDecl]
    functions: dict[str, list[Rule]]            # insertion order = source order
    goal: str = "main"


# The list and tuple sugar targets exist in every program, prelude or not.
# Their constructor names are not lexically expressible as ConNames, which is
# why they are injected rather than declared in prelude.mcy.
BUILTIN_DATA = (
    DataDecl("List", (("[]", 0), (":", 2))),
    DataDecl("Pair", (("Pair", 2),)),
)

# Surface-visible primitive functions (name -> arity).  `apply` is inserted
# by compilation for variable-headed and over-saturated applications and is
# reserved: user code cannot name it.
PRIM_ARITIES = {"+": 2, "-": 2, "*": 2, "==": 2, "<=": 2}
RESERVED_NAMES = {"apply"}

KEYWORDS = {"data", "where", "failed"}

# --------------------------------------------------------------------------
# Lexer
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Token:
    kind: str       # ID CON INT OP PUNCT KW EOF
    text: str
    line: int
    col: int


_TOKEN_RE = re.compile(
    r"""(?P<ws>[ \t\r]+)
      | (?P<comment>--[^\n]*)
      | (?P<int>\d+)
      | (?P<id>[a-z][A-Za-z0-9_']*)
      | (?P<con>[A-Z][A-Za-z0-9_']*)
      | (?P<op>==|<=|\?|:|\+|-|\*)
      | (?P<punct>[=()\[\],;|_])
    """,
    re.VERBOSE,
)


def _lex_line(text: str, line_no: int, out: list[Token]) -> None:
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise CompileError(f"unexpected character {text[pos]!r}", line_no, pos + 1)
        pos = m.end()
        kind = m.lastgroup
        if kind in ("ws", "comment"):
            continue
        value = m.group()
        if kind == "id" and value in KEYWORDS:
            kind = "KW"
        out.append(Token(kind.upper() if kind not in ("KW",) else "KW", value, line_no, m.start() + 1))


def _logical_decls(source: str) -> list[list[Token]]:
    """Split source into per-declaration token lists.

    A declaration starts at column 0; lines starting with whitespace continue
    the current declaration.  Blank and comment-only lines are ignored.
    """
    decls: list[list[Token]] = []
    current: list[Token] | None = None
    for i, raw in enumerate(source.splitlines(), start=1):
        stripped = raw.strip()
        if not stripped or stripped.startswith("--"):
            continue
        indented = raw[0] in " \t"
        if indented:
            if current is None:
                raise CompileError("unexpected indentation at top level", i, 1)
            _lex_line(raw, i, current)
        else:
            current = []
            decls.append(current)
            _lex_line(raw, i, current)
    return [d for d in decls if d]


# --------------------------------------------------------------------------
# Parser
# --------------------------------------------------------------------------

_MAX_DEPTH = 200

# (ops, associativity) loosest binding first; `?` handled separately so it
# can build Choice nodes directly.
_INFIX_LEVELS: list[tuple[tuple[str, ...], str]] = [
    (("==", "<="), "none"),
    ((":",), "right"),
    (("+", "-"), "left"),
    (("*",), "left"),
]
_SECTION_OPS = {"==", "<=", ":", "+", "-", "*"}


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0
        self.depth = 0

    # -- token helpers ----------------------------------------------------

    def peek(self, ahead: int = 0) -> Token | None:
        i = self.pos + ahead
        return self.tokens[i] if i < len(self.tokens) else None

    def next(self) -> Token:
        tok = self.peek()
        if tok is None:
            last = self.tokens[-1]
            raise CompileError("unexpected end of declaration", last.line, last.col)
        self.pos += 1
        return tok

    def expect(self, kind: str, text: str | None = None) -> Token:
        tok = self.next()
        if tok.kind != kind or (text is not None and tok.text != text):
            want = text if text is not None else kind.lower()
            raise CompileError(f"expected {want!r}, found {tok.text!r}", tok.line, tok.col)
        return tok

    def at(self, kind: str, text: str | None = None) -> bool:
        tok = self.peek()
        return tok is not None and tok.kind == kind and (text is None or tok.text == text)

    def done(self) -> bool:
        return self.pos >= len(self.tokens)

    def _enter(self, tok: Token) -> None:
        self.depth += 1
        if self.depth > _MAX_DEPTH:
            raise CompileError("expression nested too deeply", tok.line, tok.col)

    # -- declarations ------------------------------------------------------

    def parse_data(self) -> DataDecl:
        self.expect("KW", "data")
        name = self.expect("CON").text
        self.expect("PUNCT", "=")
        alts = [self.parse_alt()]
        while self.at("PUNCT", "|"):
            self.next()
            alts.append(self.parse_alt())
        if not self.done():
            tok = self.peek()
            raise CompileError(f"unexpected {tok.text!r} in data declaration", tok.line, tok.col)
        return DataDecl(name, tuple(alts))

    def parse_alt(self) -> tuple[str, int]:
        con = self.expect("CON")
        arity = 0
        # argument positions are counted; the type tokens themselves are ignored
        while True:
            tok = self.peek()
            if tok is None or tok.kind == "PUNCT" and tok.text == "|":
                break
            if tok.kind in ("CON", "ID"):
                self.next()
                arity += 1
            elif tok.kind == "PUNCT" and tok.text in "([":
                self._skip_balanced()
                arity += 1
            else:
                raise CompileError(f"unexpected {tok.text!r} in constructor declaration",
                                   tok.line, tok.col)
        return (con.text, arity)

    def _skip_balanced(self) -> None:
        opener = self.next()
        close = ")" if opener.text == "(" else "]"
        depth = 1
        while depth:
            tok = self.next()
            if tok.kind == "PUNCT" and tok.text in "([":
                depth += 1
            elif tok.kind == "PUNCT" and tok.text in ")]":
                if tok.text != close and depth == 1:
                    raise CompileError(f"mismatched {tok.text!r}", tok.line, tok.col)
                depth -= 1

    def parse_rule(self) -> Rule:
        fname = self.expect("ID")
        pats: list[Pattern] = []
        while not self.at("PUNCT", "="):
            pats.append(self.parse_pattern())
        self.expect("PUNCT", "=")
        body = self.parse_expr()
        wheres: list[tuple[str, Expr]] = []
        if self.at("KW", "where"):
            self.next()
            while True:
                bname = self.expect("ID")
                self.expect("PUNCT", "=")
                bexpr = self.parse_expr()
                wheres.append((bname.text, bexpr))
                if self.at("PUNCT", ";"):
                    self.next()
                    continue
                break
        if not self.done():
            tok = self.peek()
            raise CompileError(f"unexpected {tok.text!r} after rule", tok.line, tok.col)
        return Rule(fname.text, tuple(pats), body, tuple(wheres), fname.line)

    # -- patterns -----------------------------------------------------------

    def parse_pattern(self) -> Pattern:
        tok = self.peek()
        if tok is None:
            raise CompileError("pattern expected", self.tokens[-1].line, self.tokens[-1].col)
        self._enter(tok)
        try:
            if tok.kind == "ID":
                self.next()
                return PVar(tok.text)
            if tok.kind == "PUNCT" and tok.text == "_":
                self.next()
                return PWild()
            if tok.kind == "INT":
                self.next()
                return PInt(self._int_value(tok))
            if tok.kind == "CON":
                self.next()
                return PCons(tok.text, ())
            if tok.kind == "PUNCT" and tok.text == "[":
                self.next()
                self.expect("PUNCT", "]")
                return PCons("[]", ())
            if tok.kind == "PUNCT" and tok.text == "(":
                self.next()
                return self._paren_pattern()
            raise CompileError(f"unexpected {tok.text!r} in pattern", tok.line, tok.col)
        finally:
            self.depth -= 1

    def _paren_pattern(self) -> Pattern:
        # "(" Con { pat } ")" | "(" pat ":" pat ")" | "(" pat "," pat ")" | "(" pat ")"
        if self.at("CON"):
            con = self.next()
            args: list[Pattern] = []
            while not self.at("PUNCT", ")") and not self.at("OP", ":") and not self.at("PUNCT", ","):
                args.append(self.parse_pattern())
            if self.at("PUNCT", ")"):
                self.next()
                return PCons(con.text, tuple(args))
            first: Pattern = PCons(con.text, tuple(args))
        else:
            first = self.parse_pattern()
        if self.at("OP", ":"):
            self.next()
            tail = self._cons_pattern_tail()
            self.expect("PUNCT", ")")
            return PCons(":", (first, tail))
        if self.at("PUNCT", ","):
            self.next()
            second = self._cons_pattern_tail()
            self.expect("PUNCT", ")")
            return PCons("Pair", (first, second))
        self.expect("PUNCT", ")")
        return first

    def _cons_pattern_tail(self) -> Pattern:
        pat = self.parse_pattern()
        if self.at("OP", ":"):
            self.next()
            return PCons(":", (pat, self._cons_pattern_tail()))
        return pat

    # -- expressions ---------------------------------------------------------

    def parse_expr(self) -> Expr:
        # `?` is right-associative and the loosest level
        left = self.parse_infix(0)
        if self.at("OP", "?"):
            self.next()
            return Choice(left, self.parse_expr())
        return left

    def parse_infix(self, level: int) -> Expr:
        if level >= len(_INFIX_LEVELS):
            return self.parse_app()
        ops, assoc = _INFIX_LEVELS[level]
        left = self.parse_infix(level + 1)
        while True:
            tok = self.peek()
            if tok is None or tok.kind != "OP" or tok.text not in ops:
                return left
            if not self._starts_atom(self.peek(1)):
                return left          # leave the operator for a section
            self.next()
            if assoc == "right":
                right = self.parse_infix(level)    # consume the whole right side
                return App(Var(tok.text), (left, right))
            right = self.parse_infix(level + 1)
            left = App(Var(tok.text), (left, right))
            if assoc == "none":
                nxt = self.peek()
                if nxt is not None and nxt.kind == "OP" and nxt.text in ops:
                    raise CompileError(f"operator {tok.text!r} is non-associative",
                                       nxt.line, nxt.col)
                return left

    def parse_app(self) -> Expr:
        head = self.parse_atom()
        args: list[Expr] = []
        while self._starts_atom(self.peek()):
            args.append(self.parse_atom())
        return App(head, tuple(args)) if args else head

    @staticmethod
    def _int_value(tok: Token) -> int:
        v = int(tok.text)
        if v > (1 << 63) - 1:
            raise CompileError("integer literal out of 64-bit range", tok.line, tok.col)
        return v

    @staticmethod
    def _starts_atom(tok: Token | None) -> bool:
        if tok is None:
            return False
        if tok.kind in ("ID", "CON", "INT"):
            return True
        if tok.kind == "KW" and tok.text == "failed":
            return True
        return tok.kind == "PUNCT" and tok.text in "(["

    def parse_atom(self) -> Expr:
        tok = self.next()
        self._enter(tok)
        try:
            if tok.kind == "INT":
                return Lit(self._int_value(tok))
            if tok.kind in ("ID", "CON"):
                return Var(tok.text)
            if tok.kind == "KW" and tok.text == "failed":
                return Fail()
            if tok.kind == "PUNCT" and tok.text == "_":
                raise CompileError("anonymous '_' is only allowed in patterns",
                                   tok.line, tok.col)
            if tok.kind == "PUNCT" and tok.text == "[":
                return self._list_expr()
            if tok.kind == "PUNCT" and tok.text == "(":
                return self._paren_expr(tok)
            raise CompileError(f"unexpected {tok.text!r} in expression", tok.line, tok.col)
        finally:
            self.depth -= 1

    def _list_expr(self) -> Expr:
        if self.at("PUNCT", "]"):
            self.next()
            return Var("[]")
        elems = [self.parse_expr()]
        while self.at("PUNCT", ","):
            self.next()
            elems.append(self.parse_expr())
        self.expect("PUNCT", "]")
        out: Expr = Var("[]")
        for e in reversed(elems):
            out = App(Var(":"), (e, out))
        return out

    def _paren_expr(self, opener: Token) -> Expr:
        # bare operator "(op)"
        tok = self.peek()
        if tok is not None and tok.kind == "OP" and tok.text in _SECTION_OPS \
                and self.at("OP") and self.peek(1) is not None \
                and self.peek(1).kind == "PUNCT" and self.peek(1).text == ")":
            self.next()
            self.next()
            return App(Var(tok.text), ())
        e = self.parse_expr()
        nxt = self.peek()
        if nxt is not None and nxt.kind == "OP" and nxt.text in _SECTION_OPS \
                and self.peek(1) is not None and self.peek(1).kind == "PUNCT" \
                and self.peek(1).text == ")":
            self.next()
            self.next()
            return App(Var(nxt.text), (e,))      # left section
        if self.at("PUNCT", ","):
            self.next()
            second = self.parse_expr()
            self.expect("PUNCT", ")")
            return App(Var("Pair"), (e, second))
        self.expect("PUNCT", ")")
        return e


# --------------------------------------------------------------------------
# Checking and where-desugaring
# --------------------------------------------------------------------------

def _pattern_vars(pat: Pattern, out: list[str]) -> None:
    if isinstance(pat, PVar):
        out.append(pat.name)
    elif isinstance(pat, PCons):
        for sub in pat.args:
            _pattern_vars(sub, out)


def _expr_vars(e: Expr, out: set[str]) -> None:
    if isinstance(e, Var):
        out.add(e.name)
    elif isinstance(e, App):
        _expr_vars(e.fun, out)
        for a in e.args:
            _expr_vars(a, out)
    elif isinstance(e, Choice):
        _expr_vars(e.left, out)
        _expr_vars(e.right, out)


def free_vars(e: Expr) -> set[str]:
    out: set[str] = set()
    _expr_vars(e, out)
    return out


def desugar_where(rule: Rule) -> Rule:
    """Order where-bindings by dependency and drop unused ones.

    Bindings may refer to pattern variables and to each other as long as the
    reference graph is acyclic; cycles (including self-reference) are
    rejected.  Bindings not reachable from the body are dropped: they are
    non-recursive and the language has no effects, so they cannot influence
    any value.
    """
    if not rule.wheres:
        return rule
    names = [n for n, _ in rule.wheres]
    if len(set(names)) != len(names):
        dup = next(n for i, n in enumerate(names) if n in names[:i])
        raise CompileError(f"duplicate where binding {dup!r} in rule for {rule.name!r}",
                           rule.line, 1)
    patvars: list[str] = []
    for p in rule.patterns:
        _pattern_vars(p, patvars)
    shadowed = set(names) & set(patvars)
    if shadowed:
        raise CompileError(
            f"where binding {sorted(shadowed)[0]!r} shadows a pattern variable "
            f"in rule for {rule.name!r}", rule.line, 1)

    bound = dict(rule.wheres)
    deps = {n: free_vars(e) & set(names) for n, e in rule.wheres}

    # reachability from the body
    needed: set[str] = free_vars(rule.body) & set(names)
    frontier = list(needed)
    while frontier:
        n = frontier.pop()
        for d in deps[n]:
            if d not in needed:
                needed.add(d)
                frontier.append(d)

    # Kahn's toposort over the needed bindings, source order as tie-break
    kept = [n for n in names if n in needed]
    placed: list[str] = []
    ready = set()
    while kept:
        progressed = False
        for n in list(kept):
            if deps[n] & needed <= ready:
                placed.append(n)
                ready.add(n)
                kept.remove(n)
                progressed = True
        if not progressed:
            raise CompileError(
                f"recursive where binding involving {kept[0]!r} in rule for {rule.name!r}",
                rule.line, 1)
    return Rule(rule.name, rule.patterns, rule.body,
                tuple((n, bound[n]) for n in placed), rule.line)


def _check_rule_scope(rule: Rule, globals_: set[str]) -> None:
    patvars: list[str] = []
    for p in rule.patterns:
        _pattern_vars(p, patvars)
    if len(set(patvars)) != len(patvars):
        dup = next(v for i, v in enumerate(patvars) if v in patvars[:i])
        raise CompileError(
            f"nonlinear pattern: variable {dup!r} occurs twice in rule for {rule.name!r}",
            rule.line, 1)
    scope = set(patvars) | {n for n, _ in rule.wheres} | globals_
    local = set(patvars) | {n for n, _ in rule.wheres}
    for label, e in [("body", rule.body)] + [(f"where binding {n!r}", b) for n, b in rule.wheres]:
        for v in sorted(free_vars(e)):
            if v not in scope:
                raise CompileError(
                    f"unbound variable {v!r} in {label} of rule for {rule.name!r}",
                    rule.line, 1)
            if v in RESERVED_NAMES and v not in local:
                raise CompileError(f"{v!r} is reserved", rule.line, 1)


def _check_patterns(pat: Pattern, cons_table: dict[str, int], rule: Rule) -> None:
    if isinstance(pat, PCons):
        if pat.name not in cons_table:
            raise CompileError(f"unknown constructor {pat.name!r} in rule for {rule.name!r}",
                               rule.line, 1)
        want = cons_table[pat.name]
        if len(pat.args) != want:
            raise CompileError(
                f"constructor {pat.name!r} takes {want} arguments, "
                f"pattern has {len(pat.args)} in rule for {rule.name!r}",
                rule.line, 1)
        for sub in pat.args:
            _check_patterns(sub, cons_table, rule)


def check_program(data_decls: list[DataDecl], rules: list[Rule],
                  goal: str = "main") -> SurfaceProgram:
    """Run all static checks and assemble a SurfaceProgram."""
    all_data = list(BUILTIN_DATA) + data_decls
    cons_table: dict[str, int] = {}
    type_names: set[str] = set()
    for decl in all_data:
        if decl.type_name in type_names:
            raise CompileError(f"duplicate data declaration {decl.type_name!r}")
        type_names.add(decl.type_name)
        for cname, arity in decl.constructors:
            if cname in cons_table:
                raise CompileError(f"constructor {cname!r} declared twice")
            cons_table[cname] = arity

    functions: dict[str, list[Rule]] = {}
    closed: set[str] = set()
    for rule in rules:
        if rule.name in RESERVED_NAMES:
            raise CompileError(f"{rule.name!r} is reserved", rule.line, 1)
        if rule.name in cons_table:
            raise CompileError(
                f"{rule.name!r} is both a constructor and a function", rule.line, 1)
        if rule.name in closed:
            raise CompileError(
                f"rules for {rule.name!r} must be contiguous", rule.line, 1)
        group = functions.setdefault(rule.name, [])
        if group and len(group[0].patterns) != len(rule.patterns):
            raise CompileError(
                f"rules for {rule.name!r} disagree on arity", rule.line, 1)
        group.append(rule)
        for other in functions:
            if other != rule.name:
                closed.add(other)

    globals_ = set(functions) | set(cons_table) | set(PRIM_ARITIES)
    checked: dict[str, list[Rule]] = {}
    for name, group in functions.items():
        out = []
        for rule in group:
            for p in rule.patterns:
                _check_patterns(p, cons_table, rule)
            _check_rule_scope(rule, globals_)
            out.append(desugar_where(rule))
        checked[name] = out
    return SurfaceProgram(data_decls, checked, goal)


def parse_decls(source: str) -> tuple[list[DataDecl], list[Rule]]:
    """Parse declarations without cross-declaration checks."""
    data_decls: list[DataDecl] = []
    rules: list[Rule] = []
    for tokens in _logical_decls(source):
        parser = _Parser(tokens)
        if parser.at("KW", "data"):
            data_decls.append(parser.parse_data())
        elif parser.at("ID"):
            rules.append(parser.parse_rule())
        else:
            tok = tokens[0]
            raise CompileError(f"declaration expected, found {tok.text!r}", tok.line, tok.col)
    return data_decls, rules


def parse_program(source: str, goal: str = "main") -> SurfaceProgram:
    """Parse and check self-contained MiniCurry source text.

    Every input either yields a program or raises CompileError with a
    position; no other exception escapes.
    """
    data_decls, rules = parse_decls(source)
    return check_program(data_decls, rules, goal)


def load_program(source: str, use_prelude: bool = True,
                 prelude_text: str | None = None, goal: str = "main") -> SurfaceProgram:
    """Parse source (plus the implicit prelude) and check the whole program."""
    data_decls, rules = [], []
    if use_prelude:
        if prelude_text is None:
            from . import builtins as _builtins
            prelude_text = _builtins.prelude_text()
        data_decls, rules = parse_decls(prelude_text)
    user_data, user_rules = parse_decls(source)
    return check_program(data_decls + user_data, rules + user_rules, goal)


# --------------------------------------------------------------------------
# Pretty printing (round-trip: parse(pretty(p)) is structurally equal to p)
# --------------------------------------------------------------------------

_PREC_CHOICE, _PREC_CMP, _PREC_CONS, _PREC_ADD, _PREC_MUL, _PREC_APP, _PREC_ATOM = range(7)
_OP_PREC = {"==": _PREC_CMP, "<=": _PREC_CMP, ":": _PREC_CONS,
            "+": _PREC_ADD, "-": _PREC_ADD, "*": _PREC_MUL}


def _paren(s: str, need: bool) -> str:
    return f"({s})" if need else s


def expr_to_text(e: Expr, prec: int = 0) -> str:
    if isinstance(e, Lit):
        return _paren(str(e.value), e.value < 0 and prec >= _PREC_APP)
    if isinstance(e, Var):
        return f"({e.name})" if e.name in _OP_PREC else e.name
    if isinstance(e, Fail):
        return "failed"
    if isinstance(e, Choice):
        s = f"{expr_to_text(e.left, _PREC_CHOICE + 1)} ? {expr_to_text(e.right, _PREC_CHOICE)}"
        return _paren(s, prec > _PREC_CHOICE)
    if isinstance(e, App):
        if isinstance(e.fun, Var) and e.fun.name in _OP_PREC and len(e.args) == 2:
            p = _OP_PREC[e.fun.name]
            if e.fun.name == ":":
                s = f"{expr_to_text(e.args[0], p + 1)} : {expr_to_text(e.args[1], p)}"
            else:
                bump = 1 if e.fun.name in ("==", "<=") else 0
                s = (f"{expr_to_text(e.args[0], p + bump)} {e.fun.name} "
                     f"{expr_to_text(e.args[1], p + 1)}")
            return _paren(s, prec > p)
        if isinstance(e.fun, Var) and e.fun.name in _OP_PREC and len(e.args) == 1:
            return f"({expr_to_text(e.args[0], _OP_PREC[e.fun.name] + 1)} {e.fun.name})"
        if isinstance(e.fun, Var) and e.fun.name in _OP_PREC and not e.args:
            return f"({e.fun.name})"
        if isinstance(e.fun, Var) and e.fun.name == "Pair" and len(e.args) == 2:
            return f"({expr_to_text(e.args[0])}, {expr_to_text(e.args[1])})"
        if not e.args:
            return expr_to_text(e.fun, prec)
        parts = [expr_to_text(e.fun, _PREC_APP)] + \
                [expr_to_text(a, _PREC_ATOM) for a in e.args]
        return _paren(" ".join(parts), prec > _PREC_APP)
    raise TypeError(f"not an expression: {e!r}")


def pattern_to_text(pat: Pattern, nested: bool = False) -> str:
    if isinstance(pat, PVar):
        return pat.name
    if isinstance(pat, PWild):
        return "_"
    if isinstance(pat, PInt):
        return str(pat.value)
    if isinstance(pat, PCons):
        if pat.name == "[]":
            return "[]"
        if pat.name == ":":
            return f"({pattern_to_text(pat.args[0], True)} : {pattern_to_text(pat.args[1], True)})"
        if pat.name == "Pair":
            return f"({pattern_to_text(pat.args[0], True)}, {pattern_to_text(pat.args[1], True)})"
        if not pat.args:
            return pat.name
        inner = " ".join([pat.name] + [pattern_to_text(a, True) for a in pat.args])
        return f"({inner})"
    raise TypeError(f"not a pattern: {pat!r}")


def program_to_text(prog: SurfaceProgram) -> str:
    lines: list[str] = []
    for decl in prog.data_decls:
        alts = " | ".join(
            " ".join([c] + ["a"] * arity) for c, arity in decl.constructors)
        lines.append(f"data {decl.type_name} = {alts}")
    for group in prog.functions.values():
        for rule in group:
            lhs = " ".join([rule.name] + [pattern_to_text(p) for p in rule.patterns])
            line = f"{lhs} = {expr_to_text(rule.body)}"
            if rule.wheres:
                binds = "; ".join(f"{n} = {expr_to_text(e)}" for n, e in rule.wheres)
                line += f" where {binds}"
            lines.append(line)
    return "\n".join(lines) + "\n"
