"""Compilation: definitional trees, tag assignment, and executable IR.

Every node class gets a small integer tag used for dense dispatch: 0 for all
functions, 1 for choices, 2 for failures, and 3.. for the constructors of
each type in declaration order.  A case over a type with N constructors
therefore lowers to a complete table of 3+N entries; constructors without a
source rule map to an exempt entry, which executes as a rewrite to failure.
Integer scrutinees use a sparse literal map behind the three reserved tags.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import syntax
from .syntax import (
    App, Choice, CompileError, DataDecl, Expr, Fail, Lit, PCons, PInt, PVar,
    PWild, Pattern, Rule, SurfaceProgram, Var, expr_to_text, pattern_to_text,
)

TAG_FUNCTION = 0
TAG_CHOICE = 1
TAG_FAILURE = 2
TAG_FIRST_CONSTRUCTOR = 3

# node/symbol kinds
K_FUNC = 0
K_CONS = 1
K_CHOICE = 2
K_FAIL = 3
K_INT = 4
K_PARTIAL = 5

KIND_NAMES = {K_FUNC: "function", K_CONS: "constructor", K_CHOICE: "choice",
              K_FAIL: "failure", K_INT: "int", K_PARTIAL: "partial"}


class InfoEntry:
    """Static per-symbol record: the compile-time half of the node layout.

    Exactly one entry exists per program symbol.  Function entries carry
    both the surface definitional tree (for dumps) and the lowered dispatch
    code the engine executes.
    """

    __slots__ = ("name", "arity", "tag", "kind", "type_name", "cons_index",
                 "dtree", "code")

    def __init__(self, name, arity, tag, kind, type_name=None, cons_index=None):
        self.name = name
        self.arity = arity
        self.tag = tag
        self.kind = kind
        self.type_name = type_name
        self.cons_index = cons_index
        self.dtree = None       # DefTree for functions
        self.code = None        # lowered Step or PrimOp for functions

    def __repr__(self):
        return f"<info {self.name}/{self.arity} tag={self.tag}>"


# --------------------------------------------------------------------------
# Definitional trees (surface form)
# --------------------------------------------------------------------------

@dataclass
class DLeaf:
    bindings: dict[str, tuple[int, ...]]     # pattern variable -> argument path
    body: Expr
    wheres: tuple[tuple[str, Expr], ...]


@dataclass
class DBranch:
    path: tuple[int, ...]
    type_name: str | None                    # None for an integer branch
    cases: dict                              # cons name (or int literal) -> DefTree


@dataclass
class DOr:
    left: "DefTree"
    right: "DefTree"


class DExempt:
    """Case entry for a constructor with no source rule; rewrites to failure."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance


EXEMPT = DExempt()
DefTree = DLeaf | DBranch | DOr | DExempt


def _is_var(p: Pattern) -> bool:
    return isinstance(p, (PVar, PWild))


def build_def_tree(rules: list[Rule], cons_types: dict[str, tuple[str, int]],
                   type_constructors: dict[str, list[str]],
                   fname: str | None = None) -> DefTree:
    """Combine a function's rules into a single tree of case distinctions.

    `cons_types` maps a constructor name to its (type name, index);
    `type_constructors` maps a type to its constructor names in declaration
    order.  Groups of rules that are variables at every remaining position
    combine left-to-right with Or nodes; anything else must be inductively
    sequential (some position where every remaining rule has a constructor
    or literal pattern), or compilation fails naming the function.  Branch
    case maps come out complete: constructors with no source rule map to
    Exempt, which executes as a rewrite to failure.
    """
    fname = fname or rules[0].name
    arity = len(rules[0].patterns)
    rows = [({(i,): p for i, p in enumerate(r.patterns)}, r) for r in rules]
    positions = [(i,) for i in range(arity)]
    return _build(rows, positions, cons_types, type_constructors, fname)


def _leaf(patmap: dict, rule: Rule) -> DLeaf:
    bindings = {}

    def walk(path, pat):
        if isinstance(pat, PVar):
            bindings[pat.name] = path
        elif isinstance(pat, PCons):
            for j, sub in enumerate(pat.args):
                walk(path + (j,), sub)

    for path, pat in patmap.items():
        walk(path, pat)
    return DLeaf(bindings, rule.body, rule.wheres)


def _build(rows, positions, cons_types, type_constructors, fname) -> DefTree:
    if all(all(_is_var(p) for p in patmap.values()) for patmap, _ in rows):
        leaves = [_leaf(patmap, rule) for patmap, rule in rows]
        tree: DefTree = leaves[-1]
        for lf in reversed(leaves[:-1]):
            tree = DOr(lf, tree)
        return tree

    candidates = [p for p in positions
                  if all(not _is_var(patmap[p]) for patmap, _ in rows)]
    if not candidates:
        raise CompileError(
            f"function {fname!r} is not inductively sequential: "
            "rules overlap at incompatible positions")
    pos = candidates[0]     # leftmost-outermost demanded position

    head_pats = [patmap[pos] for patmap, _ in rows]
    if all(isinstance(p, PInt) for p in head_pats):
        cases: dict = {}
        for value in dict.fromkeys(p.value for p in head_pats):
            sub_rows = [({q: pm for q, pm in patmap.items() if q != pos}, rule)
                        for patmap, rule in rows
                        if isinstance(patmap[pos], PInt) and patmap[pos].value == value]
            sub_positions = [q for q in positions if q != pos]
            cases[value] = _build(sub_rows, sub_positions, cons_types,
                                  type_constructors, fname)
        return DBranch(pos, None, cases)

    if any(isinstance(p, PInt) for p in head_pats):
        raise CompileError(
            f"function {fname!r} mixes integer and constructor patterns "
            f"at argument {pos[0] + 1}")

    types = {cons_types[p.name][0] for p in head_pats}
    if len(types) != 1:
        raise CompileError(
            f"function {fname!r} matches constructors of different types "
            f"({', '.join(sorted(types))}) at the same position")
    type_name = types.pop()

    by_cons: dict[str, list] = {}
    for patmap, rule in rows:
        by_cons.setdefault(patmap[pos].name, []).append((patmap, rule))
    cases = {}
    for cname in type_constructors[type_name]:
        group = by_cons.get(cname)
        if group is None:
            cases[cname] = EXEMPT
            continue
        sub_rows = []
        for patmap, rule in group:
            pat = patmap[pos]
            newmap = {q: pm for q, pm in patmap.items() if q != pos}
            for j, sub in enumerate(pat.args):
                newmap[pos + (j,)] = sub
            sub_rows.append((newmap, rule))
        at = positions.index(pos)
        pat0 = group[0][0][pos]
        sub_positions = (positions[:at]
                         + [pos + (j,) for j in range(len(pat0.args))]
                         + positions[at + 1:])
        cases[cname] = _build(sub_rows, sub_positions, cons_types,
                              type_constructors, fname)
    return DBranch(pos, type_name, cases)


# --------------------------------------------------------------------------
# Lowered form: templates and dispatch steps
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class TArg:
    path: tuple[int, ...]


@dataclass(frozen=True)
class TSlot:
    index: int


@dataclass(frozen=True)
class TLit:
    value: int


@dataclass(frozen=True)
class TNode:
    info: InfoEntry
    args: tuple                         # saturated application


@dataclass(frozen=True)
class TPartial:
    target: InfoEntry
    args: tuple                         # fewer than target.arity


@dataclass(frozen=True)
class TChoice:
    left: object
    right: object


class TFail:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance


T_FAIL = TFail()
Template = TArg | TSlot | TLit | TNode | TPartial | TChoice | TFail


@dataclass
class SLeaf:
    slots: tuple                        # where-binding templates, dependency order
    body: Template
    slot_names: tuple[str, ...] = ()


@dataclass
class SOr:
    left: object
    right: object


@dataclass
class STable:
    path: tuple[int, ...]
    type_name: str
    subs: tuple                         # per constructor: Step or EXEMPT


@dataclass
class SIntTable:
    path: tuple[int, ...]
    cases: dict                         # literal -> Step


Step = SLeaf | SOr | STable | SIntTable


class IRProgram:
    """Symbol table plus per-function lowered code, ready to execute."""

    def __init__(self, goal: str, prelude_merged: bool):
        self.entries: dict[str, InfoEntry] = {}
        self.types: dict[str, list[str]] = {}     # type -> constructor names in order
        self.goal = goal
        self.prelude_merged = prelude_merged
        self.int_info = InfoEntry("Int", 0, TAG_FIRST_CONSTRUCTOR, K_INT)
        self.choice_info = InfoEntry("?", 2, TAG_CHOICE, K_CHOICE)
        self.fail_info = InfoEntry("failed", 0, TAG_FAILURE, K_FAIL)
        self._partials: dict[tuple[str, int], InfoEntry] = {}
        self.uses_compare = False

    def add(self, entry: InfoEntry) -> InfoEntry:
        if entry.name in self.entries:
            raise CompileError(f"duplicate symbol {entry.name!r}")
        self.entries[entry.name] = entry
        return entry

    def info(self, name: str) -> InfoEntry:
        return self.entries[name]

    def partial_info(self, target: InfoEntry, ngiven: int) -> InfoEntry:
        """Interned info record for a partial application holding `ngiven` args."""
        key = (target.name, ngiven)
        entry = self._partials.get(key)
        if entry is None:
            entry = InfoEntry(target.name, ngiven, TAG_FIRST_CONSTRUCTOR, K_PARTIAL)
            self._partials[key] = entry
        return entry

    def goal_info(self) -> InfoEntry:
        entry = self.entries.get(self.goal)
        if entry is None or entry.kind != K_FUNC:
            raise CompileError(f"no function {self.goal!r} defined")
        if entry.arity != 0:
            raise CompileError(f"goal function {self.goal!r} must take no arguments")
        return entry


# --------------------------------------------------------------------------
# Tag assignment and lowering
# --------------------------------------------------------------------------

def assign_tags(program: SurfaceProgram, prelude_merged: bool = False) -> IRProgram:
    """Create the symbol table: reserved tags, then constructor tags 3.. per type."""
    ir = IRProgram(program.goal, prelude_merged)
    for decl in list(syntax.BUILTIN_DATA) + list(program.data_decls):
        ir.types[decl.type_name] = [c for c, _ in decl.constructors]
        for index, (cname, arity) in enumerate(decl.constructors):
            ir.add(InfoEntry(cname, arity, TAG_FIRST_CONSTRUCTOR + index, K_CONS,
                             decl.type_name, index))
    from . import builtins as _builtins
    for prim in _builtins.PRIMITIVES.values():
        entry = ir.add(InfoEntry(prim.name, prim.arity, TAG_FUNCTION, K_FUNC))
        entry.code = prim
    for fname, rules in program.functions.items():
        ir.add(InfoEntry(fname, len(rules[0].patterns), TAG_FUNCTION, K_FUNC))
    return ir


def compile_branch_tables(tree: DefTree, ir: IRProgram) -> Step:
    """Lower a definitional tree to dense dispatch tables and leaf templates.

    Every Branch becomes a table of 3+N entries indexed by tag: function,
    choice, and failure actions come first, then one entry per constructor
    (a subtree or the exempt failure action).  Integer branches use a sparse
    literal map behind the reserved tags instead of a dense table.
    """
    return _lower(tree, ir)


def _lower(tree: DefTree, ir: IRProgram) -> Step:
    if isinstance(tree, DLeaf):
        return _lower_leaf(tree, ir)
    if isinstance(tree, DOr):
        return SOr(_lower(tree.left, ir), _lower(tree.right, ir))
    if isinstance(tree, DBranch):
        if tree.type_name is None:
            cases = {v: _lower(sub, ir) for v, sub in tree.cases.items()}
            return SIntTable(tree.path, cases)
        order = ir.types[tree.type_name]
        subs = tuple(
            EXEMPT if tree.cases[c] is EXEMPT else _lower(tree.cases[c], ir)
            for c in order)
        return STable(tree.path, tree.type_name, subs)
    raise AssertionError(f"cannot lower {tree!r}")


def _lower_leaf(leaf: DLeaf, ir: IRProgram) -> SLeaf:
    env: dict[str, Template] = {n: TArg(p) for n, p in leaf.bindings.items()}
    slots = []
    names = []
    for name, expr in leaf.wheres:
        tpl = _compile_expr(expr, env, ir)
        if isinstance(tpl, (TArg, TSlot)):
            env[name] = tpl          # alias binding: no slot of its own
        else:
            env[name] = TSlot(len(slots))
            slots.append(tpl)
            names.append(name)
    body = _compile_expr(leaf.body, env, ir)
    return SLeaf(tuple(slots), body, tuple(names))


def _flatten_app(e: App) -> tuple[Expr, list[Expr]]:
    args: list[Expr] = list(e.args)
    fun = e.fun
    while isinstance(fun, App):
        args = list(fun.args) + args
        fun = fun.fun
    return fun, args


def _compile_expr(e: Expr, env: dict[str, Template], ir: IRProgram) -> Template:
    if isinstance(e, Lit):
        return TLit(e.value)
    if isinstance(e, Fail):
        return T_FAIL
    if isinstance(e, Choice):
        return TChoice(_compile_expr(e.left, env, ir), _compile_expr(e.right, env, ir))
    if isinstance(e, Var):
        return _compile_ref(e.name, [], env, ir)
    if isinstance(e, App):
        fun, args = _flatten_app(e)
        cargs = [_compile_expr(a, env, ir) for a in args]
        if isinstance(fun, Var):
            return _compile_ref(fun.name, cargs, env, ir)
        base = _compile_expr(fun, env, ir)
        return _apply_chain(base, cargs, ir)
    raise AssertionError(f"cannot compile {e!r}")


def _compile_ref(name: str, args: list, env: dict, ir: IRProgram) -> Template:
    if name in env:
        return _apply_chain(env[name], args, ir)
    entry = ir.entries.get(name)
    if entry is None:
        raise CompileError(f"unknown symbol {name!r}")
    if name in ("==", "<="):
        ir.uses_compare = True
    n = entry.arity
    if len(args) == n:
        return TNode(entry, tuple(args))
    if len(args) < n:
        return TPartial(entry, tuple(args))
    return _apply_chain(TNode(entry, tuple(args[:n])), args[n:], ir)


def _apply_chain(base: Template, args: list, ir: IRProgram) -> Template:
    apply_info = ir.info("apply")
    for a in args:
        base = TNode(apply_info, (base, a))
    return base


def compile_program(source_or_program, use_prelude: bool = True,
                    prelude_text: str | None = None, goal: str = "main") -> IRProgram:
    """Front-to-back compilation of MiniCurry source into executable IR."""
    if isinstance(source_or_program, str):
        program = syntax.load_program(source_or_program, use_prelude,
                                      prelude_text, goal)
    else:
        program = source_or_program

    ir = assign_tags(program, prelude_merged=use_prelude)
    cons_types = {}
    for tname, cnames in ir.types.items():
        for i, c in enumerate(cnames):
            cons_types[c] = (tname, i)
    for fname, rules in program.functions.items():
        entry = ir.info(fname)
        entry.dtree = build_def_tree(rules, cons_types, ir.types, fname)
        entry.code = compile_branch_tables(entry.dtree, ir)
    if ir.uses_compare and ("True" not in ir.entries or "False" not in ir.entries):
        raise CompileError(
            "comparison operators need Bool constructors True/False "
            "(define data Bool = False | True or use the prelude)")
    return ir


# --------------------------------------------------------------------------
# Textual dumps (stable formats, covered by golden tests)
# --------------------------------------------------------------------------

def _path_str(path: tuple[int, ...]) -> str:
    return "@" + ".".join(str(i + 1) for i in path)


def _dtree_lines(tree: DefTree, indent: int, out: list[str]) -> None:
    pad = "  " * indent
    if isinstance(tree, DLeaf):
        text = expr_to_text(tree.body)
        if tree.wheres:
            binds = "; ".join(f"{n} = {expr_to_text(e)}" for n, e in tree.wheres)
            text += f" where {binds}"
        out.append(f"{pad}leaf {text}")
    elif tree is EXEMPT:
        out.append(f"{pad}exempt")
    elif isinstance(tree, DOr):
        out.append(f"{pad}or {{")
        _dtree_lines(tree.left, indent + 1, out)
        _dtree_lines(tree.right, indent + 1, out)
        out.append(f"{pad}}}")
    elif isinstance(tree, DBranch):
        kind = "int " if tree.type_name is None else ""
        out.append(f"{pad}branch {kind}{_path_str(tree.path)} {{")
        if tree.type_name is None:
            for value, sub in tree.cases.items():
                out.append(f"{pad}  {value} ->")
                _dtree_lines(sub, indent + 2, out)
            out.append(f"{pad}  default -> exempt")
        else:
            for cname, sub in tree.cases.items():
                if sub is EXEMPT:
                    out.append(f"{pad}  {cname} -> exempt")
                else:
                    out.append(f"{pad}  {cname} ->")
                    _dtree_lines(sub, indent + 2, out)
        out.append(f"{pad}}}")


def dump_dtree(ir: IRProgram) -> str:
    out: list[str] = []
    for name, entry in ir.entries.items():
        if entry.kind == K_FUNC and entry.dtree is not None:
            out.append(f"{name}/{entry.arity}:")
            _dtree_lines(entry.dtree, 1, out)
    return "\n".join(out) + "\n"


def _step_lines(step, ir: IRProgram, indent: int, out: list[str]) -> None:
    pad = "  " * indent
    if isinstance(step, SLeaf):
        out.append(f"{pad}leaf")
    elif isinstance(step, SOr):
        out.append(f"{pad}or")
        _step_lines(step.left, ir, indent + 1, out)
        _step_lines(step.right, ir, indent + 1, out)
    elif step is EXEMPT:
        out.append(f"{pad}exempt")
    elif isinstance(step, SIntTable):
        out.append(f"{pad}inttable {_path_str(step.path)} size={len(step.cases)}+default")
        for value, sub in step.cases.items():
            out.append(f"{pad}  {value} ->")
            _step_lines(sub, ir, indent + 2, out)
        out.append(f"{pad}  default -> failure")
    elif isinstance(step, STable):
        order = ir.types[step.type_name]
        out.append(f"{pad}table {_path_str(step.path)} type={step.type_name} "
                   f"size={3 + len(order)}")
        out.append(f"{pad}  0:function -> evaluate")
        out.append(f"{pad}  1:choice -> pulltab")
        out.append(f"{pad}  2:failure -> fail")
        for i, cname in enumerate(order):
            sub = step.subs[i]
            if sub is EXEMPT:
                out.append(f"{pad}  {3 + i}:{cname} -> failure")
            else:
                out.append(f"{pad}  {3 + i}:{cname} ->")
                _step_lines(sub, ir, indent + 2, out)
    else:
        out.append(f"{pad}prim {step.name}")


def dump_icurry(ir: IRProgram) -> str:
    out = ["symbols:"]
    for entry in [ir.choice_info, ir.fail_info, ir.int_info]:
        out.append(f"  name={entry.name} arity={entry.arity} tag={entry.tag} "
                   f"kind={KIND_NAMES[entry.kind]}")
    for name, entry in ir.entries.items():
        line = (f"  name={name} arity={entry.arity} tag={entry.tag} "
                f"kind={KIND_NAMES[entry.kind]}")
        if entry.kind == K_CONS:
            line += f" type={entry.type_name} index={entry.cons_index}"
        out.append(line)
    out.append("functions:")
    for name, entry in ir.entries.items():
        if entry.kind != K_FUNC:
            continue
        out.append(f"  {name}/{entry.arity}:")
        _step_lines(entry.code, ir, 2, out)
    return "\n".join(out) + "\n"
