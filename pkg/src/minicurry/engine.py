"""Single atomic evaluation actions: locate, then rewrite / pull-tab / fail.

Each call to find_action re-traverses from the computation's root and
returns exactly one action; apply_action performs at most one overwrite plus
a bounded number of fresh allocations.  That keeps preemption by the fair
scheduler trivially correct.

Choice handling is the delicate part.  Computations in the work queue share
one graph, so every in-place overwrite must be valid for *every* fingerprint,
not just the active one.  Consequences:

* A choice sitting at a demanded position of a pattern match or primitive is
  always pull-tabbed, even when the active fingerprint has already decided
  its id.  Matching "through" a decided choice and then rewriting would bake
  one computation's decision into a node that siblings with the opposite
  decision may still reach.  Pulled copies of a decided choice are harmless:
  the scheduler navigates decided root choices without forking.
* During normal-form driving over constructor spines, decided choices are
  navigated transparently (navigation mutates nothing); a chain ending at an
  undecided choice pulls the outermost physical choice at that slot.
* A constructor whose spine contains a failure makes just this computation
  worthless; the node is left untouched and only the computation is dropped,
  because siblings may validly project its other components.  Function nodes,
  by contrast, are overwritten with failure: a redex whose needed position is
  failed has no value under any fingerprint.
"""

from __future__ import annotations

from dataclasses import dataclass

from .graph import Graph, Node, dump_node
from .trees import (
    EXEMPT, InfoEntry, IRProgram, K_CHOICE, K_CONS, K_FAIL, K_FUNC, K_INT,
    K_PARTIAL, SIntTable, SLeaf, SOr, STable, T_FAIL, TAG_FIRST_CONSTRUCTOR,
    TArg, TChoice, TLit, TNode, TPartial, TSlot,
)
from .builtins import PrimOp

LEFT = 0
RIGHT = 1


@dataclass
class Rewrite:
    at: Node
    step: object                 # SLeaf | SOr | PrimOp


@dataclass
class PullTab:
    parent: Node
    child_index: int


@dataclass
class FailAt:
    at: Node                     # function: overwrite; constructor: drop computation


@dataclass
class EmitReady:
    pass


Action = Rewrite | PullTab | FailAt | EmitReady

# step outcomes
STEPPED = "stepped"
ROOT_NOW_CHOICE = "root_now_choice"
ROOT_FAILED = "root_failed"
VALUE_READY = "value_ready"


class Runtime:
    """Mutable state for one engine run: graph arena, choice ids, counters."""

    def __init__(self, ir: IRProgram, trace=None):
        self.ir = ir
        self.graph = Graph()
        self._next_cid = 0
        self.steps = 0
        self.pulltabs = 0
        self.trace = trace
        self._partials: dict[tuple[str, int], object] = {}

    def next_cid(self) -> int:
        cid = self._next_cid
        self._next_cid += 1
        return cid

    def partial_info(self, target, ngiven):
        # interned per runtime: the compiled program stays immutable, so
        # parallel engines can share it
        key = (target.name, ngiven)
        entry = self._partials.get(key)
        if entry is None:
            entry = InfoEntry(target.name, ngiven, TAG_FIRST_CONSTRUCTOR, K_PARTIAL)
            self._partials[key] = entry
        return entry

    def make_goal(self) -> Node:
        return self.graph.make(self.ir.goal_info(), [])


def _resolve_decided(node: Node, fp: dict) -> Node:
    """Follow decided choices; stops at the first non-choice or undecided choice."""
    while node.kind == K_CHOICE:
        side = fp.get(node.aux)
        if side is None:
            return node
        node = node.child(side)
    return node


def find_action(root: Node, fp: dict, rt: Runtime) -> Action:
    """One atomic action for the computation rooted at `root`.

    The scheduler guarantees the root is not a choice or failure.  Function
    roots walk their dispatch tables; value roots are driven toward normal
    form by scanning constructor children left to right.
    """
    if root.kind == K_FUNC:
        return _step_function(root, fp, rt)
    # normal-form driving over the value spine
    stack: list[tuple[Node, int]] = [(root, 0)]
    while stack:
        parent, i = stack[-1]
        if i >= parent.arity:
            stack.pop()
            continue
        stack[-1] = (parent, i + 1)
        view = _resolve_decided(parent.child(i), fp)
        kind = view.kind
        if kind == K_CHOICE:
            return PullTab(parent, i)
        if kind == K_FAIL:
            return FailAt(parent)
        if kind == K_FUNC:
            return _step_function(view, fp, rt)
        if view.arity > 0:
            stack.append((view, 0))
    return EmitReady()


def _locate(node: Node, path: tuple[int, ...]) -> tuple[Node, int, Node]:
    """Walk a table path from a redex; returns (parent, index, discriminator).

    Intermediate hops land on constructors matched by outer tables in this
    same traversal, so no choice skipping is needed here.
    """
    parent = node
    for idx in path[:-1]:
        parent = parent.child(idx)
    last = path[-1]
    return parent, last, parent.child(last)


def _step_function(fnode: Node, fp: dict, rt: Runtime) -> Action:
    cur = fnode
    while True:
        step = cur.info.code
        descended = False
        while True:
            if isinstance(step, (SLeaf, SOr)):
                if isinstance(step, SLeaf) and isinstance(step.body, TArg):
                    # projection rule: demand the bound node before copying it,
                    # otherwise copying an unevaluated shared redex would split
                    # its eventual choice identities
                    bound = _resolve_path(cur, step.body.path)
                    if bound.kind == K_FUNC:
                        cur = bound
                        descended = True
                        break
                return Rewrite(cur, step)
            if isinstance(step, STable):
                parent, idx, disc = _locate(cur, step.path)
                kind = disc.kind
                if kind == K_FUNC:
                    cur = disc
                    descended = True
                    break
                if kind == K_CHOICE:
                    return PullTab(parent, idx)
                if kind == K_FAIL:
                    return FailAt(cur)
                if kind != K_CONS:
                    return FailAt(cur)       # int/partial under a data match
                if disc.info.type_name != step.type_name:
                    return FailAt(cur)       # ill-typed: no rule can ever apply
                sub = step.subs[disc.info.tag - 3]
                if sub is EXEMPT:
                    return FailAt(cur)
                step = sub
                continue
            if isinstance(step, SIntTable):
                parent, idx, disc = _locate(cur, step.path)
                kind = disc.kind
                if kind == K_FUNC:
                    cur = disc
                    descended = True
                    break
                if kind == K_CHOICE:
                    return PullTab(parent, idx)
                if kind == K_FAIL:
                    return FailAt(cur)
                if kind != K_INT:
                    return FailAt(cur)
                sub = step.cases.get(disc.aux)
                if sub is None:
                    return FailAt(cur)       # exempt literal
                step = sub
                continue
            if isinstance(step, PrimOp):
                action = _step_prim(cur, step, rt)
                if isinstance(action, Node):
                    cur = action
                    descended = True
                    break
                return action
            raise AssertionError(f"unknown step {step!r}")
        if not descended:
            raise AssertionError("table walk ended without action")


def _step_prim(cur: Node, prim: PrimOp, rt: Runtime):
    """Returns an Action, or a Node to descend into."""
    for pos in prim.strict:
        arg = cur.child(pos)
        kind = arg.kind
        if kind == K_FUNC:
            return arg
        if kind == K_CHOICE:
            return PullTab(cur, pos)
        if kind == K_FAIL:
            return FailAt(cur)
        if prim.is_apply:
            if kind != K_PARTIAL:
                return FailAt(cur)   # over-application / applying a value
        elif kind != K_INT:
            return FailAt(cur)       # arithmetic on non-integers
    return Rewrite(cur, prim)


# --------------------------------------------------------------------------
# Applying actions
# --------------------------------------------------------------------------

def apply_action(action: Action, fp: dict, rt: Runtime, root: Node) -> str:
    if isinstance(action, EmitReady):
        return VALUE_READY
    rt.steps += 1
    if isinstance(action, Rewrite):
        _trace(rt, "rewrite", action.at)
        if isinstance(action.step, PrimOp):
            _apply_prim(action.at, action.step, rt)
        else:
            _apply_rewrite(action.at, action.step, rt)
        return STEPPED
    if isinstance(action, PullTab):
        rt.pulltabs += 1
        parent, i = action.parent, action.child_index
        _trace(rt, "pulltab", parent)
        choice = parent.child(i)
        left = rt.graph.clone_with_child(parent, i, choice.child(0))
        right = rt.graph.clone_with_child(parent, i, choice.child(1))
        rt.graph.overwrite(parent, rt.ir.choice_info, [left, right], choice.aux)
        return ROOT_NOW_CHOICE if parent is root else STEPPED
    if isinstance(action, FailAt):
        _trace(rt, "fail", action.at)
        if action.at.kind == K_FUNC:
            rt.graph.overwrite(action.at, rt.ir.fail_info, [])
            return ROOT_FAILED if action.at is root else STEPPED
        # value spine contains failure: this computation has no value, but the
        # node stays intact for computations that only project other parts
        return ROOT_FAILED
    raise AssertionError(f"unknown action {action!r}")


def _trace(rt: Runtime, kind: str, node: Node) -> None:
    if rt.trace is not None:
        sym = str(node.aux) if node.kind == K_INT else node.info.name
        rt.trace(rt.steps, kind, node.serial, sym)


def _resolve_path(node: Node, path: tuple[int, ...]) -> Node:
    for idx in path:
        node = node.child(idx)
    return node


def _apply_rewrite(redex: Node, step, rt: Runtime) -> None:
    if isinstance(step, SOr):
        left = _build_alternative(step.left, redex, rt)
        right = _build_alternative(step.right, redex, rt)
        rt.graph.overwrite(redex, rt.ir.choice_info, [left, right], rt.next_cid())
        return
    slots = _build_slots(step, redex, rt)
    body = step.body
    if isinstance(body, (TArg, TSlot)):
        bound = _resolve_path(redex, body.path) if isinstance(body, TArg) \
            else slots[body.index]
        # shallow content copy: children stay shared, a choice keeps its id
        rt.graph.overwrite(redex, bound.info, bound.children(), bound.aux)
        return
    info, kids, aux = _build_shape(body, redex, slots, rt)
    rt.graph.overwrite(redex, info, kids, aux)


def _build_slots(leaf: SLeaf, redex: Node, rt: Runtime) -> list[Node]:
    slots: list[Node] = []
    for tpl in leaf.slots:
        # alias bindings resolve to the existing node, preserving sharing
        slots.append(_sub(tpl, redex, slots, rt))
    return slots


def _build_alternative(step, redex: Node, rt: Runtime) -> Node:
    """Materialize one alternative of an Or rewrite as a node."""
    if isinstance(step, SOr):
        left = _build_alternative(step.left, redex, rt)
        right = _build_alternative(step.right, redex, rt)
        return rt.graph.make(rt.ir.choice_info, [left, right], rt.next_cid())
    slots = _build_slots(step, redex, rt)
    body = step.body
    if isinstance(body, TArg):
        return _resolve_path(redex, body.path)
    if isinstance(body, TSlot):
        return slots[body.index]
    return _build(body, redex, slots, rt)


def _build(tpl, redex: Node, slots: list[Node], rt: Runtime) -> Node:
    info, kids, aux = _build_shape(tpl, redex, slots, rt)
    return rt.graph.make(info, kids, aux)


def _build_shape(tpl, redex: Node, slots: list[Node], rt: Runtime):
    """Build a template bottom-up; returns the root's (info, kids, aux)."""
    if isinstance(tpl, TLit):
        return rt.ir.int_info, [], tpl.value
    if tpl is T_FAIL:
        return rt.ir.fail_info, [], None
    if isinstance(tpl, TChoice):
        left = _sub(tpl.left, redex, slots, rt)
        right = _sub(tpl.right, redex, slots, rt)
        return rt.ir.choice_info, [left, right], rt.next_cid()
    if isinstance(tpl, TNode):
        kids = [_sub(a, redex, slots, rt) for a in tpl.args]
        return tpl.info, kids, None
    if isinstance(tpl, TPartial):
        kids = [_sub(a, redex, slots, rt) for a in tpl.args]
        info = rt.partial_info(tpl.target, len(kids))
        return info, kids, (tpl.target, tpl.target.arity - len(kids))
    raise AssertionError(f"cannot build {tpl!r} as a shape")


def _sub(tpl, redex: Node, slots: list[Node], rt: Runtime) -> Node:
    if isinstance(tpl, TArg):
        return _resolve_path(redex, tpl.path)
    if isinstance(tpl, TSlot):
        return slots[tpl.index]
    return _build(tpl, redex, slots, rt)


def _apply_prim(redex: Node, prim: PrimOp, rt: Runtime) -> None:
    if prim.is_apply:
        f = redex.child(0)
        x = redex.child(1)
        target, missing = f.aux
        kids = f.children() + [x]
        if missing <= 1:
            rt.graph.overwrite(redex, target, kids)
        else:
            info = rt.partial_info(target, len(kids))
            rt.graph.overwrite(redex, info, kids, (target, missing - 1))
        return
    a = redex.child(0).aux
    b = redex.child(1).aux
    result = prim.fn(a, b)
    if isinstance(result, bool):
        name = "True" if result else "False"
        rt.graph.overwrite(redex, rt.ir.info(name), [])
    else:
        rt.graph.overwrite(redex, rt.ir.int_info, [], result)
