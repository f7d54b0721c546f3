"""Fair enumeration of values: work queue, fingerprints, fork, emission.

The queue initially holds only the goal.  The head computation is active;
when its root is a choice the computation forks (left alternative enqueued
first) unless its fingerprint already decides the id, in which case the root
moves to the decided alternative without mutation.  A computation performs
one atomic engine action at a time and is rotated to the back of the queue
when its step budget (the quantum) runs out, so no computation is ignored
forever and every derivable value is eventually emitted, even next to
divergent siblings.

Consistency comes from the fingerprints: a choice id, once decided at a
fork, is never rebound, and every clone of that choice made by pull-tabs
carries the same id, so all clones resolve the same way within one
computation.
"""

from __future__ import annotations

import time
from collections import deque
from dataclasses import dataclass, field

from . import engine
from .engine import (
    EmitReady, FailAt, PullTab, Rewrite, ROOT_FAILED, Runtime, VALUE_READY,
    find_action, apply_action,
)
from .graph import Node
from .trees import IRProgram, K_CHOICE, K_CONS, K_FAIL, K_FUNC, K_INT, K_PARTIAL

DEFAULT_QUANTUM = 500

# exit statuses
EXHAUSTED = "exhausted"          # queue ran dry: all values found
MAX_VALUES = "max_values"        # stopped after emitting the requested count
FUEL = "incomplete(fuel)"        # total step limit hit
TIMEOUT = "incomplete(timeout)"  # wall-clock limit hit


@dataclass
class Computation:
    root: Node
    fp: dict                    # choice id -> 0 (left) / 1 (right)
    budget: int


@dataclass
class RunStats:
    steps: int = 0
    pulltabs: int = 0
    forks: int = 0
    rotations: int = 0
    peak_queue: int = 0
    peak_live_nodes: int = 0
    enqueued: int = 0
    dropped: int = 0
    emitted: int = 0

    def lines(self) -> list[str]:
        return [
            f"steps={self.steps}",
            f"pulltabs={self.pulltabs}",
            f"forks={self.forks}",
            f"rotations={self.rotations}",
            f"peak_queue={self.peak_queue}",
            f"peak_live_nodes={self.peak_live_nodes}",
        ]


@dataclass
class RunResult:
    values: list[str]
    status: str
    stats: RunStats


def run(ir: IRProgram, max_values: int = 0, quantum: int = DEFAULT_QUANTUM,
        max_steps: int = 0, sink=None, trace=None,
        max_seconds: float | None = None) -> RunResult:
    """Evaluate the goal, emitting printed values in deterministic order.

    max_values=0 and max_steps=0 mean unlimited.  `sink` is called with each
    value string as it is produced.
    """
    if quantum < 1:
        raise ValueError("quantum must be >= 1")
    rt = Runtime(ir, trace=trace)
    stats = RunStats()
    queue: deque[Computation] = deque()
    queue.append(Computation(rt.make_goal(), {}, quantum))
    stats.enqueued += 1
    values: list[str] = []
    status = EXHAUSTED
    deadline = time.monotonic() + max_seconds if max_seconds is not None else None

    while queue:
        if max_values and len(values) >= max_values:
            status = MAX_VALUES
            break
        if max_steps and rt.steps >= max_steps:
            status = FUEL
            break
        if deadline is not None and time.monotonic() > deadline:
            status = TIMEOUT
            break
        stats.peak_queue = max(stats.peak_queue, len(queue))
        comp = queue[0]

        # navigate decided root choices without mutation
        root = comp.root
        while root.kind == K_CHOICE and root.aux in comp.fp:
            root = root.child(comp.fp[root.aux])
        comp.root = root

        if root.kind == K_FAIL:
            queue.popleft()
            stats.dropped += 1
            continue
        if root.kind == K_CHOICE:
            queue.popleft()
            stats.dropped += 1
            _fork(comp, root, queue, quantum, stats)
            continue

        action = find_action(root, comp.fp, rt)
        outcome = apply_action(action, comp.fp, rt, root)
        if outcome == VALUE_READY:
            text = emit_value(root, comp.fp)
            values.append(text)
            stats.emitted += 1
            if sink is not None:
                sink(text)
            queue.popleft()
            stats.dropped += 1
            continue
        if outcome == ROOT_FAILED:
            queue.popleft()
            stats.dropped += 1
            continue
        comp.budget -= 1
        if comp.budget <= 0:
            queue.rotate(-1)
            comp.budget = quantum
            stats.rotations += 1

    stats.steps = rt.steps
    stats.pulltabs = rt.pulltabs
    stats.peak_live_nodes = rt.graph.created
    # a computation is only ever dropped for failure, emission, or fork
    assert stats.enqueued == stats.dropped + len(queue), "work queue audit failed"
    return RunResult(values, status, stats)


def _fork(comp: Computation, root: Node, queue, quantum: int, stats: RunStats) -> None:
    cid = root.aux
    if cid in comp.fp:
        raise AssertionError(f"fork on already-decided choice id {cid}")
    left_fp = dict(comp.fp)
    left_fp[cid] = 0
    right_fp = dict(comp.fp)
    right_fp[cid] = 1
    queue.append(Computation(root.child(0), left_fp, quantum))
    queue.append(Computation(root.child(1), right_fp, quantum))
    stats.enqueued += 2
    stats.forks += 1


# --------------------------------------------------------------------------
# Value printing
# --------------------------------------------------------------------------

def _view(node: Node, fp: dict) -> Node:
    while node.kind == K_CHOICE:
        node = node.child(fp[node.aux])
    return node


def emit_value(root: Node, fp: dict) -> str:
    """Canonical text for a normal form: lists as [a,b], pairs as (a,b)."""
    return _render(root, fp, False)


def _render(node: Node, fp: dict, nested: bool) -> str:
    node = _view(node, fp)
    kind = node.kind
    if kind == K_INT:
        v = node.aux
        return f"({v})" if (v < 0 and nested) else str(v)
    if kind == K_CONS and node.info.name == ":":
        return _render_list(node, fp)
    if kind == K_CONS and node.info.name == "Pair":
        left = _render(node.child(0), fp, False)
        right = _render(node.child(1), fp, False)
        return f"({left},{right})"
    if kind in (K_CONS, K_PARTIAL):
        if node.arity == 0:
            return node.info.name
        parts = [node.info.name] + [_render(c, fp, True) for c in node.children()]
        text = " ".join(parts)
        return f"({text})" if nested else text
    raise AssertionError(f"cannot print {node!r}")


def _render_list(node: Node, fp: dict) -> str:
    elems = []
    cur = node
    while True:
        cur = _view(cur, fp)
        if cur.kind == K_CONS and cur.info.name == ":":
            elems.append(cur.child(0))
            cur = cur.child(1)
            continue
        break
    if cur.kind == K_CONS and cur.info.name == "[]":
        inner = ",".join(_render(e, fp, False) for e in elems)
        return f"[{inner}]"
    # improper list: print with infix colons
    parts = [_render(e, fp, True) for e in elems] + [_render(cur, fp, True)]
    return "(" + " : ".join(parts) + ")"
