"""Runtime graph store: uniform node records with in-place overwrite.

Rewriting happens by overwriting the record at the root of a redex, never by
pointer redirection: every holder of a node reference observes the new
content because the reference (the Node object itself) keeps its identity.
Records are one uniform size: three inline successor slots plus a single
overflow block for arities beyond three, so any node can be overwritten with
any other node regardless of arity.

The store is an arena: nodes are never reclaimed individually during a run;
the whole store is released when the owning engine is dropped.  A store
belongs to exactly one engine and all mutation is single-threaded.
"""

from __future__ import annotations

import sys

from .trees import InfoEntry, K_CHOICE, K_CONS, K_FAIL, K_FUNC, K_INT, K_PARTIAL

INLINE_SUCCESSORS = 3


class Node:
    """One graph node.  A NodeRef in the design is simply this object."""

    __slots__ = ("serial", "info", "s0", "s1", "s2", "ext", "aux")

    def __init__(self):
        # contents are poured in by Graph.make / Graph.overwrite
        self.serial = -1
        self.info = None
        self.s0 = None
        self.s1 = None
        self.s2 = None
        self.ext = None
        self.aux = None

    @property
    def arity(self) -> int:
        return self.info.arity

    @property
    def kind(self) -> int:
        return self.info.kind

    def child(self, i: int) -> "Node":
        if i == 0:
            return self.s0
        if i == 1:
            return self.s1
        if i == 2:
            return self.s2
        return self.ext[i - INLINE_SUCCESSORS]

    def children(self) -> list["Node"]:
        n = self.info.arity
        out = [self.s0, self.s1, self.s2][:min(n, INLINE_SUCCESSORS)]
        if self.ext is not None:
            out.extend(self.ext)
        return out

    def __repr__(self):
        return f"#{self.serial}:{self.info.name if self.info else '?'}"


def _check_shape(info: InfoEntry, successors, aux) -> None:
    if len(successors) != info.arity:
        raise AssertionError(
            f"arity mismatch building {info.name!r}: "
            f"expected {info.arity} successors, got {len(successors)}")
    kind = info.kind
    if kind == K_CHOICE:
        assert isinstance(aux, int), "choice node needs a choice id"
    elif kind == K_INT:
        assert isinstance(aux, int), "int node needs a value"
    elif kind == K_PARTIAL:
        assert isinstance(aux, tuple) and len(aux) == 2, \
            "partial node needs (target info, missing count)"
    else:
        assert aux is None, f"{info.name!r} node carries no aux payload"


class Graph:
    """Arena of nodes for one engine run."""

    def __init__(self):
        self._next_serial = 0
        self.created = 0

    def _fill(self, node: Node, info: InfoEntry, successors, aux) -> None:
        node.info = info
        n = len(successors)
        node.s0 = successors[0] if n > 0 else None
        node.s1 = successors[1] if n > 1 else None
        node.s2 = successors[2] if n > 2 else None
        node.ext = list(successors[INLINE_SUCCESSORS:]) if n > INLINE_SUCCESSORS else None
        node.aux = aux

    def make(self, info: InfoEntry, successors=(), aux=None) -> Node:
        _check_shape(info, successors, aux)
        node = Node()
        node.serial = self._next_serial
        self._next_serial += 1
        self.created += 1
        self._fill(node, info, successors, aux)
        return node

    def overwrite(self, target: Node, info: InfoEntry, successors=(), aux=None) -> None:
        """Destructively replace the target's content, preserving its identity."""
        _check_shape(info, successors, aux)
        self._fill(target, info, successors, aux)

    def clone_with_child(self, source: Node, child_index: int, new_child: Node) -> Node:
        """Fresh node like `source` but with one successor replaced.

        All other successors are shared references, and aux (choice id,
        integer value, partial payload) is copied verbatim.
        """
        if child_index >= source.info.arity:
            raise AssertionError(
                f"child index {child_index} out of range for {source.info.name!r}")
        kids = source.children()
        kids[child_index] = new_child
        return self.make(source.info, kids, source.aux)


def dump_node(node: Node) -> str:
    """`#<serial>:<symbol>(<child serials>)[cid=<id>]` trace format."""
    name = str(node.aux) if node.kind == K_INT else node.info.name
    kids = " ".join(f"#{c.serial}" for c in node.children())
    text = f"#{node.serial}:{name}({kids})"
    if node.kind == K_CHOICE:
        text += f"[cid={node.aux}]"
    return text


def _record_size_is_uniform() -> int:
    """All node records have one base size, whatever the arity."""
    g = Graph()
    probe = InfoEntry("probe0", 0, 3, K_CONS, "Probe", 0)
    small = g.make(probe, [])
    wide_info = InfoEntry("probe16", 16, 3, K_CONS, "Probe", 1)
    wide = g.make(wide_info, [small] * 16)
    size_small = sys.getsizeof(small)
    size_wide = sys.getsizeof(wide)
    if size_small != size_wide:
        raise AssertionError(
            f"node record size not uniform: {size_small} vs {size_wide}")
    return size_small


NODE_RECORD_SIZE = _record_size_is_uniform()
