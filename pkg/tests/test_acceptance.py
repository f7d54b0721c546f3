"""Acceptance suite: one test per criterion, each printing a pass line.

Run as `pytest tests/test_acceptance.py -v` (or `-s` to see the pass lines
inline).
"""

import math
import subprocess
import sys
import time
from collections import Counter

import pytest

from minicurry import compile_program, run
from minicurry.bench import exponential_fit
from minicurry.engine import Runtime, apply_action, find_action, PullTab
from minicurry.graph import Graph, NODE_RECORD_SIZE
from minicurry.trees import InfoEntry, K_CHOICE, K_CONS, K_INT

from helpers import (
    CORPUS, ORACLE_CORPUS, corpus_source, engine_multiset,
    gen_shared_choice_program, oracle_multiset, run_source,
)


def ok(n, text):
    print(f"ACCEPTANCE {n} PASS: {text}")


def test_criterion_1_completeness_loop_program():
    src = corpus_source("loop")
    for quantum in (1, 10, 500):
        start = time.perf_counter()
        result = run_source(src, max_values=1, quantum=quantum)
        elapsed = time.perf_counter() - start
        assert result.values == ["1"], f"quantum={quantum}"
        assert result.status == "max_values"
        assert elapsed < 1.0, f"quantum={quantum} took {elapsed:.3f}s"
    ok(1, "loop ? (1 ? loop) emits 1 in <1s at quanta 1, 10, 500")


def test_criterion_2_consistency_xor_and_randomized():
    src = corpus_source("xor_share")
    for quantum in (1, 500):
        values = Counter(run_source(src, quantum=quantum).values)
        assert values == Counter({"False": 2}), f"quantum={quantum}"
        assert "True" not in values
    for seed in range(1000):
        rand_src = gen_shared_choice_program(seed)
        assert engine_multiset(rand_src, max_steps=500_000) == \
            oracle_multiset(rand_src), rand_src
    ok(2, "xor x x is {False,False} at quanta 1 and 500; "
          "1000 random shared-choice programs match the oracle")


def test_criterion_3_pull_tab_step_shape():
    ir = compile_program(
        "zip [] _ = []\n"
        "zip (_:_) [] = []\n"
        "zip (x:xs) (y:ys) = (x,y) : zip xs ys\n"
        "main = zip ([1] ? [2]) [3]\n")
    trace = []
    rt = Runtime(ir, trace=lambda n, kind, serial, sym:
                 trace.append(f"STEP {n}: {kind} at #{serial} ({sym})"))
    root = rt.make_goal()
    apply_action(find_action(root, {}, rt), {}, rt, root)   # main -> zip redex
    choice = root.child(0)
    shared_c = root.child(1)
    cid = choice.aux
    action = find_action(root, {}, rt)
    assert isinstance(action, PullTab)
    apply_action(action, {}, rt, root)
    assert trace == ["STEP 1: rewrite at #0 (main)",
                     "STEP 2: pulltab at #0 (zip)"]
    assert root.kind == K_CHOICE and root.aux == cid
    left, right = root.child(0), root.child(1)
    assert left.child(1) is shared_c and right.child(1) is shared_c
    ok(3, "pull-tab result is a choice with the child's id; "
          "alternatives share c by reference identity")


def test_criterion_4_tag_assignment_from_dump():
    proc = subprocess.run(
        ["mcy", "compile", str(CORPUS / "zip.mcy"), "--dump-icurry"],
        capture_output=True, text=True)
    assert proc.returncode == 0
    text = proc.stdout
    assert "name=? arity=2 tag=1 kind=choice" in text
    assert "name=failed arity=0 tag=2 kind=failure" in text
    assert "name=[] arity=0 tag=3 kind=constructor type=List index=0" in text
    assert "name=: arity=2 tag=4 kind=constructor type=List index=1" in text
    for line in text.splitlines():
        if "kind=function" in line:
            assert "tag=0" in line
    ok(4, "prelude List tags: function=0 choice=1 failure=2 nil=3 cons=4")


def test_criterion_5_failure_semantics():
    for stem in ("head_empty", "head_head"):
        result = run_source(corpus_source(stem))
        assert result.values == []
        assert result.status == "exhausted"
        proc = subprocess.run(["mcy", "run", str(CORPUS / f"{stem}.mcy")],
                              capture_output=True, text=True)
        assert proc.returncode == 0 and proc.stdout == ""
    ok(5, "head [] and head (head []) emit nothing and exit 0")


def test_criterion_6_oracle_equivalence_corpus():
    assert len(ORACLE_CORPUS) >= 12
    start = time.perf_counter()
    for stem in ORACLE_CORPUS:
        src = corpus_source(stem)
        assert engine_multiset(src) == oracle_multiset(src), stem
    elapsed = time.perf_counter() - start
    assert elapsed < 60.0
    ok(6, f"{len(ORACLE_CORPUS)} terminating corpus programs match the "
          f"oracle exactly in {elapsed:.1f}s")


def test_criterion_7_permsort_desk_scale():
    sizes = list(range(4, 10))
    steps = []
    for n in sizes:
        src = f"main = permSort (descending {n})"
        start = time.perf_counter()
        result = run_source(src)
        elapsed = time.perf_counter() - start
        expected = "[" + ",".join(str(i) for i in range(1, n + 1)) + "]"
        assert result.values == [expected], n
        steps.append(result.stats.steps)
        if n == 9:
            assert elapsed < 10.0, f"n=9 took {elapsed:.2f}s"
    # superlinear growth: successive ratios exceed the linear trend
    for prev, cur, n in zip(steps, steps[1:], sizes[1:]):
        assert cur > prev * (n / (n - 1)), steps
    fit = exponential_fit(sizes, [float(s) for s in steps])
    assert fit is not None
    slope, _, r2 = fit
    assert r2 >= 0.99, f"r2={r2}"
    ok(7, f"permSort n=4..9 single values, steps {steps}, "
          f"exponential fit r2={r2:.4f}")


def test_criterion_8_determinism_byte_identical():
    for stem in ("coin", "xor_share", "permsort", "arith_choice", "nested_choice"):
        cmd = ["mcy", "run", str(CORPUS / f"{stem}.mcy"), "--stats"]
        a = subprocess.run(cmd, capture_output=True)
        b = subprocess.run(cmd, capture_output=True)
        assert a.stdout == b.stdout, stem
        assert a.stderr == b.stderr, stem       # stats included, no timing fields
        assert a.returncode == b.returncode
    ok(8, "two runs per corpus program produce byte-identical stdout and "
          "stats output")


def test_criterion_9_memory_discipline_stress():
    g = Graph()
    int_info = InfoEntry("Int", 0, 3, K_INT)
    infos = [InfoEntry(f"C{a}", a, 3 + a, K_CONS, "Stress", a) for a in range(9)]
    choice_info = InfoEntry("?", 2, 1, K_CHOICE)
    leaf = g.make(int_info, [], 0)
    nodes = [leaf]
    total = 1_000_000
    for i in range(total):
        mode = i % 3
        if mode == 0:
            arity = i % 9
            nodes.append(g.make(infos[arity], [leaf] * arity))
        elif mode == 1:
            target = nodes[i % len(nodes)]
            g.overwrite(target, choice_info, [leaf, leaf], i)
        else:
            src = nodes[i % len(nodes)]
            if src.arity:
                nodes.append(g.clone_with_child(src, i % src.arity, leaf))
        if len(nodes) > 4096:
            del nodes[: len(nodes) // 2]
    assert g.created >= total // 3
    assert sys.getsizeof(nodes[-1]) == NODE_RECORD_SIZE
    ok(9, f"{g.created} nodes built/overwritten/cloned; record size is the "
          f"uniform constant {NODE_RECORD_SIZE} bytes")
