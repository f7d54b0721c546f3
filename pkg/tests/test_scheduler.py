"""Work queue: fairness, fork order, consistency, emission, statistics."""

from collections import Counter

import pytest

from minicurry.scheduler import Computation, EXHAUSTED, FUEL, MAX_VALUES, _fork, run
from minicurry.trees import compile_program

from helpers import corpus_source, engine_multiset, oracle_multiset, run_source


class TestRun:
    def test_loop_emits_one(self):
        src = corpus_source("loop")
        for quantum in (1, 10, 500):
            result = run_source(src, max_values=1, quantum=quantum)
            assert result.values == ["1"]
            assert result.status == MAX_VALUES

    def test_loop_without_limit_is_fuel_exhausted(self):
        result = run_source(corpus_source("loop"), max_steps=5000)
        assert result.values == ["1"]
        assert result.status == FUEL

    def test_xor_shared_choice(self):
        src = corpus_source("xor_share")
        for quantum in (1, 500):
            assert Counter(run_source(src, quantum=quantum).values) == \
                Counter({"False": 2})

    def test_head_empty_no_values_normal_exit(self):
        result = run_source(corpus_source("head_empty"))
        assert result.values == [] and result.status == EXHAUSTED

    def test_single_choice_left_first(self):
        result = run_source("main = 0 ? 1", quantum=1)
        assert result.values == ["0", "1"]

    def test_nested_choice_values(self):
        assert engine_multiset("main = (0 ? 1) ? 2") == Counter(["0", "1", "2"])

    def test_decided_clone_not_reforked(self):
        # after pull-tab duplication, the clone with the same id is navigated
        src = corpus_source("xor_share")
        result = run_source(src)
        assert result.stats.forks == 1      # only the original choice forks

    def test_fork_on_bound_id_aborts(self):
        ir = compile_program("main = 0 ? 1")
        from minicurry.engine import Runtime
        rt = Runtime(ir)
        root = rt.make_goal()
        import collections
        from minicurry.scheduler import RunStats
        choice_node = rt.graph.make(rt.ir.choice_info,
                                    [rt.graph.make(rt.ir.int_info, [], 0),
                                     rt.graph.make(rt.ir.int_info, [], 1)], 5)
        comp = Computation(choice_node, {5: 0}, 10)
        with pytest.raises(AssertionError, match="already-decided"):
            _fork(comp, choice_node, collections.deque(), 10, RunStats())

    def test_queue_audit_and_peaks(self):
        result = run_source("main = permSort (descending 5)")
        stats = result.stats
        assert stats.enqueued == stats.dropped      # queue drained
        assert stats.peak_queue >= 2
        assert stats.peak_live_nodes > 0
        assert stats.steps > 0 and stats.pulltabs > 0 and stats.forks > 0

    def test_budget_rotation_counted(self):
        result = run_source(corpus_source("loop"), max_values=1, quantum=1)
        assert result.stats.rotations >= 1

    def test_deterministic_output(self):
        src = corpus_source("permsort")
        a = run_source(src)
        b = run_source(src)
        assert a.values == b.values
        assert a.stats.lines() == b.stats.lines()

    def test_sink_streams_values(self):
        seen = []
        run_source("main = 0 ? 1", sink=seen.append)
        assert seen == ["0", "1"]

    def test_quantum_validation(self):
        with pytest.raises(ValueError):
            run_source("main = 1", quantum=0)


class TestEmitValue:
    def test_zip_value_format(self):
        assert run_source(corpus_source("zip")).values == ["[(1,3),(2,4)]"]

    def test_int_and_constructor_atoms(self):
        assert run_source("main = 2").values == ["2"]
        assert run_source("main = True").values == ["True"]
        assert run_source("main = []").values == ["[]"]

    def test_nested_constructor_parens(self):
        src = ("data Tree = Leaf | Node Tree Tree\n"
               "main = Node (Node Leaf Leaf) Leaf")
        assert run_source(src).values == ["Node (Node Leaf Leaf) Leaf"]

    def test_negative_int_in_list(self):
        assert run_source("main = [0 - 5, 1]").values == ["[-5,1]"]

    def test_improper_list(self):
        assert run_source("main = 1 : 2").values == ["(1 : 2)"]

    def test_partial_application_value(self):
        assert run_source("main = map").values == ["map"]
        assert run_source("main = (1 +)").values == ["+ 1"]


class TestOracleAgreement:
    def test_multiset_equivalence_small(self):
        for src in [
            "main = (0 ? 1) + (0 ? 1)",
            "main = permSort [3,1,2]",
            "main = insert 0 [1,2]",
            "main = map (10 *) [1, 2 ? 3]",
        ]:
            assert engine_multiset(src) == oracle_multiset(src), src
