"""Definitional tree construction, tag assignment, and table lowering."""

import pytest

from minicurry.syntax import CompileError, parse_program
from minicurry.trees import (
    DBranch, DLeaf, DOr, EXEMPT, K_CONS, K_FUNC, SIntTable, SLeaf, SOr,
    STable, TAG_CHOICE, TAG_FAILURE, TAG_FUNCTION, assign_tags,
    build_def_tree, compile_branch_tables, compile_program, dump_dtree,
    dump_icurry,
)

ZIP = ("zip [] _ = []\n"
       "zip (_:_) [] = []\n"
       "zip (x:xs) (y:ys) = (x,y) : zip xs ys\n")


def tree_for(source, fname, use_prelude=False):
    ir = compile_program(source, use_prelude=use_prelude)
    return ir, ir.info(fname)


class TestTreeShape:
    def test_zip_tree(self):
        _, entry = tree_for(ZIP + "main = zip [] []", "zip")
        tree = entry.dtree
        assert isinstance(tree, DBranch) and tree.path == (0,)
        assert tree.type_name == "List"
        assert isinstance(tree.cases["[]"], DLeaf)
        inner = tree.cases[":"]
        assert isinstance(inner, DBranch) and inner.path == (1,)
        assert isinstance(inner.cases["[]"], DLeaf)
        leaf = inner.cases[":"]
        assert isinstance(leaf, DLeaf)
        assert leaf.bindings == {"x": (0, 0), "xs": (0, 1), "y": (1, 0), "ys": (1, 1)}

    def test_coin_or(self):
        _, entry = tree_for("coin = 0\ncoin = 1\nmain = coin", "coin")
        tree = entry.dtree
        assert isinstance(tree, DOr)
        assert isinstance(tree.left, DLeaf) and isinstance(tree.right, DLeaf)

    def test_choice_style_rules(self):
        src = "alt x _ = x\nalt _ y = y\nmain = alt 1 2"
        _, entry = tree_for(src, "alt")
        assert isinstance(entry.dtree, DOr)

    def test_head_exempt(self):
        _, entry = tree_for("head2 (x:_) = x\nmain = head2 []", "head2")
        tree = entry.dtree
        assert isinstance(tree, DBranch)
        assert tree.cases["[]"] is EXEMPT
        assert isinstance(tree.cases[":"], DLeaf)

    def test_not_inductively_sequential(self):
        src = "por True _ = True\npor _ True = True\nmain = por True True"
        with pytest.raises(CompileError, match="por.*not inductively sequential"):
            compile_program(src)

    def test_mixed_var_constructor_overlap_rejected(self):
        with pytest.raises(CompileError, match="inductively sequential"):
            compile_program("f [] = 0\nf x = 1\nmain = f []", use_prelude=False)

    def test_leftmost_outermost_position(self):
        src = "g x [] = x\ng x (y:ys) = y\nmain = g 0 []"
        _, entry = tree_for(src, "g")
        assert entry.dtree.path == (1,)     # only position 1 is demanded by all


class TestTags:
    def test_reserved_and_list_tags(self):
        ir = compile_program("main = []", use_prelude=True)
        assert TAG_FUNCTION == 0 and TAG_CHOICE == 1 and TAG_FAILURE == 2
        assert ir.info("[]").tag == 3
        assert ir.info(":").tag == 4
        assert ir.info("main").tag == 0
        assert ir.choice_info.tag == 1
        assert ir.fail_info.tag == 2

    def test_abc_tags_sequential(self):
        ir = compile_program("data ABC = A | B | C\nmain = A", use_prelude=False)
        assert [ir.info(c).tag for c in "ABC"] == [3, 4, 5]

    def test_first_constructors_share_tag(self):
        ir = compile_program("data T1 = X\ndata T2 = Y\nmain = X", use_prelude=False)
        assert ir.info("X").tag == 3
        assert ir.info("Y").tag == 3

    def test_tags_deterministic(self):
        src = "data ABC = A | B | C\nmain = permSort [2,1]"
        a = compile_program(src)
        b = compile_program(src)
        assert [(e.name, e.tag) for e in a.entries.values()] == \
               [(e.name, e.tag) for e in b.entries.values()]
        assert dump_icurry(a) == dump_icurry(b)


class TestTables:
    def test_zip_outer_table_has_five_entries(self):
        ir, entry = tree_for(ZIP + "main = zip [] []", "zip")
        table = entry.code
        assert isinstance(table, STable)
        # 3 reserved actions + one entry per constructor
        assert 3 + len(table.subs) == 5
        assert isinstance(table.subs[0], SLeaf)
        assert isinstance(table.subs[1], STable)

    def test_abc_table_has_six_entries(self):
        src = "data ABC = A | B | C\nf A = 1\nf B = 2\nf C = 3\nmain = f A"
        ir, entry = tree_for(src, "f")
        assert 3 + len(entry.code.subs) == 6

    def test_head_table_nil_is_failure_action(self):
        # derived by compiling single-rule head and inspecting the table
        ir, entry = tree_for("head2 (x:_) = x\nmain = head2 []", "head2")
        table = entry.code
        assert table.subs[0] is EXEMPT          # [] has no rule: rewrite to failure
        assert isinstance(table.subs[1], SLeaf)

    def test_every_compiled_branch_is_complete(self):
        ir = compile_program("main = permSort [3,1,2]")

        def walk(step):
            if isinstance(step, STable):
                assert len(step.subs) == len(ir.types[step.type_name])
                for sub in step.subs:
                    if sub is not EXEMPT:
                        walk(sub)
            elif isinstance(step, SIntTable):
                for sub in step.cases.values():
                    walk(sub)
            elif isinstance(step, SOr):
                walk(step.left)
                walk(step.right)

        for entry in ir.entries.values():
            if entry.kind == K_FUNC and not hasattr(entry.code, "strict"):
                walk(entry.code)

    def test_int_branch_sparse(self):
        ir, entry = tree_for("f 0 = 10\nf 2 = 12\nmain = f 0", "f")
        table = entry.code
        assert isinstance(table, SIntTable)
        assert set(table.cases) == {0, 2}


class TestDumps:
    def test_dump_dtree_golden_zip(self):
        ir = compile_program(ZIP + "main = zip [] []", use_prelude=False)
        text = dump_dtree(ir)
        expected = (
            "zip/2:\n"
            "  branch @1 {\n"
            "    [] ->\n"
            "      leaf []\n"
            "    : ->\n"
            "      branch @2 {\n"
            "        [] ->\n"
            "          leaf []\n"
            "        : ->\n"
            "          leaf (x, y) : zip xs ys\n"
            "      }\n"
            "  }\n")
        assert expected in text

    def test_dump_icurry_prelude_list_tags(self):
        ir = compile_program("main = []")
        text = dump_icurry(ir)
        assert "name=[] arity=0 tag=3 kind=constructor type=List index=0" in text
        assert "name=: arity=2 tag=4 kind=constructor type=List index=1" in text
        assert "name=? arity=2 tag=1 kind=choice" in text
        assert "name=failed arity=0 tag=2 kind=failure" in text
        assert "name=main arity=0 tag=0 kind=function" in text

    def test_dump_contains_reserved_table_rows(self):
        ir = compile_program(ZIP + "main = zip [] []", use_prelude=False)
        text = dump_icurry(ir)
        assert "0:function -> evaluate" in text
        assert "1:choice -> pulltab" in text
        assert "2:failure -> fail" in text
        assert "size=5" in text

    def test_exempt_shown_in_dtree(self):
        ir = compile_program("head2 (x:_) = x\nmain = head2 []", use_prelude=False)
        assert "[] -> exempt" in dump_dtree(ir)
