from __future__ import annotations

import json
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings

from gen import rand_loop_stmt, rand_task, seeds
from pdlverify.constraints import ROOT, AffineUB, LeafEq, MinUB, ProbVar, max_feasible
from pdlverify.engine import (LEAF_RULES, RULES, Judgment, budget_exhausted, collect_constraints,
                              execute, execute_task, format_tree, root_judgment, split_candidates,
                              tree_to_dict, tree_to_json, undecided_leaves)
from pdlverify.formula import F_FALSE, F_TRUE, Atom, Not, Update
from pdlverify.oracle import expectation
from pdlverify.parser import parse_expr, parse_formula, parse_program, parse_task
from pdlverify.pgcl import SKIP, Lit


def p(name: str) -> ProbVar:
    return ProbVar(tuple(int(c) for c in name[1:]))


def judgment(src: str, post: str, gamma=()) -> Judgment:
    return Judgment(tuple(parse_formula(g) for g in gamma), (), parse_program(src), ROOT,
                    parse_formula(post))


def best(root) -> Fraction:
    return max_feasible(collect_constraints(root)).max_assignment[ROOT]


def _arity(node) -> int:
    return len(node.children)


class TestRules:
    def test_skip_only(self):
        assert collect_constraints(execute(Judgment((), (), SKIP, ROOT, F_TRUE))) == [
            LeafEq(ROOT, 1)]
        assert collect_constraints(execute(Judgment((), (), SKIP, ROOT, F_FALSE))) == [
            LeafEq(ROOT, 0)]

    def test_monty_leaf(self):
        # prize := 0, open := 1, then switching from door 0 lands on door 2
        ups = (Update("prize", Lit(0)), Update("open", Lit(1)), Update("choice", Lit(2)))
        j = Judgment((), ups, SKIP, p("p000"), parse_formula("choice == prize"))
        node = execute(j)
        assert node.rule == "empty0" and node.emitted == (LeafEq(p("p000"), 0),)

    def test_monty_hall_constraints(self, corpus_dir):
        task = parse_task((corpus_dir / "monty_hall.pgcl").read_text())
        root = execute_task(task)
        cs = collect_constraints(root)
        assert MinUB(ROOT, (p("p0"), p("p1"), p("p2"))) in cs
        assert AffineUB(p("p0"), Fraction(1, 3), p("p00"), p("p01")) in cs
        assert best(root) == Fraction(2, 3)

    def test_demonic_is_flattened(self):
        root = execute(judgment("{ x := 0; } [] { { x := 1; } [] { x := 2; } }", "x != 1"))
        assert root.rule == "demonChoice" and _arity(root) == 3
        assert root.emitted == (MinUB(ROOT, (p("p0"), p("p1"), p("p2"))),)
        assert best(root) == 0

    def test_prob_choice(self):
        root = execute(judgment("{ x := 1; } [1/4] { x := 0; }", "x == 1"))
        assert root.emitted == (AffineUB(ROOT, Fraction(1, 4), p("p0"), p("p1")),)
        assert best(root) == Fraction(1, 4)

    def test_if_guards_are_complementary(self):
        root = execute(judgment("x := y + 1; if (x > 1) { skip; } else { x := 2; }", "x >= 2"))
        node = root.children[0]
        assert node.rule == "if"
        then_g, else_g = (c.judgment.gamma[-1] for c in node.children)
        assert then_g == Atom(parse_expr("y + 1 > 1")) and else_g == Not(then_g)
        # both branches inherit the parent's variable
        assert {c.judgment.pvar for c in node.children} == {ROOT}

    def test_infeasible_branch_is_closed(self):
        root = execute(judgment("if (x == 1) { y := 0; } else { y := 1; }", "y == 0",
                                gamma=["x == 1"]))
        assert [c.rule for c in root.children] == ["assign", "closeInfeasible"]
        assert best(root) == 1

    def test_case_split(self, corpus_dir):
        task = parse_task((corpus_dir / "input_parity.pgcl").read_text())
        assert split_candidates(task) == ["n"]
        root = execute_task(task)
        assert root.rule == "caseSplit" and _arity(root) == 6
        assert execute_task(parse_task((corpus_dir / "unreachable_else.pgcl").read_text())
                            ).rule != "caseSplit"

    def test_split_needs_domain(self):
        with pytest.raises(ValueError, match="no finite domain"):
            execute(judgment("skip;", "true"), split=["n"])


class TestLoops:
    GEO = "c := 1; while (c == 1) { { c := 0; } [1/2] { c := 1; } }"

    @pytest.mark.parametrize("budget", [0, 1, 3, 10])
    def test_geometric_bound(self, budget):
        root = execute(judgment(self.GEO, "c == 0"), budget)
        assert best(root) == 1 - Fraction(1, 2 ** budget)
        assert budget_exhausted(root)

    def test_loop_that_cannot_run_needs_no_budget(self):
        root = execute(judgment("c := 0; while (c == 1) { c := 1; }", "c == 0"), 0)
        assert not budget_exhausted(root) and best(root) == 1

    def test_negative_budget(self):
        with pytest.raises(ValueError):
            execute(judgment("skip;", "true"), -1)

    @given(seeds)
    @settings(max_examples=30, deadline=None)
    def test_sound_against_oracle(self, seed):
        rng = random.Random(seed)
        prog = rand_loop_stmt(rng)
        post = parse_formula("a == 0")
        env = {v: rng.choice((0, 1, 2)) for v in "abc"}
        gamma = tuple(Atom(parse_expr(f"{k} == {v}")) for k, v in env.items())
        for budget in (0, 2, 4):
            root = execute(Judgment(gamma, (), prog, ROOT, post), budget)
            assert best(root) <= expectation(prog, env, post, budget).lower_bound


class TestInvariants:
    @given(seeds)
    @settings(max_examples=60, deadline=None)
    def test_child_counts(self, seed):
        task = rand_task(random.Random(seed))
        root = execute_task(task, 0)
        for node in root.walk():
            assert node.rule in RULES
            n = _arity(node)
            if node.rule in LEAF_RULES:
                assert n == 0
            elif node.rule in ("skip", "assign", "loopUnroll"):
                assert n == 1
            elif node.rule in ("if", "probChoice"):
                assert n == 2
            else:
                assert n >= 2 or node.rule == "caseSplit"

    @given(seeds)
    @settings(max_examples=40, deadline=None)
    def test_deterministic(self, seed):
        task = rand_task(random.Random(seed))
        assert tree_to_json(execute_task(task, 0)) == tree_to_json(execute_task(task, 0))

    @given(seeds)
    @settings(max_examples=40, deadline=None)
    def test_fresh_variables_are_unique(self, seed):
        # each non-root variable is introduced by exactly one parent constraint
        task = rand_task(random.Random(seed))
        cs = collect_constraints(execute_task(task, 0))
        children = [v for c in cs if isinstance(c, MinUB) for v in c.operands]
        children += [v for c in cs if isinstance(c, AffineUB) for v in (c.left, c.right)]
        assert len(children) == len(set(children))


class TestReports:
    def test_text(self):
        root = execute(judgment("{ x := 1; } [1/2] { x := 0; }", "x == 1"))
        lines = format_tree(root).splitlines()
        assert lines[0].startswith("probChoice: . |- {} [{ x := 1; } [1/2] { x := 0; }]_p ")
        assert lines[0].endswith("==> p <= 1/2*p0 + 1/2*p1")
        assert lines[1].startswith("  assign:") and lines[2].startswith("    empty1:")
        assert lines[2].endswith("==> p0 = 1")

    def test_json(self, corpus_dir):
        task = parse_task((corpus_dir / "coin_flip.pgcl").read_text())
        doc = json.loads(tree_to_json(execute_task(task)))
        assert set(doc) == {"rule", "gamma", "updates", "program", "pvar", "constraints",
                            "children"}
        assert doc == tree_to_dict(execute_task(task))

    def test_undecided_is_reported(self):
        task = parse_task("@input n : int\n@ensures n > 0\n@prob 0\n{ skip; }")
        root = execute(root_judgment(task))
        [leaf] = undecided_leaves(root)
        assert leaf.rule == "empty0" and "n" in leaf.undecided
        assert "(undecided: " in format_tree(root)
