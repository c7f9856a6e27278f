from __future__ import annotations

import random
from fractions import Fraction

import pytest
from hypothesis import given, settings

from gen import envs, formulas, seeds, rand_loop_stmt, rand_stmt, stmts
from pdlverify.errors import EvalError
from pdlverify.formula import F_TRUE, sat_state_formula
from pdlverify.oracle import (Config, Det, DemonicSucc, Final, ProbSucc, enumerate_paths,
                              expectation, expected_reward, group_by_resolution, step)
from pdlverify.parser import parse_formula, parse_program, parse_task
from pdlverify.pgcl import SKIP, Demonic, If, Prob, Seq, Valuation

GEOMETRIC = parse_program("c := 1; while (c == 1) { { c := 0; } [1/2] { c := 1; } }")


def _cfg(src: str, **env) -> Config:
    return Config(Valuation(env), parse_program(src))


def _resolve(s, rng):
    """Replace every demonic node by a fixed branch: one memoryless policy."""
    if isinstance(s, Demonic):
        return _resolve(rng.choice((s.left, s.right)), rng)
    if isinstance(s, Seq):
        return Seq(_resolve(s.first, rng), _resolve(s.rest, rng))
    if isinstance(s, Prob):
        return Prob(s.prob, _resolve(s.left, rng), _resolve(s.right, rng))
    if isinstance(s, If):
        return If(s.cond, _resolve(s.then, rng), _resolve(s.orelse, rng))
    return s


class TestStep:
    def test_shapes(self):
        assert isinstance(step(Config(Valuation({}), SKIP)), Final)
        det = step(_cfg("x := 3;"))
        assert isinstance(det, Det) and det.next.env["x"] == 3 and det.next.final
        assert isinstance(step(_cfg("{ x := 1; } [] { x := 2; }")), DemonicSucc)
        ps = step(_cfg("{ x := 1; } [1/4] { x := 2; }"))
        assert isinstance(ps, ProbSucc)
        assert [p for p, _ in ps.branches] == [Fraction(1, 4), Fraction(3, 4)]

    def test_sequence_lifts_inner_step(self):
        succ = step(_cfg("{ x := 1; } [] { x := 2; } y := x;"))
        assert isinstance(succ, DemonicSucc)
        assert succ.left.program == parse_program("x := 1; y := x;")

    def test_loop_unroll_is_marked(self):
        enter = step(_cfg("while (x > 0) { x := x - 1; }", x=1))
        leave = step(_cfg("while (x > 0) { x := x - 1; }", x=0))
        assert enter.unroll and not leave.unroll and leave.next.final


class TestExpectation:
    def test_coin(self):
        res = expectation(parse_program("{ x := 1; } [1/2] { x := 0; }"), {},
                          parse_formula("x == 1"))
        assert res.lower_bound == Fraction(1, 2) and res.exact

    def test_geometric(self):
        res = expectation(GEOMETRIC, {}, parse_formula("c == 0"), budget=10)
        assert res.lower_bound == Fraction(1023, 1024)
        assert res.residual_mass == Fraction(1, 1024)
        assert res.upper_bound == 1

    def test_monty_hall(self, corpus_dir):
        for name, value in [("monty_hall", Fraction(2, 3)), ("monty_hall_noswitch", Fraction(1, 3)),
                            ("monty_hall_demonic_open", Fraction(2, 3))]:
            task = parse_task((corpus_dir / f"{name}.pgcl").read_text())
            env = {"sw": name != "monty_hall_noswitch"}
            res = expectation(task.body, env, task.ensures)
            assert res.lower_bound == value and res.exact

    def test_demon_minimises(self):
        prog = parse_program("{ x := 1; } [] { { x := 1; } [1/3] { x := 0; } }")
        assert expectation(prog, {}, parse_formula("x == 1")).lower_bound == Fraction(1, 3)

    def test_negative_budget(self):
        with pytest.raises(ValueError):
            expectation(SKIP, {}, F_TRUE, budget=-1)


class TestPaths:
    def test_three_paths_for_fixed_prize(self):
        prog = parse_program("prize := 0; { choice := 0; } [1/3] "
                             "{ { choice := 1; } [1/2] { choice := 2; } }")
        paths = enumerate_paths(prog, {})
        assert sorted(p.final["choice"] for p in paths) == [0, 1, 2]
        assert all(p.probability == Fraction(1, 3) and not p.truncated for p in paths)

    def test_resolutions(self):
        prog = parse_program("{ x := 0; } [] { x := 1; } { y := 0; } [1/2] { y := 1; }")
        groups = group_by_resolution(enumerate_paths(prog, {}))
        assert sorted(groups) == ["0", "1"]
        assert all(sum(p.probability for p in g) == 1 for g in groups.values())

    def test_truncated_paths_carry_residual(self):
        paths = enumerate_paths(GEOMETRIC, {}, budget=2)
        assert sum(p.probability for p in paths if p.truncated) == Fraction(1, 4)
        assert expected_reward(paths, parse_formula("c == 0")) == Fraction(3, 4)


class TestProperties:
    @given(stmts, envs)
    @settings(max_examples=60)
    def test_probability_conserved(self, s, env):
        try:
            paths = enumerate_paths(s, env)
        except EvalError:
            return
        for group in group_by_resolution(paths).values():
            assert sum(p.probability for p in group) == 1

    @given(seeds)
    @settings(max_examples=40)
    def test_budget_monotone(self, seed):
        rng = random.Random(seed)
        s = rand_loop_stmt(rng)
        env = {"a": rng.choice((0, 1, 2)), "b": 0, "c": 0}
        post = parse_formula("a == 0")
        prev = None
        for b in range(6):
            res = expectation(s, env, post, budget=b)
            if prev is not None:
                # the bracketing interval only shrinks
                assert prev.lower_bound <= res.lower_bound <= res.upper_bound <= prev.upper_bound
            prev = res

    @given(seeds, formulas)
    @settings(max_examples=60)
    def test_minimum_over_resolutions(self, seed, post):
        rng = random.Random(seed)
        s = rand_stmt(rng, 4)
        env = {v: rng.choice((0, 1, 2)) for v in "abc"}
        try:
            res = expectation(s, env, post)
            groups = group_by_resolution(enumerate_paths(s, env))
        except EvalError:
            return
        values = [expected_reward(g, post) for g in groups.values()]
        assert res.exact and res.lower_bound == min(values)

    @given(seeds, formulas)
    @settings(max_examples=60)
    def test_minimum_over_policies(self, seed, post):
        rng = random.Random(seed)
        s = rand_stmt(rng, 3)
        env = {v: rng.choice((0, 1, 2)) for v in "abc"}
        try:
            res = expectation(s, env, post)
            fixed = [expectation(_resolve(s, rng), env, post).lower_bound for _ in range(4)]
        except EvalError:
            return
        # a fixed resolution is one particular policy, so it can only do worse
        assert all(res.lower_bound <= v for v in fixed)

    @given(seeds)
    @settings(max_examples=40)
    def test_memo_is_transparent(self, seed):
        rng = random.Random(seed)
        s = rand_loop_stmt(rng)
        env = {v: rng.choice((0, 1, 2)) for v in "abc"}
        post = parse_formula("a == 0 && b != 1")
        try:
            a = expectation(s, env, post, budget=4, memo=True)
        except EvalError:
            return
        assert a == expectation(s, env, post, budget=4, memo=False)


def test_sat_on_final_states_matches_reward():
    prog = parse_program("{ x := 1; } [1/3] { x := 2; }")
    paths = enumerate_paths(prog, {})
    post = parse_formula("x == 2")
    assert expected_reward(paths, post) == sum(
        p.probability for p in paths if sat_state_formula(p.final, post))
