from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from gen import envs, int_exprs, bool_exprs
from pdlverify.errors import DivisionByZero, TypeMismatch, UnboundVariable
from pdlverify.parser import parse_expr, parse_program
from pdlverify.pgcl import (FALSE, SKIP, TRUE, Assign, Binary, Lit, Seq, Unary, Valuation,
                            Var, assigned_vars, eval_expr, euclid_divmod, expr_vars,
                            flatten_seq, free_vars, has_loops, seq, split_first,
                            update_valuation)


class TestEval:
    def test_arithmetic(self):
        assert eval_expr(parse_expr("(prize + 1) % 3"), {"prize": 2}) == 0
        assert eval_expr(parse_expr("2 * x - y"), {"x": 3, "y": 1}) == 5

    def test_negative_modulo_is_euclidean(self):
        # (2*0 - 1) % 3 is the door left over when prize=0 and choice=1
        assert eval_expr(parse_expr("(2*prize - choice) % 3"), {"prize": 0, "choice": 1}) == 2
        assert euclid_divmod(-7, 2) == (-4, 1)
        assert euclid_divmod(7, -2) == (-3, 1)
        assert euclid_divmod(-7, -2) == (4, 1)

    @given(st.integers(-50, 50), st.integers(-9, 9).filter(bool))
    def test_divmod_identity(self, a, b):
        q, r = euclid_divmod(a, b)
        assert a == b * q + r and 0 <= r < abs(b)

    def test_boolean_ops(self):
        assert eval_expr(parse_expr("sw == true"), {"sw": True}) is True
        assert eval_expr(parse_expr("!(x < 1) && x != 3"), {"x": 2}) is True
        assert eval_expr(parse_expr("false || x >= 2"), {"x": 2}) is True

    def test_bool_and_int_are_distinct(self):
        assert Lit(True) != Lit(1)
        with pytest.raises(TypeMismatch):
            eval_expr(Binary("==", Lit(True), Lit(1)), {})
        with pytest.raises(TypeMismatch):
            eval_expr(Binary("+", Lit(True), Lit(1)), {})
        with pytest.raises(TypeMismatch):
            eval_expr(Binary("<", Lit(True), Lit(False)), {})
        with pytest.raises(TypeMismatch):
            eval_expr(Unary("!", Lit(0)), {})

    def test_errors(self):
        with pytest.raises(UnboundVariable) as exc:
            eval_expr(Var("ghost"), {})
        assert exc.value.name == "ghost"
        with pytest.raises(DivisionByZero):
            eval_expr(parse_expr("x % 0"), {"x": 1})
        with pytest.raises(DivisionByZero):
            eval_expr(parse_expr("1 / (x - x)"), {"x": 4})

    @given(int_exprs, envs)
    def test_deterministic(self, e, env):
        assert eval_expr(e, env) == eval_expr(e, dict(env))

    @given(bool_exprs, envs, st.integers(-5, 5))
    def test_frame(self, e, env, junk):
        # values of variables outside the expression do not matter
        extended = dict(env, unrelated=junk)
        try:
            expected = eval_expr(e, env)
        except (DivisionByZero, TypeMismatch) as err:
            with pytest.raises(type(err)):
                eval_expr(e, extended)
        else:
            assert eval_expr(e, extended) == expected


class TestValuation:
    def test_immutable_update(self):
        env = Valuation({"x": 0})
        env2 = env.set("x", 1)
        assert env["x"] == 0 and env2["x"] == 1
        with pytest.raises(TypeError):
            env["x"] = 5  # type: ignore[index]

    def test_type_is_part_of_identity(self):
        assert Valuation({"x": 1}) != Valuation({"x": True})
        assert hash(Valuation({"a": 1, "b": 2})) == hash(Valuation({"b": 2, "a": 1}))

    def test_str(self):
        assert str(Valuation({"b": True, "a": 1})) == "{a: 1, b: true}"

    @given(envs, st.sampled_from(["a", "b", "z"]), st.integers(-3, 3))
    def test_update_lookup(self, env, x, v):
        new = update_valuation(env, x, v)
        assert new[x] == v
        assert all(new[y] == env[y] for y in env if y != x)


class TestStatements:
    def test_seq_helpers(self):
        a, b, c = Assign("a", Lit(0)), Assign("b", Lit(1)), Assign("c", Lit(2))
        s = Seq(Seq(a, b), c)
        assert flatten_seq(s) == [a, b, c]
        assert split_first(s) == (a, Seq(b, c))
        assert split_first(a) == (a, None)
        assert seq() == SKIP and seq(a) == a and seq(a, b, c) == Seq(a, Seq(b, c))

    def test_free_vars(self):
        assert free_vars(parse_program("x := y + 1;")) == {"x", "y"}
        body = parse_program("""
            prize := 0; choice := 0; open := 0;
            { prize := 1; } [] { prize := 2; }
            if (sw == true) { choice := (2*choice - open) % 3; } else { skip; }
        """)
        assert free_vars(body) == {"prize", "choice", "open", "sw"}
        assert assigned_vars(body) == {"prize", "choice", "open"}

    def test_has_loops(self):
        assert has_loops(parse_program("while (x > 0) { x := x - 1; }"))
        assert not has_loops(parse_program("{ x := 1; } [1/2] { x := 0; }"))

    def test_expr_vars_and_constants(self):
        assert expr_vars(parse_expr("a + b * a")) == {"a", "b"}
        assert TRUE == Lit(True) and FALSE == Lit(False)
        assert parse_program("{ x := 1; } [0.25] { x := 0; }").prob == Fraction(1, 4)
