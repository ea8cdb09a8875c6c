from fractions import Fraction

import pytest
from hypothesis import given

from pltlf import (
    And,
    Comparison,
    Next,
    Not,
    ParseError,
    Prob,
    Prop,
    Until,
    conj,
    eval_trace,
    format_trace,
    formula_text,
    negate,
    parse_formula,
    parse_trace,
    vars_of,
)
from pltlf.syntax import all_valuations, formula_size, has_prob, is_normalized, normalize

import strategies as sts


def t(text):
    return parse_trace(text)


class TestParsing:
    def test_precedence(self):
        f = parse_formula("!a & b | c -> X d U e")
        assert formula_text(f) == "!a & b | c -> X d U e"
        assert formula_text(parse_formula("(a -> b) U (c | d)")) == "(a -> b) U (c | d)"

    def test_until_right_associative(self):
        assert parse_formula("a U b U c") == parse_formula("a U (b U c)")

    def test_implies_right_associative(self):
        assert parse_formula("a -> b -> c") == parse_formula("a -> (b -> c)")

    def test_probability_brackets(self):
        f = parse_formula("P<=0.5[a]")
        assert f == Prob(Comparison.LE, Fraction(1, 2), Prop("a"))
        assert formula_text(f) == "P<=1/2[a]"

    def test_decimal_bounds_are_exact(self):
        f = parse_formula("P>=0.6[X b]")
        assert f.bound == Fraction(3, 5)

    def test_rational_bounds(self):
        assert parse_formula("P>7/10[a]").bound == Fraction(7, 10)

    def test_bound_range_checked(self):
        with pytest.raises(ParseError):
            parse_formula("P<=1.5[a]")

    def test_error_position(self):
        with pytest.raises(ParseError, match=r"1:8"):
            parse_formula("P<=0.5 a")

    def test_unbalanced(self):
        with pytest.raises(ParseError):
            parse_formula("(a & b")

    @given(sts.formulas())
    def test_text_round_trip(self, f):
        assert parse_formula(formula_text(f)) == f


class TestTraces:
    def test_parse(self):
        assert t("-;a;a,b") == (frozenset(), frozenset({"a"}), frozenset({"a", "b"}))

    def test_round_trip(self):
        for text in ("-", "a", "a,b;-;b"):
            assert format_trace(t(text)) == text

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            parse_trace("")

    @given(sts.traces())
    def test_format_parse_inverse(self, trace):
        assert parse_trace(format_trace(trace)) == trace


class TestEval:
    def test_response(self):
        assert eval_trace(parse_formula("G(a -> F b)"), t("a;b"))

    def test_strong_next_at_end(self):
        assert not eval_trace(parse_formula("X a"), t("a"))

    def test_until_unfolds(self):
        assert eval_trace(parse_formula("a U b"), t("a;a;a,b"))

    def test_until_needs_goal(self):
        assert not eval_trace(parse_formula("a U b"), t("a;a;a"))

    def test_prob_rejected(self):
        with pytest.raises(ValueError):
            eval_trace(parse_formula("P<=0.5[a]"), t("a"))


class TestNormalize:
    def test_removes_sugar(self):
        f = normalize(parse_formula("F a | G b -> c"))
        assert is_normalized(f)

    @given(sts.formulas())
    def test_idempotent(self, f):
        g = normalize(f)
        assert normalize(g) == g
        assert is_normalized(g)

    @given(sts.formulas(prob_free=True, max_leaves=3))
    def test_preserves_truth(self, f):
        # exhaustive over traces up to length 3 here; length 5 runs in the
        # acceptance property bundle
        g = normalize(f)
        vals = all_valuations(("a", "b"))
        stack = [(v,) for v in vals]
        while stack:
            trace = stack.pop()
            assert eval_trace(f, trace) == eval_trace(g, trace)
            if len(trace) < 3:
                stack.extend(trace + (v,) for v in vals)


class TestStructure:
    def test_conj_flattens(self):
        f = conj(Prop("a"), And((Prop("b"), Prop("c"))))
        assert f == And((Prop("a"), Prop("b"), Prop("c")))

    def test_negate_prob_flips_comparison(self):
        f = Prob(Comparison.LE, Fraction(1, 2), Prop("a"))
        assert negate(f) == Prob(Comparison.GT, Fraction(1, 2), Prop("a"))

    @given(sts.formulas())
    def test_negate_involution(self, f):
        assert negate(negate(f)) == f

    def test_vars(self):
        assert vars_of(parse_formula("P<=0.5[a U b] & X a")) == frozenset({"a", "b"})

    def test_has_prob(self):
        assert has_prob(parse_formula("X P<=0.5[a]"))
        assert not has_prob(parse_formula("a U b"))

    def test_size(self):
        assert formula_size(Until(Prop("a"), Not(Prop("b")))) == 4

    def test_next_text(self):
        assert formula_text(Next(Until(Prop("a"), Prop("b")))) == "X(a U b)"
