import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shearlab.errors import ArityError, DomainError, ParseError, UnknownIdentifierError
from shearlab.expr import (
    Add,
    Call,
    Const,
    Div,
    Mul,
    Neg,
    Pow,
    Sub,
    Var,
    eval_jet2,
    evaluate,
    parse,
    to_string,
)

from oracles import fd_gradient, fd_hessian, random_trig_polynomial, rel_err


class TestParse:
    def test_precedence_example(self):
        e = parse("u^2 + sin(v)", ["u", "v"])
        assert e.root == Add(Pow(Var("u"), 2.0), Call("sin", Var("v")))

    def test_division_example(self):
        e = parse("1/(1-u)", ["u"])
        assert e.root == Div(Const(1.0), Sub(Const(1.0), Var("u")))

    def test_unknown_identifier(self):
        with pytest.raises(UnknownIdentifierError) as info:
            parse("r*cos(u)*cos(v)", ["u", "v"])
        assert info.value.name == "r"
        assert (info.value.line, info.value.column) == (1, 1)

    @pytest.mark.parametrize(
        "src, tree",
        [
            ("-u^2", Neg(Pow(Var("u"), 2.0))),
            ("u^3^2", Pow(Var("u"), 9.0)),
            ("u^-1", Pow(Var("u"), -1.0)),
            ("u^(1/2)", Pow(Var("u"), 0.5)),
            ("u - v - 1", Sub(Sub(Var("u"), Var("v")), Const(1.0))),
            ("u/v/2", Div(Div(Var("u"), Var("v")), Const(2.0))),
            ("u*-v", Mul(Var("u"), Neg(Var("v")))),
            ("2*pi", Mul(Const(2.0), Const(math.pi, "pi"))),
            ("1.5e-3", Const(0.0015)),
            (".5", Const(0.5)),
        ],
    )
    def test_grammar(self, src, tree):
        assert parse(src, ["u", "v"]).root == tree

    def test_syntax_error_location_and_expected(self):
        with pytest.raises(ParseError) as info:
            parse("u +\n  * v", ["u", "v"])
        err = info.value
        assert (err.line, err.column) == (2, 3)
        assert "identifier" in err.expected and "number" in err.expected

    def test_unclosed_paren(self):
        with pytest.raises(ParseError) as info:
            parse("sin(u", ["u"])
        assert "')'" in info.value.expected

    def test_arity(self):
        with pytest.raises(ArityError):
            parse("sin(u, v)", ["u", "v"])

    def test_unknown_function(self):
        with pytest.raises(UnknownIdentifierError) as info:
            parse("atan2(u)", ["u"])
        assert info.value.name == "atan2"

    def test_non_constant_exponent(self):
        with pytest.raises(ParseError, match="constant"):
            parse("u^v", ["u", "v"])

    def test_reserved_variable_rejected(self):
        with pytest.raises(ValueError):
            parse("pi", ["pi"])

    def test_duplicate_variables_rejected(self):
        with pytest.raises(ValueError):
            parse("u", ["u", "u"])

    def test_trailing_garbage(self):
        with pytest.raises(ParseError):
            parse("u v", ["u", "v"])


class TestPrinter:
    @pytest.mark.parametrize(
        "src, printed",
        [
            ("u^2 + sin(v)", "u^2 + sin(v)"),
            ("(u+v)*(u-v)", "(u + v)*(u - v)"),
            ("u - (v - 1)", "u - (v - 1)"),
            ("-(u*v)", "-(u*v)"),
            ("(-u)^2", "(-u)^2"),
            ("(u^2)^3", "(u^2)^3"),
            ("u^(-2)", "u^(-2)"),
            ("2*pi*e", "2*pi*e"),
        ],
    )
    def test_canonical(self, src, printed):
        assert to_string(parse(src, ["u", "v"])) == printed


names = st.sampled_from(["u", "v", "w"])
leaves = st.one_of(
    names.map(Var),
    st.floats(0, 1e6, allow_nan=False, allow_infinity=False).map(Const),
    st.sampled_from([Const(math.pi, "pi"), Const(math.e, "e")]),
)
exponents = st.one_of(st.integers(-4, 6).map(float), st.floats(-3, 3, allow_nan=False))
trees = st.recursive(
    leaves,
    lambda kids: st.one_of(
        st.builds(Add, kids, kids),
        st.builds(Sub, kids, kids),
        st.builds(Mul, kids, kids),
        st.builds(Div, kids, kids),
        st.builds(Neg, kids),
        st.builds(Pow, kids, exponents),
        st.builds(Call, st.sampled_from(["sin", "cos", "exp", "log", "sqrt", "tanh"]), kids),
    ),
    max_leaves=12,
)


@settings(max_examples=300, deadline=None)
@given(trees)
def test_print_parse_roundtrip(tree):
    text = to_string(tree)
    first = parse(text, ["u", "v", "w"])
    assert first.root == tree
    assert parse(to_string(first), ["u", "v", "w"]) == first


class TestJets:
    def test_hand_example_sum(self):
        j = eval_jet2(parse("u^2 + sin(v)", ["u", "v"]), [1, 0])
        assert j.value == 1.0
        np.testing.assert_array_equal(j.gradient, [2.0, 1.0])
        np.testing.assert_array_equal(j.hessian, [[2.0, 0.0], [0.0, 0.0]])

    def test_hand_example_product(self):
        j = eval_jet2(parse("u*v", ["u", "v"]), [3, 5])
        assert j.value == 15.0
        np.testing.assert_array_equal(j.gradient, [5.0, 3.0])
        np.testing.assert_array_equal(j.hessian, [[0.0, 1.0], [1.0, 0.0]])

    def test_constant_expression_has_exact_zero_derivatives(self):
        j = eval_jet2(parse("sin(pi/7)^2 * exp(2) / 3 - 1", ["u", "v"]), [0.3, -2])
        assert not j.gradient.any() and not j.hessian.any()

    def test_hessian_exactly_symmetric(self):
        rng = np.random.default_rng(7)
        for _ in range(30):
            e = parse(random_trig_polynomial(rng, ["u", "v", "w"], 4), ["u", "v", "w"])
            H = eval_jet2(e, rng.uniform(-1, 1, 3)).hessian
            assert np.array_equal(H, H.T)

    def test_matches_finite_differences(self):
        rng = np.random.default_rng(1234)
        for _ in range(100):
            names = ["u", "v", "w"][: rng.integers(1, 4)]
            e = parse(random_trig_polynomial(rng, names), names)
            x = rng.uniform(-1, 1, len(names))
            j = eval_jet2(e, x)
            assert j.value == pytest.approx(evaluate(e, x), rel=1e-14, abs=1e-14)
            assert rel_err(j.gradient, fd_gradient(e, x)) <= 1e-6
            assert rel_err(j.hessian, fd_hessian(e, x)) <= 1e-4

    @pytest.mark.parametrize(
        "src, x, expected_grad, expected_hess",
        [
            ("log(u)", 2.0, 0.5, -0.25),
            ("sqrt(u)", 4.0, 0.25, -1 / 32),
            ("1/u", 2.0, -0.25, 0.25),
            ("tan(u)", 0.0, 1.0, 0.0),
            ("cosh(u)", 0.0, 0.0, 1.0),
            ("u^0.5", 4.0, 0.25, -1 / 32),
            ("u^1", 0.0, 1.0, 0.0),
            ("u^2", 0.0, 0.0, 2.0),
        ],
    )
    def test_elementary_derivatives(self, src, x, expected_grad, expected_hess):
        j = eval_jet2(parse(src, ["u"]), [x])
        assert j.gradient[0] == pytest.approx(expected_grad)
        assert j.hessian[0, 0] == pytest.approx(expected_hess)

    @pytest.mark.parametrize(
        "src, x",
        [("log(u)", 0.0), ("log(u)", -1.0), ("sqrt(u)", -1.0), ("1/u", 0.0),
         ("u^0.5", -2.0), ("u^-2", 0.0), ("exp(u)", 1000.0)],
    )
    def test_domain_errors(self, src, x):
        e = parse(src, ["u"])
        with pytest.raises(DomainError):
            eval_jet2(e, [x])
        with pytest.raises(DomainError):
            evaluate(e, [x])

    def test_domain_error_names_node(self):
        with pytest.raises(DomainError) as info:
            eval_jet2(parse("u + log(v - 1)", ["u", "v"]), [0, 1])
        assert "log(v - 1)" in str(info.value)
        assert info.value.value == 0.0

    def test_binding_count_checked(self):
        with pytest.raises(ValueError):
            eval_jet2(parse("u", ["u", "v"]), [1.0])

    def test_concurrent_evaluation_is_consistent(self):
        e = parse("sin(u*v)^2 + exp(0.3*w)*u", ["u", "v", "w"])
        pts = np.random.default_rng(3).uniform(-1, 1, (64, 3))
        serial = [eval_jet2(e, p) for p in pts]
        with ThreadPoolExecutor(8) as pool:
            threaded = list(pool.map(lambda p: eval_jet2(e, p), pts))
        for a, b in zip(serial, threaded):
            assert a.value == b.value
            assert np.array_equal(a.gradient, b.gradient)
            assert np.array_equal(a.hessian, b.hessian)
