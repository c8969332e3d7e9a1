from __future__ import annotations

import numpy as np
import pytest

from pixel_eql.eql import Add, Const, Mul, Pow, SymbolicExpr, Var, to_string
from pixel_eql.eql.expr import format_coefficient
from pixel_eql.errors import ContractError


def poly(terms: dict) -> SymbolicExpr:
    return SymbolicExpr(terms)


def test_zero_coefficients_are_dropped():
    assert poly({(("x", 1),): 0.0}).terms == {}


def test_arithmetic_collects_like_terms():
    x, y = SymbolicExpr.variable("x"), SymbolicExpr.variable("y")
    expr = (x + y) * (x - y)
    assert expr == poly({(("x", 2),): 1.0, (("y", 2),): -1.0})
    assert (x**3).coefficient((("x", 3),)) == 1.0
    assert (2.0 * x + 1).evaluate({"x": 3.0}) == 7.0


def test_negative_power_is_rejected():
    with pytest.raises(ContractError):
        SymbolicExpr.variable("x") ** -1


def test_evaluate_broadcasts_and_names_missing_variables():
    expr = poly({(("x", 2),): 0.5, (("y", 1),): -1.0, (): 2.0})
    np.testing.assert_allclose(expr.evaluate({"x": np.array([0.0, 2.0]), "y": np.array([1.0, 1.0])}), [1.0, 3.0])
    with pytest.raises(ContractError, match="y"):
        expr.evaluate({"x": 1.0})


def test_tree_form_expands_to_polynomial():
    tree = Add((Mul((Const(0.5), Pow(Var("x_0"), 2))), Const(1.0)))
    assert tree.expand() == poly({(("x_0", 2),): 0.5, (): 1.0})
    assert tree.evaluate({"x_0": 2.0}) == 3.0


def test_to_ast_expands_back():
    expr = poly({(("a", 1), ("b", 2)): -0.3, (("a", 1),): 1.25, (): 4.0})
    assert expr.to_ast().expand() == expr


def test_to_string_uses_powers_and_sig_digits():
    assert to_string(poly({(("x_0", 2),): 0.5})) == "0.5*x_0**2"
    assert to_string(poly({(("x", 1),): -8.24, (): 0.0871})) == "-8.2*x + 0.087"


def test_to_string_orders_by_degree_then_name_constant_last():
    expr = poly({(): 3.0, (("y", 1),): 1.5, (("x", 1), ("y", 1)): 0.25, (("x", 2),): -2.0})
    assert to_string(expr) == "-2*x**2 + 0.25*x*y + 1.5*y + 3"


def test_to_string_hides_coefficients_that_round_to_zero():
    expr = poly({(("x", 1),): 0.004, (): 1.0})
    assert to_string(expr) == "1"
    assert expr.coefficient((("x", 1),)) == 0.004
    assert to_string(poly({(("x", 1),): 0.004})) == "0"


@pytest.mark.parametrize(
    ("value", "text"),
    [(0.0871, "0.087"), (-8.24, "-8.2"), (123.0, "120"), (1.0, "1")],
)
def test_format_coefficient(value, text):
    assert format_coefficient(value) == text
