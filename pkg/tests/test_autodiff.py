"""Compiled fields against independent finite-difference oracles."""

import math

import numpy as np
import pytest

from gvf3d.autodiff import ADDomainError, evaluate_dual, hessian_matrix
from gvf3d.expressions import parse_expression
from gvf3d.paths import compile_field

# Grammar-covering expressions that stay smooth on [-5, 5]^3.
SAFE_EXPRESSIONS = [
    "x - cos(z)",
    "y - sin(z)",
    "(x - 0.0)^2 + (z - 1.5)^2 - 1.0",
    "y^2 + z^2 - 4.0",
    "exp(x / 5.0) * sin(y) + tan(z / 4.0)",
    "ln(26.0 + x^2 + y^2) / sqrt(1.0 + z^2)",
    "x * y * z - y / (4.0 + x^2)",
    "-x^3 + 2.0 * z",
]


def fd_gradient(value_fn, xi, h=1e-5):
    """Central differences of the value: the independent gradient oracle."""
    xi = np.asarray(xi, dtype=float)
    out = np.empty(3)
    for axis in range(3):
        step = np.zeros(3)
        step[axis] = h
        out[axis] = (value_fn(xi + step) - value_fn(xi - step)) / (2.0 * h)
    return out


def fd_hessian(value_fn, xi, h=1e-4):
    """Second central differences of the value."""
    xi = np.asarray(xi, dtype=float)
    out = np.empty((3, 3))
    f0 = value_fn(xi)
    for i in range(3):
        ei = np.zeros(3)
        ei[i] = h
        out[i, i] = (value_fn(xi + ei) - 2.0 * f0 + value_fn(xi - ei)) / h**2
        for j in range(i + 1, 3):
            ej = np.zeros(3)
            ej[j] = h
            mixed = (value_fn(xi + ei + ej) - value_fn(xi + ei - ej)
                     - value_fn(xi - ei + ej) + value_fn(xi - ei - ej))
            out[i, j] = out[j, i] = mixed / (4.0 * h**2)
    return out


@pytest.mark.parametrize("source", SAFE_EXPRESSIONS)
def test_gradient_and_hessian_match_finite_differences(source, rng):
    field = compile_field(parse_expression(source))
    points = rng.uniform(-5.0, 5.0, size=(100, 3))
    for xi in points:
        fv = field.evaluate(xi)
        assert fv.domain_ok
        grad_fd = fd_gradient(lambda p: field.value(p), xi)
        assert np.allclose(fv.gradient, grad_fd, atol=1e-6, rtol=0.0)
        hess_fd = fd_hessian(lambda p: field.value(p), xi)
        assert np.allclose(fv.hessian, hess_fd, atol=1e-4, rtol=0.0)


@pytest.mark.parametrize("source", SAFE_EXPRESSIONS)
def test_hessian_symmetric(source, rng):
    field = compile_field(parse_expression(source))
    for xi in rng.uniform(-5.0, 5.0, size=(20, 3)):
        hess = field.evaluate(xi).hessian
        assert np.allclose(hess, hess.T, rtol=1e-12, atol=0.0)


class TestSpecExamples:
    def test_helix_surface_at_origin_ring(self):
        # phi = x - cos(z) at (1, 0, 0): value 0, gradient (1, 0, sin 0),
        # only d2/dz2 = cos 0 nonzero (hand differentiation).
        field = compile_field(parse_expression("x - cos(z)"))
        fv = field.evaluate((1.0, 0.0, 0.0))
        assert fv.value == 0.0
        assert np.array_equal(fv.gradient, [1.0, 0.0, 0.0])
        expected_hess = np.zeros((3, 3))
        expected_hess[2, 2] = 1.0
        assert np.array_equal(fv.hessian, expected_hess)

    def test_linear_field(self):
        field = compile_field(parse_expression("x"))
        fv = field.evaluate((3.7, -1.0, 9.9))
        assert fv.value == 3.7
        assert np.array_equal(fv.gradient, [1.0, 0.0, 0.0])
        assert np.array_equal(fv.hessian, np.zeros((3, 3)))

    def test_circular_cylinder(self):
        field = compile_field(parse_expression("y^2 + z^2 - 4"))
        fv = field.evaluate((0.0, 2.0, 0.0))
        assert fv.value == 0.0
        assert np.array_equal(fv.gradient, [0.0, 4.0, 0.0])


class TestDomainErrors:
    def test_ln_of_negative_flags_point(self):
        field = compile_field(parse_expression("ln(x)"))
        fv = field.evaluate((-1.0, 0.0, 0.0))
        assert not fv.domain_ok
        assert math.isnan(fv.value)
        assert np.all(np.isnan(fv.gradient))

    def test_sqrt_of_negative_flags_point(self):
        field = compile_field(parse_expression("sqrt(z)"))
        assert not field.evaluate((0.0, 0.0, -2.0)).domain_ok

    def test_sqrt_at_zero_flags_point(self):
        # Derivatives blow up at the boundary: not C^2 there.
        field = compile_field(parse_expression("sqrt(z)"))
        assert not field.evaluate((0.0, 0.0, 0.0)).domain_ok

    def test_division_by_zero_flags_point(self):
        field = compile_field(parse_expression("1.0 / x"))
        assert not field.evaluate((0.0, 1.0, 1.0)).domain_ok

    def test_negative_power_at_zero_flags_point(self):
        field = compile_field(parse_expression("x^-2"))
        assert not field.evaluate((0.0, 0.0, 0.0)).domain_ok

    def test_ok_inside_domain(self):
        field = compile_field(parse_expression("ln(x) + sqrt(z)"))
        fv = field.evaluate((2.0, 0.0, 4.0))
        assert fv.domain_ok
        assert fv.value == pytest.approx(math.log(2.0) + 2.0, rel=1e-15)

    def test_raw_domain_error_raises(self):
        with pytest.raises(ADDomainError):
            evaluate_dual(parse_expression("ln(x)"), -1.0, 0.0, 0.0)


class TestDual2Units:
    def test_product_rule_second_order(self):
        # d2/dx2 (x^2 * x) = 6x via nested multiplication.
        expr = parse_expression("x * x * x")
        jet = evaluate_dual(expr, 2.0, 0.0, 0.0)
        assert jet.val == 8.0
        assert jet.grad == (12.0, 0.0, 0.0)
        assert hessian_matrix(jet.hess)[0][0] == 12.0

    def test_quotient_rule(self):
        expr = parse_expression("x / y")
        jet = evaluate_dual(expr, 1.0, 2.0, 0.0)
        assert jet.val == 0.5
        assert jet.grad == (0.5, -0.25, 0.0)

    def test_mixed_partial(self):
        expr = parse_expression("x * y^2")
        jet = evaluate_dual(expr, 3.0, 2.0, 0.0)
        hess = hessian_matrix(jet.hess)
        assert hess[0][1] == 4.0   # d2/dxdy = 2y
        assert hess[1][1] == 6.0   # d2/dy2 = 2x

    def test_power_zero_and_one(self):
        assert evaluate_dual(parse_expression("x^0"), 5.0, 0.0, 0.0).val == 1.0
        jet = evaluate_dual(parse_expression("x^1"), 5.0, 0.0, 0.0)
        assert jet.val == 5.0
        assert jet.grad == (1.0, 0.0, 0.0)
