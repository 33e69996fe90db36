"""Second-order forward-mode automatic differentiation over (x, y, z).

A :class:`Dual2` carries a value, the three first partials and the six
unique second partials, so one evaluation of an expression yields the
exact value, gradient and Hessian (up to floating-point rounding).  The
arithmetic sticks to plain floats and tuples: field evaluations sit inside
ODE right-hand sides, where small-array numpy overhead dominates runtime.

Pointwise domain failures (``ln`` of a non-positive value, ``sqrt`` of a
negative one, division by zero, overflow) raise :class:`ADDomainError`;
callers translate that into a NaN-carrying result with a flag instead of
letting NaNs propagate silently.
"""

from __future__ import annotations

import math

from .expressions import BinOp, Call, Expression, Neg, Number, Pow, Var

__all__ = ["Dual2", "ADDomainError", "evaluate_dual", "hessian_matrix"]

_ZERO3 = (0.0, 0.0, 0.0)
# Second-partial storage order: (xx, xy, xz, yy, yz, zz).
_ZERO6 = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0)


class ADDomainError(ArithmeticError):
    """The expression left its smooth domain at the evaluated point."""


class Dual2:
    """Truncated second-order Taylor jet of a scalar function of (x, y, z)."""

    __slots__ = ("val", "grad", "hess")

    def __init__(self, val: float, grad: tuple[float, float, float] = _ZERO3,
                 hess: tuple[float, ...] = _ZERO6):
        self.val = val
        self.grad = grad
        self.hess = hess

    @staticmethod
    def variable(value: float, axis: int) -> "Dual2":
        grad = [0.0, 0.0, 0.0]
        grad[axis] = 1.0
        return Dual2(value, tuple(grad), _ZERO6)

    @staticmethod
    def constant(value: float) -> "Dual2":
        return Dual2(value, _ZERO3, _ZERO6)

    def __repr__(self) -> str:
        return f"Dual2({self.val!r}, grad={self.grad!r})"

    def __add__(self, other: "Dual2") -> "Dual2":
        ax, ay, az = self.grad
        bx, by, bz = other.grad
        h = self.hess
        k = other.hess
        return Dual2(self.val + other.val, (ax + bx, ay + by, az + bz),
                     (h[0] + k[0], h[1] + k[1], h[2] + k[2],
                      h[3] + k[3], h[4] + k[4], h[5] + k[5]))

    def __sub__(self, other: "Dual2") -> "Dual2":
        ax, ay, az = self.grad
        bx, by, bz = other.grad
        h = self.hess
        k = other.hess
        return Dual2(self.val - other.val, (ax - bx, ay - by, az - bz),
                     (h[0] - k[0], h[1] - k[1], h[2] - k[2],
                      h[3] - k[3], h[4] - k[4], h[5] - k[5]))

    def __neg__(self) -> "Dual2":
        gx, gy, gz = self.grad
        h = self.hess
        return Dual2(-self.val, (-gx, -gy, -gz),
                     (-h[0], -h[1], -h[2], -h[3], -h[4], -h[5]))

    def __mul__(self, other: "Dual2") -> "Dual2":
        u, v = self.val, other.val
        ax, ay, az = self.grad
        bx, by, bz = other.grad
        h = self.hess
        k = other.hess
        return Dual2(
            u * v,
            (u * bx + v * ax, u * by + v * ay, u * bz + v * az),
            (u * k[0] + v * h[0] + 2.0 * ax * bx,
             u * k[1] + v * h[1] + ax * by + ay * bx,
             u * k[2] + v * h[2] + ax * bz + az * bx,
             u * k[3] + v * h[3] + 2.0 * ay * by,
             u * k[4] + v * h[4] + ay * bz + az * by,
             u * k[5] + v * h[5] + 2.0 * az * bz))

    def __truediv__(self, other: "Dual2") -> "Dual2":
        v = other.val
        if v == 0.0:
            raise ADDomainError("division by zero")
        inv = 1.0 / v
        recip = _chain(other, inv, -inv * inv, 2.0 * inv * inv * inv)
        return self * recip


def _chain(u: Dual2, f0: float, f1: float, f2: float) -> Dual2:
    """Compose ``u`` with a scalar function given f(u), f'(u), f''(u)."""
    gx, gy, gz = u.grad
    h = u.hess
    return Dual2(f0, (f1 * gx, f1 * gy, f1 * gz),
                 (f1 * h[0] + f2 * gx * gx,
                  f1 * h[1] + f2 * gx * gy,
                  f1 * h[2] + f2 * gx * gz,
                  f1 * h[3] + f2 * gy * gy,
                  f1 * h[4] + f2 * gy * gz,
                  f1 * h[5] + f2 * gz * gz))


def _sin(u: Dual2) -> Dual2:
    s, c = math.sin(u.val), math.cos(u.val)
    return _chain(u, s, c, -s)


def _cos(u: Dual2) -> Dual2:
    s, c = math.sin(u.val), math.cos(u.val)
    return _chain(u, c, -s, -c)


def _tan(u: Dual2) -> Dual2:
    t = math.tan(u.val)
    sec2 = 1.0 + t * t
    return _chain(u, t, sec2, 2.0 * sec2 * t)


def _exp(u: Dual2) -> Dual2:
    try:
        e = math.exp(u.val)
    except OverflowError as exc:
        raise ADDomainError("exp overflow") from exc
    return _chain(u, e, e, e)


def _ln(u: Dual2) -> Dual2:
    if u.val <= 0.0:
        raise ADDomainError("ln of a non-positive value")
    inv = 1.0 / u.val
    return _chain(u, math.log(u.val), inv, -inv * inv)


def _sqrt(u: Dual2) -> Dual2:
    # v = 0 is excluded as well: the derivatives blow up there.
    if u.val <= 0.0:
        raise ADDomainError("sqrt of a non-positive value")
    root = math.sqrt(u.val)
    f1 = 0.5 / root
    return _chain(u, root, f1, -0.5 * f1 / u.val)


_FUNCS = {"sin": _sin, "cos": _cos, "tan": _tan, "exp": _exp, "ln": _ln,
          "sqrt": _sqrt}


def _ipow(u: Dual2, n: int) -> Dual2:
    if n == 0:
        return Dual2.constant(1.0)
    if n == 1:
        return u
    if n < 0 and u.val == 0.0:
        raise ADDomainError("zero raised to a negative power")
    try:
        f0 = u.val ** n
        f1 = n * u.val ** (n - 1)
        f2 = n * (n - 1) * u.val ** (n - 2)
    except OverflowError as exc:
        raise ADDomainError("power overflow") from exc
    return _chain(u, f0, f1, f2)


def evaluate_dual(expr: Expression, x: float, y: float, z: float) -> Dual2:
    """Evaluate ``expr`` at (x, y, z) carrying first and second partials."""
    seeds = (Dual2.variable(x, 0), Dual2.variable(y, 1), Dual2.variable(z, 2))

    def walk(node: Expression) -> Dual2:
        if isinstance(node, Number):
            return Dual2.constant(node.value)
        if isinstance(node, Var):
            return seeds["xyz".index(node.name)]
        if isinstance(node, Neg):
            return -walk(node.operand)
        if isinstance(node, BinOp):
            left = walk(node.left)
            right = walk(node.right)
            if node.op == "+":
                return left + right
            if node.op == "-":
                return left - right
            if node.op == "*":
                return left * right
            return left / right
        if isinstance(node, Pow):
            return _ipow(walk(node.base), node.exponent)
        if isinstance(node, Call):
            return _FUNCS[node.func](walk(node.arg))
        raise TypeError(f"not an expression node: {node!r}")

    return walk(expr)


def hessian_matrix(hess6: tuple[float, ...]) -> tuple[tuple[float, float, float], ...]:
    """Expand packed second partials into a symmetric row-major 3x3."""
    xx, xy, xz, yy, yz, zz = hess6
    return ((xx, xy, xz), (xy, yy, yz), (xz, yz, zz))
