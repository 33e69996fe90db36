"""Desired paths as intersections of two implicit surfaces.

A path is the common zero set of two twice-differentiable scalar fields.
Each :class:`ScalarField` exposes a raw tuple-based evaluator used by the
integration hot loops plus a numpy-facing :meth:`ScalarField.evaluate` for
everything else.  Built-in paths carry hand-differentiated gradients and
Hessians; arbitrary surfaces come from the expression language compiled
through forward-mode AD.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Literal, Optional

import numpy as np

from .autodiff import ADDomainError, evaluate_dual, hessian_matrix
from .expressions import Expression, format_expression, parse_expression

__all__ = [
    "FieldValue",
    "ScalarField",
    "ImplicitPath",
    "compile_field",
    "path_from_expressions",
    "builtin_cylinder_intersection",
    "builtin_helix",
]

Vec3 = tuple[float, float, float]
Mat3 = tuple[Vec3, Vec3, Vec3]
# eval_raw signature: (x, y, z) -> (value, gradient, hessian, domain_ok)
RawEval = tuple[float, Vec3, Mat3, bool]

_NAN = float("nan")
_NAN3: Vec3 = (_NAN, _NAN, _NAN)
_NAN33: Mat3 = (_NAN3, _NAN3, _NAN3)
_ZERO33: Mat3 = ((0.0, 0.0, 0.0), (0.0, 0.0, 0.0), (0.0, 0.0, 0.0))

BoundednessHint = Literal["bounded", "unbounded", "unknown"]


@dataclass(frozen=True)
class FieldValue:
    """Value, gradient and Hessian of a scalar field at one point."""

    value: float
    gradient: np.ndarray
    hessian: np.ndarray
    domain_ok: bool = True


@dataclass(frozen=True)
class ScalarField:
    """Twice continuously differentiable scalar field on R^3.

    ``eval_raw`` returns ``(value, gradient, hessian, domain_ok)`` with
    tuples instead of arrays; it is the form consumed by the ODE right-hand
    sides.  When ``domain_ok`` is false the numeric entries are NaN.
    """

    name: str
    eval_raw: Callable[[float, float, float], RawEval]

    def evaluate(self, xi) -> FieldValue:
        x, y, z = float(xi[0]), float(xi[1]), float(xi[2])
        value, grad, hess, ok = self.eval_raw(x, y, z)
        return FieldValue(value, np.asarray(grad, dtype=float),
                          np.asarray(hess, dtype=float), ok)

    def value(self, xi) -> float:
        return self.eval_raw(float(xi[0]), float(xi[1]), float(xi[2]))[0]

    def gradient(self, xi) -> np.ndarray:
        return self.evaluate(xi).gradient

    def hessian(self, xi) -> np.ndarray:
        return self.evaluate(xi).hessian


@dataclass(frozen=True)
class ImplicitPath:
    """Desired path {xi : phi1(xi) = 0, phi2(xi) = 0}.

    ``parametrization``, when available, maps a scalar parameter to a point
    on the path and exists purely for testing and sampled diagnostics; the
    field construction itself never uses it.  Nonemptiness, connectedness
    and one-dimensionality of the zero set are asserted by the caller, not
    verified here; the sampling probes in :mod:`gvf3d.analysis` can only
    falsify those properties.
    """

    phi1: ScalarField
    phi2: ScalarField
    boundedness_hint: BoundednessHint = "unknown"
    parametrization: Optional[Callable[[float], Vec3]] = None
    parameter_span: tuple[float, float] = (0.0, 1.0)
    periodic: bool = False
    name: str = ""

    def path_points(self, n: int = 4096) -> np.ndarray:
        """Sample ``n`` points from the analytic parametrization."""
        if self.parametrization is None:
            raise ValueError(f"path {self.name!r} has no parametrization")
        lo, hi = self.parameter_span
        params = np.linspace(lo, hi, n, endpoint=not self.periodic)
        return np.array([self.parametrization(float(u)) for u in params])


# ---------------------------------------------------------------------------
# Expression-backed fields

def compile_field(expr: Expression, name: str = "") -> ScalarField:
    """Compile an expression into a field differentiated by forward AD."""

    def eval_raw(x: float, y: float, z: float) -> RawEval:
        try:
            jet = evaluate_dual(expr, x, y, z)
        except ADDomainError:
            return (_NAN, _NAN3, _NAN33, False)
        return (jet.val, jet.grad, hessian_matrix(jet.hess), True)

    return ScalarField(name or format_expression(expr), eval_raw)


def path_from_expressions(phi1_source: str, phi2_source: str,
                          boundedness_hint: BoundednessHint = "unknown",
                          name: str = "") -> ImplicitPath:
    """Build a path from two expression strings (no parametrization)."""
    phi1 = compile_field(parse_expression(phi1_source))
    phi2 = compile_field(parse_expression(phi2_source))
    return ImplicitPath(phi1, phi2, boundedness_hint=boundedness_hint,
                        name=name or f"{phi1_source} & {phi2_source}")


# ---------------------------------------------------------------------------
# Built-in paths

def builtin_cylinder_intersection(a: float, b: float, R: float,
                                  r: float) -> ImplicitPath:
    """Intersection of two cylinders: phi1 = (x-a)^2 + (z-b)^2 - r^2 and
    phi2 = y^2 + z^2 - R^2.  Bounded closed curve for transversal parameter
    choices."""
    if R <= 0.0 or r <= 0.0:
        raise ValueError("cylinder radii must be positive")
    a, b, R, r = float(a), float(b), float(R), float(r)

    h1: Mat3 = ((2.0, 0.0, 0.0), (0.0, 0.0, 0.0), (0.0, 0.0, 2.0))
    h2: Mat3 = ((0.0, 0.0, 0.0), (0.0, 2.0, 0.0), (0.0, 0.0, 2.0))

    def phi1_raw(x: float, y: float, z: float) -> RawEval:
        dx = x - a
        dz = z - b
        return (dx * dx + dz * dz - r * r, (2.0 * dx, 0.0, 2.0 * dz), h1, True)

    def phi2_raw(x: float, y: float, z: float) -> RawEval:
        return (y * y + z * z - R * R, (0.0, 2.0 * y, 2.0 * z), h2, True)

    parametrization = _cylinder_loop_parametrization(a, b, R, r)
    return ImplicitPath(
        ScalarField("(x-a)^2+(z-b)^2-r^2", phi1_raw),
        ScalarField("y^2+z^2-R^2", phi2_raw),
        boundedness_hint="bounded",
        parametrization=parametrization,
        parameter_span=(0.0, 1.0),
        periodic=True,
        name=f"cylinder-intersection(a={a:g}, b={b:g}, R={R:g}, r={r:g})",
    )


def _cylinder_loop_parametrization(a: float, b: float, R: float,
                                   r: float) -> Optional[Callable[[float], Vec3]]:
    # Single closed loop iff the first cylinder's circle in the x-z plane
    # crosses the band |z| <= R exactly once: top above the band, bottom
    # inside it.  Outside that regime the zero set is empty, a pair of
    # loops, or tangent, and no parametrization is offered.
    s_cut = (R - b) / r
    if not (-1.0 < s_cut < 1.0) or (b - r) <= -R:
        return None
    alpha_lo = math.pi - math.asin(s_cut)
    alpha_hi = 2.0 * math.pi + math.asin(s_cut)

    def parametrize(u: float) -> Vec3:
        u = u % 1.0
        if u < 0.5:
            alpha = alpha_lo + (u / 0.5) * (alpha_hi - alpha_lo)
            sign = 1.0
        else:
            alpha = alpha_hi - ((u - 0.5) / 0.5) * (alpha_hi - alpha_lo)
            sign = -1.0
        x = a + r * math.cos(alpha)
        z = b + r * math.sin(alpha)
        y = sign * math.sqrt(max(R * R - z * z, 0.0))
        return (x, y, z)

    return parametrize


def builtin_helix() -> ImplicitPath:
    """Unit helix: phi1 = x - cos(z), phi2 = y - sin(z)."""

    def phi1_raw(x: float, y: float, z: float) -> RawEval:
        s, c = math.sin(z), math.cos(z)
        return (x - c, (1.0, 0.0, s), ((0.0, 0.0, 0.0), (0.0, 0.0, 0.0),
                                       (0.0, 0.0, c)), True)

    def phi2_raw(x: float, y: float, z: float) -> RawEval:
        s, c = math.sin(z), math.cos(z)
        return (y - s, (0.0, 1.0, -c), ((0.0, 0.0, 0.0), (0.0, 0.0, 0.0),
                                        (0.0, 0.0, s)), True)

    def parametrize(t: float) -> Vec3:
        return (math.cos(t), math.sin(t), t)

    return ImplicitPath(
        ScalarField("x-cos(z)", phi1_raw),
        ScalarField("y-sin(z)", phi2_raw),
        boundedness_hint="unbounded",
        parametrization=parametrize,
        parameter_span=(-12.0, 12.0),
        periodic=False,
        name="helix",
    )
