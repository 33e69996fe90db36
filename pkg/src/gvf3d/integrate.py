"""Fixed-step RK4 and adaptive Dormand-Prince RK45 on tuple states.

Hand-rolled rather than delegated so that runs are bit-reproducible, events
can be checked at every accepted step, and the steppers work on the plain
float tuples used by the field cores.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

__all__ = ["IntegratorConfig", "rk4_step", "rk45_step"]

State = tuple[float, ...]
Rhs = Callable[[float, State], State]


@dataclass(frozen=True)
class IntegratorConfig:
    """Time-stepping configuration.

    ``method`` is ``"rk4"`` (fixed step ``dt``) or ``"rk45"`` (adaptive,
    ``atol``/``rtol`` error control, ``dt`` as the initial trial step).
    """

    method: str = "rk4"
    dt: float = 1e-3
    atol: float = 1e-9
    rtol: float = 1e-9
    min_step: float = 1e-12
    max_step: float = 0.25

    def __post_init__(self):
        if self.method not in ("rk4", "rk45"):
            raise ValueError(f"unknown integrator method {self.method!r}")
        if self.dt <= 0.0:
            raise ValueError("dt must be positive")
        if self.atol <= 0.0 or self.rtol <= 0.0:
            raise ValueError("tolerances must be positive")


def rk4_step(f: Rhs, t: float, y: State, dt: float) -> State:
    """One classical Runge-Kutta step."""
    k1 = f(t, y)
    half = 0.5 * dt
    y2 = tuple(yi + half * ki for yi, ki in zip(y, k1))
    k2 = f(t + half, y2)
    y3 = tuple(yi + half * ki for yi, ki in zip(y, k2))
    k3 = f(t + half, y3)
    y4 = tuple(yi + dt * ki for yi, ki in zip(y, k3))
    k4 = f(t + dt, y4)
    sixth = dt / 6.0
    return tuple(yi + sixth * (a + 2.0 * (b + c) + d)
                 for yi, a, b, c, d in zip(y, k1, k2, k3, k4))


# Dormand-Prince 5(4) tableau.
_DP_C = (0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0)
_DP_A = (
    (),
    (1.0 / 5.0,),
    (3.0 / 40.0, 9.0 / 40.0),
    (44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0),
    (19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0),
    (9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0,
     -5103.0 / 18656.0),
    (35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0,
     11.0 / 84.0),
)
_DP_B5 = (35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0,
          -2187.0 / 6784.0, 11.0 / 84.0, 0.0)
_DP_B4 = (5179.0 / 57600.0, 0.0, 7571.0 / 16695.0, 393.0 / 640.0,
          -92097.0 / 339200.0, 187.0 / 2100.0, 1.0 / 40.0)


def rk45_step(f: Rhs, t: float, y: State, dt: float
              ) -> tuple[State, float]:
    """One Dormand-Prince step; returns (y5, max componentwise error)."""
    ks: list[State] = [f(t, y)]
    for stage in range(1, 7):
        coeffs = _DP_A[stage]
        y_stage = tuple(
            yi + dt * sum(a * ks[m][i] for m, a in enumerate(coeffs))
            for i, yi in enumerate(y))
        ks.append(f(t + _DP_C[stage] * dt, y_stage))
    y5 = tuple(yi + dt * sum(b * ks[m][i] for m, b in enumerate(_DP_B5))
               for i, yi in enumerate(y))
    y4 = tuple(yi + dt * sum(b * ks[m][i] for m, b in enumerate(_DP_B4))
               for i, yi in enumerate(y))
    err = max(abs(a - b) for a, b in zip(y5, y4))
    return y5, err


def rk45_error_target(y: Sequence[float], y_new: Sequence[float],
                      atol: float, rtol: float) -> float:
    return atol + rtol * max(max(abs(v) for v in y),
                             max(abs(v) for v in y_new))
