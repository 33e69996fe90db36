"""The four dynamical systems built on the guiding field.

* raw flow          dxi/dt = chi(xi)
* normalized flow   dxi/dt = chi(xi)/|chi(xi)|        (unit speed, off C)
* perturbed flow    dxi/dt = chi(xi) + d(t)
* fixed-wing loop   planar kinematics + first-order altitude/yaw/airspeed
                    lags, closed with the guiding-field controller

All integrations record per-sample field summaries (e, V, |NKe|) and emit
typed events (singular-set approach, domain exit, planar degeneracy, step
underflow, completion) instead of propagating NaNs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from typing import Callable, NamedTuple, Optional, Sequence

import numpy as np

from .field import (FieldParams, SINGULAR_EPS_SCALE, _chi_core,
                    _chi_jacobian_core, _eps_singular, _eval_pair,
                    _planar_jacobian_core)
from .integrate import IntegratorConfig, rk4_step, rk45_step
from .paths import ImplicitPath, Vec3

__all__ = [
    "Disturbance",
    "TrajectoryEvent",
    "Trajectory",
    "AircraftState",
    "AircraftParams",
    "Controls",
    "PlanarDegeneracyError",
    "aircraft_controller",
    "integrate_flow",
    "integrate_normalized_flow",
    "integrate_perturbed_flow",
    "integrate_aircraft",
    "read_trajectory_csv",
    "wrap_angle",
]

#: Default |chi| thresholds for declaring singular-set approach.  The
#: normalized flow reaches the singular set in finite time and must stop
#: well before the division blows up; the raw flow only creeps in
#: asymptotically, so it may run much closer.
RAW_FLOW_STOP = 1e-10
NORMALIZED_FLOW_STOP = 1e-6

_TWO_PI = 2.0 * math.pi


def wrap_angle(angle: float) -> float:
    """Wrap an angle into (-pi, pi]."""
    wrapped = math.remainder(angle, _TWO_PI)
    if wrapped <= -math.pi:
        wrapped += _TWO_PI
    return wrapped


class PlanarDegeneracyError(ValueError):
    """The planar field projection vanishes: no heading can be commanded."""


# ---------------------------------------------------------------------------
# Disturbances

@dataclass(frozen=True)
class Disturbance:
    """Piecewise-continuous bounded disturbance d(t).

    Construct through :meth:`zero`, :meth:`constant`, :meth:`sinusoid` or
    :meth:`decaying`; call the instance to evaluate.
    """

    kind: str
    vector: Vec3 = (0.0, 0.0, 0.0)
    amplitude: Vec3 = (0.0, 0.0, 0.0)
    frequency: Vec3 = (0.0, 0.0, 0.0)
    phase: Vec3 = (0.0, 0.0, 0.0)
    rate: float = 0.0

    @classmethod
    def zero(cls) -> "Disturbance":
        return cls("zero")

    @classmethod
    def constant(cls, vector) -> "Disturbance":
        return cls("constant", vector=_vec3(vector))

    @classmethod
    def sinusoid(cls, amplitude, frequency, phase=(0.0, 0.0, 0.0)
                 ) -> "Disturbance":
        return cls("sinusoid", amplitude=_vec3(amplitude),
                   frequency=_vec3(frequency), phase=_vec3(phase))

    @classmethod
    def decaying(cls, d0, rate: float) -> "Disturbance":
        if rate <= 0.0:
            raise ValueError("decay rate must be positive")
        return cls("decaying", vector=_vec3(d0), rate=float(rate))

    def __call__(self, t: float) -> Vec3:
        if self.kind == "zero":
            return (0.0, 0.0, 0.0)
        if self.kind == "constant":
            return self.vector
        if self.kind == "decaying":
            decay = math.exp(-self.rate * t)
            return (self.vector[0] * decay, self.vector[1] * decay,
                    self.vector[2] * decay)
        a, f, p = self.amplitude, self.frequency, self.phase
        return (a[0] * math.sin(_TWO_PI * f[0] * t + p[0]),
                a[1] * math.sin(_TWO_PI * f[1] * t + p[1]),
                a[2] * math.sin(_TWO_PI * f[2] * t + p[2]))

    def norm_bound(self) -> float:
        """Upper bound on sup_t |d(t)| (tight except for the sinusoid)."""
        if self.kind == "zero":
            return 0.0
        if self.kind in ("constant", "decaying"):
            return math.sqrt(sum(v * v for v in self.vector))
        return math.sqrt(sum(a * a for a in self.amplitude))


def _vec3(value) -> Vec3:
    x, y, z = value
    return (float(x), float(y), float(z))


# ---------------------------------------------------------------------------
# Trajectories

@dataclass(frozen=True)
class TrajectoryEvent:
    kind: str            # singular_approach | domain_exit | planar_degeneracy
    time: float          # | step_underflow | beta_unstable_equilibrium
    state: Optional[tuple] = None  # | completed
    detail: str = ""


@dataclass
class Trajectory:
    """Time-stamped run of one of the four systems with field summaries."""

    kind: str                     # raw | normalized | perturbed | aircraft
    times: np.ndarray
    states: np.ndarray            # (n, 3) flows, (n, 5) aircraft
    errors: np.ndarray            # (n, 2)
    error_norms: np.ndarray
    lyapunov: np.ndarray
    nke_norms: np.ndarray
    events: list[TrajectoryEvent] = dc_field(default_factory=list)
    beta: Optional[np.ndarray] = None

    def __post_init__(self):
        if len(self.times) and np.any(np.diff(self.times) <= 0.0):
            raise ValueError("trajectory time stamps must strictly increase")
        if any(b.time < a.time for a, b in zip(self.events, self.events[1:])):
            raise ValueError("trajectory events must be time-ordered")

    @property
    def completed(self) -> bool:
        return any(ev.kind == "completed" for ev in self.events)

    @property
    def state_columns(self) -> tuple[str, ...]:
        if self.states.shape[1] == 5:
            return ("x", "y", "z", "theta", "s")
        return ("x", "y", "z")

    @property
    def columns(self) -> tuple[str, ...]:
        cols = ("t",) + self.state_columns + ("e1", "e2", "e_norm", "V",
                                              "nke_norm")
        if self.beta is not None:
            cols += ("beta",)
        return cols

    def positions(self) -> np.ndarray:
        return self.states[:, :3]

    def arc_length(self) -> float:
        steps = np.diff(self.positions(), axis=0)
        return float(np.sum(np.sqrt(np.sum(steps * steps, axis=1))))

    @property
    def final_error(self) -> float:
        return float(self.error_norms[-1])

    def table(self) -> np.ndarray:
        parts = [self.times[:, None], self.states, self.errors,
                 self.error_norms[:, None], self.lyapunov[:, None],
                 self.nke_norms[:, None]]
        if self.beta is not None:
            parts.append(self.beta[:, None])
        return np.hstack(parts)

    def write_csv(self, path) -> None:
        """One row per sample; %.17g floats so repeated runs are
        byte-identical."""
        table = self.table()
        with open(path, "w", newline="") as handle:
            handle.write(",".join(self.columns) + "\n")
            for row in table:
                handle.write(",".join(f"{v:.17g}" for v in row) + "\n")


def read_trajectory_csv(path) -> Trajectory:
    """Load a trajectory written by :meth:`Trajectory.write_csv`."""
    with open(path, "r", newline="") as handle:
        header = handle.readline().strip()
        body = handle.read()
    if not header or not body.strip():
        raise ValueError(f"{path}: no samples")
    columns = header.split(",")
    data = np.array([[float(cell) for cell in line.split(",")]
                     for line in body.splitlines() if line.strip()])
    col = {name: i for i, name in enumerate(columns)}
    has_beta = "beta" in col
    state_names = ("x", "y", "z", "theta", "s") if "theta" in col else \
        ("x", "y", "z")
    states = np.column_stack([data[:, col[name]] for name in state_names])
    return Trajectory(
        kind="aircraft" if has_beta else "raw",
        times=data[:, col["t"]],
        states=states,
        errors=np.column_stack([data[:, col["e1"]], data[:, col["e2"]]]),
        error_norms=data[:, col["e_norm"]],
        lyapunov=data[:, col["V"]],
        nke_norms=data[:, col["nke_norm"]],
        beta=data[:, col["beta"]] if has_beta else None,
    )


# ---------------------------------------------------------------------------
# Aircraft model

@dataclass(frozen=True)
class AircraftState:
    """Kinematic state (position, yaw, airspeed); theta kept in (-pi, pi]."""

    x: float
    y: float
    z: float
    theta: float
    s: float

    def __post_init__(self):
        if self.s < 0.0:
            raise ValueError("airspeed must be non-negative")
        object.__setattr__(self, "theta", wrap_angle(float(self.theta)))

    def as_tuple(self) -> tuple[float, float, float, float, float]:
        return (self.x, self.y, self.z, self.theta, self.s)


@dataclass(frozen=True)
class AircraftParams:
    """First-order lag time constants, heading gain and cruise speed."""

    tau_z: float = 1.0
    tau_theta: float = 1.0
    tau_s: float = 1.0
    k_theta: float = 1.0
    s_star: float = 1.0

    def __post_init__(self):
        for name in ("tau_z", "tau_theta", "tau_s", "k_theta", "s_star"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be strictly positive")


class Controls(NamedTuple):
    theta_u: float
    z_u: float
    s_u: float


class _AbortRun(Exception):
    def __init__(self, kind: str, detail: str = ""):
        self.kind = kind
        self.detail = detail
        super().__init__(kind)


def _planar_eps(chi_norm: float) -> float:
    # Same scale-aware spirit as eps_singular: the planar projection is
    # treated as vanished when it is lost in rounding relative to |chi|.
    return SINGULAR_EPS_SCALE * (1.0 + chi_norm)


def _controller_core(path: ImplicitPath, params: FieldParams,
                     acp: AircraftParams, x: float, y: float, z: float,
                     theta: float, s: float):
    """Shared by the public controller and the closed-loop right-hand side.

    Returns (xdot, ydot, zdot, theta_dot_d, sin_beta, chi, chi_norm,
    planar_norm).
    """
    pair = _eval_pair(path, x, y, z)
    if pair is None:
        raise _AbortRun("domain_exit")
    v1, g1, h1, v2, g2, h2 = pair
    k1, k2 = params.k1, params.k2
    tau, nke, chi = _chi_core(k1, k2, v1, v2, g1, g2)
    tau_norm = math.sqrt(tau[0] ** 2 + tau[1] ** 2 + tau[2] ** 2)
    nke_norm = math.sqrt(nke[0] ** 2 + nke[1] ** 2 + nke[2] ** 2)
    chi_norm = math.sqrt(chi[0] ** 2 + chi[1] ** 2 + chi[2] ** 2)
    if chi_norm <= _eps_singular(tau_norm, nke_norm):
        raise _AbortRun("singular_approach", "controller at singular point")
    planar = math.hypot(chi[0], chi[1])
    if planar <= _planar_eps(chi_norm):
        raise _AbortRun("planar_degeneracy", "field is vertical")

    hx, hy = math.cos(theta), math.sin(theta)
    xdot = s * hx
    ydot = s * hy
    # Altitude rate from the model equation with the current command, so the
    # controller stays causal: zdot = (z_u - z)/tau_z = s chi_3 / |chi^p|.
    zdot = s * chi[2] / planar

    jac = _chi_jacobian_core(k1, k2, v1, v2, g1, g2, h1, h2)
    jp0, jp1 = _planar_jacobian_core(chi, chi_norm, jac)
    px, py = chi[0] / planar, chi[1] / planar
    planar_unit_norm = planar / chi_norm  # |(chi_hat_1, chi_hat_2)|
    # theta_dot_d = -(1/|chi^p|) chi_hat^p' E J(chi^p) xi_dot
    m0 = py * jp0[0] - px * jp1[0]
    m1 = py * jp0[1] - px * jp1[1]
    m2 = py * jp0[2] - px * jp1[2]
    theta_dot_d = -(m0 * xdot + m1 * ydot + m2 * zdot) / planar_unit_norm
    sin_beta = hy * px - hx * py
    return xdot, ydot, zdot, theta_dot_d, sin_beta, chi, chi_norm, planar


def aircraft_controller(state: AircraftState, path: ImplicitPath,
                        params: FieldParams,
                        acparams: AircraftParams) -> Controls:
    """Heading, altitude and airspeed commands for the current state.

    Raises :class:`PlanarDegeneracyError` where the planar field projection
    vanishes and :class:`~gvf3d.field.SingularFieldError`-style failure as
    a ValueError at singular points.
    """
    try:
        (_, _, _, theta_dot_d, sin_beta, chi, _, planar) = _controller_core(
            path, params, acparams, state.x, state.y, state.z, state.theta,
            state.s)
    except _AbortRun as sig:
        if sig.kind == "planar_degeneracy":
            raise PlanarDegeneracyError(sig.detail) from None
        raise ValueError(f"controller undefined: {sig.kind}") from None
    theta_u = acparams.tau_theta * (theta_dot_d
                                    - acparams.k_theta * sin_beta) + state.theta
    z_u = state.z + acparams.tau_z * state.s * chi[2] / planar
    return Controls(theta_u, z_u, acparams.s_star)


# ---------------------------------------------------------------------------
# Probe: per-sample summaries shared by every system

class _Probe(NamedTuple):
    fail: Optional[str]
    e1: float
    e2: float
    e_norm: float
    V: float
    nke_norm: float
    chi: Vec3
    chi_norm: float
    beta: Optional[float]


_FAILED = _Probe("domain_exit", math.nan, math.nan, math.nan, math.nan,
                 math.nan, (math.nan, math.nan, math.nan), math.nan, None)


def _probe_factory(path: ImplicitPath, params: FieldParams,
                   aircraft: bool) -> Callable[[float, tuple], _Probe]:
    k1, k2 = params.k1, params.k2

    def probe(t: float, y: tuple) -> _Probe:
        pair = _eval_pair(path, y[0], y[1], y[2])
        if pair is None:
            return _FAILED
        v1, g1, _, v2, g2, _ = pair
        _, nke, chi = _chi_core(k1, k2, v1, v2, g1, g2)
        chi_norm = math.sqrt(chi[0] ** 2 + chi[1] ** 2 + chi[2] ** 2)
        nke_norm = math.sqrt(nke[0] ** 2 + nke[1] ** 2 + nke[2] ** 2)
        beta = None
        if aircraft:
            planar = math.hypot(chi[0], chi[1])
            if planar <= _planar_eps(chi_norm):
                return _Probe("planar_degeneracy", v1, v2, math.hypot(v1, v2),
                              0.5 * (k1 * v1 * v1 + k2 * v2 * v2), nke_norm,
                              chi, chi_norm, None)
            theta = y[3]
            px, py = chi[0] / planar, chi[1] / planar
            hx, hy = math.cos(theta), math.sin(theta)
            beta = math.atan2(px * hy - py * hx, px * hx + py * hy)
        return _Probe(None, v1, v2, math.hypot(v1, v2),
                      0.5 * (k1 * v1 * v1 + k2 * v2 * v2), nke_norm, chi,
                      chi_norm, beta)

    return probe


# ---------------------------------------------------------------------------
# Driving loop

def _drive(rhs, probe, y0: tuple, t_end: float, config: IntegratorConfig,
           kind: str, eps_stop: Optional[float] = None,
           reversal_mode: Optional[str] = None,  # None | "flip" | "unit"
           warn_events: Sequence[TrajectoryEvent] = (),
           wrap_index: Optional[int] = None) -> Trajectory:
    if not (t_end > 0.0):
        raise ValueError("t_end must be positive")
    y = tuple(float(v) for v in y0)
    if not all(math.isfinite(v) for v in y):
        raise ValueError("initial state must be finite")

    track_beta = kind == "aircraft"
    p = probe(0.0, y)
    if p.fail is not None:
        raise ValueError(f"initial state rejected: {p.fail}")

    times = [0.0]
    states = [y]
    e1s = [p.e1]
    e2s = [p.e2]
    e_norms = [p.e_norm]
    vs = [p.V]
    nkes = [p.nke_norm]
    betas = [p.beta] if track_beta else None
    events: list[TrajectoryEvent] = list(warn_events)
    beta_prev = p.beta

    def step(t: float, state: tuple, dt: float) -> tuple:
        if config.method == "rk4":
            return rk4_step(rhs, t, state, dt)
        return rk45_step(rhs, t, state, dt)[0]

    t = 0.0
    dt_next = config.dt
    finished = False
    # Slack absorbs accumulated time rounding so the last regular step is
    # not followed by a ~1e-12 stub step.
    t_slack = max(1e-12, 1e-12 * t_end)
    while t < t_end - t_slack:
        if eps_stop is not None and p.chi_norm < eps_stop:
            events.append(TrajectoryEvent("singular_approach", t, y,
                                          f"|chi|={p.chi_norm:.3e}"))
            finished = True
            break
        dt = min(dt_next, t_end - t)
        try:
            if config.method == "rk4":
                y_new = rk4_step(rhs, t, y, dt)
                dt_used = dt
            else:
                dt = min(dt, config.max_step)
                while True:
                    y_try, err = rk45_step(rhs, t, y, dt)
                    scale = config.atol + config.rtol * max(
                        max(abs(v) for v in y), max(abs(v) for v in y_try))
                    if err <= scale:
                        y_new = y_try
                        dt_used = dt
                        if err == 0.0:
                            dt_next = min(dt * 5.0, config.max_step)
                        else:
                            dt_next = min(
                                dt * min(5.0, 0.9 * (scale / err) ** 0.2),
                                config.max_step)
                        break
                    dt *= max(0.1, 0.9 * (scale / err) ** 0.2)
                    if dt < config.min_step:
                        raise _AbortRun("step_underflow",
                                        "error control drove dt below floor")
            if wrap_index is not None:
                y_new = (y_new[:wrap_index]
                         + (wrap_angle(y_new[wrap_index]),)
                         + y_new[wrap_index + 1:])
            p_new = probe(t + dt_used, y_new)
            if p_new.fail is not None:
                raise _AbortRun(p_new.fail, "probe failed after step")
            if reversal_mode is not None and p_new.chi_norm >= eps_stop and \
                    (_dot3(p.chi, p_new.chi) <= 0.0
                     or (reversal_mode == "unit"
                         and _step_length(y, y_new) < 0.9 * dt_used)):
                # The step straddled the singular set: either the field
                # direction flipped, or (unit-speed flow) the stages
                # cancelled and the step stalled.  Shrink until the step
                # stays on one side (or enters the stop ball).
                dt_used, y_new, p_new = _refine_reversal(
                    step, probe, t, y, p, dt_used, eps_stop, config.min_step,
                    unit_speed=reversal_mode == "unit")
        except _AbortRun as sig:
            events.append(TrajectoryEvent(sig.kind, t, y, sig.detail))
            finished = True
            break
        t += dt_used
        y = y_new
        p = p_new
        times.append(t)
        states.append(y)
        e1s.append(p.e1)
        e2s.append(p.e2)
        e_norms.append(p.e_norm)
        vs.append(p.V)
        nkes.append(p.nke_norm)
        if track_beta:
            # Continuous beta series: wrap the increment, not the value.
            beta_cont = betas[-1] + wrap_angle(p.beta - beta_prev)
            beta_prev = p.beta
            betas.append(beta_cont)

    if not finished:
        events.append(TrajectoryEvent("completed", t, y))

    return Trajectory(
        kind=kind,
        times=np.asarray(times),
        states=np.asarray(states),
        errors=np.column_stack([e1s, e2s]),
        error_norms=np.asarray(e_norms),
        lyapunov=np.asarray(vs),
        nke_norms=np.asarray(nkes),
        events=events,
        beta=np.asarray(betas) if track_beta else None,
    )


def _dot3(a: Vec3, b: Vec3) -> float:
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]


def _step_length(a: tuple, b: tuple) -> float:
    return math.sqrt((b[0] - a[0]) ** 2 + (b[1] - a[1]) ** 2
                     + (b[2] - a[2]) ** 2)


def _refine_reversal(step, probe, t, y, p, dt, eps_stop, min_step,
                     unit_speed):
    while True:
        dt *= 0.5
        if dt < min_step:
            raise _AbortRun("step_underflow",
                            "reversal refinement drove dt below floor")
        y_try = step(t, y, dt)
        p_try = probe(t + dt, y_try)
        if p_try.fail is not None:
            raise _AbortRun(p_try.fail, "probe failed during refinement")
        if p_try.chi_norm < eps_stop:
            return dt, y_try, p_try
        if _dot3(p.chi, p_try.chi) > 0.0 and \
                (not unit_speed or _step_length(y, y_try) >= 0.9 * dt):
            return dt, y_try, p_try


# ---------------------------------------------------------------------------
# Public integration operations

def integrate_flow(path: ImplicitPath, params: FieldParams, xi0,
                   integrator: IntegratorConfig = IntegratorConfig(),
                   t_end: float = 60.0,
                   eps_stop: float = RAW_FLOW_STOP) -> Trajectory:
    """Integrate the raw flow dxi/dt = chi(xi)."""
    k1, k2 = params.k1, params.k2

    def rhs(t: float, y: tuple) -> Vec3:
        pair = _eval_pair(path, y[0], y[1], y[2])
        if pair is None:
            raise _AbortRun("domain_exit")
        v1, g1, _, v2, g2, _ = pair
        return _chi_core(k1, k2, v1, v2, g1, g2)[2]

    # Note on singular halts: the run stops once |chi| < eps_stop at a
    # sample, which requires the integrator to resolve the approach that
    # far; with rk45 that means atol well below eps_stop (the fixed-step
    # default has no such floor).
    probe = _probe_factory(path, params, aircraft=False)
    return _drive(rhs, probe, tuple(map(float, xi0)), t_end, integrator,
                  kind="raw", eps_stop=eps_stop, reversal_mode="flip")


def integrate_normalized_flow(path: ImplicitPath, params: FieldParams, xi0,
                              integrator: IntegratorConfig = IntegratorConfig(),
                              t_end: float = 60.0,
                              eps_stop: float = NORMALIZED_FLOW_STOP
                              ) -> Trajectory:
    """Integrate the unit-speed flow dxi/dt = chi/|chi|.

    Trajectories heading for the singular set arrive in finite time; the
    run halts with a ``singular_approach`` event before the division blows
    up, shrinking the final steps so the stop ball is actually entered.
    """
    k1, k2 = params.k1, params.k2

    def rhs(t: float, y: tuple) -> Vec3:
        pair = _eval_pair(path, y[0], y[1], y[2])
        if pair is None:
            raise _AbortRun("domain_exit")
        v1, g1, _, v2, g2, _ = pair
        chi = _chi_core(k1, k2, v1, v2, g1, g2)[2]
        norm = math.sqrt(chi[0] ** 2 + chi[1] ** 2 + chi[2] ** 2)
        if norm == 0.0:
            raise _AbortRun("singular_approach", "chi vanished at a stage")
        return (chi[0] / norm, chi[1] / norm, chi[2] / norm)

    probe = _probe_factory(path, params, aircraft=False)
    start = probe(0.0, tuple(map(float, xi0)))
    if start.fail is None and start.chi_norm <= eps_stop:
        raise ValueError("initial point is inside the singular stop ball")
    return _drive(rhs, probe, tuple(map(float, xi0)), t_end, integrator,
                  kind="normalized", eps_stop=eps_stop, reversal_mode="unit")


def integrate_perturbed_flow(path: ImplicitPath, params: FieldParams, xi0,
                             d: Disturbance,
                             integrator: IntegratorConfig = IntegratorConfig(),
                             t_end: float = 60.0,
                             eps_stop: float = RAW_FLOW_STOP) -> Trajectory:
    """Integrate dxi/dt = chi(xi) + d(t) and record the error series."""
    k1, k2 = params.k1, params.k2

    def rhs(t: float, y: tuple) -> Vec3:
        pair = _eval_pair(path, y[0], y[1], y[2])
        if pair is None:
            raise _AbortRun("domain_exit")
        v1, g1, _, v2, g2, _ = pair
        chi = _chi_core(k1, k2, v1, v2, g1, g2)[2]
        dx, dy, dz = d(t)
        return (chi[0] + dx, chi[1] + dy, chi[2] + dz)

    probe = _probe_factory(path, params, aircraft=False)
    return _drive(rhs, probe, tuple(map(float, xi0)), t_end, integrator,
                  kind="perturbed", eps_stop=eps_stop)


def integrate_aircraft(path: ImplicitPath, params: FieldParams,
                       acparams: AircraftParams, state0: AircraftState,
                       integrator: IntegratorConfig = IntegratorConfig(),
                       t_end: float = 60.0) -> Trajectory:
    """Integrate the closed-loop fixed-wing model under the field controller.

    The signed angle beta from the planar field direction to the heading is
    recorded each sample (continuous, increments wrapped).  Starting with
    beta = pi exactly is allowed but flagged: it is the unstable equilibrium
    of beta' = -k_theta sin(beta).
    """
    if not isinstance(state0, AircraftState):
        state0 = AircraftState(*state0)

    def rhs(t: float, y: tuple) -> tuple:
        x, yy, z, theta, s = y
        (xdot, ydot, zdot, theta_dot_d, sin_beta, _, _, _) = _controller_core(
            path, params, acparams, x, yy, z, theta, s)
        theta_dot = theta_dot_d - acparams.k_theta * sin_beta
        sdot = (acparams.s_star - s) / acparams.tau_s
        return (xdot, ydot, zdot, theta_dot, sdot)

    probe = _probe_factory(path, params, aircraft=True)
    y0 = state0.as_tuple()
    warn: list[TrajectoryEvent] = []
    start = probe(0.0, y0)
    if start.fail is None and start.beta is not None \
            and abs(abs(start.beta) - math.pi) < 1e-9:
        warn.append(TrajectoryEvent(
            "beta_unstable_equilibrium", 0.0, y0,
            "beta(0) = pi is an unstable equilibrium of the heading error"))
    return _drive(rhs, probe, y0, t_end, integrator, kind="aircraft",
                  warn_events=warn, wrap_index=3)
