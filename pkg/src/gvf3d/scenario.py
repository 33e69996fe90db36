"""Scenario files: load, validate, serialize, run.

A scenario is a TOML document selecting a desired path (built-in or a pair
of expressions), field gains, one system kind (raw/normalized/perturbed
flow or the aircraft loop), an initial state, an integrator configuration
and output directives.  Runs emit a trajectory CSV, a metadata JSON
(validating against the shipped schema) and optional SVG plots; fixed-step
runs are byte-reproducible.
"""

from __future__ import annotations

import hashlib
import json

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from . import svgplot
from .dynamics import (AircraftParams, AircraftState, Disturbance, Trajectory,
                       integrate_aircraft, integrate_flow,
                       integrate_normalized_flow, integrate_perturbed_flow)
from .expressions import ExpressionError
from .field import FieldParams
from .integrate import IntegratorConfig
from .paths import (ImplicitPath, builtin_cylinder_intersection, builtin_helix,
                    path_from_expressions)

__all__ = [
    "Scenario",
    "PathSpec",
    "ScenarioError",
    "RunArtifactSet",
    "load_scenario",
    "scenario_from_dict",
    "scenario_to_dict",
    "scenario_to_toml",
    "scenario_hash",
    "build_path",
    "run",
    "EXIT_COMPLETED",
    "EXIT_SINGULAR",
    "EXIT_DOMAIN",
    "EXIT_CONFIG",
    "EXIT_INTEGRATION",
]

EXIT_COMPLETED = 0
EXIT_SINGULAR = 2
EXIT_DOMAIN = 3
EXIT_CONFIG = 4
EXIT_INTEGRATION = 5

_SYSTEM_KINDS = ("raw", "normalized", "perturbed", "aircraft")
_OUTPUT_KINDS = ("csv", "metadata", "traj3d", "error")
_BUILTINS = ("cylinder_intersection", "helix")

METADATA_SCHEMA_PATH = Path(__file__).parent / "data" / \
    "run_metadata.schema.json"


class ScenarioError(ValueError):
    """Scenario schema violation; ``where`` names the offending field."""

    def __init__(self, where: str, message: str):
        self.where = where
        super().__init__(f"{where}: {message}")


@dataclass(frozen=True)
class PathSpec:
    """Either a named builtin with parameters or two expression strings."""

    builtin: Optional[str] = None
    params: tuple[tuple[str, float], ...] = ()
    phi1: Optional[str] = None
    phi2: Optional[str] = None

    def __post_init__(self):
        has_builtin = self.builtin is not None
        has_exprs = self.phi1 is not None or self.phi2 is not None
        if has_builtin and has_exprs:
            raise ScenarioError("path", "builtin and expressions are "
                                "mutually exclusive")
        if not has_builtin and not (self.phi1 and self.phi2):
            raise ScenarioError("path", "need a builtin or both phi1/phi2")
        if has_builtin and self.builtin not in _BUILTINS:
            raise ScenarioError("path.builtin",
                                f"unknown builtin {self.builtin!r}; "
                                f"one of {_BUILTINS}")


@dataclass(frozen=True)
class Scenario:
    name: str
    path: PathSpec
    field: FieldParams
    system: str
    initial: tuple[float, ...]
    t_end: float
    integrator: IntegratorConfig
    aircraft: Optional[AircraftParams] = None
    disturbance: Optional[Disturbance] = None
    outputs: tuple[str, ...] = ("csv", "metadata")

    def __post_init__(self):
        if self.system not in _SYSTEM_KINDS:
            raise ScenarioError("system.kind",
                                f"unknown system {self.system!r}")
        want = 5 if self.system == "aircraft" else 3
        if len(self.initial) != want:
            raise ScenarioError(
                "system.initial",
                f"{self.system!r} needs {want} components, "
                f"got {len(self.initial)}")
        if self.system == "aircraft" and self.aircraft is None:
            raise ScenarioError("system.aircraft",
                                "aircraft parameters are required")
        if self.system == "perturbed" and self.disturbance is None:
            raise ScenarioError("system.disturbance",
                                "perturbed flow needs a disturbance")
        if self.t_end <= 0.0:
            raise ScenarioError("t_end", "must be positive")
        for out in self.outputs:
            if out not in _OUTPUT_KINDS:
                raise ScenarioError("output.kinds",
                                    f"unknown output {out!r}")


# ---------------------------------------------------------------------------
# Dict <-> Scenario

def scenario_from_dict(data: dict, name: str = "scenario") -> Scenario:
    data = dict(data)
    name = data.pop("name", name)

    path_tbl = _table(data, "path")
    builtin = path_tbl.pop("builtin", None)
    phi1 = path_tbl.pop("phi1", None)
    phi2 = path_tbl.pop("phi2", None)
    params = tuple(sorted((k, float(v)) for k, v in path_tbl.items()))
    path_spec = PathSpec(builtin=builtin, params=params, phi1=phi1, phi2=phi2)

    field_tbl = _table(data, "field")
    try:
        field = FieldParams(k1=float(field_tbl["k1"]),
                            k2=float(field_tbl["k2"]))
    except KeyError as exc:
        raise ScenarioError("field", f"missing gain {exc.args[0]!r}") from None
    except ValueError as exc:
        raise ScenarioError("field", str(exc)) from None

    system_tbl = _table(data, "system")
    kind = system_tbl.get("kind")
    initial = system_tbl.get("initial")
    if initial is None:
        raise ScenarioError("system.initial", "missing")
    initial = tuple(float(v) for v in initial)

    aircraft = None
    if "aircraft" in system_tbl:
        ac = system_tbl["aircraft"]
        try:
            aircraft = AircraftParams(
                tau_z=float(ac.get("tau_z", 1.0)),
                tau_theta=float(ac.get("tau_theta", 1.0)),
                tau_s=float(ac.get("tau_s", 1.0)),
                k_theta=float(ac.get("k_theta", 1.0)),
                s_star=float(ac.get("s_star", 1.0)))
        except ValueError as exc:
            raise ScenarioError("system.aircraft", str(exc)) from None

    disturbance = None
    if "disturbance" in system_tbl:
        disturbance = _disturbance_from_dict(system_tbl["disturbance"])

    integ_tbl = data.get("integrator", {})
    try:
        integrator = IntegratorConfig(
            method=integ_tbl.get("method", "rk4"),
            dt=float(integ_tbl.get("dt", 1e-3)),
            atol=float(integ_tbl.get("atol", 1e-9)),
            rtol=float(integ_tbl.get("rtol", 1e-9)),
        )
    except ValueError as exc:
        raise ScenarioError("integrator", str(exc)) from None

    out_tbl = data.get("output", {})
    outputs = tuple(out_tbl.get("kinds", ["csv", "metadata"]))

    return Scenario(
        name=str(name),
        path=path_spec,
        field=field,
        system=kind if kind is not None else "",
        initial=initial,
        t_end=float(data.get("t_end", 60.0)),
        integrator=integrator,
        aircraft=aircraft,
        disturbance=disturbance,
        outputs=outputs,
    )


def _table(data: dict, key: str) -> dict:
    value = data.get(key)
    if not isinstance(value, dict):
        raise ScenarioError(key, "missing table")
    return dict(value)


def _disturbance_from_dict(tbl: dict) -> Disturbance:
    kind = tbl.get("kind")
    try:
        if kind == "zero":
            return Disturbance.zero()
        if kind == "constant":
            return Disturbance.constant(tbl["vector"])
        if kind == "sinusoid":
            return Disturbance.sinusoid(tbl["amplitude"], tbl["frequency"],
                                        tbl.get("phase", (0.0, 0.0, 0.0)))
        if kind == "decaying":
            return Disturbance.decaying(tbl["vector"], tbl["rate"])
    except (KeyError, ValueError, TypeError) as exc:
        raise ScenarioError("system.disturbance", str(exc)) from None
    raise ScenarioError("system.disturbance.kind",
                        f"unknown disturbance {kind!r}")


def scenario_to_dict(scenario: Scenario) -> dict:
    path_tbl: dict = {}
    if scenario.path.builtin is not None:
        path_tbl["builtin"] = scenario.path.builtin
        path_tbl.update({k: v for k, v in scenario.path.params})
    else:
        path_tbl["phi1"] = scenario.path.phi1
        path_tbl["phi2"] = scenario.path.phi2

    system_tbl: dict = {"kind": scenario.system,
                        "initial": list(scenario.initial)}
    if scenario.aircraft is not None:
        ac = scenario.aircraft
        system_tbl["aircraft"] = {
            "tau_z": ac.tau_z, "tau_theta": ac.tau_theta, "tau_s": ac.tau_s,
            "k_theta": ac.k_theta, "s_star": ac.s_star}
    if scenario.disturbance is not None:
        d = scenario.disturbance
        dist_tbl: dict = {"kind": d.kind}
        if d.kind in ("constant", "decaying"):
            dist_tbl["vector"] = list(d.vector)
        if d.kind == "decaying":
            dist_tbl["rate"] = d.rate
        if d.kind == "sinusoid":
            dist_tbl["amplitude"] = list(d.amplitude)
            dist_tbl["frequency"] = list(d.frequency)
            dist_tbl["phase"] = list(d.phase)
        system_tbl["disturbance"] = dist_tbl

    return {
        "name": scenario.name,
        "t_end": scenario.t_end,
        "path": path_tbl,
        "field": {"k1": scenario.field.k1, "k2": scenario.field.k2},
        "system": system_tbl,
        "integrator": {
            "method": scenario.integrator.method,
            "dt": scenario.integrator.dt,
            "atol": scenario.integrator.atol,
            "rtol": scenario.integrator.rtol,
        },
        "output": {"kinds": list(scenario.outputs)},
    }


def scenario_to_toml(scenario: Scenario) -> str:
    """Serialize; ``load -> serialize -> load`` round-trips exactly."""
    return _emit_toml(scenario_to_dict(scenario))


def _emit_toml(data: dict, prefix: str = "") -> str:
    lines = []
    tables = []
    for key, value in data.items():
        if isinstance(value, dict):
            tables.append((key, value))
        else:
            lines.append(f"{key} = {_toml_value(value)}")
    out = "\n".join(lines)
    for key, value in tables:
        full = f"{prefix}{key}"
        out += f"\n\n[{full}]\n" + _emit_toml(value, prefix=full + ".")
    return out.strip() + "\n" if prefix == "" else out


def _toml_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int,)):
        return repr(value)
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(_toml_value(v) for v in value) + "]"
    raise TypeError(f"cannot serialize {value!r}")


def load_scenario(file) -> Scenario:
    """Parse and validate a scenario TOML file."""
    file = Path(file)
    try:
        with open(file, "rb") as handle:
            data = tomllib.load(handle)
    except tomllib.TOMLDecodeError as exc:
        raise ScenarioError(str(file), f"invalid TOML: {exc}") from None
    scenario = scenario_from_dict(data, name=file.stem)
    build_path(scenario)  # surfaces expression errors at load time
    return scenario


def scenario_hash(scenario: Scenario) -> str:
    canonical = json.dumps(scenario_to_dict(scenario), sort_keys=True)
    return hashlib.sha256(canonical.encode()).hexdigest()


def build_path(scenario: Scenario) -> ImplicitPath:
    spec = scenario.path
    if spec.builtin == "helix":
        return builtin_helix()
    if spec.builtin == "cylinder_intersection":
        kwargs = dict(spec.params)
        unknown = set(kwargs) - {"a", "b", "R", "r"}
        if unknown:
            raise ScenarioError("path", f"unknown parameters {sorted(unknown)}")
        try:
            return builtin_cylinder_intersection(
                a=kwargs.get("a", 0.0), b=kwargs.get("b", 0.0),
                R=kwargs["R"], r=kwargs["r"])
        except KeyError as exc:
            raise ScenarioError("path", f"missing parameter "
                                f"{exc.args[0]!r}") from None
        except ValueError as exc:
            raise ScenarioError("path", str(exc)) from None
    try:
        return path_from_expressions(spec.phi1, spec.phi2)
    except ExpressionError as exc:
        raise ScenarioError("path", f"expression error: {exc}") from None


# ---------------------------------------------------------------------------
# Running

@dataclass(frozen=True)
class RunArtifactSet:
    scenario: Scenario
    out_dir: Path
    trajectory_csv: Path
    metadata_json: Optional[Path]
    svg_paths: tuple[Path, ...]
    exit_code: int
    trajectory: Trajectory


def simulate(scenario: Scenario) -> Trajectory:
    """Dispatch the scenario's system to the matching integrator."""
    path = build_path(scenario)
    if scenario.system == "raw":
        return integrate_flow(path, scenario.field, scenario.initial,
                              scenario.integrator, scenario.t_end)
    if scenario.system == "normalized":
        return integrate_normalized_flow(path, scenario.field,
                                         scenario.initial,
                                         scenario.integrator, scenario.t_end)
    if scenario.system == "perturbed":
        return integrate_perturbed_flow(path, scenario.field,
                                        scenario.initial,
                                        scenario.disturbance,
                                        scenario.integrator, scenario.t_end)
    state0 = AircraftState(*scenario.initial)
    return integrate_aircraft(path, scenario.field, scenario.aircraft, state0,
                              scenario.integrator, scenario.t_end)


_EVENT_EXIT = {
    "completed": EXIT_COMPLETED,
    "singular_approach": EXIT_SINGULAR,
    "planar_degeneracy": EXIT_SINGULAR,
    "domain_exit": EXIT_DOMAIN,
    "step_underflow": EXIT_INTEGRATION,
}


def run(scenario: Scenario, out_dir) -> RunArtifactSet:
    """Run the scenario and write its artifact set under ``out_dir``."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    traj = simulate(scenario)

    terminal = traj.events[-1] if traj.events else None
    exit_code = _EVENT_EXIT.get(terminal.kind, EXIT_INTEGRATION) \
        if terminal else EXIT_INTEGRATION

    csv_path = out_dir / f"{scenario.name}.csv"
    traj.write_csv(csv_path)

    svg_paths: list[Path] = []
    if "traj3d" in scenario.outputs:
        svg = out_dir / f"{scenario.name}_traj3d.svg"
        svgplot.plot_trajectory_projection(traj, svg)
        svg_paths.append(svg)
    if "error" in scenario.outputs:
        svg = out_dir / f"{scenario.name}_error.svg"
        svgplot.plot_error_series(traj, svg)
        svg_paths.append(svg)

    metadata_path: Optional[Path] = None
    if "metadata" in scenario.outputs:
        metadata_path = out_dir / f"{scenario.name}_metadata.json"
        metadata = {
            "format": "gvf3d-run-metadata/1",
            "scenario": scenario_to_dict(scenario),
            "scenario_hash": scenario_hash(scenario),
            "exit_code": exit_code,
            "events": [
                {"kind": ev.kind, "time": ev.time,
                 "state": list(ev.state) if ev.state is not None else None,
                 "detail": ev.detail}
                for ev in traj.events
            ],
            "samples": int(len(traj.times)),
            "final_time": float(traj.times[-1]),
            "final_error": traj.final_error,
            "csv_columns": list(traj.columns),
            "artifacts": {
                "trajectory_csv": csv_path.name,
                "svg": [p.name for p in svg_paths],
            },
        }
        with open(metadata_path, "w") as handle:
            json.dump(metadata, handle, indent=2, sort_keys=True)
            handle.write("\n")

    return RunArtifactSet(
        scenario=scenario,
        out_dir=out_dir,
        trajectory_csv=csv_path,
        metadata_json=metadata_path,
        svg_paths=tuple(svg_paths),
        exit_code=exit_code,
        trajectory=traj,
    )
