"""Numerical certification suite.

Locates singular points of the field, probes the standing regularity
assumptions by sampling, extracts convergence rates and exponential
envelopes from trajectories, compares phase portraits after arc-length
reparametrization, and estimates ultimate error bounds under persistent
disturbances.

Everything here is sampled or fitted: the probes can falsify a property,
never certify it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy.spatial import cKDTree
from scipy.stats import qmc

from .dynamics import Disturbance, Trajectory, integrate_perturbed_flow
from .field import (FieldParams, FieldSample, _chi_core, _chi_jacobian_core,
                    _eval_pair, sample_field)
from .integrate import IntegratorConfig
from .paths import ImplicitPath

__all__ = [
    "SingularPoint",
    "SingularScan",
    "AssumptionReport",
    "RateFit",
    "FitError",
    "ISSBound",
    "ISSSweep",
    "find_singular_points",
    "probe_assumptions",
    "fit_convergence",
    "phase_portrait_distance",
    "iss_ultimate_bound",
    "tube_samples",
    "project_to_path",
]

Box = tuple[tuple[float, float], tuple[float, float], tuple[float, float]]

#: Converged Newton roots are deduplicated within this radius; the target
#: fields have isolated singular points.
DEDUP_RADIUS = 1e-6
_NEWTON_RESIDUAL = 1e-12


class FitError(ValueError):
    """A rate fit was refused (non-convergent or degenerate input)."""


def _json_num(value: float):
    return float(value) if math.isfinite(value) else None


@dataclass(frozen=True)
class SingularPoint:
    location: np.ndarray
    residual: float                 # |chi| at the root
    basin: np.ndarray               # seeds observed to converge here, (m, 3)

    def to_json_dict(self) -> dict:
        return {
            "location": self.location.tolist(),
            "residual": self.residual,
            "basin": self.basin.tolist(),
        }


@dataclass(frozen=True)
class SingularScan:
    """Result of a grid-seeded Newton search for chi = 0.

    Iterates over the located points; ``seeds_failed`` counts seeds whose
    Newton iteration did not converge (dropped from the listing).
    """

    points: tuple[SingularPoint, ...]
    seeds_tried: int
    seeds_failed: int

    def __iter__(self):
        return iter(self.points)

    def __len__(self) -> int:
        return len(self.points)

    def __getitem__(self, idx):
        return self.points[idx]

    def to_json_dict(self) -> dict:
        return {
            "points": [p.to_json_dict() for p in self.points],
            "seeds_tried": self.seeds_tried,
            "seeds_failed": self.seeds_failed,
        }


def _normalize_box(box) -> Box:
    box = np.asarray(box, dtype=float)
    if box.shape == (2,):
        box = np.tile(box, (3, 1))
    if box.shape != (3, 2) or np.any(box[:, 0] >= box[:, 1]):
        raise ValueError("box must be ((xlo,xhi),(ylo,yhi),(zlo,zhi))")
    return tuple((float(lo), float(hi)) for lo, hi in box)


def find_singular_points(path: ImplicitPath, params: FieldParams, box,
                         grid_n: int = 40) -> SingularScan:
    """Locate isolated zeros of chi inside ``box``.

    Seeds Newton's method (analytic chi Jacobian) from grid points where
    |chi| is locally minimal; singular Jacobians fall back to damped
    least-squares steps.  Roots are deduplicated within ``DEDUP_RADIUS``
    and returned sorted lexicographically by location.
    """
    if grid_n < 2:
        raise ValueError("grid_n must be at least 2 per axis")
    box = _normalize_box(box)
    k1, k2 = params.k1, params.k2

    axes = [np.linspace(lo, hi, grid_n) for lo, hi in box]
    norms = np.full((grid_n, grid_n, grid_n), np.inf)
    for i, x in enumerate(axes[0]):
        for j, y in enumerate(axes[1]):
            for k, z in enumerate(axes[2]):
                pair = _eval_pair(path, float(x), float(y), float(z))
                if pair is None:
                    continue
                v1, g1, _, v2, g2, _ = pair
                chi = _chi_core(k1, k2, v1, v2, g1, g2)[2]
                norms[i, j, k] = math.sqrt(
                    chi[0] ** 2 + chi[1] ** 2 + chi[2] ** 2)

    seeds = _grid_local_minima(axes, norms)
    diag = math.sqrt(sum((hi - lo) ** 2 for lo, hi in box))
    locations: list[np.ndarray] = []
    residuals: list[float] = []
    basins: list[list[np.ndarray]] = []
    failed = 0
    for seed in seeds:
        root = _newton_root(path, params, seed, escape_radius=2.0 * diag)
        if root is None:
            failed += 1
            continue
        location, residual = root
        for idx, known in enumerate(locations):
            if np.linalg.norm(known - location) < DEDUP_RADIUS:
                if residual < residuals[idx]:
                    locations[idx] = location
                    residuals[idx] = residual
                basins[idx].append(seed)
                break
        else:
            locations.append(location)
            residuals.append(residual)
            basins.append([seed])

    order = sorted(range(len(locations)), key=lambda i: tuple(locations[i]))
    return SingularScan(
        points=tuple(SingularPoint(locations[i], residuals[i],
                                   np.array(basins[i])) for i in order),
        seeds_tried=len(seeds),
        seeds_failed=failed,
    )


def _grid_local_minima(axes, norms) -> list[np.ndarray]:
    n = norms.shape[0]
    finite = np.isfinite(norms)
    minima = finite.copy()
    for axis in range(3):
        lower = np.roll(norms, 1, axis=axis)
        upper = np.roll(norms, -1, axis=axis)
        # Roll wraps around; disable the comparison at the two faces.
        sl_lo = [slice(None)] * 3
        sl_lo[axis] = 0
        sl_hi = [slice(None)] * 3
        sl_hi[axis] = -1
        ok_lower = norms <= lower
        ok_upper = norms <= upper
        ok_lower[tuple(sl_lo)] = True
        ok_upper[tuple(sl_hi)] = True
        minima &= ok_lower & ok_upper
    seeds = []
    for i, j, k in zip(*np.nonzero(minima)):
        seeds.append(np.array([axes[0][i], axes[1][j], axes[2][k]]))
    seeds.sort(key=lambda p: _grid_value(norms, minima, axes, p))
    return seeds


def _grid_value(norms, minima, axes, point):
    i = int(np.searchsorted(axes[0], point[0]))
    j = int(np.searchsorted(axes[1], point[1]))
    k = int(np.searchsorted(axes[2], point[2]))
    i, j, k = min(i, len(axes[0]) - 1), min(j, len(axes[1]) - 1), \
        min(k, len(axes[2]) - 1)
    return norms[i, j, k]


def _newton_root(path: ImplicitPath, params: FieldParams, seed: np.ndarray,
                 escape_radius: float, max_iter: int = 100):
    k1, k2 = params.k1, params.k2
    point = np.asarray(seed, dtype=float).copy()

    def chi_at(p):
        pair = _eval_pair(path, p[0], p[1], p[2])
        if pair is None:
            return None, None
        v1, g1, h1, v2, g2, h2 = pair
        chi = np.array(_chi_core(k1, k2, v1, v2, g1, g2)[2])
        jac = np.array(_chi_jacobian_core(k1, k2, v1, v2, g1, g2, h1, h2))
        return chi, jac

    chi, jac = chi_at(point)
    if chi is None:
        return None
    res = float(np.linalg.norm(chi))
    for _ in range(max_iter):
        if res < _NEWTON_RESIDUAL:
            return point, res
        try:
            step = np.linalg.solve(jac, -chi)
            if not np.all(np.isfinite(step)):
                raise np.linalg.LinAlgError
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(jac, -chi, rcond=None)[0]
        if not np.all(np.isfinite(step)):
            return None
        # Backtrack until the residual actually decreases (damped Newton).
        alpha = 1.0
        while alpha > 1e-10:
            candidate = point + alpha * step
            chi_c, jac_c = chi_at(candidate)
            if chi_c is not None:
                res_c = float(np.linalg.norm(chi_c))
                if res_c < res or res_c < _NEWTON_RESIDUAL:
                    point, chi, jac, res = candidate, chi_c, jac_c, res_c
                    break
            alpha *= 0.5
        else:
            return None
        if np.linalg.norm(point - seed) > escape_radius:
            return None
    return (point, res) if res < _NEWTON_RESIDUAL else None


# ---------------------------------------------------------------------------
# Assumption probes

@dataclass(frozen=True)
class AssumptionReport:
    """Sampled estimates behind the standing assumptions.

    ``est_dist_path_singular`` estimates dist(P, C) (inf over on-path
    samples and located singular points; +inf when no singular points are
    known).  The ``inf_*`` maps estimate, per distance shell kappa, the
    infimum of |e| over {dist(xi, P) >= kappa} and of |NKe| over
    {dist(xi, M) >= kappa}.  All values are sampled estimates: they can
    falsify an assumption, never certify one.
    """

    est_dist_path_singular: float
    inf_error_by_kappa: dict[float, float]
    inf_nke_by_kappa: dict[float, float]
    shell_counts: dict[float, int]
    box: Box
    n_samples: int
    distance_method: str        # "parametrization" | "projection"
    note: str = "sampled estimate: can falsify, cannot certify"

    def to_json_dict(self) -> dict:
        # Infinite estimates (empty singular set / empty shell) map to None:
        # JSON has no Infinity literal.
        return {
            "est_dist_path_singular": _json_num(self.est_dist_path_singular),
            "inf_error_by_kappa": {str(k): _json_num(v) for k, v in
                                   self.inf_error_by_kappa.items()},
            "inf_nke_by_kappa": {str(k): _json_num(v) for k, v in
                                 self.inf_nke_by_kappa.items()},
            "shell_counts": {str(k): v for k, v in
                             self.shell_counts.items()},
            "box": [list(axis) for axis in self.box],
            "n_samples": self.n_samples,
            "distance_method": self.distance_method,
            "note": self.note,
        }


def probe_assumptions(path: ImplicitPath, params: FieldParams,
                      singulars: Iterable[SingularPoint], box,
                      n_samples: int = 100_000,
                      kappas: Sequence[float] = (0.0, 0.05, 0.1, 0.2, 0.5, 1.0),
                      n_path: int = 4096, seed: int = 0) -> AssumptionReport:
    """Estimate the assumption quantities by quasi-random sampling."""
    if n_samples < 1000:
        raise ValueError("n_samples must be at least 1000")
    box = _normalize_box(box)
    singular_locs = np.array([np.asarray(s.location, dtype=float)
                              for s in singulars]).reshape(-1, 3)

    lows = np.array([lo for lo, _ in box])
    highs = np.array([hi for _, hi in box])
    halton = qmc.Halton(d=3, scramble=True, seed=seed)
    samples = lows + halton.random(n_samples) * (highs - lows)

    if path.parametrization is not None:
        path_pts = path.path_points(n_path)
        method = "parametrization"
        tree = cKDTree(path_pts)
        # Include the on-path points themselves so the kappa = 0 shell
        # genuinely contains zero-error samples.
        samples = np.vstack([samples, path_pts])
        dist_p = tree.query(samples)[0]
    else:
        method = "projection"
        # No parametrization: project a slice of the samples to obtain
        # on-path anchor points (kappa = 0 shell), then measure every
        # sample by its own local projection.
        path_pts = np.array([project_to_path(path, p)
                             for p in samples[:512]])
        samples = np.vstack([samples, path_pts])
        dist_p = np.array([_projection_distance(path, p) for p in samples])

    e_norms = np.empty(len(samples))
    nke_norms = np.empty(len(samples))
    k1, k2 = params.k1, params.k2
    for idx, p in enumerate(samples):
        pair = _eval_pair(path, float(p[0]), float(p[1]), float(p[2]))
        if pair is None:
            e_norms[idx] = np.nan
            nke_norms[idx] = np.nan
            continue
        v1, g1, _, v2, g2, _ = pair
        nke = _chi_core(k1, k2, v1, v2, g1, g2)[1]
        e_norms[idx] = math.hypot(v1, v2)
        nke_norms[idx] = math.sqrt(nke[0] ** 2 + nke[1] ** 2 + nke[2] ** 2)
    good = np.isfinite(e_norms)

    if len(singular_locs):
        sing_tree = cKDTree(singular_locs)
        dist_c = sing_tree.query(samples)[0]
        dist_m = np.minimum(dist_p, dist_c)
        if len(path_pts):
            est_dist = float(cKDTree(path_pts).query(singular_locs)[0].min())
        else:
            est_dist = float(min(_projection_distance(path, s)
                                 for s in singular_locs))
    else:
        dist_m = dist_p
        est_dist = math.inf

    inf_e: dict[float, float] = {}
    inf_nke: dict[float, float] = {}
    counts: dict[float, int] = {}
    for kappa in kappas:
        mask_e = good & (dist_p >= kappa)
        mask_m = good & (dist_m >= kappa)
        counts[kappa] = int(mask_e.sum())
        inf_e[kappa] = float(e_norms[mask_e].min()) if mask_e.any() else \
            math.inf
        inf_nke[kappa] = float(nke_norms[mask_m].min()) if mask_m.any() else \
            math.inf

    return AssumptionReport(
        est_dist_path_singular=est_dist,
        inf_error_by_kappa=inf_e,
        inf_nke_by_kappa=inf_nke,
        shell_counts=counts,
        box=box,
        n_samples=int(n_samples),
        distance_method=method,
    )


def project_to_path(path: ImplicitPath, xi, max_iter: int = 60,
                    tol: float = 1e-12) -> np.ndarray:
    """Gauss-Newton projection of ``xi`` onto the zero set of (phi1, phi2).

    Local: converges to a nearby point on the path, which need not be the
    globally closest one.
    """
    point = np.asarray(xi, dtype=float).copy()
    for _ in range(max_iter):
        pair = _eval_pair(path, point[0], point[1], point[2])
        if pair is None:
            raise ValueError(f"projection left the field domain at {point}")
        v1, g1, _, v2, g2, _ = pair
        if math.hypot(v1, v2) < tol:
            break
        jac = np.array([g1, g2])
        gram = jac @ jac.T
        try:
            coeff = np.linalg.solve(gram, np.array([v1, v2]))
        except np.linalg.LinAlgError:
            coeff = np.linalg.lstsq(gram, np.array([v1, v2]), rcond=None)[0]
        point = point - jac.T @ coeff
    return point


def _projection_distance(path: ImplicitPath, xi) -> float:
    projected = project_to_path(path, xi)
    return float(np.linalg.norm(np.asarray(xi, dtype=float) - projected))


# ---------------------------------------------------------------------------
# Convergence-rate extraction

@dataclass(frozen=True)
class RateFit:
    """Log-linear decay fit of |e(t)| against the certified envelope.

    ``lambda_min`` is the sampled minimum eigenvalue of Q over the supplied
    region samples (None when none were given); the envelope uses the
    slightly conservative 0.99 * lambda_min.  The pointwise envelope check
    stops once the envelope sinks below ``ENVELOPE_FLOOR``: past that the
    continuous-time bound is smaller than the integrator's own error floor
    and comparisons only measure discretization noise (the fitting window
    uses the same floor).
    """

    fitted_rate: float
    lambda_min: Optional[float]
    theoretical_rate: Optional[float]
    envelope_constant: float
    envelope_violations: Optional[int]
    window: tuple[float, float]
    n_window: int

    def to_json_dict(self) -> dict:
        return {
            "fitted_rate": self.fitted_rate,
            "lambda_min": self.lambda_min,
            "theoretical_rate": self.theoretical_rate,
            "envelope_constant": self.envelope_constant,
            "envelope_violations": self.envelope_violations,
            "window": list(self.window),
            "n_window": self.n_window,
        }


#: Margin applied to the sampled minimum eigenvalue: the grid minimum can
#: sit slightly above the continuum one.
LAMBDA_SAFETY = 0.99
ENVELOPE_SLACK = 1.0 + 1e-6
#: Smallest error magnitude the error series resolves above integrator
#: noise; also the lower edge of the rate-fitting window.
ENVELOPE_FLOOR = 1e-8


def fit_convergence(traj: Trajectory, params: FieldParams,
                    region_samples: Sequence[FieldSample] = ()) -> RateFit:
    """Fit the exponential decay rate of |e(t)| and check the envelope."""
    e = traj.error_norms
    t = traj.times
    e0 = float(e[0])
    if not (e[-1] < 0.1 * e0):
        raise FitError("trajectory did not converge; rate fit refused")

    mask = (e >= ENVELOPE_FLOOR) & (e <= 0.5 * e0) & (e > 0.0)
    if mask.sum() < 8:
        raise FitError("too few samples in the fitting window")
    slope = np.polyfit(t[mask], np.log(e[mask]), 1)[0]
    window = (float(t[mask].min()), float(t[mask].max()))

    lam: Optional[float] = None
    rate: Optional[float] = None
    violations: Optional[int] = None
    constant = math.sqrt(params.k_max / params.k_min)
    if len(region_samples):
        lam = min(_lambda_min(s) for s in region_samples)
        rate = lam / params.k_max
        envelope = constant * e0 * np.exp(
            -LAMBDA_SAFETY * lam * t / params.k_max) * ENVELOPE_SLACK
        resolvable = envelope >= ENVELOPE_FLOOR
        violations = int(np.sum(e[resolvable] > envelope[resolvable]))
    return RateFit(
        fitted_rate=float(-slope),
        lambda_min=lam,
        theoretical_rate=rate,
        envelope_constant=constant,
        envelope_violations=violations,
        window=window,
        n_window=int(mask.sum()),
    )


def _lambda_min(sample: FieldSample) -> float:
    q = sample.Q
    tr = q[0, 0] + q[1, 1]
    det = q[0, 0] * q[1, 1] - q[0, 1] * q[1, 0]
    return (tr - math.sqrt(max(tr * tr - 4.0 * det, 0.0))) / 2.0


def tube_samples(path: ImplicitPath, params: FieldParams, box, grid_n: int,
                 max_error: float) -> list[FieldSample]:
    """Grid samples of the |e| <= max_error tube inside ``box``."""
    box = _normalize_box(box)
    axes = [np.linspace(lo, hi, grid_n) for lo, hi in box]
    out: list[FieldSample] = []
    for x in axes[0]:
        for y in axes[1]:
            for z in axes[2]:
                pair = _eval_pair(path, float(x), float(y), float(z))
                if pair is None:
                    continue
                if math.hypot(pair[0], pair[3]) <= max_error:
                    out.append(sample_field(path, params, (x, y, z)))
    return out


# ---------------------------------------------------------------------------
# Phase-portrait comparison

def phase_portrait_distance(traj_a: Trajectory, traj_b: Trajectory,
                            n: int = 512) -> float:
    """Max pointwise gap between the two traced curves.

    Both curves are resampled uniformly by arc length (``n`` points over
    the shorter common length) after aligning the start points, so
    trajectories that trace the same geometric curve at different speeds
    compare as equal.
    """
    pts_a, s_a = _arc_parametrize(traj_a)
    pts_b, s_b = _arc_parametrize(traj_b)
    length = min(s_a[-1], s_b[-1])
    if not (length > 0.0):
        raise ValueError("degenerate trajectory: zero arc length")
    grid = np.linspace(0.0, length, n)
    resampled_a = _resample(pts_a, s_a, grid)
    resampled_b = _resample(pts_b, s_b, grid)
    delta = (resampled_a - resampled_a[0]) - (resampled_b - resampled_b[0])
    return float(np.sqrt(np.sum(delta * delta, axis=1)).max())


def _arc_parametrize(traj: Trajectory):
    pts = traj.positions()
    if len(pts) < 2:
        raise ValueError("degenerate trajectory: fewer than two samples")
    chords = np.sqrt(np.sum(np.diff(pts, axis=0) ** 2, axis=1))
    return pts, np.concatenate([[0.0], np.cumsum(chords)])


def _resample(pts: np.ndarray, s: np.ndarray, grid: np.ndarray) -> np.ndarray:
    return np.column_stack([np.interp(grid, s, pts[:, i]) for i in range(3)])


# ---------------------------------------------------------------------------
# ISS ultimate bounds

@dataclass(frozen=True)
class ISSBound:
    amplitude: float
    bound: float          # sup |e(t)| over the final 20% of the run
    diverged: bool


@dataclass(frozen=True)
class ISSSweep:
    bounds: tuple[ISSBound, ...]
    direction: tuple[float, float, float]
    monotone: bool

    def as_dict(self) -> dict[float, float]:
        return {b.amplitude: b.bound for b in self.bounds}

    def to_json_dict(self) -> dict:
        return {
            "bounds": [{"amplitude": b.amplitude, "bound": _json_num(b.bound),
                        "diverged": b.diverged} for b in self.bounds],
            "direction": list(self.direction),
            "monotone": self.monotone,
        }


def iss_ultimate_bound(path: ImplicitPath, params: FieldParams, xi0,
                       amplitudes: Sequence[float], t_end: float = 30.0,
                       integrator: IntegratorConfig = IntegratorConfig(),
                       divergence_factor: float = 5.0) -> ISSSweep:
    """Ultimate error bounds under worst-case-aligned constant disturbances.

    For each amplitude the disturbance direction is the unit vector
    maximizing d' N K e at ``xi0`` (the direction of steepest Lyapunov
    increase there).  A run is flagged diverged when its final error
    exceeds ``divergence_factor * max(1, |e(xi0)|)``, signalling an
    amplitude outside the locally certified ball.
    """
    amplitudes = [float(a) for a in amplitudes]
    if any(b < a for a, b in zip(amplitudes, amplitudes[1:])):
        raise ValueError("amplitudes must be sorted ascending")
    start = sample_field(path, params, xi0)
    if start.nke_norm > 0.0:
        direction = start.nke / start.nke_norm
    else:
        n1 = start.N[:, 0]
        direction = n1 / np.linalg.norm(n1)

    limit = divergence_factor * max(1.0, start.e_norm)
    entries = []
    for amplitude in amplitudes:
        d = Disturbance.constant(amplitude * direction)
        traj = integrate_perturbed_flow(path, params, xi0, d,
                                        integrator=integrator, t_end=t_end)
        tail = traj.times >= 0.8 * traj.times[-1]
        bound = float(traj.error_norms[tail].max())
        diverged = (not np.isfinite(bound)) or traj.final_error > limit
        entries.append(ISSBound(amplitude, bound, diverged))

    monotone = all(b.bound >= a.bound - 1e-9
                   for a, b in zip(entries, entries[1:]))
    return ISSSweep(tuple(entries), tuple(float(v) for v in direction),
                    monotone)
