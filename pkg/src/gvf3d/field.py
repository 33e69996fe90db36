"""Pointwise guiding-field quantities.

For a path (phi1, phi2) with gradients n1, n2 and gains k1, k2 the guiding
field is

    chi = tau - N K e,    tau = n1 x n2,   N = (n1 n2),   e = (phi1, phi2)

together with the Lyapunov value V = e' K e / 2 and the stiffness matrix
Q = K N' N K.  Everything here is stateless and safe to call concurrently.

The private ``*_core`` helpers work on plain floats and tuples; they are
shared by the public numpy-facing API and by the integration hot loops in
:mod:`gvf3d.dynamics` (small-array numpy is several times slower at this
granularity).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .paths import ImplicitPath, Mat3, Vec3

__all__ = [
    "FieldParams",
    "FieldSample",
    "SetMembership",
    "FieldDomainError",
    "SingularFieldError",
    "sample_field",
    "q_matrix",
    "classify",
    "chi_jacobian",
    "jacobian_planar_field",
]

#: Relative floor under which chi is treated as zero (the normalized field
#: and the planar controller are undefined there).
SINGULAR_EPS_SCALE = 1e-9


class FieldDomainError(ValueError):
    """A scalar field reported a pointwise domain failure."""

    def __init__(self, xi):
        self.xi = tuple(float(v) for v in xi)
        super().__init__(f"field domain error at xi={self.xi}")


class SingularFieldError(ValueError):
    """chi vanishes (to tolerance) where a direction was required."""


@dataclass(frozen=True)
class FieldParams:
    """Positive gains k1, k2 of the error-feedback term."""

    k1: float
    k2: float

    def __post_init__(self):
        if not (self.k1 > 0.0 and self.k2 > 0.0):
            raise ValueError("gains k1, k2 must be strictly positive")

    @property
    def k_min(self) -> float:
        return min(self.k1, self.k2)

    @property
    def k_max(self) -> float:
        return max(self.k1, self.k2)

    @property
    def K(self) -> np.ndarray:
        return np.diag([self.k1, self.k2])


@dataclass(frozen=True)
class FieldSample:
    """All pointwise field quantities at one location."""

    xi: np.ndarray
    e: np.ndarray            # (2,) surface errors
    N: np.ndarray            # (3, 2) gradient columns
    tau: np.ndarray          # (3,) n1 x n2
    chi: np.ndarray          # (3,) guiding field
    nke: np.ndarray          # (3,) N K e
    V: float                 # Lyapunov value
    Q: np.ndarray            # (2, 2) K N'N K
    chi_hat: Optional[np.ndarray]  # unit field, None within eps_singular of C
    eps_singular: float
    e_norm: float
    tau_norm: float
    chi_norm: float
    nke_norm: float

    def to_json_dict(self) -> dict:
        """Plain-types record (the JSON row schema used by the CLI)."""
        return {
            "xi": self.xi.tolist(),
            "e": self.e.tolist(),
            "N": self.N.tolist(),
            "tau": self.tau.tolist(),
            "chi": self.chi.tolist(),
            "nke": self.nke.tolist(),
            "V": self.V,
            "Q": self.Q.tolist(),
            "chi_hat": None if self.chi_hat is None else
                       self.chi_hat.tolist(),
            "eps_singular": self.eps_singular,
            "norms": {"e": self.e_norm, "tau": self.tau_norm,
                      "chi": self.chi_norm, "nke": self.nke_norm},
        }


@dataclass(frozen=True)
class SetMembership:
    """Approximate membership in the invariant/singular/degenerate sets.

    ``near_boundary`` flags points whose classification would flip under a
    factor-10 change of ``eps_m``; membership near set boundaries is
    tolerance-dependent by nature.
    """

    in_M: bool
    in_C: bool
    in_C_prime: bool
    eps_m: float
    eps_rank: float
    near_boundary: bool


# ---------------------------------------------------------------------------
# Scalar cores

def _eval_pair(path: ImplicitPath, x: float, y: float, z: float):
    v1, g1, h1, ok1 = path.phi1.eval_raw(x, y, z)
    v2, g2, h2, ok2 = path.phi2.eval_raw(x, y, z)
    if not (ok1 and ok2):
        return None
    return v1, g1, h1, v2, g2, h2


def _chi_core(k1: float, k2: float, v1: float, v2: float, g1: Vec3, g2: Vec3):
    """Return (tau, nke, chi) as tuples."""
    g1x, g1y, g1z = g1
    g2x, g2y, g2z = g2
    tx = g1y * g2z - g1z * g2y
    ty = g1z * g2x - g1x * g2z
    tz = g1x * g2y - g1y * g2x
    c1 = k1 * v1
    c2 = k2 * v2
    mx = c1 * g1x + c2 * g2x
    my = c1 * g1y + c2 * g2y
    mz = c1 * g1z + c2 * g2z
    return (tx, ty, tz), (mx, my, mz), (tx - mx, ty - my, tz - mz)


def _cross(a: Vec3, b: Vec3) -> Vec3:
    return (a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0])


def _chi_jacobian_core(k1: float, k2: float, v1: float, v2: float,
                       g1: Vec3, g2: Vec3, h1: Mat3, h2: Mat3) -> Mat3:
    """d(chi)/d(xi) assembled from gradients and Hessians.

    Column j is  g1 x H2[:,j] + H1[:,j] x g2
                 - k1 (g1 g1[j] + v1 H1[:,j]) - k2 (g2 g2[j] + v2 H2[:,j]).
    """
    cols = []
    for j in range(3):
        h1c = (h1[0][j], h1[1][j], h1[2][j])
        h2c = (h2[0][j], h2[1][j], h2[2][j])
        t1 = _cross(g1, h2c)
        t2 = _cross(h1c, g2)
        g1j = g1[j]
        g2j = g2[j]
        cols.append((
            t1[0] + t2[0] - k1 * (g1[0] * g1j + v1 * h1c[0])
            - k2 * (g2[0] * g2j + v2 * h2c[0]),
            t1[1] + t2[1] - k1 * (g1[1] * g1j + v1 * h1c[1])
            - k2 * (g2[1] * g2j + v2 * h2c[1]),
            t1[2] + t2[2] - k1 * (g1[2] * g1j + v1 * h1c[2])
            - k2 * (g2[2] * g2j + v2 * h2c[2]),
        ))
    return ((cols[0][0], cols[1][0], cols[2][0]),
            (cols[0][1], cols[1][1], cols[2][1]),
            (cols[0][2], cols[1][2], cols[2][2]))


def _planar_jacobian_core(chi: Vec3, chi_norm: float, jac: Mat3):
    """Rows 1..2 of d(chi_hat)/d(xi) = (I - chi_hat chi_hat')/|chi| . J."""
    ux, uy, uz = chi[0] / chi_norm, chi[1] / chi_norm, chi[2] / chi_norm
    rows = []
    for i in range(2):
        ui = (ux, uy, uz)[i]
        rows.append(tuple(
            (jac[i][j] - ui * (ux * jac[0][j] + uy * jac[1][j]
                               + uz * jac[2][j])) / chi_norm
            for j in range(3)))
    return rows[0], rows[1]


def _eps_singular(tau_norm: float, nke_norm: float) -> float:
    return SINGULAR_EPS_SCALE * (1.0 + tau_norm + nke_norm)


# ---------------------------------------------------------------------------
# Public operations

def sample_field(path: ImplicitPath, params: FieldParams, xi) -> FieldSample:
    """Evaluate every pointwise field quantity at ``xi``.

    Raises :class:`FieldDomainError` if either surface reports a pointwise
    domain failure there.
    """
    x, y, z = float(xi[0]), float(xi[1]), float(xi[2])
    pair = _eval_pair(path, x, y, z)
    if pair is None:
        raise FieldDomainError((x, y, z))
    v1, g1, h1, v2, g2, h2 = pair
    k1, k2 = params.k1, params.k2
    tau, nke, chi = _chi_core(k1, k2, v1, v2, g1, g2)

    tau_norm = math.sqrt(tau[0] ** 2 + tau[1] ** 2 + tau[2] ** 2)
    chi_norm = math.sqrt(chi[0] ** 2 + chi[1] ** 2 + chi[2] ** 2)
    nke_norm = math.sqrt(nke[0] ** 2 + nke[1] ** 2 + nke[2] ** 2)
    e_norm = math.hypot(v1, v2)

    dot11 = g1[0] ** 2 + g1[1] ** 2 + g1[2] ** 2
    dot22 = g2[0] ** 2 + g2[1] ** 2 + g2[2] ** 2
    dot12 = g1[0] * g2[0] + g1[1] * g2[1] + g1[2] * g2[2]
    q = np.array([[k1 * k1 * dot11, k1 * k2 * dot12],
                  [k1 * k2 * dot12, k2 * k2 * dot22]])

    eps = _eps_singular(tau_norm, nke_norm)
    chi_hat = np.array(chi) / chi_norm if chi_norm > eps else None

    return FieldSample(
        xi=np.array((x, y, z)),
        e=np.array((v1, v2)),
        N=np.array(((g1[0], g2[0]), (g1[1], g2[1]), (g1[2], g2[2]))),
        tau=np.array(tau),
        chi=np.array(chi),
        nke=np.array(nke),
        V=0.5 * (k1 * v1 * v1 + k2 * v2 * v2),
        Q=q,
        chi_hat=chi_hat,
        eps_singular=eps,
        e_norm=e_norm,
        tau_norm=tau_norm,
        chi_norm=chi_norm,
        nke_norm=nke_norm,
    )


def q_matrix(sample: FieldSample) -> tuple[np.ndarray, tuple[float, float]]:
    """Return Q = K N'N K and its eigenvalues in ascending order."""
    q = sample.Q
    tr = q[0, 0] + q[1, 1]
    det = q[0, 0] * q[1, 1] - q[0, 1] * q[1, 0]
    disc = math.sqrt(max(tr * tr - 4.0 * det, 0.0))
    return q, ((tr - disc) / 2.0, (tr + disc) / 2.0)


def classify(sample: FieldSample, eps_m: float = 1e-8,
             eps_rank: float = 1e-8) -> SetMembership:
    """Tolerance-based membership in M (N K e = 0), C (chi = 0) and the
    off-M rank-deficient set C'."""
    if eps_m <= 0.0 or eps_rank <= 0.0:
        raise ValueError("membership tolerances must be positive")
    in_m = sample.nke_norm <= eps_m
    rank_deficient = sample.tau_norm <= eps_rank
    near = (not in_m and sample.nke_norm <= 10.0 * eps_m) or \
           (in_m and sample.nke_norm >= 0.1 * eps_m)
    return SetMembership(
        in_M=in_m,
        in_C=in_m and rank_deficient,
        in_C_prime=(not in_m) and rank_deficient,
        eps_m=eps_m,
        eps_rank=eps_rank,
        near_boundary=near,
    )


def chi_jacobian(path: ImplicitPath, params: FieldParams, xi) -> np.ndarray:
    """Analytic 3x3 Jacobian of the raw field chi at ``xi``."""
    x, y, z = float(xi[0]), float(xi[1]), float(xi[2])
    pair = _eval_pair(path, x, y, z)
    if pair is None:
        raise FieldDomainError((x, y, z))
    v1, g1, h1, v2, g2, h2 = pair
    return np.array(_chi_jacobian_core(params.k1, params.k2, v1, v2,
                                       g1, g2, h1, h2))


def jacobian_planar_field(path: ImplicitPath, params: FieldParams,
                          xi) -> np.ndarray:
    """Analytic 2x3 Jacobian of the planar components of the unit field.

    The planar field stacks the first two components of chi/|chi|; its
    Jacobian chains the raw-field Jacobian through the normalization.
    Raises :class:`SingularFieldError` within ``eps_singular`` of the
    singular set, where no direction exists.
    """
    x, y, z = float(xi[0]), float(xi[1]), float(xi[2])
    pair = _eval_pair(path, x, y, z)
    if pair is None:
        raise FieldDomainError((x, y, z))
    v1, g1, h1, v2, g2, h2 = pair
    k1, k2 = params.k1, params.k2
    tau, nke, chi = _chi_core(k1, k2, v1, v2, g1, g2)
    tau_norm = math.sqrt(tau[0] ** 2 + tau[1] ** 2 + tau[2] ** 2)
    nke_norm = math.sqrt(nke[0] ** 2 + nke[1] ** 2 + nke[2] ** 2)
    chi_norm = math.sqrt(chi[0] ** 2 + chi[1] ** 2 + chi[2] ** 2)
    if chi_norm <= _eps_singular(tau_norm, nke_norm):
        raise SingularFieldError(
            f"|chi| = {chi_norm:.3e} at xi={(x, y, z)}: unit field undefined")
    jac = _chi_jacobian_core(k1, k2, v1, v2, g1, g2, h1, h2)
    row0, row1 = _planar_jacobian_core(chi, chi_norm, jac)
    return np.array((row0, row1))
