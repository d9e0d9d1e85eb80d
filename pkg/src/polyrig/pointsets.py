"""Measurements on labeled point configurations in the plane or in space.

These are the dimension-agnostic primitives shared by the polygon module
(2D chart) and the witness machinery in rigidity (free points in 2D/3D):
distances, angles at an apex, angles between two segments, plus an optional
coplanarity side constraint for 3D searches. Values and gradients are taken
with respect to the flattened coordinate array (n * dim,).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateMeasurement


@dataclass(frozen=True)
class Distance:
    """|A_i A_j|."""

    i: int
    j: int


@dataclass(frozen=True)
class Angle:
    """Angle at apex A_j between rays to A_i and A_k."""

    i: int
    j: int
    k: int


@dataclass(frozen=True)
class DiagonalAngle:
    """Angle between segment A_i->A_j and segment A_k->A_l."""

    i: int
    j: int
    k: int
    l: int


SimpleMeasurement = Distance | Angle | DiagonalAngle


@dataclass(frozen=True)
class Coplanar:
    """Side constraint: points p, q, r, s lie on one plane (3D only).

    Residual is the scalar triple product [q-p, r-p, s-p]; not a measurement
    in the paper's menu, but the structural planarity its polyhedron claims
    presume.
    """

    p: int
    q: int
    r: int
    s: int


def _cross_mag(u: np.ndarray, v: np.ndarray) -> float:
    if u.shape[0] == 2:
        return abs(float(u[0] * v[1] - u[1] * v[0]))
    return float(np.linalg.norm(np.cross(u, v)))


def _angle_grads(u: np.ndarray, v: np.ndarray) -> tuple[float, np.ndarray, np.ndarray]:
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu < 1e-300 or nv < 1e-300:
        raise DegenerateMeasurement("zero-length ray in angle measurement")
    s = _cross_mag(u, v)
    c = float(u @ v)
    theta = float(np.arctan2(s, c))
    if s < 1e-14 * nu * nv:
        raise DegenerateMeasurement("parallel rays; angle gradient undefined")
    du = (c * u / nu ** 2 - v) / s
    dv = (c * v / nv ** 2 - u) / s
    return theta, du, dv


def measurement_value(m: SimpleMeasurement | Coplanar, points: np.ndarray) -> float:
    """Value of one measurement on a (n, dim) point array."""
    if isinstance(m, Distance):
        r = float(np.linalg.norm(points[m.i] - points[m.j]))
        if r < 1e-300:
            raise DegenerateMeasurement(f"points {m.i} and {m.j} coincide")
        return r
    if isinstance(m, Angle):
        u = points[m.i] - points[m.j]
        v = points[m.k] - points[m.j]
        nu, nv = np.linalg.norm(u), np.linalg.norm(v)
        if nu < 1e-300 or nv < 1e-300:
            raise DegenerateMeasurement("zero-length ray at angle apex")
        return float(np.arctan2(_cross_mag(u, v), u @ v))
    if isinstance(m, DiagonalAngle):
        u = points[m.j] - points[m.i]
        v = points[m.l] - points[m.k]
        nu, nv = np.linalg.norm(u), np.linalg.norm(v)
        if nu < 1e-300 or nv < 1e-300:
            raise DegenerateMeasurement("zero-length segment in diagonal angle")
        return float(np.arctan2(_cross_mag(u, v), u @ v))
    if isinstance(m, Coplanar):
        a = points[m.q] - points[m.p]
        b = points[m.r] - points[m.p]
        c = points[m.s] - points[m.p]
        return float(a @ np.cross(b, c))
    raise TypeError(f"not a point measurement: {m!r}")


def measurement_gradient(m: SimpleMeasurement | Coplanar, points: np.ndarray) -> np.ndarray:
    """Exact gradient wrt the flattened (n * dim,) coordinate array."""
    n, dim = points.shape
    g = np.zeros((n, dim))
    if isinstance(m, Distance):
        d = points[m.i] - points[m.j]
        r = np.linalg.norm(d)
        if r < 1e-300:
            raise DegenerateMeasurement(f"points {m.i} and {m.j} coincide")
        g[m.i] = d / r
        g[m.j] = -d / r
    elif isinstance(m, Angle):
        u = points[m.i] - points[m.j]
        v = points[m.k] - points[m.j]
        _, du, dv = _angle_grads(u, v)
        g[m.i] = du
        g[m.k] = dv
        g[m.j] = -(du + dv)
    elif isinstance(m, DiagonalAngle):
        u = points[m.j] - points[m.i]
        v = points[m.l] - points[m.k]
        _, du, dv = _angle_grads(u, v)
        g[m.j] += du
        g[m.i] -= du
        g[m.l] += dv
        g[m.k] -= dv
    elif isinstance(m, Coplanar):
        a = points[m.q] - points[m.p]
        b = points[m.r] - points[m.p]
        c = points[m.s] - points[m.p]
        g[m.q] = np.cross(b, c)
        g[m.r] = np.cross(c, a)
        g[m.s] = np.cross(a, b)
        g[m.p] = -(g[m.q] + g[m.r] + g[m.s])
    else:
        raise TypeError(f"not a point measurement: {m!r}")
    return g.ravel()


def diameter(points: np.ndarray) -> float:
    d = points[:, None, :] - points[None, :, :]
    return float(np.sqrt((d ** 2).sum(axis=2)).max())


def align_distance(
    reference: np.ndarray, other: np.ndarray, allow_reflection: bool = False
) -> float:
    """Max point distance between `reference` and the best rigid placement
    of `other` (Kabsch). With allow_reflection the best orthogonal map is
    used; otherwise only proper rotations are admitted."""
    X = reference - reference.mean(axis=0)
    Y = other - other.mean(axis=0)
    H = Y.T @ X
    U, _, Vt = np.linalg.svd(H)
    R = Vt.T @ U.T
    if not allow_reflection and np.linalg.det(R) < 0:
        D = np.eye(H.shape[0])
        D[-1, -1] = -1.0
        R = Vt.T @ D @ U.T
    moved = Y @ R.T
    return float(np.linalg.norm(X - moved, axis=1).max())
