"""Geometric layer: realizations of a polyhedron and 3D measurements.

A realization assigns coordinates to every vertex and a coefficient
vector (a, b, c) to every face, where the face plane is a x + b y + c z = 1.
That chart requires no face plane through the origin, which is arranged by
recentering vertex coordinates at their centroid (interior for a convex
solid, so every plane offset is nonzero).

The incidence constraint map phi sends a realization to the stacked values
a_j x_i + b_j y_i + c_j z_i - 1 over all incident (vertex, face) pairs; its
zero set is the manifold of planar-faced realizations, and d_phi is the
exact Jacobian of that map.

Measurements on a realization come in three kinds: distances between
vertices sharing a face, angles at a face corner, and interior dihedral
angles along an edge. evaluate/gradient give the value and the exact
gradient with respect to the full coordinate vector
(x_1, y_1, z_1, ..., x_V, y_V, z_V, a_1, b_1, c_1, ..., a_F, b_F, c_F).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import (
    CollinearFrame,
    DegenerateFace,
    DegenerateMeasurement,
    NonPlanarFace,
)
from .incidence import AbstractPolyhedron

PLANARITY_TOL = 1e-9


@dataclass(frozen=True)
class Realization:
    """Vertex coordinates (V, 3) plus face plane coefficients (F, 3).

    Arrays are copied and frozen at construction.
    """

    vertices: np.ndarray
    planes: np.ndarray

    def __post_init__(self):
        v = np.array(self.vertices, dtype=float)
        p = np.array(self.planes, dtype=float)
        if v.ndim != 2 or v.shape[1] != 3:
            raise ValueError(f"vertices must be (V, 3), got {v.shape}")
        if p.ndim != 2 or p.shape[1] != 3:
            raise ValueError(f"planes must be (F, 3), got {p.shape}")
        v.setflags(write=False)
        p.setflags(write=False)
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "planes", p)

    @property
    def vertex_count(self) -> int:
        return self.vertices.shape[0]

    @property
    def face_count(self) -> int:
        return self.planes.shape[0]

    def coordinate_vector(self) -> np.ndarray:
        """Flatten to (3V + 3F,): all vertex coords, then all plane coeffs."""
        return np.concatenate([self.vertices.ravel(), self.planes.ravel()])

    @staticmethod
    def from_coordinate_vector(x: np.ndarray, vertex_count: int, face_count: int) -> "Realization":
        x = np.asarray(x, dtype=float)
        nv = 3 * vertex_count
        return Realization(
            vertices=x[:nv].reshape(vertex_count, 3),
            planes=x[nv : nv + 3 * face_count].reshape(face_count, 3),
        )

    def diameter(self) -> float:
        d = self.vertices[:, None, :] - self.vertices[None, :, :]
        return float(np.sqrt((d ** 2).sum(axis=2)).max())

    def rescaled(self, factor: float) -> "Realization":
        """Scale lengths by factor (plane coefficients scale inversely)."""
        return Realization(self.vertices * factor, self.planes / factor)


# --- measurements -----------------------------------------------------------


@dataclass(frozen=True)
class FaceDistance:
    """Distance between two vertices sharing a face (edge or face diagonal)."""

    v: int
    w: int


@dataclass(frozen=True)
class FaceAngle:
    """Angle at vertex `apex` between rays to `end1` and `end2`, all on one face."""

    apex: int
    end1: int
    end2: int


@dataclass(frozen=True)
class DihedralAngle:
    """Interior dihedral angle between two faces sharing an edge."""

    f: int
    g: int


Measurement3D = FaceDistance | FaceAngle | DihedralAngle


def face_distance_pool(poly: AbstractPolyhedron) -> list[FaceDistance]:
    """All distances between vertex pairs sharing a face, sorted by ids."""
    return [FaceDistance(a, b) for a, b in poly.face_vertex_pairs()]


def edge_pool(poly: AbstractPolyhedron) -> list[FaceDistance]:
    return [FaceDistance(a, b) for a, b in poly.edges()]


def face_diagonal_pool(poly: AbstractPolyhedron) -> list[FaceDistance]:
    return [FaceDistance(a, b) for a, b in poly.face_diagonals()]


def face_angle_pool(poly: AbstractPolyhedron) -> list[FaceAngle]:
    """Every angle formed at a vertex by rays to two other vertices of a
    common face, cycle-adjacent or not; ordered by (apex, end1, end2)."""
    triples = set()
    for cycle in poly.faces:
        for apex in cycle:
            others = sorted(v for v in cycle if v != apex)
            for i, a in enumerate(others):
                for b in others[i + 1 :]:
                    triples.add((apex, a, b))
    return [FaceAngle(*t) for t in sorted(triples)]


def dihedral_pool(poly: AbstractPolyhedron) -> list[DihedralAngle]:
    return [DihedralAngle(f, g) for f, g in poly.adjacent_faces()]


MEASUREMENT_POOLS = {
    "face-distances": face_distance_pool,
    "face-angles": face_angle_pool,
    "dihedrals": dihedral_pool,
    "edges-only": edge_pool,
    "face-diagonals": face_diagonal_pool,
}


def build_pool(poly: AbstractPolyhedron, name: str) -> list[Measurement3D]:
    if name == "all":
        out: list[Measurement3D] = []
        out += face_distance_pool(poly)
        out += face_angle_pool(poly)
        out += dihedral_pool(poly)
        return out
    try:
        return MEASUREMENT_POOLS[name](poly)
    except KeyError:
        raise ValueError(
            f"unknown pool {name!r}; choose from "
            f"{sorted(MEASUREMENT_POOLS) + ['all']}"
        ) from None


# --- realization construction ----------------------------------------------


def fit_realization(
    poly: AbstractPolyhedron,
    coords: np.ndarray,
    planarity_tol: float = PLANARITY_TOL,
) -> Realization:
    """Build a realization from vertex coordinates alone.

    Recenters the coordinates at the vertex centroid, then least-squares
    fits a x + b y + c z = 1 over each face's vertices. The fit residual
    |a x_i + ... - 1| is dimensionless; if it exceeds planarity_tol for
    some face, NonPlanarFace is raised. Collinear face vertices raise
    DegenerateFace.
    """
    coords = np.asarray(coords, dtype=float)
    if coords.shape != (poly.vertex_count, 3):
        raise ValueError(
            f"expected coords of shape {(poly.vertex_count, 3)}, got {coords.shape}"
        )
    centered = coords - coords.mean(axis=0)
    scale = max(np.linalg.norm(centered, axis=1).max(), 1e-300)

    planes = np.empty((poly.face_count, 3))
    for j, cycle in enumerate(poly.faces):
        pts = centered[list(cycle)]
        spread = pts - pts.mean(axis=0)
        svals = np.linalg.svd(spread, compute_uv=False)
        if svals[1] <= 1e-12 * scale:
            raise DegenerateFace(f"face {j} vertices are collinear")
        n, *_ = np.linalg.lstsq(pts, np.ones(len(cycle)), rcond=None)
        residual = float(np.abs(pts @ n - 1.0).max())
        if residual > planarity_tol:
            raise NonPlanarFace(j, residual)
        planes[j] = n
    return Realization(centered, planes)


# --- incidence constraint map ------------------------------------------------


def phi(poly: AbstractPolyhedron, real: Realization) -> np.ndarray:
    """Incidence residuals a_j x_i + b_j y_i + c_j z_i - 1 over all pairs."""
    vals = np.empty(len(poly.incidence))
    for k, (i, j) in enumerate(poly.incidence):
        vals[k] = real.planes[j] @ real.vertices[i] - 1.0
    return vals


def d_phi(poly: AbstractPolyhedron, real: Realization) -> np.ndarray:
    """Exact Jacobian of phi, shape (2E, 3V + 3F).

    The row for pair (v_i, f_j) carries (a_j, b_j, c_j) in vertex block i
    and (x_i, y_i, z_i) in plane block j.
    """
    n = 3 * real.vertex_count + 3 * real.face_count
    out = np.zeros((len(poly.incidence), n))
    off = 3 * real.vertex_count
    for k, (i, j) in enumerate(poly.incidence):
        out[k, 3 * i : 3 * i + 3] = real.planes[j]
        out[k, off + 3 * j : off + 3 * j + 3] = real.vertices[i]
    return out


# --- measurement evaluation ---------------------------------------------------


def _angle_between(u: np.ndarray, v: np.ndarray) -> tuple[float, np.ndarray, np.ndarray]:
    """Angle in [0, pi] between u and v plus its gradients wrt u and v.

    Raises DegenerateMeasurement at zero vectors or (anti)parallel rays,
    where the angle is not differentiable.
    """
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu < 1e-300 or nv < 1e-300:
        raise DegenerateMeasurement("zero-length ray")
    cross = np.cross(u, v)
    s = np.linalg.norm(cross)
    c = float(u @ v)
    theta = float(np.arctan2(s, c))
    if s < 1e-14 * nu * nv:
        raise DegenerateMeasurement("rays are parallel; angle gradient undefined")
    du = (c * u / nu ** 2 - v) / s
    dv = (c * v / nv ** 2 - u) / s
    return theta, du, dv


def evaluate(m: Measurement3D, real: Realization) -> float:
    """Value of one measurement at a realization."""
    if isinstance(m, FaceDistance):
        d = real.vertices[m.v] - real.vertices[m.w]
        r = float(np.linalg.norm(d))
        if r < 1e-300:
            raise DegenerateMeasurement(f"vertices {m.v} and {m.w} coincide")
        return r
    if isinstance(m, FaceAngle):
        u = real.vertices[m.end1] - real.vertices[m.apex]
        v = real.vertices[m.end2] - real.vertices[m.apex]
        nu, nv = np.linalg.norm(u), np.linalg.norm(v)
        if nu < 1e-300 or nv < 1e-300:
            raise DegenerateMeasurement("zero-length ray at face angle apex")
        return float(np.arctan2(np.linalg.norm(np.cross(u, v)), u @ v))
    if isinstance(m, DihedralAngle):
        nf, ng = real.planes[m.f], real.planes[m.g]
        lf, lg = np.linalg.norm(nf), np.linalg.norm(ng)
        if lf < 1e-300 or lg < 1e-300:
            raise DegenerateMeasurement("zero plane coefficient vector")
        s = np.linalg.norm(np.cross(nf, ng))
        c = float(nf @ ng)
        if s < 1e-14 * lf * lg:
            raise DegenerateMeasurement("parallel planes have no dihedral angle")
        return float(np.pi - np.arctan2(s, c))
    raise TypeError(f"not a 3D measurement: {m!r}")


def gradient(m: Measurement3D, real: Realization) -> np.ndarray:
    """Exact gradient of one measurement wrt the full coordinate vector."""
    n = 3 * real.vertex_count + 3 * real.face_count
    g = np.zeros(n)
    off = 3 * real.vertex_count
    if isinstance(m, FaceDistance):
        d = real.vertices[m.v] - real.vertices[m.w]
        r = np.linalg.norm(d)
        if r < 1e-300:
            raise DegenerateMeasurement(f"vertices {m.v} and {m.w} coincide")
        g[3 * m.v : 3 * m.v + 3] = d / r
        g[3 * m.w : 3 * m.w + 3] = -d / r
        return g
    if isinstance(m, FaceAngle):
        u = real.vertices[m.end1] - real.vertices[m.apex]
        v = real.vertices[m.end2] - real.vertices[m.apex]
        _, du, dv = _angle_between(u, v)
        g[3 * m.end1 : 3 * m.end1 + 3] = du
        g[3 * m.end2 : 3 * m.end2 + 3] = dv
        g[3 * m.apex : 3 * m.apex + 3] = -(du + dv)
        return g
    if isinstance(m, DihedralAngle):
        _, dnf, dng = _angle_between(real.planes[m.f], real.planes[m.g])
        g[off + 3 * m.f : off + 3 * m.f + 3] = -dnf
        g[off + 3 * m.g : off + 3 * m.g + 3] = -dng
        return g
    raise TypeError(f"not a 3D measurement: {m!r}")


def evaluate_all(measurements: Sequence[Measurement3D], real: Realization) -> np.ndarray:
    return np.array([evaluate(m, real) for m in measurements])


def gradient_rows(measurements: Sequence[Measurement3D], real: Realization) -> np.ndarray:
    if not measurements:
        return np.zeros((0, 3 * real.vertex_count + 3 * real.face_count))
    return np.vstack([gradient(m, real) for m in measurements])


# --- canonical frame ----------------------------------------------------------


def _canonical_rotation(vertices: np.ndarray) -> np.ndarray:
    """Proper rotation M (rows = new axes) aligning v_2 - v_1 with +x and
    putting v_3 - v_1 into the xy-plane with positive y."""
    d1 = vertices[1] - vertices[0]
    d2 = vertices[2] - vertices[0]
    n1 = np.linalg.norm(d1)
    if n1 < 1e-300:
        raise CollinearFrame("first two vertices coincide")
    ex = d1 / n1
    zraw = np.cross(ex, d2)
    nz = np.linalg.norm(zraw)
    if nz < 1e-12 * max(np.linalg.norm(d2), 1.0):
        raise CollinearFrame("first three vertices are collinear")
    ez = zraw / nz
    ey = np.cross(ez, ex)
    return np.vstack([ex, ey, ez])


def normalize(poly: AbstractPolyhedron, real: Realization) -> Realization:
    """Move a realization to its canonical frame.

    The canonical frame puts the vertex centroid at the origin, v_2 - v_1
    along the positive x-axis, and v_3 - v_1 into the xy-plane with positive
    y-component. This is a complete invariant for proper congruence of
    labeled realizations: two realizations are properly congruent exactly
    when their canonical frames carry identical coordinates. The centroid
    (not v_1) anchors the translation so that no face plane passes through
    the origin and the plane chart stays valid; in the canonical frame
    y_1 = y_2, z_1 = z_2 = z_3, x_1 < x_2 and y_1 < y_3 all hold.
    """
    center = real.vertices.mean(axis=0)
    M = _canonical_rotation(real.vertices)
    verts = (real.vertices - center) @ M.T
    denom = 1.0 - real.planes @ center
    if np.any(np.abs(denom) < 1e-12):
        raise DegenerateFace("a face plane passes through the vertex centroid")
    planes = (real.planes @ M.T) / denom[:, None]
    return Realization(verts, planes)


def congruent(
    poly: AbstractPolyhedron,
    r1: Realization,
    r2: Realization,
    tol: float = 1e-8,
    allow_reflection: bool = False,
) -> bool:
    """Whether two labeled realizations differ by a proper rigid motion.

    Both are moved to the canonical frame and vertex coordinates compared;
    max vertex distance <= tol means congruent. With allow_reflection a
    mirror image of r2 is tried as well.
    """
    a = normalize(poly, r1).vertices
    b = normalize(poly, r2).vertices
    if float(np.linalg.norm(a - b, axis=1).max()) <= tol:
        return True
    if allow_reflection:
        mirrored = Realization(r2.vertices * np.array([1.0, 1.0, -1.0]),
                               r2.planes * np.array([1.0, 1.0, -1.0]))
        c = normalize(poly, mirrored).vertices
        return float(np.linalg.norm(a - c, axis=1).max()) <= tol
    return False
