"""Constructors for concrete test solids.

Platonic solids come from their standard coordinate sets, with faces
recovered from the convex hull (hull facets merged by plane, cycles
ordered counterclockwise seen from outside). The two hexahedron families
produce combinatorial cubes whose twelve face diagonals all have the same
length: a base tetrahedron a_0..a_3 with edge sqrt(2) and an opposite
tetrahedron b_i = b_0 - L a_i, where L is a rotation constrained so that
all six quadrilateral faces are planar. Family a rotates about the (1,1,1)
axis (one parameter), family b about an axis in the xy-plane (two
parameters); each is valid on an explicit parameter region and degenerates
on its boundary.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
from scipy.spatial import ConvexHull

from .errors import NonQuadFace, OutOfValidityRegion, UnknownName
from .geometry import Realization, fit_realization
from .incidence import AbstractPolyhedron, build_incidence

GOLDEN = (1.0 + np.sqrt(5.0)) / 2.0


# --- generic convex-vertex face extraction -----------------------------------


def faces_from_convex_vertices(coords: np.ndarray) -> list[list[int]]:
    """Face cycles of the convex hull of `coords` (all points extreme).

    Hull facets sharing a plane are merged into one polygonal face; each
    cycle is ordered counterclockwise as seen from outside and starts at
    its smallest vertex id. Faces are sorted by their vertex id sets, so
    the output is deterministic.
    """
    coords = np.asarray(coords, dtype=float)
    hull = ConvexHull(coords)
    eqs = hull.equations

    groups: list[tuple[np.ndarray, set[int]]] = []
    for simplex, eq in zip(hull.simplices, eqs):
        for geq, members in groups:
            if np.abs(geq - eq).max() < 1e-8:
                members.update(simplex)
                break
        else:
            groups.append((eq, set(simplex)))

    faces = []
    for eq, members in groups:
        ids = sorted(members)
        normal = eq[:3]
        pts = coords[ids]
        center = pts.mean(axis=0)
        basis = _plane_basis(normal)
        ang = np.arctan2((pts - center) @ basis[1], (pts - center) @ basis[0])
        cycle = [ids[k] for k in np.argsort(ang)]
        if _cycle_normal(coords, cycle) @ normal < 0:
            cycle.reverse()
        start = cycle.index(min(cycle))
        faces.append(cycle[start:] + cycle[:start])
    faces.sort(key=lambda c: sorted(c))
    return faces


def _plane_basis(normal: np.ndarray) -> np.ndarray:
    n = normal / np.linalg.norm(normal)
    pick = np.eye(3)[np.argmin(np.abs(n))]
    u = np.cross(n, pick)
    u /= np.linalg.norm(u)
    return np.vstack([u, np.cross(n, u)])


def _cycle_normal(coords: np.ndarray, cycle: list[int]) -> np.ndarray:
    # Newell's formula; robust for any simple planar polygon
    n = np.zeros(3)
    for a, b in zip(cycle, cycle[1:] + cycle[:1]):
        p, q = coords[a], coords[b]
        n += np.cross(p, q)
    return n


def mesh_volume(poly: AbstractPolyhedron, real: Realization) -> float:
    """Enclosed volume by the divergence theorem over fan-triangulated,
    outward-oriented faces."""
    total = 0.0
    for cycle in poly.faces:
        pts = real.vertices[list(cycle)]
        for i in range(1, len(pts) - 1):
            total += float(pts[0] @ np.cross(pts[i], pts[i + 1]))
    return total / 6.0


# --- Platonic solids -----------------------------------------------------------


def _tetrahedron_coords():
    c = np.array(
        [[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]], dtype=float
    )
    return c, 2.0 * np.sqrt(2.0)


def _cube_coords():
    c = np.array(list(itertools.product((-1.0, 1.0), repeat=3)))
    return c, 2.0


def _octahedron_coords():
    c = np.vstack([np.eye(3), -np.eye(3)])
    return c, np.sqrt(2.0)


def _icosahedron_coords():
    pts = []
    for s1 in (-1.0, 1.0):
        for s2 in (-1.0, 1.0):
            v = (0.0, s1, s2 * GOLDEN)
            for shift in range(3):
                pts.append(np.roll(v, shift))
    return np.array(pts), 2.0


def _dodecahedron_coords():
    pts = [np.array(p, dtype=float) for p in itertools.product((-1.0, 1.0), repeat=3)]
    for s1 in (-1.0, 1.0):
        for s2 in (-1.0, 1.0):
            v = (0.0, s1 / GOLDEN, s2 * GOLDEN)
            for shift in range(3):
                pts.append(np.roll(np.array(v), shift))
    return np.array(pts), 2.0 / GOLDEN


_PLATONIC = {
    "tetrahedron": _tetrahedron_coords,
    "cube": _cube_coords,
    "octahedron": _octahedron_coords,
    "dodecahedron": _dodecahedron_coords,
    "icosahedron": _icosahedron_coords,
}


def platonic(name: str, scale: float = 1.0) -> tuple[AbstractPolyhedron, Realization]:
    """A Platonic solid with edge length `scale`."""
    if scale <= 0:
        raise ValueError("scale must be positive")
    try:
        builder = _PLATONIC[name]
    except KeyError:
        raise UnknownName(
            f"unknown solid {name!r}; choose from {sorted(_PLATONIC)}"
        ) from None
    coords, natural_edge = builder()
    coords = coords * (scale / natural_edge)
    poly = build_incidence(faces_from_convex_vertices(coords))
    return poly, fit_realization(poly, coords)


# --- equal-face-diagonal hexahedra ---------------------------------------------

# Base tetrahedron: a_0 at the origin, a_1..a_3 with pairwise distance sqrt(2).
TETRA_BASE = np.array(
    [[0.0, 0.0, 0.0], [0.0, 1.0, 1.0], [1.0, 0.0, 1.0], [1.0, 1.0, 0.0]]
)

# Combinatorial cube on vertex ids (a_0..a_3, b_0..b_3) = (0..3, 4..7) with
# alternating a/b cycles, consistently oriented (outward for the cube):
HEX_FACES = (
    (0, 7, 1, 6),
    (0, 5, 2, 7),
    (0, 6, 3, 5),
    (4, 2, 5, 3),
    (4, 3, 6, 1),
    (4, 1, 7, 2),
)


def _quat_rotation(q0: float, q1: float, q2: float, q3: float) -> np.ndarray:
    return np.array(
        [
            [1 - 2 * (q2 * q2 + q3 * q3), 2 * (q1 * q2 - q0 * q3), 2 * (q1 * q3 + q0 * q2)],
            [2 * (q1 * q2 + q0 * q3), 1 - 2 * (q1 * q1 + q3 * q3), 2 * (q2 * q3 - q0 * q1)],
            [2 * (q1 * q3 - q0 * q2), 2 * (q2 * q3 + q0 * q1), 1 - 2 * (q1 * q1 + q2 * q2)],
        ]
    )


@dataclass(frozen=True)
class HexahedronParams:
    """Parameters of an equal-face-diagonal hexahedron.

    family "a": rotation quaternion (q0, q1, q1, q1), valid for
    |q1| < 1/sqrt(12). family "b": quaternion (q0, q1, q2, 0), valid where
    |q1| + |q2| < 1/sqrt(2) and (1 - s^2)(1 - 2 s^2) > 2 |q1 q2| s^2 with
    s = |q1| + |q2|. q0 is the positive root making the quaternion unit.
    """

    family: str
    q1: float
    q2: float

    def __post_init__(self):
        if self.family not in ("a", "b"):
            raise ValueError(f"family must be 'a' or 'b', got {self.family!r}")
        if self.family == "a" and self.q2 != self.q1:
            raise ValueError("family a has q2 = q1 by definition")

    @property
    def q3(self) -> float:
        return self.q1 if self.family == "a" else 0.0

    @property
    def q0(self) -> float:
        rest = self.q1 ** 2 + self.q2 ** 2 + self.q3 ** 2
        return float(np.sqrt(max(1.0 - rest, 0.0)))

    def validate(self) -> None:
        if self.family == "a":
            if not abs(self.q1) < 1.0 / np.sqrt(12.0):
                raise OutOfValidityRegion(
                    f"family a needs |q1| < 1/sqrt(12) ~ 0.2887, got {self.q1}"
                )
            return
        s = abs(self.q1) + abs(self.q2)
        if not s < 1.0 / np.sqrt(2.0):
            raise OutOfValidityRegion(
                f"family b needs |q1| + |q2| < 1/sqrt(2), got {s:.4f}"
            )
        if not (1.0 - s * s) * (1.0 - 2.0 * s * s) > 2.0 * abs(self.q1 * self.q2) * s * s:
            raise OutOfValidityRegion(
                f"family b region inequality fails at q1={self.q1}, q2={self.q2}"
            )

    def rotation(self) -> np.ndarray:
        return _quat_rotation(self.q0, self.q1, self.q2, self.q3)


def _hexahedron(params: HexahedronParams, b0: np.ndarray) -> tuple[AbstractPolyhedron, Realization]:
    L = params.rotation()
    verts = np.vstack([TETRA_BASE, [b0 - L @ a for a in TETRA_BASE]])
    poly = build_incidence(HEX_FACES)
    return poly, fit_realization(poly, verts, planarity_tol=1e-10)


def hexahedron_family_a(q1: float) -> tuple[AbstractPolyhedron, Realization]:
    """One-parameter family with 3-fold symmetry about the (1,1,1) axis."""
    params = HexahedronParams("a", q1, q1)
    params.validate()
    b = (1.0 - 4.0 * q1 * q1) / (1.0 - 6.0 * q1 * q1)
    return _hexahedron(params, np.array([b, b, b]))


def hexahedron_family_b(q1: float, q2: float) -> tuple[AbstractPolyhedron, Realization]:
    """Two-parameter family with a plane of symmetry (rotation axis in the
    xy-plane)."""
    params = HexahedronParams("b", q1, q2)
    params.validate()
    q0 = params.q0
    b0 = np.array(
        [
            1.0 + q0 * q2 + q1 * q2 - q2 * q2 + 2.0 * q1 * q2 * q2 / q0,
            q0 * q0 - q0 * q1 + q1 * q2 + q2 * q2 - 2.0 * q1 * q1 * q2 / q0,
            q0 * q0 + q0 * q1 - q0 * q2 + 2.0 * q1 * q2,
        ]
    )
    return _hexahedron(params, b0)


def verify_equal_face_diagonals(poly: AbstractPolyhedron, real: Realization) -> float:
    """Max deviation of the 2F face-diagonal lengths from their mean.

    Every face must be a quadrilateral; for cycle (p, q, r, s) the diagonals
    are pr and qs.
    """
    lengths = []
    for f, cycle in enumerate(poly.faces):
        if len(cycle) != 4:
            raise NonQuadFace(f"face {f} has {len(cycle)} vertices, need 4")
        p, q, r, s = (real.vertices[i] for i in cycle)
        lengths.append(np.linalg.norm(p - r))
        lengths.append(np.linalg.norm(q - s))
    lengths = np.array(lengths)
    return float(np.abs(lengths - lengths.mean()).max())
