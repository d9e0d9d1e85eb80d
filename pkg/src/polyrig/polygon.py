"""Planar point configurations: measurements, first-order sufficiency, and
the exceptional-polygon oracles.

A configuration of n labeled points, considered up to rigid motion, is
charted by pinning A_1 at the origin and A_2 on the positive x-axis,
leaving the free coordinates (x_2, x_3, y_3, ..., x_n, y_n) in R^(2n-3).
A measurement set is first-order sufficient when its gradient rows span
that space. Some determining sets are invisible to this rank test because
they pin the configuration only at second order; those are handled by
maximization oracles (a measured value sits at an extremum over the
remaining constraint variety) and by restart-based witness searches.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import optimize

from .errors import InfeasibleRadii, NotConvex, OracleInconclusive
from ._nlsq import lm_solve
from .pointsets import (
    Angle,
    DiagonalAngle,
    Distance,
    SimpleMeasurement,
    diameter,
    measurement_gradient,
    measurement_value,
)
from .rigidity import numeric_rank

__all__ = [
    "Angle",
    "DiagonalAngle",
    "Distance",
    "SimpleMeasurement",
    "PointConfig2D",
    "Sufficiency2DReport",
    "OctagonReport",
    "evaluate2d",
    "gradient2d",
    "sufficiency2d",
    "square_angle_oracle",
    "right_angle_quad_oracle",
    "max_diagonal_oracle",
    "staircase_polygon",
    "staircase_measurements",
    "octagon_distance_oracle",
    "regular_polygon",
]

GRID = 64  # grid points per angular parameter when seeding an oracle


@dataclass(frozen=True)
class PointConfig2D:
    """n labeled points in chart form: A_1 = (0,0), A_2 = (x_2, 0), x_2 > 0."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 2:
            raise ValueError(f"points must be (n >= 2, 2), got {pts.shape}")
        if np.abs(pts[0]).max() > 1e-12:
            raise ValueError("chart form requires A_1 = (0, 0)")
        if abs(pts[1, 1]) > 1e-12 or pts[1, 0] <= 0:
            raise ValueError("chart form requires A_2 = (x_2, 0) with x_2 > 0")
        d = pts[:, None, :] - pts[None, :, :]
        pair_min = np.sqrt((d ** 2).sum(axis=2))[np.triu_indices(pts.shape[0], 1)].min()
        if pair_min <= 0.0:
            raise ValueError("points must be pairwise distinct")
        pts[0] = 0.0
        pts[1, 1] = 0.0
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @staticmethod
    def from_points(points: np.ndarray) -> "PointConfig2D":
        """Chart-normalize an arbitrary labeled configuration by the proper
        rigid motion taking A_1 to the origin and A_2 onto the +x axis."""
        pts = np.asarray(points, dtype=float)
        shifted = pts - pts[0]
        r = np.linalg.norm(shifted[1])
        if r <= 0.0:
            raise ValueError("A_1 and A_2 coincide")
        c, s = shifted[1] / r
        rot = np.array([[c, s], [-s, c]])
        return PointConfig2D(shifted @ rot.T)

    def free_coords(self) -> np.ndarray:
        """(x_2, x_3, y_3, ..., x_n, y_n)."""
        return np.concatenate([[self.points[1, 0]], self.points[2:].ravel()])

    @staticmethod
    def from_free_coords(vec: np.ndarray) -> "PointConfig2D":
        vec = np.asarray(vec, dtype=float)
        if vec.size < 1 or vec.size % 2 != 1:
            raise ValueError("free coordinate vector must have odd length 2n-3")
        n = (vec.size + 3) // 2
        pts = np.zeros((n, 2))
        pts[1, 0] = vec[0]
        pts[2:] = vec[1:].reshape(n - 2, 2)
        return PointConfig2D(pts)


def evaluate2d(m: SimpleMeasurement, config: PointConfig2D) -> float:
    return measurement_value(m, config.points)


def gradient2d(m: SimpleMeasurement, config: PointConfig2D) -> np.ndarray:
    """Gradient with respect to the free chart coordinates only."""
    g = measurement_gradient(m, config.points).reshape(config.n, 2)
    return np.concatenate([[g[1, 0]], g[2:].ravel()])


@dataclass(frozen=True)
class Sufficiency2DReport:
    point_count: int
    achieved_rank: int
    target_rank: int
    sufficient: bool
    status: str
    tolerance_used: float


def sufficiency2d(
    config: PointConfig2D,
    measurements: Sequence[SimpleMeasurement],
    tol_rel: float = 1e-9,
) -> Sufficiency2DReport:
    """First-order sufficiency: do the gradient rows span R^(2n-3)?

    A deficient rank does not refute determination; sets that pin the
    configuration at second order (the square's four measurements, say)
    land here as "candidate for second-order determination" and are
    settled by oracles or witness searches instead.
    """
    scaled = PointConfig2D(config.points / diameter(config.points))
    rows = np.vstack([gradient2d(m, scaled) for m in measurements])
    rank = numeric_rank(rows, tol_rel)
    target = 2 * config.n - 3
    sufficient = rank == target
    status = (
        "sufficient"
        if sufficient
        else "not first-order sufficient; candidate for second-order determination"
    )
    return Sufficiency2DReport(
        point_count=config.n,
        achieved_rank=rank,
        target_rank=target,
        sufficient=sufficient,
        status=status,
        tolerance_used=tol_rel,
    )


# --- maximization oracles -------------------------------------------------------


def _refine_max(fval, fgrad, p0: np.ndarray) -> np.ndarray:
    res = optimize.minimize(
        lambda p: -fval(p),
        p0,
        jac=lambda p: -fgrad(p),
        method="BFGS",
        options={"gtol": 1e-13, "maxiter": 800},
    )
    return res.x


def square_angle_oracle(d: float) -> tuple[float, np.ndarray]:
    """Maximize the angle B'C'D' over all configurations with
    |A'B'| = |A'D'| = d and |A'C'| = d sqrt(2).

    The maximum is the right angle, attained exactly at the side-d square;
    that extremality is what makes the square's four measurements
    determining despite their rank deficiency. Dense grid over the two
    circle parameters, then gradient refinement. Returns (maxAngle, argmax)
    with argmax rows (A, B, C, D).
    """
    if d <= 0:
        raise ValueError("d must be positive")
    ac = d * np.sqrt(2.0)
    angle = Angle(1, 2, 3)

    def config(p: np.ndarray) -> np.ndarray:
        beta, delta = p
        return np.array(
            [
                [0.0, 0.0],
                [d * np.cos(beta), d * np.sin(beta)],
                [ac, 0.0],
                [d * np.cos(delta), d * np.sin(delta)],
            ]
        )

    def fval(p: np.ndarray) -> float:
        return measurement_value(angle, config(p))

    def fgrad(p: np.ndarray) -> np.ndarray:
        g = measurement_gradient(angle, config(p)).reshape(4, 2)
        db = d * np.array([-np.sin(p[0]), np.cos(p[0])])
        dd = d * np.array([-np.sin(p[1]), np.cos(p[1])])
        return np.array([g[1] @ db, g[3] @ dd])

    grid = np.linspace(-np.pi, np.pi, GRID, endpoint=False)
    best, best_val = None, -np.inf
    for beta in grid:
        for delta in grid:
            if abs(beta - delta) < 1e-9:
                continue
            v = fval(np.array([beta, delta]))
            if v > best_val:
                best, best_val = np.array([beta, delta]), v
    p = _refine_max(fval, fgrad, best)
    return fval(p), config(p)


def right_angle_quad_oracle(
    ab: float, ad: float, ac: float
) -> tuple[float, np.ndarray]:
    """Maximize angle BCD with |AC| = ac fixed, B on the circle of radius ab
    about A, D on the circle of radius ad, B and D on opposite sides of AC.

    At the maximum both rays CB, CD are tangent to their circles, which
    forces the right angles ABC = ADC = pi/2: the tangency quadrilateral is
    determined by four measurements although its rank test is deficient.
    """
    if not (0 < ab < ac) or not (0 < ad < ac):
        raise InfeasibleRadii(
            f"need 0 < |AB| < |AC| and 0 < |AD| < |AC|, got {ab}, {ad}, {ac}"
        )
    angle = Angle(1, 2, 3)

    def config(p: np.ndarray) -> np.ndarray:
        beta, delta = p
        return np.array(
            [
                [0.0, 0.0],
                [ab * np.cos(beta), ab * np.sin(beta)],
                [ac, 0.0],
                [ad * np.cos(delta), ad * np.sin(delta)],
            ]
        )

    def fval(p):
        return measurement_value(angle, config(p))

    def fgrad(p):
        g = measurement_gradient(angle, config(p)).reshape(4, 2)
        db = ab * np.array([-np.sin(p[0]), np.cos(p[0])])
        dd = ad * np.array([-np.sin(p[1]), np.cos(p[1])])
        return np.array([g[1] @ db, g[3] @ dd])

    lo = np.linspace(-np.pi, 0.0, GRID + 2)[1:-1]  # B strictly below the axis
    hi = np.linspace(0.0, np.pi, GRID + 2)[1:-1]  # D strictly above
    best, best_val = None, -np.inf
    for beta in lo:
        for delta in hi:
            v = fval(np.array([beta, delta]))
            if v > best_val:
                best, best_val = np.array([beta, delta]), v
    p = _refine_max(fval, fgrad, best)
    return fval(p), config(p)


def max_diagonal_oracle(
    bd: float, theta1: float, theta2: float
) -> tuple[float, np.ndarray]:
    """Maximize |AC| over quadrilaterals ABCD with |BD| = bd, angle DAB =
    theta1, angle DCB = theta2, A and C on opposite sides of BD.

    A sits on the arc of points seeing BD under theta1 (above), C on the
    theta2 arc below. At the maximum |AB| = |AD| and |CB| = |CD|; with
    theta1 = theta2 the maximizer is a rhombus. Returns (max|AC|, argmax)
    with rows (A, B, C, D).
    """
    if bd <= 0:
        raise ValueError("|BD| must be positive")
    if not (0 < theta1 < np.pi / 2) or not (0 < theta2 < np.pi / 2):
        raise ValueError("theta1 and theta2 must be acute")

    B = np.array([0.0, 0.0])
    D = np.array([bd, 0.0])
    r1 = bd / (2.0 * np.sin(theta1))
    k1 = bd / (2.0 * np.tan(theta1))
    r2 = bd / (2.0 * np.sin(theta2))
    k2 = bd / (2.0 * np.tan(theta2))
    c1 = np.array([bd / 2.0, k1])  # A's circle center (major arc above)
    c2 = np.array([bd / 2.0, -k2])  # C's circle center (major arc below)

    # major-arc parameter windows (through the top, resp. bottom, point)
    tb = np.arctan2(-k1, -bd / 2.0) + 2.0 * np.pi  # B seen from c1
    td = np.arctan2(-k1, bd / 2.0)  # D seen from c1
    ub = np.arctan2(k2, -bd / 2.0)
    ud = np.arctan2(k2, bd / 2.0)

    def config(p: np.ndarray) -> np.ndarray:
        t, u = p
        A = c1 + r1 * np.array([np.cos(t), np.sin(t)])
        C = c2 + r2 * np.array([np.cos(u), np.sin(u)])
        return np.array([A, B, C, D])

    dist = Distance(0, 2)

    def fval(p):
        return measurement_value(dist, config(p))

    def fgrad(p):
        g = measurement_gradient(dist, config(p)).reshape(4, 2)
        da = r1 * np.array([-np.sin(p[0]), np.cos(p[0])])
        dc = r2 * np.array([-np.sin(p[1]), np.cos(p[1])])
        return np.array([g[0] @ da, g[2] @ dc])

    ts = np.linspace(td, tb, GRID + 2)[1:-1]
    us = np.linspace(-2.0 * np.pi + ub, ud, GRID + 2)[1:-1]
    best, best_val = None, -np.inf
    for t in ts:
        for u in us:
            v = fval(np.array([t, u]))
            if v > best_val:
                best, best_val = np.array([t, u]), v
    p = _refine_max(fval, fgrad, best)
    return fval(p), config(p)


# --- staircase polygons ----------------------------------------------------------


def staircase_polygon(n: int, base: float, angles: Sequence[float]) -> PointConfig2D:
    """Fan of right triangles: right angle at A_k between A_1 and A_(k+1),
    angle alpha_k at A_(k+1), so |A_1 A_(k+1)| = |A_1 A_k| / sin(alpha_k).

    The polygon A_1...A_n is validated convex: all cross products of
    consecutive edges must share a sign (tolerance 1e-12).
    """
    if n < 3:
        raise ValueError("need n >= 3")
    angles = [float(a) for a in angles]
    if len(angles) != n - 2:
        raise ValueError(f"need {n - 2} angles for n = {n}, got {len(angles)}")
    if not all(0.0 < a < np.pi / 2.0 for a in angles):
        raise ValueError("each angle must lie strictly between 0 and pi/2")
    if base <= 0:
        raise ValueError("base length must be positive")

    pts = [np.array([0.0, 0.0]), np.array([base, 0.0])]
    for alpha in angles:
        prev = pts[-1]
        dist = np.linalg.norm(prev)
        ray = prev / dist
        step = dist / np.tan(alpha)
        pts.append(prev + step * np.array([-ray[1], ray[0]]))
    coords = np.array(pts)

    edges = np.roll(coords, -1, axis=0) - coords
    nxt = np.roll(edges, -1, axis=0)
    crosses = edges[:, 0] * nxt[:, 1] - edges[:, 1] * nxt[:, 0]
    if not (np.all(crosses > 1e-12) or np.all(crosses < -1e-12)):
        raise NotConvex(
            "consecutive-edge cross products change sign; the staircase wraps "
            "past a straight angle at A_1"
        )
    return PointConfig2D(coords)


def staircase_measurements(n: int) -> list[SimpleMeasurement]:
    """The n determining measurements of a staircase polygon:
    |A_1A_2|, |A_1A_n|, and the apex angles A_k A_(k+1) A_1."""
    out: list[SimpleMeasurement] = [Distance(0, 1), Distance(0, n - 1)]
    out += [Angle(k - 1, k, 0) for k in range(2, n)]
    return out


# --- octagon ----------------------------------------------------------------------


def regular_polygon(n: int, side: float = 1.0) -> PointConfig2D:
    """Regular n-gon with given side, chart-normalized."""
    if n < 3:
        raise ValueError("need n >= 3")
    radius = side / (2.0 * np.sin(np.pi / n))
    ang = 2.0 * np.pi * np.arange(n) / n
    pts = radius * np.column_stack([np.cos(ang), np.sin(ang)])
    return PointConfig2D.from_points(pts)


def octagon_measurements() -> list[SimpleMeasurement]:
    """8 sides plus |A_1A_5|, |A_8A_6|, |A_2A_4|, |A_3A_7| (1-based labels)."""
    sides: list[SimpleMeasurement] = [Distance(i, (i + 1) % 8) for i in range(8)]
    return sides + [Distance(0, 4), Distance(7, 5), Distance(1, 3), Distance(2, 6)]


@dataclass(frozen=True)
class OctagonReport:
    regular_value: float
    max_value: float
    maximizer: np.ndarray
    constraint_residual: float
    linkage_angle_a5_a1_a8: float
    linkage_angle_a6_a5_a1: float
    midpoint_distance: float


def octagon_distance_oracle(
    restarts: int = 24, seed: int = 0
) -> OctagonReport:
    """Corroborate the two maximality facts behind the octagon's
    12-distance determination.

    (i) Over all configurations matching the 8 sides and the diagonals
    |A_1A_5|, |A_8A_6|, |A_2A_4| of the regular side-1 octagon, maximize
    |A_3A_7| by restarted SLSQP (each maximizer polished back onto the
    constraint set): the maximum is the regular-octagon value.

    (ii) In the four-bar linkage A_1 A_5 A_6 A_8 (base |A_1A_5|, cranks of
    side length, coupler |A_6A_8|), the distance between the midpoints of
    A_1A_5 and A_6A_8 is maximal when both angles A_5 A_1 A_8 and
    A_6 A_5 A_1 equal 3 pi / 8.
    """
    reference = regular_polygon(8, 1.0).points
    meas = octagon_measurements()
    constraints = meas[:-1]  # all but |A_3A_7|
    objective = meas[-1]
    targets = np.array([measurement_value(m, reference) for m in constraints])
    regular_value = measurement_value(objective, reference)
    diam = diameter(reference)

    def c_fun(x: np.ndarray) -> np.ndarray:
        return (
            np.array([measurement_value(m, x.reshape(8, 2)) for m in constraints])
            - targets
        )

    def c_jac(x: np.ndarray) -> np.ndarray:
        pts = x.reshape(8, 2)
        return np.vstack([measurement_gradient(m, pts) for m in constraints])

    def neg_obj(x: np.ndarray) -> float:
        return -measurement_value(objective, x.reshape(8, 2))

    def neg_obj_grad(x: np.ndarray) -> np.ndarray:
        return -measurement_gradient(objective, x.reshape(8, 2))

    best_val, best_x = -np.inf, None
    for i in range(restarts):
        rng = np.random.default_rng([seed, i])
        x0 = (reference + 0.05 * diam * rng.standard_normal(reference.shape)).ravel()
        res = optimize.minimize(
            neg_obj,
            x0,
            jac=neg_obj_grad,
            method="SLSQP",
            constraints=[{"type": "eq", "fun": c_fun, "jac": c_jac}],
            options={"maxiter": 400, "ftol": 1e-14},
        )
        # polish onto the constraint variety regardless of SLSQP's verdict
        x, r = lm_solve(c_fun, c_jac, res.x, max_iter=120, target=1e-13)
        if np.abs(r).max() > 1e-10:
            continue
        val = -neg_obj(x)
        if val > best_val:
            best_val, best_x = val, x
    if best_x is None:
        raise OracleInconclusive("no SLSQP restart satisfied the 11 constraints")
    residual = float(np.abs(c_fun(best_x)).max())

    # (ii) the four-bar linkage, parametrized by theta = angle A_5 A_1 A_8
    side = 1.0
    d15 = measurement_value(Distance(0, 4), reference)
    d68 = measurement_value(Distance(5, 7), reference)
    a1 = np.array([0.0, 0.0])
    a5 = np.array([d15, 0.0])
    mid_base = (a1 + a5) / 2.0

    def linkage(theta: float) -> tuple[np.ndarray, np.ndarray] | None:
        a8 = side * np.array([np.cos(theta), -np.sin(theta)])
        # intersect circle(a5, side) with circle(a8, d68)
        delta = a8 - a5
        dist2 = float(delta @ delta)
        dist = np.sqrt(dist2)
        if dist >= side + d68 or dist <= abs(side - d68):
            return None
        along = (dist2 + side * side - d68 * d68) / (2.0 * dist)
        h2 = side * side - along * along
        if h2 <= 0.0:
            return None
        h = np.sqrt(h2)
        base = a5 + along * delta / dist
        perp = np.array([-delta[1], delta[0]]) / dist
        a6 = base + h * perp  # positive-cross branch, matching the octagon
        return a6, a8

    def mid_dist(theta: float) -> float:
        link = linkage(theta)
        if link is None:
            return -np.inf
        a6, a8 = link
        return float(np.linalg.norm((a6 + a8) / 2.0 - mid_base))

    thetas = np.linspace(1e-3, np.pi - 1e-3, 2048)
    vals = np.array([mid_dist(t) for t in thetas])
    k = int(np.argmax(vals))
    lo, hi = thetas[max(k - 1, 0)], thetas[min(k + 1, len(thetas) - 1)]
    res = optimize.minimize_scalar(
        lambda t: -mid_dist(t), bounds=(lo, hi), method="bounded",
        options={"xatol": 1e-13},
    )
    theta_star = float(res.x)
    a6, a8 = linkage(theta_star)
    # angle A_6 A_5 A_1: apex a5 = row 1, rays to a6 = row 2 and a1 = row 0
    pts = np.array([a1, a5, a6, a8])
    second = measurement_value(Angle(2, 1, 0), pts)

    return OctagonReport(
        regular_value=float(regular_value),
        max_value=float(best_val),
        maximizer=best_x.reshape(8, 2),
        constraint_residual=residual,
        linkage_angle_a5_a1_a8=theta_star,
        linkage_angle_a6_a5_a1=float(second),
        midpoint_distance=float(mid_dist(theta_star)),
    )
