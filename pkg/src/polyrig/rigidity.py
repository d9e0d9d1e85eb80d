"""Rank-based sufficiency analysis of measurement sets.

For a realization of a polyhedron with V vertices, F faces and E edges,
the planarity map phi has a 2E x (3V+3F) Jacobian of rank 2E, and each
measurement contributes one gradient row (dPsi). Every row annihilates
the (3V+3F) x g matrix G whose columns generate the rigid-motion orbit
(g = 6) or the similarity orbit (g = 7), so the stacked matrix has rank
at most 3E = (3V+3F) - 6, respectively 3E - 1. Hitting that ceiling is
equivalent to the measurements locally determining the realization up to
the motion group, which reduces the geometric question to numeric rank.

Beyond the rank tests this module provides the greedy extraction of a
minimal sufficient subset (accept a measurement exactly when its gradient
row leaves the span built so far), a first-order flex witness for
insufficient sets (perturb along a kernel direction orthogonal to G, then
project back onto the constraint set), and a restart-based global witness
search for labeled point configurations, which covers claims that are
invisible to first-order rank analysis.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ._nlsq import gauss_newton_project, lm_solve
from .errors import (
    NoConvergedRestarts,
    NoKernelDirection,
    ProjectionDiverged,
)
from .geometry import (
    FaceDistance,
    Measurement3D,
    Realization,
    d_phi,
    evaluate_all,
    gradient_rows,
    normalize,
    phi,
)
from .incidence import AbstractPolyhedron
from .pointsets import (
    Coplanar,
    SimpleMeasurement,
    align_distance,
    diameter,
    measurement_gradient,
    measurement_value,
)

CONGRUENCE = "congruence"
SIMILARITY = "similarity"

DEFAULT_TOL_REL = 1e-9


def _motion_dim(mode: str) -> int:
    if mode == CONGRUENCE:
        return 6
    if mode == SIMILARITY:
        return 7
    raise ValueError(f"mode must be {CONGRUENCE!r} or {SIMILARITY!r}, got {mode!r}")


def _check_mode_pool(
    measurements: Sequence[Measurement3D], mode: str, allow_scale_variant: bool
) -> None:
    if mode == SIMILARITY and not allow_scale_variant:
        for m in measurements:
            if isinstance(m, FaceDistance):
                raise ValueError(
                    "similarity mode expects scale-invariant (angle) measurements; "
                    "pass allow_scale_variant=True to include distances anyway"
                )


def _unit_diameter(real: Realization) -> Realization:
    return real.rescaled(1.0 / real.diameter())


# --- generator matrices -------------------------------------------------------


def congruence_generators(poly: AbstractPolyhedron, real: Realization) -> np.ndarray:
    """(3V+3F) x 6 matrix whose columns are the infinitesimal rigid motions.

    Translation along axis e moves every vertex by e and every plane
    coefficient vector n by -(n.e) n; rotation with angular velocity w moves
    a vertex p by w x p and a plane vector n by w x n.
    """
    X, P = real.vertices, real.planes
    nv = 3 * real.vertex_count
    G = np.zeros((nv + 3 * real.face_count, 6))
    for axis in range(3):
        G[axis:nv:3, axis] = 1.0
        G[nv:, axis] = (-P[:, axis : axis + 1] * P).ravel()
    for k, omega in enumerate(np.eye(3)):
        G[:nv, 3 + k] = np.cross(np.broadcast_to(omega, X.shape), X).ravel()
        G[nv:, 3 + k] = np.cross(np.broadcast_to(omega, P.shape), P).ravel()
    return G


def similarity_generators(poly: AbstractPolyhedron, real: Realization) -> np.ndarray:
    """The six congruence columns plus uniform scaling: vertices move by
    (x, y, z), plane coefficients by (-a, -b, -c)."""
    scaling = np.concatenate([real.vertices.ravel(), -real.planes.ravel()])
    return np.hstack([congruence_generators(poly, real), scaling[:, None]])


def motion_generators(poly: AbstractPolyhedron, real: Realization, mode: str) -> np.ndarray:
    if _motion_dim(mode) == 6:
        return congruence_generators(poly, real)
    return similarity_generators(poly, real)


def normalization_rows(poly: AbstractPolyhedron, real: Realization) -> np.ndarray:
    """6 x (3V+3F) unit selector rows for x_1, y_1, z_1, y_2, z_2, z_3.

    These are the derivatives of the six pinning functions that kill the
    rigid-motion freedom of a realization in canonical frame; paired with
    the generators G they form a 6x6 block with determinant
    (y_3 - y_1)(x_2 - x_1)^2, nonzero whenever the first three vertices
    are not collinear.
    """
    if real.vertex_count < 3:
        raise ValueError("need at least three vertices")
    rows = np.zeros((6, 3 * real.vertex_count + 3 * real.face_count))
    for r, index in enumerate((0, 1, 2, 4, 5, 8)):
        rows[r, index] = 1.0
    return rows


@dataclass(frozen=True)
class RigidityBundle:
    """All four matrices of the rank analysis at one realization."""

    d_phi: np.ndarray
    d_psi: np.ndarray
    generators: np.ndarray
    d_chi: np.ndarray
    mode: str


def rigidity_bundle(
    poly: AbstractPolyhedron,
    real: Realization,
    measurements: Sequence[Measurement3D],
    mode: str = CONGRUENCE,
    allow_scale_variant: bool = False,
) -> RigidityBundle:
    _check_mode_pool(measurements, mode, allow_scale_variant)
    return RigidityBundle(
        d_phi=d_phi(poly, real),
        d_psi=gradient_rows(measurements, real),
        generators=motion_generators(poly, real, mode),
        d_chi=normalization_rows(poly, real),
        mode=mode,
    )


# --- rank tests ---------------------------------------------------------------


def numeric_rank(M: np.ndarray, tol_rel: float = DEFAULT_TOL_REL) -> int:
    """Number of singular values above tol_rel times the largest one."""
    M = np.asarray(M, dtype=float)
    if M.size == 0:
        return 0
    s = np.linalg.svd(M, compute_uv=False)
    if s[0] <= 0.0:
        return 0
    return int(np.count_nonzero(s > tol_rel * s[0]))


@dataclass(frozen=True)
class SufficiencyReport:
    mode: str
    edge_count: int
    achieved_rank: int
    target_rank: int
    sufficient: bool
    flex_dimension: int
    selected: tuple[Measurement3D, ...] | None
    tolerance_used: float


def is_sufficient(
    poly: AbstractPolyhedron,
    real: Realization,
    measurements: Sequence[Measurement3D],
    mode: str = CONGRUENCE,
    tol_rel: float = DEFAULT_TOL_REL,
    allow_scale_variant: bool = False,
) -> SufficiencyReport:
    """Rank test: stack d_phi with the measurement gradient rows and compare
    the numeric rank against 3E (congruence) or 3E - 1 (similarity).

    The model is rescaled to unit diameter before the SVD so tol_rel acts on
    a well-conditioned matrix regardless of input units.
    """
    g = _motion_dim(mode)
    _check_mode_pool(measurements, mode, allow_scale_variant)
    scaled = _unit_diameter(real)
    stack = np.vstack([d_phi(poly, scaled), gradient_rows(measurements, scaled)])
    rank = numeric_rank(stack, tol_rel)
    target = 3 * poly.edge_count - (0 if g == 6 else 1)
    # rank > target happens only in similarity mode with scale-variant
    # measurements admitted: scale is then pinned too, which determines the
    # shape a fortiori, so the flex count is clamped rather than negative
    return SufficiencyReport(
        mode=mode,
        edge_count=poly.edge_count,
        achieved_rank=rank,
        target_rank=target,
        sufficient=rank >= target,
        flex_dimension=max(0, stack.shape[1] - rank - g),
        selected=None,
        tolerance_used=tol_rel,
    )


def greedy_minimal_subset(
    poly: AbstractPolyhedron,
    real: Realization,
    pool: Sequence[Measurement3D],
    mode: str = CONGRUENCE,
    tol_rel: float = DEFAULT_TOL_REL,
    allow_scale_variant: bool = False,
) -> SufficiencyReport:
    """Scan the pool once, keeping a measurement exactly when its gradient
    row is independent of the span of d_phi plus rows kept so far.

    Independence is decided by the projection residual: the row is accepted
    when its component orthogonal to the current basis exceeds tol_rel times
    the row norm (with one reorthogonalization pass for stability). When the
    pool is sufficient, the selection has exactly targetRank - 2E elements:
    E measurements for congruence, E - 1 for similarity.
    """
    g = _motion_dim(mode)
    _check_mode_pool(pool, mode, allow_scale_variant)
    if not pool:
        raise ValueError("pool is empty")
    scaled = _unit_diameter(real)
    A = d_phi(poly, scaled)
    _, svals, Vt = np.linalg.svd(A, full_matrices=False)
    base_rank = int(np.count_nonzero(svals > tol_rel * svals[0]))
    basis = Vt[:base_rank]

    target = 3 * poly.edge_count - (0 if g == 6 else 1)
    rank = base_rank
    selected: list[Measurement3D] = []
    for m in pool:
        if rank >= target:
            break
        row = gradient_rows([m], scaled)[0]
        row_norm = np.linalg.norm(row)
        if row_norm == 0.0:
            continue
        res = row - basis.T @ (basis @ row)
        res -= basis.T @ (basis @ res)
        res_norm = np.linalg.norm(res)
        if res_norm > tol_rel * row_norm:
            basis = np.vstack([basis, res / res_norm])
            selected.append(m)
            rank += 1

    return SufficiencyReport(
        mode=mode,
        edge_count=poly.edge_count,
        achieved_rank=rank,
        target_rank=target,
        sufficient=rank == target,
        flex_dimension=basis.shape[1] - rank - g,
        selected=tuple(selected),
        tolerance_used=tol_rel,
    )


# --- witnesses ----------------------------------------------------------------


def flex_witness(
    poly: AbstractPolyhedron,
    real: Realization,
    measurements: Sequence[Measurement3D],
    mode: str = CONGRUENCE,
    step: float = 1e-2,
    max_iter: int = 100,
    tol_rel: float = DEFAULT_TOL_REL,
    allow_scale_variant: bool = False,
) -> Realization | None:
    """Construct a nearby non-congruent realization with identical measurements.

    Requires the set to be insufficient. Picks a unit kernel direction of
    stack(d_phi, d_psi) orthogonal to the motion generators, steps away by
    `step`, and Gauss-Newton-projects back onto {phi = 0, psi = psi(R)} to
    residual 1e-10. Returns the projected realization when it is genuinely
    non-congruent to the input (normalized vertex distance > 10 * tol_rel),
    or None when the projection slides back to the start, the signature of
    a flex that exists to first order only.
    """
    report = is_sufficient(poly, real, measurements, mode, tol_rel, allow_scale_variant)
    if report.sufficient:
        raise NoKernelDirection("measurement set is sufficient; nothing to flex")

    stack = np.vstack([d_phi(poly, real), gradient_rows(measurements, real)])
    _, svals, Vt = np.linalg.svd(stack)
    rank = int(np.count_nonzero(svals > tol_rel * svals[0]))
    kernel = Vt[rank:]
    G = motion_generators(poly, real, mode)
    QG, _ = np.linalg.qr(G)
    K = kernel.T - QG @ (QG.T @ kernel.T)
    Uk, sk, _ = np.linalg.svd(K, full_matrices=False)
    if sk.size == 0 or sk[0] < 0.5:
        raise NoKernelDirection("kernel contains only trivial motions")
    u = Uk[:, 0]
    pivot = int(np.argmax(np.abs(u)))
    if u[pivot] < 0:
        u = -u

    targets = evaluate_all(measurements, real)
    nv, nf = real.vertex_count, real.face_count

    def resid(x: np.ndarray) -> np.ndarray:
        r = Realization.from_coordinate_vector(x, nv, nf)
        return np.concatenate([phi(poly, r), evaluate_all(measurements, r) - targets])

    def jac(x: np.ndarray) -> np.ndarray:
        r = Realization.from_coordinate_vector(x, nv, nf)
        return np.vstack([d_phi(poly, r), gradient_rows(measurements, r)])

    x0 = real.coordinate_vector() + step * u
    x, ok = gauss_newton_project(
        resid, jac, x0, max_iter=max_iter, target=1e-10,
        max_travel=100.0 * (step + real.diameter()),
    )
    if not ok:
        raise ProjectionDiverged(
            f"projection did not reach residual 1e-10 in {max_iter} iterations"
        )
    result = Realization.from_coordinate_vector(x, nv, nf)
    a = normalize(poly, real).vertices
    b = normalize(poly, result).vertices
    dist = float(np.linalg.norm(a - b, axis=1).max())
    if dist > 10.0 * tol_rel:
        return result
    return None


@dataclass(frozen=True)
class PointCluster:
    representative: np.ndarray
    count: int
    distance_to_reference: float


@dataclass(frozen=True)
class PointWitnessReport:
    witness: np.ndarray | None
    clusters: tuple[PointCluster, ...]
    converged: int
    escaped: int
    restarts: int
    residual_tol: float
    cluster_tol: float
    witness_tol: float

    @property
    def determined(self) -> bool:
        return self.witness is None


def point_set_witness(
    dim: int,
    points: np.ndarray,
    measurements: Sequence[SimpleMeasurement],
    restarts: int = 200,
    seed: int = 0,
    noise: float = 0.5,
    coplanar: Sequence[tuple[int, int, int, int]] = (),
    allow_reflection: bool | None = None,
    residual_tol: float = 1e-10,
    cluster_tol: float = 1e-6,
    witness_tol: float = 1e-4,
    locality: float | None = None,
    max_iter: int = 250,
) -> PointWitnessReport:
    """Uniqueness oracle for a labeled point configuration.

    Solves {measurement residuals = 0} by Levenberg-Marquardt from `restarts`
    perturbed copies of the reference (Gaussian noise of scale noise *
    diameter, per-restart generator seeded by (seed, restart index)), keeps
    solutions with residual <= residual_tol, and clusters them modulo rigid
    motions (reflections allowed by default in 2D only, where unsigned
    measurements cannot tell mirror images apart). The witness is a
    representative of any cluster farther than witness_tol * scale from the
    reference; None means every converged restart came back to the
    reference, i.e. the set is determined at oracle scale.

    witness_tol is deliberately coarser than cluster_tol: near a
    second-order-determined configuration the residual grows only
    quadratically with shape distance, so solutions at residual_tol can
    scatter up to sqrt(residual_tol) from the true point without being
    different shapes in any meaningful sense.

    `locality`, when given, bounds the search to a neighborhood: converged
    solutions farther than locality * scale from the reference are counted
    in `escaped` and ignored. This is the oracle for claims that are local
    by definition, where distant discrete solutions (a reflected tail of a
    staircase polygon, say) do not refute anything.

    `coplanar` quadruples add side constraints [q-p, r-p, s-p] = 0 for 3D
    searches whose claims presume planar faces.
    """
    if dim not in (2, 3):
        raise ValueError(f"dim must be 2 or 3, got {dim}")
    ref = np.asarray(points, dtype=float)
    if ref.ndim != 2 or ref.shape[1] != dim:
        raise ValueError(f"points must be (n, {dim}), got {ref.shape}")
    if coplanar and dim != 3:
        raise ValueError("coplanarity constraints need dim = 3")
    if allow_reflection is None:
        allow_reflection = dim == 2

    side = [Coplanar(*q) for q in coplanar]
    for c in side:
        if abs(measurement_value(c, ref)) > 1e-8:
            raise ValueError(f"reference violates coplanarity constraint {c}")
    constraints = list(measurements) + side
    targets = np.array(
        [measurement_value(m, ref) for m in measurements] + [0.0] * len(side)
    )

    n = ref.shape[0]
    diam = diameter(ref)
    scale = max(1.0, diam)

    def resid(x: np.ndarray) -> np.ndarray:
        pts = x.reshape(n, dim)
        return np.array([measurement_value(m, pts) for m in constraints]) - targets

    def jac(x: np.ndarray) -> np.ndarray:
        pts = x.reshape(n, dim)
        return np.vstack([measurement_gradient(m, pts) for m in constraints])

    reps: list[np.ndarray] = [ref]
    counts: list[int] = [0]
    dists: list[float] = [0.0]
    converged = 0
    escaped = 0
    for i in range(restarts):
        rng = np.random.default_rng([seed, i])
        x0 = (ref + noise * diam * rng.standard_normal(ref.shape)).ravel()
        x, r = lm_solve(resid, jac, x0, max_iter=max_iter, target=residual_tol * 1e-2)
        if np.abs(r).max() > residual_tol:
            continue
        # polish: in a quadratic residual valley, stopping at residual_tol
        # leaves the iterate ~sqrt(residual_tol) off the solution; a second
        # pass with a far tighter target collapses that smear
        x, _ = lm_solve(resid, jac, x, max_iter=80, target=1e-15)
        converged += 1
        sol = x.reshape(n, dim)
        if locality is not None and (
            align_distance(ref, sol, allow_reflection) > locality * scale
        ):
            escaped += 1
            converged -= 1
            continue
        for k, rep in enumerate(reps):
            if align_distance(rep, sol, allow_reflection) <= cluster_tol * scale:
                counts[k] += 1
                break
        else:
            reps.append(sol)
            counts.append(1)
            dists.append(align_distance(ref, sol, allow_reflection))

    if converged == 0:
        raise NoConvergedRestarts(
            f"no restart reached residual {residual_tol:g} in {restarts} tries"
        )

    witness = None
    for rep, d in zip(reps, dists):
        if d > witness_tol * scale:
            witness = rep
            break
    clusters = tuple(
        PointCluster(representative=rep, count=c, distance_to_reference=d)
        for rep, c, d in zip(reps, counts, dists)
    )
    return PointWitnessReport(
        witness=witness,
        clusters=clusters,
        converged=converged,
        escaped=escaped,
        restarts=restarts,
        residual_tol=residual_tol,
        cluster_tol=cluster_tol,
        witness_tol=witness_tol,
    )
