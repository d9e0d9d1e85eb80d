"""Realization fitting, the incidence map phi, measurements, normalization."""

import numpy as np
import pytest
from scipy.spatial.transform import Rotation

from polyrig.errors import (
    CollinearFrame,
    DegenerateMeasurement,
    NonPlanarFace,
)
from polyrig.generators import platonic
from polyrig.geometry import (
    DihedralAngle,
    FaceAngle,
    FaceDistance,
    Realization,
    build_pool,
    congruent,
    d_phi,
    evaluate,
    evaluate_all,
    fit_realization,
    gradient,
    normalize,
    phi,
)
from polyrig.incidence import build_incidence

CUBE_FACES = [
    (0, 1, 2, 3),
    (7, 6, 5, 4),
    (0, 4, 5, 1),
    (1, 5, 6, 2),
    (2, 6, 7, 3),
    (3, 7, 4, 0),
]

CUBE_COORDS = np.array(
    [
        [0, 0, 0], [1, 0, 0], [1, 1, 0], [0, 1, 0],
        [0, 0, 1], [1, 0, 1], [1, 1, 1], [0, 1, 1],
    ],
    dtype=float,
)


@pytest.fixture
def cube():
    poly = build_incidence(CUBE_FACES)
    return poly, fit_realization(poly, CUBE_COORDS)


def test_fit_realization_centers_and_zeroes_phi(cube):
    poly, real = cube
    assert np.abs(real.vertices.mean(axis=0)).max() < 1e-12
    assert np.abs(phi(poly, real)).max() < 1e-12


def test_fit_rejects_nonplanar_quad():
    coords = CUBE_COORDS.copy()
    coords[6, 2] += 1e-3  # bend the top face
    poly = build_incidence(CUBE_FACES)
    with pytest.raises(NonPlanarFace) as info:
        fit_realization(poly, coords)
    assert 0 <= info.value.face < 6
    assert info.value.residual > 1e-9


def test_fit_tolerance_is_relative_to_diameter(cube):
    poly, _ = cube
    coords = CUBE_COORDS * 1e6
    coords[6, 2] += 1.0  # same relative defect as 1e-6 on a unit cube
    with pytest.raises(NonPlanarFace):
        fit_realization(poly, coords)


def test_d_phi_matches_finite_differences(cube):
    poly, real = cube
    x0 = real.coordinate_vector()
    J = d_phi(poly, real)
    rng = np.random.default_rng(0)
    for _ in range(5):
        h = 1e-7
        d = rng.normal(size=x0.size)
        d /= np.linalg.norm(d)
        rp = Realization.from_coordinate_vector(x0 + h * d, 8, 6)
        rm = Realization.from_coordinate_vector(x0 - h * d, 8, 6)
        fd = (phi(poly, rp) - phi(poly, rm)) / (2 * h)
        assert np.abs(J @ d - fd).max() < 1e-8


def test_cube_measurement_values(cube):
    poly, real = cube
    assert evaluate(FaceDistance(0, 1), real) == pytest.approx(1.0)
    assert evaluate(FaceDistance(0, 2), real) == pytest.approx(np.sqrt(2))
    for apex, e1, e2 in poly.face_corner_triples():
        assert evaluate(FaceAngle(apex, e1, e2), real) == pytest.approx(np.pi / 2)
    for f, g in poly.adjacent_faces():
        assert evaluate(DihedralAngle(f, g), real) == pytest.approx(np.pi / 2)


def test_dodecahedron_dihedral(cube):
    poly, real = platonic("dodecahedron")
    want = np.arccos(-1 / np.sqrt(5))  # ~116.57 degrees
    for f, g in poly.adjacent_faces():
        assert evaluate(DihedralAngle(f, g), real) == pytest.approx(want, abs=1e-12)


def test_degenerate_angle_raises(cube):
    _, real = cube
    with pytest.raises(DegenerateMeasurement):
        evaluate(FaceAngle(0, 0, 1), real)


def test_measurements_invariant_under_rigid_motion(cube):
    poly, real = cube
    pool = build_pool(poly, "all")
    vals = evaluate_all(pool, real)
    rng = np.random.default_rng(3)
    for k in range(5):
        R = Rotation.random(random_state=k).as_matrix()
        t = rng.normal(size=3)
        moved = fit_realization(poly, real.vertices @ R.T + t)
        assert np.abs(evaluate_all(pool, moved) - vals).max() < 1e-10


def test_angles_scale_invariant_distances_linear(cube):
    poly, real = cube
    scaled = real.rescaled(3.7)
    assert np.abs(phi(poly, scaled)).max() < 1e-12
    for m in build_pool(poly, "face-angles")[:10]:
        assert evaluate(m, scaled) == pytest.approx(evaluate(m, real))
    for f, g in poly.adjacent_faces():
        m = DihedralAngle(f, g)
        assert evaluate(m, scaled) == pytest.approx(evaluate(m, real))
    for m in build_pool(poly, "face-distances")[:10]:
        assert evaluate(m, scaled) == pytest.approx(3.7 * evaluate(m, real))


def test_gradient_matches_finite_differences(cube):
    poly, real = cube
    x0 = real.coordinate_vector()
    ms = [FaceDistance(0, 2), FaceAngle(1, 0, 2), DihedralAngle(0, 2)]
    for m in ms:
        g = gradient(m, real)
        fd = np.zeros_like(x0)
        for i in range(x0.size):
            up, dn = x0.copy(), x0.copy()
            up[i] += 1e-6
            dn[i] -= 1e-6
            fd[i] = (
                evaluate(m, Realization.from_coordinate_vector(up, 8, 6))
                - evaluate(m, Realization.from_coordinate_vector(dn, 8, 6))
            ) / 2e-6
        assert np.abs(g - fd).max() / max(1.0, np.abs(g).max()) < 1e-8


def test_gradient_touches_expected_blocks(cube):
    poly, real = cube
    nv = real.vertex_count
    g = gradient(FaceDistance(0, 1), real)
    assert np.abs(g[3 * nv :]).max() == 0.0  # distances never touch planes
    g = gradient(DihedralAngle(0, 2), real)
    assert np.abs(g[: 3 * nv]).max() == 0.0  # dihedrals never touch vertices


def test_normalize_idempotent_and_canonical(cube):
    poly, real = cube
    n1 = normalize(poly, real)
    n2 = normalize(poly, n1)
    assert np.abs(n1.vertices - n2.vertices).max() < 1e-12
    assert np.abs(n1.planes - n2.planes).max() < 1e-12
    assert np.abs(phi(poly, n1)).max() < 1e-10
    # canonical frame: centroid at origin, v2-v1 along +x, v3 in upper half
    assert np.abs(n1.vertices.mean(axis=0)).max() < 1e-12
    d21 = n1.vertices[1] - n1.vertices[0]
    assert abs(d21[1]) < 1e-12 and abs(d21[2]) < 1e-12 and d21[0] > 0
    d31 = n1.vertices[2] - n1.vertices[0]
    assert abs(d31[2]) < 1e-12 and d31[1] > 0


def test_normalize_is_congruence_invariant(cube):
    poly, real = cube
    rng = np.random.default_rng(11)
    for k in range(5):
        R = Rotation.random(random_state=100 + k).as_matrix()
        moved = fit_realization(poly, real.vertices @ R.T + rng.normal(size=3))
        a = normalize(poly, real)
        b = normalize(poly, moved)
        assert np.abs(a.vertices - b.vertices).max() < 1e-9
        assert congruent(poly, real, moved)


def test_congruent_distinguishes_shapes(cube):
    poly, real = cube
    squashed = fit_realization(poly, CUBE_COORDS * np.array([1.0, 1.0, 1.1]))
    assert not congruent(poly, real, squashed)


def test_congruent_mirror_needs_flag(cube):
    poly, real = cube
    mirrored = fit_realization(poly, real.vertices * np.array([1.0, 1.0, -1.0]))
    assert not congruent(poly, real, mirrored)
    assert congruent(poly, real, mirrored, allow_reflection=True)


def test_collinear_frame_raises():
    # first three vertices collinear: normalization frame undefined
    faces = [(0, 1, 2, 3), (7, 6, 5, 4), (0, 4, 5, 1), (1, 5, 6, 2),
             (2, 6, 7, 3), (3, 7, 4, 0)]
    coords = np.array(
        [
            [0, 0, 0], [1, 0, 0], [2, 0, 0], [0.5, 1, 0],
            [0, 0, 1], [1, 0, 1], [2, 0, 1], [0.5, 1, 1],
        ],
        dtype=float,
    )
    poly = build_incidence(faces)
    real = fit_realization(poly, coords)
    with pytest.raises(CollinearFrame):
        normalize(poly, real)


def test_pool_sizes_cube(cube):
    poly, _ = cube
    assert len(build_pool(poly, "face-distances")) == 24
    assert len(build_pool(poly, "edges-only")) == 12
    assert len(build_pool(poly, "face-diagonals")) == 12
    assert len(build_pool(poly, "face-angles")) == 6 * 4 * 3
    assert len(build_pool(poly, "dihedrals")) == 12
    with pytest.raises(ValueError):
        build_pool(poly, "nonsense")
