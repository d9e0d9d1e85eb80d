"""Command-line surface.

Verbs: analyze, select, check, generate, witness, polygon. Exit codes are a
stable contract: 0 for success or a sufficient/determined verdict, 1 for a
negative verdict (insufficient set, witness found), 2 for input errors.
JSON output is deterministic: sorted keys, floats at 17 significant digits.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Sequence

import numpy as np

from . import generators, polygon
from .errors import NoKernelDirection, ParseError, PolyrigError
from .geometry import (
    DihedralAngle,
    FaceAngle,
    FaceDistance,
    MEASUREMENT_POOLS,
    Realization,
    build_pool,
    evaluate_all,
    fit_realization,
    normalize,
    phi,
)
from .incidence import AbstractPolyhedron, build_incidence
from .offio import (
    json_dumps,
    measurement_to_dict,
    off_text,
    parse_measurement_set,
    parse_point_config,
    read_off,
)
from .pointsets import Angle, measurement_value
from .rigidity import (
    CONGRUENCE,
    SIMILARITY,
    flex_witness,
    greedy_minimal_subset,
    is_sufficient,
    point_set_witness,
)

POOL_CHOICES = sorted(MEASUREMENT_POOLS) + ["all"]
PLATONIC_NAMES = ("tetrahedron", "cube", "octahedron", "dodecahedron", "icosahedron")
GENERATE_NAMES = PLATONIC_NAMES + ("hexa-a", "hexa-b", "staircase-ngon", "regular-ngon")


def _default_seed() -> int:
    env = os.environ.get("POLYRIG_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        return 0


def _check_tol(tol: float) -> float:
    if not 0.0 < tol < 1.0:
        raise ParseError(f"tolerance must lie in (0, 1), got {tol}")
    return tol


def _emit(payload: dict, out: str | None) -> None:
    text = json_dumps(payload)
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _load_text(path: str) -> str:
    try:
        with open(path) as fh:
            return fh.read()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc


def _load_mesh(path: str) -> tuple[AbstractPolyhedron, Realization]:
    coords, faces = read_off(_load_text(path))
    poly = build_incidence(faces)
    if poly.vertex_count != len(coords):
        raise ParseError(
            f"faces reference {poly.vertex_count} vertices, "
            f"file lists {len(coords)}"
        )
    return poly, fit_realization(poly, coords)


def _load_json(path: str) -> dict:
    try:
        return json.loads(_load_text(path))
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON: {exc}") from exc


def _is_mesh_path(path: str) -> bool:
    if path.endswith(".off"):
        return True
    if path.endswith(".json"):
        return False
    return not _load_text(path).lstrip().startswith("{")


def _check_mesh_measurements(poly: AbstractPolyhedron, ms: Sequence) -> None:
    for m in ms:
        if isinstance(m, (FaceDistance, FaceAngle)):
            ids, bound, kind = (
                [getattr(m, f) for f in ("v", "w")]
                if isinstance(m, FaceDistance)
                else [m.apex, m.end1, m.end2]
            ), poly.vertex_count, "vertex"
        elif isinstance(m, DihedralAngle):
            ids, bound, kind = [m.f, m.g], poly.face_count, "face"
        else:
            raise ParseError(
                f"{type(m).__name__} is not a mesh measurement; "
                "use face_distance, face_angle, or dihedral"
            )
        for i in ids:
            if not 0 <= i < bound:
                raise ParseError(f"{kind} id {i} out of range 0..{bound - 1}")


def _report_payload(report) -> dict:
    selected = None
    if report.selected is not None:
        selected = [measurement_to_dict(m) for m in report.selected]
    return {
        "mode": report.mode,
        "E": report.edge_count,
        "achievedRank": report.achieved_rank,
        "targetRank": report.target_rank,
        "sufficient": report.sufficient,
        "flexDimension": report.flex_dimension,
        "selected": selected,
        "tolerance": report.tolerance_used,
    }


# --- verbs -------------------------------------------------------------------


def cmd_analyze(args) -> int:
    tol = _check_tol(args.tol)
    poly, real = _load_mesh(args.input)
    pool = build_pool(poly, args.pool)
    report = is_sufficient(
        poly, real, pool, args.mode, tol, allow_scale_variant=args.allow_scale_variant
    )
    _emit(_report_payload(report), args.out)
    return 0 if report.sufficient else 1


def cmd_select(args) -> int:
    tol = _check_tol(args.tol)
    poly, real = _load_mesh(args.input)
    pool = build_pool(poly, args.pool)
    report = greedy_minimal_subset(
        poly, real, pool, args.mode, tol, allow_scale_variant=args.allow_scale_variant
    )
    _emit(_report_payload(report), args.out)
    print(f"selected {len(report.selected)} measurements", file=sys.stderr)
    if not report.sufficient:
        print(
            f"insufficient: pool '{args.pool}' exhausted at rank "
            f"{report.achieved_rank} < {report.target_rank}",
            file=sys.stderr,
        )
        return 1
    return 0


def cmd_check(args) -> int:
    tol = _check_tol(args.tol)
    dim, ms = parse_measurement_set(_load_json(args.measurements))
    if _is_mesh_path(args.input):
        if dim != 3:
            raise ParseError("a mesh takes a dim-3 measurement set")
        poly, real = _load_mesh(args.input)
        _check_mesh_measurements(poly, ms)
        report = is_sufficient(
            poly, real, ms, args.mode, tol, allow_scale_variant=args.allow_scale_variant
        )
        _emit(_report_payload(report), args.out)
        return 0 if report.sufficient else 1
    cdim, pts, _ = parse_point_config(_load_json(args.input))
    if cdim != 2 or dim != 2:
        raise ParseError("check on a point config needs dim 2 on both files")
    config = polygon.PointConfig2D.from_points(pts)
    report2 = polygon.sufficiency2d(config, ms, tol)
    _emit(
        {
            "pointCount": report2.point_count,
            "achievedRank": report2.achieved_rank,
            "targetRank": report2.target_rank,
            "sufficient": report2.sufficient,
            "status": report2.status,
            "tolerance": report2.tolerance_used,
        },
        args.out,
    )
    return 0 if report2.sufficient else 1


def cmd_generate(args) -> int:
    name = args.name
    if name in PLATONIC_NAMES:
        poly, real = generators.platonic(name, args.scale)
        vertices, faces = real.vertices, poly.faces
    elif name == "hexa-a":
        poly, real = generators.hexahedron_family_a(args.q1)
        vertices, faces = real.vertices, poly.faces
    elif name == "hexa-b":
        poly, real = generators.hexahedron_family_b(args.q1, args.q2)
        vertices, faces = real.vertices, poly.faces
    elif name == "staircase-ngon":
        angles = _parse_angles(args.angles, args.n - 2)
        config = polygon.staircase_polygon(args.n, args.base, angles)
        vertices, faces = config.points, [list(range(args.n))]
    elif name == "regular-ngon":
        config = polygon.regular_polygon(args.n, args.side)
        vertices, faces = config.points, [list(range(args.n))]
    else:
        raise ParseError(f"unknown generator {name!r}; choices: {GENERATE_NAMES}")
    text = off_text(vertices, faces)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def _parse_angles(spec: str | None, needed: int) -> list[float]:
    if not spec:
        raise ParseError(f"--angles is required ({needed} comma-separated radians)")
    try:
        angles = [float(tok) for tok in spec.split(",") if tok.strip()]
    except ValueError as exc:
        raise ParseError(f"bad --angles {spec!r}: {exc}") from exc
    return angles


def cmd_witness(args) -> int:
    tol = _check_tol(args.tol)
    dim, ms = parse_measurement_set(_load_json(args.measurements))
    if _is_mesh_path(args.input):
        if dim != 3:
            raise ParseError("a mesh takes a dim-3 measurement set")
        poly, real = _load_mesh(args.input)
        _check_mesh_measurements(poly, ms)
        try:
            found = flex_witness(
                poly,
                real,
                ms,
                args.mode,
                step=args.step,
                tol_rel=tol,
                allow_scale_variant=args.allow_scale_variant,
            )
        except NoKernelDirection:
            _emit({"witness": None, "sufficient": True}, args.out)
            return 0
        if found is None:
            _emit({"witness": None, "sufficient": False, "note": "first-order flex only"}, args.out)
            return 0
        targets = evaluate_all(ms, real)
        payload = {
            "witness": {
                "vertices": found.vertices.tolist(),
                "planes": found.planes.tolist(),
            },
            "maxMeasurementError": float(
                np.abs(evaluate_all(ms, found) - targets).max()
            ),
            "maxIncidenceError": float(np.abs(phi(poly, found)).max()),
            "normalizedDistance": float(
                np.linalg.norm(
                    normalize(poly, real).vertices - normalize(poly, found).vertices,
                    axis=1,
                ).max()
            ),
        }
        _emit(payload, args.out)
        return 1
    cdim, pts, coplanar = parse_point_config(_load_json(args.input))
    if cdim != dim:
        raise ParseError(f"config dim {cdim} != measurement-set dim {dim}")
    report = point_set_witness(
        dim,
        pts,
        ms,
        restarts=args.restarts,
        seed=args.seed,
        noise=args.noise,
        coplanar=[(c.p, c.q, c.r, c.s) for c in coplanar],
        allow_reflection=True if args.allow_reflection else None,
    )
    payload = {
        "witness": None if report.witness is None else report.witness.tolist(),
        "converged": report.converged,
        "restarts": report.restarts,
        "clusters": [
            {"count": c.count, "distanceToReference": c.distance_to_reference}
            for c in report.clusters
        ],
        "residualTol": report.residual_tol,
        "clusterTol": report.cluster_tol,
    }
    _emit(payload, args.out)
    return 0 if report.determined else 1


def cmd_polygon_analyze(args) -> int:
    tol = _check_tol(args.tol)
    cdim, pts, _ = parse_point_config(_load_json(args.input))
    dim, ms = parse_measurement_set(_load_json(args.measurements))
    if cdim != 2 or dim != 2:
        raise ParseError("polygon analyze needs dim-2 config and measurement set")
    config = polygon.PointConfig2D.from_points(pts)
    report = polygon.sufficiency2d(config, ms, tol)
    _emit(
        {
            "pointCount": report.point_count,
            "achievedRank": report.achieved_rank,
            "targetRank": report.target_rank,
            "sufficient": report.sufficient,
            "status": report.status,
            "tolerance": report.tolerance_used,
        },
        args.out,
    )
    return 0 if report.sufficient else 1


def cmd_polygon_oracle(args) -> int:
    which = args.which
    if which == "square":
        value, argmax = polygon.square_angle_oracle(args.d)
        _emit({"maxAngle": value, "argmax": argmax.tolist()}, args.out)
    elif which == "right-quad":
        value, argmax = polygon.right_angle_quad_oracle(args.ab, args.ad, args.ac)
        _emit(
            {
                "maxAngle": value,
                "argmax": argmax.tolist(),
                "angleABC": measurement_value(Angle(0, 1, 2), argmax),
                "angleADC": measurement_value(Angle(0, 3, 2), argmax),
            },
            args.out,
        )
    elif which == "max-diag":
        value, argmax = polygon.max_diagonal_oracle(args.bd, args.theta1, args.theta2)
        a, b, c, d = argmax
        _emit(
            {
                "maxDiagonal": value,
                "argmax": argmax.tolist(),
                "ab": float(np.linalg.norm(a - b)),
                "ad": float(np.linalg.norm(a - d)),
                "cb": float(np.linalg.norm(c - b)),
                "cd": float(np.linalg.norm(c - d)),
            },
            args.out,
        )
    else:
        report = polygon.octagon_distance_oracle(restarts=args.restarts, seed=args.seed)
        _emit(
            {
                "regularValue": report.regular_value,
                "maxValue": report.max_value,
                "maximizer": report.maximizer.tolist(),
                "constraintResidual": report.constraint_residual,
                "angleA5A1A8": report.linkage_angle_a5_a1_a8,
                "angleA6A5A1": report.linkage_angle_a6_a5_a1,
                "midpointDistance": report.midpoint_distance,
            },
            args.out,
        )
    return 0


def cmd_polygon_staircase(args) -> int:
    angles = _parse_angles(args.angles, args.n - 2)
    config = polygon.staircase_polygon(args.n, args.base, angles)
    ms = polygon.staircase_measurements(args.n)
    _emit(
        {
            "dim": 2,
            "points": config.points.tolist(),
            "measurements": [measurement_to_dict(m) for m in ms],
        },
        args.out,
    )
    return 0


# --- parser ------------------------------------------------------------------


def _add_common(p: argparse.ArgumentParser, pool: bool = False) -> None:
    p.add_argument("--mode", choices=[CONGRUENCE, SIMILARITY], default=CONGRUENCE)
    if pool:
        p.add_argument("--pool", choices=POOL_CHOICES, default="face-distances")
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--out", default=None)
    p.add_argument("--allow-scale-variant", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="polyrig",
        description="Sufficiency analysis of measurement sets on polyhedra "
        "and planar point configurations.",
    )
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("analyze", help="rank test of a measurement pool on an OFF mesh")
    p.add_argument("input")
    _add_common(p, pool=True)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("select", help="greedy minimal sufficient subset from a pool")
    p.add_argument("input")
    _add_common(p, pool=True)
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("check", help="evaluate an explicit measurement set")
    p.add_argument("input", help="OFF mesh or point-config JSON")
    p.add_argument("--measurements", required=True)
    _add_common(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("generate", help="write a generated model as OFF")
    p.add_argument("name", choices=GENERATE_NAMES)
    p.add_argument("--q1", type=float, default=0.0)
    p.add_argument("--q2", type=float, default=0.0)
    p.add_argument("--n", type=int, default=8)
    p.add_argument("--side", type=float, default=1.0)
    p.add_argument("--base", type=float, default=1.0)
    p.add_argument("--angles", default=None)
    p.add_argument("--scale", type=float, default=1.0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("witness", help="search for a non-congruent twin")
    p.add_argument("input", help="OFF mesh or point-config JSON")
    p.add_argument("--measurements", required=True)
    _add_common(p)
    p.add_argument("--seed", type=int, default=_default_seed())
    p.add_argument("--restarts", type=int, default=200)
    p.add_argument("--noise", type=float, default=0.5)
    p.add_argument("--step", type=float, default=1e-2)
    p.add_argument("--allow-reflection", action="store_true")
    p.set_defaults(func=cmd_witness)

    p = sub.add_parser("polygon", help="planar configuration tools")
    psub = p.add_subparsers(dest="subverb", required=True)

    q = psub.add_parser("analyze", help="first-order sufficiency of a 2D set")
    q.add_argument("input")
    q.add_argument("--measurements", required=True)
    q.add_argument("--tol", type=float, default=1e-9)
    q.add_argument("--out", default=None)
    q.set_defaults(func=cmd_polygon_analyze)

    q = psub.add_parser("oracle", help="second-order determination oracles")
    q.add_argument("which", choices=["square", "right-quad", "max-diag", "octagon"])
    q.add_argument("--d", type=float, default=1.0)
    q.add_argument("--ab", type=float, default=1.0)
    q.add_argument("--ad", type=float, default=1.0)
    q.add_argument("--ac", type=float, default=2.0)
    q.add_argument("--bd", type=float, default=1.0)
    q.add_argument("--theta1", type=float, default=np.pi / 4)
    q.add_argument("--theta2", type=float, default=np.pi / 4)
    q.add_argument("--restarts", type=int, default=24)
    q.add_argument("--seed", type=int, default=_default_seed())
    q.add_argument("--out", default=None)
    q.set_defaults(func=cmd_polygon_oracle)

    q = psub.add_parser("staircase", help="build a staircase polygon and its set")
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--base", type=float, default=1.0)
    q.add_argument("--angles", required=True, help="comma-separated radians")
    q.add_argument("--out", default=None)
    q.set_defaults(func=cmd_polygon_staircase)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except PolyrigError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
