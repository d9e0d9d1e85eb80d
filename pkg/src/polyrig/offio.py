"""File formats: ASCII OFF meshes, measurement-set JSON, point-config JSON.

All emission is deterministic: object keys are sorted and floats are printed
with 17 significant digits, which round-trips IEEE doubles losslessly.
"""

from __future__ import annotations

import dataclasses
from typing import Any, Sequence

import numpy as np

from .errors import ParseError
from .geometry import DihedralAngle, FaceAngle, FaceDistance, Measurement3D
from .incidence import AbstractPolyhedron
from .pointsets import Angle, Coplanar, DiagonalAngle, Distance, SimpleMeasurement

__all__ = [
    "format_float",
    "json_dumps",
    "off_text",
    "write_off",
    "read_off",
    "measurement_to_dict",
    "measurement_from_dict",
    "measurements_to_json",
    "parse_measurement_set",
    "parse_point_config",
]


def format_float(x: float) -> str:
    """17 significant digits; enough to reproduce any double exactly."""
    return format(float(x), ".17g")


def _emit(obj: Any, indent: int, out: list[str]) -> None:
    pad = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{\n")
        keys = sorted(obj)
        for i, k in enumerate(keys):
            if not isinstance(k, str):
                raise TypeError(f"JSON object keys must be strings, got {k!r}")
            out.append(f'{pad}  "{k}": ')
            _emit(obj[k], indent + 1, out)
            out.append(",\n" if i + 1 < len(keys) else "\n")
        out.append(pad + "}")
    elif isinstance(obj, (list, tuple)):
        items = list(obj)
        if not items:
            out.append("[]")
            return
        out.append("[\n")
        for i, v in enumerate(items):
            out.append(pad + "  ")
            _emit(v, indent + 1, out)
            out.append(",\n" if i + 1 < len(items) else "\n")
        out.append(pad + "]")
    elif isinstance(obj, bool):
        out.append("true" if obj else "false")
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        out.append(format_float(float(obj)))
    elif isinstance(obj, str):
        escaped = obj.replace("\\", "\\\\").replace('"', '\\"')
        out.append(f'"{escaped}"')
    elif obj is None:
        out.append("null")
    elif isinstance(obj, np.ndarray):
        _emit(obj.tolist(), indent, out)
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def json_dumps(obj: Any) -> str:
    out: list[str] = []
    _emit(obj, 0, out)
    out.append("\n")
    return "".join(out)


# --- OFF ---------------------------------------------------------------------


def off_text(vertices: np.ndarray, faces: Sequence[Sequence[int]]) -> str:
    """ASCII OFF. 2D vertex arrays are written with a zero z column."""
    pts = np.asarray(vertices, dtype=float)
    if pts.ndim != 2 or pts.shape[1] not in (2, 3):
        raise ValueError(f"vertices must be (n, 2) or (n, 3), got {pts.shape}")
    if pts.shape[1] == 2:
        pts = np.column_stack([pts, np.zeros(len(pts))])
    edges = {
        (min(a, b), max(a, b))
        for f in faces
        for a, b in zip(f, tuple(f[1:]) + (f[0],))
    }
    edge_count = len(edges)
    lines = ["OFF", f"{len(pts)} {len(faces)} {edge_count}"]
    for row in pts:
        lines.append(" ".join(format_float(c) for c in row))
    for cycle in faces:
        lines.append(" ".join(str(int(i)) for i in (len(cycle), *cycle)))
    return "\n".join(lines) + "\n"


def write_off(path: str, vertices: np.ndarray, faces: Sequence[Sequence[int]]) -> None:
    with open(path, "w") as fh:
        fh.write(off_text(vertices, faces))


def read_off(text: str) -> tuple[np.ndarray, list[tuple[int, ...]]]:
    """Parse ASCII OFF text into raw (coordinates, face cycles).

    Incidence validation and plane fitting are the caller's job; this only
    checks the file's own bookkeeping.
    """
    tokens: list[str] = []
    for line in text.splitlines():
        body = line.split("#", 1)[0].strip()
        if body:
            tokens.extend(body.split())
    if not tokens:
        raise ParseError("empty OFF file")
    pos = 0
    if tokens[0].upper() == "OFF":
        pos = 1
    try:
        nv, nf, _ = (int(tokens[pos + i]) for i in range(3))
    except (IndexError, ValueError) as exc:
        raise ParseError("OFF header must be 'OFF' then three counts") from exc
    pos += 3
    if nv < 1 or nf < 0:
        raise ParseError(f"bad counts in OFF header: {nv} vertices, {nf} faces")
    need = 3 * nv
    if len(tokens) < pos + need:
        raise ParseError(f"expected {need} vertex coordinates, file ends early")
    try:
        coords = np.array(
            [float(t) for t in tokens[pos : pos + need]], dtype=float
        ).reshape(nv, 3)
    except ValueError as exc:
        raise ParseError("non-numeric vertex coordinate") from exc
    pos += need
    faces: list[tuple[int, ...]] = []
    for j in range(nf):
        if pos >= len(tokens):
            raise ParseError(f"face {j}: file ends before face line")
        try:
            k = int(tokens[pos])
        except ValueError as exc:
            raise ParseError(f"face {j}: bad vertex count {tokens[pos]!r}") from exc
        if k < 3:
            raise ParseError(f"face {j}: needs at least 3 vertices, got {k}")
        if pos + 1 + k > len(tokens):
            raise ParseError(f"face {j}: file ends mid-face")
        try:
            ids = tuple(int(t) for t in tokens[pos + 1 : pos + 1 + k])
        except ValueError as exc:
            raise ParseError(f"face {j}: non-integer vertex id") from exc
        for i in ids:
            if not 0 <= i < nv:
                raise ParseError(f"face {j}: vertex id {i} out of range 0..{nv - 1}")
        faces.append(ids)
        pos += 1 + k
    if pos != len(tokens):
        raise ParseError(f"{len(tokens) - pos} trailing tokens after last face")
    return coords, faces


# --- measurement sets ----------------------------------------------------------

_TYPE_BY_CLASS = {
    FaceDistance: "face_distance",
    FaceAngle: "face_angle",
    DihedralAngle: "dihedral",
    Distance: "distance",
    Angle: "angle",
    DiagonalAngle: "diagonal_angle",
}
_CLASS_BY_TYPE = {
    name: (cls, len(dataclasses.fields(cls))) for cls, name in _TYPE_BY_CLASS.items()
}


def measurement_to_dict(m: Measurement3D | SimpleMeasurement) -> dict:
    name = _TYPE_BY_CLASS.get(type(m))
    if name is None:
        raise TypeError(f"not a serializable measurement: {type(m).__name__}")
    ids = [getattr(m, f.name) for f in dataclasses.fields(m)]
    return {"type": name, "ids": ids}


def measurement_from_dict(obj: dict) -> Measurement3D | SimpleMeasurement:
    if not isinstance(obj, dict) or "type" not in obj or "ids" not in obj:
        raise ParseError(f"measurement must be {{'type', 'ids'}}, got {obj!r}")
    entry = _CLASS_BY_TYPE.get(obj["type"])
    if entry is None:
        raise ParseError(
            f"unknown measurement type {obj['type']!r}; "
            f"expected one of {sorted(_CLASS_BY_TYPE)}"
        )
    cls, arity = entry
    ids = obj["ids"]
    if (
        not isinstance(ids, (list, tuple))
        or len(ids) != arity
        or not all(isinstance(i, int) and not isinstance(i, bool) for i in ids)
    ):
        raise ParseError(f"{obj['type']} needs {arity} integer ids, got {ids!r}")
    return cls(*ids)


def measurements_to_json(
    dim: int, measurements: Sequence[Measurement3D | SimpleMeasurement]
) -> str:
    return json_dumps(
        {"dim": dim, "measurements": [measurement_to_dict(m) for m in measurements]}
    )


def parse_measurement_set(obj: Any) -> tuple[int, list]:
    """Validate {'dim': 2|3, 'measurements': [...]}; returns (dim, list)."""
    if not isinstance(obj, dict):
        raise ParseError("measurement set must be a JSON object")
    dim = obj.get("dim")
    if dim not in (2, 3):
        raise ParseError(f"'dim' must be 2 or 3, got {dim!r}")
    raw = obj.get("measurements")
    if not isinstance(raw, list) or not raw:
        raise ParseError("'measurements' must be a nonempty list")
    ms = [measurement_from_dict(o) for o in raw]
    if dim == 2:
        simple = {"distance", "angle", "diagonal_angle"}
        for o in raw:
            if o["type"] not in simple:
                raise ParseError(
                    f"{o['type']} is a mesh measurement; dim 2 takes {sorted(simple)}"
                )
    return dim, ms


def parse_point_config(obj: Any) -> tuple[int, np.ndarray, list[Coplanar]]:
    """Validate {'dim': 2|3, 'points': [[...]], 'coplanar': [[p,q,r,s]...]?}."""
    if not isinstance(obj, dict):
        raise ParseError("point config must be a JSON object")
    dim = obj.get("dim")
    if dim not in (2, 3):
        raise ParseError(f"'dim' must be 2 or 3, got {dim!r}")
    raw = obj.get("points")
    if not isinstance(raw, list) or len(raw) < 2:
        raise ParseError("'points' must list at least two points")
    try:
        pts = np.array(raw, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ParseError("non-numeric point coordinate") from exc
    if pts.ndim != 2 or pts.shape[1] != dim:
        raise ParseError(f"each point needs exactly {dim} coordinates")
    coplanar: list[Coplanar] = []
    for quad in obj.get("coplanar", []):
        if (
            not isinstance(quad, (list, tuple))
            or len(quad) != 4
            or not all(isinstance(i, int) and 0 <= i < len(raw) for i in quad)
        ):
            raise ParseError(f"coplanar entries are 4 point ids, got {quad!r}")
        coplanar.append(Coplanar(*quad))
    if coplanar and dim != 3:
        raise ParseError("coplanar constraints require dim 3")
    return dim, pts, coplanar
