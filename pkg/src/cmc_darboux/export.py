"""Mesh and report writers (OBJ, binary PLY, CSV, JSON)."""
from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np


def _points3(points) -> np.ndarray:
    P = np.asarray(points, dtype=float)
    return P[..., 1:] if P.shape[-1] == 4 else P


def grid_faces(nx: int, ny: int, welded: bool) -> np.ndarray:
    """Triangles of a structured grid; the y-seam is closed only when ``welded``."""
    jmax = ny if welded else ny - 1
    faces = []
    for i in range(nx - 1):
        for j in range(jmax):
            a = i * ny + j
            b = (i + 1) * ny + j
            c = (i + 1) * ny + (j + 1) % ny
            d = i * ny + (j + 1) % ny
            faces.append((a, b, c))
            faces.append((a, c, d))
    return np.asarray(faces, dtype=np.int64).reshape(-1, 3)


def write_obj(path, points, welded: bool = True, comment: str | None = None) -> None:
    P = _points3(points)
    nx, ny = P.shape[:2]
    lines = []
    if comment:
        lines.append(f"# {comment}")
    for v in P.reshape(-1, 3):
        lines.append("v {:.17g} {:.17g} {:.17g}".format(*v))
    for f in grid_faces(nx, ny, welded):
        lines.append("f {} {} {}".format(*(f + 1)))
    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")


def write_ply(path, points, welded: bool = True) -> None:
    """Binary little-endian PLY with double vertices and int32 triangles."""
    P = _points3(points)
    nx, ny = P.shape[:2]
    faces = grid_faces(nx, ny, welded)
    verts = P.reshape(-1, 3)
    header = (
        "ply\nformat binary_little_endian 1.0\n"
        f"element vertex {len(verts)}\n"
        "property double x\nproperty double y\nproperty double z\n"
        f"element face {len(faces)}\n"
        "property list uchar int vertex_indices\nend_header\n"
    )
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        fh.write(verts.astype("<f8").tobytes())
        rec = np.zeros(len(faces), dtype=[("n", "u1"), ("i", "<i4", (3,))])
        rec["n"] = 3
        rec["i"] = faces
        fh.write(rec.tobytes())


def read_ply(path):
    """Minimal reader for files produced by :func:`write_ply`."""
    data = Path(path).read_bytes()
    end = data.index(b"end_header\n") + len(b"end_header\n")
    header = data[:end].decode("ascii").splitlines()
    nv = int(next(h for h in header if h.startswith("element vertex")).split()[-1])
    nf = int(next(h for h in header if h.startswith("element face")).split()[-1])
    verts = np.frombuffer(data, dtype="<f8", count=3 * nv, offset=end).reshape(nv, 3)
    rec = np.frombuffer(data, dtype=[("n", "u1"), ("i", "<i4", (3,))], count=nf, offset=end + 24 * nv)
    return verts, rec["i"].astype(np.int64)


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, float) and not np.isfinite(obj):
        return None if np.isnan(obj) else ("inf" if obj > 0 else "-inf")
    return obj


def dumps_json(obj) -> str:
    return json.dumps(_clean(obj), indent=2, sort_keys=True) + "\n"


def write_json(path, obj) -> None:
    Path(path).write_text(dumps_json(obj), encoding="utf-8")


def write_text(path, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
