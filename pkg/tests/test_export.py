import json

import numpy as np

from cmc_darboux import surfaces
from cmc_darboux.export import dumps_json, grid_faces, read_ply, write_obj, write_ply


def test_face_counts():
    assert len(grid_faces(4, 6, welded=True)) == 2 * 3 * 6
    assert len(grid_faces(4, 6, welded=False)) == 2 * 3 * 5


def test_welded_mesh_has_no_seam_boundary():
    faces = grid_faces(5, 8, welded=True)
    edges = {}
    for f in faces:
        for a, b in ((f[0], f[1]), (f[1], f[2]), (f[2], f[0])):
            key = (min(a, b), max(a, b))
            edges[key] = edges.get(key, 0) + 1
    boundary = [e for e, n in edges.items() if n == 1]
    # only the two end circles remain open
    assert len(boundary) == 2 * 8


def test_obj(tmp_path):
    p = surfaces.cylinder(3, 4)
    path = tmp_path / "c.obj"
    write_obj(path, p.f, welded=True, comment="cylinder")
    lines = path.read_text().splitlines()
    assert lines[0] == "# cylinder"
    verts = [ln for ln in lines if ln.startswith("v ")]
    faces = [ln for ln in lines if ln.startswith("f ")]
    assert len(verts) == 12 and len(faces) == 16
    v = np.array([[float(t) for t in ln.split()[1:]] for ln in verts])
    assert np.array_equal(v, p.f[..., 1:].reshape(-1, 3))


def test_ply_round_trip(tmp_path):
    p = surfaces.cylinder(5, 8)
    path = tmp_path / "c.ply"
    write_ply(path, p.f, welded=False)
    assert path.read_bytes().startswith(b"ply\nformat binary_little_endian 1.0\n")
    verts, faces = read_ply(path)
    assert np.array_equal(verts, p.f[..., 1:].reshape(-1, 3))
    assert np.array_equal(faces, grid_faces(5, 8, welded=False))


def test_json_is_deterministic():
    obj = {"b": 1 + 2j, "a": np.float64(0.1), "c": [np.int64(3), float("nan")]}
    text = dumps_json(obj)
    assert text == dumps_json(dict(reversed(list(obj.items()))))
    assert json.loads(text) == {"a": 0.1, "b": [1.0, 2.0], "c": [3, None]}
