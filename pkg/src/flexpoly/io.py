"""Mesh and vertex-field files.

JSON meshes look like ``{"vertices": [[x, y, z], ...], "faces": [[i, j, k], ...]}``
with zero-based indices. OBJ files hold ``v`` and ``f`` lines only,
one-based, triangles only. Vertex fields are stored as ``{"field": [[x, y, z], ...]}``.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import MeshValidationError, ParseError, UnsupportedFace
from .mesh import Mesh, build_mesh


def mesh_to_dict(mesh: Mesh) -> dict:
    return {"vertices": mesh.vertices.tolist(), "faces": mesh.faces.tolist()}


def mesh_from_dict(data, source: str = "<mesh>") -> Mesh:
    if not isinstance(data, dict) or "vertices" not in data or "faces" not in data:
        raise ParseError(f"{source}: expected an object with 'vertices' and 'faces'")
    verts, faces = data["vertices"], data["faces"]
    try:
        verts = np.array(verts, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"{source}: vertices: {exc}") from None
    if verts.ndim != 2 or verts.shape[1:] != (3,):
        raise ParseError(f"{source}: vertices must be a list of [x, y, z]")
    for k, face in enumerate(faces):
        if (not isinstance(face, list) or len(face) != 3
                or not all(isinstance(i, int) and not isinstance(i, bool) for i in face)):
            raise ParseError(f"{source}: faces[{k}] must be three integers, got {face!r}")
        for slot, i in enumerate(face):
            if not 0 <= i < len(verts):
                raise ParseError(
                    f"{source}: faces[{k}][{slot}] = {i} is out of range for {len(verts)} vertices")
    return build_mesh(verts, faces)


def save_mesh(mesh: Mesh, path, fmt: str | None = None) -> None:
    """Write ``mesh`` as JSON or OBJ, chosen by ``fmt`` or the file suffix."""
    path = Path(path)
    fmt = (fmt or path.suffix.lstrip(".") or "json").lower()
    if fmt == "json":
        path.write_text(json.dumps(mesh_to_dict(mesh)) + "\n")
    elif fmt == "obj":
        path.write_text(mesh_to_obj(mesh))
    else:
        raise ValueError(f"unknown mesh format {fmt!r}")


def load_mesh(path, fmt: str | None = None) -> Mesh:
    path = Path(path)
    fmt = (fmt or path.suffix.lstrip(".") or "json").lower()
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"{path}: {exc.strerror}") from None
    if fmt == "obj":
        return mesh_from_obj(text, source=str(path))
    if fmt != "json":
        raise ValueError(f"unknown mesh format {fmt!r}")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    return mesh_from_dict(data, source=str(path))


def mesh_to_obj(mesh: Mesh) -> str:
    lines = [f"v {x!r} {y!r} {z!r}" for x, y, z in mesh.vertices.tolist()]
    lines += [f"f {a + 1} {b + 1} {c + 1}" for a, b, c in mesh.faces.tolist()]
    return "\n".join(lines) + "\n"


def mesh_from_obj(text: str, source: str = "<obj>") -> Mesh:
    verts, faces = [], []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tag, *rest = line.split()
        if tag == "v":
            try:
                verts.append([float(x) for x in rest[:3]])
            except ValueError:
                raise ParseError(f"{source}:{lineno}: bad vertex line {raw!r}") from None
            if len(rest) < 3:
                raise ParseError(f"{source}:{lineno}: vertex needs three coordinates")
        elif tag == "f":
            if len(rest) != 3:
                raise UnsupportedFace(
                    f"{source}:{lineno}: face with {len(rest)} vertices, only triangles are supported")
            try:
                idx = [int(tok.split("/")[0]) for tok in rest]
            except ValueError:
                raise ParseError(f"{source}:{lineno}: bad face line {raw!r}") from None
            # negative indices are relative to the current vertex count
            faces.append([i - 1 if i > 0 else len(verts) + i for i in idx])
    try:
        return build_mesh(verts, faces)
    except MeshValidationError as exc:
        raise type(exc)(f"{source}: {exc}") from None


def save_field(field, path) -> None:
    Path(path).write_text(json.dumps({"field": np.asarray(field, dtype=float).tolist()}) + "\n")


def load_field(path, n_vertices: int | None = None) -> np.ndarray:
    try:
        data = json.loads(Path(path).read_text())
        field = np.array(data["field"], dtype=float)
    except (OSError, KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"{path}: cannot read vertex field ({exc})") from None
    if field.ndim != 2 or field.shape[1] != 3:
        raise ParseError(f"{path}: field must be a list of [x, y, z]")
    if n_vertices is not None and len(field) != n_vertices:
        raise ParseError(f"{path}: field has {len(field)} entries, mesh has {n_vertices} vertices")
    return field
