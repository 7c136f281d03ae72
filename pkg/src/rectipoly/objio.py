"""Minimal Wavefront OBJ reader/writer (``v`` and ``f`` records only)."""

from __future__ import annotations

from .mesh import Mesh, Mode, build_mesh

_IGNORED = {"vn", "vt", "o", "g", "s", "usemtl", "mtllib", "l"}


class ParseError(ValueError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


def parse_obj(text: str) -> tuple[list[tuple[float, float, float]], list[tuple[int, ...]]]:
    vertices: list[tuple[float, float, float]] = []
    faces: list[tuple[int, ...]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tag, *rest = line.split()
        if tag == "v":
            if len(rest) < 3:
                raise ParseError(lineno, "vertex record needs three coordinates")
            try:
                vertices.append((float(rest[0]), float(rest[1]), float(rest[2])))
            except ValueError as exc:
                raise ParseError(lineno, f"bad coordinate: {exc}") from None
        elif tag == "f":
            if len(rest) < 3:
                raise ParseError(lineno, "face record needs at least three indices")
            loop = []
            for token in rest:
                try:
                    idx = int(token.split("/", 1)[0])
                except ValueError:
                    raise ParseError(lineno, f"bad face index {token!r}") from None
                if idx == 0:
                    raise ParseError(lineno, "face indices are 1-based; got 0")
                if idx < 0:
                    idx = len(vertices) + idx + 1
                if not 1 <= idx <= len(vertices):
                    raise ParseError(lineno, f"face index {token} out of range")
                loop.append(idx - 1)
            faces.append(tuple(loop))
        elif tag in _IGNORED:
            continue
        else:
            raise ParseError(lineno, f"unsupported record {tag!r}")
    return vertices, faces


def import_obj(text: str, mode: Mode | str = Mode.CLOSED) -> Mesh:
    vertices, faces = parse_obj(text)
    if not faces:
        raise ParseError(0, "no faces")
    return build_mesh(vertices, faces, mode)


def export_obj(mesh: Mesh) -> str:
    lines = [f"v {x:.17g} {y:.17g} {z:.17g}" for x, y, z in mesh.vertices.tolist()]
    lines += ["f " + " ".join(str(i + 1) for i in loop) for loop in mesh.faces]
    return "\n".join(lines) + "\n"
