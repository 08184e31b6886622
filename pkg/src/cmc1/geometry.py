"""Immersions into H^3 and de Sitter space, meshes, and Euclidean periods.

A frame F gives the Hermitian matrix F F* (hyperbolic space) or F e3 F*
(de Sitter space); its Minkowski coordinates are read off as
x0 = (X11 + X22)/2, x3 = (X11 - X22)/2, x1 + i x2 = X12.
"""

from __future__ import annotations

import json
import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from . import sl2
from .curve import CurveParams, sheet_roots, sheet_index
from .errors import CMCError, ParameterError
from .monodromy import DS_TAGS, H3, initial_frame_matrix
from .transport import (
    DEFAULT_RTOL,
    PathSpec,
    circular_arc,
    line,
    make_loop_gamma1,
    make_loop_gamma2,
    transport,
)

MESH_R_RANGE = (0.05, 20.0)
MESH_RESOLUTION = (24, 48)
SINGULAR_TOL = 1e-3
DEGENERATE_AREA = 1e-14


@dataclass(frozen=True)
class AmbientPoint:
    x0: float
    x1: float
    x2: float
    x3: float

    @property
    def minkowski_norm(self) -> float:
        """-x0^2 + x1^2 + x2^2 + x3^2: -1 on H^3, +1 on de Sitter space."""
        return -self.x0 ** 2 + self.x1 ** 2 + self.x2 ** 2 + self.x3 ** 2

    def as_array(self) -> np.ndarray:
        return np.array([self.x0, self.x1, self.x2, self.x3])


def hermitian_to_minkowski(X: np.ndarray) -> np.ndarray:
    """Minkowski coordinates of Hermitian 2x2 matrices; works on stacks (..., 2, 2)."""
    X = np.asarray(X)
    x0 = 0.5 * (X[..., 0, 0].real + X[..., 1, 1].real)
    x3 = 0.5 * (X[..., 0, 0].real - X[..., 1, 1].real)
    return np.stack([x0, X[..., 0, 1].real, X[..., 0, 1].imag, x3], axis=-1)


def _hermitian(frames: np.ndarray, ambient: str) -> np.ndarray:
    frames = np.asarray(frames, dtype=complex)
    fdag = np.conj(np.swapaxes(frames, -1, -2))
    if ambient == H3:
        return frames @ fdag
    if ambient in DS_TAGS:
        return frames @ sl2.E3 @ fdag
    raise ParameterError(f"unknown ambient space {ambient!r}")


def immerse(frame: np.ndarray, ambient: str) -> AmbientPoint:
    """Point F F* of H^3 or F e3 F* of de Sitter space for a unit-determinant frame."""
    return AmbientPoint(*map(float, hermitian_to_minkowski(_hermitian(frame, ambient))))


def poincare_project(point) -> np.ndarray:
    """Hyperboloid model -> Poincare ball, (x1, x2, x3) / (1 + x0)."""
    x = point.as_array() if isinstance(point, AmbientPoint) else np.asarray(point, float)
    if np.any(x[..., 0] < 1 - 1e-9):
        raise ParameterError("Poincare projection needs points of H^3 (x0 >= 1)")
    return x[..., 1:] / (1 + x[..., :1])


def ds_project(point) -> np.ndarray:
    """Bounded picture of de Sitter space, (x1, x2, x3) / (1 + sqrt(1 + x0^2))."""
    x = point.as_array() if isinstance(point, AmbientPoint) else np.asarray(point, float)
    return x[..., 1:] / (1 + np.sqrt(1 + x[..., :1] ** 2))


def euclidean_period(params: CurveParams, loop: str, variant: str,
                     tol: float = DEFAULT_RTOL) -> np.ndarray:
    """Real period of the minimal (R^3) or maximal (R^3_1) surface with the same data.

    minimal:  Re of the loop integral of (1 - G^2, i(1 + G^2), 2G) Omega
    maximal:  Re of the loop integral of (1 + G^2, i(1 - G^2), 2G) Omega
    """
    if loop == "gamma1":
        path = make_loop_gamma1(params)
    elif loop == "gamma2":
        path = make_loop_gamma2(params)
    else:
        raise ParameterError(f"loop must be 'gamma1' or 'gamma2' (got {loop!r})")
    i0, i1, i2 = transport(params, path, tol=tol).integrals
    if variant == "minimal":
        vec = (i0 - i2, 1j * (i0 + i2), 2 * i1)
    elif variant == "maximal":
        vec = (i0 + i2, 1j * (i0 - i2), 2 * i1)
    else:
        raise ParameterError(f"variant must be 'minimal' or 'maximal' (got {variant!r})")
    return np.array([v.real for v in vec])


@dataclass
class MeshData:
    vertices: np.ndarray
    ambient_points: np.ndarray
    faces: np.ndarray
    singular_flags: np.ndarray
    metadata: dict = field(default_factory=dict)
    # (radial index, angular index, sheet) of every vertex
    labels: np.ndarray | None = None
    gauss: np.ndarray | None = None


def mesh_radii(params: CurveParams, n_radial: int, r_range=MESH_R_RANGE) -> np.ndarray:
    """Log-spaced radii containing r = 1 and kept clear of |z| = 1/lam and lam."""
    r_min, r_max = r_range
    if not 0 < r_min < 1 < r_max:
        raise ParameterError(f"radial range must satisfy 0 < r_min < 1 < r_max (got {r_range})")
    if n_radial < 3:
        raise ParameterError("need at least 3 radial samples")
    t = np.linspace(math.log(r_min), math.log(r_max), n_radial)
    step = t[1] - t[0]
    t[np.argmin(np.abs(t))] = 0.0
    for b in (-math.log(params.lam), math.log(params.lam)):
        i = int(np.argmin(np.abs(t - b)))
        if t[i] != 0.0 and abs(t[i] - b) < 0.25 * step:
            t[i] = b + math.copysign(0.25 * step, t[i] - b if t[i] != b else 1.0)
    return np.exp(t)


def _build_edges(radii: np.ndarray, n_ang: int, params: CurveParams):
    """z-plane lattice edges as ((i, j), (i2, j2), PathSpec); None marks a dropped edge."""
    thetas = 2 * math.pi * np.arange(n_ang) / n_ang
    edges = {}
    for i, r in enumerate(radii):
        for j in range(n_ang):
            if i + 1 < len(radii):
                r2 = radii[i + 1]
                crosses = j == 0 and any(r < b < r2 for b in (params.inv_lam, params.lam))
                seg = None if crosses else line(r * np.exp(1j * thetas[j]), r2 * np.exp(1j * thetas[j]))
                edges[("r", i, j)] = ((i, j), (i + 1, j), seg)
            j2 = (j + 1) % n_ang
            theta1 = thetas[j] + 2 * math.pi / n_ang
            edges[("a", i, j)] = ((i, j), (i, j2), circular_arc(r, thetas[j], theta1))
    return edges


def build_mesh(params: CurveParams, result, resolution=MESH_RESOLUTION,
               r_range=MESH_R_RANGE, tol: float = DEFAULT_RTOL) -> MeshData:
    """Mesh of the surface over a polar lattice on all k+1 sheets.

    Every lifted lattice edge is transported once with the identity frame,
    giving its propagator U (F_end = U F_start) and the sheet it lands on.
    Frames at vertices are propagated from the base point (1, w0) along a
    breadth-first spanning tree, starting from the corrected initial frame
    of ``result``.  Lattice cells whose edges touch a branch point are left
    open.
    """
    n_rad, n_ang = resolution
    if n_ang < 4:
        raise ParameterError("need at least 4 angular samples")
    ambient = result.ambient
    P = initial_frame_matrix(result.alpha, result.beta, ambient)
    k1 = params.k + 1
    radii = mesh_radii(params, n_rad, r_range)
    thetas = 2 * math.pi * np.arange(n_ang) / n_ang
    nodes = radii[:, None] * np.exp(1j * thetas[None, :])
    roots = np.array([[sheet_roots(params, z) for z in row] for row in nodes])

    edges = _build_edges(radii, n_ang, params)
    # propagators[(key, s)] = (U, s_end); key identifies the z-edge
    propagators = {}
    failures = 0
    for key, (a, b, seg) in edges.items():
        if seg is None:
            continue
        path = PathSpec((seg,), f"edge{key}")
        for s in range(k1):
            try:
                res = transport(params, path, roots[a][s], tol=tol, check=False)
            except CMCError:
                failures += 1
                continue
            s_end = sheet_index(params, nodes[b], res.endpoint.w)
            propagators[(key, s)] = (res.frame, s_end)

    # adjacency of lifted vertices: (i, j, s) -> list of (neighbor, U, key, s)
    adjacency: dict[tuple, list] = {}
    for (key, s), (U, s_end) in propagators.items():
        a, b, _ = edges[key]
        u = (a[0], a[1], s)
        v = (b[0], b[1], s_end)
        adjacency.setdefault(u, []).append((v, U, (key, s), True))
        adjacency.setdefault(v, []).append((u, U, (key, s), False))

    i_one = int(np.argmin(np.abs(radii - 1.0)))
    root = (i_one, 0, sheet_index(params, 1.0, params.w0))
    frames = {root: P}
    tree_edges = set()
    queue = deque([root])
    while queue:
        u = queue.popleft()
        # radial neighbours before angular ones
        for v, U, ekey, forward in sorted(adjacency.get(u, []), key=lambda e: e[2][0][0] != "r"):
            if v in frames:
                continue
            frames[v] = U @ frames[u] if forward else sl2.inverse(U) @ frames[u]
            tree_edges.add(ekey)
            queue.append(v)

    labels = sorted(frames)
    index = {lab: n for n, lab in enumerate(labels)}
    F = np.array([frames[lab] for lab in labels])
    X = _hermitian(F, ambient)
    points = hermitian_to_minkowski(X)
    gauss = np.array([params.gauss_scale * roots[i][j][s] for i, j, s in labels])
    if ambient == H3:
        verts = poincare_project(points)
    else:
        verts = ds_project(points)

    # frames reached along non-tree edges must give the same surface point
    closure = 0.0
    for (ekey, s), (U, s_end) in propagators.items():
        if (ekey, s) in tree_edges:
            continue
        a, b, _ = edges[ekey]
        u, v = (a[0], a[1], s), (b[0], b[1], s_end)
        if u not in frames or v not in frames:
            continue
        Xv = _hermitian(U @ frames[u], ambient)
        closure = max(closure, float(np.max(np.abs(Xv - X[index[v]])) / max(1.0, np.max(np.abs(Xv)))))

    faces = []
    plaquette = 0.0
    open_cells = 0
    for i in range(n_rad - 1):
        for j in range(n_ang):
            j2 = (j + 1) % n_ang
            keys = [("r", i, j), ("a", i + 1, j), ("r", i, j2), ("a", i, j)]
            if any(edges[key][2] is None for key in keys):
                open_cells += k1
                continue
            for s in range(k1):
                product, ok, cur = np.eye(2, dtype=complex), True, s
                # around the cell: out, counter-clockwise, in, clockwise back
                for key, forward in zip(keys, (True, True, False, False)):
                    found = propagators.get((key, cur)) if forward else _reverse_lookup(propagators, key, cur, k1)
                    if found is None:
                        ok = False
                        break
                    U, cur = found
                    product = U @ product if forward else sl2.inverse(U) @ product
                if not ok or cur != s:
                    open_cells += 1
                    continue
                plaquette = max(plaquette, float(np.max(np.abs(product - np.eye(2)))))
                v00 = (i, j, s)
                v10 = (i + 1, j, propagators[(keys[0], s)][1])
                v11 = (i + 1, j2, propagators[(keys[1], v10[2])][1])
                v01 = (i, j2, _reverse_lookup(propagators, keys[2], v11[2], k1)[1])
                if not all(v in index for v in (v00, v10, v11, v01)):
                    open_cells += 1
                    continue
                faces.append((index[v00], index[v10], index[v11]))
                faces.append((index[v00], index[v11], index[v01]))

    faces = np.array(faces, dtype=np.int64).reshape(-1, 3)
    areas = triangle_areas(verts, faces)
    keep = areas > DEGENERATE_AREA
    degenerate = int(np.count_nonzero(~keep))
    faces = faces[keep]

    singular = np.zeros(len(labels), dtype=bool)
    if ambient in DS_TAGS:
        singular = singular_vertices(gauss, faces)

    metadata = {
        "k": params.k,
        "lambda": params.lam,
        "c": params.c,
        "ambient": ambient,
        "alpha": result.alpha,
        "beta": result.beta,
        "resolution": [n_rad, n_ang],
        "r_range": list(r_range),
        "vertex_slots": k1 * n_rad * n_ang,
        "vertices": len(labels),
        "faces": int(len(faces)),
        "plaquette_residual": plaquette,
        "closure_residual": closure,
        "open_cells": open_cells,
        "degenerate_faces_dropped": degenerate,
        "edge_failures": failures,
        "singular_vertices": int(np.count_nonzero(singular)),
    }
    return MeshData(verts, points, faces, singular, metadata, np.array(labels), gauss)


def _reverse_lookup(propagators, key, s_end, k1):
    """Propagator of z-edge ``key`` whose lift ends on sheet ``s_end``, with its start sheet."""
    for s in range(k1):
        entry = propagators.get((key, s))
        if entry is not None and entry[1] == s_end:
            return entry[0], s
    return None


def triangle_areas(verts: np.ndarray, faces: np.ndarray) -> np.ndarray:
    if len(faces) == 0:
        return np.zeros(0)
    a, b, c = verts[faces[:, 0]], verts[faces[:, 1]], verts[faces[:, 2]]
    return 0.5 * np.linalg.norm(np.cross(b - a, c - a), axis=1)


def singular_vertices(gauss: np.ndarray, faces: np.ndarray, tol: float = SINGULAR_TOL) -> np.ndarray:
    """Vertices on the singular set |G| = 1 of a de Sitter surface.

    A vertex is flagged when ||G| - 1| < tol, or when |G| - 1 changes sign
    along a mesh edge and it is the endpoint closer to |G| = 1.
    """
    dev = np.abs(gauss) - 1
    flags = np.abs(dev) < tol
    if len(faces):
        e = np.concatenate([faces[:, [0, 1]], faces[:, [1, 2]], faces[:, [2, 0]]])
        cross = dev[e[:, 0]] * dev[e[:, 1]] < 0
        e = e[cross]
        closer = np.where(np.abs(dev[e[:, 0]]) <= np.abs(dev[e[:, 1]]), e[:, 0], e[:, 1])
        flags[closer] = True
    return flags


MESH_FORMATS = ("obj", "ply")


def write_obj(mesh: MeshData, path) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write(f"# k={mesh.metadata.get('k')} lambda={mesh.metadata.get('lambda')!r} "
                 f"c={mesh.metadata.get('c')!r} ambient={mesh.metadata.get('ambient')}\n")
        for x, y, z in mesh.vertices:
            fh.write(f"v {x:.10g} {y:.10g} {z:.10g}\n")
        for a, b, c in mesh.faces + 1:
            fh.write(f"f {a} {b} {c}\n")


_PLY_VERTEX = np.dtype([
    ("x", "<f4"), ("y", "<f4"), ("z", "<f4"), ("singular", "u1"),
    ("m0", "<f8"), ("m1", "<f8"), ("m2", "<f8"), ("m3", "<f8"),
])
_PLY_FACE = np.dtype([("n", "u1"), ("idx", "<i4", (3,))])


def write_ply(mesh: MeshData, path) -> None:
    """Binary little-endian PLY with a per-vertex ``singular`` flag and raw Minkowski coordinates."""
    verts = np.zeros(len(mesh.vertices), dtype=_PLY_VERTEX)
    for n, name in enumerate("xyz"):
        verts[name] = mesh.vertices[:, n]
    verts["singular"] = mesh.singular_flags.astype(np.uint8)
    for n in range(4):
        verts[f"m{n}"] = mesh.ambient_points[:, n]
    faces = np.zeros(len(mesh.faces), dtype=_PLY_FACE)
    faces["n"] = 3
    faces["idx"] = mesh.faces
    header = "\n".join([
        "ply",
        "format binary_little_endian 1.0",
        f"comment ambient {mesh.metadata.get('ambient')}",
        f"element vertex {len(verts)}",
        "property float x",
        "property float y",
        "property float z",
        "property uchar singular",
        "property double m0",
        "property double m1",
        "property double m2",
        "property double m3",
        f"element face {len(faces)}",
        "property list uchar int vertex_indices",
        "end_header",
    ]) + "\n"
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        fh.write(verts.tobytes())
        fh.write(faces.tobytes())


def read_ply(path) -> tuple[np.ndarray, np.ndarray]:
    """Read back the vertex records and faces written by :func:`write_ply`."""
    with open(path, "rb") as fh:
        data = fh.read()
    end = data.index(b"end_header\n") + len(b"end_header\n")
    counts = {}
    for line_ in data[:end].decode("ascii").splitlines():
        parts = line_.split()
        if parts[:1] == ["element"]:
            counts[parts[1]] = int(parts[2])
    nv, nf = counts["vertex"], counts["face"]
    verts = np.frombuffer(data, _PLY_VERTEX, nv, end)
    faces = np.frombuffer(data, _PLY_FACE, nf, end + nv * _PLY_VERTEX.itemsize)
    return verts, faces["idx"].copy()


def mesh_format(path) -> str:
    suffix = str(path).rsplit(".", 1)[-1].lower() if "." in str(path) else ""
    if suffix not in MESH_FORMATS:
        raise ParameterError(f"unsupported mesh format {suffix!r}; use .obj or .ply")
    return suffix


def export_mesh(mesh: MeshData, path) -> str:
    """Write ``path`` (.obj or .ply) plus a ``.json`` metadata sidecar; returns the sidecar path."""
    fmt = mesh_format(path)
    (write_obj if fmt == "obj" else write_ply)(mesh, path)
    sidecar = str(path).rsplit(".", 1)[0] + ".json"
    with open(sidecar, "w", encoding="utf-8") as fh:
        json.dump(mesh.metadata, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return sidecar
