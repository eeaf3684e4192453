"""Intrinsic triangle meshes carrying edge lengths only."""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

TAGS = ("Dirichlet", "Neumann", "GlueSeam", "CuspRim")


class MeshError(ValueError):
    """Raised for non-manifold, degenerate or mismatched meshes."""


@dataclass
class BoundaryLoop:
    tag: str
    vertices: np.ndarray
    label: str = ""

    def __post_init__(self) -> None:
        if self.tag not in TAGS:
            raise MeshError(f"unknown boundary tag {self.tag!r}")
        self.vertices = np.asarray(self.vertices, dtype=np.int64)


@dataclass
class Piece:
    """Provenance of one pre-glue block copy inside an assembled mesh.

    ``vertex_map[i]`` is the assembled index of local vertex ``i`` and
    ``slot_distance[i, s]`` the chart distance from that vertex to the
    boundary curve in slot ``s`` of the block.
    """

    block: int
    sheet: int
    vertex_map: np.ndarray
    slot_distance: np.ndarray


@dataclass(frozen=True)
class MeshQuality:
    h_max: float
    min_angle: float
    n_vertices: int
    n_triangles: int


@dataclass
class HyperbolicMesh:
    """Triangulated surface with per-triangle edge lengths.

    ``lengths[f, k]`` is the length of the edge from ``triangles[f, k]`` to
    ``triangles[f, (k + 1) % 3]``.  ``metric`` is ``"hyperbolic"`` (curvature
    -1 triangles) or ``"euclidean"`` (flat comparison meshes).
    """

    n_vertices: int
    triangles: np.ndarray
    lengths: np.ndarray
    boundary: list[BoundaryLoop] = field(default_factory=list)
    metric: str = "hyperbolic"
    seams: dict[str, np.ndarray] = field(default_factory=dict)
    pieces: list[Piece] = field(default_factory=list)
    vertex_block: np.ndarray | None = None
    vertex_chart: np.ndarray | None = None
    vertex_sheet: np.ndarray | None = None
    twists: dict[str, tuple[float, float, int]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.triangles = np.ascontiguousarray(self.triangles, dtype=np.int64).reshape(-1, 3)
        self.lengths = np.ascontiguousarray(self.lengths, dtype=float).reshape(-1, 3)
        if self.metric not in ("hyperbolic", "euclidean"):
            raise MeshError(f"unknown metric {self.metric!r}")

    # -- combinatorics -----------------------------------------------------

    def edges(self) -> tuple[np.ndarray, np.ndarray]:
        """Unique undirected edges ``(E, 2)`` (sorted pairs) and their lengths."""
        t = self.triangles
        e = np.stack([t, np.roll(t, -1, axis=1)], axis=-1).reshape(-1, 2)
        e.sort(axis=1)
        uniq, idx = np.unique(e, axis=0, return_index=True)
        return uniq, self.lengths.reshape(-1)[idx]

    @property
    def edge_lengths(self) -> dict[tuple[int, int], float]:
        e, l = self.edges()
        return {(int(a), int(b)): float(x) for (a, b), x in zip(e, l)}

    def euler_characteristic(self) -> int:
        used = np.unique(self.triangles).size
        return int(used - len(self.edges()[0]) + len(self.triangles))

    def boundary_edges(self) -> np.ndarray:
        """Directed edges that belong to exactly one triangle."""
        t = self.triangles
        d = np.stack([t, np.roll(t, -1, axis=1)], axis=-1).reshape(-1, 2)
        key = np.sort(d, axis=1)
        _, inv, counts = np.unique(key, axis=0, return_inverse=True, return_counts=True)
        return d[counts[inv.reshape(-1)] == 1]

    def n_boundary_components(self) -> int:
        b = self.boundary_edges()
        if len(b) == 0:
            return 0
        verts, inv = np.unique(b, return_inverse=True)
        inv = inv.reshape(-1, 2)
        g = coo_matrix((np.ones(len(inv)), (inv[:, 0], inv[:, 1])), shape=(len(verts),) * 2)
        return int(connected_components(g, directed=False)[0])

    def adjacency(self):
        e, l = self.edges()
        n = self.n_vertices
        return coo_matrix(
            (np.concatenate([l, l]), (np.concatenate([e[:, 0], e[:, 1]]), np.concatenate([e[:, 1], e[:, 0]]))),
            shape=(n, n),
        ).tocsr()

    def is_connected(self) -> bool:
        return connected_components(self.adjacency(), directed=False)[0] == 1

    # -- metric quantities ---------------------------------------------------

    def triangle_areas(self) -> np.ndarray:
        if self.metric == "euclidean":
            return heron_area(self.lengths)
        return hyperbolic_area(self.lengths)

    def area(self) -> float:
        return float(np.sum(self.triangle_areas()))

    def angles(self) -> np.ndarray:
        """Interior angle at corner ``k`` of every triangle, shape ``(F, 3)``."""
        l = self.lengths
        out = np.empty_like(l)
        for k in range(3):
            b = l[:, k]              # edge leaving corner k
            c = l[:, (k + 2) % 3]    # edge arriving at corner k
            a = l[:, (k + 1) % 3]    # opposite edge
            out[:, k] = corner_angle(a, b, c, self.metric)
        return out

    def quality(self) -> MeshQuality:
        return MeshQuality(
            h_max=float(self.lengths.max()),
            min_angle=float(self.angles().min()),
            n_vertices=int(self.n_vertices),
            n_triangles=int(len(self.triangles)),
        )

    def vertex_areas(self) -> np.ndarray:
        """Lumped area: a third of each incident triangle."""
        a = self.triangle_areas() / 3.0
        return np.bincount(self.triangles.reshape(-1), weights=np.repeat(a, 3), minlength=self.n_vertices)

    def tagged_vertices(self, tag: str) -> np.ndarray:
        loops = [b.vertices for b in self.boundary if b.tag == tag]
        if not loops:
            return np.zeros(0, dtype=np.int64)
        return np.unique(np.concatenate(loops))

    def mesh_hash(self) -> str:
        h = hashlib.sha256()
        h.update(self.metric.encode())
        h.update(np.int64(self.n_vertices).tobytes())
        h.update(self.triangles.tobytes())
        h.update(self.lengths.tobytes())
        return h.hexdigest()

    # -- validation ----------------------------------------------------------

    def validate(self, length_rtol: float = 1e-9) -> None:
        """Check the mesh is an oriented 2-manifold with consistent, valid lengths."""
        t, l = self.triangles, self.lengths
        if t.min() < 0 or t.max() >= self.n_vertices:
            raise MeshError("triangle index out of range")
        if np.any((t[:, 0] == t[:, 1]) | (t[:, 1] == t[:, 2]) | (t[:, 0] == t[:, 2])):
            raise MeshError("degenerate triangle with repeated vertex")
        if np.any(l <= 0):
            raise MeshError("nonpositive edge length")
        for k in range(3):
            if np.any(l[:, k] >= l[:, (k + 1) % 3] + l[:, (k + 2) % 3]):
                raise MeshError("triangle inequality violated")
        if np.any(self.triangle_areas() <= 0):
            raise MeshError("triangle with nonpositive area")
        d = np.stack([t, np.roll(t, -1, axis=1)], axis=-1).reshape(-1, 2)
        _, counts = np.unique(d, axis=0, return_counts=True)
        if np.any(counts > 1):
            raise MeshError("inconsistent orientation or duplicated triangle")
        key = np.sort(d, axis=1)
        uniq, inv, counts = np.unique(key, axis=0, return_inverse=True, return_counts=True)
        inv = inv.reshape(-1)
        if np.any(counts > 2):
            raise MeshError("non-manifold edge")
        flat = l.reshape(-1)
        lo = np.full(len(uniq), np.inf)
        hi = np.zeros(len(uniq))
        np.minimum.at(lo, inv, flat)
        np.maximum.at(hi, inv, flat)
        if np.any(hi - lo > length_rtol * hi):
            raise MeshError("edge lengths disagree between neighbouring triangles")
        self._check_vertex_links()
        if not self.is_connected():
            raise MeshError("mesh is not connected")

    def _check_vertex_links(self) -> None:
        """Each vertex star must be a single fan (disk or half-disk)."""
        t = self.triangles
        nf = len(t)
        corner_v = t.reshape(-1)
        corner_f = np.repeat(np.arange(nf), 3)
        # two triangles around a vertex are adjacent if they share an edge through it
        d = np.stack([t, np.roll(t, -1, axis=1)], axis=-1).reshape(-1, 2)
        key = np.sort(d, axis=1)
        uniq, inv = np.unique(key, axis=0, return_inverse=True)
        inv = inv.reshape(-1)
        face_of = np.repeat(np.arange(nf), 3)
        order = np.argsort(inv, kind="stable")
        inv_s, face_s = inv[order], face_of[order]
        pair = np.nonzero(inv_s[1:] == inv_s[:-1])[0]
        fa, fb = face_s[pair], face_s[pair + 1]
        ea = uniq[inv_s[pair]]
        # node = (vertex, face) corner; connect corners sharing the edge endpoint
        corner_index = {}
        for i, (v, f) in enumerate(zip(corner_v, corner_f)):
            corner_index[(int(v), int(f))] = i
        rows, cols = [], []
        for (u, w), f1, f2 in zip(ea, fa, fb):
            for v in (u, w):
                rows.append(corner_index[(int(v), int(f1))])
                cols.append(corner_index[(int(v), int(f2))])
        n = len(corner_v)
        g = coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n))
        _, lab = connected_components(g, directed=False)
        fans = np.unique(np.stack([corner_v, lab], axis=1), axis=0)
        per_vertex = np.bincount(fans[:, 0], minlength=self.n_vertices)
        if np.any(per_vertex > 1):
            bad = int(np.nonzero(per_vertex > 1)[0][0])
            raise MeshError(f"vertex {bad} is a pinch point (star is not a single fan)")

    # -- io --------------------------------------------------------------------

    def save(self, path: str | Path) -> None:
        header = "HYPMESH v1" if self.metric == "hyperbolic" else "FLATMESH v1"
        lines = [header, f"vertices {self.n_vertices}", f"triangles {len(self.triangles)}"]
        lines += [f"{a} {b} {c}" for a, b, c in self.triangles.tolist()]
        lines.append(f"lengths {len(self.lengths)}")
        lines += [" ".join(repr(float(x)) for x in row) for row in self.lengths.tolist()]
        loops = list(self.boundary) + [BoundaryLoop("GlueSeam", v, k) for k, v in self.seams.items()]
        lines.append(f"boundary {len(loops)}")
        for b in loops:
            label = b.label or "-"
            lines.append(f"{b.tag} {label} {len(b.vertices)} " + " ".join(map(str, b.vertices.tolist())))
        Path(path).write_text("\n".join(lines) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "HyperbolicMesh":
        lines = Path(path).read_text().splitlines()
        header = lines[0].strip()
        if header == "HYPMESH v1":
            metric = "hyperbolic"
        elif header == "FLATMESH v1":
            metric = "euclidean"
        else:
            raise MeshError(f"unrecognised mesh header {header!r}")
        pos = 1

        def expect(word: str) -> int:
            nonlocal pos
            key, val = lines[pos].split()
            if key != word:
                raise MeshError(f"expected {word!r} section, got {key!r}")
            pos += 1
            return int(val)

        nv = expect("vertices")
        nf = expect("triangles")
        tris = np.array([list(map(int, lines[pos + i].split())) for i in range(nf)], dtype=np.int64)
        pos += nf
        nl = expect("lengths")
        lens = np.array([list(map(float, lines[pos + i].split())) for i in range(nl)], dtype=float)
        pos += nl
        nb = expect("boundary")
        boundary, seams = [], {}
        for i in range(nb):
            parts = lines[pos + i].split()
            tag, label, n = parts[0], parts[1], int(parts[2])
            verts = np.array(list(map(int, parts[3 : 3 + n])), dtype=np.int64)
            label = "" if label == "-" else label
            if tag == "GlueSeam" and label.startswith("curve:"):
                seams[label] = verts
            else:
                boundary.append(BoundaryLoop(tag, verts, label))
        return cls(nv, tris.reshape(-1, 3), lens.reshape(-1, 3), boundary, metric, seams)


# ---------------------------------------------------------------------------
# triangle formulas
# ---------------------------------------------------------------------------


def heron_area(lengths: np.ndarray) -> np.ndarray:
    """Numerically stable Heron formula (Kahan ordering)."""
    s = -np.sort(-np.asarray(lengths, dtype=float), axis=-1)
    a, b, c = s[..., 0], s[..., 1], s[..., 2]
    q = (a + (b + c)) * (c - (a - b)) * (c + (a - b)) * (a + (b - c))
    return 0.25 * np.sqrt(np.maximum(q, 0.0))


def hyperbolic_area(lengths: np.ndarray) -> np.ndarray:
    """Angle deficit of a hyperbolic triangle from its side lengths.

    Hyperbolic L'Huilier: ``tan(A/4)^2 = tanh(s/2) tanh((s-a)/2)
    tanh((s-b)/2) tanh((s-c)/2)`` with the semiperimeter differences formed
    without cancellation.
    """
    s = -np.sort(-np.asarray(lengths, dtype=float), axis=-1)
    a, b, c = s[..., 0], s[..., 1], s[..., 2]
    sp = 0.5 * (a + b + c)
    sa = 0.5 * (c - (a - b))
    sb = 0.5 * (c + (a - b))
    sc = 0.5 * (a + (b - c))
    q = np.tanh(sp / 2) * np.tanh(sa / 2) * np.tanh(sb / 2) * np.tanh(sc / 2)
    return 4.0 * np.arctan(np.sqrt(np.maximum(q, 0.0)))


def corner_angle(a, b, c, metric: str = "hyperbolic"):
    """Angle between sides ``b`` and ``c`` opposite side ``a`` (half-angle form)."""
    a, b, c = (np.asarray(x, dtype=float) for x in (a, b, c))
    s = 0.5 * (a + b + c)
    if metric == "euclidean":
        num = (s - b) * (s - c)
        den = b * c
    else:
        num = np.sinh(s - b) * np.sinh(s - c)
        den = np.sinh(b) * np.sinh(c)
    return 2.0 * np.arcsin(np.sqrt(np.clip(num / den, 0.0, 1.0)))


# ---------------------------------------------------------------------------
# assembly helpers
# ---------------------------------------------------------------------------


def disjoint_union(meshes: list[HyperbolicMesh]) -> tuple[HyperbolicMesh, list[int]]:
    """Stack meshes without identification; returns the union and vertex offsets."""
    offsets, tris, lens, boundary, pieces = [], [], [], [], []
    blocks, charts, sheets = [], [], []
    seams = {}
    off = 0
    metric = meshes[0].metric
    for m in meshes:
        if m.metric != metric:
            raise MeshError("cannot join meshes with different metrics")
        offsets.append(off)
        tris.append(m.triangles + off)
        lens.append(m.lengths)
        boundary += [BoundaryLoop(b.tag, b.vertices + off, b.label) for b in m.boundary]
        seams.update({k: v + off for k, v in m.seams.items()})
        pieces += [Piece(p.block, p.sheet, p.vertex_map + off, p.slot_distance) for p in m.pieces]
        n = m.n_vertices
        blocks.append(m.vertex_block if m.vertex_block is not None else np.full(n, -1))
        charts.append(m.vertex_chart if m.vertex_chart is not None else np.full((n, 2), np.nan))
        sheets.append(m.vertex_sheet if m.vertex_sheet is not None else np.zeros(n, dtype=np.int64))
        off += n
    out = HyperbolicMesh(
        off, np.concatenate(tris), np.concatenate(lens), boundary, metric, seams, pieces,
        np.concatenate(blocks), np.concatenate(charts), np.concatenate(sheets),
    )
    return out, offsets


def identify(mesh: HyperbolicMesh, pairs: np.ndarray) -> tuple[HyperbolicMesh, np.ndarray]:
    """Merge vertex pairs ``(k, 2)``; returns the merged mesh and the old->new index map.

    Representatives keep the smallest original index so numbering is
    deterministic.  Boundary loops are remapped; loops consumed by the
    identification must be removed by the caller.
    """
    n = mesh.n_vertices
    parent = np.arange(n)

    def find(i: int) -> int:
        root = i
        while parent[root] != root:
            root = parent[root]
        while parent[i] != root:
            parent[i], i = root, parent[i]
        return root

    for a, b in np.asarray(pairs, dtype=np.int64).reshape(-1, 2):
        ra, rb = find(int(a)), find(int(b))
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)
    roots = np.array([find(i) for i in range(n)])
    uniq, new = np.unique(roots, return_inverse=True)
    keep = uniq  # representative old index of each new vertex

    def take(arr):
        return None if arr is None else arr[keep]

    out = HyperbolicMesh(
        len(uniq),
        new[mesh.triangles],
        mesh.lengths.copy(),
        [BoundaryLoop(b.tag, new[b.vertices], b.label) for b in mesh.boundary],
        mesh.metric,
        {k: new[v] for k, v in mesh.seams.items()},
        [Piece(p.block, p.sheet, new[p.vertex_map], p.slot_distance) for p in mesh.pieces],
        take(mesh.vertex_block),
        take(mesh.vertex_chart),
        take(mesh.vertex_sheet),
        dict(mesh.twists),
    )
    return out, new


def loop_pairs(loop_a: np.ndarray, loop_b: np.ndarray, shift: int) -> np.ndarray:
    """Orientation-reversing identification ``a[j] <-> b[(shift - j) mod n]``."""
    n = len(loop_a)
    if len(loop_b) != n:
        raise MeshError(f"seam mismatch: {n} vs {len(loop_b)} segments")
    j = np.arange(n)
    return np.stack([loop_a[j], loop_b[(shift - j) % n]], axis=1)


def quantize_twist(twist: float, length: float, n_seg: int) -> tuple[int, float]:
    """Nearest whole number of seam segments to a requested twist (halves round up)."""
    seg = length / n_seg
    shift = int(math.floor(twist / seg + 0.5))
    return shift, shift * seg
