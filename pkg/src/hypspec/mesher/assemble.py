"""Gluing block meshes into surfaces and cyclic covers."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..geometry.surface import FNSurface, SurfaceError
from .mesh import BoundaryLoop, HyperbolicMesh, MeshError, Piece, disjoint_union, identify, loop_pairs, quantize_twist
from .pants import mesh_pants


@dataclass(frozen=True)
class Join:
    part_a: int
    slot_a: int
    part_b: int
    slot_b: int
    twist: float
    length: float
    label: str


def block_meshes(surface: FNSurface, h: float, **kwargs) -> list[HyperbolicMesh]:
    """One mesh per block; blocks with identical geometry share the triangulation."""
    cache: dict = {}
    out = []
    for b, blk in enumerate(surface.blocks):
        key = (blk.kind, blk.lengths)
        if key not in cache:
            cache[key] = mesh_pants(blk, h, block_id=b, **kwargs)
        out.append(cache[key])
    return out


def _slot_loop(mesh: HyperbolicMesh, slot: int) -> np.ndarray:
    for b in mesh.boundary:
        if b.label == f"slot:{slot}":
            return b.vertices
    raise MeshError(f"mesh has no boundary loop for slot {slot}")


def _loop_length(mesh: HyperbolicMesh, loop: np.ndarray) -> float:
    lookup = mesh.edge_lengths
    nxt = np.roll(loop, -1)
    return float(sum(lookup[(min(a, b), max(a, b))] for a, b in zip(loop.tolist(), nxt.tolist())))


def _join(
    parts: list[tuple[HyperbolicMesh, int, int]],
    joins: list[Join],
    free_bc: str,
    check_rtol: float = 1e-9,
) -> HyperbolicMesh:
    """Union of ``(mesh, block, sheet)`` parts with the listed slot identifications."""
    staged = []
    for mesh, block, sheet in parts:
        n = mesh.n_vertices
        boundary = []
        for b in mesh.boundary:
            if b.label.startswith("slot:"):
                boundary.append(BoundaryLoop(b.tag, b.vertices, f"{b.label}:{len(staged)}"))
            else:
                boundary.append(BoundaryLoop(b.tag, b.vertices, f"{b.label}:{block}:{sheet}"))
        staged.append(HyperbolicMesh(
            n, mesh.triangles, mesh.lengths, boundary, mesh.metric,
            pieces=[Piece(block, sheet, p.vertex_map, p.slot_distance) for p in mesh.pieces],
            vertex_block=np.full(n, block),
            vertex_chart=mesh.vertex_chart,
            vertex_sheet=np.full(n, sheet, dtype=np.int64),
        ))
    union, offsets = disjoint_union(staged)

    pairs, seams, twists, used = [], {}, {}, set()
    loop_len_cache: dict = {}
    for j in joins:
        ma, mb = parts[j.part_a][0], parts[j.part_b][0]
        la, lb = _slot_loop(ma, j.slot_a), _slot_loop(mb, j.slot_b)
        if len(la) != len(lb):
            raise MeshError(f"seam {j.label}: segment counts differ ({len(la)} vs {len(lb)})")
        lens = []
        for m, slot, loop in ((ma, j.slot_a, la), (mb, j.slot_b, lb)):
            key = (id(m), slot)
            if key not in loop_len_cache:
                loop_len_cache[key] = _loop_length(m, loop)
            lens.append(loop_len_cache[key])
        if abs(lens[0] - lens[1]) > check_rtol * max(lens):
            raise MeshError(f"seam {j.label}: discrete lengths differ ({lens[0]!r} vs {lens[1]!r})")
        shift, applied = quantize_twist(j.twist, j.length, len(la))
        ga, gb = la + offsets[j.part_a], lb + offsets[j.part_b]
        pairs.append(loop_pairs(ga, gb, shift))
        seams[j.label] = ga
        twists[j.label] = (j.twist, applied, shift)
        used |= {f"slot:{j.slot_a}:{j.part_a}", f"slot:{j.slot_b}:{j.part_b}"}

    boundary = []
    for b in union.boundary:
        if b.label in used:
            continue
        if b.label.startswith("slot:"):
            _, slot, part = b.label.split(":")
            _, block, sheet = parts[int(part)]
            boundary.append(BoundaryLoop(free_bc, b.vertices, f"free:{block}:{slot}:{sheet}"))
        else:
            boundary.append(b)
    union.boundary = boundary
    union.seams = seams
    merged, _ = identify(union, np.concatenate(pairs) if pairs else np.zeros((0, 2), dtype=np.int64))
    merged.twists = twists
    merged.validate()
    return merged


def glue(
    surface: FNSurface,
    h: float | None = None,
    meshes: list[HyperbolicMesh] | None = None,
    free_bc: str = "Dirichlet",
    **kwargs,
) -> HyperbolicMesh:
    """Assemble the surface mesh; twists come from the surface's gluings.

    Each twist is rounded to a whole number of seam segments (halves round
    up).  ``mesh.twists[label]`` records ``(requested, applied, shift)`` and
    ``mesh.seams[label]`` the glued curve, with ``label = "curve:i"``.  Free
    boundary slots become loops tagged ``free_bc``.
    """
    if free_bc not in ("Dirichlet", "Neumann"):
        raise MeshError(f"free boundary condition must be Dirichlet or Neumann, got {free_bc!r}")
    if meshes is None:
        if h is None:
            raise MeshError("glue needs either h or per-block meshes")
        meshes = block_meshes(surface, h, **kwargs)
    if len(meshes) != len(surface.blocks):
        raise MeshError(f"expected {len(surface.blocks)} block meshes, got {len(meshes)}")
    parts = [(m, b, 0) for b, m in enumerate(meshes)]
    joins = [
        Join(g.a[0], g.a[1], g.b[0], g.b[1], g.twist, surface.length(g.a), f"curve:{i}")
        for i, g in enumerate(surface.gluings)
    ]
    return _join(parts, joins, free_bc)


def cyclic_cover_mesh(
    surface: FNSurface,
    curve: int,
    k: int,
    n: int,
    h: float | None = None,
    meshes: list[HyperbolicMesh] | None = None,
    free_bc: str = "Dirichlet",
    **kwargs,
) -> HyperbolicMesh:
    """Cyclic cover of order ``(k + 2) n`` unwrapping a non-separating curve.

    The surface is cut along gluing ``curve`` into ``T`` with boundary
    ``c_+`` (the gluing's first slot) and ``c_-`` (its second).  Copy ``i``
    of ``T`` is attached along ``c_+`` to copy ``i + 1`` along ``c_-``,
    indices modulo the order.
    """
    if not (isinstance(k, (int, np.integer)) and k >= 1):
        raise ValueError(f"the cover needs k >= 1, got {k}")
    if not (isinstance(n, (int, np.integer)) and n >= 1):
        raise ValueError(f"the cover needs n >= 1, got {n}")
    if not 0 <= curve < len(surface.gluings):
        raise SurfaceError(f"curve index {curve} out of range (surface has {len(surface.gluings)} curves)")
    if surface.is_separating(curve):
        raise SurfaceError(
            f"curve {curve} separates the surface; cutting it leaves two pieces, so there is no "
            "cyclic cover unwrapping it"
        )
    order = (k + 2) * n
    if meshes is None:
        if h is None:
            raise MeshError("cyclic_cover_mesh needs either h or per-block meshes")
        meshes = block_meshes(surface, h, **kwargs)
    nb = len(surface.blocks)
    parts = [(meshes[b], b, i) for i in range(order) for b in range(nb)]
    joins = []
    for i in range(order):
        for gi, g in enumerate(surface.gluings):
            length = surface.length(g.a)
            if gi == curve:
                nxt = (i + 1) % order
                joins.append(Join(i * nb + g.a[0], g.a[1], nxt * nb + g.b[0], g.b[1], g.twist, length,
                                  f"curve:{gi}:{i}"))
            else:
                joins.append(Join(i * nb + g.a[0], g.a[1], i * nb + g.b[0], g.b[1], g.twist, length,
                                  f"curve:{gi}:{i}"))
    mesh = _join(parts, joins, free_bc)
    mesh.cover_order = order
    return mesh


def twist_residual(mesh: HyperbolicMesh) -> float:
    """Largest gap between requested and applied twist."""
    if not mesh.twists:
        return 0.0
    return max(abs(req - app) for req, app, _ in mesh.twists.values())


def surface_area(surface: FNSurface) -> float:
    return 2.0 * math.pi * len(surface.blocks)
