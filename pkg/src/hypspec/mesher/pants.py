"""Meshes of single building blocks: pants, truncated cusps, disks and flat tori."""

from __future__ import annotations

import math

import numpy as np
import triangle as tr

from ..geometry.hyperbolic import (
    distance,
    from_poincare,
    hexagon_from_alternate,
    left_normal,
    minkowski,
    to_poincare,
    trace_hexagon,
)
from ..geometry.surface import PantsBlock
from .mesh import BoundaryLoop, HyperbolicMesh, MeshError, Piece, identify, disjoint_union, loop_pairs

CUSP_HOROCYCLE = 1.0
MIN_SEGMENTS = 3
BOUNDARY_FILL = 0.9
MAX_REFINE = 40


def slot_segments(length: float, h: float) -> int:
    """Segments on one half of a boundary curve; the full curve gets twice this."""
    return max(MIN_SEGMENTS, math.ceil(length / (2.0 * h)))


def cusp_segments(h: float, ell_c: float = CUSP_HOROCYCLE) -> int:
    """Half-horocycle segments: ``3 * 2^p`` so the cusp annulus can coarsen by halving."""
    m = MIN_SEGMENTS
    while ell_c / (2 * m) > BOUNDARY_FILL * h:
        m *= 2
    return m


def default_cusp_depth(h: float, ell_c: float = CUSP_HOROCYCLE) -> float:
    """Depth at which the rim horocycle has length ``h / 10``."""
    return max(math.log(10.0 * ell_c / h), 1e-3)


# ---------------------------------------------------------------------------
# boundary sampling
# ---------------------------------------------------------------------------


def _graded_params(length: float, h: float, d0: float, d1: float) -> np.ndarray:
    """Arclength parameters ``0 = s_0 < ... < s_n = length`` on a seam.

    Target spacing ``min(h, d0 cosh s, d1 cosh(L - s))`` follows the width of
    a thin hexagon near its short sides, so the cells stay roughly isotropic.
    """
    grid = np.linspace(0.0, length, 4097)
    with np.errstate(over="ignore"):
        spacing = np.minimum.reduce([
            np.full_like(grid, BOUNDARY_FILL * h),
            d0 * np.cosh(grid),
            d1 * np.cosh(length - grid),
        ])
    dens = 1.0 / spacing
    cum = np.concatenate([[0.0], np.cumsum(0.5 * (dens[1:] + dens[:-1]) * np.diff(grid))])
    n = max(MIN_SEGMENTS, math.ceil(cum[-1]))
    return np.interp(np.linspace(0.0, cum[-1], n + 1), cum, grid)


def _hexagon_boundary(sides, seg_alt: tuple[int, int, int], h: float):
    """Sample the six sides; returns points, side index, and per-side point lists."""
    pts, side_of, per_side = [], [], []
    for k, side in enumerate(sides):
        if k % 2 == 0:
            m = seg_alt[k // 2]
            s = np.linspace(0.0, side.length, m + 1)
        else:
            before, after = sides[k - 1], sides[(k + 1) % 6]
            d0 = before.length / seg_alt[(k - 1) // 2]
            d1 = after.length / seg_alt[((k + 1) % 6) // 2]
            s = _graded_params(side.length, h, d0, d1)
        xs = side.points(s[:-1])
        idx = list(range(len(pts), len(pts) + len(xs)))
        pts.extend(xs)
        side_of.extend([k] * len(xs))
        per_side.append(idx)
    # every side also owns the next corner
    for k in range(6):
        per_side[k] = per_side[k] + [per_side[(k + 1) % 6][0]]
    return np.array(pts), np.array(side_of), per_side


# ---------------------------------------------------------------------------
# chart triangulation with hyperbolic size control
# ---------------------------------------------------------------------------


def _cross2(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    return u[..., 0] * v[..., 1] - u[..., 1] * v[..., 0]


def _edge_table(tris: np.ndarray, X: np.ndarray, metric: str) -> np.ndarray:
    a, b = tris, np.roll(tris, -1, axis=1)
    if metric == "euclidean":
        return np.linalg.norm(X[a] - X[b], axis=-1)
    return distance(X[a], X[b])


def _pinned_chords(tris: np.ndarray, pinned: np.ndarray, nb: int) -> np.ndarray:
    e = np.sort(np.stack([tris, np.roll(tris, -1, axis=1)], axis=-1).reshape(-1, 2), axis=1)
    e = np.unique(e, axis=0)
    both = (e[:, 1] < nb) & pinned[np.minimum(e[:, 0], nb - 1)] & pinned[np.minimum(e[:, 1], nb - 1)]
    # consecutive boundary vertices are segments, not chords
    gap = (e[:, 1] - e[:, 0]) % nb
    seg = (gap == 1) | (gap == nb - 1)
    return e[both & ~seg]


def triangulate_chart(
    boundary_z: np.ndarray,
    lift,
    h: float,
    metric: str = "hyperbolic",
    label: str = "",
    pinned: np.ndarray | None = None,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Constrained triangulation of a closed chart polygon until every edge is ``<= h``.

    ``lift`` maps chart points to the model where lengths are measured.
    Boundary vertices are kept as given (no Steiner points on segments) and
    occupy the first ``len(boundary_z)`` indices.  No interior edge may join
    two boundary vertices flagged in ``pinned`` (such chords would be
    doubled when the polygon is mirrored); offending chords get a Steiner
    point at their midpoint.  Returns chart points,
    triangles (counter-clockwise in the chart) and edge lengths.
    """
    nb = len(boundary_z)
    seg = np.stack([np.arange(nb), (np.arange(nb) + 1) % nb], axis=1)
    chart_area = 0.5 * abs(np.sum(boundary_z[:, 0] * np.roll(boundary_z[:, 1], -1)
                                  - np.roll(boundary_z[:, 0], -1) * boundary_z[:, 1]))
    data = tr.triangulate({"vertices": boundary_z, "segments": seg}, "pq25Y")
    for _ in range(MAX_REFINE):
        z, tris = data["vertices"], data["triangles"]
        if not np.array_equal(z[:nb], boundary_z):
            raise MeshError(f"{label}: triangulator moved boundary vertices")
        if pinned is not None:
            chords = _pinned_chords(tris, pinned, nb)
            if len(chords):
                extra = 0.5 * (z[chords[:, 0]] + z[chords[:, 1]])
                data = tr.triangulate({"vertices": np.concatenate([z, extra]), "segments": seg}, "pq25Y")
                continue
        lens = _edge_table(tris, lift(z), metric)
        worst = lens.max(axis=1)
        if worst.max() <= h * (1 + 1e-9):
            break
        p = z[tris]
        area = 0.5 * np.abs(_cross2(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]))
        ratio = np.minimum(1.0, (0.8 * h / worst) ** 2)
        cap = np.where(worst > h * (1 + 1e-9), area * ratio, chart_area)
        data = tr.triangulate(
            {"vertices": z, "segments": data["segments"], "triangles": tris,
             "triangle_max_area": cap.reshape(-1, 1)},
            "rpq25Ya",
        )
    else:
        raise MeshError(f"{label}: refinement did not reach h_max <= {h} (got {worst.max():.4g})")
    p = z[tris]
    signed = _cross2(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0])
    if np.any(signed <= 0):
        raise MeshError(f"{label}: triangulator produced clockwise or degenerate triangles")
    return z, tris.astype(np.int64), lens


# ---------------------------------------------------------------------------
# truncated cusp
# ---------------------------------------------------------------------------


def truncate_cusp(r_max: float, h: float, ell_c: float = CUSP_HOROCYCLE, n_seg: int | None = None) -> HyperbolicMesh:
    """Annulus ``[0, r_max] x R/ell_c Z`` with metric ``dr^2 + e^{-2r} ds^2``.

    Drawn in the upper half-plane as ``{1 <= y <= e^{r_max}}`` modulo
    ``x -> x + ell_c``.  The loop at ``r = 0`` (``n_seg`` points, labelled
    ``"cusp"``) is tagged GlueSeam and the rim at ``r_max`` CuspRim.  Columns
    halve whenever the circumferential spacing falls well below the radial
    step, down to three.
    """
    if not r_max > 0:
        raise MeshError(f"cusp depth must be positive, got {r_max}")
    rim = ell_c * math.exp(-r_max)
    if rim < 10 * np.finfo(float).eps:
        raise MeshError(f"cusp depth {r_max} leaves a rim of length {rim:.3g} below 10 machine epsilon")
    n = n_seg if n_seg is not None else 2 * cusp_segments(h, ell_c)
    if n < 3:
        raise MeshError("a cusp needs at least 3 segments")

    # rectangles circ x step with diagonal below h
    g = h / 1.5
    rows: list[tuple[float, int]] = [(0.0, n)]
    r, cols = 0.0, n
    while r < r_max - 1e-14:
        if cols % 2 == 0 and cols // 2 >= 3 and 2 * ell_c * math.exp(-r) / cols <= g:
            cols //= 2
        circ = ell_c * math.exp(-r) / cols
        step = min(g, circ, 0.95 * math.sqrt(max(h * h - circ * circ, 0.0)))
        if step <= 0:
            raise MeshError(f"cusp seam spacing {circ:.3g} exceeds h = {h}")
        nsteps_left = (r_max - r) / step
        r = r_max if nsteps_left < 1.5 else r + step
        rows.append((r, cols))

    xs, ys, row_start = [], [], []
    for r, c in rows:
        row_start.append(len(xs))
        xs.extend(ell_c * np.arange(c) / c)
        ys.extend([math.exp(r)] * c)
    xs, ys = np.array(xs), np.array(ys)

    tris = []
    for k in range(len(rows) - 1):
        (_, c0), (_, c1) = rows[k], rows[k + 1]
        lo, hi = row_start[k], row_start[k + 1]
        if c1 == c0:
            for j in range(c0):
                j1 = (j + 1) % c0
                tris.append((lo + j, lo + j1, hi + j1))
                tris.append((lo + j, hi + j1, hi + j))
        else:
            for j in range(c1):
                f0, f1, f2 = lo + 2 * j, lo + 2 * j + 1, lo + (2 * j + 2) % c0
                u0, u1 = hi + j, hi + (j + 1) % c1
                tris += [(f0, f1, u0), (f1, f2, u1), (f1, u1, u0)]
    tris = np.array(tris, dtype=np.int64)

    def edge_len(i, j):
        dx = np.abs(xs[i] - xs[j])
        dx = np.minimum(dx, ell_c - dx)
        yi, yj = ys[i], ys[j]
        # stable upper half-plane distance
        return 2.0 * np.arcsinh(0.5 * np.sqrt(dx * dx + (yi - yj) ** 2) / np.sqrt(yi * yj))

    lens = np.stack([edge_len(tris[:, k], tris[:, (k + 1) % 3]) for k in range(3)], axis=1)
    last = row_start[-1]
    rim_loop = np.arange(last, last + rows[-1][1])[::-1]
    mesh = HyperbolicMesh(
        len(xs), tris, lens,
        [BoundaryLoop("GlueSeam", np.arange(n), "cusp"), BoundaryLoop("CuspRim", rim_loop, "rim")],
        vertex_chart=np.stack([xs, ys], axis=1),
        vertex_block=np.full(len(xs), -1),
    )
    mesh.cusp_depth = np.log(ys)
    return mesh


# ---------------------------------------------------------------------------
# pants
# ---------------------------------------------------------------------------


def mesh_pants(
    block: PantsBlock,
    h: float,
    block_id: int = 0,
    ell_c: float = CUSP_HOROCYCLE,
    cusp_depth: float | None = None,
) -> HyperbolicMesh:
    """Mesh a pants block as two mirror hexagons sharing their seams.

    Boundary loops are labelled ``"slot:s"`` (tag GlueSeam) and run with the
    surface on their left, starting at the corner where the seam preceding
    side ``A_s`` meets it.  Cusp slots are capped with :func:`truncate_cusp`.
    Vertex provenance stores the Poincare chart position (mirror copy
    conjugated) and ``pieces[0].slot_distance`` the distance of each vertex
    to the three boundary curves (signed horocycle depth for cusps).
    """
    if not h > 0:
        raise MeshError(f"mesh size must be positive, got {h}")
    horo = tuple(block.is_cusp(s) for s in range(3))
    alt = tuple(ell_c / 2 if horo[s] else block.lengths[s] / 2 for s in range(3))
    seg_alt = tuple(cusp_segments(h, ell_c) if horo[s] else slot_segments(block.lengths[s], h) for s in range(3))
    label = f"block {block_id}"
    try:
        sides = trace_hexagon(hexagon_from_alternate(alt, horo))
    except (ValueError, RuntimeError) as exc:
        raise MeshError(f"{label}: {exc}") from exc

    bX, side_of, per_side = _hexagon_boundary(sides, seg_alt, h)
    bz = to_poincare(bX)
    nb = len(bz)
    pinned = np.zeros(nb, dtype=bool)
    for k in (1, 3, 5):
        pinned[per_side[k]] = True
    z, tris, lens = triangulate_chart(bz, from_poincare, h, label=label, pinned=pinned)
    X = from_poincare(z)
    X[:nb] = bX

    # exact lengths with the boundary points kept at their traced positions
    lens = _edge_table(tris, X, "hyperbolic")

    # mirror copy: seams (odd sides) and corners are shared
    nv = len(z)
    shared = np.zeros(nv, dtype=bool)
    for k in (1, 3, 5):
        shared[per_side[k]] = True
    mirror = np.where(shared, np.arange(nv), -1)
    extra = np.nonzero(~shared)[0]
    mirror[extra] = nv + np.arange(len(extra))
    n_total = nv + len(extra)
    tris2 = mirror[tris][:, ::-1]
    lens2 = lens[:, [1, 0, 2]]  # reversed triangle (c, b, a): edges cb, ba, ac
    all_tris = np.concatenate([tris, tris2])
    all_lens = np.concatenate([lens, lens2])

    # boundary loops per slot
    loops = []
    for s in range(3):
        a_side = per_side[2 * s]
        inner = a_side[1:-1]
        loop = np.array([a_side[0]] + inner + [a_side[-1]] + [mirror[i] for i in inner[::-1]], dtype=np.int64)
        loops.append(BoundaryLoop("GlueSeam", loop, f"slot:{s}"))

    # distance to each boundary curve, evaluated in the first hexagon
    dist = np.empty((nv, 3))
    for s in range(3):
        side = sides[2 * s]
        if side.horocyclic:
            dist[:, s] = np.log(np.maximum(-minkowski(X, side.null), 1e-300))
        else:
            nrm = left_normal(side.start, side.tangent)
            dist[:, s] = np.arcsinh(np.abs(minkowski(X, nrm)))
        dist[per_side[2 * s], s] = 0.0
    full_dist = np.empty((n_total, 3))
    full_dist[:nv] = dist
    full_dist[nv:] = dist[extra]
    chart = np.empty((n_total, 2))
    chart[:nv] = z
    chart[nv:] = z[extra] * np.array([1.0, -1.0])
    sheet = np.zeros(n_total, dtype=np.int64)
    sheet[nv:] = 1

    mesh = HyperbolicMesh(
        n_total, all_tris, all_lens, loops,
        pieces=[Piece(block_id, 0, np.arange(n_total), full_dist)],
        vertex_block=np.full(n_total, block_id),
        vertex_chart=chart,
        vertex_sheet=np.zeros(n_total, dtype=np.int64),
    )
    mesh.hexagon_sheet = sheet
    return _cap_cusps(mesh, block_id, horo, h, ell_c, cusp_depth)


def _cap_cusps(mesh, block_id, horo, h, ell_c, cusp_depth) -> HyperbolicMesh:
    if not any(horo):
        return mesh
    depth = default_cusp_depth(h, ell_c) if cusp_depth is None else cusp_depth
    parts, caps = [mesh], []
    for s in range(3):
        if horo[s]:
            loop = next(b for b in mesh.boundary if b.label == f"slot:{s}")
            cap = truncate_cusp(depth, h, ell_c, n_seg=len(loop.vertices))
            cap.boundary = [BoundaryLoop(b.tag, b.vertices, f"{b.label}:{s}") for b in cap.boundary]
            parts.append(cap)
            caps.append((s, cap))
    union, offsets = disjoint_union(parts)
    pairs, drop = [], set()
    for (s, cap), off in zip(caps, offsets[1:]):
        loop = next(b for b in mesh.boundary if b.label == f"slot:{s}").vertices
        pairs.append(loop_pairs(loop, np.arange(len(loop)) + off, 0))
        drop |= {f"slot:{s}", f"cusp:{s}"}
    union.boundary = [b for b in union.boundary if b.label not in drop]
    union.pieces = []
    merged, new = identify(union, np.concatenate(pairs))
    # provenance: a single piece covering pants and caps
    n = merged.n_vertices
    dist = np.full((n, 3), np.inf)
    base = mesh.pieces[0].slot_distance
    dist[new[: mesh.n_vertices]] = base
    for (s, cap), off in zip(caps, offsets[1:]):
        idx = new[off + np.arange(cap.n_vertices)]
        dist[idx, s] = -cap.cusp_depth
    merged.pieces = [Piece(block_id, 0, np.arange(n), dist)]
    merged.vertex_block = np.full(n, block_id)
    return merged


# ---------------------------------------------------------------------------
# comparison domains
# ---------------------------------------------------------------------------


def geodesic_disk_mesh(radius: float, h: float) -> HyperbolicMesh:
    """Hyperbolic disk of the given radius with a Dirichlet boundary loop."""
    if not (radius > 0 and h > 0):
        raise MeshError("radius and h must be positive")
    n = max(8, math.ceil(2 * math.pi * math.sinh(radius) / (BOUNDARY_FILL * h)))
    theta = 2 * math.pi * np.arange(n) / n
    rho = math.tanh(radius / 2)
    bz = rho * np.stack([np.cos(theta), np.sin(theta)], axis=1)
    z, tris, lens = triangulate_chart(bz, from_poincare, h, label="disk")
    mesh = HyperbolicMesh(
        len(z), tris, lens, [BoundaryLoop("Dirichlet", np.arange(n), "rim")],
        vertex_chart=z, vertex_block=np.zeros(len(z), dtype=np.int64),
    )
    return mesh


def flat_torus_mesh(n: int, size: float = 1.0) -> HyperbolicMesh:
    """Structured ``n x n`` periodic mesh of the flat square torus (Euclidean metric)."""
    if n < 3:
        raise MeshError("flat torus needs n >= 3")
    idx = np.arange(n * n).reshape(n, n)
    i, j = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    v00 = idx[i, j].ravel()
    v10 = idx[(i + 1) % n, j].ravel()
    v11 = idx[(i + 1) % n, (j + 1) % n].ravel()
    v01 = idx[i, (j + 1) % n].ravel()
    tris = np.concatenate([np.stack([v00, v10, v11], 1), np.stack([v00, v11, v01], 1)])
    a = size / n
    d = a * math.sqrt(2.0)
    lens = np.concatenate([np.tile([a, a, d], (n * n, 1)), np.tile([d, a, a], (n * n, 1))])
    chart = np.stack([i.ravel() * a, j.ravel() * a], axis=1)
    return HyperbolicMesh(n * n, tris, lens, metric="euclidean", vertex_chart=chart,
                          vertex_block=np.zeros(n * n, dtype=np.int64))
