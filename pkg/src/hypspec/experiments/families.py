"""Explicit test-function families that force small eigenvalues."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..geometry.bounds import buser_rayleigh_bound, collar_width, randol_ksuf_bound
from ..geometry.surface import FNSurface, SurfaceError, chain_surface
from ..mesher.assemble import cyclic_cover_mesh
from ..mesher.mesh import HyperbolicMesh
from ..spectral.operator import DiscreteOperator, assemble, rayleigh_quotient

BAND_LAYERS = 5
BUSER_BAND = 1.0


class ResolutionError(ValueError):
    """A decay band is covered by fewer than the required number of mesh layers."""


@dataclass
class TestFamily:
    """Functions with disjoint supports on one mesh, plus their Rayleigh quotients."""

    __test__ = False  # keep pytest from collecting this class

    functions: list[np.ndarray]
    quotients: list[float]
    tag: str
    mesh_hash: str
    bound: float = math.nan
    details: dict = field(default_factory=dict)

    @property
    def size(self) -> int:
        return len(self.functions)

    @property
    def max_quotient(self) -> float:
        return max(self.quotients)

    def gram(self, op: DiscreteOperator) -> np.ndarray:
        F = np.column_stack([op.restrict(f) for f in self.functions])
        return F.T @ (op.mass @ F)


def _check_layers(width: float, mesh: HyperbolicMesh, what: str) -> float:
    layers = width / float(mesh.lengths.max())
    if layers < BAND_LAYERS:
        raise ResolutionError(
            f"{what} of width {width:.4g} spans only {layers:.2f} mesh layers "
            f"(need {BAND_LAYERS}); refine h below {width / BAND_LAYERS:.4g}"
        )
    return layers


def buser_surface(genus: int, ell: float, twists=None) -> FNSurface:
    """Closed genus-``genus`` surface with all ``3 genus - 3`` pants curves of length ``ell``.

    Width-1 bands around the curves must be disjoint, which needs
    ``collar_width(ell) > 1``.
    """
    if genus < 2:
        raise SurfaceError("genus must be at least 2")
    if not ell > 0:
        raise SurfaceError("curve length must be positive")
    rho = collar_width(ell)
    if rho <= BUSER_BAND:
        limit = 2.0 * math.asinh(1.0 / math.sinh(BUSER_BAND))
        raise SurfaceError(
            f"ell = {ell} gives collar width {rho:.6f} <= 1; width-1 bands overlap "
            f"(need ell < {limit:.6f})"
        )
    surface = chain_surface(genus, ell, twists)
    surface.labels["family"] = "buser"
    return surface


def buser_test_functions(surface: FNSurface, mesh: HyperbolicMesh, op: DiscreteOperator | None = None) -> TestFamily:
    """One function per block: ``min(1, distance to the block's boundary curves)``.

    Equal to 1 at distance at least 1 from the block's curves, decaying
    linearly to 0 on them, and zero on every other block.
    """
    _check_layers(BUSER_BAND, mesh, "Buser decay band")
    op = op if op is not None else assemble(mesh)
    funcs = []
    for piece in mesh.pieces:
        blk = surface.blocks[piece.block]
        holes = [s for s in range(3) if not blk.is_cusp(s)]
        d = np.min(piece.slot_distance[:, holes], axis=1)
        f = np.zeros(mesh.n_vertices)
        f[piece.vertex_map] = np.minimum(1.0, d / BUSER_BAND)
        funcs.append(f)
    quotients = [rayleigh_quotient(op, f) for f in funcs]
    sums = [sum(surface.blocks[p.block].lengths[s] for s in range(3)
                if not surface.blocks[p.block].is_cusp(s)) for p in mesh.pieces]
    bound = max(buser_rayleigh_bound(s) for s in sums)
    return TestFamily(funcs, quotients, "Buser", mesh.mesh_hash(), bound,
                      {"h_max": float(mesh.lengths.max()), "block_lengths": sums})


def randol_quotient_bound(ell: float, k: int, area: float) -> float:
    """``2 ell sinh(rho) / (rho^2 k area)`` with ``rho = collar_width(ell)``."""
    return randol_ksuf_bound(ell, float(k), area)


def randol_family(
    surface: FNSurface,
    curve: int,
    k: int,
    n: int,
    mesh_h: float,
    mesh: HyperbolicMesh | None = None,
) -> tuple[HyperbolicMesh, TestFamily]:
    """Cyclic cover of order ``(k + 2) n`` and its ``n`` block test functions.

    Block ``R_j`` is the run of copies ``T((k+2) j) .. T((k+2) j + k + 1)``.
    Its function is 1 on the block except inside the width-``rho`` half
    collars at its two ends, where it grows linearly from 0 on the cut curve.
    """
    if mesh is None:
        mesh = cyclic_cover_mesh(surface, curve, k, n, h=mesh_h)
    g = surface.gluings[curve]
    ell = surface.length(g.a)
    rho = collar_width(ell)
    _check_layers(rho, mesh, "Randol collar")
    op = assemble(mesh)
    run = k + 2
    funcs = []
    for j in range(n):
        first, last = run * j, run * j + k + 1
        f = np.zeros(mesh.n_vertices)
        for p in mesh.pieces:
            if first <= p.sheet <= last:
                f[p.vertex_map] = 1.0
        for p in mesh.pieces:
            # c_- of the first copy, c_+ of the last copy
            for sheet, (blk, slot) in ((first, g.b), (last, g.a)):
                if p.sheet == sheet and p.block == blk:
                    ramp = np.minimum(1.0, p.slot_distance[:, slot] / rho)
                    f[p.vertex_map] = np.minimum(f[p.vertex_map], ramp)
        funcs.append(f)
    quotients = [rayleigh_quotient(op, f) for f in funcs]
    area = 2.0 * math.pi * len(surface.blocks)
    bound = randol_quotient_bound(ell, k, area)
    fam = TestFamily(funcs, quotients, "Randol", mesh.mesh_hash(), bound,
                     {"rho": rho, "ell": ell, "order": run * n, "h_max": float(mesh.lengths.max())})
    return mesh, fam
