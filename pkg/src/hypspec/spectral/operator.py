"""P1 finite elements for the Laplace-Beltrami operator on intrinsic meshes."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from ..mesher.mesh import HyperbolicMesh, MeshError, heron_area


class BC(str, enum.Enum):
    DIRICHLET = "Dirichlet"
    NEUMANN = "Neumann"

    @classmethod
    def parse(cls, value: "BC | str") -> "BC":
        if isinstance(value, BC):
            return value
        for bc in cls:
            if bc.value.lower() == str(value).lower():
                return bc
        raise ValueError(f"unknown boundary condition {value!r}")


@dataclass(frozen=True)
class DiscreteOperator:
    """Stiffness/mass pencil on the free degrees of freedom.

    ``dof_map[i]`` is the mesh vertex carrying degree of freedom ``i``;
    Dirichlet vertices have no dof.
    """

    stiffness: sp.csr_matrix
    mass: sp.csr_matrix
    dof_map: np.ndarray
    n_vertices: int
    bc: BC
    h_max: float
    area: float
    mesh_hash: str = ""

    @property
    def n_dofs(self) -> int:
        return len(self.dof_map)

    @property
    def lumped(self) -> np.ndarray:
        return self.mass.diagonal()

    def restrict(self, f: np.ndarray) -> np.ndarray:
        """Vertex function to dof vector (Dirichlet values dropped)."""
        f = np.asarray(f, dtype=float)
        if f.shape[0] == self.n_vertices:
            return f[self.dof_map]
        if f.shape[0] == self.n_dofs:
            return f
        raise ValueError(f"function has {f.shape[0]} entries, expected {self.n_vertices} or {self.n_dofs}")

    def extend(self, u: np.ndarray) -> np.ndarray:
        """Dof vector(s) to vertex function(s), zero on Dirichlet vertices."""
        u = np.asarray(u, dtype=float)
        out = np.zeros((self.n_vertices,) + u.shape[1:])
        out[self.dof_map] = u
        return out


def cotan_weights(lengths: np.ndarray) -> np.ndarray:
    """Half-cotangents ``(F, 3)``; column ``k`` belongs to the edge opposite corner ``k``.

    The edge opposite corner ``k`` runs from corner ``k+1`` to ``k+2`` and
    has length ``lengths[:, (k + 1) % 3]``.  Angles are those of the
    Euclidean triangle with the same side lengths.
    """
    l2 = lengths ** 2
    area = heron_area(lengths)
    if np.any(area <= 0):
        raise MeshError("zero-area comparison triangle in stiffness assembly")
    w = np.empty_like(lengths)
    for k in range(3):
        a2 = l2[:, (k + 1) % 3]
        b2, c2 = l2[:, k], l2[:, (k + 2) % 3]
        w[:, k] = (b2 + c2 - a2) / (8.0 * area)
    return w


def assemble(
    mesh: HyperbolicMesh,
    bc: BC | str | None = None,
    dirichlet_vertices: np.ndarray | None = None,
    check: bool = True,
) -> DiscreteOperator:
    """Stiffness from Euclidean comparison cotangents, mass lumped from true areas.

    With ``bc=None`` the boundary tags decide: Dirichlet loops are
    eliminated, Neumann, CuspRim and untagged boundary stay natural.
    ``bc="Dirichlet"`` clamps every boundary vertex except cusp rims and
    ``bc="Neumann"`` clamps nothing.  ``dirichlet_vertices`` adds further
    clamped vertices (used for sub-domain problems).
    """
    if check:
        mesh.validate()
    n = mesh.n_vertices
    t = mesh.triangles
    w = cotan_weights(mesh.lengths)
    i = t[:, [1, 2, 0]].reshape(-1)
    j = t[:, [2, 0, 1]].reshape(-1)
    wv = w.reshape(-1)
    off = sp.coo_matrix((-wv, (i, j)), shape=(n, n))
    off = (off + off.T).tocsr()
    off.sum_duplicates()
    diag = -np.asarray(off.sum(axis=1)).ravel()
    K = (off + sp.diags(diag)).tocsr()
    masses = mesh.vertex_areas()
    if np.any(masses <= 0):
        raise MeshError("vertex with zero lumped mass (isolated vertex)")

    clamp = np.zeros(n, dtype=bool)
    mode = None if bc is None else BC.parse(bc)
    if mode is None:
        clamp[mesh.tagged_vertices("Dirichlet")] = True
    elif mode is BC.DIRICHLET:
        b = mesh.boundary_edges()
        if len(b):
            clamp[np.unique(b)] = True
        clamp[mesh.tagged_vertices("CuspRim")] = False
    if dirichlet_vertices is not None:
        clamp[np.asarray(dirichlet_vertices, dtype=np.int64)] = True
    dof = np.nonzero(~clamp)[0]
    if len(dof) == 0:
        raise MeshError("every vertex is clamped; no degrees of freedom left")
    Kr = K[dof][:, dof].tocsr()
    Mr = sp.diags(masses[dof]).tocsr()
    effective = BC.DIRICHLET if clamp.any() else BC.NEUMANN
    return DiscreteOperator(
        Kr, Mr, dof, n, effective, float(mesh.lengths.max()), float(masses.sum()), mesh.mesh_hash()
    )


def rayleigh_quotient(op: DiscreteOperator, f: np.ndarray) -> float:
    """``f^T K f / f^T M f`` after Dirichlet elimination."""
    u = op.restrict(f)
    den = float(u @ (op.mass @ u))
    if not den > 0:
        raise ValueError("Rayleigh quotient of the zero function")
    return float(u @ (op.stiffness @ u)) / den
