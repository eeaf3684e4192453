"""Discrete nodal domains from vertex signs."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from ..mesher.mesh import HyperbolicMesh

ZERO_THRESHOLD = 1e-9


@dataclass
class NodalDomain:
    sign: int
    vertices: np.ndarray
    euler_characteristic: int
    area: float


@dataclass
class NodalReport:
    domains: list[list[NodalDomain]] = field(default_factory=list)

    @property
    def counts(self) -> list[int]:
        return [len(d) for d in self.domains]


def _domains(mesh: HyperbolicMesh, phi: np.ndarray, areas: np.ndarray, edges: np.ndarray) -> list[NodalDomain]:
    thr = ZERO_THRESHOLD * float(np.abs(phi).max())
    sign = np.where(phi > thr, 1, np.where(phi < -thr, -1, 0))
    n = mesh.n_vertices
    out = []
    for s in (1, -1):
        inside = sign == s
        if not inside.any():
            continue
        e = edges[inside[edges[:, 0]] & inside[edges[:, 1]]]
        g = coo_matrix((np.ones(len(e)), (e[:, 0], e[:, 1])), shape=(n, n))
        _, label = connected_components(g, directed=False)
        tri = mesh.triangles[np.all(inside[mesh.triangles], axis=1)]
        verts = np.nonzero(inside)[0]
        comp = label[verts]
        nv = np.bincount(comp, minlength=n)
        ne = np.bincount(label[e[:, 0]], minlength=n)
        nf = np.bincount(label[tri[:, 0]], minlength=n)
        for c in np.unique(comp):
            members = verts[comp == c]
            out.append(NodalDomain(
                s, members, int(nv[c] - ne[c] + nf[c]), float(areas[members].sum()),
            ))
    return out


def nodal_domains(mesh: HyperbolicMesh, eigenvectors: np.ndarray) -> NodalReport:
    """Components of the induced sub-complexes on ``{phi > 0}`` and ``{phi < 0}``.

    Vertices with ``|phi| <= 1e-9 max|phi|`` belong to no domain.  The Euler
    characteristic of a domain is ``V - E + F`` of its induced sub-complex and
    its area the lumped vertex area.
    """
    vecs = np.asarray(eigenvectors, dtype=float)
    if vecs.ndim == 1:
        vecs = vecs[:, None]
    edges, _ = mesh.edges()
    areas = mesh.vertex_areas()
    return NodalReport([_domains(mesh, vecs[:, j], areas, edges) for j in range(vecs.shape[1])])
