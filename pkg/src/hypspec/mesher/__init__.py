"""Intrinsic triangulations of blocks, glued surfaces and covers."""

from .mesh import BoundaryLoop, HyperbolicMesh, MeshError, MeshQuality, Piece, quantize_twist
from .pants import flat_torus_mesh, geodesic_disk_mesh, mesh_pants, truncate_cusp
from .assemble import block_meshes, cyclic_cover_mesh, glue, twist_residual
