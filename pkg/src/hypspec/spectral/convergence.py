"""Mesh refinement studies with Richardson extrapolation."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from ..geometry.surface import FNSurface
from ..mesher.assemble import glue
from ..mesher.mesh import HyperbolicMesh
from .operator import assemble
from .solver import lowest_eigenpairs


@dataclass
class ConvergenceReport:
    h: np.ndarray
    eigenvalues: np.ndarray          # (levels, m)
    extrapolated: np.ndarray         # (m,) assuming O(h^2)
    observed_order: np.ndarray       # (m,) from the three finest levels
    monotone: np.ndarray             # (m,) whether the sequence is monotone in h
    n_vertices: list[int] = field(default_factory=list)

    def lines(self) -> list[str]:
        out = []
        for j in range(self.eigenvalues.shape[1]):
            flag = "" if self.monotone[j] else "  [non-monotone]"
            out.append(
                f"lambda_{j}: extrapolated {self.extrapolated[j]:.10g}, "
                f"observed order {self.observed_order[j]:.3f}{flag}"
            )
        return out


def richardson(h: np.ndarray, values: np.ndarray, order: float = 2.0) -> float:
    """Extrapolate ``value(h) = v* + C h^order`` from the two finest levels."""
    i = np.argsort(h)
    h1, h2 = h[i[0]], h[i[1]]
    v1, v2 = values[i[0]], values[i[1]]
    r = (h2 / h1) ** order
    return float((r * v1 - v2) / (r - 1.0))


def observed_order(h: np.ndarray, values: np.ndarray) -> float:
    """Exponent ``p`` fitting ``v* + C h^p`` through the three finest levels."""
    i = np.argsort(h)[:3]
    h1, h2, h3 = h[i]
    v1, v2, v3 = values[i]
    d21, d32 = v2 - v1, v3 - v2
    if d21 == 0 or d32 == 0 or np.sign(d21) != np.sign(d32):
        return float("nan")
    target = d32 / d21

    def f(p):
        return (h3 ** p - h2 ** p) / (h2 ** p - h1 ** p) - target

    try:
        return float(brentq(f, 0.05, 8.0))
    except ValueError:
        return float("nan")


def convergence_study(
    source: FNSurface | Callable[[float], HyperbolicMesh],
    h_list: list[float],
    m: int,
    bc=None,
    seed: int = 0,
) -> ConvergenceReport:
    """Solve on each mesh size and extrapolate the lowest ``m`` eigenvalues."""
    h = np.asarray(h_list, dtype=float)
    if len(h) < 3:
        raise ValueError("a convergence study needs at least three mesh sizes")
    if len(np.unique(h)) != len(h):
        raise ValueError("mesh sizes must be distinct")
    if np.any(h <= 0):
        raise ValueError("mesh sizes must be positive")
    build = (lambda hh: glue(source, hh)) if isinstance(source, FNSurface) else source
    vals, nv = [], []
    for hh in h:
        mesh = build(float(hh))
        res = lowest_eigenpairs(assemble(mesh, bc), m, seed=seed)
        vals.append(res.eigenvalues)
        nv.append(mesh.n_vertices)
    vals = np.array(vals)
    ext = np.array([richardson(h, vals[:, j]) for j in range(m)])
    order = np.array([observed_order(h, vals[:, j]) for j in range(m)])
    srt = np.argsort(h)
    diffs = np.diff(vals[srt], axis=0)
    mono = np.all(diffs >= 0, axis=0) | np.all(diffs <= 0, axis=0)
    return ConvergenceReport(h, vals, ext, order, mono, nv)

