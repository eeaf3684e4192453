"""Lowest eigenpairs of the stiffness/mass pencil."""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
from scipy.sparse.linalg import ArpackNoConvergence, eigsh, splu

from .operator import BC, DiscreteOperator

log = logging.getLogger(__name__)

DEFAULT_TOL = 1e-8
MULTIPLICITY_GAP = 1e-4


class SpectralError(RuntimeError):
    """Eigensolver failed to meet the residual contract."""

    def __init__(self, message: str, residuals: np.ndarray | None = None):
        super().__init__(message)
        self.residuals = residuals


@dataclass
class SpectralResult:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    residual_norms: np.ndarray
    h_max: float
    bc: BC
    iterations: int
    dof_vectors: np.ndarray = field(repr=False, default=None)
    mesh_hash: str = ""

    def __len__(self) -> int:
        return len(self.eigenvalues)

    def clusters(self, rel_gap: float = MULTIPLICITY_GAP) -> list[list[int]]:
        return cluster_indices(self.eigenvalues, rel_gap)

    def multiplicities(self, rel_gap: float = MULTIPLICITY_GAP) -> list[tuple[float, int]]:
        return [(float(np.mean(self.eigenvalues[c])), len(c)) for c in self.clusters(rel_gap)]

    def count_below(self, threshold: float) -> int:
        return int(np.sum(self.eigenvalues < threshold))

    def to_csv(self, path: str | Path) -> None:
        write_csv(path, self.eigenvalues, self.residual_norms)


def cluster_indices(values: np.ndarray, rel_gap: float = MULTIPLICITY_GAP) -> list[list[int]]:
    """Group sorted values whose consecutive relative gap is at most ``rel_gap``."""
    groups: list[list[int]] = []
    for i, v in enumerate(values):
        if groups:
            prev = values[groups[-1][-1]]
            scale = max(abs(v), abs(prev))
            if scale == 0 or abs(v - prev) <= rel_gap * scale:
                groups[-1].append(i)
                continue
        groups.append([i])
    return groups


def write_csv(path: str | Path, eigenvalues, residuals) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["index", "eigenvalue", "residual"])
        for i, (lam, res) in enumerate(zip(eigenvalues, residuals)):
            w.writerow([i, repr(float(lam)), repr(float(res))])


def residuals(op: DiscreteOperator, lam: np.ndarray, U: np.ndarray) -> np.ndarray:
    """``||K u - lam M u|| / ||M u||`` per column."""
    MU = op.mass @ U
    R = op.stiffness @ U - MU * lam
    return np.linalg.norm(R, axis=0) / np.linalg.norm(MU, axis=0)


def _fix_signs(U: np.ndarray) -> np.ndarray:
    """Make the entry of largest magnitude positive (first one on ties)."""
    idx = np.argmax(np.abs(U), axis=0)
    s = np.sign(U[idx, np.arange(U.shape[1])])
    s[s == 0] = 1.0
    return U * s


def _ritz(op: DiscreteOperator, W: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    A = W.T @ (op.stiffness @ W)
    B = W.T @ (op.mass @ W)
    A = 0.5 * (A + A.T)
    B = 0.5 * (B + B.T)
    lam, C = sla.eigh(A, B)
    return lam, W @ C


def lowest_eigenpairs(
    op: DiscreteOperator,
    m: int,
    tol: float = DEFAULT_TOL,
    seed: int = 0,
    shift: float | None = None,
    max_refine: int = 8,
) -> SpectralResult:
    """The ``m`` smallest eigenpairs by shift-invert Lanczos plus subspace polishing.

    The shift sits below zero so the shifted pencil is definite even on
    closed surfaces.  A few extra vectors are carried as guard space; the
    Lanczos start vector comes from ``seed`` so results are reproducible.
    """
    n = op.n_dofs
    if not (1 <= m < n):
        raise ValueError(f"need 1 <= m < {n} eigenpairs, got {m}")
    if shift is None:
        shift = -0.1
    guard = min(n - 1, m + max(2, m // 4))
    rng = np.random.default_rng(seed)
    v0 = rng.standard_normal(n)
    A = (op.stiffness - shift * op.mass).tocsc()
    lu = splu(A)
    try:
        _, V = eigsh(
            op.stiffness, k=guard, M=op.mass, sigma=shift, which="LM", v0=v0,
            tol=0.0, OPinv=_LUOperator(lu, n), maxiter=max(1000, 20 * guard),
        )
    except ArpackNoConvergence as exc:  # keep whatever converged and polish it
        V = exc.eigenvectors
        if V is None or V.shape[1] < m:
            raise SpectralError("Lanczos did not converge") from exc
    lam, U = _ritz(op, V)
    it = 0
    res = residuals(op, lam[:m], U[:, :m])
    while res.max() > tol and it < max_refine:
        W = lu.solve(np.asarray(op.mass @ U))
        lam, U = _ritz(op, W)
        res = residuals(op, lam[:m], U[:, :m])
        it += 1
    lam, U = lam[:m], U[:, :m]
    if res.max() > tol:
        raise SpectralError(f"eigenpairs not converged: worst residual {res.max():.3e} > {tol:.1e}", res)
    # M-orthonormalise within the block once more and fix signs
    B = U.T @ (op.mass @ U)
    Lc = np.linalg.cholesky(0.5 * (B + B.T))
    U = np.linalg.solve(Lc, U.T).T
    U = _fix_signs(U)
    order = np.argsort(lam, kind="stable")
    lam, U = lam[order], U[:, order]
    res = residuals(op, lam, U)
    return SpectralResult(np.asarray(lam), op.extend(U), res, op.h_max, op.bc, it, U, op.mesh_hash)


class _LUOperator(sp.linalg.LinearOperator):
    def __init__(self, lu, n: int):
        super().__init__(dtype=float, shape=(n, n))
        self._lu = lu

    def _matvec(self, x):
        return self._lu.solve(np.asarray(x, dtype=float).ravel())


def m_orthogonality_error(op: DiscreteOperator, result: SpectralResult) -> float:
    U = result.dof_vectors
    G = U.T @ (op.mass @ U)
    return float(np.abs(G - np.eye(G.shape[0])).max())


def ritz_values(op: DiscreteOperator, functions: list[np.ndarray]) -> np.ndarray:
    """Ritz values of the pencil on the span of the given vertex functions."""
    F = np.column_stack([op.restrict(f) for f in functions])
    A = F.T @ (op.stiffness @ F)
    B = F.T @ (op.mass @ F)
    return sla.eigh(0.5 * (A + A.T), 0.5 * (B + B.T), eigvals_only=True)

