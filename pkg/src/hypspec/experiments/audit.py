"""Verdicts that compare computed spectra with the theorems' predictions."""

from __future__ import annotations

import numpy as np

from ..geometry.bounds import BoundReport, Verdict
from ..geometry.surface import FNSurface
from ..mesher.mesh import HyperbolicMesh
from ..spectral.solver import SpectralResult, cluster_indices
from .families import TestFamily
from .nodal import nodal_domains

SOLVER_SLACK = 0.05


class AuditError(ValueError):
    """The inputs of an audit do not fit together."""


def verify_variational(family: TestFamily, result: SpectralResult, slack: float = 0.0) -> Verdict:
    """PASS iff at least ``m`` computed eigenvalues lie at or below the family's worst quotient.

    ``m`` is the family size.  A result that is not sorted ascending fails
    outright: the comparison is meaningless otherwise.
    """
    if result.mesh_hash and family.mesh_hash and result.mesh_hash != family.mesh_hash:
        raise AuditError("test family and spectrum were computed on different meshes")
    m = family.size
    lam = np.asarray(result.eigenvalues)
    if len(lam) < m:
        raise AuditError(f"need at least {m} eigenvalues, got {len(lam)}")
    threshold = family.max_quotient * (1.0 + slack) + 1e-12
    if np.any(np.diff(lam) < 0):
        return Verdict("variational", False, float(lam[m - 1]), threshold, "eigenvalues are not sorted")
    ok = lam[m - 1] <= threshold
    return Verdict("variational", bool(ok), float(lam[m - 1]), threshold,
                   f"lambda_{m - 1} = {lam[m - 1]:.6g} vs worst quotient {family.max_quotient:.6g}")


def family_disjointness(family: TestFamily, op) -> Verdict:
    G = family.gram(op)
    norms = np.sqrt(np.diag(G))
    off = np.abs(G - np.diag(np.diag(G))) / np.outer(norms, norms)
    worst = float(off.max()) if len(G) > 1 else 0.0
    return Verdict("family_disjoint", worst <= 1e-10, worst, 1e-10, "max normalised M-inner product")


def family_bound(family: TestFamily, slack: float = SOLVER_SLACK) -> Verdict:
    """Each discrete quotient stays below the continuum bound up to ``slack``."""
    worst = family.max_quotient
    ratio = worst / family.bound
    return Verdict(f"{family.tag.lower()}_quotients", worst <= family.bound * (1 + slack), worst,
                   family.bound * (1 + slack), f"worst/bound = {ratio:.4f}")


def count_below_bound(result: SpectralResult, family: TestFamily, slack: float = SOLVER_SLACK) -> Verdict:
    """At least ``family.size`` eigenvalues lie below the family's continuum bound times ``1 + slack``."""
    top = family.bound * (1 + slack)
    below = int(np.sum(np.asarray(result.eigenvalues) < top))
    return Verdict(f"{family.tag.lower()}_count", below >= family.size, below, family.size,
                   f"{below} eigenvalues < {top:.6g}")


def small_eigenvalue_audit(
    surface: FNSurface,
    result: SpectralResult,
    bounds: BoundReport,
    mesh: HyperbolicMesh | None = None,
    slack: float = SOLVER_SLACK,
    cluster_gap: float = 1e-4,
) -> list[Verdict]:
    """Checks (a)-(d) on a closed hyperbolic surface.

    (a) at most ``-chi`` eigenvalues at or below the lower end of the
    analytic-systole interval; (b) ``lambda_{-chi} > 1/4 (1 - slack)``;
    (c) nodal domains of eigenfunctions with ``lambda <= 1/4`` have negative
    Euler characteristic (needs ``mesh``); (d) cluster sizes: the cluster of
    ``lambda_1`` at most ``5 - chi`` and any cluster in ``(0, 1/4]`` at most
    ``-chi - 1``.
    """
    chi = surface.euler_characteristic
    lam = np.asarray(result.eigenvalues)
    if len(lam) < -chi + 1:
        raise AuditError(f"need at least {-chi + 1} eigenpairs, got {len(lam)}")
    out = []
    lower = bounds.lambda_interval[0]
    count = int(np.sum(lam <= lower))
    note = "" if bounds.lower_bound_certified else " (lower end uses a systole upper bound)"
    out.append(Verdict("a_count_below_lower", count <= -chi, count, -chi,
                       f"{count} eigenvalues <= {lower:.8g}{note}"))
    floor = 0.25 * (1 - slack)
    out.append(Verdict("b_gap_above_quarter", bool(lam[-chi] > floor), floor, float(lam[-chi]),
                       f"lambda_{-chi} = {lam[-chi]:.8g} vs {floor:.6g}"))
    if mesh is not None:
        small = np.nonzero(lam <= 0.25)[0]
        rep = nodal_domains(mesh, result.eigenvectors[:, small])
        bad = [(int(i), d.euler_characteristic) for i, doms in zip(small, rep.domains)
               for d in doms if d.euler_characteristic >= 0]
        worst = max((d.euler_characteristic for doms in rep.domains for d in doms), default=-1)
        out.append(Verdict("c_nodal_negative_euler", not bad, worst, 0,
                           f"{sum(rep.counts)} domains checked" + (f"; offenders {bad}" if bad else "")))
    clusters = cluster_indices(lam, cluster_gap)
    first = next(c for c in clusters if 1 in c)
    sizes_small = [len(c) for c in clusters if 0 < lam[c[0]] <= 0.25 and c[-1] < len(lam) - 1]
    worst_small = max(sizes_small, default=0)
    ok = len(first) <= 5 - chi and worst_small <= -chi - 1
    out.append(Verdict("d_multiplicity", ok, max(len(first), worst_small), -chi - 1,
                       f"lambda_1 cluster {len(first)} (limit {5 - chi}); "
                       f"largest cluster in (0, 1/4] {worst_small} (limit {-chi - 1})"))
    return out


def courant_check(mesh: HyperbolicMesh, result: SpectralResult, upto: int = 10) -> Verdict:
    """The ``i``-th eigenfunction has at most ``i + 1`` nodal domains."""
    upto = min(upto, len(result.eigenvalues))
    rep = nodal_domains(mesh, result.eigenvectors[:, :upto])
    excess = [(i, c) for i, c in enumerate(rep.counts) if c > i + 1]
    return Verdict("courant", not excess, max((c - i - 1 for i, c in enumerate(rep.counts)), default=0), 0,
                   f"domain counts {rep.counts}" + (f"; excess {excess}" if excess else ""))


def buser_squeeze(result: SpectralResult, family: TestFamily, bounds: BoundReport, genus: int,
                  slack: float = SOLVER_SLACK) -> list[Verdict]:
    """At least ``2g - 2`` eigenvalues under the Buser bound, at most ``2g - 2`` under the lower bound."""
    lam = np.asarray(result.eigenvalues)
    m = 2 * genus - 2
    top = family.bound * (1 + slack)
    below_top = int(np.sum(lam < top))
    lower = bounds.lambda_interval[0]
    below_lower = int(np.sum(lam < lower))
    floor = 0.25 * (1 - slack)
    return [
        Verdict("buser_upper", below_top >= m, below_top, m, f"{below_top} eigenvalues < {top:.6g}"),
        Verdict("buser_lower", below_lower <= m, below_lower, m, f"{below_lower} eigenvalues < {lower:.8g}"),
        Verdict("buser_gap", bool(lam[m] > floor), floor, float(lam[m]), f"lambda_{m} = {lam[m]:.8g} > {floor:.6g}"),
    ]


def cover_contains_base(base: SpectralResult, cover: SpectralResult, slack: float = SOLVER_SLACK) -> Verdict:
    """Every base eigenvalue below 1/4 reappears in the cover spectrum within ``2 slack``."""
    worst = 0.0
    missing = []
    for lam in base.eigenvalues[base.eigenvalues < 0.25]:
        gap = float(np.min(np.abs(cover.eigenvalues - lam)))
        rel = gap / max(abs(lam), 1e-8)
        worst = max(worst, rel)
        if rel > 2 * slack:
            missing.append(float(lam))
    return Verdict("cover_contains_base", not missing, worst, 2 * slack,
                   "max relative gap" + (f"; missing {missing}" if missing else ""))

