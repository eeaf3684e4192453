"""Verification campaigns: many surfaces, many checks, one CSV."""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from ..geometry.bounds import BoundReport, Verdict, bound_report
from ..geometry.surface import FNSurface, SurfaceError, theta_genus2
from ..mesher.assemble import glue
from ..spectral.operator import assemble
from ..spectral.solver import lowest_eigenpairs
from .audit import buser_squeeze, courant_check, family_bound, family_disjointness, small_eigenvalue_audit, verify_variational
from .families import buser_surface, buser_test_functions

CHECKS = ("audit", "buser", "courant", "variational")
COLUMNS = [
    "surface", "check", "verdict", "value", "threshold", "margin", "detail",
    "area", "euler_characteristic", "sys_upper", "lambda_lower", "lambda_upper",
    "small_count_bound", "mondal_delta",
]


class ConfigError(ValueError):
    """Malformed campaign configuration."""


@dataclass
class SurfaceJob:
    name: str
    surface: FNSurface
    sys: float | None = None
    genus: int | None = None


@dataclass
class CampaignConfig:
    jobs: list[SurfaceJob]
    h: float
    m: int | None = None
    seed: int = 0
    checks: tuple[str, ...] = ("audit",)
    workers: int = 1
    raw: dict = field(default_factory=dict)


def surface_from_entry(entry: dict, base: Path | None = None) -> SurfaceJob:
    """Build one surface from a campaign entry.

    Accepted forms: ``{"buser": {"genus", "ell", "twists"?}}``,
    ``{"theta": {"lengths", "twists"?}}``, ``{"file": path}`` or
    ``{"surface": <surface JSON>}``; an optional ``"sys"`` certifies the systole.
    """
    name = entry.get("name")
    sys = entry.get("sys")
    if "buser" in entry:
        b = entry["buser"]
        s = buser_surface(int(b["genus"]), float(b["ell"]), b.get("twists"))
        sys = float(b["ell"]) if sys is None else sys
        return SurfaceJob(name or f"buser_g{b['genus']}_l{b['ell']}", s, sys, int(b["genus"]))
    if "theta" in entry:
        t = entry["theta"]
        s = theta_genus2(t["lengths"], t.get("twists", (0.0, 0.0, 0.0)))
        return SurfaceJob(name or "theta", s, sys, 2)
    if "file" in entry:
        path = Path(entry["file"])
        if base is not None and not path.is_absolute():
            path = base / path
        s = FNSurface.load(path)
        return SurfaceJob(name or path.stem, s, sys, s.signature()[0])
    if "surface" in entry:
        s = FNSurface.from_dict(entry["surface"])
        return SurfaceJob(name or "surface", s, sys, s.signature()[0])
    raise ConfigError(f"surface entry needs one of buser/theta/file/surface: {entry}")


def load_config(path: str | Path) -> CampaignConfig:
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    return config_from_dict(raw, path.parent)


def config_from_dict(raw: dict, base: Path | None = None) -> CampaignConfig:
    if "surfaces" not in raw or not raw["surfaces"]:
        raise ConfigError("campaign config needs a non-empty 'surfaces' list")
    if "h" not in raw:
        raise ConfigError("campaign config needs a mesh size 'h'")
    checks = tuple(raw.get("checks", ["audit"]))
    unknown = [c for c in checks if c not in CHECKS]
    if unknown:
        raise ConfigError(f"unknown checks {unknown}; choose from {list(CHECKS)}")
    try:
        jobs = [surface_from_entry(e, base) for e in raw["surfaces"]]
    except (SurfaceError, KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad surface entry: {exc}") from exc
    return CampaignConfig(jobs, float(raw["h"]), raw.get("m"), int(raw.get("seed", 0)), checks,
                          int(raw.get("workers", 1)), raw)


def _fmt(x) -> str:
    if isinstance(x, bool):
        return str(x)
    if isinstance(x, float):
        return repr(x) if math.isfinite(x) else str(x)
    return str(x)


def verdict_row(surface: str, v: Verdict, rep: BoundReport) -> dict:
    return {
        "surface": surface, "check": v.name, "verdict": "PASS" if v.passed else "FAIL",
        "value": _fmt(float(v.value)), "threshold": _fmt(float(v.threshold)),
        "margin": _fmt(float(v.margin)), "detail": v.detail,
        "area": _fmt(rep.area), "euler_characteristic": rep.euler_char,
        "sys_upper": _fmt(float(rep.sys_upper)), "lambda_lower": _fmt(float(rep.lambda_interval[0])),
        "lambda_upper": _fmt(float(rep.lambda_interval[1])), "small_count_bound": rep.small_count_bound,
        "mondal_delta": _fmt(float(rep.mondal_delta)),
    }


def run_job(job: SurfaceJob, h: float, m: int | None, seed: int, checks: tuple[str, ...]) -> list[dict]:
    surface = job.surface
    rep = bound_report(surface, sys=job.sys)
    mesh = glue(surface, h)
    op = assemble(mesh)
    count = m if m is not None else -surface.euler_characteristic + 3
    if "courant" in checks:
        count = max(count, 10)
    res = lowest_eigenpairs(op, count, seed=seed)
    verdicts: list[Verdict] = []
    if "audit" in checks:
        verdicts += small_eigenvalue_audit(surface, res, rep, mesh)
    if "courant" in checks:
        verdicts.append(courant_check(mesh, res))
    if "buser" in checks or "variational" in checks:
        fam = buser_test_functions(surface, mesh, op)
        if "buser" in checks:
            genus = job.genus if job.genus is not None else surface.signature()[0]
            verdicts += buser_squeeze(res, fam, rep, genus)
            verdicts.append(family_bound(fam))
            verdicts.append(family_disjointness(fam, op))
        if "variational" in checks:
            verdicts.append(verify_variational(fam, res))
    return [verdict_row(job.name, v, rep) for v in verdicts]


def run_campaign(config: CampaignConfig) -> list[dict]:
    """Run every job; rows come back in config order whatever the worker count."""
    args = [(j, config.h, config.m, config.seed, config.checks) for j in config.jobs]
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            chunks = list(pool.map(run_job, *zip(*args)))
    else:
        chunks = [run_job(*a) for a in args]
    return [row for chunk in chunks for row in chunk]


def write_rows(path: str | Path, rows: list[dict]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=COLUMNS, lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
