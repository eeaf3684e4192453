"""Acceptance criteria 1-8.

Each test prints exactly one ``PASS``/``FAIL`` line naming its criterion and
the measured numbers, then asserts.  The lines are repeated in the pytest
terminal summary.  Running the file directly prints the eight lines without
pytest.
"""

from __future__ import annotations

import ast
import math
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from hypspec.cli import main as cli_main
from hypspec.experiments import (
    buser_squeeze,
    buser_surface,
    buser_test_functions,
    courant_check,
    cover_contains_base,
    randol_family,
    randol_quotient_bound,
    small_eigenvalue_audit,
)
from hypspec.geometry import (
    analytic_systole_interval,
    bound_report,
    buser_rayleigh_bound,
    collar_width,
    hexagons_from_pants,
    mondal_delta,
    nonsep_length_bound,
    randol_cover_order,
    randol_cover_raw,
    randol_genus_order,
    theta_genus2,
)
from hypspec.mesher import flat_torus_mesh, geodesic_disk_mesh, glue
from hypspec.spectral import assemble, convergence_study, lowest_eigenpairs

try:
    from conftest import ACCEPTANCE_LINES
except ImportError:  # run as a script from elsewhere
    ACCEPTANCE_LINES = []

HERE = Path(__file__).resolve().parent
SLACK = 0.05
FOUR_PI2 = 4 * math.pi ** 2
# Dirichlet ground states of hyperbolic disks, frozen from tests/oracles/radial_ode.py
DISK_LAMBDA = {1: 6.113081819711707, 2: 1.7672530903377832, 3: 0.9539621891761755}
# literal threshold quoted for criterion 4; the formula it names evaluates lower
RANDOL_QUOTED = 0.0796


def report(num: int, title: str, ok: bool, detail: str, t0: float) -> None:
    line = f"{'PASS' if ok else 'FAIL'}  criterion {num}: {title} | {detail} | {time.perf_counter() - t0:.1f}s"
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert ok, line


def test_criterion_1_flat_torus():
    t0 = time.perf_counter()
    op = assemble(flat_torus_mesh(100))
    lam1 = lowest_eigenpairs(op, 2).eigenvalues[1]
    rel = abs(lam1 - FOUR_PI2) / FOUR_PI2
    ns = [25, 50, 100]
    study = convergence_study(lambda h: flat_torus_mesh(round(1 / h)), [1 / n for n in ns], 2)
    order = float(study.observed_order[1])
    elapsed = time.perf_counter() - t0
    ok = op.n_vertices >= 10_000 and rel <= 0.02 and 1.7 <= order <= 2.3 and elapsed < 60
    report(1, "flat torus oracle", ok,
           f"N={op.n_vertices} lambda1={lam1:.6f} rel.err={rel:.2e} (<=2e-2) order={order:.3f} in [1.7,2.3]", t0)


def test_criterion_2_hyperbolic_disks():
    t0 = time.perf_counter()
    vals, errs = [], []
    for r in (1, 2, 3):
        lam0 = lowest_eigenpairs(assemble(geodesic_disk_mesh(r, 0.1)), 1).eigenvalues[0]
        vals.append(lam0)
        errs.append(abs(lam0 - DISK_LAMBDA[r]) / DISK_LAMBDA[r])
    elapsed = time.perf_counter() - t0
    ok = max(errs) <= 0.02 and min(vals) > 0.25 and vals[0] > vals[1] > vals[2] and elapsed < 120
    report(2, "hyperbolic disk oracle", ok,
           "lambda0(r=1,2,3)=" + ", ".join(f"{v:.5f}" for v in vals)
           + f" max rel.err={max(errs):.2e} (<=2e-2), all >1/4, decreasing", t0)


def test_criterion_3_buser_squeeze():
    t0 = time.perf_counter()
    bound = buser_rayleigh_bound(0.15)
    details, ok = [], True
    rng = np.random.default_rng(2024)
    samples = [None] + [rng.uniform(-0.025, 0.025, size=3).tolist() for _ in range(5)]
    for twists in samples:
        s = buser_surface(2, 0.05, twists)
        mesh = glue(s, 0.05)
        op = assemble(mesh)
        res = lowest_eigenpairs(op, 5)
        fam = buser_test_functions(s, mesh, op)
        lam = res.eigenvalues
        lower = 0.25 + 0.05 ** 2 / (16 * math.pi ** 2)
        upper_ok = np.sum(lam < bound * (1 + SLACK)) >= 2
        lower_ok = np.sum(lam < lower) <= 2
        gap_ok = lam[2] > 0.25 * (1 - SLACK)
        squeeze = buser_squeeze(res, fam, bound_report(s, sys=0.05), 2)
        ok &= bool(upper_ok and lower_ok and gap_ok and all(v.passed for v in squeeze))
        details.append(f"({lam[1]:.9f},{lam[2]:.7f})")
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 600
    report(3, "Buser squeeze genus 2, ell=0.05, h=0.05", ok,
           f"untwisted + 5 twist seeds, (lambda1, lambda2): {' '.join(details)}; "
           f">=2 below {bound * 1.05:.5f}, <=2 below 0.25+sys^2/(16pi^2), lambda2>0.2375", t0)


def test_criterion_4_randol_cover():
    t0 = time.perf_counter()
    base = theta_genus2((1.0, 1.0, 1.0))
    mesh, fam = randol_family(base, 0, 3, 2, 0.1)
    res = lowest_eigenpairs(assemble(mesh), 8)
    base_res = lowest_eigenpairs(assemble(glue(base, 0.1)), 5)
    formula = fam.bound * (1 + SLACK)
    below_formula = int(np.sum(res.eigenvalues < formula))
    below_quoted = int(np.sum(res.eigenvalues < RANDOL_QUOTED))
    contains = cover_contains_base(base_res, res, SLACK)
    elapsed = time.perf_counter() - t0
    ok = (mesh.cover_order == 10 and below_formula >= 2 and below_quoted >= 2 and contains.passed
          and fam.max_quotient <= formula and elapsed < 1800)
    report(4, "Randol cover k=3 n=2 order 10", ok,
           f"order={mesh.cover_order} N={mesh.n_vertices} quotients max={fam.max_quotient:.5f}; "
           f"{below_formula} eigenvalues < formula*1.05={formula:.5f}, {below_quoted} < {RANDOL_QUOTED}; "
           f"base-in-cover max rel.gap={contains.value:.2e} (<=0.1)", t0)


def _oracle_values() -> dict[str, object]:
    proc = subprocess.run([sys.executable, str(HERE / "oracles" / "derive_geometry.py")],
                          capture_output=True, text=True, check=True)
    out = {}
    for line in proc.stdout.splitlines():
        key, val = line.split(" ", 1)
        out[key] = ast.literal_eval(val) if val.startswith("(") else float(val)
    return out


def test_criterion_5_closed_form_ledger():
    t0 = time.perf_counter()
    o = _oracle_values()
    ours = {
        "collar_width(2)": collar_width(2.0),
        "collar_width(0.1)": collar_width(0.1),
        "collar_width(1)": collar_width(1.0),
        "buser(0.15)": buser_rayleigh_bound(0.15),
        "buser(3)": buser_rayleigh_bound(3.0),
        "randol_raw(1.0,0.25)": randol_cover_raw(1.0, 0.25, 4 * math.pi),
        "randol_raw(0.5,0.05)": randol_cover_raw(0.5, 0.05, 4 * math.pi),
        "genus_raw(2,0.25)": 2 * math.log(6) / 0.25,
        "genus_raw(3,0.1)": 2 * math.log(10) / 0.1,
        "nonsep(2)": nonsep_length_bound(2),
        "nonsep_log(2)": nonsep_length_bound(2, log_form=True),
        "lambda_lower(sys=1,chi=-2)": analytic_systole_interval(1.0, chi=-2)[0],
        "lambda_upper(sys=1)": analytic_systole_interval(1.0, chi=-2)[1],
        "delta(1,4pi)": mondal_delta(1.0, 4 * math.pi),
        "randol_quotient(ell=1,k=3)": randol_quotient_bound(1.0, 3, 4 * math.pi),
    }
    worst = 0.0
    for key, val in ours.items():
        worst = max(worst, abs(val - o[key]) / abs(o[key]))
    for key, lens in (("hexagon(1,1,1)", (1.0, 1.0, 1.0)), ("hexagon(1,1,2)", (1.0, 1.0, 2.0))):
        seams = hexagons_from_pants(*lens).seams
        worst = max(worst, max(abs(x - y) / y for x, y in zip(seams, o[key])))
    orders_ok = (randol_genus_order(2, 0.25) == 15 and randol_genus_order(3, 0.1) == 47
                 and randol_cover_order(1.0, 0.25, 4 * math.pi) == 1 and randol_cover_order(0.5, 0.05, 4 * math.pi) == 3)
    chain_ok = True
    for ell in np.logspace(-3, 1, 400):
        rho = collar_width(ell)
        chain_ok &= ell * math.exp(ell) / (2 * math.sinh(ell / 2)) > 2 * ell / (math.sinh(ell / 2) * rho ** 2)
    for genus in (2, 3, 4, 5):
        area = 2 * math.pi * (2 * genus - 2)
        for eps in (0.05, 0.1, 0.25):
            kg = randol_genus_order(genus, eps)
            for ell in np.linspace(1e-3, nonsep_length_bound(genus), 200):
                chain_ok &= kg >= randol_cover_order(ell, eps, area)
    ok = worst <= 1e-9 and orders_ok and bool(chain_ok)
    report(5, "closed-form ledger", ok,
           f"{len(ours) + 2} oracle values, max rel.dev={worst:.1e} (<=1e-9); orders 15/47/1/3; "
           f"inequality chains on grids {'hold' if chain_ok else 'BROKEN'}", t0)


def test_criterion_6_nodal_properties():
    t0 = time.perf_counter()
    rng = np.random.default_rng(7)
    ok, notes = True, []
    for _ in range(5):
        lengths = rng.uniform(0.3, 2.0, size=3)
        twists = rng.uniform(-0.5, 0.5, size=3) * lengths
        s = theta_genus2(lengths, twists)
        mesh = glue(s, 0.15)
        res = lowest_eigenpairs(assemble(mesh), 10)
        cour = courant_check(mesh, res, 10)
        audit = {v.name: v for v in small_eigenvalue_audit(s, res, bound_report(s), mesh)}
        ok &= cour.passed and audit["c_nodal_negative_euler"].passed and audit["d_multiplicity"].passed
        notes.append(f"counts{cour.detail.split('counts')[1].split(';')[0].strip()}")
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 900
    report(6, "nodal domains on 5 genus-2 surfaces", ok,
           "Courant <= i+1, chi<0 below 1/4, cluster sizes <= 7 and <= 1: " + "; ".join(notes), t0)


def _collar_topology(mesh, surface, curve: int, rho: float) -> tuple[int, int, int]:
    """Euler characteristic, boundary loops and components of the width-``rho`` collar sub-complex."""
    g = surface.gluings[curve]
    dist = np.full(mesh.n_vertices, np.inf)
    for p in mesh.pieces:
        for blk, slot in (g.a, g.b):
            if p.block == blk:
                dist[p.vertex_map] = np.minimum(dist[p.vertex_map], p.slot_distance[:, slot])
    inside = dist < rho
    tris = mesh.triangles[np.all(inside[mesh.triangles], axis=1)]
    e = np.sort(np.concatenate([tris[:, [0, 1]], tris[:, [1, 2]], tris[:, [2, 0]]]), axis=1)
    edges, counts = np.unique(e, axis=0, return_counts=True)
    verts = np.unique(tris)
    chi = len(verts) - len(edges) + len(tris)
    n = mesh.n_vertices
    bd = edges[counts == 1]
    gb = coo_matrix((np.ones(len(bd)), (bd[:, 0], bd[:, 1])), shape=(n, n))
    nb, lab = connected_components(gb, directed=False)
    loops = len(np.unique(lab[np.unique(bd)]))
    ga = coo_matrix((np.ones(len(edges)), (edges[:, 0], edges[:, 1])), shape=(n, n))
    _, lab = connected_components(ga, directed=False)
    comps = len(np.unique(lab[verts]))
    return chi, loops, comps


def test_criterion_7_collar_annuli():
    t0 = time.perf_counter()
    ok, notes = True, []
    for ell in (0.5, 1.0, 2.0):
        s = theta_genus2((ell, ell, ell), (0.1, 0.2, 0.3))
        rho = collar_width(ell)
        mesh = glue(s, min(0.1, rho / 5))
        for curve in range(3):
            chi, loops, comps = _collar_topology(mesh, s, curve, rho)
            ok &= chi == 0 and loops == 2 and comps == 1
        notes.append(f"ell={ell}: rho={rho:.4f} chi={chi} loops={loops}")
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 60
    report(7, "collar sub-complexes are annuli", ok, "; ".join(notes) + " (all 3 curves each)", t0)


def test_criterion_8_determinism(tmp_path):
    t0 = time.perf_counter()
    cfg = tmp_path / "campaign.json"
    cfg.write_text('{"h": 0.2, "checks": ["audit", "courant"], "surfaces": '
                   '[{"theta": {"lengths": [1, 1.5, 0.7], "twists": [0.2, -0.1, 0.05]}}, '
                   '{"buser": {"genus": 2, "ell": 0.1}}]}')
    runs = {
        "buser": ["verify", "buser", "--genus", "2", "--ell", "0.05", "--h", "0.05"],
        "randol": ["verify", "randol", "--ell", "1", "--k", "1", "--n", "1", "--h", "0.2"],
        "campaign": ["verify", str(cfg)],
    }
    same, codes = True, []
    for name, argv in runs.items():
        blobs = []
        for rep in range(2):
            out = tmp_path / f"{name}{rep}"
            codes.append(cli_main(argv + ["--out", str(out)]))
            blobs.append(sorted((p.name, p.read_bytes()) for p in out.glob("*.csv")))
        same &= blobs[0] == blobs[1] and len(blobs[0]) > 0
    ok = bool(same) and all(c == 0 for c in codes)
    report(8, "determinism of verify CSVs", ok,
           f"buser/randol/campaign reruns byte-identical={bool(same)}, exit codes {codes}", t0)


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-s"]))
