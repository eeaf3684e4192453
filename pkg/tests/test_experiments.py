from __future__ import annotations

import dataclasses
import math

import numpy as np
import pytest

from hypspec.geometry import SurfaceError, bound_report, buser_rayleigh_bound, collar_width, theta_genus2
from hypspec.experiments import (
    AuditError,
    ResolutionError,
    TestFamily,
    buser_squeeze,
    buser_surface,
    buser_test_functions,
    config_from_dict,
    count_below_bound,
    courant_check,
    cover_contains_base,
    family_bound,
    family_disjointness,
    nodal_domains,
    randol_family,
    randol_quotient_bound,
    run_campaign,
    small_eigenvalue_audit,
    verify_variational,
    write_rows,
)
from hypspec.mesher import glue
from hypspec.spectral import assemble, lowest_eigenpairs

# frozen from tests/oracles/derive_geometry.py
RANDOL_Q_1_3 = 0.051439770428163006


@pytest.fixture(scope="module")
def buser_run():
    surface = buser_surface(2, 0.05)
    mesh = glue(surface, 0.1)
    op = assemble(mesh)
    res = lowest_eigenpairs(op, 5)
    return surface, mesh, op, res, buser_test_functions(surface, mesh, op)


@pytest.fixture(scope="module")
def theta_run():
    surface = theta_genus2((1.0, 1.2, 1.4), (0.1, -0.2, 0.3))
    mesh = glue(surface, 0.2)
    op = assemble(mesh)
    return surface, mesh, op, lowest_eigenpairs(op, 10)


def test_buser_surface_examples():
    s2 = buser_surface(2, 0.05)
    assert len(s2.blocks) == 2 and len(s2.gluings) == 3
    assert s2.curve_lengths() == [0.05] * 3
    s3 = buser_surface(3, 0.05)
    assert len(s3.blocks) == 4 and len(s3.gluings) == 6
    assert s3.euler_characteristic == -4
    with pytest.raises(SurfaceError, match="collar width"):
        buser_surface(2, 2.0)
    with pytest.raises(SurfaceError):
        buser_surface(1, 0.05)
    # the admissibility threshold is 2 asinh(1 / sinh 1)
    limit = 2 * math.asinh(1 / math.sinh(1))
    assert collar_width(limit * 0.999) > 1 > collar_width(limit * 1.001)


def test_buser_family_is_disjoint_and_below_bound(buser_run):
    surface, mesh, op, res, fam = buser_run
    assert fam.size == 2
    assert fam.bound == pytest.approx(buser_rayleigh_bound(0.15), rel=1e-14)
    assert family_disjointness(fam, op).passed
    assert family_bound(fam).passed
    assert all(q > 0 for q in fam.quotients)
    # each function is 1 away from the curves and 0 on the other block
    for f, piece in zip(fam.functions, mesh.pieces):
        assert f.max() == pytest.approx(1.0)
        assert np.all((f >= 0) & (f <= 1))


def test_buser_squeeze_passes(buser_run):
    surface, mesh, op, res, fam = buser_run
    rep = bound_report(surface, sys=0.05)
    verdicts = buser_squeeze(res, fam, rep, 2)
    assert [v.name for v in verdicts] == ["buser_upper", "buser_lower", "buser_gap"]
    assert all(v.passed for v in verdicts), [v.detail for v in verdicts]
    assert count_below_bound(res, fam).passed


def test_buser_quotient_decreases_with_ell():
    worst = []
    for ell in (0.1, 0.05, 0.02):
        s = buser_surface(2, ell)
        mesh = glue(s, 0.2)
        worst.append(buser_test_functions(s, mesh).max_quotient)
    assert worst[0] > worst[1] > worst[2] > 0


def test_resolution_error_on_coarse_mesh():
    s = buser_surface(2, 0.05)
    with pytest.raises(ResolutionError, match="layers"):
        buser_test_functions(s, glue(s, 0.3))


def test_verify_variational(buser_run):
    surface, mesh, op, res, fam = buser_run
    v = verify_variational(fam, res)
    assert v.passed and v.value <= v.threshold
    const = TestFamily([np.ones(mesh.n_vertices)], [0.0], "const", mesh.mesh_hash(), 0.0)
    assert verify_variational(const, res).passed
    shuffled = dataclasses.replace(res, eigenvalues=res.eigenvalues[::-1].copy())
    bad = verify_variational(fam, shuffled)
    assert not bad.passed and "sorted" in bad.detail
    other = dataclasses.replace(fam, mesh_hash="0" * 64)
    with pytest.raises(AuditError):
        verify_variational(other, res)
    # a family whose worst quotient sits below lambda_{m-1} must fail
    low = dataclasses.replace(fam, quotients=[res.eigenvalues[1] / 2] * 2)
    assert not verify_variational(low, res).passed


def test_randol_bound_value():
    area = 4 * math.pi
    assert randol_quotient_bound(1.0, 3, area) == pytest.approx(RANDOL_Q_1_3, rel=1e-12)


def test_randol_family_order_ten():
    base = theta_genus2((1.0, 1.0, 1.0))
    mesh, fam = randol_family(base, 0, 3, 2, 0.2)
    assert mesh.cover_order == 10
    assert mesh.euler_characteristic() == -20
    assert mesh.area() == pytest.approx(40 * math.pi, rel=1e-10)
    assert fam.size == 2
    op = assemble(mesh)
    assert family_disjointness(fam, op).passed
    assert fam.max_quotient < fam.bound
    res = lowest_eigenpairs(op, 6)
    assert count_below_bound(res, fam).passed
    assert verify_variational(fam, res).passed
    base_res = lowest_eigenpairs(assemble(glue(base, 0.2)), 5)
    assert cover_contains_base(base_res, res).passed


def test_randol_family_single_block():
    base = theta_genus2((1.0, 1.0, 1.0))
    mesh, fam = randol_family(base, 1, 1, 1, 0.2)
    assert mesh.cover_order == 3 and fam.size == 1
    assert fam.max_quotient < randol_quotient_bound(1.0, 1, 4 * math.pi)
    with pytest.raises(ResolutionError):
        randol_family(base, 0, 1, 1, 0.5)


def test_nodal_domains_of_first_modes(theta_run):
    surface, mesh, op, res = theta_run
    rep = nodal_domains(mesh, res.eigenvectors[:, :2])
    assert rep.counts == [1, 2]
    (ground,) = rep.domains[0]
    assert ground.euler_characteristic == mesh.euler_characteristic()
    assert ground.area == pytest.approx(mesh.area(), rel=1e-12)
    assert {d.sign for d in rep.domains[1]} == {1, -1}


def test_courant_and_audit_on_twisted_surface(theta_run):
    surface, mesh, op, res = theta_run
    assert courant_check(mesh, res).passed
    verdicts = small_eigenvalue_audit(surface, res, bound_report(surface), mesh)
    assert [v.name for v in verdicts] == [
        "a_count_below_lower", "b_gap_above_quarter", "c_nodal_negative_euler", "d_multiplicity",
    ]
    assert all(v.passed for v in verdicts), [v.detail for v in verdicts]


@pytest.mark.parametrize("seed", [1, 2])
def test_audit_random_twists(seed):
    rng = np.random.default_rng(seed)
    ell = rng.uniform(0.05, 0.3)
    s = buser_surface(2, ell, rng.uniform(-ell / 2, ell / 2, size=3).tolist())
    mesh = glue(s, 0.15)
    res = lowest_eigenpairs(assemble(mesh), 5)
    verdicts = small_eigenvalue_audit(s, res, bound_report(s, sys=ell), mesh)
    assert all(v.passed for v in verdicts), [v.detail for v in verdicts]


def test_audit_needs_enough_eigenpairs(theta_run):
    surface, mesh, op, res = theta_run
    short = dataclasses.replace(res, eigenvalues=res.eigenvalues[:2], eigenvectors=res.eigenvectors[:, :2])
    with pytest.raises(AuditError):
        small_eigenvalue_audit(surface, short, bound_report(surface))


def test_campaign_rows_are_deterministic(tmp_path):
    raw = {
        "h": 0.3,
        "checks": ["audit", "courant"],
        "surfaces": [
            {"theta": {"lengths": [1, 1, 1], "twists": [0.1, 0.2, 0.3]}, "name": "a"},
            {"theta": {"lengths": [0.8, 1, 1.2]}, "name": "b", "sys": 0.8},
        ],
    }
    paths = []
    for i in range(2):
        rows = run_campaign(config_from_dict(raw))
        p = tmp_path / f"run{i}.csv"
        write_rows(p, rows)
        paths.append(p)
    assert paths[0].read_bytes() == paths[1].read_bytes()
    assert [r["surface"] for r in rows[:5]] == ["a"] * 5
    assert all(r["verdict"] == "PASS" for r in rows)


def test_campaign_config_errors():
    from hypspec.experiments import ConfigError

    with pytest.raises(ConfigError):
        config_from_dict({"h": 0.3, "surfaces": []})
    with pytest.raises(ConfigError):
        config_from_dict({"surfaces": [{"theta": {"lengths": [1, 1, 1]}}]})
    with pytest.raises(ConfigError):
        config_from_dict({"h": 0.3, "checks": ["nope"], "surfaces": [{"theta": {"lengths": [1, 1, 1]}}]})
    with pytest.raises(ConfigError):
        config_from_dict({"h": 0.3, "surfaces": [{"what": 1}]})
