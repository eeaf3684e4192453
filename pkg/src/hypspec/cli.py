"""Command-line front end.

Exit codes: 0 when every verdict passes, 1 when any verdict fails, 2 on
usage or configuration errors.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import platform
import sys
from contextlib import nullcontext
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .geometry.bounds import BoundReport, Verdict, bound_report
from .geometry.surface import FNSurface, SurfaceError, UnsupportedTopology, theta_genus2
from .mesher.assemble import cyclic_cover_mesh, glue
from .mesher.mesh import HyperbolicMesh, MeshError
from .mesher.pants import flat_torus_mesh, geodesic_disk_mesh

log = logging.getLogger("hypspec")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------


def _thread_limit():
    value = os.environ.get("HYPSPEC_THREADS")
    if not value:
        return nullcontext()
    try:
        n = int(value)
    except ValueError as exc:
        raise UsageError(f"HYPSPEC_THREADS must be an integer, got {value!r}") from exc
    if n < 1:
        raise UsageError("HYPSPEC_THREADS must be at least 1")
    from threadpoolctl import threadpool_limits

    return threadpool_limits(limits=n)


def _read_surface(path: str) -> FNSurface:
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"cannot read surface file {path!r}")
    try:
        return FNSurface.load(p)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: invalid JSON ({exc})") from exc
    except (KeyError, TypeError) as exc:
        raise UsageError(f"{path}: malformed surface description ({exc})") from exc


def _read_mesh_or_surface(path: str, h: float | None):
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"cannot read input file {path!r}")
    head = p.read_text().split("\n", 1)[0].strip()
    if head in ("HYPMESH v1", "FLATMESH v1"):
        return None, HyperbolicMesh.load(p)
    surface = _read_surface(path)
    if h is None:
        raise UsageError("--h is required when the input is a surface description")
    return surface, glue(surface, h)


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_manifest(out: Path, args, extra: dict | None = None) -> None:
    import scipy

    config = {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "out", "verbose")}
    blob = json.dumps(config, sort_keys=True, default=str).encode()
    inputs = {}
    for key in ("input", "config"):
        path = getattr(args, key, None)
        if path and Path(path).is_file():
            inputs[path] = hashlib.sha256(Path(path).read_bytes()).hexdigest()
    manifest = {
        "command": args.command,
        "config": config,
        "config_hash": hashlib.sha256(blob).hexdigest(),
        "inputs": inputs,
        "seed": getattr(args, "seed", None),
        "versions": {
            "hypspec": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "python": platform.python_version(),
        },
    }
    if extra:
        manifest.update(extra)
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True, default=str) + "\n")


def _print_verdicts(verdicts: list[Verdict]) -> int:
    for v in verdicts:
        print(f"{'PASS' if v.passed else 'FAIL'}  {v.name:<24} {v.detail}")
    return EXIT_OK if all(v.passed for v in verdicts) else EXIT_FAIL


def _plot_spectrum(path: Path, eigenvalues, lower: float | None = None, title: str = "") -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    matplotlib.rcParams["svg.hashsalt"] = "hypspec"
    fig, ax = plt.subplots(figsize=(6, 4))
    idx = np.arange(len(eigenvalues))
    ax.plot(idx, eigenvalues, "o", ms=4, label="eigenvalues")
    ax.axhline(0.25, color="k", ls="--", lw=1, label="1/4")
    if lower is not None and np.isfinite(lower):
        ax.axhline(lower, color="tab:red", ls=":", lw=1, label="analytic-systole lower bound")
    ax.set_xlabel("index")
    ax.set_ylabel("eigenvalue")
    if title:
        ax.set_title(title)
    ax.legend(loc="upper left", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def _default_m(chi: int | None, m: int | None) -> int:
    if m is not None:
        if m < 1:
            raise UsageError("--m must be at least 1")
        return m
    return (-chi if chi is not None else 3) + 3


def _solve(mesh: HyperbolicMesh, m: int, seed: int, bc=None):
    from .spectral.operator import assemble
    from .spectral.solver import lowest_eigenpairs

    op = assemble(mesh, bc)
    return op, lowest_eigenpairs(op, m, seed=seed)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_build(args) -> int:
    surface = _read_surface(args.input)
    mesh = glue(surface, args.h, free_bc=args.free_bc)
    out = _out_dir(args)
    mesh.save(out / "surface.hypmesh")
    q = mesh.quality()
    print(f"vertices {q.n_vertices}  triangles {q.n_triangles}  h_max {q.h_max:.6g}  "
          f"min_angle {q.min_angle:.4f}  chi {mesh.euler_characteristic()}  area {mesh.area():.10g}")
    for label, (req, app, shift) in sorted(mesh.twists.items()):
        print(f"twist {label}: requested {req:.6g} applied {app:.6g} ({shift} segments)")
    _write_manifest(out, args, {"mesh_hash": mesh.mesh_hash()})
    return EXIT_OK


def cmd_spectrum(args) -> int:
    from .spectral.solver import write_csv

    surface, mesh = _read_mesh_or_surface(args.input, args.h)
    chi = surface.euler_characteristic if surface is not None else mesh.euler_characteristic()
    m = _default_m(chi if chi < 0 else None, args.m)
    op, res = _solve(mesh, m, args.seed, args.bc)
    out = _out_dir(args)
    write_csv(out / "eigenvalues.csv", res.eigenvalues, res.residual_norms)
    for i, (lam, r) in enumerate(zip(res.eigenvalues, res.residual_norms)):
        print(f"{i:3d}  {lam:.12g}  residual {r:.2e}")
    if args.plot:
        lower = bound_report(surface).lambda_interval[0] if surface is not None and surface.gluings else None
        _plot_spectrum(out / "spectrum.svg", res.eigenvalues, lower, "lowest eigenvalues")
    _write_manifest(out, args, {"mesh_hash": op.mesh_hash})
    return EXIT_OK


def cmd_bounds(args) -> int:
    surface = _read_surface(args.input)
    rep: BoundReport = bound_report(surface, sys=args.sys)
    print("\n".join(rep.lines()))
    return EXIT_OK if all(v.passed for v in rep.verdicts) else EXIT_FAIL


def _verify_buser(args, out: Path) -> tuple[list[Verdict], object]:
    from .experiments.audit import buser_squeeze, family_bound, family_disjointness, small_eigenvalue_audit, verify_variational
    from .experiments.families import buser_surface, buser_test_functions

    twists = None
    if args.twist_seed is not None:
        rng = np.random.default_rng(args.twist_seed)
        twists = rng.uniform(-0.5 * args.ell, 0.5 * args.ell, size=3 * args.genus - 3).tolist()
    surface = buser_surface(args.genus, args.ell, twists)
    mesh = glue(surface, args.h)
    m = _default_m(surface.euler_characteristic, args.m)
    op, res = _solve(mesh, m, args.seed)
    fam = buser_test_functions(surface, mesh, op)
    rep = bound_report(surface, sys=args.ell)
    verdicts = buser_squeeze(res, fam, rep, args.genus)
    verdicts += [family_bound(fam), family_disjointness(fam, op), verify_variational(fam, res)]
    verdicts += small_eigenvalue_audit(surface, res, rep, mesh)
    return verdicts, (res, rep)


def _verify_randol(args, out: Path) -> tuple[list[Verdict], object]:
    from .experiments.audit import cover_contains_base, count_below_bound, family_bound, family_disjointness, verify_variational
    from .experiments.families import randol_family

    surface = _read_surface(args.input) if args.input else theta_genus2((args.ell,) * 3)
    mesh, fam = randol_family(surface, args.curve, args.k, args.n, args.h)
    m = args.m if args.m is not None else max(fam.size + 2, 2 * (args.k + 2) * args.n)
    op, res = _solve(mesh, m, args.seed)
    _, base = _solve(glue(surface, args.h), _default_m(surface.euler_characteristic, None), args.seed)
    verdicts = [count_below_bound(res, fam), family_bound(fam), family_disjointness(fam, op),
                verify_variational(fam, res), cover_contains_base(base, res)]
    return verdicts, (res, None)


def _verify_file(args, out: Path) -> tuple[list[Verdict], list[dict]]:
    from .experiments.campaign import ConfigError, config_from_dict, run_campaign, surface_from_entry, run_job

    path = Path(args.input)
    if not path.is_file():
        raise UsageError(f"cannot read {args.input!r}")
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: invalid JSON ({exc})") from exc
    try:
        if "surfaces" in raw:
            if args.h is not None:
                raw["h"] = args.h
            if args.m is not None:
                raw["m"] = args.m
            raw.setdefault("seed", args.seed)
            rows = run_campaign(config_from_dict(raw, path.parent))
        else:
            if args.h is None:
                raise UsageError("--h is required to audit a single surface")
            job = surface_from_entry({"surface": raw, "name": path.stem, "sys": args.sys})
            rows = run_job(job, args.h, args.m, args.seed, ("audit", "courant"))
    except ConfigError as exc:
        raise UsageError(str(exc)) from exc
    verdicts = [Verdict(f"{r['surface']}:{r['check']}", r["verdict"] == "PASS", detail=r["detail"]) for r in rows]
    return verdicts, rows


def cmd_verify(args) -> int:
    from .experiments.campaign import write_rows

    out = _out_dir(args)
    if args.target == "buser":
        verdicts, (res, rep) = _verify_buser(args, out)
        rows = _rows("buser", verdicts, rep)
    elif args.target == "randol":
        verdicts, (res, rep) = _verify_randol(args, out)
        rows = _rows("randol", verdicts, None)
    else:
        args.input = args.target
        verdicts, rows = _verify_file(args, out)
        res = None
    write_rows(out / "verdicts.csv", rows)
    if res is not None:
        from .spectral.solver import write_csv

        write_csv(out / "eigenvalues.csv", res.eigenvalues, res.residual_norms)
        if args.plot:
            lower = rep.lambda_interval[0] if rep is not None else None
            _plot_spectrum(out / "spectrum.svg", res.eigenvalues, lower, args.target)
    _write_manifest(out, args)
    return _print_verdicts(verdicts)


def _rows(name: str, verdicts: list[Verdict], rep: BoundReport | None) -> list[dict]:
    from .experiments.campaign import COLUMNS, verdict_row

    rows = []
    for v in verdicts:
        if rep is not None:
            rows.append(verdict_row(name, v, rep))
        else:
            row = {c: "" for c in COLUMNS}
            row.update({"surface": name, "check": v.name, "verdict": "PASS" if v.passed else "FAIL",
                        "value": repr(float(v.value)), "threshold": repr(float(v.threshold)),
                        "margin": repr(float(v.margin)), "detail": v.detail})
            rows.append(row)
    return rows


def cmd_cover(args) -> int:
    from .spectral.solver import write_csv

    surface = _read_surface(args.input)
    if args.h is None:
        raise UsageError("--h is required")
    mesh = cyclic_cover_mesh(surface, args.curve, args.k, args.n, h=args.h)
    out = _out_dir(args)
    mesh.save(out / "cover.hypmesh")
    print(f"cover order {(args.k + 2) * args.n}  vertices {mesh.n_vertices}  chi {mesh.euler_characteristic()}  "
          f"area {mesh.area():.10g}")
    if args.m is not None or args.plot:
        m = _default_m(mesh.euler_characteristic(), args.m)
        _, res = _solve(mesh, m, args.seed)
        write_csv(out / "eigenvalues.csv", res.eigenvalues, res.residual_norms)
        if args.plot:
            _plot_spectrum(out / "spectrum.svg", res.eigenvalues, None, "cover spectrum")
    _write_manifest(out, args, {"mesh_hash": mesh.mesh_hash()})
    return EXIT_OK


def cmd_converge(args) -> int:
    from .spectral.convergence import convergence_study

    if args.input == "torus":
        source = lambda h: flat_torus_mesh(max(3, round(1.0 / h)))  # noqa: E731
        chi = 0
    elif args.input.startswith("disk:"):
        radius = float(args.input.split(":", 1)[1])
        source = lambda h: geodesic_disk_mesh(radius, h)  # noqa: E731
        chi = None
    else:
        source = _read_surface(args.input)
        chi = source.euler_characteristic
    m = args.m if args.m is not None else (_default_m(chi, None) if chi else 2)
    try:
        rep = convergence_study(source, args.h_list, m, seed=args.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    out = _out_dir(args)
    with open(out / "convergence.csv", "w") as fh:
        fh.write("index," + ",".join(f"h={float(h)!r}" for h in rep.h) + ",extrapolated,observed_order\n")
        for j in range(m):
            vals = ",".join(repr(float(v)) for v in rep.eigenvalues[:, j])
            fh.write(f"{j},{vals},{float(rep.extrapolated[j])!r},{float(rep.observed_order[j])!r}\n")
    print("\n".join(rep.lines()))
    _write_manifest(out, args)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="hypspec",
        description="Meshes, spectra and small-eigenvalue checks for hyperbolic surfaces. "
                    "Set HYPSPEC_THREADS to cap BLAS/LAPACK threads.",
    )
    p.add_argument("--version", action="version", version=f"hypspec {__version__}")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, h_required=False):
        sp.add_argument("--h", type=float, required=h_required, help="target mesh size (longest edge)")
        sp.add_argument("--m", type=int, help="number of eigenpairs (default: -chi + 3)")
        sp.add_argument("--seed", type=int, default=0, help="solver start-vector seed (default 0)")
        sp.add_argument("--plot", action="store_true", help="also write an SVG spectrum plot")
        sp.add_argument("--out", default="hypspec_out", help="output directory (default hypspec_out)")

    b = sub.add_parser("build", help="mesh a surface description and write surface.hypmesh")
    b.add_argument("input", help="surface JSON")
    common(b, h_required=True)
    b.add_argument("--free-bc", choices=["Dirichlet", "Neumann"], default="Dirichlet",
                   help="tag for unglued boundary curves")
    b.set_defaults(func=cmd_build)

    s = sub.add_parser("spectrum", help="lowest eigenpairs of a surface JSON or a HYPMESH/FLATMESH file")
    s.add_argument("input", help="surface JSON or mesh file")
    common(s)
    s.add_argument("--bc", choices=["Dirichlet", "Neumann"], default=None,
                   help="override boundary tags (default: use the tags)")
    s.set_defaults(func=cmd_spectrum)

    v = sub.add_parser("verify", help="run a verification: buser, randol, a campaign config or a surface JSON")
    v.add_argument("target", help="'buser', 'randol', a campaign config JSON or a surface JSON")
    common(v)
    v.add_argument("--genus", type=int, default=2, help="genus for buser (default 2)")
    v.add_argument("--ell", type=float, default=0.05, help="pants curve length for buser/randol (default 0.05)")
    v.add_argument("--twist-seed", type=int, default=None, help="draw random twists for buser from this seed")
    v.add_argument("--k", type=int, default=3, help="randol: k (default 3)")
    v.add_argument("--n", type=int, default=2, help="randol: n (default 2)")
    v.add_argument("--curve", type=int, default=0, help="randol: index of the non-separating curve (default 0)")
    v.add_argument("--input", default=None, help="randol: base surface JSON (default: genus-2 theta with --ell)")
    v.add_argument("--sys", type=float, default=None, help="known systole (certifies the lower bound)")
    v.set_defaults(func=cmd_verify)

    c = sub.add_parser("cover", help="mesh the cyclic cover of order (k+2)n along a non-separating curve")
    c.add_argument("input", help="surface JSON")
    common(c)
    c.add_argument("--curve", type=int, default=0, help="gluing index of the curve (default 0)")
    c.add_argument("--k", type=int, default=1, help="k >= 1 (default 1)")
    c.add_argument("--n", type=int, default=1, help="n >= 1 (default 1)")
    c.set_defaults(func=cmd_cover)

    bd = sub.add_parser("bounds", help="print every closed-form bound for a surface")
    bd.add_argument("input", help="surface JSON")
    bd.add_argument("--sys", type=float, default=None, help="known systole (certifies the lower bound)")
    bd.set_defaults(func=cmd_bounds)

    cv = sub.add_parser("converge", help="refinement study with Richardson extrapolation")
    cv.add_argument("input", help="surface JSON, 'torus' or 'disk:RADIUS'")
    cv.add_argument("--h-list", type=float, nargs="+", required=True, help="three or more distinct mesh sizes")
    cv.add_argument("--m", type=int, help="number of eigenvalues (default: -chi + 3)")
    cv.add_argument("--seed", type=int, default=0, help="solver start-vector seed (default 0)")
    cv.add_argument("--out", default="hypspec_out", help="output directory (default hypspec_out)")
    cv.set_defaults(func=cmd_converge)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        with _thread_limit():
            return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (SurfaceError, UnsupportedTopology, MeshError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
