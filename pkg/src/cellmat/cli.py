"""Command line front end.

Exit codes: 0 success, 2 bad configuration or input, 3 failed analysis,
4 solver failure.  Errors are reported as a one-line JSON object on
stderr so callers can parse them.
"""

import argparse
import csv
import json
import os
import sys

import numpy as np

from . import __version__
from .config import load_config
from .errors import CellmatError, ConfigError, SolverError
from .gridio import read_grid, write_grid
from .materials import fit_scaling, get_material
from .optimize import blueprint_field, optimize
from .pipeline import evaluate_design, gradient_check


def _dump(obj, path=None):
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _sigma1_rel(args):
    if args.material is not None:
        if args.sigma1_rel is not None:
            raise ConfigError("give either --material or --sigma1-rel")
        mat = get_material(args.material)
        return mat.sigma1_rel, mat
    if args.sigma1_rel is None:
        raise ConfigError("need --material or --sigma1-rel")
    return args.sigma1_rel, None


def cmd_optimize(args):
    problem, material = load_config(args.config)
    rho0 = None
    if args.seed_grid is not None:
        rho0, n0 = read_grid(args.seed_grid)
        if n0 != problem.n:
            raise ConfigError(
                f"seed grid is {n0}x{n0}, the problem wants {problem.n}")
    res = optimize(problem, rho0=rho0, out_dir=args.out)

    beta_final = res.history[-1][6]
    rho_int = blueprint_field(problem, res.rho, beta_final)
    write_grid(os.path.join(args.out, "design_int.grid"), rho_int, problem.n)
    with_bands = args.report_bands or \
        (problem.gamma1 > 0.0 and problem.ks.kappa2 == 1)
    report = evaluate_design(rho_int, problem.n, problem.sigma1_rel,
                             material=material, with_bands=with_bands,
                             n_seg=problem.ks.n_seg,
                             m_bands=problem.ks.m_bands)
    out = {"status": res.status, "iterations": res.iterations,
           "design": report.to_dict()}
    _dump(out, os.path.join(args.out, "report.json"))
    _dump(out)
    return 0


def cmd_evaluate(args):
    sigma1_rel, material = _sigma1_rel(args)
    rho, n = read_grid(args.grid)
    report = evaluate_design(rho, n, sigma1_rel, material=material,
                             with_bands=not args.no_bands,
                             n_seg=args.n_seg, m_bands=args.m_bands)
    _dump(report.to_dict(), args.out)
    return 0


def _band_setup(args):
    from .bloch import buckling_strength
    from .design import interpolate
    from .element import element_matrices
    from .homogenize import homogenize
    from .mesh import build_mesh
    from .pipeline import NU
    from .stress import element_stresses, macro_strain

    rho, n = read_grid(args.grid)
    mesh = build_mesh(n)
    elem = element_matrices(NU, mesh.h)
    e_k, _ = interpolate(rho, "stiffness")
    homog = homogenize(mesh, elem, e_k)
    eps0 = macro_strain(homog.cbar)
    st = element_stresses(mesh, elem, homog.chi, rho, eps0)
    e_g, _ = interpolate(rho, "geometric")

    def run(**kw):
        return buckling_strength(mesh, elem, e_k,
                                 e_g[:, None] * st.s_unit,
                                 m=args.m_bands, **kw)
    return run


def cmd_band(args):
    try:
        kx, ky = (float(v) for v in args.k.split(","))
    except ValueError as err:
        raise ConfigError(f"--k wants KX,KY, got {args.k!r}") from err
    run = _band_setup(args)
    band = run(k_points=(np.array([[kx, ky]]), np.zeros(1)))
    out = {"k": [kx, ky],
           "samples": [{"k": [float(s.k[0]), float(s.k[1])],
                        "pinned": s.pinned,
                        "tau": [float(t) for t in s.tau]}
                       for s in band.samples],
           "tau_max": band.tau_max,
           "sigma_c": band.sigma_c if np.isfinite(band.sigma_c) else None}
    _dump(out, args.out)
    return 0


def cmd_sweep(args):
    run = _band_setup(args)
    band = run(n_seg=args.n_seg)
    fh = sys.stdout if args.out in (None, "-") else open(args.out, "w",
                                                         newline="")
    try:
        w = csv.writer(fh)
        nb = max(s.tau.size for s in band.samples)
        w.writerow(["arclength", "kx", "ky", "pinned"]
                   + [f"tau_{i + 1}" for i in range(nb)])
        for s in band.samples:
            w.writerow([f"{s.arclength:.12g}", f"{s.k[0]:.12g}",
                        f"{s.k[1]:.12g}", int(s.pinned)]
                       + [f"{t:.12g}" for t in s.tau])
    finally:
        if fh is not sys.stdout:
            fh.close()
    return 0


def cmd_fit(args):
    pts = []
    with open(args.points) as fh:
        for line in fh:
            line = line.split("#", 1)[0].replace(",", " ").strip()
            if not line:
                continue
            d, s = (float(v) for v in line.split())
            pts.append((d, s))
    fit = fit_scaling(pts)
    _dump({"c0": fit.c0, "n0": fit.n0, "points_used": 2,
           "points_given": len(pts)}, args.out)
    return 0


def cmd_check_gradients(args):
    out = gradient_check(n=args.n, elements=args.elements, seed=args.seed)
    out = {k: (float(v) if isinstance(v, np.floating) else v)
           for k, v in out.items()}
    _dump(out, args.out)
    if not out["pass"]:
        raise SolverError(
            "gradient check failed: ebar %(err_ebar).3g, "
            "stress %(err_stress).3g, tau %(err_tau).3g" % out)
    return 0


def build_parser():
    ap = argparse.ArgumentParser(
        prog="cellmat",
        description="design and analysis of periodic cellular materials")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("optimize", help="run a design optimization")
    p.add_argument("--config", required=True, help="JSON problem definition")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed-grid", help="starting design (.grid)")
    p.add_argument("--report-bands", action="store_true",
                   help="band sweep in the final report even for "
                        "stiffness-only runs")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("evaluate", help="analyze a density grid")
    p.add_argument("--grid", required=True)
    p.add_argument("--material")
    p.add_argument("--sigma1-rel", type=float, dest="sigma1_rel")
    p.add_argument("--no-bands", action="store_true")
    p.add_argument("--n-seg", type=int, default=10)
    p.add_argument("--m-bands", type=int, default=6)
    p.add_argument("--out")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("band", help="eigenvalues at one wavevector")
    p.add_argument("--grid", required=True)
    p.add_argument("--k", required=True, help="KX,KY")
    p.add_argument("--m-bands", type=int, default=6)
    p.add_argument("--out")
    p.set_defaults(func=cmd_band)

    p = sub.add_parser("sweep", help="band sweep along the zone boundary")
    p.add_argument("--grid", required=True)
    p.add_argument("--n-seg", type=int, default=10)
    p.add_argument("--m-bands", type=int, default=6)
    p.add_argument("--out")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("fit", help="strength scaling law from data points")
    p.add_argument("--points", required=True,
                   help="file of 'density strength' lines")
    p.add_argument("--out")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("check-gradients",
                       help="adjoint gradients vs finite differences")
    p.add_argument("--n", type=int, default=4)
    p.add_argument("--elements", type=int, default=8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_check_gradients)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CellmatError as err:
        json.dump({"error": type(err).__name__, "message": str(err)},
                  sys.stderr)
        sys.stderr.write("\n")
        return err.exit_code


if __name__ == "__main__":
    sys.exit(main())
