"""Robust strength/stiffness design loop on the periodic cell.

One iteration: symmetrize and filter the raw design, project the eroded,
intermediate and dilated realizations, analyze the eroded one (stiffness,
stress, and when requested the band sweep), aggregate, chain all
gradients back to the raw variables along each realization's own
projection, and take one MMA step.  The dilated realization carries the
volume constraint; its bound is retuned every 20 iterations so the
intermediate design lands on the requested fraction.  Projection
sharpness doubles on a fixed schedule; the loop ends at the iteration
cap or when the design stops moving at the final sharpness.
"""

import csv
import os
from dataclasses import dataclass, field

import numpy as np

from .aggregate import KSAggregator
from .bloch import buckling_strength
from .design import PDEFilter, enforce_symmetry, interpolate, project
from .element import element_matrices
from .errors import CellmatError, ConfigError
from .gridio import write_grid, write_pgm
from .homogenize import homogenize
from .mesh import build_mesh
from .mma import MMA
from .sensitivity import chain_to_design, grad_ebar, stability_grad, \
    stress_grad
from .stress import element_stresses, macro_strain

NU = 1.0 / 3.0


@dataclass(frozen=True)
class KSParams:
    zeta: float = 100.0
    kappa1: int = 1
    kappa2: int = 1
    n_seg: int = 2
    m_bands: int = 6

    def validate(self):
        if self.zeta <= 0.0:
            raise ConfigError(f"zeta must be positive, got {self.zeta}")
        if self.kappa1 not in (0, 1) or self.kappa2 not in (0, 1):
            raise ConfigError("kappa flags must be 0 or 1")


@dataclass(frozen=True)
class OptimizationProblem:
    n: int
    f_star: float
    gamma1: float
    ks: KSParams = KSParams()
    sigma_star: float = 0.0
    e_star: float = 0.0
    sigma1_rel: float = 0.044
    radius: float = 0.0          # 0 picks the default for f_star and n
    delta_eta: float = 0.05
    beta_max: float = 32.0
    beta_every: int = 50
    max_iter: int = 400
    move: float = 0.1
    tol_change: float = 1e-3
    load: tuple = (-1.0, 0.0, 0.0)
    checkpoint_every: int = 25

    def validate(self):
        self.ks.validate()
        if not 0.0 <= self.gamma1 <= 1.0:
            raise ConfigError(f"gamma1 must be in [0,1], got {self.gamma1}")
        if not 0.0 < self.f_star < 1.0:
            raise ConfigError(f"f_star must be in (0,1), got {self.f_star}")
        if self.sigma_star < 0.0 or self.e_star < 0.0:
            raise ConfigError("sigma_star and e_star must be >= 0")
        if self.gamma1 > 0.0 and not (self.ks.kappa1 or self.ks.kappa2):
            raise ConfigError("strength objective needs kappa1 or kappa2")
        if not 0.0 < self.delta_eta < 0.5:
            raise ConfigError(f"delta_eta must be in (0,0.5), got {self.delta_eta}")

    def filter_radius(self):
        if self.radius > 0.0:
            return self.radius
        base = 0.03 if self.f_star >= 0.15 else 0.01
        return max(base, 2.0 / self.n)

    def beta_at(self, it):
        return float(min(self.beta_max, 2.0 ** (it // self.beta_every)))


def physical_field(problem, rho, beta, eta=0.5):
    """Raw design -> one projected realization, default the intermediate."""
    mesh = build_mesh(problem.n)
    elem = element_matrices(NU, mesh.h)
    filt = PDEFilter(mesh, elem, problem.filter_radius())
    rho = np.asarray(rho, dtype=float)
    return project(filt.apply(enforce_symmetry(rho, problem.n)), beta, eta)


def blueprint_field(problem, rho, beta):
    """0/1 fabrication blueprint: the thresholded intermediate projection.

    Residual gray in the projected field belongs to the parameterization,
    not the part; near-void residue in particular reads as spurious
    stress hotspots under the relaxed stress interpolation.
    """
    return (physical_field(problem, rho, beta) > 0.5).astype(float)


def seed_lattice(n, f_star):
    """Orthogonal-bar lattice whose solid fraction hits the target."""
    w = 1.0 - np.sqrt(1.0 - f_star)
    c = (np.arange(n) + 0.5) / n
    on = np.abs(c - 0.5) < w / 2.0
    rho = np.zeros((n, n))
    rho[on, :] = 1.0
    rho[:, on] = 1.0
    return rho.ravel()


@dataclass
class Evaluation:
    objective: float
    grad: np.ndarray
    cons_names: list
    cons_vals: np.ndarray
    cons_grads: np.ndarray
    ebar: float
    sigma_y: float
    sigma_c: float | None
    f_int: float
    f_dil: float
    max_vm: float
    band: object = field(default=None, repr=False)
    rho_bar: np.ndarray = field(default=None, repr=False)


def evaluate_problem(mesh, elem, filt, problem, rho, beta, aggs, f_dil_star,
                     store_modes=True):
    """Objective, constraints and design-space gradients at one iterate."""
    p = problem
    n = mesh.n
    eta_e = 0.5 + p.delta_eta
    eta_d = 0.5 - p.delta_eta

    rho_t = filt.apply(enforce_symmetry(rho, n))
    rb = project(rho_t, beta, eta_e)

    e_k, de_k = interpolate(rb, "stiffness")
    homog = homogenize(mesh, elem, e_k)
    eps0 = macro_strain(homog.cbar, np.asarray(p.load, dtype=float))
    st = element_stresses(mesh, elem, homog.chi, rb, eps0)
    sigma1 = p.sigma1_rel

    need_tau = p.gamma1 > 0.0 and p.ks.kappa2 == 1
    need_vm_obj = p.gamma1 > 0.0 and p.ks.kappa1 == 1

    band = None
    tau_all = None
    if need_tau:
        e_g, de_g = interpolate(rb, "geometric")
        band = buckling_strength(mesh, elem, e_k, e_g[:, None] * st.s_unit,
                                 n_seg=p.ks.n_seg, m=p.ks.m_bands,
                                 store_modes=store_modes)
        tau_all = np.concatenate([s.tau for s in band.samples])

    def chain_e(g):
        return chain_to_design(g, filt, rho_t, beta, eta_e, n)

    obj = 0.0
    grad_phys = np.zeros(mesh.ne)
    if p.gamma1 > 0.0:
        vals = []
        if need_vm_obj:
            vals.append(st.vm / sigma1)
        if need_tau:
            vals.append(tau_all)
        ks_val, w = aggs["objective"](np.concatenate(vals))
        obj += p.gamma1 * ks_val
        if need_vm_obj:
            w_vm, w = w[:mesh.ne], w[mesh.ne:]
            grad_phys += p.gamma1 * stress_grad(mesh, elem, homog, st,
                                                w_vm / sigma1, de_k)
        if need_tau:
            wlist = []
            at = 0
            for s in band.samples:
                wlist.append(w[at:at + s.tau.size])
                at += s.tau.size
            grad_phys += p.gamma1 * stability_grad(mesh, elem, homog, st,
                                                   band, wlist, e_g, de_g,
                                                   de_k)
    if p.gamma1 < 1.0:
        obj += (1.0 - p.gamma1) / homog.ebar
        grad_phys -= (1.0 - p.gamma1) / homog.ebar ** 2 * grad_ebar(homog, de_k)

    names = []
    vals = []
    grads = []
    if p.sigma_star > 0.0:
        ks_y, w_y = aggs["yield"](st.vm / sigma1)
        names.append("yield")
        vals.append(p.sigma_star * ks_y - 1.0)
        grads.append(chain_e(p.sigma_star
                             * stress_grad(mesh, elem, homog, st,
                                           w_y / sigma1, de_k)))
    if p.e_star > 0.0:
        names.append("stiffness")
        vals.append(1.0 - homog.ebar / p.e_star)
        grads.append(chain_e(-grad_ebar(homog, de_k) / p.e_star))

    rb_d = project(rho_t, beta, eta_d)
    f_dil = float(rb_d.mean())
    names.append("volume")
    vals.append(f_dil / f_dil_star - 1.0)
    g_vol = np.full(mesh.ne, 1.0 / (mesh.ne * f_dil_star))
    grads.append(chain_to_design(g_vol, filt, rho_t, beta, eta_d, n))

    f_int = float(project(rho_t, beta, 0.5).mean())
    sigma_c = band.sigma_c if band is not None else None
    return Evaluation(
        objective=obj, grad=chain_e(grad_phys),
        cons_names=names, cons_vals=np.array(vals), cons_grads=np.array(grads),
        ebar=homog.ebar, sigma_y=sigma1 / st.max_vm, sigma_c=sigma_c,
        f_int=f_int, f_dil=f_dil, max_vm=st.max_vm, band=band, rho_bar=rb)


@dataclass
class OptimizationResult:
    rho: np.ndarray
    status: str
    iterations: int
    history: list
    final: Evaluation
    problem: OptimizationProblem


def _fmt(v):
    return "" if v is None else f"{v:.12g}"


class _RunLog:
    """Iteration CSV, aggregation CSV and checkpoint files, all optional."""

    def __init__(self, out_dir, cons_names):
        self.out_dir = out_dir
        self.cons_names = cons_names
        self._fh = None
        self._csv = None
        if out_dir is not None:
            os.makedirs(out_dir, exist_ok=True)
            self._fh = open(os.path.join(out_dir, "iterations.csv"),
                            "w", newline="")
            self._csv = csv.writer(self._fh)
            self._csv.writerow(["iter", "objective", "ebar", "sigma_y",
                                "sigma_c", "f_int", "beta"]
                               + [f"g_{c}" for c in cons_names])

    def row(self, it, ev, beta):
        if self._csv is None:
            return
        self._csv.writerow([it, _fmt(ev.objective), _fmt(ev.ebar),
                            _fmt(ev.sigma_y), _fmt(ev.sigma_c),
                            _fmt(ev.f_int), _fmt(beta)]
                           + [_fmt(v) for v in ev.cons_vals])
        self._fh.flush()

    def checkpoint(self, tag, rho, n):
        if self.out_dir is None:
            return
        write_grid(os.path.join(self.out_dir, f"checkpoint_{tag}.grid"),
                   rho, n)

    def finish(self, aggs, rho, n):
        if self.out_dir is None:
            return
        write_grid(os.path.join(self.out_dir, "design.grid"), rho, n)
        write_pgm(os.path.join(self.out_dir, "design.pgm"), rho, n)
        with open(os.path.join(self.out_dir, "ks_log.csv"),
                  "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["iter", "tag", "count", "zeta_eff", "max", "ks"])
            for agg in aggs.values():
                for it, tag, count, zeff, vmax, out in agg.history:
                    w.writerow([it, tag, count, _fmt(zeff), _fmt(vmax),
                                _fmt(out)])
        if self._fh is not None:
            self._fh.close()
            self._fh = None


def optimize(problem, rho0=None, out_dir=None):
    """Run the design loop; returns the final design and its history.

    The history rows mirror the iteration CSV.  The projected physical
    field of the last evaluation rides along for reporting.
    """
    problem.validate()
    p = problem
    mesh = build_mesh(p.n)
    elem = element_matrices(NU, mesh.h)
    filt = PDEFilter(mesh, elem, p.filter_radius())
    rho = seed_lattice(p.n, p.f_star) if rho0 is None else \
        np.asarray(rho0, dtype=float).copy()
    if rho.size != mesh.ne:
        raise ConfigError(f"seed has {rho.size} values, mesh wants {mesh.ne}")

    aggs = {"objective": KSAggregator(p.ks.zeta, "objective"),
            "yield": KSAggregator(p.ks.zeta, "yield")}
    n_cons = 1 + (p.sigma_star > 0.0) + (p.e_star > 0.0)
    mma = MMA(mesh.ne, n_cons, 0.0, 1.0, move=p.move)
    f_dil_star = p.f_star
    obj_scale = None
    history = []
    log = None

    status = "max_iter"
    beta = 1.0
    try:
        for it in range(p.max_iter):
            beta = p.beta_at(it)
            for agg in aggs.values():
                agg.refresh(it)
            ev = evaluate_problem(mesh, elem, filt, p, rho, beta, aggs,
                                  f_dil_star)
            if log is None:
                log = _RunLog(out_dir, ev.cons_names)
            if obj_scale is None:
                obj_scale = 1.0 / max(abs(ev.objective), 1e-12)
            history.append((it, ev.objective, ev.ebar, ev.sigma_y,
                            ev.sigma_c, ev.f_int, beta,
                            tuple(ev.cons_vals)))
            log.row(it, ev, beta)
            if it % p.checkpoint_every == 0:
                log.checkpoint(f"{it:04d}", rho, p.n)
            if it > 0 and it % 20 == 0:
                f_dil_star = float(np.clip(
                    f_dil_star * p.f_star / max(ev.f_int, 1e-9),
                    1e-3, 0.999))

            x_new = mma.update(rho, obj_scale * ev.grad,
                               ev.cons_vals, ev.cons_grads)
            change = float(np.abs(x_new - rho).max())
            rho = x_new
            if change < p.tol_change and beta >= p.beta_max:
                status = "converged"
                break
        final = evaluate_problem(mesh, elem, filt, p, rho, beta, aggs,
                                 f_dil_star)
    except CellmatError:
        if log is not None:
            log.checkpoint("abort", rho, p.n)
            log.finish(aggs, rho, p.n)
        elif out_dir is not None:
            os.makedirs(out_dir, exist_ok=True)
            write_grid(os.path.join(out_dir, "checkpoint_abort.grid"),
                       rho, p.n)
        raise

    if log is None:
        log = _RunLog(out_dir, final.cons_names)
    log.finish(aggs, rho, p.n)
    return OptimizationResult(rho=rho, status=status,
                              iterations=len(history), history=history,
                              final=final, problem=p)
