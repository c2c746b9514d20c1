"""Full property evaluation of a given periodic density field.

The input field is taken as the physical (filtered and projected)
density; no design chain is applied here.  Everything downstream of the
density is shared with the optimizer: interpolation, homogenization,
stress recovery and the band sweep.
"""

from dataclasses import asdict, dataclass

import numpy as np

from .bloch import buckling_strength
from .design import interpolate
from .element import element_matrices
from .errors import ConfigError
from .homogenize import homogenize
from .materials import classify_failure
from .mesh import build_mesh
from .sensitivity import grad_ebar, stability_grad, stress_grad
from .stress import element_stresses, macro_strain

NU = 1.0 / 3.0


@dataclass
class DesignReport:
    n: int
    volume_fraction: float
    ebar: float
    kappa_bar: float
    sigma_y: float
    sigma_c: float | None = None
    tau_max: float | None = None
    k_critical: tuple | None = None
    failure: str | None = None
    material: str | None = None
    e1_gpa: float | None = None
    sigma_y_mpa: float | None = None
    sigma_c_mpa: float | None = None

    def to_dict(self):
        d = asdict(self)
        if d["k_critical"] is not None:
            d["k_critical"] = list(d["k_critical"])
        return d


def area_bulk_modulus(cbar):
    """Inverse area change per unit equibiaxial stress."""
    s = cbar[0, 0] + cbar[1, 1] + cbar[0, 1] + cbar[1, 0]
    return 1.0 / s


def evaluate_design(rho_phys, n, sigma1_rel, material=None, with_bands=True,
                    n_seg=10, m_bands=6, store_modes=False):
    """Analyze a physical density field under the uniaxial unit load.

    material is an optional BaseMaterial used only for unit conversion
    and naming; sigma1_rel always sets the yield normalization.
    """
    rho_phys = np.asarray(rho_phys, dtype=float)
    if rho_phys.size != n * n:
        raise ConfigError(f"field has {rho_phys.size} values, mesh wants {n * n}")
    if not 0.0 < sigma1_rel < 1.0:
        raise ConfigError(f"sigma1_rel must be in (0,1), got {sigma1_rel}")

    mesh = build_mesh(n)
    elem = element_matrices(NU, mesh.h)
    e_k, _ = interpolate(rho_phys, "stiffness")
    homog = homogenize(mesh, elem, e_k)
    eps0 = macro_strain(homog.cbar)
    st = element_stresses(mesh, elem, homog.chi, rho_phys, eps0)
    sigma_y = sigma1_rel / st.max_vm

    report = DesignReport(
        n=n, volume_fraction=float(rho_phys.mean()),
        ebar=homog.ebar, kappa_bar=area_bulk_modulus(homog.cbar),
        sigma_y=sigma_y)
    if with_bands:
        e_g, _ = interpolate(rho_phys, "geometric")
        band = buckling_strength(mesh, elem, e_k, e_g[:, None] * st.s_unit,
                                 n_seg=n_seg, m=m_bands,
                                 store_modes=store_modes)
        report.sigma_c = band.sigma_c
        report.tau_max = band.tau_max
        kc = band.critical_k
        report.k_critical = (float(kc[0]), float(kc[1]))
        if np.isfinite(band.sigma_c):
            report.failure = classify_failure(band.sigma_c, sigma_y)
        else:
            report.failure = "yield"
    if material is not None:
        report.material = material.name
        report.e1_gpa = material.e1
        report.sigma_y_mpa = sigma_y * material.e1 * 1e3
        if report.sigma_c is not None and np.isfinite(report.sigma_c):
            report.sigma_c_mpa = report.sigma_c * material.e1 * 1e3
    return report


def _fd_partial(func, x, idx, h=1e-6):
    xp = x.copy()
    xp[idx] += h
    fp = func(xp)
    xp[idx] -= 2.0 * h
    fm = func(xp)
    return (fp - fm) / (2.0 * h)


def gradient_check(n=4, elements=8, seed=0, k=(1.1, 0.7)):
    """Adjoint gradients against central differences at random elements.

    Checks the three analysis gradients on a random smooth density:
    effective modulus, a fixed weighted sum of element stresses and a
    fixed weighted sum of inverse load factors at one generic wavevector.
    Returns a dict of max relative errors.
    """
    mesh = build_mesh(n)
    elem = element_matrices(NU, mesh.h)
    rng = np.random.default_rng(seed)
    # generic rough field keeps the checked bands simple
    rho = rng.uniform(0.35, 0.85, mesh.ne)
    w_vm = rng.uniform(0.1, 1.0, mesh.ne)
    w_tau = np.array([0.5, 0.3, 0.2, 0.0])
    idx = rng.choice(mesh.ne, size=min(elements, mesh.ne), replace=False)
    kpt = (np.asarray(k, dtype=float).reshape(1, 2), np.zeros(1))

    def analysis(r):
        e_k, de_k = interpolate(r, "stiffness")
        homog = homogenize(mesh, elem, e_k)
        eps0 = macro_strain(homog.cbar)
        st = element_stresses(mesh, elem, homog.chi, r, eps0)
        return e_k, de_k, homog, eps0, st

    def f_ebar(r):
        return analysis(r)[2].ebar

    def f_vm(r):
        return float(w_vm @ analysis(r)[4].vm)

    def f_tau(r):
        e_k, _, homog, eps0, st = analysis(r)
        e_g, _ = interpolate(r, "geometric")
        band = buckling_strength(mesh, elem, e_k, e_g[:, None] * st.s_unit,
                                 m=w_tau.size, k_points=kpt)
        return float(w_tau @ band.samples[0].tau)

    e_k, de_k, homog, eps0, st = analysis(rho)
    e_g, de_g = interpolate(rho, "geometric")
    band = buckling_strength(mesh, elem, e_k, e_g[:, None] * st.s_unit,
                             m=w_tau.size, k_points=kpt, store_modes=True)
    grads = {
        "ebar": (grad_ebar(homog, de_k), f_ebar),
        "stress": (stress_grad(mesh, elem, homog, st, w_vm, de_k), f_vm),
        "tau": (stability_grad(mesh, elem, homog, st, band, [w_tau],
                               e_g, de_g, de_k), f_tau),
    }
    out = {"n": n, "elements": int(idx.size), "seed": seed}
    for name, (g, func) in grads.items():
        worst = 0.0
        for i in idx:
            fd = _fd_partial(func, rho, int(i))
            denom = max(abs(fd), abs(g[i]), 1e-12)
            worst = max(worst, abs(g[i] - fd) / denom)
        out[f"err_{name}"] = worst
    out["pass"] = bool(out["err_ebar"] < 1e-4 and out["err_stress"] < 1e-4
                       and out["err_tau"] < 1e-3)
    return out
