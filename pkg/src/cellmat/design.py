"""Design-field parameterization: symmetry, filtering, projection, moduli.

The raw design vector rho lives on element centers.  The physical field is
produced by the fixed chain

    rho -> enforce_symmetry -> pde_filter -> project(beta, eta)

and every consumer of gradients walks the same chain backwards.  Square
symmetry is enforced by averaging the full orbit of the 8 dihedral maps,
which is an orthogonal projection, so its adjoint is itself.
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .errors import ConfigError

_D4_MAPS = (
    lambda a: a,
    lambda a: np.rot90(a, 1),
    lambda a: np.rot90(a, 2),
    lambda a: np.rot90(a, 3),
    lambda a: a.T,
    lambda a: np.flipud(a),
    lambda a: np.fliplr(a),
    lambda a: np.rot90(a, 2).T,
)


def enforce_symmetry(rho, n):
    """Average the dihedral orbit of a flat element field on an n-by-n grid."""
    a = np.asarray(rho, dtype=float)
    if a.size != n * n:
        raise ConfigError(
            f"symmetry needs a square n*n field, got {a.size} values for n={n}")
    grid = a.reshape(n, n)
    out = np.zeros_like(grid)
    for m in _D4_MAPS:
        out += m(grid)
    return (out / 8.0).ravel()


class PDEFilter:
    """Periodic Helmholtz density filter with a fixed physical radius.

    Solves (-l^2 lap + 1) rho_tilde = rho weakly on the periodic cell with
    bilinear elements, l = r / (2 sqrt(3)).  The map element->element is
    T' A^-1 T scaled by element volumes; it preserves the field mean exactly
    and is symmetric up to the uniform volume weights, which makes the
    adjoint a second application with the volume scaling on the other side.
    """

    def __init__(self, mesh, elem, radius):
        if radius <= mesh.h:
            raise ConfigError(
                f"filter radius {radius} must exceed the element size {mesh.h}")
        self.radius = radius
        self.volume_e = mesh.volume_e
        length = radius / (2.0 * np.sqrt(3.0))

        nn = mesh.nn
        conn_red = mesh.master[mesh.conn]
        rows = np.repeat(conn_red, 4, axis=1).ravel()
        cols = np.tile(conn_red, (1, 4)).ravel()
        ae = length ** 2 * elem.k_filter + elem.m_filter
        vals = np.tile(ae.ravel(), mesh.ne)
        a = sp.coo_matrix((vals, (rows, cols)), shape=(nn, nn)).tocsc()

        t_rows = conn_red.ravel()
        t_cols = np.repeat(np.arange(mesh.ne), 4)
        t_vals = np.tile(elem.t_filter, mesh.ne)
        self.t_map = sp.coo_matrix(
            (t_vals, (t_rows, t_cols)), shape=(nn, mesh.ne)).tocsc()
        self.lu = splu(a, permc_spec="COLAMD")

    def apply(self, rho):
        nodal = self.lu.solve(self.t_map @ rho)
        return (self.t_map.T @ nodal) / self.volume_e

    def adjoint(self, g):
        nodal = self.lu.solve(self.t_map @ (g / self.volume_e))
        return self.t_map.T @ nodal


def project(rho_t, beta, eta):
    """Smoothed Heaviside threshold of the filtered field."""
    _check_projection(beta, eta)
    den = np.tanh(beta * eta) + np.tanh(beta * (1.0 - eta))
    return (np.tanh(beta * eta) + np.tanh(beta * (rho_t - eta))) / den


def project_deriv(rho_t, beta, eta):
    _check_projection(beta, eta)
    den = np.tanh(beta * eta) + np.tanh(beta * (1.0 - eta))
    t = np.tanh(beta * (rho_t - eta))
    return beta * (1.0 - t * t) / den


def _check_projection(beta, eta):
    if not 0.0 < eta < 1.0:
        raise ConfigError(f"projection threshold must be in (0,1), got {eta}")
    if beta <= 0.0:
        raise ConfigError(f"projection sharpness must be positive, got {beta}")


@dataclass(frozen=True)
class InterpParams:
    """Penalization constants shared by the three modulus branches."""

    p: float = 3.0
    e0: float = 1e-5
    eps: float = 0.002
    e1: float = 1.0


def interpolate(rho_bar, branch, params=InterpParams()):
    """Modulus and its density derivative for one interpolation branch.

    'stiffness'  penalized with a floor: used by the elastic operator.
    'geometric'  penalized without a floor: scales the stress stiffness so
                 void regions shed their geometric terms entirely.
    'stress'     eps-relaxed rational form for the recovered stress.
    """
    r = np.asarray(rho_bar, dtype=float)
    p, e0, eps, e1 = params.p, params.e0, params.eps, params.e1
    if branch == "stiffness":
        e = e0 + r ** p * (e1 - e0)
        de = p * r ** (p - 1.0) * (e1 - e0)
    elif branch == "geometric":
        e = r ** p * e1
        de = p * r ** (p - 1.0) * e1
    elif branch == "stress":
        den = eps * (1.0 - r) + r
        e = r / den * e1
        de = eps / den ** 2 * e1
    else:
        raise ConfigError(f"unknown interpolation branch: {branch!r}")
    return e, de


def volume_fraction(rho_bar):
    """Mean density and its gradient on the uniform unit-cell grid."""
    r = np.asarray(rho_bar, dtype=float)
    return float(r.mean()), np.full(r.size, 1.0 / r.size)
