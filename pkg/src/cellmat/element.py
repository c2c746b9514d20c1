"""Plane-stress rectangle element with condensed incompatible bending modes.

A 4-node bilinear quadrilateral is enriched with two internal modes per
displacement component, (1 - xi^2) and (1 - eta^2), which remove the
parasitic shear that makes plain bilinear elements lock in bending.  The
internal amplitudes never couple between elements, so they are condensed
out at element level and every exported operator acts on the 8 corner
dofs only.

All elements of a uniform grid are congruent rectangles, so the bundle of
matrices below is computed once per mesh.  Everything is evaluated at
unit elastic modulus; density interpolation scales the matrices at
assembly time.  On an undistorted rectangle the 2x2 Gauss rule integrates
every stiffness integrand exactly, and the enrichment integrates to zero
over the element, which keeps consistent load vectors identical to their
bilinear counterparts.

Node and dof ordering: corners BL, BR, TR, TL counter-clockwise, dofs
interleaved [u1, v1, ..., u4, v4].  Internal dofs [a1u, a2u, a1v, a2v].
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError

# parent coordinates of the corners, order BL, BR, TR, TL
XI = np.array([-1.0, 1.0, 1.0, -1.0])
ETA = np.array([-1.0, -1.0, 1.0, 1.0])

GAUSS_1D = (-1.0 / np.sqrt(3.0), 1.0 / np.sqrt(3.0))


def elastic_matrix(nu):
    """Plane-stress constitutive matrix at unit Young's modulus."""
    if not 0.0 <= nu < 0.5:
        raise ConfigError(f"invalid material: need 0 <= nu < 0.5, got nu={nu}")
    c = 1.0 / (1.0 - nu * nu)
    return c * np.array([
        [1.0, nu, 0.0],
        [nu, 1.0, 0.0],
        [0.0, 0.0, (1.0 - nu) / 2.0],
    ])


def shape_functions(xi, eta):
    return 0.25 * (1.0 + XI * xi) * (1.0 + ETA * eta)


def shape_gradients(xi, eta, ax, ay):
    """Physical gradients (dN/dx, dN/dy) on a rectangle with half-sides ax, ay."""
    dn_dxi = 0.25 * XI * (1.0 + ETA * eta)
    dn_deta = 0.25 * ETA * (1.0 + XI * xi)
    return dn_dxi / ax, dn_deta / ay


def b_compatible(xi, eta, ax, ay):
    """Strain-displacement matrix of the bilinear part, 3x8."""
    nx, ny = shape_gradients(xi, eta, ax, ay)
    b = np.zeros((3, 8))
    b[0, 0::2] = nx
    b[1, 1::2] = ny
    b[2, 0::2] = ny
    b[2, 1::2] = nx
    return b


def b_incompatible(xi, eta, ax, ay):
    """Strain contribution of the internal modes, 3x4.

    Columns follow [a1u, a2u, a1v, a2v] with mode shapes
    u += a1u (1-xi^2) + a2u (1-eta^2) and likewise for v.
    """
    b = np.zeros((3, 4))
    b[0, 0] = -2.0 * xi / ax
    b[1, 3] = -2.0 * eta / ay
    b[2, 1] = -2.0 * eta / ay
    b[2, 2] = -2.0 * xi / ax
    return b


@dataclass
class ElementOps:
    """Per-element operator bundle at unit modulus.

    k0        condensed 8x8 stiffness
    f_unit    8x3 consistent loads of the three unit macro strains
    b_center  3x8 strain-displacement at the element center (enrichment
              vanishes there, so this is also the condensed operator)
    d0        3x3 unit-modulus constitutive matrix
    g_stress  (3, 8, 8) geometric stiffness factors per stress component
    a_cond    4x8 recovery map from corner dofs to internal amplitudes
    volume    element area
    m_filter, k_filter, t_filter   scalar bilinear mass/Laplace matrices
              and nodal integrals used by the density filter
    """

    nu: float
    ax: float
    ay: float
    k0: np.ndarray
    f_unit: np.ndarray
    b_center: np.ndarray
    d0: np.ndarray
    g_stress: np.ndarray
    a_cond: np.ndarray
    volume: float
    m_filter: np.ndarray = field(repr=False, default=None)
    k_filter: np.ndarray = field(repr=False, default=None)
    t_filter: np.ndarray = field(repr=False, default=None)


def element_matrices(nu, hx, hy=None):
    """Build the operator bundle for a hx-by-hy rectangle.

    hx, hy are full side lengths.  Raises ConfigError for an invalid
    Poisson ratio or non-positive size.
    """
    if hy is None:
        hy = hx
    if hx <= 0.0 or hy <= 0.0:
        raise ConfigError(f"invalid mesh: element size must be positive, got {hx}x{hy}")
    d0 = elastic_matrix(nu)
    ax, ay = 0.5 * hx, 0.5 * hy
    detj = ax * ay
    volume = hx * hy

    k_dd = np.zeros((8, 8))
    k_da = np.zeros((8, 4))
    k_aa = np.zeros((4, 4))
    h_xx = np.zeros((4, 4))
    h_yy = np.zeros((4, 4))
    h_xy = np.zeros((4, 4))
    m_f = np.zeros((4, 4))
    k_f = np.zeros((4, 4))
    for xi in GAUSS_1D:
        for eta in GAUSS_1D:
            bc = b_compatible(xi, eta, ax, ay)
            bi = b_incompatible(xi, eta, ax, ay)
            k_dd += detj * bc.T @ d0 @ bc
            k_da += detj * bc.T @ d0 @ bi
            k_aa += detj * bi.T @ d0 @ bi
            nx, ny = shape_gradients(xi, eta, ax, ay)
            h_xx += detj * np.outer(nx, nx)
            h_yy += detj * np.outer(ny, ny)
            h_xy += detj * (np.outer(nx, ny) + np.outer(ny, nx))
            n = shape_functions(xi, eta)
            m_f += detj * np.outer(n, n)
            k_f += detj * (np.outer(nx, nx) + np.outer(ny, ny))

    # static condensation of the internal amplitudes
    a_cond = -np.linalg.solve(k_aa, k_da.T)
    k0 = k_dd + k_da @ a_cond
    k0 = 0.5 * (k0 + k0.T)

    # the enrichment integrates to zero, so unit-strain loads reduce to the
    # midpoint rule on the bilinear part (exact here: b is linear in xi, eta)
    b_center = b_compatible(0.0, 0.0, ax, ay)
    f_unit = volume * b_center.T @ d0

    # geometric stiffness factors: per stress component sigma_c the 8x8
    # block couples same-direction dofs through the gradient products
    g_stress = np.zeros((3, 8, 8))
    for c, h in enumerate((h_xx, h_yy, h_xy)):
        for d in range(2):
            g_stress[c, d::2, d::2] = h

    return ElementOps(
        nu=nu, ax=ax, ay=ay, k0=k0, f_unit=f_unit, b_center=b_center, d0=d0,
        g_stress=g_stress, a_cond=a_cond, volume=volume,
        m_filter=m_f, k_filter=k_f, t_filter=np.full(4, volume / 4.0),
    )
