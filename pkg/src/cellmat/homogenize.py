"""Periodic homogenization of the unit cell in the energy form.

The three unit macro strains are applied as consistent load vectors, the
periodic corrector fields are solved for, and the effective elasticity
tensor is accumulated from per-element energy tensors

    Q_e[a, b] = integral over element e of
                (eps_a - B chi_a)' D0 (eps_b - B chi_b)

at unit modulus.  Dbar = sum_e E_e Q_e with cell area 1.  Keeping the Q_e
around pays off twice: the density gradient of Dbar is exactly E'_e Q_e
(the corrector terms are stationary), and consistency of the assembled
Dbar can be cross-checked against the global energy identity.
"""

from dataclasses import dataclass

import numpy as np

from .fem import PinnedSolver, assemble_k0, assemble_loads, gather


def unit_strain_loads(mesh, elem, moduli):
    """Consistent loads of the unit macro strains, (ndof, 3)."""
    return assemble_loads(mesh, elem, moduli)


@dataclass
class HomogResult:
    chi: np.ndarray        # (ndof, 3) periodic correctors
    dbar: np.ndarray       # (3, 3) effective elasticity
    cbar: np.ndarray       # (3, 3) effective compliance
    ebar: float            # effective Young's modulus along x
    kappa: float           # effective plane-stress bulk modulus
    q_tensors: np.ndarray  # (ne, 3, 3) unit-modulus element energy tensors
    solver: PinnedSolver   # factorized stiffness, reused by adjoint solves
    moduli: np.ndarray     # the element moduli the result was built from


def homogenize(mesh, elem, moduli):
    """Effective properties for an element modulus field (ne,)."""
    k = assemble_k0(mesh, elem, moduli)
    f = assemble_loads(mesh, elem, moduli)
    solver = PinnedSolver(k)
    chi = np.column_stack([solver.solve(f[:, a]) for a in range(3)])

    u = gather(mesh.edofs, chi)                                # (ne, 8, 3)
    cross = np.einsum("ja,ejb->eab", elem.f_unit, u)
    strain_energy = np.einsum("eja,jk,ekb->eab", u, elem.k0, u)
    q = (elem.volume * elem.d0)[None, :, :] - cross - cross.transpose(0, 2, 1) \
        + strain_energy

    dbar = np.einsum("e,eab->ab", moduli, q)
    dbar = 0.5 * (dbar + dbar.T)
    cbar = np.linalg.inv(dbar)
    ebar = 1.0 / cbar[0, 0]
    kappa = 0.5 * (dbar[0, 0] + dbar[0, 1])
    return HomogResult(chi=chi, dbar=dbar, cbar=cbar, ebar=ebar, kappa=kappa,
                       q_tensors=q, solver=solver, moduli=moduli)


def hs_bound(f, e1=1.0):
    """Upper bound on the Young's modulus of a porous cell at fraction f."""
    f = np.asarray(f, dtype=float)
    return f / (2.0 - f) * e1
