"""Sparse assembly and the periodic linear solve."""

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .errors import SolverError

RESIDUAL_TOL = 1e-9


def _scatter_pattern(edofs, ndof):
    rows = np.repeat(edofs, edofs.shape[1], axis=1).ravel()
    cols = np.tile(edofs, (1, edofs.shape[1])).ravel()
    return rows, cols, (ndof, ndof)


def assemble(edofs, ndof, ke_all):
    """Assemble per-element dense blocks ke_all (ne, 8, 8) into CSC."""
    rows, cols, shape = _scatter_pattern(edofs, ndof)
    k = sp.coo_matrix((ke_all.ravel(), (rows, cols)), shape=shape)
    return k.tocsc()

def assemble_k0(mesh, elem, moduli, reduced=True):
    """Elastic stiffness for an element modulus field (ne,)."""
    ke_all = moduli[:, None, None] * elem.k0[None, :, :]
    edofs = mesh.edofs if reduced else mesh.edofs_full
    ndof = mesh.ndof if reduced else mesh.ndof_full
    return assemble(edofs, ndof, ke_all)


def assemble_loads(mesh, elem, moduli):
    """Consistent unit-macro-strain load vectors, (ndof, 3)."""
    f = np.zeros((mesh.ndof, 3))
    fe = moduli[:, None, None] * elem.f_unit[None, :, :]
    for j in range(8):
        np.add.at(f, mesh.edofs[:, j], fe[:, j, :])
    return f


def gather(edofs, u):
    """Per-element dof values, (ne, 8) or (ne, 8, k)."""
    return u[edofs]


def scatter_vec(mesh, fe):
    """Accumulate per-element 8-vectors into a global reduced vector."""
    out = np.zeros(mesh.ndof, dtype=fe.dtype)
    for j in range(8):
        np.add.at(out, mesh.edofs[:, j], fe[:, j])
    return out


class PinnedSolver:
    """LU-factorized periodic stiffness with the two dofs of reduced node 0
    pinned to remove the translation null space.

    Pinning is exact for every right-hand side that is orthogonal to the
    translations (all loads here are: they are internal-force resultants of
    periodic strain states), because the reaction at the pinned dofs then
    vanishes identically.
    """

    def __init__(self, k_reduced, pins=(0, 1)):
        mask = np.ones(k_reduced.shape[0], dtype=bool)
        mask[list(pins)] = False
        d = sp.diags(mask.astype(float)).tocsc()
        self.pins = tuple(pins)
        self.k_pinned = (d @ k_reduced @ d + sp.diags((~mask).astype(float))).tocsc()
        try:
            self.lu = splu(self.k_pinned, permc_spec="COLAMD")
        except RuntimeError as err:
            raise SolverError(f"stiffness factorization failed: {err}") from err

    def solve(self, f):
        b = np.array(f, dtype=float, copy=True)
        b[list(self.pins)] = 0.0
        u = self.lu.solve(b)
        r = self.k_pinned @ u - b
        scale = max(np.linalg.norm(b), 1.0)
        if np.linalg.norm(r) > RESIDUAL_TOL * scale:
            raise SolverError(
                f"periodic solve residual {np.linalg.norm(r) / scale:.3e} "
                f"exceeds {RESIDUAL_TOL:.1e}")
        return u


def solve_periodic(k_reduced, f):
    """One-shot periodic solve of k u = f with translation pinning.

    f may be (ndof,) or (ndof, m).  Residual contract: |r| <= 1e-9 |f|.
    """
    solver = PinnedSolver(k_reduced)
    if f.ndim == 1:
        return solver.solve(f)
    return np.column_stack([solver.solve(f[:, j]) for j in range(f.shape[1])])
