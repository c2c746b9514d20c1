"""Bloch-Floquet buckling analysis of the compressed cell.

Cell-periodic operators are built once on the full (unreduced) node set;
for each wavevector k a phase-carrying reduction T(k) folds the boundary
dofs onto their masters, giving the Hermitian pencil

    -K_sigma(k) phi = tau K0(k) phi,    K(k) = T(k)^H K_full T(k).

tau is the inverse load factor, so the largest tau over all sampled k and
bands gives the critical load sigma_c = 1 / max tau.  K0(k) is positive
definite for every k except the zone center, where the two rigid
translations survive.  Both K0 and K_sigma annihilate translations, so at
k = 0 pinning one node's dofs is exact: every eigenpair of the pinned
pencil extends to the full one and vice versa.  The zone center is still
sampled with two small k offsets as well, which pick up the long-wavelength
(macroscopic) branches that the strictly periodic problem cannot see.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
from scipy.sparse.linalg import ArpackNoConvergence, eigsh

from .errors import AnalysisError, ConfigError
from .fem import assemble

K_ZERO_OFFSET = 1e-4
DENSE_CUTOFF = 800
# inverse load factors below this are numerically zero: no instability
TAU_TINY = 1e-9


def stress_stiffness(mesh, elem, stress_weights, reduced=False):
    """Geometric stiffness of the weighted element stress field.

    stress_weights (ne, 3) carries the relaxed geometric modulus already
    multiplied into the unit center stresses.
    """
    ke = np.einsum("ec,cij->eij", stress_weights, elem.g_stress)
    edofs = mesh.edofs if reduced else mesh.edofs_full
    ndof = mesh.ndof if reduced else mesh.ndof_full
    return assemble(edofs, ndof, ke)


def bloch_transform(mesh, k):
    """Sparse T(k) mapping reduced periodic dofs to the full node set."""
    k = np.asarray(k, dtype=float)
    if k.shape != (2,):
        raise ConfigError(f"wavevector must have two components, got {k!r}")
    if np.any(np.abs(k) > np.pi + 1e-12):
        raise ConfigError(f"wavevector {k} outside the first zone [-pi, pi]^2")
    n = mesh.n
    idx = np.arange(mesh.nn_full)
    wrap_x = (idx % (n + 1) == n).astype(float)
    wrap_y = (idx // (n + 1) == n).astype(float)
    phase = np.exp(1j * (k[0] * wrap_x + k[1] * wrap_y))
    rows = np.arange(mesh.ndof_full)
    cols = np.empty(mesh.ndof_full, dtype=np.int64)
    cols[0::2] = 2 * mesh.master
    cols[1::2] = 2 * mesh.master + 1
    vals = np.repeat(phase, 2)
    return sp.coo_matrix((vals, (rows, cols)),
                         shape=(mesh.ndof_full, mesh.ndof)).tocsc()


def fold(k_full, t):
    """T^H K T, Hermitized against roundoff."""
    a = t.conj().T @ (k_full @ t)
    return 0.5 * (a + a.conj().T)


def _pin(a, value):
    """Zero the first node's rows/columns, placing value on the diagonal."""
    a = a.tolil(copy=True)
    a[:2, :] = 0.0
    a[:, :2] = 0.0
    a[0, 0] = value
    a[1, 1] = value
    return a.tocsc()


def _ritz_top(a, b, m, steps=40):
    """Rayleigh-Ritz estimate of the largest pencil eigenvalues.

    Builds a B-orthonormal Krylov basis of B^-1 A and projects.  Ritz
    values never overshoot, so the top one is a certified lower bound on
    tau_max: large means the sample really is destabilized, tiny means the
    spectrum top sits at the stable zero cluster.
    """
    from scipy.sparse.linalg import splu

    ndof = a.shape[0]
    lu = splu(b.tocsc())
    rng = np.random.default_rng(1283)
    q = rng.standard_normal(ndof) + 1j * rng.standard_normal(ndof)
    basis = []
    for _ in range(min(steps, ndof)):
        for col in basis:
            q = q - col * (col.conj() @ (b @ q))
        nrm = np.sqrt(abs(q.conj() @ (b @ q)))
        if not np.isfinite(nrm) or nrm < 1e-10:
            break
        q = q / nrm
        basis.append(q)
        q = lu.solve(a @ q)
    qmat = np.column_stack(basis)
    h = qmat.conj().T @ (a @ qmat)
    h = 0.5 * (h + h.conj().T)
    w, s = sla.eigh(h)
    take = min(m, w.size)
    order = np.argsort(w)[::-1][:take]
    return w[order], qmat @ s[:, order]


def solve_band(k0k, ksk, m, dense_cutoff=DENSE_CUTOFF, tol=1e-9):
    """Largest m eigenvalues of -K_sigma(k) phi = tau K0(k) phi.

    Returns (tau, phi) with tau sorted descending and the columns of phi
    normalized to phi^H K0 phi = 1.  The iterative path solves the pencil
    shifted by +1 * K0, which moves the (often hugely degenerate) zero
    eigenvalues of the geometric operator away from the origin where the
    relative convergence test cannot terminate; the shift is subtracted
    again and changes nothing else.

    tol is the ARPACK residual tolerance.  Near the zone center K0(k) is
    almost singular and roundoff in its condition number sets a floor on
    reachable residuals, so those samples must be solved with a loosened
    tolerance; eigenvalues remain far more accurate than the residual.

    A sample with nothing destabilized has no gap at the top (modes pile
    up under the zero cluster) and no Lanczos tolerance can converge
    there.  When ARPACK separates nothing, a bounded Rayleigh-Ritz sweep
    settles the question: its top value is a lower bound on tau_max, so a
    tiny bound certifies the sample as stable and the Ritz pairs stand in
    for the (weightless) modes; a large bound is a genuine solver failure.
    """
    ndof = k0k.shape[0]
    m_eff = int(min(m, ndof - 2))
    if m_eff < 1:
        raise ConfigError(f"cannot extract {m} bands from {ndof} dofs")
    a = -ksk
    if ndof <= dense_cutoff:
        w, v = sla.eigh(a.toarray(), k0k.toarray())
        tau = w[::-1][:m_eff]
        phi = v[:, ::-1][:, :m_eff]
        return tau, phi
    shift = 1.0
    a_sh = (a + shift * k0k).tocsc()
    b = k0k.tocsc()
    v0 = np.full(ndof, 1.0 / np.sqrt(ndof), dtype=complex)
    try:
        w, v = eigsh(a_sh, k=m_eff, M=b, which="LA", v0=v0,
                     tol=tol, maxiter=150)
    except ArpackNoConvergence as err:
        # partial results keep the solver's complex dtype; the pencil is
        # Hermitian definite, so drop the roundoff imaginary part
        w, v = err.eigenvalues.real, err.eigenvectors
        if w.size == 0:
            tau_r, phi_r = _ritz_top(a.tocsc(), b, m_eff)
            if tau_r[0] > 1e-6:
                raise AnalysisError(
                    "eigensolver failed to converge on a destabilized "
                    f"sample (tau_max >= {tau_r[0]:.3e})") from err
            warnings.warn(
                "no band separated from the stable cluster; sample treated "
                "as non-destabilizing", RuntimeWarning, stacklevel=2)
            return tau_r, phi_r
        warnings.warn(f"eigensolver converged only {w.size} of {m_eff} bands",
                      RuntimeWarning, stacklevel=2)
    order = np.argsort(w)[::-1]
    return w[order] - shift, v[:, order]


def ibz_path(n_seg=10):
    """Closed rectangle path around the quarter zone, 4*n_seg samples.

    Vertices (0,0) -> (pi,0) -> (pi,pi) -> (0,pi) -> back, each edge split
    into n_seg segments; the closing vertex is not repeated.
    """
    if n_seg < 2:
        raise ConfigError(f"need at least 2 segments per edge, got {n_seg}")
    corners = np.array([[0.0, 0.0], [np.pi, 0.0], [np.pi, np.pi],
                        [0.0, np.pi], [0.0, 0.0]])
    pts = []
    arc = []
    s = 0.0
    for a, b in zip(corners[:-1], corners[1:]):
        edge = np.linalg.norm(b - a)
        for j in range(n_seg):
            t = j / n_seg
            pts.append(a + t * (b - a))
            arc.append(s + t * edge)
        s += edge
    return np.array(pts), np.array(arc)


@dataclass
class BandSample:
    k: np.ndarray
    arclength: float
    pinned: bool
    tau: np.ndarray
    modes: np.ndarray | None = field(default=None, repr=False)
    transform: sp.spmatrix | None = field(default=None, repr=False)


@dataclass
class BucklingResult:
    samples: list
    tau_max: float
    sigma_c: float            # inf when nothing destabilizes
    critical_sample: int
    critical_band: int
    buckled: bool

    @property
    def critical_k(self):
        return self.samples[self.critical_sample].k


def _zone_center_variants(k, arc):
    eps = K_ZERO_OFFSET
    return [
        (np.array([eps, 0.0]), arc, False),
        (np.array([0.0, eps]), arc, False),
        (np.array([0.0, 0.0]), arc, True),
    ]


def buckling_strength(mesh, elem, moduli_k, stress_weights, n_seg=10, m=6,
                      dense_cutoff=DENSE_CUTOFF, store_modes=False,
                      k_points=None):
    """Band sweep along the quarter-zone boundary and the critical load.

    moduli_k scales the elastic operator, stress_weights the geometric one.
    The zone center is replaced by two offset samples plus the exactly
    pinned periodic problem; the reported critical load is the worst case
    over everything sampled.  k_points overrides the path when given as
    (pts, arclength).
    """
    from .fem import assemble_k0

    k0_full = assemble_k0(mesh, elem, moduli_k, reduced=False)
    ks_full = stress_stiffness(mesh, elem, stress_weights, reduced=False)

    if k_points is None:
        pts, arc = ibz_path(n_seg)
    else:
        pts, arc = k_points
    jobs = []
    for kvec, a in zip(pts, arc):
        if np.allclose(kvec, 0.0, atol=1e-14):
            jobs.extend(_zone_center_variants(kvec, a))
        else:
            jobs.append((np.asarray(kvec, dtype=float), a, False))

    samples = []
    for kvec, a, pinned in jobs:
        t = bloch_transform(mesh, kvec)
        k0k = fold(k0_full, t)
        ksk = fold(ks_full, t)
        if pinned:
            k0k = _pin(k0k, 1.0)
            ksk = _pin(ksk, 0.0)
        # just off the zone center K0 is nearly singular and its condition
        # number caps the reachable residual, so ask only for what roundoff
        # permits there
        loose = not pinned and np.linalg.norm(kvec) < 10.0 * K_ZERO_OFFSET
        tau, phi = solve_band(k0k, ksk, m, dense_cutoff,
                              tol=1e-5 if loose else 1e-9)
        samples.append(BandSample(
            k=kvec, arclength=a, pinned=pinned, tau=tau,
            modes=phi if store_modes else None,
            transform=t if store_modes else None))

    tau_max = -np.inf
    crit = (0, 0)
    for i, smp in enumerate(samples):
        j = int(np.argmax(smp.tau))
        if smp.tau[j] > tau_max:
            tau_max = float(smp.tau[j])
            crit = (i, j)
    buckled = tau_max > TAU_TINY
    sigma_c = 1.0 / tau_max if buckled else np.inf
    return BucklingResult(samples=samples, tau_max=tau_max, sigma_c=sigma_c,
                          critical_sample=crit[0], critical_band=crit[1],
                          buckled=buckled)
