"""Finite-difference verification of the adjoint design gradients.

Every check recomputes the full analysis chain at the perturbed points,
so the macro-strain and corrector routes are exercised together with the
explicit modulus terms, and any sign error anywhere shows up immediately.
"""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from cellmat.bloch import buckling_strength
from cellmat.design import PDEFilter, enforce_symmetry, interpolate, project
from cellmat.element import element_matrices
from cellmat.homogenize import homogenize
from cellmat.mesh import build_mesh
from cellmat.sensitivity import (
    chain_to_design,
    fd_gradient,
    grad_ebar,
    stability_grad,
    stress_grad,
)
from cellmat.stress import element_stresses, macro_strain

NU = 1.0 / 3.0


@pytest.fixture(scope="module")
def mesh4():
    return build_mesh(4)


@pytest.fixture(scope="module")
def elem4():
    return element_matrices(NU, 1.0 / 4)


@pytest.fixture(scope="module")
def rho4():
    rng = np.random.default_rng(42)
    return rng.uniform(0.3, 0.8, 16)


def analysis(mesh, elem, rho_bar):
    e_k, _ = interpolate(rho_bar, "stiffness")
    homog = homogenize(mesh, elem, e_k)
    eps0 = macro_strain(homog.cbar)
    state = element_stresses(mesh, elem, homog.chi, rho_bar, eps0)
    return homog, state


def band_sweep(mesh, elem, rho_bar, k_points, m):
    homog, state = analysis(mesh, elem, rho_bar)
    e_g, _ = interpolate(rho_bar, "geometric")
    return buckling_strength(mesh, elem, homog.moduli,
                             e_g[:, None] * state.s_unit,
                             m=m, k_points=k_points, store_modes=True)


def test_grad_ebar_fd(mesh4, elem4, rho4):
    _, de_k = interpolate(rho4, "stiffness")
    homog, _ = analysis(mesh4, elem4, rho4)
    grad = grad_ebar(homog, de_k)

    fd = fd_gradient(lambda r: analysis(mesh4, elem4, r)[0].ebar, rho4)
    assert_allclose(grad, fd, rtol=1e-6, atol=1e-10)


def test_stress_grad_fd(mesh4, elem4, rho4):
    rng = np.random.default_rng(7)
    w = rng.uniform(0.1, 1.0, mesh4.ne)
    _, de_k = interpolate(rho4, "stiffness")
    homog, state = analysis(mesh4, elem4, rho4)
    grad = stress_grad(mesh4, elem4, homog, state, w, de_k)

    def f(r):
        return float(w @ analysis(mesh4, elem4, r)[1].vm)

    assert_allclose(grad, fd_gradient(f, rho4), rtol=2e-6, atol=1e-10)


class TestStabilityGrad:
    def check(self, mesh, elem, rho_bar, k_points, m, weights, idx):
        """FD against the weighted tau sum of sample idx."""
        homog, state = analysis(mesh, elem, rho_bar)
        e_g, de_g = interpolate(rho_bar, "geometric")
        _, de_k = interpolate(rho_bar, "stiffness")
        band = band_sweep(mesh, elem, rho_bar, k_points, m)
        wlist = [np.zeros(s.tau.size) for s in band.samples]
        wlist[idx] = weights
        grad = stability_grad(mesh, elem, homog, state, band, wlist,
                              e_g, de_g, de_k)

        def f(r):
            b = band_sweep(mesh, elem, r, k_points, m)
            return float(weights @ b.samples[idx].tau)

        assert_allclose(grad, fd_gradient(f, rho_bar), rtol=5e-6, atol=1e-9)
        return band

    def test_generic_wavevector(self, mesh4, elem4, rho4):
        k_points = (np.array([[1.1, 0.7]]), np.array([0.0]))
        w = np.array([0.5, 0.3, 0.2, 0.0])
        band = self.check(mesh4, elem4, rho4, k_points, 4, w, 0)
        # simple eigenvalues, otherwise the FD tracking is meaningless
        tau = band.samples[0].tau
        assert np.all(np.diff(tau) < -1e-4)

    def test_pinned_zone_center(self, mesh4, elem4, rho4):
        k_points = (np.array([[0.0, 0.0]]), np.array([0.0]))
        w = np.array([0.6, 0.4, 0.0, 0.0])
        band = self.check(mesh4, elem4, rho4, k_points, 4, w, 2)
        assert band.samples[2].pinned
        tau = band.samples[2].tau
        assert np.all(np.diff(tau[:3]) < -1e-4)

    def test_degenerate_bands_on_symmetric_design(self, mesh4, elem4):
        rng = np.random.default_rng(3)
        rho = enforce_symmetry(rng.uniform(0.4, 0.9, 16), 4)
        k_points = (np.array([[np.pi, np.pi]]), np.array([0.0]))
        # equal weights over every retained band: any degenerate cluster
        # inside the window contributes through its invariant trace
        w = np.full(4, 0.25)
        band = self.check(mesh4, elem4, rho, k_points, 5, np.r_[w, 0.0], 0)
        tau = band.samples[0].tau
        assert tau[3] - tau[4] > 1e-4

    def test_requires_stored_modes(self, mesh4, elem4, rho4):
        homog, state = analysis(mesh4, elem4, rho4)
        e_g, de_g = interpolate(rho4, "geometric")
        _, de_k = interpolate(rho4, "stiffness")
        band = buckling_strength(mesh4, elem4, homog.moduli,
                                 e_g[:, None] * state.s_unit,
                                 m=3, k_points=(np.array([[1.0, 0.5]]),
                                                np.array([0.0])))
        with pytest.raises(ValueError, match="store_modes"):
            stability_grad(mesh4, elem4, homog, state, band,
                           [np.ones(3)], e_g, de_g, de_k)


def test_chain_to_design_fd():
    n = 8
    mesh = build_mesh(n)
    elem = element_matrices(NU, mesh.h)
    filt = PDEFilter(mesh, elem, 0.3)
    beta, eta = 2.0, 0.5
    rng = np.random.default_rng(11)
    rho = rng.uniform(0.2, 0.8, mesh.ne)
    v = np.sin(3.0 * np.arange(mesh.ne))

    def f(r):
        rb = project(filt.apply(enforce_symmetry(r, n)), beta, eta)
        return float(v @ rb)

    rho_t = filt.apply(enforce_symmetry(rho, n))
    grad = chain_to_design(v, filt, rho_t, beta, eta, n)
    assert_allclose(grad, fd_gradient(f, rho), rtol=1e-4, atol=1e-9)


def test_fd_gradient_quadratic():
    a = np.array([2.0, -1.0, 0.5])
    g = fd_gradient(lambda x: float(x @ (a * x)), np.array([1.0, 2.0, 3.0]))
    assert_allclose(g, 2.0 * a * np.array([1.0, 2.0, 3.0]), rtol=1e-8)
