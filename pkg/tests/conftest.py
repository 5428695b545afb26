"""Shared helpers: random state generation and independent reference oracles."""

import math

import numpy as np
import pytest

from xree.xstate import XStateParams

HALF_PI = 0.5 * math.pi


def random_canonical(rng, phi=None, eta=0.0):
    """Random valid parameters with lambda0 >= lambda3, phi in [0, pi]."""
    lam = rng.dirichlet(np.ones(4))
    l0, l3 = max(lam[0], lam[3]), min(lam[0], lam[3])
    if phi is None:
        phi = rng.uniform(0.0, math.pi)
    return XStateParams(l0, l3, float(lam[1]), float(lam[2]), float(phi), eta)


def random_entangled(rng, phi=HALF_PI, min_concurrence=0.01):
    """Rejection-sample an entangled canonical state at the given phi."""
    while True:
        p = random_canonical(rng, phi=phi)
        c = p.lambda_minus * math.sin(phi) - 2.0 * math.sqrt(p.lambda1 * p.lambda2)
        if c > min_concurrence:
            return p


def random_separable(rng, phi=None):
    while True:
        p = random_canonical(rng, phi=phi)
        if p.lambda_minus * abs(math.sin(p.phi)) - \
                2.0 * math.sqrt(p.lambda1 * p.lambda2) <= 0.0:
            return p


def random_density(rng, rank=4):
    """Haar-ish random density matrix (for generic linalg property tests)."""
    g = rng.normal(size=(4, rank)) + 1j * rng.normal(size=(4, rank))
    m = g @ g.conj().T
    return m / np.trace(m).real


def wootters_concurrence(rho):
    """Spin-flip concurrence, the standard definition (test-side reference)."""
    sy = np.array([[0.0, -1.0j], [1.0j, 0.0]])
    yy = np.kron(sy, sy)
    rho_tilde = yy @ rho.conj() @ yy
    evals = np.linalg.eigvals(rho @ rho_tilde)
    roots = np.sqrt(np.abs(np.real(evals)))
    roots.sort()
    return max(0.0, roots[3] - roots[2] - roots[1] - roots[0])


def diagonal_slice_min(lam, tol=1e-14):
    """Independent 1-D reference for the phi = pi/2 diagonal problem.

    Minimizes sum l_i log(l_i / chi_i) on the border using the slice
    chi1 - chi2 = lambda1 - lambda2, by golden section over chi2.
    """
    l0, l1, l2, l3 = lam
    delta = l1 - l2

    def value(t):
        chi2, chi1 = t, t + delta
        if min(chi1, chi2) < 0.0:
            return math.inf
        v = 2.0 * math.sqrt(max(chi1 * chi2, 0.0))
        s = 1.0 - chi1 - chi2
        chi0, chi3 = 0.5 * (s + v), 0.5 * (s - v)
        if chi0 < 0.0 or chi3 < -1e-15:
            return math.inf
        total = 0.0
        for weight, chi in zip((l0, l1, l2, l3), (chi0, chi1, chi2, chi3)):
            if weight > 1e-15:
                if chi <= 0.0:
                    return math.inf
                total += weight * math.log(weight / chi)
        return total

    golden = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = max(0.0, -delta), 0.5 * (1.0 - delta)  # chi1 + chi2 <= 1
    c = b - golden * (b - a)
    d = a + golden * (b - a)
    fc, fd = value(c), value(d)
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - golden * (b - a)
            fc = value(c)
        else:
            a, c, fc = c, d, fd
            d = a + golden * (b - a)
            fd = value(d)
    return min(fc, fd)


@pytest.fixture
def t1():
    """The regression anchor state."""
    return XStateParams(0.5, 0.1, 0.25, 0.15, HALF_PI, 0.0)
