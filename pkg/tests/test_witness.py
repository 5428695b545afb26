import math
from dataclasses import replace

import numpy as np
import pytest

from xree.closed_form import solve_diagonal_min, solve_phi_half
from xree.errors import DegenerateParams, SupportDeficient
from xree.witness import WitnessA, build_witness, certify, max_product_overlap
from xree.xstate import XStateParams, to_density

from conftest import HALF_PI, random_entangled

# Frozen from the certified T1 solution: B = lambda1/chi1, C = lambda2/chi2,
# D = sqrt(chi1 chi2) (B - C) / (chi1 - chi2).
T1_B = 0.990130636326472
T1_C = 0.983658580154386
T1_D = 0.012699583276554
T1_Z = 0.064720561720866


def product_overlaps(a_mat, rng, count):
    """<alpha beta|A|alpha beta> for random product states, vectorized."""
    th1, th2 = rng.uniform(0, math.pi, (2, count))
    ph1, ph2 = rng.uniform(0, 2 * math.pi, (2, count))
    alpha = np.stack([np.cos(th1 / 2), np.sin(th1 / 2) * np.exp(1j * ph1)])
    beta = np.stack([np.cos(th2 / 2), np.sin(th2 / 2) * np.exp(1j * ph2)])
    kets = np.einsum("ik,jk->kij", alpha, beta).reshape(count, 4)
    return np.einsum("ki,ij,kj->k", kets.conj(), a_mat, kets).real


class TestBuildWitness:
    def test_t1_scalars(self, t1):
        w = build_witness(to_density(t1), solve_phi_half(t1))
        assert abs(w.B - T1_B) < 1e-10
        assert abs(w.C - T1_C) < 1e-10
        assert abs(w.D - T1_D) < 1e-10
        assert abs(w.z - T1_Z) < 1e-10

    def test_t1_block_diagonal_is_one(self, t1):
        w = build_witness(to_density(t1), solve_phi_half(t1))
        assert abs(w.matrix[0, 0].real - 1.0) < 1e-9
        assert abs(w.matrix[3, 3].real - 1.0) < 1e-9

    def test_scalars_match_their_definitions(self, t1):
        sep = solve_phi_half(t1)
        w = build_witness(to_density(t1), sep)
        assert abs(w.B - t1.lambda1 / sep.chi1) < 1e-10
        assert abs(w.C - t1.lambda2 / sep.chi2) < 1e-10
        expected_d = (math.sqrt(sep.chi1 * sep.chi2) / (sep.chi1 - sep.chi2)
                      * (w.B - w.C))
        assert abs(w.D - expected_d) < 1e-10
        assert abs(w.z - (w.B - w.C) / (sep.chi1 - sep.chi2)) < 1e-10

    def test_hermitian_and_x_structured(self, t1):
        w = build_witness(to_density(t1), solve_phi_half(t1))
        assert np.abs(w.matrix - w.matrix.conj().T).max() < 1e-12
        for i in range(4):
            for j in range(4):
                if i != j and {i, j} != {0, 3}:
                    assert abs(w.matrix[i, j]) < 1e-12

    def test_identity_when_sigma_equals_rho(self):
        # separable full-support state: the witness of (rho, rho) is the identity
        p = XStateParams(0.4, 0.2, 0.25, 0.15, HALF_PI, 0.0)
        rho = to_density(p)
        from xree.closed_form import _trivial_separable

        sol = _trivial_separable(p, p)
        w = build_witness(rho, sol)
        np.testing.assert_allclose(w.matrix, np.eye(4), atol=1e-12)
        assert abs(np.trace(w.matrix @ rho).real - 1.0) < 1e-12

    def test_support_deficient_raises(self):
        bell = XStateParams(1.0, 0.0, 0.0, 0.0, HALF_PI, 0.0)
        sep = solve_diagonal_min(bell)
        with pytest.raises(SupportDeficient):
            build_witness(to_density(bell), sep)


class TestMaxProductOverlap:
    def test_t1_maximum_is_one(self, t1):
        w = build_witness(to_density(t1), solve_phi_half(t1))
        result = max_product_overlap(w)
        assert result.closed_form_applicable
        assert abs(result.closed_form - 1.0) < 1e-8
        assert abs(result.numeric - 1.0) < 1e-8

    def test_identity_like_witness(self):
        # B = C = 1, D = 0: closed-form denominator vanishes, so only the
        # numeric route applies; the maximum is 1
        mat = np.eye(4, dtype=complex)
        w = WitnessA(B=1.0, C=1.0, D=0.0, z=0.0, matrix=mat,
                     elements=mat.copy(), chi=np.full(4, 0.25))
        result = max_product_overlap(w)
        assert not result.closed_form_applicable
        assert result.closed_form is None
        assert abs(result.numeric - 1.0) < 1e-12

    def test_inflated_corner_exceeds_bound(self, t1):
        w = build_witness(to_density(t1), solve_phi_half(t1))
        mat = w.matrix.copy()
        mat[0, 3] += 0.05
        mat[3, 0] += 0.05
        tampered = replace(w, D=w.D + 0.05, matrix=mat)
        result = max_product_overlap(tampered)
        assert result.numeric > 1.0 + 1e-7
        assert result.closed_form > 1.0 + 1e-7

    def test_numeric_never_exceeds_closed_form(self):
        rng = np.random.default_rng(83)
        for _ in range(30):
            p = random_entangled(rng)
            try:
                sep = solve_phi_half(p)
            except DegenerateParams:
                continue
            w = build_witness(to_density(p), sep)
            result = max_product_overlap(w)
            if result.closed_form_applicable:
                assert result.numeric <= result.closed_form + 1e-7

    def test_argmax_attains_reported_value(self, t1):
        w = build_witness(to_density(t1), solve_phi_half(t1))
        result = max_product_overlap(w)
        th1, ph1, th2, ph2 = result.argmax
        alpha = np.array([math.cos(th1 / 2),
                          math.sin(th1 / 2) * np.exp(1j * ph1)])
        beta = np.array([math.cos(th2 / 2),
                         math.sin(th2 / 2) * np.exp(1j * ph2)])
        ket = np.kron(alpha, beta)
        val = float(np.real(ket.conj() @ w.matrix @ ket))
        assert abs(val - result.numeric) < 1e-9


class TestCertify:
    def test_t1_passes(self, t1):
        cert = certify(to_density(t1), solve_phi_half(t1))
        assert cert.passed
        assert cert.method == "witness"
        assert abs(cert.tr_a_sigma - 1.0) < 1e-9
        assert abs(cert.identity_gap) < 1e-9
        assert cert.max_overlap_numeric <= 1.0 + 1e-7

    def test_maximally_mixed_fake_candidate_fails(self, t1):
        from xree.closed_form import _pack_solution

        fake = _pack_solution(t1, (0.25, 0.25, 0.25, 0.25), HALF_PI, "fake")
        fake = replace(fake, sigma_star=np.eye(4, dtype=complex) / 4.0)
        cert = certify(to_density(t1), fake)
        assert not cert.passed

    def test_separable_trivial_candidate_passes(self):
        p = XStateParams(0.4, 0.2, 0.25, 0.15, HALF_PI, 0.0)
        from xree.closed_form import _trivial_separable

        cert = certify(to_density(p), _trivial_separable(p, p))
        assert cert.passed

    def test_bell_limit_diagonal_route(self):
        bell = XStateParams(1.0, 0.0, 0.0, 0.0, HALF_PI, 0.0)
        cert = certify(to_density(bell), solve_diagonal_min(bell))
        assert cert.passed
        assert cert.method == "diagonal_convexity"

    def test_boundary_block_route(self):
        p = XStateParams(0.6, 0.0, 0.3, 0.1, HALF_PI, 0.0)
        cert = certify(to_density(p), solve_diagonal_min(p))
        assert cert.passed
        assert cert.method == "diagonal_convexity"

    def test_directional_derivative_nonnegative(self, t1):
        # Tr A (sigma* - sigma_prod) >= 0 for random product states,
        # i.e. product overlaps never exceed Tr A sigma* = 1
        sep = solve_phi_half(t1)
        w = build_witness(to_density(t1), sep)
        rng = np.random.default_rng(89)
        overlaps = product_overlaps(w.matrix, rng, 10_000)
        assert overlaps.max() <= 1.0 + 1e-9

    def test_identity_and_unit_maximum_across_states(self):
        rng = np.random.default_rng(97)
        checked = 0
        while checked < 50:
            p = random_entangled(rng)
            try:
                sep = solve_phi_half(p)
            except DegenerateParams:
                continue
            checked += 1
            w = build_witness(to_density(p), sep)
            assert abs(w.D**2 - (w.B - 1.0) * (w.C - 1.0)) < 1e-9
            result = max_product_overlap(w)
            assert abs(result.closed_form - 1.0) < 1e-9
