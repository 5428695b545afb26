import math

import numpy as np
import pytest

from xree.errors import InvalidParams, StructureViolation
from xree.linalg import eig_x_structured, partial_transpose
from xree.xstate import (
    FilterNormalForm,
    XStateParams,
    canonicalize,
    concurrence,
    from_filter_normal_form,
    from_matrix,
    is_entangled,
    to_density,
)

from conftest import HALF_PI, random_canonical, wootters_concurrence

BELL = XStateParams(1.0, 0.0, 0.0, 0.0, HALF_PI, 0.0)


class TestToDensity:
    def test_bell_state(self):
        rho = to_density(BELL)
        psi = np.array([1.0, 0.0, 0.0, 1.0]) / math.sqrt(2.0)
        np.testing.assert_allclose(rho, np.outer(psi, psi), atol=1e-15)

    def test_phi_zero_is_diagonal(self):
        p = XStateParams(0.4, 0.1, 0.3, 0.2, 0.0, 0.0)
        np.testing.assert_allclose(to_density(p),
                                   np.diag([0.4, 0.3, 0.2, 0.1]), atol=1e-16)

    def test_t1_entries(self, t1):
        rho = to_density(t1)
        np.testing.assert_allclose(np.diag(rho).real, [0.3, 0.25, 0.15, 0.3],
                                   atol=1e-16)
        assert abs(rho[0, 3] - 0.2) < 1e-16

    def test_invalid_params_rejected(self):
        with pytest.raises(InvalidParams):
            XStateParams(0.6, 0.3, 0.2, 0.0, 0.0, 0.0)  # sums to 1.1
        with pytest.raises(InvalidParams):
            XStateParams(0.7, -0.1, 0.2, 0.2, 0.0, 0.0)


class TestFilterNormalForm:
    def test_reference_values(self):
        p = from_filter_normal_form(FilterNormalForm(1.0, 0.5, 0.3, 0.4))
        assert p.lambda1 == 0.0
        assert abs(p.lambda2 - 0.1) < 1e-15
        assert abs(p.lambda_minus - 0.4 * math.sqrt(2.0)) < 1e-15
        assert abs(p.phi - math.pi / 4.0) < 1e-15
        assert abs(p.lambda0 - (0.45 + 0.2 * math.sqrt(2.0))) < 1e-15
        assert abs(p.lambda3 - (0.45 - 0.2 * math.sqrt(2.0))) < 1e-15

    def test_round_trip_matrix(self):
        f = FilterNormalForm(1.0, 0.5, 0.3, 0.4)
        p = from_filter_normal_form(f)
        assert np.abs(to_density(p) - f.matrix()).max() < 1e-14

    def test_diagonal_case(self):
        p = from_filter_normal_form(FilterNormalForm(1.0, 0.0, 0.0, 0.0))
        assert p.phi == 0.0
        assert p.lambda2 == 0.0
        assert abs(p.lambda_minus) < 1e-15

    def test_lambda1_vanishes_for_all_valid_inputs(self):
        rng = np.random.default_rng(7)
        accepted = 0
        while accepted < 200:
            b, c = rng.uniform(-1, 1, 2)
            d = rng.uniform(-1, 1)
            try:
                p = from_filter_normal_form(FilterNormalForm(1.0, b, c, d))
            except (InvalidParams, StructureViolation):
                continue
            accepted += 1
            assert p.lambda1 == 0.0

    def test_invalid_matrix_rejected(self):
        # (a+c)(a-b) < d^2: corner block not PSD
        with pytest.raises(InvalidParams):
            from_filter_normal_form(FilterNormalForm(1.0, 0.9, -0.9, 0.9))


class TestFromMatrix:
    def test_maximally_mixed(self):
        p = from_matrix(np.eye(4, dtype=complex) / 4.0)
        assert p.phi == 0.0 and p.eta == 0.0
        np.testing.assert_allclose(p.eigenvalues(), [0.25] * 4, atol=0)

    def test_round_trip_t1(self, t1):
        q = from_matrix(to_density(t1))
        for field in ("lambda0", "lambda3", "lambda1", "lambda2", "phi", "eta"):
            assert abs(getattr(q, field) - getattr(t1, field)) < 1e-15

    def test_corner_phase_convention(self, t1):
        rho = to_density(t1)
        rho[0, 3] *= np.exp(0.7j)
        rho[3, 0] = np.conj(rho[0, 3])
        p = from_matrix(rho)
        assert abs(p.eta - (2.0 * math.pi - 0.7)) < 1e-14

    def test_structure_violation(self):
        m = np.eye(4, dtype=complex) / 4.0
        m[1, 2] = m[2, 1] = 0.05
        with pytest.raises(StructureViolation):
            from_matrix(m)

    def test_round_trip_random_canonical(self):
        rng = np.random.default_rng(19)
        for _ in range(1000):
            p = random_canonical(rng)
            q = from_matrix(to_density(p))
            for a, b in zip(
                    (p.lambda0, p.lambda3, p.lambda1, p.lambda2, p.phi, p.eta),
                    (q.lambda0, q.lambda3, q.lambda1, q.lambda2, q.phi, q.eta)):
                assert abs(a - b) < 1e-12

    def test_entrywise_round_trip_any_eta(self):
        rng = np.random.default_rng(20)
        for _ in range(300):
            p = random_canonical(rng, eta=float(rng.uniform(0, 2 * math.pi)))
            m = to_density(p)
            assert np.abs(to_density(from_matrix(m)) - m).max() < 1e-12


class TestCanonicalize:
    def test_identity_on_canonical(self, t1):
        q, transform = canonicalize(t1)
        assert q == t1
        assert transform.is_identity

    def test_phase_removal(self, t1):
        withphase = XStateParams(0.5, 0.1, 0.25, 0.15, HALF_PI, 1.1)
        q, transform = canonicalize(withphase)
        assert abs(transform.phase - 1.1) < 1e-14
        assert not transform.relabeled
        assert q.eta == 0.0
        assert abs(q.phi - t1.phi) < 1e-14
        np.testing.assert_allclose(q.eigenvalues(), t1.eigenvalues(), atol=1e-14)

    def test_block_relabeling_swaps_middles(self):
        # lambda0 < lambda3: the sigma_x (x) sigma_x relabeling restores the
        # order and swaps lambda1 with lambda2
        p = XStateParams(0.1, 0.5, 0.15, 0.25, HALF_PI, 0.0)
        q, transform = canonicalize(p)
        assert transform.relabeled
        assert abs(q.lambda0 - 0.5) < 1e-15 and abs(q.lambda3 - 0.1) < 1e-15
        assert abs(q.lambda1 - 0.25) < 1e-15
        assert abs(q.lambda2 - 0.15) < 1e-15

    def test_preserves_spectrum_and_concurrence(self):
        rng = np.random.default_rng(31)
        for _ in range(500):
            lam = rng.dirichlet(np.ones(4))
            p = XStateParams(float(lam[0]), float(lam[3]), float(lam[1]),
                             float(lam[2]), float(rng.uniform(-math.pi, math.pi)),
                             float(rng.uniform(0, 2 * math.pi)))
            q, _ = canonicalize(p)
            before = np.sort(eig_x_structured(to_density(p)).eigenvalues)
            after = np.sort(eig_x_structured(to_density(q)).eigenvalues)
            np.testing.assert_allclose(before, after, atol=1e-12)
            assert abs(concurrence(p) - concurrence(q)) < 1e-12
            assert q.is_canonical()


class TestConcurrence:
    def test_bell_is_maximal(self):
        assert abs(concurrence(BELL) - 1.0) < 1e-15

    def test_separable_threshold(self):
        p = XStateParams(0.4, 0.2, 0.2, 0.2, HALF_PI, 0.0)
        assert concurrence(p) == 0.0
        assert not is_entangled(p)

    def test_t1_value(self, t1):
        expected = 0.4 - 2.0 * math.sqrt(0.0375)
        assert abs(concurrence(t1) - expected) < 1e-15
        assert abs(expected - 0.01270166537925831) < 1e-15

    def test_matches_wootters(self):
        rng = np.random.default_rng(37)
        for _ in range(300):
            p = random_canonical(rng, eta=float(rng.uniform(0, 2 * math.pi)))
            assert abs(concurrence(p) - wootters_concurrence(to_density(p))) < 1e-10


class TestEntanglementPptEquivalence:
    def test_diagonal_states_separable(self):
        p = XStateParams(0.4, 0.1, 0.3, 0.2, 0.0, 0.0)
        assert not is_entangled(p)

    def test_t1_entangled(self, t1):
        assert is_entangled(t1)

    def test_ppt_iff_zero_concurrence(self):
        rng = np.random.default_rng(41)
        for _ in range(1000):
            p = random_canonical(rng)
            min_pt = np.linalg.eigvalsh(partial_transpose(to_density(p))).min()
            if concurrence(p) > 1e-12:
                assert min_pt < -1e-12
            if min_pt < -1e-12:
                assert concurrence(p) > 1e-12
