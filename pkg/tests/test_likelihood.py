"""Likelihood kernels: frozen values, derivative checks, model identities."""

import math

import numpy as np
import pytest
from conftest import (draw_outcomes, fd_grad, fd_jacobian, random_asym_design,
                      random_sym_design)

from dyadlink.dyaddata import design_from_matrices
from dyadlink.likelihood import (j1_matrix, j2_matrix, ntu_general_loglik,
                                 ntu_rho0_loglik, tu_loglik)
from dyadlink.specfun import norm_cdf, norm_pdf

PHI0 = 0.3989422804014327  # standard normal density at 0


def single_dyad(w_ij, w_ji):
    return design_from_matrices(2, np.atleast_2d(np.asarray(w_ij, dtype=float)),
                                np.atleast_2d(np.asarray(w_ji, dtype=float)))


class TestTuLoglik:
    def test_single_dyad_probit(self):
        d = single_dyad([1.0], [1.0])
        assert tu_loglik(d, np.array([1.0]), [0.0], "probit").value == \
            pytest.approx(math.log(0.5), abs=1e-15)

    def test_single_dyad_logit(self):
        d = single_dyad([1.0], [1.0])
        assert tu_loglik(d, np.array([1.0]), [0.0], "logit").value == \
            pytest.approx(math.log(0.5), abs=1e-15)

    def test_three_node_brute_force(self):
        rng = np.random.default_rng(0)
        d = random_sym_design(rng, n=3, k=2)
        y = np.array([1.0, 0.0, 1.0])
        beta = np.array([0.4, -0.9])
        expected = 0.0
        for row, yd in zip(d.w_ij, y):
            p = norm_cdf(float(row @ beta))
            expected += math.log(p) if yd else math.log(1.0 - p)
        expected /= 3.0
        assert tu_loglik(d, y, beta, "probit").value == pytest.approx(expected, rel=1e-13)

    def test_rejects_asymmetric_design(self):
        rng = np.random.default_rng(1)
        d = random_asym_design(rng)
        with pytest.raises(ValueError, match="symmetric regressors"):
            tu_loglik(d, np.zeros(d.n_dyads), np.zeros(d.k), "probit")

    def test_rejects_bad_link_and_dim(self):
        d = single_dyad([1.0], [1.0])
        with pytest.raises(ValueError, match="link"):
            tu_loglik(d, np.array([1.0]), [0.0], "cauchy")
        with pytest.raises(ValueError, match="length"):
            tu_loglik(d, np.array([1.0]), [0.0, 1.0], "probit")

    def test_probit_hessian_negative_semidefinite(self):
        rng = np.random.default_rng(2)
        for _ in range(50):
            d = random_sym_design(rng)
            y = rng.integers(0, 2, d.n_dyads).astype(float)
            ev = tu_loglik(d, y, rng.normal(size=d.k), "probit")
            assert np.max(np.linalg.eigvalsh(ev.hessian)) <= 1e-10


class TestNtuRho0Loglik:
    def test_single_symmetric_dyad_value(self):
        d = single_dyad([1.0], [1.0])
        assert ntu_rho0_loglik(d, np.array([1.0]), [0.0]).value == \
            pytest.approx(math.log(0.25), abs=1e-15)

    def test_single_dyad_score_at_zero(self):
        d = single_dyad([1.0], [1.0])
        ev = ntu_rho0_loglik(d, np.array([1.0]), [0.0])
        assert ev.score[0] == pytest.approx(4.0 * PHI0, rel=1e-12)

    def test_asymmetric_dyad_y0_value(self):
        d = single_dyad([1.0], [-1.0])
        expected = math.log(1.0 - norm_cdf(0.5) * norm_cdf(-0.5))
        assert ntu_rho0_loglik(d, np.array([0.0]), [0.5]).value == \
            pytest.approx(expected, rel=1e-14)

    def test_value_is_mean_of_per_dyad_logs(self):
        rng = np.random.default_rng(3)
        d = random_asym_design(rng)
        y = rng.integers(0, 2, d.n_dyads).astype(float)
        ev = ntu_rho0_loglik(d, y, rng.normal(size=d.k), per_dyad=True)
        assert ev.value == pytest.approx(float(np.mean(ev.per_dyad_logs)), rel=1e-14)

    def test_deep_tail_stays_finite(self):
        d = single_dyad([1.0], [1.0])
        for beta in (-35.0, 35.0):
            ev = ntu_rho0_loglik(d, np.array([1.0]), [beta])
            assert np.isfinite(ev.value)
            ev = ntu_rho0_loglik(d, np.array([0.0]), [-35.0])
            assert np.isfinite(ev.value)

    def test_separation_sentinel(self):
        d = design_from_matrices(3, np.array([[1.0], [1.0], [1.0]]),
                                 np.array([[1.0], [1.0], [1.0]]))
        ev = ntu_rho0_loglik(d, np.array([0.0, 1.0, 1.0]), [45.0])
        assert ev.value == -np.inf
        assert ev.separated and ev.separation_index == 0

    def test_swap_invariance(self):
        rng = np.random.default_rng(4)
        for _ in range(20):
            d = random_asym_design(rng)
            y = rng.integers(0, 2, d.n_dyads).astype(float)
            beta = rng.normal(size=d.k)
            base = ntu_rho0_loglik(d, y, beta).value
            swap = rng.integers(0, 2, d.n_dyads).astype(bool)
            w1, w2 = d.w_ij.copy(), d.w_ji.copy()
            w1[swap], w2[swap] = d.w_ji[swap], d.w_ij[swap]
            swapped = design_from_matrices(d.n, w1, w2)
            assert ntu_rho0_loglik(swapped, y, beta).value == base

    def test_concavity_on_symmetric_designs(self):
        # 1000 random (design, beta) draws, all Hessians negative semidefinite
        rng = np.random.default_rng(5)
        for _ in range(1000):
            d = random_sym_design(rng, n=int(rng.integers(3, 6)))
            y = rng.integers(0, 2, d.n_dyads).astype(float)
            beta = 2.0 * rng.normal(size=d.k)
            ev = ntu_rho0_loglik(d, y, beta)
            assert np.max(np.linalg.eigvalsh(ev.hessian)) <= 1e-10


class TestNtuGeneralLoglik:
    def test_matches_rho0_exactly(self):
        rng = np.random.default_rng(6)
        for _ in range(20):
            d = random_asym_design(rng)
            y = rng.integers(0, 2, d.n_dyads).astype(float)
            beta = rng.normal(size=d.k)
            a = ntu_general_loglik(d, y, beta, 0.0).value
            b = ntu_rho0_loglik(d, y, beta).value
            assert a == pytest.approx(b, abs=1e-12)

    def test_matches_tu_probit_at_rho_one(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            d = random_sym_design(rng)
            y = rng.integers(0, 2, d.n_dyads).astype(float)
            beta = rng.normal(size=d.k)
            a = ntu_general_loglik(d, y, beta, 1.0).value
            b = tu_loglik(d, y, beta, "probit").value
            assert a == pytest.approx(b, abs=1e-12)

    def test_arcsine_single_dyad(self):
        d = single_dyad([1.0], [1.0])
        assert ntu_general_loglik(d, np.array([1.0]), [0.0], 0.5).value == \
            pytest.approx(math.log(1.0 / 3.0), abs=1e-13)

    def test_boundary_negative_one_closed_form(self):
        d = single_dyad([1.0], [0.5])
        beta = [1.2]
        p = max(0.0, norm_cdf(1.2) + norm_cdf(0.6) - 1.0)
        ev = ntu_general_loglik(d, np.array([1.0]), beta, -1.0)
        assert ev.value == pytest.approx(math.log(p), rel=1e-13)
        assert ev.score.shape == (1,)  # beta only at the boundary

    def test_boundary_impossible_outcome_flags_separation(self):
        d = single_dyad([1.0], [1.0])
        ev = ntu_general_loglik(d, np.array([1.0]), [-1.0], -1.0)
        assert ev.value == -np.inf and ev.separated

    def test_rho_domain_error(self):
        d = single_dyad([1.0], [1.0])
        with pytest.raises(ValueError, match=r"\[-1, 1\]"):
            ntu_general_loglik(d, np.array([1.0]), [0.0], 1.2)

    def test_swap_invariance(self):
        rng = np.random.default_rng(8)
        d = random_asym_design(rng, n=5, k=2)
        y = rng.integers(0, 2, d.n_dyads).astype(float)
        beta = rng.normal(size=2)
        base = ntu_general_loglik(d, y, beta, 0.37).value
        w1, w2 = d.w_ji.copy(), d.w_ij.copy()
        swapped = design_from_matrices(d.n, w1, w2)
        assert ntu_general_loglik(swapped, y, beta, 0.37).value == base


class TestDerivatives:
    """Analytic scores and Hessians against central finite differences."""

    def test_scores_all_families_100_instances(self):
        # outcomes are drawn from the model at the evaluation point: the
        # comparison is then well-conditioned (a coin-flip y against a
        # near-degenerate probability makes the FD reference itself diverge)
        rng = np.random.default_rng(9)
        checked = 0
        while checked < 100:
            sym = bool(rng.integers(0, 2))
            d = random_sym_design(rng) if sym else random_asym_design(rng)
            beta = rng.normal(size=d.k)
            rho = float(rng.uniform(-0.9, 0.9))
            y = draw_outcomes(rng, d, beta, rho)
            evals = []
            if sym:
                for link in ("probit", "logit"):
                    ev = tu_loglik(d, y, beta, link)
                    g = fd_grad(lambda b: tu_loglik(d, y, b, link).value, beta)
                    evals.append((ev.score, g))
            ev = ntu_rho0_loglik(d, y, beta)
            g = fd_grad(lambda b: ntu_rho0_loglik(d, y, b).value, beta)
            evals.append((ev.score, g))
            theta = np.append(beta, rho)
            ev = ntu_general_loglik(d, y, beta, rho)
            g = fd_grad(lambda t: ntu_general_loglik(d, y, t[:-1], t[-1]).value, theta)
            evals.append((ev.score, g))
            for analytic, numeric in evals:
                err = np.max(np.abs(analytic - numeric)) / max(1.0, np.max(np.abs(numeric)))
                assert err < 1e-6
            checked += 1

    def test_hessians_match_fd_of_score(self):
        rng = np.random.default_rng(10)
        for _ in range(30):
            sym = bool(rng.integers(0, 2))
            d = random_sym_design(rng) if sym else random_asym_design(rng)
            beta = rng.normal(size=d.k)
            rho = float(rng.uniform(-0.85, 0.85))
            y = draw_outcomes(rng, d, beta, rho)

            def err(analytic, numeric):
                return np.max(np.abs(analytic - numeric)) / max(1.0, np.max(np.abs(numeric)))

            ev = ntu_rho0_loglik(d, y, beta)
            jac = fd_jacobian(lambda b: ntu_rho0_loglik(d, y, b).score, beta)
            assert err(ev.hessian, jac) < 1e-5
            if sym:
                ev = tu_loglik(d, y, beta, "probit")
                jac = fd_jacobian(lambda b: tu_loglik(d, y, b, "probit").score, beta)
                assert err(ev.hessian, jac) < 1e-5
            theta = np.append(beta, rho)
            ev = ntu_general_loglik(d, y, beta, rho)
            jac = fd_jacobian(
                lambda t: ntu_general_loglik(d, y, t[:-1], t[-1]).score, theta)
            assert err(ev.hessian, jac) < 1e-5


class TestInformationMatrices:
    def test_j1_single_dyad_frozen(self):
        d = single_dyad([1.0], [1.0])
        want = 4.0 * PHI0 ** 2 / 0.75
        assert j1_matrix(d, [0.0])[0, 0] == pytest.approx(want, rel=1e-12)
        assert j1_matrix(d, [0.0])[0, 0] == pytest.approx(0.848826, abs=1e-6)

    def test_j1_zero_column(self):
        d = single_dyad([0.0], [0.0])
        assert j1_matrix(d, [1.0])[0, 0] == 0.0

    def test_j1_requires_symmetry(self):
        d = single_dyad([1.0], [-1.0])
        with pytest.raises(ValueError, match="symmetric"):
            j1_matrix(d, [0.0])

    def test_j2_reduces_to_j1_on_symmetric(self):
        rng = np.random.default_rng(11)
        for _ in range(20):
            d = random_sym_design(rng)
            beta = rng.normal(size=d.k)
            np.testing.assert_allclose(j2_matrix(d, beta), j1_matrix(d, beta),
                                       atol=1e-12, rtol=0)

    def test_j2_opposed_regressors_cancel(self):
        # scalar form: two equal diagonal terms minus an equal cross term
        d = single_dyad([1.0], [-1.0])
        t = norm_pdf(0.0) ** 2 / 0.75
        by_hand = 2.0 * t * 1.0 + t * (-2.0)
        assert by_hand == pytest.approx(0.0, abs=1e-16)
        assert j2_matrix(d, [0.0])[0, 0] == pytest.approx(0.0, abs=1e-14)

    def test_j2_scalar_case_by_hand(self):
        d = single_dyad([1.0], [0.5])
        beta = 0.3
        v1, v2 = 0.3, 0.15
        c1, c2 = norm_cdf(v1), norm_cdf(v2)
        e1, e2 = norm_pdf(v1), norm_pdf(v2)
        comp = 1.0 - c1 * c2
        want = (e1 ** 2 * c2 / (c1 * comp) * 1.0
                + e2 ** 2 * c1 / (c2 * comp) * 0.25
                + e1 * e2 / comp * (2 * 0.5))
        assert j2_matrix(d, [beta])[0, 0] == pytest.approx(want, rel=1e-12)

    @staticmethod
    def _score_coefs(v1, v2, y):
        # naive per-dyad score coefficients, written straight from the
        # factorized-likelihood derivative
        c1, c2 = norm_cdf(v1), norm_cdf(v2)
        e1, e2 = norm_pdf(v1), norm_pdf(v2)
        comp = 1.0 - c1 * c2
        a1 = np.where(y == 1.0, e1 / c1, -c2 * e1 / comp)
        a2 = np.where(y == 1.0, e2 / c2, -c1 * e2 / comp)
        return a1, a2

    @pytest.mark.parametrize("symmetric", [True, False])
    def test_information_equality_monte_carlo(self, symmetric):
        # E[score score'] at the true parameter should match J1/J2;
        # 1e5 simulated outcome vectors, 3-sigma tolerance entrywise
        rng = np.random.default_rng(12 if symmetric else 13)
        d = random_sym_design(rng, n=4, k=2) if symmetric \
            else random_asym_design(rng, n=4, k=2)
        beta = np.array([0.6, -0.4])
        v1 = d.w_ij @ beta
        v2 = d.w_ji @ beta
        p = norm_cdf(v1) * norm_cdf(v2)
        draws = 100_000
        y = (rng.uniform(size=(draws, d.n_dyads)) < p).astype(float)
        a1, a2 = self._score_coefs(v1, v2, y)
        scores = a1[:, :, None] * d.w_ij[None, :, :] + a2[:, :, None] * d.w_ji[None, :, :]
        outer = np.einsum("rdi,rdj->rij", scores, scores) / d.n_dyads
        estimate = outer.mean(axis=0)
        se = outer.std(axis=0, ddof=1) / np.sqrt(draws)
        target = j1_matrix(d, beta) if symmetric else j2_matrix(d, beta)
        assert np.all(np.abs(estimate - target) <= 3.0 * se + 1e-12)


def test_general_model_outcome_distribution_vs_cdf():
    # sanity of the DGP helper itself: empirical link rate matches Phi2
    rng = np.random.default_rng(14)
    d = single_dyad([1.0], [0.7])
    beta, rho = [0.5], 0.6
    draws = np.array([draw_outcomes(rng, d, beta, rho)[0] for _ in range(40_000)])
    from dyadlink.specfun import binorm_cdf
    want = binorm_cdf(0.5, 0.35, rho)
    assert draws.mean() == pytest.approx(want, abs=4.0 * np.sqrt(want * (1 - want) / 40_000))
