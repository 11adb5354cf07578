"""Simulation-case generators, true-quantile oracles and the tau quadrature."""

import math

import numpy as np
import pytest
from scipy.stats import kstest

from gpdthresh.errors import InputError
from gpdthresh.gpd import GpdParams, gpd_cdf
from gpdthresh.simcases import (
    CaseSpec,
    case_spec,
    compute_tau,
    inverse_normal_cdf,
    simulate_case,
    true_quantile,
)
from gpdthresh.streams import generator, root_stream, substream


class TestSpecs:
    def test_case1_counts(self):
        s = case_spec("case1")
        assert (s.n_below, s.n_above, s.n_total) == (200, 1000, 1200)

    def test_case4_counts(self):
        s = case_spec("case4")
        assert (s.n_below, s.n_above, s.n_total) == (721, 279, 1000)
        assert s.beta_params == (1.0, 2.0)

    def test_unknown_case(self):
        with pytest.raises(InputError):
            case_spec("case99")

    def test_inconsistent_counts_rejected(self):
        with pytest.raises(InputError):
            CaseSpec(case_id="case1", n_below=5, n_above=5, n_total=11)


class TestSimulate:
    def test_case1_sections(self):
        x = simulate_case(case_spec("case1"), generator(root_stream(0)))
        assert x.size == 1200
        assert int((x <= 1.0).sum()) == 200
        assert np.all(x[(x <= 1.0)] >= 0.5)

    def test_case4_sections(self):
        x = simulate_case(case_spec("case4"), generator(root_stream(1)))
        assert x.size == 1000
        assert int((x <= 1.0).sum()) == 721
        assert int((x > 1.0).sum()) == 279

    def test_gaussian(self):
        x = simulate_case(case_spec("gaussian", gaussian_n=5000), generator(root_stream(2)))
        assert x.size == 5000
        assert abs(x.mean()) < 0.05 and abs(x.std() - 1.0) < 0.05

    def test_deterministic(self):
        for cid in ("case0", "case1", "case4", "gaussian"):
            a = simulate_case(case_spec(cid), generator(root_stream(7)))
            b = simulate_case(case_spec(cid), generator(root_stream(7)))
            assert np.array_equal(a, b)

    def test_case4_excesses_follow_shifted_gpd(self):
        # excesses of 1 should be GPD(sigma + xi, xi) by threshold stability
        root = root_stream(42)
        pooled = []
        for r in range(100):
            x = simulate_case(case_spec("case4"), generator(substream(root, r)))
            pooled.append(x[x > 1.0] - 1.0)
        pooled = np.concatenate(pooled)
        assert pooled.size == 27_900
        res = kstest(pooled, lambda v: np.asarray(gpd_cdf(v, GpdParams(0.6, 0.1))))
        assert res.pvalue > 0.01

    def test_mixture_cdf_consistency(self):
        # one big mixture draw against the analytic distribution function
        spec = CaseSpec(case_id="case1", sigma_u=0.5, xi=0.1,
                        n_below=166_667, n_above=833_333, n_total=1_000_000)
        x = simulate_case(spec, generator(root_stream(3)))

        def cdf(v):
            v = np.asarray(v, dtype=float)
            below = np.clip((v - 0.5) / 3.0, 0.0, 1.0 / 6.0)
            above = 1.0 / 6.0 + 5.0 / 6.0 * np.asarray(
                gpd_cdf(np.maximum(v - 1.0, 0.0), GpdParams(0.5, 0.1)))
            return np.where(v <= 1.0, below, above)

        xs = np.sort(x)
        emp = np.arange(1, xs.size + 1) / xs.size
        ks = np.max(np.abs(emp - cdf(xs)))
        assert ks < 0.002

    def test_case4_acceptance_rate_below_one(self):
        # fraction of proposals below 1 that survive rejection is q / H(1)
        sigma, xi = 0.5, 0.1
        rng = generator(root_stream(11))
        u = rng.random((1_000_000, 2))
        y = sigma * np.expm1(-xi * np.log1p(-u[:, 0])) / xi
        b = 1.0 - np.sqrt(1.0 - u[:, 1])
        below = y < 1.0
        accept = (y >= b) & below
        q = 5.0 / 12.0  # closed form of the acceptance integral for Beta(1, 2)
        p_true = q / float(gpd_cdf(1.0, GpdParams(sigma, xi)))
        rate = accept.sum() / below.sum()
        se = math.sqrt(p_true * (1 - p_true) / below.sum())
        assert abs(rate - p_true) < 3 * se


class TestTrueQuantile:
    def test_mixture_boundary_is_threshold(self):
        assert true_quantile(case_spec("case1"), 5.0 / 6.0 - 1e-14) == pytest.approx(1.0)

    def test_case1_value(self):
        assert true_quantile(case_spec("case1"), 1.0 / 1200.0) == pytest.approx(
            5.976311574844399, rel=1e-12)

    def test_case4_boundary(self):
        tau = compute_tau(0.5, 0.1, 1.0, 2.0)
        assert true_quantile(case_spec("case4"), 1.0 - tau) == pytest.approx(1.0)

    def test_case0(self):
        got = true_quantile(case_spec("case0"), 0.001)
        expect = 1.0 + 0.5 / 0.1 * (0.001 ** -0.1 - 1.0)
        assert got == pytest.approx(expect, rel=1e-12)

    def test_gaussian(self):
        assert true_quantile(case_spec("gaussian"), 0.5) == pytest.approx(0.0, abs=1e-12)

    @pytest.mark.parametrize("cid", ["case0", "case1", "case3", "case4", "gaussian"])
    def test_strictly_decreasing(self, cid):
        spec = case_spec(cid)
        ps = np.geomspace(1e-6, 0.2, 25)
        xs = [true_quantile(spec, p) for p in ps]
        assert all(a > b for a, b in zip(xs, xs[1:]))

    def test_out_of_range(self):
        with pytest.raises(InputError):
            true_quantile(case_spec("case1"), 0.9)
        tau = compute_tau(0.5, 0.1, 1.0, 2.0)
        with pytest.raises(InputError):
            true_quantile(case_spec("case4"), 1.0 - tau + 0.01)


class TestTau:
    def test_reference_value(self):
        assert compute_tau(0.5, 0.1, 1.0, 2.0) == pytest.approx(0.721, abs=1e-3)

    def test_quadrature_converged(self):
        a = compute_tau(0.5, 0.1, 1.0, 2.0, order=64)
        b = compute_tau(0.5, 0.1, 1.0, 2.0, order=128)
        assert abs(a - b) < 1e-8

    def test_no_rejection_limit(self):
        # Beta mass collapsing onto 0 removes all rejection below 1, so tau
        # approaches H(1)
        tau = compute_tau(0.5, 0.1, 1.0, 400.0)
        assert tau == pytest.approx(float(gpd_cdf(1.0, GpdParams(0.5, 0.1))), abs=5e-3)

    def test_general_beta_path_matches_closed_form(self):
        # the scipy betainc route and the closed-form (1, 2) route agree
        a = compute_tau(0.5, 0.1, 1.0, 2.0)
        b = compute_tau(0.5, 0.1, 1.0, 2.0 + 1e-12)
        assert a == pytest.approx(b, rel=1e-9)


class TestInverseNormal:
    def test_median(self):
        assert inverse_normal_cdf(0.5) == 0.0

    def test_reference_value(self):
        assert inverse_normal_cdf(1.0 - 1.0 / 2000.0) == pytest.approx(
            3.2905267314919255, abs=1e-9)

    def test_round_trip(self):
        from scipy.special import ndtr

        ps = np.linspace(0.001, 0.999, 499)
        xs = np.asarray(inverse_normal_cdf(ps))
        assert np.max(np.abs(ndtr(xs) - ps)) < 1e-9

    def test_symmetry(self):
        ps = np.array([0.01, 0.2, 0.41])
        left = np.asarray(inverse_normal_cdf(ps))
        right = np.asarray(inverse_normal_cdf(1.0 - ps))
        assert np.allclose(left, -right, atol=1e-14)

    def test_boundaries_rejected(self):
        for p in (0.0, 1.0, -0.1, 1.1):
            with pytest.raises(InputError):
                inverse_normal_cdf(p)
