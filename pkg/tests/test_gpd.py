"""GPD primitive tests: frozen values, quadrature cross-checks, properties."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gpdthresh.errors import InputError
from gpdthresh.gpd import (
    GpdParams,
    gpd_cdf,
    gpd_log_density,
    gpd_quantile,
    gpd_sample,
    shift_threshold,
)

XI_GRID = [-0.5, -0.05, 0.0, 1e-9, 0.1, 0.5]
SIGMA_GRID = [0.3, 0.5, 1.0, 2.5]


def quad_cdf(y, sigma, xi, n=20000):
    """Independent oracle: integrate the density with the trapezoid rule."""
    ys = np.linspace(0.0, y, n)
    dens = np.exp([gpd_log_density(v, GpdParams(sigma, xi)) for v in ys])
    return np.trapezoid(dens, ys)


class TestParams:
    def test_rejects_bad_scale(self):
        with pytest.raises(InputError):
            GpdParams(scale=0.0, shape=0.1)
        with pytest.raises(InputError):
            GpdParams(scale=-1.0, shape=0.1)

    def test_rejects_nonfinite_shape(self):
        with pytest.raises(InputError):
            GpdParams(scale=1.0, shape=math.nan)

    def test_upper_endpoint(self):
        assert GpdParams(0.5, -0.25).upper_endpoint == pytest.approx(2.0)
        assert GpdParams(0.5, 0.1).upper_endpoint == math.inf


class TestCdf:
    def test_lower_endpoint(self):
        assert gpd_cdf(0.0, GpdParams(0.5, 0.1)) == 0.0

    def test_exponential_median(self):
        assert gpd_cdf(math.log(2.0), GpdParams(1.0, 0.0)) == pytest.approx(0.5, abs=1e-12)

    def test_positive_shape_value(self):
        # direct evaluation: 1 - 1.2^(-10)
        got = gpd_cdf(1.0, GpdParams(0.5, 0.1))
        assert got == pytest.approx(0.8384944171101543, abs=1e-12)
        assert got == pytest.approx(quad_cdf(1.0, 0.5, 0.1), abs=1e-6)

    def test_saturates_at_endpoint(self):
        p = GpdParams(0.5, -0.25)
        assert gpd_cdf(2.0, p) == 1.0
        assert gpd_cdf(5.0, p) == 1.0

    def test_rejects_negative(self):
        with pytest.raises(InputError):
            gpd_cdf(-0.1, GpdParams(1.0, 0.1))

    def test_monotone_in_y(self):
        for xi in XI_GRID:
            p = GpdParams(0.7, xi)
            top = p.upper_endpoint if xi < 0 else 50.0
            ys = np.linspace(0.0, top, 200)
            vals = np.asarray(gpd_cdf(ys, p))
            assert np.all(np.diff(vals) >= -1e-15)


class TestLogDensity:
    def test_density_at_origin(self):
        assert gpd_log_density(0.0, GpdParams(1.0, 0.3)) == pytest.approx(0.0, abs=1e-15)

    def test_beyond_endpoint(self):
        assert gpd_log_density(5.0, GpdParams(1.0, -0.3)) == -math.inf

    def test_positive_shape_value(self):
        # ln(2 * 1.2^(-11)) evaluated directly
        expect = math.log(2.0) - 11.0 * math.log(1.2)
        assert gpd_log_density(1.0, GpdParams(0.5, 0.1)) == pytest.approx(expect, abs=1e-12)

    @pytest.mark.parametrize("xi", XI_GRID)
    def test_density_normalises(self, xi):
        p = GpdParams(0.8, xi)
        if xi < 0:
            ys = np.linspace(0.0, p.upper_endpoint, 400001)
        else:
            # dense linear grid through the body, log-spaced through the tail
            body_top = float(gpd_quantile(0.999, p))
            tail_top = float(gpd_quantile(1.0 - 1e-10, p))
            ys = np.concatenate([
                np.linspace(0.0, body_top, 200001),
                np.geomspace(body_top, tail_top, 200001)[1:],
            ])
        dens = np.exp(gpd_log_density(ys, p))
        dens[~np.isfinite(dens)] = 0.0
        assert np.trapezoid(dens, ys) == pytest.approx(1.0, abs=1e-6)


class TestQuantile:
    def test_zero(self):
        assert gpd_quantile(0.0, GpdParams(2.0, 0.4)) == 0.0

    def test_unit_exponential(self):
        assert gpd_quantile(1.0 - math.exp(-1.0), GpdParams(1.0, 0.0)) == pytest.approx(
            1.0, abs=1e-12)

    def test_inverse_of_cdf_example(self):
        assert gpd_quantile(0.8384944171101543, GpdParams(0.5, 0.1)) == pytest.approx(
            1.0, rel=1e-10)

    def test_round_trip_grid(self):
        probs = np.arange(0.001, 1.0, 0.001)
        for xi in XI_GRID:
            for sigma in SIGMA_GRID:
                p = GpdParams(sigma, xi)
                back = np.asarray(gpd_cdf(gpd_quantile(probs, p), p))
                assert np.allclose(back, probs, rtol=1e-9, atol=1e-12)

    def test_endpoint_rejected_unless_flagged(self):
        with pytest.raises(InputError):
            gpd_quantile(1.0, GpdParams(1.0, 0.1))
        with pytest.raises(InputError):
            gpd_quantile(1.0, GpdParams(1.0, -0.2))
        assert gpd_quantile(1.0, GpdParams(1.0, -0.2), allow_endpoint=True) == pytest.approx(5.0)

    def test_small_shape_continuity(self):
        switch = 1e-8
        ys = np.linspace(0.0, 20.0, 50)
        for sigma in SIGMA_GRID:
            for s in (switch, -switch):
                a = np.asarray(gpd_cdf(ys, GpdParams(sigma, s)))
                b = np.asarray(gpd_cdf(ys, GpdParams(sigma, 0.0)))
                assert np.max(np.abs(a - b)) < 1e-7


class TestSample:
    def test_empty(self):
        rng = np.random.default_rng(0)
        assert gpd_sample(0, GpdParams(1.0, 0.1), rng).size == 0

    def test_deterministic(self):
        p = GpdParams(0.5, 0.1)
        a = gpd_sample(100, p, np.random.default_rng(42))
        b = gpd_sample(100, p, np.random.default_rng(42))
        assert np.array_equal(a, b)

    def test_ks_distance(self):
        p = GpdParams(0.5, 0.1)
        x = np.sort(gpd_sample(100_000, p, np.random.default_rng(7)))
        emp_hi = np.arange(1, x.size + 1) / x.size
        emp_lo = np.arange(0, x.size) / x.size
        model = np.asarray(gpd_cdf(x, p))
        ks = max(np.max(np.abs(emp_hi - model)), np.max(np.abs(emp_lo - model)))
        assert ks < 0.01


class TestShiftThreshold:
    def test_tabulated_shift(self):
        q = shift_threshold(GpdParams(0.5, 0.1), 1.0)
        assert (q.scale, q.shape) == pytest.approx((0.6, 0.1))

    def test_exponential_memoryless(self):
        q = shift_threshold(GpdParams(0.7, 0.0), 12.5)
        assert (q.scale, q.shape) == (0.7, 0.0)

    def test_survivor_consistency(self):
        p = GpdParams(0.5, 0.1)
        q = shift_threshold(p, 2.0)
        x = 0.3
        lhs = 1.0 - gpd_cdf(x, q)
        rhs = (1.0 - gpd_cdf(2.0 + x, p)) / (1.0 - gpd_cdf(2.0, p))
        assert lhs == pytest.approx(rhs, abs=1e-12)
        assert q.scale == pytest.approx(0.7)

    def test_endpoint_rejected(self):
        with pytest.raises(InputError):
            shift_threshold(GpdParams(0.5, -0.25), 2.0)

    @staticmethod
    def survivor(x, sigma, xi):
        """Direct survivor evaluation (1 + xi*x/sigma)^(-1/xi), cancellation-free."""
        if abs(xi) < 1e-8:
            return math.exp(-x / sigma)
        z = xi * x / sigma
        if z <= -1.0:
            return 0.0
        return math.exp(-math.log1p(z) / xi)

    @settings(max_examples=200, deadline=None)
    @given(
        sigma=st.floats(0.1, 5.0),
        xi=st.floats(-0.9, 2.0),
        delta=st.floats(0.0, 3.0),
        x=st.floats(0.001, 3.0),
    )
    def test_threshold_stability_property(self, sigma, xi, delta, x):
        p = GpdParams(sigma, xi)
        if xi < 0:
            end = p.upper_endpoint
            delta = min(delta, 0.8 * end)
            x = min(x, 0.15 * end)
        q = shift_threshold(p, delta)
        lhs = self.survivor(x, q.scale, q.shape)
        rhs = self.survivor(delta + x, sigma, xi) / self.survivor(delta, sigma, xi)
        assert abs(lhs - rhs) <= 1e-10 * max(lhs, rhs, 1e-300)
