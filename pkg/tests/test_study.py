"""Study-harness tests at smoke scale; accuracy targets live in the acceptance suite."""

import numpy as np
import pytest

from gpdthresh.eqd import EqdConfig
from gpdthresh.simcases import case_spec
from gpdthresh.streams import root_stream
from gpdthresh.study import (
    PRESETS,
    coverage_study,
    default_grid_spec,
    quantile_study,
    threshold_study,
)


class StubSelection:
    def __init__(self, chosen, model):
        self.chosen = chosen
        self.model = model


def stub_selector(truth=1.0):
    from gpdthresh.fit import fit_threshold_model

    def fake(data, grid, cfg, stream=None):
        model = fit_threshold_model(np.asarray(data), truth)
        return StubSelection(truth, model)

    return fake


class TestThresholdStudy:
    def test_zero_variance_with_stubbed_selector(self, monkeypatch):
        import gpdthresh.study as study_mod

        monkeypatch.setattr(study_mod, "select_threshold", stub_selector(1.0))
        row = threshold_study(case_spec("case5"), 10, "0(10)80",
                              EqdConfig(n_boot=5, seed=0))
        assert row.rmse == 0.0
        assert row.bias == 0.0
        assert row.variance == 0.0

    def test_decomposition_identity(self):
        row = threshold_study(case_spec("case5"), 12, "0(10)80",
                              EqdConfig(n_boot=10, seed=1))
        assert row.rmse**2 == pytest.approx(row.bias**2 + row.variance,
                                            rel=1e-9, abs=1e-15)
        assert row.n_replicates == 12
        assert row.target == "threshold"

    def test_gaussian_rejected(self):
        with pytest.raises(Exception):
            threshold_study(case_spec("gaussian"), 3, "50(10)90",
                            EqdConfig(n_boot=5, seed=0))

    def test_deterministic_and_worker_invariant(self):
        args = (case_spec("case5"), 8, "0(10)80", EqdConfig(n_boot=8, seed=3))
        a = threshold_study(*args, stream=root_stream(5))
        b = threshold_study(*args, stream=root_stream(5))
        c = threshold_study(*args, stream=root_stream(5), workers=2)
        assert (a.rmse, a.bias) == (b.rmse, b.bias) == (c.rmse, c.bias)


class TestQuantileStudy:
    def test_noise_floor_with_stubbed_selector(self, monkeypatch):
        # even selecting the exact threshold leaves estimation noise
        import gpdthresh.study as study_mod

        monkeypatch.setattr(study_mod, "select_threshold", stub_selector(1.0))
        rows = quantile_study(case_spec("case0"), 10, [0], "0(10)80",
                              EqdConfig(n_boot=5, seed=2))
        assert rows[0].rmse > 0.0

    def test_rows_per_level(self):
        rows = quantile_study(case_spec("case5"), 6, [0, 1, 2], "0(10)80",
                              EqdConfig(n_boot=8, seed=4))
        assert [r.target for r in rows] == [
            "quantile j=0", "quantile j=1", "quantile j=2"]
        for r in rows:
            assert r.rmse**2 == pytest.approx(r.bias**2 + r.variance,
                                              rel=1e-9, abs=1e-15)


class TestCoverageStudy:
    def run(self, workers=1, seed=6):
        return coverage_study(
            case_spec("case5"), 4, ("Alg1", "Alg1b", "Alg2"), (0.5, 0.8, 0.95),
            [0, 1], "0(10)80", EqdConfig(n_boot=6, seed=seed), B1=15, B2=6,
            stream=root_stream(seed), workers=workers,
        )

    def test_structure_and_level_nesting(self):
        rows = self.run()
        assert len(rows) == 3 * 3 * 2
        cov = {(r.algorithm, r.level, r.j): r.coverage for r in rows}
        for alg in ("Alg1", "Alg1b", "Alg2"):
            for j in (0, 1):
                assert cov[(alg, 0.95, j)] >= cov[(alg, 0.8, j)] >= cov[(alg, 0.5, j)]

    def test_alg1_ratio_is_unity(self):
        rows = self.run()
        for r in rows:
            if r.algorithm == "Alg1":
                assert r.width_ratio == 1.0
            assert 0.0 <= r.coverage <= 1.0

    def test_worker_invariance(self):
        a = self.run(workers=1)
        b = self.run(workers=2)
        assert [(r.coverage, r.width_ratio) for r in a] == [
            (r.coverage, r.width_ratio) for r in b]


def test_presets_and_grid_bindings():
    assert PRESETS["desk"]["n_reps"] == 100
    assert PRESETS["full"] == dict(n_reps=500, n_boot=100, B1=200, B2=200)
    assert default_grid_spec(case_spec("case1")) == "0(5)95"
    assert default_grid_spec(case_spec("gaussian", gaussian_n=2000)) == "50(5)95"
    assert default_grid_spec(case_spec("gaussian", gaussian_n=20000)) == "50(0.5)95"
