"""
Unit tests for the global rate search.
"""

import numpy as np
import pytest

from expofit_cli.core.classifier import ORIENTATIONS, TaxonomyTag, limit_vector_neg_inf
from expofit_cli.core.dataset import Dataset
from expofit_cli.core.errors import NumericalError
from expofit_cli.core.global_fitter import GlobalFitter, error_at, fit, interpolate_three
from expofit_cli.core.minimax import LimitVector, ModelKind, evaluate, fit_line_minimax, max_residual
from expofit_cli.core.quartet import fit_quartet

from .utils import DataFactory, assert_alternates


class TestErrorAt:
    def test_exact_exponential(self, three_points):
        assert error_at(-1.0, three_points) == pytest.approx(0.0, abs=1e-12)

    def test_three_points(self):
        assert error_at(-1.0, Dataset([0.0, 1.0, 2.0], [2.0, 0.0, 1.0])) == pytest.approx(0.634471, abs=1e-6)

    def test_zero_is_the_line(self, limit_paradigm):
        assert error_at(0.0, limit_paradigm) == fit_line_minimax(limit_paradigm)[1].error

    def test_limits(self, limit_paradigm):
        span = limit_paradigm.span
        line_error = fit_line_minimax(limit_paradigm)[1].error
        limit_error = limit_vector_neg_inf(limit_paradigm).error
        assert error_at(-1e-6 / span, limit_paradigm) == pytest.approx(line_error, rel=1e-3)
        assert error_at(-50.0 / span, limit_paradigm) == pytest.approx(limit_error, rel=1e-3)


class TestClosedFormVerdicts:
    def test_limit_paradigm(self, limit_paradigm):
        report = fit(limit_paradigm)
        assert report.taxonomy.tag is TaxonomyTag.NEG_INF
        assert isinstance(report.model, LimitVector)
        assert report.model.values == (2.0, 1.0, 1.0, 1.0)
        assert report.error == 1.0
        assert report.evals == 0

    def test_constant_paradigm(self, constant_paradigm):
        report = fit(constant_paradigm)
        assert report.model.kind is ModelKind.CONSTANT
        assert report.model.b == 1.0
        assert report.error == 1.0

    def test_line(self):
        report = fit(Dataset([0.0, 1.0, 2.0, 3.0], [0.0, 2.0, 1.0, 3.0]))
        assert report.taxonomy.tag is TaxonomyTag.LINE
        assert report.error == pytest.approx(0.75)
        assert len(report.certificate) == 4

    def test_mirrored_limit(self, limit_paradigm):
        report = fit(limit_paradigm.reflect_t())
        assert report.taxonomy.tag is TaxonomyTag.POS_INF
        assert report.model.direction == "+inf"
        assert report.error == 1.0


class TestInteriorSearch:
    def test_quartet_matches_solver(self, quartet):
        report = fit(quartet)
        assert report.taxonomy.tag is TaxonomyTag.INTERIOR
        assert report.model.k == pytest.approx(-0.5, abs=1e-7)
        assert report.model.a == pytest.approx(fit_quartet(quartet).model.a, rel=1e-6)
        assert report.error == pytest.approx(0.1, abs=1e-9)
        assert report.evals > 0

    def test_three_points_interpolate(self, three_points):
        report = fit(three_points)
        assert report.taxonomy.tag is TaxonomyTag.INTERIOR
        assert report.model.a == pytest.approx(2.0, rel=1e-9)
        assert report.model.k == pytest.approx(-1.0, rel=1e-9)
        assert report.model.b == pytest.approx(1.0, rel=1e-9)
        assert report.error == pytest.approx(0.0, abs=1e-12)

    def test_interpolate_three_direct(self):
        t = np.array([0.0, 0.5, 2.0])
        data = Dataset(t, 3.0 * np.exp(-2.0 * t) - 1.0)
        model = interpolate_three(data)
        assert model.k == pytest.approx(-2.0, rel=1e-9)
        np.testing.assert_allclose(evaluate(model, t), data.T, atol=1e-12)

    def test_cooling_surrogate(self, cooling):
        report = fit(cooling)
        assert report.taxonomy.tag is TaxonomyTag.INTERIOR
        assert report.model.k == pytest.approx(-0.0026042, abs=1e-5)
        assert report.error == pytest.approx(0.01, rel=1e-6)
        assert report.quartet == (0, 3, 7, 11)
        assert report.warning is None

    def test_random_interior_recovery(self, rng):
        for _ in range(10):
            data, (a, k, b), r = DataFactory.interior(rng)
            report = fit(data)
            assert report.taxonomy.tag is TaxonomyTag.INTERIOR
            assert report.model.k == pytest.approx(k, rel=1e-6)
            assert report.model.a == pytest.approx(a, rel=1e-6)
            assert report.error == pytest.approx(r, rel=1e-6)
            assert len(report.certificate) >= 4
            assert_alternates(report.residuals(data), report.certificate.indices, report.error, tol=1e-7)

    def test_grid_domination(self, rng):
        data, _, _ = DataFactory.interior(rng, n=10)
        report = fit(data)
        span = data.span
        grid = -np.logspace(-6, 3, 2000) / span
        best = min(error_at(k, data) for k in grid if abs(k) * np.max(np.abs(data.t)) < 700)
        assert report.error <= best + 1e-8 * (1 + report.error)

    @pytest.mark.slow
    def test_grid_domination_over_many_datasets(self, rng):
        for _ in range(100):
            data, _, _ = DataFactory.interior(rng, n=int(rng.integers(5, 13)))
            report = fit(data)
            grid = -np.logspace(-6, 3, 2000) / data.span
            best = min(error_at(k, data) for k in grid if abs(k) * np.max(np.abs(data.t)) < 700)
            assert report.error <= best + 1e-8 * (1 + report.error)
            assert len(report.certificate) >= 4

    def test_quartet_reduction(self, rng):
        data, _, _ = DataFactory.interior(rng)
        report = fit(data)
        refit = fit_quartet(data.subset(report.quartet))
        assert refit.model.k == pytest.approx(report.model.k, rel=1e-6)
        assert refit.model.a == pytest.approx(report.model.a, rel=1e-6)
        assert refit.model.b == pytest.approx(report.model.b, rel=1e-6, abs=1e-9)

    def test_trace_is_quasiconvex(self, cooling):
        report = fit(cooling)
        values = [e for _, e in report.trace]
        for i in range(len(values) - 2):
            assert values[i + 1] <= max(values[i], values[i + 2]) + 1e-9

    @pytest.mark.parametrize("orientation", ORIENTATIONS)
    def test_orientation_equivariance(self, cooling, orientation):
        base = fit(cooling)
        mirrored = fit(orientation.apply(cooling))
        s_T = -1.0 if orientation.negate_T else 1.0
        s_t = -1.0 if orientation.reflect_t else 1.0
        assert mirrored.model.a == pytest.approx(s_T * base.model.a, rel=1e-8)
        assert mirrored.model.k == pytest.approx(s_t * base.model.k, rel=1e-8)
        assert mirrored.model.b == pytest.approx(s_T * base.model.b, rel=1e-8)
        assert mirrored.error == pytest.approx(base.error, rel=1e-8)

    def test_parallel_scan_matches_serial(self, cooling):
        serial = GlobalFitter(workers=1).fit(cooling)
        parallel = GlobalFitter(workers=4).fit(cooling)
        assert parallel.model == serial.model
        assert parallel.error == serial.error

    def test_diagnostics(self, cooling):
        report = fit(cooling)
        assert report.diagnostics["k_quartet"] == report.model.k
        assert report.diagnostics["k_difference"] >= 0
        assert report.diagnostics["elapsed"] >= 0
        assert report.k_bracket is not None

    def test_rate_bounds_exclude_minimum(self, cooling):
        report = GlobalFitter(k_max=1e-4).fit(cooling)
        assert report.warning is not None
        assert report.error >= fit(cooling).error

    def test_empty_rate_window(self, cooling):
        with pytest.raises(NumericalError):
            GlobalFitter(k_min=1.0, k_max=1e-3).fit(cooling)

    def test_report_is_consistent(self, cooling):
        report = fit(cooling)
        assert report.error == pytest.approx(max_residual(report.model, cooling), rel=1e-12)

    @pytest.mark.slow
    def test_random_orientation_equivariance(self, rng):
        for _ in range(100):
            data, _, _ = DataFactory.interior(rng)
            base = fit(data)
            for orientation in ORIENTATIONS[1:]:
                mirrored = fit(orientation.apply(data))
                s_T = -1.0 if orientation.negate_T else 1.0
                s_t = -1.0 if orientation.reflect_t else 1.0
                assert mirrored.model.k == pytest.approx(s_t * base.model.k, rel=1e-8)
                assert mirrored.model.a == pytest.approx(s_T * base.model.a, rel=1e-8)
                assert mirrored.error == pytest.approx(base.error, rel=1e-8)
