"""Tests for confusion metrics, threshold search, and explained variance."""

import csv

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from reference_results import ALL_STRATEGIES
from toxkg import evalmetrics as ev
from toxkg.errors import DataError


class TestConfusion:
    def test_hand_batch(self):
        counts = ev.confusion(
            np.array([0.9, 0.2, 0.6]), np.array([1, 0, 0]), tau=0.5
        )
        assert counts == ev.ConfusionCounts(tp=1, fp=1, tn=1, fn=0)

    def test_perfect_predictor(self):
        counts = ev.confusion(
            np.array([0.9, 0.8, 0.1, 0.2]), np.array([1, 1, 0, 0])
        )
        assert counts.fn == 0 and counts.fp == 0
        assert counts.tp == 2 and counts.tn == 2

    def test_all_positive_predictor(self):
        counts = ev.confusion(
            np.array([0.9, 0.8, 0.7]), np.array([1, 0, 1])
        )
        assert counts.tn == 0 and counts.fn == 0

    def test_threshold_is_strict(self):
        counts = ev.confusion(np.array([0.5]), np.array([1]), tau=0.5)
        assert counts.fn == 1 and counts.tp == 0

    def test_total_matches_batch_size(self):
        rng = np.random.default_rng(0)
        yhat = rng.random(57)
        y = rng.integers(2, size=57)
        assert ev.confusion(yhat, y).total == 57

    def test_shape_mismatch_rejected(self):
        with pytest.raises(DataError, match="mismatch"):
            ev.confusion(np.array([0.5, 0.6]), np.array([1]))

    def test_empty_batch_rejected(self):
        with pytest.raises(DataError, match="empty"):
            ev.confusion(np.array([]), np.array([]))

    def test_negative_counts_rejected(self):
        with pytest.raises(DataError):
            ev.ConfusionCounts(tp=-1, fp=0, tn=0, fn=0)


class TestComputeMetrics:
    def test_formulas(self):
        sens, spec, yi = ev.compute_metrics(
            ev.ConfusionCounts(tp=3, fp=1, tn=4, fn=1)
        )
        assert sens == pytest.approx(0.75)
        assert spec == pytest.approx(0.8)
        assert yi == pytest.approx(0.55)

    def test_perfect_counts_give_yi_one(self):
        _, _, yi = ev.compute_metrics(ev.ConfusionCounts(tp=5, fp=0, tn=5, fn=0))
        assert yi == 1.0

    def test_no_positives_rejected(self):
        with pytest.raises(DataError, match="sensitivity undefined"):
            ev.compute_metrics(ev.ConfusionCounts(tp=0, fp=2, tn=3, fn=0))

    def test_no_negatives_rejected(self):
        with pytest.raises(DataError, match="specificity undefined"):
            ev.compute_metrics(ev.ConfusionCounts(tp=2, fp=0, tn=0, fn=1))

    def test_reference_row(self):
        counts = ev.ConfusionCounts(tp=939, fn=1000 - 939, tn=657, fp=1000 - 657)
        sens, spec, yi = ev.compute_metrics(counts)
        assert sens == pytest.approx(0.939)
        assert spec == pytest.approx(0.657)
        assert abs(yi - 0.595) <= 0.002

    def test_random_predictor_on_balanced_data(self):
        rng = np.random.default_rng(42)
        n = 10_000
        y = np.repeat([0, 1], n // 2)
        yhat = rng.random(n)
        _, _, yi = ev.compute_metrics(ev.confusion(yhat, y))
        assert abs(yi) < 0.05

    @pytest.mark.parametrize("strategy", sorted(ALL_STRATEGIES))
    def test_reference_tables_arithmetic(self, strategy):
        for name, sens, spec, yi in ALL_STRATEGIES[strategy]:
            counts = ev.ConfusionCounts(
                tp=round(sens * 1000), fn=1000 - round(sens * 1000),
                tn=round(spec * 1000), fp=1000 - round(spec * 1000),
            )
            s, p, computed = ev.compute_metrics(counts)
            assert abs(computed - yi) <= 0.002, (strategy, name)


class TestYoudenMax:
    def test_perfect_separation(self):
        yhat = np.array([0.1, 0.2, 0.8, 0.9])
        y = np.array([0, 0, 1, 1])
        yi_max, tau_max = ev.youden_max(yhat, y)
        assert yi_max == 1.0
        assert tau_max == pytest.approx(0.5)

    def test_constant_predictions_give_zero(self):
        yhat = np.full(6, 0.7)
        y = np.array([1, 0, 1, 0, 1, 0])
        yi_max, tau_max = ev.youden_max(yhat, y)
        assert yi_max == 0.0
        assert tau_max == 0.0

    def test_smallest_threshold_on_ties(self):
        # anti-separated scores: tau=0 and tau=1 both reach YI=0, every
        # interior threshold is worse, so the smaller tie wins
        yhat = np.array([0.2, 0.8])
        y = np.array([1, 0])
        yi_max, tau_max = ev.youden_max(yhat, y)
        assert yi_max == 0.0
        assert tau_max == 0.0

    def test_single_class_batch_rejected(self):
        with pytest.raises(DataError):
            ev.youden_max(np.array([0.2, 0.8]), np.array([1, 1]))

    def test_dominates_default_threshold(self):
        rng = np.random.default_rng(3)
        for _ in range(25):
            n = int(rng.integers(4, 60))
            y = rng.integers(2, size=n)
            if y.min() == y.max():
                continue
            yhat = rng.random(n)
            _, _, yi_default = ev.compute_metrics(ev.confusion(yhat, y, 0.5))
            yi_max, _ = ev.youden_max(yhat, y)
            assert yi_max >= yi_default - 1e-12

    @settings(max_examples=60, deadline=None)
    @given(
        data=st.lists(
            st.tuples(
                st.floats(min_value=0.0, max_value=1.0, allow_nan=False),
                st.integers(min_value=0, max_value=1),
            ),
            min_size=2,
            max_size=30,
        )
    )
    def test_dominates_default_threshold_property(self, data):
        yhat = np.array([d[0] for d in data])
        y = np.array([d[1] for d in data])
        if y.min() == y.max():
            return
        _, _, yi_default = ev.compute_metrics(ev.confusion(yhat, y, 0.5))
        yi_max, tau_max = ev.youden_max(yhat, y)
        assert yi_max >= yi_default - 1e-12
        assert 0.0 <= tau_max <= 1.0


class TestExplainedVariance:
    def test_single_axis_variance(self):
        t = np.linspace(-1, 1, 50)
        x = np.zeros((50, 8))
        x[:, 2] = t
        assert ev.explained_variance(x, components=1) == pytest.approx(1.0)

    def test_isotropic_gaussian(self):
        rng = np.random.default_rng(7)
        x = rng.normal(size=(100_000, 20))
        ev10 = ev.explained_variance(x, components=10)
        assert abs(ev10 - 0.5) < 0.02

    def test_width_at_most_components_gives_one(self):
        rng = np.random.default_rng(1)
        x = rng.normal(size=(40, 6))
        assert ev.explained_variance(x, components=10) == pytest.approx(1.0)

    def test_rotation_invariance(self):
        rng = np.random.default_rng(5)
        x = rng.normal(size=(200, 15)) * rng.uniform(0.1, 3.0, size=15)
        q, _ = np.linalg.qr(rng.normal(size=(15, 15)))
        a = ev.explained_variance(x, components=10)
        b = ev.explained_variance(x @ q, components=10)
        assert abs(a - b) <= 1e-8

    def test_zero_variance_matrix(self):
        assert ev.explained_variance(np.ones((5, 4))) == 1.0

    def test_too_few_rows_rejected(self):
        with pytest.raises(DataError, match="two rows"):
            ev.explained_variance(np.ones((1, 4)))

    def test_bad_inputs_rejected(self):
        with pytest.raises(DataError, match="2-D"):
            ev.explained_variance(np.ones(5))
        with pytest.raises(DataError, match="components"):
            ev.explained_variance(np.ones((5, 4)), components=0)


class TestEvaluateAndAggregate:
    def test_evaluate_report(self):
        yhat = np.array([0.9, 0.6, 0.3, 0.2])
        y = np.array([1, 0, 1, 0])
        report = ev.evaluate(yhat, y)
        assert report.yi == pytest.approx(
            report.sensitivity + report.specificity - 1.0
        )
        assert report.yi_max >= report.yi

    def test_identical_runs_have_zero_std(self):
        r = ev.MetricsReport(0.9, 0.8, 0.7, 0.75, 0.5)
        agg = ev.aggregate_runs([r, r, r])
        for mean, std in agg.values():
            assert std == 0.0
        assert agg["yi"][0] == pytest.approx(0.7)

    def test_population_std_convention(self):
        runs = [
            ev.MetricsReport(0.4, 0.4, 0.4, 0.4, 0.4),
            ev.MetricsReport(0.6, 0.6, 0.6, 0.6, 0.6),
        ]
        agg = ev.aggregate_runs(runs)
        assert agg["yi"] == (pytest.approx(0.5), pytest.approx(0.1))

    def test_single_run(self):
        agg = ev.aggregate_runs([ev.MetricsReport(0.9, 0.8, 0.7, 0.75, 0.5)])
        assert agg["sensitivity"] == (pytest.approx(0.9), 0.0)

    def test_empty_rejected(self):
        with pytest.raises(DataError, match="no runs"):
            ev.aggregate_runs([])


class TestPersistence:
    def test_save_metrics_format(self, tmp_path):
        agg = {
            "sensitivity": (0.9, 0.01), "specificity": (0.8, 0.02),
            "yi": (0.7, 0.015), "yi_max": (0.75, 0.01), "tau_max": (0.5, 0.1),
        }
        path = tmp_path / "metrics.csv"
        ev.save_metrics(path, [("distmult-hake", "ii", agg)])
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == [
            "model", "strategy", "sensitivity", "specificity", "yi",
            "yi_max", "tau_max",
        ]
        assert rows[1][0] == "distmult-hake"
        assert rows[1][1] == "ii"
        assert rows[1][2] == "0.900±0.010"
        assert rows[1][4] == "0.700±0.015"

    def test_save_plot_data(self, tmp_path):
        path = tmp_path / "plot.csv"
        ev.save_plot_data(path, [(0.49, 0.571), (0.3, 0.2)])
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["explained_variance", "yi_max"]
        assert float(rows[1][0]) == 0.49
        assert float(rows[2][1]) == 0.2
