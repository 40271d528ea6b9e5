"""Unit tests for the rolling train-on-prefix validation harness."""

import math

import pytest

from qc_horizon.backtest import actual_record_glq, rolling_validate
from qc_horizon.dataset import Dataset, FilterSpec, year_window
from qc_horizon.glq import QecParams, generalized_logical_qubits
from qc_horizon.trends import ForecastConfig
from conftest import make_record


class TestActualRecordGlq:
    def test_cumulative_maximum(self, tiny_dataset):
        values = [actual_record_glq(tiny_dataset, y)
                  for y in (2013, 2015, 2017, 2019, 2021)]
        assert values == sorted(values)
        best = generalized_logical_qubits(100, 1e-3).value
        assert values[-1] == pytest.approx(best)

    def test_excludes_records_after_year_end(self, tiny_dataset):
        # The 2020-11 record must not count toward the through-2019 maximum.
        through_2019 = actual_record_glq(tiny_dataset, 2019)
        assert through_2019 == pytest.approx(
            generalized_logical_qubits(40, 2e-3).value)

    def test_above_threshold_scores_zero(self):
        ds = Dataset.from_records([make_record("a", "2010", 100, 5e-2)])
        assert actual_record_glq(ds, 2015) == 0.0

    def test_missing_error_rate_ignored(self):
        ds = Dataset.from_records([make_record("a", "2010", 100, None)])
        assert actual_record_glq(ds, 2015) == 0.0


class TestRollingValidate:
    @pytest.fixture
    def result(self, tiny_dataset):
        config = ForecastConfig(
            resamples=60, seed=1,
            window=FilterSpec(date_window=year_window(2010, 2020)),
        )
        return rolling_validate(tiny_dataset, [2014, 2016], [2016, 2018],
                                config)

    def test_grid_shape(self, result):
        assert len(result.cells) == 4
        assert result.train_ends == (2014, 2016)
        assert result.targets == (2016, 2018)

    def test_targets_inside_training_window_not_applicable(self, result):
        cell = result.cell(2016, 2016)
        assert not cell.applicable
        assert cell.q_med is None and cell.covered is None

    def test_applicable_cells_scored(self, result, tiny_dataset):
        scored = [c for c in result.cells if c.applicable]
        assert len(scored) == 3
        for cell in scored:
            assert cell.q_low <= cell.q_med <= cell.q_high
            assert cell.actual == actual_record_glq(tiny_dataset,
                                                    cell.target_year)
            assert cell.covered == (cell.q_low <= cell.actual <= cell.q_high)
        covered = sum(c.covered for c in scored)
        assert result.coverage_rate == pytest.approx(covered / 3)

    def test_training_uses_only_the_prefix(self, result):
        # Through 2014 only three records are visible.
        assert result.cell(2014, 2016).n_train == 3
        assert result.cell(2016, 2018).n_train == 4

    def test_unknown_cell_raises(self, result):
        with pytest.raises(KeyError):
            result.cell(2015, 2016)

    def test_insufficient_prefix_marks_na(self, tiny_dataset):
        config = ForecastConfig(
            resamples=60, seed=1,
            window=FilterSpec(date_window=year_window(2010, 2020)),
        )
        result = rolling_validate(tiny_dataset, [2010], [2012], config)
        assert not result.cell(2010, 2012).applicable
        assert math.isnan(result.coverage_rate)

    def test_deterministic(self, tiny_dataset):
        config = ForecastConfig(resamples=60, seed=1)
        a = rolling_validate(tiny_dataset, [2014], [2016], config)
        b = rolling_validate(tiny_dataset, [2014], [2016], config)
        assert a == b

    def test_respects_configured_qec(self, tiny_dataset):
        strict_qec = QecParams(p_th=3e-3)
        config = ForecastConfig(resamples=60, seed=1, qec=strict_qec)
        result = rolling_validate(tiny_dataset, [2016], [2019], config)
        cell = result.cell(2016, 2019)
        assert cell.actual == pytest.approx(
            generalized_logical_qubits(40, 2e-3, strict_qec).value)
