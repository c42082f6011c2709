"""
Tests for the experiment harness: per-cell runs, summaries, effects and robustness.
"""
import os
import sys

import pandas as pd
import pytest

# Add the project root to Python path
sys.path.insert(0, os.path.abspath(os.path.dirname(__file__)))

from app.experiments.harness import effects_tables, robustness, run_cell, run_experiment
from app.models.solvers import TabuParams
from app.utils.errors import QuboInputError

SMALL = {'n': 200, 'edges': 1000}


class TestRunCell:
    """Single (test, seed) cells."""

    def test_record_columns(self):
        record = run_cell('P1', 3, 1, overrides=SMALL)
        assert record['n'] == 200
        assert record['fixed'] == sum(record[rule] for rule in ('R1', 'R2', 'R3', 'R5'))
        assert record['reduced_n'] == 200 - record['fixed']
        assert 0.0 <= record['percent_reduction'] <= 100.0
        assert 'optimum_match' not in record

    def test_oracle_check_on_small_cells(self):
        for seed in range(5):
            record = run_cell('P1', 16, seed, overrides={'n': 20, 'edges': 30})
            assert record['optimum_match']

    def test_tabu_comparison(self):
        params = TabuParams(max_iterations=200, time_limit=None, seed=3)
        record = run_cell('P1', 3, 2, overrides={'n': 18, 'edges': 30}, solver='tabu', tabu_params=params)
        assert record['tabu_objective_difference'] == record['tabu_reduced_objective'] - record['tabu_objective']


class TestRunExperiment:
    """Full and partial designs."""

    def test_full_design(self, tmp_path):
        results = run_experiment('P1', seeds=1, output_dir=str(tmp_path), overrides=SMALL, plot=True)
        assert len(results['runs']) == 16
        assert len(results['summary']) == 16
        assert list(results['effects']['factor']) == [1, 2, 3, 4, 5, 6]
        assert len(results['interactions']) == 7
        for name in ('runs', 'summary', 'effects', 'interactions', 'design'):
            assert (tmp_path / f"{name}.csv").exists()
        design = pd.read_csv(tmp_path / 'design.csv')
        assert list(design.columns) == ['test', 'f1', 'f2', 'f3', 'f4', 'f5', 'f6']
        assert list(design['test']) == list(range(1, 17))
        assert (design.drop(columns='test').sum() == 0).all()
        assert (tmp_path / 'reduction_by_test.png').exists()
        summary = pd.read_csv(tmp_path / 'summary.csv')
        assert {'ub', 'quad_mult', 'mean_percent_reduction'} <= set(summary.columns)

    def test_partial_design_has_no_effects(self):
        results = run_experiment('P1', tests=[1, 3], seeds=2, overrides=SMALL)
        assert len(results['runs']) == 4
        assert list(results['summary']['runs']) == [2, 2]
        assert 'effects' not in results
        assert 'design' not in results

    def test_worker_pool_matches_inline(self):
        small = {'n': 60, 'edges': 150}
        inline = run_experiment('P1', tests=[2, 5], seeds=2, overrides=small, workers=1)
        pooled = run_experiment('P1', tests=[2, 5], seeds=2, overrides=small, workers=2)
        columns = ['test', 'seed', 'fixed', 'passes']
        pd.testing.assert_frame_equal(inline['runs'][columns], pooled['runs'][columns])

    def test_effects_need_all_tests(self):
        results = run_experiment('P1', tests=[1], overrides=SMALL)
        with pytest.raises(QuboInputError):
            effects_tables(results['summary'])

    def test_no_seeds(self):
        with pytest.raises(QuboInputError):
            run_experiment('P1', seeds=0, overrides=SMALL)


class TestRobustness:
    """Repeated instances of one design point."""

    def test_summary_and_files(self, tmp_path):
        table, summary = robustness('p1', 3, 5, output_dir=str(tmp_path), overrides=SMALL, plot=True)
        assert len(table) == 5
        assert summary['problem'] == 'P1'
        assert summary['min'] <= summary['mean'] <= summary['max']
        for name in ('robustness.csv', 'robustness_summary.csv', 'robustness.png'):
            assert (tmp_path / name).exists()

    def test_needs_a_sample(self):
        with pytest.raises(QuboInputError):
            robustness('P1', 3, 0, overrides=SMALL)
