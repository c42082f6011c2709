"""
Experiment Harness Module

This module runs reduction experiments over the sixteen-run design: for every
(test id, seed) cell it generates an instance, reduces it, and records the
percent reduction, per-rule counts, pass count and timing. Small instances
are also checked against the exact oracle, and an optional tabu comparison
runs the heuristic on the original and on the reduced-then-lifted instance.

Outputs are CSV tables (runs, per-test summary, effects, interactions) and
optional PNG charts.
"""
import logging
import os
import time
from concurrent.futures import ProcessPoolExecutor

import matplotlib
matplotlib.use('Agg')
import matplotlib.pyplot as plt
import numpy as np
import pandas as pd

from app.analysis.effects import DesignMatrix, main_effects
from app.data.generator import DESIGN_TABLE, FACTOR_NAMES, generate, make_config
from app.models.reducer import ALL_RULES, lift, reduce
from app.models.solvers import TabuParams, brute_force, tabu_search
from app.utils.config import DEFAULT_SEED, LOG_FORMAT, LOG_LEVEL, ORACLE_MAX_N, WORKERS
from app.utils.errors import QuboInputError

# Configure logging
logging.basicConfig(level=LOG_LEVEL, format=LOG_FORMAT)
logger = logging.getLogger('harness')

RULE_COLUMNS = [rule.value for rule in ALL_RULES]


def run_cell(problem_id, test_id, seed, overrides=None, solver=None, tabu_params=None):
    """
    Generate, reduce and measure one (test id, seed) cell.

    Args:
        problem_id (str): Size preset P1..P6
        test_id (int): Design row 1..16
        seed (int): Generator seed
        overrides (dict, optional): GeneratorConfig overrides (e.g. n, edges)
        solver (str, optional): 'tabu' to compare tabu on original vs reduced
        tabu_params (TabuParams, optional): Tabu limits for the comparison

    Returns:
        dict: One row of the runs table
    """
    config = make_config(problem_id, test_id, seed, **(overrides or {}))
    original = generate(config)
    start = time.perf_counter()
    reduced, log = reduce(original)
    elapsed = time.perf_counter() - start

    record = {
        'test': test_id,
        'seed': seed,
        'n': original.n,
        'entries': original.entry_count,
        'fixed': log.fixed_count,
        'percent_reduction': log.percent_reduction(),
        **log.rule_counts(),
        'passes': log.passes,
        'reduced_n': reduced.n,
        'reduced_entries': reduced.entry_count,
        'reduce_seconds': elapsed,
    }
    if original.n <= ORACLE_MAX_N:
        record['optimum_match'] = brute_force(original).value == brute_force(reduced).value + log.offset

    if solver == 'tabu':
        params = tabu_params or TabuParams(seed=seed)
        direct = tabu_search(original, params)
        via_reduced = tabu_search(reduced, params)
        lifted = lift(log, via_reduced.solution, original=original)
        record.update({
            'tabu_objective': direct.objective,
            'tabu_time_to_best': direct.time_to_best,
            'tabu_reduced_objective': lifted.objective,
            'tabu_reduced_time_to_best': via_reduced.time_to_best,
            'tabu_objective_difference': lifted.objective - direct.objective,
        })
    logger.info(
        f"Test {test_id} seed {seed}: {record['percent_reduction']:.1f}% reduced "
        f"in {log.passes} passes ({elapsed:.3f}s)"
    )
    return record


def _run_cell_task(task):
    return run_cell(*task)


def _run_cells(tasks, workers):
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_run_cell_task, tasks))
    return [_run_cell_task(task) for task in tasks]


def summarize_runs(runs):
    """Per-test means and spread, with the design settings of each test."""
    grouped = runs.groupby('test')
    summary = grouped.agg(
        runs=('seed', 'count'),
        mean_percent_reduction=('percent_reduction', 'mean'),
        std_percent_reduction=('percent_reduction', 'std'),
        mean_passes=('passes', 'mean'),
        max_passes=('passes', 'max'),
        mean_reduce_seconds=('reduce_seconds', 'mean'),
        **{f"mean_{rule}": (rule, 'mean') for rule in RULE_COLUMNS},
    ).reset_index()
    summary['std_percent_reduction'] = summary['std_percent_reduction'].fillna(0.0)
    settings = pd.DataFrame(
        [dict(zip(FACTOR_NAMES, DESIGN_TABLE[t]), test=t) for t in summary['test']]
    )
    return summary.merge(settings, on='test')


def effects_tables(summary):
    """
    Main-effect and interaction tables from a complete sixteen-test summary.

    Returns:
        tuple: (effects DataFrame, interactions DataFrame)
    """
    if sorted(summary['test']) != sorted(DESIGN_TABLE):
        raise QuboInputError("Effects need one summary row for each of the 16 tests")
    design = DesignMatrix.from_design_table()
    responses = summary.sort_values('test')['mean_percent_reduction'].to_numpy()
    result = main_effects(design, responses)
    return result.main_frame(), result.interaction_frame()


def plot_reduction_by_test(summary, path):
    """Bar chart of mean percent reduction per test with one-std error bars."""
    plt.figure(figsize=(10, 5))
    plt.bar(summary['test'].astype(str), summary['mean_percent_reduction'],
            yerr=summary['std_percent_reduction'], capsize=3)
    plt.xlabel('Test')
    plt.ylabel('Percent reduction')
    plt.title('Mean Percent Reduction by Design Test')
    plt.savefig(path)
    plt.close()
    logger.info(f"Saved reduction chart to {path}")


def run_experiment(problem_id, tests=None, seeds=1, output_dir=None, base_seed=DEFAULT_SEED,
                   overrides=None, workers=WORKERS, solver=None, tabu_params=None, plot=False):
    """
    Run every (test, seed) cell and write the result tables.

    Args:
        problem_id (str): Size preset P1..P6
        tests (iterable, optional): Test ids; all sixteen by default
        seeds (int): Seeds per test (base_seed, base_seed + 1, ...)
        output_dir (str, optional): Where CSVs and charts go; nothing is written when None
        base_seed (int): First seed
        overrides (dict, optional): GeneratorConfig overrides applied to every cell
        workers (int): Process pool size; 1 runs inline
        solver (str, optional): 'tabu' adds the tabu comparison columns
        tabu_params (TabuParams, optional): Tabu limits
        plot (bool): Also save the per-test bar chart

    Returns:
        dict: DataFrames 'runs', 'summary' and, for full designs, 'effects',
        'interactions' and the coded 'design'
    """
    tests = sorted(tests or DESIGN_TABLE)
    if seeds < 1:
        raise QuboInputError(f"At least one seed per test is required, got {seeds}")
    tasks = [
        (problem_id, test_id, base_seed + k, overrides, solver, tabu_params)
        for test_id in tests for k in range(seeds)
    ]
    logger.info(f"Running {len(tasks)} cells ({len(tests)} tests x {seeds} seeds) with {workers} worker(s)")
    runs = pd.DataFrame(_run_cells(tasks, workers)).sort_values(['test', 'seed']).reset_index(drop=True)
    results = {'runs': runs, 'summary': summarize_runs(runs)}
    if len(tests) == len(DESIGN_TABLE):
        results['effects'], results['interactions'] = effects_tables(results['summary'])
        results['design'] = DesignMatrix.from_design_table().to_frame().reset_index()

    if output_dir:
        os.makedirs(output_dir, exist_ok=True)
        for name, table in results.items():
            path = os.path.join(output_dir, f"{name}.csv")
            table.to_csv(path, index=False)
            logger.info(f"Wrote {name} table to {path}")
        if plot:
            plot_reduction_by_test(results['summary'], os.path.join(output_dir, 'reduction_by_test.png'))
    return results


def robustness(problem_id, test_id, samples, base_seed=DEFAULT_SEED, output_dir=None,
               overrides=None, plot=False):
    """
    Percent-reduction distribution over repeated instances of one design point.

    Returns:
        tuple: (samples DataFrame, summary dict with mean, std, min and max)
    """
    if samples < 1:
        raise QuboInputError(f"At least one sample is required, got {samples}")
    records = []
    for k in range(samples):
        seed = base_seed + k
        config = make_config(problem_id, test_id, seed, **(overrides or {}))
        _, log = reduce(generate(config))
        records.append({'sample': k + 1, 'seed': seed, 'percent_reduction': log.percent_reduction(),
                        'passes': log.passes})
    table = pd.DataFrame(records)
    values = table['percent_reduction'].to_numpy()
    summary = {
        'problem': str(problem_id).upper(),
        'test': test_id,
        'samples': samples,
        'mean': float(values.mean()),
        'std': float(values.std(ddof=1)) if samples > 1 else 0.0,
        'min': float(values.min()),
        'max': float(values.max()),
    }
    logger.info(
        f"Robustness {summary['problem']} test {test_id}: "
        f"{summary['mean']:.1f}% +/- {summary['std']:.1f}% over {samples} samples"
    )
    if output_dir:
        os.makedirs(output_dir, exist_ok=True)
        table.to_csv(os.path.join(output_dir, 'robustness.csv'), index=False)
        pd.DataFrame([summary]).to_csv(os.path.join(output_dir, 'robustness_summary.csv'), index=False)
        if plot:
            plt.figure(figsize=(8, 5))
            plt.hist(values, bins=np.linspace(0, 100, 41))
            plt.xlabel('Percent reduction')
            plt.ylabel('Instances')
            plt.title(f"Reduction Distribution: {summary['problem']}, Test {test_id}")
            path = os.path.join(output_dir, 'robustness.png')
            plt.savefig(path)
            plt.close()
            logger.info(f"Saved robustness histogram to {path}")
    return table, summary
