#!/usr/bin/env python3
"""
Command-line entry point for the QUBO preprocessing toolkit.

Sub-commands:
  reduce       apply the fixing rules and write the reduced instance and report
  generate     write a generated instance (preset + design test, or explicit flags)
  solve        exact (brute) or tabu solve; prints the value and the 0/1 vector
  lift         map a reduced or expanded solution back to the original variables
  expand       enforce a maximum node degree by coupled chains
  sensitivity  CSV of allowable coefficient changes for determined rows
  stats        CSV coefficient histogram, optionally with before/after chart
  experiment   run the sixteen-test design and write runs/summary/effects CSVs
  robustness   percent-reduction distribution for one design point

Exit codes: 0 success, 1 usage error, 2 data error. Logs go to stderr.
"""
import argparse
import logging
import os
import sys
import time

# Add the project root to Python path
sys.path.insert(0, os.path.abspath(os.path.dirname(__file__)))

from app.analysis.sensitivity import sensitivity_table
from app.data.generator import (
    FACTOR_NAMES, GeneratorConfig, design_point, generate, histogram, make_config,
    plot_histograms, size_preset,
)
from app.data.instance_io import (
    format_solution, read_instance, read_solution, write_instance,
)
from app.data.reports import expansion_report, read_report, reduction_report, write_report
from app.experiments.harness import robustness, run_experiment
from app.models.expander import ExpansionLog, collapse_solution, enforce_degree_cap
from app.models.qubo import Solution
from app.models.reducer import ReductionLog, Rule, lift, reduce
from app.models.solvers import TabuParams, brute_force, tabu_search
from app.utils.config import (
    DEFAULT_SEED, EXIT_DATA, EXIT_OK, EXIT_USAGE, HUB_EDGE_SHARE, HUB_FRACTION,
    LOG_FORMAT, LOG_LEVEL, OUTPUT_DIR, TABU_MAX_ITERATIONS, TABU_TENURE,
    TABU_TIME_LIMIT, WORKERS,
)
from app.utils.errors import QproError, QuboInputError

# Configure logging
logging.basicConfig(level=LOG_LEVEL, format=LOG_FORMAT)
logger = logging.getLogger('qpro')


class UsageError(Exception):
    """Bad command-line usage (exit code 1)."""


class QproArgumentParser(argparse.ArgumentParser):
    """ArgumentParser whose usage errors exit with code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def parse_rules(text):
    """'1,2,3,5' -> (Rule.R1, Rule.R2, Rule.R3, Rule.R5)."""
    rules = []
    for token in text.split(','):
        token = token.strip().upper().lstrip('R')
        try:
            rules.append(Rule(f"R{token}"))
        except ValueError:
            raise argparse.ArgumentTypeError(f"unknown rule {token!r}; choose from 1, 2, 3, 5")
    return tuple(rules)


def parse_tests(text):
    """'1..16', '1-16' or '1,3,5' -> list of test ids."""
    for separator in ('..', '-'):
        if separator in text:
            low, high = text.split(separator, 1)
            try:
                return list(range(int(low), int(high) + 1))
            except ValueError:
                break
    try:
        return [int(token) for token in text.split(',')]
    except ValueError:
        raise argparse.ArgumentTypeError(f"cannot parse test list {text!r}")


def add_tabu_arguments(parser):
    parser.add_argument('--time-limit', type=float, default=TABU_TIME_LIMIT, help='Tabu wall-clock limit in seconds')
    parser.add_argument('--max-iterations', type=int, default=TABU_MAX_ITERATIONS, help='Tabu iteration limit')
    parser.add_argument('--tenure', type=int, default=TABU_TENURE, help='Tabu tenure (0 = automatic)')
    parser.add_argument('--restart-after', type=int, default=0,
                        help='Iterations without improvement before a perturbation (0 = never)')


def tabu_params_from(args):
    return TabuParams(
        time_limit=args.time_limit,
        max_iterations=args.max_iterations,
        tenure=args.tenure,
        seed=args.seed,
        restart_after=args.restart_after,
    )


def emit(text, path=None):
    """Write command output to ``path`` or stdout."""
    if path:
        with open(path, 'w') as f:
            f.write(text)
    else:
        sys.stdout.write(text)


# ----------------------------------------------------------------------
# Commands
# ----------------------------------------------------------------------

def cmd_reduce(args):
    original = read_instance(args.input)
    start = time.perf_counter()
    reduced, log = reduce(original, rules=args.rules)
    elapsed = time.perf_counter() - start
    write_instance(reduced, args.output, comments=[f"reduced from {args.input}, offset {log.offset}"])
    report = reduction_report(original, reduced, log, elapsed)
    if args.log:
        write_report(report, args.log)
    print(f"n {original.n} -> {reduced.n}, offset {log.offset}, passes {log.passes}, "
          f"fixed {log.fixed_count} ({log.percent_reduction():.1f}%)")
    return EXIT_OK


def cmd_generate(args):
    explicit = {
        name: getattr(args, name)
        for name in ('n', 'edges', *FACTOR_NAMES, 'hub_fraction', 'hub_edge_share')
        if getattr(args, name) is not None
    }
    if args.preset:
        if args.test is None:
            raise UsageError("--preset needs --test")
        config = make_config(args.preset, args.test, args.seed, **explicit)
    else:
        settings = design_point(args.test) if args.test is not None else {}
        settings.update(explicit)
        missing = [name for name in ('n', 'edges', 'ub') if name not in settings]
        if missing:
            raise UsageError(f"without --preset, give {', '.join('--' + m.replace('_', '-') for m in missing)}")
        config = GeneratorConfig(seed=args.seed, **settings)
    instance = generate(config)
    write_instance(instance, args.output, comments=[
        f"{key}={value}" for key, value in config.to_dict().items()
    ])
    print(f"{instance.n} {instance.entry_count}")
    return EXIT_OK


def cmd_solve(args):
    instance = read_instance(args.input)
    if args.method == 'brute':
        result = brute_force(instance)
        solution = Solution(result.assignment, result.value)
        logger.info(f"Brute force: {result.count} optimal assignment(s)")
    else:
        solution = tabu_search(instance, tabu_params_from(args)).solution
    emit(format_solution(solution), args.output)
    return EXIT_OK


def cmd_lift(args):
    _, log = read_report(args.report)
    solution = read_solution(args.solution)
    original = read_instance(args.original) if args.original else None
    if isinstance(log, ReductionLog):
        lifted = lift(log, solution, original=original)
    elif isinstance(log, ExpansionLog):
        assignment, consistent = collapse_solution(log, solution.assignment)
        if original is not None:
            lifted = Solution.of(original, assignment)
        elif consistent:
            lifted = Solution(tuple(assignment), solution.objective)
        else:
            raise QuboInputError("expanded solution breaks a coupling; pass --original to evaluate it")
    emit(format_solution(lifted), args.output)
    return EXIT_OK


def cmd_expand(args):
    original = read_instance(args.input)
    expanded, log = enforce_degree_cap(original, args.max_degree, penalty=args.penalty)
    write_instance(expanded, args.output, comments=[
        f"expanded from {args.input}, max degree {args.max_degree}, penalty {log.penalty}"
    ])
    if args.log:
        write_report(expansion_report(original, expanded, log, args.max_degree), args.log)
    print(f"n {original.n} -> {expanded.n}, max degree {expanded.max_degree()}")
    return EXIT_OK


def cmd_sensitivity(args):
    table = sensitivity_table(read_instance(args.input))
    emit(table.to_csv(index=False), args.output)
    return EXIT_OK


def cmd_stats(args):
    instance = read_instance(args.input)
    series = histogram(instance, args.hist)
    emit(series.reset_index().to_csv(index=False), args.output)
    if args.plot:
        reduced, _ = reduce(instance)
        plot_histograms(instance, reduced, args.hist, args.plot)
    return EXIT_OK


def experiment_overrides(args):
    overrides = {}
    if args.n is not None:
        overrides['n'] = args.n
    if args.edges is not None:
        overrides['edges'] = args.edges
    return overrides


def cmd_experiment(args):
    size_preset(args.preset)
    tabu_params = tabu_params_from(args) if args.solver == 'tabu' else None
    results = run_experiment(
        args.preset, tests=args.tests, seeds=args.seeds, output_dir=args.output,
        base_seed=args.seed, overrides=experiment_overrides(args), workers=args.workers,
        solver=args.solver, tabu_params=tabu_params, plot=args.plot,
    )
    summary = results['summary']
    print(summary[['test', 'runs', 'mean_percent_reduction', 'std_percent_reduction', 'mean_passes']]
          .to_string(index=False))
    if 'effects' in results:
        print()
        print(results['effects'].to_string(index=False))
        print()
        print(results['interactions'].to_string(index=False))
    return EXIT_OK


def cmd_robustness(args):
    _, summary = robustness(
        args.preset, args.test, args.samples, base_seed=args.seed, output_dir=args.output,
        overrides=experiment_overrides(args), plot=args.plot,
    )
    print(f"{summary['problem']} test {summary['test']}: mean {summary['mean']:.2f}%, "
          f"std {summary['std']:.2f}%, range [{summary['min']:.2f}, {summary['max']:.2f}] "
          f"over {summary['samples']} samples")
    return EXIT_OK


def build_parser():
    parser = QproArgumentParser(prog='qpro', description='QUBO preprocessing toolkit')
    sub = parser.add_subparsers(dest='command', required=True, parser_class=QproArgumentParser)

    p = sub.add_parser('reduce', help='Apply the fixing rules')
    p.add_argument('input', help='Instance file')
    p.add_argument('-o', '--output', required=True, help='Reduced instance file')
    p.add_argument('--log', help='Reduction report (JSON)')
    p.add_argument('--rules', type=parse_rules, default='1,2,3,5', help='Rules to enable, e.g. 1,2,3,5')
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser('generate', help='Generate an instance')
    p.add_argument('--preset', help='Size preset P1..P6')
    p.add_argument('--test', type=int, help='Design test id 1..16')
    p.add_argument('--seed', type=int, default=DEFAULT_SEED, help='Generator seed')
    p.add_argument('-o', '--output', required=True, help='Instance file')
    p.add_argument('--n', type=int, help='Node count')
    p.add_argument('--edges', type=int, help='Off-diagonal entry count')
    p.add_argument('--ub', type=int, help='Coefficient bound')
    p.add_argument('--lin-mult', dest='lin_mult', type=int, help='Linear multiplier')
    p.add_argument('--quad-mult', dest='quad_mult', type=int, help='Quadratic multiplier')
    p.add_argument('--pct-quad-mult', dest='pct_quad_mult', type=float, help='Fraction of quadratic entries multiplied')
    p.add_argument('--pct-lin-mult', dest='pct_lin_mult', type=float, help='Fraction of linear entries multiplied')
    p.add_argument('--pct-lin-nonzero', dest='pct_lin_nonzero', type=float, help='Fraction of nonzero linear terms')
    p.add_argument('--hub-fraction', dest='hub_fraction', type=float,
                   help=f'Fraction of hub nodes (default {HUB_FRACTION})')
    p.add_argument('--hub-edge-share', dest='hub_edge_share', type=float,
                   help=f'Fraction of extra edges touching a hub (default {HUB_EDGE_SHARE})')
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser('solve', help='Solve an instance')
    p.add_argument('input', help='Instance file')
    p.add_argument('--method', choices=['brute', 'tabu'], default='brute')
    p.add_argument('--seed', type=int, default=DEFAULT_SEED, help='Tabu seed')
    p.add_argument('-o', '--output', help='Solution file (stdout when omitted)')
    add_tabu_arguments(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser('lift', help='Map a solution back to the original variables')
    p.add_argument('report', help='Reduction or expansion report (JSON)')
    p.add_argument('solution', help='Solution of the reduced or expanded instance')
    p.add_argument('--original', help='Original instance, to evaluate the lifted solution')
    p.add_argument('-o', '--output', help='Solution file (stdout when omitted)')
    p.set_defaults(func=cmd_lift)

    p = sub.add_parser('expand', help='Enforce a maximum degree')
    p.add_argument('input', help='Instance file')
    p.add_argument('--max-degree', type=int, required=True, help='Degree cap m >= 2')
    p.add_argument('--penalty', type=int, help='Coupling penalty M < 0 (default: safe bound)')
    p.add_argument('-o', '--output', required=True, help='Expanded instance file')
    p.add_argument('--log', help='Expansion report (JSON)')
    p.set_defaults(func=cmd_expand)

    p = sub.add_parser('sensitivity', help='Allowable coefficient changes')
    p.add_argument('input', help='Instance file')
    p.add_argument('-o', '--output', help='CSV file (stdout when omitted)')
    p.set_defaults(func=cmd_sensitivity)

    p = sub.add_parser('stats', help='Coefficient histogram')
    p.add_argument('input', help='Instance file')
    p.add_argument('--hist', type=int, default=10, help='Bin width')
    p.add_argument('--plot', help='Save a before/after reduction histogram PNG')
    p.add_argument('-o', '--output', help='CSV file (stdout when omitted)')
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser('experiment', help='Run the sixteen-test design')
    p.add_argument('--preset', required=True, help='Size preset P1..P6')
    p.add_argument('--tests', type=parse_tests, default=list(range(1, 17)), help="Test ids, e.g. '1..16'")
    p.add_argument('--seeds', type=int, default=1, help='Seeds per test')
    p.add_argument('--seed', type=int, default=DEFAULT_SEED, help='First seed')
    p.add_argument('--n', type=int, help='Override the preset node count')
    p.add_argument('--edges', type=int, help='Override the preset edge count')
    p.add_argument('-o', '--output', default=OUTPUT_DIR, help='Output directory')
    p.add_argument('--workers', type=int, default=WORKERS, help='Parallel worker processes')
    p.add_argument('--solver', choices=['tabu'], help='Also compare tabu on original vs reduced')
    p.add_argument('--plot', action='store_true', help='Save the per-test reduction chart')
    add_tabu_arguments(p)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser('robustness', help='Reduction distribution for one design point')
    p.add_argument('--preset', required=True, help='Size preset P1..P6')
    p.add_argument('--test', type=int, required=True, help='Design test id 1..16')
    p.add_argument('--samples', type=int, default=30, help='Number of random instances')
    p.add_argument('--seed', type=int, default=DEFAULT_SEED, help='First seed')
    p.add_argument('--n', type=int, help='Override the preset node count')
    p.add_argument('--edges', type=int, help='Override the preset edge count')
    p.add_argument('-o', '--output', default=OUTPUT_DIR, help='Output directory')
    p.add_argument('--plot', action='store_true', help='Save a histogram PNG')
    p.set_defaults(func=cmd_robustness)
    return parser


def main(argv=None):
    """Parse arguments, run one command and return its exit code."""
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except QproError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_DATA
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
