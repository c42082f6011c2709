"""
QUBO Solvers Module

This module provides an exhaustive oracle for small instances and a one-flip
tabu search for larger ones.

The oracle enumerates assignments in chunks with numpy. Bit (n - 1 - i) of
the enumeration counter holds x_i, so counter order is lexicographic order
and the first maximizer found is the lexicographically smallest.
"""
import logging
import time
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from app.models.qubo import Solution, check_magnitude, evaluate, fix_variables
from app.utils.config import (
    DEFAULT_SEED, LOG_FORMAT, LOG_LEVEL, ORACLE_MAX_N,
    TABU_MAX_ITERATIONS, TABU_TENURE, TABU_TIME_LIMIT,
)
from app.utils.errors import ContractViolation, QuboInputError

# Configure logging
logging.basicConfig(level=LOG_LEVEL, format=LOG_FORMAT)
logger = logging.getLogger('solvers')

CHUNK_BITS = 16


class OracleResult(NamedTuple):
    value: int
    assignment: tuple
    count: int


def _check_oracle_size(instance):
    if instance.n > ORACLE_MAX_N:
        raise QuboInputError(
            f"Brute force refuses n={instance.n} (limit {ORACLE_MAX_N})"
        )


def _chunk_values(diag, upper, counters, shifts):
    """Objective of every counter in ``counters`` as int64."""
    X = ((counters[:, None] >> shifts) & 1).astype(np.int64)
    return X @ diag + np.einsum('ij,ij->i', X @ upper, X)


def _scan(instance, collect=False):
    """
    Enumerate all 2^n assignments.

    Returns:
        tuple: (best value, first best counter, optimum count, all best counters or None)
    """
    _check_oracle_size(instance)
    check_magnitude(instance)
    n = instance.n
    dense = instance.to_dense()
    diag = np.diagonal(dense).copy()
    upper = np.triu(dense, k=1)
    shifts = np.arange(n - 1, -1, -1, dtype=np.int64)

    total = 1 << n
    chunk = 1 << min(CHUNK_BITS, n)
    best, best_counter, count = None, 0, 0
    optima = [] if collect else None
    for start in range(0, total, chunk):
        counters = np.arange(start, min(start + chunk, total), dtype=np.int64)
        values = _chunk_values(diag, upper, counters, shifts)
        top = int(values.max())
        if best is not None and top < best:
            continue
        hits = np.flatnonzero(values == top)
        if best is None or top > best:
            best, best_counter, count = top, int(counters[hits[0]]), 0
            if collect:
                optima = []
        count += len(hits)
        if collect:
            optima.extend(int(c) for c in counters[hits])
    return best, best_counter, count, optima


def _decode(counter, n):
    return tuple((counter >> (n - 1 - i)) & 1 for i in range(n))


def brute_force(instance):
    """
    Exact optimum by exhaustive enumeration.

    Args:
        instance (QuboInstance): Instance with n <= ORACLE_MAX_N

    Returns:
        OracleResult: (optimal value, lexicographically smallest optimal
        assignment, number of optimal assignments)
    """
    if instance.n == 0:
        return OracleResult(0, (), 1)
    best, counter, count, _ = _scan(instance)
    return OracleResult(best, _decode(counter, instance.n), count)


def enumerate_optima(instance):
    """Every optimal assignment, in lexicographic order."""
    if instance.n == 0:
        return [()]
    _, _, _, optima = _scan(instance, collect=True)
    return [_decode(counter, instance.n) for counter in optima]


def _normalize_fixings(fixings):
    """
    Accept a {variable: value} map, (variable, value) pairs, or Fixing records.

    Entries whose value is None are left free.
    """
    if isinstance(fixings, dict):
        items = fixings.items()
    else:
        items = [
            (f.variable, f.value) if hasattr(f, 'variable') else tuple(f)
            for f in fixings
        ]
    fixed = {}
    for variable, value in items:
        if value is None:
            continue
        value = int(value)
        if fixed.get(variable, value) != value:
            raise QuboInputError(f"Contradictory fixings for x{variable + 1}")
        fixed[variable] = value
    return fixed


def brute_force_constrained(instance, fixings):
    """
    Exact optimum over assignments that agree with ``fixings``.

    Args:
        instance (QuboInstance): Instance with n <= ORACLE_MAX_N
        fixings: {variable: 0/1}, (variable, value) pairs, or Fixing records

    Returns:
        int: Constrained optimal value
    """
    _check_oracle_size(instance)
    fixed = _normalize_fixings(fixings)
    sub, offset, _ = fix_variables(instance, fixed)
    return brute_force(sub).value + offset


@dataclass
class TabuParams:
    """
    Stopping rules and memory settings for tabu_search.

    ``tenure`` 0 picks n/4 clamped to [1, 20]; ``restart_after`` 0 disables
    perturbation restarts.
    """

    time_limit: float = TABU_TIME_LIMIT
    max_iterations: int = TABU_MAX_ITERATIONS
    tenure: int = TABU_TENURE
    seed: int = DEFAULT_SEED
    restart_after: int = 0

    def __post_init__(self):
        if self.tenure < 0:
            raise QuboInputError(f"Tabu tenure must be >= 0, got {self.tenure}")
        if self.restart_after < 0:
            raise QuboInputError(f"restart_after must be >= 0, got {self.restart_after}")
        if self.max_iterations is not None and self.max_iterations < 0:
            raise QuboInputError(f"max_iterations must be >= 0, got {self.max_iterations}")
        finite_time = self.time_limit is not None and np.isfinite(self.time_limit)
        if not finite_time and self.max_iterations is None:
            raise QuboInputError("Tabu search needs a time limit or an iteration limit")

    def effective_tenure(self, n):
        if self.tenure:
            return self.tenure
        return int(min(20, max(1, n // 4)))


class TabuState:
    """
    Current assignment with incrementally maintained flip gains.

    field[i] = c_ii + sum_j c_ij x_j, and gain[i] = (1 - 2 x_i) field[i] is the
    objective change of flipping x_i.
    """

    def __init__(self, instance, assignment=None):
        check_magnitude(instance)
        n = instance.n
        self.n = n
        self.x = np.zeros(n, dtype=np.int8) if assignment is None else np.array(assignment, dtype=np.int8)
        self.neighbors = []
        self.weights = []
        for i in range(n):
            row = instance.neighbors(i)
            self.neighbors.append(np.fromiter(row.keys(), dtype=np.int64, count=len(row)))
            self.weights.append(np.fromiter(row.values(), dtype=np.int64, count=len(row)))
        self.diag = np.array(instance.diag, dtype=np.int64)
        self.objective = evaluate(instance, self.x.tolist())
        self.field = self._fresh_field()
        self.gain = (1 - 2 * self.x.astype(np.int64)) * self.field

    def _fresh_field(self):
        field_ = self.diag.copy()
        for i in range(self.n):
            if len(self.neighbors[i]):
                field_[i] += int(self.weights[i] @ self.x[self.neighbors[i]].astype(np.int64))
        return field_

    def fresh_gains(self):
        """Gains recomputed from scratch (for consistency checks)."""
        return (1 - 2 * self.x.astype(np.int64)) * self._fresh_field()

    def flip(self, i):
        """Flip x_i and update objective, fields and gains in O(degree)."""
        self.objective += int(self.gain[i])
        delta = 1 - 2 * int(self.x[i])
        self.x[i] ^= 1
        self.gain[i] = -self.gain[i]
        nbrs, weights = self.neighbors[i], self.weights[i]
        if len(nbrs):
            change = weights * delta
            self.field[nbrs] += change
            self.gain[nbrs] += (1 - 2 * self.x[nbrs].astype(np.int64)) * change

    def assignment(self):
        return tuple(int(v) for v in self.x)


@dataclass
class TabuResult:
    """Best solution found plus search statistics."""

    solution: Solution
    iterations: int
    time_to_best: float
    elapsed: float
    history: list = field(default_factory=list)

    @property
    def objective(self):
        return self.solution.objective

    @property
    def assignment(self):
        return self.solution.assignment


def tabu_search(instance, params=None):
    """
    One-flip tabu search from the all-zero assignment.

    Each iteration flips the best non-tabu variable (lowest index on ties);
    a tabu flip is allowed when it beats the best objective found so far.

    Args:
        instance (QuboInstance): The instance
        params (TabuParams, optional): Limits, tenure and seed

    Returns:
        TabuResult: Best solution (objective verified by evaluate) and statistics
    """
    params = params or TabuParams()
    start = time.perf_counter()
    n = instance.n
    state = TabuState(instance)
    best_value, best_x = state.objective, state.assignment()
    history = [(0, best_value)]
    time_to_best = 0.0
    if n == 0:
        return TabuResult(Solution((), 0), 0, 0.0, 0.0, history)

    rng = np.random.default_rng(params.seed)
    tenure = params.effective_tenure(n)
    tabu_until = np.zeros(n, dtype=np.int64)
    max_iterations = params.max_iterations if params.max_iterations is not None else np.inf
    time_limit = params.time_limit if params.time_limit is not None else np.inf
    since_improvement = 0
    iteration = 0

    while iteration < max_iterations:
        if time.perf_counter() - start >= time_limit:
            logger.warning(f"Tabu search stopped on time limit after {iteration} iterations")
            break
        iteration += 1
        allowed = (tabu_until < iteration) | (state.objective + state.gain > best_value)
        if not allowed.any():
            tabu_until[:] = 0
            allowed[:] = True
        masked = np.where(allowed, state.gain, np.iinfo(np.int64).min)
        move = int(np.argmax(masked))
        state.flip(move)
        tabu_until[move] = iteration + tenure

        if state.objective > best_value:
            best_value, best_x = state.objective, state.assignment()
            time_to_best = time.perf_counter() - start
            history.append((iteration, best_value))
            since_improvement = 0
            logger.debug(f"Tabu iteration {iteration}: best {best_value}")
        else:
            since_improvement += 1

        if params.restart_after and since_improvement >= params.restart_after:
            for i in rng.choice(n, size=max(1, n // 10), replace=False):
                state.flip(int(i))
            tabu_until[:] = 0
            since_improvement = 0

    solution = Solution.of(instance, best_x)
    if solution.objective != best_value:
        raise ContractViolation(f"Tabu bookkeeping drifted: {best_value} != {solution.objective}")
    elapsed = time.perf_counter() - start
    logger.info(
        f"Tabu search n={n}: best {best_value} after {iteration} iterations "
        f"({time_to_best:.3f}s to best, {elapsed:.3f}s total)"
    )
    return TabuResult(solution, iteration, time_to_best, elapsed, history)
