"""
QUBO Instance Model

This module holds the canonical representation of a quadratic unconstrained
binary optimization instance (maximization sense), objective evaluation,
Ising conversion and the per-row aggregates C_i^+ / C_i^- / degree that the
reduction rules read.

Storage is one associative map per row over a compact 0-based index space,
kept symmetric: ``adj[i][j] == adj[j][i] == c_ij`` for every stored pair.
Zero off-diagonal entries are never stored.
"""
import logging
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from app.utils.config import INT64_MAX, INT64_MIN, LOG_FORMAT, LOG_LEVEL
from app.utils.errors import QuboInputError

# Configure logging
logging.basicConfig(level=LOG_LEVEL, format=LOG_FORMAT)
logger = logging.getLogger('qubo')

MAXIMIZE = "MAXIMIZE"


def checked_int(value):
    """
    Validate a coefficient as an exact 64-bit signed integer.

    Args:
        value: int, numpy integer, or integral Fraction

    Returns:
        int: The value as a Python int
    """
    if isinstance(value, Fraction):
        if value.denominator != 1:
            raise QuboInputError(f"Coefficient {value} is not an integer")
        value = value.numerator
    elif isinstance(value, (bool, np.bool_)):
        value = int(value)
    elif isinstance(value, (int, np.integer)):
        value = int(value)
    else:
        raise QuboInputError(f"Coefficient {value!r} is not an integer")
    if value < INT64_MIN or value > INT64_MAX:
        raise QuboInputError(f"Coefficient {value} overflows a 64-bit signed integer")
    return value


def check_magnitude(instance):
    """
    Refuse instances whose total coefficient magnitude exceeds int64.

    Any objective value, flip gain or partial sum is bounded by that total,
    so int64 vector arithmetic over an accepted instance cannot wrap.
    """
    total = instance.magnitude()
    if total > INT64_MAX:
        raise QuboInputError(
            f"Sum of |coefficients| {total} overflows a 64-bit signed integer"
        )
    return total


class RowAggregates:
    """
    Per-row sums of positive and negative off-diagonal coefficients and the
    off-diagonal degree, maintained incrementally as entries change.
    """

    def __init__(self, n=0):
        self.pos_sum = [0] * n
        self.neg_sum = [0] * n
        self.degree = [0] * n

    def grow(self):
        """Append an empty row."""
        self.pos_sum.append(0)
        self.neg_sum.append(0)
        self.degree.append(0)

    def update(self, i, old, new):
        """
        Account for one entry of row i changing from old to new (0 = absent).

        Args:
            i (int): Row index
            old (int): Previous coefficient
            new (int): New coefficient
        """
        if old > 0:
            self.pos_sum[i] -= old
        elif old < 0:
            self.neg_sum[i] -= old
        if new > 0:
            self.pos_sum[i] += new
        elif new < 0:
            self.neg_sum[i] += new
        self.degree[i] += (new != 0) - (old != 0)

    def row(self, i):
        """Return (posSum, negSum, degree) of row i."""
        return self.pos_sum[i], self.neg_sum[i], self.degree[i]

    def __len__(self):
        return len(self.degree)

    def __eq__(self, other):
        if not isinstance(other, RowAggregates):
            return NotImplemented
        return (self.pos_sum == other.pos_sum and self.neg_sum == other.neg_sum
                and self.degree == other.degree)

    def __repr__(self):
        return f"RowAggregates(rows={len(self)})"


class QuboInstance:
    """
    Sparse symmetric QUBO matrix: Maximize sum c_ii x_i + sum c_ij x_i x_j.

    Args:
        n (int): Number of variables (all coefficients start at zero)
    """

    sense = MAXIMIZE

    def __init__(self, n=0):
        if n < 0:
            raise QuboInputError(f"Variable count must be non-negative, got {n}")
        self.diag = [0] * n
        self.adj = [{} for _ in range(n)]
        self.aggregates = RowAggregates(n)

    # ------------------------------------------------------------------
    # Construction helpers
    # ------------------------------------------------------------------

    @classmethod
    def from_entries(cls, n, entries):
        """
        Build an instance from (i, j, value) triples with 0-based indices.

        A triple with i == j is a linear term. Pairs may be given in either
        order but each pair (and each linear term) at most once.
        """
        instance = cls(n)
        seen = set()
        for i, j, value in entries:
            key = (min(i, j), max(i, j))
            if key in seen:
                raise QuboInputError(f"Duplicate entry for pair {key}")
            seen.add(key)
            if i == j:
                instance.set_linear(i, value)
            else:
                instance.set_quadratic(i, j, value)
        return instance

    @classmethod
    def from_dict(cls, n, linear=None, quadratic=None):
        """Build from {i: c_ii} and {(i, j): c_ij} maps."""
        entries = [(i, i, v) for i, v in (linear or {}).items()]
        entries += [(i, j, v) for (i, j), v in (quadratic or {}).items()]
        return cls.from_entries(n, entries)

    @classmethod
    def from_dense(cls, matrix):
        """
        Build from a square integer matrix; upper and lower triangles are summed.
        """
        matrix = np.asarray(matrix)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise QuboInputError("Q must be a square 2-D array")
        n = matrix.shape[0]
        instance = cls(n)
        for i in range(n):
            instance.set_linear(i, matrix[i, i])
            for j in range(i + 1, n):
                value = int(matrix[i, j]) + int(matrix[j, i])
                if value:
                    instance.set_quadratic(i, j, value)
        return instance

    def to_dense(self):
        """Return the upper-triangular int64 matrix (diagonal = linear terms)."""
        matrix = np.zeros((self.n, self.n), dtype=np.int64)
        for i, value in enumerate(self.diag):
            matrix[i, i] = value
        for i, j, value in self.quadratic_items():
            matrix[i, j] = value
        return matrix

    def copy(self):
        """Deep copy with independent storage and aggregates."""
        clone = QuboInstance(0)
        clone.diag = list(self.diag)
        clone.adj = [dict(row) for row in self.adj]
        clone.aggregates = RowAggregates(0)
        clone.aggregates.pos_sum = list(self.aggregates.pos_sum)
        clone.aggregates.neg_sum = list(self.aggregates.neg_sum)
        clone.aggregates.degree = list(self.aggregates.degree)
        return clone

    def subinstance(self, keep):
        """
        Restrict to the variables in ``keep`` (ascending), re-indexed 0..len-1.

        Entries between a kept and a dropped variable are discarded.

        Returns:
            QuboInstance: The compacted instance
        """
        position = {old: new for new, old in enumerate(keep)}
        sub = QuboInstance(len(keep))
        for new, old in enumerate(keep):
            sub.set_linear(new, self.diag[old])
            for j, value in self.adj[old].items():
                if j > old and j in position:
                    sub.set_quadratic(new, position[j], value)
        return sub

    # ------------------------------------------------------------------
    # Access
    # ------------------------------------------------------------------

    @property
    def n(self):
        return len(self.diag)

    def _check_index(self, i):
        if not isinstance(i, (int, np.integer)) or i < 0 or i >= self.n:
            raise QuboInputError(f"Index {i} out of range [0, {self.n})")

    def coefficient(self, i, j):
        """c_ij with symmetric access; c_ii when i == j."""
        self._check_index(i)
        self._check_index(j)
        if i == j:
            return self.diag[i]
        return self.adj[i].get(j, 0)

    def neighbors(self, i):
        """Read-only view of row i's off-diagonal entries {j: c_ij}."""
        return self.adj[i]

    def degree(self, i):
        return len(self.adj[i])

    def quadratic_items(self):
        """Yield (i, j, c_ij) with i < j in ascending order."""
        for i in range(self.n):
            for j in sorted(self.adj[i]):
                if j > i:
                    yield i, j, self.adj[i][j]

    @property
    def offdiag(self):
        """Off-diagonal entries as {(i, j): c_ij} with i < j."""
        return {(i, j): value for i, j, value in self.quadratic_items()}

    @property
    def edge_count(self):
        return sum(self.aggregates.degree) // 2

    @property
    def entry_count(self):
        """Stored entries in row-col-value form: nonzero linear terms plus edges."""
        return sum(1 for value in self.diag if value) + self.edge_count

    def max_degree(self):
        return max(self.aggregates.degree, default=0)

    def coefficient_values(self):
        """All n diagonal values followed by every stored off-diagonal value."""
        return list(self.diag) + [value for _, _, value in self.quadratic_items()]

    def magnitude(self):
        """Sum of |c| over the diagonal and every stored off-diagonal entry."""
        return sum(abs(value) for value in self.coefficient_values())

    # ------------------------------------------------------------------
    # Mutation (single writer)
    # ------------------------------------------------------------------

    def set_linear(self, i, value):
        self._check_index(i)
        self.diag[i] = checked_int(value)

    def add_linear(self, i, delta):
        self._check_index(i)
        self.diag[i] = checked_int(self.diag[i] + checked_int(delta))

    def set_quadratic(self, i, j, value):
        """Set c_ij (both directions); a zero value removes the entry."""
        self._check_index(i)
        self._check_index(j)
        if i == j:
            raise QuboInputError(f"Self-loop ({i}, {i}) is not an off-diagonal entry")
        value = checked_int(value)
        old = self.adj[i].get(j, 0)
        if value:
            self.adj[i][j] = value
            self.adj[j][i] = value
        elif old:
            del self.adj[i][j]
            del self.adj[j][i]
        self.aggregates.update(i, old, value)
        self.aggregates.update(j, old, value)

    def add_quadratic(self, i, j, delta):
        self.set_quadratic(i, j, self.coefficient(i, j) + checked_int(delta))

    def remove_quadratic(self, i, j):
        self.set_quadratic(i, j, 0)

    def isolate(self, i):
        """
        Remove every off-diagonal entry of row/column i in O(degree).

        Returns:
            dict: The removed entries {j: c_ij}
        """
        self._check_index(i)
        removed = self.adj[i]
        for j, value in removed.items():
            del self.adj[j][i]
            self.aggregates.update(j, value, 0)
        self.adj[i] = {}
        self.aggregates.pos_sum[i] = 0
        self.aggregates.neg_sum[i] = 0
        self.aggregates.degree[i] = 0
        return removed

    def add_variable(self, linear=0):
        """Append a new variable and return its index."""
        self.diag.append(checked_int(linear))
        self.adj.append({})
        self.aggregates.grow()
        return self.n - 1

    def __eq__(self, other):
        if not isinstance(other, QuboInstance):
            return NotImplemented
        return self.diag == other.diag and self.offdiag == other.offdiag

    def __repr__(self):
        return f"QuboInstance(n={self.n}, edges={self.edge_count})"


@dataclass(frozen=True)
class Solution:
    """A 0/1 assignment together with its objective value."""

    assignment: tuple
    objective: int

    @classmethod
    def of(cls, instance, assignment):
        """Evaluate ``assignment`` on ``instance`` and wrap the result."""
        assignment = tuple(int(v) for v in assignment)
        return cls(assignment, evaluate(instance, assignment))

    @property
    def n(self):
        return len(self.assignment)


def _as_binary_vector(assignment, n):
    values = [int(v) for v in assignment]
    if len(values) != n:
        raise QuboInputError(f"Assignment length {len(values)} does not match n={n}")
    if any(v not in (0, 1) for v in values):
        raise QuboInputError("Assignment values must be 0 or 1")
    return values


def evaluate(instance, assignment):
    """
    Evaluate sum c_ii x_i + sum_{i<j} c_ij x_i x_j.

    Args:
        instance (QuboInstance): The instance
        assignment (sequence): 0/1 values, length n

    Returns:
        int: Objective value
    """
    x = _as_binary_vector(assignment, instance.n)
    total = 0
    for i, xi in enumerate(x):
        if not xi:
            continue
        total += instance.diag[i]
        for j, value in instance.adj[i].items():
            if j > i and x[j]:
                total += value
    return checked_int(total)


def recompute_aggregates(instance):
    """
    Compute posSum / negSum / degree for every row from scratch.

    Returns:
        RowAggregates: Fresh aggregates for ``instance``
    """
    aggregates = RowAggregates(instance.n)
    for i in range(instance.n):
        for value in instance.adj[i].values():
            aggregates.update(i, 0, value)
    return aggregates


def from_ising(h, J):
    """
    Convert an Ising model to a QUBO by substituting s = 2x - 1.

    Ising energy sum h_i s_i + sum J_ij s_i s_j equals the returned
    instance's objective plus the returned constant for every x.

    Args:
        h (sequence): Per-spin fields
        J (dict): {(i, j): J_ij}, i != j; (i, j) and (j, i) accumulate

    Returns:
        tuple: (QuboInstance, constant); the constant is an int for integer
        fields and couplings, a Fraction otherwise
    """
    n = len(h)
    linear = [Fraction(2) * Fraction(value) for value in h]
    quadratic = {}
    constant = -sum((Fraction(value) for value in h), Fraction(0))
    for (i, j), value in J.items():
        if i == j:
            raise QuboInputError(f"Self-coupling J[{i},{j}] is not allowed")
        if not (0 <= i < n and 0 <= j < n):
            raise QuboInputError(f"Coupling ({i}, {j}) out of range [0, {n})")
        value = Fraction(value)
        key = (min(i, j), max(i, j))
        quadratic[key] = quadratic.get(key, Fraction(0)) + 4 * value
        linear[i] -= 2 * value
        linear[j] -= 2 * value
        constant += value
    instance = QuboInstance(n)
    for i, value in enumerate(linear):
        instance.set_linear(i, value)
    for (i, j), value in quadratic.items():
        if value:
            instance.set_quadratic(i, j, value)
    if constant.denominator == 1:
        constant = checked_int(constant)
    return instance, constant


def to_ising(instance):
    """
    Convert a QUBO to Ising form with x = (s + 1) / 2, using exact fractions.

    Returns:
        tuple: (h list, J dict {(i, j): J_ij} with i < j, constant) such that
        objective(x) == sum h_i s_i + sum J_ij s_i s_j + constant
    """
    h = [Fraction(value, 2) for value in instance.diag]
    constant = sum((Fraction(value, 2) for value in instance.diag), Fraction(0))
    J = {}
    for i, j, value in instance.quadratic_items():
        quarter = Fraction(value, 4)
        J[(i, j)] = quarter
        h[i] += quarter
        h[j] += quarter
        constant += quarter
    return h, J, constant


def ising_energy(h, J, spins):
    """Evaluate sum h_i s_i + sum J_ij s_i s_j for spins in {-1, +1}."""
    energy = sum(hi * si for hi, si in zip(h, spins))
    energy += sum(value * spins[i] * spins[j] for (i, j), value in J.items())
    return energy


def fix_variables(instance, fixed):
    """
    Condition an instance on fixed variable values.

    Args:
        instance (QuboInstance): The instance
        fixed (dict): {variable: 0 or 1}

    Returns:
        tuple: (sub-instance over the free variables, constant offset,
        remap list sub-index -> original index)
    """
    for variable, value in fixed.items():
        instance._check_index(variable)
        if value not in (0, 1):
            raise QuboInputError(f"Fixed value for x{variable} must be 0 or 1, got {value}")
    free = [i for i in range(instance.n) if i not in fixed]
    sub = instance.subinstance(free)
    position = {old: new for new, old in enumerate(free)}
    offset = 0
    for i in sorted(v for v, value in fixed.items() if value == 1):
        offset += instance.diag[i]
        for j, value in instance.adj[i].items():
            if j in position:
                sub.add_linear(position[j], value)
            elif j > i and fixed.get(j) == 1:
                offset += value
    return sub, checked_int(offset), free
