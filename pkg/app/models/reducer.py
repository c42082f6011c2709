"""
QUBO Reduction Module

This module fixes variables at provably optimal values and folds them out of
the Q matrix, iterating to a fixpoint:

- Rule 1: c_ii + C_i^- >= 0  ->  x_i = 1 (c_ii joins the offset, row i is
  folded into its neighbours' diagonals)
- Rule 2: c_ii + C_i^+ <= 0  ->  x_i = 0
- Rule 3: c_ih > 0 and c_ii + c_hh + c_ih + C_i^- + C_h^- >= 0, with Rule 1
  failing for both  ->  x_i = x_h = 1
- Rule 5: an all-zero row is eliminated (lifted as 0)

Rule 4 (x_i + x_h <= 1) is detected but never applied.
"""
import logging
import time
from dataclasses import dataclass, field
from enum import Enum

from app.models.qubo import QuboInstance, Solution, checked_int, evaluate
from app.utils.config import LOG_FORMAT, LOG_LEVEL
from app.utils.errors import ContractViolation, QuboInputError

# Configure logging
logging.basicConfig(level=LOG_LEVEL, format=LOG_FORMAT)
logger = logging.getLogger('reducer')

FREE = None


class Rule(str, Enum):
    R1 = "R1"
    R2 = "R2"
    R3 = "R3"
    R5 = "R5"


class Rule4Mode(str, Enum):
    LITERAL = "literal"
    ANALOG = "analog"


ALL_RULES = (Rule.R1, Rule.R2, Rule.R3, Rule.R5)


@dataclass(frozen=True)
class Fixing:
    """One determined variable: original index, value (0, 1 or FREE), rule, pass."""

    variable: int
    value: object
    rule: Rule
    pass_number: int

    def __post_init__(self):
        if self.value is FREE and self.rule is not Rule.R5:
            raise QuboInputError("Only Rule 5 may leave a variable FREE")
        if self.value is not FREE and self.value not in (0, 1):
            raise QuboInputError(f"Fixed value must be 0, 1 or FREE, got {self.value!r}")

    @property
    def lift_value(self):
        return 0 if self.value is FREE else self.value


@dataclass
class ReductionLog:
    """Everything needed to map a reduced solution back to original coordinates."""

    original_n: int
    fixings: list = field(default_factory=list)
    offset: int = 0
    passes: int = 0
    remap: list = field(default_factory=list)
    pass_history: list = field(default_factory=list)

    @property
    def reduced_n(self):
        return len(self.remap)

    @property
    def fixed_count(self):
        return len(self.fixings)

    def rule_counts(self):
        """Number of variables fixed by each rule."""
        counts = {rule.value: 0 for rule in ALL_RULES}
        for fixing in self.fixings:
            counts[fixing.rule.value] += 1
        return counts

    def percent_reduction(self):
        if self.original_n == 0:
            return 0.0
        return 100.0 * self.fixed_count / self.original_n

    def to_dict(self):
        """Serializable form with 1-based variable indices."""
        return {
            "original_n": self.original_n,
            "offset": self.offset,
            "passes": self.passes,
            "pass_history": list(self.pass_history),
            "fixings": [
                {
                    "variable": f.variable + 1,
                    "value": "free" if f.value is FREE else f.value,
                    "rule": f.rule.value,
                    "pass": f.pass_number,
                }
                for f in self.fixings
            ],
            "remap": [original + 1 for original in self.remap],
        }

    @classmethod
    def from_dict(cls, data):
        try:
            fixings = [
                Fixing(
                    variable=int(item["variable"]) - 1,
                    value=FREE if item["value"] == "free" else int(item["value"]),
                    rule=Rule(item["rule"]),
                    pass_number=int(item["pass"]),
                )
                for item in data["fixings"]
            ]
            log = cls(
                original_n=int(data["original_n"]),
                fixings=fixings,
                offset=int(data["offset"]),
                passes=int(data["passes"]),
                remap=[int(v) - 1 for v in data["remap"]],
                pass_history=[int(v) for v in data.get("pass_history", [])],
            )
        except (KeyError, TypeError, ValueError) as e:
            raise QuboInputError(f"Malformed reduction log: {e}") from e
        log.validate()
        return log

    def validate(self):
        """Check that fixings and remap partition the original variables."""
        fixed = [f.variable for f in self.fixings]
        if len(set(fixed)) != len(fixed):
            raise QuboInputError("A variable is fixed more than once")
        if len(set(self.remap)) != len(self.remap):
            raise QuboInputError("Remap is not injective")
        covered = set(fixed) | set(self.remap)
        if len(fixed) + len(self.remap) != self.original_n or covered != set(range(self.original_n)):
            raise QuboInputError("Fixings and remap do not cover the original variables exactly")


class Reducer:
    """
    Working state of one reduction: a private copy of the instance whose
    removed rows are isolated, plus the offset and the fixings so far.

    Args:
        instance (QuboInstance): Instance to reduce (not modified)
    """

    def __init__(self, instance):
        self.instance = instance.copy()
        self.alive = [True] * instance.n
        self.offset = 0
        self.fixings = []
        self.current_pass = 0

    def _require_alive(self, i):
        self.instance._check_index(i)
        if not self.alive[i]:
            raise QuboInputError(f"Row {i} has already been removed")

    def surviving(self):
        return [i for i, alive in enumerate(self.alive) if alive]

    # ------------------------------------------------------------------
    # Rule conditions
    # ------------------------------------------------------------------

    def rule1_holds(self, i):
        self._require_alive(i)
        return self.instance.diag[i] + self.instance.aggregates.neg_sum[i] >= 0

    def rule2_holds(self, i):
        self._require_alive(i)
        return self.instance.diag[i] + self.instance.aggregates.pos_sum[i] <= 0

    def rule5_holds(self, i):
        self._require_alive(i)
        return self.instance.diag[i] == 0 and self.instance.aggregates.degree[i] == 0

    def rule3_holds(self, i, h):
        """False whenever the pair does not meet Rule 3's preconditions."""
        self._require_alive(i)
        self._require_alive(h)
        if i == h:
            return False
        c_ih = self.instance.adj[i].get(h, 0)
        if c_ih <= 0 or self.rule1_holds(i) or self.rule1_holds(h):
            return False
        q = self.instance
        return q.diag[i] + q.diag[h] + c_ih + q.aggregates.neg_sum[i] + q.aggregates.neg_sum[h] >= 0

    # ------------------------------------------------------------------
    # Rule applications
    # ------------------------------------------------------------------

    def _record(self, variable, value, rule):
        fixing = Fixing(variable, value, rule, self.current_pass)
        self.fixings.append(fixing)
        self.alive[variable] = False
        logger.debug(f"{rule.value}: x{variable} = {'free' if value is FREE else value}")
        return fixing

    def _fold_into_neighbors(self, i, skip=None):
        removed = self.instance.isolate(i)
        for j, value in removed.items():
            if j != skip:
                self.instance.add_linear(j, value)
        self.instance.set_linear(i, 0)
        return removed

    def apply_rule1(self, i):
        if not self.rule1_holds(i):
            raise ContractViolation(f"Rule 1 does not hold for row {i}")
        self.offset = checked_int(self.offset + self.instance.diag[i])
        self._fold_into_neighbors(i)
        return self._record(i, 1, Rule.R1)

    def apply_rule2(self, i):
        if not self.rule2_holds(i):
            raise ContractViolation(f"Rule 2 does not hold for row {i}")
        self.instance.isolate(i)
        self.instance.set_linear(i, 0)
        return self._record(i, 0, Rule.R2)

    def apply_rule5(self, i):
        if not self.rule5_holds(i):
            raise ContractViolation(f"Rule 5 does not hold for row {i}")
        return self._record(i, FREE, Rule.R5)

    def apply_rule3(self, i, h):
        if not self.rule3_holds(i, h):
            raise ContractViolation(f"Rule 3 does not hold for pair ({i}, {h})")
        q = self.instance
        self.offset = checked_int(self.offset + q.diag[i] + q.diag[h] + q.adj[i][h])
        self._fold_into_neighbors(i, skip=h)
        self._fold_into_neighbors(h)
        return self._record(i, 1, Rule.R3), self._record(h, 1, Rule.R3)

    # ------------------------------------------------------------------
    # Rule 4 (detection only)
    # ------------------------------------------------------------------

    def detect_rule4(self, mode=Rule4Mode.ANALOG):
        """
        Pairs (i, h), i < h, for which x_i + x_h <= 1 holds at some optimum.

        LITERAL tests the condition with c_ih > 0, ANALOG with c_ih < 0; both
        require Rule 2 to fail for i and h.
        """
        mode = Rule4Mode(mode)
        q = self.instance
        pairs = []
        for i in self.surviving():
            if self.rule2_holds(i):
                continue
            for h in sorted(q.adj[i]):
                if h <= i or self.rule2_holds(h):
                    continue
                c_ih = q.adj[i][h]
                if (c_ih > 0) != (mode is Rule4Mode.LITERAL):
                    continue
                total = q.diag[i] + q.diag[h] + c_ih + q.aggregates.pos_sum[i] + q.aggregates.pos_sum[h]
                if total <= 0:
                    pairs.append((i, h))
        return pairs

    # ------------------------------------------------------------------
    # Fixpoint
    # ------------------------------------------------------------------

    def _sweep_rows(self, rules):
        fixed = 0
        q = self.instance
        diag, alive = q.diag, self.alive
        pos, neg, degree = q.aggregates.pos_sum, q.aggregates.neg_sum, q.aggregates.degree
        for i in range(q.n):
            if not alive[i]:
                continue
            if diag[i] == 0 and degree[i] == 0:
                # zero rows are R5 even though Rule 1 also holds
                if Rule.R5 not in rules:
                    continue
                self.apply_rule5(i)
            elif Rule.R1 in rules and diag[i] + neg[i] >= 0:
                self.apply_rule1(i)
            elif Rule.R2 in rules and diag[i] + pos[i] <= 0:
                self.apply_rule2(i)
            else:
                continue
            fixed += 1
        return fixed

    def _sweep_edges(self):
        fixed = 0
        q = self.instance
        diag, adj, alive, neg = q.diag, q.adj, self.alive, q.aggregates.neg_sum
        for i in range(q.n):
            if not alive[i]:
                continue
            slack_i = diag[i] + neg[i]
            if slack_i >= 0:
                continue
            row = adj[i]
            for h in sorted(j for j, value in row.items() if j > i and value > 0):
                slack_h = diag[h] + neg[h]
                if slack_h < 0 and slack_i + slack_h + row[h] >= 0:
                    self.apply_rule3(i, h)
                    fixed += 2
                    break
        return fixed

    def run(self, rules=ALL_RULES):
        """
        Apply the enabled rules until a full pass fixes nothing.

        Returns:
            tuple: (reduced QuboInstance, ReductionLog)
        """
        rules = frozenset(Rule(r) for r in rules)
        pass_history = []
        while True:
            self.current_pass = len(pass_history) + 1
            fixed = self._sweep_rows(rules)
            if Rule.R3 in rules:
                fixed += self._sweep_edges()
            if fixed == 0:
                break
            pass_history.append(fixed)
            logger.debug(f"Pass {self.current_pass}: fixed {fixed} variables")
        return self.result(pass_history)

    def result(self, pass_history=()):
        """Compact the surviving variables and build the log."""
        keep = self.surviving()
        reduced = self.instance.subinstance(keep)
        log = ReductionLog(
            original_n=self.instance.n,
            fixings=list(self.fixings),
            offset=self.offset,
            passes=len(pass_history),
            remap=keep,
            pass_history=list(pass_history),
        )
        return reduced, log


def reduce(instance, rules=ALL_RULES):
    """
    Reduce an instance to the fixpoint of Rules 1, 2, 3 and 5.

    Args:
        instance (QuboInstance): The instance (left unchanged)
        rules (iterable): Subset of Rule values to enable

    Returns:
        tuple: (reduced QuboInstance, ReductionLog)
    """
    start = time.perf_counter()
    reduced, log = Reducer(instance).run(rules)
    logger.info(
        f"Reduced n={instance.n} -> {reduced.n} in {log.passes} passes "
        f"({log.percent_reduction():.1f}% fixed, offset {log.offset}, "
        f"{time.perf_counter() - start:.3f}s)"
    )
    return reduced, log


def detect_rule4(instance, mode=Rule4Mode.ANALOG):
    """Rule 4 pairs of ``instance`` (indices of ``instance``)."""
    return Reducer(instance).detect_rule4(mode)


def extend(log, reduced_assignment):
    """
    Expand an assignment of the surviving variables to all original variables.

    Returns:
        list: Full 0/1 assignment in original coordinates
    """
    values = [int(v) for v in reduced_assignment]
    if len(values) != log.reduced_n:
        raise QuboInputError(
            f"Reduced assignment length {len(values)} does not match the reduced instance ({log.reduced_n})"
        )
    full = [0] * log.original_n
    for fixing in log.fixings:
        full[fixing.variable] = fixing.lift_value
    for reduced_index, original in enumerate(log.remap):
        full[original] = values[reduced_index]
    return full


def lift(log, reduced_solution, original=None, reduced_objective=None):
    """
    Map a solution of the reduced instance back to original coordinates.

    The objective is evaluated on ``original`` when given; otherwise it is
    ``reduced_objective + offset`` (the reduced solution's own objective is
    used when a Solution is passed, and an empty reduced instance contributes 0).

    Returns:
        Solution: Full assignment and its original objective
    """
    if isinstance(reduced_solution, Solution):
        if reduced_objective is None:
            reduced_objective = reduced_solution.objective
        reduced_solution = reduced_solution.assignment
    full = extend(log, reduced_solution)
    if original is not None:
        if original.n != log.original_n:
            raise QuboInputError(f"Original instance has n={original.n}, log expects {log.original_n}")
        return Solution(tuple(full), evaluate(original, full))
    if reduced_objective is None:
        if log.reduced_n:
            raise QuboInputError("Objective of the reduced solution is required to lift it")
        reduced_objective = 0
    return Solution(tuple(full), checked_int(int(reduced_objective) + log.offset))
