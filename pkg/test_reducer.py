"""
Tests for the variable-fixing rules, the reduction fixpoint and lifting.
"""
import os
import sys

import numpy as np
import pytest

# Add the project root to Python path
sys.path.insert(0, os.path.abspath(os.path.dirname(__file__)))

from app.models.qubo import QuboInstance, Solution, evaluate, recompute_aggregates
from app.models.reducer import (
    FREE, Fixing, ReductionLog, Reducer, Rule, Rule4Mode, detect_rule4, extend, lift, reduce,
)
from app.models.solvers import brute_force, brute_force_constrained
from app.utils.errors import ContractViolation, QuboInputError


class TestRuleConditions:
    """Rule 1, 2 and 5 tests on single rows."""

    def test_rule1(self):
        q = QuboInstance.from_dict(2, linear={0: 5}, quadratic={(0, 1): -3})
        assert Reducer(q).rule1_holds(0)

    def test_rule2(self):
        q = QuboInstance.from_dict(2, linear={0: -5, 1: 1}, quadratic={(0, 1): 3})
        assert Reducer(q).rule2_holds(0)
        assert brute_force(q).value == 1

    def test_zero_row_is_rule5(self):
        reducer = Reducer(QuboInstance(1))
        assert reducer.rule5_holds(0)
        reducer.run()
        assert reducer.fixings[0].rule is Rule.R5
        assert reducer.fixings[0].value is FREE

    def test_dead_row_rejected(self, cascade):
        reducer = Reducer(cascade)
        reducer.apply_rule1(0)
        with pytest.raises(QuboInputError):
            reducer.rule2_holds(0)


class TestRuleApplication:
    """Single rule applications and their bookkeeping."""

    def test_rule1_then_rule2(self, cascade):
        reducer = Reducer(cascade)
        reducer.apply_rule1(0)
        assert reducer.offset == 5
        assert reducer.instance.diag[1] == -2
        assert reducer.surviving() == [1]
        assert reducer.rule2_holds(1)
        reducer.apply_rule2(1)
        reduced, log = reducer.result()
        assert reduced.n == 0
        assert log.offset == 5 == brute_force(cascade).value

    def test_rule_not_holding_is_contract_violation(self, cascade):
        reducer = Reducer(cascade)
        with pytest.raises(ContractViolation):
            reducer.apply_rule2(0)
        with pytest.raises(ContractViolation):
            reducer.apply_rule5(0)

    def test_rule3(self, rule3_example):
        reducer = Reducer(rule3_example)
        assert not reducer.rule1_holds(0)
        assert not reducer.rule1_holds(1)
        assert reducer.rule3_holds(0, 1)
        reducer.apply_rule3(0, 1)
        assert reducer.offset == 5
        assert reducer.instance.diag[2] == 0
        assert reducer.rule5_holds(2)

    def test_rule3_needs_positive_coupling(self):
        q = QuboInstance.from_dict(2, linear={0: -1, 1: -1}, quadratic={(0, 1): -5})
        reducer = Reducer(q)
        assert not reducer.rule3_holds(0, 1)
        with pytest.raises(ContractViolation):
            reducer.apply_rule3(0, 1)

    def test_aggregates_stay_consistent(self, random_instance):
        for seed in range(30):
            reducer = Reducer(random_instance(seed, 10))
            for i in range(10):
                if not reducer.alive[i]:
                    continue
                if reducer.rule1_holds(i):
                    reducer.apply_rule1(i)
                elif reducer.rule2_holds(i):
                    reducer.apply_rule2(i)
                assert reducer.instance.aggregates == recompute_aggregates(reducer.instance)


class TestRule4:
    """Rule 4 detection."""

    def test_analog_pair(self):
        q = QuboInstance.from_dict(2, linear={0: 3, 1: 3}, quadratic={(0, 1): -8})
        assert detect_rule4(q, Rule4Mode.ANALOG) == [(0, 1)]
        assert brute_force(q).value == 3

    def test_literal_is_empty_when_rule2_fails(self, random_instance):
        for seed in range(50):
            assert detect_rule4(random_instance(seed, 8), Rule4Mode.LITERAL) == []

    def test_all_positive_analog_is_empty(self):
        q = QuboInstance.from_dict(3, linear={0: 1, 1: 1, 2: 1}, quadratic={(0, 1): 2, (1, 2): 2})
        assert detect_rule4(q, "analog") == []


class TestReduce:
    """Fixpoint reduction."""

    def test_cascade(self, cascade):
        reduced, log = reduce(cascade)
        assert reduced.n == 0
        assert log.offset == 5
        assert [(f.variable, f.value, f.rule) for f in log.fixings] == [(0, 1, Rule.R1), (1, 0, Rule.R2)]

    def test_maxcut_triangle_unchanged(self, maxcut_triangle):
        reduced, log = reduce(maxcut_triangle)
        assert log.fixings == []
        assert reduced == maxcut_triangle
        assert log.passes == 0

    def test_zero_instance(self):
        reduced, log = reduce(QuboInstance(5))
        assert reduced.n == 0
        assert log.offset == 0
        assert log.rule_counts()['R5'] == 5

    def test_offset_overflow_rejected(self):
        q = QuboInstance.from_dict(2, linear={0: 2 ** 62, 1: 2 ** 62})
        with pytest.raises(QuboInputError):
            reduce(q)

    def test_rule3_example_reaches_optimum(self, rule3_example):
        reduced, log = reduce(rule3_example)
        assert reduced.n == 0
        assert log.offset == 5
        assert log.rule_counts() == {'R1': 1, 'R2': 0, 'R3': 2, 'R5': 0}

    def test_idempotent(self, random_instance):
        for seed in range(40):
            reduced, _ = reduce(random_instance(seed, 12, outlier_share=0.2))
            _, again = reduce(reduced)
            assert again.fixings == []

    def test_deterministic(self, random_instance):
        q = random_instance(3, 14, outlier_share=0.2)
        assert reduce(q)[1].to_dict() == reduce(q)[1].to_dict()

    def test_passes_bounded(self, random_instance):
        for seed in range(40):
            q = random_instance(seed, 12, outlier_share=0.2)
            _, log = reduce(q)
            assert 0 <= log.passes <= q.n
            assert sum(log.pass_history) == log.fixed_count

    def test_rule_subset(self, cascade):
        reduced, log = reduce(cascade, rules=[Rule.R2])
        assert log.fixings == []
        assert reduced == cascade

    def test_input_not_modified(self, positive_five):
        before = positive_five.copy()
        reduce(positive_five)
        assert positive_five == before

    def test_optimum_and_persistency(self, random_instance):
        for seed in range(60):
            q = random_instance(seed, 10, outlier_share=0.3)
            reduced, log = reduce(q)
            optimum = brute_force(q).value
            assert brute_force(reduced).value + log.offset == optimum
            assert brute_force_constrained(q, log.fixings) == optimum


class TestLift:
    """Extension and lifting back to original coordinates."""

    def test_cascade(self, cascade):
        _, log = reduce(cascade)
        solution = lift(log, [], original=cascade)
        assert solution.assignment == (1, 0)
        assert solution.objective == 5

    def test_rule3_then_rule5(self, rule3_example):
        reducer = Reducer(rule3_example)
        reducer.apply_rule3(0, 1)
        reducer.apply_rule5(2)
        _, log = reducer.result()
        solution = lift(log, ())
        assert solution.assignment == (1, 1, 0)
        assert solution.objective == 5 == evaluate(rule3_example, solution.assignment)

    def test_identity_without_fixings(self, maxcut_triangle):
        _, log = reduce(maxcut_triangle)
        solution = lift(log, Solution.of(maxcut_triangle, [1, 0, 0]))
        assert solution.assignment == (1, 0, 0)
        assert solution.objective == 2

    def test_length_mismatch(self, maxcut_triangle):
        _, log = reduce(maxcut_triangle)
        with pytest.raises(QuboInputError):
            lift(log, [1, 0])

    def test_extension_identity(self, random_instance):
        rng = np.random.default_rng(99)
        for seed in range(40):
            q = random_instance(seed, 14, outlier_share=0.2)
            reduced, log = reduce(q)
            for _ in range(10):
                y = [int(v) for v in rng.integers(0, 2, size=reduced.n)]
                assert evaluate(reduced, y) + log.offset == evaluate(q, extend(log, y))


class TestReductionLog:
    """Log serialization and validation."""

    def test_dict_round_trip(self, rule3_example):
        _, log = reduce(rule3_example)
        assert ReductionLog.from_dict(log.to_dict()) == log

    def test_free_value_serialized(self):
        _, log = reduce(QuboInstance(2))
        assert [f['value'] for f in log.to_dict()['fixings']] == ['free', 'free']

    def test_validate_rejects_double_fixing(self):
        log = ReductionLog(original_n=1, fixings=[Fixing(0, 1, Rule.R1, 1), Fixing(0, 0, Rule.R2, 1)])
        with pytest.raises(QuboInputError):
            log.validate()

    def test_free_only_for_rule5(self):
        with pytest.raises(QuboInputError):
            Fixing(0, FREE, Rule.R1, 1)

    def test_percent_reduction(self, cascade):
        _, log = reduce(cascade)
        assert log.percent_reduction() == 100.0
