"""
Tests for coefficient sensitivity and the design effects analysis.
"""
import os
import sys

import numpy as np
import pytest

# Add the project root to Python path
sys.path.insert(0, os.path.abspath(os.path.dirname(__file__)))

from app.analysis.effects import (
    DesignMatrix, alias_groups, fit_response_surface, main_effects, predict_reduction,
)
from app.analysis.sensitivity import (
    rule1_slack, rule2_slack, sensitivity_table, slack_report, total_allowable_change,
    total_allowable_increase,
)
from app.models.qubo import QuboInstance
from app.models.reducer import Reducer, Rule
from app.utils.errors import ContractViolation, QuboInputError


def rule1_fires(instance, i):
    return Reducer(instance).rule1_holds(i)


class TestSlack:
    """Rule 1 and Rule 2 margins."""

    def test_rule1_slack_boundaries(self):
        q = QuboInstance.from_dict(2, linear={0: 5}, quadratic={(0, 1): -3})
        assert rule1_slack(q, 0) == 2
        q.set_quadratic(0, 1, -5)
        assert rule1_fires(q, 0)
        q.set_quadratic(0, 1, -6)
        assert not rule1_fires(q, 0)

    def test_isolated_node(self):
        assert rule1_slack(QuboInstance.from_dict(1, linear={0: 4}), 0) == 4

    def test_negative_slack(self):
        q = QuboInstance.from_dict(2, linear={0: 1}, quadratic={(0, 1): -3})
        assert rule1_slack(q, 0) == -2
        with pytest.raises(ContractViolation):
            total_allowable_change(q, 0)

    def test_budget_split_across_coefficients(self):
        q = QuboInstance.from_dict(3, linear={0: 5}, quadratic={(0, 1): -2, (0, 2): -1})
        assert total_allowable_change(q, 0) == 2
        q.set_quadratic(0, 1, -3)
        q.set_quadratic(0, 2, -2)
        assert rule1_fires(q, 0)
        q.set_quadratic(0, 2, -3)
        assert not rule1_fires(q, 0)

    def test_zero_budget(self):
        assert total_allowable_change(QuboInstance.from_dict(2, quadratic={(0, 1): 4}), 0) == 0

    def test_rule2_side(self):
        q = QuboInstance.from_dict(2, linear={0: -5}, quadratic={(0, 1): 3})
        assert rule2_slack(q, 0) == 2
        assert total_allowable_increase(q, 0) == 2
        report = slack_report(q, 0)
        assert report.rule is Rule.R2
        assert report.per_coefficient == {1: 2}

    def test_per_coefficient_bound_equals_slack(self):
        q = QuboInstance.from_dict(4, linear={0: 9}, quadratic={(0, 1): -2, (0, 2): -3, (0, 3): 1})
        report = slack_report(q, 0)
        assert report.slack == 4
        assert report.per_coefficient == {1: 4, 2: 4}

    def test_sharpness_on_random_rows(self):
        rng = np.random.default_rng(17)
        checked = 0
        while checked < 200:
            degree = int(rng.integers(1, 6))
            negatives = [-int(v) for v in rng.integers(1, 10, size=degree)]
            diag = int(rng.integers(0, 40))
            q = QuboInstance.from_dict(
                degree + 1, linear={0: diag},
                quadratic={(0, j + 1): value for j, value in enumerate(negatives)},
            )
            if not rule1_fires(q, 0):
                continue
            checked += 1
            budget = total_allowable_change(q, 0)
            # spread the budget over random neighbours, then one more unit
            shares = rng.multinomial(budget, [1 / degree] * degree)
            for j, share in enumerate(shares):
                q.add_quadratic(0, j + 1, -int(share))
            assert rule1_fires(q, 0)
            q.add_quadratic(0, 1, -1)
            assert not rule1_fires(q, 0)

    def test_sensitivity_table(self, cascade):
        table = sensitivity_table(cascade)
        assert list(table['variable']) == [1]
        assert list(table['rule']) == ['R1']
        assert list(table['slack']) == [2]


class TestDesign:
    """The sixteen-run design and its alias structure."""

    def test_balanced(self):
        design = DesignMatrix.from_design_table()
        assert design.codes.shape == (16, 6)
        assert design.is_balanced()

    def test_three_pair_alias_group(self):
        design = DesignMatrix.from_design_table()
        groups = alias_groups(design)
        assert [(1, 6), (2, 5), (3, 4)] in groups
        assert sum(len(group) for group in groups) == 15
        assert len(groups) == 7

    def test_aliased_interactions_share_values(self):
        design = DesignMatrix.from_design_table()
        responses = np.random.default_rng(0).normal(30, 10, size=16)
        result = main_effects(design, responses)
        for group in result.aliases:
            values = {round(result.interactions[pair], 9) for pair in group}
            assert len(values) == 1


class TestMainEffects:
    """Low-to-high effects."""

    def test_constant_responses(self):
        result = main_effects(DesignMatrix.from_design_table(), [30.0] * 16)
        assert all(value == 0 for value in result.main.values())
        assert all(value == 0 for value in result.interactions.values())

    def test_single_factor_response(self):
        design = DesignMatrix.from_design_table()
        result = main_effects(design, design.column(4))
        assert result.main[4] == 2
        for f in (1, 2, 3, 5, 6):
            assert result.main[f] == 0

    def test_wrong_response_count(self):
        with pytest.raises(QuboInputError):
            main_effects(DesignMatrix.from_design_table(), [1.0] * 15)

    def test_linear_in_responses(self):
        design = DesignMatrix.from_design_table()
        rng = np.random.default_rng(1)
        a, b = rng.normal(size=16), rng.normal(size=16)
        left = main_effects(design, 2 * a + b).main
        right_a, right_b = main_effects(design, a).main, main_effects(design, b).main
        for f in design.factors:
            assert left[f] == pytest.approx(2 * right_a[f] + right_b[f])

    def test_frames(self):
        result = main_effects(DesignMatrix.from_design_table(), np.arange(16.0))
        assert len(result.main_frame()) == 6
        assert len(result.interaction_frame()) == 7


class TestPrediction:
    """Fitted reduction surface."""

    def test_center(self):
        assert predict_reduction() == 30

    def test_maximum_configuration(self):
        assert predict_reduction(f1=-1, f3=1, f4=1) == 62

    def test_minimum_configuration(self):
        assert predict_reduction(f1=1, f3=-1, f4=-1) == 8

    def test_out_of_range(self):
        with pytest.raises(QuboInputError):
            predict_reduction(f2=1.5)

    def test_fit_recovers_surface(self):
        design = DesignMatrix.from_design_table()
        responses = [
            predict_reduction(*(int(v) for v in row)) for row in design.codes
        ]
        surface = fit_response_surface(design, responses, min_effect=2.0)
        assert set(surface.coefficients) == {(1,), (3,), (4,), (3, 4)}
        assert surface.intercept == pytest.approx(30)
        assert surface.coefficients[(4,)] == pytest.approx(16)
        assert surface.coefficients[(3, 4)] == pytest.approx(5)
        assert surface.r_squared == pytest.approx(1.0)
        assert surface.predict({1: -1, 3: 1, 4: 1}) == pytest.approx(62)
