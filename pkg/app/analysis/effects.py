"""
Design Effects Module

This module analyses reduction experiments run on the sixteen-row two-level
design: main effects and two-factor interactions (mean at the high setting
minus mean at the low setting), the alias structure of the design, and a
regression surface over the significant terms.
"""
import itertools
import logging
from dataclasses import dataclass, field

import numpy as np
import pandas as pd
from sklearn.linear_model import LinearRegression

from app.data.generator import DESIGN_TABLE, FACTOR_LEVELS
from app.utils.config import LOG_FORMAT, LOG_LEVEL
from app.utils.errors import QuboInputError

# Configure logging
logging.basicConfig(level=LOG_LEVEL, format=LOG_FORMAT)
logger = logging.getLogger('effects')

FACTORS = tuple(range(1, 7))


@dataclass
class DesignMatrix:
    """Runs x factors matrix of -1 / +1 codes, columns ordered as factors 1..6."""

    codes: np.ndarray
    factors: tuple = FACTORS

    @classmethod
    def from_design_table(cls):
        """Code the standard sixteen-run design (low -> -1, high -> +1)."""
        rows = []
        for test_id in sorted(DESIGN_TABLE):
            settings = DESIGN_TABLE[test_id]
            rows.append([
                -1 if value == FACTOR_LEVELS[f][0] else 1
                for f, value in zip(FACTORS, settings)
            ])
        return cls(np.array(rows, dtype=np.int64))

    @property
    def runs(self):
        return self.codes.shape[0]

    def column(self, factor):
        return self.codes[:, self.factors.index(factor)]

    def product(self, pair):
        f, g = pair
        return self.column(f) * self.column(g)

    def is_balanced(self):
        return bool(np.all(self.codes.sum(axis=0) == 0))

    def to_frame(self):
        frame = pd.DataFrame(self.codes, columns=[f"f{f}" for f in self.factors])
        frame.index = pd.RangeIndex(1, self.runs + 1, name='test')
        return frame


def alias_groups(design):
    """
    Factor pairs whose product columns are identical.

    Returns:
        list: Groups (lists of (f, g) pairs) in order of their first pair
    """
    groups = {}
    for pair in itertools.combinations(design.factors, 2):
        key = tuple(design.product(pair).tolist())
        groups.setdefault(key, []).append(pair)
    return sorted(groups.values(), key=lambda group: group[0])


def _effect(column, responses):
    return float(responses[column > 0].mean() - responses[column < 0].mean())


@dataclass
class EffectsResult:
    """Main effects per factor, interaction effects per pair, and alias groups."""

    main: dict
    interactions: dict
    aliases: list = field(default_factory=list)

    def main_frame(self):
        return pd.DataFrame(
            [{'factor': f, 'effect': value} for f, value in self.main.items()],
            columns=['factor', 'effect'],
        )

    def interaction_frame(self):
        """One row per alias group; aliased pairs share the reported effect."""
        records = []
        for group in self.aliases:
            records.append({
                'pairs': ' = '.join(f"{f}-{g}" for f, g in group),
                'effect': self.interactions[group[0]],
            })
        return pd.DataFrame(records, columns=['pairs', 'effect'])


def main_effects(design, responses):
    """
    Low-to-high effects of every factor and factor pair.

    Args:
        design (DesignMatrix): The coded design
        responses (sequence): One response per design run, in run order

    Returns:
        EffectsResult: Effects and the design's alias groups
    """
    responses = np.asarray(responses, dtype=float)
    if responses.shape != (design.runs,):
        raise QuboInputError(f"Expected {design.runs} responses, got {responses.size}")
    main = {f: _effect(design.column(f), responses) for f in design.factors}
    interactions = {
        pair: _effect(design.product(pair), responses)
        for pair in itertools.combinations(design.factors, 2)
    }
    return EffectsResult(main, interactions, alias_groups(design))


def predict_reduction(f1=0, f2=0, f3=0, f4=0, f5=0, f6=0):
    """
    Fitted percent reduction at coded factor settings.

    PR = -3 f1 + 8 f3 + 16 f4 + 5 f3 f4 + 30; factors 2, 5 and 6 have no
    significant effect.
    """
    for name, value in zip(('f1', 'f2', 'f3', 'f4', 'f5', 'f6'), (f1, f2, f3, f4, f5, f6)):
        if not -1 <= value <= 1:
            raise QuboInputError(f"{name} must be in [-1, 1], got {value}")
    return -3 * f1 + 8 * f3 + 16 * f4 + 5 * f3 * f4 + 30


@dataclass
class ResponseSurface:
    """Linear model over selected main effects and interaction terms."""

    intercept: float
    coefficients: dict
    r_squared: float

    def predict(self, codes):
        """Predicted response at coded settings {factor: value in [-1, 1]}."""
        total = self.intercept
        for term, coefficient in self.coefficients.items():
            total += coefficient * np.prod([codes.get(f, 0) for f in term])
        return float(total)

    def formula(self, digits=1):
        parts = [
            f"{coefficient:+.{digits}f}*" + "*".join(f"f{f}" for f in term)
            for term, coefficient in self.coefficients.items()
        ]
        return f"PR = {' '.join(parts)} {self.intercept:+.{digits}f}"


def _representative(group, selected):
    """Pick the aliased pair whose factors are most often selected main effects."""
    return max(group, key=lambda pair: (sum(f in selected for f in pair), -pair[0], -pair[1]))


def fit_response_surface(design, responses, min_effect=2.0):
    """
    Regress responses on the significant main effects and interactions.

    A main effect enters when |effect| >= min_effect. Each alias group whose
    shared effect reaches min_effect contributes one pair, preferring pairs of
    selected main effects.

    Returns:
        ResponseSurface: Fitted intercept, term coefficients and R^2
    """
    effects = main_effects(design, responses)
    selected = [f for f in design.factors if abs(effects.main[f]) >= min_effect]
    terms = [(f,) for f in selected]
    for group in effects.aliases:
        if abs(effects.interactions[group[0]]) >= min_effect:
            terms.append(_representative(group, selected))

    y = np.asarray(responses, dtype=float)
    if not terms:
        return ResponseSurface(float(y.mean()), {}, 0.0)
    X = np.column_stack([
        np.prod([design.column(f) for f in term], axis=0) for term in terms
    ]).astype(float)
    model = LinearRegression().fit(X, y)
    surface = ResponseSurface(
        intercept=float(model.intercept_),
        coefficients={term: float(c) for term, c in zip(terms, model.coef_)},
        r_squared=float(model.score(X, y)),
    )
    logger.info(f"Response surface: {surface.formula()} (R^2={surface.r_squared:.3f})")
    return surface
