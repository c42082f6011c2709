"""
Coefficient Sensitivity Module

For a variable that Rule 1 (or Rule 2) determines, this module reports how far
its off-diagonal coefficients can move before the determination is lost.

Rule 1 holds while c_ii + C_i^- >= 0, so the row can absorb a total added
negative magnitude equal to that slack, spread over its coefficients in any
way. Rule 2 is the mirror image with C_i^+ and added positive magnitude.
"""
import logging
from dataclasses import dataclass, field

import pandas as pd

from app.models.reducer import Rule
from app.utils.config import LOG_FORMAT, LOG_LEVEL
from app.utils.errors import ContractViolation

# Configure logging
logging.basicConfig(level=LOG_LEVEL, format=LOG_FORMAT)
logger = logging.getLogger('sensitivity')


@dataclass
class SlackReport:
    """
    Allowable coefficient changes for one determined variable.

    ``per_coefficient`` maps each neighbour j to the allowable decrease of a
    negative c_ij (Rule 1) or increase of a positive c_ij (Rule 2).
    """

    variable: int
    rule: Rule
    slack: int
    per_coefficient: dict = field(default_factory=dict)


def rule1_slack(instance, i):
    """
    Signed Rule 1 margin c_ii + C_i^-.

    Non-negative exactly when Rule 1 fires; a negative value is the increase
    to c_ii that would make it fire.
    """
    instance._check_index(i)
    return instance.diag[i] + instance.aggregates.neg_sum[i]


def rule2_slack(instance, i):
    """Signed Rule 2 margin -(c_ii + C_i^+)."""
    instance._check_index(i)
    return -(instance.diag[i] + instance.aggregates.pos_sum[i])


def total_allowable_change(instance, i):
    """
    Total decrease over all negative coefficients of row i that keeps Rule 1.

    Returns:
        int: The Rule 1 slack
    """
    slack = rule1_slack(instance, i)
    if slack < 0:
        raise ContractViolation(f"Rule 1 does not determine x{i + 1} (slack {slack})")
    return slack


def total_allowable_increase(instance, i):
    """Total increase over all positive coefficients of row i that keeps Rule 2."""
    slack = rule2_slack(instance, i)
    if slack < 0:
        raise ContractViolation(f"Rule 2 does not determine x{i + 1} (slack {slack})")
    return slack


def slack_report(instance, i):
    """
    SlackReport for row i, or None when neither Rule 1 nor Rule 2 fires.

    A row both rules determine (an all-zero row) is reported under Rule 1.
    """
    row = instance.neighbors(i)
    slack = rule1_slack(instance, i)
    if slack >= 0:
        targets = sorted(j for j, value in row.items() if value < 0)
        return SlackReport(i, Rule.R1, slack, {j: slack for j in targets})
    slack = rule2_slack(instance, i)
    if slack >= 0:
        targets = sorted(j for j, value in row.items() if value > 0)
        return SlackReport(i, Rule.R2, slack, {j: slack for j in targets})
    return None


def sensitivity_table(instance):
    """
    Slack reports for every row Rule 1 or Rule 2 currently determines.

    Returns:
        pd.DataFrame: One row per determined variable (1-based indices) with
        its rule, slack, the number of coefficients the budget covers, and
        the per-coefficient bound
    """
    records = []
    for i in range(instance.n):
        report = slack_report(instance, i)
        if report is None:
            continue
        records.append({
            'variable': i + 1,
            'rule': report.rule.value,
            'slack': report.slack,
            'coefficients': len(report.per_coefficient),
            'per_coefficient_bound': report.slack,
        })
    table = pd.DataFrame(
        records,
        columns=['variable', 'rule', 'slack', 'coefficients', 'per_coefficient_bound'],
    )
    logger.info(f"Sensitivity: {len(table)} of {instance.n} rows determined by Rule 1 or Rule 2")
    return table
