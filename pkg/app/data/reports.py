"""
Report Documents Module

This module builds and reads the JSON reports written next to reduced and
expanded instances. Each report carries a versioned ``schema`` field and
everything needed to map solutions back to the original instance.
"""
import json
import logging

from app.data.generator import component_count
from app.data.instance_io import read_text
from app.models.expander import ExpansionLog
from app.models.reducer import ReductionLog
from app.utils.config import EXPANSION_SCHEMA, LOG_FORMAT, LOG_LEVEL, REDUCTION_SCHEMA
from app.utils.errors import InstanceFormatError

# Configure logging
logging.basicConfig(level=LOG_LEVEL, format=LOG_FORMAT)
logger = logging.getLogger('reports')


def reduction_report(original, reduced, log, elapsed, seed=None):
    """
    Build the reduction report document.

    Args:
        original (QuboInstance): Instance before reduction
        reduced (QuboInstance): Compacted reduced instance
        log (ReductionLog): Fixings, offset and remap
        elapsed (float): Reduction wall time in seconds
        seed (int, optional): Seed the original was generated with

    Returns:
        dict: JSON-serializable report
    """
    return {
        'schema': REDUCTION_SCHEMA,
        'before': {'n': original.n, 'entries': original.entry_count},
        'after': {'n': reduced.n, 'entries': reduced.entry_count},
        'rule_counts': log.rule_counts(),
        'percent_reduction': log.percent_reduction(),
        'components_after': component_count(reduced),
        'elapsed_seconds': elapsed,
        'seed': seed,
        **log.to_dict(),
    }


def expansion_report(original, expanded, log, max_degree):
    return {
        'schema': EXPANSION_SCHEMA,
        'max_degree': max_degree,
        'before': {'n': original.n, 'entries': original.entry_count, 'max_degree': original.max_degree()},
        'after': {'n': expanded.n, 'entries': expanded.entry_count, 'max_degree': expanded.max_degree()},
        **log.to_dict(),
    }


def write_report(report, path):
    with open(path, 'w') as f:
        json.dump(report, f, indent=2)
    logger.info(f"Wrote {report['schema']} report to {path}")


def read_report(path):
    """Load a report and return (document, ReductionLog or ExpansionLog)."""
    try:
        report = json.loads(read_text(path))
    except json.JSONDecodeError as e:
        raise InstanceFormatError(f"report is not valid JSON: {e.msg}", e.lineno) from e
    if not isinstance(report, dict):
        raise InstanceFormatError("report must be a JSON object")
    schema = report.get('schema')
    if schema == REDUCTION_SCHEMA:
        log = ReductionLog.from_dict(report)
        if report.get('after', {}).get('n', log.reduced_n) != log.reduced_n:
            raise InstanceFormatError("report 'after.n' disagrees with its remap")
        return report, log
    if schema == EXPANSION_SCHEMA:
        return report, ExpansionLog.from_dict(report)
    raise InstanceFormatError(f"unknown report schema {schema!r}")
