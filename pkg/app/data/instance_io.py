"""
Instance File Module

This module reads and writes the row-col-value instance format and the plain
text solution format.

Instance files:

    # comment lines start with '#'
    <n> <entryCount>
    <i> <j> <value>      (entryCount lines, 1-based, i <= j, i == j is linear)

Solution files carry the objective value on the first line and the 0/1
vector on the second.
"""
import logging

from app.models.qubo import QuboInstance, Solution
from app.utils.config import LOG_FORMAT, LOG_LEVEL
from app.utils.errors import InstanceFormatError, QuboInputError

# Configure logging
logging.basicConfig(level=LOG_LEVEL, format=LOG_FORMAT)
logger = logging.getLogger('instance_io')


def _content_lines(text):
    """Yield (line number, tokens) for each non-blank, non-comment line."""
    for number, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith('#'):
            continue
        yield number, stripped.split()


def _parse_ints(tokens, count, number, what):
    if len(tokens) != count:
        raise InstanceFormatError(f"expected {count} fields for {what}, found {len(tokens)}", number)
    try:
        return [int(token) for token in tokens]
    except ValueError:
        raise InstanceFormatError(f"non-integer field in {what}: {' '.join(tokens)}", number)


def parse_instance(text):
    """
    Parse instance text.

    Args:
        text (str): File contents

    Returns:
        QuboInstance: The parsed instance
    """
    lines = _content_lines(text)
    try:
        number, tokens = next(lines)
    except StopIteration:
        raise InstanceFormatError("missing '<n> <entryCount>' header")
    n, entry_count = _parse_ints(tokens, 2, number, "header")
    if n < 0 or entry_count < 0:
        raise InstanceFormatError("n and entryCount must be non-negative", number)

    instance = QuboInstance(n)
    seen = {}
    parsed = 0
    for number, tokens in lines:
        if parsed == entry_count:
            raise InstanceFormatError(f"more entries than the declared {entry_count}", number)
        i, j, value = _parse_ints(tokens, 3, number, "entry")
        if not (1 <= i <= n and 1 <= j <= n):
            raise InstanceFormatError(f"index out of range [1, {n}] in entry ({i}, {j})", number)
        if i > j:
            raise InstanceFormatError(f"entry ({i}, {j}) must have i <= j", number)
        if (i, j) in seen:
            raise InstanceFormatError(
                f"duplicate entry ({i}, {j}), first given on line {seen[(i, j)]}", number
            )
        seen[(i, j)] = number
        try:
            if i == j:
                instance.set_linear(i - 1, value)
            else:
                instance.set_quadratic(i - 1, j - 1, value)
        except QuboInputError as e:
            raise InstanceFormatError(str(e), number) from e
        parsed += 1
    if parsed != entry_count:
        raise InstanceFormatError(f"header declares {entry_count} entries, found {parsed}")
    return instance


def format_instance(instance, comments=()):
    """Serialize an instance; entries ascending by (i, j), zeros omitted."""
    entries = [(i, i, value) for i, value in enumerate(instance.diag) if value]
    entries += list(instance.quadratic_items())
    entries.sort(key=lambda entry: (entry[0], entry[1]))
    lines = [f"# {comment}" for comment in comments]
    lines.append(f"{instance.n} {len(entries)}")
    lines.extend(f"{i + 1} {j + 1} {value}" for i, j, value in entries)
    return "\n".join(lines) + "\n"


def read_text(path):
    """Read a UTF-8 text file; undecodable bytes are a format error."""
    try:
        with open(path, 'r', encoding='utf-8') as f:
            return f.read()
    except UnicodeDecodeError as e:
        raise InstanceFormatError(f"{path} is not UTF-8 text (byte offset {e.start})") from e


def read_instance(path):
    return parse_instance(read_text(path))


def write_instance(instance, path, comments=()):
    with open(path, 'w') as f:
        f.write(format_instance(instance, comments))
    logger.info(f"Wrote instance n={instance.n}, entries={instance.entry_count} to {path}")


def parse_solution(text):
    """
    Parse solution text: objective value, then the 0/1 vector.

    Returns:
        Solution: Assignment and the stated objective
    """
    lines = list(_content_lines(text))
    if not lines:
        raise InstanceFormatError("missing objective value line")
    number, tokens = lines[0]
    (objective,) = _parse_ints(tokens, 1, number, "objective value")
    if len(lines) > 2:
        raise InstanceFormatError("unexpected text after the assignment line", lines[2][0])
    assignment = []
    if len(lines) == 2:
        number, tokens = lines[1]
        assignment = _parse_ints(tokens, len(tokens), number, "assignment")
        if any(v not in (0, 1) for v in assignment):
            raise InstanceFormatError("assignment values must be 0 or 1", number)
    return Solution(tuple(assignment), objective)


def format_solution(solution):
    return f"{solution.objective}\n{' '.join(str(v) for v in solution.assignment)}\n"


def read_solution(path):
    return parse_solution(read_text(path))


def write_solution(solution, path):
    with open(path, 'w') as f:
        f.write(format_solution(solution))
    logger.info(f"Wrote solution with objective {solution.objective} to {path}")
