"""
Tests for the instance and solution file formats.
"""
import os
import sys

import pytest

# Add the project root to Python path
sys.path.insert(0, os.path.abspath(os.path.dirname(__file__)))

from app.data.instance_io import (
    format_instance, format_solution, parse_instance, parse_solution, read_instance,
    read_solution, write_instance, write_solution,
)
from app.models.qubo import QuboInstance, Solution
from app.utils.errors import InstanceFormatError

CASCADE_TEXT = """# two-variable cascade
2 3
1 1 5
1 2 -3
2 2 1
"""


class TestParseInstance:
    """Reading instance text."""

    def test_cascade(self, cascade):
        assert parse_instance(CASCADE_TEXT) == cascade

    def test_blank_lines_and_comments(self, cascade):
        text = "\n# header follows\n\n2 3\n1 1 5\n# linear\n1 2 -3\n\n2 2 1\n"
        assert parse_instance(text) == cascade

    def test_zero_values_allowed(self):
        q = parse_instance("3 2\n1 1 0\n1 3 0\n")
        assert q == QuboInstance(3)

    def test_empty_instance(self):
        assert parse_instance("0 0\n").n == 0

    def test_missing_header(self):
        with pytest.raises(InstanceFormatError):
            parse_instance("# nothing here\n")

    def test_non_integer_field(self):
        with pytest.raises(InstanceFormatError) as excinfo:
            parse_instance("2 1\n1 2 1.5\n")
        assert excinfo.value.line_number == 2

    def test_index_out_of_range(self):
        with pytest.raises(InstanceFormatError) as excinfo:
            parse_instance("2 1\n1 3 4\n")
        assert excinfo.value.line_number == 2
        assert str(excinfo.value).startswith("line 2:")

    def test_lower_triangle_rejected(self):
        with pytest.raises(InstanceFormatError):
            parse_instance("2 1\n2 1 4\n")

    def test_duplicate_names_both_lines(self):
        with pytest.raises(InstanceFormatError) as excinfo:
            parse_instance("3 3\n1 2 4\n2 3 1\n1 2 5\n")
        message = str(excinfo.value)
        assert "line 4" in message
        assert "(1, 2)" in message
        assert "line 2" in message

    def test_too_few_entries(self):
        with pytest.raises(InstanceFormatError):
            parse_instance("2 3\n1 1 5\n")

    def test_too_many_entries(self):
        with pytest.raises(InstanceFormatError) as excinfo:
            parse_instance("2 1\n1 1 5\n2 2 1\n")
        assert excinfo.value.line_number == 3


class TestFormatInstance:
    """Writing instance text."""

    def test_sorted_and_header(self, mixed_five):
        lines = format_instance(mixed_five, comments=["five nodes"]).splitlines()
        assert lines[0] == "# five nodes"
        assert lines[1] == f"5 {mixed_five.entry_count}"
        entries = [tuple(int(t) for t in line.split()[:2]) for line in lines[2:]]
        assert entries == sorted(entries)

    def test_file_round_trip(self, tmp_path, positive_five):
        path = tmp_path / 'positive_five.txt'
        write_instance(positive_five, str(path))
        assert read_instance(str(path)) == positive_five


class TestSolutionFiles:
    """Solution text."""

    def test_format(self):
        assert format_solution(Solution((1, 1, 0), 5)) == "5\n1 1 0\n"

    def test_parse(self):
        solution = parse_solution("5\n1 1 0\n")
        assert solution.assignment == (1, 1, 0)
        assert solution.objective == 5

    def test_empty_assignment(self):
        assert parse_solution("7\n").assignment == ()

    def test_non_binary(self):
        with pytest.raises(InstanceFormatError):
            parse_solution("5\n1 2 0\n")

    def test_file_round_trip(self, tmp_path):
        path = tmp_path / 'best.sol'
        write_solution(Solution((0, 1), -3), str(path))
        assert read_solution(str(path)) == Solution((0, 1), -3)
