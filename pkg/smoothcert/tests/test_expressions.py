"""Unit tests for SafeExpressionEvaluator and the numeric argument parsers."""

import math

import pytest

from smoothcert.expressions import SafeExpressionEvaluator, parse_number, parse_number_list


class TestSafeExpressionEvaluator:
    """Test cases for SafeExpressionEvaluator class."""

    def test_basic_arithmetic(self):
        """Test basic arithmetic operations."""
        assert SafeExpressionEvaluator.evaluate("2 + 3") == 5
        assert SafeExpressionEvaluator.evaluate("10 - 4") == 6
        assert SafeExpressionEvaluator.evaluate("7 + 3 * 2") == 13
        assert SafeExpressionEvaluator.evaluate("1/50") == 0.02

    def test_floor_division_and_modulo(self):
        """Test floor division and modulo."""
        assert SafeExpressionEvaluator.evaluate("3072 // 2") == 1536
        assert SafeExpressionEvaluator.evaluate("17 % 5") == 2

    def test_unary_and_power(self):
        """Test unary operators and exponentiation."""
        assert SafeExpressionEvaluator.evaluate("-(3 + 2)") == -5
        assert SafeExpressionEvaluator.evaluate("2 ** 8") == 256
        assert SafeExpressionEvaluator.evaluate("1e-4") == 1e-4

    def test_math_functions(self):
        """Test the whitelisted functions and constants."""
        assert SafeExpressionEvaluator.evaluate("sqrt(3072)") == pytest.approx(math.sqrt(3072))
        assert SafeExpressionEvaluator.evaluate("max(1, 2, 3)") == 3
        assert SafeExpressionEvaluator.evaluate("log(e)") == pytest.approx(1.0)
        assert SafeExpressionEvaluator.evaluate("pi") == math.pi

    def test_variables(self):
        """Test bound variables such as d."""
        assert SafeExpressionEvaluator.evaluate("d/2 - 5", {"d": 100000}) == 49995
        assert SafeExpressionEvaluator.evaluate("d", {"d": 3072}) == 3072

    def test_unknown_names(self):
        """Test that unknown variables and functions are rejected."""
        with pytest.raises(ValueError, match="Invalid expression"):
            SafeExpressionEvaluator.evaluate("d / 2")
        with pytest.raises(ValueError, match="Invalid expression"):
            SafeExpressionEvaluator.evaluate("__import__('os')")

    def test_unsafe_constructs(self):
        """Test that attribute access, strings and booleans are rejected."""
        for expr in ("(1).real", "'a'", "True", "[1, 2]", "1 < 2"):
            with pytest.raises(ValueError):
                SafeExpressionEvaluator.evaluate(expr)

    def test_division_by_zero(self):
        """Test that division by zero surfaces as ValueError."""
        with pytest.raises(ValueError):
            SafeExpressionEvaluator.evaluate("1 / 0")


class TestParseNumbers:
    """Test cases for parse_number and parse_number_list."""

    def test_parse_number(self):
        """Test that results are floats."""
        assert parse_number("1/2") == 0.5
        assert isinstance(parse_number("3"), float)

    def test_list(self):
        """Test comma-separated values."""
        assert parse_number_list("0.5, 1, 2, 1/4") == [0.5, 1.0, 2.0, 0.25]

    def test_range(self):
        """Test start:stop:count expansion."""
        assert parse_number_list("0:1:5") == pytest.approx([0.0, 0.25, 0.5, 0.75, 1.0])
        assert parse_number_list("2:9:1") == [2.0]

    def test_mixed_with_variables(self):
        """Test ranges and variables together."""
        assert parse_number_list("d, d/2:d:2", {"d": 10}) == [10.0, 5.0, 10.0]

    def test_bad_lists(self):
        """Test that malformed lists raise ValueError."""
        for text in ("", " , ", "1:2", "0:1:0"):
            with pytest.raises(ValueError):
                parse_number_list(text)
