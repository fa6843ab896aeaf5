"""Numeric command-line arguments: "1/50", "d/2-5", "0.5:2:4"."""

import ast
import math
import operator
from typing import Any, Dict, List, Optional


class SafeExpressionEvaluator:
    """Safe expression evaluator using AST parsing instead of eval()."""

    OPERATORS = {
        ast.Add: operator.add,
        ast.Sub: operator.sub,
        ast.Mult: operator.mul,
        ast.Div: operator.truediv,
        ast.FloorDiv: operator.floordiv,
        ast.Mod: operator.mod,
        ast.Pow: operator.pow,
        ast.USub: operator.neg,
        ast.UAdd: operator.pos,
    }

    MATH_FUNCTIONS = {
        'abs': abs,
        'floor': math.floor,
        'ceil': math.ceil,
        'sqrt': math.sqrt,
        'exp': math.exp,
        'log': math.log,
        'log10': math.log10,
        'min': min,
        'max': max,
    }

    MATH_CONSTANTS = {
        'pi': math.pi,
        'e': math.e,
    }

    @staticmethod
    def evaluate(expr: str, variables: Optional[Dict[str, float]] = None) -> Any:
        """Safely evaluate an arithmetic expression with optional bound variables."""
        try:
            node = ast.parse(expr.strip(), mode='eval').body
            return SafeExpressionEvaluator._eval_node(node, variables or {})
        except Exception as e:
            raise ValueError(f"Invalid expression: {str(e)}")

    @staticmethod
    def _eval_node(node, variables: Dict[str, float]):
        """Recursively evaluate AST nodes."""
        if isinstance(node, ast.Constant):
            if isinstance(node.value, bool) or not isinstance(node.value, (int, float)):
                raise ValueError(f"Unsupported constant: {node.value!r}")
            return node.value
        elif isinstance(node, ast.UnaryOp):
            op = SafeExpressionEvaluator.OPERATORS.get(type(node.op))
            if op is None:
                raise ValueError(f"Unsupported unary operator: {type(node.op).__name__}")
            return op(SafeExpressionEvaluator._eval_node(node.operand, variables))
        elif isinstance(node, ast.BinOp):
            op = SafeExpressionEvaluator.OPERATORS.get(type(node.op))
            if op is None:
                raise ValueError(f"Unsupported binary operator: {type(node.op).__name__}")
            left = SafeExpressionEvaluator._eval_node(node.left, variables)
            right = SafeExpressionEvaluator._eval_node(node.right, variables)
            return op(left, right)
        elif isinstance(node, ast.Call):
            if isinstance(node.func, ast.Name):
                func = SafeExpressionEvaluator.MATH_FUNCTIONS.get(node.func.id)
                if func is None:
                    raise ValueError(f"Unknown or unsafe function: {node.func.id}")
                args = [SafeExpressionEvaluator._eval_node(arg, variables) for arg in node.args]
                return func(*args)
            raise ValueError(f"Unsupported function call type: {type(node.func).__name__}")
        elif isinstance(node, ast.Name):
            if node.id in variables:
                return variables[node.id]
            if node.id in SafeExpressionEvaluator.MATH_CONSTANTS:
                return SafeExpressionEvaluator.MATH_CONSTANTS[node.id]
            raise ValueError(f"Unknown constant or variable: {node.id}")
        else:
            raise ValueError(f"Unsupported expression type: {type(node).__name__}")


def parse_number(text: str, variables: Optional[Dict[str, float]] = None) -> float:
    return float(SafeExpressionEvaluator.evaluate(str(text), variables))


def parse_number_list(text: str, variables: Optional[Dict[str, float]] = None) -> List[float]:
    """Comma-separated numbers; an item ``a:b:n`` expands to n evenly spaced values."""
    values: List[float] = []
    for item in str(text).split(","):
        item = item.strip()
        if not item:
            continue
        if ":" in item:
            parts = item.split(":")
            if len(parts) != 3:
                raise ValueError(f"Invalid expression: range '{item}' must be start:stop:count")
            start, stop = parse_number(parts[0], variables), parse_number(parts[1], variables)
            count = int(parse_number(parts[2], variables))
            if count < 1:
                raise ValueError(f"Invalid expression: range '{item}' needs a positive count")
            if count == 1:
                values.append(start)
            else:
                step = (stop - start) / (count - 1)
                values.extend(start + i * step for i in range(count))
        else:
            values.append(parse_number(item, variables))
    if not values:
        raise ValueError("Invalid expression: empty list")
    return values
