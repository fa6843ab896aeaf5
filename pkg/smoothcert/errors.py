"""Exception types raised by the certification engine."""

from typing import Any, Dict, Optional, Tuple


class DomainError(ValueError):
    """An argument lies outside the domain of a special function or distribution."""


class InfeasiblePairError(ValueError):
    """The (A, B) pair cannot be realised by any classifier under (P, Q)."""

    def __init__(self, message: str, inequality: str = ""):
        super().__init__(message)
        self.inequality = inequality


class SolverError(RuntimeError):
    """A bisection could not bracket its target or saw a non-monotone response."""

    def __init__(
        self,
        message: str,
        bracket: Optional[Tuple[float, float]] = None,
        residuals: Optional[Tuple[float, float]] = None,
        iterations: int = 0,
        context: Optional[Dict[str, Any]] = None,
    ):
        super().__init__(message)
        self.bracket = bracket
        self.residuals = residuals
        self.iterations = iterations
        self.context = context or {}

    def to_dict(self) -> Dict[str, Any]:
        return {
            "error": type(self).__name__,
            "message": str(self),
            "bracket": list(self.bracket) if self.bracket else None,
            "residuals": list(self.residuals) if self.residuals else None,
            "iterations": self.iterations,
            **self.context,
        }


class IntegrationError(SolverError):
    """Adaptive quadrature ran out of subdivisions before reaching its tolerance."""

    def __init__(self, message: str, achieved: float = float("nan"), **kwargs):
        super().__init__(message, **kwargs)
        self.achieved = achieved
