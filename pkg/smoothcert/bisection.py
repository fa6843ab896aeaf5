"""Bisection kernels shared by the NP and DSRS solvers."""

import math
import logging
from dataclasses import dataclass
from typing import Callable, Tuple

from smoothcert.errors import SolverError

logger = logging.getLogger(__name__)

MONOTONE_SLACK = 1e-8


@dataclass
class BisectionResult:
    x: float
    value: float
    residual: float
    iterations: int
    bracket: Tuple[float, float]
    at_edge: bool = False


def _expand(lo: float, hi: float, grow_low: bool) -> Tuple[float, float]:
    width = hi - lo
    if grow_low:
        return lo - width, hi
    return lo, hi + width


def solve_increasing(
    fn: Callable[[float], float],
    target: float,
    lo: float = -40.0,
    hi: float = 40.0,
    tol_x: float = 1e-12,
    tol_f: float = 1e-10,
    max_iter: int = 200,
    max_expansions: int = 6,
    allow_edge: bool = False,
) -> BisectionResult:
    """Find x with fn(x) = target for a nondecreasing fn.

    The bracket is doubled in width until it straddles ``target``. If it never
    does and ``allow_edge`` is set, the nearer edge is returned, standing in for
    a root at plus or minus infinity.
    """
    f_lo, f_hi = fn(lo), fn(hi)
    iterations = 2
    expansions = 0
    while not (f_lo <= target <= f_hi):
        if f_hi < f_lo - MONOTONE_SLACK:
            raise SolverError(
                "response decreases across the bracket",
                bracket=(lo, hi),
                residuals=(f_lo - target, f_hi - target),
                iterations=iterations,
            )
        if expansions >= max_expansions:
            if allow_edge:
                edge, value = (lo, f_lo) if target < f_lo else (hi, f_hi)
                logger.debug(f"target {target:.12g} beyond bracket [{lo:.4g}, {hi:.4g}], using edge {edge:.4g}")
                return BisectionResult(edge, value, abs(value - target), iterations, (lo, hi), at_edge=True)
            raise SolverError(
                f"could not bracket target {target:.12g}",
                bracket=(lo, hi),
                residuals=(f_lo - target, f_hi - target),
                iterations=iterations,
            )
        grow_low = target < f_lo
        lo, hi = _expand(lo, hi, grow_low)
        if grow_low:
            f_lo = fn(lo)
        else:
            f_hi = fn(hi)
        iterations += 1
        expansions += 1

    best_x, best_f = (lo, f_lo) if abs(f_lo - target) <= abs(f_hi - target) else (hi, f_hi)
    for _ in range(max_iter):
        if abs(best_f - target) <= tol_f or hi - lo <= tol_x:
            break
        mid = 0.5 * (lo + hi)
        f_mid = fn(mid)
        iterations += 1
        if f_mid < f_lo - MONOTONE_SLACK or f_mid > f_hi + MONOTONE_SLACK:
            raise SolverError(
                "non-monotone response inside the bracket",
                bracket=(lo, hi),
                residuals=(f_lo - target, f_hi - target),
                iterations=iterations,
                context={"midpoint": mid, "value": f_mid},
            )
        if abs(f_mid - target) < abs(best_f - target):
            best_x, best_f = mid, f_mid
        if f_mid < target:
            lo, f_lo = mid, f_mid
        else:
            hi, f_hi = mid, f_mid

    return BisectionResult(best_x, best_f, abs(best_f - target), iterations, (lo, hi))


def largest_true(
    predicate: Callable[[float], bool],
    lo: float,
    hi: float,
    tol: float,
    max_expansions: int = 20,
) -> Tuple[float, int]:
    """Largest x in [lo, inf) where a monotone nonincreasing predicate holds, to ``tol``.

    ``predicate(lo)`` is assumed true. Returns (x, evaluations).
    """
    evaluations = 0
    expansions = 0
    while predicate(hi):
        evaluations += 1
        if expansions >= max_expansions or not math.isfinite(hi):
            logger.warning(f"predicate still holds at {hi:.6g}; stopping expansion")
            return hi, evaluations
        lo, hi = hi, 2.0 * hi
        expansions += 1
    evaluations += 1

    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        evaluations += 1
        if predicate(mid):
            lo = mid
        else:
            hi = mid
    return lo, evaluations
