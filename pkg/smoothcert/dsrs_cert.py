"""Double-sampling certification with a truncated supplementary distribution.

P is the smoothing law and Q the same law truncated to the ball of radius T,
with density C * p inside the ball. The worst-case region is a likelihood-ratio
level set with two thresholds: -ν₁ outside the ball and -(ν₁ + Cν₂) inside it.
Both are carried in log space:

    log_neg_nu1       = ln(-ν₁)          (-inf when ν₁ >= 0)
    log_neg_combined  = ln(-(ν₁ + Cν₂))  (-inf when the combination is >= 0)

Q only sees the inner threshold, so the B constraint pins ``log_neg_combined``
on its own. The outer multiplier then absorbs A - B/C of P-mass outside the
ball.
"""

import math
import logging
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from smoothcert import integrator
from smoothcert import special_functions as sf
from smoothcert.bisection import largest_true, solve_increasing
from smoothcert.distributions import DistributionSpec, radius_for_mass, ratio_constant
from smoothcert.errors import InfeasiblePairError, SolverError
from smoothcert.integrator import IntegratorConfig
from smoothcert.np_cert import inside_fraction, level_gap, outside_fraction
from smoothcert.results import CertificationResult

logger = logging.getLogger(__name__)

DUAL_BRACKET = (-60.0, 60.0)
EDGE_EPS = 1e-12
# Outer P-mass kept this far below its ceiling 1 - 1/C; at the ceiling the
# equality-constrained dual stops being a valid worst case.
EDGE_BACKOFF = 1e-6


@dataclass(frozen=True)
class ProbabilityPair:
    A: float
    B: float
    provenance: str = "exact"
    note: str = ""

    def __post_init__(self):
        if not (0.0 <= self.A <= 1.0 and 0.0 <= self.B <= 1.0):
            raise ValueError(f"probabilities must lie in [0, 1], got A={self.A}, B={self.B}")
        if self.provenance not in ("exact", "clopper_pearson"):
            raise ValueError(f"unknown provenance '{self.provenance}'")


@dataclass
class DualSolution:
    log_neg_nu1: float
    log_neg_combined: float
    residual_A: float = 0.0
    residual_B: float = 0.0
    iterations: int = 0
    converged: bool = True
    edge_backoff: bool = False

    @property
    def nu1_nonnegative(self) -> bool:
        return self.log_neg_nu1 == -math.inf


@dataclass(frozen=True)
class Feasibility:
    ok: bool
    violation: str = ""

    def __bool__(self) -> bool:
        return self.ok


@dataclass(frozen=True)
class DsrsProblem:
    p_spec: DistributionSpec
    q_spec: DistributionSpec
    pair: ProbabilityPair
    tol: float = 1e-6
    integrator: IntegratorConfig = field(default_factory=IntegratorConfig)

    def __post_init__(self):
        if self.p_spec.truncated:
            raise ValueError("p_spec must be untruncated")
        if not self.q_spec.truncated:
            raise ValueError("q_spec needs a truncation radius T")
        if self.q_spec.untruncated() != self.p_spec:
            raise ValueError("q_spec must differ from p_spec only by T")
        if self.p_spec.d < 2:
            raise ValueError("certification needs d >= 2")
        if self.tol <= 0:
            raise ValueError("tol must be positive")

    @property
    def C(self) -> float:
        return ratio_constant(self.q_spec)

    @property
    def u_T(self) -> float:
        return self.q_spec.u_truncation


def build_problem(p_spec: DistributionSpec, T: float, A: float, B: float, tol: float = 1e-6,
                  config: Optional[IntegratorConfig] = None, provenance: str = "exact") -> DsrsProblem:
    return DsrsProblem(p_spec, p_spec.with_truncation(T), ProbabilityPair(A, B, provenance), tol,
                       config or IntegratorConfig())


def feasibility_check(A: float, B: float, C: float) -> Feasibility:
    """B/C <= A <= 1 - (1 - B)/C and 0 <= B <= 1."""
    if C < 1:
        raise ValueError(f"ratio constant must be >= 1, got {C}")
    if not 0.0 <= B <= 1.0:
        return Feasibility(False, f"B={B} outside [0, 1]")
    if A < B / C - EDGE_EPS:
        return Feasibility(False, f"A={A} < B/C={B / C:.6g}")
    upper = 1.0 - (1.0 - B) / C
    if A > upper + EDGE_EPS:
        return Feasibility(False, f"A={A} > 1 - (1 - B)/C={upper:.6g}")
    return Feasibility(True)


def heuristic_T(spec: DistributionSpec, kappa: float) -> float:
    """scale * (2 Λ^{-1}_shape(kappa))^{1/eta}: the T holding mass kappa under P."""
    if not 0 < kappa < 1:
        raise ValueError(f"kappa must lie in (0, 1), got {kappa}")
    return radius_for_mass(spec.untruncated(), kappa)


def _omega_natural_pair(spec: DistributionSpec, u, rho: float, log_outer: float, log_inner: float, u_T: float):
    """P-mass of the region on the sphere at u, switching threshold at the ball edge."""
    gap_out, t = level_gap(spec, u, log_outer, -1)
    gap_in, _ = level_gap(spec, u, log_inner, -1)
    gap = np.where(np.asarray(u) > u_T, gap_out, gap_in)
    return outside_fraction(spec, t, rho, gap)


def _q_mass(problem: DsrsProblem, rho: float, log_inner: float) -> float:
    spec, u_T = problem.p_spec, problem.u_T

    def f(u):
        gap, t = level_gap(spec, u, log_inner, -1)
        return np.where(np.asarray(u) <= u_T, outside_fraction(spec, t, rho, gap), 0.0)

    return problem.C * integrator.expectation(spec.shape, f, (u_T,), problem.integrator)


def _outer_p_mass(problem: DsrsProblem, rho: float, log_outer: float) -> float:
    spec, u_T = problem.p_spec, problem.u_T

    def f(u):
        gap, t = level_gap(spec, u, log_outer, -1)
        return np.where(np.asarray(u) > u_T, outside_fraction(spec, t, rho, gap), 0.0)

    return integrator.expectation(spec.shape, f, (u_T,), problem.integrator)


def _shifted_mass(problem: DsrsProblem, rho: float, dual: DualSolution) -> float:
    spec = problem.p_spec
    T = problem.q_spec.T

    def f(u):
        gap_in, t = level_gap(spec, u, dual.log_neg_combined, +1)
        gap_ball = T * T - t * t
        omega2 = inside_fraction(spec, t, rho, np.minimum(gap_ball, gap_in))
        if dual.nu1_nonnegative:
            return omega2
        gap_out, _ = level_gap(spec, u, dual.log_neg_nu1, +1)
        omega3 = np.maximum(
            np.asarray(inside_fraction(spec, t, rho, gap_out)) - np.asarray(inside_fraction(spec, t, rho, gap_ball)),
            0.0,
        )
        return omega2 + omega3

    return integrator.expectation(spec.shape, f, (problem.u_T,), problem.integrator)


def dsrs_three_masses(problem: DsrsProblem, rho: float, dual: DualSolution) -> Tuple[float, float, float]:
    """(P(W), Q(W), (P + δ)(W)) for the level set W defined by ``dual``."""
    spec, u_T = problem.p_spec, problem.u_T
    p_mass = integrator.expectation(
        spec.shape,
        lambda u: _omega_natural_pair(spec, u, rho, dual.log_neg_nu1, dual.log_neg_combined, u_T),
        (u_T,),
        problem.integrator,
    )
    return p_mass, _q_mass(problem, rho, dual.log_neg_combined), _shifted_mass(problem, rho, dual)


def _solve_log_multiplier(fn, target: float, top: float) -> Tuple[float, float, int]:
    """Log multiplier hitting ``target`` for an increasing map with range [0, top]."""
    if target <= EDGE_EPS:
        return -math.inf, 0.0, 0
    if target >= top - EDGE_EPS:
        return math.inf, top, 0
    result = solve_increasing(fn, target, *DUAL_BRACKET, tol_f=1e-10, allow_edge=True)
    return result.x, result.value, result.iterations


def solve_duals(problem: DsrsProblem, rho: float) -> DualSolution:
    """Multipliers with P(W) = A and Q(W) = B at shift rho.

    The combined multiplier is bisected against the B constraint first; the
    outer one is then bisected against the A constraint given that value.
    """
    A, B, C = problem.pair.A, problem.pair.B, problem.C
    feasible = feasibility_check(A, B, C)
    if not feasible:
        raise InfeasiblePairError(f"infeasible pair: {feasible.violation}", feasible.violation)

    log_inner, q_value, iter_inner = _solve_log_multiplier(
        lambda L: _q_mass(problem, rho, L), B, 1.0,
    )
    outer_top = 1.0 - 1.0 / C
    outer_target = A - q_value / C
    backed_off = outer_target > outer_top - EDGE_BACKOFF
    if backed_off:
        outer_target = max(outer_top - EDGE_BACKOFF, 0.0)
    log_outer, outer_value, iter_outer = _solve_log_multiplier(
        lambda L: _outer_p_mass(problem, rho, L), outer_target, outer_top,
    )
    residual_B = abs(q_value - B)
    residual_A = abs(outer_value - outer_target)
    converged = residual_A <= 1e-8 and residual_B <= 1e-8
    if not converged:
        logger.debug(f"dual residuals at rho={rho:.6g}: A {residual_A:.3g}, B {residual_B:.3g}")
    return DualSolution(log_outer, log_inner, residual_A, residual_B, iter_inner + iter_outer, converged,
                        backed_off)


def _initial_upper(problem: DsrsProblem) -> float:
    A = min(max(problem.pair.A, 0.5 + 1e-12), 1.0 - 1e-10)
    return 20.0 * problem.p_spec.sigma * max(1.0, float(sf.std_normal_cdf_inv(A)))


def dsrs_certify(problem: DsrsProblem) -> CertificationResult:
    """Largest rho, to ``tol``, whose worst-case (P + δ)-mass exceeds 1/2."""
    pair = problem.pair
    feasible = feasibility_check(pair.A, pair.B, problem.C)
    if not feasible:
        raise InfeasiblePairError(f"infeasible pair: {feasible.violation}", feasible.violation)

    iterations = [0]

    def certifies(rho: float) -> bool:
        dual = solve_duals(problem, rho)
        iterations[0] += dual.iterations
        return _shifted_mass(problem, rho, dual) > 0.5

    record = {**problem.p_spec.to_record(), "T": problem.q_spec.T}
    try:
        if not certifies(problem.tol):
            return CertificationResult("dsrs", 0.0, status="abstain", iterations=iterations[0],
                                       spec=record, A=pair.A, B=pair.B, message="fails at rho = tol")
        radius, _ = largest_true(certifies, problem.tol, _initial_upper(problem), problem.tol)
        final = solve_duals(problem, radius)
    except SolverError as e:
        logger.error(f"DSRS certification failed for {problem.p_spec} at (A, B)=({pair.A}, {pair.B}): {e}",
                     exc_info=True)
        e.context.setdefault("A", pair.A)
        e.context.setdefault("B", pair.B)
        raise

    return CertificationResult(
        "dsrs",
        radius,
        iterations=iterations[0] + final.iterations,
        residuals={"A": final.residual_A, "B": final.residual_B},
        dual={"log_neg_nu1": final.log_neg_nu1, "log_neg_combined": final.log_neg_combined},
        spec=record,
        A=pair.A,
        B=pair.B,
        message=f"A backed off {EDGE_BACKOFF:g} from the upper feasibility edge" if final.edge_backoff else "",
    )


def b1_shifted_mass(p_spec: DistributionSpec, T: float, rho: float, config: IntegratorConfig) -> float:
    """E_u Ψ((T² - (t - rho)²) / (4 rho t)): the (P + δ)-mass of the T-ball."""

    def f(u):
        t = p_spec.radius_of(u)
        return inside_fraction(p_spec, t, rho, T * T - t * t)

    return integrator.expectation(p_spec.shape, f, (), config)


def dsrs_certify_b1(p_spec: DistributionSpec, q_spec: DistributionSpec, tol: float = 1e-6,
                    config: Optional[IntegratorConfig] = None) -> CertificationResult:
    """Certification when Q is perfectly classified (B = 1).

    The inner multiplier runs to -inf, the region inside the ball is the whole
    ball, and no dual search remains.
    """
    if not q_spec.truncated or q_spec.untruncated() != p_spec:
        raise ValueError("q_spec must be p_spec truncated at some T")
    config = config or IntegratorConfig()
    T = q_spec.T
    record = {**p_spec.to_record(), "T": T}

    def certifies(rho: float) -> bool:
        return b1_shifted_mass(p_spec, T, rho, config) >= 0.5

    if not certifies(tol):
        return CertificationResult("dsrs_b1", 0.0, status="abstain", spec=record, A=None, B=1.0,
                                   message="fails at rho = tol")
    radius, evaluations = largest_true(certifies, tol, max(T, 2.0 * tol), tol)
    return CertificationResult("dsrs_b1", radius, iterations=evaluations, spec=record, B=1.0)
