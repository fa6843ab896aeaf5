"""Single-distribution (Neyman-Pearson) certification under ESG and EGG noise.

The worst-case decision region at shift ||δ|| = rho is a likelihood-ratio level
set with multiplier ν < 0, stored as L = ln(-ν). On the sphere of radius t the
region is cut by a ball whose radius ξ solves h(s) = h(u) ± L, with
h(s) = s + (2k/eta) ln s and ξ = scale (2s)^{1/eta}. The fraction of the sphere
on either side of the cut is a symmetric beta CDF, giving:

* ``omega_natural``: mass of the region under P (the A constraint);
* ``omega_sharp``: mass of the region under P + δ (the certification check).
"""

import math
import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from smoothcert import integrator
from smoothcert import special_functions as sf
from smoothcert.bisection import largest_true, solve_increasing
from smoothcert.distributions import DistributionSpec, Family
from smoothcert.errors import DomainError, SolverError
from smoothcert.integrator import IntegratorConfig
from smoothcert.results import CertificationResult

logger = logging.getLogger(__name__)

NU_BRACKET = (-40.0, 40.0)
A_CEILING = 1.0 - 1e-10


@dataclass(frozen=True)
class NpProblem:
    spec: DistributionSpec
    A: float
    tol: float = 1e-6
    integrator: IntegratorConfig = field(default_factory=IntegratorConfig)

    def __post_init__(self):
        if self.spec.truncated:
            raise ValueError("NP certification uses the untruncated distribution")
        if self.spec.d < 2:
            raise ValueError("certification needs d >= 2")
        if not 0.0 <= self.A <= 1.0:
            raise ValueError(f"A must lie in [0, 1], got {self.A}")
        if self.tol <= 0:
            raise ValueError("tol must be positive")


@dataclass
class DualState:
    log_neg_nu: float
    residual: float
    iterations: int = 0


def level_log_ratio(spec: DistributionSpec, u, log_neg_nu: float, sign: int):
    """ln(s/u) where h(s) = h(u) + sign * L; -inf where no level set exists."""
    u = np.asarray(u, dtype=float)
    shift = sign * log_neg_nu
    if math.isinf(shift):
        return np.full_like(u, math.inf if shift > 0 else -math.inf)
    with np.errstate(divide="ignore", invalid="ignore"):
        if spec.k == 0:
            ratio = shift / u
            return np.where(ratio > -1.0, np.log1p(np.maximum(ratio, -1.0 + 1e-300)), -np.inf)
        a = spec.level_coefficient
        s = a * np.asarray(sf.lambert_w0_exp((u + a * np.log(u) + shift) / a - math.log(a)))
        return (u - s + shift) / a


def level_gap(spec: DistributionSpec, u, log_neg_nu: float, sign: int):
    """ξ² - t² for the level set at multiplier L, where t is the noise norm at u."""
    t = spec.radius_of(u)
    log_ratio = level_log_ratio(spec, u, log_neg_nu, sign)
    with np.errstate(over="ignore", invalid="ignore"):
        return t * t * np.expm1((2.0 / spec.eta) * log_ratio), t


def inside_fraction(spec: DistributionSpec, t, rho: float, gap):
    """Fraction of the sphere of radius t about δ lying within the ball of radius ξ about 0."""
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        x = (gap + 2.0 * t * rho - rho * rho) / (4.0 * rho * t)
    return sf.beta_cdf_sym(0.5 * (spec.d - 1), x)


def outside_fraction(spec: DistributionSpec, t, rho: float, gap):
    """Fraction of the sphere of radius t about 0 lying outside the ball of radius ξ about δ."""
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        x = (2.0 * t * rho + rho * rho - gap) / (4.0 * rho * t)
    return sf.beta_cdf_sym(0.5 * (spec.d - 1), x)


def omega_natural(spec: DistributionSpec, u, log_neg_nu: float, rho: float):
    """P-mass of the level set on the sphere at u; 1 where the level set is empty of cut."""
    gap, t = level_gap(spec, u, log_neg_nu, -1)
    return outside_fraction(spec, t, rho, gap)


def omega_sharp(spec: DistributionSpec, u, log_neg_nu: float, rho: float):
    """(P + δ)-mass of the level set on the shifted sphere at u; 0 where ξ collapses."""
    gap, t = level_gap(spec, u, log_neg_nu, +1)
    return inside_fraction(spec, t, rho, gap)


def _require_family(spec: DistributionSpec, family: Family):
    if spec.family != family:
        raise ValueError(f"expected a {family.value.upper()} spec, got {spec.family.value.upper()}")


def esg_omega_sharp(u, log_neg_nu: float, rho: float, spec: DistributionSpec):
    _require_family(spec, Family.ESG)
    return omega_sharp(spec, u, log_neg_nu, rho)


def esg_omega_natural(u, log_neg_nu: float, rho: float, spec: DistributionSpec):
    _require_family(spec, Family.ESG)
    return omega_natural(spec, u, log_neg_nu, rho)


def _breakpoints(spec: DistributionSpec, config: IntegratorConfig, log_neg_nu: float) -> Sequence[float]:
    """ESG branch boundaries u = ±L, passed only to the adaptive rule."""
    if config.method != "adaptive" or spec.k != 0 or not math.isfinite(log_neg_nu):
        return ()
    return tuple(b for b in (abs(log_neg_nu),) if b > 0)


def natural_mass(spec: DistributionSpec, rho: float, log_neg_nu: float, config: IntegratorConfig) -> float:
    return integrator.expectation(
        spec.shape,
        lambda u: omega_natural(spec, u, log_neg_nu, rho),
        _breakpoints(spec, config, log_neg_nu),
        config,
    )


def sharp_mass(spec: DistributionSpec, rho: float, log_neg_nu: float, config: IntegratorConfig) -> float:
    return integrator.expectation(
        spec.shape,
        lambda u: omega_sharp(spec, u, log_neg_nu, rho),
        _breakpoints(spec, config, log_neg_nu),
        config,
    )


def solve_np_dual(spec: DistributionSpec, A: float, rho: float, config: IntegratorConfig) -> DualState:
    """ln(-ν) with E[omega_natural] = A at shift rho."""
    result = solve_increasing(
        lambda L: natural_mass(spec, rho, L, config), A, *NU_BRACKET, tol_f=1e-10,
    )
    return DualState(result.x, result.residual, result.iterations)


def _initial_upper(sigma: float, A: float) -> float:
    return 20.0 * sigma * max(1.0, float(sf.std_normal_cdf_inv(min(max(A, 0.5 + 1e-12), A_CEILING))))


def np_certify(problem: NpProblem) -> CertificationResult:
    """Two-layer bisection: outer on the radius, inner on ln(-ν)."""
    spec = problem.spec
    config = problem.integrator
    A = problem.A
    if A <= 0.5:
        return CertificationResult("np", 0.0, status="abstain", spec=spec.to_record(), A=A,
                                   message="A <= 1/2")
    if A > A_CEILING:
        logger.warning(f"A={A} clipped to {A_CEILING}")
        A = A_CEILING

    iterations = [0]

    def certifies(rho: float) -> bool:
        dual = solve_np_dual(spec, A, rho, config)
        iterations[0] += dual.iterations
        return sharp_mass(spec, rho, dual.log_neg_nu, config) >= 0.5

    try:
        if not certifies(problem.tol):
            return CertificationResult("np", 0.0, status="abstain", iterations=iterations[0],
                                       spec=spec.to_record(), A=A, message="fails at rho = tol")
        radius, _ = largest_true(certifies, problem.tol, _initial_upper(spec.sigma, A), problem.tol)
        final = solve_np_dual(spec, A, radius, config)
    except SolverError as e:
        logger.error(f"NP certification failed for {spec} at A={A}: {e}", exc_info=True)
        e.context.setdefault("A", A)
        raise

    logger.debug(f"NP radius {radius:.6f} for {spec.family.value} eta={spec.eta} A={A}")
    return CertificationResult(
        "np",
        radius,
        iterations=iterations[0] + final.iterations,
        residuals={"A": final.residual},
        dual={"log_neg_nu1": final.log_neg_nu},
        spec=spec.to_record(),
        A=problem.A,
    )


def esg_np_certify(problem: NpProblem) -> CertificationResult:
    _require_family(problem.spec, Family.ESG)
    return np_certify(problem)


def egg_np_certify(problem: NpProblem) -> CertificationResult:
    _require_family(problem.spec, Family.EGG)
    return np_certify(problem)


def probability_from_radius(spec: DistributionSpec, rho: float,
                            config: IntegratorConfig = IntegratorConfig()) -> DualState:
    """The A certifying exactly rho, returned with the ln(-ν) that balances P + δ at 1/2.

    ``DualState.residual`` holds the resulting A.
    """
    if rho <= 0:
        raise DomainError("rho must be positive")
    result = solve_increasing(lambda L: sharp_mass(spec, rho, L, config), 0.5, *NU_BRACKET, tol_f=1e-11)
    A = natural_mass(spec, rho, result.x, config)
    return DualState(result.x, A, result.iterations)


def esg_probability_from_radius(spec: DistributionSpec, rho: float,
                                config: IntegratorConfig = IntegratorConfig()) -> float:
    _require_family(spec, Family.ESG)
    return probability_from_radius(spec, rho, config).residual


def esg_analytic_probability(d: int, sigma: float, rho: float) -> float:
    """Ψ_{(d-1)/2}(1/2 + rho / (2 sigma sqrt(d)))."""
    if rho < 0:
        raise DomainError("rho must be nonnegative")
    return sf.beta_cdf_sym(0.5 * (d - 1), 0.5 + rho / (2.0 * sigma * math.sqrt(d)))


def esg_analytic_radius(d: int, sigma: float, A: float) -> float:
    if not 0.0 <= A < 1.0:
        raise DomainError(f"A must lie in [0, 1), got {A}")
    if A <= 0.5:
        return 0.0
    x = sf.beta_cdf_sym_inv(0.5 * (d - 1), A)
    return max(0.0, (x - 0.5) * 2.0 * sigma * math.sqrt(d))


def cohen_radius(sigma: float, A: float) -> float:
    """sigma * Φ^{-1}(A)."""
    if not 0.0 <= A < 1.0:
        raise DomainError(f"A must lie in [0, 1), got {A}")
    if A <= 0.5:
        return 0.0
    return sigma * sf.std_normal_cdf_inv(A)
