"""Certified radii under the concentration assumption, and the Λ-value tables.

A classifier is (sigma, p, eta)-concentrated when it is always correct on noise
inside the ball of radius T holding mass p. Then B = 1 and whether rho
certifies reduces to one expectation (``concentrated_lhs``). Lower-bounding that
expectation by θ Λ_{(d-2k)/eta}(m) gives closed-form checks, tabulated by
``lambda_table_fixbase`` (radius mu sigma sqrt(d)) and ``lambda_table_thcorres``
(eta = 1/n with a dimension threshold d_tilde).
"""

import math
import logging
from dataclasses import dataclass
from typing import Optional

from smoothcert import special_functions as sf
from smoothcert.bisection import largest_true
from smoothcert.distributions import DistributionSpec, egg, esg, radius_for_mass
from smoothcert.dsrs_cert import b1_shifted_mass
from smoothcert.errors import DomainError
from smoothcert.integrator import IntegratorConfig

logger = logging.getLogger(__name__)

ADAPTIVE = IntegratorConfig(method="adaptive")


@dataclass(frozen=True)
class ConcentrationParams:
    theta: float = 0.999
    beta: float = 0.99
    tau: float = 0.6
    mu_or_zeta: float = 0.02
    p: float = 0.5
    d_tilde: int = 25000

    def __post_init__(self):
        if not (0 < self.theta < 1 and 0 < self.beta < 1):
            raise ValueError("theta and beta must lie in (0, 1)")
        if not 0.5 < self.tau < 1:
            raise ValueError("tau must lie in (1/2, 1)")
        if self.mu_or_zeta <= 0:
            raise ValueError("mu_or_zeta must be positive")
        if not 0 < self.p < 1:
            raise ValueError("p must lie in (0, 1)")
        if self.d_tilde < 1:
            raise ValueError("d_tilde must be >= 1")

    @property
    def threshold(self) -> float:
        """1 / (2 theta): a table cell certifies when it exceeds this."""
        return 1.0 / (2.0 * self.theta)


def _spec(d: int, k: int, eta: float, sigma: float) -> DistributionSpec:
    return egg(d, sigma, eta, k) if k > 0 else esg(d, sigma, eta)


def concentrated_lhs(d: int, k: int, eta: float, T: float, rho: float, sigma: float = 1.0,
                     config: IntegratorConfig = ADAPTIVE) -> float:
    """E_u Ψ_{(d-1)/2}((T² - (t - rho)²) / (4 rho t)) with t = scale (2u)^{1/eta}."""
    if d - 2 * k < 1:
        raise DomainError(f"need d - 2k >= 1, got d={d}, k={k}")
    return b1_shifted_mass(_spec(d, k, eta, sigma), T, rho, config)


def concentrated_radius(d: int, k: int, eta: float, T: float, sigma: float = 1.0, tol: float = 1e-6,
                        config: IntegratorConfig = ADAPTIVE) -> float:
    """Largest rho with concentrated_lhs >= 1/2."""
    def certifies(rho: float) -> bool:
        return concentrated_lhs(d, k, eta, T, rho, sigma, config) >= 0.5

    if not certifies(tol):
        return 0.0
    radius, _ = largest_true(certifies, tol, max(T, 2.0 * tol), tol)
    return radius


def _log_gamma_ratio_term(d_minus_2k: int, eta: float) -> float:
    """ln sqrt(Γ((n + 2)/eta) / Γ(n/eta))."""
    return 0.5 * (math.lgamma((d_minus_2k + 2) / eta) - math.lgamma(d_minus_2k / eta))


def _check_base(d_minus_2k: int, eta: float):
    if d_minus_2k < 1:
        raise DomainError(f"d - 2k must be >= 1, got {d_minus_2k}")
    if eta <= 0:
        raise DomainError(f"eta must be positive, got {eta}")


def log_m_fixbase(d_minus_2k: int, eta: float, mu: float, params: ConcentrationParams) -> float:
    """ln m for the radius mu sigma sqrt(d); -inf once the bracket turns nonpositive."""
    tau, beta = params.tau, params.beta
    radicand = beta + (4 * tau * tau - 4 * tau) * mu * mu
    if radicand < 0:
        return -math.inf
    inner = (1 - 2 * tau) * mu + math.sqrt(radicand)
    if inner <= 0:
        return -math.inf
    return eta * (_log_gamma_ratio_term(d_minus_2k, eta) + math.log(inner))


def _cell(d_minus_2k: int, eta: float, log_m: float) -> float:
    if log_m == -math.inf:
        return 0.0
    return sf.gamma_cdf(d_minus_2k / eta, math.exp(log_m))


def lambda_table_fixbase(d_minus_2k: int, eta: float, params: ConcentrationParams = ConcentrationParams()) -> float:
    """Λ_{(d-2k)/eta}(m) at mu = params.mu_or_zeta."""
    _check_base(d_minus_2k, eta)
    return _cell(d_minus_2k, eta, log_m_fixbase(d_minus_2k, eta, params.mu_or_zeta, params))


def tight_mu(d_minus_2k: int, eta: float, params: ConcentrationParams = ConcentrationParams(),
             e: float = 1e-6) -> float:
    """Largest mu in [0, 1], to width e, with theta Λ(m(mu)) > 1/2; 0 if mu = e fails."""
    _check_base(d_minus_2k, eta)
    if e <= 0:
        raise ValueError("e must be positive")

    def certifies(mu: float) -> bool:
        return params.theta * _cell(d_minus_2k, eta, log_m_fixbase(d_minus_2k, eta, mu, params)) > 0.5

    if not certifies(e):
        return 0.0
    if certifies(1.0):
        return 1.0
    lo, hi = e, 1.0
    while hi - lo > e:
        mid = 0.5 * (lo + hi)
        if certifies(mid):
            lo = mid
        else:
            hi = mid
    return lo


def _steps(eta: float) -> int:
    steps = 2.0 / eta
    n = int(round(steps))
    if n < 1 or abs(steps - n) > 1e-9:
        raise DomainError(f"2/eta must be a positive integer, got eta={eta}")
    return n


def log_dimension_prefactor(d_tilde: float, eta: float) -> float:
    """ln(d_tilde / (prod_{i=1}^{2/eta} ((d_tilde + 2)/eta - i))^{eta/2}), as a log-sum."""
    n = _steps(eta)
    top = (d_tilde + 2.0) / eta
    log_prod = math.fsum(math.log(top - i) for i in range(1, n + 1))
    return math.log(d_tilde) - 0.5 * eta * log_prod


def log_m_thcorres(d_minus_2k: int, eta: float, params: ConcentrationParams) -> float:
    tau, beta, zeta = params.tau, params.beta, params.mu_or_zeta
    n = _steps(eta)
    radicand = math.exp(n * math.log(2.0 * beta / eta)) + (4 * tau * tau - 4 * tau) * zeta * zeta
    inner = (1 - 2 * tau) * zeta + math.sqrt(radicand)
    return (
        log_dimension_prefactor(params.d_tilde, eta)
        - math.log(2.0)
        + eta * (_log_gamma_ratio_term(d_minus_2k, eta) + math.log(inner))
    )


def lambda_table_thcorres(d_minus_2k: int, eta: float, params: ConcentrationParams = ConcentrationParams()) -> float:
    """Λ_{(d-2k)/eta}(m) for eta = 1/n at the dimension threshold d_tilde."""
    _check_base(d_minus_2k, eta)
    return _cell(d_minus_2k, eta, log_m_thcorres(d_minus_2k, eta, params))


def concentration_T(d: int, sigma: float, p: float, eta: float = 2.0) -> float:
    """T with P{||z|| <= T} = p under ESG(sigma, eta)."""
    return radius_for_mass(esg(d, sigma, eta), p)


def certified_fraction_of_sqrt_d(d: int, k: int, eta: float, T: Optional[float] = None,
                                 sigma: float = 1.0, p: float = 0.5, tol: float = 1e-6) -> float:
    """Concentrated certified radius divided by sigma sqrt(d)."""
    if T is None:
        T = concentration_T(d, sigma, p, 2.0)
    return concentrated_radius(d, k, eta, T, sigma, tol) / (sigma * math.sqrt(d))
