"""Exponential Standard/General Gaussian smoothing distributions.

Only the radial profile of each law is modelled. The norm of a draw is
``scale * (2u)^{1/eta}`` with ``u ~ Gamma(shape, 1)``, where ``shape`` is d/eta
(ESG) or (d - 2k)/eta (EGG) and ``scale`` is the formal variance parameter
calibrated so that E||z||^2 = d * sigma^2.
"""

import math
import logging
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from smoothcert import special_functions as sf
from smoothcert.errors import DomainError

logger = logging.getLogger(__name__)


class Family(str, Enum):
    ESG = "esg"
    EGG = "egg"


@dataclass(frozen=True)
class DistributionSpec:
    """Parameters of an ESG/EGG law, optionally truncated to the ball of radius T.

    ``sigma`` is the formal variance parameter of the family, a scale rather than
    a variance; ``scale`` is the derived σ_s / σ_g.
    """

    family: Family
    d: int
    sigma: float
    eta: float
    k: int = 0
    T: Optional[float] = None
    shape: float = field(init=False, repr=False, compare=False)
    log_scale: float = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        if self.d < 1:
            raise ValueError(f"dimension must be >= 1, got {self.d}")
        if self.sigma <= 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        if self.eta <= 0:
            raise ValueError(f"eta must be positive, got {self.eta}")
        if self.k < 0:
            raise ValueError(f"k must be nonnegative, got {self.k}")
        if self.family == Family.ESG and self.k != 0:
            raise ValueError("ESG distributions have k = 0")
        if self.family == Family.EGG and self.d - 2 * self.k < 1:
            raise ValueError(f"EGG requires d - 2k >= 1, got d={self.d}, k={self.k}")
        if self.T is not None and self.T <= 0:
            raise ValueError(f"truncation radius must be positive, got {self.T}")

        shape = (self.d - 2 * self.k) / self.eta
        log_scale = (
            math.log(self.sigma)
            - math.log(2.0) / self.eta
            + 0.5 * (math.log(self.d) + math.lgamma(shape) - math.lgamma(shape + 2.0 / self.eta))
        )
        object.__setattr__(self, "shape", shape)
        object.__setattr__(self, "log_scale", log_scale)

    @property
    def scale(self) -> float:
        return math.exp(self.log_scale)

    @property
    def truncated(self) -> bool:
        return self.T is not None

    @property
    def level_coefficient(self) -> float:
        """2k/eta, the weight of ln u in the level-set function h(u) = u + (2k/eta) ln u."""
        return 2.0 * self.k / self.eta

    @property
    def u_truncation(self) -> float:
        """T^eta / (2 scale^eta), the truncation point in gamma coordinates."""
        if self.T is None:
            return math.inf
        return math.exp(self.eta * (math.log(self.T) - self.log_scale) - math.log(2.0))

    def with_truncation(self, T: Optional[float]) -> "DistributionSpec":
        return replace(self, T=T)

    def untruncated(self) -> "DistributionSpec":
        return replace(self, T=None)

    def radius_of(self, u):
        """Noise norm at gamma coordinate u."""
        u = np.asarray(u, dtype=float)
        return np.exp(self.log_scale + np.log(2.0 * u) / self.eta)

    def u_of(self, r):
        """Gamma coordinate of noise norm r."""
        r = np.asarray(r, dtype=float)
        return np.exp(self.eta * (np.log(r) - self.log_scale) - math.log(2.0))

    def to_record(self) -> Dict[str, Any]:
        record = {
            "family": self.family.value,
            "d": self.d,
            "sigma": self.sigma,
            "eta": self.eta,
            "k": self.k,
        }
        if self.T is not None:
            record["T"] = self.T
        return record

    @classmethod
    def from_record(cls, record: Dict[str, Any]) -> "DistributionSpec":
        T = record.get("T")
        return cls(
            family=Family(str(record["family"]).lower()),
            d=int(record["d"]),
            sigma=float(record["sigma"]),
            eta=float(record["eta"]),
            k=int(record.get("k", 0) or 0),
            T=float(T) if T not in (None, "") else None,
        )


def esg(d: int, sigma: float, eta: float, T: Optional[float] = None) -> DistributionSpec:
    return DistributionSpec(Family.ESG, d, sigma, eta, 0, T)


def egg(d: int, sigma: float, eta: float, k: int, T: Optional[float] = None) -> DistributionSpec:
    return DistributionSpec(Family.EGG, d, sigma, eta, k, T)


def formal_scale(spec: DistributionSpec) -> float:
    """σ_s (ESG) or σ_g (EGG) from log-gamma differences."""
    return spec.scale


def formal_scale_approx(spec: DistributionSpec) -> float:
    """(eta/2)^{1/eta} sigma d^{1/2 - 1/eta}, the large-d form of σ_s."""
    if spec.family != Family.ESG:
        raise ValueError("formal_scale_approx is defined for ESG only")
    eta = spec.eta
    return math.exp(
        math.log(eta / 2.0) / eta + math.log(spec.sigma) + (0.5 - 1.0 / eta) * math.log(spec.d)
    )


def _log_normaliser(spec: DistributionSpec) -> float:
    """Log of the density constant, including the truncation factor when present."""
    log_c = (
        math.log(spec.eta)
        + math.lgamma(0.5 * spec.d)
        - math.log(2.0)
        - 0.5 * spec.d * math.log(math.pi)
        - spec.shape * (math.log(2.0) + spec.eta * spec.log_scale)
        - math.lgamma(spec.shape)
    )
    if spec.truncated:
        log_c += math.log(ratio_constant(spec))
    return log_c


def log_pdf(spec: DistributionSpec, r):
    """Log density at any point of norm r; -inf beyond T for truncated laws."""
    r_arr = np.asarray(r, dtype=float)
    if np.any(r_arr <= 0):
        raise DomainError("log_pdf requires r > 0")
    value = _log_normaliser(spec) - spec.u_of(r_arr)
    if spec.k:
        value = value - 2.0 * spec.k * np.log(r_arr)
    if spec.truncated:
        value = np.where(r_arr <= spec.T, value, -np.inf)
    return sf._result(value)


def pdf_inv(spec: DistributionSpec, y):
    """Radius r with pdf(r) = y.

    ESG uses the logarithmic inverse and requires y up to the density at the
    origin; EGG solves u + (2k/eta) ln u = H through the principal Lambert W
    branch and accepts any y > 0.
    """
    y = np.asarray(y, dtype=float)
    if np.any(y <= 0):
        raise DomainError("pdf_inv requires y > 0")
    log_c = _log_normaliser(spec)
    gap = log_c - np.log(y)

    if spec.k == 0:
        if np.any(gap < -1e-12):
            raise DomainError("pdf_inv: y exceeds the density maximum")
        u = np.maximum(gap, 0.0)
        with np.errstate(divide="ignore"):
            return sf._result(np.where(u > 0, spec.radius_of(np.where(u > 0, u, 1.0)), 0.0))

    a = spec.level_coefficient
    H = gap - 2.0 * spec.k * (spec.log_scale + math.log(2.0) / spec.eta)
    u = a * sf.lambert_w0_exp(H / a - math.log(a))
    return sf._result(spec.radius_of(u))


def ratio_constant(spec: DistributionSpec) -> float:
    """C = 1 / Λ_shape(T^eta / (2 scale^eta)), the density ratio of Q to P inside the ball."""
    if not spec.truncated:
        raise ValueError("ratio_constant needs a truncation radius T")
    mass = sf.gamma_cdf(spec.shape, spec.u_truncation)
    if mass <= 0:
        raise DomainError(f"truncation radius {spec.T} holds no mass")
    return 1.0 / mass


def mass_within(spec: DistributionSpec, radius: float) -> float:
    """P{||z|| <= radius} under the untruncated law."""
    if radius <= 0:
        raise DomainError("mass_within requires radius > 0")
    return sf.gamma_cdf(spec.shape, float(spec.u_of(radius)))


def radius_for_mass(spec: DistributionSpec, p: float) -> float:
    """Inverse of mass_within: scale * (2 Λ^{-1}_shape(p))^{1/eta}."""
    if not 0 < p < 1:
        raise DomainError(f"mass must be in (0, 1), got {p}")
    return float(spec.radius_of(sf.gamma_cdf_inv(spec.shape, p)))


def sample_gamma_coordinates(spec: DistributionSpec, rng: np.random.Generator, size: int) -> np.ndarray:
    """Draw u ~ Gamma(shape, 1), restricted to u <= u_T for truncated laws.

    Truncated draws invert the gamma CDF on the restricted interval.
    """
    if not spec.truncated:
        return rng.gamma(spec.shape, 1.0, size=size)
    top = sf.gamma_cdf(spec.shape, spec.u_truncation)
    q = rng.uniform(0.0, top, size=size)
    u = np.asarray(sf.gamma_cdf_inv(spec.shape, np.minimum(q, np.nextafter(1.0, 0.0))))
    return np.minimum(u, spec.u_truncation)


def sample_radii(spec: DistributionSpec, rng: np.random.Generator, size: int) -> np.ndarray:
    return np.atleast_1d(spec.radius_of(sample_gamma_coordinates(spec, rng, size)))


def sample_radius(spec: DistributionSpec, rng: np.random.Generator) -> float:
    """One norm draw."""
    return float(sample_radii(spec, rng, 1)[0])


def sample_vector(spec: DistributionSpec, rng: np.random.Generator) -> np.ndarray:
    """A full d-dimensional draw: sampled norm times a uniform direction."""
    radius = sample_radius(spec, rng)
    direction = rng.standard_normal(spec.d)
    direction /= np.linalg.norm(direction)
    return radius * direction


def radial_density_curve(spec: DistributionSpec, r_grid) -> List[Tuple[float, float]]:
    """(r, φ(r) V_d(r)) pairs, the density of the noise norm."""
    r = np.asarray(r_grid, dtype=float)
    log_values = np.asarray(log_pdf(spec, r)) + np.asarray(sf.log_hypersphere_surface(spec.d, r))
    values = np.exp(log_values)
    return [(float(ri), float(vi)) for ri, vi in zip(np.atleast_1d(r), np.atleast_1d(values))]
