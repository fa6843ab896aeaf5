"""Expectations over u ~ Gamma(shape, 1).

Three rules are available:

* ``lni``: uniform trapezoid on the Chebyshev concentration interval
  [(1 - eps) shape, (1 + eps) shape], eps = sqrt(1 / (iota * shape)). It drops at
  most iota of the mass and is the rule of choice for the very large shapes of
  image-sized inputs.
* ``gauss``: composite Gauss-Legendre in probability space, u = Λ^{-1}(q). The
  measure becomes uniform on [0, 1], so it handles shapes far below one and
  jumps placed on breakpoints. Node sets are cached per (shape, breakpoints).
* ``adaptive``: scipy ``quad`` on (0, inf) split at quantiles and breakpoints.

Integrands must be vectorised: ``f(ndarray) -> ndarray``.
"""

import math
import logging
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence, Tuple

import numpy as np
from scipy import integrate, special

from smoothcert import special_functions as sf
from smoothcert.errors import IntegrationError

logger = logging.getLogger(__name__)

Integrand = Callable[[np.ndarray], np.ndarray]

METHODS = ("auto", "lni", "gauss", "adaptive")


@dataclass(frozen=True)
class LniConfig:
    segments: int = 256
    iota: float = 1e-4

    def __post_init__(self):
        if self.segments < 2:
            raise ValueError(f"LNI needs at least 2 segments, got {self.segments}")
        if not 0 < self.iota < 1:
            raise ValueError(f"iota must lie in (0, 1), got {self.iota}")


@dataclass(frozen=True)
class IntegratorConfig:
    """Rule selection; ``auto`` uses LNI for large shapes without breakpoints."""

    method: str = "auto"
    lni: LniConfig = field(default_factory=LniConfig)
    panels: int = 64
    order: int = 16
    adaptive_tol: float = 1e-9
    lni_min_shape: float = 100.0

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"Unknown integration method '{self.method}', expected one of {METHODS}")
        if self.panels < 1 or self.order < 2:
            raise ValueError("quadrature needs panels >= 1 and order >= 2")
        if self.adaptive_tol <= 0:
            raise ValueError("adaptive_tol must be positive")


def lni_interval(shape: float, iota: float) -> Tuple[float, float]:
    eps = math.sqrt(1.0 / (iota * shape))
    return max(0.0, (1.0 - eps) * shape), (1.0 + eps) * shape


def expectation_lni(shape: float, f: Integrand, cfg: LniConfig = LniConfig()) -> float:
    """Trapezoidal E[f(u)] over the concentration interval; tail mass <= iota is dropped."""
    lo, hi = lni_interval(shape, cfg.iota)
    u = np.linspace(lo, hi, cfg.segments + 1)
    log_w = np.asarray(sf.gamma_log_pdf(shape, u))
    w = np.where(np.isfinite(log_w), np.exp(np.minimum(log_w, 700.0)), 0.0)
    values = np.asarray(f(u), dtype=float)
    return float(integrate.trapezoid(values * w, u))


def _gamma_quantiles(shape: float, q: np.ndarray, q_upper: np.ndarray) -> np.ndarray:
    """Λ^{-1}(q) using the complement 1 - q on the upper half for accuracy."""
    lower = q <= 0.5
    return np.where(
        lower,
        special.gammaincinv(shape, np.where(lower, q, 0.5)),
        special.gammainccinv(shape, np.where(lower, 0.5, q_upper)),
    )


@lru_cache(maxsize=256)
def gauss_nodes(shape: float, breakpoints: Tuple[float, ...], panels: int, order: int):
    """Nodes u and probability weights of the composite rule; weights sum to one."""
    x, w = np.polynomial.legendre.leggauss(order)
    edges = [(0.0, 1.0)]
    for b in sorted(b for b in breakpoints if 0 < b < math.inf):
        edges.append((float(special.gammainc(shape, b)), float(special.gammaincc(shape, b))))
    edges.append((1.0, 0.0))
    edges = sorted(set(edges))

    nodes, weights = [], []
    for (qa, ca), (qb, cb) in zip(edges[:-1], edges[1:]):
        if qb <= qa:
            continue
        width = (qb - qa) / panels
        for j in range(panels):
            left = qa + j * width
            left_c = ca - j * width
            q = left + 0.5 * width * (x + 1.0)
            q_c = left_c - 0.5 * width * (x + 1.0)
            nodes.append(_gamma_quantiles(shape, q, q_c))
            weights.append(0.5 * width * w)

    u = np.concatenate(nodes)
    weight = np.concatenate(weights)
    u = np.maximum(u, np.finfo(float).tiny)
    return u, weight


def expectation_gauss(
    shape: float,
    f: Integrand,
    breakpoints: Sequence[float] = (),
    panels: int = 64,
    order: int = 16,
) -> float:
    u, w = gauss_nodes(float(shape), tuple(float(b) for b in breakpoints), panels, order)
    return float(np.dot(np.asarray(f(u), dtype=float), w))


def expectation_adaptive(
    shape: float,
    f: Integrand,
    tol: float = 1e-9,
    breakpoints: Sequence[float] = (),
    limit: int = 200,
) -> float:
    """Adaptive quad over (0, inf), split at quantiles and the given breakpoints.

    Raises IntegrationError when a piece cannot meet its share of ``tol``.
    """
    lo = float(special.gammaincinv(shape, 1e-15))
    hi = float(special.gammainccinv(shape, 1e-15))
    cuts = {lo, hi}
    for q in (1e-6, 1e-2, 0.5):
        cuts.add(float(special.gammaincinv(shape, q)))
    for q in (1e-2, 1e-6):
        cuts.add(float(special.gammainccinv(shape, q)))
    cuts.update(float(b) for b in breakpoints if lo < b < hi)
    points = sorted(cuts)

    log_norm = special.gammaln(shape)

    def integrand(u: float) -> float:
        weight = math.exp((shape - 1.0) * math.log(u) - u - log_norm) if u > 0 else 0.0
        return float(np.asarray(f(u))) * weight

    pieces = len(points) - 1
    total = 0.0
    for a, b in zip(points[:-1], points[1:]):
        if b <= a:
            continue
        result = integrate.quad(integrand, a, b, epsabs=tol / pieces, epsrel=0.0, limit=limit, full_output=1)
        value, abserr = result[0], result[1]
        if len(result) > 3 and abserr > tol / pieces:
            logger.error(f"quad failed on [{a:.6g}, {b:.6g}]: {result[3]}")
            raise IntegrationError(
                f"adaptive quadrature did not converge on [{a:.6g}, {b:.6g}]",
                achieved=abserr,
                bracket=(a, b),
            )
        total += value
    return total


def expectation(
    shape: float,
    f: Integrand,
    breakpoints: Sequence[float] = (),
    config: IntegratorConfig = IntegratorConfig(),
) -> float:
    """E_{u ~ Gamma(shape, 1)}[f(u)] with the configured rule."""
    method = config.method
    if method == "auto":
        method = "lni" if (not breakpoints and shape >= config.lni_min_shape) else "gauss"
    if method == "lni":
        return expectation_lni(shape, f, config.lni)
    if method == "gauss":
        return expectation_gauss(shape, f, breakpoints, config.panels, config.order)
    return expectation_adaptive(shape, f, config.adaptive_tol, breakpoints)
