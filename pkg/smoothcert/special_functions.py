"""Scalar and vectorised special functions used throughout the engine.

All functions accept floats or numpy arrays and return the same shape. Heavy
quantities are exposed in log space so that dimensions around 1e5 never
overflow. Arguments outside a function's domain raise ``DomainError``.
"""

import math
import logging
from typing import Union

import numpy as np
from scipy import special

from smoothcert.errors import DomainError

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]

_LOG_2PI = math.log(2.0 * math.pi)
_EXP_OVERFLOW = 500.0


def _result(value):
    """Unwrap 0-d arrays so scalar callers get a float back."""
    value = np.asarray(value)
    return float(value) if value.ndim == 0 else value


def log_gamma(x: ArrayLike) -> ArrayLike:
    """ln Γ(x) for x > 0."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise DomainError(f"log_gamma requires x > 0, got {x.min()}")
    return _result(special.gammaln(x))


def gamma_log_pdf(shape: float, u: ArrayLike) -> ArrayLike:
    """Log density of Γ(shape, 1); -inf at u = 0 when shape > 1."""
    u = np.asarray(u, dtype=float)
    with np.errstate(divide="ignore"):
        return _result(special.xlogy(shape - 1.0, u) - u - special.gammaln(shape))


def gamma_cdf(shape: float, x: ArrayLike) -> ArrayLike:
    """Λ_shape(x), the regularised lower incomplete gamma function."""
    if shape <= 0:
        raise DomainError(f"gamma_cdf requires shape > 0, got {shape}")
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise DomainError(f"gamma_cdf requires x >= 0, got {x.min()}")
    return _result(special.gammainc(shape, x))


def gamma_sf(shape: float, x: ArrayLike) -> ArrayLike:
    """1 - Λ_shape(x) without cancellation in the upper tail."""
    if shape <= 0:
        raise DomainError(f"gamma_sf requires shape > 0, got {shape}")
    return _result(special.gammaincc(shape, np.asarray(x, dtype=float)))


def gamma_cdf_inv(shape: float, p: ArrayLike) -> ArrayLike:
    """Λ^{-1}_shape(p) for p in [0, 1)."""
    if shape <= 0:
        raise DomainError(f"gamma_cdf_inv requires shape > 0, got {shape}")
    p = np.asarray(p, dtype=float)
    if np.any((p < 0) | (p >= 1)):
        raise DomainError("gamma_cdf_inv requires p in [0, 1)")
    return _result(special.gammaincinv(shape, p))


def _stirling_correction(a: float) -> float:
    """ln Γ(a) minus its Stirling approximation, for a >= 10."""
    inv = 1.0 / a
    inv2 = inv * inv
    return inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 / 1680.0)))


def _log_gamma_prefactor(a: float, x: float) -> float:
    """ln(x^a e^{-x} / Γ(a)) evaluated without cancellation for large a."""
    if a < 10.0:
        return a * math.log(x) - x - math.lgamma(a)
    t = (x - a) / a
    return a * (math.log1p(t) - t) + 0.5 * (math.log(a) - _LOG_2PI) - _stirling_correction(a)


def gamma_cdf_reference(shape: float, x: float, max_terms: int = 1_000_000) -> float:
    """Λ_shape(x) by power series (x < shape + 1) or Lentz continued fraction.

    Independent of scipy's incomplete gamma; used to cross-check ``gamma_cdf``.
    """
    if shape <= 0 or x < 0:
        raise DomainError(f"gamma_cdf_reference requires shape > 0 and x >= 0, got ({shape}, {x})")
    if x == 0:
        return 0.0
    log_pre = _log_gamma_prefactor(shape, x)

    if x < shape + 1.0:
        term = 1.0 / shape
        total = term
        n = 0
        while n < max_terms:
            n += 1
            term *= x / (shape + n)
            total += term
            if term < total * 1e-17:
                break
        return min(1.0, math.exp(log_pre) * total)

    tiny = 1e-300
    b = x + 1.0 - shape
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, max_terms):
        an = -i * (i - shape)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            break
    return max(0.0, 1.0 - math.exp(log_pre) * h)


def beta_cdf_sym(alpha: float, x: ArrayLike) -> ArrayLike:
    """Ψ_alpha(x), the CDF of Beta(alpha, alpha), clamped to 0/1 outside [0, 1]."""
    if alpha <= 0:
        raise DomainError(f"beta_cdf_sym requires alpha > 0, got {alpha}")
    x = np.asarray(x, dtype=float)
    clipped = np.clip(np.nan_to_num(x, nan=0.5, posinf=1.0, neginf=0.0), 0.0, 1.0)
    return _result(special.betainc(alpha, alpha, clipped))


def beta_cdf_sym_inv(alpha: float, p: ArrayLike) -> ArrayLike:
    """Ψ_alpha^{-1}(p)."""
    if alpha <= 0:
        raise DomainError(f"beta_cdf_sym_inv requires alpha > 0, got {alpha}")
    p = np.asarray(p, dtype=float)
    if np.any((p < 0) | (p > 1)):
        raise DomainError("beta_cdf_sym_inv requires p in [0, 1]")
    return _result(special.betaincinv(alpha, alpha, p))


def std_normal_cdf(x: ArrayLike) -> ArrayLike:
    """Φ(x)."""
    return _result(special.ndtr(np.asarray(x, dtype=float)))


def std_normal_cdf_inv(p: ArrayLike) -> ArrayLike:
    """Φ^{-1}(p) for p in (0, 1)."""
    p = np.asarray(p, dtype=float)
    if np.any((p <= 0) | (p >= 1)):
        raise DomainError("std_normal_cdf_inv requires p in (0, 1)")
    return _result(special.ndtri(p))


def lambert_w0(x: ArrayLike) -> ArrayLike:
    """Principal branch W(x) for x >= -1/e."""
    x = np.asarray(x, dtype=float)
    if np.any(x < -math.exp(-1.0) - 1e-15):
        raise DomainError("lambert_w0 requires x >= -1/e")
    x = np.maximum(x, -math.exp(-1.0))
    return _result(np.real(special.lambertw(x, 0)))


def lambert_w0_exp(z: ArrayLike) -> ArrayLike:
    """W(e^z) without forming e^z, so z may be in the thousands.

    Large arguments are solved by Newton iteration on w + ln w = z.
    """
    scalar = np.ndim(z) == 0
    z = np.atleast_1d(np.asarray(z, dtype=float))
    out = np.empty_like(z)

    small = z <= _EXP_OVERFLOW
    if np.any(small):
        out[small] = np.real(special.lambertw(np.exp(z[small]), 0))

    big = ~small
    if np.any(big):
        zb = z[big]
        w = zb - np.log(zb)
        for _ in range(8):
            w = w - (w + np.log(w) - zb) * w / (w + 1.0)
        out[big] = w

    return float(out[0]) if scalar else out


def log_hypersphere_surface(d: int, r: ArrayLike) -> ArrayLike:
    """ln of the surface area d π^{d/2} / Γ(d/2 + 1) r^{d-1} of the sphere of radius r."""
    if d < 1:
        raise DomainError(f"dimension must be >= 1, got {d}")
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise DomainError("log_hypersphere_surface requires r > 0")
    log_const = math.log(d) + 0.5 * d * math.log(math.pi) - math.lgamma(0.5 * d + 1.0)
    return _result(log_const + (d - 1) * np.log(r))
