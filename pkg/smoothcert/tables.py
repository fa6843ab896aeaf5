"""Deterministic table data: σ_s approximation errors, Ψ vs Φ, Λ grids and tight μ."""

import math
import logging
from decimal import Decimal, ROUND_HALF_UP
from fractions import Fraction
from typing import Any, Dict, Iterable, List, Sequence

import numpy as np

from smoothcert import special_functions as sf
from smoothcert.distributions import esg, formal_scale, formal_scale_approx
from smoothcert.lower_bound import (
    ConcentrationParams,
    lambda_table_fixbase,
    lambda_table_thcorres,
    tight_mu,
)

logger = logging.getLogger(__name__)

SIGMA_DIMS = (3072, 150224)
SIGMA_ETAS = (0.5, 1.0, 2.0, 4.0, 8.0)
SIGMAS = (0.12, 0.25, 0.5, 1.0)
PSI_PHI_DIMS = (10, 100, 1000, 10000, 100000, 1000000)
D_MINUS_2K = tuple(range(1, 31))
# Λ grids: "wide" matches the printed tables, "long" has one row per cell
LAYOUTS = ("wide", "long")


def round_half_up(value: float, places: int = 3) -> float:
    """Printed-table rounding (0.0005 -> 0.001)."""
    quantum = Decimal(1).scaleb(-places)
    return float(Decimal(repr(float(value))).quantize(quantum, rounding=ROUND_HALF_UP))


def eta_label(eta: Fraction) -> str:
    return str(eta.numerator) if eta.denominator == 1 else f"{eta.numerator}/{eta.denominator}"


def eta_grid_fixbase() -> List[Fraction]:
    """10, 9, ..., 2, then 1, 1/2, ..., 1/50."""
    return [Fraction(n) for n in range(10, 1, -1)] + [Fraction(1, n) for n in range(1, 51)]


def eta_grid_thcorres() -> List[Fraction]:
    return [Fraction(1, n) for n in range(1, 51)]


def sigma_error_rows(dims: Sequence[int] = SIGMA_DIMS, etas: Sequence[float] = SIGMA_ETAS,
                     sigmas: Sequence[float] = SIGMAS) -> List[Dict[str, Any]]:
    """Absolute and relative error of the large-d σ_s form."""
    rows = []
    for d in dims:
        for sigma in sigmas:
            for eta in etas:
                spec = esg(d, sigma, eta)
                exact = formal_scale(spec)
                ae = abs(exact - formal_scale_approx(spec))
                rows.append({"d": d, "sigma": sigma, "eta": eta, "sigma_s": exact, "ae": ae, "re": ae / exact})
    return rows


def psi_phi_rows(dims: Sequence[int] = PSI_PHI_DIMS, points: int = 100000) -> List[Dict[str, Any]]:
    """max |Ψ_{(d-1)/2}(1/2 + x/(2 sqrt d)) - Φ(x)| over uniform x in (0, sqrt d)."""
    rows = []
    for d in dims:
        root = math.sqrt(d)
        x = np.linspace(0.0, root, points + 2)[1:-1]
        psi = np.asarray(sf.beta_cdf_sym(0.5 * (d - 1), 0.5 + x / (2.0 * root)))
        phi = np.asarray(sf.std_normal_cdf(x))
        diff = np.abs(psi - phi)
        rows.append({"d": d, "points": points, "ae": float(diff.max()), "re": float((diff / phi).max())})
        logger.debug(f"psi-phi d={d}: ae={rows[-1]['ae']:.3g}")
    return rows


def _lambda_long(fn, etas: Iterable[Fraction], params: ConcentrationParams) -> List[Dict[str, Any]]:
    rows = []
    for eta in etas:
        for n in D_MINUS_2K:
            value = fn(n, float(eta), params)
            rows.append({
                "eta": eta_label(eta),
                "d_minus_2k": n,
                "value": value,
                "rounded": round_half_up(value),
                "certifies": value > params.threshold,
            })
    return rows


def widen(long_rows: Iterable[Dict[str, Any]]) -> List[Dict[str, Any]]:
    """One row per eta with the rounded cells under columns "1".."30".

    ``boundary`` is the first d - 2k whose cell no longer certifies, blank when
    the whole row certifies.
    """
    wide: Dict[str, Dict[str, Any]] = {}
    for row in long_rows:
        out = wide.setdefault(row["eta"], {"eta": row["eta"]})
        out[str(row["d_minus_2k"])] = row["rounded"]
        if not row["certifies"] and "boundary" not in out:
            out["boundary"] = row["d_minus_2k"]
    for out in wide.values():
        out["boundary"] = out.pop("boundary", "")
    return list(wide.values())


def _lambda_rows(fn, etas: Iterable[Fraction], params: ConcentrationParams,
                 layout: str) -> List[Dict[str, Any]]:
    if layout not in LAYOUTS:
        raise ValueError(f"Unknown layout '{layout}', expected one of {LAYOUTS}")
    rows = _lambda_long(fn, etas, params)
    return rows if layout == "long" else widen(rows)


def lambda_fixbase_rows(params: ConcentrationParams = ConcentrationParams(),
                        layout: str = "wide") -> List[Dict[str, Any]]:
    return _lambda_rows(lambda_table_fixbase, eta_grid_fixbase(), params, layout)


def lambda_thcorres_rows(params: ConcentrationParams = ConcentrationParams(),
                         layout: str = "wide") -> List[Dict[str, Any]]:
    return _lambda_rows(lambda_table_thcorres, eta_grid_thcorres(), params, layout)


def tight_mu_rows(params: ConcentrationParams = ConcentrationParams(), e: float = 1e-6,
                  dims: Sequence[int] = D_MINUS_2K, etas: Iterable[Fraction] = None) -> List[Dict[str, Any]]:
    """Tight constant factor per (d - 2k, eta = 1/n)."""
    etas = list(etas) if etas is not None else eta_grid_thcorres()
    return [
        {"eta": eta_label(eta), "d_minus_2k": n, "mu": tight_mu(n, float(eta), params, e)}
        for eta in etas
        for n in dims
    ]


TABLES = {
    "sigma-errors": sigma_error_rows,
    "psi-phi": psi_phi_rows,
    "lambda-fixbase": lambda_fixbase_rows,
    "lambda-thcorres": lambda_thcorres_rows,
    "mu": tight_mu_rows,
}
