"""Grid sweeps over eta, (A, B) and d with EGG smoothing.

Cells are plain dataclasses so they can cross process boundaries; ``run_cells``
fans them out and returns them in input order.
"""

import math
import time
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

from smoothcert import special_functions as sf
from smoothcert.distributions import DistributionSpec, egg, ratio_constant
from smoothcert.dsrs_cert import build_problem, dsrs_certify, dsrs_certify_b1, feasibility_check, heuristic_T
from smoothcert.errors import InfeasiblePairError, SolverError
from smoothcert.harness import SyntheticClassifier, shell_probabilities
from smoothcert.integrator import IntegratorConfig
from smoothcert.np_cert import NpProblem, np_certify

logger = logging.getLogger(__name__)

SIMULATION_ETAS = (0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0)
SIMULATION_PAIRS = (
    (0.6, 0.6), (0.6, 0.7), (0.6, 0.8), (0.6, 0.9),
    (0.7, 0.6), (0.7, 0.7), (0.7, 0.8), (0.7, 0.9),
    (0.8, 0.7), (0.8, 0.8), (0.8, 0.9),
)
SIMULATION_D = 100000
SIMULATION_COLUMNS = [
    "sweep", "eta", "A", "B", "d", "sigma", "k", "T", "C", "feasible",
    "radius", "radius_np", "iterations", "error",
]


@dataclass
class SimulationCell:
    eta: float
    A: Optional[float]
    B: float
    d: int = SIMULATION_D
    sigma: float = 1.0
    k_offset: int = 5
    ratio: Optional[float] = 2.0
    T: Optional[float] = None
    C: Optional[float] = None
    sweep: str = "egg"
    tol: float = 1e-6
    with_np: bool = True
    feasible: bool = True
    radius: Optional[float] = None
    radius_np: Optional[float] = None
    iterations: int = 0
    error: str = ""
    integrator: IntegratorConfig = field(default_factory=IntegratorConfig)

    @property
    def k(self) -> int:
        return self.d // 2 - self.k_offset

    @property
    def key(self) -> Dict[str, float]:
        """Parameters that determine the result, for the result cache."""
        return {
            "sweep": self.sweep, "eta": self.eta, "A": self.A, "B": self.B, "d": self.d,
            "sigma": self.sigma, "k_offset": self.k_offset, "ratio": self.ratio, "T": self.T,
            "tol": self.tol, "with_np": self.with_np, "method": self.integrator.method,
        }

    def spec(self) -> DistributionSpec:
        return egg(self.d, self.sigma, self.eta, self.k)

    def to_record(self) -> Dict[str, object]:
        return {
            "sweep": self.sweep, "eta": self.eta, "A": self.A, "B": self.B, "d": self.d,
            "sigma": self.sigma, "k": self.k, "T": self.T, "C": self.C, "feasible": self.feasible,
            "radius": self.radius, "radius_np": self.radius_np, "iterations": self.iterations,
            "error": self.error,
        }


def gaussian_median_T(d: int, sigma: float) -> float:
    """sigma sqrt(2 Λ^{-1}_{d/2}(1/2)), the median norm of N(0, sigma² I_d)."""
    return sigma * math.sqrt(2.0 * sf.gamma_cdf_inv(0.5 * d, 0.5))


def resolve_T(cell: SimulationCell) -> float:
    """T from the cell, or the radius giving ratio constant ``cell.ratio``."""
    if cell.T is not None:
        return cell.T
    if cell.ratio is None or cell.ratio <= 1:
        raise ValueError("a cell needs T or a ratio constant > 1")
    return heuristic_T(cell.spec(), 1.0 / cell.ratio)


def certify_cell(cell: SimulationCell) -> SimulationCell:
    """Run one cell; infeasible pairs and solver failures are recorded, not raised.

    A cell with B = 1 certifies in the B = 1 mode, which needs no A.
    """
    start = time.perf_counter()
    cell = replace(cell)
    spec = cell.spec()
    try:
        cell.T = resolve_T(cell)
        q_spec = spec.with_truncation(cell.T)
        cell.C = ratio_constant(q_spec)
        if cell.B >= 1.0:
            result = dsrs_certify_b1(spec, q_spec, cell.tol, cell.integrator)
            cell.radius, cell.iterations = result.radius, result.iterations
        else:
            feasible = feasibility_check(cell.A, cell.B, cell.C)
            cell.feasible = feasible.ok
            if not feasible:
                cell.error = feasible.violation
            else:
                result = dsrs_certify(build_problem(spec, cell.T, cell.A, cell.B, cell.tol, cell.integrator))
                cell.radius, cell.iterations = result.radius, result.iterations
        if cell.with_np and cell.A is not None:
            cell.radius_np = np_certify(NpProblem(spec, cell.A, cell.tol, cell.integrator)).radius
    except (SolverError, InfeasiblePairError) as e:
        logger.error(f"Cell eta={cell.eta} (A, B)=({cell.A}, {cell.B}) failed: {e}", exc_info=True)
        cell.error = str(e)
    elapsed = time.perf_counter() - start
    logger.debug(f"Cell eta={cell.eta} (A, B)=({cell.A}, {cell.B}) radius={cell.radius} in {elapsed:.2f}s")
    return cell


def run_cells(cells: Sequence[SimulationCell], fn: Callable[[SimulationCell], SimulationCell] = certify_cell,
              workers: int = 1) -> List[SimulationCell]:
    """Apply ``fn`` to every cell, in a process pool when workers > 1, keeping input order."""
    cells = list(cells)
    logger.info(f"Running {len(cells)} cells with {workers} worker(s)")
    if workers > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, cells))
    return [fn(cell) for cell in cells]


def egg_simulation_grid(etas: Iterable[float] = SIMULATION_ETAS,
                        pairs: Iterable[Tuple[float, float]] = SIMULATION_PAIRS,
                        d: int = SIMULATION_D, sigma: float = 1.0, k_offset: int = 5, ratio: float = 2.0,
                        tol: float = 1e-6, with_np: bool = False,
                        integrator: Optional[IntegratorConfig] = None) -> List[SimulationCell]:
    """DSRS radius per (eta, (A, B)), with T set so the ratio constant equals ``ratio``."""
    integrator = integrator or IntegratorConfig()
    return [
        SimulationCell(eta, A, B, d, sigma, k_offset, ratio, None, None, "egg", tol, with_np,
                       integrator=integrator)
        for eta in etas
        for A, B in pairs
    ]


def eta_increase(records: Iterable[Dict[str, object]], low: float = 2.0,
                 high: float = 64.0) -> Dict[Tuple[float, float], float]:
    """Relative radius increase from eta=low to eta=high per (A, B) column."""
    by_key = {(float(r["eta"]), r["A"], r["B"]): r["radius"] for r in records}
    increases = {}
    for (eta, A, B), radius in by_key.items():
        if eta != low or not radius:
            continue
        top = by_key.get((high, A, B))
        if top is not None:
            increases[(A, B)] = (top - radius) / radius
    return increases


def b1_sweep(etas: Iterable[float], d: int = SIMULATION_D, sigma: float = 1.0, k_offset: int = 5,
             tol: float = 1e-6, integrator: Optional[IntegratorConfig] = None) -> List[SimulationCell]:
    """B = 1 cells at the Gaussian median norm T."""
    T = gaussian_median_T(d, sigma)
    return [
        SimulationCell(eta, None, 1.0, d, sigma, k_offset, None, T, None, "b1", tol, False,
                       integrator=integrator or IntegratorConfig())
        for eta in etas
    ]


def dimension_sweep(dims: Iterable[int], etas: Iterable[float], A: float = 0.8, B: float = 0.7,
                    sigma: float = 1.0, k_offset: int = 5, ratio: float = 2.0, tol: float = 1e-6,
                    integrator: Optional[IntegratorConfig] = None) -> List[SimulationCell]:
    """One fixed (A, B) pair certified across dimensions, d-major then eta.

    Each cell picks its own T so that the ratio constant C equals ``ratio`` at
    that d; the default 2 puts T at the median noise norm.
    """
    etas = list(etas)
    return [
        SimulationCell(eta, A, B, int(d), sigma, k_offset, ratio, None, None, "dimension", tol, False,
                       integrator=integrator or IntegratorConfig())
        for d in dims
        for eta in etas
    ]


def relaxation_sweep(p_inner_values: Iterable[float], etas: Iterable[float], d: int = SIMULATION_D,
                     sigma: float = 1.0, k_offset: int = 5, p_outer: float = 0.5, tol: float = 1e-6,
                     integrator: Optional[IntegratorConfig] = None) -> List[SimulationCell]:
    """Shell classifiers correct with p_inner inside the Gaussian median ball.

    p_inner = 1 reproduces the B = 1 setting; lower values relax it. (A, B) are
    the exact shell-classifier probabilities.
    """
    integrator = integrator or IntegratorConfig()
    T = gaussian_median_T(d, sigma)
    cells = []
    for eta in etas:
        spec = egg(d, sigma, eta, d // 2 - k_offset)
        for p_inner in p_inner_values:
            classifier = SyntheticClassifier.shell(T, p_inner, p_outer)
            A, B = shell_probabilities(classifier, spec, T)
            sweep = "relaxation_b1" if p_inner >= 1.0 else "relaxation"
            cells.append(SimulationCell(eta, A, min(B, 1.0), d, sigma, k_offset, None, T, None, sweep, tol,
                                        False, integrator=integrator))
    return cells


