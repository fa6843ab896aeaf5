"""Monte-Carlo sampling pipeline with synthetic base classifiers.

Synthetic classifiers decide from the noise norm alone, so every probability
the certifiers consume is available both by sampling and in closed form.
Sampling streams are counter-based (Philox keyed by seed and stream, one
counter block per chunk), so counts do not depend on how chunks are scheduled.
A classifier's coin flips draw from their own generator keyed by its seed.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from enum import Enum
from typing import Any, Dict, Iterable, List, Optional, Tuple

import numpy as np
from statsmodels.stats.proportion import proportion_confint

from smoothcert.distributions import DistributionSpec, Family, mass_within, ratio_constant, sample_radii
from smoothcert.dsrs_cert import (
    DsrsProblem,
    ProbabilityPair,
    dsrs_certify,
    feasibility_check,
    heuristic_T,
)
from smoothcert.errors import SolverError
from smoothcert.integrator import IntegratorConfig
from smoothcert.np_cert import NpProblem, np_certify

logger = logging.getLogger(__name__)

STREAM_P = 0
STREAM_Q = 1
STREAM_NP = 2
CHUNK_SIZE = 10000
KAPPA_CLIP = (0.01, 0.99)

PRESETS: Dict[str, Dict[str, Any]] = {
    "cifar10": {"d": 3072, "k": 1530},
    "imagenet": {"d": 150224, "k": 75260},
}


class ClassifierKind(str, Enum):
    CONCENTRATED = "concentrated"
    SHELL = "shell"
    ALWAYS_CORRECT = "always_correct"
    ALWAYS_WRONG = "always_wrong"


@dataclass(frozen=True)
class SyntheticClassifier:
    """Correct with probability p_inner inside ||z|| <= t_star and p_outer outside.

    ``rng_seed`` keys the classifier's own coin flips, so two classifiers with
    different seeds disagree on the same noise draws.
    """

    kind: ClassifierKind
    t_star: float = 0.0
    p_inner: float = 1.0
    p_outer: float = 0.0
    rng_seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "kind", ClassifierKind(self.kind))
        if not (0.0 <= self.p_inner <= 1.0 and 0.0 <= self.p_outer <= 1.0):
            raise ValueError("classifier probabilities must lie in [0, 1]")
        if self.kind in (ClassifierKind.CONCENTRATED, ClassifierKind.SHELL) and self.t_star <= 0:
            raise ValueError(f"{self.kind.value} classifier needs t_star > 0")

    @classmethod
    def concentrated(cls, t_star: float, rng_seed: int = 0) -> "SyntheticClassifier":
        return cls(ClassifierKind.CONCENTRATED, t_star, 1.0, 0.0, rng_seed)

    @classmethod
    def shell(cls, t_star: float, p_inner: float, p_outer: float, rng_seed: int = 0) -> "SyntheticClassifier":
        return cls(ClassifierKind.SHELL, t_star, p_inner, p_outer, rng_seed)

    def success_probability(self, radii: np.ndarray) -> np.ndarray:
        if self.kind == ClassifierKind.ALWAYS_CORRECT:
            return np.ones_like(radii)
        if self.kind == ClassifierKind.ALWAYS_WRONG:
            return np.zeros_like(radii)
        return np.where(radii <= self.t_star, self.p_inner, self.p_outer)

    def decide(self, radii: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        """Boolean correctness per draw."""
        p = self.success_probability(radii)
        if self.kind == ClassifierKind.CONCENTRATED:
            return p >= 1.0
        return rng.uniform(size=radii.shape) < p


@dataclass(frozen=True)
class SamplingConfig:
    N1: int = 50000
    N2: int = 50000
    alpha1: float = 5e-4
    alpha2: float = 5e-4
    N_np: int = 100000
    alpha_np: float = 1e-3
    workers: int = 1

    def __post_init__(self):
        for name in ("N1", "N2", "N_np"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        for name in ("alpha1", "alpha2", "alpha_np"):
            if not 0 < getattr(self, name) < 1:
                raise ValueError(f"{name} must lie in (0, 1)")


@dataclass
class SamplingReport:
    spec: Dict[str, Any]
    classifier: Dict[str, Any]
    seed: int
    kappa: float
    kappa_source: str
    count_p: int = 0
    n_p: int = 0
    count_q: int = 0
    n_q: int = 0
    count_np: int = 0
    n_np: int = 0
    A1: float = 0.0
    B1: float = 0.0
    A_np: float = 0.0
    T: float = 0.0
    C: float = 1.0
    A: float = 0.0
    B: float = 0.0
    pair_rule: str = "minimal conservative completion"
    radius_np: float = 0.0
    radius_dsrs: float = 0.0
    error: str = ""

    def to_record(self) -> Dict[str, Any]:
        record = asdict(self)
        spec = record.pop("spec")
        classifier = record.pop("classifier")
        flat = {f"spec_{key}": value for key, value in spec.items()}
        flat.update({f"classifier_{key}": value for key, value in classifier.items()})
        flat.update(record)
        return flat


def clopper_pearson_lower(successes: int, n: int, alpha: float) -> float:
    """One-sided exact binomial lower confidence bound at level 1 - alpha."""
    if not 0 <= successes <= n:
        raise ValueError(f"need 0 <= successes <= n, got {successes}, {n}")
    if successes == 0:
        return 0.0
    return float(proportion_confint(successes, n, alpha=2 * alpha, method="beta")[0])


def estimate_probability(classifier: SyntheticClassifier, spec: DistributionSpec, N: int,
                         rng: np.random.Generator, coins: Optional[np.random.Generator] = None) -> Tuple[int, int]:
    """(correct predictions, N) over N noise draws; the classifier flips ``coins`` (default ``rng``)."""
    if N < 1:
        raise ValueError("N must be >= 1")
    radii = sample_radii(spec, rng, N)
    correct = classifier.decide(radii, rng if coins is None else coins)
    return int(np.count_nonzero(correct)), N


def stream_generator(seed: int, stream: int, chunk: int) -> np.random.Generator:
    """Philox generator for one chunk of one stream; chunks occupy disjoint counter ranges."""
    return np.random.Generator(np.random.Philox(key=(seed << 8) + stream, counter=chunk << 128))


def coin_generator(classifier_seed: int, seed: int, stream: int, chunk: int) -> np.random.Generator:
    """Classifier randomness for one chunk, independent of the noise draws."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([classifier_seed, seed, stream, chunk])))


def count_successes(classifier: SyntheticClassifier, spec: DistributionSpec, N: int, seed: int, stream: int,
                    workers: int = 1, chunk_size: int = CHUNK_SIZE) -> int:
    """Chunked, order-independent success count."""
    chunks = [(i, min(chunk_size, N - i * chunk_size)) for i in range(math.ceil(N / chunk_size))]

    def run(item):
        index, size = item
        return estimate_probability(classifier, spec, size, stream_generator(seed, stream, index),
                                    coin_generator(classifier.rng_seed, seed, stream, index))[0]

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return sum(pool.map(run, chunks))
    return sum(run(chunk) for chunk in chunks)


def conservative_pair(A1: float, B1: float, C: float) -> ProbabilityPair:
    """A feasible pair no stronger than (A1, B1).

    B above its upper edge C * A is lowered onto it; B below its lower edge
    C (A - 1) + 1 pulls A down to (B + C - 1) / C instead.
    """
    A = min(max(A1, 0.0), 1.0)
    B = min(max(B1, 0.0), 1.0)
    note = "unchanged"
    if B > C * A:
        B = C * A
        note = "B lowered to C*A"
    elif B < C * (A - 1.0) + 1.0:
        A = (B + C - 1.0) / C
        note = "A lowered to (B + C - 1)/C"
    return ProbabilityPair(A, B, "clopper_pearson", note)


def shell_probabilities(classifier: SyntheticClassifier, spec: DistributionSpec, T: float) -> Tuple[float, float]:
    """Exact (A, B) of a norm-only classifier under P and under P truncated at T."""
    base = spec.untruncated()
    if classifier.kind == ClassifierKind.ALWAYS_CORRECT:
        return 1.0, 1.0
    if classifier.kind == ClassifierKind.ALWAYS_WRONG:
        return 0.0, 0.0
    inner = mass_within(base, classifier.t_star)
    A = classifier.p_inner * inner + classifier.p_outer * (1.0 - inner)
    ball = mass_within(base, T)
    if T <= classifier.t_star:
        B = classifier.p_inner
    else:
        B = (classifier.p_inner * inner + classifier.p_outer * (ball - inner)) / ball
    return A, B


def run_pipeline(classifier: SyntheticClassifier, spec: DistributionSpec, kappa: Optional[float] = None,
                 config: SamplingConfig = SamplingConfig(), seed: int = 0, tol: float = 1e-6,
                 integrator: Optional[IntegratorConfig] = None) -> SamplingReport:
    """Sample under P, pick T, sample under Q, certify with DSRS, and compare with NP.

    A solver failure does not raise: the report comes back with the estimates
    gathered so far and the failure in ``error``.
    """
    integrator = integrator or IntegratorConfig()
    spec = spec.untruncated()
    report = SamplingReport(spec=spec.to_record(), classifier=_classifier_record(classifier), seed=seed,
                            kappa=float("nan"), kappa_source="given")

    report.count_p = count_successes(classifier, spec, config.N1, seed, STREAM_P, config.workers)
    report.n_p = config.N1
    report.A1 = clopper_pearson_lower(report.count_p, config.N1, config.alpha1)

    if kappa is None:
        kappa = min(max(report.A1, KAPPA_CLIP[0]), KAPPA_CLIP[1])
        report.kappa_source = "A1 stand-in"
    report.kappa = kappa
    report.T = heuristic_T(spec, kappa)
    q_spec = spec.with_truncation(report.T)

    report.count_q = count_successes(classifier, q_spec, config.N2, seed, STREAM_Q, config.workers)
    report.n_q = config.N2
    report.B1 = clopper_pearson_lower(report.count_q, config.N2, config.alpha2)

    report.count_np = count_successes(classifier, spec, config.N_np, seed, STREAM_NP, config.workers)
    report.n_np = config.N_np
    report.A_np = clopper_pearson_lower(report.count_np, config.N_np, config.alpha_np)

    report.C = ratio_constant(q_spec)
    pair = conservative_pair(report.A1, report.B1, report.C)
    report.A, report.B = pair.A, pair.B
    report.pair_rule = f"minimal conservative completion ({pair.note})"
    if not feasibility_check(pair.A, pair.B, report.C):
        raise RuntimeError(f"conservative pair infeasible: {pair}")

    logger.info(f"Pipeline seed={seed}: A1={report.A1:.6f} B1={report.B1:.6f} T={report.T:.6f} C={report.C:.6f}")
    try:
        report.radius_np = np_certify(NpProblem(spec, report.A_np, tol, integrator)).radius
        report.radius_dsrs = dsrs_certify(DsrsProblem(spec, q_spec, pair, tol, integrator)).radius
    except SolverError as e:
        report.error = str(e)
        logger.error(f"Pipeline certification failed for seed={seed}: {e}", exc_info=True)
    return report


def _classifier_record(classifier: SyntheticClassifier) -> Dict[str, Any]:
    record = asdict(classifier)
    record["kind"] = classifier.kind.value
    return record


def average_certified_radius(records: Iterable[Dict[str, Any]], key: str = "radius") -> float:
    """Mean certified radius, abstentions counting as zero."""
    radii = [float(r.get(key) or 0.0) for r in records]
    return sum(radii) / len(radii) if radii else 0.0


def preset_spec(name: str, family: Family, sigma: float, eta: float) -> DistributionSpec:
    """Distribution for the CIFAR-10 / ImageNet dimensions; k is used for EGG only."""
    if name not in PRESETS:
        raise ValueError(f"Unknown preset '{name}', expected one of {sorted(PRESETS)}")
    preset = PRESETS[name]
    k = preset["k"] if Family(family) == Family.EGG else 0
    return DistributionSpec(Family(family), preset["d"], sigma, eta, k)


def run_batch(classifier: SyntheticClassifier, spec: DistributionSpec, seeds: Iterable[int],
              kappa: Optional[float] = None, config: SamplingConfig = SamplingConfig(),
              tol: float = 1e-6, integrator: Optional[IntegratorConfig] = None) -> List[SamplingReport]:
    """Independent pipeline runs, one per seed."""
    return [run_pipeline(classifier, spec, kappa, config, seed, tol, integrator) for seed in seeds]
