"""Command-line interface: certify, tables, simulate, pipeline and cache."""

import sys
import json
import logging
import argparse
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

from smoothcert import __version__
from smoothcert import harness, simulation, tables
from smoothcert.config import Config
from smoothcert.database import Database
from smoothcert.distributions import DistributionSpec, Family
from smoothcert.dsrs_cert import build_problem, dsrs_certify, dsrs_certify_b1, heuristic_T
from smoothcert.errors import InfeasiblePairError, SolverError
from smoothcert.expressions import parse_number, parse_number_list
from smoothcert.integrator import METHODS, IntegratorConfig
from smoothcert.lower_bound import ConcentrationParams
from smoothcert.np_cert import NpProblem, cohen_radius, esg_analytic_radius, np_certify
from smoothcert.results import (
    CERTIFY_COLUMNS,
    CertificationResult,
    clean_record,
    format_record,
    schema_name,
    write_records,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INFEASIBLE = 2
EXIT_SOLVER = 3

DEFAULT_KAPPA = 0.5


def _number(text: Optional[str], variables: Optional[Dict[str, float]] = None) -> Optional[float]:
    return None if text is None else parse_number(text, variables)


def _add_spec_arguments(parser: argparse.ArgumentParser):
    group = parser.add_argument_group("distribution")
    group.add_argument("--family", choices=[f.value for f in Family], default="esg")
    group.add_argument("--preset", choices=sorted(harness.PRESETS), help="CIFAR-10 / ImageNet dimension and k")
    group.add_argument("--d", help="dimension")
    group.add_argument("--sigma", default="1", help="noise level")
    group.add_argument("--eta", default="2", help="exponent, e.g. 2 or 1/50")
    group.add_argument("--k", default=None, help="EGG radial exponent, e.g. d/2-5")


def _add_output_arguments(parser: argparse.ArgumentParser):
    parser.add_argument("--format", choices=["csv", "json"], default=None, help="output format")
    parser.add_argument("--output", default=None, help="output file")
    parser.add_argument("--method", choices=METHODS, default=None, help="integration rule")


def _spec_from_args(args) -> DistributionSpec:
    family = Family(args.family)
    sigma = parse_number(args.sigma)
    eta = parse_number(args.eta)
    if args.preset:
        if args.d is not None:
            raise ValueError("--preset and --d are exclusive")
        return harness.preset_spec(args.preset, family, sigma, eta)
    if args.d is None:
        raise ValueError("--d or --preset is required")
    d = int(parse_number(args.d))
    k = 0
    if family == Family.EGG:
        k = int(round(parse_number(args.k if args.k is not None else "d/2-5", {"d": d})))
    elif args.k is not None and parse_number(args.k, {"d": d}) != 0:
        raise ValueError("--k applies to EGG only")
    return DistributionSpec(family, d, sigma, eta, k)


def _integrator(args, config: Config) -> IntegratorConfig:
    base = config.integrator_config()
    if getattr(args, "method", None):
        return IntegratorConfig(args.method, base.lni, base.panels, base.order, base.adaptive_tol, base.lni_min_shape)
    return base


def _emit(records: List[Dict[str, Any]], kind: str, args, config: Config, default_name: str,
          columns: Optional[Sequence[str]] = None) -> Path:
    fmt = args.format or config.get("output_format", "csv")
    path = Path(args.output) if args.output else config.get_output_dir() / f"{default_name}.{fmt}"
    write_records(records, path, kind, fmt, columns)
    print(f"Wrote {len(records)} rows to {path}")
    return path


def _open_cache(args, config: Config) -> Optional[Database]:
    if getattr(args, "no_cache", False) or not config.get("cache_enabled", True):
        return None
    return Database(config.get_database_path())


def _error_payload(kind: str, error: Exception) -> Dict[str, Any]:
    payload: Dict[str, Any] = error.to_dict() if isinstance(error, SolverError) else {}
    payload.update({"error": kind, "exception": type(error).__name__, "message": str(error)})
    if isinstance(error, InfeasiblePairError):
        payload["inequality"] = error.inequality
    return payload


def _resolved_tol(args, config: Config, spec) -> float:
    return _number(args.tol, {"d": spec.d}) if args.tol else config.radius_tol


def certify_key(args, config: Config) -> Dict[str, Any]:
    """Cache key of one certification: the request plus the resolved tol and integrator."""
    spec = _spec_from_args(args)
    integrator = _integrator(args, config)
    params = {key: getattr(args, key) for key in
              ("mode", "family", "preset", "d", "sigma", "eta", "k", "A", "B", "T", "kappa")}
    params.update(
        tol=_resolved_tol(args, config, spec),
        method=integrator.method,
        lni_segments=integrator.lni.segments,
        lni_iota=integrator.lni.iota,
        panels=integrator.panels,
        order=integrator.order,
        adaptive_tol=integrator.adaptive_tol,
        lni_min_shape=integrator.lni_min_shape,
    )
    return params


def certify_once(args, config: Config) -> CertificationResult:
    """Run one certification from parsed arguments."""
    spec = _spec_from_args(args)
    variables = {"d": spec.d}
    A = _number(args.A, variables)
    B = _number(args.B, variables)
    tol = _resolved_tol(args, config, spec)
    integrator = _integrator(args, config)

    if args.mode in ("np", "analytic", "cohen", "dsrs") and A is None:
        raise ValueError(f"{args.mode} needs --A")

    if args.mode == "np":
        return np_certify(NpProblem(spec, A, tol, integrator))
    if args.mode == "analytic":
        if spec.family != Family.ESG:
            raise ValueError("the analytic radius is defined for ESG only")
        return CertificationResult("analytic", esg_analytic_radius(spec.d, spec.sigma, A),
                                   spec=spec.to_record(), A=A)
    if args.mode == "cohen":
        return CertificationResult("cohen", cohen_radius(spec.sigma, A), spec=spec.to_record(), A=A)

    if args.T is not None:
        T = parse_number(args.T, variables)
    else:
        kappa = _number(args.kappa) if args.kappa is not None else DEFAULT_KAPPA
        T = heuristic_T(spec, kappa)
    if args.mode == "dsrs-b1":
        return dsrs_certify_b1(spec, spec.with_truncation(T), tol, integrator)
    if B is None:
        raise ValueError("dsrs needs --B")
    if B >= 1.0:
        return dsrs_certify_b1(spec, spec.with_truncation(T), tol, integrator)
    return dsrs_certify(build_problem(spec, T, A, B, tol, integrator))


def cmd_certify(args, config: Config) -> int:
    """Certify one (spec, A[, B]) and print the record."""
    logger.info(f"certify {args.mode}")
    cache = _open_cache(args, config)
    try:
        params = certify_key(args, config)
        record = cache.get_result("certify", params) if cache else None
        if record is None:
            record = certify_once(args, config).to_record()
            if cache:
                cache.put_result("certify", params, record)
    except InfeasiblePairError as e:
        return _fail(args, "infeasible_pair", e, EXIT_INFEASIBLE)
    except SolverError as e:
        return _fail(args, "solver_failure", e, EXIT_SOLVER)
    finally:
        if cache:
            cache.close()

    if args.format == "json":
        print(json.dumps({"schema": schema_name("certify"), "records": [clean_record(record)]}, indent=2))
    else:
        print(format_record(record))
    if args.output:
        write_records([record], Path(args.output), "certify", args.format or "csv", CERTIFY_COLUMNS)
    return EXIT_OK


def _fail(args, kind: str, error: Exception, code: int) -> int:
    logger.error(f"{kind}: {error}")
    if getattr(args, "error_json", False):
        print(json.dumps(_error_payload(kind, error), default=str))
    else:
        print(f"Error ({kind}): {error}", file=sys.stderr)
    return code


def _concentration_params(args) -> ConcentrationParams:
    return ConcentrationParams(
        theta=parse_number(args.theta),
        beta=parse_number(args.beta),
        tau=parse_number(args.tau),
        mu_or_zeta=parse_number(args.mu),
        p=parse_number(args.p),
        d_tilde=int(parse_number(args.d_tilde)),
    )


def cmd_tables(args, config: Config) -> int:
    """Write one or all deterministic tables."""
    names = list(tables.TABLES) if args.table == "all" else [args.table]
    params = _concentration_params(args)
    for name in names:
        logger.info(f"Computing table {name}")
        if name in ("lambda-fixbase", "lambda-thcorres"):
            rows = tables.TABLES[name](params, layout="long" if args.long else "wide")
        elif name == "mu":
            rows = tables.tight_mu_rows(params, parse_number(args.e))
        elif name == "psi-phi":
            rows = tables.psi_phi_rows(points=int(parse_number(args.points)))
        else:
            rows = tables.sigma_error_rows()
        output = args.output if len(names) == 1 else None
        sub_args = argparse.Namespace(format=args.format, output=output)
        _emit(rows, "table", sub_args, config, name.replace("-", "_"))
    return EXIT_OK


def _pairs(text: str) -> List[Tuple[float, float]]:
    pairs = []
    for item in text.split(","):
        A, _, B = item.strip().partition("/")
        if not B:
            raise ValueError(f"pair '{item}' must be A/B")
        pairs.append((parse_number(A), parse_number(B)))
    return pairs


def _simulation_cells(args, config: Config) -> List[simulation.SimulationCell]:
    etas = parse_number_list(args.etas)
    d = int(parse_number(args.d)) if args.d else simulation.SIMULATION_D
    sigma = parse_number(args.sigma)
    k_offset = int(parse_number(args.k_offset))
    tol = parse_number(args.tol) if args.tol else config.radius_tol
    integrator = _integrator(args, config)
    if args.sweep == "egg":
        pairs = _pairs(args.pairs) if args.pairs else simulation.SIMULATION_PAIRS
        return simulation.egg_simulation_grid(etas, pairs, d, sigma, k_offset, parse_number(args.ratio), tol,
                                              args.with_np, integrator)
    if args.sweep == "b1":
        return simulation.b1_sweep(etas, d, sigma, k_offset, tol, integrator)
    if args.sweep == "dimension":
        dims = [int(x) for x in parse_number_list(args.dims)]
        return simulation.dimension_sweep(dims, etas, parse_number(args.A), parse_number(args.B), sigma,
                                          k_offset, parse_number(args.ratio), tol, integrator)
    p_inner = parse_number_list(args.p_inner)
    return simulation.relaxation_sweep(p_inner, etas, d, sigma, k_offset, parse_number(args.p_outer), tol,
                                       integrator)


def cmd_simulate(args, config: Config) -> int:
    """Run a sweep; cached cells are reused and new ones cached."""
    cells = _simulation_cells(args, config)
    cache = _open_cache(args, config)
    records: List[Optional[Dict[str, Any]]] = [cache.get_result("simulate", c.key) if cache else None for c in cells]
    pending = [c for c, r in zip(cells, records) if r is None]
    logger.info(f"simulate {args.sweep}: {len(cells)} cells, {len(cells) - len(pending)} cached")
    workers = args.workers or config.workers
    done = iter(simulation.run_cells(pending, workers=workers))
    for i, record in enumerate(records):
        if record is None:
            cell = next(done)
            records[i] = cell.to_record()
            if cache and not cell.error:
                cache.put_result("simulate", cell.key, records[i])
    if cache:
        cache.close()

    _emit(records, "simulate", args, config, f"simulate_{args.sweep}", simulation.SIMULATION_COLUMNS)
    if args.sweep == "egg":
        for (A, B), increase in sorted(simulation.eta_increase(records).items()):
            print(f"increase eta 2 -> 64 at (A, B)=({A}, {B}): {100 * increase:.2f}%")
    return EXIT_OK


def _classifier(args, spec: DistributionSpec) -> harness.SyntheticClassifier:
    kind = harness.ClassifierKind(args.classifier)
    t_star = _number(args.t_star, {"d": spec.d})
    if t_star is None and kind in (harness.ClassifierKind.CONCENTRATED, harness.ClassifierKind.SHELL):
        t_star = heuristic_T(spec, DEFAULT_KAPPA)
    if kind == harness.ClassifierKind.CONCENTRATED:
        return harness.SyntheticClassifier.concentrated(t_star, args.classifier_seed)
    if kind == harness.ClassifierKind.SHELL:
        return harness.SyntheticClassifier.shell(t_star, parse_number(args.p_inner), parse_number(args.p_outer),
                                                 args.classifier_seed)
    return harness.SyntheticClassifier(kind, rng_seed=args.classifier_seed)


def cmd_pipeline(args, config: Config) -> int:
    """Sampling pipeline with a synthetic classifier; one report row per seed."""
    spec = _spec_from_args(args)
    classifier = _classifier(args, spec)
    base = config.sampling_config()
    overrides = {
        "N1": args.N1, "N2": args.N2, "N_np": args.N_np, "workers": args.workers,
        "alpha1": _number(args.alpha1), "alpha2": _number(args.alpha2), "alpha_np": _number(args.alpha_np),
    }
    sampling = harness.SamplingConfig(**{
        key: (int(value) if key in ("N1", "N2", "N_np", "workers") else value) if value is not None
        else getattr(base, key)
        for key, value in overrides.items()
    })
    kappa = _number(args.kappa)
    tol = parse_number(args.tol) if args.tol else config.radius_tol
    integrator = _integrator(args, config)
    reports = harness.run_batch(classifier, spec, range(args.seed, args.seed + args.runs), kappa, sampling, tol,
                                integrator)

    records = [r.to_record() for r in reports]
    if args.format is None and not args.output:
        args.format = "json"
    _emit(records, "pipeline", args, config, f"pipeline_{args.classifier}_seed{args.seed}")
    print(f"ACR np={harness.average_certified_radius(records, 'radius_np'):.6f} "
          f"dsrs={harness.average_certified_radius(records, 'radius_dsrs'):.6f} over {len(records)} run(s)")
    failed = [r for r in reports if r.error]
    if failed:
        # Partial reports are already written; the exit code flags them
        for report in failed:
            logger.error(f"solver_failure: seed={report.seed}: {report.error}")
            if args.error_json:
                print(json.dumps({"error": "solver_failure", "seed": report.seed, "message": report.error,
                                  "report": clean_record(report.to_record())}, default=str))
            else:
                print(f"Error (solver_failure) for seed {report.seed}: {report.error}", file=sys.stderr)
        return EXIT_SOLVER
    return EXIT_OK


def cmd_cache(args, config: Config) -> int:
    cache = Database(config.get_database_path())
    try:
        if args.action == "count":
            print(cache.count(args.command))
        elif args.action == "clear":
            print(f"Removed {cache.clear(args.command)} cached results")
        else:
            for row in cache.list_results(args.command):
                print(f"{row['id']}\t{row['command']}\t{row['created_at']}\t{row['params_key']}")
    finally:
        cache.close()
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="smoothcert", description="Certified radii for randomized smoothing")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--log-level", default=None, help="DEBUG, INFO, WARNING or ERROR")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("certify", help="certify one input")
    p.add_argument("mode", choices=["np", "dsrs", "dsrs-b1", "analytic", "cohen"])
    _add_spec_arguments(p)
    p.add_argument("--A", default=None, help="lower bound of the top-class probability under P")
    p.add_argument("--B", default=None, help="lower bound under the truncated Q")
    p.add_argument("--T", default=None, help="truncation radius")
    p.add_argument("--kappa", default=None, help="P-mass inside T when --T is not given")
    p.add_argument("--tol", default=None, help="radius tolerance")
    p.add_argument("--error-json", action="store_true", help="print failures as JSON on stdout")
    p.add_argument("--no-cache", action="store_true")
    _add_output_arguments(p)
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("tables", help="emit table data")
    p.add_argument("table", choices=list(tables.TABLES) + ["all"])
    p.add_argument("--theta", default="0.999")
    p.add_argument("--beta", default="0.99")
    p.add_argument("--tau", default="0.6")
    p.add_argument("--mu", default="0.02", help="mu (fixed base) or zeta (dimension threshold)")
    p.add_argument("--p", default="0.5")
    p.add_argument("--d-tilde", default="25000")
    p.add_argument("--e", default="1e-6", help="tight mu resolution")
    p.add_argument("--points", default="100000", help="abscissae for psi-phi")
    p.add_argument("--long", action="store_true", help="one row per Λ cell instead of one row per eta")
    p.add_argument("--format", choices=["csv", "json"], default=None)
    p.add_argument("--output", default=None)
    p.set_defaults(func=cmd_tables)

    p = sub.add_parser("simulate", help="EGG sweeps")
    p.add_argument("sweep", choices=["egg", "b1", "dimension", "relaxation"])
    p.add_argument("--etas", default="0.5,1,2,4,8,16,32,64")
    p.add_argument("--pairs", default=None, help="A/B list, e.g. 0.6/0.7,0.8/0.9")
    p.add_argument("--d", default=None)
    p.add_argument("--dims", default="1000,10000,100000")
    p.add_argument("--sigma", default="1")
    p.add_argument("--k-offset", default="5", help="k = d/2 - offset")
    p.add_argument("--ratio", default="2", help="ratio constant fixing T")
    p.add_argument("--A", default="0.8")
    p.add_argument("--B", default="0.7")
    p.add_argument("--p-inner", default="1,0.99,0.98,0.97,0.96,0.95")
    p.add_argument("--p-outer", default="0.5")
    p.add_argument("--with-np", action="store_true", help="also certify NP at the same A")
    p.add_argument("--tol", default=None)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--no-cache", action="store_true")
    _add_output_arguments(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("pipeline", help="sampling pipeline with a synthetic classifier")
    p.add_argument("--classifier", choices=[k.value for k in harness.ClassifierKind], default="concentrated")
    p.add_argument("--t-star", default=None, help="classifier radius (default: ball of P-mass 1/2)")
    p.add_argument("--p-inner", default="1")
    p.add_argument("--p-outer", default="0")
    _add_spec_arguments(p)
    p.add_argument("--kappa", default=None, help="P-mass inside T (default: clipped A1)")
    p.add_argument("--seed", type=int, required=True, help="first sampling seed; run i uses seed + i")
    p.add_argument("--classifier-seed", type=int, default=0, help="seed of the classifier's own coin flips")
    p.add_argument("--runs", type=int, default=1)
    p.add_argument("--N1", type=int, default=None)
    p.add_argument("--N2", type=int, default=None)
    p.add_argument("--N-np", dest="N_np", type=int, default=None)
    p.add_argument("--alpha1", default=None)
    p.add_argument("--alpha2", default=None)
    p.add_argument("--alpha-np", dest="alpha_np", default=None)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--tol", default=None)
    p.add_argument("--error-json", action="store_true")
    _add_output_arguments(p)
    p.set_defaults(func=cmd_pipeline)

    p = sub.add_parser("cache", help="inspect or clear the result cache")
    p.add_argument("action", choices=["list", "count", "clear"])
    p.add_argument("--command", default=None, help="restrict to one command")
    p.set_defaults(func=cmd_cache)
    return parser


def run(args, config: Config) -> int:
    """Dispatch to the selected command; invalid parameters exit with 1."""
    try:
        return args.func(args, config)
    except ValueError as e:
        if isinstance(e, InfeasiblePairError):
            return _fail(args, "infeasible_pair", e, EXIT_INFEASIBLE)
        logger.error(f"Invalid parameters: {e}")
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_USAGE
