"""``nestlab`` command-line entry point.

Results go to stdout as JSON (CSV for counterexample sweeps); diagnostics go
to stderr.  Exit codes: 0 success, 1 property failure, 2 parse error,
3 invalid input, 4 too far, 5 out of range.
"""

import argparse
import logging
import math
import sys
import warnings
from collections.abc import Sequence

from pydantic import ValidationError

from nestlab import __version__
from nestlab.cli.serialization import (
    MatrixFile,
    dump_json,
    read_matrix,
    read_nest,
    write_csv,
)
from nestlab.cli.verify import run_suite
from nestlab.exceptions import (
    InvalidInputError,
    NestlabError,
    OutOfRangeError,
    ParseError,
    TooFarError,
)
from nestlab.nest_algebra import (
    arveson_distance,
    counterexample_family,
    kk_distance_estimate,
    nearest_element,
    rank_one_lower_bound,
)
from nestlab.nests import (
    build_similarity,
    intertwining_defects,
    nest_distance,
    nest_distance_matrix,
    preserves_dimension,
    recover_order_iso,
)
from nestlab.projections import halmos_decompose, proj_distance_components
from nestlab.schemas.common import Tolerances
from nestlab.schemas.projection import Projection

logger = logging.getLogger("nestlab.cli")

EXIT_OK = 0
EXIT_PROPERTY_FAILURE = 1
EXIT_PARSE = 2
EXIT_INVALID = 3
EXIT_TOO_FAR = 4
EXIT_OUT_OF_RANGE = 5

SWEEP_COLUMNS = ("s", "c", "a", "nest_dist", "alg_dist_lb")


def _emit(payload) -> None:
    print(dump_json(payload))


def _read_projection(path: str, tol: Tolerances) -> Projection:
    return Projection.from_matrix(read_matrix(path), tol)


def cmd_dist_proj(args, tol: Tolerances) -> int:
    p = _read_projection(args.p, tol)
    q = _read_projection(args.q, tol)
    d = proj_distance_components(p, q)
    h = halmos_decompose(p, q, tol)
    _emit(
        {
            **d._asdict(),
            "halmos": {
                "d00": h.d00,
                "d10": h.d10,
                "d01": h.d01,
                "d11": h.d11,
                "angles": h.angles,
            },
        }
    )
    return EXIT_OK


def cmd_dist_nest(args, tol: Tolerances) -> int:
    m = read_nest(args.m, tol)
    n = read_nest(args.n, tol)
    _emit(
        {
            "distance": nest_distance(m, n),
            "table": nest_distance_matrix(m, n).tolist(),
        }
    )
    return EXIT_OK


def cmd_theta(args, tol: Tolerances) -> int:
    iso = recover_order_iso(read_nest(args.m, tol), read_nest(args.n, tol), tol)
    _emit(
        {
            "gamma": iso.gamma,
            "pairing": iso.pairing,
            "atom_ranks": iso.atom_ranks,
            "preserves_dimension": preserves_dimension(iso, tol),
        }
    )
    return EXIT_OK


def cmd_similarity(args, tol: Tolerances) -> int:
    iso = recover_order_iso(read_nest(args.m, tol), read_nest(args.n, tol), tol)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        similarity = build_similarity(iso, tol)
    for w in caught:
        logger.warning("%s", w.message)
    _emit(
        {
            **similarity.model_dump(mode="json"),
            "intertwining_defects": intertwining_defects(similarity, iso, tol),
        }
    )
    return EXIT_OK


def cmd_alg(args, tol: Tolerances) -> int:
    m = read_nest(args.m, tol)
    n = read_nest(args.n, tol)
    estimate = kk_distance_estimate(
        m, n, trials=args.trials, seed=args.seed, tol=tol, max_iter=args.max_iter
    )
    bound = rank_one_lower_bound(m, n, tol)
    _emit(
        {
            **estimate.model_dump(mode="json"),
            "rank_one_bound": bound.bound,
            "rank_one_side": bound.side,
        }
    )
    return EXIT_OK


def cmd_arveson(args, tol: Tolerances) -> int:
    n = read_nest(args.n, tol)
    t = read_matrix(args.t)
    result = arveson_distance(t, n)
    payload = {"distance": result.distance, "index": result.index}
    if args.nearest:
        payload["nearest"] = MatrixFile.from_array(nearest_element(t, n, tol)).model_dump()
    _emit(payload)
    return EXIT_OK


def parse_s_values(text: str) -> list[float]:
    """``"0.8"`` or an inclusive sweep ``"start:stop:step"``.

    Raises:
        ParseError: If the text is neither.
    """
    parts = text.split(":")
    try:
        numbers = [float(p) for p in parts]
    except ValueError as exc:
        raise ParseError("--s", f"cannot parse {text!r}") from exc
    if len(numbers) == 1:
        return numbers
    if len(numbers) != 3 or not numbers[2] > 0 or numbers[1] < numbers[0]:
        raise ParseError("--s", f"expected start:stop:step with step > 0, got {text!r}")
    start, stop, step = numbers
    count = math.floor((stop - start) / step + 1e-9) + 1
    return [start + k * step for k in range(count)]


def cmd_counterexample(args, tol: Tolerances) -> int:
    values = parse_s_values(args.s)
    instances = [counterexample_family(s, tol, a=args.a) for s in values]
    sweep = len(values) > 1
    if args.csv or (sweep and not args.json):
        rows = ([getattr(i, c) for c in SWEEP_COLUMNS] for i in instances)
        write_csv(sys.stdout, SWEEP_COLUMNS, rows)
    elif sweep:
        _emit([{c: getattr(i, c) for c in SWEEP_COLUMNS} for i in instances])
    else:
        _emit(instances[0].model_dump(mode="json", exclude={"m_nest", "n_nest"}))
    return EXIT_OK


def cmd_verify(args, tol: Tolerances) -> int:
    report = run_suite(args.suite, trials=args.trials, seed=args.seed, tol=tol)
    _emit(report)
    if report.failures:
        logger.error("%d property failures", len(report.failures))
        return EXIT_PROPERTY_FAILURE
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nestlab", description="Numerics for nests and nest algebras."
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument(
        "--log-level",
        default="WARNING",
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        help="verbosity of diagnostics on stderr",
    )
    parser.add_argument("--tol", type=float, default=None, help="override eq_abs (NESTLAB_TOL)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("dist-proj", help="distance between two projections")
    p.add_argument("p")
    p.add_argument("q")
    p.set_defaults(handler=cmd_dist_proj)

    for name, handler, text in (
        ("dist-nest", cmd_dist_nest, "Hausdorff distance between two nests"),
        ("theta", cmd_theta, "order isomorphism between close nests"),
        ("similarity", cmd_similarity, "similarity implementing the order isomorphism"),
    ):
        p = sub.add_parser(name, help=text)
        p.add_argument("m")
        p.add_argument("n")
        p.set_defaults(handler=handler)

    p = sub.add_parser("alg", help="lower bound for the distance between two nest algebras")
    p.add_argument("m")
    p.add_argument("n")
    p.add_argument("--trials", type=int, default=8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-iter", type=int, default=200)
    p.set_defaults(handler=cmd_alg)

    p = sub.add_parser("arveson", help="distance from an operator to a nest algebra")
    p.add_argument("t")
    p.add_argument("n")
    p.add_argument("--nearest", action="store_true", help="also print a nearest element")
    p.set_defaults(handler=cmd_arveson)

    p = sub.add_parser("counterexample", help="close nests on C² with far-apart algebras")
    p.add_argument("--s", required=True, help="sine s, or a sweep start:stop:step")
    p.add_argument("--a", type=float, default=None, help="witness parameter (default c/s)")
    fmt = p.add_mutually_exclusive_group()
    fmt.add_argument("--json", action="store_true")
    fmt.add_argument("--csv", action="store_true")
    p.set_defaults(handler=cmd_counterexample)

    p = sub.add_parser("verify", help="run the randomised property suite")
    p.add_argument("--suite", choices=["all", "projections", "nests", "algebra"], default="all")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(handler=cmd_verify)
    return parser


def _fail(code: int, label: str, exc: Exception, **extra) -> int:
    logger.error("%s: %s", label, exc)
    _emit({"error": label, "message": str(exc), **extra})
    return code


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=args.log_level,
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        tol = Tolerances() if args.tol is None else Tolerances(eq_abs=args.tol)
        return args.handler(args, tol)
    except ParseError as exc:
        return _fail(EXIT_PARSE, "PARSE_ERROR", exc)
    except TooFarError as exc:
        return _fail(EXIT_TOO_FAR, "TOO_FAR", exc, distance=exc.distance)
    except OutOfRangeError as exc:
        return _fail(EXIT_OUT_OF_RANGE, "OUT_OF_RANGE", exc)
    except (InvalidInputError, ValidationError, ValueError, NestlabError) as exc:
        return _fail(EXIT_INVALID, "INVALID_INPUT", exc)


if __name__ == "__main__":
    sys.exit(main())
