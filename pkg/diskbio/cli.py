"""
The ``diskbio`` command line: ``eigs``, ``mesh``, ``assemble``, ``verify`` and ``precond``.

Exit codes: 0 on success, 1 if an identity check exceeds its tolerance
(or a numerical integration or a solver fails), 2 on usage or configuration errors.
"""
import argparse
import csv
import json
import logging
import math
import sys
from contextlib import contextmanager
from pathlib import Path
from typing import IO, Iterator, List, Optional, Sequence, Tuple

from diskbio.config import OPERATORS, PAIRS, SPACES, SUITES, RunConfig, load_config
from diskbio.core.assembly import assemble
from diskbio.core.kernels import (
    OperatorKind,
    kernel_eval,
    kernel_series_extrapolated,
    li_rong_alpha1,
    primitive_check_vbar,
)
from diskbio.core.mesh import mesh_disk
from diskbio.core.solve import precond_study
from diskbio.core.specfun import ModeIndex, PolarPoint, lambda_lm, lambda_recursion_residual
from diskbio.core.spectral import (
    IdentityReport,
    default_suite_modes,
    verify_calderon_spectral,
    verify_krenk,
    verify_vbar,
    verify_wbar_modes,
    verify_wbar_one,
    verify_wolfe,
)
from diskbio.errors import AccuracyError, ConfigError, DefinitenessError
from diskbio.tools import relative_error


logger = logging.getLogger(__name__)


EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2

DEFAULT_TOLERANCES = dict(
    kernels=1e-3,
    wolfe=1e-4,
    vbar=1e-3,
    krenk=1e-3,
    wbar=1e-3,
    wbar1=1e-8,
    calderon=2e-3,
)

IDENTITY_COLUMNS = ("identity", "l", "m", "l2", "m2", "computed", "reference", "rel_err")
KERNEL_COLUMNS = ("check", "x_r", "x_theta", "y_r", "y_theta", "value", "reference", "rel_err")

# Interior pairs well separated on the hemisphere, where the Abel-summed series converge
SERIES_PAIRS = (
    (PolarPoint(0.2, 0.0), PolarPoint(0.6, math.pi / 2)),
    (PolarPoint(0.3, 0.5), PolarPoint(0.5, 2.5)),
    (PolarPoint(0.1, 1.0), PolarPoint(0.7, 4.0)),
    (PolarPoint(0.4, 0.0), PolarPoint(0.4, math.pi)),
    (PolarPoint(0.5, 1.5), PolarPoint(0.3, 5.0)),
)

SUITE_LMAX = 5


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="TOML file with run parameters")
    parser.add_argument("--out", help="output file (standard output if omitted)")
    parser.add_argument(
        "-v", "--verbose", action="count", default=0, help="more logging (repeatable)"
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="diskbio",
        description="Boundary integral operators on the disk and their exact inverses.",
        argument_default=argparse.SUPPRESS,
    )
    commands = parser.add_subparsers(dest="command", metavar="COMMAND")
    commands.required = True

    eigs = commands.add_parser(
        "eigs", help="tabulate the eigenvalue factors", argument_default=argparse.SUPPRESS
    )
    eigs.add_argument("--lmax", type=int, help="largest degree (default 10)")
    _add_common(eigs)

    mesh = commands.add_parser(
        "mesh", help="write a disk mesh", argument_default=argparse.SUPPRESS
    )
    mesh.add_argument("--level", type=int, help="refinement level (default 3)")
    mesh.add_argument("--a", type=float, help="disk radius (default 1)")
    _add_common(mesh)

    assemble_cmd = commands.add_parser(
        "assemble", help="assemble a Galerkin matrix", argument_default=argparse.SUPPRESS
    )
    assemble_cmd.add_argument("--operator", choices=OPERATORS)
    assemble_cmd.add_argument("--space", choices=SPACES)
    assemble_cmd.add_argument("--level", type=int)
    assemble_cmd.add_argument("--a", type=float)
    assemble_cmd.add_argument("--regular-order", dest="regular_order", type=int)
    assemble_cmd.add_argument("--singular-order", dest="singular_order", type=int)
    _add_common(assemble_cmd)

    verify = commands.add_parser(
        "verify", help="check the spectral identities", argument_default=argparse.SUPPRESS
    )
    verify.add_argument("--suite", choices=SUITES)
    verify.add_argument("--tol", type=float, help="tolerance (suite dependent default)")
    verify.add_argument("--n-r", dest="n_r", type=int)
    verify.add_argument("--n-theta", dest="n_theta", type=int)
    verify.add_argument("--series-terms", dest="series_terms", type=int)
    _add_common(verify)

    precond = commands.add_parser(
        "precond", help="run the preconditioning study", argument_default=argparse.SUPPRESS
    )
    precond.add_argument("--levels", type=int, nargs="+")
    precond.add_argument("--pair", choices=PAIRS)
    precond.add_argument("--a", type=float)
    precond.add_argument("--lanczos-steps", dest="lanczos_steps", type=int)
    precond.add_argument("--cg-tol", dest="cg_tol", type=float)
    _add_common(precond)

    return parser


@contextmanager
def _output(path: Optional[str], binary: bool = False) -> Iterator[IO]:
    if path is None:
        yield sys.stdout.buffer if binary else sys.stdout
        return
    with open(path, "wb" if binary else "w", newline=None if binary else "") as f:
        yield f


def _write_csv(path: Optional[str], columns: Sequence[str], rows: Sequence[Sequence[str]]) -> None:
    with _output(path) as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(columns)
        writer.writerows(rows)


def run_eigs(config: RunConfig) -> int:
    rows = []
    for mode in ModeIndex.all_modes(config.lmax):
        residual = math.nan if mode.l == 0 else lambda_recursion_residual(mode)
        rows.append((str(mode.l), str(mode.m), repr(lambda_lm(mode)), repr(residual)))
    _write_csv(config.out, ("l", "m", "lambda", "recursion_residual"), rows)
    return EXIT_OK


def run_mesh(config: RunConfig) -> int:
    if config.out is None:
        raise ConfigError("mesh needs --out (a directory for vertices.csv and triangles.csv)")
    mesh = mesh_disk(config.a, config.level)
    directory = Path(config.out)
    directory.mkdir(parents=True, exist_ok=True)
    _write_csv(
        str(directory / "vertices.csv"),
        ("id", "x", "y", "boundary"),
        [
            (str(i), repr(float(x)), repr(float(y)), str(int(b)))
            for i, ((x, y), b) in enumerate(zip(mesh.vertices, mesh.boundary))
        ],
    )
    _write_csv(
        str(directory / "triangles.csv"),
        ("id", "v0", "v1", "v2"),
        [(str(i), *(str(int(v)) for v in triangle)) for i, triangle in enumerate(mesh.triangles)],
    )
    logger.info("Wrote %r to %s", mesh, directory)
    return EXIT_OK


def run_assemble(config: RunConfig) -> int:
    if config.out is None:
        raise ConfigError("assemble needs --out")
    mesh = mesh_disk(config.a, config.level)
    matrix = assemble(config.operator, mesh, config.space, config.quad_config())
    matrix.write(config.out)
    logger.info("Wrote %r to %s", matrix, config.out)
    return EXIT_OK


KernelCheckT = Tuple[str, PolarPoint, PolarPoint, float, float, float]


def _kernel_checks(config: RunConfig) -> List[KernelCheckT]:
    checks = []
    for x, y in SERIES_PAIRS:
        for kind in (OperatorKind.V, OperatorKind.Vbar):
            value = kernel_series_extrapolated(kind, x, y, terms=config.series_terms)
            reference = kernel_eval(kind, x, y)
            error = relative_error(value, reference)
            checks.append((f"series-{kind.value}", x, y, value, reference, error))
        value = li_rong_alpha1(x, y)
        reference = 1 / (4 * math.pi * x.distance(y))
        checks.append(("li-rong", x, y, value, reference, relative_error(value, reference)))
        residual = primitive_check_vbar(1.0, x, y)
        checks.append(("primitive-vbar", x, y, residual, 0.0, abs(residual)))
    return checks


def _identity_reports(config: RunConfig) -> List[IdentityReport]:
    suite = config.suite
    if suite == "wbar1":
        return verify_wbar_one(config.n_r or 64, config.n_theta or 64)

    reports = []
    for modes in default_suite_modes(suite, SUITE_LMAX):
        if suite == "wolfe":
            reports.append(verify_wolfe(*modes))
        elif suite == "vbar":
            reports.append(verify_vbar(*modes))
        elif suite == "krenk":
            reports.append(verify_krenk(*modes))
        elif suite == "wbar":
            n_r, n_theta = config.n_r or 64, config.n_theta or 64
            reports.append(verify_wbar_modes(*modes, n_r=n_r, n_theta=n_theta))
        else:
            reports.append(verify_calderon_spectral(*modes))
    return reports


def run_verify(config: RunConfig) -> int:
    tol = DEFAULT_TOLERANCES[config.suite] if config.tol is None else config.tol

    if config.suite == "kernels":
        checks = _kernel_checks(config)
        rows = [
            (name, *(repr(float(v)) for v in (x.r, x.theta, y.r, y.theta, value, ref, err)))
            for name, x, y, value, ref, err in checks
        ]
        _write_csv(config.out, KERNEL_COLUMNS, rows)
        errors = [err for *_, err in checks]
    else:
        reports = _identity_reports(config)
        _write_csv(config.out, IDENTITY_COLUMNS, [report.csv_fields() for report in reports])
        errors = [report.rel_err for report in reports]

    failed = sum(1 for err in errors if not err <= tol)
    if failed:
        logger.warning(
            "%d of %d %s checks exceed the tolerance %g", failed, len(errors), config.suite, tol
        )
        return EXIT_CHECK_FAILED
    logger.info("All %d %s checks within %g", len(errors), config.suite, tol)
    return EXIT_OK


def run_precond(config: RunConfig) -> int:
    result = precond_study(
        config.levels,
        config.pair,
        a=config.a,
        config=config.quad_config(),
        cg_tol=config.cg_tol,
        lanczos_steps=config.lanczos_steps,
    )
    with _output(config.out) as f:
        json.dump(result.as_dicts(), f, indent=2)
        f.write("\n")
    return EXIT_OK


COMMANDS = dict(
    eigs=run_eigs,
    mesh=run_mesh,
    assemble=run_assemble,
    verify=run_verify,
    precond=run_precond,
)


def _configure_logging(verbosity: int) -> None:
    level = {0: logging.WARNING, 1: logging.INFO}.get(verbosity, logging.DEBUG)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def run(argv: Optional[Sequence[str]] = None) -> int:
    """
    Execute a command line and return the exit code.
    """
    parser = build_parser()
    try:
        args = vars(parser.parse_args(argv))
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE

    command = args.pop("command")
    verbosity = args.pop("verbose", 0)
    config_path = args.pop("config", None)
    _configure_logging(verbosity)

    try:
        config = load_config(config_path, **args)
        return COMMANDS[command](config)
    except (AccuracyError, DefinitenessError) as exc:
        logger.error("%s", exc)
        return EXIT_CHECK_FAILED
    except ValueError as exc:
        print(f"diskbio {command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    sys.exit(run())
