from __future__ import annotations

import functools
import json
import logging
import math
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple

import click
import numpy as np
import pandas as pd

from levinger import __version__
from levinger.analysis import (
    DEFAULT_CONCAVITY_TOL,
    DEFAULT_FD_STEP,
    DEFAULT_GRID_SIZE,
    Verdict,
    certify_nonconcavity,
    first_derivative,
    levinger_radius,
    scan,
    second_derivative,
    skew_singularity_check,
    weight_limit_experiment,
)
from levinger.checks import run_acceptance
from levinger.families import (
    EX1,
    TOEPLITZ_CONVEX,
    FamilyKind,
    FamilySpec,
    build,
    cyclic_weighted_shift,
    family_names,
    four_by_four_blocks,
    parse_family_block,
    reversible_cyclic_weights,
    tridiagonal_toeplitz,
)
from levinger.matrix import (
    Matrix,
    MatrixFormatError,
    as_matrix,
    decompose,
    direct_sum,
    is_nonnegative,
    levinger_homotopy,
    nonneg_extension_bound,
    read_matrix,
)
from levinger.spectra import ConvergenceError, full_spectrum

logger = logging.getLogger(__name__)
logger.addHandler(logging.NullHandler())

FLOAT_FORMAT = "%.17g"
FIGURE_GRID_SIZE = 201
SEARCH_GRID_SIZE = 101
FIGURE_IDS = (1, 2, 3, 4, 5, 6)

EXIT_FAILED_CHECK = 1
EXIT_SOLVER_FAILURE = 3


@dataclass(frozen=True)
class RunConfig:
    """
    Everything a command needs, collected from the command-line options.
    """

    command: str
    family: Optional[FamilySpec] = None
    matrix_path: Optional[str] = None
    grid_size: int = DEFAULT_GRID_SIZE
    fd_step: float = DEFAULT_FD_STEP
    tol: float = DEFAULT_CONCAVITY_TOL
    output_format: str = "csv"
    seed: int = 0
    out: str = "-"
    extra: Dict[str, Any] = field(default_factory=dict)

    def source(self) -> Optional[Matrix]:
        """
        The matrix named by --family / --family-file or --matrix, if any.
        """
        if self.family is not None and self.matrix_path is not None:
            raise click.UsageError("Give either a family or --matrix, not both")
        try:
            if self.family is not None:
                return build(self.family)
            if self.matrix_path is not None:
                return read_matrix(self.matrix_path)
        except (MatrixFormatError, ValueError, TypeError, OSError) as e:
            raise click.UsageError(str(e))
        return None

    def require_source(self) -> Matrix:
        matrix = self.source()
        if matrix is None:
            raise click.UsageError(
                f"'{self.command}' needs a matrix: use --family or --matrix"
            )
        return matrix

    def to_dict(self) -> Dict[str, Any]:
        return {
            "command": self.command,
            "family": self.family.describe() if self.family is not None else None,
            "matrix": self.matrix_path,
            "grid_size": self.grid_size,
            "fd_step": self.fd_step,
            "tol": self.tol,
            "format": self.output_format,
            "seed": self.seed,
            **self.extra,
        }


def _parse_floats(text: Optional[str], option: str) -> Tuple[float, ...]:
    if text is None:
        return ()
    try:
        return tuple(float(item) for item in text.split(",") if item.strip())
    except ValueError:
        raise click.BadParameter(f"Expected comma-separated numbers, got {text!r}", param_hint=option)


def _family_from_options(options: Dict[str, Any]) -> Optional[FamilySpec]:
    if options["family_file"] is not None:
        if options["family"] is not None:
            raise click.UsageError("Give either --family or --family-file, not both")
        try:
            return parse_family_block(Path(options["family_file"]).read_text())
        except (ValueError, TypeError, OSError) as e:
            raise click.UsageError(str(e))

    if options["family"] is None:
        return None
    try:
        kind = FamilyKind.from_name(options["family"])
    except TypeError as e:
        raise click.BadParameter(str(e), param_hint="--family")

    parameters = {
        key: float(options[key])
        for key in ("n", "a", "b", "c", "d", "u", "v", "w", "h", "base")
        if options[key] is not None
    }
    weights = _parse_floats(options["weights"], "--weights")
    cycle = tuple(int(i) for i in _parse_floats(options["cycle"], "--cycle"))
    return FamilySpec(kind=kind, parameters=parameters, weights=weights, cycle=cycle)


def source_options(command: Callable) -> Callable:
    """
    Adds the matrix-source options shared by every command.
    """
    options = [
        click.option(
            "--family",
            type=str,
            default=None,
            help=f"Matrix family, one of: {', '.join(family_names())}",
        ),
        click.option("--n", type=int, default=None, help="Family dimension"),
        click.option("--a", type=float, default=None),
        click.option("--b", type=float, default=None),
        click.option("--c", type=float, default=None),
        click.option("--d", type=float, default=None),
        click.option("--u", type=float, default=None),
        click.option("--v", type=float, default=None),
        click.option("--w", type=float, default=None),
        click.option("--h", type=float, default=None, help="4x4 block weight"),
        click.option("--base", type=float, default=None, help="Reversible weight base"),
        click.option("--weights", type=str, default=None, help="Comma-separated weights"),
        click.option("--cycle", type=str, default=None, help="1-based circuit indices"),
        click.option(
            "--family-file",
            type=click.Path(dir_okay=False),
            default=None,
            help="Key-value family block",
        ),
        click.option(
            "--matrix",
            "matrix_path",
            type=click.Path(dir_okay=False),
            default=None,
            help="Plain-text matrix file",
        ),
    ]
    for option in reversed(options):
        command = option(command)
    return command


def output_options(command: Callable) -> Callable:
    options = [
        click.option("--grid", "grid_size", type=int, default=None, help="Grid size"),
        click.option(
            "--fd-step",
            type=float,
            default=DEFAULT_FD_STEP,
            show_default=True,
            help="Finite-difference step",
        ),
        click.option(
            "--tol",
            type=float,
            default=DEFAULT_CONCAVITY_TOL,
            show_default=True,
            help="Concavity tolerance",
        ),
        click.option(
            "--format",
            "output_format",
            type=click.Choice(["csv", "json"]),
            default="csv",
            show_default=True,
        ),
        click.option("--seed", type=int, default=0, show_default=True),
        click.option("--out", type=str, default="-", help="Output path, '-' for stdout"),
    ]
    for option in reversed(options):
        command = option(command)
    return command


def make_config(command: str, default_grid: int, options: Dict[str, Any]) -> RunConfig:
    grid_size = options.pop("grid_size") or default_grid
    if grid_size < 3:
        raise click.BadParameter("Grid size must be at least 3", param_hint="--grid")
    if not options["fd_step"] > 0.0:
        raise click.BadParameter("Step must be positive", param_hint="--fd-step")

    family = _family_from_options(options)
    return RunConfig(
        command=command,
        family=family,
        matrix_path=options["matrix_path"],
        grid_size=grid_size,
        fd_step=options["fd_step"],
        tol=options["tol"],
        output_format=options["output_format"],
        seed=options["seed"],
        out=options["out"],
    )


def _plain(value: Any) -> Any:
    if isinstance(value, (float, np.floating)):
        return None if math.isnan(value) else float(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.bool_,)):
        return bool(value)
    return value


def write_frame(frame: pd.DataFrame, config: RunConfig) -> None:
    """
    Writes a result table: CSV with 17 significant digits, or a JSON document
    holding the config and the rows.
    """
    with click.open_file(config.out, "w") as stream:
        if config.output_format == "csv":
            frame.to_csv(stream, index=False, float_format=FLOAT_FORMAT)
        else:
            rows = [
                {key: _plain(value) for key, value in row.items()}
                for row in frame.to_dict(orient="records")
            ]
            document = {"command": config.command, "config": config.to_dict(), "rows": rows}
            stream.write(json.dumps(document, indent=2) + "\n")


def read_frame(path: str) -> pd.DataFrame:
    """
    Reads a CSV written by write_frame without losing any digits.
    """
    return pd.read_csv(path, float_precision="round_trip")


def solver_errors(command: Callable) -> Callable:
    """
    Maps eigen-solver failures to exit code 3.
    """

    @functools.wraps(command)
    def wrapper(*args: Any, **kwargs: Any) -> Any:
        try:
            return command(*args, **kwargs)
        except ConvergenceError as e:
            click.echo(f"Solver failure: {e}", err=True)
            sys.exit(EXIT_SOLVER_FAILURE)

    return wrapper


@click.group()
@click.version_option(__version__)
@click.option(
    "--log-level",
    type=click.Choice(["DEBUG", "INFO", "WARNING", "ERROR"], case_sensitive=False),
    default="WARNING",
    show_default=True,
)
def cli(log_level: str) -> None:
    """
    Spectral radius along Levinger's homotopy (1 - t) A + t A^T.
    """
    logging.basicConfig(
        level=log_level.upper(),
        stream=sys.stderr,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )


def _point_rows(matrix: Matrix, points: Tuple[float, ...], fd_step: float) -> pd.DataFrame:
    rows = []
    for t in points:
        if not 0.0 <= t <= 1.0:
            raise click.BadParameter(f"t={t} is outside [0, 1]", param_hint="--t")
        spectrum = full_spectrum(levinger_homotopy(matrix, t)).values
        row: Dict[str, float] = {
            "t": t,
            "r": levinger_radius(matrix, t),
            "dr": first_derivative(matrix, t, fd_step=fd_step),
            "d2r": second_derivative(matrix, t, fd_step=fd_step),
        }
        row.update({f"eig_re_{k + 1}": value.real for k, value in enumerate(spectrum)})
        row.update({f"eig_im_{k + 1}": value.imag for k, value in enumerate(spectrum)})
        rows.append(row)
    return pd.DataFrame(rows)


@cli.command(name="eval")
@source_options
@output_options
@click.option("--t", "points", type=float, multiple=True, default=(0.5,), show_default=True)
@solver_errors
def eval_command(points: Tuple[float, ...], **options: Any) -> None:
    """
    Evaluates r(t), its derivatives and the spectrum of B(t) at given points.
    """
    config = make_config("eval", DEFAULT_GRID_SIZE, options)
    matrix = config.require_source()
    write_frame(_point_rows(matrix, points, config.fd_step), config)


@cli.command(name="scan")
@source_options
@output_options
@solver_errors
def scan_command(**options: Any) -> None:
    """
    Samples r(t), dr, d2r and the full spectrum of B(t) on a uniform grid.
    """
    config = make_config("scan", DEFAULT_GRID_SIZE, options)
    matrix = config.require_source()
    try:
        levinger_scan = scan(
            matrix, config.grid_size, config.fd_step, with_eigenvalues=True
        )
    except ValueError as e:
        raise click.UsageError(str(e))
    write_frame(levinger_scan.to_frame(), config)
    # Partial tables are still written; failed points leave empty cells
    for failure in levinger_scan.failures:
        click.echo(f"Grid point failed: {failure}", err=True)
    if levinger_scan.failures:
        sys.exit(EXIT_SOLVER_FAILURE)


@cli.command(name="verify")
@source_options
@output_options
@solver_errors
def verify_command(**options: Any) -> None:
    """
    Runs the acceptance suite and exits with 1 if any check fails.
    """
    config = make_config("verify", DEFAULT_GRID_SIZE, options)
    matrix = config.source()
    results = run_acceptance(
        fd_step=config.fd_step, seed=config.seed, matrix=matrix, tol=config.tol
    )

    if config.output_format == "json":
        witnesses: List[Dict[str, Any]] = []
        if matrix is not None:
            report = certify_nonconcavity(
                matrix, scan(matrix, FIGURE_GRID_SIZE, derivatives=False), config.tol
            )
            if report.witness is not None:
                witnesses.append(report.witness._asdict())
        document = {
            "command": config.command,
            "config": config.to_dict(),
            "checks": [
                {key: _plain(value) for key, value in result.to_dict().items()}
                for result in results
            ],
            "witnesses": witnesses,
        }
        with click.open_file(config.out, "w") as stream:
            stream.write(json.dumps(document, indent=2) + "\n")
    else:
        frame = pd.DataFrame([result.to_dict() for result in results])
        write_frame(frame, config)

    failed = [result.name for result in results if not result.passed]
    if failed:
        click.echo(f"Failed checks: {', '.join(failed)}", err=True)
        sys.exit(EXIT_FAILED_CHECK)


def figure_ex1(grid_size: int) -> pd.DataFrame:
    return scan(EX1, grid_size, derivatives=False, with_eigenvalues=True).to_frame()


def figure_two_parameter(grid_size: int, h_steps: int = 20) -> pd.DataFrame:
    """
    Eigenvalues of B(t, h) for the 4x4 example, h = i / h_steps, with the
    h = 0.4 slice and each slice's concavity verdict flagged.
    """
    frames = []
    for i in range(h_steps + 1):
        h = i / h_steps
        matrix = direct_sum(*four_by_four_blocks(h))
        levinger_scan = scan(matrix, grid_size, derivatives=False, with_eigenvalues=True)
        verdict = certify_nonconcavity(matrix, levinger_scan).verdict
        frame = levinger_scan.to_frame().drop(columns=["dr", "d2r"])
        frame.insert(0, "h", h)
        frame["h_slice"] = math.isclose(h, 0.4)
        frame["nonconcave"] = verdict == Verdict.NONCONCAVE
        frames.append(frame)
    return pd.concat(frames, ignore_index=True)


def figure_toeplitz_convex(grid_size: int, fd_step: float) -> pd.DataFrame:
    frame = scan(TOEPLITZ_CONVEX, grid_size, fd_step).to_frame()
    # One-sided stencils at the endpoints
    for index in (0, len(frame) - 1):
        t = float(frame.at[index, "t"])
        frame.at[index, "dr"] = first_derivative(TOEPLITZ_CONVEX, t, fd_step)
        frame.at[index, "d2r"] = second_derivative(TOEPLITZ_CONVEX, t, fd_step)
    return frame


def figure_cyclic_shift16(grid_size: int, fd_step: float) -> pd.DataFrame:
    matrix = cyclic_weighted_shift(reversible_cyclic_weights(16, 16.0))
    return scan(matrix, grid_size, fd_step).to_frame()


def figure_weight_limit(grid_size: int, fd_step: float, column: str) -> pd.DataFrame:
    base_weights = reversible_cyclic_weights(16, 16.0)
    results = weight_limit_experiment(
        base_weights,
        index=12,
        factor=2.0**-8,
        steps=4,
        grid_size=grid_size,
        fd_step=fd_step,
    )
    frames = []
    for scale, levinger_scan in results:
        frame = levinger_scan.to_frame()[["t", column]]
        frame.insert(0, "c12", base_weights[11] * scale)
        frame.insert(0, "scale", scale)
        frames.append(frame)
    return pd.concat(frames, ignore_index=True)


def figure_frame(figure_id: int, grid_size: int, fd_step: float) -> pd.DataFrame:
    """
    The data behind one figure.
    """
    if figure_id == 1:
        return figure_ex1(grid_size)
    elif figure_id == 2:
        return figure_two_parameter(grid_size)
    elif figure_id == 3:
        return figure_toeplitz_convex(grid_size, fd_step)
    elif figure_id == 4:
        return figure_cyclic_shift16(grid_size, fd_step)
    elif figure_id == 5:
        return figure_weight_limit(grid_size, fd_step, "r")
    elif figure_id == 6:
        return figure_weight_limit(grid_size, fd_step, "d2r")
    raise ValueError(f"Unknown figure {figure_id}; expected one of {FIGURE_IDS}")


@cli.command(name="figure")
@click.argument("figure_id", type=click.IntRange(min(FIGURE_IDS), max(FIGURE_IDS)))
@output_options
@solver_errors
def figure_command(figure_id: int, **options: Any) -> None:
    """
    Emits the data of figure FIGURE_ID (1-6) as CSV or JSON.
    """
    options.update(
        {key: None for key in ("family", "family_file", "matrix_path", "weights", "cycle")}
    )
    config = make_config("figure", FIGURE_GRID_SIZE, options)
    config = replace(config, extra={"figure": figure_id})
    try:
        frame = figure_frame(figure_id, config.grid_size, config.fd_step)
    except ValueError as e:
        raise click.UsageError(str(e))
    write_frame(frame, config)


def draw_matrix(
    rng: np.random.Generator, n: int, sparsity: float, draw: str
) -> Matrix:
    """
    One random nonnegative matrix: entries uniform on [0, 1], each zeroed with
    probability `sparsity`, or a random tridiagonal Toeplitz matrix.
    """
    if draw == "tridiag-toeplitz":
        a, b, c = rng.uniform(0.0, 1.0, size=3)
        return tridiagonal_toeplitz(max(n, 2), a, b, max(c, 1e-12))
    entries = rng.uniform(0.0, 1.0, size=(n, n))
    mask = rng.uniform(0.0, 1.0, size=(n, n)) >= sparsity
    return as_matrix(entries * mask)


def search_records(
    seed: int,
    count: int,
    n: int,
    sparsity: float,
    draw: str,
    grid_size: int = SEARCH_GRID_SIZE,
    tol: float = DEFAULT_CONCAVITY_TOL,
) -> pd.DataFrame:
    """
    Random search for nonconcave Levinger functions. Uses numpy's PCG64
    generator, so a seed always reproduces the same records.
    """
    rng = np.random.default_rng(seed)
    records = []
    for number in range(count):
        matrix = draw_matrix(rng, n, sparsity, draw)
        levinger_scan = scan(matrix, grid_size, derivatives=False)
        report = certify_nonconcavity(matrix, levinger_scan, tol=tol)
        if report.verdict != Verdict.NONCONCAVE or report.witness is None:
            continue
        logger.info(f"Draw {number} is nonconcave: {report.witness}")
        records.append(
            {
                "draw": number,
                "n": matrix.shape[0],
                "t1": report.witness.t1,
                "t2": report.witness.t2,
                "margin": report.witness.margin,
                "matrix": ";".join(
                    " ".join(f"{value:.17g}" for value in row) for row in matrix
                ),
            }
        )
    return pd.DataFrame(records, columns=["draw", "n", "t1", "t2", "margin", "matrix"])


@cli.command(name="search")
@output_options
@click.option("--count", type=int, default=100, show_default=True, help="Number of draws")
@click.option("--n", type=click.IntRange(2, 32), default=4, show_default=True)
@click.option(
    "--sparsity",
    type=click.FloatRange(0.0, 1.0, max_open=True),
    default=0.5,
    show_default=True,
    help="Probability that an entry is zero",
)
@click.option(
    "--draw",
    type=click.Choice(["uniform", "tridiag-toeplitz"]),
    default="uniform",
    show_default=True,
)
@solver_errors
def search_command(count: int, n: int, sparsity: float, draw: str, **options: Any) -> None:
    """
    Draws random nonnegative matrices and emits those with a certified
    nonconcave Levinger function, together with the witness.
    """
    options.update(
        {key: None for key in ("family", "family_file", "matrix_path", "weights", "cycle")}
    )
    config = make_config("search", SEARCH_GRID_SIZE, options)
    config = replace(
        config, extra={"count": count, "n": n, "sparsity": sparsity, "draw": draw}
    )
    frame = search_records(
        config.seed, count, n, sparsity, draw, config.grid_size, config.tol
    )
    write_frame(frame, config)


@cli.command(name="decompose")
@source_options
@output_options
@solver_errors
def decompose_command(**options: Any) -> None:
    """
    Prints the symmetric and skew parts, the nonnegativity range of the centred
    homotopy and the skew-part singularity report.
    """
    config = make_config("decompose", DEFAULT_GRID_SIZE, options)
    matrix = config.require_source()
    sym, skew = decompose(matrix)
    singularity = skew_singularity_check(matrix)
    bound = nonneg_extension_bound(matrix) if is_nonnegative(matrix) else math.nan

    summary = {
        "extension_bound": bound,
        "odd_order": singularity.odd_order,
        "skew_rank_deficient": singularity.skew_rank_deficient,
        "skew_sigma_min": singularity.smallest_singular_value,
    }
    rows = []
    for part, values in (("sym", sym), ("skew", skew)):
        for i, row in enumerate(values):
            rows.append(
                {
                    "part": part,
                    "row": i + 1,
                    **{f"c{j + 1}": v for j, v in enumerate(row)},
                    **summary,
                }
            )
    frame = pd.DataFrame(rows)
    write_frame(frame, config)

    click.echo(" ".join(f"{key}={value!r}" for key, value in summary.items()), err=True)


def main() -> None:
    cli()


if __name__ == "__main__":
    main()
