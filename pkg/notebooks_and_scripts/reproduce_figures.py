# Imports
from pathlib import Path

import click

from levinger.analysis import DEFAULT_FD_STEP, summarize_weight_limit, weight_limit_experiment
from levinger.cli import FIGURE_IDS, FLOAT_FORMAT, figure_frame
from levinger.families import reversible_cyclic_weights


@click.command()
@click.option(
    "--out_dir",
    type=str,
    required=True,
    help="Enter the directory the figure tables are written to",
)
@click.option(
    "--grid",
    type=int,
    default=201,
    help="Enter the number of t grid points per curve",
)
@click.option(
    "--fd_step",
    type=float,
    default=DEFAULT_FD_STEP,
    help="Enter the finite-difference step of the curvature columns",
)
def reproduce_figures(out_dir: str, grid: int, fd_step: float):
    """
    Writes the data behind every figure, plus a summary of the shrinking-weight
    experiment, as CSV files

    Args:
        out_dir (str): Output directory, created if missing
        grid (int): Grid size of every curve
        fd_step (float): Stencil step of dr and d2r

    Returns:
        figure_1.csv .. figure_6.csv and weight_limit_summary.csv in out_dir
    """
    directory = Path(out_dir)
    directory.mkdir(parents=True, exist_ok=True)

    for figure_id in FIGURE_IDS:
        frame = figure_frame(figure_id, grid, fd_step)
        frame.to_csv(
            directory / f"figure_{figure_id}.csv", index=False, float_format=FLOAT_FORMAT
        )
        click.echo(f"figure {figure_id}: {len(frame)} rows")

    # The summary quantifies how d2r near t = 0 blows up while d2r(1/2) converges
    results = weight_limit_experiment(
        reversible_cyclic_weights(16, 16.0),
        index=12,
        factor=2.0**-8,
        steps=4,
        grid_size=grid,
        fd_step=fd_step,
    )
    summarize_weight_limit(results).to_csv(
        directory / "weight_limit_summary.csv", index=False, float_format=FLOAT_FORMAT
    )


if __name__ == "__main__":
    reproduce_figures()
