from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum, auto, unique
from typing import Callable, Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from numpy.typing import ArrayLike, NDArray

from levinger.families import cyclic_weighted_shift
from levinger.matrix import (
    Matrix,
    as_matrix,
    decompose,
    is_irreducible,
    levinger_homotopy,
    require_nonnegative,
)
from levinger.spectra import (
    PERRON_TOLERANCE,
    ConvergenceError,
    full_spectrum,
    null_space_contains,
    perron_root,
    spectral_radius,
    symmetric_eigen,
)

logger = logging.getLogger(__name__)
logger.addHandler(logging.NullHandler())

DEFAULT_GRID_SIZE = 1001
DEFAULT_FD_STEP = 1e-4
MAX_SCAN_FD_STEP = 1e-3
DEFAULT_CONCAVITY_TOL = 1e-7
DEFAULT_SLOPE_TOL = 1e-5
DEFAULT_PREDICATE_TOL = 1e-8
UNIMODALITY_SLACK = 1e-9
CROSSING_TOLERANCE = 1e-12
SKEW_SINGULARITY_TOL = 1e-10
# Fresh evaluations behind a nonconcavity witness use a tighter solver tolerance
VERIFY_PERRON_TOLERANCE = PERRON_TOLERANCE / 10.0
MAX_WITNESS_CANDIDATES = 8


class ReducibleMatrixError(ValueError):
    """Raised when a predicate that needs an irreducible matrix gets a reducible one."""


@unique
class Verdict(Enum):
    CONSTANT = auto()
    CONCAVE_ON_GRID = auto()
    NONCONCAVE = auto()

    @property
    def label(self) -> str:
        return self.name.lower().replace("_", "-")


def uniform_grid(grid_size: int) -> NDArray[np.float64]:
    """
    Grid k / (N - 1), k = 0..N-1. Division keeps grid points such as 0.09 and
    0.5 exact, which linspace does not guarantee.
    """
    if grid_size < 3:
        raise ValueError(f"Grid size must be at least 3, got {grid_size}")
    return np.arange(grid_size) / (grid_size - 1)


def levinger_radius(
    matrix: ArrayLike, t: float, tol: float = PERRON_TOLERANCE
) -> float:
    """
    r(t), the spectral radius of (1 - t) A + t A^T.
    """
    return spectral_radius(levinger_homotopy(matrix, t), tol=tol)


def levinger_function(
    matrix: ArrayLike, tol: float = PERRON_TOLERANCE
) -> Callable[[float], float]:
    """
    Memoised t -> r(t) for one matrix.
    """
    matrix = as_matrix(matrix)
    cache: Dict[float, float] = {}

    def r(t: float) -> float:
        t = float(t)
        if t not in cache:
            cache[t] = levinger_radius(matrix, t, tol=tol)
        return cache[t]

    return r


def _central_second(r: Callable[[float], float], t: float, h: float) -> float:
    return (r(t + h) - 2.0 * r(t) + r(t - h)) / (h * h)


def _central_first(r: Callable[[float], float], t: float, h: float) -> float:
    return (r(t + h) - r(t - h)) / (2.0 * h)


def _second_difference(r: Callable[[float], float], t: float, h: float) -> float:
    if t - h >= 0.0 and t + h <= 1.0:
        return (4.0 * _central_second(r, t, h / 2.0) - _central_second(r, t, h)) / 3.0

    # One-sided stencils are first order, so the Richardson weights differ
    if t + 2.0 * h <= 1.0:
        side = 1.0
    elif t - 2.0 * h >= 0.0:
        side = -1.0
    else:
        raise ValueError(f"No second-difference stencil of step {h} fits at t={t}")

    def one_sided(step: float) -> float:
        return (r(t) - 2.0 * r(t + side * step) + r(t + 2.0 * side * step)) / (
            step * step
        )

    return 2.0 * one_sided(h / 2.0) - one_sided(h)


def _first_difference(r: Callable[[float], float], t: float, h: float) -> float:
    if t - h >= 0.0 and t + h <= 1.0:
        return (4.0 * _central_first(r, t, h / 2.0) - _central_first(r, t, h)) / 3.0

    if t + h <= 1.0:
        side = 1.0
    elif t - h >= 0.0:
        side = -1.0
    else:
        raise ValueError(f"No first-difference stencil of step {h} fits at t={t}")

    def one_sided(step: float) -> float:
        return side * (r(t + side * step) - r(t)) / step

    return 2.0 * one_sided(h / 2.0) - one_sided(h)


def _check_step(fd_step: float) -> None:
    if not fd_step > 0.0:
        raise ValueError(f"Finite-difference step {fd_step!r} must be positive")


def second_derivative(
    matrix: ArrayLike,
    t: float,
    fd_step: float = DEFAULT_FD_STEP,
    tol: float = PERRON_TOLERANCE,
) -> float:
    """
    Richardson-extrapolated second derivative of the Levinger function.

    Central differences D(h) = (r(t+h) - 2r(t) + r(t-h)) / h^2 are combined as
    (4 D(h/2) - D(h)) / 3. Where the central stencil leaves [0, 1] a one-sided
    stencil is used instead.

    Args:
        matrix: Square matrix A
        t: Point in [0, 1]
        fd_step: Stencil step h
        tol: Power-iteration tolerance
    Returns:
        Estimate of r''(t)
    """
    _check_step(fd_step)
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"t={t!r} is outside [0, 1]")
    return _second_difference(levinger_function(matrix, tol), t, fd_step)


def first_derivative(
    matrix: ArrayLike,
    t: float,
    fd_step: float = DEFAULT_FD_STEP,
    tol: float = PERRON_TOLERANCE,
) -> float:
    """
    Richardson-extrapolated first derivative of the Levinger function.
    """
    _check_step(fd_step)
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"t={t!r} is outside [0, 1]")
    return _first_difference(levinger_function(matrix, tol), t, fd_step)


def chord_margin(
    matrix: ArrayLike, t1: float, t2: float, tol: float = PERRON_TOLERANCE
) -> float:
    """
    (r(t1) + r(t2)) / 2 - r((t1 + t2) / 2); positive values witness nonconcavity.
    """
    r = levinger_function(matrix, tol)
    return (r(t1) + r(t2)) / 2.0 - r((t1 + t2) / 2.0)


@dataclass(frozen=True)
class LevingerScan:
    """
    The Levinger function sampled on a grid. `dr` and `d2r` are NaN where the
    central stencil leaves [0, 1]; `r` is NaN at grid points whose eigensolve
    failed, and those points are listed in `failures`.
    """

    t_grid: NDArray[np.float64]
    r: NDArray[np.float64]
    dr: NDArray[np.float64]
    d2r: NDArray[np.float64]
    eigenvalues: Optional[NDArray[np.complex128]] = None
    failures: Tuple[str, ...] = ()

    def __len__(self) -> int:
        return len(self.t_grid)

    @property
    def value_range(self) -> float:
        finite = self.r[np.isfinite(self.r)]
        if finite.size == 0:
            return math.nan
        return float(np.max(finite) - np.min(finite))

    def at(self, t: float) -> int:
        """
        Index of the grid point nearest to t.
        """
        return int(np.argmin(np.abs(self.t_grid - t)))

    def to_frame(self) -> pd.DataFrame:
        """
        Columns t, r, dr, d2r and, when eigenvalues were collected,
        eig_re_1..eig_re_n followed by eig_im_1..eig_im_n.
        """
        data: Dict[str, NDArray] = {
            "t": self.t_grid,
            "r": self.r,
            "dr": self.dr,
            "d2r": self.d2r,
        }
        if self.eigenvalues is not None:
            n = self.eigenvalues.shape[1]
            for k in range(n):
                data[f"eig_re_{k + 1}"] = self.eigenvalues[:, k].real
            for k in range(n):
                data[f"eig_im_{k + 1}"] = self.eigenvalues[:, k].imag
        return pd.DataFrame(data)


def scan(
    matrix: ArrayLike,
    grid_size: int = DEFAULT_GRID_SIZE,
    fd_step: float = DEFAULT_FD_STEP,
    with_eigenvalues: bool = False,
    derivatives: bool = True,
    tol: float = PERRON_TOLERANCE,
) -> LevingerScan:
    """
    Samples r(t) on a uniform grid, with Richardson-extrapolated central
    differences for dr and d2r at interior points.

    Args:
        matrix: Square matrix A
        grid_size: Number of grid points, at least 3
        fd_step: Stencil step, in (0, 1e-3]
        with_eigenvalues: Also record the full spectrum at every grid point
        derivatives: Estimate dr and d2r; without them only r is sampled
        tol: Power-iteration tolerance
    Returns:
        LevingerScan
    """
    matrix = as_matrix(matrix)
    if not 0.0 < fd_step <= MAX_SCAN_FD_STEP:
        raise ValueError(
            f"Scan step {fd_step!r} must lie in (0, {MAX_SCAN_FD_STEP}]"
        )
    t_grid = uniform_grid(grid_size)
    failures: List[str] = []
    r_function = levinger_function(matrix, tol)

    def r(t: float) -> float:
        try:
            return r_function(t)
        except ConvergenceError as e:
            logger.warning(f"Eigensolve failed at t={t!r}: {e}")
            failures.append(f"t={t!r}: {e}")
            return math.nan

    values = np.array([r(t) for t in t_grid])
    dr = np.full(grid_size, math.nan)
    d2r = np.full(grid_size, math.nan)
    for i, t in enumerate(t_grid):
        if not derivatives or t - fd_step < 0.0 or t + fd_step > 1.0:
            continue
        dr[i] = _first_difference(r, t, fd_step)
        d2r[i] = _second_difference(r, t, fd_step)

    eigenvalues = None
    if with_eigenvalues:
        rows = []
        for t in t_grid:
            try:
                rows.append(full_spectrum(levinger_homotopy(matrix, t)).values)
            except ConvergenceError as e:
                logger.warning(f"QR spectrum failed at t={t!r}: {e}")
                failures.append(f"t={t!r} spectrum: {e}")
                rows.append(np.full(matrix.shape[0], complex(math.nan, math.nan)))
        eigenvalues = np.array(rows)

    logger.debug(f"Scanned {grid_size} points with {len(failures)} failures")
    return LevingerScan(
        t_grid=t_grid,
        r=values,
        dr=dr,
        d2r=d2r,
        eigenvalues=eigenvalues,
        failures=tuple(failures),
    )


class Witness(NamedTuple):
    t1: float
    t2: float
    margin: float


@dataclass(frozen=True)
class ConcavityReport:
    verdict: Verdict
    witness: Optional[Witness] = None
    value_range: float = math.nan


def _margin_candidates(
    t_grid: NDArray[np.float64],
    r: NDArray[np.float64],
    tol: float,
    window: Optional[Tuple[float, float]],
) -> List[Tuple[float, int, int]]:
    allowed = np.isfinite(r)
    if window is not None:
        allowed &= (t_grid >= window[0]) & (t_grid <= window[1])

    candidates: List[Tuple[float, int, int]] = []
    size = len(r)
    for d in range(1, (size - 1) // 2 + 1):
        left, middle, right = r[: size - 2 * d], r[d : size - d], r[2 * d :]
        usable = allowed[: size - 2 * d] & allowed[d : size - d] & allowed[2 * d :]
        margins = np.where(usable, (left + right) / 2.0 - middle, -np.inf)
        best = int(np.argmax(margins))
        if margins[best] > tol:
            candidates.append((float(margins[best]), best, best + 2 * d))
    candidates.sort(key=lambda candidate: -candidate[0])
    return candidates


def certify_nonconcavity(
    matrix: ArrayLike,
    levinger_scan: LevingerScan,
    tol: float = DEFAULT_CONCAVITY_TOL,
    window: Optional[Tuple[float, float]] = None,
) -> ConcavityReport:
    """
    Looks for grid pairs (t1, t2) whose grid midpoint lies below the chord by
    more than tol. The largest margin found is re-verified with fresh,
    tighter eigensolves before a nonconcave verdict is issued.

    Args:
        matrix: The matrix the scan was computed on
        levinger_scan: Scan of the matrix
        tol: Margin a witness must exceed
        window: Optional interval the witness pair must lie in
    Returns:
        ConcavityReport with a verdict, the witness if nonconcave and the range of r
    """
    matrix = as_matrix(matrix)
    t_grid, r = levinger_scan.t_grid, levinger_scan.r
    value_range = levinger_scan.value_range

    candidates = _margin_candidates(t_grid, r, tol, window)
    for margin, first, second in candidates[:MAX_WITNESS_CANDIDATES]:
        t1, t2 = float(t_grid[first]), float(t_grid[second])
        fresh = chord_margin(matrix, t1, t2, tol=VERIFY_PERRON_TOLERANCE)
        if fresh > tol:
            logger.debug(f"Nonconcavity witness ({t1}, {t2}) with margin {fresh}")
            return ConcavityReport(
                verdict=Verdict.NONCONCAVE,
                witness=Witness(t1=t1, t2=t2, margin=fresh),
                value_range=value_range,
            )
        logger.warning(
            f"Grid witness ({t1}, {t2}) with margin {margin} did not re-verify "
            f"(fresh margin {fresh})"
        )

    if value_range <= tol:
        return ConcavityReport(verdict=Verdict.CONSTANT, value_range=value_range)
    return ConcavityReport(verdict=Verdict.CONCAVE_ON_GRID, value_range=value_range)


def check_unimodality(levinger_scan: LevingerScan, tol: float = UNIMODALITY_SLACK) -> bool:
    """
    Checks that r is nondecreasing on [0, 1/2] and nonincreasing on [1/2, 1]
    up to tol. Levinger's theorem guarantees this for nonnegative matrices, so a
    failure points at the solver.
    """
    t, r = levinger_scan.t_grid, levinger_scan.r
    finite = np.isfinite(r)
    rising = r[(t <= 0.5) & finite]
    falling = r[(t >= 0.5) & finite]
    return bool(np.all(np.diff(rising) >= -tol) and np.all(np.diff(falling) <= tol))


def _require_irreducible(matrix: Matrix, what: str) -> None:
    if not is_irreducible(matrix):
        raise ReducibleMatrixError(f"{what} requires an irreducible matrix")


def is_constant_levinger(
    matrix: ArrayLike, tol: float = DEFAULT_PREDICATE_TOL
) -> bool:
    """
    Constant-Levinger criterion: r(t) is constant iff the Perron vector of
    A + A^T lies in the null space of A - A^T.

    Args:
        matrix: Nonnegative irreducible matrix
        tol: Relative residual bound for the null-space test
    Returns:
        Whether the Levinger function is constant
    """
    matrix = require_nonnegative(matrix)
    _require_irreducible(matrix, "The constant-Levinger criterion")
    x = perron_root(matrix + matrix.T).right
    return null_space_contains(matrix - matrix.T, x, tol)


def kqp_structure_check(
    matrix: ArrayLike, tol: float = DEFAULT_PREDICATE_TOL
) -> bool:
    """
    With Q diagonalising the symmetric part S (Perron vector first), the Levinger
    function is constant iff Q^T K Q has a zero first row and column.
    """
    matrix = require_nonnegative(matrix)
    sym, skew = decompose(matrix)
    _require_irreducible(sym, "The K-in-Q-basis criterion")

    q = symmetric_eigen(sym).q
    rotated = q.T @ skew @ q
    border = max(np.max(np.abs(rotated[0, :])), np.max(np.abs(rotated[:, 0])))
    return bool(border <= tol * np.linalg.norm(skew))


def perron_vectors_colinear(
    matrix: ArrayLike, tol: float = DEFAULT_PREDICATE_TOL
) -> bool:
    """
    Whether the left and right Perron vectors coincide, which is equivalent to a
    constant Levinger function.
    """
    matrix = require_nonnegative(matrix)
    _require_irreducible(matrix, "The Perron colinearity criterion")
    pair = perron_root(matrix)
    return bool(np.linalg.norm(pair.right - pair.left) <= tol)


class SkewSingularity(NamedTuple):
    odd_order: bool
    skew_rank_deficient: bool
    smallest_singular_value: float


def skew_singularity_check(matrix: ArrayLike) -> SkewSingularity:
    """
    Reports the parity of n and whether K = (A - A^T)/2 is singular. Odd-order
    skew-symmetric matrices are always singular, and a nonsingular K rules out a
    constant Levinger function.

    The singular values of K are read off the eigenvalues +-sigma of
    [[0, K], [K^T, 0]].
    """
    matrix = as_matrix(matrix)
    skew = decompose(matrix).skew
    n = matrix.shape[0]

    augmented = np.zeros((2 * n, 2 * n))
    augmented[:n, n:] = skew
    augmented[n:, :n] = skew.T
    eigenvalues = symmetric_eigen(augmented).eigenvalues
    smallest = float(np.min(np.abs(eigenvalues)))

    deficient = smallest <= SKEW_SINGULARITY_TOL * float(np.linalg.norm(skew))
    if n % 2 == 1 and not deficient:
        logger.warning(f"Odd-order skew part reported nonsingular (sigma={smallest})")
    return SkewSingularity(
        odd_order=n % 2 == 1,
        skew_rank_deficient=deficient,
        smallest_singular_value=smallest,
    )


@dataclass(frozen=True)
class CrossingCertificate:
    """
    A point t* where the Levinger functions of two blocks cross with different
    slopes s1 and s2, which makes the Levinger function of their direct sum
    nonconcave.
    """

    t_star: float
    r_star: float
    s1: float
    s2: float

    @property
    def delta(self) -> float:
        return abs(self.s1 - self.s2)


def _bisect(
    g: Callable[[float], float], lo: float, hi: float, g_lo: float
) -> float:
    mid = (lo + hi) / 2.0
    for _ in range(200):
        mid = (lo + hi) / 2.0
        g_mid = g(mid)
        if abs(g_mid) <= CROSSING_TOLERANCE or hi - lo <= 4.0 * np.finfo(float).eps:
            break
        if (g_mid < 0.0) == (g_lo < 0.0):
            lo, g_lo = mid, g_mid
        else:
            hi = mid
    return mid


def directsum_crossing(
    first: ArrayLike,
    second: ArrayLike,
    tol: float = DEFAULT_SLOPE_TOL,
    grid_size: int = DEFAULT_GRID_SIZE,
    fd_step: float = DEFAULT_FD_STEP,
) -> Optional[CrossingCertificate]:
    """
    Finds a crossing t* of the two blocks' Levinger functions at which their
    slopes differ by more than tol.

    Args:
        first: Block A_1, nonnegative
        second: Block A_2, nonnegative
        tol: Slope difference a certificate needs
        grid_size: Grid used to bracket sign changes of r_1 - r_2
        fd_step: Step of the slope estimates
    Returns:
        The first certified crossing, or None
    """
    blocks = [require_nonnegative(first), require_nonnegative(second)]
    for number, block in enumerate(blocks, start=1):
        if not is_irreducible(block):
            logger.warning(f"Block {number} is reducible; slopes may be one-sided")

    r1, r2 = (levinger_function(block) for block in blocks)

    def g(t: float) -> float:
        return r1(t) - r2(t)

    t_grid = uniform_grid(grid_size)[1:-1]
    values = np.array([g(t) for t in t_grid])
    if np.max(np.abs(values)) <= CROSSING_TOLERANCE:
        logger.info("Block Levinger functions coincide; no crossing")
        return None

    roots: List[float] = []
    for k in range(len(t_grid)):
        if values[k] == 0.0:
            roots.append(float(t_grid[k]))
        elif k + 1 < len(t_grid) and values[k] * values[k + 1] < 0.0:
            roots.append(_bisect(g, float(t_grid[k]), float(t_grid[k + 1]), values[k]))

    for t_star in roots:
        s1 = _first_difference(r1, t_star, fd_step)
        s2 = _first_difference(r2, t_star, fd_step)
        certificate = CrossingCertificate(t_star=t_star, r_star=r1(t_star), s1=s1, s2=s2)
        if certificate.delta > tol:
            return certificate
        logger.info(f"Crossing at t={t_star} has equal slopes within {tol}")
    return None


def concave_neighbourhood(
    levinger_scan: LevingerScan, tol: float = 1e-6
) -> Optional[Tuple[float, float]]:
    """
    Largest symmetric interval around t = 1/2 on which every sampled d2r is at
    most tol. Only a sampled, empirical extent; None if d2r > tol already at the
    grid point nearest 1/2.
    """
    t, d2r = levinger_scan.t_grid, levinger_scan.d2r
    finite = np.isfinite(d2r)
    distance = np.abs(t[finite] - 0.5)
    order = np.argsort(distance, kind="stable")
    distance, d2r = distance[order], d2r[finite][order]

    if d2r.size == 0 or d2r[0] > tol:
        return None
    bad = np.flatnonzero(d2r > tol)
    if bad.size == 0:
        half_width = float(distance[-1])
    else:
        # Points at the same distance as the first bad one are excluded too
        inside = distance < distance[bad[0]]
        half_width = float(np.max(distance[inside]))
    return 0.5 - half_width, 0.5 + half_width


def weight_limit_experiment(
    base_weights: Sequence[float],
    index: int,
    factor: float,
    steps: int,
    grid_size: int = 201,
    fd_step: float = DEFAULT_FD_STEP,
) -> List[Tuple[float, LevingerScan]]:
    """
    Scans the cyclic weighted shift as weight c_index shrinks by successive
    powers of factor, finishing with the weight set to zero.

    Args:
        base_weights: Cyclic shift weights c_1..c_n
        index: 1-based position of the shrinking weight
        factor: Ratio in (0, 1) between successive scales
        steps: Number of powers after factor^0
        grid_size: Scan grid size
        fd_step: Scan stencil step
    Returns:
        (scale, scan) pairs for scales factor^0..factor^steps and 0
    """
    if not 1 <= index <= len(base_weights):
        raise ValueError(f"Weight index {index} is outside 1..{len(base_weights)}")
    if not 0.0 < factor < 1.0:
        raise ValueError(f"Factor {factor!r} must lie in (0, 1)")
    if steps < 1:
        raise ValueError(f"Need at least one step, got {steps}")

    scales = [factor**k for k in range(steps + 1)] + [0.0]
    results = []
    for scale in scales:
        weights = [float(w) for w in base_weights]
        weights[index - 1] *= scale
        logger.info(f"Weight c_{index} = {weights[index - 1]!r}")
        matrix = cyclic_weighted_shift(weights)
        results.append((scale, scan(matrix, grid_size=grid_size, fd_step=fd_step)))
    return results


def _interpolate(levinger_scan: LevingerScan, values: NDArray, t: float) -> float:
    finite = np.isfinite(values)
    return float(np.interp(t, levinger_scan.t_grid[finite], values[finite]))


def summarize_weight_limit(
    results: Sequence[Tuple[float, LevingerScan]], boundary: float = 0.05
) -> pd.DataFrame:
    """
    Per-scale measures of the non-uniform convergence towards the zero-weight
    limit (the last entry of `results`).

    Returns:
        DataFrame with columns scale, boundary_curvature (max |d2r| over
        t < boundary), midpoint_curvature (d2r at 1/2) and midpoint_gap
        (|d2r(1/2) - limit d2r(1/2)|)
    """
    if not results:
        raise ValueError("No weight-limit results to summarise")
    _, limit = results[-1]
    limit_midpoint = _interpolate(limit, limit.d2r, 0.5)

    rows = []
    for scale, levinger_scan in results:
        near = (levinger_scan.t_grid < boundary) & np.isfinite(levinger_scan.d2r)
        boundary_curvature = (
            float(np.max(np.abs(levinger_scan.d2r[near]))) if np.any(near) else math.nan
        )
        midpoint = _interpolate(levinger_scan, levinger_scan.d2r, 0.5)
        rows.append(
            {
                "scale": scale,
                "boundary_curvature": boundary_curvature,
                "midpoint_curvature": midpoint,
                "midpoint_gap": abs(midpoint - limit_midpoint),
            }
        )
    return pd.DataFrame(rows)
