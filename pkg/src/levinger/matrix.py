from __future__ import annotations

import logging
import math
from pathlib import Path
from typing import NamedTuple, Union

import numpy as np
from numpy.typing import ArrayLike, NDArray

logger = logging.getLogger(__name__)
logger.addHandler(logging.NullHandler())

Matrix = NDArray[np.float64]

MAX_DIMENSION = 256
STRUCTURE_TOLERANCE = 1e-12


class MatrixFormatError(ValueError):
    """Raised when a plain-text matrix cannot be parsed."""


class Decomposition(NamedTuple):
    sym: Matrix
    skew: Matrix


def _frozen(array: NDArray) -> Matrix:
    array.setflags(write=False)
    return array


def as_matrix(values: ArrayLike) -> Matrix:
    """
    Validates and copies a square real matrix.

    Args:
        values: Anything numpy can turn into a 2-D float array

    Returns:
        Read-only float64 copy of the input
    """
    try:
        matrix = np.array(values, dtype=float)
    except (TypeError, ValueError) as e:
        raise ValueError(f"Entries are not real numbers: {e}") from e

    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise ValueError(f"Expected a square matrix, got shape {matrix.shape}")
    if matrix.shape[0] == 0:
        raise ValueError("Matrix dimension must be positive")
    if matrix.shape[0] > MAX_DIMENSION:
        raise ValueError(
            f"Matrix dimension {matrix.shape[0]} exceeds the limit of {MAX_DIMENSION}"
        )
    if not np.all(np.isfinite(matrix)):
        raise ValueError("Matrix entries must be finite")

    return _frozen(matrix)


def is_nonnegative(matrix: ArrayLike) -> bool:
    return bool(np.all(as_matrix(matrix) >= 0.0))


def require_nonnegative(matrix: ArrayLike) -> Matrix:
    matrix = as_matrix(matrix)
    if np.any(matrix < 0.0):
        raise ValueError(f"Matrix has negative entries (min {matrix.min()!r})")
    return matrix


def scale_of(matrix: Matrix) -> float:
    return float(np.max(np.abs(matrix)))


def is_symmetric(matrix: ArrayLike, tol: float = STRUCTURE_TOLERANCE) -> bool:
    """
    Checks symmetry with an absolute tolerance scaled by the largest entry.
    """
    matrix = as_matrix(matrix)
    return bool(np.all(np.abs(matrix - matrix.T) <= tol * scale_of(matrix)))


def is_skew_symmetric(matrix: ArrayLike, tol: float = STRUCTURE_TOLERANCE) -> bool:
    matrix = as_matrix(matrix)
    return bool(np.all(np.abs(matrix + matrix.T) <= tol * scale_of(matrix)))


def levinger_homotopy(matrix: ArrayLike, t: float) -> Matrix:
    """
    Levinger's homotopy between a matrix and its transpose.

    Args:
        matrix: Square matrix A
        t: Homotopy parameter in [0, 1]

    Returns:
        (1 - t) A + t A^T
    """
    matrix = as_matrix(matrix)
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"Homotopy parameter t={t!r} is outside [0, 1]")
    if t == 0.0:
        return matrix
    if t == 1.0:
        return _frozen(matrix.T.copy())
    return _frozen((1.0 - t) * matrix + t * matrix.T)


def decompose(matrix: ArrayLike) -> Decomposition:
    """
    Splits a matrix into its symmetric part (A + A^T)/2 and skew part (A - A^T)/2.
    """
    matrix = as_matrix(matrix)
    sym = (matrix + matrix.T) / 2.0
    skew = (matrix - matrix.T) / 2.0
    return Decomposition(sym=_frozen(sym), skew=_frozen(skew))


def centered_homotopy(matrix: ArrayLike, p: float) -> Matrix:
    """
    Levinger's homotopy centred at the symmetric part: C(p) = S + pK.

    C(1) = A and C(-1) = A^T, so C(p) equals levinger_homotopy(A, (1 - p) / 2).
    Since B(t) and B(1 - t) are transposes of each other, the spectral radius of
    C(p) also equals r((p + 1) / 2).
    """
    sym, skew = decompose(matrix)
    return _frozen(sym + p * skew)


def nonneg_extension_bound(matrix: ArrayLike) -> float:
    """
    Largest alpha such that C(p) stays nonnegative for every |p| <= alpha.

    Args:
        matrix: Nonnegative square matrix

    Returns:
        min over asymmetric pairs of (A_ij + A_ji) / |A_ji - A_ij|, or math.inf
        when the matrix is symmetric
    """
    matrix = require_nonnegative(matrix)
    gap = np.abs(matrix.T - matrix)
    asymmetric = gap > STRUCTURE_TOLERANCE * scale_of(matrix)
    if not np.any(asymmetric):
        return math.inf

    ratios = (matrix + matrix.T)[asymmetric] / gap[asymmetric]
    return float(np.min(ratios))


def direct_sum(first: ArrayLike, second: ArrayLike) -> Matrix:
    first = as_matrix(first)
    second = as_matrix(second)
    n1, n2 = first.shape[0], second.shape[0]

    result = np.zeros((n1 + n2, n1 + n2))
    result[:n1, :n1] = first
    result[n1:, n1:] = second
    return as_matrix(result)


def reachability(matrix: ArrayLike) -> NDArray[np.bool_]:
    """
    Reflexive-transitive closure of the digraph with an edge i -> j when A_ij > 0.
    """
    matrix = as_matrix(matrix)
    n = matrix.shape[0]
    reach = (matrix > 0.0) | np.eye(n, dtype=bool)

    # Each squaring doubles the path length covered
    for _ in range(max(1, math.ceil(math.log2(n)))):
        step = reach.astype(np.int64) @ reach.astype(np.int64)
        widened = step > 0
        if np.array_equal(widened, reach):
            break
        reach = widened
    return reach


def is_irreducible(matrix: ArrayLike) -> bool:
    """
    Checks whether the positivity digraph of a nonnegative matrix is strongly connected.
    """
    matrix = require_nonnegative(matrix)
    return bool(np.all(reachability(matrix)))


def perturb_positive(matrix: ArrayLike, eps: float) -> Matrix:
    """
    Adds eps to every entry, making the matrix positive and hence irreducible.
    """
    if not eps > 0.0:
        raise ValueError(f"Perturbation eps={eps!r} must be positive")
    matrix = as_matrix(matrix)
    return as_matrix(matrix + eps)


def parse_matrix(text: str) -> Matrix:
    """
    Parses the plain-text matrix format: the dimension n on the first line, then
    n rows of n whitespace-separated decimal numbers.

    Args:
        text: Matrix text
    Returns:
        The parsed matrix
    """
    lines = [line.strip() for line in text.splitlines() if line.strip()]
    if not lines:
        raise MatrixFormatError("Empty matrix text")

    try:
        n = int(lines[0])
    except ValueError:
        raise MatrixFormatError(f"First line must be the dimension, got {lines[0]!r}")
    if n < 1:
        raise MatrixFormatError(f"Dimension must be positive, got {n}")
    if len(lines) - 1 != n:
        raise MatrixFormatError(f"Expected {n} rows, found {len(lines) - 1}")

    rows = []
    for number, line in enumerate(lines[1:], start=1):
        fields = line.split()
        if len(fields) != n:
            raise MatrixFormatError(
                f"Row {number} has {len(fields)} entries, expected {n}"
            )
        try:
            rows.append([float(field) for field in fields])
        except ValueError as e:
            raise MatrixFormatError(f"Row {number}: {e}")

    try:
        return as_matrix(rows)
    except ValueError as e:
        raise MatrixFormatError(str(e))


def read_matrix(path: Union[str, Path]) -> Matrix:
    return parse_matrix(Path(path).read_text())


def format_matrix(matrix: ArrayLike) -> str:
    """
    Renders a matrix in the plain-text format with 17 significant digits.
    """
    matrix = as_matrix(matrix)
    rows = [" ".join(f"{value:.17g}" for value in row) for row in matrix]
    return "\n".join([str(matrix.shape[0]), *rows]) + "\n"
