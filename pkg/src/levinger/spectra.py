from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import List, NamedTuple, Tuple

import numpy as np
from numpy.typing import ArrayLike, NDArray

from levinger.matrix import (
    Matrix,
    as_matrix,
    is_symmetric,
    reachability,
    require_nonnegative,
)

logger = logging.getLogger(__name__)
logger.addHandler(logging.NullHandler())

PERRON_TOLERANCE = 1e-13
MAX_POWER_ITERATIONS = 100_000
# Power iteration applies the shifted matrix in batches of 2**POWER_DOUBLINGS products
POWER_DOUBLINGS = 7
JACOBI_TOLERANCE = 1e-12
MAX_JACOBI_SWEEPS = 100
QR_SWEEPS_PER_ROW = 30


class ConvergenceError(RuntimeError):
    """Raised when an eigen-solver does not converge."""


@dataclass(frozen=True)
class Spectrum:
    """
    Full list of eigenvalues, sorted by descending modulus, then descending real
    part, then descending imaginary part.
    """

    values: NDArray[np.complex128]

    @classmethod
    def from_values(cls, values: ArrayLike) -> Spectrum:
        values = np.asarray(values, dtype=complex).ravel()
        scale = max(1.0, float(np.max(np.abs(values)))) if values.size else 1.0
        # Rounded keys keep ties (e.g. +-0.4) in a fixed order despite rounding noise
        modulus = np.round(np.abs(values) / scale, 12)
        real = np.round(values.real / scale, 12)
        imag = np.round(values.imag / scale, 12)
        order = np.lexsort((-imag, -real, -modulus))
        ordered = values[order]
        ordered.setflags(write=False)
        return cls(values=ordered)

    @property
    def radius(self) -> float:
        return float(np.abs(self.values[0]))

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class PerronPair:
    value: float
    right: NDArray[np.float64]
    left: NDArray[np.float64]
    irreducible: bool
    converged: bool


class OrthogonalFactorization(NamedTuple):
    q: Matrix
    eigenvalues: NDArray[np.float64]


def strongly_connected_components(matrix: ArrayLike) -> List[List[int]]:
    """
    Index sets of the irreducible diagonal blocks of a nonnegative matrix
    (the blocks of its Frobenius normal form).

    Args:
        matrix: Nonnegative square matrix
    Returns:
        Sorted index lists, ordered by their smallest index
    """
    reach = reachability(matrix)
    mutual = reach & reach.T

    components: List[List[int]] = []
    seen = set()
    for i in range(mutual.shape[0]):
        if i in seen:
            continue
        component = [int(j) for j in np.flatnonzero(mutual[i])]
        seen.update(component)
        components.append(component)
    return components


def _power_iteration(
    shifted: Matrix, tol: float, max_iterations: int
) -> Tuple[NDArray[np.float64], bool]:
    n = shifted.shape[0]
    x = np.full(n, 1.0 / math.sqrt(n))

    scale = float(np.max(np.sum(np.abs(shifted), axis=1)))
    if scale == 0.0:
        return x, True

    batch = shifted / scale
    for _ in range(POWER_DOUBLINGS):
        batch = batch @ batch
        batch /= np.max(np.abs(batch))
    batch_length = 2**POWER_DOUBLINGS

    iterations = 0
    while iterations < max_iterations:
        y = batch @ x
        y /= np.linalg.norm(y)
        iterations += batch_length
        if np.max(np.abs(y - x)) < tol:
            return y, True
        x = y
    return x, False


def _irreducible_perron(
    block: Matrix, tol: float, max_iterations: int
) -> Tuple[float, NDArray[np.float64], NDArray[np.float64], bool]:
    n = block.shape[0]
    if n == 1:
        unit = np.ones(1)
        return float(block[0, 0]), unit, unit, True

    # The shift makes an irreducible nonnegative matrix primitive
    shift = float(np.max(np.diag(block))) + 1.0
    shifted = block + shift * np.eye(n)
    right, right_ok = _power_iteration(shifted, tol, max_iterations)
    left, left_ok = _power_iteration(shifted.T, tol, max_iterations)

    if right_ok and left_ok:
        # Two-sided Rayleigh quotient: error is quadratic in the vector errors
        value = float(left @ block @ right) / float(left @ right)
        return value, right, left, True

    logger.warning(
        f"Power iteration did not converge in {max_iterations} iterations "
        f"on a {n}x{n} block; falling back to the QR spectrum."
    )
    return full_spectrum(block).radius, right, left, False


def _reducible_perron_value(
    matrix: Matrix, components: List[List[int]], tol: float, max_iterations: int
) -> Tuple[float, bool]:
    value = 0.0
    converged = True
    for component in components:
        block = matrix[np.ix_(component, component)]
        block_value, _, _, ok = _irreducible_perron(block, tol, max_iterations)
        value = max(value, block_value)
        converged = converged and ok
    return value, converged


def perron_root(
    matrix: ArrayLike,
    tol: float = PERRON_TOLERANCE,
    max_iterations: int = MAX_POWER_ITERATIONS,
) -> PerronPair:
    """
    Perron root and unit left/right Perron vectors of a nonnegative matrix.

    Power iteration runs on A + cI with c = max diagonal + 1. For a reducible
    matrix the value is the largest Perron root of its irreducible diagonal
    blocks, and the vectors come from power iteration on the whole matrix;
    they may have zero entries and may be unconverged.

    Args:
        matrix: Nonnegative square matrix
        tol: Sup-norm change between successive iterates that counts as converged
        max_iterations: Number of matrix applications before the QR fallback
    Returns:
        PerronPair
    """
    matrix = require_nonnegative(matrix)
    components = strongly_connected_components(matrix)

    if len(components) == 1:
        value, right, left, converged = _irreducible_perron(
            matrix, tol, max_iterations
        )
        return PerronPair(
            value=value, right=right, left=left, irreducible=True, converged=converged
        )

    value, converged = _reducible_perron_value(
        matrix, components, tol, max_iterations
    )
    shift = float(np.max(np.diag(matrix))) + 1.0
    shifted = matrix + shift * np.eye(matrix.shape[0])
    right, right_ok = _power_iteration(shifted, tol, max_iterations)
    left, left_ok = _power_iteration(shifted.T, tol, max_iterations)
    if not (right_ok and left_ok):
        logger.info("Perron vectors of a reducible matrix did not converge.")

    return PerronPair(
        value=value,
        right=right,
        left=left,
        irreducible=False,
        converged=converged and right_ok and left_ok,
    )


def householder(x: NDArray[np.float64]) -> Tuple[NDArray[np.float64], float]:
    """
    Householder vector u of a real vector x, so that (I - 2uu^T) x = alpha e_1.

    Returns:
        Unit vector u (zero when x is zero) and alpha = -sign(x_0) ||x||
    """
    alpha = -math.copysign(float(np.linalg.norm(x)), float(x[0]) or 1.0)
    u = np.array(x, dtype=float)
    u[0] -= alpha
    norm_u = float(np.linalg.norm(u))
    if norm_u == 0.0:
        return np.zeros_like(u), alpha
    return u / norm_u, alpha


def hessenberg(matrix: ArrayLike) -> Matrix:
    """
    Householder reduction to upper Hessenberg form (orthogonally similar).
    """
    h = np.array(as_matrix(matrix), dtype=float)
    n = h.shape[0]

    for k in range(n - 2):
        u, alpha = householder(h[k + 1 :, k])
        # Left reflection, then right reflection
        h[k + 1 :, k + 1 :] -= 2.0 * np.outer(u, u @ h[k + 1 :, k + 1 :])
        h[:, k + 1 :] -= 2.0 * np.outer(h[:, k + 1 :] @ u, u)
        # Column k becomes [alpha; zeros]
        h[k + 1, k] = alpha
        h[k + 2 :, k] = 0.0
    return h


def _sign(a: float, b: float) -> float:
    return abs(a) if b >= 0.0 else -abs(a)


def _francis_qr(h: List[List[float]]) -> List[complex]:
    """
    Eigenvalues of an upper Hessenberg matrix by the Francis double-shift QR
    algorithm with deflation (the classic EISPACK hqr scheme). Works in place.
    """
    n = len(h)
    wr = [0.0] * n
    wi = [0.0] * n
    anorm = sum(abs(h[i][j]) for i in range(n) for j in range(max(i - 1, 0), n))
    sweep_limit = QR_SWEEPS_PER_ROW * n
    sweeps = 0

    nn = n - 1
    t = 0.0
    while nn >= 0:
        its = 0
        while True:
            # Look for a negligible subdiagonal element
            for l in range(nn, 0, -1):
                s = abs(h[l - 1][l - 1]) + abs(h[l][l])
                if s == 0.0:
                    s = anorm
                if abs(h[l][l - 1]) + s == s:
                    h[l][l - 1] = 0.0
                    break
            else:
                l = 0

            x = h[nn][nn]
            if l == nn:
                wr[nn] = x + t
                wi[nn] = 0.0
                nn -= 1
            else:
                y = h[nn - 1][nn - 1]
                w = h[nn][nn - 1] * h[nn - 1][nn]
                if l == nn - 1:
                    # Trailing 2x2 block: real pair or complex conjugate pair
                    p = 0.5 * (y - x)
                    q = p * p + w
                    z = math.sqrt(abs(q))
                    x += t
                    if q >= 0.0:
                        z = p + _sign(z, p)
                        wr[nn - 1] = wr[nn] = x + z
                        if z:
                            wr[nn] = x - w / z
                        wi[nn - 1] = wi[nn] = 0.0
                    else:
                        wr[nn - 1] = wr[nn] = x + p
                        wi[nn - 1] = -z
                        wi[nn] = z
                    nn -= 2
                else:
                    if sweeps >= sweep_limit:
                        raise ConvergenceError(
                            f"QR iteration exceeded {sweep_limit} sweeps"
                        )
                    if its > 0 and its % 10 == 0:
                        # Exceptional shift
                        t += x
                        for i in range(nn + 1):
                            h[i][i] -= x
                        s = abs(h[nn][nn - 1]) + abs(h[nn - 1][nn - 2])
                        y = x = 0.75 * s
                        w = -0.4375 * s * s
                    its += 1
                    sweeps += 1

                    for m in range(nn - 2, l - 1, -1):
                        z = h[m][m]
                        r = x - z
                        s = y - z
                        p = (r * s - w) / h[m + 1][m] + h[m][m + 1]
                        q = h[m + 1][m + 1] - z - r - s
                        r = h[m + 2][m + 1]
                        s = abs(p) + abs(q) + abs(r)
                        p /= s
                        q /= s
                        r /= s
                        if m == l:
                            break
                        u = abs(h[m][m - 1]) * (abs(q) + abs(r))
                        v = abs(p) * (
                            abs(h[m - 1][m - 1]) + abs(z) + abs(h[m + 1][m + 1])
                        )
                        if u + v == v:
                            break

                    for i in range(m + 2, nn + 1):
                        h[i][i - 2] = 0.0
                        if i != m + 2:
                            h[i][i - 3] = 0.0

                    # Chase the bulge with 3x3 Householder reflections
                    for k in range(m, nn):
                        if k != m:
                            p = h[k][k - 1]
                            q = h[k + 1][k - 1]
                            r = 0.0
                            if k != nn - 1:
                                r = h[k + 2][k - 1]
                            x = abs(p) + abs(q) + abs(r)
                            if x != 0.0:
                                p /= x
                                q /= x
                                r /= x
                        s = _sign(math.sqrt(p * p + q * q + r * r), p)
                        if s == 0.0:
                            continue
                        if k == m:
                            if l != m:
                                h[k][k - 1] = -h[k][k - 1]
                        else:
                            h[k][k - 1] = -s * x
                        p += s
                        x = p / s
                        y = q / s
                        z = r / s
                        q /= p
                        r /= p
                        for j in range(k, nn + 1):
                            p = h[k][j] + q * h[k + 1][j]
                            if k != nn - 1:
                                p += r * h[k + 2][j]
                                h[k + 2][j] -= p * z
                            h[k + 1][j] -= p * y
                            h[k][j] -= p * x
                        upper = min(nn, k + 3)
                        for i in range(l, upper + 1):
                            p = x * h[i][k] + y * h[i][k + 1]
                            if k != nn - 1:
                                p += z * h[i][k + 2]
                                h[i][k + 2] -= p * r
                            h[i][k + 1] -= p * q
                            h[i][k] -= p

            if l >= nn - 1:
                break

    return [complex(re, im) for re, im in zip(wr, wi)]


def full_spectrum(matrix: ArrayLike) -> Spectrum:
    """
    All eigenvalues of a real square matrix: Householder reduction to Hessenberg
    form followed by shifted QR with deflation.

    Args:
        matrix: Real square matrix
    Returns:
        Spectrum sorted by descending modulus
    """
    h = hessenberg(matrix)
    return Spectrum.from_values(_francis_qr(h.tolist()))


def spectral_radius(matrix: ArrayLike, tol: float = PERRON_TOLERANCE) -> float:
    """
    Spectral radius: the Perron root for nonnegative input, otherwise the largest
    modulus of the full spectrum.
    """
    matrix = as_matrix(matrix)
    if np.any(matrix < 0.0):
        return full_spectrum(matrix).radius

    components = strongly_connected_components(matrix)
    value, _ = _reducible_perron_value(
        matrix, components, tol, MAX_POWER_ITERATIONS
    )
    return value


def symmetric_eigen(
    matrix: ArrayLike, tol: float = JACOBI_TOLERANCE
) -> OrthogonalFactorization:
    """
    Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.

    Args:
        matrix: Symmetric matrix S
        tol: Sweeps stop when the off-diagonal Frobenius norm is below tol * ||S||_F
    Returns:
        Orthogonal Q and eigenvalues in descending order with S = Q diag(eigenvalues) Q^T;
        each column of Q has its first non-negligible entry positive
    """
    matrix = as_matrix(matrix)
    if not is_symmetric(matrix):
        raise ValueError("symmetric_eigen requires a symmetric matrix")

    a = np.array((matrix + matrix.T) / 2.0)
    n = a.shape[0]
    q = np.eye(n)
    norm = float(np.linalg.norm(a))

    for _ in range(MAX_JACOBI_SWEEPS):
        off = math.sqrt(2.0 * float(np.sum(np.triu(a, 1) ** 2)))
        if off <= tol * norm:
            break
        for p in range(n - 1):
            for r in range(p + 1, n):
                apr = float(a[p, r])
                if apr == 0.0:
                    continue
                theta = (float(a[r, r]) - float(a[p, p])) / (2.0 * apr)
                t = 1.0 / (abs(theta) + math.sqrt(theta * theta + 1.0))
                if theta < 0.0:
                    t = -t
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c

                col_p, col_r = a[:, p].copy(), a[:, r].copy()
                a[:, p] = c * col_p - s * col_r
                a[:, r] = s * col_p + c * col_r
                row_p, row_r = a[p, :].copy(), a[r, :].copy()
                a[p, :] = c * row_p - s * row_r
                a[r, :] = s * row_p + c * row_r
                a[p, r] = a[r, p] = 0.0

                vec_p, vec_r = q[:, p].copy(), q[:, r].copy()
                q[:, p] = c * vec_p - s * vec_r
                q[:, r] = s * vec_p + c * vec_r
    else:
        raise ConvergenceError(
            f"Jacobi rotations did not converge in {MAX_JACOBI_SWEEPS} sweeps"
        )

    eigenvalues = np.diag(a).copy()
    order = np.argsort(-eigenvalues, kind="stable")
    eigenvalues = eigenvalues[order]
    q = q[:, order]

    for column in range(n):
        significant = np.flatnonzero(np.abs(q[:, column]) > 1e-12)
        if significant.size and q[significant[0], column] < 0.0:
            q[:, column] = -q[:, column]

    q.setflags(write=False)
    eigenvalues.setflags(write=False)
    return OrthogonalFactorization(q=q, eigenvalues=eigenvalues)


def null_space_contains(
    matrix: ArrayLike, vector: ArrayLike, tol: float = 1e-8
) -> bool:
    """
    Checks ||Kx|| <= tol * ||K||_F * ||x||.
    """
    matrix = as_matrix(matrix)
    vector = np.asarray(vector, dtype=float)
    if vector.shape != (matrix.shape[0],):
        raise ValueError(
            f"Vector of shape {vector.shape} does not match a {matrix.shape[0]}x"
            f"{matrix.shape[0]} matrix"
        )
    norm_x = float(np.linalg.norm(vector))
    if norm_x == 0.0:
        raise ValueError("null_space_contains requires a nonzero vector")

    residual = float(np.linalg.norm(matrix @ vector))
    return residual <= tol * float(np.linalg.norm(matrix)) * norm_x


def spectrum_distance(first: ArrayLike, second: ArrayLike) -> float:
    """
    Largest distance between two eigenvalue multisets under greedy nearest
    matching; inf when their sizes differ.
    """
    remaining = list(np.asarray(second, dtype=complex).ravel())
    values = np.asarray(first, dtype=complex).ravel()
    if len(values) != len(remaining):
        return math.inf

    worst = 0.0
    for value in values:
        gaps = [abs(value - other) for other in remaining]
        nearest = int(np.argmin(gaps))
        worst = max(worst, float(gaps[nearest]))
        remaining.pop(nearest)
    return worst
