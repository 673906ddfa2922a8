from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum, auto, unique
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from numpy.typing import NDArray

from levinger.matrix import Matrix, as_matrix, direct_sum, levinger_homotopy
from levinger.spectra import Spectrum, spectral_radius

logger = logging.getLogger(__name__)
logger.addHandler(logging.NullHandler())

Scalar = Union[float, NDArray[np.float64]]
Curve = Callable[[Scalar], Scalar]

EX1 = ((0.0, 1.0, 0.0), (0.0, 0.0, 0.0), (0.0, 0.0, 0.4))
TOEPLITZ_CONVEX = (
    (5.0, 0.0, 6.0, 0.0),
    (1.0, 5.0, 0.0, 6.0),
    (0.0, 1.0, 5.0, 0.0),
    (8.0, 0.0, 1.0, 5.0),
)
# Levinger homotopies of [[0, 1], [0, 0]] at t = 511/512 and t = 1/8
FOUR_BY_FOUR_BLOCKS = (
    ((0.0, 511.0 / 512.0), (1.0 / 512.0, 0.0)),
    ((0.0, 1.0 / 8.0), (7.0 / 8.0, 0.0)),
)


@unique
class FamilyKind(Enum):
    TWO_BY_TWO = auto()
    TRIDIAG_TOEPLITZ = auto()
    FIEDLER_TOEPLITZ = auto()
    FIEDLER_CIRCULANT = auto()
    WEIGHTED_SHIFT = auto()
    CYCLIC_WEIGHTED_SHIFT = auto()
    REVERSIBLE_CYCLIC_SHIFT = auto()
    CIRCUIT = auto()
    TOEPLITZ_CONVEX = auto()
    EX1 = auto()
    FOUR_BY_FOUR = auto()
    DIRECT_SUM = auto()

    @classmethod
    def from_name(cls, name: str) -> FamilyKind:
        """
        Looks up a kind from its command-line spelling, e.g. 'tridiag-toeplitz'.
        """
        key = name.strip().upper().replace("-", "_")
        try:
            return cls[key]
        except KeyError:
            raise TypeError(
                f"Unknown family kind {name!r}; expected one of {family_names()}"
            )

    @property
    def label(self) -> str:
        return self.name.lower().replace("_", "-")


def family_names() -> List[str]:
    return [kind.label for kind in FamilyKind]


_REQUIRED: Dict[FamilyKind, Tuple[str, ...]] = {
    FamilyKind.TWO_BY_TWO: ("a", "b", "c", "d"),
    FamilyKind.TRIDIAG_TOEPLITZ: ("n", "a", "b", "c"),
    FamilyKind.FIEDLER_TOEPLITZ: ("n", "u", "v", "w"),
    FamilyKind.FIEDLER_CIRCULANT: ("n", "u", "v", "w"),
    FamilyKind.WEIGHTED_SHIFT: (),
    FamilyKind.CYCLIC_WEIGHTED_SHIFT: (),
    FamilyKind.REVERSIBLE_CYCLIC_SHIFT: ("n", "base"),
    FamilyKind.CIRCUIT: ("n",),
    FamilyKind.TOEPLITZ_CONVEX: (),
    FamilyKind.EX1: (),
    FamilyKind.FOUR_BY_FOUR: ("h",),
    FamilyKind.DIRECT_SUM: (),
}


@dataclass(frozen=True)
class FamilySpec:
    """
    A member of one of the matrix families.

    Scalar parameters live in `parameters` (a, b, c, d, n, u, v, w, h, base);
    weight lists, the 1-based circuit index cycle and the two blocks of a direct
    sum have their own fields.
    """

    kind: FamilyKind
    parameters: Mapping[str, float] = field(default_factory=dict)
    weights: Tuple[float, ...] = ()
    cycle: Tuple[int, ...] = ()
    parts: Tuple[FamilySpec, ...] = ()

    def value(self, key: str) -> float:
        try:
            return float(self.parameters[key])
        except KeyError:
            raise ValueError(f"Family {self.kind.label} requires parameter {key!r}")

    def integer(self, key: str) -> int:
        value = self.value(key)
        if value != int(value):
            raise ValueError(f"Parameter {key}={value!r} must be an integer")
        return int(value)

    def describe(self) -> str:
        fields = [f"{key}={self.parameters[key]:g}" for key in sorted(self.parameters)]
        if self.weights:
            fields.append("weights=" + ",".join(f"{w:g}" for w in self.weights))
        if self.cycle:
            fields.append("cycle=" + ",".join(str(i) for i in self.cycle))
        if self.parts:
            fields.append(" (+) ".join(f"[{part.describe()}]" for part in self.parts))
        return f"{self.kind.label}({', '.join(fields)})"


def _check_nonnegative(name: str, values: Sequence[float]) -> None:
    for value in values:
        if not math.isfinite(value) or value < 0.0:
            raise ValueError(f"{name} must be finite and nonnegative, got {value!r}")


def _check_positive(name: str, values: Sequence[float]) -> None:
    for value in values:
        if not math.isfinite(value) or value <= 0.0:
            raise ValueError(f"{name} must be finite and positive, got {value!r}")


def tridiagonal_toeplitz(n: int, a: float, b: float, c: float) -> Matrix:
    """
    Tridiagonal Toeplitz matrix with subdiagonal a, diagonal b and superdiagonal c.
    """
    if n < 2:
        raise ValueError(f"Tridiagonal Toeplitz matrices need n >= 2, got {n}")
    _check_nonnegative("Tridiagonal Toeplitz entries", (a, b, c))
    if max(a, c) <= 0.0:
        raise ValueError("Tridiagonal Toeplitz matrices need max(a, c) > 0")

    matrix = b * np.eye(n) + a * np.eye(n, k=-1) + c * np.eye(n, k=1)
    return as_matrix(matrix)


def fiedler_toeplitz(n: int, u: float, v: float, w: float) -> Matrix:
    """
    Fiedler's 3-parameter Toeplitz matrix: w on the diagonal, u on the
    superdiagonal and in the top-right corner, v on the subdiagonal and in the
    bottom-left corner.
    """
    if n < 3:
        raise ValueError(f"Fiedler matrices need n >= 3, got {n}")
    _check_positive("Fiedler parameters", (u, v, w))

    matrix = w * np.eye(n) + u * np.eye(n, k=1) + v * np.eye(n, k=-1)
    matrix[0, n - 1] = u
    matrix[n - 1, 0] = v
    return as_matrix(matrix)


def circulant_from_fiedler(n: int, u: float, v: float, w: float) -> Matrix:
    """
    Fiedler's matrix with the corner entries (1, n) and (n, 1) exchanged, which
    makes it the circulant with first row (w, u, 0, ..., 0, v).
    """
    matrix = np.array(fiedler_toeplitz(n, u, v, w))
    matrix[0, n - 1], matrix[n - 1, 0] = matrix[n - 1, 0], matrix[0, n - 1]
    return as_matrix(matrix)


def weighted_shift(weights: Sequence[float]) -> Matrix:
    """
    Non-cyclic weighted (down)shift: A[i, i+1] = c_i, i = 1..n-1.
    """
    if len(weights) < 1:
        raise ValueError("A weighted shift needs at least one weight")
    _check_nonnegative("Shift weights", weights)
    return as_matrix(np.diag(np.asarray(weights, dtype=float), k=1))


def cyclic_weighted_shift(weights: Sequence[float]) -> Matrix:
    """
    Cyclic weighted downshift: A[i, j] = c_i for j = i mod n + 1.
    """
    n = len(weights)
    if n < 2:
        raise ValueError("A cyclic weighted shift needs at least two weights")
    _check_nonnegative("Shift weights", weights)

    matrix = np.zeros((n, n))
    for i, weight in enumerate(weights):
        matrix[i, (i + 1) % n] = weight
    return as_matrix(matrix)


def upshift(weights: Sequence[float], cyclic: bool = True) -> Matrix:
    """
    Upshift convention (i = j mod n + 1): the transpose of the downshift.
    """
    shift = cyclic_weighted_shift(weights) if cyclic else weighted_shift(weights)
    return as_matrix(shift.T)


def hollow_tridiagonal(weights: Sequence[float], lower: Sequence[bool]) -> Matrix:
    """
    Weighted shift with some superdiagonal weights moved to the transposed
    subdiagonal position.

    Args:
        weights: Shift weights c_1..c_{n-1}
        lower: For each weight, whether it sits at A[i+1, i] instead of A[i, i+1]
    Returns:
        Hollow tridiagonal matrix with A[i, i+1] * A[i+1, i] = 0
    """
    if len(lower) != len(weights):
        raise ValueError(
            f"Got {len(lower)} placement flags for {len(weights)} weights"
        )
    matrix = np.array(weighted_shift(weights))
    for i, (weight, swap) in enumerate(zip(weights, lower)):
        if swap:
            matrix[i, i + 1] = 0.0
            matrix[i + 1, i] = weight
    return as_matrix(matrix)


def scaled_hollow_tridiagonal(
    upper: Sequence[float],
    alpha: float,
    beta: float,
    lower: Optional[Sequence[float]] = None,
) -> Matrix:
    """
    The hollow tridiagonal matrix A(alpha, beta) with alpha * c_{i,i+1} above the
    diagonal and beta * c_{i+1,i} below it. `lower` defaults to `upper`.
    """
    lower = upper if lower is None else lower
    if len(upper) < 1 or len(lower) != len(upper):
        raise ValueError("Need matching, nonempty upper and lower weight lists")

    matrix = alpha * np.diag(np.asarray(upper, dtype=float), k=1) + beta * np.diag(
        np.asarray(lower, dtype=float), k=-1
    )
    return as_matrix(matrix)


def circuit_matrix(n: int, cycle: Sequence[int], weights: Sequence[float]) -> Matrix:
    """
    Weighted circuit matrix: zero except c_j at positions (i_j, i_{j+1}) and
    (i_k, i_1), with 1-based distinct indices.
    """
    if len(cycle) < 1 or len(cycle) > n:
        raise ValueError(f"A circuit on {n} indices needs 1..{n} cycle entries")
    if len(weights) != len(cycle):
        raise ValueError(f"Got {len(weights)} weights for a {len(cycle)}-cycle")
    if len(set(cycle)) != len(cycle):
        raise ValueError(f"Circuit indices must be distinct, got {tuple(cycle)}")
    if any(i < 1 or i > n for i in cycle):
        raise ValueError(f"Circuit indices must lie in 1..{n}, got {tuple(cycle)}")
    _check_nonnegative("Circuit weights", weights)

    matrix = np.zeros((n, n))
    k = len(cycle)
    for j in range(k):
        matrix[cycle[j] - 1, cycle[(j + 1) % k] - 1] = weights[j]
    return as_matrix(matrix)


def _canonical_rotation(
    cycle: Sequence[int], weights: Sequence[float]
) -> Tuple[List[int], List[float]]:
    start = int(np.argmin(cycle))
    return (
        list(cycle[start:]) + list(cycle[:start]),
        list(weights[start:]) + list(weights[:start]),
    )


def circuit_to_cyclic_shift(
    n: int, cycle: Sequence[int], weights: Sequence[float]
) -> Matrix:
    """
    Reduces a weighted circuit matrix to the cyclic weighted shift on its nonzero
    principal submatrix. The canonical permutation walks the cycle from its
    smallest index, so the shift weights are the circuit weights rotated to
    match.
    """
    circuit_matrix(n, cycle, weights)
    _, rotated = _canonical_rotation(cycle, weights)
    if len(rotated) == 1:
        return as_matrix([[rotated[0]]])
    return cyclic_weighted_shift(rotated)


def zero_circuit_weights(
    weights: Sequence[float], positions: Sequence[int]
) -> Tuple[float, ...]:
    """
    Sets the weights at the given 1-based positions to zero; at least one weight
    must stay positive.
    """
    zero_at = set(positions)
    if any(p < 1 or p > len(weights) for p in zero_at):
        raise ValueError(f"Weight positions must lie in 1..{len(weights)}")
    zeroed = [0.0 if j + 1 in zero_at else float(w) for j, w in enumerate(weights)]
    if not any(w > 0.0 for w in zeroed):
        raise ValueError("At least one circuit weight must remain positive")
    return tuple(zeroed)


def circuit_to_weighted_shift(
    cycle: Sequence[int], weights: Sequence[float]
) -> Matrix:
    """
    A circuit with a zero weight is a path: permuted into path order it is a
    non-cyclic weighted shift on the cycle's indices.
    """
    if len(weights) != len(cycle) or len(cycle) < 2:
        raise ValueError("Need at least two cycle indices with one weight each")
    zeros = [j for j, w in enumerate(weights) if w == 0.0]
    if not zeros:
        raise ValueError("A circuit without zero weights does not reduce to a shift")

    # The path starts right after the first broken edge
    start = zeros[0] + 1
    path_weights = list(weights[start:]) + list(weights[: zeros[0]])
    return weighted_shift(path_weights)


def reversible_cyclic_weights(n: int, base: float) -> List[float]:
    """
    Two-pivot reversible weights c_j = base + sin(2 pi j / n), j = 1..n.
    """
    if n < 2:
        raise ValueError(f"Reversible weights need n >= 2, got {n}")
    if not base > 1.0:
        raise ValueError(f"Base {base!r} must exceed 1 to keep the weights positive")
    return [base + math.sin(2.0 * math.pi * j / n) for j in range(1, n + 1)]


def four_by_four_blocks(h: float) -> Tuple[Matrix, Matrix]:
    """
    The blocks (1 - h) A_1 and h A_2 of the two-parameter 4x4 example.
    """
    if not 0.0 <= h <= 1.0:
        raise ValueError(f"Block weight h={h!r} is outside [0, 1]")
    first, second = (np.array(block) for block in FOUR_BY_FOUR_BLOCKS)
    return as_matrix((1.0 - h) * first), as_matrix(h * second)


def build(spec: FamilySpec) -> Matrix:
    """
    Builds the matrix of a family member.

    Args:
        spec: Family kind and parameters
    Returns:
        The matrix
    """
    for key in _REQUIRED[spec.kind]:
        spec.value(key)

    if spec.kind == FamilyKind.TWO_BY_TWO:
        a, b, c, d = (spec.value(key) for key in ("a", "b", "c", "d"))
        _check_nonnegative("2x2 entries", (a, b, c, d))
        return as_matrix([[a, b], [c, d]])
    elif spec.kind == FamilyKind.TRIDIAG_TOEPLITZ:
        return tridiagonal_toeplitz(
            spec.integer("n"), spec.value("a"), spec.value("b"), spec.value("c")
        )
    elif spec.kind == FamilyKind.FIEDLER_TOEPLITZ:
        return fiedler_toeplitz(
            spec.integer("n"), spec.value("u"), spec.value("v"), spec.value("w")
        )
    elif spec.kind == FamilyKind.FIEDLER_CIRCULANT:
        return circulant_from_fiedler(
            spec.integer("n"), spec.value("u"), spec.value("v"), spec.value("w")
        )
    elif spec.kind == FamilyKind.WEIGHTED_SHIFT:
        return weighted_shift(spec.weights)
    elif spec.kind == FamilyKind.CYCLIC_WEIGHTED_SHIFT:
        return cyclic_weighted_shift(spec.weights)
    elif spec.kind == FamilyKind.REVERSIBLE_CYCLIC_SHIFT:
        return cyclic_weighted_shift(
            reversible_cyclic_weights(spec.integer("n"), spec.value("base"))
        )
    elif spec.kind == FamilyKind.CIRCUIT:
        return circuit_matrix(spec.integer("n"), spec.cycle, spec.weights)
    elif spec.kind == FamilyKind.TOEPLITZ_CONVEX:
        return as_matrix(TOEPLITZ_CONVEX)
    elif spec.kind == FamilyKind.EX1:
        return as_matrix(EX1)
    elif spec.kind == FamilyKind.FOUR_BY_FOUR:
        return direct_sum(*four_by_four_blocks(spec.value("h")))
    elif spec.kind == FamilyKind.DIRECT_SUM:
        if len(spec.parts) != 2:
            raise ValueError(f"A direct sum needs two parts, got {len(spec.parts)}")
        return direct_sum(build(spec.parts[0]), build(spec.parts[1]))
    else:
        raise TypeError(f"Unsupported family kind {spec.kind}")


def _parse_list(key: str, text: str) -> List[str]:
    items = [item.strip() for item in text.split(",") if item.strip()]
    if not items:
        raise ValueError(f"Empty list for {key!r}")
    return items


def _spec_from_fields(fields: Dict[str, str]) -> FamilySpec:
    if "kind" not in fields:
        raise ValueError("Family block has no 'kind' line")
    kind = FamilyKind.from_name(fields["kind"])

    parameters: Dict[str, float] = {}
    weights: Tuple[float, ...] = ()
    cycle: Tuple[int, ...] = ()
    nested: Dict[str, Dict[str, str]] = {"left": {}, "right": {}}

    for key, text in fields.items():
        side, _, rest = key.partition(".")
        if rest and side in nested:
            nested[side][rest] = text
        elif key == "kind":
            continue
        elif key == "weights":
            weights = tuple(float(item) for item in _parse_list(key, text))
        elif key == "cycle":
            cycle = tuple(int(item) for item in _parse_list(key, text))
        else:
            parameters[key] = float(text)

    parts: Tuple[FamilySpec, ...] = ()
    if kind == FamilyKind.DIRECT_SUM:
        parts = (_spec_from_fields(nested["left"]), _spec_from_fields(nested["right"]))

    return FamilySpec(
        kind=kind, parameters=parameters, weights=weights, cycle=cycle, parts=parts
    )


def parse_family_block(text: str) -> FamilySpec:
    """
    Parses a key-value family block. Lines are 'key = value', '#' starts a
    comment, lists are comma-separated and direct-sum blocks are given with
    'left.' and 'right.' key prefixes, e.g.

        kind = direct-sum
        left.kind = ex1
        right.kind = two-by-two
        right.a = 1
        ...

    Args:
        text: Block text
    Returns:
        FamilySpec
    """
    fields: Dict[str, str] = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep or not key.strip() or not value.strip():
            raise ValueError(f"Line {number}: expected 'key = value', got {raw!r}")
        key = key.strip().lower()
        if key in fields:
            raise ValueError(f"Line {number}: duplicate key {key!r}")
        fields[key] = value.strip()

    try:
        return _spec_from_fields(fields)
    except ValueError as e:
        raise ValueError(f"Invalid family block: {e}") from e


@dataclass(frozen=True)
class ClosedFormCurve:
    """
    Closed-form Levinger function with its first and second derivatives, valid on
    the open interval (0, 1). The callables accept floats or numpy arrays.
    """

    r: Curve
    dr: Curve
    d2r: Curve


def closed_levinger_2x2(a: float, b: float, c: float, d: float) -> ClosedFormCurve:
    """
    Levinger function of [[a, b], [c, d]] from the quadratic formula.

    Args:
        a, b, c, d: Positive entries
    Returns:
        r(t) = (a + d + sqrt(D)) / 2 with D = (a-d)^2 + 4t(1-t)(b-c)^2 + 4bc
    """
    _check_positive("2x2 entries", (a, b, c, d))
    gap = (b - c) ** 2

    def discriminant(t: Scalar) -> Scalar:
        return (a - d) ** 2 + 4.0 * t * (1.0 - t) * gap + 4.0 * b * c

    def r(t: Scalar) -> Scalar:
        return (a + d + np.sqrt(discriminant(t))) / 2.0

    def dr(t: Scalar) -> Scalar:
        return (1.0 - 2.0 * t) * gap / np.sqrt(discriminant(t))

    def d2r(t: Scalar) -> Scalar:
        return (
            -2.0 * gap * ((a - d) ** 2 + (b + c) ** 2) / discriminant(t) ** 1.5
        )

    return ClosedFormCurve(r=r, dr=dr, d2r=d2r)


def tridiag_closed_forms(
    n: int, a: float, b: float, c: float
) -> List[ClosedFormCurve]:
    """
    Eigenvalue curves of the Levinger homotopy of a tridiagonal Toeplitz matrix,

        lambda_k(t) = b + 2 sqrt(P Q) cos(k pi / (n + 1)),

    with P = (1-t)a + tc and Q = ta + (1-t)c. Element k-1 of the result is
    lambda_k, so the first curve is the Levinger function.
    """
    if n < 2:
        raise ValueError(f"Tridiagonal Toeplitz matrices need n >= 2, got {n}")
    _check_nonnegative("Tridiagonal Toeplitz entries", (a, b, c))
    if max(a, c) <= 0.0:
        raise ValueError("Tridiagonal Toeplitz closed forms need max(a, c) > 0")

    def product(t: Scalar) -> Scalar:
        return ((1.0 - t) * a + t * c) * (t * a + (1.0 - t) * c)

    def curve(k: int) -> ClosedFormCurve:
        cosine = math.cos(k * math.pi / (n + 1))

        def r(t: Scalar) -> Scalar:
            return b + 2.0 * np.sqrt(product(t)) * cosine

        def dr(t: Scalar) -> Scalar:
            return cosine * (a - c) ** 2 * (1.0 - 2.0 * t) / np.sqrt(product(t))

        def d2r(t: Scalar) -> Scalar:
            return -cosine * (a * a - c * c) ** 2 / (2.0 * product(t) ** 1.5)

        return ClosedFormCurve(r=r, dr=dr, d2r=d2r)

    return [curve(k) for k in range(1, n + 1)]


def fiedler_eigs(n: int, u: float, v: float, w: float) -> Spectrum:
    """
    Eigenvalues of Fiedler's matrix,
    lambda_{j+1} = w + omega^j u^(1-1/n) v^(1/n) + omega^(n-j) u^(1/n) v^(1-1/n).
    """
    if n < 3:
        raise ValueError(f"Fiedler matrices need n >= 3, got {n}")
    _check_positive("Fiedler parameters", (u, v, w))

    omega = np.exp(2j * np.pi * np.arange(n) / n)
    first = u ** (1.0 - 1.0 / n) * v ** (1.0 / n)
    second = u ** (1.0 / n) * v ** (1.0 - 1.0 / n)
    values = w + omega * first + np.conj(omega) * second

    # Clean rounding noise from omega^j on the real eigenvalues
    noise = 1e-14 * max(1.0, float(np.max(np.abs(values))))
    values.imag[np.abs(values.imag) < noise] = 0.0
    return Spectrum.from_values(values)


def fiedler_levinger(n: int, u: float, v: float, w: float) -> ClosedFormCurve:
    """
    Levinger function of Fiedler's matrix. With p = (1-t)u + tv and
    q = (1-t)v + tu,

        r(t) = w + p^(1-1/n) q^(1/n) + p^(1/n) q^(1-1/n)
        r''(t) = -(n-1)/n^2 (u-v)^2 (u+v)^2 / (p^2 q^2) (r(t) - w)

    which is nonpositive and vanishes identically iff u = v.
    """
    if n < 3:
        raise ValueError(f"Fiedler matrices need n >= 3, got {n}")
    _check_positive("Fiedler parameters", (u, v, w))
    hi, lo = 1.0 - 1.0 / n, 1.0 / n

    def terms(t: Scalar) -> Tuple[Scalar, Scalar, Scalar, Scalar]:
        p = (1.0 - t) * u + t * v
        q = (1.0 - t) * v + t * u
        return p, q, p**hi * q**lo, p**lo * q**hi

    def r(t: Scalar) -> Scalar:
        _, _, first, second = terms(t)
        return w + first + second

    def dr(t: Scalar) -> Scalar:
        p, q, first, second = terms(t)
        return (v - u) * (first * (hi / p - lo / q) + second * (lo / p - hi / q))

    def d2r(t: Scalar) -> Scalar:
        p, q, first, second = terms(t)
        scale = (n - 1) / n**2 * (u - v) ** 2 * (u + v) ** 2
        return -scale / (p * p * q * q) * (first + second)

    return ClosedFormCurve(r=r, dr=dr, d2r=d2r)


def jacobi_charpoly(
    upper: Sequence[float],
    alpha: float,
    beta: float,
    lower: Optional[Sequence[float]] = None,
) -> NDArray[np.float64]:
    """
    Characteristic polynomial of the hollow tridiagonal matrix A(alpha, beta)
    from the three-term recurrence

        p_k = lambda p_{k-1} - alpha beta c_{k,k-1} c_{k-1,k} p_{k-2},

    with p_1 = lambda and p_0 = 1. The coefficient of lambda^j in p_n is
    (alpha beta)^((n-j)/2) times a function of the weights only.

    Args:
        upper: Superdiagonal weights c_12, c_23, ..., c_{n-1,n}
        alpha: Superdiagonal scale
        beta: Subdiagonal scale
        lower: Subdiagonal weights c_21, c_32, ...; defaults to `upper`
    Returns:
        Coefficients, highest degree first (numpy.roots order)
    """
    lower = upper if lower is None else lower
    if len(upper) < 1:
        raise ValueError("jacobi_charpoly needs at least one weight")
    if len(lower) != len(upper):
        raise ValueError(
            f"Got {len(lower)} lower weights for {len(upper)} upper weights"
        )

    previous = np.array([1.0])
    current = np.array([1.0, 0.0])
    for up, down in zip(upper, lower):
        coupling = alpha * beta * up * down
        following = np.append(current, 0.0)
        following[2:] -= coupling * previous
        previous, current = current, following
    return current


def shift_profile(weights: Sequence[float]) -> float:
    """
    The factor f_1(c) in r(B(t)) = sqrt(t(1-t)) f_1(c) for a non-cyclic weighted
    shift, computed as r(B(1/2)) / 0.5.
    """
    if not any(w > 0.0 for w in weights):
        raise ValueError("shift_profile needs at least one positive weight")
    shift = weighted_shift(weights)
    return spectral_radius(levinger_homotopy(shift, 0.5)) / 0.5


def shift_levinger(weights: Sequence[float]) -> ClosedFormCurve:
    """
    Levinger function sqrt(t(1-t)) f_1(c) of a non-cyclic weighted shift.
    """
    profile = shift_profile(weights)

    def root(t: Scalar) -> Scalar:
        return np.sqrt(t * (1.0 - t))

    def r(t: Scalar) -> Scalar:
        return profile * root(t)

    def dr(t: Scalar) -> Scalar:
        return profile * (1.0 - 2.0 * t) / (2.0 * root(t))

    def d2r(t: Scalar) -> Scalar:
        return -profile / (4.0 * root(t) ** 3)

    return ClosedFormCurve(r=r, dr=dr, d2r=d2r)


def closed_form_curve(spec: FamilySpec) -> Optional[ClosedFormCurve]:
    """
    The closed-form Levinger function of a family member, when one exists.
    """
    if spec.kind == FamilyKind.TWO_BY_TWO:
        return closed_levinger_2x2(*(spec.value(key) for key in ("a", "b", "c", "d")))
    elif spec.kind == FamilyKind.TRIDIAG_TOEPLITZ:
        return tridiag_closed_forms(
            spec.integer("n"), spec.value("a"), spec.value("b"), spec.value("c")
        )[0]
    elif spec.kind == FamilyKind.FIEDLER_TOEPLITZ:
        return fiedler_levinger(
            spec.integer("n"), spec.value("u"), spec.value("v"), spec.value("w")
        )
    elif spec.kind == FamilyKind.WEIGHTED_SHIFT:
        return shift_levinger(spec.weights)
    return None
