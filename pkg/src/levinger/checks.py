"""
Acceptance suite behind `levinger verify`: every theorem and counterexample
reproduced numerically, each reported with its measured value and threshold.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Tuple

import numpy as np
from numpy.typing import ArrayLike

from levinger.analysis import (
    DEFAULT_CONCAVITY_TOL,
    DEFAULT_FD_STEP,
    Verdict,
    certify_nonconcavity,
    check_unimodality,
    chord_margin,
    directsum_crossing,
    is_constant_levinger,
    kqp_structure_check,
    levinger_radius,
    perron_vectors_colinear,
    scan,
    second_derivative,
    skew_singularity_check,
    summarize_weight_limit,
    uniform_grid,
    weight_limit_experiment,
)
from levinger.families import (
    EX1,
    TOEPLITZ_CONVEX,
    circulant_from_fiedler,
    closed_levinger_2x2,
    cyclic_weighted_shift,
    fiedler_eigs,
    fiedler_levinger,
    fiedler_toeplitz,
    four_by_four_blocks,
    hollow_tridiagonal,
    jacobi_charpoly,
    reversible_cyclic_weights,
    tridiag_closed_forms,
    tridiagonal_toeplitz,
    upshift,
    weighted_shift,
)
from levinger.matrix import (
    Matrix,
    as_matrix,
    direct_sum,
    is_irreducible,
    is_symmetric,
    levinger_homotopy,
    perturb_positive,
)
from levinger.spectra import full_spectrum, spectrum_distance

logger = logging.getLogger(__name__)
logger.addHandler(logging.NullHandler())

CHECK_GRID_SIZE = 201
CROSSING_WITNESS_RADIUS = 0.1
ORACLE_GRID_SIZE = 101
CONSTANT_RANGE = 1e-9


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    measured: float
    threshold: float
    detail: str = ""

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "pass": self.passed,
            "measured": self.measured,
            "threshold": self.threshold,
            "detail": self.detail,
        }


def check_ex1_spectrum(fd_step: float, rng: np.random.Generator) -> CheckResult:
    worst = 0.0
    for t in (0.09, 0.2, 0.5):
        root = math.sqrt(t * (1.0 - t))
        computed = full_spectrum(levinger_homotopy(EX1, t)).values
        worst = max(worst, spectrum_distance(computed, [0.4, root, -root]))
    return CheckResult("ex1-spectrum", worst <= 1e-10, worst, 1e-10)


def check_ex1_witness(fd_step: float, rng: np.random.Generator) -> CheckResult:
    expected = (0.4 + math.sqrt(0.1875)) / 2.0 - 0.4
    margin = chord_margin(EX1, 0.15, 0.25)
    verdicts = [
        certify_nonconcavity(matrix, scan(matrix, CHECK_GRID_SIZE)).verdict
        for matrix in (as_matrix(EX1), perturb_positive(EX1, 1e-6))
    ]
    passed = (
        abs(margin - expected) <= 1e-6
        and margin > 0.016
        and all(verdict == Verdict.NONCONCAVE for verdict in verdicts)
    )
    detail = ", ".join(verdict.label for verdict in verdicts)
    return CheckResult("ex1-chord-witness", passed, margin, 0.016, detail)


def check_two_by_two(fd_step: float, rng: np.random.Generator) -> CheckResult:
    t_grid = uniform_grid(ORACLE_GRID_SIZE)
    samples = np.arange(1, 10) / 10.0
    value_error = curvature_error = 0.0
    concave = True
    for _ in range(50):
        a, b, c, d = rng.uniform(0.0, 5.0, size=4)
        matrix = as_matrix([[a, b], [c, d]])
        curve = closed_levinger_2x2(a, b, c, d)
        numeric = np.array([levinger_radius(matrix, t) for t in t_grid])
        value_error = max(value_error, float(np.max(np.abs(numeric - curve.r(t_grid)))))
        for t in samples:
            estimate = second_derivative(matrix, t, fd_step=fd_step)
            curvature_error = max(curvature_error, abs(estimate - curve.d2r(t)))
        if b != c:
            concave = concave and bool(np.all(curve.d2r(samples) < 0.0))

    passed = value_error <= 1e-9 and curvature_error <= 1e-5 and concave
    detail = f"r error {value_error:.3g}, d2r error {curvature_error:.3g}"
    return CheckResult("two-by-two-oracle", passed, curvature_error, 1e-5, detail)


def check_tridiagonal(fd_step: float, rng: np.random.Generator) -> CheckResult:
    matrix = tridiagonal_toeplitz(8, 2.0, 1.0, 3.0)
    curve = tridiag_closed_forms(8, 2.0, 1.0, 3.0)[0]
    t_grid = uniform_grid(ORACLE_GRID_SIZE)
    numeric = np.array([levinger_radius(matrix, t) for t in t_grid])
    error = float(np.max(np.abs(numeric - curve.r(t_grid))))

    levinger_scan = scan(matrix, ORACLE_GRID_SIZE, derivatives=False)
    verdict = certify_nonconcavity(matrix, levinger_scan).verdict
    balanced = tridiagonal_toeplitz(8, 2.0, 1.0, 2.0)
    balanced_verdict = certify_nonconcavity(
        balanced, scan(balanced, ORACLE_GRID_SIZE, derivatives=False)
    ).verdict

    passed = (
        error <= 1e-10
        and verdict == Verdict.CONCAVE_ON_GRID
        and check_unimodality(levinger_scan)
        and balanced_verdict == Verdict.CONSTANT
    )
    detail = f"{verdict.label}, a=c gives {balanced_verdict.label}"
    return CheckResult("tridiagonal-toeplitz", passed, error, 1e-10, detail)


def check_fiedler(fd_step: float, rng: np.random.Generator) -> CheckResult:
    interior = uniform_grid(ORACLE_GRID_SIZE)[1:-1]
    spectrum_error = max_curvature = 0.0
    verdicts_ok = True
    for n in (3, 5, 8):
        u, v, w = rng.uniform(0.5, 4.0, size=3)
        matrix = fiedler_toeplitz(n, u, v, w)
        formula = fiedler_eigs(n, u, v, w).values
        spectrum_error = max(
            spectrum_error, spectrum_distance(full_spectrum(matrix).values, formula)
        )
        max_curvature = max(
            max_curvature, float(np.max(fiedler_levinger(n, u, v, w).d2r(interior)))
        )
        report = certify_nonconcavity(
            matrix, scan(matrix, ORACLE_GRID_SIZE, derivatives=False)
        )
        verdicts_ok = verdicts_ok and report.verdict != Verdict.NONCONCAVE

        balanced = fiedler_toeplitz(n, u, u, w)
        balanced_report = certify_nonconcavity(
            balanced, scan(balanced, ORACLE_GRID_SIZE, derivatives=False)
        )
        verdicts_ok = verdicts_ok and balanced_report.verdict == Verdict.CONSTANT

    circulant = circulant_from_fiedler(5, 1.0, 4.0, 2.0)
    circulant_range = scan(circulant, ORACLE_GRID_SIZE, derivatives=False).value_range
    passed = (
        spectrum_error <= 1e-8
        and max_curvature <= 1e-7
        and verdicts_ok
        and circulant_range <= 1e-10
        and is_constant_levinger(circulant)
    )
    detail = f"max d2r {max_curvature:.3g}, circulant range {circulant_range:.3g}"
    return CheckResult("fiedler-toeplitz", passed, spectrum_error, 1e-8, detail)


def check_weighted_shift(fd_step: float, rng: np.random.Generator) -> CheckResult:
    weights = rng.uniform(0.5, 4.0, size=5)
    shift = weighted_shift(weights)
    samples = np.arange(1, 10) / 10.0
    ratios = np.array(
        [levinger_radius(shift, t) / math.sqrt(t * (1.0 - t)) for t in samples]
    )
    ratio_spread = float(np.max(ratios) - np.min(ratios))

    upper = rng.uniform(0.5, 4.0, size=5)
    lower = rng.uniform(0.5, 4.0, size=5)
    unit_roots = np.roots(jacobi_charpoly(upper, 1.0, 1.0, lower))
    scaled_roots = np.roots(jacobi_charpoly(upper, 4.0, 1.0, lower))
    root_error = spectrum_distance(scaled_roots, 2.0 * unit_roots)

    swapped = hollow_tridiagonal(weights, [True, False, True, True, False])
    transposed = upshift(weights, cyclic=False)
    swap_error = max(
        abs(levinger_radius(variant, t) - levinger_radius(shift, t))
        for variant in (swapped, transposed)
        for t in samples
    )

    passed = ratio_spread <= 1e-9 and root_error <= 1e-8 and swap_error <= 1e-10
    detail = f"root error {root_error:.3g}, swap error {swap_error:.3g}"
    return CheckResult("weighted-shift", passed, ratio_spread, 1e-9, detail)


def _boundary_signs(
    matrix: ArrayLike, convex_at: Tuple[float, ...], fd_step: float
) -> Tuple[bool, float, float]:
    convex = [second_derivative(matrix, t, fd_step=fd_step) for t in convex_at]
    middle = second_derivative(matrix, 0.5, fd_step=fd_step)
    return all(value > 0.0 for value in convex) and middle < 0.0, min(convex), middle


def check_toeplitz_convex(fd_step: float, rng: np.random.Generator) -> CheckResult:
    signs_ok, convex, middle = _boundary_signs(TOEPLITZ_CONVEX, (0.01, 0.99), fd_step)
    verdict = certify_nonconcavity(
        TOEPLITZ_CONVEX, scan(TOEPLITZ_CONVEX, CHECK_GRID_SIZE, derivatives=False)
    ).verdict
    passed = signs_ok and verdict == Verdict.NONCONCAVE
    detail = f"d2r(0.5) = {middle:.6g}, {verdict.label}"
    return CheckResult("toeplitz-convex", passed, convex, 0.0, detail)


def check_cyclic_shift16(fd_step: float, rng: np.random.Generator) -> CheckResult:
    matrix = cyclic_weighted_shift(reversible_cyclic_weights(16, 16.0))
    signs_ok, convex, middle = _boundary_signs(matrix, (0.05,), fd_step)
    levinger_scan = scan(matrix, CHECK_GRID_SIZE, derivatives=False)
    report = certify_nonconcavity(matrix, levinger_scan)
    passed = (
        signs_ok
        and report.verdict == Verdict.NONCONCAVE
        and report.witness is not None
        and report.witness.margin > DEFAULT_CONCAVITY_TOL
        and check_unimodality(levinger_scan)
    )
    detail = f"d2r(0.5) = {middle:.6g}, {report.verdict.label}"
    return CheckResult("cyclic-shift-16", passed, convex, 0.0, detail)


def check_four_by_four(fd_step: float, rng: np.random.Generator) -> CheckResult:
    first, second = four_by_four_blocks(0.4)
    certificate = directsum_crossing(first, second)
    if certificate is None:
        return CheckResult("four-by-four-crossing", False, 0.0, 1e-3, "no crossing")

    assembled = direct_sum(first, second)
    # The witness has to sit at the crossing, not anywhere on [0, 1]
    window = (
        certificate.t_star - CROSSING_WITNESS_RADIUS,
        certificate.t_star + CROSSING_WITNESS_RADIUS,
    )
    report = certify_nonconcavity(
        assembled, scan(assembled, CHECK_GRID_SIZE, derivatives=False), window=window
    )
    passed = certificate.delta > 1e-3 and report.verdict == Verdict.NONCONCAVE
    detail = f"t* = {certificate.t_star:.6g}, {report.verdict.label}"
    if report.witness is not None:
        detail += f" at ({report.witness.t1:.6g}, {report.witness.t2:.6g})"
    return CheckResult("four-by-four-crossing", passed, certificate.delta, 1e-3, detail)


def _random_irreducible(rng: np.random.Generator, kind: int) -> Matrix:
    n = int(rng.integers(4, 9))
    draw = rng.uniform(0.0, 1.0, size=(n, n))
    if kind == 0:
        return as_matrix(draw + 1e-3)
    elif kind == 1:
        return as_matrix((draw + draw.T) / 2.0 + 1e-3)
    elif kind == 2:
        row = draw[0] + 1e-3
        return as_matrix([np.roll(row, shift) for shift in range(n)])
    symmetric = (draw + draw.T) / 2.0 + 1e-3
    return as_matrix(symmetric + 1e-2 * rng.uniform(0.0, 1.0, size=(n, n)))


def _constructed_constant(number: int) -> Matrix:
    n = 4 + number % 5
    if number % 2 == 0:
        return as_matrix(np.ones((n, n)) + np.diag(np.arange(n, dtype=float)))
    return circulant_from_fiedler(max(n, 3), 1.0 + number / 10.0, 2.0, 0.5)


def predicate_verdicts(matrix: ArrayLike) -> Tuple[bool, bool, bool, bool]:
    """
    The null-space criterion, the K-in-Q-basis check, Perron colinearity and a
    sampled range test, which must all agree.
    """
    sampled = scan(matrix, 51, derivatives=False).value_range <= CONSTANT_RANGE
    return (
        is_constant_levinger(matrix),
        kqp_structure_check(matrix),
        perron_vectors_colinear(matrix),
        sampled,
    )


def check_predicate_agreement(fd_step: float, rng: np.random.Generator) -> CheckResult:
    matrices = [_random_irreducible(rng, number % 4) for number in range(100)]
    matrices += [_constructed_constant(number) for number in range(20)]

    disagreements = 0
    constant = 0
    for matrix in matrices:
        verdicts = predicate_verdicts(matrix)
        if len(set(verdicts)) != 1:
            disagreements += 1
            logger.warning(f"Predicates disagree ({verdicts}) on\n{matrix}")
        constant += int(verdicts[0])

    detail = f"{constant} of {len(matrices)} constant"
    return CheckResult(
        "constant-levinger-agreement", disagreements == 0, disagreements, 0, detail
    )


def check_skew_corollaries(fd_step: float, rng: np.random.Generator) -> CheckResult:
    odd_detected = all(
        skew_singularity_check(rng.uniform(0.0, 1.0, size=(n, n))).skew_rank_deficient
        for n in (3, 5, 7)
        for _ in range(5)
    )
    matrix = as_matrix(np.ones((4, 4)) + cyclic_weighted_shift([1.0, 2.0, 3.0, 4.0]))
    report = skew_singularity_check(matrix)
    passed = (
        odd_detected
        and not report.skew_rank_deficient
        and not is_constant_levinger(matrix)
    )
    return CheckResult(
        "skew-singularity",
        passed,
        report.smallest_singular_value,
        0.0,
        "odd orders singular" if odd_detected else "odd order missed",
    )


def check_weight_limit(fd_step: float, rng: np.random.Generator) -> CheckResult:
    results = weight_limit_experiment(
        reversible_cyclic_weights(16, 16.0),
        index=12,
        factor=2.0**-8,
        steps=4,
        grid_size=ORACLE_GRID_SIZE,
    )
    summary = summarize_weight_limit(results)
    growth = float(
        summary["boundary_curvature"].iloc[4] / summary["boundary_curvature"].iloc[0]
    )
    gaps = summary["midpoint_gap"].to_numpy()
    converging = bool(np.all(np.diff(gaps) <= 1e-3))
    passed = growth >= 10.0 and converging
    detail = "midpoint gaps " + ", ".join(f"{gap:.3g}" for gap in gaps)
    return CheckResult("weight-limit", passed, growth, 10.0, detail)


CHECKS: List[Callable[[float, np.random.Generator], CheckResult]] = [
    check_ex1_spectrum,
    check_ex1_witness,
    check_two_by_two,
    check_tridiagonal,
    check_fiedler,
    check_weighted_shift,
    check_toeplitz_convex,
    check_cyclic_shift16,
    check_four_by_four,
    check_predicate_agreement,
    check_skew_corollaries,
    check_weight_limit,
]


def check_matrix(
    matrix: ArrayLike, tol: float = DEFAULT_CONCAVITY_TOL
) -> List[CheckResult]:
    """
    Checks on a user-supplied nonnegative matrix: unimodality, transpose symmetry
    and, for irreducible input, agreement of the constant-Levinger predicates.
    """
    matrix = as_matrix(matrix)
    levinger_scan = scan(matrix, CHECK_GRID_SIZE, derivatives=False)
    r = levinger_scan.r
    symmetry_error = float(np.nanmax(np.abs(r - r[::-1])))
    report = certify_nonconcavity(matrix, levinger_scan, tol=tol)

    results = [
        CheckResult(
            "input-unimodality",
            check_unimodality(levinger_scan),
            levinger_scan.value_range,
            0.0,
            report.verdict.label,
        ),
        CheckResult(
            "input-transpose-symmetry", symmetry_error <= 1e-9, symmetry_error, 1e-9
        ),
    ]
    if is_irreducible(matrix):
        verdicts = predicate_verdicts(matrix)
        agree = len(set(verdicts)) == 1
        if is_symmetric(matrix):
            agree = agree and all(verdicts) and report.verdict == Verdict.CONSTANT
        results.append(
            CheckResult(
                "input-constant-levinger",
                agree,
                float(verdicts[0]),
                1.0,
                "constant" if verdicts[0] else "nonconstant",
            )
        )
    return results


def run_acceptance(
    fd_step: float = DEFAULT_FD_STEP,
    seed: int = 0,
    matrix: Optional[ArrayLike] = None,
    tol: float = DEFAULT_CONCAVITY_TOL,
) -> List[CheckResult]:
    """
    Runs every acceptance check. A check that raises is reported as failed.

    Args:
        fd_step: Stencil step of the second-derivative checks
        seed: Seed of the random draws
        matrix: Optional matrix checked in addition to the built-in suite
        tol: Concavity tolerance for the optional matrix
    Returns:
        One CheckResult per check
    """
    rng = np.random.default_rng(seed)
    results = []
    for check in CHECKS:
        name = check.__name__.replace("check_", "").replace("_", "-")
        try:
            result = check(fd_step, rng)
        except (ValueError, ArithmeticError) as e:
            logger.warning(f"Check {name} raised: {e}")
            result = CheckResult(name, False, math.nan, math.nan, str(e))
        logger.info(f"{result.name}: {'pass' if result.passed else 'FAIL'}")
        results.append(result)

    if matrix is not None:
        results.extend(check_matrix(matrix, tol=tol))
    return results
