import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from levinger.analysis import (
    ReducibleMatrixError,
    Verdict,
    certify_nonconcavity,
    check_unimodality,
    chord_margin,
    concave_neighbourhood,
    directsum_crossing,
    first_derivative,
    is_constant_levinger,
    kqp_structure_check,
    levinger_function,
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
    four_by_four_blocks,
    reversible_cyclic_weights,
    shift_levinger,
    tridiag_closed_forms,
    tridiagonal_toeplitz,
    weighted_shift,
)
from levinger.matrix import direct_sum

TWO_BY_TWO = [[1.0, 2.0], [3.0, 4.0]]


def test_uniform_grid_hits_decimal_points():
    grid = uniform_grid(101)

    assert grid[0] == 0.0 and grid[-1] == 1.0
    assert 0.09 in grid
    assert grid[50] == 0.5
    with pytest.raises(ValueError):
        uniform_grid(2)


def test_ex1_values():
    assert levinger_radius(EX1, 0.09) == pytest.approx(0.4, abs=1e-14)
    assert levinger_radius(EX1, 0.5) == pytest.approx(0.5, abs=1e-14)
    assert levinger_radius(EX1, 0.3) == pytest.approx(math.sqrt(0.21), abs=1e-14)


def test_levinger_function_is_symmetric_about_half():
    r = levinger_function([[0.0, 2.0, 1.0], [0.5, 0.0, 3.0], [1.0, 0.0, 0.2]])
    for t in (0.1, 0.25, 0.4):
        assert r(t) == pytest.approx(r(1.0 - t), rel=1e-12)


def test_derivatives_match_two_by_two_closed_form():
    curve = closed_levinger_2x2(1.0, 2.0, 3.0, 4.0)

    for t in (0.2, 0.5, 0.8):
        assert second_derivative(TWO_BY_TWO, t, fd_step=1e-3) == pytest.approx(
            curve.d2r(t), rel=1e-5
        )
        assert first_derivative(TWO_BY_TWO, t) == pytest.approx(
            curve.dr(t), abs=1e-8
        )


def test_one_sided_derivatives_at_endpoints():
    curve = closed_levinger_2x2(1.0, 2.0, 3.0, 4.0)

    assert first_derivative(TWO_BY_TWO, 0.0) == pytest.approx(curve.dr(0.0), abs=1e-6)
    assert first_derivative(TWO_BY_TWO, 1.0) == pytest.approx(curve.dr(1.0), abs=1e-6)
    assert second_derivative(TWO_BY_TWO, 0.0, fd_step=1e-3) == pytest.approx(
        curve.d2r(0.0), rel=1e-3
    )


@pytest.mark.parametrize(
    "matrix, curve",
    [
        (tridiagonal_toeplitz(8, 2.0, 1.0, 3.0), tridiag_closed_forms(8, 2.0, 1.0, 3.0)[0]),
        (weighted_shift([1.0, 2.0, 3.0]), shift_levinger([1.0, 2.0, 3.0])),
    ],
)
def test_first_derivative_matches_closed_forms(matrix, curve):
    for t in np.arange(1, 10) / 10.0:
        assert first_derivative(matrix, t) == pytest.approx(curve.dr(t), abs=1e-6)


def test_toeplitz_convex_curvature_changes_sign():
    assert second_derivative(TOEPLITZ_CONVEX, 0.01) > 0.0
    assert second_derivative(TOEPLITZ_CONVEX, 0.99) > 0.0
    assert second_derivative(TOEPLITZ_CONVEX, 0.5) < 0.0


def test_cyclic_shift16_curvature_changes_sign():
    matrix = cyclic_weighted_shift(reversible_cyclic_weights(16, 16.0))

    assert second_derivative(matrix, 0.05) > 0.0
    assert second_derivative(matrix, 0.5) < 0.0


def test_derivative_arguments_are_checked():
    with pytest.raises(ValueError):
        second_derivative(TWO_BY_TWO, 0.5, fd_step=0.0)
    with pytest.raises(ValueError):
        first_derivative(TWO_BY_TWO, 1.2)


def test_chord_margin_of_ex1():
    assert chord_margin(EX1, 0.0, 0.4) > 0.04
    expected = (0.4 + math.sqrt(0.1875)) / 2.0 - 0.4
    assert chord_margin(EX1, 0.15, 0.25) == pytest.approx(expected, abs=1e-12)
    assert chord_margin(TWO_BY_TWO, 0.2, 0.8) < 0.0


def test_scan_layout():
    levinger_scan = scan(TWO_BY_TWO, grid_size=11, with_eigenvalues=True)
    frame = levinger_scan.to_frame()

    assert list(frame.columns) == [
        "t",
        "r",
        "dr",
        "d2r",
        "eig_re_1",
        "eig_re_2",
        "eig_im_1",
        "eig_im_2",
    ]
    assert len(frame) == 11
    assert math.isnan(frame["d2r"].iloc[0]) and math.isnan(frame["d2r"].iloc[-1])
    np.testing.assert_allclose(frame["eig_re_1"], frame["r"], rtol=1e-12)
    assert levinger_scan.failures == ()
    assert levinger_scan.at(0.52) == 5


def test_scan_rejects_large_steps():
    with pytest.raises(ValueError):
        scan(TWO_BY_TWO, grid_size=11, fd_step=1e-2)


def test_ex1_is_certified_nonconcave():
    levinger_scan = scan(EX1, grid_size=101, derivatives=False)
    report = certify_nonconcavity(EX1, levinger_scan)

    assert report.verdict == Verdict.NONCONCAVE
    assert report.witness is not None
    assert report.witness.margin > 1e-7
    assert report.witness.margin == pytest.approx(
        chord_margin(EX1, report.witness.t1, report.witness.t2), abs=1e-12
    )
    assert check_unimodality(levinger_scan)


def test_ex1_witness_near_the_kink():
    levinger_scan = scan(EX1, grid_size=101, derivatives=False)
    report = certify_nonconcavity(EX1, levinger_scan, window=(0.1, 0.3))

    assert report.verdict == Verdict.NONCONCAVE
    assert 0.1 <= report.witness.t1 < 0.2 < report.witness.t2 <= 0.3


def test_concave_and_constant_verdicts():
    matrix = tridiagonal_toeplitz(6, 2.0, 1.0, 3.0)
    report = certify_nonconcavity(matrix, scan(matrix, 101, derivatives=False))
    assert report.verdict == Verdict.CONCAVE_ON_GRID
    assert report.witness is None

    symmetric = [[1.0, 2.0], [2.0, 1.0]]
    report = certify_nonconcavity(symmetric, scan(symmetric, 101, derivatives=False))
    assert report.verdict == Verdict.CONSTANT
    assert report.value_range <= 1e-12


def test_constant_levinger_predicates_agree():
    constant = [
        [[1.0, 2.0], [2.0, 1.0]],
        circulant_from_fiedler(5, 1.0, 4.0, 2.0),
        np.ones((4, 4)) + np.diag([0.0, 1.0, 2.0, 3.0]),
    ]
    for matrix in constant:
        assert is_constant_levinger(matrix)
        assert kqp_structure_check(matrix)
        assert perron_vectors_colinear(matrix)

    varying = [TWO_BY_TWO, [[0.0, 1.0, 2.0], [3.0, 0.0, 1.0], [1.0, 1.0, 0.0]]]
    for matrix in varying:
        assert not is_constant_levinger(matrix)
        assert not kqp_structure_check(matrix)
        assert not perron_vectors_colinear(matrix)


def test_predicates_require_irreducible_input():
    for predicate in (is_constant_levinger, kqp_structure_check, perron_vectors_colinear):
        with pytest.raises(ReducibleMatrixError):
            predicate(EX1)
    with pytest.raises(ValueError):
        is_constant_levinger([[1.0, -1.0], [1.0, 1.0]])


def test_skew_singularity_check():
    odd = skew_singularity_check(np.arange(9, dtype=float).reshape(3, 3))
    assert odd.odd_order
    assert odd.skew_rank_deficient

    shift = skew_singularity_check([[0.0, 1.0], [0.0, 0.0]])
    assert not shift.odd_order
    assert not shift.skew_rank_deficient
    assert shift.smallest_singular_value == pytest.approx(0.5)

    symmetric = skew_singularity_check([[1.0, 2.0], [2.0, 1.0]])
    assert symmetric.skew_rank_deficient


def test_directsum_crossing_of_four_by_four_blocks():
    first, second = four_by_four_blocks(0.4)
    certificate = directsum_crossing(first, second, grid_size=201)

    assert certificate is not None
    assert 0.0 < certificate.t_star < 0.5
    assert certificate.delta > 1e-3
    assert levinger_radius(first, certificate.t_star) == pytest.approx(
        levinger_radius(second, certificate.t_star), abs=1e-10
    )


def test_directsum_crossing_without_crossing():
    block = [[0.0, 1.0], [2.0, 0.0]]
    assert directsum_crossing(block, block, grid_size=51) is None
    assert directsum_crossing(block, [[10.0]], grid_size=51) is None


def test_direct_sum_witness_sits_at_the_crossing():
    first, second = four_by_four_blocks(0.4)
    certificate = directsum_crossing(first, second, grid_size=201)
    assembled = direct_sum(first, second)

    window = (certificate.t_star - 0.1, certificate.t_star + 0.1)
    report = certify_nonconcavity(
        assembled, scan(assembled, 201, derivatives=False), window=window
    )
    assert report.verdict == Verdict.NONCONCAVE
    witness = report.witness
    assert window[0] <= witness.t1 < certificate.t_star < witness.t2 <= window[1]


def test_concave_neighbourhood():
    levinger_scan = scan(EX1, grid_size=101)
    neighbourhood = concave_neighbourhood(levinger_scan)

    assert neighbourhood is not None
    low, high = neighbourhood
    assert 0.2 < low < 0.5 < high < 0.8
    assert low + high == pytest.approx(1.0)


def test_weight_limit_experiment():
    results = weight_limit_experiment(
        reversible_cyclic_weights(4, 4.0), index=1, factor=0.5, steps=2, grid_size=21
    )

    assert [scale for scale, _ in results] == [1.0, 0.5, 0.25, 0.0]
    summary = summarize_weight_limit(results)
    assert list(summary.columns) == [
        "scale",
        "boundary_curvature",
        "midpoint_curvature",
        "midpoint_gap",
    ]
    assert len(summary) == 4
    assert summary["midpoint_gap"].iloc[-1] == 0.0


def test_weight_limit_arguments_are_checked():
    weights = reversible_cyclic_weights(4, 4.0)
    with pytest.raises(ValueError):
        weight_limit_experiment(weights, index=5, factor=0.5, steps=2)
    with pytest.raises(ValueError):
        weight_limit_experiment(weights, index=1, factor=1.5, steps=2)
    with pytest.raises(ValueError):
        weight_limit_experiment(weights, index=1, factor=0.5, steps=0)
    with pytest.raises(ValueError):
        summarize_weight_limit([])


small_nonnegative_matrices = st.integers(min_value=1, max_value=4).flatmap(
    lambda n: st.lists(
        st.integers(min_value=0, max_value=4).map(float), min_size=n * n, max_size=n * n
    ).map(lambda values: np.array(values).reshape(n, n))
)


@settings(max_examples=25, deadline=None)
@given(small_nonnegative_matrices)
def test_levinger_function_is_unimodal_and_symmetric(matrix):
    levinger_scan = scan(matrix, grid_size=21, derivatives=False)
    scale = max(1.0, float(np.max(matrix)))

    assert check_unimodality(levinger_scan, tol=1e-9 * scale)
    np.testing.assert_allclose(
        levinger_scan.r, levinger_scan.r[::-1], atol=1e-10 * scale, rtol=0.0
    )
