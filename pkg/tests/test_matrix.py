import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from levinger.matrix import (
    MatrixFormatError,
    as_matrix,
    centered_homotopy,
    decompose,
    direct_sum,
    format_matrix,
    is_irreducible,
    is_nonnegative,
    is_skew_symmetric,
    is_symmetric,
    levinger_homotopy,
    nonneg_extension_bound,
    parse_matrix,
    perturb_positive,
)

finite_entries = st.floats(
    min_value=-1e6, max_value=1e6, allow_nan=False, allow_infinity=False
)
square_matrices = st.integers(min_value=1, max_value=5).flatmap(
    lambda n: st.lists(
        st.lists(finite_entries, min_size=n, max_size=n), min_size=n, max_size=n
    )
)


def test_as_matrix_rejects_bad_input():
    with pytest.raises(ValueError):
        as_matrix([[1.0, 2.0, 3.0]])
    with pytest.raises(ValueError):
        as_matrix([[1.0, math.nan], [0.0, 1.0]])
    with pytest.raises(ValueError):
        as_matrix(np.zeros((0, 0)))
    with pytest.raises(ValueError):
        as_matrix([["a", "b"], ["c", "d"]])


def test_as_matrix_is_read_only_copy():
    source = np.array([[1.0, 2.0], [3.0, 4.0]])
    matrix = as_matrix(source)
    source[0, 0] = 10.0

    assert matrix[0, 0] == 1.0
    with pytest.raises(ValueError):
        matrix[0, 0] = 5.0


def test_levinger_homotopy_endpoints():
    matrix = as_matrix([[1.0, 2.0], [3.0, 4.0]])

    np.testing.assert_array_equal(levinger_homotopy(matrix, 0.0), matrix)
    np.testing.assert_array_equal(levinger_homotopy(matrix, 1.0), matrix.T)
    np.testing.assert_allclose(
        levinger_homotopy(matrix, 0.5), [[1.0, 2.5], [2.5, 4.0]]
    )
    with pytest.raises(ValueError):
        levinger_homotopy(matrix, 1.5)


@given(square_matrices)
def test_decompose_splits_into_symmetric_and_skew(rows):
    matrix = as_matrix(rows)
    sym, skew = decompose(matrix)

    np.testing.assert_allclose(sym + skew, matrix, atol=1e-9)
    assert is_symmetric(sym)
    assert np.array_equal(skew, -skew.T)


def test_centered_homotopy_reaches_matrix_and_transpose():
    matrix = as_matrix([[0.0, 3.0], [1.0, 2.0]])

    np.testing.assert_allclose(centered_homotopy(matrix, 1.0), matrix)
    np.testing.assert_allclose(centered_homotopy(matrix, -1.0), matrix.T)
    np.testing.assert_allclose(
        centered_homotopy(matrix, 0.2), levinger_homotopy(matrix, 0.4)
    )


def test_nonneg_extension_bound():
    assert nonneg_extension_bound([[1.0, 2.0], [2.0, 1.0]]) == math.inf
    assert nonneg_extension_bound([[0.0, 1.0], [0.0, 0.0]]) == pytest.approx(1.0)

    matrix = as_matrix([[0.0, 3.0], [1.0, 0.0]])
    bound = nonneg_extension_bound(matrix)
    assert bound == pytest.approx(2.0)
    assert np.all(centered_homotopy(matrix, bound) >= -1e-12)
    assert np.any(centered_homotopy(matrix, bound + 0.1) < 0.0)

    with pytest.raises(ValueError):
        nonneg_extension_bound([[0.0, -1.0], [1.0, 0.0]])


def test_structure_predicates():
    assert is_skew_symmetric([[0.0, 1.0], [-1.0, 0.0]])
    assert not is_skew_symmetric([[0.0, 1.0], [1.0, 0.0]])
    assert is_nonnegative([[0.0, 1.0], [2.0, 0.0]])
    assert not is_nonnegative([[0.0, -1.0], [2.0, 0.0]])


def test_irreducibility():
    assert not is_irreducible([[0.0, 1.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, 0.4]])
    assert is_irreducible([[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [1.0, 0.0, 0.0]])
    assert is_irreducible([[5.0]])
    assert is_irreducible(perturb_positive(np.zeros((3, 3)), 1e-6))

    with pytest.raises(ValueError):
        perturb_positive(np.zeros((2, 2)), 0.0)


def test_direct_sum():
    result = direct_sum([[1.0]], [[2.0, 3.0], [4.0, 5.0]])

    np.testing.assert_array_equal(
        result, [[1.0, 0.0, 0.0], [0.0, 2.0, 3.0], [0.0, 4.0, 5.0]]
    )
    assert not is_irreducible(result)


def test_parse_matrix():
    matrix = parse_matrix("2\n1 2\n3 4.5\n")
    np.testing.assert_array_equal(matrix, [[1.0, 2.0], [3.0, 4.5]])

    with pytest.raises(MatrixFormatError, match="Expected 2 rows"):
        parse_matrix("2\n1 2\n")
    with pytest.raises(MatrixFormatError, match="Row 1 has 3 entries"):
        parse_matrix("2\n1 2 3\n4 5\n")
    with pytest.raises(MatrixFormatError, match="dimension"):
        parse_matrix("two\n1 2\n3 4\n")
    with pytest.raises(MatrixFormatError):
        parse_matrix("")
    with pytest.raises(MatrixFormatError):
        parse_matrix("1\nnan\n")


@given(square_matrices)
def test_format_matrix_keeps_every_digit(rows):
    matrix = as_matrix(rows)
    text = format_matrix(matrix)

    assert text.splitlines()[0] == str(matrix.shape[0])
    np.testing.assert_array_equal(parse_matrix(text), matrix)


nonnegative_matrices = st.integers(min_value=1, max_value=5).flatmap(
    lambda n: st.lists(
        st.lists(
            st.integers(min_value=0, max_value=16).map(float),
            min_size=n,
            max_size=n,
        ),
        min_size=n,
        max_size=n,
    )
)


@given(square_matrices, st.floats(min_value=0.0, max_value=1.0))
def test_homotopy_transpose_symmetry(rows, t):
    matrix = as_matrix(rows)
    scale = max(1.0, float(np.max(np.abs(matrix))))

    np.testing.assert_allclose(
        levinger_homotopy(matrix, t).T,
        levinger_homotopy(matrix, 1.0 - t),
        atol=1e-12 * scale,
        rtol=0.0,
    )


@given(nonnegative_matrices, st.floats(min_value=-1.0, max_value=1.0))
def test_centered_homotopy_stays_nonnegative(rows, fraction):
    matrix = as_matrix(rows)
    bound = nonneg_extension_bound(matrix)
    assert bound >= 1.0

    p = fraction * (bound if math.isfinite(bound) else 100.0)
    assert np.all(centered_homotopy(matrix, p) >= -1e-12 * max(1.0, float(np.max(matrix))))
