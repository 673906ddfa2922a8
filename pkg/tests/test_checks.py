import numpy as np
import pytest

from levinger.checks import (
    CHECKS,
    CheckResult,
    check_ex1_spectrum,
    check_ex1_witness,
    check_four_by_four,
    check_matrix,
    check_tridiagonal,
    check_two_by_two,
    predicate_verdicts,
    run_acceptance,
)
from levinger.families import EX1, tridiagonal_toeplitz


def test_check_result_to_dict():
    result = CheckResult("x", True, 1.5, 2.0, "fine")

    assert result.to_dict() == {
        "name": "x",
        "pass": True,
        "measured": 1.5,
        "threshold": 2.0,
        "detail": "fine",
    }


@pytest.mark.parametrize(
    "check",
    [
        check_ex1_spectrum,
        check_ex1_witness,
        check_two_by_two,
        check_tridiagonal,
        check_four_by_four,
    ],
)
def test_individual_checks_pass(check):
    result = check(1e-3, np.random.default_rng(0))
    assert result.passed, result.detail


def test_predicate_verdicts_agree_on_symmetric_matrix():
    assert predicate_verdicts([[1.0, 2.0], [2.0, 3.0]]) == (True, True, True, True)


def test_check_matrix_on_reducible_input():
    results = check_matrix(EX1)

    assert [result.name for result in results] == [
        "input-unimodality",
        "input-transpose-symmetry",
    ]
    assert all(result.passed for result in results)
    assert results[0].detail == "nonconcave"


def test_check_matrix_on_irreducible_input():
    results = check_matrix(tridiagonal_toeplitz(5, 1.0, 0.5, 2.0))

    assert len(results) == 3
    assert all(result.passed for result in results)
    assert results[2].detail == "nonconstant"


@pytest.mark.slow
def test_acceptance_suite_passes():
    results = run_acceptance(seed=0)

    assert len(results) == len(CHECKS)
    failed = [result.to_dict() for result in results if not result.passed]
    assert not failed
