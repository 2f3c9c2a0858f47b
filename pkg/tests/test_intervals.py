import numpy as np
import pytest

from errors import IntervalValidationError
from intervals import (
    IntervalMap,
    as_position_array,
    intervals_from_permutation,
    invert_tau,
    output_starts,
    validate_interval_map,
)
from tests.conftest import PI_A, PI_B


def test_pi_a_intervals(pi_a):
    assert pi_a.n == 8
    assert pi_a.P.tolist() == [0, 4, 8]
    assert pi_a.P_pi.tolist() == [4, 0]
    assert pi_a.tau.tolist() == [1, 0]
    assert pi_a.r == 2


def test_pi_b_intervals(pi_b):
    assert pi_b.P.tolist() == [0, 6, 7, 8, 9, 10, 11, 12]
    assert pi_b.P_pi.tolist() == [6, 5, 4, 3, 2, 1, 0]
    assert pi_b.tau.tolist() == [6, 5, 4, 3, 2, 1, 0]


def test_identity_is_one_interval(identity):
    assert identity.P.tolist() == [0, 10]
    assert identity.P_pi.tolist() == [0]
    assert identity.tau.tolist() == [0]


def test_single_element():
    imap = intervals_from_permutation([0])
    assert imap.P.tolist() == [0, 1]
    assert validate_interval_map(imap) is None


@pytest.mark.parametrize(
    "pi, message",
    [
        ([], "permutation is empty"),
        ([0, 3, 1], "value 3 out of range at index 1"),
        ([0, 0, 1], "duplicate value 0 at index 1"),
    ],
)
def test_rejects_non_bijections(pi, message):
    with pytest.raises(IntervalValidationError, match=message):
        intervals_from_permutation(pi)


def test_rejects_negative_values():
    with pytest.raises(IntervalValidationError, match="negative value"):
        intervals_from_permutation([1, -1, 0])


def test_expand_recovers_permutation(pi_a, pi_b):
    assert pi_a.expand().tolist() == PI_A
    assert pi_b.expand().tolist() == PI_B


def test_expand_random_permutations(rng):
    for _ in range(20):
        n = int(rng.integers(1, 200))
        pi = rng.permutation(n)
        imap = intervals_from_permutation(pi)
        assert np.array_equal(imap.expand(), pi)
        assert validate_interval_map(imap) is None


def test_inverse_map(pi_b):
    inverse = pi_b.inverse()
    assert validate_interval_map(inverse) is None
    assert inverse.expand().tolist() == np.argsort(PI_B).tolist()
    assert inverse.inverse() == pi_b


def test_output_starts(pi_a, pi_b):
    Q, tau_inv = output_starts(pi_a)
    assert Q.tolist() == [0, 4, 8]
    assert tau_inv.tolist() == [1, 0]

    starts = output_starts(pi_b)
    assert starts.Q.tolist() == [0, 1, 2, 3, 4, 5, 6, 12]
    assert starts.tau_inv.tolist() == [6, 5, 4, 3, 2, 1, 0]


def test_output_starts_identity(identity):
    starts = output_starts(identity)
    assert starts.Q.tolist() == [0, 10]
    assert starts.tau_inv.tolist() == [0]


def test_invert_tau():
    assert invert_tau([2, 0, 1]).tolist() == [1, 2, 0]
    with pytest.raises(IntervalValidationError, match="tau is not a permutation"):
        invert_tau([1, 1])
    with pytest.raises(IntervalValidationError, match="tau is not a permutation"):
        invert_tau([0, 2])


@pytest.mark.parametrize(
    "n, P, P_pi, tau, message",
    [
        (8, [1, 4, 8], [4, 0], None, "P\\[0\\] must be 0"),
        (8, [0, 4, 4, 8], [4, 0, 2], None, "P not strictly increasing at index 2"),
        (8, [0, 4, 7], [4, 0], None, "P\\[2\\] must equal n=8"),
        (8, [0, 4, 8], [8, 0], None, "P_pi out of range at index 0"),
        (8, [0, 4, 8], [0, 0], [0, 1], "P_pi not distinct at index 1"),
        (8, [0, 4, 8], [4, 0], [0, 1], "tau inconsistent with P_pi at rank 0"),
        (8, [0, 4, 8], [4, 1], None, "smallest output start must be 0"),
        (8, [0, 3, 8], [4, 0], None, "interval lengths differ at index 0"),
    ],
)
def test_validation_reports_first_violation(n, P, P_pi, tau, message):
    imap = IntervalMap.from_arrays(n, P, P_pi, tau, validate=False)
    violation = validate_interval_map(imap)
    assert violation is not None
    with pytest.raises(IntervalValidationError, match=message):
        IntervalMap.from_arrays(n, P, P_pi, tau)


def test_from_arrays_accepts_valid_map():
    imap = IntervalMap.from_arrays(8, [0, 3, 8], [5, 0])
    assert imap.tau.tolist() == [1, 0]
    assert imap.expand().tolist() == [5, 6, 7, 0, 1, 2, 3, 4]


def test_as_position_array():
    assert as_position_array([0, 3, 5]).dtype == np.uint64
    with pytest.raises(IntervalValidationError, match="one-dimensional"):
        as_position_array([[0, 1]])
