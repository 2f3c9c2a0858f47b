import numpy as np
import pytest

from balancer import balance, extract_forward, extract_inverse
from errors import MoveFormatError, ParameterError, PositionRangeError, QueryContractError
from intervals import intervals_from_permutation
from movequery import (
    HEADER,
    MoveStructure,
    QueryCounter,
    deserialize,
    from_interval_map,
    iterate,
    load,
    locate,
    max_scan_length,
    move_query,
    save,
    serialize,
    validate_move_structure,
)
from oracle import random_interval_permutation
from tests.conftest import PI_B


@pytest.fixture
def pi_b_forward(pi_b):
    return extract_forward(balance(pi_b, 2))


@pytest.fixture
def pi_b_inverse(pi_b):
    return extract_inverse(balance(pi_b, 2))


def test_pi_a_queries(pi_a):
    ms = extract_forward(balance(pi_a, 2))
    assert move_query(ms, 2, 0) == (6, 1)
    assert list(iterate(ms, 0, 0, 2)) == [(0, 0), (4, 1)]


def test_pi_b_queries(pi_b_forward):
    assert move_query(pi_b_forward, 4, 1) == (10, 6)
    assert locate(pi_b_forward, 5) == 1
    assert locate(pi_b_forward, 0) == 0
    assert locate(pi_b_forward, 11) == 7


def test_pi_b_orbit(pi_b_forward):
    orbit = list(iterate(pi_b_forward, 0, 0, 5))
    assert orbit == [(0, 0), (6, 2), (5, 1), (11, 7), (0, 0)]


def test_iterate_edge_cases(pi_b_forward):
    assert list(iterate(pi_b_forward, 0, 0, 0)) == []
    with pytest.raises(QueryContractError):
        list(iterate(pi_b_forward, 4, 0, 3))


def test_exhaustive_queries_both_directions(pi_b_forward, pi_b_inverse):
    counter = QueryCounter()
    for i in range(12):
        j = locate(pi_b_forward, i)
        image, k = move_query(pi_b_forward, i, j, counter=counter)
        assert image == PI_B[i]
        assert k == locate(pi_b_forward, image)
        back, _ = move_query(pi_b_inverse, image, locate(pi_b_inverse, image), counter=counter)
        assert back == i
    assert counter.queries == 24
    assert counter.max_steps < 4
    assert sum(counter.histogram.values()) == 24


def test_query_contract(pi_b_forward):
    with pytest.raises(QueryContractError):
        move_query(pi_b_forward, 4, 0)
    with pytest.raises(QueryContractError):
        move_query(pi_b_forward, 0, 8)
    # unchecked queries skip the test
    assert move_query(pi_b_forward, 3, 1, checked=False) == (9, 5)


def test_locate_range(pi_b_forward):
    with pytest.raises(PositionRangeError):
        locate(pi_b_forward, 12)
    with pytest.raises(PositionRangeError):
        locate(pi_b_forward, -1)


def test_scan_bound_on_random_maps():
    rng = np.random.default_rng(42)
    for _ in range(30):
        n = int(rng.integers(1, 400))
        imap = random_interval_permutation(rng, n, int(rng.integers(1, n + 1)))
        for alpha in (2, 4, 8):
            pair = balance(imap, alpha)
            forward, inverse = extract_forward(pair), extract_inverse(pair)
            counter = QueryCounter()
            i, j = 0, 0
            for _ in range(n):
                i, j = move_query(forward, i, j, counter=counter)
            assert counter.max_steps <= max_scan_length(forward) < 2 * alpha
            assert max_scan_length(inverse) < 2 * alpha


def test_from_interval_map_unbalanced(pi_b):
    ms = from_interval_map(pi_b, 2)
    assert ms.P_rank.tolist() == [1, 0, 0, 0, 0, 0, 0]
    assert max_scan_length(ms) == 5
    violation = validate_move_structure(ms)
    assert violation is not None
    assert violation.message.startswith("output interval at 6 holds 5 starts")


def test_validate_balanced(pi_b_forward, pi_b_inverse):
    assert validate_move_structure(pi_b_forward) is None
    assert validate_move_structure(pi_b_inverse) is None


def test_validate_rank_contract(pi_b_forward):
    broken = MoveStructure(
        n=12,
        P_prime=pi_b_forward.P_prime,
        P_pi_prime=pi_b_forward.P_pi_prime,
        P_rank=np.array([2, 4, 1, 1, 1, 0, 0, 0], dtype=np.int64),
        alpha=2,
    )
    assert validate_move_structure(broken).message == "P_rank contract broken at index 1"


def test_serialize_layout(pi_b_forward):
    data = serialize(pi_b_forward)
    assert data[:8] == b"MVST0001"
    assert len(data) == HEADER.size + 8 * (3 * 8 + 1)
    assert deserialize(data) == pi_b_forward


def test_round_trip_random_structures(tmp_path):
    rng = np.random.default_rng(5)
    for _ in range(100):
        n = int(rng.integers(1, 200))
        imap = random_interval_permutation(rng, n, int(rng.integers(1, n + 1)))
        alpha = int(rng.choice([2, 4, 8, 16]))
        ms = extract_forward(balance(imap, alpha))
        assert deserialize(serialize(ms)) == ms
    path = tmp_path / "last.mvst"
    save(ms, path)
    assert load(path) == ms


def test_alpha_must_fit_header(pi_a):
    ms = extract_forward(balance(pi_a, 2))
    huge = MoveStructure(ms.n, ms.P_prime, ms.P_pi_prime, ms.P_rank, alpha=2**32)
    with pytest.raises(ParameterError):
        serialize(huge)


@pytest.mark.parametrize(
    "mutate, message, offset",
    [
        (lambda b: b[:4], "missing magic", 0),
        (lambda b: b"XXXX" + b[4:], "bad magic", 0),
        (lambda b: b[:20], "truncated header", 20),
        (lambda b: b[:-1], "truncated body", None),
        (lambda b: b + b"\x00", "trailing bytes", None),
    ],
)
def test_deserialize_rejects_damaged_streams(pi_b_forward, mutate, message, offset):
    data = serialize(pi_b_forward)
    with pytest.raises(MoveFormatError, match=message) as info:
        deserialize(mutate(data))
    if offset is not None:
        assert info.value.offset == offset


def test_deserialize_reports_offset_of_broken_start(pi_b_forward):
    data = bytearray(serialize(pi_b_forward))
    # P'[2] = 6 becomes 0
    data[HEADER.size + 16] = 0
    with pytest.raises(MoveFormatError, match="P' not strictly increasing at index 2") as info:
        deserialize(bytes(data))
    assert info.value.offset == HEADER.size + 16


def test_random_corruption_never_crashes(pi_b_forward):
    rng = np.random.default_rng(11)
    original = serialize(pi_b_forward)
    for _ in range(300):
        data = bytearray(original)
        position = int(rng.integers(len(data)))
        data[position] = int(rng.integers(256))
        try:
            ms = deserialize(bytes(data))
        except MoveFormatError:
            continue
        assert validate_move_structure(ms) is None


def test_header_checks(pi_b_forward):
    data = bytearray(serialize(pi_b_forward))
    data[24] = 1
    with pytest.raises(MoveFormatError, match="alpha must be at least 2") as info:
        deserialize(bytes(data))
    assert info.value.offset == 24

    data = bytearray(serialize(pi_b_forward))
    data[28] = 1
    with pytest.raises(MoveFormatError, match="reserved") as info:
        deserialize(bytes(data))
    assert info.value.offset == 28
