import numpy as np
import pytest

from balancer import balance, extract_forward, extract_inverse
from errors import ParameterError, PositionRangeError
from intervals import IntervalMap, validate_interval_map
from movequery import from_interval_map, max_scan_length, validate_move_structure
from oracle import (
    explicit_text,
    naive_balance,
    naive_lf,
    naive_move,
    naive_suffix_structures,
    random_interval_permutation,
    random_text,
)


def test_banana_structures(banana):
    assert banana.text == b"banana\x00"
    assert banana.SA.tolist() == [6, 5, 3, 1, 0, 4, 2]
    assert banana.ISA.tolist() == [4, 3, 6, 2, 5, 1, 0]
    assert banana.LCP.tolist() == [0, 0, 1, 3, 0, 0, 2]
    assert banana.PLCP.tolist() == [0, 3, 2, 1, 0, 0, 0]
    assert banana.bwt == b"annb\x00aa"
    assert banana.rlbwt.r == 5


def test_terminator_only():
    sa, isa, bwt, rlbwt, lcp, plcp = naive_suffix_structures("$")
    assert sa.tolist() == [0]
    assert lcp.tolist() == [0]
    assert bwt == b"\x00"
    assert rlbwt.runs() == [(0, 1)]


def test_run_of_one_letter():
    text = explicit_text("aaaa$")
    assert text.bwt == b"aaaa\x00"
    assert text.SA.tolist() == [4, 3, 2, 1, 0]
    assert text.LCP.tolist() == [0, 0, 1, 2, 3]


@pytest.mark.parametrize("text", ["banana", "ban$ana$", "", b"abc"])
def test_terminator_required(text):
    with pytest.raises(ParameterError):
        naive_suffix_structures(text)


def test_suffix_array_definition():
    rng = np.random.default_rng(1)
    for sigma in (2, 4, 16):
        text = explicit_text(random_text(rng, 250, sigma))
        suffixes = [text.text[i:] for i in text.SA.tolist()]
        assert suffixes == sorted(suffixes)
        assert np.array_equal(text.ISA[text.SA], np.arange(text.n))
        for k in range(1, text.n):
            a, b = suffixes[k - 1], suffixes[k]
            common = 0
            while common < min(len(a), len(b)) and a[common] == b[common]:
                common += 1
            assert text.LCP[k] == common
        assert np.array_equal(text.PLCP, text.LCP[text.ISA])


def test_naive_lf(banana):
    assert naive_lf(banana.rlbwt).tolist() == [1, 5, 6, 4, 0, 2, 3]


def test_naive_move(identity, pi_a, pi_b):
    assert naive_move(identity, 5) == 5
    assert naive_move(pi_a, 6) == 2
    assert naive_move(pi_b, 11) == 0
    with pytest.raises(PositionRangeError):
        naive_move(pi_b, 12)


def test_naive_balance_examples(identity, pi_b):
    assert naive_balance(identity, 2) == identity
    balanced = naive_balance(pi_b, 2)
    assert balanced.P.tolist() == [0, 3, 6, 7, 8, 9, 10, 11, 12]
    assert balanced.P_pi.tolist() == [6, 9, 5, 4, 3, 2, 1, 0]
    assert balanced.r <= 3 * pi_b.r


def _check_both_directions(imap, balanced, alpha):
    assert validate_interval_map(balanced) is None
    assert np.array_equal(balanced.expand(), imap.expand())
    forward = from_interval_map(balanced, alpha)
    inverse = from_interval_map(balanced.inverse(), alpha)
    assert validate_move_structure(forward) is None
    assert validate_move_structure(inverse) is None
    assert max_scan_length(forward) < 2 * alpha
    assert max_scan_length(inverse) < 2 * alpha


def test_naive_and_fast_balancers_agree_on_soundness():
    rng = np.random.default_rng(2718)
    for _ in range(100):
        n = int(rng.integers(1, 160))
        imap = random_interval_permutation(rng, n, int(rng.integers(1, n + 1)))
        alpha = int(rng.choice([2, 4, 8, 16]))

        _check_both_directions(imap, naive_balance(imap, alpha), alpha)

        pair = balance(imap, alpha)
        forward = extract_forward(pair)
        fast = IntervalMap.from_arrays(imap.n, forward.P_prime, forward.P_pi_prime)
        _check_both_directions(imap, fast, alpha)
        assert extract_inverse(pair) == from_interval_map(fast.inverse(), alpha)


def test_random_interval_permutation(rng):
    imap = random_interval_permutation(rng, 50, 7)
    assert imap.r == 7
    assert validate_interval_map(imap) is None
    assert sorted(imap.expand().tolist()) == list(range(50))
    assert random_interval_permutation(rng, 1, 1).expand().tolist() == [0]
    with pytest.raises(ParameterError):
        random_interval_permutation(rng, 5, 6)


def test_random_text(rng):
    text = random_text(rng, 30, 2)
    assert len(text) == 30
    assert text[-1] == 0
    assert set(text[:-1]) <= {ord("a"), ord("b")}
