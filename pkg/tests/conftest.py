import numpy as np
import pytest

from intervals import intervals_from_permutation
from oracle import explicit_text
from rlbwt import Rlbwt

PI_A = [4, 5, 6, 7, 0, 1, 2, 3]
PI_B = [6, 7, 8, 9, 10, 11, 5, 4, 3, 2, 1, 0]
BANANA_RUNS = [(ord("a"), 1), (ord("n"), 2), (ord("b"), 1), (0, 1), (ord("a"), 2)]
BANANA_TEXT_RLBWT = "a 1\nn 2\nb 1\n$ 1\na 2\n"


@pytest.fixture
def pi_a():
    return intervals_from_permutation(PI_A)


@pytest.fixture
def pi_b():
    return intervals_from_permutation(PI_B)


@pytest.fixture
def identity():
    return intervals_from_permutation(list(range(10)))


@pytest.fixture
def banana():
    return explicit_text("banana$")


@pytest.fixture
def banana_rlbwt():
    return Rlbwt.from_runs(BANANA_RUNS)


@pytest.fixture
def banana_file(tmp_path):
    path = tmp_path / "banana.rlbwt"
    path.write_text(BANANA_TEXT_RLBWT)
    return path


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
