"""
Move structures: constant-time evaluation of a balanced runny permutation.

A MoveStructure stores the balanced input starts P', the image of every start
and the rank of the interval that image falls in. A move query turns
(i, interval of i) into (pi(i), interval of pi(i)) with a forward scan from
that rank, which balancing keeps shorter than 2*alpha.
"""

from __future__ import annotations

import logging
import struct
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Optional

import numpy as np

from errors import MoveFormatError, ParameterError, PositionRangeError, QueryContractError
from intervals import POSITION_DTYPE, RANK_DTYPE, IntervalMap, Violation, validate_interval_map

logger = logging.getLogger(__name__)

MAGIC = b"MVST0001"
HEADER = struct.Struct("<8sQQII")
U32_MAX = 2**32 - 1


@dataclass(frozen=True, eq=False)
class MoveStructure:
    """
    Balanced move structure of one permutation.

    Attributes:
        n (int): Domain size
        P_prime (numpy.ndarray): r'+1 input starts, sentinel n last
        P_pi_prime (numpy.ndarray): r' images of the starts
        P_rank (numpy.ndarray): r' ranks, P_prime[P_rank[j]] <= P_pi_prime[j] < P_prime[P_rank[j]+1]
        alpha (int): Balancing parameter the structure satisfies
    """

    n: int
    P_prime: np.ndarray
    P_pi_prime: np.ndarray
    P_rank: np.ndarray
    alpha: int

    @property
    def r_prime(self):
        return len(self.P_pi_prime)

    @cached_property
    def _tables(self):
        # plain int lists: scalar indexing on them is much cheaper than on arrays
        return self.P_prime.tolist(), self.P_pi_prime.tolist(), self.P_rank.tolist()

    def __eq__(self, other):
        if not isinstance(other, MoveStructure):
            return NotImplemented
        return (
            self.n == other.n
            and self.alpha == other.alpha
            and np.array_equal(self.P_prime, other.P_prime)
            and np.array_equal(self.P_pi_prime, other.P_pi_prime)
            and np.array_equal(self.P_rank, other.P_rank)
        )

    __hash__ = None


@dataclass
class QueryCounter:
    """Scan-length instrumentation for move_query."""

    queries: int = 0
    steps: int = 0
    max_steps: int = 0
    histogram: dict = field(default_factory=dict)

    def record(self, steps):
        self.queries += 1
        self.steps += steps
        if steps > self.max_steps:
            self.max_steps = steps
        self.histogram[steps] = self.histogram.get(steps, 0) + 1


def _check_pair(ms, i, j):
    starts = ms._tables[0]
    if not (0 <= j < ms.r_prime and starts[j] <= i < starts[j + 1]):
        raise QueryContractError(f"position {i} is not in interval {j} of the move structure")


def move_query(ms, i, j, checked=True, counter: Optional[QueryCounter] = None):
    """
    Evaluate one step of the permutation.

    Args:
        ms (MoveStructure): Balanced structure
        i (int): Position
        j (int): Rank of the interval containing i
        checked (bool): Verify that interval j contains i
        counter (QueryCounter, optional): Receives the scan length

    Returns:
        tuple: (pi(i), rank of the interval containing pi(i))

    Raises:
        QueryContractError: If checked and i is not in interval j
    """
    if checked:
        _check_pair(ms, i, j)
    starts, images, ranks = ms._tables
    position = images[j] + (i - starts[j])
    k = ranks[j]
    steps = 0
    while starts[k + 1] <= position:
        k += 1
        steps += 1
    if counter is not None:
        counter.record(steps)
    return position, k


def locate(ms, i):
    """
    Rank of the interval containing position i, by binary search.

    Raises:
        PositionRangeError: If i is outside [0, n)
    """
    if not 0 <= i < ms.n:
        raise PositionRangeError(f"position {i} outside [0, {ms.n})")
    return int(np.searchsorted(ms.P_prime, np.uint64(i), side="right")) - 1


def iterate(ms, i0, j0, steps):
    """
    Lazily walk the orbit of i0.

    Yields `steps` pairs, the first being (i0, j0) itself.
    """
    if steps <= 0:
        return
    _check_pair(ms, i0, j0)
    i, j = i0, j0
    yield i, j
    for _ in range(steps - 1):
        i, j = move_query(ms, i, j, checked=False)
        yield i, j


def max_scan_length(ms):
    """
    Longest forward scan any move query on `ms` performs.

    The worst position of input interval j is its last one; its image lies
    P_pi[j] + len_j - 1, and the scan crosses every start in between.
    """
    starts = ms.P_prime.astype(np.int64)
    last_image = ms.P_pi_prime.astype(np.int64) + np.diff(starts) - 1
    landing = np.searchsorted(starts, last_image, side="right") - 1
    return int(np.max(landing - ms.P_rank))


def from_interval_map(imap, alpha):
    """
    Build a move structure over an arbitrary interval map.

    The ranks come from binary search; balance is whatever the map has.
    """
    P = np.asarray(imap.P).astype(POSITION_DTYPE)
    images = np.asarray(imap.P_pi).astype(POSITION_DTYPE)
    ranks = (np.searchsorted(P, images, side="right") - 1).astype(RANK_DTYPE)
    return MoveStructure(n=int(imap.n), P_prime=P, P_pi_prime=images, P_rank=ranks, alpha=int(alpha))


def validate_move_structure(ms) -> Optional[Violation]:
    """
    Check every move structure invariant, balance included.

    Returns:
        Violation: The first broken invariant, or None
    """
    n, alpha = ms.n, ms.alpha
    r = ms.r_prime
    if n < 1:
        return Violation("n must be positive", "n")
    if alpha < 2:
        return Violation(f"alpha must be at least 2, got {alpha}", "alpha")
    if r < 1:
        return Violation("at least one interval is required", "P_pi_prime")
    if len(ms.P_prime) != r + 1 or len(ms.P_rank) != r:
        return Violation("array lengths disagree with r'", "P_prime")

    starts = np.asarray(ms.P_prime, dtype=np.int64)
    images = np.asarray(ms.P_pi_prime, dtype=np.int64)
    ranks = np.asarray(ms.P_rank, dtype=np.int64)

    if starts[0] != 0:
        return Violation("P'[0] must be 0", "P_prime", 0)
    bad = np.flatnonzero(starts[1:] <= starts[:-1])
    if bad.size:
        k = int(bad[0]) + 1
        return Violation(f"P' not strictly increasing at index {k}", "P_prime", k)
    if starts[r] != n:
        return Violation(f"P'[{r}] must equal n={n}", "P_prime", r)

    bad = np.flatnonzero((images < 0) | (images >= n))
    if bad.size:
        j = int(bad[0])
        return Violation(f"P'_pi out of range at index {j}", "P_pi_prime", j)
    bad = np.flatnonzero((ranks < 0) | (ranks >= r))
    if bad.size:
        j = int(bad[0])
        return Violation(f"P_rank out of range at index {j}", "P_rank", j)
    bad = np.flatnonzero((starts[ranks] > images) | (images >= starts[ranks + 1]))
    if bad.size:
        j = int(bad[0])
        return Violation(f"P_rank contract broken at index {j}", "P_rank", j)

    shape = validate_interval_map(IntervalMap.from_arrays(n, starts, images, validate=False))
    if shape is not None:
        return Violation(f"not a permutation: {shape.message}", "P_pi_prime", shape.index)

    outputs = np.sort(images)
    weights = np.searchsorted(starts, np.append(outputs[1:], n), side="left") - np.searchsorted(
        starts, outputs, side="right"
    )
    heavy = np.flatnonzero(weights >= 2 * alpha)
    if heavy.size:
        k = int(heavy[0])
        return Violation(
            f"output interval at {int(outputs[k])} holds {int(weights[k])} starts (>= 2*alpha={2 * alpha})",
            "P_pi_prime",
            int(np.flatnonzero(images == outputs[k])[0]),
        )
    return None


def serialize(ms):
    """
    Encode a move structure in the MVST0001 format.

    Returns:
        bytes: Header followed by P', P'_pi and P_rank as little-endian u64
    """
    if ms.alpha > U32_MAX:
        raise ParameterError(f"alpha={ms.alpha} does not fit the 32-bit header field")
    header = HEADER.pack(MAGIC, ms.n, ms.r_prime, ms.alpha, 0)
    return b"".join(
        (
            header,
            np.asarray(ms.P_prime).astype("<u8").tobytes(),
            np.asarray(ms.P_pi_prime).astype("<u8").tobytes(),
            np.asarray(ms.P_rank).astype("<u8").tobytes(),
        )
    )


def _field_offset(r, violation):
    base = HEADER.size
    index = max(violation.index, 0)
    if violation.field == "P_prime":
        return base + 8 * index
    if violation.field == "P_pi_prime":
        return base + 8 * (r + 1 + index)
    if violation.field == "P_rank":
        return base + 8 * (2 * r + 1 + index)
    if violation.field == "alpha":
        return 24
    return 8


def deserialize(data, validate=True):
    """
    Decode an MVST0001 stream.

    Args:
        data (bytes): Encoded structure
        validate (bool): Re-check every invariant after decoding

    Returns:
        MoveStructure: The decoded structure

    Raises:
        MoveFormatError: On bad magic, truncation, trailing bytes or a broken invariant
    """
    data = bytes(data)
    if len(data) < len(MAGIC):
        raise MoveFormatError("missing magic", offset=0)
    if data[: len(MAGIC)] != MAGIC:
        raise MoveFormatError("bad magic", offset=0)
    if len(data) < HEADER.size:
        raise MoveFormatError("truncated header", offset=len(data))

    _, n, r, alpha, reserved = HEADER.unpack_from(data)
    if reserved != 0:
        raise MoveFormatError("reserved header field must be 0", offset=28)
    if n == 0:
        raise MoveFormatError("n must be positive", offset=8)
    if r == 0 or r > n:
        raise MoveFormatError(f"interval count {r} invalid for n={n}", offset=16)
    if alpha < 2:
        raise MoveFormatError(f"alpha must be at least 2, got {alpha}", offset=24)

    expected = HEADER.size + 8 * (3 * r + 1)
    if len(data) < expected:
        raise MoveFormatError(f"truncated body: expected {expected} bytes, got {len(data)}", offset=len(data))
    if len(data) > expected:
        raise MoveFormatError(f"{len(data) - expected} trailing bytes", offset=expected)

    body = np.frombuffer(data, dtype="<u8", count=3 * r + 1, offset=HEADER.size)
    ms = MoveStructure(
        n=n,
        P_prime=body[: r + 1].astype(POSITION_DTYPE),
        P_pi_prime=body[r + 1 : 2 * r + 1].astype(POSITION_DTYPE),
        P_rank=body[2 * r + 1 :].astype(RANK_DTYPE),
        alpha=alpha,
    )
    if validate:
        violation = validate_move_structure(ms)
        if violation is not None:
            raise MoveFormatError(violation.message, offset=_field_offset(r, violation))
    return ms


def save(ms, path):
    Path(path).write_bytes(serialize(ms))


def load(path, validate=True):
    return deserialize(Path(path).read_bytes(), validate=validate)
