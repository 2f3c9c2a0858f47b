"""
Interval maps of runny permutations.

A permutation of [0, n) that moves long blocks contiguously is stored as its
input interval starts P (with the sentinel P[r] = n), the image P_pi[j] of each
start, and tau, the rank of each image among all images. Everything else the
move structures need (output starts, the inverse map, the explicit
permutation for testing) is derived from these three arrays.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from errors import IntervalValidationError

logger = logging.getLogger(__name__)

POSITION_DTYPE = np.uint64
RANK_DTYPE = np.int64


class Violation(NamedTuple):
    """First broken invariant found by a validator."""

    message: str
    field: str
    index: int = -1

    def __str__(self):
        return self.message


class OutputStarts(NamedTuple):
    """Output interval starts Q (sentinel n last) and the inverse of tau."""

    Q: np.ndarray
    tau_inv: np.ndarray


def as_position_array(values, name="values"):
    """
    Convert a sequence of non-negative integers to a position array.

    Args:
        values: Sequence or array of integers
        name (str): Name used in error messages

    Returns:
        numpy.ndarray: uint64 array

    Raises:
        IntervalValidationError: If the values are not non-negative integers
    """
    if isinstance(values, np.ndarray) and values.dtype.kind == "u":
        return values.astype(POSITION_DTYPE, copy=False)
    try:
        arr = np.asarray(values, dtype=np.int64)
    except (TypeError, ValueError, OverflowError) as e:
        raise IntervalValidationError(f"{name} must contain integers: {str(e)}") from e
    if arr.ndim != 1:
        raise IntervalValidationError(f"{name} must be one-dimensional")
    negative = np.flatnonzero(arr < 0)
    if negative.size:
        i = int(negative[0])
        raise IntervalValidationError(f"{name} has negative value {int(arr[i])} at index {i}")
    return arr.astype(POSITION_DTYPE)


def _ranks_of(values):
    order = np.argsort(values, kind="stable")
    ranks = np.empty(len(values), dtype=RANK_DTYPE)
    ranks[order] = np.arange(len(values), dtype=RANK_DTYPE)
    return ranks


@dataclass(frozen=True, eq=False)
class IntervalMap:
    """
    A runny permutation given by its input intervals.

    Attributes:
        n (int): Domain size
        P (numpy.ndarray): r+1 input starts, P[0] = 0 and P[r] = n
        P_pi (numpy.ndarray): r images, P_pi[j] = pi(P[j])
        tau (numpy.ndarray): r ranks, tau[j] = rank of P_pi[j] among P_pi
    """

    n: int
    P: np.ndarray
    P_pi: np.ndarray
    tau: np.ndarray

    @classmethod
    def from_arrays(cls, n, P, P_pi, tau=None, validate=True):
        """
        Build an interval map from plain sequences.

        Args:
            n (int): Domain size
            P: Input starts including the sentinel n
            P_pi: Image of each start
            tau: Ranks of the images; derived from P_pi when omitted
            validate (bool): Check every invariant before returning

        Returns:
            IntervalMap: The map

        Raises:
            IntervalValidationError: If validation is requested and fails
        """
        P = as_position_array(P, "P")
        P_pi = as_position_array(P_pi, "P_pi")
        if tau is None:
            tau = _ranks_of(P_pi)
        else:
            tau = np.asarray(tau, dtype=RANK_DTYPE)
        imap = cls(int(n), P, P_pi, tau)
        if validate:
            violation = validate_interval_map(imap)
            if violation is not None:
                raise IntervalValidationError(str(violation))
        return imap

    @property
    def r(self):
        return len(self.P_pi)

    def lengths(self):
        """Length of every input interval."""
        return np.diff(self.P).astype(np.int64)

    def expand(self):
        """
        Evaluate the permutation at every position.

        Returns:
            numpy.ndarray: pi(0), ..., pi(n-1)
        """
        shift = self.P_pi.astype(np.int64) - self.P[:-1].astype(np.int64)
        values = np.repeat(shift, self.lengths()) + np.arange(self.n, dtype=np.int64)
        return values.astype(POSITION_DTYPE)

    def inverse(self):
        """
        Interval map of the inverse permutation.

        The output intervals become input intervals: P <- Q, P_pi <- P[tau^-1]
        and tau <- tau^-1.
        """
        Q, tau_inv = output_starts(self)
        return IntervalMap(self.n, Q, self.P[:-1][tau_inv], tau_inv)

    def __eq__(self, other):
        if not isinstance(other, IntervalMap):
            return NotImplemented
        return (
            self.n == other.n
            and np.array_equal(self.P, other.P)
            and np.array_equal(self.P_pi, other.P_pi)
            and np.array_equal(self.tau, other.tau)
        )

    __hash__ = None


def intervals_from_permutation(pi):
    """
    Find the maximal contiguously mapped input intervals of a permutation.

    Args:
        pi: Explicit permutation over [0, n)

    Returns:
        IntervalMap: Minimal interval map of pi

    Raises:
        IntervalValidationError: If pi is empty or not a bijection on [0, n)
    """
    values = as_position_array(pi, "permutation")
    n = len(values)
    if n == 0:
        raise IntervalValidationError("permutation is empty")

    out_of_range = np.flatnonzero(values >= n)
    if out_of_range.size:
        i = int(out_of_range[0])
        raise IntervalValidationError(f"value {int(values[i])} out of range at index {i}")

    order = np.argsort(values, kind="stable")
    duplicates = np.flatnonzero(values[order][1:] == values[order][:-1])
    if duplicates.size:
        i = int(order[duplicates[0] + 1])
        raise IntervalValidationError(f"duplicate value {int(values[i])} at index {i}")

    breaks = np.flatnonzero(values[1:] != values[:-1] + 1) + 1
    P = np.concatenate(([0], breaks, [n])).astype(POSITION_DTYPE)
    P_pi = values[P[:-1].astype(np.int64)]
    return IntervalMap(n, P, P_pi, _ranks_of(P_pi))


def invert_tau(tau):
    """
    Invert a rank sequence.

    Args:
        tau: Ranks forming a permutation of [0, r)

    Returns:
        numpy.ndarray: tau_inv with tau_inv[tau[j]] = j

    Raises:
        IntervalValidationError: If tau is not a permutation of [0, r)
    """
    tau = np.asarray(tau)
    if tau.size and tau.dtype.kind not in "iu":
        raise IntervalValidationError("tau must contain integers")
    r = len(tau)
    tau = tau.astype(RANK_DTYPE)
    out_of_range = np.flatnonzero((tau < 0) | (tau >= r))
    if out_of_range.size:
        j = int(out_of_range[0])
        raise IntervalValidationError(f"tau is not a permutation: rank {int(tau[j])} at index {j}")
    counts = np.bincount(tau, minlength=r)
    repeated = np.flatnonzero(counts != 1)
    if repeated.size:
        k = int(repeated[0])
        raise IntervalValidationError(f"tau is not a permutation: rank {k} appears {int(counts[k])} times")
    tau_inv = np.empty(r, dtype=RANK_DTYPE)
    tau_inv[tau] = np.arange(r, dtype=RANK_DTYPE)
    return tau_inv


def output_starts(imap):
    """
    Sorted output interval starts with the sentinel n appended.

    Returns:
        OutputStarts: Q with Q[k] = P_pi[tau_inv[k]] and Q[r] = n, and tau_inv

    Raises:
        IntervalValidationError: If tau does not sort P_pi
    """
    tau_inv = invert_tau(imap.tau)
    images = as_position_array(imap.P_pi, "P_pi")[tau_inv]
    Q = np.concatenate((images, np.array([imap.n], dtype=POSITION_DTYPE)))
    bad = np.flatnonzero(Q[1:] <= Q[:-1])
    if bad.size:
        k = int(bad[0]) + 1
        raise IntervalValidationError(f"output starts not strictly increasing at rank {k}")
    return OutputStarts(Q, tau_inv)


def validate_interval_map(imap) -> Optional[Violation]:
    """
    Check every interval map invariant.

    Args:
        imap (IntervalMap): Map to check

    Returns:
        Violation: The first broken invariant, or None when the map is valid
    """
    n, tau = imap.n, imap.tau
    P = np.asarray(imap.P, dtype=np.int64)
    P_pi = np.asarray(imap.P_pi, dtype=np.int64)
    r = len(P_pi)

    if n < 1:
        return Violation("n must be positive", "n")
    if r < 1:
        return Violation("at least one interval is required", "P_pi")
    if len(P) != r + 1:
        return Violation(f"P has {len(P)} entries, expected {r + 1}", "P")
    if len(tau) != r:
        return Violation(f"tau has {len(tau)} entries, expected {r}", "tau")
    if P[0] != 0:
        return Violation("P[0] must be 0", "P", 0)

    bad = np.flatnonzero(P[1:] <= P[:-1])
    if bad.size:
        k = int(bad[0]) + 1
        return Violation(f"P not strictly increasing at index {k}", "P", k)
    if P[r] != n:
        return Violation(f"P[{r}] must equal n={n}", "P", r)

    bad = np.flatnonzero(P_pi >= n)
    if bad.size:
        j = int(bad[0])
        return Violation(f"P_pi out of range at index {j}", "P_pi", j)

    order = np.argsort(P_pi, kind="stable")
    ordered = P_pi[order]
    bad = np.flatnonzero(ordered[1:] == ordered[:-1])
    if bad.size:
        j = int(order[bad[0] + 1])
        return Violation(f"P_pi not distinct at index {j}", "P_pi", j)

    tau = np.asarray(tau, dtype=RANK_DTYPE)
    bad = np.flatnonzero((tau < 0) | (tau >= r))
    if bad.size:
        j = int(bad[0])
        return Violation(f"tau out of range at index {j}", "tau", j)
    counts = np.bincount(tau, minlength=r)
    bad = np.flatnonzero(counts != 1)
    if bad.size:
        k = int(bad[0])
        return Violation(f"tau is not a permutation (rank {k})", "tau", k)

    tau_inv = np.empty(r, dtype=RANK_DTYPE)
    tau_inv[tau] = np.arange(r, dtype=RANK_DTYPE)
    bad = np.flatnonzero(P_pi[tau_inv] != ordered)
    if bad.size:
        k = int(bad[0])
        return Violation(f"tau inconsistent with P_pi at rank {k}", "tau", int(tau_inv[k]))
    if ordered[0] != 0:
        return Violation("smallest output start must be 0", "P_pi", int(order[0]))

    Q = np.append(ordered, n)
    out_lengths = np.diff(Q)[tau]
    bad = np.flatnonzero(out_lengths != np.diff(P))
    if bad.size:
        j = int(bad[0])
        return Violation(f"interval lengths differ at index {j}", "P_pi", j)
    return None
