"""
Oracle Module

Brute-force references for tests: explicit suffix structures of small texts,
explicit permutation evaluation, and a naive balancer that rescans every
interval after each split. Nothing here is meant to scale.
"""

from __future__ import annotations

import logging
from bisect import bisect_left, bisect_right
from dataclasses import dataclass

import numpy as np

from config import check_alpha
from errors import ParameterError, PositionRangeError
from intervals import IntervalMap
from rlbwt import Rlbwt
from utils import TERMINATOR, TERMINATOR_TOKEN

logger = logging.getLogger(__name__)

MAX_ORACLE_N = 100_000


@dataclass(frozen=True, eq=False)
class ExplicitText:
    """
    A small text with every suffix structure materialised.

    Attributes:
        text (bytes): T, terminator 0x00 last
        SA, ISA, LCP, PLCP (numpy.ndarray): By definition
        bwt (bytes): BWT[i] = T[SA[i] - 1 mod n]
        rlbwt (Rlbwt): Run-compressed BWT
    """

    text: bytes
    SA: np.ndarray
    ISA: np.ndarray
    LCP: np.ndarray
    PLCP: np.ndarray
    bwt: bytes
    rlbwt: Rlbwt

    @property
    def n(self):
        return len(self.text)


def _codes(text):
    if isinstance(text, str):
        text = text.replace(TERMINATOR_TOKEN, "\x00").encode("latin-1")
    codes = np.frombuffer(bytes(text), dtype=np.uint8)
    if codes.size == 0 or codes[-1] != TERMINATOR:
        raise ParameterError("text must end with the terminator")
    if np.count_nonzero(codes == TERMINATOR) != 1:
        raise ParameterError("text must contain exactly one terminator")
    if codes.size > MAX_ORACLE_N:
        raise ParameterError(f"text of length {codes.size} is too long for the oracle (max {MAX_ORACLE_N})")
    return codes


def suffix_array(codes):
    """
    Suffix array by prefix doubling on rotations.

    With a unique smallest terminator at the end, rotation order and suffix
    order coincide.
    """
    n = len(codes)
    rank = np.asarray(codes, dtype=np.int64)
    k = 1
    while True:
        second = np.roll(rank, -k)
        sa = np.lexsort((second, rank))
        changed = (np.diff(rank[sa]) != 0) | (np.diff(second[sa]) != 0)
        rank = np.empty(n, dtype=np.int64)
        rank[sa] = np.concatenate(([0], np.cumsum(changed)))
        if rank[sa[-1]] == n - 1:
            return sa.astype(np.int64)
        k *= 2


def kasai_lcp(codes, sa, isa):
    """LCP[i] = lcp(T[SA[i-1]:], T[SA[i]:]), LCP[0] = 0."""
    n = len(sa)
    text = codes.tolist()
    lcp = np.zeros(n, dtype=np.int64)
    k = 0
    for i in range(n):
        rank = int(isa[i])
        if rank == 0:
            k = 0
            continue
        j = int(sa[rank - 1])
        while i + k < n and j + k < n and text[i + k] == text[j + k]:
            k += 1
        lcp[rank] = k
        if k:
            k -= 1
    return lcp


def naive_suffix_structures(text):
    """
    Build SA, ISA, BWT, RLBWT, LCP and PLCP of a text by definition.

    Args:
        text (str | bytes): Text ending in the terminator ('$' in a str)

    Returns:
        tuple: (SA, ISA, BWT bytes, Rlbwt, LCP, PLCP)

    Raises:
        ParameterError: If the terminator is missing or repeated
    """
    codes = _codes(text)
    n = len(codes)
    sa = suffix_array(codes)
    isa = np.empty(n, dtype=np.int64)
    isa[sa] = np.arange(n, dtype=np.int64)
    bwt = codes[(sa - 1) % n].tobytes()
    lcp = kasai_lcp(codes, sa, isa)
    plcp = lcp[isa]
    return sa, isa, bwt, Rlbwt.from_bwt(bwt), lcp, plcp


def explicit_text(text):
    """ExplicitText from a 'banana$'-style string or raw bytes."""
    sa, isa, bwt, rlbwt, lcp, plcp = naive_suffix_structures(text)
    return ExplicitText(_codes(text).tobytes(), sa, isa, lcp, plcp, bwt, rlbwt)


def naive_lf(rlbwt):
    """
    Explicit LF: the row of BWT[i] in the first column, ties by BWT order.

    Returns:
        numpy.ndarray: LF(0), ..., LF(n-1)
    """
    bwt = np.frombuffer(rlbwt.to_bwt(), dtype=np.uint8)
    order = np.argsort(bwt, kind="stable")
    lf = np.empty(len(bwt), dtype=np.int64)
    lf[order] = np.arange(len(bwt), dtype=np.int64)
    return lf


def naive_move(imap, i):
    """
    pi(i) by a linear scan for the interval containing i.

    Raises:
        PositionRangeError: If i is outside [0, n)
    """
    if not 0 <= i < imap.n:
        raise PositionRangeError(f"position {i} outside [0, {imap.n})")
    starts = imap.P.tolist()
    j = 0
    while starts[j + 1] <= i:
        j += 1
    return int(imap.P_pi[j]) + (i - starts[j])


def _first_heavy(starts, inner, n, alpha):
    # (alpha+1)-largest start of `inner` inside the first heavy interval of `starts`
    ends = starts[1:] + [n]
    for start, end in zip(starts, ends):
        lo = bisect_right(inner, start)
        hi = bisect_left(inner, end)
        if hi - lo >= 2 * alpha:
            return inner[hi - alpha - 1]
    return None


def naive_balance(imap, alpha):
    """
    Balance by repeated full rescans.

    While some output interval holds 2*alpha or more input starts, cut it at
    the (alpha+1)-largest of them and add the matching input start; then the
    same with the roles swapped, until neither side has a heavy interval.

    Returns:
        IntervalMap: Balanced map of the same permutation
    """
    alpha = check_alpha(alpha)
    n = imap.n
    pi = imap.expand().astype(np.int64).tolist()
    pi_inv = [0] * n
    for i, v in enumerate(pi):
        pi_inv[v] = i

    inputs = set(imap.P[:-1].tolist())
    splits = 0
    while True:
        in_starts = sorted(inputs)
        out_starts = sorted(pi[p] for p in in_starts)
        y = _first_heavy(out_starts, in_starts, n, alpha)
        if y is not None:
            inputs.add(pi_inv[y])
            splits += 1
            continue
        x = _first_heavy(in_starts, out_starts, n, alpha)
        if x is not None:
            inputs.add(x)
            splits += 1
            continue
        break

    starts = sorted(inputs)
    logger.debug(f"Naive balance: {imap.r} -> {len(starts)} intervals after {splits} splits")
    return IntervalMap.from_arrays(n, starts + [n], [pi[p] for p in starts])


def random_interval_permutation(rng, n, r):
    """
    Random permutation of [0, n) made of r blocks moved as wholes.

    Adjacent blocks that stay adjacent merge, so the minimal interval count
    can come out below r.

    Args:
        rng (numpy.random.Generator): Source of randomness
        n (int): Domain size
        r (int): Number of blocks, 1 <= r <= n

    Returns:
        IntervalMap: Map with r input intervals
    """
    if not 1 <= r <= n:
        raise ParameterError(f"need 1 <= r <= n, got r={r}, n={n}")
    cuts = rng.choice(np.arange(1, n), size=r - 1, replace=False) if r > 1 else []
    P = np.concatenate(([0], np.sort(cuts), [n])).astype(np.int64)
    lengths = np.diff(P)
    order = rng.permutation(r)
    images = np.empty(r, dtype=np.int64)
    images[order] = np.concatenate(([0], np.cumsum(lengths[order])[:-1]))
    return IntervalMap.from_arrays(n, P, images)


def random_text(rng, n, sigma):
    """
    Random text of length n over `sigma` lowercase letters plus the terminator.

    Returns:
        bytes: n-1 letters followed by 0x00
    """
    if n < 1:
        raise ParameterError("text length must be positive")
    letters = rng.integers(ord("a"), ord("a") + sigma, size=n - 1, dtype=np.uint8)
    return letters.tobytes() + bytes([TERMINATOR])


def random_repetitive_text(rng, n, sigma, period, mutation_rate=0.02):
    """
    Random text built from one repeated block with point mutations.

    Gives BWTs with far fewer runs than random_text at the same n.
    """
    if n < 1:
        raise ParameterError("text length must be positive")
    block = rng.integers(ord("a"), ord("a") + sigma, size=max(1, period), dtype=np.uint8)
    body = np.resize(block, n - 1)
    mutate = rng.random(n - 1) < mutation_rate
    body[mutate] = rng.integers(ord("a"), ord("a") + sigma, size=int(mutate.sum()), dtype=np.uint8)
    return body.tobytes() + bytes([TERMINATOR])
