"""
RLBWT Module

Reads and writes run-length encoded BWTs and derives every permutation the
rest of the package balances from them: LF and FL as interval maps, the phi
map of the suffix array, the first-column symbol of each balanced FL interval
(RF), and sampled ISA positions for random text access.
"""

from __future__ import annotations

import logging
import os
import re
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from balancer import DEFAULT_ALPHA, balance, extract_forward, extract_inverse
from config import AUTO, BINARY, TEXT
from errors import InputMismatchError, ParameterError, RlbwtFormatError
from intervals import POSITION_DTYPE, RANK_DTYPE, IntervalMap
from movequery import move_query
from utils import TERMINATOR, ceil_div, format_symbol_token, parse_symbol_token

logger = logging.getLogger(__name__)

MAGIC = b"RLBW0001"
HEADER = struct.Struct("<8sQ")
RUN_DTYPE = np.dtype([("symbol", "u1"), ("length", "<u8")])

BINARY_SUFFIXES = (".rlbw", ".bin")
TEXT_SUFFIXES = (".txt", ".rlbwt", ".runs")

_RUN_LINE = re.compile(r"^(\S+)\s+(\d+)$")


def _exclusive_cumsum(values):
    out = np.zeros(len(values) + 1, dtype=POSITION_DTYPE)
    np.cumsum(values, out=out[1:])
    return out


def _first_problem(symbols, lengths):
    """First broken run invariant as (message, run index), or None."""
    if len(symbols) == 0:
        return "no runs", -1
    zero = np.flatnonzero(lengths == 0)
    if zero.size:
        return "zero-length run", int(zero[0])
    same = np.flatnonzero(symbols[1:] == symbols[:-1])
    if same.size:
        return "adjacent runs share symbol", int(same[0]) + 1
    terminators = np.flatnonzero(symbols == TERMINATOR)
    if terminators.size == 0:
        return "missing terminator", -1
    if terminators.size > 1:
        return "duplicate terminator", int(terminators[1])
    if lengths[terminators[0]] != 1:
        return "terminator run must have length 1", int(terminators[0])
    return None


@dataclass(frozen=True, eq=False)
class Rlbwt:
    """
    A run-length encoded BWT.

    Attributes:
        symbols (numpy.ndarray): uint8 symbol of each run; 0 is the terminator
        lengths (numpy.ndarray): uint64 length of each run
    """

    symbols: np.ndarray
    lengths: np.ndarray

    @classmethod
    def from_runs(cls, runs):
        """
        Build and validate from (symbol, length) pairs.

        Raises:
            RlbwtFormatError: If the runs break an invariant
        """
        runs = list(runs)
        symbols = np.array([c for c, _ in runs], dtype=np.uint8)
        lengths = np.array([length for _, length in runs], dtype=POSITION_DTYPE)
        problem = _first_problem(symbols, lengths)
        if problem is not None:
            message, index = problem
            if index >= 0:
                message = f"run {index}: {message}"
            raise RlbwtFormatError(message)
        return cls(symbols, lengths)

    @classmethod
    def from_bwt(cls, bwt):
        """Run-compress an explicit BWT given as bytes (terminator 0x00)."""
        arr = np.frombuffer(bytes(bwt), dtype=np.uint8)
        if arr.size == 0:
            raise RlbwtFormatError("no runs")
        heads = np.concatenate(([0], np.flatnonzero(arr[1:] != arr[:-1]) + 1))
        lengths = np.diff(np.append(heads, arr.size))
        return cls.from_runs(zip(arr[heads].tolist(), lengths.tolist()))

    @property
    def n(self):
        return int(self.lengths.sum())

    @property
    def r(self):
        return len(self.symbols)

    @property
    def sigma(self):
        return int(np.unique(self.symbols).size)

    def runs(self):
        return list(zip(self.symbols.tolist(), self.lengths.tolist()))

    def run_heads(self):
        """BWT position of every run head, with n appended."""
        return _exclusive_cumsum(self.lengths)

    def symbol_counts(self):
        """Occurrences of every byte value (the C table is their exclusive prefix sum)."""
        counts = np.zeros(256, dtype=POSITION_DTYPE)
        np.add.at(counts, self.symbols, self.lengths)
        return counts

    def to_bwt(self):
        return np.repeat(self.symbols, self.lengths.astype(np.int64)).tobytes()

    def __eq__(self, other):
        if not isinstance(other, Rlbwt):
            return NotImplemented
        return np.array_equal(self.symbols, other.symbols) and np.array_equal(self.lengths, other.lengths)

    __hash__ = None


def _parse_text(data):
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as e:
        raise RlbwtFormatError(f"input is not UTF-8 text: {str(e)}", offset=e.start) from e

    runs = []
    lines = []
    for number, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        match = _RUN_LINE.match(line)
        if not match:
            raise RlbwtFormatError(f"expected '<symbol> <length>', got '{line}'", line=number)
        try:
            symbol = parse_symbol_token(match.group(1))
        except ValueError as e:
            raise RlbwtFormatError(str(e), line=number) from e
        runs.append((symbol, int(match.group(2))))
        lines.append(number)

    symbols = np.array([c for c, _ in runs], dtype=np.uint8)
    try:
        lengths = np.array([length for _, length in runs], dtype=POSITION_DTYPE)
    except OverflowError as e:
        raise RlbwtFormatError("run length does not fit 64 bits") from e
    problem = _first_problem(symbols, lengths)
    if problem is not None:
        message, index = problem
        raise RlbwtFormatError(message, line=lines[index] if index >= 0 else None)
    return Rlbwt(symbols, lengths)


def _parse_binary(data):
    if len(data) < len(MAGIC):
        raise RlbwtFormatError("missing magic", offset=0)
    if data[: len(MAGIC)] != MAGIC:
        raise RlbwtFormatError("bad magic", offset=0)
    if len(data) < HEADER.size:
        raise RlbwtFormatError("truncated header", offset=len(data))
    _, r = HEADER.unpack_from(data)
    expected = HEADER.size + RUN_DTYPE.itemsize * r
    if len(data) < expected:
        raise RlbwtFormatError(f"truncated runs: expected {expected} bytes, got {len(data)}", offset=len(data))
    if len(data) > expected:
        raise RlbwtFormatError(f"{len(data) - expected} trailing bytes", offset=expected)

    records = np.frombuffer(data, dtype=RUN_DTYPE, count=r, offset=HEADER.size)
    symbols = records["symbol"].astype(np.uint8)
    lengths = records["length"].astype(POSITION_DTYPE)
    problem = _first_problem(symbols, lengths)
    if problem is not None:
        message, index = problem
        offset = HEADER.size + RUN_DTYPE.itemsize * index if index >= 0 else None
        raise RlbwtFormatError(message, offset=offset)
    return Rlbwt(symbols, lengths)


def detect_format(path=None, data=b""):
    """
    Pick the RLBWT format from the file extension, falling back to the magic.

    Returns:
        str: 'text' or 'binary'
    """
    if path is not None:
        suffix = Path(path).suffix.lower()
        if suffix in BINARY_SUFFIXES:
            return BINARY
        if suffix in TEXT_SUFFIXES:
            return TEXT
    return BINARY if data.startswith(MAGIC) else TEXT


def read_rlbwt(source, fmt=AUTO):
    """
    Read and validate an RLBWT.

    Args:
        source: File path, raw bytes, or a binary stream
        fmt (str): 'text', 'binary' or 'auto'

    Returns:
        Rlbwt: The validated runs

    Raises:
        RlbwtFormatError: With a line number (text) or byte offset (binary)
    """
    path = None
    if isinstance(source, (str, os.PathLike)):
        path = source
        data = Path(source).read_bytes()
    elif isinstance(source, (bytes, bytearray, memoryview)):
        data = bytes(source)
    else:
        data = source.read()

    if fmt == AUTO:
        fmt = detect_format(path, data)
    if fmt == BINARY:
        rlbwt = _parse_binary(data)
    elif fmt == TEXT:
        rlbwt = _parse_text(data)
    else:
        raise ParameterError(f"unknown RLBWT format '{fmt}'")
    logger.info(f"Read RLBWT with n={rlbwt.n}, r={rlbwt.r}, sigma={rlbwt.sigma}")
    return rlbwt


def write_rlbwt(rlbwt, target, fmt=TEXT):
    """
    Write an RLBWT in the text or binary format.

    Args:
        rlbwt (Rlbwt): Runs to write
        target: File path or binary stream
        fmt (str): 'text' or 'binary'
    """
    if fmt == TEXT:
        lines = [f"{format_symbol_token(c)} {length}\n" for c, length in rlbwt.runs()]
        data = "".join(lines).encode("utf-8")
    elif fmt == BINARY:
        records = np.empty(rlbwt.r, dtype=RUN_DTYPE)
        records["symbol"] = rlbwt.symbols
        records["length"] = rlbwt.lengths
        data = HEADER.pack(MAGIC, rlbwt.r) + records.tobytes()
    else:
        raise ParameterError(f"unknown RLBWT format '{fmt}'")

    if isinstance(target, (str, os.PathLike)):
        Path(target).write_bytes(data)
    else:
        target.write(data)


def lf_intervals(rlbwt):
    """
    Interval map of LF, one input interval per run.

    The image of run head j is C[c_j] plus the occurrences of c_j in earlier
    runs, which a stable sort of the runs by symbol yields as a prefix sum.
    """
    order = np.argsort(rlbwt.symbols, kind="stable")
    images = np.empty(rlbwt.r, dtype=POSITION_DTYPE)
    images[order] = _exclusive_cumsum(rlbwt.lengths[order])[:-1]
    tau = np.empty(rlbwt.r, dtype=RANK_DTYPE)
    tau[order] = np.arange(rlbwt.r, dtype=RANK_DTYPE)
    return IntervalMap(rlbwt.n, rlbwt.run_heads(), images, tau)


def fl_intervals(rlbwt):
    """Interval map of FL, the inverse of LF."""
    return lf_intervals(rlbwt).inverse()


def run_symbols_fl(rlbwt, fl):
    """
    First-column symbol at the start of every balanced FL input interval.

    Returns:
        numpy.ndarray: RF, uint8, aligned with fl.P_prime[:-1]
    """
    if fl.n != rlbwt.n:
        raise InputMismatchError(f"FL structure has n={fl.n}, RLBWT has n={rlbwt.n}")
    block_ends = np.cumsum(rlbwt.symbol_counts())
    starts = np.asarray(fl.P_prime[:-1], dtype=POSITION_DTYPE)
    return np.searchsorted(block_ends, starts, side="right").astype(np.uint8)


@dataclass(frozen=True, eq=False)
class TextWalk:
    """What one text-order FL walk records."""

    isa_fl: np.ndarray
    heads_sa: list
    tails_sa: list


def _walk_text(fl, rf, step, rlbwt=None):
    """
    Visit the text left to right through FL, starting at ISA[0] = FL(0).

    Samples (ISA, rank) every `step` positions and, when `rlbwt` is given,
    records the text position sitting at every run head and run tail row.
    """
    n = fl.n
    if len(rf) != fl.r_prime:
        raise InputMismatchError(f"RF has {len(rf)} symbols, FL structure has {fl.r_prime} intervals")

    heads_sa = tails_sa = None
    if rlbwt is not None:
        if rlbwt.n != n:
            raise InputMismatchError(f"FL structure has n={n}, RLBWT has n={rlbwt.n}")
        heads = rlbwt.run_heads().tolist()
        head_run = {heads[k]: k for k in range(rlbwt.r)}
        tail_run = {heads[k + 1] - 1: k for k in range(rlbwt.r)}
        heads_sa = [0] * rlbwt.r
        tails_sa = [0] * rlbwt.r

    symbols = rf.tolist()
    samples = []
    row, rank = move_query(fl, 0, 0)
    first_row = row
    last = n - 1
    for x in range(n):
        if x % step == 0:
            samples.append((row, rank))
        if (symbols[rank] == TERMINATOR) != (x == last):
            raise InputMismatchError(f"terminator met at text position {x} of {n}")
        if heads_sa is not None:
            k = head_run.get(row)
            if k is not None:
                heads_sa[k] = x
            k = tail_run.get(row)
            if k is not None:
                tails_sa[k] = x
        row, rank = move_query(fl, row, rank, checked=False)
    if row != first_row:
        raise InputMismatchError("FL walk did not return to ISA[0] after n steps")

    isa_fl = np.array(samples, dtype=np.int64).reshape(-1, 2)
    return TextWalk(isa_fl, heads_sa, tails_sa)


def _phi_map(n, heads_sa, tails_sa):
    # phi(SA[head of run k]) = SA[tail of run k-1]; row 0 wraps to row n-1
    r = len(heads_sa)
    irreducible = np.array(heads_sa, dtype=np.int64)
    images = np.array([tails_sa[k - 1] for k in range(r)], dtype=np.int64)
    order = np.argsort(irreducible, kind="stable")
    starts = np.append(irreducible[order], n).astype(POSITION_DTYPE)
    return IntervalMap.from_arrays(n, starts, images[order], validate=False)


def phi_intervals(rlbwt, fl, rf):
    """
    Interval map of phi, where phi(SA[i]) = SA[i-1].

    Its input starts are the suffix array values at BWT run heads, read off
    an n-step FL walk in text order.
    """
    walk = _walk_text(fl, rf, ceil_div(rlbwt.n, rlbwt.r), rlbwt)
    return _phi_map(rlbwt.n, walk.heads_sa, walk.tails_sa)


def isa_samples(fl, rf, r):
    """
    ISA values every ceil(n/r) text positions, paired with their FL ranks.

    Args:
        fl (MoveStructure): Balanced MOVE(FL)
        rf (numpy.ndarray): RF aligned with fl
        r (int): Run count of the RLBWT fl was built from

    Returns:
        numpy.ndarray: (ceil(n/step), 2) array of (ISA value, rank) rows
    """
    return _walk_text(fl, rf, ceil_div(fl.n, r)).isa_fl


@dataclass(frozen=True, eq=False)
class LcpContext:
    """
    Everything the PLCP computation reads, all O(r) words.

    Attributes:
        fl (MoveStructure): Balanced MOVE(FL)
        RF (numpy.ndarray): First-column symbol per FL interval
        I (numpy.ndarray): Sorted irreducible positions
        phi_plus (numpy.ndarray): phi at every irreducible position
        isa_fl (numpy.ndarray): (ISA value, FL rank) every `step` text positions
        step (int): Sampling distance ceil(n/r)
    """

    fl: object
    RF: np.ndarray
    I: np.ndarray
    phi_plus: np.ndarray
    isa_fl: np.ndarray
    step: int

    @property
    def n(self):
        return self.fl.n

    @property
    def r(self):
        return len(self.I)

    @property
    def phi_map(self):
        starts = np.append(self.I, self.n).astype(POSITION_DTYPE)
        return IntervalMap.from_arrays(self.n, starts, self.phi_plus, validate=False)


def build_lcp_context(rlbwt, alpha=DEFAULT_ALPHA):
    """
    Build MOVE(FL), RF, and run the shared text-order walk.

    Returns:
        LcpContext: Context for lcp.plcp_from_context and lcp.seek
    """
    fl = extract_forward(balance(fl_intervals(rlbwt), alpha))
    rf = run_symbols_fl(rlbwt, fl)
    step = ceil_div(rlbwt.n, rlbwt.r)
    walk = _walk_text(fl, rf, step, rlbwt)
    phi = _phi_map(rlbwt.n, walk.heads_sa, walk.tails_sa)
    logger.info(f"Built LCP context: r={rlbwt.r}, FL intervals={fl.r_prime}, sample step={step}")
    return LcpContext(
        fl=fl,
        RF=rf,
        I=phi.P[:-1].astype(np.int64),
        phi_plus=phi.P_pi.astype(np.int64),
        isa_fl=walk.isa_fl,
        step=step,
    )


def permutation_map(rlbwt, perm, alpha=DEFAULT_ALPHA):
    """
    Interval map of one RLBWT permutation.

    Args:
        perm (str): 'lf', 'fl', 'phi' or 'phi-inv'
        alpha (int): Balancing parameter of the MOVE(FL) that phi is read through
    """
    if perm == "lf":
        return lf_intervals(rlbwt)
    if perm == "fl":
        return fl_intervals(rlbwt)
    if perm in ("phi", "phi-inv"):
        fl = extract_forward(balance(fl_intervals(rlbwt), alpha))
        phi = phi_intervals(rlbwt, fl, run_symbols_fl(rlbwt, fl))
        return phi if perm == "phi" else phi.inverse()
    raise ParameterError(f"unknown permutation '{perm}'")


def build_move_structure(rlbwt, perm, alpha=DEFAULT_ALPHA):
    """
    Balanced move structure for one RLBWT permutation.

    LF and FL come from one balancing of the LF map, phi and phi^-1 from one
    balancing of the phi map.

    Returns:
        tuple: (MoveStructure, BalancedPair)
    """
    if perm in ("lf", "fl"):
        pair = balance(lf_intervals(rlbwt), alpha)
        extract = extract_forward if perm == "lf" else extract_inverse
    elif perm in ("phi", "phi-inv"):
        pair = balance(permutation_map(rlbwt, "phi", alpha), alpha)
        extract = extract_forward if perm == "phi" else extract_inverse
    else:
        raise ParameterError(f"unknown permutation '{perm}'")
    return extract(pair), pair
