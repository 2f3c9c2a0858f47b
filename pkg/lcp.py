"""
LCP Module

Computes the irreducible PLCP values of a text given only its RLBWT, using a
phi-style loop whose text accesses are simulated with MOVE(FL) and sampled ISA
positions, then streams the full LCP array by walking MOVE(phi^-1) from the
smallest suffix. Working memory stays proportional to the run count.
"""

from __future__ import annotations

import logging
import struct
from dataclasses import asdict, dataclass

import numpy as np

from balancer import DEFAULT_ALPHA, balance, extract_inverse
from errors import LcpFormatError, PositionRangeError, SinkError
from movequery import locate, move_query
from rlbwt import build_lcp_context

logger = logging.getLogger(__name__)

LCP_MAGIC = b"LCPA0001"
LCP_HEADER = struct.Struct("<8sQ")
CHUNK_SIZE = 1 << 16


@dataclass
class LcpStats:
    """Work counters of one irreducible PLCP computation."""

    comparisons: int = 0
    sequential_steps: int = 0
    seek_steps: int = 0
    jump_steps: int = 0

    @property
    def total_steps(self):
        return self.sequential_steps + self.seek_steps + self.jump_steps

    def as_dict(self):
        values = asdict(self)
        values["total_steps"] = self.total_steps
        return values


@dataclass
class TextCursor:
    """
    Reads T[pos] as RF[rank] while (row, rank) sits at ISA[pos] in MOVE(FL).
    """

    pos: int
    row: int
    rank: int

    def symbol(self, ctx):
        return int(ctx.RF[self.rank])

    def advance(self, fl):
        self.row, self.rank = move_query(fl, self.row, self.rank, checked=False)
        self.pos += 1


@dataclass(frozen=True, eq=False)
class PlcpPlus:
    """
    Irreducible PLCP values.

    Attributes:
        n (int): Text length
        I (numpy.ndarray): Irreducible positions in text order
        values (numpy.ndarray): PLCP at each of them
    """

    n: int
    I: np.ndarray
    values: np.ndarray

    def __eq__(self, other):
        if not isinstance(other, PlcpPlus):
            return NotImplemented
        return self.n == other.n and np.array_equal(self.I, other.I) and np.array_equal(self.values, other.values)

    __hash__ = None


def seek(pos, ctx, fl=None, stats=None):
    """
    Cursor at text position `pos`: nearest sample at or before it, then FL steps.

    Raises:
        PositionRangeError: If pos is outside [0, n)
    """
    fl = ctx.fl if fl is None else fl
    if not 0 <= pos < ctx.n:
        raise PositionRangeError(f"text position {pos} outside [0, {ctx.n})")
    k, delta = divmod(pos, ctx.step)
    row, rank = ctx.isa_fl[k]
    cursor = TextCursor(pos - delta, int(row), int(rank))
    for _ in range(delta):
        cursor.advance(fl)
    if stats is not None:
        stats.seek_steps += delta
    return cursor


def plcp_from_context(ctx, stats=None):
    """
    Irreducible PLCP values from a prebuilt context.

    For every irreducible position i (in text order) compare T[i+l:] with
    T[phi(i)+l:], where l starts from the previous value minus the distance
    travelled. T[i+l] is read by one cursor that only moves forward; T[phi(i)+l]
    needs a fresh seek each time.

    Returns:
        PlcpPlus: PLCP at every position of ctx.I
    """
    stats = LcpStats() if stats is None else stats
    fl = ctx.fl
    rf = ctx.RF.tolist()
    positions = ctx.I.tolist()
    phi = ctx.phi_plus.tolist()
    values = [0] * len(positions)

    text = seek(0, ctx, fl, stats)
    length = 0
    previous = 0
    for k, (i, j) in enumerate(zip(positions, phi)):
        if k:
            length = max(0, length - (i - previous))
        previous = i
        if i == j:
            # single-suffix text
            length = 0
            continue

        target = i + length
        while text.pos < target:
            text.advance(fl)
            stats.sequential_steps += 1
        other = seek(j + length, ctx, fl, stats)

        while True:
            stats.comparisons += 1
            if rf[text.rank] != rf[other.rank]:
                break
            length += 1
            text.advance(fl)
            other.advance(fl)
            stats.sequential_steps += 1
            stats.jump_steps += 1
        values[k] = length

    logger.debug(f"PLCP+ over n={ctx.n}: {stats.comparisons} comparisons, {stats.total_steps} FL steps")
    return PlcpPlus(ctx.n, ctx.I.astype(np.int64), np.array(values, dtype=np.int64))


def irreducible_plcp(rlbwt, alpha=DEFAULT_ALPHA, stats=None):
    """
    Irreducible PLCP values of the text behind an RLBWT.

    Args:
        rlbwt (Rlbwt): Validated runs
        alpha (int): Balancing parameter for MOVE(FL)
        stats (LcpStats, optional): Receives the work counters

    Returns:
        PlcpPlus: Positions and values
    """
    return plcp_from_context(build_lcp_context(rlbwt, alpha), stats)


def plcp_at(i, pp):
    """
    PLCP[i] from the irreducible values: PLCP+[k] - (i - I[k]) for the last I[k] <= i.

    Raises:
        PositionRangeError: If i is outside [0, n)
    """
    if not 0 <= i < pp.n:
        raise PositionRangeError(f"position {i} outside [0, {pp.n})")
    k = int(np.searchsorted(pp.I, i, side="right")) - 1
    return int(pp.values[k]) - (i - int(pp.I[k]))


def stream_lcp(pp, phi_inv, sink, chunk_size=CHUNK_SIZE):
    """
    Emit LCP[0..n-1] in order by walking MOVE(phi^-1) from SA[0] = n-1.

    Each interval of MOVE(phi^-1) stores the rank in I of its start; balance
    bounds the irreducible positions inside any interval by 2*alpha, so the
    forward fix-up of that rank is constant work.

    Returns:
        int: Number of values emitted
    """
    n = phi_inv.n
    positions = pp.I.tolist()
    values = pp.values.tolist()
    r = len(positions)
    starts = phi_inv.P_prime[:-1].astype(np.int64)
    start_rank = (np.searchsorted(pp.I, starts, side="right") - 1).tolist()

    emitted = 0
    buffer = []

    def flush():
        nonlocal emitted, buffer
        if not buffer:
            return
        try:
            sink(buffer)
        except Exception as e:
            raise SinkError(f"LCP sink failed: {str(e)}", emitted) from e
        emitted += len(buffer)
        buffer = []

    x = n - 1
    j = locate(phi_inv, x)
    for step in range(n):
        if step:
            x, j = move_query(phi_inv, x, j, checked=False)
        k = start_rank[j]
        while k + 1 < r and positions[k + 1] <= x:
            k += 1
        buffer.append(values[k] - (x - positions[k]))
        if len(buffer) >= chunk_size:
            flush()
    flush()
    return emitted


def lcp_stream(rlbwt, sink, alpha=DEFAULT_ALPHA, chunk_size=CHUNK_SIZE):
    """
    Compute the LCP array of the text behind an RLBWT and hand it to `sink`.

    Args:
        rlbwt (Rlbwt): Validated runs
        sink (callable): Called with consecutive chunks (lists) of LCP values
        alpha (int): Balancing parameter for both move structures
        chunk_size (int): Values per sink call

    Returns:
        int: Number of values emitted, always n

    Raises:
        SinkError: If the sink raises; `position` is where delivery stopped
    """
    ctx = build_lcp_context(rlbwt, alpha)
    pp = plcp_from_context(ctx)
    phi_inv = extract_inverse(balance(ctx.phi_map, alpha))
    logger.info(f"Streaming LCP of n={ctx.n} through {phi_inv.r_prime} phi^-1 intervals")
    return stream_lcp(pp, phi_inv, sink, chunk_size)


def lcp_array(rlbwt, alpha=DEFAULT_ALPHA):
    """The whole LCP array; only for inputs small enough to hold."""
    out = []
    lcp_stream(rlbwt, out.extend, alpha)
    return np.array(out, dtype=np.int64)


def spell_text(ctx, start=0, length=None):
    """
    Extract T[start:start+length] with FL steps.

    Returns:
        bytes: The text slice, terminator as 0x00
    """
    if length is None:
        length = ctx.n - start
    if length <= 0:
        return b""
    if start + length > ctx.n:
        raise PositionRangeError(f"slice [{start}, {start + length}) outside [0, {ctx.n})")
    cursor = seek(start, ctx)
    out = bytearray()
    for _ in range(length - 1):
        out.append(cursor.symbol(ctx))
        cursor.advance(ctx.fl)
    out.append(cursor.symbol(ctx))
    return bytes(out)


class LcpWriter:
    """
    Sink writing LCP values to a binary stream as text or LCPA0001.

    Args:
        stream: Binary file object
        n (int): Number of values that will follow (binary header)
        binary (bool): Write LCPA0001 instead of one decimal per line
    """

    def __init__(self, stream, n, binary=False):
        self.stream = stream
        self.n = n
        self.binary = binary
        self.started = False

    def __call__(self, chunk):
        # header is written with the first chunk
        if self.binary and not self.started:
            self.stream.write(LCP_HEADER.pack(LCP_MAGIC, self.n))
        self.started = True
        if self.binary:
            self.stream.write(np.asarray(chunk, dtype="<u8").tobytes())
        else:
            self.stream.write("".join(f"{value}\n" for value in chunk).encode("ascii"))


def read_lcp(data):
    """
    Decode an LCPA0001 stream.

    Raises:
        LcpFormatError: On bad magic or a length that disagrees with the header
    """
    data = bytes(data)
    if len(data) < len(LCP_MAGIC):
        raise LcpFormatError("missing magic", offset=0)
    if data[: len(LCP_MAGIC)] != LCP_MAGIC:
        raise LcpFormatError("bad magic", offset=0)
    if len(data) < LCP_HEADER.size:
        raise LcpFormatError("truncated header", offset=len(data))
    _, n = LCP_HEADER.unpack_from(data)
    expected = LCP_HEADER.size + 8 * n
    if len(data) != expected:
        raise LcpFormatError(f"expected {expected} bytes, got {len(data)}", offset=min(len(data), expected))
    return np.frombuffer(data, dtype="<u8", count=n, offset=LCP_HEADER.size).astype(np.int64)


def write_plcp(pp, stream):
    """Write 'I[k] PLCP+[k]' lines to a binary stream."""
    lines = (f"{i} {v}\n" for i, v in zip(pp.I.tolist(), pp.values.tolist()))
    stream.write("".join(lines).encode("ascii"))
