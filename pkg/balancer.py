"""
Simultaneous two-way balancing of interval maps.

The input starts P and the output starts Q of an interval map are kept as two
sorted singly linked lists living in fixed-size node arenas. Every node knows
its mate (the node of the other list it maps to or from) and its predecessor
in the other list. A single left-to-right sweep over a position t splits every
interval holding 2*alpha or more starts of the other list, mirrors each split
into the mate interval, and leaves both directions balanced, so one pass
yields MOVE(pi) and MOVE(pi^-1).

Invariants during the sweep:
    - every node starting below t holds fewer than 2*alpha starts of the
      other list between its start and min(t, its end);
    - predecessor links of nodes starting at or below t are correct.
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import asdict, dataclass

import numpy as np

from config import DEFAULT_SETTINGS, check_alpha
from errors import ArenaCapacityError, BalanceInvariantError, BalanceStateError
from intervals import POSITION_DTYPE, RANK_DTYPE, output_starts
from movequery import MoveStructure
from utils import ceil_div

logger = logging.getLogger(__name__)

DEFAULT_ALPHA = DEFAULT_SETTINGS["alpha"]

NIL = -1
INPUT = 0
OUTPUT = 1
SIDE_NAMES = ("P", "Q")


def arena_capacity(r, alpha):
    """Slots per arena: the interval count bound (alpha+1)r/(alpha-1), plus one."""
    return ceil_div((alpha + 1) * r, alpha - 1) + 1


def interval_weights(starts, inner, n):
    """
    Count the starts of the other list lying strictly inside every interval.

    Args:
        starts: Sorted interval starts, without the sentinel
        inner: Sorted starts of the other list
        n (int): Domain size, the end of the last interval

    Returns:
        numpy.ndarray: |(starts[k], starts[k+1]) & inner| for every k
    """
    starts = np.asarray(starts, dtype=np.int64)
    inner = np.asarray(inner, dtype=np.int64)
    ends = np.append(starts[1:], n)
    return np.searchsorted(inner, ends, side="left") - np.searchsorted(inner, starts, side="right")


class NodeArena:
    """
    Fixed-capacity pool of list nodes.

    Nodes are slot indices into parallel lists; NIL (-1) is the null link.
    """

    __slots__ = ("idx", "next", "mate", "pred", "capacity", "size", "name")

    def __init__(self, capacity, name):
        self.idx = [0] * capacity
        self.next = [NIL] * capacity
        self.mate = [NIL] * capacity
        self.pred = [NIL] * capacity
        self.capacity = capacity
        self.size = 0
        self.name = name

    def __len__(self):
        return self.size

    def allocate(self, position):
        slot = self.size
        if slot == self.capacity:
            logger.error(f"{self.name} arena full at {self.capacity} nodes")
            raise ArenaCapacityError(f"{self.name} arena exhausted ({self.capacity} nodes)")
        self.idx[slot] = position
        self.size = slot + 1
        return slot

    def insert_after(self, node, position):
        """Allocate a node at `position` and link it right after `node`."""
        slot = self.allocate(position)
        self.next[slot] = self.next[node]
        self.next[node] = slot
        return slot

    def walk(self, head=0):
        node = head
        while node != NIL:
            yield node
            node = self.next[node]

    def positions(self):
        """Starts in list order."""
        return np.fromiter((self.idx[node] for node in self.walk()), dtype=np.int64, count=self.size)


@dataclass
class BalanceStats:
    r: int = 0
    r_prime: int = 0
    insertions: int = 0
    cascade_splits: int = 0
    iterations: int = 0
    walk_visits: int = 0
    scanned: int = 0
    max_scan: int = 0
    max_split_work: int = 0
    heavy_checks: int = 0

    def as_dict(self):
        return asdict(self)


class DualLists:
    """
    The two linked lists of one interval map and the sweep state over them.

    Attributes:
        n (int): Domain size
        alpha (int): Balancing parameter
        arenas (tuple): (P arena, Q arena), indexed by INPUT / OUTPUT
        t (int): Position up to which both lists are balanced
        p_t (int): P node containing t
        q_t (int): Q node containing t
        insertion_count (int): Splits performed, each adding one node per list
    """

    def __init__(self, n, alpha, capacity):
        self.n = n
        self.alpha = alpha
        self.arenas = (NodeArena(capacity, "P"), NodeArena(capacity, "Q"))
        self.head_p = 0
        self.head_q = 0
        self.t = 0
        self.p_t = 0
        self.q_t = 0
        self.insertion_count = 0
        self.finalized = False
        self.debug = False
        self.stats = BalanceStats()

    @property
    def arena_p(self):
        return self.arenas[INPUT]

    @property
    def arena_q(self):
        return self.arenas[OUTPUT]

    def _end(self, arena, node):
        following = arena.next[node]
        return self.n if following == NIL else arena.idx[following]

    def _walk(self, start_p, start_q, limit):
        """
        Two-finger walk over the nodes after start_p / start_q up to `limit`.

        Sets the predecessor of every visited node and returns the last P and
        Q nodes starting at or below `limit` together with the step count.
        """
        ap, aq = self.arenas
        p_idx, p_next, p_pred = ap.idx, ap.next, ap.pred
        q_idx, q_next, q_pred = aq.idx, aq.next, aq.pred
        beyond = limit + 1
        last_p, last_q = start_p, start_q
        a, b = p_next[start_p], q_next[start_q]
        steps = 0
        while True:
            ai = p_idx[a] if a != NIL else beyond
            bi = q_idx[b] if b != NIL else beyond
            m = ai if ai < bi else bi
            if m > limit:
                break
            steps += 1
            if ai == m:
                last_p = a
            if bi == m:
                last_q = b
            if ai == m:
                p_pred[a] = last_q
                a = p_next[a]
            if bi == m:
                q_pred[b] = last_p
                b = q_next[b]
        return last_p, last_q, steps

    def link_predecessors(self):
        """Set every predecessor link from scratch."""
        ap, aq = self.arenas
        ap.pred[self.head_p] = self.head_q
        aq.pred[self.head_q] = self.head_p
        self._walk(self.head_p, self.head_q, self.n)

    def _scan(self, side, node, start, stop):
        """
        Collect up to 2*alpha+1 starts of the other list inside (start, stop).

        Returns:
            tuple: (last alpha+1 collected nodes, number collected, nodes touched)
        """
        other = self.arenas[1 - side]
        o_idx, o_next = other.idx, other.next
        y = self.arenas[side].pred[node]
        touched = 0
        while y != NIL and o_idx[y] <= start:
            y = o_next[y]
            touched += 1
        limit = 2 * self.alpha + 1
        window = deque(maxlen=self.alpha + 1)
        count = 0
        while y != NIL and count < limit and o_idx[y] < stop:
            window.append(y)
            count += 1
            y = o_next[y]

        stats = self.stats
        stats.heavy_checks += 1
        stats.scanned += count
        if count > stats.max_scan:
            stats.max_scan = count
        return window, count, touched + count

    def _split(self, side, node, start, window, scan_work):
        """
        Split the heavy interval `node` and settle every split it forces below t.

        The cut goes at the (alpha+1)-largest start collected by the scan. Its
        mirror lands in the mate interval; a mirror at or below t may make the
        interval of this side containing it heavy, which is split in turn.

        Returns:
            int: Position of the first cut
        """
        t = self.t
        two_alpha = 2 * self.alpha
        mine, other = self.arenas[side], self.arenas[1 - side]
        first_cut = None

        while True:
            if self.debug:
                before = self._weights_of(1 - side)

            work = scan_work
            at_x = window[0]
            x = other.idx[at_x]
            cut = mine.insert_after(node, x)
            mine.pred[cut] = at_x
            for y in window:
                other.pred[y] = cut
            work += len(window)

            mate = mine.mate[node]
            mate_start = other.idx[mate]
            mate_stop = self._end(other, mate)
            x_mirror = mate_start + (x - start)
            twin = other.insert_after(mate, x_mirror)
            mine.mate[cut] = twin
            other.mate[twin] = cut

            self.insertion_count += 1
            if first_cut is None:
                first_cut = x
            else:
                self.stats.cascade_splits += 1
            logger.debug(
                f"Split {SIDE_NAMES[side]} interval at {start} on {x}, "
                f"mirror {SIDE_NAMES[1 - side]} at {x_mirror} (t={t})"
            )

            settled = x_mirror > t
            if not settled:
                z = other.pred[mate]
                while mine.next[z] != NIL and mine.idx[mine.next[z]] <= x_mirror:
                    z = mine.next[z]
                    work += 1
                other.pred[twin] = z

                w = z if mine.idx[z] == x_mirror else mine.next[z]
                while w != NIL and mine.idx[w] < mate_stop and mine.idx[w] <= t:
                    mine.pred[w] = twin
                    w = mine.next[w]
                    work += 1

            if work > self.stats.max_split_work:
                self.stats.max_split_work = work
            if self.debug:
                self._check_non_interference(1 - side, before)

            if settled:
                break
            z_start = mine.idx[z]
            if z_start == x_mirror:
                break
            window, count, scan_work = self._scan(side, z, z_start, self._end(mine, z))
            if count < two_alpha:
                break
            node, start = z, z_start

        return first_cut

    def _step(self):
        ap, aq = self.arenas
        p_t, q_t = self.p_t, self.q_t
        ps, pe = ap.idx[p_t], self._end(ap, p_t)
        qs, qe = aq.idx[q_t], self._end(aq, q_t)
        self.stats.iterations += 1

        if ps == qs and pe == qe:
            new_t = pe
        else:
            if qs < ps or (qs == ps and qe > pe):
                side, node, start, stop = OUTPUT, q_t, qs, qe
            else:
                side, node, start, stop = INPUT, p_t, ps, pe
            window, count, scan_work = self._scan(side, node, start, stop)
            if count >= 2 * self.alpha:
                new_t = self._split(side, node, start, window, scan_work)
            else:
                new_t = stop

        self.p_t, self.q_t, steps = self._walk(p_t, q_t, new_t)
        self.stats.walk_visits += steps
        self.t = new_t
        if self.debug:
            self.check_invariants()

    def run(self):
        """Sweep t from 0 to n."""
        while self.t < self.n:
            self._step()
        self.finalized = True
        self.stats.insertions = self.insertion_count
        self.stats.r_prime = len(self.arena_p)

    def _weights_of(self, side):
        starts = self.arenas[side].positions()
        inner = self.arenas[1 - side].positions()
        return starts, interval_weights(starts, inner, self.n)

    def _check_non_interference(self, side, before):
        if len(self.arena_p) != len(self.arena_q):
            raise BalanceInvariantError(
                f"arena occupancy differs: {len(self.arena_p)} P nodes, {len(self.arena_q)} Q nodes"
            )
        old_starts, old_weights = before
        new_starts, new_weights = self._weights_of(side)
        containing = np.searchsorted(old_starts, new_starts, side="right") - 1
        grown = np.flatnonzero(new_weights > old_weights[containing])
        if grown.size:
            k = int(grown[0])
            raise BalanceInvariantError(
                f"split raised the weight of {SIDE_NAMES[side]} interval at {int(new_starts[k])}"
            )

    def check_invariants(self):
        """
        Verify the sweep invariants at the current t.

        Raises:
            BalanceInvariantError: If a list is unsorted, an interval below t is
                heavy, or a predecessor link at or below t is wrong
        """
        t, n = self.t, self.n
        for side in (INPUT, OUTPUT):
            mine, other = self.arenas[side], self.arenas[1 - side]
            name = SIDE_NAMES[side]
            nodes = np.fromiter(mine.walk(), dtype=np.int64, count=len(mine))
            starts = np.asarray(mine.idx, dtype=np.int64)[nodes]
            inner = other.positions()
            if np.any(starts[1:] <= starts[:-1]) or np.any(inner[1:] <= inner[:-1]):
                raise BalanceInvariantError(f"{name} list is not sorted")

            ends = np.minimum(np.append(starts[1:], n), t)
            weights = np.searchsorted(inner, ends, side="left") - np.searchsorted(inner, starts, side="right")
            heavy = np.flatnonzero((starts < t) & (weights >= 2 * self.alpha))
            if heavy.size:
                raise BalanceInvariantError(
                    f"{name} interval at {int(starts[heavy[0]])} is heavy below t={t}"
                )

            preds = np.asarray(mine.pred, dtype=np.int64)[nodes]
            expected = inner[np.searchsorted(inner, starts, side="right") - 1]
            actual = np.asarray(other.idx, dtype=np.int64)[preds]
            broken = np.flatnonzero((starts <= t) & ((preds == NIL) | (actual != expected)))
            if broken.size:
                raise BalanceInvariantError(
                    f"{name} node at {int(starts[broken[0]])} has a stale predecessor (t={t})"
                )


@dataclass
class BalancedPair:
    """Balanced dual lists, from which both move structures are read."""

    lists: DualLists

    @property
    def finalized(self):
        return self.lists.finalized

    @property
    def r_prime(self):
        return len(self.lists.arena_p)

    @property
    def insertion_count(self):
        return self.lists.insertion_count

    @property
    def stats(self):
        return self.lists.stats


def init_lists(imap, alpha=DEFAULT_ALPHA):
    """
    Build the dual lists of an interval map with all links in place.

    Args:
        imap (IntervalMap): Map to balance
        alpha (int): Balancing parameter, at least 2

    Returns:
        DualLists: Lists with t = 0, arenas sized for the worst case
    """
    alpha = check_alpha(alpha)
    r = imap.r
    tau = np.asarray(imap.tau, dtype=RANK_DTYPE)
    Q, tau_inv = output_starts(imap)

    lists = DualLists(imap.n, alpha, arena_capacity(r, alpha))
    ap, aq = lists.arenas
    ap.idx[:r] = imap.P[:-1].astype(POSITION_DTYPE).tolist()
    aq.idx[:r] = Q[:-1].tolist()
    ap.next[: r - 1] = range(1, r)
    aq.next[: r - 1] = range(1, r)
    ap.mate[:r] = tau.tolist()
    aq.mate[:r] = tau_inv.tolist()
    ap.size = aq.size = r
    lists.link_predecessors()
    lists.stats.r = r
    return lists


def balance(imap, alpha=DEFAULT_ALPHA, debug=False):
    """
    Balance an interval map in both directions in one sweep.

    Args:
        imap (IntervalMap): Map to balance
        alpha (int): Balancing parameter, at least 2
        debug (bool): Re-check the sweep invariants after every step and split

    Returns:
        BalancedPair: Finalised lists for extract_forward / extract_inverse
    """
    lists = init_lists(imap, alpha)
    lists.debug = debug
    logger.info(f"Balancing {imap.r} intervals over n={imap.n} with alpha={lists.alpha}")
    lists.run()
    logger.info(
        f"Balanced to {lists.stats.r_prime} intervals ({lists.insertion_count} insertions, "
        f"{lists.stats.cascade_splits} from cascades)"
    )
    return BalancedPair(lists)


def _checked_lists(bp):
    if not bp.finalized:
        raise BalanceStateError("balanced pair is not finalised; run balance() first")
    return bp.lists


def _extract(lists, side):
    mine, other = lists.arenas[side], lists.arenas[1 - side]
    order = list(mine.walk())
    ordinal = [0] * len(mine)
    for k, node in enumerate(order):
        ordinal[node] = k

    starts = [mine.idx[node] for node in order]
    starts.append(lists.n)
    mates = [mine.mate[node] for node in order]
    images = [other.idx[m] for m in mates]
    ranks = [ordinal[other.pred[m]] for m in mates]
    return MoveStructure(
        n=lists.n,
        P_prime=np.array(starts, dtype=POSITION_DTYPE),
        P_pi_prime=np.array(images, dtype=POSITION_DTYPE),
        P_rank=np.array(ranks, dtype=RANK_DTYPE),
        alpha=lists.alpha,
    )


def extract_forward(bp):
    """
    Read MOVE(pi) off a balanced pair.

    Returns:
        MoveStructure: Input starts P', their images and predecessor ranks
    """
    return _extract(_checked_lists(bp), INPUT)


def extract_inverse(bp):
    """
    Read MOVE(pi^-1) off the same balanced pair.

    Returns:
        MoveStructure: Output starts Q', their preimages and predecessor ranks
    """
    return _extract(_checked_lists(bp), OUTPUT)
