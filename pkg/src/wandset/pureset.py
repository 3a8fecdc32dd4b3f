"""Canonical, interned hereditarily finite sets.

Every value built through :func:`mk_set` is deduplicated, sorted into a fixed
total order (rank, then cardinality, then lexicographic on elements) and
interned, so structural equality coincides with object identity for the life
of the process.  All operations are pure; the interning table is the single
mutation point and is guarded by a lock.
"""

from __future__ import annotations

import threading
from typing import Iterable, Optional, Tuple

from .errors import DepthCapExceeded, NotACarrier, NotAPair, NotInCodeImage

__all__ = [
    "PureSet",
    "EMPTY",
    "mk_set",
    "rank",
    "kpair",
    "kunpair",
    "carrier",
    "uncarrier",
    "deep_carrier",
    "deep_uncarrier",
    "carrier_level",
    "in_carrier_levels",
    "is_carrier_level_code",
    "lt_levels",
    "is_lt_level",
    "vn",
    "vn_value",
]


class PureSet:
    """An immutable hereditarily finite set.

    Do not instantiate directly; use :func:`mk_set`.  Instances are interned,
    so ``==`` is identity and values are safe to share across threads.
    """

    __slots__ = ("elements", "rank", "serial", "_key")

    elements: Tuple["PureSet", ...]
    rank: int
    serial: int

    def __init__(self, elements: Tuple["PureSet", ...], serial: int):
        self.elements = elements
        self.rank = 0 if not elements else 1 + max(e.rank for e in elements)
        self.serial = serial
        self._key = None

    def sort_key(self):
        # (rank, cardinality, lexicographic on element keys); element key
        # tuples are shared between interned values, so this stays cheap.
        key = self._key
        if key is None:
            key = (self.rank, len(self.elements),
                   tuple(e.sort_key() for e in self.elements))
            self._key = key
        return key

    def __lt__(self, other: "PureSet") -> bool:
        return self.sort_key() < other.sort_key()

    def __contains__(self, item: "PureSet") -> bool:
        return item in self.elements

    def __iter__(self):
        return iter(self.elements)

    def __len__(self) -> int:
        return len(self.elements)

    def __repr__(self) -> str:
        return "{" + ",".join(repr(e) for e in self.elements) + "}"


_TABLE: dict = {}
_LOCK = threading.Lock()


def mk_set(elems: Iterable[PureSet]) -> PureSet:
    """Return the canonical set with the given elements.

    Duplicates are dropped, elements are sorted into the canonical order and
    the result is interned.  Idempotent under re-wrapping.
    """
    unique = {e.serial: e for e in elems}
    ordered = tuple(sorted(unique.values(), key=PureSet.sort_key))
    key = tuple(e.serial for e in ordered)
    hit = _TABLE.get(key)
    if hit is not None:
        return hit
    with _LOCK:
        hit = _TABLE.get(key)
        if hit is None:
            hit = PureSet(ordered, len(_TABLE))
            _TABLE[key] = hit
        return hit


EMPTY = mk_set(())


def rank(s: PureSet) -> int:
    """Cumulative rank: 0 for the empty set, else 1 + max element rank."""
    return s.rank


def kpair(a: PureSet, b: PureSet) -> PureSet:
    """Kuratowski pair {{a},{a,b}}."""
    return mk_set((mk_set((a,)), mk_set((a, b))))


def kunpair(p: PureSet) -> Tuple[PureSet, PureSet]:
    """Invert :func:`kpair`; raises NotAPair on anything else."""
    if len(p) == 1:
        (inner,) = p.elements
        if len(inner) != 1:
            raise NotAPair(repr(p))
        (a,) = inner.elements
        return a, a
    if len(p) == 2:
        small, big = p.elements  # canonical order puts the singleton first
        if len(small) != 1 or len(big) != 2:
            raise NotAPair(repr(p))
        (a,) = small.elements
        if a not in big:
            raise NotAPair(repr(p))
        x, y = big.elements
        return (a, y) if x is a else (a, x)
    raise NotAPair(repr(p))


def is_kpair(p: PureSet) -> bool:
    try:
        kunpair(p)
        return True
    except NotAPair:
        return False


def carrier(a: PureSet) -> PureSet:
    """The code {<empty, a>} marking a as a bland value."""
    return mk_set((kpair(EMPTY, a),))


def uncarrier(c: PureSet) -> PureSet:
    """Invert :func:`carrier`; raises NotACarrier on anything else."""
    if len(c) != 1:
        raise NotACarrier(repr(c))
    try:
        tag, a = kunpair(c.elements[0])
    except NotAPair:
        raise NotACarrier(repr(c)) from None
    if tag is not EMPTY:
        raise NotACarrier(repr(c))
    return a


def is_carrier(c: PureSet) -> bool:
    try:
        uncarrier(c)
        return True
    except NotACarrier:
        return False


def deep_carrier(a: PureSet) -> PureSet:
    """Recursively code a pure set: carrier of the codes of its elements.

    The map is injective, and the code of a rank-n set first appears at
    level n of the carrier hierarchy over the empty base.
    """
    return carrier(mk_set(deep_carrier(x) for x in a))


def deep_uncarrier(c: PureSet) -> PureSet:
    """Invert :func:`deep_carrier`; raises NotInCodeImage off the image."""
    try:
        inner = uncarrier(c)
    except NotACarrier:
        raise NotInCodeImage(repr(c)) from None
    return mk_set(deep_uncarrier(x) for x in inner)


def in_code_image(c: PureSet) -> bool:
    try:
        deep_uncarrier(c)
        return True
    except NotInCodeImage:
        return False


# -- carrier hierarchy over a base ------------------------------------------

_DEFAULT_WIDTH = 20  # a level wider than this would have 2**width successors


def carrier_level(alpha: int, base: frozenset, max_width: int = _DEFAULT_WIDTH) -> frozenset:
    """Level ``alpha`` of the carrier hierarchy over ``base``.

    Level 0 is the base itself; each later level adds the carriers of all
    subsets of the previous level.  Raises DepthCapExceeded rather than
    materializing a powerset of more than ``max_width`` elements.
    """
    level = frozenset(base)
    for _ in range(alpha):
        if len(level) > max_width:
            raise DepthCapExceeded(f"level width {len(level)} exceeds {max_width}")
        spread = list(level)
        nxt = set(base)
        for mask in range(1 << len(spread)):
            subset = [spread[i] for i in range(len(spread)) if mask >> i & 1]
            nxt.add(carrier(mk_set(subset)))
        level = frozenset(nxt)
    return level


def in_carrier_levels(base: frozenset, x: PureSet) -> bool:
    """Whether ``x`` appears at some level of the carrier hierarchy over base.

    Decided recursively (a carrier is in the hierarchy iff every element of
    its payload is), which avoids materializing any level.
    """
    if x in base:
        return True
    try:
        inner = uncarrier(x)
    except NotACarrier:
        return False
    return all(in_carrier_levels(base, y) for y in inner)


def _carrier_pot(base: frozenset, hs, max_width: int) -> frozenset:
    # everything available from hs under the carrier reading: the base, plus
    # carriers of subsets of any member's payload
    out = set(base)
    for r in hs:
        payload = uncarrier(r).elements
        if len(payload) > max_width:
            raise DepthCapExceeded(f"payload width {len(payload)} exceeds {max_width}")
        for mask in range(1 << len(payload)):
            out.add(carrier(mk_set(
                payload[i] for i in range(len(payload)) if mask >> i & 1)))
    return frozenset(out)


def is_carrier_level_code(base: frozenset, c: PureSet, max_width: int = 16) -> bool:
    """Recognize carriers of levels of the hierarchy over ``base``.

    Non-recursive characterization: the payload must equal everything
    available from its own recognized level-code members.  This is the
    independent oracle against which :func:`carrier_level` is checked.
    """
    try:
        inner = uncarrier(c)
    except NotACarrier:
        return False
    sub = [r for r in inner if is_carrier_level_code(base, r, max_width)]
    return _carrier_pot(base, sub, max_width) == frozenset(inner.elements)


# -- the plain cumulative hierarchy ------------------------------------------

def lt_levels(n: int, max_width: int = 16) -> list:
    """The first ``n`` levels of the plain cumulative hierarchy, as PureSets.

    Level 0 is empty and each next level collects all subsets of the previous
    one, so cardinalities run 0, 1, 2, 4, 16, 65536, ...
    """
    levels = []
    level = EMPTY
    for i in range(n):
        levels.append(level)
        if i + 1 == n:
            break
        if len(level) > max_width:
            raise DepthCapExceeded(f"level width {len(level)} exceeds {max_width}")
        spread = level.elements
        subsets = []
        for mask in range(1 << len(spread)):
            subsets.append(mk_set(spread[i] for i in range(len(spread)) if mask >> i & 1))
        level = mk_set(subsets)
    return levels


def _pot(members: Iterable[PureSet], max_width: int) -> Optional[PureSet]:
    # {x : x is a subset of some member}; None when too wide to materialize
    out = set()
    for r in members:
        if len(r) > max_width:
            raise DepthCapExceeded(f"powerset width {len(r)} exceeds {max_width}")
        spread = r.elements
        for mask in range(1 << len(spread)):
            out.add(mk_set(spread[i] for i in range(len(spread)) if mask >> i & 1))
    return mk_set(out)


def is_lt_level(s: PureSet, max_width: int = 16) -> bool:
    """Recognize levels of the plain hierarchy.

    A level is exactly the set of all subsets of its earlier levels; the
    recognizer recurses along that characterization.
    """
    if s is EMPTY:
        return True
    sublevels = [r for r in s if is_lt_level(r, max_width)]
    return _pot(sublevels, max_width) is s


def lt_history_witness(s: PureSet, max_width: int = 16) -> Optional[frozenset]:
    """Search for a history witnessing that ``s`` is a level.

    A history is a set h with r = pot(r & h) for every r in h; s is a level
    iff s = pot(h) for some history h.  The search ranges over subsets of s's
    members, which is exhaustive (any history for s is included in s).
    """
    if len(s) > max_width:
        raise DepthCapExceeded(f"member count {len(s)} exceeds {max_width}")
    spread = s.elements
    for mask in range(1 << len(spread)):
        h = [spread[i] for i in range(len(spread)) if mask >> i & 1]
        hset = set(h)
        if _pot(h, max_width) is not s:
            continue
        if all(_pot([q for q in r if q in hset], max_width) is r for r in h):
            return frozenset(h)
    return None


# -- von Neumann naturals -----------------------------------------------------

def vn(n: int) -> PureSet:
    """The n-th von Neumann natural."""
    cur = EMPTY
    chain = [cur]
    for _ in range(n):
        cur = mk_set(chain)
        chain.append(cur)
    return cur


def vn_value(s: PureSet) -> Optional[int]:
    """Decode a von Neumann natural, or None if ``s`` is not one."""
    n = len(s)
    expected = vn(n)
    return n if expected is s else None
