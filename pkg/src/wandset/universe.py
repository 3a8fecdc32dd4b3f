"""Stage-generated finite universe fragments.

A fragment is built in stages: at every stage you find each bland set of
previously found objects and, for every wand and every previously found
object inside that wand's domain of action, the quotiented tap of that
object.  Tapped objects are stored as their canonical class: the set of all
minimal-rank (wand, argument) pairs identified by the official equivalence,
so two taps are the same object exactly when their arguments are equivalent.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

from . import wandspec
from .errors import BeyondFragment, CapExceeded, NotBland, StabilityViolation, TapUndefinedAt
from .wandspec import WandSpec

DEFAULT_MAX_OBJECTS = 200_000


class Obj:
    """A universe object: bland (with members) or tapped (with its class)."""

    __slots__ = ("id", "ordrank", "members", "tclass")

    def __init__(self, oid: int, ordrank: int,
                 members: Optional[FrozenSet[int]],
                 tclass: Optional[FrozenSet[Tuple[int, int]]]):
        self.id = oid
        self.ordrank = ordrank
        self.members = members
        self.tclass = tclass

    @property
    def is_bland(self) -> bool:
        return self.members is not None

    @property
    def kind(self) -> str:
        return "bland" if self.is_bland else "tapped"

    def __repr__(self) -> str:
        return f"<obj {self.id} {self.kind} rank {self.ordrank}>"


@dataclass
class Fragment:
    """A finite prefix of a wand/set universe."""

    spec: WandSpec
    depth: int
    exhaustive: bool
    objects: List[Obj] = field(default_factory=list)
    wevel_contents: List[Tuple[int, ...]] = field(default_factory=list)
    _bland_index: Dict[FrozenSet[int], int] = field(default_factory=dict)
    _tap_index: Dict[FrozenSet[Tuple[int, int]], int] = field(default_factory=dict)
    _tap_of: Dict[Tuple[int, int], Optional[int]] = field(default_factory=dict)
    _keys: Dict[int, tuple] = field(default_factory=dict)
    _view: Optional["FragmentView"] = None
    _caches: Dict[str, dict] = field(default_factory=dict)

    # -- plumbing -------------------------------------------------------------

    def obj(self, oid: int) -> Obj:
        return self.objects[oid]

    def __len__(self) -> int:
        return len(self.objects)

    def ids(self) -> range:
        return range(len(self.objects))

    def cache(self, name: str) -> dict:
        return self._caches.setdefault(name, {})

    def register_bland(self, members: FrozenSet[int], stage: int) -> int:
        oid = self._bland_index.get(members)
        if oid is not None:
            return oid
        rank = 0 if not members else 1 + max(self.obj(m).ordrank for m in members)
        assert rank == stage or not self.exhaustive
        o = Obj(len(self.objects), rank, members, None)
        self.objects.append(o)
        self._bland_index[members] = o.id
        return o.id

    def register_tap(self, tclass: FrozenSet[Tuple[int, int]]) -> int:
        oid = self._tap_index.get(tclass)
        if oid is not None:
            return oid
        arg_ranks = {self.obj(b).ordrank for _, b in tclass}
        assert len(arg_ranks) == 1  # the class shares one minimal rank
        o = Obj(len(self.objects), arg_ranks.pop() + 1, None, tclass)
        self.objects.append(o)
        self._tap_index[tclass] = o.id
        return o.id

    def bland_id(self, members: Iterable[int]) -> Optional[int]:
        return self._bland_index.get(frozenset(members))

    def sort_key(self, oid: int) -> tuple:
        key = self._keys.get(oid)
        if key is None:
            o = self.obj(oid)
            if o.is_bland:
                key = (o.ordrank, 0,
                       tuple(sorted(self.sort_key(m) for m in o.members)))
            else:
                key = (o.ordrank, 1,
                       tuple(sorted((w, self.sort_key(b)) for w, b in o.tclass)))
            self._keys[oid] = key
        return key

    def canonical_order(self) -> List[int]:
        return sorted(self.ids(), key=self.sort_key)

    def view(self) -> "FragmentView":
        if self._view is None:
            self._view = FragmentView(self)
        return self._view

    def render(self, oid: int) -> str:
        o = self.obj(oid)
        if o.is_bland:
            inner = sorted((self.sort_key(m), m) for m in o.members)
            return "{" + ",".join(self.render(m) for _, m in inner) + "}"
        pairs = sorted((w, self.sort_key(b), b) for w, b in o.tclass)
        w, _, b = pairs[0]
        return f"*{w}{self.render(b)}"

    # -- wevels ---------------------------------------------------------------

    def wevel_id(self, alpha: int) -> int:
        """Id of the alpha-th wevel object (the bland set of everything
        found strictly before stage alpha)."""
        if not 0 <= alpha < len(self.wevel_contents):
            raise BeyondFragment(f"wevel {alpha} beyond depth {self.depth}")
        oid = self.bland_id(self.wevel_contents[alpha])
        if oid is None:
            raise BeyondFragment(f"wevel {alpha} not registered")
        return oid

    def wand_obj_ids(self) -> Dict[int, int]:
        """Map wand index -> id of its designated hereditarily bland object,
        for wands whose designation is registered in this fragment."""
        from .pureset import vn

        cache = self.cache("wand_objs")
        if "map" not in cache:
            out = {}
            for wid in self.spec.wands:
                oid = encode_pure(self, vn(wid.index))
                if oid is not None:
                    out[wid.index] = oid
            cache["map"] = out
        return cache["map"]


class FragmentView:
    """SetQuery interface over a fragment; handles are object ids."""

    def __init__(self, frag: Fragment):
        self.frag = frag
        self.cache: dict = {}
        self._below: Dict[int, tuple] = {}
        self._members: Dict[int, tuple] = {}

    def is_bland(self, h: int) -> bool:
        return self.frag.obj(h).is_bland

    def members(self, h: int) -> Tuple[int, ...]:
        got = self._members.get(h)
        if got is None:
            o = self.frag.obj(h)
            if o.members is None:
                got = ()
            else:
                got = tuple(sorted(o.members, key=self.frag.sort_key))
            self._members[h] = got
        return got

    def is_wand(self, h: int) -> bool:
        return h in self.frag.wand_obj_ids().values()

    def ordrank(self, h: int) -> int:
        return self.frag.obj(h).ordrank

    def resolve_tap(self, w: int, h: int) -> Optional[int]:
        frag = self.frag
        key = (w, h)
        if key in frag._tap_of:
            return frag._tap_of[key]
        cls = wandspec.tap_class(frag.spec, w, h, self)
        if cls is None:
            frag._tap_of[key] = None
            return None
        cid = frag._tap_index.get(frozenset(cls))
        if cid is None:
            raise BeyondFragment(f"tap of wand {w} on rank-{self.ordrank(h)} object")
        frag._tap_of[key] = cid
        return cid

    def objects_below(self, r: int) -> Tuple[int, ...]:
        # keyed by population so mid-build growth invalidates stale answers
        key = (r, len(self.frag.objects))
        got = self._below.get(key)
        if got is None:
            got = tuple(o.id for o in self.frag.objects if o.ordrank < r)
            self._below[key] = got
        return got

    def sort_key(self, h: int) -> tuple:
        return self.frag.sort_key(h)


# -- construction -------------------------------------------------------------

def build(spec: WandSpec, depth: int, max_objects: int = DEFAULT_MAX_OBJECTS,
          mode: str = "exhaustive", subset_bound: int = 2) -> Fragment:
    """Grow a fragment for ``depth`` stages.

    Exhaustive mode materializes every bland subset of the earlier-found
    objects at each stage and aborts with CapExceeded rather than truncating.
    Sampled mode registers the full stage set (so wevels exist), every
    admissible tap, and bland subsets only up to ``subset_bound`` members,
    stopping quietly at the object budget; the fragment is then flagged
    non-exhaustive and completeness-dependent suites must skip it.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    if mode not in ("exhaustive", "sampled"):
        raise ValueError(f"unknown mode {mode!r}")
    frag = Fragment(spec=spec, depth=depth, exhaustive=(mode == "exhaustive"))
    view = frag.view()

    for stage in range(depth):
        prev = tuple(o.id for o in frag.objects if o.ordrank < stage)
        frag.wevel_contents.append(prev)
        prev_sorted = sorted(prev, key=frag.sort_key)

        if mode == "exhaustive":
            projected = 1 << len(prev_sorted)
            if len(prev_sorted) > 24 or len(frag.objects) + projected > max_objects:
                raise CapExceeded(
                    f"stage {stage}: {len(prev_sorted)} objects found earlier; "
                    f"2**{len(prev_sorted)} subsets exceed budget {max_objects}")
            for mask in range(projected):
                members = frozenset(
                    prev_sorted[i] for i in range(len(prev_sorted)) if mask >> i & 1)
                frag.register_bland(members, stage)
        else:
            frag.register_bland(frozenset(prev_sorted), stage)  # the wevel itself

        # taps of everything found strictly before this stage
        for a in prev_sorted:
            for w in spec.wand_indices():
                cls = wandspec.tap_class(spec, w, a, view)
                if cls is None:
                    frag._tap_of[(w, a)] = None
                    continue
                cid = frag.register_tap(frozenset(cls))
                frag._tap_of[(w, a)] = cid

        if mode == "sampled":
            for size in range(min(subset_bound, len(prev_sorted)) + 1):
                for combo in itertools.combinations(prev_sorted, size):
                    if len(frag.objects) >= max_objects:
                        break
                    frag.register_bland(frozenset(combo), stage)

    frag.wevel_contents.append(tuple(o.id for o in frag.objects))
    return frag


# -- found-at and wevel recognition -------------------------------------------

def found_at(frag: Fragment, x: int, r: int) -> bool:
    """x is found at r: a bland subset of r, or the tap of a member of r."""
    ox, orr = frag.obj(x), frag.obj(r)
    r_members = orr.members if orr.is_bland else frozenset()
    if ox.is_bland and ox.members <= r_members:
        return True
    if ox.is_bland:
        return False
    view = frag.view()
    for b in r_members:
        for w in frag.spec.wand_indices():
            if view.resolve_tap(w, b) == x:
                return True
    return False


def in_pot(frag: Fragment, x: int, a: int) -> bool:
    o = frag.obj(a)
    if not o.is_bland:
        return False
    return any(found_at(frag, x, r) for r in o.members)


def pot_ids(frag: Fragment, member_ids: Iterable[int]) -> FrozenSet[int]:
    """Ids of everything found at some object in ``member_ids``."""
    mem = list(member_ids)
    return frozenset(x for x in frag.ids()
                     if any(found_at(frag, x, r) for r in mem))


def pot(frag: Fragment, a: int) -> int:
    """The bland set of everything found at a member of ``a``."""
    o = frag.obj(a)
    if not o.is_bland:
        raise NotBland(repr(o))
    oid = frag.bland_id(pot_ids(frag, o.members))
    if oid is None:
        raise BeyondFragment("pot not registered")
    return oid


def is_wevel(frag: Fragment, x: int) -> bool:
    """Recognize wevels: s is a wevel iff s equals the pot of its wevel
    members (recursing along that characterization)."""
    memo = frag.cache("is_wevel")
    hit = memo.get(x)
    if hit is not None:
        return hit
    o = frag.obj(x)
    if not o.is_bland:
        memo[x] = False
        return False
    sub = [r for r in o.members if is_wevel(frag, r)]
    hit = pot_ids(frag, sub) == o.members
    memo[x] = hit
    return hit


def wistory_witness(frag: Fragment, x: int, max_width: int = 16) -> Optional[FrozenSet[int]]:
    """Independent oracle: search for a wistory h with x = pot(h).

    Any wistory for x is a set of its own members, so subsets of x's bland
    members are an exhaustive search space.
    """
    o = frag.obj(x)
    if not o.is_bland:
        return None
    cands = [m for m in o.members if frag.obj(m).is_bland]
    if len(cands) > max_width:
        raise CapExceeded(f"{len(cands)} candidate members exceed {max_width}")
    for n in range(len(cands) + 1):
        for combo in itertools.combinations(cands, n):
            h = frozenset(combo)
            if pot_ids(frag, h) != o.members:
                continue
            if all(pot_ids(frag, frag.obj(a).members & h) == frag.obj(a).members
                   for a in h):
                return h
    return None


def wevel_of(frag: Fragment, a: int) -> int:
    """The least wevel at which ``a`` is found."""
    return frag.wevel_id(frag.obj(a).ordrank)


def ordrank(frag: Fragment, a: int) -> int:
    return frag.obj(a).ordrank


def tap(frag: Fragment, w: int, a: int) -> Optional[int]:
    """The tap of ``a`` with wand ``w``: None outside the domain of action,
    BeyondFragment when the result was never registered."""
    return frag.view().resolve_tap(w, a)


# -- hereditary blandness -----------------------------------------------------

def hereditarily_bland(frag: Fragment, a: int) -> bool:
    memo = frag.cache("hb")
    hit = memo.get(a)
    if hit is None:
        o = frag.obj(a)
        hit = o.is_bland and all(hereditarily_bland(frag, m) for m in o.members)
        memo[a] = hit
    return hit


def hb_witness(frag: Fragment, a: int) -> Optional[int]:
    """Witness-set form: a registered bland c with a included in c whose
    members are all bland subsets of c.  None when there is no witness."""
    o = frag.obj(a)
    if not o.is_bland:
        return None
    for c in frag.ids():
        oc = frag.obj(c)
        if not oc.is_bland or not o.members <= oc.members:
            continue
        if all(frag.obj(x).is_bland and frag.obj(x).members <= oc.members
               for x in oc.members):
            return c
    return None


def hb_part(frag: Fragment, a: int) -> int:
    """The hereditarily bland part of a bland object."""
    o = frag.obj(a)
    if not o.is_bland:
        raise NotBland(repr(o))
    kept = frozenset(x for x in o.members if hereditarily_bland(frag, x))
    oid = frag.bland_id(kept)
    if oid is None:
        raise BeyondFragment("hereditarily bland part not registered")
    return oid


def encode_pure(frag: Fragment, p) -> Optional[int]:
    """Id of the hereditarily bland object with the same shape as the pure
    set ``p``, or None when the fragment is too shallow."""
    memo = frag.cache("encode_pure")
    if p in memo:
        return memo[p]
    ids = []
    for x in p:
        sub = encode_pure(frag, x)
        if sub is None:
            memo[p] = None
            return None
        ids.append(sub)
    oid = frag.bland_id(frozenset(ids))
    memo[p] = oid
    return oid


def decode_pure(frag: Fragment, a: int):
    """Pure-set shape of a hereditarily bland object."""
    from .pureset import mk_set

    o = frag.obj(a)
    if not o.is_bland:
        raise NotBland(repr(o))
    return mk_set(decode_pure(frag, m) for m in o.members)


# -- levels over urelements ---------------------------------------------------

def ur_level(frag: Fragment, alpha: int, base: FrozenSet[int]) -> FrozenSet[int]:
    """Level ``alpha`` of the bland hierarchy over ``base``, within the
    fragment: base members plus every registered bland set whose members all
    sit at an earlier level."""
    level = frozenset(base)
    for _ in range(alpha):
        nxt = set(base)
        for o in frag.objects:
            if o.is_bland and o.members <= level:
                nxt.add(o.id)
        level = frozenset(nxt)
    return level


def in_ur_levels(frag: Fragment, base: FrozenSet[int], x: int) -> bool:
    """Whether ``x`` appears at some level over ``base`` (recursive form)."""
    memo = frag.cache(("vfrom", tuple(sorted(base))))
    hit = memo.get(x)
    if hit is None:
        if x in base:
            hit = True
        else:
            o = frag.obj(x)
            memo[x] = False  # guard against self-membership in odd bases
            hit = o.is_bland and all(in_ur_levels(frag, base, m) for m in o.members)
        memo[x] = hit
    return hit


def ur_pot_ids(frag: Fragment, base: FrozenSet[int], member_ids: Iterable[int]) -> FrozenSet[int]:
    mem = set(member_ids)
    out = set(base)

    def below(x: Obj, c: Obj) -> bool:
        # x subset-of c read with primitive membership (non-bland c has none)
        return x.members <= c.members if c.is_bland else not x.members

    for o in frag.objects:
        if o.is_bland and any(below(o, frag.obj(c)) for c in mem):
            out.add(o.id)
    return frozenset(out)


def is_ur_level(frag: Fragment, base: FrozenSet[int], t: int) -> bool:
    """Recognizer for levels over ``base``, via the characterization that a
    level is the ur-pot of its level members."""
    memo = frag.cache(("is_ur_level", tuple(sorted(base))))
    hit = memo.get(t)
    if hit is not None:
        return hit
    o = frag.obj(t)
    if not o.is_bland:
        memo[t] = False
        return False
    memo[t] = False  # recursion guard; members may include base elements
    sub = [r for r in o.members if is_ur_level(frag, base, r)]
    hit = ur_pot_ids(frag, base, sub) == o.members
    memo[t] = hit
    return hit


# -- tap-path decomposition ---------------------------------------------------

def decompose(frag: Fragment, a: int) -> Tuple[int, List[int]]:
    """Split an object into a bland base and a minimal tap path.

    The path lists wand indices in application order; among the equally short
    descents the least wand index (then least argument) is chosen.
    """
    o = frag.obj(a)
    if o.is_bland:
        return a, []
    w, b = min(o.tclass, key=lambda p: (p[0], frag.sort_key(p[1])))
    base, path = decompose(frag, b)
    return base, path + [w]


def bigtap(frag: Fragment, base: int, path: Sequence[int]) -> int:
    """Fold taps left-to-right along ``path`` starting from ``base``."""
    cur = base
    for i, w in enumerate(path):
        nxt = tap(frag, w, cur)
        if nxt is None:
            raise TapUndefinedAt(i)
        cur = nxt
    return cur


# -- stage stability ----------------------------------------------------------

def correspond(small: Fragment, big: Fragment) -> Dict[int, int]:
    """Structural correspondence small-id -> big-id (same spec, deeper run)."""
    out: Dict[int, int] = {}
    for oid in sorted(small.ids(), key=lambda i: small.obj(i).ordrank):
        o = small.obj(oid)
        if o.is_bland:
            target = big.bland_id(frozenset(out[m] for m in o.members))
        else:
            cls = frozenset((w, out[b]) for w, b in o.tclass)
            target = big._tap_index.get(cls)
        if target is None:
            raise StabilityViolation(f"object {oid} of {small.spec.name} "
                                     "has no counterpart in the deeper build")
        out[oid] = target
    return out


def check_stage_stability(spec: WandSpec, small: Fragment, big: Fragment) -> dict:
    """Require dom/equiv answers to agree between a shallow and a deep build.

    Sweeps every (wand, argument) with the argument at least one stage below
    the shallow fragment's top; disagreement raises StabilityViolation, which
    is how look-ahead (not loosely bound) predicates are exposed.
    """
    if small.depth > big.depth:
        raise ValueError("small fragment must be the shallower one")
    mapping = correspond(small, big)
    vs, vb = small.view(), big.view()
    checked = 0
    for a in small.ids():
        if small.obj(a).ordrank + 1 >= small.depth:
            continue
        for w in spec.wand_indices():
            checked += 1
            if wandspec.dom(spec, w, a, vs) != wandspec.dom(spec, w, mapping[a], vb):
                raise StabilityViolation(
                    f"dom({w}, rank-{small.obj(a).ordrank} object) flipped "
                    f"between depth {small.depth} and depth {big.depth}")
        for b in small.ids():
            if small.obj(b).ordrank + 1 >= small.depth:
                continue
            for w in spec.wand_indices():
                for u in spec.wand_indices():
                    checked += 1
                    if (wandspec.equiv(spec, w, a, u, b, vs)
                            != wandspec.equiv(spec, w, mapping[a], u, mapping[b], vb)):
                        raise StabilityViolation(
                            f"equiv(({w},{u}), ranks "
                            f"({small.obj(a).ordrank},{small.obj(b).ordrank})) flipped")
    return {"checked": checked, "small_depth": small.depth, "big_depth": big.depth}
