"""The shipped wand/set theory instances and the Church-universe apparatus.

Instances: the pure theory (no wands), Conway games, hereditary partial
functions, multisets, and the Church universal-set family ``church:<k>``
whose wands are complement (0) and one cardinality wand per positive n <= k.
The Church half also carries n-equivalence with explicit bijection
witnesses, the expansive membership relation, the kind taxonomy, widened
tapping, and the axiom cross-check suite.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from . import universe, wandspec
from .errors import BeyondFragment, TaxonomyViolation
from .pureset import deep_carrier, vn
from .universe import Fragment
from .wandspec import SetQuery, WandId, WandSpec


def _wand_ids(count: int) -> Tuple[WandId, ...]:
    # wand i is designated by the i-th von Neumann natural
    return tuple(WandId(i, deep_carrier(vn(i))) for i in range(count))


def _identity_equiv(w: int, a, u: int, b, q: SetQuery) -> bool:
    return w == u and a == b


def _self_candidates(w: int, a, q: SetQuery, top: int):
    return ((w, a),)


# -- decoding helpers over the query interface ---------------------------------

def pair_decode(q: SetQuery, h) -> Optional[Tuple[object, object]]:
    """Read ``h`` as a Kuratowski pair of universe objects, if it is one."""
    if not q.is_bland(h):
        return None
    ms = q.members(h)
    if len(ms) == 1:
        inner = q.members(ms[0])
        if q.is_bland(ms[0]) and len(inner) == 1:
            return inner[0], inner[0]
        return None
    if len(ms) != 2:
        return None
    fst, snd = ms
    if not (q.is_bland(fst) and q.is_bland(snd)):
        return None
    small, big = sorted((q.members(fst), q.members(snd)), key=len)
    if len(small) != 1 or len(big) != 2:
        return None
    (a,) = small
    if a not in big:
        return None
    b = big[0] if big[1] == a else big[1]
    return a, b


def graph_decode(q: SetQuery, h) -> Optional[List[Tuple[object, object]]]:
    """Read ``h`` as a single-valued set of pairs (a function graph)."""
    if not q.is_bland(h):
        return None
    pairs = []
    seen: Dict[object, object] = {}
    for m in q.members(h):
        p = pair_decode(q, m)
        if p is None:
            return None
        x, y = p
        if x in seen and seen[x] != y:
            return None
        seen[x] = y
        pairs.append((x, y))
    return pairs


def vn_decode(q: SetQuery, h) -> Optional[int]:
    """Read ``h`` as a von Neumann natural."""
    if not q.is_bland(h):
        return None
    ms = q.members(h)
    vals = set()
    for m in ms:
        v = vn_decode(q, m)
        if v is None:
            return None
        vals.add(v)
    return len(ms) if vals == set(range(len(ms))) else None


# -- simple specs ---------------------------------------------------------------

def pure_spec() -> WandSpec:
    """The wandless theory: the plain cumulative hierarchy."""
    return WandSpec(
        name="pure",
        wands=(),
        raw_dom=lambda w, a, q: False,
        raw_equiv=lambda w, a, u, b, q: False,
        equiv_candidates=lambda w, a, q: (),
    )


def conway_spec() -> WandSpec:
    """One wand acting on coded pairs <a, b> of bland sets with b nonempty.

    A game is identified by its pair: raw E is identity.  The courtesy case
    <a, empty> is excluded from the domain (such a pair already *is* the
    game a, read as the bland set of its left options).
    """

    def d(w: int, x, q: SetQuery) -> bool:
        p = pair_decode(q, x)
        if p is None:
            return False
        a, b = p
        return q.is_bland(a) and q.is_bland(b) and bool(q.members(b))

    return WandSpec(name="conway", wands=_wand_ids(1),
                    raw_dom=d, raw_equiv=_identity_equiv,
                    equiv_candidates=_self_candidates)


def left_options(frag: Fragment, y: int) -> frozenset:
    """Left options of a game: the first pair component's members, or the
    members of a bland set read as a game by courtesy."""
    return _options(frag, y)[0]


def right_options(frag: Fragment, y: int) -> frozenset:
    """Right options of a game; bland sets have none by courtesy."""
    return _options(frag, y)[1]


def _options(frag: Fragment, y: int) -> Tuple[frozenset, frozenset]:
    if not 0 <= y < len(frag.objects):
        raise BeyondFragment(f"no object {y}")
    o = frag.obj(y)
    q = frag.view()
    if o.is_bland:
        return frozenset(o.members), frozenset()
    for w, arg in o.tclass:
        p = pair_decode(q, arg)
        if p is not None:
            return frozenset(q.members(p[0])), frozenset(q.members(p[1]))
    raise BeyondFragment(f"object {y} is not a game")


def partial_fun_spec() -> WandSpec:
    """One wand acting on function graphs that are not identity graphs.

    By courtesy a bland set a is the identity function on a's members, so
    tapping an identity graph would duplicate an existing object.
    """

    def d(w: int, g, q: SetQuery) -> bool:
        pairs = graph_decode(q, g)
        if pairs is None:
            return False
        return any(x != y for x, y in pairs)

    return WandSpec(name="partial-fun", wands=_wand_ids(1),
                    raw_dom=d, raw_equiv=_identity_equiv,
                    equiv_candidates=_self_candidates)


def multiset_spec() -> WandSpec:
    """Like partial functions, but values are nonzero counts and graphs whose
    counts are all 1 are excluded (a bland set already is the multiset with
    one copy of each member)."""

    def d(w: int, g, q: SetQuery) -> bool:
        pairs = graph_decode(q, g)
        if pairs is None:
            return False
        counts = []
        for _, y in pairs:
            v = vn_decode(q, y)
            if v is None or v == 0:
                return False
            counts.append(v)
        return any(v != 1 for v in counts)

    return WandSpec(name="multiset", wands=_wand_ids(1),
                    raw_dom=d, raw_equiv=_identity_equiv,
                    equiv_candidates=_self_candidates)


# -- n-equivalence --------------------------------------------------------------

@dataclass(frozen=True)
class NEquivWitness:
    """Witnessing bijections for an n-equivalence, outermost first.

    ``chain[0]`` bijects the (n-1)-fold unions; each later entry is induced
    pointwise from the previous one, down to ``chain[-1]`` on the sets
    themselves.
    """

    n: int
    chain: Tuple[Tuple[Tuple[object, object], ...], ...]


def _union_chain(q: SetQuery, a, n: int) -> Optional[List[Tuple]]:
    """[a, union a, ..., union^(n-1) a] with the non-emptiness and, below the
    top, all-members-bland requirements; None when they fail."""
    levels = [tuple(q.members(a))] if q.is_bland(a) else [()]
    if not levels[0]:
        return None
    for i in range(n - 1):
        cur = levels[i]
        if any(not q.is_bland(x) for x in cur):
            return None
        nxt = []
        seen = set()
        for x in cur:
            for y in q.members(x):
                if y not in seen:
                    seen.add(y)
                    nxt.append(y)
        if not nxt:
            return None
        levels.append(tuple(nxt))
    return levels


def n_equiv_over(q: SetQuery, a, b, n: int) -> Optional[NEquivWitness]:
    """Search for an n-equivalence witness between ``a`` and ``b``.

    The search is exhaustive over bijections of the deepest unions, induced
    upward, pruned by cardinality profiles; results are memoized on the
    query's cache.
    """
    if n < 1:
        raise ValueError("n must be positive")
    cache = wandspec._query_cache(q)
    key = ("neq", n, a, b)
    if key in cache:
        return cache[key]
    res = _n_equiv_search(q, a, b, n)
    cache[key] = res
    return res


def n_equiv_holds(q: SetQuery, a, b, n: int) -> bool:
    """Boolean form of :func:`n_equiv_over`.

    For n = 1 there is nothing to search (any pairing of two equinumerous
    nonempty sets works), so no witness is built and nothing is cached.
    """
    if n == 1:
        ma = q.members(a) if q.is_bland(a) else ()
        mb = q.members(b) if q.is_bland(b) else ()
        return len(ma) > 0 and len(ma) == len(mb)
    return n_equiv_over(q, a, b, n) is not None


def _induce(q: SetQuery, fmap: Dict, level: Sequence, target: Sequence) -> Optional[Dict]:
    """Lift a bijection one level up: x maps to {fmap[y] : y in x}."""
    target_index: Dict[frozenset, object] = {}
    for t in target:
        target_index.setdefault(frozenset(q.members(t)), t)
    out: Dict = {}
    used = set()
    for x in level:
        image = frozenset(fmap[y] for y in q.members(x))
        t = target_index.get(image)
        if t is None or t in used:
            return None
        out[x] = t
        used.add(t)
    return out if len(used) == len(target) else None


def _n_equiv_search(q: SetQuery, a, b, n: int) -> Optional[NEquivWitness]:
    ua = _union_chain(q, a, n)
    ub = _union_chain(q, b, n)
    if ua is None or ub is None:
        return None
    if any(len(x) != len(y) for x, y in zip(ua, ub)):
        return None

    def pack(maps: List[Dict]) -> NEquivWitness:
        chain = tuple(tuple(sorted(m.items(), key=lambda p: q.sort_key(p[0])))
                      for m in maps)
        return NEquivWitness(n, chain)

    if a == b:
        # the identity chain always witnesses self-equivalence
        return pack([{x: x for x in lvl} for lvl in reversed(ua)])

    deep_a, deep_b = ua[n - 1], ub[n - 1]
    if n == 1:
        # no induced maps to satisfy: any pairing works
        return pack([dict(zip(deep_a, deep_b))])

    # Sound pruning for the bottom bijection: container degree is preserved
    # (an induced container bijection forces it); the members of bottom-level
    # elements are not part of the witness, so their sizes must NOT be used.
    def profile(x):
        return sum(1 for c in ua[n - 2] if x in q.members(c))

    def profile_b(y):
        return sum(1 for c in ub[n - 2] if y in q.members(c))

    cands = {x: [y for y in deep_b if profile_b(y) == profile(x)] for x in deep_a}
    slots = sorted(deep_a, key=lambda x: len(cands[x]))

    def all_maps(i: int, fmap: Dict, used: set):
        if i == len(slots):
            yield dict(fmap)
            return
        x = slots[i]
        for y in cands[x]:
            if y in used:
                continue
            fmap[x] = y
            used.add(y)
            yield from all_maps(i + 1, fmap, used)
            del fmap[x]
            used.remove(y)

    for base in all_maps(0, {}, set()):
        maps = [base]
        ok = True
        for i in range(n - 2, -1, -1):
            lifted = _induce(q, maps[-1], ua[i], ub[i])
            if lifted is None:
                ok = False
                break
            maps.append(lifted)
        if ok:
            return pack(maps)
    return None


def union_n(frag: Fragment, a: int, n: int) -> Optional[int]:
    """n-fold union of ``a`` under primitive membership."""
    q = frag.view()
    cur = a
    for _ in range(n):
        members = set()
        for x in q.members(cur):
            members.update(q.members(x))
        oid = frag.bland_id(frozenset(members))
        if oid is None:
            raise BeyondFragment("union not registered")
        cur = oid
    return cur


def n_equiv(frag: Fragment, a: int, b: int, n: int) -> Optional[NEquivWitness]:
    return n_equiv_over(frag.view(), a, b, n)


# -- the Church family ------------------------------------------------------------

def church_spec(k: int) -> WandSpec:
    """Wands 0..k: 0 is complement, each n>0 is the n-cardinality wand.

    D: complement acts on anything that is not already the complement of a
    bland set found earlier; cardinality n acts on anything n-equivalent to
    itself.  E identifies same-n cardinals of n-equivalent sets and links a
    complement with a cardinal when the complemented object is itself that
    cardinal (with stage guards on the existential witnesses).
    """
    if k < 0:
        raise ValueError("k must be >= 0")

    def d(n: int, a, q: SetQuery) -> bool:
        if n == 0:
            return not any(q.is_bland(x) and q.resolve_tap(0, x) == a
                           for x in q.objects_below(q.ordrank(a)))
        return n_equiv_holds(q, a, a, n)

    def e(m: int, a, n: int, b, q: SetQuery) -> bool:
        if m == n and a == b:
            return True
        if 0 < m == n:
            return n_equiv_holds(q, a, b, m)
        if m == 0 and n > 0:
            return _comp_links_cardinal(q, a, n, b)
        if n == 0 and m > 0:
            return _comp_links_cardinal(q, b, m, a)
        return False

    def _comp_links_cardinal(q: SetQuery, a, n: int, b) -> bool:
        # some d of lower stage than a, n-equivalent to b, has a = *0(*n d)
        ra = q.ordrank(a)
        for dd in q.objects_below(ra):
            if not n_equiv_holds(q, dd, b, n):
                continue
            t = q.resolve_tap(n, dd)
            if t is None or q.ordrank(t) >= ra:
                continue
            if q.resolve_tap(0, t) == a:
                return True
        return False

    def _comp_card_shape(q: SetQuery, a) -> Optional[int]:
        # the n for which a = *0(*n d), if a has that shape; the rank guard
        # mirrors the stage guard in the raw clauses, so every tap resolved
        # here was already formed
        if q.is_bland(a):
            return None
        ra = q.ordrank(a)
        for dd in q.objects_below(ra):
            for n in range(1, k + 1):
                t = q.resolve_tap(n, dd)
                if t is None or q.ordrank(t) >= ra:
                    continue
                if q.resolve_tap(0, t) == a:
                    return n
        return None

    def candidates(m: int, a, q: SetQuery, top: int):
        # sound superset of raw-E partners of (m, a) up to rank `top`
        yield (m, a)
        others = q.objects_below(top + 1)
        if m == 0:
            n = _comp_card_shape(q, a)
            if n is not None:
                for b in others:
                    yield (n, b)
            return
        size = len(q.members(a)) if q.is_bland(a) else 0
        if size:
            for b in others:
                if q.is_bland(b) and len(q.members(b)) == size:
                    yield (m, b)
        for b in others:
            if not q.is_bland(b):
                yield (0, b)

    return WandSpec(name=f"church:{k}", wands=_wand_ids(k + 1),
                    raw_dom=d, raw_equiv=e, equiv_candidates=candidates)


# -- kinds, expansive membership, widened taps ------------------------------------

@dataclass(frozen=True)
class CusKind:
    """Which of the three universe kinds an object falls under."""

    tag: str  # "bland" | "tap_of_bland" | "comp_of_card"
    n: Optional[int] = None
    base: Optional[int] = None


def _require_church(frag: Fragment) -> int:
    if not frag.spec.name.startswith("church:"):
        raise ValueError(f"operation requires a church fragment, got {frag.spec.name}")
    return int(frag.spec.name.split(":")[1])


def classify_kind(frag: Fragment, a: int) -> CusKind:
    """Each object is bland, the n-tap of a bland set, or the complement of a
    cardinal; the classifying n is unique."""
    _require_church(frag)
    memo = frag.cache("kind")
    hit = memo.get(a)
    if hit is None:
        hit = _classify_kind(frag, a)
        memo[a] = hit
    return hit


def _classify_kind(frag: Fragment, a: int) -> CusKind:
    o = frag.obj(a)
    if o.is_bland:
        return CusKind("bland")
    q = frag.view()
    bland_pairs = sorted(((w, b) for w, b in o.tclass if q.is_bland(b)),
                         key=lambda p: (p[0], q.sort_key(p[1])))
    if bland_pairs:
        w, b = bland_pairs[0]
        others = {w2 for w2, b2 in bland_pairs}
        if len(others) > 1:
            raise TaxonomyViolation(f"object {a} taps blands with wands {others}")
        return CusKind("tap_of_bland", w, b)
    # all class members are complements (wand 0) of non-bland arguments
    for w, x in sorted(o.tclass, key=lambda p: (p[0], q.sort_key(p[1]))):
        if w != 0:
            raise TaxonomyViolation(f"object {a}: non-complement tap of non-bland")
        inner = classify_kind(frag, x)
        if inner.tag == "tap_of_bland" and inner.n and inner.n > 0:
            return CusKind("comp_of_card", inner.n, inner.base)
    raise TaxonomyViolation(f"object {a} fits no kind")


def varin(frag: Fragment, x: int, a: int) -> bool:
    """Expansive membership: ordinary membership for bland sets, complement
    membership for complements, n-equivalence for cardinals."""
    kind = classify_kind(frag, a)
    if kind.tag == "bland":
        return x in frag.obj(a).members
    memo = frag.cache("varin")
    hit = memo.get((x, a))
    if hit is None:
        q = frag.view()
        if kind.tag == "tap_of_bland":
            if kind.n == 0:
                hit = not varin(frag, x, kind.base)
            else:
                hit = n_equiv_over(q, x, kind.base, kind.n) is not None
        else:
            hit = n_equiv_over(q, x, kind.base, kind.n) is None
        memo[(x, a)] = hit
    return hit


def widetap(frag: Fragment, n: int, a: int) -> Optional[int]:
    """Tap, extended so that complementing the complement of a bland set
    yields the set back."""
    got = universe.tap(frag, n, a)
    if got is not None:
        return got
    if n != 0:
        return None
    kind = classify_kind(frag, a)
    if kind.tag == "tap_of_bland" and kind.n == 0:
        return kind.base
    return None


# -- the axiom cross-check suite ---------------------------------------------------

@dataclass
class CusReport:
    checks: List[Tuple[str, bool, str]]

    @property
    def ok(self) -> bool:
        return all(ok for _, ok, _ in self.checks)

    def failures(self) -> List[Tuple[str, bool, str]]:
        return [c for c in self.checks if not c[1]]


def check_cus_axioms(frag: Fragment) -> CusReport:
    """Verify the bespoke universal-set axioms on a church fragment.

    Covers: complement injectivity, double-complement identity, the
    cardinality identity law, separation of cardinal wands, cardinals never
    being complements, the domain-of-action biconditional, the kind
    taxonomy, the complement law for expansive membership, and generalized
    extensionality.
    """
    k = _require_church(frag)
    q = frag.view()
    checks: List[Tuple[str, bool, str]] = []
    ids = list(frag.ids())
    safe = [a for a in ids if frag.obj(a).ordrank + 1 < frag.depth]
    taps = {}
    for a in safe:
        for n in range(k + 1):
            taps[(n, a)] = universe.tap(frag, n, a)

    def add(name: str, ok: bool, witness: str = "") -> None:
        checks.append((name, ok, witness))

    # complement is injective
    bad = [(a, b) for a in safe for b in safe
           if a != b and taps[(0, a)] is not None and taps[(0, a)] == taps[(0, b)]]
    add("complement-injective", not bad, f"{bad[:1]}")

    # double complement returns the object (where the inner tap exists)
    bad = []
    for a in safe:
        t = taps[(0, a)]
        if t is None or frag.obj(t).ordrank + 1 >= frag.depth:
            continue
        tt = universe.tap(frag, 0, t)
        if tt is not None and tt != a:
            bad.append(a)
    add("double-complement-identity", not bad, f"{bad[:1]}")

    # same cardinal iff same n and n-equivalent
    bad = []
    for n in range(1, k + 1):
        for m in range(1, k + 1):
            for a in safe:
                for b in safe:
                    ta, tb = taps[(n, a)], taps[(m, b)]
                    if ta is None or tb is None:
                        continue
                    same = ta == tb
                    law = (n == m) and n_equiv_over(q, a, b, n) is not None
                    if same != law:
                        bad.append((n, a, m, b))
    add("cardinal-identity-law", not bad, f"{bad[:1]}")

    # no cardinal is a complement of a bland set or of a cardinal
    bad = []
    for n in range(1, k + 1):
        for a in safe:
            t = taps[(n, a)]
            if t is None:
                continue
            kind = classify_kind(frag, t)
            if not (kind.tag == "tap_of_bland" and kind.n == n):
                bad.append((n, a))
    add("cardinals-not-complements", not bad, f"{bad[:1]}")

    # domain-of-action biconditional
    bad = []
    for a in safe:
        for n in range(k + 1):
            if n == 0:
                expected = not any(
                    q.is_bland(x) and q.resolve_tap(0, x) == a
                    for x in q.objects_below(q.ordrank(a)))
            else:
                expected = n_equiv_over(q, a, a, n) is not None
            if (taps[(n, a)] is not None) != expected:
                bad.append((n, a))
    add("making-biconditional", not bad, f"{bad[:1]}")

    # kinds are total with unique n (classify raises on violation)
    bad = []
    for a in ids:
        try:
            classify_kind(frag, a)
        except TaxonomyViolation as exc:
            bad.append((a, str(exc)))
    add("kind-taxonomy-total", not bad, f"{bad[:1]}")

    # complement law for expansive membership
    bad = [(x, a) for a in safe for x in ids
           if widetap(frag, 0, a) is not None
           and varin(frag, x, a) == varin(frag, x, widetap(frag, 0, a))]
    add("complement-law", not bad, f"{bad[:1]}")

    # generalized extensionality over the fragment
    bad = []
    for a in ids:
        for b in ids:
            if a < b and all(varin(frag, x, a) == varin(frag, x, b) for x in ids):
                bad.append((a, b))
    add("generalized-extensionality", not bad, f"{bad[:1]}")

    # bland sets sit strictly below their complements
    bad = []
    for a in safe:
        if frag.obj(a).is_bland and taps[(0, a)] is not None:
            if not frag.obj(a).ordrank < frag.obj(taps[(0, a)]).ordrank:
                bad.append(a)
    add("complement-raises-rank", not bad, f"{bad[:1]}")

    return CusReport(checks)


# -- registry wiring -----------------------------------------------------------

wandspec.register("pure", pure_spec)
wandspec.register("conway", conway_spec)
wandspec.register("partial-fun", partial_fun_spec)
wandspec.register("multiset", multiset_spec)
wandspec.register("church", church_spec)
