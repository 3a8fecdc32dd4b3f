"""Pure-set stage encodings and the two synonymy witness maps.

A stage-sigma universe code ("conch") is either the carrier of a set of
earlier conches (a bland code) or a tap class: the set of pairs
<wand code, argument conch> for all minimal-rank equivalent taps.  Stages are
generated with the same raw D/E predicates as fragment builds, evaluated over
the conch-side query interface, so a fragment and its stage encoding can be
compared bit for bit: the structural recoding of the fragment's rank-<=sigma
objects must equal stage sigma exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

from . import universe, wandspec
from .errors import CapExceeded, NotAConch, NotAPair
from .pureset import (PureSet, carrier, deep_carrier, in_carrier_levels, is_carrier,
                      kpair, kunpair, mk_set, rank, uncarrier)
from .universe import Fragment
from .wandspec import WandSpec


@dataclass
class ConchStage:
    """One stage: its conches, the earlier ones, and that stage's relations."""

    sigma: int
    conches: FrozenSet[PureSet]          # everything of stage rank <= sigma
    below: FrozenSet[PureSet]            # everything of stage rank < sigma
    _stages: "Stages" = field(repr=False, default=None)
    _dom: Optional[FrozenSet[Tuple[PureSet, PureSet]]] = None
    _equiv: Optional[FrozenSet[Tuple[PureSet, ...]]] = None

    @property
    def dom_pairs(self) -> FrozenSet[Tuple[PureSet, PureSet]]:
        """All <wand code, conch> pairs inside the domain of action, with the
        argument of stage rank <= sigma."""
        if self._dom is None:
            st = self._stages
            out = set()
            for a in st.ranked(self.sigma):
                for w in st.spec.wand_indices():
                    if wandspec.dom(st.spec, w, a, st.view):
                        out.add((st.wandcodes[w], a))
            self._dom = frozenset(out)
        return self._dom

    @property
    def equiv_quads(self) -> FrozenSet[Tuple[PureSet, ...]]:
        """All <w, a, u, b> with both arguments of stage rank <= sigma that
        the official equivalence (including its identity clause) relates."""
        if self._equiv is None:
            st = self._stages
            out = set()
            objs = st.ranked(self.sigma)
            for a in objs:
                for b in objs:
                    for w in st.spec.wand_indices():
                        for u in st.spec.wand_indices():
                            if wandspec.equiv(st.spec, w, a, u, b, st.view):
                                out.add((st.wandcodes[w], a, st.wandcodes[u], b))
            self._equiv = frozenset(out)
        return self._equiv


class _ConchView:
    """SetQuery interface over generated conches; handles are pure sets."""

    def __init__(self, stages: "Stages"):
        self.stages = stages
        self.cache: dict = {}
        self._taps: Dict[Tuple[int, PureSet], Optional[PureSet]] = {}

    def is_bland(self, h: PureSet) -> bool:
        return is_carrier(h)

    def members(self, h: PureSet) -> Tuple[PureSet, ...]:
        return uncarrier(h).elements if is_carrier(h) else ()

    def is_wand(self, h: PureSet) -> bool:
        return h in self.stages.wandcode_set

    def ordrank(self, h: PureSet) -> int:
        got = self.stages.conchrank.get(h)
        if got is None:
            raise NotAConch(repr(h))
        return got

    def resolve_tap(self, w: int, h: PureSet) -> Optional[PureSet]:
        key = (w, h)
        if key in self._taps:
            return self._taps[key]
        cls = wandspec.tap_class(self.stages.spec, w, h, self)
        if cls is None:
            self._taps[key] = None
            return None
        got = self.stages.class_code(cls)
        self._taps[key] = got
        return got

    def objects_below(self, r: int) -> Tuple[PureSet, ...]:
        return self.stages.ranked(r - 1)

    def sort_key(self, h: PureSet):
        return h.sort_key()


@dataclass
class Stages:
    """A run of stage generation: conches by rank plus the shared view."""

    spec: WandSpec
    depth: int
    wandcodes: Tuple[PureSet, ...]
    stages: List[ConchStage] = field(default_factory=list)
    conchrank: Dict[PureSet, int] = field(default_factory=dict)
    view: _ConchView = None
    _ranked_cache: Dict[int, Tuple[PureSet, ...]] = field(default_factory=dict)

    @property
    def wandcode_set(self) -> frozenset:
        return frozenset(self.wandcodes)

    def ranked(self, top: int) -> Tuple[PureSet, ...]:
        """All conches of stage rank <= top, canonically ordered."""
        got = self._ranked_cache.get(top)
        if got is None:
            got = tuple(sorted((c for c, r in self.conchrank.items() if r <= top),
                               key=PureSet.sort_key))
            self._ranked_cache[top] = got
        return got

    def class_code(self, cls: Sequence[Tuple[int, PureSet]]) -> PureSet:
        """The pure set coding a tap class: {<wand code, argument>...}."""
        return mk_set(kpair(self.wandcodes[w], b) for w, b in cls)

    def stage_rank(self, c: PureSet) -> int:
        got = self.conchrank.get(c)
        if got is None:
            raise NotAConch(repr(c))
        return got

    def omega(self) -> int:
        """Largest wand code rank (0 when there are no wands)."""
        return max((rank(c) for c in self.wandcodes), default=0)

    def rank_bound_slack(self) -> List[Tuple[int, int, int]]:
        """Per stage: (sigma, measured rank of the stage set, bound)."""
        out = []
        for st in self.stages:
            measured = rank(mk_set(st.conches))
            out.append((st.sigma, measured, self.omega() + 4 * st.sigma + 4))
        return out


def gen_stages(spec: WandSpec, depth: int, max_width: int = 20) -> Stages:
    """Generate stages 0..depth-1 of the conch universe for ``spec``.

    Stage sigma collects the carriers of all subsets of the earlier conches
    together with the tap classes formed at earlier stages; new tap classes
    are read off the stage's domain and equivalence relations exactly as in a
    fragment build.
    """
    codes = tuple(w.code for w in spec.wands)
    st = Stages(spec=spec, depth=depth, wandcodes=codes)
    st.view = _ConchView(st)

    pending_taps: List[PureSet] = []   # classes formed at the previous stage
    below: set = set()
    for sigma in range(depth):
        if len(below) > max_width:
            raise CapExceeded(
                f"stage {sigma}: 2**{len(below)} carriers exceed width {max_width}")
        spread = sorted(below, key=PureSet.sort_key)
        fresh = set()
        for mask in range(1 << len(spread)):
            c = carrier(mk_set(spread[i] for i in range(len(spread)) if mask >> i & 1))
            fresh.add(c)
        fresh.update(pending_taps)
        for c in fresh:
            st.conchrank.setdefault(c, sigma)
        conches = frozenset(below | fresh)
        st.stages.append(ConchStage(sigma=sigma, conches=conches,
                                    below=frozenset(below), _stages=st))
        st._ranked_cache.clear()

        # tap classes whose minimal argument rank is sigma become the
        # non-bland conches of the next stage
        pending_taps = []
        if sigma + 1 < depth:
            seen = set()
            for a in st.ranked(sigma):
                if st.stage_rank(a) != sigma:
                    continue
                for w in spec.wand_indices():
                    cls = wandspec.tap_class(spec, w, a, st.view)
                    if cls is None:
                        continue
                    if any(st.stage_rank(b) != sigma for _, b in cls):
                        continue  # equivalent to an earlier tap; not new here
                    code = st.class_code(cls)
                    if code not in seen:
                        seen.add(code)
                        pending_taps.append(code)
        below = set(conches)
    return st


def conchrank(stages: Stages, c: PureSet) -> int:
    """Least stage at which ``c`` occurs."""
    return stages.stage_rank(c)


def check_stage_laws(stages: Stages) -> List[str]:
    """Structural laws of the generated stages; returns violations.

    Every conch is a carrier of conches or a nonempty minimal-rank tap class
    (never both); tap classes sit one rank above their arguments and
    regenerate themselves from any member; bland codes rank as the strict
    sup of their members' ranks; and the stage relations are stable: answers
    at stage sigma agree with any later stage for arguments of rank <= sigma.
    """
    bad: List[str] = []
    spec = stages.spec
    view = stages.view

    # stages are cumulative: each stage's "below" is exactly the union of
    # the earlier stages, and stage contents grow monotonically
    running: set = set()
    for st in stages.stages:
        if st.below != frozenset(running):
            bad.append(f"stage {st.sigma} earlier-contents mismatch")
        if not st.below <= st.conches:
            bad.append(f"stage {st.sigma} not monotone")
        running |= st.conches

    for c, r in sorted(stages.conchrank.items(), key=lambda p: p[0].sort_key()):
        if is_carrier(c):
            inner = uncarrier(c)
            if any(x not in stages.conchrank for x in inner):
                bad.append(f"carrier at rank {r} holds a non-conch")
                continue
            sup = max((stages.stage_rank(x) + 1 for x in inner), default=0)
            if sup != r:
                bad.append(f"carrier rank {r} != member sup {sup}")
            continue
        # a tap class
        if not len(c):
            bad.append("empty non-carrier conch")
            continue
        try:
            pairs = [kunpair(p) for p in c]
        except NotAPair:
            bad.append(f"non-carrier conch at rank {r} is not a set of pairs")
            continue
        args = []
        for wcode, b in pairs:
            if wcode not in stages.wandcode_set or b not in stages.conchrank:
                bad.append(f"tap class member at rank {r} malformed")
                continue
            args.append((stages.wandcodes.index(wcode), b))
        ranks = {stages.stage_rank(b) for _, b in args}
        if len(ranks) != 1 or ranks.pop() + 1 != r:
            bad.append(f"tap class rank law broken at rank {r}")
        for w, b in args:
            if not wandspec.dom(spec, w, b, view):
                bad.append(f"tap class member outside domain at rank {r}")
            cls = wandspec.tap_class(spec, w, b, view)
            if cls is None or stages.class_code(cls) != c:
                bad.append(f"tap class does not regenerate from a member at rank {r}")

    # relation stability across stages (for arguments comfortably below)
    for sigma in range(stages.depth - 1):
        lo, hi = stages.stages[sigma], stages.stages[sigma + 1]
        lo_dom = set(lo.dom_pairs)
        for (w, a) in lo_dom:
            if (w, a) not in hi.dom_pairs:
                bad.append(f"dom pair lost from stage {sigma} to {sigma + 1}")
        for (w, a) in hi.dom_pairs:
            if stages.stage_rank(a) <= sigma and (w, a) not in lo_dom:
                bad.append(f"dom pair appeared late at stage {sigma + 1}")
        lo_eq = lo.equiv_quads
        for quad in hi.equiv_quads:
            _, a, _, b = quad
            low_enough = max(stages.stage_rank(a), stages.stage_rank(b)) <= sigma
            if low_enough and quad not in lo_eq:
                bad.append(f"equiv quad appeared late at stage {sigma + 1}")
        for quad in lo_eq:
            if quad not in hi.equiv_quads:
                bad.append(f"equiv quad lost from stage {sigma} to {sigma + 1}")

    # found-at reading: rank <= alpha iff found at the carrier of the
    # alpha-stage's earlier conches
    for alpha in range(stages.depth):
        stage = stages.stages[alpha]
        wev = carrier(mk_set(stage.below))
        for c in stages.ranked(stages.depth - 1):
            lhs = stages.stage_rank(c) <= alpha
            rhs = _found_at_code(stages, c, wev)
            if lhs != rhs:
                bad.append(f"found-at mismatch at stage {alpha}")
                break
    return bad


def _found_at_code(stages: Stages, c: PureSet, wev: PureSet) -> bool:
    view = stages.view
    contents = uncarrier(wev).elements
    if is_carrier(c):
        return all(x in contents for x in uncarrier(c))
    for b in contents:
        for w in stages.spec.wand_indices():
            if view.resolve_tap(w, b) == c:
                return True
    return False


# -- the structural recoding of a fragment -------------------------------------

def conch_code(frag: Fragment, a: int) -> PureSet:
    """The canonical pure-set code of a fragment object.

    Bland objects become carriers of their members' codes; tapped objects
    become the set of <wand code, argument code> pairs of their class.
    """
    memo = frag.cache("conch_code")
    got = memo.get(a)
    if got is None:
        o = frag.obj(a)
        if o.is_bland:
            got = carrier(mk_set(conch_code(frag, m) for m in o.members))
        else:
            codes = frag.spec.wands
            got = mk_set(kpair(codes[w].code, conch_code(frag, b))
                         for w, b in o.tclass)
        memo[a] = got
    return got


# -- the round-trip verification -----------------------------------------------

@dataclass
class SynonymyReport:
    """Outcome of the full witness verification, per check group."""

    sections: Dict[str, List[str]] = field(default_factory=dict)

    def record(self, section: str, witness: Optional[str]) -> None:
        bucket = self.sections.setdefault(section, [])
        if witness:
            bucket.append(witness)

    def ok(self, section: str) -> bool:
        return not self.sections.get(section)

    @property
    def all_pass(self) -> bool:
        return all(not v for v in self.sections.values())

    def failures(self) -> Dict[str, List[str]]:
        return {k: v for k, v in self.sections.items() if v}


def verify_roundtrip(frag: Fragment, stages: Stages) -> SynonymyReport:
    """Verify the two witness maps between a fragment and its stages.

    Checks, over everything in the exhaustive fragment: the pure-set code map
    restricts to a membership- and wandhood-preserving bijection between pure
    sets and the hereditarily bland objects; the fragment recoding is
    injective, preserves blandness and membership everywhere and taps below
    the safe rank bound; ranks correspond; and the recoded fragment equals
    the independently generated stages bit for bit.
    """
    from .pureset import lt_levels

    report = SynonymyReport()
    if not frag.exhaustive:
        report.record("preconditions", "fragment not exhaustive")
        return report
    if frag.depth != stages.depth or frag.spec.name != stages.spec.name:
        report.record("preconditions", "fragment and stages disagree on spec/depth")
        return report
    for name in ("hb_iso", "code_injective", "code_clauses", "rank_correspondence",
                 "cross_construction", "level_correspondence", "relation_stability"):
        report.sections.setdefault(name, [])

    ids = list(frag.ids())
    top = frag.depth - 1

    # -- pure sets vs hereditarily bland objects vs carrier-hierarchy codes
    pures = sorted(lt_levels(frag.depth + 1)[-1].elements, key=PureSet.sort_key)
    hb_ids = [a for a in ids if universe.hereditarily_bland(frag, a)]
    encoded = {}
    for p in pures:
        oid = universe.encode_pure(frag, p)
        if oid is None:
            report.record("hb_iso", f"pure set of rank {rank(p)} has no object")
            continue
        encoded[p] = oid
    if sorted(encoded.values()) != sorted(hb_ids):
        report.record("hb_iso", "pure sets do not biject onto the hereditarily bland objects")
    for p, po in encoded.items():
        for q, qo in encoded.items():
            if (p in q) != (po in frag.obj(qo).members):
                report.record("hb_iso", f"membership not preserved ({p} in {q})")
    for p in pures:
        code = deep_carrier(p)
        if stages.conchrank.get(code) != rank(p):
            report.record("hb_iso", f"code of rank-{rank(p)} pure set ranks wrong")
        if not in_carrier_levels(frozenset(), code):
            report.record("hb_iso", "code escapes the empty-base carrier hierarchy")
    hb_codes = {conch_code(frag, a) for a in hb_ids}
    pure_codes = {deep_carrier(p) for p in pures}
    if hb_codes != pure_codes:
        report.record("hb_iso", "hereditarily bland codes differ from pure-set codes")
    wand_objs = frag.wand_obj_ids()
    for wid in frag.spec.wands:
        oid = wand_objs.get(wid.index)
        if oid is None:
            report.record("hb_iso", f"wand {wid.index} designation unregistered")
        elif conch_code(frag, oid) != wid.code:
            report.record("hb_iso", f"wand {wid.index} code mismatch")

    # -- the recoding map
    codes = {a: conch_code(frag, a) for a in ids}
    if len(set(codes.values())) != len(ids):
        report.record("code_injective", "two objects share a code")

    for a in ids:
        o = frag.obj(a)
        if o.is_bland != is_carrier(codes[a]):
            report.record("code_clauses", f"blandness flips for object {a}")
        if o.ordrank != stages.conchrank.get(codes[a]):
            report.record("rank_correspondence",
                          f"object {a}: rank {o.ordrank} vs stage "
                          f"{stages.conchrank.get(codes[a])}")
    for a in ids:
        for b in ids:
            lhs = frag.obj(b).is_bland and a in frag.obj(b).members
            rhs = is_carrier(codes[b]) and codes[a] in uncarrier(codes[b])
            if lhs != rhs:
                report.record("code_clauses", f"membership flips for ({a},{b})")

    # tap preservation below the safe bound (the guard in the structure-
    # preservation induction: tapping just below the top leaves the fragment)
    view = frag.view()
    for a in ids:
        if frag.obj(a).ordrank + 1 >= top:
            continue
        for w in frag.spec.wand_indices():
            got = view.resolve_tap(w, a)
            stage_tap = stages.view.resolve_tap(w, codes[a])
            lhs = None if got is None else codes[got]
            if lhs != stage_tap:
                report.record("code_clauses", f"tap flips for wand {w} on object {a}")

    # -- cross construction: recoded rank-<=sigma fragment == stage sigma
    for sigma in range(frag.depth):
        want = frozenset(codes[a] for a in ids if frag.obj(a).ordrank <= sigma)
        got = stages.stages[sigma].conches
        if want != got:
            report.record("cross_construction",
                          f"stage {sigma}: {len(want)} recoded vs {len(got)} generated")

    # -- the bland hierarchies over matching stages correspond: an object
    # sits in some level over the stage-alpha contents exactly when its code
    # sits in some carrier level over the earlier conches
    for alpha in range(frag.depth):
        base_ids = frozenset(frag.wevel_contents[alpha])
        base_codes = stages.stages[alpha].below
        for a in ids:
            lhs = universe.in_ur_levels(frag, base_ids, a)
            rhs = in_carrier_levels(base_codes, codes[a])
            if lhs != rhs:
                report.record("level_correspondence",
                              f"object {a} at stage {alpha}: {lhs} vs {rhs}")

    # -- relation answers agree between the fragment and every stage
    for sigma in range(frag.depth):
        stage = stages.stages[sigma]
        for a in ids:
            if frag.obj(a).ordrank > sigma:
                continue
            for w in frag.spec.wand_indices():
                lhs = wandspec.dom(frag.spec, w, a, view)
                rhs = (stages.wandcodes[w], codes[a]) in stage.dom_pairs
                if lhs != rhs:
                    report.record("relation_stability",
                                  f"dom disagrees at stage {sigma} (wand {w})")
            for b in ids:
                if frag.obj(b).ordrank > sigma:
                    continue
                for w in frag.spec.wand_indices():
                    for u in frag.spec.wand_indices():
                        lhs = wandspec.equiv(frag.spec, w, a, u, b, view)
                        rhs = (stages.wandcodes[w], codes[a],
                               stages.wandcodes[u], codes[b]) in stage.equiv_quads
                        if lhs != rhs:
                            report.record("relation_stability",
                                          f"equiv disagrees at stage {sigma}")
    return report
