"""First-order syntax, finite-model evaluation, and the translations.

The signatures: ``ws`` has Bland, Wand, In, Tap and equality (tap is a
ternary relation, not a function symbol); ``lt`` has In, Wand and equality;
``e`` has In and equality only.  Translations are syntax transformers:

* ``tau``    : lt -> ws, relativizing to hereditarily bland objects;
* ``tolt``   : ws -> lt extended with stage-interpreted predicates;
* ``bullet`` : ws -> e, rewriting everything in terms of one membership;
* ``circle`` : e -> ws, reading membership expansively.

Predicates that the sources define by recursion (n-equivalence, finite
ordinals, the stage relations) are emitted as named atoms whose oracles the
target model supplies; everything else is expanded syntactically.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, List, Optional, Tuple

from .errors import ParseError, SignatureError

SIG_WS = "ws"
SIG_LT = "lt"
SIG_E = "e"


# -- syntax --------------------------------------------------------------------

@dataclass(frozen=True)
class Var:
    name: str

    def __repr__(self):
        return self.name


@dataclass(frozen=True)
class Bland:
    t: Var


@dataclass(frozen=True)
class Wand:
    t: Var


@dataclass(frozen=True)
class In:
    x: Var
    y: Var


@dataclass(frozen=True)
class Tap:
    w: Var
    a: Var
    c: Var


@dataclass(frozen=True)
class Eq:
    x: Var
    y: Var


@dataclass(frozen=True)
class Defined:
    """A named predicate interpreted by the evaluating model's oracle."""

    name: str
    args: Tuple[Var, ...]


@dataclass(frozen=True)
class Not:
    f: object


@dataclass(frozen=True)
class And:
    lhs: object
    rhs: object


@dataclass(frozen=True)
class Or:
    lhs: object
    rhs: object


@dataclass(frozen=True)
class Implies:
    lhs: object
    rhs: object


@dataclass(frozen=True)
class Iff:
    lhs: object
    rhs: object


@dataclass(frozen=True)
class Forall:
    v: Var
    body: object


@dataclass(frozen=True)
class Exists:
    v: Var
    body: object


ATOMS = (Bland, Wand, In, Tap, Eq, Defined)
_ALLOWED = {
    SIG_WS: (Bland, Wand, In, Tap, Eq, Defined),
    SIG_LT: (Wand, In, Eq, Defined),
    SIG_E: (In, Eq, Defined),
}


def free_vars(f) -> frozenset:
    if isinstance(f, (Bland, Wand)):
        return frozenset((f.t,))
    if isinstance(f, (In, Eq)):
        return frozenset((f.x, f.y))
    if isinstance(f, Tap):
        return frozenset((f.w, f.a, f.c))
    if isinstance(f, Defined):
        return frozenset(f.args)
    if isinstance(f, Not):
        return free_vars(f.f)
    if isinstance(f, (And, Or, Implies, Iff)):
        return free_vars(f.lhs) | free_vars(f.rhs)
    if isinstance(f, (Forall, Exists)):
        return free_vars(f.body) - {f.v}
    raise TypeError(f"not a formula: {f!r}")


def check_signature(f, sig: str) -> None:
    """Raise SignatureError if ``f`` uses atoms outside ``sig``."""
    allowed = _ALLOWED[sig]
    stack = [f]
    while stack:
        g = stack.pop()
        if isinstance(g, ATOMS):
            if not isinstance(g, allowed):
                raise SignatureError(f"{type(g).__name__} atom not in signature {sig}")
        elif isinstance(g, Not):
            stack.append(g.f)
        elif isinstance(g, (And, Or, Implies, Iff)):
            stack.extend((g.lhs, g.rhs))
        elif isinstance(g, (Forall, Exists)):
            stack.append(g.body)
        else:
            raise TypeError(f"not a formula: {g!r}")


# -- parsing and rendering -------------------------------------------------------

_PUNCT = ("<->", "->", "|", "&", "~", "(", ")", ",", "=", ".")


def _tokenize(text: str) -> List[Tuple[str, str, int]]:
    out = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch == "#":
            break
        for p in _PUNCT:
            if text.startswith(p, i):
                out.append(("punct", p, i))
                i += len(p)
                break
        else:
            if ch.isalpha() or ch == "_":
                j = i
                while j < len(text) and (text[j].isalnum() or text[j] == "_"):
                    j += 1
                out.append(("ident", text[i:j], i))
                i = j
            else:
                raise ParseError(f"unexpected character {ch!r}", i)
    out.append(("end", "", len(text)))
    return out


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.pos = 0

    def peek(self) -> Tuple[str, str, int]:
        return self.toks[self.pos]

    def take(self, kind: str, value: Optional[str] = None) -> Tuple[str, str, int]:
        k, v, at = self.toks[self.pos]
        if k != kind or (value is not None and v != value):
            raise ParseError(f"expected {value or kind}, found {v or 'end of input'}", at)
        self.pos += 1
        return k, v, at

    def formula(self):
        k, v, _ = self.peek()
        if k == "ident" and v in ("forall", "exists"):
            self.take("ident")
            _, name, _ = self.take("ident")
            self.take("punct", ".")
            body = self.formula()
            return (Forall if v == "forall" else Exists)(Var(name), body)
        return self.iff()

    def iff(self):
        lhs = self.imp()
        while self.peek()[:2] == ("punct", "<->"):
            self.take("punct", "<->")
            lhs = Iff(lhs, self.imp())
        return lhs

    def imp(self):
        lhs = self.disj()
        if self.peek()[:2] == ("punct", "->"):
            self.take("punct", "->")
            return Implies(lhs, self.imp())  # right associative
        return lhs

    def disj(self):
        lhs = self.conj()
        while self.peek()[:2] == ("punct", "|"):
            self.take("punct", "|")
            lhs = Or(lhs, self.conj())
        return lhs

    def conj(self):
        lhs = self.unary()
        while self.peek()[:2] == ("punct", "&"):
            self.take("punct", "&")
            lhs = And(lhs, self.unary())
        return lhs

    def unary(self):
        k, v, at = self.peek()
        if (k, v) == ("punct", "~"):
            self.take("punct", "~")
            return Not(self.unary())
        if (k, v) == ("punct", "("):
            self.take("punct", "(")
            f = self.formula()
            self.take("punct", ")")
            return f
        if k == "ident":
            if v in ("forall", "exists"):
                return self.formula()  # a quantifier binds the rest
            return self.atom()
        raise ParseError(f"expected a formula, found {v or 'end of input'}", at)

    def atom(self):
        _, head, at = self.take("ident")
        if head in ("forall", "exists"):
            raise ParseError("quantifier cannot start an atom", at)
        if head in ("Bland", "Wand", "In", "Tap"):
            self.take("punct", "(")
            args = [Var(self.take("ident")[1])]
            while self.peek()[:2] == ("punct", ","):
                self.take("punct", ",")
                args.append(Var(self.take("ident")[1]))
            self.take("punct", ")")
            arity = {"Bland": 1, "Wand": 1, "In": 2, "Tap": 3}[head]
            if len(args) != arity:
                raise ParseError(f"{head} takes {arity} arguments", at)
            if head == "Bland":
                return Bland(args[0])
            if head == "Wand":
                return Wand(args[0])
            if head == "In":
                return In(args[0], args[1])
            return Tap(args[0], args[1], args[2])
        self.take("punct", "=")
        return Eq(Var(head), Var(self.take("ident")[1]))


def parse(text: str):
    """Parse one formula; raises ParseError with an offset on bad input."""
    p = _Parser(text)
    f = p.formula()
    p.take("end")
    return f


def render(f) -> str:
    """Canonical text form; ``parse(render(f))`` returns an equal formula."""
    if isinstance(f, Bland):
        return f"Bland({f.t.name})"
    if isinstance(f, Wand):
        return f"Wand({f.t.name})"
    if isinstance(f, In):
        return f"In({f.x.name},{f.y.name})"
    if isinstance(f, Tap):
        return f"Tap({f.w.name},{f.a.name},{f.c.name})"
    if isinstance(f, Eq):
        return f"{f.x.name} = {f.y.name}"
    if isinstance(f, Defined):
        return f"{f.name}<{','.join(a.name for a in f.args)}>"
    if isinstance(f, Not):
        return f"~{_wrap(f.f)}"
    if isinstance(f, And):
        return f"{_wrap(f.lhs)} & {_wrap(f.rhs)}"
    if isinstance(f, Or):
        return f"{_wrap(f.lhs)} | {_wrap(f.rhs)}"
    if isinstance(f, Implies):
        return f"{_wrap(f.lhs)} -> {_wrap(f.rhs)}"
    if isinstance(f, Iff):
        return f"{_wrap(f.lhs)} <-> {_wrap(f.rhs)}"
    if isinstance(f, Forall):
        return f"forall {f.v.name}. {render(f.body)}"
    if isinstance(f, Exists):
        return f"exists {f.v.name}. {render(f.body)}"
    raise TypeError(f"not a formula: {f!r}")


def _wrap(f) -> str:
    if isinstance(f, ATOMS) or isinstance(f, Not):
        return render(f)
    return f"({render(f)})"


def parse_sentences(text: str) -> List[Tuple[str, object]]:
    """Parse a sentence file: one sentence per line, '#' starts a comment.

    Lines may carry an optional leading ``name:`` label (an identifier that
    is not an atom head followed by a colon).
    """
    out = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        name = f"line-{lineno}"
        head, _, rest = line.partition(":")
        if rest and " " not in head.strip() and not head.strip().startswith(
                ("Bland", "Wand", "In", "Tap", "forall", "exists")):
            name, line = head.strip(), rest
        out.append((name, parse(line)))
    return out


# -- finite models ----------------------------------------------------------------

@dataclass
class FiniteModel:
    """A finite structure: a carrier plus total relation oracles."""

    name: str
    signature: str
    carrier: Tuple
    bland: Callable = None
    wand: Callable = None
    member: Callable = None
    tap: Callable = None
    defined: Dict[str, Callable] = field(default_factory=dict)


def eval_formula(model: FiniteModel, f, env: Optional[Dict[Var, object]] = None) -> bool:
    """Tarskian truth over ``model``; quantifiers range over the carrier.

    Sub-formula values are memoized per (node, relevant bindings), so large
    relativized guards stay cheap.
    """
    env = env or {}
    missing = free_vars(f) - set(env)
    if missing:
        raise SignatureError(f"unbound variables: {sorted(v.name for v in missing)}")
    check_signature(f, model.signature)
    memo: dict = {}
    fv_cache: dict = {}

    def fv(g) -> frozenset:
        got = fv_cache.get(id(g))
        if got is None:
            got = free_vars(g)
            fv_cache[id(g)] = got
        return got

    def ev(g, env: Dict[Var, object]) -> bool:
        key = (id(g), tuple(sorted((v.name, env[v]) for v in fv(g))))
        hit = memo.get(key)
        if hit is not None:
            return hit
        out = _ev(g, env)
        memo[key] = out
        return out

    def _ev(g, env) -> bool:
        if isinstance(g, Bland):
            return bool(model.bland(env[g.t]))
        if isinstance(g, Wand):
            return bool(model.wand(env[g.t]))
        if isinstance(g, In):
            return bool(model.member(env[g.x], env[g.y]))
        if isinstance(g, Tap):
            return bool(model.tap(env[g.w], env[g.a], env[g.c]))
        if isinstance(g, Eq):
            return env[g.x] == env[g.y]
        if isinstance(g, Defined):
            oracle = model.defined.get(g.name)
            if oracle is None:
                raise SignatureError(f"model {model.name} has no oracle {g.name!r}")
            return bool(oracle(*(env[a] for a in g.args)))
        if isinstance(g, Not):
            return not ev(g.f, env)
        if isinstance(g, And):
            return ev(g.lhs, env) and ev(g.rhs, env)
        if isinstance(g, Or):
            return ev(g.lhs, env) or ev(g.rhs, env)
        if isinstance(g, Implies):
            return not ev(g.lhs, env) or ev(g.rhs, env)
        if isinstance(g, Iff):
            return ev(g.lhs, env) == ev(g.rhs, env)
        if isinstance(g, (Forall, Exists)):
            want_all = isinstance(g, Forall)
            for e in model.carrier:
                sub = dict(env)
                sub[g.v] = e
                if ev(g.body, sub) != want_all:
                    return not want_all
            return want_all
        raise TypeError(f"not a formula: {g!r}")

    return ev(f, env)


# -- helpers for building formulas -------------------------------------------------

class _Fresh:
    def __init__(self, prefix: str = "_v"):
        self.prefix = prefix
        self.n = 0

    def __call__(self) -> Var:
        self.n += 1
        return Var(f"{self.prefix}{self.n}")


def subset(x: Var, y: Var, fresh: _Fresh):
    z = fresh()
    return Forall(z, Implies(In(z, x), In(z, y)))


def hb_formula(v: Var, fresh: _Fresh):
    """Hereditary blandness, in the witness-set form: v is bland and some
    superset of v has only bland subsets of itself as members."""
    c, x = fresh(), fresh()
    return And(Bland(v),
               Exists(c, And(subset(v, c, fresh),
                             Forall(x, Implies(In(x, c),
                                               And(subset(x, c, fresh), Bland(x)))))))


def found_at_formula(x: Var, r: Var, fresh: _Fresh):
    """x is found at r: a bland subset of r, or a tap of one of r's members."""
    w, b = fresh(), fresh()
    return Or(And(Bland(x), subset(x, r, fresh)),
              Exists(w, Exists(b, And(In(b, r), Tap(w, b, x)))))


def wevel_formula(s: Var, fresh: _Fresh):
    """s is a stage proxy: the pot of some wistory."""
    h = fresh()

    def pot_eq(target: Var, source: Var, extra: Optional[Var]):
        # target = { x : exists r in source (and r in extra) with x found at r }
        x, r = fresh(), fresh()
        guard = In(r, source) if extra is None else And(In(r, source), In(r, extra))
        return Forall(x, Iff(In(x, target),
                             Exists(r, And(guard, found_at_formula(x, r, fresh)))))

    a = fresh()
    wistory = And(Bland(h), Forall(a, Implies(In(a, h), pot_eq(a, a, h))))
    return Exists(h, And(wistory, pot_eq(s, h, None)))


def lt_level_formula(s: Var, fresh: _Fresh):
    """s is a level of the plain hierarchy: the pot of some history, where
    pot collects all subsets of members."""
    h = fresh()

    def pot_eq(target: Var, source: Var, extra: Optional[Var]):
        x, r = fresh(), fresh()
        guard = In(r, source) if extra is None else And(In(r, source), In(r, extra))
        return Forall(x, Iff(In(x, target),
                             Exists(r, And(guard, subset(x, r, fresh)))))

    a = fresh()
    history = Forall(a, Implies(In(a, h), pot_eq(a, a, h)))
    return Exists(h, And(history, pot_eq(s, h, None)))


def closed(f):
    """Universally close a formula."""
    for v in sorted(free_vars(f), key=lambda v: v.name, reverse=True):
        f = Forall(v, f)
    return f


# -- translations -----------------------------------------------------------------

def translate_tau(f):
    """lt -> ws: relativize quantifiers to hereditary blandness and guard
    membership the same way; the wand predicate carries over."""
    check_signature(f, SIG_LT)
    fresh = _Fresh("_h")

    def go(g):
        if isinstance(g, In):
            return And(In(g.x, g.y), hb_formula(g.y, fresh))
        if isinstance(g, Wand):
            return Wand(g.t)
        if isinstance(g, Eq):
            return g
        if isinstance(g, Defined):
            raise SignatureError(f"cannot translate defined atom {g.name!r}")
        if isinstance(g, Not):
            return Not(go(g.f))
        if isinstance(g, And):
            return And(go(g.lhs), go(g.rhs))
        if isinstance(g, Or):
            return Or(go(g.lhs), go(g.rhs))
        if isinstance(g, Implies):
            return Implies(go(g.lhs), go(g.rhs))
        if isinstance(g, Iff):
            return Iff(go(g.lhs), go(g.rhs))
        if isinstance(g, Forall):
            return Forall(g.v, Implies(hb_formula(g.v, fresh), go(g.body)))
        if isinstance(g, Exists):
            return Exists(g.v, And(hb_formula(g.v, fresh), go(g.body)))
        raise TypeError(f"not a formula: {g!r}")

    return go(f)


def translate_tolt(f):
    """ws -> lt extended with stage-interpreted predicates.

    The stage side defines blandness, membership, wandhood and tapping from
    its own encodings; those four come out as named atoms whose oracles a
    stage model supplies, and quantifiers are guarded by the universe-code
    predicate."""
    check_signature(f, SIG_WS)

    def go(g):
        if isinstance(g, Bland):
            return Defined("bland*", (g.t,))
        if isinstance(g, Wand):
            return Defined("wand*", (g.t,))
        if isinstance(g, In):
            return Defined("in*", (g.x, g.y))
        if isinstance(g, Tap):
            return Defined("tap*", (g.w, g.a, g.c))
        if isinstance(g, Eq):
            return g
        if isinstance(g, Defined):
            return Defined(g.name + "*", g.args)
        if isinstance(g, Not):
            return Not(go(g.f))
        if isinstance(g, And):
            return And(go(g.lhs), go(g.rhs))
        if isinstance(g, Or):
            return Or(go(g.lhs), go(g.rhs))
        if isinstance(g, Implies):
            return Implies(go(g.lhs), go(g.rhs))
        if isinstance(g, Iff):
            return Iff(go(g.lhs), go(g.rhs))
        if isinstance(g, Forall):
            return Forall(g.v, Implies(Defined("conch", (g.v,)), go(g.body)))
        if isinstance(g, Exists):
            return Exists(g.v, And(Defined("conch", (g.v,)), go(g.body)))
        raise TypeError(f"not a formula: {g!r}")

    return go(f)


def bland_bullet(a: Var, fresh: _Fresh):
    """Blandness in membership-only terms: not self-membered, and the set
    plus the empty set exists."""
    b, x, z = fresh(), fresh(), fresh()
    empty_x = Forall(z, Not(In(z, x)))
    return And(Not(In(a, a)),
               Exists(b, Forall(x, Iff(In(x, b), Or(In(x, a), empty_x)))))


def _is_zero(n: Var, fresh: _Fresh):
    z = fresh()
    return Forall(z, Not(In(z, n)))


def translate_bullet(f):
    """ws -> e: a single membership relation carries the whole theory.

    Wandhood becomes finite-ordinalhood; tapping becomes its graph
    description (complements by exact complementation against everything,
    cardinality wands by the n-equivalence predicate)."""
    check_signature(f, SIG_WS)
    fresh = _Fresh("_b")

    def go(g):
        if isinstance(g, Bland):
            return bland_bullet(g.t, fresh)
        if isinstance(g, Wand):
            return Defined("finord", (g.t,))
        if isinstance(g, In):
            return And(In(g.x, g.y), bland_bullet(g.y, fresh))
        if isinstance(g, Tap):
            n, a, c = g.w, g.a, g.c
            d, x, y = fresh(), fresh(), fresh()
            comp_case = And(
                _is_zero(n, fresh),
                And(Forall(d, Implies(bland_bullet(d, fresh),
                                      Exists(x, Iff(In(x, d), In(x, a))))),
                    Forall(y, Iff(In(y, c), Not(In(y, a))))))
            z = fresh()
            card_case = And(
                And(Defined("finord", (n,)), Exists(z, In(z, n))),
                And(Defined("nequiv@", (n, a, a)),
                    Forall(y, Iff(In(y, c), Defined("nequiv@", (n, y, a))))))
            return Or(comp_case, card_case)
        if isinstance(g, Eq):
            return g
        if isinstance(g, Defined):
            if g.name == "nequiv":
                return Defined("nequiv@", g.args)
            raise SignatureError(f"cannot translate defined atom {g.name!r}")
        if isinstance(g, Not):
            return Not(go(g.f))
        if isinstance(g, And):
            return And(go(g.lhs), go(g.rhs))
        if isinstance(g, Or):
            return Or(go(g.lhs), go(g.rhs))
        if isinstance(g, Implies):
            return Implies(go(g.lhs), go(g.rhs))
        if isinstance(g, Iff):
            return Iff(go(g.lhs), go(g.rhs))
        if isinstance(g, Forall):
            return Forall(g.v, go(g.body))
        if isinstance(g, Exists):
            return Exists(g.v, go(g.body))
        raise TypeError(f"not a formula: {g!r}")

    return go(f)


def varin_formula(x: Var, a: Var, fresh: _Fresh):
    """Expansive membership as a ws formula with an n-equivalence atom.

    Four cases: a bland; a the complement of a bland set; a the n-cardinal
    of a bland set; a the complement of such a cardinal."""
    c, n, t, z = fresh(), fresh(), fresh(), fresh()
    nonzero = Exists(z, In(z, n))
    case_bland = And(Bland(a), In(x, a))
    case_comp = Exists(c, And(Bland(c), And(Tap_zero(c, a, fresh), Not(In(x, c)))))
    case_card = Exists(c, Exists(n, And(
        And(Bland(c), And(Wand(n), nonzero)),
        And(Tap(n, c, a), Defined("nequiv", (n, x, c))))))
    case_comp_card = Exists(c, Exists(n, Exists(t, And(
        And(Bland(c), And(Wand(n), nonzero)),
        And(And(Tap(n, c, t), Tap_zero(t, a, fresh)),
            Not(Defined("nequiv", (n, x, c))))))))
    return Or(Or(case_bland, case_comp), Or(case_card, case_comp_card))


def Tap_zero(arg: Var, out: Var, fresh: _Fresh):
    w = fresh()
    return Exists(w, And(_is_zero(w, fresh), Tap(w, arg, out)))


def translate_circle(f):
    """e -> ws: read the membership of the source expansively."""
    check_signature(f, SIG_E)
    fresh = _Fresh("_c")

    def go(g):
        if isinstance(g, In):
            return varin_formula(g.x, g.y, fresh)
        if isinstance(g, Eq):
            return g
        if isinstance(g, Defined):
            return g
        if isinstance(g, Not):
            return Not(go(g.f))
        if isinstance(g, And):
            return And(go(g.lhs), go(g.rhs))
        if isinstance(g, Or):
            return Or(go(g.lhs), go(g.rhs))
        if isinstance(g, Implies):
            return Implies(go(g.lhs), go(g.rhs))
        if isinstance(g, Iff):
            return Iff(go(g.lhs), go(g.rhs))
        if isinstance(g, Forall):
            return Forall(g.v, go(g.body))
        if isinstance(g, Exists):
            return Exists(g.v, go(g.body))
        raise TypeError(f"not a formula: {g!r}")

    return go(f)


TRANSLATIONS = {
    "tau": (translate_tau, SIG_LT, SIG_WS),
    "tolt": (translate_tolt, SIG_WS, SIG_LT),
    "bullet": (translate_bullet, SIG_WS, SIG_E),
    "circle": (translate_circle, SIG_E, SIG_WS),
}


def identity_preserving(f) -> bool:
    """Translations must map equality atoms to equality atoms; check that a
    translation output keeps every Eq from the input (syntactic)."""
    if isinstance(f, Eq):
        return True
    if isinstance(f, ATOMS):
        return True
    if isinstance(f, Not):
        return identity_preserving(f.f)
    if isinstance(f, (And, Or, Implies, Iff)):
        return identity_preserving(f.lhs) and identity_preserving(f.rhs)
    if isinstance(f, (Forall, Exists)):
        return identity_preserving(f.body)
    return False


# -- models over fragments and stages ------------------------------------------------

def fragment_model(frag) -> FiniteModel:
    """The ws reading of a fragment: primitive blandness, membership, taps."""
    from . import instances

    view = frag.view()
    wand_ids = set(frag.wand_obj_ids().values())
    carrier = tuple(frag.canonical_order())

    def member(x, y):
        o = frag.obj(y)
        return o.is_bland and x in o.members

    def tapr(w, a, c):
        widx = _wand_index(frag, w)
        if widx is None or frag.obj(c).is_bland:
            return False
        from . import wandspec as ws_mod
        if not ws_mod.dom(frag.spec, widx, a, view):
            return False
        return any(ws_mod.equiv(frag.spec, widx, a, u, b, view)
                   for u, b in frag.obj(c).tclass)

    def nequiv(n, x, y):
        k = instances.vn_decode(view, n)
        if k is None or k < 1:
            return False
        return instances.n_equiv_over(view, x, y, k) is not None

    def finord(x):
        return instances.vn_decode(view, x) is not None

    model = FiniteModel(
        name=f"{frag.spec.name}-d{frag.depth}", signature=SIG_WS, carrier=carrier,
        bland=lambda x: frag.obj(x).is_bland,
        wand=lambda x: x in wand_ids,
        member=member, tap=tapr)
    model.defined["nequiv"] = nequiv
    model.defined["finord"] = finord
    # oracles for circle-composites: e-side defined atoms read back over ws
    model.defined["nequiv@"] = _nequiv_over_semantics(
        model, bland_sem=lambda x: eval_formula(
            model, _CIRCLE_BLAND, {_CB_VAR: x}),
        member_sem=lambda x, y: instances.varin(frag, x, y)
        if frag.spec.name.startswith("church:") else member(x, y),
        finord_sem=finord)
    return model


_CB_VAR = Var("_cbv")
_CIRCLE_BLAND = None  # filled in at the end of the module


def _nequiv_over_semantics(model: FiniteModel, bland_sem, member_sem, finord_sem):
    """Generic n-equivalence computed against supplied semantic predicates."""

    index = {h: i for i, h in enumerate(model.carrier)}

    class _Q:
        def __init__(self):
            self.cache = {}
            self._bland = {}
            self._members = {}

        def is_bland(self, h):
            got = self._bland.get(h)
            if got is None:
                got = bool(bland_sem(h))
                self._bland[h] = got
            return got

        def members(self, h):
            got = self._members.get(h)
            if got is None:
                if not self.is_bland(h):
                    got = ()
                else:
                    got = tuple(x for x in model.carrier if member_sem(x, h))
                self._members[h] = got
            return got

        def is_wand(self, h):
            return finord_sem(h)

        def ordrank(self, h):
            return 0

        def resolve_tap(self, w, h):
            return None

        def objects_below(self, r):
            return model.carrier

        def sort_key(self, h):
            return index[h]

    q = _Q()

    def oracle(n, x, y):
        from . import instances
        k = _decode_num(q, n)
        if k is None or k < 1:
            return False
        return instances.n_equiv_over(q, x, y, k) is not None

    return oracle


def _decode_num(q, h) -> Optional[int]:
    if not q.is_bland(h):
        return None
    ms = q.members(h)
    vals = set()
    for m in ms:
        v = _decode_num(q, m)
        if v is None:
            return None
        vals.add(v)
    return len(ms) if vals == set(range(len(ms))) else None


def _wand_index(frag, obj_id) -> Optional[int]:
    for idx, oid in frag.wand_obj_ids().items():
        if oid == obj_id:
            return idx
    return None


def lt_model(frag) -> FiniteModel:
    """The lt side at matching depth: pure sets of rank below the fragment's
    top stage, with the spec's wand designations marked."""
    from .pureset import PureSet, lt_levels, vn

    top_level = lt_levels(frag.depth + 1)[-1]
    carrier = tuple(sorted(top_level.elements, key=PureSet.sort_key))
    wand_codes = {vn(w.index) for w in frag.spec.wands}

    return FiniteModel(
        name=f"lt-d{frag.depth}", signature=SIG_LT, carrier=carrier,
        wand=lambda x: x in wand_codes,
        member=lambda x, y: x in y.elements)


def conch_model(stages) -> FiniteModel:
    """The stage side: carrier is every generated code, with the defined
    predicates of the stage reading."""
    from . import wandspec as ws_mod
    from .pureset import PureSet, is_carrier, uncarrier

    carrier = tuple(stages.ranked(stages.depth - 1))
    view = stages.view
    codes = stages.wandcodes

    def tap_star(w, a, c):
        if w not in stages.wandcode_set:
            return False
        widx = codes.index(w)
        if a not in stages.conchrank or c not in stages.conchrank:
            return False
        if not ws_mod.dom(stages.spec, widx, a, view):
            return False
        # tap results are pair classes; a carrier's members unpack with an
        # empty tag, which is never a wand code, so carriers fall out here
        from .errors import NotAPair
        from .pureset import kunpair
        for p in c:
            try:
                wc, b = kunpair(p)
            except NotAPair:
                return False
            if wc in stages.wandcode_set and b in stages.conchrank:
                u = codes.index(wc)
                if ws_mod.equiv(stages.spec, widx, a, u, b, view):
                    return True
        return False

    model = FiniteModel(
        name=f"stages-{stages.spec.name}-d{stages.depth}",
        signature=SIG_LT, carrier=carrier,
        wand=lambda x: x in stages.wandcode_set,
        member=lambda x, y: x in y.elements)
    model.defined["conch"] = lambda x: x in stages.conchrank
    model.defined["bland*"] = lambda x: is_carrier(x) and x in stages.conchrank
    model.defined["in*"] = lambda x, y: (is_carrier(y) and y in stages.conchrank
                                         and x in uncarrier(y))
    model.defined["wand*"] = lambda x: x in stages.wandcode_set
    model.defined["tap*"] = tap_star
    model.defined["finord*"] = lambda x: _decode_conch_num(stages, x) is not None

    def nequiv_star(n, x, y):
        from . import instances
        k = _decode_conch_num(stages, n)
        if k is None or k < 1:
            return False
        return instances.n_equiv_over(view, x, y, k) is not None

    model.defined["nequiv*"] = nequiv_star
    return model


def _decode_conch_num(stages, h) -> Optional[int]:
    from .pureset import deep_uncarrier, vn_value
    from .errors import NotInCodeImage

    try:
        return vn_value(deep_uncarrier(h))
    except NotInCodeImage:
        return None


def varin_model(frag) -> FiniteModel:
    """The e reading of a church fragment: one, expansive, membership."""
    from . import instances

    if not frag.spec.name.startswith("church:"):
        raise SignatureError("expansive reading requires a church fragment")
    carrier = tuple(frag.canonical_order())
    model = FiniteModel(
        name=f"{frag.spec.name}-d{frag.depth}-expansive", signature=SIG_E,
        carrier=carrier,
        member=lambda x, y: instances.varin(frag, x, y))
    view = frag.view()
    model.defined["finord"] = lambda x: instances.vn_decode(view, x) is not None
    model.defined["nequiv@"] = _nequiv_over_semantics(
        model,
        bland_sem=lambda x: eval_formula(model, _BULLET_BLAND, {_CB_VAR: x}),
        member_sem=lambda x, y: instances.varin(frag, x, y),
        finord_sem=model.defined["finord"])
    return model


_BULLET_BLAND = bland_bullet(_CB_VAR, _Fresh("_bb"))
_CIRCLE_BLAND = translate_circle(_BULLET_BLAND)


# -- axiom corpora -------------------------------------------------------------------

def ws_axioms() -> List[Tuple[str, object]]:
    """The bookkeeping and stage axioms of the object theory, with
    separation shipped as finite instances (quantifiers relativize to the
    fragment when evaluated, so the stage axiom reads as stated)."""
    fresh = _Fresh("_a")
    x, a, b, c, d, w, s = (Var(n) for n in "xabcdws")
    axioms = [
        ("in-only-bland", closed(Implies(In(x, a), Bland(a)))),
        ("tap-wand-nonbland", closed(Implies(Tap(w, a, c),
                                             And(Wand(w), Not(Bland(c)))))),
        ("tap-functional", closed(Implies(And(Tap(w, a, c), Tap(w, a, d)),
                                          Eq(c, d)))),
        ("extensionality", parse(
            "forall a. forall b. (Bland(a) & Bland(b)) -> "
            "((forall x. In(x,a) <-> In(x,b)) -> a = b)")),
        ("separation-nonself", parse(
            "forall a. Bland(a) -> (exists b. (Bland(b) & "
            "(forall x. In(x,b) <-> (In(x,a) & ~In(x,x)))))")),
        ("separation-bland", parse(
            "forall a. Bland(a) -> (exists b. (Bland(b) & "
            "(forall x. In(x,b) <-> (In(x,a) & Bland(x)))))")),
        ("no-self-membership", closed(Not(In(a, a)))),
        ("empty-set", parse("exists a. (Bland(a) & (forall x. ~In(x,a)))")),
    ]
    strat = Forall(a, Exists(s, And(wevel_formula(s, fresh),
                                    found_at_formula(a, s, fresh))))
    axioms.append(("stages-cover-everything", strat))
    return axioms


def ws_relativized_axioms() -> List[Tuple[str, object]]:
    """Height-flavored sentences, read over the fragment carrier.

    Shallow fragments may falsify them (the set of wands first appears at
    the stage after the last wand), so they ship separately: preservation
    checks compare truth values across a translation without asserting them.
    """
    x, b = Var("x"), Var("b")
    wand_set = Exists(b, And(Bland(b), Forall(x, Iff(In(x, b), Wand(x)))))
    return [("wand-set-exists-relativized", wand_set)]


def lt_relativized_axioms() -> List[Tuple[str, object]]:
    x, b = Var("x"), Var("b")
    wand_set = Exists(b, Forall(x, Iff(In(x, b), Wand(x))))
    return [("wand-set-exists-relativized", wand_set)]


def lt_axioms() -> List[Tuple[str, object]]:
    fresh = _Fresh("_a")
    a, s = Var("a"), Var("s")
    axioms = [
        ("extensionality", parse(
            "forall a. forall b. (forall x. In(x,a) <-> In(x,b)) -> a = b")),
        ("separation-nonself", parse(
            "forall a. exists b. forall x. In(x,b) <-> (In(x,a) & ~In(x,x))")),
        ("separation-wand", parse(
            "forall a. exists b. forall x. In(x,b) <-> (In(x,a) & Wand(x))")),
        ("no-self-membership", parse("forall a. ~In(a,a)")),
        ("empty-set", parse("exists a. forall x. ~In(x,a)")),
    ]
    strat = Forall(a, Exists(s, And(lt_level_formula(s, fresh),
                                    subset(a, s, fresh))))
    axioms.append(("levels-cover-everything", strat))
    return axioms


# -- random sentences ------------------------------------------------------------------

def random_sentences(sig: str, count: int, seed: int, max_depth: int = 3) -> List[Tuple[str, object]]:
    """Deterministic corpus of closed sentences of modest quantifier depth."""
    rng = random.Random(seed)
    pool = [Var(n) for n in ("x", "y", "z")]

    def atom(bound: List[Var]):
        v = lambda: rng.choice(bound)
        choices = []
        if sig == SIG_WS:
            choices = [lambda: Bland(v()), lambda: Wand(v()),
                       lambda: In(v(), v()), lambda: Tap(v(), v(), v()),
                       lambda: Eq(v(), v())]
        elif sig == SIG_LT:
            choices = [lambda: Wand(v()), lambda: In(v(), v()), lambda: Eq(v(), v())]
        else:
            choices = [lambda: In(v(), v()), lambda: Eq(v(), v())]
        return rng.choice(choices)()

    def gen(depth: int, bound: List[Var]):
        if bound and (depth <= 0 or rng.random() < 0.3):
            return atom(bound)
        if not bound or rng.random() < 0.5:
            v = pool[len(bound) % len(pool)]
            if v in bound:
                v = Var(v.name + str(len(bound)))
            q = Forall if rng.random() < 0.5 else Exists
            return q(v, gen(depth - 1, bound + [v]))
        if rng.random() < 0.35:
            return Not(gen(depth - 1, bound))
        conn = rng.choice([And, Or, Implies, Iff])
        return conn(gen(depth - 1, bound), gen(depth - 1, bound))

    out = []
    for i in range(count):
        f = gen(max_depth, [])
        out.append((f"random-{sig}-{i}", closed(f)))
    return out


# -- interpretation checking -------------------------------------------------------------

def bullet_circle_identities() -> List[Tuple[str, object]]:
    """Closed ws sentences asserting each primitive coincides with its image
    under the bullet-then-circle composite."""
    x, a, w, c = Var("x"), Var("a"), Var("w"), Var("c")

    def comp(f):
        return translate_circle(translate_bullet(f))

    return [
        ("bland-roundtrip", closed(Iff(Bland(a), comp(Bland(a))))),
        ("membership-roundtrip", closed(Iff(In(x, a), comp(In(x, a))))),
        ("wand-roundtrip", closed(Iff(Wand(w), comp(Wand(w))))),
        ("tap-roundtrip", closed(Iff(Tap(w, a, c), comp(Tap(w, a, c))))),
    ]


def circle_bullet_identities() -> List[Tuple[str, object]]:
    """Closed e sentences asserting membership survives circle-then-bullet."""
    x, a = Var("x"), Var("a")
    comp = translate_bullet(translate_circle(In(x, a)))
    return [("membership-roundtrip", closed(Iff(In(x, a), comp)))]


@dataclass
class InterpretationRow:
    name: str
    src_value: bool
    dst_value: bool

    @property
    def ok(self) -> bool:
        return self.src_value == self.dst_value


def check_interpretation(src: FiniteModel, dst: FiniteModel, translation: str,
                         sentences: Iterable[Tuple[str, object]]) -> List[InterpretationRow]:
    """Evaluate each sentence on the source and its translation on the
    target; a preserved sentence yields equal truth values."""
    fn, src_sig, dst_sig = TRANSLATIONS[translation]
    if src.signature != src_sig or dst.signature != dst_sig:
        raise SignatureError(
            f"{translation} maps {src_sig}->{dst_sig}, got {src.signature}->{dst.signature}")
    rows = []
    for name, f in sentences:
        rows.append(InterpretationRow(
            name=name,
            src_value=eval_formula(src, f),
            dst_value=eval_formula(dst, fn(f))))
    return rows
