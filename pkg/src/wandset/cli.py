"""Command-line front end: build, query, verify, translate, export.

Exit codes: 0 success, 2 object budget exceeded, 3 answer beyond the built
fragment, 64 usage (unknown spec, incompatible suite), 65 bad data (malformed
universe file or formula).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Dict, List, Optional, Tuple

from . import conch, formula, instances, universe, wandspec
from .errors import (BeyondFragment, CapExceeded, ParseError, SignatureError,
                     WandsetError)
from .universe import Fragment, Obj

FORMAT_VERSION = 1

EXIT_OK = 0
EXIT_CAP = 2
EXIT_BEYOND = 3
EXIT_USAGE = 64
EXIT_DATA = 65


class DataError(WandsetError):
    pass


# -- universe files ------------------------------------------------------------

def export_fragment(frag: Fragment) -> str:
    """Serialize with dense canonical ids; byte-stable across runs."""
    order = frag.canonical_order()
    remap = {old: new for new, old in enumerate(order)}
    objects = []
    for old in order:
        o = frag.obj(old)
        if o.is_bland:
            rec = {"kind": "bland", "members": sorted(remap[m] for m in o.members),
                   "ordrank": o.ordrank}
        else:
            rec = {"kind": "tapped",
                   "class": sorted([w, remap[b]] for w, b in o.tclass),
                   "ordrank": o.ordrank}
        objects.append(rec)
    doc = {
        "header": {"format_version": FORMAT_VERSION, "spec_name": frag.spec.name,
                   "depth": frag.depth, "exhaustive": frag.exhaustive},
        "objects": objects,
        "wevels": [sorted(remap[i] for i in c) for c in frag.wevel_contents],
    }
    return json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n"


def import_fragment(text: str) -> Fragment:
    try:
        doc = json.loads(text)
        header = doc["header"]
        if header["format_version"] != FORMAT_VERSION:
            raise DataError(f"unsupported format {header['format_version']}")
        spec = wandspec.get_spec(header["spec_name"])
        frag = Fragment(spec=spec, depth=int(header["depth"]),
                        exhaustive=bool(header["exhaustive"]))
        for oid, rec in enumerate(doc["objects"]):
            if rec["kind"] == "bland":
                members = frozenset(int(m) for m in rec["members"])
                if any(m >= oid for m in members):
                    raise DataError("members must precede their set")
                rank = int(rec["ordrank"])
                want = 0 if not members else 1 + max(
                    frag.obj(m).ordrank for m in members)
                if rank != want:
                    raise DataError(f"object {oid}: rank {rank}, expected {want}")
                o = Obj(oid, rank, members, None)
                frag._bland_index[members] = oid
            elif rec["kind"] == "tapped":
                cls = frozenset((int(w), int(b)) for w, b in rec["class"])
                if any(b >= oid for _, b in cls):
                    raise DataError("class arguments must precede their tap")
                rank = int(rec["ordrank"])
                arg_ranks = {frag.obj(b).ordrank for _, b in cls}
                if len(arg_ranks) != 1 or arg_ranks.pop() + 1 != rank:
                    raise DataError(f"object {oid}: tap rank law broken")
                o = Obj(oid, rank, None, cls)
                frag._tap_index[cls] = oid
            else:
                raise DataError(f"unknown kind {rec['kind']!r}")
            frag.objects.append(o)
        frag.wevel_contents = [tuple(int(i) for i in c) for c in doc["wevels"]]
        if len(frag.wevel_contents) != frag.depth + 1:
            raise DataError("wevel list does not match depth")
        return frag
    except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
        raise DataError(str(exc)) from exc


def _load(path: str) -> Fragment:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return import_fragment(fh.read())
    except OSError as exc:
        raise DataError(str(exc)) from exc


def _parse_object(frag: Fragment, text: str) -> int:
    """An object argument: a decimal id, or brace notation for a
    hereditarily bland object ('{}', '{{}}', ...)."""
    text = text.strip()
    if text.isdigit():
        oid = int(text)
        if not 0 <= oid < len(frag.objects):
            raise BeyondFragment(f"no object {oid}")
        return oid
    pure = _parse_braces(text)
    oid = universe.encode_pure(frag, pure)
    if oid is None:
        raise BeyondFragment(f"{text} not registered in this fragment")
    return oid


def _parse_braces(text: str):
    from .pureset import mk_set

    pos = 0

    def node():
        nonlocal pos
        if pos >= len(text) or text[pos] != "{":
            raise DataError(f"expected '{{' at {pos}")
        pos += 1
        elems = []
        while pos < len(text) and text[pos] != "}":
            if text[pos] in ", ":
                pos += 1
                continue
            elems.append(node())
        if pos >= len(text):
            raise DataError("unbalanced braces")
        pos += 1
        return mk_set(elems)

    out = node()
    if text[pos:].strip():
        raise DataError(f"trailing input at {pos}")
    return out


# -- verification suites ---------------------------------------------------------

def _core_suite(frag: Fragment) -> List[Tuple[str, bool, str]]:
    from . import suites

    return suites.core_laws(frag)


def _conch_suite(frag: Fragment) -> List[Tuple[str, bool, str]]:
    from . import suites

    return suites.conch_laws(frag)


def _church_suite(frag: Fragment) -> List[Tuple[str, bool, str]]:
    rep = instances.check_cus_axioms(frag)
    return [(name, ok, witness) for name, ok, witness in rep.checks]


def _formula_suite(frag: Fragment) -> List[Tuple[str, bool, str]]:
    from . import suites

    return suites.formula_laws(frag)


def _print_suite(rows: List[Tuple[str, bool, str]]) -> bool:
    ok = True
    for name, passed, witness in rows:
        if passed:
            note = f" :: {witness}" if witness else ""
            print(f"PASS {name}{note}")
        else:
            ok = False
            print(f"FAIL {name} :: {witness}")
    return ok


# -- commands ---------------------------------------------------------------------

def cmd_build(args) -> int:
    try:
        spec = wandspec.get_spec(args.spec)
    except KeyError:
        print(f"unknown spec {args.spec!r}", file=sys.stderr)
        return EXIT_USAGE
    try:
        frag = universe.build(spec, args.depth, max_objects=args.max_objects,
                              mode=args.mode)
    except CapExceeded as exc:
        print(f"object budget exceeded: {exc}", file=sys.stderr)
        return EXIT_CAP
    for alpha, contents in enumerate(frag.wevel_contents):
        print(f"stage {alpha}: {len(contents)} objects found earlier")
    by_rank: Dict[int, int] = {}
    for o in frag.objects:
        by_rank[o.ordrank] = by_rank.get(o.ordrank, 0) + 1
    print(f"total {len(frag.objects)} objects; by rank "
          + " ".join(f"{r}:{n}" for r, n in sorted(by_rank.items())))
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(export_fragment(frag))
    return EXIT_OK


def cmd_query(args) -> int:
    frag = _load(args.infile)
    if args.what == "rank":
        oid = _parse_object(frag, args.obj)
        print(frag.obj(oid).ordrank)
    elif args.what == "member":
        x = _parse_object(frag, args.x)
        of = _parse_object(frag, args.of)
        if args.expansive:
            if not frag.spec.name.startswith("church:"):
                print("--expansive requires a church spec", file=sys.stderr)
                return EXIT_USAGE
            print("true" if instances.varin(frag, x, of) else "false")
        else:
            o = frag.obj(of)
            print("true" if o.is_bland and x in o.members else "false")
    elif args.what == "tap":
        arg = _parse_object(frag, args.arg)
        got = universe.tap(frag, args.wand, arg)
        print("none" if got is None else got)
    elif args.what == "decompose":
        oid = _parse_object(frag, args.obj)
        base, path = universe.decompose(frag, oid)
        print(f"base={base} path={path}")
    elif args.what == "kind":
        if not frag.spec.name.startswith("church:"):
            print("kind classification requires a church spec", file=sys.stderr)
            return EXIT_USAGE
        oid = _parse_object(frag, args.obj)
        kind = instances.classify_kind(frag, oid)
        if kind.tag == "bland":
            print("bland")
        else:
            print(f"{kind.tag} n={kind.n} base={kind.base}")
    return EXIT_OK


def cmd_verify(args) -> int:
    frag = _load(args.infile)
    suites: List[str]
    if args.suite == "all":
        suites = ["core", "conch", "formula"]
        if frag.spec.name.startswith("church:"):
            suites.append("church")
    else:
        suites = [args.suite]
    if "church" in suites and not frag.spec.name.startswith("church:"):
        print(f"suite church incompatible with spec {frag.spec.name}", file=sys.stderr)
        return EXIT_USAGE
    if ("conch" in suites or "church" in suites) and not frag.exhaustive:
        print("conch/church suites require an exhaustive fragment", file=sys.stderr)
        return EXIT_USAGE
    ok = True
    for suite in suites:
        rows = {"core": _core_suite, "conch": _conch_suite,
                "church": _church_suite, "formula": _formula_suite}[suite](frag)
        print(f"# suite {suite}")
        ok = _print_suite(rows) and ok
    return EXIT_OK if ok else 1


def cmd_eval(args) -> int:
    frag = _load(args.src)
    with open(args.formula, "r", encoding="utf-8") as fh:
        sentences = formula.parse_sentences(fh.read())
    model = formula.fragment_model(frag)
    for name, f in sentences:
        print(f"{name}: {'true' if formula.eval_formula(model, f) else 'false'}")
    return EXIT_OK


def cmd_translate(args) -> int:
    frag = _load(args.src)
    with open(args.formula, "r", encoding="utf-8") as fh:
        sentences = formula.parse_sentences(fh.read())
    fn, src_sig, dst_sig = formula.TRANSLATIONS[args.translation]
    if not args.dst:
        for name, f in sentences:
            print(f"{name}: {formula.render(fn(f))}")
        return EXIT_OK
    dst_frag = _load(args.dst)
    src_model, dst_model = _models_for(frag, dst_frag, args.translation)
    rows = formula.check_interpretation(src_model, dst_model, args.translation,
                                        sentences)
    ok = True
    for row in rows:
        status = "preserved" if row.ok else "DISCREPANCY"
        ok = ok and row.ok
        print(f"{row.name}: src={row.src_value} dst={row.dst_value} {status}")
    return EXIT_OK if ok else 1


def _models_for(src_frag: Fragment, dst_frag: Fragment, translation: str):
    if translation == "tau":
        return formula.lt_model(src_frag), formula.fragment_model(dst_frag)
    if translation == "tolt":
        stages = conch.gen_stages(dst_frag.spec, dst_frag.depth)
        return formula.fragment_model(src_frag), formula.conch_model(stages)
    if translation == "bullet":
        return formula.fragment_model(src_frag), formula.varin_model(dst_frag)
    if translation == "circle":
        return formula.varin_model(src_frag), formula.fragment_model(dst_frag)
    raise SignatureError(f"unknown translation {translation}")


def cmd_export(args) -> int:
    frag = _load(args.infile)
    lines = ["digraph universe {"]
    order = frag.canonical_order()
    remap = {old: new for new, old in enumerate(order)}
    for old in order:
        o = frag.obj(old)
        shape = "box" if o.is_bland else "ellipse"
        label = frag.render(old).replace("{", "\\{").replace("}", "\\}") \
            if args.labels else str(remap[old])
        lines.append(f'  n{remap[old]} [shape={shape} label="{label}"];')
    for old in order:
        o = frag.obj(old)
        if o.is_bland:
            for m in sorted(o.members, key=lambda i: remap[i]):
                lines.append(f"  n{remap[old]} -> n{remap[m]};")
        else:
            for w, b in sorted(o.tclass, key=lambda p: (p[0], remap[p[1]])):
                lines.append(f'  n{remap[old]} -> n{remap[b]} [label="w{w}"];')
    lines.append("}")
    text = "\n".join(lines) + "\n"
    with open(args.dot, "w", encoding="utf-8") as fh:
        fh.write(text)
    return EXIT_OK


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wandset")
    sub = parser.add_subparsers(dest="command", required=True)

    default_cap = int(os.environ.get("WANDSET_MAX_OBJECTS",
                                     universe.DEFAULT_MAX_OBJECTS))

    b = sub.add_parser("build", help="grow a fragment and save it")
    b.add_argument("--spec", required=True)
    b.add_argument("--depth", type=int, required=True)
    b.add_argument("--max-objects", type=int, default=default_cap)
    b.add_argument("--mode", choices=["exhaustive", "sampled"], default="exhaustive")
    b.add_argument("--out", required=True)
    b.set_defaults(fn=cmd_build)

    q = sub.add_parser("query", help="ask about one object")
    q.add_argument("what", choices=["rank", "member", "tap", "decompose", "kind"])
    q.add_argument("--in", dest="infile", required=True)
    q.add_argument("--obj")
    q.add_argument("--x")
    q.add_argument("--of")
    q.add_argument("--wand", type=int)
    q.add_argument("--arg")
    q.add_argument("--expansive", action="store_true")
    q.set_defaults(fn=cmd_query)

    v = sub.add_parser("verify", help="run law suites against a fragment")
    v.add_argument("--suite", choices=["core", "conch", "church", "formula", "all"],
                   required=True)
    v.add_argument("--in", dest="infile", required=True)
    v.set_defaults(fn=cmd_verify)

    e = sub.add_parser("eval", help="evaluate sentences on a fragment")
    e.add_argument("--formula", required=True)
    e.add_argument("--src", required=True)
    e.set_defaults(fn=cmd_eval)

    t = sub.add_parser("translate", help="translate sentences, optionally checking")
    t.add_argument("--formula", required=True)
    t.add_argument("--translation", choices=sorted(formula.TRANSLATIONS), required=True)
    t.add_argument("--src", required=True)
    t.add_argument("--dst")
    t.set_defaults(fn=cmd_translate)

    x = sub.add_parser("export", help="emit the membership digraph as DOT")
    x.add_argument("--in", dest="infile", required=True)
    x.add_argument("--dot", required=True)
    x.add_argument("--labels", action="store_true")
    x.set_defaults(fn=cmd_export)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except CapExceeded as exc:
        print(f"object budget exceeded: {exc}", file=sys.stderr)
        return EXIT_CAP
    except BeyondFragment as exc:
        print(f"beyond fragment: {exc}", file=sys.stderr)
        return EXIT_BEYOND
    except (DataError, ParseError, SignatureError) as exc:
        print(f"bad data: {exc}", file=sys.stderr)
        return EXIT_DATA
    except KeyError as exc:
        print(f"unknown name: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
