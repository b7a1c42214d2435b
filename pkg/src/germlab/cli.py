"""``germlab`` command line: JSON report on stdout, short summary on stderr.

Exit codes: 0 answer produced, 1 usage or parse error, 2 resource cap
exceeded, 3 internal invariant violation.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Callable

from . import activity, contraction, hausdorff, level_quotients, wreath
from .groups import Group, SpecError, dump_spec, group
from .tree_words import format_word, parse_ray, parse_word

SCHEMA = "germlab/1"

EXIT_OK, EXIT_USAGE, EXIT_CAP, EXIT_INTERNAL = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _load_group(args) -> Group:
    return group(args.group)


def _element(G: Group, text: str):
    return G.element(text)


# ---------------------------------------------------------------------------
# verbs; each returns (document, one-line summary)


def cmd_eval(args):
    G = _load_group(args)
    g = _element(G, args.element)
    image = wreath.apply(g, parse_word(args.word, G.degree))
    text = format_word(image, G.degree)
    return {"element": args.element, "word": args.word, "image": text}, text


def cmd_section(args):
    G = _load_group(args)
    g = _element(G, args.element)
    vertex = parse_word(args.vertex, G.degree)
    view = level_quotients.section_view(g, vertex)
    doc = {
        "element": args.element,
        "vertex": args.vertex,
        "image": format_word(wreath.apply(g, vertex), G.degree),
        "section": view.element.label,
        "wreath_form": view.display(),
        "root_perm": list(view.perm),
    }
    return doc, f"{args.element}|_{args.vertex or 'root'} = {view.element.label}"


def cmd_identity(args):
    G = _load_group(args)
    g = _element(G, args.element)
    trivial, witness = wreath.is_identity(g)
    doc = {"element": args.element, "identity": trivial, "witness": None if witness is None else format_word(witness, G.degree)}
    return doc, "identity" if trivial else f"nontrivial, moves {doc['witness']}"


def cmd_nucleus(args):
    G = _load_group(args)
    r = contraction.nucleus(G, args.size_cap, args.depth_cap)
    doc = {
        "status": r.status,
        "nucleus": [G.name(g) for g in r.nucleus],
        "depth_bound": r.depth_bound,
        "absorbing_size": len(r.absorbing),
        "caps_hit": r.caps_hit,
    }
    return doc, f"{r.status}, |N| = {len(r.nucleus)}" if r.certified else r.status


def cmd_special_sets(args):
    G = _load_group(args)
    r = contraction.nucleus(G, args.size_cap, args.depth_cap)
    if not r.certified:
        raise wreath.CapExceeded("nucleus not certified within caps; N0 and N1 need a contracting group")
    s = contraction.special_sets(G, r)
    d = G.degree
    doc = {
        "n0": [{"element": G.name(g), "word": format_word(s.n0_witness[g], d)} for g in s.n0],
        "n1": [{"element": G.name(g), "word": format_word(s.n1_witness[g], d)} for g in s.n1],
    }
    return doc, f"N1 = {{{', '.join(G.name(g) for g in s.n1)}}}"


def cmd_order(args):
    G = _load_group(args)
    r = contraction.torsion_order(_element(G, args.element), args.order_cap, args.level_cap)
    doc = {"element": args.element, "status": r.status, "order": r.order, "level": r.level, "lower_bound": r.lower_bound}
    return doc, f"order {r.order}" if r.order else f"order exceeds cap (>= {r.lower_bound})"


def _certificate(G: Group, ref: str, depth: int):
    if ref.startswith("builtin:"):
        return hausdorff.resolve_builtin_certificate(G, ref, depth)
    with open(ref) as fh:
        cert = hausdorff.load_certificate(json.load(fh), G)
    cert.depth = depth
    return cert


def cmd_hausdorff_verify(args):
    G = _load_group(args)
    cert = _certificate(G, args.cert, args.depth)
    report = hausdorff.verify_certificate(cert)
    doc = {"certificate": hausdorff.certificate_document(cert), **report.to_dict()}
    return doc, f"verdict {doc['verdict']} (verified depth {report.verified_depth})"


def cmd_hausdorff_search(args):
    G = _load_group(args)
    certs = hausdorff.search_nonhausdorff(G, args.word_bound, args.preperiod_bound, args.period_bound, args.depth)
    doc = {
        "bounds": {"word": args.word_bound, "preperiod": args.preperiod_bound, "period": args.period_bound, "depth": args.depth},
        "certificates": [hausdorff.certificate_document(c) for c in certs],
    }
    return doc, f"{len(certs)} certificate(s) found" if certs else "no certificate found up to bounds"


def cmd_lqa_search(args):
    G = _load_group(args)
    found = hausdorff.lqa_violation_search(G, args.word_bound, args.depth)
    d = G.degree
    doc = {"witnesses": [{"element": G.name(g), "inner": format_word(u, d), "outer": format_word(u0, d)} for g, u, u0 in found]}
    return doc, f"{len(found)} witness(es)"


def cmd_quotient(args):
    G = _load_group(args)
    q = level_quotients.quotient_group(G, args.level, args.cap)
    doc = {
        "level": args.level,
        "order": q.order(),
        "transitive": len(q.orbit((0,) * args.level)) == G.degree**args.level,
        "generators": {k: list(v) for k, v in q.generators.items()},
    }
    return doc, f"level {args.level} quotient of order {doc['order']}"


def cmd_stabilizer(args):
    G = _load_group(args)
    s = level_quotients.vertex_stabilizer_gens(G, parse_word(args.vertex, G.degree), args.cap)
    doc = {
        "vertex": args.vertex,
        "orbit_size": len(s.orbit),
        "schreier_generators": [g.label for g in s.schreier_generators],
    }
    return doc, f"{len(s.schreier_generators)} Schreier generator(s), orbit of size {len(s.orbit)}"


def cmd_kernel_ball(args):
    G = _load_group(args)
    z = parse_ray(args.ray, G.degree)
    found = level_quotients.kernel_ball(G, z, args.level, args.word_bound)
    doc = {"ray": args.ray, "level": args.level, "word_bound": args.word_bound, "elements": [g.label for g in found]}
    return doc, f"{len(found)} element(s)"


def cmd_witness_check(args):
    if args.witness:
        with open(args.witness) as fh:
            w = json.load(fh)
        args.group = w.get("group", args.group)
        ray, level, gtext, htext = w["ray"], int(w["level"]), w["g"], w["h"]
        probe = w.get("probe_depth", args.probe_depth)
    else:
        if None in (args.ray, args.level, args.g, args.h):
            raise UsageError("witness-check needs --witness FILE or all of --ray, --level, --g, --h")
        ray, level, gtext, htext, probe = args.ray, args.level, args.g, args.h, args.probe_depth
    if args.group is None:
        raise UsageError("no group given")
    G = _load_group(args)
    z = parse_ray(ray, G.degree)
    extra = tuple(k for k in (level - 1, level - 2) if k >= 0)
    try:
        w = level_quotients.properness_witness_check(G, z, level, G.element(gtext), G.element(htext), probe, extra)
    except level_quotients.WitnessRejected as exc:
        return {"accepted": False, "failed_clause": exc.clause, "message": str(exc)}, f"rejected: {exc}"
    return {"accepted": True, **w.to_dict()}, f"accepted; conjugate section {w.conjugate_section.display()}"


def cmd_formula_check(args):
    doc = level_quotients.section_formula_check(args.level_max, args.doubled_max)
    if not doc["passed"]:
        raise AssertionError("section identities failed: " + ", ".join(c["check"] for c in doc["checks"] if not c["passed"]))
    return doc, f"{len(doc['checks'])} identities hold"


def cmd_activity(args):
    G = _load_group(args)
    names = [args.element] if args.element else G.names
    rows = {}
    for name in names:
        p = activity.classify_activity(_element(G, name), args.levels)
        if not activity.growth_consistent(p):
            raise AssertionError(f"activity counts of {name} disagree with the structural class")
        rows[name] = {"counts": p.counts, "class": p.classification, "degree": p.degree}
    summary = ", ".join(f"{k}: {v['class']}" + (f" {v['degree']}" if v["class"] == "polynomial" else "") for k, v in rows.items())
    return {"elements": rows}, summary


def cmd_report(args):
    G = _load_group(args)
    doc = build_report(G, args.profile)
    return doc, f"{doc['verdict']} ({doc['reason']})"


# ---------------------------------------------------------------------------
# composite report

PROFILES = {
    "quick": {"size_cap": 200, "depth_cap": 12, "word_bound": 1, "preperiod": 2, "period": 3, "depth": 12, "levels": 3, "max_points": 64, "witness_levels": (5, 6)},
    "full": {"size_cap": 500, "depth_cap": 16, "word_bound": 2, "preperiod": 3, "period": 4, "depth": 20, "levels": 5, "max_points": 128, "witness_levels": (5, 6, 7, 8)},
}


def build_report(G: Group, profile: str = "quick") -> dict:
    caps = PROFILES[profile]
    spec = G.spec
    doc: dict = {"group": spec.ref if spec.ref != "custom" else dump_spec(spec), "profile": profile}

    contracting = contraction.criterion_contracting_report(
        G, caps["size_cap"], caps["depth_cap"], caps["depth"], caps["preperiod"], caps["period"]
    )
    doc["contracting_route"] = contracting

    builtin = []
    try:
        names = [f"a{i}" for i in range(1, len(spec.params["v"]) + 1)] if spec.family == "Kwv" else [None]
        for which in names:
            cert = hausdorff.builtin_certificate(G, which, 30)
            rep = hausdorff.verify_certificate(cert)
            builtin.append({"certificate": hausdorff.certificate_document(cert), "verdict": rep.to_dict()["verdict"]})
    except SpecError:
        pass
    doc["builtin_certificates"] = builtin

    found = hausdorff.search_nonhausdorff(G, caps["word_bound"], caps["preperiod"], caps["period"], caps["depth"])
    doc["search"] = [hausdorff.certificate_document(c) for c in found]

    witnesses = [e["element"] for e in contracting.get("witnesses", []) if e["certificates"]]
    witnesses += [b["certificate"]["element"] for b in builtin if b["verdict"] == "pass"]
    witnesses += [c["element"] for c in doc["search"]]
    witnesses = list(dict.fromkeys(witnesses))
    if contracting["verdict"] == "Hausdorff certified":
        doc["verdict"], doc["reason"] = "Hausdorff certified", contracting["reason"]
    elif witnesses:
        doc["verdict"], doc["reason"] = "non-Hausdorff certified", "verified certificate for " + ", ".join(witnesses)
    elif spec.family == "Md" and spec.params.get("d") == 2:
        doc["verdict"] = "inconclusive"
        doc["reason"] = "open problem: no certificate found up to bounds and no proof of Hausdorffness is known"
    else:
        doc["verdict"], doc["reason"] = "inconclusive", "no certificate found up to bounds"
    doc["witnesses"] = witnesses

    doc["activity"] = {}
    for name, g in G.gens.items():
        p = activity.classify_activity(g, 10)
        doc["activity"][name] = {"class": p.classification, "degree": p.degree}

    quotients = []
    for n in range(1, caps["levels"] + 1):
        if G.degree**n > caps["max_points"]:
            break
        q = level_quotients.quotient_group(G, n)
        quotients.append({"level": n, "order": q.order(), "transitive": level_quotients.is_level_transitive(G, n)})
    doc["level_quotients"] = quotients

    doc["properness_witnesses"] = []
    if spec.family == "Kv" and spec.params.get("v") == "1":
        from .tree_words import Ray

        for level in caps["witness_levels"]:
            g, h, probe = level_quotients.standard_witness(G, level)
            w = level_quotients.properness_witness_check(G, Ray((), (1,)), level, g, h, probe)
            doc["properness_witnesses"].append(
                {"level": level, "g_section": w.g_section.display(), "conjugate_section": w.conjugate_section.display()}
            )
    return doc


# ---------------------------------------------------------------------------


VERBS: dict[str, Callable] = {
    "eval": cmd_eval,
    "section": cmd_section,
    "identity": cmd_identity,
    "nucleus": cmd_nucleus,
    "special-sets": cmd_special_sets,
    "order": cmd_order,
    "hausdorff-verify": cmd_hausdorff_verify,
    "hausdorff-search": cmd_hausdorff_search,
    "lqa-search": cmd_lqa_search,
    "quotient": cmd_quotient,
    "stabilizer": cmd_stabilizer,
    "kernel-ball": cmd_kernel_ball,
    "witness-check": cmd_witness_check,
    "formula-check": cmd_formula_check,
    "activity": cmd_activity,
    "report": cmd_report,
}


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="germlab", description="Exact computations for self-similar tree automorphism groups.")
    p.add_argument("--seed", type=int, default=0, help="seed recorded in the report (all computations are deterministic)")
    sub = p.add_subparsers(dest="verb", required=True, parser_class=_Parser)

    def verb(name, help_text, needs_group=True):
        sp = sub.add_parser(name, help=help_text)
        if needs_group:
            sp.add_argument("--group", required=True, help="builtin:NAME or path to a JSON group document")
        return sp

    sp = verb("eval", "image of a word")
    sp.add_argument("--element", required=True)
    sp.add_argument("--word", required=True)

    sp = verb("section", "section at a vertex")
    sp.add_argument("--element", required=True)
    sp.add_argument("--vertex", default="")

    sp = verb("identity", "decide whether an element is trivial")
    sp.add_argument("--element", required=True)

    for name, text in (("nucleus", "contracting certification and nucleus"), ("special-sets", "the sets N0 and N1")):
        sp = verb(name, text)
        sp.add_argument("--size-cap", type=int, default=contraction.DEFAULT_SIZE_CAP)
        sp.add_argument("--depth-cap", type=int, default=contraction.DEFAULT_DEPTH_CAP)

    sp = verb("order", "torsion order")
    sp.add_argument("--element", required=True)
    sp.add_argument("--order-cap", type=int, default=2**12)
    sp.add_argument("--level-cap", type=int, default=64)

    sp = verb("hausdorff-verify", "verify a non-Hausdorff certificate")
    sp.add_argument("--cert", required=True, help="builtin:lemma5.3 | builtin:lemma5.5:a<i> | builtin:thm1.4 | JSON file")
    sp.add_argument("--depth", type=int, default=30)

    sp = verb("hausdorff-search", "search for non-Hausdorff certificates")
    sp.add_argument("--word-bound", type=int, default=1)
    sp.add_argument("--preperiod-bound", type=int, default=2)
    sp.add_argument("--period-bound", type=int, default=3)
    sp.add_argument("--depth", type=int, default=12)

    sp = verb("lqa-search", "elements trivial on a small cylinder but not on a larger one")
    sp.add_argument("--word-bound", type=int, default=1)
    sp.add_argument("--depth", type=int, default=6)

    sp = verb("quotient", "level quotient group")
    sp.add_argument("--level", type=int, required=True)
    sp.add_argument("--cap", type=int, default=wreath.LEVEL_CAP)

    sp = verb("stabilizer", "Schreier generators of a vertex stabilizer")
    sp.add_argument("--vertex", required=True)
    sp.add_argument("--cap", type=int, default=wreath.LEVEL_CAP)

    sp = verb("kernel-ball", "ball elements trivial on a cylinder along a ray")
    sp.add_argument("--ray", required=True)
    sp.add_argument("--level", type=int, required=True)
    sp.add_argument("--word-bound", type=int, default=2)

    sp = sub.add_parser("witness-check", help="check a properness witness")
    sp.add_argument("--group")
    sp.add_argument("--witness", help="JSON witness document")
    sp.add_argument("--ray")
    sp.add_argument("--level", type=int)
    sp.add_argument("--g")
    sp.add_argument("--h")
    sp.add_argument("--probe-depth", type=int)

    sp = verb("formula-check", "recompute the K(1) section identities", needs_group=False)
    sp.add_argument("--level-max", type=int, default=8)
    sp.add_argument("--doubled-max", type=int, default=5)

    sp = verb("activity", "activity counts and class")
    sp.add_argument("--element")
    sp.add_argument("--levels", type=int, default=10)

    sp = verb("report", "composite report")
    sp.add_argument("--profile", choices=sorted(PROFILES), default="quick")
    return p


def run(argv: list[str] | None = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    args = build_parser().parse_args(argv)
    try:
        doc, summary = VERBS[args.verb](args)
    except (SpecError, UsageError, ValueError, OSError, json.JSONDecodeError, KeyError) as exc:
        print(f"germlab {args.verb}: error: {exc}", file=err)
        return EXIT_USAGE
    except wreath.CapExceeded as exc:
        print(f"germlab {args.verb}: cap exceeded: {exc}", file=err)
        return EXIT_CAP
    except (AssertionError, RuntimeError) as exc:
        print(f"germlab {args.verb}: internal invariant violated: {exc}", file=err)
        return EXIT_INTERNAL
    payload = {"schema": SCHEMA, "command": args.verb, "seed": args.seed, **doc}
    out.write(json.dumps(payload, indent=2) + "\n")
    print(f"{args.verb}: {summary}", file=err)
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
