"""Command line entry point.

Exit codes: 0 success, 1 a certified property or an ``--expect`` failed,
2 bad input.
"""
from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from . import __version__
from .abel import iter_choices, resolve_abel_map, verify_record
from .curve import Subcurve
from .document import load_document
from .errors import InputError, InvariantViolation, JacobelError, SearchTooLarge
from .stability import (
    SheafClass,
    Verdict,
    classify,
    enumerate_semistable,
    expected_degree,
    fraction_str,
    sheaf,
)
from .twister import abel_twisters, find_quasistable_twister, quasistable_oracle, twister_difference

EXPECT_CHOICES = ("semistable", "quasistable", "stable") + tuple(v.value for v in Verdict)


def jsonable(x):
    if isinstance(x, Subcurve):
        return list(x.names)
    if isinstance(x, Fraction):
        return fraction_str(x)
    if isinstance(x, SheafClass):
        return list(x.degrees)
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, set, frozenset)):
        items = [jsonable(v) for v in x]
        return sorted(items, key=repr) if isinstance(x, (set, frozenset)) else items
    if hasattr(x, "item"):
        return x.item()
    return x


def _certificate(command, doc, results, summary, warnings=()):
    return {
        "tool": "jacobel",
        "version": __version__,
        "command": command,
        "input": doc.echo() if doc is not None else None,
        "results": results,
        "summary": summary,
        "warnings": list(warnings),
    }


def _violation(exc: InvariantViolation) -> dict:
    return {"message": str(exc), "witness": jsonable(exc.witness)}


def _need_bundle(doc):
    if doc.line_bundle is None:
        raise InputError("document has no line_bundle")
    want = expected_degree(doc.curve, doc.polarization) + 1
    if doc.line_bundle.total != want:
        raise InputError(f"line bundle has degree {doc.line_bundle.total}, need g - mu = {want}")
    return doc.line_bundle


def _table(rows, header):
    rows = [[str(c) for c in r] for r in rows]
    widths = [max(len(h), *(len(r[k]) for r in rows)) if rows else len(h)
              for k, h in enumerate(header)]
    out = ["  ".join(h.ljust(w) for h, w in zip(header, widths)),
           "  ".join("-" * w for w in widths)]
    out += ["  ".join(c.ljust(w) for c, w in zip(r, widths)) for r in rows]
    return "\n".join(line.rstrip() for line in out)


# ---------------------------------------------------------------------------
# commands


def cmd_validate(doc, args):
    c, E = doc.curve, doc.polarization
    warnings = []
    results = {
        "components": c.p,
        "nodes": len(c.nodes),
        "reducible_nodes": len(c.reducible_nodes),
        "irreducible_nodes": len(c.irreducible_nodes),
        "genus": c.genus,
        "mu": E.slope,
        "expected_sheaf_degree": expected_degree(c, E),
        "required_line_bundle_degree": expected_degree(c, E) + 1,
        "line_bundle_degree": doc.line_bundle.total if doc.line_bundle else None,
    }
    ok = doc.line_bundle is not None and doc.line_bundle.total == expected_degree(c, E) + 1
    results["degree_ok"] = ok
    if doc.line_bundle is None:
        warnings.append("no line_bundle given; abel and twister commands will refuse this document")
    elif not ok:
        warnings.append(f"deg L = {doc.line_bundle.total} but g - mu = {expected_degree(c, E) + 1}")
    lines = [f"{doc.name}: p={c.p}, nodes={len(c.nodes)} ({len(c.reducible_nodes)} reducible, "
             f"{len(c.irreducible_nodes)} irreducible), g={c.genus}, mu={E.slope}"]
    lines.append(f"line bundle degree {results['line_bundle_degree']}, "
                 f"required {results['required_line_bundle_degree']}")
    lines += [f"warning: {w}" for w in warnings]
    return _certificate("validate", doc, results, {"degree_ok": ok}, warnings), lines, True


def _parse_multidegree(text, curve):
    try:
        degs = tuple(int(x) for x in text.replace(" ", "").split(",") if x != "")
    except ValueError as exc:
        raise InputError(f"cannot parse multidegree {text!r}") from exc
    return sheaf(curve, degs)


def cmd_stability(doc, args):
    c, E, P = doc.curve, doc.polarization, doc.marked
    if args.multidegree is not None:
        d = _parse_multidegree(args.multidegree, c)
        source = "override"
    else:
        L = _need_bundle(doc)
        d = find_quasistable_twister(c, E, L.minus_point(P), P).twisted
        source = "m_Q (x) L (x) T at the marked component"
    report = classify(c, E, d, P, connected_only=doc.options["connected_only"],
                      with_table=args.table)
    results = {"multidegree": list(d.degrees), "source": source, **report.as_dict()}
    ok = True
    if args.expect:
        level = {"quasistable": "quasistable", "semistable": "semistable", "stable": "stable"}
        if args.expect in level:
            ok = report.verdict.meets(args.expect)
        else:
            ok = report.verdict.value == args.expect
        results["expectation"] = {"expected": args.expect, "met": ok}
    lines = [f"multidegree {d.degrees} ({source})",
             f"verdict: {report.verdict.value}"]
    if report.witness is not None:
        lines.append(f"witness: {report.witness}  beta = {fraction_str(report.witness_beta)}")
    if report.table:
        lines.append(_table([(str(c.subcurve(*names)), fraction_str(b))
                             for names, b in report.table], ["subcurve", "beta"]))
    if args.expect:
        lines.append(f"expected {args.expect}: {'met' if ok else 'NOT met'}")
    return _certificate("stability", doc, results, {"verdict": report.verdict.value,
                                                    "expectation_met": ok}), lines, ok


def cmd_twister(doc, args):
    c, E, P = doc.curve, doc.polarization, doc.marked
    L = _need_bundle(doc)
    T = abel_twisters(c, E, L, P)
    ok = True
    rows = []
    for i, t in enumerate(T):
        row = {"component": c.names[i], "coefficients": list(t.coefficients),
               "twisted": list(t.twisted.degrees), "method": t.method}
        if args.oracle:
            reps = quasistable_oracle(c, E, L.minus_point(i), P)
            agree = len(reps) == 1 and reps[0] == t.twisted
            row["oracle"] = {"representatives": [list(r.degrees) for r in reps], "agrees": agree}
            ok &= agree
        rows.append(row)
    diffs = []
    for i in range(c.p):
        for j in range(c.p):
            if i == j or c.adjacency[i, j] == 0:
                continue
            try:
                diffs.append(twister_difference(c, E, L, P, i, j, twisters=T).as_dict())
            except InvariantViolation as exc:
                ok = False
                diffs.append({"i": c.names[i], "j": c.names[j], "violation": _violation(exc)})
    lines = [_table([(r["component"], r["coefficients"], r["twisted"], r["method"])
                     + ((("agrees" if r["oracle"]["agrees"] else "DIFFERS"),) if args.oracle else ())
                     for r in rows],
                    ["component", "T coefficients", "m_Q (x) L (x) T", "method"]
                    + (["oracle"] if args.oracle else []))]
    if diffs:
        lines.append("")
        lines.append(_table([(d["i"], d["j"],
                              "VIOLATION: " + d["violation"]["message"] if "violation" in d
                              else "{" + ",".join(d["subcurve"]) + "}",
                              d.get("source") or "-",
                              ", ".join("{" + ",".join(t) + "}" for t in d.get("ties", [])) or "-")
                             for d in diffs], ["i", "j", "Z_ij", "set", "ties"]))
    results = {"twisters": rows, "differences": diffs}
    return _certificate("twister", doc, results, {"ok": ok}), lines, ok


def cmd_abel(doc, args):
    c, E, P = doc.curve, doc.polarization, doc.marked
    L = _need_bundle(doc)
    T = abel_twisters(c, E, L, P)
    ok = True
    records = resolve_abel_map(c, E, L, P, doc.choice, twisters=T, verify=False)
    out = []
    for rec in records:
        entry = rec.as_dict()
        try:
            verify_record(c, E, L, P, rec, T)
        except InvariantViolation as exc:
            ok = False
            entry["violation"] = _violation(exc)
        out.append(entry)
    results = {"choice": doc.choice.as_dict(c), "records": out}
    lines = [_table([(r["stratum"]["name"], r["fiber"], r["mtilde"], r["g_class"],
                      r["g_admissibility"], r["pushforward"]["degrees"],
                      "{" + ",".join(r["pushforward"]["noninvertible"]) + "}",
                      r["pushforward"]["total"], r["stability"]["verdict"],
                      "VIOLATION" if "violation" in r else "ok")
                     for r in out],
                    ["stratum", "fiber", "M~", "G", "class", "push", "non-inv", "deg",
                     "on fiber", "check"])]
    if args.oracle:
        exhaustive = abel_twisters(c, E, L, P, method="exhaustive")
        agree = [a.twisted == b.twisted and a.coefficients == b.coefficients
                 for a, b in zip(T, exhaustive)]
        results["oracle"] = {"agrees": all(agree),
                             "exhaustive": [list(t.coefficients) for t in exhaustive]}
        ok &= all(agree)
        lines.append(f"oracle twisters: {'agree' if all(agree) else 'DIFFER'}")
    if args.all_choices:
        seen = {}
        mismatches = []
        n = 0
        for choice in iter_choices(c, doc.options["choice_cap"]):
            n += 1
            for rec in resolve_abel_map(c, E, L, P, choice, twisters=T, verify=False):
                key = rec.pushforward.as_dict()
                first = seen.setdefault(rec.name, key)
                if key != first:
                    mismatches.append({"stratum": rec.name, "choice": choice.as_dict(c),
                                       "pushforward": key, "reference": first})
        results["all_choices"] = {"assignments": n, "independent": not mismatches,
                                  "mismatches": mismatches[:20]}
        ok &= not mismatches
        lines.append(f"{n} matching assignments: pushforwards "
                     f"{'identical' if not mismatches else 'DIFFER'}")
    return _certificate("abel", doc, results, {"ok": ok, "records": len(out)}), lines, ok


def cmd_enumerate(doc, args):
    c, E, P = doc.curve, doc.polarization, doc.marked
    semi, quasi = enumerate_semistable(c, E, P, cap=doc.options["search_cap"],
                                       connected_only=doc.options["connected_only"])
    results = {"total_degree": expected_degree(c, E),
               "semistable": [list(s.degrees) for s in semi],
               "quasistable": [list(q.degrees) for q in quasi]}
    qset = {q.degrees for q in quasi}
    lines = [f"total degree {expected_degree(c, E)}: {len(semi)} semistable, "
             f"{len(quasi)} P-quasistable (P on {c.names[P]})"]
    lines += [f"  {s.degrees}{'  *' if s.degrees in qset else ''}" for s in semi]
    summary = {"semistable": len(semi), "quasistable": len(quasi)}
    return _certificate("enumerate", doc, results, summary), lines, True


def cmd_selftest(doc, args):
    from .acceptance import selftest

    extra = [doc] if doc is not None else []
    results, diagnostics, text = selftest(args.seed, extra)
    ok = all(r.passed for r in results)
    lines = [r.line() for r in results] + [r.line() for r in diagnostics]
    for r in results + diagnostics:
        lines += [f"    {json.dumps(jsonable(f), sort_keys=True)}" for f in r.failures[:3]]
    lines.append("selftest " + ("passed" if ok else "FAILED"))
    return json.loads(text), lines, ok


COMMANDS = {
    "validate": cmd_validate,
    "stability": cmd_stability,
    "twister": cmd_twister,
    "abel": cmd_abel,
    "enumerate": cmd_enumerate,
    "selftest": cmd_selftest,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="jacobel",
        description="Stability, twisters and degree-1 Abel maps on nodal curves.")
    parser.add_argument("--version", action="version", version=f"jacobel {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="print the certificate as JSON")
    sub = parser.add_subparsers(dest="command", required=True)

    for name, help_ in (("validate", "curve statistics and degree checks"),
                        ("enumerate", "all semistable and P-quasistable multidegrees")):
        p = sub.add_parser(name, parents=[common], help=help_)
        p.add_argument("file")

    p = sub.add_parser("stability", parents=[common], help="classify one multidegree")
    p.add_argument("file")
    p.add_argument("--multidegree", metavar="D1,D2,...",
                   help="class to test instead of the twisted Abel class "
                        "(write --multidegree=-1,1 for a leading minus sign)")
    p.add_argument("--expect", choices=EXPECT_CHOICES,
                   help="exit 1 unless the verdict meets this level")
    p.add_argument("--table", action="store_true", help="include every beta value")

    p = sub.add_parser("twister", parents=[common], help="T_i for each component and Z_ij")
    p.add_argument("file")
    p.add_argument("--oracle", action="store_true", help="cross-check against brute force")

    p = sub.add_parser("abel", parents=[common], help="resolve the Abel map stratum by stratum")
    p.add_argument("file")
    p.add_argument("--oracle", action="store_true",
                   help="re-derive every twister by exhaustive search")
    p.add_argument("--all-choices", action="store_true",
                   help="rerun every matching assignment and compare pushforwards")

    p = sub.add_parser("selftest", parents=[common], help="run the acceptance criteria")
    p.add_argument("file", nargs="?", help="extra document to include with the corpus")
    p.add_argument("--seed", type=int, default=0, help="seed for the random instances")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        doc = load_document(args.file) if args.file else None
        cert, lines, ok = COMMANDS[args.command](doc, args)
    except (InputError, SearchTooLarge) as exc:
        print(f"jacobel: input error: {exc}", file=sys.stderr)
        return 2
    except InvariantViolation as exc:
        print(f"jacobel: invariant violated: {exc}", file=sys.stderr)
        if exc.witness is not None:
            print(f"  witness: {jsonable(exc.witness)}", file=sys.stderr)
        return 1
    except JacobelError as exc:
        print(f"jacobel: {exc}", file=sys.stderr)
        return 1
    if args.json:
        sys.stdout.write(json.dumps(jsonable(cert), sort_keys=True, indent=2) + "\n")
    else:
        print("\n".join(lines))
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
