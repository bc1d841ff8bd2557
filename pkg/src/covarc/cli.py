"""Command-line surface: bounds tables, classification runs, catalog checks.

Catalog layout (root from --catalog or $COVARC_CATALOG, default ./catalog):

    <root>/N<N>-v<v>/k<k>.cat        arrays, blank-line separated
    <root>/N<N>-v<v>/k<k>.json       per-class metadata (format 1)
    <root>/N<N>-v<v>/audit-k<k>.json double-count report for the k-1 -> k step

Exit codes: 0 success, 1 audit or consistency failure, 2 usage or parse error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from fractions import Fraction
from pathlib import Path

from covarc.arrays import (
    ArrayFormatError,
    is_covering_array,
    is_uniform,
    missing_pair_witness,
    parse_catalog,
    serialize_catalog,
    check_tight_structure,
    high_frequency_profile,
)
from covarc.bounds import (
    closed_form_integer_bound,
    corollary_small_j_bound,
    uca_lower_bound,
)
from covarc.canon import array_canon
from covarc.extend import (
    Catalog,
    ClassRecord,
    ExtensionOptions,
    LevelResult,
    alpha_of,
    base_case,
    extend_level,
    skip_filter,
)
from covarc.verify import audit_transition

FAILED_MARKER = "FAILED"


class UsageError(Exception):
    pass


def _parse_range(spec: str):
    if ".." in spec:
        lo, hi = spec.split("..", 1)
        lo, hi = int(lo), int(hi)
    else:
        lo = hi = int(spec)
    if hi < lo:
        raise UsageError(f"empty range {spec!r}")
    return range(lo, hi + 1)


def _parse_delta(specs):
    schedule = {}
    for spec in specs:
        for item in spec.split(","):
            item = item.strip()
            if not item:
                continue
            if not item.startswith("k") or ":" not in item:
                raise UsageError(f"bad delta entry {item!r}; expected e.g. k4:3")
            kpart, dpart = item[1:].split(":", 1)
            schedule[int(kpart)] = int(dpart)
    return schedule


def _catalog_root(args):
    if args.catalog:
        return Path(args.catalog)
    env = os.environ.get("COVARC_CATALOG")
    return Path(env) if env else Path("catalog")


def _run_dir(root: Path, N: int, v: int) -> Path:
    return root / f"N{N}-v{v}"


def _level_paths(run_dir: Path, k: int):
    return run_dir / f"k{k}.cat", run_dir / f"k{k}.json"


def _write_level(run_dir: Path, level: LevelResult, N: int, v: int):
    run_dir.mkdir(parents=True, exist_ok=True)
    cat_path, json_path = _level_paths(run_dir, level.k)
    cat_path.write_text(serialize_catalog([c.array for c in level.classes]))
    doc = {
        "format": 1,
        "N": N,
        "v": v,
        "k": level.k,
        "count": level.count,
        "uniform_count": level.uniform_count,
        "classes": [
            {
                "signature": c.signature.hex(),
                "aut_order": c.aut_order,
                "uniform": c.uniform,
                "alpha": str(c.alpha),
            }
            for c in level.classes
        ],
    }
    json_path.write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n")
    if level.audit is not None:
        audit_path = run_dir / f"audit-k{level.k}.json"
        audit_path.write_text(
            json.dumps(level.audit.to_json_dict(), indent=1, sort_keys=True) + "\n"
        )


def _read_level(run_dir: Path, k: int):
    cat_path, json_path = _level_paths(run_dir, k)
    if not cat_path.exists() or not json_path.exists():
        raise UsageError(f"level k={k} not found under {run_dir}")
    arrays = parse_catalog(cat_path.read_text())
    doc = json.loads(json_path.read_text())
    classes = []
    for C, meta in zip(arrays, doc["classes"]):
        classes.append(
            ClassRecord(
                C,
                bytes.fromhex(meta["signature"]),
                meta["aut_order"],
                Fraction(meta["alpha"]),
                meta["uniform"],
            )
        )
    return LevelResult(k, classes, [])


# ---------------------------------------------------------------------------
# subcommands


def cmd_bounds(args):
    vrange = _parse_range(args.v)
    krange = _parse_range(args.k)
    if not vrange or not krange:
        raise UsageError("empty range")
    if min(vrange) < 3:
        raise UsageError("v must be at least 3 (the bound table includes the "
                         "k_max diagnostic, which needs v >= 3)")
    if min(krange) < 3:
        raise UsageError("k must be at least 3")
    rows = []
    for v in vrange:
        for k in krange:
            if args.method == "theorem1":
                b = uca_lower_bound(k, v)
                source = "theorem1"
                floor = b == v * v
            elif args.method == "closed-form":
                if k <= v:
                    continue  # negative discriminant: the corollary is vacuous
                b = closed_form_integer_bound(k, v)
                source = "closed-form"
                floor = False
            else:
                j = k - v
                if not 3 <= j <= 7:
                    continue
                b = corollary_small_j_bound(v, j).integer_bound
                source = f"corollary-{j}"
                floor = False
            rows.append({"v": v, "k": k, "bound": b, "source": source,
                         "floor": floor})
    if args.format == "json":
        for r in rows:
            print(json.dumps(r, sort_keys=True))
        return 0
    ks = sorted({r["k"] for r in rows})
    print("v\\k  " + "".join(f"{k:>6}" for k in ks))
    for v in vrange:
        cells = []
        for k in ks:
            match = [r for r in rows if r["v"] == v and r["k"] == k]
            if not match:
                cells.append(f"{'-':>6}")
            else:
                r = match[0]
                mark = "." if r["floor"] else ""
                cells.append(f"{str(r['bound']) + mark:>6}")
        print(f"v={v}  " + "".join(cells))
    print("('.'  marks the trivial v^2 floor; others come from the failure scan)")
    return 0


def _options_from_args(args):
    return ExtensionOptions(
        uniform_only=getattr(args, "uniform", False),
        delta_schedule=_parse_delta(getattr(args, "delta", []) or []),
        workers=getattr(args, "workers", 0) or (os.cpu_count() or 1),
    )


def cmd_base(args):
    root = _catalog_root(args)
    run_dir = _run_dir(root, args.N, args.v)
    reps = base_case(args.N, args.v, uniform_only=args.uniform)
    classes = []
    for C in reps:
        ac = array_canon(C)
        classes.append(
            ClassRecord(C, ac.signature, ac.aut.order, alpha_of(C), is_uniform(C))
        )
    classes.sort(key=lambda c: c.signature)
    level = LevelResult(2, classes, [])
    _write_level(run_dir, level, args.N, args.v)
    print(f"{args.v} {args.N} 2 {level.count} {level.uniform_count}")
    return 0


def _summary_line(v, N, level, elapsed):
    return f"{v} {N} {level.k} {level.count} {level.uniform_count} {elapsed:.2f}s"


def cmd_classify(args):
    options = _options_from_args(args)
    options.validate(args.N, args.v)
    root = _catalog_root(args)
    run_dir = _run_dir(root, args.N, args.v)
    if (run_dir / FAILED_MARKER).exists():
        (run_dir / FAILED_MARKER).unlink()
    t0 = time.time()
    base = base_case(args.N, args.v, uniform_only=options.uniform_only)
    delta2 = options.delta_schedule.get(2, 0)
    if delta2:
        base = [C for C in base if skip_filter(C, delta2)]
    classes = []
    for C in base:
        ac = array_canon(C)
        classes.append(
            ClassRecord(C, ac.signature, ac.aut.order, alpha_of(C), is_uniform(C))
        )
    classes.sort(key=lambda c: c.signature)
    level = LevelResult(2, classes, [])
    _write_level(run_dir, level, args.N, args.v)
    print(_summary_line(args.v, args.N, level, time.time() - t0))
    k = 2
    kmax = args.kmax
    while (kmax is None and level.count > 0) or (kmax is not None and k < kmax):
        t0 = time.time()
        delta_next = options.delta_schedule.get(k + 1, 0)
        if level.count:
            cls, recs = extend_level(
                [c.array for c in level.classes], options, delta_next
            )
        else:
            cls, recs = [], []
        level = LevelResult(k + 1, cls, recs)
        level.audit = audit_transition(level, args.N, args.v)
        _write_level(run_dir, level, args.N, args.v)
        k += 1
        print(_summary_line(args.v, args.N, level, time.time() - t0))
        if not level.audit.passed:
            (run_dir / FAILED_MARKER).write_text(
                f"double-count audit failed at k={k}\n"
            )
            print(f"AUDIT FAILURE at k={k}: class side "
                  f"{level.audit.class_side} != search side "
                  f"{level.audit.search_side}", file=sys.stderr)
            return 1
    return 0


def cmd_extend(args):
    options = _options_from_args(args)
    root = _catalog_root(args)
    run_dir = _run_dir(root, args.N, args.v)
    if (run_dir / FAILED_MARKER).exists():
        raise UsageError(f"{run_dir} holds a failed run; not resumable")
    level = _read_level(run_dir, args.k)
    delta_next = options.delta_schedule.get(args.k + 1, 0)
    t0 = time.time()
    cls, recs = extend_level([c.array for c in level.classes], options, delta_next)
    new_level = LevelResult(args.k + 1, cls, recs)
    new_level.audit = audit_transition(new_level, args.N, args.v)
    _write_level(run_dir, new_level, args.N, args.v)
    print(_summary_line(args.v, args.N, new_level, time.time() - t0))
    if not new_level.audit.passed:
        (run_dir / FAILED_MARKER).write_text(
            f"double-count audit failed at k={args.k + 1}\n"
        )
        return 1
    return 0


def cmd_check(args):
    try:
        text = Path(args.file).read_text()
    except OSError as exc:
        raise UsageError(str(exc)) from None
    arrays = parse_catalog(text)
    for idx, C in enumerate(arrays):
        ac = array_canon(C)
        ca = is_covering_array(C)
        uni = is_uniform(C)
        bits = [f"array {idx}: v={C.v} k={C.k} N={C.N}"]
        if ca:
            bits.append("CA: yes")
        else:
            w = missing_pair_witness(C)
            bits.append(f"CA: no (columns {w[0]},{w[1]} miss pair ({w[2]},{w[3]}))")
        bits.append(f"uniform: {'yes' if uni else 'no'}")
        bits.append(f"|Aut|: {ac.aut.order}")
        prof = high_frequency_profile(C)
        bits.append("hf-profile: " + ",".join(map(str, prof.a)))
        if C.N == C.v * C.v + C.v - 1 and C.k == C.v + 2 and ca and uni:
            rep = check_tight_structure(C)
            bits.append(f"tight-structure: {'pass' if rep.passed else 'FAIL'}")
        print("  ".join(bits))
    return 0


def cmd_audit(args):
    root = _catalog_root(args)
    run_dir = _run_dir(root, args.N, args.v)
    if not run_dir.is_dir():
        raise UsageError(f"no catalog at {run_dir}")
    failed = False
    for audit_path in sorted(run_dir.glob("audit-k*.json")):
        doc = json.loads(audit_path.read_text())
        k = doc["level"]
        level = _read_level(run_dir, k)
        from covarc.verify import class_side

        cs = class_side(level.classes, k, args.v)
        stored_cs = Fraction(doc["classSide"])
        stored_ss = Fraction(doc["searchSide"])
        ok = cs == stored_cs == stored_ss and doc["pass"]
        failed |= not ok
        print(json.dumps({
            "level": k,
            "classSide": str(cs),
            "searchSide": str(stored_ss),
            "pass": ok,
        }, sort_keys=True))
    return 1 if failed else 0


# ---------------------------------------------------------------------------


def build_parser():
    p = argparse.ArgumentParser(
        prog="covarc",
        description="Strength-2 covering array classification and bounds",
    )
    sub = p.add_subparsers(dest="command", required=True)

    b = sub.add_parser("bounds", help="lower bound table for UCAN(k, v)")
    b.add_argument("--v", required=True, help="order range, e.g. 3..6")
    b.add_argument("--k", required=True, help="degree range, e.g. 4..10")
    b.add_argument("--method", choices=["theorem1", "corollary", "closed-form"],
                   default="theorem1")
    b.add_argument("--format", choices=["text", "json"], default="text")
    b.set_defaults(func=cmd_bounds)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--N", type=int, required=True)
    common.add_argument("--v", type=int, required=True)
    common.add_argument("--catalog", default=None,
                        help="catalog root (default $COVARC_CATALOG or ./catalog)")

    ba = sub.add_parser("base", parents=[common],
                        help="write the two-column level")
    ba.add_argument("--uniform", action="store_true")
    ba.set_defaults(func=cmd_base)

    cl = sub.add_parser("classify", parents=[common],
                        help="classify all levels, writing the catalog")
    cl.add_argument("--kmax", type=int, default=None)
    cl.add_argument("--uniform", action="store_true")
    cl.add_argument("--delta", action="append", default=[],
                    help="skip schedule, e.g. k4:3,k5:2,k6:1")
    cl.add_argument("--workers", type=int, default=0,
                    help="parallel workers (default: available cores)")
    cl.set_defaults(func=cmd_classify)

    ex = sub.add_parser("extend", parents=[common],
                        help="extend one stored level by a column")
    ex.add_argument("--k", type=int, required=True)
    ex.add_argument("--uniform", action="store_true")
    ex.add_argument("--delta", action="append", default=[])
    ex.add_argument("--workers", type=int, default=0)
    ex.set_defaults(func=cmd_extend)

    ch = sub.add_parser("check", help="validity report for an array file")
    ch.add_argument("file")
    ch.set_defaults(func=cmd_check)

    au = sub.add_parser("audit", parents=[common],
                        help="re-verify stored double-count reports")
    au.set_defaults(func=cmd_audit)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ArrayFormatError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
