"""Command line driver.

Exit codes: 0 success, 2 count mismatch, 3 invariant violation, 4 bad input.
Structured reports (``--format json`` / ``--report``) carry no timings so
that identical inputs give byte-identical reports; timings go to the text
summary only.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .catalog import (
    EXPECTED_CLASSES,
    Catalog,
    CatalogError,
    CatalogFormatError,
    ClassCountMismatch,
    all_opermutations,
    builtin_catalog,
    load_catalog,
    published_total_note,
    validate,
)
from .field import make_field
from .incidence import (
    IncidenceStructure,
    affine_plane_witness,
    build_laguerre_cone,
    build_laguerre_elation,
    build_tgq,
    derived_plane,
    gq_witness,
    laguerre_witness,
)
from .opoly import brute_force_opermutations, table_keys
from .pseudo_oval import (
    InvariantViolation,
    PseudoOval,
    elementary,
    pseudo_oval_witness,
    steinke_coordinates,
)
from .wild import SearchInterrupted, classify, default_a_values, enumerate_wild_subspaces, kernel

EXIT_OK, EXIT_MISMATCH, EXIT_INVARIANT, EXIT_INPUT = 0, 2, 3, 4
LONG_DEGREES = (5, 6)


class BadInput(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


# helpers --------------------------------------------------------------------------


def _catalog(args) -> Catalog:
    try:
        return load_catalog(args.catalog) if args.catalog else builtin_catalog(args.n)
    except FileNotFoundError as exc:
        raise BadInput(f"catalog not found: {exc.filename}") from None


def _cache(args) -> Path | None:
    if getattr(args, "no_cache", False):
        return None
    if args.cache:
        return Path(args.cache)
    env = os.environ.get("PSEUDOOVALS_CACHE")
    return Path(env) if env else None


def _check_n(args, allowed=(1, 2, 3, 4, 5, 6)) -> None:
    if args.n not in allowed:
        raise BadInput(f"--n must be one of {allowed}")
    if args.n in LONG_DEGREES and not args.long:
        raise BadInput(f"n = {args.n} is a long run; pass --long to confirm")


def _expand(args):
    field = make_field(args.n)
    cat = _catalog(args)
    return field, cat, all_opermutations(cat, field, _cache(args))


def _emit(args, report: dict, summary: list[str]) -> None:
    text = json.dumps(report, indent=1, sort_keys=True) + "\n"
    if args.report:
        Path(args.report).write_text(text)
    if args.format == "json":
        sys.stdout.write(text)
    else:
        for line in summary:
            print(line)


def _progress(label: str, a_values: list[int], classes: int):
    """Progress callback; ``done`` counts within one (class, a) search, the ETA covers the whole run."""
    started = time.monotonic()
    last = [0.0]
    searches = classes * len(a_values)

    def report(ci, a, done, total):
        now = time.monotonic()
        if now - last[0] < 5 and done < total:
            return
        last[0] = now
        finished = ci * len(a_values) + a_values.index(a)
        frac = (finished * total + done) / (searches * total) if total else 1.0
        eta = (now - started) / frac * (1 - frac) if frac > 0 else float("nan")
        print(f"[{label}] class {ci} a={a}: {done}/{total}, overall {100 * frac:.1f}%, eta {eta:.0f}s",
              file=sys.stderr)

    return report


def _class_table(exp, index: int) -> np.ndarray:
    labels = exp.labels()
    if not 0 <= index < len(labels):
        raise BadInput(f"--class must be in 0..{len(labels) - 1}")
    return labels[index]


# subcommands ------------------------------------------------------------------------


def cmd_enumerate(args) -> int:
    _check_n(args)
    t0 = time.monotonic()
    field, cat, exp = _expand(args)
    report = {
        "n": args.n,
        "modulus": field.modulus,
        "catalog": cat.digest,
        "classes": exp.class_count,
        "expected_classes": EXPECTED_CLASSES.get(args.n),
        "class_sizes": exp.class_sizes(),
        "labels": [lab.tobytes().hex() for lab in exp.labels()],
        "opolynomials": exp.opolynomial_count,
        "opermutations": exp.opermutation_count,
        "published_note": published_total_note(args.n, exp.opolynomial_count, exp.opermutation_count),
    }
    _emit(args, report, [
        f"GF({field.q}): {exp.opermutation_count} o-permutations, {exp.class_count} classes",
        f"  {exp.opolynomial_count} o-polynomials; {report['published_note']}",
        f"  wall time {time.monotonic() - t0:.1f}s",
    ])
    return EXIT_OK


def cmd_classify(args) -> int:
    _check_n(args, (3, 4, 5, 6))
    t0 = time.monotonic()
    field, cat, exp = _expand(args)
    if args.a is not None:
        if not 2 <= args.a < field.q:
            raise BadInput("--a must be a field element outside GF(2)")
        a_values = [args.a]
    else:
        a_values = default_a_values(field, args.all_a or args.n <= 4)
    progress = _progress(f"n={args.n}", a_values, exp.class_count) if args.long else None
    try:
        rep = classify(field, exp.classifier, a_values, catalog_digest=cat.digest,
                       expected_classes=EXPECTED_CLASSES.get(args.n), checkpoint=args.resume,
                       checkpoint_every=args.checkpoint_every, budget=args.budget,
                       workers=args.workers, progress=progress)
    except SearchInterrupted as exc:
        print(f"interrupted: {exc}", file=sys.stderr)
        return EXIT_MISMATCH
    data = json.loads(rep.to_json())
    if args.n == 3 and not args.skip_direct:
        ops = brute_force_opermutations(field)
        spaces = enumerate_wild_subspaces(field, np.array(ops))
        data["direct_wild_subspaces"] = len(spaces)
        data["direct_kernels"] = sorted({kernel(field, w) for w in spaces})
    summary = [f"{rep.conclusion}", f"  {len(rep.records)} searches over {rep.opolynomials} o-polynomials"]
    if "direct_wild_subspaces" in data:
        summary.append(f"  direct enumeration: {data['direct_wild_subspaces']} Wild subspaces, "
                       f"kernel degrees {data['direct_kernels']}")
    summary.append(f"  wall time {time.monotonic() - t0:.1f}s")
    _emit(args, data, summary)
    if rep.non_elementary:
        return EXIT_INVARIANT
    if rep.expected_classes is not None and rep.class_count != rep.expected_classes:
        return EXIT_MISMATCH
    if data.get("direct_kernels", [args.n]) != [args.n]:
        return EXIT_INVARIANT
    return EXIT_OK


def cmd_build_pseudo_oval(args) -> int:
    _check_n(args)
    field, cat, exp = _expand(args)
    o = elementary(field, _class_table(exp, args.class_index), sample=2000 if args.n >= 5 else None)
    o.source["catalog"] = cat.digest
    Path(args.out).write_text(o.to_json())
    report = {"n": args.n, "class": args.class_index, "catalog": cat.digest, "elements": len(o.elements),
              "out": str(args.out)}
    _emit(args, report, [f"wrote {len(o.elements)} elements in PG({3 * args.n - 1}, 2) to {args.out}"])
    return EXIT_OK


def cmd_build_tgq(args) -> int:
    _check_n(args)
    field, cat, exp = _expand(args)
    o = elementary(field, _class_table(exp, args.class_index), sample=2000 if args.n >= 5 else None)
    s = build_tgq(o)
    s.info.update({"class": args.class_index, "catalog": cat.digest})
    w = gq_witness(s, sample=2000 if args.n >= 5 else None)
    if args.out:
        s.write_edge_list(args.out)
    if w is not None:
        print(f"GQ verification failed: {w}", file=sys.stderr)
        return EXIT_INVARIANT
    q = 1 << args.n
    report = {"n": args.n, "class": args.class_index, "catalog": cat.digest, "points": s.shape[0],
              "lines": s.shape[1], "order": [q, q], "sampled": args.n >= 5}
    _emit(args, report, [f"T(O): {s.shape[0]} points, {s.shape[1]} lines, order ({q}, {q})"])
    return EXIT_OK


def cmd_build_laguerre(args) -> int:
    _check_n(args, (1, 2, 3, 4))
    field, cat, exp = _expand(args)
    f = _class_table(exp, args.class_index)
    if args.model == "cone":
        s = build_laguerre_cone(field, f)
    else:
        s = build_laguerre_elation(steinke_coordinates(elementary(field, f)))
    s.info.update({"class": args.class_index, "catalog": cat.digest})
    if args.out:
        s.write_edge_list(args.out)
    w = laguerre_witness(s)
    if w is not None:
        print(f"Laguerre verification failed: {w}", file=sys.stderr)
        return EXIT_INVARIANT
    d = affine_plane_witness(derived_plane(s, 0))
    if d is not None:
        print(f"derived plane failed: {d}", file=sys.stderr)
        return EXIT_INVARIANT
    q = 1 << args.n
    report = {"n": args.n, "class": args.class_index, "catalog": cat.digest, "model": args.model,
              "points": s.shape[0], "circles": s.shape[1], "generators": q + 1, "order": q, "derived_order": q}
    _emit(args, report, [f"Laguerre plane ({args.model}): {s.shape[0]} points, {s.shape[1]} circles, "
                         f"{q + 1} generators, order {q}"])
    return EXIT_OK


def cmd_verify(args) -> int:
    path = Path(args.file)
    if not path.exists():
        raise BadInput(f"no such file: {path}")
    text = path.read_text()
    if path.suffix == ".cat":
        try:
            cat = load_catalog(path)
        except CatalogFormatError as exc:
            raise BadInput(str(exc)) from None
        bad = [(e, r) for e in cat.entries for r in [validate(e)] if not r.ok]
        for e, r in bad:
            print(f"{path}:{e.line}: {e.name}: {r.reason}: {r.witness}")
        print(f"{len(cat.entries) - len(bad)}/{len(cat.entries)} entries valid")
        return EXIT_INVARIANT if bad else EXIT_OK
    if text.lstrip().startswith("{"):
        try:
            o = PseudoOval.from_json(text)
        except (ValueError, KeyError) as exc:
            raise BadInput(str(exc)) from None
        w = pseudo_oval_witness(o, sample=args.sample)
        if w is not None:
            print(f"not a pseudo-oval: {w}")
            return EXIT_INVARIANT
        print(f"valid {o.n}-dimensional pseudo-oval ({len(o.elements)} elements)")
        return EXIT_OK
    if text.startswith("#"):
        try:
            s = IncidenceStructure.read_edge_list(path)
        except (ValueError, KeyError, IndexError) as exc:
            raise BadInput(f"malformed edge list: {exc}") from None
        check = {"GQ": lambda: gq_witness(s, sample=args.sample), "Laguerre": lambda: laguerre_witness(s),
                 "affine": lambda: affine_plane_witness(s)}.get(s.kind)
        if check is None:
            raise BadInput(f"unknown structure kind {s.kind!r}")
        w = check()
        if w is not None:
            print(f"not a valid {s.kind} structure: {w}")
            return EXIT_INVARIANT
        print(f"valid {s.kind} structure: {s.shape[0]} points, {s.shape[1]} blocks")
        return EXIT_OK
    raise BadInput(f"{path}: unrecognized file type")


def cmd_oracle(args) -> int:
    _check_n(args, (1, 2, 3, 4))
    field, cat, exp = _expand(args)
    brute = table_keys(brute_force_opermutations(field))
    expanded = table_keys(exp.opermutations())
    same = brute == expanded
    report = {"n": args.n, "brute_force": len(brute), "expansion": len(expanded), "identical": same,
              "only_brute_force": len(brute - expanded), "only_expansion": len(expanded - brute)}
    _emit(args, report, [f"GF({field.q}): brute force {len(brute)}, expansion {len(expanded)}, "
                         f"{'identical' if same else 'DIFFERENT'}"])
    return EXIT_OK if same else EXIT_MISMATCH


# parser -----------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="pseudoovals", description="Pseudo-oval classification via Wild subspaces")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, n_required=True):
        sp.add_argument("--n", type=int, required=n_required, help="field degree: GF(2^n)")
        sp.add_argument("--catalog", help="hyperoval catalog file (default: the shipped one)")
        sp.add_argument("--cache", help="orbit cache directory (default: $PSEUDOOVALS_CACHE, else none)")
        sp.add_argument("--no-cache", action="store_true")
        sp.add_argument("--long", action="store_true", help="allow the n = 5, 6 runs")
        sp.add_argument("--format", choices=["text", "json"], default="text")
        sp.add_argument("--report", help="also write the structured report here")

    sp = sub.add_parser("enumerate", help="o-permutation counts and classes of GF(2^n)")
    common(sp)
    sp.set_defaults(func=cmd_enumerate)

    sp = sub.add_parser("classify", help="Wild-subspace search over every class representative")
    common(sp)
    sp.add_argument("--all-a", action="store_true", help="every a outside GF(2) (default for n <= 4)")
    sp.add_argument("--a", type=int, help="a single a (bit pattern)")
    sp.add_argument("--resume", type=Path, help="checkpoint file, created or resumed")
    sp.add_argument("--checkpoint-every", type=int, default=1 << 18)
    sp.add_argument("--budget", type=int, help="stop after this many candidates (checkpoint is kept)")
    sp.add_argument("--workers", type=int, default=1)
    sp.add_argument("--skip-direct", action="store_true", help="n = 3: skip the direct enumeration")
    sp.set_defaults(func=cmd_classify)

    for name, func in (("build-tgq", cmd_build_tgq), ("build-pseudo-oval", cmd_build_pseudo_oval)):
        sp = sub.add_parser(name)
        common(sp)
        sp.add_argument("--class", dest="class_index", type=int, default=0, help="class index in label order")
        sp.add_argument("--out", required=name == "build-pseudo-oval")
        sp.set_defaults(func=func)

    sp = sub.add_parser("build-laguerre")
    common(sp)
    sp.add_argument("--class", dest="class_index", type=int, default=0)
    sp.add_argument("--model", choices=["cone", "elation"], default="cone")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_build_laguerre)

    sp = sub.add_parser("verify", help="verify a pseudo-oval, edge-list or catalog file")
    sp.add_argument("file")
    sp.add_argument("--sample", type=int, help="sample this many configurations instead of all")
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("oracle", help="brute force versus catalog expansion (n <= 4)")
    common(sp)
    sp.set_defaults(func=cmd_oracle)
    return p


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:  # usage errors (4) and --help/--version (0)
        return int(exc.code or 0)
    try:
        return args.func(args)
    except BadInput as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except CatalogFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ClassCountMismatch as exc:
        print(f"count mismatch: {exc}", file=sys.stderr)
        return EXIT_MISMATCH
    except CatalogError as exc:
        print(f"catalog error: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except InvariantViolation as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
