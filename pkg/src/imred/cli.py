"""Command-line front end: translate, family, check, refute, audit, bench.

Output is plain text, one record per line, tab-separated where a record
has fields.  Exit codes: 0 for success/true/exhausted, 1 for a refuted
or failed check, 2 for usage, parse or validation errors.  All
randomness is seeded and the seed is echoed, so identical invocations
produce identical bytes (bench timings excepted).  The environment
variable IMRED_TIME_CAP_MS caps search time when no explicit cap is
given.
"""

from __future__ import annotations

import argparse
import random
import sys
import time

from . import corpus, reduction, search, semantics, syntax
from .formula import Formula, length, varset
from .reduction import (base_length, family_formula, level_count,
                        reduce_to_one_var, positive_embed, spiral_cell,
                        spiral_index, spiral_walk, stability_level, star)
from .search import SearchBudget, find_countermodel
from .semantics import FS, MIPC, TableContext, bits_of, truth_table

EXIT_OK = 0
EXIT_REFUTED = 1
EXIT_ERROR = 2


def _kind(args: argparse.Namespace) -> str:
    return MIPC if args.mipc else FS


def _budget(args: argparse.Namespace, var_bound: int) -> SearchBudget:
    return SearchBudget(max_worlds=args.max_worlds,
                        max_points=args.max_points,
                        var_bound=var_bound,
                        max_candidates=args.max_candidates,
                        time_cap_ms=args.time_cap_ms)


def _parse_or_die(text: str, out) -> Formula:
    try:
        return syntax.parse_formula(text)
    except syntax.FormulaSyntaxError as err:
        print(f"error\t{err}", file=out)
        raise SystemExit(EXIT_ERROR)


def cmd_translate(args: argparse.Namespace, out) -> int:
    phi = _parse_or_die(args.formula, sys.stderr)

    def emit(key: str, value) -> None:
        print(f"{key}\t{value}", file=out)

    emit("input", syntax.print_formula(phi))
    emit("input_length", length(phi))
    if args.stage == "star":
        if not phi.positive:
            print("error\tstage star needs a positive input formula",
                  file=sys.stderr)
            return EXIT_ERROR
        subst = star(phi)
        emit("base_size", base_length())
        emit("stable_level", subst.stable_level)
        emit("input_level", subst.input_level)
        emit("substitution_level", subst.level)
        emit("var_map", ",".join(f"p{a}->p{b}" for a, b in subst.var_map) or "-")
        emit("output_length", length(subst.result))
        emit("output", syntax.print_formula(subst.result))
        return EXIT_OK
    embedding = positive_embed(phi)
    emit("fresh_var", f"p{embedding.fresh_var}")
    emit("diamond_guard", syntax.print_formula(embedding.diamond_guard))
    emit("box_guard", syntax.print_formula(embedding.box_guard))
    emit("entailment_guard", syntax.print_formula(embedding.entailment_guard))
    emit("guard", syntax.print_formula(embedding.guard))
    emit("body", syntax.print_formula(embedding.body))
    emit("positive_form", syntax.print_formula(embedding.positive_form))
    emit("positive_length", length(embedding.positive_form))
    if args.stage == "positive":
        return EXIT_OK
    report = reduce_to_one_var(phi)
    emit("base_size", report.base_size)
    emit("stable_level", report.stable_level)
    emit("input_level", report.input_level)
    emit("substitution_level", report.level)
    emit("var_map", ",".join(f"p{a}->p{b}"
                             for a, b in report.substitution.var_map) or "-")
    emit("output_length", report.output_length)
    emit("bound_limit", report.bound_limit)
    emit("bound_ok", "true" if report.bound_ok else "false")
    emit("output", syntax.print_formula(report.output))
    return EXIT_OK


def cmd_family(args: argparse.Namespace, out) -> int:
    if args.g is not None:
        i, j = args.g
        print(spiral_index(i, j), file=out)
        return EXIT_OK
    if args.ginv is not None:
        i, j = spiral_cell(args.ginv)
        print(f"({i},{j})", file=out)
        return EXIT_OK
    if args.count is not None:
        print(level_count(args.count), file=out)
        return EXIT_OK
    if args.letter is None or args.level is None or args.index is None:
        print("error\tfamily needs LETTER LEVEL INDEX "
              "(or one of --g/--ginv/--count)", file=sys.stderr)
        return EXIT_ERROR
    phi = family_formula(args.letter, args.level, args.index,
                         base_var=args.base_var)
    print(syntax.print_formula(phi), file=out)
    return EXIT_OK


def cmd_check(args: argparse.Namespace, out) -> int:
    try:
        with open(args.model, encoding="utf-8") as handle:
            text = handle.read()
    except OSError as err:
        print(f"error\t{err}", file=sys.stderr)
        return EXIT_ERROR
    try:
        model = syntax.parse_model(text,
                                   kind=MIPC if args.mipc else
                                   (FS if args.fs else None))
    except (syntax.ModelSyntaxError, syntax.ModelValidationError) as err:
        print(f"error\t{err}", file=sys.stderr)
        return EXIT_ERROR
    phi = _parse_or_die(args.formula, sys.stderr)
    ctx = TableContext.for_model(model)
    tables = truth_table(model, phi, ctx)
    mask = tables[phi]
    all_true = mask & ctx.space == ctx.space
    if args.global_verdict:
        print("true" if all_true else "false", file=out)
    else:
        for w, x in ctx.pairs:
            value = "true" if (mask >> (w * ctx.n_points + x)) & 1 else "false"
            print(f"{model.world_names[w]}\t{model.point_names[x]}\t{value}",
                  file=out)
    return EXIT_OK if all_true else EXIT_REFUTED


def cmd_refute(args: argparse.Namespace, out) -> int:
    phi = _parse_or_die(args.formula, sys.stderr)
    var_bound = args.vars if args.vars is not None else \
        max(varset(phi), default=0)
    try:
        budget = _budget(args, var_bound)
        result = find_countermodel(phi, budget, _kind(args))
    except ValueError as err:
        print(f"error\t{err}", file=sys.stderr)
        return EXIT_ERROR
    stats = result.stats
    if result.refuted:
        # pure certificate on stdout: model text plus the refutes trailer
        out.write(syntax.print_certificate(result.countermodel, result.world,
                                           result.point))
        return EXIT_REFUTED
    print(f"exhausted\tmodels_tested={stats.models_tested}"
          f"\tstop={stats.stop}"
          f"\tmax_worlds={budget.max_worlds}"
          f"\tmax_points={budget.max_points}"
          f"\tvars={budget.var_bound}", file=out)
    return EXIT_OK


def _audit_spiral(limit: int, out) -> bool:
    walk = spiral_walk()
    previous_rank = 0
    for rank in range(1, limit + 1):
        cell = next(walk)
        back = spiral_index(*cell)
        cell2 = spiral_cell(rank)
        if back != rank or cell2 != cell or back <= previous_rank:
            print(f"spiral\tfail\trank={rank} cell={cell} "
                  f"index={back} inverse={cell2}", file=out)
            return False
        previous_rank = back
    print(f"spiral\tpass\tranks=1..{limit}", file=out)
    return True


def _audit_family_sizes(max_level: int, per_level: int, seed: int, out) -> bool:
    rng = random.Random(seed)
    base = base_length()
    for level in range(max_level + 1):
        count = level_count(level)
        if count <= per_level:
            indices = list(range(1, count + 1))
        else:
            indices = sorted({1, count} |
                             {rng.randrange(1, count + 1)
                              for _ in range(per_level)})
        bound = base * 5 ** level
        for letter in ("A", "B"):
            for index in indices:
                got = length(family_formula(letter, level, index))
                if got >= bound:
                    print(f"family-sizes\tfail\t{letter} level={level} "
                          f"index={index} length={got} bound={bound}",
                          file=out)
                    return False
    print(f"family-sizes\tpass\tmax-level={max_level} seed={seed}", file=out)
    return True


def _audit_growth(out) -> bool:
    base = base_length()
    k0 = stability_level()
    for k in range(k0, k0 + 11):
        if level_count(k) <= base * 5 ** k:
            print(f"growth-cert\tfail\tlevel={k}", file=out)
            return False
    if level_count(k0) < 7:
        print(f"growth-cert\tfail\tcount({k0})<7", file=out)
        return False
    print(f"growth-cert\tpass\tk0={k0} base_size={base}", file=out)
    return True


def _audit_sizes(count: int, seed: int, max_length: int, out) -> bool:
    rng = random.Random(seed)
    worst = 0.0
    for _ in range(count):
        target = rng.randint(4, max_length)
        phi = corpus.formula_with_length(rng, target)
        report = reduce_to_one_var(phi)
        if not report.bound_ok:
            print(f"sizes\tfail\tinput={syntax.print_formula(phi)}", file=out)
            return False
        worst = max(worst, report.output_length / report.bound_limit)
    print(f"sizes\tpass\tcorpus={count} seed={seed} max-length={max_length} "
          f"worst-ratio={worst:.6f}", file=out)
    return True


def cmd_audit(args: argparse.Namespace, out) -> int:
    run_all = not (args.spiral or args.family_sizes or args.growth_cert
                   or args.sizes)
    ok = True
    if run_all or args.spiral:
        ok = _audit_spiral(args.spiral or 10_000, out) and ok
    if run_all or args.family_sizes:
        ok = _audit_family_sizes(args.max_level, args.per_level, args.seed,
                                 out) and ok
    if run_all or args.growth_cert:
        ok = _audit_growth(out) and ok
    if run_all or args.sizes:
        ok = _audit_sizes(args.corpus, args.seed, args.max_length, out) and ok
    return EXIT_OK if ok else EXIT_REFUTED


def _fit_cubic(xs: list[float], ys: list[float]) -> tuple[list[float], float]:
    """Least-squares polynomial fit of degree <= 3; returns coefficients and R^2."""
    import numpy as np

    coeffs = np.polyfit(xs, ys, deg=min(3, len(xs) - 1))
    predicted = np.polyval(coeffs, xs)
    observed = np.asarray(ys)
    residual = float(((observed - predicted) ** 2).sum())
    spread = float(((observed - observed.mean()) ** 2).sum())
    r2 = 1.0 if spread == 0 else 1.0 - residual / spread
    return [float(c) for c in coeffs], r2


def cmd_bench(args: argparse.Namespace, out) -> int:
    sizes = [int(s) for s in args.sizes.split(",")]
    rng = random.Random(args.seed)
    print(f"seed\t{args.seed}", file=out)
    xs: list[float] = []
    ys: list[float] = []
    for size in sizes:
        best = None
        observed_length = 0
        for _ in range(args.repeats):
            phi = corpus.formula_with_length(rng, size)
            started = time.perf_counter()
            report = reduce_to_one_var(phi)
            elapsed = time.perf_counter() - started
            observed_length = length(phi)
            assert report.bound_ok
            best = elapsed if best is None else min(best, elapsed)
        xs.append(float(observed_length))
        ys.append(best)
        print(f"size\t{size}\tlength\t{observed_length}\tseconds\t{best:.6f}",
              file=out)
    coeffs, r2 = _fit_cubic(xs, ys)
    print(f"fit\tdegree=3\tr2={r2:.4f}\tcoeffs={coeffs}", file=out)
    return EXIT_OK


_GENERATOR_HELP = """\
random corpus shape:
  formulas are drawn as random trees of depth <= 4 with connective
  weights & : | : -> : <> : [] = 3 : 3 : 3 : 2 : 2, a 25% chance of
  cutting a branch early and a 20% chance of a false leaf; sized inputs
  join such chunks pairwise until the target symbol length is reached.
  Identical seeds give identical corpora and byte-identical output.
"""


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="imred",
        description="FS/MIPC toolkit: positive one-variable translation, "
                    "model checking and bounded countermodel search.")
    sub = parser.add_subparsers(dest="command", required=True)

    tr = sub.add_parser("translate",
                        help="translate a formula into the positive "
                             "one-variable fragment")
    tr.add_argument("formula")
    tr.add_argument("--stage", choices=("positive", "star", "full"),
                    default="full",
                    help="stop after the positive embedding, run only the "
                         "one-variable substitution, or run both (default)")

    fam = sub.add_parser("family",
                         help="print family formulas and the pair enumeration")
    fam.add_argument("letter", nargs="?", choices=("A", "B"))
    fam.add_argument("level", nargs="?", type=int)
    fam.add_argument("index", nargs="?", type=int)
    fam.add_argument("--base-var", type=int, default=1, metavar="N",
                     help="variable the family is built over (default 1)")
    fam.add_argument("--g", nargs=2, type=int, metavar=("I", "J"),
                     help="print the rank of cell (I, J)")
    fam.add_argument("--ginv", type=int, metavar="R",
                     help="print the cell of rank R")
    fam.add_argument("--count", type=int, metavar="K",
                     help="print how many formulas per letter level K holds")

    ck = sub.add_parser("check", help="evaluate a formula over a model file")
    ck.add_argument("model")
    ck.add_argument("formula")
    ck.add_argument("--global", dest="global_verdict", action="store_true",
                    help="print a single verdict instead of a per-pair table")
    _logic_flags(ck)

    rf = sub.add_parser("refute",
                        help="search for a countermodel within a budget")
    rf.add_argument("formula")
    _logic_flags(rf)
    _budget_flags(rf)

    au = sub.add_parser("audit", help="self-checks; no flags runs everything",
                        epilog=_GENERATOR_HELP,
                        formatter_class=argparse.RawDescriptionHelpFormatter)
    au.add_argument("--spiral", type=int, metavar="N",
                    help="check the pair enumeration up to rank N")
    au.add_argument("--family-sizes", action="store_true",
                    help="check family formula lengths against the "
                         "per-level bound")
    au.add_argument("--max-level", type=int, default=6)
    au.add_argument("--per-level", type=int, default=100,
                    help="random indices per level above level 3")
    au.add_argument("--growth-cert", action="store_true",
                    help="certify the family-count growth level")
    au.add_argument("--sizes", action="store_true",
                    help="check the quadratic output bound on a random corpus")
    au.add_argument("--corpus", type=int, default=50, metavar="N")
    au.add_argument("--max-length", type=int, default=400)
    au.add_argument("--seed", type=int, default=7)

    be = sub.add_parser("bench",
                        help="time the translation across input sizes and "
                             "fit a cubic",
                        epilog=_GENERATOR_HELP,
                        formatter_class=argparse.RawDescriptionHelpFormatter)
    be.add_argument("--sizes", default="100,1000,10000",
                    help="comma-separated input lengths")
    be.add_argument("--repeats", type=int, default=3)
    be.add_argument("--seed", type=int, default=7)

    return parser


def _logic_flags(cmd: argparse.ArgumentParser) -> None:
    group = cmd.add_mutually_exclusive_group()
    group.add_argument("--fs", action="store_true",
                       help="FS semantics (default)")
    group.add_argument("--mipc", action="store_true",
                       help="MIPC semantics (total per-world relations)")


def _budget_flags(cmd: argparse.ArgumentParser) -> None:
    cmd.add_argument("--max-worlds", type=int, default=3, metavar="N")
    cmd.add_argument("--max-points", type=int, default=3, metavar="N")
    cmd.add_argument("--vars", type=int, default=None, metavar="N",
                     help="variable bound (default: the formula's variables)")
    cmd.add_argument("--max-candidates", type=int, default=None, metavar="N",
                     help="stop after testing N candidate models")
    cmd.add_argument("--time-cap-ms", type=float, default=None, metavar="MS",
                     help=f"stop after MS milliseconds (default: "
                          f"${search.TIME_CAP_ENV} if set)")


_COMMANDS = {
    "translate": cmd_translate,
    "family": cmd_family,
    "check": cmd_check,
    "refute": cmd_refute,
    "audit": cmd_audit,
    "bench": cmd_bench,
}


def main(argv: list[str] | None = None, out=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as err:
        return EXIT_ERROR if err.code not in (0, None) else EXIT_OK
    try:
        return _COMMANDS[args.command](args, out if out is not None else sys.stdout)
    except SystemExit as err:
        return err.code if isinstance(err.code, int) else EXIT_ERROR
    except ValueError as err:
        print(f"error\t{err}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    raise SystemExit(main())
