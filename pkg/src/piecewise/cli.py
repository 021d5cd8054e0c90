"""Command line entry point: ``piecewise <command> ...``."""
from __future__ import annotations

import argparse
import re
import sys

from . import io as pio
from . import suites
from .an_walks import AlternatingModel
from .curves import DomainError, InsufficientPoints, compare_profile_to_curve, curve
from .gluing import GluingError, build_bubble, build_houghton, pocket_extension, rooted_gluing, star_extension
from .labelled_graph import (CyclicGroup, IntegerLattice, MalformedGroup, WindowOverflow, build_cayley, degree,
                             enumerate_ball, validate, vertex_str, vertex_to_json)
from .perm_engine import PiecewiseGroup
from .profile_engine import BudgetExceeded, DEFAULT_BUDGET, enumerate_elements, lambda_profile
from .walk_engine import letter_measure, monte_carlo_return, return_probability

EXIT_OK, EXIT_VALIDATION, EXIT_BUDGET, EXIT_USAGE = 0, 2, 3, 64

SEEDED_SUITES = {"commutators", "houghton", "cycle-comparison", "erschler"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# ---------------------------------------------------------------------------
# named groups
#
# Base tokens: ``z`` (integers), ``z^2`` (integer plane), ``zB`` (cyclic of order B).


def _cayley(token: str, names=None):
    if token == "z":
        return build_cayley(IntegerLattice(1), names=names)
    if token == "z^2":
        return build_cayley(IntegerLattice(2), names=names)
    m = re.fullmatch(r"z(\d+)", token)
    if m and int(m.group(1)) >= 2:
        return build_cayley(CyclicGroup(int(m.group(1))), names=names)
    raise UsageError(f"unknown base group {token!r}")


def build_graph(name: str):
    """Labelled graph for a registry name such as ``pocket-z3`` or ``rooted-z-z2``."""
    kind, _, rest = name.partition("-")
    if kind == "cayley":
        return _cayley(rest)
    if kind == "pocket":
        return pocket_extension(_cayley(rest))
    if kind == "star":
        return star_extension(_cayley(rest))
    if kind == "houghton" and rest.isdigit():
        return build_houghton(int(rest), window=64)
    if kind == "rooted":
        parts = rest.split("-")
        if len(parts) < 2:
            raise UsageError("rooted gluing needs at least two components")
        comps = []
        for i, tok in enumerate(parts):
            base = _cayley(tok)
            if i:
                suffix = "beta" if i == 1 and tok not in ("z", "z^2") else f"u{i}"
                names = [suffix] if len(base.names) == 1 else [f"{suffix}_{j + 1}" for j in range(len(base.names))]
                base = _cayley(tok, names)
            comps.append(base)
        return rooted_gluing(comps)
    if kind == "bubble":
        try:
            a = [int(x) for x in rest.split("-")]
        except ValueError:
            raise UsageError(f"bad bubble sequence in {name!r}") from None
        return build_bubble(a, len(a) - 1, closed=True)
    raise UsageError(f"unknown group {name!r}")


def resolve_walk(name: str):
    """``(group, measure)`` for walks and profiles; ``an-N`` uses the three-cycle measure."""
    m = re.fullmatch(r"an-(\d+)", name)
    if m:
        model = AlternatingModel(int(m.group(1)))
        return model, model.measure
    pg = PiecewiseGroup(build_graph(name))
    return pg, letter_measure(pg)


# ---------------------------------------------------------------------------
# commands


def cmd_build(args) -> int:
    graph = build_graph(args.group)
    return _ball_report(graph, args)


def cmd_glue(args) -> int:
    tokens = args.components.split(",")
    if args.kind == "rooted":
        graph = build_graph("rooted-" + "-".join(tokens))
    elif len(tokens) != 1:
        raise UsageError(f"{args.kind} extension takes one base group")
    else:
        graph = build_graph(f"{args.kind}-{tokens[0]}")
    return _ball_report(graph, args)


def _ball_report(graph, args) -> int:
    ball = enumerate_ball(graph, graph.root, args.radius)
    inner = [v for v in ball.vertices if ball.distance[v] < args.radius]
    violations = validate(graph, inner)
    if args.format == "csv":
        text = pio.csv_text(["vertex", "distance"], [(vertex_str(v), ball.distance[v]) for v in ball.vertices])
    else:
        text = pio.json_text({
            "letters": list(graph.names), "degree": degree(graph), "radius": ball.radius,
            "volumes": ball.volumes, "violations": [str(v) for v in violations],
            "vertices": [vertex_to_json(v) for v in ball.vertices],
        })
    pio.emit(text, args.out)
    if args.cache:
        pio.write_cache("ball", args.cache, pio.ball_payload(ball))
    return EXIT_VALIDATION if violations else EXIT_OK


def cmd_walk(args) -> int:
    group, m = resolve_walk(args.group)
    if args.mc:
        if args.seed is None:
            raise UsageError("--mc needs --seed")
        est = monte_carlo_return(m, 2 * args.steps, args.trials, args.seed, workers=args.workers)
        text = pio.json_text({"group": args.group, "n": 2 * args.steps, "trials": est.trials,
                              "returns": est.returns, "estimate": est.estimate, "stderr": est.stderr,
                              "seed": args.seed})
    else:
        series = return_probability(m, args.steps, workers=args.workers)
        text = pio.csv_text(["n", "lower", "upper", "defect"], [(2 * n, lo, hi, d) for n, lo, hi, d in series.rows()])
    pio.emit(text, args.out)
    return EXIT_OK


def cmd_profile(args) -> int:
    group, m = resolve_walk(args.group)
    radius = args.vmax - 1 if args.radius is None else args.radius
    ball = enumerate_elements(m, radius)
    table = lambda_profile(m, ball, args.vmax, p=args.p, budget=args.budget, right=args.right)
    text = pio.csv_text(["v", "value", "exact", "witness"], table.rows())
    pio.emit(text, args.out)
    if args.cache:
        pio.write_cache("profile", args.cache, pio.profile_payload(table))
    return EXIT_OK if all(pt.exact for pt in table.points) else EXIT_BUDGET


def cmd_verify(args) -> int:
    suite = args.suite
    kwargs = {}
    if suite in SEEDED_SUITES:
        if args.seed is None:
            raise UsageError(f"suite {suite} needs --seed")
        kwargs["seed"] = args.seed
    if suite == "bubble-energy":
        kwargs["a"] = tuple(int(x) for x in args.a.split(","))
    if suite == "star-word":
        kwargs["form"] = args.form
    if suite == "star":
        kwargs["include_identity"] = args.include_identity
    result = suites.SUITES[suite](**kwargs)
    pio.emit(pio.json_text(result), args.out)
    return EXIT_OK if result["passed"] else EXIT_VALIDATION


def _params(items):
    out = {}
    for item in items or ():
        key, _, val = item.partition("=")
        if key == "a":
            out[key] = [int(x) for x in val.split(",")]
        else:
            try:
                out[key] = float(val) if "." in val else int(val)
            except ValueError:
                out[key] = val
    return out


def cmd_curves(args) -> int:
    c = curve(args.name, **_params(args.param))
    if args.fit:
        kind, payload = pio.read_cache(args.fit)
        if kind != "profile":
            raise UsageError("--fit needs a profile cache file")
        report = compare_profile_to_curve(pio.profile_from_payload(payload), c)
        pio.emit(pio.json_text(report.to_json()), args.out)
        return EXIT_OK
    xs = [float(x) for x in args.x.split(",")] if args.x else []
    if args.range:
        lo, hi, step = (float(t) for t in args.range.split(":"))
        n = int(round((hi - lo) / step))
        xs += [lo + i * step for i in range(n + 1)]
    if not xs:
        raise UsageError("give --x, --range or --fit")
    pio.emit(pio.csv_text(["x", args.name], [(x, c(x)) for x in xs]), args.out)
    return EXIT_OK


def cmd_cache(args) -> int:
    if args.action == "list":
        d = pio.cache_dir()
        rows = []
        for path in sorted(d.glob("*.cache")):
            try:
                kind, _ = pio.read_cache(path)
                rows.append((path.name, kind, "ok"))
            except (pio.CacheError, ValueError) as exc:
                rows.append((path.name, "?", str(exc)))
        pio.emit(pio.csv_text(["file", "kind", "status"], rows), args.out)
        return EXIT_OK
    if not args.path:
        raise UsageError(f"cache {args.action} needs a path")
    try:
        kind, payload = pio.read_cache(args.path)
    except pio.CacheError as exc:
        print(exc, file=sys.stderr)
        return EXIT_VALIDATION
    out = {"kind": kind, "sha256": pio.payload_hash(payload)}
    if args.action == "show":
        out["payload"] = payload
    pio.emit(pio.json_text(out), args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def make_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="piecewise", description="Random walks and isoperimetric profiles on piecewise groups.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp):
        sp.add_argument("--out", default=None, help="output file (default stdout)")
        sp.add_argument("--workers", type=int, default=1)
        return sp

    b = common(sub.add_parser("build", help="BFS ball and validation of a named graph"))
    b.add_argument("--group", required=True)
    b.add_argument("--radius", type=int, default=3)
    b.add_argument("--format", choices=["csv", "json"], default="csv")
    b.add_argument("--cache", metavar="NAME")
    b.set_defaults(func=cmd_build)

    g = common(sub.add_parser("glue", help="build a gluing and validate it"))
    g.add_argument("--kind", choices=["rooted", "pocket", "star"], required=True)
    g.add_argument("--components", required=True, help="comma-separated base tokens: z, z^2, zB")
    g.add_argument("--radius", type=int, default=3)
    g.add_argument("--format", choices=["csv", "json"], default="json")
    g.add_argument("--cache", metavar="NAME")
    g.set_defaults(func=cmd_glue)

    w = common(sub.add_parser("walk", help="return probabilities of the letter walk"))
    w.add_argument("--group", required=True)
    w.add_argument("--steps", type=int, required=True, help="number of double steps")
    w.add_argument("--mc", action="store_true", help="Monte Carlo instead of exact convolution")
    w.add_argument("--trials", type=int, default=1000)
    w.add_argument("--seed", type=int)
    w.set_defaults(func=cmd_walk)

    pr = common(sub.add_parser("profile", help="exhaustive Lambda_p table"))
    pr.add_argument("--group", required=True)
    pr.add_argument("--p", type=int, choices=[1, 2], default=2)
    pr.add_argument("--vmax", type=int, required=True)
    pr.add_argument("--radius", type=int)
    pr.add_argument("--right", action="store_true", help="right-multiplication walk")
    pr.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    pr.add_argument("--cache", metavar="NAME")
    pr.set_defaults(func=cmd_profile)

    v = common(sub.add_parser("verify", help="run a verification suite"))
    v.add_argument("--suite", choices=sorted(suites.SUITES), required=True)
    v.add_argument("--seed", type=int)
    v.add_argument("--a", default="8,16")
    v.add_argument("--form", choices=["derived", "literal"], default="derived")
    v.add_argument("--include-identity", action="store_true")
    v.set_defaults(func=cmd_verify)

    c = common(sub.add_parser("curves", help="evaluate or fit reference curves"))
    c.add_argument("--name", required=True)
    c.add_argument("--param", action="append", help="key=value, e.g. kappa=1 or a=8,16,32")
    c.add_argument("--x")
    c.add_argument("--range", help="start:stop:step")
    c.add_argument("--fit", metavar="CACHEFILE")
    c.set_defaults(func=cmd_curves)

    k = common(sub.add_parser("cache", help="inspect cache files"))
    k.add_argument("action", choices=["list", "verify", "show"])
    k.add_argument("path", nargs="?")
    k.set_defaults(func=cmd_cache)
    return p


def main(argv=None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "workers", 1) < 1:
            raise UsageError("--workers must be >= 1")
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (BudgetExceeded, WindowOverflow, MemoryError) as exc:
        print(f"budget error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (MalformedGroup, GluingError, DomainError, InsufficientPoints, pio.CacheError) as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
