"""Command-line entry point: ``symspace {verify,demo,bench,gen}``.

Exit codes: 0 success, 1 failed checks (or a demo below ``--min-accuracy``),
2 usage or input errors.
"""
from __future__ import annotations

import argparse
import os
import sys
import time
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import gi, poincare as pb, spd_pem as pem
from .data import CsvFormatError, gen_synthetic, load_csv, save_csv
from .training import TrainConfig, train_mlr
from .verify import SUITES, rand_ball, rand_spd, rand_sym, run_suite

EXIT_OK, EXIT_FAILED, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _ranged(cast, lo=None, hi=None, lo_open=False, label="value"):
    def parse(text):
        try:
            v = cast(text)
        except (TypeError, ValueError):
            raise argparse.ArgumentTypeError(f"invalid {label}: {text!r}") from None
        if lo is not None and (v <= lo if lo_open else v < lo):
            raise argparse.ArgumentTypeError(f"{label} must be {'>' if lo_open else '>='} {lo}, got {v}")
        if hi is not None and v > hi:
            raise argparse.ArgumentTypeError(f"{label} must be <= {hi}, got {v}")
        return v

    return parse


pos_int = _ranged(int, 1, label="positive integer")
nonneg_int = _ranged(int, 0, label="nonnegative integer")
pos_float = _ranged(float, 0.0, lo_open=True, label="positive number")
nonneg_float = _ranged(float, 0.0, label="nonnegative number")
fraction = _ranged(float, 0.0, 1.0, label="fraction")


def _default_seed() -> int:
    raw = os.environ.get("SYMSPACE_SEED")
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"SYMSPACE_SEED must be an integer, got {raw!r}") from None


# ---------------------------------------------------------------------------
# subcommands


def cmd_verify(args) -> int:
    report = run_suite(args.suite, seed=args.seed, trials=args.trials, workers=args.threads)
    text = report.to_json()
    summary = sys.stderr if args.report == "-" else sys.stdout
    for c in report.checks:
        err = "nan" if c.max_error is None else f"{c.max_error:.3e}"
        print(f"{'PASS' if c.passed else 'FAIL'}  {c.name:<50} trials={c.trials:<4} "
              f"max_error={err:<10} tol={c.tolerance:g}", file=summary)
    n_fail = sum(not c.passed for c in report.checks)
    print(f"{args.suite}: {len(report.checks) - n_fail}/{len(report.checks)} checks passed "
          f"in {report.elapsed_ms} ms", file=summary)
    if args.report == "-":
        sys.stdout.write(text + "\n")
    elif args.report:
        Path(args.report).write_text(text + "\n")
    return EXIT_OK if report.passed else EXIT_FAILED


def cmd_demo(args) -> int:
    if args.data:
        try:
            ds = load_csv(args.data)
        except (OSError, CsvFormatError) as exc:
            raise UsageError(str(exc)) from None
    else:
        if args.classes < 2:
            raise UsageError("--classes must be at least 2")
        ds = gen_synthetic(args.dim, args.classes, args.samples, args.sigma, args.seed)
    kinds = "ghb" if args.distance == "all" else args.distance
    config = TrainConfig(lr=args.lr, epochs=args.epochs, batch_size=args.batch_size, seed=args.seed)
    rows = []
    for kind in kinds:
        start = time.perf_counter()
        try:
            res = train_mlr(ds.x, ds.y, kind, config, n_classes=ds.n_classes)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        secs = time.perf_counter() - start
        if not args.quiet:
            for epoch, (loss, acc) in enumerate(zip(res.losses, res.accuracies), start=1):
                print(f"[{kind}] epoch {epoch:4d}  loss {loss:.6f}  acc {acc:.4f}")
        rows.append((kind, res.initial_accuracy, res.final_loss, res.final_accuracy, secs))
    print(f"{'head':<6}{'init_acc':>10}{'final_loss':>12}{'final_acc':>11}{'seconds':>9}")
    for kind, acc0, loss, acc, secs in rows:
        print(f"{kind:<6}{acc0:>10.4f}{loss:>12.6f}{acc:>11.4f}{secs:>9.2f}")
    return EXIT_OK if all(r[3] >= args.min_accuracy for r in rows) else EXIT_FAILED


def _bench_ops(dim: int, rng: np.random.Generator) -> dict[str, Callable[[], object]]:
    x, y = rand_ball(rng, dim), rand_ball(rng, dim)
    hp_b = pb.BHyperplaneBall(rng.standard_normal(dim), rand_ball(rng, dim))
    s, p = rand_spd(rng, dim), rand_spd(rng, dim)
    a = rng.standard_normal(dim)
    a /= np.linalg.norm(a)
    hp_gi = gi.GiHyperplane(a, p)
    a_sym = rand_sym(rng, dim)
    hp_pem = pem.PemHyperplane(a_sym, p)
    g = rng.standard_normal((dim, dim)) + dim * np.eye(dim)
    fc_gi = gi.FcLayerGi.random(dim, dim, rng)
    n_pairs = dim * (dim + 1) // 2
    fc_le = pem.FcLayerLe.from_logs([rand_sym(rng, dim) for _ in range(n_pairs)],
                                    [rand_sym(rng, dim) for _ in range(n_pairs)], dim)
    return {
        "mobius_add": lambda: pb.mobius_add(x, y),
        "dist_ball": lambda: pb.dist_ball(x, y),
        "b_distance_ball": lambda: pb.b_distance_ball(hp_b, x),
        "sym_eig": lambda: np.linalg.eigh(s),
        "pem_dist": lambda: pem.pem_dist(pem.LOG_EUCLIDEAN, s, p),
        "b_distance_pem": lambda: pem.b_distance_pem(pem.LOG_EUCLIDEAN, hp_pem, s),
        "gi_dist": lambda: gi.gi_dist(s, p),
        "iwasawa": lambda: gi.iwasawa_H(g),
        "busemann_gi": lambda: gi.busemann_gi(None, a, s),
        "b_distance_gi": lambda: gi.b_distance_gi(hp_gi, s),
        "fc_gi": lambda: gi.fc_layer_gi_forward(fc_gi, s),
        "fc_le": lambda: pem.fc_layer_le_forward(fc_le, s),
    }


BENCH_OPS = tuple(_bench_ops(2, np.random.default_rng(0)))


def cmd_bench(args) -> int:
    ops = _bench_ops(args.dim, np.random.default_rng(args.seed))
    names = BENCH_OPS if args.op == "all" else (args.op,)
    print(f"{'op':<18}{'dim':>5}{'iters':>8}{'median_us':>12}{'p90_us':>12}")
    for name in names:
        fn = ops[name]
        fn()  # warm-up
        times = np.empty(args.iters)
        for i in range(args.iters):
            t0 = time.perf_counter()
            fn()
            times[i] = time.perf_counter() - t0
        med, p90 = np.percentile(times, [50, 90]) * 1e6
        print(f"{name:<18}{args.dim:>5}{args.iters:>8}{med:>12.2f}{p90:>12.2f}")
    return EXIT_OK


def cmd_gen(args) -> int:
    if not args.out:
        raise UsageError("gen needs --out")
    if args.classes < 2:
        raise UsageError("--classes must be at least 2")
    ds = gen_synthetic(args.dim, args.classes, args.samples, args.sigma, args.seed)
    save_csv(ds, args.out)
    print(f"wrote {len(ds)} rows ({ds.dim} features, {ds.n_classes} classes) to {args.out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser and config file


def build_parser(seed_default: int = 0) -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="symspace",
        description="Verification suites and demos for hyperplane distances on the Poincare ball and SPD manifolds.",
    )
    parser.add_argument("--config", metavar="FILE",
                        help="key=value file supplying defaults for the subcommand's flags (flags win)")
    sub = parser.add_subparsers(dest="command", metavar="{verify,demo,bench,gen}")

    v = sub.add_parser("verify", help="run property suites and emit a JSON report")
    v.add_argument("--suite", choices=SUITES + ("all",), default="all")
    v.add_argument("--seed", type=int, default=seed_default)
    v.add_argument("--trials", type=nonneg_int, default=None, help="override every check's trial count")
    v.add_argument("--report", metavar="PATH", default=None, help="write the JSON report here ('-' for stdout)")
    v.add_argument("--threads", type=pos_int, default=1, help="maximum worker threads")
    v.set_defaults(func=cmd_verify)

    d = sub.add_parser("demo", help="desk-scale demonstrations")
    d.add_argument("demo", choices=["mlr"])
    d.add_argument("--distance", choices=["g", "h", "b", "all"], default="all")
    d.add_argument("--dim", type=pos_int, default=2)
    d.add_argument("--classes", type=pos_int, default=3)
    d.add_argument("--samples", type=pos_int, default=300)
    d.add_argument("--sigma", type=nonneg_float, default=0.1)
    d.add_argument("--epochs", type=pos_int, default=200)
    d.add_argument("--lr", type=nonneg_float, default=0.05)
    d.add_argument("--batch-size", type=pos_int, default=1024)
    d.add_argument("--seed", type=int, default=seed_default)
    d.add_argument("--data", metavar="CSV", default=None, help="train on this CSV instead of synthetic data")
    d.add_argument("--min-accuracy", type=fraction, default=0.0,
                   help="exit 1 if any head ends below this train accuracy")
    d.add_argument("--quiet", action="store_true", help="print only the final table")
    d.set_defaults(func=cmd_demo)

    b = sub.add_parser("bench", help="time core operations")
    b.add_argument("--op", choices=BENCH_OPS + ("all",), default="all")
    b.add_argument("--dim", type=_ranged(int, 2, 64, label="dimension"), default=3)
    b.add_argument("--iters", type=pos_int, default=200)
    b.add_argument("--seed", type=int, default=seed_default)
    b.set_defaults(func=cmd_bench)

    g = sub.add_parser("gen", help="write a synthetic ball dataset as CSV")
    g.add_argument("--dim", type=pos_int, default=2)
    g.add_argument("--classes", type=pos_int, default=3)
    g.add_argument("--samples", type=pos_int, default=300)
    g.add_argument("--sigma", type=nonneg_float, default=0.1)
    g.add_argument("--seed", type=int, default=seed_default)
    g.add_argument("--out", metavar="CSV", default=None, help="output path (required)")
    g.set_defaults(func=cmd_gen)
    return parser


def _subparser(parser: argparse.ArgumentParser, name: str) -> argparse.ArgumentParser:
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            return action.choices[name]
    raise KeyError(name)


def read_config(path) -> dict[str, str]:
    """Parse ``key = value`` lines; ``#`` starts a comment. Keys use flag spelling without dashes."""
    out = {}
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read config file: {exc}") from None
    for lineno, line in enumerate(lines, start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}: line {lineno}: expected key=value")
        key, value = (part.strip() for part in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def _apply_config(sub: argparse.ArgumentParser, command: str, path) -> None:
    config = read_config(path)
    actions = {a.dest: a for a in sub._actions if a.dest not in ("help", "func")}
    unknown = sorted(set(config) - set(actions))
    if unknown:
        raise UsageError(f"{path}: unknown key(s) for '{command}': {', '.join(unknown)}")
    defaults = {}
    for key, raw in config.items():
        action = actions[key]
        if isinstance(action, argparse._StoreTrueAction):
            if raw.lower() not in ("true", "false", "1", "0", "yes", "no"):
                raise UsageError(f"{path}: {key} must be a boolean")
            defaults[key] = raw.lower() in ("true", "1", "yes")
            continue
        try:
            value = action.type(raw) if action.type else raw
        except argparse.ArgumentTypeError as exc:
            raise UsageError(f"{path}: {key}: {exc}") from None
        if action.choices is not None and value not in action.choices:
            raise UsageError(f"{path}: {key} must be one of {list(action.choices)}")
        defaults[key] = value
    sub.set_defaults(**defaults)


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        seed_default = _default_seed()
        parser = build_parser(seed_default)
        if not argv:
            parser.print_usage(sys.stderr)
            return EXIT_USAGE
        try:
            args = parser.parse_args(argv)
        except SystemExit as exc:
            return EXIT_USAGE if exc.code else EXIT_OK
        if args.command is None:
            parser.print_usage(sys.stderr)
            return EXIT_USAGE
        if args.config:
            sub = _subparser(parser, args.command)
            _apply_config(sub, args.command, args.config)
            # flags given on the command line still override the config values
            args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"symspace: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
