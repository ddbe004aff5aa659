"""Command line entry point: ``orthopt {run,verify,sweep}``."""
import argparse
import os
import sys

from .exceptions import OrthoptError
from .harness import CSV_HEADER, PLOT_COLUMNS, RunAborted, RunConfig, emit_csv, emit_plot, format_row, run
from .linalg import COMPLEX, REAL
from .optimizers import OrthoStepConfig

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_PROPERTY = 0, 1, 2, 3

PROBLEMS = ("pca", "procrustes", "unitary-procrustes", "chain")
METHODS = ("pogo", "landing", "slpg", "rgd", "unconstrained-adam")
LAMBDA_FLAGS = {"half": "fixed_half", "root": "find_root"}

# learning rates tuned with `sweep` on the desk-scale instances
DEFAULT_LR = {
    "pca": {"pogo": 1.4, "landing": 1.0, "slpg": 0.7, "rgd": 1.4, "unconstrained-adam": 1e-3},
    "procrustes": {"pogo": 2e-3, "landing": 1e-3, "slpg": 1.5e-3, "rgd": 2e-3, "unconstrained-adam": 1e-3},
    "unitary-procrustes": {"pogo": 6e-3, "landing": 3e-3, "slpg": 3e-3, "rgd": 6e-3, "unconstrained-adam": 1e-3},
    "chain": {"pogo": 0.01, "landing": 0.01, "slpg": 0.01, "rgd": 0.01, "unconstrained-adam": 1e-3},
}
DEFAULT_BASE = {"pca": "sgd", "procrustes": "sgd", "unitary-procrustes": "none", "chain": "vadam"}
DEFAULT_MOMENTUM = {"pca": 0.3, "procrustes": 0.1, "unitary-procrustes": 0.1, "chain": 0.9}
LANDING_MOMENTUM = 0.1


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.format_usage().strip()}\n{self.prog}: error: {message}")


def _add_run_flags(sp, multi_lr=False):
    sp.add_argument("--problem", choices=PROBLEMS, default="pca")
    sp.add_argument("--p", type=int)
    sp.add_argument("--n", type=int)
    sp.add_argument("--chain-len", type=int, default=8)
    sp.add_argument("--method", choices=METHODS, default="pogo")
    if multi_lr:
        sp.add_argument("--lr", type=float, nargs="+", required=True)
    else:
        sp.add_argument("--lr", type=float)
    sp.add_argument("--lambda-policy", choices=tuple(LAMBDA_FLAGS), default="half")
    sp.add_argument("--base", choices=("none", "sgd", "vadam"))
    sp.add_argument("--momentum", type=float)
    sp.add_argument("--landing-lambda", type=float, default=1.0)
    sp.add_argument("--max-iters", type=int, default=3000)
    sp.add_argument("--gap-tol", type=float, default=1e-6)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--field", choices=(REAL, COMPLEX), default=REAL)
    sp.add_argument("--log-every", type=int, default=1)
    sp.add_argument("--plateau-halving", action="store_true")
    sp.add_argument("--patience", type=int, default=10)


def build_parser():
    parser = _Parser(prog="orthopt", description="Orthogonality-constrained optimization benchmarks.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    rp = sub.add_parser("run", help="run one (problem, optimizer) pair")
    _add_run_flags(rp)
    rp.add_argument("--out", help="CSV path (default: stdout)")
    rp.add_argument("--plot", help="SVG path prefix; writes <prefix>_<column>.svg")

    sub.add_parser("verify", help="run the property suite")

    sw = sub.add_parser("sweep", help="grid over learning rates")
    _add_run_flags(sw, multi_lr=True)
    sw.add_argument("--seeds", type=int, nargs="+", help="seeds to run per cell (overrides --seed)")
    sw.add_argument("--out-dir", default=".", help="directory for the per-cell CSVs")
    return parser


def step_config(args, lr):
    problem = args.problem
    if args.method == "unconstrained-adam":
        method, base = "unconstrained", "adam"
    else:
        method = args.method
        base = args.base or DEFAULT_BASE[problem]
    if method in ("slpg", "rgd"):
        base = "none"
    momentum = args.momentum
    if momentum is None:
        momentum = LANDING_MOMENTUM if method == "landing" else DEFAULT_MOMENTUM[problem]
    if method == "landing" and args.base is None:
        base = "sgd"
    return OrthoStepConfig(
        method=method,
        eta=lr if lr is not None else DEFAULT_LR[problem][args.method],
        lambda_policy=LAMBDA_FLAGS[args.lambda_policy],
        landing_lambda=args.landing_lambda,
        base=base,
        momentum=momentum,
    )


def run_config(args, lr, seed, out=None, plot=None):
    field = COMPLEX if args.problem == "unitary-procrustes" else args.field
    return RunConfig(
        problem=args.problem,
        p=args.p,
        n=args.n,
        chain_len=args.chain_len,
        field=field,
        step=step_config(args, lr),
        max_iters=args.max_iters,
        gap_tol=args.gap_tol,
        log_every=args.log_every,
        seed=seed,
        out=out,
        plot=plot,
        plateau_halving=args.plateau_halving,
        patience=args.patience,
    )


def _write_csv(records, out, argv, error=None):
    if out is None:
        if argv is not None:
            print("# argv: " + " ".join(argv))
        print(CSV_HEADER)
        for r in records:
            print(format_row(r))
        if error is not None:
            print("# error: " + " ".join(str(error).split()))
    else:
        emit_csv(records, out, argv=argv, error=error)


def _plots(records, prefix):
    for col in PLOT_COLUMNS:
        if len(records) >= 2:
            emit_plot(records, f"{prefix}_{col}.svg", col)


def cmd_run(args, argv):
    config = run_config(args, args.lr, args.seed, args.out, args.plot)
    try:
        records = run(config)
    except RunAborted as exc:
        _write_csv(exc.records, config.out, argv, error=exc.message)
        print(f"numeric failure: {exc.message}", file=sys.stderr)
        return EXIT_NUMERIC
    _write_csv(records, config.out, argv)
    if config.plot:
        _plots(records, config.plot)
    last = records[-1]
    gap = "NA" if last.gap is None else f"{last.gap:.3e}"
    worst = max(r.max_distance for r in records)
    print(f"iters={last.iter} gap={gap} max_distance={worst:.3e} time_s={last.time_s:.2f}", file=sys.stderr)
    return EXIT_OK


def cmd_verify(_args):
    from .verify import all_passed, run_all

    results = run_all()
    for r in results:
        print(r.line())
    ok = all_passed(results)
    print(f"{sum(r.passed for r in results)}/{len(results)} checks passed")
    return EXIT_OK if ok else EXIT_PROPERTY


def cmd_sweep(args, argv):
    seeds = args.seeds if args.seeds else [args.seed]
    os.makedirs(args.out_dir, exist_ok=True)
    print(f"{'lr':>10} {'seed':>5} {'iters':>6} {'gap':>10} {'max_dist':>10} {'time_s':>7}  status")
    for lr in args.lr:
        for seed in seeds:
            path = os.path.join(args.out_dir, f"{args.problem}_{args.method}_lr{lr:g}_seed{seed}.csv")
            config = run_config(args, lr, seed, path)
            try:
                records = run(config)
                status, error = "ok", None
            except RunAborted as exc:
                records, status, error = exc.records, "numeric-failure", exc.message
            emit_csv(records, path, argv=argv, error=error)
            last = records[-1] if records else None
            gap = "NA" if last is None or last.gap is None else f"{last.gap:.3e}"
            dist = max((r.max_distance for r in records), default=float("nan"))
            if status == "ok" and last.gap is not None and last.gap > config.gap_tol:
                status = "not-converged"
            it = last.iter if last else 0
            t = last.time_s if last else 0.0
            print(f"{lr:>10g} {seed:>5d} {it:>6d} {gap:>10} {dist:>10.3e} {t:>7.2f}  {status}", flush=True)
    return EXIT_OK


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    try:
        if args.command == "run":
            return cmd_run(args, argv)
        if args.command == "verify":
            return cmd_verify(args)
        return cmd_sweep(args, argv)
    except ArithmeticError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, OrthoptError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
