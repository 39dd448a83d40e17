"""Command-line front end.

One verb per workload: `gen` (instance digest), `run` (gd/flow experiment),
`restart` (adaptive-restart comparison), `capture` (near-solution descent),
`verify` (invariant suite), `plot` (SVG from aggregate CSVs).

Exit codes: 0 success, 1 usage or config error, 2 verification failure,
3 numerical overflow in all trials.
"""

import argparse
import json
import os
import sys

from .config import ConfigError, load_config
from .experiments import instance_summary, run_capture_experiment, run_experiment
from .plot import render_plot
from .verify import run_verify_suite

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VERIFY_FAILED = 2
EXIT_ALL_OVERFLOWED = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _common(sub):
    sub.add_argument("--seed", type=int, default=None,
                     help="override the master seed")
    sub.add_argument("--out-dir", default="out", help="output directory")
    return sub


def _spec_from_args(args, require_kind=None):
    if args.config is None:
        raise ConfigError("--config is required")
    spec = load_config(args.config)
    if args.seed is not None:
        import dataclasses
        spec = dataclasses.replace(spec, master_seed=args.seed)
        if spec.restart is not None:
            spec = dataclasses.replace(
                spec, restart=dataclasses.replace(spec.restart, seed=args.seed))
    if require_kind is not None and spec.run_kind != require_kind:
        raise ConfigError(
            f"config has run_kind={spec.run_kind!r}, expected {require_kind!r}")
    return spec


def _cmd_gen(args):
    if args.config is not None:
        spec = _spec_from_args(args)
        d, m, r, seed = spec.d, spec.m, spec.rank_planted, spec.master_seed
    else:
        if args.d is None or args.m is None or args.rank is None:
            raise ConfigError("gen needs --config or all of --d/--m/--rank")
        d, m, r = args.d, args.m, args.rank
        seed = args.seed if args.seed is not None else 0
    summary = instance_summary(d, m, r, seed)
    os.makedirs(args.out_dir, exist_ok=True)
    path = os.path.join(args.out_dir, f"instance_seed{seed}.json")
    with open(path, "w") as fh:
        json.dump(summary, fh, indent=2)
        fh.write("\n")
    print(f"wrote {path}")
    print(json.dumps(summary, indent=2))
    return EXIT_OK


def _run_and_report(spec, out_dir):
    result = run_experiment(spec, out_dir=out_dir)
    for sname, sres in result.series.items():
        agg = sres.aggregate
        n_ovfl = sum(sres.overflowed)
        tail = f" ({n_ovfl} trial(s) overflowed)" if n_ovfl else ""
        print(f"{spec.name}/{sname}: final mean train {agg.final_train_mean:.6e}, "
              f"final mean test {agg.final_test_mean:.6e}{tail}")
    print(f"CSV files in {out_dir}")
    return EXIT_ALL_OVERFLOWED if result.all_overflowed else EXIT_OK


def _cmd_run(args):
    spec = _spec_from_args(args)
    return _run_and_report(spec, args.out_dir)


def _cmd_restart(args):
    spec = _spec_from_args(args, require_kind="restart")
    return _run_and_report(spec, args.out_dir)


def _cmd_capture(args):
    seed = args.seed if args.seed is not None else 0
    check, _ = run_capture_experiment(args.d, args.p, args.rank, args.m,
                                      args.perturb, seed,
                                      eta=args.eta, iters=args.iters)
    os.makedirs(args.out_dir, exist_ok=True)
    path = os.path.join(args.out_dir, f"capture_seed{seed}.json")
    with open(path, "w") as fh:
        json.dump(check.to_dict(), fh, indent=2)
        fh.write("\n")
    status = "recovered" if check.passed else "did not recover"
    print(f"capture: {status}; train {check.measured['final_train_error']:.3e}, "
          f"test {check.measured['final_test_error']:.3e} "
          f"(tolerance {check.tolerance:.3e}); wrote {path}")
    return EXIT_OK


def _cmd_verify(args):
    seed = args.seed if args.seed is not None else 0
    report = run_verify_suite(seed)
    os.makedirs(args.out_dir, exist_ok=True)
    json_path = os.path.join(args.out_dir, "verify_report.json")
    report.write_json(json_path)
    report.write_csv(os.path.join(args.out_dir, "verify_report.csv"))
    for c in report.checks:
        print(f"{'PASS' if c.passed else 'FAIL'}  {c.check_id}")
    print(f"report written to {json_path}")
    return EXIT_OK if report.passed else EXIT_VERIFY_FAILED


def _experiment_stem(csv_paths):
    """`<experiment>` part of names following `<experiment>_<series>_agg.csv`."""
    names = []
    for p in csv_paths:
        stem = os.path.splitext(os.path.basename(p))[0]
        if stem.endswith("_agg"):
            stem = stem[:-4]
        names.append(stem.rsplit("_", 1)[0] if "_" in stem else stem)
    if names and names[0] and all(n == names[0] for n in names):
        return names[0]
    return "plot"


def _cmd_plot(args):
    out = args.output
    if out is None:
        os.makedirs(args.out_dir, exist_ok=True)
        out = os.path.join(args.out_dir, f"{_experiment_stem(args.csvs)}.svg")
    render_plot(args.csvs, out, y_log=not args.linear_y, column=args.column)
    print(f"wrote {out}")
    return EXIT_OK


def build_parser():
    parser = _Parser(prog="matsense",
                     description="Matrix-sensing experiments and verification")
    subs = parser.add_subparsers(dest="command", required=True)

    sub = _common(subs.add_parser("gen", help="generate an instance digest"))
    sub.add_argument("--config", default=None)
    sub.add_argument("--d", type=int, default=None)
    sub.add_argument("--m", type=int, default=None)
    sub.add_argument("--rank", type=int, default=None)
    sub.set_defaults(func=_cmd_gen)

    sub = _common(subs.add_parser("run", help="run a configured experiment"))
    sub.add_argument("--config", required=True,
                     help="config file path or preset name")
    sub.set_defaults(func=_cmd_run)

    sub = _common(subs.add_parser("restart",
                                  help="run a restart-vs-descent comparison"))
    sub.add_argument("--config", required=True)
    sub.set_defaults(func=_cmd_restart)

    sub = _common(subs.add_parser("capture",
                                  help="descent from a perturbed factorization"))
    sub.add_argument("--d", type=int, default=30)
    sub.add_argument("--p", type=int, default=2)
    sub.add_argument("--rank", type=int, default=2)
    sub.add_argument("--m", type=int, default=240)
    sub.add_argument("--perturb", type=float, default=0.05)
    sub.add_argument("--eta", type=float, default=1e-4)
    sub.add_argument("--iters", type=int, default=200000)
    sub.set_defaults(func=_cmd_capture)

    sub = _common(subs.add_parser("verify", help="run the verification suite"))
    sub.set_defaults(func=_cmd_verify)

    sub = _common(subs.add_parser("plot", help="render aggregate CSVs to SVG"))
    sub.add_argument("csvs", nargs="+", help="aggregate CSV files")
    sub.add_argument("-o", "--output", default=None)
    sub.add_argument("--column", choices=("train", "test"), default="train")
    sub.add_argument("--linear-y", action="store_true",
                     help="linear instead of logarithmic y axis")
    sub.set_defaults(func=_cmd_plot)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
