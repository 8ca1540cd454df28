"""Command-line entry point: ``stringgp {run,benchmark,plot,gen-data}``.

Exit codes: 0 on success, 1 on a configuration error, 2 on a runtime error.
"""

import argparse
import dataclasses
import logging
import sys

from .errors import ConfigError, InvalidSpec, StringGPError
from .experiments import (ExperimentConfig, generate_data, run_benchmark, run_experiment,
                          write_benchmark, write_results)

log = logging.getLogger("stringgp")

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2


def _load(args):
    cfg = ExperimentConfig.load(args.config)
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.output is not None:
        overrides["output"] = args.output
    return dataclasses.replace(cfg, **overrides) if overrides else cfg


def _fmt(v):
    return f"{v:.4g}" if isinstance(v, float) else str(v)


def cmd_run(args):
    cfg = _load(args)
    result = run_experiment(cfg, threads=args.threads)
    write_results(result, cfg.output)
    cols = ("selection_objective", "mse", "auprc", "test_log_likelihood", "calibration_ad")
    agg = result.aggregate()
    print("method".ljust(15) + "".join(c[:14].rjust(16) for c in cols))
    for mean, se in zip(agg[::2], agg[1::2]):
        cells = [f"{_fmt(mean[c])}±{_fmt(se[c])}" for c in cols]
        print(mean["method"].ljust(15) + "".join(c.rjust(16) for c in cells))
    print(f"wrote results to {cfg.output}")


def cmd_benchmark(args):
    cfg = _load(args)
    rows = run_benchmark(cfg)
    write_benchmark(rows, cfg.output)
    for r in rows:
        print(f"n={r['n']:<6} {r['method']:<14} total={r['total']:.3f}s")
    print(f"wrote benchmark.csv to {cfg.output}")


def cmd_plot(args):
    from .plotting import plot_results

    for path in plot_results(args.directory):
        print(path)


def cmd_gen_data(args):
    cfg = _load(args)
    for path in generate_data(cfg, cfg.output):
        print(path)


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    p = argparse.ArgumentParser(prog="stringgp", description="Sparse GPs over strings.")
    sub = p.add_subparsers(dest="command", required=True)

    def with_config(name, func, help_):
        sp = sub.add_parser(name, help=help_, parents=[common])
        sp.add_argument("config", help="JSON experiment config")
        sp.add_argument("--seed", type=int, default=None, help="override the config seed")
        sp.add_argument("--output", default=None, help="override the output directory")
        sp.add_argument("--threads", type=int, default=1, help="parallel repeats")
        sp.set_defaults(func=func)
        return sp

    with_config("run", cmd_run, "run an experiment and write result CSVs")
    with_config("benchmark", cmd_benchmark, "time full vs sparse models over a size sweep")
    with_config("gen-data", cmd_gen_data, "write the generated dataset as CSV")
    sp = sub.add_parser("plot", help="render SVGs from a results directory", parents=[common])
    sp.add_argument("directory")
    sp.set_defaults(func=cmd_plot)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR,
                        format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "threads", 1) < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        args.func(args)
    except (ConfigError, InvalidSpec) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (StringGPError, ArithmeticError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
