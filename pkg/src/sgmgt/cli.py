"""Command-line front end.

    sgmgt sample SPEC [--seed N ...] [--out DIR] [--workers N]
    sgmgt diagnose TRACE ... [--modes] [--ks MODEL] [--hist BINS]
    sgmgt bench SUITE [--out FILE] [--seeds N ...]

Exit codes: 0 success, 1 validation or parse error, 2 chain divergence,
3 I/O error.
"""

import argparse
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np
from scipy.stats import norm

from . import bench
from .config import OutputSpec, format_experiment, parse_experiment
from .diagnostics import DegenerateInputError, blr_predict, diagnose, write_histogram
from .dynamics import run_chain
from .errors import ConfigError, DataError, TraceFormatError
from .tracefile import read_trace, write_trace

EXIT_OK, EXIT_INVALID, EXIT_DIVERGED, EXIT_IO = 0, 1, 2, 3


def _err(msg):
    print(f"sgmgt: {msg}", file=sys.stderr)


def trace_path(spec, seed):
    return Path(spec.output.directory) / f"{spec.output.prefix}_seed{seed}.csv"


def sidecar_path(trace):
    trace = Path(trace)
    return trace.with_name(trace.stem + ".meta.ini")


def _run_one(spec, seed):
    """Run and persist one seed; returns (seed, failure message or None)."""
    cfg = spec.chain_config(seed)
    tr = run_chain(spec.model.build(), cfg)
    path = trace_path(spec, seed)
    write_trace(path, tr)
    chain = {
        "seed": int(seed),
        "rows": len(tr.iters),
        "failed": tr.failed,
        "resample_p": tr.resample_p,
        "resample_xi": tr.resample_xi,
    }
    if tr.proposals:
        chain["acceptance_rate"] = tr.acceptance_rate
    if tr.failure:
        chain["failure"] = tr.failure
    one = replace(spec, seeds=(int(seed),), sampler=cfg)
    sidecar_path(path).write_text(format_experiment(one, chain))
    return seed, tr.failure


def cmd_sample(args):
    try:
        spec = parse_experiment(args.spec)
    except ConfigError as err:
        _err(err)
        return EXIT_INVALID
    if args.seed:
        spec = replace(spec, seeds=tuple(args.seed))
    if args.out:
        spec = replace(spec, output=OutputSpec(args.out, spec.output.prefix))
    workers = args.workers or spec.workers
    try:
        spec.model.build()  # surface data problems before any chain starts
        Path(spec.output.directory).mkdir(parents=True, exist_ok=True)
    except DataError as err:
        _err(err)
        return EXIT_INVALID
    except OSError as err:
        _err(f"{spec.output.directory}: {err.strerror}")
        return EXIT_IO
    try:
        if workers > 1 and len(spec.seeds) > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                results = list(pool.map(_run_one, [spec] * len(spec.seeds), spec.seeds))
        else:
            results = [_run_one(spec, s) for s in spec.seeds]
    except OSError as err:
        _err(f"cannot write trace: {err}")
        return EXIT_IO
    status = EXIT_OK
    for seed, failure in results:
        path = trace_path(spec, seed)
        if failure:
            _err(f"seed {seed}: {failure} (partial trace kept in {path})")
            status = EXIT_DIVERGED
        else:
            print(path)
    return status


def _analytic_cdf(spec):
    p = spec.model.params
    if spec.model.kind != "gaussian":
        raise ConfigError(f"--ks needs an analytic (gaussian) model, trace was produced by {spec.model.kind!r}")
    return lambda x: norm.cdf(x, loc=p["mean"][0], scale=np.sqrt(p["variance"]))


def _parse_ks(option):
    """``--ks normal:MEAN,VAR`` or ``--ks meta`` (use the sidecar model)."""
    if option == "meta":
        return None
    if option.startswith("normal"):
        mean, var = 0.0, 1.0
        if ":" in option:
            mean, var = (float(v) for v in option.split(":", 1)[1].split(","))
        return lambda x: norm.cdf(x, loc=mean, scale=np.sqrt(var))
    raise ConfigError(f"--ks: expected 'meta' or 'normal[:MEAN,VAR]', got {option!r}")


def diagnose_trace(path, ks=None, modes=False, hist=None, radius=1.0, max_lag=50):
    """Build the report for one trace file and write it next to the trace."""
    path = Path(path)
    _, samples, _ = read_trace(path)
    meta = sidecar_path(path)
    spec = parse_experiment(meta) if meta.exists() else None
    cdf = centers = scores_labels = None
    if ks is not None:
        cdf = _parse_ks(ks)
        if cdf is None:
            if spec is None:
                raise ConfigError(f"{path}: --ks meta needs the sidecar {meta.name}")
            cdf = _analytic_cdf(spec)
    if modes:
        if spec is None or spec.model.kind != "multiwell":
            raise ConfigError(f"{path}: --modes needs a multiwell sidecar")
        centers = np.asarray(spec.model.params["centers"])
    if spec is not None and spec.model.kind == "blr" and len(samples):
        x_test, y_test = spec.model.dataset().test()
        scores_labels = (blr_predict(samples, x_test), y_test)
    report = diagnose(samples, max_lag, cdf, centers, radius, scores_labels)
    stem = path.with_suffix("")
    report.write(stem)
    if hist:
        write_histogram(f"{stem}.hist.csv", samples[:, 0], hist)
    return report


def cmd_diagnose(args):
    status = EXIT_OK
    for path in args.traces:
        try:
            rep = diagnose_trace(path, args.ks, args.modes, args.hist, args.radius, args.max_lag)
        except (TraceFormatError, ConfigError, DegenerateInputError, ValueError) as err:
            _err(err)
            status = max(status, EXIT_INVALID)
            continue
        except OSError as err:
            _err(f"{path}: {err.strerror}")
            status = EXIT_IO
            continue
        print(f"== {path}")
        print("\n".join(rep.summary_lines()))
    return status


def cmd_bench(args):
    kw = {}
    if args.seeds:
        if args.suite == "multiwell":
            kw["seeds"] = args.seeds
        else:
            kw["seed"] = args.seeds[0]
    rows = bench.run_suite(args.suite, **kw)
    try:
        if args.out:
            Path(args.out).parent.mkdir(parents=True, exist_ok=True)
            bench.write_table(rows, args.out)
        else:
            bench.write_table(rows, sys.stdout)
    except OSError as err:
        _err(f"{args.out}: {err.strerror}")
        return EXIT_IO
    return EXIT_DIVERGED if any(r["failed"] for r in rows) else EXIT_OK


class _Parser(argparse.ArgumentParser):
    # argparse uses 2 for usage errors; 2 is reserved for divergence here
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def build_parser():
    ap = _Parser(prog="sgmgt", description="Stochastic-gradient monomial-gamma samplers.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("sample", help="run the chains described by an experiment file")
    s.add_argument("spec")
    s.add_argument("--seed", type=int, nargs="+", help="override the [run] seeds")
    s.add_argument("--out", help="override the output directory")
    s.add_argument("--workers", type=int, help="parallel chains (default from the file)")
    s.set_defaults(func=cmd_sample)

    d = sub.add_parser("diagnose", help="ESS/ACF/KS/modes/AUROC report for trace files")
    d.add_argument("traces", nargs="+")
    d.add_argument("--modes", action="store_true", help="count multiwell modes visited")
    d.add_argument("--ks", metavar="MODEL", help="'meta' (model from sidecar) or 'normal[:MEAN,VAR]'")
    d.add_argument("--hist", type=int, metavar="BINS", help="also write a histogram CSV")
    d.add_argument("--radius", type=float, default=1.0)
    d.add_argument("--max-lag", type=int, default=50)
    d.set_defaults(func=cmd_diagnose)

    b = sub.add_parser("bench", help="run a preregistered comparison suite")
    b.add_argument("suite", choices=bench.SUITES)
    b.add_argument("--out", help="CSV path (default stdout)")
    b.add_argument("--seeds", type=int, nargs="+")
    b.set_defaults(func=cmd_bench)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    if getattr(args, "workers", None) is not None and args.workers < 1:
        _err("--workers must be positive")
        return EXIT_INVALID
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
