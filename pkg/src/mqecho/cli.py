"""Command-line front end.

Subcommands mirror the experiment kinds plus `verify` (the CI battery of
solvable-model and identity checks) and `emit-plots` (re-render figures
from a completed output directory).  Exit codes: 0 success, 1 bad config
or I/O, 2 a numerical invariant check failed.

The thread count for the underlying BLAS is taken from MQECHO_THREADS;
it is applied before the numerical stack is imported, so it must be set
in the environment of the process, not mutated afterwards.
"""

from __future__ import annotations

import argparse
import os
import sys

SUBCOMMANDS = ("mq-spectrum", "loschmidt", "echo-sweep", "weak-irrev",
               "partial-echo", "spin-diffusion", "verify", "emit-plots")

_THREAD_VARS = ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS")


def _apply_thread_env():
    threads = os.environ.get("MQECHO_THREADS")
    if not threads:
        return
    for var in _THREAD_VARS:
        os.environ.setdefault(var, threads)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mqecho",
        description="Exact spin-1/2 cluster simulator for multiple-quantum "
                    "coherences and time-reversal echoes.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS:
        p = sub.add_parser(name)
        if name == "emit-plots":
            p.add_argument("--in-dir", required=True,
                           help="output directory of a completed run")
            continue
        p.add_argument("--config", default=None,
                       help="YAML/JSON run config (bundled default for "
                            "verify)")
        p.add_argument("--seed", type=int, default=None,
                       help="override the config seed")
        p.add_argument("--out-dir", default=None,
                       help="override output.out_dir")
        p.add_argument("--format", choices=("csv", "json"), default=None,
                       help="series file format")
        p.add_argument("--tolerance-profile", choices=("strict", "default"),
                       default=None, help="tolerance profile for the "
                                          "built-in checks")
    return parser


def _bundled_config(name: str) -> str:
    from importlib import resources

    ref = resources.files("mqecho") / "configs" / name
    if not ref.is_file():
        raise FileNotFoundError(f"bundled config {name} missing")
    return str(ref)


def _load_run_config(args):
    from .config import ConfigError, load_config_file, validate_config

    path = args.config
    if path is None:
        if args.command == "verify":
            path = _bundled_config("verify.yaml")
        else:
            raise ConfigError(f"{args.command} requires --config")
    raw = load_config_file(path)
    cfg = validate_config(raw, seed_override=args.seed,
                          out_dir_override=args.out_dir,
                          format_override=args.format,
                          profile_override=args.tolerance_profile)
    if cfg.experiment["kind"] != args.command:
        raise ConfigError(
            f"config declares experiment.kind={cfg.experiment['kind']!r} "
            f"but the subcommand is {args.command!r}")
    return cfg


def _emit_plots(in_dir: str) -> int:
    """Re-render figures for every summary JSON found in a run directory."""
    import json

    import numpy as np

    from . import reporting

    def read_csv(path):
        with open(path) as fh:
            rows = [line.rstrip("\n") for line in fh
                    if not line.startswith("#")]
        names = rows[0].split(",")
        data = np.array([[float(v) for v in r.split(",")]
                         for r in rows[1:]])
        return {name: data[:, i] for i, name in enumerate(names)}

    summaries = sorted(f for f in os.listdir(in_dir)
                       if f.endswith("_summary.json"))
    if not summaries:
        print(f"no *_summary.json found in {in_dir}", file=sys.stderr)
        return 1
    made = []
    for fname in summaries:
        with open(os.path.join(in_dir, fname)) as fh:
            summary = json.load(fh)
        kind = summary.get("effective_config", {}).get("experiment", {}) \
                      .get("kind")
        prefix = summary.get("effective_config", {}).get("output", {}) \
                        .get("prefix", kind)
        base = os.path.join(in_dir, prefix or "run")

        def have(suffix):
            path = f"{base}_{suffix}.csv"
            return path if os.path.exists(path) else None

        if kind == "mq-spectrum" and have("intensities"):
            cols = read_csv(have("intensities"))
            times = np.unique(cols["time"])
            orders = np.unique(cols["order"]).astype(int)
            matrix = cols["intensity"].reshape(times.size, orders.size).T
            made.append(reporting.figure_mq_evolution(
                f"{base}_evolution.png", times, orders, matrix))
        elif kind == "echo-sweep" and have("amplitudes"):
            cols = read_csv(have("amplitudes"))
            first_tau = cols["tau"][0]
            sel = cols["tau"] == first_tau
            made.append(reporting.figure_echo_sweep(
                f"{base}_sweep.png", cols["delta"][sel],
                cols["amplitude"][sel]))
        elif kind == "weak-irrev" and have("m2_growth"):
            cols = read_csv(have("m2_growth"))
            made.append(reporting.figure_m2_growth(
                f"{base}_m2.png", cols["tau"], cols["m2"]))
        elif kind == "partial-echo" and have("trajectory"):
            cols = read_csv(have("trajectory"))
            tau = summary.get("tau")
            made.append(reporting.figure_partial_echo(
                f"{base}_trace.png", cols["time"], cols["magnitude"],
                cols["magnitude_nopulse"], tau))
        elif kind == "spin-diffusion" and have("polarizations"):
            cols = read_csv(have("polarizations"))
            sites = [k for k in cols if k.startswith("p")]
            pol = np.vstack([cols[k] for k in sorted(sites,
                                                     key=lambda s: int(s[1:]))])
            source = summary.get("source", 0)
            made.append(reporting.figure_spin_diffusion(
                f"{base}_profile.png", cols["time"], pol, source,
                summary.get("equilibrium", 0.0)))
    for path in made:
        print(path)
    return 0


def main(argv=None) -> int:
    _apply_thread_env()
    args = _build_parser().parse_args(argv)

    if args.command == "emit-plots":
        if not os.path.isdir(args.in_dir):
            print(f"error: {args.in_dir} is not a directory", file=sys.stderr)
            return 1
        return _emit_plots(args.in_dir)

    from .config import ConfigError

    try:
        cfg = _load_run_config(args)
    except (ConfigError, FileNotFoundError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1

    from .runner import execute

    try:
        ctx, summary = execute(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1

    failed = sorted(name for name, c in ctx.checks.items() if not c["passed"])
    for name, c in sorted(ctx.checks.items()):
        status = "PASS" if c["passed"] else "FAIL"
        print(f"check {name}: {status} (value {c['value']:.3e}, "
              f"tolerance {c['tolerance']:.3e})")
    for path in ctx.files:
        print(path)
    if failed:
        print(f"invariant check failed: {', '.join(failed)}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
