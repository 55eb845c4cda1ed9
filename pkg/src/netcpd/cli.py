"""Command-line interface: ``netcpd simulate | detect | calibrate | bench``.

Exit codes: 0 success, 1 usage or configuration error, 2 input-data error,
3 numerical failure (non-convergence or unattainable calibration target).
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from pathlib import Path

import yaml

from . import __version__
from .detectors import DetectorConfig, detect_wbs, detect_window
from .exceptions import CalibrationError, ConfigError, ConvergenceError, FormatError, NetCPDError
from .harness import calibrate_theta, phase_sweep
from .io import (
    DETECT_COLUMNS,
    SWEEP_COLUMNS,
    build_model,
    load_config,
    read_edge_list,
    write_edge_list,
    write_table,
    write_truth,
)
from .models import ground_truth, sample_mirgram

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(f"{self.prog}: {message}")


def _workers(value):
    try:
        count = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value!r}") from None
    if count < 1:
        raise argparse.ArgumentTypeError("workers must be >= 1")
    return count


def _output_path(args, cfg):
    path = args.output or cfg.output
    if not path:
        raise ConfigError("no output path given (use --output or the 'output' key)", key="output")
    return Path(path)


def _require_seed(cfg, what):
    if cfg.seed is None:
        raise ConfigError(f"{what} needs an explicit seed", key="seed")


def _require_section(cfg, name):
    if getattr(cfg, name) is None:
        raise ConfigError("missing section", key=name)


def _with_workers(cfg: DetectorConfig, workers):
    return cfg.replace(workers=workers)


def cmd_simulate(args):
    cfg = load_config(*args.config)
    _require_seed(cfg, "simulate")
    _require_section(cfg, "model")
    out = _output_path(args, cfg)
    q = build_model(cfg.model, seed=cfg.seed)
    seq = sample_mirgram(q, cfg.seed)
    write_edge_list(out, seq)
    truth_path = Path(args.truth) if args.truth else out.with_name(out.name + ".truth.json")
    write_truth(truth_path, ground_truth(q), seed=cfg.seed, n=q.n, T=q.T)
    print(f"wrote {out} (n={q.n}, T={q.T}, K={q.K}) and {truth_path}")
    return EXIT_OK


def cmd_detect(args):
    cfg = load_config(*args.config)
    _require_section(cfg, "detector")
    if args.algorithm == "wbs":
        _require_seed(cfg, "wild binary segmentation")
    out = _output_path(args, cfg)
    try:
        seq = read_edge_list(args.input)
    except OSError as exc:
        raise FormatError(f"cannot read {args.input}: {exc.strerror}") from None
    det_cfg = _with_workers(cfg.detector, args.workers)
    started = time.perf_counter()
    report = detect_window(seq, det_cfg) if args.algorithm == "window" else detect_wbs(seq, det_cfg)
    elapsed = time.perf_counter() - started
    rows = [
        (report.algorithm, d.tau_hat, d.window, d.interval[0], d.interval[1], d.stat, d.threshold)
        for d in report.detections
    ]
    write_table(out, DETECT_COLUMNS, rows)
    cps = ",".join(str(c) for c in report.change_points) or "-"
    print(f"algorithm={report.algorithm} K_hat={report.estimated_K} change_points={cps} runtime={elapsed:.3f}s")
    return EXIT_OK


def cmd_calibrate(args):
    cfg = load_config(*args.config)
    _require_seed(cfg, "calibrate")
    _require_section(cfg, "model")
    _require_section(cfg, "detector")
    out = _output_path(args, cfg)
    algorithm = args.algorithm or cfg.harness.algorithm
    null = build_model(cfg.model, seed=cfg.seed)
    result = calibrate_theta(
        null,
        algorithm,
        cfg.detector,
        target_type_i=cfg.harness.target_type_i,
        replicates=cfg.harness.replicates,
        seed=cfg.seed,
        workers=args.workers,
    )
    fragment = {"detector": {"theta_mu": result.theta_mu}}
    header = (
        f"# calibrated {algorithm} threshold: type-I {result.type_i:.4f} "
        f"(target {result.target_type_i}) over {result.replicates} null replicates, seed {cfg.seed}\n"
    )
    out.write_text(header + yaml.safe_dump(fragment, sort_keys=True))
    print(f"theta_mu={result.theta_mu!r} type_i={result.type_i:.4f}")
    return EXIT_OK


def cmd_bench(args):
    cfg = load_config(*args.config)
    _require_seed(cfg, "bench")
    _require_section(cfg, "model")
    _require_section(cfg, "detector")
    _require_section(cfg, "sweep")
    if cfg.model.n is None or cfg.model.T is None:
        raise ConfigError("bench needs model.n and model.T", key="model")
    out = _output_path(args, cfg)
    rows = phase_sweep(
        cfg.sweep.alphas,
        cfg.sweep.rhos,
        cfg.sweep.kappas,
        cfg.model.n,
        cfg.model.T,
        args.algorithm or cfg.harness.algorithm,
        cfg.detector,
        replicates=cfg.harness.replicates,
        seed=cfg.seed,
        workers=args.workers,
        clock=time.perf_counter,
    )
    write_table(out, SWEEP_COLUMNS, [[getattr(r, c) for c in SWEEP_COLUMNS] for r in rows])
    print(f"wrote {len(rows)} rows to {out}")
    return EXIT_OK


def build_parser():
    parser = _Parser(prog="netcpd", description="Change-point detection in network sequences.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, workers=True):
        p.add_argument("--config", "-c", action="append", required=True,
                       help="YAML/JSON run configuration; repeat to merge fragments")
        p.add_argument("--output", "-o", help="output path (overrides the config's 'output')")
        if workers:
            p.add_argument("--workers", type=_workers, default=os.cpu_count() or 1,
                           help="worker threads (default: available CPUs)")

    p = sub.add_parser("simulate", help="sample a network sequence from a model")
    common(p, workers=False)
    p.add_argument("--truth", help="ground-truth sidecar path (default: <output>.truth.json)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("detect", help="detect change points in an edge-list file")
    common(p)
    p.add_argument("--input", "-i", required=True, help="edge-list file")
    p.add_argument("--algorithm", "-a", choices=("window", "wbs"), default="window")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("calibrate", help="calibrate theta_mu on the configured null model")
    common(p)
    p.add_argument("--algorithm", "-a", choices=("window", "wbs"))
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("bench", help="risk sweep over (alpha, rho, kappa)")
    common(p)
    p.add_argument("--algorithm", "-a", choices=("window", "wbs"))
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except _UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FormatError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (ConvergenceError, CalibrationError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except NetCPDError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
