"""Command-line front end: ``qba <subcommand> CHANNEL_FILE [options]``.

Prints one JSON record summarizing the run and optionally streams the
per-iteration trace to CSV.  Exit status: 0 when the a-posteriori gap reached
epsilon, 2 when the iteration budget ran out, 1 on bad input.
"""

import argparse
import csv
import json
import math
import os
import sys
import time
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from . import io as channel_io
from .channels import KrausChannel, classical_channel, cq_from_channel
from .engine import Mode, SolverConfig, Termination, a_priori_iterations, solve
from .errors import QBAError
from .objectives import (
    coherent_info_objective,
    holevo_objective,
    less_noisy_check,
    mutual_info_objective,
    thermo_objective,
)
from .oracles import classical_ba

SUBCOMMANDS = ("holevo", "thermo", "coherent", "mutual", "entropy-gain", "cb-min", "classical")
TRACE_HEADER = ("t", "capacity_estimate", "posterior_gap", "gamma", "log_Z", "elapsed_ms")
MAX_ITERS_CAP = 10_000_000
EXIT_OK, EXIT_INPUT, EXIT_BUDGET = 0, 1, 2


@dataclass
class RunManifest:
    subcommand: str
    channel_path: str
    epsilon: float = 1e-6
    max_iters: Optional[int] = None
    mode: str = "standard"
    log_base: str = "nats"
    trace_path: Optional[str] = None
    seed: int = 0
    gibbs_path: Optional[str] = None
    check_samples: int = 1000
    timing: bool = True


def parse_mode(text):
    """``standard`` | ``adaptive`` | ``fixed-gamma=<g>`` -> (Mode, gamma or None)."""
    if text in ("standard", "adaptive"):
        return Mode(text), None
    if text.startswith("fixed-gamma="):
        try:
            g = float(text.split("=", 1)[1])
        except ValueError:
            g = math.nan
        if not g > 0:
            raise argparse.ArgumentTypeError(f"fixed-gamma value must be > 0, got {text!r}")
        return Mode.FIXED_GAMMA, g
    raise argparse.ArgumentTypeError(f"unknown mode {text!r}")


def _fmt(x):
    """12 significant digits; non-finite values become strings."""
    if x is None:
        return None
    x = float(x)
    if not math.isfinite(x):
        return str(x)
    return float(f"{x:.12g}")


class _TraceWriter:
    def __init__(self, path, scale, timing):
        self.fh = open(path, "w", newline="", encoding="utf-8")
        self.writer = csv.writer(self.fh, lineterminator="\n")
        self.writer.writerow(TRACE_HEADER)
        self.fh.flush()
        self.scale = scale
        self.timing = timing

    def __call__(self, t, c, gap, gamma, log_z, elapsed):
        ms = elapsed * 1e3 if self.timing else 0.0
        self.writer.writerow([t, repr(c / self.scale), repr(gap / self.scale), repr(gamma), repr(log_z), f"{ms:.3f}"])
        self.fh.flush()

    def close(self):
        self.fh.close()


def _load(manifest):
    ch = channel_io.parse_channel_file(manifest.channel_path)
    sub = manifest.subcommand
    if sub == "classical":
        if not isinstance(ch, np.ndarray):
            raise QBAError("classical needs a file with a 'stochastic' matrix")
        return ch
    if sub == "holevo":
        if isinstance(ch, np.ndarray):
            return classical_channel(ch, atol=channel_io.FILE_TOL)
        if isinstance(ch, KrausChannel):
            return cq_from_channel(ch)
        return ch
    if not isinstance(ch, KrausChannel):
        raise QBAError(f"{sub} needs a file with 'kraus' operators")
    return ch


def _build_spec(manifest, ch, extras):
    sub = manifest.subcommand
    if sub == "holevo":
        return holevo_objective(ch)
    if sub == "thermo":
        doc_path = manifest.gibbs_path or manifest.channel_path
        gibbs = channel_io.parse_gibbs(channel_io.load_document(doc_path), ch.dim_in, ch.dim_out)
        return thermo_objective(ch, gibbs)
    if sub == "entropy-gain":
        return thermo_objective(ch)
    if sub == "cb-min":
        return thermo_objective(ch.complementary)
    if sub == "coherent":
        passed, worst = less_noisy_check(ch, manifest.check_samples, manifest.seed)
        extras["less_noisy"] = passed
        extras["less_noisy_worst_margin"] = _fmt(worst)
        extras["certified"] = passed
        spec = coherent_info_objective(ch, check_samples=0)
        return spec if passed else replace(spec, certified=False)
    return mutual_info_objective(ch)


def _run_classical(manifest, q, mode, gamma, scale, writer):
    if mode is Mode.ADAPTIVE:
        raise QBAError("classical supports only standard and fixed-gamma modes")
    gamma = 1.0 if gamma is None else gamma
    n = manifest.max_iters or min(MAX_ITERS_CAP, max(1, a_priori_iterations(1.0, manifest.epsilon, q.shape[1])))
    start = time.perf_counter()

    def step(t, c, gap, log_z):
        if writer is not None:
            writer(t, c, gap, gamma, log_z, time.perf_counter() - start)

    res = classical_ba(q, epsilon=manifest.epsilon, gamma=gamma, max_iter=n, callback=step)
    elapsed = time.perf_counter() - start
    c, gap, _ = res.history[-1]
    term = Termination.POSTERIOR_GAP if res.converged else Termination.ITERATION_BUDGET
    return {
        "capacity": c,
        "iterations": len(res.history),
        "terminated_by": term,
        "posterior_gap": gap,
        "gamma_final": gamma,
        "wall_time_s": elapsed,
    }


def run(manifest, out=None):
    """Execute one manifest; returns the process exit status."""
    out = sys.stdout if out is None else out
    try:
        mode, gamma = parse_mode(manifest.mode)
    except argparse.ArgumentTypeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    if not manifest.epsilon > 0:
        print("error: epsilon must be positive", file=sys.stderr)
        return EXIT_INPUT
    if manifest.log_base not in ("nats", "bits"):
        print(f"error: unknown log base {manifest.log_base!r}", file=sys.stderr)
        return EXIT_INPUT
    scale = math.log(2) if manifest.log_base == "bits" else 1.0
    eig_tol = float(os.environ.get("QBA_EIG_TOL", "1e-12"))

    extras = {}
    writer = None
    try:
        ch = _load(manifest)
        writer = _TraceWriter(manifest.trace_path, scale, manifest.timing) if manifest.trace_path else None
        if manifest.subcommand == "classical":
            res = _run_classical(manifest, ch, mode, gamma, scale, writer)
        else:
            spec = _build_spec(manifest, ch, extras)
            n = manifest.max_iters
            if n is None:
                n = min(MAX_ITERS_CAP, max(1, a_priori_iterations(spec.gamma_default, manifest.epsilon, spec.dim_in)))
            config = SolverConfig(
                epsilon=manifest.epsilon, max_iterations=n, mode=mode, gamma=gamma, eig_tol=eig_tol
            )
            start = time.perf_counter()
            result = solve(spec, config, callback=writer)
            res = {
                "capacity": result.capacity,
                "iterations": result.iterations,
                "terminated_by": result.terminated_by,
                "posterior_gap": result.posterior_gap,
                "gamma_final": result.trace.gamma[-1] if len(result.trace) else None,
                "wall_time_s": time.perf_counter() - start,
            }
    except (QBAError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    finally:
        if writer is not None:
            writer.close()

    record = {
        "subcommand": manifest.subcommand,
        "capacity": _fmt(res["capacity"] / scale),
        "unit": manifest.log_base,
        "iterations": res["iterations"],
        "terminated_by": res["terminated_by"].value,
        "posterior_gap": _fmt(res["posterior_gap"] / scale),
        "epsilon": manifest.epsilon,
        "mode": manifest.mode,
        "gamma_final": _fmt(res["gamma_final"]),
        "wall_time_s": _fmt(res["wall_time_s"]) if manifest.timing else 0.0,
    }
    if manifest.subcommand in ("entropy-gain", "cb-min"):
        key = "entropy_gain" if manifest.subcommand == "entropy-gain" else "cb_min_conditional_entropy"
        record[key] = _fmt(-res["capacity"] / scale)
    if manifest.subcommand == "coherent" and not extras.get("certified", True):
        extras["flag"] = "NotCertified"
    record.update(extras)
    print(json.dumps(record), file=out)
    return EXIT_OK if res["terminated_by"] is Termination.POSTERIOR_GAP else EXIT_BUDGET


def build_parser():
    parser = argparse.ArgumentParser(prog="qba", description="Blahut-Arimoto quantum channel capacities")
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in SUBCOMMANDS:
        p = sub.add_parser(name)
        p.add_argument("channel_path")
        p.add_argument("--epsilon", type=float, default=1e-6)
        p.add_argument("--max-iters", type=int, default=None)
        p.add_argument("--mode", default="standard", help="standard | adaptive | fixed-gamma=<g>")
        p.add_argument("--log-base", choices=("nats", "bits"), default="nats")
        p.add_argument("--trace", dest="trace_path", default=None, help="write per-iteration CSV here")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--check-samples", type=int, default=1000)
        p.add_argument("--no-timing", dest="timing", action="store_false", help="zero all timing fields")
        if name == "thermo":
            p.add_argument("--gibbs", dest="gibbs_path", default=None)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    manifest = RunManifest(
        subcommand=args.subcommand,
        channel_path=args.channel_path,
        epsilon=args.epsilon,
        max_iters=args.max_iters,
        mode=args.mode,
        log_base=args.log_base,
        trace_path=args.trace_path,
        seed=args.seed,
        gibbs_path=getattr(args, "gibbs_path", None),
        check_samples=args.check_samples,
        timing=args.timing,
    )
    return run(manifest)


if __name__ == "__main__":
    sys.exit(main())
