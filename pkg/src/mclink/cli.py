"""Command line front end.

Runs baseline experiments and parameter sweeps, writes the results CSV,
and exposes two utilities: a controller tuning demo and an
interference-only calibration pre-run.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .config import DEFAULT_SWEEP_VALUES, SWEEP_AXES, SweepSpec, load_config
from .control import ziegler_nichols_tune
from .harness import build_runtime, emit_csv, emit_plot, estimate_noise, plan_points, run_plan

__all__ = ["main", "build_parser"]


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="mclink",
        description="Link-level simulator for flow-driven molecular communication "
                    "with an adaptive-threshold receiver.",
    )
    p.add_argument("--config", metavar="PATH", default=None,
                   help="flat key=value config file (defaults: baseline operating point)")
    p.add_argument("--sweep", metavar="AXIS", choices=SWEEP_AXES, default=None,
                   help=f"sweep one axis over its default grid ({', '.join(SWEEP_AXES)})")
    p.add_argument("--seeds", metavar="N|LIST", default=None,
                   help="seed count (integer) or explicit comma-separated seed list")
    p.add_argument("--out", metavar="CSV", default=None, help="write results CSV here")
    p.add_argument("--plot", metavar="PNG", default=None, help="write a BEP plot here")
    p.add_argument("--detector", choices=("artrx", "optimal", "both"), default=None,
                   help="which detector(s) to run (default: both)")
    p.add_argument("--workers", type=int, default=1, metavar="N",
                   help="worker processes for sweep points (default 1)")
    p.add_argument("--tune", action="store_true",
                   help="run the closed-loop gain tuning demo and exit")
    p.add_argument("--calibrate", action="store_true",
                   help="run an interference-only pre-run, print background stats, and exit")
    return p


def _parse_seed_arg(text: str) -> tuple[int, ...]:
    parts = [t.strip() for t in text.split(",") if t.strip()]
    if len(parts) == 1 and "," not in text:
        return tuple(range(int(parts[0])))
    return tuple(int(t) for t in parts)


def _threshold_plant(kp: float) -> np.ndarray:
    """Proportional-only threshold loop with one frame of actuation lag.

    The threshold integrates corrections that arrive one decision late,
    which is the delay structure the live receiver sees: an observation
    is acted on only after the frame that produced it has ended.
    """
    target = 106.0
    theta = 0.0
    u_prev = 0.0
    errors = np.empty(240, dtype=np.float64)
    for t in range(errors.size):
        e = target - theta
        errors[t] = e
        u = kp * e
        theta += u_prev
        u_prev = u
    return errors


def _run_tune(out) -> int:
    result = ziegler_nichols_tune(_threshold_plant)
    print("closed-loop tuning demo (threshold integrator, one frame of lag)", file=out)
    print(f"  converged: {result.converged}", file=out)
    if result.converged:
        print(f"  ultimate gain   ku = {result.ku:.6g}", file=out)
        print(f"  ultimate period tu = {result.tu:.6g} frames", file=out)
        g = result.gains
        print(f"  gains: kp = {g.kp:.6g}, ki = {g.ki:.6g}, kd = {g.kd:.6g}", file=out)
    else:
        print(f"  detail: {result.detail}", file=out)
    return 0 if result.converged else 1


def _run_calibrate(cfg, out) -> int:
    noise, gamma = estimate_noise(cfg)
    rt = build_runtime(cfg)
    print("interference-only pre-run (20 frames)", file=out)
    print(f"  background mean      = {noise.mu:.6g}", file=out)
    print(f"  background variance  = {noise.var:.6g}", file=out)
    print(f"  startup threshold from these estimates = {gamma:.6g}", file=out)
    print(f"  startup threshold from the neutral prior = {rt.startup_threshold:.6g}", file=out)
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    out = sys.stdout
    try:
        cfg = load_config(args.config)
        if args.seeds is not None:
            cfg = cfg.with_(seeds=_parse_seed_arg(args.seeds))
        if args.detector is not None:
            cfg = cfg.with_(detector=args.detector)
        if args.sweep is not None:
            if cfg.sweep is not None and cfg.sweep.axis == args.sweep:
                values = cfg.sweep.values
            else:
                values = tuple(DEFAULT_SWEEP_VALUES[args.sweep])
            cfg = cfg.with_(sweep=SweepSpec(args.sweep, values))
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    if args.tune:
        return _run_tune(out)
    if args.calibrate:
        return _run_calibrate(cfg, out)

    points = plan_points(cfg)
    rt0 = build_runtime(points[0][2])
    print(f"operating points: {len(points)}  seeds per point: {len(cfg.seeds)}  "
          f"frames per run: {cfg.num_symbols}", file=out)
    print(f"baseline static threshold = {rt0.static_threshold:.6g}  "
          f"startup threshold = {rt0.startup_threshold:.6g}", file=out)

    rows = run_plan(cfg, workers=max(1, args.workers))

    groups: dict[tuple[float, str], float] = {}
    for r in rows:
        groups[(r.value, r.detector)] = r.bep_group_mean
    for (value, det) in sorted(groups):
        label = f"{rows[0].axis}={value:g}" if rows[0].axis != "baseline" else "baseline"
        print(f"  {label:<24s} {det:<8s} bep = {groups[(value, det)]:.4f}", file=out)

    if args.out:
        emit_csv(rows, args.out)
        print(f"wrote {args.out}", file=out)
    if args.plot:
        emit_plot(rows, args.plot)
        print(f"wrote {args.plot}", file=out)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
