"""Experiment orchestration: baseline runs, parameter sweeps, CSV output.

A run plan is a list of operating points (one per sweep value, or a
single baseline point).  Every (point, seed) pair simulates one channel
realization and feeds the same observation sequence to each requested
detector, so detector comparisons are paired.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .analytic import (
    ChannelParams,
    GaussianStats,
    NoiseStats,
    binding_probability,
    bound_receptor_stats,
    dissociation_constant,
    initial_threshold,
    optimal_threshold,
    peak_concentration,
)
from .config import ExperimentConfig
from .control import PidState, Setpoint, schedule_gains
from .link import CskScheme, RunResult, adaptive_detect, bit_error_rate, detect, generate_bitstream, modulate
from .particle import ParticleChannel, SimClock, derive_clock

__all__ = [
    "Runtime", "ResultRow", "CSV_HEADER",
    "build_runtime", "materialize_point", "plan_points",
    "run_experiment", "run_plan", "emit_csv", "emit_plot", "estimate_noise",
]

CSV_HEADER = "axis,value,detector,seed,ber,bep_group_mean,theta_mean,theta_min,theta_max"

# Symbol period as a multiple of the nominal arrival delay x_r / u; the
# margin leaves room for the dispersed tail of each pulse.
PERIOD_OVER_DELAY = 1.5


@dataclass(frozen=True)
class Runtime:
    """Resolved per-point quantities shared by the detectors."""

    ch: ChannelParams
    clock: SimClock
    scheme: CskScheme
    stats0: GaussianStats
    stats1: GaussianStats
    static_threshold: float
    startup_threshold: float

    @property
    def symbol_period(self) -> float:
        return self.clock.symbol_period


def resolve_symbol_period(cfg: ExperimentConfig) -> float:
    if cfg.symbol_period is not None:
        return cfg.symbol_period
    return PERIOD_OVER_DELAY * cfg.x_r / cfg.u


def build_runtime(cfg: ExperimentConfig) -> Runtime:
    """Resolve derived clocks and detection thresholds for one point."""
    ch = ChannelParams(
        h_ch=cfg.h_ch, w_ch=cfg.w_ch, l_ch=cfg.l_ch, u=cfg.u, x_r=cfg.x_r,
        d0=cfg.d0, k_bind=cfg.k_bind, k_unbind=cfg.k_unbind, n_r=cfg.n_r,
        l_gr=cfg.l_gr, w_gr=cfg.w_gr, d_eff=cfg.d_eff,
    )
    period = resolve_symbol_period(cfg)
    clock = derive_clock(period, ch.diffusivity, ch.h_ch, dt=cfg.dt)
    scheme = CskScheme(n1=cfg.n1, n0=cfg.n0)
    k_d = dissociation_constant(ch)
    p1 = binding_probability(peak_concentration(cfg.n1, ch), k_d)
    p0 = binding_probability(peak_concentration(cfg.n0, ch), k_d)
    stats1 = bound_receptor_stats(cfg.n_r, p1)
    stats0 = bound_receptor_stats(cfg.n_r, p0)
    lam = optimal_threshold(stats0, stats1)
    noise = NoiseStats(mu=cfg.mu_i, var=cfg.sigma2_i)
    gamma0 = initial_threshold(cfg.n_r, p0, p1, noise)
    return Runtime(
        ch=ch, clock=clock, scheme=scheme, stats0=stats0, stats1=stats1,
        static_threshold=lam, startup_threshold=gamma0,
    )


def materialize_point(cfg: ExperimentConfig, axis: str, value: float) -> ExperimentConfig:
    """Apply one sweep value, rescheduling gains on scheduled axes."""
    if axis == "num_interferers":
        return cfg.with_(num_interferers=int(round(value)))
    if axis == "n0":
        return cfg.with_(n0=int(round(value)))
    if axis in ("u", "x_r", "d0", "k_bind"):
        gains = schedule_gains(axis, value, cfg.schedules.get(axis))
        return cfg.with_(**{axis: value, "kp": gains.kp, "ki": gains.ki, "kd": gains.kd})
    raise ValueError(f"unknown sweep axis: {axis}")


def plan_points(cfg: ExperimentConfig) -> list[tuple[str, float, ExperimentConfig]]:
    """Expand the config into (axis, value, point config) tuples."""
    if cfg.sweep is None:
        return [("baseline", 0.0, cfg)]
    return [
        (cfg.sweep.axis, v, materialize_point(cfg, cfg.sweep.axis, v))
        for v in cfg.sweep.values
    ]


def _detectors(cfg: ExperimentConfig) -> tuple[str, ...]:
    if cfg.detector == "both":
        return ("artrx", "optimal")
    return (cfg.detector,)


def run_experiment(cfg: ExperimentConfig, seed: int, runtime: Runtime | None = None) -> dict[str, RunResult]:
    """Simulate one seed at one operating point, decode with each detector."""
    rt = runtime if runtime is not None else build_runtime(cfg)
    rng = np.random.default_rng(seed)
    tx_bits = generate_bitstream(cfg.num_symbols, rng)
    channel = ParticleChannel(
        rt.ch, rt.clock, rt.scheme,
        num_interferers=cfg.num_interferers, seed=seed,
        capture_efficiency=cfg.capture_efficiency, delta_c=cfg.delta_c,
        smoothing=cfg.smoothing, near_window=cfg.near_window,
        drain_margin=cfg.drain_margin, fast_transport=cfg.fast_transport,
        interferer_mode=cfg.interferer_mode,
        interferer_start=cfg.interferer_start, interferer_end=cfg.interferer_end,
    )
    y = np.empty(cfg.num_symbols, dtype=np.float64)
    for t, bit in enumerate(tx_bits):
        y[t] = channel.run_symbol(int(bit), t)

    out: dict[str, RunResult] = {}
    for name in _detectors(cfg):
        if name == "artrx":
            state = PidState(i_min=-cfg.i_clamp, i_max=cfg.i_clamp)
            setpoint = Setpoint(rt.startup_threshold, window=cfg.setpoint_window)
            rx, trace = adaptive_detect(
                y, cfg.n_r, rt.startup_threshold, cfg.gains, setpoint, state=state,
            )
        else:
            rx = detect(y, rt.static_threshold)
            trace = np.full(cfg.num_symbols, rt.static_threshold, dtype=np.float64)
        out[name] = RunResult(
            tx_bits=tx_bits, rx_bits=rx, ber=bit_error_rate(tx_bits, rx),
            threshold_trace=trace, y_trace=y, seed=seed, detector=name,
        )
    return out


@dataclass(frozen=True)
class ResultRow:
    """One CSV row: a single (sweep value, detector, seed) outcome."""

    axis: str
    value: float
    detector: str
    seed: int
    ber: float
    bep_group_mean: float
    theta_mean: float
    theta_min: float
    theta_max: float


def _run_task(args) -> tuple[float, int, list[tuple[str, float, float, float, float]]]:
    axis, value, cfg, seed = args
    results = run_experiment(cfg, seed)
    packed = []
    for name in _detectors(cfg):
        r = results[name]
        trace = np.asarray(r.threshold_trace, dtype=np.float64)
        packed.append((name, r.ber, float(trace.mean()), float(trace.min()), float(trace.max())))
    return value, seed, packed


def run_plan(cfg: ExperimentConfig, workers: int = 1) -> list[ResultRow]:
    """Run every (point, seed) pair and aggregate group error rates."""
    points = plan_points(cfg)
    tasks = [(axis, value, point_cfg, seed)
             for axis, value, point_cfg in points
             for seed in cfg.seeds]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_run_task, tasks, chunksize=1))
    else:
        outcomes = [_run_task(t) for t in tasks]

    axis_name = points[0][0]
    partial: list[tuple[float, str, int, float, float, float, float]] = []
    for (value, seed, packed) in outcomes:
        for (det, ber, tmean, tmin, tmax) in packed:
            partial.append((value, det, seed, ber, tmean, tmin, tmax))

    group_ber: dict[tuple[float, str], list[float]] = {}
    for value, det, seed, ber, *_ in partial:
        group_ber.setdefault((value, det), []).append(ber)
    bep = {k: float(np.mean(v)) for k, v in group_ber.items()}

    rows = [
        ResultRow(
            axis=axis_name, value=value, detector=det, seed=seed, ber=ber,
            bep_group_mean=bep[(value, det)],
            theta_mean=tmean, theta_min=tmin, theta_max=tmax,
        )
        for (value, det, seed, ber, tmean, tmin, tmax) in partial
    ]
    rows.sort(key=lambda r: (r.value, r.detector, r.seed))
    return rows


def _g(x: float) -> str:
    return "%.9g" % float(x)


def format_row(r: ResultRow) -> str:
    return ",".join([
        r.axis, _g(r.value), r.detector, str(r.seed), _g(r.ber),
        _g(r.bep_group_mean), _g(r.theta_mean), _g(r.theta_min), _g(r.theta_max),
    ])


def emit_csv(rows: list[ResultRow], path: str) -> None:
    """Write rows in the fixed schema; reruns are byte-identical."""
    lines = [CSV_HEADER]
    lines.extend(format_row(r) for r in rows)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("\n".join(lines))
        fh.write("\n")


def emit_plot(rows: list[ResultRow], path: str) -> None:
    """Plot group error probability against the sweep value per detector."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    axis = rows[0].axis if rows else "value"
    series: dict[str, dict[float, float]] = {}
    for r in rows:
        series.setdefault(r.detector, {})[r.value] = r.bep_group_mean
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    floor = None
    for det in sorted(series):
        pts = sorted(series[det].items())
        xs = [p[0] for p in pts]
        ys = [p[1] for p in pts]
        positives = [y for y in ys if y > 0]
        if positives:
            floor = min(positives) / 2 if floor is None else min(floor, min(positives) / 2)
        ax.plot(xs, ys, marker="o", label=det)
    if floor is not None and floor > 0:
        ax.set_yscale("symlog", linthresh=max(floor, 1e-4))
    ax.set_xlabel(axis)
    ax.set_ylabel("bit error probability")
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def estimate_noise(cfg: ExperimentConfig, seed: int = 0, symbols: int = 20) -> tuple[NoiseStats, float]:
    """Interference-only pre-run: estimate the background observation
    statistics and the startup threshold they would imply.

    The default run pipeline keeps the neutral background prior instead;
    this estimator exists for inspection via the CLI.
    """
    rt = build_runtime(cfg)
    silent = CskScheme(n1=cfg.n1, n0=0)
    channel = ParticleChannel(
        rt.ch, rt.clock, silent,
        num_interferers=cfg.num_interferers, seed=seed,
        capture_efficiency=cfg.capture_efficiency, delta_c=cfg.delta_c,
        smoothing=cfg.smoothing, near_window=cfg.near_window,
        drain_margin=cfg.drain_margin, fast_transport=cfg.fast_transport,
        interferer_mode=cfg.interferer_mode,
        interferer_start=cfg.interferer_start, interferer_end=cfg.interferer_end,
    )
    ys = np.array([channel.run_symbol(0, t) for t in range(symbols)])
    mu = float(ys.mean())
    var = float(ys.var(ddof=1)) if symbols > 1 else 0.0
    noise = NoiseStats(mu=mu, var=max(var, 1e-12))
    k_d = dissociation_constant(rt.ch)
    p1 = binding_probability(peak_concentration(cfg.n1, rt.ch), k_d)
    p0 = binding_probability(peak_concentration(cfg.n0, rt.ch), k_d)
    gamma = initial_threshold(cfg.n_r, p0, p1, noise)
    return noise, gamma
