"""Adaptive detection-threshold control loop.

The receiver adjusts its count threshold once per symbol from the error
between the observed peak occupancy and a setpoint tracked from recent
observations.  A discrete PID law with a clamped integrator drives the
threshold; gain schedules cover operating points away from the baseline,
and a relay-style tuner recovers ultimate-gain settings from a plant
callback.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

__all__ = [
    "PidGains",
    "PidState",
    "Setpoint",
    "GainSchedule",
    "TuningResult",
    "compute_error",
    "pid_update",
    "update_threshold",
    "update_setpoint",
    "schedule_gains",
    "performance_index",
    "ziegler_nichols_tune",
    "DEFAULT_GAINS",
    "BUILTIN_SCHEDULES",
]


@dataclass(frozen=True)
class PidGains:
    kp: float = 0.18
    ki: float = 0.02
    kd: float = 0.005


DEFAULT_GAINS = PidGains()


@dataclass
class PidState:
    """Mutable controller memory carried between symbols."""

    integral: float = 0.0
    prev_error: float = 0.0
    i_min: float = -100.0
    i_max: float = 100.0


@dataclass
class Setpoint:
    """Occupancy target tracked as a moving average of observations.

    ``window=1`` makes the target follow the latest observation exactly;
    larger windows smooth it over that many recent symbols.  Before any
    observation the target is the startup ``value``.
    """

    value: float
    window: int = 1
    history: list[float] = field(default_factory=list)


def compute_error(observed: float, setpoint: Setpoint) -> float:
    return observed - setpoint.value


def pid_update(state: PidState, gains: PidGains, error: float, dt: float = 1.0) -> float:
    """One controller step; returns the threshold adjustment.

    The integrator accumulates ``error * dt`` and is clamped to the state
    bounds before use, so the output never carries wound-up history.
    """
    integral = state.integral + error * dt
    integral = min(max(integral, state.i_min), state.i_max)
    derivative = (error - state.prev_error) / dt
    state.integral = integral
    state.prev_error = error
    return gains.kp * error + gains.ki * integral + gains.kd * derivative


def update_threshold(threshold: float, adjustment: float, n_r: int) -> float:
    """Apply a controller output, keeping the threshold a valid count."""
    return min(max(threshold + adjustment, 0.0), float(n_r))


def update_setpoint(sp: Setpoint, observed: float) -> float:
    """Fold one observation into the setpoint and return the new target."""
    sp.history.append(observed)
    if len(sp.history) > sp.window:
        del sp.history[: len(sp.history) - sp.window]
    sp.value = sum(sp.history) / len(sp.history)
    return sp.value


def performance_index(errors: Sequence[float]) -> float:
    """Mean squared tracking error of a run, lower is better."""
    if len(errors) == 0:
        return 0.0
    return float(sum(e * e for e in errors)) / len(errors)


@dataclass(frozen=True)
class GainSchedule:
    """Per-axis gain lookup keyed by operating-point value."""

    axis: str
    table: Mapping[float, PidGains]

    def lookup(self, value: float) -> PidGains:
        key = min(self.table, key=lambda k: abs(k - value))
        return self.table[key]


def _flow_table() -> dict[float, PidGains]:
    g = {
        1: (0.18, 0.02, 0.005),
        2: (0.15, 0.02, 0.01),
        3: (0.15, 0.02, 0.01),
        4: (0.15, 0.02, 0.01),
        5: (0.13, 0.025, 0.015),
        6: (0.13, 0.025, 0.015),
        7: (0.13, 0.025, 0.015),
        8: (0.12, 0.03, 0.02),
        9: (0.12, 0.03, 0.02),
        10: (0.15, 0.02, 0.01),
    }
    return {k * 1e-5: PidGains(*v) for k, v in g.items()}


def _distance_table() -> dict[float, PidGains]:
    g = {
        1: (0.18, 0.02, 0.005),
        2: (0.13, 0.025, 0.01),
        3: (0.13, 0.04, 0.01),
        4: (0.13, 0.03, 0.015),
        5: (0.12, 0.045, 0.005),
        6: (0.13, 0.026, 0.01),
        7: (0.132, 0.04, 0.012),
        8: (0.13, 0.02, 0.01),
        9: (0.16, 0.02, 0.008),
        10: (0.122, 0.012, 0.006),
    }
    return {k * 1e-3: PidGains(*v) for k, v in g.items()}


def _diffusion_table() -> dict[float, PidGains]:
    g = {
        1: (0.18, 0.02, 0.006),
        2: (0.12, 0.01, 0.005),
        3: (0.12, 0.01, 0.005),
        4: (0.12, 0.01, 0.005),
        5: (0.12, 0.01, 0.005),
        6: (0.14, 0.012, 0.005),
        7: (0.12, 0.01, 0.006),
        8: (0.14, 0.011, 0.005),
        9: (0.12, 0.01, 0.005),
        10: (0.13, 0.012, 0.005),
    }
    return {k * 1e-11: PidGains(*v) for k, v in g.items()}


def _binding_table() -> dict[float, PidGains]:
    g = {
        1: (0.16, 0.01, 0.006),
        2: (0.18, 0.02, 0.006),
        3: (0.15, 0.012, 0.006),
        4: (0.16, 0.011, 0.005),
        5: (0.12, 0.01, 0.005),
        6: (0.14, 0.0115, 0.005),
        7: (0.22, 0.014, 0.006),
        8: (0.146, 0.011, 0.007),
        9: (0.16, 0.012, 0.006),
        10: (0.163, 0.011, 0.007),
    }
    return {k * 1e-17: PidGains(*v) for k, v in g.items()}


BUILTIN_SCHEDULES: dict[str, GainSchedule] = {
    "u": GainSchedule("u", _flow_table()),
    "x_r": GainSchedule("x_r", _distance_table()),
    "d0": GainSchedule("d0", _diffusion_table()),
    "k_bind": GainSchedule("k_bind", _binding_table()),
}


def schedule_gains(
    axis: str, value: float, schedule: GainSchedule | None = None
) -> PidGains:
    """Gains for an operating point, falling back to the baseline set.

    Axes without a schedule (interferer count, low release level) keep
    the baseline gains regardless of value.
    """
    if schedule is None:
        schedule = BUILTIN_SCHEDULES.get(axis)
    if schedule is None:
        return DEFAULT_GAINS
    return schedule.lookup(value)


@dataclass(frozen=True)
class TuningResult:
    ku: float
    tu: float
    gains: PidGains
    converged: bool
    detail: str = ""


def _oscillation_shape(trace: Sequence[float]) -> tuple[str, float]:
    """Classify a closed-loop error trace and estimate its period.

    Returns one of ``decaying, sustained, growing, flat`` plus the period
    in samples (``nan`` when fewer than four sign alternations exist).
    Peak magnitudes between alternations decide the class: successive
    ratios inside [0.9, 1.1] count as sustained.
    """
    eps = 1e-12 * max((abs(v) for v in trace), default=1.0)
    crossings: list[int] = []
    peaks: list[float] = []
    prev_sign = 0
    peak = 0.0
    for i, v in enumerate(trace):
        s = 0 if abs(v) <= eps else (1 if v > 0 else -1)
        if s == 0:
            continue
        if prev_sign == 0:
            prev_sign = s
        elif s != prev_sign:
            crossings.append(i)
            peaks.append(peak)
            peak = 0.0
            prev_sign = s
        peak = max(peak, abs(v))
    if len(crossings) < 4:
        return "flat", float("nan")
    spacing = (crossings[-1] - crossings[0]) / (len(crossings) - 1)
    period = 2.0 * spacing
    # drop the first half-cycles; startup shapes the early peaks
    tail = peaks[len(peaks) // 2 :]
    if len(tail) < 3:
        tail = peaks[-3:]
    ratios = [b / a for a, b in zip(tail, tail[1:]) if a > eps]
    if not ratios:
        return "flat", period
    mean_ratio = math.exp(sum(math.log(r) for r in ratios) / len(ratios))
    if mean_ratio < 0.9:
        return "decaying", period
    if mean_ratio > 1.1:
        return "growing", period
    return "sustained", period


def ziegler_nichols_tune(
    plant: Callable[[PidGains], Sequence[float]],
    kp_start: float = 1e-3,
    kp_limit: float = 1e6,
    max_bisect: int = 60,
) -> TuningResult:
    """Ultimate-gain tuning against a closed-loop plant callback.

    The plant runs one closed-loop experiment with the given gains and
    returns the error trace.  Proportional gain is swept geometrically
    until the response grows, then bisected against the last decaying
    value; the boundary gain and oscillation period give the classic
    0.6/1.2/0.075 gain set.
    """
    lo = None
    hi = None
    kp = kp_start
    period = float("nan")
    while kp <= kp_limit:
        shape, per = _oscillation_shape(plant(PidGains(kp, 0.0, 0.0)))
        if shape == "growing":
            hi = kp
            break
        if shape in ("decaying", "sustained", "flat"):
            lo = kp
        if shape == "sustained":
            period = per
        kp *= 2.0
    if hi is None:
        return TuningResult(
            float("nan"), float("nan"), PidGains(0, 0, 0), False,
            "no growing response below the gain limit",
        )
    if lo is None:
        return TuningResult(
            float("nan"), float("nan"), PidGains(0, 0, 0), False,
            "response already growing at the starting gain",
        )
    for _ in range(max_bisect):
        mid = math.sqrt(lo * hi)
        shape, per = _oscillation_shape(plant(PidGains(mid, 0.0, 0.0)))
        if shape == "growing":
            hi = mid
        else:
            lo = mid
            if shape == "sustained" and math.isfinite(per):
                period = per
        if hi / lo < 1.0 + 1e-6:
            break
    ku = 0.5 * (lo + hi)
    if not math.isfinite(period):
        _, period = _oscillation_shape(plant(PidGains(ku, 0.0, 0.0)))
    if not math.isfinite(period) or period <= 0.0:
        return TuningResult(
            ku, float("nan"), PidGains(0, 0, 0), False,
            "boundary found but no measurable oscillation period",
        )
    gains = PidGains(0.6 * ku, 1.2 * ku / period, 0.075 * ku * period)
    return TuningResult(ku, period, gains, True)
