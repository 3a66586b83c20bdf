"""Link-layer pieces: modulation, detection, and error accounting.

Bits map to release sizes (concentration-shift keying with two levels),
the receiver observes one peak occupancy value per symbol, and detection
is a threshold test with either a fixed analytic threshold or the
feedback-adapted one.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .control import PidGains, PidState, Setpoint, compute_error, pid_update, update_setpoint, update_threshold

__all__ = [
    "CskScheme",
    "RunResult",
    "generate_bitstream",
    "modulate",
    "detect",
    "adaptive_detect",
    "bit_error_rate",
    "bep",
]


@dataclass(frozen=True)
class CskScheme:
    """Two-level release scheme; both levels carry molecules."""

    n1: int = 1000
    n0: int = 600

    def release_count(self, bit: int) -> int:
        return self.n1 if bit else self.n0


@dataclass
class RunResult:
    """Outcome of one seeded link run for one detector."""

    tx_bits: np.ndarray
    rx_bits: np.ndarray
    ber: float
    threshold_trace: np.ndarray
    y_trace: np.ndarray
    seed: int
    detector: str = ""


def generate_bitstream(num_symbols: int, rng: np.random.Generator) -> np.ndarray:
    return rng.integers(0, 2, size=num_symbols, dtype=np.int64)


def modulate(bits: np.ndarray, scheme: CskScheme) -> np.ndarray:
    return np.where(np.asarray(bits) != 0, scheme.n1, scheme.n0).astype(np.int64)


def detect(y: np.ndarray, threshold: float | np.ndarray) -> np.ndarray:
    """Threshold test: a count at or above the threshold reads as 1."""
    return (np.asarray(y, dtype=float) >= threshold).astype(np.int64)


def adaptive_detect(
    y_seq: np.ndarray,
    n_r: int,
    theta0: float,
    gains: PidGains,
    setpoint: Setpoint,
    state: PidState | None = None,
    dt: float = 1.0,
) -> tuple[np.ndarray, np.ndarray]:
    """Run the feedback threshold over a sequence of observations.

    Each symbol is decided with the threshold in force before its own
    observation feeds back, so the first decision uses ``theta0``.
    Returns the decisions and the per-symbol threshold trace.
    """
    if state is None:
        state = PidState()
    y_seq = np.asarray(y_seq, dtype=float)
    n = len(y_seq)
    bits = np.empty(n, dtype=np.int64)
    trace = np.empty(n, dtype=float)
    theta = float(theta0)
    for t in range(n):
        yt = y_seq[t]
        trace[t] = theta
        bits[t] = 1 if yt >= theta else 0
        err = compute_error(yt, setpoint)
        adj = pid_update(state, gains, err, dt)
        theta = update_threshold(theta, adj, n_r)
        update_setpoint(setpoint, yt)
    return bits, trace


def bit_error_rate(tx_bits: np.ndarray, rx_bits: np.ndarray) -> float:
    tx = np.asarray(tx_bits)
    rx = np.asarray(rx_bits)
    if tx.shape != rx.shape:
        raise ValueError("bit arrays differ in length")
    if tx.size == 0:
        return 0.0
    return float(np.mean(tx != rx))


def bep(bers) -> float:
    """Error probability for a group of runs: the mean of their BERs."""
    arr = np.asarray(list(bers), dtype=float)
    if arr.size == 0:
        return 0.0
    return float(arr.mean())
