"""Particle-channel driver: arena state, injection schedules, clocking.

Owns the persistent arrays the kernel works on, builds each symbol's
injection schedule, and enforces the particle-count invariant after
every kernel call.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .analytic import ChannelParams
from .kernels import (
    ASLEEP,
    BOUND,
    C_FREE,
    C_INJ,
    C_NACT,
    C_OCC,
    C_PURGED,
    DEAD,
    FREE,
    NEVER,
    run_symbol_kernel,
)
from .link import CskScheme

__all__ = ["SimClock", "derive_clock", "Arena", "Particle", "ReceptorArray", "ParticleChannel"]


@dataclass(frozen=True)
class SimClock:
    dt: float
    n_steps: int
    symbol_period: float


def derive_clock(symbol_period: float, diffusivity: float, h_ch: float, dt: float | None = None) -> SimClock:
    """Pick a step size resolving both the symbol and wall-mixing scales.

    The derived step is an exact divisor of the symbol period; explicit
    steps must divide it evenly.
    """
    if symbol_period <= 0.0:
        raise ValueError("symbol period must be positive")
    if dt is None:
        lim = symbol_period
        if diffusivity > 0.0:
            lim = min(lim, h_ch * h_ch / (2.0 * diffusivity))
        dt_raw = min(0.05 * lim, 0.1)
        n_steps = math.ceil(symbol_period / dt_raw)
        return SimClock(dt=symbol_period / n_steps, n_steps=n_steps, symbol_period=symbol_period)
    n_steps = round(symbol_period / dt)
    if n_steps < 1 or abs(n_steps * dt - symbol_period) > 1e-9 * symbol_period:
        raise ValueError("dt must divide the symbol period evenly")
    return SimClock(dt=dt, n_steps=n_steps, symbol_period=symbol_period)


@dataclass
class Arena:
    """Preallocated particle state shared with the kernel."""

    cap: int
    x: np.ndarray
    y: np.ndarray
    z: np.ndarray
    species: np.ndarray
    status: np.ndarray
    wake_step: np.ndarray
    unbind_step: np.ndarray
    slot: np.ndarray
    occupant: np.ndarray
    empty_slots: np.ndarray
    active: np.ndarray
    free_stack: np.ndarray
    counters: np.ndarray
    nxt: np.ndarray

    @classmethod
    def allocate(cls, cap: int, n_r: int) -> "Arena":
        arena = cls(
            cap=cap,
            x=np.zeros(cap),
            y=np.zeros(cap),
            z=np.zeros(cap),
            species=np.zeros(cap, dtype=np.int8),
            status=np.full(cap, DEAD, dtype=np.int8),
            wake_step=np.zeros(cap, dtype=np.int64),
            unbind_step=np.full(cap, NEVER, dtype=np.int64),
            slot=np.full(cap, -1, dtype=np.int64),
            occupant=np.full(n_r, -1, dtype=np.int64),
            empty_slots=np.arange(n_r, dtype=np.int64),
            active=np.zeros(cap, dtype=np.int64),
            free_stack=np.arange(cap - 1, -1, -1, dtype=np.int64),
            counters=np.zeros(8, dtype=np.int64),
            nxt=np.full(cap, -1, dtype=np.int64),
        )
        arena.counters[C_FREE] = cap
        return arena


@dataclass(frozen=True)
class Particle:
    """Read-only snapshot of one particle."""

    x: float
    y: float
    z: float
    species: int
    status: int


class ReceptorArray:
    """View of the receptor patch occupancy."""

    def __init__(self, occupant: np.ndarray):
        self._occupant = occupant

    @property
    def n_r(self) -> int:
        return len(self._occupant)

    @property
    def occupied(self) -> int:
        return int(np.count_nonzero(self._occupant >= 0))

    def holder(self, slot: int) -> int:
        return int(self._occupant[slot])


class ParticleChannel:
    """Stateful link channel advanced one symbol at a time.

    Each symbol releases the modulated molecule count at the inlet plus
    the configured interferers, advances the kernel, and returns the
    symbol's peak smoothed occupancy.

    Binding uses a well-mixed reaction cell around the sensor: over the
    cell's transit time, transverse diffusion mixes the full channel
    cross-section (the mixing length exceeds both channel height and
    width), so any free molecule inside the cell may claim an empty
    receptor at the bimolecular rate referred to the cell volume.  The
    equilibrium this produces is the standard occupancy law and does not
    depend on the cell size; ``capture_efficiency`` trims second-order
    kinetic losses such as washout of unbound ligand at the cell edges.
    """

    IM = 0
    INTERFERER = 1

    def __init__(
        self,
        ch: ChannelParams,
        clock: SimClock,
        scheme: CskScheme,
        *,
        num_interferers: int = 0,
        seed: int = 0,
        capture_efficiency: float = 1.0,
        delta_c: float | None = None,
        smoothing: int = 1,
        near_window: float = 1e-5,
        drain_margin: float = 2e-5,
        fast_transport: bool = True,
        interferer_mode: str = "trickle",
        interferer_start: float = 0.0,
        interferer_end: float = 0.13,
    ):
        if smoothing < 1:
            raise ValueError("smoothing window must be at least 1 step")
        if interferer_mode not in ("trickle", "pulse"):
            raise ValueError(f"unknown interferer mode: {interferer_mode}")
        if not 0.0 <= interferer_start <= interferer_end <= 1.0:
            raise ValueError("interferer window must satisfy 0 <= start <= end <= 1")
        self.ch = ch
        self.clock = clock
        self.scheme = scheme
        self.num_interferers = int(num_interferers)
        self.seed = int(seed)
        self.fast_transport = bool(fast_transport)
        self.interferer_mode = interferer_mode
        self.interferer_start = float(interferer_start)
        self.interferer_end = float(interferer_end)

        self.patch_xlo = ch.x_r - 0.5 * ch.l_gr
        self.patch_xhi = ch.x_r + 0.5 * ch.l_gr
        self.cap_z = ch.h_ch if delta_c is None else float(delta_c)
        self.near_lo = max(self.patch_xlo - near_window, 0.0)
        self.drain_x = self.patch_xhi + drain_margin
        # reaction cell: the stepped region around the sensor, full width
        self.cell_xlo = self.near_lo
        self.cell_xhi = self.drain_x
        cell_volume = (self.cell_xhi - self.cell_xlo) * ch.w_ch * self.cap_z
        # capture rate per empty receptor per second for one in-cell molecule
        self.p_coeff = capture_efficiency * ch.k_bind / cell_volume
        self.smoothing = int(smoothing)

        cap = 3 * (scheme.n1 + self.num_interferers) + ch.n_r + 1024
        self.arena = Arena.allocate(cap, ch.n_r)
        self._ub_head = np.full(clock.n_steps, -1, dtype=np.int64)
        self._wk_head = np.full(clock.n_steps, -1, dtype=np.int64)
        self._ring = np.zeros(self.smoothing)
        self._step0 = 0

    def _injection_schedule(self, n_im: int) -> tuple[np.ndarray, np.ndarray]:
        steps = [0] * n_im
        kinds = [self.IM] * n_im
        n_i = self.num_interferers
        if n_i > 0:
            s0 = int(self.interferer_start * self.clock.n_steps)
            s1 = int(self.interferer_end * self.clock.n_steps)
            if self.interferer_mode == "pulse":
                steps += [s0] * n_i
                kinds += [self.INTERFERER] * n_i
            else:
                width = max(s1 - s0, 1)
                for jj in range(width):
                    count = (jj + 1) * n_i // width - jj * n_i // width
                    if count:
                        steps += [s0 + jj] * count
                        kinds += [self.INTERFERER] * count
        order = np.argsort(np.asarray(steps, dtype=np.int64), kind="stable")
        return (
            np.asarray(steps, dtype=np.int64)[order],
            np.asarray(kinds, dtype=np.int8)[order],
        )

    def run_symbol(self, bit: int, symbol_index: int) -> float:
        """Release one symbol, advance the channel, return the observation."""
        inj_step, inj_species = self._injection_schedule(self.scheme.release_count(bit))
        if self.arena.counters[C_FREE] < len(inj_step):
            raise RuntimeError(
                "particle arena exhausted; particles are not draining "
                "(zero flow with fast transport enabled?)"
            )
        seed32 = int(np.random.SeedSequence((self.seed, symbol_index)).generate_state(1)[0])
        a = self.arena
        y_stat = run_symbol_kernel(
            seed32,
            self._step0,
            self.clock.n_steps,
            self.clock.dt,
            self.ch.u,
            self.ch.diffusivity,
            self.ch.n_r,
            self.near_lo,
            self.cell_xlo,
            self.cell_xhi,
            0.0,
            self.ch.w_ch,
            self.cap_z,
            self.drain_x,
            self.ch.w_ch,
            self.ch.h_ch,
            self.p_coeff,
            self.ch.k_unbind,
            1 if self.fast_transport else 0,
            a.x,
            a.y,
            a.z,
            a.species,
            a.status,
            a.wake_step,
            a.unbind_step,
            a.slot,
            a.occupant,
            a.empty_slots,
            a.active,
            a.free_stack,
            a.counters,
            inj_step,
            inj_species,
            self._ub_head,
            self._wk_head,
            a.nxt,
            self._ring,
        )
        self._step0 += self.clock.n_steps
        c = a.counters
        asleep = int(np.count_nonzero(a.status == ASLEEP))
        assert c[C_INJ] == c[C_PURGED] + c[C_NACT] + c[C_OCC] + asleep, "particle count broken"
        assert c[C_OCC] == np.count_nonzero(a.occupant >= 0), "receptor ledger broken"
        return float(y_stat)

    def particle(self, idx: int) -> Particle:
        a = self.arena
        return Particle(
            float(a.x[idx]), float(a.y[idx]), float(a.z[idx]),
            int(a.species[idx]), int(a.status[idx]),
        )

    @property
    def receptors(self) -> ReceptorArray:
        return ReceptorArray(self.arena.occupant)

    @property
    def occupancy(self) -> int:
        return int(self.arena.counters[C_OCC])
