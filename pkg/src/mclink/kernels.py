"""Hot per-symbol simulation loop shared by both execution backends.

Everything here is written as plain loops over preallocated numpy arrays
so the same source compiles under numba or runs interpreted; random
draws use the legacy global generator, which both backends implement
identically, so results are bit-equal across backends.

Particle life cycle inside the channel:

* asleep: in ballistic transit far from the sensing region.  The
  particle's coordinates already correspond to its scheduled wake step;
  waking either chains another hop or activates it.
* free: stepped every time step with advection, diffusion, and
  reflecting side walls, and eligible to bind while inside the reaction
  cell around the sensor.
* bound: frozen at its binding position, released at a pre-drawn step.
* dead: advected past the drain cutoff and removed.

Hops are sized so that even a 7-sigma diffusion excursion cannot cross
into the stepped region before the wake step, keeping the shortcut
statistically invisible.
"""

from __future__ import annotations

import math

import numpy as np

from ._accel import njit

__all__ = [
    "FREE",
    "BOUND",
    "DEAD",
    "ASLEEP",
    "C_NACT",
    "C_FREE",
    "C_OCC",
    "C_PURGED",
    "C_INJ",
    "NEVER",
    "fold_reflect",
    "hop_steps",
    "run_symbol_kernel",
]

FREE = 0
BOUND = 1
DEAD = 2
ASLEEP = 3

# indices into the shared counters array
C_NACT = 0    # particles in the active list
C_FREE = 1    # entries on the free stack
C_OCC = 2     # occupied receptors
C_PURGED = 3  # particles drained so far
C_INJ = 4     # particles injected so far

NEVER = 1 << 62


@njit(cache=True)
def fold_reflect(v: float, lim: float) -> float:
    """Map a coordinate into [0, lim] as if reflected by both walls."""
    if 0.0 <= v <= lim:
        return v
    m = v % (2.0 * lim)
    if m < 0.0:
        m += 2.0 * lim
    if m > lim:
        m = 2.0 * lim - m
    return m


@njit(cache=True)
def hop_steps(gap: float, u: float, diff: float, dt: float) -> int:
    """Steps a particle may skip before it could reach the gap boundary.

    Solves ``u*tau + 7*sqrt(2*diff*tau) = gap`` so the advected mean plus
    a 7-sigma diffusion excursion stays short of the boundary.
    """
    if gap <= 0.0:
        return 0
    if diff <= 0.0:
        if u <= 0.0:
            return NEVER
        return int(gap / (u * dt))
    c7 = 7.0 * math.sqrt(2.0 * diff)
    if u <= 0.0:
        s = gap / c7
    else:
        s = (-c7 + math.sqrt(c7 * c7 + 4.0 * u * gap)) / (2.0 * u)
    tau = s * s
    if tau / dt > 9.2e18:
        return NEVER
    return int(tau / dt)


@njit(cache=True)
def run_symbol_kernel(
    seed,
    step0,
    n_steps,
    dt,
    u,
    diff,
    n_r,
    near_lo,
    box_xlo,
    box_xhi,
    box_ylo,
    box_yhi,
    cap_z,
    drain_x,
    w_ch,
    h_ch,
    p_coeff,
    k_unbind,
    fast_transport,
    x,
    y,
    z,
    species,
    status,
    wake_step,
    unbind_step,
    slot,
    occupant,
    empty_slots,
    active,
    free_stack,
    counters,
    inj_step,
    inj_species,
    ub_head,
    wk_head,
    nxt,
    ring,
):
    """Advance the channel by one symbol; returns the peak smoothed count.

    All state arrays persist across calls so bound and in-transit
    particles carry over between symbols.  ``inj_step`` holds this
    symbol's injection steps (ascending), ``ring`` the smoothing window.
    """
    np.random.seed(seed)
    cap = x.shape[0]
    step_end = step0 + n_steps
    for j in range(n_steps):
        ub_head[j] = -1
        wk_head[j] = -1

    # bucket carried-over release and wake events that land in this symbol
    for idx in range(cap):
        st = status[idx]
        if st == BOUND:
            ev = unbind_step[idx]
            if ev < step_end:
                j = ev - step0
                if j < 0:
                    j = 0
                nxt[idx] = ub_head[j]
                ub_head[j] = idx
        elif st == ASLEEP:
            ev = wake_step[idx]
            if ev < step_end:
                j = ev - step0
                if j < 0:
                    j = 0
                nxt[idx] = wk_head[j]
                wk_head[j] = idx

    # stage this symbol's injections as wake events at their release step
    for k in range(inj_step.shape[0]):
        top = counters[C_FREE] - 1
        idx = free_stack[top]
        counters[C_FREE] = top
        x[idx] = 0.0
        y[idx] = -1.0  # cross-section position drawn at release
        z[idx] = 0.0
        species[idx] = inj_species[k]
        status[idx] = ASLEEP
        slot[idx] = -1
        unbind_step[idx] = NEVER
        j = inj_step[k]
        wake_step[idx] = step0 + j
        nxt[idx] = wk_head[j]
        wk_head[j] = idx
        counters[C_INJ] += 1

    lnq = -k_unbind * dt
    s2d = math.sqrt(2.0 * diff * dt)
    w_ring = ring.shape[0]
    occ_f = float(counters[C_OCC])
    for i in range(w_ring):
        ring[i] = occ_f
    rsum = occ_f * w_ring
    ring_pos = 0
    y_stat = occ_f

    for j in range(n_steps):
        t_abs = step0 + j

        # scheduled receptor releases
        idx = ub_head[j]
        while idx != -1:
            follow = nxt[idx]
            if status[idx] == BOUND:
                s = slot[idx]
                occupant[s] = -1
                slot[idx] = -1
                status[idx] = FREE
                active[counters[C_NACT]] = idx
                counters[C_NACT] += 1
                counters[C_OCC] -= 1
                empty_slots[n_r - counters[C_OCC] - 1] = s
            idx = follow

        # wake-ups: chain another hop, drain, or join the stepped set
        idx = wk_head[j]
        while idx != -1:
            follow = nxt[idx]
            if status[idx] == ASLEEP:
                if y[idx] < 0.0:
                    y[idx] = np.random.random() * w_ch
                    z[idx] = np.random.random() * h_ch
                hop = 0
                if fast_transport == 1:
                    hop = hop_steps(near_lo - x[idx], u, diff, dt)
                if hop >= 2:
                    tau = hop * dt
                    sd = math.sqrt(2.0 * diff * tau)
                    x[idx] += u * tau + sd * np.random.normal(0.0, 1.0)
                    y[idx] = fold_reflect(y[idx] + sd * np.random.normal(0.0, 1.0), w_ch)
                    z[idx] = fold_reflect(z[idx] + sd * np.random.normal(0.0, 1.0), h_ch)
                    if x[idx] > drain_x:
                        status[idx] = DEAD
                        free_stack[counters[C_FREE]] = idx
                        counters[C_FREE] += 1
                        counters[C_PURGED] += 1
                    else:
                        wake_step[idx] = t_abs + hop
                        j2 = wake_step[idx] - step0
                        if j2 < n_steps:
                            nxt[idx] = wk_head[j2]
                            wk_head[j2] = idx
                else:
                    status[idx] = FREE
                    active[counters[C_NACT]] = idx
                    counters[C_NACT] += 1
            idx = follow

        # per-step capture probability from the vacancy count at step start
        n_empty0 = n_r - counters[C_OCC]
        p_bind = 0.0
        if p_coeff > 0.0 and n_empty0 > 0:
            p_bind = 1.0 - math.exp(-p_coeff * n_empty0 * dt)

        i = 0
        while i < counters[C_NACT]:
            idx = active[i]
            x[idx] += u * dt + s2d * np.random.normal(0.0, 1.0)
            y[idx] = fold_reflect(y[idx] + s2d * np.random.normal(0.0, 1.0), w_ch)
            z[idx] = fold_reflect(z[idx] + s2d * np.random.normal(0.0, 1.0), h_ch)
            if x[idx] > drain_x:
                status[idx] = DEAD
                free_stack[counters[C_FREE]] = idx
                counters[C_FREE] += 1
                counters[C_PURGED] += 1
                counters[C_NACT] -= 1
                active[i] = active[counters[C_NACT]]
                continue
            if fast_transport == 1 and x[idx] < near_lo - 2e-6:
                hop = hop_steps(near_lo - x[idx], u, diff, dt)
                if hop >= 2:
                    tau = hop * dt
                    sd = math.sqrt(2.0 * diff * tau)
                    x[idx] += u * tau + sd * np.random.normal(0.0, 1.0)
                    y[idx] = fold_reflect(y[idx] + sd * np.random.normal(0.0, 1.0), w_ch)
                    z[idx] = fold_reflect(z[idx] + sd * np.random.normal(0.0, 1.0), h_ch)
                    if x[idx] > drain_x:
                        status[idx] = DEAD
                        free_stack[counters[C_FREE]] = idx
                        counters[C_FREE] += 1
                        counters[C_PURGED] += 1
                    else:
                        status[idx] = ASLEEP
                        wake_step[idx] = t_abs + hop
                        j2 = wake_step[idx] - step0
                        if j2 < n_steps:
                            nxt[idx] = wk_head[j2]
                            wk_head[j2] = idx
                    counters[C_NACT] -= 1
                    active[i] = active[counters[C_NACT]]
                    continue
            if (
                p_bind > 0.0
                and box_xlo <= x[idx] <= box_xhi
                and box_ylo <= y[idx] <= box_yhi
                and z[idx] <= cap_z
                and np.random.random() < p_bind
            ):
                n_empty = n_r - counters[C_OCC]
                if n_empty > 0:
                    pick = np.random.randint(0, n_empty)
                    s = empty_slots[pick]
                    empty_slots[pick] = empty_slots[n_empty - 1]
                    occupant[s] = idx
                    slot[idx] = s
                    status[idx] = BOUND
                    if k_unbind > 0.0:
                        draw = np.random.random()
                        dur = int(math.ceil(math.log(1.0 - draw) / lnq))
                        if dur < 1:
                            dur = 1
                        unbind_step[idx] = t_abs + dur
                        j2 = unbind_step[idx] - step0
                        if j2 < n_steps:
                            nxt[idx] = ub_head[j2]
                            ub_head[j2] = idx
                    else:
                        unbind_step[idx] = NEVER
                    counters[C_OCC] += 1
                    counters[C_NACT] -= 1
                    active[i] = active[counters[C_NACT]]
                    continue
            i += 1

        # smoothed occupancy census; the peak is the symbol observation
        occ_f = float(counters[C_OCC])
        rsum += occ_f - ring[ring_pos]
        ring[ring_pos] = occ_f
        ring_pos += 1
        if ring_pos == w_ring:
            ring_pos = 0
        sm = rsum / w_ring
        if sm > y_stat:
            y_stat = sm

    return y_stat
