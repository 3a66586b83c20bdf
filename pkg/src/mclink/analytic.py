"""Closed-form channel and detection quantities.

A point release of ``n_m`` molecules into a rectangular microchannel with
plug flow spreads as a 1-D Gaussian along the flow axis.  At the sensing
patch the pulse peaks when the advected center passes, and the bound
receptor count under fast ligand kinetics is binomial, approximated here
as Gaussian for threshold work.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

__all__ = [
    "ChannelParams",
    "GaussianStats",
    "NoiseStats",
    "peak_time",
    "peak_concentration",
    "dissociation_constant",
    "binding_probability",
    "bound_receptor_stats",
    "optimal_threshold",
    "initial_threshold",
    "gaussian_error_rate",
]


@dataclass(frozen=True)
class ChannelParams:
    """Geometry, transport, and receptor parameters for one link."""

    h_ch: float = 5e-6
    w_ch: float = 10e-6
    l_ch: float = 2e-4
    u: float = 1e-5
    x_r: float = 3e-3
    d0: float = 2e-11
    k_bind: float = 2e-17
    k_unbind: float = 1.0
    n_r: int = 200
    l_gr: float = 1e-6
    w_gr: float = 1e-6
    d_eff: float | None = None

    @property
    def cross_section(self) -> float:
        return self.h_ch * self.w_ch

    @property
    def diffusivity(self) -> float:
        """Dispersion coefficient used for the axial Gaussian spread."""
        return self.d0 if self.d_eff is None else self.d_eff

    def with_(self, **kwargs) -> "ChannelParams":
        return replace(self, **kwargs)


@dataclass(frozen=True)
class GaussianStats:
    mean: float
    var: float

    @property
    def std(self) -> float:
        return math.sqrt(self.var)


@dataclass(frozen=True)
class NoiseStats:
    """First and second moment of the interference-induced count shift.

    The neutral default (0, 1) makes the startup threshold depend only on
    the two signalling levels; calibration runs can estimate real values.
    """

    mu: float = 0.0
    var: float = 1.0


def peak_time(ch: ChannelParams) -> float:
    """Arrival time of the pulse center at the sensing patch."""
    return ch.x_r / ch.u


def peak_concentration(n_m: float, ch: ChannelParams, d_eff: float | None = None) -> float:
    """Peak molecule concentration at the patch for a point release.

    The release spreads axially as ``N(u t, 2 D t)`` over the channel
    cross-section; the peak is evaluated at the arrival time.
    """
    d = ch.diffusivity if d_eff is None else d_eff
    t = peak_time(ch)
    return n_m / (ch.cross_section * math.sqrt(4.0 * math.pi * d * t))


def dissociation_constant(ch: ChannelParams) -> float:
    return ch.k_unbind / ch.k_bind


def binding_probability(c_m: float, k_d: float) -> float:
    """Equilibrium occupancy fraction of one receptor at concentration c_m."""
    return c_m / (c_m + k_d)


def bound_receptor_stats(n_r: int, p: float) -> GaussianStats:
    """Gaussian approximation of the binomial bound-receptor count."""
    return GaussianStats(mean=n_r * p, var=n_r * p * (1.0 - p))


def optimal_threshold(stats0: GaussianStats, stats1: GaussianStats) -> float:
    """Count threshold minimizing the error rate between two Gaussian levels.

    Solves for the density crossing between the level means.  With equal
    variances the crossing degenerates to the midpoint, which is also the
    fallback when the quadratic loses conditioning.
    """
    m0, v0 = stats0.mean, stats0.var
    m1, v1 = stats1.mean, stats1.var
    if m0 > m1:
        m0, v0, m1, v1 = m1, v1, m0, v0
    mid = 0.5 * (m0 + m1)
    if abs(v0 - v1) <= 1e-9 * max(v0, v1):
        return mid
    a = 1.0 / v1 - 1.0 / v0
    b = -2.0 * (m1 / v1 - m0 / v0)
    c = m1 * m1 / v1 - m0 * m0 / v0 - math.log(v0 / v1)
    disc = b * b - 4.0 * a * c
    if disc < 0.0:
        return mid
    sq = math.sqrt(disc)
    roots = ((-b - sq) / (2.0 * a), (-b + sq) / (2.0 * a))
    inside = [r for r in roots if m0 <= r <= m1]
    if not inside:
        return mid
    # with two admissible roots keep the one nearest the midpoint
    return min(inside, key=lambda r: abs(r - mid))


def initial_threshold(
    n_r: int, p0: float, p1: float, noise: NoiseStats = NoiseStats()
) -> float:
    """Startup detection threshold before any feedback adaptation.

    Centered between the two expected occupancy levels, shifted by the
    normalized interference mean when calibration data is available.
    """
    return n_r * (0.5 * (p0 + p1) + noise.mu / noise.var)


def gaussian_error_rate(stats0: GaussianStats, stats1: GaussianStats, threshold: float) -> float:
    """Equal-prior error rate of a fixed count threshold between two levels."""
    z0 = (threshold - stats0.mean) / stats0.std
    z1 = (threshold - stats1.mean) / stats1.std
    p_fa = 0.5 * math.erfc(z0 / math.sqrt(2.0))
    p_md = 1.0 - 0.5 * math.erfc(z1 / math.sqrt(2.0))
    return 0.5 * (p_fa + p_md)
