"""Field-effect readout of the bound-receptor state.

Charged molecules held at the graphene sensing patch gate the transistor:
the bound count sets a surface potential, and the transfer curve maps that
potential to a drain current.  The link simulation works in counts; these
helpers provide the electrical view of the same state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "BioFetParams",
    "surface_potential",
    "drain_current",
    "transconductance",
]


@dataclass(frozen=True)
class BioFetParams:
    """Electrical parameters of the sensing transistor."""

    q_molecule: float = 1.602e-19  # effective gating charge per bound molecule, C
    c_area: float = 2e-2           # gate capacitance per area, F/m^2
    area: float = 1e-12            # sensing patch area, m^2
    k_curve: float = 5e-4          # transfer-curve strength, A/V^2
    v_overdrive: float = 0.2       # bias above the charge-neutrality point, V

    @property
    def capacitance(self) -> float:
        return self.c_area * self.area


def surface_potential(n_bound: float, p: BioFetParams) -> float:
    """Gate potential shift produced by ``n_bound`` charged molecules."""
    return n_bound * p.q_molecule / p.capacitance


def drain_current(p: BioFetParams, psi0: float) -> float:
    """Drain current at surface potential ``psi0``.

    Square-law transfer around the bias point; clamps at zero when the
    potential cancels the overdrive.
    """
    v = p.v_overdrive + psi0
    if v <= 0.0:
        return 0.0
    return 0.5 * p.k_curve * v * v


def transconductance(p: BioFetParams, psi0_op: float) -> float:
    """Current sensitivity to potential at the operating point."""
    v = p.v_overdrive + psi0_op
    if v <= 0.0:
        return 0.0
    return p.k_curve * v
