"""Winding numbers and the phase diagram of the non-reciprocal chain.

Both winding routines integrate over the uniform Brillouin-zone grid of
:class:`~nhssh.lattice.MomentumGrid`; the Hermitian one counts accumulated
argument steps of the off-diagonal Bloch entry, the non-Hermitian one is the
half-difference of the windings of the two surrogate off-diagonals.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .errors import ExceptionalCoupling, GapClosed, OnCriticalLine
from .lattice import ModelParams, MomentumGrid

_GAP_FLOOR = 1e-8
_CRITICAL_TOL = 1e-6


class CriticalDeltas(NamedTuple):
    """The three |delta| phase boundaries at fixed t1.

    lower is None when |t1| < |t2| and the chain is topological already at
    delta = 0 (at |t1| = |t2| it degenerates to 0).
    """

    lower: Optional[float]
    nbbc: float
    upper: float


@dataclass(frozen=True)
class PhasePoint:
    """Classification of one (t1, delta) point."""

    t1: float
    delta: float
    label: str
    winding: float
    protected: bool


def winding_hermitian(params: ModelParams, grid: Optional[MomentumGrid] = None) -> int:
    """Integer winding of q(k) = t1 + t2 e^{ik} around the Brillouin zone.

    Accumulates the principal argument steps of q between consecutive grid
    points and divides the total by 2 pi; 1 in the topological phase
    |t1| < |t2|, 0 otherwise.  Raises GapClosed when |q| dips below 1e-8
    anywhere on the grid (|t1| = |t2|).
    """
    if grid is None:
        grid = MomentumGrid.uniform(max(params.length, 256))
    k = np.append(grid.points, grid.points[0] + 2.0 * np.pi)
    q = params.t1 + params.t2 * np.exp(1j * k)
    if np.min(np.abs(q)) < _GAP_FLOOR:
        raise GapClosed(f"|q(k)| reaches {np.min(np.abs(q)):.3e}; winding undefined")
    steps = np.angle(q[1:] / q[:-1])
    total = np.sum(steps) / (2.0 * np.pi)
    return int(np.rint(total))


def winding_surrogate_raw(
    params: ModelParams, grid: Optional[MomentumGrid] = None
) -> float:
    """Signed half-difference of the windings of the surrogate off-diagonals.

    Implements Re[(1/(4 pi i)) oint dk (b'/b - a'/a)] by the trapezoid rule
    with the analytic derivatives of a(k) = t_minus + r e^{ik} and
    b(k) = t_plus + e^{-ik}/r, r = sqrt(t_minus/t_plus).  The sign depends
    on the branch of r; phase labels use the magnitude (see
    :func:`winding_surrogate`).
    """
    if grid is None:
        grid = MomentumGrid.uniform(max(4 * params.length, 512))
    tp, tm = params.t_plus, params.t_minus
    if tp == 0 or tm == 0:
        raise ExceptionalCoupling(
            f"surrogate winding undefined at delta = +/- t1 (t_plus={tp}, t_minus={tm})"
        )
    r = np.sqrt(complex(tm) / complex(tp))
    k = np.append(grid.points, grid.points[0] + 2.0 * np.pi)
    a = tm + r * np.exp(1j * k)
    b = tp + np.exp(-1j * k) / r
    if min(np.min(np.abs(a)), np.min(np.abs(b))) < _GAP_FLOOR:
        raise GapClosed("a surrogate off-diagonal vanishes on the grid; winding undefined")
    da = 1j * r * np.exp(1j * k)
    db = -1j * np.exp(-1j * k) / r
    integrand = db / b - da / a
    total = np.trapezoid(integrand, k) / (4.0j * np.pi)
    return float(total.real)


def winding_surrogate(params: ModelParams, grid: Optional[MomentumGrid] = None) -> float:
    """Magnitude of the surrogate winding, rounded onto the half-integer lattice.

    1.0 in the topological window sqrt(t1^2 - 1) < |delta| < sqrt(t1^2 + 1)
    (t2 = 1), 0.0 outside it.
    """
    w = winding_surrogate_raw(params, grid)
    return abs(np.rint(2.0 * w) / 2.0)


def critical_deltas(t1: float, t2: float = 1.0) -> CriticalDeltas:
    """Phase-boundary values of |delta| at fixed couplings.

    lower/upper bound the topological window, sqrt(t1^2 -+ t2^2); nbbc = |t1|
    marks where the particle-hole protection of the spectrum breaks down.
    """
    lower = None
    if abs(t1) >= abs(t2):
        lower = float(np.sqrt(t1**2 - t2**2))
    return CriticalDeltas(
        lower=lower,
        nbbc=abs(float(t1)),
        upper=float(np.sqrt(t1**2 + t2**2)),
    )


def classify_phase(params: ModelParams) -> PhasePoint:
    """Label one (t1, delta) point of the phase diagram.

    Labels combine the winding (Topo/Trivial) with whether the spectrum
    keeps its particle-hole protection (|delta| < |t1|).  Points within
    1e-6 of a boundary raise OnCriticalLine rather than guessing a side.
    """
    bounds = critical_deltas(params.t1, params.t2)
    ad = abs(params.delta)
    for edge in (bounds.lower, bounds.nbbc, bounds.upper):
        if edge is not None and abs(ad - edge) < _CRITICAL_TOL:
            raise OnCriticalLine(
                f"|delta|={ad} within {_CRITICAL_TOL} of boundary {edge}"
            )
    protected = ad < bounds.nbbc
    if params.delta == 0:
        topological = abs(params.t1) < abs(params.t2)
        winding: float = float(winding_hermitian(params))
    else:
        winding = winding_surrogate(params)
        topological = winding > 0.5
    if topological:
        label = "TopoProtected" if protected else "TopoBroken"
    else:
        label = "TrivialProtected" if protected else "TrivialBroken"
    return PhasePoint(
        t1=params.t1, delta=params.delta, label=label, winding=winding, protected=protected
    )
