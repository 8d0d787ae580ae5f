"""Biorthogonal correlation matrices and entanglement entropy of chain ground states.

The many-body ground state fills every single-particle level below the
chemical potential with biorthogonal left/right pairs, giving the oblique
projector C = sum_occ r_n l_n^dag.  Its restriction to a block of sites
yields the correlation spectrum {xi}; the entanglement entropy is the usual
binary-entropy sum over that spectrum, evaluated with principal logarithms
when the xi are complex.

Open non-reciprocal chains are handled in the symmetrizing gauge (see
:mod:`nhssh.lattice`): the gauge is a diagonal similarity, so restrictions
to site blocks commute with it and the correlation spectrum of any block is
exactly gauge-invariant, while the raw-matrix route loses all digits to
eigenbasis conditioning well below the lengths of interest.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .eig import EigSystem, eig_general, occupied_indices
from .errors import ComplexLeakage, InsufficientSizes
from .lattice import Boundary, ModelParams, build_realspace, gauged_obc_matrix

_XI_TRIVIAL = 1e-12
_CLAMP_TOL = 1e-8
_IMAG_REAL_TOL = 1e-10
_EE_LEAKAGE_TOL = 1e-6


def correlation_matrix(system: EigSystem, occupied: np.ndarray) -> np.ndarray:
    """Oblique ground-state projector C = sum over occupied of r_n l_n^dag."""
    r = system.right_vectors[:, occupied]
    l = system.left_vectors[:, occupied]
    return r @ l.conj().T


def cut_sites(length: int, cut: str = "half") -> np.ndarray:
    """Site indices of the entanglement block for a 2L-site chain.

    "half" keeps the first L sites (one entangling point at the middle of
    an open chain); "centered" keeps L sites symmetrically about the middle
    (two entangling points, both in the bulk).
    """
    if cut == "half":
        return np.arange(length)
    if cut == "centered":
        start = length // 2
        return np.arange(start, start + length)
    raise ValueError(f"cut must be 'half' or 'centered', got {cut!r}")


def subsystem_spectrum(corr: np.ndarray, sites: Sequence[int]) -> np.ndarray:
    """Eigenvalues of the block of C on the given sites, sorted by (Re, Im)."""
    block = corr[np.ix_(sites, sites)]
    xi = np.linalg.eigvals(block)
    return xi[np.lexsort((xi.imag, xi.real))]


def entanglement_entropy(xi: np.ndarray) -> float:
    """Binary-entropy sum -sum [xi ln xi + (1-xi) ln(1-xi)] over the block spectrum.

    Values within 1e-12 of 0 or 1 contribute nothing.  Real values that
    overshoot [0, 1] by no more than 1e-8 (roundoff from the block
    diagonalization) are clamped; genuinely complex values are kept and fed
    to principal logarithms, which is where a non-normal chain's negative
    block eigenvalues carry their physics.  Raises ComplexLeakage when the
    total keeps an imaginary residue above 1e-6 relative tolerance.
    """
    xi = np.asarray(xi, dtype=complex).ravel()
    keep = (np.abs(xi) > _XI_TRIVIAL) & (np.abs(xi - 1.0) > _XI_TRIVIAL)
    xi = xi[keep]
    if len(xi) == 0:
        return 0.0
    nearly_real = np.abs(xi.imag) < _IMAG_REAL_TOL
    clampable = nearly_real & (
        ((xi.real < 0) & (xi.real > -_CLAMP_TOL))
        | ((xi.real > 1) & (xi.real < 1 + _CLAMP_TOL))
    )
    xi = np.where(clampable, np.clip(xi.real, 0.0, 1.0) + 0j, xi)
    keep = (np.abs(xi) > _XI_TRIVIAL) & (np.abs(xi - 1.0) > _XI_TRIVIAL)
    xi = xi[keep]
    total = -np.sum(xi * np.log(xi) + (1.0 - xi) * np.log(1.0 - xi))
    if abs(total.imag) > _EE_LEAKAGE_TOL * (abs(total.real) + 1.0):
        raise ComplexLeakage(
            f"entanglement entropy keeps imaginary residue {total.imag:.3e} "
            f"(real part {total.real:.3e})"
        )
    return float(total.real)


@dataclass(frozen=True)
class EntanglementResult:
    """Correlation spectrum and entropy of one block of one ground state."""

    xi: np.ndarray
    entropy: float
    n_occupied: int
    sites: np.ndarray


def _balanced_zero_pair(system: EigSystem, zeros: np.ndarray) -> np.ndarray:
    """Rank-1 contribution of one occupied state from an exact zero-mode pair.

    Numerically degenerate zero modes come back from the solver in an
    arbitrary basis of their 2d subspace, which would make the correlation
    matrix depend on solver luck.  The subspace is spanned by one state per
    sublattice polarization (the chiral operator maps it to itself), so the
    physical tunneling-split ground state is their balanced combination.
    This rotates the pair into the polarized basis and occupies the
    equal-weight mix, restoring determinism and the half-half sharing of
    the edge modes across any cut.
    """
    rz = system.right_vectors[:, zeros]
    lz = system.left_vectors[:, zeros]
    n = rz.shape[0]
    chiral = np.where(np.arange(n) % 2 == 0, 1.0, -1.0)
    k = lz.conj().T @ (chiral[:, None] * rz)
    lam, t = np.linalg.eig(k)
    order = np.argsort(-lam.real)
    t = t[:, order]
    z = rz @ t
    w = lz @ np.linalg.inv(t).conj().T
    psi = (z[:, 0] + z[:, 1]) / np.sqrt(2.0)
    phi = (w[:, 0] + w[:, 1]) / np.sqrt(2.0)
    norm = phi.conj() @ psi
    return np.outer(psi, phi.conj()) / norm


def _result_from_matrix(
    h: np.ndarray, length: int, mu: float, cut: str
) -> EntanglementResult:
    system = eig_general(h)
    occ = occupied_indices(system, mu)
    zero_tol = 1e-8 * max(system.h_norm, 1.0)
    zeros = np.nonzero(np.abs(system.eigenvalues) < zero_tol)[0]
    if len(zeros) == 2 and abs(mu) < 1e-10:
        rest = np.array([i for i in occ if i not in set(zeros)], dtype=int)
        corr = correlation_matrix(system, rest) + _balanced_zero_pair(system, zeros)
    else:
        corr = correlation_matrix(system, occ)
    sites = cut_sites(length, cut)
    xi = subsystem_spectrum(corr, sites)
    return EntanglementResult(
        xi=xi,
        entropy=entanglement_entropy(xi),
        n_occupied=len(occ),
        sites=sites,
    )


def entanglement_result(params: ModelParams, cut: str = "half") -> EntanglementResult:
    """Block correlation spectrum and entropy of the open chain's ground state.

    Non-reciprocal chains are diagonalized in the symmetrizing gauge; the
    block spectrum (hence the entropy) is exactly what the raw biorthogonal
    construction would give, minus the catastrophic conditioning.
    """
    if params.is_hermitian:
        h = build_realspace(
            ModelParams(
                t1=params.t1, length=params.length, t2=params.t2,
                delta=0.0, boundary=Boundary.OBC, mu=params.mu,
            )
        ).entries
    else:
        h = gauged_obc_matrix(params)
    return _result_from_matrix(h, params.length, params.mu, cut)


def direct_entanglement_result(params: ModelParams, cut: str = "half") -> EntanglementResult:
    """Same as :func:`entanglement_result` but from the raw open-chain matrix.

    Only viable at small lengths where the skin-effect eigenbasis is still
    well-conditioned; kept as an independent cross-check of the gauge route.
    """
    h = build_realspace(
        ModelParams(
            t1=params.t1, length=params.length, t2=params.t2,
            delta=params.delta, boundary=Boundary.OBC, mu=params.mu,
        )
    ).entries
    return _result_from_matrix(h, params.length, params.mu, cut)


def ee_vs_delta(
    params: ModelParams, deltas: np.ndarray, cut: str = "half"
) -> np.ndarray:
    """Ground-state block entropy across a delta sweep at fixed t1 and length."""
    deltas = np.asarray(deltas, dtype=float).ravel()
    out = np.empty(len(deltas))
    for i, d in enumerate(deltas):
        p = ModelParams(
            t1=params.t1, length=params.length, t2=params.t2,
            delta=d, boundary=Boundary.OBC, mu=params.mu,
        )
        out[i] = entanglement_result(p, cut).entropy
    return out


@dataclass(frozen=True)
class ScalingFit:
    """Least-squares fit entropy = slope * ln(length) + intercept.

    central_charge converts the slope by the number of entangling points of
    the cut: c = 6 slope for "half" (one point), c = 3 slope for "centered"
    (two points).
    """

    lengths: np.ndarray
    entropies: np.ndarray
    slope: float
    intercept: float
    central_charge: float
    residual: float
    cut: str


def ee_scaling_fit(
    params: ModelParams, lengths: Sequence[int], cut: str = "centered"
) -> ScalingFit:
    """Fit the logarithmic length scaling of the block entropy.

    Needs at least five lengths (raises InsufficientSizes otherwise); each
    chain keeps the same couplings, the block is always L of 2L sites.
    """
    lengths = np.asarray(sorted(int(x) for x in lengths), dtype=int)
    if len(lengths) < 5:
        raise InsufficientSizes(f"{len(lengths)} sizes given; need at least 5")
    entropies = np.empty(len(lengths))
    for i, L in enumerate(lengths):
        p = ModelParams(
            t1=params.t1, length=int(L), t2=params.t2,
            delta=params.delta, boundary=Boundary.OBC, mu=params.mu,
        )
        entropies[i] = entanglement_result(p, cut).entropy
    x = np.log(lengths.astype(float))
    slope, intercept = np.polyfit(x, entropies, 1)
    fitted = slope * x + intercept
    residual = float(np.sqrt(np.mean((entropies - fitted) ** 2)))
    points = 1 if cut == "half" else 2
    return ScalingFit(
        lengths=lengths,
        entropies=entropies,
        slope=float(slope),
        intercept=float(intercept),
        central_charge=float(6.0 * slope / points),
        residual=residual,
        cut=cut,
    )
