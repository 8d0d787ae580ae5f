"""Hamiltonians and dispersions for reciprocal and non-reciprocal SSH chains.

Conventions shared by every module in this package:

* Basis ordering is (A1, B1, A2, B2, ...): site 2n hosts the A sublattice of
  unit cell n, site 2n+1 the B sublattice.
* ``H[i, j]`` is the hopping amplitude j -> i, i.e. ``(H psi)_i = sum_j
  H[i, j] psi_j``.  The forward (A -> B) intracell amplitude ``t1 - delta``
  therefore sits at ``H[2n+1, 2n]`` and the backward (B -> A) amplitude
  ``t1 + delta`` at ``H[2n, 2n+1]``.
* Every square root or logarithm of a complex (or negative real) argument is
  taken on the principal branch; numpy's complex functions implement exactly
  that.  Stated once here, relied upon everywhere.
* Units: k_B = hbar = 1 and the intercell hopping t2 sets the energy scale
  (t2 = 1 wherever a closed-form dispersion is quoted).

A note on numerics for open non-reciprocal chains: whenever ``delta != 0``
the open-chain eigenproblem is solved in a non-unitary gauge.  A diagonal
similarity with cell-wise ratio sqrt(t_minus / t_plus) turns the chain into
one with a single (possibly complex) intracell coupling
``sqrt(t_plus * t_minus)`` and symmetric hoppings.  The transformed matrix
has an eigenbasis whose condition number stays moderate, while the raw
matrix's eigenbasis conditioning grows exponentially with length because of
the boundary accumulation of right eigenvectors.  Spectra and every
observable derived from principal-submatrix correlation spectra are exactly
invariant under the gauge, so the transformed chain is used for all open
boundary spectra at delta != 0 (see :func:`gauged_obc_matrix`).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from .errors import ExceptionalCoupling


class Boundary(str, Enum):
    OBC = "obc"
    PBC = "pbc"


class MatrixKind(str, Enum):
    """Provenance tag for a built Hamiltonian matrix."""

    SSH_OBC = "ssh_obc"
    SSH_PBC = "ssh_pbc"
    NHSSH_OBC = "nhssh_obc"
    NHSSH_PBC = "nhssh_pbc"
    BLOCH = "bloch"
    SURROGATE = "surrogate"


@dataclass(frozen=True)
class ModelParams:
    """Couplings and geometry of one chain.

    t1 is the reciprocal part of the intracell hopping, delta its
    non-reciprocal imbalance, t2 the intercell hopping, length the number of
    unit cells L (2L sites), mu the chemical potential.
    """

    t1: float
    length: int
    t2: float = 1.0
    delta: float = 0.0
    boundary: Boundary = Boundary.OBC
    mu: float = 0.0

    def __post_init__(self) -> None:
        if self.t2 == 0:
            raise ValueError("t2 must be nonzero; it sets the energy scale")
        if int(self.length) != self.length or self.length < 2:
            raise ValueError(f"length must be an integer >= 2, got {self.length}")
        object.__setattr__(self, "length", int(self.length))
        object.__setattr__(self, "boundary", Boundary(self.boundary))

    @property
    def t_plus(self) -> float:
        """Backward (B -> A) intracell coupling t1 + delta."""
        return self.t1 + self.delta

    @property
    def t_minus(self) -> float:
        """Forward (A -> B) intracell coupling t1 - delta."""
        return self.t1 - self.delta

    @property
    def is_hermitian(self) -> bool:
        return self.delta == 0

    @property
    def sites(self) -> int:
        return 2 * self.length


@dataclass(frozen=True)
class HamiltonianMatrix:
    """Dense Hamiltonian with a provenance tag."""

    entries: np.ndarray
    kind: MatrixKind

    @property
    def dim(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True)
class MomentumGrid:
    """Uniform Brillouin-zone sampling k_j = -pi + 2*pi*j/n, j = 0..n-1."""

    points: np.ndarray

    @property
    def count(self) -> int:
        return len(self.points)

    @classmethod
    def uniform(cls, n: int) -> "MomentumGrid":
        if n < 2:
            raise ValueError("momentum grid needs at least 2 points")
        j = np.arange(n)
        return cls(points=-np.pi + 2.0 * np.pi * j / n)


def build_realspace(params: ModelParams) -> HamiltonianMatrix:
    """Real-space chain Hamiltonian on 2L sites in the (A1, B1, ...) basis."""
    L = params.length
    h = np.zeros((2 * L, 2 * L), dtype=complex)
    for n in range(L):
        a, b = 2 * n, 2 * n + 1
        h[a, b] = params.t_plus
        h[b, a] = params.t_minus
    for n in range(L):
        if params.boundary is Boundary.OBC and n == L - 1:
            break
        b, a_next = 2 * n + 1, 2 * ((n + 1) % L)
        h[a_next, b] = params.t2
        h[b, a_next] = params.t2
    if params.is_hermitian:
        kind = MatrixKind.SSH_OBC if params.boundary is Boundary.OBC else MatrixKind.SSH_PBC
    else:
        kind = MatrixKind.NHSSH_OBC if params.boundary is Boundary.OBC else MatrixKind.NHSSH_PBC
    return HamiltonianMatrix(entries=h, kind=kind)


def build_bloch(params: ModelParams, k: float) -> HamiltonianMatrix:
    """Reciprocal 2x2 Bloch block [[0, t1 + t2 e^{-ik}], [t1 + t2 e^{ik}, 0]].

    This is the delta = 0 momentum-space block; the non-reciprocal chain's
    bulk reference is :func:`build_surrogate` instead.
    """
    off = params.t1 + params.t2 * np.exp(-1j * k)
    h = np.array([[0.0, off], [np.conj(off), 0.0]], dtype=complex)
    return HamiltonianMatrix(entries=h, kind=MatrixKind.BLOCH)


def bloch_dispersion(params: ModelParams, k: np.ndarray | float) -> np.ndarray:
    """Two Bloch bands +/- sqrt(t1^2 + t2^2 + 2 t1 t2 cos k), shape (2, len(k))."""
    k = np.atleast_1d(np.asarray(k, dtype=float))
    e = np.sqrt(params.t1**2 + params.t2**2 + 2.0 * params.t1 * params.t2 * np.cos(k))
    return np.stack([-e, e])


def momentum_deformation(params: ModelParams) -> complex:
    """Imaginary momentum shift kappa = -ln sqrt(t_minus / t_plus).

    Real for |delta| < |t1|, complex with imaginary part +/- pi/2 once the
    two directional couplings have opposite signs.  Diverges on the lines
    delta = +/- t1 where one coupling vanishes (raises ExceptionalCoupling).
    """
    tp, tm = params.t_plus, params.t_minus
    if tp == 0 or tm == 0:
        raise ExceptionalCoupling(
            f"t_plus={tp}, t_minus={tm}: momentum deformation diverges at delta = +/- t1"
        )
    return complex(-np.log(np.sqrt(complex(tm) / complex(tp))))


def _check_surrogate_scale(params: ModelParams) -> None:
    if params.t2 != 1.0:
        raise ValueError("surrogate forms are derived for t2 = 1; rescale couplings first")


def build_surrogate(params: ModelParams, k: float) -> HamiltonianMatrix:
    """Momentum-deformed 2x2 bulk block whose periodic spectrum tracks the open chain.

    The off-diagonal entries are t_minus + r e^{ik} and t_plus + e^{-ik}/r
    with r = sqrt(t_minus / t_plus) on the principal branch.  The reciprocal
    of the same root (rather than an independently taken principal root of
    the inverse ratio) keeps the product of the off-diagonals equal to
    1 + t1^2 - delta^2 + 2 sqrt(t1^2 - delta^2) cos k in every phase.
    """
    _check_surrogate_scale(params)
    tp, tm = params.t_plus, params.t_minus
    if tp == 0 or tm == 0:
        raise ExceptionalCoupling(
            f"surrogate block undefined at delta = +/- t1 (t_plus={tp}, t_minus={tm})"
        )
    r = np.sqrt(complex(tm) / complex(tp))
    h = np.array(
        [
            [0.0, tm + r * np.exp(1j * k)],
            [tp + np.exp(-1j * k) / r, 0.0],
        ],
        dtype=complex,
    )
    return HamiltonianMatrix(entries=h, kind=MatrixKind.SURROGATE)


def surrogate_dispersion(params: ModelParams, k: np.ndarray | float) -> np.ndarray:
    """Two surrogate bands +/- sqrt(1 + t1^2 - delta^2 + 2 sqrt(t1^2 - delta^2) cos k).

    Complex output is legitimate: past delta = t1 the square roots pick up
    their principal complex values, and past delta = sqrt(1 + t1^2) modes
    around k = +/- pi/2 turn purely imaginary.  Regular (flat, +/- 1) on the
    line delta = t1 even though the surrogate matrix itself is not.
    """
    _check_surrogate_scale(params)
    k = np.atleast_1d(np.asarray(k, dtype=float))
    s = np.sqrt(complex(params.t1**2 - params.delta**2))
    e = np.sqrt(1.0 + params.t1**2 - params.delta**2 + 2.0 * s * np.cos(k) + 0j)
    return np.stack([-e, e])


def gauged_obc_matrix(params: ModelParams) -> np.ndarray:
    """Open-chain Hamiltonian in the non-unitary gauge that symmetrizes hopping.

    Returns the complex-symmetric 2L x 2L matrix with intracell coupling
    sqrt(t_plus * t_minus) in both directions and intercell coupling t2.  It
    is exactly similar to the raw open chain via a diagonal matrix with
    cell-wise ratio sqrt(t_minus / t_plus), so eigenvalues and all
    principal-submatrix correlation spectra coincide with the raw chain's,
    at bounded condition numbers.  The gauge requires open boundaries.
    """
    if params.boundary is not Boundary.OBC:
        raise ValueError("the symmetrizing gauge exists only for open boundaries")
    t_eff = complex(np.sqrt(complex(params.t_plus) * complex(params.t_minus)))
    L = params.length
    h = np.zeros((2 * L, 2 * L), dtype=complex)
    for n in range(L):
        a, b = 2 * n, 2 * n + 1
        h[a, b] = t_eff
        h[b, a] = t_eff
        if n < L - 1:
            h[b + 1, b] = params.t2
            h[b, b + 1] = params.t2
    return h


def obc_spectrum(params: ModelParams) -> np.ndarray:
    """Eigenvalues of the open chain, sorted by (Re, Im) ascending.

    Hermitian chains are diagonalized directly; non-reciprocal chains go
    through :func:`gauged_obc_matrix` because the raw matrix's spectrum is
    numerically unstable at experimentally relevant lengths.
    """
    if params.is_hermitian:
        h = build_realspace(
            ModelParams(
                t1=params.t1,
                length=params.length,
                t2=params.t2,
                delta=0.0,
                boundary=Boundary.OBC,
                mu=params.mu,
            )
        ).entries
        return np.linalg.eigvalsh(h).astype(complex)
    g = gauged_obc_matrix(params)
    if np.allclose(g.imag, 0.0, atol=1e-15):
        # Particle-hole protected regime: the gauged chain is real symmetric.
        return np.linalg.eigvalsh(g.real).astype(complex)
    w = np.linalg.eigvals(g)
    return w[np.lexsort((w.imag, w.real))]


def bulk_spectrum(params: ModelParams, grid: Optional[MomentumGrid] = None) -> np.ndarray:
    """Bulk reference spectrum on an L-point momentum grid (2L energies).

    For delta = 0 this samples the Bloch bands (identical to the periodic
    chain's spectrum); otherwise it samples the surrogate bands, which is
    the meaningful periodic reference for the open non-reciprocal chain.
    Sorted by (Re, Im) ascending.
    """
    if grid is None:
        grid = MomentumGrid.uniform(params.length)
    if params.is_hermitian:
        e = bloch_dispersion(params, grid.points).ravel().astype(complex)
    else:
        e = surrogate_dispersion(params, grid.points).ravel()
    return e[np.lexsort((e.imag, e.real))]


def surrogate_band_distance(energies: np.ndarray, params: ModelParams) -> np.ndarray:
    """Distance of each energy to the surrogate band curve {+/- sqrt(c + d u), u in [-1, 1]}.

    c = 1 + t1^2 - delta^2 and d = 2 sqrt(t1^2 - delta^2).  The momentum
    parameter is recovered by least squares in the E^2 plane and clamped to
    the physical band interval, so points lying exactly on a band report
    distance 0 up to roundoff.
    """
    _check_surrogate_scale(params)
    energies = np.atleast_1d(np.asarray(energies, dtype=complex))
    c = 1.0 + params.t1**2 - params.delta**2
    d = 2.0 * np.sqrt(complex(params.t1**2 - params.delta**2))
    if abs(d) < 1e-15:
        flat = np.sqrt(complex(c))
        return np.minimum(np.abs(energies - flat), np.abs(energies + flat))
    z = energies**2 - c
    u = np.clip((z * np.conj(d)).real / abs(d) ** 2, -1.0, 1.0)
    on_band = np.sqrt(c + d * u + 0j)
    return np.minimum(np.abs(on_band - energies), np.abs(-on_band - energies))
