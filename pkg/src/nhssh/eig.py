"""Biorthogonal eigensystems and filling rules for single-particle Hamiltonians.

The right/left eigenvector pairs satisfy H r_n = E_n r_n and l_n^dag H =
E_n l_n^dag with l_m^dag r_n = delta_mn; stacked column-wise the left set is
(V^{-1})^dag.  Hermitian input takes a fast path where left and right sets
coincide.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import AmbiguousFilling, DefectiveMatrix

# Matrices with eigenbasis condition numbers past this are treated as
# numerically defective: biorthogonal pairs can no longer be resolved.
_COND_LIMIT = 1e10
_BIORTH_TOL = 1e-8


@dataclass(frozen=True)
class EigSystem:
    """Full eigensystem: eigenvalues sorted by (Re, Im), paired eigenvectors.

    right_vectors[:, n] and left_vectors[:, n] belong to eigenvalues[n];
    left_vectors.conj().T @ right_vectors == I within biorth_residual.
    h_norm is the spectral norm of the input, kept for relative tolerances.
    """

    eigenvalues: np.ndarray
    right_vectors: np.ndarray
    left_vectors: np.ndarray
    biorth_residual: float
    h_norm: float

    @property
    def dim(self) -> int:
        return len(self.eigenvalues)


def _is_hermitian(h: np.ndarray) -> bool:
    scale = max(np.linalg.norm(h, 2), 1.0)
    return np.allclose(h, h.conj().T, rtol=0.0, atol=1e-13 * scale)


def eig_general(h: np.ndarray) -> EigSystem:
    """Diagonalize a square matrix into a biorthogonal eigensystem.

    Raises DefectiveMatrix when the eigenvector basis is too ill-conditioned
    (condition number above 1e10, or biorthogonality not recoverable by one
    Newton sweep on the inverse).
    """
    h = np.asarray(h)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {h.shape}")
    h_norm = float(np.linalg.norm(h, 2))

    if _is_hermitian(h):
        w, v = np.linalg.eigh(h)
        return EigSystem(
            eigenvalues=w.astype(complex),
            right_vectors=v.astype(complex),
            left_vectors=v.astype(complex),
            biorth_residual=0.0,
            h_norm=h_norm,
        )

    w, v = scipy.linalg.eig(h)
    order = np.lexsort((w.imag, w.real))
    w, v = w[order], v[:, order]

    cond = np.linalg.cond(v)
    if not np.isfinite(cond) or cond > _COND_LIMIT:
        raise DefectiveMatrix(
            f"eigenvector basis condition number {cond:.3e} exceeds {_COND_LIMIT:.0e}"
        )
    vinv = np.linalg.inv(v)
    residual = float(np.linalg.norm(vinv @ v - np.eye(len(w)), np.inf))
    if residual > _BIORTH_TOL:
        # One Newton step on the inverse, X <- X (2 I - V X).
        vinv = vinv @ (2.0 * np.eye(len(w)) - v @ vinv)
        residual = float(np.linalg.norm(vinv @ v - np.eye(len(w)), np.inf))
        if residual > _BIORTH_TOL:
            raise DefectiveMatrix(
                f"biorthogonality residual {residual:.3e} after refinement"
            )
    return EigSystem(
        eigenvalues=w,
        right_vectors=v,
        left_vectors=vinv.conj().T,
        biorth_residual=residual,
        h_norm=h_norm,
    )


def occupied_indices(system: EigSystem, mu: float = 0.0) -> np.ndarray:
    """Indices of single-particle levels filled at chemical potential mu.

    Levels with Re E < mu are occupied.  Zero modes (|E| below 1e-8 times
    the matrix norm) at mu = 0 are resolved by sublattice weight: with
    exactly two of them, the one whose right vector leans on sublattice A
    (even sites) is filled, ties falling to the lower index.  Any other
    degeneracy at the chemical potential is ambiguous and raises.
    """
    w = system.eigenvalues
    zero_tol = 1e-8 * max(system.h_norm, 1.0)
    tie_tol = 1e-10

    is_zero_mode = np.abs(w) < zero_tol
    at_mu = np.abs(w.real - mu) < tie_tol

    if np.any(at_mu & ~is_zero_mode):
        bad = np.nonzero(at_mu & ~is_zero_mode)[0]
        raise AmbiguousFilling(
            f"levels {bad.tolist()} sit at the chemical potential mu={mu} "
            "without being zero modes; filling is not well defined"
        )

    candidates = w.real < mu - tie_tol
    if abs(mu) < tie_tol:
        # Zero modes at mu = 0 are decided by the pair rule below, never by
        # the sign of their (roundoff-scale) real part.
        candidates &= ~is_zero_mode
    occ = list(np.nonzero(candidates)[0])

    zeros = np.nonzero(is_zero_mode)[0]
    if len(zeros) and abs(mu) < tie_tol:
        if len(zeros) == 2:
            weights = []
            for idx in zeros:
                r = system.right_vectors[:, idx]
                total = np.sum(np.abs(r) ** 2)
                weights.append(np.sum(np.abs(r[0::2]) ** 2) / total)
            pick = zeros[0] if weights[0] >= weights[1] else zeros[1]
            occ.append(int(pick))
        else:
            raise AmbiguousFilling(
                f"{len(zeros)} zero modes at mu=0; only a symmetric pair can be split"
            )
    # mu away from zero needs no special casing: zero modes then compare to
    # mu like ordinary levels and are already in occ when Re E < mu.

    return np.array(sorted(set(occ)), dtype=int)
