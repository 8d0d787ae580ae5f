import numpy as np
import pytest

from nhssh.eig import eig_general, occupied_indices
from nhssh.entanglement import (
    correlation_matrix,
    cut_sites,
    direct_entanglement_result,
    ee_scaling_fit,
    ee_vs_delta,
    entanglement_entropy,
    entanglement_result,
    subsystem_spectrum,
)
from nhssh.errors import AmbiguousFilling, ComplexLeakage, InsufficientSizes
from nhssh.lattice import ModelParams, build_realspace, gauged_obc_matrix

LN4 = np.log(4.0)
UPPER_CRITICAL = 1.4866068747318506


def test_cut_sites_conventions():
    np.testing.assert_array_equal(cut_sites(4, "half"), [0, 1, 2, 3])
    np.testing.assert_array_equal(cut_sites(4, "centered"), [2, 3, 4, 5])
    with pytest.raises(ValueError):
        cut_sites(4, "thirds")


def test_entropy_frozen_value():
    assert entanglement_entropy(np.array([0.25])) == pytest.approx(
        0.5623351446188083, abs=1e-15
    )


def test_entropy_drops_trivial_occupations():
    xi = np.array([0.0, 1.0, 1e-13, 1.0 - 1e-13, 0.5])
    assert entanglement_entropy(xi) == pytest.approx(np.log(2.0), abs=1e-10)


def test_entropy_clamps_roundoff_overshoot():
    assert entanglement_entropy(np.array([1.0 + 5e-9, -5e-9])) == pytest.approx(0.0)


def test_entropy_rejects_genuinely_unphysical():
    with pytest.raises(ComplexLeakage):
        entanglement_entropy(np.array([1.1]))


def test_correlation_projector_laws():
    # C = sum |r><l| over filled modes is an oblique projector; its trace
    # counts the filled modes even when left and right bases differ.
    for delta, length in ((0.0, 12), (0.8, 20), (1.3, 20)):
        p = ModelParams(t1=1.1, length=length, delta=delta)
        h = build_realspace(p).entries if delta == 0.0 else gauged_obc_matrix(p)
        system = eig_general(h)
        occ = occupied_indices(system)
        c = correlation_matrix(system, occ)
        assert np.max(np.abs(c @ c - c)) < 1e-8
        assert np.trace(c) == pytest.approx(len(occ), abs=1e-9)


def test_hermitian_limit_routes_agree():
    p = ModelParams(t1=0.7, length=16)
    a = entanglement_result(p)
    b = direct_entanglement_result(p)
    assert a.entropy == pytest.approx(b.entropy, abs=1e-10)
    # Textbook construction from the filled Fermi sea of the real chain.
    h = build_realspace(p).entries.real
    w, v = np.linalg.eigh(h)
    filled = v[:, w < 0]
    corr = filled @ filled.conj().T
    sites = cut_sites(p.length, "half")
    xi = np.linalg.eigvalsh(corr[np.ix_(sites, sites)])
    want = entanglement_entropy(xi.astype(complex))
    assert a.entropy == pytest.approx(want, abs=1e-10)


def test_gauge_and_direct_routes_agree_at_small_sizes():
    for delta in (0.5, 1.0, 1.3, UPPER_CRITICAL, 1.7):
        for length in (6, 8):
            p = ModelParams(t1=1.1, length=length, delta=delta)
            a = entanglement_result(p)
            b = direct_entanglement_result(p)
            assert a.entropy == pytest.approx(b.entropy, abs=1e-10), (delta, length)


def test_complement_blocks_carry_equal_entropy():
    p = ModelParams(t1=1.1, length=16, delta=0.8)
    system = eig_general(gauged_obc_matrix(p))
    c = correlation_matrix(system, occupied_indices(system))
    front = subsystem_spectrum(c, list(range(16)))
    back = subsystem_spectrum(c, list(range(16, 32)))
    assert entanglement_entropy(front) == pytest.approx(
        entanglement_entropy(back), abs=1e-9
    )


def test_balanced_zero_pair_plateau():
    # Exact zero pair at L = 30, delta = 1.0: the filled combination is the
    # chirality-balanced one, leaving two half-filled cut modes and a clean
    # plateau value.
    p = ModelParams(t1=1.1, length=30, delta=1.0)
    r = entanglement_result(p)
    exact_half = np.count_nonzero(np.abs(r.xi - 0.5) < 1e-9)
    assert exact_half == 2
    assert r.entropy == pytest.approx(1.390388999083867, abs=1e-9)
    assert r.entropy == pytest.approx(LN4, abs=0.05)
    assert r.n_occupied == 30


def test_zero_pair_correlation_is_still_projector():
    p = ModelParams(t1=1.1, length=30, delta=1.0)
    r = entanglement_result(p)
    # xi spectrum of a projector block lies in [0, 1] up to roundoff.
    assert np.all(r.xi.real > -1e-8)
    assert np.all(r.xi.real < 1 + 1e-8)
    assert np.max(np.abs(r.xi.imag)) < 1e-8


def test_ee_vs_delta_matches_pointwise():
    p = ModelParams(t1=1.1, length=12)
    deltas = np.array([0.2, 0.9])
    curve = ee_vs_delta(p, deltas)
    for d, s in zip(deltas, curve):
        single = entanglement_result(ModelParams(t1=1.1, length=12, delta=float(d)))
        assert s == pytest.approx(single.entropy, abs=1e-12)


def test_gapped_chain_entropy_saturates():
    fit = ee_scaling_fit(
        ModelParams(t1=1.5, length=8), [8, 12, 16, 24, 32, 40], cut="half"
    )
    assert abs(fit.slope) < 0.01


def test_scaling_fit_needs_five_sizes():
    with pytest.raises(InsufficientSizes):
        ee_scaling_fit(ModelParams(t1=1.0, length=8), [8, 12, 16, 24], cut="half")


def test_scaling_fit_charge_normalization():
    # With identical data the centered cut (two entangling points) must
    # report half the charge of the half cut (one point).
    lengths = [10, 14, 18, 22, 26]
    half = ee_scaling_fit(ModelParams(t1=1.0, length=10), lengths, cut="half")
    assert half.central_charge == pytest.approx(6.0 * half.slope)
    centered = ee_scaling_fit(ModelParams(t1=1.0, length=10), lengths, cut="centered")
    assert centered.central_charge == pytest.approx(3.0 * centered.slope)


def test_odd_length_at_upper_critical_is_ambiguous():
    # Odd cell counts pin a purely imaginary eigenvalue pair on the upper
    # critical line, where half filling genuinely cannot be resolved.
    with pytest.raises(AmbiguousFilling):
        entanglement_result(ModelParams(t1=1.1, length=9, delta=UPPER_CRITICAL))
    ok = entanglement_result(ModelParams(t1=1.1, length=10, delta=UPPER_CRITICAL))
    assert np.isfinite(ok.entropy)


# Many-body cross-check: build the actual 2^8-dimensional Slater states and
# trace out half the chain, with no free-fermion shortcuts on the way.

def _slater(vectors: np.ndarray) -> np.ndarray:
    n = vectors.shape[0]
    state = np.zeros(1 << n, dtype=complex)
    state[0] = 1.0
    for m in range(vectors.shape[1]):
        new = np.zeros_like(state)
        for s in range(1 << n):
            if state[s] == 0:
                continue
            for i in range(n):
                if s & (1 << i):
                    continue
                sign = (-1) ** bin(s & ((1 << i) - 1)).count("1")
                new[s | (1 << i)] += sign * vectors[i, m] * state[s]
        state = new
    return state


def _brute_force_half_cut_entropy(params: ModelParams) -> float:
    h = build_realspace(params).entries
    system = eig_general(h)
    occ = occupied_indices(system, params.mu)
    psi = _slater(system.right_vectors[:, occ])
    phi = _slater(system.left_vectors[:, occ])
    n_a = params.length
    dim_a = 1 << n_a
    rho = np.zeros((dim_a, dim_a), dtype=complex)
    for b in range(1 << (2 * params.length - n_a)):
        off = b << n_a
        rho += np.outer(psi[off:off + dim_a], np.conj(phi[off:off + dim_a]))
    rho /= np.vdot(phi, psi)
    assert np.trace(rho) == pytest.approx(1.0, abs=1e-10)
    lam = np.linalg.eigvals(rho)
    lam = lam[np.abs(lam) > 1e-12]
    ent = -np.sum(lam * np.log(lam))
    assert abs(ent.imag) < 1e-9
    return float(ent.real)


@pytest.mark.parametrize(
    "t1,delta,mu",
    [
        (0.7, 0.0, 0.0),
        (1.3, 0.0, 0.0),
        (1.1, 0.5, 0.0),
        (1.1, 1.3, 0.0),
        (0.7, 0.0, 0.4),
    ],
)
def test_brute_force_fock_space_oracle(t1, delta, mu):
    p = ModelParams(t1=t1, length=4, delta=delta, mu=mu)
    want = _brute_force_half_cut_entropy(p)
    assert entanglement_result(p).entropy == pytest.approx(want, abs=1e-9)
    assert direct_entanglement_result(p).entropy == pytest.approx(want, abs=1e-9)
