import numpy as np
import pytest

from nhssh.errors import (
    ComplexLeakage,
    NonPositiveTemperature,
    NoPeaksFound,
    StepTooLarge,
    WindowTooNarrow,
)
from nhssh.lattice import ModelParams, bulk_spectrum, obc_spectrum
from nhssh.thermo import (
    delta_derivative_scan,
    entropy,
    fit_central_charge_cv,
    grand_potential,
    grand_potential_T0,
    heat_capacity,
    hill_split,
    itc_scan,
    thermo_curve,
)

LN4 = np.log(4.0)


def test_grand_potential_T0_real_spectrum():
    assert grand_potential_T0(np.array([-2.0, -1.0, 1.0, 2.0])) == pytest.approx(-3.0)
    # mu = 1.5 fills three modes, each contributing E - mu.
    assert grand_potential_T0(np.array([-2.0, -1.0, 1.0, 2.0]), mu=1.5) == pytest.approx(
        -3.5 - 2.5 - 0.5
    )


def test_grand_potential_T0_conjugate_pairs():
    e = np.array([-1 + 0.5j, -1 - 0.5j, 1 + 0.5j, 1 - 0.5j])
    assert grand_potential_T0(e) == pytest.approx(-2.0)


def test_grand_potential_approaches_T0():
    e = np.array([-2.0, -1.0, 1.0, 2.0])
    assert grand_potential(e, 1e-6) == pytest.approx(grand_potential_T0(e), abs=1e-5)


def test_grand_potential_positive_temperature_only():
    e = np.array([-1.0, 1.0])
    with pytest.raises(NonPositiveTemperature):
        grand_potential(e, 0.0)
    with pytest.raises(NonPositiveTemperature):
        entropy(e, -0.1)
    with pytest.raises(NonPositiveTemperature):
        heat_capacity(e, 0.0)


def test_entropy_matches_binary_mixture_form():
    e = np.array([-1.7, -0.3, 0.4, 2.2])
    T = 0.37
    f = 1.0 / (1.0 + np.exp(e / T))
    want = -np.sum(f * np.log(f) + (1 - f) * np.log(1 - f))
    assert entropy(e, T) == pytest.approx(want, rel=1e-12)


def test_entropy_two_level_special_point():
    # A mode pinned at mu contributes exactly ln 2.
    assert entropy(np.array([0.0]), 0.2) == pytest.approx(np.log(2.0))


def test_thermodynamic_consistency_finite_differences():
    rng = np.random.default_rng(3)
    e = np.sort(rng.normal(scale=1.5, size=30))
    T, h = 0.31, 1e-5
    s_fd = -(grand_potential(e, T + h) - grand_potential(e, T - h)) / (2 * h)
    assert entropy(e, T) == pytest.approx(s_fd, rel=1e-6)
    c_fd = T * (entropy(e, T + h) - entropy(e, T - h)) / (2 * h)
    assert heat_capacity(e, T) == pytest.approx(c_fd, rel=1e-6)


def test_heat_capacity_nonnegative_for_real_spectra():
    rng = np.random.default_rng(5)
    for _ in range(10):
        e = rng.normal(size=12)
        assert heat_capacity(e, 0.4) >= 0.0


def test_complex_leakage_on_unpaired_spectrum():
    with pytest.raises(ComplexLeakage):
        entropy(np.array([1.0 + 0.5j, -1.0]), 0.3)


def test_hill_split_identity():
    p = ModelParams(t1=1.1, length=24, delta=0.8)
    h = hill_split(p, 0.2)
    assert h.omega_edge == pytest.approx(h.omega_open - h.omega_reference, abs=1e-12)
    assert h.omega_bulk_per_site == pytest.approx(h.omega_reference / 48, abs=1e-12)
    e_open = obc_spectrum(p)
    assert h.omega_open == pytest.approx(grand_potential(e_open, 0.2), abs=1e-10)


def test_hill_split_low_T_approaches_ground_state():
    p = ModelParams(t1=0.8, length=24)
    h = hill_split(p, 1e-6)
    want = grand_potential_T0(obc_spectrum(p)) - grand_potential_T0(bulk_spectrum(p))
    assert h.omega_edge == pytest.approx(want, abs=1e-4)


def test_thermo_curve_shapes_and_edge_entropy():
    temps = np.geomspace(1e-3, 0.5, 8)
    # Deep topological chain: the zero-pair splitting is far below the
    # lowest temperature, so the edge holds exactly ln 4 of entropy there.
    curve = thermo_curve(ModelParams(t1=0.5, length=40), temps)
    assert curve.s_bulk.shape == temps.shape
    assert curve.s_edge[0] == pytest.approx(LN4, abs=1e-6)
    trivial = thermo_curve(ModelParams(t1=1.3, length=40), temps)
    assert trivial.s_edge[0] == pytest.approx(0.0, abs=1e-6)


def test_total_entropy_nonnegative_even_when_edge_is_negative():
    # The edge term may go negative at intermediate T, but the full open
    # chain's entropy cannot.
    temps = np.geomspace(1e-3, 1.0, 12)
    p = ModelParams(t1=1.2, length=60)
    curve = thermo_curve(p, temps)
    assert np.min(curve.s_edge) < -0.01
    total = curve.s_bulk * p.length + curve.s_edge
    assert np.all(total >= -1e-9)


def test_third_law_gapped_chain():
    p = ModelParams(t1=1.5, length=30)
    e = obc_spectrum(p)
    assert abs(entropy(e, 1e-4)) < 1e-12


def test_central_charge_hermitian_critical():
    temps = np.linspace(0.02, 0.1, 9)
    curve = thermo_curve(ModelParams(t1=1.0, length=200), temps)
    fit = fit_central_charge_cv(curve)
    assert fit.central_charge == pytest.approx(1.0, abs=0.05)
    assert fit.n_points == 9


def test_central_charge_window_too_narrow():
    temps = np.linspace(0.5, 0.9, 6)
    curve = thermo_curve(ModelParams(t1=1.0, length=40), temps)
    with pytest.raises(WindowTooNarrow):
        fit_central_charge_cv(curve)


def test_derivative_scan_basic():
    p = ModelParams(t1=1.1, length=20)
    scan = delta_derivative_scan(p, np.array([0.2, 0.25]), order=1)
    assert scan.d_bulk_per_site.shape == (2,)
    assert np.all(np.isfinite(scan.d_edge))
    assert scan.order == 1


def test_derivative_scan_matches_manual_stencil():
    p = ModelParams(t1=1.1, length=16)
    step = 1e-3
    scan = delta_derivative_scan(p, np.array([0.3]), order=2, step=step, temperature=0.15)

    def f_edge(d):
        h = hill_split(ModelParams(t1=1.1, length=16, delta=d), 0.15)
        return h.omega_edge

    want = (f_edge(0.3 + step) - 2 * f_edge(0.3) + f_edge(0.3 - step)) / step**2
    assert scan.d_edge[0] == pytest.approx(want, rel=1e-9)


def test_derivative_scan_step_guard():
    p = ModelParams(t1=1.1, length=20)
    with pytest.raises(StepTooLarge):
        delta_derivative_scan(p, np.array([1.095]), order=2, step=0.01)


def test_derivative_scan_finite_temperature():
    p = ModelParams(t1=1.1, length=20)
    scan = delta_derivative_scan(p, np.array([0.2]), order=1, temperature=0.1)
    assert scan.temperature == pytest.approx(0.1)
    assert np.isfinite(scan.d_edge[0])


def test_itc_frozen_period():
    p = ModelParams(t1=1.1, length=200, delta=1.6)
    betas = np.linspace(1.0, 60.0, 1200)
    rep = itc_scan(p, betas)
    assert rep.period_expected == pytest.approx(2 * np.pi / np.sqrt(0.35), rel=1e-12)
    assert rep.period_measured == pytest.approx(rep.period_expected, rel=0.01)
    assert len(rep.peak_betas) >= 4


def test_itc_no_peaks_below_threshold():
    betas = np.linspace(1.0, 40.0, 400)
    for delta in (0.8, 1.3):
        with pytest.raises(NoPeaksFound):
            itc_scan(ModelParams(t1=1.1, length=200, delta=delta), betas)


def test_itc_rejects_nonpositive_beta():
    with pytest.raises(NonPositiveTemperature):
        itc_scan(ModelParams(t1=1.1, length=8, delta=1.6), np.array([0.0, 1.0]))


def test_bulk_entropy_non_monotonic_deep_in_broken_phase():
    # The surviving imaginary pair makes S_bulk(T) oscillate; check only
    # that the non-monotonicity exists and the sweep stays finite.
    params = ModelParams(t1=1.1, length=200, delta=1.49)
    temps = np.linspace(0.005, 0.06, 40)
    curve = thermo_curve(params, temps)
    s_bulk = np.asarray(curve.s_bulk)
    assert np.all(np.isfinite(s_bulk))
    d = np.diff(s_bulk)
    sign_changes = int(np.sum(np.sign(d[1:]) * np.sign(d[:-1]) < 0))
    assert sign_changes >= 1
