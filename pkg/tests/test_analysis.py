import numpy as np
import pytest

from rydpair.analysis import (
    Losses,
    analyze_tallies,
    closed_form_p11,
    coherence_from_parity,
    extract_density,
    extract_losses,
    fidelity,
    mean_p11,
    tally_errors,
)
from rydpair.fitting import FitError, OscillationFit, fit_oscillation, oscillation_model
from rydpair.noise import NoiseParams
from rydpair.protocol import ShotTally, run_scan

from oracles import DD, DU, UD, UU, phase_averaged_joint, phase_averaged_p11, random_pair_density

OMEGA = 2 * np.pi * 1e6
TABLE1 = dict(p_dd=0.06, p_uu=0.09, mixed=0.46, re=0.23)


def exact_fit(y0, A, B, omega=OMEGA):
    return OscillationFit(y0, A, B, omega, 0.0, np.zeros((4, 4)), 0.0, 24)


def losses(L_total):
    return Losses(0.0, 0.0, L_total, 0.0, 0.0, 0.0)


def test_fit_recovers_exact_model():
    t = np.linspace(0, 2e-6, 40)
    y = oscillation_model(t, 0.2, 0.05, -0.15, OMEGA)
    fit = fit_oscillation(t, y, np.full_like(t, 0.01), OMEGA * 1.03)
    np.testing.assert_allclose(fit.params, [0.2, 0.05, -0.15, OMEGA], rtol=1e-6, atol=1e-6)
    assert fit.residual_rms < 1e-9


def test_fit_flat_data():
    rng = np.random.default_rng(0)
    t = np.linspace(0, 1e-6, 24)
    y = np.full_like(t, 0.3)
    fit = fit_oscillation(t, y, np.full_like(t, 0.01), OMEGA)
    assert fit.y0 == pytest.approx(0.3) and abs(fit.A) < 1e-12 and abs(fit.B) < 1e-12
    noisy = 0.3 + 0.01 * rng.standard_normal(t.size)
    fit = fit_oscillation(t, noisy, np.full_like(t, 0.01), OMEGA, fix_omega=True)
    assert fit.y0 == pytest.approx(noisy.mean(), abs=3e-3)


def test_fit_covariance_matches_scatter():
    rng = np.random.default_rng(1)
    t = np.linspace(0, 1e-6, 24)
    truth = oscillation_model(t, 0.2, 0.05, -0.15, OMEGA)
    fits = [fit_oscillation(t, truth + 0.01 * rng.standard_normal(t.size), np.full_like(t, 0.01), OMEGA)
            for _ in range(300)]
    spread = np.std([f.params for f in fits], axis=0)
    np.testing.assert_allclose(spread, fits[0].errors, rtol=0.2)


def test_fit_errors():
    t = np.linspace(0, 1e-6, 5)
    with pytest.raises(FitError):
        fit_oscillation(t, np.zeros(5), np.ones(5), OMEGA)
    t = np.zeros(10)
    with pytest.raises(FitError):
        fit_oscillation(t, np.arange(10.0), np.ones(10), OMEGA, fix_omega=True)
    t = np.linspace(0, 2e-6, 30)
    y = oscillation_model(t, 0.2, 0.1, -0.1, OMEGA)
    with pytest.raises(FitError):
        fit_oscillation(t, y, np.full_like(t, 1e-3), OMEGA * 1.2, max_iter=1)


def test_closed_form_matches_phase_grid_oracle():
    rng = np.random.default_rng(2)
    thetas = np.linspace(0, 2 * np.pi, 13)
    for _ in range(5):
        rho = random_pair_density(rng, trace=rng.uniform(0.5, 1))
        got = closed_form_p11(thetas, rho[DD, DD].real, rho[UU, UU].real,
                              (rho[DU, DU] + rho[UD, UD]).real, rho[DU, UD].real)
        np.testing.assert_allclose(got, phase_averaged_p11(rho, thetas, 2000), atol=1e-12)


def test_double_population_coherence_is_invisible():
    rng = np.random.default_rng(3)
    rho = random_pair_density(rng, double_coherence=True)
    plain = rho.copy()
    plain[DD, UU] = plain[UU, DD] = 0
    for theta in np.linspace(0, 2 * np.pi, 9):
        np.testing.assert_allclose(phase_averaged_joint(rho, theta, 2000), phase_averaged_joint(plain, theta, 2000),
                                   atol=1e-12)


def test_mean_p11_table_values():
    assert mean_p11(TABLE1["p_dd"], TABLE1["p_uu"], TABLE1["mixed"], TABLE1["re"]) == pytest.approx(0.17125)


def test_extract_density_inverts_table_values():
    y0 = 0.17125
    A = (TABLE1["p_dd"] - TABLE1["p_uu"]) / 2
    B = (TABLE1["p_dd"] + TABLE1["p_uu"] - TABLE1["mixed"] - 2 * TABLE1["re"]) / 8
    d = extract_density(exact_fit(y0, A, B), losses(0.39))
    assert d.p_down_down == pytest.approx(0.06)
    assert d.p_up_up == pytest.approx(0.09)
    assert d.p_mixed_sum == pytest.approx(0.46)
    assert d.re_coherence == pytest.approx(0.23)
    assert d.trace == pytest.approx(0.61)
    F, _, Fp, _ = fidelity(d)
    assert F == pytest.approx(0.46)
    assert Fp == pytest.approx(0.754, abs=1e-3)


def test_pure_bell_state_elements():
    d = extract_density(exact_fit(0.25, 0.0, -0.25), losses(0.0))
    assert (d.p_down_down, d.p_up_up) == pytest.approx((0.0, 0.0))
    assert d.p_mixed_sum == pytest.approx(1.0)
    assert d.re_coherence == pytest.approx(0.5)
    F, _, Fp, _ = fidelity(d)
    assert F == pytest.approx(1.0) and Fp == pytest.approx(1.0)


def test_dephasing_limited_fidelity():
    d = extract_density(exact_fit(*_coefficients(0, 0, 1, 0.94 / 2)), losses(0.0))
    assert fidelity(d)[2] == pytest.approx(0.97)


def _coefficients(p_dd, p_uu, mixed, re):
    y0 = mean_p11(p_dd, p_uu, mixed, re)
    return y0, (p_dd - p_uu) / 2, (p_dd + p_uu - mixed - 2 * re) / 8


def test_fidelity_rejects_empty_trace():
    with pytest.warns(UserWarning):
        d = extract_density(exact_fit(0.1, 0, 0), losses(1.0))
    with pytest.raises(ValueError):
        fidelity(d)


def test_negative_population_is_flagged():
    with pytest.warns(UserWarning):
        d = extract_density(exact_fit(0.05, 0.2, 0.0), losses(0.0))
    assert any("p_up_up" in f for f in d.flags)


def test_loss_formula():
    fit = exact_fit(0.39, 0, 0)
    out = extract_losses(fit, fit)
    assert out.L_a == pytest.approx(0.22)
    assert out.L_total == pytest.approx(0.3916)


def test_parity_coherence_pure_state():
    # lossless |Psi+>: parity -cos(2 theta) style signal, +1 at pi/2
    fit = exact_fit(0.0, 0.0, -1.0)
    assert coherence_from_parity(fit, 0.0, 0.0)[0] == pytest.approx(0.5)


def test_estimator_recovers_injected_elements():
    rng = np.random.default_rng(4)
    thetas = np.linspace(0, 2 * np.pi, 24)
    for _ in range(5):
        tr = rng.uniform(0.5, 1.0)
        rho = random_pair_density(rng, trace=tr)
        y = phase_averaged_p11(rho, thetas)
        fit = fit_oscillation(thetas / OMEGA, y, np.full_like(y, 1e-3), OMEGA * 1.01)
        d = extract_density(fit, losses(1 - tr))
        expected = [rho[DD, DD].real, rho[UU, UU].real, (rho[DU, DU] + rho[UD, UD]).real, rho[DU, UD].real]
        got = [d.p_down_down, d.p_up_up, d.p_mixed_sum, d.re_coherence]
        np.testing.assert_allclose(got, expected, atol=1e-4)


def test_wilson_floor_keeps_weight():
    err = tally_errors(np.array([0.0, 1.0, 0.5]), np.array([100, 100, 100]))
    assert np.all(err > 0)
    assert err[2] == pytest.approx(0.05, rel=0.02)


@pytest.mark.parametrize("delay", [30e-9, 600e-9])
def test_parity_and_mean_methods_agree(reference_params, delay):
    p = reference_params.replace(t_delay=delay)
    scan = run_scan(p, NoiseParams(), np.linspace(0, 2 * np.pi, 24), 2000, 21)
    r = analyze_tallies(scan.tallies, p.omega_raman)
    assert r.parity_agreement_sigma <= 2.0


def test_single_frequency_amplitude_tracks_population_imbalance(reference_params):
    scan = run_scan(reference_params, NoiseParams(), np.linspace(0, 2 * np.pi, 24), 10_000, 22)
    r = analyze_tallies(scan.tallies, reference_params.omega_raman)
    d = r.density
    assert r.fit_p11.A == pytest.approx((d.p_down_down - d.p_up_up) / 2, abs=1e-12)
    # imbalance points towards |up, up>, as in the measured data
    assert r.fit_p11.A < 0


def test_noiseless_scan_has_no_single_frequency_component(blockaded_params, noiseless):
    scan = run_scan(blockaded_params, noiseless, np.linspace(0, 2 * np.pi, 24), 5000, 23)
    r = analyze_tallies(scan.tallies, blockaded_params.omega_raman)
    assert abs(r.fit_p11.A) <= 0.01


def test_fidelity_error_scales_with_shots(reference_params):
    scan = run_scan(reference_params, NoiseParams(), np.linspace(0, 2 * np.pi, 24), 20_000, 24)
    errs = {}
    for n in (100, 10_000, 1_000_000):
        scaled = [ShotTally(t.theta, *(round(c * n / t.n) for c in (t.n00, t.n01, t.n10, t.n11)))
                  for t in scan.tallies]
        errs[n] = analyze_tallies(scaled, reference_params.omega_raman).err_F_pairs
    assert errs[100] / errs[10_000] == pytest.approx(10, rel=0.15)
    assert errs[10_000] / errs[1_000_000] == pytest.approx(10, rel=0.15)
