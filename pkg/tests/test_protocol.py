import numpy as np
import pytest

from rydpair.analysis import extract_losses_from_tallies
from rydpair.hilbert import bell_state
from rydpair.noise import NoiseParams, make_rng
from rydpair.protocol import (
    CHUNK_SIZE,
    ShotRecord,
    ShotTally,
    entangled_state,
    pair_recapture_probability,
    parity_signal,
    run_scan,
    run_shot,
)


def p11_bell_oracle(theta, n_phi=10_000):
    """P(both down) for |Psi+> after R(theta, phi) on each atom, averaged over a phase grid."""
    phis = np.linspace(0, 2 * np.pi, n_phi, endpoint=False)
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    # amplitude on |down, down> from |down, up> and |up, down>: c * (i e^{i phi} s) each
    amp = 2 * c * 1j * np.exp(1j * phis) * s / np.sqrt(2)
    return float(np.mean(np.abs(amp) ** 2))


def test_noiseless_sequence_prepares_bell_state(blockaded_params):
    psi = entangled_state(blockaded_params)
    assert abs(psi.overlap(bell_state())) ** 2 >= 0.999


def test_run_shot_record(blockaded_params, noiseless):
    rec = run_shot(blockaded_params, noiseless, 0.0, make_rng(0), seed_index=3)
    assert isinstance(rec, ShotRecord)
    assert rec.recaptured_a != rec.recaptured_b
    assert rec.seed_index == 3


@pytest.mark.parametrize("theta", [0.0, np.pi])
def test_noiseless_one_atom_recaptured(theta, blockaded_params, noiseless):
    t = run_scan(blockaded_params, noiseless, [theta], 2000, 1).tallies[0]
    assert t.P_11 == 0 and t.P_00 == 0
    assert t.P_01 + t.P_10 == 1


def test_noiseless_half_pi(blockaded_params, noiseless):
    expected = p11_bell_oracle(np.pi / 2)
    assert expected == pytest.approx(0.5, abs=1e-12)
    t = run_scan(blockaded_params, noiseless, [np.pi / 2], 20_000, 2).tallies[0]
    assert t.P_11 == pytest.approx(expected, abs=4 * np.sqrt(0.25 / t.n))


def test_noiseless_angle_average_of_p11(blockaded_params, noiseless):
    thetas = np.linspace(0, 2 * np.pi, 25)[:-1]
    expected = np.mean([p11_bell_oracle(th, 2000) for th in thetas])
    assert expected == pytest.approx(0.25, abs=1e-9)
    scan = run_scan(blockaded_params, noiseless, thetas, 100_000 // thetas.size, 3)
    assert np.mean([t.P_11 for t in scan.tallies]) == pytest.approx(expected, abs=0.005)


def test_tally_invariants():
    rng = np.random.default_rng(0)
    a, b = rng.random(500) < 0.4, rng.random(500) < 0.7
    t = ShotTally.from_outcomes(0.3, a, b)
    assert t.n == 500
    assert t.P_00 + t.P_01 + t.P_10 + t.P_11 == pytest.approx(1.0, abs=1e-15)
    assert t.P_a == pytest.approx(t.P_10 + t.P_11)
    assert t.P_b == pytest.approx(t.P_01 + t.P_11)
    assert t.stat_err("P_a") == pytest.approx(np.sqrt(t.P_a * (1 - t.P_a) / 500))


def test_tally_merge_is_associative():
    rng = np.random.default_rng(1)
    parts = [ShotTally.from_outcomes(1.0, rng.random(50) < 0.5, rng.random(50) < 0.5) for _ in range(3)]
    assert (parts[0] + parts[1]) + parts[2] == parts[0] + (parts[1] + parts[2])
    with pytest.raises(ValueError):
        parts[0] + ShotTally(2.0, 1, 0, 0, 0)


def test_parity_signal():
    assert parity_signal(ShotTally(0.0, 0, 40, 60, 0))[0] == -1
    value, err = parity_signal(ShotTally(0.0, 25, 25, 25, 25))
    assert value == 0 and err == pytest.approx(2 * 0.5 / 10)


def test_zero_shots_rejected(reference_params):
    with pytest.raises(ValueError):
        run_scan(reference_params, NoiseParams(), [0.0], 0, 1)


def test_determinism_and_thread_independence(reference_params):
    thetas = np.linspace(0, 2 * np.pi, 5)
    shots = CHUNK_SIZE + 300
    one = run_scan(reference_params, NoiseParams(), thetas, shots, 11, workers=1)
    again = run_scan(reference_params, NoiseParams(), thetas, shots, 11, workers=1)
    many = run_scan(reference_params, NoiseParams(), thetas, shots, 11, workers=4)
    np.testing.assert_array_equal(one.recaptured_a, again.recaptured_a)
    np.testing.assert_array_equal(one.recaptured_a, many.recaptured_a)
    np.testing.assert_array_equal(one.recaptured_b, many.recaptured_b)
    other = run_scan(reference_params, NoiseParams(), thetas, shots, 12)
    assert not np.array_equal(one.recaptured_a, other.recaptured_a)


def test_atom_exchange_symmetry(reference_params):
    scan = run_scan(reference_params, NoiseParams(), np.linspace(0, 2 * np.pi, 8), 5000, 5)
    for t in scan.tallies:
        q = (t.n01 + t.n10) / t.n
        sigma = np.sqrt(q / t.n)  # difference of two near-Poisson counts
        assert abs(t.P_01 - t.P_10) < 4 * sigma + 1e-12


def test_losses_are_independent(blockaded_params):
    n = NoiseParams(p_detect_err=0.0, excite_detuning_rms=0.0, excite_intensity_rms=0.0)
    t = run_scan(blockaded_params, n, [0.0], 40_000, 8, push_out=False).tallies[0]
    la, lb = 1 - t.P_a, 1 - t.P_b
    both = t.P_00
    sigma = np.sqrt(both * (1 - both) / t.n)
    assert both == pytest.approx(la * lb, abs=3 * sigma)


def test_single_atom_loss_matches_channel_budget(reference_params):
    """L = 1 - 2<P_a> against the per-atom survival the channels imply."""
    n = NoiseParams()
    scan = run_scan(reference_params, n, np.linspace(0, 2 * np.pi, 24), 10_000, 9)
    losses = extract_losses_from_tallies(scan.tallies, reference_params.omega_raman)
    # classical channels, readout misses, plus the coherent |r,r> leak (< 1%)
    floor = 1 - n.survival * (1 - n.p_detect_err)
    assert floor < losses.L_a < floor + 0.015
    assert floor < losses.L_b < floor + 0.015


@pytest.mark.xfail(strict=True, reason="coherent blockade leak at 50 MHz is <1%, far below the ~10% "
                   "that populates |down, down>; see acceptance criterion 6")
def test_p11_at_zero_with_published_noise(reference_params):
    t = run_scan(reference_params, NoiseParams(), [0.0], 100, 0).tallies[0]
    assert t.P_11 == pytest.approx(0.06, abs=0.03)


@pytest.mark.xfail(strict=True, reason="same missing |down, down> admixture; see acceptance criterion 7")
def test_parity_at_half_pi_with_published_noise(reference_params):
    t = run_scan(reference_params, NoiseParams(), [np.pi / 2], 10_000, 0).tallies[0]
    assert parity_signal(t)[0] == pytest.approx(2 * 0.22 + 0.22**2, abs=0.05)


@pytest.mark.xfail(strict=True, reason="the channel budget multiplies to per-atom survival 0.81, "
                   "pair survival 0.65; 0.62 needs ~0.21 per-atom loss")
def test_pair_recapture_with_published_noise(reference_params):
    value, _ = pair_recapture_probability(reference_params, NoiseParams(), 10_000)
    assert 0.60 <= value <= 0.63
