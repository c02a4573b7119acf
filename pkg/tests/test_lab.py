import dataclasses

import numpy as np
import pytest

from fluxtalk import dynamics
from fluxtalk.device import FluxProgram, LineDrive, Tone, dressed_resonator_freq, f01
from fluxtalk.errors import FrequencyOutOfRange
from fluxtalk.lab import ExperimentRecord, VirtualLab
from fluxtalk.noise import NoiseModel, Sampling


def _quiet(device, **overrides):
    noise = dataclasses.replace(device.noise, ramsey_freq_sigma_static_mhz=0.0, ramsey_freq_sigma_mod_mhz=0.0,
                                resonator_fit_sigma_mhz=0.0, flux_conversion_rel_sigma=0.0, **overrides)
    return dataclasses.replace(device, noise=noise)


def _with_x(device, t, s, x):
    net = dataclasses.replace(device.network, x_dc=device.network.x_dc.copy(), x_ac=dict(device.network.x_ac))
    net.x_dc[t, s] = x
    net.x_ac.pop((t, s), None)
    return dataclasses.replace(device, network=net)


def test_record_validation():
    with pytest.raises(ValueError):
        ExperimentRecord([1, 2], [1.0], [0.1])
    with pytest.raises(ValueError):
        ExperimentRecord([1], [1.0], [0.0])


def test_record_csv_round_trip(tmp_path, device):
    rec = VirtualLab(device, seed=2).resonator_scan(0, 1, 1.0, np.linspace(-0.5, 0.5, 11))
    path = tmp_path / "scan.csv"
    rec.to_csv(path)
    again = ExperimentRecord.from_csv(path)
    assert np.array_equal(again.y, rec.y) and again.metadata == rec.metadata
    assert path.read_text().splitlines()[0] == "x,y,y_sigma"


def test_resonator_scan_is_noiseless_model(device):
    dev = _quiet(device)
    lab = VirtualLab(dev, seed=0)
    grid = np.linspace(-0.6, 0.6, 41)
    rec = lab.resonator_scan(0, 3, 0.0, grid)
    phi = grid / dev.flux_lines[0].dc_volts_per_phi0
    assert np.allclose(rec.y, 1e3 * dressed_resonator_freq(dev.resonators[0], dev.transmons[0], phi), atol=1e-9)


def test_zero_crosstalk_traces_identical(device):
    dev = _with_x(_quiet(device), 0, 3, 0.0)
    lab = VirtualLab(dev, seed=0)
    grid = np.linspace(-0.6, 0.6, 41)
    traces = [lab.resonator_scan(0, 3, b, grid).y for b in (-1, 0, 1)]
    assert np.array_equal(traces[0], traces[1]) and np.array_equal(traces[1], traces[2])


@pytest.mark.parametrize("bias", [1.0, 2.0])
def test_offset_between_traces(device, bias):
    t, s, x = 0, 6, 0.035
    dev = _with_x(_quiet(device), t, s, x)
    lab = VirtualLab(dev, seed=0)
    conv = dev.flux_lines[t].dc_volts_per_phi0
    grid = np.linspace(-0.6, 0.6, 41) * conv
    plus = lab.resonator_scan(t, s, bias, grid).y
    # the -bias trace shifted by the expected offset reproduces the +bias trace
    shifted = lab.resonator_scan(t, s, -bias, grid + 2 * x * bias * conv).y
    assert np.allclose(plus, shifted, atol=1e-9)


def test_noise_level_of_resonator_scan(device):
    lab = VirtualLab(device, seed=4)
    grid = np.zeros(4000)
    y = lab.resonator_scan(0, 1, 0.0, grid).y
    assert np.std(y) == pytest.approx(device.noise.resonator_fit_sigma_mhz, rel=0.05)


def test_fast_ramsey_noiseless_is_exact(device):
    dev = _quiet(device)
    lab = VirtualLab(dev, seed=0)
    prog = FluxProgram.single(0, 0.17)
    assert lab.ramsey_frequency(0, prog).f01_est == f01(dev.transmons[0], 0.17)


def test_modulated_amplitude_zero_equals_static(device):
    dev = _quiet(device)
    lab = VirtualLab(dev, seed=0)
    static = lab.ramsey_frequency(0, FluxProgram.single(0, 0.0)).f01_est
    mod = lab.ramsey_frequency(0, FluxProgram.single(0, 0.0, tones=[Tone(0.0, 200.0)])).f01_est
    assert mod == pytest.approx(static, abs=1e-12)


def test_fast_ramsey_sigmas(device):
    lab = VirtualLab(device, seed=0)
    assert lab.ramsey_frequency(0, FluxProgram.single(0, 0.1)).sigma == 0.01
    assert lab.ramsey_frequency(0, FluxProgram.single(0, 0.0, tones=[Tone(0.2, 200.0)])).sigma == 0.05


def test_full_path_sigma_is_honest(device):
    target = f01(device.transmons[0], 0.1)
    ests, sigmas = [], []
    for seed in range(100):
        r = VirtualLab(device, seed=seed, realism="full").ramsey_frequency(0, FluxProgram.single(0, 0.1))
        ests.append((r.f01_est - target) * 1e3)
        sigmas.append(r.sigma)
    ratio = np.std(ests) / np.mean(sigmas)
    assert 0.7 <= ratio <= 1.3
    assert abs(np.mean(ests)) < 4 * np.mean(sigmas) / np.sqrt(100)


def test_experiments_are_reproducible(device):
    a = VirtualLab(device, seed=9, realism="full")
    b = VirtualLab(device, seed=9, realism="full")
    grid = np.linspace(-0.5, 0.5, 7)
    assert np.array_equal(a.resonator_scan(0, 1, 1.0, grid).y, b.resonator_scan(0, 1, 1.0, grid).y)
    assert a.ramsey_frequency(0, FluxProgram.single(0, 0.2)) == b.ramsey_frequency(0, FluxProgram.single(0, 0.2))
    assert VirtualLab(device, seed=10).calibration[0] != a.calibration[0]


def test_phase_scan_flat_without_crosstalk(device):
    dev = _with_x(_quiet(device), 0, 6, 0.0)
    lab = VirtualLab(dev, seed=0)
    rec = lab.phase_interference_scan(0, 6, 0.3, 0.5, 200.0, np.linspace(0, 2 * np.pi, 8, endpoint=False))
    assert np.ptp(rec.y) < 1e-12


def test_phase_scan_peak_to_peak_first_order(device):
    t, s, x = 0, 6, 1e-3
    dev = _with_x(_quiet(device), t, s, x)
    lab = VirtualLab(dev, seed=0)
    conv_t, conv_s = dev.flux_lines[t].ac_conversion(200.0), dev.flux_lines[s].ac_conversion(200.0)
    amp_a, amp_b = 0.3 * conv_t, 0.5 * conv_s
    rec = lab.phase_interference_scan(t, s, amp_a, amp_b, 200.0, np.linspace(0, 2 * np.pi, 64, endpoint=False))
    slope, _ = dynamics.slope_and_curvature(lab.response(t), 0.3)
    expected = 2 * abs(slope) * 1e3 * x * 0.5
    assert np.ptp(rec.y) == pytest.approx(expected, rel=2e-3)
    # extrema at theta = 0 and pi
    assert np.argmin(rec.y) == 0 and np.argmax(rec.y) == 32


def test_line_phase_offset_shifts_extremum(device):
    t, s, x = 0, 6, 1e-3
    dev = _with_x(_quiet(device), t, s, x)
    lines = list(dev.flux_lines)
    lines[s] = dataclasses.replace(lines[s], phase_offset=np.pi / 2)
    dev = dataclasses.replace(dev, flux_lines=lines)
    lab = VirtualLab(dev, seed=0)
    grid = np.linspace(0, 2 * np.pi, 64, endpoint=False)
    rec = lab.phase_interference_scan(t, s, 0.3, 0.5, 200.0, grid)
    assert grid[np.argmin(rec.y)] == pytest.approx(3 * np.pi / 2)


def test_frequency_out_of_range_propagates(device):
    with pytest.raises(FrequencyOutOfRange):
        VirtualLab(device).phase_interference_scan(0, 6, 0.3, 0.5, 700.0, [0.0])


def test_run_times_within_five_percent_of_targets(device):
    lab = VirtualLab(device, seed=0)
    from fluxtalk.estimators import ac_pair, dc_qubit_pair, dc_resonator_pair

    _, recs = dc_resonator_pair(lab, 0, 6)
    t_res = sum(r.metadata["elapsed_s"] for r in recs)
    _, recs = dc_qubit_pair(lab, 0, 6)
    t_qubit = sum(r.metadata["elapsed_s"] for r in recs)
    _, rec = ac_pair(lab, 0, 6, 200.0)
    t_ac = rec.metadata["elapsed_s"]
    assert t_res == pytest.approx(80, rel=0.05)
    assert t_qubit == pytest.approx(235, rel=0.05)
    assert t_ac == pytest.approx(385, rel=0.05)
    assert t_res < t_qubit < t_ac


def test_sampling_elapsed_formula():
    assert Sampling(100, 10.0, 2.0).elapsed(50) == pytest.approx(50 * 100 / 10_000 + 2.0)


def test_noise_model_validation():
    from fluxtalk.errors import ConfigError

    with pytest.raises(ConfigError):
        NoiseModel(ramsey_freq_sigma_static_mhz=-1)
    with pytest.raises(ConfigError):
        NoiseModel.from_dict({"bogus": 1})
    assert NoiseModel.from_dict(NoiseModel().to_dict()) == NoiseModel()
