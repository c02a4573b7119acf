import dataclasses

import numpy as np
import pytest

from fluxtalk.device import FluxLine
from fluxtalk.errors import AmbiguousPhase, DegenerateTraces, InsufficientSpan, PairMismatch, ZeroDenominator
from fluxtalk.estimators import (CrosstalkEstimate, ac_crosstalk_spectrum, ac_pair, calibrate_line, calibration_guess,
                                 compare_methods, dc_qubit_pair, dc_resonator_pair, estimates_to_csv,
                                 fit_ac_crosstalk, fit_amplitude_calibration, fit_dc_qubit, fit_dc_resonator,
                                 flux_sensitivity, matrix_document, matrix_grid_csv, measure_matrix, phase_fit,
                                 resonator_guess, wrap_offset)
from fluxtalk.lab import ExperimentRecord, VirtualLab
from fluxtalk.synthetic import random_device


def _quiet(device):
    noise = dataclasses.replace(device.noise, ramsey_freq_sigma_static_mhz=0.0, ramsey_freq_sigma_mod_mhz=0.0,
                                resonator_fit_sigma_mhz=0.0, flux_conversion_rel_sigma=0.0)
    return dataclasses.replace(device, noise=noise)


def _with_x(device, t, s, x, ac=None):
    net = dataclasses.replace(device.network, x_dc=device.network.x_dc.copy(), x_ac=dict(device.network.x_ac))
    net.x_dc[t, s] = x
    net.x_ac.pop((t, s), None)
    if ac is not None:
        net.x_ac[(t, s)] = tuple(np.asarray(v, dtype=float) for v in ac)
    return dataclasses.replace(device, network=net)


def _pair(device):
    return device.index("Q0"), device.index("Q12")


# -- generic pieces ----------------------------------------------------------


def test_estimate_invariants():
    with pytest.raises(ValueError):
        CrosstalkEstimate("Q1", "Q0", 0.01, 0.0, "dc_qubit")
    with pytest.raises(ValueError):
        CrosstalkEstimate("Q1", "Q0", 0.01, 1e-4, "ac")
    with pytest.raises(ValueError):
        CrosstalkEstimate("Q1", "Q0", 0.01, 1e-4, "magic")


def test_wrap_offset_interval():
    assert wrap_offset(0.5) == 0.5
    assert wrap_offset(-0.5) == 0.5
    assert wrap_offset(0.75) == pytest.approx(-0.25)
    assert np.all(np.abs(wrap_offset(np.linspace(-3, 3, 101))) <= 0.5)


def test_flux_sensitivity_numbers():
    assert flux_sensitivity(0.01, 2000) == pytest.approx(5e-6, rel=1e-12)
    assert flux_sensitivity(0.05, 900) == pytest.approx(55.6e-6, rel=1e-2)


# -- resonator method ---------------------------------------------------------


def test_resonator_noiseless_recovery(device):
    t, s = _pair(device)
    dev = _with_x(_quiet(device), t, s, 0.0352)
    est, _ = dc_resonator_pair(VirtualLab(dev, seed=0), t, s)
    assert abs(est.value - 0.0352) <= 1e-4
    assert est.method == "dc_resonator" and est.pair == ("Q12", "Q0")


def test_resonator_recovers_three_and_a_half_percent(device):
    t, s = _pair(device)
    dev = _with_x(device, t, s, 0.0352)
    ests = [dc_resonator_pair(VirtualLab(dev, seed=k), t, s)[0] for k in range(20)]
    assert np.mean([abs(e.value - 0.0352) < 3 * e.sigma for e in ests]) >= 0.9
    assert all(e.sigma <= 5e-4 for e in ests)


def test_resonator_zero_crosstalk(device):
    t, s = _pair(device)
    dev = _with_x(device, t, s, 0.0)
    ests = [dc_resonator_pair(VirtualLab(dev, seed=k), t, s)[0] for k in range(40)]
    assert np.mean([abs(e.value) < 2 * e.sigma for e in ests]) >= 0.85
    # slope over biases -1, 0, +1 has sigma offset_sigma / sqrt(2)
    offset_sigma = np.mean([e.sigma for e in ests]) * np.sqrt(2)
    assert 80e-6 <= offset_sigma <= 150e-6


def test_resonator_fit_shares_shape(device):
    t, s = _pair(device)
    lab = VirtualLab(device, seed=1)
    _, recs = dc_resonator_pair(lab, t, s)
    _, g = fit_dc_resonator(recs, resonator_guess(lab, t), return_fit=True)
    assert len(g.offsets) == 3 and g.shared.shape == (5,)
    assert np.allclose(g.cov, g.cov.T)
    assert np.all(np.linalg.eigvalsh(g.cov) > -1e-12 * np.abs(g.cov).max())
    assert np.all(np.abs(g.offsets) <= 0.5)


def test_resonator_degenerate_traces(device):
    lab = VirtualLab(device, seed=1)
    grid = np.linspace(-0.6, 0.6, 41)
    recs = [lab.resonator_scan(0, 1, 0.0, grid) for _ in range(3)]
    with pytest.raises(DegenerateTraces):
        fit_dc_resonator(recs, resonator_guess(lab, 0))


# -- qubit method ----------------------------------------------------------------


def test_qubit_recovers_three_and_a_half_percent(device):
    t, s = _pair(device)
    dev = _with_x(device, t, s, 0.0355)
    ests = [dc_qubit_pair(VirtualLab(dev, seed=k), t, s)[0] for k in range(40)]
    assert np.mean([abs(e.value - 0.0355) < 3 * e.sigma for e in ests]) >= 0.9
    assert all(e.sigma <= 4e-4 for e in ests)


def _qubit_records(self_y, adv_y, sigma=0.01):
    meta = {"target": "Q0", "adversary": "Q1"}
    return (ExperimentRecord([0.23, 0.25, 0.27], self_y, [sigma] * 3, meta),
            ExperimentRecord([-1.0, 0.0, 1.0], adv_y, [sigma] * 3, meta))


def test_qubit_zero_numerator():
    est = fit_dc_qubit(*_qubit_records([4000.0, 3960.0, 3920.0], [3960.0] * 3))
    assert est.value == 0.0


def test_qubit_ratio_and_propagation():
    est = fit_dc_qubit(*_qubit_records([4040.0, 4000.0, 3960.0], [4000.0 + 2000 * 0.01, 4000.0, 4000 - 2000 * 0.01]))
    assert est.value == pytest.approx(0.01)
    # both slopes have sigma 0.01/sqrt(2) per unit lever
    s_self, s_adv = 0.01 / np.sqrt(2) / 0.02, 0.01 / np.sqrt(2)
    expected = np.hypot(s_adv / 2000, 0.01 * s_self / 2000)
    assert est.sigma == pytest.approx(expected, rel=1e-9)


def test_qubit_zero_denominator():
    with pytest.raises(ZeroDenominator):
        fit_dc_qubit(*_qubit_records([4000.0, 4000.001, 4000.0], [4000.0] * 3))


# -- round trip over planted values ----------------------------------------------------

ROUND_TRIP = [(m, x) for m in ("dc_resonator", "dc_qubit") for x in (1e-4, 1e-3, 1e-2, 5e-2)]


def _round_trip(device, method, x, seeds=100):
    t, s = 0, 6
    dev = _with_x(device, t, s, x)
    fn = dc_resonator_pair if method == "dc_resonator" else dc_qubit_pair
    ests = [fn(VirtualLab(dev, seed=k), t, s)[0] for k in range(seeds)]
    values = np.array([e.value for e in ests])
    sigmas = np.array([e.sigma for e in ests])
    return np.mean(np.abs(values - x) < 3 * sigmas), np.std(values) / np.mean(sigmas)


@pytest.mark.parametrize("method,x", [
    pytest.param(m, x, marks=pytest.mark.xfail(strict=True, reason="uncorrected f01 nonlinearity biases the qubit method at 5%"))
    if (m, x) == ("dc_qubit", 5e-2) else (m, x)
    for m, x in ROUND_TRIP
])
def test_round_trip_coverage(device, method, x):
    coverage, _ = _round_trip(device, method, x)
    assert coverage >= 0.95


@pytest.mark.parametrize("method,x", ROUND_TRIP)
def test_sigma_honesty(device, method, x):
    _, ratio = _round_trip(device, method, x)
    assert 0.7 <= ratio <= 1.4


def test_qubit_nonlinearity_bias_is_systematic(device):
    # the 5% failure above is a bias, not noise: it survives averaging
    t, s = 0, 6
    dev = _with_x(_quiet(device), t, s, 0.05)
    est, _ = dc_qubit_pair(VirtualLab(dev, seed=0), t, s)
    assert est.value < 0.05 and abs(est.value - 0.05) > 5e-4


def test_asymmetric_matrix_stays_asymmetric():
    x = np.eye(3)
    x[0, 1], x[1, 0] = 0.03, 0.002
    dev = random_device(3, seed=5, x_dc=x)
    lab = VirtualLab(dev, seed=1)
    m = measure_matrix(lab, "dc_qubit", pairs=[(0, 1), (1, 0)])
    a, b = m[("Q2", "Q0")], m[("Q0", "Q2")]
    assert abs(a.value - 0.03) < 3 * a.sigma and abs(b.value - 0.002) < 3 * b.sigma


# -- AC method ---------------------------------------------------------------------


def _unit_line_device(device, q):
    lines = list(device.flux_lines)
    lines[q] = FluxLine(lines[q].qubit_id, 1.0, [50.0, 500.0], [1.0, 1.0])
    return dataclasses.replace(device, flux_lines=lines)


def test_calibration_noiseless_round_trip(device):
    dev = _unit_line_device(_quiet(device), 0)
    cal = calibrate_line(VirtualLab(dev, seed=0), 0, 200.0)
    assert cal.volts_per_phi0 == pytest.approx(1.0, abs=1e-4)


def test_calibration_axis_rescaling(device):
    dev = _unit_line_device(_quiet(device), 0)
    lab = VirtualLab(dev, seed=0)
    rec = lab.amplitude_sweep(0, np.linspace(0, 0.9, 31), 200.0)
    base = fit_amplitude_calibration(rec, calibration_guess(lab, 0))
    stretched = dataclasses.replace(rec, x=2 * rec.x)
    guess = dict(calibration_guess(lab, 0), volts_per_phi0=2.0)
    cal2 = fit_amplitude_calibration(stretched, guess)
    assert cal2.volts_per_phi0 == pytest.approx(2 * base.volts_per_phi0, rel=1e-6)
    assert np.allclose(cal2.mean_detuning(2 * rec.x), base.mean_detuning(rec.x), atol=1e-6)


def test_calibration_insufficient_span(device):
    dev = _unit_line_device(_quiet(device), 0)
    lab = VirtualLab(dev, seed=0)
    rec = lab.amplitude_sweep(0, np.linspace(0, 0.4, 21), 200.0)
    with pytest.raises(InsufficientSpan):
        fit_amplitude_calibration(rec, calibration_guess(lab, 0))


def test_calibration_slope_at_sweet_spot_vanishes(device):
    cal = calibrate_line(VirtualLab(_quiet(device), seed=0), 0, 200.0)
    assert abs(cal.slope(cal.sweet_spot_volts())[0]) < 1e-3


def test_ac_recovers_one_percent(device):
    t, s = _pair(device)
    dev = _with_x(device, t, s, 0.0, ac=([50.0, 500.0], [0.01, 0.01]))
    ests = [ac_pair(VirtualLab(dev, seed=k), t, s, 200.0)[0] for k in range(20)]
    assert np.mean([abs(e.value - 0.01) < 3 * e.sigma for e in ests]) >= 0.9
    assert all(e.freq == 200.0 and e.method == "ac" for e in ests)


def test_ac_zero_crosstalk_gives_null_amplitude(device):
    t, s = _pair(device)
    dev = _with_x(device, t, s, 0.0)
    zs = []
    for k in range(20):
        est, rec = ac_pair(VirtualLab(dev, seed=k), t, s, 200.0)
        zs.append(est.value / est.sigma)
    assert np.mean(np.abs(zs) < 3) >= 0.9
    with pytest.raises(AmbiguousPhase):
        lab = VirtualLab(dev, seed=0)
        cal_t, cal_s = calibrate_line(lab, t, 200.0), calibrate_line(lab, s, 200.0)
        _, rec = ac_pair(lab, t, s, 200.0, calibrations={(t, 200.0): cal_t, (s, 200.0): cal_s})
        fit_ac_crosstalk(rec, cal_t, cal_s)


def test_ac_line_phase_offset(device):
    t, s = _pair(device)
    base = _with_x(_quiet(device), t, s, 0.0, ac=([50.0, 500.0], [0.01, 0.01]))
    lines = list(base.flux_lines)
    lines[s] = dataclasses.replace(lines[s], phase_offset=0.3)
    shifted = dataclasses.replace(base, flux_lines=lines)
    e0, r0 = ac_pair(VirtualLab(base, seed=0), t, s, 200.0)
    e1, r1 = ac_pair(VirtualLab(shifted, seed=0), t, s, 200.0)
    th0, th1 = phase_fit(r0)[2], phase_fit(r1)[2]
    assert np.angle(np.exp(1j * (th0 - th1))) == pytest.approx(0.3, abs=1e-6)
    assert e1.value == pytest.approx(e0.value, rel=1e-6)


def test_ac_spectrum_flat_and_bump(device):
    t, s = _pair(device)
    freqs = [100.0, 200.0, 300.0, 400.0]
    flat = _with_x(device, t, s, 0.0, ac=([50.0, 500.0], [0.02, 0.02]))
    bumpy = _with_x(device, t, s, 0.0, ac=([50.0, 300.0, 400.0, 500.0], [0.02, 0.02, 0.03, 0.02]))
    for dev, table in ((flat, lambda f: 0.02), (bumpy, lambda f: np.interp(f, [50, 300, 400, 500], [0.02, 0.02, 0.03, 0.02]))):
        ests = ac_crosstalk_spectrum(VirtualLab(dev, seed=3), t, s, freqs)
        assert [e.freq for e in ests] == freqs
        for e in ests:
            assert abs(e.value - table(e.freq)) < 3 * e.sigma


# -- comparison and outputs ------------------------------------------------------------


def _est(pair, value, sigma, method="dc_qubit"):
    return CrosstalkEstimate(pair[0], pair[1], value, sigma, method)


def test_compare_identical_is_zero():
    a = {("Q1", "Q0"): _est(("Q1", "Q0"), 0.01, 1e-4), ("Q0", "Q1"): _est(("Q0", "Q1"), 0.002, 1e-4)}
    cmp = compare_methods(a, a)
    assert np.all(cmp.normalized == 0) and cmp.rms == 0


def test_compare_rms_near_one_for_consistent_data():
    rng = np.random.default_rng(0)
    pairs = [(f"Q{i}", f"Q{j}") for i in range(20) for j in range(20) if i != j]
    a = {p: _est(p, 0.01 + 1e-4 * rng.standard_normal(), 1e-4) for p in pairs}
    b = {p: _est(p, 0.01 + 2e-4 * rng.standard_normal(), 2e-4, "dc_resonator") for p in pairs}
    assert compare_methods(a, b).rms == pytest.approx(1.0, abs=0.08)
    inflated = {p: dataclasses.replace(e, sigma=10 * e.sigma) for p, e in b.items()}
    assert compare_methods(a, inflated).rms < 1


def test_compare_pair_mismatch():
    a = {("Q1", "Q0"): _est(("Q1", "Q0"), 0.01, 1e-4)}
    b = {("Q2", "Q0"): _est(("Q2", "Q0"), 0.01, 1e-4)}
    with pytest.raises(PairMismatch):
        compare_methods(a, b)


def test_matrix_outputs():
    dev = random_device(3, seed=2)
    m = measure_matrix(VirtualLab(dev, seed=0), "dc_qubit")
    assert len(m) == 6
    csv = estimates_to_csv(m.values()).splitlines()
    assert csv[0] == "from,to,method,freq_mhz,value_pct,sigma_pct"
    assert len(csv) == 7
    grid = matrix_grid_csv(m, dev.ids).splitlines()
    assert len(grid) == 4 and grid[1].split(",")[1] == ""
    doc = matrix_document(m, dev.ids)
    assert doc["qubits"] == dev.ids and doc["value_pct"][0][0] is None


def test_matrix_parallel_matches_serial():
    dev = random_device(3, seed=2)
    a = measure_matrix(VirtualLab(dev, seed=4), "dc_resonator")
    b = measure_matrix(VirtualLab(dev, seed=4), "dc_resonator", jobs=2)
    assert a == b


def test_matrix_rejects_unknown_method(device):
    with pytest.raises(ValueError):
        measure_matrix(VirtualLab(device), "telepathy")
