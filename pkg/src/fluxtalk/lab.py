"""Simulated crosstalk experiments.

A :class:`VirtualLab` owns the true device, a random stream, and the
experimenter's *calibrated* DC volt-per-flux-quantum conversions, which differ
from the truth by ``noise.flux_conversion_rel_sigma``.  Requests in flux quanta
are turned into volts with the calibrated conversion; the device then turns
volts into flux with the true one.

Two realism levels exist for frequency measurements: ``"fast"`` adds Gaussian
noise of the configured sigma to the model frequency, ``"full"`` samples a
Ramsey fringe shot by shot and fits it.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import dynamics
from .device import Device, FluxProgram, LineDrive, Tone, dressed_resonator_freq, effective_flux, f01
from .errors import FitFailure
from .fitting import levenberg_marquardt

RAMSEY_DETUNING_MHZ = 2.0
_CALIBRATION_STREAM = 7919
# records need positive sigmas; noiseless runs report this floor instead of zero
_MIN_SIGMA = 1e-12


@dataclass
class ExperimentRecord:
    x: np.ndarray
    y: np.ndarray
    y_sigma: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.x, self.y, self.y_sigma = (np.asarray(v, dtype=float) for v in (self.x, self.y, self.y_sigma))
        if not (self.x.shape == self.y.shape == self.y_sigma.shape):
            raise ValueError("x, y and y_sigma must have equal lengths")
        if np.any(self.y_sigma <= 0):
            raise ValueError("y_sigma must be positive")

    def __len__(self):
        return len(self.x)

    def to_csv(self, path) -> None:
        """Write ``x,y,y_sigma`` rows plus a ``.json`` metadata sidecar."""
        path = Path(path)
        rows = ["x,y,y_sigma"] + [f"{a!r},{b!r},{c!r}" for a, b, c in zip(self.x.tolist(), self.y.tolist(), self.y_sigma.tolist())]
        path.write_text("\n".join(rows) + "\n")
        path.with_suffix(".json").write_text(json.dumps(self.metadata, indent=2, sort_keys=True) + "\n")

    @classmethod
    def from_csv(cls, path) -> "ExperimentRecord":
        path = Path(path)
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        meta = json.loads(path.with_suffix(".json").read_text())
        return cls(data[:, 0], data[:, 1], data[:, 2], meta)


@dataclass
class RamseyResult:
    f01_est: float  # GHz
    sigma: float  # MHz
    elapsed_s: float = 0.0


class VirtualLab:
    def __init__(self, device: Device, seed: int = 0, realism: str = "fast", calibration: np.ndarray | None = None,
                 stream: Sequence[int] = ()):
        if realism not in ("fast", "full"):
            raise ValueError(f"realism must be 'fast' or 'full', not {realism!r}")
        self.device = device
        self.noise = device.noise
        self.seed = int(seed)
        self.realism = realism
        self.rng = np.random.default_rng([self.seed, *stream])
        if calibration is None:
            cal_rng = np.random.default_rng([self.seed, _CALIBRATION_STREAM])
            true = np.array([line.dc_volts_per_phi0 for line in device.flux_lines])
            calibration = true * (1 + self.noise.flux_conversion_rel_sigma * cal_rng.standard_normal(device.n))
        self.calibration = np.asarray(calibration, dtype=float)
        self._responses: dict[int, dynamics.ModulationResponse] = {}

    def fork(self, *stream: int) -> "VirtualLab":
        """Independent random stream sharing this lab's calibration."""
        return VirtualLab(self.device, self.seed, self.realism, self.calibration, stream)

    def response(self, qubit: int) -> dynamics.ModulationResponse:
        if qubit not in self._responses:
            self._responses[qubit] = dynamics.fourier_coefficients(self.device.transmons[qubit])
        return self._responses[qubit]

    def volts(self, line: int, phi: float) -> float:
        """Voltage the experimenter applies to request ``phi`` flux quanta on ``line``."""
        return phi * self.calibration[line]

    # -- resonator method -------------------------------------------------

    def resonator_scan(self, target, adversary, adversary_bias: float, bias_grid) -> ExperimentRecord:
        """Dressed-resonator frequency (MHz) of ``target`` versus its own bias (V)."""
        dev = self.device
        t, a = dev.index(target), dev.index(adversary)
        bias_grid = np.asarray(bias_grid, dtype=float)
        v_adv = self.volts(a, adversary_bias)
        x_row = dev.network.x_dc[t]
        phi = bias_grid / dev.flux_lines[t].dc_volts_per_phi0 + x_row[a] * v_adv / dev.flux_lines[a].dc_volts_per_phi0
        f_r = dressed_resonator_freq(dev.resonators[t], dev.transmons[t], phi) * 1e3
        sigma = self.noise.resonator_fit_sigma_mhz
        y = f_r + sigma * self.rng.standard_normal(len(phi)) if sigma > 0 else f_r
        sampling = self.noise.sampling["dc_resonator"]
        meta = {
            "method": "dc_resonator", "target": dev.ids[t], "adversary": dev.ids[a],
            "adversary_bias_phi0": float(adversary_bias), "x_unit": "V", "y_unit": "MHz",
            "shots": sampling.shots_per_point, "elapsed_s": sampling.elapsed(len(phi)),
        }
        return ExperimentRecord(bias_grid, y, np.full(len(phi), max(sigma, _MIN_SIGMA)), meta)

    # -- Ramsey ------------------------------------------------------------

    def true_frequency(self, target: int, program: FluxProgram) -> float:
        """Model qubit frequency (GHz): static, or averaged under modulation."""
        eff = effective_flux(self.device.network, self.device.flux_lines, program, target)
        if not eff.tones:
            return float(f01(self.device.transmons[target], eff.dc))
        resp = self.response(target)
        if len(eff.tones) == 1:
            return dynamics.mean_frequency(resp, eff.tones[0].amp, eff.dc)
        return dynamics.mean_frequency_multitone(resp, eff.amplitudes, eff.dc)

    def ramsey_frequency(self, target, program: FluxProgram, method: str = "dc_qubit") -> RamseyResult:
        t = self.device.index(target)
        modulated = any(d.tones for d in program.lines.values())
        f_true = self.true_frequency(t, program)
        sampling = self.noise.sampling[method]
        elapsed = sampling.elapsed(self.noise.ramsey_delays)
        if self.realism == "fast":
            sigma = self.noise.ramsey_freq_sigma_mod_mhz if modulated else self.noise.ramsey_freq_sigma_static_mhz
            return RamseyResult(f_true + 1e-3 * sigma * self.rng.standard_normal(), sigma, elapsed)
        return self._ramsey_fringe(t, f_true, sampling.shots_per_point, elapsed)

    def _ramsey_fringe(self, t: int, f_true: float, shots: int, elapsed: float) -> RamseyResult:
        n = self.noise.ramsey_delays
        t2_ns = self.device.transmons[t].t2 * 1e3
        # drive sits a nominal 2 MHz above the qubit, jittered so the fringe
        # frequency is not known exactly in advance
        f_drive = f_true + 1e-3 * (RAMSEY_DETUNING_MHZ + self.rng.uniform(-0.2, 0.2))
        delta_true = (f_drive - f_true) * 1e3  # MHz
        dt = 1e3 / (8 * RAMSEY_DETUNING_MHZ)  # ns
        times = dt * np.arange(n)
        p = 0.5 * (1 + np.cos(2 * np.pi * delta_true * 1e-3 * times) * np.exp(-times / t2_ns))
        phat = self.rng.binomial(shots, p) / shots
        sig = np.sqrt(np.clip(phat * (1 - phat), 1.0 / shots, None) / shots)

        def residual(q):
            amp, off, delta, phase = q
            model = off + amp * np.exp(-times / t2_ns) * np.cos(2 * np.pi * delta * 1e-3 * times + phase)
            return (model - phat) / sig

        # coarse start from a zero-padded periodogram
        freqs = np.fft.rfftfreq(16 * n, dt * 1e-3)
        spec = np.abs(np.fft.rfft(phat - phat.mean(), 16 * n))
        delta0 = freqs[np.argmax(spec[1:]) + 1]
        res = levenberg_marquardt(residual, [0.5, 0.5, delta0, 0.0], steps=np.array([1e-6, 1e-6, 1e-6, 1e-6]))
        if not res.success or not np.isfinite(res.errors[2]) or abs(res.params[2] - delta0) > 1.0:
            raise FitFailure("Ramsey fringe fit did not converge")
        delta_fit, sigma = abs(res.params[2]), float(res.errors[2])
        return RamseyResult(f_drive - 1e-3 * delta_fit, sigma, elapsed)

    # -- qubit method ------------------------------------------------------

    def qubit_method_scan(self, target, adversary, center: float = 0.25, step: float = 0.02,
                          adversary_biases: Sequence[float] = (-1.0, 0.0, 1.0)):
        """Frequency of ``target`` (MHz) versus its own flux and versus the adversary's.

        Returns ``(self_record, adversary_record)``; x values are the requested
        flux in calibrated flux quanta.
        """
        dev = self.device
        t, a = dev.index(target), dev.index(adversary)

        def measure(phi_t, phi_a):
            lines = {t: LineDrive(self.volts(t, phi_t))}
            lines[a] = LineDrive(self.volts(a, phi_a))
            return self.ramsey_frequency(t, FluxProgram(lines, "volts"), "dc_qubit")

        records = []
        for axis, points in (("self", [center - step, center, center + step]), ("adversary", list(adversary_biases))):
            results = [measure(p, 0.0) if axis == "self" else measure(center, p) for p in points]
            meta = {
                "method": "dc_qubit", "axis": axis, "target": dev.ids[t], "adversary": dev.ids[a],
                "x_unit": "phi0", "y_unit": "MHz", "shots": self.noise.sampling["dc_qubit"].shots_per_point,
                "elapsed_s": float(sum(r.elapsed_s for r in results)),
            }
            records.append(ExperimentRecord(points, [r.f01_est * 1e3 for r in results], [max(r.sigma, _MIN_SIGMA) for r in results], meta))
        return tuple(records)

    # -- AC method ---------------------------------------------------------

    def parked_frequency(self, qubit: int) -> float:
        return float(f01(self.device.transmons[qubit], 0.0))

    def amplitude_sweep(self, qubit, amps_volts, freq: float) -> ExperimentRecord:
        """Mean shift (MHz) of ``qubit`` versus the amplitude (V) of a tone on its own line."""
        q = self.device.index(qubit)
        f_max = self.parked_frequency(q)
        ys, sig, elapsed = [], [], 0.0
        for v in amps_volts:
            prog = FluxProgram.single(q, tones=[Tone(float(v), freq)], unit="volts")
            r = self.ramsey_frequency(q, prog, "ac")
            ys.append((r.f01_est - f_max) * 1e3)
            sig.append(max(r.sigma, _MIN_SIGMA))
            elapsed += r.elapsed_s
        meta = {"method": "ac_calibration", "qubit": self.device.ids[q], "freq_mhz": float(freq),
                "x_unit": "V", "y_unit": "MHz", "elapsed_s": elapsed,
                "shots": self.noise.sampling["ac"].shots_per_point}
        return ExperimentRecord(np.asarray(amps_volts, dtype=float), ys, sig, meta)

    def phase_interference_scan(self, qa, qb, amp_a: float, amp_b: float, freq: float, phase_grid) -> ExperimentRecord:
        """Mean shift (MHz) of ``qa`` versus the requested phase of an equal-frequency tone on ``qb``'s line."""
        a, b = self.device.index(qa), self.device.index(qb)
        f_max = self.parked_frequency(a)
        ys, sig, elapsed = [], [], 0.0
        for theta in phase_grid:
            lines = {a: LineDrive(0.0, (Tone(amp_a, freq, 0.0),)), b: LineDrive(0.0, (Tone(amp_b, freq, float(theta)),))}
            r = self.ramsey_frequency(a, FluxProgram(lines, "volts"), "ac")
            ys.append((r.f01_est - f_max) * 1e3)
            sig.append(max(r.sigma, _MIN_SIGMA))
            elapsed += r.elapsed_s
        meta = {"method": "ac", "target": self.device.ids[a], "adversary": self.device.ids[b],
                "amp_a_V": float(amp_a), "amp_b_V": float(amp_b), "freq_mhz": float(freq),
                "x_unit": "rad", "y_unit": "MHz", "elapsed_s": elapsed,
                "shots": self.noise.sampling["ac"].shots_per_point}
        return ExperimentRecord(np.asarray(phase_grid, dtype=float), ys, sig, meta)
