"""Crosstalk estimation from experiment records.

Three routes to ``X = dPhi_target / dPhi_source``:

* resonator method -- global periodic fit of three resonator traces taken at
  source biases of -1, 0 and +1 flux quanta, then a line through the fitted
  phase offsets;
* qubit method -- ratio of the qubit-frequency slopes with respect to the
  source flux and the target's own flux near a quarter flux quantum;
* AC method -- amplitude of the mean-shift oscillation versus the relative
  phase of two equal-frequency tones, converted with amplitude calibrations.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, asdict
from functools import lru_cache
from typing import Sequence

import numpy as np

from . import dynamics
from .errors import (AmbiguousPhase, DegenerateTraces, FitFailure, InsufficientSpan, PairMismatch,
                     ZeroDenominator)
from .fitting import fit, fit_sinusoid, numeric_jacobian, weighted_line
from .lab import ExperimentRecord, VirtualLab

METHODS = ("dc_resonator", "dc_qubit", "ac")


@dataclass(frozen=True)
class CrosstalkEstimate:
    """Crosstalk from ``from_qubit`` (the biased line) onto ``to_qubit``."""

    from_qubit: str
    to_qubit: str
    value: float
    sigma: float
    method: str
    freq: float | None = None

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")
        if self.method == "ac" and self.freq is None:
            raise ValueError("AC estimates must carry a frequency")

    @property
    def value_pct(self) -> float:
        return 100 * self.value

    @property
    def sigma_pct(self) -> float:
        return 100 * self.sigma

    @property
    def pair(self) -> tuple[str, str]:
        return (self.from_qubit, self.to_qubit)


def flux_sensitivity(sigma_f_mhz: float, slope_mhz_per_phi0: float) -> float:
    """Flux resolution (phi0) of one frequency measurement at the given slope."""
    return sigma_f_mhz / abs(slope_mhz_per_phi0)


def wrap_offset(phi):
    """Map flux offsets into (-0.5, 0.5]."""
    return 0.5 - np.mod(0.5 - np.asarray(phi, dtype=float), 1.0)


# -- resonator method ------------------------------------------------------


@dataclass
class GlobalPeriodicFit:
    """Shared-shape fit of several resonator traces.

    ``shared`` holds (volts per phi0, f_bare GHz, g GHz, f01_max GHz,
    asymmetry); ``offsets`` the per-trace flux offsets in (-0.5, 0.5].
    """

    shared: np.ndarray
    offsets: np.ndarray
    cov: np.ndarray
    chi2: float
    dof: int

    @property
    def offset_cov(self) -> np.ndarray:
        k = len(self.offsets)
        return self.cov[-k:, -k:]

    @property
    def offset_sigmas(self) -> np.ndarray:
        return np.sqrt(np.diag(self.offset_cov))


def _stack(volts):
    v = np.concatenate(volts)
    trace = np.repeat(np.arange(len(volts)), [len(x) for x in volts])
    return v, trace


def _resonator_terms(params, v, trace, ec):
    c, f_bare, g, f_max, d = params[:5]
    phi = v / c + np.asarray(params[5:])[trace]
    cs, sn = np.cos(np.pi * phi), np.sin(np.pi * phi)
    u = cs * cs + d * d * sn * sn
    s = u**0.25
    delta = (f_max + ec) * s - ec - f_bare
    pull = g * g / delta - g * g * ec / (delta * (delta - ec))
    return phi, u, s, delta, pull


def resonator_model(params, volts, ec: float):
    """Dressed resonator frequency (MHz) for each trace, sharing all but the offset."""
    v, trace = _stack(volts)
    y = (params[1] + _resonator_terms(params, v, trace, ec)[4]) * 1e3
    return np.split(y, np.cumsum([len(x) for x in volts])[:-1])


def resonator_jacobian(params, volts, ec: float):
    """Analytic derivative of the stacked :func:`resonator_model` (MHz per parameter unit)."""
    v, trace = _stack(volts)
    return _jacobian_stacked(params, v, trace, ec)


def _jacobian_stacked(params, v, trace, ec):
    c, f_bare, g, f_max, d = params[:5]
    phi, u, s, delta, pull = _resonator_terms(params, v, trace, ec)
    dpull = -g * g / delta**2 + g * g * ec * (2 * delta - ec) / (delta**2 * (delta - ec) ** 2)
    ds_du = 0.25 * u**-0.75
    dphi = dpull * (f_max + ec) * ds_du * np.pi * (d * d - 1) * np.sin(2 * np.pi * phi)
    J = np.zeros((len(v), len(params)))
    J[:, 0] = -dphi * v / c**2
    J[:, 1] = 1 - dpull
    J[:, 2] = 2 * pull / g
    J[:, 3] = dpull * s
    J[:, 4] = dpull * (f_max + ec) * ds_du * 2 * d * np.sin(np.pi * phi) ** 2
    J[np.arange(len(v)), 5 + trace] = dphi
    return J * 1e3


def fit_global_periodic(records: Sequence[ExperimentRecord], guess: dict, restarts: int = 5) -> GlobalPeriodicFit:
    """Fit resonator traces with one shared dressed-resonator model and per-trace offsets.

    ``guess`` supplies starting values ``volts_per_phi0, f_bare, g, asymmetry``
    and the spectroscopy values ``f01_max`` and ``ec`` (GHz), which stay fixed:
    left free, f01_max and the asymmetry trade off along a nearly flat valley
    that the offsets do not depend on.
    """
    volts = [r.x for r in records]
    ys = np.concatenate([r.y for r in records])
    sig = np.concatenate([r.y_sigma for r in records])
    if all(np.ptp(r.y) < 3 * np.median(r.y_sigma) for r in records):
        raise DegenerateTraces("resonator traces show no flux dependence above the noise")
    ec, f_max = guess["ec"], guess["f01_max"]
    v, trace = _stack(volts)
    free = np.array([0, 1, 2, 4] + list(range(5, 5 + len(records))))

    def full(q):
        p = np.empty(len(q) + 1)
        p[free] = q
        p[3] = f_max
        return p

    def residual(q):
        p = full(q)
        if not 0 < p[4] < 1 or p[0] <= 0:
            return np.full_like(ys, 1e12)
        with np.errstate(all="ignore"):
            res = ((p[1] + _resonator_terms(p, v, trace, ec)[4]) * 1e3 - ys) / sig
        return res if np.all(np.isfinite(res)) else np.full_like(res, 1e12)

    def jac(q):
        with np.errstate(all="ignore"):
            J = _jacobian_stacked(full(q), v, trace, ec)[:, free] / sig[:, None]
        return np.nan_to_num(J)

    base = [guess["volts_per_phi0"], guess["f_bare"], guess["g"], guess.get("asymmetry", 0.75)]
    k = len(records)
    starts = []
    for d0, dc in [(0, 1.0), (0.08, 1.0), (-0.1, 1.0), (0.0, 1.02), (0.0, 0.98)][:restarts]:
        q = list(base)
        q[0] *= dc
        q[3] = float(np.clip(q[3] + d0, 0.3, 0.95))
        starts.append(q + [0.0] * k)
    best = None
    for q0 in starts:
        try:
            res = fit(residual, [q0], jac=jac)
        except FitFailure:
            continue
        if best is None or res.chi2 < best.chi2:
            best = res
        if res.reduced_chi2 < 1.5:
            break
    if best is None:
        raise FitFailure("global periodic fit failed from every start")
    p = full(best.params)
    p[5:] = wrap_offset(p[5:])
    cov = np.zeros((len(p), len(p)))
    cov[np.ix_(free, free)] = best.cov
    return GlobalPeriodicFit(p[:5], p[5:], cov, best.chi2, best.dof)


def resonator_guess(lab: VirtualLab, target: int) -> dict:
    """Starting values a lab would take from design and spectroscopy."""
    q = lab.device.transmons[target]
    r = lab.device.resonators[target]
    return {"volts_per_phi0": lab.calibration[target], "f_bare": r.f_bare, "g": r.g,
            "f01_max": float(np.sqrt(8 * q.ej_sum * q.ec) - q.ec), "ec": q.ec, "asymmetry": 0.75}


def fit_dc_resonator(records: Sequence[ExperimentRecord], guess: dict, conversion_rel_sigma: float = 0.0,
                     return_fit: bool = False):
    """Crosstalk from the slope of fitted phase offsets versus source bias."""
    biases = np.array([r.metadata["adversary_bias_phi0"] for r in records], dtype=float)
    if len(set(biases)) < 2:
        raise DegenerateTraces("need traces at two or more distinct source biases")
    g = fit_global_periodic(records, guess)
    # generalised least squares with the full offset covariance
    A = np.stack([np.ones_like(biases), biases], axis=1)
    C = g.offset_cov + 1e-30 * np.eye(len(biases))
    W = np.linalg.inv(C)
    cov = np.linalg.inv(A.T @ W @ A)
    _, slope = cov @ (A.T @ W @ g.offsets)
    sigma = np.sqrt(cov[1, 1] + (conversion_rel_sigma * slope) ** 2)
    meta = records[0].metadata
    est = CrosstalkEstimate(meta["adversary"], meta["target"], float(slope), float(sigma), "dc_resonator")
    return (est, g) if return_fit else est


def dc_resonator_pair(lab: VirtualLab, target, source, n_points: int = 81, span: float = 1.2,
                      biases=(-1.0, 0.0, 1.0)):
    t, s = lab.device.index(target), lab.device.index(source)
    grid = np.linspace(-span / 2, span / 2, n_points) * lab.calibration[t]
    records = [lab.resonator_scan(t, s, b, grid) for b in biases]
    return fit_dc_resonator(records, resonator_guess(lab, t), lab.noise.flux_conversion_rel_sigma), records


# -- qubit method ----------------------------------------------------------


def fit_dc_qubit(self_record: ExperimentRecord, adversary_record: ExperimentRecord,
                 conversion_rel_sigma: float = 0.0) -> CrosstalkEstimate:
    """Ratio of the frequency slopes versus source flux and versus own flux.

    Both flux axes carry an independent conversion error of
    ``conversion_rel_sigma``, which adds to the statistical error.
    """
    _, m_self, cov_self = weighted_line(self_record.x, self_record.y, self_record.y_sigma)
    _, m_adv, cov_adv = weighted_line(adversary_record.x, adversary_record.y, adversary_record.y_sigma)
    s_self, s_adv = np.sqrt(cov_self[1, 1]), np.sqrt(cov_adv[1, 1])
    if abs(m_self) < 10 * s_self:
        raise ZeroDenominator(f"self slope {m_self:.4g} MHz/phi0 not resolved (sigma {s_self:.3g})")
    x = m_adv / m_self
    var = (s_adv / m_self) ** 2 + (x * s_self / m_self) ** 2 + 2 * (conversion_rel_sigma * x) ** 2
    meta = adversary_record.metadata
    return CrosstalkEstimate(meta["adversary"], meta["target"], float(x), float(np.sqrt(var)), "dc_qubit")


def dc_qubit_pair(lab: VirtualLab, target, source, step: float = 0.02):
    rec_self, rec_adv = lab.qubit_method_scan(target, source, step=step)
    return fit_dc_qubit(rec_self, rec_adv, lab.noise.flux_conversion_rel_sigma), (rec_self, rec_adv)


# -- AC method -------------------------------------------------------------


# Harmonics of the normalised spectrum fall below 1e-9 by n = 24 for d >= 0.3.
SHAPE_HARMONICS = 24


@lru_cache(maxsize=256)
def _shape_cached(d: float) -> dynamics.ModulationResponse:
    return dynamics.fourier_coefficients(
        lambda p: (np.cos(np.pi * p) ** 2 + d * d * np.sin(np.pi * p) ** 2) ** 0.25, SHAPE_HARMONICS)


def _shape_response(d: float) -> dynamics.ModulationResponse:
    # normalised spectrum s(phi) = (cos^2 + d^2 sin^2)^(1/4); f01 = (f_max + ec) s - ec
    return _shape_cached(float(min(abs(d), 0.999)))


@dataclass
class AmplitudeCalibration:
    """Fit of mean shift versus drive amplitude.

    ``params`` are (volts per phi0 at the tone frequency, f01_max + ec in GHz,
    asymmetry) with covariance ``cov``.
    """

    params: np.ndarray
    cov: np.ndarray
    freq: float
    chi2: float = 0.0

    @property
    def volts_per_phi0(self) -> float:
        return float(self.params[0])

    @property
    def volts_per_phi0_sigma(self) -> float:
        return float(np.sqrt(self.cov[0, 0]))

    @property
    def response(self) -> dynamics.ModulationResponse:
        scale = self.params[1]
        shape = _shape_response(self.params[2])
        return dynamics.ModulationResponse(scale * shape.nu0, scale * shape.nu)

    @staticmethod
    def _model_detuning(params, volts):
        c, scale, d = params
        shape = _shape_response(d)
        return scale * dynamics.mean_detuning(shape, np.asarray(volts) / c) * 1e3

    @staticmethod
    def _model_slope(params, volts):
        c, scale, d = params
        return scale * dynamics.slope_and_curvature(_shape_response(d), np.asarray(volts) / c)[0] * 1e3

    def mean_detuning(self, volts):
        """Model mean shift (MHz) at drive amplitude ``volts``."""
        return self._model_detuning(self.params, volts)

    def slope(self, volts) -> tuple[float, float]:
        """d(mean frequency)/d(amplitude) in MHz/phi0 at ``volts``, with its 1-sigma error."""
        value = float(self._model_slope(self.params, volts))
        grad = numeric_jacobian(lambda p: np.atleast_1d(self._model_slope(p, volts)), self.params,
                                steps=np.array([1e-7, 1e-7, 1e-6]))[0]
        return value, float(np.sqrt(max(grad @ self.cov @ grad, 0.0)))

    def sweet_spot_volts(self) -> float:
        return dynamics.find_sweet_spot(_shape_response(self.params[2])) * self.volts_per_phi0

    def most_sensitive_volts(self) -> float:
        """Drive amplitude (V) of steepest mean-frequency slope below the sweet spot."""
        shape = _shape_response(self.params[2])
        grid = np.linspace(0, dynamics.find_sweet_spot(shape), 2001)
        slope, _ = dynamics.slope_and_curvature(shape, grid)
        return float(grid[np.argmax(np.abs(slope))] * self.volts_per_phi0)


def fit_amplitude_calibration(record: ExperimentRecord, guess: dict) -> AmplitudeCalibration:
    """Fit mean shift versus amplitude for the conversion and spectrum shape.

    ``guess`` holds starting values ``volts_per_phi0``, ``scale`` (f01_max +
    ec, GHz) and ``asymmetry``.
    """
    volts, y, sig = record.x, record.y, record.y_sigma

    def residual(p):
        if not (0 < abs(p[2]) < 1) or p[0] <= 0:
            return np.full_like(y, 1e12)
        return (AmplitudeCalibration._model_detuning(p, volts) - y) / sig

    def jac(p):
        c, scale, d = p
        shape = _shape_response(d)
        phi = volts / c
        base = dynamics.mean_detuning(shape, phi) * 1e3
        slope = dynamics.slope_and_curvature(shape, phi)[0] * 1e3
        h = 1e-6
        dd = (AmplitudeCalibration._model_detuning([c, scale, d + h], volts)
              - AmplitudeCalibration._model_detuning([c, scale, d - h], volts)) / (2 * h)
        return np.stack([-scale * slope * phi / c, base, dd], axis=1) / sig[:, None]

    # the deepest point locates the sweet spot; use it to seed the conversion
    c0 = guess["volts_per_phi0"]
    i_min = int(np.argmin(y))
    starts = [[c0, guess["scale"], guess.get("asymmetry", 0.75)]]
    if 0 < i_min < len(y) - 1:
        d0 = guess.get("asymmetry", 0.75)
        ss = dynamics.find_sweet_spot(_shape_response(d0))
        starts.insert(0, [volts[i_min] / ss, guess["scale"], d0])
    starts += [[s[0], s[1], 0.6] for s in starts] + [[s[0], s[1], 0.85] for s in starts]
    res = None
    for p0 in starts:
        try:
            trial = fit(residual, [p0], jac=jac)
        except FitFailure:
            continue
        if res is None or trial.chi2 < res.chi2:
            res = trial
        if res.reduced_chi2 < 1.5:
            break
    if res is None:
        raise FitFailure("amplitude calibration fit failed from every start")
    if res.reduced_chi2 > 5:
        raise FitFailure(f"amplitude calibration fit is poor (reduced chi2 {res.reduced_chi2:.1f})")
    calib = AmplitudeCalibration(res.params, res.cov, float(record.metadata.get("freq_mhz", np.nan)), res.chi2)
    if volts.max() < 0.8 * calib.sweet_spot_volts():
        raise InsufficientSpan(f"sweep stops at {volts.max():.3g} V, sweet spot near {calib.sweet_spot_volts():.3g} V")
    return calib


def calibration_guess(lab: VirtualLab, qubit: int) -> dict:
    q = lab.device.transmons[qubit]
    return {"volts_per_phi0": lab.calibration[qubit], "scale": float(np.sqrt(8 * q.ej_sum * q.ec)), "asymmetry": 0.75}


def calibrate_line(lab: VirtualLab, qubit, freq: float, n_points: int = 31, max_phi0: float = 0.8) -> AmplitudeCalibration:
    q = lab.device.index(qubit)
    # the AC conversion exceeds the DC one by up to ~30 % across the band
    volts = np.linspace(0, max_phi0 * 1.15, n_points) * lab.calibration[q]
    record = lab.amplitude_sweep(q, volts, freq)
    return fit_amplitude_calibration(record, calibration_guess(lab, q))


def fit_ac_crosstalk(record: ExperimentRecord, calib_a: AmplitudeCalibration, calib_b: AmplitudeCalibration,
                     amp_a: float | None = None, amp_b: float | None = None,
                     allow_ambiguous: bool = False) -> CrosstalkEstimate:
    """Crosstalk from the interference amplitude of a phase scan.

    The sign follows the fitted phase: a response in phase with the zero
    requested phase counts as positive crosstalk.  With ``allow_ambiguous`` a
    response below twice its error is projected on the zero-phase axis
    instead of raising :class:`AmbiguousPhase`.
    """
    meta = record.metadata
    amp_a = meta["amp_a_V"] if amp_a is None else amp_a
    amp_b = meta["amp_b_V"] if amp_b is None else amp_b
    c, a, theta0, cov = fit_sinusoid(record.x, record.y, record.y_sigma)
    sigma_a = float(np.sqrt(cov[1, 1]))
    slope, slope_sigma = calib_a.slope(amp_a)
    phi_b = amp_b / calib_b.volts_per_phi0
    scale = slope * phi_b
    if a < 2 * sigma_a:
        if not allow_ambiguous:
            raise AmbiguousPhase(f"interference amplitude {a:.3g} MHz below 2 sigma ({2 * sigma_a:.3g} MHz)")
        signed = a * np.cos(theta0)
        sigma_signed = sigma_a
    else:
        signed = a * np.sign(np.cos(theta0)) if np.cos(theta0) != 0 else a
        sigma_signed = sigma_a
    x = signed / scale
    rel_b = calib_b.volts_per_phi0_sigma / calib_b.volts_per_phi0
    var = (sigma_signed / scale) ** 2 + x**2 * ((slope_sigma / slope) ** 2 + rel_b**2)
    return CrosstalkEstimate(meta["adversary"], meta["target"], float(x), float(np.sqrt(var)), "ac", float(meta["freq_mhz"]))


def phase_fit(record: ExperimentRecord):
    """``(offset, amplitude, phase, cov)`` of the interference sinusoid."""
    return fit_sinusoid(record.x, record.y, record.y_sigma)


def ac_pair(lab: VirtualLab, target, source, freq: float, n_phases: int = 16, amp_b_phi0: float = 0.5,
            calibrations: dict | None = None, allow_ambiguous: bool = True):
    """Calibrate both lines at ``freq``, run the phase scan and estimate the AC crosstalk."""
    t, s = lab.device.index(target), lab.device.index(source)
    calibrations = {} if calibrations is None else calibrations
    for q in (t, s):
        if (q, freq) not in calibrations:
            calibrations[(q, freq)] = calibrate_line(lab, q, freq)
    cal_t, cal_s = calibrations[(t, freq)], calibrations[(s, freq)]
    amp_a = cal_t.most_sensitive_volts()
    amp_b = amp_b_phi0 * cal_s.volts_per_phi0
    phases = 2 * np.pi * np.arange(n_phases) / n_phases
    record = lab.phase_interference_scan(t, s, amp_a, amp_b, freq, phases)
    return fit_ac_crosstalk(record, cal_t, cal_s, allow_ambiguous=allow_ambiguous), record


def ac_crosstalk_spectrum(lab: VirtualLab, target, source, freqs: Sequence[float], **kw) -> list[CrosstalkEstimate]:
    out = []
    calibrations: dict = {}
    for k, f in enumerate(freqs):
        sub = lab.fork(lab.device.index(target), lab.device.index(source), 3, k)
        est, _ = ac_pair(sub, target, source, f, calibrations=calibrations, **kw)
        out.append(est)
    return out


# -- matrices and comparison -----------------------------------------------


def _pair_task(args):
    lab, method, t, s, freq, calibrations = args
    code = METHODS.index(method)
    sub = lab.fork(t, s, code)
    if method == "dc_resonator":
        return dc_resonator_pair(sub, t, s)[0]
    if method == "dc_qubit":
        return dc_qubit_pair(sub, t, s)[0]
    return ac_pair(sub, t, s, freq, calibrations=dict(calibrations))[0]


def _calibration_task(args):
    lab, q, freq = args
    return calibrate_line(lab.fork(q, 1000), q, freq)


def _map(fn, tasks, jobs):
    if jobs > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(jobs) as pool:
            return list(pool.map(fn, tasks))
    return [fn(task) for task in tasks]


def measure_matrix(lab: VirtualLab, method: str, pairs=None, freq: float = 200.0, jobs: int = 1) -> dict:
    """Estimates for every ordered pair ``(target, source)`` index, keyed by ``(from, to)`` ids.

    Each pair draws from its own random stream, so results do not depend on
    ``jobs`` or on the pair order.  The AC method calibrates each involved
    line once and shares the calibration between pairs.
    """
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}")
    n = lab.device.n
    if pairs is None:
        pairs = [(t, s) for t in range(n) for s in range(n) if t != s]
    calibrations = {}
    if method == "ac":
        qubits = sorted({q for pair in pairs for q in pair})
        cals = _map(_calibration_task, [(lab, q, freq) for q in qubits], jobs)
        calibrations = {(q, freq): c for q, c in zip(qubits, cals)}
    tasks = [(lab, method, t, s, freq, calibrations) for t, s in pairs]
    return {est.pair: est for est in _map(_pair_task, tasks, jobs)}


@dataclass
class MethodComparison:
    pairs: list
    normalized: np.ndarray
    mean: float
    rms: float

    def histogram(self, bins=np.arange(-4.0, 4.5, 0.5)):
        counts, edges = np.histogram(np.clip(self.normalized, bins[0], bins[-1]), bins=bins)
        return counts, edges


def compare_methods(a: dict, b: dict) -> MethodComparison:
    """Differences between two estimate sets divided by their errors in quadrature."""
    if set(a) != set(b):
        raise PairMismatch(f"pair sets differ: {sorted(set(a) ^ set(b))[:5]}")
    pairs = sorted(a)
    z = np.array([(a[p].value - b[p].value) / np.hypot(a[p].sigma, b[p].sigma) for p in pairs])
    return MethodComparison(pairs, z, float(z.mean()) if len(z) else 0.0, float(np.sqrt(np.mean(z**2))) if len(z) else 0.0)


def estimates_to_csv(estimates) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["from", "to", "method", "freq_mhz", "value_pct", "sigma_pct"])
    for e in estimates:
        w.writerow([e.from_qubit, e.to_qubit, e.method, "" if e.freq is None else repr(e.freq),
                    repr(e.value_pct), repr(e.sigma_pct)])
    return buf.getvalue()


def matrix_document(estimates: dict, ids: Sequence[str]) -> dict:
    """Row = affected qubit, column = biased line; values and errors in percent."""
    n = len(ids)
    value = [[None] * n for _ in range(n)]
    sigma = [[None] * n for _ in range(n)]
    methods = set()
    for (src, dst), e in estimates.items():
        i, j = ids.index(dst), ids.index(src)
        value[i][j], sigma[i][j] = e.value_pct, e.sigma_pct
        methods.add(e.method)
    return {"qubits": list(ids), "rows": "to", "columns": "from", "unit": "percent",
            "methods": sorted(methods), "value_pct": value, "sigma_pct": sigma}


def matrix_grid_csv(estimates: dict, ids: Sequence[str]) -> str:
    """N x N grid of values in percent; the diagonal is left empty."""
    doc = matrix_document(estimates, ids)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["to\\from"] + list(ids))
    for i, row in enumerate(doc["value_pct"]):
        w.writerow([ids[i]] + ["" if v is None else repr(v) for v in row])
    return buf.getvalue()


def estimate_to_dict(e: CrosstalkEstimate) -> dict:
    return asdict(e)


def dumps(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"
