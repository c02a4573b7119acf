"""Parametric CZ gates under flux crosstalk.

The gate is modelled in the rotating frame of the {|11>, |Q>} pair, where
|Q> is |02> (CZ02, tunable qubit doubly excited) or |20> (CZ20).  A
calibrated gate has both levels degenerate and runs for half a Rabi period of
the effective coupling, which returns |11> with a -1 phase.  Crosstalk enters
as three perturbations:

* ``delta_f01`` -- shift of the tunable qubit's mean frequency (MHz);
* ``delta_mean_shift`` -- shift of E(|11>) - E(|Q>) (MHz); this is
  ``-delta_f01`` for CZ02 and ``+delta_f01`` for CZ20;
* ``delta_g`` -- change of the effective coupling (MHz).

Basis order is |00>, |01>, |10>, |11> with the second label the tunable
qubit; frequencies are ordinary (MHz), times in ns.
"""

from __future__ import annotations

import csv
import io
import itertools
import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from scipy.linalg import expm
from scipy.optimize import minimize

from . import dynamics
from .device import AC_BAND_MHZ, Device, FluxProgram, LineDrive, Tone, effective_flux
from .errors import ConfigError, FrequencyOutOfRange, ReconstructionIllConditioned

KINDS = ("CZ02", "CZ20")
CZ = np.diag([1.0, 1.0, 1.0, -1.0]).astype(complex)
MAX_CONDITION = 1e8


def angular(f_mhz):
    """MHz to rad/ns."""
    return 2 * np.pi * 1e-3 * np.asarray(f_mhz, dtype=float)


def gate_time(g_eff_mhz: float) -> float:
    """Gate time (ns) for a full |11> -> |Q> -> |11> cycle, pi / g in angular units."""
    return float(np.pi / angular(g_eff_mhz))


@dataclass(frozen=True)
class CZModel:
    kind: str
    g_eff: float  # MHz
    tau: float  # ns
    f_m: float  # MHz
    delta_f01: float = 0.0  # MHz
    delta_mean_shift: float = 0.0  # MHz, shift of E(11) - E(Q)
    delta_g: float = 0.0  # MHz
    amp: float = float("nan")  # gate pulse amplitude, phi0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"gate kind must be one of {KINDS}, not {self.kind!r}")
        if not self.g_eff > 0 or not self.tau > 0:
            raise ConfigError("g_eff and tau must be positive")

    @classmethod
    def calibrated(cls, kind: str, g_eff: float, f_m: float = 0.0, amp: float = float("nan")) -> "CZModel":
        return cls(kind, g_eff, gate_time(g_eff), f_m, amp=amp)

    @property
    def delta_omega01(self) -> float:
        """Mean angular frequency shift in rad/us."""
        return 2 * np.pi * self.delta_f01

    def with_frequency_shift(self, delta_f01: float, delta_g: float = 0.0) -> "CZModel":
        """Perturbations caused by a tunable-qubit frequency shift of ``delta_f01`` MHz."""
        sign = -1.0 if self.kind == "CZ02" else 1.0
        return replace(self, delta_f01=float(delta_f01), delta_mean_shift=sign * float(delta_f01),
                       delta_g=float(delta_g))

    def unperturbed(self) -> "CZModel":
        return replace(self, delta_f01=0.0, delta_mean_shift=0.0, delta_g=0.0)


def _block(model: CZModel) -> np.ndarray:
    # {|11>, |Q>} propagator in the frame co-rotating with the unperturbed levels
    w = angular(model.delta_f01)
    g = angular(model.g_eff + model.delta_g)
    d = angular(model.delta_mean_shift)
    return expm(-1j * model.tau * np.array([[w, g], [g, w - d]]))


def five_level_unitary(model: CZModel) -> np.ndarray:
    """Propagator on |00>, |01>, |10>, |11>, |Q>."""
    u = np.zeros((5, 5), dtype=complex)
    phase = np.exp(-1j * angular(model.delta_f01) * model.tau)
    u[0, 0], u[1, 1], u[2, 2] = 1.0, phase, 1.0
    u[3:, 3:] = _block(model)
    return u


def u11(model: CZModel) -> complex:
    """Closed-form |11> return amplitude, without the single-qubit phase."""
    tau = model.tau
    d = angular(model.delta_mean_shift)
    G = math.hypot(angular(model.g_eff + model.delta_g), d / 2)
    return np.exp(0.5j * d * tau) * (math.cos(G * tau) - 1j * d / (2 * G) * math.sin(G * tau))


def cz_unitary(model: CZModel) -> np.ndarray:
    """Logical-subspace block of the gate propagator (sub-unitary when |Q> keeps population)."""
    phase = np.exp(-1j * angular(model.delta_f01) * model.tau)
    return np.diag([1.0, phase, 1.0, phase * u11(model)]).astype(complex)


def average_infidelity(u_actual, u_ideal=CZ) -> float:
    """``(d^2 - |tr(U_ideal^dag U)|^2) / (d^2 + d)`` with d = 4."""
    t = np.trace(np.conj(np.asarray(u_ideal)).T @ np.asarray(u_actual))
    return float(np.clip((16.0 - abs(t) ** 2) / 20.0, 0.0, 1.0))


def leading_order_infidelity(model: CZModel) -> dict:
    """Second-order infidelity with the model's own perturbations and for both gate types."""
    tau = model.tau
    w = angular(model.delta_f01) * tau
    d = angular(model.delta_mean_shift) * tau
    g = angular(model.delta_g) * tau
    general = (w - d / 4) ** 2 / 5 + d**2 / 40 + g**2 / 5
    return {
        "r_general": float(general),
        "r02": float(27 / 80 * w**2 + g**2 / 5),
        "r20": float(11 / 80 * w**2 + g**2 / 5),
    }


def mean_shift_infidelity(delta_f01_mhz, tau_ns, kind: str = "CZ02"):
    """Leading-order infidelity of a mean-frequency error alone (``delta_g`` = 0).

    For CZ02 this is ``27 pi^2 / 20 * (delta_f * tau)^2``.
    """
    coef = 27 / 80 if kind == "CZ02" else 11 / 80
    return coef * (angular(delta_f01_mhz) * np.asarray(tau_ns, dtype=float)) ** 2


# -- Pauli transfer matrices ----------------------------------------------

_PAULI_1Q = [np.eye(2), np.array([[0, 1], [1, 0]]), np.array([[0, -1j], [1j, 0]]), np.diag([1.0, -1.0])]
PAULI_LABELS = ["".join(p) for p in itertools.product("IXYZ", repeat=2)]
PAULIS = np.array([np.kron(a, b) for a, b in itertools.product(_PAULI_1Q, repeat=2)], dtype=complex)


def ptm_from_kraus(kraus: Sequence[np.ndarray]) -> np.ndarray:
    """``R_ij = tr(P_i E(P_j)) / 4`` for ``E(rho) = sum_k K rho K^dag``."""
    out = np.zeros((16, 16))
    for k in kraus:
        k = np.asarray(k)
        images = k @ PAULIS @ np.conj(k).T
        out += np.real(np.einsum("ilk,jkl->ij", PAULIS, images)) / 4
    return out


def ptm_from_unitary(u) -> np.ndarray:
    return ptm_from_kraus([u])


def process_fidelity(ptm, ideal_ptm) -> float:
    return float(np.trace(np.asarray(ideal_ptm).T @ np.asarray(ptm)) / 16)


def average_fidelity_from_ptm(ptm, ideal_ptm) -> float:
    return (4 * process_fidelity(ptm, ideal_ptm) + 1) / 5


CZ_PTM = ptm_from_unitary(CZ)

_STATES_1Q = [
    np.array([1, 0], dtype=complex),
    np.array([0, 1], dtype=complex),
    np.array([1, 1], dtype=complex) / np.sqrt(2),
    np.array([1, 1j], dtype=complex) / np.sqrt(2),
]


def tomography_inputs() -> list[np.ndarray]:
    """Sixteen product input states from {|0>, |1>, |+>, |+i>} on each qubit."""
    out = []
    for a, b in itertools.product(_STATES_1Q, repeat=2):
        v = np.kron(a, b)
        out.append(np.outer(v, np.conj(v)))
    return out


def pauli_vector(rho) -> np.ndarray:
    return np.real(np.einsum("ikl,lk->i", PAULIS, rho))


@dataclass
class ProcessTomogram:
    ptm: np.ndarray
    leakage: float
    avg_fidelity: float
    condition_number: float = 1.0
    metadata: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"ptm": [[float(v) for v in row] for row in self.ptm], "labels": PAULI_LABELS,
                "leakage": float(self.leakage), "avg_fidelity": float(self.avg_fidelity),
                "condition_number": float(self.condition_number), "metadata": self.metadata}


def reconstruct_ptm(inputs, outputs_pauli, condition_limit: float = MAX_CONDITION):
    """Linear inversion: ``outputs = R @ inputs`` with both in Pauli-vector form.

    Returns ``(R, condition_number)``.
    """
    c = np.stack([pauli_vector(r) for r in inputs], axis=1)
    cond = float(np.linalg.cond(c))
    if not cond < condition_limit:
        raise ReconstructionIllConditioned(f"input-state matrix condition number {cond:.3g} exceeds {condition_limit:.0e}")
    return np.asarray(outputs_pauli) @ np.linalg.inv(c), cond


def tomography(u, rng: np.random.Generator | None = None, shots: int | None = None, spam_error: float = 0.0,
               inputs=None) -> ProcessTomogram:
    """Simulated process tomography of the logical-projected map ``rho -> P U rho U^dag P``.

    ``u`` is the 5x5 (or 4x4 logical) propagator.  With ``shots`` every
    measured Pauli expectation gets binomial-level Gaussian noise; with
    ``spam_error`` each prepared state is depolarised by that amount while
    the reconstruction still assumes ideal preparation.
    """
    u = np.asarray(u)
    k = u[:4, :4]
    inputs = tomography_inputs() if inputs is None else inputs
    outputs = []
    for rho in inputs:
        prepared = (1 - spam_error) * rho + spam_error * np.eye(4) / 4
        m = pauli_vector(k @ prepared @ np.conj(k).T)
        if shots:
            sigma = np.sqrt(np.clip(1 - m**2, 0, None) / shots)
            m = m + sigma * rng.standard_normal(16)
        outputs.append(m)
    ptm, cond = reconstruct_ptm(inputs, np.stack(outputs, axis=1))
    leakage = float(1 - ptm[0, 0])
    return ProcessTomogram(ptm, leakage, average_fidelity_from_ptm(ptm, CZ_PTM), cond)


# -- single-qubit Z corrections ---------------------------------------------


def rz_pair(alpha, beta) -> np.ndarray:
    """Diagonal of RZ(alpha) (x) RZ(beta), RZ(t) = diag(exp(-it/2), exp(it/2)); broadcasts."""
    a, b = np.broadcast_arrays(np.asarray(alpha, dtype=float), np.asarray(beta, dtype=float))
    za = np.stack([np.exp(-0.5j * a), np.exp(0.5j * a)], axis=-1)
    zb = np.stack([np.exp(-0.5j * b), np.exp(0.5j * b)], axis=-1)
    return (za[..., :, None] * zb[..., None, :]).reshape(a.shape + (4,))


_PAIR_TENSOR = np.einsum("ilk,jkl->ijkl", PAULIS, PAULIS)


def _rz_ptms(alpha, beta) -> np.ndarray:
    d = rz_pair(alpha, beta)
    phases = d[..., :, None] * np.conj(d[..., None, :])
    return np.real(np.einsum("ijkl,...kl->...ij", _PAIR_TENSOR, phases)) / 4


def _wrap(angle: float) -> float:
    return float(np.pi - np.mod(np.pi - angle, 2 * np.pi))


@dataclass(frozen=True)
class RZCorrection:
    alpha: float
    beta: float
    fidelity: float  # average gate fidelity after correction
    uncorrected: float


def optimize_rz_correction(process, ideal=CZ, grid: int = 64) -> RZCorrection:
    """Best RZ(alpha) (x) RZ(beta) applied after ``process``.

    ``process`` is a 4x4 (sub-)unitary, a 16x16 PTM or a :class:`ProcessTomogram`.
    A ``grid`` x ``grid`` scan is refined with Nelder-Mead.
    """
    if isinstance(process, ProcessTomogram):
        process = process.ptm
    process = np.asarray(process)
    if process.shape == (4, 4):
        diag_terms = np.conj(np.diag(ideal)) * np.diag(process)
        off = np.trace(np.conj(np.asarray(ideal)).T @ process) - diag_terms.sum()
        if abs(off) > 1e-12 or np.any(np.abs(process - np.diag(np.diag(process))) > 1e-12):
            # non-diagonal input: go through the PTM
            return optimize_rz_correction(ptm_from_unitary(process), ideal, grid)

        def fid(a, b):
            t = (rz_pair(a, b) * diag_terms).sum(axis=-1)
            return (np.abs(t) ** 2 + 4) / 20
    elif process.shape == (16, 16):
        ideal_ptm = ptm_from_unitary(ideal)

        def fid(a, b):
            r = _rz_ptms(a, b) @ process
            return (4 * np.einsum("ij,...ij->...", ideal_ptm, r) / 16 + 1) / 5
    else:
        raise ValueError("process must be 4x4 or 16x16")
    angles = -np.pi + 2 * np.pi * np.arange(grid) / grid
    A, B = np.meshgrid(angles, angles, indexing="ij")
    values = fid(A, B)
    i, j = np.unravel_index(int(np.argmax(values)), values.shape)
    res = minimize(lambda p: -float(fid(p[0], p[1])), [A[i, j], B[i, j]], method="Nelder-Mead",
                   options={"xatol": 1e-9, "fatol": 1e-12})
    best = -res.fun if -res.fun >= values[i, j] else float(values[i, j])
    a, b = (res.x if -res.fun >= values[i, j] else (A[i, j], B[i, j]))
    return RZCorrection(_wrap(a), _wrap(b), float(best), float(fid(0.0, 0.0)))


# -- gates on a device --------------------------------------------------------


@dataclass(frozen=True)
class GateSpec:
    """A parametric CZ between a tunable transmon and a fixed-frequency partner."""

    name: str
    tunable: str
    kind: str
    g_eff: float  # MHz
    partner_f01: float  # GHz
    partner_eta: float  # GHz
    amp: float | str = "sweet_spot"
    adversary: str | None = None
    g_eff_model: Callable | None = None  # amplitude (phi0) -> g_eff (MHz)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"gate kind must be one of {KINDS}, not {self.kind!r}")
        if not self.g_eff > 0:
            raise ConfigError("g_eff must be positive")

    @classmethod
    def from_dict(cls, doc: dict) -> "GateSpec":
        try:
            partner = doc["partner"]
            return cls(doc["name"], doc["tunable"], doc["kind"], float(doc["g_eff_mhz"]), float(partner["f01_ghz"]),
                       float(partner["eta_mhz"]) * 1e-3, doc.get("amp_phi0", "sweet_spot"), doc.get("adversary"))
        except KeyError as exc:
            raise ConfigError(f"gate entry lacks {exc}") from None

    def coupling(self, amp: float) -> float:
        return float(self.g_eff_model(amp)) if self.g_eff_model else self.g_eff


def find_gate(device: Device, name: str | None = None) -> GateSpec:
    if not device.gates:
        raise ConfigError("device defines no gates")
    for doc in device.gates:
        if name is None or doc.get("name") == name:
            return GateSpec.from_dict(doc)
    raise ConfigError(f"no gate named {name!r}")


@lru_cache(maxsize=64)
def _response(transmon) -> dynamics.ModulationResponse:
    return dynamics.fourier_coefficients(transmon)


def gate_amplitude(device: Device, spec: GateSpec, amp: float | str | None = None) -> float:
    amp = spec.amp if amp is None else amp
    if amp == "sweet_spot":
        return dynamics.find_sweet_spot(_response(device.transmons[device.index(spec.tunable)]))
    return float(amp)


def modulation_frequency(device: Device, spec: GateSpec, amp: float) -> float:
    """Drive frequency (MHz) that brings |11> into resonance with |Q> at amplitude ``amp``.

    The spectrum is even in flux, so the qubit frequency oscillates at twice
    the drive frequency; half the level splitting is therefore the drive.
    """
    t = device.transmons[device.index(spec.tunable)]
    f_t = dynamics.mean_frequency(_response(t), amp)
    delta = spec.partner_f01 - f_t
    eta_t = -t.ec
    split = delta - eta_t if spec.kind == "CZ02" else delta + spec.partner_eta
    f_m = abs(split) / 2 * 1e3
    if not AC_BAND_MHZ[0] <= f_m <= AC_BAND_MHZ[1]:
        raise FrequencyOutOfRange(f"{spec.name}: modulation frequency {f_m:.1f} MHz at amplitude {amp:.3f} outside band")
    return float(f_m)


def calibrate_gate(device: Device, spec: GateSpec, amp: float | str | None = None) -> CZModel:
    """Crosstalk-free calibration: modulation frequency and gate time at ``amp``."""
    a = gate_amplitude(device, spec, amp)
    return CZModel.calibrated(spec.kind, spec.coupling(a), modulation_frequency(device, spec, a), a)


def gate_program(device: Device, spec: GateSpec, model: CZModel, unit: str = "phi0") -> FluxProgram:
    t = device.index(spec.tunable)
    amp = model.amp
    if unit == "volts":
        amp = amp * device.flux_lines[t].ac_conversion(model.f_m)
    return FluxProgram({t: LineDrive(0.0, (Tone(float(amp), model.f_m, 0.0, model.tau),))}, unit)


def adversary_program(device: Device, line, amp: float, freq: float, phase: float = 0.0, unit: str = "phi0",
                      duration: float = 1000.0) -> FluxProgram:
    return FluxProgram.single(device.index(line), tones=[Tone(float(amp), float(freq), float(phase), duration)], unit=unit)


@dataclass(frozen=True)
class Perturbation:
    delta_f01: float  # MHz
    delta_mean_shift: float  # MHz
    delta_g: float  # MHz
    amp_eff: float  # phi0, flux amplitude seen at the gate frequency
    dc_eff: float  # phi0


def crosstalk_to_perturbations(device: Device, spec: GateSpec, model: CZModel, program: FluxProgram,
                               method: str = "exact") -> Perturbation:
    """Gate perturbations caused by ``program`` played on other lines during the gate.

    ``method="exact"`` differences mean frequencies; ``"taylor"`` uses the
    slope and curvature at the calibrated amplitude, valid only for an
    adversary at the gate frequency without DC offset.
    """
    t = device.index(spec.tunable)
    total = gate_program(device, spec, model, program.unit).merged(program)
    eff = effective_flux(device.network, device.flux_lines, total, t)
    resp = _response(device.transmons[t])
    gate_tone = [tone for tone in eff.tones if abs(tone.freq - model.f_m) < 1e-9]
    amp_eff = gate_tone[0].amp if gate_tone else 0.0
    if method == "exact":
        f_new = dynamics.mean_frequency_multitone(resp, eff.amplitudes, eff.dc)
        f_ref = dynamics.mean_frequency(resp, model.amp)
        delta_f = (f_new - f_ref) * 1e3
    elif method == "taylor":
        slope, curv = dynamics.slope_and_curvature(resp, model.amp)
        d = amp_eff - model.amp
        delta_f = (slope * d + 0.5 * curv * d**2) * 1e3
    else:
        raise ValueError(f"unknown method {method!r}")
    delta_g = spec.coupling(amp_eff) - spec.coupling(model.amp)
    sign = -1.0 if model.kind == "CZ02" else 1.0
    return Perturbation(float(delta_f), sign * float(delta_f), float(delta_g), float(amp_eff), float(eff.dc))


def perturbed(model: CZModel, p: Perturbation) -> CZModel:
    return replace(model, delta_f01=p.delta_f01, delta_mean_shift=p.delta_mean_shift, delta_g=p.delta_g)


def simulate_qpt(model: CZModel, rng: np.random.Generator | None = None, shots: int | None = None,
                 spam_error: float = 0.0) -> ProcessTomogram:
    """Process tomography of the five-level gate with the model's perturbations.

    The frame rotations are those calibrated without crosstalk, which in the
    co-rotating frame are the identity.
    """
    tomo = tomography(five_level_unitary(model), rng, shots, spam_error)
    tomo.metadata.update({"kind": model.kind, "g_eff_mhz": model.g_eff, "tau_ns": model.tau, "f_m_mhz": model.f_m,
                          "delta_f01_mhz": model.delta_f01, "delta_mean_shift_mhz": model.delta_mean_shift,
                          "delta_g_mhz": model.delta_g, "shots": shots, "spam_error": spam_error})
    return tomo


def worst_case_shift(device: Device, spec: GateSpec, model: CZModel, line, amp: float, unit: str = "phi0") -> float:
    """Largest |mean-frequency shift| (MHz) over in-phase and anti-phase adversary tones."""
    shifts = [crosstalk_to_perturbations(device, spec, model, adversary_program(device, line, amp, model.f_m, th, unit)).delta_f01
              for th in (0.0, np.pi)]
    return max(shifts, key=abs)


RESILIENCE_COLUMNS = ("gate_amp_phi0", "adversary_amp", "f_m_mhz", "tau_ns", "delta_f01_mhz", "baseline_fidelity",
                      "adversarial_fidelity", "rz_corrected_fidelity", "predicted_fidelity")


def resilience_sweep(device: Device, spec: GateSpec, adversary_amps: Sequence[float], gate_amps: Sequence[float],
                     adversary: str | None = None, phase: float = 0.0, unit: str = "volts",
                     rng: np.random.Generator | None = None, shots: int | None = None,
                     spam_error: float = 0.0) -> list[dict]:
    """Gate fidelity versus gate amplitude with an equal-frequency adversary tone.

    The gate is recalibrated at every amplitude.  Baseline and adversarial
    fidelities come from simulated tomography (adversary at ``phase``); the
    prediction uses the leading-order mean-shift infidelity with the
    worst-case adversary phase.
    """
    line = adversary or spec.adversary
    if line is None:
        raise ConfigError(f"{spec.name}: no adversary line given")
    rows = []
    for a in gate_amps:
        model = calibrate_gate(device, spec, float(a))
        base = simulate_qpt(model, rng, shots, spam_error)
        for adv in adversary_amps:
            p = crosstalk_to_perturbations(device, spec, model, adversary_program(device, line, adv, model.f_m, phase, unit))
            m = perturbed(model, p)
            tomo = simulate_qpt(m, rng, shots, spam_error)
            corrected = optimize_rz_correction(tomo)
            worst = worst_case_shift(device, spec, model, line, adv, unit)
            predicted = base.avg_fidelity - float(mean_shift_infidelity(worst, model.tau, model.kind))
            rows.append({
                "gate_amp_phi0": float(a), "adversary_amp": float(adv), "f_m_mhz": model.f_m, "tau_ns": model.tau,
                "delta_f01_mhz": p.delta_f01, "baseline_fidelity": base.avg_fidelity,
                "adversarial_fidelity": tomo.avg_fidelity, "rz_corrected_fidelity": corrected.fidelity,
                "predicted_fidelity": predicted,
            })
    return rows


def rows_to_csv(rows: Sequence[dict], columns: Sequence[str]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([repr(float(row[c])) if isinstance(row[c], (float, np.floating)) else row[c] for c in columns])
    return buf.getvalue()
