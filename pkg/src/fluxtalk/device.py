"""Static device physics: transmon spectra, dressed resonators, flux composition.

Units are fixed throughout the package: flux in flux quanta, qubit and
resonator frequencies in GHz, tone frequencies in MHz, phases in radians,
times in ns (coherence times in us).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ConfigError, DispersiveViolation, FrequencyOutOfRange
from .noise import NoiseModel

AC_BAND_MHZ = (50.0, 500.0)
DISPERSIVE_FACTOR = 10.0


@dataclass(frozen=True)
class TunableTransmon:
    """Asymmetric-SQUID transmon.  Energies in GHz, coherence times in us."""

    id: str
    ej1: float
    ej2: float
    ec: float
    t1: float = 30.0
    t2: float = 20.0

    def __post_init__(self):
        if not (self.ej1 >= self.ej2 > 0):
            raise ConfigError(f"{self.id}: need ej1 >= ej2 > 0 (got {self.ej1}, {self.ej2})")
        if self.ec <= 0:
            raise ConfigError(f"{self.id}: ec must be positive")
        if self.ej_sum / self.ec < 20:
            raise ConfigError(f"{self.id}: EJ/EC = {self.ej_sum / self.ec:.1f} is outside the transmon regime")
        if self.ej1 == self.ej2:
            raise ConfigError(f"{self.id}: symmetric SQUID has no frequency at half flux")
        if np.sqrt(8 * self.asymmetry * self.ej_sum * self.ec) <= self.ec:
            raise ConfigError(f"{self.id}: f01 vanishes at half flux")
        if self.t1 <= 0 or self.t2 <= 0:
            raise ConfigError(f"{self.id}: coherence times must be positive")

    @property
    def ej_sum(self) -> float:
        return self.ej1 + self.ej2

    @property
    def asymmetry(self) -> float:
        return (self.ej1 - self.ej2) / (self.ej1 + self.ej2)

    @classmethod
    def from_spectrum(cls, id: str, f01_max: float, eta: float, asymmetry: float, **kw) -> "TunableTransmon":
        """Build from top-of-band frequency (GHz), anharmonicity (GHz, < 0) and asymmetry.

        The leading-order model inverts in closed form: ``ec = -eta`` and
        ``ej1 + ej2 = (f01_max + ec)**2 / (8 ec)``.
        """
        if eta >= 0:
            raise ConfigError(f"{id}: anharmonicity must be negative")
        if not 0 < asymmetry < 1:
            raise ConfigError(f"{id}: asymmetry must lie in (0, 1)")
        ec = -eta
        ej_sum = (f01_max + ec) ** 2 / (8 * ec)
        return cls(id, ej_sum * (1 + asymmetry) / 2, ej_sum * (1 - asymmetry) / 2, ec, **kw)


def josephson_energy(q: TunableTransmon, phi):
    phi = np.asarray(phi, dtype=float)
    c, s = np.cos(np.pi * phi), np.sin(np.pi * phi)
    return q.ej_sum * np.sqrt(c * c + q.asymmetry**2 * s * s)


def f01(q: TunableTransmon, phi):
    """Qubit frequency (GHz) at flux ``phi``; even and periodic with period 1."""
    return np.sqrt(8 * josephson_energy(q, phi) * q.ec) - q.ec


def anharmonicity(q: TunableTransmon, phi=0.0):
    """Leading-order anharmonicity, ``-ec``; flux independent."""
    return np.full_like(np.asarray(phi, dtype=float), -q.ec)


@dataclass(frozen=True)
class Resonator:
    """Readout resonator; frequencies in GHz."""

    f_bare: float
    g: float

    def __post_init__(self):
        if self.f_bare <= 0 or self.g <= 0:
            raise ConfigError("resonator f_bare and g must be positive")

    @classmethod
    def from_chi(cls, f_bare: float, chi: float, q: TunableTransmon, phi: float = 0.0) -> "Resonator":
        """Solve the dispersive-shift formula for ``g`` given ``chi`` (GHz) at ``phi``."""
        delta = float(f01(q, phi)) - f_bare
        eta = -q.ec
        g2 = chi * delta * (delta + eta) / (2 * eta)
        if g2 <= 0:
            raise ConfigError(f"chi={chi} GHz has the wrong sign for detuning {delta:.3f} GHz")
        return cls(f_bare, float(np.sqrt(g2)))


def dispersive_shift(res: Resonator, q: TunableTransmon, phi):
    """Qubit-state dependent resonator shift chi (GHz)."""
    delta = f01(q, phi) - res.f_bare
    eta = -q.ec
    return 2 * res.g**2 * eta / (delta * (delta + eta))


def dressed_resonator_freq(res: Resonator, q: TunableTransmon, phi):
    """Resonator frequency (GHz) with the qubit in its ground state.

    Pull convention: ``f_bare + g**2/delta + chi/2`` with ``delta = f01 - f_bare``.
    """
    delta = f01(q, phi) - res.f_bare
    if np.any(np.abs(delta) < DISPERSIVE_FACTOR * res.g):
        raise DispersiveViolation(
            f"|f01 - f_r| = {np.min(np.abs(delta)):.4f} GHz < {DISPERSIVE_FACTOR:g} g = {DISPERSIVE_FACTOR * res.g:.4f} GHz"
        )
    eta = -q.ec
    chi = 2 * res.g**2 * eta / (delta * (delta + eta))
    return res.f_bare + res.g**2 / delta + chi / 2


def _check_table(freq, values, what):
    freq = np.asarray(freq, dtype=float)
    values = np.asarray(values, dtype=float)
    if freq.ndim != 1 or freq.size < 2 or freq.shape != values.shape:
        raise ConfigError(f"{what}: need matching 1-D tables with >= 2 points")
    if np.any(np.diff(freq) <= 0):
        raise ConfigError(f"{what}: frequency axis must be strictly increasing")
    return freq, values


def _interp(freq_grid, values, f, what):
    if f < freq_grid[0] - 1e-9 or f > freq_grid[-1] + 1e-9:
        raise FrequencyOutOfRange(f"{what}: {f} MHz outside [{freq_grid[0]}, {freq_grid[-1]}] MHz")
    return float(np.interp(f, freq_grid, values))


@dataclass(frozen=True, eq=False)
class FluxLine:
    """Bias line of one qubit.  Conversions in volts per flux quantum."""

    qubit_id: str
    dc_volts_per_phi0: float
    ac_freq_mhz: np.ndarray
    ac_volts_per_phi0: np.ndarray
    phase_offset: float = 0.0

    def __post_init__(self):
        f, v = _check_table(self.ac_freq_mhz, self.ac_volts_per_phi0, f"flux line {self.qubit_id}")
        object.__setattr__(self, "ac_freq_mhz", f)
        object.__setattr__(self, "ac_volts_per_phi0", v)
        if self.dc_volts_per_phi0 <= 0 or np.any(v <= 0):
            raise ConfigError(f"flux line {self.qubit_id}: conversions must be positive")

    def ac_conversion(self, freq_mhz: float) -> float:
        return _interp(self.ac_freq_mhz, self.ac_volts_per_phi0, freq_mhz, f"flux line {self.qubit_id}")


@dataclass(frozen=True, eq=False)
class CrosstalkNetwork:
    """Flux crosstalk ``x[target, source] = dPhi_target / dPhi_source``.

    ``x_ac`` maps an ordered ``(target, source)`` index pair to a
    ``(freq_mhz, ratio)`` table.  Pairs absent from ``x_ac`` fall back to a flat
    table at the DC value.  Nothing here assumes symmetry.
    """

    x_dc: np.ndarray
    x_ac: dict = field(default_factory=dict)

    def __post_init__(self):
        x = np.array(self.x_dc, dtype=float)
        if x.ndim != 2 or x.shape[0] != x.shape[1]:
            raise ConfigError("crosstalk_dc must be square")
        if not np.all(np.diag(x) == 1.0):
            raise ConfigError("crosstalk_dc diagonal must be exactly 1")
        off = x[~np.eye(len(x), dtype=bool)]
        if np.any(np.abs(off) >= 0.5):
            raise ConfigError("crosstalk_dc off-diagonal entries must satisfy |x| < 0.5")
        object.__setattr__(self, "x_dc", x)
        tables = {}
        for (t, s), (f, r) in self.x_ac.items():
            if t == s:
                raise ConfigError("crosstalk_ac may not override the diagonal")
            f, r = _check_table(f, r, f"crosstalk_ac {s}->{t}")
            if f[0] > AC_BAND_MHZ[0] or f[-1] < AC_BAND_MHZ[1]:
                raise ConfigError(f"crosstalk_ac {s}->{t} must cover {AC_BAND_MHZ} MHz")
            tables[(int(t), int(s))] = (f, r)
        object.__setattr__(self, "x_ac", tables)

    @property
    def n(self) -> int:
        return len(self.x_dc)

    def ac(self, target: int, source: int, freq_mhz: float) -> float:
        if target == source:
            if not AC_BAND_MHZ[0] - 1e-9 <= freq_mhz <= AC_BAND_MHZ[1] + 1e-9:
                raise FrequencyOutOfRange(f"{freq_mhz} MHz outside {AC_BAND_MHZ} MHz")
            return 1.0
        table = self.x_ac.get((target, source))
        if table is None:
            table = (np.array(AC_BAND_MHZ), np.full(2, self.x_dc[target, source]))
        return _interp(*table, freq_mhz, f"crosstalk_ac {source}->{target}")


@dataclass(frozen=True)
class Tone:
    amplitude: float
    freq: float
    phase: float = 0.0
    duration: float = 1000.0

    def __post_init__(self):
        if not AC_BAND_MHZ[0] <= self.freq <= AC_BAND_MHZ[1]:
            raise FrequencyOutOfRange(f"tone at {self.freq} MHz outside {AC_BAND_MHZ} MHz")
        if self.duration <= 0:
            raise ConfigError("tone duration must be positive")


@dataclass(frozen=True)
class LineDrive:
    dc: float = 0.0
    tones: tuple[Tone, ...] = ()


@dataclass(frozen=True)
class FluxProgram:
    """Requested flux on each line, all in one unit (``"phi0"`` or ``"volts"``)."""

    lines: dict[int, LineDrive]
    unit: str = "phi0"

    def __post_init__(self):
        if self.unit not in ("phi0", "volts"):
            raise ConfigError(f"unknown flux unit {self.unit!r}")

    @classmethod
    def single(cls, line: int, dc: float = 0.0, tones: Sequence[Tone] = (), unit: str = "phi0") -> "FluxProgram":
        return cls({line: LineDrive(dc, tuple(tones))}, unit)

    def merged(self, other: "FluxProgram") -> "FluxProgram":
        if other.unit != self.unit:
            raise ConfigError("cannot merge programs with different units")
        lines = dict(self.lines)
        for j, d in other.lines.items():
            if j in lines:
                lines[j] = LineDrive(lines[j].dc + d.dc, lines[j].tones + d.tones)
            else:
                lines[j] = d
        return FluxProgram(lines, self.unit)


@dataclass(frozen=True)
class EffectiveTone:
    amp: float
    freq: float
    phase: float


@dataclass(frozen=True)
class EffectiveFlux:
    dc: float
    tones: tuple[EffectiveTone, ...]

    @property
    def amplitudes(self) -> np.ndarray:
        return np.array([t.amp for t in self.tones])


@dataclass(frozen=True, eq=False)
class Device:
    transmons: list[TunableTransmon]
    resonators: list[Resonator]
    flux_lines: list[FluxLine]
    network: CrosstalkNetwork
    noise: NoiseModel = field(default_factory=NoiseModel)
    gates: list = field(default_factory=list)

    def __post_init__(self):
        n = len(self.transmons)
        if not (len(self.resonators) == len(self.flux_lines) == self.network.n == n):
            raise ConfigError("transmons, resonators, flux_lines and crosstalk_dc disagree in size")
        ids = [q.id for q in self.transmons]
        if len(set(ids)) != n:
            raise ConfigError("duplicate transmon ids")
        for q, line in zip(self.transmons, self.flux_lines):
            if line.qubit_id != q.id:
                raise ConfigError(f"flux line order does not follow transmons ({line.qubit_id} vs {q.id})")

    @property
    def n(self) -> int:
        return len(self.transmons)

    @property
    def ids(self) -> list[str]:
        return [q.id for q in self.transmons]

    def index(self, qubit) -> int:
        if isinstance(qubit, (int, np.integer)):
            if not 0 <= qubit < self.n:
                raise ConfigError(f"qubit index {qubit} out of range")
            return int(qubit)
        try:
            return self.ids.index(qubit)
        except ValueError:
            raise ConfigError(f"unknown qubit {qubit!r}") from None

    def replace(self, **changes) -> "Device":
        from dataclasses import replace

        return replace(self, **changes)


def effective_flux(network: CrosstalkNetwork, flux_lines: Sequence[FluxLine], program: FluxProgram, target: int) -> EffectiveFlux:
    """Flux reaching ``target`` from every line of ``program``.

    Same-frequency tones add as complex phasors weighted by the AC crosstalk at
    that frequency; the line's electrical phase offset is added to each tone.
    """
    dc = 0.0
    phasors: dict[float, complex] = {}
    for j, drive in program.lines.items():
        line = flux_lines[j]
        dc_j = drive.dc / line.dc_volts_per_phi0 if program.unit == "volts" else drive.dc
        dc += network.x_dc[target, j] * dc_j
        for tone in drive.tones:
            amp = tone.amplitude / line.ac_conversion(tone.freq) if program.unit == "volts" else tone.amplitude
            key = round(float(tone.freq), 9)
            x = network.ac(target, j, tone.freq)
            phasors[key] = phasors.get(key, 0j) + x * amp * np.exp(1j * (tone.phase + line.phase_offset))
    tones = tuple(EffectiveTone(abs(z), f, float(np.angle(z))) for f, z in sorted(phasors.items()))
    return EffectiveFlux(float(dc), tones)


def device_effective_flux(device: Device, program: FluxProgram, target) -> EffectiveFlux:
    return effective_flux(device.network, device.flux_lines, program, device.index(target))
