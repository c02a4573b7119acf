"""Time-averaged qubit frequency under sinusoidal flux modulation.

Writing the spectrum as a cosine series in flux,

    f01(phi) = nu_0 + sum_n nu_n cos(2 pi n phi),

a drive ``bias + amp*cos(wt)`` averages each harmonic to
``cos(2 pi n bias) * J0(2 pi n amp)``.  Several incommensurate tones multiply
their J0 factors.  The mean shift is measured from the zero-flux frequency.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Union

import numpy as np
from scipy.optimize import brentq

from .bessel import j0, j1
from .device import TunableTransmon, f01
from .errors import NoInteriorMinimum

DEFAULT_HARMONICS = 50
MIN_SAMPLES = 4096
SWEET_SPOT_SEARCH = (0.0, 0.75)


@dataclass(frozen=True, eq=False)
class ModulationResponse:
    """Cosine-series coefficients of a qubit spectrum.

    ``nu[k]`` is the coefficient of harmonic ``k + 1`` (GHz); ``nu0`` the mean.
    """

    nu0: float
    nu: np.ndarray

    @property
    def n_harmonics(self) -> int:
        return len(self.nu)

    @property
    def harmonics(self) -> np.ndarray:
        return np.arange(1, len(self.nu) + 1)

    @property
    def f_max(self) -> float:
        """Frequency at zero flux, the reference of the mean shift."""
        return float(self.nu0 + self.nu.sum())

    def reconstruct(self, phi):
        phi = np.asarray(phi, dtype=float)
        return self.nu0 + np.cos(2 * np.pi * np.multiply.outer(phi, self.harmonics)) @ self.nu

    def f_mean(self, amp, bias=0.0):
        return mean_frequency(self, amp, bias)

    @property
    def sweet_spot_amp(self) -> float:
        return find_sweet_spot(self)


def fourier_coefficients(
    spectrum: Union[TunableTransmon, Callable], n_harmonics: int = DEFAULT_HARMONICS, n_samples: int = MIN_SAMPLES
) -> ModulationResponse:
    """Project a period-1 even spectrum onto cosines by FFT on a uniform flux grid."""
    if n_harmonics < 8:
        raise ValueError("n_harmonics must be >= 8")
    n_samples = max(int(n_samples), MIN_SAMPLES, 4 * n_harmonics)
    phi = np.arange(n_samples) / n_samples
    if isinstance(spectrum, TunableTransmon):
        values = f01(spectrum, phi)
    else:
        values = np.asarray(spectrum(phi), dtype=float)
    coeffs = np.fft.rfft(values) / n_samples
    return ModulationResponse(float(coeffs[0].real), 2 * coeffs[1 : n_harmonics + 1].real.copy())


def mean_frequency(resp: ModulationResponse, amp, bias=0.0):
    """Average f01 (GHz) under a tone of amplitude ``amp`` about DC ``bias``.

    ``amp`` and ``bias`` broadcast against each other.
    """
    a, b = np.broadcast_arrays(np.asarray(amp, dtype=float), np.asarray(bias, dtype=float))
    k = 2 * np.pi * resp.harmonics
    out = resp.nu0 + (j0(np.multiply.outer(a, k)) * np.cos(np.multiply.outer(b, k))) @ resp.nu
    return float(out) if out.ndim == 0 else out


def mean_frequency_multitone(resp: ModulationResponse, amps, bias: float = 0.0) -> float:
    """Average f01 (GHz) under simultaneous tones at mutually incommensurate frequencies."""
    k = 2 * np.pi * resp.harmonics
    weights = np.cos(k * bias)
    for amp in amps:
        weights = weights * j0(k * amp)
    return float(resp.nu0 + weights @ resp.nu)


def mean_detuning(resp: ModulationResponse, amp, bias=0.0):
    """Mean shift (GHz) of the averaged frequency from the zero-flux frequency."""
    return mean_frequency(resp, amp, bias) - resp.f_max


def slope_and_curvature(resp: ModulationResponse, amp, bias=0.0):
    """First and second derivative (GHz/phi0, GHz/phi0**2) of the mean frequency in amplitude."""
    a = np.asarray(amp, dtype=float)
    k = 2 * np.pi * resp.harmonics
    x = np.multiply.outer(a, k)
    w = resp.nu * np.cos(k * bias)
    slope = -(j1(x) * k) @ w
    with np.errstate(invalid="ignore", divide="ignore"):
        j1_over_x = np.where(x == 0, 0.5, j1(x) / np.where(x == 0, 1.0, x))
    curvature = ((j1_over_x - j0(x)) * k**2) @ w
    if a.ndim == 0:
        return float(slope), float(curvature)
    return slope, curvature


def find_sweet_spot(resp: ModulationResponse, search=SWEET_SPOT_SEARCH, grid_points: int = 1500) -> float:
    """Amplitude of the first interior minimum of the mean frequency.

    A grid scan brackets the minimum; the slope root inside the bracket is
    then polished with Brent's method.
    """
    lo, hi = search
    grid = np.linspace(lo, hi, grid_points + 1)[1:]
    fbar = mean_frequency(resp, grid)
    i = int(np.argmin(fbar))
    if i == 0 or i == len(grid) - 1:
        raise NoInteriorMinimum(f"mean frequency is monotone on ({lo}, {hi}] phi0")
    a, b = grid[i - 1], grid[i + 1]
    slope = lambda x: slope_and_curvature(resp, x)[0]
    if slope(a) * slope(b) > 0:
        return float(grid[i])
    return float(brentq(slope, a, b, xtol=1e-12, rtol=1e-14))


def time_average_oracle(spectrum: Callable, amp: float, bias: float = 0.0, n: int = 10_000) -> float:
    """Direct average of ``spectrum(bias + amp cos theta)`` over a uniform phase grid."""
    theta = 2 * np.pi * np.arange(n) / n
    return float(np.mean(spectrum(bias + amp * np.cos(theta))))
