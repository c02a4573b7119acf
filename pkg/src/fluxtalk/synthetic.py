"""Random devices with planted crosstalk, for round-trip studies."""

from __future__ import annotations

import numpy as np

from .device import AC_BAND_MHZ, CrosstalkNetwork, Device, FluxLine, Resonator, TunableTransmon
from .noise import NoiseModel

AC_GRID_MHZ = np.linspace(AC_BAND_MHZ[0], AC_BAND_MHZ[1], 10)


def planted_matrix(n: int, rng: np.random.Generator, low: float = 1e-5, high: float = 0.05) -> np.ndarray:
    """Asymmetric crosstalk matrix, off-diagonal magnitudes log-uniform in ``[low, high]``."""
    x = np.exp(rng.uniform(np.log(low), np.log(high), size=(n, n)))
    np.fill_diagonal(x, 1.0)
    return x


def random_transmon(id: str, rng: np.random.Generator) -> TunableTransmon:
    return TunableTransmon.from_spectrum(
        id, rng.uniform(4.4, 4.9), -rng.uniform(0.16, 0.21), rng.uniform(0.70, 0.82),
        t1=rng.uniform(20, 40), t2=rng.uniform(10, 25),
    )


def random_flux_line(id: str, rng: np.random.Generator) -> FluxLine:
    dc = rng.uniform(0.7, 1.3)
    # mild high-frequency roll-off of the line transfer function
    ac = dc * (1 + rng.uniform(0.05, 0.3) * AC_GRID_MHZ / AC_BAND_MHZ[1])
    return FluxLine(id, dc, AC_GRID_MHZ.copy(), ac)


def random_device(n: int, seed: int = 0, low: float = 1e-5, high: float = 0.05,
                  noise: NoiseModel | None = None, x_dc: np.ndarray | None = None) -> Device:
    rng = np.random.default_rng(seed)
    ids = [f"Q{2 * i}" for i in range(n)]
    transmons = [random_transmon(i, rng) for i in ids]
    resonators = [Resonator(rng.uniform(5.8, 6.0), rng.uniform(0.05, 0.065)) for _ in ids]
    lines = [random_flux_line(i, rng) for i in ids]
    if x_dc is None:
        x_dc = planted_matrix(n, rng, low, high)
    return Device(transmons, resonators, lines, CrosstalkNetwork(x_dc), noise or NoiseModel())
