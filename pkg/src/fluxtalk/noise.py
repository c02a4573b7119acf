"""Measurement noise and sampling settings for the virtual lab."""

from __future__ import annotations

from dataclasses import dataclass, field, fields, asdict

from .errors import ConfigError

METHODS = ("dc_resonator", "dc_qubit", "ac")


@dataclass(frozen=True)
class Sampling:
    """Shot budget of one measurement method.

    ``latency_s`` is charged once per recorded trace and covers everything
    the shot rate does not (instrument setup, data transfer, fitting).
    """

    shots_per_point: int
    shot_rate_khz: float
    latency_s: float

    def elapsed(self, points: int) -> float:
        return points * self.shots_per_point / (self.shot_rate_khz * 1e3) + self.latency_s


def _default_sampling() -> dict[str, Sampling]:
    # Shots and rates of the reference setup; latencies chosen so that the
    # default scan sizes reproduce 80 s / 235 s / 385 s per measured pair.
    return {
        "dc_resonator": Sampling(200, 50.0, 26.343),
        "dc_qubit": Sampling(300, 10.0, 37.97),
        "ac": Sampling(500, 10.0, 22.06),
    }


@dataclass(frozen=True)
class NoiseModel:
    """Noise levels used by simulated experiments.

    Frequencies are in MHz.  ``ramsey_delays`` is the number of delay points in
    one Ramsey fringe; ``resonator_fit_sigma_mhz`` is the 1-sigma error on a
    single fitted resonator frequency.
    """

    ramsey_freq_sigma_static_mhz: float = 0.01
    ramsey_freq_sigma_mod_mhz: float = 0.05
    resonator_fit_sigma_mhz: float = 0.002
    flux_conversion_rel_sigma: float = 0.005
    ramsey_delays: int = 40
    sampling: dict[str, Sampling] = field(default_factory=_default_sampling)
    rng_seed: int = 0

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, (int, float)) and v < 0:
                raise ConfigError(f"noise.{f.name} must be >= 0, got {v}")
        if self.ramsey_delays < 4:
            raise ConfigError("noise.ramsey_delays must be >= 4")
        missing = set(METHODS) - set(self.sampling)
        if missing:
            raise ConfigError(f"noise.sampling lacks {sorted(missing)}")

    @classmethod
    def from_dict(cls, doc: dict) -> "NoiseModel":
        doc = dict(doc)
        sampling = _default_sampling()
        for name, s in doc.pop("sampling", {}).items():
            sampling[name] = Sampling(**s)
        try:
            return cls(sampling=sampling, **doc)
        except TypeError as exc:
            raise ConfigError(f"bad noise section: {exc}") from None

    def to_dict(self) -> dict:
        return asdict(self)
