"""JSON device documents.

See ``docs/formats.md`` for the schema.  ``load_device(None)`` returns the
bundled default device.
"""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

import numpy as np

from .device import CrosstalkNetwork, Device, FluxLine, Resonator, TunableTransmon
from .errors import ConfigError
from .noise import NoiseModel

_SECTIONS = ("transmons", "resonators", "flux_lines", "crosstalk_dc")


def default_device_path():
    return resources.files("fluxtalk") / "data" / "default_device.json"


def read_document(path=None) -> dict:
    if path is None or path == "default":
        return json.loads(default_device_path().read_text())
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None


def _transmon(doc: dict) -> TunableTransmon:
    extra = {k: doc[k + "_us"] for k in ("t1", "t2") if k + "_us" in doc}
    if "ej1_ghz" in doc:
        return TunableTransmon(doc["id"], doc["ej1_ghz"], doc["ej2_ghz"], doc["ec_ghz"], **extra)
    try:
        return TunableTransmon.from_spectrum(doc["id"], doc["f01_max_ghz"], doc["eta_mhz"] * 1e-3, doc["asymmetry"], **extra)
    except KeyError as exc:
        raise ConfigError(f"transmon entry lacks {exc}") from None


def device_from_dict(doc: dict) -> Device:
    for key in _SECTIONS:
        if key not in doc:
            raise ConfigError(f"device document lacks section {key!r}")
    transmons = [_transmon(t) for t in doc["transmons"]]
    ids = [q.id for q in transmons]

    def idx(name):
        try:
            return ids.index(name)
        except ValueError:
            raise ConfigError(f"unknown qubit {name!r}") from None

    resonators = [None] * len(ids)
    for r in doc["resonators"]:
        i = idx(r["qubit"])
        if "g_mhz" in r:
            resonators[i] = Resonator(r["f_bare_ghz"], r["g_mhz"] * 1e-3)
        else:
            resonators[i] = Resonator.from_chi(r["f_bare_ghz"], r["chi_mhz"] * 1e-3, transmons[i])
    lines = [None] * len(ids)
    for f in doc["flux_lines"]:
        i = idx(f["qubit"])
        lines[i] = FluxLine(f["qubit"], f["dc_volts_per_phi0"], f["ac_freq_mhz"], f["ac_volts_per_phi0"],
                            f.get("phase_offset_rad", 0.0))
    if any(v is None for v in resonators + lines):
        raise ConfigError("every transmon needs one resonator and one flux line")
    x_ac = {}
    for e in doc.get("crosstalk_ac", []):
        x_ac[(idx(e["to"]), idx(e["from"]))] = (e["freq_mhz"], e["ratio"])
    network = CrosstalkNetwork(np.array(doc["crosstalk_dc"], dtype=float), x_ac)
    noise = NoiseModel.from_dict(doc.get("noise", {}))
    return Device(transmons, resonators, lines, network, noise, list(doc.get("gates", [])))


def load_device(path=None) -> Device:
    return device_from_dict(read_document(path))


def device_to_dict(device: Device) -> dict:
    """Serialise a device using the energy-based transmon form (lossless)."""
    ids = device.ids
    return {
        "transmons": [
            {"id": q.id, "ej1_ghz": q.ej1, "ej2_ghz": q.ej2, "ec_ghz": q.ec, "t1_us": q.t1, "t2_us": q.t2}
            for q in device.transmons
        ],
        "resonators": [{"qubit": i, "f_bare_ghz": r.f_bare, "g_mhz": r.g * 1e3} for i, r in zip(ids, device.resonators)],
        "flux_lines": [
            {"qubit": l.qubit_id, "dc_volts_per_phi0": l.dc_volts_per_phi0, "ac_freq_mhz": l.ac_freq_mhz.tolist(),
             "ac_volts_per_phi0": l.ac_volts_per_phi0.tolist(), "phase_offset_rad": l.phase_offset}
            for l in device.flux_lines
        ],
        "crosstalk_dc": device.network.x_dc.tolist(),
        "crosstalk_ac": [
            {"from": ids[s], "to": ids[t], "freq_mhz": f.tolist(), "ratio": r.tolist()}
            for (t, s), (f, r) in sorted(device.network.x_ac.items())
        ],
        "noise": device.noise.to_dict(),
        "gates": device.gates,
    }


def save_device(device: Device, path) -> None:
    Path(path).write_text(json.dumps(device_to_dict(device), indent=1) + "\n")
