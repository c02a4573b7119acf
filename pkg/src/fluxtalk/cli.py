"""Scenario runner.

``fluxtalk run scenario.json --seed 3 --out results/`` loads the device,
runs one study and writes CSV/JSON artifacts plus ``manifest.json``.  Exit
codes: 0 success, 2 invalid scenario or device, 3 fit or reconstruction
failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import platform
import sys
from pathlib import Path

import numpy as np
import scipy

from . import __version__, estimators, gates
from .config import default_device_path, device_from_dict, read_document
from .errors import (AmbiguousPhase, ConfigError, DegenerateTraces, FitFailure, FluxtalkError, InsufficientSpan,
                     NoInteriorMinimum, ReconstructionIllConditioned, ZeroDenominator)
from .lab import VirtualLab

EXIT_OK, EXIT_INVALID, EXIT_FIT = 0, 2, 3
FIT_ERRORS = (FitFailure, DegenerateTraces, ZeroDenominator, InsufficientSpan, AmbiguousPhase, NoInteriorMinimum,
              ReconstructionIllConditioned)

# study -> (required params, optional params with defaults)
STUDIES = {
    "dc_resonator": ({"target", "source"}, {"n_points": 81, "span_phi0": 1.2}),
    "dc_qubit": ({"target", "source"}, {"step_phi0": 0.02}),
    "dc_matrix": (set(), {"method": "dc_qubit"}),
    "ac_matrix": (set(), {"freq_mhz": 200.0}),
    "ac_spectrum": ({"target", "source"}, {"freqs_mhz": [50, 100, 150, 200, 250, 300, 350, 400, 450, 500]}),
    "method_compare": (set(), {"methods": ["dc_resonator", "dc_qubit"], "repeats": 1,
                               "bins": [-4, -3.5, -3, -2.5, -2, -1.5, -1, -0.5, 0, 0.5, 1, 1.5, 2, 2.5, 3, 3.5, 4]}),
    "resilience": ({"adversary_amps"}, {"gate": None, "gate_amps_phi0": None, "adversary": None, "unit": "volts",
                                        "phase_rad": 0.0, "shots": None, "spam_error": 0.0}),
    "qpt": (set(), {"gate": None, "adversary": None, "adversary_amp": 0.0, "unit": "volts", "phase_rad": 0.0,
                    "perturbations": None, "shots": None, "spam_error": 0.0}),
}


def validate_scenario(doc: dict) -> dict:
    """Check a scenario document and fill in parameter defaults."""
    if not isinstance(doc, dict):
        raise ConfigError("scenario must be a JSON object")
    study = doc.get("study")
    if study not in STUDIES:
        raise ConfigError(f"unknown study {study!r}; choose from {sorted(STUDIES)}")
    required, optional = STUDIES[study]
    params = dict(doc.get("params", {}))
    unknown = set(params) - required - set(optional)
    if unknown:
        raise ConfigError(f"study {study!r} does not accept {sorted(unknown)}")
    missing = required - set(params)
    if missing:
        raise ConfigError(f"study {study!r} needs {sorted(missing)}")
    for key, value in optional.items():
        params.setdefault(key, value)
    if study == "dc_matrix" and params["method"] not in ("dc_resonator", "dc_qubit"):
        raise ConfigError("dc_matrix method must be dc_resonator or dc_qubit")
    if study == "method_compare":
        if len(params["methods"]) != 2 or not set(params["methods"]) <= set(estimators.METHODS):
            raise ConfigError("method_compare needs two known methods")
        if int(params["repeats"]) < 1:
            raise ConfigError("repeats must be >= 1")
    realism = doc.get("realism", "fast")
    if realism not in ("fast", "full"):
        raise ConfigError(f"realism must be 'fast' or 'full', not {realism!r}")
    seed = doc.get("seed")
    if seed is not None and (not isinstance(seed, int) or isinstance(seed, bool) or seed < 0):
        raise ConfigError("seed must be a non-negative integer")
    return {"name": str(doc.get("name", study)), "device": doc.get("device", "default"), "study": study,
            "params": params, "seed": seed, "realism": realism}


class Artifacts:
    """Collects output files and writes them together with the manifest."""

    def __init__(self, out: Path):
        self.out = out
        self.files: dict[str, bytes] = {}

    def text(self, name: str, content: str):
        self.files[name] = content.encode()

    def json(self, name: str, doc):
        self.text(name, json.dumps(_plain(doc), indent=2, sort_keys=True) + "\n")

    def write(self, manifest: dict):
        self.out.mkdir(parents=True, exist_ok=True)
        manifest["artifacts"] = {k: hashlib.sha256(v).hexdigest() for k, v in sorted(self.files.items())}
        self.json("manifest.json", manifest)
        for name, data in self.files.items():
            (self.out / name).write_bytes(data)


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    return obj


def _record_csv(record) -> str:
    rows = ["x,y,y_sigma"] + [f"{a!r},{b!r},{c!r}" for a, b, c in
                              zip(record.x.tolist(), record.y.tolist(), record.y_sigma.tolist())]
    return "\n".join(rows) + "\n"


# -- studies -----------------------------------------------------------------


def _study_dc_resonator(lab, p, art):
    est, records = estimators.dc_resonator_pair(lab, p["target"], p["source"], int(p["n_points"]), float(p["span_phi0"]))
    for r in records:
        name = f"trace_bias_{r.metadata['adversary_bias_phi0']:+g}"
        art.text(name + ".csv", _record_csv(r))
        art.json(name + ".json", r.metadata)
    art.json("estimate.json", estimators.estimate_to_dict(est))
    art.text("estimates.csv", estimators.estimates_to_csv([est]))


def _study_dc_qubit(lab, p, art):
    est, (rec_self, rec_adv) = estimators.dc_qubit_pair(lab, p["target"], p["source"], float(p["step_phi0"]))
    for name, r in (("self_scan", rec_self), ("adversary_scan", rec_adv)):
        art.text(name + ".csv", _record_csv(r))
        art.json(name + ".json", r.metadata)
    art.json("estimate.json", estimators.estimate_to_dict(est))
    art.text("estimates.csv", estimators.estimates_to_csv([est]))


def _matrix_outputs(est: dict, ids, art, prefix=""):
    art.text(prefix + "matrix.csv", estimators.matrix_grid_csv(est, ids))
    art.json(prefix + "matrix.json", estimators.matrix_document(est, ids))
    art.text(prefix + "estimates.csv", estimators.estimates_to_csv([est[k] for k in sorted(est)]))


def _study_dc_matrix(lab, p, art, jobs):
    _matrix_outputs(estimators.measure_matrix(lab, p["method"], jobs=jobs), lab.device.ids, art)


def _study_ac_matrix(lab, p, art, jobs):
    _matrix_outputs(estimators.measure_matrix(lab, "ac", freq=float(p["freq_mhz"]), jobs=jobs), lab.device.ids, art)


def _study_ac_spectrum(lab, p, art):
    dev = lab.device
    t, s = dev.index(p["target"]), dev.index(p["source"])
    freqs = [float(f) for f in p["freqs_mhz"]]
    spectrum = estimators.ac_crosstalk_spectrum(lab, t, s, freqs)
    dc, _ = estimators.dc_qubit_pair(lab.fork(t, s, 99), t, s)
    lines = ["freq_mhz,value_pct,sigma_pct,dc_qubit_pct,dc_qubit_sigma_pct"]
    for e in spectrum:
        lines.append(f"{e.freq!r},{e.value_pct!r},{e.sigma_pct!r},{dc.value_pct!r},{dc.sigma_pct!r}")
    art.text("spectrum.csv", "\n".join(lines) + "\n")
    art.text("estimates.csv", estimators.estimates_to_csv(spectrum + [dc]))


def _study_method_compare(lab, p, art, jobs):
    a_name, b_name = p["methods"]
    rows, z_all = ["repeat,from,to,normalized_difference"], []
    for k in range(int(p["repeats"])):
        sub = lab.fork(10_000 + k)
        a = estimators.measure_matrix(sub, a_name, jobs=jobs)
        b = estimators.measure_matrix(sub.fork(1), b_name, jobs=jobs)
        cmp = estimators.compare_methods(a, b)
        for (src, dst), z in zip(cmp.pairs, cmp.normalized.tolist()):
            rows.append(f"{k},{src},{dst},{z!r}")
        z_all.extend(cmp.normalized.tolist())
    z_all = np.array(z_all)
    bins = np.asarray(p["bins"], dtype=float)
    counts, edges = np.histogram(np.clip(z_all, bins[0], bins[-1]), bins=bins)
    hist = ["bin_low,bin_high,count"] + [f"{lo!r},{hi!r},{int(c)}" for lo, hi, c in zip(edges[:-1].tolist(), edges[1:].tolist(), counts)]
    art.text("histogram.csv", "\n".join(hist) + "\n")
    art.text("normalized_differences.csv", "\n".join(rows) + "\n")
    art.json("summary.json", {"methods": [a_name, b_name], "n": int(len(z_all)), "mean": float(z_all.mean()),
                              "rms": float(np.sqrt(np.mean(z_all**2)))})


def _gate_amps(p, device, spec):
    amps = p["gate_amps_phi0"]
    if amps is None:
        ss = gates.gate_amplitude(device, spec, "sweet_spot")
        return np.round(np.linspace(ss - 0.15, ss + 0.12, 10), 4).tolist()
    if isinstance(amps, dict):
        return np.linspace(float(amps["start"]), float(amps["stop"]), int(amps["num"])).tolist()
    return [float(a) for a in amps]


def _study_resilience(lab, p, art):
    dev = lab.device
    spec = gates.find_gate(dev, p["gate"])
    rows = gates.resilience_sweep(dev, spec, [float(a) for a in p["adversary_amps"]], _gate_amps(p, dev, spec),
                                  adversary=p["adversary"], phase=float(p["phase_rad"]), unit=p["unit"], rng=lab.rng,
                                  shots=p["shots"], spam_error=float(p["spam_error"]))
    art.text("resilience.csv", gates.rows_to_csv(rows, gates.RESILIENCE_COLUMNS))
    art.json("gate.json", {"name": spec.name, "tunable": spec.tunable, "kind": spec.kind, "g_eff_mhz": spec.g_eff,
                           "adversary": p["adversary"] or spec.adversary})


def _study_qpt(lab, p, art):
    dev = lab.device
    spec = gates.find_gate(dev, p["gate"])
    model = gates.calibrate_gate(dev, spec)
    if p["perturbations"] is not None:
        q = p["perturbations"]
        model = gates.CZModel(model.kind, model.g_eff, model.tau, model.f_m, float(q.get("delta_f01_mhz", 0.0)),
                              float(q.get("delta_mean_shift_mhz", 0.0)), float(q.get("delta_g_mhz", 0.0)), model.amp)
    elif float(p["adversary_amp"]) != 0.0:
        line = p["adversary"] or spec.adversary
        if line is None:
            raise ConfigError("qpt with an adversary amplitude needs an adversary line")
        prog = gates.adversary_program(dev, line, float(p["adversary_amp"]), model.f_m, float(p["phase_rad"]), p["unit"])
        model = gates.perturbed(model, gates.crosstalk_to_perturbations(dev, spec, model, prog))
    tomo = gates.simulate_qpt(model, lab.rng, p["shots"], float(p["spam_error"]))
    corr = gates.optimize_rz_correction(tomo)
    doc = tomo.to_dict()
    doc["rz_correction"] = {"alpha": corr.alpha, "beta": corr.beta, "fidelity": corr.fidelity}
    doc["gate"] = spec.name
    art.json("tomogram.json", doc)


def run(scenario: dict, device_doc: dict, seed: int, out: Path, realism: str | None = None, jobs: int = 1,
        inputs: dict | None = None) -> int:
    """Run a validated scenario; returns the process exit code."""
    realism = realism or scenario["realism"]
    try:
        device = device_from_dict(device_doc)
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"device document: bad or missing field {exc}") from None
    lab = VirtualLab(device, seed, realism)
    art = Artifacts(out)
    study, p = scenario["study"], scenario["params"]
    handler = globals()[f"_study_{study}"]
    if study in ("dc_matrix", "ac_matrix", "method_compare"):
        handler(lab, p, art, jobs)
    else:
        handler(lab, p, art)
    art.write({
        "scenario": scenario["name"], "study": study, "seed": seed, "realism": realism, "params": p,
        "inputs": inputs or {},
        "versions": {"fluxtalk": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
                     "python": platform.python_version()},
    })
    return EXIT_OK


def _sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def _cmd_run(args) -> int:
    path = Path(args.scenario)
    raw = path.read_bytes()
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    scenario = validate_scenario(doc)
    seed = args.seed if args.seed is not None else scenario["seed"]
    if seed is None:
        raise ConfigError("a seed is required (scenario 'seed' or --seed)")
    dev_ref = scenario["device"]
    if dev_ref in (None, "default"):
        dev_bytes = default_device_path().read_bytes()
    else:
        dev_path = Path(dev_ref)
        if not dev_path.is_absolute():
            dev_path = path.parent / dev_path
        if not dev_path.exists():
            raise ConfigError(f"device file {dev_path} not found")
        dev_bytes = dev_path.read_bytes()
    try:
        device_doc = json.loads(dev_bytes)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"device document: invalid JSON ({exc})") from None
    inputs = {"scenario_sha256": _sha256(raw), "device_sha256": _sha256(dev_bytes)}
    out = Path(args.out) if args.out else Path("results") / scenario["name"]
    if args.jobs < 1:
        raise ConfigError("--jobs must be >= 1")
    return run(scenario, device_doc, int(seed), out, args.realism, args.jobs, inputs)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fluxtalk", description="Flux crosstalk simulation and estimation studies.")
    parser.add_argument("--version", action="version", version=f"fluxtalk {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run a scenario file")
    r.add_argument("scenario", help="scenario JSON file")
    r.add_argument("--seed", type=int, default=None, help="overrides the scenario seed")
    r.add_argument("--out", default=None, help="output directory (default results/<name>)")
    mode = r.add_mutually_exclusive_group()
    mode.add_argument("--fast", dest="realism", action="store_const", const="fast",
                      help="Gaussian frequency noise of the configured sigma")
    mode.add_argument("--full", dest="realism", action="store_const", const="full",
                      help="shot-sampled Ramsey fringes")
    r.add_argument("--jobs", type=int, default=1, help="worker processes for matrix studies")
    r.set_defaults(func=_cmd_run)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except FIT_ERRORS as exc:
        print(f"{type(exc).__module__}.{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FIT
    except (FluxtalkError, FileNotFoundError) as exc:
        print(f"{type(exc).__module__}.{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
