"""Regenerate src/fluxtalk/data/default_device.json.

Qubit and resonator numbers are the fixed inputs below (Q4 has no entry).
SQUID asymmetries, coherence times, line conversions and the
crosstalk network are invented but fixed by the seed below.
"""

import json
from pathlib import Path

import numpy as np

SEED = 20191
OUT = Path(__file__).resolve().parents[1] / "src" / "fluxtalk" / "data" / "default_device.json"

# id, resonator GHz, f01 GHz, anharmonicity MHz, chi MHz
TUNABLE = [
    ("Q0", 5.957, 4.678, -186, -0.59),
    ("Q2", 5.913, 4.759, -187, -0.76),
    ("Q6", 5.836, 4.639, -189, -0.75),
    ("Q10", 5.950, 4.766, -161, -0.75),
    ("Q12", 5.914, 4.849, -183, -0.95),
    ("Q14", 5.872, 4.767, -188, -0.78),
    ("Q16", 5.831, 4.480, -191, -0.54),
]
FIXED = {"Q1": (3.821, -206), "Q3": (3.767, -235), "Q5": (3.919, -203), "Q7": (3.880, -204),
         "Q11": (3.573, -186), "Q13": (3.646, -208), "Q15": (3.753, -206), "Q17": (3.533, -212)}
AC_GRID = np.linspace(50, 500, 10)


def main():
    rng = np.random.default_rng(SEED)
    ids = [row[0] for row in TUNABLE]
    n = len(ids)
    asym = np.round(rng.uniform(0.72, 0.8, n), 3)
    asym[0] = 0.75
    transmons = [
        {"id": i, "f01_max_ghz": f, "eta_mhz": eta, "asymmetry": float(d),
         "t1_us": float(np.round(rng.uniform(20, 40), 1)), "t2_us": float(np.round(rng.uniform(10, 25), 1))}
        for (i, _, f, eta, _), d in zip(TUNABLE, asym)
    ]
    resonators = [{"qubit": i, "f_bare_ghz": fr, "chi_mhz": chi} for i, fr, _, _, chi in TUNABLE]
    lines = []
    for i in ids:
        dc = float(np.round(rng.uniform(0.7, 1.3), 4))
        ac = dc * (1 + rng.uniform(0.05, 0.3) * AC_GRID / 500)
        lines.append({"qubit": i, "dc_volts_per_phi0": dc, "ac_freq_mhz": AC_GRID.tolist(),
                      "ac_volts_per_phi0": np.round(ac, 5).tolist(), "phase_offset_rad": 0.0})

    x = np.exp(rng.uniform(np.log(1e-4), np.log(0.02), (n, n)))
    x = np.round(x, 6)
    np.fill_diagonal(x, 1.0)
    x[ids.index("Q0"), ids.index("Q12")] = 0.0353

    ac = []
    for t in range(n):
        for s in range(n):
            if t == s:
                continue
            base = x[t, s] * rng.uniform(0.3, 0.9)
            ratio = base * np.ones_like(AC_GRID)
            if rng.uniform() < 0.3:
                # a resonance-like feature in the on-chip transfer function
                f0, width, height = rng.uniform(120, 450), rng.uniform(20, 60), rng.uniform(0.5, 2.0)
                ratio = ratio * (1 + height / (1 + ((AC_GRID - f0) / width) ** 2))
            else:
                ratio = ratio * (1 + rng.uniform(-0.2, 0.2) * (AC_GRID - 50) / 450)
            ac.append({"from": ids[s], "to": ids[t], "freq_mhz": AC_GRID.tolist(), "ratio": np.round(ratio, 7).tolist()})

    gates = [{
        "name": "CZ_Q1_Q2", "tunable": "Q2", "kind": "CZ02", "g_eff_mhz": 2.0, "amp_phi0": "sweet_spot",
        "partner": {"id": "Q1", "f01_ghz": FIXED["Q1"][0], "eta_mhz": FIXED["Q1"][1]}, "adversary": "Q0",
    }]
    doc = {
        "description": "Seven tunable transmons with a fixed-frequency CZ partner; crosstalk network synthetic.",
        "transmons": transmons,
        "resonators": resonators,
        "flux_lines": lines,
        "crosstalk_dc": x.tolist(),
        "crosstalk_ac": ac,
        "noise": {},
        "gates": gates,
        "fixed_qubits": [{"id": k, "f01_ghz": v[0], "eta_mhz": v[1]} for k, v in FIXED.items()],
    }
    OUT.write_text(json.dumps(doc, indent=1) + "\n")
    print(f"wrote {OUT}")


if __name__ == "__main__":
    main()
