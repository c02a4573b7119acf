"""Crosstalk infidelity versus crosstalk ratio, away from and at the AC sweet spot.

    python3 scripts/sweet_spot_scaling.py > scaling.csv

The fitted log-log slopes go to stderr.
"""

import argparse
import dataclasses
import sys

import numpy as np

from fluxtalk.config import load_device
from fluxtalk.gates import (adversary_program, average_infidelity, calibrate_gate, crosstalk_to_perturbations,
                            cz_unitary, find_gate, perturbed)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--away-amp", type=float, default=0.4, help="gate amplitude away from the sweet spot, phi0")
    ap.add_argument("--adversary-amp", type=float, default=0.1, help="phi0")
    args = ap.parse_args()

    dev = load_device()
    spec = find_gate(dev)
    t, s = dev.index(spec.tunable), dev.index(spec.adversary)
    xs = np.geomspace(5e-4, 5e-3, 10)
    print("gate_amp_phi0,crosstalk,delta_f01_mhz,infidelity")
    for amp in (args.away_amp, "sweet_spot"):
        model = calibrate_gate(dev, spec, amp)
        r = []
        for x in xs:
            net = dataclasses.replace(dev.network, x_dc=dev.network.x_dc.copy(), x_ac=dict(dev.network.x_ac))
            net.x_dc[t, s] = x
            net.x_ac.pop((t, s), None)
            d = dataclasses.replace(dev, network=net)
            p = crosstalk_to_perturbations(d, spec, model, adversary_program(d, spec.adversary, args.adversary_amp, model.f_m))
            r.append(average_infidelity(cz_unitary(perturbed(model, p))))
            print(f"{model.amp:.5f},{x:.6g},{p.delta_f01:.6g},{r[-1]:.6g}")
        slope = np.polyfit(np.log(xs), np.log(r), 1)[0]
        print(f"gate amplitude {model.amp:.4f} phi0: log-log slope {slope:.3f}", file=sys.stderr)


if __name__ == "__main__":
    main()
