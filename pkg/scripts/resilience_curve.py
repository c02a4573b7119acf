"""Gate fidelity versus gate amplitude under an equal-frequency adversary tone.

    python3 scripts/resilience_curve.py --adversary-amps 0.2 0.4 0.6 > resilience.csv
"""

import argparse

import numpy as np

from fluxtalk.config import load_device
from fluxtalk.gates import RESILIENCE_COLUMNS, find_gate, gate_amplitude, resilience_sweep, rows_to_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--device", default=None, help="device JSON (default: shipped device)")
    ap.add_argument("--gate", default=None)
    ap.add_argument("--adversary-amps", type=float, nargs="+", default=[0.2, 0.4, 0.6], help="volts")
    ap.add_argument("--points", type=int, default=25)
    ap.add_argument("--phase", type=float, default=0.0, help="adversary phase, rad")
    args = ap.parse_args()

    dev = load_device(args.device)
    spec = find_gate(dev, args.gate)
    ss = gate_amplitude(dev, spec, "sweet_spot")
    amps = np.linspace(ss - 0.15, ss + 0.12, args.points)
    rows = resilience_sweep(dev, spec, args.adversary_amps, amps, phase=args.phase)
    print(rows_to_csv(rows, RESILIENCE_COLUMNS), end="")


if __name__ == "__main__":
    main()
