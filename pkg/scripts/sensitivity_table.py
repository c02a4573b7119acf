"""Flux sensitivity and run time per measured pair for the three methods.

Sensitivities are empirical spreads over seeds on the shipped device (pair
Q0 <- Q12), in micro flux quanta.

    python3 scripts/sensitivity_table.py --seeds 50
"""

import argparse
import dataclasses

import numpy as np

from fluxtalk.config import load_device
from fluxtalk.estimators import ac_pair, dc_qubit_pair, dc_resonator_pair, fit_dc_resonator, flux_sensitivity, resonator_guess
from fluxtalk.lab import VirtualLab


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, default=50)
    args = ap.parse_args()

    dev = load_device()
    t, s = dev.index("Q0"), dev.index("Q12")
    net = dataclasses.replace(dev.network, x_dc=dev.network.x_dc.copy(), x_ac=dict(dev.network.x_ac))
    net.x_ac.pop((t, s), None)
    net.x_dc[t, s] = 0.01
    ac_dev = dataclasses.replace(dev, network=net)

    offsets, t_res = [], 0.0
    for k in range(args.seeds):
        lab = VirtualLab(dev, seed=k)
        _, recs = dc_resonator_pair(lab, t, s)
        offsets.append(fit_dc_resonator(recs, resonator_guess(lab, t), return_fit=True)[1].offsets[1])
        t_res = sum(r.metadata["elapsed_s"] for r in recs)
    _, recs = dc_qubit_pair(VirtualLab(dev, seed=0), t, s)
    t_qubit = sum(r.metadata["elapsed_s"] for r in recs)
    flux, t_ac = [], 0.0
    for k in range(args.seeds):
        est, rec = ac_pair(VirtualLab(ac_dev, seed=k), t, s, 200.0, amp_b_phi0=0.5)
        flux.append(est.value * 0.5)
        t_ac = rec.metadata["elapsed_s"]

    noise = dev.noise
    print("method,sensitivity_uphi0,basis,run_time_s")
    print(f"dc_resonator,{1e6 * np.std(offsets, ddof=1):.1f},offset spread over {args.seeds} seeds,{t_res:.0f}")
    print(f"dc_qubit,{1e6 * flux_sensitivity(noise.ramsey_freq_sigma_static_mhz, 2000):.1f},"
          f"sigma_f / 2000 MHz per phi0,{t_qubit:.0f}")
    print(f"ac_peak,{1e6 * flux_sensitivity(noise.ramsey_freq_sigma_mod_mhz, 900):.1f},"
          f"sigma_f / 900 MHz per phi0,{t_ac:.0f}")
    print(f"ac_phase_scan,{1e6 * np.std(flux, ddof=1):.1f},effective-flux spread over {args.seeds} seeds,{t_ac:.0f}")


if __name__ == "__main__":
    main()
