#!/usr/bin/env python3
"""Plot time traces emitted by `eitcbs --mode pulse`.

Example:
    eitcbs --config configs/pulse_weak_control.toml
    python scripts/plot_traces.py results/pulse/trace_Hp_to_Hm.csv -o pulse.png
"""
import argparse

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("csv", help="trace CSV file")
    ap.add_argument("-o", "--output", default="traces.png")
    ap.add_argument("--tau", type=float, default=200.0, help="pulse length (1/Gamma)")
    args = ap.parse_args()

    data = np.genfromtxt(args.csv, delimiter=",", names=True)
    t = data["t_gamma"]
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(6, 6), sharex=True)
    pulse = np.exp(-((t / args.tau) ** 2))
    ax1.plot(t, pulse * data["single"].max(), color="0.8", label="input (arb.)")
    ax1.plot(t, data["single"], label="single")
    if "ladder_2" in data.dtype.names:
        ax1.plot(t, data["ladder_2"], label="double (ladder)")
        ax1.plot(t, data["crossed_2"], label="double (crossed)", ls="--")
    ax1.set_ylabel(r"$d\sigma/d\Omega$  [$\sigma_0$/sr]")
    ax1.legend(fontsize=8)
    ax2.plot(t, data["enhancement_t"], color="C3")
    ax2.axhline(1.0, color="0.6", lw=0.8, ls=":")
    ax2.set_xlabel(r"time $t\,\Gamma$")
    ax2.set_ylabel("enhancement factor")
    fig.tight_layout()
    fig.savefig(args.output, dpi=160)
    print(args.output)


if __name__ == "__main__":
    main()
