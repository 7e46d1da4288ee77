#!/usr/bin/env python3
"""Plot enhancement-factor spectra emitted by `eitcbs --mode spectrum`.

Example:
    eitcbs --config configs/spectrum_weak_control.toml
    python scripts/plot_spectrum.py results/weak/spectrum_*.csv -o weak.png
"""
import argparse

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("csv", nargs="+", help="spectrum CSV files (one per channel)")
    ap.add_argument("-o", "--output", default="spectrum.png")
    args = ap.parse_args()

    fig, ax = plt.subplots(figsize=(6, 4))
    for path in args.csv:
        data = np.genfromtxt(path, delimiter=",", names=True)
        label = path.split("spectrum_")[-1].replace(".csv", "")
        label = label.replace("_to_", " -> ").replace("p", "+").replace("m", "-")
        ax.errorbar(
            data["delta_over_gamma"],
            data["enhancement"],
            yerr=data["err"],
            label="H" + label.replace("H", ""),
            lw=1.2,
            elinewidth=0.6,
        )
    ax.axhline(1.0, color="0.6", lw=0.8, ls=":")
    ax.set_xlabel(r"detuning $\Delta/\Gamma$")
    ax.set_ylabel("enhancement factor")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(args.output, dpi=160)
    print(args.output)


if __name__ == "__main__":
    main()
