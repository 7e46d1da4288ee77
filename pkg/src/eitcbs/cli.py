"""Batch front end: config-driven sweeps with plot-ready output.

Exit codes: 0 success, 2 configuration error, 3 runtime or I/O error.
"""
from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from .channels import PolarizationChannel
from .config import ConfigError, load_config
from .engine import optical_depth, spectrum_sweep
from .io import diagnostics_record, emit, spectrum_record, trace_record
from .medium import transparency_window
from .pulse import scattered_traces


def _channel_file_tag(label: str) -> str:
    return label.replace("->", "_to_").replace("+", "p").replace("-", "m")


def _point_payload(breakdown, enhancement) -> dict:
    e, err = enhancement
    return {
        "delta_over_gamma": breakdown.delta,
        "enhancement": None if not np.isfinite(e) else e,
        "enhancement_err": None if not np.isfinite(err) else err,
        "single": breakdown.single,
        "single_err": breakdown.single_err,
        "ladder_by_order": list(breakdown.ladder_by_order),
        "ladder_err_by_order": list(breakdown.ladder_err_by_order),
        "crossed_by_order": list(breakdown.crossed_by_order),
        "crossed_err_by_order": list(breakdown.crossed_err_by_order),
        "ladder_total": breakdown.ladder_total,
        "crossed_total": breakdown.crossed_total,
        "crossed_total_err": breakdown.crossed_total_err,
        "truncation_tail": breakdown.truncation_tail,
        "dark_point": breakdown.dark,
        "samples": breakdown.samples,
    }


def run_spectrum(config) -> list[str]:
    channels = config.channels()
    points = spectrum_sweep(
        channels,
        config.delta_grid(),
        config.cloud(),
        config.coupling(),
        config.scheme(),
        config.mc(),
    )
    written = []
    for ch in channels:
        payload = [
            _point_payload(p.breakdowns[ch.label], p.enhancement[ch.label])
            for p in points
        ]
        record = spectrum_record(config, ch.label, payload)
        stem = os.path.join(
            config.values["out_dir"], f"spectrum_{_channel_file_tag(ch.label)}"
        )
        written += emit(record, stem, config.values["format"],
                        config.values["per_order_columns"])
    return written


def run_pulse(config) -> list[str]:
    channels = config.channels()
    kwargs = {}
    halfspan = config.values["pulse_freq_halfspan_over_gamma"]
    if halfspan:
        kwargs["freq_halfspan"] = halfspan
    traces = scattered_traces(
        channels,
        config.pulse(),
        config.cloud(),
        config.coupling(),
        config.scheme(),
        config.mc(),
        times=config.time_grid(),
        freq_nodes=config.values["pulse_freq_nodes"],
        **kwargs,
    )
    written = []
    for ch in channels:
        record = trace_record(config, traces[ch.label])
        stem = os.path.join(
            config.values["out_dir"], f"trace_{_channel_file_tag(ch.label)}"
        )
        written += emit(record, stem, config.values["format"])
    return written


def run_diagnostics(config) -> list[str]:
    scheme = config.scheme()
    cloud = config.cloud()
    coupling = config.coupling()
    rows = []
    for d in config.values["diag_deltas_over_gamma"]:
        rows.append(
            {
                "delta_over_gamma": float(d),
                "b_sigma_minus": optical_depth(d, cloud, coupling, scheme, q=-1),
                "b_pi": optical_depth(d, cloud, coupling, scheme, q=0),
                "b_sigma_plus": optical_depth(d, cloud, coupling, scheme, q=1),
            }
        )
    extras = {
        "transparency_window_over_gamma": (
            transparency_window(coupling, scheme) if config.rabi_over_gamma > 0 else None
        ),
        "pair_interference": _pair_interference_summary(config, scheme, cloud, coupling),
    }
    record = diagnostics_record(config, rows, extras)
    stem = os.path.join(config.values["out_dir"], "diagnostics")
    return emit(record, stem, config.values["format"])


def _pair_interference_summary(config, scheme, cloud, coupling) -> dict:
    """Direct/reciprocal double-scattering amplitudes of a probe atom pair.

    Makes the destructive-interference mechanism inspectable: for each
    requested detuning, lists the Zeeman assignments of the helicity
    preserving channel whose reciprocal partner is phase-shifted by more
    than pi/2, with their amplitude ratios.
    """
    from eitcbs.amplitudes import ScatteringPath, two_atom_interference_report

    sep = config.values["diag_pair_separation_cm"]
    if sep is None:
        sep = cloud.gaussian_radius / 5.0
    positions = np.array([[-0.5 * sep, 0.0, 0.0], [0.5 * sep, 0.0, 0.0]])
    channel = PolarizationChannel(1, 1)
    out = {"separation_cm": sep, "channel": channel.label, "detunings": []}
    for d in config.values["diag_deltas_over_gamma"]:
        rows = two_atom_interference_report(
            ScatteringPath(positions), channel, float(d), cloud, coupling, scheme
        )
        if not rows:
            out["detunings"].append(
                {"delta_over_gamma": float(d), "n_channels": 0, "destructive": []}
            )
            continue
        destructive = [
            {
                "zeeman": [list(z) for z in r["zeeman"]],
                "amplitude_ratio": r["amp_reciprocal"] / r["amp_direct"],
                "phase_difference": r["phase_difference"],
            }
            for r in rows
            if abs(abs(r["phase_difference"]) - np.pi) < np.pi / 2
        ]
        net = sum(r["interference"] for r in rows)
        out["detunings"].append(
            {
                "delta_over_gamma": float(d),
                "n_channels": len(rows),
                "net_interference": net,
                "destructive": destructive,
            }
        )
    return out


def run(config) -> list[str]:
    """Execute the configured mode and write one record per channel.

    Returns the written file paths; raises ConfigError on invalid engine
    parameters and OSError on I/O failure (no partial results are left
    behind: each file is written atomically after the computation ends).
    """
    runner = {
        "spectrum": run_spectrum,
        "pulse": run_pulse,
        "diagnostics": run_diagnostics,
    }[config.mode]
    return runner(config)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="eitcbs",
        description=(
            "Coherent-backscattering spectra and pulse dynamics for a cold "
            "atomic cloud under an EIT control field."
        ),
    )
    parser.add_argument("--config", required=True, help="path to a TOML run config")
    parser.add_argument("--mode", choices=("spectrum", "pulse", "diagnostics"))
    parser.add_argument("--seed", type=int)
    parser.add_argument("--workers", type=int)
    parser.add_argument("--out", help="output directory")
    parser.add_argument("--format", choices=("csv", "json"))
    args = parser.parse_args(argv)

    overrides = {
        "mode": args.mode,
        "seed": args.seed,
        "workers": args.workers,
        "out_dir": args.out,
        "format": args.format,
    }
    try:
        config = load_config(args.config, overrides=overrides)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"cannot read config: {exc}", file=sys.stderr)
        return 3

    try:
        written = run(config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3
    for path in written:
        print(path)
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
