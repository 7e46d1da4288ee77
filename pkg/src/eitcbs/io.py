"""Result records and their CSV/JSON serialization.

Numeric payloads are written with full repr precision and fixed key/column
order, so identical runs produce byte-identical files.  Files are written
atomically (temp file + rename); a failed run never leaves partial output.

CSV schemas (documented and stable):

* spectrum:  delta_over_gamma, enhancement, err, single, ladder_total,
  crossed_total[, ladder_2..ladder_N, crossed_2..crossed_N]
* trace:     t_gamma, single[, ladder_n, crossed_n interleaved per order],
  enhancement_t
* diagnostics: delta_over_gamma, optical_depth_sigma_minus,
  optical_depth_pi, optical_depth_sigma_plus

JSON records mirror the full per-point breakdowns plus run metadata.
"""
from __future__ import annotations

import json
import os
import tempfile

import numpy as np

from . import __version__
from .kernels import backend_name

__all__ = [
    "run_metadata",
    "spectrum_record",
    "trace_record",
    "diagnostics_record",
    "emit",
    "read_json",
    "spectrum_csv_header",
]


def run_metadata(config, extra: dict | None = None) -> dict:
    """Everything needed to reproduce and interpret a run."""
    meta = {
        "code_version": __version__,
        "backend": backend_name(config.values.get("backend")),
        "config_digest": config.digest(),
        "defaults_applied": list(config.defaults_applied),
        "conventions": {
            "gaussian_density": "n0 * exp(-r^2 / (2 r0^2))",
            "helicity": "attached to each beam's own propagation direction",
            "cross_section_unit": "bare on-resonance single-atom cross section per sr",
            "zeeman_average": "uniform over F=1 (weight 1/3 per atom)",
            "chunk_samples": 1024,
            "common_random_numbers": True,
            "reduction": "fixed chunk order; worker-count independent",
        },
    }
    if extra:
        meta.update(extra)
    return meta


def _fmt(x) -> str:
    if isinstance(x, float):
        return repr(x)
    return str(x)


def spectrum_record(config, channel_label: str, points: list[dict]) -> dict:
    return {
        "schema": "eitcbs/spectrum-v1",
        "config": config.resolved(),
        "metadata": run_metadata(config),
        "channel": channel_label,
        "points": points,
    }


def trace_record(config, trace) -> dict:
    return {
        "schema": "eitcbs/trace-v1",
        "config": config.resolved(),
        "metadata": run_metadata(
            config,
            {
                "freq_nodes": trace.freq_nodes,
                "freq_halfspan_over_gamma": trace.freq_halfspan,
                "denominator_floor": trace.denominator_floor,
            },
        ),
        "channel": trace.channel,
        "times_gamma": trace.times.tolist(),
        "single": trace.single.tolist(),
        "ladder_by_order": [l.tolist() for l in trace.ladder_by_order],
        "crossed_by_order": [c.tolist() for c in trace.crossed_by_order],
        "enhancement_t": _nan_to_none(trace.enhancement_t),
        "incoherent_err": trace.incoherent_err.tolist(),
        "crossed_err": trace.crossed_err.tolist(),
        "samples": trace.samples,
    }


def diagnostics_record(config, rows: list[dict], extras: dict) -> dict:
    return {
        "schema": "eitcbs/diagnostics-v1",
        "config": config.resolved(),
        "metadata": run_metadata(config),
        "optical_depths": rows,
        **extras,
    }


def _nan_to_none(arr) -> list:
    return [None if not np.isfinite(v) else float(v) for v in np.asarray(arr)]


def _atomic_write(path: str, payload: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def emit_json(record: dict, path: str) -> str:
    _atomic_write(path, json.dumps(record, sort_keys=True, indent=1) + "\n")
    return path


def read_json(path: str) -> dict:
    with open(path) as fh:
        return json.load(fh)


def spectrum_csv_header(max_order: int, per_order: bool) -> list[str]:
    cols = ["delta_over_gamma", "enhancement", "err", "single",
            "ladder_total", "crossed_total"]
    if per_order:
        cols += [f"ladder_{n}" for n in range(2, max_order + 1)]
        cols += [f"crossed_{n}" for n in range(2, max_order + 1)]
    return cols


def spectrum_csv(record: dict, per_order: bool) -> str:
    points = record["points"]
    max_order = record["config"]["max_order"]
    cols = spectrum_csv_header(max_order, per_order)
    lines = [",".join(cols)]
    for p in points:
        row = [
            _fmt(p["delta_over_gamma"]),
            _fmt(p["enhancement"]) if p["enhancement"] is not None else "nan",
            _fmt(p["enhancement_err"]) if p["enhancement_err"] is not None else "nan",
            _fmt(p["single"]),
            _fmt(p["ladder_total"]),
            _fmt(p["crossed_total"]),
        ]
        if per_order:
            row += [_fmt(v) for v in p["ladder_by_order"]]
            row += [_fmt(v) for v in p["crossed_by_order"]]
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def trace_csv(record: dict) -> str:
    orders = len(record["ladder_by_order"])
    cols = ["t_gamma", "single"]
    for n in range(orders):
        cols += [f"ladder_{n + 2}", f"crossed_{n + 2}"]
    cols.append("enhancement_t")
    lines = [",".join(cols)]
    times = record["times_gamma"]
    enh = record["enhancement_t"]
    for i, t in enumerate(times):
        row = [_fmt(t), _fmt(record["single"][i])]
        for n in range(orders):
            row.append(_fmt(record["ladder_by_order"][n][i]))
            row.append(_fmt(record["crossed_by_order"][n][i]))
        row.append("nan" if enh[i] is None else _fmt(enh[i]))
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def diagnostics_csv(record: dict) -> str:
    cols = ["delta_over_gamma", "optical_depth_sigma_minus",
            "optical_depth_pi", "optical_depth_sigma_plus"]
    lines = [",".join(cols)]
    for row in record["optical_depths"]:
        lines.append(
            ",".join(
                _fmt(row[k])
                for k in ("delta_over_gamma", "b_sigma_minus", "b_pi", "b_sigma_plus")
            )
        )
    return "\n".join(lines) + "\n"


def emit(record: dict, path_stem: str, fmt: str, per_order: bool = True) -> list[str]:
    """Write one record; returns the created file paths.

    CSV output keeps the full record in a .meta.json sidecar so metadata is
    never lost.
    """
    written = []
    if fmt == "json":
        written.append(emit_json(record, path_stem + ".json"))
        return written
    schema = record["schema"]
    if schema.startswith("eitcbs/spectrum"):
        body = spectrum_csv(record, per_order)
    elif schema.startswith("eitcbs/trace"):
        body = trace_csv(record)
    else:
        body = diagnostics_csv(record)
    _atomic_write(path_stem + ".csv", body)
    written.append(path_stem + ".csv")
    sidecar = {k: v for k, v in record.items() if k in ("schema", "config", "metadata", "channel")}
    written.append(emit_json(sidecar, path_stem + ".meta.json"))
    return written
