"""Deterministic serialization of traces and reports.

All files are plain CSV/JSON with fixed 12-significant-digit formatting,
so identical inputs produce byte-identical artifacts.  Times and
frequencies are written in gamma_c units, matching the configuration
schema.
"""

from __future__ import annotations

import json
import math
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .dynamics import Trace
from .stablestate import StablePole
from .weakcoupling import RateComparison

__all__ = [
    "TRACE_COLUMNS",
    "write_trace_csv",
    "read_trace_csv",
    "write_stable_state_csv",
    "write_rate_report_csv",
    "write_summary_json",
]

TRACE_COLUMNS = (
    "gamma_c_t",
    "pop_e",
    "pop_d",
    "pop_continuum",
    "re_alpha",
    "im_alpha",
    "re_beta_d",
    "im_beta_d",
    "fidelity",
)

_FMT = "%.12g"


def _format_row(values) -> str:
    return ",".join(_FMT % v for v in values)


def write_trace_csv(path, trace: Trace, gamma_c: float | None = None) -> Path:
    """One row per sample; a tenth column appears when the trace carries
    a target fidelity (gate runs)."""
    if gamma_c is None:
        gamma_c = float(trace.metadata.get("gamma_c", 1.0))
    columns = [
        trace.t * gamma_c,
        trace.pop_e,
        trace.pop_d,
        trace.pop_continuum,
        trace.alpha.real,
        trace.alpha.imag,
        trace.beta_d.real,
        trace.beta_d.imag,
        trace.fidelity,
    ]
    header = list(TRACE_COLUMNS)
    if trace.fidelity_target is not None:
        columns.append(trace.fidelity_target)
        header.append("fidelity_target")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in zip(*columns):
            fh.write(_format_row(row) + "\n")
    return path


def read_trace_csv(path) -> dict[str, np.ndarray]:
    """Columns of a trace CSV keyed by header name."""
    data = np.genfromtxt(path, delimiter=",", names=True)
    names = data.dtype.names
    if names is None or "gamma_c_t" not in names:
        raise ValueError(f"{path} is not a trace CSV")
    return {name: np.atleast_1d(data[name]) for name in names}


def write_stable_state_csv(path, rows: list[tuple[float, StablePole | None]],
                           gamma_c: float = 1.0) -> Path:
    """(detuning, pole offset, weight, decay budget) per requested detuning.

    A row with pole None (no solution below the band) writes NaN fields so
    the detuning stays visible in the table.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        fh.write("Delta_over_gamma_c,pole_offset_over_gamma_c,weight,decay_budget\n")
        for delta, pole in rows:
            if pole is None:
                fields = (delta / gamma_c, math.nan, math.nan, math.nan)
            else:
                fields = (delta / gamma_c, pole.delta0 / gamma_c,
                          pole.weight, 1.0 - pole.weight)
            fh.write(_format_row(fields) + "\n")
    return path


def write_rate_report_csv(path, comparisons: list[RateComparison],
                          gamma_c: float = 1.0) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        fh.write("Delta_over_gamma_c,R_formula,R_fit,rel_error\n")
        for cmp in comparisons:
            fh.write(_format_row((
                cmp.detuning / gamma_c,
                cmp.rate_formula / gamma_c,
                cmp.rate_fit / gamma_c,
                cmp.rel_error,
            )) + "\n")
    return path


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if isinstance(obj, Path):
        return str(obj)
    return obj


def write_summary_json(path, payload: dict, *, timestamp: bool = False) -> Path:
    """Sorted-key JSON summary; the timestamp is off by default so that
    reruns compare byte-identical."""
    doc = _jsonable(payload)
    if timestamp:
        doc["generated_at"] = datetime.now(timezone.utc).isoformat()
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path
