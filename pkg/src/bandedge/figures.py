"""Pinned figure-reproduction runs, emitted as CSV traces.

Each entry point reproduces one figure-style dataset: the primary trace
goes to ``figN.csv``, baselines to ``figN_<label>.csv``, and a JSON
summary with the pinned parameters and headline numbers to
``figN.json``.

The dwell times are free parameters of the protection scheme; the
values pinned here are the output of the deterministic grid search in
``tune_dwells`` (max-min population objective) at the parameters of the
respective run, frozen so the artifacts are reproducible without paying
for the search each time.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .control import (
    GateProtocol,
    SequenceOrder,
    SequenceSpec,
    build_sequence,
    periodwise_peak_excess,
    protection_report,
    run_gate,
    stroboscopic_mode_detuning,
)
from .dynamics import (
    DetuningSchedule,
    DiscreteMode,
    SuperGaussianRise,
    SystemState,
    propagate,
)
from .io import write_summary_json, write_trace_csv
from .spectra import SpectrumKind, SpectrumModel, discretize

__all__ = ["run_figures", "FIGURES"]

DELTA_A = 0.5
DELTA_B = 0.25

# Grid-search results, objective max_min_population, tuning horizon 30:
# isotropic on the default grid (0.5..5.0 step 0.1), anisotropic on
# 1.0..8.0 step 0.25 (its static beat is about twice as slow).
TUNED_DWELL_ISO = 4.3
TUNED_DWELL_ANISO = 8.0

# Discrete driving mode and superposition used by the gate runs.  The
# mode position is not a free pin: it is derived per spectrum from the
# stroboscopic condition (one full dressed-state/mode beat cycle per
# kick interval), which makes the gradual kick phases add up at the
# sampling instants instead of being washed out by the beat.
GATE_KAPPA_D = 0.1
GATE_AMPLITUDE = 1.0 / np.sqrt(2.0)

N_MODES = 600
HORIZON_STATIC = 30.0
# Sequence figures span >= 6 dwell periods so any recurring excess is visible.
HORIZON_SEQ = 55.0
HORIZON_ANISO = 110.0
# The anisotropic run outlives the 600-mode grid's recurrence time
# (roughly 2*pi*n_modes/bandwidth for the uniform grid), so it carries
# a denser grid sized to keep the recurrence 1.5x beyond the horizon.
N_MODES_ANISO = 2800


def _iso_model() -> SpectrumModel:
    return SpectrumModel(kind=SpectrumKind.ISOTROPIC_EDGE)


def _aniso_model() -> SpectrumModel:
    return SpectrumModel(kind=SpectrumKind.ANISOTROPIC_EDGE)


def _static_trace(delta, continuum, horizon, init=None, discrete_mode=DiscreteMode()):
    if init is None:
        init = SystemState.excited(continuum.n_modes)
    schedule = DetuningSchedule(segments=((horizon, delta),),
                                discrete_mode=discrete_mode)
    return propagate(init, schedule, continuum, horizon=horizon)


def _longest_positive_run(values) -> int:
    best = run = 0
    for v in values:
        run = run + 1 if v > 0.0 else 0
        best = max(best, run)
    return best


def _sequence_spec(order, dwell, horizon):
    n_periods = int(np.ceil(horizon / (2.0 * dwell))) + 1
    return SequenceSpec(Delta_A=DELTA_A, Delta_B=DELTA_B, tau_A=dwell,
                        tau_B=dwell, order=order, n_periods=n_periods)


def fig1(out_dir: Path, *, timestamp: bool = False) -> list[Path]:
    """Population protection: counterintuitive sequence vs. both statics."""
    continuum = discretize(_iso_model(), N_MODES)
    horizon = HORIZON_SEQ
    init = SystemState.excited(continuum.n_modes)

    static_a = _static_trace(DELTA_A, continuum, horizon)
    static_b = _static_trace(DELTA_B, continuum, horizon)
    ci_spec = _sequence_spec(SequenceOrder.COUNTERINTUITIVE, TUNED_DWELL_ISO, horizon)
    in_spec = _sequence_spec(SequenceOrder.INTUITIVE, TUNED_DWELL_ISO, horizon)
    ci = propagate(init, build_sequence(ci_spec), continuum, horizon=horizon)
    intuitive = propagate(init, build_sequence(in_spec), continuum, horizon=horizon)

    ci_report = protection_report(static_a, static_b, ci)
    in_report = protection_report(static_a, static_b, intuitive)
    ci_periodwise = periodwise_peak_excess(ci, static_a, static_b, ci_spec.period)

    paths = [
        write_trace_csv(out_dir / "fig1.csv", ci),
        write_trace_csv(out_dir / "fig1_static_A.csv", static_a),
        write_trace_csv(out_dir / "fig1_static_B.csv", static_b),
        write_trace_csv(out_dir / "fig1_intuitive.csv", intuitive),
    ]
    summary = {
        "parameters": {
            "spectrum": {"kind": "isotropic", "gamma_c": 1.0,
                         "bandwidth": 100.0, "n_modes": N_MODES},
            "Delta_A": DELTA_A, "Delta_B": DELTA_B,
            "dwell": TUNED_DWELL_ISO, "horizon": horizon,
        },
        "counterintuitive": {
            "peak_excess": ci_report.peak_excess,
            "peak_excess_time": ci_report.peak_excess_time,
            "exceedance_fraction": ci_report.exceedance_fraction,
            "periodwise_peak_excess": ci_periodwise,
            "consecutive_positive_periods": _longest_positive_run(ci_periodwise),
        },
        "intuitive": {
            "peak_excess": in_report.peak_excess,
            "exceedance_fraction": in_report.exceedance_fraction,
        },
        "artifacts": [p.name for p in paths],
    }
    paths.append(write_summary_json(out_dir / "fig1.json", summary,
                                    timestamp=timestamp))
    return paths


def fig2(out_dir: Path, *, timestamp: bool = False) -> list[Path]:
    """Gate fidelity: gated sequence vs. static, ungated and single-kick runs."""
    continuum = discretize(_iso_model(), N_MODES)
    delta_d = stroboscopic_mode_detuning(
        _iso_model(), DELTA_A, DELTA_B, 2.0 * TUNED_DWELL_ISO, GATE_KAPPA_D)
    mode = DiscreteMode(Delta_d=delta_d, kappa_d=GATE_KAPPA_D)
    init = SystemState.superposition(GATE_AMPLITUDE, GATE_AMPLITUDE,
                                     continuum.n_modes)
    protocol = GateProtocol(n_steps=10, interleave_k=2)
    single = GateProtocol(n_steps=1, interleave_k=2)

    n_periods = 11  # 21 switches, one beyond the tenth kick
    spec = SequenceSpec(Delta_A=DELTA_A, Delta_B=DELTA_B,
                        tau_A=TUNED_DWELL_ISO, tau_B=TUNED_DWELL_ISO,
                        order=SequenceOrder.COUNTERINTUITIVE,
                        n_periods=n_periods)
    schedule = build_sequence(spec, discrete_mode=mode)
    horizon = schedule.total_duration

    gated = run_gate(protocol, spec, init, continuum, discrete_mode=mode,
                     horizon=horizon)
    kicked_once = run_gate(single, spec, init, continuum, discrete_mode=mode,
                           horizon=horizon)
    ungated = propagate(init, schedule, continuum, horizon=horizon)
    static_a = _static_trace(DELTA_A, continuum, horizon, init=init,
                             discrete_mode=mode)

    end_index = int(np.argmin(np.abs(kicked_once.trace.t - gated.end_time)))
    single_at_gate_end = float(kicked_once.trace.fidelity_target[end_index])

    paths = [
        write_trace_csv(out_dir / "fig2.csv", gated.trace),
        write_trace_csv(out_dir / "fig2_single_kick.csv", kicked_once.trace),
        write_trace_csv(out_dir / "fig2_ungated.csv", ungated),
        write_trace_csv(out_dir / "fig2_static_A.csv", static_a),
    ]
    n = min(len(ungated), len(static_a))
    summary = {
        "parameters": {
            "spectrum": {"kind": "isotropic", "gamma_c": 1.0,
                         "bandwidth": 100.0, "n_modes": N_MODES},
            "Delta_A": DELTA_A, "Delta_B": DELTA_B, "dwell": TUNED_DWELL_ISO,
            "kappa_d": GATE_KAPPA_D, "Delta_d": delta_d,
            "alpha0": GATE_AMPLITUDE, "beta_d0": GATE_AMPLITUDE,
            "n_steps": 10, "interleave_k": 2, "horizon": horizon,
        },
        "gate_fidelity": gated.gate_fidelity,
        "gate_start_time": gated.start_time,
        "gate_end_time": gated.end_time,
        "single_kick_fidelity_at_gate_end": single_at_gate_end,
        "ungated_fidelity_exceedance_over_static": float(np.mean(
            ungated.fidelity[:n] > static_a.fidelity[:n])),
        "artifacts": [p.name for p in paths],
    }
    paths.append(write_summary_json(out_dir / "fig2.json", summary,
                                    timestamp=timestamp))
    return paths


def fig3(out_dir: Path, *, timestamp: bool = False) -> list[Path]:
    """Protection under the anisotropic edge law."""
    continuum = discretize(_aniso_model(), N_MODES_ANISO)
    horizon = HORIZON_ANISO
    init = SystemState.excited(continuum.n_modes)

    static_a = _static_trace(DELTA_A, continuum, horizon)
    static_b = _static_trace(DELTA_B, continuum, horizon)
    spec = _sequence_spec(SequenceOrder.COUNTERINTUITIVE, TUNED_DWELL_ANISO, horizon)
    ci = propagate(init, build_sequence(spec), continuum, horizon=horizon)
    report = protection_report(static_a, static_b, ci)
    periodwise = periodwise_peak_excess(ci, static_a, static_b, spec.period)

    paths = [
        write_trace_csv(out_dir / "fig3.csv", ci),
        write_trace_csv(out_dir / "fig3_static_A.csv", static_a),
        write_trace_csv(out_dir / "fig3_static_B.csv", static_b),
    ]
    summary = {
        "parameters": {
            "spectrum": {"kind": "anisotropic", "gamma_c": 1.0,
                         "bandwidth": 100.0, "n_modes": N_MODES_ANISO},
            "Delta_A": DELTA_A, "Delta_B": DELTA_B,
            "dwell": TUNED_DWELL_ANISO, "horizon": horizon,
        },
        "peak_excess": report.peak_excess,
        "peak_excess_time": report.peak_excess_time,
        "exceedance_fraction": report.exceedance_fraction,
        "periodwise_peak_excess": periodwise,
        "consecutive_positive_periods": _longest_positive_run(periodwise),
        "artifacts": [p.name for p in paths],
    }
    paths.append(write_summary_json(out_dir / "fig3.json", summary,
                                    timestamp=timestamp))
    return paths


def fig4(out_dir: Path, *, timestamp: bool = False) -> list[Path]:
    """Finite switching time vs. the sudden approximation."""
    continuum = discretize(_iso_model(), N_MODES)
    horizon = HORIZON_STATIC
    init = SystemState.excited(continuum.n_modes)
    spec = _sequence_spec(SequenceOrder.COUNTERINTUITIVE, TUNED_DWELL_ISO, horizon)
    rise = SuperGaussianRise(tau=TUNED_DWELL_ISO / 4.0, exponent=8)

    smooth = propagate(init, build_sequence(spec, rise=rise), continuum,
                       horizon=horizon)
    sudden = propagate(init, build_sequence(spec), continuum, horizon=horizon)
    gap = float(np.max(np.abs(smooth.pop_e - sudden.pop_e)))

    paths = [
        write_trace_csv(out_dir / "fig4.csv", smooth),
        write_trace_csv(out_dir / "fig4_sudden.csv", sudden),
    ]
    summary = {
        "parameters": {
            "spectrum": {"kind": "isotropic", "gamma_c": 1.0,
                         "bandwidth": 100.0, "n_modes": N_MODES},
            "Delta_A": DELTA_A, "Delta_B": DELTA_B, "dwell": TUNED_DWELL_ISO,
            "rise": {"tau": TUNED_DWELL_ISO / 4.0, "exponent": 8},
            "horizon": horizon,
        },
        "population_sup_deviation": gap,
        "artifacts": [p.name for p in paths],
    }
    paths.append(write_summary_json(out_dir / "fig4.json", summary,
                                    timestamp=timestamp))
    return paths


FIGURES = {"fig1": fig1, "fig2": fig2, "fig3": fig3, "fig4": fig4}


def run_figures(out_dir, *, timestamp: bool = False,
                only: tuple[str, ...] | None = None) -> list[Path]:
    """Emit all (or selected) figure bundles into ``out_dir``."""
    out_dir = Path(out_dir)
    names = tuple(FIGURES) if only is None else tuple(only)
    paths: list[Path] = []
    for name in names:
        if name not in FIGURES:
            raise ValueError(f"unknown figure {name!r}; choose from {sorted(FIGURES)}")
        paths.extend(FIGURES[name](out_dir, timestamp=timestamp))
    return paths
