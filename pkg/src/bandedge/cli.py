"""Command-line front end: config-driven experiment runs with CSV/JSON output.

Subcommands
-----------
static        one fixed detuning, trace CSV + summary
sequence      alternating detuning program (optionally dwell-tuned) with
              static baselines and protection statistics
gate          interleaved phase-kick protocol on a sequence
stable-state  pole/weight table over a list of detunings
weak-coupling convolution-formula vs. fitted decay rates
sweep         several named runs from one file, optionally threaded
figures       the pinned figure-reproduction bundles (fig1..fig4)

All artifacts are deterministic; pass --no-seedless-deterministic to add
a timestamp field to JSON summaries.
"""

from __future__ import annotations

import argparse
import copy
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import kernels
from .config import (
    ConfigError,
    ResolvedConfig,
    load_config,
    resolve_config,
    resolve_sweep,
)
from .control import (
    ScheduleExhaustedError,
    SequenceSpec,
    build_sequence,
    periodwise_peak_excess,
    protection_report,
    run_gate,
    tune_dwells,
)
from .dynamics import (
    DetuningSchedule,
    IntegrationDivergedError,
    SystemState,
    propagate,
)
from .figures import FIGURES, run_figures
from .io import (
    write_rate_report_csv,
    write_stable_state_csv,
    write_summary_json,
    write_trace_csv,
)
from .spectra import discretize
from .stablestate import NoBoundStateError, stable_pole
from .weakcoupling import compare_rates

__all__ = ["main"]


def _initial_state(cfg: ResolvedConfig, n_modes: int) -> SystemState:
    if cfg.initial_kind == "excited":
        return SystemState.excited(n_modes)
    return SystemState.superposition(cfg.alpha0, cfg.beta_d0, n_modes)


def _tail_mean(values: np.ndarray, fraction: float = 0.2) -> float:
    start = int((1.0 - fraction) * values.size)
    return float(np.mean(values[start:]))


def _base_summary(cfg: ResolvedConfig, resolved: dict) -> dict:
    return {"config": resolved, "backend": kernels.backend_name()}


def _run_static(cfg: ResolvedConfig, out_dir: Path, timestamp: bool) -> list[Path]:
    continuum = discretize(cfg.model, cfg.n_modes)
    init = _initial_state(cfg, continuum.n_modes)
    schedule = DetuningSchedule(segments=((cfg.horizon, cfg.static_delta),),
                                rise=cfg.rise, discrete_mode=cfg.discrete_mode)
    trace = propagate(init, schedule, continuum, dt=cfg.dt, horizon=cfg.horizon,
                      sampling=cfg.sampling)
    summary = _base_summary(cfg, cfg.resolved)
    summary["results"] = {
        "plateau_population": _tail_mean(trace.pop_e),
        "final_population": float(trace.pop_e[-1]),
        "final_fidelity": float(trace.fidelity[-1]),
        "max_norm_drift": trace.max_norm_drift(),
    }
    try:
        pole = stable_pole(cfg.model, cfg.static_delta, cfg.discrete_mode)
        summary["results"]["stable_state"] = {
            "pole_offset_over_gamma_c": pole.delta0 / cfg.gamma_c,
            "weight": pole.weight,
            "plateau_prediction": pole.plateau,
        }
    except NoBoundStateError:
        summary["results"]["stable_state"] = None
    paths = [write_trace_csv(out_dir / f"{cfg.output_prefix}.csv", trace)]
    paths.append(write_summary_json(out_dir / f"{cfg.output_prefix}.json",
                                    summary, timestamp=timestamp))
    return paths


def _resolve_dwells(cfg: ResolvedConfig, continuum, init) -> tuple[SequenceSpec, dict]:
    """Grid-tune the dwells when the config asked for it."""
    resolved = copy.deepcopy(cfg.resolved)
    spec = cfg.spec
    if not cfg.needs_tuning:
        return spec, resolved
    result = tune_dwells(
        spec, continuum, cfg.tune_objective, cfg.tune_grid,
        init=init, rise=cfg.rise, discrete_mode=cfg.discrete_mode,
        dt=cfg.dt, sampling=cfg.sampling,
    )
    tuned = result.spec
    n_periods = spec.n_periods
    if resolved["schedule"]["n_periods"] == "fill":
        n_periods = math.ceil(cfg.horizon / tuned.period) + 1
    spec = SequenceSpec(tuned.Delta_A, tuned.Delta_B, tuned.tau_A, tuned.tau_B,
                        tuned.order, n_periods)
    resolved["schedule"]["dwell"] = [tuned.tau_A * cfg.gamma_c,
                                     tuned.tau_B * cfg.gamma_c]
    resolved["schedule"]["tuned"] = {
        "objective": result.objective.value,
        "score": result.score,
        "n_candidates": len(result.evaluations),
    }
    return spec, resolved


def _static_baselines(cfg: ResolvedConfig, continuum, init, spec):
    traces = []
    for delta in (spec.Delta_A, spec.Delta_B):
        schedule = DetuningSchedule(segments=((cfg.horizon, delta),),
                                    discrete_mode=cfg.discrete_mode)
        traces.append(propagate(init, schedule, continuum, dt=cfg.dt,
                                horizon=cfg.horizon, sampling=cfg.sampling))
    return traces


def _run_sequence(cfg: ResolvedConfig, out_dir: Path, timestamp: bool) -> list[Path]:
    continuum = discretize(cfg.model, cfg.n_modes)
    init = _initial_state(cfg, continuum.n_modes)
    spec, resolved = _resolve_dwells(cfg, continuum, init)
    schedule = build_sequence(spec, cfg.rise, cfg.discrete_mode)
    trace = propagate(init, schedule, continuum, dt=cfg.dt, horizon=cfg.horizon,
                      sampling=cfg.sampling)
    static_a, static_b = _static_baselines(cfg, continuum, init, spec)
    report = protection_report(static_a, static_b, trace)
    peaks = periodwise_peak_excess(trace, static_a, static_b, spec.period)

    summary = _base_summary(cfg, resolved)
    summary["results"] = {
        "order": spec.order.value,
        "dwell_over_gamma_c": [spec.tau_A * cfg.gamma_c, spec.tau_B * cfg.gamma_c],
        "peak_excess": report.peak_excess,
        "peak_excess_time": report.peak_excess_time,
        "exceedance_fraction": report.exceedance_fraction,
        "periodwise_peak_excess": peaks,
        "avg_fidelity_ratio_static_A": report.avg_fidelity_ratio_a,
        "avg_fidelity_ratio_static_B": report.avg_fidelity_ratio_b,
        "max_norm_drift": trace.max_norm_drift(),
    }
    prefix = cfg.output_prefix
    paths = [
        write_trace_csv(out_dir / f"{prefix}.csv", trace),
        write_trace_csv(out_dir / f"{prefix}_static_A.csv", static_a),
        write_trace_csv(out_dir / f"{prefix}_static_B.csv", static_b),
        write_summary_json(out_dir / f"{prefix}.json", summary,
                           timestamp=timestamp),
    ]
    return paths


def _run_gate(cfg: ResolvedConfig, out_dir: Path, timestamp: bool) -> list[Path]:
    continuum = discretize(cfg.model, cfg.n_modes)
    init = _initial_state(cfg, continuum.n_modes)
    spec, resolved = _resolve_dwells(cfg, continuum, init)
    result = run_gate(cfg.gate, spec, init, continuum, rise=cfg.rise,
                      discrete_mode=cfg.discrete_mode, dt=cfg.dt,
                      horizon=cfg.horizon, sampling=cfg.sampling)
    schedule = DetuningSchedule(segments=((cfg.horizon, spec.Delta_A),),
                                discrete_mode=cfg.discrete_mode)
    static_a = propagate(init, schedule, continuum, dt=cfg.dt,
                         horizon=cfg.horizon, sampling=cfg.sampling)
    n = min(len(result.trace), len(static_a))
    exceed = float(np.mean(result.trace.fidelity[:n] > static_a.fidelity[:n]))

    summary = _base_summary(cfg, resolved)
    summary["results"] = {
        "gate_fidelity": result.gate_fidelity,
        "start_time": result.start_time,
        "end_time": result.end_time,
        "n_steps": result.protocol.n_steps,
        "interleave_k": result.protocol.interleave_k,
        "kick_times": result.kick_times,
        "fidelity_exceedance_over_static_A": exceed,
        "avg_fidelity_ratio_static_A": float(
            np.mean(result.trace.fidelity[:n]) / np.mean(static_a.fidelity[:n])),
        "max_norm_drift": result.trace.max_norm_drift(),
    }
    prefix = cfg.output_prefix
    return [
        write_trace_csv(out_dir / f"{prefix}.csv", result.trace),
        write_trace_csv(out_dir / f"{prefix}_static_A.csv", static_a),
        write_summary_json(out_dir / f"{prefix}.json", summary,
                           timestamp=timestamp),
    ]


def _run_stable_state(cfg: ResolvedConfig, out_dir: Path, timestamp: bool) -> list[Path]:
    rows = []
    results = []
    for delta in cfg.detunings:
        try:
            pole = stable_pole(cfg.model, delta, cfg.discrete_mode)
            results.append({
                "Delta_over_gamma_c": delta / cfg.gamma_c,
                "pole_offset_over_gamma_c": pole.delta0 / cfg.gamma_c,
                "weight": pole.weight,
                "decay_budget": 1.0 - pole.weight,
                "plateau_prediction": pole.plateau,
            })
        except NoBoundStateError as exc:
            pole = None
            results.append({
                "Delta_over_gamma_c": delta / cfg.gamma_c,
                "error": str(exc),
            })
        rows.append((delta, pole))
    summary = _base_summary(cfg, cfg.resolved)
    summary["results"] = results
    prefix = cfg.output_prefix
    return [
        write_stable_state_csv(out_dir / f"{prefix}.csv", rows, cfg.gamma_c),
        write_summary_json(out_dir / f"{prefix}.json", summary,
                           timestamp=timestamp),
    ]


def _run_weak_coupling(cfg: ResolvedConfig, out_dir: Path, timestamp: bool) -> list[Path]:
    comparisons = compare_rates(cfg.detunings, cfg.model, n_modes=cfg.n_modes,
                                dt=cfg.dt, horizon=cfg.horizon,
                                sampling=cfg.sampling)
    summary = _base_summary(cfg, cfg.resolved)
    summary["results"] = [
        {
            "Delta_over_gamma_c": c.detuning / cfg.gamma_c,
            "rate_formula": c.rate_formula / cfg.gamma_c,
            "rate_fit": c.rate_fit / cfg.gamma_c,
            "rel_error": c.rel_error,
            "plateau": c.plateau,
            "exponential_regime": c.exponential_regime,
        }
        for c in comparisons
    ]
    prefix = cfg.output_prefix
    return [
        write_rate_report_csv(out_dir / f"{prefix}.csv", comparisons, cfg.gamma_c),
        write_summary_json(out_dir / f"{prefix}.json", summary,
                           timestamp=timestamp),
    ]


_RUNNERS = {
    "static": _run_static,
    "sequence": _run_sequence,
    "gate": _run_gate,
    "stable-state": _run_stable_state,
    "weak-coupling": _run_weak_coupling,
}


def _run_sweep(doc: dict, base_dir: Path, out_dir: Path, timestamp: bool,
               threads: int) -> list[Path]:
    configs = resolve_sweep(doc, base_dir=base_dir)

    def one(cfg: ResolvedConfig) -> list[Path]:
        return _RUNNERS[cfg.experiment](cfg, out_dir, timestamp)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(one, configs))
    else:
        results = [one(cfg) for cfg in configs]

    paths = [p for batch in results for p in batch]
    index = {
        cfg.output_prefix: [p.name for p in batch]
        for cfg, batch in zip(configs, results)
    }
    paths.append(write_summary_json(out_dir / "sweep.json",
                                    {"runs": index}, timestamp=timestamp))
    return paths


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bandedge",
        description="Band-edge qubit dynamics: simulation and analysis runs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, config_required=True):
        if config_required:
            p.add_argument("--config", required=True, help="YAML experiment config")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--seedless-deterministic",
                       action=argparse.BooleanOptionalAction, default=True,
                       help="omit wall-clock fields so reruns are byte-identical")

    for name in _RUNNERS:
        add_common(sub.add_parser(name, help=f"run a {name} experiment"))

    sweep = sub.add_parser("sweep", help="run several named experiments")
    add_common(sweep)
    sweep.add_argument("--threads", type=int, default=1,
                       help="concurrent runs (default 1)")

    figures = sub.add_parser("figures", help="emit the pinned figure bundles")
    add_common(figures, config_required=False)
    figures.add_argument("--only", nargs="+", choices=sorted(FIGURES),
                         help="emit a subset of the figure bundles")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    out_dir = Path(args.out)
    timestamp = not args.seedless_deterministic

    try:
        if args.command == "figures":
            paths = run_figures(out_dir, timestamp=timestamp,
                                only=tuple(args.only) if args.only else None)
        elif args.command == "sweep":
            if args.threads < 1:
                print("error: --threads must be >= 1", file=sys.stderr)
                return 2
            doc = load_config(args.config)
            paths = _run_sweep(doc, Path(args.config).parent, out_dir,
                               timestamp, args.threads)
        else:
            doc = load_config(args.config)
            cfg = resolve_config(doc, args.command,
                                 base_dir=Path(args.config).parent)
            paths = _RUNNERS[args.command](cfg, out_dir, timestamp)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except IntegrationDivergedError as exc:
        print(f"integration diverged: {exc}", file=sys.stderr)
        return 1
    except (ScheduleExhaustedError, NoBoundStateError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    for path in paths:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
