"""Experiment configuration: one YAML document per run.

Every quantity in a config is dimensionless in gamma_c units (detunings
as Delta/gamma_c, times as gamma_c*t, rates as rate/gamma_c), mirroring
how the physics is usually quoted.  ``gamma_c`` itself (in the spectrum
block) sets the absolute scale and defaults to 1.  The loader fills
defaults, validates strictly (unknown keys are errors), converts to
absolute units, and keeps the fully resolved document for echoing into
run summaries.

Schema (version 1), defaults in brackets:

    version: 1                      # mandatory
    experiment: <subcommand>        # optional; must match the subcommand
    spectrum:
      kind: isotropic | anisotropic | flat | tabulated   [isotropic]
      gamma_c: > 0                  [1.0]
      bandwidth: > 0                [100.0]
      n_modes: int >= 2             [600]
      G0: >= 0                      (flat only)
      aniso_norm: > 0               (anisotropic, optional override)
      table_path: str               (tabulated only; relative to config)
    schedule:                       (static/sequence/gate)
      Delta: float                  (static only)
      Delta_A, Delta_B: float       (sequence/gate; Delta_A >= Delta_B)
      dwell: "tune" | t | [tA, tB]
      order: counterintuitive | intuitive   [counterintuitive]
      n_periods: int | "fill"       [fill]   (fill the horizon)
      rise: "sudden" | {tau: t, exponent: even int [8]}   [sudden]
      tune:                         (when dwell == "tune")
        objective: max_min_population | max_time_avg_fidelity
                                    [max_min_population]
        grid: [t, ...] | {start, stop, step}   [0.5..5.0 step 0.1]
    initial_state:
      type: excited | superposition [excited]
      alpha0, beta_d0: num | [re, im]   (superposition; norm 1)
      Delta_d: float                [0.0]
      kappa_d: num | [re, im]       [0.0]
    gate:                           (gate only; requires superposition)
      n_steps: int >= 1
      interleave_k: int >= 1        [2]
    integrator:
      dt: > 0                       [0.001]
      horizon: > 0                  [30.0]
      sampling: >= dt               [0.01]
    detunings: [float, ...]         (stable-state / weak-coupling)
    output:
      prefix: str                   [experiment name]

A sweep document instead holds `version` and `runs:`, a list of named
run entries, each an experiment config with a mandatory `experiment`
and unique `name`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import yaml

from .control import GateProtocol, SequenceOrder, SequenceSpec, TuningObjective
from .dynamics import DiscreteMode, SuddenRise, SuperGaussianRise
from .spectra import (
    InvalidModelError,
    SpectrumKind,
    SpectrumModel,
    load_tabulated_csv,
)

__all__ = ["ConfigError", "ResolvedConfig", "load_config", "resolve_config",
           "resolve_sweep", "EXPERIMENTS"]

EXPERIMENTS = ("static", "sequence", "gate", "stable-state", "weak-coupling")

_SPECTRUM_KINDS = {
    "isotropic": SpectrumKind.ISOTROPIC_EDGE,
    "anisotropic": SpectrumKind.ANISOTROPIC_EDGE,
    "flat": SpectrumKind.FLAT,
    "tabulated": SpectrumKind.TABULATED,
}

_ORDERS = {
    "counterintuitive": SequenceOrder.COUNTERINTUITIVE,
    "intuitive": SequenceOrder.INTUITIVE,
}

_OBJECTIVES = {
    "max_min_population": TuningObjective.MAX_MIN_POPULATION,
    "max_time_avg_fidelity": TuningObjective.MAX_TIME_AVG_FIDELITY,
}


class ConfigError(ValueError):
    """Schema violation, reported with the dotted path of the bad field."""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


@dataclass(frozen=True)
class ResolvedConfig:
    """A validated experiment, converted to absolute units."""

    experiment: str
    resolved: dict
    model: SpectrumModel
    n_modes: int
    dt: float
    horizon: float
    sampling: float
    discrete_mode: DiscreteMode
    initial_kind: str
    alpha0: complex
    beta_d0: complex
    rise: SuddenRise | SuperGaussianRise
    output_prefix: str
    static_delta: float | None = None
    spec: SequenceSpec | None = None
    needs_tuning: bool = False
    tune_objective: TuningObjective | None = None
    tune_grid: np.ndarray | None = None
    gate: GateProtocol | None = None
    detunings: tuple | None = None

    @property
    def gamma_c(self) -> float:
        return self.model.gamma_c


def load_config(path) -> dict:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError("", f"cannot read config file: {exc}") from None
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError("", f"invalid YAML: {exc}") from None
    if not isinstance(doc, dict):
        raise ConfigError("", "config root must be a mapping")
    return doc


def _expect_mapping(value, path: str) -> dict:
    if value is None:
        return {}
    if not isinstance(value, dict):
        raise ConfigError(path, "must be a mapping")
    return dict(value)


def _reject_unknown(block: dict, allowed, path: str):
    for key in block:
        if key not in allowed:
            raise ConfigError(f"{path}.{key}" if path else str(key),
                              "unknown field")


def _number(value, path: str, *, positive=False, non_negative=False) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(path, f"must be a number, got {value!r}")
    out = float(value)
    if not math.isfinite(out):
        raise ConfigError(path, "must be finite")
    if positive and out <= 0.0:
        raise ConfigError(path, "must be > 0")
    if non_negative and out < 0.0:
        raise ConfigError(path, "must be >= 0")
    return out


def _integer(value, path: str, minimum: int | None = None) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(path, f"must be an integer, got {value!r}")
    if minimum is not None and value < minimum:
        raise ConfigError(path, f"must be >= {minimum}")
    return value


def _complex(value, path: str) -> complex:
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return complex(float(value), 0.0)
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return complex(_number(value[0], f"{path}[0]"), _number(value[1], f"{path}[1]"))
    raise ConfigError(path, "must be a number or a [re, im] pair")


def _choice(value, path: str, table: dict):
    if not isinstance(value, str) or value not in table:
        raise ConfigError(path, f"must be one of {sorted(table)}, got {value!r}")
    return table[value]


def _resolve_spectrum(block: dict, base_dir: Path) -> tuple[SpectrumModel, int, dict]:
    _reject_unknown(block, {"kind", "gamma_c", "bandwidth", "n_modes", "G0",
                            "aniso_norm", "table_path"}, "spectrum")
    kind_name = block.get("kind", "isotropic")
    kind = _choice(kind_name, "spectrum.kind", _SPECTRUM_KINDS)
    gamma_c = _number(block.get("gamma_c", 1.0), "spectrum.gamma_c", positive=True)
    bandwidth = _number(block.get("bandwidth", 100.0), "spectrum.bandwidth",
                        positive=True)
    n_modes = _integer(block.get("n_modes", 600), "spectrum.n_modes", minimum=2)

    echo = {"kind": kind_name, "gamma_c": gamma_c, "bandwidth": bandwidth,
            "n_modes": n_modes}
    kwargs = {"kind": kind, "gamma_c": gamma_c, "bandwidth": bandwidth * gamma_c}
    if kind is SpectrumKind.FLAT:
        if "G0" not in block:
            raise ConfigError("spectrum.G0", "required for the flat kind")
        g0 = _number(block["G0"], "spectrum.G0", non_negative=True)
        echo["G0"] = g0
        kwargs["G0"] = g0 * gamma_c
    elif "G0" in block:
        raise ConfigError("spectrum.G0", "only meaningful for the flat kind")
    if "aniso_norm" in block:
        if kind is not SpectrumKind.ANISOTROPIC_EDGE:
            raise ConfigError("spectrum.aniso_norm",
                              "only meaningful for the anisotropic kind")
        an = _number(block["aniso_norm"], "spectrum.aniso_norm", positive=True)
        echo["aniso_norm"] = an
        kwargs["aniso_norm"] = an * gamma_c**0.5
    if kind is SpectrumKind.TABULATED:
        if "table_path" not in block:
            raise ConfigError("spectrum.table_path", "required for the tabulated kind")
        rel = block["table_path"]
        if not isinstance(rel, str):
            raise ConfigError("spectrum.table_path", "must be a string path")
        echo["table_path"] = rel
        try:
            model = load_tabulated_csv(base_dir / rel, gamma_c=gamma_c,
                                       bandwidth=bandwidth * gamma_c)
        except (OSError, InvalidModelError) as exc:
            raise ConfigError("spectrum.table_path", str(exc)) from None
        return model, n_modes, echo
    elif "table_path" in block:
        raise ConfigError("spectrum.table_path",
                          "only meaningful for the tabulated kind")
    try:
        model = SpectrumModel(**kwargs)
    except ValueError as exc:
        raise ConfigError("spectrum", str(exc)) from None
    return model, n_modes, echo


def _resolve_rise(value, gamma_c: float, path: str):
    if value is None or value == "sudden":
        return SuddenRise(), "sudden"
    block = _expect_mapping(value, path)
    _reject_unknown(block, {"tau", "exponent"}, path)
    if "tau" not in block:
        raise ConfigError(f"{path}.tau", "required for a smooth rise")
    tau = _number(block["tau"], f"{path}.tau", positive=True)
    exponent = _integer(block.get("exponent", 8), f"{path}.exponent", minimum=2)
    try:
        rise = SuperGaussianRise(tau=tau / gamma_c, exponent=exponent)
    except ValueError as exc:
        raise ConfigError(path, str(exc)) from None
    return rise, {"tau": tau, "exponent": exponent}


def _resolve_tune(block: dict, gamma_c: float):
    _reject_unknown(block, {"objective", "grid"}, "schedule.tune")
    objective = _choice(block.get("objective", "max_min_population"),
                        "schedule.tune.objective", _OBJECTIVES)
    grid_cfg = block.get("grid")
    if grid_cfg is None:
        echo_grid = {"start": 0.5, "stop": 5.0, "step": 0.1}
        grid = np.round(np.arange(0.5, 5.0 + 1e-9, 0.1), 10)
    elif isinstance(grid_cfg, dict):
        _reject_unknown(grid_cfg, {"start", "stop", "step"}, "schedule.tune.grid")
        start = _number(grid_cfg.get("start", 0.5), "schedule.tune.grid.start",
                        positive=True)
        stop = _number(grid_cfg.get("stop", 5.0), "schedule.tune.grid.stop",
                       positive=True)
        step = _number(grid_cfg.get("step", 0.1), "schedule.tune.grid.step",
                       positive=True)
        if stop < start:
            raise ConfigError("schedule.tune.grid.stop", "must be >= start")
        echo_grid = {"start": start, "stop": stop, "step": step}
        grid = np.round(np.arange(start, stop + 1e-9, step), 10)
    elif isinstance(grid_cfg, list) and grid_cfg:
        grid = np.array([_number(v, f"schedule.tune.grid[{i}]", positive=True)
                         for i, v in enumerate(grid_cfg)])
        echo_grid = [float(v) for v in grid]
    else:
        raise ConfigError("schedule.tune.grid",
                          "must be a non-empty list or a start/stop/step mapping")
    echo = {"objective": objective.value, "grid": echo_grid}
    return objective, grid / gamma_c, echo


def _resolve_initial(block: dict, gamma_c: float):
    _reject_unknown(block, {"type", "alpha0", "beta_d0", "Delta_d", "kappa_d"},
                    "initial_state")
    kind = block.get("type", "excited")
    if kind not in ("excited", "superposition"):
        raise ConfigError("initial_state.type",
                          f"must be 'excited' or 'superposition', got {kind!r}")
    delta_d = _number(block.get("Delta_d", 0.0), "initial_state.Delta_d")
    kappa_d = _complex(block.get("kappa_d", 0.0), "initial_state.kappa_d")
    mode = DiscreteMode(Delta_d=delta_d * gamma_c, kappa_d=kappa_d * gamma_c)
    echo = {"type": kind, "Delta_d": delta_d,
            "kappa_d": [kappa_d.real, kappa_d.imag]}
    if kind == "excited":
        for key in ("alpha0", "beta_d0"):
            if key in block:
                raise ConfigError(f"initial_state.{key}",
                                  "only meaningful for a superposition")
        return "excited", 1.0 + 0.0j, 0.0j, mode, echo
    for key in ("alpha0", "beta_d0"):
        if key not in block:
            raise ConfigError(f"initial_state.{key}",
                              "required for a superposition")
    alpha0 = _complex(block["alpha0"], "initial_state.alpha0")
    beta_d0 = _complex(block["beta_d0"], "initial_state.beta_d0")
    norm = abs(alpha0) ** 2 + abs(beta_d0) ** 2
    if abs(norm - 1.0) > 1e-6:
        raise ConfigError("initial_state.alpha0",
                          f"|alpha0|^2 + |beta_d0|^2 must be 1, got {norm:.9g}")
    echo["alpha0"] = [alpha0.real, alpha0.imag]
    echo["beta_d0"] = [beta_d0.real, beta_d0.imag]
    return "superposition", alpha0, beta_d0, mode, echo


def resolve_config(doc: dict, experiment: str, base_dir=".") -> ResolvedConfig:
    """Validate one experiment document against the schema for ``experiment``."""
    if experiment not in EXPERIMENTS:
        raise ConfigError("experiment", f"unknown experiment {experiment!r}")
    base_dir = Path(base_dir)
    _reject_unknown(doc, {"version", "experiment", "name", "spectrum", "schedule",
                          "initial_state", "gate", "integrator", "detunings",
                          "output"}, "")
    if "version" not in doc:
        raise ConfigError("version", "required (schema version, currently 1)")
    version = _integer(doc["version"], "version")
    if version != 1:
        raise ConfigError("version", f"unsupported version {version} (expected 1)")
    declared = doc.get("experiment")
    if declared is not None and declared != experiment:
        raise ConfigError("experiment",
                          f"config declares {declared!r} but the subcommand "
                          f"runs {experiment!r}")

    model, n_modes, spectrum_echo = _resolve_spectrum(
        _expect_mapping(doc.get("spectrum"), "spectrum"), base_dir)
    gamma_c = model.gamma_c

    integ = _expect_mapping(doc.get("integrator"), "integrator")
    _reject_unknown(integ, {"dt", "horizon", "sampling"}, "integrator")
    dt = _number(integ.get("dt", 0.001), "integrator.dt", positive=True)
    horizon = _number(integ.get("horizon", 30.0), "integrator.horizon",
                      positive=True)
    sampling = _number(integ.get("sampling", 0.01), "integrator.sampling",
                       positive=True)
    if sampling < dt:
        raise ConfigError("integrator.sampling", "must be >= integrator.dt")
    integrator_echo = {"dt": dt, "horizon": horizon, "sampling": sampling}

    initial_kind, alpha0, beta_d0, mode, initial_echo = _resolve_initial(
        _expect_mapping(doc.get("initial_state"), "initial_state"), gamma_c)

    resolved = {
        "version": 1,
        "experiment": experiment,
        "spectrum": spectrum_echo,
        "integrator": integrator_echo,
        "initial_state": initial_echo,
    }

    out_block = _expect_mapping(doc.get("output"), "output")
    _reject_unknown(out_block, {"prefix"}, "output")
    prefix = out_block.get("prefix", experiment.replace("-", "_"))
    if not isinstance(prefix, str) or not prefix:
        raise ConfigError("output.prefix", "must be a non-empty string")
    resolved["output"] = {"prefix": prefix}

    kwargs: dict = {}

    if experiment in ("static", "sequence", "gate"):
        sched = _expect_mapping(doc.get("schedule"), "schedule")
        if not sched:
            raise ConfigError("schedule", f"required for the {experiment} experiment")
        if experiment == "static":
            _reject_unknown(sched, {"Delta", "rise"}, "schedule")
            if "Delta" not in sched:
                raise ConfigError("schedule.Delta", "required for a static run")
            delta = _number(sched["Delta"], "schedule.Delta")
            rise, rise_echo = _resolve_rise(sched.get("rise"), gamma_c, "schedule.rise")
            resolved["schedule"] = {"Delta": delta, "rise": rise_echo}
            kwargs.update(static_delta=delta * gamma_c, rise=rise)
        else:
            _reject_unknown(sched, {"Delta_A", "Delta_B", "dwell", "order",
                                    "n_periods", "rise", "tune"}, "schedule")
            for key in ("Delta_A", "Delta_B"):
                if key not in sched:
                    raise ConfigError(f"schedule.{key}", "required for a sequence")
            delta_a = _number(sched["Delta_A"], "schedule.Delta_A")
            delta_b = _number(sched["Delta_B"], "schedule.Delta_B")
            order_name = sched.get("order", "counterintuitive")
            order = _choice(order_name, "schedule.order", _ORDERS)
            n_periods_cfg = sched.get("n_periods", "fill")
            rise, rise_echo = _resolve_rise(sched.get("rise"), gamma_c, "schedule.rise")

            dwell = sched.get("dwell")
            needs_tuning = dwell == "tune"
            if dwell is None:
                raise ConfigError("schedule.dwell",
                                  "required: 'tune', a dwell time, or [tau_A, tau_B]")
            if needs_tuning:
                tau_a = tau_b = 1.0  # placeholder until tuned
                dwell_echo = "tune"
            elif isinstance(dwell, (int, float)) and not isinstance(dwell, bool):
                tau_a = tau_b = _number(dwell, "schedule.dwell", positive=True)
                dwell_echo = float(tau_a)
            elif isinstance(dwell, list) and len(dwell) == 2:
                tau_a = _number(dwell[0], "schedule.dwell[0]", positive=True)
                tau_b = _number(dwell[1], "schedule.dwell[1]", positive=True)
                dwell_echo = [tau_a, tau_b]
            else:
                raise ConfigError("schedule.dwell",
                                  "must be 'tune', a number, or a [tau_A, tau_B] pair")

            if n_periods_cfg == "fill":
                n_periods = math.ceil(horizon / (tau_a + tau_b)) + 1
                n_periods_echo = "fill"
            else:
                n_periods = _integer(n_periods_cfg, "schedule.n_periods", minimum=1)
                n_periods_echo = n_periods

            try:
                spec = SequenceSpec(
                    Delta_A=delta_a * gamma_c,
                    Delta_B=delta_b * gamma_c,
                    tau_A=tau_a / gamma_c,
                    tau_B=tau_b / gamma_c,
                    order=order,
                    n_periods=n_periods,
                )
            except ValueError as exc:
                raise ConfigError("schedule", str(exc)) from None

            resolved["schedule"] = {
                "Delta_A": delta_a, "Delta_B": delta_b, "dwell": dwell_echo,
                "order": order_name, "n_periods": n_periods_echo,
                "rise": rise_echo,
            }
            kwargs.update(spec=spec, rise=rise, needs_tuning=needs_tuning)
            if needs_tuning:
                objective, grid, tune_echo = _resolve_tune(
                    _expect_mapping(sched.get("tune"), "schedule.tune"), gamma_c)
                resolved["schedule"]["tune"] = tune_echo
                kwargs.update(tune_objective=objective, tune_grid=grid)
            elif "tune" in sched:
                raise ConfigError("schedule.tune",
                                  "only meaningful when dwell is 'tune'")

    if experiment == "gate":
        gate_block = _expect_mapping(doc.get("gate"), "gate")
        if not gate_block:
            raise ConfigError("gate", "required for the gate experiment")
        _reject_unknown(gate_block, {"n_steps", "interleave_k"}, "gate")
        if "n_steps" not in gate_block:
            raise ConfigError("gate.n_steps", "required")
        n_steps = _integer(gate_block["n_steps"], "gate.n_steps", minimum=1)
        interleave_k = _integer(gate_block.get("interleave_k", 2),
                                "gate.interleave_k", minimum=1)
        if initial_kind != "superposition":
            raise ConfigError("gate",
                              "requires initial_state.type = superposition")
        resolved["gate"] = {"n_steps": n_steps, "interleave_k": interleave_k}
        kwargs["gate"] = GateProtocol(n_steps=n_steps, interleave_k=interleave_k)
    elif "gate" in doc:
        raise ConfigError("gate", "only meaningful for the gate experiment")

    if experiment in ("stable-state", "weak-coupling"):
        dets = doc.get("detunings")
        if not isinstance(dets, list) or not dets:
            raise ConfigError("detunings", "required: a non-empty list of Delta/gamma_c")
        values = []
        for i, v in enumerate(dets):
            val = _number(v, f"detunings[{i}]")
            if experiment == "weak-coupling" and val <= 0.0:
                raise ConfigError(f"detunings[{i}]",
                                  "must be > 0 (measured into the band)")
            values.append(val)
        resolved["detunings"] = values
        kwargs["detunings"] = tuple(v * gamma_c for v in values)

    for key in ("schedule", "detunings"):
        if key in doc and key not in resolved:
            raise ConfigError(key, f"not used by the {experiment} experiment")

    return ResolvedConfig(
        experiment=experiment,
        resolved=resolved,
        model=model,
        n_modes=n_modes,
        dt=dt / gamma_c,
        horizon=horizon / gamma_c,
        sampling=sampling / gamma_c,
        discrete_mode=mode,
        initial_kind=initial_kind,
        alpha0=alpha0,
        beta_d0=beta_d0,
        rise=SuddenRise() if "rise" not in kwargs else kwargs.pop("rise"),
        output_prefix=prefix,
        **kwargs,
    )


def resolve_sweep(doc: dict, base_dir=".") -> list[ResolvedConfig]:
    """Validate a sweep document: independent named run entries."""
    _reject_unknown(doc, {"version", "runs"}, "")
    if "version" not in doc:
        raise ConfigError("version", "required (schema version, currently 1)")
    if _integer(doc["version"], "version") != 1:
        raise ConfigError("version", "unsupported version (expected 1)")
    runs = doc.get("runs")
    if not isinstance(runs, list) or not runs:
        raise ConfigError("runs", "required: a non-empty list of run entries")
    out = []
    seen = set()
    for i, entry in enumerate(runs):
        path = f"runs[{i}]"
        entry = _expect_mapping(entry, path)
        name = entry.get("name")
        if not isinstance(name, str) or not name:
            raise ConfigError(f"{path}.name", "required: a unique run name")
        if name in seen:
            raise ConfigError(f"{path}.name", f"duplicate run name {name!r}")
        seen.add(name)
        experiment = entry.get("experiment")
        if experiment not in EXPERIMENTS:
            raise ConfigError(f"{path}.experiment",
                              f"required: one of {sorted(EXPERIMENTS)}")
        entry = dict(entry)
        entry.setdefault("version", 1)
        entry.setdefault("output", {"prefix": name})
        try:
            cfg = resolve_config(entry, experiment, base_dir=base_dir)
        except ConfigError as exc:
            raise ConfigError(f"{path}.{exc.path}" if exc.path else path,
                              str(exc).split(": ", 1)[-1]) from None
        out.append(cfg)
    return out
