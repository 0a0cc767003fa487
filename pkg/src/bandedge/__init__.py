"""Dynamics of a driven qubit coupled to a band-edge continuum.

Single-excitation simulation of a two-level emitter near the edge of a
structured photonic band, with a weakly coupled discrete driving mode.
Includes the fractional stable (bound) state below the edge, alternating
detuning sequences that suppress decay, an interleaved phase-gate
protocol, and weak-coupling decay-rate checks.

Quick start::

    from bandedge import (SpectrumKind, SpectrumModel, discretize,
                          SystemState, DetuningSchedule, propagate)

    model = SpectrumModel(SpectrumKind.ISOTROPIC_EDGE, gamma_c=1.0)
    continuum = discretize(model, n_modes=600)
    schedule = DetuningSchedule(segments=((30.0, 0.5),))
    trace = propagate(SystemState.excited(continuum.n_modes),
                      schedule, continuum)

Hot loops run through numba when available; set BANDEDGE_NUMBA=0 to force
the pure-numpy path.
"""

from .config import ConfigError, ResolvedConfig, load_config, resolve_config, resolve_sweep
from .control import (
    GateProtocol,
    GateResult,
    ProtectionReport,
    ScheduleExhaustedError,
    SequenceOrder,
    SequenceSpec,
    TuningObjective,
    TuningResult,
    build_sequence,
    periodwise_peak_excess,
    protection_report,
    run_gate,
    running_envelopes,
    stroboscopic_mode_detuning,
    tune_dwells,
)
from .dynamics import (
    CompositionReport,
    DetuningSchedule,
    DiscreteMode,
    IntegrationDivergedError,
    SuddenRise,
    SuperGaussianRise,
    SystemState,
    Trace,
    composition_check,
    derivative,
    observables,
    propagate,
    pulse_profile,
)
from .io import (
    read_trace_csv,
    write_rate_report_csv,
    write_stable_state_csv,
    write_summary_json,
    write_trace_csv,
)
from .kernels import backend_name
from .spectra import (
    DiscretizedContinuum,
    InvalidModelError,
    SpectrumKind,
    SpectrumModel,
    band_integral,
    coupling_spectrum,
    discretize,
    load_tabulated_csv,
)
from .stablestate import (
    BoundState,
    Decomposition,
    NoBoundStateError,
    StablePole,
    bound_state,
    decompose,
    stable_pole,
)
from .weakcoupling import (
    CoverageError,
    DecayFit,
    ModulationSpectrum,
    RateComparison,
    compare_rates,
    convolution_rate,
    fit_decay_rate,
    golden_rule_rate,
)

__version__ = "0.1.0"

__all__ = [
    "BoundState",
    "CompositionReport",
    "ConfigError",
    "CoverageError",
    "DecayFit",
    "Decomposition",
    "DetuningSchedule",
    "DiscreteMode",
    "DiscretizedContinuum",
    "GateProtocol",
    "GateResult",
    "IntegrationDivergedError",
    "InvalidModelError",
    "ModulationSpectrum",
    "NoBoundStateError",
    "ProtectionReport",
    "RateComparison",
    "ResolvedConfig",
    "ScheduleExhaustedError",
    "SequenceOrder",
    "SequenceSpec",
    "SpectrumKind",
    "SpectrumModel",
    "StablePole",
    "SuddenRise",
    "SuperGaussianRise",
    "SystemState",
    "Trace",
    "TuningObjective",
    "TuningResult",
    "backend_name",
    "band_integral",
    "bound_state",
    "build_sequence",
    "compare_rates",
    "composition_check",
    "convolution_rate",
    "coupling_spectrum",
    "decompose",
    "derivative",
    "discretize",
    "fit_decay_rate",
    "golden_rule_rate",
    "load_config",
    "load_tabulated_csv",
    "observables",
    "periodwise_peak_excess",
    "propagate",
    "protection_report",
    "pulse_profile",
    "read_trace_csv",
    "resolve_config",
    "resolve_sweep",
    "run_gate",
    "running_envelopes",
    "stroboscopic_mode_detuning",
    "stable_pole",
    "tune_dwells",
    "write_rate_report_csv",
    "write_stable_state_csv",
    "write_summary_json",
    "write_trace_csv",
]
