"""Weak-coupling rate checks against the convolution formula.

Far enough inside the band the qubit decays (nearly) exponentially and
the rate is the overlap of the frequency-modulation spectrum with the
coupling spectrum,

    R = 2 pi * integral F(omega) G(omega) d omega,

which collapses to the golden rule 2 pi G(omega_at) when the modulation
spectrum is a narrow peak at the bare transition.  Close to the edge
this picture breaks down entirely: a protected fraction never decays
and no single exponential fits.

Detunings in this module are measured from the edge INTO the band
(omega_at = omega_U + detuning), the only region with an exponential
regime to compare against; elsewhere in the package detunings are
gap-positive.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import DetuningSchedule, SystemState, Trace, propagate
from .spectra import SpectrumModel, coupling_spectrum, discretize

__all__ = [
    "CoverageError",
    "ModulationSpectrum",
    "DecayFit",
    "RateComparison",
    "convolution_rate",
    "golden_rule_rate",
    "fit_decay_rate",
    "compare_rates",
]

# An exponential regime is claimed only when the trailing population is
# this small and the log-linear fit is this straight.
PLATEAU_THRESHOLD = 0.05
RESIDUAL_THRESHOLD = 0.02


class CoverageError(ValueError):
    """Modulation grid is cut off where it still carries weight in the band."""


@dataclass(frozen=True)
class ModulationSpectrum:
    """Spectral intensity of the qubit's frequency modulation.

    Tabulated on an ascending frequency grid; the integral over the grid
    is the modulation power (1 for the unmodulated, purely static case).
    """

    omega: np.ndarray
    intensity: np.ndarray

    def __post_init__(self):
        omega = np.asarray(self.omega, dtype=float)
        intensity = np.asarray(self.intensity, dtype=float)
        if omega.ndim != 1 or omega.shape != intensity.shape or omega.size < 2:
            raise ValueError("omega and intensity must be matching 1-d grids")
        if np.any(np.diff(omega) <= 0.0):
            raise ValueError("omega grid must be strictly ascending")
        if np.any(intensity < 0.0):
            raise ValueError("intensity must be non-negative")
        omega.setflags(write=False)
        intensity.setflags(write=False)
        object.__setattr__(self, "omega", omega)
        object.__setattr__(self, "intensity", intensity)

    def power(self) -> float:
        return float(np.trapezoid(self.intensity, self.omega))

    @classmethod
    def narrow_peak(cls, center: float, width: float, *, power: float = 1.0,
                    n: int = 2001, span: float = 8.0) -> "ModulationSpectrum":
        """Normalized Gaussian peak, the delta-like unmodulated limit."""
        if width <= 0.0:
            raise ValueError("width must be positive")
        omega = np.linspace(center - span * width, center + span * width, n)
        intensity = np.exp(-0.5 * ((omega - center) / width) ** 2)
        intensity *= power / (width * np.sqrt(2.0 * np.pi))
        return cls(omega=omega, intensity=intensity)


def convolution_rate(F: ModulationSpectrum, model: SpectrumModel) -> float:
    """R = 2 pi * integral of F(omega) G(omega) over the band."""
    lo, hi = model.omega_U, model.omega_U + model.bandwidth
    tol = 1e-9 * float(np.max(F.intensity))
    for edge_value, edge_omega in ((F.intensity[0], F.omega[0]),
                                   (F.intensity[-1], F.omega[-1])):
        if lo < edge_omega < hi and edge_value > tol:
            raise CoverageError(
                "modulation grid ends inside the band while its intensity "
                f"is still significant at omega = {edge_omega:.6g}"
            )
    integrand = F.intensity * coupling_spectrum(model, F.omega)
    return float(2.0 * np.pi * np.trapezoid(integrand, F.omega))


def golden_rule_rate(model: SpectrumModel, omega_at: float) -> float:
    """Unmodulated weak-coupling decay rate 2 pi G(omega_at)."""
    return float(2.0 * np.pi * coupling_spectrum(model, omega_at))


@dataclass(frozen=True)
class DecayFit:
    """Log-linear fit of the excited population's initial decay."""

    rate: float
    log_intercept: float
    residual_rms: float
    t_start: float
    t_end: float
    n_points: int


def fit_decay_rate(trace: Trace, upper: float = 0.9, lower: float = 0.5) -> DecayFit:
    """Fit log P_e between its first crossings of ``upper`` and ``lower``.

    The window is deterministic: from the first sample at or below
    ``upper`` to the first at or below ``lower``.  Raises if the
    population never reaches the window bounds.
    """
    pop = trace.pop_e
    below_hi = np.nonzero(pop <= upper)[0]
    below_lo = np.nonzero(pop <= lower)[0]
    if below_hi.size == 0 or below_lo.size == 0:
        raise ValueError(
            f"population never drops through [{lower}, {upper}]; "
            "extend the horizon or reduce the bounds"
        )
    i0, i1 = int(below_hi[0]), int(below_lo[0])
    if i1 <= i0 + 1:
        raise ValueError("decay window holds fewer than three samples")
    t = trace.t[i0 : i1 + 1]
    logp = np.log(pop[i0 : i1 + 1])
    slope, intercept = np.polyfit(t, logp, 1)
    resid = logp - (slope * t + intercept)
    return DecayFit(
        rate=float(-slope),
        log_intercept=float(intercept),
        residual_rms=float(np.sqrt(np.mean(resid**2))),
        t_start=float(t[0]),
        t_end=float(t[-1]),
        n_points=int(t.size),
    )


@dataclass(frozen=True)
class RateComparison:
    """Formula rate vs. fitted simulation rate at one in-band detuning."""

    detuning: float
    rate_formula: float
    rate_fit: float
    rel_error: float
    plateau: float
    fit: DecayFit
    exponential_regime: bool


def compare_rates(
    detunings,
    model: SpectrumModel,
    *,
    n_modes: int = 600,
    peak_width: float | None = None,
    dt: float | None = None,
    horizon: float | None = None,
    sampling: float | None = None,
) -> list[RateComparison]:
    """Convolution-formula rates against fitted propagation rates.

    ``detunings`` are measured into the band.  One propagation per
    detuning; the plateau is the mean population over the trailing 20%
    of the horizon and flags the breakdown of the exponential picture.
    """
    if peak_width is None:
        peak_width = 0.05 * model.gamma_c
    if horizon is None:
        horizon = 15.0 / model.gamma_c
    continuum = discretize(model, n_modes)
    init = SystemState.excited(continuum.n_modes)
    out = []
    for det in detunings:
        det = float(det)
        omega_at = model.omega_U + det
        F = ModulationSpectrum.narrow_peak(omega_at, peak_width)
        r_formula = convolution_rate(F, model)
        schedule = DetuningSchedule(segments=((horizon, -det),))
        trace = propagate(init, schedule, continuum, dt=dt, horizon=horizon,
                          sampling=sampling)
        fit = fit_decay_rate(trace)
        plateau = float(np.mean(trace.pop_e[int(0.8 * len(trace)):]))
        rel = abs(fit.rate - r_formula) / r_formula if r_formula > 0.0 else np.inf
        out.append(RateComparison(
            detuning=det,
            rate_formula=r_formula,
            rate_fit=fit.rate,
            rel_error=float(rel),
            plateau=plateau,
            fit=fit,
            exponential_regime=bool(
                plateau < PLATEAU_THRESHOLD and fit.residual_rms < RESIDUAL_THRESHOLD
            ),
        ))
    return out
