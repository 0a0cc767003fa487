import numpy as np
import pytest

from bandedge import (
    CoverageError,
    ModulationSpectrum,
    SpectrumKind,
    SpectrumModel,
    SystemState,
    Trace,
    compare_rates,
    convolution_rate,
    fit_decay_rate,
    golden_rule_rate,
)


def _decay_trace(rate, t_end=10.0, n=1001, floor=0.0):
    """Synthetic purely exponential excited-population trace."""
    t = np.linspace(0.0, t_end, n)
    pop = (1.0 - floor) * np.exp(-rate * t) + floor
    alpha = np.sqrt(pop).astype(complex)
    return Trace(
        t=t, alpha=alpha, beta_d=np.zeros_like(alpha),
        pop_continuum=1.0 - pop, norm=np.ones_like(t), fidelity=pop,
        switch_times=np.empty(0),
        final_state=SystemState(t=t_end, alpha=alpha[-1], beta_d=0j,
                                beta=np.zeros(0, dtype=complex)),
    )


class TestModulationSpectrum:
    def test_narrow_peak_power(self):
        peak = ModulationSpectrum.narrow_peak(5.0, 0.1)
        assert peak.power() == pytest.approx(1.0, abs=1e-6)
        assert peak.power() == pytest.approx(
            ModulationSpectrum.narrow_peak(5.0, 0.1, power=3.0).power() / 3.0,
            rel=1e-12)

    def test_peak_centered(self):
        peak = ModulationSpectrum.narrow_peak(5.0, 0.1)
        assert peak.omega[np.argmax(peak.intensity)] == pytest.approx(5.0)

    def test_width_positive(self):
        with pytest.raises(ValueError, match="width"):
            ModulationSpectrum.narrow_peak(5.0, 0.0)

    def test_grid_validation(self):
        with pytest.raises(ValueError, match="matching 1-d"):
            ModulationSpectrum(np.arange(3.0), np.arange(4.0))
        with pytest.raises(ValueError, match="ascending"):
            ModulationSpectrum(np.array([1.0, 1.0, 2.0]), np.ones(3))
        with pytest.raises(ValueError, match="non-negative"):
            ModulationSpectrum(np.arange(3.0) + 1.0, np.array([1.0, -1.0, 1.0]))

    def test_arrays_read_only(self):
        peak = ModulationSpectrum.narrow_peak(5.0, 0.1)
        with pytest.raises(ValueError):
            peak.intensity[0] = 2.0


class TestConvolutionRate:
    def test_narrow_peak_approaches_golden_rule(self, iso_model):
        # far from the edge the spectrum is locally flat, so the
        # convolution with a narrow peak collapses to the local value
        for det in (5.0, 10.0):
            narrow = ModulationSpectrum.narrow_peak(det, 0.02)
            assert convolution_rate(narrow, iso_model) == pytest.approx(
                golden_rule_rate(iso_model, det), rel=1e-3)

    def test_golden_rule_value(self):
        model = SpectrumModel(kind=SpectrumKind.FLAT, G0=0.2 / (2.0 * np.pi),
                              bandwidth=20.0)
        assert golden_rule_rate(model, 5.0) == pytest.approx(0.2)

    def test_wider_peak_near_edge_beats_local_value(self, iso_model):
        # near the edge the inverse-square-root law is convex, so any
        # finite peak width picks up extra weight from the steep side
        wide = ModulationSpectrum.narrow_peak(0.5, 0.1)
        assert convolution_rate(wide, iso_model) > golden_rule_rate(iso_model, 0.5)

    def test_coverage_error_when_grid_clipped_in_band(self, iso_model):
        # span * width = 1.0 only: the grid stops at omega = 0..2 where
        # the Gaussian tail is nowhere near zero
        clipped = ModulationSpectrum.narrow_peak(1.0, 1.0, span=1.0)
        with pytest.raises(CoverageError, match="still significant"):
            convolution_rate(clipped, iso_model)

    def test_grid_ending_outside_band_is_fine(self, iso_model):
        # same clipped shape, but shifted so both ends sit outside the band
        wide = ModulationSpectrum.narrow_peak(50.0, 60.0, span=2.0)
        assert convolution_rate(wide, iso_model) > 0.0


class TestFitDecayRate:
    def test_recovers_synthetic_rate(self):
        fit = fit_decay_rate(_decay_trace(0.35))
        assert fit.rate == pytest.approx(0.35, rel=1e-10)
        assert fit.residual_rms < 1e-12
        assert fit.n_points >= 3

    def test_window_is_first_crossings(self):
        fit = fit_decay_rate(_decay_trace(0.35), upper=0.8, lower=0.6)
        # crossing times of the pure exponential
        assert fit.t_start == pytest.approx(-np.log(0.8) / 0.35, abs=0.02)
        assert fit.t_end == pytest.approx(-np.log(0.6) / 0.35, abs=0.02)

    def test_deterministic(self):
        trace = _decay_trace(0.1234)
        f1, f2 = fit_decay_rate(trace), fit_decay_rate(trace)
        assert f1 == f2

    def test_never_crossing_raises(self):
        with pytest.raises(ValueError, match="never drops through"):
            fit_decay_rate(_decay_trace(0.35, floor=0.95))

    def test_too_few_samples_raises(self):
        with pytest.raises(ValueError, match="fewer than three samples"):
            fit_decay_rate(_decay_trace(0.35, n=9))


class TestCompareRates:
    def test_flat_spectrum_deep_in_band(self):
        # textbook case: constant density of states, plain exponential
        model = SpectrumModel(kind=SpectrumKind.FLAT, G0=0.2 / (2.0 * np.pi),
                              bandwidth=20.0)
        # horizon long enough that the trailing window is genuinely empty
        (cmp,) = compare_rates([5.0], model, n_modes=400, horizon=30.0)
        assert cmp.exponential_regime
        assert cmp.rate_formula == pytest.approx(0.2, rel=1e-3)
        assert cmp.rel_error < 0.05
        assert cmp.plateau < 0.05

    def test_edge_breakdown_flagged(self, iso_model):
        (cmp,) = compare_rates([0.5], iso_model, n_modes=300, horizon=12.0)
        assert not cmp.exponential_regime
        assert cmp.plateau > 0.05
