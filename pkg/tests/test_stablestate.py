"""Pole positions and weights are checked against values computed with an
independent adaptive-quadrature evaluation of the level-shift integral
(root-bracketed to 12 digits and frozen here).  One live cross-check per
law keeps the frozen numbers honest."""

import numpy as np
import pytest

import bandedge as be
from bandedge import (
    DiscreteMode,
    NoBoundStateError,
    SpectrumKind,
    SpectrumModel,
    SystemState,
    bound_state,
    decompose,
    discretize,
    propagate,
    stable_pole,
)


def _flat_model(G0, bandwidth=20.0):
    return SpectrumModel(kind=SpectrumKind.FLAT, G0=G0, bandwidth=bandwidth)


class TestPoleFrozenValues:
    # (Delta, pole depth below the edge, qubit weight)
    ISO_W100 = [
        (0.5, 1.310238449166, 0.750089137540),
        (0.25, 1.128091916037, 0.705668827766),
        (5.0, 5.369013505941, 0.961546163719),
        (-0.5, 0.663833738828, 0.519687218977),
    ]
    ANISO_W100 = [
        (0.5, 0.667743724769, 0.983811439043),
        (0.25, 0.422296032786, 0.979261213270),
    ]

    @pytest.mark.parametrize("Delta,u,weight", ISO_W100)
    def test_isotropic(self, iso_model, Delta, u, weight):
        pole = stable_pole(iso_model, Delta)
        assert pole.delta0 == pytest.approx(-u, abs=1e-9)
        assert pole.weight == pytest.approx(weight, abs=1e-9)

    @pytest.mark.parametrize("Delta,u,weight", ANISO_W100)
    def test_anisotropic(self, aniso_model, Delta, u, weight):
        pole = stable_pole(aniso_model, Delta)
        assert pole.delta0 == pytest.approx(-u, abs=1e-9)
        assert pole.weight == pytest.approx(weight, abs=1e-9)

    @pytest.mark.parametrize("bandwidth,Delta,u,weight", [
        (50.0, 0.5, 0.722965, 0.970938),
        (50.0, 0.25, 0.481070, 0.963497),
        (25.0, 0.5, 0.787396, 0.949983),
        (25.0, 0.25, 0.551239, 0.938302),
    ])
    def test_anisotropic_narrower_bands(self, bandwidth, Delta, u, weight):
        model = SpectrumModel(kind=SpectrumKind.ANISOTROPIC_EDGE, bandwidth=bandwidth)
        pole = stable_pole(model, Delta)
        assert pole.delta0 == pytest.approx(-u, abs=2e-6)
        assert pole.weight == pytest.approx(weight, abs=2e-6)

    def test_flat(self):
        pole = stable_pole(_flat_model(0.2 / (2.0 * np.pi)), 0.5)
        assert pole.delta0 == pytest.approx(-0.611948870603, abs=1e-9)
        assert pole.weight == pytest.approx(0.951953509759, abs=1e-9)

    def test_with_discrete_mode(self, iso_model):
        mode = DiscreteMode(Delta_d=0.375, kappa_d=0.1)
        pole = stable_pole(iso_model, 0.5, mode)
        assert pole.delta0 == pytest.approx(-1.318200075206, abs=1e-9)
        assert pole.weight == pytest.approx(0.745489897047, abs=1e-9)

    def test_live_quadrature_cross_check(self, iso_model):
        integrate = pytest.importorskip("scipy.integrate")
        optimize = pytest.importorskip("scipy.optimize")
        W = iso_model.bandwidth

        # substituting x = y^2 removes the integrable edge singularity
        def I1(u):
            val, _ = integrate.quad(
                lambda y: 2.0 * y * be.coupling_spectrum(iso_model, y * y) / (y * y + u),
                0.0, np.sqrt(W))
            return val

        u_ref = optimize.brentq(lambda u: 0.5 - u + I1(u), 1e-6, 10.0, xtol=1e-12)
        assert u_ref == pytest.approx(1.310238449166, abs=1e-9)
        I2, _ = integrate.quad(
            lambda y: 2.0 * y * be.coupling_spectrum(iso_model, y * y) / (y * y + u_ref) ** 2,
            0.0, np.sqrt(W))
        assert 1.0 / (1.0 + I2) == pytest.approx(0.750089137540, abs=1e-9)


class TestPoleStructure:
    def test_plateau_is_squared_weight(self, iso_model):
        pole = stable_pole(iso_model, 0.5)
        assert pole.plateau == pytest.approx(pole.weight**2, rel=1e-15)

    def test_zero_coupling_continuum(self):
        # No continuum at all: the pole sits exactly at the bare detuning.
        pole = stable_pole(_flat_model(0.0), 0.5)
        assert pole.delta0 == pytest.approx(-0.5, abs=1e-12)
        assert pole.weight == pytest.approx(1.0, abs=1e-12)

    def test_uncoupled_mode_is_inert(self, iso_model):
        bare = stable_pole(iso_model, 0.5)
        with_mode = stable_pole(iso_model, 0.5, DiscreteMode(Delta_d=0.375, kappa_d=0.0))
        assert with_mode.delta0 == pytest.approx(bare.delta0, abs=1e-12)
        assert with_mode.weight == pytest.approx(bare.weight, abs=1e-12)

    def test_deeper_detuning_gives_larger_weight(self, iso_model):
        weights = [stable_pole(iso_model, d).weight for d in (0.25, 0.5, 1.0, 5.0)]
        assert np.all(np.diff(weights) > 0.0)

    def test_no_solution_inside_band_for_vanishing_edge_density(self, aniso_model):
        # The square-root-growth law has a finite level shift at the edge,
        # too small to pull a resonant qubit out of the band.
        with pytest.raises(NoBoundStateError):
            stable_pole(aniso_model, -0.5)

    def test_isotropic_always_binds(self, iso_model):
        # The inverse-square-root divergence guarantees a solution even
        # for a qubit placed inside the band.
        pole = stable_pole(iso_model, -0.5)
        assert pole.delta0 < 0.0


class TestBoundState:
    def test_eigenvector_residual(self, iso200):
        bs = bound_state(iso200, 0.5)
        x = iso200.offsets
        g = iso200.g
        n = iso200.n_modes
        h = np.zeros((n + 2, n + 2), dtype=complex)
        h[0, 0] = -0.5
        h[0, 2:] = g
        h[2:, 0] = g
        h[2:, 2:] = np.diag(x)
        v = np.concatenate(([bs.v_alpha], [bs.v_beta_d], bs.v_beta))
        residual = h @ v - bs.delta0 * v
        assert np.max(np.abs(residual)) < 1e-10
        assert np.linalg.norm(v) == pytest.approx(1.0, abs=1e-12)

    def test_eigenvector_residual_with_mode(self, iso200):
        mode = DiscreteMode(Delta_d=0.375, kappa_d=0.1 + 0.05j)
        bs = bound_state(iso200, 0.5, mode)
        x = iso200.offsets
        g = iso200.g
        n = iso200.n_modes
        h = np.zeros((n + 2, n + 2), dtype=complex)
        h[0, 0] = -0.5
        h[0, 1] = mode.kappa_d
        h[1, 0] = np.conj(mode.kappa_d)
        h[1, 1] = -mode.Delta_d
        h[0, 2:] = g
        h[2:, 0] = g
        h[2:, 2:] = np.diag(x)
        v = np.concatenate(([bs.v_alpha], [bs.v_beta_d], bs.v_beta))
        residual = h @ v - bs.delta0 * v
        assert np.max(np.abs(residual)) < 1e-10

    def test_matches_continuum_level_pole(self, iso_model, iso600):
        bs = bound_state(iso600, 0.5)
        pole = stable_pole(iso_model, 0.5)
        assert bs.delta0 == pytest.approx(pole.delta0, abs=1e-4)
        assert bs.weight == pytest.approx(pole.weight, abs=1e-4)

    def test_self_projection(self, iso200):
        bs = bound_state(iso200, 0.5)
        dec = decompose(bs.as_state(), bs)
        assert dec.stable_norm == pytest.approx(1.0, abs=1e-12)
        assert dec.decaying_norm == pytest.approx(0.0, abs=1e-12)

    def test_bare_qubit_projection_equals_weight(self, iso200):
        bs = bound_state(iso200, 0.5)
        dec = decompose(SystemState.excited(iso200.n_modes), bs)
        assert dec.stable_norm == pytest.approx(bs.weight, rel=1e-12)
        assert dec.decaying_norm == pytest.approx(1.0 - bs.weight, rel=1e-10)
        assert dec.stable_amplitude == pytest.approx(bs.v_alpha)

    def test_mode_size_mismatch_rejected(self, iso200):
        bs = bound_state(iso200, 0.5)
        with pytest.raises(ValueError, match="continuum sizes"):
            bs.overlap(SystemState.excited(iso200.n_modes + 1))


class TestProjectionUnderPropagation:
    def test_stable_projection_is_conserved(self, iso_model, iso200):
        bs = bound_state(iso200, 0.5)
        trace = propagate(
            SystemState.excited(iso200.n_modes),
            be.DetuningSchedule(segments=[(8.0, 0.5)]),
            iso200, record_modes=True, sampling=0.5,
        )
        amps = [abs(decompose(trace.state_at(i), bs).stable_amplitude)
                for i in range(len(trace))]
        assert np.max(np.abs(np.array(amps) - amps[0])) < 1e-6
