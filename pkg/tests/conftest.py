import numpy as np
import pytest

import bandedge as be


@pytest.fixture(scope="session")
def iso_model():
    return be.SpectrumModel(kind=be.SpectrumKind.ISOTROPIC_EDGE)


@pytest.fixture(scope="session")
def aniso_model():
    return be.SpectrumModel(kind=be.SpectrumKind.ANISOTROPIC_EDGE)


@pytest.fixture(scope="session")
def iso600(iso_model):
    return be.discretize(iso_model, 600)


@pytest.fixture(scope="session")
def iso200(iso_model):
    """Coarse grid for dynamics tests that only need short horizons."""
    return be.discretize(iso_model, 200)


@pytest.fixture
def uncoupled_pair():
    """Two far-detuned, zero-coupling continuum modes: a closed qubit(+mode)
    system that the propagator still accepts."""
    return be.DiscretizedContinuum.from_arrays([50.0, 60.0], [0.0, 0.0])


def two_level_oracle(h, psi0, t):
    """Amplitudes exp(-i h t) psi0 for a 2x2 Hermitian h, per sample time.

    Independent of the propagator: plain eigendecomposition.
    """
    h = np.asarray(h, dtype=complex)
    w, v = np.linalg.eigh(h)
    c = v.conj().T @ np.asarray(psi0, dtype=complex)
    t = np.atleast_1d(np.asarray(t, dtype=float))
    phases = np.exp(-1j * np.outer(t, w))
    return (phases * c) @ v.T
