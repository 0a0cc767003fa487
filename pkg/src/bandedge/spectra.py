"""Band-edge coupling spectra and their finite-mode discretizations.

A structured reservoir enters the single-excitation dynamics only through
its coupling spectrum G(omega) = |kappa(omega)|^2 rho(omega), the mode
density weighted by the squared coupling.  Supported laws:

* ``ISOTROPIC_EDGE``   -- G diverges as (omega - omega_U)^(-1/2) just above
  the edge omega_U.  The effective rate ``gamma_c`` fixes the prefactor
  gamma_c^(3/2) / pi.
* ``ANISOTROPIC_EDGE`` -- G vanishes as (omega - omega_U)^(+1/2) above the
  edge.  By default the prefactor is chosen so the integrated coupling over
  the band matches the isotropic law on the same band, which keeps the two
  families directly comparable.
* ``FLAT``             -- constant G_0 across the band; the textbook
  exponential-decay reference.
* ``TABULATED``        -- linear interpolation of a user-supplied table.

All edge laws are exactly zero below omega_U.  The band occupies
(omega_U, omega_U + bandwidth]; the bandwidth is a numerical cutoff for the
isotropic law and part of the model for the others.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

__all__ = [
    "InvalidModelError",
    "SpectrumKind",
    "SpectrumModel",
    "DiscretizedContinuum",
    "coupling_spectrum",
    "band_integral",
    "discretize",
    "load_tabulated_csv",
]


class InvalidModelError(ValueError):
    """A spectral model is structurally unusable (bad table, bad parameters)."""


class SpectrumKind(enum.Enum):
    ISOTROPIC_EDGE = "isotropic_edge"
    ANISOTROPIC_EDGE = "anisotropic_edge"
    FLAT = "flat"
    TABULATED = "tabulated"


# Band extent above the edge, in units of gamma_c, when none is given.
DEFAULT_BANDWIDTH_FACTOR = 100.0


def _as_readonly(arr: np.ndarray, dtype=float) -> np.ndarray:
    out = np.array(arr, dtype=dtype, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class SpectrumModel:
    """Immutable description of one coupling spectrum.

    Parameters
    ----------
    kind : SpectrumKind
    gamma_c : float
        Effective coupling rate; the sole rate scale of the edge laws.
    omega_U : float
        Band-edge frequency.  Everything downstream works with offsets
        from it, so 0.0 is the natural choice.
    bandwidth : float or None
        Band extent above the edge.  Defaults to
        ``DEFAULT_BANDWIDTH_FACTOR * gamma_c``.
    G0 : float
        Plateau value for the FLAT kind (ignored otherwise).  May be zero,
        which yields an uncoupled band.
    aniso_norm : float or None
        Prefactor of the rising edge law.  ``None`` (default) matches the
        integrated coupling of the isotropic law over the same band.
        Passing the value of an existing model freezes the physical law
        while the cutoff is varied, which is what a convergence probe
        needs.
    table : ndarray or None
        Shape (m, 2) array of (omega, G) rows for the TABULATED kind,
        strictly ascending in omega, all G >= 0.
    """

    kind: SpectrumKind
    gamma_c: float = 1.0
    omega_U: float = 0.0
    bandwidth: float | None = None
    G0: float = 0.0
    aniso_norm: float | None = None
    table: np.ndarray | None = None

    def __post_init__(self):
        if self.gamma_c <= 0.0:
            raise InvalidModelError("gamma_c must be positive")
        if self.bandwidth is None:
            object.__setattr__(
                self, "bandwidth", DEFAULT_BANDWIDTH_FACTOR * self.gamma_c
            )
        if self.bandwidth <= 0.0:
            raise InvalidModelError("bandwidth must be positive")
        if self.kind is SpectrumKind.FLAT and self.G0 < 0.0:
            raise InvalidModelError("G0 must be non-negative")
        if self.kind is SpectrumKind.TABULATED:
            if self.table is None or len(self.table) == 0:
                raise InvalidModelError("tabulated spectrum requires a non-empty table")
            tab = np.asarray(self.table, dtype=float)
            if tab.ndim != 2 or tab.shape[1] != 2:
                raise InvalidModelError("table must have two columns (omega, G)")
            if not np.all(np.diff(tab[:, 0]) > 0.0):
                raise InvalidModelError("table omegas must be strictly ascending")
            if np.any(tab[:, 1] < 0.0):
                raise InvalidModelError("table G values must be non-negative")
            object.__setattr__(self, "table", _as_readonly(tab))
        elif self.table is not None:
            raise InvalidModelError("table is only meaningful for the TABULATED kind")
        if self.kind is SpectrumKind.ANISOTROPIC_EDGE:
            if self.aniso_norm is None:
                # Same integrated coupling as the diverging edge law on this band.
                norm = 3.0 * self.gamma_c**1.5 / (np.pi * self.bandwidth)
                object.__setattr__(self, "aniso_norm", norm)
            elif self.aniso_norm <= 0.0:
                raise InvalidModelError("aniso_norm must be positive")


def coupling_spectrum(model: SpectrumModel, omega):
    """Evaluate G(omega).  Accepts scalars or arrays; zero outside the band."""
    om = np.asarray(omega, dtype=float)
    scalar = om.ndim == 0
    om1 = np.atleast_1d(om)
    if model.kind is SpectrumKind.TABULATED:
        tab = model.table
        out = np.interp(om1, tab[:, 0], tab[:, 1], left=0.0, right=0.0)
        out[(om1 < tab[0, 0]) | (om1 > tab[-1, 0])] = 0.0
    else:
        x = om1 - model.omega_U
        in_band = (x > 0.0) & (x <= model.bandwidth)
        out = np.zeros_like(x)
        if model.kind is SpectrumKind.ISOTROPIC_EDGE:
            out[in_band] = model.gamma_c**1.5 / np.pi / np.sqrt(x[in_band])
        elif model.kind is SpectrumKind.ANISOTROPIC_EDGE:
            out[in_band] = model.aniso_norm * np.sqrt(x[in_band])
        else:
            out[in_band] = model.G0
    return float(out[0]) if scalar else out


def band_integral(model: SpectrumModel) -> float:
    """Integral of G over the whole band, from the antiderivative where known."""
    W = model.bandwidth
    if model.kind is SpectrumKind.ISOTROPIC_EDGE:
        return model.gamma_c**1.5 / np.pi * 2.0 * np.sqrt(W)
    if model.kind is SpectrumKind.ANISOTROPIC_EDGE:
        return model.aniso_norm * (2.0 / 3.0) * W**1.5
    if model.kind is SpectrumKind.FLAT:
        return model.G0 * W
    tab = model.table
    return float(np.trapezoid(tab[:, 1], tab[:, 0]))


@dataclass(frozen=True)
class DiscretizedContinuum:
    """Finite star-model stand-in for the continuum.

    ``offsets`` are mode frequencies relative to the edge (all positive,
    strictly increasing); ``g`` are the lumped couplings with
    g_j^2 = G(omega_j) * dOmega_j.
    """

    omega_U: float
    offsets: np.ndarray
    g: np.ndarray
    model: SpectrumModel | None = None

    def __post_init__(self):
        offsets = _as_readonly(self.offsets)
        g = _as_readonly(self.g)
        if offsets.ndim != 1 or g.ndim != 1 or offsets.shape != g.shape:
            raise ValueError("offsets and g must be 1-d arrays of equal length")
        if offsets.size and not np.all(np.diff(offsets) > 0.0):
            raise ValueError("mode offsets must be strictly increasing")
        if offsets.size and offsets[0] <= 0.0:
            raise ValueError("all modes must lie strictly above the edge")
        if np.any(g < 0.0):
            raise ValueError("couplings must be non-negative")
        object.__setattr__(self, "offsets", offsets)
        object.__setattr__(self, "g", g)

    @property
    def n_modes(self) -> int:
        return int(self.offsets.size)

    @property
    def omega(self) -> np.ndarray:
        return self.omega_U + self.offsets

    @property
    def weight_sum(self) -> float:
        return float(np.sum(self.g**2))

    @classmethod
    def from_arrays(cls, offsets, g, omega_U: float = 0.0) -> "DiscretizedContinuum":
        return cls(omega_U=omega_U, offsets=np.asarray(offsets, float), g=np.asarray(g, float))


def discretize(model: SpectrumModel, n_modes: int) -> DiscretizedContinuum:
    """Replace the band with ``n_modes`` lumped modes.

    The isotropic law is gridded uniformly in x = sqrt(omega - omega_U);
    in that variable the weight density is constant, so every mode carries
    the same g_j^2 and the weight sum reproduces the band integral exactly.
    The other kinds use a uniform frequency grid with midpoint weights.

    Parameters
    ----------
    model : SpectrumModel
    n_modes : int
        At least 2.

    Returns
    -------
    DiscretizedContinuum
    """
    if n_modes < 2:
        raise ValueError("n_modes must be at least 2")
    W = model.bandwidth
    if model.kind is SpectrumKind.ISOTROPIC_EDGE:
        y_edges = np.linspace(0.0, np.sqrt(W), n_modes + 1)
        y_mid = 0.5 * (y_edges[:-1] + y_edges[1:])
        offsets = y_mid**2
        widths = y_edges[1:] ** 2 - y_edges[:-1] ** 2
    elif model.kind is SpectrumKind.TABULATED:
        lo = max(0.0, model.table[0, 0] - model.omega_U)
        hi = min(W, model.table[-1, 0] - model.omega_U)
        if hi <= lo:
            raise InvalidModelError("table does not overlap the band")
        edges = np.linspace(lo, hi, n_modes + 1)
        offsets = 0.5 * (edges[:-1] + edges[1:])
        widths = np.diff(edges)
    else:
        edges = np.linspace(0.0, W, n_modes + 1)
        offsets = 0.5 * (edges[:-1] + edges[1:])
        widths = np.diff(edges)
    g2 = coupling_spectrum(model, model.omega_U + offsets) * widths
    return DiscretizedContinuum(
        omega_U=model.omega_U, offsets=offsets, g=np.sqrt(g2), model=model
    )


def load_tabulated_csv(path, gamma_c: float = 1.0, omega_U: float = 0.0,
                       bandwidth: float | None = None) -> SpectrumModel:
    """Build a TABULATED model from a two-column CSV of (omega, G) rows."""
    try:
        tab = np.loadtxt(path, delimiter=",", ndmin=2)
    except Exception as exc:
        raise InvalidModelError(f"cannot parse spectrum table {path!r}: {exc}") from exc
    if bandwidth is None and tab.size:
        bandwidth = max(float(tab[-1, 0]) - omega_U, 0.0) or None
    return SpectrumModel(
        kind=SpectrumKind.TABULATED,
        gamma_c=gamma_c,
        omega_U=omega_U,
        bandwidth=bandwidth,
        table=tab,
    )
