"""Jit-compiled propagation kernel.

Mirrors ``_kernels_numpy.run_schedule`` exactly; see that module for the
stepping contract.  Compiled lazily on first call and cached on disk, so
repeat sessions skip the compilation cost.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True, inline="always")
def _atom_freq(t, idx, bounds_t, seg_freq, sg_tau, sg_p):
    base = seg_freq[idx]
    f = base
    if idx > 0:
        u = (t - bounds_t[idx]) / sg_tau
        f += (seg_freq[idx - 1] - base) * 0.5 * np.exp(-(u**sg_p))
    if idx + 1 < seg_freq.shape[0]:
        u = (bounds_t[idx + 1] - t) / sg_tau
        f += (seg_freq[idx + 1] - base) * 0.5 * np.exp(-(u**sg_p))
    return f


@njit(cache=True, nogil=True)
def run_schedule(
    alpha0,
    beta_d0,
    beta0,
    mode_freq,
    g,
    d_freq,
    kd,
    seg_start_step,
    seg_freq,
    sg_tau,
    sg_exponent,
    kick_switch,
    kick_phase,
    dt,
    record_every,
    out_alpha,
    out_beta_d,
    out_cont,
    out_modes,
):
    n = beta0.shape[0]
    m = seg_freq.shape[0]
    total = int(seg_start_step[m])
    bounds_t = seg_start_step.astype(np.float64) * dt
    sg_p = int(sg_exponent)
    smooth = sg_tau > 0.0
    kdc = np.conj(kd)
    half = 0.5 * dt
    sixth = dt / 6.0
    record_modes = out_modes.shape[1] > 0

    alpha = alpha0
    beta_d = beta_d0
    beta = beta0.copy()
    k1b = np.empty(n, np.complex128)
    k2b = np.empty(n, np.complex128)
    k3b = np.empty(n, np.complex128)
    k4b = np.empty(n, np.complex128)
    b2 = np.empty(n, np.complex128)
    b3 = np.empty(n, np.complex128)
    b4 = np.empty(n, np.complex128)

    seg = 0
    rec = 0
    for step in range(total + 1):
        if seg + 1 < m and step == seg_start_step[seg + 1]:
            seg += 1
            for k in range(kick_switch.shape[0]):
                if kick_switch[k] == seg:
                    alpha = alpha * complex(np.cos(kick_phase[k]), np.sin(kick_phase[k]))
        if step % record_every == 0:
            out_alpha[rec] = alpha
            out_beta_d[rec] = beta_d
            acc = 0.0
            for j in range(n):
                acc += beta[j].real ** 2 + beta[j].imag ** 2
            out_cont[rec] = acc
            if record_modes:
                for j in range(n):
                    out_modes[rec, j] = beta[j]
            rec += 1
        if step == total:
            break

        t = step * dt
        if smooth:
            af1 = _atom_freq(t, seg, bounds_t, seg_freq, sg_tau, sg_p)
            af2 = _atom_freq(t + half, seg, bounds_t, seg_freq, sg_tau, sg_p)
            af4 = _atom_freq(t + dt, seg, bounds_t, seg_freq, sg_tau, sg_p)
        else:
            af1 = seg_freq[seg]
            af2 = af1
            af4 = af1

        s = 0.0 + 0.0j
        for j in range(n):
            s += g[j] * beta[j]
        k1a = -1j * (af1 * alpha + kd * beta_d + s)
        k1d = -1j * (d_freq * beta_d + kdc * alpha)
        for j in range(n):
            k1b[j] = -1j * (mode_freq[j] * beta[j] + g[j] * alpha)
            b2[j] = beta[j] + half * k1b[j]

        a2 = alpha + half * k1a
        d2 = beta_d + half * k1d
        s = 0.0 + 0.0j
        for j in range(n):
            s += g[j] * b2[j]
        k2a = -1j * (af2 * a2 + kd * d2 + s)
        k2d = -1j * (d_freq * d2 + kdc * a2)
        for j in range(n):
            k2b[j] = -1j * (mode_freq[j] * b2[j] + g[j] * a2)
            b3[j] = beta[j] + half * k2b[j]

        a3 = alpha + half * k2a
        d3 = beta_d + half * k2d
        s = 0.0 + 0.0j
        for j in range(n):
            s += g[j] * b3[j]
        k3a = -1j * (af2 * a3 + kd * d3 + s)
        k3d = -1j * (d_freq * d3 + kdc * a3)
        for j in range(n):
            k3b[j] = -1j * (mode_freq[j] * b3[j] + g[j] * a3)
            b4[j] = beta[j] + dt * k3b[j]

        a4 = alpha + dt * k3a
        d4 = beta_d + dt * k3d
        s = 0.0 + 0.0j
        for j in range(n):
            s += g[j] * b4[j]
        k4a = -1j * (af4 * a4 + kd * d4 + s)
        k4d = -1j * (d_freq * d4 + kdc * a4)
        for j in range(n):
            k4b[j] = -1j * (mode_freq[j] * b4[j] + g[j] * a4)

        alpha = alpha + sixth * (k1a + 2.0 * (k2a + k3a) + k4a)
        beta_d = beta_d + sixth * (k1d + 2.0 * (k2d + k3d) + k4d)
        for j in range(n):
            beta[j] = beta[j] + sixth * (k1b[j] + 2.0 * (k2b[j] + k3b[j]) + k4b[j])

    return alpha, beta_d, beta
