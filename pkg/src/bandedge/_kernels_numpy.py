"""Pure-numpy twin of the accelerated propagation kernel.

Kept in exact semantic lockstep with the jit-compiled version: the same
stepping order, segment bookkeeping, kick handling and sampling layout,
so the two backends can be swapped (or compared) freely.  Selected when
the accelerated backend is disabled via BANDEDGE_NUMBA=0 or numba is
missing.
"""

from __future__ import annotations

import math

import numpy as np


def _atom_freq(t, idx, bounds_t, seg_freq, sg_tau, sg_p):
    """Instantaneous atom diagonal with smooth transitions between segments.

    Each switch is a symmetric step: on either side the distance to the
    neighbouring segment value shrinks as exp(-(|t - t_switch| / tau)^p),
    so the midpoint value is reached exactly at the switch time and the
    profile is flat to machine precision a few tau away.
    """
    base = seg_freq[idx]
    f = base
    if idx > 0:
        u = (t - bounds_t[idx]) / sg_tau
        f += (seg_freq[idx - 1] - base) * 0.5 * math.exp(-(u**sg_p))
    if idx + 1 < seg_freq.shape[0]:
        u = (bounds_t[idx + 1] - t) / sg_tau
        f += (seg_freq[idx + 1] - base) * 0.5 * math.exp(-(u**sg_p))
    return f


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
    """Propagate the single-excitation amplitudes through a compiled schedule.

    Fourth-order fixed-step integration of

        d/dt alpha  = -i (f(t) alpha + kd beta_d + sum_j g_j beta_j)
        d/dt beta_d = -i (d_freq beta_d + conj(kd) alpha)
        d/dt beta_j = -i (mode_freq_j beta_j + g_j alpha)

    where f(t) is the per-segment atom diagonal (piecewise constant, or
    smoothly switched when sg_tau > 0).  Samples land every
    ``record_every`` steps; phase kicks fire when the flagged switches
    complete.  Returns the final (alpha, beta_d, beta).
    """
    alpha = complex(alpha0)
    beta_d = complex(beta_d0)
    beta = np.array(beta0, dtype=np.complex128, copy=True)
    g_c = g.astype(np.complex128)
    m = seg_freq.shape[0]
    total = int(seg_start_step[m])
    bounds_t = seg_start_step * dt
    sg_p = int(sg_exponent)
    smooth = sg_tau > 0.0
    kdc = complex(kd).conjugate()
    kd = complex(kd)
    d_freq = float(d_freq)
    half = 0.5 * dt
    sixth = dt / 6.0
    record_modes = out_modes.shape[1] > 0

    seg = 0
    rec = 0
    for step in range(total + 1):
        if seg + 1 < m and step == seg_start_step[seg + 1]:
            seg += 1
            for k in range(kick_switch.shape[0]):
                if kick_switch[k] == seg:
                    alpha *= complex(math.cos(kick_phase[k]), math.sin(kick_phase[k]))
        if step % record_every == 0:
            out_alpha[rec] = alpha
            out_beta_d[rec] = beta_d
            out_cont[rec] = float(np.sum(beta.real**2 + beta.imag**2))
            if record_modes:
                out_modes[rec, :] = beta
            rec += 1
        if step == total:
            break

        t = step * dt
        if smooth:
            af1 = _atom_freq(t, seg, bounds_t, seg_freq, sg_tau, sg_p)
            af2 = _atom_freq(t + half, seg, bounds_t, seg_freq, sg_tau, sg_p)
            af4 = _atom_freq(t + dt, seg, bounds_t, seg_freq, sg_tau, sg_p)
        else:
            af1 = af2 = af4 = seg_freq[seg]

        s = np.dot(g_c, beta)
        k1a = -1j * (af1 * alpha + kd * beta_d + s)
        k1d = -1j * (d_freq * beta_d + kdc * alpha)
        k1b = -1j * (mode_freq * beta + g * alpha)

        a2 = alpha + half * k1a
        d2 = beta_d + half * k1d
        b2 = beta + half * k1b
        s = np.dot(g_c, b2)
        k2a = -1j * (af2 * a2 + kd * d2 + s)
        k2d = -1j * (d_freq * d2 + kdc * a2)
        k2b = -1j * (mode_freq * b2 + g * a2)

        a3 = alpha + half * k2a
        d3 = beta_d + half * k2d
        b3 = beta + half * k2b
        s = np.dot(g_c, b3)
        k3a = -1j * (af2 * a3 + kd * d3 + s)
        k3d = -1j * (d_freq * d3 + kdc * a3)
        k3b = -1j * (mode_freq * b3 + g * a3)

        a4 = alpha + dt * k3a
        d4 = beta_d + dt * k3d
        b4 = beta + dt * k3b
        s = np.dot(g_c, b4)
        k4a = -1j * (af4 * a4 + kd * d4 + s)
        k4d = -1j * (d_freq * d4 + kdc * a4)
        k4b = -1j * (mode_freq * b4 + g * a4)

        alpha = alpha + sixth * (k1a + 2.0 * (k2a + k3a) + k4a)
        beta_d = beta_d + sixth * (k1d + 2.0 * (k2d + k3d) + k4d)
        beta += sixth * (k1b + 2.0 * (k2b + k3b) + k4b)

    return alpha, beta_d, beta
