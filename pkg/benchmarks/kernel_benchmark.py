"""Time the numba kernel against the pure-numpy fallback.

Runs the same alternating-detuning propagation through both backends,
checks they agree to near machine precision, and prints wall times.

    python3 benchmarks/kernel_benchmark.py [--n-modes 600] [--horizon 30]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from bandedge import _kernels_numpy
from bandedge.control import SequenceSpec, build_sequence
from bandedge.dynamics import SystemState, propagate
from bandedge.spectra import SpectrumKind, SpectrumModel, discretize

try:
    from bandedge import _kernels_numba
except ImportError:
    _kernels_numba = None


def timed_run(backend, init, schedule, continuum, dt, horizon):
    import bandedge.kernels as kernels

    saved = kernels._backend
    kernels._backend = backend
    try:
        t0 = time.perf_counter()
        trace = propagate(init, schedule, continuum, dt=dt, horizon=horizon,
                          sampling=10 * dt)
        elapsed = time.perf_counter() - t0
    finally:
        kernels._backend = saved
    return trace, elapsed


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n-modes", type=int, default=600)
    parser.add_argument("--horizon", type=float, default=30.0)
    parser.add_argument("--dt", type=float, default=1e-3)
    args = parser.parse_args()

    model = SpectrumModel(SpectrumKind.ISOTROPIC_EDGE, gamma_c=1.0)
    continuum = discretize(model, args.n_modes)
    init = SystemState.excited(continuum.n_modes)
    spec = SequenceSpec(0.5, 0.25, 2.4, 2.4, n_periods=12)
    schedule = build_sequence(spec)

    print(f"n_modes={args.n_modes}  horizon={args.horizon}  dt={args.dt}")

    trace_np, t_np = timed_run(_kernels_numpy, init, schedule, continuum,
                               args.dt, args.horizon)
    print(f"numpy : {t_np:8.3f} s")

    if _kernels_numba is None:
        print("numba : not installed")
        return

    # First call includes JIT compilation; time the second.
    timed_run(_kernels_numba, init, schedule, continuum, args.dt, args.horizon)
    trace_nb, t_nb = timed_run(_kernels_numba, init, schedule, continuum,
                               args.dt, args.horizon)
    print(f"numba : {t_nb:8.3f} s (after warmup)  speedup x{t_np / t_nb:.1f}")

    diff = np.max(np.abs(trace_np.alpha - trace_nb.alpha))
    print(f"max |alpha| difference between backends: {diff:.3e}")
    assert diff < 1e-10, "backends disagree"


if __name__ == "__main__":
    main()
