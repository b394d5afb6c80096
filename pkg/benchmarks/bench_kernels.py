"""Throughput of the compiled kernels against the pure-Python fallback.

Both backends step identical path blocks from identical draws; the
script reports path-steps per second for the radial and the comparison
kernel and confirms the outputs agree bit for bit.

    python3 benchmarks/bench_kernels.py [--paths N] [--steps N]
"""

from __future__ import annotations

import argparse
import math
import time

import numpy as np

from warplab import _kernels as ker
from warplab.diffusion import drift_spec
from warplab.geometry import flat, gaussian_well


def _run_radial(impl, spec, z, h):
    paths = z.shape[0]
    r = np.full(paths, 1.0)
    ir2 = np.zeros(paths)
    iphi2 = np.zeros(paths)
    rmax = r.copy()
    refl = np.zeros(paths, dtype=np.int64)
    t0 = time.perf_counter()
    flag = ker.radial_block(impl, r, z, h, 1.0e-3, spec, ker.PHI_NONE, 1.0,
                            ir2, iphi2, rmax, refl)
    dt = time.perf_counter() - t0
    assert flag == 0
    return dt, (r, ir2, iphi2, rmax, refl)


def _run_comparison(impl, spec, z, z2, h):
    paths = z.shape[0]
    # flat quadratic-schedule coupling, depth 2, starts 1 and 3
    r = np.full(paths, 1.0)
    rho = np.full(paths, 2.0)
    lm = np.zeros(paths)
    lc = np.zeros(paths)
    dommax = np.full(paths, -math.inf)
    tau = np.full(paths, math.inf)
    coupled = np.zeros(paths, dtype=np.uint8)
    horizon = z.shape[1] * h
    t0 = time.perf_counter()
    flag = ker.comparison_block(
        impl, r, rho, z, z2, h, 1.0e-3, spec, ker.SCHED_QUAD,
        0.0, 0.0, 2.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0,
        2.0 / horizon, ker.XI_SCHEDULE, 0.0, 0, lm, lc, dommax, tau, coupled)
    dt = time.perf_counter() - t0
    assert flag == 0
    return dt, (r, rho, lm, lc, tau, coupled)


def _report(kind, results):
    py_dt, py_out = results["py"]
    print(f"{kind}:")
    for name, (dt, out) in results.items():
        steps = py_out[0].size * ARGS.steps
        same = all(np.array_equal(a, b, equal_nan=True)
                   for a, b in zip(out, py_out))
        print(f"  {name:3s}  {dt:8.3f} s   {steps / dt:12.3e} path-steps/s"
              f"   speedup x{py_dt / dt:6.2f}   bit-identical={same}")


if __name__ == "__main__":
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--paths", type=int, default=256)
    parser.add_argument("--steps", type=int, default=4000)
    ARGS = parser.parse_args()

    spec = drift_spec(flat(2), gaussian_well(2.0))
    rng = np.random.default_rng(20260814)
    z = rng.standard_normal((ARGS.paths, ARGS.steps))
    z2 = rng.standard_normal((ARGS.paths, ARGS.steps))
    h = 1.0e-3

    backends = ["py"] + (["ext"] if ker.have_extension() else [])
    print(f"active backend: {ker.backend_name()}  "
          f"(paths={ARGS.paths}, steps={ARGS.steps})")

    _report("radial", {name: _run_radial(ker.get_impl(name), spec,
                                         z.copy(), h)
                       for name in backends})
    _report("comparison", {name: _run_comparison(ker.get_impl(name), spec,
                                                 z.copy(), z2.copy(), h)
                           for name in backends})
