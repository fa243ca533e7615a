#!/usr/bin/env python3
"""Compare the numba kernels against the pure-numpy fallback.

Runs the full and far-field methods on a mid-size scenario with both
backends, reports wall times and the cross-backend agreement. Select the
default backend for normal runs with DEISM_BACKEND=numba|numpy; this script
switches at runtime via deism.set_backend.
"""

import argparse
import time

import numpy as np

import deism
from deism import kernels
from deism.engine import DeismRequest, deism_spectrum


def build_request(n_order, v_order, reflection_order, n_freq, workers):
    medium = deism.Medium()
    room = deism.RoomSpec(dimensions=(4.0, 3.0, 2.5), zeta=18.0, medium=medium)
    freqs = np.linspace(100.0, 1000.0, n_freq)
    cs = deism.synthetic_directivity(n_order, freqs, medium, 0.4, seed=2024)
    cr = deism.synthetic_directivity(v_order, freqs, medium, 0.5, seed=2025,
                                     kind="receiver")
    return DeismRequest(
        room=room,
        src_pose=deism.TransducerPose(position=(1.1, 1.1, 1.3)),
        rcv_pose=deism.TransducerPose(position=(1.9, 1.6, 1.4)),
        c_src=cs, c_rcv=cr,
        max_reflection_order=reflection_order,
        frequencies=freqs,
        workers=workers,
    )


def time_method(req, method, repeat):
    req = req.with_method(method)
    deism_spectrum(req)  # warm-up (JIT compile on the numba backend)
    best, spec = None, None
    for _ in range(repeat):
        t0 = time.perf_counter()
        spec, stats = deism_spectrum(req)
        dt = time.perf_counter() - t0
        best = dt if best is None else min(best, dt)
    return best, spec, stats


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--orders", type=int, default=4, help="source and receiver order")
    parser.add_argument("--reflection-order", type=int, default=8)
    parser.add_argument("--frequencies", type=int, default=12)
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument("--workers", type=int, default=1)
    args = parser.parse_args()

    req = build_request(args.orders, args.orders, args.reflection_order,
                        args.frequencies, args.workers)
    results = {}
    for backend in kernels.available_backends():
        kernels.set_backend(backend)
        for method in ("FULL", "LC"):
            wall, spec, stats = time_method(req, method, args.repeat)
            results[(backend, method)] = (wall, spec)
            print(f"{backend:>6} {method:<4} {wall * 1e3:9.1f} ms "
                  f"({stats.n_images} images, {stats.coupling_terms} coupling terms)")

    if len(kernels.available_backends()) == 2:
        print()
        for method in ("FULL", "LC"):
            t_nb, s_nb = results[("numba", method)]
            t_np, s_np = results[("numpy", method)]
            rel = float(np.max(np.abs(s_nb.values - s_np.values) / np.abs(s_nb.values)))
            print(f"{method}: numpy/numba wall ratio {t_np / t_nb:6.1f}, "
                  f"max relative difference {rel:.2e}")


if __name__ == "__main__":
    main()
