#!/usr/bin/env python3
"""Time one dual-branch solver iteration on a 6 s, 48 kHz signal."""

import argparse
import time

import numpy as np

from dualquant import (
    AcquisitionModel,
    Quantizer,
    Signal,
    SolverConfig,
    cva_solve,
    default_steps,
    make_tight_frame,
    pad_to_multiple,
    peak_normalize,
    simulate_acquisition,
)
from dualquant.experiment import build_filter, padded_length


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seconds", type=float, default=6.0)
    parser.add_argument("--rate", type=int, default=48000)
    parser.add_argument("--iters", type=int, default=10)
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    t = np.arange(int(args.seconds * args.rate)) / args.rate
    samples = np.zeros(t.size)
    for _ in range(12):
        samples += (
            rng.uniform(0.1, 1.0)
            * np.exp(-t / rng.uniform(0.3, 2.0))
            * np.sin(2 * np.pi * rng.uniform(60, 0.375 * args.rate) * t)
        )
    x = peak_normalize(Signal(samples, args.rate))
    target = padded_length(len(x), 4, 512, 2048)
    x_pad = pad_to_multiple(x, target)

    build_start = time.perf_counter()
    frame = make_tight_frame(2048, 512, 2048, target)
    print(f"frame build ({target} samples): {time.perf_counter() - build_start:.2f} s")

    fir = build_filter(4)
    model = AcquisitionModel(fir, 4, Quantizer(20), Quantizer(10))
    y1, y2 = simulate_acquisition(x_pad, model)
    tau, sigma = default_steps(fir)
    cfg = SolverConfig(tau, sigma, lam=Quantizer(10).step / 2, max_iters=args.iters)

    start = time.perf_counter()
    cva_solve(y1, y2, model, frame, cfg, reference=x_pad)
    per_iter = (time.perf_counter() - start) / args.iters
    print(f"{args.iters} iterations: {per_iter * 1000:.1f} ms per iteration")


if __name__ == "__main__":
    main()
