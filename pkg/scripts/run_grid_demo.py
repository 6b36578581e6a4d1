#!/usr/bin/env python3
"""Small end-to-end grid demo on synthetic signals.

Writes results.csv / averages.csv under --outdir and prints the per-cell
means.  The full-size sweep (coarse 4..16 x fine 10..24 on your own
recordings) is the same call with a wider config; see README.
"""

import argparse
from pathlib import Path

from dualquant.experiment import ExperimentConfig, run_grid


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--outdir", default="grid-demo")
    parser.add_argument("--signals", type=int, default=3)
    parser.add_argument("--seed", type=int, default=1337)
    parser.add_argument("--duration", type=float, default=2.0)
    parser.add_argument("--iters", type=int, default=200)
    args = parser.parse_args()

    cfg = ExperimentConfig(
        synth_count=args.signals,
        synth_seed=args.seed,
        synth_duration_s=args.duration,
        synth_rate_hz=16000,
        coarse_bits=[8, 10, 12],
        fine_bits=[14, 18, 22],
        k=4,
        max_iters=args.iters,
        output_dir=args.outdir,
    )
    rows = run_grid(cfg)
    print(f"{len(rows)} cells -> {Path(args.outdir) / 'results.csv'}")
    print(Path(args.outdir, "averages.csv").read_text())


if __name__ == "__main__":
    main()
