#!/usr/bin/env python3
"""Trace the completeness/soundness tradeoff curve and locate the worst ratio.

Writes <out>_points.csv (every grid point), <out>_envelope.csv (the cleaned
lower envelope) and prints the worst-ratio point.  The default settings
reproduce the coarse search phase (100-cell discretization); pass
--refine to follow up with the full golden-section refinement at 600 cells.
"""

import argparse
import csv

import numpy as np

from naeopt import fredholm


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--problem", choices=("maxcut", "nae3"), default="nae3")
    ap.add_argument("--grid", type=int, default=200)
    ap.add_argument("--N", type=int, default=100)
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--refine", action="store_true")
    ap.add_argument("--out", default="tradeoff")
    args = ap.parse_args()

    alphas = np.linspace(0.0, 1.0, args.grid)
    rhos = np.linspace(-1.0, 0.0, args.grid)
    pts = fredholm.curve(args.problem, alphas, rhos, args.N, threads=args.threads)

    with open(f"{args.out}_points.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["problem", "alpha", "rho", "rho0_variant",
                    "completeness", "soundness", "ratio"])
        for p in pts:
            w.writerow([p.problem, f"{p.alpha:.9g}", f"{p.rho:.9g}", p.rho0_variant,
                        f"{p.completeness:.9g}", f"{p.soundness:.9g}",
                        f"{p.ratio:.9g}" if np.isfinite(p.ratio) else "inf"])
    env = fredholm.lower_envelope(pts)
    with open(f"{args.out}_envelope.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["completeness", "soundness"])
        for c, s in env:
            w.writerow([f"{c:.9g}", f"{s:.9g}"])

    finite = [p for p in pts if np.isfinite(p.ratio)]
    worst = min(finite, key=lambda p: p.ratio)
    print(f"coarse worst ratio {worst.ratio:.7f} at alpha={worst.alpha:.4f} "
          f"rho={worst.rho:.4f} variant={worst.rho0_variant}")
    if args.refine:
        res = fredholm.approx_ratio(args.problem, grid=args.grid, rounds=3,
                                    n=600, coarse_n=args.N, threads=args.threads)
        print(f"refined ratio {res.ratio:.7f} at alpha={res.alpha:.4f} "
              f"rho={res.rho:.4f} variant={res.rho0_variant}")


if __name__ == "__main__":
    main()
