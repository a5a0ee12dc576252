#!/usr/bin/env python3
"""Re-run the step-function optimization for each clause-size set.

For every (K, steps, pm1) row this searches from scratch and prints the
found objective next to the evaluation of the published parameters, so
drift in either the optimizer or the objective shows up immediately.
Ratios assume the symmetric hardest configuration (conjectured).
"""

import argparse

from naeopt.core import StepFunction
from naeopt import stepopt

ROWS = [
    ((3, 5), 2, True, (2.275193649,), (-1, 1), 0.872886331),
    ((3, 6), 2, True, (2.251163925,), (-1, 1), 0.870806446),
    ((3, 6), 3, True, (2.251064988, 4.502131583), (-1, 1, -1), 0.870806482),
    ((3, 7), 3, True, (1.955864822, 2.288418785), (-1, 1, -1), 0.869818822),
    ((3, 8), 3, True, (1.783234209, 2.015766438), (-1, 1, -1), 0.869954386),
    ((3, 7, 8), 3, True, (1.914108264, 2.216226101), (-1, 1, -1), 0.869809386),
]


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--restarts", type=int, default=64)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    print(f"{'K':>10} {'steps':>5} {'published':>12} {'re-evaluated':>13} "
          f"{'searched':>12} {'breakpoints'}")
    for sizes, steps, pm1, a, b, published in ROWS:
        f_pub = StepFunction(a, tuple(float(x) for x in b))
        re_eval = stepopt.objective_alphaK(f_pub, sizes)
        cfg = stepopt.StepSearchConfig(sizes, steps=steps, pm_one=pm1,
                                       restarts=args.restarts, seed=args.seed)
        res = stepopt.optimize_step(cfg)
        bp = ", ".join(f"{x:.6f}" for x in res.f.breakpoints)
        print(f"{str(sizes):>10} {steps:>5} {published:>12.9f} {re_eval:>13.9f} "
              f"{res.objective:>12.9f} ({bp})")


if __name__ == "__main__":
    main()
