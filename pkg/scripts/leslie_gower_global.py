"""Global check for the two-periodic Leslie-Gower model.

    python scripts/leslie_gower_global.py [--draws 20] [--grid 50] [--seed 0]

For the default parameters and for random draws with a coexistence cycle:
locate all 2-cycles, confirm there are no 2-cycles of the two-step map, and
sample the open quadrant to see that every start converges to C*.
"""
import argparse
import time
import warnings

import numpy as np

from trimap import compose, find_fixed_points, period2_absence_test, verify_global_convergence
from trimap.models import LeslieGowerParams, leslie_gower_cycles, leslie_gower_system


def check(params, grid):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        system = leslie_gower_system(params)
    op = compose(system, 0, 2)
    fixed = find_fixed_points(op)
    absent = period2_absence_test(op, known_fixed=[r.point for r in fixed]).absent
    cstar = leslie_gower_cycles(params).c2[0]
    target = [r for r in fixed if np.max(np.abs(r.point - cstar)) < 1e-9]
    rep = verify_global_convergence(system, target, density=grid)
    return len(fixed), absent, rep.fraction, rep.max_iters_used


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--draws", type=int, default=20)
    ap.add_argument("--grid", type=int, default=50)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    cases = [LeslieGowerParams()]
    while len(cases) < args.draws + 1:
        p = LeslieGowerParams(mu=rng.uniform(1.1, 4), alpha=rng.uniform(1.1, 4), beta=rng.uniform(0.05, 0.95),
                              K=tuple(rng.uniform(0.5, 3, 2)), L=tuple(rng.uniform(0.5, 3, 2)))
        if leslie_gower_cycles(p).coexistence:
            cases.append(p)
    print(f"{'mu':>6} {'alpha':>6} {'beta':>5} {'fixed':>5} {'no p2':>5} {'fraction':>8} {'iters':>6}")
    t0 = time.perf_counter()
    for p in cases:
        n, absent, frac, iters = check(p, args.grid)
        print(f"{p.mu:6.3f} {p.alpha:6.3f} {p.beta:5.2f} {n:5d} {str(absent):>5} {frac:8.4f} {iters:6d}")
    print(f"{len(cases)} parameter sets in {time.perf_counter() - t0:.1f}s")


if __name__ == "__main__":
    main()
