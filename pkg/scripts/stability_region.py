"""Stability regions of E0 and E1 for the two-periodic logistic model, nu0 = nu1 = 0.5.

    python scripts/stability_region.py [--n 60] [--out out/stability]

Closed-form predicates come from the region scan; each cell is also
classified from the finite-difference Jacobian at the numerically located
axis point, and disagreements are counted.
"""
import argparse
import warnings
from pathlib import Path

import numpy as np

from trimap import Verdict, classify_spectrum, compose, find_fixed_points, jacobian
from trimap.cli import run_region_scan
from trimap.config import RunConfig, ScanAxis
from trimap.models import LogisticParams, logistic_system


def fd_e1_stable(m0, m1, x_star):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        system = logistic_system(LogisticParams((m0, m1), (0.5, 0.5)))
    op = compose(system, 0, 2)
    for rec in find_fixed_points(op, grid_density=64):
        if abs(rec.point[1]) < 1e-12 and abs(rec.point[0] - x_star) < 1e-7:
            return classify_spectrum(jacobian(op, rec.point, method="fd")).verdict is Verdict.SINK
    return None


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=60)
    ap.add_argument("--out", default="out/stability")
    args = ap.parse_args()

    axes = (ScanAxis("mu0", 0.2, 4.0, args.n), ScanAxis("mu1", 0.2, 4.0, args.n))
    cfg = RunConfig(model="logistic", params={"nu": [0.5, 0.5]}, scan_axes=axes,
                    scan_numeric=False, out=f"{args.out}.csv")
    res = run_region_scan(cfg)
    e0 = np.array([r["E0_stable"] for r in res.rows])
    e1 = np.array([bool(r["E1_stable"]) for r in res.rows])

    from trimap.models.logistic import cardano_x_star

    checked = disagree = 0
    for r, pred in zip(res.rows, e1):
        x = cardano_x_star(r["mu0"], r["mu1"])
        if x is None or not 0 < x < 1:
            continue
        fd = fd_e1_stable(r["mu0"], r["mu1"], x)
        if fd is not None:
            checked += 1
            disagree += fd != pred
    print(f"{len(res.rows)} cells: E0 stable {e0.mean():.1%}, E1 stable {e1.mean():.1%}; "
          f"E1 predicate vs FD verdict: {disagree} of {checked} disagree")

    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        return
    img = (e0.astype(int) + 2 * e1.astype(int)).reshape(args.n, args.n).T
    fig, ax = plt.subplots(figsize=(5, 4.5))
    ax.imshow(img, origin="lower", extent=(0.2, 4, 0.2, 4), cmap="viridis", aspect="auto", vmin=0, vmax=3)
    ax.set_xlabel(r"$\mu_0$")
    ax.set_ylabel(r"$\mu_1$")
    ax.set_title(r"$E_0$ stable (1), $E_1$ stable (2)")
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(f"{args.out}.png", dpi=120, bbox_inches="tight")
    print(f"wrote {args.out}.csv and {args.out}.png")


if __name__ == "__main__":
    main()
