"""Raster of the sign of Delta_2 over (mu0, mu1), checked against the reality polynomial.

    python scripts/reality_region.py [--n 100] [--out out/reality]

Writes ``<out>.csv`` (region-scan schema) and, when matplotlib is present,
``<out>.png``.
"""
import argparse
from pathlib import Path

import numpy as np

from trimap.cli import run_region_scan
from trimap.config import RunConfig, ScanAxis


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=100)
    ap.add_argument("--out", default="out/reality")
    args = ap.parse_args()

    axes = (ScanAxis("mu0", 0.04, 4.0, args.n), ScanAxis("mu1", 0.04, 4.0, args.n))
    cfg = RunConfig(model="logistic", scan_axes=axes, scan_numeric=False, out=f"{args.out}.csv")
    res = run_region_scan(cfg)
    mu0 = np.array([r["mu0"] for r in res.rows])
    mu1 = np.array([r["mu1"] for r in res.rows])
    real = np.array([r["delta2_nonneg"] for r in res.rows])
    poly = (4 - mu1) * mu1 * mu0**2 - 2 * mu1 * (9 - 2 * mu1) * mu0 + 27
    print(f"{len(real)} cells, {real.mean():.1%} with Delta_2 >= 0, "
          f"{int(np.sum(real != (poly >= 0)))} disagreements with the polynomial")

    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        return
    grid = real.reshape(args.n, args.n).T
    fig, ax = plt.subplots(figsize=(5, 4.5))
    ax.imshow(grid, origin="lower", extent=(0.04, 4, 0.04, 4), cmap="Greys_r", aspect="auto")
    ax.set_xlabel(r"$\mu_0$")
    ax.set_ylabel(r"$\mu_1$")
    ax.set_title(r"$\Delta_2 \geq 0$ (white)")
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(f"{args.out}.png", dpi=120, bbox_inches="tight")
    print(f"wrote {args.out}.csv and {args.out}.png")


if __name__ == "__main__":
    main()
