"""Wigner function of the excited branch after a steep ramp, with its coherent approximation."""
import argparse

from aqc import experiments
from aqc.cli import emit


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n-points", type=int, default=512)
    ap.add_argument("--out", default=None, help="CSV of x, p, W")
    args = ap.parse_args()
    cfg = experiments.preset("fig8_wigner")
    cfg["grid"]["n_points"] = args.n_points
    grid, summary = experiments.wigner_summary(cfg)
    for k, v in summary.items():
        print(f"{k:>34}: {v: .6e}")
    if args.out:
        emit(experiments.grid_rows(grid), {**cfg, "summary": summary}, args.out, "csv")


if __name__ == "__main__":
    main()
