"""Infer q from simulated probabilities for three ramp shapes and compare with tanh(chi)/chi."""
import argparse

import numpy as np

from aqc import experiments
from aqc.cli import emit


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--points", type=int, default=46)
    ap.add_argument("--out", default=None)
    args = ap.parse_args()
    cfg = experiments.preset("fig5_potentials")
    cfg["sweep"] = [{"name": "chi", "values": [round(float(c), 12)
                                               for c in np.linspace(0.1, 1.0, args.points)]}]
    rows = experiments.run_config(cfg)
    print(f"{'chi':>6} {'flat':>9} {'sin':>9} {'linear':>9} {'tanh/chi':>9}")
    for r in rows:
        print(f"{r['chi']:6.3f} {r['q_flat']:9.5f} {r['q_sin']:9.5f} {r['q_linear']:9.5f} "
              f"{r['q_analytic']:9.5f}")
    for name in ("flat", "sin", "linear"):
        dev = max(abs(r[f"q_{name}"] / r["q_analytic"] - 1) for r in rows)
        print(f"max relative deviation, {name}: {dev:.4f}")
    if args.out:
        emit(rows, cfg, args.out, "csv")


if __name__ == "__main__":
    main()
