"""Print D, epsilon and 1-R for the coherent, squeezed and cat families of the ramp protocol."""
import argparse
import os

from aqc import experiments
from aqc.cli import emit

FAMILIES = ("fig4_coherent", "fig4_squeezed", "fig4_cat")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out-dir", default=None, help="write one CSV per family here")
    args = ap.parse_args()
    for name in FAMILIES:
        cfg = experiments.resolved(experiments.preset(name))
        rows = experiments.run_config(cfg)
        print(f"# {name}")
        for r in rows:
            tag = r.get("family", name.split("_")[1])
            extra = f" r={r['r']:+g}" if "r" in r else ""
            print(f"{tag:>14}{extra} alpha={r['alpha']:5.2f}  D={r['D']:.2e}  "
                  f"eps={r['epsilon']:.2e}  1-R={r['one_minus_R']:.3e}")
        if args.out_dir:
            os.makedirs(args.out_dir, exist_ok=True)
            emit(rows, cfg, os.path.join(args.out_dir, f"{name}.csv"), "csv")


if __name__ == "__main__":
    main()
