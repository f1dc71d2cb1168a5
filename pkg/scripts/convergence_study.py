"""How D, epsilon and 1-R move with the Fock cutoff and the evolution time."""
import argparse

import numpy as np

from aqc.diagnostics import analyse
from aqc.oscillator import Coherent, FockSpace
from aqc.splitting import FlatEnds


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--alpha", type=float, default=6.0)
    ap.add_argument("--dims", type=int, nargs="+", default=[192, 256, 384, 512])
    ap.add_argument("--taus", type=float, nargs="+", default=[0.9 * np.pi, np.pi, 1.1 * np.pi])
    args = ap.parse_args()
    prof = FlatEnds(1.0, 2.0, -4.0, 4.0)
    psi, phi = Coherent(-args.alpha), Coherent(args.alpha)
    print("dim sweep at tau = pi")
    for d in args.dims:
        e = analyse(FockSpace(dim=d), prof, psi, phi).errors
        print(f"  dim={d:4d}  D={e.D:.3e}  eps={e.epsilon:.3e}  1-R={e.one_minus_R:.9f}")
    print(f"tau sweep at dim = {args.dims[-1]}")
    for t in args.taus:
        e = analyse(FockSpace(dim=args.dims[-1]), prof, psi, phi, tau=t).errors
        print(f"  tau={t:.4f}  D={e.D:.3e}  eps={e.epsilon:.3e}  1-R={e.one_minus_R:.9f}")


if __name__ == "__main__":
    main()
