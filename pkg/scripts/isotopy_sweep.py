"""Writhe, twist and sl along an isotopy family of the trefoil.

Shows the writhe and the Frenet twist moving in opposite directions while
their sum stays on the same integer.

    python3 scripts/isotopy_sweep.py [--amplitude 0.05] [--mode 3] [--steps 11]
"""
import argparse

import numpy as np

from selflink import geometry as geo
from selflink.framing import frenet_framing
from selflink.invariant import IsotopyFamily, self_link
from selflink.quadrature import QuadratureConfig


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--amplitude", type=float, default=0.05)
    ap.add_argument("--mode", type=int, default=3)
    ap.add_argument("--steps", type=int, default=11)
    ap.add_argument("--n", type=int, default=512)
    args = ap.parse_args()
    family = IsotopyFamily(geo.torus_knot(2, 3, 2.0, 0.5), mode=args.mode, amplitude=args.amplitude)
    family.validate()
    cfg = QuadratureConfig(args.n)
    print(f"{'u':>5} {'writhe':>12} {'twist':>12} {'sl_real':>12} {'sl':>4} {'residual':>9}")
    for u in np.linspace(0.0, 1.0, args.steps):
        curve = family.curve_at(u)
        rep = self_link(curve, frenet_framing(curve), cfg)
        print(f"{u:5.2f} {rep.writhe:12.6f} {rep.twist:12.6f} {rep.sl_real:12.8f} {rep.sl:>4} {rep.residual:9.1e}")


if __name__ == "__main__":
    main()
