"""Signed cross-tangent counts against the Frenet self-linking number for a few torus knots.

    python3 scripts/cross_tangents.py [--grid 256]
"""
import argparse

from selflink import geometry as geo
from selflink.diagram import cross_tangent_count
from selflink.errors import SelfLinkError
from selflink.framing import frenet_framing
from selflink.invariant import self_link
from selflink.quadrature import QuadratureConfig

KNOTS = [(2, 3), (3, 2), (2, 5), (5, 2), (3, 4)]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--grid", type=int, default=256)
    ap.add_argument("--n", type=int, default=512, help="quadrature grid for sl")
    args = ap.parse_args()
    print(f"{'knot':>8} {'count':>6} {'count2x':>8} {'sl':>4} {'ratio':>7} reliable")
    for p, q in KNOTS:
        curve = geo.torus_knot(p, q, 2.0, 0.5)
        try:
            a = cross_tangent_count(curve, args.grid)
            b = cross_tangent_count(curve, 2 * args.grid)
            sl = self_link(curve, frenet_framing(curve), QuadratureConfig(args.n)).sl
        except SelfLinkError as exc:
            print(f"{f'({p},{q})':>8} skipped: {exc}")
            continue
        ratio = f"{a.count / sl:7.3f}" if sl else "    n/a"
        print(f"{f'({p},{q})':>8} {a.count:>6} {b.count:>8} {sl:>4} {ratio} {a.reliable and b.reliable}")


if __name__ == "__main__":
    main()
