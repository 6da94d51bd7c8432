"""Print grid-refinement tables for the writhe, Hopf linking and twist integrals.

    python3 scripts/convergence_table.py [--max-n 1024]
"""
import argparse

from selflink import geometry as geo
from selflink.framing import add_twists, frenet_framing, projection_framing
from selflink.quadrature import convergence_study, observed_orders


def table(title, values):
    print(f"# {title}")
    print(f"{'n':>6} {'value':>22} {'diff':>10} {'order':>7}")
    prev = None
    for (n, v), order in zip(values, observed_orders(values)):
        diff = "" if prev is None else f"{abs(v - prev):.2e}"
        print(f"{n:>6} {v:>22.15f} {diff:>10} {'' if order is None else f'{order:7.3f}'}")
        prev = v
    print()


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--max-n", type=int, default=1024)
    args = ap.parse_args()
    ns = [n for n in (64, 128, 256, 512, 1024, 2048) if n <= args.max_n]

    trefoil = geo.torus_knot(2, 3, 2.0, 0.5)
    torus32 = geo.torus_knot(3, 2, 2.0, 0.5)
    table("writhe, trefoil (2,3)", convergence_study("writhe", trefoil, ns))
    table("writhe, torus knot (3,2)", convergence_study("writhe", torus32, ns))
    hopf = (geo.circle(), geo.circle(cx=1.0, ux=1.0, uy=0.0, uz=0.0, vx=0.0, vy=0.0, vz=1.0))
    table("linking, Hopf pair", convergence_study("linking", hopf, ns))
    table("twist, trefoil frenet", convergence_study("twist", frenet_framing(trefoil), ns))
    circle = geo.circle()
    table("twist, circle + 3 twists", convergence_study("twist", add_twists(projection_framing(circle, (0, 0, 1)), 3), ns))


if __name__ == "__main__":
    main()
