"""Recovery-sequence gap versus constant-sequence gap for the Besov s + 1/n family.

Along x^(n) = m^(n) + (gamma^(n)/gamma^(inf)) (x - m^(inf)) the normalised
coordinates are unchanged, so I^(n)(x^(n)) = I^(inf)(x) term by term; the
constant sequence x^(n) = x shows the convergence the family actually has.
"""
import argparse

from omlab.measures import BesovParams, make_besov
from omlab.om import besov_family, gamma_probe, probe_to_csv
from omlab.weights import Point


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--s", type=float, default=2.0)
    ap.add_argument("--p", type=float, default=2.0)
    args = ap.parse_args()
    base = BesovParams(args.s, 1, args.p)
    x = Point(delta={1: 0.8, 2: -0.5, 3: 0.25, 5: 1.0})
    rows = gamma_probe(lambda n: besov_family(base, n), make_besov(base), x, [2**j for j in range(9)])
    print(probe_to_csv(rows), end="")


if __name__ == "__main__":
    main()
