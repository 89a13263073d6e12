"""MAP-convergence distance at the largest n across random linear-Gaussian instances.

Shows how much dist(MAP^(n), MAP^(inf)) ~ C/n depends on the drawn instance.
"""
import argparse
import json
from pathlib import Path

from omlab import config as C
from omlab.mapest import map_convergence_experiment

ROOT = Path(__file__).resolve().parents[1]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seeds", type=int, default=5)
    ap.add_argument("--sigmas", type=float, nargs="+", default=[0.1, 0.05])
    args = ap.parse_args()
    base = json.loads((ROOT / "configs" / "map_converge_besov2.json").read_text())
    print("sigma,seed,dist_last,n_times_dist_last,decreasing")
    for sigma in args.sigmas:
        for seed in range(args.seeds):
            cfg = dict(base, problem={"sigma": sigma, "random": {"M": 16, "seed": seed}})
            limit = C.build_measure(cfg)
            phi = C.build_problem(cfg, limit, cfg["K"])
            rows, _ = map_convergence_experiment(C.build_family(cfg, limit), limit, phi, cfg["K"],
                                                 cfg["grids"]["n"])
            d = [r.dist for r in rows]
            dec = all(b < a for a, b in zip(d, d[1:]))
            print(f"{sigma:g},{seed},{d[-1]:.6g},{rows[-1].n * d[-1]:.4g},{int(dec)}")


if __name__ == "__main__":
    main()
