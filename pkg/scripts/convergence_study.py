"""L1 distance between the particle density and a fine Godunov solution as ell -> 0."""

import argparse
import math

from nonlocal_ftl.cli import reference_solution, run_convergence
from nonlocal_ftl.config import RunConfig


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--profile", choices=["sinusoid", "figure1"], default="sinusoid")
    ap.add_argument("--M", type=int, nargs="+", default=[64, 128, 256, 512, 1024])
    ap.add_argument("--ref-cells", type=int, default=4096)
    ap.add_argument("--weights", default="uniform:10")
    ap.add_argument("--kappa", type=float, default=0.0)
    ap.add_argument("--T", type=float, default=1.0)
    ap.add_argument("--jobs", type=int, default=1)
    args = ap.parse_args()

    cfg = RunConfig(profile=args.profile, weights=args.weights, kappa=args.kappa,
                    dt="1ell" if args.kappa == 0 else "max", T=args.T,
                    M_list=tuple(args.M), ref_cells=args.ref_cells, jobs=args.jobs)
    rows = run_convergence(cfg, reference_solution(cfg))
    print(f"{'M':>6} {'ell':>10} {'L1':>10} {'order':>6}")
    for M, ell, err, order in rows:
        o = "" if order is None or math.isnan(order) else f"{order:.2f}"
        print(f"{M:>6} {ell:>10.5f} {err:>10.5f} {o:>6}")


if __name__ == "__main__":
    main()
