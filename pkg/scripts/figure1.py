"""Look-ahead experiment: TV(rho) over time for the 10-vehicle average.

Prints a small table and, with --plot, saves tv_rho.png (needs matplotlib).
"""

import argparse

import numpy as np

from nonlocal_ftl import diagnostics as diag
from nonlocal_ftl.config import preset
from nonlocal_ftl.dynamics import simulate
from nonlocal_ftl.eulerian import equal_mass_partition


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--literal-weights", action="store_true")
    ap.add_argument("--plot", metavar="PNG")
    args = ap.parse_args()

    cfg = preset("figure1")
    cfg.literal_weights = args.literal_weights
    w, m, prof = cfg.weight_profile(), cfg.velocity_model(), cfg.initial_profile()
    init, ell = equal_mass_partition(prof, cfg.vehicle_count(prof), w.N)
    n = int(np.ceil(cfg.T / ell - 1e-9))
    times = np.minimum(np.arange(n + 1) * ell, cfg.T)
    traj = simulate(init, w, m, "euler", ell, cfg.T, times)
    tv = np.array([r.tv_rho for r in diag.record_trajectory(traj, w, m, [])])

    print(f"M={init.M} ell={ell:.6f} N={w.N} weights={w.c[0]:.3f}..")
    for t in np.arange(0, cfg.T + 1e-9, 0.5):
        k = int(np.argmin(np.abs(traj.times - t)))
        print(f"t={traj.times[k]:5.2f}  TV(rho)={tv[k]:.4f}")
    print(f"max TV(rho) = {tv.max():.4f} (initial {tv[0]:.4f})")

    if args.plot:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt

        fig, ax = plt.subplots(figsize=(6, 3.5))
        ax.plot(traj.times, tv)
        ax.set_xlabel("t")
        ax.set_ylabel("TV(rho)")
        fig.tight_layout()
        fig.savefig(args.plot, dpi=120)


if __name__ == "__main__":
    main()
