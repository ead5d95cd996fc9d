"""Command-line front end.

Exit codes: 0 success, 2 invalid configuration, 3 collision during a run,
4 Godunov self-validation failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import fields, replace
from pathlib import Path

import numpy as np

from . import config as cfgmod
from .config import ConfigError, RunConfig
from .diagnostics import default_entropies, record, records_to_csv, tv_blowup_check
from .dynamics import CollisionError, StepSizeError, simulate
from .eulerian import density_field, equal_mass_partition, l1_distance_fields, resample_to_grid
from .godunov import (
    UniformGrid,
    grid_to_csv,
    l1_error_vs_exact,
    periodic_riemann_exact,
    riemann_grid,
    solve,
)
from .velocity import greenshields

log = logging.getLogger("nonlocal_ftl")

EXIT_OK, EXIT_CONFIG, EXIT_COLLISION, EXIT_VALIDATION = 0, 2, 3, 4

RIEMANN_CASES = {"rarefaction": (1.0, 0.05), "shock": (0.2, 0.8)}


def _fmt(x) -> str:
    return "" if x is None else format(float(x), ".17g")


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def sample_times(T: float, dt: float, samples: int) -> list[float]:
    """``samples == 0`` means every step; otherwise evenly spaced points."""
    if samples == 0:
        n = math.ceil(T / dt - 1e-9)
        return [k * dt for k in range(n)] + [T]
    if samples == 1:
        return [T]
    return list(np.linspace(0.0, T, samples))


def write_manifest(path: Path, cfg: RunConfig, command: str, derived: dict) -> None:
    """Write every config key (so the file reloads via ``--config``) plus derived values."""
    lines = [f"# nonlocal_ftl run manifest: {command}"]
    for f in fields(RunConfig):
        if f.name == "notes":
            continue
        val = getattr(cfg, f.name)
        if val is None:
            val = "none"
        elif isinstance(val, tuple):
            val = ",".join(_fmt(v) if isinstance(v, float) else str(v) for v in val)
        elif isinstance(val, float):
            val = _fmt(val)
        lines.append(f"{f.name} = {val}")
    for key, val in derived.items():
        lines.append(f"# {key}: {_fmt(val) if isinstance(val, float) else val}")
    for note in cfg.notes:
        lines.append(f"# note: {note}")
    _write(path, "\n".join(lines) + "\n")


def run_simulation(cfg: RunConfig, out: Path) -> int:
    m = cfg.velocity_model()
    w = cfg.weight_profile()
    prof = cfg.initial_profile()
    M = cfg.vehicle_count(prof)
    init, ell = equal_mass_partition(prof, M, w.N)
    dt = cfg.time_step(ell, w, m)
    times = sample_times(cfg.T, dt, cfg.samples)
    derived = {"mass": prof.mass, "M": M, "ell": ell, "dt": dt, "N": w.N,
               "c": ",".join(_fmt(c) for c in w.c)}
    try:
        traj = simulate(init, w, m, cfg.scheme, dt, cfg.T, times, unsafe_dt=cfg.unsafe_dt)
    except CollisionError as exc:
        log.error("%s", exc)
        write_manifest(out / "run_manifest.txt", cfg, "simulate", {**derived, "error": str(exc)})
        return EXIT_COLLISION

    entropies = default_entropies(m)
    records = [record(s, w, m, entropies) for s in traj.snapshots]
    _write(out / "diagnostics.csv", records_to_csv(records, [e.name for e in entropies]))

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["t", "i", "x", "rho"])
    for s in traj.snapshots:
        for i, (x, r) in enumerate(zip(s.x, s.rho)):
            writer.writerow([_fmt(s.t), i, _fmt(x), _fmt(r)])
    _write(out / "trajectory.csv", buf.getvalue())

    tv_max, exceeds = tv_blowup_check(traj)
    derived.update(
        tv_rho_initial=records[0].tv_rho,
        tv_rho_max=tv_max,
        tv_exceeds_initial=str(exceeds).lower(),
        min_gap_over_ell=min(traj.min_gap_over_ell, default=float(np.min(init.y))),
        min_speed=min(traj.min_speed, default=float("nan")),
        max_gap_sum_error=max(traj.gap_sum_error, default=0.0),
    )
    write_manifest(out / "run_manifest.txt", cfg, "simulate", derived)
    log.info("wrote %s (TV(rho) %.4g -> max %.4g)", out, records[0].tv_rho, tv_max)
    return EXIT_OK


def reference_solution(cfg: RunConfig) -> UniformGrid:
    prof = cfg.initial_profile()
    nodes = np.linspace(0.0, prof.P, cfg.ref_cells + 1)
    grid0 = UniformGrid(prof.P, np.diff(prof.cumulative(nodes)) / (prof.P / cfg.ref_cells))
    return solve(grid0, cfg.velocity_model(), cfg.T)


def converge_case(cfg: RunConfig, M: int, ref: UniformGrid) -> tuple[int, float, float]:
    m = cfg.velocity_model()
    w = cfg.weight_profile()
    init, ell = equal_mass_partition(cfg.initial_profile(), M, w.N)
    dt = cfg.time_step(ell, w, m)
    traj = simulate(init, w, m, cfg.scheme, dt, cfg.T, [cfg.T], unsafe_dt=cfg.unsafe_dt)
    err = l1_distance_fields(resample_to_grid(density_field(traj.final), ref.m), ref)
    return M, ell, err


def run_convergence(cfg: RunConfig, ref: UniformGrid | None = None
                    ) -> list[tuple[int, float, float, float | None]]:
    """Rows ``(M, ell, l1_error, observed_order)`` in ``M_list`` order."""
    M_list = list(cfg.M_list)
    if any(b <= a for a, b in zip(M_list, M_list[1:])):
        raise ConfigError("M_list must be strictly increasing")
    if cfg.ref_cells < 4 * max(M_list):
        raise ConfigError(f"ref_cells={cfg.ref_cells} must be >= 4 * max(M_list)")
    if ref is None:
        ref = reference_solution(cfg)
    if cfg.jobs > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            results = list(pool.map(converge_case, [cfg] * len(M_list), M_list,
                                    [ref] * len(M_list)))
    else:
        results = [converge_case(cfg, M, ref) for M in M_list]
    rows = []
    for k, (M, ell, err) in enumerate(results):
        order = None
        if k > 0 and err > 0 and results[k - 1][2] > 0:
            order = math.log(results[k - 1][2] / err) / math.log(M / results[k - 1][0])
        rows.append((M, ell, err, order))
    return rows


def godunov_validation(m_list, T: float = 0.5, P: float = 4.0):
    m = greenshields()
    rows = []
    for name, (rl, rr) in RIEMANN_CASES.items():
        for cells in m_list:
            grid = solve(riemann_grid(rl, rr, cells, P), m, T)
            err = l1_error_vs_exact(
                grid, lambda x, rl=rl, rr=rr: periodic_riemann_exact(m, rl, rr, x, T, P)
            )
            rows.append((name, cells, err))
    return rows


def godunov_validation_passes(rows) -> bool:
    """Errors decrease with resolution; the threshold applies at 1024 cells and above."""
    ok = True
    for name in RIEMANN_CASES:
        errs = [(c, e) for n, c, e in rows if n == name]
        errs.sort()
        ok &= all(b[1] < a[1] for a, b in zip(errs, errs[1:]))
        top_cells, top_err = errs[-1]
        if top_cells >= cfgmod.GODUNOV_THRESHOLD_CELLS:
            ok &= top_err < cfgmod.GODUNOV_L1_THRESHOLD
    return bool(ok)


def _resolve_config(args) -> RunConfig:
    cfg = cfgmod.preset(args.preset) if getattr(args, "preset", None) else RunConfig()
    if getattr(args, "config", None):
        cfg = cfgmod.load_config(args.config, cfg)
    overrides = {}
    if getattr(args, "unsafe_dt", False):
        overrides["unsafe_dt"] = True
    if getattr(args, "literal_weights", False):
        overrides["literal_weights"] = True
        overrides["notes"] = cfg.notes + ["literal weights 1/10 on j=0..4, renormalized to 1/5"]
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = args.seed
    if getattr(args, "M_list", None):
        overrides["M_list"] = tuple(args.M_list)
    if getattr(args, "ref_cells", None):
        overrides["ref_cells"] = args.ref_cells
    if getattr(args, "m_list", None):
        overrides["m_list"] = tuple(args.m_list)
    if getattr(args, "jobs", None):
        overrides["jobs"] = args.jobs
    if getattr(args, "out", None):
        overrides["out"] = args.out
    if os.environ.get("FTL_OUT_DIR"):
        overrides["out"] = os.environ["FTL_OUT_DIR"]
    return replace(cfg, **overrides)


def cmd_simulate(args) -> int:
    try:
        cfg = _resolve_config(args)
        cfg.validate()
    except ConfigError as exc:
        log.error("invalid configuration: %s", exc)
        return EXIT_CONFIG
    return run_simulation(cfg, Path(cfg.out))


def cmd_converge(args) -> int:
    try:
        cfg = _resolve_config(args)
        # the finest case carries the tightest step guard
        replace(cfg, M=max(cfg.M_list), target_ell=None).validate()
        ref = reference_solution(cfg)
        rows = run_convergence(cfg, ref)
    except ConfigError as exc:
        log.error("invalid configuration: %s", exc)
        return EXIT_CONFIG
    except (CollisionError, StepSizeError) as exc:
        log.error("%s", exc)
        return EXIT_COLLISION
    out = Path(cfg.out)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["M", "ell", "l1_error", "observed_order"])
    for M, ell, err, order in rows:
        writer.writerow([M, _fmt(ell), _fmt(err), _fmt(order)])
    _write(out / "convergence.csv", buf.getvalue())
    _write(out / "reference.csv", grid_to_csv(ref))
    errs = [r[2] for r in rows]
    monotone = all(b < a for a, b in zip(errs, errs[1:]))
    below = errs[-1] < cfgmod.CONVERGE_L1_THRESHOLD
    write_manifest(out / "run_manifest.txt", cfg, "converge", {
        "l1_threshold": cfgmod.CONVERGE_L1_THRESHOLD,
        "final_l1_error": errs[-1],
        "monotone": str(monotone).lower(),
        "below_threshold": str(below).lower(),
    })
    log.info("convergence: %s", ", ".join(f"M={M}: {e:.4g}" for M, _, e, _ in rows))
    return EXIT_OK


def cmd_godunov_validate(args) -> int:
    try:
        cfg = _resolve_config(args)
    except ConfigError as exc:
        log.error("invalid configuration: %s", exc)
        return EXIT_CONFIG
    rows = godunov_validation(cfg.m_list)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["case", "m", "l1_error"])
    for name, cells, err in rows:
        writer.writerow([name, cells, _fmt(err)])
    _write(Path(cfg.out) / "godunov_validation.csv", buf.getvalue())
    ok = godunov_validation_passes(rows)
    log.info("godunov validation %s", "passed" if ok else "FAILED")
    return EXIT_OK if ok else EXIT_VALIDATION


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nonlocal-ftl", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, presets=True):
        p.add_argument("--config", help="flat key = value config file")
        if presets:
            p.add_argument("--preset", choices=sorted(cfgmod.PRESETS))
        p.add_argument("--out", help="output directory (FTL_OUT_DIR overrides)")
        p.add_argument("--unsafe-dt", action="store_true",
                       help="allow dt up to ell regardless of kappa and Lipschitz constant")
        p.add_argument("--literal-weights", action="store_true",
                       help="use 1/10 on j=0..4 only, renormalized to 1/5")
        p.add_argument("--seed", type=int)

    p_sim = sub.add_parser("simulate", help="run one particle simulation")
    common(p_sim)
    p_sim.set_defaults(func=cmd_simulate)

    p_fig = sub.add_parser("figure1", help="alias for simulate --preset figure1")
    common(p_fig, presets=False)
    p_fig.set_defaults(func=cmd_simulate, preset="figure1")

    p_conv = sub.add_parser("converge", help="L1 distance to the Godunov reference as ell -> 0")
    common(p_conv)
    p_conv.add_argument("--M-list", type=int, nargs="+", dest="M_list")
    p_conv.add_argument("--ref-cells", type=int)
    p_conv.add_argument("--jobs", type=int)
    p_conv.set_defaults(func=cmd_converge)

    p_god = sub.add_parser("godunov-validate", help="Godunov solver vs exact Riemann solutions")
    p_god.add_argument("--m-list", type=int, nargs="+", dest="m_list")
    p_god.add_argument("--out")
    p_god.set_defaults(func=cmd_godunov_validate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
