"""Per-snapshot diagnostics: variation, entropy, extremes, gaps, L1 to a reference."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dynamics import RingState, Trajectory, speeds
from .eulerian import density_field, l1_distance_fields, resample_to_grid
from .godunov import UniformGrid
from .ring_ops import tv_periodic
from .velocity import EntropyPair, VelocityModel, WeightProfile, kruzkov_pair, quadratic_pair

DEFAULT_KRUZKOV_LEVELS = (1.25, 1.5, 2.0, 3.0, 5.0)


class UsageError(ValueError):
    pass


def default_entropies(m: VelocityModel) -> list[EntropyPair]:
    """``s**2`` plus Kruzkov entropies at several spacing levels."""
    return [quadratic_pair(m)] + [kruzkov_pair(m, k) for k in DEFAULT_KRUZKOV_LEVELS]


@dataclass(frozen=True)
class DiagnosticsRecord:
    t: float
    tv_rho: float
    tv_y: float
    entropy: tuple[float, ...]
    rho_min: float
    rho_max: float
    gap_min_over_ell: float
    speed_min: float
    l1_vs_ref: float | None = None


def record(state: RingState, w: WeightProfile, m: VelocityModel,
           entropies: Sequence[EntropyPair], ref: UniformGrid | None = None) -> DiagnosticsRecord:
    rho, y = state.rho, state.y
    l1 = None
    if ref is not None:
        l1 = l1_distance_fields(resample_to_grid(density_field(state), ref.m), ref)
    return DiagnosticsRecord(
        t=float(state.t),
        tv_rho=tv_periodic(rho),
        tv_y=tv_periodic(y),
        entropy=tuple(float(state.ell * np.sum(e.eta(y))) for e in entropies),
        rho_min=float(np.min(rho)),
        rho_max=float(np.max(rho)),
        gap_min_over_ell=float(np.min(state.gaps) / state.ell),
        speed_min=float(np.min(speeds(state, w, m))),
        l1_vs_ref=l1,
    )


def record_trajectory(traj: Trajectory, w: WeightProfile, m: VelocityModel,
                      entropies: Sequence[EntropyPair]) -> list[DiagnosticsRecord]:
    return [record(s, w, m, entropies) for s in traj.snapshots]


def _first_increase(values: np.ndarray, times: np.ndarray, tol: float):
    jumps = np.diff(values)
    bad = np.flatnonzero(jumps > tol)
    if bad.size == 0:
        return None
    i = int(bad[0])
    return float(times[i + 1]), float(jumps[i]), i + 1


def tvd_check_n1(traj: Trajectory, w: WeightProfile, tol: float = 1e-6):
    """``(ok, first_violation_time)``: is TV(rho) non-increasing up to ``tol``?

    Only meaningful for the nearest-neighbour model (N = 1).
    """
    if w.N != 1:
        raise UsageError(f"the TVD property is only claimed for N = 1, trajectory has N = {w.N}")
    tv = np.array([tv_periodic(s.rho) for s in traj.snapshots])
    hit = _first_increase(tv, traj.times, tol)
    return (hit is None, None if hit is None else hit[0])


def tv_blowup_check(traj: Trajectory, tol: float = 1e-9):
    """``(max_t TV(rho), exceeds_initial)``."""
    tv = np.array([tv_periodic(s.rho) for s in traj.snapshots])
    return float(tv.max()), bool(tv.max() > tv[0] + tol)


def monotone_violations(records: Sequence[DiagnosticsRecord], names: Sequence[str],
                        tol: float = 1e-6) -> list[str]:
    """Describe every entropy series that increases by more than ``tol``."""
    times = np.array([r.t for r in records])
    series = np.array([r.entropy for r in records])
    out = []
    for j, name in enumerate(names):
        hit = _first_increase(series[:, j], times, tol)
        if hit is not None:
            out.append(f"entropy {name} increased by {hit[1]:.3e} at sample {hit[2]}, t={hit[0]:.6g}")
    return out


def _fmt(x) -> str:
    return "" if x is None else format(float(x), ".17g")


def records_to_csv(records: Sequence[DiagnosticsRecord], entropy_names: Sequence[str]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(
        ["t", "tv_rho", "tv_y"]
        + [f"entropy_{n}" for n in entropy_names]
        + ["rho_min", "rho_max", "gap_min_over_ell", "speed_min", "l1_vs_ref"]
    )
    for r in records:
        writer.writerow(
            [_fmt(r.t), _fmt(r.tv_rho), _fmt(r.tv_y)]
            + [_fmt(e) for e in r.entropy]
            + [_fmt(r.rho_min), _fmt(r.rho_max), _fmt(r.gap_min_over_ell),
               _fmt(r.speed_min), _fmt(r.l1_vs_ref)]
        )
    return buf.getvalue()
