"""Non-local Follow-the-Leader dynamics on a periodic ring.

Vehicle ``i`` moves with speed ``bar(v)_i + kappa * (v_i - v_{i-1})`` where
``v_i = v(ell / gap_i)`` and ``gap_i = x_{i+1} - x_i`` (the last gap wraps
around the ring of length ``P``). Spacings ``y_i = gap_i / ell`` and
densities ``rho_i = 1 / y_i`` are derived views of the same state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from .ring_ops import bar, delta_minus, delta_plus
from .velocity import VelocityModel, WeightProfile, lagrangian_velocity

# Floating-point slack on the no-overlap test. A car sitting bumper to bumper
# in a jam has gap == ell mathematically; rounding in the position update can
# leave it a few ulps (of the position magnitude, not of ell) short.
GAP_RTOL = 1e-12
GAP_ULPS = 16


class CollisionError(RuntimeError):
    def __init__(self, msg: str, index: int | None = None, step: int | None = None,
                 t: float | None = None):
        super().__init__(msg)
        self.index = index
        self.step = step
        self.t = t


class StepSizeError(ValueError):
    """Time step exceeds the collision-avoidance bound."""


@dataclass(frozen=True)
class RingState:
    ell: float
    P: float
    x: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        object.__setattr__(self, "x", x)
        if x.ndim != 1 or x.size < 1:
            raise ValueError("positions must be a non-empty 1-D array")
        if not (self.ell > 0 and self.P > 0):
            raise ValueError("ell and P must be positive")
        if x.size * self.ell > self.P * (1 + GAP_RTOL):
            raise ValueError(f"{x.size} vehicles of length {self.ell} do not fit on ring P={self.P}")
        if x.size > 1 and np.any(np.diff(x) <= 0):
            raise ValueError("positions must be strictly increasing")
        if x[-1] - x[0] >= self.P:
            raise ValueError("positions must lie within one period")

    @property
    def M(self) -> int:
        return self.x.size

    @property
    def gaps(self) -> np.ndarray:
        return np.diff(np.append(self.x, self.x[0] + self.P))

    @property
    def y(self) -> np.ndarray:
        return self.gaps / self.ell

    @property
    def rho(self) -> np.ndarray:
        return self.ell / self.gaps

    @classmethod
    def from_gaps(cls, gaps, ell: float, x0: float = 0.0, t: float = 0.0) -> "RingState":
        gaps = np.asarray(gaps, dtype=float)
        x = x0 + np.concatenate([[0.0], np.cumsum(gaps[:-1])])
        return cls(ell=ell, P=float(np.sum(gaps)), x=x, t=t)


def gap_slack(ell: float, scale: float = 0.0) -> float:
    """Allowed shortfall below ``ell`` for positions of magnitude ``scale``."""
    return GAP_RTOL * ell + GAP_ULPS * np.finfo(float).eps * scale


def check_gaps(gaps: np.ndarray, ell: float, scale: float = 0.0) -> None:
    bad = np.flatnonzero(gaps < ell - gap_slack(ell, scale))
    if bad.size:
        i = int(bad[np.argmin(gaps[bad])])
        raise CollisionError(
            f"collision: gap {i} is {gaps[i]:.17g} < ell={ell:.17g}", index=i
        )


def vehicle_velocities(gaps: np.ndarray, ell: float, m: VelocityModel) -> np.ndarray:
    """``v_i = v(ell / gap_i)``; rounding just past jam density is clipped."""
    return m.eval(np.minimum(ell / gaps, 1.0))


def speeds_from_gaps(gaps: np.ndarray, ell: float, w: WeightProfile,
                     m: VelocityModel, scale: float = 0.0) -> np.ndarray:
    check_gaps(gaps, ell, scale)
    v = vehicle_velocities(gaps, ell, m)
    out = bar(v, w)
    if w.kappa:
        out = out + w.kappa * delta_minus(v)
    return out


def position_scale(state: RingState) -> float:
    return float(np.max(np.abs(state.x))) + state.P


def speeds(state: RingState, w: WeightProfile, m: VelocityModel) -> np.ndarray:
    return speeds_from_gaps(state.gaps, state.ell, w, m, position_scale(state))


def rhs_y_from_spacings(y: np.ndarray, ell: float, w: WeightProfile,
                        m: VelocityModel) -> np.ndarray:
    """``dy/dt = (D+ bar(V) + kappa D+ D- V) / ell`` for spacings ``y``."""
    y = np.asarray(y, dtype=float)
    check_gaps(y, 1.0, float(np.sum(y)))
    V = lagrangian_velocity(m, np.maximum(y, 1.0))
    V = np.atleast_1d(V)
    out = delta_plus(bar(V, w))
    if w.kappa:
        out = out + w.kappa * delta_plus(delta_minus(V))
    return out / ell


def rhs_y(state: RingState, w: WeightProfile, m: VelocityModel) -> np.ndarray:
    return rhs_y_from_spacings(state.y, state.ell, w, m)


def rhs_rho(state: RingState, w: WeightProfile, m: VelocityModel) -> np.ndarray:
    """Density form ``-rho_i**2 (D+ bar(v) + kappa D+ D- v)_i / ell``."""
    gaps = state.gaps
    check_gaps(gaps, state.ell, position_scale(state))
    v = vehicle_velocities(gaps, state.ell, m)
    drive = delta_plus(bar(v, w))
    if w.kappa:
        drive = drive + w.kappa * delta_plus(delta_minus(v))
    rho = state.ell / gaps
    return -rho * rho * drive / state.ell


def max_stable_dt(ell: float, w: WeightProfile, m: VelocityModel) -> float:
    """Largest explicit step that cannot close a gap below ``ell``."""
    return ell / ((1.0 + 2.0 * w.kappa) * m.lip)


def _check_dt(state: RingState, w, m, dt: float, unsafe_dt: bool) -> None:
    if not dt > 0:
        raise StepSizeError(f"time step must be positive, got {dt}")
    if unsafe_dt:
        # the literal rule dt <= ell, without the kappa / Lipschitz tightening
        limit = state.ell
    else:
        limit = max_stable_dt(state.ell, w, m)
    if dt > limit * (1 + 1e-12):
        raise StepSizeError(
            f"dt={dt:.6g} exceeds collision-free bound {limit:.6g} "
            f"(ell={state.ell:.6g}, kappa={w.kappa:g}, lip={m.lip:g})"
        )


def _advance(state: RingState, x_new: np.ndarray, dt: float) -> RingState:
    gaps = np.diff(np.append(x_new, x_new[0] + state.P))
    check_gaps(gaps, state.ell, float(np.max(np.abs(x_new))) + state.P)
    return RingState(ell=state.ell, P=state.P, x=x_new, t=state.t + dt)


def euler_step(state: RingState, w: WeightProfile, m: VelocityModel, dt: float,
               unsafe_dt: bool = False) -> RingState:
    _check_dt(state, w, m, dt, unsafe_dt)
    return _advance(state, state.x + dt * speeds(state, w, m), dt)


def rk4_step(state: RingState, w: WeightProfile, m: VelocityModel, dt: float,
             unsafe_dt: bool = False) -> RingState:
    _check_dt(state, w, m, dt, unsafe_dt)
    ell, P = state.ell, state.P

    def f(x):
        scale = float(np.max(np.abs(x))) + P
        return speeds_from_gaps(np.diff(np.append(x, x[0] + P)), ell, w, m, scale)

    x = state.x
    k1 = f(x)
    k2 = f(x + 0.5 * dt * k1)
    k3 = f(x + 0.5 * dt * k2)
    k4 = f(x + dt * k3)
    return _advance(state, x + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4), dt)


SCHEMES: dict[str, Callable] = {"euler": euler_step, "rk4": rk4_step}


@dataclass
class Trajectory:
    """Snapshots at the requested times plus a per-step log."""

    snapshots: list[RingState]
    final: RingState
    step_times: list[float] = field(default_factory=list)
    min_speed: list[float] = field(default_factory=list)
    min_gap_over_ell: list[float] = field(default_factory=list)
    gap_sum_error: list[float] = field(default_factory=list)

    @property
    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.snapshots])


def simulate(init: RingState, w: WeightProfile, m: VelocityModel, scheme: str,
             dt: float, T: float, sample_times: Sequence[float] | None = None,
             unsafe_dt: bool = False) -> Trajectory:
    """Integrate from ``init.t`` to ``init.t + T``.

    Steps are shortened (never lengthened) so that every sample time is hit
    exactly. Errors raised by a step carry the step index and time.
    """
    try:
        step = SCHEMES[scheme]
    except KeyError:
        raise ValueError(f"unknown scheme {scheme!r}; expected one of {sorted(SCHEMES)}") from None
    if T < 0:
        raise ValueError("horizon T must be nonnegative")
    t0, t_end = init.t, init.t + T
    if sample_times is None:
        sample_times = [t0, t_end]
    samples = [float(s) for s in sample_times]
    if samples != sorted(samples):
        raise ValueError("sample_times must be sorted")
    if samples and (samples[0] < t0 - 1e-12 or samples[-1] > t_end + 1e-12):
        raise ValueError("sample_times must lie within [init.t, init.t + T]")
    _check_dt(init, w, m, dt, unsafe_dt)

    targets = sorted(set(samples) | {t_end})
    traj = Trajectory(snapshots=[], final=init)
    state = init
    n_step = 0
    sample_iter = iter(samples)
    next_sample = next(sample_iter, None)

    def take_samples(st: RingState):
        nonlocal next_sample
        while next_sample is not None and abs(next_sample - st.t) <= 1e-12 * max(1.0, abs(st.t)):
            traj.snapshots.append(replace(st, t=next_sample))
            next_sample = next(sample_iter, None)

    take_samples(state)
    for target in targets:
        span = target - state.t
        if span <= 1e-12 * max(1.0, abs(target)):
            continue
        n_sub = max(1, math.ceil(span / dt - 1e-9))
        for k in range(n_sub):
            h = dt if k < n_sub - 1 else span - (n_sub - 1) * dt
            try:
                traj.min_speed.append(float(np.min(speeds(state, w, m))))
                new = step(state, w, m, h, unsafe_dt=unsafe_dt)
            except (CollisionError, StepSizeError) as exc:
                msg = f"step {n_step} at t={state.t:.6g}: {exc}"
                if isinstance(exc, CollisionError):
                    raise CollisionError(msg, index=exc.index, step=n_step, t=state.t) from exc
                raise StepSizeError(msg) from exc
            state = new
            n_step += 1
            g = state.gaps
            traj.step_times.append(state.t)
            traj.min_gap_over_ell.append(float(np.min(g) / state.ell))
            traj.gap_sum_error.append(float(abs(np.sum(g) - state.P)))
        # pin the clock to the target so sample times match bit for bit
        state = replace(state, t=target)
        take_samples(state)
    traj.final = state
    return traj
