"""Particles <-> densities.

Initial vehicles are placed so that every vehicle carries exactly ``ell``
units of initial mass. The particle density is the periodic step function
that equals ``ell / gap_i`` between vehicle ``i`` and its leader.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .dynamics import RingState
from .godunov import UniformGrid
from .ring_ops import tv_periodic


class VacuumError(ValueError):
    """Initial profile touches (or certifies) zero density."""


@dataclass(frozen=True)
class InitialProfile:
    """Periodic initial density on ``[0, P)``.

    ``kind="piecewise_constant"`` uses ``breakpoints`` (left ends, first one
    0) and ``values``; ``kind="sinusoid"`` uses
    ``mean + amplitude * sin(2 pi wavenumber x / P)``. ``nu`` is the
    certified lower bound; it defaults to the profile minimum.
    """

    kind: str
    P: float
    breakpoints: tuple[float, ...] = ()
    values: tuple[float, ...] = ()
    mean: float = 0.0
    amplitude: float = 0.0
    wavenumber: int = 1
    nu: float | None = None

    def __post_init__(self):
        if self.kind not in ("piecewise_constant", "sinusoid"):
            raise ValueError(f"unknown profile kind {self.kind!r}")
        if not self.P > 0:
            raise ValueError("period must be positive")
        if self.kind == "piecewise_constant":
            b = np.asarray(self.breakpoints, dtype=float)
            if b.size != len(self.values) or b.size == 0:
                raise ValueError("need one value per breakpoint")
            if b[0] != 0.0 or np.any(np.diff(b) <= 0) or b[-1] >= self.P:
                raise ValueError("breakpoints must start at 0, increase, and stay below P")
            object.__setattr__(self, "breakpoints", tuple(float(x) for x in b))
            object.__setattr__(self, "values", tuple(float(x) for x in self.values))
        lo, hi = self.bounds()
        if self.nu is None:
            object.__setattr__(self, "nu", lo)
        if not self.nu > 0:
            raise VacuumError(f"vacuum excluded: need nu > 0, got {self.nu}")
        if lo < self.nu * (1 - 1e-12):
            raise VacuumError(f"profile minimum {lo:.6g} below certified bound nu={self.nu:.6g}")
        if hi > 1.0 + 1e-12:
            raise ValueError(f"profile maximum {hi:.6g} exceeds jam density 1")

    @classmethod
    def piecewise(cls, breakpoints, values, P, nu=None) -> "InitialProfile":
        return cls("piecewise_constant", P, tuple(breakpoints), tuple(values), nu=nu)

    @classmethod
    def sinusoid(cls, mean, amplitude, P, wavenumber=1, nu=None) -> "InitialProfile":
        return cls("sinusoid", P, mean=mean, amplitude=amplitude,
                   wavenumber=wavenumber, nu=nu)

    def bounds(self) -> tuple[float, float]:
        if self.kind == "piecewise_constant":
            return min(self.values), max(self.values)
        return self.mean - abs(self.amplitude), self.mean + abs(self.amplitude)

    def __call__(self, x):
        x = np.mod(np.asarray(x, dtype=float), self.P)
        if self.kind == "piecewise_constant":
            idx = np.searchsorted(self.breakpoints, x, side="right") - 1
            return np.asarray(self.values)[idx]
        return self.mean + self.amplitude * np.sin(2 * np.pi * self.wavenumber * x / self.P)

    @property
    def mass(self) -> float:
        return float(self.cumulative(self.P))

    @property
    def tv(self) -> float:
        if self.kind == "piecewise_constant":
            return tv_periodic(self.values)
        return 4.0 * abs(self.amplitude) * abs(self.wavenumber)

    def cumulative(self, x):
        """``int_0^x rho0`` for ``x`` in ``[0, P]``."""
        x = np.asarray(x, dtype=float)
        if self.kind == "piecewise_constant":
            b = np.asarray(self.breakpoints + (self.P,))
            vals = np.asarray(self.values)
            at_edges = np.concatenate([[0.0], np.cumsum(vals * np.diff(b))])
            idx = np.clip(np.searchsorted(b, x, side="right") - 1, 0, vals.size - 1)
            return at_edges[idx] + vals[idx] * (x - b[idx])
        k = 2 * np.pi * self.wavenumber / self.P
        return self.mean * x + self.amplitude / k * (1.0 - np.cos(k * x))

    def inverse_cumulative(self, mass) -> np.ndarray:
        mass = np.atleast_1d(np.asarray(mass, dtype=float))
        if self.kind == "piecewise_constant":
            b = np.asarray(self.breakpoints + (self.P,))
            vals = np.asarray(self.values)
            at_edges = np.concatenate([[0.0], np.cumsum(vals * np.diff(b))])
            idx = np.clip(np.searchsorted(at_edges, mass, side="right") - 1, 0, vals.size - 1)
            return b[idx] + (mass - at_edges[idx]) / vals[idx]
        out = np.empty_like(mass)
        for n, target in enumerate(mass):
            if target <= 0:
                out[n] = 0.0
                continue
            out[n] = optimize.brentq(
                lambda x: float(self.cumulative(x)) - target, 0.0, self.P,
                xtol=1e-12 * self.P, rtol=4 * np.finfo(float).eps,
            )
        return out


def figure1_profile() -> InitialProfile:
    """1.0 on ``|x| < 0.5``, 0.05 elsewhere on ``[-2, 2]``, shifted to ``[0, 4)``."""
    return InitialProfile.piecewise([0.0, 1.5, 2.5], [0.05, 1.0, 0.05], P=4.0)


def vehicles_for_ell(mass: float, ell_target: float) -> int:
    """Integer vehicle count closest to ``mass / ell_target``."""
    return max(1, int(round(mass / ell_target)))


def equal_mass_partition(profile: InitialProfile, M: int, N: int = 1) -> tuple[RingState, float]:
    """Place ``M`` vehicles with ``ell = mass / M`` of density between neighbours."""
    if M < N + 2:
        raise ValueError(f"need M >= N + 2 = {N + 2} vehicles for the look-ahead stencil, got {M}")
    ell = profile.mass / M
    targets = ell * np.arange(M)
    x = profile.inverse_cumulative(targets)
    x[0] = 0.0
    if not np.all(np.isfinite(x)) or np.any(np.diff(x) <= 0) or x[-1] >= profile.P:
        raise ArithmeticError("cumulative-mass inversion failed to produce ordered positions")
    return RingState(ell=ell, P=profile.P, x=x), ell


@dataclass(frozen=True)
class StepFunction:
    """Periodic piecewise-constant function.

    ``edges`` are increasing left ends within one period (the first may be
    anywhere); piece ``i`` is ``[edges[i], edges[i+1])`` and the last piece
    wraps to ``edges[0] + P``.
    """

    edges: np.ndarray
    values: np.ndarray
    P: float
    t: float = field(default=0.0)

    def __post_init__(self):
        object.__setattr__(self, "edges", np.asarray(self.edges, dtype=float))
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))
        if self.edges.shape != self.values.shape or self.edges.ndim != 1:
            raise ValueError("edges and values must be 1-D and equal length")

    @property
    def widths(self) -> np.ndarray:
        return np.diff(np.append(self.edges, self.edges[0] + self.P))

    @property
    def mass(self) -> float:
        return float(np.sum(self.values * self.widths))

    @property
    def tv(self) -> float:
        return tv_periodic(self.values)

    def __call__(self, x):
        s = np.mod(np.asarray(x, dtype=float) - self.edges[0], self.P)
        idx = np.searchsorted(self.edges - self.edges[0], s, side="right") - 1
        return self.values[np.clip(idx, 0, self.values.size - 1)]

    def cumulative(self, x):
        """``int_{edges[0]}^{x} f`` for any real ``x`` (periodic extension)."""
        x = np.asarray(x, dtype=float)
        rel = x - self.edges[0]
        turns = np.floor(rel / self.P)
        s = rel - turns * self.P
        starts = self.edges - self.edges[0]
        at_edges = np.concatenate([[0.0], np.cumsum(self.values * self.widths)[:-1]])
        idx = np.clip(np.searchsorted(starts, s, side="right") - 1, 0, self.values.size - 1)
        return turns * self.mass + at_edges[idx] + self.values[idx] * (s - starts[idx])


# Eulerian density of a ring state: breakpoints at the vehicles.
DensityField = StepFunction


def density_field(state: RingState) -> StepFunction:
    return StepFunction(edges=state.x.copy(), values=state.rho, P=state.P, t=state.t)


def lattice_y(state: RingState) -> StepFunction:
    """Spacings on the fixed lattice ``[i/M, (i+1)/M)`` of ``[0, 1)``.

    Cell width is ``1/M`` rather than ``ell``; the two agree only when the
    total mass is 1.
    """
    M = state.M
    return StepFunction(edges=np.arange(M) / M, values=state.y, P=1.0, t=state.t)


def grid_step_function(grid: UniformGrid) -> StepFunction:
    return StepFunction(edges=grid.edges, values=grid.avg, P=grid.P, t=grid.t)


def resample_to_grid(field_: StepFunction, m: int) -> UniformGrid:
    """Exact cell averages on ``m`` uniform cells of ``[0, P)``."""
    if m < 1:
        raise ValueError("need at least one cell")
    nodes = np.arange(m + 1) * (field_.P / m)
    F = field_.cumulative(nodes)
    return UniformGrid(P=field_.P, avg=np.diff(F) / (field_.P / m), t=field_.t)


def _as_step(f) -> StepFunction:
    return grid_step_function(f) if isinstance(f, UniformGrid) else f


def l1_distance_fields(a, b) -> float:
    """``int_0^P |a - b|``, exact on the merged breakpoint set."""
    a, b = _as_step(a), _as_step(b)
    if abs(a.P - b.P) > 1e-12 * max(a.P, b.P):
        raise ValueError(f"period mismatch: {a.P} vs {b.P}")
    P = a.P
    cuts = np.unique(np.concatenate([np.mod(a.edges, P), np.mod(b.edges, P), [0.0, P]]))
    cuts = cuts[cuts <= P]
    mids = 0.5 * (cuts[:-1] + cuts[1:])
    return float(np.sum(np.abs(a(mids) - b(mids)) * np.diff(cuts)))
