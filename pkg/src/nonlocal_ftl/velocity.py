"""Velocity laws, anticipation weights and entropy pairs.

Density ``rho`` lives in [0, 1]; the Lagrangian spacing ``y = 1/rho`` lives
in [1, inf). ``V(y) = v(1/y)`` is the velocity written in spacing form.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate

WEIGHT_SUM_TOL = 1e-12


class ModelError(ValueError):
    """Invalid velocity model, weight profile or argument domain."""


@dataclass(frozen=True)
class VelocityModel:
    name: str
    eval: Callable[[np.ndarray], np.ndarray]
    deriv: Callable[[np.ndarray], np.ndarray]
    lip: float
    # density maximizing rho*v(rho); the flux is unimodal for every model here
    flux_peak: float
    # max |f'| on [0, 1], the CFL speed for the continuum solver
    flux_speed: float = field(default=1.0)

    def __call__(self, rho):
        return self.eval(rho)


def _check_axioms(m: VelocityModel, n_grid: int = 1001) -> VelocityModel:
    if abs(float(m.eval(0.0)) - 1.0) > 1e-12 or abs(float(m.eval(1.0))) > 1e-12:
        raise ModelError(f"{m.name}: need v(0)=1 and v(1)=0")
    grid = np.linspace(0.0, 1.0, n_grid)
    vals = m.eval(grid)
    if np.any(np.diff(vals) > 1e-12):
        raise ModelError(f"{m.name}: velocity must be non-increasing")
    slopes = np.abs(np.diff(vals)) / np.diff(grid)
    if np.any(slopes > m.lip * (1 + 1e-9)):
        raise ModelError(f"{m.name}: Lipschitz constant {m.lip} too small")
    return m


def greenshields() -> VelocityModel:
    return _check_axioms(
        VelocityModel(
            name="greenshields",
            eval=lambda r: 1.0 - np.asarray(r, dtype=float),
            deriv=lambda r: -np.ones_like(np.asarray(r, dtype=float)),
            lip=1.0,
            flux_peak=0.5,
            flux_speed=1.0,
        )
    )


def power_law(p: float) -> VelocityModel:
    """``v(rho) = (1 - rho)**p``; ``p >= 1`` keeps ``v'`` bounded."""
    p = float(p)
    if not p >= 1.0:
        raise ModelError(f"power law exponent must be >= 1, got {p}")

    def v(r):
        return np.power(1.0 - np.asarray(r, dtype=float), p)

    def dv(r):
        return -p * np.power(1.0 - np.asarray(r, dtype=float), p - 1.0)

    grid = np.linspace(0.0, 1.0, 100001)
    fprime = v(grid) + grid * dv(grid)
    name = "greenshields" if p == 1.0 else f"power:{p:g}"
    return _check_axioms(
        VelocityModel(
            name=name,
            eval=v,
            deriv=dv,
            lip=p,
            flux_peak=1.0 / (p + 1.0),
            flux_speed=float(np.max(np.abs(fprime))),
        )
    )


def model_from_name(name: str) -> VelocityModel:
    """Parse ``"greenshields"`` or ``"power:<p>"``."""
    name = name.strip()
    if name == "greenshields":
        return greenshields()
    if name.startswith("power:"):
        try:
            p = float(name.split(":", 1)[1])
        except ValueError as exc:
            raise ModelError(f"bad power-law exponent in {name!r}") from exc
        return power_law(p)
    raise ModelError(f"unknown velocity model {name!r}")


def lagrangian_velocity(m: VelocityModel, y):
    """``V(y) = v(1/y)``, defined for spacings ``y >= 1``."""
    y = np.asarray(y, dtype=float)
    if np.any(y < 1.0):
        raise ModelError("spacing y < 1 means density above jam")
    out = m.eval(1.0 / y)
    return float(out) if out.ndim == 0 else out


def lagrangian_velocity_deriv(m: VelocityModel, y):
    y = np.asarray(y, dtype=float)
    return -m.deriv(1.0 / y) / (y * y)


def flux(m: VelocityModel, rho):
    rho = np.asarray(rho, dtype=float)
    if np.any((rho < 0.0) | (rho > 1.0)):
        raise ModelError("density outside [0, 1]")
    out = rho * m.eval(rho)
    return float(out) if out.ndim == 0 else out


def flux_deriv(m: VelocityModel, rho):
    rho = np.asarray(rho, dtype=float)
    return m.eval(rho) + rho * m.deriv(rho)


@dataclass(frozen=True)
class WeightProfile:
    """Anticipation weights ``c_0..c_N`` and rear-coupling strength ``kappa``.

    ``kappa = 0`` is accepted so that the pure look-ahead experiment can be
    reproduced.
    """

    c: tuple[float, ...]
    kappa: float = 0.0

    def __post_init__(self):
        c = np.asarray(self.c, dtype=float)
        object.__setattr__(self, "c", tuple(float(x) for x in c))
        if c.ndim != 1 or c.size < 2:
            raise ModelError("need weights c_0..c_N with N >= 1")
        if np.any(c < 0):
            raise ModelError("weights must be nonnegative")
        if abs(c.sum() - 1.0) > WEIGHT_SUM_TOL:
            raise ModelError(f"weights must sum to 1 (sum c_j = {c.sum():.17g})")
        if np.any(np.diff(c[:-1]) > 0):
            raise ModelError("weights must be non-increasing: c_0 >= ... >= c_{N-1}")
        if c[-1] != 0.0:
            raise ModelError("last weight c_N must be exactly 0")
        if not self.kappa >= 0:
            raise ModelError(f"kappa must be >= 0, got {self.kappa}")

    @property
    def N(self) -> int:
        return len(self.c) - 1

    @classmethod
    def uniform(cls, n: int, kappa: float = 0.0) -> "WeightProfile":
        """``c_j = 1/n`` for ``j < n``, ``c_n = 0``."""
        if n < 1:
            raise ModelError("uniform weights need n >= 1")
        return cls(tuple([1.0 / n] * n + [0.0]), kappa)


@dataclass(frozen=True)
class EntropyPair:
    name: str
    eta: Callable
    eta_prime: Callable
    flux_eulerian: Callable
    flux_lagrangian: Callable
    # location of a kink or steep layer, passed to quadrature as a breakpoint
    center: float | None = None


def kruzkov_pair(m: VelocityModel, k: float) -> EntropyPair:
    """``eta(s) = |s - k|`` with closed-form Eulerian and Lagrangian fluxes.

    ``k`` is read as a density when ``q`` is evaluated and as a spacing when
    ``Q`` is evaluated.
    """
    k = float(k)

    def q(rho):
        return np.sign(np.asarray(rho) - k) * (flux(m, rho) - flux(m, k))

    def Q(y):
        return np.sign(np.asarray(y) - k) * (
            lagrangian_velocity(m, y) - lagrangian_velocity(m, k)
        )

    return EntropyPair(
        name=f"kruzkov_{k:g}",
        eta=lambda s: np.abs(np.asarray(s, dtype=float) - k),
        eta_prime=lambda s: np.sign(np.asarray(s, dtype=float) - k),
        flux_eulerian=q,
        flux_lagrangian=Q,
        center=k,
    )


def _quad_flux(integrand, lo: float):
    def F(x):
        x_arr = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.array([integrate.quad(integrand, lo, xi, limit=200)[0] for xi in x_arr])
        return float(out[0]) if np.ndim(x) == 0 else out

    return F


def quadratic_pair(m: VelocityModel) -> EntropyPair:
    """``eta(s) = s**2``; fluxes by quadrature from 0 (Eulerian) and 1 (Lagrangian)."""
    return EntropyPair(
        name="square",
        eta=lambda s: np.square(np.asarray(s, dtype=float)),
        eta_prime=lambda s: 2.0 * np.asarray(s, dtype=float),
        flux_eulerian=_quad_flux(lambda r: 2 * r * flux_deriv(m, r), 0.0),
        flux_lagrangian=_quad_flux(lambda y: 2 * y * lagrangian_velocity_deriv(m, y), 1.0),
    )


def smoothed_kruzkov_pair(m: VelocityModel, k: float, width: float = 1e-3) -> EntropyPair:
    """C-infinity convex stand-in for ``|s - k|``: ``sqrt((s-k)**2 + width**2)``."""
    k = float(k)

    def eta(s):
        d = np.asarray(s, dtype=float) - k
        return np.sqrt(d * d + width * width)

    def eta_prime(s):
        d = np.asarray(s, dtype=float) - k
        return d / np.sqrt(d * d + width * width)

    return EntropyPair(
        name=f"smooth_kruzkov_{k:g}",
        eta=eta,
        eta_prime=eta_prime,
        flux_eulerian=_quad_flux(lambda r: eta_prime(r) * flux_deriv(m, r), 0.0),
        flux_lagrangian=_quad_flux(
            lambda y: eta_prime(y) * lagrangian_velocity_deriv(m, y), 1.0
        ),
        center=k,
    )


def dissipation_H(pair: EntropyPair, m: VelocityModel, a: float, b: float) -> float:
    """``int_a^b (eta'(s) - eta'(a)) V'(s) ds``; nonnegative for convex eta.

    ``pair`` should be smooth (square or smoothed Kruzkov) for the quadrature
    to converge quickly.
    """
    a, b = float(a), float(b)
    if a < 1.0 or b < 1.0:
        raise ModelError("dissipation kernel arguments must be spacings >= 1")
    if a == b:
        return 0.0
    ea = float(pair.eta_prime(a))

    def integrand(s):
        return (float(pair.eta_prime(s)) - ea) * float(lagrangian_velocity_deriv(m, s))

    lo, hi = min(a, b), max(a, b)
    points = [pair.center] if pair.center is not None and lo < pair.center < hi else None
    val, _ = integrate.quad(
        integrand, a, b, points=points, limit=400, epsabs=1e-13, epsrel=1e-12
    )
    return float(val)
