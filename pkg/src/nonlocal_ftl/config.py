"""Run configuration: flat ``key = value`` files, presets and validation.

See ``docs/config.md`` for the key reference.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from .dynamics import max_stable_dt
from .eulerian import InitialProfile, figure1_profile, vehicles_for_ell
from .velocity import ModelError, VelocityModel, WeightProfile, model_from_name


class ConfigError(ValueError):
    pass


# Five-term variant of the look-ahead weights: 1/10 on j = 0..4 only.
LITERAL_FIGURE1_WEIGHTS = (0.1,) * 5 + (0.0,) * 6

# Frozen after one calibration run against the 4096-cell Godunov reference
# (measured final distances 0.026 smooth, 0.035 step profile at M = 1024).
CONVERGE_L1_THRESHOLD = 0.05
GODUNOV_L1_THRESHOLD = 0.02
GODUNOV_THRESHOLD_CELLS = 1024


@dataclass
class RunConfig:
    model: str = "greenshields"
    weights: str = "uniform:1"
    kappa: float = 0.0
    profile: str = "sinusoid"
    P: float = 4.0
    breakpoints: tuple[float, ...] = ()
    values: tuple[float, ...] = ()
    mean: float = 0.5
    amplitude: float = 0.3
    wavenumber: int = 1
    nu: float | None = None
    M: int | None = None
    target_ell: float | None = None
    scheme: str = "euler"
    dt: str = "max"
    T: float = 1.0
    samples: int = 11
    out: str = "out"
    seed: int = 0
    unsafe_dt: bool = False
    literal_weights: bool = False
    M_list: tuple[int, ...] = (64, 128, 256, 512, 1024)
    ref_cells: int = 4096
    m_list: tuple[int, ...] = (128, 256, 512, 1024)
    jobs: int = 1
    notes: list[str] = field(default_factory=list)

    # -- derived objects -------------------------------------------------
    def velocity_model(self) -> VelocityModel:
        return model_from_name(self.model)

    def weight_profile(self) -> WeightProfile:
        if self.literal_weights:
            c = np.asarray(LITERAL_FIGURE1_WEIGHTS)
            return WeightProfile(tuple(c / c.sum()), self.kappa)
        rule = self.weights.strip()
        if rule.startswith("uniform:"):
            return WeightProfile.uniform(int(rule.split(":", 1)[1]), self.kappa)
        return WeightProfile(tuple(float(s) for s in rule.split(",")), self.kappa)

    def initial_profile(self) -> InitialProfile:
        if self.profile == "figure1":
            return figure1_profile()
        if self.profile == "piecewise":
            return InitialProfile.piecewise(self.breakpoints, self.values, self.P, self.nu)
        if self.profile == "sinusoid":
            return InitialProfile.sinusoid(self.mean, self.amplitude, self.P,
                                           self.wavenumber, self.nu)
        if self.profile == "random":
            return random_profile(np.random.default_rng(self.seed), self.P)
        raise ConfigError(f"unknown profile {self.profile!r}")

    def vehicle_count(self, profile: InitialProfile) -> int:
        if self.M is not None:
            return int(self.M)
        if self.target_ell is not None:
            return vehicles_for_ell(profile.mass, self.target_ell)
        raise ConfigError("need either M or target_ell")

    def time_step(self, ell: float, w: WeightProfile, m: VelocityModel) -> float:
        """``dt`` is ``max``, ``<k>ell`` (a multiple of ell) or an absolute number."""
        rule = self.dt.strip()
        if rule == "max":
            return ell if self.unsafe_dt else max_stable_dt(ell, w, m)
        if rule.endswith("ell"):
            factor = rule[:-3].strip()
            return (float(factor) if factor else 1.0) * ell
        return float(rule)

    def validate(self) -> None:
        """Raise :class:`ConfigError` naming the violated invariant."""
        try:
            m = self.velocity_model()
            w = self.weight_profile()
            prof = self.initial_profile()
        except (ModelError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc
        if self.scheme not in ("euler", "rk4"):
            raise ConfigError(f"scheme must be euler or rk4, got {self.scheme!r}")
        if self.T < 0:
            raise ConfigError("T must be nonnegative")
        M = self.vehicle_count(prof)
        if M < w.N + 2:
            raise ConfigError(f"need M >= N + 2 = {w.N + 2} vehicles, got {M}")
        ell = prof.mass / M
        dt = self.time_step(ell, w, m)
        limit = ell if self.unsafe_dt else max_stable_dt(ell, w, m)
        if not 0 < dt <= limit * (1 + 1e-12):
            raise ConfigError(
                f"step guard violated: dt={dt:.6g} > {limit:.6g} "
                "(set unsafe_dt to use the literal dt <= ell rule)"
            )


def random_profile(rng: np.random.Generator, P: float = 4.0, max_pieces: int = 8,
                   nu: float = 0.1) -> InitialProfile:
    """Random piecewise-constant profile with values in ``[nu, 1]``."""
    k = int(rng.integers(2, max_pieces + 1))
    cuts = np.sort(rng.uniform(0.0, P, k - 1))
    return InitialProfile.piecewise(np.concatenate([[0.0], cuts]),
                                    rng.uniform(nu, 1.0, k), P, nu=nu)


PRESETS: dict[str, dict] = {
    "figure1": dict(
        weights="uniform:10", kappa=0.0, profile="figure1", target_ell=1 / 45,
        scheme="euler", dt="1ell", T=4.0, samples=0,
        notes=[
            "weights: c_j = 1/10 for j = 0..4 sums to 0.5; using c_j = 1/10 "
            "for j = 0..9, c_10 = 0 so that the weights sum to 1",
            "M = round(1.15 / (1/45)) = 52 because ell * M must equal the mass 1.15",
        ],
    ),
    "uniform-steady": dict(
        weights="uniform:3", kappa=0.5, profile="piecewise", breakpoints=(0.0,),
        values=(0.4,), P=4.0, M=40, scheme="euler", dt="max", T=2.0, samples=11,
    ),
    "smooth": dict(
        weights="uniform:10", kappa=0.0, profile="sinusoid", mean=0.5, amplitude=0.3,
        P=4.0, M=256, scheme="euler", dt="1ell", T=1.0, samples=11,
    ),
    "random": dict(
        weights="uniform:4", kappa=0.5, profile="random", M=60, scheme="rk4",
        dt="0.1ell", T=2.0, samples=21,
    ),
    "n1-tvd": dict(
        weights="uniform:1", kappa=0.5, profile="figure1", M=52, scheme="rk4",
        dt="0.1ell", T=2.0, samples=0,
    ),
}


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _coerce(key: str, raw: str):
    kind = _FIELD_TYPES[key]
    raw = raw.strip()
    if kind in ("float", "float | None"):
        return None if raw.lower() in ("", "none") else float(raw)
    if kind in ("int", "int | None"):
        return None if raw.lower() in ("", "none") else int(raw)
    if kind == "bool":
        if raw.lower() in ("1", "true", "yes", "on"):
            return True
        if raw.lower() in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"{key}: expected a boolean, got {raw!r}")
    if kind == "tuple[float, ...]":
        return tuple(float(s) for s in raw.split(",") if s.strip())
    if kind == "tuple[int, ...]":
        return tuple(int(s) for s in raw.split(",") if s.strip())
    if kind == "list[str]":
        return [raw]
    return raw


def parse_config_text(text: str, base: RunConfig | None = None) -> RunConfig:
    cfg = base if base is not None else RunConfig()
    updates = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, raw = (s.strip() for s in line.split("=", 1))
        if key not in _FIELD_TYPES or key == "notes":
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        try:
            updates[key] = _coerce(key, raw)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: {key}: {exc}") from exc
    return replace(cfg, **updates)


def load_config(path: str | Path, base: RunConfig | None = None) -> RunConfig:
    return parse_config_text(Path(path).read_text(), base)


def preset(name: str) -> RunConfig:
    try:
        values = PRESETS[name]
    except KeyError:
        raise ConfigError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
    return replace(RunConfig(), **{k: (list(v) if k == "notes" else v) for k, v in values.items()})
