"""Physical parameters, damping profiles, grids and the beam energy.

The beam is the Timoshenko system

    rho u_tt  = K (u_x - v)_x
    I_rho v_tt = EI v_xx + K (u_x - v) - b(x) v_t

on ``(0, l)`` with homogeneous Dirichlet conditions on ``u`` and ``v``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


class ConfigError(ValueError):
    """Invalid or incomplete configuration."""


class DimensionError(ValueError):
    """Grid functions of incompatible length."""


@dataclass(frozen=True)
class BeamParams:
    """Constant physical coefficients of the beam."""

    rho: float
    K: float
    I_rho: float
    EI: float
    l: float

    def __post_init__(self):
        for name in ("rho", "K", "I_rho", "EI", "l"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise ConfigError(f"{name} must be a finite positive number, got {value!r}")

    @property
    def c1(self) -> float:
        """Shear wave speed sqrt(K/rho)."""
        return math.sqrt(self.K / self.rho)

    @property
    def c2(self) -> float:
        """Bending wave speed sqrt(EI/I_rho)."""
        return math.sqrt(self.EI / self.I_rho)

    @property
    def distinct_speeds(self) -> bool:
        return not math.isclose(self.K / self.rho, self.EI / self.I_rho, rel_tol=1e-12, abs_tol=0.0)


@dataclass(frozen=True)
class DampingProfile:
    """Nonnegative damping coefficient b(x) on [0, l].

    Use the constructors :meth:`zero`, :meth:`constant`, :meth:`localized` and
    :meth:`tabulated`. ``Localized`` means ``b = value`` on the closed interval
    ``[b0, b1]`` and zero elsewhere; ``Tabulated`` samples are taken at equispaced
    points of ``[0, l]`` and linearly interpolated.
    """

    kind: str
    value: float = 0.0
    b0: float = 0.0
    b1: float = 0.0
    samples: tuple[float, ...] = field(default=())

    def __post_init__(self):
        if self.kind not in ("zero", "constant", "localized", "tabulated"):
            raise ConfigError(f"unknown damping kind {self.kind!r}")
        if self.kind == "constant" and not self.value >= 0:
            raise ConfigError("constant damping must be >= 0")
        if self.kind == "localized":
            if not self.value > 0:
                raise ConfigError("localized damping value must be > 0")
            if not (0 <= self.b0 < self.b1):
                raise ConfigError(f"localized damping needs 0 <= b0 < b1, got b0={self.b0}, b1={self.b1}")
        if self.kind == "tabulated":
            if len(self.samples) < 2:
                raise ConfigError("tabulated damping needs at least two samples")
            if min(self.samples) < 0 or not all(math.isfinite(s) for s in self.samples):
                raise ConfigError("tabulated damping samples must be finite and >= 0")

    @classmethod
    def zero(cls) -> DampingProfile:
        return cls("zero")

    @classmethod
    def constant(cls, value: float) -> DampingProfile:
        return cls("constant", value=float(value))

    @classmethod
    def localized(cls, value: float, b0: float, b1: float) -> DampingProfile:
        return cls("localized", value=float(value), b0=float(b0), b1=float(b1))

    @classmethod
    def tabulated(cls, samples) -> DampingProfile:
        return cls("tabulated", samples=tuple(float(s) for s in samples))

    def __call__(self, x, l: float) -> np.ndarray:
        """Evaluate b at positions ``x`` of a beam of length ``l``."""
        x = np.asarray(x, dtype=float)
        if self.kind == "zero":
            return np.zeros_like(x)
        if self.kind == "constant":
            return np.full_like(x, self.value)
        if self.kind == "localized":
            if self.b1 > l * (1 + 1e-12):
                raise ConfigError(f"damping interval end b1={self.b1} exceeds beam length {l}")
            return np.where((x >= self.b0) & (x <= self.b1), self.value, 0.0)
        s = np.asarray(self.samples)
        return np.interp(x, np.linspace(0.0, l, s.size), s)

    def integral(self, l: float) -> float:
        """Exact integral of b over [0, l]."""
        if self.kind == "zero":
            return 0.0
        if self.kind == "constant":
            return self.value * l
        if self.kind == "localized":
            return self.value * (min(self.b1, l) - self.b0)
        s = np.asarray(self.samples)
        return float(np.sum(0.5 * (s[1:] + s[:-1])) * l / (s.size - 1))

    def is_zero(self) -> bool:
        if self.kind == "zero":
            return True
        if self.kind == "constant":
            return self.value == 0.0
        if self.kind == "tabulated":
            return max(self.samples) == 0.0
        return False


@dataclass(frozen=True)
class Grid:
    """Uniform grid with ``n`` cells on [0, l]; nodes ``x_j = j h``."""

    n: int
    l: float

    def __post_init__(self):
        if not (isinstance(self.n, (int, np.integer)) and self.n >= 1):
            raise ConfigError(f"cell count must be a positive integer, got {self.n!r}")
        if not self.l > 0:
            raise ConfigError("grid length must be positive")

    @property
    def h(self) -> float:
        return self.l / self.n

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(0.0, self.l, self.n + 1)

    @property
    def midpoints(self) -> np.ndarray:
        return (np.arange(self.n) + 0.5) * self.h

    def require_simulation_size(self):
        if self.n < 8:
            raise ConfigError(f"simulations and eigensolves need n >= 8, got n={self.n}")


def trapezoid(f: np.ndarray, h: float) -> complex | float:
    """Composite trapezoid rule for nodal values with spacing ``h``."""
    f = np.asarray(f)
    return h * (f.sum() - 0.5 * (f[0] + f[-1]))


def cell_diff(f: np.ndarray, h: float) -> np.ndarray:
    """Forward difference of nodal values, located at cell midpoints."""
    return np.diff(f) / h


def cell_avg(f: np.ndarray) -> np.ndarray:
    return 0.5 * (f[1:] + f[:-1])


@dataclass(frozen=True, eq=False)
class SecondOrderState:
    """Nodal state ``(u, u2, v, v2)`` in the energy space.

    ``u`` and ``v`` must vanish at both ends. ``u2`` and ``v2`` are the velocity
    components; they vanish at the ends only for states in the generator domain.
    """

    grid: Grid
    u: np.ndarray
    u2: np.ndarray
    v: np.ndarray
    v2: np.ndarray

    def __post_init__(self):
        size = self.grid.n + 1
        arrays = {}
        for name in ("u", "u2", "v", "v2"):
            a = np.asarray(getattr(self, name))
            if a.ndim != 1 or a.size != size:
                raise DimensionError(f"{name} has shape {a.shape}, expected ({size},)")
            a = a.astype(complex if np.iscomplexobj(a) else float, copy=True)
            a.setflags(write=False)
            arrays[name] = a
        for name in ("u", "v"):
            a = arrays[name]
            scale = max(1.0, float(np.max(np.abs(a))))
            if abs(a[0]) > 1e-12 * scale or abs(a[-1]) > 1e-12 * scale:
                raise ValueError(f"{name} violates the Dirichlet condition: {name}(0)={a[0]}, {name}(l)={a[-1]}")
        for name, a in arrays.items():
            object.__setattr__(self, name, a)

    @classmethod
    def zeros(cls, grid: Grid) -> SecondOrderState:
        z = np.zeros(grid.n + 1)
        return cls(grid, z, z, z, z)

    @classmethod
    def mode(cls, grid: Grid, k: int = 1) -> SecondOrderState:
        """``u = sin(k pi x / l)``, other components zero."""
        x = grid.nodes
        u = np.sin(k * np.pi * x / grid.l)
        u[0] = u[-1] = 0.0
        z = np.zeros_like(x)
        return cls(grid, u, z, z, z)

    @property
    def is_complex(self) -> bool:
        return np.iscomplexobj(self.u)

    def stack(self) -> np.ndarray:
        return np.stack([self.u, self.u2, self.v, self.v2])

    def __mul__(self, alpha) -> SecondOrderState:
        return SecondOrderState(self.grid, alpha * self.u, alpha * self.u2, alpha * self.v, alpha * self.v2)

    __rmul__ = __mul__


def energy_norm(state: SecondOrderState, params: BeamParams) -> float:
    """Discrete physical energy of a state.

    ``E = 1/2 [rho |u2|^2 + I_rho |v2|^2]`` integrated by the trapezoid rule on the
    nodes, plus ``1/2 [K |u_x - v|^2 + EI |v_x|^2]`` with ``u_x``, ``v_x`` forward
    differences and ``v`` averaged to cell midpoints (midpoint rule). This is the
    quadratic form conserved by the semi-discrete undamped system.
    """
    g = state.grid
    if not math.isclose(g.l, params.l, rel_tol=1e-12):
        raise DimensionError(f"grid length {g.l} does not match beam length {params.l}")
    h = g.h
    shear = cell_diff(state.u, h) - cell_avg(state.v)
    bend = cell_diff(state.v, h)
    kinetic = params.rho * trapezoid(np.abs(state.u2) ** 2, h) + params.I_rho * trapezoid(np.abs(state.v2) ** 2, h)
    potential = h * (params.K * np.sum(np.abs(shear) ** 2) + params.EI * np.sum(np.abs(bend) ** 2))
    return float(0.5 * (kinetic + potential))


def state_norm(state: SecondOrderState) -> float:
    """Unweighted energy-space norm sqrt(|u_x|^2 + |u2|^2 + |v_x|^2 + |v2|^2)."""
    h = state.grid.h
    total = h * (np.sum(np.abs(cell_diff(state.u, h)) ** 2) + np.sum(np.abs(cell_diff(state.v, h)) ** 2))
    total += trapezoid(np.abs(state.u2) ** 2, h) + trapezoid(np.abs(state.v2) ** 2, h)
    return float(np.sqrt(total))


@dataclass(frozen=True)
class RunOptions:
    n: int = 100
    dt: float | None = None
    t_final: float = 10.0


_REQUIRED = ("rho", "K", "I_rho", "EI", "l")
_OPTIONAL = ("b", "n", "dt", "t_final")


def parse_damping(spec: str, base: Path | None = None) -> DampingProfile:
    """Parse ``zero``, ``const:<v>``, ``localized:<v>:<b0>:<b1>`` or ``table:<path>``."""
    parts = spec.strip().split(":")
    kind = parts[0]
    try:
        if kind == "zero" and len(parts) == 1:
            return DampingProfile.zero()
        if kind == "const" and len(parts) == 2:
            return DampingProfile.constant(float(parts[1]))
        if kind == "localized" and len(parts) == 4:
            return DampingProfile.localized(*(float(p) for p in parts[1:]))
        if kind == "table" and len(parts) >= 2:
            path = Path(":".join(parts[1:]))
            if base is not None and not path.is_absolute():
                path = base / path
            return DampingProfile.tabulated(np.loadtxt(path, ndmin=1))
    except (ValueError, OSError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"bad damping specification {spec!r}: {exc}") from exc
    raise ConfigError(f"bad damping specification {spec!r}")


def parse_config(text: str, base: Path | None = None) -> tuple[BeamParams, DampingProfile, RunOptions]:
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in _REQUIRED and key not in _OPTIONAL:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        values[key] = value
    missing = [k for k in _REQUIRED if k not in values]
    if missing:
        raise ConfigError(f"missing required key(s): {', '.join(missing)}")
    try:
        params = BeamParams(**{k: float(values[k]) for k in _REQUIRED})
        opts = RunOptions(
            n=int(values.get("n", RunOptions.n)),
            dt=float(values["dt"]) if "dt" in values else None,
            t_final=float(values.get("t_final", RunOptions.t_final)),
        )
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc
    if opts.n < 1 or (opts.dt is not None and not opts.dt > 0) or not opts.t_final > 0:
        raise ConfigError("n, dt and t_final must be positive")
    damping = parse_damping(values.get("b", "zero"), base)
    if damping.kind == "localized" and damping.b1 > params.l * (1 + 1e-12):
        raise ConfigError(f"damping interval end b1={damping.b1} exceeds l={params.l}")
    return params, damping, opts


def load_config(path) -> tuple[BeamParams, DampingProfile, RunOptions]:
    """Read a ``key=value`` beam configuration file."""
    path = Path(path)
    return parse_config(path.read_text(encoding="utf-8"), base=path.parent)
