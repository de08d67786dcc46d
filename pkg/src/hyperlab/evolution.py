"""Strang split-step integration of the defocusing mass-critical NLS

    i u_t + Delta u = rho |u|^{4/3} u,    rho in {0, 1},

on either radial geometry, with per-step conservation tracking.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import BlowupError, InvalidArgumentError, WallContaminationError
from .geometry import (Geometry, RadialField, RadialGrid, dual_grid, make_grid)
from .propagators import schrodinger_propagate
from .transform import from_sine_amplitudes, sine_amplitudes, sine_analysis, sine_synthesis

log = logging.getLogger(__name__)

#: exponent of the Z-norm, also the power in the potential energy
Z_EXPONENT = 10.0 / 3.0
#: coefficient 1/(p+1) of the potential energy for p = 7/3
POTENTIAL_COEFF = 3.0 / 10.0
MASS_JUMP_TOL = 1e-6


class Nonlinearity(enum.Enum):
    DEFOCUSING = "defocusing"
    OFF = "off"

    @classmethod
    def parse(cls, value):
        if isinstance(value, Nonlinearity):
            return value
        if isinstance(value, bool):
            return cls.DEFOCUSING if value else cls.OFF
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise InvalidArgumentError(f"unknown nonlinearity {value!r}") from None


@dataclass(frozen=True)
class Gaussian:
    """Unit-mass profile proportional to ``exp(-r^2 / (2 a^2))``."""
    a: float = 1.0


@dataclass(frozen=True)
class SpectralBand:
    """Unit-mass raised-cosine spectral envelope over ``[N(1-w), N(1+w)]``."""
    N: float
    width: float = 0.25


@dataclass(frozen=True)
class Transplant:
    """A Euclidean Gaussian profile carried into H^3 at scale N."""
    profile: Gaussian
    N: float


@dataclass(frozen=True)
class DatumSpec:
    family: Gaussian | SpectralBand | Transplant = Gaussian()
    amplitude: complex = 1.0

    def __post_init__(self):
        fam = self.family
        params = {
            Gaussian: lambda: (fam.a,),
            SpectralBand: lambda: (fam.N, fam.width),
            Transplant: lambda: (fam.profile.a, fam.N),
        }[type(fam)]()
        if not all(np.isfinite(p) and p > 0 for p in params):
            raise InvalidArgumentError(f"datum parameters must be positive: {fam}")


def _unit_mass(values: np.ndarray, grid: RadialGrid) -> np.ndarray:
    m = np.sum(grid.weights * np.abs(values) ** 2)
    if m == 0:
        raise InvalidArgumentError("datum profile vanishes on this grid")
    return values / np.sqrt(m)


def raised_cosine(lam, center, width):
    half = width * center
    x = (np.asarray(lam) - center) / half
    return np.where(np.abs(x) <= 1, 0.5 * (1 + np.cos(np.pi * x)), 0.0)


def build_datum(spec: DatumSpec, grid: RadialGrid) -> RadialField:
    """Sample a datum with mass ``|amplitude|^2`` on ``grid``."""
    fam = spec.family
    if isinstance(fam, Gaussian):
        vals = np.exp(-grid.nodes**2 / (2 * fam.a**2))
    elif isinstance(fam, SpectralBand):
        lam = dual_grid(grid).modes
        coeffs = raised_cosine(lam, fam.N, fam.width)
        if not np.any(coeffs):
            from .errors import ResolutionError
            raise ResolutionError(f"band N={fam.N} has no modes on this grid")
        vals = from_sine_amplitudes(coeffs * lam, grid)
    else:
        from .profiles import transplant
        egrid = make_grid(Geometry.EUCLIDEAN3, grid.r_max, grid.n)
        phi = build_datum(DatumSpec(fam.profile), egrid)
        vals = transplant(phi, fam.N, target=grid).values
    return RadialField(grid, spec.amplitude * _unit_mass(vals, grid))


@dataclass(frozen=True)
class SimConfig:
    geometry: Geometry = Geometry.HYPERBOLIC3
    r_max: float = 40.0
    n: int = 4096
    dt: float = 1e-3
    t_end: float = 1.0
    nonlinearity: Nonlinearity = Nonlinearity.DEFOCUSING
    record_stride: int = 10
    boundary_tol: float = 1e-8
    datum: DatumSpec = DatumSpec()

    def __post_init__(self):
        object.__setattr__(self, "geometry", Geometry.parse(self.geometry))
        object.__setattr__(self, "nonlinearity", Nonlinearity.parse(self.nonlinearity))
        if not self.dt > 0:
            raise InvalidArgumentError(f"dt must be positive, got {self.dt}")
        if int(self.record_stride) != self.record_stride or self.record_stride < 1:
            raise InvalidArgumentError("record_stride must be a positive integer")
        if not self.t_end > 0:
            raise InvalidArgumentError(f"t_end must be positive, got {self.t_end}")
        if not self.boundary_tol > 0:
            raise InvalidArgumentError("boundary_tol must be positive")
        steps = round(self.t_end / self.dt)
        if steps < 1 or abs(steps * self.dt - self.t_end) > 1e-9 * max(1.0, self.t_end):
            raise InvalidArgumentError(
                f"t_end/dt = {self.t_end / self.dt} is not a positive integer")

    @property
    def steps(self) -> int:
        return round(self.t_end / self.dt)

    @property
    def grid(self) -> RadialGrid:
        return make_grid(self.geometry, self.r_max, self.n)

    def refined(self, factor: int = 2) -> "SimConfig":
        """Same run with ``dt`` divided by ``factor`` (and stride scaled)."""
        return replace(self, dt=self.dt / factor, record_stride=self.record_stride * factor)


@dataclass
class TrajectoryRecord:
    """Time-sampled evolution.

    ``times``/``snapshots``/``mass_series``/``energy_series`` are sampled every
    ``record_stride`` steps (and at the final step); ``step_times`` and
    ``z_density`` hold ``int |u|^{10/3} dmu`` at every step.
    """

    grid: RadialGrid
    times: np.ndarray
    snapshots: list
    mass_series: np.ndarray
    energy_series: np.ndarray
    step_times: np.ndarray
    z_density: np.ndarray
    nonlinear: bool = True
    config: SimConfig | None = field(default=None, repr=False)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.step_times = np.asarray(self.step_times, dtype=float)
        self.z_density = np.asarray(self.z_density, dtype=float)
        self.mass_series = np.asarray(self.mass_series, dtype=float)
        self.energy_series = np.asarray(self.energy_series, dtype=float)
        k = len(self.times)
        if not (len(self.snapshots) == len(self.mass_series) == len(self.energy_series) == k):
            raise InvalidArgumentError("inconsistent series lengths")
        if len(self.step_times) != len(self.z_density):
            raise InvalidArgumentError("z_density must match step_times")
        if np.any(np.diff(self.times) <= 0) or np.any(np.diff(self.step_times) <= 0):
            raise InvalidArgumentError("times must be strictly increasing")

    @property
    def geometry(self) -> Geometry:
        return self.grid.geometry

    def __len__(self):
        return len(self.times)


def mass(u: RadialField) -> float:
    return float(np.sum(u.grid.weights * np.abs(u.values) ** 2))


def potential_energy(u: RadialField) -> float:
    return POTENTIAL_COEFF * float(np.sum(u.grid.weights * np.abs(u.values) ** Z_EXPONENT))


def kinetic_energy(u: RadialField) -> float:
    """``(1/2) <|nabla| u, |nabla| u>`` with the shifted symbol."""
    G = sine_amplitudes(u)
    return 0.5 * _spectral_mass(G, u.grid, dual_grid(u.grid).symbol)


def energy(u: RadialField) -> float:
    return kinetic_energy(u) + potential_energy(u)


def z_density(u: RadialField) -> float:
    return float(np.sum(u.grid.weights * np.abs(u.values) ** Z_EXPONENT))


def _spectral_mass(G, grid, multiplier=None):
    # Parseval for the sine amplitudes: mass = (8 pi / r_max) sum |G_m|^2
    a = np.abs(G) ** 2
    if multiplier is not None:
        a = a * multiplier
    return float(8.0 * np.pi / grid.r_max * a.sum())


def _nonlinear_phase(u: np.ndarray, dt: float) -> np.ndarray:
    return u * np.exp(-1j * dt * np.abs(u) ** (4.0 / 3.0))


def strang_step(u: RadialField, dt: float, nonlinearity=Nonlinearity.DEFOCUSING) -> RadialField:
    """One Strang step: half linear flow, exact nonlinear phase, half linear flow."""
    if not dt > 0:
        raise InvalidArgumentError(f"dt must be positive, got {dt}")
    nonlinearity = Nonlinearity.parse(nonlinearity)
    if nonlinearity is Nonlinearity.OFF:
        return schrodinger_propagate(u, dt)
    half = schrodinger_propagate(u, dt / 2)
    vals = _nonlinear_phase(half.values, dt)
    if not np.all(np.isfinite(vals)):
        raise BlowupError(0)
    return schrodinger_propagate(RadialField(u.grid, vals), dt / 2)


def evolve(cfg: SimConfig, u0: RadialField | None = None) -> TrajectoryRecord:
    """Integrate from 0 to ``cfg.t_end``.

    The state is carried as sine amplitudes ``G`` of ``g = sigma u`` so a
    step costs three sine transforms. Raises BlowupError on non-finite values
    or a relative mass jump above 1e-6, and WallContaminationError when the
    outer-5% tail mass exceeds ``cfg.boundary_tol``.
    """
    grid = cfg.grid
    if u0 is None:
        u0 = build_datum(cfg.datum, grid)
    elif u0.grid != grid:
        raise InvalidArgumentError("initial field does not live on the configured grid")
    sg = dual_grid(grid)
    sigma = grid.sigma
    w = grid.weights
    mu = sg.symbol
    nonlinear = cfg.nonlinearity is Nonlinearity.DEFOCUSING
    steps = cfg.steps
    dt = cfg.dt
    n_tail = grid.n_tail

    half = np.exp(-0.5j * dt * mu)
    full = half * half

    G = sine_amplitudes(u0)
    u = u0.values.copy()
    m0 = mass(u0)

    rec_t, snaps, masses, energies = [], [], [], []
    zd = np.empty(steps + 1)

    def record(k, u_vals, G_now):
        f = RadialField(grid, u_vals)
        rec_t.append(k * dt)
        snaps.append(f)
        masses.append(float(np.sum(w * np.abs(u_vals) ** 2)))
        kin = 0.5 * _spectral_mass(G_now, grid, mu)
        energies.append(kin + (POTENTIAL_COEFF * float(np.sum(w * np.abs(u_vals) ** Z_EXPONENT))
                               if nonlinear else 0.0))

    dens0 = np.abs(u * sigma) ** 2
    if dens0.sum() > 0 and dens0[-n_tail:].sum() / dens0.sum() > cfg.boundary_tol:
        raise WallContaminationError(0.0, dens0[-n_tail:].sum() / dens0.sum(), cfg.boundary_tol)
    zd[0] = float(np.sum(w * np.abs(u) ** Z_EXPONENT))
    record(0, u, G)

    for k in range(1, steps + 1):
        if nonlinear:
            g = sine_synthesis(G * half, grid)
            v = _nonlinear_phase(g / sigma, dt)
            G = sine_analysis(v * sigma, grid) * half
        else:
            G = G * full
        g = sine_synthesis(G, grid)
        u = g / sigma

        dens = np.abs(g) ** 2
        total = dens.sum()
        if not np.isfinite(total) or not np.all(np.isfinite(g)):
            raise BlowupError(k)
        m = 4.0 * np.pi * grid.h * total
        if abs(m - m0) > MASS_JUMP_TOL * max(m0, np.finfo(float).tiny):
            raise BlowupError(k, f"relative mass jump {abs(m - m0) / m0:.3e}")
        if total > 0:
            tail = dens[-n_tail:].sum() / total
            if tail > cfg.boundary_tol:
                raise WallContaminationError(k * dt, tail, cfg.boundary_tol)

        zd[k] = float(np.sum(w * np.abs(u) ** Z_EXPONENT))
        if k % cfg.record_stride == 0 or k == steps:
            record(k, u, G)

    log.debug("evolved %d steps on %s", steps, grid)
    return TrajectoryRecord(
        grid=grid, times=np.array(rec_t), snapshots=snaps,
        mass_series=np.array(masses), energy_series=np.array(energies),
        step_times=np.arange(steps + 1) * dt, z_density=zd,
        nonlinear=nonlinear, config=cfg,
    )
