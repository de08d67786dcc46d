"""Radial grids on hyperbolic and Euclidean 3-space.

Both geometries are discretized on the same uniform mesh ``r_j = j h``,
``j = 1..n``, ``h = r_max / (n + 1)`` with a Dirichlet wall at ``r_max``.
Quadrature weights carry the full spherical factor, so that

    w_j = 4 pi sigma(r_j)^2 h,   sigma(r) = sinh r  (H^3)  or  r  (R^3).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import GeometryError, GridMismatchError, InvalidArgumentError

#: fraction of outermost nodes used by the tail diagnostic
TAIL_FRACTION = 0.05


class Geometry(enum.Enum):
    HYPERBOLIC3 = "hyperbolic3"
    EUCLIDEAN3 = "euclidean3"

    @property
    def spectral_shift(self) -> float:
        """Bottom of the spectrum of -Delta: rho^2 = 1 on H^3, 0 on R^3."""
        return 1.0 if self is Geometry.HYPERBOLIC3 else 0.0

    def sigma(self, r):
        """Radial area factor: sinh r or r."""
        r = np.asarray(r, dtype=float)
        return np.sinh(r) if self is Geometry.HYPERBOLIC3 else r.copy()

    @classmethod
    def parse(cls, value) -> "Geometry":
        if isinstance(value, Geometry):
            return value
        key = str(value).strip().lower()
        aliases = {"hyperbolic3": cls.HYPERBOLIC3, "h3": cls.HYPERBOLIC3,
                   "hyperbolic": cls.HYPERBOLIC3, "euclidean3": cls.EUCLIDEAN3,
                   "r3": cls.EUCLIDEAN3, "euclidean": cls.EUCLIDEAN3}
        try:
            return aliases[key]
        except KeyError:
            raise InvalidArgumentError(f"unknown geometry {value!r}") from None


def _frozen(a):
    a = np.ascontiguousarray(a)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class RadialGrid:
    """Immutable physical radial mesh with geometry-aware weights.

    Equality and hashing use ``(geometry, r_max, n)`` only.
    """

    geometry: Geometry
    r_max: float
    n: int
    h: float = field(init=False, compare=False)
    nodes: np.ndarray = field(init=False, compare=False, repr=False)
    sigma: np.ndarray = field(init=False, compare=False, repr=False)
    weights: np.ndarray = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        h = self.r_max / (self.n + 1)
        r = np.arange(1, self.n + 1) * h
        sigma = self.geometry.sigma(r)
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "nodes", _frozen(r))
        object.__setattr__(self, "sigma", _frozen(sigma))
        object.__setattr__(self, "weights", _frozen(4.0 * np.pi * sigma**2 * h))

    @property
    def modes(self) -> np.ndarray:
        return dual_grid(self).modes

    @property
    def n_tail(self) -> int:
        return max(1, int(np.ceil(TAIL_FRACTION * self.n)))

    def with_geometry(self, geometry: Geometry) -> "RadialGrid":
        return make_grid(geometry, self.r_max, self.n)

    def zeros(self) -> "RadialField":
        return RadialField(self, np.zeros(self.n, dtype=complex))

    def field(self, values) -> "RadialField":
        return RadialField(self, values)


@dataclass(frozen=True)
class SpectralGrid:
    """Dirichlet sine modes ``lambda_m = m pi / r_max`` dual to a RadialGrid."""

    grid: RadialGrid
    modes: np.ndarray = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        m = np.arange(1, self.grid.n + 1)
        object.__setattr__(self, "modes", _frozen(m * np.pi / self.grid.r_max))

    @property
    def weight(self) -> float:
        return np.pi / self.grid.r_max

    @property
    def n(self) -> int:
        return self.grid.n

    @property
    def geometry(self) -> Geometry:
        return self.grid.geometry

    @property
    def symbol(self) -> np.ndarray:
        """Spectrum of -Delta on each mode: lambda^2 + rho^2."""
        return self.modes**2 + self.grid.geometry.spectral_shift

    @property
    def lambda_max(self) -> float:
        return float(self.modes[-1])


def make_grid(geometry, r_max: float, n: int) -> RadialGrid:
    """Build a radial grid.

    Raises InvalidArgumentError for a non-positive ``r_max`` or ``n < 1``.
    """
    geometry = Geometry.parse(geometry)
    if not np.isfinite(r_max) or r_max <= 0:
        raise InvalidArgumentError(f"r_max must be positive, got {r_max}")
    if int(n) != n or n < 1:
        raise InvalidArgumentError(f"n must be a positive integer, got {n}")
    return RadialGrid(geometry, float(r_max), int(n))


_DUAL_CACHE: dict = {}


def dual_grid(grid: RadialGrid) -> SpectralGrid:
    sg = _DUAL_CACHE.get(grid)
    if sg is None:
        sg = SpectralGrid(grid)
        _DUAL_CACHE[grid] = sg
    return sg


class RadialField:
    """Complex samples ``u(r_j)`` of a radial state on a RadialGrid.

    Fields have value semantics: the sample array is copied on construction
    and marked read-only.
    """

    __slots__ = ("grid", "values")

    def __init__(self, grid: RadialGrid, values):
        values = np.array(values, dtype=complex)
        if values.shape != (grid.n,):
            raise InvalidArgumentError(
                f"expected {grid.n} samples, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise InvalidArgumentError("field contains non-finite values")
        values.flags.writeable = False
        self.grid = grid
        self.values = values

    @property
    def geometry(self) -> Geometry:
        return self.grid.geometry

    def _check(self, other):
        if not isinstance(other, RadialField):
            return NotImplemented
        if other.grid != self.grid:
            raise GridMismatchError("fields live on different grids")
        return other

    def __add__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return other
        return RadialField(self.grid, self.values + other.values)

    def __sub__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return other
        return RadialField(self.grid, self.values - other.values)

    def __mul__(self, c):
        if isinstance(c, RadialField):
            return NotImplemented
        return RadialField(self.grid, self.values * c)

    __rmul__ = __mul__

    def __neg__(self):
        return RadialField(self.grid, -self.values)

    def __repr__(self):
        return f"RadialField({self.grid!r}, l2={l2_norm(self):.6g})"


class SpectralField:
    """Sine-mode coefficients of a radial state."""

    __slots__ = ("grid", "coeffs")

    def __init__(self, grid: SpectralGrid, coeffs):
        coeffs = np.array(coeffs, dtype=complex)
        if coeffs.shape != (grid.n,):
            raise InvalidArgumentError(
                f"expected {grid.n} coefficients, got shape {coeffs.shape}")
        if not np.all(np.isfinite(coeffs)):
            raise InvalidArgumentError("spectral field contains non-finite values")
        coeffs.flags.writeable = False
        self.grid = grid
        self.coeffs = coeffs

    def norm_squared(self) -> float:
        """Plancherel side: sum_m (pi/r_max) 4 pi lambda_m^2 |coeffs_m|^2."""
        lam = self.grid.modes
        return float(self.grid.weight * 4 * np.pi * np.sum(lam**2 * np.abs(self.coeffs)**2))


def inner_product(f: RadialField, g: RadialField) -> complex:
    """Weighted pairing ``sum_j w_j f(r_j) conj(g(r_j))``."""
    if f.grid != g.grid:
        raise GridMismatchError("inner product of fields on different grids")
    return complex(np.sum(f.grid.weights * f.values * np.conj(g.values)))


def l2_norm(f: RadialField) -> float:
    return float(np.sqrt(np.sum(f.grid.weights * np.abs(f.values)**2)))


def lp_norm(f: RadialField, p: float) -> float:
    """Spatial L^p norm with the geometric measure; ``p = inf`` gives the max."""
    a = np.abs(f.values)
    if np.isinf(p):
        return float(a.max())
    return float(np.sum(f.grid.weights * a**p) ** (1.0 / p))


def tail_mass_fraction(f: RadialField) -> float:
    """Mass carried by the outer 5% of nodes, relative to the total."""
    dens = f.grid.weights * np.abs(f.values)**2
    total = dens.sum()
    if total == 0:
        return 0.0
    return float(dens[-f.grid.n_tail:].sum() / total)


def require_geometry(f: RadialField, geometry: Geometry, what: str = "operation"):
    if f.grid.geometry is not geometry:
        raise GeometryError(f"{what} requires {geometry.value}, got {f.grid.geometry.value}")
