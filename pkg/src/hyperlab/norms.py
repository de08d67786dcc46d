"""Mixed spacetime norms, Strichartz admissibility, Sobolev norms, the
Z-norm ``L^{10/3}_{t,x}`` and intervals of local constancy."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgumentError
from .evolution import TrajectoryRecord
from .geometry import Geometry, RadialField, lp_norm
from .transform import sine_amplitudes
from .geometry import dual_grid

_EPS = 1e-12


def _reciprocal(x):
    return 0.0 if np.isinf(x) else 1.0 / x


def _check_exponents(q, r):
    if not (q >= 2):
        raise InvalidArgumentError(f"time exponent q must be >= 2, got {q}")
    if not (r >= 2) or np.isinf(r):
        raise InvalidArgumentError(f"space exponent r must be in [2, inf), got {r}")


@dataclass(frozen=True)
class AdmissiblePair:
    q: float
    r: float

    def __post_init__(self):
        _check_exponents(self.q, self.r)

    @property
    def inv_q(self) -> float:
        return _reciprocal(self.q)

    @property
    def inv_r(self) -> float:
        return _reciprocal(self.r)


def is_admissible(q, r, geometry) -> bool:
    """Strichartz admissibility in dimension 3.

    R^3: the line ``2/q + 3/r = 3/2`` with ``1/q in [0, 1/2]``,
    ``1/r in (0, 1/2]``. H^3: the triangle ``2/q + 3/r >= 3/2`` with
    ``1/q in (0, 1/2]``, ``1/r in (0, 1/2)``, plus the corner ``(inf, 2)``.
    """
    geometry = Geometry.parse(geometry)
    _check_exponents(q, r)
    a, b = _reciprocal(q), _reciprocal(r)
    s = 2 * a + 3 * b
    if geometry is Geometry.EUCLIDEAN3:
        return abs(s - 1.5) <= _EPS
    if a == 0.0 and abs(b - 0.5) <= _EPS:
        return True
    return 0 < a <= 0.5 and 0 < b < 0.5 - _EPS and s >= 1.5 - _EPS


#: finite stand-in for the supremum over admissible pairs
DEFAULT_PAIRS = ((np.inf, 2.0), (2.0, 6.0), (4.0, 3.0), (10 / 3, 10 / 3))
HYPERBOLIC_EXTRA_PAIRS = ((2.0, 4.0), (2.0, 3.0))


def default_pairs(geometry) -> tuple:
    geometry = Geometry.parse(geometry)
    if geometry is Geometry.HYPERBOLIC3:
        return DEFAULT_PAIRS + HYPERBOLIC_EXTRA_PAIRS
    return DEFAULT_PAIRS


def time_norm(values, times, q) -> float:
    """``L^q`` norm in time of sampled nonnegative values (trapezoid rule)."""
    values = np.asarray(values, dtype=float)
    if np.isinf(q):
        return float(values.max())
    if len(values) == 1:
        return 0.0
    return float(np.trapezoid(values**q, times) ** (1.0 / q))


def spacetime_norm(traj: TrajectoryRecord, q, r) -> float:
    """``||u||_{L^q_t L^r_x}`` over the recorded span."""
    if len(traj) == 0:
        raise InvalidArgumentError("empty trajectory")
    inner = [lp_norm(u, r) for u in traj.snapshots]
    return time_norm(inner, traj.times, q)


def strichartz_norm(traj: TrajectoryRecord, pairs=None) -> float:
    """S^0 diagnostic: max of ``spacetime_norm`` over a finite pair list."""
    pairs = default_pairs(traj.geometry) if pairs is None else pairs
    return max(spacetime_norm(traj, q, r) for q, r in pairs)


def _cumulative(t, z):
    out = np.zeros(len(t))
    out[1:] = np.cumsum(0.5 * (z[1:] + z[:-1]) * np.diff(t))
    return out


def _integral_to(traj: TrajectoryRecord, t: float) -> float:
    """Integral of the piecewise-linear z-density from the start to ``t``."""
    st, z = traj.step_times, traj.z_density
    cum = _cumulative(st, z)
    k = int(np.clip(np.searchsorted(st, t, side="right") - 1, 0, len(st) - 1))
    if k == len(st) - 1:
        return float(cum[-1])
    d = st[k + 1] - st[k]
    s = t - st[k]
    return float(cum[k] + z[k] * s + (z[k + 1] - z[k]) * s * s / (2 * d))


def z_norm(traj: TrajectoryRecord, t0=None, t1=None) -> float:
    """``(int int |u|^{10/3} dmu dt)^{3/10}`` over ``[t0, t1]``."""
    st = traj.step_times
    t0 = st[0] if t0 is None else t0
    t1 = st[-1] if t1 is None else t1
    if t1 < t0:
        raise InvalidArgumentError(f"reversed interval [{t0}, {t1}]")
    tol = 1e-12 * max(1.0, abs(st[-1]))
    if t0 < st[0] - tol or t1 > st[-1] + tol:
        raise InvalidArgumentError(f"[{t0}, {t1}] outside recorded span")
    total = _integral_to(traj, t1) - _integral_to(traj, t0)
    return float(max(total, 0.0) ** 0.3)


def sobolev_norm(u: RadialField, s: float) -> float:
    """``sqrt(sum (1 + lambda^2 + rho^2)^s |u~|^2)`` with Plancherel weights."""
    if not 0 <= s <= 2:
        raise InvalidArgumentError(f"Sobolev order must lie in [0, 2], got {s}")
    G = sine_amplitudes(u)
    weight = (1.0 + dual_grid(u.grid).symbol) ** s
    return float(np.sqrt(8.0 * np.pi / u.grid.r_max * np.sum(weight * np.abs(G) ** 2)))


@dataclass
class LocalConstancyPartition:
    """Greedy split of the time axis into unit Z-mass intervals.

    ``breakpoints`` are the interior times where the cumulative
    ``int int |u|^{10/3}`` crosses an integer; ``z_mass`` has one entry per
    interval (``len(breakpoints) + 1``), the last one being the remainder.
    """

    start: float
    end: float
    breakpoints: list = field(default_factory=list)
    z_mass: list = field(default_factory=list)

    @property
    def intervals(self):
        edges = [self.start, *self.breakpoints, self.end]
        return list(zip(edges[:-1], edges[1:]))

    @property
    def full_intervals(self) -> int:
        return len(self.breakpoints)

    @property
    def remainder(self) -> float:
        return self.z_mass[-1]


def partition_local_constancy(traj: TrajectoryRecord) -> LocalConstancyPartition:
    st, z = traj.step_times, traj.z_density
    cum = _cumulative(st, z)
    total = cum[-1]
    bps = []
    target = 1.0
    k = 0
    while target <= total * (1 + 1e-14) and target > 0:
        while k < len(st) - 2 and cum[k + 1] < target:
            k += 1
        d = st[k + 1] - st[k]
        need = target - cum[k]
        za, zb = z[k], z[k + 1]
        beta = (zb - za) / d
        disc = max(za * za + 2 * beta * need, 0.0)
        denom = za + np.sqrt(disc)
        s = 2 * need / denom if denom > 0 else d
        bps.append(float(st[k] + min(max(s, 0.0), d)))
        target += 1.0
    n_full = len(bps)
    masses = [1.0] * n_full + [float(total - n_full)]
    if n_full and abs(masses[-1]) < 1e-12 and bps[-1] >= st[-1] - 1e-12:
        # the last crossing sits exactly at the end: no dangling remainder
        bps.pop()
        masses = [1.0] * (n_full - 1) + [1.0]
    return LocalConstancyPartition(float(st[0]), float(st[-1]), bps, masses)
