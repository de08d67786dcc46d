"""Numerical checks of dispersive, Strichartz-type, Morawetz-type and
scattering estimates.

Every bound here is one-sided: the checks measure a quantity, divide by the
predicted right-hand side and report the ratio. Boundedness (and the absence
of growth along a sweep) is what the callers assert, never equality.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import (GeometryError, InvalidArgumentError, ResolutionError,
                     WallContaminationError)
from .evolution import DatumSpec, SpectralBand, TrajectoryRecord, build_datum
from .geometry import (Geometry, RadialField, RadialGrid, dual_grid, l2_norm,
                       lp_norm, make_grid, tail_mass_fraction)
from .norms import sobolev_norm, time_norm, z_norm
from .propagators import (LPBand, fractional_gradient, lp_multiplier, lp_project,
                          schrodinger_propagate)
from .transform import (cov_from_euclidean, cov_to_euclidean,
                        origin_value_from_amplitudes, radial_derivative,
                        sine_amplitudes, sine_synthesis)

#: tail-mass fraction tolerated by the dispersive fit (see README)
DISPERSIVE_WALL_TOL = 1e-4
#: rows of time samples synthesized per vectorized sine transform
_CHUNK = 128


def worker_count() -> int:
    try:
        return max(1, int(os.environ.get("HYPERLAB_THREADS", "1")))
    except ValueError:
        return 1


@dataclass
class FitResult:
    exponent: float
    constant: float
    residual: float
    times: np.ndarray = field(default_factory=lambda: np.empty(0), repr=False)
    values: np.ndarray = field(default_factory=lambda: np.empty(0), repr=False)


def loglog_fit(x, y) -> FitResult:
    """Ordinary least squares of ``log y`` against ``log x``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    lx, ly = np.log(x), np.log(y)
    A = np.vstack([lx, np.ones_like(lx)]).T
    coef, *_ = np.linalg.lstsq(A, ly, rcond=None)
    resid = float(np.sqrt(np.mean((A @ coef - ly) ** 2)))
    return FitResult(float(coef[0]), float(np.exp(coef[1])), resid, x, y)


def evolve_linear_samples(f: RadialField, times):
    """Yield ``(t, e^{it Delta} f values)`` blocks, vectorized over time."""
    grid = f.grid
    mu = dual_grid(grid).symbol
    G = sine_amplitudes(f)
    times = np.asarray(times, dtype=float)
    for start in range(0, len(times), _CHUNK):
        ts = times[start:start + _CHUNK]
        block = sine_synthesis(G * np.exp(-1j * np.outer(ts, mu)), grid) / grid.sigma
        yield ts, block


def _as_field(datum, grid):
    if isinstance(datum, RadialField):
        return datum
    if isinstance(datum, DatumSpec):
        return build_datum(datum, grid)
    raise InvalidArgumentError(f"expected a RadialField or DatumSpec, got {type(datum)}")


def spectral_extent(f: RadialField, tail=1e-12) -> float:
    """Smallest ``lambda`` carrying all but ``tail`` of the spectral mass."""
    G = np.abs(sine_amplitudes(f)) ** 2
    c = np.cumsum(G)
    if c[-1] == 0:
        return float(dual_grid(f.grid).modes[0])
    k = int(np.searchsorted(c, (1 - tail) * c[-1]))
    return float(dual_grid(f.grid).modes[min(k, f.grid.n - 1)])


# --------------------------------------------------------------- dispersive

def dispersive_norms(f: RadialField, p: float, times, wall_tol=DISPERSIVE_WALL_TOL):
    """``||e^{it Delta} f||_{p'} / ||f||_p`` at each time."""
    if not 6 / 5 - 1e-12 <= p <= 2:
        raise InvalidArgumentError(f"p must lie in [6/5, 2], got {p}")
    times = np.asarray(times, dtype=float)
    pp = p / (p - 1) if p < 2 else 2.0
    base = lp_norm(f, p)
    out = np.empty(len(times))
    for i, t in enumerate(times):
        u = schrodinger_propagate(f, t)
        tail = tail_mass_fraction(u)
        if tail > wall_tol:
            raise WallContaminationError(t, tail, wall_tol)
        out[i] = lp_norm(u, pp) / base
    return out


def dispersive_fit(datum, p: float, times, grid: RadialGrid | None = None,
                   wall_tol: float = DISPERSIVE_WALL_TOL) -> FitResult:
    """Fit ``log ||e^{it Delta} f||_{p'}`` against ``log t``.

    The predicted exponent is ``-3 (1/p - 1/2)``. Raises
    WallContaminationError naming the first sample time whose outer-5% tail
    mass exceeds ``wall_tol``.
    """
    times = np.asarray(times, dtype=float)
    if len(times) < 6:
        raise InvalidArgumentError("a decay fit needs at least 6 sample times")
    if np.any(times <= 0):
        raise InvalidArgumentError("sample times must be positive")
    if grid is None:
        grid = make_grid(Geometry.HYPERBOLIC3, 80.0, 8192)
    f = _as_field(datum, grid)
    return loglog_fit(times, dispersive_norms(f, p, times, wall_tol))


def predicted_dispersive_exponent(p: float) -> float:
    return -3.0 * (1.0 / p - 0.5)


def bound_constant(fit: FitResult, exponent: float) -> float:
    """Smallest ``C`` with ``values <= C t^exponent`` at every sample."""
    return float(np.max(fit.values / fit.times**exponent))


# ----------------------------------------------------------------- bilinear

def bilinear_constant(N: float, L: float, q: float) -> float:
    """``C(N, L)`` of the radial bilinear Strichartz estimate in dimension 3."""
    if not q > 4 / 3:
        raise InvalidArgumentError(f"bilinear estimate needs q > 4/3, got {q}")
    if not (N > 0 and L > 0):
        raise InvalidArgumentError("frequencies must be positive")
    if q <= 2:
        return N ** (3.5 - 5.0 / q) * L ** -0.5
    if q <= 14 / 5:
        return N ** (11 / 4 - 7 / (2 * q)) * L ** (-3 / (2 * q) + 0.25)
    return N ** 1.5 * L ** (1.5 - 5.0 / q)


@dataclass(frozen=True)
class SweepRow:
    N: float
    L: float
    q: float
    measured: float
    predicted_C: float
    ratio: float


@dataclass
class SweepTable:
    rows: list
    geometry: Geometry = Geometry.HYPERBOLIC3

    HEADER = ("N", "L", "q", "measured", "predicted_C", "ratio")

    def __post_init__(self):
        for row in self.rows:
            vals = (row.N, row.L, row.q, row.measured, row.predicted_C, row.ratio)
            if not all(np.isfinite(vals)):
                raise InvalidArgumentError(f"non-finite sweep entry {row}")
            if row.N > row.L / 4:
                raise InvalidArgumentError(f"row violates N <= L/4: {row}")

    def column(self, name) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.rows])

    def as_tuples(self):
        return [(r.N, r.L, r.q, r.measured, r.predicted_C, r.ratio) for r in self.rows]


def bilinear_window(L: float, band_width: float, r_max: float):
    """Time window and step for a band pair whose top frequency is L(1+w)."""
    top = L * (1 + band_width)
    T = r_max / (4.0 * top)
    dt = 0.5 / top**2
    return T, dt


def bilinear_norm(F: RadialField, G: RadialField, q: float, T: float, dt: float) -> float:
    """``||e^{it Delta} F e^{it Delta} G||_{L^q_{t,x}([0, T])}``."""
    grid = F.grid
    ts = np.linspace(0.0, T, int(np.ceil(T / dt)) + 1)
    vals = []
    for (chunk, uf), (_, ug) in zip(evolve_linear_samples(F, ts), evolve_linear_samples(G, ts)):
        vals.append(np.sum(grid.weights * np.abs(uf * ug) ** q, axis=1))
    return time_norm(np.concatenate(vals) ** (1.0 / q), ts, q)


def _check_band(grid, L, width):
    if L * (1 + width) >= dual_grid(grid).lambda_max / 2:
        raise ResolutionError(
            f"band L={L} (top {L * (1 + width):g}) not resolvable: "
            f"lambda_max/2 = {dual_grid(grid).lambda_max / 2:g}")


def bilinear_sweep(q: float, N_list, L_list, band_width: float = 0.25,
                   grid: RadialGrid | None = None) -> SweepTable:
    """Tabulate ``measured / (C(N, L) ||F|| ||G||)`` for unit-mass band data."""
    if grid is None:
        grid = make_grid(Geometry.HYPERBOLIC3, 40.0, 4095)
    cells = [(float(N), float(L)) for N in N_list for L in L_list]
    for N, L in cells:
        if N > L / 4:
            raise InvalidArgumentError(f"bilinear sweep needs N <= L/4, got N={N}, L={L}")
        _check_band(grid, L, band_width)
        _check_band(grid, N, band_width)

    def cell(args):
        N, L = args
        F = build_datum(DatumSpec(SpectralBand(N, band_width)), grid)
        G = build_datum(DatumSpec(SpectralBand(L, band_width)), grid)
        T, dt = bilinear_window(L, band_width, grid.r_max)
        measured = bilinear_norm(F, G, q, T, dt)
        C = bilinear_constant(N, L, q)
        return SweepRow(N, L, q, measured, C, measured / (C * l2_norm(F) * l2_norm(G)))

    with ThreadPoolExecutor(max_workers=worker_count()) as pool:
        rows = list(pool.map(cell, cells))
    return SweepTable(rows, grid.geometry)


# ----------------------------------------------------------------- improved

def default_scales(f: RadialField, lo=0.5):
    """Dyadic scales, 2 per octave, from ``lo`` up to the datum's reach."""
    top = min(dual_grid(f.grid).lambda_max / 4, 4 * spectral_extent(f))
    k = int(np.floor(2 * np.log2(top / lo)))
    return lo * 2.0 ** (np.arange(k + 1) / 2)


def _sample_window(f: RadialField, T=None, dt=None):
    top = spectral_extent(f)
    if T is None:
        T = 0.8 * f.grid.r_max / (2 * top)
    if dt is None:
        dt = 0.25 / top**2
    return np.linspace(0.0, T, int(np.ceil(T / dt)) + 1)


def improved_strichartz_terms(f: RadialField, q: float, N_list=None, window=None, dt=None):
    """Return ``(lhs, rhs)`` of the improved Strichartz inequality.

    ``lhs = ||e^{it Delta} f||^{10/3}_{L^{10/3}_{t,x}}`` over the window and
    ``rhs = sup_N ||N^{-3/2} e^{it Delta} P_N f||_{L^inf}^{10/3 - 2q} ||f||_2^{2q}``.
    """
    if not 4 / 3 < q < 5 / 3:
        raise InvalidArgumentError(f"q must lie in (4/3, 5/3), got {q}")
    a, b = 10 / 3 - 2 * q, 2 * q
    assert abs(a + b - 10 / 3) < 1e-14
    grid = f.grid
    ts = _sample_window(f, window, dt)
    N_list = default_scales(f) if N_list is None else np.asarray(N_list, dtype=float)

    dens = []
    for _, block in evolve_linear_samples(f, ts):
        dens.append(np.sum(grid.weights * np.abs(block) ** (10 / 3), axis=1))
    lhs = float(np.trapezoid(np.concatenate(dens), ts))

    sup = 0.0
    mu = dual_grid(grid).symbol
    G = sine_amplitudes(f)
    for N in N_list:
        GN = G * lp_multiplier(grid, LPBand.band(N))
        for start in range(0, len(ts), _CHUNK):
            chunk = ts[start:start + _CHUNK]
            A = GN * np.exp(-1j * np.outer(chunk, mu))
            block = sine_synthesis(A, grid) / grid.sigma
            peak = max(np.abs(block).max(), np.abs(origin_value_from_amplitudes(A, grid)).max())
            sup = max(sup, N ** -1.5 * peak)
    rhs = sup**a * l2_norm(f) ** b
    return lhs, float(rhs)


def improved_strichartz_check(datum: RadialField, q: float, **kwargs) -> float:
    lhs, rhs = improved_strichartz_terms(datum, q, **kwargs)
    return lhs / rhs


# ----------------------------------------------------------------- Morawetz

def morawetz_ratio(traj: TrajectoryRecord) -> float:
    """``||u||^{10/3}_{L^{10/3}} / (sup_t ||u||_2 * sup_t ||u||_{H^1})``."""
    if traj.geometry is not Geometry.HYPERBOLIC3:
        raise GeometryError("the Morawetz estimate is specific to H^3")
    lhs = z_norm(traj) ** (10 / 3)
    l2 = max(np.sqrt(m) for m in traj.mass_series)
    h1 = max(sobolev_norm(u, 1.0) for u in traj.snapshots)
    if l2 == 0 or h1 == 0:
        return 0.0
    return float(lhs / (l2 * h1))


def _pow_nl(v):
    return np.abs(v) ** (4 / 3) * v


def frequency_defect(u: RadialField, cutoff: float) -> RadialField:
    """``P_{<=T}(|u|^{4/3} u) - |P_{<=T} u|^{4/3} P_{<=T} u``."""
    band = LPBand.low(cutoff)
    low = lp_project(u, band)
    return lp_project(RadialField(u.grid, _pow_nl(u.values)), band) - \
        RadialField(u.grid, _pow_nl(low.values))


def morawetz_defect(traj: TrajectoryRecord, T_cutoff: float):
    """L^1_{t,x} norms of ``N conj(u_low)`` and ``N conj(d_r u_low)``."""
    grid = traj.grid
    if T_cutoff > dual_grid(grid).lambda_max:
        raise ResolutionError(f"cutoff {T_cutoff} above lambda_max {dual_grid(grid).lambda_max:g}")
    if not traj.nonlinear:
        return 0.0, 0.0
    d_u, d_g = [], []
    for u in traj.snapshots:
        low = lp_project(u, LPBand.low(T_cutoff))
        nl = frequency_defect(u, T_cutoff).values
        d_u.append(np.sum(grid.weights * np.abs(nl * np.conj(low.values))))
        grad = radial_derivative(low).values
        d_g.append(np.sum(grid.weights * np.abs(nl * np.conj(grad))))
    return (float(np.trapezoid(d_u, traj.times)), float(np.trapezoid(d_g, traj.times)))


def nonlinear_flux(traj: TrajectoryRecord) -> float:
    """``||F(u) conj(u)||_{L^1_{t,x}} = int int |u|^{10/3}`` over snapshots."""
    dens = [np.sum(traj.grid.weights * np.abs(u.values) ** (10 / 3)) for u in traj.snapshots]
    return float(np.trapezoid(dens, traj.times))


# -------------------------------------------------------- long-time Strichartz

def lts_norm(traj: TrajectoryRecord, N: float, T: float, r: float = 6.0) -> float:
    """``||P_{>=N} u||_{L^2_t L^r_x([0, T])}`` from the recorded snapshots."""
    if N > dual_grid(traj.grid).lambda_max:
        raise ResolutionError(f"scale {N} above lambda_max")
    if T > traj.times[-1] + 1e-12:
        raise InvalidArgumentError(f"trajectory ends at {traj.times[-1]}, before T={T}")
    keep = traj.times <= T + 1e-12
    inner = [lp_norm(lp_project(u, LPBand.high(N)), r)
             for u, k in zip(traj.snapshots, keep) if k]
    return time_norm(inner, traj.times[keep], 2.0)


def lts_ratio(traj: TrajectoryRecord, N: float, T: float, r: float = 6.0) -> float:
    return lts_norm(traj, N, T, r) / (1.0 + np.sqrt(T / N))


# ---------------------------------------------------------- local smoothing

def local_smoothing_ratio(datum: RadialField, epsilon: float, window: float,
                          dt: float | None = None) -> float:
    """``||<r>^{-1/2-eps} |nabla|^{1/2} e^{it Delta} f||_{L^2([0, window] x M)} / ||f||_2``."""
    if not epsilon > 0:
        raise InvalidArgumentError("epsilon must be positive")
    f = datum
    grid = f.grid
    top = spectral_extent(f)
    if dt is None:
        dt = 0.25 / top**2
    ts = np.linspace(0.0, window, int(np.ceil(window / dt)) + 1)
    weight = (1.0 + grid.nodes**2) ** (-1.0 - 2.0 * epsilon)
    v = fractional_gradient(f, 0.5)
    dens = []
    for _, block in evolve_linear_samples(v, ts):
        dens.append(np.sum(grid.weights * weight * np.abs(block) ** 2, axis=1))
    norm = np.sqrt(np.trapezoid(np.concatenate(dens), ts))
    return float(norm / l2_norm(f))


# ------------------------------------------------------ change of variables

def cov_equivalence(datum_H: RadialField, t_end: float, samples: int = 21) -> float:
    """Max l2 gap between the H^3 flow and the conjugated R^3 flow."""
    if datum_H.geometry is not Geometry.HYPERBOLIC3:
        raise GeometryError("cov_equivalence needs a hyperbolic datum")
    w0 = cov_to_euclidean(datum_H, 0.0)
    worst = 0.0
    for t in np.linspace(0.0, t_end, samples):
        u = schrodinger_propagate(datum_H, t)
        w = schrodinger_propagate(w0, t)
        worst = max(worst, l2_norm(u - cov_from_euclidean(w, t)))
    return worst


def spectral_support(f: RadialField, rel_tol: float = 1e-10) -> np.ndarray:
    """Mode indices (1-based) whose share of the spectral mass exceeds rel_tol."""
    G = np.abs(sine_amplitudes(f)) ** 2
    return np.nonzero(G > rel_tol * G.sum())[0] + 1


# --------------------------------------------------------------- scattering

def scattering_diagnostic(traj: TrajectoryRecord):
    """Successive l2 gaps of the pull-backs ``e^{-i t_k Delta} u(t_k)``.

    Returns ``(cauchy, u_plus)`` where ``u_plus`` is the last pull-back.
    """
    pulls = [schrodinger_propagate(u, -t) for t, u in zip(traj.times, traj.snapshots)]
    cauchy = np.array([l2_norm(b - a) for a, b in zip(pulls[:-1], pulls[1:])])
    return cauchy, pulls[-1]
