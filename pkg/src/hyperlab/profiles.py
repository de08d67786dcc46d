"""Transplanting Euclidean profiles into H^3, bubble search and a greedy
radial profile decomposition."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import EmptySearchError, InvalidArgumentError, NumericalFailure, ResolutionError
from .geometry import (Geometry, RadialField, RadialGrid, dual_grid, make_grid,
                       require_geometry)
from .propagators import LPBand, heat_propagate, lp_multiplier
from .transform import apply_multiplier, evaluate, sine_amplitudes

#: fewest hyperbolic nodes the transplanted support may cover
MIN_SUPPORT_NODES = 8


def bump(x):
    """Radial cutoff: 1 on [0, 1], 0 beyond 2, ``exp(1 - 1/(1 - s^2))`` with
    ``s = |x| - 1`` in between."""
    x = np.abs(np.asarray(x, dtype=float))
    s = np.clip(x - 1.0, 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        mid = np.exp(1.0 - 1.0 / (1.0 - s * s))
    return np.where(x <= 1.0, 1.0, np.where(x >= 2.0, 0.0, mid))


def transplant(phi: RadialField, N: float, target: RadialGrid | None = None) -> RadialField:
    """``T_N phi``: heat-regularize, cut off at radius ``2 N^{1/2}``, rescale
    ``N^{3/2} phi_N(N r)`` and read the result on the hyperbolic grid."""
    require_geometry(phi, Geometry.EUCLIDEAN3, "transplant")
    if not N >= 1:
        raise InvalidArgumentError(f"transplant scale must be >= 1, got {N}")
    if target is None:
        target = make_grid(Geometry.HYPERBOLIC3, phi.grid.r_max, phi.grid.n)
    elif target.geometry is not Geometry.HYPERBOLIC3:
        raise InvalidArgumentError("transplant target must be a hyperbolic grid")
    support = 2.0 / np.sqrt(N)
    inside = target.nodes < support
    if inside.sum() < MIN_SUPPORT_NODES:
        raise ResolutionError(
            f"support radius {support:.3g} covers {inside.sum()} nodes "
            f"(need {MIN_SUPPORT_NODES})")
    smoothed = heat_propagate(phi, 1.0 / N)
    rho = N * target.nodes[inside]
    vals = np.zeros(target.n, dtype=complex)
    vals[inside] = N**1.5 * bump(rho / np.sqrt(N)) * evaluate(smoothed, rho)
    return RadialField(target, vals)


def dyadic_scales(lo=2.0, hi=256.0, per_octave=2):
    k = int(round(per_octave * np.log2(hi / lo)))
    return lo * 2.0 ** (np.arange(k + 1) / per_octave)


#: 64 uniform samples of [-1, 1) including t = 0
DEFAULT_T_GRID = -1.0 + np.arange(64) / 32.0


def bubble_values(f: RadialField, N_grid, t_grid) -> np.ndarray:
    """``v(N, t) = N^{-3/2} |(e^{it Delta} P_N f)(0)|`` on an (N, t) table."""
    grid = f.grid
    sg = dual_grid(grid)
    N_grid = np.asarray(N_grid, dtype=float)
    t_grid = np.asarray(t_grid, dtype=float)
    G = sine_amplitudes(f)
    base = (2.0 / grid.r_max) * G * sg.modes
    bands = np.array([lp_multiplier(grid, LPBand.band(N)) for N in N_grid])
    phases = np.exp(-1j * np.outer(sg.symbol, t_grid))
    origin = (bands * base) @ phases
    return N_grid[:, None] ** -1.5 * np.abs(origin)


@dataclass(frozen=True)
class BubbleHit:
    N: float
    t: float
    value: float


def bubble_search(f: RadialField, N_grid=None, t_grid=None) -> BubbleHit:
    """Exhaustive argmax of :func:`bubble_values` over the search grid."""
    N_grid = dyadic_scales() if N_grid is None else np.asarray(N_grid, dtype=float)
    t_grid = DEFAULT_T_GRID if t_grid is None else np.asarray(t_grid, dtype=float)
    if len(N_grid) == 0 or len(t_grid) == 0:
        raise EmptySearchError("empty search grid")
    if not np.any(f.values):
        raise EmptySearchError("bubble search on the zero field")
    v = bubble_values(f, N_grid, t_grid)
    i, j = np.unravel_index(np.argmax(v), v.shape)
    return BubbleHit(float(N_grid[i]), float(t_grid[j]), float(v[i, j]))


def octave_projector(grid: RadialGrid, N: float) -> np.ndarray:
    """Indicator of the modes with ``lambda`` in ``[N/sqrt 2, N sqrt 2)``."""
    lam = dual_grid(grid).modes
    return ((lam >= N / np.sqrt(2)) & (lam < N * np.sqrt(2))).astype(float)


def driving_frequency(f: RadialField, N: float) -> float:
    """The mode contributing most to the origin value of ``P_N f``.

    The heat-flow band is broad, so the octave of an atom is centred here
    rather than at ``N`` itself; this guarantees the atom is nonzero.
    """
    lam = dual_grid(f.grid).modes
    w = np.abs(sine_amplitudes(f) * lam * lp_multiplier(f.grid, LPBand.band(N)))
    return float(lam[np.argmax(w)])


@dataclass
class ProfileAtom:
    N: float
    t_offset: float
    atom: RadialField
    mass_captured: float
    search_value: float = 0.0
    cross_term: float = 0.0


@dataclass
class Decomposition:
    atoms: list
    residual: RadialField
    input_mass: float
    proxies: list = field(default_factory=list)

    @property
    def pythagorean_defect(self) -> float:
        from .evolution import mass
        return abs(self.input_mass - sum(a.mass_captured for a in self.atoms)
                   - mass(self.residual))

    def csv_rows(self):
        d = self.pythagorean_defect
        return [(a.N, a.t_offset, a.mass_captured, d) for a in self.atoms]


class DecompositionError(NumericalFailure):
    pass


def greedy_decompose(f: RadialField, max_atoms: int, delta: float,
                     N_grid=None, t_grid=None) -> Decomposition:
    """Peel off bubbles until the search value drops below ``delta``.

    Each step runs :func:`bubble_search` on the residual and removes the
    one-octave spectral band around the frequency driving the maximizer. Because the band
    projection commutes with the linear flow, translating to ``t*`` and back
    leaves the atom unchanged; ``t*`` is recorded as the atom's time offset.
    """
    from .evolution import mass
    if max_atoms < 1:
        raise InvalidArgumentError("max_atoms must be >= 1")
    if not delta > 0:
        raise InvalidArgumentError("delta must be positive")
    m0 = mass(f)
    residual = f
    atoms, proxies = [], []
    if not np.any(f.values):
        return Decomposition([], residual, m0, proxies)
    hit = bubble_search(residual, N_grid, t_grid)
    proxies.append(hit.value)
    while hit.value >= delta and len(atoms) < max_atoms:
        proj = octave_projector(residual.grid, driving_frequency(residual, hit.N))
        atom = apply_multiplier(residual, proj)
        rest = residual - atom
        ma, mr = mass(atom), mass(rest)
        if ma == 0:
            raise DecompositionError(f"no spectral mass near N={hit.N:g}")
        cross = mass(residual) - ma - mr
        atoms.append(ProfileAtom(hit.N, hit.t, atom, ma, hit.value, cross))
        residual = rest
        if not np.any(residual.values):
            proxies.append(0.0)
            break
        nxt = bubble_search(residual, N_grid, t_grid)
        if not nxt.value < hit.value:
            raise DecompositionError(
                f"search value did not decrease ({hit.value:.4g} -> {nxt.value:.4g})")
        hit = nxt
        proxies.append(hit.value)
    return Decomposition(atoms, residual, m0, proxies)
