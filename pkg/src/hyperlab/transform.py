r"""Radial Fourier transforms on H^3 and R^3 through one sine kernel.

Both geometries act on the conjugated profile ``g(r) = sigma(r) f(r)``;
the transform is a type-I discrete sine transform of ``g``:

.. math::

    \tilde f(\lambda_m) = \frac{c_0}{\lambda_m} \sum_j h\, \sigma(r_j) f(r_j)
        \sin(\lambda_m r_j), \qquad c_0 = \sqrt{2/\pi}.

With this ``c_0`` the Plancherel identity
``sum_m (pi/r_max) 4 pi lambda_m^2 |f~_m|^2 = <f, f>`` holds with constant 1,
and on R^3 the coefficients coincide with the unitary 3-d Fourier transform
of a radial function.
"""

from __future__ import annotations

import numpy as np
import scipy.fft

from .geometry import (Geometry, RadialField, RadialGrid, SpectralField,
                       dual_grid, make_grid, require_geometry)

C0 = np.sqrt(2.0 / np.pi)


def sine_analysis(g: np.ndarray, grid: RadialGrid) -> np.ndarray:
    """``G_m = sum_j h g_j sin(lambda_m r_j)`` along the last axis."""
    return (0.5 * grid.h) * scipy.fft.dst(g, type=1, axis=-1)


def sine_synthesis(G: np.ndarray, grid: RadialGrid) -> np.ndarray:
    """Exact inverse of :func:`sine_analysis`."""
    return scipy.fft.dst(G, type=1, axis=-1) / grid.r_max


def sine_amplitudes(f: RadialField) -> np.ndarray:
    return sine_analysis(f.grid.sigma * f.values, f.grid)


def from_sine_amplitudes(G: np.ndarray, grid: RadialGrid) -> np.ndarray:
    return sine_synthesis(G, grid) / grid.sigma


def forward(f: RadialField) -> SpectralField:
    sg = dual_grid(f.grid)
    G = sine_amplitudes(f)
    return SpectralField(sg, C0 * G / sg.modes)


def inverse(F: SpectralField) -> RadialField:
    grid = F.grid.grid
    G = F.coeffs * F.grid.modes / C0
    return RadialField(grid, from_sine_amplitudes(G, grid))


def apply_multiplier(f: RadialField, multiplier) -> RadialField:
    """Apply a diagonal spectral multiplier (one value per mode)."""
    G = sine_amplitudes(f)
    return RadialField(f.grid, from_sine_amplitudes(G * multiplier, f.grid))


def origin_value_from_amplitudes(G: np.ndarray, grid: RadialGrid):
    """Value at r = 0 via sin(lambda r)/sigma(r) -> lambda (sigma'(0) = 1)."""
    lam = dual_grid(grid).modes
    return (2.0 / grid.r_max) * (G @ lam)


def origin_value(f: RadialField) -> complex:
    return complex(origin_value_from_amplitudes(sine_amplitudes(f), f.grid))


def evaluate(f: RadialField, points) -> np.ndarray:
    """Band-limited evaluation of ``f`` at arbitrary radii in ``[0, r_max]``.

    Points outside the grid interval evaluate to zero.
    """
    grid = f.grid
    pts = np.atleast_1d(np.asarray(points, dtype=float))
    out = np.zeros(pts.shape, dtype=complex)
    G = sine_amplitudes(f)
    lam = dual_grid(grid).modes
    inside = (pts >= 0) & (pts <= grid.r_max)
    at_origin = inside & (pts == 0)
    regular = inside & ~at_origin
    if np.any(regular):
        rr = pts[regular]
        g = (2.0 / grid.r_max) * (np.sin(np.outer(rr, lam)) @ G)
        out[regular] = g / grid.geometry.sigma(rr)
    if np.any(at_origin):
        out[at_origin] = origin_value_from_amplitudes(G, grid)
    return out


def radial_derivative(f: RadialField) -> RadialField:
    """Spectral ``d/dr`` of ``f = g / sigma``."""
    grid = f.grid
    G = sine_amplitudes(f)
    lam = dual_grid(grid).modes
    # sum_m G_m lam_m cos(lam_m r_j) via a DCT-I on the padded mode vector
    padded = np.zeros(grid.n + 2, dtype=complex)
    padded[1:-1] = G * lam
    gp = scipy.fft.dct(padded, type=1)[1:-1] / grid.r_max
    g = sine_synthesis(G, grid)
    r = grid.nodes
    if grid.geometry is Geometry.HYPERBOLIC3:
        dsigma = np.cosh(r)
    else:
        dsigma = np.ones_like(r)
    s = grid.sigma
    return RadialField(grid, (gp * s - g * dsigma) / s**2)


def _cov_factor(grid: RadialGrid) -> np.ndarray:
    r = grid.nodes
    return np.sinh(r) / r


def cov_to_euclidean(u: RadialField, t: float) -> RadialField:
    """``w(r) = e^{it} (sinh r / r) u(r)`` on the matching Euclidean grid."""
    require_geometry(u, Geometry.HYPERBOLIC3, "cov_to_euclidean")
    egrid = make_grid(Geometry.EUCLIDEAN3, u.grid.r_max, u.grid.n)
    return RadialField(egrid, np.exp(1j * t) * _cov_factor(u.grid) * u.values)


def cov_from_euclidean(w: RadialField, t: float) -> RadialField:
    """Inverse of :func:`cov_to_euclidean`."""
    require_geometry(w, Geometry.EUCLIDEAN3, "cov_from_euclidean")
    hgrid = make_grid(Geometry.HYPERBOLIC3, w.grid.r_max, w.grid.n)
    return RadialField(hgrid, np.exp(-1j * t) * w.values / _cov_factor(hgrid))
