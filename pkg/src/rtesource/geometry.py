"""Unit-disc geometry: boundary sampling, cartesian grids, ray exits.

The domain is always the closed unit disc; the boundary circle carries
uniformly spaced sample nodes e^{i beta_j}.  Spatial fields live on a
cartesian grid over [-1,1]^2, masked to the disc.  A margin band next to
the circle is excluded from the set of nodes where boundary-integral
evaluations are trusted.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError


@dataclass(frozen=True)
class DiscDomain:
    """Unit disc with n_boundary uniform boundary samples."""

    n_boundary: int
    radius: float = 1.0

    def __post_init__(self):
        if self.n_boundary < 8 or self.n_boundary % 2 != 0:
            raise DomainError("n_boundary must be even and >= 8")
        if self.radius != 1.0:
            raise DomainError("only the unit disc is supported")

    @property
    def boundary_angles(self):
        return 2.0 * np.pi * np.arange(self.n_boundary) / self.n_boundary


def boundary_nodes(domain):
    """Boundary points e^{i beta_j} and their angles, beta_0 = 0.

    Returns (points, angles) with points as an (n, 2) array on |z| = 1.
    """
    beta = domain.boundary_angles
    pts = np.stack([np.cos(beta), np.sin(beta)], axis=1)
    return pts, beta


def exit_distance(z, theta, tol=1e-9):
    """Distance from z along unit direction theta to the unit circle.

    Closed form tau = -z.theta + sqrt(1 - |z|^2 + (z.theta)^2).  Accepts
    scalars or broadcasting arrays in the last axis of shape (..., 2).
    """
    z = np.asarray(z, dtype=float)
    theta = np.asarray(theta, dtype=float)
    zz = np.sum(z * z, axis=-1)
    if np.any(zz > (1.0 + tol) ** 2):
        raise DomainError("point outside the closed unit disc")
    zt = np.sum(z * theta, axis=-1)
    disc = np.maximum(1.0 - zz + zt * zt, 0.0)
    return -zt + np.sqrt(disc)


@dataclass
class Grid:
    """Cartesian grid on [-1,1]^2 masked to the unit disc.

    mask marks nodes with |z| <= 1 - margin (trusted for interior
    boundary-integral evaluation); inside marks all disc nodes |z| < 1
    used by the Poisson solver.
    """

    n: int
    spacing: float
    margin: float
    x: np.ndarray
    y: np.ndarray
    xx: np.ndarray = field(repr=False)
    yy: np.ndarray = field(repr=False)
    mask: np.ndarray = field(repr=False)
    inside: np.ndarray = field(repr=False)

    @classmethod
    def make(cls, n, margin=None):
        if n < 4:
            raise DomainError("grid needs at least 4 nodes per axis")
        x = np.linspace(-1.0, 1.0, n)
        spacing = x[1] - x[0]
        if margin is None:
            margin = 2.0 * spacing
        xx, yy = np.meshgrid(x, x, indexing="ij")
        rr = np.hypot(xx, yy)
        mask = rr <= 1.0 - margin
        inside = rr < 1.0
        if not mask.any():
            raise DomainError("mask is empty; margin too large")
        return cls(n=n, spacing=spacing, margin=margin, x=x, y=x,
                   xx=xx, yy=yy, mask=mask, inside=inside)

    @property
    def r(self):
        return np.hypot(self.xx, self.yy)

    def points(self, mask=None):
        """Masked node coordinates as an (m, 2) array (row-major order)."""
        if mask is None:
            mask = self.mask
        return np.stack([self.xx[mask], self.yy[mask]], axis=1)


def disc_quadrature_weights(grid, subsamples=16):
    """Cell weights for integrals over the unit disc.

    Interior cells get spacing^2; cells cut by the circle get the inside
    area fraction estimated by subsampling.  Returned as an (n, n) array
    aligned with the grid nodes (node-centered cells).
    """
    h = grid.spacing
    r = grid.r
    w = np.where(r <= 1.0 + h, h * h, 0.0)
    # cells that may straddle the circle: node within h of the boundary
    band = np.abs(r - 1.0) <= 0.75 * h * np.sqrt(2.0) + 1e-12
    bi, bj = np.nonzero(band)
    if bi.size:
        t = (np.arange(subsamples) + 0.5) / subsamples - 0.5
        sx, sy = np.meshgrid(t * h, t * h, indexing="ij")
        px = grid.xx[bi, bj][:, None, None] + sx[None]
        py = grid.yy[bi, bj][:, None, None] + sy[None]
        frac = np.mean(px * px + py * py <= 1.0, axis=(1, 2))
        w[bi, bj] = frac * h * h
    w[r > 1.0 + h] = 0.0
    # fields only carry values at inside nodes: hand the overlap mass of
    # outside nodes to their nearest inside neighbor so sum(w) stays pi
    out_i, out_j = np.nonzero((r > 1.0) & (w > 0))
    for i, j in zip(out_i, out_j):
        best, bd2 = None, np.inf
        for di in (-1, 0, 1):
            for dj in (-1, 0, 1):
                ii2, jj2 = i + di, j + dj
                if 0 <= ii2 < grid.n and 0 <= jj2 < grid.n and \
                        r[ii2, jj2] <= 1.0:
                    d2 = di * di + dj * dj
                    if d2 < bd2:
                        best, bd2 = (ii2, jj2), d2
        if best is not None:
            w[best] += w[i, j]
        w[i, j] = 0.0
    return w


def grid_diff_x(f, grid):
    """d/dx by centered differences, one-sided next to the disc edge."""
    return _masked_diff(f, grid, axis=0)


def grid_diff_y(f, grid):
    """d/dy by centered differences, one-sided next to the disc edge."""
    return _masked_diff(f, grid, axis=1)


def _masked_diff(f, grid, axis):
    h = grid.spacing
    inside = grid.inside
    f = np.asarray(f)
    out = np.zeros_like(f)
    shp = np.roll
    fp = shp(f, -1, axis=axis)
    fm = shp(f, 1, axis=axis)
    ip = shp(inside, -1, axis=axis)
    im = shp(inside, 1, axis=axis)
    # wrap-around rows/columns are never inside the disc, so the rolled
    # masks are safe to use directly
    both = inside & ip & im
    only_p = inside & ip & ~im
    only_m = inside & ~ip & im
    out[both] = (fp[both] - fm[both]) / (2.0 * h)
    out[only_p] = (fp[only_p] - f[only_p]) / h
    out[only_m] = (f[only_m] - fm[only_m]) / h
    return out


def dbar(f, grid):
    """Cauchy-Riemann operator (d/dx + i d/dy)/2 on grid fields."""
    return 0.5 * (grid_diff_x(f, grid) + 1j * grid_diff_y(f, grid))


def ddz(f, grid):
    """Cauchy-Riemann operator (d/dx - i d/dy)/2 on grid fields."""
    return 0.5 * (grid_diff_x(f, grid) - 1j * grid_diff_y(f, grid))


def bilinear_sample(f, grid, px, py, fill=0.0):
    """Bilinear interpolation of a grid field at arbitrary points."""
    n, h = grid.n, grid.spacing
    gx = (np.asarray(px) + 1.0) / h
    gy = (np.asarray(py) + 1.0) / h
    i0 = np.clip(np.floor(gx).astype(int), 0, n - 2)
    j0 = np.clip(np.floor(gy).astype(int), 0, n - 2)
    tx = np.clip(gx - i0, 0.0, 1.0)
    ty = np.clip(gy - j0, 0.0, 1.0)
    f = np.asarray(f)
    v = (f[i0, j0] * (1 - tx) * (1 - ty)
         + f[i0 + 1, j0] * tx * (1 - ty)
         + f[i0, j0 + 1] * (1 - tx) * ty
         + f[i0 + 1, j0 + 1] * tx * ty)
    tol = 1e-9 * n
    out_of_box = ((gx < -tol) | (gx > n - 1 + tol)
                  | (gy < -tol) | (gy > n - 1 + tol))
    if np.any(out_of_box):
        v = np.where(out_of_box, fill, v)
    return v
