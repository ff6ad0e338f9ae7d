"""Dirichlet Poisson solver on the unit disc.

Second-order finite differences with the Shortley-Weller treatment of
the irregular boundary: stencil legs that cross the circle are cut at
the intersection and pick up the Dirichlet value there.  One sparse
factorization per grid is cached and reused across the many right-hand
sides of the mode cascade.
"""

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import DomainError, SolverError


def _cut_fraction(x0, y0, dx, dy, h):
    """Fraction t in (0, 1] of step (dx,dy)*h from (x0,y0) to the circle."""
    a = dx * dx + dy * dy
    b = 2.0 * (x0 * dx + y0 * dy) * h
    c = x0 * x0 + y0 * y0 - 1.0
    disc = b * b - 4.0 * a * h * h * c
    t = (-b + np.sqrt(np.maximum(disc, 0.0))) / (2.0 * a * h * h)
    return np.clip(t, 1e-6, 1.0)


class DirichletSolver:
    """Factorized Shortley-Weller Laplacian for one grid."""

    def __init__(self, grid):
        if not grid.inside.any():
            raise DomainError("grid has no interior disc nodes")
        self.grid = grid
        n, h = grid.n, grid.spacing
        inside = grid.inside
        idx = -np.ones((n, n), dtype=int)
        ii, jj = np.nonzero(inside)
        idx[ii, jj] = np.arange(ii.size)
        self.index = idx
        self.nodes = (ii, jj)
        m = ii.size

        rows, cols, vals = [], [], []
        diag = np.zeros(m)
        # boundary couplings: (unknown row, weight, angle of hit point)
        b_rows, b_wts, b_ang = [], [], []
        x = grid.x
        steps = ((1, 0), (-1, 0), (0, 1), (0, -1))
        frac = {}
        for dx, dy in steps:
            ni, nj = ii + dx, jj + dy
            ok = (ni >= 0) & (ni < n) & (nj >= 0) & (nj < n)
            nb_in = np.zeros(m, dtype=bool)
            nb_in[ok] = inside[ni[ok], nj[ok]]
            t = np.ones(m)
            cut = ~nb_in
            t[cut] = _cut_fraction(x[ii[cut]], x[jj[cut]], dx, dy, h)
            frac[(dx, dy)] = (t, nb_in, ni, nj)
        for axis, (sp_, sm_) in enumerate((((1, 0), (-1, 0)),
                                           ((0, 1), (0, -1)))):
            tp, inp, nip, njp = frac[sp_]
            tm, inm, nim, njm = frac[sm_]
            hp, hm = tp * h, tm * h
            cp = 2.0 / (hp * (hp + hm))
            cm = 2.0 / (hm * (hp + hm))
            diag -= cp + cm
            for (t, nb_in, ni, nj, coef, d) in ((tp, inp, nip, njp, cp, sp_),
                                                (tm, inm, nim, njm, cm, sm_)):
                r = np.nonzero(nb_in)[0]
                rows.append(r)
                cols.append(idx[ni[r], nj[r]])
                vals.append(coef[r])
                rb = np.nonzero(~nb_in)[0]
                hx = x[ii[rb]] + d[0] * t[rb] * h
                hy = x[jj[rb]] + d[1] * t[rb] * h
                b_rows.append(rb)
                b_wts.append(coef[rb])
                b_ang.append(np.arctan2(hy, hx) % (2.0 * np.pi))
        rows.append(np.arange(m))
        cols.append(np.arange(m))
        vals.append(diag)
        A = sp.csc_matrix((np.concatenate(vals),
                           (np.concatenate(rows), np.concatenate(cols))),
                          shape=(m, m))
        self._lu = spla.splu(A)
        self._A = A
        self._b_rows = np.concatenate(b_rows)
        self._b_wts = np.concatenate(b_wts)
        self._b_ang = np.concatenate(b_ang)

    def solve(self, rhs, boundary_fn, check_residual=1e-10):
        """Solve Lap u = rhs in the disc with u = boundary_fn(angle) on it.

        rhs is an (n, n) array (complex allowed; components solved
        independently); returns an (n, n) array, zero outside the disc
        with the circle values implied by boundary_fn.
        """
        ii, jj = self.nodes
        b = np.asarray(rhs)[ii, jj].astype(complex)
        bc = np.asarray(boundary_fn(self._b_ang), dtype=complex)
        np.subtract.at(b, self._b_rows, self._b_wts * bc)
        sol = self._lu.solve(b.real) + 1j * self._lu.solve(b.imag)
        res = np.linalg.norm(self._A @ sol - b)
        scale = max(np.linalg.norm(b), 1.0)
        if res / scale > check_residual * 1e4:
            raise SolverError("Poisson solve residual too large",
                              residual=res / scale)
        out = np.zeros((self.grid.n, self.grid.n), dtype=complex)
        out[ii, jj] = sol
        return out


def solve_dirichlet(grid, rhs, boundary_fn):
    """One-shot Dirichlet solve (builds and discards the factorization)."""
    return DirichletSolver(grid).solve(rhs, boundary_fn)
