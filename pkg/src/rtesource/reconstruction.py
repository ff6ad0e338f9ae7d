"""Non-iterative source reconstruction from boundary radiation data.

Pipeline: angular Fourier modes of the boundary data -> integrating
factor transform on the boundary -> Bukhgeim-Cauchy extension of the
L^2-analytic map into the disc -> convolution back to the two deepest
transport modes -> Poisson cascade up to modes u_{-1}, u_0 -> source
formula f = 2 Re(d_z u_{-1}) + (a - sigma_0) u_0.
"""

import time
from dataclasses import dataclass, field

import numpy as np

from . import aanalytic as aa
from .errors import DomainError
from .geometry import Grid, bilinear_sample, dbar, ddz, disc_quadrature_weights
from .media import kernel_multipliers
from .media import B2_CENTER, B2_RADIUS, RECT
from .poisson import DirichletSolver
from .transforms import h_values


@dataclass
class ReconstructionConfig:
    M: int = 8                 # scattering truncation order
    N: int = 64                # mode truncation
    grid_n: int = 128
    margin: float | None = None
    J_max: int | None = None   # None: correction series to full depth
    smoothing: bool = False    # smooth cascade rhs (discontinuous media)
    n_dirs_h: int = 360        # directions for the integrating factor
    h_step: float | None = None
    n_s: int | None = None
    mode_window: str = "cosine"  # apodization of the data modes

    def __post_init__(self):
        if not 1 <= self.M <= self.N - 2:
            raise DomainError("need 1 <= M <= N - 2")
        if self.mode_window not in ("cosine", "none"):
            raise DomainError(f"unknown mode window {self.mode_window!r}")


@dataclass
class ReconstructionResult:
    f_rec: np.ndarray                  # real source field (n, n)
    modes: dict                        # name -> (n, n) complex mode field
    diagnostics: dict = field(default_factory=dict)
    timing: dict = field(default_factory=dict)


def boundary_modes(bd, N):
    """Nonpositive angular modes g_0..g_{-N} per boundary node."""
    nd = bd.n_dirs
    if nd < 2 * N + 2:
        raise DomainError("need n_dirs >= 2N + 2 for N angular modes")
    spec = np.fft.fft(bd.values, axis=1) / nd
    idx = (-np.arange(N + 1)) % nd
    return spec[:, idx].T.copy()    # (N+1, n_boundary)


def mode_window_weights(N, kind="cosine"):
    """Apodization weights for data modes 0..N.

    The highest angular modes of measured boundary data carry mostly
    discretization ringing, which the analytic extension amplifies.  The
    cosine window keeps modes up to N/2 untouched and rolls off with a
    raised cosine that vanishes at mode N.
    """
    w = np.ones(N + 1)
    if kind == "none":
        return w
    half = N // 2
    j = np.arange(half, N + 1)
    w[half:] = np.cos(0.5 * np.pi * (j - half) / max(N - half, 1)) ** 2
    return w


def trace_transform(g, alpha_trace, M):
    """Boundary trace of the L^2-analytic map: e^{-G} L^M g."""
    return aa.conv_apply(alpha_trace, aa.left_shift(g, M))


def extend_interior(v_trace, boundary_angles, grid, J_max=None):
    """Bukhgeim-Cauchy extension to the trusted grid nodes."""
    pts = grid.points()
    zetas = pts[:, 0] + 1j * pts[:, 1]
    return aa.bukhgeim_cauchy(v_trace, boundary_angles, zetas, J_max=J_max,
                              max_radius=1.0 - grid.margin)


def recover_deep_modes(v_field, beta_coeffs):
    """u_{-M-n} = sum_k beta_k v_{-n-k}; rows 0,1 seed the cascade."""
    return aa.conv_apply(beta_coeffs, v_field)


def _periodic_interp(angles, samples):
    """Linear periodic interpolant of boundary samples over the angle."""
    ang = np.concatenate([angles, [2.0 * np.pi]])
    val = np.concatenate([samples, samples[:1]])

    def fn(a):
        a = np.asarray(a) % (2.0 * np.pi)
        return np.interp(a, ang, val.real) + 1j * np.interp(a, ang, val.imag)
    return fn


def fill_margin(grid, trusted_values, boundary_fn):
    """Full-disc mode field: trusted nodes + radial blend in the margin.

    trusted_values holds samples at grid.mask nodes.  Margin-band nodes
    interpolate linearly in radius between the last ring that has a
    fully trusted bilinear stencil and the boundary data on the circle.
    """
    full = np.zeros((grid.n, grid.n), dtype=complex)
    full[grid.mask] = trusted_values
    band = grid.inside & ~grid.mask
    if not band.any():
        return full
    r_t = 1.0 - grid.margin - 1.5 * grid.spacing
    bx, by = grid.xx[band], grid.yy[band]
    r = np.hypot(bx, by)
    phi = np.arctan2(by, bx)
    inner = bilinear_sample(full, grid, r_t * np.cos(phi), r_t * np.sin(phi))
    outer = boundary_fn(phi)
    t = np.clip((r - r_t) / (1.0 - r_t), 0.0, 1.0)
    full[band] = (1.0 - t) * inner + t * outer
    return full


def smooth3(f, grid):
    """One 3-point averaging pass per axis, restricted to disc nodes."""
    out = np.array(f, dtype=complex)
    inside = grid.inside
    for axis in (0, 1):
        fp = np.roll(out, -1, axis=axis)
        fm = np.roll(out, 1, axis=axis)
        ip = np.roll(inside, -1, axis=axis)
        im = np.roll(inside, 1, axis=axis)
        ok = inside & ip & im
        out = np.where(ok, (fp + out + fm) / 3.0, out)
    return out


def poisson_cascade(u_seed1, u_seed2, g, medium, M, grid, solver=None,
                    boundary_angles=None, smoothing=False):
    """Successive Dirichlet-Poisson solves for modes u_{-M+1} .. u_0.

    u_seed1 = u_{-M}, u_seed2 = u_{-M-1} as full-grid fields; g holds
    the boundary modes (row m is g_{-m}).  Level j solves

        Lap u_{-M+j} = -4 d^2 u_{-M+j-2} - 4 d[(a - sigma_{M-j+1}) u_{-M+j-1}]

    with Dirichlet data g_{-M+j}.
    """
    att, kernel = medium.attenuation, medium.kernel
    sig = kernel_multipliers(kernel, M)
    if solver is None:
        solver = DirichletSolver(grid)
    a = att(grid.xx, grid.yy)
    modes = {-M: u_seed1, -M - 1: u_seed2}
    prev2, prev1 = u_seed2, u_seed1
    for j in range(1, M + 1):
        d2 = ddz(ddz(prev2, grid), grid)
        d1 = ddz((a - sig[M - j + 1]) * prev1, grid)
        if smoothing:
            d2 = smooth3(d2, grid)
            d1 = smooth3(d1, grid)
        rhs = -4.0 * d2 - 4.0 * d1
        bfn = _periodic_interp(boundary_angles, g[M - j])
        sol = solver.solve(rhs, bfn)
        modes[-M + j] = sol
        prev2, prev1 = prev1, sol
    return modes


def assemble_source(u0, um1, medium, grid):
    """f = 2 Re(d_z u_{-1}) + (a - sigma_0) u_0, plus imaginary residue."""
    att, kernel = medium.attenuation, medium.kernel
    a = att(grid.xx, grid.yy)
    sig0 = kernel_multipliers(kernel, 0)[0]
    f = 2.0 * ddz(um1, grid) + (a - sig0) * u0
    f = np.where(grid.inside, f, 0.0)
    return np.real(f), np.imag(f)


def reconstruct(bd, medium, config, diagnostics_level=1):
    """Full pipeline from boundary data to the reconstructed source."""
    t0 = time.perf_counter()
    timing = {}
    grid = Grid.make(config.grid_n, margin=config.margin)
    att = medium.attenuation
    M, N = config.M, config.N

    g = boundary_modes(bd, N)
    g *= mode_window_weights(N, config.mode_window)[:, None]
    nb = bd.n_boundary
    beta_angles = bd.boundary_angles
    timing["modes"] = time.perf_counter() - t0

    # integrating factor on trusted grid nodes and boundary nodes
    t1 = time.perf_counter()
    step = config.h_step
    if step is None:
        band = att.epsilon if att.variant == "smooth" else grid.spacing
        step = min(grid.spacing, band) / 4.0
    n_s = config.n_s or 4 * grid.n
    pts_grid = grid.points()
    pts_bnd = np.stack([np.cos(beta_angles), np.sin(beta_angles)], axis=1)
    h_all, _ = h_values(att, np.vstack([pts_grid, pts_bnd]), config.n_dirs_h,
                        n_s=n_s, step=step)
    h_grid, h_bnd = h_all[:len(pts_grid)], h_all[len(pts_grid):]
    alpha_bnd, diag_a = aa.exp_h_coeffs(h_bnd, -1, N)
    beta_grid, diag_b = aa.exp_h_coeffs(h_grid, +1, N)
    timing["integrating_factor"] = time.perf_counter() - t1

    t2 = time.perf_counter()
    v_trace = trace_transform(g, alpha_bnd, M)
    v_field = extend_interior(v_trace, beta_angles, grid, J_max=config.J_max)
    timing["extension"] = time.perf_counter() - t2

    t3 = time.perf_counter()
    beta_masked = beta_grid
    deep = recover_deep_modes(v_field, beta_masked)
    bfn_M = _periodic_interp(beta_angles, g[M])
    bfn_M1 = _periodic_interp(beta_angles, g[M + 1])
    uM = fill_margin(grid, deep[0], bfn_M)
    uM1 = fill_margin(grid, deep[1], bfn_M1)
    timing["deep_modes"] = time.perf_counter() - t3

    t4 = time.perf_counter()
    solver = DirichletSolver(grid)
    modes = poisson_cascade(uM, uM1, g, medium, M, grid, solver=solver,
                            boundary_angles=beta_angles,
                            smoothing=config.smoothing)
    timing["cascade"] = time.perf_counter() - t4

    f_rec, f_imag = assemble_source(modes[0], modes[-1], medium, grid)
    timing["total"] = time.perf_counter() - t0

    diagnostics = {
        "neg_mode_mass_h_boundary": diag_a["neg_mode_mass_h"],
        "neg_mode_mass_h_grid": diag_b["neg_mode_mass_h"],
        "imag_residual_rel": float(
            np.linalg.norm(f_imag) / max(np.linalg.norm(f_rec), 1e-30)),
    }
    if diagnostics_level >= 1:
        diagnostics["alpha_beta_residual"] = float(
            _alpha_beta_residual(h_grid, N))
        diagnostics["l2_analytic_residual"] = float(
            _analyticity_residual(v_field, grid))
    mode_fields = {str(k): v for k, v in modes.items()}
    return ReconstructionResult(f_rec=f_rec, modes=mode_fields,
                                diagnostics=diagnostics, timing=timing)


def _alpha_beta_residual(h_vals, N, k_max=None):
    """Node-wise max of |(alpha * beta)_k - delta_k0| for k <= k_max."""
    alpha, _ = aa.exp_h_coeffs(h_vals, -1, N)
    beta, _ = aa.exp_h_coeffs(h_vals, +1, N)
    k_max = N // 2 if k_max is None else k_max
    worst = 0.0
    for k in range(k_max + 1):
        conv = sum(alpha[m] * beta[k - m] for m in range(k + 1))
        tgt = 1.0 if k == 0 else 0.0
        worst = max(worst, float(np.max(np.abs(conv - tgt))))
    return worst


def _analyticity_residual(v_field, grid, n_modes=4):
    """FD residual of dbar v_{-n} + d v_{-n-2} on well-interior nodes."""
    full = np.zeros((v_field.shape[0], grid.n, grid.n), dtype=complex)
    full[:, grid.mask] = v_field
    # only trust nodes whose 5-point stencil is fully inside the mask
    core = grid.mask.copy()
    for axis in (0, 1):
        core &= np.roll(grid.mask, 1, axis) & np.roll(grid.mask, -1, axis)
    scale = max(float(np.max(np.abs(v_field))), 1e-30)
    worst = 0.0
    for n in range(min(n_modes, v_field.shape[0] - 2)):
        res = dbar(full[n], grid) + ddz(full[n + 2], grid)
        worst = max(worst, float(np.max(np.abs(res[core]))))
    return worst / scale


def error_metrics(f_rec, f_true, grid, erosion=0.05, n_section=None):
    """Relative L2 error, eroded plateau means, and a diameter section.

    f_true may be a callable (x, y) -> value or a grid array.  The
    section runs along the diameter y = -sqrt(3) x through the disc
    B2 of the benchmark phantom.
    """
    if callable(f_true):
        ft = np.where(grid.inside, f_true(grid.xx, grid.yy), 0.0)
    else:
        ft = np.asarray(f_true)
    w = disc_quadrature_weights(grid)
    num = np.sum((f_rec - ft) ** 2 * w)
    den = np.sum(ft ** 2 * w)
    rel_l2 = float(np.sqrt(num / den)) if den > 0 else float(np.sqrt(num))

    x0, x1, y0, y1 = RECT
    rect_mask = ((grid.xx > x0 + erosion) & (grid.xx < x1 - erosion)
                 & (grid.yy > y0 + erosion) & (grid.yy < y1 - erosion))
    b2_mask = (np.hypot(grid.xx - B2_CENTER[0], grid.yy - B2_CENTER[1])
               < B2_RADIUS - erosion)
    plateau = {"rect": float(np.mean(f_rec[rect_mask])),
               "b2": float(np.mean(f_rec[b2_mask]))}

    n_section = n_section or 2 * grid.n
    t = np.linspace(-1.0, 1.0, n_section)
    dx, dy = 0.5, -np.sqrt(3.0) / 2.0
    px, py = t * dx, t * dy
    sec_rec = bilinear_sample(f_rec, grid, px, py)
    sec_true = bilinear_sample(ft, grid, px, py)
    return {"rel_l2": rel_l2, "plateau_means": plateau,
            "cross_section": (t, sec_rec, sec_true)}
