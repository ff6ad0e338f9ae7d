"""Mode-sequence algebra for sequence-valued (L^2-analytic) maps.

A mode sequence stores the nonpositive angular Fourier modes of a real
angular field: array index j holds mode -j, so arrays have shape
(N+1, ...) with the trailing axes running over spatial samples.

Conventions fixed here and asserted by tests:
  * angular coefficients come from FFT / n_dirs, so a field
    u(theta) = sum_n c_n e^{in theta} has c_n = fft(u)[n mod n_dirs]/n_dirs;
  * the integrating operators act by out[j] = sum_k c[k] * u[j + k]
    (coefficients multiply deeper modes, the left-shift structure);
  * the l2 pairing is <u, w> = sum_m u_m conj(w_m).
"""

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .geometry import dbar, ddz, disc_quadrature_weights, grid_diff_x, grid_diff_y


def exp_h_coeffs(h_vals, sign, N, oversample=8):
    """Angular Fourier coefficients 0..N of e^{sign*h} per sample point.

    h is first projected onto its nonnegative angular modes (its exact
    counterpart has none below zero); the discarded negative-mode mass
    of h and of the exponential are returned as diagnostics.  The
    exponential is evaluated on an `oversample`-times finer angular grid
    (spectral zero-padding): e^{h} has a much wider one-sided spectrum
    than h itself, and sampling it at the raw direction count would
    alias the tail into the retained coefficients.

    Returns (coeffs with shape (N+1, n_points), diagnostics dict).
    """
    h_vals = np.asarray(h_vals)
    nd = h_vals.shape[-1]
    if nd < 2 * N:
        raise DomainError("need at least 2N directions for N coefficients")
    spec = np.fft.fft(h_vals, axis=-1) / nd
    neg_h = float(np.max(np.abs(spec[..., nd // 2 + 1:]))) if nd > 2 else 0.0
    spec[..., nd // 2 + 1:] = 0.0
    nf = oversample * nd
    pad = np.zeros(h_vals.shape[:-1] + (nf,), dtype=complex)
    pad[..., :nd // 2 + 1] = spec[..., :nd // 2 + 1]
    h_fine = np.fft.ifft(pad * nf, axis=-1)
    e = np.exp(sign * h_fine)
    espec = np.fft.fft(e, axis=-1) / nf
    neg_e = float(np.max(np.abs(espec[..., nf // 2 + 1:]))) if nf > 2 else 0.0
    coeffs = np.moveaxis(espec[..., :N + 1], -1, 0).copy()
    return coeffs, {"neg_mode_mass_h": neg_h, "neg_mode_mass_exp": neg_e}


def conv_apply(coeffs, u):
    """One-sided convolution (e^{+-G} u): out[j] = sum_k c[k] u[j+k].

    Output mode j draws on the deeper input modes only; entries past the
    common truncation are treated as zero.
    """
    coeffs = np.asarray(coeffs)
    u = np.asarray(u)
    N = u.shape[0]
    trailing = np.broadcast_shapes(coeffs.shape[1:], u.shape[1:])
    out = np.zeros((N,) + trailing, dtype=np.result_type(coeffs, u))
    for j in range(N):
        kmax = min(coeffs.shape[0], N - j)
        acc = 0.0
        for k in range(kmax):
            acc = acc + coeffs[k] * u[j + k]
        out[j] = acc
    return out


def left_shift(u, m):
    """Drop the m leading modes: out[j] = u[j + m]."""
    u = np.asarray(u)
    if not 0 <= m <= u.shape[0]:
        raise DomainError("shift exceeds the sequence truncation")
    return u[m:].copy()


def bukhgeim_cauchy(trace, boundary_angles, zetas, J_max=None,
                    max_radius=1.0, chunk=1024):
    """Interior modes of an L^2-analytic map from its boundary trace.

    trace has shape (N+1, n_boundary) holding modes v_0..v_{-N} at the
    uniform boundary nodes e^{i beta}.  zetas is a complex array of
    evaluation points.  For each n the classical Cauchy integral of mode
    -n is corrected by the series over deeper modes -n-2j with kernel
    (conj(z - zeta)/(z - zeta))^j; by default the series runs to the
    sequence truncation.
    """
    trace = np.asarray(trace, dtype=complex)
    zetas = np.atleast_1d(np.asarray(zetas, dtype=complex))
    if np.any(np.abs(zetas) > max_radius + 1e-12):
        raise DomainError("evaluation point outside the trusted disc")
    N = trace.shape[0] - 1
    nb = trace.shape[1]
    zb = np.exp(1j * np.asarray(boundary_angles))
    dz = 1j * zb * (2.0 * np.pi / nb)  # trapezoid weights for dz
    out = np.empty((N + 1, zetas.size), dtype=complex)
    for lo in range(0, zetas.size, chunk):
        z = zetas[lo:lo + chunk][:, None]      # (m, 1)
        diff = zb[None, :] - z                 # (m, nb)
        w = dz[None, :] / diff
        bracket = w - np.conj(w)
        rho = np.conj(diff) / diff
        # s[n] = sum_{j>=1} trace[n+2j] rho^j, built by the two-step
        # downward recurrence s[n] = rho (trace[n+2] + s[n+2])
        s_even = np.zeros_like(rho)
        s_odd = np.zeros_like(rho)
        pref = 1.0 / (2.0 * np.pi * 1j)
        for n in range(N, -1, -1):
            if J_max is None or J_max >= (N - n + 1) // 2:
                if n + 2 <= N:
                    if (N - n) % 2 == 0:
                        s_even = rho * (trace[n + 2][None, :] + s_even)
                        s = s_even
                    else:
                        s_odd = rho * (trace[n + 2][None, :] + s_odd)
                        s = s_odd
                else:
                    s = np.zeros_like(rho)
            else:
                s = np.zeros_like(rho)
                p = rho.copy()
                for j in range(1, J_max + 1):
                    if n + 2 * j > N:
                        break
                    s += trace[n + 2 * j][None, :] * p
                    p = p * rho
            cauchy = (w * trace[n][None, :]).sum(axis=1)
            corr = (bracket * s).sum(axis=1)
            out[n, lo:lo + chunk] = pref * (cauchy + corr)
    return out


def sequence_norm(u_field, grid, p=0, q=0, weights=None):
    """Weighted sequence norm (sum_j (1+j^2)^p ||u_{-j}||_{H^q}^2)^{1/2}.

    u_field has shape (N+1, n, n) on the grid; integrals use disc
    quadrature weights.
    """
    u_field = np.asarray(u_field)
    if weights is None:
        weights = disc_quadrature_weights(grid)
    total = 0.0
    for j in range(u_field.shape[0]):
        f = u_field[j]
        sq = np.sum(np.abs(f) ** 2 * weights)
        if q == 1:
            sq += np.sum(np.abs(grid_diff_x(f, grid)) ** 2 * weights)
            sq += np.sum(np.abs(grid_diff_y(f, grid)) ** 2 * weights)
        total += (1.0 + j * j) ** p * sq
    return float(np.sqrt(total))


def boundary_norm(g_trace, p=0):
    """Double-Fourier boundary norm (squared sum over (1+j^2)^p (1+k^2)^{1/2}).

    g_trace has shape (N+1, n_boundary); the k-modes come from FFT in
    the boundary angle normalized so a single unit double mode scores
    exactly (1+j^2)^p (1+k^2)^{1/2}.  Returns the norm (square root).
    """
    g_trace = np.asarray(g_trace, dtype=complex)
    nb = g_trace.shape[1]
    coeffs = np.fft.fft(g_trace, axis=1) / nb
    k = np.fft.fftfreq(nb, d=1.0 / nb)
    wk = np.sqrt(1.0 + k * k)
    j = np.arange(g_trace.shape[0])
    wj = (1.0 + j * j) ** p
    total = np.sum(wj[:, None] * wk[None, :] * np.abs(coeffs) ** 2)
    return float(np.sqrt(total))


def tangential_derivative(trace):
    """d/d(arc length) of boundary samples by FFT (unit circle: d/dbeta)."""
    trace = np.asarray(trace, dtype=complex)
    nb = trace.shape[-1]
    k = np.fft.fftfreq(nb, d=1.0 / nb)
    return np.fft.ifft(np.fft.fft(trace, axis=-1) * (1j * k), axis=-1)


def energy_identity_residual(v_field, v_trace, grid, f_field=None,
                             weights=None):
    """Both sides of the B=0 energy identity and their relative gap.

    lhs: integral over the disc of sum_j |d_z v_{-j}|^2.
    rhs: source terms plus the boundary term
         (i/2) oint sum_j <L^{2j} v, d_s L^{2j} v> ds,
    where shifted sums collapse to (1 + floor(m/2)) weights per mode.
    Returns (lhs, rhs, |lhs - rhs| / max(lhs, 1)).
    """
    v_field = np.asarray(v_field, dtype=complex)
    N = v_field.shape[0] - 1
    if weights is None:
        weights = disc_quadrature_weights(grid)
    dv = np.stack([ddz(v_field[j], grid) for j in range(N + 1)])
    lhs = float(sum(np.sum(np.abs(dv[j]) ** 2 * weights)
                    for j in range(N + 1)))

    rhs = 0.0
    if f_field is not None:
        f_field = np.asarray(f_field, dtype=complex)
        # -2 sum_{j>=1} Re <L^{2j} dv, L^{2j-2} f>
        cross = 0.0
        for j in range(1, N // 2 + 1):
            for m in range(0, N + 1 - 2 * j):
                cross += np.sum(np.real(
                    dv[m + 2 * j] * np.conj(f_field[m + 2 * j - 2])) * weights)
        rhs += -2.0 * cross
        # sum_j ||L^{2j} f||^2 -> (1 + floor(m/2)) weights
        m = np.arange(N + 1)
        wmode = 1.0 + m // 2
        rhs += float(sum(wmode[i] * np.sum(np.abs(f_field[i]) ** 2 * weights)
                         for i in range(N + 1)))

    v_trace = np.asarray(v_trace, dtype=complex)
    nb = v_trace.shape[1]
    ds = 2.0 * np.pi / nb
    dsv = tangential_derivative(v_trace)
    m = np.arange(N + 1)
    wmode = 1.0 + m // 2
    pair = np.sum(wmode[:, None] * v_trace * np.conj(dsv)) * ds
    rhs += float(np.real(0.5j * pair))
    return lhs, rhs, abs(lhs - rhs) / max(lhs, 1.0)
