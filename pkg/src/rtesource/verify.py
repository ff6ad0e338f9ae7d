"""Self-check suites for the numerical building blocks.

Each suite runs a handful of invariant checks at desk scale and returns
a machine-readable report {suite, checks: [{name, value, tolerance,
pass}], passed}.  The CLI exposes them through `rtesource verify`.
"""

import numpy as np

from . import aanalytic as aa
from .forward import ballistic_oracle, extract_boundary, solve_forward
from .geometry import (DiscDomain, Grid, boundary_nodes,
                       disc_quadrature_weights, exit_distance)
from .media import (AttenuationField, Medium, ScatteringKernel,
                    hg_multiplier, kernel_multipliers)
from .poisson import DirichletSolver
from .transforms import (build_h, divergent_beam, negative_mode_mass,
                         transport_residual)


def _check(name, value, tolerance):
    return {"name": name, "value": float(value),
            "tolerance": float(tolerance),
            "pass": bool(value <= tolerance)}


def verify_media():
    checks = []
    worst = 0.0
    for g in (0.0, 0.2, 0.5, 0.9):
        ker = ScatteringKernel(variant="hg", g=g, mu_s=5.0)
        sig = kernel_multipliers(ker, 16)
        ref = np.array([hg_multiplier(g, 5.0, n) for n in range(17)])
        worst = max(worst, float(np.max(np.abs(sig - ref))))
    checks.append(_check("hg_multiplier_quadrature", worst, 1e-10))
    att = AttenuationField()
    g64 = Grid.make(64)
    a = att.mu_a(g64.xx, g64.yy)
    checks.append(_check("subcriticality_margin",
                         0.1 - float(np.min(a[g64.inside])), 1e-12))
    return _report("media", checks)


def verify_geometry():
    checks = []
    # exit distance from the center is always 1
    th = np.stack([np.cos(np.linspace(0, 2 * np.pi, 17)),
                   np.sin(np.linspace(0, 2 * np.pi, 17))], axis=1)
    tau = exit_distance(np.zeros(2), th)
    checks.append(_check("center_exit_distance",
                         float(np.max(np.abs(tau - 1.0))), 1e-12))
    w = disc_quadrature_weights(Grid.make(128))
    checks.append(_check("disc_quadrature_area",
                         abs(float(np.sum(w)) - np.pi), 1e-3))
    return _report("geometry", checks)


def verify_poisson():
    checks = []
    grid = Grid.make(96)
    solver = DirichletSolver(grid)
    u = solver.solve(np.full((96, 96), -4.0), lambda b: np.zeros_like(b))
    ref = np.where(grid.inside, 1.0 - grid.r ** 2, 0.0)
    checks.append(_check("paraboloid_max_error",
                         float(np.max(np.abs(u.real - ref))),
                         4.0 * grid.spacing ** 2))
    # harmonic manufactured solution sin(x) e^y
    bfn = lambda b: np.sin(np.cos(b)) * np.exp(np.sin(b))
    u2 = solver.solve(np.zeros((96, 96)), bfn)
    ref2 = np.where(grid.inside, np.sin(grid.xx) * np.exp(grid.yy), 0.0)
    checks.append(_check("harmonic_max_error",
                         float(np.max(np.abs(u2.real - ref2))),
                         4.0 * grid.spacing ** 2))
    return _report("poisson", checks)


def verify_transforms(grid_n=96, n_dirs=360):
    checks = []
    att = AttenuationField(variant="smooth")
    # beam transform of a constant medium from the center has value a
    catt = AttenuationField(mu_s=0.0, background=1.0, regions=(),
                            variant="discontinuous")
    val = divergent_beam(catt, np.zeros(2), np.array([1.0, 0.0]), step=1e-3)
    checks.append(_check("beam_constant_center", abs(val - 1.0), 1e-6))
    grid = Grid.make(grid_n)
    h = build_h(att, grid, n_dirs)
    checks.append(_check("h_negative_mode_mass",
                         negative_mode_mass(h.values), 1e-3))
    worst = transport_residual(att, grid, n_dirs)
    checks.append(_check("h_transport_residual", worst, 5.0 * grid.spacing))
    return _report("transforms", checks)


def verify_aanalytic(grid_n=96, n_dirs=180):
    checks = []
    att = AttenuationField(variant="smooth")
    grid = Grid.make(grid_n)
    h = build_h(att, grid, n_dirs)
    alpha, _ = aa.exp_h_coeffs(h.values, -1, 40)
    beta, _ = aa.exp_h_coeffs(h.values, +1, 40)
    worst = 0.0
    for k in range(17):
        conv = sum(alpha[m] * beta[k - m] for m in range(k + 1))
        tgt = 1.0 if k == 0 else 0.0
        worst = max(worst, float(np.max(np.abs(conv - tgt))))
    checks.append(_check("alpha_beta_identity", worst, 1e-6))

    # closed-form boundary-value extension: z^2 is a Cauchy integral
    dom = DiscDomain(512)
    pts, bang = boundary_nodes(dom)
    zb = pts[:, 0] + 1j * pts[:, 1]
    rng = np.random.default_rng(7)
    zeta = 0.8 * (rng.random(20) * np.exp(2j * np.pi * rng.random(20)))
    trace = np.zeros((1, 512), dtype=complex)
    trace[0] = zb ** 2
    ext = aa.bukhgeim_cauchy(trace, bang, zeta)
    checks.append(_check("cauchy_z_squared",
                         float(np.max(np.abs(ext[0] - zeta ** 2))), 1e-6))

    # energy identity on the sequence <conj z, 0, -z, 0, ...>
    grid128 = Grid.make(128)
    zz = grid128.xx + 1j * grid128.yy
    v = np.zeros((4, grid128.n, grid128.n), dtype=complex)
    v[0] = np.where(grid128.inside, np.conj(zz), 0.0)
    v[2] = np.where(grid128.inside, -zz, 0.0)
    beta_b = 2.0 * np.pi * np.arange(512) / 512.0
    zb2 = np.exp(1j * beta_b)
    vt = np.zeros((4, 512), dtype=complex)
    vt[0] = np.conj(zb2)
    vt[2] = -zb2
    lhs, rhs, _ = aa.energy_identity_residual(v, vt, grid128)
    checks.append(_check("energy_identity_lhs", abs(lhs - np.pi), 0.01 * np.pi))
    checks.append(_check("energy_identity_rhs", abs(rhs - np.pi), 0.01 * np.pi))
    return _report("aanalytic", checks)


def verify_forward(grid_n=128, n_dirs=120):
    checks = []
    att = AttenuationField(mu_s=0.0, background=1.0, regions=(),
                           variant="discontinuous")
    med = Medium(att, ScatteringKernel(variant="hg", g=0.0, mu_s=0.0))
    src = lambda x, y: np.ones_like(np.asarray(x, dtype=float))
    grid = Grid.make(grid_n)
    flux = solve_forward(med, src, grid, n_dirs, tol=1e-10, max_iters=50)
    dom = DiscDomain(128)
    bd = extract_boundary(flux, dom)
    pts, bang = boundary_nodes(dom)
    ang = flux.angles
    theta = np.stack([np.cos(ang), np.sin(ang)], axis=1)
    oracle = np.array([ballistic_oracle(1.0, 1.0, p, theta) for p in pts])
    nu = (np.cos(bang)[:, None] * np.cos(ang)[None, :]
          + np.sin(bang)[:, None] * np.sin(ang)[None, :])
    oracle[nu < 0] = 0.0
    w = np.clip(nu, 0.0, None)
    err = np.sqrt(np.sum(w * (bd.values - oracle) ** 2)
                  / np.sum(w * oracle ** 2))
    checks.append(_check("ballistic_flux_weighted_rel_l2", err, 0.03))
    return _report("forward", checks)


SUITES = {
    "media": verify_media,
    "geometry": verify_geometry,
    "poisson": verify_poisson,
    "transforms": verify_transforms,
    "aanalytic": verify_aanalytic,
    "forward": verify_forward,
}


def _report(suite, checks):
    return {"suite": suite, "checks": checks,
            "passed": all(c["pass"] for c in checks)}


def run_suite(name):
    """Run one named suite (or "all") and return the report dict."""
    if name == "all":
        reports = [fn() for fn in SUITES.values()]
        return {"suite": "all", "checks": sum((r["checks"] for r in reports),
                                              []),
                "passed": all(r["passed"] for r in reports)}
    if name not in SUITES:
        raise KeyError(name)
    return SUITES[name]()
