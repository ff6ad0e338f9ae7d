"""Attenuation fields, scattering kernels, and source phantoms.

The benchmark medium has two absorbing discs on a weakly absorbing
background, a constant scattering coefficient, and a Henyey-Greenstein
(2D Poisson-kernel) phase function.  The angular Fourier multipliers
sigma_n of the scattering operator are defined by the contract

    n-th angular mode of  int_{S^1} k(theta.theta') u(theta') dtheta'
        =  sigma_n * u_n,

which for the Henyey-Greenstein kernel gives sigma_n = mu_s * g^|n|
in closed form.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError

# benchmark phantom regions
B1_CENTER = (0.5, 0.0)
B1_RADIUS = 0.3
B2_CENTER = (-0.25, math.sqrt(3.0) / 4.0)
B2_RADIUS = 0.2
RECT = (-0.25, 0.5, -0.15, 0.15)  # (x0, x1, y0, y1)


@dataclass(frozen=True)
class DiscRegion:
    cx: float
    cy: float
    radius: float
    value: float

    def signed_distance(self, x, y):
        return np.hypot(x - self.cx, y - self.cy) - self.radius


@dataclass(frozen=True)
class RectRegion:
    x0: float
    x1: float
    y0: float
    y1: float
    value: float

    def contains(self, x, y):
        return ((self.x0 < x) & (x < self.x1)
                & (self.y0 < y) & (y < self.y1))


def _quartic_blend(t):
    """C^2 transition from 1 at t=-1 to 0 at t=+1.

    Normalized integral of the quartic (t+1)^2 (t-1)^2, whose first and
    second derivatives vanish at both endpoints.
    """
    t = np.clip(t, -1.0, 1.0)
    # int_t^1 (u^2-1)^2 du / (16/15)
    prim = t ** 5 / 5.0 - 2.0 * t ** 3 / 3.0 + t
    return (8.0 / 15.0 - prim) / (16.0 / 15.0)


@dataclass(frozen=True)
class AttenuationField:
    """a(z) = mu_s + mu_a(z), compactly supported on the unit disc.

    mu_a is piecewise constant on disc-shaped regions over a constant
    background; the smooth variant blends each region edge across a band
    of half-width epsilon with a quartic C^2 profile.
    """

    mu_s: float = 5.0
    background: float = 0.1
    regions: tuple = (DiscRegion(*B1_CENTER, B1_RADIUS, 2.0),
                      DiscRegion(*B2_CENTER, B2_RADIUS, 1.0))
    variant: str = "smooth"
    epsilon: float = 0.025

    def __post_init__(self):
        if self.variant not in ("smooth", "discontinuous"):
            raise DomainError(f"unknown attenuation variant {self.variant!r}")
        if self.background <= 0:
            raise DomainError("absorption background must be positive")

    def mu_a(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        out = np.full(np.broadcast(x, y).shape, self.background)
        for reg in self.regions:
            d = reg.signed_distance(x, y)
            if self.variant == "discontinuous":
                out = np.where(d < 0, reg.value, out)
            else:
                blend = _quartic_blend(d / self.epsilon)
                out = np.where(d < self.epsilon,
                               self.background
                               + (reg.value - self.background) * blend,
                               out)
        return out

    def __call__(self, x, y):
        """Total attenuation, zero outside the unit disc."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        a = self.mu_s + self.mu_a(x, y)
        return np.where(x * x + y * y <= 1.0, a, 0.0)


def eval_attenuation(att, z):
    """Pointwise a(z); z is a pair or an (..., 2) array."""
    z = np.asarray(z, dtype=float)
    return att(z[..., 0], z[..., 1])


@dataclass(frozen=True)
class ScatteringKernel:
    """Henyey-Greenstein or tabulated-multiplier scattering kernel."""

    variant: str = "hg"
    g: float = 0.5
    mu_s: float = 5.0
    sigma: tuple = ()
    truncation: int = 8

    def __post_init__(self):
        if self.variant == "hg":
            if not 0.0 <= self.g < 1.0:
                raise DomainError("anisotropy g must lie in [0, 1)")
            if self.mu_s < 0:
                raise DomainError("mu_s must be nonnegative")
        elif self.variant != "tabulated":
            raise DomainError(f"unknown kernel variant {self.variant!r}")

    @classmethod
    def tabulated(cls, sigma, truncation=None):
        sigma = tuple(float(s) for s in sigma)
        if truncation is None:
            truncation = len(sigma) - 1
        return cls(variant="tabulated", sigma=sigma, truncation=truncation,
                   mu_s=sigma[0] if sigma else 0.0)

    def phase(self, cos_phi):
        """k(cos phi), the angular redistribution density."""
        if self.variant == "hg":
            g = self.g
            return (self.mu_s / (2.0 * np.pi) * (1.0 - g * g)
                    / (1.0 - 2.0 * g * np.asarray(cos_phi) + g * g))
        # tabulated: cosine series consistent with the multipliers
        phi = np.arccos(np.clip(cos_phi, -1.0, 1.0))
        out = np.full_like(np.asarray(phi, dtype=float),
                           self.sigma[0] / (2.0 * np.pi) if self.sigma else 0.0)
        for n, s in enumerate(self.sigma):
            if n == 0:
                continue
            out = out + s / np.pi * np.cos(n * phi)
        return out

    @property
    def sigma0(self):
        return self.mu_s if self.variant == "hg" else (
            self.sigma[0] if self.sigma else 0.0)


def hg_multiplier(g, mu_s, n):
    """Closed-form Henyey-Greenstein multiplier sigma_n = mu_s g^|n|."""
    if not 0.0 <= g < 1.0:
        raise DomainError("anisotropy g must lie in [0, 1)")
    if mu_s < 0:
        raise DomainError("mu_s must be nonnegative")
    return mu_s * g ** abs(int(n))


def kernel_multipliers(kernel, N, n_quad=4096):
    """Multipliers sigma_0..sigma_N of the scattering operator.

    Tabulated kernels return their table (zero-padded).  Henyey-
    Greenstein multipliers come from trapezoidal quadrature of the phase
    function against e^{-in phi}, the brute-force counterpart of the
    closed form.
    """
    if N < 0:
        raise DomainError("order N must be nonnegative")
    if kernel.variant == "tabulated":
        out = np.zeros(N + 1)
        m = min(N + 1, len(kernel.sigma))
        out[:m] = kernel.sigma[:m]
        return out
    phi = 2.0 * np.pi * np.arange(n_quad) / n_quad
    vals = kernel.phase(np.cos(phi))
    coeffs = np.fft.fft(vals) / n_quad * 2.0 * np.pi
    return np.real(coeffs[:N + 1]).copy()


@dataclass(frozen=True)
class SourceField:
    """Piecewise-constant source phantom (or a user grid via `table`)."""

    rect: RectRegion = RectRegion(*RECT, 2.0)
    discs: tuple = (DiscRegion(*B2_CENTER, B2_RADIUS, 1.0),)

    def __call__(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        out = np.zeros(np.broadcast(x, y).shape)
        out = np.where(self.rect.contains(x, y), self.rect.value, out)
        for d in self.discs:
            out = np.where(d.signed_distance(x, y) < 0, d.value, out)
        return out


def eval_source(src, z):
    z = np.asarray(z, dtype=float)
    return src(z[..., 0], z[..., 1])


@dataclass(frozen=True)
class Medium:
    attenuation: AttenuationField
    kernel: ScatteringKernel


def paper_medium(variant="smooth", g=0.5, mu_s=5.0, epsilon=0.025):
    att = AttenuationField(mu_s=mu_s, variant=variant, epsilon=epsilon)
    ker = ScatteringKernel(variant="hg", g=g, mu_s=mu_s)
    return Medium(attenuation=att, kernel=ker)


def medium_from_config(cfg):
    """Build (Medium, SourceField) from a JSON-style config dict.

    Schema: {g, mu_s, attenuation_variant, epsilon,
             regions: [{shape: "disc", params: [cx, cy, r], mu_a}],
             source_regions: [{shape, params, value}],
             sigma: [..]  (optional tabulated multipliers)}
    """
    mu_s = float(cfg.get("mu_s", 5.0))
    variant = cfg.get("attenuation_variant", "smooth")
    eps = float(cfg.get("epsilon", 0.025))
    regions = []
    for r in cfg.get("regions", None) or _default_region_cfg():
        if r["shape"] != "disc":
            raise DomainError("attenuation regions must be discs")
        cx, cy, rad = r["params"]
        regions.append(DiscRegion(cx, cy, rad, float(r["mu_a"])))
    att = AttenuationField(mu_s=mu_s, variant=variant, epsilon=eps,
                           regions=tuple(regions),
                           background=float(cfg.get("background", 0.1)))
    if "sigma" in cfg:
        ker = ScatteringKernel.tabulated(cfg["sigma"])
    else:
        ker = ScatteringKernel(variant="hg", g=float(cfg.get("g", 0.5)),
                               mu_s=mu_s)
    rect = None
    discs = []
    for s in cfg.get("source_regions", None) or _default_source_cfg():
        if s["shape"] == "rect":
            rect = RectRegion(*s["params"], float(s["value"]))
        elif s["shape"] == "disc":
            cx, cy, rad = s["params"]
            discs.append(DiscRegion(cx, cy, rad, float(s["value"])))
        else:
            raise DomainError(f"unknown source shape {s['shape']!r}")
    if rect is None:
        rect = RectRegion(0, 0, 0, 0, 0.0)
    src = SourceField(rect=rect, discs=tuple(discs))
    return Medium(attenuation=att, kernel=ker), src


def _default_region_cfg():
    return [{"shape": "disc", "params": list(B1_CENTER) + [B1_RADIUS],
             "mu_a": 2.0},
            {"shape": "disc", "params": list(B2_CENTER) + [B2_RADIUS],
             "mu_a": 1.0}]


def _default_source_cfg():
    return [{"shape": "rect", "params": list(RECT), "value": 2.0},
            {"shape": "disc", "params": list(B2_CENTER) + [B2_RADIUS],
             "value": 1.0}]
