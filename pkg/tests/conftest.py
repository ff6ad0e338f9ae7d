"""Shared fixtures: cached forward-problem data for the slow experiments.

The end-to-end tests need boundary data from multi-minute forward
solves.  Results are cached on disk under tests/_cache keyed by the
experiment name, so repeated test runs only pay the cost once.  Delete
the directory to force regeneration.
"""

import json
import os
import time

import numpy as np
import pytest

from rtesource import DiscDomain, Grid, solve_forward
from rtesource import io as rio
from rtesource.forward import extract_boundary_characteristics

CACHE_DIR = os.path.join(os.path.dirname(__file__), "_cache")


def cached_boundary(name, build):
    """Boundary data cached on disk, with the forward wall time recorded."""
    os.makedirs(CACHE_DIR, exist_ok=True)
    path = os.path.join(CACHE_DIR, name + ".data")
    meta = os.path.join(CACHE_DIR, name + ".json")
    if os.path.exists(path):
        return rio.load_boundary_data(path)
    t0 = time.perf_counter()
    bd = build()
    elapsed = time.perf_counter() - t0
    rio.save_boundary_data(path, bd)
    with open(meta, "w") as fh:
        json.dump({"forward_seconds": elapsed}, fh)
    return bd


def forward_seconds(name):
    meta = os.path.join(CACHE_DIR, name + ".json")
    if os.path.exists(meta):
        with open(meta) as fh:
            return json.load(fh)["forward_seconds"]
    return None


def run_forward(medium, source, grid_n, n_dirs, n_boundary, tol=1e-8,
                max_iters=2000):
    grid = Grid.make(grid_n)
    flux = solve_forward(medium, source, grid, n_dirs, tol=tol,
                         max_iters=max_iters)
    return extract_boundary_characteristics(flux, medium, source,
                                            DiscDomain(n_boundary))


@pytest.fixture(scope="session")
def smooth_experiment_data():
    """Benchmark smooth-attenuation experiment: forward 256^2, 360 dirs."""
    from rtesource.media import SourceField, paper_medium

    def build():
        return run_forward(paper_medium(variant="smooth"), SourceField(),
                           256, 360, 360)
    return cached_boundary("smooth_256_360", build)


@pytest.fixture(scope="session")
def discontinuous_experiment_data():
    from rtesource.media import SourceField, paper_medium

    def build():
        return run_forward(paper_medium(variant="discontinuous"),
                           SourceField(), 256, 360, 360)
    return cached_boundary("discontinuous_256_360", build)


@pytest.fixture(scope="session")
def weak_anisotropy_data():
    """g = 0.2 smooth medium for the truncation-order sweep."""
    from rtesource.media import SourceField, paper_medium

    def build():
        return run_forward(paper_medium(variant="smooth", g=0.2),
                           SourceField(), 256, 360, 360)
    return cached_boundary("weak_g02_256_360", build)


@pytest.fixture(scope="session")
def polynomial_kernel_data():
    """Tabulated kernel with sigma_n = 0 past the truncation order."""
    from rtesource.media import (AttenuationField, Medium, ScatteringKernel,
                                 SourceField)

    def build():
        sigma = tuple(5.0 * 0.5 ** n for n in range(9))
        med = Medium(AttenuationField(variant="smooth"),
                     ScatteringKernel.tabulated(sigma))
        return run_forward(med, SourceField(), 128, 180, 180)
    return cached_boundary("poly_kernel_128_180", build)
