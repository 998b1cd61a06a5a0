"""Quadrature building blocks: panel Gauss rules, seeded QMC, error ladders.

Oscillatory one-dimensional integrals use composite Gauss-Legendre panels
whose density is tied to the local phase rate; smooth compact
multi-dimensional smearing integrals use scrambled Sobol points with a
replicate-spread error estimate.  Everything is deterministic for a fixed
QuadratureConfig (including the seed), and reductions keep a fixed order,
so repeated runs are bit-identical.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np
from scipy.stats import qmc

__all__ = [
    "QuadratureConfig",
    "gauss_rule",
    "panel_rule",
    "phase_panel_rule",
    "sobol_points",
    "qmc_integrate",
    "oracle_quadrature",
]


@dataclass(frozen=True)
class QuadratureConfig:
    """Tolerances, refinement depth and sampling budget for all integrators."""

    rel_tol: float = 1e-3
    abs_tol: float = 1e-7
    max_refine: int = 2
    qmc_samples: int = 20_000
    seed: int = 20250817

    def __post_init__(self):
        if not (self.rel_tol > 0.0 and self.abs_tol > 0.0):
            raise ValueError("tolerances must be positive")
        if self.qmc_samples < 1000:
            raise ValueError("qmc_samples must be at least 1000")

    def scaled(self, factor: float) -> "QuadratureConfig":
        return replace(self, qmc_samples=max(1000, int(self.qmc_samples * factor)))


@lru_cache(maxsize=64)
def gauss_rule(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes/weights on [-1, 1], cached."""
    x, w = np.polynomial.legendre.leggauss(order)
    return x, w


def panel_rule(edges: np.ndarray, order: int = 8) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss rule over consecutive panels given by ``edges``."""
    edges = np.asarray(edges, dtype=float)
    x, w = gauss_rule(order)
    a, b = edges[:-1], edges[1:]
    half = 0.5 * (b - a)
    nodes = (0.5 * (a + b)[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def phase_panel_rule(
    a: float,
    b: float,
    max_rate: float,
    order: int = 8,
    rad_per_panel: float = 2.5,
    min_panels: int = 4,
    max_panels: int = 400_000,
) -> tuple[np.ndarray, np.ndarray]:
    """Panels on [a, b] dense enough for phases varying at ``max_rate`` rad/unit."""
    if b <= a:
        return np.empty(0), np.empty(0)
    n = int(np.ceil(abs(max_rate) * (b - a) / rad_per_panel)) + min_panels
    n = min(n, max_panels)
    return panel_rule(np.linspace(a, b, n + 1), order=order)


def sobol_points(dim: int, n: int, seed: int) -> np.ndarray:
    """Owen-scrambled Sobol points in [0,1)^dim; n is rounded up to 2^m."""
    m = max(3, int(np.ceil(np.log2(max(8, n)))))
    eng = qmc.Sobol(d=dim, scramble=True, seed=seed)
    return eng.random_base2(m)


def qmc_integrate(f, lower, upper, quad: QuadratureConfig, replicates: int = 8):
    """Integrate a vectorized f over a box with scrambled-Sobol replicates.

    f maps an (N, dim) array to (N,) or (N, k) values.  Returns
    (value, err) where err is the spread of independently scrambled
    replicate means (std of the mean), a statistical estimate.
    """
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    dim = lower.size
    vol = float(np.prod(upper - lower))
    n_each = max(1000 // replicates + 1, quad.qmc_samples // replicates)
    means = []
    for i in range(replicates):
        pts = sobol_points(dim, n_each, seed=quad.seed + 611 * i)
        vals = np.asarray(f(lower + pts * (upper - lower)))
        means.append(vals.mean(axis=0) * vol)
    means = np.array(means)
    value = means.mean(axis=0)
    err = means.std(axis=0, ddof=1) / np.sqrt(replicates)
    return value, np.abs(err)


def oracle_quadrature(integrand, lower, upper, samples: int, seed: int):
    """Reference integrator: plain seeded QMC estimate with statistical err.

    Used by tests as the independent check on the structured amplitude
    engines; the estimate and its error are deterministic given the seed.
    """
    cfg = QuadratureConfig(qmc_samples=max(1000, int(samples)), seed=seed)
    return qmc_integrate(integrand, lower, upper, cfg)
