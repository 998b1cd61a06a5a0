"""Light-cone-shell seminorms, decay fitting, and infrared probes.

All integrals run over the forward shell p0 = |p| with measures
d3p / sqrt(iota + |p|^2) (iota = 0, 1) or d3p/|p|, written in spherical
momentum coordinates.  Direction grids are Gauss-in-cos(theta) times
uniform azimuth; an optional polar exclusion cap around the transport
axis removes the directions where merged-branch amplitudes carry their
logarithmic growth, and is recorded in the report.

Verdicts are evidence labels from finite ladders, not proofs: thresholds
are arguments with the documented defaults.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .fourier.quadrature import QuadratureConfig, gauss_rule

__all__ = [
    "DirectionGrid",
    "NormReport",
    "DecayFit",
    "direction_grid",
    "iota_norm_partials",
    "decay_fit",
    "ir_divergence_probe",
]


@dataclass(frozen=True)
class DirectionGrid:
    """Unit directions and spherical weights (sum = area integrated)."""

    dirs: np.ndarray
    weights: np.ndarray
    exclusion: float

    def __iter__(self):
        return iter(zip(self.dirs, self.weights))


def direction_grid(n_polar: int = 10, n_azimuth: int = 4, exclusion: float = 0.0, axis_exclusion_both: bool = True) -> DirectionGrid:
    """Product grid over the sphere with polar caps of half-angle ``exclusion`` removed."""
    c_hi = np.cos(exclusion) if exclusion > 0 else 1.0
    c_lo = -np.cos(exclusion) if (exclusion > 0 and axis_exclusion_both) else -1.0
    gc, gw = gauss_rule(n_polar)
    c = 0.5 * (c_hi - c_lo) * gc + 0.5 * (c_hi + c_lo)
    wc = 0.5 * (c_hi - c_lo) * gw
    phi = (np.arange(n_azimuth) + 0.5) * 2.0 * np.pi / n_azimuth
    s = np.sqrt(np.clip(1.0 - c**2, 0.0, None))
    dirs = np.stack(
        [
            np.outer(s, np.cos(phi)).ravel(),
            np.outer(s, np.sin(phi)).ravel(),
            np.outer(c, np.ones_like(phi)).ravel(),
        ],
        axis=1,
    )
    weights = np.outer(wc, np.full(n_azimuth, 2.0 * np.pi / n_azimuth)).ravel()
    return DirectionGrid(dirs=dirs, weights=weights, exclusion=exclusion)


@dataclass
class NormReport:
    """Partial-integral ladder for a shell seminorm with a convergence verdict."""

    iota: int
    partials: list[tuple[str, float, float]]
    verdict: str
    fitted_ir_exponent: float | None = None
    fitted_uv_exponent: float | None = None
    exclusion: float = 0.0

    def values(self) -> dict[str, float]:
        return {label: val for label, val, _ in self.partials}


@dataclass
class DecayFit:
    """Log-log least-squares decay of |field| over a momentum window."""

    slope: float
    intercept: float
    residual: float
    window: tuple[float, float]
    directions: np.ndarray
    per_direction: list[float] = field(default_factory=list)
    mags: np.ndarray | None = None
    mean_abs: np.ndarray | None = None


def _shell_mean_sq(provider, mag: float, grid: DirectionGrid) -> tuple[float, float]:
    """Direction-integrated |field|^2 at one |p| and its propagated error."""
    total = 0.0
    err = 0.0
    for n, w in grid:
        val, e = provider(mag, n)
        v = np.asarray(val)
        a2 = float(np.sum(np.abs(v) ** 2))
        total += w * a2
        err += w * 2.0 * np.sqrt(a2) * e
    return total, err


def _radial_nodes(a: float, b: float, per_octave: int = 4):
    """Gauss nodes on log-spaced octave panels of [a, b]."""
    n_oct = max(1, int(np.ceil(np.log2(b / a))))
    edges = np.geomspace(a, b, n_oct + 1)
    gx, gw = gauss_rule(per_octave)
    nodes, weights = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        half = 0.5 * (hi - lo)
        nodes.append(half * gx + 0.5 * (hi + lo))
        weights.append(half * gw)
    return np.concatenate(nodes), np.concatenate(weights)


def _shell_integral(provider, a: float, b: float, weight, grid: DirectionGrid, per_octave: int = 4):
    """int_a^b dp p^2 weight(p) <|field|^2>_grid with error propagation."""
    nodes, weights = _radial_nodes(a, b, per_octave)
    total, err = 0.0, 0.0
    for p, w in zip(nodes, weights):
        m2, e2 = _shell_mean_sq(provider, float(p), grid)
        total += w * p**2 * weight(p) * m2
        err += w * p**2 * weight(p) * e2
    return total, err


def iota_norm_partials(
    provider,
    iota: int,
    ir_ladder,
    uv_ladder,
    quad: QuadratureConfig,
    grid: DirectionGrid | None = None,
    cauchy_frac: float = 0.05,
    per_octave: int = 4,
) -> NormReport:
    """Partial values of the iota-seminorm over nested regions eps <= |p| <= Lam.

    ir_ladder must decrease, uv_ladder increase; the partials are nested
    and monotone.  Verdict 'converged' when the outermost increment at
    both ends stays below cauchy_frac of the running total; 'diverging'
    when the IR increments fail to shrink across three refinements.
    """
    if iota not in (0, 1):
        raise ValueError("iota must be 0 or 1")
    ir = sorted(set(float(e) for e in ir_ladder), reverse=True)
    uv = sorted(set(float(l) for l in uv_ladder))
    if not ir or not uv or ir[0] >= uv[0]:
        raise ValueError("need decreasing IR ladder below increasing UV ladder")
    grid = grid or direction_grid()
    weight = (lambda p: 1.0 / np.sqrt(iota + p**2)) if iota else (lambda p: 1.0 / p)

    # shell pieces between consecutive ladder edges, accumulated nested
    edges = list(reversed(ir)) + uv
    pieces = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        pieces.append(_shell_integral(provider, lo, hi, weight, grid, per_octave))

    partials: list[tuple[str, float, float]] = []
    n_ir = len(ir) - 1
    # IR ladder: nested regions [eps_k, Lam_max], eps_k decreasing
    ir_values = []
    for k, eps in enumerate(ir):
        v = sum(p[0] for p in pieces[len(ir) - 1 - k :])
        e = sum(p[1] for p in pieces[len(ir) - 1 - k :])
        ir_values.append(v)
        partials.append((f"ir eps={eps:g}", v, e))
    # UV ladder: regions [eps_min, Lam_k]
    uv_values = []
    for k, lam in enumerate(uv):
        v = sum(p[0] for p in pieces[: n_ir + 1 + k])
        e = sum(p[1] for p in pieces[: n_ir + 1 + k])
        uv_values.append(v)
        partials.append((f"uv Lam={lam:g}", v, e))

    total = uv_values[-1]
    verdict = "inconclusive"
    ir_inc = np.diff(ir_values)
    uv_inc = np.diff(uv_values)
    if total > 0:
        ir_ok = ir_inc.size == 0 or ir_inc[-1] <= cauchy_frac * total
        uv_ok = uv_inc.size == 0 or uv_inc[-1] <= cauchy_frac * total
        if ir_ok and uv_ok:
            verdict = "converged"
        elif ir_inc.size >= 3 and np.all(np.diff(ir_inc) >= -1e-3 * total):
            verdict = "diverging"
    elif total == 0.0:
        verdict = "converged"

    def _end_exponent(lo_mag, hi_mag):
        m2a, _ = _shell_mean_sq(provider, lo_mag, grid)
        m2b, _ = _shell_mean_sq(provider, hi_mag, grid)
        if m2a <= 0 or m2b <= 0:
            return None
        return 0.5 * (np.log(m2b) - np.log(m2a)) / (np.log(hi_mag) - np.log(lo_mag))

    return NormReport(
        iota=iota,
        partials=partials,
        verdict=verdict,
        fitted_ir_exponent=_end_exponent(ir[-1], 2 * ir[-1]),
        fitted_uv_exponent=_end_exponent(uv[-1] / 2, uv[-1]),
        exclusion=grid.exclusion,
    )


def decay_fit(provider, window, directions, quad: QuadratureConfig, n_mags: int = 7) -> DecayFit:
    """Least-squares slope of log|field| vs log|p|, averaged over directions.

    residual is the rms of the pooled log-magnitudes about the per-direction
    fits.  Raises if the field sits at the provider's noise floor.
    """
    lo, hi = float(window[0]), float(window[1])
    if not 0 < lo < hi:
        raise ValueError(f"invalid window {window}")
    mags = np.geomspace(lo, hi, n_mags)
    directions = np.atleast_2d(np.asarray(directions, dtype=float))
    slopes, resid_sq, logs = [], [], []
    mean_abs = np.zeros(mags.size)
    for n in directions:
        vals, errs = [], []
        for m in mags:
            v, e = provider(float(m), n)
            vals.append(float(np.linalg.norm(np.atleast_1d(v))))
            errs.append(e)
        vals = np.array(vals)
        if np.any(vals <= 3.0 * np.asarray(errs)):
            raise ValueError("field at noise floor inside the fit window; increase samples")
        mean_abs += vals / directions.shape[0]
        lv = np.log(vals)
        a_mat = np.vstack([np.log(mags), np.ones_like(mags)]).T
        coef, *_ = np.linalg.lstsq(a_mat, lv, rcond=None)
        slopes.append(coef[0])
        resid_sq.append(np.mean((lv - a_mat @ coef) ** 2))
        logs.append(lv)
    slope = float(np.mean(slopes))
    pooled = np.mean(np.array(logs), axis=0)
    a_mat = np.vstack([np.log(mags), np.ones_like(mags)]).T
    coef, *_ = np.linalg.lstsq(a_mat, pooled, rcond=None)
    return DecayFit(
        slope=slope,
        intercept=float(coef[1]),
        residual=float(np.sqrt(np.mean(resid_sq))),
        window=(lo, hi),
        directions=directions,
        per_direction=[float(s) for s in slopes],
        mags=mags,
        mean_abs=mean_abs,
    )


def ir_divergence_probe(
    provider,
    eps_ladder,
    quad: QuadratureConfig,
    grid: DirectionGrid | None = None,
    shrink_frac: float = 0.05,
    per_octave: int = 4,
) -> tuple[float, str, list[tuple[str, float, float]]]:
    """Increments of int_{eps<|p|<1} d3p/|p| |field|^2 per halving of eps.

    Returns (mean increment ratio per halving, verdict, partial rows).
    Constant increments flag a logarithmic divergence; shrinking
    increments a convergent infrared integral.
    """
    eps = sorted(set(float(e) for e in eps_ladder), reverse=True)
    if len(eps) < 3 or eps[0] >= 1.0 or eps[-1] < 1e-4:
        raise ValueError("need a decreasing ladder inside [1e-4, 1)")
    grid = grid or direction_grid()
    pieces = []
    for lo, hi in zip(eps[1:], eps[:-1]):
        pieces.append(_shell_integral(provider, lo, hi, lambda p: 1.0 / p, grid, per_octave))
    top, top_err = _shell_integral(provider, eps[0], 1.0, lambda p: 1.0 / p, grid, per_octave)
    partials = [(f"eps={eps[0]:g}", top, top_err)]
    run, run_e = top, top_err
    for (v, e), ep in zip(pieces, eps[1:]):
        run += v
        run_e += e
        partials.append((f"eps={ep:g}", run, run_e))
    inc = np.array([v for v, _ in pieces])
    if np.any(inc < 0):
        verdict = "inconclusive"
        ratio = float("nan")
    else:
        ratios = inc[1:] / np.where(inc[:-1] > 0, inc[:-1], np.inf)
        ratio = float(np.mean(ratios)) if ratios.size else float("nan")
        if inc.size >= 2 and np.all(ratios <= 1.0 - shrink_frac):
            verdict = "converged"
        elif inc.size >= 3 and np.all(ratios >= 1.0 - shrink_frac):
            verdict = "diverging"
        else:
            verdict = "inconclusive"
    return ratio, verdict, partials
