"""Shell pairings: the symplectic form, its positive-frequency part, and
an independent position-space oracle.

Conventions (fixed globally, kappa = 1):

    dplus(g, f)    = int d3p/(2|p|) conj(g~)^mu eta_munu f~^nu |_{p0=|p|}
    <g, D f>       = symplectic(g, f) = -2 Im dplus(g, f)

which is antisymmetric and bilinear, and makes the Gaussian functional
exp((1/2) dplus(h, h)) a state (the exponent is real and nonpositive for
divergence-free or spatial fields).  Spatial-kind fields contract through
the spatial metric block only; pairing a spatial with a four-kind test
field is an error (the temporal-gauge subspace is distinct), while
amplitude providers declare their own kind.

The position-space oracle evaluates the same number as
-(4 pi^2)^{-1} int g^mu(x) eta (D*f)_mu with the retarded-minus-advanced
cone smearing, discretized over the probe supports; it shares nothing
with the momentum route.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..fourier.quadrature import QuadratureConfig, gauss_rule, panel_rule

__all__ = [
    "PairingValue",
    "ShellGrid",
    "default_grid",
    "dplus",
    "symplectic",
    "GridValues",
    "pair_provider_with_field",
    "position_pairing",
]


@dataclass(frozen=True)
class PairingValue:
    value: complex
    err: float

    def __post_init__(self):
        if self.err < 0:
            raise ValueError("err must be nonnegative")

    @property
    def real(self) -> float:
        return float(np.real(self.value))


class ShellGrid:
    """Product quadrature over the forward momentum shell.

    Radial Gauss panels (log-spaced below ``linear_from``, fixed width
    above) and a polar-split Gauss x uniform-azimuth direction set.  The
    measure weight d3p/(2|p|) is prefolded into ``weights``.
    """

    def __init__(
        self,
        p_min: float = 0.04,
        p_max: float = 14.0,
        per_octave: int = 8,
        linear_from: float = 4.0,
        linear_width: float = 1.6,
        n_polar: tuple[int, int] = (6, 5),
        polar_split: float = 0.9,
        n_azimuth: int = 4,
    ):
        edges = [p_min]
        while edges[-1] < min(linear_from, p_max):
            edges.append(min(edges[-1] * 2.0, min(linear_from, p_max)))
        radial_edges = []
        gx, gw = gauss_rule(per_octave)
        for lo, hi in zip(edges[:-1], edges[1:]):
            n_sub = max(1, int(np.ceil(per_octave / 8)))
            radial_edges.append(np.linspace(lo, hi, n_sub + 1))
        if p_max > linear_from:
            n_lin = int(np.ceil((p_max - linear_from) / linear_width))
            radial_edges.append(np.linspace(linear_from, p_max, n_lin + 1)[1:])
        all_edges = np.unique(np.concatenate(radial_edges)) if radial_edges else np.array([p_min, p_max])
        self.mags, self.mag_weights = panel_rule(all_edges, order=per_octave)

        pieces = []
        c_split = np.cos(polar_split)
        for (c_lo, c_hi), n in zip(((c_split, 1.0), (-1.0, c_split)), n_polar):
            gc, gwc = gauss_rule(n)
            pieces.append((0.5 * (c_hi - c_lo) * gc + 0.5 * (c_hi + c_lo), 0.5 * (c_hi - c_lo) * gwc))
        c = np.concatenate([p[0] for p in pieces])
        wc = np.concatenate([p[1] for p in pieces])
        phi = (np.arange(n_azimuth) + 0.5) * 2.0 * np.pi / n_azimuth
        s = np.sqrt(np.clip(1.0 - c**2, 0.0, None))
        self.dirs = np.stack(
            [
                np.outer(s, np.cos(phi)).ravel(),
                np.outer(s, np.sin(phi)).ravel(),
                np.outer(c, np.ones_like(phi)).ravel(),
            ],
            axis=1,
        )
        self.dir_weights = np.outer(wc, np.full(n_azimuth, 2.0 * np.pi / n_azimuth)).ravel()
        # measure d3p/(2|p|) = (p^2 dp dOmega) / (2p) = (p/2) dp dOmega
        self.weights = np.outer(self.mags / 2.0 * self.mag_weights, self.dir_weights)
        self.p_min = p_min
        self.p_max = p_max

    def field_values(self, f) -> np.ndarray:
        """Closed-form field components on the grid, shape (n_mag, n_dir, c)."""
        p0 = np.broadcast_to(self.mags[:, None], (self.mags.size, self.dirs.shape[0]))
        pvec = self.mags[:, None, None] * self.dirs[None, :, :]
        return f.amplitude(p0, pvec)


def default_grid(level: int = 0, p_max: float = 14.0) -> ShellGrid:
    f = 1 + level
    return ShellGrid(
        p_max=p_max * (1.0 + 0.3 * level),
        per_octave=8 + 4 * level,
        linear_width=1.6 / 1.5**level,
        n_polar=(6 * f, 5 * f),
        n_azimuth=4 * f,
    )


def _contract(kind_g: str, vg: np.ndarray, kind_f: str, vf: np.ndarray) -> np.ndarray:
    """conj(g)^mu eta_munu f^nu respecting field kinds."""
    if kind_g == "spatial" and kind_f == "spatial":
        return -np.sum(np.conj(vg) * vf, axis=-1)
    if kind_g == "four" and kind_f == "four":
        return np.conj(vg[..., 0]) * vf[..., 0] - np.sum(np.conj(vg[..., 1:]) * vf[..., 1:], axis=-1)
    raise ValueError(f"incompatible test-field kinds: {kind_g!r} vs {kind_f!r}")


def dplus(g, f, quad: QuadratureConfig, p_max: float | None = None) -> PairingValue:
    """Positive-frequency pairing of two closed-form test fields."""
    if p_max is None:
        scales = []
        for h in (g, f):
            s = h.support
            scales += [s.t_half, s.radius]
        p_max = max(12.0, 26.0 / min(scales))
    vals = []
    for level in (0, 1):
        grid = default_grid(level, p_max=p_max)
        integrand = _contract(g.kind, grid.field_values(g), f.kind, grid.field_values(f))
        vals.append(complex(np.sum(grid.weights * integrand)))
    # IR closure: integrand ~ const near p=0, remaining mass <= (p_min^2/2)*4pi*|c0|
    grid0 = ShellGrid(p_min=1e-3, p_max=2e-3, per_octave=4, n_polar=(2, 2), n_azimuth=2)
    c0 = np.max(np.abs(_contract(g.kind, grid0.field_values(g), f.kind, grid0.field_values(f))))
    ir_bound = 2.0 * np.pi * grid.p_min**2 * float(c0)
    err = abs(vals[1] - vals[0]) + ir_bound
    return PairingValue(vals[1], err=float(err))


def symplectic(g, f, quad: QuadratureConfig, p_max: float | None = None) -> PairingValue:
    """<g, D f> = -2 Im dplus(g, f); antisymmetric, bilinear, real."""
    d = dplus(g, f, quad, p_max=p_max)
    return PairingValue(-2.0 * float(np.imag(d.value)), err=2.0 * d.err)


class GridValues:
    """Amplitude-provider values cached on one shell grid.

    A provider is a callable (mag, n) -> (components, err) with a ``kind``
    attribute; Huygens suites evaluate each provider once per grid and
    contract it against any number of closed-form probes.
    """

    def __init__(self, grid: ShellGrid, provider, kind: str):
        self.grid = grid
        self.kind = kind
        n_m, n_d = grid.mags.size, grid.dirs.shape[0]
        n_c = 4 if kind == "four" else 3
        self.values = np.zeros((n_m, n_d, n_c), dtype=complex)
        self.errs = np.zeros((n_m, n_d))
        for j, n in enumerate(grid.dirs):
            for i, mag in enumerate(grid.mags):
                v, e = provider(float(mag), n)
                self.values[i, j] = np.asarray(v, dtype=complex)
                self.errs[i, j] = e

    def pair_with_field(self, f) -> PairingValue:
        """phi_m(f) = -2 Im int dmu conj(m~) eta f~ against a closed-form probe."""
        fv = self.grid.field_values(f)
        if self.kind == "spatial":
            if f.kind == "spatial":
                integrand = -np.sum(np.conj(self.values) * fv, axis=-1)
            else:
                integrand = -np.sum(np.conj(self.values) * fv[..., 1:], axis=-1)
            fmag = np.linalg.norm(fv, axis=-1) if f.kind == "spatial" else np.linalg.norm(fv[..., 1:], axis=-1)
        else:
            if f.kind == "spatial":
                integrand = -np.sum(np.conj(self.values[..., 1:]) * fv, axis=-1)
                fmag = np.linalg.norm(fv, axis=-1)
            else:
                integrand = np.conj(self.values[..., 0]) * fv[..., 0] - np.sum(
                    np.conj(self.values[..., 1:]) * fv[..., 1:], axis=-1
                )
                fmag = np.linalg.norm(fv, axis=-1)
        value = -2.0 * float(np.imag(np.sum(self.grid.weights * integrand)))
        err = 2.0 * float(np.sum(self.grid.weights * self.errs * fmag))
        return PairingValue(value, err=err)


def pair_provider_with_field(provider, kind: str, f, quad: QuadratureConfig, grid: ShellGrid | None = None) -> PairingValue:
    gv = GridValues(grid or default_grid(), provider, kind)
    return gv.pair_with_field(f)


def position_pairing(density, probe, quad: QuadratureConfig, bounds=None, nodes=(10, 12, 10, 8), inner=(10, 8, 8)) -> PairingValue:
    """<density, D probe> via the position-space cone smearing (the oracle).

    density exposes .position(x4) -> (.., 4) components and .support (a
    bump geometry or an object with time/space bounds); probe is a
    closed-form test field.  The outer integral runs over the density
    support box, the inner over the retarded and advanced light-cone
    shells reaching the probe support.
    """
    sup = density.support
    if bounds is None:
        t_lo, t_hi = sup.t_center - sup.t_half, sup.t_center + sup.t_half
        center = np.asarray(sup.center)
        radius = sup.radius
    else:
        (t_lo, t_hi), center, radius = bounds
        center = np.asarray(center, dtype=float)

    ps = probe.support
    p_center = np.asarray(ps.center)

    def run(n_t, n_r, n_c, n_phi, m_r, m_c, m_phi):
        gt, wt = gauss_rule(n_t)
        t_nodes = 0.5 * (t_hi - t_lo) * gt + 0.5 * (t_hi + t_lo)
        t_w = 0.5 * (t_hi - t_lo) * wt
        gr, wr = gauss_rule(n_r)
        r_nodes = 0.5 * radius * (gr + 1.0)
        r_w = 0.5 * radius * wr
        gc, wc = gauss_rule(n_c)
        phi = (np.arange(n_phi) + 0.5) * 2.0 * np.pi / n_phi
        s = np.sqrt(np.clip(1.0 - gc**2, 0.0, None))
        dirs = np.stack(
            [np.outer(s, np.cos(phi)).ravel(), np.outer(s, np.sin(phi)).ravel(), np.outer(gc, np.ones_like(phi)).ravel()],
            axis=1,
        )
        dw = np.outer(wc, np.full(n_phi, 2.0 * np.pi / n_phi)).ravel()
        xs = center[None, None, :] + r_nodes[:, None, None] * dirs[None, :, :]
        xw = (r_nodes**2 * r_w)[:, None] * dw[None, :]
        total = 0.0
        for t_val, t_wt in zip(t_nodes, t_w):
            x4 = np.concatenate([np.full(xs.shape[:2] + (1,), t_val), xs], axis=-1)
            dens = density.position(x4)
            live = np.any(dens != 0.0, axis=-1)
            if not np.any(live):
                continue
            k = cone_smear_points(probe, x4[live], m_r, m_c, m_phi)
            contract = dens[live][:, 0] * k[:, 0] - np.sum(dens[live][:, 1:] * k[:, 1:], axis=-1)
            total += t_wt * float(np.sum(xw[live] * contract))
        return -total / (4.0 * np.pi**2)

    v1 = run(nodes[0], nodes[1], nodes[2], nodes[3], *inner)
    v2 = run(nodes[0] + 4, nodes[1] + 5, nodes[2] + 4, nodes[3] + 4, inner[0] + 4, inner[1] + 3, inner[2] + 3)
    return PairingValue(v2, err=abs(v2 - v1))


def cone_smear_points(probe, x4: np.ndarray, m_r: int = 10, m_c: int = 8, m_phi: int = 8) -> np.ndarray:
    """K(x) = int d3z/(2|z|)[probe(x0+|z|, x+z) - probe(x0-|z|, x+z)].

    Vectorized over the (N, 4) input points with per-point radial windows
    (set by the probe's time support) and angular caps (set by its ball).
    """
    x4 = np.asarray(x4, dtype=float)
    ps = probe.support
    p_center = np.asarray(ps.center)
    t_vals = x4[:, 0]
    xs = x4[:, 1:]
    out = np.zeros((x4.shape[0], 4))
    gr, wr = gauss_rule(m_r)
    gc, wc = gauss_rule(m_c)
    phi = (np.arange(m_phi) + 0.5) * 2.0 * np.pi / m_phi

    rel = p_center[None, :] - xs
    d = np.linalg.norm(rel, axis=-1)
    safe_d = np.where(d > 1e-14, d, 1.0)
    e_d = rel / safe_d[:, None]
    tmp = np.zeros_like(e_d)
    sel = np.abs(e_d[:, 0]) < 0.9
    tmp[sel, 0] = 1.0
    tmp[~sel, 1] = 1.0
    e1 = np.cross(e_d, tmp)
    e1 /= np.linalg.norm(e1, axis=-1, keepdims=True)
    e2 = np.cross(e_d, e1)

    for sign in (+1.0, -1.0):
        lo = (ps.t_center - ps.t_half - t_vals) * sign
        hi = (ps.t_center + ps.t_half - t_vals) * sign
        z_lo = np.maximum(0.0, np.minimum(lo, hi))
        z_hi = np.maximum(0.0, np.maximum(lo, hi))
        live0 = z_hi > z_lo
        if not np.any(live0):
            continue
        half_z = 0.5 * (z_hi - z_lo)
        z = 0.5 * (z_hi + z_lo)[:, None] + half_z[:, None] * gr[None, :]  # (N, m_r)
        zw = half_z[:, None] * wr[None, :]
        with np.errstate(invalid="ignore", divide="ignore"):
            c_min = np.clip(
                (d[:, None] ** 2 + z**2 - ps.radius**2) / np.where(d[:, None] * z > 1e-14, 2.0 * d[:, None] * z, 1e-14),
                -1.0,
                1.0,
            )
        half_c = 0.5 * (1.0 - c_min)  # (N, m_r)
        cc = (0.5 * (1.0 + c_min))[..., None] + half_c[..., None] * gc[None, None, :]  # (N, m_r, m_c)
        ss = np.sqrt(np.clip(1.0 - cc**2, 0.0, None))
        for k, ph in enumerate(phi):
            e_vec = (
                cc[..., None] * e_d[:, None, None, :]
                + ss[..., None] * (np.cos(ph) * e1 + np.sin(ph) * e2)[:, None, None, :]
            )  # (N, m_r, m_c, 3)
            pos = xs[:, None, None, :] + z[..., None, None] * e_vec
            times = (t_vals[:, None] + sign * z)[..., None]
            x4_in = np.concatenate([np.broadcast_to(times[..., None], pos.shape[:-1] + (1,)), pos], axis=-1)
            vals = probe.position(x4_in)  # (N, m_r, m_c, 4)
            w = (z / 2.0) * zw  # (N, m_r)
            w_ang = half_c[..., None] * wc[None, None, :] * (2.0 * np.pi / m_phi)  # (N, m_r, m_c)
            out += sign * np.sum(w[..., None, None] * w_ang[..., None] * vals, axis=(1, 2))
    return out
