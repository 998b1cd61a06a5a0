"""Charge-density functionals phi_m, their limits, and the cocycle checks.

phi_m(h) = <m, D h> with the global pairing conventions; the sign makes
the adjoint-action identity W(m) W(h) W(-m) = e^{i phi_m(h)} W(h) exact,
which the Weyl suite asserts.  Densities enter as amplitude providers
evaluated on shared shell grids, so a whole Huygens suite of probes costs
one provider sweep.

The scale ladder phi_{m_s}(f) is computed as phi_{m_inf}(f) minus the
position-space pairing of the far tail (transport window u in (s, inf)),
whose overlap with the probe's light cones is compact and empties beyond
the geometric threshold s_star - the same support argument the constancy
check quantifies.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..fourier.amplitudes import amp_m_infinity, amp_m_reg, amp_m_s, amp_rho0, grad_inv_laplacian
from ..fourier.quadrature import QuadratureConfig, gauss_rule
from ..fourier.radial_fields import meridian_to_cartesian, transport_components
from ..profiles import ChargeConfig
from .pairings import GridValues, PairingValue, ShellGrid, cone_smear_points, default_grid

__all__ = [
    "MInfinityPerp",
    "MRegPerp",
    "MScale",
    "GradInvLaplacianRho0",
    "ZeroProvider",
    "DeltaDF",
    "LaplaceProbe",
    "automorphism_phase",
    "current_phase",
    "functional_difference",
    "phi_m_s",
    "s_star",
    "tail_pairing",
    "translation_cocycle",
    "laplace_probe_distance",
]


class MInfinityPerp:
    """Transverse fully transported density as a spatial amplitude provider."""

    kind = "spatial"

    def __init__(self, config: ChargeConfig, quad: QuadratureConfig, sweep: bool = True):
        self.config = config
        self.quad = quad
        self.sweep = sweep

    def __call__(self, mag: float, n):
        from ..fourier.types import LightlikeMomentum

        amp = amp_m_infinity(self.config, LightlikeMomentum(mag, tuple(n)), self.quad, sweep=self.sweep)
        return amp.spatial, amp.err


class MRegPerp:
    """Transverse regularized merged density as a spatial amplitude provider."""

    kind = "spatial"

    def __init__(self, config: ChargeConfig, quad: QuadratureConfig, sweep: bool = True):
        self.config = config
        self.quad = quad
        self.sweep = sweep

    def __call__(self, mag: float, n):
        from ..fourier.types import LightlikeMomentum, transverse_project

        n = np.asarray(n, dtype=float)
        amp = amp_m_reg(self.config, LightlikeMomentum(mag, tuple(n)), self.quad, sweep=self.sweep)
        perp = transverse_project(amp, n)
        return perp.spatial, perp.err


class MScale:
    """Full four-component scale-s density provider (u-window [0, s])."""

    kind = "four"

    def __init__(self, config: ChargeConfig, s: float, quad: QuadratureConfig, sweep: bool = True):
        self.config = config
        self.s = float(s)
        self.quad = quad
        self.sweep = sweep

    def __call__(self, mag: float, n):
        from ..fourier.types import LightlikeMomentum

        amp = amp_m_s(self.config, self.s, LightlikeMomentum(mag, tuple(n)), self.quad, sweep=self.sweep)
        return amp.components, amp.err


class GradInvLaplacianRho0:
    """Longitudinal gauge-bridge limit grad Delta^-1 rho_0 (spatial provider)."""

    kind = "spatial"

    def __init__(self, config: ChargeConfig, quad: QuadratureConfig):
        self.config = config
        self.quad = quad

    def __call__(self, mag: float, n):
        from ..fourier.types import LightlikeMomentum

        mom = LightlikeMomentum(mag, tuple(n))
        rho, err = amp_rho0(self.config, mom, self.quad, sweep=True)
        amp = grad_inv_laplacian(rho, mom)
        return amp.spatial, err / max(mag, 1e-12)


class ZeroProvider:
    def __init__(self, kind: str = "spatial"):
        self.kind = kind

    def __call__(self, mag: float, n):
        return np.zeros(3 if self.kind == "spatial" else 4, dtype=complex), 0.0


@dataclass(frozen=True)
class DeltaDF:
    """On-shell current probe (delta d f)~^nu = p^nu (p . f~) for a test field f."""

    base: object

    kind = "four"

    @property
    def support(self):
        return self.base.support

    def amplitude(self, p0, pvec):
        vals = np.asarray(self.base.amplitude(p0, pvec))
        p0 = np.asarray(p0, dtype=float)
        if vals.shape[-1] == 3:
            pf = -np.sum(np.asarray(pvec) * vals, axis=-1)
        else:
            pf = p0 * vals[..., 0] - np.sum(np.asarray(pvec) * vals[..., 1:], axis=-1)
        out = np.zeros(np.asarray(pf).shape + (4,), dtype=complex)
        out[..., 0] = p0 * pf
        out[..., 1:] = np.asarray(pvec) * pf[..., None]
        return out

    def position(self, x4):
        raise NotImplementedError("current probes are momentum-space objects")


@dataclass(frozen=True)
class LaplaceProbe:
    """Double-Laplace regularized probe (p0 - i eps)^-2 (p^2 f~ - p (p.f~))."""

    base: object
    eps: float

    kind = "spatial"

    def __post_init__(self):
        if self.eps <= 0:
            raise ValueError("eps must be positive")

    @property
    def support(self):
        return self.base.support

    def amplitude(self, p0, pvec):
        vals = np.asarray(self.base.amplitude(p0, pvec))
        if vals.shape[-1] == 4:
            vals = vals[..., 1:]
        pvec = np.asarray(pvec, dtype=float)
        p2 = np.sum(pvec * pvec, axis=-1)
        pf = np.sum(pvec * vals, axis=-1)
        transverse = p2[..., None] * vals - pvec * pf[..., None]
        return transverse / (np.asarray(p0) - 1j * self.eps)[..., None] ** 2


def automorphism_phase(provider, probe, quad: QuadratureConfig, grid: ShellGrid | None = None) -> PairingValue:
    """phi_m(h) = <m, D h> evaluated against a closed-form probe."""
    gv = GridValues(grid or default_grid(), provider, provider.kind)
    return gv.pair_with_field(probe)


def current_phase(provider, f, quad: QuadratureConfig, grid: ShellGrid | None = None) -> PairingValue:
    """phi_m(delta d f): the automorphism phase picked up by the current."""
    return automorphism_phase(provider, DeltaDF(f), quad, grid=grid)


def functional_difference(provider_a, provider_b, region, probes, quad: QuadratureConfig, grid: ShellGrid | None = None):
    """phi_A(f) - phi_B(f) per probe, with region tags checked first.

    region is ('forward_cone', t): every probe support must lie strictly
    inside V+ + t, otherwise the probe is rejected.
    """
    tag, shift = region
    if tag != "forward_cone":
        raise ValueError(f"unsupported region tag {tag!r}")
    for f in probes:
        if f.support.min_cone_gap(shift) <= 0.0:
            raise ValueError(f"probe {f.label!r} is not supported inside the shifted forward cone")
    grid = grid or default_grid()
    gv_a = GridValues(grid, provider_a, provider_a.kind)
    gv_b = GridValues(grid, provider_b, provider_b.kind)
    out = []
    for f in probes:
        pa = gv_a.pair_with_field(f)
        pb = gv_b.pair_with_field(f)
        out.append(PairingValue(pa.value - pb.value, err=pa.err + pb.err))
    return out


# -- scale ladder ----------------------------------------------------------


def s_star(config: ChargeConfig, probe) -> float:
    """Geometric threshold: beyond it the transport tail is spacelike to the
    probe's light cones and phi_{m_s}(f) freezes."""
    gap = probe.support.min_cone_gap(0.0)
    if gap <= 0.0:
        raise ValueError("probe must be supported strictly inside the forward cone")
    x_reach = config.theta0.hi ** 2 / (2.0 * gap)
    return (x_reach + config.theta1.radius) / config.sigma.r_in


class _TailDensityShell:
    """Position density of the transport window (s, inf) in shell coordinates."""

    def __init__(self, config: ChargeConfig, s: float):
        self.config = config
        self.s = float(s)

    def components(self, x_norm, theta):
        fr, ft = transport_components(self.config, self.s, np.inf, x_norm, theta, 20, 32)
        return fr, ft


def tail_pairing(config: ChargeConfig, s: float, probe, quad: QuadratureConfig, n_nodes=(8, 14, 10, 8), inner=(10, 8, 8)) -> PairingValue:
    """<m_tail(s), D f> over the compact overlap of the tail with f's cones.

    Shell-adapted coordinates: the Jacobian cancels the density weights,
    leaving int dtau theta0 int d3x [ (x.F) K^0/x0 - F.K ] with F the
    tail transport field and K the cone smearing of the probe.
    """
    gap = probe.support.min_cone_gap(0.0)
    if gap <= 0.0:
        raise ValueError("probe must be supported strictly inside the forward cone")
    tau1, tau2 = config.theta0.lo, config.theta0.hi
    x_hi = tau2**2 / (2.0 * gap) + probe.support.radius + 1.0
    x_lo = max(0.0, s * config.sigma.r_in - config.theta1.radius)
    if x_hi <= x_lo:
        return PairingValue(0.0, err=0.0)
    tail = _TailDensityShell(config, s)

    def run(n_t, n_x, n_c, n_phi, m_r, m_c, m_phi):
        gt, wt = gauss_rule(n_t)
        taus = 0.5 * (tau2 - tau1) * gt + 0.5 * (tau1 + tau2)
        tw = 0.5 * (tau2 - tau1) * wt
        gx, wx = gauss_rule(n_x)
        xs = 0.5 * (x_hi - x_lo) * gx + 0.5 * (x_hi + x_lo)
        xw = 0.5 * (x_hi - x_lo) * wx
        # polar cap of the transport support around +e_z
        cap = float(np.max(tail.config.sigma.cap + np.arcsin(np.minimum(1.0, config.theta1.radius / np.maximum(xs, 1e-9)))))
        gc, wc = gauss_rule(n_c)
        c_lo = np.cos(min(np.pi, cap + 0.02))
        cs = 0.5 * (1.0 - c_lo) * gc + 0.5 * (1.0 + c_lo)
        cw = 0.5 * (1.0 - c_lo) * wc
        phis = (np.arange(n_phi) + 0.5) * 2.0 * np.pi / n_phi
        # meridian components on the (x, theta) subgrid are phi-independent
        xg, cg = np.meshgrid(xs, cs, indexing="ij")
        theta = np.arccos(np.clip(cg, -1, 1))
        fr, ft = tail.components(xg.ravel(), theta.ravel())
        fr = fr.reshape(xg.shape)
        ft = ft.reshape(xg.shape)
        total = 0.0
        ss = np.sqrt(np.clip(1.0 - cs**2, 0.0, None))
        for iphi, ph in enumerate(phis):
            e_x = np.stack(
                [np.outer(np.ones_like(xs), ss * np.cos(ph)), np.outer(np.ones_like(xs), ss * np.sin(ph)), np.outer(np.ones_like(xs), cs)],
                axis=-1,
            )
            pts = xg[..., None] * e_x
            vecs = meridian_to_cartesian(pts.reshape(-1, 3), fr.ravel(), ft.ravel()).reshape(pts.shape)
            for tau_val, tau_wt in zip(taus, tw):
                x0 = np.sqrt(tau_val**2 + xg**2)
                x4 = np.concatenate([x0[..., None], pts], axis=-1)
                live = (np.abs(fr) + np.abs(ft)) > 0
                if not np.any(live):
                    continue
                k = cone_smear_points(probe, x4[live].reshape(-1, 4), m_r, m_c, m_phi)
                rho0 = np.sum(pts[live] * vecs[live], axis=-1)
                contract = rho0 * k[:, 0] / x0[live] - np.sum(vecs[live] * k[:, 1:], axis=-1)
                w = (xw[:, None] * xg**2 * cw[None, :] * (2.0 * np.pi / n_phi))[live]
                total += tau_wt * float(config.theta0(tau_val)) * float(np.sum(w * contract))
        return -total / (4.0 * np.pi**2)

    v1 = run(n_nodes[0], n_nodes[1], n_nodes[2], n_nodes[3], *inner)
    v2 = run(n_nodes[0] + 3, n_nodes[1] + 6, n_nodes[2] + 4, n_nodes[3] + 4, inner[0] + 4, inner[1] + 3, inner[2] + 3)
    return PairingValue(v2, err=abs(v2 - v1))


def phi_m_s(config: ChargeConfig, s: float, probe, quad: QuadratureConfig, grid: ShellGrid | None = None, m_inf_values: PairingValue | None = None) -> PairingValue:
    """phi_{m_s}(f) = phi_{m_inf}(f) - <tail_s, D f>.

    Callers sweeping an s ladder should pass the cached phi_{m_inf}(f)
    pairing so the provider sweep happens once.
    """
    if m_inf_values is None:
        m_inf_values = automorphism_phase(MInfinityPerp(config, quad), probe, quad, grid=grid)
    tail = tail_pairing(config, s, probe, quad)
    return PairingValue(m_inf_values.value - tail.value, err=m_inf_values.err + tail.err)


# -- translation cocycle ----------------------------------------------------


def translation_cocycle(provider, x4, quad: QuadratureConfig, ir_ladder=(0.4, 0.2, 0.1, 0.05), p_max: float = 30.0, grid_dirs=(8, 6), cauchy_frac: float = 0.05):
    """Im <l, (l - l(x))>_0 = -int d3p/|p| |l~(p)|^2 sin(p.x) with IR ladder.

    Returns (PairingValue, partial rows).  Raises if the infrared ladder
    fails the Cauchy stability criterion (evidence that l is not in L1).
    """
    x4 = np.asarray(x4, dtype=float)
    eps = sorted(set(float(e) for e in ir_ladder), reverse=True)
    n_polar, n_az = grid_dirs
    gc, wc = gauss_rule(n_polar)
    phi = (np.arange(n_az) + 0.5) * 2.0 * np.pi / n_az
    s = np.sqrt(np.clip(1.0 - gc**2, 0.0, None))
    dirs = np.stack(
        [np.outer(s, np.cos(phi)).ravel(), np.outer(s, np.sin(phi)).ravel(), np.outer(gc, np.ones_like(phi)).ravel()],
        axis=1,
    )
    dw = np.outer(wc, np.full(n_az, 2.0 * np.pi / n_az)).ravel()

    def segment(a, b, per_octave=6):
        n_oct = max(1, int(np.ceil(np.log2(b / a))))
        gx, gw = gauss_rule(per_octave)
        tot, err = 0.0, 0.0
        for lo, hi in zip(np.geomspace(a, b, n_oct + 1)[:-1], np.geomspace(a, b, n_oct + 1)[1:]):
            mags = 0.5 * (hi - lo) * gx + 0.5 * (hi + lo)
            mw = 0.5 * (hi - lo) * gw
            for mag, w in zip(mags, mw):
                for n, wd in zip(dirs, dw):
                    v, e = provider(float(mag), n)
                    a2 = float(np.sum(np.abs(np.asarray(v)) ** 2))
                    px = mag * x4[0] - mag * float(n @ x4[1:])
                    tot += -w * mag * wd * a2 * np.sin(px)
                    err += w * mag * wd * 2.0 * np.sqrt(a2) * e
        return tot, err

    pieces = [segment(eps[0], p_max)]
    partials = [(f"eps={eps[0]:g}", pieces[0][0], pieces[0][1])]
    run_v, run_e = pieces[0]
    for lo, hi in zip(eps[1:], eps[:-1]):
        v, e = segment(lo, hi)
        run_v += v
        run_e += e
        partials.append((f"eps={lo:g}", run_v, run_e))
    vals = np.array([v for _, v, _ in partials])
    incs = np.abs(np.diff(vals))
    scale = max(np.abs(vals[-1]), 1e-12)
    if incs.size and incs[-1] > cauchy_frac * scale:
        raise ValueError("infrared ladder is not Cauchy-stable; the field is not L1-summable here")
    return PairingValue(float(vals[-1]), err=float(run_e) + float(incs[-1] if incs.size else 0.0)), partials


def laplace_probe_distance(f, eps: float, quad: QuadratureConfig, p_max: float = 30.0) -> float:
    """||LaplaceProbe(f, eps) - f_perp||_0 over the shell (L0 seminorm)."""
    grid = ShellGrid(p_min=5e-3, p_max=p_max, per_octave=8, n_polar=(8, 6), n_azimuth=6)
    lp = LaplaceProbe(f, eps)
    vals = grid.field_values(lp)
    fv = grid.field_values(f)
    if fv.shape[-1] == 4:
        fv = fv[..., 1:]
    pvec = grid.mags[:, None, None] * grid.dirs[None, :, :]
    p2 = np.sum(pvec * pvec, axis=-1)
    pf = np.sum(pvec * fv, axis=-1)
    fperp = fv - pvec * (pf / np.where(p2 > 0, p2, 1.0))[..., None]
    diff2 = np.sum(np.abs(vals - fperp) ** 2, axis=-1)
    # L0 measure d3p/|p| = 2 * (p/2 dp dOmega)
    return float(np.sqrt(np.sum(grid.weights * 2.0 * diff2)))