"""Public momentum-space amplitudes of the smeared densities.

Conventions: phase p.x = p0 x0 - p.x, prefactor (2 pi)^-2 on all path and
current amplitudes.  Charge-density transforms (amp_rho_s, amp_rho0) carry
no prefactor so their zero-momentum limit is the plain total charge.

The u-window algebra routes everything through two engines: the shell
transform over the exactly reduced transported-density fields, and, for
the regularized density at small |p| where the three window pieces cancel
to O(log), the subtracted merged-path integrator.
"""

from __future__ import annotations

import numpy as np

from ..profiles import ChargeConfig, separation_ok
from ..worldline import ShellPathParams
from .merged import PathSamples, interp_amplitude, merged_smeared_amplitude
from .quadrature import QuadratureConfig
from .radial_fields import ConvolvedChargeField, RadialScalarField, TransportField, meridian_to_cartesian, transport_components
from .shell_transform import EngineOpts, ShellTransformEngine
from .types import Amplitude, LightlikeMomentum, transverse_project

__all__ = [
    "AmplitudeWorkspace",
    "workspace",
    "rho_n",
    "amp_m_s",
    "amp_m_infinity",
    "amp_m_truncated",
    "amp_m_interp",
    "amp_m_reg",
    "amp_rho_s",
    "amp_rho0",
    "grad_inv_laplacian",
]

_PREF = 1.0 / (2.0 * np.pi) ** 2
_REG_SPLIT = 0.6


def _as_momentum(p) -> LightlikeMomentum:
    if isinstance(p, LightlikeMomentum):
        return p
    p = np.asarray(p, dtype=float)
    if p.shape == (4,):
        mag = float(np.linalg.norm(p[1:]))
        if abs(p[0] - mag) > 1e-10 * max(1.0, mag):
            raise ValueError("expected a forward light-like momentum")
        return LightlikeMomentum(mag, tuple(p[1:] / mag))
    raise TypeError("momentum must be LightlikeMomentum or a 4-array")


class AmplitudeWorkspace:
    """Engine and sample caches for one charge configuration.

    Shell-transform engines keep per-direction Filon tables, and the
    density field tables are shared between windows, so sweeps over |p|
    ladders and direction grids amortize all precomputation.
    """

    def __init__(self, config: ChargeConfig, opts: EngineOpts | None = None):
        self.config = config
        self.opts = opts or EngineOpts()
        self._engines: dict[tuple, ShellTransformEngine] = {}
        self._fields: dict[tuple, TransportField] = {}
        self._samples: dict[tuple, PathSamples] = {}

    def transport_field(self, u_lo: float, u_hi: float, reflected: bool = False) -> TransportField:
        # reflected views share the unreflected table
        base = (u_lo, u_hi)
        if base not in self._fields:
            self._fields[base] = TransportField(self.config, u_lo, u_hi)
        if not reflected:
            return self._fields[base]
        key = (u_lo, u_hi, "reflected")
        if key not in self._fields:
            refl = TransportField(self.config, u_lo, u_hi, reflected=True)
            refl._splines = self._fields[base]._splines
            self._fields[key] = refl
        return self._fields[key]

    def transport_engine(self, u_lo: float, u_hi: float, reflected: bool = False, sweep: bool = False) -> ShellTransformEngine:
        key = ("transport", u_lo, u_hi, reflected, sweep)
        if key not in self._engines:
            field = self.transport_field(u_lo, u_hi, reflected)
            opts = self.opts if not sweep else EngineOpts(**{**self.opts.__dict__, "refine": False})
            w = self.config.theta0
            self._engines[key] = ShellTransformEngine(w, w.lo, w.hi, field, kind="vector", opts=opts)
        return self._engines[key]

    def scalar_engine(self, tag: str, field, sweep: bool = False) -> ShellTransformEngine:
        key = ("scalar", tag, sweep)
        if key not in self._engines:
            opts = self.opts if not sweep else EngineOpts(**{**self.opts.__dict__, "refine": False})
            w = self.config.theta0
            self._engines[key] = ShellTransformEngine(w, w.lo, w.hi, field, kind="scalar", opts=opts)
        return self._engines[key]

    def samples(self, quad: QuadratureConfig) -> PathSamples:
        key = (quad.qmc_samples, quad.seed)
        if key not in self._samples:
            self._samples[key] = PathSamples(self.config, quad)
        return self._samples[key]


_WORKSPACES: dict[ChargeConfig, AmplitudeWorkspace] = {}


def workspace(config: ChargeConfig) -> AmplitudeWorkspace:
    if config not in _WORKSPACES:
        _WORKSPACES[config] = AmplitudeWorkspace(config)
    return _WORKSPACES[config]


def rho_n(config: ChargeConfig, n, x) -> np.ndarray:
    """Transverse-projected transported density rho_n(x) = P_n rho(x).

    Evaluated from the exact kernel reduction (the analytic u-window of
    the support analysis is built into the radial moment window).
    """
    if not separation_ok(config):
        raise ValueError("configuration violates the spacelike separation bound")
    n = np.asarray(n, dtype=float)
    x = np.asarray(x, dtype=float)
    flat = x.reshape(-1, 3)
    xn = np.linalg.norm(flat, axis=-1)
    cz = np.where(xn > 0, flat[:, 2] / np.where(xn > 0, xn, 1.0), 1.0)
    fr, ft = transport_components(config, 0.0, np.inf, xn, np.arccos(np.clip(cz, -1, 1)), 24, 40)
    vec = meridian_to_cartesian(flat, fr, ft)
    vec = vec - np.outer(vec @ n, n)
    return vec.reshape(x.shape)


def _err_scalar(delta: np.ndarray, outer: np.ndarray, n=None, project: bool = False) -> float:
    if project and n is not None:
        def perp(v):
            sp = v[:3] - n * np.real(n @ v[:3]) - 1j * n * np.imag(n @ v[:3])
            return float(np.linalg.norm(sp))
        return perp(delta) + perp(outer)
    return float(np.max(np.abs(delta)) + np.max(np.abs(outer)))


def _vector_amplitude(ws: AmplitudeWorkspace, engine: ShellTransformEngine, p, quad: QuadratureConfig, project: bool = False) -> Amplitude:
    mom = _as_momentum(p)
    channels, delta, outer = engine.amplitude(mom.mag, mom.n, quad)
    err = _err_scalar(delta, outer, n=mom.n, project=project)
    return Amplitude.from_parts(_PREF * channels[3], _PREF * channels[:3], err=_PREF * err)


def amp_m_s(config: ChargeConfig, s: float, p, quad: QuadratureConfig, transverse: bool = False, sweep: bool = False) -> Amplitude:
    """Four-component amplitude of the scale-s density (u-window [0, s])."""
    if s < 1.0:
        raise ValueError(f"scale s must be >= 1, got {s}")
    ws = workspace(config)
    amp = _vector_amplitude(ws, ws.transport_engine(0.0, s, sweep=sweep), p, quad)
    return transverse_project(amp, _as_momentum(p).n) if transverse else amp


def amp_m_infinity(config: ChargeConfig, p, quad: QuadratureConfig, sweep: bool = False) -> Amplitude:
    """Transverse amplitude of the fully transported density (u-window [0, inf))."""
    if not separation_ok(config):
        raise ValueError("configuration violates the spacelike separation bound")
    ws = workspace(config)
    amp = _vector_amplitude(ws, ws.transport_engine(0.0, np.inf, sweep=sweep), p, quad, project=True)
    return transverse_project(amp, _as_momentum(p).n)


def amp_m_truncated(config: ChargeConfig, p, quad: QuadratureConfig, branch: str = "out", sweep: bool = False) -> Amplitude:
    """Amplitude of one truncated branch: 'out' is u >= 1, 'mirror' is u <= -1.

    The mirror branch evaluates the reflected field at (|p|, -n); its
    spatial components pick up a sign and the whole value a conjugation
    (time reflection of the density).
    """
    ws = workspace(config)
    mom = _as_momentum(p)
    if branch == "out":
        return _vector_amplitude(ws, ws.transport_engine(1.0, np.inf, sweep=sweep), p, quad)
    if branch != "mirror":
        raise ValueError(f"unknown branch {branch!r}")
    engine = ws.transport_engine(1.0, np.inf, reflected=True, sweep=sweep)
    channels, delta, outer = engine.amplitude(mom.mag, -mom.n, quad)
    spatial = -np.conj(channels[:3])
    time = np.conj(channels[3])
    err = _err_scalar(delta, outer)
    return Amplitude.from_parts(_PREF * time, _PREF * spatial, err=_PREF * err)


def amp_m_interp(config: ChargeConfig, p, quad: QuadratureConfig) -> Amplitude:
    """Smeared amplitude of the straight interpolation piece (-1 <= u <= 1)."""
    ws = workspace(config)
    return interp_amplitude(ws.samples(quad), _as_momentum(p), quad)


def amp_m_reg(config: ChargeConfig, p, quad: QuadratureConfig, sweep: bool = False) -> Amplitude:
    """Amplitude of the regularized merged density (mirror + interpolation + out).

    Below |p| = 0.6 the three pieces cancel a 1/(p.l) pole, so the
    subtracted merged-path route is used; above, the piece sum.
    """
    if not separation_ok(config):
        raise ValueError("configuration violates the spacelike separation bound")
    mom = _as_momentum(p)
    ws = workspace(config)
    if mom.mag <= _REG_SPLIT:
        return merged_smeared_amplitude(ws.samples(quad), mom, quad)
    out = amp_m_truncated(config, mom, quad, branch="out", sweep=sweep)
    mirror = amp_m_truncated(config, mom, quad, branch="mirror", sweep=sweep)
    mid = amp_m_interp(config, mom, quad)
    comps = out.components + mirror.components + mid.components
    return Amplitude(comps, err=out.err + mirror.err + mid.err)


def amp_rho_s(config: ChargeConfig, s: float, p, quad: QuadratureConfig, sweep: bool = False) -> tuple[complex, float]:
    """Transform of the transported endpoint charge density (no prefactor).

    At p -> 0 the value tends to the total compensating charge q.
    """
    if s < 1.0:
        raise ValueError(f"scale s must be >= 1, got {s}")
    ws = workspace(config)
    eng = ws.scalar_engine(f"conv{s}", ConvolvedChargeField(config, s), sweep=sweep)
    mom = _as_momentum(p)
    channels, delta, outer = eng.amplitude(mom.mag, mom.n, quad)
    return complex(config.q * channels[0]), config.q * _err_scalar(delta, outer)


def amp_rho0(config: ChargeConfig, p, quad: QuadratureConfig, sweep: bool = False) -> tuple[complex, float]:
    """Transform of the static endpoint charge density (no prefactor)."""
    ws = workspace(config)
    eng = ws.scalar_engine("rho0", RadialScalarField(config.theta1.radial, config.theta1.radius), sweep=sweep)
    mom = _as_momentum(p)
    channels, delta, outer = eng.amplitude(mom.mag, mom.n, quad)
    return complex(config.q * channels[0]), config.q * _err_scalar(delta, outer)


def grad_inv_laplacian(rho_amp: complex, p) -> Amplitude:
    """Longitudinal field amplitude -i p rho / |p|^2 from a charge amplitude.

    The sign is fixed so that i p . (result) recovers rho_amp.
    """
    mom = _as_momentum(p)
    if not mom.mag > 0.0:
        raise ValueError("grad_inv_laplacian is singular at zero momentum")
    spatial = -1j * mom.n / mom.mag * rho_amp
    return Amplitude.from_parts(0.0, spatial, err=0.0)
