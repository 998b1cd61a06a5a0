"""Probe test fields with closed-form Fourier transforms.

Probes are separable polynomial bumps (1-t^2)^4: C^3, compactly supported,
and with spherical-Bessel closed forms for both the 1D time window and the
3D radial factor, so pairing integrals over the momentum shell never nest
a numerical Fourier transform.  Two families cover the artifact:

* SpatialBumpField - a three-vector test function a * chi(x0) psi(x)
  (temporal-gauge kind, generally not divergence free);
* CurlBumpField - (0, chi(x0) grad(psi) x a), identically divergence
  free on and off shell.

Support tags are closed balls in time and space; the region predicates
used by the Huygens suites are conservative (ball geometry).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import jv

__all__ = [
    "bump_time_transform",
    "bump_radial_transform",
    "SpatialBumpField",
    "CurlBumpField",
    "field_to_dict",
    "field_from_dict",
]

_C4 = np.sqrt(np.pi) * 24.0  # Gamma(5) sqrt(pi)


def _poly_bump(t):
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    m = np.abs(t) < 1.0
    out[m] = (1.0 - t[m] ** 2) ** 4
    return out


def bump_time_transform(omega):
    """B(w) = int_-1^1 (1-t^2)^4 e^{i w t} dt (real, even)."""
    w = np.abs(np.asarray(omega, dtype=float))
    out = np.empty_like(w)
    small = w < 1e-2
    ws = w[small]
    out[small] = 256.0 / 315.0 - ws**2 * (256.0 / 3465.0) / 2.0 + ws**4 * (256.0 / 15015.0) / 24.0
    wl = w[~small]
    out[~small] = _C4 * (2.0 / wl) ** 4.5 * jv(4.5, wl)
    return out


def bump_radial_transform(kappa):
    """S(k) = int_{|u|<=1} d3u (1-u^2)^4 e^{-i k.u} as a function of k=|k| (real)."""
    k = np.abs(np.asarray(kappa, dtype=float))
    out = np.empty_like(k)
    small = k < 1e-2
    ks = k[small]
    out[small] = 4.0 * np.pi * (128.0 / 3465.0 - ks**2 / 6.0 * (128.0 / 15015.0) + ks**4 / 120.0 * (128.0 / 45045.0))
    kl = k[~small]
    out[~small] = 2.0 * np.pi * _C4 * (2.0**4.5) * kl**-5.5 * jv(5.5, kl)
    return out


@dataclass(frozen=True)
class _BumpGeometry:
    t_center: float
    t_half: float
    center: tuple[float, float, float]
    radius: float

    def chi(self, x0):
        return _poly_bump((np.asarray(x0, dtype=float) - self.t_center) / self.t_half)

    def psi(self, x):
        x = np.asarray(x, dtype=float)
        d = np.linalg.norm(x - np.asarray(self.center), axis=-1)
        return _poly_bump(d / self.radius)

    def chi_hat(self, p0):
        return self.t_half * np.exp(1j * np.asarray(p0) * self.t_center) * bump_time_transform(np.asarray(p0) * self.t_half)

    def psi_hat(self, pvec):
        pvec = np.asarray(pvec, dtype=float)
        mag = np.linalg.norm(pvec, axis=-1)
        phase = np.exp(-1j * (pvec @ np.asarray(self.center)))
        return self.radius**3 * phase * bump_radial_transform(mag * self.radius)

    # -- region predicates -------------------------------------------------
    def min_cone_gap(self, shift: float = 0.0) -> float:
        """min over the support of (x0 - shift - |x|); positive inside V+ + shift."""
        return (self.t_center - self.t_half - shift) - (float(np.linalg.norm(self.center)) + self.radius)

    def max_backcone_gap(self, shift: float) -> float:
        """max over the support of (x0 - shift + |x|); negative inside V- + shift."""
        return (self.t_center + self.t_half - shift) + (float(np.linalg.norm(self.center)) + self.radius)


@dataclass(frozen=True)
class SpatialBumpField:
    """Three-vector probe a * chi(x0) psi(x); kind 'spatial'."""

    label: str
    geometry: _BumpGeometry
    direction: tuple[float, float, float]

    kind: str = field(default="spatial", init=False)

    def amplitude(self, p0, pvec):
        """Momentum components (.., 3) at general (p0, p) with the global FT convention."""
        a = np.asarray(self.direction, dtype=float)
        scal = self.geometry.chi_hat(p0) * self.geometry.psi_hat(pvec) / (2.0 * np.pi) ** 2
        return np.asarray(scal)[..., None] * a

    def shell(self, mag, n):
        n = np.asarray(n, dtype=float)
        return self.amplitude(np.asarray(mag), np.asarray(mag)[..., None] * n)

    def position(self, x4):
        x4 = np.asarray(x4, dtype=float)
        a = np.asarray(self.direction, dtype=float)
        val = self.geometry.chi(x4[..., 0]) * self.geometry.psi(x4[..., 1:])
        out = np.zeros(x4.shape[:-1] + (4,))
        out[..., 1:] = val[..., None] * a
        return out

    @property
    def support(self) -> _BumpGeometry:
        return self.geometry


@dataclass(frozen=True)
class CurlBumpField:
    """Divergence-free probe (0, chi(x0) grad(psi) x a); kind 'four'."""

    label: str
    geometry: _BumpGeometry
    direction: tuple[float, float, float]

    kind: str = field(default="four", init=False)

    def amplitude(self, p0, pvec):
        """Components (.., 4): (0, i psi_hat chi_hat (p x a)) with the FT convention."""
        pvec = np.asarray(pvec, dtype=float)
        a = np.asarray(self.direction, dtype=float)
        scal = 1j * self.geometry.chi_hat(p0) * self.geometry.psi_hat(pvec) / (2.0 * np.pi) ** 2
        cross = np.cross(pvec, np.broadcast_to(a, pvec.shape))
        out = np.zeros(np.asarray(scal).shape + (4,), dtype=complex)
        out[..., 1:] = np.asarray(scal)[..., None] * cross
        return out

    def shell(self, mag, n):
        n = np.asarray(n, dtype=float)
        mag = np.asarray(mag)
        return self.amplitude(mag, mag[..., None] * n)

    def position(self, x4):
        """Exact position-space components (0, chi grad(psi) x a)."""
        x4 = np.asarray(x4, dtype=float)
        g = self.geometry
        a = np.asarray(self.direction, dtype=float)
        rel = x4[..., 1:] - np.asarray(g.center)
        d = np.linalg.norm(rel, axis=-1)
        u = d / g.radius
        # d/dd of (1 - u^2)^4 = -8 u (1-u^2)^3 / radius
        dpsi = np.where(u < 1.0, -8.0 * u * np.clip(1.0 - u**2, 0.0, None) ** 3 / g.radius, 0.0)
        with np.errstate(invalid="ignore", divide="ignore"):
            e_r = np.where(d[..., None] > 1e-14, rel / np.where(d[..., None] > 1e-14, d[..., None], 1.0), 0.0)
        grad = dpsi[..., None] * e_r
        out = np.zeros(x4.shape[:-1] + (4,))
        out[..., 1:] = g.chi(x4[..., 0])[..., None] * np.cross(grad, np.broadcast_to(a, grad.shape))
        return out

    @property
    def support(self) -> _BumpGeometry:
        return self.geometry


def make_geometry(t_center, t_half, center, radius) -> _BumpGeometry:
    if t_half <= 0 or radius <= 0:
        raise ValueError("supports must have positive extent")
    return _BumpGeometry(float(t_center), float(t_half), tuple(float(c) for c in center), float(radius))


def field_to_dict(f) -> dict:
    g = f.geometry
    return {
        "label": f.label,
        "kind": "curl_bump" if isinstance(f, CurlBumpField) else "spatial_bump",
        "support": {"t_center": g.t_center, "t_half": g.t_half, "center": list(g.center), "radius": g.radius},
        "direction": list(f.direction),
    }


def field_from_dict(d: dict):
    s = d["support"]
    geom = make_geometry(s["t_center"], s["t_half"], s["center"], s["radius"])
    cls = CurlBumpField if d["kind"] == "curl_bump" else SpatialBumpField
    return cls(label=d["label"], geometry=geom, direction=tuple(d["direction"]))
