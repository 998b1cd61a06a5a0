"""Charge and smearing profiles.

Three smooth compactly supported profiles enter every density in the
artifact: a proper-time window theta0 on [tau1, tau2] carrying the total
charge q, a rotation-invariant spatial bump theta1 on the ball |x| <= r
with unit integral, and a transport profile sigma supported in the annulus
R <= |y| <= Rbar with unit integral.

sigma is anisotropic: a radial mollifier times an angular cap mollifier
around +e_z (half-angle ``cap``).  A rotation-invariant sigma would
transport the compensating charge isotropically and the transverse
amplitudes would vanish identically by symmetry, which empties the decay
and infrared checks; the cap keeps a genuine direction set of transported
charge while preserving the annulus support and unit normalization.

All profiles are the canonical mollifier exp(-1/(1-t^2)) affinely mapped
to their supports and normalized by cached Gauss-Legendre quadrature.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from functools import cached_property

import numpy as np
from scipy.integrate import cumulative_simpson
from scipy.interpolate import PchipInterpolator

__all__ = [
    "RadialWindow",
    "Bump3",
    "ShellBump3",
    "ChargeConfig",
    "bump",
    "eval_theta0",
    "eval_theta1",
    "eval_sigma",
    "scale_sigma",
    "separation_ok",
    "separation_threshold",
    "total_charge",
    "default_config",
]

_GL_N = 240


def bump(t):
    """Canonical mollifier exp(-1/(1-t^2)) on |t| < 1, zero outside."""
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    inside = np.abs(t) < 1.0
    ti = t[inside]
    out[inside] = np.exp(-1.0 / (1.0 - ti * ti))
    return out


def _gl_nodes(a: float, b: float, n: int = _GL_N):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (b - a) * x + 0.5 * (a + b), 0.5 * (b - a) * w


@dataclass(frozen=True)
class RadialWindow:
    """Proper-time window theta0: support [lo, hi], integral ``total``."""

    lo: float
    hi: float
    total: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.lo < self.hi:
            raise ValueError(f"need 0 < lo < hi, got ({self.lo}, {self.hi})")

    @cached_property
    def _amplitude(self) -> float:
        tau, w = _gl_nodes(self.lo, self.hi)
        raw = float(np.sum(w * bump(self._map(tau))))
        return self.total / raw

    def _map(self, tau):
        return (2.0 * np.asarray(tau, dtype=float) - self.lo - self.hi) / (self.hi - self.lo)

    def __call__(self, tau):
        return self._amplitude * bump(self._map(tau))


@dataclass(frozen=True)
class Bump3:
    """Rotation-invariant bump theta1 on |x| <= radius, integral ``total``."""

    radius: float
    total: float = 1.0

    def __post_init__(self):
        if not self.radius > 0.0:
            raise ValueError(f"radius must be positive, got {self.radius}")

    @cached_property
    def _amplitude(self) -> float:
        v, w = _gl_nodes(0.0, self.radius)
        raw = 4.0 * np.pi * float(np.sum(w * v**2 * bump(v / self.radius)))
        return self.total / raw

    def radial(self, v):
        """Profile value as a function of |x|."""
        return self._amplitude * bump(np.asarray(v, dtype=float) / self.radius)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return self.radial(np.linalg.norm(x, axis=-1))


@dataclass(frozen=True)
class ShellBump3:
    """Transport profile sigma: annulus r_in <= |y| <= r_out times a cap.

    The angular factor is a mollifier in c = cos(angle to +e_z) supported
    on angles <= ``cap``; the product integrates to 1 over R^3.
    """

    r_in: float
    r_out: float
    cap: float = 0.5

    def __post_init__(self):
        if not 0.0 < self.r_in < self.r_out:
            raise ValueError(f"need 0 < r_in < r_out, got ({self.r_in}, {self.r_out})")
        if not 0.0 < self.cap <= np.pi:
            raise ValueError(f"cap half-angle must lie in (0, pi], got {self.cap}")

    def _radial_raw(self, v):
        v = np.asarray(v, dtype=float)
        return bump((2.0 * v - self.r_in - self.r_out) / (self.r_out - self.r_in))

    def _angular_raw(self, c):
        # mollifier in (1 - c)/(1 - cos cap); smooth on the sphere
        c = np.asarray(c, dtype=float)
        depth = 1.0 - np.cos(self.cap)
        return bump((1.0 - c) / depth)

    @cached_property
    def _norms(self) -> tuple[float, float]:
        v, wv = _gl_nodes(self.r_in, self.r_out)
        rad = float(np.sum(wv * v**2 * self._radial_raw(v)))
        c, wc = _gl_nodes(np.cos(self.cap), 1.0)
        ang = 2.0 * np.pi * float(np.sum(wc * self._angular_raw(c)))
        return rad, ang

    @cached_property
    def _radial_cdf(self) -> PchipInterpolator:
        # cumulative second radial moment, normalized to 1 at r_out
        v = np.linspace(self.r_in, self.r_out, 4097)
        cum = cumulative_simpson(v**2 * self._radial_raw(v), x=v, initial=0.0)
        return PchipInterpolator(v, cum / cum[-1])

    def angular_density(self, c):
        """Ray density S(e) = int w^2 sigma(w e) dw as a function of c = e.e_z.

        Normalized so that 2*pi * int_{-1}^{1} angular_density(c) dc = 1;
        invariant under the s-scaling of the profile.
        """
        _, ang = self._norms
        return self._angular_raw(c) / ang

    @cached_property
    def _azimuthal_moment_splines(self):
        # A0(a,b) = int dpsi rho_ang(a - b cos psi), A1 likewise with cos psi;
        # tabulated once so density kernels avoid the psi tensor dimension.
        from scipy.interpolate import RectBivariateSpline

        alpha = np.linspace(-1.0, 1.0, 401)
        beta = np.linspace(0.0, 1.0, 241)
        psi, wpsi = _gl_nodes(0.0, np.pi, 128)
        cos_psi = np.cos(psi)
        cz = alpha[:, None, None] - beta[None, :, None] * cos_psi[None, None, :]
        dens = self.angular_density(cz)
        a0 = 2.0 * np.sum(dens * wpsi, axis=-1)
        a1 = 2.0 * np.sum(dens * cos_psi * wpsi, axis=-1)
        return (
            RectBivariateSpline(alpha, beta, a0, kx=3, ky=3, s=0),
            RectBivariateSpline(alpha, beta, a1, kx=3, ky=3, s=0),
        )

    def azimuthal_moments(self, alpha, beta):
        """(A0, A1): azimuthal integrals of the ray density at c_z = a - b cos(psi)."""
        sp0, sp1 = self._azimuthal_moment_splines
        alpha = np.asarray(alpha, dtype=float)
        beta = np.asarray(beta, dtype=float)
        alpha, beta = np.broadcast_arrays(alpha, beta)
        shape = alpha.shape
        a = np.clip(alpha, -1.0, 1.0).ravel()
        b = np.clip(beta, 0.0, 1.0).ravel()
        out0 = sp0.ev(a, b).reshape(shape)
        out1 = sp1.ev(a, b).reshape(shape)
        # outside the reachable cap both moments vanish identically
        dead = alpha - beta > 1.0 - 1e-15  # unreachable: c_z always > 1
        lo = alpha + beta < np.cos(self.cap)
        out0 = np.where(lo | dead, 0.0, out0)
        out1 = np.where(lo | dead, 0.0, out1)
        return out0, out1

    def radial_moment_cdf(self, b):
        """Fraction of the second radial moment carried by radii <= b."""
        b = np.asarray(b, dtype=float)
        out = np.zeros_like(b)
        out[b >= self.r_out] = 1.0
        mid = (b > self.r_in) & (b < self.r_out)
        if np.any(mid):
            out[mid] = self._radial_cdf(b[mid])
        return out

    def __call__(self, y):
        y = np.asarray(y, dtype=float)
        v = np.linalg.norm(y, axis=-1)
        rad, ang = self._norms
        with np.errstate(invalid="ignore", divide="ignore"):
            c = np.where(v > 0.0, y[..., 2] / np.where(v > 0.0, v, 1.0), 1.0)
        return self._radial_raw(v) * self._angular_raw(c) / (rad * ang)


@dataclass(frozen=True)
class ChargeConfig:
    """The full profile triple with transport scale s and total charge q."""

    theta0: RadialWindow
    theta1: Bump3
    sigma: ShellBump3
    s: float = 1.0
    q: float = 1.0

    def __post_init__(self):
        if not self.s >= 1.0:
            raise ValueError(f"scale s must be >= 1, got {self.s}")


def eval_theta0(window: RadialWindow, tau):
    return window(tau)


def eval_theta1(bump3: Bump3, x):
    return bump3(x)


def eval_sigma(shell: ShellBump3, x):
    return shell(x)


def scale_sigma(config: ChargeConfig, s: float) -> ChargeConfig:
    """Transport the compensating charge: sigma_s(x) = s^-3 sigma(x/s).

    For the mollifier profiles this is exactly the ShellBump3 with both
    radii scaled by s; the unit integral is preserved.
    """
    if s < 1.0:
        raise ValueError(f"scale s must be >= 1, got {s}")
    sig = config.sigma
    return replace(
        config,
        sigma=ShellBump3(r_in=s * sig.r_in, r_out=s * sig.r_out, cap=sig.cap),
        s=s,
    )


def separation_threshold(config: ChargeConfig) -> float:
    """Right-hand side of the spacelike-separation inequality for R."""
    t1, t2 = config.theta0.lo, config.theta0.hi
    r = config.theta1.radius
    return (t2**2 - t1**2) / (2.0 * t1) + (1.0 + t2**2 / t1**2) * r


def separation_ok(config: ChargeConfig) -> bool:
    """Strict inequality R > (tau2^2-tau1^2)/(2 tau1) + (1+tau2^2/tau1^2) r."""
    return config.sigma.r_in > separation_threshold(config)


def total_charge(config: ChargeConfig) -> float:
    """Total charge carried by theta0 (the windows are built to integrate to it)."""
    return config.theta0.total


def default_config(
    tau1: float = 1.0,
    tau2: float = 2.0,
    r: float = 0.5,
    big_r: float = 5.0,
    big_r_bar: float = 8.0,
    q: float = 1.0,
    s: float = 1.0,
    sigma_cap: float = 0.5,
) -> ChargeConfig:
    """Smallest round-number configuration clearing the separation bound."""
    return ChargeConfig(
        theta0=RadialWindow(tau1, tau2, total=q),
        theta1=Bump3(r, total=1.0),
        sigma=ShellBump3(big_r, big_r_bar, cap=sigma_cap),
        s=s,
        q=q,
    )
