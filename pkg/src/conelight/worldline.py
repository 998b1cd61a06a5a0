"""Charge transport paths on time shells and their asymptotics.

The basic path runs along a time shell of proper time tau, starting at
spatial offset x and moving in direction y:

    w(u) = (sqrt(tau^2 + (x + u y)^2), x + u y).

Its mirror image in the backward cone carries the opposite time sign, and
the merged path glues mirror (u <= -1), a straight interpolation
(-1 <= u <= 1) and shell (u >= 1) branches into one continuous worldline
whose velocity is bounded with kinks at u = +-1 only.

For large |u| both branches share the asymptote u*l + r + a/u + b/u^2 with
l light-like, r spacelike and orthogonal to l, and a positive timelike;
the coefficients are exact and exposed for the subtracted amplitude
integrals.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spacetime import four_vector, minkowski_dot

__all__ = [
    "ShellPathParams",
    "AsymptoticData",
    "shell_path",
    "shell_velocity",
    "mirror_path",
    "mirror_velocity",
    "merged_path",
    "merged_velocity",
    "asymptotic_data",
]


@dataclass(frozen=True)
class ShellPathParams:
    """Path data: proper time tau > 0, start offset x1, direction y != 0."""

    tau: float
    x1: tuple[float, float, float]
    y: tuple[float, float, float]

    def __post_init__(self):
        if not self.tau > 0.0:
            raise ValueError(f"tau must be positive, got {self.tau}")
        if not np.linalg.norm(self.y) > 0.0:
            raise ValueError("direction y must be nonzero")


@dataclass(frozen=True)
class AsymptoticData:
    """Asymptote coefficients: z(u) = u l + r + a/u + b/u^2 + O(u^-3)."""

    l: np.ndarray
    r: np.ndarray
    a: np.ndarray
    b: np.ndarray


def _pos(p: ShellPathParams, u):
    u = np.asarray(u, dtype=float)
    return np.asarray(p.x1, dtype=float) + u[..., None] * np.asarray(p.y, dtype=float)


def shell_path(p: ShellPathParams, u) -> np.ndarray:
    """w(u) on the time shell; returns (..., 4)."""
    pos = _pos(p, u)
    t = np.sqrt(p.tau**2 + np.sum(pos * pos, axis=-1))
    return four_vector(t, pos)


def shell_velocity(p: ShellPathParams, u) -> np.ndarray:
    """Exact derivative dw/du; spatial part is the constant y."""
    pos = _pos(p, u)
    t = np.sqrt(p.tau**2 + np.sum(pos * pos, axis=-1))
    y = np.asarray(p.y, dtype=float)
    t_dot = np.sum(pos * y, axis=-1) / t
    return four_vector(t_dot, np.broadcast_to(y, pos.shape))


def mirror_path(p: ShellPathParams, u) -> np.ndarray:
    """Backward-cone counterpart for u <= 0: time component negated."""
    u = np.asarray(u, dtype=float)
    if np.any(u > 0.0):
        raise ValueError("mirror path is defined for u <= 0 only")
    w = shell_path(p, u)
    w[..., 0] = -w[..., 0]
    return w


def mirror_velocity(p: ShellPathParams, u) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    if np.any(u > 0.0):
        raise ValueError("mirror path is defined for u <= 0 only")
    v = shell_velocity(p, u)
    v[..., 0] = -v[..., 0]
    return v


def _contact_points(p: ShellPathParams):
    w_plus = shell_path(p, np.array(1.0))
    w_minus = mirror_path(p, np.array(-1.0))
    return w_plus, w_minus


def merged_path(p: ShellPathParams, u) -> np.ndarray:
    """Three-piece continuous path: mirror, straight interpolation, shell."""
    u = np.asarray(u, dtype=float)
    w_plus, w_minus = _contact_points(p)
    mid = 0.5 * (w_plus + w_minus)
    half = 0.5 * (w_plus - w_minus)
    out = np.empty(u.shape + (4,))
    lo = u <= -1.0
    hi = u >= 1.0
    inner = ~(lo | hi)
    if np.any(lo):
        out[lo] = mirror_path(p, u[lo])
    if np.any(hi):
        out[hi] = shell_path(p, u[hi])
    if np.any(inner):
        out[inner] = mid + u[inner, None] * half
    return out


def merged_velocity(p: ShellPathParams, u) -> np.ndarray:
    """Velocity of the merged path; constant on (-1, 1), kinks at u = +-1."""
    u = np.asarray(u, dtype=float)
    w_plus, w_minus = _contact_points(p)
    half = 0.5 * (w_plus - w_minus)
    out = np.empty(u.shape + (4,))
    lo = u <= -1.0
    hi = u >= 1.0
    inner = ~(lo | hi)
    if np.any(lo):
        out[lo] = mirror_velocity(p, u[lo])
    if np.any(hi):
        out[hi] = shell_velocity(p, u[hi])
    if np.any(inner):
        out[inner] = half
    return out


def asymptotic_data(p: ShellPathParams) -> AsymptoticData:
    """Exact asymptote coefficients shared by the shell and mirror branches.

    l = (|y|, y), r = ((x.y)/|y|, x), a = ((tau^2+x^2)/(2|y|) - (x.y)^2/(2|y|^3), 0),
    and the next order b = -((x.y)/y^2) a.  minkowski_dot(l, l) = 0,
    minkowski_dot(l, r) = 0 and a is positive timelike.
    """
    x = np.asarray(p.x1, dtype=float)
    y = np.asarray(p.y, dtype=float)
    ynorm = float(np.linalg.norm(y))
    xy = float(np.dot(x, y))
    l = np.array([ynorm, *y])
    r = np.array([xy / ynorm, *x])
    a0 = 0.5 * ((p.tau**2 + float(np.dot(x, x))) / ynorm - xy**2 / ynorm**3)
    a = np.array([a0, 0.0, 0.0, 0.0])
    b = np.array([-(xy / ynorm**2) * a0, 0.0, 0.0, 0.0])
    return AsymptoticData(l=l, r=r, a=a, b=b)
