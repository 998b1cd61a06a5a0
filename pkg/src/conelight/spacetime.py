"""Minkowski geometry in a fixed inertial frame.

Signature (+,-,-,-). The forward cone V+ is the open set x0 > |x|, and the
time-shell map xi sends proper-time/space coordinates (tau, x) to the
hyperboloid point (sqrt(tau^2 + x^2), x) inside V+.

All functions accept either single vectors or numpy stacks (..., 4)/(..., 3)
and are pure.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "FourVector",
    "ShellCoords",
    "four_vector",
    "minkowski_dot",
    "in_forward_cone",
    "spacelike_separated",
    "xi",
    "xi_inverse",
]


@dataclass(frozen=True)
class FourVector:
    """Spacetime point (t, x) with t, |x| in the same length units."""

    t: float
    x: tuple[float, float, float]

    def as_array(self) -> np.ndarray:
        return np.array([self.t, *self.x], dtype=float)

    @classmethod
    def from_array(cls, a) -> "FourVector":
        a = np.asarray(a, dtype=float)
        return cls(float(a[0]), (float(a[1]), float(a[2]), float(a[3])))


@dataclass(frozen=True)
class ShellCoords:
    """Time-shell coordinates (tau, x), tau > 0."""

    tau: float
    x: tuple[float, float, float]

    def __post_init__(self):
        if not self.tau > 0.0:
            raise ValueError(f"tau must be positive, got {self.tau}")


def four_vector(t, x) -> np.ndarray:
    """Assemble (..., 4) arrays from time and spatial parts."""
    t = np.asarray(t, dtype=float)
    x = np.asarray(x, dtype=float)
    return np.concatenate([t[..., None], np.broadcast_to(x, t.shape + (3,))], axis=-1)


def _split(p):
    p = np.asarray(p, dtype=float)
    return p[..., 0], p[..., 1:]


def minkowski_dot(a, b):
    """Inner product a.t*b.t - a.x . b.x; symmetric and bilinear."""
    at, ax = _split(np.asarray(a.as_array() if isinstance(a, FourVector) else a))
    bt, bx = _split(np.asarray(b.as_array() if isinstance(b, FourVector) else b))
    return at * bt - np.sum(ax * bx, axis=-1)


def _coerce(p):
    return p.as_array() if isinstance(p, FourVector) else np.asarray(p, dtype=float)


def in_forward_cone(p, apex=None):
    """Strict membership of p in the open cone V+ with the given apex."""
    d = _coerce(p)
    if apex is not None:
        d = d - _coerce(apex)
    t, x = _split(d)
    return t > np.linalg.norm(x, axis=-1)


def spacelike_separated(a, b):
    """True iff (a-b)^2 < 0 strictly."""
    d = _coerce(a) - _coerce(b)
    return minkowski_dot(d, d) < 0.0


def xi(tau, x) -> np.ndarray:
    """Time-shell map (tau, x) -> (sqrt(tau^2 + x^2), x), tau > 0."""
    if isinstance(tau, ShellCoords):
        tau, x = tau.tau, tau.x
    tau = np.asarray(tau, dtype=float)
    x = np.asarray(x, dtype=float)
    t = np.sqrt(tau**2 + np.sum(x * x, axis=-1))
    return four_vector(t, x)


def xi_inverse(p):
    """Inverse of xi on V+; raises ValueError outside the open cone.

    Returns (tau, x) with tau = sqrt(p^2) > 0.
    """
    d = _coerce(p)
    if not np.all(in_forward_cone(d)):
        raise ValueError("point is not strictly inside the forward cone")
    t, x = _split(d)
    tau = np.sqrt(minkowski_dot(d, d))
    return tau, x
